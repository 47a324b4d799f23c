//! Depth-first branch-and-bound over (route, start slot) choices. Solves
//! the same model as the ILP formulation on small instances: every demand
//! must be served, spectrum constraints hold, every demand satisfies the
//! SINR constraint against all others, and Σ ψ·d is minimised.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{check_demands, CandidatePath, Demand, DemandId, Topology};
use crate::phys::{guard_slots, sinr, ImpairmentParams, Lightpath};
use crate::planner::{prepare_paths, InstanceKey, PlanResult};
use crate::spectrum::{Assignment, Metrics, SpectrumState, DEFAULT_PSI_PENALTY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactLimits {
    pub max_demands: usize,
    pub max_nodes_explored: Option<u64>,
    pub wall_clock_s: Option<f64>,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { max_demands: 8, max_nodes_explored: None, wall_clock_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactChoice {
    pub demand: DemandId,
    pub path_rank: usize,
    pub first_slot: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub instance: InstanceKey,
    pub impairments: bool,
    /// Best objective found; `None` when nothing feasible was found.
    pub objective: Option<f64>,
    /// Choices in demand input order.
    pub assignment: Vec<ExactChoice>,
    pub metrics: Option<Metrics>,
    pub proven_optimal: bool,
    pub infeasible: bool,
    pub nodes_explored: u64,
}

struct Search<'a> {
    demands: &'a [Demand],
    paths: &'a [Vec<CandidatePath>],
    params: &'a ImpairmentParams,
    impairments: bool,
    distances: Vec<f64>,
    limits: &'a ExactLimits,
    started: Instant,
    nodes: u64,
    aborted: bool,
    best: Option<(f64, Vec<ExactChoice>, Metrics)>,
    current: Vec<ExactChoice>,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.limits.max_nodes_explored.is_some_and(|m| self.nodes >= m) {
            self.aborted = true;
        }
        if self.nodes % 256 == 0 {
            if let Some(s) = self.limits.wall_clock_s {
                if self.started.elapsed() >= Duration::from_secs_f64(s) {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    /// The newly placed demand and every placed demand it can disturb
    /// (those sharing a node) must still satisfy the ratio-form limit.
    fn sinr_ok(&self, state: &SpectrumState, placed: DemandId) -> Result<bool> {
        let a = state.assignment(placed).expect("just placed");
        let mut affected: Vec<DemandId> = a.path.nodes.iter().flat_map(|&n| state.node_users(n).iter().copied()).collect();
        affected.sort_unstable();
        affected.dedup();
        for id in affected {
            let b = sinr(Lightpath::from(state.assignment(id).expect("indexed")), state, self.params)?;
            if b.inverse_sinr_ratio_form > self.params.sis {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn dfs(&mut self, depth: usize, state: &mut SpectrumState) -> Result<()> {
        if depth == self.demands.len() {
            let obj = state.objective_value(&self.distances);
            if self.best.as_ref().is_none_or(|b| obj < b.0) {
                self.best = Some((obj, self.current.clone(), state.metrics(&self.distances)));
            }
            return Ok(());
        }
        let demand = &self.demands[depth];
        for path in &self.paths[depth] {
            let width = demand.rho + guard_slots(path, self.params);
            if width > state.slots() {
                continue;
            }
            for f in state.first_fit_positions(&path.links, width) {
                if self.out_of_budget() {
                    return Ok(());
                }
                self.nodes += 1;
                state.occupy(Assignment { demand: demand.clone(), path: path.clone(), first_slot: f, width })?;
                // ψ only grows as demands are added, so a partial plan that
                // already matches the incumbent cannot improve on it.
                let bound = state.objective_value(&self.distances);
                let keep = self.best.as_ref().is_none_or(|b| bound < b.0)
                    && (!self.impairments || self.sinr_ok(state, demand.id)?);
                if keep {
                    self.current.push(ExactChoice { demand: demand.id, path_rank: path.rank, first_slot: f, width });
                    self.dfs(depth + 1, state)?;
                    self.current.pop();
                }
                state.release(demand.id);
            }
        }
        Ok(())
    }
}

/// Solves the instance exactly, or as far as `limits` allow.
pub fn exact_solve(
    topology: &Topology,
    demands: &[Demand],
    params: &ImpairmentParams,
    slots: usize,
    k_paths: usize,
    impairments: bool,
    limits: &ExactLimits,
) -> Result<ExactResult> {
    if demands.len() > limits.max_demands {
        return Err(Error::ExactRefused(format!(
            "{} demands exceed the cap of {}; use the heuristic",
            demands.len(),
            limits.max_demands
        )));
    }
    check_demands(topology, demands)?;
    params.validate()?;
    let paths = prepare_paths(topology, demands, k_paths, params);
    let mut search = Search {
        demands,
        paths: &paths,
        params,
        impairments,
        distances: topology.normalize_distances(),
        limits,
        started: Instant::now(),
        nodes: 0,
        aborted: false,
        best: None,
        current: Vec::with_capacity(demands.len()),
    };
    let mut state =
        SpectrumState::new(topology.link_count(), topology.node_count(), slots).with_psi_penalty(DEFAULT_PSI_PENALTY);
    search.dfs(0, &mut state)?;

    let proven = !search.aborted;
    let (objective, assignment, metrics) = match search.best {
        Some((o, a, m)) => (Some(o), a, Some(m)),
        None => (None, Vec::new(), None),
    };
    Ok(ExactResult {
        instance: InstanceKey::new(topology, demands, slots, k_paths),
        impairments,
        infeasible: proven && objective.is_none(),
        objective,
        assignment,
        metrics,
        proven_optimal: proven && objective.is_some(),
        nodes_explored: search.nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Gap {
    Percent { value: f64 },
    NotApplicable { reason: String },
}

impl Gap {
    pub fn percent(&self) -> Option<f64> {
        match self {
            Gap::Percent { value } => Some(*value),
            Gap::NotApplicable { .. } => None,
        }
    }

    fn na(reason: &str) -> Self {
        Gap::NotApplicable { reason: reason.to_owned() }
    }
}

/// `100·(heuristic − exact)/exact`, or N/A when the two are not
/// comparable.
pub fn optimality_gap(heuristic: &PlanResult, exact: &ExactResult) -> Result<Gap> {
    if heuristic.instance != exact.instance {
        return Err(Error::InstanceMismatch("heuristic and exact results were computed on different instances".into()));
    }
    if heuristic.settings.impairments != exact.impairments {
        return Err(Error::InstanceMismatch("impairment settings differ".into()));
    }
    if !heuristic.all_assigned() {
        return Ok(Gap::na("heuristic blocked demands"));
    }
    if exact.infeasible {
        return Ok(Gap::na("exact model infeasible"));
    }
    let Some(opt) = exact.objective.filter(|_| exact.proven_optimal) else {
        return Ok(Gap::na("exact result not proven optimal"));
    };
    if heuristic.settings.impairments && !heuristic.mutual_feasible {
        return Ok(Gap::na("heuristic plan violates the mutual SINR constraint"));
    }
    let h = heuristic.objective;
    if opt == 0.0 {
        return Ok(if h == 0.0 { Gap::Percent { value: 0.0 } } else { Gap::na("exact objective is zero") });
    }
    Ok(Gap::Percent { value: 100.0 * (h - opt) / opt })
}
