//! Sequential RSA heuristic with SINR admission, and the shortest-path
//! and load-balancing baselines.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::net::{candidate_paths, check_demands, CandidatePath, Demand, DemandId, Topology};
use crate::order::{order_demands, DemandOrder, GDivisor};
use crate::phys::{guard_slots, sinr, ImpairmentParams, Lightpath, SinrBreakdown};
use crate::spectrum::{Assignment, Metrics, SpectrumState, DEFAULT_PSI_PENALTY};

/// Path-selection rule applied to each demand in turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Lowest Σ ψ·Δ over the path against the current state.
    Proposed,
    /// Shortest path first (delay-bandwidth product only).
    DbpOnly,
    /// Least loaded path first: smallest maximum occupied-slot count over
    /// the path's links.
    Blsa,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Proposed, Policy::DbpOnly, Policy::Blsa];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Proposed => "proposed",
            Policy::DbpOnly => "dbp-only",
            Policy::Blsa => "blsa",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proposed" => Ok(Policy::Proposed),
            "dbp-only" => Ok(Policy::DbpOnly),
            "blsa" => Ok(Policy::Blsa),
            _ => Err(format!("unknown policy {s:?} (expected proposed, dbp-only or blsa)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSettings {
    pub slots: usize,
    pub k_paths: usize,
    pub ordering: DemandOrder,
    pub policy: Policy,
    /// When false, admission ignores SINR; SINR is still recorded.
    pub impairments: bool,
    #[serde(default)]
    pub g_divisor: GDivisor,
    #[serde(default = "default_penalty")]
    pub psi_penalty: f64,
}

fn default_penalty() -> f64 {
    DEFAULT_PSI_PENALTY
}

impl Default for PlanSettings {
    fn default() -> Self {
        PlanSettings {
            slots: 40,
            k_paths: 3,
            ordering: DemandOrder::Mcdf,
            policy: Policy::Proposed,
            impairments: true,
            g_divisor: GDivisor::PathCount,
            psi_penalty: DEFAULT_PSI_PENALTY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockReason {
    NoPath,
    WidthExceedsCapacity,
    SinrBelowThreshold,
    NoSpectrum,
}

impl fmt::Display for BlockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockReason::NoPath => "no path",
            BlockReason::WidthExceedsCapacity => "width exceeds capacity",
            BlockReason::SinrBelowThreshold => "sinr below threshold",
            BlockReason::NoSpectrum => "no spectrum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandOutcome {
    pub demand: DemandId,
    pub rho: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_slot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    /// SINR against the demands placed before this one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admission_sinr: Option<SinrBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked: Option<BlockReason>,
}

impl DemandOutcome {
    pub fn is_assigned(&self) -> bool {
        self.blocked.is_none()
    }
}

/// Identifies the problem a result was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceKey {
    pub node_count: usize,
    pub link_count: usize,
    pub total_link_km: f64,
    pub slots: usize,
    pub k_paths: usize,
    pub demands: Vec<Demand>,
}

impl InstanceKey {
    pub fn new(topology: &Topology, demands: &[Demand], slots: usize, k_paths: usize) -> Self {
        let mut demands = demands.to_vec();
        demands.sort_by_key(|d| d.id);
        InstanceKey {
            node_count: topology.node_count(),
            link_count: topology.link_count(),
            total_link_km: topology.links().iter().map(|l| l.length_km).sum(),
            slots,
            k_paths,
            demands,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub settings: PlanSettings,
    pub seed: Option<u64>,
    pub instance: InstanceKey,
    pub processing_order: Vec<DemandId>,
    /// One entry per demand, in processing order.
    pub outcomes: Vec<DemandOutcome>,
    pub state: SpectrumState,
    pub metrics: Metrics,
    /// Σ ψ·d with normalised distances.
    pub objective: f64,
    /// SINR of every assigned demand against the final allocation.
    pub final_sinr: BTreeMap<DemandId, SinrBreakdown>,
    /// Assigned demands whose final-state SINR is below threshold.
    pub final_sinr_violations: usize,
    /// Every assigned demand meets `inverse_sinr_ratio_form ≤ SIS` in the
    /// final state, i.e. the plan is feasible for the exact model too.
    pub mutual_feasible: bool,
}

impl PlanResult {
    pub fn assigned_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_assigned()).count()
    }

    pub fn all_assigned(&self) -> bool {
        self.outcomes.iter().all(DemandOutcome::is_assigned)
    }
}

/// K-shortest candidates for each demand, aligned with `demands`.
pub fn prepare_paths(
    topology: &Topology,
    demands: &[Demand],
    k: usize,
    params: &ImpairmentParams,
) -> Vec<Vec<CandidatePath>> {
    demands.iter().map(|d| candidate_paths(topology, d, k, params.span_length_km)).collect()
}

/// Σ ψ·Δ over the path's links against the current state.
pub fn path_score(path: &CandidatePath, state: &SpectrumState, topology: &Topology) -> f64 {
    path.links.iter().map(|&l| state.psi(l, topology.link(l).length_km)).sum()
}

/// Candidates ranked by ascending Σ ψ·Δ, ties by rank.
pub fn sa_select<'a>(paths: &'a [CandidatePath], state: &SpectrumState, topology: &Topology) -> Vec<&'a CandidatePath> {
    let mut scored: Vec<(f64, &CandidatePath)> = paths.iter().map(|p| (path_score(p, state, topology), p)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.rank.cmp(&b.1.rank)));
    scored.into_iter().map(|(_, p)| p).collect()
}

fn policy_order<'a>(
    policy: Policy,
    paths: &'a [CandidatePath],
    state: &SpectrumState,
    topology: &Topology,
) -> Vec<&'a CandidatePath> {
    match policy {
        Policy::Proposed => sa_select(paths, state, topology),
        Policy::DbpOnly => {
            let mut v: Vec<&CandidatePath> = paths.iter().collect();
            v.sort_by(|a, b| a.delay().total_cmp(&b.delay()).then(a.rank.cmp(&b.rank)));
            v
        }
        Policy::Blsa => {
            let load = |p: &CandidatePath| p.links.iter().map(|&l| state.occupied_count(l)).max().unwrap_or(0);
            let mut v: Vec<&CandidatePath> = paths.iter().collect();
            v.sort_by(|a, b| load(a).cmp(&load(b)).then(a.rank.cmp(&b.rank)));
            v
        }
    }
}

/// Tries each candidate in policy order and each first-fit position in
/// ascending order; the first position meeting the SINR threshold (or
/// any position, with impairments off) wins.
pub fn allocate_demand(
    demand: &Demand,
    paths: &[CandidatePath],
    state: &mut SpectrumState,
    topology: &Topology,
    params: &ImpairmentParams,
    settings: &PlanSettings,
) -> Result<DemandOutcome> {
    let mut outcome = DemandOutcome {
        demand: demand.id,
        rho: demand.rho,
        path_rank: None,
        first_slot: None,
        width: None,
        admission_sinr: None,
        blocked: None,
    };
    if paths.is_empty() {
        outcome.blocked = Some(BlockReason::NoPath);
        state.mark_blocked(demand.id);
        return Ok(outcome);
    }
    let mut any_fits = false;
    let mut any_position = false;
    for path in policy_order(settings.policy, paths, state, topology) {
        let width = demand.rho + guard_slots(path, params);
        if width > state.slots() {
            continue;
        }
        any_fits = true;
        for f in state.first_fit_positions(&path.links, width) {
            any_position = true;
            let b = sinr(Lightpath::new(demand.id, path, f, width), state, params)?;
            if settings.impairments && b.sinr < params.sinr_threshold {
                continue;
            }
            state.occupy(Assignment { demand: demand.clone(), path: path.clone(), first_slot: f, width })?;
            outcome.path_rank = Some(path.rank);
            outcome.first_slot = Some(f);
            outcome.width = Some(width);
            outcome.admission_sinr = Some(b);
            return Ok(outcome);
        }
    }
    outcome.blocked = Some(if !any_fits {
        BlockReason::WidthExceedsCapacity
    } else if any_position {
        BlockReason::SinrBelowThreshold
    } else {
        BlockReason::NoSpectrum
    });
    state.mark_blocked(demand.id);
    Ok(outcome)
}

/// SINR of every assignment against the whole state.
pub fn final_state_sinr(state: &SpectrumState, params: &ImpairmentParams) -> Result<BTreeMap<DemandId, SinrBreakdown>> {
    state.assignments().map(|a| Ok((a.id(), sinr(Lightpath::from(a), state, params)?))).collect()
}

pub fn run_plan(
    topology: &Topology,
    demands: &[Demand],
    params: &ImpairmentParams,
    settings: &PlanSettings,
) -> Result<PlanResult> {
    check_demands(topology, demands)?;
    params.validate()?;
    let paths = prepare_paths(topology, demands, settings.k_paths, params);
    let ordered = order_demands(settings.ordering, demands, &paths, topology.link_count(), settings.g_divisor);
    let by_id: BTreeMap<DemandId, &Vec<CandidatePath>> = demands.iter().map(|d| d.id).zip(&paths).collect();

    let mut state = SpectrumState::new(topology.link_count(), topology.node_count(), settings.slots)
        .with_psi_penalty(settings.psi_penalty);
    let mut outcomes = Vec::with_capacity(demands.len());
    for d in &ordered {
        outcomes.push(allocate_demand(d, by_id[&d.id], &mut state, topology, params, settings)?);
    }

    let distances = topology.normalize_distances();
    let final_sinr = final_state_sinr(&state, params)?;
    let final_sinr_violations = final_sinr.values().filter(|b| b.sinr < params.sinr_threshold).count();
    let mutual_feasible = final_sinr.values().all(|b| b.inverse_sinr_ratio_form <= params.sis);
    Ok(PlanResult {
        settings: settings.clone(),
        seed: None,
        instance: InstanceKey::new(topology, demands, settings.slots, settings.k_paths),
        processing_order: ordered.iter().map(|d| d.id).collect(),
        outcomes,
        metrics: state.metrics(&distances),
        objective: state.objective_value(&distances),
        state,
        final_sinr,
        final_sinr_violations,
        mutual_feasible,
    })
}
