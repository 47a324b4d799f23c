//! Per-link frequency-slot grid and the plan metrics computed from it.
//!
//! Slots are 1-indexed: a link has slots `1..=N`. An [`Assignment`] owns
//! the interval `first_slot..=first_slot + width - 1` on every link of its
//! path, so continuity and contiguity hold by construction; `occupy`
//! enforces range and non-overlap.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::SpectrumError;
use crate::net::{CandidatePath, Demand, DemandId, LinkId, NodeId};

pub const DEFAULT_PSI_PENALTY: f64 = 1e6;

/// A demand placed on a route and slot interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub demand: Demand,
    pub path: CandidatePath,
    pub first_slot: usize,
    /// Occupied width: requested slots plus any guard slots.
    pub width: usize,
}

impl Assignment {
    pub fn id(&self) -> DemandId {
        self.demand.id
    }

    pub fn last_slot(&self) -> usize {
        self.first_slot + self.width - 1
    }

    pub fn covers(&self, slot: usize) -> bool {
        (self.first_slot..=self.last_slot()).contains(&slot)
    }

    /// Position of `node` along the route.
    pub fn node_position(&self, node: NodeId) -> Option<usize> {
        self.path.nodes.iter().position(|&n| n == node)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumState {
    slots: usize,
    psi_penalty: f64,
    /// `grid[link][slot - 1]` is the owning demand.
    grid: Vec<Vec<Option<DemandId>>>,
    assignments: BTreeMap<DemandId, Assignment>,
    blocked: BTreeSet<DemandId>,
    #[serde(skip)]
    node_users: Vec<BTreeSet<DemandId>>,
    #[serde(skip)]
    link_users: Vec<BTreeSet<DemandId>>,
}

impl SpectrumState {
    pub fn new(link_count: usize, node_count: usize, slots: usize) -> Self {
        SpectrumState {
            slots,
            psi_penalty: DEFAULT_PSI_PENALTY,
            grid: vec![vec![None; slots]; link_count],
            assignments: BTreeMap::new(),
            blocked: BTreeSet::new(),
            node_users: vec![BTreeSet::new(); node_count],
            link_users: vec![BTreeSet::new(); link_count],
        }
    }

    pub fn with_psi_penalty(mut self, penalty: f64) -> Self {
        self.psi_penalty = penalty;
        self
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn link_count(&self) -> usize {
        self.grid.len()
    }

    pub fn psi_penalty(&self) -> f64 {
        self.psi_penalty
    }

    pub fn assignments(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments.values()
    }

    pub fn assignment(&self, id: DemandId) -> Option<&Assignment> {
        self.assignments.get(&id)
    }

    pub fn assigned_count(&self) -> usize {
        self.assignments.len()
    }

    pub fn blocked(&self) -> &BTreeSet<DemandId> {
        &self.blocked
    }

    pub fn mark_blocked(&mut self, id: DemandId) {
        self.blocked.insert(id);
    }

    pub fn owner(&self, link: LinkId, slot: usize) -> Option<DemandId> {
        self.grid[link.0][slot - 1]
    }

    pub fn link_occupancy(&self, link: LinkId) -> &[Option<DemandId>] {
        &self.grid[link.0]
    }

    /// Demands whose route visits `node` (as source, transit or sink).
    pub fn node_users(&self, node: NodeId) -> &BTreeSet<DemandId> {
        &self.node_users[node.0]
    }

    /// Demands routed over `link`.
    pub fn link_users(&self, link: LinkId) -> &BTreeSet<DemandId> {
        &self.link_users[link.0]
    }

    pub fn is_free(&self, links: &[LinkId], first: usize, width: usize) -> bool {
        first >= 1
            && width >= 1
            && first + width - 1 <= self.slots
            && links.iter().all(|l| self.grid[l.0][first - 1..first - 1 + width].iter().all(Option::is_none))
    }

    /// Places `assignment`; on error nothing is modified.
    pub fn occupy(&mut self, assignment: Assignment) -> Result<(), SpectrumError> {
        let id = assignment.id();
        if assignment.width == 0 {
            return Err(SpectrumError::ZeroWidth);
        }
        if assignment.path.links.is_empty() {
            return Err(SpectrumError::EmptyPath(id));
        }
        let (first, last) = (assignment.first_slot, assignment.first_slot + assignment.width - 1);
        if first < 1 || last > self.slots {
            return Err(SpectrumError::OutOfRange { first, last, slots: self.slots });
        }
        if self.assignments.contains_key(&id) {
            return Err(SpectrumError::AlreadyAssigned(id));
        }
        for &l in &assignment.path.links {
            for slot in first..=last {
                if let Some(owner) = self.grid[l.0][slot - 1] {
                    return Err(SpectrumError::Overlap { link: l, slot, owner });
                }
            }
        }
        for &l in &assignment.path.links {
            for cell in &mut self.grid[l.0][first - 1..last] {
                *cell = Some(id);
            }
            self.link_users[l.0].insert(id);
        }
        for &n in &assignment.path.nodes {
            self.node_users[n.0].insert(id);
        }
        self.blocked.remove(&id);
        self.assignments.insert(id, assignment);
        Ok(())
    }

    /// Removes a demand's allocation, returning it.
    pub fn release(&mut self, id: DemandId) -> Option<Assignment> {
        let a = self.assignments.remove(&id)?;
        for &l in &a.path.links {
            for cell in &mut self.grid[l.0][a.first_slot - 1..a.last_slot()] {
                *cell = None;
            }
            self.link_users[l.0].remove(&id);
        }
        for &n in &a.path.nodes {
            self.node_users[n.0].remove(&id);
        }
        Some(a)
    }

    /// Every start slot `f` such that `f..f+width` is free on all `links`,
    /// ascending.
    pub fn first_fit_positions(&self, links: &[LinkId], width: usize) -> Vec<usize> {
        if width == 0 || width > self.slots {
            return Vec::new();
        }
        let busy: Vec<bool> =
            (0..self.slots).map(|s| links.iter().any(|l| self.grid[l.0][s].is_some())).collect();
        let mut out = Vec::new();
        let mut run = 0;
        for (s, &b) in busy.iter().enumerate() {
            run = if b { 0 } else { run + 1 };
            if run >= width {
                out.push(s + 2 - width);
            }
        }
        out
    }

    /// Highest occupied slot on the link, 0 when empty.
    pub fn highest_occupied(&self, link: LinkId) -> usize {
        self.grid[link.0].iter().rposition(Option::is_some).map_or(0, |i| i + 1)
    }

    pub fn occupied_count(&self, link: LinkId) -> usize {
        self.grid[link.0].iter().filter(|c| c.is_some()).count()
    }

    /// Number of demands routed over the link.
    pub fn demand_count(&self, link: LinkId) -> usize {
        self.link_users[link.0].len()
    }

    /// `1 - largest free block / total free`. Zero for an empty link and,
    /// by convention, for a fully occupied one.
    pub fn fragmentation(&self, link: LinkId) -> f64 {
        let mut total = 0usize;
        let mut largest = 0usize;
        let mut run = 0usize;
        for cell in &self.grid[link.0] {
            if cell.is_none() {
                total += 1;
                run += 1;
                largest = largest.max(run);
            } else {
                run = 0;
            }
        }
        if total == 0 {
            0.0
        } else {
            1.0 - largest as f64 / total as f64
        }
    }

    /// ψ·weight for one link: `R / (N - k*) · weight`, where `R` counts
    /// demands on the link and `k*` is its highest occupied slot. A link
    /// filled to the top slot returns `penalty · R · weight`.
    pub fn psi(&self, link: LinkId, weight: f64) -> f64 {
        let r = self.demand_count(link);
        if r == 0 {
            return 0.0;
        }
        let k_star = self.highest_occupied(link);
        if k_star >= self.slots {
            self.psi_penalty * r as f64 * weight
        } else {
            r as f64 / (self.slots - k_star) as f64 * weight
        }
    }

    /// Σ over links of ψ·d.
    pub fn objective_value(&self, distances: &[f64]) -> f64 {
        (0..self.grid.len()).map(|l| self.psi(LinkId(l), distances[l])).sum()
    }

    pub fn metrics(&self, distances: &[f64]) -> Metrics {
        let links = self.grid.len();
        let f_avg = if links == 0 {
            0.0
        } else {
            (0..links).map(|l| self.fragmentation(LinkId(l))).sum::<f64>() / links as f64
        };
        let dbp = (0..links).map(|l| self.demand_count(LinkId(l)) as f64 * distances[l]).sum();
        let dbp_slot_weighted = (0..links).map(|l| self.occupied_count(LinkId(l)) as f64 * distances[l]).sum();
        let ms = (0..links).map(|l| self.highest_occupied(LinkId(l))).max().unwrap_or(0);
        let blocked_count = self.blocked.len();
        let total_demands = self.assignments.len() + blocked_count;
        Metrics {
            f_avg,
            dbp,
            dbp_slot_weighted,
            ms,
            blocked_count,
            total_demands,
            blocking_probability: if total_demands == 0 {
                0.0
            } else {
                blocked_count as f64 / total_demands as f64
            },
        }
    }

    /// Rebuilds the per-node and per-link indexes, e.g. after
    /// deserialisation.
    pub fn reindex(&mut self, node_count: usize) {
        self.node_users = vec![BTreeSet::new(); node_count];
        self.link_users = vec![BTreeSet::new(); self.grid.len()];
        for a in self.assignments.values() {
            for &l in &a.path.links {
                self.link_users[l.0].insert(a.id());
            }
            for &n in &a.path.nodes {
                self.node_users[n.0].insert(a.id());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean per-link fragmentation.
    pub f_avg: f64,
    /// Delay-bandwidth product Σ R_ij · d_ij.
    pub dbp: f64,
    /// Σ occupied slots · d_ij.
    pub dbp_slot_weighted: f64,
    /// Maximum subcarrier (slot) index in use on any link.
    pub ms: usize,
    pub blocked_count: usize,
    pub total_demands: usize,
    pub blocking_probability: f64,
}
