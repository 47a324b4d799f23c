//! State dumps and the independent plan checker.
//!
//! The checker works from the dump alone: it rebuilds the topology and
//! routes from names, re-derives every spectrum constraint from the
//! assignment list, and only then recomputes the final-state SINR.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{CandidatePath, Demand, DemandId, NodeId, Topology, TopologyDocument};
use crate::phys::{sinr, ImpairmentParams, Lightpath};
use crate::spectrum::{Assignment, SpectrumState};

pub const DUMP_SCHEMA: &str = "eon-rsa/state-dump/v1";
pub const REPORT_SCHEMA: &str = "eon-rsa/validation/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpAssignment {
    pub demand: DemandId,
    pub source: String,
    pub destination: String,
    pub rho: usize,
    /// Node names from source to destination.
    pub path: Vec<String>,
    pub first_slot: usize,
    pub width: usize,
    /// Start slot used on each hop, when it is not the same everywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_first_slots: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpLink {
    pub tail: String,
    pub head: String,
    /// Owner of each slot, slot 1 first.
    pub owners: Vec<Option<DemandId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDump {
    pub schema: String,
    pub slots: usize,
    pub topology: TopologyDocument,
    pub assignments: Vec<DumpAssignment>,
    #[serde(default)]
    pub blocked: Vec<DemandId>,
    /// Informational; the checker compares it with the assignments but
    /// does not count differences as constraint violations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub occupancy: Vec<DumpLink>,
}

impl StateDump {
    pub fn from_state(topology: &Topology, state: &SpectrumState) -> Self {
        let name = |n: NodeId| topology.node_name(n).to_owned();
        let assignments = state
            .assignments()
            .map(|a| DumpAssignment {
                demand: a.id(),
                source: name(a.demand.source),
                destination: name(a.demand.destination),
                rho: a.demand.rho,
                path: a.path.nodes.iter().map(|&n| name(n)).collect(),
                first_slot: a.first_slot,
                width: a.width,
                link_first_slots: None,
            })
            .collect();
        let occupancy = topology
            .links()
            .iter()
            .map(|l| DumpLink { tail: name(l.tail), head: name(l.head), owners: state.link_occupancy(l.id).to_vec() })
            .collect();
        StateDump {
            schema: DUMP_SCHEMA.into(),
            slots: state.slots(),
            topology: topology.to_document(),
            assignments,
            blocked: state.blocked().iter().copied().collect(),
            occupancy,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: StateDump = serde_json::from_str(text).map_err(|e| Error::Dump(format!("malformed dump: {e}")))?;
        if dump.schema != DUMP_SCHEMA {
            return Err(Error::Dump(format!("unsupported schema {:?}", dump.schema)));
        }
        Ok(dump)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&crate::error::read_file(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Route,
    Duplicate,
    Capacity,
    Contiguity,
    Continuity,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub demands: Vec<DemandId>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSinr {
    pub demand: DemandId,
    pub sinr: f64,
    pub sinr_db: f64,
    pub inverse_sinr_ratio_form: f64,
    pub meets_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub assigned: usize,
    pub violations: Vec<Violation>,
    pub occupancy_mismatches: usize,
    /// SINR is only recomputed for dumps free of constraint violations.
    pub sinr_checked: bool,
    pub sinr: Vec<DemandSinr>,
    pub sinr_violations: usize,
    /// `sinr_violations / assigned`, 0 with nothing assigned.
    pub sinr_violation_fraction: f64,
}

impl ValidationReport {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Checked {
    demand: Demand,
    path: CandidatePath,
    first: usize,
    width: usize,
}

pub fn validate_plan(dump: &StateDump, params: &ImpairmentParams) -> Result<ValidationReport> {
    let topology = Topology::from_document(&dump.topology).map_err(|e| Error::Dump(e.to_string()))?;
    let n = dump.slots;
    let mut violations = Vec::new();
    let mut flag = |kind, demands: Vec<DemandId>, detail: String| violations.push(Violation { kind, demands, detail });

    let mut seen = BTreeSet::new();
    let mut checked: Vec<Checked> = Vec::new();
    for a in &dump.assignments {
        if !seen.insert(a.demand) {
            flag(ViolationKind::Duplicate, vec![a.demand], "demand assigned more than once".into());
            continue;
        }
        let lookup = |s: &str| topology.node_id(s);
        let (Some(src), Some(dst)) = (lookup(&a.source), lookup(&a.destination)) else {
            flag(ViolationKind::Route, vec![a.demand], "unknown endpoint".into());
            continue;
        };
        let Some(nodes) = a.path.iter().map(|s| lookup(s)).collect::<Option<Vec<_>>>() else {
            flag(ViolationKind::Route, vec![a.demand], "path names an unknown node".into());
            continue;
        };
        let distinct: BTreeSet<_> = nodes.iter().collect();
        if nodes.len() < 2 || nodes[0] != src || nodes[nodes.len() - 1] != dst || distinct.len() != nodes.len() {
            flag(ViolationKind::Route, vec![a.demand], "path is not a simple source-destination route".into());
            continue;
        }
        let Some(path) = CandidatePath::from_nodes(&topology, a.demand, 0, nodes, params.span_length_km) else {
            flag(ViolationKind::Route, vec![a.demand], "path uses a missing link".into());
            continue;
        };
        if a.width == 0 || a.width < a.rho {
            flag(
                ViolationKind::Contiguity,
                vec![a.demand],
                format!("block of {} slots cannot carry rho = {}", a.width, a.rho),
            );
            continue;
        }
        if a.first_slot < 1 || a.first_slot + a.width - 1 > n {
            flag(
                ViolationKind::Capacity,
                vec![a.demand],
                format!("slots {}..={} outside 1..={n}", a.first_slot, a.first_slot + a.width - 1),
            );
            continue;
        }
        if let Some(per_link) = &a.link_first_slots {
            if per_link.len() != path.links.len() || per_link.iter().any(|&f| f != a.first_slot) {
                flag(ViolationKind::Continuity, vec![a.demand], "start slot differs between hops".into());
                continue;
            }
        }
        checked.push(Checked {
            demand: Demand { id: a.demand, source: src, destination: dst, rho: a.rho },
            path,
            first: a.first_slot,
            width: a.width,
        });
    }

    // Pairwise overlap on shared links.
    for (i, x) in checked.iter().enumerate() {
        for y in &checked[i + 1..] {
            if x.first > y.first + y.width - 1 || y.first > x.first + x.width - 1 {
                continue;
            }
            let shared: Vec<String> = x
                .path
                .links
                .iter()
                .filter(|l| y.path.links.contains(l))
                .map(|&l| {
                    let link = topology.link(l);
                    format!("{}->{}", topology.node_name(link.tail), topology.node_name(link.head))
                })
                .collect();
            if !shared.is_empty() {
                flag(
                    ViolationKind::Overlap,
                    vec![x.demand.id, y.demand.id],
                    format!("overlapping slots on {}", shared.join(", ")),
                );
            }
        }
    }

    let occupancy_mismatches = occupancy_mismatches(dump, &topology, &checked);
    let assigned = checked.len();
    let mut report = ValidationReport {
        schema: REPORT_SCHEMA.into(),
        assigned,
        violations,
        occupancy_mismatches,
        sinr_checked: false,
        sinr: Vec::new(),
        sinr_violations: 0,
        sinr_violation_fraction: 0.0,
    };
    if !report.violations.is_empty() {
        return Ok(report);
    }

    let mut state = SpectrumState::new(topology.link_count(), topology.node_count(), n);
    for c in &checked {
        state.occupy(Assignment {
            demand: c.demand.clone(),
            path: c.path.clone(),
            first_slot: c.first,
            width: c.width,
        })?;
    }
    for a in state.assignments() {
        let b = sinr(Lightpath::from(a), &state, params)?;
        report.sinr.push(DemandSinr {
            demand: a.id(),
            sinr: b.sinr,
            sinr_db: b.sinr_db(),
            inverse_sinr_ratio_form: b.inverse_sinr_ratio_form,
            meets_threshold: b.sinr >= params.sinr_threshold,
        });
    }
    report.sinr_checked = true;
    report.sinr_violations = report.sinr.iter().filter(|s| !s.meets_threshold).count();
    if assigned > 0 {
        report.sinr_violation_fraction = report.sinr_violations as f64 / assigned as f64;
    }
    Ok(report)
}

/// Cells of the dumped occupancy grid that disagree with the grid implied
/// by the assignments.
fn occupancy_mismatches(dump: &StateDump, topology: &Topology, checked: &[Checked]) -> usize {
    if dump.occupancy.is_empty() {
        return 0;
    }
    let mut implied: BTreeMap<(NodeId, NodeId), Vec<Option<DemandId>>> = BTreeMap::new();
    for c in checked {
        for &l in &c.path.links {
            let link = topology.link(l);
            let row = implied.entry((link.tail, link.head)).or_insert_with(|| vec![None; dump.slots]);
            for cell in &mut row[c.first - 1..c.first - 1 + c.width] {
                *cell = Some(c.demand.id);
            }
        }
    }
    let empty = vec![None; dump.slots];
    let mut mismatches = 0;
    for dl in &dump.occupancy {
        let (Some(t), Some(h)) = (topology.node_id(&dl.tail), topology.node_id(&dl.head)) else {
            mismatches += 1;
            continue;
        };
        let want = implied.get(&(t, h)).unwrap_or(&empty);
        mismatches += (0..dump.slots).filter(|&s| dl.owners.get(s).copied().flatten() != want[s]).count();
    }
    mismatches
}
