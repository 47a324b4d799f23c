use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ImpairmentParams, Lightpath};
use crate::net::{DemandId, NodeId};
use crate::spectrum::SpectrumState;

/// Optical power one interferer leaks into the primary at an XC.
pub fn crosstalk_power(params: &ImpairmentParams) -> f64 {
    params.p_r_w * params.eps_xtalk
}

/// How a lightpath meets one node: where it comes from and where it goes.
/// `prev == None` means it is added here, `next == None` dropped here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentAtNode {
    pub demand: DemandId,
    pub prev: Option<NodeId>,
    pub next: Option<NodeId>,
}

impl SegmentAtNode {
    pub fn of(demand: DemandId, nodes: &[NodeId], node: NodeId) -> Option<Self> {
        let i = nodes.iter().position(|&n| n == node)?;
        Some(SegmentAtNode {
            demand,
            prev: i.checked_sub(1).map(|p| nodes[p]),
            next: nodes.get(i + 1).copied(),
        })
    }
}

/// Whether `other` leaks into `primary` inside the XC at their common
/// node. Slot overlap is the caller's business.
///
/// `primary` must leave the node (add or pass-through). Interferers are
/// drop and pass-through channels only, and they may not arrive from the
/// primary's next hop or from its previous hop, nor leave toward its
/// next hop (that would be a slot clash on the outgoing link).
pub fn is_interferer(primary: &SegmentAtNode, other: &SegmentAtNode) -> bool {
    let Some(j) = primary.next else {
        return false;
    };
    let Some(from) = other.prev else {
        return false;
    };
    other.demand != primary.demand
        && from != j
        && other.next != Some(j)
        && primary.prev != Some(from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfererRecord {
    pub interferer: DemandId,
    pub node: NodeId,
    pub slot: usize,
    pub power_w: f64,
}

/// Every (interferer, XC node, slot) incidence on the primary's route.
/// The XCs considered are the add node and each transit node.
pub fn crosstalk_incidences(
    primary: Lightpath<'_>,
    state: &SpectrumState,
    params: &ImpairmentParams,
) -> Vec<InterfererRecord> {
    let nodes = &primary.path.nodes;
    let power = crosstalk_power(params);
    let mut out = Vec::new();
    for &node in &nodes[..nodes.len().saturating_sub(1)] {
        let seg = SegmentAtNode::of(primary.demand, nodes, node).expect("node is on the route");
        for &id in state.node_users(node) {
            if id == primary.demand {
                continue;
            }
            let other = state.assignment(id).expect("node index only holds assigned demands");
            let lo = other.first_slot.max(primary.first_slot);
            let hi = other.last_slot().min(primary.last_slot());
            if lo > hi {
                continue;
            }
            let oseg = SegmentAtNode::of(id, &other.path.nodes, node).expect("indexed node is on the route");
            if is_interferer(&seg, &oseg) {
                out.extend((lo..=hi).map(|slot| InterfererRecord { interferer: id, node, slot, power_w: power }));
            }
        }
    }
    out
}

/// Crosstalk power at the receiver, taken on the worst slot of the
/// primary's range.
pub fn accumulated_crosstalk(primary: Lightpath<'_>, state: &SpectrumState, params: &ImpairmentParams) -> f64 {
    let mut per_slot: BTreeMap<usize, f64> = BTreeMap::new();
    for r in crosstalk_incidences(primary, state, params) {
        *per_slot.entry(r.slot).or_default() += r.power_w;
    }
    per_slot.into_values().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phys::dbm_to_watts;

    const A: NodeId = NodeId(0);
    const B: NodeId = NodeId(1);
    const D: NodeId = NodeId(3);

    fn seg(demand: DemandId, prev: Option<NodeId>, next: Option<NodeId>) -> SegmentAtNode {
        SegmentAtNode { demand, prev, next }
    }

    #[test]
    fn crosstalk_power_values() {
        let p = ImpairmentParams::default();
        assert!((crate::phys::watts_to_dbm(crosstalk_power(&p)) + 30.5).abs() < 1e-12);
        assert!((crosstalk_power(&p) - 0.8913e-6).abs() < 1e-9);
        let zero = ImpairmentParams { eps_xtalk: 0.0, ..p.clone() };
        assert_eq!(crosstalk_power(&zero), 0.0);
        let loud = ImpairmentParams { p_r_w: dbm_to_watts(0.0), ..p };
        assert!((crate::phys::watts_to_dbm(crosstalk_power(&loud)) + 18.5).abs() < 1e-12);
    }

    #[test]
    fn add_primary_cases() {
        // Primary added at C toward B.
        let primary = seg(1, None, Some(B));
        assert!(is_interferer(&primary, &seg(2, Some(A), None)));
        assert!(!is_interferer(&primary, &seg(2, Some(B), None)));
        // Pass-through toward A or D interferes; toward B would clash.
        assert!(is_interferer(&primary, &seg(2, Some(D), Some(A))));
        assert!(!is_interferer(&primary, &seg(2, Some(A), Some(B))));
        // Another add channel is not an interferer.
        assert!(!is_interferer(&primary, &seg(2, None, Some(A))));
        assert!(!is_interferer(&primary, &seg(1, Some(A), None)));
    }

    #[test]
    fn pass_through_primary_cases() {
        // Primary D -> C -> B.
        let primary = seg(1, Some(D), Some(B));
        assert!(!is_interferer(&primary, &seg(2, Some(A), Some(B))));
        assert!(is_interferer(&primary, &seg(2, Some(A), None)));
        assert!(!is_interferer(&primary, &seg(2, Some(D), None)));
        assert!(!is_interferer(&primary, &seg(2, Some(B), Some(A))));
        assert!(!is_interferer(&primary, &seg(2, None, Some(A))));
        // A dropped primary has no outgoing XC port to disturb.
        assert!(!is_interferer(&seg(1, Some(D), None), &seg(2, Some(A), None)));
    }
}
