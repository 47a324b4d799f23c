//! Shared fixtures and the brute-force optimum used to check the
//! branch-and-bound solver.

#![allow(dead_code)]

use std::path::Path;

use eon_rsa::net::{candidate_paths, CandidatePath, NodeId};
use eon_rsa::phys::{guard_slots, sinr, Lightpath};
use eon_rsa::{Assignment, Demand, ImpairmentParams, SpectrumState, Topology};

pub fn six_node() -> Topology {
    Topology::load(Path::new("builtin:six-node")).unwrap()
}

pub fn nsfnet() -> Topology {
    Topology::load(Path::new("builtin:nsfnet")).unwrap()
}

pub fn topo(nodes: &[&str], edges: &[(&str, &str, f64)]) -> Topology {
    let doc = eon_rsa::net::TopologyDocument {
        name: None,
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        edges: edges
            .iter()
            .map(|&(a, b, km)| eon_rsa::net::EdgeDocument { a: a.into(), b: b.into(), km })
            .collect(),
    };
    Topology::from_document(&doc).unwrap()
}

pub fn demand(t: &Topology, id: u32, s: &str, d: &str, rho: usize) -> Demand {
    Demand::new(id, t.node_id(s).unwrap(), t.node_id(d).unwrap(), rho).unwrap()
}

pub fn path(t: &Topology, id: u32, nodes: &[&str]) -> CandidatePath {
    let ids: Vec<NodeId> = nodes.iter().map(|n| t.node_id(n).unwrap()).collect();
    CandidatePath::from_nodes(t, id, 1, ids, 100.0).unwrap()
}

/// Params with the wide electrical bandwidth used by the closed-form
/// checks, and NLI switched off.
pub fn golden_params() -> ImpairmentParams {
    ImpairmentParams {
        electrical_bandwidth_hz: 12.5e9,
        optical_bandwidth_hz: 50e9,
        gamma_per_w_km: 0.0,
        ..Default::default()
    }
}

struct Choice {
    path: usize,
    first: usize,
    width: usize,
}

/// Σ ψ·d computed straight from the choice list.
fn objective(topology: &Topology, paths: &[Vec<CandidatePath>], choices: &[Choice], slots: usize) -> f64 {
    let d = topology.normalize_distances();
    let mut total = 0.0;
    for l in 0..topology.link_count() {
        let mut r = 0usize;
        let mut top = 0usize;
        for (i, c) in choices.iter().enumerate() {
            if paths[i][c.path].links.iter().any(|x| x.0 == l) {
                r += 1;
                top = top.max(c.first + c.width - 1);
            }
        }
        if r == 0 {
            continue;
        }
        total += if top == slots { 1e6 * r as f64 * d[l] } else { r as f64 / (slots - top) as f64 * d[l] };
    }
    total
}

fn overlaps(paths: &[Vec<CandidatePath>], choices: &[Choice], i: usize) -> bool {
    let a = &choices[i];
    let pa = &paths[i][a.path];
    (0..i).any(|j| {
        let b = &choices[j];
        let pb = &paths[j][b.path];
        let disjoint = a.first + a.width <= b.first || b.first + b.width <= a.first;
        !disjoint && pa.links.iter().any(|l| pb.links.contains(l))
    })
}

fn mutually_feasible(
    topology: &Topology,
    demands: &[Demand],
    paths: &[Vec<CandidatePath>],
    choices: &[Choice],
    slots: usize,
    params: &ImpairmentParams,
) -> bool {
    let mut state = SpectrumState::new(topology.link_count(), topology.node_count(), slots);
    for (i, c) in choices.iter().enumerate() {
        state
            .occupy(Assignment {
                demand: demands[i].clone(),
                path: paths[i][c.path].clone(),
                first_slot: c.first,
                width: c.width,
            })
            .unwrap();
    }
    let ok = state
        .assignments()
        .all(|a| sinr(Lightpath::from(a), &state, params).unwrap().inverse_sinr_ratio_form <= params.sis);
    ok
}

/// Minimum objective over every complete (path, start slot) vector that
/// satisfies the spectrum constraints and, with impairments on, the
/// mutual SINR limit. `None` when no vector qualifies.
pub fn enumerate_optimum(
    topology: &Topology,
    demands: &[Demand],
    params: &ImpairmentParams,
    slots: usize,
    k: usize,
    impairments: bool,
) -> Option<f64> {
    let paths: Vec<Vec<CandidatePath>> =
        demands.iter().map(|d| candidate_paths(topology, d, k, params.span_length_km)).collect();
    let mut best: Option<f64> = None;
    let mut choices: Vec<Choice> = Vec::new();

    fn rec(
        i: usize,
        topology: &Topology,
        demands: &[Demand],
        paths: &[Vec<CandidatePath>],
        params: &ImpairmentParams,
        slots: usize,
        impairments: bool,
        choices: &mut Vec<Choice>,
        best: &mut Option<f64>,
    ) {
        if i == demands.len() {
            let obj = objective(topology, paths, choices, slots);
            if best.is_some_and(|b| b <= obj) {
                return;
            }
            if !impairments || mutually_feasible(topology, demands, paths, choices, slots, params) {
                *best = Some(obj);
            }
            return;
        }
        for (pi, p) in paths[i].iter().enumerate() {
            let width = demands[i].rho + guard_slots(p, params);
            if width > slots {
                continue;
            }
            for first in 1..=slots - width + 1 {
                choices.push(Choice { path: pi, first, width });
                if !overlaps(paths, choices, i) {
                    rec(i + 1, topology, demands, paths, params, slots, impairments, choices, best);
                }
                choices.pop();
            }
        }
    }

    rec(0, topology, demands, &paths, params, slots, impairments, &mut choices, &mut best);
    best
}
