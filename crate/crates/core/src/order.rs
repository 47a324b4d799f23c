//! Demand processing orders: Most Subcarriers First (MSF) and Most
//! Congested Demands First (MCDF).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::net::{delay_max, CandidatePath, Demand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandOrder {
    Msf,
    Mcdf,
}

impl DemandOrder {
    pub const ALL: [DemandOrder; 2] = [DemandOrder::Msf, DemandOrder::Mcdf];

    pub fn as_str(self) -> &'static str {
        match self {
            DemandOrder::Msf => "msf",
            DemandOrder::Mcdf => "mcdf",
        }
    }
}

impl fmt::Display for DemandOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DemandOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "msf" => Ok(DemandOrder::Msf),
            "mcdf" => Ok(DemandOrder::Mcdf),
            _ => Err(format!("unknown ordering {s:?} (expected msf or mcdf)")),
        }
    }
}

/// How MCDF averages G_k over a demand's paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GDivisor {
    /// Divide by the number of paths actually found.
    #[default]
    PathCount,
    /// Always divide by K.
    StrictK(usize),
}

/// Descending ρ, ties by ascending id.
pub fn msf_order(demands: &[Demand]) -> Vec<Demand> {
    let mut out = demands.to_vec();
    out.sort_by(|a, b| b.rho.cmp(&a.rho).then(a.id.cmp(&b.id)));
    out
}

/// `C_l`: Σ ρ over demands having at least one candidate path through
/// link `l`. `paths[i]` are the candidates of `demands[i]`.
pub fn congestion_metric(demands: &[Demand], paths: &[Vec<CandidatePath>], link_count: usize) -> Vec<u64> {
    let mut c = vec![0u64; link_count];
    let mut touched = vec![false; link_count];
    for (d, ps) in demands.iter().zip(paths) {
        touched.iter_mut().for_each(|t| *t = false);
        for l in ps.iter().flat_map(|p| &p.links) {
            touched[l.0] = true;
        }
        for (ci, &t) in c.iter_mut().zip(&touched) {
            if t {
                *ci += d.rho as u64;
            }
        }
    }
    c
}

/// Per-demand MCDF scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingScores {
    pub congestion: Vec<u64>,
    pub delay_max: f64,
    /// `L_pk` per demand and path.
    pub path_load: Vec<Vec<u64>>,
    /// `G_k` per demand and path.
    pub path_score: Vec<Vec<f64>>,
    /// `G_de` per demand.
    pub demand_score: Vec<f64>,
    sums: Vec<f64>,
    divisors: Vec<usize>,
}

pub fn mcdf_scores(
    demands: &[Demand],
    paths: &[Vec<CandidatePath>],
    link_count: usize,
    divisor: GDivisor,
) -> OrderingScores {
    let congestion = congestion_metric(demands, paths, link_count);
    let dmax = delay_max(paths.iter().flatten());
    let path_load: Vec<Vec<u64>> = paths
        .iter()
        .map(|ps| ps.iter().map(|p| p.links.iter().map(|l| congestion[l.0]).sum()).collect())
        .collect();
    // G_k·dmax = L·(dmax - delay); comparisons are done on these sums so
    // they don't depend on the division.
    let sums: Vec<f64> = path_load
        .iter()
        .zip(paths)
        .map(|(ls, ps)| ls.iter().zip(ps).map(|(&l, p)| l as f64 * (dmax - p.delay())).sum())
        .collect();
    let path_score = path_load
        .iter()
        .zip(paths)
        .map(|(ls, ps)| {
            ls.iter()
                .zip(ps)
                .map(|(&l, p)| if dmax > 0.0 { l as f64 * (1.0 - p.delay() / dmax) } else { 0.0 })
                .collect()
        })
        .collect();
    let divisors: Vec<usize> = paths
        .iter()
        .map(|ps| match divisor {
            GDivisor::PathCount => ps.len().max(1),
            GDivisor::StrictK(k) => k.max(1),
        })
        .collect();
    let demand_score = sums
        .iter()
        .zip(&divisors)
        .map(|(&s, &n)| if dmax > 0.0 { s / (n as f64 * dmax) } else { 0.0 })
        .collect();
    OrderingScores { congestion, delay_max: dmax, path_load, path_score, demand_score, sums, divisors }
}

/// Descending G_de, ties by descending ρ then ascending id.
pub fn mcdf_order(demands: &[Demand], paths: &[Vec<CandidatePath>], link_count: usize, divisor: GDivisor) -> Vec<Demand> {
    let s = mcdf_scores(demands, paths, link_count, divisor);
    let mut idx: Vec<usize> = (0..demands.len()).collect();
    idx.sort_by(|&a, &b| {
        let lhs = s.sums[a] * s.divisors[b] as f64;
        let rhs = s.sums[b] * s.divisors[a] as f64;
        rhs.partial_cmp(&lhs)
            .unwrap_or(Ordering::Equal)
            .then(demands[b].rho.cmp(&demands[a].rho))
            .then(demands[a].id.cmp(&demands[b].id))
    });
    idx.into_iter().map(|i| demands[i].clone()).collect()
}

pub fn order_demands(
    order: DemandOrder,
    demands: &[Demand],
    paths: &[Vec<CandidatePath>],
    link_count: usize,
    divisor: GDivisor,
) -> Vec<Demand> {
    match order {
        DemandOrder::Msf => msf_order(demands),
        DemandOrder::Mcdf => mcdf_order(demands, paths, link_count, divisor),
    }
}
