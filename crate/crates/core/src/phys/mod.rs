//! Physical-layer impairments: in-band XC crosstalk, GN-model nonlinear
//! interference, coherent-receiver noise variances, SINR and the 4-QAM
//! symbol error probability.

mod crosstalk;
mod nli;
mod params;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::Result;
use crate::net::{CandidatePath, DemandId};
use crate::spectrum::{Assignment, SpectrumState};

pub use crosstalk::{
    accumulated_crosstalk, crosstalk_incidences, crosstalk_power, is_interferer, InterfererRecord, SegmentAtNode,
};
pub use nli::{channel_band, nli_path_power, nli_psd};
pub use params::{
    db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, BeatVarianceMode, ImpairmentParams, ParamsDocument,
    DEFAULT_ELECTRICAL_BANDWIDTH_HZ, DEFAULT_SLOT_WIDTH_HZ,
};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// A lightpath, placed or only proposed, as seen by the impairment code.
#[derive(Debug, Clone, Copy)]
pub struct Lightpath<'a> {
    pub demand: DemandId,
    pub path: &'a CandidatePath,
    pub first_slot: usize,
    pub width: usize,
}

impl<'a> Lightpath<'a> {
    pub fn new(demand: DemandId, path: &'a CandidatePath, first_slot: usize, width: usize) -> Self {
        Lightpath { demand, path, first_slot, width }
    }

    pub fn last_slot(&self) -> usize {
        self.first_slot + self.width - 1
    }
}

impl<'a> From<&'a Assignment> for Lightpath<'a> {
    fn from(a: &'a Assignment) -> Self {
        Lightpath { demand: a.id(), path: &a.path, first_slot: a.first_slot, width: a.width }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrBreakdown {
    /// Electrical signal power `(R²/2)·P_lo·P_r`.
    pub p_ch: f64,
    pub d_squared: f64,
    pub var_lo_ase: f64,
    pub var_lo_xtalk: f64,
    pub var_lo_nli: f64,
    pub var_shot: f64,
    /// Optical crosstalk power reaching the receiver, W.
    pub p_xtalk_w: f64,
    /// NLI power accumulated over the route, W.
    pub p_nli_w: f64,
    pub edfa_count: u32,
    pub sinr: f64,
    /// `P_nli/P_r + P_xt/P_r + 1/SNR_ase`.
    pub inverse_sinr_ratio_form: f64,
}

impl SinrBreakdown {
    pub fn sinr_db(&self) -> f64 {
        linear_to_db(self.sinr)
    }
}

/// ASE power spectral density of one amplifier, W/Hz.
pub fn ase_psd(params: &ImpairmentParams) -> f64 {
    params.n_sp * PLANCK * params.carrier_hz() * (params.edfa_gain - 1.0)
}

/// Receiver noise budget for a signal that crossed `edfa_count`
/// amplifiers and picked up `p_xtalk_w` of crosstalk and `p_nli_w` of
/// NLI.
pub fn sinr_from_powers(params: &ImpairmentParams, edfa_count: u32, p_xtalk_w: f64, p_nli_w: f64) -> SinrBreakdown {
    let r = params.responsivity_a_per_w;
    let (p_lo, p_r) = (params.p_lo_w, params.p_r_w);
    let be = params.electrical_bandwidth_hz;
    let s_ase = ase_psd(params);
    let m = edfa_count as f64;

    let p_ch = r * r / 2.0 * p_lo * p_r;
    let d_squared = r * r * p_r * p_lo / 8.0;
    let var_lo_ase = r * r / 2.0 * p_lo * m * s_ase * be;
    let shot_power = p_r + p_lo + p_xtalk_w + 2.0 * s_ase * params.optical_bandwidth_hz;
    let (var_lo_xtalk, var_lo_nli, var_shot) = match params.beat_variance_mode {
        BeatVarianceMode::Consistent => (
            r * r / 8.0 * p_lo * p_xtalk_w,
            r * r / 8.0 * p_lo * p_nli_w,
            ELEMENTARY_CHARGE * r / 2.0 * shot_power * be,
        ),
        BeatVarianceMode::PaperLiteral => (
            r * r / 2.0 * (p_lo * p_xtalk_w).sqrt(),
            r * r / 2.0 * (p_lo * p_nli_w).sqrt(),
            ELEMENTARY_CHARGE * r / 2.0 * shot_power,
        ),
    };
    let total = var_lo_ase + var_lo_xtalk + var_lo_nli + var_shot;
    let inverse_sinr_ratio_form = p_nli_w / p_r + p_xtalk_w / p_r + var_lo_ase / d_squared;
    SinrBreakdown {
        p_ch,
        d_squared,
        var_lo_ase,
        var_lo_xtalk,
        var_lo_nli,
        var_shot,
        p_xtalk_w,
        p_nli_w,
        edfa_count,
        sinr: d_squared / total,
        inverse_sinr_ratio_form,
    }
}

/// SINR of `lightpath` against every other allocation in `state`.
pub fn sinr(lightpath: Lightpath<'_>, state: &SpectrumState, params: &ImpairmentParams) -> Result<SinrBreakdown> {
    let p_xt = accumulated_crosstalk(lightpath, state, params);
    let p_nli = nli_path_power(lightpath, state, params)?;
    Ok(sinr_from_powers(params, lightpath.path.edfa_count, p_xt, p_nli))
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// 4-QAM symbol error probability at the given linear SINR.
pub fn symbol_error_prob(sinr_linear: f64) -> f64 {
    let q = q_function(sinr_linear.max(0.0).sqrt());
    2.0 * q * (1.0 - 0.5 * q)
}

/// Filter-narrowing reservation: one allowance per WSS the route passes.
pub fn guard_slots(path: &CandidatePath, params: &ImpairmentParams) -> usize {
    params.guard_slots_per_wss * path.hop_count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_params() -> ImpairmentParams {
        ImpairmentParams {
            electrical_bandwidth_hz: 12.5e9,
            optical_bandwidth_hz: 50e9,
            gamma_per_w_km: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn clean_single_span_matches_closed_form() {
        let p = golden_params();
        let b = sinr_from_powers(&p, 1, 0.0, 0.0);
        let closed = p.p_r_w / (4.0 * ase_psd(&p) * p.electrical_bandwidth_hz);
        assert!((b.sinr - closed).abs() / closed < 0.01, "{} vs {}", b.sinr, closed);
        assert!((b.sinr - 39.4).abs() < 0.4);
        assert!((1.0 / b.inverse_sinr_ratio_form - closed).abs() / closed < 1e-12);
    }

    #[test]
    fn one_crosstalk_incidence_drops_below_threshold() {
        let p = golden_params();
        let b = sinr_from_powers(&p, 1, crosstalk_power(&p), 0.0);
        let clean = sinr_from_powers(&p, 1, 0.0, 0.0);
        assert!((b.inverse_sinr_ratio_form - clean.inverse_sinr_ratio_form - p.eps_xtalk).abs() < 1e-15);
        assert!((b.sinr_db() - 14.03).abs() < 0.05, "{}", b.sinr_db());
        assert!(b.sinr < p.sinr_threshold);
    }

    #[test]
    fn consistent_mode_is_scale_free() {
        let p = golden_params();
        let a = sinr_from_powers(&p, 3, 2e-6, 1e-7);
        let c = 7.5;
        // ASE power scales through n_sp.
        let scaled = ImpairmentParams { p_lo_w: p.p_lo_w * c, p_r_w: p.p_r_w * c, n_sp: p.n_sp * c, ..p.clone() };
        let b = sinr_from_powers(&scaled, 3, 2e-6 * c, 1e-7 * c);
        assert!((a.inverse_sinr_ratio_form - b.inverse_sinr_ratio_form).abs() < 1e-15 * a.inverse_sinr_ratio_form.max(1.0));
        // Only shot noise (which is not a beat term) breaks exact invariance.
        let strip = |s: &SinrBreakdown| s.d_squared / (s.var_lo_ase + s.var_lo_xtalk + s.var_lo_nli);
        assert!((strip(&a) - strip(&b)).abs() / strip(&a) < 1e-12);
    }

    #[test]
    fn single_interferer_ratio_in_consistent_mode() {
        let p = golden_params();
        let b = sinr_from_powers(&p, 1, crosstalk_power(&p), 0.0);
        // d² / σ²_lo-x = P_r / P_xt
        assert!((b.d_squared / b.var_lo_xtalk - 1.0 / p.eps_xtalk).abs() < 1e-9);
    }

    #[test]
    fn paper_literal_mode_differs() {
        let p = ImpairmentParams { beat_variance_mode: BeatVarianceMode::PaperLiteral, ..golden_params() };
        let b = sinr_from_powers(&p, 1, crosstalk_power(&p), 0.0);
        let r = p.responsivity_a_per_w;
        assert!((b.var_lo_xtalk - r * r / 2.0 * (p.p_lo_w * crosstalk_power(&p)).sqrt()).abs() < 1e-24);
    }

    #[test]
    fn sinr_vanishes_with_huge_crosstalk() {
        let p = golden_params();
        for mode in [BeatVarianceMode::Consistent, BeatVarianceMode::PaperLiteral] {
            let p = ImpairmentParams { beat_variance_mode: mode, ..p.clone() };
            assert!(sinr_from_powers(&p, 1, 1e12, 0.0).sinr < 1e-6);
        }
    }

    #[test]
    fn ser_golden_values() {
        // Frozen from an arbitrary-precision erfc evaluation.
        let cases = [
            (0.0, 0.75),
            (10.0, 0.001564789636945209807223346),
            (32.0, 1.541725784085705856122301e-8),
            (100.0, 1.523970604832105213194663e-23),
        ];
        for (s, want) in cases {
            assert!((symbol_error_prob(s) - want).abs() < 1e-12, "SINR {s}");
        }
        assert!((symbol_error_prob(100.0) - 1.523970604832105213194663e-23).abs() / 1.5e-23 < 1e-9);
        assert!(symbol_error_prob(1e6) == 0.0);
    }

    #[test]
    fn guard_slot_policy() {
        let path = CandidatePath {
            demand: 0,
            rank: 1,
            nodes: (0..4).map(crate::net::NodeId).collect(),
            links: (0..3).map(crate::net::LinkId).collect(),
            total_km: 300.0,
            spans: vec![1; 3],
            edfa_count: 3,
        };
        let mut p = ImpairmentParams::default();
        assert_eq!(guard_slots(&path, &p), 0);
        p.guard_slots_per_wss = 1;
        assert_eq!(guard_slots(&path, &p), 3);
        let one = CandidatePath { links: vec![crate::net::LinkId(0)], nodes: path.nodes[..2].to_vec(), ..path };
        assert_eq!(guard_slots(&one, &p), 1);
    }
}
