use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the LO beat terms for crosstalk and NLI are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BeatVarianceMode {
    /// `(R²/8)·P_lo·P_x`, scaled like the signal term so the crosstalk and
    /// NLI contributions to 1/SINR are plain optical power ratios.
    #[default]
    Consistent,
    /// `(R²/2)·√(P_lo·P_x)` exactly as printed. Not dimensionally
    /// consistent with the other variances; kept for comparison runs.
    PaperLiteral,
}

/// Physical-layer constants, stored in linear SI-ish units.
///
/// Distances stay in km and fibre coefficients in their customary units
/// (`dB/km`, `1/(W·km)`, `ps²/km`); the NLI code converts them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    pub p_lo_w: f64,
    pub p_r_w: f64,
    pub responsivity_a_per_w: f64,
    pub wavelength_m: f64,
    pub n_sp: f64,
    pub edfa_gain: f64,
    pub span_length_km: f64,
    pub alpha_db_per_km: f64,
    pub wss_loss_db: f64,
    pub eps_xtalk: f64,
    pub gamma_per_w_km: f64,
    pub beta2_ps2_per_km: f64,
    pub sis: f64,
    pub nsis: f64,
    pub sinr_threshold: f64,
    pub slot_width_hz: f64,
    pub electrical_bandwidth_hz: f64,
    pub optical_bandwidth_hz: f64,
    pub guard_slots_per_wss: usize,
    pub beat_variance_mode: BeatVarianceMode,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

/// Default receiver electrical bandwidth: one OFDM subcarrier.
pub const DEFAULT_ELECTRICAL_BANDWIDTH_HZ: f64 = 100e6;
pub const DEFAULT_SLOT_WIDTH_HZ: f64 = 12.5e9;

impl Default for ImpairmentParams {
    fn default() -> Self {
        let be = DEFAULT_ELECTRICAL_BANDWIDTH_HZ;
        ImpairmentParams {
            p_lo_w: dbm_to_watts(0.0),
            p_r_w: dbm_to_watts(-12.0),
            responsivity_a_per_w: 0.7,
            wavelength_m: 1550e-9,
            n_sp: 2.0,
            edfa_gain: db_to_linear(21.0),
            span_length_km: 100.0,
            alpha_db_per_km: 0.2,
            wss_loss_db: 2.0,
            eps_xtalk: db_to_linear(-18.5),
            gamma_per_w_km: 1.33,
            beta2_ps2_per_km: -21.7,
            sis: 1.0 / 32.0,
            nsis: 200.0,
            sinr_threshold: db_to_linear(15.0),
            slot_width_hz: DEFAULT_SLOT_WIDTH_HZ,
            electrical_bandwidth_hz: be,
            optical_bandwidth_hz: 4.0 * be,
            guard_slots_per_wss: 0,
            beat_variance_mode: BeatVarianceMode::Consistent,
        }
    }
}

impl ImpairmentParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_lo", self.p_lo_w),
            ("p_r", self.p_r_w),
            ("responsivity", self.responsivity_a_per_w),
            ("wavelength", self.wavelength_m),
            ("n_sp", self.n_sp),
            ("span_length_km", self.span_length_km),
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("sis", self.sis),
            ("nsis", self.nsis),
            ("sinr_threshold", self.sinr_threshold),
            ("slot_width_hz", self.slot_width_hz),
            ("electrical_bandwidth_hz", self.electrical_bandwidth_hz),
            ("optical_bandwidth_hz", self.optical_bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.edfa_gain.is_finite() && self.edfa_gain >= 1.0) {
            return Err(Error::Params(format!("edfa_gain must be at least 1 (0 dB), got {}", self.edfa_gain)));
        }
        if !(self.eps_xtalk > 0.0 && self.eps_xtalk < 1.0) {
            return Err(Error::Params(format!("eps_xtalk must lie in (0, 1), got {}", self.eps_xtalk)));
        }
        if !(self.gamma_per_w_km.is_finite() && self.gamma_per_w_km >= 0.0) {
            return Err(Error::Params(format!("gamma must be non-negative, got {}", self.gamma_per_w_km)));
        }
        if !(self.beta2_ps2_per_km.is_finite() && self.beta2_ps2_per_km != 0.0) {
            return Err(Error::Params("beta2 must be finite and non-zero".into()));
        }
        if !self.wss_loss_db.is_finite() {
            return Err(Error::Params("wss_loss_db must be finite".into()));
        }
        if self.nsis <= 10.0 * self.sis {
            return Err(Error::Params(format!("nsis ({}) must exceed 10 x sis ({})", self.nsis, self.sis)));
        }
        Ok(())
    }

    /// Optical carrier frequency `c / λ`.
    pub fn carrier_hz(&self) -> f64 {
        super::SPEED_OF_LIGHT / self.wavelength_m
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ParamsDocument =
            serde_json::from_str(text).map_err(|e| Error::Params(format!("parse failure: {e}")))?;
        doc.resolve()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&crate::error::read_file(path)?)
    }

    pub fn to_document(&self) -> ParamsDocument {
        ParamsDocument {
            p_lo_w: Some(self.p_lo_w),
            p_r_w: Some(self.p_r_w),
            responsivity_a_per_w: Some(self.responsivity_a_per_w),
            wavelength_nm: Some(self.wavelength_m * 1e9),
            n_sp: Some(self.n_sp),
            edfa_gain: Some(self.edfa_gain),
            span_length_km: Some(self.span_length_km),
            alpha_db_per_km: Some(self.alpha_db_per_km),
            wss_loss_db: Some(self.wss_loss_db),
            eps_xtalk: Some(self.eps_xtalk),
            gamma_per_w_km: Some(self.gamma_per_w_km),
            beta2_ps2_per_km: Some(self.beta2_ps2_per_km),
            sis: Some(self.sis),
            nsis: Some(self.nsis),
            sinr_threshold: Some(self.sinr_threshold),
            slot_width_hz: Some(self.slot_width_hz),
            electrical_bandwidth_hz: Some(self.electrical_bandwidth_hz),
            optical_bandwidth_hz: Some(self.optical_bandwidth_hz),
            guard_slots_per_wss: Some(self.guard_slots_per_wss),
            beat_variance_mode: Some(self.beat_variance_mode),
            ..ParamsDocument::default()
        }
    }
}

/// On-disk parameter file. Every field is optional and falls back to the
/// default; quantities customarily given in dB may be supplied either
/// linearly or with a `_db` / `_dbm` suffix, but not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_lo_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_lo_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_r_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_r_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub responsivity_a_per_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edfa_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edfa_gain_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_length_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_db_per_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wss_loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_xtalk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_xtalk_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_per_w_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2_ps2_per_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nsis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinr_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinr_threshold_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_width_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub electrical_bandwidth_hz: Option<f64>,
    /// Defaults to four times the electrical bandwidth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optical_bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_slots_per_wss: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beat_variance_mode: Option<BeatVarianceMode>,
}

fn pick(name: &str, linear: Option<f64>, db: Option<f64>, conv: fn(f64) -> f64) -> Result<Option<f64>> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Params(format!("{name} given both linearly and in dB"))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(conv(v))),
        (None, None) => Ok(None),
    }
}

impl ParamsDocument {
    pub fn resolve(&self) -> Result<ImpairmentParams> {
        let mut p = ImpairmentParams::default();
        if let Some(v) = pick("p_lo", self.p_lo_w, self.p_lo_dbm, dbm_to_watts)? {
            p.p_lo_w = v;
        }
        if let Some(v) = pick("p_r", self.p_r_w, self.p_r_dbm, dbm_to_watts)? {
            p.p_r_w = v;
        }
        if let Some(v) = pick("edfa_gain", self.edfa_gain, self.edfa_gain_db, db_to_linear)? {
            p.edfa_gain = v;
        }
        if let Some(v) = pick("eps_xtalk", self.eps_xtalk, self.eps_xtalk_db, db_to_linear)? {
            p.eps_xtalk = v;
        }
        if let Some(v) = pick("sinr_threshold", self.sinr_threshold, self.sinr_threshold_db, db_to_linear)? {
            p.sinr_threshold = v;
        }
        let plain = [
            (&mut p.responsivity_a_per_w, self.responsivity_a_per_w),
            (&mut p.n_sp, self.n_sp),
            (&mut p.span_length_km, self.span_length_km),
            (&mut p.alpha_db_per_km, self.alpha_db_per_km),
            (&mut p.wss_loss_db, self.wss_loss_db),
            (&mut p.gamma_per_w_km, self.gamma_per_w_km),
            (&mut p.beta2_ps2_per_km, self.beta2_ps2_per_km),
            (&mut p.sis, self.sis),
            (&mut p.nsis, self.nsis),
            (&mut p.slot_width_hz, self.slot_width_hz),
        ];
        for (slot, v) in plain {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(nm) = self.wavelength_nm {
            p.wavelength_m = nm * 1e-9;
        }
        if let Some(be) = self.electrical_bandwidth_hz {
            p.electrical_bandwidth_hz = be;
        }
        p.optical_bandwidth_hz = self.optical_bandwidth_hz.unwrap_or(4.0 * p.electrical_bandwidth_hz);
        if let Some(g) = self.guard_slots_per_wss {
            p.guard_slots_per_wss = g;
        }
        if let Some(m) = self.beat_variance_mode {
            p.beat_variance_mode = m;
        }
        p.validate()?;
        Ok(p)
    }
}
