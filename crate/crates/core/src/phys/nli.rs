use std::f64::consts::{LN_10, PI};
use std::sync::atomic::{AtomicBool, Ordering};

use super::{ImpairmentParams, Lightpath};
use crate::error::{Error, Result};
use crate::spectrum::SpectrumState;

/// Below this bandwidth the closed-form PSD is outside its validity range.
const GN_VALIDITY_FLOOR_HZ: f64 = 28e9;

static FLOOR_WARNED: AtomicBool = AtomicBool::new(false);

/// Centre frequency and bandwidth of slots `first..first+width`, measured
/// from the lower edge of slot 1.
pub fn channel_band(first_slot: usize, width: usize, slot_width_hz: f64) -> (f64, f64) {
    let center = (first_slot as f64 - 1.0 + width as f64 / 2.0) * slot_width_hz;
    (center, width as f64 * slot_width_hz)
}

/// GN-model NLI power spectral density at the primary's centre, per span,
/// in W/Hz. Every channel is launched at `P_r` spread flat over its band.
///
/// The self term goes negative for narrow channels (its log argument
/// drops below one near 15 GHz); the total is clamped at zero.
pub fn nli_psd(params: &ImpairmentParams, center_hz: f64, bw_hz: f64, neighbours: &[(f64, f64)]) -> Result<f64> {
    let gamma = params.gamma_per_w_km / 1e3;
    let alpha = params.alpha_db_per_km * LN_10 / 10.0 / 1e3;
    let beta2 = params.beta2_ps2_per_km.abs() * 1e-24 / 1e3;

    if bw_hz < GN_VALIDITY_FLOOR_HZ && !FLOOR_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!(
            "channel bandwidth {:.1} GHz is below the {:.0} GHz validity floor of the GN closed form",
            bw_hz / 1e9,
            GN_VALIDITY_FLOOR_HZ / 1e9
        );
    }

    let g = params.p_r_w / bw_hz;
    let mut acc = g * g * (PI * PI * beta2 * bw_hz * bw_hz / alpha).ln();
    for &(fc, b) in neighbours {
        let sep = (center_hz - fc).abs();
        if sep <= b / 2.0 {
            return Err(Error::CoincidentChannel { primary_hz: center_hz, neighbour_hz: fc });
        }
        let gn = params.p_r_w / b;
        acc += gn * gn * ((sep + b / 2.0) / (sep - b / 2.0)).ln();
    }
    let pre = 3.0 * gamma * gamma * g / (2.0 * PI * alpha * beta2);
    Ok((pre * acc).max(0.0))
}

/// NLI power collected along the route: per link, the PSD against every
/// other channel on that link, times the primary bandwidth, times the
/// link's span count.
pub fn nli_path_power(primary: Lightpath<'_>, state: &SpectrumState, params: &ImpairmentParams) -> Result<f64> {
    let (center, bw) = channel_band(primary.first_slot, primary.width, params.slot_width_hz);
    let mut total = 0.0;
    for (&link, &spans) in primary.path.links.iter().zip(&primary.path.spans) {
        let neighbours: Vec<(f64, f64)> = state
            .link_users(link)
            .iter()
            .filter(|&&id| id != primary.demand)
            .map(|&id| {
                let a = state.assignment(id).expect("link index only holds assigned demands");
                channel_band(a.first_slot, a.width, params.slot_width_hz)
            })
            .collect();
        total += nli_psd(params, center, bw, &neighbours)? * bw * spans as f64;
    }
    Ok(total)
}
