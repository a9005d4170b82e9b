//! Two-phase downlink to a UAV swarm: the GBS sends a common message to the
//! swarm head at rate `r1`, then the head broadcasts it to the members over
//! D2D at rate `r2`. Under a deadline `T` the bits delivered to every member
//! are `min(t1·r1, t2·r2)` with `t1 + t2 = T`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseSplit {
    pub t1_s: f64,
    pub t2_s: f64,
    /// Delivered bits per second of deadline.
    pub throughput_bps: f64,
    pub r1_bps: f64,
    pub r2_bps: f64,
    pub total_s: f64,
}

/// Bits delivered to the members when phase 1 lasts `t1_s`.
pub fn delivered_bits(r1_bps: f64, r2_bps: f64, total_s: f64, t1_s: f64) -> f64 {
    (t1_s * r1_bps).min((total_s - t1_s) * r2_bps)
}

/// The split that equalises the two phases, `t1·r1 = t2·r2`, which maximises
/// `min(t1·r1, t2·r2)`: `t1 = T·r2/(r1+r2)`, throughput `r1·r2/(r1+r2)`.
/// An infinite `r2` (instant broadcast) gives `t1 = T`.
pub fn optimal_phase_split(r1_bps: f64, r2_bps: f64, total_s: f64) -> Result<PhaseSplit> {
    let rate_ok = |r: f64| r > 0.0 && !r.is_nan();
    if !rate_ok(r1_bps) || !rate_ok(r2_bps) || (r1_bps.is_infinite() && r2_bps.is_infinite()) {
        return Err(Error::Swarm("rates must be positive and not both infinite"));
    }
    if !(total_s > 0.0 && total_s.is_finite()) {
        return Err(Error::Swarm("deadline must be positive and finite"));
    }
    // written via r1/r2 so a one-sided infinite rate stays finite
    let (t1_s, throughput_bps) = if r1_bps <= r2_bps {
        let q = r1_bps / r2_bps;
        (total_s / (1.0 + q), r1_bps / (1.0 + q))
    } else {
        let q = r2_bps / r1_bps;
        (total_s * q / (1.0 + q), r2_bps / (1.0 + q))
    };
    Ok(PhaseSplit {
        t1_s,
        t2_s: total_s - t1_s,
        throughput_bps,
        r1_bps,
        r2_bps,
        total_s,
    })
}
