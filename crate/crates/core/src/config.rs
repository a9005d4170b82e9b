//! Scenario constants and seeded RNG substreams.
//!
//! A [`ScenarioConfig`] is immutable once validated. Every random draw in a
//! simulation comes from a substream derived from `(seed, label, index)`, so
//! toggling one scheme never shifts another scheme's randomness and paired
//! comparisons share channel realizations.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::prelude::*;

/// Independent, reproducible RNG stream.
pub type SubStream = ChaCha8Rng;

/// Deterministic mapping from `(seed, label, index)` to an RNG stream.
///
/// The key material is hashed with SHA-256, so distinct inputs give
/// unrelated ChaCha seeds.
pub fn derive_substream(seed: u64, label: &str, index: u64) -> SubStream {
    let mut h = Sha256::new();
    h.update(b"uavmimo/substream/v1");
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub gbs_tx_power_dbm: f64,
    pub ue_tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub nf_downlink_db: f64,
    pub nf_uplink_db: f64,

    pub n_sites: usize,
    pub sectors_per_site: usize,
    pub isd_m: f64,
    pub gbs_height_m: f64,
    /// Vertical element count.
    pub array_rows: usize,
    /// Horizontal element count.
    pub array_cols: usize,
    pub element_spacing_wavelengths: f64,

    pub n_uavs: usize,
    pub n_gues: usize,
    pub gue_height_m: f64,
    pub uav_height_min_m: f64,
    pub uav_height_max_m: f64,
    /// Users closer than this (horizontally) to their drop site are redrawn.
    pub min_d2d_m: f64,

    /// Force every UAV link to LoS instead of drawing from the LoS probability.
    pub uav_force_los: bool,
    pub shadow_fading: bool,
    pub shadow_fading_std_db: f64,
    pub n_paths: usize,
    pub nlos_az_spread_deg: f64,
    pub nlos_el_spread_deg: f64,

    pub pilot_len: usize,
    pub pilot_reuse: usize,
    pub zc_root: u32,
    /// Uplink pilot noise; disabling it gives exact contamination algebra.
    pub pilot_noise: bool,

    pub grid_az_step_deg: f64,
    pub grid_el_step_deg: f64,
    pub peak_threshold_over_median_db: f64,
    pub peak_min_separation_deg: f64,
    pub max_peaks: usize,
    pub common_path_tol_deg: f64,
    pub n_extra_pilots: usize,
    /// Detected peaks this close to a GUE's own direction are not projected out.
    pub gue_self_guard_deg: f64,
    /// Detection floor above the LS estimation-noise level, dB.
    pub peak_noise_floor_db: f64,

    pub uav_speed_min_kmh: f64,
    pub uav_speed_max_kmh: f64,
    pub velocity_hold_s: f64,

    pub track_duration_s: f64,
    pub sim_step_s: f64,
    pub conv_pilot_period_s: f64,
    pub angspeed_pair_gap_s: f64,
    pub angspeed_period_s: f64,
    pub kf_meas_period_s: f64,
    pub kf_q_angle: f64,
    pub kf_q_rate: f64,
    /// Measurement variance in deg²; `None` means (grid step)²/12.
    pub kf_r_meas: Option<f64>,
    pub track_range_m: f64,
    pub track_altitude_m: f64,
    pub n_trajectories: usize,

    pub n_drops: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 3.5e9,
            bandwidth_hz: 1e6,
            gbs_tx_power_dbm: 46.0,
            ue_tx_power_dbm: 23.0,
            noise_psd_dbm_hz: -174.0,
            nf_downlink_db: 9.0,
            nf_uplink_db: 5.0,

            n_sites: 7,
            sectors_per_site: 3,
            isd_m: 500.0,
            gbs_height_m: 25.0,
            array_rows: 8,
            array_cols: 16,
            element_spacing_wavelengths: 0.5,

            n_uavs: 15,
            n_gues: 6,
            gue_height_m: 1.5,
            uav_height_min_m: 50.0,
            uav_height_max_m: 300.0,
            min_d2d_m: 35.0,

            uav_force_los: false,
            shadow_fading: false,
            shadow_fading_std_db: 4.0,
            n_paths: 20,
            nlos_az_spread_deg: 10.0,
            nlos_el_spread_deg: 5.0,

            pilot_len: 12,
            pilot_reuse: 7,
            zc_root: 1,
            pilot_noise: true,

            grid_az_step_deg: 1.0,
            grid_el_step_deg: 1.0,
            peak_threshold_over_median_db: 10.0,
            peak_min_separation_deg: 3.0,
            max_peaks: 8,
            common_path_tol_deg: 2.0,
            n_extra_pilots: 2,
            gue_self_guard_deg: 2.0,
            peak_noise_floor_db: 15.0,

            uav_speed_min_kmh: 40.0,
            uav_speed_max_kmh: 160.0,
            velocity_hold_s: 1.0,

            track_duration_s: 4.0,
            sim_step_s: 0.01,
            conv_pilot_period_s: 0.5,
            angspeed_pair_gap_s: 0.1,
            angspeed_period_s: 1.0,
            kf_meas_period_s: 0.5,
            kf_q_angle: 1e-4,
            kf_q_rate: 1e-2,
            kf_r_meas: None,
            track_range_m: 150.0,
            track_altitude_m: 100.0,
            n_trajectories: 20,

            n_drops: 100,
            seed: 42,
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation {
            key,
            constraint: "must be finite and > 0",
        })
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Validation {
            key,
            constraint: "must be finite and >= 0",
        })
    }
}

fn finite(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation {
            key,
            constraint: "must be finite",
        })
    }
}

fn nonzero(key: &'static str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::Validation {
            key,
            constraint: "must be >= 1",
        })
    }
}

fn multiple_of_step(key: &'static str, period: f64, step: f64) -> Result<()> {
    let ratio = period / step;
    if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        Ok(())
    } else {
        Err(Error::Validation {
            key,
            constraint: "must be an integer multiple of sim_step_s",
        })
    }
}

fn err(key: &'static str, constraint: &'static str) -> Error {
    Error::Validation { key, constraint }
}

impl ScenarioConfig {
    /// Checks every invariant; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        positive("carrier_freq_hz", self.carrier_freq_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        finite("gbs_tx_power_dbm", self.gbs_tx_power_dbm)?;
        finite("ue_tx_power_dbm", self.ue_tx_power_dbm)?;
        finite("noise_psd_dbm_hz", self.noise_psd_dbm_hz)?;
        non_negative("nf_downlink_db", self.nf_downlink_db)?;
        non_negative("nf_uplink_db", self.nf_uplink_db)?;

        nonzero("n_sites", self.n_sites)?;
        nonzero("sectors_per_site", self.sectors_per_site)?;
        positive("isd_m", self.isd_m)?;
        positive("gbs_height_m", self.gbs_height_m)?;
        nonzero("array_rows", self.array_rows)?;
        nonzero("array_cols", self.array_cols)?;
        positive(
            "element_spacing_wavelengths",
            self.element_spacing_wavelengths,
        )?;

        positive("gue_height_m", self.gue_height_m)?;
        positive("uav_height_min_m", self.uav_height_min_m)?;
        positive("uav_height_max_m", self.uav_height_max_m)?;
        if self.uav_height_min_m >= self.uav_height_max_m {
            return Err(err("uav_height_min_m", "must be < uav_height_max_m"));
        }
        non_negative("min_d2d_m", self.min_d2d_m)?;
        if self.min_d2d_m >= self.isd_m / 2.0 {
            return Err(err("min_d2d_m", "must be < isd_m / 2"));
        }
        non_negative("shadow_fading_std_db", self.shadow_fading_std_db)?;
        nonzero("n_paths", self.n_paths)?;
        non_negative("nlos_az_spread_deg", self.nlos_az_spread_deg)?;
        non_negative("nlos_el_spread_deg", self.nlos_el_spread_deg)?;

        nonzero("pilot_len", self.pilot_len)?;
        nonzero("pilot_reuse", self.pilot_reuse)?;
        if self.pilot_reuse > self.pilot_len {
            return Err(err("pilot_reuse", "must be <= pilot_len"));
        }
        if self.zc_root == 0 || gcd(self.zc_root as u64, self.pilot_len as u64) != 1 {
            return Err(err("zc_root", "must be coprime with pilot_len"));
        }

        positive("grid_az_step_deg", self.grid_az_step_deg)?;
        positive("grid_el_step_deg", self.grid_el_step_deg)?;
        finite(
            "peak_threshold_over_median_db",
            self.peak_threshold_over_median_db,
        )?;
        non_negative("peak_min_separation_deg", self.peak_min_separation_deg)?;
        nonzero("max_peaks", self.max_peaks)?;
        non_negative("common_path_tol_deg", self.common_path_tol_deg)?;
        non_negative("gue_self_guard_deg", self.gue_self_guard_deg)?;
        finite("peak_noise_floor_db", self.peak_noise_floor_db)?;

        positive("uav_speed_min_kmh", self.uav_speed_min_kmh)?;
        positive("uav_speed_max_kmh", self.uav_speed_max_kmh)?;
        if self.uav_speed_min_kmh >= self.uav_speed_max_kmh {
            return Err(err("uav_speed_min_kmh", "must be < uav_speed_max_kmh"));
        }
        positive("velocity_hold_s", self.velocity_hold_s)?;

        positive("track_duration_s", self.track_duration_s)?;
        positive("sim_step_s", self.sim_step_s)?;
        positive("conv_pilot_period_s", self.conv_pilot_period_s)?;
        positive("angspeed_pair_gap_s", self.angspeed_pair_gap_s)?;
        positive("angspeed_period_s", self.angspeed_period_s)?;
        positive("kf_meas_period_s", self.kf_meas_period_s)?;
        multiple_of_step(
            "angspeed_pair_gap_s",
            self.angspeed_pair_gap_s,
            self.sim_step_s,
        )?;
        multiple_of_step(
            "conv_pilot_period_s",
            self.conv_pilot_period_s,
            self.sim_step_s,
        )?;
        multiple_of_step("angspeed_period_s", self.angspeed_period_s, self.sim_step_s)?;
        multiple_of_step("kf_meas_period_s", self.kf_meas_period_s, self.sim_step_s)?;
        if self.angspeed_pair_gap_s >= self.angspeed_period_s {
            return Err(err("angspeed_pair_gap_s", "must be < angspeed_period_s"));
        }
        non_negative("kf_q_angle", self.kf_q_angle)?;
        non_negative("kf_q_rate", self.kf_q_rate)?;
        if let Some(r) = self.kf_r_meas {
            positive("kf_r_meas", r)?;
        }
        positive("track_range_m", self.track_range_m)?;
        positive("track_altitude_m", self.track_altitude_m)?;
        nonzero("n_trajectories", self.n_trajectories)?;

        nonzero("n_drops", self.n_drops)?;
        Ok(())
    }

    pub fn n_sectors(&self) -> usize {
        self.n_sites * self.sectors_per_site
    }

    pub fn n_users(&self) -> usize {
        self.n_uavs + self.n_gues
    }

    pub fn n_antennas(&self) -> usize {
        self.array_rows * self.array_cols
    }

    /// Measurement variance for the Kalman update, deg².
    pub fn r_meas(&self) -> f64 {
        self.kf_r_meas.unwrap_or_else(|| {
            let az = self.grid_az_step_deg;
            let el = self.grid_el_step_deg;
            0.5 * (az * az + el * el) / 12.0
        })
    }

    pub fn uplink_noise_mw(&self) -> f64 {
        crate::math::noise_power_mw(self.noise_psd_dbm_hz, self.bandwidth_hz, self.nf_uplink_db)
    }

    pub fn downlink_noise_mw(&self) -> f64 {
        crate::math::noise_power_mw(
            self.noise_psd_dbm_hz,
            self.bandwidth_hz,
            self.nf_downlink_db,
        )
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use std::collections::HashSet;

    #[test]
    fn defaults_are_valid() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.n_sectors(), 21);
        assert_eq!(c.n_users(), 21);
        assert_eq!(c.n_antennas(), 128);
        assert!((c.r_meas() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn reuse_above_pilot_len_is_rejected() {
        let c = ScenarioConfig {
            pilot_reuse: 13,
            pilot_len: 12,
            ..Default::default()
        };
        match c.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "pilot_reuse"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_uavs_is_valid() {
        let c = ScenarioConfig {
            n_uavs: 0,
            ..Default::default()
        };
        c.validate().unwrap();
    }

    #[test]
    fn height_and_speed_ordering() {
        let c = ScenarioConfig {
            uav_height_min_m: 300.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ScenarioConfig {
            uav_speed_max_kmh: 40.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn periods_must_be_step_multiples() {
        let c = ScenarioConfig {
            angspeed_pair_gap_s: 0.105,
            ..Default::default()
        };
        match c.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "angspeed_pair_gap_s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substreams_are_deterministic() {
        let mut a = derive_substream(42, "drop", 0);
        let mut b = derive_substream(42, "drop", 0);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(
            derive_substream(42, "drop", 0).next_u64(),
            derive_substream(43, "drop", 0).next_u64()
        );
    }

    #[test]
    fn substreams_do_not_collide() {
        let mut seen = HashSet::new();
        for i in 0..10_000u64 {
            let label = std::format!("label{}", i % 100);
            assert!(seen.insert(derive_substream(42, &label, i).next_u64()));
        }
        assert_ne!(
            derive_substream(42, "drop", 0).next_u64(),
            derive_substream(42, "drop", 1).next_u64()
        );
        // label/index boundary must not alias
        assert_ne!(
            derive_substream(1, "a", 0).next_u64(),
            derive_substream(1, "a\0", 0).next_u64()
        );
    }
}
