//! UMa-style large-scale model for UAV and ground links, channel vector
//! synthesis, and the quasi-static UAV mobility model.
//!
//! LoS probability and path loss follow the 3GPP UMa / UMa-AV conventions:
//!
//! | link | LoS probability | path loss |
//! |------|-----------------|-----------|
//! | GUE  | `18/d + e^(−d/63)(1 − 18/d)` | LoS `28 + 22·log d + 20·log f`; NLoS `max(LoS, 13.54 + 39.08·log d + 20·log f − 0.6(h − 1.5))` |
//! | UAV, 22.5 < h ≤ 100 m | `d1/d + e^(−d/p1)(1 − d1/d)` | LoS as above; NLoS `−17.5 + (46 − 7·log h)·log d + 20·log(40πf/3)` |
//! | UAV, h > 100 m | 1 | LoS as above |
//!
//! with `f` in GHz, `d` the 2D (probability) or 3D (path loss) distance.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::config::ScenarioConfig;
use crate::geometry::{
    angles_to, steering_vector, ArrayGeometry, LinkAngles, Sector, UserKind, UserState, Vec3,
};
use crate::math::{complex_gaussian, db_to_lin, gaussian, ChannelVector};
use crate::prelude::*;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub az_deg: f64,
    pub el_deg: f64,
    pub complex_gain: Complex64,
}

/// Large-scale state of one sector-user link. NLoS links carry their
/// scattered paths; LoS links are a single deterministic ray.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub sector: usize,
    pub user: usize,
    pub is_los: bool,
    pub d3d_m: f64,
    pub d2d_m: f64,
    pub az_deg: f64,
    pub el_deg: f64,
    pub path_loss_db: f64,
    pub paths: Vec<PathComponent>,
}

pub fn los_probability(kind: UserKind, h_user_m: f64, d2d_m: f64) -> f64 {
    let gue = |d: f64| {
        if d <= 18.0 {
            1.0
        } else {
            18.0 / d + (-d / 63.0).exp() * (1.0 - 18.0 / d)
        }
    };
    match kind {
        UserKind::Gue => gue(d2d_m),
        UserKind::Uav if h_user_m > 100.0 => 1.0,
        UserKind::Uav if h_user_m > 22.5 => {
            let lh = h_user_m.log10();
            let d1 = (460.0 * lh - 700.0).max(18.0);
            let p1 = 4300.0 * lh - 3800.0;
            if d2d_m <= d1 {
                1.0
            } else {
                d1 / d2d_m + (-d2d_m / p1).exp() * (1.0 - d1 / d2d_m)
            }
        }
        UserKind::Uav => gue(d2d_m),
    }
}

pub fn path_loss_db(kind: UserKind, is_los: bool, d3d_m: f64, fc_hz: f64, h_user_m: f64) -> f64 {
    let fc_ghz = fc_hz / 1e9;
    let los = 28.0 + 22.0 * d3d_m.log10() + 20.0 * fc_ghz.log10();
    if is_los {
        return los;
    }
    let nlos = match kind {
        UserKind::Gue => {
            13.54 + 39.08 * d3d_m.log10() + 20.0 * fc_ghz.log10() - 0.6 * (h_user_m - 1.5)
        }
        UserKind::Uav => {
            -17.5
                + (46.0 - 7.0 * h_user_m.log10()) * d3d_m.log10()
                + 20.0 * (40.0 * PI * fc_ghz / 3.0).log10()
        }
    };
    nlos.max(los)
}

/// Draws the large-scale state of the link between `sector` and `user`.
pub fn draw_link<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    sector: &Sector,
    user: &UserState,
    rng: &mut R,
) -> Result<LinkState> {
    let LinkAngles {
        az_deg,
        el_deg,
        d3d_m,
        d2d_m,
    } = angles_to(sector, &user.position)?;
    let h = user.position.z;
    let p_los = if user.kind == UserKind::Uav && config.uav_force_los {
        1.0
    } else {
        los_probability(user.kind, h, d2d_m)
    };
    // always consume one draw so the stream layout does not depend on p_los
    let u: f64 = rng.random();
    let is_los = u < p_los;
    let mut pl = path_loss_db(user.kind, is_los, d3d_m, config.carrier_freq_hz, h);
    if config.shadow_fading {
        pl += gaussian(rng, 0.0, config.shadow_fading_std_db);
    }
    let paths = if is_los {
        Vec::new()
    } else {
        (0..config.n_paths)
            .map(|_| PathComponent {
                az_deg: gaussian(rng, az_deg, config.nlos_az_spread_deg),
                el_deg: gaussian(rng, el_deg, config.nlos_el_spread_deg).clamp(-90.0, 90.0),
                complex_gain: complex_gaussian(rng, 1.0),
            })
            .collect()
    };
    Ok(LinkState {
        sector: sector.id,
        user: user.id,
        is_los,
        d3d_m,
        d2d_m,
        az_deg,
        el_deg,
        path_loss_db: pl,
        paths,
    })
}

/// Channel vector of a link. LoS: random-phase ray along the geometric
/// direction. NLoS: sum of the link's scattered paths.
/// `E‖h‖² = 10^(−PL/10)·M` in both cases.
pub fn realize_channel<R: Rng + ?Sized>(
    link: &LinkState,
    array: &ArrayGeometry,
    rng: &mut R,
) -> ChannelVector {
    let gain = db_to_lin(-link.path_loss_db);
    if link.is_los {
        let psi = rng.random_range(0.0..2.0 * PI);
        let a = steering_vector(array, link.az_deg, link.el_deg);
        a.scale(Complex64::from_polar(gain.sqrt(), psi))
    } else {
        let amp = (gain / link.paths.len() as f64).sqrt();
        let mut h = ChannelVector::zeros(array.n_antennas());
        for p in &link.paths {
            let a = steering_vector(array, p.az_deg, p.el_deg);
            h.axpy(p.complex_gain * amp, &a);
        }
        h
    }
}

/// Piecewise-constant UAV velocity, redrawn every hold interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub position: Vec3,
    pub speed_mps: f64,
    pub heading_az_deg: f64,
    pub heading_el_deg: f64,
    pub time_to_next_change_s: f64,
}

impl MobilityState {
    pub fn velocity(&self) -> Vec3 {
        let az = self.heading_az_deg.to_radians();
        let el = self.heading_el_deg.to_radians();
        Vec3::new(
            self.speed_mps * el.cos() * az.cos(),
            self.speed_mps * el.cos() * az.sin(),
            self.speed_mps * el.sin(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub hold_s: f64,
    pub altitude_min_m: f64,
    pub altitude_max_m: f64,
    /// Heading elevation is drawn uniformly in ±this.
    pub max_climb_deg: f64,
}

impl MobilityModel {
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self {
            speed_min_mps: c.uav_speed_min_kmh / 3.6,
            speed_max_mps: c.uav_speed_max_kmh / 3.6,
            hold_s: c.velocity_hold_s,
            altitude_min_m: c.uav_height_min_m,
            altitude_max_m: c.uav_height_max_m,
            max_climb_deg: 15.0,
        }
    }

    /// Fresh state at `position` with a newly drawn velocity.
    pub fn start<R: Rng + ?Sized>(&self, position: Vec3, rng: &mut R) -> MobilityState {
        let mut s = MobilityState {
            position,
            speed_mps: 0.0,
            heading_az_deg: 0.0,
            heading_el_deg: 0.0,
            time_to_next_change_s: self.hold_s,
        };
        self.redraw(&mut s, rng);
        s
    }

    fn redraw<R: Rng + ?Sized>(&self, s: &mut MobilityState, rng: &mut R) {
        s.speed_mps = if self.speed_max_mps > self.speed_min_mps {
            rng.random_range(self.speed_min_mps..=self.speed_max_mps)
        } else {
            self.speed_min_mps
        };
        s.heading_az_deg = rng.random_range(0.0..360.0);
        s.heading_el_deg = if self.max_climb_deg > 0.0 {
            rng.random_range(-self.max_climb_deg..=self.max_climb_deg)
        } else {
            0.0
        };
    }

    /// Advances `dt` seconds: move along the current velocity, keep the
    /// altitude inside bounds (reflecting the climb angle), and redraw the
    /// velocity whenever the hold interval expires.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &MobilityState,
        dt: f64,
        rng: &mut R,
    ) -> MobilityState {
        let mut s = *state;
        s.position = s.position.add_scaled(&s.velocity(), dt);
        if s.position.z > self.altitude_max_m {
            s.position.z = self.altitude_max_m;
            s.heading_el_deg = -s.heading_el_deg.abs();
        } else if s.position.z < self.altitude_min_m {
            s.position.z = self.altitude_min_m;
            s.heading_el_deg = s.heading_el_deg.abs();
        }
        s.time_to_next_change_s -= dt;
        if s.time_to_next_change_s <= 1e-9 {
            s.time_to_next_change_s += self.hold_s;
            self.redraw(&mut s, rng);
        }
        s
    }
}
