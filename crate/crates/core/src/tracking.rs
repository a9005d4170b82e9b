//! 3D beam tracking of one UAV by one sector.
//!
//! Three schemes with the same array and angle estimator:
//!
//! - conventional: a pilot every `conv_pilot_period_s`, estimate held between;
//! - angular speed: per `angspeed_period_s`, two pilots `angspeed_pair_gap_s`
//!   apart give azimuth/elevation rates and the angles are extrapolated;
//! - Kalman: the angular-speed schedule plus extra pilots every
//!   `kf_meas_period_s` (offset by half a period) fed to a constant
//!   angular-velocity Kalman filter, which is re-initialised from every new
//!   rate pair.
//!
//! Angles are in the sector frame (azimuth relative to boresight), degrees.

#![allow(clippy::needless_range_loop)]

use rand::Rng;

use crate::channel::{path_loss_db, MobilityModel};
use crate::config::ScenarioConfig;
use crate::decontam::{detect_peaks, matched_filter_spectrum, AngleGrid, PeakOptions};
use crate::error::Result;
use crate::geometry::{angles_to, steering_vector, ArrayGeometry, Sector, UserKind, Vec3};
use crate::math::{complex_gaussian, db_to_lin, wrap_deg, ChannelVector};
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrackingScheme {
    Conventional,
    AngularSpeed,
    Kalman,
}

impl TrackingScheme {
    pub const ALL: [TrackingScheme; 3] = [
        TrackingScheme::Conventional,
        TrackingScheme::AngularSpeed,
        TrackingScheme::Kalman,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrackingScheme::Conventional => "conventional",
            TrackingScheme::AngularSpeed => "angular_speed",
            TrackingScheme::Kalman => "kalman",
        }
    }
}

/// `|a(est)ᴴa(true)|²/M²`, in `[0, 1]`.
pub fn normalized_gain(
    est_az: f64,
    est_el: f64,
    true_az: f64,
    true_el: f64,
    array: &ArrayGeometry,
) -> f64 {
    let m = array.n_antennas() as f64;
    let a = steering_vector(array, est_az, est_el);
    let b = steering_vector(array, true_az, true_el);
    (a.inner(&b).norm_sqr() / (m * m)).min(1.0)
}

/// Strongest matched-filter direction of an uplink channel estimate, or
/// `None` when nothing clears the detection threshold.
pub fn measure_angles(
    y: &ChannelVector,
    array: &ArrayGeometry,
    grid: &AngleGrid,
    opts: &PeakOptions,
) -> Option<(f64, f64)> {
    if y.norm_sqr() == 0.0 {
        return None;
    }
    let spec = matched_filter_spectrum(y, array, grid).ok()?;
    let single = PeakOptions {
        max_peaks: 1,
        ..*opts
    };
    detect_peaks(&spec, &single)
        .first()
        .map(|p| (p.az_deg, p.el_deg))
}

/// Rates from two measurements `dt` apart; the azimuth difference is wrapped.
pub fn estimate_angular_speeds(first: (f64, f64), second: (f64, f64), dt: f64) -> (f64, f64) {
    (wrap_deg(second.0 - first.0) / dt, (second.1 - first.1) / dt)
}

/// Linear extrapolation `t` seconds ahead.
pub fn predict_angles(az: f64, el: f64, omega_az: f64, omega_el: f64, t: f64) -> (f64, f64) {
    (
        wrap_deg(az + omega_az * t),
        (el + omega_el * t).clamp(-90.0, 90.0),
    )
}

/// Constant angular-velocity filter, state `[az, el, ω_az, ω_el]`.
/// Azimuth is kept unwrapped; wrap it for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub x: [f64; 4],
    pub p: [[f64; 4]; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanParams {
    pub q_angle: f64,
    pub q_rate: f64,
    pub r_meas: f64,
}

impl KalmanParams {
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self {
            q_angle: c.kf_q_angle,
            q_rate: c.kf_q_rate,
            r_meas: c.r_meas(),
        }
    }
}

impl KalmanState {
    /// State from a rate pair: angles at the second measurement, covariance
    /// from the measurement variance propagated through the difference.
    pub fn from_pair(second: (f64, f64), rates: (f64, f64), gap_s: f64, r_meas: f64) -> Self {
        let rv = 2.0 * r_meas / (gap_s * gap_s);
        let mut p = [[0.0; 4]; 4];
        p[0][0] = r_meas;
        p[1][1] = r_meas;
        p[2][2] = rv;
        p[3][3] = rv;
        // cov(z₂, (z₂ − z₁)/gap) = r/gap
        p[0][2] = r_meas / gap_s;
        p[2][0] = p[0][2];
        p[1][3] = r_meas / gap_s;
        p[3][1] = p[1][3];
        Self {
            x: [second.0, second.1, rates.0, rates.1],
            p,
        }
    }

    pub fn angles(&self) -> (f64, f64) {
        (wrap_deg(self.x[0]), self.x[1].clamp(-90.0, 90.0))
    }
}

fn mat_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn transpose(a: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[j][i];
        }
    }
    t
}

fn symmetrize(p: &mut [[f64; 4]; 4]) {
    for i in 0..4 {
        for j in i + 1..4 {
            let v = 0.5 * (p[i][j] + p[j][i]);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
}

/// Eigen-decomposition of a symmetric 4×4 matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors as columns)`.
pub fn symmetric_eigen(a: &[[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut a = *a;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..4)
            .map(|i| a[i][i] * a[i][i])
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2], a[3][3]], v)
}

/// Symmetrizes `p` and, if it has a negative eigenvalue, rebuilds it with
/// the negative eigenvalues set to zero. Returns whether a repair happened.
pub fn repair_covariance(p: &mut [[f64; 4]; 4]) -> bool {
    symmetrize(p);
    let (vals, vecs) = symmetric_eigen(p);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if vals.iter().all(|&l| l >= -1e-12 * scale) {
        return false;
    }
    let mut out = [[0.0; 4]; 4];
    for (k, &l) in vals.iter().enumerate() {
        let l = l.max(0.0);
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += l * vecs[i][k] * vecs[j][k];
            }
        }
    }
    symmetrize(&mut out);
    *p = out;
    true
}

/// One predict step of `dt` seconds followed, if `z` is given, by a
/// measurement update with the two angles.
pub fn kalman_step(
    state: &KalmanState,
    z: Option<(f64, f64)>,
    dt: f64,
    params: &KalmanParams,
) -> KalmanState {
    let mut f = [[0.0; 4]; 4];
    for (i, row) in f.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    f[0][2] = dt;
    f[1][3] = dt;
    let x = state.x;
    let mut x = [x[0] + dt * x[2], x[1] + dt * x[3], x[2], x[3]];
    let mut p = mat_mul(&mat_mul(&f, &state.p), &transpose(&f));
    let qa = params.q_angle * dt * dt;
    let qr = params.q_rate * dt;
    p[0][0] += qa;
    p[1][1] += qa;
    p[2][2] += qr;
    p[3][3] += qr;

    if let Some((z_az, z_el)) = z {
        let nu = [wrap_deg(z_az - x[0]), z_el - x[1]];
        let s = [
            [p[0][0] + params.r_meas, p[0][1]],
            [p[1][0], p[1][1] + params.r_meas],
        ];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let s_inv = [
            [s[1][1] / det, -s[0][1] / det],
            [-s[1][0] / det, s[0][0] / det],
        ];
        // K = P Hᵀ S⁻¹, PHᵀ = first two columns of P
        let mut k = [[0.0; 2]; 4];
        for (i, ki) in k.iter_mut().enumerate() {
            for (j, kij) in ki.iter_mut().enumerate() {
                *kij = p[i][0] * s_inv[0][j] + p[i][1] * s_inv[1][j];
            }
        }
        for i in 0..4 {
            x[i] += k[i][0] * nu[0] + k[i][1] * nu[1];
        }
        // (I − KH)P
        let mut np = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                np[i][j] = p[i][j] - k[i][0] * p[0][j] - k[i][1] * p[1][j];
            }
        }
        p = np;
    }
    if repair_covariance(&mut p) {
        log::warn!("kalman covariance lost positive semi-definiteness; eigenvalues floored at 0");
    }
    KalmanState { x, p }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub time_s: f64,
    pub scheme: TrackingScheme,
    pub normalized_gain: f64,
    pub true_az_deg: f64,
    pub true_el_deg: f64,
    pub est_az_deg: f64,
    pub est_el_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingState {
    pub scheme: TrackingScheme,
    pub est_az_deg: f64,
    pub est_el_deg: f64,
    pub omega_az_dps: f64,
    pub omega_el_dps: f64,
    /// Time the (az, el, ω) reference was taken.
    pub ref_time_s: f64,
    pub kf: Option<KalmanState>,
    pub last_pilot_time_s: Option<f64>,
    pub pilot_count: usize,
    /// First sample of a rate pair awaiting its partner.
    pending: Option<(f64, f64)>,
}

impl TrackingState {
    pub fn new(scheme: TrackingScheme) -> Self {
        Self {
            scheme,
            est_az_deg: 0.0,
            est_el_deg: 0.0,
            omega_az_dps: 0.0,
            omega_el_dps: 0.0,
            ref_time_s: 0.0,
            kf: None,
            last_pilot_time_s: None,
            pilot_count: 0,
            pending: None,
        }
    }

    /// Current beam direction.
    pub fn estimate(&self, t: f64) -> (f64, f64) {
        match &self.kf {
            Some(kf) => kf.angles(),
            None => predict_angles(
                self.est_az_deg,
                self.est_el_deg,
                self.omega_az_dps,
                self.omega_el_dps,
                t - self.ref_time_s,
            ),
        }
    }
}

/// What a pilot at a given step is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotRole {
    /// Replace the held estimate.
    Refresh,
    /// First of a rate pair.
    PairFirst,
    /// Second of a rate pair.
    PairSecond,
    /// Kalman measurement update.
    Update,
}

/// Simulation step count and pilot schedule `(step, role)` for a scheme.
pub fn pilot_schedule(
    c: &ScenarioConfig,
    scheme: TrackingScheme,
) -> (usize, Vec<(usize, PilotRole)>) {
    let steps = |s: f64| (s / c.sim_step_s).round() as usize;
    let n = steps(c.track_duration_s);
    let mut out: Vec<(usize, PilotRole)> = Vec::new();
    match scheme {
        TrackingScheme::Conventional => {
            let period = steps(c.conv_pilot_period_s).max(1);
            out.extend((0..n).step_by(period).map(|k| (k, PilotRole::Refresh)));
        }
        TrackingScheme::AngularSpeed | TrackingScheme::Kalman => {
            let period = steps(c.angspeed_period_s).max(1);
            let gap = steps(c.angspeed_pair_gap_s);
            for k in (0..n).step_by(period) {
                out.push((k, PilotRole::PairFirst));
                if k + gap < n {
                    out.push((k + gap, PilotRole::PairSecond));
                }
            }
            if scheme == TrackingScheme::Kalman {
                let period = steps(c.kf_meas_period_s).max(1);
                for k in (period / 2..n).step_by(period) {
                    if !out.iter().any(|&(s, _)| s == k) {
                        out.push((k, PilotRole::Update));
                    }
                }
            }
        }
    }
    out.sort_by_key(|&(k, _)| k);
    (n, out)
}

/// True UAV positions at every simulation step, seen from one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sector: Sector,
    pub dt_s: f64,
    pub positions: Vec<Vec3>,
}

impl Trajectory {
    /// Sector at the origin facing +x; UAV at `track_range_m` horizontal
    /// range and `track_altitude_m` altitude on a bearing uniform in ±60°,
    /// moving under the piecewise-constant velocity model.
    pub fn generate<R: Rng + ?Sized>(c: &ScenarioConfig, rng: &mut R) -> Self {
        let sector = tracking_sector(c);
        let bearing = rng.random_range(-60.0f64..=60.0).to_radians();
        let start = Vec3::new(
            c.track_range_m * bearing.cos(),
            c.track_range_m * bearing.sin(),
            c.track_altitude_m,
        );
        let model = MobilityModel::from_config(c);
        let n = (c.track_duration_s / c.sim_step_s).round() as usize;
        let mut state = model.start(start, rng);
        let mut positions = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                state = model.step(&state, c.sim_step_s, rng);
            }
            positions.push(state.position);
        }
        Self {
            sector,
            dt_s: c.sim_step_s,
            positions,
        }
    }

    pub fn from_positions(c: &ScenarioConfig, positions: Vec<Vec3>) -> Self {
        Self {
            sector: tracking_sector(c),
            dt_s: c.sim_step_s,
            positions,
        }
    }
}

fn tracking_sector(c: &ScenarioConfig) -> Sector {
    Sector {
        id: 0,
        site: 0,
        boresight_az_deg: 0.0,
        position: Vec3::new(0.0, 0.0, c.gbs_height_m),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRun {
    pub samples: Vec<GainSample>,
    pub pilot_count: usize,
}

/// LS channel estimate of the LoS link at `p` (scaled back by `√P_ue`) and
/// its matched-filter angles.
fn pilot_measurement<R: Rng + ?Sized>(
    c: &ScenarioConfig,
    traj: &Trajectory,
    array: &ArrayGeometry,
    grid: &AngleGrid,
    opts: &PeakOptions,
    p: &Vec3,
    rng: &mut R,
) -> Result<Option<(f64, f64)>> {
    let ang = angles_to(&traj.sector, p)?;
    let pl = path_loss_db(UserKind::Uav, true, ang.d3d_m, c.carrier_freq_hz, p.z);
    let phase = rng.random_range(0.0..core::f64::consts::TAU);
    let amp = num_complex::Complex64::from_polar(db_to_lin(-pl).sqrt(), phase);
    let mut y = steering_vector(array, ang.az_deg, ang.el_deg).scale(amp);
    if c.pilot_noise {
        // LS noise variance N0/(P·L)
        let var = c.uplink_noise_mw() / (db_to_lin(c.ue_tx_power_dbm) * c.pilot_len as f64);
        for v in y.as_mut_slice() {
            *v += complex_gaussian(rng, var);
        }
    }
    Ok(measure_angles(&y, array, grid, opts))
}

/// Runs one scheme over a trajectory; one gain sample per simulation step,
/// taken after any pilot at that step has been processed.
pub fn run_tracking<R: Rng + ?Sized>(
    c: &ScenarioConfig,
    scheme: TrackingScheme,
    traj: &Trajectory,
    rng: &mut R,
) -> Result<TrackingRun> {
    let array = ArrayGeometry::from_config(c);
    let grid = AngleGrid::from_config(c)?;
    let opts = PeakOptions::from_config(c);
    let kp = KalmanParams::from_config(c);
    let gap = c.angspeed_pair_gap_s;
    let (_, schedule) = pilot_schedule(c, scheme);
    let mut next_pilot = schedule.iter().peekable();
    let mut st = TrackingState::new(scheme);
    let mut samples = Vec::with_capacity(traj.positions.len());

    for (k, p) in traj.positions.iter().enumerate() {
        let t = k as f64 * traj.dt_s;
        let role = match next_pilot.peek() {
            Some(&&(step, role)) if step == k => {
                next_pilot.next();
                Some(role)
            }
            _ => None,
        };
        let z = match role {
            Some(_) => {
                st.pilot_count += 1;
                st.last_pilot_time_s = Some(t);
                pilot_measurement(c, traj, &array, &grid, &opts, p, rng)?
            }
            None => None,
        };

        // the filter runs between pilots; before its first pair it is idle
        if let Some(kf) = &st.kf {
            let upd = if role == Some(PilotRole::Update) {
                z
            } else {
                None
            };
            st.kf = Some(kalman_step(kf, upd, traj.dt_s, &kp));
        }

        if let (Some(role), Some(z)) = (role, z) {
            match role {
                PilotRole::Refresh => {
                    (st.est_az_deg, st.est_el_deg) = z;
                    st.ref_time_s = t;
                }
                PilotRole::PairFirst => {
                    (st.est_az_deg, st.est_el_deg) = z;
                    (st.omega_az_dps, st.omega_el_dps) = (0.0, 0.0);
                    st.ref_time_s = t;
                    st.pending = Some(z);
                    st.kf = None;
                }
                PilotRole::PairSecond => {
                    if let Some(first) = st.pending.take() {
                        let w = estimate_angular_speeds(first, z, gap);
                        (st.omega_az_dps, st.omega_el_dps) = w;
                        if scheme == TrackingScheme::Kalman {
                            st.kf = Some(KalmanState::from_pair(z, w, gap, kp.r_meas));
                        }
                    }
                    (st.est_az_deg, st.est_el_deg) = z;
                    st.ref_time_s = t;
                }
                PilotRole::Update => {}
            }
        }

        let ang = angles_to(&traj.sector, p)?;
        let (est_az, est_el) = st.estimate(t);
        samples.push(GainSample {
            time_s: t,
            scheme,
            normalized_gain: normalized_gain(est_az, est_el, ang.az_deg, ang.el_deg, &array),
            true_az_deg: ang.az_deg,
            true_el_deg: ang.el_deg,
            est_az_deg: est_az,
            est_el_deg: est_el,
        });
    }
    Ok(TrackingRun {
        samples,
        pilot_count: st.pilot_count,
    })
}
