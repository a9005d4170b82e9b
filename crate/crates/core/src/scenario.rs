//! One Monte-Carlo drop of the decontamination scenario and one trajectory of
//! the tracking scenario, end to end.
//!
//! Each drop draws from its own substreams:
//!
//! | label          | use                                         |
//! |----------------|---------------------------------------------|
//! | `layout`       | user positions                              |
//! | `pilot`        | pilot-to-sector map                         |
//! | `channel`      | LoS/NLoS state, path loss, ray phases       |
//! | `uplink_noise` | receiver noise of the regular pilot round   |
//! | `extra_pilots` | shifts drawn for the extra UAV pilot rounds |
//! | `extra_noise`  | receiver noise of the extra rounds          |
//!
//! so the three CSI schemes share every channel realization.

use crate::channel::{draw_link, realize_channel};
use crate::config::{derive_substream, ScenarioConfig};
use crate::decontam::{
    decontaminate_gue, decontaminate_uav, detect_peaks, exclude_near, fold_to_front,
    matched_filter_spectrum, AngleGrid, PathEstimate, PeakOptions,
};
use crate::error::Result;
use crate::geometry::{angles_to, build_layout, ArrayGeometry, NetworkLayout, UserKind};
use crate::link::{
    associate, downlink_sinr_db, mrt_precoder, Association, ChannelSet, CsiScheme, SinrRecord,
};
use crate::math::{db_to_lin, ChannelVector};
use crate::pilot::{
    assign_pilots, draw_extra_pilots, extra_pilot_pool, ls_estimate, uplink_rx, zc_sequence,
    PilotSequence, PilotTx,
};
use crate::prelude::*;
use crate::tracking::{run_tracking, GainSample, TrackingRun, TrackingScheme, Trajectory};
use rand::Rng;

/// Per-drop counters of what the decontamination stage did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropStats {
    /// UAVs whose first pilot round showed more than one path.
    pub uavs_flagged: usize,
    /// Flagged UAVs whose common path was not unique.
    pub uavs_ambiguous: usize,
    /// Directions projected out of GUE estimates, summed over GUEs.
    pub gue_dirs_removed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop: usize,
    /// Ordered by scheme (`CsiScheme::ALL`), then user id.
    pub records: Vec<SinrRecord>,
    pub stats: DropStats,
}

/// Channel estimates of every user at its serving sector, per scheme, on the
/// scale of the true channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DropEstimates {
    pub layout: NetworkLayout,
    pub channels: ChannelSet,
    pub association: Association,
    pub ideal: Vec<ChannelVector>,
    pub contaminated: Vec<ChannelVector>,
    pub decontaminated: Vec<ChannelVector>,
    pub stats: DropStats,
}

impl DropEstimates {
    pub fn estimates(&self, scheme: CsiScheme) -> &[ChannelVector] {
        match scheme {
            CsiScheme::Ideal => &self.ideal,
            CsiScheme::Contaminated => &self.contaminated,
            CsiScheme::Decontaminated => &self.decontaminated,
        }
    }
}

fn network_pilots(c: &ScenarioConfig) -> Result<Vec<PilotSequence>> {
    (0..c.pilot_len)
        .map(|s| zc_sequence(c.zc_root, s, c.pilot_len))
        .collect()
}

fn realize_all<R: Rng + ?Sized>(
    c: &ScenarioConfig,
    layout: &NetworkLayout,
    array: &ArrayGeometry,
    rng: &mut R,
) -> Result<ChannelSet> {
    let mut h = Vec::with_capacity(layout.sectors.len() * layout.users.len());
    for sector in &layout.sectors {
        for user in &layout.users {
            let link = draw_link(c, sector, user, rng)?;
            h.push(realize_channel(&link, array, rng));
        }
    }
    ChannelSet::new(layout.sectors.len(), layout.users.len(), h)
}

/// LS estimate at `sector` of the user sending `pilot`, when the users in
/// `senders` transmit `shifts[i]` each. Not rescaled by `√P`.
#[allow(clippy::too_many_arguments)]
fn pilot_round<R: Rng + ?Sized>(
    c: &ScenarioConfig,
    channels: &ChannelSet,
    pilots: &[PilotSequence],
    sector: usize,
    senders: &[(usize, usize)],
    shift: usize,
    power_mw: f64,
    noise_mw: f64,
    rng: &mut R,
) -> Result<ChannelVector> {
    let txs: Vec<PilotTx<'_>> = senders
        .iter()
        .map(|&(user, s)| PilotTx {
            channel: channels.get(sector, user),
            pilot: &pilots[s],
            power_mw,
        })
        .collect();
    let block = uplink_rx(sector, c.n_antennas(), c.pilot_len, &txs, noise_mw, rng)?;
    ls_estimate(&block, &pilots[shift])
}

fn peaks_of(
    y: &ChannelVector,
    array: &ArrayGeometry,
    grid: &AngleGrid,
    opts: &PeakOptions,
) -> Result<Vec<PathEstimate>> {
    Ok(detect_peaks(
        &matched_filter_spectrum(y, array, grid)?,
        opts,
    ))
}

/// Builds the three sets of channel estimates for drop `drop`.
pub fn drop_estimates(c: &ScenarioConfig, drop: usize) -> Result<DropEstimates> {
    let idx = drop as u64;
    let array = ArrayGeometry::from_config(c);
    let grid = AngleGrid::from_config(c)?;
    let pilots = network_pilots(c)?;

    let mut layout = build_layout(c, &mut derive_substream(c.seed, "layout", idx));
    let pilot_of = assign_pilots(
        &mut layout,
        c.sectors_per_site,
        c.pilot_reuse,
        &mut derive_substream(c.seed, "pilot", idx),
    );
    let channels = realize_all(
        c,
        &layout,
        &array,
        &mut derive_substream(c.seed, "channel", idx),
    )?;
    let association = associate(&channels, c.gbs_tx_power_dbm);

    let p_ue = db_to_lin(c.ue_tx_power_dbm);
    let sqrt_p = p_ue.sqrt();
    let noise_mw = if c.pilot_noise {
        c.uplink_noise_mw()
    } else {
        0.0
    };
    // per-antenna noise variance of an LS estimate
    let ls_noise = noise_mw / c.pilot_len as f64;
    // GUEs remove paths above the horizon only; a UAV's own path is
    // searched for at any elevation
    let opts = PeakOptions::from_config(c).with_noise_floor(ls_noise, c.peak_noise_floor_db);
    let uav_opts = PeakOptions {
        min_elevation_deg: f64::NEG_INFINITY,
        ..opts
    };

    let n_users = layout.users.len();
    let everyone: Vec<(usize, usize)> = (0..n_users).map(|u| (u, pilot_of[u])).collect();

    // regular round: every user sends its network pilot once; each serving
    // sector despreads each of its users
    let mut noise_rng = derive_substream(c.seed, "uplink_noise", idx);
    let mut raw = vec![ChannelVector::zeros(c.n_antennas()); n_users];
    for (b, served) in association.served.iter().enumerate() {
        if served.is_empty() {
            continue;
        }
        let txs: Vec<PilotTx<'_>> = everyone
            .iter()
            .map(|&(u, s)| PilotTx {
                channel: channels.get(b, u),
                pilot: &pilots[s],
                power_mw: p_ue,
            })
            .collect();
        let block = uplink_rx(
            b,
            c.n_antennas(),
            c.pilot_len,
            &txs,
            noise_mw,
            &mut noise_rng,
        )?;
        for &u in served {
            raw[u] = ls_estimate(&block, &pilots[pilot_of[u]])?;
        }
    }

    let mut stats = DropStats::default();
    let mut decon = raw.clone();

    // UAVs that see more than one path retransmit on random spare shifts
    let round0: Vec<Option<Vec<PathEstimate>>> = layout
        .users
        .iter()
        .map(|u| match u.kind {
            UserKind::Uav => peaks_of(&raw[u.id], &array, &grid, &uav_opts).map(Some),
            UserKind::Gue => Ok(None),
        })
        .collect::<Result<_>>()?;
    let flagged: Vec<usize> = round0
        .iter()
        .enumerate()
        .filter(|(_, p)| p.as_ref().is_some_and(|p| p.len() > 1))
        .map(|(u, _)| u)
        .collect();
    stats.uavs_flagged = flagged.len();

    if !flagged.is_empty() && c.n_extra_pilots > 0 {
        let mut used = pilot_of.clone();
        used.sort_unstable();
        used.dedup();
        let pool = extra_pilot_pool(c.pilot_len, &used);
        let mut draw_rng = derive_substream(c.seed, "extra_pilots", idx);
        let mut extra_noise = derive_substream(c.seed, "extra_noise", idx);
        // with no spare shift left, retransmit on network shifts
        let pool = if pool.is_empty() { used } else { pool };
        let shifts = draw_extra_pilots(&pool, flagged.len(), c.n_extra_pilots, &mut draw_rng);

        for (i, &u) in flagged.iter().enumerate() {
            let b = association.serving[u];
            let mut rounds = vec![round0[u].clone().unwrap_or_default()];
            for round_shifts in &shifts {
                let senders: Vec<(usize, usize)> = flagged
                    .iter()
                    .zip(round_shifts)
                    .map(|(&j, &s)| (j, s))
                    .collect();
                let y = pilot_round(
                    c,
                    &channels,
                    &pilots,
                    b,
                    &senders,
                    round_shifts[i],
                    p_ue,
                    noise_mw,
                    &mut extra_noise,
                )?;
                rounds.push(peaks_of(&y, &array, &grid, &uav_opts)?);
            }
            let est = decontaminate_uav(&rounds, &array, c.common_path_tol_deg)?;
            stats.uavs_ambiguous += est.ambiguous as usize;
            decon[u] = est.estimate;
        }
    }

    // GUEs: project out every path above the horizon except their own
    for user in layout.users.iter().filter(|u| u.kind == UserKind::Gue) {
        let b = association.serving[user.id];
        let own = angles_to(&layout.sectors[b], &user.position)?;
        let peaks = peaks_of(&raw[user.id], &array, &grid, &opts)?;
        let dirs = exclude_near(
            &peaks,
            fold_to_front(&array, own.az_deg),
            own.el_deg,
            c.gue_self_guard_deg,
        );
        stats.gue_dirs_removed += dirs.len();
        decon[user.id] = decontaminate_gue(&raw[user.id], &dirs, &array);
    }

    let rescale = |v: Vec<ChannelVector>| -> Vec<ChannelVector> {
        v.into_iter().map(|h| h.scale_re(1.0 / sqrt_p)).collect()
    };
    let ideal = (0..n_users)
        .map(|u| channels.get(association.serving[u], u).clone())
        .collect();

    Ok(DropEstimates {
        layout,
        channels,
        association,
        ideal,
        contaminated: rescale(raw),
        decontaminated: rescale(decon),
        stats,
    })
}

/// Downlink SINR of every user under the three CSI schemes for drop `drop`.
pub fn simulate_drop(c: &ScenarioConfig, drop: usize) -> Result<DropResult> {
    let est = drop_estimates(c, drop)?;
    let sector_mw = db_to_lin(c.gbs_tx_power_dbm);
    let noise_mw = c.downlink_noise_mw();
    let mut records = Vec::with_capacity(3 * est.layout.users.len());
    for scheme in CsiScheme::ALL {
        let precoders = est
            .estimates(scheme)
            .iter()
            .map(mrt_precoder)
            .collect::<Result<Vec<_>>>()?;
        let sinr = downlink_sinr_db(
            &est.association,
            &est.channels,
            &precoders,
            sector_mw,
            noise_mw,
        )?;
        records.extend(est.layout.users.iter().zip(sinr).map(|(u, s)| SinrRecord {
            drop,
            user_id: u.id,
            kind: u.kind,
            scheme,
            sinr_db: s,
        }));
    }
    Ok(DropResult {
        drop,
        records,
        stats: est.stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub trajectory: usize,
    /// One run per scheme, in `TrackingScheme::ALL` order.
    pub runs: Vec<TrackingRun>,
}

impl TrajectoryResult {
    pub fn run(&self, scheme: TrackingScheme) -> &TrackingRun {
        let i = TrackingScheme::ALL
            .iter()
            .position(|&s| s == scheme)
            .unwrap_or(0);
        &self.runs[i]
    }

    pub fn samples(&self) -> impl Iterator<Item = &GainSample> {
        self.runs.iter().flat_map(|r| r.samples.iter())
    }
}

/// All three tracking schemes on trajectory `index`. The trajectory comes
/// from one shared substream; each scheme's measurement noise has its own.
pub fn simulate_trajectory(c: &ScenarioConfig, index: usize) -> Result<TrajectoryResult> {
    let idx = index as u64;
    let traj = Trajectory::generate(c, &mut derive_substream(c.seed, "trajectory", idx));
    let runs = TrackingScheme::ALL
        .iter()
        .map(|&s| {
            let label = match s {
                TrackingScheme::Conventional => "track_noise/conventional",
                TrackingScheme::AngularSpeed => "track_noise/angular_speed",
                TrackingScheme::Kalman => "track_noise/kalman",
            };
            run_tracking(c, s, &traj, &mut derive_substream(c.seed, label, idx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryResult {
        trajectory: index,
        runs,
    })
}
