//! `summary.json` and `manifest.json` contents.

use serde::{Deserialize, Serialize};
use uavmimo_core::geometry::UserKind;
use uavmimo_core::link::{percentile, CsiScheme, SinrRecord};
use uavmimo_core::scenario::{DropStats, TrajectoryResult};
use uavmimo_core::tracking::TrackingScheme;
use uavmimo_core::ScenarioConfig;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrPercentiles {
    pub kind: String,
    pub scheme: String,
    pub count: usize,
    pub p5_db: f64,
    pub p50_db: f64,
    pub p95_db: f64,
}

/// Decontaminated minus contaminated, for one user kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub kind: String,
    /// Difference of the two schemes' medians.
    pub median_gain_db: f64,
    /// Median over users of the per-user difference.
    pub paired_median_db: f64,
    pub p5_gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecontamSummary {
    pub scenario: String,
    pub seed: u64,
    pub n_drops: usize,
    pub percentiles: Vec<SinrPercentiles>,
    pub gue_p5_gain_db: f64,
    pub improvement: Vec<Improvement>,
    pub uavs_flagged: usize,
    pub uavs_ambiguous: usize,
    pub gue_dirs_removed: usize,
}

fn sinr_of(records: &[SinrRecord], kind: UserKind, scheme: CsiScheme) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.kind == kind && r.scheme == scheme)
        .map(|r| r.sinr_db)
        .collect()
}

/// `records` must list each scheme's users in the same order, as
/// [`uavmimo_core::scenario::simulate_drop`] does.
pub fn decontam_summary(
    config: &ScenarioConfig,
    records: &[SinrRecord],
    stats: &[DropStats],
) -> Result<DecontamSummary> {
    let kinds = [UserKind::Uav, UserKind::Gue];
    let mut percentiles = Vec::new();
    for kind in kinds {
        for scheme in CsiScheme::ALL {
            let v = sinr_of(records, kind, scheme);
            if v.is_empty() {
                continue;
            }
            percentiles.push(SinrPercentiles {
                kind: kind.as_str().into(),
                scheme: scheme.as_str().into(),
                count: v.len(),
                p5_db: percentile(&v, 5.0)?,
                p50_db: percentile(&v, 50.0)?,
                p95_db: percentile(&v, 95.0)?,
            });
        }
    }

    let mut improvement = Vec::new();
    for kind in kinds {
        let dec = sinr_of(records, kind, CsiScheme::Decontaminated);
        let con = sinr_of(records, kind, CsiScheme::Contaminated);
        if dec.is_empty() {
            continue;
        }
        let paired: Vec<f64> = dec.iter().zip(&con).map(|(d, c)| d - c).collect();
        improvement.push(Improvement {
            kind: kind.as_str().into(),
            median_gain_db: percentile(&dec, 50.0)? - percentile(&con, 50.0)?,
            paired_median_db: percentile(&paired, 50.0)?,
            p5_gain_db: percentile(&dec, 5.0)? - percentile(&con, 5.0)?,
        });
    }
    let gue_p5_gain_db = improvement
        .iter()
        .find(|i| i.kind == UserKind::Gue.as_str())
        .map_or(f64::NAN, |i| i.p5_gain_db);

    Ok(DecontamSummary {
        scenario: "decontam".into(),
        seed: config.seed,
        n_drops: stats.len(),
        percentiles,
        gue_p5_gain_db,
        improvement,
        uavs_flagged: stats.iter().map(|s| s.uavs_flagged).sum(),
        uavs_ambiguous: stats.iter().map(|s| s.uavs_ambiguous).sum(),
        gue_dirs_removed: stats.iter().map(|s| s.gue_dirs_removed).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: String,
    pub mean_gain: f64,
    pub min_gain: f64,
    /// Pilots per trajectory.
    pub pilot_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub scenario: String,
    pub seed: u64,
    pub n_trajectories: usize,
    pub samples_per_trajectory: usize,
    pub schemes: Vec<SchemeSummary>,
}

pub fn tracking_summary(config: &ScenarioConfig, runs: &[TrajectoryResult]) -> TrackingSummary {
    let schemes = TrackingScheme::ALL
        .iter()
        .map(|&s| {
            let gains: Vec<f64> = runs
                .iter()
                .flat_map(|t| t.run(s).samples.iter().map(|g| g.normalized_gain))
                .collect();
            SchemeSummary {
                scheme: s.as_str().into(),
                mean_gain: gains.iter().sum::<f64>() / gains.len().max(1) as f64,
                min_gain: gains.iter().copied().fold(f64::INFINITY, f64::min),
                pilot_count: runs.first().map_or(0, |t| t.run(s).pilot_count),
            }
        })
        .collect();
    TrackingSummary {
        scenario: "tracking".into(),
        seed: config.seed,
        n_trajectories: runs.len(),
        samples_per_trajectory: runs
            .first()
            .map_or(0, |t| t.run(TrackingScheme::Conventional).samples.len()),
        schemes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub version: String,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub outputs: Vec<String>,
}

pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}
