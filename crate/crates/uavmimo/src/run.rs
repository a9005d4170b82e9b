//! Scenario orchestration over a worker pool.
//!
//! Every drop and trajectory draws only from its own substreams and results
//! are collected in index order, so outputs do not depend on the number of
//! threads or on scheduling.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use uavmimo_core::link::SinrRecord;
use uavmimo_core::scenario::{simulate_drop, simulate_trajectory, DropResult, TrajectoryResult};
use uavmimo_core::tracking::TrackingScheme;
use uavmimo_core::ScenarioConfig;

use crate::error::{io_err, Result};
use crate::io::{write_csv, write_json, SinrRow, TrackingRow};
use crate::report::{
    decontam_summary, tracking_summary, version, DecontamSummary, RunManifest, TrackingSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Decontam,
    Tracking,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Decontam => "decontam",
            Scenario::Tracking => "tracking",
        }
    }
}

pub const SINR_CSV: &str = "sinr_cdf.csv";
pub const TRACKING_CSV: &str = "tracking.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const MANIFEST_JSON: &str = "manifest.json";

/// `None` or `Some(0)` lets rayon pick (one worker per core).
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()?)
}

pub fn simulate_drops(
    config: &ScenarioConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<DropResult>> {
    let drops = pool.install(|| {
        (0..config.n_drops)
            .into_par_iter()
            .map(|d| simulate_drop(config, d))
            .collect::<uavmimo_core::Result<Vec<_>>>()
    })?;
    Ok(drops)
}

pub fn simulate_trajectories(
    config: &ScenarioConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<TrajectoryResult>> {
    let runs = pool.install(|| {
        (0..config.n_trajectories)
            .into_par_iter()
            .map(|t| simulate_trajectory(config, t))
            .collect::<uavmimo_core::Result<Vec<_>>>()
    })?;
    Ok(runs)
}

/// Rows ordered by (drop, user id, scheme).
pub fn sinr_rows(drops: &[DropResult]) -> Vec<SinrRow> {
    let mut rows: Vec<(usize, usize, usize, &SinrRecord)> = drops
        .iter()
        .flat_map(|d| d.records.iter())
        .map(|r| (r.drop, r.user_id, r.scheme as usize, r))
        .collect();
    rows.sort_by_key(|&(d, u, s, _)| (d, u, s));
    rows.into_iter().map(|(.., r)| SinrRow::from(r)).collect()
}

/// Rows ordered by (time step, scheme, trajectory).
pub fn tracking_rows(runs: &[TrajectoryResult]) -> Vec<TrackingRow> {
    let steps = runs
        .iter()
        .flat_map(|t| t.runs.iter().map(|r| r.samples.len()))
        .max()
        .unwrap_or(0);
    let mut rows = Vec::with_capacity(steps * 3 * runs.len());
    for k in 0..steps {
        for s in TrackingScheme::ALL {
            for t in runs {
                if let Some(g) = t.run(s).samples.get(k) {
                    rows.push(TrackingRow::new(g, t.trajectory));
                }
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecontamRun {
    pub drops: Vec<DropResult>,
    pub summary: DecontamSummary,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRunOutput {
    pub trajectories: Vec<TrajectoryResult>,
    pub summary: TrackingSummary,
    pub manifest: RunManifest,
}

fn prepare(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))
}

fn finish(
    scenario: Scenario,
    config: &ScenarioConfig,
    pool: &rayon::ThreadPool,
    started: Instant,
    out_dir: &Path,
    files: &[&str],
) -> Result<RunManifest> {
    let mut outputs: Vec<String> = files.iter().map(|f| f.to_string()).collect();
    outputs.push(MANIFEST_JSON.into());
    let manifest = RunManifest {
        scenario: scenario.as_str().into(),
        config: config.clone(),
        seed: config.seed,
        version: version(),
        threads: pool.current_num_threads(),
        wall_clock_s: started.elapsed().as_secs_f64(),
        outputs,
    };
    write_json(&manifest, &out_dir.join(MANIFEST_JSON))?;
    Ok(manifest)
}

/// Runs `n_drops` drops and writes `sinr_cdf.csv`, `summary.json` and
/// `manifest.json` into `out_dir`.
pub fn run_decontam(
    config: &ScenarioConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<DecontamRun> {
    config.validate()?;
    let started = Instant::now();
    prepare(out_dir)?;
    let pool = thread_pool(threads)?;
    let drops = simulate_drops(config, &pool)?;
    let records: Vec<SinrRecord> = drops.iter().flat_map(|d| d.records.clone()).collect();
    let stats: Vec<_> = drops.iter().map(|d| d.stats).collect();
    let summary = decontam_summary(config, &records, &stats)?;

    write_csv(&out_dir.join(SINR_CSV), sinr_rows(&drops))?;
    write_json(&summary, &out_dir.join(SUMMARY_JSON))?;
    let manifest = finish(
        Scenario::Decontam,
        config,
        &pool,
        started,
        out_dir,
        &[SINR_CSV, SUMMARY_JSON],
    )?;
    Ok(DecontamRun {
        drops,
        summary,
        manifest,
    })
}

/// Runs `n_trajectories` trajectories under all three schemes and writes
/// `tracking.csv`, `summary.json` and `manifest.json` into `out_dir`.
pub fn run_tracking(
    config: &ScenarioConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<TrackingRunOutput> {
    config.validate()?;
    let started = Instant::now();
    prepare(out_dir)?;
    let pool = thread_pool(threads)?;
    let trajectories = simulate_trajectories(config, &pool)?;
    let summary = tracking_summary(config, &trajectories);

    write_csv(&out_dir.join(TRACKING_CSV), tracking_rows(&trajectories))?;
    write_json(&summary, &out_dir.join(SUMMARY_JSON))?;
    let manifest = finish(
        Scenario::Tracking,
        config,
        &pool,
        started,
        out_dir,
        &[TRACKING_CSV, SUMMARY_JSON],
    )?;
    Ok(TrackingRunOutput {
        trajectories,
        summary,
        manifest,
    })
}

/// Default output directory for a scenario.
pub fn default_out_dir(scenario: Scenario) -> PathBuf {
    PathBuf::from("out").join(scenario.as_str())
}
