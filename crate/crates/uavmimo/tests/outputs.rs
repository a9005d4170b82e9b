use std::path::Path;

use uavmimo::io::{load_config, parse_config, read_csv, save_config, SinrRow, TrackingRow};
use uavmimo::run::{run_decontam, run_tracking, SINR_CSV, TRACKING_CSV};
use uavmimo::Error;
use uavmimo_core::link::percentile;
use uavmimo_core::ScenarioConfig;

fn small() -> ScenarioConfig {
    ScenarioConfig {
        n_drops: 5,
        n_trajectories: 3,
        ..ScenarioConfig::default()
    }
}

#[test]
fn empty_object_is_all_defaults() {
    let c = parse_config("{}", Path::new("t.json")).unwrap();
    assert_eq!(c, ScenarioConfig::default());
    assert_eq!(c.carrier_freq_hz, 3.5e9);
    assert_eq!(
        (c.n_uavs, c.n_gues, c.pilot_len, c.pilot_reuse),
        (15, 6, 12, 7)
    );
}

#[test]
fn gue_only_config_is_valid() {
    let c = parse_config(r#"{"n_uavs": 0}"#, Path::new("t.json")).unwrap();
    assert_eq!(c.n_uavs, 0);
}

#[test]
fn invalid_configs_are_rejected_with_status_2() {
    let e = parse_config(
        r#"{"pilot_reuse": 13, "pilot_len": 12}"#,
        Path::new("t.json"),
    )
    .unwrap_err();
    assert!(e.to_string().contains("pilot_reuse"), "{e}");
    assert_eq!(e.exit_code(), 2);

    let e = parse_config(r#"{"n_uav": 3}"#, Path::new("t.json")).unwrap_err();
    assert!(matches!(e, Error::Schema { .. }));
    assert_eq!(e.exit_code(), 2);

    let e = parse_config("{", Path::new("t.json")).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }));
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let c = ScenarioConfig {
        seed: 7,
        kf_r_meas: Some(0.02),
        n_gues: 9,
        ..ScenarioConfig::default()
    };
    save_config(&c, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), c);
    assert!(load_config(&dir.path().join("missing.json")).is_err());
}

#[test]
fn summary_percentiles_recompute_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_decontam(&small(), dir.path(), Some(2)).unwrap();
    let rows: Vec<SinrRow> = read_csv(&dir.path().join(SINR_CSV)).unwrap();
    assert_eq!(rows.len(), 5 * 21 * 3);
    let keys: Vec<_> = rows.iter().map(|r| (r.drop, r.user_id)).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    for p in &run.summary.percentiles {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.kind == p.kind && r.scheme == p.scheme)
            .map(|r| r.sinr_db)
            .collect();
        assert_eq!(v.len(), p.count);
        for (q, want) in [(5.0, p.p5_db), (50.0, p.p50_db), (95.0, p.p95_db)] {
            assert!((percentile(&v, q).unwrap() - want).abs() <= 1e-9);
        }
    }
    // every double survives the text round trip exactly
    let direct: Vec<f64> = run
        .drops
        .iter()
        .flat_map(|d| d.records.iter().map(|r| r.sinr_db))
        .collect();
    let mut a = direct.clone();
    let mut b: Vec<f64> = rows.iter().map(|r| r.sinr_db).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a, b);
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("manifest.json").exists());
    assert_eq!(run.manifest.config, small());
}

#[test]
fn tracking_rows_are_time_then_scheme_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_tracking(&small(), dir.path(), Some(2)).unwrap();
    let rows: Vec<TrackingRow> = read_csv(&dir.path().join(TRACKING_CSV)).unwrap();
    assert_eq!(rows.len(), 3 * 3 * 400);
    let order = |s: &str| {
        ["conventional", "angular_speed", "kalman"]
            .iter()
            .position(|x| *x == s)
            .unwrap()
    };
    for w in rows.windows(2) {
        let a = (w[0].time_s, order(&w[0].scheme), w[0].trajectory_id);
        let b = (w[1].time_s, order(&w[1].scheme), w[1].trajectory_id);
        assert!(a < b, "{a:?} !< {b:?}");
    }
    let counts: Vec<usize> = run.summary.schemes.iter().map(|s| s.pilot_count).collect();
    assert_eq!(counts, [8, 8, 16]);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let c = small();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_decontam(&c, a.path(), Some(1)).unwrap();
    run_decontam(&c, b.path(), Some(3)).unwrap();
    run_tracking(&c, a.path(), Some(1)).unwrap();
    run_tracking(&c, b.path(), Some(3)).unwrap();
    for f in [SINR_CSV, TRACKING_CSV, "summary.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty() && x == y, "{f} differs");
    }
    let text = std::fs::read_to_string(a.path().join(SINR_CSV)).unwrap();
    assert!(!text.contains('\r'));
}
