use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uavmimo::io::load_config;
use uavmimo::run::{default_out_dir, run_decontam, run_tracking, Scenario};
use uavmimo::Result;
use uavmimo_core::swarm::optimal_phase_split;
use uavmimo_core::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "uavmimo",
    version,
    about = "Multi-cell massive-MIMO simulator for UAV and ground users"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Decontam,
    Tracking,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo scenario and write CSV/JSON outputs.
    Run {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// JSON config; absent keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory [default: out/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of drops (decontam) or trajectories (tracking).
        #[arg(long)]
        drops: Option<usize>,
        /// Worker threads; 0 means one per core.
        #[arg(long, env = "UAVMIMO_THREADS")]
        threads: Option<usize>,
    },
    /// Optimal time split of the two-phase swarm broadcast.
    Swarm {
        /// Phase-1 rate (GBS to swarm head), bit/s.
        #[arg(long)]
        r1: f64,
        /// Phase-2 rate (head to members), bit/s.
        #[arg(long)]
        r2: f64,
        /// Deadline, s.
        #[arg(long)]
        total: f64,
        /// Print the result as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            config,
            seed,
            out,
            drops,
            threads,
        } => {
            let mut c = match &config {
                Some(path) => load_config(path)?,
                None => ScenarioConfig::default(),
            };
            if let Some(seed) = seed {
                c.seed = seed;
            }
            let scenario = match scenario {
                ScenarioArg::Decontam => Scenario::Decontam,
                ScenarioArg::Tracking => Scenario::Tracking,
            };
            if let Some(n) = drops {
                match scenario {
                    Scenario::Decontam => c.n_drops = n,
                    Scenario::Tracking => c.n_trajectories = n,
                }
            }
            let out = out.unwrap_or_else(|| default_out_dir(scenario));
            match scenario {
                Scenario::Decontam => {
                    let r = run_decontam(&c, &out, threads)?;
                    for p in &r.summary.percentiles {
                        println!(
                            "{:3} {:14} p5 {:8.2} dB  p50 {:8.2} dB  p95 {:8.2} dB",
                            p.kind, p.scheme, p.p5_db, p.p50_db, p.p95_db
                        );
                    }
                    println!(
                        "GUE 5th-percentile gain: {:.2} dB",
                        r.summary.gue_p5_gain_db
                    );
                    println!("wrote {} ({:.1} s)", out.display(), r.manifest.wall_clock_s);
                }
                Scenario::Tracking => {
                    let r = run_tracking(&c, &out, threads)?;
                    for s in &r.summary.schemes {
                        println!(
                            "{:14} mean gain {:.4}  pilots {}",
                            s.scheme, s.mean_gain, s.pilot_count
                        );
                    }
                    println!("wrote {} ({:.1} s)", out.display(), r.manifest.wall_clock_s);
                }
            }
        }
        Command::Swarm {
            r1,
            r2,
            total,
            json,
        } => {
            let s = optimal_phase_split(r1, r2, total)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!("t1_s = {}", s.t1_s);
                println!("t2_s = {}", s.t2_s);
                println!("throughput_bps = {}", s.throughput_bps);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
