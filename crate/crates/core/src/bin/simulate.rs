use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use posverify::config::{env_overrides, parse_config, resolve_sweeps, Overrides};
use posverify::fusion::Detector;
use posverify::sweep::{aggregate_points, run_sweep, write_outputs, RunOptions};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_RUN: u8 = 1;

/// Run position-verification sweeps and write raw and aggregate CSVs.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Config file (key = value lines, optional [sections]).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Section of the config file, or a shipped preset, to run. Default: every section.
    #[arg(long, value_name = "NAME")]
    sweep: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Parallel runs (0 = one per core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    jobs: usize,
    /// Base seed; repetition r uses seed + r.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Also write a per-reception event log for every run.
    #[arg(long)]
    emit_eventlog: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    let sweeps = parse_config(&text)
        .and_then(|doc| {
            let overrides = Overrides {
                env: env_overrides(std::env::vars())?,
                seed: args.seed,
            };
            resolve_sweeps(&doc, args.sweep.as_deref(), &overrides)
        });
    let sweeps = match sweeps {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let opts = RunOptions {
        jobs: args.jobs,
        event_log_dir: args.emit_eventlog.then(|| args.out.clone()),
    };
    if opts.event_log_dir.is_some() {
        if let Err(e) = std::fs::create_dir_all(&args.out) {
            eprintln!("error: cannot create {}: {e}", args.out.display());
            return ExitCode::from(EXIT_IO);
        }
    }

    for spec in &sweeps {
        let result = run_sweep(spec, &opts).and_then(|outcome| {
            let paths = write_outputs(&outcome, &args.out)?;
            Ok((outcome, paths))
        });
        let (outcome, [raw, agg]) = match result {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: sweep {}: {e}", spec.name);
                return ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_RUN });
            }
        };
        println!(
            "{}: {} runs -> {}, {}",
            spec.name,
            outcome.runs.len(),
            raw.display(),
            agg.display()
        );
        if let Ok(points) = aggregate_points(&outcome) {
            for (value, summary) in points {
                let cells: Vec<String> = Detector::ALL
                    .iter()
                    .map(|&d| {
                        let tp = summary
                            .tp_rate(d)
                            .map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
                        format!("{} fp={:.3} tp={tp}", d.label(), summary.fp_rate(d))
                    })
                    .collect();
                println!("  {}={value}  {}", spec.param, cells.join("  "));
            }
        }
    }
    ExitCode::SUCCESS
}
