//! Sweep execution and CSV output.
//!
//! Raw CSV: one row per (run, detector).
//! Aggregate CSV: one row per (parameter value, detector), pooled over repetitions.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{SweepPoint, SweepSpec};
use crate::fusion::Detector;
use crate::metrics::{aggregate, fn_rate, fp_rate, tp_rate, DetectorCounts, MetricsError, RunResult};
use crate::sim::run::{run_scenario, SimError, EVENT_LOG_HEADER};

pub const RAW_HEADER: &str = "detector,param_name,param_value,seed,realized_attacker_fraction,received_benign,received_malicious,fp_rate,tp_rate,fn_rate";
pub const AGGREGATE_HEADER: &str = "detector,param_name,param_value,realized_attacker_fraction,received_benign,received_malicious,fp_rate,tp_rate,fn_rate,runs,weighted";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl SweepError {
    pub fn is_io(&self) -> bool {
        match self {
            SweepError::Io { .. } => true,
            SweepError::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Directory for per-run event logs, if wanted.
    pub event_log_dir: Option<PathBuf>,
}

/// A finished run tagged with its sweep coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value_index: usize,
    pub param_value: String,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    /// Sorted by (parameter value, seed).
    pub runs: Vec<SweepRun>,
}

pub fn event_log_path(dir: &Path, sweep: &str, value_index: usize, seed: u64) -> PathBuf {
    dir.join(format!("{sweep}_events_v{value_index}_s{seed}.csv"))
}

fn run_point(
    spec: &SweepSpec,
    point: &SweepPoint,
    opts: &RunOptions,
) -> Result<SweepRun, SweepError> {
    let result = match &opts.event_log_dir {
        None => run_scenario(&point.config, |_| {})?,
        Some(dir) => {
            let path = event_log_path(dir, &spec.name, point.value_index, point.config.seed);
            let file = File::create(&path).map_err(io_err(&path))?;
            let mut out = BufWriter::new(file);
            let mut write_err = writeln!(out, "{EVENT_LOG_HEADER}").err();
            let result = run_scenario(&point.config, |event| {
                if write_err.is_none() {
                    write_err = writeln!(out, "{}", event.to_csv_line()).err();
                }
            })?;
            if let Some(e) = write_err {
                return Err(io_err(&path)(e));
            }
            out.flush().map_err(io_err(&path))?;
            result
        }
    };
    Ok(SweepRun {
        value_index: point.value_index,
        param_value: point.param_value.clone(),
        result,
    })
}

/// Runs every point of the sweep, at most `opts.jobs` at a time. The outcome does not
/// depend on the number of workers.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepOutcome, SweepError> {
    let points = spec.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()?;
    let mut runs = pool.install(|| {
        points
            .par_iter()
            .map(|p| run_point(spec, p, opts))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rank: Vec<usize> = {
        let order = spec.value_order();
        let mut rank = vec![0; order.len()];
        for (pos, idx) in order.into_iter().enumerate() {
            rank[idx] = pos;
        }
        rank
    };
    runs.sort_by_key(|r| (rank[r.value_index], r.result.seed));
    Ok(SweepOutcome {
        spec: spec.clone(),
        runs,
    })
}

fn rate(value: f64) -> String {
    format!("{value:.6}")
}

fn rate_fields(c: &DetectorCounts) -> [String; 3] {
    let fp = if c.received_benign > 0 {
        rate(fp_rate(c))
    } else {
        String::new()
    };
    let (tp, fn_) = match tp_rate(c) {
        Some(tp) => (rate(tp), rate(fn_rate(c))),
        None => (String::new(), String::new()),
    };
    [fp, tp, fn_]
}

/// Pooled summary for each parameter value, in output order.
pub fn aggregate_points(
    outcome: &SweepOutcome,
) -> Result<Vec<(String, crate::metrics::PointSummary)>, SweepError> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < outcome.runs.len() {
        let idx = outcome.runs[start].value_index;
        let end = start
            + outcome.runs[start..]
                .iter()
                .take_while(|r| r.value_index == idx)
                .count();
        let results: Vec<RunResult> = outcome.runs[start..end]
            .iter()
            .map(|r| r.result.clone())
            .collect();
        out.push((outcome.runs[start].param_value.clone(), aggregate(&results)?));
        start = end;
    }
    Ok(out)
}

pub fn write_raw_csv<W: Write>(outcome: &SweepOutcome, out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RAW_HEADER.split(','))?;
    let param = outcome.spec.param.name();
    for run in &outcome.runs {
        let r = &run.result;
        for d in Detector::ALL {
            let c = r.counts.get(d);
            let [fp, tp, fn_] = rate_fields(c);
            w.write_record([
                d.label().to_string(),
                param.to_string(),
                run.param_value.clone(),
                r.seed.to_string(),
                rate(r.realized_attacker_fraction()),
                c.received_benign.to_string(),
                c.received_malicious.to_string(),
                fp,
                tp,
                fn_,
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(outcome: &SweepOutcome, out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(AGGREGATE_HEADER.split(','))?;
    let param = outcome.spec.param.name();
    for (value, summary) in aggregate_points(outcome)? {
        for d in Detector::ALL {
            let c = summary.counts.get(d);
            let [fp, tp, fn_] = rate_fields(c);
            w.write_record([
                d.label().to_string(),
                param.to_string(),
                value.clone(),
                rate(summary.mean_realized_attacker_fraction),
                c.received_benign.to_string(),
                c.received_malicious.to_string(),
                fp,
                tp,
                fn_,
                summary.runs.to_string(),
                "true".to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn raw_csv_path(dir: &Path, sweep: &str) -> PathBuf {
    dir.join(format!("{sweep}_raw.csv"))
}

pub fn aggregate_csv_path(dir: &Path, sweep: &str) -> PathBuf {
    dir.join(format!("{sweep}_aggregate.csv"))
}

/// Writes `<name>_raw.csv` and `<name>_aggregate.csv` into `dir`, returning their paths.
pub fn write_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<[PathBuf; 2], SweepError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let raw = raw_csv_path(dir, &outcome.spec.name);
    let agg = aggregate_csv_path(dir, &outcome.spec.name);
    write_raw_csv(outcome, File::create(&raw).map_err(io_err(&raw))?)?;
    write_aggregate_csv(outcome, File::create(&agg).map_err(io_err(&agg))?)?;
    Ok([raw, agg])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_sweep;

    fn tiny(extra: &str) -> SweepSpec {
        parse_sweep(&format!(
            "world_width=800\nworld_height=800\ninitial_vehicles=25\narrival_rate=0.05\nduration=8\nattacker_probability=0.3\n{extra}"
        ))
        .unwrap()
    }

    fn csv_text(outcome: &SweepOutcome, aggregate: bool) -> String {
        let mut buf = Vec::new();
        if aggregate {
            write_aggregate_csv(outcome, &mut buf).unwrap();
        } else {
            write_raw_csv(outcome, &mut buf).unwrap();
        }
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn row_counts_follow_values_and_repetitions() {
        let spec = tiny("sweep_param=sigma\nsweep_values=150 50 100\nrepetitions=2");
        let outcome = run_sweep(&spec, &RunOptions { jobs: 2, ..Default::default() }).unwrap();
        assert_eq!(outcome.runs.len(), 6);
        let values: Vec<_> = outcome.runs.iter().map(|r| r.param_value.as_str()).collect();
        assert_eq!(values, ["50", "50", "100", "100", "150", "150"]);
        let raw = csv_text(&outcome, false);
        let agg = csv_text(&outcome, true);
        assert_eq!(raw.lines().next().unwrap(), RAW_HEADER);
        assert_eq!(agg.lines().next().unwrap(), AGGREGATE_HEADER);
        assert_eq!(raw.lines().count(), 1 + 6 * 4);
        assert_eq!(agg.lines().count(), 1 + 3 * 4);
    }

    #[test]
    fn single_run_aggregate_equals_raw() {
        let outcome = run_sweep(&tiny(""), &RunOptions::default()).unwrap();
        let raw = csv_text(&outcome, false);
        let agg = csv_text(&outcome, true);
        for (r, a) in raw.lines().skip(1).zip(agg.lines().skip(1)) {
            let r: Vec<&str> = r.split(',').collect();
            let a: Vec<&str> = a.split(',').collect();
            // Drop `seed` from raw and `runs,weighted` from aggregate.
            let r_rest: Vec<&str> = r[..3].iter().chain(&r[4..]).copied().collect();
            assert_eq!(r_rest, a[..9].to_vec());
            assert_eq!(a[9], "1");
        }
    }

    #[test]
    fn output_independent_of_job_count() {
        let spec = tiny("sweep_param=strategy\nsweep_values=fixed:300,300 random_position\nrepetitions=2");
        let a = run_sweep(&spec, &RunOptions { jobs: 1, ..Default::default() }).unwrap();
        let b = run_sweep(&spec, &RunOptions { jobs: 4, ..Default::default() }).unwrap();
        assert_eq!(csv_text(&a, false), csv_text(&b, false));
        assert_eq!(csv_text(&a, true), csv_text(&b, true));
        // Strategy values contain commas and must be quoted.
        assert!(csv_text(&a, false).contains("\"fixed:300,300\""));
    }

    #[test]
    fn blank_rates_without_attackers() {
        let outcome = run_sweep(&tiny("attacker_probability=0"), &RunOptions::default()).unwrap();
        let raw = csv_text(&outcome, false);
        for line in raw.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[6], "0");
            assert!(!f[7].is_empty());
            assert_eq!((f[8], f[9]), ("", ""));
        }
    }
}
