use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use super::{mean_std, run, Metrics, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub config: TrainConfig,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// In grid order.
    pub runs: Vec<SweepRun>,
    /// Index of the run with the lowest best-epoch validation error
    /// (first one on ties).
    pub best: usize,
}

/// Trains every config independently on up to `jobs` threads and reports test
/// error for each. Results do not depend on `jobs`.
pub fn sweep(
    grid: &[TrainConfig],
    train: &Dataset,
    val: &Dataset,
    test: &Dataset,
    jobs: usize,
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::Parameter("sweep grid is empty".into()));
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Metrics>>>> =
        Mutex::new((0..grid.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, grid.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= grid.len() {
                    break;
                }
                let outcome = run(&grid[i], train, val, test).map(|(_, m)| m);
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    let mut runs = Vec::with_capacity(grid.len());
    for (config, slot) in grid.iter().zip(slots.into_inner().unwrap()) {
        let metrics = slot.expect("every grid entry is claimed by a worker")?;
        runs.push(SweepRun {
            config: config.clone(),
            metrics,
        });
    }
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        let score = r.metrics.best_monitor().unwrap_or(f64::INFINITY);
        if score < runs[best].metrics.best_monitor().unwrap_or(f64::INFINITY) {
            best = i;
        }
    }
    Ok(SweepOutcome { runs, best })
}

/// One aggregated row: the varied settings and the test errors of every seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub settings: Vec<(String, String)>,
    pub test_errors: Vec<f64>,
}

/// CSV with one column per varied key, then `runs,mean_test_err,std_test_err`.
pub fn summary_csv(keys: &[String], rows: &[SummaryRow]) -> String {
    let mut out = keys.join(",");
    if !keys.is_empty() {
        out.push(',');
    }
    out.push_str("runs,mean_test_err,std_test_err\n");
    for row in rows {
        for key in keys {
            let value = row
                .settings
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            out.push_str(value);
            out.push(',');
        }
        let (mean, std) = mean_std(&row.test_errors);
        writeln!(out, "{},{},{}", row.test_errors.len(), mean, std).unwrap();
    }
    out
}
