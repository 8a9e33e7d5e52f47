//! Batch execution: every scenario file in a directory crossed with the
//! requested methods and horizons, with per-run artifacts and an aggregate
//! timing/safety report in both plain-text and JSON form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::scenario::load_scenario;
use crate::harness::trace::{Outcome, TimingStats};
use crate::planner::{run_closed_loop, Method};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub scenario: String,
    pub method: String,
    pub horizon: usize,
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps: usize,
    pub min_clearance: Option<f64>,
    pub solve_ms: TimingStats,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub scenario: String,
    pub method: String,
    pub horizon: Option<usize>,
    pub error: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn table_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:<13} {:>2}  {:<9} {:>8} {:>6} {:>10}  {:>9} {:>9} {:>9} {:>9}",
            "scenario",
            "method",
            "N",
            "outcome",
            "time_s",
            "steps",
            "min_clear",
            "max_ms",
            "min_ms",
            "med_ms",
            "avg_ms"
        );
        for e in &self.entries {
            let clear = e
                .min_clearance
                .map_or("n/a".to_string(), |c| format!("{c:.4}"));
            let _ = writeln!(
                s,
                "{:<16} {:<13} {:>2}  {:<9} {:>8.2} {:>6} {:>10}  {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                e.scenario,
                e.method,
                e.horizon,
                e.outcome.to_string(),
                e.t_final,
                e.steps,
                clear,
                e.solve_ms.max,
                e.solve_ms.min,
                e.solve_ms.median,
                e.solve_ms.avg
            );
        }
        if !self.failures.is_empty() {
            let _ = writeln!(s, "\nfailures:");
            for f in &self.failures {
                let h = f
                    .horizon
                    .map_or("-".to_string(), |h| h.to_string());
                let _ = writeln!(s, "  {} / {} / N={}: {}", f.scenario, f.method, h, f.error);
            }
        }
        s
    }
}

/// Replaces anything outside [a-zA-Z0-9._-] so run names are safe file stems.
pub fn sanitize_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Runs scenario x method x horizon, persisting every trace under out_dir
/// and returning the aggregate report (also written as report.txt and
/// report.json). Individual run failures are recorded and the suite
/// continues.
pub fn run_suite(
    suite_dir: &Path,
    methods: &[Method],
    horizons: &[usize],
    out_dir: &Path,
    zero_timing: bool,
) -> Result<SuiteReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(suite_dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    files.sort();
    std::fs::create_dir_all(out_dir)?;

    let mut report = SuiteReport::default();
    for file in &files {
        let file_label = file
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario")
            .to_string();
        let scenario = match load_scenario(file) {
            Ok(s) => s,
            Err(e) => {
                report.failures.push(SuiteFailure {
                    scenario: file_label,
                    method: "-".into(),
                    horizon: None,
                    error: e.to_string(),
                });
                continue;
            }
        };
        for method in methods {
            for &horizon in horizons {
                match run_closed_loop(&scenario, *method, Some(horizon)) {
                    Ok(trace) => {
                        let stem = out_dir.join(format!(
                            "{}_{}_N{}",
                            sanitize_stem(&scenario.name),
                            method.name(),
                            horizon
                        ));
                        trace.write_files(&stem, zero_timing)?;
                        report.entries.push(SuiteEntry {
                            scenario: scenario.name.clone(),
                            method: method.name().to_string(),
                            horizon,
                            outcome: trace.outcome,
                            t_final: trace.t_final,
                            steps: trace.rows.len(),
                            min_clearance: trace.min_clearance(),
                            solve_ms: if zero_timing {
                                TimingStats::default()
                            } else {
                                trace.solve_time_stats()
                            },
                        });
                    }
                    Err(e) => report.failures.push(SuiteFailure {
                        scenario: scenario.name.clone(),
                        method: method.name().to_string(),
                        horizon: Some(horizon),
                        error: e.to_string(),
                    }),
                }
            }
        }
    }

    std::fs::write(out_dir.join("report.txt"), report.table_text())?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(out_dir.join("report.json"), json)?;
    Ok(report)
}
