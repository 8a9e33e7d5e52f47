//! Simulation traces: per-step rows, run summaries, and the CSV plus JSON
//! sidecar persistence format.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed trace reproduces the original values bit for bit and repeated
//! deterministic runs produce identical bytes (timing column aside).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::harness::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Goal,
    Collision,
    Timeout,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Goal => "goal",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        })
    }
}

/// One executed control step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub p: Vec2,
    pub v: Vec2,
    /// Acceleration applied over [t, t+dt) (for the reactive controller:
    /// the induced, unclamped acceleration).
    pub a: Vec2,
    pub solve_ms: f64,
    pub outer_iters: usize,
    /// Final stacked constraint-distance norm of the solve at this step.
    pub norm_v: f64,
    /// Center distance to each obstacle at time t.
    pub clearances: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub max: f64,
    pub min: f64,
    pub median: f64,
    pub avg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub scenario: Scenario,
    pub method: String,
    pub horizon: usize,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub outcome: Outcome,
    /// Simulated time at which the run ended.
    pub t_final: f64,
}

/// Sidecar metadata stored next to the CSV so traces can be reloaded and
/// replotted without rerunning.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct TraceMeta {
    scenario: Scenario,
    method: String,
    horizon: usize,
    seed: u64,
    outcome: Outcome,
    t_final: f64,
}

impl SimTrace {
    pub fn reached_goal(&self) -> bool {
        self.outcome == Outcome::Goal
    }

    pub fn collision(&self) -> bool {
        self.outcome == Outcome::Collision
    }

    /// Row-wise minimum center distance over all obstacles; None when the
    /// scenario has no obstacles or no rows.
    pub fn min_clearance(&self) -> Option<f64> {
        self.rows
            .iter()
            .flat_map(|r| r.clearances.iter().copied())
            .fold(None, |acc, c| Some(acc.map_or(c, |a: f64| a.min(c))))
    }

    pub fn solve_time_stats(&self) -> TimingStats {
        timing_stats(self.rows.iter().map(|r| r.solve_ms))
    }

    pub fn csv_string(&self, zero_timing: bool) -> String {
        let n_obs = self.scenario.obstacles.len();
        let mut out = String::new();
        out.push_str("t,x,y,vx,vy,ax,ay,solve_ms,outer_iters,norm_V");
        for i in 1..=n_obs {
            let _ = write!(out, ",clearance_{i}");
        }
        out.push('\n');
        for row in &self.rows {
            let solve_ms = if zero_timing { 0.0 } else { row.solve_ms };
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                row.t,
                row.p.x,
                row.p.y,
                row.v.x,
                row.v.y,
                row.a.x,
                row.a.y,
                solve_ms,
                row.outer_iters,
                row.norm_v
            );
            for c in &row.clearances {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self, zero_timing: bool) -> String {
        let stats = if zero_timing {
            TimingStats::default()
        } else {
            self.solve_time_stats()
        };
        let threshold: Vec<String> = self
            .scenario
            .obstacles
            .iter()
            .map(|o| format!("{}", self.scenario.robot.r + o.radius))
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario.name);
        let _ = writeln!(s, "method: {}", self.method);
        let _ = writeln!(s, "horizon: {}", self.horizon);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "outcome: {}", self.outcome);
        let _ = writeln!(s, "time: {} s", self.t_final);
        let _ = writeln!(s, "steps: {}", self.rows.len());
        match self.min_clearance() {
            Some(c) => {
                let _ = writeln!(
                    s,
                    "min_clearance: {c} (collision thresholds: {})",
                    threshold.join(", ")
                );
            }
            None => {
                let _ = writeln!(s, "min_clearance: n/a");
            }
        }
        let _ = writeln!(
            s,
            "solve_ms: max {} min {} median {} avg {}",
            stats.max, stats.min, stats.median, stats.avg
        );
        s
    }

    /// Writes `<stem>.csv`, `<stem>.meta.json`, `<stem>.svg` and
    /// `<stem>.summary.txt`; returns the four paths.
    pub fn write_files(&self, stem: &Path, zero_timing: bool) -> Result<Vec<PathBuf>> {
        if let Some(dir) = stem.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let with_ext = |ext: &str| -> PathBuf {
            let mut os = stem.as_os_str().to_owned();
            os.push(ext);
            PathBuf::from(os)
        };
        let csv_path = with_ext(".csv");
        let meta_path = with_ext(".meta.json");
        let svg_path = with_ext(".svg");
        let summary_path = with_ext(".summary.txt");

        std::fs::write(&csv_path, self.csv_string(zero_timing))?;
        let meta = TraceMeta {
            scenario: self.scenario.clone(),
            method: self.method.clone(),
            horizon: self.horizon,
            seed: self.seed,
            outcome: self.outcome,
            t_final: self.t_final,
        };
        let mut meta_json = serde_json::to_string_pretty(&meta)?;
        meta_json.push('\n');
        std::fs::write(&meta_path, meta_json)?;
        crate::harness::plot::emit_plot(std::slice::from_ref(self), &svg_path)?;
        std::fs::write(&summary_path, self.summary_text(zero_timing))?;
        Ok(vec![csv_path, meta_path, svg_path, summary_path])
    }

    /// Reloads a trace from its CSV plus the sidecar `<stem>.meta.json`.
    pub fn read_files(csv_path: &Path) -> Result<SimTrace> {
        let meta_path = sibling_meta_path(csv_path)?;
        let meta: TraceMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        let text = std::fs::read_to_string(csv_path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter(format!("{}: empty CSV", csv_path.display())))?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 10 || columns[0] != "t" {
            return Err(Error::InvalidParameter(format!(
                "{}: unexpected CSV header",
                csv_path.display()
            )));
        }
        let n_clear = columns.len() - 10;
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::InvalidParameter(format!(
                    "{}: row {} has {} fields, expected {}",
                    csv_path.display(),
                    lineno + 2,
                    fields.len(),
                    columns.len()
                )));
            }
            let f = |i: usize| -> Result<f64> {
                fields[i].parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!(
                        "{}: row {}, column {}: {e}",
                        csv_path.display(),
                        lineno + 2,
                        columns[i]
                    ))
                })
            };
            let outer_iters = fields[8].parse::<usize>().map_err(|e| {
                Error::InvalidParameter(format!(
                    "{}: row {}, column outer_iters: {e}",
                    csv_path.display(),
                    lineno + 2
                ))
            })?;
            let mut clearances = Vec::with_capacity(n_clear);
            for i in 0..n_clear {
                clearances.push(f(10 + i)?);
            }
            rows.push(TraceRow {
                t: f(0)?,
                p: Vec2::new(f(1)?, f(2)?),
                v: Vec2::new(f(3)?, f(4)?),
                a: Vec2::new(f(5)?, f(6)?),
                solve_ms: f(7)?,
                outer_iters,
                norm_v: f(9)?,
                clearances,
            });
        }
        Ok(SimTrace {
            scenario: meta.scenario,
            method: meta.method,
            horizon: meta.horizon,
            seed: meta.seed,
            rows,
            outcome: meta.outcome,
            t_final: meta.t_final,
        })
    }
}

fn sibling_meta_path(csv_path: &Path) -> Result<PathBuf> {
    if csv_path.extension().and_then(|e| e.to_str()) != Some("csv") {
        return Err(Error::InvalidParameter(format!(
            "{}: expected a .csv trace path",
            csv_path.display()
        )));
    }
    Ok(csv_path.with_extension("meta.json"))
}

pub fn timing_stats(samples: impl Iterator<Item = f64>) -> TimingStats {
    let mut values: Vec<f64> = samples.collect();
    if values.is_empty() {
        return TimingStats::default();
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    TimingStats {
        max: values[n - 1],
        min: values[0],
        median,
        avg: values.iter().sum::<f64>() / n as f64,
    }
}
