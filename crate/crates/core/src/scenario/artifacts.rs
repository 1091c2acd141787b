use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::Verdict;
use crate::certificates::CheckReport;
use crate::error::{Error, Result};
use crate::hybrid_time::io::{fmt_f64, read_arc_csv, write_arc_csv, DomainHeader};
use crate::hybrid_time::Interpolation;
use crate::system::{Event, EventKind, Solution};

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const INPUT_CSV: &str = "input.csv";
pub const EVENTS_JSON: &str = "events.json";
pub const DOMAIN_JSON: &str = "domain.json";
pub const REPORT_JSON: &str = "report.json";
pub const TRACES_CSV: &str = "traces.csv";
pub const PLOT_CSV: &str = "plot_data.csv";
pub const PLOT_PY: &str = "plot.py";

/// A generic plotting script for `plot_data.csv`: one panel per check,
/// compared value and bound against `t + j`.
pub const PLOT_SCRIPT: &str = r#"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "plot_data.csv"
series = defaultdict(lambda: ([], [], []))
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        s = series[row["check"]]
        s[0].append(float(row["t_plus_j"]))
        s[1].append(float(row["v"]))
        s[2].append(float(row["envelope"]))

fig, axes = plt.subplots(len(series), 1, figsize=(8, 3 * len(series)), squeeze=False)
for ax, (name, (x, v, env)) in zip(axes[:, 0], series.items()):
    ax.plot(x, v, label="value")
    ax.plot(x, env, "--", label="bound")
    ax.set_title(name)
    ax.set_xlabel("t + j")
    ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventsFile {
    termination: EventKind,
    delta: f64,
    event_tol: f64,
    events: Vec<Event>,
}

/// Everything `report.json` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub system: String,
    pub termination: EventKind,
    pub end_t: f64,
    pub end_j: i64,
    pub verdict: Verdict,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub reports: Vec<CheckReport>,
}

impl ScenarioReport {
    /// Human-readable summary: a header, one line per report and the worst
    /// violations of each failing report.
    pub fn summary(&self, max_violations: usize) -> String {
        let mut s = format!(
            "scenario {} ({}): {:?}, termination {:?} at (t={}, j={})\n",
            self.name, self.system, self.verdict, self.termination, self.end_t, self.end_j
        );
        for r in &self.reports {
            s.push_str(&r.summary_line());
            s.push('\n');
            for v in r.sorted_violations().into_iter().take(max_violations) {
                s.push_str(&format!(
                    "  margin={:.6e} t={} j={} {}: lhs={:.6e} rhs={:.6e}\n",
                    v.margin, v.t, v.j, v.cond, v.lhs, v.rhs
                ));
            }
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serialises");
    s.push('\n');
    s
}

/// Write `trajectory.csv` (with derivatives), `input.csv`, `events.json`
/// and `domain.json` into `dir`, creating it if needed.
pub fn write_trajectory(dir: &Path, sol: &Solution) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(dir, TRAJECTORY_CSV)?;
    write_arc_csv(&sol.x, &mut w, true)?;
    w.flush()?;
    let mut w = create(dir, INPUT_CSV)?;
    write_arc_csv(&sol.u, &mut w, false)?;
    w.flush()?;
    let ev = EventsFile {
        termination: sol.termination,
        delta: sol.delta,
        event_tol: sol.event_tol,
        events: sol.events.clone(),
    };
    fs::write(dir.join(EVENTS_JSON), to_json(&ev))?;
    fs::write(dir.join(DOMAIN_JSON), to_json(&DomainHeader::of(&sol.x, sol.delta)))?;
    Ok(())
}

/// Re-load a solution written by [`write_trajectory`].
pub fn load_solution(dir: &Path) -> Result<Solution> {
    let read = |name: &str| -> Result<String> {
        fs::read_to_string(dir.join(name)).map_err(|e| Error::Io(format!("{name}: {e}")))
    };
    let header: DomainHeader =
        serde_json::from_str(&read(DOMAIN_JSON)?).map_err(|e| Error::Io(format!("{DOMAIN_JSON}: {e}")))?;
    let ev: EventsFile =
        serde_json::from_str(&read(EVENTS_JSON)?).map_err(|e| Error::Io(format!("{EVENTS_JSON}: {e}")))?;
    let x = read_arc_csv(read(TRAJECTORY_CSV)?.as_bytes(), header.interpolation)?;
    if x.domain().segments() != header.segments.as_slice() {
        return Err(Error::Io("trajectory does not match its domain header".into()));
    }
    let u = read_arc_csv(read(INPUT_CSV)?.as_bytes(), Interpolation::Linear)?;
    Ok(Solution {
        x,
        u,
        events: ev.events,
        termination: ev.termination,
        delta: ev.delta,
        event_tol: ev.event_tol,
    })
}

pub fn write_report(dir: &Path, report: &ScenarioReport) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(REPORT_JSON);
    fs::write(&path, to_json(report))?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ScenarioReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Per-sample traces of every traced report: `check, t, j, t_plus_j, v,
/// envelope, margin`, where `v` is the bounded side and `envelope` the bound.
pub fn write_trace_csv<W: Write>(reports: &[CheckReport], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["check", "t", "j", "t_plus_j", "v", "envelope", "margin"])?;
    for r in reports {
        for row in &r.trace {
            wtr.write_record([
                r.check.clone(),
                fmt_f64(row.t),
                row.j.to_string(),
                fmt_f64(row.t + row.j as f64),
                fmt_f64(row.lhs),
                fmt_f64(row.rhs),
                fmt_f64(row.rhs - row.lhs),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Write `plot_data.csv` and `plot.py` next to each other in `dir`.
pub fn write_plot_data(dir: &Path, report: &ScenarioReport) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(PLOT_CSV);
    write_trace_csv(&report.reports, create(dir, PLOT_CSV)?)?;
    let py = dir.join(PLOT_PY);
    fs::write(&py, PLOT_SCRIPT)?;
    Ok((csv_path, py))
}
