use serde::{Deserialize, Serialize};

/// Absolute plus relative tolerance: `lhs ≤ rhs` is accepted when
/// `lhs ≤ rhs + abs + rel·|rhs|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-6, rel: 1e-6 }
    }
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// Tolerance for finite-difference derivative checks.
    pub const fn derivative() -> Self {
        Self { abs: 1e-3, rel: 0.0 }
    }

    pub fn allows(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + self.abs + self.rel * rhs.abs()
    }
}

/// A sample where `lhs ≤ rhs` failed. `margin = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub j: i64,
    pub cond: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// One per-sample pair of compared quantities, kept for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub j: i64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub variant: String,
    pub check: String,
    pub passed: bool,
    pub samples_checked: usize,
    /// Samples where the trigger of a gated condition held.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_hits: Option<usize>,
    /// Passed only because no sample was subject to the condition.
    pub vacuous: bool,
    pub violations: Vec<Violation>,
    pub tolerances: Tolerance,
    /// Smallest `rhs - lhs` over all tested samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl CheckReport {
    /// Violations sorted worst first.
    pub fn sorted_violations(&self) -> Vec<&Violation> {
        let mut v: Vec<&Violation> = self.violations.iter().collect();
        v.sort_by(|a, b| a.margin.total_cmp(&b.margin));
        v
    }

    /// `PASS variant=.. samples=.. hits=.. check=..`
    pub fn summary_line(&self) -> String {
        let verdict = match (self.passed, self.vacuous) {
            (true, false) => "PASS",
            (true, true) => "VACUOUS",
            (false, _) => "FAIL",
        };
        let mut s = format!("{verdict} variant={} samples={}", self.variant, self.samples_checked);
        if let Some(h) = self.trigger_hits {
            s.push_str(&format!(" hits={h}"));
        }
        if !self.violations.is_empty() {
            s.push_str(&format!(" violations={}", self.violations.len()));
        }
        s.push_str(&format!(" check={}", self.check));
        s
    }
}

/// Maximum number of trace rows kept per report.
pub const TRACE_LIMIT: usize = 2000;

/// Accumulates samples into a [`CheckReport`].
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    report: CheckReport,
    gated: bool,
    traced: Vec<TraceRow>,
    keep_trace: bool,
}

impl ReportBuilder {
    pub fn new(variant: &str, check: &str, tol: Tolerance) -> Self {
        Self {
            report: CheckReport {
                variant: variant.to_string(),
                check: check.to_string(),
                passed: true,
                samples_checked: 0,
                trigger_hits: None,
                vacuous: false,
                violations: Vec::new(),
                tolerances: tol,
                worst_margin: None,
                notes: Vec::new(),
                trace: Vec::new(),
            },
            gated: false,
            traced: Vec::new(),
            keep_trace: false,
        }
    }

    /// Count trigger hits; a report with no hits is vacuous.
    pub fn gated(mut self) -> Self {
        self.gated = true;
        self.report.trigger_hits = Some(0);
        self
    }

    pub fn traced(mut self) -> Self {
        self.keep_trace = true;
        self
    }

    pub fn tol(&self) -> Tolerance {
        self.report.tolerances
    }

    pub fn sample(&mut self) {
        self.report.samples_checked += 1;
    }

    pub fn hit(&mut self) {
        if let Some(h) = self.report.trigger_hits.as_mut() {
            *h += 1;
        }
    }

    /// Test `lhs ≤ rhs` under the tolerance, recording a violation on failure.
    pub fn test(&mut self, t: f64, j: i64, cond: &str, lhs: f64, rhs: f64) -> bool {
        let margin = rhs - lhs;
        let ok = self.report.tolerances.allows(lhs, rhs) && !lhs.is_nan() && !rhs.is_nan();
        let w = self.report.worst_margin.get_or_insert(margin);
        if margin < *w || margin.is_nan() {
            *w = margin;
        }
        if self.keep_trace {
            self.traced.push(TraceRow { t, j, lhs, rhs });
        }
        if !ok {
            self.report.violations.push(Violation {
                t,
                j,
                cond: cond.to_string(),
                lhs,
                rhs,
                margin,
            });
        }
        ok
    }

    /// Record a failed strict comparison that the tolerance cannot rescue.
    pub fn fail(&mut self, t: f64, j: i64, cond: &str, lhs: f64, rhs: f64) {
        let margin = rhs - lhs;
        let w = self.report.worst_margin.get_or_insert(margin);
        *w = w.min(margin);
        self.report.violations.push(Violation {
            t,
            j,
            cond: cond.to_string(),
            lhs,
            rhs,
            margin,
        });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.report.notes.push(s.into());
    }

    pub fn finish(mut self) -> CheckReport {
        let r = &mut self.report;
        r.passed = r.violations.is_empty();
        r.vacuous = r.passed
            && if self.gated {
                r.trigger_hits == Some(0)
            } else {
                r.samples_checked == 0
            };
        if self.keep_trace && !self.traced.is_empty() {
            let n = self.traced.len();
            let stride = n.div_ceil(TRACE_LIMIT).max(1);
            let mut rows: Vec<TraceRow> = self.traced.iter().step_by(stride).cloned().collect();
            if (n - 1) % stride != 0 {
                rows.push(self.traced[n - 1].clone());
            }
            r.trace = rows;
        }
        self.report
    }
}

/// Merge several reports into one verdict under a new check name.
pub fn combine(variant: &str, check: &str, parts: &[CheckReport]) -> CheckReport {
    let tol = parts.first().map(|p| p.tolerances).unwrap_or_default();
    let mut b = ReportBuilder::new(variant, check, tol);
    for p in parts {
        b.report.samples_checked += p.samples_checked;
        b.report.violations.extend(p.violations.iter().cloned());
        b.report.notes.extend(p.notes.iter().cloned());
        if let Some(m) = p.worst_margin {
            let w = b.report.worst_margin.get_or_insert(m);
            *w = w.min(m);
        }
    }
    b.finish()
}
