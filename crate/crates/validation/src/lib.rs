//! Small helpers shared by the acceptance run.

use std::time::Instant;

/// `ln(e_coarse / e_fine) / ln(step_coarse / step_fine)`.
pub fn empirical_order(e_coarse: f64, e_fine: f64, step_coarse: f64, step_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (step_coarse / step_fine).ln()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_variation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Outcome of one numbered criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub number: usize,
    pub title: &'static str,
    pub pass: bool,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.1} s)",
            self.number,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.details.join("; "),
            self.seconds
        )
    }
}

/// Collects named checks for one criterion.
pub struct Checks {
    start: Instant,
    pass: bool,
    details: Vec<String>,
}

impl Default for Checks {
    fn default() -> Self {
        Self::new()
    }
}

impl Checks {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            pass: true,
            details: Vec::new(),
        }
    }

    /// Records `detail`, prefixed with `FAILED` when `ok` is false.
    pub fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if ok {
            self.details.push(detail);
        } else {
            self.pass = false;
            self.details.push(format!("FAILED {detail}"));
        }
    }

    /// Informational note that does not affect the verdict.
    pub fn note(&mut self, detail: impl Into<String>) {
        self.details.push(detail.into());
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn finish(self, number: usize, title: &'static str) -> Verdict {
        Verdict {
            number,
            title,
            pass: self.pass,
            seconds: self.start.elapsed().as_secs_f64(),
            details: self.details,
        }
    }
}
