//! Scorecard for acceptance runs: one line per criterion and an overall
//! verdict.

use std::fmt;
use std::time::{Duration, Instant};

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    /// Passes when every part passes; details are joined.
    pub fn all(parts: Vec<Verdict>) -> Self {
        let pass = parts.iter().all(|p| p.pass);
        let detail = parts.iter().map(|p| p.detail.as_str()).collect::<Vec<_>>().join("; ");
        Self { pass, detail }
    }
}

/// `|value - target| <= tol`, with both numbers in the detail.
pub fn within(label: &str, value: f64, target: f64, tol: f64) -> Verdict {
    let err = (value - target).abs();
    Verdict::new(err <= tol, format!("{label}: {value:.12} vs {target:.12} (err {err:.2e}, tol {tol:.0e})"))
}

/// `|value - target| / |target| <= rel`.
pub fn within_relative(label: &str, value: f64, target: f64, rel: f64) -> Verdict {
    let err = (value - target).abs() / target.abs();
    Verdict::new(err <= rel, format!("{label}: {value:.6} vs {target:.6} (rel {err:.2e}, tol {rel:.1e})"))
}

pub struct Line {
    pub id: usize,
    pub name: String,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {} [{:.1}s]: {}",
            if self.verdict.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.verdict.detail
        )
    }
}

#[derive(Default)]
pub struct Scorecard {
    lines: Vec<Line>,
}

impl Scorecard {
    /// Run one criterion and print its line; errors count as failures.
    pub fn check<F>(&mut self, id: usize, name: &str, f: F)
    where
        F: FnOnce() -> Result<Verdict, String>,
    {
        let start = Instant::now();
        let verdict = f().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        let line = Line { id, name: name.to_string(), verdict, elapsed: start.elapsed() };
        println!("{line}");
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.verdict.pass).count()
    }

    pub fn summary(&self) -> String {
        format!("acceptance: {} passed, {} failed", self.lines.len() - self.failures(), self.failures())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_needs_every_part() {
        let v = Verdict::all(vec![Verdict::new(true, "a"), Verdict::new(false, "b")]);
        assert!(!v.pass);
        assert_eq!(v.detail, "a; b");
    }

    #[test]
    fn tolerances_are_inclusive() {
        assert!(within("x", 1.5, 1.0, 0.5).pass);
        assert!(!within("x", 1.5, 1.0, 0.49).pass);
        assert!(within_relative("x", 1.01, 1.0, 0.01 + 1e-12).pass);
    }

    #[test]
    fn errors_fail() {
        let mut s = Scorecard::default();
        s.check(1, "broken", || Err("boom".into()));
        s.check(2, "fine", || Ok(Verdict::new(true, "ok")));
        assert_eq!(s.failures(), 1);
        assert!(s.lines()[0].to_string().starts_with("FAIL criterion  1 broken"));
    }
}
