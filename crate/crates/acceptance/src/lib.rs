//! Holds the `acceptance` test target, which runs after the main crate's
//! own tests. See `tests/acceptance.rs`.

use std::fmt::Display;

/// One acceptance verdict, printed as a single line.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(id: u32, title: &'static str) -> Self {
        Verdict { id, title, passed: true, detail: String::new() }
    }

    /// Records one sub-check; the verdict fails if any sub-check fails.
    pub fn check(&mut self, ok: bool, what: impl Display) -> &mut Self {
        self.passed &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&format!("{}{what}", if ok { "" } else { "[x] " }));
        self
    }

    pub fn line(&self) -> String {
        format!("criterion {:2} {} {}: {}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title, self.detail)
    }
}

/// `lo ≤ x ≤ hi`.
pub fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

/// `|x − want| ≤ tol`.
pub fn near(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}
