use serde::{Deserialize, Serialize};

/// One verification result: two quantities that a theory statement ties
/// together, the tolerance they were compared at, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Pass when |lhs - rhs| <= tolerance.
    pub fn abs_diff(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
        }
    }

    /// Pass when |lhs - rhs| <= tolerance * max(|lhs|, |rhs|).
    pub fn rel_diff(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        Self {
            name: name.into(),
            lhs,
            rhs,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance * scale,
        }
    }

    /// Pass when lhs >= rhs - tolerance.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            tolerance,
            pass: lhs >= rhs - tolerance,
        }
    }
}
