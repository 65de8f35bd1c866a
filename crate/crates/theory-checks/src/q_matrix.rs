use serde::{Deserialize, Serialize};

/// The conditional second moment of the query regressor (1, p)' when the
/// query price is a uniform two-point mixture on {p_a, p_b}:
/// `Q = 1/2 P_a P_a' + 1/2 P_b P_b' = [[1, p_bar], [p_bar, p_bar^2 + delta^2/4]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QMatrix {
    /// Row-major entries.
    pub m: [[f64; 2]; 2],
    pub p_bar: f64,
    /// Absolute price gap |p_a - p_b|.
    pub delta: f64,
}

impl QMatrix {
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Determinant from the stored entries (subject to the usual
    /// cancellation at large p_bar; analytically it equals delta^2 / 4).
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Conditional variance of the query price: delta^2 / 4.
    pub fn query_price_variance(&self) -> f64 {
        0.25 * self.delta * self.delta
    }

    /// Quadratic form d' Q d.
    pub fn quad(&self, d: [f64; 2]) -> f64 {
        d[0] * (self.m[0][0] * d[0] + self.m[0][1] * d[1])
            + d[1] * (self.m[1][0] * d[0] + self.m[1][1] * d[1])
    }
}

/// Build the query second-moment matrix for candidate prices (p_a, p_b).
/// Delta = 0 yields a valid singular matrix.
pub fn q_matrix(p_a: f64, p_b: f64) -> QMatrix {
    let p_bar = 0.5 * (p_a + p_b);
    let delta = (p_a - p_b).abs();
    let second = 0.5 * (p_a * p_a + p_b * p_b);
    QMatrix {
        m: [[1.0, p_bar], [p_bar, second]],
        p_bar,
        delta,
    }
}

/// Smallest eigenvalue of Q (stable closed form for the 2x2 symmetric
/// case) together with the price-gap lower bound
/// `delta^2 / (4 (1 + p_bar^2) + delta^2)`.
///
/// The eigenvalue is computed from the stored entries, so corrupted
/// entries are caught by comparing against the bound; the bound comes
/// from the closed formula in (p_bar, delta).
pub fn lambda_min_and_bound(q: &QMatrix) -> (f64, f64) {
    let tr = q.trace();
    let det = q.det().max(0.0);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    // Smaller root of l^2 - tr l + det via the numerically stable form
    // 2 det / (tr + sqrt(tr^2 - 4 det)): no cancellation for small det.
    let lambda_min = if tr + disc > 0.0 { 2.0 * det / (tr + disc) } else { 0.0 };
    let d2 = q.delta * q.delta;
    let bound = if d2 == 0.0 {
        0.0
    } else {
        d2 / (4.0 * (1.0 + q.p_bar * q.p_bar) + d2)
    };
    (lambda_min, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_trace_det_at_zero_two() {
        let q = q_matrix(0.0, 2.0);
        assert_eq!(q.m, [[1.0, 1.0], [1.0, 2.0]]);
        assert_eq!(q.det(), 1.0);
        assert_eq!(q.trace(), 3.0);
    }

    #[test]
    fn equal_prices_make_a_singular_matrix() {
        let q = q_matrix(3.0, 3.0);
        assert_eq!(q.m, [[1.0, 3.0], [3.0, 9.0]]);
        assert_eq!(q.det(), 0.0);
        let (lambda, bound) = lambda_min_and_bound(&q);
        assert_eq!(lambda, 0.0);
        assert_eq!(bound, 0.0);
    }

    #[test]
    fn query_price_variance_is_quarter_gap_squared() {
        assert_eq!(q_matrix(1.0, 2.0).query_price_variance(), 0.25);
    }

    #[test]
    fn closed_form_eigenvalue_at_zero_two() {
        let (lambda, bound) = lambda_min_and_bound(&q_matrix(0.0, 2.0));
        let exact = 0.5 * (3.0 - 5.0_f64.sqrt());
        assert!((lambda - exact).abs() < 1e-12, "lambda_min = {lambda}");
        assert!((bound - 1.0 / 3.0).abs() < 1e-15, "bound = {bound}");
        assert!(lambda >= bound);
    }

    /// The injected-bug mutation: halving the entries halves the
    /// eigenvalue while the formula bound stays put, so the bound check
    /// must flip to failing.
    #[test]
    fn corrupted_entries_violate_the_bound() {
        let mut q = q_matrix(0.0, 2.0);
        for row in q.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        let (lambda, bound) = lambda_min_and_bound(&q);
        assert!(
            lambda < bound,
            "corrupted Q should violate the bound: {lambda} vs {bound}"
        );
    }
}
