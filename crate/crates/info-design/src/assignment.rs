use rand::Rng;

use crate::InfoDesignError;

/// Two-point query assignment for one task. All indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryAssignment {
    /// Largest index whose price differs from the final price.
    pub k_star: usize,
    /// The supervised index, drawn uniformly from `{k_star, last}`.
    pub k_query: usize,
    /// The other element of `{k_star, last}`.
    pub k_masked_other: usize,
}

impl QueryAssignment {
    /// The index pair whose demands are withheld, in ascending order.
    pub fn masked_pair(&self) -> (usize, usize) {
        (
            self.k_query.min(self.k_masked_other),
            self.k_query.max(self.k_masked_other),
        )
    }
}

/// Largest index `j` with `prices[j] != prices[last]`, by exact float
/// comparison. Continuous generators make ties measure-zero and discrete
/// retail prices are exact scaled decimals, so no tolerance is involved.
pub fn find_penultimate_index(prices: &[f64]) -> Result<usize, InfoDesignError> {
    if prices.len() < 2 {
        return Err(InfoDesignError::PanelTooShort {
            needed: 2,
            got: prices.len(),
        });
    }
    let last = prices[prices.len() - 1];
    prices[..prices.len() - 1]
        .iter()
        .rposition(|&p| p != last)
        .ok_or(InfoDesignError::AllPricesEqual)
}

/// Draw the query index uniformly from `{k_star, last}`.
pub fn assign_query<R: Rng>(prices: &[f64], rng: &mut R) -> Result<QueryAssignment, InfoDesignError> {
    let k_star = find_penultimate_index(prices)?;
    let last = prices.len() - 1;
    let (k_query, k_masked_other) = if rng.gen_bool(0.5) {
        (k_star, last)
    } else {
        (last, k_star)
    };
    Ok(QueryAssignment {
        k_star,
        k_query,
        k_masked_other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use demand_core::{task_rng, StreamDomain};

    #[test]
    fn penultimate_index_definitional_cases() {
        assert_eq!(find_penultimate_index(&[3.0, 3.0, 5.0, 5.0, 5.0]), Ok(1));
        assert_eq!(find_penultimate_index(&[1.0, 2.0]), Ok(0));
        assert_eq!(
            find_penultimate_index(&[4.0, 4.0, 4.0]),
            Err(InfoDesignError::AllPricesEqual)
        );
    }

    #[test]
    fn assignment_covers_the_pair() {
        let prices = [3.0, 3.0, 5.0];
        let mut rng = task_rng(1, StreamDomain::QueryAssignment, 0);
        for _ in 0..32 {
            let a = assign_query(&prices, &mut rng).unwrap();
            assert_eq!(a.k_star, 1);
            assert_eq!(a.masked_pair(), (1, 2));
            assert!(a.k_query == 1 || a.k_query == 2);
            assert_ne!(a.k_query, a.k_masked_other);
        }
    }

    #[test]
    fn assignment_is_deterministic_per_stream() {
        let prices = [1.0, 2.0];
        let a = assign_query(&prices, &mut task_rng(9, StreamDomain::QueryAssignment, 4)).unwrap();
        let b = assign_query(&prices, &mut task_rng(9, StreamDomain::QueryAssignment, 4)).unwrap();
        assert_eq!(a, b);
    }

    /// Binomial check: the query lands on k_star half the time. The
    /// tolerance 0.01 is ~6 binomial standard errors at 1e5 draws.
    #[test]
    fn query_randomization_is_uniform() {
        let prices = [1.0, 2.0];
        let mut hits = 0u64;
        let n = 100_000;
        for task in 0..n {
            let a =
                assign_query(&prices, &mut task_rng(3, StreamDomain::QueryAssignment, task)).unwrap();
            if a.k_query == a.k_star {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.01, "P(query at k_star) = {p}");
    }
}
