use demand_core::TaskPanel;
use serde::{Deserialize, Serialize};

use crate::{Design, QueryAssignment};

/// How DCMOML supervision is formed: average the loss over both candidate
/// query indices (lower variance, the default) or use the sampled query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    Averaged,
    Sampled,
}

/// One supervised pair: the squared loss term is
/// `weight * (demand - (theta0_hat + price * theta1_hat))^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisionTarget {
    pub price: f64,
    pub demand: f64,
    pub weight: f64,
}

/// Exposure share of index `j` among the candidate query set.
fn exposure_share(panel: &TaskPanel, candidates: &[usize], j: usize) -> f64 {
    match &panel.exposures {
        Some(e) => {
            let total: f64 = candidates.iter().map(|&c| e[c] as f64).sum();
            e[j] as f64 / total
        }
        None => 1.0 / candidates.len() as f64,
    }
}

/// The training targets a design extracts from a panel.
///
/// - DCMOML averaged: both candidate pairs, weighted by their normalized
///   exposure shares (uniform halves without exposures).
/// - DCMOML sampled and DCUOML: the sampled query pair; its weight is the
///   candidate count times the exposure share, so the expectation over the
///   uniform query draw equals the averaged loss exactly (weight 1 without
///   exposures).
/// - META / DCML: the single final pair with weight 1.
pub fn supervision_targets(
    panel: &TaskPanel,
    design: Design,
    assignment: &QueryAssignment,
    mode: LossMode,
) -> Vec<SupervisionTarget> {
    let last = panel.len() - 1;
    let target = |j: usize, weight: f64| SupervisionTarget {
        price: panel.prices[j],
        demand: panel.demands[j],
        weight,
    };
    match design {
        Design::Dcmoml => {
            let candidates = [assignment.k_star, last];
            match mode {
                LossMode::Averaged => candidates
                    .iter()
                    .map(|&j| target(j, exposure_share(panel, &candidates, j)))
                    .collect(),
                LossMode::Sampled => {
                    let j = assignment.k_query;
                    vec![target(j, 2.0 * exposure_share(panel, &candidates, j))]
                }
            }
        }
        Design::Dcuoml => {
            let candidates = [last - 1, last];
            let j = if assignment.k_query == assignment.k_star {
                last - 1
            } else {
                last
            };
            vec![target(j, 2.0 * exposure_share(panel, &candidates, j))]
        }
        Design::Dcml | Design::Meta => vec![target(last, 1.0)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment_on(k_star: usize, last: usize, query_at_star: bool) -> QueryAssignment {
        if query_at_star {
            QueryAssignment {
                k_star,
                k_query: k_star,
                k_masked_other: last,
            }
        } else {
            QueryAssignment {
                k_star,
                k_query: last,
                k_masked_other: k_star,
            }
        }
    }

    #[test]
    fn dcmoml_averaged_returns_half_weighted_pair() {
        let panel = TaskPanel::new(0, vec![], vec![1.0, 2.0], vec![3.0, 1.0]).unwrap();
        let targets = supervision_targets(
            &panel,
            Design::Dcmoml,
            &assignment_on(0, 1, true),
            LossMode::Averaged,
        );
        assert_eq!(
            targets,
            vec![
                SupervisionTarget { price: 1.0, demand: 3.0, weight: 0.5 },
                SupervisionTarget { price: 2.0, demand: 1.0, weight: 0.5 },
            ]
        );
    }

    #[test]
    fn meta_supervises_the_final_pair() {
        let panel = TaskPanel::new(0, vec![], vec![1.0, 2.0, 3.0], vec![5.0, 4.0, 2.0]).unwrap();
        let targets = supervision_targets(
            &panel,
            Design::Meta,
            &assignment_on(1, 2, false),
            LossMode::Averaged,
        );
        assert_eq!(
            targets,
            vec![SupervisionTarget { price: 3.0, demand: 2.0, weight: 1.0 }]
        );
    }

    #[test]
    fn exposure_weights_normalize_within_task() {
        let panel = TaskPanel::new(0, vec![], vec![1.0, 2.0], vec![3.0, 1.0])
            .unwrap()
            .with_exposures(vec![4, 1])
            .unwrap();
        let targets = supervision_targets(
            &panel,
            Design::Dcmoml,
            &assignment_on(0, 1, true),
            LossMode::Averaged,
        );
        assert_eq!(targets[0].weight, 0.8);
        assert_eq!(targets[1].weight, 0.2);
        assert!((targets.iter().map(|t| t.weight).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_weight_doubles_the_share() {
        let panel = TaskPanel::new(0, vec![], vec![1.0, 2.0], vec![3.0, 1.0]).unwrap();
        let sampled = supervision_targets(
            &panel,
            Design::Dcmoml,
            &assignment_on(0, 1, false),
            LossMode::Sampled,
        );
        assert_eq!(
            sampled,
            vec![SupervisionTarget { price: 2.0, demand: 1.0, weight: 1.0 }]
        );
    }
}
