use demand_core::TaskPanel;
use serde::{Deserialize, Serialize};

use crate::{InfoDesignError, QueryAssignment};

/// The four information-set designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    /// Full price path; demands at both candidate query indices withheld.
    Dcmoml,
    /// Full price path; last two demands withheld but the non-query value
    /// is appended without its index.
    Dcuoml,
    /// Full price path including the query price; only the query demand is
    /// withheld.
    Dcml,
    /// Support/query split: first K-1 pairs visible, query price hidden.
    Meta,
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Design::Dcmoml => "DCMOML",
            Design::Dcuoml => "DCUOML",
            Design::Dcml => "DCML",
            Design::Meta => "META",
        };
        f.write_str(s)
    }
}

/// A learner's input for one task.
///
/// `prices` always stores the full path for bookkeeping; which entries are
/// exposed to a model is decided by [`MaskedInfoSet::to_features`]. No
/// design ever includes the demand at the query index among
/// `visible_demands`, and for DCUOML the leaked value carries no index.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedInfoSet {
    pub context: Vec<f64>,
    pub prices: Vec<f64>,
    /// `(index, demand)` pairs the learner may see, ascending by index.
    pub visible_demands: Vec<(usize, f64)>,
    pub design: Design,
    /// The designated query price; present only for DCML.
    pub query_price: Option<f64>,
    /// The non-query demand value without its index; present only for
    /// DCUOML.
    pub unindexed_demand: Option<f64>,
}

/// Apply a design's visibility rules to a panel.
pub fn build_info_set(
    panel: &TaskPanel,
    design: Design,
    assignment: &QueryAssignment,
) -> Result<MaskedInfoSet, InfoDesignError> {
    let k = panel.len();
    if k < 2 {
        return Err(InfoDesignError::PanelTooShort { needed: 2, got: k });
    }
    let last = k - 1;
    let mut info = MaskedInfoSet {
        context: panel.context.clone(),
        prices: panel.prices.clone(),
        visible_demands: Vec::new(),
        design,
        query_price: None,
        unindexed_demand: None,
    };
    match design {
        Design::Dcmoml => {
            let (a, b) = assignment.masked_pair();
            debug_assert_eq!(b, last);
            for j in 0..k {
                if j != a && j != b {
                    info.visible_demands.push((j, panel.demands[j]));
                }
            }
        }
        Design::Dcuoml => {
            // Candidates are the final two indices; reuse the assignment's
            // coin so the choice stays deterministic per task.
            let query = if assignment.k_query == assignment.k_star {
                k - 2
            } else {
                last
            };
            let other = (k - 2) + (last - query);
            for j in 0..k.saturating_sub(2) {
                info.visible_demands.push((j, panel.demands[j]));
            }
            info.unindexed_demand = Some(panel.demands[other]);
        }
        Design::Dcml | Design::Meta => {
            for j in 0..last {
                info.visible_demands.push((j, panel.demands[j]));
            }
            if design == Design::Dcml {
                info.query_price = Some(panel.prices[last]);
            }
        }
    }
    Ok(info)
}

/// Flattened model-input length for a given design, panel length and
/// context dimension.
pub fn feature_len(design: Design, k: usize, context_dim: usize) -> usize {
    match design {
        // context | K prices | K (value, presence-flag) demand slots
        Design::Dcmoml => context_dim + k + 2 * k,
        // context | K prices | K-2 demands | unindexed demand
        Design::Dcuoml => context_dim + k + (k - 2) + 1,
        // context | K prices | K-1 demands
        Design::Dcml => context_dim + k + (k - 1),
        // context | K-1 prices | K-1 demands (query price hidden)
        Design::Meta => context_dim + (k - 1) + (k - 1),
    }
}

impl MaskedInfoSet {
    /// Flatten to a fixed-length input vector.
    ///
    /// Layout: context, then prices (META omits the final price), then the
    /// design's demand slots in index order. DCMOML writes every demand
    /// slot as a `(value, flag)` pair with sentinel 0 and flag 0 when
    /// masked; the other designs have fixed visibility so no flags are
    /// needed. DCUOML appends the unindexed demand at the very end (a
    /// documented convention).
    pub fn to_features(&self) -> Vec<f64> {
        let k = self.prices.len();
        let mut out = Vec::with_capacity(feature_len(self.design, k, self.context.len()));
        out.extend_from_slice(&self.context);
        match self.design {
            Design::Meta => out.extend_from_slice(&self.prices[..k - 1]),
            _ => out.extend_from_slice(&self.prices),
        }
        match self.design {
            Design::Dcmoml => {
                let mut visible = self.visible_demands.iter().peekable();
                for j in 0..k {
                    if visible.peek().is_some_and(|(i, _)| *i == j) {
                        let (_, d) = visible.next().unwrap();
                        out.push(*d);
                        out.push(1.0);
                    } else {
                        out.push(0.0);
                        out.push(0.0);
                    }
                }
            }
            Design::Dcuoml => {
                for &(_, d) in &self.visible_demands {
                    out.push(d);
                }
                out.push(self.unindexed_demand.expect("DCUOML carries the unindexed demand"));
            }
            Design::Dcml | Design::Meta => {
                for &(_, d) in &self.visible_demands {
                    out.push(d);
                }
            }
        }
        debug_assert_eq!(out.len(), feature_len(self.design, k, self.context.len()));
        out
    }
}
