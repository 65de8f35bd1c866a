use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use demand_core::TaskPanel;
use serde::{Deserialize, Serialize};

use crate::features::FeatureSource;
use crate::records::{TransactionRecord, PRICE_TICKS_PER_UNIT};
use crate::RetailError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    StaticTop3,
    ExposureSequence,
}

/// One price exposure: a maximal stretch of days at a single posted price.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureRun {
    pub price_ticks: i64,
    pub exposure_days: u32,
    pub avg_daily_demand: f64,
}

/// A supervised point: (price, demand, exposure weight).
pub type PricePoint = (f64, f64, u32);

#[derive(Debug, Clone, PartialEq)]
pub struct RetailTask {
    pub product_id: String,
    pub features: Vec<f64>,
    pub train_points: Vec<PricePoint>,
    pub holdout_point: PricePoint,
    pub task_kind: TaskKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub products_seen: usize,
    pub tasks_built: usize,
    /// Products without enough distinct prices / runs.
    pub dropped_products: usize,
}

fn ticks_to_price(ticks: i64) -> f64 {
    ticks as f64 / PRICE_TICKS_PER_UNIT as f64
}

/// (product -> day -> price -> quantity), ordered deterministically.
type DailyLedger = BTreeMap<String, BTreeMap<NaiveDate, BTreeMap<i64, i64>>>;

fn daily_ledger(records: &[TransactionRecord]) -> (DailyLedger, BTreeMap<String, String>) {
    let mut ledger: DailyLedger = BTreeMap::new();
    let mut descriptions: BTreeMap<String, String> = BTreeMap::new();
    for r in records {
        *ledger
            .entry(r.stock_code.clone())
            .or_default()
            .entry(r.day())
            .or_default()
            .entry(r.unit_price_ticks)
            .or_default() += r.quantity;
        // Keep the longest description seen for the product (some rows
        // carry blanks).
        let entry = descriptions.entry(r.stock_code.clone()).or_default();
        if r.description.len() > entry.len() {
            *entry = r.description.clone();
        }
    }
    (ledger, descriptions)
}

/// Static top-3 tasks: per product, average daily demand at each price
/// level (frequency = number of transaction days at that price); the two
/// most frequent price levels train, the third is held out. Ties break by
/// larger total quantity, then lower price. Products with fewer than
/// three distinct prices are dropped.
pub fn build_static_top3(
    records: &[TransactionRecord],
    features: &FeatureSource,
) -> (Vec<RetailTask>, BuildStats) {
    let (ledger, descriptions) = daily_ledger(records);
    let mut stats = BuildStats::default();
    let mut tasks = Vec::new();
    for (product, days) in &ledger {
        stats.products_seen += 1;
        // price -> (day count, total quantity)
        let mut per_price: BTreeMap<i64, (u32, i64)> = BTreeMap::new();
        for prices in days.values() {
            for (&ticks, &qty) in prices {
                let e = per_price.entry(ticks).or_default();
                e.0 += 1;
                e.1 += qty;
            }
        }
        if per_price.len() < 3 {
            stats.dropped_products += 1;
            continue;
        }
        let mut ranked: Vec<(i64, u32, i64)> = per_price
            .iter()
            .map(|(&ticks, &(d, q))| (ticks, d, q))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.cmp(&a.1) // more observed days first
                .then(b.2.cmp(&a.2)) // then larger total quantity
                .then(a.0.cmp(&b.0)) // then lower price
        });
        let point = |(ticks, day_count, qty): (i64, u32, i64)| -> PricePoint {
            (
                ticks_to_price(ticks),
                qty as f64 / day_count as f64,
                day_count,
            )
        };
        tasks.push(RetailTask {
            product_id: product.clone(),
            features: features.features_for(product, descriptions.get(product).map_or("", |s| s)),
            train_points: vec![point(ranked[0]), point(ranked[1])],
            holdout_point: point(ranked[2]),
            task_kind: TaskKind::StaticTop3,
        });
        stats.tasks_built += 1;
    }
    (tasks, stats)
}

/// Run-length encode one product's daily series into price exposures.
///
/// The posted price of a day is the level with the largest quantity that
/// day (ties to the lower price); the day's demand is its total quantity.
/// A run extends while the posted price repeats; calendar gaps of at most
/// `max_bridge_days` missing days are bridged (they count as exposure
/// days with zero demand), longer gaps contribute no exposure. Runs end
/// only at price changes, so consecutive runs always differ in price.
pub fn encode_exposure_runs(
    days: &BTreeMap<NaiveDate, BTreeMap<i64, i64>>,
    max_bridge_days: u32,
) -> Vec<ExposureRun> {
    let mut runs: Vec<ExposureRun> = Vec::new();
    let mut cur: Option<(i64, u32, i64, NaiveDate)> = None; // (price, days, qty, last day)
    for (&day, prices) in days {
        let posted = prices
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&ticks, _)| ticks)
            .expect("non-empty day");
        let day_qty: i64 = prices.values().sum();
        match cur.as_mut() {
            Some((price, exp_days, qty, last)) if *price == posted => {
                let gap = (day - *last).num_days() as u32;
                let missing = gap.saturating_sub(1);
                *exp_days += if missing <= max_bridge_days { gap } else { 1 };
                *qty += day_qty;
                *last = day;
            }
            _ => {
                if let Some((price, exp_days, qty, _)) = cur.take() {
                    runs.push(ExposureRun {
                        price_ticks: price,
                        exposure_days: exp_days,
                        avg_daily_demand: qty as f64 / exp_days as f64,
                    });
                }
                cur = Some((posted, 1, day_qty, day));
            }
        }
    }
    if let Some((price, exp_days, qty, _)) = cur {
        runs.push(ExposureRun {
            price_ticks: price,
            exposure_days: exp_days,
            avg_daily_demand: qty as f64 / exp_days as f64,
        });
    }
    runs
}

/// Exposure-sequence tasks: the first `k` runs train, run `k+1` is held
/// out; products with fewer than `k + 1` runs are dropped.
pub fn build_exposure_sequence(
    records: &[TransactionRecord],
    k: usize,
    features: &FeatureSource,
    max_bridge_days: u32,
) -> (Vec<RetailTask>, BuildStats) {
    let (ledger, descriptions) = daily_ledger(records);
    let mut stats = BuildStats::default();
    let mut tasks = Vec::new();
    for (product, days) in &ledger {
        stats.products_seen += 1;
        let runs = encode_exposure_runs(days, max_bridge_days);
        if runs.len() < k + 1 {
            stats.dropped_products += 1;
            continue;
        }
        let point = |r: &ExposureRun| -> PricePoint {
            (
                ticks_to_price(r.price_ticks),
                r.avg_daily_demand,
                r.exposure_days,
            )
        };
        tasks.push(RetailTask {
            product_id: product.clone(),
            features: features.features_for(product, descriptions.get(product).map_or("", |s| s)),
            train_points: runs[..k].iter().map(point).collect(),
            holdout_point: point(&runs[k]),
            task_kind: TaskKind::ExposureSequence,
        });
        stats.tasks_built += 1;
    }
    (tasks, stats)
}

/// Convert a retail task to the shared panel schema: the train points
/// followed by the holdout as the final observation, exposure lengths
/// attached.
pub fn retail_task_to_panel(task: &RetailTask, task_id: u64) -> TaskPanel {
    let mut prices: Vec<f64> = task.train_points.iter().map(|p| p.0).collect();
    let mut demands: Vec<f64> = task.train_points.iter().map(|p| p.1).collect();
    let mut exposures: Vec<u32> = task.train_points.iter().map(|p| p.2).collect();
    prices.push(task.holdout_point.0);
    demands.push(task.holdout_point.1);
    exposures.push(task.holdout_point.2);
    TaskPanel {
        task_id,
        context: task.features.clone(),
        prices,
        demands,
        exposures: Some(exposures),
        true_params: None,
    }
}

/// Corpus-level descriptive statistics of a cleaned transaction log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub n_products: usize,
    /// Products with at least three distinct posted prices.
    pub retained_three_plus: usize,
    /// Mean number of distinct prices per product.
    pub mean_distinct_prices: f64,
    /// Mean share of a product's observed days spent at its modal price.
    pub modal_day_share: f64,
}

pub fn corpus_stats(records: &[TransactionRecord]) -> CorpusStats {
    let (ledger, _) = daily_ledger(records);
    let mut retained = 0usize;
    let mut distinct_sum = 0.0;
    let mut share_sum = 0.0;
    for days in ledger.values() {
        let mut price_days: BTreeMap<i64, u32> = BTreeMap::new();
        for prices in days.values() {
            for &ticks in prices.keys() {
                *price_days.entry(ticks).or_default() += 1;
            }
        }
        if price_days.len() >= 3 {
            retained += 1;
        }
        distinct_sum += price_days.len() as f64;
        let modal = price_days.values().copied().max().unwrap_or(0);
        share_sum += modal as f64 / days.len() as f64;
    }
    let n = ledger.len();
    CorpusStats {
        n_products: n,
        retained_three_plus: retained,
        mean_distinct_prices: distinct_sum / n.max(1) as f64,
        modal_day_share: share_sum / n.max(1) as f64,
    }
}

/// Features sidecar: `task_id,product_id,f_0..f_{d-1}`.
pub fn write_features_csv<W: Write>(tasks: &[RetailTask], writer: W) -> Result<(), RetailError> {
    let mut w = csv::Writer::from_writer(writer);
    let dim = tasks.first().map_or(0, |t| t.features.len());
    let mut header = vec!["task_id".to_string(), "product_id".to_string()];
    header.extend((0..dim).map(|j| format!("f_{j}")));
    w.write_record(&header)?;
    for (i, task) in tasks.iter().enumerate() {
        let mut rec = vec![i.to_string(), task.product_id.clone()];
        rec.extend(task.features.iter().map(|v| format!("{v}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
