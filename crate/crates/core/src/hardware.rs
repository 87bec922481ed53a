//! Hardware acquisition cost per chip and per cluster, TPU production cost
//! imputation, and amortization of hardware value over a training run.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{HardwareSpec, PriceKind, PriceRecord};
use crate::dates::{years_between, AMORTIZATION_HOURS_PER_YEAR, DAYS_PER_YEAR};
use crate::error::{Error, Result};

const LN10: f64 = std::f64::consts::LN_10;

/// Multipliers that scale a bare chip price up to its share of a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFactors {
    /// Per-hardware ratio of (server cost / chips) to single-chip price.
    pub chip_to_server: BTreeMap<String, f64>,
    /// Mean of the known ratios, used for everything else.
    pub default_chip_to_server: f64,
    /// Share of cluster cost going to server-to-server networking.
    pub interconnect_fraction: f64,
}

impl Default for CostFactors {
    fn default() -> Self {
        let mut chip_to_server = BTreeMap::new();
        chip_to_server.insert("P100".to_string(), 1.54);
        chip_to_server.insert("V100".to_string(), 1.69);
        chip_to_server.insert("A100".to_string(), 1.66);
        CostFactors {
            chip_to_server,
            default_chip_to_server: 1.64,
            interconnect_fraction: 0.19,
        }
    }
}

impl CostFactors {
    pub fn chip_to_server_for(&self, hardware: &str) -> f64 {
        self.chip_to_server
            .get(hardware)
            .copied()
            .unwrap_or(self.default_chip_to_server)
    }

    /// Markup covering cluster-level interconnect: 1 / (1 - fraction).
    pub fn server_to_cluster(&self) -> f64 {
        1.0 / (1.0 - self.interconnect_fraction)
    }
}

/// Inputs for imputing the production cost of one TPU version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpuCostInputs {
    /// Release or announcement date (year-only dates pinned to July 1).
    pub release_date: NaiveDate,
    /// Peak performance relative to the reference GPU at the same format.
    pub performance_ratio: f64,
    /// Estimated sale price of a performance-equivalent GPU, USD.
    pub equivalent_gpu_price: f64,
}

/// Reference-GPU constants and the per-version TPU table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpuCostModel {
    /// Server manufacturing cost per reference GPU (H100 class), USD.
    pub reference_server_cost_per_chip: f64,
    /// Bare-chip manufacturing cost of the reference GPU, USD.
    pub reference_chip_cost: f64,
    pub reference_release_date: NaiveDate,
    pub entries: BTreeMap<String, TpuCostInputs>,
}

impl Default for TpuCostModel {
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        let mut entries = BTreeMap::new();
        // Performance ratios are unrounded spec ratios at matching number
        // formats; equivalent-GPU prices are interpolated from the GPU
        // price-performance table.
        entries.insert(
            "TPU v1".to_string(),
            TpuCostInputs {
                release_date: d(2015, 5, 20),
                performance_ratio: 0.0465,
                equivalent_gpu_price: 11_263.0,
            },
        );
        entries.insert(
            "TPU v2".to_string(),
            TpuCostInputs {
                release_date: d(2017, 7, 1),
                performance_ratio: 0.0910,
                equivalent_gpu_price: 9_752.0,
            },
        );
        entries.insert(
            "TPU v3".to_string(),
            TpuCostInputs {
                release_date: d(2018, 7, 1),
                performance_ratio: 0.1243,
                equivalent_gpu_price: 10_742.0,
            },
        );
        entries.insert(
            "TPU v4".to_string(),
            TpuCostInputs {
                release_date: d(2021, 7, 1),
                performance_ratio: 0.2784,
                equivalent_gpu_price: 12_119.0,
            },
        );
        TpuCostModel {
            reference_server_cost_per_chip: 8_665.0,
            reference_chip_cost: 5_346.0,
            reference_release_date: d(2022, 9, 21),
            entries,
        }
    }
}

/// Component breakdown of a TPU production-cost estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpuCostEstimate {
    pub date_adjustment_factor: f64,
    /// Low-end estimate: manufacturing cost scaled from the reference GPU.
    pub server_manufacturing_cost: f64,
    /// Server cost scaled down to the bare chip.
    pub chip_manufacturing_cost: f64,
    /// High-end estimate: price of a performance-equivalent GPU.
    pub equivalent_gpu_price: f64,
    /// Geometric mean of the chip manufacturing cost and equivalent price.
    pub production_cost: f64,
}

/// Price-performance date adjustment: 10^(r * years(reference - target)).
/// Greater than 1 when the target predates the reference.
pub fn date_adjustment_factor(reference: NaiveDate, target: NaiveDate, r: f64) -> f64 {
    10f64.powf(r * years_between(target, reference))
}

/// Production cost of one TPU version: manufacturing cost interpolated from
/// the reference GPU by performance and date, aggregated with the
/// equivalent-GPU price by geometric mean.
pub fn tpu_production_cost(
    model: &TpuCostModel,
    inputs: &TpuCostInputs,
    r: f64,
) -> TpuCostEstimate {
    let factor = date_adjustment_factor(model.reference_release_date, inputs.release_date, r);
    let server = model.reference_server_cost_per_chip * inputs.performance_ratio * factor;
    let chip = server * (model.reference_chip_cost / model.reference_server_cost_per_chip);
    let production = (chip * inputs.equivalent_gpu_price).sqrt();
    TpuCostEstimate {
        date_adjustment_factor: factor,
        server_manufacturing_cost: server,
        chip_manufacturing_cost: chip,
        equivalent_gpu_price: inputs.equivalent_gpu_price,
        production_cost: production,
    }
}

/// How the per-chip acquisition cost was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PricePath {
    /// Single-chip purchase price.
    ChipPrice { price_usd: f64, price_date: NaiveDate },
    /// Server purchase price divided over its chips.
    ServerPrice {
        price_usd: f64,
        price_date: NaiveDate,
        chips_per_server: u32,
    },
    /// Imputed TPU production cost (no sale prices exist).
    TpuProduction(TpuCostEstimate),
}

/// Earliest purchase price for a hardware type; ties broken by lowest price.
pub fn best_purchase_price<'a>(
    prices: &'a [PriceRecord],
    hardware: &str,
) -> Option<&'a PriceRecord> {
    prices
        .iter()
        .filter(|p| {
            p.hardware_type == hardware
                && matches!(p.kind, PriceKind::ChipPurchase | PriceKind::ServerPurchase)
        })
        .min_by(|a, b| {
            (a.price_date, a.price_usd)
                .partial_cmp(&(b.price_date, b.price_usd))
                .expect("prices are finite")
        })
}

/// Acquisition cost per chip including server overhead and cluster
/// interconnect, from whichever price path applies.
pub fn acquisition_cost_per_chip(
    hardware: &str,
    path: &PricePath,
    factors: &CostFactors,
) -> f64 {
    let cluster = factors.server_to_cluster();
    match path {
        PricePath::ChipPrice { price_usd, .. } => {
            price_usd * factors.chip_to_server_for(hardware) * cluster
        }
        PricePath::ServerPrice {
            price_usd,
            chips_per_server,
            ..
        } => price_usd / *chips_per_server as f64 * cluster,
        PricePath::TpuProduction(est) => {
            est.production_cost * factors.chip_to_server_for(hardware) * cluster
        }
    }
}

/// Resolve the price path for a hardware type: earliest purchase price for
/// GPUs, imputed production cost for TPUs.
pub fn resolve_price_path(
    spec: &HardwareSpec,
    prices: &[PriceRecord],
    tpu_model: &TpuCostModel,
    r: f64,
) -> Result<PricePath> {
    if let Some(rec) = best_purchase_price(prices, &spec.name) {
        return Ok(match rec.kind {
            PriceKind::ChipPurchase => PricePath::ChipPrice {
                price_usd: rec.price_usd,
                price_date: rec.price_date,
            },
            PriceKind::ServerPurchase => PricePath::ServerPrice {
                price_usd: rec.price_usd,
                price_date: rec.price_date,
                chips_per_server: spec.chips_per_server,
            },
            PriceKind::CloudHourly => unreachable!("filtered to purchases"),
        });
    }
    if let Some(inputs) = tpu_model.entries.get(&spec.name) {
        return Ok(PricePath::TpuProduction(tpu_production_cost(
            tpu_model, inputs, r,
        )));
    }
    Err(Error::NoPricePath(spec.name.clone()))
}

/// Total up-front cost: per-chip acquisition cost times chips.
pub fn hardware_acquisition_cost(per_chip_usd: f64, hardware_quantity: u64) -> f64 {
    per_chip_usd * hardware_quantity as f64
}

/// Hardware value after depreciating from `delta_years` of price-performance
/// progress: cost / 10^(r * delta).
pub fn start_value_from_delta_years(acquisition_cost: f64, delta_years: f64, r: f64) -> f64 {
    acquisition_cost / 10f64.powf(r * delta_years)
}

/// Start value per chip at the training start date. Training starts before
/// the availability date clamp the depreciation span to zero; the flag
/// reports the clamp so callers can warn.
pub fn start_value_per_chip(
    acquisition_cost: f64,
    acquisition_date: NaiveDate,
    training_start: NaiveDate,
    r: f64,
) -> (f64, bool) {
    let delta = years_between(acquisition_date, training_start);
    if delta < 0.0 {
        (acquisition_cost, true)
    } else {
        (start_value_from_delta_years(acquisition_cost, delta, r), false)
    }
}

/// Linear amortized cost of a training run:
/// start value x chip-hours / (365 x 24) x r ln 10.
pub fn amortized_training_cost(start_value: f64, chip_hours: f64, r: f64) -> f64 {
    start_value * chip_hours / AMORTIZATION_HOURS_PER_YEAR * r * LN10
}

/// Exact exponential amortization over a known training time:
/// start value x chips x (1 - 10^(-r t)).
pub fn amortized_training_cost_exact(
    start_value: f64,
    n_chips: u64,
    training_time_years: f64,
    r: f64,
) -> f64 {
    start_value * n_chips as f64 * (1.0 - 10f64.powf(-r * training_time_years))
}

/// Expected hardware lifetime, in years, if every observed failure were
/// catastrophic: cluster size / failure rate, in weeks.
pub fn expected_lifetime_from_failures(cluster_size: u64, failures_per_week: f64) -> f64 {
    cluster_size as f64 / failures_per_week * 7.0 / DAYS_PER_YEAR
}
