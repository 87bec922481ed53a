//! Domain records for models, hardware, prices, and economic tables, plus
//! the defaulting rules that derive chip-hours and training start dates.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dates::hours_to_days;
use crate::error::{Error, Result};

/// One ML model's training facts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub publication_date: NaiveDate,
    pub developer: String,
    /// Training compute of the final run, in FLOP.
    pub training_compute: f64,
    /// Key into the hardware spec table.
    pub hardware_type: String,
    pub hardware_quantity: Option<u64>,
    /// Wall-clock training time in hours.
    pub training_time_hours: Option<f64>,
    /// Recorded chip-hours; wins over any derivation.
    pub training_chip_hours: Option<f64>,
    /// Hardware utilization during training, in (0, 1].
    pub utilization: Option<f64>,
    pub known_training_start: Option<NaiveDate>,
    /// Set when this row is a fine-tuned version of another listed model.
    pub finetune_parent: Option<String>,
}

/// Accelerator kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HardwareKind {
    Gpu,
    Tpu,
}

/// Per-accelerator technical data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareSpec {
    pub name: String,
    pub manufacturer: String,
    pub kind: HardwareKind,
    pub release_date: NaiveDate,
    /// Peak throughput in FLOP/s at `number_format`.
    pub peak_performance_flops: f64,
    pub number_format: String,
    /// Thermal design power of the bare chip, kW.
    pub tdp_chip_kw: f64,
    /// Server TDP divided by the number of chips, kW.
    pub tdp_server_per_chip_kw: f64,
    pub chips_per_server: u32,
    /// Informational only.
    pub memory_gb: f64,
}

/// What a price record is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceKind {
    ChipPurchase,
    ServerPurchase,
    CloudHourly,
}

/// Rental commitment length for cloud prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Commitment {
    #[serde(rename = "on_demand")]
    OnDemand,
    #[serde(rename = "1yr")]
    OneYear,
    #[serde(rename = "3yr")]
    ThreeYear,
}

/// A dated hardware purchase or cloud rental price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRecord {
    pub hardware_type: String,
    /// Manufacturer, reseller, or cloud provider.
    pub vendor: String,
    pub price_date: NaiveDate,
    pub price_usd: f64,
    pub kind: PriceKind,
    /// Present iff `kind` is `CloudHourly`.
    pub commitment: Option<Commitment>,
}

/// Economic lookup tables: electricity prices, PUE, and power-to-TDP ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicTables {
    /// Average industrial electricity price, USD/kWh, by year.
    pub electricity_price_by_year: BTreeMap<i32, f64>,
    /// Developer -> data center PUE; hyperscalers get 1.1.
    pub pue_by_developer: BTreeMap<String, f64>,
    pub default_pue: f64,
    /// Manufacturer -> average power draw over TDP during training.
    pub power_ratio_by_manufacturer: BTreeMap<String, f64>,
    pub default_power_ratio: f64,
}

impl Default for EconomicTables {
    fn default() -> Self {
        EconomicTables {
            electricity_price_by_year: BTreeMap::new(),
            pue_by_developer: BTreeMap::new(),
            default_pue: 1.25,
            power_ratio_by_manufacturer: BTreeMap::new(),
            default_power_ratio: 0.75,
        }
    }
}

impl EconomicTables {
    /// PUE for a developer, defaulting for anyone not in the table.
    pub fn pue(&self, developer: &str) -> f64 {
        self.pue_by_developer
            .get(developer)
            .copied()
            .unwrap_or(self.default_pue)
    }

    /// Power-to-TDP ratio by hardware manufacturer.
    pub fn power_ratio(&self, manufacturer: &str) -> f64 {
        self.power_ratio_by_manufacturer
            .get(manufacturer)
            .copied()
            .unwrap_or(self.default_power_ratio)
    }

    /// Electricity price for a year, falling back to the nearest listed year.
    /// Returns the price and whether a fallback happened.
    pub fn electricity_price(&self, year: i32) -> Option<(f64, bool)> {
        if let Some(p) = self.electricity_price_by_year.get(&year) {
            return Some((*p, false));
        }
        self.electricity_price_by_year
            .iter()
            .min_by_key(|(y, _)| ((**y - year).abs(), **y))
            .map(|(_, p)| (*p, true))
    }
}

/// Validated dataset bundle; read-only after load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub models: Vec<ModelRecord>,
    pub specs: BTreeMap<String, HardwareSpec>,
    pub prices: Vec<PriceRecord>,
    pub econ: EconomicTables,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset {
            models: Vec::new(),
            specs: BTreeMap::new(),
            prices: Vec::new(),
            econ: EconomicTables::default(),
        }
    }
}

impl Dataset {
    /// Spec row for a hardware type.
    pub fn spec_for(&self, hardware: &str) -> Result<&HardwareSpec> {
        self.specs
            .get(hardware)
            .ok_or_else(|| Error::UnknownHardware(hardware.to_string()))
    }

    pub fn model(&self, name: &str) -> Option<&ModelRecord> {
        self.models.iter().find(|m| m.name == name)
    }
}

/// Reasons a model row fails its invariants; empty means valid.
pub fn model_row_violations(model: &ModelRecord) -> Vec<String> {
    let mut out = Vec::new();
    if model.name.trim().is_empty() {
        out.push("name empty".to_string());
    }
    if !(model.training_compute > 0.0) {
        out.push("training_compute must be > 0".to_string());
    }
    if let Some(u) = model.utilization {
        if !(u > 0.0 && u <= 1.0) {
            out.push("utilization out of (0,1]".to_string());
        }
    }
    if let Some(t) = model.training_time_hours {
        if t < 0.0 {
            out.push("training_time_hours negative".to_string());
        }
    }
    if let Some(ch) = model.training_chip_hours {
        if ch < 0.0 {
            out.push("training_chip_hours negative".to_string());
        }
    }
    let has_path = model.training_chip_hours.is_some()
        || (model.training_time_hours.is_some() && model.hardware_quantity.is_some())
        || (model.training_compute > 0.0 && !model.hardware_type.trim().is_empty());
    if !has_path {
        out.push("no chip-hour derivation path".to_string());
    }
    out
}

/// Reasons a hardware spec row fails its invariants.
pub fn spec_row_violations(spec: &HardwareSpec) -> Vec<String> {
    let mut out = Vec::new();
    if !(spec.peak_performance_flops > 0.0) {
        out.push("peak_performance must be > 0".to_string());
    }
    if spec.tdp_server_per_chip_kw < spec.tdp_chip_kw {
        out.push("tdp_server_per_chip below tdp_chip".to_string());
    }
    if spec.chips_per_server < 1 {
        out.push("chips_per_server must be >= 1".to_string());
    }
    out
}

/// Reasons a price row fails its invariants.
pub fn price_row_violations(price: &PriceRecord) -> Vec<String> {
    let mut out = Vec::new();
    if !(price.price_usd > 0.0) {
        out.push("price must be > 0".to_string());
    }
    match (price.kind, price.commitment) {
        (PriceKind::CloudHourly, None) => {
            out.push("cloud_hourly price missing commitment".to_string())
        }
        (PriceKind::ChipPurchase | PriceKind::ServerPurchase, Some(_)) => {
            out.push("purchase price must not carry a commitment".to_string())
        }
        _ => {}
    }
    out
}

/// Chip-hours for a training run, by the first available route:
/// recorded value, time x quantity, or compute / (peak x utilization).
pub fn derive_chip_hours(
    model: &ModelRecord,
    spec: Option<&HardwareSpec>,
    default_utilization: f64,
) -> Result<f64> {
    if let Some(ch) = model.training_chip_hours {
        return Ok(ch);
    }
    if let (Some(hours), Some(qty)) = (model.training_time_hours, model.hardware_quantity) {
        return Ok(hours * qty as f64);
    }
    if model.training_compute > 0.0 {
        if let Some(spec) = spec {
            let util = model.utilization.unwrap_or(default_utilization);
            let achieved = spec.peak_performance_flops * util;
            if achieved > 0.0 {
                return Ok(model.training_compute / achieved / 3600.0);
            }
        }
    }
    Err(Error::Underdetermined {
        model: model.name.clone(),
        reason: "no chip-hours, no time x quantity, and no usable compute/performance route"
            .to_string(),
    })
}

/// Training start date: the recorded start if known, otherwise
/// publication date minus training time minus a buffer (default 60 days)
/// for evaluation and writing. Unknown training times fall back to the
/// dataset median (about 33 days).
pub fn infer_training_start(
    model: &ModelRecord,
    median_training_time_hours: f64,
    start_buffer_days: i64,
) -> NaiveDate {
    if let Some(start) = model.known_training_start {
        return start;
    }
    let hours = model
        .training_time_hours
        .unwrap_or(median_training_time_hours);
    model.publication_date
        - chrono::Duration::days(hours_to_days(hours))
        - chrono::Duration::days(start_buffer_days)
}
