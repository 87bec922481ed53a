//! Training energy cost and cluster power capacity.

use serde::{Deserialize, Serialize};

/// Inputs to the energy cost formula for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Electricity price in the model's publication year, USD/kWh.
    pub energy_cost_rate: f64,
    /// Server TDP divided over its chips, kW.
    pub server_tdp_per_chip_kw: f64,
    /// Average power drawn during training over TDP.
    pub power_to_tdp_ratio: f64,
    /// Data center power usage effectiveness.
    pub pue: f64,
}

/// Total energy cost of a training run:
/// rate x TDP x power ratio x PUE x chip-hours.
pub fn energy_cost(chip_hours: f64, params: &EnergyParams) -> f64 {
    params.energy_cost_rate
        * params.server_tdp_per_chip_kw
        * params.power_to_tdp_ratio
        * params.pue
        * chip_hours
}

/// Power capacity the training cluster needs, in kW:
/// quantity x server TDP per chip x PUE.
pub fn cluster_power_capacity_kw(
    hardware_quantity: u64,
    server_tdp_per_chip_kw: f64,
    pue: f64,
) -> f64 {
    hardware_quantity as f64 * server_tdp_per_chip_kw * pue
}
