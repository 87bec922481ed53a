//! Total amortized model development cost: final-run compute scaled by a
//! development multiplier, plus R&D staff compensation, via Monte Carlo
//! sampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{credible_interval_90, stream_rng, IntervalDistribution, CHUNK};

/// 90% CI of the development-compute multiplier (total / final run).
pub const DEV_COMPUTE_MULTIPLIER_CI: (f64, f64) = (1.2, 4.0);

/// One contributor group sharing an FTE distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaffRole {
    pub name: String,
    pub count: u64,
    /// Full-time-equivalent workload per contributor.
    pub fte: IntervalDistribution,
}

/// Staff-cost model for one case-study model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaffModel {
    pub roles: Vec<StaffRole>,
    pub base_salary: IntervalDistribution,
    pub equity: IntervalDistribution,
    /// Taxes-and-benefits overhead on base salary.
    pub salary_overhead: IntervalDistribution,
    /// Development span from first experiments to publication, years.
    pub development_duration_years: IntervalDistribution,
    pub include_equity: bool,
}

impl StaffModel {
    /// Generic model: one role with the default 5%-80% FTE interval.
    pub fn generic(contributor_count: u64, duration_ci: (f64, f64)) -> Result<Self> {
        Ok(StaffModel {
            roles: vec![StaffRole {
                name: "contributors".to_string(),
                count: contributor_count,
                fte: IntervalDistribution::log_normal(0.05, 0.80)?,
            }],
            base_salary: IntervalDistribution::log_normal(140_000.0, 160_000.0)?,
            equity: IntervalDistribution::log_normal(35_000.0, 490_000.0)?,
            salary_overhead: IntervalDistribution::log_normal(1.25, 1.40)?,
            development_duration_years: IntervalDistribution::log_normal(
                duration_ci.0,
                duration_ci.1,
            )?,
            include_equity: true,
        })
    }

    pub fn contributor_count(&self) -> u64 {
        self.roles.iter().map(|r| r.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.contributor_count() < 1 {
            return Err(Error::InvalidConfig(
                "staff model needs at least one contributor".to_string(),
            ));
        }
        for role in &self.roles {
            role.fte.validate()?;
        }
        self.base_salary.validate()?;
        self.equity.validate()?;
        self.salary_overhead.validate()?;
        self.development_duration_years.validate()?;
        Ok(())
    }
}

/// Salary and equity parts of one staff-cost draw, USD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaffDraw {
    pub salary: f64,
    pub equity: f64,
}

/// One draw of the development-compute multiplier (log-normal, CI 1.2-4).
pub fn sample_dev_compute_multiplier<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    let dist = IntervalDistribution::log_normal(
        DEV_COMPUTE_MULTIPLIER_CI.0,
        DEV_COMPUTE_MULTIPLIER_CI.1,
    )
    .expect("constant CI is valid");
    dist.sample(rng)
}

/// One staff-cost draw: sum over contributors of
/// FTE x (salary x overhead [+ equity]) x duration.
///
/// FTE, salary, overhead, and equity are drawn independently per
/// contributor; the development duration is drawn once. Equity is always
/// sampled so toggling `include_equity` leaves the salary path unchanged.
pub fn sample_staff_cost<R: rand::Rng + ?Sized>(staff: &StaffModel, rng: &mut R) -> StaffDraw {
    let duration = staff.development_duration_years.sample(rng);
    let mut salary_total = 0.0;
    let mut equity_total = 0.0;
    for role in &staff.roles {
        for _ in 0..role.count {
            let fte = role.fte.sample(rng);
            let salary = staff.base_salary.sample(rng);
            let overhead = staff.salary_overhead.sample(rng);
            let equity = staff.equity.sample(rng);
            salary_total += fte * salary * overhead * duration;
            equity_total += fte * equity * duration;
        }
    }
    StaffDraw {
        salary: salary_total,
        equity: equity_total,
    }
}

/// Median plus 90% credible interval of a sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleEstimate {
    pub p5: f64,
    pub median: f64,
    pub p95: f64,
}

impl CredibleEstimate {
    fn from_samples(samples: &[f64]) -> Self {
        let (p5, median, p95) = credible_interval_90(samples);
        CredibleEstimate { p5, median, p95 }
    }
}

/// Per-component share of the median total; sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentFractions {
    pub hardware: f64,
    pub energy: f64,
    pub staff_salary: f64,
    pub staff_equity: f64,
}

/// Method-tagged development-cost result with component breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevCostBreakdown {
    pub model: String,
    pub hardware_amortized: CredibleEstimate,
    pub energy: CredibleEstimate,
    pub staff_salary: CredibleEstimate,
    pub staff_equity: CredibleEstimate,
    pub total: CredibleEstimate,
    /// Shares of the median total, from component medians.
    pub fractions: ComponentFractions,
    pub include_equity: bool,
    pub n_samples: usize,
}

/// Deterministic final-run costs the simulation scales up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalRunCosts {
    pub amortized_hardware_usd: f64,
    pub energy_usd: f64,
}

/// Full development-cost simulation for one model. Per draw, the dev
/// multiplier scales the final-run hardware and energy costs (both linear
/// in chip-hours) and a staff draw is added. Chunked seed-derived streams
/// make the output identical at any worker count.
pub fn total_dev_cost(
    model_name: &str,
    final_run: FinalRunCosts,
    staff: &StaffModel,
    n_samples: usize,
    seed: u64,
) -> Result<DevCostBreakdown> {
    if n_samples < 1000 {
        return Err(Error::InvalidConfig(format!(
            "dev-cost simulation needs at least 1000 samples, got {n_samples}"
        )));
    }
    staff.validate()?;
    let task = format!("devcost/{model_name}");
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<[f64; 4]>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, &task, chunk as u64);
            let count = CHUNK.min(n_samples - chunk * CHUNK);
            (0..count)
                .map(|_| {
                    let multiplier = sample_dev_compute_multiplier(&mut rng);
                    let draw = sample_staff_cost(staff, &mut rng);
                    [
                        final_run.amortized_hardware_usd * multiplier,
                        final_run.energy_usd * multiplier,
                        draw.salary,
                        draw.equity,
                    ]
                })
                .collect()
        })
        .collect();

    let mut hardware = Vec::with_capacity(n_samples);
    let mut energy = Vec::with_capacity(n_samples);
    let mut salary = Vec::with_capacity(n_samples);
    let mut equity = Vec::with_capacity(n_samples);
    let mut total = Vec::with_capacity(n_samples);
    for chunk in chunks {
        for [h, e, s, q] in chunk {
            let eq = if staff.include_equity { q } else { 0.0 };
            hardware.push(h);
            energy.push(e);
            salary.push(s);
            equity.push(eq);
            total.push(h + e + s + eq);
        }
    }

    let hardware_est = CredibleEstimate::from_samples(&hardware);
    let energy_est = CredibleEstimate::from_samples(&energy);
    let salary_est = CredibleEstimate::from_samples(&salary);
    let equity_est = CredibleEstimate::from_samples(&equity);
    let median_sum =
        hardware_est.median + energy_est.median + salary_est.median + equity_est.median;
    let share = |m: f64| if median_sum > 0.0 { m / median_sum } else { 0.0 };
    Ok(DevCostBreakdown {
        model: model_name.to_string(),
        hardware_amortized: hardware_est,
        energy: energy_est,
        staff_salary: salary_est,
        staff_equity: equity_est,
        total: CredibleEstimate::from_samples(&total),
        fractions: ComponentFractions {
            hardware: share(hardware_est.median),
            energy: share(energy_est.median),
            staff_salary: share(salary_est.median),
            staff_equity: share(equity_est.median),
        },
        include_equity: staff.include_equity,
        n_samples,
    })
}
