//! Log-linear cost trends: OLS fits with Student-t confidence intervals,
//! growth-rate conversions, autocorrelation-robust slope comparison, and
//! forward/inverse extrapolation.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dates::{add_years, fractional_year, years_between};
use crate::error::{Error, Result};

/// Result of a log10(cost) vs time regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    /// Slope in orders of magnitude per year.
    pub slope_oom_per_year: f64,
    /// log10 cost at the 1970-01-01 epoch.
    pub intercept_log10: f64,
    /// 90% CI for the slope from OLS standard errors (Student-t, n-2 dof).
    pub slope_ci_90: (f64, f64),
    pub slope_se: f64,
    pub r_squared: f64,
    pub n: usize,
    /// Fitted x values (fractional years), sorted ascending.
    pub xs: Vec<f64>,
    /// Residuals in the same (time) order.
    pub residuals: Vec<f64>,
}

/// OLS of log10(cost) on fractional-year date. Points are sorted by date
/// before fitting so residuals carry time order for the HAC test.
pub fn fit_loglinear(points: &[(NaiveDate, f64)]) -> Result<TrendFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "log-linear fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((d, c)) = points.iter().find(|(_, c)| !(*c > 0.0)) {
        return Err(Error::Domain(format!(
            "nonpositive cost {c} at {d} cannot be log-transformed"
        )));
    }
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|(d, c)| (fractional_year(*d), c.log10()))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));

    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all points share one date".to_string()));
    }
    let sxy: f64 = pts
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let residuals: Vec<f64> = pts
        .iter()
        .map(|p| p.1 - (intercept + slope * p.0))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };

    let dof = pts.len() - 2;
    let sigma2 = ss_res / dof as f64;
    let slope_se = (sigma2 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .expect("valid dof")
        .inverse_cdf(0.95);
    Ok(TrendFit {
        slope_oom_per_year: slope,
        intercept_log10: intercept,
        slope_ci_90: (slope - t * slope_se, slope + t * slope_se),
        slope_se,
        r_squared,
        n: pts.len(),
        xs: pts.iter().map(|p| p.0).collect(),
        residuals,
    })
}

/// Growth factor per year and doubling time for a slope in OOMs/year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConversions {
    pub factor_per_year: f64,
    /// None when the slope is nonpositive.
    pub doubling_time_months: Option<f64>,
}

pub fn growth_conversions(slope_oom_per_year: f64) -> GrowthConversions {
    let factor = 10f64.powf(slope_oom_per_year);
    let doubling = if slope_oom_per_year > 0.0 {
        Some(12.0 * 2f64.log10() / slope_oom_per_year)
    } else {
        None
    };
    GrowthConversions {
        factor_per_year: factor,
        doubling_time_months: doubling,
    }
}

/// Newey-West (Bartlett kernel) variance of the slope estimate, with
/// lag = floor(0.75 * n^(1/3)). Residuals must be in time order.
fn hac_slope_variance(fit: &TrendFit) -> Result<f64> {
    let n = fit.n;
    let mean_x = fit.xs.iter().sum::<f64>() / n as f64;
    let xc: Vec<f64> = fit.xs.iter().map(|x| x - mean_x).collect();
    let sxx: f64 = xc.iter().map(|x| x * x).sum();
    if fit.residuals.iter().all(|r| r.abs() < 1e-300) {
        return Err(Error::TestUnavailable(
            "residuals are degenerate (perfect fit)".to_string(),
        ));
    }
    let scores: Vec<f64> = xc
        .iter()
        .zip(&fit.residuals)
        .map(|(x, e)| x * e)
        .collect();
    let lag = (0.75 * (n as f64).powf(1.0 / 3.0)).floor() as usize;
    let mut s: f64 = scores.iter().map(|g| g * g).sum();
    for l in 1..=lag.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let gamma: f64 = (l..n).map(|i| scores[i] * scores[i - l]).sum();
        s += 2.0 * w * gamma;
    }
    // small-sample correction mirroring the OLS n/(n-2) scaling
    let correction = n as f64 / (n as f64 - 2.0);
    Ok(correction * s / (sxx * sxx))
}

/// Two-sided p-value for slope equality between two independent fits,
/// using autocorrelation-robust standard errors and a Student-t reference
/// with n_a + n_b - 4 degrees of freedom.
pub fn compare_slopes(fit_a: &TrendFit, fit_b: &TrendFit) -> Result<f64> {
    let diff = fit_a.slope_oom_per_year - fit_b.slope_oom_per_year;
    if diff == 0.0 {
        return Ok(1.0);
    }
    let var = hac_slope_variance(fit_a)? + hac_slope_variance(fit_b)?;
    if var <= 0.0 {
        return Err(Error::TestUnavailable("zero variance".to_string()));
    }
    let dof = (fit_a.n + fit_b.n).saturating_sub(4);
    if dof == 0 {
        return Err(Error::TestUnavailable("too few points".to_string()));
    }
    let t_stat = diff / var.sqrt();
    let t = StudentsT::new(0.0, 1.0, dof as f64).expect("valid dof");
    Ok(2.0 * (1.0 - t.cdf(t_stat.abs())))
}

/// One extrapolation along cost(t) = anchor * factor^(years since anchor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub anchor_value: f64,
    pub anchor_date: NaiveDate,
    pub growth_factor_per_year: f64,
    pub delta_years: f64,
    pub value: f64,
    pub date: NaiveDate,
}

/// What to solve for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationTarget {
    /// Evaluate the trend at a date.
    Date(NaiveDate),
    /// Solve for the date at which the trend crosses a value. A target
    /// below the anchor with growth > 1 lands in the past (negative delta).
    Value(f64),
}

pub fn extrapolate_cost(
    anchor_value: f64,
    anchor_date: NaiveDate,
    growth_factor_per_year: f64,
    target: ExtrapolationTarget,
) -> Result<Extrapolation> {
    if !(anchor_value > 0.0) {
        return Err(Error::Domain("anchor value must be positive".to_string()));
    }
    if !(growth_factor_per_year > 0.0) {
        return Err(Error::Domain("growth factor must be positive".to_string()));
    }
    let (delta_years, value, date) = match target {
        ExtrapolationTarget::Date(d) => {
            let dy = years_between(anchor_date, d);
            (dy, anchor_value * growth_factor_per_year.powf(dy), d)
        }
        ExtrapolationTarget::Value(v) => {
            if !(v > 0.0) {
                return Err(Error::Domain("target value must be positive".to_string()));
            }
            if growth_factor_per_year == 1.0 {
                return Err(Error::Domain(
                    "flat trend never crosses a different value".to_string(),
                ));
            }
            let dy = (v / anchor_value).ln() / growth_factor_per_year.ln();
            (dy, v, add_years(anchor_date, dy))
        }
    };
    Ok(Extrapolation {
        anchor_value,
        anchor_date,
        growth_factor_per_year,
        delta_years,
        value,
        date,
    })
}
