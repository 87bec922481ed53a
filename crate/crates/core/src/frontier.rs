//! Frontier model selection: the preferred top-N-at-release rule and the
//! alternative rules used for sensitivity analysis.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::ModelRecord;
use crate::dates::fractional_year;
use crate::error::{Error, Result};
use crate::sampling::percentile;
use crate::trend;

/// How frontier membership is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SelectionVariant {
    /// In the top N by training compute as of the model's release.
    TopN { n: usize },
    /// At or above the q-quantile of compute among models released so far.
    ComputeQuantile { q: f64 },
    /// In the top fraction of positive residuals from the all-models
    /// log-compute time trend.
    ResidualFromTrend { top_fraction: f64 },
}

/// A selection rule plus the study window it applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMethod {
    pub variant: SelectionVariant,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    /// Drop rows that are fine-tuned versions of a separately listed model.
    pub exclude_finetunes: bool,
}

impl SelectionMethod {
    pub fn validate(&self) -> Result<()> {
        match self.variant {
            SelectionVariant::TopN { n } if n < 1 => {
                Err(Error::InvalidConfig("top_n requires n >= 1".to_string()))
            }
            SelectionVariant::ComputeQuantile { q } if !(q > 0.0 && q < 1.0) => {
                Err(Error::InvalidConfig("quantile must be in (0,1)".to_string()))
            }
            SelectionVariant::ResidualFromTrend { top_fraction }
                if !(top_fraction > 0.0 && top_fraction < 1.0) =>
            {
                Err(Error::InvalidConfig("top_fraction must be in (0,1)".to_string()))
            }
            _ => Ok(()),
        }
    }
}

/// Strict total order used for ranking: more compute wins, ties go to the
/// earlier publication, remaining ties to name order.
fn outranks(a: &ModelRecord, b: &ModelRecord) -> bool {
    if a.training_compute != b.training_compute {
        return a.training_compute > b.training_compute;
    }
    if a.publication_date != b.publication_date {
        return a.publication_date < b.publication_date;
    }
    a.name < b.name
}

fn rank_within(pool: &[&ModelRecord], model: &ModelRecord) -> usize {
    1 + pool
        .iter()
        .filter(|m| {
            m.publication_date <= model.publication_date
                && m.name != model.name
                && outranks(m, model)
        })
        .count()
}

/// 1-based compute rank of `model` among all models published on or before
/// its publication date.
pub fn rank_at_release(models: &[ModelRecord], model: &ModelRecord) -> usize {
    let pool: Vec<&ModelRecord> = models.iter().collect();
    rank_within(&pool, model)
}

fn in_window(m: &ModelRecord, method: &SelectionMethod) -> bool {
    m.publication_date >= method.window_start && m.publication_date <= method.window_end
}

/// Frontier subset under the given rule, ordered by publication date then
/// name. An empty window yields an empty result.
pub fn select_frontier<'a>(
    models: &'a [ModelRecord],
    method: &SelectionMethod,
) -> Result<Vec<&'a ModelRecord>> {
    method.validate()?;
    let pool: Vec<&ModelRecord> = models
        .iter()
        .filter(|m| in_window(m, method))
        .filter(|m| !(method.exclude_finetunes && m.finetune_parent.is_some()))
        .collect();

    let mut selected: Vec<&ModelRecord> = match method.variant {
        SelectionVariant::TopN { n } => pool
            .iter()
            .copied()
            .filter(|m| rank_within(&pool, m) <= n)
            .collect(),
        SelectionVariant::ComputeQuantile { q } => pool
            .iter()
            .copied()
            .filter(|m| {
                let mut seen: Vec<f64> = pool
                    .iter()
                    .filter(|o| o.publication_date <= m.publication_date)
                    .map(|o| o.training_compute)
                    .collect();
                seen.sort_by(|a, b| a.partial_cmp(b).expect("finite compute"));
                m.training_compute >= percentile(&seen, q)
            })
            .collect(),
        SelectionVariant::ResidualFromTrend { top_fraction } => {
            let points: Vec<(NaiveDate, f64)> = pool
                .iter()
                .map(|m| (m.publication_date, m.training_compute))
                .collect();
            let fit = trend::fit_loglinear(&points)?;
            // Residuals from fit_loglinear follow its date-sorted point
            // order; recompute per model to stay keyed by name.
            let residual = |m: &ModelRecord| {
                m.training_compute.log10()
                    - (fit.intercept_log10 + fit.slope_oom_per_year * fractional_year(m.publication_date))
            };
            let mut all: Vec<f64> = pool.iter().map(|m| residual(m)).collect();
            all.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
            let threshold = percentile(&all, 1.0 - top_fraction);
            pool.iter()
                .copied()
                .filter(|m| {
                    let r = residual(m);
                    r > 0.0 && r >= threshold
                })
                .collect()
        }
    };
    selected.sort_by(|a, b| {
        (a.publication_date, a.name.as_str()).cmp(&(b.publication_date, b.name.as_str()))
    });
    Ok(selected)
}
