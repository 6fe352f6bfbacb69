use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Portfolio;
use crate::diagnostics::{QuantilePoint, QUANTILE_LEVELS};
use crate::error::{Error, Result};
use crate::model::{ieq_score, ModelParams, ScoreReport, SectorTable};
use crate::stats::{mean, quantile_sorted, spearman};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowScoreError {
    pub index: usize,
    pub org_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSummary {
    pub scored: usize,
    pub errors: usize,
    pub mean_ieq: f64,
    pub quantiles: Vec<QuantilePoint>,
    pub floored: usize,
    pub clipped: usize,
    /// `None` when undefined, e.g. a constant column.
    pub spearman_ve: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchScore {
    /// Reports for the scorable profiles, in input order.
    pub reports: Vec<ScoreReport>,
    pub errors: Vec<RowScoreError>,
    pub summary: PortfolioSummary,
}

/// Scores every profile on a pool of `workers` threads. Output does not
/// depend on `workers`.
pub fn score_portfolio(
    portfolio: &Portfolio,
    params: &ModelParams,
    sectors: &SectorTable,
    t0: f64,
    workers: usize,
) -> Result<BatchScore> {
    params.validate()?;
    if !t0.is_finite() {
        return Err(Error::InvalidInput("t0 must be finite".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<Result<ScoreReport>> = pool.install(|| {
        portfolio
            .profiles
            .par_iter()
            .map(|p| ieq_score(p, params, sectors.get(&p.sector_id)?, t0))
            .collect()
    });

    let mut reports = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    let mut v = Vec::with_capacity(results.len());
    let mut e = Vec::with_capacity(results.len());
    for (index, (res, profile)) in results.into_iter().zip(&portfolio.profiles).enumerate() {
        match res {
            Ok(r) => {
                v.push(profile.v);
                e.push(profile.e);
                reports.push(r);
            }
            Err(err) => errors.push(RowScoreError {
                index,
                org_id: profile.org_id.clone(),
                message: err.to_string(),
            }),
        }
    }

    let mut scores: Vec<f64> = reports.iter().map(|r| r.ieq).collect();
    scores.sort_by(f64::total_cmp);
    let summary = PortfolioSummary {
        scored: reports.len(),
        errors: errors.len(),
        mean_ieq: if scores.is_empty() { f64::NAN } else { mean(&scores) },
        quantiles: QUANTILE_LEVELS
            .iter()
            .map(|&level| QuantilePoint {
                level,
                value: if scores.is_empty() { f64::NAN } else { quantile_sorted(&scores, level) },
            })
            .collect(),
        floored: reports.iter().filter(|r| r.floored.any()).count(),
        clipped: reports.iter().filter(|r| r.clipped).count(),
        spearman_ve: spearman(&v, &e).ok(),
    };
    Ok(BatchScore { reports, errors, summary })
}
