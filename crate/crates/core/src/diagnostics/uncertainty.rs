//! Monte Carlo propagation of input noise through the IEQ score.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ieq_from_hazard, temporal_hazard, ModelParams, OrganizationProfile, SectorPrior};
use crate::rng::substream;
use crate::stats::{mean, quantile_sorted, sample_sd};

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
pub const MIN_DRAWS: usize = 100;
/// Standard normal draws are truncated to `|z| <= 3`.
pub const TRUNCATION: f64 = 3.0;
const MIN_SHELF_LIFE: f64 = 1e-6;

/// Relative (multiplicative) standard deviations per input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub v: f64,
    pub e: f64,
    pub t_d: f64,
    pub m: f64,
}

impl NoiseSpec {
    pub fn uniform(sd: f64) -> Self {
        Self { v: sd, e: sd, t_d: sd, m: sd }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            v: self.v * k,
            e: self.e * k,
            t_d: self.t_d * k,
            m: self.m * k,
        }
    }

    fn is_zero(&self) -> bool {
        self.v == 0.0 && self.e == 0.0 && self.t_d == 0.0 && self.m == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyResult {
    pub point_score: f64,
    pub samples: usize,
    pub quantiles: Vec<QuantilePoint>,
    pub mean: f64,
    pub sd: f64,
    pub warnings: Vec<String>,
}

impl UncertaintyResult {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|q| q.level == level).map(|q| q.value)
    }

    pub fn spread(&self) -> f64 {
        self.quantile(0.95).unwrap_or(f64::NAN) - self.quantile(0.05).unwrap_or(f64::NAN)
    }
}

fn truncated_normal(rng: &mut crate::rng::Rng) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= TRUNCATION {
            return z;
        }
    }
}

pub fn monte_carlo_uncertainty(
    profile: &OrganizationProfile,
    params: &ModelParams,
    prior: &SectorPrior,
    t0: f64,
    noise: &NoiseSpec,
    n: usize,
    seed: u64,
) -> Result<UncertaintyResult> {
    if n < MIN_DRAWS {
        return Err(Error::InvalidInput(format!("need at least {MIN_DRAWS} draws, got {n}")));
    }
    for (name, sd) in [("v", noise.v), ("e", noise.e), ("t_d", noise.t_d), ("m", noise.m)] {
        if !(sd.is_finite() && sd >= 0.0) {
            return Err(Error::InvalidInput(format!("noise sd for {name} must be >= 0, got {sd}")));
        }
    }
    params.validate()?;
    profile.validate(params.m_max)?;
    let score = |v: f64, e: f64, t_d: f64, m: f64| -> Result<f64> {
        let h = temporal_hazard(t0, t_d, prior)?;
        Ok(ieq_from_hazard(&profile.org_id, v, e, h, m, params)?.ieq)
    };
    let point_score = score(profile.v, profile.e, profile.t_d, profile.m)?;

    let mut draws = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let mut perturb = |x: f64, sd: f64| x * (1.0 + sd * truncated_normal(&mut rng));
            let v = perturb(profile.v, noise.v).clamp(0.0, 1.0);
            let e = perturb(profile.e, noise.e).clamp(0.0, 1.0);
            let t_d = perturb(profile.t_d, noise.t_d).max(MIN_SHELF_LIFE);
            let m = perturb(profile.m, noise.m).clamp(1.0, params.m_max);
            score(v, e, t_d, m)
        })
        .collect::<Result<Vec<f64>>>()?;
    draws.sort_by(f64::total_cmp);

    let mut warnings = Vec::new();
    if !noise.is_zero() && draws.first() == draws.last() {
        warnings.push(format!(
            "degenerate distribution: every draw scored {}",
            draws[0]
        ));
    }
    Ok(UncertaintyResult {
        point_score,
        samples: n,
        quantiles: QUANTILE_LEVELS
            .iter()
            .map(|&level| QuantilePoint { level, value: quantile_sorted(&draws, level) })
            .collect(),
        mean: mean(&draws),
        sd: sample_sd(&draws),
        warnings,
    })
}
