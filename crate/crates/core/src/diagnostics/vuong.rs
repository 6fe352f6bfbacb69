//! Vuong's standardized log-likelihood-ratio test for non-nested models.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::alt_models::{fit_model, FitMeta, FitOptions, Family, Observation, ScoringModel};
use crate::dist::defaults;
use crate::error::{Error, Result};
use crate::model::DEFAULT_EPSILON;
use crate::rng::{derive_seed, substream};
use crate::stats::{mean, normal_cdf, sample_sd};

pub const DEFAULT_Z_CRIT: f64 = 1.96;
pub const MIN_OBSERVATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FavorsA,
    FavorsB,
    Indeterminate,
}

/// Optional Schwarz-type penalty for unequal parameter counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionCorrection {
    pub params_a: usize,
    pub params_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VuongOptions {
    pub z_crit: f64,
    pub correction: Option<DimensionCorrection>,
}

impl Default for VuongOptions {
    fn default() -> Self {
        Self {
            z_crit: DEFAULT_Z_CRIT,
            correction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VuongResult {
    pub z: f64,
    pub n: usize,
    pub mean_llr: f64,
    pub sd_llr: f64,
    /// Two-sided normal p-value of `z`.
    pub p_value: f64,
    pub z_crit: f64,
    pub verdict: Verdict,
}

/// Compares per-observation log-likelihoods of model A and model B.
/// Positive `z` favours A.
pub fn vuong_test(ll_a: &[f64], ll_b: &[f64], opts: &VuongOptions) -> Result<VuongResult> {
    if ll_a.len() != ll_b.len() {
        return Err(Error::InvalidInput(format!(
            "log-likelihood vectors differ in length: {} vs {}",
            ll_a.len(),
            ll_b.len()
        )));
    }
    let n = ll_a.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    if ll_a.iter().chain(ll_b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite log-likelihood".into()));
    }
    if !(opts.z_crit > 0.0) {
        return Err(Error::InvalidInput("z_crit must be positive".into()));
    }
    let d: Vec<f64> = ll_a.iter().zip(ll_b).map(|(a, b)| a - b).collect();
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Err(Error::DegenerateComparison(
            "log-likelihood differences have zero variance".into(),
        ));
    }
    let mut mean_llr = mean(&d);
    if let Some(c) = opts.correction {
        let nf = n as f64;
        mean_llr -= (c.params_a as f64 - c.params_b as f64) * nf.ln() / (2.0 * nf);
    }
    let z = (n as f64).sqrt() * mean_llr / sd;
    let verdict = if z > opts.z_crit {
        Verdict::FavorsA
    } else if z < -opts.z_crit {
        Verdict::FavorsB
    } else {
        Verdict::Indeterminate
    };
    Ok(VuongResult {
        z,
        n,
        mean_llr,
        sd_llr: sd,
        p_value: 2.0 * (1.0 - normal_cdf(z.abs())),
        z_crit: opts.z_crit,
        verdict,
    })
}

/// Synthetic comparison: data from the default structural model plus Gaussian
/// log-noise, structural and CES fitted to the same data, tested against each
/// other (A = structural, B = CES).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VuongExperiment {
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
    pub truth: ScoringModel,
    pub fit: FitOptions,
    pub vuong: VuongOptions,
}

impl Default for VuongExperiment {
    fn default() -> Self {
        Self {
            n: 5_000,
            noise: 0.05,
            seed: 0,
            truth: ScoringModel::default_for(Family::Structural),
            fit: FitOptions::default(),
            vuong: VuongOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VuongExperimentResult {
    pub vuong: VuongResult,
    pub structural: ScoringModel,
    pub structural_fit: FitMeta,
    pub ces: ScoringModel,
    pub ces_fit: FitMeta,
}

/// Draws `n` observations with `(V, E)` from the default marginals (floored at
/// the default epsilon) and `log_score = truth + noise * N(0, 1)`.
pub fn synthetic_observations(truth: &ScoringModel, n: usize, noise: f64, seed: u64) -> Vec<Observation> {
    let (vd, ed) = (defaults::vulnerability(), defaults::exposure());
    (0..n)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let v = vd.sample(&mut rng).clamp(DEFAULT_EPSILON, 1.0);
            let e = ed.sample(&mut rng).clamp(DEFAULT_EPSILON, 1.0);
            let z: f64 = StandardNormal.sample(&mut rng);
            Observation {
                v,
                e,
                log_score: truth.log_score(v, e) + noise * z,
            }
        })
        .collect()
}

pub fn run_vuong_experiment(cfg: &VuongExperiment) -> Result<VuongExperimentResult> {
    if !(cfg.noise > 0.0) {
        return Err(Error::InvalidInput("noise must be > 0".into()));
    }
    let data = synthetic_observations(&cfg.truth, cfg.n, cfg.noise, cfg.seed);
    let fit_opts = FitOptions {
        seed: derive_seed(cfg.seed, 1),
        ..cfg.fit
    };
    let structural = fit_model(&data, &ScoringModel::default_for(Family::Structural), &fit_opts)?;
    let ces = fit_model(&data, &ScoringModel::default_for(Family::Ces), &fit_opts)?;
    let vuong = vuong_test(&structural.log_likelihoods, &ces.log_likelihoods, &cfg.vuong)?;
    Ok(VuongExperimentResult {
        vuong,
        structural: structural.model,
        structural_fit: structural.fit_meta,
        ces: ces.model,
        ces_fit: ces.fit_meta,
    })
}
