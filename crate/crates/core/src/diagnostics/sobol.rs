//! Total-effect Sobol indices: a Jansen pick-freeze estimator and a nested
//! Monte Carlo oracle.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{defaults, Dist};
use crate::error::{Error, Result};
use crate::model::{ieq_from_hazard, temporal_hazard, ModelParams, SectorPrior};
use crate::rng::{derive_seed, substream};
use crate::stats::{sample_sd, sample_variance};

pub const MIN_BASE_SAMPLES: usize = 64;
pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const DEFAULT_BRUTE_FORCE_BUDGET: usize = 20_000_000;
pub const MIN_VARIANCE: f64 = 1e-12;
pub const TOTAL_EFFECT_CLIP: f64 = 1.05;

const BOOTSTRAP_LABEL: u64 = 0xB007;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolInput {
    pub name: String,
    pub dist: Dist,
}

impl SobolInput {
    pub fn new(name: impl Into<String>, dist: Dist) -> Self {
        Self { name: name.into(), dist }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    PickFreeze,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolResult {
    pub input_names: Vec<String>,
    /// Raw estimates clipped to `[0, 1.05]`.
    pub total_effect: Vec<f64>,
    pub raw_total_effect: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Model evaluations used.
    pub sample_count: usize,
    pub estimator: Estimator,
    pub variance: f64,
}

impl SobolResult {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.input_names.iter().position(|n| n == name)?;
        Some((self.raw_total_effect[i], self.standard_errors[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolOptions {
    pub n: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for SobolOptions {
    fn default() -> Self {
        Self {
            n: 4096,
            seed: 0,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceOptions {
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub budget: usize,
    pub bootstrap: usize,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            n_outer: 1000,
            n_inner: 100,
            seed: 0,
            budget: DEFAULT_BRUTE_FORCE_BUDGET,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }
}

fn check_inputs(inputs: &[SobolInput]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::InvalidInput("at least one input is required".into()));
    }
    for inp in inputs {
        inp.dist.validate()?;
    }
    Ok(())
}

fn draw_row(inputs: &[SobolInput], rng: &mut crate::rng::Rng) -> Vec<f64> {
    inputs.iter().map(|i| i.dist.sample(rng)).collect()
}

fn finish(
    inputs: &[SobolInput],
    raw: Vec<f64>,
    standard_errors: Vec<f64>,
    sample_count: usize,
    estimator: Estimator,
    variance: f64,
) -> SobolResult {
    SobolResult {
        input_names: inputs.iter().map(|i| i.name.clone()).collect(),
        total_effect: raw.iter().map(|x| x.clamp(0.0, TOTAL_EFFECT_CLIP)).collect(),
        raw_total_effect: raw,
        standard_errors,
        sample_count,
        estimator,
        variance,
    }
}

/// Jansen estimator `S_Ti = mean_j (f(A_j) - f(A_B^(i)_j))^2 / (2 Var)`,
/// with `Var` taken over the pooled `A` and `B` evaluations and standard
/// errors from a row bootstrap.
pub fn sobol_total_effect<F>(f: F, inputs: &[SobolInput], opts: &SobolOptions) -> Result<SobolResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_inputs(inputs)?;
    if opts.n < MIN_BASE_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_BASE_SAMPLES} base samples, got {}",
            opts.n
        )));
    }
    let k = inputs.len();

    // Per row: f(A), f(B), then the squared differences for each input.
    let rows: Vec<(f64, f64, Vec<f64>)> = (0..opts.n)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(opts.seed, j as u64);
            let a = draw_row(inputs, &mut rng);
            let b = draw_row(inputs, &mut rng);
            let fa = f(&a);
            let fb = f(&b);
            let mut hybrid = a.clone();
            let sq = (0..k)
                .map(|i| {
                    hybrid[i] = b[i];
                    let d = fa - f(&hybrid);
                    hybrid[i] = a[i];
                    d * d
                })
                .collect();
            (fa, fb, sq)
        })
        .collect();

    let estimate = |idx: &mut dyn Iterator<Item = usize>| -> (f64, Vec<f64>) {
        let mut pooled = Vec::with_capacity(2 * opts.n);
        let mut sums = vec![0.0; k];
        let mut count = 0usize;
        for j in idx {
            let (fa, fb, sq) = &rows[j];
            pooled.push(*fa);
            pooled.push(*fb);
            for (s, x) in sums.iter_mut().zip(sq) {
                *s += x;
            }
            count += 1;
        }
        let var = sample_variance(&pooled);
        let st = sums.iter().map(|s| s / count as f64 / (2.0 * var)).collect();
        (var, st)
    };

    let (variance, raw) = estimate(&mut (0..opts.n));
    if !(variance >= MIN_VARIANCE) {
        return Err(Error::ConstantFunction(variance));
    }
    let se = bootstrap_se(k, opts.bootstrap, derive_seed(opts.seed, BOOTSTRAP_LABEL), opts.n, |idx| {
        estimate(&mut idx.iter().copied()).1
    });
    Ok(finish(inputs, raw, se, opts.n * (k + 2), Estimator::PickFreeze, variance))
}

/// Brute-force `E[Var(f | x_~i)] / Var(f)` with `n_outer` frozen complements
/// and `n_inner` fresh draws of input `i` each.
pub fn sobol_brute_force<F>(f: F, inputs: &[SobolInput], opts: &BruteForceOptions) -> Result<SobolResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_inputs(inputs)?;
    if opts.n_outer < 2 || opts.n_inner < 2 {
        return Err(Error::InvalidInput("n_outer and n_inner must be >= 2".into()));
    }
    let k = inputs.len();
    let per_input = opts.n_outer.saturating_mul(opts.n_inner);
    if per_input.saturating_mul(k) > opts.budget {
        return Err(Error::InvalidInput(format!(
            "{} evaluations exceed the budget of {}",
            per_input * k,
            opts.budget
        )));
    }

    // groups[i][o] = (inner sample variance, inner values sum, inner sum of squares)
    let groups: Vec<Vec<(f64, f64, f64)>> = (0..k)
        .map(|i| {
            let seed = derive_seed(opts.seed, i as u64);
            (0..opts.n_outer)
                .into_par_iter()
                .map(|o| {
                    let mut rng = substream(seed, o as u64);
                    let mut x = draw_row(inputs, &mut rng);
                    let ys: Vec<f64> = (0..opts.n_inner)
                        .map(|_| {
                            x[i] = inputs[i].dist.sample(&mut rng);
                            f(&x)
                        })
                        .collect();
                    let s: f64 = ys.iter().sum();
                    let ss: f64 = ys.iter().map(|y| y * y).sum();
                    (sample_variance(&ys), s, ss)
                })
                .collect()
        })
        .collect();

    let m = opts.n_inner as f64;
    let estimate = |i: usize, idx: &mut dyn Iterator<Item = usize>| -> (f64, f64) {
        let (mut within, mut s, mut ss, mut cnt) = (0.0, 0.0, 0.0, 0usize);
        for o in idx {
            let g = groups[i][o];
            within += g.0;
            s += g.1;
            ss += g.2;
            cnt += 1;
        }
        let total_n = cnt as f64 * m;
        let var = (ss - s * s / total_n) / (total_n - 1.0);
        (var, within / cnt as f64 / var)
    };

    let mut raw = Vec::with_capacity(k);
    let mut variance = f64::INFINITY;
    for i in 0..k {
        let (var, st) = estimate(i, &mut (0..opts.n_outer));
        if !(var >= MIN_VARIANCE) {
            return Err(Error::ConstantFunction(var));
        }
        variance = variance.min(var);
        raw.push(st);
    }
    let se = bootstrap_se(k, opts.bootstrap, derive_seed(opts.seed, BOOTSTRAP_LABEL), opts.n_outer, |idx| {
        (0..k).map(|i| estimate(i, &mut idx.iter().copied()).1).collect()
    });
    Ok(finish(inputs, raw, se, per_input * k, Estimator::BruteForce, variance))
}

fn bootstrap_se<G>(k: usize, resamples: usize, seed: u64, n: usize, stat: G) -> Vec<f64>
where
    G: Fn(&[usize]) -> Vec<f64> + Sync,
{
    if resamples < 2 {
        return vec![f64::NAN; k];
    }
    let reps: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&idx)
        })
        .collect();
    (0..k)
        .map(|i| sample_sd(&reps.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect()
}

/// Inputs `V, E, T_D, M` with the stand-in marginals.
pub fn default_ieq_inputs() -> Vec<SobolInput> {
    vec![
        SobolInput::new("V", defaults::vulnerability()),
        SobolInput::new("E", defaults::exposure()),
        SobolInput::new("T_D", defaults::shelf_life()),
        SobolInput::new("M", defaults::governance()),
    ]
}

/// IEQ as a function of `[V, E, T_D, M]`.
pub fn ieq_function(
    params: ModelParams,
    prior: SectorPrior,
    t0: f64,
) -> Result<impl Fn(&[f64]) -> f64 + Sync> {
    params.validate()?;
    prior.validate()?;
    Ok(move |x: &[f64]| {
        let h = temporal_hazard(t0, x[2], &prior).unwrap_or(f64::NAN);
        ieq_from_hazard("", x[0], x[1], h, x[3], &params)
            .map(|r| r.ieq)
            .unwrap_or(f64::NAN)
    })
}
