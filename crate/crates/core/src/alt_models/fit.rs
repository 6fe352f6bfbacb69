//! Least-squares fitting of a scoring family to observed log-scores.
//!
//! Parameters are mapped to an unconstrained vector (logs for positive
//! quantities, logits for shares) and minimised with Levenberg-Marquardt from
//! several seeded starting points. Minimising the mean squared log-score error
//! is Gaussian maximum likelihood with the variance profiled out, which is what
//! the per-observation log-likelihoods returned here assume.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{CesParams, LogAdditiveParams, ScoringModel, StructuralParams, ThresholdParams};
use crate::error::{Error, FitFailure, Result};
use crate::rng::substream;

/// One data point: inputs and the observed log-score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub v: f64,
    pub e: f64,
    pub log_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Standard deviation of the start-point jitter in unconstrained coordinates.
    pub jitter: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            max_iterations: 200,
            jitter: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub seed: u64,
    pub mse: f64,
    pub n: usize,
    pub restarts: usize,
    pub converged_restarts: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    #[serde(flatten)]
    pub model: ScoringModel,
    pub fit_meta: FitMeta,
    /// Per-observation Gaussian log-likelihoods at the profiled variance.
    #[serde(skip)]
    pub log_likelihoods: Vec<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl FittedModel {
    /// Per-observation log-likelihoods of another dataset under this model,
    /// using the variance estimated during the fit.
    pub fn log_likelihoods_on(&self, data: &[Observation]) -> Vec<f64> {
        let var = self.fit_meta.mse.max(f64::MIN_POSITIVE);
        data.iter()
            .map(|o| gaussian_ll(self.model.log_score(o.v, o.e) - o.log_score, var))
            .collect()
    }

    pub fn mse_on(&self, data: &[Observation]) -> f64 {
        data.iter()
            .map(|o| (self.model.log_score(o.v, o.e) - o.log_score).powi(2))
            .sum::<f64>()
            / data.len() as f64
    }
}

fn gaussian_ll(resid: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - resid * resid / (2.0 * var)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Unconstrained coordinates of a model. CES keeps `rho` fixed at the value
/// carried by the template model.
fn encode(model: &ScoringModel) -> Vec<f64> {
    match *model {
        ScoringModel::Structural(p) => vec![p.a.ln(), p.b.ln(), p.theta.ln()],
        ScoringModel::Ces(p) => vec![logit(p.w), p.s.ln(), p.theta.ln()],
        ScoringModel::LogAdditive(p) => vec![p.w1.ln(), p.w2.ln(), p.c],
        ScoringModel::Threshold(p) => vec![
            logit(p.tau_v),
            logit(p.tau_e),
            p.softness.ln(),
            p.a.ln(),
            p.b.ln(),
            p.theta.ln(),
        ],
    }
}

fn decode(template: &ScoringModel, z: &[f64]) -> ScoringModel {
    match *template {
        ScoringModel::Structural(_) => ScoringModel::Structural(StructuralParams {
            a: z[0].exp(),
            b: z[1].exp(),
            theta: z[2].exp(),
        }),
        ScoringModel::Ces(p) => ScoringModel::Ces(CesParams {
            w: sigmoid(z[0]),
            rho: p.rho,
            s: z[1].exp(),
            theta: z[2].exp(),
        }),
        ScoringModel::LogAdditive(_) => ScoringModel::LogAdditive(LogAdditiveParams {
            w1: z[0].exp(),
            w2: z[1].exp(),
            c: z[2],
        }),
        ScoringModel::Threshold(_) => ScoringModel::Threshold(ThresholdParams {
            tau_v: sigmoid(z[0]),
            tau_e: sigmoid(z[1]),
            softness: z[2].exp(),
            a: z[3].exp(),
            b: z[4].exp(),
            theta: z[5].exp(),
        }),
    }
}

fn param_vector(model: &ScoringModel) -> Vec<f64> {
    match *model {
        ScoringModel::Structural(p) => vec![p.a, p.b, p.theta],
        ScoringModel::Ces(p) => vec![p.w, p.rho, p.s, p.theta],
        ScoringModel::LogAdditive(p) => vec![p.w1, p.w2, p.c],
        ScoringModel::Threshold(p) => vec![p.tau_v, p.tau_e, p.softness, p.a, p.b, p.theta],
    }
}

struct Prepared<'a> {
    data: &'a [Observation],
    ln_v: Vec<f64>,
    ln_e: Vec<f64>,
}

impl Prepared<'_> {
    fn residuals(&self, model: &ScoringModel, out: &mut [f64]) -> bool {
        for (i, o) in self.data.iter().enumerate() {
            let r = model.log_score_ln(o.v, o.e, self.ln_v[i], self.ln_e[i]).value - o.log_score;
            if !r.is_finite() {
                return false;
            }
            out[i] = r;
        }
        true
    }
}

struct LmOutcome {
    z: Vec<f64>,
    cost: f64,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
}

fn levenberg_marquardt(
    prep: &Prepared<'_>,
    template: &ScoringModel,
    z0: Vec<f64>,
    max_iterations: usize,
) -> Option<LmOutcome> {
    const GTOL: f64 = 1e-14;
    const XTOL: f64 = 1e-13;
    const FTOL: f64 = 1e-15;

    let n = prep.data.len();
    let k = z0.len();
    let eval = |z: &[f64], out: &mut [f64]| prep.residuals(&decode(template, z), out);

    let mut z = z0;
    let mut r = vec![0.0; n];
    if !eval(&z, &mut r) {
        return None;
    }
    let mut cost = 0.5 * r.iter().map(|x| x * x).sum::<f64>();
    let mut trace = vec![cost / n as f64 * 2.0];
    let mut jac = DMatrix::<f64>::zeros(n, k);
    let mut scratch = vec![0.0; n];
    let mut damping = f64::NAN;
    let mut nu = 2.0;
    let mut fresh_jacobian = true;
    let mut jtj = DMatrix::<f64>::zeros(k, k);
    let mut grad = DVector::<f64>::zeros(k);

    for iter in 0..max_iterations {
        if cost == 0.0 {
            return Some(LmOutcome { z, cost, converged: true, iterations: iter, trace });
        }
        if fresh_jacobian {
            // forward differences
            for j in 0..k {
                let step = 1e-7 * z[j].abs().max(1.0);
                let mut zj = z.clone();
                zj[j] += step;
                if !eval(&zj, &mut scratch) {
                    zj[j] = z[j] - step;
                    if !eval(&zj, &mut scratch) {
                        return None;
                    }
                    for i in 0..n {
                        jac[(i, j)] = (r[i] - scratch[i]) / step;
                    }
                } else {
                    for i in 0..n {
                        jac[(i, j)] = (scratch[i] - r[i]) / step;
                    }
                }
            }
            jtj = jac.tr_mul(&jac);
            grad = jac.tr_mul(&DVector::from_column_slice(&r));
            if damping.is_nan() {
                let max_diag = (0..k).map(|j| jtj[(j, j)]).fold(0.0, f64::max);
                damping = 1e-3 * max_diag.max(1e-12);
            }
            fresh_jacobian = false;
        }
        if grad.amax() <= GTOL * (1.0 + cost) {
            return Some(LmOutcome { z, cost, converged: true, iterations: iter, trace });
        }

        let mut system = jtj.clone();
        for j in 0..k {
            system[(j, j)] += damping * jtj[(j, j)].max(1e-12);
        }
        let Some(chol) = system.cholesky() else {
            damping *= nu;
            nu *= 2.0;
            continue;
        };
        let delta = -chol.solve(&grad);
        let z_norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if delta.norm() <= XTOL * (z_norm + XTOL) {
            return Some(LmOutcome { z, cost, converged: true, iterations: iter, trace });
        }

        let z_new: Vec<f64> = z.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
        let predicted = -(grad.dot(&delta) + 0.5 * delta.dot(&(&jtj * &delta)));
        let accepted = eval(&z_new, &mut scratch) && {
            let new_cost = 0.5 * scratch.iter().map(|x| x * x).sum::<f64>();
            let gain = (cost - new_cost) / predicted.max(f64::MIN_POSITIVE);
            if new_cost < cost && gain > 0.0 {
                let decrease = cost - new_cost;
                z = z_new;
                std::mem::swap(&mut r, &mut scratch);
                cost = new_cost;
                trace.push(2.0 * cost / n as f64);
                damping *= (1.0 / 3.0f64).max(1.0 - (2.0 * gain - 1.0).powi(3));
                nu = 2.0;
                fresh_jacobian = true;
                if decrease <= FTOL * cost {
                    return Some(LmOutcome {
                        z,
                        cost,
                        converged: true,
                        iterations: iter + 1,
                        trace,
                    });
                }
                true
            } else {
                false
            }
        };
        if !accepted {
            damping *= nu;
            nu *= 2.0;
            if !damping.is_finite() {
                // no descent direction left at working precision
                return Some(LmOutcome { z, cost, converged: true, iterations: iter, trace });
            }
        }
    }
    Some(LmOutcome {
        z,
        cost,
        converged: false,
        iterations: max_iterations,
        trace,
    })
}

fn check_identifiable(data: &[Observation], k: usize) -> Result<()> {
    let distinct = |f: fn(&Observation) -> f64| {
        let mut xs: Vec<f64> = data.iter().map(f).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    let mut pairs: Vec<(f64, f64)> = data.iter().map(|o| (o.v, o.e)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.dedup();
    if distinct(|o| o.v) < 2 || distinct(|o| o.e) < 2 || pairs.len() < k {
        return Err(Error::NonIdentifiable(format!(
            "{} distinct (V, E) points for {k} parameters; V and E must both vary",
            pairs.len()
        )));
    }
    Ok(())
}

/// Fits the family of `init` to `data`, starting from `init` and from
/// `restarts - 1` jittered copies. The lowest objective wins, ties broken by
/// the lexicographically smallest parameter vector.
pub fn fit_model(
    data: &[Observation],
    init: &ScoringModel,
    opts: &FitOptions,
) -> Result<FittedModel> {
    init.validate()?;
    let family = init.family();
    let k = family.parameter_count();
    if data.len() < 10 * k {
        return Err(Error::InvalidInput(format!(
            "{:?} fit needs at least {} observations, got {}",
            family,
            10 * k,
            data.len()
        )));
    }
    for (i, o) in data.iter().enumerate() {
        if !(o.v > 0.0 && o.v <= 1.0 && o.e > 0.0 && o.e <= 1.0 && o.log_score.is_finite()) {
            return Err(Error::InvalidInput(format!("observation {i} is out of domain: {o:?}")));
        }
    }
    check_identifiable(data, k)?;
    if let ScoringModel::Threshold(t) = init {
        if t.softness == 0.0 {
            return Err(Error::InvalidInput(
                "hard thresholds cannot be fitted; use softness > 0".into(),
            ));
        }
    }

    let prep = Prepared {
        data,
        ln_v: data.iter().map(|o| o.v.ln()).collect(),
        ln_e: data.iter().map(|o| o.e.ln()).collect(),
    };
    let z_init = encode(init);
    let restarts = opts.restarts.max(1);

    let mut best: Option<(LmOutcome, Vec<f64>)> = None;
    let mut converged_restarts = 0;
    let mut best_any: Option<LmOutcome> = None;
    for restart in 0..restarts {
        let mut z0 = z_init.clone();
        if restart > 0 {
            let mut rng = substream(opts.seed, restart as u64);
            for zj in &mut z0 {
                let g: f64 = StandardNormal.sample(&mut rng);
                *zj += opts.jitter * g;
            }
        }
        let Some(out) = levenberg_marquardt(&prep, init, z0, opts.max_iterations) else {
            continue;
        };
        if out.converged {
            converged_restarts += 1;
            let pv = param_vector(&decode(init, &out.z));
            let better = match &best {
                None => true,
                Some((b, bpv)) => {
                    out.cost < b.cost
                        || (out.cost == b.cost
                            && pv.iter().zip(bpv).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne())
                                == Some(std::cmp::Ordering::Less))
                }
            };
            if better {
                best = Some((out, pv));
            }
        } else if best_any.as_ref().is_none_or(|b| out.cost < b.cost) {
            best_any = Some(out);
        }
    }

    let Some((out, _)) = best else {
        let failure = match best_any {
            Some(b) => FitFailure {
                best_params: param_vector(&decode(init, &b.z)),
                best_mse: 2.0 * b.cost / data.len() as f64,
                trace: b.trace,
            },
            None => FitFailure {
                best_params: param_vector(init),
                best_mse: f64::INFINITY,
                trace: Vec::new(),
            },
        };
        return Err(Error::NonConvergence {
            iterations: opts.max_iterations,
            failure: Box::new(failure),
        });
    };

    let model = decode(init, &out.z);
    let mut residuals = vec![0.0; data.len()];
    prep.residuals(&model, &mut residuals);
    let n = data.len();
    let mse = residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    let var = mse.max(f64::MIN_POSITIVE);
    let log_likelihoods = residuals.iter().map(|&r| gaussian_ll(r, var)).collect();
    Ok(FittedModel {
        model,
        fit_meta: FitMeta {
            seed: opts.seed,
            mse,
            n,
            restarts,
            converged_restarts,
            iterations: out.iterations,
        },
        log_likelihoods,
        residuals,
    })
}
