//! Compromise probability and its local structure: elasticities, regime
//! ratio, log-linearisation and both cross-partials.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::model::contest::{attack_intensity, check_unit, pow_unit};
use crate::model::ModelParams;

/// Log-sensitivities of the compromise probability to V and E.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elasticities {
    pub beta: f64,
    pub gamma: f64,
}

fn check_hazard(h: f64) -> Result<()> {
    ensure_finite("H", h)?;
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!("H must lie in [0, 1], got {h}")));
    }
    Ok(())
}

/// Conditional exploitation probability `u / (u + theta)`.
pub fn p_exploit(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    let u = attack_intensity(v, e, params)?;
    Ok(u / (u + params.theta()))
}

/// Compromise probability `H u / (u + theta)` with `u = V^a E^b`.
pub fn p_hndl(v: f64, e: f64, h: f64, params: &ModelParams) -> Result<f64> {
    check_hazard(h)?;
    Ok(h * p_exploit(v, e, params)?)
}

/// Endogenous elasticities `a theta / (u + theta)` and `b theta / (u + theta)`.
pub fn elasticities(v: f64, e: f64, params: &ModelParams) -> Result<Elasticities> {
    let u = attack_intensity(v, e, params)?;
    Ok(elasticities_at(u, params))
}

pub(crate) fn elasticities_at(u: f64, params: &ModelParams) -> Elasticities {
    let theta = params.theta();
    let share = theta / (u + theta);
    Elasticities {
        beta: params.a * share,
        gamma: params.b * share,
    }
}

/// Regime ratio `u / theta`: below 1 the defense dominates, above 1 the attack.
pub fn regime_ratio(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    Ok(attack_intensity(v, e, params)? / params.theta())
}

/// First-order expansion of `ln P` in `(ln V, ln E)` around `(v0, e0)`,
/// evaluated at `(v, e)`. Exact at the expansion point.
pub fn log_linear_approx(
    v0: f64,
    e0: f64,
    v: f64,
    e: f64,
    h: f64,
    params: &ModelParams,
) -> Result<f64> {
    check_unit("V", v)?;
    check_unit("E", e)?;
    let el = elasticities(v0, e0, params)?;
    let ln_p0 = p_hndl(v0, e0, h, params)?.ln();
    Ok(ln_p0 + el.beta * (v.ln() - v0.ln()) + el.gamma * (e.ln() - e0.ln()))
}

/// `d^2 P / dV dE` in natural coordinates. Changes sign at `u = theta`.
pub fn natural_cross_partial(v: f64, e: f64, h: f64, params: &ModelParams) -> Result<f64> {
    check_hazard(h)?;
    let u = attack_intensity(v, e, params)?;
    let theta = params.theta();
    let denom = (u + theta).powi(3);
    Ok(h * params.a
        * params.b
        * theta
        * pow_unit(v, params.a - 1.0)
        * pow_unit(e, params.b - 1.0)
        * (theta - u)
        / denom)
}

/// `d^2 ln P / d ln V d ln E = -a b theta u / (u + theta)^2`; strictly negative.
pub fn log_cross_partial(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    let u = attack_intensity(v, e, params)?;
    let theta = params.theta();
    Ok(-params.a * params.b * theta * u / (u + theta).powi(2))
}
