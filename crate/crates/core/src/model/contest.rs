//! Attack production and the ratio-form contest between attacker and defender.

use crate::error::{ensure_finite, Error, Result};
use crate::model::ModelParams;

/// `x^p` via `exp(p ln x)`, returning exactly 1 for a unit base.
pub(crate) fn pow_unit(x: f64, p: f64) -> f64 {
    if x == 1.0 {
        1.0
    } else {
        (p * x.ln()).exp()
    }
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x <= 0.0 || x > 1.0 {
        return Err(Error::Domain(format!("{name} must lie in (0, 1], got {x}")));
    }
    Ok(())
}

/// Attack effort `V^a E^b` without the baseline intensity.
pub fn attack_intensity(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    check_unit("V", v)?;
    check_unit("E", e)?;
    Ok(pow_unit(v, params.a) * pow_unit(e, params.b))
}

/// Adversarial exploitation rate `lambda0 V^a E^b`.
pub fn attack_rate(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    Ok(params.lambda0 * attack_intensity(v, e, params)?)
}

/// Mixed partial of the attack rate in natural coordinates,
/// `lambda0 a b V^(a-1) E^(b-1)`; positive everywhere (complementarity).
pub fn rate_cross_partial(v: f64, e: f64, params: &ModelParams) -> Result<f64> {
    check_unit("V", v)?;
    check_unit("E", e)?;
    Ok(params.lambda0
        * params.a
        * params.b
        * pow_unit(v, params.a - 1.0)
        * pow_unit(e, params.b - 1.0))
}

/// Probability that the attacker's exponential clock fires first.
pub fn contest_probability(attack: f64, defense: f64) -> Result<f64> {
    ensure_finite("lambda_A", attack)?;
    ensure_finite("lambda_D", defense)?;
    if attack < 0.0 || defense < 0.0 {
        return Err(Error::Domain("rates must be non-negative".into()));
    }
    if attack == 0.0 && defense == 0.0 {
        return Err(Error::Domain("both rates are zero".into()));
    }
    Ok(attack / (attack + defense))
}

/// Tsallis q-exponential `[1 + (q-1) x]^(-1/(q-1))`, with the ordinary
/// exponential `exp(-x)` at `q = 1`.
pub fn q_exponential(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return (-x).exp();
    }
    let base = 1.0 + (q - 1.0) * x;
    if base <= 0.0 {
        return 0.0;
    }
    base.powf(-1.0 / (q - 1.0))
}

/// Defender-win probability `theta / (u + theta)`.
pub fn q_exponential_defender_win(u: f64, theta: f64) -> Result<f64> {
    ensure_finite("u", u)?;
    ensure_finite("theta", theta)?;
    if theta <= 0.0 {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    if u < 0.0 {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    Ok(theta / (u + theta))
}
