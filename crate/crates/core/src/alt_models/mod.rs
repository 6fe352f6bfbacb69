//! Alternative scoring families compared against the structural contest form.
//!
//! Each family isolates one structural deviation from the multiplicative
//! contest: CES aggregation lets V and E substitute for one another, the
//! log-additive form is separable in logs (no interaction at all), and the
//! threshold form gates the structural score by an activation boundary.

mod fit;

pub use fit::{fit_model, FitMeta, FitOptions, FittedModel, Observation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{p_exploit, ModelParams};

/// Probability floor used when a hard threshold is inactive.
pub const PROB_FLOOR: f64 = 1e-12;

/// Below this `|rho|` the CES aggregator switches to its geometric-mean limit.
pub const CES_RHO_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Structural,
    Ces,
    LogAdditive,
    Threshold,
}

impl Family {
    pub fn parameter_count(self) -> usize {
        match self {
            Family::Structural => 3,
            // rho is held fixed while fitting
            Family::Ces => 3,
            Family::LogAdditive => 3,
            Family::Threshold => 6,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structural" => Ok(Family::Structural),
            "ces" => Ok(Family::Ces),
            "log_additive" => Ok(Family::LogAdditive),
            "threshold" => Ok(Family::Threshold),
            other => Err(Error::InvalidInput(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Default for StructuralParams {
    fn default() -> Self {
        Self::from(&ModelParams::default())
    }
}

impl From<&ModelParams> for StructuralParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            a: p.a,
            b: p.b,
            theta: p.theta(),
        }
    }
}

/// `(w V^rho + (1-w) E^rho)^(s/rho)` fed into the same contest denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesParams {
    pub w: f64,
    pub rho: f64,
    pub s: f64,
    pub theta: f64,
}

impl Default for CesParams {
    fn default() -> Self {
        Self {
            w: 0.5,
            rho: -1.0,
            s: 1.0,
            theta: 1.0,
        }
    }
}

/// `w1 ln V + w2 ln E + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAdditiveParams {
    pub w1: f64,
    pub w2: f64,
    pub c: f64,
}

impl Default for LogAdditiveParams {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 0.5,
            c: 0.0,
        }
    }
}

/// Structural score gated by an activation on `(V, E)`. `softness = 0` is a
/// hard step at `(tau_v, tau_e)`; otherwise a product of logistic ramps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub tau_v: f64,
    pub tau_e: f64,
    pub softness: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            tau_v: 0.3,
            tau_e: 0.3,
            softness: 0.05,
            a: 1.0,
            b: 0.5,
            theta: 1.0,
        }
    }
}

impl ThresholdParams {
    /// Activation in `[0, 1]`.
    pub fn activation(&self, v: f64, e: f64) -> f64 {
        if self.softness == 0.0 {
            if v >= self.tau_v && e >= self.tau_e {
                1.0
            } else {
                0.0
            }
        } else {
            self.ln_activation(v, e).exp()
        }
    }

    fn ln_activation(&self, v: f64, e: f64) -> f64 {
        if self.softness == 0.0 {
            return self.activation(v, e).ln();
        }
        ln_sigmoid((v - self.tau_v) / self.softness) + ln_sigmoid((e - self.tau_e) / self.softness)
    }
}

fn ln_sigmoid(x: f64) -> f64 {
    // -softplus(-x), stable for both signs
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// CES aggregate of `(V, E)`; the `rho -> 0` limit `V^(s w) E^(s (1-w))` is
/// used when `|rho| < CES_RHO_LIMIT`.
pub fn ces_aggregator(v: f64, e: f64, p: &CesParams) -> f64 {
    ln_ces(v.ln(), e.ln(), p).exp()
}

fn ln_ces(ln_v: f64, ln_e: f64, p: &CesParams) -> f64 {
    if p.rho.abs() < CES_RHO_LIMIT {
        return p.s * (p.w * ln_v + (1.0 - p.w) * ln_e);
    }
    let inner = p.w * (p.rho * ln_v).exp() + (1.0 - p.w) * (p.rho * ln_e).exp();
    p.s / p.rho * inner.ln()
}

/// `ln(u / (u + theta))` from `ln u`, without forming `u`.
fn ln_contest(ln_u: f64, theta: f64) -> f64 {
    -(theta * (-ln_u).exp()).ln_1p()
}

/// A log-score together with whether the probability floor was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScore {
    pub value: f64,
    pub guarded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum ScoringModel {
    Structural(StructuralParams),
    Ces(CesParams),
    LogAdditive(LogAdditiveParams),
    Threshold(ThresholdParams),
}

impl ScoringModel {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Structural => ScoringModel::Structural(StructuralParams::default()),
            Family::Ces => ScoringModel::Ces(CesParams::default()),
            Family::LogAdditive => ScoringModel::LogAdditive(LogAdditiveParams::default()),
            Family::Threshold => ScoringModel::Threshold(ThresholdParams::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ScoringModel::Structural(_) => Family::Structural,
            ScoringModel::Ces(_) => Family::Ces,
            ScoringModel::LogAdditive(_) => Family::LogAdditive,
            ScoringModel::Threshold(_) => Family::Threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScoringModel::Structural(p) => p.a > 0.0 && p.b > 0.0 && p.theta > 0.0,
            ScoringModel::Ces(p) => {
                p.w > 0.0 && p.w < 1.0 && p.rho != 0.0 && p.rho.is_finite() && p.s > 0.0 && p.theta > 0.0
            }
            ScoringModel::LogAdditive(p) => p.w1 > 0.0 && p.w2 > 0.0 && p.c.is_finite(),
            ScoringModel::Threshold(p) => {
                p.tau_v > 0.0
                    && p.tau_v < 1.0
                    && p.tau_e > 0.0
                    && p.tau_e < 1.0
                    && p.softness >= 0.0
                    && p.a > 0.0
                    && p.b > 0.0
                    && p.theta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid model parameters: {self:?}")))
        }
    }

    /// Log-score at `(V, E)` together with the floor flag.
    pub fn log_score_checked(&self, v: f64, e: f64) -> LogScore {
        self.log_score_ln(v, e, v.ln(), e.ln())
    }

    pub(crate) fn log_score_ln(&self, v: f64, e: f64, ln_v: f64, ln_e: f64) -> LogScore {
        let plain = |value| LogScore {
            value,
            guarded: false,
        };
        match self {
            ScoringModel::Structural(p) => plain(ln_contest(p.a * ln_v + p.b * ln_e, p.theta)),
            ScoringModel::Ces(p) => plain(ln_contest(ln_ces(ln_v, ln_e, p), p.theta)),
            ScoringModel::LogAdditive(p) => plain(p.w1 * ln_v + p.w2 * ln_e + p.c),
            ScoringModel::Threshold(p) => {
                let ln_act = p.ln_activation(v, e);
                let value = ln_act + ln_contest(p.a * ln_v + p.b * ln_e, p.theta);
                if value < PROB_FLOOR.ln() {
                    LogScore {
                        value: PROB_FLOOR.ln(),
                        guarded: true,
                    }
                } else {
                    plain(value)
                }
            }
        }
    }

    pub fn log_score(&self, v: f64, e: f64) -> f64 {
        self.log_score_checked(v, e).value
    }

    /// `H M exp(log_score)`: the family's analogue of the compromise
    /// probability scaled by the governance multiplier.
    pub fn score(&self, v: f64, e: f64, h: f64, m: f64) -> f64 {
        h * m * self.log_score(v, e).exp()
    }

    /// Log-additive model tangent to the structural log-score at `(v0, e0)`:
    /// weights are the elasticities there and the intercept matches the value.
    pub fn log_additive_tangent(params: &ModelParams, v0: f64, e0: f64) -> Result<Self> {
        let el = crate::model::elasticities(v0, e0, params)?;
        let at = p_exploit(v0, e0, params)?.ln();
        Ok(ScoringModel::LogAdditive(LogAdditiveParams {
            w1: el.beta,
            w2: el.gamma,
            c: at - el.beta * v0.ln() - el.gamma * e0.ln(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::attack_intensity;

    #[test]
    fn ces_diagonal_idempotence() {
        for &(w, rho, s) in &[(0.3, -1.0, 1.0), (0.7, 2.0, 0.8), (0.5, 1e-9, 1.5), (0.1, -3.0, 2.0)]
        {
            let p = CesParams { w, rho, s, theta: 1.0 };
            for x in [0.05, 0.4, 1.0] {
                assert!((ces_aggregator(x, x, &p) - x.powf(s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ces_special_means() {
        let arith = CesParams { w: 0.5, rho: 1.0, s: 1.0, theta: 1.0 };
        assert!((ces_aggregator(0.2, 0.8, &arith) - 0.5).abs() < 1e-15);
        let harm = CesParams { rho: -1.0, ..arith };
        assert!((ces_aggregator(0.2, 0.8, &harm) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn ces_rho_zero_continuity() {
        let (v, e) = (0.3f64, 0.7f64);
        let geo = |w: f64, s: f64| v.powf(s * w) * e.powf(s * (1.0 - w));
        for rho in [1e-9, -1e-9, 1e-7, -1e-7] {
            let p = CesParams { w: 0.4, rho, s: 1.2, theta: 1.0 };
            assert!((ces_aggregator(v, e, &p) - geo(0.4, 1.2)).abs() < 1e-6);
        }
    }

    #[test]
    fn structural_family_agrees_with_core_model() {
        let params = ModelParams {
            a: 1.3,
            b: 0.6,
            ..ModelParams::with_theta(0.4)
        };
        let model = ScoringModel::Structural(StructuralParams::from(&params));
        for &(v, e) in &[(0.01, 0.01), (0.2, 0.9), (1.0, 1.0), (0.6, 0.05)] {
            let expected = p_exploit(v, e, &params).unwrap();
            assert!((model.log_score(v, e).exp() / expected - 1.0).abs() < 1e-14);
            let h = 0.7;
            let p = crate::model::p_hndl(v, e, h, &params).unwrap();
            assert!((model.score(v, e, h, 1.0) / p - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tangent_log_additive_matches_at_point() {
        let params = ModelParams::default();
        let m = ScoringModel::log_additive_tangent(&params, 0.3, 0.6).unwrap();
        let s = ScoringModel::Structural(StructuralParams::default());
        assert!((m.log_score(0.3, 0.6) - s.log_score(0.3, 0.6)).abs() < 1e-14);
        assert!((m.log_score(0.35, 0.6) - s.log_score(0.35, 0.6)).abs() > 1e-6);
    }

    #[test]
    fn hard_threshold_is_guarded() {
        let m = ScoringModel::Threshold(ThresholdParams {
            softness: 0.0,
            ..ThresholdParams::default()
        });
        let inactive = m.log_score_checked(0.1, 0.9);
        assert!(inactive.guarded);
        assert_eq!(inactive.value, PROB_FLOOR.ln());
        let active = m.log_score_checked(0.5, 0.9);
        assert!(!active.guarded && active.value.is_finite());
    }

    #[test]
    fn hard_threshold_breaks_homogeneity() {
        let t = ThresholdParams {
            softness: 0.0,
            ..ThresholdParams::default()
        };
        let params = ModelParams::default();
        let gated = |v: f64, e: f64| t.activation(v, e) * attack_intensity(v, e, &params).unwrap();
        let (v, e, c) = (0.5, 0.5, 0.5);
        let lhs = gated(c * v, c * e);
        let rhs = c.powf(params.a + params.b) * gated(v, e);
        assert!((lhs - rhs).abs() > 1e-3, "witness {lhs} vs {rhs}");
    }

    #[test]
    fn soft_threshold_finite_everywhere() {
        let m = ScoringModel::Threshold(ThresholdParams::default());
        for v in [0.01, 0.3, 1.0] {
            for e in [0.01, 0.3, 1.0] {
                assert!(m.log_score(v, e).is_finite());
            }
        }
    }

    #[test]
    fn serializes_with_family_tag() {
        let m = ScoringModel::Ces(CesParams::default());
        let json = serde_json::to_value(m).unwrap();
        assert_eq!(json["family"], "ces");
        assert_eq!(json["parameters"]["rho"], -1.0);
        let back: ScoringModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn validation_rejects_zero_rho() {
        let m = ScoringModel::Ces(CesParams { rho: 0.0, ..CesParams::default() });
        assert!(m.validate().is_err());
    }
}
