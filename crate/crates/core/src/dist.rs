//! Bounded univariate distributions with closed-form (or numerically inverted)
//! CDF and quantile. Sampling always goes through the quantile so that copula
//! constructions and plain draws share one code path.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    /// Beta(alpha, beta) rescaled to `[lo, hi]`.
    Beta { alpha: f64, beta: f64, lo: f64, hi: f64 },
    /// Log-normal with log-mean `mu` and log-sd `sigma`, truncated to `[lo, hi]`.
    LogNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    Fixed { value: f64 },
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match *self {
            Dist::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                bad(format!("uniform bounds must satisfy lo < hi, got [{lo}, {hi}]"))
            }
            Dist::Beta { alpha, beta, lo, hi }
                if !(alpha > 0.0 && beta > 0.0 && lo.is_finite() && hi.is_finite() && lo < hi) =>
            {
                bad(format!("invalid beta({alpha}, {beta}) on [{lo}, {hi}]"))
            }
            Dist::LogNormal { mu, sigma, lo, hi }
                if !(mu.is_finite()
                    && sigma > 0.0
                    && lo > 0.0
                    && hi.is_finite()
                    && lo < hi) =>
            {
                bad(format!("invalid log-normal({mu}, {sigma}) on [{lo}, {hi}]"))
            }
            Dist::Fixed { value } if !value.is_finite() => bad("fixed value must be finite".into()),
            _ => Ok(()),
        }
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Dist::Uniform { lo, hi } | Dist::Beta { lo, hi, .. } | Dist::LogNormal { lo, hi, .. } => {
                (lo, hi)
            }
            Dist::Fixed { value } => (value, value),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Dist::Fixed { .. })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Dist::Uniform { lo, hi } => (x - lo) / (hi - lo),
            Dist::Beta { alpha, beta, lo, hi } => beta_dist(alpha, beta).cdf((x - lo) / (hi - lo)),
            Dist::LogNormal { mu, sigma, lo, hi } => {
                let n = normal(mu, sigma);
                let (flo, fhi) = (n.cdf(lo.ln()), n.cdf(hi.ln()));
                (n.cdf(x.ln()) - flo) / (fhi - flo)
            }
            Dist::Fixed { .. } => 1.0,
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match *self {
            Dist::Uniform { lo, hi } => lo + p * (hi - lo),
            Dist::Beta { alpha, beta, lo, hi } => {
                lo + (hi - lo) * beta_dist(alpha, beta).inverse_cdf(p)
            }
            Dist::LogNormal { mu, sigma, lo, hi } => {
                let n = normal(mu, sigma);
                let (flo, fhi) = (n.cdf(lo.ln()), n.cdf(hi.ln()));
                n.inverse_cdf(flo + p * (fhi - flo)).exp().clamp(lo, hi)
            }
            Dist::Fixed { value } => value,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(open_unit(rng))
    }
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn beta_dist(alpha: f64, beta: f64) -> Beta {
    Beta::new(alpha, beta).expect("validated beta parameters")
}

fn normal(mu: f64, sigma: f64) -> Normal {
    Normal::new(mu, sigma).expect("validated normal parameters")
}


/// Stand-in marginals used by the synthetic population and the diagnostics.
/// They are placeholders chosen for shape, not estimates from real data.
pub mod defaults {
    use super::Dist;

    pub fn vulnerability() -> Dist {
        Dist::Beta { alpha: 2.0, beta: 1.5, lo: 0.0, hi: 1.0 }
    }

    pub fn exposure() -> Dist {
        Dist::Beta { alpha: 1.5, beta: 2.5, lo: 0.0, hi: 1.0 }
    }

    /// Median seven years, truncated to half a year .. fifty years.
    pub fn shelf_life() -> Dist {
        Dist::LogNormal { mu: 7f64.ln(), sigma: 0.8, lo: 0.5, hi: 50.0 }
    }

    pub fn governance() -> Dist {
        Dist::Uniform { lo: 1.0, hi: 1.3 }
    }
}
