use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_M_MAX: f64 = 2.0;
pub const DEFAULT_SECTOR: &str = "generic";
/// Median CRQC maturity year of the built-in `generic` sector. This is a
/// placeholder prior, not a measured value.
pub const DEFAULT_MEDIAN_YEAR: f64 = 2035.0;

/// Logistic slope that puts the hazard at 0.1 / 0.9 ten years either side of
/// the sector median.
pub fn default_slope() -> f64 {
    9f64.ln() / 10.0
}

/// Structural constants of the contest model.
///
/// Only `theta = mu / lambda0` enters the compromise probability; the two rates
/// are kept separately so that race simulations can use absolute intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Vulnerability exponent.
    pub a: f64,
    /// Exposure exponent.
    pub b: f64,
    /// Baseline adversarial intensity.
    pub lambda0: f64,
    /// Defender remediation / value-decay rate.
    pub mu: f64,
    /// Floor applied to H, V and E before computing the index.
    pub epsilon: f64,
    /// Upper bound accepted for the governance multiplier.
    pub m_max: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.5,
            lambda0: 1.0,
            mu: 1.0,
            epsilon: DEFAULT_EPSILON,
            m_max: DEFAULT_M_MAX,
        }
    }
}

impl ModelParams {
    /// Default parameters with the defense/attack ratio set to `theta`
    /// (lambda0 = 1, mu = theta).
    pub fn with_theta(theta: f64) -> Self {
        Self {
            mu: theta,
            ..Self::default()
        }
    }

    pub fn theta(&self) -> f64 {
        self.mu / self.lambda0
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut positive = |name: &str, x: f64| {
            if !(x.is_finite() && x > 0.0) {
                errs.push(FieldError::new(name, format!("must be finite and > 0, got {x}")));
            }
        };
        positive("a", self.a);
        positive("b", self.b);
        positive("lambda0", self.lambda0);
        positive("mu", self.mu);
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            errs.push(FieldError::new(
                "epsilon",
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        if !(self.m_max.is_finite() && self.m_max >= 1.0) {
            errs.push(FieldError::new(
                "m_max",
                format!("must be finite and >= 1, got {}", self.m_max),
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Logistic prior on the CRQC arrival year for one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorPrior {
    pub sector_id: String,
    /// Median maturity year.
    pub mu_s: f64,
    /// Logistic slope per year.
    #[serde(default = "default_slope")]
    pub k: f64,
}

impl SectorPrior {
    pub fn new(sector_id: impl Into<String>, mu_s: f64) -> Self {
        Self {
            sector_id: sector_id.into(),
            mu_s,
            k: default_slope(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !self.mu_s.is_finite() {
            errs.push(FieldError::new("mu_s", "must be finite"));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            errs.push(FieldError::new("k", format!("must be finite and > 0, got {}", self.k)));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Sector priors keyed by `sector_id`. Serialized as a JSON array of priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SectorPrior>", into = "Vec<SectorPrior>")]
pub struct SectorTable {
    sectors: BTreeMap<String, SectorPrior>,
}

impl Default for SectorTable {
    /// A single `generic` sector with median year 2035.
    fn default() -> Self {
        Self::from_priors([SectorPrior::new(DEFAULT_SECTOR, DEFAULT_MEDIAN_YEAR)])
            .expect("default sector table is valid")
    }
}

impl SectorTable {
    pub fn from_priors(priors: impl IntoIterator<Item = SectorPrior>) -> Result<Self> {
        let mut sectors = BTreeMap::new();
        for prior in priors {
            prior.validate()?;
            let id = prior.sector_id.clone();
            if sectors.insert(id.clone(), prior).is_some() {
                return Err(Error::InvalidInput(format!("duplicate sector `{id}`")));
            }
        }
        Ok(Self { sectors })
    }

    pub fn get(&self, sector_id: &str) -> Result<&SectorPrior> {
        self.sectors
            .get(sector_id)
            .ok_or_else(|| Error::UnknownSector(sector_id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &SectorPrior> {
        self.sectors.values()
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }
}

impl TryFrom<Vec<SectorPrior>> for SectorTable {
    type Error = Error;

    fn try_from(priors: Vec<SectorPrior>) -> Result<Self> {
        Self::from_priors(priors)
    }
}

impl From<SectorTable> for Vec<SectorPrior> {
    fn from(table: SectorTable) -> Self {
        table.sectors.into_values().collect()
    }
}

/// Current calendar year, used when no assessment epoch is given.
pub fn current_year() -> f64 {
    use chrono::Datelike;
    f64::from(chrono::Utc::now().year())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_is_ratio_of_rates() {
        let p = ModelParams {
            lambda0: 4.0,
            mu: 2.0,
            ..ModelParams::default()
        };
        assert_eq!(p.theta(), 0.5);
        assert_eq!(ModelParams::with_theta(3.0).theta(), 3.0);
    }

    #[test]
    fn validation_lists_every_bad_field() {
        let p = ModelParams {
            a: -1.0,
            mu: 0.0,
            epsilon: 1.5,
            ..ModelParams::default()
        };
        match p.validate() {
            Err(Error::Validation(errs)) => {
                let fields: Vec<_> = errs.iter().map(|e| e.field.as_str()).collect();
                assert_eq!(fields, ["a", "mu", "epsilon"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_params_json_fills_defaults() {
        let p: ModelParams = serde_json::from_str(r#"{"mu": 2.5}"#).unwrap();
        assert_eq!(p.a, 1.0);
        assert_eq!(p.b, 0.5);
        assert_eq!(p.theta(), 2.5);
        assert!(serde_json::from_str::<ModelParams>(r#"{"alpha": 1}"#).is_err());
    }

    #[test]
    fn sector_table_round_trips_as_array() {
        let table = SectorTable::from_priors([
            SectorPrior::new("finance", 2033.0),
            SectorPrior::new("generic", 2035.0),
        ])
        .unwrap();
        let json = serde_json::to_string(&table).unwrap();
        assert!(json.starts_with('['));
        let back: SectorTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, table);
        assert!(matches!(table.get("energy"), Err(Error::UnknownSector(_))));
    }

    #[test]
    fn duplicate_sector_rejected() {
        let r = SectorTable::from_priors([
            SectorPrior::new("x", 2030.0),
            SectorPrior::new("x", 2031.0),
        ]);
        assert!(r.is_err());
    }
}
