//! Layered configuration: request overrides, then a config file, then the
//! built-in defaults.

use std::path::Path;

use ieq_core::diagnostics::DEFAULT_Z_CRIT;
use ieq_core::model::current_year;
use ieq_core::{Error, ModelParams, Result, SectorTable};
use serde::{Deserialize, Serialize};

/// Partial `ModelParams`. `theta` sets `mu` relative to the resulting `lambda0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsOverride {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lambda0: Option<f64>,
    pub mu: Option<f64>,
    pub theta: Option<f64>,
    pub epsilon: Option<f64>,
    pub m_max: Option<f64>,
}

impl ParamsOverride {
    pub fn apply(&self, base: &ModelParams) -> Result<ModelParams> {
        if self.mu.is_some() && self.theta.is_some() {
            return Err(Error::InvalidInput("set either mu or theta, not both".into()));
        }
        let mut p = *base;
        p.a = self.a.unwrap_or(p.a);
        p.b = self.b.unwrap_or(p.b);
        p.lambda0 = self.lambda0.unwrap_or(p.lambda0);
        p.mu = self.mu.unwrap_or(p.mu);
        if let Some(theta) = self.theta {
            p.mu = theta * p.lambda0;
        }
        p.epsilon = self.epsilon.unwrap_or(p.epsilon);
        p.m_max = self.m_max.unwrap_or(p.m_max);
        p.validate()?;
        Ok(p)
    }
}

/// On-disk configuration file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub params: Option<ParamsOverride>,
    pub sector_table: Option<SectorTable>,
    pub epsilon: Option<f64>,
    pub m_max: Option<f64>,
    pub z_crit: Option<f64>,
}

/// Effective configuration shared by the CLI and the HTTP handlers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub params: ModelParams,
    pub sector_table: SectorTable,
    pub z_crit: f64,
    /// Reference year; the current calendar year when unset.
    pub t0: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            sector_table: SectorTable::default(),
            z_crit: DEFAULT_Z_CRIT,
            t0: None,
        }
    }
}

impl Config {
    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.merge(file)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ConfigFile = serde_json::from_str(&text)?;
        Self::from_file(&file)
    }

    pub fn merge(&mut self, file: &ConfigFile) -> Result<()> {
        let mut ov = file.params.unwrap_or_default();
        ov.epsilon = file.epsilon.or(ov.epsilon);
        ov.m_max = file.m_max.or(ov.m_max);
        self.params = ov.apply(&self.params)?;
        if let Some(table) = &file.sector_table {
            self.sector_table = table.clone();
        }
        if let Some(z) = file.z_crit {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidInput(format!("z_crit must be > 0, got {z}")));
            }
            self.z_crit = z;
        }
        Ok(())
    }

    pub fn t0(&self) -> f64 {
        self.t0.unwrap_or_else(current_year)
    }

    /// Parameters for one request.
    pub fn params_with(&self, ov: Option<&ParamsOverride>) -> Result<ModelParams> {
        match ov {
            Some(ov) => ov.apply(&self.params),
            None => Ok(self.params),
        }
    }
}
