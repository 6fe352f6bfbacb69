//! Sign maps of the log cross-partial over a log-spaced `(V, E)` grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::finite_diff::{finite_diff_log_cross_partial, Domain};
use crate::alt_models::ScoringModel;
use crate::error::{Error, Result};
use crate::model::DEFAULT_EPSILON;

/// Values with `|x| < tol` count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
pub const DEFAULT_SIGNMAP_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Positive,
}

impl Sign {
    pub fn classify(x: f64, tol: f64) -> Self {
        if x.abs() < tol {
            Sign::Zero
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCell {
    pub v: f64,
    pub e: f64,
    pub value: f64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeError {
    pub v: f64,
    pub e: f64,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignMapOptions {
    pub grid_size: usize,
    pub tol: f64,
    /// Relative finite-difference step.
    pub h: f64,
    /// Lower edge of the domain; the grid lies strictly inside `[epsilon, 1]`.
    pub epsilon: f64,
}

impl Default for SignMapOptions {
    fn default() -> Self {
        Self {
            grid_size: 64,
            tol: DEFAULT_ZERO_TOL,
            h: DEFAULT_SIGNMAP_STEP,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignMap {
    pub model: ScoringModel,
    pub grid_size: usize,
    pub tol: f64,
    pub h: f64,
    /// Grid coordinates shared by both axes.
    pub nodes: Vec<f64>,
    pub cells: Vec<SignCell>,
    pub errors: Vec<NodeError>,
    pub fraction_negative: f64,
    pub fraction_zero: f64,
    pub fraction_positive: f64,
}

impl SignMap {
    pub fn count(&self, sign: Sign) -> usize {
        self.cells.iter().filter(|c| c.sign == sign).count()
    }

    /// CSV with columns `V,E,value,sign`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["V", "E", "value", "sign"])
            .map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([
                c.v.to_string(),
                c.e.to_string(),
                c.value.to_string(),
                c.sign.symbol().to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `n` log-spaced points strictly inside `(epsilon, 1)`.
pub fn log_grid(n: usize, epsilon: f64) -> Vec<f64> {
    let ln_eps = epsilon.ln();
    (0..n)
        .map(|i| (ln_eps * (1.0 - (i + 1) as f64 / (n + 1) as f64)).exp())
        .collect()
}

pub fn cross_partial_sign_map(model: &ScoringModel, opts: &SignMapOptions) -> Result<SignMap> {
    if opts.grid_size < 4 {
        return Err(Error::InvalidInput(format!(
            "grid_size must be >= 4, got {}",
            opts.grid_size
        )));
    }
    model.validate()?;
    let nodes = log_grid(opts.grid_size, opts.epsilon);
    let domain = Domain::unit_with_floor(opts.epsilon);
    let f = |v: f64, e: f64| model.log_score(v, e);

    let mut cells = Vec::with_capacity(nodes.len() * nodes.len());
    let mut errors = Vec::new();
    for &v in &nodes {
        for &e in &nodes {
            match finite_diff_log_cross_partial(f, v, e, opts.h, domain) {
                Ok(value) => cells.push(SignCell {
                    v,
                    e,
                    value,
                    sign: Sign::classify(value, opts.tol),
                }),
                Err(err) => errors.push(NodeError {
                    v,
                    e,
                    message: err.to_string(),
                }),
            }
        }
    }
    let total = cells.len().max(1) as f64;
    let frac = |s: Sign| cells.iter().filter(|c| c.sign == s).count() as f64 / total;
    Ok(SignMap {
        model: *model,
        grid_size: opts.grid_size,
        tol: opts.tol,
        h: opts.h,
        fraction_negative: frac(Sign::Negative),
        fraction_zero: frac(Sign::Zero),
        fraction_positive: frac(Sign::Positive),
        nodes,
        cells,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alt_models::Family;

    fn map(family: Family, n: usize) -> SignMap {
        let opts = SignMapOptions { grid_size: n, ..SignMapOptions::default() };
        cross_partial_sign_map(&ScoringModel::default_for(family), &opts).unwrap()
    }

    #[test]
    fn grid_strictly_interior() {
        let g = log_grid(8, 0.01);
        assert_eq!(g.len(), 8);
        assert!(g[0] > 0.01 && g[7] < 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn structural_all_negative_at_every_size() {
        for n in [8, 16, 32, 64] {
            let m = map(Family::Structural, n);
            assert!(m.errors.is_empty());
            assert_eq!(m.fraction_negative, 1.0, "grid {n}");
        }
    }

    #[test]
    fn log_additive_all_zero_and_ces_all_positive() {
        let la = map(Family::LogAdditive, 16);
        assert_eq!(la.fraction_zero, 1.0);
        let ces = map(Family::Ces, 16);
        assert_eq!(ces.fraction_positive, 1.0);
    }

    #[test]
    fn small_grid_rejected() {
        let opts = SignMapOptions { grid_size: 3, ..SignMapOptions::default() };
        assert!(cross_partial_sign_map(&ScoringModel::default_for(Family::Ces), &opts).is_err());
    }

    #[test]
    fn oversized_step_recorded_per_node() {
        let opts = SignMapOptions { grid_size: 4, h: 0.09, epsilon: 0.8, ..SignMapOptions::default() };
        let m = cross_partial_sign_map(&ScoringModel::default_for(Family::Structural), &opts).unwrap();
        assert!(!m.errors.is_empty());
        assert_eq!(m.errors.len() + m.cells.len(), 16);
    }

    #[test]
    fn csv_export() {
        let m = map(Family::Structural, 4);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "V,E,value,sign");
        assert_eq!(lines.len(), 17);
        assert!(lines[1].ends_with(",-"));
    }
}
