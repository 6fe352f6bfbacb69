//! IEQ surface over the `(V, E)` square at a fixed hazard and governance level.

use std::io::Write;

use ieq_core::{ieq_from_hazard, Error, ModelParams, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SURFACE_H: f64 = 0.6;
pub const DEFAULT_SURFACE_M: f64 = 1.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceNode {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub ieq: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub grid: usize,
    pub h: f64,
    pub m: f64,
    pub params: ModelParams,
    /// Row-major in `V`, then `E`.
    pub nodes: Vec<SurfaceNode>,
}

impl Surface {
    pub fn is_finite(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| [n.v, n.e, n.ieq, n.beta, n.gamma, n.r].iter().all(|x| x.is_finite()))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "V,E,ieq,beta,gamma,r")?;
        for n in &self.nodes {
            writeln!(out, "{},{},{},{},{},{}", n.v, n.e, n.ieq, n.beta, n.gamma, n.r)?;
        }
        Ok(())
    }
}

/// `grid` evenly spaced points from epsilon to 1 on each axis.
pub fn ieq_surface(grid: usize, h: f64, m: f64, params: &ModelParams) -> Result<Surface> {
    if grid < 2 {
        return Err(Error::InvalidInput(format!("grid must be >= 2, got {grid}")));
    }
    params.validate()?;
    if !(m <= params.m_max) {
        return Err(Error::InvalidInput(format!("M must not exceed m_max = {}", params.m_max)));
    }
    let eps = params.epsilon;
    let axis: Vec<f64> = (0..grid)
        .map(|i| if i + 1 == grid { 1.0 } else { eps + (1.0 - eps) * i as f64 / (grid - 1) as f64 })
        .collect();
    let mut nodes = Vec::with_capacity(grid * grid);
    for &v in &axis {
        for &e in &axis {
            let r = ieq_from_hazard("", v, e, h, m, params)?;
            nodes.push(SurfaceNode { v, e, ieq: r.ieq, beta: r.beta, gamma: r.gamma, r: r.r });
        }
    }
    Ok(Surface { grid, h, m, params: *params, nodes })
}
