use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Portfolio, PortfolioSource};
use crate::dist::{defaults, open_unit, Dist};
use crate::error::{Error, Result};
use crate::model::{OrganizationProfile, DEFAULT_SECTOR};
use crate::rng::substream;
use crate::stats::normal_cdf;

/// Published population-level rank correlation between V and E.
pub const POPULATION_SPEARMAN: f64 = 0.078;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub n: usize,
    pub v_dist: Dist,
    pub e_dist: Dist,
    /// Spearman target for `(V, E)`.
    pub rank_correlation_target: f64,
    pub td_dist: Dist,
    pub m_dist: Dist,
    pub sector_mix: BTreeMap<String, f64>,
    /// Per-sector Spearman targets replacing the population value.
    pub sector_correlation: BTreeMap<String, f64>,
    pub seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            n: 40_000,
            v_dist: defaults::vulnerability(),
            e_dist: defaults::exposure(),
            rank_correlation_target: POPULATION_SPEARMAN,
            td_dist: defaults::shelf_life(),
            m_dist: defaults::governance(),
            sector_mix: BTreeMap::from([(DEFAULT_SECTOR.to_string(), 1.0)]),
            sector_correlation: BTreeMap::new(),
            seed: 0,
        }
    }
}

/// Pearson correlation of the latent Gaussian pair that yields Spearman `rho_s`.
pub fn gaussian_copula_correlation(rho_s: f64) -> f64 {
    2.0 * (PI * rho_s / 6.0).sin()
}

fn within(d: &Dist, lo: f64, hi: f64) -> bool {
    let (a, b) = d.support();
    a >= lo && b <= hi
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        for (name, d) in [
            ("v_dist", &self.v_dist),
            ("e_dist", &self.e_dist),
            ("td_dist", &self.td_dist),
            ("m_dist", &self.m_dist),
        ] {
            d.validate()
                .map_err(|e| Error::InvalidInput(format!("{name}: {e}")))?;
        }
        if !within(&self.v_dist, 0.0, 1.0) || !within(&self.e_dist, 0.0, 1.0) {
            return Err(Error::InvalidInput("V and E distributions must lie in [0, 1]".into()));
        }
        if self.td_dist.support().0 <= 0.0 {
            return Err(Error::InvalidInput("T_D distribution must be positive".into()));
        }
        if self.m_dist.support().0 < 1.0 {
            return Err(Error::InvalidInput("M distribution must lie in [1, M_max]".into()));
        }
        if self.sector_mix.is_empty() {
            return Err(Error::InvalidInput("sector_mix must not be empty".into()));
        }
        if self.sector_mix.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("sector weights must be >= 0".into()));
        }
        let total: f64 = self.sector_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("sector weights sum to {total}, expected 1")));
        }
        if let Some(s) = self.sector_correlation.keys().find(|s| !self.sector_mix.contains_key(*s)) {
            return Err(Error::InvalidInput(format!(
                "correlation override for sector `{s}` not in sector_mix"
            )));
        }
        let degenerate = self.v_dist.is_degenerate() || self.e_dist.is_degenerate();
        let targets = std::iter::once(("population", self.rank_correlation_target))
            .chain(self.sector_correlation.iter().map(|(k, v)| (k.as_str(), *v)));
        for (scope, rho) in targets {
            if !(rho > -1.0 && rho < 1.0) {
                return Err(Error::Infeasible(format!(
                    "{scope} rank correlation {rho} outside (-1, 1)"
                )));
            }
            if degenerate && rho != 0.0 {
                return Err(Error::Infeasible(format!(
                    "{scope} rank correlation {rho} requested with a degenerate V or E marginal"
                )));
            }
        }
        Ok(())
    }
}

/// Draws a synthetic population. Each row uses its own substream, so the
/// result is independent of thread count.
pub fn generate_population(spec: &PopulationSpec) -> Result<Portfolio> {
    spec.validate()?;
    let mut cumulative = Vec::with_capacity(spec.sector_mix.len());
    let mut acc = 0.0;
    for (sector, w) in &spec.sector_mix {
        acc += w;
        let rho_s = spec
            .sector_correlation
            .get(sector)
            .copied()
            .unwrap_or(spec.rank_correlation_target);
        cumulative.push((acc, sector.as_str(), gaussian_copula_correlation(rho_s)));
    }
    let width = spec.n.to_string().len().max(6);

    let profiles = (0..spec.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(spec.seed, i as u64);
            let pick = open_unit(&mut rng) * acc;
            let &(_, sector, rho) = cumulative
                .iter()
                .find(|(c, _, _)| pick < *c)
                .unwrap_or_else(|| cumulative.last().expect("non-empty mix"));
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let x = z1;
            let y = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
            OrganizationProfile {
                org_id: format!("org-{i:0width$}"),
                v: spec.v_dist.quantile(normal_cdf(x)),
                e: spec.e_dist.quantile(normal_cdf(y)),
                t_d: spec.td_dist.sample(&mut rng),
                sector_id: sector.to_string(),
                m: spec.m_dist.sample(&mut rng),
            }
        })
        .collect();
    Ok(Portfolio::new(profiles, PortfolioSource::Spec(spec.clone())))
}
