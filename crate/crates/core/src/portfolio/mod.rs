//! Synthetic populations, portfolio ingestion, batch scoring and persistence.

mod batch;
mod ingest;
mod persist;
mod population;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OrganizationProfile;

pub use crate::stats::spearman;
pub use batch::{score_portfolio, BatchScore, PortfolioSummary, RowScoreError};
pub use ingest::{ingest_portfolio, IngestOptions, IngestReport, InputFormat, RowRejection, DEFAULT_ERROR_BUDGET};
pub use persist::{load_portfolio, persist_portfolio, PersistedPortfolio, FORMAT_VERSION};
pub use population::{gaussian_copula_correlation, generate_population, PopulationSpec, POPULATION_SPEARMAN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortfolioSource {
    Spec(PopulationSpec),
    File { path: String, format: InputFormat },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub profiles: Vec<OrganizationProfile>,
    pub provenance: Provenance,
    pub source: PortfolioSource,
}

impl Portfolio {
    pub fn new(profiles: Vec<OrganizationProfile>, source: PortfolioSource) -> Self {
        let provenance = match source {
            PortfolioSource::Spec(_) => Provenance::Synthetic,
            PortfolioSource::File { .. } => Provenance::Ingested,
        };
        Self { profiles, provenance, source }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Fails on the first repeated `org_id`.
    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.profiles.len());
        for p in &self.profiles {
            if !seen.insert(p.org_id.as_str()) {
                return Err(Error::DuplicateOrgId(p.org_id.clone()));
            }
        }
        Ok(())
    }
}
