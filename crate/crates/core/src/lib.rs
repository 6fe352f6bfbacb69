//! Exposure scoring for harvest-now-decrypt-later (HNDL) risk.
//!
//! The crate is organised in four layers:
//!
//! * [`model`]: closed-form evaluation of the contest model (temporal hazard,
//!   attack/defense rates, compromise probability, endogenous elasticities,
//!   cross-partials) and the operational IEQ index.
//! * [`alt_models`]: CES, log-additive and threshold scoring families behind a
//!   common [`alt_models::ScoringModel`] interface, plus least-squares fitting.
//! * [`diagnostics`]: finite-difference cross-partial sign maps, the Vuong
//!   non-nested test, Sobol total-effect indices and Monte Carlo uncertainty.
//! * [`portfolio`]: synthetic populations, CSV/JSON ingestion, batch scoring
//!   and JSON-lines persistence.

pub mod alt_models;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod model;
pub mod portfolio;
pub mod rng;
pub mod stats;

pub use error::{Error, FieldError, Result};
pub use model::{
    ieq_from_hazard, ieq_score, ModelParams, OrganizationProfile, ScoreReport, SectorPrior,
    SectorTable,
};
