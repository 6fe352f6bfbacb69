//! Specification diagnostics: finite differences, sign maps, Vuong comparison,
//! Sobol total effects and Monte Carlo uncertainty.

mod finite_diff;
mod signmap;
mod sobol;
mod uncertainty;
mod vuong;

use serde::{Deserialize, Serialize};

pub use finite_diff::{finite_diff_log_cross_partial, Domain};
pub use signmap::{
    cross_partial_sign_map, log_grid, NodeError, Sign, SignCell, SignMap, SignMapOptions,
    DEFAULT_SIGNMAP_STEP, DEFAULT_ZERO_TOL,
};
pub use sobol::{
    default_ieq_inputs, ieq_function, sobol_brute_force, sobol_total_effect, BruteForceOptions,
    Estimator, SobolInput, SobolOptions, SobolResult, DEFAULT_BOOTSTRAP, DEFAULT_BRUTE_FORCE_BUDGET,
};
pub use uncertainty::{
    monte_carlo_uncertainty, NoiseSpec, QuantilePoint, UncertaintyResult, QUANTILE_LEVELS,
};
pub use vuong::{
    run_vuong_experiment, synthetic_observations, vuong_test, DimensionCorrection, Verdict,
    VuongExperiment, VuongExperimentResult, VuongOptions, VuongResult, DEFAULT_Z_CRIT,
};

/// JSON envelope for any single diagnostic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "diagnostic", content = "result", rename_all = "snake_case")]
pub enum DiagnosticReport {
    SignMap(SignMap),
    Vuong(VuongExperimentResult),
    Sobol(SobolResult),
    Uncertainty(UncertaintyResult),
}

impl DiagnosticReport {
    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
