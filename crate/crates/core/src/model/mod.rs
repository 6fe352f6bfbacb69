//! Closed-form evaluation of the HNDL contest model.
//!
//! An organisation is described by its quantum-vulnerable fraction `V`, its
//! operational exposure `E`, the shelf life `T_D` of harvested data and a
//! governance multiplier `M`. The attacker exploits at rate `lambda0 V^a E^b`,
//! the defender neutralises harvested material at rate `mu`, and a CRQC arrives
//! according to a logistic prior per sector. Everything here is a pure function.

mod contest;
mod hazard;
mod params;
mod score;
mod structure;

pub use contest::{
    attack_intensity, attack_rate, contest_probability, q_exponential,
    q_exponential_defender_win, rate_cross_partial,
};
pub use hazard::temporal_hazard;
pub use params::{
    current_year, default_slope, ModelParams, SectorPrior, SectorTable, DEFAULT_EPSILON,
    DEFAULT_MEDIAN_YEAR, DEFAULT_M_MAX, DEFAULT_SECTOR,
};
pub use score::{ieq_from_hazard, ieq_score, FloorFlags, OrganizationProfile, ScoreReport};
pub use structure::{
    elasticities, log_cross_partial, log_linear_approx, natural_cross_partial, p_exploit,
    p_hndl, regime_ratio, Elasticities,
};
