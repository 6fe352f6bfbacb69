//! Command-line and HTTP front ends for the IEQ scoring engine.

pub mod api;
pub mod cli;
pub mod config;
pub mod surface;
pub mod whatif;

pub use api::{router, ScoreRequest};
pub use config::{Config, ConfigFile, ParamsOverride};
pub use whatif::{evaluate_whatif, Action, ActionKind, WhatIfRequest, WhatIfResponse};
