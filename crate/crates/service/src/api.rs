//! Stateless JSON API under `/v1`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ieq_core::{Error, FieldError, ModelParams, OrganizationProfile, ScoreReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{Config, ParamsOverride};
use crate::surface::{ieq_surface, DEFAULT_SURFACE_H, DEFAULT_SURFACE_M};
use crate::whatif::{evaluate_whatif, score_profile, WhatIfRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    #[serde(flatten)]
    pub profile: OrganizationProfile,
    #[serde(default)]
    pub params: Option<ParamsOverride>,
    #[serde(default)]
    pub t0: Option<f64>,
    /// Fixed hazard instead of the sector prior.
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDefaults {
    #[serde(flatten)]
    pub params: ModelParams,
    pub theta: f64,
    pub z_crit: f64,
    pub t0: f64,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<FieldError>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody { kind: "bad_request", message: message.into(), fields: vec![] },
        }
    }

    fn non_finite() -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody {
                kind: "non_finite_output",
                message: "computed a non-finite value".into(),
                fields: vec![],
            },
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        let (status, kind, fields) = match err {
            Error::Validation(fields) => (StatusCode::BAD_REQUEST, "validation", fields),
            Error::UnknownSector(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_sector", vec![]),
            Error::InvalidInput(_) | Error::Domain(_) | Error::Json(_) => {
                (StatusCode::BAD_REQUEST, "bad_request", vec![])
            }
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal", vec![]),
        };
        Self { status, body: ErrorBody { kind, message, fields } }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

/// Serializes `value`, refusing to emit non-finite numbers.
fn finite_json<T: Serialize>(value: &T, finite: bool) -> ApiResult {
    if !finite {
        return Err(ApiError::non_finite());
    }
    Ok(Json(value).into_response())
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

pub fn router(cfg: Config) -> Router {
    Router::new()
        .route("/v1/score", post(score))
        .route("/v1/whatif", post(whatif))
        .route("/v1/surface", get(surface))
        .route("/v1/sectors", get(sectors))
        .route("/v1/params/defaults", get(defaults))
        .with_state(Arc::new(cfg))
}

pub fn score_request(req: &ScoreRequest, cfg: &Config) -> ieq_core::Result<ScoreReport> {
    let params = cfg.params_with(req.params.as_ref())?;
    let t0 = req.t0.unwrap_or_else(|| cfg.t0());
    score_profile(&req.profile, &params, &cfg.sector_table, t0, req.h)
}

async fn score(State(cfg): State<Arc<Config>>, body: Bytes) -> ApiResult {
    let req: ScoreRequest = parse_body(&body)?;
    let report = score_request(&req, &cfg)?;
    finite_json(&report, report.is_finite())
}

async fn whatif(State(cfg): State<Arc<Config>>, body: Bytes) -> ApiResult {
    let req: WhatIfRequest = parse_body(&body)?;
    let resp = evaluate_whatif(&req, &cfg)?;
    finite_json(&resp, resp.is_finite())
}

const SURFACE_KEYS: [&str; 9] = ["grid", "h", "H", "m", "M", "a", "b", "theta", "epsilon"];

async fn surface(
    State(cfg): State<Arc<Config>>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult {
    if let Some(k) = query.keys().find(|k| !SURFACE_KEYS.contains(&k.as_str())) {
        return Err(ApiError::bad_request(format!("unknown query parameter `{k}`")));
    }
    let num = |keys: &[&str]| -> Result<Option<f64>, ApiError> {
        match keys.iter().find_map(|k| query.get(*k)) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ApiError::bad_request(format!("`{}` is not a number: `{s}`", keys[0]))),
        }
    };
    let grid = match query.get("grid") {
        None => 21,
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| ApiError::bad_request(format!("`grid` is not a count: `{s}`")))?,
    };
    if grid > 501 {
        return Err(ApiError::bad_request("grid must be <= 501"));
    }
    let ov = ParamsOverride {
        a: num(&["a"])?,
        b: num(&["b"])?,
        theta: num(&["theta"])?,
        epsilon: num(&["epsilon"])?,
        ..ParamsOverride::default()
    };
    let params = cfg.params_with(Some(&ov))?;
    let h = num(&["h", "H"])?.unwrap_or(DEFAULT_SURFACE_H);
    let m = num(&["m", "M"])?.unwrap_or(DEFAULT_SURFACE_M);
    let s = ieq_surface(grid, h, m, &params)?;
    finite_json(&s, s.is_finite())
}

async fn sectors(State(cfg): State<Arc<Config>>) -> ApiResult {
    let finite = cfg.sector_table.iter().all(|s| s.mu_s.is_finite() && s.k.is_finite());
    finite_json(&cfg.sector_table, finite)
}

async fn defaults(State(cfg): State<Arc<Config>>) -> ApiResult {
    let d = ParamsDefaults {
        params: cfg.params,
        theta: cfg.params.theta(),
        z_crit: cfg.z_crit,
        t0: cfg.t0(),
    };
    finite_json(&d, d.theta.is_finite() && d.t0.is_finite())
}
