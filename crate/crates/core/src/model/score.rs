//! The operational IEQ index and the per-organisation score report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::model::contest::pow_unit;
use crate::model::hazard::temporal_hazard;
use crate::model::structure::elasticities_at;
use crate::model::{ModelParams, SectorPrior};

/// Inputs describing one organisation.
///
/// Field names are snake_case on the wire; the upper-case column names used
/// in CSV files are accepted as aliases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganizationProfile {
    pub org_id: String,
    /// Quantum-vulnerable share of the cryptographic surface.
    #[serde(alias = "V")]
    pub v: f64,
    /// Operational exposure of that surface.
    #[serde(alias = "E")]
    pub e: f64,
    /// Adversarial shelf life in years.
    #[serde(alias = "T_D")]
    pub t_d: f64,
    pub sector_id: String,
    /// Governance penalty multiplier.
    #[serde(alias = "M")]
    pub m: f64,
}

impl OrganizationProfile {
    /// Checks raw ranges. V and E may be zero; floors are applied when scoring.
    pub fn validate(&self, m_max: f64) -> Result<()> {
        let errs = self.field_errors(m_max);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn field_errors(&self, m_max: f64) -> Vec<FieldError> {
        let mut errs = Vec::new();
        if self.org_id.trim().is_empty() {
            errs.push(FieldError::new("org_id", "must not be empty"));
        }
        for (name, x) in [("v", self.v), ("e", self.e)] {
            if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
                errs.push(FieldError::new(name, format!("must lie in [0, 1], got {x}")));
            }
        }
        if !(self.t_d.is_finite() && self.t_d > 0.0) {
            errs.push(FieldError::new(
                "t_d",
                format!("must be finite and > 0, got {}", self.t_d),
            ));
        }
        if self.sector_id.trim().is_empty() {
            errs.push(FieldError::new("sector_id", "must not be empty"));
        }
        if !(self.m.is_finite() && self.m >= 1.0 && self.m <= m_max) {
            errs.push(FieldError::new(
                "m",
                format!("must lie in [1, {m_max}], got {}", self.m),
            ));
        }
        errs
    }
}

/// Which inputs were raised to the floor before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorFlags {
    pub h: bool,
    pub v: bool,
    pub e: bool,
}

impl FloorFlags {
    pub fn any(&self) -> bool {
        self.h || self.v || self.e
    }
}

/// Per-organisation scoring output.
///
/// `u`, `r`, `p_exploit`, `p_hndl`, `beta` and `gamma` are evaluated at the
/// floored `(V', E')`; `h` is the unfloored temporal hazard, so
/// `p_hndl == h * p_exploit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub org_id: String,
    pub h: f64,
    pub u: f64,
    pub r: f64,
    pub p_exploit: f64,
    pub p_hndl: f64,
    pub beta: f64,
    pub gamma: f64,
    pub ieq: f64,
    pub floored: FloorFlags,
    pub clipped: bool,
}

impl ScoreReport {
    /// True when every numeric field is finite.
    pub fn is_finite(&self) -> bool {
        [
            self.h,
            self.u,
            self.r,
            self.p_exploit,
            self.p_hndl,
            self.beta,
            self.gamma,
            self.ieq,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// Scores one organisation: temporal hazard from its sector prior, then the
/// floored and clipped index.
pub fn ieq_score(
    profile: &OrganizationProfile,
    params: &ModelParams,
    prior: &SectorPrior,
    t0: f64,
) -> Result<ScoreReport> {
    params.validate()?;
    profile.validate(params.m_max)?;
    let h = temporal_hazard(t0, profile.t_d, prior)?;
    ieq_from_hazard(&profile.org_id, profile.v, profile.e, h, profile.m, params)
}

/// Index for a known hazard `h`: `100 min(1, H' V'^beta E'^gamma M)` with
/// the elasticities taken at the floored point.
pub fn ieq_from_hazard(
    org_id: &str,
    v: f64,
    e: f64,
    h: f64,
    m: f64,
    params: &ModelParams,
) -> Result<ScoreReport> {
    let mut errs = Vec::new();
    for (name, x) in [("v", v), ("e", e), ("h", h)] {
        if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
            errs.push(FieldError::new(name, format!("must lie in [0, 1], got {x}")));
        }
    }
    if !(m.is_finite() && m >= 1.0) {
        errs.push(FieldError::new("m", format!("must be >= 1, got {m}")));
    }
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }

    let eps = params.epsilon;
    let floored = FloorFlags {
        h: h < eps,
        v: v < eps,
        e: e < eps,
    };
    let (hf, vf, ef) = (h.max(eps), v.max(eps), e.max(eps));

    let u = pow_unit(vf, params.a) * pow_unit(ef, params.b);
    let theta = params.theta();
    let el = elasticities_at(u, params);
    let p_exploit = u / (u + theta);
    let raw = hf * pow_unit(vf, el.beta) * pow_unit(ef, el.gamma) * m;
    let clipped = raw >= 1.0;

    Ok(ScoreReport {
        org_id: org_id.to_string(),
        h,
        u,
        r: u / theta,
        p_exploit,
        p_hndl: h * p_exploit,
        beta: el.beta,
        gamma: el.gamma,
        ieq: 100.0 * raw.min(1.0),
        floored,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::p_hndl;

    fn profile(v: f64, e: f64, t_d: f64, m: f64) -> OrganizationProfile {
        OrganizationProfile {
            org_id: "org-1".into(),
            v,
            e,
            t_d,
            sector_id: "generic".into(),
            m,
        }
    }

    #[test]
    fn reference_point_index() {
        let r = ieq_from_hazard("x", 1.0, 1.0, 0.6, 1.15, &ModelParams::default()).unwrap();
        assert!((r.ieq - 69.0).abs() < 1e-9);
        assert!((r.p_hndl - 0.3).abs() < 1e-12);
        assert_eq!((r.beta, r.gamma, r.r), (0.5, 0.25, 1.0));
        assert!(!r.clipped && !r.floored.any());
    }

    #[test]
    fn clip_branch() {
        let r = ieq_from_hazard("x", 1.0, 1.0, 0.9, 1.2, &ModelParams::default()).unwrap();
        assert_eq!(r.ieq, 100.0);
        assert!(r.clipped);
    }

    #[test]
    fn floor_branch() {
        let r = ieq_from_hazard("x", 0.0, 0.5, 0.6, 1.0, &ModelParams::default()).unwrap();
        assert!(r.floored.v && !r.floored.e && !r.floored.h);
        assert!(r.ieq.is_finite() && r.ieq > 0.0);
        let r = ieq_from_hazard("x", 0.5, 0.5, 0.0, 1.0, &ModelParams::default()).unwrap();
        assert!(r.floored.h && r.ieq > 0.0);
        assert_eq!(r.p_hndl, 0.0);
    }

    #[test]
    fn report_identities() {
        let params = ModelParams {
            a: 1.4,
            b: 0.3,
            ..ModelParams::with_theta(0.2)
        };
        let r = ieq_from_hazard("x", 0.35, 0.7, 0.45, 1.1, &params).unwrap();
        assert_eq!(r.p_hndl, r.h * r.p_exploit);
        assert!((r.beta / params.a - (1.0 - r.p_exploit)).abs() < 1e-15);
        assert!((r.gamma / params.b - (1.0 - r.p_exploit)).abs() < 1e-15);
        assert!((r.p_hndl - p_hndl(0.35, 0.7, 0.45, &params).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn full_score_uses_sector_hazard() {
        let prior = SectorPrior::new("generic", 2035.0);
        let r = ieq_score(&profile(1.0, 1.0, 5.0, 1.0), &ModelParams::default(), &prior, 2030.0)
            .unwrap();
        assert_eq!(r.h, 0.5);
        assert!((r.ieq - 50.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_profile_lists_fields() {
        let prior = SectorPrior::new("generic", 2035.0);
        let bad = OrganizationProfile {
            org_id: "".into(),
            ..profile(1.2, 0.5, -1.0, 0.5)
        };
        match ieq_score(&bad, &ModelParams::default(), &prior, 2026.0) {
            Err(Error::Validation(errs)) => {
                let fields: Vec<_> = errs.iter().map(|e| e.field.as_str()).collect();
                assert_eq!(fields, ["org_id", "v", "t_d", "m"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn profile_accepts_upper_case_aliases() {
        let p: OrganizationProfile = serde_json::from_str(
            r#"{"org_id":"a","V":0.5,"E":0.25,"T_D":7,"sector_id":"generic","M":1.1}"#,
        )
        .unwrap();
        assert_eq!((p.v, p.e, p.t_d, p.m), (0.5, 0.25, 7.0, 1.1));
    }
}
