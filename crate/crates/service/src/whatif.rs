//! One-at-a-time and combined what-if scenarios on a single organisation.

use ieq_core::model::ieq_from_hazard;
use ieq_core::{ieq_score, Error, ModelParams, OrganizationProfile, Result, ScoreReport, SectorTable};
use serde::{Deserialize, Serialize};

use crate::config::{Config, ParamsOverride};

/// Smallest shelf life an action can leave behind.
pub const MIN_SHELF_LIFE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    #[serde(rename = "reduce_V")]
    ReduceV,
    #[serde(rename = "reduce_E")]
    ReduceE,
    #[serde(rename = "extend_defense")]
    ExtendDefense,
    #[serde(rename = "reduce_TD")]
    ReduceTd,
    #[serde(rename = "improve_governance")]
    ImproveGovernance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub kind: ActionKind,
    pub magnitude: f64,
}

/// Scores `profile`, with an explicit hazard `h` bypassing the sector prior.
pub fn score_profile(
    profile: &OrganizationProfile,
    params: &ModelParams,
    sectors: &SectorTable,
    t0: f64,
    h: Option<f64>,
) -> Result<ScoreReport> {
    params.validate()?;
    profile.validate(params.m_max)?;
    match h {
        Some(h) => ieq_from_hazard(&profile.org_id, profile.v, profile.e, h, profile.m, params),
        None => ieq_score(profile, params, sectors.get(&profile.sector_id)?, t0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub base: OrganizationProfile,
    #[serde(default)]
    pub actions: Vec<Action>,
    #[serde(default)]
    pub params: Option<ParamsOverride>,
    #[serde(default)]
    pub t0: Option<f64>,
    /// Fixed hazard instead of the sector prior.
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub action: Action,
    pub new_report: ScoreReport,
    pub delta_ieq: f64,
    pub delta_p_hndl: f64,
    /// The action hit a domain bound or pushed V or E below the floor.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DefenseDominant,
    Balanced,
    AttackDominant,
}

impl Regime {
    pub fn of(r: f64) -> Self {
        if r < 1.0 {
            Regime::DefenseDominant
        } else if r > 1.0 {
            Regime::AttackDominant
        } else {
            Regime::Balanced
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub base_report: ScoreReport,
    pub regime: Regime,
    pub per_action: Vec<ActionOutcome>,
    pub combined: ScoreReport,
    pub combined_clamped: bool,
    /// Indices into `per_action`, largest IEQ reduction first; ties keep
    /// request order.
    pub ranking: Vec<usize>,
}

impl WhatIfResponse {
    pub fn is_finite(&self) -> bool {
        self.base_report.is_finite()
            && self.combined.is_finite()
            && self
                .per_action
                .iter()
                .all(|a| a.new_report.is_finite() && a.delta_ieq.is_finite() && a.delta_p_hndl.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Scenario {
    profile: OrganizationProfile,
    params: ModelParams,
    clamped: bool,
}

fn apply(s: &mut Scenario, action: &Action) {
    let m = action.magnitude;
    let eps = s.params.epsilon;
    let p = &mut s.profile;
    match action.kind {
        ActionKind::ReduceV | ActionKind::ReduceE => {
            let x = if action.kind == ActionKind::ReduceV { &mut p.v } else { &mut p.e };
            let raw = *x * (1.0 - m);
            *x = raw.clamp(0.0, 1.0);
            s.clamped |= raw < eps;
        }
        ActionKind::ReduceTd => {
            let raw = p.t_d * (1.0 - m);
            p.t_d = raw.max(MIN_SHELF_LIFE);
            s.clamped |= raw < MIN_SHELF_LIFE;
        }
        ActionKind::ImproveGovernance => {
            let raw = p.m - m;
            p.m = raw.max(1.0);
            s.clamped |= raw < 1.0;
        }
        ActionKind::ExtendDefense => s.params.mu *= 1.0 + m,
    }
}

pub fn evaluate_whatif(req: &WhatIfRequest, cfg: &Config) -> Result<WhatIfResponse> {
    for (i, a) in req.actions.iter().enumerate() {
        if !(a.magnitude.is_finite() && a.magnitude > 0.0) {
            return Err(Error::Validation(vec![ieq_core::FieldError::new(
                format!("actions[{i}].magnitude"),
                format!("must be finite and > 0, got {}", a.magnitude),
            )]));
        }
    }
    let params = cfg.params_with(req.params.as_ref())?;
    let t0 = req.t0.unwrap_or_else(|| cfg.t0());
    let score = |s: &Scenario| score_profile(&s.profile, &s.params, &cfg.sector_table, t0, req.h);

    let base = Scenario { profile: req.base.clone(), params, clamped: false };
    let base_report = score(&base)?;

    let mut per_action = Vec::with_capacity(req.actions.len());
    let mut combined = base.clone();
    for action in &req.actions {
        let mut s = base.clone();
        apply(&mut s, action);
        apply(&mut combined, action);
        let new_report = score(&s)?;
        per_action.push(ActionOutcome {
            action: *action,
            delta_ieq: new_report.ieq - base_report.ieq,
            delta_p_hndl: new_report.p_hndl - base_report.p_hndl,
            new_report,
            clamped: s.clamped,
        });
    }
    let combined_report = score(&combined)?;

    let mut ranking: Vec<usize> = (0..per_action.len()).collect();
    ranking.sort_by(|&i, &j| per_action[i].delta_ieq.total_cmp(&per_action[j].delta_ieq));

    Ok(WhatIfResponse {
        regime: Regime::of(base_report.r),
        base_report,
        per_action,
        combined: combined_report,
        combined_clamped: combined.clamped,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(v: f64, e: f64) -> OrganizationProfile {
        OrganizationProfile {
            org_id: "o".into(),
            v,
            e,
            t_d: 5.0,
            sector_id: "generic".into(),
            m: 1.2,
        }
    }

    fn request(actions: Vec<Action>) -> WhatIfRequest {
        WhatIfRequest { base: base(0.6, 0.5), actions, params: None, t0: Some(2026.0), h: None }
    }

    #[test]
    fn empty_actions() {
        let r = evaluate_whatif(&request(vec![]), &Config::default()).unwrap();
        assert_eq!(r.combined, r.base_report);
        assert!(r.ranking.is_empty());
    }

    #[test]
    fn deltas_and_ranking() {
        let actions = vec![
            Action { kind: ActionKind::ImproveGovernance, magnitude: 0.05 },
            Action { kind: ActionKind::ReduceV, magnitude: 0.5 },
            Action { kind: ActionKind::ExtendDefense, magnitude: 1.0 },
            Action { kind: ActionKind::ReduceTd, magnitude: 0.2 },
        ];
        let r = evaluate_whatif(&request(actions), &Config::default()).unwrap();
        for o in &r.per_action {
            assert_eq!(o.delta_ieq, o.new_report.ieq - r.base_report.ieq);
            assert_eq!(o.delta_p_hndl, o.new_report.p_hndl - r.base_report.p_hndl);
            assert!(o.delta_ieq <= 0.0);
        }
        let deltas: Vec<f64> = r.ranking.iter().map(|&i| r.per_action[i].delta_ieq).collect();
        assert!(deltas.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.combined.ieq < r.per_action.iter().map(|o| o.new_report.ieq).fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn governance_floor_and_v_clamp() {
        let actions = vec![
            Action { kind: ActionKind::ImproveGovernance, magnitude: 5.0 },
            Action { kind: ActionKind::ReduceV, magnitude: 0.999 },
        ];
        let r = evaluate_whatif(&request(actions), &Config::default()).unwrap();
        assert!(r.per_action.iter().all(|o| o.clamped));
        assert!(r.per_action[1].new_report.floored.v);
        assert!(r.is_finite());
    }

    #[test]
    fn bad_magnitude() {
        let req = request(vec![Action { kind: ActionKind::ReduceE, magnitude: 0.0 }]);
        assert!(matches!(evaluate_whatif(&req, &Config::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn action_names_on_the_wire() {
        let a: Action = serde_json::from_str(r#"{"kind":"reduce_TD","magnitude":0.1}"#).unwrap();
        assert_eq!(a.kind, ActionKind::ReduceTd);
        assert_eq!(serde_json::to_string(&ActionKind::ReduceV).unwrap(), "\"reduce_V\"");
    }
}
