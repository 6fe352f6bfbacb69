use ieq_core::OrganizationProfile;
use ieq_service::{evaluate_whatif, Action, ActionKind, Config, ParamsOverride, WhatIfRequest};
use proptest::prelude::*;

fn profile(v: f64, e: f64, t_d: f64, m: f64) -> OrganizationProfile {
    OrganizationProfile {
        org_id: "p".into(),
        v,
        e,
        t_d,
        sector_id: "generic".into(),
        m,
    }
}

fn cfg() -> Config {
    Config { t0: Some(2026.0), ..Config::default() }
}

fn kind() -> impl Strategy<Value = ActionKind> {
    prop_oneof![
        Just(ActionKind::ReduceV),
        Just(ActionKind::ReduceE),
        Just(ActionKind::ExtendDefense),
        Just(ActionKind::ReduceTd),
        Just(ActionKind::ImproveGovernance),
    ]
}

fn action() -> impl Strategy<Value = Action> {
    (kind(), 0.001f64..1.5).prop_map(|(kind, magnitude)| Action { kind, magnitude })
}

#[test]
fn defense_dominant_profile_gains_more_from_reducing_v() {
    let action = Action { kind: ActionKind::ReduceV, magnitude: 0.1 };
    let run = |theta: f64| {
        let req = WhatIfRequest {
            base: profile(1.0, 1.0, 5.0, 1.0),
            actions: vec![action],
            params: Some(ParamsOverride { theta: Some(theta), ..ParamsOverride::default() }),
            t0: None,
            h: Some(0.5),
        };
        evaluate_whatif(&req, &cfg()).unwrap()
    };
    let low_r = run(100.0);
    let high_r = run(0.01);
    assert!((low_r.base_report.r - 0.01).abs() < 1e-12);
    assert!((high_r.base_report.r - 100.0).abs() < 1e-9);

    let d_low = &low_r.per_action[0];
    let d_high = &high_r.per_action[0];
    assert!(d_low.delta_ieq.abs() > 10.0 * d_high.delta_ieq.abs());
    let rel = |r: &ieq_service::WhatIfResponse| r.per_action[0].delta_p_hndl / r.base_report.p_hndl;
    assert!(rel(&low_r).abs() > 10.0 * rel(&high_r).abs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ranking_matches_recomputed_deltas(
        v in 0.0f64..=1.0, e in 0.0f64..=1.0, t_d in 0.5f64..30.0, m in 1.0f64..2.0,
        actions in prop::collection::vec(action(), 0..6),
    ) {
        let req = WhatIfRequest { base: profile(v, e, t_d, m), actions, params: None, t0: None, h: None };
        let r = evaluate_whatif(&req, &cfg()).unwrap();
        prop_assert!(r.is_finite());
        let deltas: Vec<f64> = r.per_action.iter().map(|o| o.new_report.ieq - r.base_report.ieq).collect();
        for (o, d) in r.per_action.iter().zip(&deltas) {
            prop_assert_eq!(o.delta_ieq, *d);
        }
        let mut expected: Vec<usize> = (0..deltas.len()).collect();
        expected.sort_by(|&i, &j| deltas[i].partial_cmp(&deltas[j]).unwrap().then(i.cmp(&j)));
        prop_assert_eq!(&r.ranking, &expected);
        if req.actions.is_empty() {
            prop_assert_eq!(&r.combined, &r.base_report);
        }
    }

    #[test]
    fn order_of_requests_does_not_matter(
        profiles in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.5f64..30.0, 1.0f64..2.0), 2..6),
        seed in any::<u64>(),
    ) {
        let reqs: Vec<WhatIfRequest> = profiles
            .iter()
            .map(|&(v, e, t, m)| WhatIfRequest {
                base: profile(v, e, t, m),
                actions: vec![Action { kind: ActionKind::ReduceE, magnitude: 0.2 }],
                params: None,
                t0: None,
                h: None,
            })
            .collect();
        let c = cfg();
        let forward: Vec<_> = reqs.iter().map(|r| evaluate_whatif(r, &c).unwrap()).collect();
        let mut order: Vec<usize> = (0..reqs.len()).collect();
        order.rotate_left((seed % reqs.len() as u64) as usize);
        order.reverse();
        for i in order {
            prop_assert_eq!(&evaluate_whatif(&reqs[i], &c).unwrap(), &forward[i]);
        }
    }
}
