use ieq_core::alt_models::{
    ces_aggregator, CesParams, LogAdditiveParams, ScoringModel, StructuralParams, ThresholdParams,
};
use ieq_core::diagnostics::{finite_diff_log_cross_partial, vuong_test, Domain, Verdict, VuongOptions};
use ieq_core::model::{
    attack_intensity, attack_rate, contest_probability, elasticities, ieq_from_hazard, log_cross_partial,
    p_exploit, p_hndl, q_exponential_defender_win, rate_cross_partial, regime_ratio, ModelParams,
};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    0.01f64..=1.0
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.1f64..3.0, 0.1f64..3.0, 0.01f64..10.0, 0.01f64..10.0).prop_map(|(a, b, lambda0, mu)| ModelParams {
        a,
        b,
        lambda0,
        mu,
        ..ModelParams::default()
    })
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn compromise_factorizes(v in unit(), e in unit(), h in 0.0f64..=1.0, p in params()) {
        let attack = attack_rate(v, e, &p).unwrap();
        let direct = p_hndl(v, e, h, &p).unwrap();
        prop_assert!(close(direct, h * contest_probability(attack, p.mu).unwrap(), 1e-14));
        let pe = p_exploit(v, e, &p).unwrap();
        let pd = q_exponential_defender_win(attack_intensity(v, e, &p).unwrap(), p.theta()).unwrap();
        prop_assert!((pe + pd - 1.0).abs() < 1e-14);
    }

    #[test]
    fn elasticities_share_one_factor(v in unit(), e in unit(), p in params()) {
        let el = elasticities(v, e, &p).unwrap();
        let pe = p_exploit(v, e, &p).unwrap();
        let r = regime_ratio(v, e, &p).unwrap();
        prop_assert!(close(el.beta / p.a, 1.0 - pe, 1e-12));
        prop_assert!(close(el.gamma / p.b, 1.0 - pe, 1e-12));
        prop_assert!(close(el.beta, p.a / (1.0 + r), 1e-12));
    }

    #[test]
    fn elasticities_fall_with_exposure(
        v in 0.01f64..0.9, e in 0.01f64..0.9, dv in 0.01f64..0.1, de in 0.01f64..0.1, p in params(),
    ) {
        let base = elasticities(v, e, &p).unwrap();
        let up_v = elasticities(v + dv, e, &p).unwrap();
        let up_e = elasticities(v, e + de, &p).unwrap();
        prop_assert!(up_v.beta < base.beta && up_v.gamma < base.gamma);
        prop_assert!(up_e.beta < base.beta && up_e.gamma < base.gamma);
    }

    #[test]
    fn attack_rates_are_complements(v in 0.05f64..0.95, e in 0.05f64..0.95, p in params()) {
        let analytic = rate_cross_partial(v, e, &p).unwrap();
        prop_assert!(analytic > 0.0);
        let d = 1e-4;
        let f = |v, e| attack_rate(v, e, &p).unwrap();
        let fd = (f(v + d, e + d) - f(v + d, e - d) - f(v - d, e + d) + f(v - d, e - d)) / (4.0 * d * d);
        prop_assert!(close(fd, analytic, 1e-4), "fd {fd} analytic {analytic}");
    }

    #[test]
    fn log_cross_partial_is_negative(v in unit(), e in unit(), p in params()) {
        prop_assert!(log_cross_partial(v, e, &p).unwrap() < 0.0);
    }

    #[test]
    fn index_is_monotone(
        v in 0.01f64..0.9, e in 0.01f64..0.9, h in 0.01f64..0.9, m in 1.0f64..1.5,
        dv in 0.01f64..0.1, de in 0.01f64..0.1, dh in 0.01f64..0.1, dm in 0.01f64..0.2,
    ) {
        let p = ModelParams::with_theta(5.0);
        let score = |v, e, h, m| ieq_from_hazard("x", v, e, h, m, &p).unwrap().ieq;
        let base = score(v, e, h, m);
        prop_assert!(score(v + dv, e, h, m) >= base);
        prop_assert!(score(v, e + de, h, m) >= base);
        prop_assert!(score(v, e, h + dh, m) >= base);
        prop_assert!(score(v, e, h, m + dm) >= base);
        prop_assert!((0.0..=100.0).contains(&base));
    }

    #[test]
    fn structural_family_matches_core(v in unit(), e in unit(), p in params()) {
        let model = ScoringModel::Structural(StructuralParams::from(&p));
        let core = p_exploit(v, e, &p).unwrap();
        prop_assert!(close(model.log_score(v, e).exp(), core, 1e-12));
    }

    #[test]
    fn ces_diagonal_is_power(x in unit(), w in 0.05f64..0.95, rho in -3.0f64..3.0, s in 0.2f64..2.0) {
        prop_assume!(rho.abs() > 1e-3);
        let p = CesParams { w, rho, s, theta: 1.0 };
        prop_assert!(close(ces_aggregator(x, x, &p), x.powf(s), 1e-12));
    }

    #[test]
    fn ces_is_continuous_at_cobb_douglas(v in unit(), e in unit(), w in 0.05f64..0.95, s in 0.2f64..2.0) {
        let geo = v.powf(s * w) * e.powf(s * (1.0 - w));
        for rho in [1e-9, -1e-9] {
            let p = CesParams { w, rho, s, theta: 1.0 };
            prop_assert!((ces_aggregator(v, e, &p) - geo).abs() < 1e-6);
        }
    }

    #[test]
    fn log_additive_has_no_interaction(
        v in 0.05f64..0.9, e in 0.05f64..0.9, w1 in 0.1f64..3.0, w2 in 0.1f64..3.0, c in -2.0f64..0.0,
    ) {
        let m = ScoringModel::LogAdditive(LogAdditiveParams { w1, w2, c });
        let fd = finite_diff_log_cross_partial(|v, e| m.log_score(v, e), v, e, 1e-3, Domain::unit_with_floor(0.01))
            .unwrap();
        prop_assert!(fd.abs() < 1e-8, "{fd}");
    }

    #[test]
    fn structural_fd_converges(v in 0.05f64..0.9, e in 0.05f64..0.9, p in params()) {
        let model = ScoringModel::Structural(StructuralParams::from(&p));
        let exact = log_cross_partial(v, e, &p).unwrap();
        let err = |h: f64| {
            let fd = finite_diff_log_cross_partial(|v, e| model.log_score(v, e), v, e, h, Domain::unit_with_floor(0.01))
                .unwrap();
            (fd - exact).abs()
        };
        let (e2, e3, e4) = (err(1e-2), err(1e-3), err(1e-4));
        prop_assert!(e3 <= e2 + 1e-12, "{e2} {e3}");
        // Round-off in the four-point stencil grows like 1e-16 / d^2.
        prop_assert!(e4 <= e3 + 1e-7, "{e3} {e4}");
    }

    #[test]
    fn vuong_is_antisymmetric(
        a in prop::collection::vec(-5.0f64..0.0, 30..80),
        shift in prop::collection::vec(-0.5f64..0.5, 80),
    ) {
        let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let opts = VuongOptions::default();
        let ab = vuong_test(&a, &b, &opts).unwrap();
        let ba = vuong_test(&b, &a, &opts).unwrap();
        prop_assert!((ab.z + ba.z).abs() < 1e-9);
        let flipped = match ab.verdict {
            Verdict::FavorsA => Verdict::FavorsB,
            Verdict::FavorsB => Verdict::FavorsA,
            Verdict::Indeterminate => Verdict::Indeterminate,
        };
        prop_assert_eq!(ba.verdict, flipped);
    }
}

#[test]
fn regime_limits() {
    let p = ModelParams::default();
    for (theta, beta) in [(1e6, p.a), (1e-6, 0.0)] {
        let q = ModelParams::with_theta(theta);
        let el = elasticities(1.0, 1.0, &q).unwrap();
        assert!((el.beta - beta).abs() < 1e-5, "theta {theta}: {}", el.beta);
        assert!((el.gamma - beta * p.b / p.a).abs() < 1e-5);
    }
}

#[test]
fn cobb_douglas_structural_is_homogeneous() {
    let p = ModelParams::default();
    let (v, e, t) = (0.4, 0.6, 0.7);
    let u = attack_intensity(v, e, &p).unwrap();
    let scaled = attack_intensity(t * v, t * e, &p).unwrap();
    assert!((scaled - t.powf(p.a + p.b) * u).abs() < 1e-14);
}

#[test]
fn hard_threshold_breaks_homogeneity() {
    let m = ScoringModel::Threshold(ThresholdParams { softness: 0.0, ..ThresholdParams::default() });
    let (v, e, t) = (0.5, 0.5, 0.5);
    let above = m.log_score(v, e).exp();
    let below = m.log_score(t * v, t * e).exp();
    let s = ThresholdParams::default();
    assert!(above > 0.1);
    assert!(below < 1e-3 * t.powf(s.a + s.b) * above);
}
