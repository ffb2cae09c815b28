mod common;

use fractrunc::constants::{self, CsMuForm};
use fractrunc::operators::{directional_at, unit, Field};
use fractrunc::profiles::*;
use fractrunc::quad::Tolerance;
use proptest::prelude::*;

fn second_difference_along(u: &dyn Field, x: &[f64], xi: &[f64], h: f64) -> f64 {
    (u.value_on_line(x, xi, 0.0, h) - 2.0 * u.value(x) + u.value_on_line(x, xi, 0.0, -h)) / (h * h)
}

fn first_difference_along(u: &dyn Field, x: &[f64], xi: &[f64], h: f64) -> f64 {
    (u.value_on_line(x, xi, 0.0, h) - u.value_on_line(x, xi, 0.0, -h)) / (2.0 * h)
}

#[test]
fn cap_is_c3_at_the_junction() {
    for gamma in [0.3, 1.0, 2.7] {
        let w = make_w_gamma(gamma).unwrap();
        let j = w.junction_r2;
        for order in 0..=3 {
            let inside = w.derivative(j - 1e-12, order);
            let outside = w.derivative(j, order);
            assert!((inside - outside).abs() < 1e-9 * outside.abs().max(1.0), "gamma={gamma} order={order}");
        }
        assert!(w.check_invariants().is_ok());
    }
}

#[test]
fn profiles_equal_their_power_tails_outside_the_cap() {
    let w = make_w_gamma(1.4).unwrap();
    assert!((w.at_radius(3.0) - 3f64.powf(-1.4)).abs() < 1e-15);
    let v = make_v_gamma(0.4).unwrap();
    assert!((v.at_radius(1.5) - 1.5f64.powf(-0.4)).abs() < 1e-15);
    let g = make_v_minus_gamma(0.3, 0.8).unwrap();
    assert!((g.at_radius(4.0) + 4f64.powf(0.3)).abs() < 1e-14);
}

#[test]
fn growth_cap_stays_below_minus_the_power() {
    let g = make_v_minus_gamma(0.5, 0.75).unwrap();
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        assert!(g.g(r) <= -r.powf(0.25) + 1e-12, "r={r}");
    }
}

#[test]
fn profile_domains() {
    assert!(make_w_gamma(0.0).is_err());
    assert!(make_v_gamma(1.0).is_err());
    assert!(make_v_minus_gamma(0.2, 0.5).is_err());
    assert!(make_v_minus_gamma(0.7, 0.75).is_err());
    assert!(make_psi(PsiKind::Halfint, 2, 0.5).is_err());
    assert!(make_psi(PsiKind::Growth, 1, 0.5).is_err());
    assert!(make_bump_train(0.5, 0.3, 4).is_err());
    assert!(make_power_profile(-1.0).is_err());
}

#[test]
fn psi_kinds_carry_their_exponents() {
    let HalfSpaceFn::PsiDecay { gamma_bar, gamma, .. } = make_psi(PsiKind::Decay, 2, 0.5).unwrap() else {
        panic!("wrong kind");
    };
    let root = constants::find_gamma_bar(2, 0.5).unwrap().root;
    assert_eq!(gamma_bar, root);
    assert!(gamma > gamma_bar && gamma < 1.0);
    assert_eq!(make_psi(PsiKind::Halfint, 1, 0.5).unwrap(), HalfSpaceFn::PsiHalfint { gamma: 0.5 });
    let HalfSpaceFn::PsiGrowth { gamma_bar, gamma, .. } = make_psi(PsiKind::Growth, 1, 0.75).unwrap() else {
        panic!("wrong kind");
    };
    assert!((gamma_bar - 0.5).abs() < 1e-15);
    assert!(gamma < gamma_bar);
}

#[test]
fn psi_is_odd_in_the_normal_coordinate() {
    let f = make_psi(PsiKind::Decay, 2, 0.5).unwrap().build(3).unwrap();
    for x in [[0.3, -0.2, 0.7], [2.0, 1.0, 3.0]] {
        let m = [x[0], x[1], -x[2]];
        assert!((f.value(&x) + f.value(&m)).abs() < 1e-14);
    }
    assert_eq!(f.value(&[5.0, 1.0, 0.0]), 0.0);
}

#[test]
fn bump_train_mean_against_quadrature() {
    for (eps, s) in [(0.1, 0.3), (0.25, 0.5), (0.4, 0.9)] {
        let b = BumpTrain { eps, s, window: 4 };
        let oracle = eps.powf(2.0 * s + 1.0) * 2.0 * common::tanh_sinh(|u| (1.0 - u * u).powf(s), 1.0);
        assert!((b.mean() - oracle).abs() < 1e-12, "eps={eps} s={s}");
    }
}

#[test]
fn bump_train_support_and_peak() {
    let b = BumpTrain { eps: 0.2, s: 0.5, window: 4 };
    assert_eq!(b.profile(-0.1).0, 0.0);
    assert_eq!(b.profile(0.5).0, 0.0);
    for n in 0..3 {
        let peak = b.profile(n as f64 + 0.2).0;
        assert!((peak - 0.2).abs() < 1e-14);
    }
    assert!(b.profile(1.39).0 > 0.0);
    assert_eq!(b.profile(1.41).0, 0.0);
}

#[test]
fn halfspace_power_tail_vanishes_below_the_wall() {
    let f = make_halfspace_power_tail(1.5).unwrap().build(2).unwrap();
    assert_eq!(f.value(&[0.3, -0.01]), 0.0);
    assert!((f.value(&[3.0, 4.0]) - 5f64.powf(-1.5)).abs() < 1e-15);
}

#[test]
fn min_composition_is_the_scaled_minimum() {
    let (f, p) =
        build_thin_supersolution(3, 0.5, 1.0 + 1.0 / constants::find_gamma_plus(3, 0.5).unwrap().root + 0.2).unwrap();
    let u = f.build(3).unwrap();
    let phi = HalfSpaceFn::HalfspacePowerTail { gamma: p.gamma, shift: p.shift }.build(3).unwrap();
    let z = make_power_profile(p.mu).unwrap().build(3).unwrap();
    for x in [[0.1, 0.0, 0.01], [0.0, 0.5, 1.0], [3.0, -2.0, 5.0], [0.0, 0.0, -1.0]] {
        let want = p.eps * phi.value(&x).min(z.value(&x));
        assert!((u.value(&x) - want).abs() < 1e-15);
    }
    assert!(p.alpha > 0.0 && p.beta > 0.0);
    // γ = 2s/(p−1)
    let p_minus_one = 2.0 * 0.5 / p.gamma;
    assert!((p.eps - p.alpha.min(p.beta).powf(1.0 / p_minus_one)).abs() < 1e-12);
}

#[test]
fn thin_supersolution_needs_p_above_threshold() {
    let gp = constants::find_gamma_plus(3, 0.5).unwrap().root;
    let threshold = 1.0 + 1.0 / gp;
    assert!(matches!(build_thin_supersolution(3, 0.5, threshold - 0.01), Err(ProfileError::ExponentOutOfRange { .. })));
}

#[test]
fn singular_power_solves_the_equation_exactly() {
    let (s, p) = (0.5, -3.0);
    let sol = build_singular_supersolution(s, p, SingularOp::IkMinus, 2).unwrap();
    assert!((sol.mu - 2.0 * s / (1.0 - p)).abs() < 1e-15);
    let u = sol.function.build(2).unwrap();
    let tol = Tolerance::default();
    for xn in [0.1, 1.0, 7.5] {
        let x = [0.3, xn];
        let i = directional_at(&*u, &x, &[0.0, 1.0], s, &tol).unwrap().value;
        let up = u.value(&x).powf(p);
        assert!((i + up).abs() <= 1e-8 * up.abs(), "x_N={xn}: {i} vs {up}");
    }
}

#[test]
fn singular_amplitude_formulas() {
    let (s, p) = (0.4, -2.0);
    let mu = 2.0 * s / (1.0 - p);
    let c = constants::normalizing_constant(s) * constants::c_s_mu(mu, s, CsMuForm::Primary).unwrap();
    let minus = build_singular_supersolution(s, p, SingularOp::IkMinus, 3).unwrap();
    let plus = build_singular_supersolution(s, p, SingularOp::InPlus, 3).unwrap();
    assert!((minus.amplitude.powf(p - 1.0) + c).abs() < 1e-12);
    assert!((plus.amplitude.powf(1.0 - p) - 3f64.powf(s) / c.abs()).abs() < 1e-12);
    assert!(matches!(
        build_singular_supersolution(s, -1.0, SingularOp::IkMinus, 3),
        Err(ProfileError::ExponentOutOfRange { .. })
    ));
}

#[test]
fn transform_maps_singular_family_onto_the_q_exponent() {
    // same power of x_N as the q-family; the amplitude is α M_p^β, which differs
    // from M_q unless β c_{s,μ_p} = c_{s,μ_q}
    let (s, p, q) = (0.5, -3.0, -5.0);
    let base = build_singular_supersolution(s, p, SingularOp::IkMinus, 2).unwrap();
    let direct = build_singular_supersolution(s, q, SingularOp::IkMinus, 2).unwrap();
    let v = power_transform(&base.function, p, q).unwrap().build(2).unwrap();
    let d = direct.function.build(2).unwrap();
    let beta = (p - 1.0) / (q - 1.0);
    let cp = constants::c_s_mu(base.mu, s, CsMuForm::Primary).unwrap();
    let cq = constants::c_s_mu(direct.mu, s, CsMuForm::Primary).unwrap();
    let ratio = (beta * cp / cq).powf(1.0 / (q - 1.0));
    for xn in [0.01, 0.3, 1.0, 4.0, 50.0] {
        let x = [0.0, xn];
        let r = v.value(&x) / d.value(&x);
        assert!((r - ratio).abs() <= 1e-10 * ratio, "x_N={xn}: {r} vs {ratio}");
    }
    assert!((ratio - 1.0).abs() > 1e-3);
}

#[test]
fn transform_parameters() {
    let t = TransformParams::new(-3.0, -5.0).unwrap();
    assert!((t.beta_exp - 2.0 / 3.0).abs() < 1e-15);
    assert!(t.identity_defect() < 1e-14);
    let id = TransformParams::new(2.0, 2.0).unwrap();
    assert_eq!((id.beta_exp, id.alpha_coef), (1.0, 1.0));
    assert!(TransformParams::new(2.0, 1.5).is_err());
    assert!(TransformParams::new(0.5, 2.0).is_err());
    assert!(TransformParams::new(1.0, 1.0).is_err());
}

#[test]
fn documents_round_trip() {
    let fns = vec![
        make_psi(PsiKind::Decay, 2, 0.5).unwrap(),
        make_psi(PsiKind::Halfint, 1, 0.5).unwrap(),
        make_psi(PsiKind::Growth, 1, 0.75).unwrap(),
        make_bump_train(0.2, 0.3, 6).unwrap(),
        make_halfspace_power_tail(2.0).unwrap(),
        make_power_profile(0.4).unwrap(),
        build_singular_supersolution(0.5, -3.0, SingularOp::InPlus, 2).unwrap().function,
        power_transform(&make_power_profile(0.4).unwrap(), -3.0, -5.0).unwrap(),
    ];
    for f in fns {
        let doc = f.document(3).unwrap();
        assert_eq!(doc["kind"], f.kind());
        assert_eq!(doc["metadata"]["dimension"], 3);
        let back = HalfSpaceFn::from_document(&doc).unwrap();
        assert_eq!(back, f);
        let text = serde_json::to_string(&doc).unwrap();
        let again = HalfSpaceFn::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
        let x = [0.2, -0.4, 0.9];
        assert_eq!(again.evaluate(&x).unwrap(), f.evaluate(&x).unwrap());
    }
}

#[test]
fn unknown_kind_is_rejected() {
    let doc = serde_json::json!({ "kind": "nothing", "gamma": 1.0 });
    assert!(HalfSpaceFn::from_document(&doc).is_err());
}

fn fields() -> Vec<(&'static str, Box<dyn Field + Send>)> {
    vec![
        ("w", Box::new(make_w_gamma(1.2).unwrap())),
        ("v_minus", Box::new(make_v_minus_gamma(0.4, 0.8).unwrap())),
        ("psi", make_psi(PsiKind::Halfint, 1, 0.5).unwrap().build(3).unwrap()),
        ("psi_decay", make_psi(PsiKind::Decay, 2, 0.5).unwrap().build(3).unwrap()),
        ("tail", make_halfspace_power_tail(1.5).unwrap().build(3).unwrap()),
        ("power", make_power_profile(0.7).unwrap().build(3).unwrap()),
        ("bump", make_bump_train(0.3, 0.6, 4).unwrap().build(3).unwrap()),
        ("transform", power_transform(&make_power_profile(0.7).unwrap(), 3.0, 4.0).unwrap().build(3).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivatives_match_finite_differences(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.05f64..3.0,
        d0 in -1.0f64..1.0, d1 in -1.0f64..1.0, d2 in -1.0f64..1.0,
    ) {
        prop_assume!((d0 * d0 + d1 * d1 + d2 * d2).sqrt() > 0.1);
        let x = [a, b, c];
        let xi = unit(&[d0, d1, d2]);
        let h = 1e-4;
        for (name, f) in fields() {
            let near_surface = f.surfaces(3).iter().any(|s| s.crossings(&x, &xi).iter().any(|t| t.abs() < 4.0 * h));
            if near_surface {
                continue;
            }
            let scale = f.value(&x).abs().max(1e-3);
            let d1_fd = first_difference_along(&*f, &x, &xi, h);
            let d1 = f.directional_derivative(&x, &xi);
            prop_assert!((d1 - d1_fd).abs() <= 1e-5 * (1.0 + d1.abs()) / scale.min(1.0), "{} first: {} vs {}", name, d1, d1_fd);
            let d2_fd = second_difference_along(&*f, &x, &xi, h);
            let d2 = f.hessian_quad(&x, &xi);
            prop_assert!((d2 - d2_fd).abs() <= 1e-3 * (1.0 + d2.abs()) / scale.min(1.0), "{} second: {} vs {}", name, d2, d2_fd);
        }
    }

    #[test]
    fn transform_defect_vanishes(p in 1.05f64..4.0, dq in 0.05f64..4.0) {
        let t = TransformParams::new(p, p + dq).unwrap();
        prop_assert!(t.identity_defect() < 1e-12);
        let t = TransformParams::new(-p, -p - dq).unwrap();
        prop_assert!(t.identity_defect() < 1e-12);
    }

    #[test]
    fn singular_documents_round_trip(s in 0.1f64..0.9, p in -8.0f64..-1.05) {
        let f = build_singular_supersolution(s, p, SingularOp::IkMinus, 2).unwrap().function;
        let back = HalfSpaceFn::from_document(&f.document(2).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}
