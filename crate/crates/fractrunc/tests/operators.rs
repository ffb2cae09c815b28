mod common;

use fractrunc::constants::{self, CsMuForm, Extremal};
use fractrunc::operators::*;
use fractrunc::profiles::{make_power_profile, make_v_gamma, make_v_minus_gamma, make_w_gamma};
use fractrunc::quad::Tolerance;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

struct Affine {
    a: Vec<f64>,
    b: f64,
}

impl Field for Affine {
    fn value(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }
    fn hessian_quad(&self, _x: &[f64], _xi: &[f64]) -> f64 {
        0.0
    }
    fn surfaces(&self, _n: usize) -> Vec<Surface> {
        Vec::new()
    }
    fn growth_alpha(&self) -> f64 {
        if self.a.iter().all(|&c| c == 0.0) {
            0.0
        } else {
            1.0
        }
    }
}

/// `1 − exp(−|y−c|²)`, minimal at `c`.
struct Well {
    c: Vec<f64>,
}

impl Field for Well {
    fn value(&self, x: &[f64]) -> f64 {
        let d: f64 = x.iter().zip(&self.c).map(|(a, b)| (a - b) * (a - b)).sum();
        -(-d).exp_m1()
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.c).map(|(a, b)| a - b).collect();
        let e = (-dot(&diff, &diff)).exp();
        let p = dot(&diff, xi);
        e * (2.0 * dot(xi, xi) - 4.0 * p * p)
    }
    fn surfaces(&self, _n: usize) -> Vec<Surface> {
        Vec::new()
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
}

/// `y ↦ u(y − a)`.
struct Shifted<'a> {
    u: &'a dyn Field,
    a: Vec<f64>,
}

impl Field for Shifted<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.a).map(|(p, q)| p - q).collect();
        self.u.value(&y)
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.a).map(|(p, q)| p - q).collect();
        self.u.hessian_quad(&y, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        self.u
            .surfaces(n)
            .into_iter()
            .map(|s| match s {
                Surface::Sphere { center, radius, exponent } => Surface::Sphere {
                    center: center.iter().zip(&self.a).map(|(c, a)| c + a).collect(),
                    radius,
                    exponent,
                },
                Surface::Hyperplane { normal, offset, exponent } => {
                    let offset = offset + dot(&normal, &self.a);
                    Surface::Hyperplane { normal, offset, exponent }
                }
            })
            .collect()
    }
    fn growth_alpha(&self) -> f64 {
        self.u.growth_alpha()
    }
}

/// `u + v`.
struct Sum<'a>(&'a dyn Field, &'a dyn Field);

impl Field for Sum<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x) + self.1.value(x)
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.0.hessian_quad(x, xi) + self.1.hessian_quad(x, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        let mut v = self.0.surfaces(n);
        v.extend(self.1.surfaces(n));
        v
    }
    fn growth_alpha(&self) -> f64 {
        self.0.growth_alpha().max(self.1.growth_alpha())
    }
}

#[test]
fn constants_and_affine_functions_are_annihilated() {
    let u = Affine { a: vec![0.3, -1.2, 2.0], b: 5.0 };
    let xi = unit(&[1.0, 1.0, -1.0]);
    let r = directional_at(&u, &[0.1, 0.2, 0.3], &xi, 0.75, &tol()).unwrap();
    assert!(r.value.abs() < 1e-9, "{r:?}");
    let c = Affine { a: vec![0.0; 3], b: -2.0 };
    let r = directional_at(&c, &[4.0, 0.0, -1.0], &xi, 0.3, &tol()).unwrap();
    assert!(r.value.abs() < 1e-12, "{r:?}");
    // linear growth needs 2s > 1
    assert!(directional_at(&u, &[0.1, 0.2, 0.3], &xi, 0.3, &tol()).is_err());
}

#[test]
fn power_identity_along_the_normal_and_oblique() {
    for (mu, s) in [(0.3, 0.4), (0.6, 0.5), (1.2, 0.75)] {
        let u = make_power_profile(mu).unwrap().build(2).unwrap();
        let c = constants::c_s_mu(mu, s, CsMuForm::Primary).unwrap();
        for xi in [vec![0.0, 1.0], unit(&[1.0, 2.0]), unit(&[-3.0, 1.0])] {
            for xn in [0.5, 2.0] {
                let x = [0.7, xn];
                let got = directional_at(&*u, &x, &xi, s, &tol()).unwrap().value;
                let want = constants::normalizing_constant(s) * c * xi[1].abs().powf(2.0 * s) * xn.powf(mu - 2.0 * s);
                assert!(rel(got, want) < 1e-7, "mu={mu} s={s} xi={xi:?} x={x:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn power_profile_is_blind_to_tangential_directions() {
    let u = make_power_profile(0.5).unwrap().build(3).unwrap();
    let r = directional_at(&*u, &[1.0, 2.0, 0.4], &[1.0, 0.0, 0.0], 0.6, &tol()).unwrap();
    assert!(r.value.abs() < 1e-12);
}

#[test]
fn perpendicular_direction_on_w_gamma() {
    let (gamma, s) = (1.7, 0.35);
    let w = make_w_gamma(gamma).unwrap();
    let x = [2.0, 0.0, 0.0];
    for xi in [[0.0, 1.0, 0.0], [0.0, 0.6, -0.8]] {
        let got = directional_at(&w, &x, &xi, s, &tol()).unwrap().value;
        let want = common::c_s(s) * common::c_perp_oracle(gamma, s) * 2f64.powf(-gamma - 2.0 * s);
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn radial_direction_on_w_gamma_against_oracle() {
    // along x̂ from 2e₁ the section dips into the cap on |2+τ| < 1/√2
    let (gamma, s) = (0.6, 0.4);
    let w = make_w_gamma(gamma).unwrap();
    let got = directional_at(&w, &[2.0, 0.0], &[1.0, 0.0], s, &tol()).unwrap().value;
    let len = 0.5f64.sqrt();
    let e = 1.0 + 2.0 * s;
    let correction = common::tanh_sinh(
        |sig| {
            (common::cap_oracle(gamma, 0.5, sig * sig) - sig.powf(-gamma))
                * ((2.0 - sig).powf(-e) + (2.0 + sig).powf(-e))
        },
        len,
    );
    let want = common::c_s(s) * (common::hat_c_dec_oracle(gamma, s) * 2f64.powf(-gamma - 2.0 * s) + correction);
    assert!(rel(got, want) < 1e-7, "{got} vs {want}");
}

#[test]
fn w_gamma_matches_its_written_out_form() {
    let w = make_w_gamma(1.3).unwrap();
    for y in [[0.1, 0.2], [0.5, 0.49], [0.5, 0.5], [3.0, -1.0]] {
        assert!((w.value(&y) - common::w_gamma_oracle(1.3, &y)).abs() < 1e-13);
    }
}

#[test]
fn scaling_of_homogeneous_functions() {
    let (mu, s, lambda) = (0.7, 0.45, 2.0);
    let u = make_power_profile(mu).unwrap().build(2).unwrap();
    let xi = unit(&[1.0, 3.0]);
    let a = directional_at(&*u, &[0.3, 0.8], &xi, s, &tol()).unwrap().value;
    let b = directional_at(&*u, &[0.3 * lambda, 0.8 * lambda], &xi, s, &tol()).unwrap().value;
    assert!(rel(b, lambda.powf(mu - 2.0 * s) * a) < 1e-8);
}

#[test]
fn translation_invariance() {
    let w = make_w_gamma(0.8).unwrap();
    let a = vec![1.5, -0.25];
    let shifted = Shifted { u: &w, a: a.clone() };
    let x = [0.9, 0.4];
    let xi = unit(&[2.0, -1.0]);
    let base = directional_at(&w, &x, &xi, 0.55, &tol()).unwrap().value;
    let moved = directional_at(&shifted, &[x[0] + a[0], x[1] + a[1]], &xi, 0.55, &tol()).unwrap().value;
    assert!((base - moved).abs() < 1e-8 * base.abs().max(1.0), "{base} vs {moved}");
}

#[test]
fn comparison_at_a_touching_point() {
    let w = make_w_gamma(1.1).unwrap();
    let c = vec![1.0, 1.0];
    let well = Well { c: c.clone() };
    let above = Sum(&w, &well);
    let xi = unit(&[1.0, -0.5]);
    let lo = directional_at(&w, &c, &xi, 0.5, &tol()).unwrap();
    let hi = directional_at(&above, &c, &xi, 0.5, &tol()).unwrap();
    let gap = directional_at(&well, &c, &xi, 0.5, &tol()).unwrap();
    assert!(gap.value > 0.0);
    assert!(hi.value >= lo.value);
    assert!((hi.value - lo.value - gap.value).abs() < 1e-8);
}

#[test]
fn extremal_radial_minus_full_closed_form() {
    let (gamma, s) = (1.5, 0.5);
    let w = make_w_gamma(gamma).unwrap();
    for n in [2usize, 3] {
        let mut x = vec![0.0; n];
        x[0] = 1.2;
        x[n - 1] = -1.6;
        let got = extremal_radial(&w, &x, s, n, RadialVariant::MinusFull, &tol()).unwrap().value;
        let want = n as f64 * common::c_s(s) * common::c_iso_oracle(gamma, s, n) * 2f64.powf(-gamma - 2.0 * s);
        assert!(rel(got, want) < 1e-8, "N={n}: {got} vs {want}");
    }
}

#[test]
fn extremal_radial_plus_splits_into_radial_and_perpendicular_parts() {
    let (gamma, s) = (0.6, 0.3);
    let w = make_w_gamma(gamma).unwrap();
    let x = [0.0, 2.0, 0.0];
    let radial = directional_at(&w, &x, &[0.0, 1.0, 0.0], s, &tol()).unwrap().value;
    let perp = common::c_s(s) * common::c_perp_oracle(gamma, s) * 2f64.powf(-gamma - 2.0 * s);
    for k in 1..=3 {
        let got = extremal_radial(&w, &x, s, k, RadialVariant::Plus, &tol()).unwrap().value;
        let want = radial + (k - 1) as f64 * perp;
        assert!(rel(got, want) < 1e-8, "k={k}: {got} vs {want}");
    }
}

#[test]
fn search_reproduces_closed_forms() {
    let s = 0.5;
    let budget = SearchBudget::default();
    for n in [2usize, 3] {
        let gamma = constants::find_gamma_tilde(n, s).unwrap().root * 0.5;
        let w = make_w_gamma(gamma).unwrap();
        let x = unit(&vec![1.0; n]).iter().map(|c| 2.0 * c).collect::<Vec<_>>();
        for k in 1..=n {
            let closed = extremal_radial(&w, &x, s, k, RadialVariant::Plus, &tol()).unwrap().value;
            let found = extremal_search(&w, &x, s, k, Extremal::Plus, &budget, &tol()).unwrap();
            assert!(rel(found.value.value, closed) < 1e-3, "plus N={n} k={k}: {} vs {closed}", found.value.value);
        }
        let closed = extremal_radial(&w, &x, s, n, RadialVariant::MinusFull, &tol()).unwrap().value;
        let found = extremal_search(&w, &x, s, n, Extremal::Minus, &budget, &tol()).unwrap();
        assert!(rel(found.value.value, closed) < 1e-3, "minus N={n}: {} vs {closed}", found.value.value);
    }
}

#[test]
fn random_frames_lie_between_the_extrema() {
    let w = make_w_gamma(1.0).unwrap();
    let x = [0.8, -1.0, 0.5];
    let s = 0.6;
    let budget = SearchBudget { restarts: 4, ..SearchBudget::default() };
    let lo = extremal_search(&w, &x, s, 2, Extremal::Minus, &budget, &tol()).unwrap();
    let hi = extremal_search(&w, &x, s, 2, Extremal::Plus, &budget, &tol()).unwrap();
    assert!(lo.frame.orthonormality_defect() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let f = Frame::random(3, 2, &mut rng).unwrap();
        let v = frame_sum(&w, &x, &f, s, &tol()).unwrap().value;
        assert!(
            v >= lo.value.value - 1e-9 && v <= hi.value.value + 1e-9,
            "{v} not in [{}, {}]",
            lo.value.value,
            hi.value.value
        );
    }
}

#[test]
fn search_is_deterministic_for_a_seed() {
    let w = make_w_gamma(1.0).unwrap();
    let x = [0.8, -1.0, 0.5];
    let budget = SearchBudget { restarts: 3, sweeps: 2, ..SearchBudget::default() };
    let a = extremal_search(&w, &x, 0.4, 2, Extremal::Minus, &budget, &tol()).unwrap();
    let b = extremal_search(&w, &x, 0.4, 2, Extremal::Minus, &budget, &tol()).unwrap();
    assert_eq!(a.value.value, b.value.value);
    assert_eq!(a.frame, b.frame);
}

#[test]
fn frame_sum_adds_directional_values() {
    let w = make_w_gamma(0.9).unwrap();
    let x = [0.3, 1.1, -0.2];
    let f = Frame::canonical(3, &[0, 2]).unwrap();
    let total = frame_sum(&w, &x, &f, 0.7, &tol()).unwrap().value;
    let parts: f64 = f.vectors.iter().map(|v| directional_at(&w, &x, v, 0.7, &tol()).unwrap().value).sum();
    assert!((total - parts).abs() < 1e-12);
}

#[test]
fn derivative_commutation() {
    let x = [0.6, 0.5];
    let xi = unit(&[1.0, 2.0]);
    let v = make_v_gamma(0.5).unwrap();
    for s in [0.25, 0.75] {
        let r = derivative_commutation_residual(&v, &x, &xi, s, 1e-4, &tol()).unwrap();
        assert!(r <= 1e-4, "s={s}: {r}");
    }
    let v = make_v_minus_gamma(0.5, 0.75).unwrap();
    let r = derivative_commutation_residual(&v, &[1.4, -0.3], &xi, 0.75, 1e-4, &tol()).unwrap();
    assert!(r <= 1e-4, "{r}");
}

#[test]
fn malformed_inputs_are_rejected() {
    let w = make_w_gamma(1.0).unwrap();
    assert!(matches!(directional_at(&w, &[1.0, 0.0], &[1.0, 1.0], 0.5, &tol()), Err(OperatorError::NotUnit(_))));
    assert!(matches!(
        directional_at(&w, &[1.0, 0.0], &[1.0, 0.0, 0.0], 0.5, &tol()),
        Err(OperatorError::Dimension { .. })
    ));
    assert!(matches!(Frame::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]), Err(OperatorError::NotOrthonormal(_))));
    assert!(matches!(
        extremal_radial(&w, &[1.0, 0.0], 0.5, 3, RadialVariant::Plus, &tol()),
        Err(OperatorError::FrameSize { .. })
    ));
    assert!(matches!(
        extremal_radial(&w, &[1.0, 0.0, 0.0], 0.5, 2, RadialVariant::MinusFull, &tol()),
        Err(OperatorError::FrameSize { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_frames_are_orthonormal(seed in any::<u64>(), n in 2usize..7, k in 1usize..7) {
        let k = k.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Frame::random(n, k, &mut rng).unwrap();
        prop_assert_eq!(f.k(), k);
        prop_assert!(f.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn perpendicular_identity_at_random_radii(gamma in 0.2f64..4.0, s in 0.1f64..0.9, r in 0.75f64..20.0, th in 0.0f64..std::f64::consts::TAU) {
        let w = make_w_gamma(gamma).unwrap();
        let x = [r * th.cos(), r * th.sin()];
        let xi = [-th.sin(), th.cos()];
        let got = directional_at(&w, &x, &xi, s, &tol()).unwrap();
        let want = constants::normalizing_constant(s) * constants::c_perp(gamma, s).unwrap() * r.powf(-gamma - 2.0 * s);
        prop_assert!((got.value - want).abs() <= got.abs_error_estimate + 1e-9 * want.abs(), "{:?} vs {}", got, want);
    }

    #[test]
    fn power_identity_at_random_points(f in 0.1f64..1.9, s in 0.15f64..0.85, xn in 0.05f64..10.0, c in 0.2f64..1.0) {
        let mu = f * s;
        let u = make_power_profile(mu).unwrap().build(2).unwrap();
        let xi = [(1.0 - c * c).sqrt(), c];
        let got = directional_at(&*u, &[0.0, xn], &xi, s, &tol()).unwrap().value;
        let cmu = constants::c_s_mu(mu, s, CsMuForm::Alternate).unwrap();
        let want = constants::normalizing_constant(s) * cmu * c.powf(2.0 * s) * xn.powf(mu - 2.0 * s);
        prop_assert!((got - want).abs() <= 1e-7 * want.abs().max(1e-6), "{} vs {}", got, want);
    }

    #[test]
    fn directional_is_even_in_the_direction(th in 0.0f64..std::f64::consts::TAU, s in 0.1f64..0.9) {
        let w = make_w_gamma(0.7).unwrap();
        let x = [0.4, 0.9];
        let xi = [th.cos(), th.sin()];
        let back = [-xi[0], -xi[1]];
        let a = directional_at(&w, &x, &xi, s, &tol()).unwrap().value;
        let b = directional_at(&w, &x, &back, s, &tol()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }
}
