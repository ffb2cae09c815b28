//! Special constants and critical exponents.
//!
//! All integrals are returned without the normalizing constant `C_s`; callers
//! multiply by [`normalizing_constant`] where the operator scaling is needed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quad::{self, Integrand, QuadError, QuadResult, SectionError, SymmetricSection, Tail, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstantsError {
    #[error("{param} {message}")]
    Domain { param: &'static str, message: String },
    #[error("no root of c_k in (0,1) for k = {k}, s = {s}")]
    NoRoot { k: usize, s: f64 },
    #[error("no sign change found for {what} up to gamma = {limit}")]
    BracketFailure { what: &'static str, limit: f64 },
    #[error("root finder stalled at {root} with residual {residual:e}")]
    NotConverged { root: f64, residual: f64 },
    #[error(transparent)]
    Section(#[from] SectionError),
}

impl From<QuadError> for ConstantsError {
    fn from(e: QuadError) -> Self {
        ConstantsError::Section(SectionError::Quad(e))
    }
}

pub type Result<T> = std::result::Result<T, ConstantsError>;

fn domain(param: &'static str, message: impl Into<String>) -> ConstantsError {
    ConstantsError::Domain { param, message: message.into() }
}

pub fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(domain("s", "must lie in (0,1)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub s: f64,
    pub n: usize,
    pub k: usize,
}

impl ProblemParams {
    pub fn new(s: f64, n: usize, k: usize) -> Result<Self> {
        check_s(s)?;
        if n < 2 {
            return Err(domain("N", "must be at least 2"));
        }
        if k < 1 || k > n {
            return Err(domain("k", format!("must lie in 1..={n}")));
        }
        Ok(ProblemParams { s, n, k })
    }
}

/// Tolerance used for constants unless the caller supplies one.
pub fn default_tolerance() -> Tolerance {
    Tolerance::new(1e-13, 1e-12)
}

/// `C_s = 4^s s Γ(1/2+s) / (√π Γ(1−s))`.
pub fn normalizing_constant(s: f64) -> f64 {
    4f64.powf(s) * s * gamma(0.5 + s) / (PI.sqrt() * gamma(1.0 - s))
}

/// `Γ(1−s)Γ(s) = π / sin(πs)`.
pub fn beta_1ms_s(s: f64) -> f64 {
    PI / (PI * s).sin()
}

/// `ln|1+τ|` with τ given as anchor + offset; exact near τ = −1 when anchored there.
fn ln_abs_one_plus(a: f64, o: f64) -> f64 {
    if a == -1.0 {
        o.abs().ln()
    } else {
        let t = a + o;
        if t > -0.5 {
            t.ln_1p()
        } else {
            (1.0 + t).abs().ln()
        }
    }
}

/// `(1+t)^e + (1−t)^e − 2` for `|t| < 1`, without cancellation near `t = 0`.
fn even_power_sum(e: f64, t: f64) -> f64 {
    let m = 0.5 * (-t * t).ln_1p();
    let x = e * t.atanh();
    let sh = (0.5 * x).sinh();
    2.0 * ((e * m).exp_m1() * x.cosh() + 2.0 * sh * sh)
}

/// Half of the even part near the origin, so that the folded sum of two calls is
/// computed in one piece; `one_sided` elsewhere and at anchored points.
fn folded_half(a: f64, o: f64, even: impl Fn(f64) -> f64, one_sided: impl Fn(f64, f64) -> f64) -> f64 {
    let t = a + o;
    if a.abs() != 1.0 && t.abs() < 0.5 {
        0.5 * even(t)
    } else {
        one_sided(a, o)
    }
}

pub fn hat_c_dec_with(gamma: f64, s: f64, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain("gamma", "must lie in (0,1)"));
    }
    let sec = SymmetricSection::new(
        move |a: f64, o: f64| {
            folded_half(a, o, |t| even_power_sum(-gamma, t), |a, o| (-gamma * ln_abs_one_plus(a, o)).exp_m1())
        },
        1.0,
        gamma * (gamma + 1.0),
        Tail::Decay { growth_alpha: 0.0 },
    )
    .breakpoint(-1.0, -gamma)
    .noise_floor(0.0);
    Ok(quad::second_difference(&sec, s, tol)?)
}

/// `PV∫ (|1+τ|^{−γ}−1)/|τ|^{1+2s} dτ`.
pub fn hat_c_dec(gamma: f64, s: f64) -> Result<f64> {
    Ok(hat_c_dec_with(gamma, s, &default_tolerance())?.value)
}

pub fn c_perp_with(gamma: f64, s: f64, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    if !(gamma > 0.0) {
        return Err(domain("gamma", "must be positive"));
    }
    let sec = SymmetricSection::new(
        move |a: f64, o: f64| {
            let t = a + o;
            (-0.5 * gamma * (t * t).ln_1p()).exp_m1()
        },
        1.0,
        -gamma,
        Tail::Decay { growth_alpha: 0.0 },
    )
    .smooth_within(1.0)
    .noise_floor(0.0);
    Ok(quad::second_difference(&sec, s, tol)?)
}

/// `2∫_0^∞ ((1+τ²)^{−γ/2}−1)/τ^{1+2s} dτ`.
pub fn c_perp(gamma: f64, s: f64) -> Result<f64> {
    Ok(c_perp_with(gamma, s, &default_tolerance())?.value)
}

pub fn c_k_fn_with(gamma: f64, s: f64, k: usize, tol: &Tolerance) -> Result<QuadResult> {
    if k < 1 {
        return Err(domain("k", "must be at least 1"));
    }
    let hat = hat_c_dec_with(gamma, s, tol)?;
    if k == 1 {
        return Ok(hat);
    }
    let perp = c_perp_with(gamma, s, tol)?;
    Ok(hat.plus(perp.scaled((k - 1) as f64)))
}

/// `c_k(γ) = ĉ(γ) + (k−1)c^⊥(γ)`.
pub fn c_k_fn(gamma: f64, s: f64, k: usize) -> Result<f64> {
    Ok(c_k_fn_with(gamma, s, k, &default_tolerance())?.value)
}

pub fn hat_c_gro_with(gamma: f64, s: f64, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    if !(s > 0.5) {
        return Err(domain("s", "must lie in (1/2,1) for the growth constant"));
    }
    if !(gamma > 0.0 && gamma <= 2.0 * s - 1.0) {
        return Err(domain("gamma", "must lie in (0, 2s-1]"));
    }
    let sec = SymmetricSection::new(
        move |a: f64, o: f64| {
            folded_half(a, o, |t| -even_power_sum(gamma, t), |a, o| -(gamma * ln_abs_one_plus(a, o)).exp_m1())
        },
        -1.0,
        gamma * (1.0 - gamma),
        Tail::Decay { growth_alpha: gamma },
    )
    .breakpoint(-1.0, gamma)
    .noise_floor(0.0);
    Ok(quad::second_difference(&sec, s, tol)?)
}

/// `PV∫ (1−|1+τ|^{γ})/|τ|^{1+2s} dτ`.
pub fn hat_c_gro(gamma: f64, s: f64) -> Result<f64> {
    Ok(hat_c_gro_with(gamma, s, &default_tolerance())?.value)
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(domain("N", "must be at least 2"))
    }
}

pub fn c_iso_with(gamma: f64, s: f64, n: usize, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    check_n(n)?;
    if !(gamma > 0.0) {
        return Err(domain("gamma", "must be positive"));
    }
    let a = 2.0 / (n as f64).sqrt();
    let h = 0.5 * gamma;
    let sec = SymmetricSection::new(
        move |an: f64, o: f64| {
            let t = an + o;
            if t.abs() < 0.5 {
                // 1+t²±at = (1+t²)(1±b)
                let b = a * t / (1.0 + t * t);
                let pair = even_power_sum(-h, b);
                0.5 * ((-h * (t * t).ln_1p()).exp_m1() * (pair + 2.0) + pair)
            } else {
                (-h * (t * t + a * t).ln_1p()).exp_m1()
            }
        },
        1.0,
        h * (h + 1.0) * a * a - gamma,
        Tail::Decay { growth_alpha: 0.0 },
    )
    .smooth_within(1.0)
    .noise_floor(0.0);
    Ok(quad::second_difference(&sec, s, tol)?)
}

/// `c(γ) = ∫_0^∞ ((1+τ²+2τ/√N)^{−γ/2}+(1+τ²−2τ/√N)^{−γ/2}−2)/τ^{1+2s} dτ`.
pub fn c_iso(gamma: f64, s: f64, n: usize) -> Result<f64> {
    Ok(c_iso_with(gamma, s, n, &default_tolerance())?.value)
}

pub fn c_n_plus_with(gamma: f64, s: f64, n: usize, tol: &Tolerance) -> Result<QuadResult> {
    let iso = c_iso_with(gamma, s, n, tol)?;
    let a = 2.0 / (n as f64).sqrt();
    let e = 1.0 + 2.0 * s;
    let f = Integrand::new(move |t: f64| (1.0 + t * t - a * t).powf(-0.5 * gamma) / t.powf(e)).tail(gamma + e);
    let cut = quad::integrate(&f, (n as f64).sqrt(), f64::INFINITY, tol)?;
    Ok(iso.scaled(n as f64).plus(cut.scaled(-1.0)))
}

/// `c_N^+(γ) = N c(γ) − ∫_{√N}^∞ (1+τ²−2τ/√N)^{−γ/2}/τ^{1+2s} dτ`.
pub fn c_n_plus(gamma: f64, s: f64, n: usize) -> Result<f64> {
    Ok(c_n_plus_with(gamma, s, n, &default_tolerance())?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsMuForm {
    Primary,
    Alternate,
}

pub fn c_s_mu_with(mu: f64, s: f64, form: CsMuForm, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    if !(mu > 0.0 && mu < 2.0 * s) {
        return Err(domain("mu", "must lie in (0, 2s)"));
    }
    match form {
        CsMuForm::Primary => {
            let sec = SymmetricSection::new(
                move |a: f64, o: f64| {
                    folded_half(
                        a,
                        o,
                        |t| even_power_sum(mu, t),
                        |a, o| {
                            if a == -1.0 {
                                if o > 0.0 {
                                    o.powf(mu) - 1.0
                                } else {
                                    -1.0
                                }
                            } else {
                                let t = a + o;
                                if t <= -1.0 {
                                    -1.0
                                } else {
                                    (mu * t.ln_1p()).exp_m1()
                                }
                            }
                        },
                    )
                },
                1.0,
                mu * (mu - 1.0),
                Tail::Decay { growth_alpha: mu },
            )
            .breakpoint(-1.0, mu)
            .noise_floor(0.0);
            Ok(quad::second_difference(&sec, s, tol)?)
        }
        CsMuForm::Alternate => {
            let two_s = 2.0 * s;
            let lo = two_s - mu - 1.0;
            let d = 2.0 * mu - two_s;
            let f = Integrand::new(move |t: f64| {
                let l = t.ln_1p();
                (lo * l).exp() * (d * l).exp_m1() / t.powf(two_s)
            })
            .singular(0.0, 1.0 - two_s)
            .tail((two_s - mu + 1.0).min(mu + 1.0));
            let r = quad::integrate(&f, 0.0, f64::INFINITY, tol)?;
            Ok(r.scaled(mu / two_s))
        }
    }
}

/// `c_{s,μ} = ∫_0^∞ ((1+τ)^μ+(1−τ)_+^μ−2)/τ^{1+2s} dτ`, in either representation.
pub fn c_s_mu(mu: f64, s: f64, form: CsMuForm) -> Result<f64> {
    Ok(c_s_mu_with(mu, s, form, &default_tolerance())?.value)
}

/// Raw second-difference integral of the bump `(1−t²)_+^s` at an interior point `t`.
pub fn bump_second_difference(s: f64, t: f64, tol: &Tolerance) -> Result<QuadResult> {
    check_s(s)?;
    if !(t.abs() < 1.0) {
        return Err(domain("t", "must lie in (-1,1)"));
    }
    let right = 1.0 - t;
    let left = -1.0 - t;
    let base = (1.0 - t * t).powf(s);
    let sec = SymmetricSection::new(
        move |a: f64, o: f64| {
            let (p, q) = if a == right {
                (-o, 2.0 + o)
            } else if a == left {
                (2.0 - o, o)
            } else {
                let y = t + a + o;
                (1.0 - y, 1.0 + y)
            };
            let v = if p > 0.0 && q > 0.0 { (p * q).powf(s) } else { 0.0 };
            v - base
        },
        base,
        -2.0 * s * (1.0 - t * t).powf(s - 1.0) + 4.0 * s * (s - 1.0) * t * t * (1.0 - t * t).powf(s - 2.0),
        Tail::Decay { growth_alpha: 0.0 },
    )
    .breakpoint(right, s)
    .breakpoint(left, s);
    Ok(quad::second_difference(&sec, s, tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
pub const ROOT_WIDTH_TOL: f64 = 1e-10;

/// Bisection with Illinois-secant steps on a sign-changing bracket.
pub fn solve_bracketed(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
) -> Result<RootResult> {
    if flo == 0.0 {
        return Ok(RootResult { root: lo, residual: 0.0, bracket: (lo, hi), iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(RootResult { root: hi, residual: 0.0, bracket: (lo, hi), iterations: 0 });
    }
    debug_assert!(flo.signum() != fhi.signum());
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let mut side = 0i8;
    let mut iterations = 0;
    let mut last_width = hi - lo;
    while iterations < 300 {
        iterations += 1;
        let width = hi - lo;
        let bisect = iterations % 4 == 0 && width > 0.5 * last_width;
        if iterations % 4 == 0 {
            last_width = width;
        }
        let mut x = if bisect { 0.5 * (lo + hi) } else { (lo * fhi - hi * flo) / (fhi - flo) };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return Ok(RootResult { root: x, residual: 0.0, bracket: (lo, hi), iterations });
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= ROOT_WIDTH_TOL && best.1.abs() <= ROOT_RESIDUAL_TOL {
            break;
        }
    }
    if best.1.abs() > ROOT_RESIDUAL_TOL {
        return Err(ConstantsError::NotConverged { root: best.0, residual: best.1 });
    }
    let root = best.0.clamp(lo, hi);
    Ok(RootResult { root, residual: best.1, bracket: (lo.min(root), hi.max(root)), iterations })
}

/// Sign of a value when its error bar excludes zero.
fn sign(r: &QuadResult) -> Option<f64> {
    if r.value.abs() > r.abs_error_estimate {
        Some(r.value.signum())
    } else {
        None
    }
}

pub const GAMMA_BAR_EPS: f64 = 1e-6;

pub fn find_gamma_bar_with(k: usize, s: f64, tol: &Tolerance) -> Result<RootResult> {
    check_s(s)?;
    if k < 1 {
        return Err(domain("k", "must be at least 1"));
    }
    let eval = |g: f64| c_k_fn_with(g, s, k, tol);
    let scan_tol = Tolerance { abs_tol: tol.abs_tol.max(1e-12), rel_tol: tol.rel_tol.max(1e-9), max_evals: 200_000 };
    let scan = |g: f64| match c_k_fn_with(g, s, k, &scan_tol) {
        Err(ConstantsError::Section(SectionError::Quad(QuadError::BudgetExceeded { value, error, n_evals }))) => {
            Ok(QuadResult { value, abs_error_estimate: error, n_evals })
        }
        other => other,
    };
    let mut grid = vec![1e-3, 5e-3, 0.0125];
    grid.extend((1..40).map(|i| 0.025 * i as f64));
    grid.extend([0.99, 0.999, 1.0 - GAMMA_BAR_EPS]);
    let mut negative: Option<(f64, f64)> = None;
    for &g in &grid {
        let r = scan(g)?;
        match (sign(&r), negative) {
            (Some(sg), None) if sg < 0.0 => negative = Some((g, r.value)),
            (Some(sg), Some(_)) if sg < 0.0 => negative = Some((g, r.value)),
            (Some(sg), Some((lo, _))) if sg > 0.0 => {
                let flo = eval(lo)?.value;
                let fhi = eval(g)?.value;
                return solve_bracketed(|x| Ok(eval(x)?.value), lo, g, flo, fhi);
            }
            _ => {}
        }
    }
    Err(ConstantsError::NoRoot { k, s })
}

/// Root `γ̄` of `c_k` in `(0,1)`; `NoRoot` when `c_k` does not change sign there.
pub fn find_gamma_bar(k: usize, s: f64) -> Result<RootResult> {
    find_gamma_bar_with(k, s, &default_tolerance())
}

pub const GAMMA_SEARCH_LIMIT: f64 = 1e3;

pub fn find_gamma_tilde_with(n: usize, s: f64, tol: &Tolerance) -> Result<RootResult> {
    check_s(s)?;
    check_n(n)?;
    let eval = |g: f64| -> Result<f64> { Ok(c_iso_with(g, s, n, tol)?.value) };
    let mut lo = 0.5;
    let mut flo = eval(lo)?;
    while flo >= 0.0 {
        lo *= 0.5;
        if lo < 1e-6 {
            return Err(ConstantsError::BracketFailure { what: "c", limit: lo });
        }
        flo = eval(lo)?;
    }
    let mut hi = lo;
    let mut fhi = flo;
    while fhi < 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        if hi > GAMMA_SEARCH_LIMIT {
            return Err(ConstantsError::BracketFailure { what: "c", limit: GAMMA_SEARCH_LIMIT });
        }
        fhi = eval(hi)?;
    }
    solve_bracketed(eval, lo, hi, flo, fhi)
}

/// Positive root `γ̃` of `c`.
pub fn find_gamma_tilde(n: usize, s: f64) -> Result<RootResult> {
    find_gamma_tilde_with(n, s, &default_tolerance())
}

pub fn find_gamma_plus_with(n: usize, s: f64, tol: &Tolerance) -> Result<RootResult> {
    let tilde = find_gamma_tilde_with(n, s, tol)?;
    let eval = |g: f64| -> Result<f64> { Ok(c_n_plus_with(g, s, n, tol)?.value) };
    let lo0 = tilde.root;
    let flo0 = eval(lo0)?;
    if flo0 >= 0.0 {
        return Err(ConstantsError::BracketFailure { what: "c_N^+", limit: lo0 });
    }
    let (mut lo, mut flo) = (lo0, flo0);
    let mut step = 0.5;
    loop {
        let hi = lo0 + step;
        if hi > GAMMA_SEARCH_LIMIT {
            return Err(ConstantsError::BracketFailure { what: "c_N^+", limit: GAMMA_SEARCH_LIMIT });
        }
        let fhi = eval(hi)?;
        if fhi > 0.0 {
            let r = solve_bracketed(eval, lo, hi, flo, fhi)?;
            if !(r.root > tilde.root) {
                return Err(ConstantsError::BracketFailure { what: "c_N^+", limit: r.root });
            }
            return Ok(r);
        }
        lo = hi;
        flo = fhi;
        step *= 2.0;
    }
}

/// Root `γ^+ > γ̃` of `c_N^+`.
pub fn find_gamma_plus(n: usize, s: f64) -> Result<RootResult> {
    find_gamma_plus_with(n, s, &default_tolerance())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub s: f64,
    pub n: usize,
    pub k: usize,
    pub c_s: f64,
    pub gamma_bar: Option<f64>,
    pub gamma_tilde: f64,
    pub gamma_plus: f64,
    pub beta_val: f64,
}

impl ConstantsBundle {
    pub fn compute(params: ProblemParams) -> Result<Self> {
        let gamma_bar = match find_gamma_bar(params.k, params.s) {
            Ok(r) => Some(r.root),
            Err(ConstantsError::NoRoot { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(ConstantsBundle {
            s: params.s,
            n: params.n,
            k: params.k,
            c_s: normalizing_constant(params.s),
            gamma_bar,
            gamma_tilde: find_gamma_tilde(params.n, params.s)?.root,
            gamma_plus: find_gamma_plus(params.n, params.s)?.root,
            beta_val: beta_1ms_s(params.s),
        })
    }
}

/// One cell of the exponent table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bound {
    Exact { value: f64 },
    AtLeast { value: f64 },
    AtMost { value: f64 },
    Interval { lo: f64, hi: f64 },
    NegInfinity,
}

impl Bound {
    pub fn render(&self) -> String {
        match self {
            Bound::Exact { value } => format!("{value}"),
            Bound::AtLeast { value } => format!(">= {value}"),
            Bound::AtMost { value } => format!("<= {value}"),
            Bound::Interval { lo, hi } => format!("in [{lo}, {hi}]"),
            Bound::NegInfinity => "-inf".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremal {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub operator: String,
    pub variant: Extremal,
    pub k: usize,
    pub p_star: Bound,
    pub p_lower_star_growth: Bound,
    pub p_lower_star: Bound,
    /// `1+2s/γ̄`, an upper bound for `p^⋆` of `I_k^+` when `γ̄` exists.
    pub whole_space_reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub n: usize,
    pub s: f64,
    pub rows: Vec<ExponentRow>,
}

/// Numeric instantiation of the critical exponent table.
pub fn exponent_table(n: usize, s: f64) -> Result<ExponentTable> {
    check_s(s)?;
    check_n(n)?;
    let mut rows = Vec::new();
    for k in 1..=n {
        if k < n {
            rows.push(ExponentRow {
                operator: format!("I_{k}^-"),
                variant: Extremal::Minus,
                k,
                p_star: Bound::Exact { value: 1.0 },
                p_lower_star_growth: Bound::Exact { value: 1.0 },
                p_lower_star: Bound::Exact { value: 1.0 },
                whole_space_reference: None,
            });
        } else {
            let gp = find_gamma_plus(n, s)?.root;
            rows.push(ExponentRow {
                operator: format!("I_{k}^-"),
                variant: Extremal::Minus,
                k,
                p_star: Bound::AtMost { value: 1.0 + 2.0 * s / gp },
                p_lower_star_growth: Bound::NegInfinity,
                p_lower_star: Bound::Interval { lo: -1.0, hi: 0.0 },
                whole_space_reference: None,
            });
        }
    }
    for k in 1..=n {
        let gamma_bar = match find_gamma_bar(k, s) {
            Ok(r) => Some(r.root),
            Err(ConstantsError::NoRoot { .. }) => None,
            Err(e) => return Err(e),
        };
        let lower = if k == 1 && s >= 0.5 {
            1.0 / (1.0 - s)
        } else {
            let g = gamma_bar.ok_or(ConstantsError::NoRoot { k, s })?;
            1.0 + 2.0 * s / (g + 1.0)
        };
        rows.push(ExponentRow {
            operator: format!("I_{k}^+"),
            variant: Extremal::Plus,
            k,
            p_star: Bound::AtLeast { value: lower },
            p_lower_star_growth: Bound::NegInfinity,
            p_lower_star: if k < n { Bound::AtMost { value: 0.0 } } else { Bound::Interval { lo: -1.0, hi: 0.0 } },
            whole_space_reference: gamma_bar.map(|g| 1.0 + 2.0 * s / g),
        });
    }
    Ok(ExponentTable { n, s, rows })
}
