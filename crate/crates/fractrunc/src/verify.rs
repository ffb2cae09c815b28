//! Numerical checks of the inequalities satisfied by the constructions.
//!
//! Every claim is recorded as a [`Residual`] with its own error bar. A report
//! passes when every claim holds after the error bar is added against it, fails
//! when some claim is violated even in its favour, and is inconclusive otherwise.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::constants::{self, beta_1ms_s, normalizing_constant, ConstantsError, CsMuForm};
use crate::operators::{
    basis_vector, directional_at, dot, frame_sum, norm, unit, Field, Frame, OperatorError, Surface,
};
use crate::profiles::{
    self, BumpTrain, HalfSpaceFn, PowerTransformField, ProfileError, PsiKind, SingularOp, TransformParams,
};
use crate::quad::{QuadResult, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{0}")]
    Domain(String),
    #[error("geometry precondition fails: {0}")]
    GeometryViolation(String),
    #[error("no admissible eps on the grid for s = {s}, p = {p}")]
    NotFound { s: f64, p: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// `value ≤ bound`.
    Le,
    /// `|value| ≤ bound`.
    AbsLe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub point: Vec<f64>,
    pub claim: String,
    pub kind: ClaimKind,
    pub value: f64,
    pub bound: f64,
    pub error_estimate: f64,
}

impl Residual {
    pub fn le(point: &[f64], claim: &str, value: f64, error_estimate: f64) -> Self {
        Residual { point: point.to_vec(), claim: claim.into(), kind: ClaimKind::Le, value, bound: 0.0, error_estimate }
    }

    pub fn abs_le(point: &[f64], claim: &str, value: f64, bound: f64, error_estimate: f64) -> Self {
        Residual { point: point.to_vec(), claim: claim.into(), kind: ClaimKind::AbsLe, value, bound, error_estimate }
    }

    fn effective(&self) -> f64 {
        match self.kind {
            ClaimKind::Le => self.value,
            ClaimKind::AbsLe => self.value.abs(),
        }
    }

    /// Amount by which the claim is violated before error bars (positive = violated).
    pub fn violation(&self) -> f64 {
        self.effective() - self.bound
    }

    pub fn verdict(&self) -> Verdict {
        let v = self.violation();
        if v.is_nan() {
            Verdict::Inconclusive
        } else if v + self.error_estimate <= 0.0 {
            Verdict::Pass
        } else if v - self.error_estimate > 0.0 {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub construction: String,
    pub params: serde_json::Value,
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<Residual>,
    pub max_violation: f64,
    pub verdict: Verdict,
    /// Whether the automatic tolerance refinement was used.
    pub refined: bool,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl VerificationReport {
    fn new(construction: &str, params: serde_json::Value, points: Vec<Vec<f64>>, residuals: Vec<Residual>) -> Self {
        let max_violation = residuals.iter().map(Residual::violation).fold(f64::NEG_INFINITY, f64::max);
        let verdict = verdict_of(&residuals);
        VerificationReport {
            construction: construction.into(),
            params,
            points,
            residuals,
            max_violation,
            verdict,
            refined: false,
            extra: serde_json::Map::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn verdict_of(residuals: &[Residual]) -> Verdict {
    residuals.iter().fold(Verdict::Pass, |v, r| v.combine(r.verdict()))
}

/// Evaluates `claims` once and, when the verdict is inconclusive, once more with
/// tolerances a hundred times tighter.
fn with_refinement(
    tol: &Tolerance,
    claims: impl Fn(&Tolerance) -> Result<Vec<Residual>>,
) -> Result<(Vec<Residual>, bool)> {
    let first = claims(tol)?;
    if verdict_of(&first) != Verdict::Inconclusive {
        return Ok((first, false));
    }
    Ok((claims(&tol.tightened(100.0))?, true))
}

fn finish(
    construction: &str,
    params: serde_json::Value,
    points: Vec<Vec<f64>>,
    (residuals, refined): (Vec<Residual>, bool),
) -> VerificationReport {
    let mut r = VerificationReport::new(construction, params, points, residuals);
    r.refined = refined;
    r
}

fn par_points<T: Send>(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<Vec<T>> + Sync) -> Result<Vec<T>> {
    let per: Vec<Result<Vec<T>>> = points.par_iter().map(|x| f(x)).collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum RegionKind {
    HalfspaceAnnulus { r_min: f64, r_max: f64 },
    Slab { lo: f64, hi: f64 },
    ExteriorBall { r: f64 },
}

/// Sample grid in `ℝ^N_+`: log-spaced radii (or heights) × directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub dim: usize,
    pub n_radii: usize,
    pub n_dirs: usize,
}

impl Region {
    pub fn new(kind: RegionKind, dim: usize) -> Self {
        Region { kind, dim, n_radii: 8, n_dirs: 8 }
    }

    /// Unit directions with positive last coordinate, from near `e_N` to near the wall.
    pub fn directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|j| {
                let theta = (j as f64 + 0.5) / count as f64 * 0.5 * PI;
                let phi = 2.0 * PI * j as f64 * 0.381966;
                let mut v = vec![0.0; dim];
                v[dim - 1] = theta.cos();
                if dim == 2 {
                    v[0] = if j % 2 == 0 { theta.sin() } else { -theta.sin() };
                } else if dim > 2 {
                    v[0] = theta.sin() * phi.cos();
                    v[1] = theta.sin() * phi.sin();
                }
                v
            })
            .collect()
    }

    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![lo];
        }
        (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
    }

    pub fn sample(&self) -> Vec<Vec<f64>> {
        let (lo, hi) = match self.kind {
            RegionKind::HalfspaceAnnulus { r_min, r_max } => (r_min, r_max),
            RegionKind::ExteriorBall { r } => (r, 10.0 * r),
            RegionKind::Slab { lo, hi } => {
                let mut out = Vec::new();
                for i in 0..self.n_radii {
                    let t = if self.n_radii == 1 { 0.5 } else { i as f64 / (self.n_radii - 1) as f64 };
                    for j in 0..self.n_dirs {
                        let mut x = vec![0.0; self.dim];
                        x[self.dim - 1] = lo + t * (hi - lo);
                        if self.dim > 1 {
                            x[0] = 0.37 * j as f64;
                        }
                        out.push(x);
                    }
                }
                return out;
            }
        };
        let mut out = Vec::new();
        for r in Self::log_spaced(lo, hi, self.n_radii) {
            for d in Self::directions(self.dim, self.n_dirs) {
                out.push(d.iter().map(|c| r * c).collect());
            }
        }
        out
    }
}

fn require_halfspace(points: &[Vec<f64>]) -> Result<()> {
    if points.iter().any(|x| x.is_empty() || !(x[x.len() - 1] > 0.0)) {
        return Err(VerifyError::Domain("sample points must lie in the open half-space x_N > 0".into()));
    }
    Ok(())
}

/// Tolerance scaled to the size of the claim's right-hand side.
fn scaled_tol(tol: &Tolerance, scale: f64) -> Tolerance {
    Tolerance { abs_tol: tol.abs_tol * scale.abs().clamp(1e-300, 1.0), ..*tol }
}

/// `I_ξ (x_N)_+^μ = C_s |ξ_N|^{2s} c_{s,μ} x_N^{μ−2s}`, to `1e−7` relative.
pub fn verify_power_identity(
    mu: f64,
    s: f64,
    xi: &[f64],
    points: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<VerificationReport> {
    require_halfspace(points)?;
    let z = profiles::PowerProfile { amplitude: 1.0, mu };
    let c = constants::c_s_mu_with(mu, s, CsMuForm::Primary, &constants::default_tolerance())?;
    let cs = normalizing_constant(s);
    let xi_n = xi[xi.len() - 1].abs();
    let res = with_refinement(tol, |t| {
        par_points(points, |x| {
            let n = x.len();
            let factor = cs * xi_n.powf(2.0 * s) * x[n - 1].powf(mu - 2.0 * s);
            let rhs = factor * c.value;
            let lhs = directional_at(&z, x, xi, s, t)?;
            let err = lhs.abs_error_estimate + factor.abs() * c.abs_error_estimate;
            Ok(vec![Residual::abs_le(x, "power identity", lhs.value - rhs, 1e-7 * rhs.abs().max(1.0), err)])
        })
    })?;
    Ok(finish("power_identity", json!({"mu": mu, "s": s, "xi": xi}), points.to_vec(), res))
}

/// `−C_s β(1−s,s) + C_s ((1−2ε)^{−2s}/s) ε^{2s} + ε^{2sp}`.
pub fn bump_inequality(s: f64, p: f64, eps: f64) -> f64 {
    let cs = normalizing_constant(s);
    -cs * beta_1ms_s(s) + cs * (1.0 - 2.0 * eps).powf(-2.0 * s) / s * eps.powf(2.0 * s) + eps.powf(2.0 * s * p)
}

/// Largest `ε` with [`bump_inequality`] ≤ 0, less a 10% margin.
pub fn epsilon_threshold(s: f64, p: f64) -> Result<f64> {
    constants::check_s(s)?;
    if !(p > 0.0) {
        return Err(VerifyError::Domain("p must be positive".into()));
    }
    let mut lo = 1e-6;
    if bump_inequality(s, p, lo) > 0.0 {
        return Err(VerifyError::NotFound { s, p });
    }
    let mut hi = 0.5;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if bump_inequality(s, p, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.9 * lo)
}

/// Bump interiors and gaps of the first three periods at `x' = 0`.
pub fn bump_train_points(eps: f64, dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for m in 0..3 {
        let m = m as f64;
        let heights = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|f| m + f * 2.0 * eps)
            .chain([0.25, 0.5, 0.75].iter().map(|f| m + 2.0 * eps + f * (1.0 - 2.0 * eps)));
        for h in heights {
            let mut x = vec![0.0; dim];
            x[dim - 1] = h;
            out.push(x);
        }
    }
    out
}

/// Default number of explicitly resolved periods on each bump-train line.
pub const BUMP_WINDOW: usize = 256;

/// Bump-train supersolution: at bump points `I_{e_N}u + u^p ≤ 0` and the cross-bump
/// bound; at gap points `u = 0` and the frame sum along `e_1,…,e_{N−1}` vanishes.
pub fn verify_bump_train(s: f64, p: f64, eps: f64, points: &[Vec<f64>], tol: &Tolerance) -> Result<VerificationReport> {
    require_halfspace(points)?;
    if !(p > 0.0) {
        return Err(VerifyError::Domain("p must be positive".into()));
    }
    let b = match profiles::make_bump_train(eps, s, BUMP_WINDOW)? {
        HalfSpaceFn::BumpTrain { eps, s, window } => BumpTrain { eps, s, window },
        _ => unreachable!(),
    };
    let cs = normalizing_constant(s);
    let bound8 = -cs * beta_1ms_s(s) + cs * (1.0 - 2.0 * eps).powf(-2.0 * s) / s * eps.powf(2.0 * s);
    let res = with_refinement(tol, |t| {
        par_points(points, |x| {
            let n = x.len();
            let u = b.value(x);
            let en = basis_vector(n, n - 1);
            if u > 0.0 {
                let i = directional_at(&b, x, &en, s, t)?;
                Ok(vec![
                    Residual::le(x, "I_eN u + u^p <= 0", i.value + u.powf(p), i.abs_error_estimate),
                    Residual::le(x, "I_eN u <= cross-bump bound", i.value - bound8, i.abs_error_estimate),
                ])
            } else {
                let frame = Frame::canonical(n, &(0..n - 1).collect::<Vec<_>>())?;
                let f = frame_sum(&b, x, &frame, s, t)?;
                Ok(vec![
                    Residual::abs_le(x, "u = 0 in gap", u, 0.0, 0.0),
                    Residual::abs_le(x, "frame sum along e_1..e_(N-1) = 0", f.value, 1e-12, f.abs_error_estimate),
                ])
            }
        })
    })?;
    let mut report = finish(
        "bump_train",
        json!({"s": s, "p": p, "eps": eps, "window": BUMP_WINDOW, "cross_bump_bound": bound8}),
        points.to_vec(),
        res,
    );
    report.extra.insert("inequality_at_eps".into(), json!(bump_inequality(s, p, eps)));
    Ok(report)
}

/// `|x+τξ|` minimized over τ.
fn min_distance(x: &[f64], xi: &[f64]) -> f64 {
    (dot(x, x) - dot(x, xi).powi(2)).max(0.0).sqrt()
}

/// Frame bound for `I_N^- u_γ ≤ C_s c_N^+(γ) |x|^{−γ−2s}` outside `B_R`, `R = √(N/(N−1))`.
pub fn verify_t49_2(n: usize, s: f64, gamma: f64, points: &[Vec<f64>], tol: &Tolerance) -> Result<VerificationReport> {
    require_halfspace(points)?;
    let r_min = (n as f64 / (n as f64 - 1.0)).sqrt();
    if points.iter().any(|x| x.len() != n || norm(x) < r_min * (1.0 - 1e-12)) {
        return Err(VerifyError::Domain(format!("points must lie in R^{n} outside the ball of radius {r_min}")));
    }
    let u = profiles::make_halfspace_power_tail(gamma)?.build(n)?;
    let c = constants::c_n_plus_with(gamma, s, n, &constants::default_tolerance())?;
    let cs = normalizing_constant(s);
    let res = with_refinement(tol, |t| {
        par_points(points, |x| {
            let r = norm(x);
            let frame = Frame::balanced(x)?;
            let factor = cs * r.powf(-gamma - 2.0 * s);
            let rhs = factor * c.value;
            let mut out = Vec::new();
            for xi in &frame.vectors {
                let d = min_distance(x, xi);
                out.push(Residual::le(x, "line stays outside |y| < |x|/sqrt(2)", r / SQRT_2 - d, 1e-14 * r));
            }
            let f = frame_sum(u.as_ref(), x, &frame, s, &scaled_tol(t, rhs))?;
            let err = f.abs_error_estimate + factor * c.abs_error_estimate;
            out.push(Residual::le(x, "frame sum <= C_s c_N^+ |x|^(-gamma-2s)", f.value - rhs, err));
            Ok(out)
        })
    })?;
    let mut report =
        finish("t49_2", json!({"N": n, "s": s, "gamma": gamma, "R": r_min, "c_n_plus": c.value}), points.to_vec(), res);
    report.extra.insert("rhs_constant".into(), json!(cs * c.value));
    Ok(report)
}

/// Lower-bound constant `K` and decay exponent `e` of the claim
/// `∑ I_{ξ_i} ψ(x) ≥ C_s K x_N / |x|^e`.
pub fn psi_claim(f: &HalfSpaceFn) -> Result<(f64, f64)> {
    let dt = constants::default_tolerance();
    Ok(match *f {
        HalfSpaceFn::PsiDecay { k, s, gamma_bar, gamma } => {
            let ck = constants::c_k_fn_with(gamma, s, k, &dt)?.value;
            (ck * (gamma + 2.0 * s) / (2.0 * gamma_bar), gamma + 2.0 * s + 2.0)
        }
        HalfSpaceFn::PsiHalfint { gamma } => {
            let c = constants::hat_c_dec_with(gamma, 0.5, &dt)?.value;
            (c * (gamma + 1.0) / (2.0 * gamma), gamma + 3.0)
        }
        HalfSpaceFn::PsiGrowth { s, gamma_bar, gamma } => {
            let c = constants::hat_c_gro_with(gamma, s, &dt)?.value;
            (c * (2.0 * s - gamma) / (2.0 * gamma_bar), 2.0 * s + 2.0 - gamma)
        }
        _ => return Err(VerifyError::Domain("not a psi construction".into())),
    })
}

/// Subsolution bound of ψ on the frame `{x̂, completion}` at the given radii; the
/// smallest radius beyond which every sample holds is reported as the empirical `R₀`.
pub fn verify_psi_subsolution(
    kind: PsiKind,
    k: usize,
    s: f64,
    n: usize,
    radii: &[f64],
    n_dirs: usize,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    if n < k.max(2) {
        return Err(VerifyError::Domain("N must be at least max(k, 2)".into()));
    }
    let psi = profiles::make_psi(kind, k, s)?;
    let field = psi.build(n)?;
    let (kc, e) = psi_claim(&psi)?;
    let cs = normalizing_constant(s);
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let dirs = Region::directions(n, n_dirs);
    let points: Vec<Vec<f64>> =
        radii.iter().flat_map(|r| dirs.iter().map(move |d| d.iter().map(|c| r * c).collect())).collect();
    let res = with_refinement(tol, |t| {
        par_points(&points, |x| {
            let r = norm(x);
            let bound = cs * kc * x[n - 1] / r.powf(e);
            let frame = Frame::completion(x, k)?;
            let f = frame_sum(field.as_ref(), x, &frame, s, &scaled_tol(t, bound))?;
            Ok(vec![Residual::le(x, "lower bound - frame sum <= 0", bound - f.value, f.abs_error_estimate)])
        })
    })?;
    let (residuals, refined) = res;
    let per_radius: Vec<Verdict> =
        radii.iter().enumerate().map(|(i, _)| verdict_of(&residuals[i * n_dirs..(i + 1) * n_dirs])).collect();
    let mut start = radii.len();
    while start > 0 && per_radius[start - 1] == Verdict::Pass {
        start -= 1;
    }
    let r0 = radii.get(start).copied();
    let verdict = match r0 {
        Some(_) => Verdict::Pass,
        None => per_radius.last().copied().unwrap_or(Verdict::Inconclusive),
    };
    let mut report = VerificationReport::new(
        "psi_subsolution",
        json!({"kind": kind, "k": k, "s": s, "N": n, "function": psi, "lower_bound_constant": cs * kc, "exponent": e}),
        points.clone(),
        residuals,
    );
    report.refined = refined;
    report.verdict = verdict;
    report.extra.insert("empirical_r0".into(), json!(r0));
    report.extra.insert("per_radius".into(), json!(radii.iter().zip(&per_radius).collect::<Vec<_>>()));
    Ok(report)
}

/// `M(x_N)_+^μ` against `I_{e_N}` (exact cancellation) or against random frames for `I_N^+`.
pub fn verify_singular_supersolution(
    s: f64,
    p: f64,
    op: SingularOp,
    n: usize,
    points: &[Vec<f64>],
    frames: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    require_halfspace(points)?;
    let sol = profiles::build_singular_supersolution(s, p, op, n)?;
    let u = sol.function.build(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<Frame> = match op {
        SingularOp::IkMinus => Vec::new(),
        SingularOp::InPlus => {
            (0..frames).map(|_| Frame::random(n, n, &mut rng)).collect::<std::result::Result<_, _>>()?
        }
    };
    let res = with_refinement(tol, |t| {
        par_points(points, |x| {
            let up = u.value(x).powf(p);
            match op {
                SingularOp::IkMinus => {
                    let i = directional_at(u.as_ref(), x, &basis_vector(n, n - 1), s, t)?;
                    Ok(vec![Residual::abs_le(x, "|I_eN u + u^p| <= 1e-7", i.value + up, 1e-7, i.abs_error_estimate)])
                }
                SingularOp::InPlus => {
                    let mut out = Vec::new();
                    for f in &sample {
                        let big = f.vectors.iter().map(|v| v[n - 1].abs()).fold(0.0, f64::max);
                        out.push(Residual::le(x, "max |<xi,e_N>| >= 1/sqrt(N)", 1.0 / (n as f64).sqrt() - big, 1e-15));
                        let fs = frame_sum(u.as_ref(), x, f, s, t)?;
                        out.push(Residual::le(x, "frame sum + u^p <= 0", fs.value + up, fs.abs_error_estimate));
                    }
                    Ok(out)
                }
            }
        })
    })?;
    Ok(finish(
        "singular_supersolution",
        json!({"s": s, "p": p, "op": op, "N": n, "M": sol.amplitude, "mu": sol.mu, "frames": frames, "seed": seed, "function": sol.function}),
        points.to_vec(),
        res,
    ))
}

/// Indicator of the closed ball `B̄_r(y)`.
struct BallPatch {
    center: Vec<f64>,
    radius: f64,
}

impl Field for BallPatch {
    fn value(&self, x: &[f64]) -> f64 {
        let d: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        if d <= self.radius * self.radius {
            1.0
        } else {
            0.0
        }
    }
    fn hessian_quad(&self, _x: &[f64], _xi: &[f64]) -> f64 {
        0.0
    }
    fn surfaces(&self, _n: usize) -> Vec<Surface> {
        vec![Surface::Sphere { center: self.center.clone(), radius: self.radius, exponent: 0.0 }]
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
}

/// Ball below the wall, invisible along the balanced frame at every half-space point.
pub fn verify_avoidance_example(
    n: usize,
    s: f64,
    r: f64,
    y: &[f64],
    points: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<VerificationReport> {
    require_halfspace(points)?;
    if y.len() != n || !(r > 0.0) {
        return Err(VerifyError::Domain("center must lie in R^N and radius be positive".into()));
    }
    if !(y[n - 1] <= -SQRT_2 * r) {
        return Err(VerifyError::GeometryViolation(format!("y_N = {} exceeds -sqrt(2) r = {}", y[n - 1], -SQRT_2 * r)));
    }
    let u = BallPatch { center: y.to_vec(), radius: r };
    let res = with_refinement(tol, |t| {
        par_points(points, |x| {
            let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let dist = norm(&d);
            let frame = Frame::balanced(&d)?;
            let mut out = vec![Residual::le(x, "|x-y| > sqrt(2) r", SQRT_2 * r - dist, 1e-14 * dist)];
            for xi in &frame.vectors {
                let m = min_distance(&d, xi);
                out.push(Residual::le(x, "min_tau |x+tau xi-y| >= |x-y|/sqrt(2)", dist / SQRT_2 - m, 1e-14 * dist));
                out.push(Residual::le(x, "line misses the closed ball", r - m, 1e-14 * dist));
            }
            let f = frame_sum(&u, x, &frame, s, t)?;
            out.push(Residual::abs_le(x, "frame sum = 0", f.value, 1e-12, f.abs_error_estimate));
            Ok(out)
        })
    })?;
    Ok(finish("avoidance_example", json!({"N": n, "s": s, "r": r, "y": y}), points.to_vec(), res))
}

/// `b − a ≤ β a^{(β−1)/β}(b^{1/β} − a^{1/β})` as a residual `lhs − rhs`, with a rounding scale.
pub fn transform_scalar_residual(a: f64, b: f64, beta: f64) -> (f64, f64) {
    let lhs = b - a;
    let rhs = beta * a * ((b / a).ln() / beta).exp_m1();
    let scale = lhs.abs().max(if rhs.is_finite() { rhs.abs() } else { 0.0 }).max(a);
    (lhs - rhs, 64.0 * f64::EPSILON * scale)
}

/// Key inequality of the power transform on `ψ = power_transform(base)`, the
/// scalar inequality on random triples, and for singular bases the
/// supersolution inequality `I_{e_N}v + v^q ≤ 0`.
#[allow(clippy::too_many_arguments)]
pub fn verify_transform(
    s: f64,
    p: f64,
    q: f64,
    base: &HalfSpaceFn,
    points: &[Vec<f64>],
    triples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    require_halfspace(points)?;
    let n = points.first().map(|x| x.len()).unwrap_or(2);
    let tp = TransformParams::new(p, q)?;
    let beta = tp.beta_exp;
    let psi = profiles::power_transform(base, p, q)?.build(n)?;
    let root = PowerTransformField { coef: tp.alpha_coef.powf(1.0 / beta), power: 1.0, base: base.build(n)? };
    let singular = matches!(base, HalfSpaceFn::SingularPower { .. });
    let mut dirs = vec![basis_vector(n, n - 1)];
    let mut tilted = vec![0.0; n];
    tilted[0] = 1.0;
    tilted[n - 1] = 2.0;
    dirs.push(unit(&tilted));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::NEG_INFINITY, 0.0, vec![0.0; 3]);
    for _ in 0..triples {
        let a = 10.0 * (1.0 - rng.random::<f64>());
        let b = 10.0 * (1.0 - rng.random::<f64>());
        let be = 1.0 - rng.random::<f64>();
        let be = if be >= 1.0 { 0.5 } else { be };
        let (r, e) = transform_scalar_residual(a, b, be);
        if r - e > worst.0 - worst.1 {
            worst = (r, e, vec![a, b, be]);
        }
    }

    let res = with_refinement(tol, |t| {
        let mut out = par_points(points, |x| {
            let v = psi.value(x);
            let mut out = Vec::new();
            for xi in &dirs {
                let lhs = directional_at(psi.as_ref(), x, xi, s, t)?;
                let inner = directional_at(&root, x, xi, s, t)?;
                let factor = beta * v.powf((beta - 1.0) / beta);
                let rhs = factor * inner.value;
                let err = lhs.abs_error_estimate + factor.abs() * inner.abs_error_estimate;
                out.push(Residual::le(x, "I psi <= beta psi^((beta-1)/beta) I psi^(1/beta)", lhs.value - rhs, err));
            }
            if singular {
                let i: QuadResult = directional_at(psi.as_ref(), x, &dirs[0], s, t)?;
                out.push(Residual::le(x, "I_eN v + v^q <= 0", i.value + v.powf(q), i.abs_error_estimate));
            }
            Ok(out)
        })?;
        if triples > 0 {
            out.push(Residual::le(&worst.2, "scalar inequality, worst random triple", worst.0, worst.1));
        }
        Ok(out)
    })?;
    let mut report = finish(
        "transform",
        json!({"s": s, "p": p, "q": q, "base": base, "beta": beta, "alpha": tp.alpha_coef, "triples": triples, "seed": seed}),
        points.to_vec(),
        res,
    );
    report.extra.insert("identity_defect".into(), json!(tp.identity_defect()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule() {
        assert_eq!(Residual::le(&[], "", -1.0, 0.5).verdict(), Verdict::Pass);
        assert_eq!(Residual::le(&[], "", 1.0, 0.5).verdict(), Verdict::Fail);
        assert_eq!(Residual::le(&[], "", 0.1, 0.5).verdict(), Verdict::Inconclusive);
        assert_eq!(Residual::abs_le(&[], "", -1e-9, 1e-8, 1e-10).verdict(), Verdict::Pass);
    }

    #[test]
    fn scalar_inequality_is_equality_at_beta_one() {
        let (r, e) = transform_scalar_residual(2.0, 7.0, 1.0);
        assert!(r.abs() <= e);
    }

    #[test]
    fn threshold_satisfies_inequality() {
        let e = epsilon_threshold(0.5, 1.0).unwrap();
        assert!(bump_inequality(0.5, 1.0, e) <= 0.0);
    }
}
