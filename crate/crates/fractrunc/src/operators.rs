//! Directional operator `I_ξ`, frame sums and the extremal operators `I_k^±`.
//!
//! Every value returned here carries the normalizing constant `C_s`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{normalizing_constant, Extremal};
use crate::profiles::{RadialDerivative, RadialProfile};
use crate::quad::{second_difference, QuadResult, SectionError, Singularity, SymmetricSection, Tail, Tolerance};

/// Largest supported dimension.
pub const MAX_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    UnsupportedDimension(usize),
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("frame is not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid frame size k = {k} in dimension {n}")]
    FrameSize { k: usize, n: usize },
    #[error("representation hypothesis fails: {0}")]
    HypothesisViolation(String),
    #[error(transparent)]
    Section(#[from] SectionError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn basis_vector(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// A surface across which a function or one of its low derivatives is not smooth.
///
/// `exponent` describes the local behaviour `|τ−τ₀|^exponent` of a line section at a
/// crossing: 0 for a jump, 1 for a kink, `μ` for a `(·)_+^μ` edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum Surface {
    Hyperplane { normal: Vec<f64>, offset: f64, exponent: f64 },
    Sphere { center: Vec<f64>, radius: f64, exponent: f64 },
}

impl Surface {
    /// `{y : y_N = offset}` in dimension `n`.
    pub fn wall(n: usize, offset: f64, exponent: f64) -> Self {
        Surface::Hyperplane { normal: basis_vector(n, n - 1), offset, exponent }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            Surface::Hyperplane { exponent, .. } | Surface::Sphere { exponent, .. } => *exponent,
        }
    }

    /// Exact crossings `τ` of the line `x+τξ` with the surface.
    pub fn crossings(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        match self {
            Surface::Hyperplane { normal, offset, .. } => {
                let d = dot(normal, xi);
                if d.abs() < 1e-15 {
                    Vec::new()
                } else {
                    vec![(offset - dot(normal, x)) / d]
                }
            }
            Surface::Sphere { center, radius, .. } => {
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let b = dot(&diff, xi);
                let c = dot(&diff, &diff) - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    Vec::new()
                } else if disc == 0.0 {
                    vec![-b]
                } else {
                    let q = -(b + b.signum() * disc.sqrt());
                    if q == 0.0 {
                        vec![-disc.sqrt(), disc.sqrt()]
                    } else {
                        vec![q, c / q]
                    }
                }
            }
        }
    }
}

/// Breakpoints and tail model of one line section, for fields whose structure
/// is not captured by finitely many surfaces.
pub struct LineStructure {
    pub breaks: Vec<Singularity>,
    pub tail: Tail,
}

/// A pointwise-evaluable function on ℝ^N with the metadata the operator needs.
pub trait Field: Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// `u(x + (anchor+offset)ξ)`; overridden where offsets from a crossing must be
    /// resolved without rounding.
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        let t = anchor + offset;
        let mut y = [0.0; MAX_DIM];
        for i in 0..x.len() {
            y[i] = x[i] + t * xi[i];
        }
        self.value(&y[..x.len()])
    }

    /// `⟨D²u(x)ξ, ξ⟩`.
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64;

    /// `⟨∇u(x), ξ⟩`; central difference unless overridden.
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        let h = 1e-6 * (1.0 + norm(x));
        (self.value_on_line(x, xi, 0.0, h) - self.value_on_line(x, xi, 0.0, -h)) / (2.0 * h)
    }

    fn surfaces(&self, n: usize) -> Vec<Surface>;

    /// `α` with `|u(y)| ≤ C(1+|y|)^α`.
    fn growth_alpha(&self) -> f64;

    fn line_structure(&self, _x: &[f64], _xi: &[f64]) -> Option<LineStructure> {
        None
    }
}

impl<F: Field + ?Sized> Field for Box<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        (**self).value_on_line(x, xi, anchor, offset)
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        (**self).hessian_quad(x, xi)
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        (**self).directional_derivative(x, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        (**self).surfaces(n)
    }
    fn growth_alpha(&self) -> f64 {
        (**self).growth_alpha()
    }
    fn line_structure(&self, x: &[f64], xi: &[f64]) -> Option<LineStructure> {
        (**self).line_structure(x, xi)
    }
}

/// A one-dimensional restriction `τ ↦ u(x+τξ)`.
pub type LineSection<'a> = SymmetricSection<'a>;

/// Builds a section from a plain function of τ.
///
/// `c2_window` is the radius around 0 where the section is C², `discontinuities`
/// the τ-locations of jumps.
pub fn line_section<'a>(
    eval: impl Fn(f64) -> f64 + Sync + 'a,
    second_derivative: f64,
    c2_window: f64,
    discontinuities: &[f64],
    growth_alpha: f64,
) -> LineSection<'a> {
    let f0 = eval(0.0);
    let mut sec = SymmetricSection::new(
        move |a: f64, o: f64| eval(a + o) - f0,
        f0,
        second_derivative,
        Tail::Decay { growth_alpha },
    )
    .smooth_within(c2_window);
    for &d in discontinuities {
        sec = sec.breakpoint(d, 0.0);
    }
    sec
}

/// `I_ξ` of a line section: `C_s ∫_0^∞ (F(τ)+F(−τ)−2F(0))/τ^{1+2s} dτ`.
pub fn directional(section: &LineSection, s: f64, tol: &Tolerance) -> Result<QuadResult> {
    Ok(second_difference(section, s, tol)?.scaled(normalizing_constant(s)))
}

fn check_point(x: &[f64], xi: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() > MAX_DIM {
        return Err(OperatorError::UnsupportedDimension(x.len()));
    }
    if xi.len() != x.len() {
        return Err(OperatorError::Dimension { expected: x.len(), got: xi.len() });
    }
    let n = norm(xi);
    if (n - 1.0).abs() > 1e-10 {
        return Err(OperatorError::NotUnit(n));
    }
    Ok(())
}

/// The section of `u` through `x` along `ξ`, with crossings of the declared
/// surfaces as breakpoints.
pub fn section_of<'a>(u: &'a dyn Field, x: &'a [f64], xi: &'a [f64]) -> Result<LineSection<'a>> {
    check_point(x, xi)?;
    let u0 = u.value(x);
    let (breaks, tail) = match u.line_structure(x, xi) {
        Some(ls) => (ls.breaks, ls.tail),
        None => {
            let mut b = Vec::new();
            for surf in u.surfaces(x.len()) {
                for t in surf.crossings(x, xi) {
                    b.push(Singularity { location: t, exponent: surf.exponent() });
                }
            }
            (b, Tail::Decay { growth_alpha: u.growth_alpha() })
        }
    };
    let scale = 1.0 + norm(x);
    let mut sec =
        SymmetricSection::new(move |a: f64, o: f64| u.value_on_line(x, xi, a, o) - u0, u0, u.hessian_quad(x, xi), tail);
    for b in breaks {
        if b.location.abs() <= 1e-12 * scale {
            if b.exponent >= 2.0 {
                continue;
            }
            return Err(SectionError::NotSmooth.into());
        }
        sec = sec.breakpoint(b.location, b.exponent);
    }
    Ok(sec)
}

/// `I_ξ u(x)`.
pub fn directional_at(u: &dyn Field, x: &[f64], xi: &[f64], s: f64, tol: &Tolerance) -> Result<QuadResult> {
    let sec = section_of(u, x, xi)?;
    directional(&sec, s, tol)
}

/// An orthonormal set of `k` vectors in ℝ^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub vectors: Vec<Vec<f64>>,
}

impl Frame {
    pub const DEFECT_TOL: f64 = 1e-12;

    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let n = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.is_empty() || vectors.len() > n || n > MAX_DIM {
            return Err(OperatorError::FrameSize { k: vectors.len(), n });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(OperatorError::Dimension { expected: n, got: v.len() });
        }
        let f = Frame { vectors };
        let d = f.orthonormality_defect();
        if d > Self::DEFECT_TOL {
            return Err(OperatorError::NotOrthonormal(d));
        }
        Ok(f)
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// `max |⟨ξ_i,ξ_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                d = d.max((dot(a, b) - target).abs());
            }
        }
        d
    }

    /// Coordinate vectors `e_i` for the given (0-based) indices.
    pub fn canonical(n: usize, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= n) {
            return Err(OperatorError::FrameSize { k: indices.len(), n });
        }
        Frame::new(indices.iter().map(|&i| basis_vector(n, i)).collect())
    }

    /// `H e_1, …, H e_k` for the Householder reflection `H` taking `from` to `to`.
    fn reflected(from: &[f64], to: &[f64], k: usize) -> Result<Self> {
        let n = to.len();
        if k == 0 || k > n || n > MAX_DIM {
            return Err(OperatorError::FrameSize { k, n });
        }
        let to = unit(to);
        let v: Vec<f64> = from.iter().zip(&to).map(|(a, b)| a - b).collect();
        let vv = dot(&v, &v);
        let vectors = (0..k)
            .map(|i| {
                let mut e = basis_vector(n, i);
                if vv > 1e-28 {
                    let c = 2.0 * v[i] / vv;
                    for (ej, vj) in e.iter_mut().zip(&v) {
                        *ej -= c * vj;
                    }
                }
                e
            })
            .collect();
        Frame::new(vectors)
    }

    /// Frame of `k` vectors whose first element is `dir/|dir|`.
    pub fn completion(dir: &[f64], k: usize) -> Result<Self> {
        let e1 = basis_vector(dir.len(), 0);
        Self::reflected(&e1, dir, k)
    }

    /// Orthonormal basis with `⟨dir/|dir|, ξ_i⟩ = 1/√N` for every `i`.
    pub fn balanced(dir: &[f64]) -> Result<Self> {
        let n = dir.len();
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        Self::reflected(&ones, dir, n)
    }

    /// Orthonormalized Gaussian sample.
    pub fn random(n: usize, k: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        Ok(Frame { vectors: random_basis(n, rng)?.into_iter().take(k).collect() })
    }
}

fn random_basis(n: usize, rng: &mut impl rand::Rng) -> Result<Vec<Vec<f64>>> {
    if n == 0 || n > MAX_DIM {
        return Err(OperatorError::UnsupportedDimension(n));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for b in &q {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let l = norm(&v);
        if l > 1e-8 {
            q.push(v.iter().map(|x| x / l).collect());
        }
    }
    Ok(q)
}

/// `∑_i I_{ξ_i} u(x)`.
pub fn frame_sum(u: &dyn Field, x: &[f64], frame: &Frame, s: f64, tol: &Tolerance) -> Result<QuadResult> {
    if frame.dim() != x.len() {
        return Err(OperatorError::Dimension { expected: x.len(), got: frame.dim() });
    }
    let mut acc = QuadResult::exact(0.0);
    for xi in &frame.vectors {
        acc = acc.plus(directional_at(u, x, xi, s, tol)?);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialVariant {
    /// `I_k^+`: frame `{x̂, k−1 orthogonal vectors}`.
    Plus,
    /// `I_N^-`: `N I_{ξ*}` with `⟨x̂,ξ*⟩ = 1/√N`.
    MinusFull,
}

/// Closed-form extremal operators of a radial profile with `g` and `g''` convex.
pub fn extremal_radial(
    profile: &RadialProfile,
    x: &[f64],
    s: f64,
    k: usize,
    variant: RadialVariant,
    tol: &Tolerance,
) -> Result<QuadResult> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(OperatorError::FrameSize { k, n });
    }
    profile.check_representation().map_err(|e| OperatorError::HypothesisViolation(e.to_string()))?;
    let dir = if norm(x) > 0.0 { x.to_vec() } else { basis_vector(n, 0) };
    match variant {
        RadialVariant::Plus => frame_sum(profile, x, &Frame::completion(&dir, k)?, s, tol),
        RadialVariant::MinusFull => {
            if k != n {
                return Err(OperatorError::FrameSize { k, n });
            }
            let frame = Frame::balanced(&dir)?;
            Ok(directional_at(profile, x, &frame.vectors[0], s, tol)?.scaled(n as f64))
        }
    }
}

/// Budget of the frame search: restarts × sweeps × angle grid per rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub sweeps: usize,
    pub angles: usize,
    /// Golden-section steps after the angle grid.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { restarts: 10, sweeps: 3, angles: 32, refine_steps: 24, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub value: QuadResult,
    pub frame: Frame,
    pub frame_evaluations: usize,
    /// Set when the last sweep still improved noticeably.
    pub budget_warning: bool,
}

fn rotate(q: &[Vec<f64>], i: usize, j: usize, theta: f64) -> Vec<Vec<f64>> {
    let (sn, cs) = theta.sin_cos();
    let mut out = q.to_vec();
    for t in 0..q[i].len() {
        out[i][t] = cs * q[i][t] + sn * q[j][t];
        out[j][t] = -sn * q[i][t] + cs * q[j][t];
    }
    out
}

struct Searcher<'a> {
    u: &'a dyn Field,
    x: &'a [f64],
    s: f64,
    k: usize,
    sign: f64,
    tol: &'a Tolerance,
    evals: usize,
}

impl Searcher<'_> {
    fn eval(&mut self, q: &[Vec<f64>]) -> Result<(f64, QuadResult)> {
        self.evals += 1;
        let mut acc = QuadResult::exact(0.0);
        for xi in &q[..self.k] {
            acc = acc.plus(directional_at(self.u, self.x, xi, self.s, self.tol)?);
        }
        Ok((self.sign * acc.value, acc))
    }

    fn run(&mut self, budget: &SearchBudget, rng: &mut ChaCha8Rng) -> Result<(QuadResult, Vec<Vec<f64>>, bool)> {
        let n = self.x.len();
        let mut q = random_basis(n, rng)?;
        let (mut best, mut best_res) = self.eval(&q)?;
        let mut last_gain = f64::INFINITY;
        for _ in 0..budget.sweeps {
            let start = best;
            for i in 0..self.k {
                for j in (i + 1)..n {
                    let step = std::f64::consts::PI / budget.angles as f64;
                    let mut theta_best = 0.0;
                    for a in 1..budget.angles {
                        let theta = a as f64 * step;
                        let (v, r) = self.eval(&rotate(&q, i, j, theta))?;
                        if v < best {
                            best = v;
                            best_res = r;
                            theta_best = theta;
                        }
                    }
                    let (mut lo, mut hi) = (theta_best - step, theta_best + step);
                    let g = 0.5 * (5f64.sqrt() - 1.0);
                    let mut m1 = hi - g * (hi - lo);
                    let mut m2 = lo + g * (hi - lo);
                    let mut f1 = self.eval(&rotate(&q, i, j, m1))?;
                    let mut f2 = self.eval(&rotate(&q, i, j, m2))?;
                    for _ in 0..budget.refine_steps {
                        if f1.0 < f2.0 {
                            hi = m2;
                            m2 = m1;
                            f2 = f1;
                            m1 = hi - g * (hi - lo);
                            f1 = self.eval(&rotate(&q, i, j, m1))?;
                        } else {
                            lo = m1;
                            m1 = m2;
                            f1 = f2;
                            m2 = lo + g * (hi - lo);
                            f2 = self.eval(&rotate(&q, i, j, m2))?;
                        }
                    }
                    let (theta_ref, cand) = if f1.0 < f2.0 { (m1, f1) } else { (m2, f2) };
                    if cand.0 < best {
                        best = cand.0;
                        best_res = cand.1;
                        theta_best = theta_ref;
                    }
                    if theta_best != 0.0 {
                        q = rotate(&q, i, j, theta_best);
                    }
                }
            }
            last_gain = start - best;
        }
        let warn = last_gain > 1e-6 * best.abs().max(1e-12);
        Ok((best_res, q, warn))
    }
}

/// Best frame sum found by randomized Givens-rotation search.
///
/// The result bounds the true extremum from one side only: it is an upper bound
/// of `I_k^-` and a lower bound of `I_k^+`.
pub fn extremal_search(
    u: &dyn Field,
    x: &[f64],
    s: f64,
    k: usize,
    variant: Extremal,
    budget: &SearchBudget,
    tol: &Tolerance,
) -> Result<SearchResult> {
    let n = x.len();
    if k == 0 || k > n || n > MAX_DIM {
        return Err(OperatorError::FrameSize { k, n });
    }
    let sign = match variant {
        Extremal::Minus => 1.0,
        Extremal::Plus => -1.0,
    };
    let runs: Vec<Result<(QuadResult, Vec<Vec<f64>>, bool, usize)>> = (0..budget.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(r as u64));
            let mut se = Searcher { u, x, s, k, sign, tol, evals: 0 };
            let (res, q, warn) = se.run(budget, &mut rng)?;
            Ok((res, q, warn, se.evals))
        })
        .collect();
    let mut best: Option<(QuadResult, Vec<Vec<f64>>, bool)> = None;
    let mut total = 0;
    for run in runs {
        let (res, q, warn, ev) = run?;
        total += ev;
        let better = match &best {
            None => true,
            Some((b, _, _)) => sign * res.value < sign * b.value,
        };
        if better {
            best = Some((res, q, warn));
        }
    }
    let (value, q, warn) = best.expect("at least one restart");
    Ok(SearchResult {
        value,
        frame: Frame::new(q.into_iter().take(k).collect())?,
        frame_evaluations: total,
        budget_warning: warn,
    })
}

/// `max_j |∂_j I_ξ v(x) − I_ξ ∂_j v(x)|`, the first term by central differences with step `h`.
pub fn derivative_commutation_residual(
    profile: &RadialProfile,
    x: &[f64],
    xi: &[f64],
    s: f64,
    h: f64,
    tol: &Tolerance,
) -> Result<f64> {
    check_point(x, xi)?;
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fd = (directional_at(profile, &xp, xi, s, tol)?.value - directional_at(profile, &xm, xi, s, tol)?.value)
            / (2.0 * h);
        let dv = RadialDerivative::new(vec![(1.0, profile.clone())], basis_vector(x.len(), j));
        let exact = directional_at(&dv, x, xi, s, tol)?.value;
        worst = worst.max((fd - exact).abs());
    }
    Ok(worst)
}
