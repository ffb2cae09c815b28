//! Explicit functions: cap/tail radial profiles, the ψ subsolutions, the bump
//! train, half-space power profiles and the supersolution constructions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;
use thiserror::Error;

use crate::constants::{self, normalizing_constant, ConstantsError, CsMuForm};
use crate::operators::{basis_vector, dot, Field, LineStructure, Surface, MAX_DIM};
use crate::quad::{Singularity, Tail};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("{param} {message}")]
    Domain { param: &'static str, message: String },
    #[error("invariant fails: {what} at r = {at}")]
    InvariantViolation { what: &'static str, at: f64 },
    #[error("exponent p = {p} outside the admissible range (threshold {threshold})")]
    ExponentOutOfRange { p: f64, threshold: f64 },
    #[error(transparent)]
    Constants(#[from] ConstantsError),
}

pub type Result<T> = std::result::Result<T, ProfileError>;

fn domain(param: &'static str, message: impl Into<String>) -> ProfileError {
    ProfileError::Domain { param, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Tail `|x|^{−γ}`.
    Decay,
    /// Tail `−|x|^{γ}`.
    Growth,
}

/// `x ↦ g(|x|²)` with `g` a cubic cap for `r < junction_r2` and a power tail beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub gamma: f64,
    pub junction_r2: f64,
    /// Coefficients of the cap in powers of `r − junction_r2`.
    pub cap_coeffs: [f64; 4],
    pub orientation: Orientation,
}

fn tail_params(gamma: f64, orientation: Orientation) -> (f64, f64) {
    match orientation {
        Orientation::Decay => (1.0, -0.5 * gamma),
        Orientation::Growth => (-1.0, 0.5 * gamma),
    }
}

fn tail_derivative(sigma: f64, e: f64, r: f64, order: usize) -> f64 {
    let mut c = sigma;
    for i in 0..order {
        c *= e - i as f64;
    }
    c * r.powf(e - order as f64)
}

fn cap_for(gamma: f64, junction_r2: f64, orientation: Orientation) -> [f64; 4] {
    let (sigma, e) = tail_params(gamma, orientation);
    let d = |n| tail_derivative(sigma, e, junction_r2, n);
    [d(0), d(1), d(2) / 2.0, d(3) / 6.0]
}

/// Third-order Taylor coefficients of `r^{−γ/2}` at `junction_r2`.
pub fn make_cap(gamma: f64, junction_r2: f64) -> [f64; 4] {
    cap_for(gamma, junction_r2, Orientation::Decay)
}

impl RadialProfile {
    pub fn new(gamma: f64, junction_r2: f64, orientation: Orientation) -> Self {
        RadialProfile { gamma, junction_r2, cap_coeffs: cap_for(gamma, junction_r2, orientation), orientation }
    }

    /// `g^{(order)}(r)`, `order ≤ 4`.
    pub fn derivative(&self, r: f64, order: usize) -> f64 {
        if r >= self.junction_r2 {
            let (sigma, e) = tail_params(self.gamma, self.orientation);
            return tail_derivative(sigma, e, r, order);
        }
        let d = r - self.junction_r2;
        let c = &self.cap_coeffs;
        match order {
            0 => c[0] + d * (c[1] + d * (c[2] + d * c[3])),
            1 => c[1] + d * (2.0 * c[2] + 3.0 * d * c[3]),
            2 => 2.0 * c[2] + 6.0 * d * c[3],
            3 => 6.0 * c[3],
            _ => 0.0,
        }
    }

    pub fn g(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }

    /// Value at radius `|x| = rho`.
    pub fn at_radius(&self, rho: f64) -> f64 {
        self.g(rho * rho)
    }

    fn grid_max(&self) -> f64 {
        4.0 * self.junction_r2.max(1.0)
    }

    /// C³ matching at the junction, to relative `1e−12`.
    pub fn check_matching(&self) -> Result<()> {
        let (sigma, e) = tail_params(self.gamma, self.orientation);
        let d = self.cap_coeffs;
        let cap = [d[0], d[1], 2.0 * d[2], 6.0 * d[3]];
        for (n, c) in cap.iter().enumerate() {
            let t = tail_derivative(sigma, e, self.junction_r2, n);
            if (c - t).abs() > 1e-12 * t.abs().max(1.0) {
                return Err(ProfileError::InvariantViolation { what: "C3 matching", at: self.junction_r2 });
            }
        }
        Ok(())
    }

    /// `g` and `g''` convex on a 10³-point grid.
    pub fn check_representation(&self) -> Result<()> {
        let m = 1000;
        let h = self.grid_max() / m as f64;
        for i in 1..m {
            let r = i as f64 * h;
            let g2 = self.derivative(r, 2);
            if g2 < -1e-9 * g2.abs().max(1.0) {
                return Err(ProfileError::InvariantViolation { what: "g convex", at: r });
            }
            let fd = (self.derivative(r + h, 2) - 2.0 * g2 + self.derivative(r - h, 2)) / (h * h);
            let scale = self.derivative(r + h, 2).abs().max(g2.abs()).max(1.0) / (h * h);
            if fd < -1e-9 * scale {
                return Err(ProfileError::InvariantViolation { what: "g'' convex", at: r });
            }
        }
        Ok(())
    }

    /// Growth caps additionally satisfy `g(r) ≤ −r^{γ/2}` on `[0,1]`.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_matching()?;
        self.check_representation()?;
        if self.orientation == Orientation::Growth {
            for i in 0..=1000 {
                let r = i as f64 / 1000.0;
                if self.g(r) > -r.powf(0.5 * self.gamma) + 1e-12 {
                    return Err(ProfileError::InvariantViolation { what: "cap below -r^(gamma/2)", at: r });
                }
            }
        }
        Ok(())
    }
}

impl Field for RadialProfile {
    fn value(&self, x: &[f64]) -> f64 {
        self.g(dot(x, x))
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let r = dot(x, x);
        let a = dot(x, xi);
        4.0 * self.derivative(r, 2) * a * a + 2.0 * self.derivative(r, 1) * dot(xi, xi)
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        2.0 * self.derivative(dot(x, x), 1) * dot(x, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        vec![Surface::Sphere { center: vec![0.0; n], radius: self.junction_r2.sqrt(), exponent: 4.0 }]
    }
    fn growth_alpha(&self) -> f64 {
        match self.orientation {
            Orientation::Decay => 0.0,
            Orientation::Growth => self.gamma,
        }
    }
}

/// `w_γ`: cap below `|x|² = 1/2`, `|x|^{−γ}` beyond.
pub fn make_w_gamma(gamma: f64) -> Result<RadialProfile> {
    if !(gamma > 0.0) {
        return Err(domain("gamma", "must be positive"));
    }
    let p = RadialProfile::new(gamma, 0.5, Orientation::Decay);
    p.check_invariants()?;
    Ok(p)
}

/// `v_γ`: cap below `|x| = 1`, `|x|^{−γ}` beyond.
pub fn make_v_gamma(gamma: f64) -> Result<RadialProfile> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain("gamma", "must lie in (0,1)"));
    }
    let p = RadialProfile::new(gamma, 1.0, Orientation::Decay);
    p.check_invariants()?;
    Ok(p)
}

/// `v_{−γ}`: cap below `|x| = 1`, `−|x|^{γ}` beyond.
pub fn make_v_minus_gamma(gamma: f64, s: f64) -> Result<RadialProfile> {
    if !(s > 0.5 && s < 1.0) {
        return Err(domain("s", "must lie in (1/2,1)"));
    }
    if !(gamma > 0.0 && gamma <= 2.0 * s - 1.0) {
        return Err(domain("gamma", "must lie in (0, 2s-1]"));
    }
    let p = RadialProfile::new(gamma, 1.0, Orientation::Growth);
    p.check_invariants()?;
    Ok(p)
}

/// `∑_j c_j ⟨∇v_j(x), d⟩` for radial profiles `v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDerivative {
    pub terms: Vec<(f64, RadialProfile)>,
    pub direction: Vec<f64>,
}

impl RadialDerivative {
    pub fn new(terms: Vec<(f64, RadialProfile)>, direction: Vec<f64>) -> Self {
        RadialDerivative { terms, direction }
    }

    /// `h(r)` with value `h(|x|²)⟨x,d⟩`, and its derivatives.
    fn h(&self, r: f64, order: usize) -> f64 {
        self.terms.iter().map(|(c, p)| 2.0 * c * p.derivative(r, order + 1)).sum()
    }
}

impl Field for RadialDerivative {
    fn value(&self, x: &[f64]) -> f64 {
        self.h(dot(x, x), 0) * dot(x, &self.direction)
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let r = dot(x, x);
        let a = dot(x, xi);
        let xd = dot(x, &self.direction);
        let xid = dot(xi, &self.direction);
        4.0 * self.h(r, 2) * a * a * xd + 2.0 * self.h(r, 1) * dot(xi, xi) * xd + 4.0 * self.h(r, 1) * a * xid
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        let r = dot(x, x);
        2.0 * self.h(r, 1) * dot(x, xi) * dot(x, &self.direction) + self.h(r, 0) * dot(xi, &self.direction)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        let mut out: Vec<Surface> = Vec::new();
        for (_, p) in &self.terms {
            let s = Surface::Sphere { center: vec![0.0; n], radius: p.junction_r2.sqrt(), exponent: 3.0 };
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
}

/// `x_N + (a+o)ξ_N`, resolved exactly when the anchor sits on the wall `{x_N = 0}`.
fn wall_coord(xn: f64, xin: f64, a: f64, o: f64) -> f64 {
    let base = xn + a * xin;
    if base.abs() <= 4.0 * f64::EPSILON * (xn.abs() + (a * xin).abs()) {
        o * xin
    } else {
        base + o * xin
    }
}

fn shifted_line_point(x: &[f64], xi: &[f64], a: f64, o: f64, shift: f64, y: &mut [f64; MAX_DIM]) -> usize {
    let n = x.len();
    let t = a + o;
    for i in 0..n - 1 {
        y[i] = x[i] + t * xi[i];
    }
    y[n - 1] = wall_coord(x[n - 1] + shift, xi[n - 1], a, o);
    n
}

/// `u_γ(x + shift·e_N)`: the decay profile on `{y_N > 0}`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePowerTail {
    pub profile: RadialProfile,
    pub shift: f64,
}

impl HalfSpacePowerTail {
    fn shifted(&self, x: &[f64]) -> ([f64; MAX_DIM], usize) {
        let mut y = [0.0; MAX_DIM];
        let n = x.len();
        y[..n].copy_from_slice(x);
        y[n - 1] += self.shift;
        (y, n)
    }
}

impl Field for HalfSpacePowerTail {
    fn value(&self, x: &[f64]) -> f64 {
        let (y, n) = self.shifted(x);
        if y[n - 1] > 0.0 {
            self.profile.value(&y[..n])
        } else {
            0.0
        }
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        let mut y = [0.0; MAX_DIM];
        let n = shifted_line_point(x, xi, anchor, offset, self.shift, &mut y);
        if y[n - 1] > 0.0 {
            self.profile.value(&y[..n])
        } else {
            0.0
        }
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let (y, n) = self.shifted(x);
        if y[n - 1] > 0.0 {
            self.profile.hessian_quad(&y[..n], xi)
        } else {
            0.0
        }
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        let (y, n) = self.shifted(x);
        if y[n - 1] > 0.0 {
            self.profile.directional_derivative(&y[..n], xi)
        } else {
            0.0
        }
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        let mut c = vec![0.0; n];
        c[n - 1] = -self.shift;
        vec![
            Surface::wall(n, -self.shift, 0.0),
            Surface::Sphere { center: c, radius: self.profile.junction_r2.sqrt(), exponent: 4.0 },
        ]
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
}

/// `amplitude · (x_N)_+^μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub amplitude: f64,
    pub mu: f64,
}

impl PowerProfile {
    fn at(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.amplitude * t.powf(self.mu)
        } else {
            0.0
        }
    }
}

impl Field for PowerProfile {
    fn value(&self, x: &[f64]) -> f64 {
        self.at(x[x.len() - 1])
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        let n = x.len();
        self.at(wall_coord(x[n - 1], xi[n - 1], anchor, offset))
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let t = x[x.len() - 1];
        let c = xi[xi.len() - 1];
        if t > 0.0 {
            self.amplitude * self.mu * (self.mu - 1.0) * t.powf(self.mu - 2.0) * c * c
        } else {
            0.0
        }
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        let t = x[x.len() - 1];
        if t > 0.0 {
            self.amplitude * self.mu * t.powf(self.mu - 1.0) * xi[xi.len() - 1]
        } else {
            0.0
        }
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        vec![Surface::wall(n, 0.0, self.mu)]
    }
    fn growth_alpha(&self) -> f64 {
        self.mu
    }
}

/// `∑_{n≥0} (ε² − (x_N − n − ε)²)_+^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTrain {
    pub eps: f64,
    pub s: f64,
    /// Periods resolved explicitly on each line before the periodic tail model.
    pub window: usize,
}

impl BumpTrain {
    /// `(b, b', b'')` of the one-dimensional profile at `t`.
    pub fn profile(&self, t: f64) -> (f64, f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let n = t.floor();
        let p = t - n;
        let q = n + 2.0 * self.eps - t;
        if p <= 0.0 || q <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        self.from_pq(p, q)
    }

    fn from_pq(&self, p: f64, q: f64) -> (f64, f64, f64) {
        let s = self.s;
        let w = p * q;
        let b = w.powf(s);
        let b1 = s * w.powf(s - 1.0) * (q - p);
        let b2 = s * (s - 1.0) * w.powf(s - 2.0) * (q - p) * (q - p) - 2.0 * s * w.powf(s - 1.0);
        (b, b1, b2)
    }

    /// Mean of the train over one period.
    pub fn mean(&self) -> f64 {
        self.eps.powf(2.0 * self.s + 1.0) * std::f64::consts::PI.sqrt() * gamma_fn(self.s + 1.0)
            / gamma_fn(self.s + 1.5)
    }

    fn on_line(&self, ta: f64, delta: f64) -> f64 {
        let e2 = 2.0 * self.eps;
        let gap = 0.5 * (1.0 - e2);
        let tiny = 1e-12 * (1.0 + ta.abs());
        let m = ta.round();
        if m >= 0.0 && (ta - m).abs() <= tiny && delta.abs() <= gap.min(self.eps) {
            return if delta > 0.0 { (delta * (e2 - delta)).powf(self.s) } else { 0.0 };
        }
        let m = (ta - e2).round();
        if m >= 0.0 && (ta - m - e2).abs() <= tiny && delta.abs() <= gap.min(self.eps) {
            return if delta < 0.0 { ((e2 + delta) * -delta).powf(self.s) } else { 0.0 };
        }
        self.profile(ta + delta).0
    }
}

impl Field for BumpTrain {
    fn value(&self, x: &[f64]) -> f64 {
        self.profile(x[x.len() - 1]).0
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        let n = x.len();
        self.on_line(x[n - 1] + anchor * xi[n - 1], offset * xi[n - 1])
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let c = xi[xi.len() - 1];
        self.profile(x[x.len() - 1]).2 * c * c
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.profile(x[x.len() - 1]).1 * xi[xi.len() - 1]
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        vec![Surface::wall(n, 0.0, self.s)]
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
    fn line_structure(&self, x: &[f64], xi: &[f64]) -> Option<LineStructure> {
        let n = x.len();
        let c = xi[n - 1];
        let xn = x[n - 1];
        if c.abs() < 1e-15 {
            return Some(LineStructure { breaks: Vec::new(), tail: Tail::Decay { growth_alpha: 0.0 } });
        }
        let reach = xn.abs() + self.window as f64;
        let at = reach / c.abs();
        let top = (xn + reach).ceil() as usize;
        let mut breaks = Vec::with_capacity(2 * top + 2);
        for m in 0..=top {
            for edge in [m as f64, m as f64 + 2.0 * self.eps] {
                let t = (edge - xn) / c;
                if t.abs() < at {
                    breaks.push(Singularity { location: t, exponent: self.s });
                }
            }
        }
        Some(LineStructure {
            breaks,
            tail: Tail::Periodic {
                at,
                period: 1.0 / c.abs(),
                mean: self.mean(),
                amplitude: self.eps.powf(2.0 * self.s),
            },
        })
    }
}

/// `scale · min{φ, (x_N)_+^μ}` with `φ = u_γ(· + shift·e_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinComposition {
    pub phi: HalfSpacePowerTail,
    pub z: PowerProfile,
    pub scale: f64,
}

impl MinComposition {
    fn smaller(&self, x: &[f64]) -> &dyn Field {
        if self.phi.value(x) <= self.z.value(x) {
            &self.phi
        } else {
            &self.z
        }
    }
}

impl Field for MinComposition {
    fn value(&self, x: &[f64]) -> f64 {
        self.scale * self.phi.value(x).min(self.z.value(x))
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        self.scale * self.phi.value_on_line(x, xi, anchor, offset).min(self.z.value_on_line(x, xi, anchor, offset))
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.scale * self.smaller(x).hessian_quad(x, xi)
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.scale * self.smaller(x).directional_derivative(x, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        vec![Surface::wall(n, 0.0, self.z.mu)]
    }
    fn growth_alpha(&self) -> f64 {
        0.0
    }
}

/// `coef · u^power` for a nonnegative base `u`.
pub struct PowerTransformField {
    pub coef: f64,
    pub power: f64,
    pub base: Box<dyn Field + Send>,
}

impl PowerTransformField {
    fn map(&self, u: f64) -> f64 {
        if u > 0.0 {
            self.coef * u.powf(self.power)
        } else {
            0.0
        }
    }
}

impl Field for PowerTransformField {
    fn value(&self, x: &[f64]) -> f64 {
        self.map(self.base.value(x))
    }
    fn value_on_line(&self, x: &[f64], xi: &[f64], anchor: f64, offset: f64) -> f64 {
        self.map(self.base.value_on_line(x, xi, anchor, offset))
    }
    fn hessian_quad(&self, x: &[f64], xi: &[f64]) -> f64 {
        let u = self.base.value(x);
        if u <= 0.0 {
            return 0.0;
        }
        let d1 = self.base.directional_derivative(x, xi);
        let d2 = self.base.hessian_quad(x, xi);
        self.coef * self.power * u.powf(self.power - 1.0) * (d2 + (self.power - 1.0) * d1 * d1 / u)
    }
    fn directional_derivative(&self, x: &[f64], xi: &[f64]) -> f64 {
        let u = self.base.value(x);
        if u <= 0.0 {
            return 0.0;
        }
        self.coef * self.power * u.powf(self.power - 1.0) * self.base.directional_derivative(x, xi)
    }
    fn surfaces(&self, n: usize) -> Vec<Surface> {
        self.base
            .surfaces(n)
            .into_iter()
            .map(|s| match s {
                Surface::Hyperplane { normal, offset, exponent } if exponent > 0.0 => {
                    Surface::Hyperplane { normal, offset, exponent: exponent * self.power }
                }
                Surface::Sphere { center, radius, exponent } if exponent > 0.0 => {
                    Surface::Sphere { center, radius, exponent: exponent * self.power }
                }
                other => other,
            })
            .collect()
    }
    fn growth_alpha(&self) -> f64 {
        self.base.growth_alpha().max(0.0) * self.power
    }
    fn line_structure(&self, x: &[f64], xi: &[f64]) -> Option<LineStructure> {
        self.base.line_structure(x, xi)
    }
}

/// Exponents of the power transform `v = α u^β`, `β = (p−1)/(q−1)`, `α = β^{1/(q−1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub p: f64,
    pub q: f64,
    pub beta_exp: f64,
    pub alpha_coef: f64,
}

impl TransformParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let ok = p == q && p != 1.0 || (1.0 < p && p < q) || (q < p && p < 1.0);
        if !ok || !p.is_finite() || !q.is_finite() {
            return Err(domain("p, q", "must satisfy 1 < p < q or q < p < 1"));
        }
        let beta_exp = if p == q { 1.0 } else { (p - 1.0) / (q - 1.0) };
        let alpha_coef = beta_exp.powf(1.0 / (q - 1.0));
        Ok(TransformParams { p, q, beta_exp, alpha_coef })
    }

    /// `max(|β−1+p−βq|, |αβ−α^q|)`.
    pub fn identity_defect(&self) -> f64 {
        let (a, b) = (self.alpha_coef, self.beta_exp);
        (b - 1.0 + self.p - b * self.q).abs().max((a * b - a.powf(self.q)).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiKind {
    Decay,
    Halfint,
    Growth,
}

/// Operator targeted by a singular supersolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularOp {
    IkMinus,
    InPlus,
}

/// Parameter document of every half-space construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfSpaceFn {
    PsiDecay { k: usize, s: f64, gamma_bar: f64, gamma: f64 },
    PsiHalfint { gamma: f64 },
    PsiGrowth { s: f64, gamma_bar: f64, gamma: f64 },
    BumpTrain { eps: f64, s: f64, window: usize },
    HalfspacePowerTail { gamma: f64, shift: f64 },
    PowerProfile { mu: f64 },
    MinComposition { gamma: f64, mu: f64, shift: f64, scale: f64 },
    SingularPower { amplitude: f64, mu: f64 },
    PowerTransform { p: f64, q: f64, base: Box<HalfSpaceFn> },
}

impl HalfSpaceFn {
    pub fn kind(&self) -> &'static str {
        match self {
            HalfSpaceFn::PsiDecay { .. } => "psi_decay",
            HalfSpaceFn::PsiHalfint { .. } => "psi_halfint",
            HalfSpaceFn::PsiGrowth { .. } => "psi_growth",
            HalfSpaceFn::BumpTrain { .. } => "bump_train",
            HalfSpaceFn::HalfspacePowerTail { .. } => "halfspace_power_tail",
            HalfSpaceFn::PowerProfile { .. } => "power_profile",
            HalfSpaceFn::MinComposition { .. } => "min_composition",
            HalfSpaceFn::SingularPower { .. } => "singular_power",
            HalfSpaceFn::PowerTransform { .. } => "power_transform",
        }
    }

    /// Evaluable field in dimension `n`.
    pub fn build(&self, n: usize) -> Result<Box<dyn Field + Send>> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(domain("N", format!("must lie in 1..={MAX_DIM}")));
        }
        let en = basis_vector(n, n - 1);
        Ok(match self {
            HalfSpaceFn::PsiDecay { gamma_bar, gamma, .. } => {
                let c = -1.0 / gamma_bar;
                Box::new(RadialDerivative::new(vec![(c, make_v_gamma(*gamma_bar)?), (c, make_v_gamma(*gamma)?)], en))
            }
            HalfSpaceFn::PsiHalfint { gamma } => {
                Box::new(RadialDerivative::new(vec![(-1.0 / gamma, make_v_gamma(*gamma)?)], en))
            }
            HalfSpaceFn::PsiGrowth { s, gamma_bar, gamma } => {
                let c = -1.0 / gamma_bar;
                Box::new(RadialDerivative::new(
                    vec![(c, make_v_minus_gamma(*gamma_bar, *s)?), (c, make_v_minus_gamma(*gamma, *s)?)],
                    en,
                ))
            }
            HalfSpaceFn::BumpTrain { eps, s, window } => {
                check_bump(*eps, *s)?;
                Box::new(BumpTrain { eps: *eps, s: *s, window: *window })
            }
            HalfSpaceFn::HalfspacePowerTail { gamma, shift } => Box::new(power_tail(*gamma, *shift)?),
            HalfSpaceFn::PowerProfile { mu } => Box::new(PowerProfile { amplitude: 1.0, mu: *mu }),
            HalfSpaceFn::MinComposition { gamma, mu, shift, scale } => Box::new(MinComposition {
                phi: power_tail(*gamma, *shift)?,
                z: PowerProfile { amplitude: 1.0, mu: *mu },
                scale: *scale,
            }),
            HalfSpaceFn::SingularPower { amplitude, mu } => Box::new(PowerProfile { amplitude: *amplitude, mu: *mu }),
            HalfSpaceFn::PowerTransform { p, q, base } => {
                let tp = TransformParams::new(*p, *q)?;
                Box::new(PowerTransformField { coef: tp.alpha_coef, power: tp.beta_exp, base: base.build(n)? })
            }
        })
    }

    /// Pointwise value; builds the field on each call.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self.build(x.len())?.value(x))
    }

    /// JSON document with the parameters and the metadata of the field in dimension `n`.
    pub fn document(&self, n: usize) -> Result<serde_json::Value> {
        let f = self.build(n)?;
        let mut v = serde_json::to_value(self).expect("parameters serialize");
        v["metadata"] = serde_json::json!({
            "dimension": n,
            "surfaces": f.surfaces(n),
            "growth_alpha": f.growth_alpha(),
        });
        Ok(v)
    }

    pub fn from_document(v: &serde_json::Value) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_value(v.clone())
    }
}

fn check_bump(eps: f64, s: f64) -> Result<()> {
    constants::check_s(s)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(domain("eps", "must lie in (0, 1/2)"));
    }
    Ok(())
}

fn power_tail(gamma: f64, shift: f64) -> Result<HalfSpacePowerTail> {
    if !(gamma > 0.0) {
        return Err(domain("gamma", "must be positive"));
    }
    let profile = RadialProfile::new(gamma, 1.0, Orientation::Decay);
    profile.check_matching()?;
    Ok(HalfSpacePowerTail { profile, shift })
}

/// Default free exponent of the decay ψ.
pub fn psi_decay_gamma(gamma_bar: f64) -> f64 {
    (gamma_bar + 0.2).min(0.5 * (1.0 + gamma_bar))
}

/// Free exponent of the half-integer ψ.
pub const PSI_HALFINT_GAMMA: f64 = 0.5;

pub fn make_psi(kind: PsiKind, k: usize, s: f64) -> Result<HalfSpaceFn> {
    constants::check_s(s)?;
    match kind {
        PsiKind::Decay => {
            let gamma_bar = constants::find_gamma_bar(k, s)?.root;
            Ok(HalfSpaceFn::PsiDecay { k, s, gamma_bar, gamma: psi_decay_gamma(gamma_bar) })
        }
        PsiKind::Halfint => {
            if k != 1 || s != 0.5 {
                return Err(domain("k, s", "half-integer kind requires k = 1 and s = 1/2"));
            }
            Ok(HalfSpaceFn::PsiHalfint { gamma: PSI_HALFINT_GAMMA })
        }
        PsiKind::Growth => {
            if k != 1 || s <= 0.5 {
                return Err(domain("k, s", "growth kind requires k = 1 and s > 1/2"));
            }
            let gamma_bar = 2.0 * s - 1.0;
            Ok(HalfSpaceFn::PsiGrowth { s, gamma_bar, gamma: 0.5 * gamma_bar })
        }
    }
}

pub fn make_bump_train(eps: f64, s: f64, window: usize) -> Result<HalfSpaceFn> {
    check_bump(eps, s)?;
    Ok(HalfSpaceFn::BumpTrain { eps, s, window })
}

pub fn make_halfspace_power_tail(gamma: f64) -> Result<HalfSpaceFn> {
    power_tail(gamma, 0.0)?;
    Ok(HalfSpaceFn::HalfspacePowerTail { gamma, shift: 0.0 })
}

pub fn make_power_profile(mu: f64) -> Result<HalfSpaceFn> {
    if !(mu > 0.0) {
        return Err(domain("mu", "must be positive"));
    }
    Ok(HalfSpaceFn::PowerProfile { mu })
}

/// Parameters of the `I_N^-` supersolution above the critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinParams {
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub gamma: f64,
    pub mu: f64,
    pub shift: f64,
    pub gamma_plus: f64,
    pub threshold: f64,
}

/// `ε·min{u_γ(x+Re_N), (x_N)_+^μ}` with `μ = s/2`.
pub fn build_thin_supersolution(n: usize, s: f64, p: f64) -> Result<(HalfSpaceFn, ThinParams)> {
    build_thin_supersolution_with(n, s, p, 0.5 * s)
}

pub fn build_thin_supersolution_with(n: usize, s: f64, p: f64, mu: f64) -> Result<(HalfSpaceFn, ThinParams)> {
    constants::check_s(s)?;
    if n < 2 {
        return Err(domain("N", "must be at least 2"));
    }
    if !(mu > 0.0 && mu < s) {
        return Err(domain("mu", "must lie in (0, s)"));
    }
    let gamma_plus = constants::find_gamma_plus(n, s)?.root;
    let threshold = 1.0 + 2.0 * s / gamma_plus;
    if !(p > threshold) {
        return Err(ProfileError::ExponentOutOfRange { p, threshold });
    }
    let gamma = 2.0 * s / (p - 1.0);
    let cs = normalizing_constant(s);
    let alpha = -constants::c_n_plus(gamma, s, n)? * cs;
    let beta = -constants::c_s_mu(mu, s, CsMuForm::Primary)? * cs;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(ProfileError::InvariantViolation { what: "alpha, beta positive", at: gamma });
    }
    let eps = alpha.min(beta).powf(1.0 / (p - 1.0));
    let shift = (n as f64 / (n as f64 - 1.0)).sqrt();
    let f = HalfSpaceFn::MinComposition { gamma, mu, shift, scale: eps };
    Ok((f, ThinParams { alpha, beta, eps, gamma, mu, shift, gamma_plus, threshold }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSupersolution {
    pub function: HalfSpaceFn,
    pub amplitude: f64,
    pub mu: f64,
}

/// `M (x_N)_+^μ` with `μ = 2s/(1−p)`.
pub fn build_singular_supersolution(s: f64, p: f64, op: SingularOp, n: usize) -> Result<SingularSupersolution> {
    constants::check_s(s)?;
    if !(p < -1.0) {
        return Err(ProfileError::ExponentOutOfRange { p, threshold: -1.0 });
    }
    if n < 2 {
        return Err(domain("N", "must be at least 2"));
    }
    let mu = 2.0 * s / (1.0 - p);
    let c = normalizing_constant(s) * constants::c_s_mu(mu, s, CsMuForm::Primary)?;
    let numerator = match op {
        SingularOp::IkMinus => 1.0,
        SingularOp::InPlus => (n as f64).powf(s),
    };
    let amplitude = (numerator / c.abs()).powf(1.0 / (1.0 - p));
    Ok(SingularSupersolution { function: HalfSpaceFn::SingularPower { amplitude, mu }, amplitude, mu })
}

/// `v = α u^β`.
pub fn power_transform(u: &HalfSpaceFn, p: f64, q: f64) -> Result<HalfSpaceFn> {
    TransformParams::new(p, q)?;
    Ok(HalfSpaceFn::PowerTransform { p, q, base: Box::new(u.clone()) })
}
