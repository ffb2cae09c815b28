//! One-dimensional quadrature for improper integrals.
//!
//! Endpoint algebraic singularities and infinite tails are both mapped to
//! exponentially decaying integrands (`τ = c ± L e^{-u}` and `τ = T e^{u}`),
//! integrated with adaptive Gauss–Kronrod 10/21 panels, and closed off with an
//! exponential remainder `g(U)/κ`. For a pure power law the remainder is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Requested accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-9, max_evals: 10_000_000 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Tolerance { abs_tol, rel_tol, ..Default::default() }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Tolerance { abs_tol: self.abs_tol / factor, rel_tol: self.rel_tol / factor, max_evals: self.max_evals }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub n_evals: usize,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        QuadResult { value, abs_error_estimate: 0.0, n_evals: 0 }
    }

    /// Sum of values, errors and evaluation counts.
    pub fn plus(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            n_evals: self.n_evals + other.n_evals,
        }
    }

    pub fn scaled(self, factor: f64) -> QuadResult {
        QuadResult {
            value: factor * self.value,
            abs_error_estimate: factor.abs() * self.abs_error_estimate,
            n_evals: self.n_evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("evaluation budget exhausted after {n_evals} evaluations (value {value:e}, error {error:e})")]
    BudgetExceeded { value: f64, error: f64, n_evals: usize },
    #[error("singular point at {location} has exponent {exponent} <= -1 and is not a principal-value point")]
    NonIntegrable { location: f64, exponent: f64 },
    #[error("symmetric sum around {location} does not decay; principal value does not exist")]
    NonCancelling { location: f64 },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
}

/// Algebraic singularity `|τ - location|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: f64,
    pub exponent: f64,
}

type AnchoredFn<'a> = dyn Fn(f64, f64) -> f64 + Sync + 'a;

/// An integrand with its declared singular structure.
///
/// The function receives `(anchor, offset)` and evaluates at `anchor + offset`.
/// Near a declared point the engine passes the point as anchor and the exact
/// distance as offset, so integrands that care can avoid cancellation.
pub struct Integrand<'a> {
    f: Box<AnchoredFn<'a>>,
    anchored: bool,
    pub singular_points: Vec<Singularity>,
    pub pv_points: Vec<f64>,
    pub tail_decay: Option<f64>,
    noise: Option<Box<dyn Fn(f64) -> f64 + Sync + 'a>>,
}

impl<'a> Integrand<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Integrand {
            f: Box::new(move |a, o| f(a + o)),
            anchored: false,
            singular_points: Vec::new(),
            pv_points: Vec::new(),
            tail_decay: None,
            noise: None,
        }
    }

    pub fn anchored(f: impl Fn(f64, f64) -> f64 + Sync + 'a) -> Self {
        Integrand {
            f: Box::new(f),
            anchored: true,
            singular_points: Vec::new(),
            pv_points: Vec::new(),
            tail_decay: None,
            noise: None,
        }
    }

    pub fn singular(mut self, location: f64, exponent: f64) -> Self {
        self.singular_points.push(Singularity { location, exponent });
        self
    }

    pub fn pv(mut self, location: f64) -> Self {
        self.pv_points.push(location);
        self
    }

    pub fn tail(mut self, decay: f64) -> Self {
        self.tail_decay = Some(decay);
        self
    }

    /// Absolute rounding level of the integrand at τ, beyond plain evaluation
    /// rounding (for example cancellation inside the integrand).
    pub fn noise(mut self, level: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        self.noise = Some(Box::new(level));
        self
    }

    fn noise_at(&self, t: f64) -> f64 {
        self.noise.as_ref().map_or(0.0, |n| n(t).abs())
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t, 0.0)
    }

    fn at(&self, anchor: f64, offset: f64) -> f64 {
        (self.f)(anchor, offset)
    }

    fn is_pv(&self, x: f64) -> bool {
        self.pv_points.contains(&x)
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452902,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One Gauss–Kronrod 10/21 panel: (Kronrod value, error estimate, rounding floor).
fn gk21(
    g: &mut dyn FnMut(f64) -> Result<(f64, f64), QuadError>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64, f64), QuadError> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let (fc, nc) = g(c)?;
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut noise_sum = nc * WGK[10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let (f1, n1) = g(c - dx)?;
        let (f2, n2) = g(c + dx)?;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        noise_sum += WGK[j] * (n1 + n2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let floor = (50.0 * f64::EPSILON * abs_sum + noise_sum) * h.abs();
    let err = ((kron - gauss) * h).abs().max(floor);
    Ok((value, err, floor))
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Plain,
    /// `τ = anchor + dir·len·e^{-u}`; with `fold` the two sides `anchor ± len·e^{-u}` are summed.
    Endpoint {
        anchor: f64,
        dir: f64,
        len: f64,
        fold: bool,
        kappa: Option<f64>,
    },
    /// `τ = start·e^{u}`.
    Tail {
        start: f64,
        kappa: f64,
    },
}

struct Segment {
    map: Map,
    upper: f64,
    upper_max: f64,
    rem_value: f64,
    rem_err: f64,
    frozen: bool,
}

struct Panel {
    seg: usize,
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

struct Engine<'f, 'a> {
    f: &'f Integrand<'a>,
    evals: usize,
    max_evals: usize,
}

impl<'f, 'a> Engine<'f, 'a> {
    fn point(&mut self, map: &Map, u: f64) -> Result<f64, QuadError> {
        Ok(self.point_with_noise(map, u)?.0)
    }

    /// Mapped integrand value and its declared noise level, both with the Jacobian.
    fn point_with_noise(&mut self, map: &Map, u: f64) -> Result<(f64, f64), QuadError> {
        self.evals += 1;
        let (v, n, at) = match *map {
            Map::Plain => (self.f.at(u, 0.0), self.f.noise_at(u), u),
            Map::Endpoint { anchor, dir, len, fold, .. } => {
                let t = len * (-u).exp();
                if t == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let (v, n) = if fold {
                    self.evals += 1;
                    let sum = self.f.at(anchor, t) + self.f.at(anchor, -t);
                    if !(t * sum).is_finite() {
                        return Err(QuadError::NonCancelling { location: anchor });
                    }
                    (sum, self.f.noise_at(anchor + t) + self.f.noise_at(anchor - t))
                } else {
                    (self.f.at(anchor, dir * t), self.f.noise_at(anchor + dir * t))
                };
                (t * v, t * n, anchor + dir * t)
            }
            Map::Tail { start, kappa: _ } => {
                let t = start * u.exp();
                (t * self.f.at(t, 0.0), t * self.f.noise_at(t), t)
            }
        };
        if v.is_finite() {
            Ok((v, n))
        } else {
            Err(QuadError::NonFinite { at })
        }
    }

    fn panel(&mut self, seg: usize, map: Map, lo: f64, hi: f64) -> Result<Panel, QuadError> {
        let mut g = |u: f64| self.point_with_noise(&map, u);
        let (value, err, floor) = gk21(&mut g, lo, hi)?;
        Ok(Panel { seg, lo, hi, value, err, floor })
    }

    fn remainder(&mut self, seg: &Segment) -> Result<(f64, f64), QuadError> {
        let (declared, location) = match seg.map {
            Map::Plain => return Ok((0.0, 0.0)),
            Map::Endpoint { kappa, anchor, .. } => (kappa, anchor),
            Map::Tail { kappa, start } => (Some(kappa), start),
        };
        let u = seg.upper;
        let g0 = self.point(&seg.map, u - 2.0)?;
        let g1 = self.point(&seg.map, u - 1.0)?;
        let g2 = self.point(&seg.map, u)?;
        if g2 == 0.0 && g1 == 0.0 {
            return Ok((0.0, 0.0));
        }
        let rate =
            |a: f64, b: f64| if a != 0.0 && b != 0.0 && a.signum() == b.signum() { Some((a / b).ln()) } else { None };
        let r2 = rate(g1, g2);
        let r1 = rate(g0, g1);
        match declared {
            Some(k) => {
                let value = g2 / k;
                let baseline = (1.0 / k).clamp(1.0, 0.5 * u);
                let obs = if baseline > 1.0 {
                    let gb = self.point(&seg.map, u - baseline)?;
                    rate(gb, g2).map(|r| r / baseline)
                } else {
                    r2
                };
                let err = match obs {
                    Some(obs) if obs > 0.0 => (g2 / k - g2 / obs).abs(),
                    _ => (g2.abs() + g1.abs()) / k,
                };
                Ok((value, err))
            }
            None => match (r1, r2) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Ok((g2 / b, (g2 / b - g2 / a).abs())),
                _ => {
                    if seg.upper >= seg.upper_max {
                        Err(QuadError::NonCancelling { location })
                    } else {
                        Ok((0.0, g2.abs() + g1.abs() + g0.abs()))
                    }
                }
            },
        }
    }
}

fn check_budget(engine: &Engine, value: f64, error: f64) -> Result<(), QuadError> {
    if engine.evals > engine.max_evals {
        Err(QuadError::BudgetExceeded { value, error, n_evals: engine.evals })
    } else {
        Ok(())
    }
}

/// Runs global adaptive refinement over the given segments.
fn run(f: &Integrand, segments: Vec<(Map, f64, f64)>, tol: &Tolerance) -> Result<QuadResult, QuadError> {
    let mut engine = Engine { f, evals: 0, max_evals: tol.max_evals };
    let mut segs: Vec<Segment> = Vec::new();
    let mut heap = BinaryHeap::new();
    for (map, lo, hi) in segments {
        let idx = segs.len();
        match map {
            Map::Plain => {
                if hi > lo {
                    heap.push(engine.panel(idx, map, lo, hi)?);
                }
                segs.push(Segment { map, upper: hi, upper_max: hi, rem_value: 0.0, rem_err: 0.0, frozen: true });
            }
            _ => {
                let upper_max = match map {
                    Map::Endpoint { anchor, len, .. } => {
                        if f.anchored {
                            700.0
                        } else {
                            let floor = (anchor.abs() * 1e-12).max(1e-300);
                            (len / floor).ln().clamp(4.0, 700.0)
                        }
                    }
                    Map::Tail { start, .. } => (1e300 / start).ln().clamp(4.0, 700.0),
                    Map::Plain => unreachable!(),
                };
                let upper = 16.0_f64.min(upper_max);
                let mut edges = vec![0.0, 2.0, 4.0, 8.0, 16.0];
                edges.retain(|&e| e < upper);
                edges.push(upper);
                for w in edges.windows(2) {
                    heap.push(engine.panel(idx, map, w[0], w[1])?);
                }
                let mut seg = Segment { map, upper, upper_max, rem_value: 0.0, rem_err: 0.0, frozen: false };
                let (rv, re) = engine.remainder(&seg)?;
                seg.rem_value = rv;
                seg.rem_err = re;
                segs.push(seg);
            }
        }
    }

    let mut finished: Vec<Panel> = Vec::new();
    let mut iter = 0usize;
    loop {
        iter += 1;
        let mut value: f64 = heap.iter().map(|p| p.value).sum::<f64>() + finished.iter().map(|p| p.value).sum::<f64>();
        let mut error: f64 = heap.iter().map(|p| p.err).sum::<f64>() + finished.iter().map(|p| p.err).sum::<f64>();
        for s in &segs {
            value += s.rem_value;
            error += s.rem_err;
        }
        let floor: f64 = heap.iter().map(|p| p.floor).sum::<f64>() + finished.iter().map(|p| p.floor).sum::<f64>();
        if error - floor <= tol.target(value) {
            return Ok(QuadResult { value, abs_error_estimate: error, n_evals: engine.evals });
        }
        check_budget(&engine, value, error)?;

        let worst_panel = heap.peek().map(|p| p.err).unwrap_or(0.0);
        let (worst_seg, worst_rem) = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.frozen)
            .map(|(i, s)| (i, s.rem_err))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });

        if worst_rem > worst_panel && worst_seg != usize::MAX {
            let seg = &segs[worst_seg];
            let lo = seg.upper;
            let hi = (lo + (lo / 2.0).max(4.0)).min(seg.upper_max);
            let map = seg.map;
            if hi <= lo {
                segs[worst_seg].frozen = true;
                continue;
            }
            heap.push(engine.panel(worst_seg, map, lo, hi)?);
            segs[worst_seg].upper = hi;
            if hi >= segs[worst_seg].upper_max {
                segs[worst_seg].frozen = true;
            }
            let (rv, re) = engine.remainder(&segs[worst_seg])?;
            segs[worst_seg].rem_value = rv;
            segs[worst_seg].rem_err = re;
        } else if let Some(p) = heap.pop() {
            let mid = 0.5 * (p.lo + p.hi);
            let width = p.hi - p.lo;
            let scale = p.lo.abs().max(p.hi.abs()).max(1e-300);
            if width <= 1e-13 * scale || mid <= p.lo || mid >= p.hi || p.err <= p.floor {
                finished.push(p);
                if heap.is_empty() && segs.iter().all(|s| s.frozen) {
                    return Err(QuadError::BudgetExceeded { value, error, n_evals: engine.evals });
                }
                continue;
            }
            let map = segs[p.seg].map;
            let left = engine.panel(p.seg, map, p.lo, mid)?;
            let right = engine.panel(p.seg, map, mid, p.hi)?;
            heap.push(left);
            heap.push(right);
        } else {
            return Err(QuadError::BudgetExceeded { value, error, n_evals: engine.evals });
        }
        if iter > 2_000_000 {
            return Err(QuadError::BudgetExceeded { value, error, n_evals: engine.evals });
        }
    }
}

/// Endpoint decay rate of the mapped integrand for a singular exponent.
fn endpoint_kappa(exponent: f64) -> f64 {
    1.0 + exponent.min(0.0)
}

fn split_interval(out: &mut Vec<(Map, f64, f64)>, lo: (f64, Option<f64>), hi: (f64, Option<f64>)) {
    let (a, ea) = lo;
    let (b, eb) = hi;
    if b <= a {
        return;
    }
    match (ea, eb) {
        (None, None) => out.push((Map::Plain, a, b)),
        _ => {
            let m = 0.5 * (a + b);
            let half = m - a;
            match ea {
                Some(e) => out.push((
                    Map::Endpoint { anchor: a, dir: 1.0, len: half, fold: false, kappa: Some(endpoint_kappa(e)) },
                    0.0,
                    0.0,
                )),
                None => out.push((Map::Plain, a, m)),
            }
            match eb {
                Some(e) => out.push((
                    Map::Endpoint { anchor: b, dir: -1.0, len: b - m, fold: false, kappa: Some(endpoint_kappa(e)) },
                    0.0,
                    0.0,
                )),
                None => out.push((Map::Plain, m, b)),
            }
        }
    }
}

/// Integrates `f` over `[a, b]`; `b` may be `f64::INFINITY`.
pub fn integrate(f: &Integrand, a: f64, b: f64, tol: &Tolerance) -> Result<QuadResult, QuadError> {
    if !(a.is_finite() && b > a) || b.is_nan() {
        if a == b {
            return Ok(QuadResult::exact(0.0));
        }
        return Err(QuadError::InvalidInterval { a, b });
    }
    for sp in &f.singular_points {
        if sp.exponent <= -1.0 && !f.is_pv(sp.location) {
            return Err(QuadError::NonIntegrable { location: sp.location, exponent: sp.exponent });
        }
    }
    let infinite = b == f64::INFINITY;
    let tail_kappa = if infinite {
        match f.tail_decay {
            Some(beta) if beta > 1.0 => Some(beta - 1.0),
            _ => {
                return Err(QuadError::NonIntegrable {
                    location: f64::INFINITY,
                    exponent: -f.tail_decay.unwrap_or(0.0),
                })
            }
        }
    } else {
        None
    };

    // Breakpoints: declared singular points and pv points inside [a, b].
    let mut points: Vec<(f64, Option<f64>, bool)> = Vec::new();
    for sp in &f.singular_points {
        if sp.location >= a && sp.location <= b {
            points.push((sp.location, Some(sp.exponent), f.is_pv(sp.location)));
        }
    }
    for &p in &f.pv_points {
        if p > a && p < b && !points.iter().any(|q| q.0 == p) {
            points.push((p, None, true));
        }
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    points.dedup_by(|x, y| {
        if x.0 == y.0 {
            y.1 = match (x.1, y.1) {
                (Some(p), Some(q)) => Some(p.min(q)),
                (p, q) => p.or(q),
            };
            y.2 |= x.2;
            true
        } else {
            false
        }
    });

    let mut nodes: Vec<(f64, Option<f64>)> = Vec::new();
    let mut segments: Vec<(Map, f64, f64)> = Vec::new();
    // Symmetric windows around interior pv points.
    let mut pv_windows: Vec<(f64, f64)> = Vec::new();
    let finite_end = if infinite {
        let last = points.last().map(|p| p.0).unwrap_or(a).max(a);
        if last > 0.0 {
            2.0 * last
        } else {
            1.0_f64.max(last + 1.0)
        }
    } else {
        b
    };
    for (i, &(x, e, pv)) in points.iter().enumerate() {
        if pv && x > a && x < finite_end {
            let prev = if i > 0 { points[i - 1].0 } else { a };
            let next = if i + 1 < points.len() { points[i + 1].0 } else { finite_end };
            let h = 0.5 * (x - prev).min(next - x);
            segments.push((Map::Endpoint { anchor: x, dir: 1.0, len: h, fold: true, kappa: None }, 0.0, 0.0));
            pv_windows.push((x - h, x + h));
            nodes.push((x - h, None));
            nodes.push((x + h, None));
        } else {
            nodes.push((x, e));
        }
    }
    if !nodes.iter().any(|n| n.0 == a) {
        nodes.push((a, None));
    }
    if !nodes.iter().any(|n| n.0 == finite_end) {
        nodes.push((finite_end, None));
    }
    nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in nodes.windows(2) {
        let inside_pv = pv_windows.iter().any(|&(l, r)| w[0].0 >= l && w[1].0 <= r);
        if !inside_pv {
            split_interval(&mut segments, w[0], w[1]);
        }
    }
    if let Some(kappa) = tail_kappa {
        segments.push((Map::Tail { start: finite_end, kappa }, 0.0, 0.0));
    }
    run(f, segments, tol)
}

/// Principal value `lim_{δ→0} ∫_{δ<|τ−c|<halfwidth} f` by symmetric folding.
pub fn integrate_pv(f: &Integrand, c: f64, halfwidth: f64, tol: &Tolerance) -> Result<QuadResult, QuadError> {
    if !(halfwidth > 0.0) {
        return Err(QuadError::InvalidInterval { a: c - halfwidth, b: c + halfwidth });
    }
    let seg = (Map::Endpoint { anchor: c, dir: 1.0, len: halfwidth, fold: true, kappa: None }, 0.0, 0.0);
    run(f, vec![seg], tol)
}

/// Large-τ behaviour of a symmetric section beyond the quadrature range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// `|F(τ)| ≤ C(1+|τ|)^α`; integrated to infinity with decay `1+2s−α`.
    Decay { growth_alpha: f64 },
    /// Beyond `at`, `F(τ)+F(−τ)` lies in `[lo, hi]`.
    Bounded { at: f64, lo: f64, hi: f64 },
    /// Beyond `at`, `F(τ)+F(−τ)` is periodic with the given period and mean,
    /// deviating from the mean by at most `amplitude`.
    Periodic { at: f64, period: f64, mean: f64, amplitude: f64 },
}

type Increment<'a> = dyn Fn(f64, f64) -> f64 + Sync + 'a;

/// A symmetric second-difference integral
/// `∫_0^∞ (F(τ)+F(−τ)−2F(0)) / τ^{1+2s} dτ`.
///
/// `increment(anchor, offset)` returns `F(anchor+offset) − F(0)`; breakpoints are
/// signed τ-locations where `F` loses smoothness.
pub struct SymmetricSection<'a> {
    increment: Box<Increment<'a>>,
    pub center_value: f64,
    pub second_derivative: f64,
    pub smooth_radius: f64,
    pub breakpoints: Vec<Singularity>,
    pub tail: Tail,
    /// Absolute rounding level of `increment` near τ = 0 (0 for cancellation-free increments).
    pub noise_floor: f64,
}

impl<'a> SymmetricSection<'a> {
    pub fn new(
        increment: impl Fn(f64, f64) -> f64 + Sync + 'a,
        center_value: f64,
        second_derivative: f64,
        tail: Tail,
    ) -> Self {
        SymmetricSection {
            increment: Box::new(increment),
            center_value,
            second_derivative,
            smooth_radius: f64::INFINITY,
            breakpoints: Vec::new(),
            tail,
            noise_floor: center_value.abs(),
        }
    }

    pub fn breakpoint(mut self, location: f64, exponent: f64) -> Self {
        self.breakpoints.push(Singularity { location, exponent });
        self.smooth_radius = self.smooth_radius.min(location.abs());
        self
    }

    pub fn smooth_within(mut self, radius: f64) -> Self {
        self.smooth_radius = self.smooth_radius.min(radius);
        self
    }

    pub fn noise_floor(mut self, level: f64) -> Self {
        self.noise_floor = level;
        self
    }

    pub fn increment(&self, anchor: f64, offset: f64) -> f64 {
        (self.increment)(anchor, offset)
    }

    fn sum(&self, t: f64) -> f64 {
        (self.increment)(0.0, t) + (self.increment)(0.0, -t)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SectionError {
    #[error("growth exponent {alpha} is not below 2s = {two_s}")]
    GrowthViolation { alpha: f64, two_s: f64 },
    #[error("section is not smooth at the evaluation point")]
    NotSmooth,
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Computes `∫_0^∞ (F(τ)+F(−τ)−2F(0)) / τ^{1+2s} dτ` without any normalizing constant.
///
/// On `(0, δ)` the second difference is replaced by `F''(0)τ²`; δ is halved from
/// `min(δ₀/2, 1)` until the estimated Taylor remainder is below a quarter of the
/// target, stopping where rounding in the second difference would dominate.
pub fn second_difference(sec: &SymmetricSection, s: f64, tol: &Tolerance) -> Result<QuadResult, SectionError> {
    let two_s = 2.0 * s;
    if let Tail::Decay { growth_alpha } = sec.tail {
        if growth_alpha >= two_s {
            return Err(SectionError::GrowthViolation { alpha: growth_alpha, two_s });
        }
    }
    if !(sec.smooth_radius > 0.0) {
        return Err(SectionError::NotSmooth);
    }
    let fpp = sec.second_derivative;
    let taylor = |d: f64| fpp * d.powf(2.0 - two_s) / (2.0 - two_s);
    let remainder_est = |d: f64, r: f64, r_half: f64| r.max(16.0 * r_half) * d.powf(-two_s) / (4.0 - two_s);
    let noise_est = |d: f64, g: f64| 4.0 * f64::EPSILON * (sec.noise_floor + g.abs()) * d.powf(-two_s) / two_s;

    let mut delta = (0.5 * sec.smooth_radius).min(1.0);
    let mut evals = 0usize;
    let resid = |d: f64| (sec.sum(d) - fpp * d * d).abs();
    let mut r = resid(delta);
    let mut r_half = resid(0.5 * delta);
    evals += 4;
    let target0 = tol.target(taylor(delta)).max(tol.abs_tol);
    let mut best = (delta, remainder_est(delta, r, r_half) + noise_est(delta, sec.sum(delta)));
    for _ in 0..60 {
        let rem = remainder_est(delta, r, r_half);
        let noise = noise_est(delta, sec.sum(delta));
        evals += 2;
        if rem + noise < best.1 {
            best = (delta, rem + noise);
        }
        if rem <= 0.25 * target0 || noise > rem {
            break;
        }
        delta *= 0.5;
        r = r_half;
        r_half = resid(0.5 * delta);
        evals += 2;
    }
    let (delta, taylor_err) = best;
    let small = QuadResult { value: taylor(delta), abs_error_estimate: taylor_err, n_evals: evals };

    let (end, tail_part) = match sec.tail {
        Tail::Decay { .. } => (f64::INFINITY, QuadResult::exact(0.0)),
        Tail::Bounded { at, lo, hi } => {
            let k = at.powf(-two_s) / two_s;
            let v = (0.5 * (lo + hi) - 2.0 * sec.center_value) * k;
            (at, QuadResult { value: v, abs_error_estimate: 0.5 * (hi - lo) * k, n_evals: 0 })
        }
        Tail::Periodic { at, period, mean, amplitude } => {
            let v = (mean - 2.0 * sec.center_value) * at.powf(-two_s) / two_s;
            let e = period * amplitude * at.powf(-1.0 - two_s);
            (at, QuadResult { value: v, abs_error_estimate: e, n_evals: 0 })
        }
    };

    let inc = &sec.increment;
    let kernel_exp = 1.0 + two_s;
    let mut f = Integrand::anchored(move |anchor: f64, offset: f64| {
        let t = anchor + offset;
        (inc(anchor, offset) + inc(-anchor, -offset)) / t.powf(kernel_exp)
    });
    let mut folded: Vec<Singularity> = Vec::new();
    for b in &sec.breakpoints {
        let loc = b.location.abs();
        if loc > delta && loc < end {
            if let Some(existing) = folded.iter_mut().find(|x| x.location == loc) {
                existing.exponent = existing.exponent.min(b.exponent);
            } else {
                folded.push(Singularity { location: loc, exponent: b.exponent });
            }
        }
    }
    f.singular_points = folded;
    let level = 8.0 * f64::EPSILON * sec.noise_floor;
    if level > 0.0 {
        f = f.noise(move |t: f64| level / t.abs().powf(kernel_exp));
    }
    if let Tail::Decay { growth_alpha } = sec.tail {
        f.tail_decay = Some(kernel_exp - growth_alpha.max(0.0));
    }
    let inner_tol = Tolerance { abs_tol: 0.5 * tol.abs_tol, rel_tol: 0.5 * tol.rel_tol, max_evals: tol.max_evals };
    let mid = if end > delta { integrate(&f, delta, end, &inner_tol)? } else { QuadResult::exact(0.0) };
    Ok(small.plus(mid).plus(tail_part))
}
