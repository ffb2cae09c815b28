//! Independent reference quadrature for the integration tests.
//!
//! Everything here is a trapezoid rule in a double-exponential variable, refined
//! by halving the step until two levels agree. None of it touches the library's
//! own quadrature engine.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Trapezoid sums at step `h = 2^-level` until consecutive levels agree.
fn refine(level_sum: impl Fn(f64) -> f64) -> f64 {
    let mut prev = level_sum(0.5);
    for level in 2..=9 {
        let h = 0.5f64.powi(level);
        let cur = level_sum(h);
        if (cur - prev).abs() <= 1e-15 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `∫_0^L f(x) dx`, tanh-sinh. The abscissae are accurate near 0, so `f` may be
/// algebraically singular there (and mildly at `L`).
pub fn tanh_sinh(f: impl Fn(f64) -> f64, len: f64) -> f64 {
    refine(|h| {
        let n = (4.5 / h) as i64;
        let mut sum = 0.0;
        for i in -n..=n {
            let t = i as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            // x = L / (1 + e^{-2u}), written to stay accurate for u → −∞
            let x = len / (1.0 + (-2.0 * u).exp());
            let w = len * FRAC_PI_2 * t.cosh() / (2.0 * u.cosh() * u.cosh());
            if x > 0.0 && x < len && w > 0.0 {
                sum += w * f(x);
            }
        }
        h * sum
    })
}

/// `∫_0^∞ f(x) dx`, exp-sinh. `f` may be algebraically singular at 0 and must decay
/// at least like `x^{-1-κ}` for some `κ > 0`.
pub fn exp_sinh(f: impl Fn(f64) -> f64) -> f64 {
    refine(|h| {
        let n = (5.0 / h) as i64;
        let mut sum = 0.0;
        for i in -n..=n {
            let t = i as f64 * h;
            let x = (FRAC_PI_2 * t.sinh()).exp();
            let w = x * FRAC_PI_2 * t.cosh();
            if x > 0.0 && x.is_finite() && w.is_finite() {
                let v = f(x);
                if v != 0.0 {
                    sum += w * v;
                }
            }
        }
        h * sum
    })
}

/// Limit `δ → 0` of `cut(δ)` when `cut(δ) = I + a δ^{p1} + b δ^{p2} + O(δ^{p3})`,
/// from the sequence `δ = δ₀, δ₀/2, δ₀/4`.
pub fn delta_sequence(cut: impl Fn(f64) -> f64, delta0: f64, p1: f64, p2: f64) -> f64 {
    let i0 = cut(delta0);
    let i1 = cut(delta0 / 2.0);
    let i2 = cut(delta0 / 4.0);
    let r1 = 2f64.powf(p1);
    let a0 = (r1 * i1 - i0) / (r1 - 1.0);
    let a1 = (r1 * i2 - i1) / (r1 - 1.0);
    let r2 = 2f64.powf(p2);
    (r2 * a1 - a0) / (r2 - 1.0)
}

/// Folded integral `∫_δ^∞ g(τ)/τ^{1+2s} dτ` where `g(τ) = h(τ, |1−τ|)` has an
/// algebraic singularity at τ = 1 (second argument is the exact distance to 1).
pub fn folded_with_kink(h: impl Fn(f64, f64) -> f64, s: f64, delta: f64) -> f64 {
    let k = |t: f64| t.powf(-1.0 - 2.0 * s);
    // [δ, 1]: d = 1 − τ
    let left = tanh_sinh(|d| h(1.0 - d, d) * k(1.0 - d), 1.0 - delta);
    // [1, ∞): d = τ − 1
    let right = exp_sinh(|d| h(1.0 + d, d) * k(1.0 + d));
    left + right
}

/// Reference value of `P.V.∫ (|1+τ|^{−γ}−1)/|τ|^{1+2s} dτ`.
pub fn hat_c_dec_oracle(gamma: f64, s: f64) -> f64 {
    let h = |t: f64, d: f64| (1.0 + t).powf(-gamma) + d.powf(-gamma) - 2.0;
    delta_sequence(|delta| folded_with_kink(h, s, delta), 2f64.powi(-8), 2.0 - 2.0 * s, 4.0 - 2.0 * s)
}

/// Reference value of `P.V.∫ (1−|1+τ|^{γ})/|τ|^{1+2s} dτ`.
pub fn hat_c_gro_oracle(gamma: f64, s: f64) -> f64 {
    let h = |t: f64, d: f64| 2.0 - (1.0 + t).powf(gamma) - d.powf(gamma);
    delta_sequence(|delta| folded_with_kink(h, s, delta), 2f64.powi(-8), 2.0 - 2.0 * s, 4.0 - 2.0 * s)
}

/// `∫_0^∞ g(τ)/τ^{1+2s}` for an even-order-two smooth numerator `g = O(τ²)`.
pub fn smooth_section_oracle(g: impl Fn(f64) -> f64, s: f64) -> f64 {
    let cut = |delta: f64| exp_sinh(|t| g(delta + t) * (delta + t).powf(-1.0 - 2.0 * s));
    delta_sequence(cut, 2f64.powi(-8), 2.0 - 2.0 * s, 4.0 - 2.0 * s)
}

pub fn c_perp_oracle(gamma: f64, s: f64) -> f64 {
    2.0 * smooth_section_oracle(|t| (1.0 + t * t).powf(-gamma / 2.0) - 1.0, s)
}

pub fn c_iso_oracle(gamma: f64, s: f64, n: usize) -> f64 {
    let a = 2.0 / (n as f64).sqrt();
    smooth_section_oracle(
        |t| (1.0 + t * t + a * t).powf(-gamma / 2.0) + (1.0 + t * t - a * t).powf(-gamma / 2.0) - 2.0,
        s,
    )
}

pub fn c_n_plus_oracle(gamma: f64, s: f64, n: usize) -> f64 {
    let a = 2.0 / (n as f64).sqrt();
    let r = (n as f64).sqrt();
    let tail = exp_sinh(|d| {
        let t = r + d;
        (1.0 + t * t - a * t).powf(-gamma / 2.0) * t.powf(-1.0 - 2.0 * s)
    });
    n as f64 * c_iso_oracle(gamma, s, n) - tail
}

/// Bisection on a sign-changing bracket.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "bracket [{lo}, {hi}] has no sign change");
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Third-order Taylor polynomial of `r ↦ r^{-γ/2}` at `r0`, evaluated at `r`.
pub fn cap_oracle(gamma: f64, r0: f64, r: f64) -> f64 {
    let e = -gamma / 2.0;
    let d = r - r0;
    let c0 = r0.powf(e);
    let c1 = e * r0.powf(e - 1.0);
    let c2 = e * (e - 1.0) * r0.powf(e - 2.0) / 2.0;
    let c3 = e * (e - 1.0) * (e - 2.0) * r0.powf(e - 3.0) / 6.0;
    c0 + d * (c1 + d * (c2 + d * c3))
}

/// `w_γ` written out directly: cap below `|y|² = 1/2`, `|y|^{−γ}` beyond.
pub fn w_gamma_oracle(gamma: f64, y: &[f64]) -> f64 {
    let r: f64 = y.iter().map(|c| c * c).sum();
    if r >= 0.5 {
        r.powf(-gamma / 2.0)
    } else {
        cap_oracle(gamma, 0.5, r)
    }
}

/// `C_s = 4^s s Γ(1/2+s) / (√π Γ(1−s))`.
pub fn c_s(s: f64) -> f64 {
    4f64.powf(s) * s * gamma_fn(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma_fn(1.0 - s))
}

/// Γ(x) for x > 0 by shifting to x ≥ 10 and a Stirling series.
pub fn gamma_fn(x: f64) -> f64 {
    let mut shift = 1.0;
    let mut y = x;
    while y < 10.0 {
        shift *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    let ln = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    ln.exp() / shift
}

/// Reference value of `∫_0^∞ ((1+τ)^μ+(1−τ)_+^μ−2)/τ^{1+2s} dτ`.
pub fn c_s_mu_oracle(mu: f64, s: f64) -> f64 {
    let h = move |t: f64, d: f64| (1.0 + t).powf(mu) + if t < 1.0 { d.powf(mu) } else { 0.0 } - 2.0;
    delta_sequence(|delta| folded_with_kink(h, s, delta), 2f64.powi(-8), 2.0 - 2.0 * s, 4.0 - 2.0 * s)
}
