//! Adaptive quadrature for even, power-law singular, oscillatory integrands.
//!
//! Half-line integrals are cut into three regions: `(0, a]` under the
//! substitution `x = a e^{-y}`, panels between the split points, and a tail.
//! When the integrand is a periodic modulus times a single power the tail is
//! summed exactly with Hurwitz-zeta weights over one period. A periodic
//! modulus times several powers is summed period by period along fixed
//! phases. Anything else is extrapolated from window integrals and the
//! extrapolation spread is added to the error estimate.

pub mod gk;
pub mod special;

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use gk::{adaptive, Piece};
pub use special::{common_base, cos_power_mean, hurwitz_zeta, riemann_zeta, scaled_hurwitz};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub split_points: Vec<f64>,
    /// Start of the tail region; chosen from the split points when absent.
    pub tail_cutoff: Option<f64>,
    pub max_depth: u32,
    pub osc_panels_per_period: u32,
    pub max_evaluations: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            split_points: vec![1.0],
            tail_cutoff: None,
            max_depth: 40,
            osc_panels_per_period: 8,
            max_evaluations: 40_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let bad = |m: &str| Err(QuadError::InvalidConfig(m.to_string()));
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad("relTol and absTol must be positive");
        }
        if self.max_depth < 10 {
            return bad("maxDepth must be at least 10");
        }
        if self.osc_panels_per_period < 4 {
            return bad("oscPanelsPerPeriod must be at least 4");
        }
        if self.split_points.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return bad("split points must be positive");
        }
        Ok(())
    }

    fn target(&self, v: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * v.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexQuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no convergence: value {value}, achieved error {error} > target {target}")]
    NonConvergence { value: f64, error: f64, target: f64 },
    #[error("integrand negative at x = {x}: {value}")]
    NegativeSample { x: f64, value: f64 },
    #[error("integrand not finite at x = {x}")]
    NonFinite { x: f64 },
}

/// Description of `∫_0^∞ g(x) dx` for the half-line engine.
pub struct HalfLine<'a> {
    pub g: &'a dyn Fn(f64) -> f64,
    /// g = O(x^{-1-decay}) at infinity.
    pub decay: f64,
    /// Largest power present in the tail; equal to `decay` for a single power.
    pub decay_max: f64,
    /// g = O(x^{-singular}) at zero.
    pub singular: f64,
    /// Period of `g(x) x^{1+decay}` when it is exactly periodic.
    pub period: Option<f64>,
    /// Largest angular frequency present in g (0 if none).
    pub frequency: f64,
    /// Extra split point, typically `1/δ`.
    pub scale: Option<f64>,
    /// `g` with its periodic factors taken at the first argument and its
    /// powers at the second; lets a periodic tail with several powers be
    /// summed period by period.
    pub split: Option<&'a dyn Fn(f64, f64) -> f64>,
}

impl<'a> HalfLine<'a> {
    pub fn simple(g: &'a dyn Fn(f64) -> f64, decay: f64, singular: f64) -> Self {
        Self { g, decay, decay_max: decay, singular, period: None, frequency: 0.0, scale: None, split: None }
    }
}

/// `2 ∫_0^∞ g(x) dx` for a nonnegative g (integral of an even function over ℝ).
pub fn integrate_even_singular(
    g: &dyn Fn(f64) -> f64,
    decay_exponent: f64,
    singular_exponent: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadError> {
    let ig = HalfLine::simple(g, decay_exponent, singular_exponent);
    integrate_even(&ig, cfg)
}

/// Even-function integral with full tail information.
pub fn integrate_even(ig: &HalfLine<'_>, cfg: &QuadratureConfig) -> Result<QuadResult, QuadError> {
    let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
    let inner = ig.g;
    let checked = |x: f64| {
        let v = inner(x);
        if !(v >= 0.0) && bad.get().is_none() {
            bad.set(Some((x, v)));
        }
        v
    };
    let wrapped = HalfLine { g: &checked, ..*ig };
    let r = half_line(&wrapped, cfg);
    if let Some((x, v)) = bad.get() {
        return Err(if v.is_nan() { QuadError::NonFinite { x } } else { QuadError::NegativeSample { x, value: v } });
    }
    let r = r?;
    Ok(QuadResult { value: 2.0 * r.value, error: 2.0 * r.error, evaluations: r.evaluations })
}

fn geometric_panels<'a>(
    f: &'a dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    splits: &[f64],
    width: f64,
    out: &mut Vec<Piece<'a, f64>>,
) {
    let mut edges = vec![lo];
    edges.extend(splits.iter().copied().filter(|s| *s > lo && *s < hi));
    edges.push(hi);
    for w in edges.windows(2) {
        let (u, v) = (w[0], w[1]);
        let k = ((v / u).log2().ceil() as usize).max(1);
        let r = (v / u).powf(1.0 / k as f64);
        let mut x = u;
        for i in 0..k {
            let y = if i + 1 == k { v } else { x * r };
            let panels = if width.is_finite() { ((y - x) / width).ceil() as usize } else { 1 };
            out.push(Piece { f, a: x, b: y, panels: panels.max(1) });
            x = y;
        }
    }
}

struct Origin {
    y_end: f64,
    remainder: f64,
    remainder_err: f64,
}

/// Parameters of the `(0, a]` region under `x = a e^{-y}`.
fn origin_region(g: &dyn Fn(f64) -> f64, a: f64, singular: f64, rel_tol: f64) -> Origin {
    let p = singular.min(0.99);
    // even, so the width-2 panels of a tighter run extend those of a looser one
    let y_end = (((1e-3 * rel_tol).ln().abs() + 4.0) / (1.0 - p)).clamp(8.0, 600.0);
    let y_end = 2.0 * (0.5 * y_end).ceil();
    let xe = a * (-y_end).exp();
    let (g1, g2) = (g(xe), g(xe * (-1f64).exp()));
    let (remainder, remainder_err) = if g1 != 0.0 && g1.is_finite() && g2.is_finite() && g1.signum() == g2.signum() {
        let p_loc = (g2 / g1).ln().min(p);
        let r = g1 * xe / (1.0 - p_loc);
        (r, 1e-2 * r.abs())
    } else {
        (0.0, (g1.abs() + g2.abs()) * xe / (1.0 - p))
    };
    Origin { y_end, remainder, remainder_err }
}

fn sorted_splits(cfg: &QuadratureConfig, scale: Option<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = cfg.split_points.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if let Some(v) = scale {
        if v > 0.0 && v.is_finite() {
            s.push(v);
        }
    }
    if s.is_empty() {
        s.push(1.0);
    }
    s.sort_by(|a, b| a.total_cmp(b));
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    s
}

/// Node sums split by node index mod 4, so the rules with a half and a
/// quarter of the nodes come with the full one.
#[derive(Debug, Clone, Copy)]
struct Interleaved([f64; 4]);

impl std::ops::Add for Interleaved {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Interleaved(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl std::ops::Sub for Interleaved {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Interleaved(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl std::ops::Mul<f64> for Interleaved {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Interleaved(self.0.map(|v| v * c))
    }
}

impl gk::Value for Interleaved {
    fn zero() -> Self {
        Interleaved([0.0; 4])
    }
    fn norm(self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }
    fn finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// `∫_x^∞ g` for g = (period-`t` factors) × (a mixture of powers), with `x`
/// a multiple of `t` where every kernel vanishes.
///
/// Each period is mapped by `w(τ) = τ - sin(2πτ)/2π`, which flattens the
/// `|s|^α` cusps at the period ends, and sampled at `nodes` equal steps in τ.
/// Along one node the phases are frozen, so the sum over periods is a smooth
/// series: summed directly for the first periods, then by Euler–Maclaurin.
/// The rules with half and a quarter of the nodes give the contraction rate
/// of the node rule and with it the error estimate.
fn periodic_mixture_tail(
    split: &dyn Fn(f64, f64) -> f64,
    x: f64,
    t: f64,
    q_lo: f64,
    q_hi: f64,
    nodes: usize,
    cfg: &QuadratureConfig,
    goal: f64,
) -> QuadResult {
    const DIRECT: usize = 16;
    let h = 1.0 / nodes as f64;
    let mapped: Vec<(f64, f64)> = (1..nodes)
        .map(|j| {
            let tau = j as f64 * h;
            let (s, c) = (2.0 * PI * tau).sin_cos();
            (x + t * (tau - s / (2.0 * PI)), 1.0 - c)
        })
        .collect();
    let count = Cell::new(0usize);
    let phi = |nu: f64| -> Interleaved {
        let mut b = [0.0; 4];
        for (j, &(s, dw)) in mapped.iter().enumerate() {
            b[(j + 1) % 4] += dw * split(s, s + nu * t);
        }
        count.set(count.get() + mapped.len());
        Interleaved(b)
    };
    let mut sum = Interleaved([0.0; 4]);
    for n in 0..DIRECT {
        sum = sum + phi(n as f64);
    }
    // Σ_{n≥N} Φ(n) = ∫_N^∞ Φ + Φ(N)/2 - Φ′(N)/12 + Φ‴(N)/720
    let nf = DIRECT as f64;
    let (m1, m2, p0, p1, p2) = (phi(nf - 1.0), phi(nf - 0.5), phi(nf), phi(nf + 0.5), phi(nf + 1.0));
    let d1 = (m1 - m2 * 8.0 + p1 * 8.0 - p2) * (1.0 / 6.0);
    let d3 = (p2 - p1 * 2.0 + m2 * 2.0 - m1) * 4.0;
    sum = sum + p0 * 0.5 - d1 * (1.0 / 12.0) + d3 * (1.0 / 720.0);
    let p0_total: f64 = p0.0.iter().sum();
    let skipped = (0..5).map(|i| (q_hi + i as f64) / nf).product::<f64>() / 30240.0 * p0_total.abs();
    let vmax = ((1e-3 * cfg.rel_tol).ln().abs() / (q_lo - 1.0)).min(600.0);
    let far = |v: f64| {
        let nu = nf * v.exp();
        phi(nu) * nu
    };
    let step = t * h;
    let pieces = [Piece { f: &far, a: 0.0, b: vmax, panels: ((vmax / 8.0).ceil() as usize).max(2) }];
    let out = adaptive(&pieces, Interleaved([0.0; 4]), &|_| 0.5 * goal / step, cfg.max_depth, cfg.max_evaluations);
    let rest = far(vmax) * (1.0 / (q_lo - 1.0));
    sum = sum + out.total + rest;
    let [b0, b1, b2, b3] = sum.0;
    let full = step * (b0 + b1 + b2 + b3);
    let half = 2.0 * step * (b0 + b2);
    let quarter = 4.0 * step * b0;
    let (d_full, d_half) = ((full - half).abs(), (half - quarter).abs());
    // once the rule contracts steadily, the full rule is off by about d·r/(1-r)
    let r = if d_half > 0.0 { d_full / d_half } else { 1.0 };
    let rule_err = if r <= 0.5 { d_full * r / (1.0 - r) } else { d_full };
    let error = rule_err + step * (out.error + gk::Value::norm(rest) + skipped);
    QuadResult { value: full, error, evaluations: count.get() }
}

/// `∫_0^∞ g(x) dx` for a signed g with the described asymptotics.
pub fn half_line(ig: &HalfLine<'_>, cfg: &QuadratureConfig) -> Result<QuadResult, QuadError> {
    cfg.validate()?;
    if !(ig.singular < 1.0) || !(ig.decay > 0.0) || ig.decay_max < ig.decay {
        return Err(QuadError::InvalidInput(format!(
            "exponents must satisfy singular < 1 < 1 + decay (got {}, {})",
            ig.singular, ig.decay
        )));
    }
    let g = ig.g;
    let splits = sorted_splits(cfg, ig.scale);
    let a = splits[0];
    let smax = *splits.last().unwrap();
    let org = origin_region(g, a, ig.singular, cfg.rel_tol);
    let phi_origin = move |y: f64| {
        let x = a * (-y).exp();
        g(x) * x
    };
    let width = if ig.frequency > 0.0 {
        4.0 * PI / (ig.frequency * cfg.osc_panels_per_period as f64)
    } else {
        f64::INFINITY
    };
    let pure = ig.decay_max - ig.decay <= 1e-14;
    let q_lo = 1.0 + ig.decay;
    let q_hi = 1.0 + ig.decay_max;
    match ig.period {
        Some(t) if pure => {
            let x = cfg.tail_cutoff.unwrap_or(2.0 * smax).max(smax);
            let q = q_lo;
            let tail = move |s: f64| g(s) * scaled_hurwitz(q, s / t);
            let mut pieces = vec![Piece { f: &phi_origin, a: 0.0, b: org.y_end, panels: (org.y_end / 2.0).ceil() as usize }];
            geometric_panels(g, a, x, &splits, width, &mut pieces);
            pieces.push(Piece { f: &tail, a: x, b: x + t, panels: ((t / width).ceil() as usize).max(1) });
            let out = adaptive(&pieces, org.remainder, &|v| cfg.target(v), cfg.max_depth, cfg.max_evaluations);
            finish(out.total, out.error + org.remainder_err, out.evaluations, cfg)
        }
        Some(t) if ig.split.is_some() => {
            let split = ig.split.unwrap();
            // the tail starts on a common zero of the kernels
            let x = (cfg.tail_cutoff.unwrap_or(2.0 * smax).max(smax) / t).ceil() * t;
            let mut pieces = vec![Piece { f: &phi_origin, a: 0.0, b: org.y_end, panels: (org.y_end / 2.0).ceil() as usize }];
            geometric_panels(g, a, x, &splits, width, &mut pieces);
            let head = adaptive(&pieces, org.remainder, &|v| 0.5 * cfg.target(v), cfg.max_depth, cfg.max_evaluations);
            let harmonics = (ig.frequency * t / (2.0 * PI)).ceil().max(1.0) as usize;
            let mut nodes = (16 * harmonics).next_power_of_two().max(64);
            let mut evals = head.evaluations;
            loop {
                let goal = 0.25 * cfg.target(head.total);
                let tail = periodic_mixture_tail(split, x, t, q_lo, q_hi, nodes, cfg, goal);
                evals += tail.evaluations;
                let total = head.total + tail.value;
                let err = head.error + org.remainder_err + tail.error;
                // more nodes cannot help once the tail meets its own goal
                if err <= cfg.target(total) || tail.error <= goal || nodes >= 1 << 19 || evals > cfg.max_evaluations {
                    return finish(total, err, evals, cfg);
                }
                nodes *= 2;
            }
        }
        _ => {
            let mut x = cfg.tail_cutoff.unwrap_or_else(|| {
                let osc = if ig.frequency > 0.0 { 64.0 * PI / ig.frequency } else { 0.0 };
                (4.0 * smax).max(osc)
            });
            x = x.max(4.0 * smax);
            let x_cap = x * 4096.0;
            let mut evals = 0usize;
            loop {
                let mut pieces = vec![Piece { f: &phi_origin, a: 0.0, b: org.y_end, panels: (org.y_end / 2.0).ceil() as usize }];
                geometric_panels(g, a, 0.25 * x, &splits, width, &mut pieces);
                let w1 = pieces.len();
                let nw = |len: f64| if width.is_finite() { ((len / width).ceil() as usize).max(1) } else { 4 };
                pieces.push(Piece { f: g, a: 0.25 * x, b: 0.5 * x, panels: nw(0.25 * x) });
                pieces.push(Piece { f: g, a: 0.5 * x, b: x, panels: nw(0.5 * x) });
                let out = adaptive(&pieces, org.remainder, &|v| 0.5 * cfg.target(v), cfg.max_depth, cfg.max_evaluations);
                evals += out.evaluations;
                let (i1, i2) = (out.per_piece[w1].0, out.per_piece[w1 + 1].0);
                let q = if pure {
                    q_lo
                } else if i2 / i1 > 0.0 {
                    (1.0 - (i2 / i1).log2()).clamp(q_lo, q_hi)
                } else {
                    0.5 * (q_lo + q_hi)
                };
                let c = 1.0 / (2f64.powf(q - 1.0) - 1.0);
                let tail = i2 * c;
                let alt = i1 * c - i2;
                let total = out.total + tail;
                let err = out.error + (tail - alt).abs() + org.remainder_err;
                if err <= cfg.target(total) || 2.0 * x > x_cap || evals > cfg.max_evaluations {
                    return finish(total, err, evals, cfg);
                }
                x *= 2.0;
            }
        }
    }
}

/// Description of `∫_0^∞ g` for `g(x) = G(ωx, x)`, G 2π-periodic in its
/// first argument and slowly varying in the second.
pub struct TwoScale<'a> {
    pub g: &'a dyn Fn(f64) -> f64,
    /// Mean of G over the fast phase, with the beat phase taken at the first
    /// argument and the powers at the second.
    pub mean: &'a dyn Fn(f64, f64) -> f64,
    /// Fast angular frequency ω.
    pub omega: f64,
    /// Angular frequency of the beat left in the mean (> 0).
    pub beat: f64,
    /// Largest angular frequency in g.
    pub frequency: f64,
    pub decay: f64,
    pub decay_max: f64,
    pub singular: f64,
}

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp())
    }
}

/// `∫_0^∞ g` by direct quadrature over the first 64 fast periods and the
/// fast-phase mean beyond, joined by a C^∞ taper on [X, 2X], X = 32·2π/ω.
///
/// Under the taper the dropped oscillating part has no boundary term, so the
/// splice error is set by how close a fast harmonic comes to a multiple of
/// the beat; it is small when `beat ≪ ω` and is not part of the estimate.
pub fn two_scale(ig: &TwoScale<'_>, cfg: &QuadratureConfig) -> Result<QuadResult, QuadError> {
    cfg.validate()?;
    if !(ig.singular < 1.0) || !(ig.decay > 0.0) || !(ig.omega > 0.0) || !(ig.beat > 0.0) {
        return Err(QuadError::InvalidInput("two-scale integrand needs positive decay and frequencies".into()));
    }
    let (g, mean) = (ig.g, ig.mean);
    let x = 64.0 * PI / ig.omega;
    let chi = move |y: f64| smooth_step((y - x) / x);
    let splits: Vec<f64> = sorted_splits(cfg, None).into_iter().filter(|s| *s < x).collect();
    let a = splits.first().copied().unwrap_or(1.0).min(0.5 * x);
    let org = origin_region(g, a, ig.singular, cfg.rel_tol);
    let phi_origin = move |y: f64| {
        let s = a * (-y).exp();
        g(s) * s
    };
    let head = move |y: f64| g(y) * (1.0 - chi(y));
    let width = 4.0 * PI / (ig.frequency.max(ig.omega) * cfg.osc_panels_per_period as f64);
    let mut pieces = vec![Piece { f: &phi_origin, a: 0.0, b: org.y_end, panels: (org.y_end / 2.0).ceil() as usize }];
    geometric_panels(&head, a, 2.0 * x, &splits, width, &mut pieces);
    let pb = 2.0 * PI / ig.beat;
    let wb = pb / cfg.osc_panels_per_period as f64;
    let mean1 = move |y: f64| mean(y, y);
    let tapered = move |y: f64| chi(y) * mean1(y);
    pieces.push(Piece { f: &tapered, a: x, b: 2.0 * x, panels: ((x / wb).ceil() as usize).max(4) });
    let xb = (2.0 * x / pb).ceil() * pb;
    if xb > 2.0 * x {
        geometric_panels(&mean1, 2.0 * x, xb, &[], wb, &mut pieces);
    }
    let q_lo = 1.0 + ig.decay;
    let q_hi = 1.0 + ig.decay_max;
    if q_hi - q_lo <= 1e-14 {
        let tail = move |s: f64| mean1(s) * scaled_hurwitz(q_lo, s / pb);
        pieces.push(Piece { f: &tail, a: xb, b: xb + pb, panels: cfg.osc_panels_per_period as usize });
        let out = adaptive(&pieces, org.remainder, &|v| cfg.target(v), cfg.max_depth, cfg.max_evaluations);
        return finish(out.total, out.error + org.remainder_err, out.evaluations, cfg);
    }
    let body = adaptive(&pieces, org.remainder, &|v| 0.5 * cfg.target(v), cfg.max_depth, cfg.max_evaluations);
    let mut nodes = 64;
    let mut evals = body.evaluations;
    loop {
        let goal = 0.25 * cfg.target(body.total);
        let tail = periodic_mixture_tail(mean, xb, pb, q_lo, q_hi, nodes, cfg, goal);
        evals += tail.evaluations;
        let total = body.total + tail.value;
        let err = body.error + org.remainder_err + tail.error;
        if err <= cfg.target(total) || tail.error <= goal || nodes >= 1 << 12 {
            return finish(total, err, evals, cfg);
        }
        nodes *= 2;
    }
}

fn finish(value: f64, error: f64, evaluations: usize, cfg: &QuadratureConfig) -> Result<QuadResult, QuadError> {
    if !value.is_finite() {
        return Err(QuadError::NonFinite { x: f64::NAN });
    }
    let target = cfg.target(value);
    if error > target {
        return Err(QuadError::NonConvergence { value, error, target });
    }
    Ok(QuadResult { value, error, evaluations })
}

/// `∫_0^{|len|} f(d) dd` where `f(d)` is the integrand at distance `d` from a
/// point carrying an algebraic singularity of order `d^{sing}`, sing > -1.
///
/// Callers evaluate the integrand through the distance so that no precision
/// is lost next to the singular point.
pub fn integrate_endpoint_singular(
    f: &dyn Fn(f64) -> f64,
    len: f64,
    sing: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadError> {
    let ell = len.abs();
    let org = origin_region(f, ell, -sing, cfg.rel_tol);
    let phi = |y: f64| {
        let d = ell * (-y).exp();
        f(d) * d
    };
    let pieces = [Piece { f: &phi, a: 0.0, b: org.y_end, panels: (org.y_end / 2.0).ceil() as usize }];
    let out = adaptive(&pieces, org.remainder, &|v| cfg.target(v), cfg.max_depth, cfg.max_evaluations);
    finish(out.total, out.error + org.remainder_err, out.evaluations, cfg)
}

/// `∫_{-∞}^{b_last} f du` where f has algebraic singularities of order
/// `sing` at the sorted `breaks` and decays like `|u|^{-1-left_decay}`.
///
/// The integrand is called as `f(anchor, offset)` for the point
/// `anchor + offset`, with `anchor` one of the breakpoints; differences to the
/// anchor should be formed as `(p - anchor) - offset`.
pub fn integrate_left_line(
    f: &dyn Fn(f64, f64) -> f64,
    breaks: &[f64],
    sing: f64,
    left_decay: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadError> {
    let mut b: Vec<f64> = breaks.to_vec();
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup();
    if b.is_empty() || !(left_decay > 0.0) {
        return Err(QuadError::InvalidInput("need breakpoints and positive decay".into()));
    }
    let sub = QuadratureConfig { rel_tol: cfg.rel_tol * 0.25, ..cfg.clone() };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evals = 0;
    let mut add = |r: QuadResult| {
        value += r.value;
        error += r.error;
        evals += r.evaluations;
    };
    for w in b.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        add(integrate_endpoint_singular(&|d| f(lo, d), half, sing, &sub).or_else(accept_partial)?);
        add(integrate_endpoint_singular(&|d| f(hi, -d), half, sing, &sub).or_else(accept_partial)?);
    }
    let b0 = b[0];
    let ell = (b[b.len() - 1] - b0).max(1.0);
    add(integrate_endpoint_singular(&|d| f(b0, -d), ell, sing, &sub).or_else(accept_partial)?);
    // far left: u = b0 - ell e^{y}
    let y_end = (((1e-3 * cfg.rel_tol).ln().abs() + 4.0) / left_decay).clamp(8.0, 600.0);
    let y_end = 2.0 * (0.5 * y_end).ceil();
    let phi = |y: f64| {
        let d = ell * y.exp();
        f(b0, -d) * d
    };
    let de = ell * y_end.exp();
    let rem = f(b0, -de) * de / left_decay;
    let pieces = [Piece { f: &phi, a: 0.0, b: y_end, panels: (y_end / 2.0).ceil() as usize }];
    let out = adaptive(&pieces, rem, &|v| sub.target(v), cfg.max_depth, cfg.max_evaluations);
    add(QuadResult { value: out.total, error: out.error + 1e-2 * rem.abs(), evaluations: out.evaluations });
    finish(value, error, evals, cfg)
}

fn accept_partial(e: QuadError) -> Result<QuadResult, QuadError> {
    match e {
        QuadError::NonConvergence { value, error, .. } => Ok(QuadResult { value, error, evaluations: 0 }),
        other => Err(other),
    }
}

/// `∫_ℝ e^{iux} f(x) dx` for an absolutely integrable f with an integrable
/// singularity at 0 and `|f(x)| = O(|x|^{-envelope_decay})`.
///
/// The range is closed by a smooth complementary-error-function taper whose
/// start doubles until two successive tapers agree.
pub fn oscillatory_ft(
    f: &dyn Fn(f64) -> Complex64,
    u: f64,
    envelope_decay: f64,
    cfg: &QuadratureConfig,
) -> Result<ComplexQuadResult, QuadError> {
    cfg.validate()?;
    if !(envelope_decay > 1.0) {
        return Err(QuadError::InvalidInput(format!(
            "envelope decay {envelope_decay} <= 1: not absolutely integrable"
        )));
    }
    let fold = move |x: f64| {
        let e = Complex64::from_polar(1.0, u * x);
        e * f(x) + e.conj() * f(-x)
    };
    let splits = sorted_splits(cfg, None);
    let a = splits[0];
    let smax = *splits.last().unwrap();
    let width = 2.0 * PI / (cfg.osc_panels_per_period as f64 * u.abs() + 1.0);

    // origin: x = a e^{-y}
    let y_end: f64 = 200.0;
    let phi = |y: f64| {
        let x = a * (-y).exp();
        fold(x) * x
    };
    let xe = a * (-y_end).exp();
    let (f1, f2) = (fold(xe), fold(xe * (-1f64).exp()));
    let (n1, n2) = (f1.norm(), f2.norm());
    let origin_rem = if n1 > 0.0 && n2 > 0.0 {
        let p = (n2 / n1).ln().min(0.99);
        f1 * (xe / (1.0 - p))
    } else {
        Complex64::new(0.0, 0.0)
    };

    let envelope_start = 64.0 * PI / u.abs().max(0.25);
    let mut x1 = (4.0 * smax).max(envelope_start);
    let mut prev: Option<Complex64> = None;
    let mut history: Vec<Complex64> = Vec::new();
    let mut accel: Option<Complex64> = None;
    let mut evals = 0usize;
    let mut last = (Complex64::new(0.0, 0.0), f64::INFINITY);
    for _ in 0..9 {
        let sigma = x1 / 16.0;
        let xm = 1.5 * x1;
        let x2 = 2.0 * x1;
        let taper = move |x: f64| fold(x) * (0.5 * erfc((x - xm) / (std::f64::consts::SQRT_2 * sigma)));
        let mut pieces: Vec<Piece<'_, Complex64>> =
            vec![Piece { f: &phi, a: 0.0, b: y_end, panels: 50 }];
        let mut edges = vec![a];
        edges.extend(splits.iter().copied().filter(|s| *s > a && *s < x1));
        edges.push(x1);
        for w in edges.windows(2) {
            let n = ((w[1] - w[0]) / width).ceil() as usize;
            pieces.push(Piece { f: &fold, a: w[0], b: w[1], panels: n.max(1) });
        }
        pieces.push(Piece { f: &taper, a: x1, b: x2, panels: ((x2 - x1) / width).ceil() as usize });
        let out = adaptive(&pieces, origin_rem, &|v: Complex64| 0.25 * cfg.abs_tol.max(cfg.rel_tol * v.norm()), cfg.max_depth, cfg.max_evaluations);
        evals += out.evaluations;
        let err_quad = out.error + 1e-2 * origin_rem.norm();
        if let Some(p) = prev {
            let diff = (out.total - p).norm();
            let err = err_quad + diff;
            last = (out.total, err);
            if err <= cfg.abs_tol.max(cfg.rel_tol * out.total.norm()) {
                return Ok(ComplexQuadResult { value: out.total, error: err, evaluations: evals });
            }
        }
        // a non-oscillating power tail leaves geometric differences: extrapolate
        history.push(out.total);
        if history.len() >= 3 {
            let n = history.len();
            let (a, b, c) = (history[n - 3], history[n - 2], history[n - 1]);
            let den = (c - b) - (b - a);
            if den.norm() > 0.0 {
                let acc = c - (c - b) * (c - b) / den;
                if let Some(pa) = accel {
                    let err = err_quad + (acc - pa).norm();
                    if err < last.1 {
                        last = (acc, err);
                    }
                    if err <= cfg.abs_tol.max(cfg.rel_tol * acc.norm()) {
                        return Ok(ComplexQuadResult { value: acc, error: err, evaluations: evals });
                    }
                }
                accel = Some(acc);
            }
        }
        prev = Some(out.total);
        x1 *= 2.0;
    }
    let target = cfg.abs_tol.max(cfg.rel_tol * last.0.norm());
    Err(QuadError::NonConvergence { value: last.0.norm(), error: last.1, target })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_truncated_power() {
        let cfg = QuadratureConfig::default();
        let r = integrate_even_singular(&|x: f64| (-x).exp(), 50.0, 0.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 2e-8, "{r:?}");
        let r = integrate_even_singular(&|x: f64| if x < 1.0 { x.powf(-0.5) } else { 0.0 }, 50.0, 0.5, &cfg).unwrap();
        assert!((r.value - 4.0).abs() < 4e-8, "{r:?}");
    }

    #[test]
    fn rejects_negative_samples_and_bad_config() {
        let cfg = QuadratureConfig::default();
        let r = integrate_even_singular(&|x: f64| (x - 2.0) * (-x).exp(), 2.0, 0.0, &cfg);
        assert!(matches!(r, Err(QuadError::NegativeSample { .. })));
        let bad = QuadratureConfig { max_depth: 5, ..QuadratureConfig::default() };
        assert!(integrate_even_singular(&|x: f64| (-x).exp(), 2.0, 0.0, &bad).is_err());
    }

    #[test]
    fn periodic_tail_is_exact() {
        // |e^{ix}-1|^2 x^{-2.5} = 4 sin²(x/2) x^{-2.5}; ∫_0^∞ = -2 Γ(-1.5) cos(0.75π)
        let g = |x: f64| 4.0 * (0.5 * x).sin().powi(2) * x.powf(-2.5);
        let ig = HalfLine {
            g: &g,
            decay: 1.5,
            decay_max: 1.5,
            singular: 0.5,
            period: Some(2.0 * PI),
            frequency: 1.0,
            scale: None,
            split: None,
        };
        let r = half_line(&ig, &QuadratureConfig::default()).unwrap();
        let exact = -2.0 * statrs::function::gamma::gamma(-1.5) * (0.75 * PI).cos();
        assert!((r.value / exact - 1.0).abs() < 1e-9, "{} vs {exact}", r.value);
    }

    #[test]
    fn periodic_tail_with_two_powers() {
        // ∫_0^∞ 4 sin²(x/2) x^{-p} dx = -2 Γ(1-p) cos(π(1-p)/2)
        let exact = |p: f64| -2.0 * statrs::function::gamma::gamma(1.0 - p) * (0.5 * PI * (1.0 - p)).cos();
        let gs = |x: f64, xm: f64| 4.0 * (0.5 * x).sin().powi(2) * (xm.powf(-2.5) + 0.5 * xm.powf(-2.2));
        let g = |x: f64| gs(x, x);
        let ig = HalfLine {
            g: &g,
            decay: 1.2,
            decay_max: 1.5,
            singular: 0.5,
            period: Some(2.0 * PI),
            frequency: 1.0,
            scale: None,
            split: Some(&gs),
        };
        let r = half_line(&ig, &QuadratureConfig::default()).unwrap();
        let want = exact(2.5) + 0.5 * exact(2.2);
        assert!((r.value / want - 1.0).abs() < 1e-9, "{} vs {want}", r.value);
    }

    #[test]
    fn fallback_tail_power_law() {
        // non-oscillating slow decay: ∫_0^∞ x^{-1/2}/(1+x) dx = π
        let g = |x: f64| x.powf(-0.5) / (1.0 + x);
        let ig = HalfLine::simple(&g, 0.5, 0.5);
        let r = half_line(&ig, &QuadratureConfig::default().with_rel_tol(1e-6)).unwrap();
        assert!((r.value / PI - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn endpoint_and_left_line() {
        let cfg = QuadratureConfig::default();
        let r = integrate_endpoint_singular(&|d: f64| d.powf(-0.7), 1.0, -0.7, &cfg).unwrap();
        assert!((r.value - 1.0 / 0.3).abs() < 1e-7, "{r:?}");
        // ∫_{-∞}^{1} (1+u^2)^{-1} = π/2 + π/4
        let f = |c: f64, d: f64| {
            let u = c + d;
            1.0 / (1.0 + u * u)
        };
        let r = integrate_left_line(&f, &[0.0, 1.0], 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 0.75 * PI).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn gaussian_transform_at_zero() {
        let r = oscillatory_ft(&|x: f64| Complex64::new((-0.5 * x * x).exp(), 0.0), 0.0, 10.0, &QuadratureConfig::default()).unwrap();
        assert!((r.value.re - (2.0 * PI).sqrt()).abs() < 1e-8, "{r:?}");
        assert!(r.value.im.abs() < 1e-12);
    }
}
