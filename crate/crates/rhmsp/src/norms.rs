//! Exact stable calculus: scale norms, characteristic functions, LND distances.
//!
//! Every quantity reduces to `∫_ℝ |Σ c_k f(t_k, x)|^α dx`; by Hermitian symmetry
//! this is twice the half-line integral handed to [`crate::quad`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::model::{kernel_pos, KernelVariant, ModelError, ProcessSpec};
use crate::quad::{self, common_base, HalfLine, QuadError, QuadratureConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("quadrature failed for {context}: {source}")]
    Quad { context: String, source: QuadError },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("optimizer did not converge: best ratio {ratio}, gradient norm {grad_norm}")]
    Optimizer { ratio: f64, grad_norm: f64 },
}

fn quad_ctx(context: impl Into<String>) -> impl FnOnce(QuadError) -> NormError {
    let context = context.into();
    move |source| NormError::Quad { context, source }
}

/// Times and real coefficients of a finite linear combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FddPoint {
    pub times: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl FddPoint {
    pub fn new(times: Vec<f64>, coeffs: Vec<f64>) -> Result<Self, NormError> {
        if times.is_empty() || times.len() != coeffs.len() {
            return Err(NormError::Invalid("times and coeffs must be nonempty and of equal length".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(NormError::Invalid("times must be strictly increasing".into()));
        }
        if times.iter().chain(coeffs.iter()).any(|v| !v.is_finite()) {
            return Err(NormError::Invalid("non-finite entry".into()));
        }
        Ok(Self { times, coeffs })
    }

    pub fn single(t: f64, coeff: f64) -> Self {
        Self { times: vec![t], coeffs: vec![coeff] }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { times: self.times.clone(), coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }
}

/// One kernel term `coef · f(t, ·)` with kernel exponent `k = H + 1/α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub t: f64,
    pub k: f64,
}

/// `Σ coef_j f(t_j, x)` for one kernel variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub alpha: f64,
    pub kernel: KernelVariant,
    pub terms: Vec<Term>,
    /// Frequencies whose common base sets the modulus period; all times when empty.
    pub period_times: Vec<f64>,
}

impl Combination {
    pub fn new(alpha: f64, kernel: KernelVariant, terms: Vec<Term>) -> Self {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.t == 0.0 || term.coef == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|m| m.t == term.t && m.k == term.k) {
                Some(m) => m.coef += term.coef,
                None => merged.push(term),
            }
        }
        merged.retain(|m| m.coef != 0.0);
        Self { alpha, kernel, terms: merged, period_times: Vec::new() }
    }

    pub fn from_point(spec: &ProcessSpec, point: &FddPoint) -> Result<Self, NormError> {
        for &t in &point.times {
            spec.check_time(t)?;
        }
        let terms = point
            .times
            .iter()
            .zip(&point.coeffs)
            .map(|(&t, &c)| Term { coef: c, t, k: spec.k_exp(t) })
            .collect();
        Ok(Self::new(spec.a(), spec.kernel, terms))
    }

    /// Value at x > 0.
    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        let lx = x.ln();
        let mut s = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mag = (-term.k * lx).exp();
            s += crate::model::kernel_pos_with(self.kernel, term.t, term.k, x, mag) * term.coef;
        }
        s
    }

    /// Value with the oscillating factors at `x` and the powers at `xm`.
    #[inline]
    fn eval_split(&self, x: f64, xm: f64) -> Complex64 {
        let lx = xm.ln();
        let mut s = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mag = (-term.k * lx).exp();
            s += crate::model::kernel_pos_with(self.kernel, term.t, term.k, x, mag) * term.coef;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn single_power(&self) -> bool {
        let k0 = self.terms[0].k;
        self.terms.iter().all(|t| (t.k - k0).abs() <= 1e-15)
    }

    /// Tail/singularity description of `|S|^α`-type integrands.
    fn shape(&self) -> Shape {
        let a = self.alpha;
        let kmin = self.terms.iter().map(|t| t.k).fold(f64::INFINITY, f64::min);
        let kmax = self.terms.iter().map(|t| t.k).fold(f64::NEG_INFINITY, f64::max);
        let pure = self.single_power();
        let csum: f64 = self.terms.iter().map(|t| t.coef).sum();
        let cabs: f64 = self.terms.iter().map(|t| t.coef.abs()).sum();
        let cancels = pure && csum.abs() <= 1e-13 * cabs && self.period_times.is_empty();
        let mut times: Vec<f64> = if self.period_times.is_empty() {
            self.terms.iter().map(|t| t.t).collect()
        } else {
            self.period_times.clone()
        };
        times.sort_by(|x, y| x.total_cmp(y));
        times.dedup();
        let freqs: Vec<f64> = if cancels { times.iter().map(|t| t - times[0]).collect() } else { times.clone() };
        let frequency = freqs.iter().fold(0.0f64, |m, f| m.max(f.abs()));
        let period = common_base(&freqs, 2.0e4).map(|b| 2.0 * PI / b);
        let min_gap = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let scale = if min_gap < 1.0 { Some(1.0 / min_gap) } else { None };
        Shape {
            decay: a * kmin - 1.0,
            decay_max: a * kmax - 1.0,
            singular: 1.0 + a * (kmax - 1.0 / a) - a,
            period,
            frequency,
            scale,
        }
    }

    /// `(ω, beat)` when the terms sit at two close times whose common period
    /// is too long to sum over directly.
    fn two_scale_frequencies(&self, sh: &Shape) -> Option<(f64, f64)> {
        if !self.period_times.is_empty() || (self.alpha - 1.0).abs() < 1e-2 {
            return None;
        }
        let lo = self.terms.iter().map(|t| t.t).fold(f64::INFINITY, f64::min);
        let hi = self.terms.iter().map(|t| t.t).fold(f64::NEG_INFINITY, f64::max);
        if self.terms.iter().any(|t| t.t != lo && t.t != hi) || !(lo > 0.0) || !(hi > lo) || hi - lo > 0.1 * lo {
            return None;
        }
        let cheap = sh.period.is_some_and(|p| p <= 512.0 * 2.0 * PI / lo);
        (!cheap).then_some((lo, hi - lo))
    }

    /// Mean of `|S|^α` over the phase `ωx`, with the remaining beat phase at
    /// `y` and the powers at `z`. Writing every term as `E (e^{iθ} - 1)` up to
    /// a common conjugation gives `S = e^{iψ} U - V`, so `|S|² = A - B cos`.
    fn fast_mean(&self, omega: f64, y: f64, z: f64) -> f64 {
        let lz = z.ln();
        let (mut u, mut v) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let mag = term.coef * (-term.k * lz).exp();
            let e = match self.kernel {
                KernelVariant::X => Complex64::new(mag, 0.0),
                KernelVariant::Y | KernelVariant::F1 => Complex64::from_polar(mag, -0.5 * PI * term.k),
            };
            u += e * Complex64::from_polar(1.0, (term.t - omega) * y);
            v += e;
        }
        let (nu, nv) = (u.norm(), v.norm());
        quad::cos_power_mean(nu * nu + nv * nv, 2.0 * nu * nv, 0.5 * self.alpha)
    }

    /// `∫_ℝ |S(x)|^α dx`.
    pub fn alpha_power(&self, cfg: &QuadratureConfig) -> Result<quad::QuadResult, QuadError> {
        if self.is_zero() {
            return Ok(quad::QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
        }
        let sh = self.shape();
        if let Some((omega, beat)) = self.two_scale_frequencies(&sh) {
            return self.alpha_power_two_scale(omega, beat, &sh, cfg);
        }
        self.alpha_power_direct(&sh, cfg)
    }

    fn alpha_power_direct(&self, sh: &Shape, cfg: &QuadratureConfig) -> Result<quad::QuadResult, QuadError> {
        let a = self.alpha;
        let g = |x: f64| self.eval(x).norm_sqr().powf(0.5 * a);
        let gs = |x: f64, xm: f64| self.eval_split(x, xm).norm_sqr().powf(0.5 * a);
        let ig = HalfLine {
            g: &g,
            decay: sh.decay,
            decay_max: sh.decay_max,
            singular: sh.singular,
            period: sh.period,
            frequency: sh.frequency,
            scale: sh.scale,
            split: Some(&gs),
        };
        quad::integrate_even(&ig, cfg)
    }

    fn alpha_power_two_scale(&self, omega: f64, beat: f64, sh: &Shape, cfg: &QuadratureConfig) -> Result<quad::QuadResult, QuadError> {
        let a = self.alpha;
        let g = |x: f64| self.eval(x).norm_sqr().powf(0.5 * a);
        let mean = |y: f64, z: f64| self.fast_mean(omega, y, z);
        let ig = quad::TwoScale {
            g: &g,
            mean: &mean,
            omega,
            beat,
            frequency: omega + beat,
            decay: sh.decay,
            decay_max: sh.decay_max,
            singular: sh.singular,
        };
        quad::two_scale(&ig, cfg).map(|r| quad::QuadResult { value: 2.0 * r.value, error: 2.0 * r.error, ..r })
    }

    /// Gradient of `∫|S|^α` with respect to the coefficients of `basis`
    /// entering as `S - Σ a_j basis_j`: returns `-α ∫ |S|^{α-2} Re(conj(S) B_j)`.
    /// Each entry carries its quadrature error estimate.
    fn alpha_power_gradient(&self, basis: &[Combination], cfg: &QuadratureConfig) -> Result<Vec<(f64, f64)>, QuadError> {
        let a = self.alpha;
        let sh = self.shape();
        basis
            .iter()
            .map(|b| {
                let gs = |x: f64, xm: f64| {
                    let s = self.eval_split(x, xm);
                    let n2 = s.norm_sqr();
                    if n2 == 0.0 {
                        return 0.0;
                    }
                    let bj = b.eval_split(x, xm);
                    -a * n2.powf(0.5 * a - 1.0) * (s.conj() * bj).re
                };
                let g = |x: f64| gs(x, x);
                let bsh = b.shape();
                let ig = HalfLine {
                    g: &g,
                    decay: sh.decay.min(bsh.decay),
                    decay_max: sh.decay_max.max(bsh.decay_max),
                    singular: sh.singular.max(bsh.singular),
                    period: sh.period,
                    frequency: sh.frequency.max(bsh.frequency),
                    scale: sh.scale,
                    split: Some(&gs),
                };
                match quad::half_line(&ig, cfg) {
                    Ok(r) => Ok((2.0 * r.value, 2.0 * r.error)),
                    Err(QuadError::NonConvergence { value, error, .. }) => Ok((2.0 * value, 2.0 * error)),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }
}

struct Shape {
    decay: f64,
    decay_max: f64,
    singular: f64,
    period: Option<f64>,
    frequency: f64,
    scale: Option<f64>,
}

/// `∫_ℝ |Σλ_k f(t_k,x)|^α dx` with its quadrature error.
pub fn alpha_power(spec: &ProcessSpec, point: &FddPoint, cfg: &QuadratureConfig) -> Result<quad::QuadResult, NormError> {
    let comb = Combination::from_point(spec, point)?;
    comb.alpha_power(cfg).map_err(quad_ctx(format!("alpha-power at times {:?}", point.times)))
}

/// Scale norm of `Σ λ_k X(t_k)`.
pub fn scale_norm(spec: &ProcessSpec, point: &FddPoint, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    Ok(alpha_power(spec, point, cfg)?.value.powf(1.0 / spec.a()))
}

/// `E exp(i Σ λ_k X(t_k)) = exp(-‖·‖_α^α)`.
pub fn exact_cf(spec: &ProcessSpec, point: &FddPoint, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    Ok((-alpha_power(spec, point, cfg)?.value).exp())
}

/// `‖X(t) - X(s)‖_α`.
pub fn increment_norm(spec: &ProcessSpec, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    if t == s {
        spec.check_time(t)?;
        return Ok(0.0);
    }
    let (lo, hi) = if s < t { (s, t) } else { (t, s) };
    scale_norm(spec, &FddPoint { times: vec![lo, hi], coeffs: vec![-1.0, 1.0] }, cfg)
}

/// Best C with `|E e^{iλ(X(t)-X(s))}| ≤ exp(-C|λ|^α |t-s|^{αĤ})` on the pairs.
pub fn condition_h_constant(spec: &ProcessSpec, pairs: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<f64, NormError> {
    if pairs.is_empty() {
        return Err(NormError::Invalid("empty pair list".into()));
    }
    let mut c = f64::INFINITY;
    for &(t, s) in pairs {
        if t == s {
            return Err(NormError::Invalid(format!("pair ({t},{s}) is not distinct")));
        }
        let n = increment_norm(spec, t, s, cfg)?;
        let r = (n / (t - s).abs().powf(spec.hurst.h_hat)).powf(spec.a());
        c = c.min(r);
    }
    Ok(c)
}

/// Sharp Hausdorff–Young constant for `f̂(u) = ∫ e^{iux} f(x) dx`.
pub fn hausdorff_young_constant(alpha: f64) -> f64 {
    let beta = alpha / (alpha - 1.0);
    (2.0 * PI).powf(1.0 / beta) * (alpha.powf(1.0 / alpha) / beta.powf(1.0 / beta)).sqrt()
}

/// `‖ĝ‖_{L^β}` for `g = Σλ_k f_Y(t_k,·)` using the closed-form transform.
pub fn fourier_beta_norm(spec: &ProcessSpec, point: &FddPoint, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    if spec.kernel != KernelVariant::Y {
        return Err(NormError::Invalid("the transform is available for the Y kernel only".into()));
    }
    for &t in &point.times {
        spec.check_time(t)?;
    }
    let beta = spec.alpha.beta();
    let terms: Vec<(f64, f64, f64)> = point
        .times
        .iter()
        .zip(&point.coeffs)
        .filter(|(t, c)| **t > 0.0 && **c != 0.0)
        .map(|(&t, &c)| {
            let k = spec.k_exp(t);
            (t, k - 1.0, c * 2.0 * PI / gamma(k))
        })
        .collect();
    if terms.is_empty() {
        return Ok(0.0);
    }
    let f = |anchor: f64, off: f64| {
        let mut v = 0.0;
        let du = -anchor - off; // -u
        for &(t, e, c) in &terms {
            let dt = (t - anchor) - off; // t - u
            let a = if dt > 0.0 { dt.powf(e) } else { 0.0 };
            let b = if du > 0.0 { du.powf(e) } else { 0.0 };
            v += c * (a - b);
        }
        v.abs().powf(beta)
    };
    let mut breaks: Vec<f64> = terms.iter().map(|t| t.0).collect();
    breaks.push(0.0);
    let emin = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let emax = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let sing = beta * emin.min(0.0);
    let left_decay = beta * (1.0 - emax) - 1.0;
    let r = quad::integrate_left_line(&f, &breaks, sing, left_decay, cfg).map_err(quad_ctx("Fourier beta-norm"))?;
    Ok(r.value.powf(1.0 / beta))
}

/// `‖ĝ‖_{L^β} / ‖g‖_{L^α}` for a Y-kernel combination.
pub fn hausdorff_young_ratio(spec: &ProcessSpec, point: &FddPoint, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    let num = fourier_beta_norm(spec, point, cfg)?;
    let den = scale_norm(spec, point, cfg)?;
    if den == 0.0 {
        return Err(NormError::Invalid("zero combination".into()));
    }
    Ok(num / den)
}

/// `‖f̂_Y(t_n)‖_{L^β(t_{n-1}, t_n)}`: the part of any span element's transform
/// that earlier kernels cannot touch.
pub fn hat_y_window_norm(spec: &ProcessSpec, t_prev: f64, t_n: f64, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    spec.check_time(t_n)?;
    let beta = spec.alpha.beta();
    let k = spec.k_exp(t_n);
    let c = 2.0 * PI / gamma(k);
    let e = k - 1.0;
    // integrand at distance d below t_n
    let f = |d: f64| (c * d.powf(e)).abs().powf(beta);
    let r = quad::integrate_endpoint_singular(&f, t_n - t_prev, beta * e, cfg).map_err(quad_ctx("window norm"))?;
    Ok(r.value.powf(1.0 / beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-6, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LndReport {
    pub times: Vec<f64>,
    pub distance: f64,
    pub argmin: Vec<f64>,
    pub increment_norm: f64,
    pub ratio: f64,
    pub grad_norm: f64,
    pub method: String,
}

/// Minimizer of `a ↦ ‖target - Σ a_j basis_j‖_α / scale`.
struct Projection<'a> {
    target: &'a Combination,
    basis: &'a [Combination],
    scale: f64,
    cfg: QuadratureConfig,
    period_times: Vec<f64>,
    grad_tol: f64,
}

impl Projection<'_> {
    fn residual(&self, a: &[f64]) -> Combination {
        let mut terms = self.target.terms.clone();
        for (aj, b) in a.iter().zip(self.basis) {
            terms.extend(b.terms.iter().map(|t| Term { coef: -aj * t.coef, ..*t }));
        }
        let mut c = Combination::new(self.target.alpha, self.target.kernel, terms);
        c.period_times = self.period_times.clone();
        c
    }

    fn value(&self, a: &[f64]) -> Result<f64, QuadError> {
        let r = self.residual(a);
        Ok(r.alpha_power(&self.cfg)?.value.powf(1.0 / r.alpha) / self.scale)
    }

    fn value_grad(&self, a: &[f64]) -> Result<(f64, Vec<f64>), QuadError> {
        let r = self.residual(a);
        let alpha = r.alpha;
        let v = r.alpha_power(&self.cfg)?.value;
        if v == 0.0 {
            return Ok((0.0, vec![0.0; a.len()]));
        }
        let gcfg = QuadratureConfig { abs_tol: self.cfg.abs_tol.max(1e-3 * self.cfg.rel_tol * v), ..self.cfg.clone() };
        let dv = r.alpha_power_gradient(self.basis, &gcfg)?;
        let norm = v.powf(1.0 / alpha);
        let factor = norm / (alpha * v) / self.scale;
        // a gradient entry near zero cannot meet a relative target; its absolute
        // error only has to stay well below the stationarity tolerance
        if let Some(&(value, error)) = dv.iter().find(|(_, e)| e * factor > 0.1 * self.grad_tol) {
            return Err(QuadError::NonConvergence { value, error, target: 0.1 * self.grad_tol / factor });
        }
        Ok((norm / self.scale, dv.iter().map(|d| d.0 * factor).collect()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bfgs(p: &Projection<'_>, x0: Vec<f64>, opt: &OptConfig) -> Result<(Vec<f64>, f64, Vec<f64>), QuadError> {
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = p.value_grad(&x)?;
    let mut hinv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..opt.max_iter {
        if dot(&g, &g).sqrt() <= opt.grad_tol {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i], &g)).collect();
        if dot(&d, &g) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            for (i, row) in hinv.iter_mut().enumerate() {
                for (j, h) in row.iter_mut().enumerate() {
                    *h = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        let slope = dot(&d, &g);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let fnew = p.value(&xn)?;
            if fnew <= f + 1e-4 * step * slope {
                accepted = Some(xn);
                break;
            }
            step *= 0.5;
        }
        let Some(xn) = accepted else { break };
        let (fn_, gn) = p.value_grad(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let improvement = f - fn_;
        x = xn;
        f = fn_;
        g = gn;
        if improvement.abs() <= 1e-15 * f.abs().max(1e-300) && dot(&g, &g).sqrt() > opt.grad_tol {
            break;
        }
    }
    Ok((x, f, g))
}

fn nelder_mead(p: &Projection<'_>, x0: &[f64], max_iter: usize) -> Result<(Vec<f64>, f64), QuadError> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), p.value(x0)?));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += 0.1;
        let fv = p.value(&v)?;
        simplex.push((v, fv));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[n].1 - simplex[0].1).abs();
        let size = simplex.iter().map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if size < 1e-9 || spread < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = p.value(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = p.value(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(if fr < simplex[n].1 { 0.5 } else { -0.5 });
            let fc = p.value(&xc)?;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = item.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    let fv = p.value(&v)?;
                    *item = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(simplex.swap_remove(0))
}

fn minimize(p: &Projection<'_>, x0: Vec<f64>, opt: &OptConfig) -> Result<(Vec<f64>, f64, f64, String), NormError> {
    let ctx = quad_ctx("LND objective");
    if x0.is_empty() {
        let f = p.value(&[]).map_err(ctx)?;
        return Ok((Vec::new(), f, 0.0, "none".into()));
    }
    let (x, f, g) = bfgs(p, x0.clone(), opt).map_err(quad_ctx("LND objective"))?;
    let gn = dot(&g, &g).sqrt();
    if gn <= opt.grad_tol {
        return Ok((x, f, gn, "bfgs".into()));
    }
    let (xs, _) = nelder_mead(p, &x, 20 * opt.max_iter).map_err(quad_ctx("LND objective"))?;
    let (fs, gs) = p.value_grad(&xs).map_err(quad_ctx("LND objective"))?;
    let gsn = dot(&gs, &gs).sqrt();
    if gsn <= opt.grad_tol {
        return Ok((xs, fs, gsn, "nelder-mead".into()));
    }
    let (ratio, grad_norm) = if fs < f { (fs, gsn) } else { (f, gn) };
    Err(NormError::Optimizer { ratio, grad_norm })
}

fn validate_times(spec: &ProcessSpec, times: &[f64]) -> Result<(), NormError> {
    if times.len() < 2 {
        return Err(NormError::Invalid("need at least two times".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(NormError::Invalid("times must be strictly increasing (no duplicates)".into()));
    }
    if times[0] <= 0.0 {
        return Err(NormError::Invalid("times must lie in [ε, T] with ε > 0".into()));
    }
    for &t in times {
        spec.check_time(t)?;
    }
    Ok(())
}

fn kernel_comb(spec: &ProcessSpec, t: f64) -> Combination {
    Combination::new(spec.a(), spec.kernel, vec![Term { coef: 1.0, t, k: spec.k_exp(t) }])
}

/// Distance from `X(t_n)` to the span of `X(t_1), …, X(t_{n-1})`.
pub fn lnd_distance(spec: &ProcessSpec, times: &[f64], cfg: &QuadratureConfig, opt: &OptConfig) -> Result<LndReport, NormError> {
    validate_times(spec, times)?;
    let n = times.len();
    let inc = increment_norm(spec, times[n - 1], times[n - 2], cfg)?;
    let target = kernel_comb(spec, times[n - 1]);
    let basis: Vec<Combination> = times[..n - 1].iter().map(|&t| kernel_comb(spec, t)).collect();
    let p = Projection { target: &target, basis: &basis, scale: inc, cfg: cfg.clone(), period_times: times.to_vec(), grad_tol: opt.grad_tol };
    let mut x0 = vec![0.0; n - 1];
    x0[n - 2] = 1.0;
    let (argmin, ratio, grad_norm, method) = minimize(&p, x0, opt)?;
    Ok(LndReport { times: times.to_vec(), distance: ratio * inc, argmin, increment_norm: inc, ratio, grad_norm, method })
}

/// Distance from the last increment `X(t_n)-X(t_{n-1})` to the span of the
/// earlier increments of the cluster.
pub fn lnd_increment_distance(spec: &ProcessSpec, times: &[f64], cfg: &QuadratureConfig, opt: &OptConfig) -> Result<LndReport, NormError> {
    validate_times(spec, times)?;
    let n = times.len();
    let incr = |i: usize| {
        Combination::new(
            spec.a(),
            spec.kernel,
            vec![
                Term { coef: 1.0, t: times[i + 1], k: spec.k_exp(times[i + 1]) },
                Term { coef: -1.0, t: times[i], k: spec.k_exp(times[i]) },
            ],
        )
    };
    let inc = increment_norm(spec, times[n - 1], times[n - 2], cfg)?;
    let target = incr(n - 2);
    let basis: Vec<Combination> = (0..n - 2).map(incr).collect();
    let period_times = if basis.is_empty() { Vec::new() } else { times.to_vec() };
    let p = Projection { target: &target, basis: &basis, scale: inc, cfg: cfg.clone(), period_times, grad_tol: opt.grad_tol };
    let (argmin, ratio, grad_norm, method) = minimize(&p, vec![0.0; n - 2], opt)?;
    Ok(LndReport { times: times.to_vec(), distance: ratio * inc, argmin, increment_norm: inc, ratio, grad_norm, method })
}

/// Objective `‖f(t_n) - Σ a_k f(t_k)‖_α` and its quadrature gradient.
pub fn lnd_objective(spec: &ProcessSpec, times: &[f64], a: &[f64], cfg: &QuadratureConfig) -> Result<(f64, Vec<f64>), NormError> {
    validate_times(spec, times)?;
    let n = times.len();
    if a.len() != n - 1 {
        return Err(NormError::Invalid("need one coefficient per earlier time".into()));
    }
    let target = kernel_comb(spec, times[n - 1]);
    let basis: Vec<Combination> = times[..n - 1].iter().map(|&t| kernel_comb(spec, t)).collect();
    let p = Projection { target: &target, basis: &basis, scale: 1.0, cfg: cfg.clone(), period_times: times.to_vec(), grad_tol: 1e-6 };
    p.value_grad(a).map_err(quad_ctx("LND objective"))
}

/// `‖Z^{h1}(t) - Z^{h2}(t)‖_α` for the X kernel.
pub fn hurst_difference_norm(alpha: f64, t: f64, h1: f64, h2: f64, cfg: &QuadratureConfig) -> Result<f64, NormError> {
    let comb = Combination::new(
        alpha,
        KernelVariant::X,
        vec![Term { coef: 1.0, t, k: h1 + 1.0 / alpha }, Term { coef: -1.0, t, k: h2 + 1.0 / alpha }],
    );
    let r = comb.alpha_power(cfg).map_err(quad_ctx("Hurst difference"))?;
    Ok(r.value.powf(1.0 / alpha))
}

/// Kernel value helper for tests and oracles.
pub fn kernel_at(spec: &ProcessSpec, t: f64, x: f64) -> Complex64 {
    if x > 0.0 {
        kernel_pos(spec.kernel, t, spec.k_exp(t), x)
    } else {
        kernel_pos(spec.kernel, t, spec.k_exp(t), -x).conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(h: &str, kernel: KernelVariant) -> ProcessSpec {
        ProcessSpec::parse(1.5, h, kernel, 1.0).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let s = spec("const:0.5", KernelVariant::X);
        let cfg = QuadratureConfig::default();
        assert_eq!(scale_norm(&s, &FddPoint::single(0.5, 0.0), &cfg).unwrap(), 0.0);
        assert_eq!(scale_norm(&s, &FddPoint::single(0.0, 1.0), &cfg).unwrap(), 0.0);
        assert_eq!(exact_cf(&s, &FddPoint::single(0.5, 0.0), &cfg).unwrap(), 1.0);
        assert_eq!(increment_norm(&s, 0.3, 0.3, &cfg).unwrap(), 0.0);
        let c = exact_cf(&s, &FddPoint::single(0.5, 1.0), &cfg).unwrap();
        assert!(c > 0.0 && c < 1.0);
    }

    #[test]
    fn hy_constant_matches_known_value() {
        // α = β = 2: Plancherel, ‖f̂‖_2 = √(2π) ‖f‖_2
        assert!((hausdorff_young_constant(2.0 - 1e-12) - (2.0 * PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn window_norm_closed_form() {
        let s = spec("const:0.7", KernelVariant::Y);
        let beta = 3.0;
        let k = 0.7 + 1.0 / 1.5;
        let delta = 2f64.powi(-6);
        let closed = 2.0 * PI / gamma(k) * (delta.powf(beta * 0.7) / (beta * 0.7)).powf(1.0 / beta);
        let w = hat_y_window_norm(&s, 0.5, 0.5 + delta, &QuadratureConfig::default()).unwrap();
        assert!((w / closed - 1.0).abs() < 1e-8, "{w} vs {closed}");
    }

    #[test]
    fn two_scale_agrees_with_periodic_sum() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-9);
        for (h, kernel) in [("const:0.5", KernelVariant::X), ("const:0.7", KernelVariant::Y), ("sine:0.5,0.2,6.283", KernelVariant::X)] {
            let sp = spec(h, kernel);
            for &(t2, th) in &[(0.53125, 0.3f64), (0.5 + 2f64.powi(-9), 2.36), (0.5 + 2f64.powi(-12), 2.3562)] {
                let c = Combination::new(
                    sp.a(),
                    kernel,
                    vec![Term { coef: th.cos(), t: 0.5, k: sp.k_exp(0.5) }, Term { coef: th.sin(), t: t2, k: sp.k_exp(t2) }],
                );
                let sh = c.shape();
                let exact = c.alpha_power_direct(&sh, &cfg).unwrap().value;
                let ts = c.alpha_power_two_scale(0.5, t2 - 0.5, &sh, &cfg).unwrap().value;
                assert!((ts - exact).abs() < 1e-6 * exact, "{h} {t2} {th}: {ts} vs {exact}");
            }
        }
    }
}
