//! Occupation densities of sampled paths and the second local-time moment.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::lepage::PathEnsemble;
use crate::model::ProcessSpec;
use crate::norms::{Combination, Term};
use crate::quad::gk::{adaptive, Piece};
use crate::quad::{QuadError, QuadratureConfig};

#[derive(Debug, Error)]
pub enum LocalTimeError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// A single path on its time grid.
#[derive(Debug, Clone, Copy)]
pub struct SamplePath<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
}

impl<'a> SamplePath<'a> {
    pub fn new(times: &'a [f64], values: &'a [f64]) -> Result<Self, LocalTimeError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(LocalTimeError::Invalid("path needs matching times and values, at least two points".into()));
        }
        Ok(Self { times, values })
    }

    pub fn from_ensemble(ens: &'a PathEnsemble, index: usize) -> Self {
        Self { times: &ens.grid, values: &ens.paths[index] }
    }

    fn index_of(&self, t: f64) -> Result<usize, LocalTimeError> {
        let tol = 1e-12 * self.times[self.times.len() - 1].abs().max(1.0);
        let i = self.times.partition_point(|&g| g < t - tol);
        if i < self.times.len() && (self.times[i] - t).abs() <= tol {
            Ok(i)
        } else {
            Err(LocalTimeError::Invalid(format!("t = {t} is not on the path grid")))
        }
    }

    /// Steps `[i, i+1]` inside the window `[a, b]`.
    fn steps(&self, a: f64, b: f64) -> Result<std::ops::Range<usize>, LocalTimeError> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        if ib < ia {
            return Err(LocalTimeError::Invalid("empty window".into()));
        }
        Ok(ia..ib)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub window: (f64, f64),
    /// Bin edges, `values.len() + 1` of them.
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Occupation time per bin.
    pub mass: Vec<f64>,
    pub bin_width: f64,
    pub path_dt: f64,
    /// Set when the path is constant on the window.
    pub degenerate: bool,
}

impl LocalTimeEstimate {
    pub fn centers(&self) -> Vec<f64> {
        self.x_grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().map(|v| v * self.bin_width).sum()
    }

    /// Bin holding `x`, by comparison with the stored edges.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let k = self.x_grid.partition_point(|&e| e <= x);
        (k >= 1 && k < self.x_grid.len()).then(|| k - 1)
    }

    /// Header `x,L`; one row per bin center.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LocalTimeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "L"])?;
        for (x, l) in self.centers().iter().zip(&self.values) {
            w.write_record([x.to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn uniform_edges(lo: f64, width: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| lo + width * k as f64).collect()
}

/// Histogram of the occupation measure of `[a, b]` on fixed edges.
pub fn occupation_on_edges(path: SamplePath<'_>, a: f64, b: f64, edges: &[f64]) -> Result<LocalTimeEstimate, LocalTimeError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LocalTimeError::Invalid("edges must be strictly increasing".into()));
    }
    let steps = path.steps(a, b)?;
    let n = edges.len() - 1;
    let bw = (edges[n] - edges[0]) / n as f64;
    let mut mass = vec![0.0; n];
    let mut dt_max: f64 = 0.0;
    for i in steps {
        let dt = path.times[i + 1] - path.times[i];
        dt_max = dt_max.max(dt);
        let x = path.values[i];
        let k = edges.partition_point(|&e| e <= x);
        if k == 0 || k > n {
            return Err(LocalTimeError::Invalid(format!("value {x} outside the bin range")));
        }
        mass[k - 1] += dt;
    }
    let values = mass.iter().map(|m| m / bw).collect();
    Ok(LocalTimeEstimate { window: (a, b), x_grid: edges.to_vec(), values, mass, bin_width: bw, path_dt: dt_max, degenerate: false })
}

/// Occupation density on `[0, t]` with `bin_count` bins spanning
/// `[min X - w, max X + w]`.
pub fn occupation_histogram(path: SamplePath<'_>, t: f64, bin_count: usize) -> Result<LocalTimeEstimate, LocalTimeError> {
    occupation_window(path, path.times[0], t, bin_count)
}

/// As [`occupation_histogram`] on the window `[a, b]`.
pub fn occupation_window(path: SamplePath<'_>, a: f64, b: f64, bin_count: usize) -> Result<LocalTimeEstimate, LocalTimeError> {
    if bin_count < 10 {
        return Err(LocalTimeError::Invalid(format!("binCount = {bin_count} < 10")));
    }
    let steps = path.steps(a, b)?;
    let vals = &path.values[steps.clone()];
    if vals.is_empty() {
        return Err(LocalTimeError::Invalid("window contains no time step".into()));
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        let edges = vec![lo - 0.5, lo + 0.5];
        let mut est = occupation_on_edges(path, a, b, &edges)?;
        est.degenerate = true;
        return Ok(est);
    }
    let bw = (hi - lo) / (bin_count - 2) as f64;
    let edges = uniform_edges(lo - bw, bw, bin_count);
    occupation_on_edges(path, a, b, &edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFn {
    Gaussian { center: f64, width: f64 },
    Indicator { a: f64, b: f64 },
}

impl TestFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFn::Gaussian { center, width } => (-0.5 * ((x - center) / width).powi(2)).exp(),
            TestFn::Indicator { a, b } => {
                if x >= a && x < b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationCheck {
    pub discrepancy: f64,
    /// True when the time integral was too small for a relative figure.
    pub absolute: bool,
}

/// Relative gap between `∫ f(X(s)) ds` and `∫ f(x) L(x) dx` on the estimate's window.
pub fn occupation_formula_check(path: SamplePath<'_>, est: &LocalTimeEstimate, f: TestFn) -> Result<OccupationCheck, LocalTimeError> {
    let steps = path.steps(est.window.0, est.window.1)?;
    let lhs: f64 = steps.map(|i| f.eval(path.values[i]) * (path.times[i + 1] - path.times[i])).sum();
    // indicators are evaluated on the bin itself so that aligned intervals are exact
    let rhs: f64 = match f {
        TestFn::Indicator { .. } => est.x_grid.windows(2).zip(&est.mass).map(|(w, m)| f.eval(w[0]) * m).sum(),
        TestFn::Gaussian { .. } => est.centers().iter().zip(&est.values).map(|(x, v)| f.eval(*x) * v * est.bin_width).sum(),
    };
    let diff = (lhs - rhs).abs();
    if lhs.abs() < 1e-12 {
        Ok(OccupationCheck { discrepancy: diff, absolute: true })
    } else {
        Ok(OccupationCheck { discrepancy: diff / lhs.abs(), absolute: false })
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    /// Gauss nodes per time direction.
    pub nodes: usize,
    pub max_norm_calls: usize,
    pub quad: QuadratureConfig,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self { nodes: 8, max_norm_calls: 100_000, quad: QuadratureConfig::default().with_rel_tol(1e-6) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub value: f64,
    /// Sum of the angular quadrature error estimates, propagated through the time rule.
    pub error: f64,
    pub norm_calls: usize,
    /// Number of α-norm evaluations that missed their tolerance (values kept).
    pub loose_norms: usize,
    /// Set when the call budget ran out; `value` is then partial.
    pub budget_exceeded: bool,
}

/// `∫_0^∞ r cos(c r) e^{-n r^α} dr`.
fn radial(n: f64, c: f64, alpha: f64) -> f64 {
    if c == 0.0 {
        return gamma(2.0 / alpha) / (alpha * n.powf(2.0 / alpha));
    }
    // e^{-n r^α} < e^{-40} beyond r_max
    let r_max = (40.0 / n).powf(1.0 / alpha);
    let f = |r: f64| r * (c * r).cos() * (-n * r.powf(alpha)).exp();
    let panels = ((c.abs() * r_max / PI).ceil() as usize).clamp(4, 10_000);
    let pieces = [Piece { f: &f, a: 0.0, b: r_max, panels }];
    let scale = gamma(2.0 / alpha) / (alpha * n.powf(2.0 / alpha));
    adaptive(&pieces, 0.0, &|_| 1e-10 * scale, 30, 1_000_000).total
}

/// `2 ∫_0^π ∫_0^∞ r cos(x r (cosθ + sinθ)) e^{-r^α N(θ)} dr dθ` for one time pair.
fn angular(
    spec: &ProcessSpec,
    s1: f64,
    s2: f64,
    x: f64,
    cfg: &MomentConfig,
    calls: &std::sync::atomic::AtomicUsize,
    loose: &std::sync::atomic::AtomicUsize,
) -> (f64, f64, bool) {
    use std::sync::atomic::Ordering::Relaxed;
    let a = spec.a();
    let (k1, k2) = (spec.k_exp(s1), spec.k_exp(s2));
    let exhausted = std::sync::atomic::AtomicBool::new(false);
    let g = |theta: f64| -> f64 {
        if calls.fetch_add(1, Relaxed) >= cfg.max_norm_calls {
            exhausted.store(true, Relaxed);
            return 0.0;
        }
        let (sn, cs) = theta.sin_cos();
        let comb = Combination::new(a, spec.kernel, vec![Term { coef: cs, t: s1, k: k1 }, Term { coef: sn, t: s2, k: k2 }]);
        let n = match comb.alpha_power(&cfg.quad) {
            Ok(r) => r.value,
            Err(QuadError::NonConvergence { value, .. }) => {
                loose.fetch_add(1, Relaxed);
                value
            }
            Err(_) => f64::NAN,
        };
        radial(n, x * (cs + sn), a)
    };
    let peak = 0.75 * PI;
    let pieces = [Piece { f: &g, a: 0.0, b: peak, panels: 2 }, Piece { f: &g, a: peak, b: PI, panels: 1 }];
    let tol = cfg.quad.rel_tol.max(1e-7);
    let out = adaptive(&pieces, 0.0, &|v: f64| tol * v.abs(), 30, cfg.max_norm_calls);
    (2.0 * out.total, 2.0 * out.error, exhausted.load(Relaxed))
}

/// `E L([t, t+h], x)²` from the two-point characteristic function.
pub fn local_time_second_moment(spec: &ProcessSpec, t: f64, h: f64, x: f64, cfg: &MomentConfig) -> Result<SecondMoment, LocalTimeError> {
    if !(h > 0.0) || !x.is_finite() {
        return Err(LocalTimeError::Invalid("need h > 0 and finite x".into()));
    }
    spec.check_time(t)?;
    spec.check_time(t + h)?;
    if t <= 0.0 {
        return Err(LocalTimeError::Invalid("window must start after 0 (X(0) = 0)".into()));
    }
    let (_, h_check) = spec.hurst.range_on(t, t + h);
    // w = (h-a) v^m tames the |s2-s1|^{-H} diagonal singularity
    let m = (1.0 / (1.0 - h_check)).ceil();
    let nodes = gauss_legendre(cfg.nodes);
    let calls = std::sync::atomic::AtomicUsize::new(0);
    let loose = std::sync::atomic::AtomicUsize::new(0);
    let mut jobs = Vec::new();
    for &(z, wz) in &nodes {
        // a = h (1 - z²)
        let a = h * (1.0 - z * z);
        let da = 2.0 * h * z * wz;
        for &(v, wv) in &nodes {
            let span = h - a;
            let w = span * v.powf(m);
            let dw = span * m * v.powf(m - 1.0) * wv;
            jobs.push((t + a, t + a + w, da * dw));
        }
    }
    let results: Vec<(f64, f64, bool)> = jobs
        .par_iter()
        .map(|&(s1, s2, weight)| {
            let (j, e, ex) = angular(spec, s1, s2, x, cfg, &calls, &loose);
            (weight * j, weight * e, ex)
        })
        .collect();
    let norm = 2.0 / (2.0 * PI).powi(2);
    let value = norm * results.iter().map(|r| r.0).sum::<f64>();
    let error = norm * results.iter().map(|r| r.1).sum::<f64>();
    let exhausted = results.iter().any(|r| r.2);
    Ok(SecondMoment {
        value,
        error,
        norm_calls: calls.into_inner().min(cfg.max_norm_calls),
        loose_norms: loose.into_inner(),
        budget_exceeded: exhausted,
    })
}

/// Median over paths of the log-log slope of `mean_x |L(x+δ) - L(x)|` against δ.
pub fn localtime_holder_in_x(ensemble: &PathEnsemble, t: f64, bin_count: usize) -> Result<f64, LocalTimeError> {
    if bin_count < 32 {
        return Err(LocalTimeError::Invalid(format!("binCount = {bin_count} < 32")));
    }
    let mut slopes: Vec<f64> = (0..ensemble.paths.len())
        .into_par_iter()
        .map(|i| {
            let est = occupation_histogram(SamplePath::from_ensemble(ensemble, i), t, bin_count)?;
            Ok(holder_slope_of(&est.values, est.bin_width))
        })
        .collect::<Result<Vec<_>, LocalTimeError>>()?
        .into_iter()
        .flatten()
        .collect();
    if slopes.is_empty() {
        return Err(LocalTimeError::Invalid("no path produced a slope".into()));
    }
    slopes.sort_by(|a, b| a.total_cmp(b));
    Ok(median_sorted(&slopes))
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn holder_slope_of(values: &[f64], bw: f64) -> Option<f64> {
    let mut pts = Vec::new();
    let mut lag = 1;
    while lag <= values.len() / 8 {
        let d: Vec<f64> = values.windows(lag + 1).map(|w| (w[lag] - w[0]).abs()).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        if mean > 0.0 {
            pts.push(((lag as f64 * bw).ln(), mean.ln()));
        }
        lag *= 2;
    }
    crate::analysis::ols_slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let n = gauss_legendre(8);
        let s: f64 = n.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-14);
        assert!((n.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_closed_form_and_oscillating() {
        let a = 1.5;
        let exact = gamma(2.0 / a) / a;
        assert!((radial(1.0, 0.0, a) - exact).abs() < 1e-14);
        // α = 2 limit check is outside the domain; compare c → 0 continuity instead
        assert!((radial(1.0, 1e-6, a) - exact).abs() < 1e-8);
    }

    #[test]
    fn degenerate_path_uses_single_bin() {
        let t: Vec<f64> = (0..=8).map(|j| j as f64 / 8.0).collect();
        let v = vec![0.0; 9];
        let est = occupation_histogram(SamplePath::new(&t, &v).unwrap(), 1.0, 16).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.mass, vec![1.0]);
    }
}
