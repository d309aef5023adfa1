//! LePage series simulation with exact normalization and keyed RNG streams.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::model::{KernelVariant, ProcessSpec, StabilityIndex};
use crate::norms::FddPoint;
use crate::quad::{self, hurwitz_zeta, QuadError, QuadratureConfig};

#[derive(Debug, Error)]
pub enum LePageError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuxDensity {
    /// Standard Cauchy, `φ(x) = 1/(π(1+x²))`.
    Cauchy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LePageConfig {
    pub terms: usize,
    pub aux_density: AuxDensity,
    pub seed: u64,
    pub tail_compensation: bool,
}

impl LePageConfig {
    pub fn new(terms: usize, seed: u64) -> Result<Self, LePageError> {
        if terms < 100 {
            return Err(LePageError::Invalid(format!("terms = {terms} < 100")));
        }
        Ok(Self { terms, aux_density: AuxDensity::Cauchy, seed, tail_compensation: true })
    }

    /// Number of pseudo-terms standing in for the truncated tail.
    pub fn compensation_terms(&self) -> usize {
        (self.terms / 10).max(100)
    }
}

impl Default for LePageConfig {
    fn default() -> Self {
        Self { terms: 5000, aux_density: AuxDensity::Cauchy, seed: 0, tail_compensation: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub grid: Vec<f64>,
    /// `paths[i][j]` is path `i` at `grid[j]`.
    pub paths: Vec<Vec<f64>>,
    pub spec: ProcessSpec,
    pub config: LePageConfig,
    /// RNG stream id of each path; the generator is keyed by `(seed, stream)`.
    pub per_path_seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LePageConstants {
    /// `(∫_0^∞ x^{-α} sin x dx)^{1/α}`.
    pub c_alpha: f64,
    /// `(E|N(0,1)|^α)^{-1/α}`.
    pub gauss_sigma: f64,
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                prev[i + 1] + if d == 0.0 { f64::INFINITY } else { 1.0 / d }
            })
            .collect();
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            if let Some(v) = cur.last().filter(|v| v.is_finite()) {
                best = *v;
            } else {
                break;
            }
        }
    }
    best
}

/// `∫_0^∞ x^{-α} sin x dx` over half-periods with epsilon acceleration.
pub fn sine_moment(alpha: f64) -> Result<f64, QuadError> {
    let cfg = QuadratureConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..QuadratureConfig::default() };
    let first = quad::integrate_endpoint_singular(&|d: f64| d.powf(1.0 - alpha) * if d < 1e-8 { 1.0 } else { d.sin() / d }, PI, 1.0 - alpha, &cfg)?.value;
    let mut partial = vec![first];
    let mut s = first;
    for k in 1..40 {
        let a = k as f64 * PI;
        let f = |x: f64| x.powf(-alpha) * x.sin();
        let pieces = [quad::gk::Piece { f: &f, a, b: a + PI, panels: 2 }];
        let out = quad::gk::adaptive(&pieces, 0.0, &|v: f64| 1e-15 * v.abs().max(1e-300), 30, 1_000_000);
        s += out.total;
        partial.push(s);
    }
    Ok(wynn_epsilon(&partial))
}

/// `E|N(0,1)|^α` by quadrature against the Gaussian weight.
pub fn gaussian_abs_moment(alpha: f64) -> Result<f64, QuadError> {
    let g = |x: f64| x.powf(alpha) * (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let cfg = QuadratureConfig { rel_tol: 1e-13, abs_tol: 1e-15, split_points: vec![1.0, 4.0], ..QuadratureConfig::default() };
    Ok(quad::integrate_even_singular(&g, 50.0, -alpha, &cfg)?.value)
}

pub fn derive_constants(alpha: StabilityIndex) -> Result<LePageConstants, QuadError> {
    let a = alpha.alpha();
    Ok(LePageConstants { c_alpha: sine_moment(a)?.powf(1.0 / a), gauss_sigma: gaussian_abs_moment(a)?.powf(-1.0 / a) })
}

/// `Σ_{k>N} k^{-2/α} / Σ_{k≥1} k^{-2/α}`.
pub fn truncation_diagnostic(alpha: f64, terms: usize) -> f64 {
    let s = 2.0 / alpha;
    hurwitz_zeta(s, terms as f64 + 1.0) / hurwitz_zeta(s, 1.0)
}

/// Allowance for the characteristic-function bias of a truncated series.
///
/// Losing a fraction `ρ` of the exponent moves `e^{-V}` by at most
/// `ρ V e^{-V(1-ρ)} ≲ ρ/e`.
pub fn bias_budget(alpha: f64, terms: usize) -> f64 {
    truncation_diagnostic(alpha, terms) / std::f64::consts::E
}

fn is_uniform(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let uniform = grid.iter().enumerate().all(|(j, &t)| (t - (grid[0] + h * j as f64)).abs() <= 1e-12 * grid[grid.len() - 1].abs().max(1.0));
    uniform.then_some(h)
}

/// Per-grid-point kernel data.
struct GridData {
    times: Vec<f64>,
    step: Option<f64>,
    k: Vec<f64>,
    /// `e^{iπK/2}` for the Y/F1 variants.
    phase: Vec<Complex64>,
    k_const: Option<f64>,
}

impl GridData {
    fn new(spec: &ProcessSpec, grid: &[f64]) -> Self {
        let k: Vec<f64> = grid.iter().map(|&t| spec.k_exp(t)).collect();
        let phase = k.iter().map(|&kk| Complex64::from_polar(1.0, 0.5 * PI * kk)).collect();
        let k_const = spec.hurst.is_constant().then(|| spec.k_exp(0.0));
        Self { times: grid.to_vec(), step: is_uniform(grid), k, phase, k_const }
    }
}

/// Adds `w Re(f(t_j, ξ) g)` to `acc` for every grid point.
fn accumulate(acc: &mut [f64], data: &GridData, kernel: KernelVariant, xi: f64, c: Complex64) {
    let ax = xi.abs();
    let lx = ax.ln();
    // f(t,-x) = conj f(t,x): fold the sign into conjugation of the weight
    let c = if xi < 0.0 { c.conj() } else { c };
    let const_mag = data.k_const.map(|k| (-k * lx).exp());
    let n = data.times.len();
    let mut j = 0;
    while j < n {
        let block_end = (j + 256).min(n);
        let mut z = Complex64::from_polar(1.0, data.times[j] * ax);
        let rot = data.step.map(|h| Complex64::from_polar(1.0, h * ax));
        for jj in j..block_end {
            if jj > j {
                z = match rot {
                    Some(r) => z * r,
                    None => Complex64::from_polar(1.0, data.times[jj] * ax),
                };
            }
            let mag = match const_mag {
                Some(m) => m,
                None => (-data.k[jj] * lx).exp(),
            };
            let e = if data.times[jj] == 0.0 { Complex64::new(0.0, 0.0) } else { z - 1.0 };
            let f = match kernel {
                KernelVariant::X => e,
                KernelVariant::Y => -e.conj() * data.phase[jj],
                KernelVariant::F1 => e * data.phase[jj].conj(),
            };
            acc[jj] += mag * (f * c).re;
        }
        j = block_end;
    }
}

/// Random ingredients of one series term: arrival time `Γ_k`, Cauchy
/// frequency `ξ_k` and complex Gaussian `g_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub gamma: f64,
    pub xi: f64,
    pub g: Complex64,
}

/// Series terms of one path, drawn from stream `stream` of `seed`.
pub struct SeriesTerms {
    rng: ChaCha8Rng,
    cauchy: Cauchy<f64>,
    gamma: f64,
}

impl SeriesTerms {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, cauchy: Cauchy::new(0.0, 1.0).expect("valid Cauchy"), gamma: 0.0 }
    }

    /// Frequency and Gaussian of a pseudo-term; the arrival clock does not move.
    pub fn pseudo_term(&mut self) -> (f64, Complex64) {
        let xi: f64 = self.rng.sample(self.cauchy);
        let n1: f64 = self.rng.sample(StandardNormal);
        let n2: f64 = self.rng.sample(StandardNormal);
        (xi, Complex64::new(n1, n2))
    }
}

impl Iterator for SeriesTerms {
    type Item = SeriesTerm;

    fn next(&mut self) -> Option<SeriesTerm> {
        let e: f64 = self.rng.sample(Exp1);
        self.gamma += e;
        let (xi, g) = self.pseudo_term();
        Some(SeriesTerm { gamma: self.gamma, xi, g })
    }
}

fn sample_one(spec: &ProcessSpec, data: &GridData, cfg: &LePageConfig, consts: &LePageConstants, stream: u64) -> Vec<f64> {
    let a = spec.a();
    let mut terms = SeriesTerms::new(cfg.seed, stream);
    let mut acc = vec![0.0; data.times.len()];
    let mut gamma_k = 0.0;
    let sigma = consts.gauss_sigma;
    let inv_phi_pow = |xi: f64| (PI * (1.0 + xi * xi)).powf(1.0 / a);
    for term in terms.by_ref().take(cfg.terms) {
        gamma_k = term.gamma;
        let w = term.gamma.powf(-1.0 / a) * inv_phi_pow(term.xi);
        accumulate(&mut acc, data, spec.kernel, term.xi, term.g * (sigma * w));
    }
    if cfg.tail_compensation {
        let m = cfg.compensation_terms();
        let tail = hurwitz_zeta(2.0 / a, gamma_k + 1.0);
        let w_tail = (tail / m as f64).sqrt();
        for _ in 0..m {
            let (xi, g) = terms.pseudo_term();
            let w = w_tail * inv_phi_pow(xi);
            accumulate(&mut acc, data, spec.kernel, xi, g * (sigma * w));
        }
    }
    let scale = 1.0 / consts.c_alpha;
    for (v, t) in acc.iter_mut().zip(&data.times) {
        *v = if *t == 0.0 { 0.0 } else { *v * scale };
    }
    acc
}

pub fn sample_paths(spec: &ProcessSpec, grid: &[f64], path_count: usize, config: &LePageConfig) -> Result<PathEnsemble, LePageError> {
    if grid.is_empty() || path_count == 0 {
        return Err(LePageError::Invalid("empty grid or zero paths".into()));
    }
    if config.terms < 100 {
        return Err(LePageError::Invalid(format!("terms = {} < 100", config.terms)));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LePageError::Invalid("grid must be strictly increasing".into()));
    }
    for &t in grid {
        spec.check_time(t)?;
    }
    let consts = derive_constants(spec.alpha)?;
    let data = GridData::new(spec, grid);
    let paths: Vec<Vec<f64>> = (0..path_count as u64)
        .into_par_iter()
        .map(|i| sample_one(spec, &data, config, &consts, i))
        .collect();
    Ok(PathEnsemble {
        grid: grid.to_vec(),
        paths,
        spec: spec.clone(),
        config: config.clone(),
        per_path_seeds: (0..path_count as u64).collect(),
    })
}

fn grid_index(grid: &[f64], t: f64) -> Option<usize> {
    let tol = 1e-12 * grid.last().map_or(1.0, |g| g.abs().max(1.0));
    let i = grid.partition_point(|&g| g < t - tol);
    (i < grid.len() && (grid[i] - t).abs() <= tol).then_some(i)
}

impl PathEnsemble {
    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        grid_index(&self.grid, t)
    }

    /// Header `t,path_0,...`; one row per grid time.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LePageError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.paths.len()).map(|i| format!("path_{i}")));
        w.write_record(&header)?;
        for (j, t) in self.grid.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.paths.iter().map(|p| p[j].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": {
                "alpha": self.spec.a(),
                "hurst": self.spec.hurst.spec_text(),
                "kernel": self.spec.kernel.name(),
                "horizon": self.spec.horizon,
            },
            "config": self.config,
            "path_count": self.paths.len(),
            "grid_points": self.grid.len(),
            "per_path_seeds": self.per_path_seeds,
            "truncation_diagnostic": truncation_diagnostic(self.spec.a(), self.config.terms),
        })
    }
}

/// Mean of `exp(i Σ λ_k X(t_k))` over the ensemble, with its standard error.
pub fn empirical_cf(ensemble: &PathEnsemble, point: &FddPoint) -> Result<(Complex64, f64), LePageError> {
    let idx: Vec<usize> = point
        .times
        .iter()
        .map(|&t| ensemble.index_of(t).ok_or_else(|| LePageError::Invalid(format!("time {t} is not on the grid"))))
        .collect::<Result<_, _>>()?;
    let m = ensemble.paths.len() as f64;
    let samples: Vec<Complex64> = ensemble
        .paths
        .iter()
        .map(|p| {
            let s: f64 = idx.iter().zip(&point.coeffs).map(|(&j, &c)| c * p[j]).sum();
            Complex64::from_polar(1.0, s)
        })
        .collect();
    let mean = samples.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b) / m;
    if samples.len() < 2 {
        return Ok((mean, 0.0));
    }
    let (mut vr, mut vi) = (0.0, 0.0);
    for s in &samples {
        vr += (s.re - mean.re).powi(2);
        vi += (s.im - mean.im).powi(2);
    }
    let sd = (vr.max(vi) / (m - 1.0)).sqrt();
    Ok((mean, sd / m.sqrt()))
}

/// `E|N(0,1)|^α` in closed form.
pub fn gaussian_abs_moment_closed(alpha: f64) -> f64 {
    2f64.powf(alpha / 2.0) * gamma((alpha + 1.0) / 2.0) / PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&partial) - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn sine_moment_matches_gamma_identity() {
        for a in [1.1, 1.5, 1.9] {
            let q = sine_moment(a).unwrap();
            let g = gamma(1.0 - a) * (PI * a / 2.0).cos();
            assert!((q - g).abs() < 1e-9, "{a}: {q} vs {g}");
        }
    }

    #[test]
    fn diagnostic_is_monotone() {
        assert!(truncation_diagnostic(1.5, 5000) < truncation_diagnostic(1.5, 1000));
        assert!(truncation_diagnostic(1.9, 5000) > truncation_diagnostic(1.5, 5000));
    }

    #[test]
    fn grid_lookup_tolerates_rounding() {
        let g: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        assert_eq!(grid_index(&g, 0.3), Some(3));
        assert_eq!(grid_index(&g, 0.35), None);
    }
}
