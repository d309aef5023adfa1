//! Command runners and the `verify-all` acceptance suite.

use std::f64::consts::PI;
use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rhmsp::analysis::{self, CheckReport, Direction, SweepGrid, Table};
use rhmsp::lepage::{self, LePageConfig, PathEnsemble};
use rhmsp::localtime::{self, MomentConfig, SamplePath, TestFn};
use rhmsp::model::{KernelVariant, ProcessSpec, StabilityIndex};
use rhmsp::norms::{self, FddPoint, OptConfig};
use rhmsp::quad::QuadratureConfig;
use serde_json::json;
use statrs::function::gamma::gamma;

use crate::config::RunConfig;
use crate::output::Staging;

pub type Outcome = Result<Vec<CheckReport>, String>;

fn s<E: Display>(e: E) -> String {
    e.to_string()
}

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub quad: QuadratureConfig,
    pub seed: u64,
    pub quick: bool,
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self, String> {
        Ok(Self { cfg, quad: cfg.quad().map_err(s)?, seed: cfg.u64("seed").map_err(s)?, quick: cfg.flag("quick") })
    }

    fn spec(&self) -> Result<ProcessSpec, String> {
        self.cfg.spec().map_err(s)
    }

    fn spec_with(&self, hurst: &str) -> Result<ProcessSpec, String> {
        self.cfg.spec_with(hurst).map_err(s)
    }

    fn sine(&self) -> Result<ProcessSpec, String> {
        self.spec_with(self.cfg.str("sine_hurst").map_err(s)?)
    }

    fn f64(&self, key: &str) -> Result<f64, String> {
        self.cfg.f64(key).map_err(s)
    }

    fn usize(&self, key: &str) -> Result<usize, String> {
        self.cfg.usize(key).map_err(s)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, String> {
        self.cfg.list(key).map_err(s)
    }

    fn lepage(&self, seed: u64) -> Result<LePageConfig, String> {
        LePageConfig::new(self.usize("terms")?, seed).map_err(s)
    }

    /// Independent seeds for the sub-experiments of one run.
    fn sub_seed(&self, k: u64) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(k)
    }

    fn pick(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

fn dyadics(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn spec_json(spec: &ProcessSpec) -> serde_json::Value {
    json!({ "alpha": spec.a(), "hurst": spec.hurst.spec_text(), "kernel": spec.kernel.name(), "horizon": spec.horizon })
}

fn rename(mut r: CheckReport, name: &str) -> CheckReport {
    r.check = name.to_string();
    r
}

// ---------------------------------------------------------------- criteria

/// Series constants against the Γ identity, the closed Gaussian moment and
/// Monte Carlo.
pub fn constants(ctx: &Ctx) -> Outcome {
    let a = ctx.f64("alpha")?;
    let k = lepage::derive_constants(StabilityIndex::new(a).map_err(s)?).map_err(s)?;
    let c_oracle = (gamma(1.0 - a) * (PI * a / 2.0).cos()).powf(1.0 / a);
    let moment = 2f64.powf(a / 2.0) * gamma((a + 1.0) / 2.0) / PI.sqrt();
    let sigma_closed = moment.powf(-1.0 / a);
    let n = 10_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.sub_seed(1));
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += z.abs().powf(a);
    }
    let sigma_mc = (acc / n as f64).powf(-1.0 / a);
    Ok(vec![
        CheckReport::new("c_alpha", (k.c_alpha - c_oracle).abs(), 1e-8, Direction::AtMost)
            .param("alpha", a)
            .param("quadrature", k.c_alpha)
            .param("gamma_identity", c_oracle),
        CheckReport::new("gauss_sigma_closed_form", (k.gauss_sigma - sigma_closed).abs(), 1e-10, Direction::AtMost)
            .param("alpha", a)
            .param("quadrature", k.gauss_sigma)
            .param("closed_form", sigma_closed),
        CheckReport::new("gauss_sigma_monte_carlo", (k.gauss_sigma - sigma_mc).abs(), 1e-3, Direction::AtMost)
            .param("alpha", a)
            .param("quadrature", k.gauss_sigma)
            .param("monte_carlo", sigma_mc)
            .param("samples", n)
            .param("seed", ctx.sub_seed(1)),
    ])
}

/// `‖X(t)‖_α / t^H` is flat in `t` for constant `H`.
pub fn isometry(ctx: &Ctx) -> Outcome {
    let kernel = KernelVariant::parse(ctx.cfg.str("kernel").map_err(s)?).map_err(s)?;
    let times = [0.25, 1.0, 4.0];
    let mut table = Table::new("scale_ratios", &["hurst", "alpha", "t", "scale_norm", "ratio"]);
    let mut metric: f64 = 0.0;
    for h in [0.3, 0.5, 0.7] {
        for a in [1.2, 1.5, 1.8] {
            let spec = ProcessSpec::parse(a, &format!("const:{h}"), kernel, 4.0).map_err(s)?;
            let mut ratios = Vec::new();
            for &t in &times {
                let n = norms::scale_norm(&spec, &FddPoint::single(t, 1.0), &ctx.quad).map_err(s)?;
                let r = n / t.powf(h);
                table.rows.push(vec![h, a, t, n, r]);
                ratios.push(r);
            }
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0f64), |(l, u), &r| (l.min(r), u.max(r)));
            metric = metric.max(hi / lo - 1.0);
        }
    }
    Ok(vec![CheckReport::new("self_similarity", metric, 10.0 * ctx.quad.rel_tol, Direction::AtMost)
        .param("kernel", kernel.name())
        .param("times", times.to_vec())
        .param("rel_tol", ctx.quad.rel_tol)
        .table(table)])
}

/// Random `FddPoint`s on the `j/8` lattice with `‖·‖_α^α` spread over `[0.2, 1.6]`.
pub fn random_points(spec: &ProcessSpec, count: usize, seed: u64, cfg: &QuadratureConfig) -> Result<Vec<FddPoint>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let a = spec.a();
    while out.len() < count {
        let m = rng.random_range(1..=3usize);
        let mut js: Vec<usize> = Vec::new();
        while js.len() < m {
            let j = rng.random_range(1..=8usize);
            if !js.contains(&j) {
                js.push(j);
            }
        }
        js.sort_unstable();
        let times: Vec<f64> = js.iter().map(|&j| spec.horizon * j as f64 / 8.0).collect();
        let coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let target = rng.random_range(0.2..=1.6);
        let p = FddPoint::new(times, coeffs).map_err(s)?;
        let v = norms::alpha_power(spec, &p, cfg).map_err(s)?.value;
        if v > 1e-12 {
            out.push(p.scaled((target / v).powf(1.0 / a)));
        }
    }
    Ok(out)
}

/// Empirical against exact characteristic function at random points.
pub fn lepage_cf(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let paths = ctx.pick(2000, 200);
    let lp = ctx.lepage(ctx.sub_seed(3))?;
    let grid: Vec<f64> = (0..=8).map(|j| spec.horizon * j as f64 / 8.0).collect();
    let ens = lepage::sample_paths(&spec, &grid, paths, &lp).map_err(s)?;
    let points = random_points(&spec, 20, ctx.sub_seed(4), &ctx.quad)?;
    let bias = lepage::bias_budget(spec.a(), lp.terms);
    let mut table = Table::new("cf_points", &["point", "alpha_power", "exact", "empirical_re", "empirical_im", "stderr", "normalized_gap"]);
    let mut metric: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        let v = norms::alpha_power(&spec, p, &ctx.quad).map_err(s)?.value;
        let exact = (-v).exp();
        let (emp, se) = lepage::empirical_cf(&ens, p).map_err(s)?;
        let gap = (emp - exact).norm() / (3.0 * se + bias);
        metric = metric.max(gap);
        table.rows.push(vec![i as f64, v, exact, emp.re, emp.im, se, gap]);
    }
    let pts: Vec<_> = points.iter().map(|p| json!({ "times": p.times, "coeffs": p.coeffs })).collect();
    Ok(vec![CheckReport::new("lepage_cf", metric, 1.0, Direction::AtMost)
        .param("spec", spec_json(&spec))
        .param("paths", paths)
        .param("terms", lp.terms)
        .param("seed", lp.seed)
        .param("bias_budget", bias)
        .param("points", pts)
        .param("metric_definition", "max |emp - exact| / (3 stderr + bias_budget)")
        .table(table)])
}

pub fn lemmas(ctx: &Ctx) -> Outcome {
    let spec = ctx.sine()?;
    let mut grid = SweepGrid::default_for(&spec);
    if ctx.quick {
        grid.h1.truncate(2);
        grid.h2.truncate(2);
        grid.const_gaps.truncate(3);
        grid.calibration_pairs = grid.calibration_pairs.into_iter().step_by(16).collect();
        grid.test_pairs = grid.test_pairs.into_iter().step_by(10).collect();
    }
    analysis::lemma_sweeps(&spec, &grid, &ctx.quad).map_err(s)
}

/// Exact identity for constant `H`, decreasing error for the sine Hurst function.
pub fn localizability(ctx: &Ctx) -> Outcome {
    let t = 0.5;
    let deltas = [1e-1, 1e-2, 1e-3];
    let u = [0.25, 0.5, 1.0];
    let lambda = [-2.0, -1.0, 1.0, 2.0];
    let mut out = Vec::new();
    let cst = ctx.spec()?;
    for (k, &d) in deltas.iter().enumerate() {
        let r = analysis::localizability_error(&cst, t, d, &u, &lambda, 4.0 * ctx.quad.rel_tol, &ctx.quad).map_err(s)?;
        out.push(rename(r, &format!("localizability_const_{k}")));
    }
    let sine = ctx.sine()?;
    let mut table = Table::new("sine_schedule", &["delta", "metric"]);
    let mut last = None;
    for &d in &deltas {
        let r = analysis::localizability_error(&sine, t, d, &u, &lambda, 0.05, &ctx.quad).map_err(s)?;
        table.rows.push(vec![d, r.metric]);
        last = Some(r);
    }
    let ratio = table.rows.windows(2).map(|w| w[1][1] / w[0][1]).fold(0.0, f64::max);
    let mut mono = CheckReport::new("localizability_sine_decreasing", ratio, 1.0, Direction::AtMost)
        .param("spec", spec_json(&sine))
        .param("t", t)
        .param("metric_definition", "max over the schedule of metric(next delta) / metric(delta); strict decrease needs < 1")
        .table(table);
    mono.pass = ratio < 1.0;
    out.push(mono);
    out.push(rename(last.expect("nonempty schedule"), "localizability_sine_final"));
    Ok(out)
}

/// Grid search on `[-3, 3]` with spacing 0.1, then 0.01, 0.001 and 1e-4,
/// each level spanning one step of the previous level around its best point.
/// For convex `f` the minimizer stays within one step of the grid argmin, so
/// the refinement never loses it. The last level is finished with the
/// parabola through the best point and its two neighbours.
fn convex_grid_min(f: &(dyn Fn(f64) -> Result<f64, String> + Sync)) -> Result<(f64, f64), String> {
    let mut pts: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.1).collect();
    let mut step = 0.1;
    let mut best = (f64::INFINITY, 0.0);
    let mut last = Vec::new();
    for level in 0..4 {
        let vals: Vec<f64> = pts.par_iter().map(|&x| f(x)).collect::<Result<_, _>>()?;
        for (&x, &v) in pts.iter().zip(&vals) {
            if v < best.0 {
                best = (v, x);
            }
        }
        if level == 3 {
            last = pts.iter().cloned().zip(vals).collect();
            break;
        }
        step /= 10.0;
        pts = (-10..=10).map(|i| best.1 + i as f64 * step).filter(|x| x.abs() <= 3.0 + 1e-12).collect();
    }
    let i = last.iter().position(|p| p.1 == best.0).expect("best point is on the last level");
    if i == 0 || i + 1 == last.len() {
        return Ok(best);
    }
    let (vm, v0, vp) = (last[i - 1].1, last[i].1, last[i + 1].1);
    let curv = vp + vm - 2.0 * v0;
    if !(curv > 0.0) {
        return Ok(best);
    }
    let shift = -0.5 * step * (vp - vm) / curv;
    Ok((v0 - (vp - vm).powi(2) / (8.0 * curv), best.1 + shift))
}

/// Grid oracle for the LND minimizer: the objective is a norm of an affine
/// map, hence convex, and so is its profile `a1 ↦ min_{a2}`.
pub fn lnd_grid_oracle(spec: &ProcessSpec, times: &[f64; 3], cfg: &QuadratureConfig) -> Result<(f64, [f64; 2]), String> {
    let obj = |a1: f64, a2: f64| -> Result<f64, String> {
        let p = FddPoint::new(times.to_vec(), vec![-a1, -a2, 1.0]).map_err(s)?;
        norms::scale_norm(spec, &p, cfg).map_err(s)
    };
    let profile = |a1: f64| convex_grid_min(&|a2| obj(a1, a2)).map(|r| r.0);
    let (v, a1) = convex_grid_min(&profile)?;
    let (_, a2) = convex_grid_min(&|a2| obj(a1, a2))?;
    Ok((v, [a1, a2]))
}

pub fn lnd(ctx: &Ctx) -> Outcome {
    let opt = OptConfig::default();
    let center = 0.5;
    let spacings = if ctx.quick { dyadics(5, 6) } else { dyadics(5, 9) };
    let mut out = Vec::new();
    let c7 = ctx.spec_with("const:0.7")?;
    for (name, spec) in [("const", c7.clone()), ("sine", ctx.sine()?)] {
        let r = analysis::lnd_study(&spec, center, &spacings, 2, 0.0, &ctx.quad, &opt).map_err(s)?;
        let dev = r.tables[0].rows.iter().map(|row| (row[2] - 1.0).abs()).fold(0.0, f64::max);
        let mut r = r.with_threshold(10.0 * ctx.quad.rel_tol);
        r.metric = dev;
        r.direction = Direction::AtMost;
        r.pass = dev <= r.threshold;
        out.push(rename(r.param("metric_definition", "max |increment ratio - 1|"), &format!("lnd_n2_{name}")));
    }
    let study = analysis::lnd_study(&c7, center, &spacings, 3, 0.0, &ctx.quad, &opt).map_err(s)?;
    let rows = &study.tables[0].rows;
    let xr: Vec<f64> = rows.iter().filter(|r| r[1] == 0.0).map(|r| r[2]).collect();
    let (lo, hi) = xr.iter().fold((f64::INFINITY, 0f64), |(l, u), &v| (l.min(v), u.max(v)));
    out.push(
        CheckReport::new("lnd_n3_x_stability", hi / lo, 2.0, Direction::AtMost)
            .param("spec", spec_json(&c7))
            .param("spacings", spacings.clone())
            .param("metric_definition", "max/min of the kernel-X increment ratio over spacings")
            .table(study.tables[0].clone()),
    );
    let hy = rows.iter().filter(|r| r[1] == 1.0).map(|r| r[3] / r[5]).fold(f64::INFINITY, f64::min);
    out.push(
        CheckReport::new("lnd_n3_y_hausdorff_young", hy, 1.0, Direction::AtLeast)
            .param("spec", spec_json(&c7))
            .param("spacings", spacings)
            .param("metric_definition", "min over spacings of the kernel-Y value ratio / Hausdorff-Young chain bound"),
    );
    if ctx.quick {
        return Ok(out);
    }
    let times = [0.5, 0.5 + 2f64.powi(-7), 0.5 + 2f64.powi(-6)];
    let opt_rep = norms::lnd_distance(&c7, &times, &ctx.quad, &opt).map_err(s)?;
    let (grid_min, grid_arg) = lnd_grid_oracle(&c7, &times, &ctx.quad)?;
    let gap = (opt_rep.argmin[0] - grid_arg[0]).abs().max((opt_rep.argmin[1] - grid_arg[1]).abs());
    out.push(
        CheckReport::new("lnd_golden_grid_oracle", gap, 1e-3, Direction::AtMost)
            .param("spec", spec_json(&c7))
            .param("times", times.to_vec())
            .param("optimizer_argmin", opt_rep.argmin.clone())
            .param("optimizer_distance", opt_rep.distance)
            .param("optimizer_ratio", opt_rep.ratio)
            .param("optimizer_method", opt_rep.method.clone())
            .param("grid_argmin", grid_arg.to_vec())
            .param("grid_distance", grid_min)
            .param("metric_definition", "max coordinate gap between optimizer and nested grid argmin"),
    );
    Ok(out)
}

pub const FT_U_GRID: [f64; 8] = [-2.0, -1.0, -0.5, 0.25, 0.5, 0.75, 1.5, 3.0];

pub fn fourier(ctx: &Ctx) -> Outcome {
    let mut out = Vec::new();
    for h in [1.2, 1.5, 1.8] {
        for t in [0.5, 1.0, 2.0] {
            let r = analysis::ft_check(h, t, &FT_U_GRID, &ctx.quad).map_err(s)?;
            out.push(rename(r, &format!("ft_check_h{h}_t{t}")));
        }
    }
    Ok(out)
}

/// Second moment of the local time at 0 over `[t, t+h]` by Monte Carlo with
/// a box kernel of width `bw`: mean and standard error.
pub fn moment_monte_carlo(ens: &PathEnsemble, t: f64, h: f64, x: f64, bw: f64) -> Result<(f64, f64), String> {
    let (i0, i1) = match (ens.index_of(t), ens.index_of(t + h)) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => return Err(format!("window [{t}, {}] is not on the grid", t + h)),
    };
    // left-point rule, as for the occupation histogram
    let vals: Vec<f64> = ens
        .paths
        .iter()
        .map(|p| {
            let occ: f64 = (i0..i1).filter(|&j| (p[j] - x).abs() < bw / 2.0).map(|j| ens.grid[j + 1] - ens.grid[j]).sum();
            (occ / bw).powi(2)
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

pub fn local_time(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let t_end = spec.horizon;
    let mut out = Vec::new();
    // occupation density at two resolutions of the same paths
    let paths = ctx.pick(4, 2);
    let lp = ctx.lepage(ctx.sub_seed(8))?;
    let mut mass_err: f64 = 0.0;
    let mut table = Table::new("occupation", &["path", "steps", "bins", "mass", "discrepancy"]);
    let mut means = Vec::new();
    for (steps, bins) in [(1usize << 14, 64usize), (1 << 16, 256)] {
        let ens = lepage::sample_paths(&spec, &uniform_grid(0.0, t_end, steps), paths, &lp).map_err(s)?;
        let mut acc = 0.0;
        for i in 0..paths {
            let path = SamplePath::from_ensemble(&ens, i);
            let est = localtime::occupation_histogram(path, t_end, bins).map_err(s)?;
            mass_err = mass_err.max((est.total_mass() - t_end).abs());
            let vals = &ens.paths[i];
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
            let f = TestFn::Gaussian { center: 0.0, width: sd.max(1e-12) };
            let d = localtime::occupation_formula_check(SamplePath::from_ensemble(&ens, i), &est, f).map_err(s)?.discrepancy;
            acc += d;
            table.rows.push(vec![i as f64, steps as f64, bins as f64, est.total_mass(), d]);
        }
        means.push(acc / paths as f64);
    }
    out.push(
        CheckReport::new("mass_identity", mass_err, 1e-10 * t_end, Direction::AtMost)
            .param("spec", spec_json(&spec))
            .param("t", t_end)
            .param("seed", lp.seed)
            .param("paths", paths),
    );
    out.push(
        CheckReport::new("occupation_formula", means[0], 0.02, Direction::AtMost)
            .param("spec", spec_json(&spec))
            .param("steps", 1 << 14)
            .param("bins", 64)
            .param("test_function", "gaussian(0, path std)")
            .param("metric_definition", "mean relative discrepancy over paths")
            .table(table),
    );
    let mut refine = CheckReport::new("occupation_refinement", means[1] / means[0], 1.0, Direction::AtMost)
        .param("coarse", means[0])
        .param("fine", means[1])
        .param("metric_definition", "discrepancy at 2^16 steps / 256 bins over that at 2^14 / 64; must be < 1");
    refine.pass = refine.metric < 1.0;
    out.push(refine);

    // second moment against Monte Carlo
    let t = 0.5;
    let hs: &[f64] = if ctx.quick { &[0.02, 0.04] } else { &[0.01, 0.02, 0.04] };
    let mcfg = if ctx.quick { MomentConfig { nodes: 2, ..MomentConfig::default() } } else { MomentConfig::default() };
    let mut mt = Table::new("second_moment", &["h", "value", "error", "norm_calls", "loose_norms"]);
    let mut moments = Vec::new();
    for &h in hs {
        let m = localtime::local_time_second_moment(&spec, t, h, 0.0, &mcfg).map_err(s)?;
        if m.budget_exceeded {
            return Err(format!("second moment at h = {h}: norm-call budget exhausted"));
        }
        mt.rows.push(vec![h, m.value, m.error, m.norm_calls as f64, m.loose_norms as f64]);
        moments.push(m.value);
    }
    let growth = moments.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    let mut mono = CheckReport::new("moment_positive_monotone", growth, 1.0, Direction::AtLeast)
        .param("spec", spec_json(&spec))
        .param("t", t)
        .param("x", 0.0)
        .param("nodes", mcfg.nodes)
        .param("metric_definition", "min of M(next h) / M(h); needs > 1 with every M > 0")
        .table(mt);
    mono.pass = growth > 1.0 && moments.iter().all(|&m| m > 0.0);
    out.push(mono);

    let h = 0.02;
    let mc_paths = ctx.pick(500, 100);
    let grid = uniform_grid(t, t + h, 2048);
    let ens = lepage::sample_paths(&spec, &grid, mc_paths, &ctx.lepage(ctx.sub_seed(9))?).map_err(s)?;
    let exact = moments[hs.iter().position(|&v| v == h).expect("h is in the moment list")];
    let mut mc = Table::new("moment_monte_carlo", &["bandwidth", "mc", "stderr", "bandwidth_shift", "normalized_gap"]);
    let mut worst: f64 = 0.0;
    for bw in [0.1, 0.05, 0.025] {
        let (m, se) = moment_monte_carlo(&ens, t, h, 0.0, bw)?;
        let (m2, _) = moment_monte_carlo(&ens, t, h, 0.0, 2.0 * bw)?;
        let gap = (m - exact).abs() / (3.0 * se + (m - m2).abs());
        worst = worst.max(gap);
        mc.rows.push(vec![bw, m, se, (m - m2).abs(), gap]);
    }
    out.push(
        CheckReport::new("moment_monte_carlo", worst, 1.0, Direction::AtMost)
            .param("spec", spec_json(&spec))
            .param("t", t)
            .param("h", h)
            .param("quadrature_value", exact)
            .param("paths", mc_paths)
            .param("steps", 2048)
            .param("metric_definition", "max over bandwidths of |MC - M| / (3 stderr + |MC(bw) - MC(2 bw)|)")
            .table(mc),
    );

    if !ctx.quick {
        let g = uniform_grid(0.0, t_end, 1 << 12);
        let ens = lepage::sample_paths(&spec, &g, 50, &ctx.lepage(ctx.sub_seed(10))?).map_err(s)?;
        let slope = localtime::localtime_holder_in_x(&ens, t_end, 128).map_err(s)?;
        let h = spec.hurst.eval(0.5);
        out.push(
            CheckReport::new("localtime_holder_in_x", slope, h - 0.15, Direction::AtLeast)
                .param("spec", spec_json(&spec))
                .param("paths", 50)
                .param("steps", 1 << 12)
                .param("bins", 128),
        );
    }
    Ok(out)
}

pub fn holder(ctx: &Ctx) -> Outcome {
    let deltas = dyadics(4, 9);
    let mut out = Vec::new();
    let grid = uniform_grid(0.0, 1.0, 1 << 12);
    let paths = ctx.pick(50, 10);
    let c7 = ctx.spec_with("const:0.7")?;
    let lp = ctx.lepage(ctx.sub_seed(11))?;
    for (name, spec) in [("const", c7.clone()), ("sine", ctx.sine()?)] {
        let ens = lepage::sample_paths(&spec, &grid, paths, &lp).map_err(s)?;
        out.push(rename(analysis::holder_slope(&ens, &deltas).map_err(s)?, &format!("holder_{name}")));
    }
    let lin = analysis::holder_slope_paths(&grid, &[grid.clone()], &deltas, 1.0).map_err(s)?;
    out.push(rename(lin.with_threshold(0.01), "holder_linear_double"));
    if !ctx.quick {
        // two-resolution oracle: the finer grid should shrink the deviation
        let fine = uniform_grid(0.0, 1.0, 1 << 14);
        let ens = lepage::sample_paths(&c7, &fine, paths, &lp).map_err(s)?;
        let r = analysis::holder_slope(&ens, &deltas).map_err(s)?;
        let coarse = out[0].metric;
        out.push(
            CheckReport::new("holder_resolution_oracle", r.metric - coarse, 0.0, Direction::AtMost)
                .param("deviation_2^12", coarse)
                .param("deviation_2^14", r.metric)
                .param("metric_definition", "deviation at 2^14 points minus deviation at 2^12"),
        );
    }
    Ok(out)
}

pub type Criterion = fn(&Ctx) -> Outcome;

pub const CRITERIA: [(&str, Criterion); 9] = [
    ("c1_constants", constants),
    ("c2_isometry", isometry),
    ("c3_lepage", lepage_cf),
    ("c4_lemmas", lemmas),
    ("c5_localizability", localizability),
    ("c6_lnd", lnd),
    ("c7_fourier", fourier),
    ("c8_local_time", local_time),
    ("c9_holder", holder),
];

/// Writes every report and prints its summary line; true when all pass.
pub fn emit(stage: &Staging, dir: &str, reports: Vec<CheckReport>) -> Result<bool, String> {
    let mut ok = true;
    for mut r in reports {
        stage.report(dir, &mut r)?;
        println!("{}", r.summary_line());
        ok &= r.pass;
    }
    Ok(ok)
}

pub fn verify_all(ctx: &Ctx, stage: &Staging) -> Result<bool, String> {
    let mut ok = true;
    let mut index = Vec::new();
    for (dir, f) in CRITERIA {
        let t0 = std::time::Instant::now();
        let reports = f(ctx)?;
        eprintln!("{dir}: {} checks in {:.1} s", reports.len(), t0.elapsed().as_secs_f64());
        let pass = reports.iter().all(|r| r.pass);
        index.push(json!({ "criterion": dir, "pass": pass, "checks": reports.iter().map(|r| json!({ "check": r.check, "pass": r.pass })).collect::<Vec<_>>() }));
        ok &= emit(stage, dir, reports)?;
    }
    stage.json("summary.json", json!({ "all_pass": ok, "criteria": index }))?;
    Ok(ok)
}

// ---------------------------------------------------------------- commands

fn point(ctx: &Ctx) -> Result<FddPoint, String> {
    let times = ctx.list("times")?;
    let coeffs = if ctx.cfg.has("coeffs") { ctx.list("coeffs")? } else { vec![1.0; times.len()] };
    FddPoint::new(times, coeffs).map_err(s)
}

pub fn simulate(ctx: &Ctx, stage: &Staging) -> Result<bool, String> {
    let spec = ctx.spec()?;
    let grid = ctx.cfg.grid().map_err(s)?;
    let ens = lepage::sample_paths(&spec, &grid, ctx.usize("paths")?, &ctx.lepage(ctx.seed)?).map_err(s)?;
    let mut buf = Vec::new();
    ens.write_csv(&mut buf).map_err(s)?;
    let rel = stage.csv("paths.csv", &buf, ens.metadata())?;
    println!("simulated {} paths on {} grid points -> {rel}", ens.path_count(), ens.grid.len());
    Ok(true)
}

pub fn cf_check(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let p = point(ctx)?;
    let mut grid = p.times.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let lp = ctx.lepage(ctx.seed)?;
    let ens = lepage::sample_paths(&spec, &grid, ctx.usize("paths")?, &lp).map_err(s)?;
    let v = norms::alpha_power(&spec, &p, &ctx.quad).map_err(s)?.value;
    let (emp, se) = lepage::empirical_cf(&ens, &p).map_err(s)?;
    let bias = lepage::bias_budget(spec.a(), lp.terms);
    let exact = (-v).exp();
    Ok(vec![CheckReport::new("cf_check", (emp - exact).norm() / (3.0 * se + bias), 1.0, Direction::AtMost)
        .param("spec", spec_json(&spec))
        .param("times", p.times.clone())
        .param("coeffs", p.coeffs.clone())
        .param("exact", exact)
        .param("empirical", vec![emp.re, emp.im])
        .param("stderr", se)
        .param("bias_budget", bias)
        .param("seed", lp.seed)])
}

pub fn norm(ctx: &Ctx, stage: &Staging) -> Result<bool, String> {
    let spec = ctx.spec()?;
    let p = point(ctx)?;
    let r = norms::alpha_power(&spec, &p, &ctx.quad).map_err(s)?;
    let scale = r.value.powf(1.0 / spec.a());
    stage.json(
        "norm.json",
        json!({
            "spec": spec_json(&spec),
            "times": p.times,
            "coeffs": p.coeffs,
            "alpha_power": r.value,
            "alpha_power_error": r.error,
            "scale_norm": scale,
            "exact_cf": (-r.value).exp(),
        }),
    )?;
    println!("scale_norm {scale:.12e} alpha_power {:.12e} (error {:.2e})", r.value, r.error);
    Ok(true)
}

pub fn lnd_command(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let center = if ctx.cfg.has("center") { ctx.f64("center")? } else { 0.5 * spec.horizon };
    let spacings = if ctx.cfg.has("spacings") { ctx.list("spacings")? } else { dyadics(5, 9) };
    let n = if ctx.cfg.has("n") { ctx.usize("n")? } else { 3 };
    let floor = if ctx.cfg.has("lnd_floor") { ctx.f64("lnd_floor")? } else { 0.1 };
    Ok(vec![analysis::lnd_study(&spec, center, &spacings, n, floor, &ctx.quad, &OptConfig::default()).map_err(s)?])
}

pub fn localize(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let t = if ctx.cfg.has("t") { ctx.f64("t")? } else { 0.5 * spec.horizon };
    let deltas = if ctx.cfg.has("deltas") { ctx.list("deltas")? } else { vec![1e-1, 1e-2, 1e-3] };
    let u = if ctx.cfg.has("u") { ctx.list("u")? } else { vec![0.25, 0.5, 1.0] };
    let lambda = if ctx.cfg.has("lambda") { ctx.list("lambda")? } else { vec![-2.0, -1.0, 1.0, 2.0] };
    let threshold = if spec.hurst.is_constant() { 4.0 * ctx.quad.rel_tol } else { 0.05 };
    deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            analysis::localizability_error(&spec, t, d, &u, &lambda, threshold, &ctx.quad)
                .map(|r| rename(r, &format!("localizability_{k}")))
                .map_err(s)
        })
        .collect()
}

pub fn localtime_command(ctx: &Ctx, stage: &Staging) -> Result<bool, String> {
    let spec = ctx.spec()?;
    let grid = ctx.cfg.grid().map_err(s)?;
    let t = if ctx.cfg.has("t") { ctx.f64("t")? } else { *grid.last().expect("grid is nonempty") };
    let bins = if ctx.cfg.has("bins") { ctx.usize("bins")? } else { 64 };
    let lp = ctx.lepage(ctx.seed)?;
    let ens = lepage::sample_paths(&spec, &grid, ctx.usize("paths")?, &lp).map_err(s)?;
    let mut table = Table::new("occupation", &["path", "mass", "discrepancy"]);
    let mut mass_err: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let t0 = grid[0];
    for i in 0..ens.path_count() {
        let est = localtime::occupation_histogram(SamplePath::from_ensemble(&ens, i), t, bins).map_err(s)?;
        if i == 0 {
            let mut buf = Vec::new();
            est.write_csv(&mut buf).map_err(s)?;
            stage.csv("local_time_path_0.csv", &buf, json!({ "path": 0, "window": est.window, "bins": bins, "seed": lp.seed }))?;
        }
        mass_err = mass_err.max((est.total_mass() - (t - t0)).abs());
        let vals = &ens.paths[i];
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        let d = localtime::occupation_formula_check(SamplePath::from_ensemble(&ens, i), &est, TestFn::Gaussian { center: 0.0, width: sd.max(1e-12) })
            .map_err(s)?
            .discrepancy;
        worst = worst.max(d);
        table.rows.push(vec![i as f64, est.total_mass(), d]);
    }
    let mut reports = vec![
        CheckReport::new("mass_identity", mass_err, 1e-10 * (t - t0).abs().max(1e-300), Direction::AtMost).param("t", t).param("seed", lp.seed),
        CheckReport::new("occupation_formula", worst, 0.02, Direction::AtMost).param("bins", bins).param("seed", lp.seed).table(table),
    ];
    if ctx.cfg.has("h") {
        let h = ctx.f64("h")?;
        let x = if ctx.cfg.has("x") { ctx.f64("x")? } else { 0.0 };
        let start = if ctx.cfg.has("t") { t } else { 0.5 * spec.horizon };
        let m = localtime::local_time_second_moment(&spec, start, h, x, &MomentConfig::default()).map_err(s)?;
        stage.json("second_moment.json", json!({ "spec": spec_json(&spec), "t": start, "h": h, "x": x, "moment": m }))?;
        println!("second moment {:.6e} (error {:.2e}, {} norm calls)", m.value, m.error, m.norm_calls);
        let r = CheckReport::new("second_moment_positive", m.value, 0.0, Direction::AtLeast);
        let pass = m.value > 0.0 && !m.budget_exceeded;
        reports.push(CheckReport { pass, ..r });
    }
    emit(stage, "", reports)
}

pub fn ft_command(ctx: &Ctx) -> Outcome {
    let h = if ctx.cfg.has("h") { ctx.f64("h")? } else { 1.5 };
    let t = if ctx.cfg.has("t") { ctx.f64("t")? } else { 1.0 };
    let u = if ctx.cfg.has("u") { ctx.list("u")? } else { FT_U_GRID.to_vec() };
    Ok(vec![analysis::ft_check(h, t, &u, &ctx.quad).map_err(s)?])
}

pub fn holder_command(ctx: &Ctx) -> Outcome {
    let spec = ctx.spec()?;
    let grid = ctx.cfg.grid().map_err(s)?;
    let deltas = if ctx.cfg.has("deltas") { ctx.list("deltas")? } else { dyadics(4, 9) };
    let ens = lepage::sample_paths(&spec, &grid, ctx.usize("paths")?, &ctx.lepage(ctx.seed)?).map_err(s)?;
    Ok(vec![analysis::holder_slope(&ens, &deltas).map_err(s)?])
}
