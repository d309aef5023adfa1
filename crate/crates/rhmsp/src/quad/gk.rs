//! Globally adaptive Gauss–Kronrod (7/15) engine over several pieces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub trait Value: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
    fn finite(self) -> bool;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Value for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// One 15-point Kronrod evaluation: (value, error estimate).
pub fn gk15<V: Value>(f: &dyn Fn(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv = [(V::zero(), V::zero()); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        fv[j] = (f1, f2);
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm());
    }
    let h = h.abs();
    let (resasc, resabs) = (resasc * h, resabs * h);
    let mut err = ((resk - resg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (resk * h, err)
}

pub struct Piece<'a, V> {
    pub f: &'a dyn Fn(f64) -> V,
    pub a: f64,
    pub b: f64,
    /// Initial number of equal panels.
    pub panels: usize,
}

struct Interval<V> {
    a: f64,
    b: f64,
    val: V,
    err: f64,
    depth: u32,
    piece: usize,
}

impl<V> PartialEq for Interval<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Interval<V> {}
impl<V> PartialOrd for Interval<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Interval<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.piece.cmp(&self.piece))
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

pub struct Outcome<V> {
    pub total: V,
    pub error: f64,
    pub per_piece: Vec<(V, f64)>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Refine the worst interval until `error <= target(total)`.
///
/// `fixed` is added to the running total when evaluating the target.
pub fn adaptive<V: Value>(
    pieces: &[Piece<'_, V>],
    fixed: V,
    target: &dyn Fn(V) -> f64,
    max_depth: u32,
    max_evaluations: usize,
) -> Outcome<V> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Interval<V>> = Vec::new();
    let mut evals = 0usize;
    for (i, p) in pieces.iter().enumerate() {
        let n = p.panels.max(1);
        let w = (p.b - p.a) / n as f64;
        for k in 0..n {
            let a = p.a + w * k as f64;
            let b = if k + 1 == n { p.b } else { p.a + w * (k + 1) as f64 };
            if a == b {
                continue;
            }
            let (val, err) = gk15(p.f, a, b);
            evals += 15;
            heap.push(Interval { a, b, val, err, depth: 0, piece: i });
        }
    }
    let recompute = |heap: &BinaryHeap<Interval<V>>, done: &[Interval<V>]| {
        let mut t = fixed;
        let mut e = 0.0;
        for iv in heap.iter().chain(done.iter()) {
            t = t + iv.val;
            e += iv.err;
        }
        (t, e)
    };
    let (mut total, mut error) = recompute(&heap, &done);
    let mut steps = 0usize;
    let mut converged = true;
    while error > target(total) || !total.finite() {
        let Some(iv) = heap.pop() else {
            converged = false;
            break;
        };
        if iv.depth >= max_depth || evals >= max_evaluations {
            let stuck_budget = evals >= max_evaluations;
            done.push(iv);
            if stuck_budget {
                converged = false;
                break;
            }
            continue;
        }
        let m = 0.5 * (iv.a + iv.b);
        let f = pieces[iv.piece].f;
        let (v1, e1) = gk15(f, iv.a, m);
        let (v2, e2) = gk15(f, m, iv.b);
        evals += 30;
        total = total - iv.val + v1 + v2;
        error += e1 + e2 - iv.err;
        let d = iv.depth + 1;
        heap.push(Interval { a: iv.a, b: m, val: v1, err: e1, depth: d, piece: iv.piece });
        heap.push(Interval { a: m, b: iv.b, val: v2, err: e2, depth: d, piece: iv.piece });
        steps += 1;
        if steps % 256 == 0 {
            (total, error) = recompute(&heap, &done);
        }
    }
    // deterministic final summation in piece/position order
    let mut all: Vec<Interval<V>> = heap.into_vec();
    all.extend(done);
    all.sort_by(|x, y| x.piece.cmp(&y.piece).then(x.a.total_cmp(&y.a)));
    let mut per_piece = vec![(V::zero(), 0.0); pieces.len()];
    let mut sum = fixed;
    let mut err = 0.0;
    for iv in &all {
        let p = &mut per_piece[iv.piece];
        p.0 = p.0 + iv.val;
        p.1 += iv.err;
    }
    for p in &per_piece {
        sum = sum + p.0;
        err += p.1;
    }
    if err > target(sum) || !sum.finite() {
        converged = false;
    }
    Outcome { total: sum, error: err, per_piece, evaluations: evals, converged }
}
