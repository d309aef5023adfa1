//! Hurwitz zeta, a Gauss hypergeometric mean and commensurability detection.

use statrs::function::gamma::gamma;

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (a+k)^{-s} for s > 1, a > 0 (Euler–Maclaurin).
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let n = if a < 12.0 { (12.0 - a).ceil() as usize } else { 0 };
    let mut sum = 0.0;
    for k in 0..n {
        sum += (a + k as f64).powf(-s);
    }
    let b = a + n as f64;
    let bs = b.powf(-s);
    sum += b * bs / (s - 1.0) + 0.5 * bs;
    // Σ B_{2j}/(2j)! s(s+1)...(s+2j-2) b^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut pw = bs / b;
    let inv_b2 = 1.0 / (b * b);
    for (j, bern) in BERNOULLI_2J.iter().enumerate() {
        sum += bern / fact * rising * pw;
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        pw *= inv_b2;
    }
    sum
}

/// a^s ζ(s, a): the sum Σ_{k≥0} (a/(a+k))^s.
pub fn scaled_hurwitz(s: f64, a: f64) -> f64 {
    a.powf(s) * hurwitz_zeta(s, a)
}

/// Riemann zeta for s > 1.
pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

fn float_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a.abs().max(b.abs()), a.abs().min(b.abs()));
    while b > tol {
        let r = a % b;
        a = b;
        b = if r > b - tol { 0.0 } else { r };
    }
    a
}

/// Largest g with every nonzero frequency an integer multiple of g.
///
/// Gives up when the multiples would exceed `max_ratio`.
pub fn common_base(freqs: &[f64], max_ratio: f64) -> Option<f64> {
    let nz: Vec<f64> = freqs.iter().map(|f| f.abs()).filter(|f| *f > 0.0).collect();
    let fmax = nz.iter().cloned().fold(0.0, f64::max);
    if nz.is_empty() {
        return None;
    }
    let tol = 1e-10 * fmax;
    let g = nz.iter().fold(0.0, |g, &f| if g == 0.0 { f } else { float_gcd(g, f, tol) });
    if g <= 0.0 || fmax / g > max_ratio {
        return None;
    }
    for f in &nz {
        let r = f / g;
        if (r - r.round()).abs() > 1e-7 * r.max(1.0) {
            return None;
        }
    }
    Some(g)
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for n in 0..2000 {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(1/π) ∫_0^π (A + B cos ψ)^p dψ` for `0 ≤ |B| ≤ A` and `0 < p < 1`, `p ≠ 1/2`.
///
/// Equals `(A+|B|)^p ₂F₁(-p, 1/2; 1; z)` with `z = 2|B|/(A+|B|)`; past
/// `z = 1/2` the series is continued through `1 - z`.
pub fn cos_power_mean(a: f64, b: f64, p: f64) -> f64 {
    let b = b.abs().min(a);
    if a <= 0.0 {
        return 0.0;
    }
    let s = a + b;
    let z = 2.0 * b / s;
    let f = if z <= 0.5 {
        hyp2f1_series(-p, 0.5, 1.0, z)
    } else {
        let w = 1.0 - z;
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let c1 = gamma(0.5 + p) / (gamma(1.0 + p) * sqrt_pi);
        let c2 = gamma(-0.5 - p) / (gamma(-p) * sqrt_pi);
        c1 * hyp2f1_series(-p, 0.5, 0.5 - p, w) + w.powf(0.5 + p) * c2 * hyp2f1_series(1.0 + p, 0.5, 1.5 + p, w)
    };
    s.powf(p) * f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_matches_known_values() {
        assert!((riemann_zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4.0 / 3.0) - 3.600_937_750_458_86).abs() < 1e-10);
        // ζ(s, a+1) = ζ(s, a) - a^{-s}
        let (s, a) = (1.75, 0.3);
        assert!((hurwitz_zeta(s, a + 1.0) - hurwitz_zeta(s, a) + a.powf(-s)).abs() < 1e-13);
        let direct: f64 = (0..2_000_000).map(|k| (40.5 + k as f64).powf(-3.0)).sum();
        assert!((hurwitz_zeta(3.0, 40.5) - direct).abs() < 1e-12);
    }

    #[test]
    fn common_base_of_dyadics_and_decimals() {
        assert_eq!(common_base(&[0.5, 0.5 + 2f64.powi(-7), 0.5 + 2f64.powi(-6)], 1e6), Some(2f64.powi(-7)));
        let g = common_base(&[0.5, 0.50025, 0.5005], 1e6).unwrap();
        assert!((g - 2.5e-4).abs() < 1e-15);
        assert_eq!(common_base(&[1.0, std::f64::consts::SQRT_2], 1e6), None);
        assert_eq!(common_base(&[0.0], 1e6), None);
    }

    #[test]
    fn cos_power_mean_matches_quadrature() {
        for &(a, b, p) in &[(1.0, 0.3, 0.75), (2.0, 1.9, 0.6), (1.0, 1.0, 0.9), (3.0, -2.999, 0.55), (1.0, 0.0, 0.8)] {
            let n = 400_000;
            let h = std::f64::consts::PI / n as f64;
            let q: f64 = (0..n).map(|i| (a + b * ((i as f64 + 0.5) * h).cos()).max(0.0).powf(p)).sum::<f64>() / n as f64;
            let v = cos_power_mean(a, b, p);
            assert!((v - q).abs() < 1e-8 * v, "{a} {b} {p}: {v} vs {q}");
        }
    }
}
