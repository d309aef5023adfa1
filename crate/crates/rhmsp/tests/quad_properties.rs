use proptest::prelude::*;
use rhmsp::quad::{integrate_even_singular, oscillatory_ft, QuadratureConfig};
use rhmsp::Complex64;

fn cfg(rel_tol: f64) -> QuadratureConfig {
    QuadratureConfig { rel_tol, abs_tol: 1e-15, ..QuadratureConfig::default() }
}

/// `2∫_0^∞ x^{-s} / (1 + x²)^c dx` with its closed form `B((1-s)/2, c - (1-s)/2)`.
fn power_rational(s: f64, c: f64) -> (impl Fn(f64) -> f64, f64) {
    use statrs::function::beta::beta;
    let a = (1.0 - s) / 2.0;
    (move |x: f64| x.powf(-s) / (1.0 + x * x).powf(c), beta(a, c - a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_beta_closed_form(s in -0.5..0.8f64, c in 1.0..2.5f64) {
        let (g, exact) = power_rational(s, c);
        let r = integrate_even_singular(&g, 2.0 * c + s - 1.0, s, &cfg(1e-10)).unwrap();
        prop_assert!((r.value - exact).abs() <= 1e-9 * exact, "{} vs {}", r.value, exact);
    }

    #[test]
    fn linear_in_the_integrand(s in -0.5..0.8f64, c in 1.0..2.5f64) {
        let (g, _) = power_rational(s, c);
        let c0 = cfg(1e-8);
        let base = integrate_even_singular(&g, 2.0 * c + s - 1.0, s, &c0).unwrap().value;
        for a in [0.5, 2.0, 10.0] {
            let scaled = integrate_even_singular(&|x| a * g(x), 2.0 * c + s - 1.0, s, &c0).unwrap().value;
            prop_assert!((scaled - a * base).abs() <= 2.0 * c0.rel_tol * (a * base).abs());
        }
    }

    #[test]
    fn redundant_split_point_is_harmless(s in -0.5..0.8f64, c in 1.0..2.5f64, split in 0.05..20.0f64) {
        let (g, _) = power_rational(s, c);
        let c0 = cfg(1e-8);
        let mut c1 = c0.clone();
        c1.split_points.push(split);
        let a = integrate_even_singular(&g, 2.0 * c + s - 1.0, s, &c0).unwrap().value;
        let b = integrate_even_singular(&g, 2.0 * c + s - 1.0, s, &c1).unwrap().value;
        prop_assert!((a - b).abs() <= 2.0 * c0.rel_tol * a.abs());
    }

    #[test]
    fn halving_tolerance_does_not_raise_error_estimate(s in -0.5..0.8f64, c in 1.0..2.5f64) {
        let (g, _) = power_rational(s, c);
        let mut tol = 1e-4;
        let mut prev = f64::INFINITY;
        for _ in 0..8 {
            let e = integrate_even_singular(&g, 2.0 * c + s - 1.0, s, &cfg(tol)).unwrap().error;
            prop_assert!(e <= prev, "error {e} after {prev} at rel_tol {tol}");
            prev = e;
            tol /= 2.0;
        }
    }
}

#[test]
fn fourier_transform_of_two_sided_exponential() {
    let f = |x: f64| Complex64::new((-x.abs()).exp(), 0.0);
    let c = cfg(1e-8);
    for u in [0.0, 1.0, 5.0] {
        let r = oscillatory_ft(&f, u, 4.0, &c).unwrap();
        let exact = 2.0 / (1.0 + u * u);
        assert!((r.value.re - exact).abs() <= c.rel_tol * exact, "u = {u}: {} vs {exact}", r.value.re);
        assert!(r.value.im.abs() <= 1e-10);
    }
}
