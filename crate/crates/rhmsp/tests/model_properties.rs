use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use rhmsp::model::{kernel_value, parse_hurst, KernelVariant};
use rhmsp::Complex64;

const KERNELS: [KernelVariant; 3] = [KernelVariant::X, KernelVariant::Y, KernelVariant::F1];

/// Principal-branch formulas valid for either sign of x.
fn f_x(t: f64, k: f64, x: f64) -> Complex64 {
    (Complex64::new(0.0, t * x).exp() - 1.0) * x.abs().powf(-k)
}

fn f_y(t: f64, k: f64, x: f64) -> Complex64 {
    (1.0 - Complex64::new(0.0, -t * x).exp()) * Complex64::new(0.0, -x).powc(Complex64::new(-k, 0.0))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #[test]
    fn hermitian_symmetry(i in 0..3usize, t in 0.01..4.0f64, k in 0.55..1.95f64, x in 1e-4..1e4f64) {
        let kv = KERNELS[i];
        let (p, m) = (kernel_value(kv, t, k, x), kernel_value(kv, t, k, -x));
        prop_assert!((m - p.conj()).norm() <= 1e-15 * p.norm().max(1e-300));
    }

    #[test]
    fn kernels_match_principal_branch_formulas(t in 0.01..4.0f64, k in 0.55..1.95f64, x in -1e3..1e3f64) {
        prop_assume!(x.abs() > 1e-3);
        prop_assert!(close(kernel_value(KernelVariant::X, t, k, x), f_x(t, k, x)));
        prop_assert!(close(kernel_value(KernelVariant::Y, t, k, x), f_y(t, k, x)));
        if x > 0.0 {
            let f1 = f_x(t, k, x) * Complex64::from_polar(1.0, -FRAC_PI_2 * k);
            prop_assert!(close(kernel_value(KernelVariant::F1, t, k, x), f1));
        }
    }

    #[test]
    fn f1_is_reflected_y(t in 0.01..4.0f64, k in 0.55..1.95f64, x in -1e3..1e3f64) {
        prop_assume!(x != 0.0);
        let f1 = kernel_value(KernelVariant::F1, t, k, x);
        prop_assert!(close(f1, -kernel_value(KernelVariant::Y, t, k, -x)));
        let fx = kernel_value(KernelVariant::X, t, k, x);
        prop_assert!((f1.norm() - fx.norm()).abs() <= 1e-14 * fx.norm().max(1e-300));
    }

    #[test]
    fn declared_bounds_cover_samples(
        form in 0..4usize,
        base in 0.35..0.65f64,
        amp in 0.0..0.25f64,
        freq in 0.1..20.0f64,
        phase in -3.0..3.0f64,
        horizon in 0.5..4.0f64,
    ) {
        let text = match form {
            0 => format!("const:{base}"),
            1 => format!("affine:{base},{}", amp / horizon * phase.signum()),
            2 => format!("sine:{base},{amp},{freq},{phase}"),
            _ => format!("logistic:{},{},{},{freq}", base - amp, base + amp, horizon * 0.5),
        };
        let h = parse_hurst(&text, horizon).unwrap();
        for i in 0..=10_000 {
            let v = h.eval(horizon * i as f64 / 10_000.0);
            prop_assert!(v <= h.h_check + 1e-12 && v >= h.h_hat - 1e-12, "{text}: {v} outside [{}, {}]", h.h_hat, h.h_check);
        }
    }
}

#[test]
fn kernel_x_small_argument_has_no_cancellation() {
    // (e^{itx} - 1) ≈ itx - (tx)²/2 for tiny tx
    let v = kernel_value(KernelVariant::X, 1.0, 1.0, 1e-9);
    assert!((v.re + 0.5e-9).abs() < 1e-20);
    assert!((v.im - 1.0).abs() < 1e-12);
}
