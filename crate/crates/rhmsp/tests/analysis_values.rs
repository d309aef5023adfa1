use rhmsp::analysis::{ols_slope, path_modulus_slope};
use rhmsp::model::hat_y_closed;
use statrs::function::gamma::gamma;

#[test]
fn closed_form_transform_values() {
    let c = 2.0 * std::f64::consts::PI / gamma(1.5);
    let v = hat_y_closed(1.5, 1.0, 0.5);
    assert!((v - c * 0.5f64.sqrt()).abs() < 1e-12);
    assert!((v - 5.0133).abs() < 1e-3);
    let w = hat_y_closed(1.5, 1.0, -1.0);
    assert!((w - c * (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((w - 2.9367).abs() < 1e-3);
    // beyond t the transform vanishes
    assert_eq!(hat_y_closed(1.5, 1.0, 1.5), 0.0);
}

#[test]
fn modulus_slope_of_a_power_path() {
    // sup |x(t+δ) - x(t)| for x = t^0.7 is attained at t = 0
    let n = 4096;
    let dt = 1.0 / n as f64;
    let v: Vec<f64> = (0..=n).map(|j| (j as f64 * dt).powf(0.7)).collect();
    let deltas: Vec<f64> = (2..8).map(|k| 2f64.powi(-k)).collect();
    let s = path_modulus_slope(&v, dt, &deltas).unwrap();
    assert!((s - 0.7).abs() < 1e-9, "{s}");
}

#[test]
fn ols_slope_needs_spread() {
    assert_eq!(ols_slope(&[(1.0, 2.0)]), None);
    assert_eq!(ols_slope(&[(1.0, 2.0), (1.0, 3.0)]), None);
}
