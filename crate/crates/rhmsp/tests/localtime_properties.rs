use proptest::prelude::*;
use rhmsp::localtime::{occupation_histogram, occupation_on_edges, SamplePath};

fn walk(steps: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = steps.len();
    let times: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let mut values = vec![0.0];
    for s in steps {
        values.push(values.last().unwrap() + s);
    }
    (times, values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_window_length_and_density_nonnegative(
        steps in prop::collection::vec(-0.1..0.1f64, 64..=64),
        bins in 10..80usize,
    ) {
        let (t, v) = walk(&steps);
        let est = occupation_histogram(SamplePath::new(&t, &v).unwrap(), 1.0, bins).unwrap();
        prop_assert!((est.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(est.values.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn halves_add_up(steps in prop::collection::vec(-0.1..0.1f64, 64..=64)) {
        let (t, v) = walk(&steps);
        let path = SamplePath::new(&t, &v).unwrap();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 0.01;
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.01;
        let edges: Vec<f64> = (0..=40).map(|k| lo + (hi - lo) * k as f64 / 40.0).collect();
        let whole = occupation_on_edges(path, 0.0, 1.0, &edges).unwrap();
        let a = occupation_on_edges(path, 0.0, 0.5, &edges).unwrap();
        let b = occupation_on_edges(path, 0.5, 1.0, &edges).unwrap();
        for k in 0..40 {
            prop_assert!((whole.mass[k] - a.mass[k] - b.mass[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn constant_path_puts_all_mass_in_one_bin() {
    let t: Vec<f64> = (0..=10).map(|j| j as f64 / 10.0).collect();
    let v = vec![0.3; 11];
    let est = occupation_histogram(SamplePath::new(&t, &v).unwrap(), 1.0, 20).unwrap();
    assert!(est.degenerate);
    assert!((est.total_mass() - 1.0).abs() < 1e-12);
}
