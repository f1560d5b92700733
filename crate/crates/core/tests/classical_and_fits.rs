use nalgebra::DMatrix;
use proptest::prelude::*;
use walkmix::analysis::{
    fit_exponential_mixing, fit_power_law, long_time_average, select_fit_window, ObservableSeries,
};
use walkmix::classical_baseline::{
    classical_distance_series, classical_mixing_time, classical_step, spectral_mixing_time, ProbabilityVector,
};
use walkmix::rng::{sample_stream, unit_f64, SampleRng};

fn transition_matrix(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        p[((s + 1) % n, s)] += 0.5;
        p[((s + n - 1) % n, s)] += 0.5;
    }
    p
}

#[test]
fn series_matches_matrix_powers() {
    for n in [3usize, 5, 7, 9, 11] {
        let p = transition_matrix(n);
        let series = classical_distance_series(n, 1, 100).unwrap();
        let mut v = DMatrix::zeros(n, 1);
        v[(1, 0)] = 1.0;
        for t in 0..=100 {
            let d = 0.5 * v.iter().map(|x| (x - 1.0 / n as f64).abs()).sum::<f64>();
            assert!((series.d_omega()[t] - d).abs() < 1e-12, "n={n} t={t}");
            v = &p * v;
        }
    }
}

#[test]
fn probabilities_stay_normalized_and_nonnegative() {
    let mut p = ProbabilityVector::localized(9, 4).unwrap();
    for _ in 0..500 {
        p = classical_step(&p);
        assert!(p.as_slice().iter().all(|&x| x >= 0.0));
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let u = ProbabilityVector::uniform(51);
    assert_eq!(classical_step(&u), u);
}

#[test]
fn distance_never_increases() {
    for n in (3..=51).step_by(2) {
        let d = classical_distance_series(n, 0, 10_000).unwrap();
        for w in d.d_omega().windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "n={n}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn decay_rate_is_the_circulant_eigenvalue() {
    for n in [11usize, 19] {
        let eig = transition_matrix(n).symmetric_eigen();
        let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let second = mags[1];
        assert!((second - (std::f64::consts::PI / n as f64).cos()).abs() < 1e-12);
        let t = 10 * n * n / 8;
        let d = classical_distance_series(n, 0, t + 1).unwrap();
        let rate = d.d_omega()[t + 1] / d.d_omega()[t];
        assert!((rate - second).abs() < 1e-6, "n={n}: rate {rate} vs {second}");
    }
}

#[test]
fn fitted_classical_time_matches_spectral_oracle() {
    let mut last = 0.0;
    for n in [11usize, 19, 31, 51] {
        let c = classical_mixing_time(n).unwrap();
        let oracle = -1.0 / (std::f64::consts::PI / n as f64).cos().ln();
        assert!((c.spectral_tau - oracle).abs() < 1e-9);
        assert!((c.tau() - oracle).abs() < 0.05 * oracle, "n={n}: {} vs {oracle}", c.tau());
        assert!(c.tau() > last);
        last = c.tau();
    }
    assert!((spectral_mixing_time(3) - 1.0 / 2f64.ln()).abs() < 1e-12);
}

#[test]
fn exact_exponentials_are_recovered() {
    let s = ObservableSeries::from_distances((0..=200).map(|t| (-(t as f64) / 10.0).exp()).collect()).unwrap();
    let fit = fit_exponential_mixing(&s, select_fit_window(&s).unwrap()).unwrap();
    assert!((fit.tau_mix() - 10.0).abs() < 1e-9);
    let s = ObservableSeries::from_distances((0..=300).map(|t| 0.5 * (-(t as f64) / 25.0).exp()).collect()).unwrap();
    let fit = fit_exponential_mixing(&s, (5, 250)).unwrap();
    assert!((fit.tau_mix() - 25.0).abs() < 1e-9);
    assert!(fit.residual_rms < 1e-12);
}

#[test]
fn exact_power_laws_are_recovered() {
    let pts: Vec<(f64, f64)> = [1.5, 3.0, 6.0, 12.0, 24.0, 40.0].iter().map(|&r: &f64| (r, 0.44 * r.powf(-0.5))).collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.prefactor() - 0.44).abs() < 1e-9);
    assert!((fit.exponent() - 0.5).abs() < 1e-9);
}

fn normal(rng: &mut SampleRng) -> f64 {
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[test]
fn exponential_fit_is_unbiased_under_lognormal_noise() {
    let tau = 20.0;
    let mut rng = sample_stream(99, 0);
    let mut total = 0.0;
    for _ in 0..100 {
        let d: Vec<f64> = (0..=200).map(|t| (-(t as f64) / tau).exp() * (0.1 * normal(&mut rng)).exp()).collect();
        let s = ObservableSeries::from_distances(d).unwrap();
        total += fit_exponential_mixing(&s, (1, 150)).unwrap().tau_mix();
    }
    let mean = total / 100.0;
    assert!((mean - tau).abs() < 0.02 * tau, "mean τ̂ = {mean}");
}

proptest! {
    #[test]
    fn long_time_average_splits_over_subwindows(
        values in prop::collection::vec(0.0..1.0f64, 60..120),
        a in 0usize..20,
        cut in 1usize..30,
    ) {
        let s = ObservableSeries::from_distances(values.clone()).unwrap();
        let t = s.final_time();
        let m = (a + cut).min(t - 1);
        let whole = long_time_average(&s, a, t).unwrap();
        let left = long_time_average(&s, a, m).unwrap();
        let right = long_time_average(&s, m + 1, t).unwrap();
        let (nl, nr) = ((m - a + 1) as f64, (t - m) as f64);
        prop_assert!((whole - (nl * left + nr * right) / (nl + nr)).abs() < 1e-12);
        prop_assert_eq!(long_time_average(&s, t, t).unwrap(), values[t]);
    }

    #[test]
    fn power_law_ignores_point_order(
        pts in prop::collection::vec((1.01..50.0f64, 0.01..1.0f64), 4..10).prop_shuffle(),
    ) {
        let mut sorted = pts.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        prop_assume!(sorted.windows(2).any(|w| w[0].0 != w[1].0));
        let a = fit_power_law(&pts).unwrap();
        let b = fit_power_law(&sorted).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn constant_series_has_no_window() {
    let s = ObservableSeries::from_distances(vec![0.4; 100]).unwrap();
    assert!(matches!(select_fit_window(&s), Err(walkmix::Error::FitWindow(_))));
}
