//! Monte Carlo checks of the fading and interference draws.

use cislunar_core::channel::{simulate_trace, RicianFading};
use cislunar_core::interference::{draw_effective_power, InterferenceModel, InterferenceSpec};
use cislunar_core::link_budget::{PhaseAngle, ScenarioConfig};
use cislunar_core::rng::Lane;
use cislunar_core::RngStream;

const DRAWS: usize = 1_000_000;

fn fading_powers(k: f64, seed: u64) -> Vec<f64> {
    let fading = RicianFading::new(k).unwrap();
    let mut rng = RngStream::new(seed, 0).rng(Lane::Fading);
    (0..DRAWS).map(|_| fading.sample(&mut rng).power()).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn unit_mean_fading_power() {
    for (i, k) in [0.0, 1.0, 5.0, 10.0, 100.0].into_iter().enumerate() {
        let m = mean(&fading_powers(k, i as u64));
        assert!((m - 1.0).abs() < 0.01, "K={k}: E|h|^2 = {m}");
    }
}

/// Inverts E[P²]/E[P]² = (K² + 4K + 2)/(K + 1)² for K.
fn k_from_moments(p: &[f64]) -> f64 {
    let m1 = mean(p);
    let m2 = p.iter().map(|v| v * v).sum::<f64>() / p.len() as f64;
    let s = (2.0 - m2 / (m1 * m1)).max(0.0).sqrt();
    s / (1.0 - s)
}

#[test]
fn k_factor_recovered_from_moments() {
    for (k, tol) in [(1.0, 0.05), (5.0, 0.25), (10.0, 0.6)] {
        let est = k_from_moments(&fading_powers(k, 40 + k as u64));
        assert!((est - k).abs() < tol, "K={k}: estimated {est}");
    }
    // Rayleigh: |h|² ~ Exp(1), so E[P²]/E[P]² = 2.
    let p = fading_powers(0.0, 50);
    let ratio = p.iter().map(|v| v * v).sum::<f64>() / p.len() as f64 / mean(&p).powi(2);
    assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
}

/// Kolmogorov–Smirnov distance of a sample to Exp(1).
fn ks_exp1(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn model2_power_is_exponential() {
    let spec = InterferenceSpec::new(InterferenceModel::Model2, -110.0, 1.0).unwrap();
    let mut rng = RngStream::new(9, 0).rng(Lane::Interference);
    let normalized: Vec<f64> = (0..DRAWS)
        .map(|_| draw_effective_power(&spec, &mut rng).1 / spec.power_watts())
        .collect();
    let d = ks_exp1(normalized);
    assert!(d < 0.005, "KS distance {d}");
    // the sampler must not be trivially constant
    let spec1 = InterferenceSpec::new(InterferenceModel::Model1, -110.0, 1.0).unwrap();
    let constant: Vec<f64> = (0..1000)
        .map(|_| draw_effective_power(&spec1, &mut rng).1 / spec1.power_watts())
        .collect();
    assert!(ks_exp1(constant) > 0.3);
}

#[test]
fn gate_rate_and_equal_means() {
    for (i, p) in [0.5, 0.75, 1.0].into_iter().enumerate() {
        let m1 = InterferenceSpec::new(InterferenceModel::Model1, -120.0, p).unwrap();
        let m2 = InterferenceSpec::new(InterferenceModel::Model2, -120.0, p).unwrap();
        let mut r1 = RngStream::new(i as u64, 0).rng(Lane::Interference);
        let mut r2 = RngStream::new(100 + i as u64, 0).rng(Lane::Interference);
        let mut gated = 0usize;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..DRAWS {
            let (a, w) = draw_effective_power(&m1, &mut r1);
            gated += usize::from(a);
            s1 += w;
            s2 += draw_effective_power(&m2, &mut r2).1;
        }
        let rate = gated as f64 / DRAWS as f64;
        assert!((rate - p).abs() < 0.005, "p={p}: rate {rate}");
        let expect = p * m1.power_watts();
        assert!((s1 / DRAWS as f64 / expect - 1.0).abs() < 0.01);
        assert!((s2 / DRAWS as f64 / expect - 1.0).abs() < 0.01);
    }
}

#[test]
fn sinr_falls_monotonically_with_interference_power() {
    let cfg = ScenarioConfig::gateway();
    let psi = PhaseAngle::new(240.0);
    for model in [InterferenceModel::Model1, InterferenceModel::Model2] {
        let mut prev: Option<Vec<f64>> = None;
        for power in [-130.0, -120.0, -110.0, -100.0] {
            let spec = InterferenceSpec::new(model, power, 0.75).unwrap();
            let trace = simulate_trace(&cfg, psi, Some(&spec), 5_000, RngStream::new(3, 11)).unwrap();
            let sinr: Vec<f64> = trace.iter().map(|s| s.sinr_db).collect();
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&sinr) {
                    assert!(b <= a, "{model} I={power}: {b} > {a}");
                }
                assert!(mean(&sinr) < mean(prev));
            }
            prev = Some(sinr);
        }
    }
}
