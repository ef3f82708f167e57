use qrng_core::correlate::{histogram_coincidences, HistogramOptions};
use qrng_core::randtests::special::chi2_sf;
use qrng_core::sim::presets::reference_rate;
use qrng_core::sim::{channel_timestamps, simulate_emissions, simulate_scene, Detector, EmitterParams, SceneConfig};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn emission_count_matches_renewal_mean() {
    let e = EmitterParams::new(0.8, 0.01, 1.0).unwrap();
    let counts: Vec<f64> = (0..100)
        .map(|seed| simulate_emissions(&e, 1e7, seed).unwrap().len() as f64)
        .collect();
    let (m, _) = mean_var(&counts);
    // Renewal process: mean T / mu, variance T sigma^2 / mu^3 per run.
    let mu: f64 = 100.8;
    let var_gap = 100.0f64.powi(2) + 0.8f64.powi(2);
    let sd_mean = (1e7 * var_gap / mu.powi(3)).sqrt() / 10.0;
    let expected = 1e7 / mu;
    assert!((expected - 99_206.35).abs() < 0.01);
    assert!(
        (m - expected).abs() < 3.0 * sd_mean,
        "mean {m}, expected {expected} +- {sd_mean}"
    );
}

#[test]
fn short_window_is_empty() {
    let e = EmitterParams::new(0.8, 1e-6, 1.0).unwrap();
    assert!(simulate_emissions(&e, 1.0, 3).unwrap().is_empty());
}

/// CDF of the sum of Exp(l1) and Exp(l2).
fn hypoexp_cdf(t: f64, l1: f64, l2: f64) -> f64 {
    1.0 - (l2 * (-l1 * t).exp() - l1 * (-l2 * t).exp()) / (l2 - l1)
}

#[test]
fn gaps_follow_hypoexponential_law() {
    let (l1, l2) = (0.01, 1.0 / 0.8);
    let e = EmitterParams::new(0.8, l1, 1.0).unwrap();
    let times = simulate_emissions(&e, 5e7, 42).unwrap();
    // Gaps after the first emission; the first one is measured from t = 0.
    let gaps: Vec<f64> = std::iter::once(times[0])
        .chain(times.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let bins = 40;
    let mut counts = vec![0u64; bins];
    for g in &gaps {
        let u = hypoexp_cdf(*g, l1, l2);
        counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = gaps.len() as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = chi2_sf(chi2, (bins - 1) as f64);
    assert!(p >= 0.01, "chi2 {chi2}, p {p}");
}

#[test]
fn identical_config_gives_identical_stream() {
    let s = reference_rate(99, 2e7);
    let a = simulate_scene(&s).unwrap();
    let b = simulate_scene(&s).unwrap();
    assert_eq!(a, b);
    let mut other = s.clone();
    other.seed = 100;
    assert_ne!(a, simulate_scene(&other).unwrap());
}

#[test]
fn counts_scale_linearly_with_duration() {
    let per_detector = |duration: f64, seed: u64| {
        let tags = simulate_scene(&reference_rate(seed, duration)).unwrap();
        Detector::ALL.map(|d| tags.iter().filter(|t| t.detector == d).count() as f64)
    };
    let short: Vec<[f64; 3]> = (0..20).map(|s| per_detector(2e7, s)).collect();
    let long: Vec<[f64; 3]> = (100..120).map(|s| per_detector(4e7, s)).collect();
    for d in 0..3 {
        let (ms, vs) = mean_var(&short.iter().map(|c| c[d]).collect::<Vec<_>>());
        let (ml, vl) = mean_var(&long.iter().map(|c| c[d]).collect::<Vec<_>>());
        let sigma = (vl / 20.0 + 4.0 * vs / 20.0).sqrt();
        assert!(
            (ml - 2.0 * ms).abs() < 3.0 * sigma,
            "detector {d}: {ml} vs 2 x {ms} (sigma {sigma})"
        );
    }
}

#[test]
fn balanced_branching_is_unbiased() {
    let e = EmitterParams::new(0.77, 0.05, 1.0).unwrap();
    let mut z: Vec<f64> = (0..60)
        .map(|seed| {
            let tags = simulate_scene(&SceneConfig::new(vec![e], 2e6, seed)).unwrap();
            let t = tags.iter().filter(|t| t.detector == Detector::T1).count() as f64;
            let r = tags.len() as f64 - t;
            (r - t) / (r + t).sqrt()
        })
        .collect();
    // Kolmogorov-Smirnov against N(0, 1) at alpha = 0.01.
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let phi = |x: f64| 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "KS distance {d}");
}

fn ps(times: &[f64]) -> Vec<u64> {
    times.iter().map(|t| (t * 1000.0).round() as u64).collect()
}

#[test]
fn single_emitter_is_antibunched() {
    let e = EmitterParams::new(0.8, 0.1, 1.0).unwrap();
    let s = SceneConfig::new(vec![e], 1e8, 8);
    let tags = simulate_scene(&s).unwrap();
    assert!(tags.len() >= 1_000_000);
    let r1 = channel_timestamps(&tags, Detector::R1);
    let r2 = channel_timestamps(&tags, Detector::R2);
    let curve = histogram_coincidences(&r1, &r2, &HistogramOptions::new(0.1, 5.0)).unwrap();
    let g0 = curve.normalized[curve.center()];
    assert!(g0 < 0.05, "g2(0) = {g0}");
    // Far from zero the curve has recovered.
    assert!((curve.normalized[0] - 1.0).abs() < 0.05);
}

#[test]
fn independent_emitters_are_uncorrelated() {
    let e = EmitterParams::new(0.77, 0.5, 1.0).unwrap();
    let a = ps(&simulate_emissions(&e, 1e7, 1).unwrap());
    let b = ps(&simulate_emissions(&e, 1e7, 2).unwrap());
    let curve = histogram_coincidences(&a, &b, &HistogramOptions::for_lifetime(0.77)).unwrap();
    for (lag, g) in curve.lags_ns.iter().zip(&curve.normalized) {
        assert!((g - 1.0).abs() < 0.05, "lag {lag}: {g}");
    }
}

#[test]
fn two_equal_emitters_give_half_by_pair_counting() {
    let e = EmitterParams::new(0.77, 1.0, 1.0).unwrap();
    let mut s = SceneConfig::new(vec![e, e], 1e9, 5);
    s.split = qrng_core::SplitParams::new(1.0).unwrap();
    // Enough time for 30 000 events per reflection detector.
    let rate = 2.0 * e.emission_rate_per_ns() * 0.5;
    s.duration_ns = 30_000.0 / rate;
    let tags = simulate_scene(&s).unwrap();
    let a = channel_timestamps(&tags, Detector::R1);
    let b = channel_timestamps(&tags, Detector::R2);
    // All pairs, no windowing tricks.
    let half_ps = 50i64;
    let mut zero = 0u64;
    for &ta in &a {
        for &tb in &b {
            let l = tb as i64 - ta as i64;
            if l.abs() < half_ps {
                zero += 1;
            }
        }
    }
    let t = s.duration_ns;
    let norm = a.len() as f64 * b.len() as f64 * 0.1 / t;
    let g = zero as f64 / norm;
    // Bin average of 1 - e^{-k|tau|} / 2 over |tau| < 0.05 ns.
    let k = 1.0 / e.recovery_time_ns();
    let h = 0.05;
    let model = 1.0 - 0.5 * (1.0 - (-k * h).exp()) / (k * h);
    let sigma = (zero as f64).sqrt() / norm;
    assert!((g - model).abs() < 4.0 * sigma, "g {g}, model {model}, sigma {sigma}");
    assert!((model - 0.5).abs() < 0.03);
}
