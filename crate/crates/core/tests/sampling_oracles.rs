use riskopt::stats::{
    cov_pospart_oracle, f_quantile, jarque_bera, normal_cdf, normal_quantile, MomentSummary,
};
use riskopt::{
    avar_closed, bernoulli_vector_sample, truncnorm_cdf, truncnorm_sample, BernoulliVectorSpec,
    EmpiricalDistribution, RngStream, TruncNormalSpec,
};

fn case_distributions() -> Vec<TruncNormalSpec> {
    [
        (10.0, 1.0),
        (20.0, 1.0),
        (5.0, 1.0),
        (10.0, 25.0),
        (10.0, 49.0),
        (14.0, 0.25),
    ]
    .iter()
    .map(|&(m, s2)| TruncNormalSpec::new(m, s2, 0.0, 30.0).unwrap())
    .collect()
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn truncnorm_passes_kolmogorov_smirnov() {
    // 1% critical value of the one-sample KS statistic, large-n form.
    let n = 10_000;
    let crit = 1.6276 / (n as f64).sqrt();
    for (i, spec) in case_distributions().iter().enumerate() {
        for seed in [1u64, 2, 3] {
            let mut rng = RngStream::new(seed, i as u64);
            let xs = truncnorm_sample(spec, &mut rng, n);
            let d = ks_statistic(xs, |x| truncnorm_cdf(spec, x));
            assert!(d < crit, "spec {i} seed {seed}: D = {d}");
        }
    }
}

#[test]
fn truncnorm_moments_match_sample() {
    for (i, spec) in case_distributions().iter().enumerate() {
        let mut rng = RngStream::new(11, i as u64);
        let xs = spec.sample(&mut rng, 200_000);
        let m = MomentSummary::from_sample(&xs).unwrap();
        let se = (spec.variance() / xs.len() as f64).sqrt();
        assert!((m.mean - spec.mean()).abs() < 4.0 * se, "spec {i}");
        assert!(
            (m.variance / spec.variance() - 1.0).abs() < 0.02,
            "spec {i}"
        );
        let d = EmpiricalDistribution::new(xs).unwrap();
        let emp = avar_closed(&d, 0.9).unwrap();
        let exact = spec.avar(0.9).unwrap();
        // tail average of 20 000 draws
        let tol = 4.0 * spec.variance().sqrt() / (0.1 * d.len() as f64).sqrt();
        assert!((emp - exact).abs() < tol, "spec {i}: {emp} vs {exact}");
    }
}

#[test]
fn heavy_truncation_stays_in_support() {
    let spec = TruncNormalSpec::new(-20.0, 1.0, 0.0, 30.0).unwrap();
    let mut rng = RngStream::new(5, 0);
    let xs = spec.sample(&mut rng, 5000);
    assert!(xs.iter().all(|x| (0.0..=30.0).contains(x)));
    // mass concentrates near the lower edge with scale ~ 1/20
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!(mean < 0.1, "{mean}");
}

#[test]
fn bernoulli_vector_frequencies() {
    let psi = vec![0.0, 0.1, 0.5, 0.9, 1.0];
    let spec = BernoulliVectorSpec::new(psi.clone()).unwrap();
    let mut rng = RngStream::new(8, 0);
    let n = 50_000;
    let s = bernoulli_vector_sample(&spec, &mut rng, n);
    for (j, p) in psi.iter().enumerate() {
        let hits = s.iter_rows().filter(|r| r[j] == 1.0).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (hits - p).abs() <= 4.0 * se + 1e-12,
            "coordinate {j}: {hits}"
        );
    }
    assert!(s.as_slice().iter().all(|v| *v == 1.0 || *v == -1.0));
}

#[test]
fn normal_round_trip() {
    for p in [
        1e-6,
        1e-4,
        0.01,
        0.1,
        0.3,
        0.5,
        0.7,
        0.9,
        0.99,
        1.0 - 1e-4,
        1.0 - 1e-6,
    ] {
        let x = normal_quantile(p).unwrap();
        assert!((normal_cdf(x) - p).abs() < 1e-10 * p.max(1e-3), "p = {p}");
    }
}

#[test]
fn f_with_one_numerator_degree_is_squared_normal() {
    let f = f_quantile(0.95, 1, 1_000_000).unwrap();
    let z = normal_quantile(0.975).unwrap();
    assert!((f - z * z).abs() < 1e-2, "{f} vs {}", z * z);
}

#[test]
fn pospart_variance_oracle_matches_monte_carlo() {
    let n = 200_000;
    for (i, spec) in case_distributions().iter().enumerate() {
        for tau in [spec.mean(), spec.quantile(0.9).unwrap()] {
            let oracle = cov_pospart_oracle(|x| spec.cdf(x), tau, 30.0, 20_000).unwrap();
            let mut rng = RngStream::new(21, i as u64);
            let y: Vec<f64> = spec
                .sample(&mut rng, n)
                .into_iter()
                .map(|z| (z - tau).max(0.0))
                .collect();
            let m = MomentSummary::from_sample(&y).unwrap();
            // standard error of the sample variance: sqrt((mu4 - sigma^4) / n)
            let mean = m.mean;
            let mu4 = y.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n as f64;
            let se = ((mu4 - m.variance * m.variance) / n as f64).sqrt();
            assert!(
                (m.variance - oracle).abs() < 3.0 * se,
                "spec {i}, tau {tau}: mc {} oracle {oracle} se {se}",
                m.variance
            );
        }
    }
}

#[test]
fn jarque_bera_separates_normal_from_skewed() {
    let mut rng = RngStream::new(4, 0);
    let normal: Vec<f64> = (0..2000)
        .map(|_| normal_quantile(rng.uniform_open()).unwrap())
        .collect();
    assert!(jarque_bera(&normal).unwrap().p_value > 0.01);
    let skewed: Vec<f64> = normal.iter().map(|z| z.exp()).collect();
    assert!(jarque_bera(&skewed).unwrap().p_value < 1e-6);
}
