use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softmapper::cover::{self, log_prob, uniform_cover, CoverAssignment};
use softmapper::mapper::map_comp;
use softmapper::optimize::{build_scheme, risk_samples};
use softmapper::persistence::graph_loss_and_subgradient;
use softmapper::{
    Clusterer, FilterFamily, FilterParams, LinearFilter, OptimConfig, PersistenceMode, PointCloud,
    SchemeChoice,
};

fn small_problem() -> (PointCloud, FilterParams, Clusterer, OptimConfig) {
    let cloud = PointCloud::from_rows(&[
        vec![0.0, 0.0],
        vec![0.3, 0.2],
        vec![0.75, -0.2],
        vec![1.0, 0.1],
    ])
    .unwrap();
    let config = OptimConfig {
        resolution: 2,
        gain: 0.3,
        delta_rel: 0.4,
        scheme: SchemeChoice::Smooth,
        mode: PersistenceMode::Extended,
        ..OptimConfig::default()
    };
    (
        cloud,
        FilterParams::new(vec![1.0, 0.0]).unwrap(),
        Clusterer::single_linkage(0.45).unwrap(),
        config,
    )
}

fn exact_risk(
    cloud: &PointCloud,
    params: &FilterParams,
    clusterer: &Clusterer,
    config: &OptimConfig,
) -> f64 {
    let fv = LinearFilter.evaluate(cloud, params).unwrap();
    let scheme = build_scheme(&fv.values, config).unwrap();
    let (n, r) = (cloud.len(), config.resolution);
    let mut risk = 0.0;
    let mut mass = 0.0;
    for code in 0u32..1 << (n * r) {
        let bits = (0..n * r).map(|b| code >> b & 1 == 1).collect();
        let e = CoverAssignment::new(n, r, bits).unwrap();
        let w = log_prob(&scheme, &e).unwrap().exp();
        mass += w;
        if w > 0.0 {
            let graph = map_comp(cloud, &e, clusterer).unwrap();
            risk += w * graph_loss_and_subgradient(&graph, &fv, config.mode).unwrap().0;
        }
    }
    assert!((mass - 1.0).abs() < 1e-12);
    risk
}

#[test]
fn sample_mean_is_unbiased() {
    let (cloud, params, clusterer, mut config) = small_problem();
    let exact = exact_risk(&cloud, &params, &clusterer, &config);
    config.mc_samples = 20_000;
    for seed in 0..3 {
        config.seed = seed;
        let losses = risk_samples(&cloud, &LinearFilter, &params, &clusterer, &config).unwrap();
        let m = losses.len() as f64;
        let mean = losses.iter().sum::<f64>() / m;
        let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        assert!(se > 0.0);
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }
}

#[test]
fn tiny_delta_reproduces_the_standard_cover() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let values: Vec<f64> = (0..500).map(|_| rng.random_range(-3.0..5.0)).collect();
    let config = OptimConfig {
        delta_rel: 1e-12,
        ..OptimConfig::default()
    };
    let cov = uniform_cover(&values, config.resolution, config.gain).unwrap();
    let scheme = build_scheme(&values, &config).unwrap();
    let range = 8.0;
    for seed in 0..5 {
        let e = cover::sample(&scheme, seed);
        for (i, &v) in values.iter().enumerate() {
            let clear = cov
                .intervals
                .iter()
                .all(|&(a, b)| (v - a).abs() >= 1e-6 * range && (v - b).abs() >= 1e-6 * range);
            if clear {
                for j in 0..cov.resolution() {
                    assert_eq!(e.get(i, j), cov.contains(j, v));
                }
            }
        }
    }
}
