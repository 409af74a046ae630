use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softmapper::cloud::{hausdorff_to_subsample, hausdorff_to_subset, subsample_indices};
use softmapper::cover::{self, uniform_cover};
use softmapper::mapper::map_comp;
use softmapper::persistence::{extended_persistence, map_pers_filtration};
use softmapper::{Clusterer, PointClass, PointCloud};

fn brute_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = |x: &Vec<f64>, y: &Vec<f64>| -> f64 {
        x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    };
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|x| to.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[test]
fn hausdorff_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    for seed in 0..10 {
        let fraction = 0.05 + 0.09 * seed as f64;
        let idx = subsample_indices(100, fraction, seed).unwrap();
        let subset: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let expected = brute_hausdorff(&rows, &subset);
        assert_eq!(hausdorff_to_subset(&cloud, &idx).unwrap(), expected);
        assert_eq!(hausdorff_to_subsample(&cloud, fraction, seed).unwrap(), expected);
    }
}

#[test]
fn circle_mapper_has_one_long_loop() {
    // evenly spaced angles: with random angles some overlap regions are empty
    // and the nerve breaks the loop
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 200.0 + 0.01;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let height: Vec<f64> = rows.iter().map(|p| p[1]).collect();
    let cov = uniform_cover(&height, 10, 0.3).unwrap();
    let e = cover::sample(&cover::standard_scheme(&height, &cov).unwrap(), 0);
    let graph = map_comp(&cloud, &e, &Clusterer::single_linkage(0.5).unwrap()).unwrap();
    assert_eq!(graph.connected_components().len(), 1);
    assert_eq!(graph.betti_1(), 1);

    let dgm = extended_persistence(&map_pers_filtration(&graph, &height).unwrap());
    let loops: Vec<(f64, f64)> = dgm.pairs(PointClass::Ext1);
    assert_eq!(loops.len(), 1);
    assert!((loops[0].0 - loops[0].1).abs() >= 1.0, "{loops:?}");
}
