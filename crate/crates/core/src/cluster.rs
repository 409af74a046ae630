//! The clustering step applied inside every latent cover element.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{self, PointCloud};
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq)]
pub enum Clusterer {
    /// Lloyd's algorithm from a seeded k-means++ start.
    KMeans { k: usize, max_iter: usize, seed: u64 },
    /// Connected components of the graph joining points at distance `<= threshold`.
    SingleLinkage { threshold: f64 },
}

impl Clusterer {
    pub fn kmeans(k: usize, max_iter: usize, seed: u64) -> Result<Self> {
        if k == 0 || max_iter == 0 {
            return Err(Error::invalid("k-means needs k >= 1 and max_iter >= 1"));
        }
        Ok(Clusterer::KMeans { k, max_iter, seed })
    }

    pub fn single_linkage(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid(format!(
                "linkage threshold {threshold} must be positive"
            )));
        }
        Ok(Clusterer::SingleLinkage { threshold })
    }

    /// Partition `members` (indices into `cloud`). Each returned cluster is
    /// sorted, and clusters are ordered by their smallest member.
    pub fn cluster(&self, cloud: &PointCloud, members: &[usize]) -> Result<Vec<Vec<usize>>> {
        if members.is_empty() {
            return Err(Error::invalid("cannot cluster an empty member set"));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= cloud.len()) {
            return Err(Error::invalid(format!(
                "member index {bad} out of range for {} points",
                cloud.len()
            )));
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let labels = match *self {
            Clusterer::KMeans { k, max_iter, seed } => {
                kmeans_labels(cloud, &sorted, k, max_iter, seed)
            }
            Clusterer::SingleLinkage { threshold } => linkage_labels(cloud, &sorted, threshold),
        };
        Ok(group_by_label(&sorted, &labels))
    }
}

/// Single-linkage clusterer whose threshold is `factor` times the Hausdorff
/// distance between the cloud and a random subsample of it.
pub fn threshold_from_hausdorff(
    cloud: &PointCloud,
    fraction: f64,
    factor: f64,
    seed: u64,
) -> Result<Clusterer> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid("threshold factor must be positive"));
    }
    let h = cloud::hausdorff_to_subsample(cloud, fraction, seed)?;
    Clusterer::single_linkage(factor * h)
}

fn group_by_label(sorted: &[usize], labels: &[usize]) -> Vec<Vec<usize>> {
    let mut slot = vec![usize::MAX; labels.iter().max().map_or(0, |m| m + 1)];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (&i, &l) in sorted.iter().zip(labels) {
        if slot[l] == usize::MAX {
            slot[l] = out.len();
            out.push(Vec::new());
        }
        out[slot[l]].push(i);
    }
    out
}

fn linkage_labels(cloud: &PointCloud, members: &[usize], threshold: f64) -> Vec<usize> {
    let m = members.len();
    // sweep along the first coordinate: pairs further apart than `threshold`
    // along it cannot be linked
    let mut order: Vec<usize> = (0..m).collect();
    let key = |a: usize| cloud.point(members[a])[0];
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mut uf = UnionFind::new(m);
    for (pos, &a) in order.iter().enumerate() {
        let pa = cloud.point(members[a]);
        for &b in &order[pos + 1..] {
            let pb = cloud.point(members[b]);
            if pb[0] - pa[0] > threshold {
                break;
            }
            if cloud::euclidean(pa, pb) <= threshold {
                uf.union(a, b);
            }
        }
    }
    (0..m).map(|a| uf.find(a)).collect()
}

fn squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    // strict `<` keeps ties on the lowest centroid index
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_labels(
    cloud: &PointCloud,
    members: &[usize],
    k: usize,
    max_iter: usize,
    seed: u64,
) -> Vec<usize> {
    let m = members.len();
    if m <= k {
        return (0..m).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(cloud.point(members[rng.random_range(0..m)]).to_vec());
    let mut dist: Vec<f64> = members
        .iter()
        .map(|&i| squared(cloud.point(i), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (a, &d) in dist.iter().enumerate() {
                if target < d {
                    chosen = a;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        let c = cloud.point(members[pick]).to_vec();
        for (a, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared(cloud.point(members[a]), &c));
        }
        centroids.push(c);
    }

    let dim = cloud.dim();
    let mut labels = vec![usize::MAX; m];
    for _ in 0..max_iter {
        let mut changed = false;
        for (a, &i) in members.iter().enumerate() {
            let (c, _) = nearest(cloud.point(i), &centroids);
            if labels[a] != c {
                labels[a] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, &i) in members.iter().enumerate() {
            counts[labels[a]] += 1;
            for (s, x) in sums[labels[a]].iter_mut().zip(cloud.point(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its previous centroid
            if counts[c] > 0 {
                for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
    }
    labels
}
