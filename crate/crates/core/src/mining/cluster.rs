//! Deterministic k-means over standardized ratio vectors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MiningError;
use crate::scoring::RatioVector;

pub const MAX_ITERATIONS: usize = 100;

/// Per-feature centring and scaling. Constant features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

impl Standardization {
    pub fn fit(points: &[Vec<f64>]) -> Self {
        let d = points.first().map_or(0, Vec::len);
        let n = points.len() as f64;
        let mut mean = vec![0.0; d];
        for p in points {
            for (m, x) in mean.iter_mut().zip(p) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for p in points {
            for ((v, x), m) in var.iter_mut().zip(p).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std_dev = var.iter().map(|v| (v / n).sqrt()).collect();
        Standardization { mean, std_dev }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.mean)
            .zip(&self.std_dev)
            .map(|((x, m), s)| if *s > 0.0 { (x - m) / s } else { x - m })
            .collect()
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares after every assignment and every
    /// centroid update, in order.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(0.0)
    }
}

fn objective(points: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l]))
        .sum()
}

/// Farthest-point seeding: the first centre is drawn from `seed`, each
/// following one is the point farthest from all centres chosen so far.
pub fn farthest_point_seeds(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut min_d: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let mut best = 0;
        for (i, d) in min_d.iter().enumerate() {
            if *d > min_d[best] {
                best = i;
            }
        }
        chosen.push(best);
        for (m, p) in min_d.iter_mut().zip(points) {
            *m = m.min(squared_distance(p, &points[best]));
        }
    }
    chosen
}

/// Lloyd iterations until assignments stop changing or
/// [`MAX_ITERATIONS`] is reached. Empty clusters keep their centroid. The
/// returned labels always point at the nearest returned centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit, MiningError> {
    if points.is_empty() {
        return Err(MiningError::Config("cannot cluster an empty corpus".into()));
    }
    if k == 0 || k > points.len() {
        return Err(MiningError::Config(format!(
            "k = {k} must be between 1 and the number of firm-periods ({})",
            points.len()
        )));
    }
    let d = points[0].len();
    if points
        .iter()
        .any(|p| p.len() != d || p.iter().any(|x| !x.is_finite()))
    {
        return Err(MiningError::Config(
            "points must be finite and share one dimension".into(),
        ));
    }

    let mut centroids: Vec<Vec<f64>> = farthest_point_seeds(points, k, seed)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        history.push(objective(points, &next, &centroids));
        if next == labels {
            break;
        }
        labels = next;
        iterations += 1;

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if *n > 0 {
                *c = s.into_iter().map(|v| v / *n as f64).collect();
            }
        }
        history.push(objective(points, &labels, &centroids));
    }
    if iterations == MAX_ITERATIONS {
        labels = points.iter().map(|p| nearest(p, &centroids)).collect();
        history.push(objective(points, &labels, &centroids));
    }
    Ok(KMeansFit {
        centroids,
        labels,
        objective_history: history,
        iterations,
    })
}

/// Clustering of firm-periods by their standardized Altman ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<[f64; 5]>,
    /// firm-period key -> cluster index
    pub assignments: BTreeMap<String, usize>,
    pub standardization: Standardization,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest-centroid assignment for a firm-period outside the corpus.
    pub fn assign(&self, ratios: &RatioVector) -> usize {
        let p = self.standardization.apply(&ratios.to_array());
        let centroids: Vec<Vec<f64>> = self.centroids.iter().map(|c| c.to_vec()).collect();
        nearest(&p, &centroids)
    }

    pub fn cluster_of(&self, key: &str) -> Option<usize> {
        self.assignments.get(key).copied()
    }
}

pub fn cluster(
    firms: &[(String, RatioVector)],
    k: usize,
    seed: u64,
) -> Result<ClusterModel, MiningError> {
    let raw: Vec<Vec<f64>> = firms.iter().map(|(_, r)| r.to_array().to_vec()).collect();
    if raw.iter().flatten().any(|x| !x.is_finite()) {
        return Err(MiningError::Config("ratio vectors must be finite".into()));
    }
    let standardization = Standardization::fit(&raw);
    let points: Vec<Vec<f64>> = raw.iter().map(|p| standardization.apply(p)).collect();
    let fit = kmeans(&points, k, seed)?;
    let mut assignments = BTreeMap::new();
    for ((key, _), label) in firms.iter().zip(&fit.labels) {
        if assignments.insert(key.clone(), *label).is_some() {
            return Err(MiningError::Config(format!(
                "duplicate firm-period {key:?}"
            )));
        }
    }
    Ok(ClusterModel {
        centroids: fit
            .centroids
            .iter()
            .map(|c| [c[0], c[1], c[2], c[3], c[4]])
            .collect(),
        assignments,
        standardization,
        objective_history: fit.objective_history,
        iterations: fit.iterations,
    })
}
