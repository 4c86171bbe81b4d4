//! Classical clustering baselines: Lloyd's K-means with k-means++ seeding,
//! and K-medoids by PAM swap descent on the Euclidean distance matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SolveError, SolverConfig, SolverKind};
use crate::evaluation::Assignment;
use crate::profiles::{distance_matrix, euclidean, ProfileSet, SimilarityMatrix};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub max_iterations: usize,
    /// Independent seedings; the lowest-cost result is kept.
    pub restarts: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            restarts: 5,
        }
    }
}

pub fn baseline_cluster(
    p: &ProfileSet,
    n_groups: usize,
    cfg: &SolverConfig,
) -> Result<Assignment, SolveError> {
    match cfg.kind {
        SolverKind::KMeans => kmeans(p, n_groups, &cfg.baseline, cfg.seed),
        SolverKind::KMedoids => {
            let d = distance_matrix(p);
            kmedoids(&d, n_groups, &cfg.baseline, cfg.seed)
        }
        other => Err(SolveError::WrongKind {
            expected: SolverKind::KMeans,
            found: other,
        }),
    }
}

fn check_groups(n_groups: usize, n: usize, p: &BaselineParams) -> Result<(), SolveError> {
    if n_groups == 0 || n_groups > n {
        return Err(SolveError::BadGroupCount {
            groups: n_groups,
            profiles: n,
        });
    }
    if p.max_iterations == 0 || p.restarts == 0 {
        return Err(SolveError::InvalidSchedule(
            "max_iterations and restarts must be positive".into(),
        ));
    }
    Ok(())
}

/// D^2 seeding over an arbitrary point-to-point distance.
fn plus_plus_seeds(
    n: usize,
    k: usize,
    dist: impl Fn(usize, usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| dist(i, chosen[0]).powi(2)).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if chosen.contains(&pick) {
                // floating-point fallthrough; take the farthest point instead
                (0..n)
                    .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]))
                    .unwrap()
            } else {
                pick
            }
        } else {
            // every point coincides with a seed; take any unused index
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(pick);
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(dist(i, pick).powi(2));
        }
    }
    chosen
}

fn nearest_center(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(c, ctr)| (c, euclidean(point, ctr)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn kmeans_once(p: &ProfileSet, k: usize, max_iter: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let n = p.len();
    let seeds = plus_plus_seeds(n, k, |a, b| euclidean(p.profile(a), p.profile(b)), rng);
    let mut centers: Vec<Vec<f64>> = seeds.iter().map(|&s| p.profile(s).to_vec()).collect();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let (c, _) = nearest_center(p.profile(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let t = p.profile_len();
        let mut sums = vec![vec![0.0; t]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p.profile(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // re-seed an empty cluster at the point worst served by its center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = euclidean(p.profile(a), &centers[labels[a]]);
                        let db = euclidean(p.profile(b), &centers[labels[b]]);
                        da.total_cmp(&db)
                    })
                    .unwrap();
                centers[c] = p.profile(far).to_vec();
            }
        }
    }
    let inertia = (0..n)
        .map(|i| nearest_center(p.profile(i), &centers).1.powi(2))
        .sum();
    (inertia, labels)
}

pub fn kmeans(
    p: &ProfileSet,
    n_groups: usize,
    params: &BaselineParams,
    seed: u64,
) -> Result<Assignment, SolveError> {
    check_groups(n_groups, p.len(), params)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..params.restarts {
        let mut rng = rng(derive_seed(seed, "k-means", r as u64));
        let run = kmeans_once(p, n_groups, params.max_iterations, &mut rng);
        if best.as_ref().is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let (_, labels) = best.expect("restarts > 0");
    Ok(Assignment::new(labels, n_groups).expect("labels < n_groups"))
}

fn medoid_cost(d: &SimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..d.n())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| d.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn kmedoids_once(
    d: &SimilarityMatrix,
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<usize>) {
    let n = d.n();
    let mut medoids = plus_plus_seeds(n, k, |a, b| d.get(a, b), rng);
    let mut cost = medoid_cost(d, &medoids);
    for _ in 0..max_iter {
        let mut best_swap: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let old = medoids[slot];
                medoids[slot] = cand;
                let c = medoid_cost(d, &medoids);
                medoids[slot] = old;
                if best_swap.is_none_or(|b| c < b.0) {
                    best_swap = Some((c, slot, cand));
                }
            }
        }
        match best_swap {
            Some((c, slot, cand)) if c < cost - 1e-12 * (1.0 + cost.abs()) => {
                medoids[slot] = cand;
                cost = c;
            }
            _ => break,
        }
    }
    (cost, medoids)
}

/// PAM: seed medoids, then apply the best cost-reducing medoid swap until
/// none remains.
pub fn kmedoids(
    d: &SimilarityMatrix,
    n_groups: usize,
    params: &BaselineParams,
    seed: u64,
) -> Result<Assignment, SolveError> {
    check_groups(n_groups, d.n(), params)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..params.restarts {
        let mut rng = rng(derive_seed(seed, "k-medoids", r as u64));
        let run = kmedoids_once(d, n_groups, params.max_iterations, &mut rng);
        if best.as_ref().is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let (_, medoids) = best.expect("restarts > 0");
    let labels = (0..d.n())
        .map(|i| {
            // a medoid always belongs to its own group
            if let Some(slot) = medoids.iter().position(|&m| m == i) {
                return slot;
            }
            (0..n_groups)
                .min_by(|&a, &b| d.get(i, medoids[a]).total_cmp(&d.get(i, medoids[b])))
                .unwrap()
        })
        .collect();
    Ok(Assignment::new(labels, n_groups).expect("labels < n_groups"))
}
