//! Seeded k-means (k-means++ initialization, Lloyd iterations, restarts)
//! over row vectors; used on the spectral embedding.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: 10,
            max_iter: 300,
            seed: 1,
        }
    }
}

/// Clusters `n` points of dimension `dim` (row-major buffer) into `k`
/// groups, returning the assignment with the best inertia over restarts.
pub fn kmeans(points: &[f64], n: usize, dim: usize, k: usize, opts: &KMeansOptions) -> Vec<usize> {
    assert!(k >= 1 && k <= n, "k must be in 1..=n");
    assert_eq!(points.len(), n * dim);
    if k == n {
        return (0..n).collect();
    }
    let mut best_labels = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let (labels, inertia) = lloyd(points, n, dim, k, opts.max_iter, &mut rng);
        if inertia < best_inertia {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    best_labels
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(
    points: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(&points[i * dim..(i + 1) * dim], &centers[..dim]))
        .collect();
    while centers.len() < k * dim {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c0 = centers.len();
        centers.extend_from_slice(&points[pick * dim..(pick + 1) * dim]);
        for i in 0..n {
            let d = sq_dist(&points[i * dim..(i + 1) * dim], &centers[c0..c0 + dim]);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

fn lloyd(
    points: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, f64) {
    let mut centers = plus_plus_init(points, n, dim, k, rng);
    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    for _ in 0..max_iter {
        // assignment
        let mut changed = false;
        let mut new_inertia = 0.0;
        for i in 0..n {
            let pt = &points[i * dim..(i + 1) * dim];
            let mut best = (f64::INFINITY, 0usize);
            for c in 0..k {
                let d = sq_dist(pt, &centers[c * dim..(c + 1) * dim]);
                if d < best.0 {
                    best = (d, c);
                }
            }
            new_inertia += best.0;
            if labels[i] != best.1 {
                labels[i] = best.1;
                changed = true;
            }
        }
        // update
        let mut counts = vec![0usize; k];
        centers.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            for (acc, &x) in centers[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(&points[i * dim..(i + 1) * dim])
            {
                *acc += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // reseed an empty cluster at the point farthest from its center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(
                            &points[a * dim..(a + 1) * dim],
                            &centers[labels[a] * dim..(labels[a] + 1) * dim],
                        );
                        let db = sq_dist(
                            &points[b * dim..(b + 1) * dim],
                            &centers[labels[b] * dim..(labels[b] + 1) * dim],
                        );
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap_or(0);
                centers[c * dim..(c + 1) * dim]
                    .copy_from_slice(&points[far * dim..(far + 1) * dim]);
            } else {
                let inv = 1.0 / counts[c] as f64;
                for x in &mut centers[c * dim..(c + 1) * dim] {
                    *x *= inv;
                }
            }
        }
        inertia = new_inertia;
        if !changed {
            break;
        }
    }
    (labels, inertia)
}
