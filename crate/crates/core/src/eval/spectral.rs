//! Spectral clustering over the pairwise-distance affinity kernel.
//!
//! Pipeline: RBF-style affinity from the embedding distance, symmetric
//! normalized Laplacian `L = I - D^{-1/2} A D^{-1/2}`, eigenvectors of the k
//! smallest eigenvalues, row-normalized spectral embedding, seeded k-means.
//!
//! Below `dense_threshold` points the eigenproblem is solved by a dense
//! symmetric decomposition; above it a Lanczos iteration with full
//! reorthogonalization extracts the needed eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::MatrixEmbedding;
use crate::scalar::Scalar;
use crate::similarity::{sq_sum, squared_distance_cached, ColumnSum};

use super::kmeans::{kmeans, KMeansOptions};

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    /// Kernel coefficient of `exp(-gamma * dist^2)`.
    pub gamma: f64,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    /// Point count at or below which the dense eigensolver is used.
    pub dense_threshold: usize,
    /// Ritz residual tolerance for the iterative path.
    pub lanczos_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            gamma: 0.001,
            seed: 1,
            kmeans_restarts: 10,
            kmeans_max_iter: 300,
            dense_threshold: 5000,
            lanczos_tol: 1e-8,
        }
    }
}

/// Clusters embeddings into `k` groups. All inputs must share one shape.
pub fn spectral_cluster<T: Scalar>(
    embeddings: &[MatrixEmbedding<T>],
    k: usize,
    opts: &SpectralOptions,
) -> Result<Vec<usize>> {
    let n = embeddings.len();
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if !(opts.gamma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "kernel coefficient must be positive, got {}",
            opts.gamma
        )));
    }
    let (p, r) = (embeddings[0].rows(), embeddings[0].cols());
    for m in embeddings {
        if m.rows() != p || m.cols() != r {
            return Err(Error::shape(
                "spectral clustering embeddings must share one shape",
                format!("{p}x{r}"),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
    }
    let affinity = affinity_matrix(embeddings, opts.gamma);
    spectral_cluster_affinity(&affinity, n, k, opts)
}

/// Dense symmetric pairwise affinity, row-major `n x n`, diagonal included.
pub fn affinity_matrix<T: Scalar>(embeddings: &[MatrixEmbedding<T>], gamma: f64) -> Vec<f64> {
    let n = embeddings.len();
    let r = if n > 0 { embeddings[0].cols() } else { 1 };
    let cache: Vec<(ColumnSum<T>, T)> = embeddings
        .iter()
        .map(|m| (ColumnSum::of(m), sq_sum(m.as_slice())))
        .collect();
    let mut affinity = vec![0.0f64; n * n];
    affinity.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let (si, qi) = &cache[i];
        for (j, slot) in row.iter_mut().enumerate() {
            let (sj, qj) = &cache[j];
            let d = squared_distance_cached(si.as_slice(), *qi, sj.as_slice(), *qj, r)
                .to_f64()
                .unwrap_or(f64::INFINITY);
            *slot = (-gamma * d).exp();
        }
    });
    // enforce exact symmetry against floating-point asymmetries
    for i in 0..n {
        for j in (i + 1)..n {
            let v = affinity[i * n + j];
            affinity[j * n + i] = v;
        }
    }
    affinity
}

/// Clusters from a precomputed symmetric affinity matrix (row-major
/// `n x n`, nonnegative entries).
pub fn spectral_cluster_affinity(
    affinity: &[f64],
    n: usize,
    k: usize,
    opts: &SpectralOptions,
) -> Result<Vec<usize>> {
    if affinity.len() != n * n {
        return Err(Error::shape("affinity matrix size", n * n, affinity.len()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if k == 1 {
        return Ok(vec![0; n]);
    }
    if k == n {
        return Ok((0..n).collect());
    }

    // Rows whose degree is zero cannot enter the normalized Laplacian; they
    // are clustered afterwards via their nearest (highest-affinity) live row.
    let degrees: Vec<f64> = (0..n)
        .map(|i| affinity[i * n..(i + 1) * n].iter().sum())
        .collect();
    let live: Vec<usize> = (0..n).filter(|&i| degrees[i] > 0.0).collect();
    let isolated: Vec<usize> = (0..n).filter(|&i| degrees[i] <= 0.0).collect();
    if !isolated.is_empty() {
        log::warn!(
            "{} affinity rows are all-zero; assigning them to their nearest live row",
            isolated.len()
        );
    }
    let m = live.len();
    if m < k {
        return Err(Error::DegenerateInput(format!(
            "only {m} points have nonzero affinity degree but k={k}"
        )));
    }

    // normalized adjacency W = D^{-1/2} A D^{-1/2} over live rows;
    // eigenvectors of the k smallest eigenvalues of L = I - W are the
    // eigenvectors of the k largest eigenvalues of W
    let inv_sqrt: Vec<f64> = live.iter().map(|&i| 1.0 / degrees[i].sqrt()).collect();
    let w = |a: usize, b: usize| affinity[live[a] * n + live[b]] * inv_sqrt[a] * inv_sqrt[b];

    let spectral: Vec<f64> = if m <= opts.dense_threshold {
        dense_top_k(&w, m, k)
    } else {
        lanczos_top_k(&w, m, k, opts.lanczos_tol, 10 * m, opts.seed)
    };

    // row-normalize the m x k spectral embedding
    let mut rows = spectral;
    for row in rows.chunks_exact_mut(k) {
        let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row {
                *x /= norm;
            }
        }
    }

    let km_opts = KMeansOptions {
        restarts: opts.kmeans_restarts,
        max_iter: opts.kmeans_max_iter,
        seed: opts.seed,
    };
    let live_labels = kmeans(&rows, m, k, k, &km_opts);

    let mut labels = vec![usize::MAX; n];
    for (pos, &i) in live.iter().enumerate() {
        labels[i] = live_labels[pos];
    }
    for &i in &isolated {
        let nearest = live
            .iter()
            .copied()
            .max_by(|&a, &b| {
                affinity[i * n + a]
                    .partial_cmp(&affinity[i * n + b])
                    .unwrap()
            })
            .expect("at least one live row");
        labels[i] = labels[nearest];
    }
    Ok(labels)
}

/// Dense path: full symmetric eigendecomposition, keep the top-k
/// eigenvectors of W as the n x k spectral embedding (row-major).
fn dense_top_k(w: &(dyn Fn(usize, usize) -> f64 + Sync), m: usize, k: usize) -> Vec<f64> {
    let mat = DMatrix::from_fn(m, m, w);
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut out = vec![0.0f64; m * k];
    for (col, &idx) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(idx);
        for row in 0..m {
            out[row * k + col] = v[row];
        }
    }
    out
}

/// Iterative path: Lanczos with full reorthogonalization on W, returning the
/// Ritz vectors of the k largest Ritz values once their residuals fall under
/// `tol` (or the matvec budget runs out, keeping the best available).
///
/// Breakdown (an invariant subspace smaller than needed, e.g. from eigenvalue
/// multiplicities) is handled by injecting a fresh random direction
/// orthogonal to the basis; the tridiagonal matrix then becomes block
/// diagonal, which the dense solve of T handles transparently.
fn lanczos_top_k(
    w: &(dyn Fn(usize, usize) -> f64 + Sync),
    m: usize,
    k: usize,
    tol: f64,
    max_matvecs: usize,
    seed: u64,
) -> Vec<f64> {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let matvec = |x: &[f64], out: &mut [f64]| {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (j, &xj) in x.iter().enumerate() {
                acc += w(i, j) * xj;
            }
            *o = acc;
        });
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ab_c0de);
    let cap = m.min((4 * k + 40).max(120));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new(); // beta[i] couples basis[i] and basis[i+1]
    let mut matvecs = 0usize;

    let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthonormalize(&mut v, &basis);

    loop {
        let mut work = vec![0.0f64; m];
        matvec(&v, &mut work);
        matvecs += 1;
        if let (Some(&b), Some(prev)) = (beta.last(), basis.last()) {
            for (wi, pi) in work.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        let a: f64 = work.iter().zip(&v).map(|(x, y)| x * y).sum();
        for (wi, vi) in work.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        alpha.push(a);
        basis.push(v);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for u in &basis {
                let c: f64 = work.iter().zip(u).map(|(x, y)| x * y).sum();
                if c != 0.0 {
                    for (wi, ui) in work.iter_mut().zip(u) {
                        *wi -= c * ui;
                    }
                }
            }
        }
        let b = work.iter().map(|x| x * x).sum::<f64>().sqrt();

        let dim = alpha.len();
        let out_of_budget = dim == cap || dim == m || matvecs >= max_matvecs;
        let breakdown = b < 1e-12;
        // A breakdown never ends the iteration by itself: the exhausted
        // invariant subspace may hold fewer copies of a degenerate top
        // eigenvalue than needed, and only the restart below can find the
        // rest. The basis cap bounds the total work either way.
        let done = if out_of_budget {
            if dim >= k && !ritz_converged(&alpha, &beta, b, k, tol) {
                log::warn!("lanczos stopped at {matvecs} matvecs without reaching tol {tol:e}");
            }
            true
        } else {
            !breakdown
                && dim >= 2 * k + 2
                && dim.is_multiple_of(4)
                && ritz_converged(&alpha, &beta, b, k, tol)
        };
        if done {
            return extract_ritz(&alpha, &beta, &basis, m, k);
        }

        if breakdown {
            // invariant subspace exhausted: restart in its orthogonal complement
            v = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            orthonormalize(&mut v, &basis);
            beta.push(0.0);
        } else {
            let inv = 1.0 / b;
            for x in &mut work {
                *x *= inv;
            }
            v = work;
            beta.push(b);
        }
    }
}

fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in basis {
            let c: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
            if c != 0.0 {
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let inv = if norm > 0.0 { 1.0 / norm } else { 1.0 };
    for x in v.iter_mut() {
        *x *= inv;
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let dim = alpha.len();
    let mut t = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        t[(i, i)] = alpha[i];
        if i + 1 < dim {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
}

fn top_order(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    order
}

fn ritz_converged(alpha: &[f64], beta: &[f64], b_last: f64, k: usize, tol: f64) -> bool {
    let dim = alpha.len();
    if dim < k {
        return false;
    }
    let eig = tridiagonal_eigen(alpha, &beta[..dim - 1]);
    top_order(&eig).iter().take(k).all(|&i| {
        let resid = b_last * eig.eigenvectors[(dim - 1, i)].abs();
        resid <= tol * eig.eigenvalues[i].abs().max(1.0)
    })
}

fn extract_ritz(alpha: &[f64], beta: &[f64], basis: &[Vec<f64>], m: usize, k: usize) -> Vec<f64> {
    let dim = alpha.len();
    let eig = tridiagonal_eigen(alpha, &beta[..dim - 1]);
    let order = top_order(&eig);
    let mut out = vec![0.0f64; m * k];
    for (col, &idx) in order.iter().take(k).enumerate() {
        let s = eig.eigenvectors.column(idx);
        for (j, u) in basis.iter().enumerate() {
            let c = s[j];
            if c != 0.0 {
                for row in 0..m {
                    out[row * k + col] += c * u[row];
                }
            }
        }
    }
    out
}
