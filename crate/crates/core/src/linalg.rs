//! Dense linear algebra used across the pipeline.
//!
//! Hand-rolled on purpose: the matrices involved are small (subspace and
//! backend dimensions of a few hundred at most) and avoiding a BLAS/LAPACK
//! backend keeps every result bit-reproducible across runs and thread
//! counts.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Returns `None` when a non-positive pivot is hit.
pub fn cholesky(a: ArrayView2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solves `L x = b` with `L` lower triangular.
pub fn solve_lower(l: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `L' x = b` with `L` lower triangular (so `L'` upper).
pub fn solve_lower_t(l: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `A x = b` given the Cholesky factor `L` of `A`.
pub fn cholesky_solve(l: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let y = solve_lower(l, b);
    solve_lower_t(l, y.view())
}

/// Solves `A X = B` column-wise given the Cholesky factor of `A`.
pub fn cholesky_solve_multi(l: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let mut x = Array2::<f64>::zeros(b.raw_dim());
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        x.column_mut(j).assign(&cholesky_solve(l, col));
    }
    x
}

/// Cholesky factor of an SPD matrix with a single jitter retry.
///
/// On failure the diagonal gets bumped by `1e-8 * trace / n` once; a second
/// failure is the caller's error (`map_err` to a context-specific variant).
pub fn cholesky_jittered(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    if let Some(l) = cholesky(a) {
        return Ok(l);
    }
    let n = a.nrows();
    let jitter = 1e-8 * a.diag().sum() / n as f64;
    let mut bumped = a.to_owned();
    for i in 0..n {
        bumped[[i, i]] += jitter;
    }
    cholesky(bumped.view()).ok_or_else(|| Error::Singular(format!("{n}x{n} system not positive-definite after jitter retry")))
}

/// Inverse of a lower-triangular matrix.
pub fn invert_lower(l: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        inv[[j, j]] = 1.0 / l[[j, j]];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s += l[[i, k]] * inv[[k, j]];
            }
            inv[[i, j]] = -s / l[[i, i]];
        }
    }
    inv
}

/// Inverse of an SPD matrix via its Cholesky factor, symmetrized.
pub fn spd_inverse(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let l = cholesky_jittered(a)?;
    let linv = invert_lower(l.view());
    let mut inv = linv.t().dot(&linv);
    symmetrize(&mut inv);
    Ok(inv)
}

/// `log det A` for SPD `A`, via Cholesky.
pub fn spd_log_det(a: ArrayView2<f64>) -> Result<f64> {
    let l = cholesky_jittered(a)?;
    Ok(2.0 * l.diag().iter().map(|d| d.ln()).sum::<f64>())
}

/// Averages a matrix with its transpose in place.
pub fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted descending
/// (ties broken by original index) and each eigenvector's
/// largest-magnitude entry made positive, so results are deterministic.
pub fn sym_eigen(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut m = a.to_owned();
    symmetrize(&mut m);
    let mut v = Array2::<f64>::eye(n);

    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        let scale = m.diag().iter().map(|d| d * d).sum::<f64>() + 2.0 * off;
        if off <= 1e-30 * (scale + f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                // Jacobi rotation zeroing m[p,q].
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[[j, j]].partial_cmp(&m[[i, i]]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    let mut vals = Array1::<f64>::zeros(n);
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = m[[src, src]];
        vecs.column_mut(dst).assign(&v.column(src));
    }
    fix_signs(&mut vecs);
    (vals, vecs)
}

/// Flips each column so its largest-magnitude entry is positive
/// (ties broken by the first such entry).
pub fn fix_signs(vecs: &mut Array2<f64>) {
    for mut col in vecs.axis_iter_mut(Axis(1)) {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

/// Frobenius norm.
pub fn fro_norm(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Numerically stable `log(sum(exp(x)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn random_spd(n: usize, seed: u64) -> Array2<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        let mut a = g.t().dot(&g);
        for i in 0..n {
            a[[i, i]] += n as f64;
        }
        a
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = random_spd(8, 1);
        let l = cholesky(a.view()).unwrap();
        let r = l.dot(&l.t());
        let err = fro_norm((&r - &a).view());
        assert!(err < 1e-10, "err={err}");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(a.view()).is_none());
    }

    #[test]
    fn solve_matches_residual() {
        let a = random_spd(6, 2);
        let b = Array1::from_shape_fn(6, |i| (i as f64 + 1.0).sin());
        let l = cholesky(a.view()).unwrap();
        let x = cholesky_solve(l.view(), b.view());
        let r = &a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn lower_inverse() {
        let a = random_spd(5, 3);
        let l = cholesky(a.view()).unwrap();
        let linv = invert_lower(l.view());
        let eye = l.dot(&linv);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((eye[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_reconstructs_and_sorts() {
        let a = random_spd(10, 4);
        let (vals, vecs) = sym_eigen(a.view());
        for w in vals.as_slice().unwrap().windows(2) {
            assert!(w[0] >= w[1]);
        }
        let lam = Array2::from_diag(&vals);
        let r = vecs.dot(&lam).dot(&vecs.t());
        assert!(fro_norm((&r - &a).view()) < 1e-9);
        // orthonormal columns
        let g = vecs.t().dot(&vecs);
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigen_known_2x2() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, _) = sym_eigen(a.view());
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jitter_recovers_semidefinite() {
        // rank-deficient PSD matrix; plain cholesky fails, jittered succeeds
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(cholesky(a.view()).is_none());
        let l = cholesky_jittered(a.view()).unwrap();
        assert!(l[[0, 0]] > 0.0);
    }

    #[test]
    fn log_det_matches_eigen() {
        let a = random_spd(7, 5);
        let (vals, _) = sym_eigen(a.view());
        let want: f64 = vals.iter().map(|v| v.ln()).sum();
        let got = spd_log_det(a.view()).unwrap();
        assert!((want - got).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_stable() {
        let v = vec![1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2.0f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
