//! Dense linear algebra for small symmetric problems.
//!
//! EEG spatial filtering works on channel-space matrices of at most a few
//! dozen rows, so everything here is written for that regime: a cyclic
//! Jacobi eigensolver for symmetric matrices, Cholesky factorization with
//! triangular solves, LU solves for tiny systems, and a singular value
//! decomposition assembled from the Jacobi solver.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// eigenvectors are the columns of the returned matrix.
pub fn eigh_symmetric(matrix: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimMismatch {
            context: "eigh_symmetric",
            expected: "square matrix".into(),
            found: format!("[{}, {}]", n, matrix.ncols()),
        });
    }
    let mut a = matrix.clone();
    let mut v = Array2::eye(n);
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(1.0);

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[[p, q]] * a[[p, q]])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= tol * 1e-2 / (n as f64) {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[[p, p]];
                let aqq = a[[q, q]];
                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[[k, p]];
                        let akq = a[[k, q]];
                        a[[k, p]] = akp - s * (akq + tau * akp);
                        a[[p, k]] = a[[k, p]];
                        a[[k, q]] = akq + s * (akp - tau * akq);
                        a[[q, k]] = a[[k, q]];
                    }
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp - s * (vkq + tau * vkp);
                    v[[k, q]] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap());
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[[row, col]] = v[[row, i]];
        }
    }
    Ok((eigenvalues, eigenvectors))
}

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
pub fn cholesky(matrix: &Array2<f64>) -> Result<Array2<f64>> {
    let n = matrix.nrows();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::invalid(
                        "cholesky",
                        format!("matrix not positive definite at pivot {i} ({sum})"),
                    ));
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solve `L·x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let xk = x[k];
            x[i] -= l[[i, k]] * xk;
        }
        x[i] /= l[[i, i]];
    }
    x
}

/// Solve `Lᵀ·x = b` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let xk = x[k];
            x[i] -= l[[k, i]] * xk;
        }
        x[i] /= l[[i, i]];
    }
    x
}

/// Solve `A·x = b` via SPD Cholesky (`A = L·Lᵀ`).
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let l = cholesky(a)?;
    Ok(solve_lower_transpose(&l, &solve_lower(&l, b)))
}

/// Solve `A·x = b` by LU with partial pivoting; for tiny general systems.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().partial_cmp(&m[[j, col]].abs()).unwrap())
            .unwrap();
        if m[[pivot, col]].abs() < 1e-300 {
            return Err(Error::invalid("solve", format!("singular at column {col}")));
        }
        if pivot != col {
            for k in 0..n {
                m.swap((col, k), (pivot, k));
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = m[[row, col]] / m[[col, col]];
            for k in col..n {
                let v = m[[col, k]];
                m[[row, k]] -= factor * v;
            }
            let xc = x[col];
            x[row] -= factor * xc;
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let xk = x[k];
            x[i] -= m[[i, k]] * xk;
        }
        x[i] /= m[[i, i]];
    }
    Ok(x)
}

/// Generalized symmetric eigenproblem `S·w = λ·Q·w`.
///
/// `Q` is ridge-regularized with `ridge_scale·trace(Q)/n` on the diagonal and
/// Cholesky-reduced to a standard symmetric problem solved by Jacobi. Returns
/// eigenvalues (descending) and the matching eigenvectors as columns.
pub fn eigh_generalized(
    s: &Array2<f64>,
    q: &Array2<f64>,
    ridge_scale: f64,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = s.nrows();
    if q.nrows() != n || q.ncols() != n || s.ncols() != n {
        return Err(Error::DimMismatch {
            context: "eigh_generalized",
            expected: format!("two [{n}, {n}] matrices"),
            found: format!("S [{}, {}], Q [{}, {}]", s.nrows(), s.ncols(), q.nrows(), q.ncols()),
        });
    }
    let trace: f64 = (0..n).map(|i| q[[i, i]]).sum();
    let eps = ridge_scale * trace.max(f64::MIN_POSITIVE) / n as f64;
    let mut q_reg = q.clone();
    for i in 0..n {
        q_reg[[i, i]] += eps;
    }
    let l = cholesky(&q_reg)?;

    // M = L⁻¹ S L⁻ᵀ, formed column by column through triangular solves.
    let mut half = Array2::zeros((n, n));
    for j in 0..n {
        let col = solve_lower(&l, &s.column(j).to_owned());
        for i in 0..n {
            half[[i, j]] = col[i];
        }
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        let row = solve_lower(&l, &half.row(i).to_owned());
        for j in 0..n {
            m[[i, j]] = row[j];
        }
    }
    // symmetrize rounding noise
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }

    let (vals, y) = eigh_symmetric(&m)?;
    let mut vecs = Array2::zeros((n, n));
    for j in 0..n {
        let w = solve_lower_transpose(&l, &y.column(j).to_owned());
        for i in 0..n {
            vecs[[i, j]] = w[i];
        }
    }
    Ok((vals, vecs))
}

/// Thin SVD `M = U·diag(S)·Vᵀ` for small matrices.
///
/// Built on the Jacobi eigendecomposition of `MᵀM`; left vectors for
/// near-zero singular values are completed to an orthonormal set.
pub fn svd_small(m: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mtm = m.t().dot(m);
    let (vals, v) = eigh_symmetric(&mtm)?;
    let singular = Array1::from_iter(vals.iter().map(|&x| x.max(0.0).sqrt()));
    let smax = singular.iter().cloned().fold(0.0_f64, f64::max);
    let tol = smax.max(1.0) * 1e-13;

    let mut u = Array2::zeros((rows, cols.min(rows).max(cols)));
    let mut u_cols: Vec<Array1<f64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let col = if singular[j] > tol {
            let mut uj = m.dot(&v.column(j).to_owned());
            uj /= singular[j];
            // re-orthogonalize against earlier columns for stability
            for prev in &u_cols {
                let proj = uj.dot(prev);
                uj = uj - prev * proj;
            }
            let norm = uj.dot(&uj).sqrt();
            if norm > 1e-10 {
                uj / norm
            } else {
                orthonormal_completion(&u_cols, rows)?
            }
        } else {
            orthonormal_completion(&u_cols, rows)?
        };
        u_cols.push(col);
    }
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..rows {
            u[[i, j]] = col[i];
        }
    }
    let u = u.slice(ndarray::s![.., ..cols]).to_owned();
    Ok((u, singular, v.t().to_owned()))
}

/// A unit vector orthogonal to all `existing` columns.
fn orthonormal_completion(existing: &[Array1<f64>], dim: usize) -> Result<Array1<f64>> {
    for seed in 0..dim {
        let mut candidate = Array1::zeros(dim);
        candidate[seed] = 1.0;
        for prev in existing {
            let proj = candidate.dot(prev);
            candidate = candidate - prev * proj;
        }
        let norm = candidate.dot(&candidate).sqrt();
        if norm > 1e-6 {
            return Ok(candidate / norm);
        }
    }
    Err(Error::invalid(
        "svd",
        "could not complete an orthonormal basis",
    ))
}
