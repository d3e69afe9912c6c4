//! Task-related component analysis (TRCA) spatial filtering and canonical
//! correlation analysis.
//!
//! TRCA finds channel-space projections that maximize the covariance between
//! repeated trials of the same class relative to the per-trial
//! self-covariance. With inter-trial covariance `S` and self-covariance `Q`
//! summed over classes, the filter solves `S·w = λ·Q·w` and keeps the
//! eigenvectors of the largest eigenvalues as the columns of `W`; signals are
//! projected as `XᵀW`, dropping task-unrelated components along with
//! dimensions.

use ndarray::{Array1, Array2};

use crate::data::{Epochs, Trial};
use crate::error::{Error, Result};
use crate::linalg;

/// A fitted spatial filter: projection matrix `W` (channels × components)
/// and the generalized eigenvalues that selected its columns, descending.
#[derive(Debug, Clone)]
pub struct SpatialFilter {
    pub w: Array2<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SpatialFilter {
    pub fn channels(&self) -> usize {
        self.w.nrows()
    }

    pub fn components(&self) -> usize {
        self.w.ncols()
    }

    /// Serialize `W` as CSV, one row per channel.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.w.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of canonical correlation analysis between two column spaces.
#[derive(Debug, Clone)]
pub struct CcaResult {
    /// Projections for the first input, one column per canonical pair.
    pub a: Array2<f64>,
    /// Projections for the second input.
    pub b: Array2<f64>,
    /// Canonical correlations, descending, in [0, 1].
    pub correlations: Vec<f64>,
}

/// Remove the per-channel (row) mean of a trial matrix.
pub fn center_rows(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let mean = row.sum() / row.len() as f64;
        row.mapv_inplace(|v| v - mean);
    }
    out
}

/// `x·yᵀ + y·xᵀ`, built exactly symmetric.
fn symmetric_cross(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    let xyt = x.dot(&y.t());
    let c = x.nrows();
    let mut out = Array2::zeros((c, c));
    for i in 0..c {
        for j in i..c {
            let v = xyt[[i, j]] + xyt[[j, i]];
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// `x·xᵀ`, built exactly symmetric.
fn symmetric_outer(x: &Array2<f64>) -> Array2<f64> {
    let xxt = x.dot(&x.t());
    let c = x.nrows();
    let mut out = Array2::zeros((c, c));
    for i in 0..c {
        for j in i..c {
            let v = 0.5 * (xxt[[i, j]] + xxt[[j, i]]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Inter-trial covariance `S_k = Σ_{i<j} (X_i·X_jᵀ + X_j·X_iᵀ)` and
/// self-covariance `Q_k = Σ_i X_i·X_iᵀ` of one class. Per-channel means are
/// removed from each trial before accumulation.
pub fn class_covariances(trials: &[Array2<f64>]) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = trials.len();
    if n < 2 {
        return Err(Error::InsufficientTrials {
            class: 0,
            got: n,
            need: 2,
        });
    }
    let c = trials[0].nrows();
    for (i, x) in trials.iter().enumerate() {
        if x.nrows() != c || x.ncols() != trials[0].ncols() {
            return Err(Error::DimMismatch {
                context: "class_covariances",
                expected: format!("[{}, {}]", c, trials[0].ncols()),
                found: format!("trial {i}: [{}, {}]", x.nrows(), x.ncols()),
            });
        }
    }
    let centered: Vec<Array2<f64>> = trials.iter().map(center_rows).collect();
    let mut s = Array2::zeros((c, c));
    let mut q = Array2::zeros((c, c));
    for i in 0..n {
        q += &symmetric_outer(&centered[i]);
        for j in (i + 1)..n {
            s += &symmetric_cross(&centered[i], &centered[j]);
        }
    }
    Ok((s, q))
}

/// Relative diagonal ridge applied to `Q` before the Cholesky reduction.
pub const TRCA_RIDGE: f64 = 1e-9;

/// Fit the TRCA spatial filter from per-class trial lists.
///
/// `S` and `Q` are the class covariances summed over classes; the returned
/// filter holds the top-`components` eigenvectors of `S·w = λ·Q·w` with each
/// eigenvalue reported as the Rayleigh quotient `wᵀSw / wᵀQw`.
pub fn fit_trca(classes: &[Vec<Array2<f64>>], components: usize) -> Result<SpatialFilter> {
    fit_trca_with_ridge(classes, components, TRCA_RIDGE)
}

/// As [`fit_trca`] with an explicit ridge scale (exposed for stability
/// analysis).
pub fn fit_trca_with_ridge(
    classes: &[Vec<Array2<f64>>],
    components: usize,
    ridge: f64,
) -> Result<SpatialFilter> {
    if classes.is_empty() {
        return Err(Error::invalid("fit_trca", "no classes"));
    }
    let c = classes[0]
        .first()
        .map(|x| x.nrows())
        .ok_or(Error::InsufficientTrials {
            class: 0,
            got: 0,
            need: 2,
        })?;
    if components == 0 || components > c {
        return Err(Error::invalid(
            "fit_trca",
            format!("component count {components} outside 1..={c}"),
        ));
    }
    let mut s = Array2::zeros((c, c));
    let mut q = Array2::zeros((c, c));
    for (k, trials) in classes.iter().enumerate() {
        let (sk, qk) = class_covariances(trials).map_err(|e| match e {
            Error::InsufficientTrials { got, need, .. } => Error::InsufficientTrials {
                class: k,
                got,
                need,
            },
            other => other,
        })?;
        s += &sk;
        q += &qk;
    }

    let (_, vecs) = linalg::eigh_generalized(&s, &q, ridge)?;
    // report Rayleigh quotients against the unridged Q and order by them
    let mut ranked: Vec<(f64, Array1<f64>)> = (0..c)
        .map(|j| {
            let w = vecs.column(j).to_owned();
            let num = w.dot(&s.dot(&w));
            let den = w.dot(&q.dot(&w));
            (num / den, w)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    ranked.truncate(components);

    let mut w = Array2::zeros((c, components));
    let mut eigenvalues = Vec::with_capacity(components);
    for (j, (val, vec)) in ranked.iter().enumerate() {
        if !val.is_finite() || vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("fit_trca", "non-finite eigenpair"));
        }
        for i in 0..c {
            w[[i, j]] = vec[i];
        }
        eigenvalues.push(*val);
    }
    Ok(SpatialFilter { w, eigenvalues })
}

/// Fit TRCA from labeled epochs (trials grouped by class).
pub fn fit_trca_epochs(epochs: &Epochs, components: usize) -> Result<SpatialFilter> {
    let classes: Vec<Vec<Array2<f64>>> = epochs
        .indices_by_class()
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| epochs.trials[i].data.clone()).collect())
        .collect();
    fit_trca(&classes, components)
}

/// Project a `[C, T]` matrix to component space: `XᵀW`, shape `[T, P]`.
pub fn spatial_project(x: &Array2<f64>, filter: &SpatialFilter) -> Result<Array2<f64>> {
    if x.nrows() != filter.channels() {
        return Err(Error::DimMismatch {
            context: "spatial_project",
            expected: format!("{} channels", filter.channels()),
            found: format!("{} channels", x.nrows()),
        });
    }
    Ok(x.t().dot(&filter.w))
}

/// Spatially filter a trial; returns the `[T, P]` projection.
pub fn apply_spatial(trial: &Trial, filter: &SpatialFilter) -> Result<Array2<f64>> {
    spatial_project(&trial.data, filter)
}

/// Ridge scale applied to each auto-covariance before whitening. Small
/// enough that self-CCA stays within 1e-10 of exact unit correlations while
/// still dominating f64 rounding by several orders of magnitude.
pub const CCA_RIDGE: f64 = 1e-12;

/// Canonical correlation analysis between `x` and `y` (rows are samples).
///
/// Columns are centered internally; each auto-covariance gets a relative
/// ridge before whitening; the canonical structure is the SVD of the
/// whitened cross-covariance.
pub fn cca(x: &Array2<f64>, y: &Array2<f64>) -> Result<CcaResult> {
    let t = x.nrows();
    if y.nrows() != t {
        return Err(Error::DimMismatch {
            context: "cca",
            expected: format!("{t} rows"),
            found: format!("{} rows", y.nrows()),
        });
    }
    let (px, py) = (x.ncols(), y.ncols());
    if t <= px.max(py) {
        return Err(Error::invalid(
            "cca",
            format!("need more samples ({t}) than columns ({px}/{py})"),
        ));
    }

    let center_cols = |m: &Array2<f64>| -> Array2<f64> {
        let mut out = m.clone();
        for mut col in out.columns_mut() {
            let mean = col.sum() / col.len() as f64;
            col.mapv_inplace(|v| v - mean);
        }
        out
    };
    let xc = center_cols(x);
    let yc = center_cols(y);
    let denom = (t - 1) as f64;
    let mut cxx = xc.t().dot(&xc) / denom;
    let mut cyy = yc.t().dot(&yc) / denom;
    let cxy = xc.t().dot(&yc) / denom;

    let inv_sqrt = |cov: &mut Array2<f64>, name: &str| -> Result<Array2<f64>> {
        let p = cov.nrows();
        let trace: f64 = (0..p).map(|i| cov[[i, i]]).sum();
        if trace <= 0.0 {
            return Err(Error::DegenerateCca(format!("{name} has zero variance")));
        }
        for i in 0..p {
            cov[[i, i]] += CCA_RIDGE * trace;
        }
        let (vals, vecs) = linalg::eigh_symmetric(cov)?;
        if vals.iter().any(|&v| v <= 0.0) {
            return Err(Error::DegenerateCca(format!(
                "{name} not positive definite after ridge"
            )));
        }
        let d = Array2::from_diag(&vals.mapv(|v| 1.0 / v.sqrt()));
        Ok(vecs.dot(&d).dot(&vecs.t()))
    };
    let wx = inv_sqrt(&mut cxx, "first input")?;
    let wy = inv_sqrt(&mut cyy, "second input")?;

    let m = wx.dot(&cxy).dot(&wy);
    let (u, sigma, vt) = linalg::svd_small(&m)?;
    let r = px.min(py);
    let a = wx.dot(&u.slice(ndarray::s![.., ..r]).to_owned());
    let b = wy.dot(&vt.t().slice(ndarray::s![.., ..r]).to_owned());
    let correlations: Vec<f64> = sigma.iter().take(r).map(|&s| s.clamp(0.0, 1.0)).collect();
    Ok(CcaResult { a, b, correlations })
}
