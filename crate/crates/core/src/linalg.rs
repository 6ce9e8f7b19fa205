//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// `XᵀX`.
pub fn gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.tr_mul(x)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::NotPositiveDefinite)
}

/// Solve `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone()
        .cholesky()
        .map(|c| c.solve(b))
        .ok_or(Error::NotPositiveDefinite)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(f64::NAN)
}

/// Symmetric square root `C` with `C C = A` for a PSD matrix.
///
/// Eigenvalues in `[-clip_tol, 0)` are treated as zero; anything more negative
/// is reported as [`Error::InfeasibleS`].
pub fn psd_sqrt(a: &DMatrix<f64>, clip_tol: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(a.clone());
    let lowest = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lowest < -clip_tol {
        return Err(Error::InfeasibleS {
            min_eigenvalue: lowest,
        });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// Extreme singular values `(smallest, largest)`.
pub fn singular_value_range(x: &DMatrix<f64>) -> (f64, f64) {
    let sv = x.singular_values();
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// Householder vectors of a thin QR factorization, applied column by column in
/// fixed order.
struct Householder {
    // Column j holds v_j (zero above row j), with H_j = I - tau_j v_j v_jᵀ.
    vectors: DMatrix<f64>,
    taus: Vec<f64>,
}

impl Householder {
    fn factor(x: &DMatrix<f64>) -> Self {
        let (n, p) = x.shape();
        let mut r = x.clone();
        let mut vectors = DMatrix::zeros(n, p);
        let mut taus = vec![0.0; p];
        for j in 0..p {
            let norm = (j..n).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if r[(j, j)] >= 0.0 { -norm } else { norm };
            let mut v = DVector::zeros(n);
            for i in j..n {
                v[i] = r[(i, j)];
            }
            v[j] -= alpha;
            let vnorm_sq = v.norm_squared();
            if vnorm_sq == 0.0 {
                continue;
            }
            let tau = 2.0 / vnorm_sq;
            for c in j..p {
                let dot: f64 = (j..n).map(|i| v[i] * r[(i, c)]).sum();
                for i in j..n {
                    r[(i, c)] -= tau * dot * v[i];
                }
            }
            vectors.set_column(j, &v);
            taus[j] = tau;
        }
        Householder { vectors, taus }
    }

    /// `Q · m` where `Q = H_0 H_1 ... H_{p-1}`.
    fn apply_q(&self, m: &mut DMatrix<f64>) {
        let n = m.nrows();
        for j in (0..self.taus.len()).rev() {
            let tau = self.taus[j];
            if tau == 0.0 {
                continue;
            }
            let v = self.vectors.column(j);
            for c in 0..m.ncols() {
                let dot: f64 = (j..n).map(|i| v[i] * m[(i, c)]).sum();
                for i in j..n {
                    m[(i, c)] -= tau * dot * v[i];
                }
            }
        }
    }
}

/// An `n × count` orthonormal basis of a subspace orthogonal to the column
/// space of `x`, taken as columns `p..p+count` of the full Householder `Q`.
pub fn orthonormal_complement(x: &DMatrix<f64>, count: usize) -> Result<DMatrix<f64>> {
    let (n, p) = x.shape();
    if p + count > n {
        return Err(Error::DimensionError(format!(
            "need n >= {} rows for a {}-column complement of an {}x{} matrix",
            p + count,
            count,
            n,
            p
        )));
    }
    let h = Householder::factor(x);
    let mut e = DMatrix::zeros(n, count);
    for c in 0..count {
        e[(p + c, c)] = 1.0;
    }
    h.apply_q(&mut e);
    Ok(e)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
