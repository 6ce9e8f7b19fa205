//! Knockoff design construction.
//!
//! Given a column-normalized, full-rank design `X` with Gram matrix `G`, the
//! knockoff design `X_ko` satisfies
//!
//! ```text
//! X_koᵀ X_ko = G,        Xᵀ X_ko = G - Diag(s)
//! ```
//!
//! We use `X_ko = X (I - G⁻¹ Diag(s)) + U C` with `U` orthonormal and
//! orthogonal to the columns of `X`, and `CᵀC = 2 Diag(s) - Diag(s) G⁻¹ Diag(s)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical tolerances for design checks and the knockoff square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Rank tolerance relative to the largest singular value.
    pub rank_rel: f64,
    /// Column norms must be within this of 1.
    pub unit_norm: f64,
    /// Eigenvalues above `-clip` are clipped to zero in the square root.
    pub clip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-10,
            unit_norm: 1e-10,
            clip: 1e-10,
        }
    }
}

/// A full-rank `n × p` design with unit-norm columns, `n >= p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    pub fn gram(&self) -> DMatrix<f64> {
        linalg::gram(&self.values)
    }

    /// Wrap an already-normalized matrix, re-checking every invariant.
    pub fn from_normalized(values: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        check_shape(&values)?;
        for (j, col) in values.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > tol.unit_norm {
                return Err(Error::InvalidInput(format!(
                    "column {j} has norm {} (expected 1)",
                    col.norm()
                )));
            }
        }
        check_rank(&values, tol)?;
        Ok(DesignMatrix { values })
    }
}

fn check_shape(values: &DMatrix<f64>) -> Result<()> {
    let (n, p) = values.shape();
    if p == 0 {
        return Err(Error::DimensionError("design has no columns".into()));
    }
    if n < p {
        return Err(Error::DimensionError(format!(
            "n = {n} < p = {p}; the regression is not identifiable"
        )));
    }
    Ok(())
}

fn check_rank(values: &DMatrix<f64>, tol: &Tolerances) -> Result<()> {
    let (lo, hi) = linalg::singular_value_range(values);
    let cutoff = tol.rank_rel * hi;
    if lo <= cutoff {
        return Err(Error::RankDeficient {
            smallest: lo,
            tol: cutoff,
        });
    }
    Ok(())
}

/// Scale every column to unit ℓ2 norm and check full column rank.
pub fn normalize_columns(raw: &DMatrix<f64>) -> Result<DesignMatrix> {
    normalize_columns_with(raw, &Tolerances::default())
}

pub fn normalize_columns_with(raw: &DMatrix<f64>, tol: &Tolerances) -> Result<DesignMatrix> {
    check_shape(raw)?;
    let mut values = raw.clone();
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        col /= norm;
    }
    check_rank(&values, tol)?;
    Ok(DesignMatrix { values })
}

/// Equicorrelated choice `s_j = min(2 λ_min(G), 1)`.
pub fn equicorrelated_s(gram: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !gram.is_square() || gram.nrows() == 0 {
        return Err(Error::DimensionError(
            "Gram matrix must be square and non-empty".into(),
        ));
    }
    // Cholesky doubles as the positive-definiteness test.
    if gram.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let lambda_min = linalg::min_eigenvalue(gram);
    if lambda_min <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let s = (2.0 * lambda_min).min(1.0);
    Ok(vec![s; gram.nrows()])
}

/// A design together with its knockoff copy.
#[derive(Debug, Clone, PartialEq)]
pub struct KnockoffAugment {
    original: DesignMatrix,
    knockoff: DMatrix<f64>,
    s: Vec<f64>,
}

impl KnockoffAugment {
    /// Assemble from parts without construction. Used for fixtures; callers
    /// should run [`verify_identities`] before trusting the result.
    pub fn from_parts(original: DesignMatrix, knockoff: DMatrix<f64>, s: Vec<f64>) -> Result<Self> {
        if knockoff.shape() != original.values.shape() || s.len() != original.p() {
            return Err(Error::DimensionError(
                "knockoff block or s has the wrong shape".into(),
            ));
        }
        Ok(KnockoffAugment {
            original,
            knockoff,
            s,
        })
    }

    pub fn original(&self) -> &DesignMatrix {
        &self.original
    }

    pub fn knockoff(&self) -> &DMatrix<f64> {
        &self.knockoff
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.original.n()
    }

    pub fn p(&self) -> usize {
        self.original.p()
    }

    /// `[X, X_ko]`, `n × 2p`.
    pub fn augmented(&self) -> DMatrix<f64> {
        let (n, p) = self.original.values.shape();
        let mut a = DMatrix::zeros(n, 2 * p);
        a.columns_mut(0, p).copy_from(&self.original.values);
        a.columns_mut(p, p).copy_from(&self.knockoff);
        a
    }
}

/// Knobs for [`construct_knockoffs_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KnockoffOptions {
    /// Permit `p <= n < 2p` by appending zero rows to the design.
    pub allow_row_augment: bool,
    pub tol: Tolerances,
}

pub fn construct_knockoffs(design: &DesignMatrix, s: &[f64]) -> Result<KnockoffAugment> {
    construct_knockoffs_with(design, s, &KnockoffOptions::default())
}

pub fn construct_knockoffs_with(
    design: &DesignMatrix,
    s: &[f64],
    opts: &KnockoffOptions,
) -> Result<KnockoffAugment> {
    let (n, p) = (design.n(), design.p());
    if s.len() != p {
        return Err(Error::DimensionError(format!(
            "s has length {} but the design has {p} columns",
            s.len()
        )));
    }
    if let Some(j) = s.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "s[{j}] = {} is negative",
            s[j]
        )));
    }
    let design = if n < 2 * p {
        if !opts.allow_row_augment {
            return Err(Error::DimensionError(format!(
                "knockoff construction needs n >= 2p (n = {n}, p = {p}); enable row augmentation to proceed"
            )));
        }
        pad_zero_rows(design, 2 * p - n)
    } else {
        design.clone()
    };

    let gram = design.gram();
    let gram_inv = linalg::spd_inverse(&gram)?;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(s));
    let d_ginv_d = &d * &gram_inv * &d;
    let mut inner = &d * 2.0 - d_ginv_d;
    // Symmetrize so the eigensolver sees an exactly symmetric input.
    inner = (&inner + inner.transpose()) * 0.5;
    let c = linalg::psd_sqrt(&inner, opts.tol.clip)?;

    let u = linalg::orthonormal_complement(design.values(), p)?;
    let shrink = DMatrix::identity(p, p) - &gram_inv * &d;
    let knockoff = design.values() * shrink + u * c;

    Ok(KnockoffAugment {
        original: design,
        knockoff,
        s: s.to_vec(),
    })
}

fn pad_zero_rows(design: &DesignMatrix, extra: usize) -> DesignMatrix {
    let (n, p) = (design.n(), design.p());
    let mut values = DMatrix::zeros(n + extra, p);
    values.rows_mut(0, n).copy_from(design.values());
    DesignMatrix { values }
}

/// Row augmentation for `p <= n < 2p`: zero rows are appended to the design
/// and the response is extended with `N(0, σ̂²)` draws, where `σ̂²` is the OLS
/// residual variance. Returns the padded design and response.
pub fn row_augment<R: Rng + ?Sized>(
    design: &DesignMatrix,
    y: &[f64],
    rng: &mut R,
) -> Result<(DesignMatrix, Vec<f64>)> {
    let (n, p) = (design.n(), design.p());
    if y.len() != n {
        return Err(Error::DimensionError(format!(
            "response has length {} but design has {n} rows",
            y.len()
        )));
    }
    if n >= 2 * p {
        return Ok((design.clone(), y.to_vec()));
    }
    if n <= p {
        return Err(Error::DimensionError(
            "row augmentation needs n > p to estimate the noise level".into(),
        ));
    }
    let yv = DVector::from_column_slice(y);
    let xty = design.values().tr_mul(&yv);
    let beta = linalg::spd_solve(&design.gram(), &xty)?;
    let resid = &yv - design.values() * beta;
    let sigma = (resid.norm_squared() / (n - p) as f64).sqrt();
    let extra = 2 * p - n;
    let mut y_aug = y.to_vec();
    y_aug.extend((0..extra).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)));
    Ok((pad_zero_rows(design, extra), y_aug))
}

/// Max-abs deviations from the two Gram identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `‖X_koᵀ X_ko − XᵀX‖_max`
    pub gram_dev: f64,
    /// `‖Xᵀ X_ko − (XᵀX − Diag(s))‖_max`
    pub cross_dev: f64,
    pub passed: bool,
}

pub fn verify_identities(aug: &KnockoffAugment, tol: f64) -> IdentityCheck {
    let x = aug.original.values();
    let xk = &aug.knockoff;
    let g = linalg::gram(x);
    let gram_dev = linalg::max_abs(&(xk.tr_mul(xk) - &g));
    let target = g - DMatrix::from_diagonal(&DVector::from_column_slice(&aug.s));
    let cross_dev = linalg::max_abs(&(x.tr_mul(xk) - target));
    IdentityCheck {
        gram_dev,
        cross_dev,
        passed: gram_dev <= tol && cross_dev <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn normalize_scales_single_column() {
        let raw = DMatrix::from_column_slice(3, 1, &[3.0, 0.0, 0.0]);
        let d = normalize_columns(&raw).unwrap();
        assert_eq!(d.values().as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_leaves_orthonormal_columns() {
        let mut raw = DMatrix::zeros(4, 2);
        raw[(0, 0)] = 1.0;
        raw[(1, 1)] = 1.0;
        let d = normalize_columns(&raw).unwrap();
        assert_eq!(d.values(), &raw);
    }

    #[test]
    fn normalize_constant_column() {
        let raw = DMatrix::from_element(4, 1, 1.0);
        let d = normalize_columns(&raw).unwrap();
        for v in d.values().iter() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(d.values().column(0).norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_errors() {
        let mut raw = DMatrix::from_element(4, 2, 1.0);
        raw.column_mut(1).fill(0.0);
        assert_eq!(normalize_columns(&raw).unwrap_err(), Error::ZeroColumn(1));

        let dup = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(
            normalize_columns(&dup),
            Err(Error::RankDeficient { .. })
        ));

        let wide = DMatrix::from_element(2, 3, 1.0);
        assert!(matches!(
            normalize_columns(&wide),
            Err(Error::DimensionError(_))
        ));
    }

    #[test]
    fn equicorrelated_examples() {
        assert_eq!(
            equicorrelated_s(&DMatrix::identity(3, 3)).unwrap(),
            vec![1.0; 3]
        );

        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let s = equicorrelated_s(&g).unwrap();
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-12);

        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        let s = equicorrelated_s(&g).unwrap();
        assert_abs_diff_eq!(s[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 0.2, epsilon = 1e-12);
        // The 4×4 Gram of [X, X_ko] must be PSD.
        let mut big = DMatrix::zeros(4, 4);
        let cross = &g - DMatrix::from_diagonal(&DVector::from_column_slice(&s));
        big.view_mut((0, 0), (2, 2)).copy_from(&g);
        big.view_mut((2, 2), (2, 2)).copy_from(&g);
        big.view_mut((0, 2), (2, 2)).copy_from(&cross);
        big.view_mut((2, 0), (2, 2)).copy_from(&cross.transpose());
        assert!(linalg::min_eigenvalue(&big) >= -1e-8);
    }

    #[test]
    fn equicorrelated_rejects_indefinite() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]);
        assert_eq!(
            equicorrelated_s(&g).unwrap_err(),
            Error::NotPositiveDefinite
        );
    }

    #[test]
    fn orthogonal_design_gets_orthogonal_knockoffs() {
        let mut raw = DMatrix::zeros(6, 3);
        for j in 0..3 {
            raw[(j, j)] = 1.0;
        }
        let d = normalize_columns(&raw).unwrap();
        let aug = construct_knockoffs(&d, &[1.0; 3]).unwrap();
        assert_abs_diff_eq!(
            linalg::max_abs(&d.values().tr_mul(aug.knockoff())),
            0.0,
            epsilon = 1e-12
        );
        assert!(verify_identities(&aug, 1e-8).passed);
    }

    #[test]
    fn zero_s_reproduces_design() {
        let d = normalize_columns(&gaussian(12, 4, 1)).unwrap();
        let aug = construct_knockoffs(&d, &[0.0; 4]).unwrap();
        assert_abs_diff_eq!(
            linalg::max_abs(&(aug.knockoff() - d.values())),
            0.0,
            epsilon = 1e-12
        );
        let check = verify_identities(&aug, 1e-8);
        assert!(check.passed);
    }

    #[test]
    fn random_design_identities() {
        let d = normalize_columns(&gaussian(40, 10, 7)).unwrap();
        let s = equicorrelated_s(&d.gram()).unwrap();
        let aug = construct_knockoffs(&d, &s).unwrap();
        let check = verify_identities(&aug, 1e-8);
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn verify_detects_copy_with_nonzero_s() {
        let d = normalize_columns(&gaussian(20, 3, 3)).unwrap();
        let s = vec![0.2, 0.7, 0.4];
        let aug = KnockoffAugment::from_parts(d.clone(), d.values().clone(), s).unwrap();
        let check = verify_identities(&aug, 1e-8);
        assert!(!check.passed);
        assert_abs_diff_eq!(check.gram_dev, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(check.cross_dev, 0.7, epsilon = 1e-14);

        let aug = KnockoffAugment::from_parts(d.clone(), d.values().clone(), vec![0.0; 3]).unwrap();
        let check = verify_identities(&aug, 0.0);
        assert_eq!((check.gram_dev, check.cross_dev), (0.0, 0.0));
    }

    #[test]
    fn narrow_designs_need_opt_in() {
        let d = normalize_columns(&gaussian(15, 10, 4)).unwrap();
        let s = equicorrelated_s(&d.gram()).unwrap();
        assert!(matches!(
            construct_knockoffs(&d, &s),
            Err(Error::DimensionError(_))
        ));
        let opts = KnockoffOptions {
            allow_row_augment: true,
            ..Default::default()
        };
        let aug = construct_knockoffs_with(&d, &s, &opts).unwrap();
        assert_eq!(aug.n(), 20);
        assert!(verify_identities(&aug, 1e-8).passed);
    }

    #[test]
    fn row_augment_pads_response() {
        let d = normalize_columns(&gaussian(15, 10, 4)).unwrap();
        let y: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (d2, y2) = row_augment(&d, &y, &mut rng).unwrap();
        assert_eq!(d2.n(), 20);
        assert_eq!(y2.len(), 20);
        assert_eq!(&y2[..15], &y[..]);
        assert!(d2.values().rows(15, 5).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn infeasible_s_is_reported() {
        let d = normalize_columns(&gaussian(30, 3, 9)).unwrap();
        assert!(matches!(
            construct_knockoffs(&d, &[5.0, 5.0, 5.0]),
            Err(Error::InfeasibleS { .. })
        ));
    }

    #[test]
    fn construction_is_deterministic() {
        let d = normalize_columns(&gaussian(50, 8, 11)).unwrap();
        let s = equicorrelated_s(&d.gram()).unwrap();
        let a = construct_knockoffs(&d, &s).unwrap();
        let b = construct_knockoffs(&d, &s).unwrap();
        assert_eq!(a.knockoff().as_slice(), b.knockoff().as_slice());
    }
}
