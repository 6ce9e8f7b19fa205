use nalgebra::DVector;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::knockoff::DesignMatrix;
use crate::linalg;

/// Two-sided least-squares p-values with their t statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector {
    pub p_values: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub sigma_hat_sq: f64,
    /// `n − p`.
    pub dof: usize,
}

impl PValueVector {
    /// Wrap externally computed p-values (t statistics left empty).
    pub fn from_p_values(p_values: Vec<f64>) -> Result<Self> {
        if let Some(j) = p_values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput(format!(
                "p-value {j} = {} is outside [0, 1]",
                p_values[j]
            )));
        }
        Ok(PValueVector {
            p_values,
            t_stats: Vec::new(),
            sigma_hat_sq: f64::NAN,
            dof: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }
}

/// OLS fit `β̂ = (XᵀX)⁻¹ Xᵀ y` with `σ̂² = ‖y − Xβ̂‖² / (n − p)` and
/// `t_j = β̂_j / (σ̂ √((XᵀX)⁻¹_jj))` against Student-t with `n − p` dof.
pub fn ols_pvalues(design: &DesignMatrix, y: &[f64]) -> Result<PValueVector> {
    let (n, p) = (design.n(), design.p());
    if y.len() != n {
        return Err(Error::DimensionError(format!(
            "response has length {} but design has {n} rows",
            y.len()
        )));
    }
    if n <= p {
        return Err(Error::DimensionError(format!(
            "OLS p-values need n > p (n = {n}, p = {p})"
        )));
    }
    let x = design.values();
    let gram_inv = linalg::spd_inverse(&design.gram()).map_err(|_| Error::RankDeficient {
        smallest: 0.0,
        tol: 0.0,
    })?;
    let yv = DVector::from_column_slice(y);
    let beta = &gram_inv * x.tr_mul(&yv);
    let resid = &yv - x * &beta;
    let dof = n - p;
    let rss = resid.norm_squared();
    let scale = yv.norm_squared().max(f64::MIN_POSITIVE);
    if rss <= 1e-24 * scale {
        return Err(Error::DegenerateFit);
    }
    let sigma_hat_sq = rss / dof as f64;
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof >= 1");
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let t = beta[j] / (sigma_hat_sq * gram_inv[(j, j)]).sqrt();
        t_stats.push(t);
        p_values.push((2.0 * dist.sf(t.abs())).min(1.0));
    }
    Ok(PValueVector {
        p_values,
        t_stats,
        sigma_hat_sq,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knockoff::normalize_columns;
    use crate::linalg::orthonormal_complement;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn hand_solvable_fixture() {
        // Columns are normalized by construction below; solve the normal
        // equations by Cramer's rule as the independent route.
        let raw =
            DMatrix::from_row_slice(5, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 4.0]);
        let d = normalize_columns(&raw).unwrap();
        let x = d.values();
        let y = [1.0, 2.9, 5.2, 6.8, 9.1];
        let pv = ols_pvalues(&d, &y).unwrap();

        let (a, b, c) = (
            x.column(0).dot(&x.column(0)),
            x.column(0).dot(&x.column(1)),
            x.column(1).dot(&x.column(1)),
        );
        let yv = DVector::from_column_slice(&y);
        let (u, w) = (x.column(0).dot(&yv), x.column(1).dot(&yv));
        let det = a * c - b * b;
        let inv = [c / det, -b / det, a / det];
        let beta = [inv[0] * u + inv[1] * w, inv[1] * u + inv[2] * w];
        let rss: f64 = (0..5)
            .map(|i| {
                let fit = x[(i, 0)] * beta[0] + x[(i, 1)] * beta[1];
                (y[i] - fit).powi(2)
            })
            .sum();
        let s2 = rss / 3.0;
        assert_eq!(pv.dof, 3);
        assert_abs_diff_eq!(pv.sigma_hat_sq, s2, epsilon = 1e-10);
        assert_abs_diff_eq!(
            pv.t_stats[0],
            beta[0] / (s2 * inv[0]).sqrt(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            pv.t_stats[1],
            beta[1] / (s2 * inv[2]).sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn zero_noise_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = DMatrix::from_fn(20, 1, |_, _| rng.sample(StandardNormal));
        let x = orthonormal_complement(&g, 3).unwrap();
        let d = normalize_columns(&x).unwrap();
        let y: Vec<f64> = d.values().column(0).iter().copied().collect();
        assert_eq!(ols_pvalues(&d, &y).unwrap_err(), Error::DegenerateFit);
    }

    #[test]
    fn needs_residual_dof() {
        let d = normalize_columns(&DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            ols_pvalues(&d, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionError(_))
        ));
    }

    #[test]
    fn rotation_of_residual_space_leaves_pvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = DMatrix::from_fn(30, 4, |_, _| rng.sample(StandardNormal));
        let d = normalize_columns(&raw).unwrap();
        let y: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let base = ols_pvalues(&d, &y).unwrap();

        // Rotate y within the orthogonal complement of the column space.
        let x = d.values();
        let yv = DVector::from_column_slice(&y);
        let proj = x * crate::linalg::spd_solve(&d.gram(), &x.tr_mul(&yv)).unwrap();
        let resid = &yv - &proj;
        let u = orthonormal_complement(x, 26).unwrap();
        let coords = u.tr_mul(&resid);
        // Cyclic shift of the residual coordinates is orthogonal.
        let shifted = DVector::from_fn(26, |i, _| coords[(i + 1) % 26]);
        let y2 = &proj + &u * shifted;
        let rotated = ols_pvalues(&d, y2.as_slice()).unwrap();
        for j in 0..4 {
            assert_abs_diff_eq!(base.p_values[j], rotated.p_values[j], epsilon = 1e-10);
        }
    }
}
