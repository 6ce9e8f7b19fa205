//! Lasso path on the augmented design and per-column entry times.
//!
//! The solver is cyclic coordinate descent in covariance form: with
//! `G = AᵀA` and `c = Aᵀy − G b`, a coordinate update only touches one column
//! of `G`. Convergence is declared on the maximum KKT violation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::knockoff::KnockoffAugment;

/// λ grid and solver settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PathSpec {
    pub grid_size: usize,
    /// `λ_min / λ_max`.
    pub grid_ratio: f64,
    pub cd_tol: f64,
    /// Maximum coordinate-descent sweeps per λ.
    pub max_iters: usize,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec {
            grid_size: 200,
            grid_ratio: 1e-3,
            cd_tol: 1e-7,
            max_iters: 10_000,
        }
    }
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::Config("grid_size must be at least 2".into()));
        }
        if !(self.grid_ratio > 0.0 && self.grid_ratio < 1.0) {
            return Err(Error::Config("grid_ratio must lie in (0, 1)".into()));
        }
        if !(self.cd_tol > 0.0) {
            return Err(Error::Config("cd_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Geometric grid from `lambda_max` down to `grid_ratio · lambda_max`.
    pub fn grid(&self, lambda_max: f64) -> Vec<f64> {
        let last = (self.grid_size - 1) as f64;
        (0..self.grid_size)
            .map(|i| lambda_max * self.grid_ratio.powf(i as f64 / last))
            .collect()
    }
}

/// Entry times of the `2p` columns of `[X, X_ko]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryTimes {
    z: Vec<f64>,
    lambda_max: f64,
}

impl EntryTimes {
    /// `z` holds originals first, then knockoffs.
    pub fn new(z: Vec<f64>, lambda_max: f64) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::DimensionError(format!(
                "entry times need an even length, got {}",
                z.len()
            )));
        }
        if z.iter().any(|&v| !(v >= 0.0 && v <= lambda_max)) {
            return Err(Error::InvalidInput(
                "entry times must lie in [0, lambda_max]".into(),
            ));
        }
        Ok(EntryTimes { z, lambda_max })
    }

    pub fn p(&self) -> usize {
        self.z.len() / 2
    }

    pub fn all(&self) -> &[f64] {
        &self.z
    }

    pub fn originals(&self) -> &[f64] {
        &self.z[..self.p()]
    }

    pub fn knockoffs(&self) -> &[f64] {
        &self.z[self.p()..]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }
}

/// Active-set sweeps between attempts at an exact active-set solve.
const NEWTON_EVERY: usize = 3;

/// Lasso objective `½‖y − Ab‖² + λ‖b‖₁` held in covariance form.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    gram: DMatrix<f64>,
    aty: DVector<f64>,
}

impl LassoProblem {
    pub fn new(a: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::DimensionError(format!(
                "design has {} rows but response has length {}",
                a.nrows(),
                y.len()
            )));
        }
        let yv = DVector::from_column_slice(y);
        Ok(LassoProblem {
            gram: a.tr_mul(a),
            aty: a.tr_mul(&yv),
        })
    }

    pub fn dim(&self) -> usize {
        self.aty.len()
    }

    /// `max_j |A_jᵀ y|`, the smallest λ at which zero is optimal.
    pub fn lambda_max(&self) -> f64 {
        self.aty.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn correlations(&self, b: &[f64]) -> DVector<f64> {
        &self.aty - &self.gram * DVector::from_column_slice(b)
    }

    /// Largest KKT violation of `b` at `lambda`.
    pub fn kkt_violation(&self, b: &[f64], lambda: f64) -> f64 {
        let c = self.correlations(b);
        kkt_from_correlations(&c, b, lambda)
    }

    /// Solve in place, starting from `b`.
    pub fn solve(&self, lambda: f64, b: &mut [f64], tol: f64, max_iters: usize) -> Result<()> {
        let m = self.dim();
        if b.len() != m {
            return Err(Error::DimensionError(format!(
                "warm start has length {} but the design has {m} columns",
                b.len()
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda = {lambda} must be >= 0"
            )));
        }
        let mut c = self.correlations(b);
        let all: Vec<usize> = (0..m).collect();
        let mut sweeps = 0;
        while sweeps < max_iters {
            self.sweep(&all, lambda, b, &mut c);
            sweeps += 1;
            // Cycle over the active set until it settles, then check
            // everything again.
            let mut inner = 0;
            loop {
                let active: Vec<usize> = (0..m).filter(|&j| b[j] != 0.0).collect();
                let settled = active
                    .iter()
                    .all(|&j| (c[j] - lambda * b[j].signum()).abs() <= 0.5 * tol);
                if settled || sweeps >= max_iters {
                    break;
                }
                inner += 1;
                if inner % NEWTON_EVERY == 0 && self.newton_step(&active, lambda, b) {
                    c = self.correlations(b);
                    continue;
                }
                self.sweep(&active, lambda, b, &mut c);
                sweeps += 1;
            }
            // Refresh to avoid drift from the incremental updates.
            c = self.correlations(b);
            if kkt_from_correlations(&c, b, lambda) <= tol {
                return Ok(());
            }
        }
        Err(Error::NoConvergence { max_iters, lambda })
    }

    /// Exact solve of the active-set stationarity equations from the current
    /// point, using a pseudo-inverse so that singular directions keep their
    /// current values. Applied only when no active sign flips.
    fn newton_step(&self, active: &[usize], lambda: f64, b: &mut [f64]) -> bool {
        if active.is_empty() {
            return false;
        }
        let g = self.gram.select_rows(active).select_columns(active);
        let c = self.correlations(b);
        let r = DVector::from_iterator(
            active.len(),
            active.iter().map(|&j| c[j] - lambda * b[j].signum()),
        );
        let step = match g.clone().cholesky() {
            Some(chol) => chol.solve(&r),
            None => {
                let eig = g.symmetric_eigen();
                let cutoff = 1e-10 * eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
                let mut proj = eig.eigenvectors.tr_mul(&r);
                for (p, &e) in proj.iter_mut().zip(eig.eigenvalues.iter()) {
                    *p = if e > cutoff { *p / e } else { 0.0 };
                }
                &eig.eigenvectors * proj
            }
        };
        let ok = active
            .iter()
            .zip(step.iter())
            .all(|(&j, &d)| (b[j] + d) != 0.0 && (b[j] + d).signum() == b[j].signum());
        if ok {
            for (&j, &d) in active.iter().zip(step.iter()) {
                b[j] += d;
            }
        }
        ok
    }

    fn sweep(&self, coords: &[usize], lambda: f64, b: &mut [f64], c: &mut DVector<f64>) {
        for &j in coords {
            let gjj = self.gram[(j, j)];
            if gjj <= 0.0 {
                continue;
            }
            let old = b[j];
            let target = c[j] + gjj * old;
            let new = soft_threshold(target, lambda) / gjj;
            let delta = new - old;
            if delta != 0.0 {
                b[j] = new;
                c.axpy(-delta, &self.gram.column(j), 1.0);
            }
        }
    }
}

fn kkt_from_correlations(c: &DVector<f64>, b: &[f64], lambda: f64) -> f64 {
    c.iter()
        .zip(b)
        .map(|(&cj, &bj)| {
            if bj == 0.0 {
                (cj.abs() - lambda).max(0.0)
            } else {
                (cj - lambda * bj.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Single Lasso fit at `lambda`, warm-started from `warm_start`.
pub fn lasso_solve(
    a: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    warm_start: &[f64],
    spec: &PathSpec,
) -> Result<Vec<f64>> {
    let problem = LassoProblem::new(a, y)?;
    let mut b = warm_start.to_vec();
    problem.solve(lambda, &mut b, spec.cd_tol, spec.max_iters)?;
    debug_assert!(problem.kkt_violation(&b, lambda) <= spec.cd_tol);
    Ok(b)
}

/// Entry times on the design `[X, X_ko]`.
pub fn entry_times(aug: &KnockoffAugment, y: &[f64], spec: &PathSpec) -> Result<EntryTimes> {
    if y.len() != aug.n() {
        return Err(Error::DimensionError(format!(
            "response has length {} but the design has {} rows",
            y.len(),
            aug.n()
        )));
    }
    entry_times_for(&aug.augmented(), y, spec)
}

/// Entry times for an arbitrary design; `a` must have an even column count
/// when the result feeds knockoff statistics.
pub fn entry_times_for(a: &DMatrix<f64>, y: &[f64], spec: &PathSpec) -> Result<EntryTimes> {
    path_entry_times(a, y, spec, false)
}

/// Entry times on `[X, X_ko]`, stopping the path once every pair `(j, j + p)`
/// has a member that entered. Coordinates still out at that point get 0; the
/// knockoff statistics are the same as with the full path because the
/// partner's entry time is larger.
pub fn pair_entry_times(aug: &KnockoffAugment, y: &[f64], spec: &PathSpec) -> Result<EntryTimes> {
    if y.len() != aug.n() {
        return Err(Error::DimensionError(format!(
            "response has length {} but the design has {} rows",
            y.len(),
            aug.n()
        )));
    }
    path_entry_times(&aug.augmented(), y, spec, true)
}

fn path_entry_times(
    a: &DMatrix<f64>,
    y: &[f64],
    spec: &PathSpec,
    pairs: bool,
) -> Result<EntryTimes> {
    spec.validate()?;
    let problem = LassoProblem::new(a, y)?;
    let m = problem.dim();
    let lambda_max = problem.lambda_max();
    let mut z = vec![0.0; m];
    if lambda_max == 0.0 {
        return EntryTimes::new(z, 0.0);
    }
    let half = m / 2;
    let mut b = vec![0.0; m];
    let mut seen = vec![false; m];
    for lambda in spec.grid(lambda_max) {
        problem.solve(lambda, &mut b, spec.cd_tol, spec.max_iters)?;
        for j in 0..m {
            if !seen[j] && b[j] != 0.0 {
                seen[j] = true;
                z[j] = lambda;
            }
        }
        // Smaller λ cannot change an entry time that is already recorded.
        let done = if pairs {
            (0..half).all(|j| seen[j] || seen[j + half])
        } else {
            seen.iter().all(|&s| s)
        };
        if done {
            break;
        }
    }
    EntryTimes::new(z, lambda_max)
}
