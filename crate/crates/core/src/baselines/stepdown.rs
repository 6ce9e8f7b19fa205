//! Generic resampling step-down for the k-FWER.
//!
//! Works on significance scores (larger means more significant). At each
//! stage the critical score is the upper-`α` quantile of the k-th largest null
//! score over the hypotheses not yet rejected, estimated from `B` joint null
//! draws and made conservative for finite `B` by taking the
//! `⌈(B+1)α⌉`-th largest draw and requiring strict exceedance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ols::PValueVector;
use crate::error::{Error, Result};
use crate::knockoff::DesignMatrix;
use crate::linalg;

/// Source of joint null draws of the test scores.
pub trait NullSampler {
    fn dim(&self) -> usize;
    /// Fill `out` (length [`dim`](Self::dim)) with one null draw.
    fn draw(&mut self, out: &mut [f64]);
}

/// Joint null law of `|t_j|` for OLS t statistics given the design:
/// multivariate t with `n − p` dof and correlation from `(XᵀX)⁻¹`.
pub struct MultivariateTSampler<R> {
    chol: DMatrix<f64>,
    chi2: ChiSquared<f64>,
    dof: f64,
    z: DVector<f64>,
    rng: R,
}

impl<R: Rng> MultivariateTSampler<R> {
    pub fn new(design: &DesignMatrix, rng: R) -> Result<Self> {
        let (n, p) = (design.n(), design.p());
        if n <= p {
            return Err(Error::DimensionError("multivariate t needs n > p".into()));
        }
        let cov = linalg::spd_inverse(&design.gram())?;
        let d: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
        let corr = DMatrix::from_fn(p, p, |i, j| cov[(i, j)] / (d[i] * d[j]));
        let chol = corr.cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
        let dof = (n - p) as f64;
        Ok(MultivariateTSampler {
            chol,
            chi2: ChiSquared::new(dof).expect("positive dof"),
            dof,
            z: DVector::zeros(p),
            rng,
        })
    }
}

impl<R: Rng> NullSampler for MultivariateTSampler<R> {
    fn dim(&self) -> usize {
        self.z.len()
    }

    fn draw(&mut self, out: &mut [f64]) {
        for v in self.z.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
        let scale = (self.chi2.sample(&mut self.rng) / self.dof).sqrt().recip();
        let p = self.z.len();
        // x = L z, L lower triangular.
        for (i, o) in out.iter_mut().enumerate().take(p) {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.chol[(i, j)] * self.z[j];
            }
            *o = (acc * scale).abs();
        }
    }
}

/// Adapts a closure producing null p-value vectors; scores are `−p`.
pub struct PValueSampler<F> {
    dim: usize,
    f: F,
}

impl<F: FnMut(&mut [f64])> PValueSampler<F> {
    pub fn new(dim: usize, f: F) -> Self {
        PValueSampler { dim, f }
    }
}

impl<F: FnMut(&mut [f64])> NullSampler for PValueSampler<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw(&mut self, out: &mut [f64]) {
        (self.f)(out);
        for v in out.iter_mut() {
            *v = -*v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepDownConfig {
    pub draws: usize,
    /// Refuse to run with fewer draws than this.
    pub min_draws: usize,
}

impl Default for StepDownConfig {
    fn default() -> Self {
        StepDownConfig {
            draws: 2000,
            min_draws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDownResult {
    /// Rejected indices in the order they were rejected.
    pub rejected: Vec<usize>,
    /// Critical score used at each stage.
    pub critical_scores: Vec<f64>,
}

/// Step-down on observed scores. Stops when no new hypothesis clears the
/// stage's critical score or fewer than `k` hypotheses remain.
pub fn stepdown_generic<S: NullSampler + ?Sized>(
    scores: &[f64],
    k: u32,
    alpha: f64,
    sampler: &mut S,
    cfg: &StepDownConfig,
) -> Result<StepDownResult> {
    let p = scores.len();
    if sampler.dim() != p {
        return Err(Error::DimensionError(format!(
            "sampler has dimension {} but there are {p} scores",
            sampler.dim()
        )));
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if cfg.draws < cfg.min_draws || cfg.draws == 0 {
        return Err(Error::InsufficientDraws {
            got: cfg.draws,
            floor: cfg.min_draws.max(1),
        });
    }
    let b = cfg.draws;
    let mut null = vec![0.0; b * p];
    for row in null.chunks_mut(p) {
        sampler.draw(row);
    }

    let k = k as usize;
    // Rank of the critical draw among B, 1-based from the top.
    let rank = ((b + 1) as f64 * alpha).ceil() as usize;
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut rejected = Vec::new();
    let mut critical_scores = Vec::new();
    let mut kth = vec![0.0; b];
    let mut buf = Vec::with_capacity(p);
    while remaining.len() >= k && !remaining.is_empty() {
        let critical = if rank == 0 || rank > b {
            f64::INFINITY
        } else {
            for (slot, row) in kth.iter_mut().zip(null.chunks(p)) {
                buf.clear();
                buf.extend(remaining.iter().map(|&j| row[j]));
                let (_, v, _) = buf.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
                *slot = *v;
            }
            let (_, v, _) = kth.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
            *v
        };
        critical_scores.push(critical);
        let mut newly: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&j| scores[j] > critical)
            .collect();
        if newly.is_empty() {
            break;
        }
        newly.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        remaining.retain(|j| !newly.contains(j));
        rejected.extend(newly);
    }
    Ok(StepDownResult {
        rejected,
        critical_scores,
    })
}

/// Step-down on OLS t statistics using the multivariate-t null of the design.
pub fn stepdown_t<R: Rng>(
    pv: &PValueVector,
    design: &DesignMatrix,
    k: u32,
    alpha: f64,
    cfg: &StepDownConfig,
    rng: R,
) -> Result<StepDownResult> {
    let mut sampler = MultivariateTSampler::new(design, rng)?;
    let scores: Vec<f64> = pv.t_stats.iter().map(|t| t.abs()).collect();
    stepdown_generic(&scores, k, alpha, &mut sampler, cfg)
}

/// Two-sided p-value of a critical `|t|`.
pub fn critical_p_value(critical_abs_t: f64, dof: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof >= 1");
    (2.0 * dist.sf(critical_abs_t)).min(1.0)
}
