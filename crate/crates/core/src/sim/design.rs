use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::knockoff::{normalize_columns, DesignMatrix};

/// Rows i.i.d. `N(0, (1−ρ) I + ρ 11ᵀ)`, then columns normalized. A
/// rank-deficient draw is retried once.
pub fn gen_design<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rho: f64,
    rng: &mut R,
) -> Result<DesignMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Config(format!("rho = {rho} must lie in [0, 1)")));
    }
    let draw = |rng: &mut R| {
        let (a, b) = ((1.0 - rho).sqrt(), rho.sqrt());
        let mut m = DMatrix::zeros(n, p);
        for i in 0..n {
            let shared: f64 = rng.sample(StandardNormal);
            for j in 0..p {
                let e: f64 = rng.sample(StandardNormal);
                m[(i, j)] = a * e + b * shared;
            }
        }
        normalize_columns(&m)
    };
    match draw(rng) {
        Err(Error::RankDeficient { .. }) => draw(rng),
        other => other,
    }
}

/// Sign convention for the nonzero coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    #[default]
    Positive,
    Random,
}

/// `β` with a uniformly random support of size `nnz`, every nonzero of size
/// `magnitude`. Returns `(β, sorted support)`.
pub fn gen_signal<R: Rng + ?Sized>(
    p: usize,
    nnz: usize,
    magnitude: f64,
    signs: SignMode,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if nnz > p {
        return Err(Error::Config(format!("nnz = {nnz} exceeds p = {p}")));
    }
    let mut support = sample(rng, p, nnz).into_vec();
    support.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &support {
        let sign = match signs {
            SignMode::Positive => 1.0,
            SignMode::Random => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        beta[j] = sign * magnitude;
    }
    Ok((beta, support))
}
