//! Fixtures shared by the benchmarks.

use kfwer_core::sim::{gen_design, gen_signal, SignMode};
use kfwer_core::DesignMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Design and response from the simulation model with a fixed seed.
pub fn fixture(n: usize, p: usize, nnz: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design = gen_design(n, p, 0.0, &mut rng).expect("design");
    let (beta, _) = gen_signal(p, nnz, 3.5, SignMode::Positive, &mut rng).expect("signal");
    let x = design.values();
    let y = (0..n)
        .map(|i| {
            let mean: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
            let e: f64 = StandardNormal.sample(&mut rng);
            mean + e
        })
        .collect();
    (design, y)
}
