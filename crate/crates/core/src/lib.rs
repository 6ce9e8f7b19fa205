//! Knockoff-based control of the k-familywise error rate in Gaussian linear
//! regression.
//!
//! The pipeline is:
//!
//! 1. [`knockoff`]: normalize the design and build knockoff columns whose Gram
//!    structure mirrors the originals.
//! 2. [`lasso`]: fit a Lasso path on `[X, X_ko]` and record the entry time of
//!    every column.
//! 3. [`kfwer`]: turn entry times into `(W, chi)` statistics, calibrate the
//!    number of tolerated negatives `v` from `(k, alpha)`, and scan.
//!
//! [`error_rates`] adapts the selection to PFER and FDX targets, [`baselines`]
//! provides p-value based comparators, [`sim`] runs Monte Carlo sweeps and
//! [`data`] handles CSV ingestion and cleaning.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod error_rates;
pub mod fmt;
pub mod kfwer;
pub mod knockoff;
pub mod lasso;
pub mod linalg;
pub mod sim;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, ErrorKind, Result};
pub use kfwer::{
    choose_v, choose_v_randomized, compute_stats, nb_tail, select, top_up, Calibration,
    KnockoffStats, SelectionResult,
};
pub use knockoff::{
    construct_knockoffs, equicorrelated_s, normalize_columns, verify_identities, DesignMatrix,
    KnockoffAugment,
};
pub use lasso::{entry_times, lasso_solve, EntryTimes, PathSpec};

/// Full pipeline from a design and response to knockoff statistics, using the
/// equicorrelated construction.
pub fn knockoff_stats(
    design: &DesignMatrix,
    y: &[f64],
    spec: &PathSpec,
) -> Result<(KnockoffAugment, KnockoffStats)> {
    let s = equicorrelated_s(&design.gram())?;
    let aug = construct_knockoffs(design, &s)?;
    let z = lasso::pair_entry_times(&aug, y, spec)?;
    let stats = compute_stats(&z);
    Ok((aug, stats))
}
