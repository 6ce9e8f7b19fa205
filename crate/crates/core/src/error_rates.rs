//! PFER and FDX targets built on the k-FWER selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kfwer::{randomized_from_uniform, select, top_up, KnockoffStats, SelectionResult};

/// FDX target: `P(FDP > gamma) <= alpha`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FdxConfig {
    pub gamma: f64,
    pub alpha: f64,
    /// k used by the augmentation mode.
    pub k: u32,
}

impl FdxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "gamma = {} must lie in (0, 1)",
                self.gamma
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha = {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// `v = ⌊budget⌋`; the selection with this `v` has `E(V) <= v`.
pub fn pfer_budget_to_v(budget: f64) -> Result<u32> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Config(format!(
            "PFER budget {budget} must be positive"
        )));
    }
    Ok(budget.floor() as u32)
}

/// Largest `r >= 0` with `(k − 1 + r) / (R + r) <= gamma`, or `None` when
/// `R = 0` or `(k − 1) / R > gamma`.
pub fn fdx_extra_rejections(rejections: usize, k: u32, gamma: f64) -> Option<usize> {
    if rejections == 0 {
        return None;
    }
    let km1 = k.saturating_sub(1) as f64;
    let r_base = rejections as f64;
    let ok = |r: usize| (km1 + r as f64) / (r_base + r as f64) <= gamma;
    if !ok(0) {
        return None;
    }
    // Closed form, then nudged so the result agrees with the predicate
    // exactly despite rounding.
    let mut r = ((gamma * r_base - km1) / (1.0 - gamma)).floor().max(0.0) as usize;
    while r > 0 && !ok(r) {
        r -= 1;
    }
    while ok(r + 1) {
        r += 1;
    }
    Some(r)
}

/// Augment a k-FWER rejection set to target the FDX at exceedance level
/// `gamma`. Added hypotheses are the largest-`W` positive-`χ` ones not already
/// rejected. The reset branch returns an empty set.
pub fn fdx_augment(
    base: &SelectionResult,
    k: u32,
    gamma: f64,
    stats: &KnockoffStats,
) -> SelectionResult {
    let Some(r) = fdx_extra_rejections(base.len(), k, gamma) else {
        let mut empty = SelectionResult::empty(base.v_used);
        empty.cutoff_index = base.cutoff_index;
        empty.threshold = base.threshold;
        return empty;
    };
    let mut out = base.clone();
    let mut added = 0;
    for &j in stats.order() {
        if added == r {
            break;
        }
        if stats.chi()[j] == 1 && !out.contains(j) {
            out.rejected.push(j);
            added += 1;
        }
    }
    out.topped_up += added;
    out
}

/// Outcome of the Romano–Wolf style search.
#[derive(Debug, Clone, PartialEq)]
pub struct RomanoWolfOutcome {
    pub k_hat: u32,
    /// `R_k` for every `k` tried.
    pub rejections_by_k: Vec<usize>,
    /// True when the search hit the `k = p` cap without the stopping rule
    /// firing.
    pub capped: bool,
    pub result: SelectionResult,
}

/// Generic search: the smallest `k` in `1..=k_cap` with `R_k < k/gamma − 1`.
pub fn romano_wolf_search<F>(k_cap: u32, gamma: f64, mut run: F) -> Result<RomanoWolfOutcome>
where
    F: FnMut(u32) -> Result<SelectionResult>,
{
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    let k_cap = k_cap.max(1);
    let mut counts = Vec::new();
    let mut last = None;
    for k in 1..=k_cap {
        let res = run(k)?;
        counts.push(res.len());
        if (res.len() as f64) < f64::from(k) / gamma - 1.0 {
            return Ok(RomanoWolfOutcome {
                k_hat: k,
                rejections_by_k: counts,
                capped: false,
                result: res,
            });
        }
        last = Some(res);
    }
    Ok(RomanoWolfOutcome {
        k_hat: k_cap,
        rejections_by_k: counts,
        capped: true,
        result: last.expect("k_cap >= 1"),
    })
}

/// FDX heuristic: run the randomized k-FWER procedure with top-up for
/// `k = 1, 2, …` and stop at the first `k` with `R_k < k/gamma − 1`. One
/// uniform is drawn and shared by every `k`. No exact FDX guarantee.
pub fn romano_wolf_fdx<R: Rng + ?Sized>(
    stats: &KnockoffStats,
    gamma: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<RomanoWolfOutcome> {
    let u: f64 = rng.random();
    let cap = stats.p().max(1) as u32;
    romano_wolf_search(cap, gamma, |k| {
        let cal = randomized_from_uniform(k, alpha, u)?;
        let base = select(stats, cal.v_used);
        Ok(top_up(&base, stats, k))
    })
}
