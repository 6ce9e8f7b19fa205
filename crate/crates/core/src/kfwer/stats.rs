use crate::error::{Error, Result};
use crate::lasso::EntryTimes;

/// Per-variable `W_j = max(Z_j, Z̃_j)`, `χ_j = sign(Z_j − Z̃_j)` and the
/// descending-`W` order (ties by ascending index).
#[derive(Debug, Clone, PartialEq)]
pub struct KnockoffStats {
    w: Vec<f64>,
    chi: Vec<i8>,
    order: Vec<usize>,
}

impl KnockoffStats {
    /// Build from raw `(W, χ)`; the order is derived.
    pub fn new(w: Vec<f64>, chi: Vec<i8>) -> Result<Self> {
        if w.len() != chi.len() {
            return Err(Error::DimensionError(format!(
                "w has length {} but chi has length {}",
                w.len(),
                chi.len()
            )));
        }
        if let Some(j) = chi.iter().position(|c| !matches!(c, -1..=1)) {
            return Err(Error::InvalidInput(format!(
                "chi[{j}] = {} is not a sign",
                chi[j]
            )));
        }
        if w.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("w contains NaN".into()));
        }
        let order = descending_order(&w);
        Ok(KnockoffStats { w, chi, order })
    }

    /// Stats whose scan order is exactly `0, 1, …, p−1`: `W` strictly
    /// decreasing with the given signs.
    pub fn from_ordered_signs(chi: &[i8]) -> Result<Self> {
        let p = chi.len();
        let w = (0..p).map(|i| (p - i) as f64).collect();
        Self::new(w, chi.to_vec())
    }

    pub fn p(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn chi(&self) -> &[i8] {
        &self.chi
    }

    /// Variable indices sorted by `W` descending.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Rank (0-based position in the scan) of every variable.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![0; self.p()];
        for (pos, &j) in self.order.iter().enumerate() {
            r[j] = pos;
        }
        r
    }
}

fn descending_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    order
}

pub fn compute_stats(entry: &EntryTimes) -> KnockoffStats {
    let (z, zk) = (entry.originals(), entry.knockoffs());
    let w: Vec<f64> = z.iter().zip(zk).map(|(a, b)| a.max(*b)).collect();
    let chi: Vec<i8> = z
        .iter()
        .zip(zk)
        .map(|(a, b)| match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .collect();
    let order = descending_order(&w);
    KnockoffStats { w, chi, order }
}
