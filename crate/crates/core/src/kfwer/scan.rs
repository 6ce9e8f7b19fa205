use super::stats::KnockoffStats;

/// Outcome of a selection run. Indices are 0-based variable indices, listed in
/// the order they were rejected.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelectionResult {
    pub rejected: Vec<usize>,
    /// `T_v`: `W` of the `v`-th negative, `−∞` if fewer than `v` negatives,
    /// `+∞` when `v = 0`.
    pub threshold: f64,
    /// 1-based scan position `j*` of the `v`-th negative (`p` if there are
    /// fewer than `v`, `0` when `v = 0`).
    pub cutoff_index: usize,
    pub v_used: u32,
    /// Rejections appended by [`top_up`] (or other augmentation).
    pub topped_up: usize,
}

impl SelectionResult {
    pub fn empty(v_used: u32) -> Self {
        SelectionResult {
            rejected: Vec::new(),
            threshold: f64::INFINITY,
            cutoff_index: 0,
            v_used,
            topped_up: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.rejected.contains(&j)
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut r = self.rejected.clone();
        r.sort_unstable();
        r
    }
}

/// Scan `χ` in descending-`W` order, stop at the `v`-th `−1`, and reject every
/// `+1` seen before it. Zeros are skipped: never rejected, never counted.
pub fn select(stats: &KnockoffStats, v: u32) -> SelectionResult {
    if v == 0 {
        return SelectionResult::empty(0);
    }
    let chi = stats.chi();
    let order = stats.order();
    let mut rejected = Vec::new();
    let mut negatives = 0u32;
    for (pos, &j) in order.iter().enumerate() {
        match chi[j] {
            1 => rejected.push(j),
            -1 => {
                negatives += 1;
                if negatives == v {
                    return SelectionResult {
                        rejected,
                        threshold: stats.w()[j],
                        cutoff_index: pos + 1,
                        v_used: v,
                        topped_up: 0,
                    };
                }
            }
            _ => {}
        }
    }
    SelectionResult {
        rejected,
        threshold: f64::NEG_INFINITY,
        cutoff_index: stats.p(),
        v_used: v,
        topped_up: 0,
    }
}

/// The same selection written through the threshold
/// `T_v = sup{t > 0 : #{j : W_j >= t, χ_j = −1} = v}`: rejects
/// `{j : W_j >= T_v, χ_j = +1}`, sorted by index. Agrees with [`select`]
/// whenever the `W_j` are distinct.
pub fn threshold_select(stats: &KnockoffStats, v: u32) -> (f64, Vec<usize>) {
    let w = stats.w();
    let chi = stats.chi();
    let threshold = if v == 0 {
        f64::INFINITY
    } else {
        let mut neg: Vec<f64> = (0..w.len())
            .filter(|&j| chi[j] == -1)
            .map(|j| w[j])
            .collect();
        neg.sort_by(|a, b| b.total_cmp(a));
        neg.get(v as usize - 1)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    };
    let rejected = (0..w.len())
        .filter(|&j| chi[j] == 1 && w[j] >= threshold)
        .collect();
    (threshold, rejected)
}

/// Extend to at least `k − 1` rejections using the largest-`W` positives not
/// yet rejected.
pub fn top_up(result: &SelectionResult, stats: &KnockoffStats, k: u32) -> SelectionResult {
    let target = k.saturating_sub(1) as usize;
    let mut out = result.clone();
    if out.len() >= target {
        return out;
    }
    for &j in stats.order() {
        if out.len() >= target {
            break;
        }
        if stats.chi()[j] == 1 && !out.contains(j) {
            out.rejected.push(j);
            out.topped_up += 1;
        }
    }
    out
}

/// Knockoff FDR thresholding at level `q` on the same statistics, used as a
/// comparator. `offset = 1` gives the knockoff+ threshold
/// `min{t : (1 + #{W_j >= t, χ_j = −1}) / max(1, #{W_j >= t, χ_j = +1}) <= q}`,
/// `offset = 0` the original one.
pub fn knockoff_fdr_select(stats: &KnockoffStats, q: f64, offset: u32) -> SelectionResult {
    let w = stats.w();
    let chi = stats.chi();
    let order = stats.order();
    // Candidate thresholds are the positive W values; scanning from the
    // smallest candidate upwards returns the minimal feasible t.
    let mut candidates: Vec<f64> = (0..w.len())
        .filter(|&j| chi[j] != 0 && w[j] > 0.0)
        .map(|j| w[j])
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for t in candidates {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for j in 0..w.len() {
            if w[j] >= t {
                match chi[j] {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => {}
                }
            }
        }
        let ratio = (offset as f64 + neg as f64) / pos.max(1) as f64;
        if ratio <= q {
            let rejected = order
                .iter()
                .copied()
                .filter(|&j| chi[j] == 1 && w[j] >= t)
                .collect();
            return SelectionResult {
                rejected,
                threshold: t,
                cutoff_index: 0,
                v_used: 0,
                topped_up: 0,
            };
        }
    }
    SelectionResult::empty(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ordered(chi: &[i8]) -> KnockoffStats {
        KnockoffStats::from_ordered_signs(chi).unwrap()
    }

    #[test]
    fn hand_scan() {
        let s = ordered(&[1, 1, -1, 1, -1]);
        let r = select(&s, 2);
        assert_eq!(r.cutoff_index, 5);
        assert_eq!(r.rejected, vec![0, 1, 3]);
        assert_eq!(r.threshold, 1.0);
    }

    #[test]
    fn leading_negative_rejects_nothing() {
        let s = ordered(&[-1, -1, 1, 1]);
        let r = select(&s, 1);
        assert_eq!(r.cutoff_index, 1);
        assert!(r.is_empty());
    }

    #[test]
    fn all_positive_rejects_all() {
        let s = ordered(&[1; 6]);
        let r = select(&s, 3);
        assert_eq!(r.cutoff_index, 6);
        assert_eq!(r.len(), 6);
        assert_eq!(r.threshold, f64::NEG_INFINITY);
    }

    #[test]
    fn v_zero_rejects_nothing() {
        let r = select(&ordered(&[1, 1, 1]), 0);
        assert!(r.is_empty());
        assert_eq!(r.cutoff_index, 0);
        assert_eq!(
            threshold_select(&ordered(&[1, 1]), 0).1,
            Vec::<usize>::new()
        );
    }

    #[test]
    fn zeros_are_skipped() {
        let s = ordered(&[1, 0, -1, 0, 1, -1]);
        let r = select(&s, 2);
        assert_eq!(r.rejected, vec![0, 4]);
        assert_eq!(r.cutoff_index, 6);
    }

    #[test]
    fn top_up_examples() {
        let s = ordered(&[-1, 1, 1, -1, 1, 1, -1]);
        let base = select(&s, 1);
        assert!(base.is_empty());
        let t = top_up(&base, &s, 5);
        assert_eq!(t.rejected, vec![1, 2, 4, 5]);
        assert_eq!(t.topped_up, 4);

        let s = ordered(&[1, 1, 1, -1]);
        let base = select(&s, 1);
        assert_eq!(top_up(&base, &s, 3), base);
        assert_eq!(top_up(&base, &s, 1), base);

        // Positives exhausted before k − 1.
        let s = ordered(&[-1, 1, -1]);
        assert_eq!(top_up(&select(&s, 1), &s, 5).len(), 1);
    }

    #[test]
    fn fdr_comparator() {
        // W descending: + + + + − + ; knockoff+ at q = 0.5: t = 1 gives
        // (1 + 1) / 5 = 0.4.
        let s = ordered(&[1, 1, 1, 1, -1, 1]);
        let r = knockoff_fdr_select(&s, 0.5, 1);
        assert_eq!(r.len(), 5);
        let r = knockoff_fdr_select(&s, 0.1, 1);
        assert!(r.is_empty());
        let r = knockoff_fdr_select(&s, 0.1, 0);
        assert_eq!(r.rejected, vec![0, 1, 2, 3]);
    }

    fn signs() -> impl Strategy<Value = Vec<i8>> {
        prop::collection::vec(prop_oneof![Just(-1i8), Just(0i8), Just(1i8)], 0..60)
    }

    proptest! {
        #[test]
        fn nesting(chi in signs(), v in 0u32..10) {
            let s = ordered(&chi);
            let small = select(&s, v);
            let big = select(&s, v + 1);
            prop_assert!(small.rejected.iter().all(|j| big.contains(*j)));
        }

        #[test]
        fn threshold_matches_scan(chi in signs(), v in 0u32..10, perm_seed in 0u64..1000) {
            // Distinct W, shuffled so index order differs from scan order.
            let p = chi.len();
            let w: Vec<f64> = (0..p).map(|i| ((i as u64 * 7919 + perm_seed) % 100_003) as f64 + i as f64 * 1e-6).collect();
            let s = KnockoffStats::new(w, chi).unwrap();
            let (t, by_threshold) = threshold_select(&s, v);
            let scan = select(&s, v);
            prop_assert_eq!(by_threshold, scan.sorted());
            if v > 0 {
                prop_assert_eq!(t, scan.threshold);
            }
        }

        #[test]
        fn rejected_are_positive_and_above_threshold(chi in signs(), v in 1u32..8, k in 1u32..8) {
            let s = ordered(&chi);
            let base = select(&s, v);
            for &j in &base.rejected {
                prop_assert_eq!(s.chi()[j], 1);
                prop_assert!(s.w()[j] >= base.threshold);
            }
            let up = top_up(&base, &s, k);
            let positives = chi.iter().filter(|&&c| c == 1).count();
            prop_assert!(up.len() >= (k as usize - 1).min(positives));
            prop_assert!(up.rejected.iter().all(|&j| s.chi()[j] == 1));
            prop_assert_eq!(&up.rejected[..base.len()], &base.rejected[..]);
        }
    }
}
