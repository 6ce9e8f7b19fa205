use rand::Rng;

use crate::kfwer::{select, KnockoffStats};

/// Global-null sign model: `χ` i.i.d. uniform on `{−1, +1}` over a fixed
/// strictly decreasing `W`.
pub fn coin_flip_stats<R: Rng + ?Sized>(p: usize, rng: &mut R) -> KnockoffStats {
    let chi: Vec<i8> = (0..p)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    KnockoffStats::from_ordered_signs(&chi).expect("valid signs")
}

/// Number of (necessarily false) rejections of `select(·, v)` on one
/// coin-flip draw.
pub fn coin_flip_false_count<R: Rng + ?Sized>(p: usize, v: u32, rng: &mut R) -> usize {
    select(&coin_flip_stats(p, rng), v).len()
}
