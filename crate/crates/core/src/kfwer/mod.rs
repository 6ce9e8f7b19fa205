//! Knockoff statistics, negative-binomial calibration and the ordered scan.

mod calibration;
mod scan;
mod stats;

pub use calibration::{
    chernoff_bound, chernoff_theta, choose_v, choose_v_randomized, nb_tail,
    randomized_from_uniform, Calibration,
};
pub use scan::{knockoff_fdr_select, select, threshold_select, top_up, SelectionResult};
pub use stats::{compute_stats, KnockoffStats};
