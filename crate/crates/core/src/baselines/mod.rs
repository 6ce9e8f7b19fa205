//! p-value based k-FWER procedures used as comparators.

mod critical;
mod ols;
mod stepdown;

pub use critical::{
    flat_constants, holm_kfwer, holm_kfwer_constants, step_down, step_up, stepup_kfwer,
    CriticalValues, ProcedureTag,
};
pub use ols::{ols_pvalues, PValueVector};
pub use stepdown::{
    critical_p_value, stepdown_generic, stepdown_t, MultivariateTSampler, NullSampler,
    PValueSampler, StepDownConfig, StepDownResult,
};
