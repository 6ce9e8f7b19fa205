use std::path::Path;

use crate::error::{Error, Result};

/// Which procedure a critical-value vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcedureTag {
    HolmKfwer,
    StepdownGeneric,
    Stepup,
}

/// Non-decreasing critical values `c_1 <= … <= c_p` for sorted p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValues {
    values: Vec<f64>,
    tag: ProcedureTag,
}

impl CriticalValues {
    pub fn new(values: Vec<f64>, tag: ProcedureTag) -> Result<Self> {
        if values.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
            return Err(Error::InvalidInput(
                "critical values must lie in (0, 1)".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "critical values must be non-decreasing".into(),
            ));
        }
        Ok(CriticalValues { values, tag })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tag(&self) -> ProcedureTag {
        self.tag
    }

    /// Read one real per line; blank lines and `#` comments are ignored.
    pub fn load(path: &Path, tag: ProcedureTag) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, tag)
    }

    pub fn parse(text: &str, tag: ProcedureTag) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: i as u64 + 1,
                column: 1,
                message: format!("not a real number: {line:?}"),
            })?;
            values.push(v);
        }
        Self::new(values, tag)
    }
}

/// Generalized Holm constants: `kα/p` for `i <= k`, `kα/(p + k − i)` after.
pub fn holm_kfwer_constants(p: usize, k: u32, alpha: f64) -> CriticalValues {
    let k = k as usize;
    let ka = k as f64 * alpha;
    let values = (1..=p)
        .map(|i| {
            if i <= k {
                ka / p as f64
            } else {
                ka / (p + k - i) as f64
            }
        })
        .map(|c| c.min(1.0))
        .collect();
    CriticalValues {
        values,
        tag: ProcedureTag::HolmKfwer,
    }
}

/// Flat `kα/p` constants: valid for k-FWER under arbitrary dependence.
pub fn flat_constants(p: usize, k: u32, alpha: f64) -> CriticalValues {
    let c = (k as f64 * alpha / p as f64).min(1.0);
    CriticalValues {
        values: vec![c; p],
        tag: ProcedureTag::Stepup,
    }
}

fn sorted_indices(p_values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p_values.len()).collect();
    idx.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    idx
}

/// Step-down: reject `H_(1..i)` until the first `p_(i) > c_i`.
pub fn step_down(p_values: &[f64], constants: &[f64]) -> Vec<usize> {
    sorted_indices(p_values)
        .into_iter()
        .zip(constants)
        .take_while(|(j, c)| p_values[*j] <= **c)
        .map(|(j, _)| j)
        .collect()
}

/// Step-up: reject `H_(1..i*)` for the largest `i*` with `p_(i*) <= c_i*`.
pub fn step_up(p_values: &[f64], constants: &[f64]) -> Vec<usize> {
    let idx = sorted_indices(p_values);
    let last = idx
        .iter()
        .zip(constants)
        .rposition(|(j, c)| p_values[*j] <= *c);
    match last {
        Some(i) => idx[..=i].to_vec(),
        None => Vec::new(),
    }
}

pub fn holm_kfwer(p_values: &[f64], k: u32, alpha: f64) -> Vec<usize> {
    let c = holm_kfwer_constants(p_values.len(), k, alpha);
    step_down(p_values, c.values())
}

/// Step-up with caller-supplied constants, one per hypothesis.
pub fn stepup_kfwer(p_values: &[f64], constants: &CriticalValues) -> Result<Vec<usize>> {
    if constants.values().len() != p_values.len() {
        return Err(Error::MissingConstants);
    }
    Ok(step_up(p_values, constants.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn k1_is_classical_holm() {
        let c = holm_kfwer_constants(5, 1, 0.05);
        for (i, v) in c.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.05 / (5 - i) as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn hand_evaluated_holm() {
        let c = holm_kfwer_constants(4, 2, 0.1);
        let expected = [0.05, 0.05, 0.2 / 3.0, 0.1];
        for (a, b) in c.values().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(holm_kfwer(&[0.01, 0.04, 0.06, 0.9], 2, 0.1), vec![0, 1, 2]);
        assert!(holm_kfwer(&[1.0; 6], 2, 0.1).is_empty());
    }

    #[test]
    fn flat_stepup_rejects_exactly_k() {
        let (p, k, alpha) = (20, 3u32, 0.05);
        let c = flat_constants(p, k, alpha);
        let thr = c.values()[0];
        let mut pv = vec![1.0; p];
        for j in [4, 9, 15] {
            pv[j] = thr - 1e-9;
        }
        assert_eq!(stepup_kfwer(&pv, &c).unwrap(), vec![4, 9, 15]);
        assert!(stepup_kfwer(&vec![1.0; p], &c).unwrap().is_empty());
        assert_eq!(
            stepup_kfwer(&pv[..5], &c).unwrap_err(),
            Error::MissingConstants
        );
    }

    #[test]
    fn step_up_goes_past_a_gap() {
        let c = [0.1, 0.2, 0.3];
        let pv = [0.05, 0.25, 0.28];
        assert_eq!(step_down(&pv, &c), vec![0]);
        assert_eq!(step_up(&pv, &c), vec![0, 1, 2]);
    }

    #[test]
    fn parse_constants_file() {
        let c =
            CriticalValues::parse("# header\n0.01\n\n0.02\n0.02\n", ProcedureTag::Stepup).unwrap();
        assert_eq!(c.values(), &[0.01, 0.02, 0.02]);
        let err = CriticalValues::parse("0.01\nabc\n", ProcedureTag::Stepup).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(CriticalValues::parse("0.2\n0.1\n", ProcedureTag::Stepup).is_err());
    }

    fn pvals() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..40)
    }

    proptest! {
        #[test]
        fn step_up_contains_step_down(pv in pvals(), k in 1u32..5, alpha in 0.01f64..0.5) {
            let c = holm_kfwer_constants(pv.len(), k, alpha);
            let down = step_down(&pv, c.values());
            let up = step_up(&pv, c.values());
            prop_assert!(down.iter().all(|j| up.contains(j)));
        }

        #[test]
        fn monotone_in_alpha(pv in pvals(), k in 1u32..5, a in 0.01f64..0.5, b in 0.01f64..0.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = holm_kfwer(&pv, k, lo);
            let big = holm_kfwer(&pv, k, hi);
            prop_assert!(small.iter().all(|j| big.contains(j)));
            let small = step_up(&pv, flat_constants(pv.len(), k, lo).values());
            let big = step_up(&pv, flat_constants(pv.len(), k, hi).values());
            prop_assert!(small.iter().all(|j| big.contains(j)));
        }
    }
}
