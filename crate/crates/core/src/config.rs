//! Run configuration shared by the command-line front end.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_rates::{pfer_budget_to_v, FdxConfig};
use crate::lasso::PathSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Construct,
    Select,
    Simulate,
    Analyze,
}

/// The single error-rate target of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum ErrorTarget {
    Kfwer { k: u32, alpha: f64 },
    Pfer { budget: f64, v: u32 },
    Fdx(FdxConfig),
    RomanoWolf { gamma: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub k: Option<u32>,
    pub alpha: Option<f64>,
    /// FDX exceedance level for the augmentation mode.
    pub gamma: Option<f64>,
    pub pfer_budget: Option<f64>,
    /// FDX exceedance level for the k-search mode.
    pub rw_gamma: Option<f64>,
    pub seed: u64,
    pub path: PathSpec,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode, seed: u64) -> Self {
        RunConfig {
            mode,
            k: None,
            alpha: None,
            gamma: None,
            pfer_budget: None,
            rw_gamma: None,
            seed,
            path: PathSpec::default(),
            input: None,
            output: None,
        }
    }

    /// Resolve and validate the error-rate target. `construct` and `simulate`
    /// take none (the latter carries its own in the simulation config).
    pub fn target(&self) -> Result<Option<ErrorTarget>> {
        self.path.validate()?;
        if self.gamma.is_some() && self.k.is_none() {
            return Err(Error::Config("gamma requires k".into()));
        }
        let set = [
            self.pfer_budget.is_some(),
            self.gamma.is_some(),
            self.rw_gamma.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if set > 1 {
            return Err(Error::Config(
                "pfer, fdx-gamma and rw-gamma are mutually exclusive".into(),
            ));
        }
        let alpha = self.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        match self.mode {
            Mode::Construct | Mode::Simulate => {
                if set > 0 || self.k.is_some() {
                    return Err(Error::Config(format!(
                        "{:?} mode takes no error-rate target",
                        self.mode
                    )));
                }
                Ok(None)
            }
            Mode::Select => {
                if set > 0 {
                    return Err(Error::Config("select takes only k and alpha".into()));
                }
                let k = self
                    .k
                    .ok_or_else(|| Error::Config("select requires k".into()))?;
                check_k(k)?;
                Ok(Some(ErrorTarget::Kfwer { k, alpha }))
            }
            Mode::Analyze => {
                if let Some(budget) = self.pfer_budget {
                    if self.k.is_some() {
                        return Err(Error::Config("pfer takes no k".into()));
                    }
                    let v = pfer_budget_to_v(budget)?;
                    return Ok(Some(ErrorTarget::Pfer { budget, v }));
                }
                if let Some(gamma) = self.gamma {
                    let fdx = FdxConfig {
                        gamma,
                        alpha,
                        k: self.k.expect("checked above"),
                    };
                    fdx.validate()?;
                    return Ok(Some(ErrorTarget::Fdx(fdx)));
                }
                if let Some(gamma) = self.rw_gamma {
                    if self.k.is_some() {
                        return Err(Error::Config("rw-gamma searches k; do not set it".into()));
                    }
                    if !(gamma > 0.0 && gamma < 1.0) {
                        return Err(Error::Config(format!("gamma = {gamma} must lie in (0, 1)")));
                    }
                    return Ok(Some(ErrorTarget::RomanoWolf { gamma, alpha }));
                }
                Err(Error::Config(
                    "analyze requires one of pfer, fdx-gamma with k, or rw-gamma".into(),
                ))
            }
        }
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_without_k() {
        let mut cfg = RunConfig::new(Mode::Analyze, 1);
        cfg.gamma = Some(0.1);
        assert!(matches!(cfg.target(), Err(Error::Config(_))));
    }

    #[test]
    fn pfer_maps_to_v() {
        let mut cfg = RunConfig::new(Mode::Analyze, 1);
        cfg.pfer_budget = Some(4.0);
        assert_eq!(
            cfg.target().unwrap(),
            Some(ErrorTarget::Pfer { budget: 4.0, v: 4 })
        );
    }

    #[test]
    fn targets_are_exclusive() {
        let mut cfg = RunConfig::new(Mode::Analyze, 1);
        cfg.pfer_budget = Some(4.0);
        cfg.rw_gamma = Some(0.1);
        assert!(cfg.target().is_err());
        let mut cfg = RunConfig::new(Mode::Analyze, 1);
        assert!(cfg.target().is_err());
        cfg.k = Some(2);
        cfg.gamma = Some(0.2);
        cfg.alpha = Some(0.5);
        assert!(matches!(cfg.target().unwrap(), Some(ErrorTarget::Fdx(_))));
    }

    #[test]
    fn select_needs_k() {
        let mut cfg = RunConfig::new(Mode::Select, 1);
        assert!(cfg.target().is_err());
        cfg.k = Some(0);
        assert!(cfg.target().is_err());
        cfg.k = Some(2);
        cfg.alpha = Some(0.5);
        assert_eq!(
            cfg.target().unwrap(),
            Some(ErrorTarget::Kfwer { k: 2, alpha: 0.5 })
        );
        cfg.alpha = Some(1.5);
        assert!(cfg.target().is_err());
    }

    #[test]
    fn construct_has_no_target() {
        assert_eq!(RunConfig::new(Mode::Construct, 0).target().unwrap(), None);
    }
}
