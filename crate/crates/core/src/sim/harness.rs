use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::design::{gen_design, gen_signal, SignMode};
use super::report::{Record, SimReport};
use crate::baselines::{
    flat_constants, holm_kfwer, ols_pvalues, stepdown_t, stepup_kfwer, CriticalValues,
    ProcedureTag, StepDownConfig,
};
use crate::error::{Error, Result};
use crate::kfwer::{choose_v, choose_v_randomized, select, top_up, SelectionResult};
use crate::knockoff::DesignMatrix;
use crate::lasso::PathSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    Knockoffs,
    Holm,
    StepDown,
    StepUp,
}

impl Procedure {
    pub const ALL: [Procedure; 4] = [
        Procedure::Knockoffs,
        Procedure::Holm,
        Procedure::StepDown,
        Procedure::StepUp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Procedure::Knockoffs => "knockoffs",
            Procedure::Holm => "holm",
            Procedure::StepDown => "stepdown",
            Procedure::StepUp => "stepup",
        }
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Procedure::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown procedure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Paper,
    Desk,
    Custom,
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Rho,
    Nnz,
    Magnitude,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Nnz => "nnz",
            SweepParam::Magnitude => "magnitude",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(SweepParam::Rho),
            "nnz" => Ok(SweepParam::Nnz),
            "magnitude" => Ok(SweepParam::Magnitude),
            _ => Err(Error::Config(format!("unknown sweep parameter {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub sigma_sq: f64,
    pub rho: f64,
    pub nnz: usize,
    pub magnitude: f64,
    pub k: u32,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub procedures: Vec<Procedure>,
    pub scale_preset: Preset,
    pub signs: SignMode,
    /// Draw one design per grid point instead of one per replicate.
    pub fixed_design: bool,
    pub randomize_v: bool,
    pub top_up: bool,
    pub path: PathSpec,
    pub stepdown: StepDownConfig,
    /// Step-up critical values; flat `kα/p` when absent.
    pub stepup_constants: Option<Vec<f64>>,
}

impl SimConfig {
    /// `n = 300, p = 90, nnz = 6, σ² = 25`, magnitude 10, 5-FWER at 0.05.
    pub fn desk() -> Self {
        SimConfig {
            n: 300,
            p: 90,
            sigma_sq: 25.0,
            rho: 0.0,
            nnz: 6,
            magnitude: 10.0,
            k: 5,
            alpha: 0.05,
            replicates: 500,
            seed: 0,
            procedures: Procedure::ALL.to_vec(),
            scale_preset: Preset::Desk,
            signs: SignMode::Positive,
            fixed_design: false,
            randomize_v: true,
            top_up: true,
            path: PathSpec::default(),
            stepdown: StepDownConfig::default(),
            stepup_constants: None,
        }
    }

    /// `n = 1000, p = 450, nnz = 10, σ² = 25`, 2000 replicates. Step-up is
    /// left out at this size unless added explicitly.
    pub fn paper() -> Self {
        SimConfig {
            n: 1000,
            p: 450,
            nnz: 10,
            replicates: 2000,
            procedures: vec![Procedure::Knockoffs, Procedure::Holm, Procedure::StepDown],
            scale_preset: Preset::Paper,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nnz <= self.p && self.p <= self.n) {
            return Err(Error::Config(format!(
                "need nnz <= p <= n (nnz = {}, p = {}, n = {})",
                self.nnz, self.p, self.n
            )));
        }
        if !(self.sigma_sq > 0.0) {
            return Err(Error::Config("sigma_sq must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Config("rho must lie in [0, 1)".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.k == 0 || !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("need k >= 1 and alpha in (0, 1)".into()));
        }
        if let Some(c) = &self.stepup_constants {
            if c.len() != self.p {
                return Err(Error::MissingConstants);
            }
        }
        self.path.validate()
    }

    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match param {
            SweepParam::Rho => cfg.rho = value,
            SweepParam::Magnitude => cfg.magnitude = value,
            SweepParam::Nnz => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!(
                        "nnz grid value {value} is not a count"
                    )));
                }
                cfg.nnz = value as usize;
            }
        }
        Ok(cfg)
    }

    fn stepup_values(&self) -> Result<CriticalValues> {
        match &self.stepup_constants {
            Some(c) => CriticalValues::new(c.clone(), ProcedureTag::Stepup),
            None => Ok(flat_constants(self.p, self.k, self.alpha)),
        }
    }
}

/// Generator for one `(grid index, replicate)` cell, independent of thread
/// scheduling.
pub fn replicate_rng(seed: u64, grid_index: u32, replicate: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(grid_index) << 32) | u64::from(replicate));
    rng
}

fn fixed_design_rng(seed: u64, grid_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    rng.set_stream(u64::from(grid_index));
    rng
}

/// The knockoffs procedure as run in the simulations: randomized `v` and
/// top-up to `k − 1` when enabled.
#[allow(clippy::too_many_arguments)]
pub fn run_knockoffs<R: Rng + ?Sized>(
    design: &DesignMatrix,
    y: &[f64],
    k: u32,
    alpha: f64,
    randomize: bool,
    with_top_up: bool,
    path: &PathSpec,
    rng: &mut R,
) -> Result<SelectionResult> {
    let (_, stats) = crate::knockoff_stats(design, y, path)?;
    let cal = if randomize {
        choose_v_randomized(k, alpha, rng)?
    } else {
        choose_v(k, alpha)?
    };
    let base = select(&stats, cal.v_used);
    Ok(if with_top_up {
        top_up(&base, &stats, k)
    } else {
        base
    })
}

/// One replicate at one grid point: draw data, run every procedure, score.
pub fn run_replicate(
    cfg: &SimConfig,
    grid_value: f64,
    grid_index: u32,
    replicate: u32,
    fixed: Option<&DesignMatrix>,
) -> Result<Vec<Record>> {
    let mut rng = replicate_rng(cfg.seed, grid_index, replicate);
    let owned;
    let design = match fixed {
        Some(d) => d,
        None => {
            owned = gen_design(cfg.n, cfg.p, cfg.rho, &mut rng)?;
            &owned
        }
    };
    let (beta, support) = gen_signal(cfg.p, cfg.nnz, cfg.magnitude, cfg.signs, &mut rng)?;
    let sigma = cfg.sigma_sq.sqrt();
    let mean = design.values() * DVector::from_column_slice(&beta);
    let y: Vec<f64> = mean
        .iter()
        .map(|m| m + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let needs_pvalues = cfg.procedures.iter().any(|p| *p != Procedure::Knockoffs);
    let pv = if needs_pvalues {
        Some(ols_pvalues(design, &y)?)
    } else {
        None
    };
    let mut records = Vec::with_capacity(cfg.procedures.len());
    for &proc in &cfg.procedures {
        // Every procedure gets its own generator so adding or removing one
        // does not shift the others' draws.
        let mut proc_rng = ChaCha8Rng::from_rng(&mut rng.clone());
        proc_rng.set_stream(proc as u64);
        let rejected: Vec<usize> = match proc {
            Procedure::Knockoffs => {
                run_knockoffs(
                    design,
                    &y,
                    cfg.k,
                    cfg.alpha,
                    cfg.randomize_v,
                    cfg.top_up,
                    &cfg.path,
                    &mut proc_rng,
                )?
                .rejected
            }
            Procedure::Holm => holm_kfwer(&pv.as_ref().unwrap().p_values, cfg.k, cfg.alpha),
            Procedure::StepDown => {
                stepdown_t(
                    pv.as_ref().unwrap(),
                    design,
                    cfg.k,
                    cfg.alpha,
                    &cfg.stepdown,
                    proc_rng,
                )?
                .rejected
            }
            Procedure::StepUp => {
                stepup_kfwer(&pv.as_ref().unwrap().p_values, &cfg.stepup_values()?)?
            }
        };
        records.push(Record::score(
            grid_value, replicate, proc, &rejected, &support,
        ));
    }
    Ok(records)
}

/// One report per grid value; replicates run in parallel and are merged in
/// replicate order.
pub fn run_sweep(base: &SimConfig, param: SweepParam, grid: &[f64]) -> Result<Vec<SimReport>> {
    base.validate()?;
    if base.stepup_constants.is_none() && base.procedures.contains(&Procedure::StepUp) {
        log::warn!(
            "no step-up critical values configured; using flat k*alpha/p constants (valid but low power)"
        );
    }
    let mut reports = Vec::with_capacity(grid.len());
    for (gi, &value) in grid.iter().enumerate() {
        let cfg = base.with_param(param, value)?;
        cfg.validate()?;
        let gi = gi as u32;
        let fixed = if cfg.fixed_design {
            Some(gen_design(
                cfg.n,
                cfg.p,
                cfg.rho,
                &mut fixed_design_rng(cfg.seed, gi),
            )?)
        } else {
            None
        };
        let per_rep: Vec<Vec<Record>> = (0..cfg.replicates as u32)
            .into_par_iter()
            .map(|r| run_replicate(&cfg, value, gi, r, fixed.as_ref()))
            .collect::<Result<_>>()?;
        let records = per_rep.into_iter().flatten().collect();
        reports.push(SimReport::new(param, value, &cfg, records));
    }
    Ok(reports)
}
