use anyhow::{Context, Result};
use kfwer_core::baselines::{
    holm_kfwer, ols_pvalues, stepdown_t, stepup_kfwer, CriticalValues, ProcedureTag, StepDownConfig,
};
use kfwer_core::config::{ErrorTarget, Mode, RunConfig};
use kfwer_core::data::{clean_dataset, read_csv_path, score_against_panel, TruthPanel};
use kfwer_core::error_rates::{fdx_augment, romano_wolf_fdx};
use kfwer_core::fmt::real;
use kfwer_core::kfwer::knockoff_fdr_select;
use kfwer_core::knockoff::row_augment;
use kfwer_core::{
    choose_v, choose_v_randomized, knockoff_stats, normalize_columns, select, top_up, Calibration,
    DesignMatrix, Error, KnockoffStats, SelectionResult,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{AnalyzeArgs, DataArgs, SelectArgs};
use crate::output::{create, sibling, write_json, Manifest};

const STREAM_CALIBRATION: u64 = 0;
const STREAM_ROW_AUGMENT: u64 = 1;
const STREAM_STEPDOWN: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

struct Prepared {
    labels: Vec<String>,
    samples: usize,
    /// Cleaned, normalized design before any row padding.
    design: DesignMatrix,
    y: Vec<f64>,
    stats: KnockoffStats,
    padded_rows: usize,
}

fn prepare(data: &DataArgs) -> Result<Prepared> {
    let raw = read_csv_path(&data.input, Some(&data.response))?;
    let ds = clean_dataset(&raw, data.min_mutations)?;
    let mut y = ds.response_values()?;
    let mut x = ds.design().clone();
    if data.center {
        center(&mut x, &mut y);
    }
    let design = normalize_columns(&x)?;
    let (fit_design, fit_y) = if data.allow_row_augment && design.n() < 2 * design.p() {
        row_augment(&design, &y, &mut stream(data.seed, STREAM_ROW_AUGMENT))?
    } else {
        (design.clone(), y.clone())
    };
    let padded_rows = fit_design.n() - design.n();
    let (_, stats) = knockoff_stats(&fit_design, &fit_y, &data.path.spec())?;
    Ok(Prepared {
        labels: ds.labels().to_vec(),
        samples: ds.n(),
        design,
        y,
        stats,
        padded_rows,
    })
}

fn center(x: &mut DMatrix<f64>, y: &mut [f64]) {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    y.iter_mut().for_each(|v| *v -= my);
    for mut col in x.column_iter_mut() {
        let m = col.sum() / n;
        col.add_scalar_mut(-m);
    }
}

#[derive(Debug, Serialize)]
struct CalibrationOut {
    v: u32,
    omega: String,
    randomized: bool,
    draw: Option<String>,
    v_used: u32,
    /// `deterministic`, `v` or `v+1`.
    branch: &'static str,
}

impl From<&Calibration> for CalibrationOut {
    fn from(c: &Calibration) -> Self {
        let branch = match (c.randomized, c.v_used == c.v) {
            (false, _) => "deterministic",
            (true, true) => "v",
            (true, false) => "v+1",
        };
        CalibrationOut {
            v: c.v,
            omega: real(c.omega),
            randomized: c.randomized,
            draw: c.draw.map(real),
            v_used: c.v_used,
            branch,
        }
    }
}

#[derive(Debug, Serialize)]
struct RomanoWolfOut {
    k_hat: u32,
    capped: bool,
    rejections_by_k: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct ProcedureOut {
    procedure: String,
    rejected: Vec<String>,
    true_count: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ResultFile {
    target: ErrorTarget,
    response: String,
    samples: usize,
    variables: usize,
    padded_rows: usize,
    calibration: Option<CalibrationOut>,
    threshold: String,
    cutoff_index: usize,
    v_used: u32,
    topped_up: usize,
    rejected: Vec<String>,
    true_count: Option<usize>,
    romano_wolf: Option<RomanoWolfOut>,
    comparators: Vec<ProcedureOut>,
}

struct Shared<'a> {
    data: &'a DataArgs,
    randomize: bool,
    with_top_up: bool,
}

fn calibrate(k: u32, alpha: f64, shared: &Shared) -> Result<Calibration> {
    Ok(if shared.randomize {
        choose_v_randomized(k, alpha, &mut stream(shared.data.seed, STREAM_CALIBRATION))?
    } else {
        choose_v(k, alpha)?
    })
}

fn kfwer_selection(
    k: u32,
    alpha: f64,
    stats: &KnockoffStats,
    shared: &Shared,
) -> Result<(Calibration, SelectionResult)> {
    let cal = calibrate(k, alpha, shared)?;
    let base = select(stats, cal.v_used);
    let res = if shared.with_top_up {
        top_up(&base, stats, k)
    } else {
        base
    };
    Ok((cal, res))
}

pub fn run_select(args: &SelectArgs) -> Result<()> {
    let mut cfg = RunConfig::new(Mode::Select, args.data.seed);
    cfg.k = args.k;
    cfg.alpha = Some(args.alpha);
    fill_common(&mut cfg, &args.data);
    let shared = Shared {
        data: &args.data,
        randomize: !args.no_randomize,
        with_top_up: !args.no_topup,
    };
    execute("select", args, &cfg, &shared)
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let mut cfg = RunConfig::new(Mode::Analyze, args.data.seed);
    cfg.k = args.k;
    cfg.alpha = Some(args.alpha);
    cfg.gamma = args.fdx_gamma;
    cfg.pfer_budget = args.pfer;
    cfg.rw_gamma = args.rw_gamma;
    fill_common(&mut cfg, &args.data);
    let shared = Shared {
        data: &args.data,
        randomize: !args.no_randomize,
        with_top_up: !args.no_topup,
    };
    execute("analyze", args, &cfg, &shared)
}

fn fill_common(cfg: &mut RunConfig, data: &DataArgs) {
    cfg.path = data.path.spec();
    cfg.input = Some(data.input.clone());
    cfg.output = Some(data.out.clone());
}

fn execute<A: Serialize>(
    command: &'static str,
    args: &A,
    cfg: &RunConfig,
    shared: &Shared,
) -> Result<()> {
    let data = shared.data;
    let target = cfg
        .target()?
        .expect("select and analyze always carry a target");
    if let Some(q) = data.fdr_q {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Config(format!("fdr-q = {q} must lie in (0, 1)")).into());
        }
    }
    let panel = data.panel.as_deref().map(TruthPanel::load).transpose()?;
    let prep = prepare(data)?;
    if let Some(panel) = &panel {
        panel.unknown_labels(&prep.labels);
    }
    let stats = &prep.stats;

    let mut calibration = None;
    let mut romano_wolf = None;
    let result = match target {
        ErrorTarget::Kfwer { k, alpha } => {
            let (cal, res) = kfwer_selection(k, alpha, stats, shared)?;
            calibration = Some(CalibrationOut::from(&cal));
            res
        }
        ErrorTarget::Pfer { v, .. } => select(stats, v),
        ErrorTarget::Fdx(fdx) => {
            let (cal, base) = kfwer_selection(fdx.k, fdx.alpha, stats, shared)?;
            calibration = Some(CalibrationOut::from(&cal));
            fdx_augment(&base, fdx.k, fdx.gamma, stats)
        }
        ErrorTarget::RomanoWolf { gamma, alpha } => {
            let mut rng = stream(data.seed, STREAM_CALIBRATION);
            let out = romano_wolf_fdx(stats, gamma, alpha, &mut rng)?;
            romano_wolf = Some(RomanoWolfOut {
                k_hat: out.k_hat,
                capped: out.capped,
                rejections_by_k: out.rejections_by_k,
            });
            out.result
        }
    };

    let names = |idx: &[usize]| {
        idx.iter()
            .map(|&j| prep.labels[j].clone())
            .collect::<Vec<_>>()
    };
    let score = |idx: &[usize]| -> Result<Option<usize>> {
        let Some(panel) = &panel else { return Ok(None) };
        let res = SelectionResult {
            rejected: idx.to_vec(),
            ..SelectionResult::empty(0)
        };
        Ok(Some(score_against_panel(&res, &prep.labels, panel)?.0))
    };

    let mut comparators = Vec::new();
    if let Some(q) = data.fdr_q {
        let fdr = knockoff_fdr_select(stats, q, 1);
        comparators.push(ProcedureOut {
            procedure: format!("knockoff+ fdr q={q}"),
            true_count: score(&fdr.rejected)?,
            rejected: names(&fdr.rejected),
        });
    }
    if data.baselines {
        let (k, alpha) = match target {
            ErrorTarget::Kfwer { k, alpha } => (k, alpha),
            ErrorTarget::Fdx(f) => (f.k, f.alpha),
            _ => {
                return Err(
                    Error::Config("baselines need a k-FWER target (k and alpha)".into()).into(),
                )
            }
        };
        for (name, rejected) in baselines(&prep, k, alpha, data)? {
            comparators.push(ProcedureOut {
                procedure: name.to_string(),
                true_count: score(&rejected)?,
                rejected: names(&rejected),
            });
        }
    }

    write_report(&data.out, &prep, &result)?;
    let file = ResultFile {
        target,
        response: data.response.clone(),
        samples: prep.samples,
        variables: prep.labels.len(),
        padded_rows: prep.padded_rows,
        calibration,
        threshold: real(result.threshold),
        cutoff_index: result.cutoff_index,
        v_used: result.v_used,
        topped_up: result.topped_up,
        rejected: names(&result.rejected),
        true_count: score(&result.rejected)?,
        romano_wolf,
        comparators,
    };
    write_json(&sibling(&data.out, "json"), &file)?;
    write_json(
        &sibling(&data.out, "manifest.json"),
        &Manifest::new(command, args, cfg),
    )?;
    println!("{}", summary_line(&file));
    Ok(())
}

fn baselines(
    prep: &Prepared,
    k: u32,
    alpha: f64,
    data: &DataArgs,
) -> Result<Vec<(&'static str, Vec<usize>)>> {
    let pv = ols_pvalues(&prep.design, &prep.y)?;
    let p = pv.len();
    let holm = holm_kfwer(&pv.p_values, k, alpha);
    let cfg = StepDownConfig {
        draws: data.stepdown_draws,
        ..StepDownConfig::default()
    };
    let stepdown = stepdown_t(
        &pv,
        &prep.design,
        k,
        alpha,
        &cfg,
        stream(data.seed, STREAM_STEPDOWN),
    )?
    .rejected;
    let constants = match &data.stepup_constants {
        Some(path) => CriticalValues::load(path, ProcedureTag::Stepup)
            .with_context(|| format!("reading {}", path.display()))?,
        None => {
            log::warn!("no step-up constants supplied; using flat k*alpha/p");
            kfwer_core::baselines::flat_constants(p, k, alpha)
        }
    };
    let stepup = stepup_kfwer(&pv.p_values, &constants)?;
    Ok(vec![
        ("holm", holm),
        ("stepdown", stepdown),
        ("stepup", stepup),
    ])
}

fn write_report(path: &std::path::Path, prep: &Prepared, result: &SelectionResult) -> Result<()> {
    let stats = &prep.stats;
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["rank", "label", "index", "W", "chi", "rejected"])?;
    for (rank, &j) in stats.order().iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            prep.labels[j].clone(),
            j.to_string(),
            real(stats.w()[j]),
            stats.chi()[j].to_string(),
            u8::from(result.contains(j)).to_string(),
        ])?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// One line in the style of a discoveries table: counts are `true/total`
/// when a panel is given, plain totals otherwise.
fn summary_line(file: &ResultFile) -> String {
    let cell = |t: Option<usize>, total: usize| match t {
        Some(t) => format!("{t}/{total}"),
        None => total.to_string(),
    };
    let mut parts = vec![
        format!("{}", file.response),
        format!("samples {}", file.samples),
        format!("variables {}", file.variables),
        format!("knockoffs {}", cell(file.true_count, file.rejected.len())),
    ];
    for c in &file.comparators {
        parts.push(format!(
            "{} {}",
            c.procedure,
            cell(c.true_count, c.rejected.len())
        ));
    }
    parts.join(" | ")
}
