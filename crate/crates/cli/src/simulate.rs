use anyhow::{Context, Result};
use kfwer_core::sim::{
    run_sweep, write_aggregate, write_tidy, Procedure, SignMode, SimConfig, SweepParam,
};
use std::io::Write;

use crate::args::{PresetArg, SimulateArgs, SweepArg};
use crate::output::{create, write_json, Manifest};

pub fn run(args: &SimulateArgs) -> Result<()> {
    let mut cfg = match args.preset {
        PresetArg::Desk => SimConfig::desk(),
        PresetArg::Paper => SimConfig::paper(),
    };
    cfg.seed = args.seed;
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(list) = &args.procedures {
        cfg.procedures = list
            .iter()
            .map(|s| s.trim().parse::<Procedure>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(path) = &args.stepup_constants {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cv = kfwer_core::baselines::CriticalValues::parse(
            &text,
            kfwer_core::baselines::ProcedureTag::Stepup,
        )?;
        cfg.stepup_constants = Some(cv.values().to_vec());
    }
    if args.random_signs {
        cfg.signs = SignMode::Random;
    }
    cfg.fixed_design = args.fixed_design;
    cfg.randomize_v = !args.no_randomize;
    cfg.top_up = !args.no_topup;
    let param = match args.sweep {
        SweepArg::Rho => SweepParam::Rho,
        SweepArg::Nnz => SweepParam::Nnz,
        SweepArg::Magnitude => SweepParam::Magnitude,
    };

    let reports = run_sweep(&cfg, param, &args.grid)?;

    let dir = &args.out;
    let mut tidy = create(&dir.join("tidy.csv"))?;
    write_tidy(&reports, &mut tidy)?;
    tidy.flush()?;
    let mut agg = create(&dir.join("aggregate.csv"))?;
    write_aggregate(&reports, &mut agg)?;
    agg.flush()?;
    write_json(
        &dir.join("manifest.json"),
        &Manifest::new("simulate", args, &cfg),
    )?;

    for r in &reports {
        for a in &r.aggregates {
            println!(
                "{}={} {:<10} power {:.3} ({:.3})  {}-FWER {:.4} ({:.4})",
                param.name(),
                r.value,
                a.procedure.name(),
                a.power,
                a.power_se,
                cfg.k,
                a.kfwer,
                a.kfwer_se
            );
        }
    }
    Ok(())
}
