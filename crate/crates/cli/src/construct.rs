use anyhow::{Context, Result};
use kfwer_core::data::read_csv_path;
use kfwer_core::fmt::real;
use kfwer_core::knockoff::{construct_knockoffs_with, normalize_columns, KnockoffOptions};
use kfwer_core::{equicorrelated_s, verify_identities};
use serde::Serialize;

use crate::args::ConstructArgs;
use crate::output::{create, sibling, write_json, Manifest};

#[derive(Debug, Serialize)]
struct ConstructSummary {
    n: usize,
    p: usize,
    s: Vec<String>,
    gram_deviation: String,
    cross_deviation: String,
}

pub fn run(args: &ConstructArgs) -> Result<()> {
    let ds = read_csv_path(&args.input, None)?;
    let design = normalize_columns(ds.design())?;
    let s = equicorrelated_s(&design.gram())?;
    let opts = KnockoffOptions {
        allow_row_augment: args.allow_row_augment,
        ..KnockoffOptions::default()
    };
    let aug = construct_knockoffs_with(&design, &s, &opts)?;
    let check = verify_identities(&aug, 1e-8);
    if !check.passed {
        log::warn!(
            "knockoff identities deviate by {:.3e} / {:.3e}",
            check.gram_dev,
            check.cross_dev
        );
    }

    let mut w = csv::Writer::from_writer(create(&args.output)?);
    w.write_record(ds.labels().iter().map(|l| format!("{l}_ko")))?;
    let ko = aug.knockoff();
    for i in 0..ko.nrows() {
        w.write_record((0..ko.ncols()).map(|j| real(ko[(i, j)])))?;
    }
    w.flush()
        .with_context(|| format!("writing {}", args.output.display()))?;

    let summary = ConstructSummary {
        n: aug.n(),
        p: aug.p(),
        s: s.iter().map(|&v| real(v)).collect(),
        gram_deviation: real(check.gram_dev),
        cross_deviation: real(check.cross_dev),
    };
    write_json(
        &sibling(&args.output, "manifest.json"),
        &Manifest::new("construct", args, &summary),
    )
}
