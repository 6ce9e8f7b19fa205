use std::io::Write;

use super::harness::{Procedure, SimConfig, SweepParam};
use crate::error::{Error, Result};
use crate::fmt::real;

/// One `(grid value, replicate, procedure)` outcome.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Record {
    pub grid_value: f64,
    pub replicate: u32,
    pub procedure: Procedure,
    pub rejections: usize,
    pub false_count: usize,
    pub true_count: usize,
    /// `true_count / nnz` (0 under the global null).
    pub power_contrib: f64,
}

impl Record {
    /// Score `rejected` against the known support; a rejection off the
    /// support is false whatever the coefficient's value.
    pub fn score(
        grid_value: f64,
        replicate: u32,
        procedure: Procedure,
        rejected: &[usize],
        support: &[usize],
    ) -> Self {
        let true_count = rejected
            .iter()
            .filter(|j| support.binary_search(j).is_ok())
            .count();
        let nnz = support.len();
        Record {
            grid_value,
            replicate,
            procedure,
            rejections: rejected.len(),
            false_count: rejected.len() - true_count,
            true_count,
            power_contrib: if nnz == 0 {
                0.0
            } else {
                true_count as f64 / nnz as f64
            },
        }
    }
}

/// Per-procedure means with standard errors.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aggregate {
    pub procedure: Procedure,
    pub replicates: usize,
    pub power: f64,
    pub power_se: f64,
    /// Fraction of replicates with `V >= k`.
    pub kfwer: f64,
    pub kfwer_se: f64,
    pub mean_rejections: f64,
    pub mean_false: f64,
    pub mean_false_se: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimReport {
    pub param: SweepParam,
    pub value: f64,
    pub k: u32,
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SimReport {
    pub fn new(param: SweepParam, value: f64, cfg: &SimConfig, records: Vec<Record>) -> Self {
        let aggregates = cfg
            .procedures
            .iter()
            .map(|&proc| {
                let rows: Vec<&Record> = records.iter().filter(|r| r.procedure == proc).collect();
                let power: Vec<f64> = rows.iter().map(|r| r.power_contrib).collect();
                let exceed: Vec<f64> = rows
                    .iter()
                    .map(|r| f64::from(u8::from(r.false_count >= cfg.k as usize)))
                    .collect();
                let falses: Vec<f64> = rows.iter().map(|r| r.false_count as f64).collect();
                let rejections: Vec<f64> = rows.iter().map(|r| r.rejections as f64).collect();
                let (power, power_se) = mean_se(&power);
                let (kfwer, _) = mean_se(&exceed);
                let n = rows.len() as f64;
                let (mean_false, mean_false_se) = mean_se(&falses);
                Aggregate {
                    procedure: proc,
                    replicates: rows.len(),
                    power,
                    power_se,
                    kfwer,
                    kfwer_se: (kfwer * (1.0 - kfwer) / n).sqrt(),
                    mean_rejections: mean_se(&rejections).0,
                    mean_false,
                    mean_false_se,
                }
            })
            .collect();
        SimReport {
            param,
            value,
            k: cfg.k,
            records,
            aggregates,
        }
    }

    pub fn aggregate(&self, proc: Procedure) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.procedure == proc)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// One row per `(grid value, replicate, procedure)`.
pub fn write_tidy<W: Write>(reports: &[SimReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "grid_param",
        "grid_value",
        "replicate",
        "procedure",
        "R",
        "V",
        "true_count",
        "power_contrib",
    ])
    .map_err(csv_err)?;
    for rep in reports {
        for r in &rep.records {
            w.write_record([
                rep.param.name().to_string(),
                real(r.grid_value),
                r.replicate.to_string(),
                r.procedure.name().to_string(),
                r.rejections.to_string(),
                r.false_count.to_string(),
                r.true_count.to_string(),
                real(r.power_contrib),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Means and standard errors per grid value and procedure.
pub fn write_aggregate<W: Write>(reports: &[SimReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "grid_param",
        "grid_value",
        "procedure",
        "replicates",
        "power",
        "power_se",
        "kfwer",
        "kfwer_se",
        "mean_R",
        "mean_V",
        "mean_V_se",
    ])
    .map_err(csv_err)?;
    for rep in reports {
        for a in &rep.aggregates {
            w.write_record([
                rep.param.name().to_string(),
                real(rep.value),
                a.procedure.name().to_string(),
                a.replicates.to_string(),
                real(a.power),
                real(a.power_se),
                real(a.kfwer),
                real(a.kfwer_se),
                real(a.mean_rejections),
                real(a.mean_false),
                real(a.mean_false_se),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scoring_identity() {
        let r = Record::score(0.0, 0, Procedure::Holm, &[1, 4, 7, 9], &[2, 4, 9]);
        assert_eq!((r.rejections, r.true_count, r.false_count), (4, 2, 2));
        assert_eq!(r.false_count + r.true_count, r.rejections);
        assert!((r.power_contrib - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn global_null_counts_everything_false() {
        let r = Record::score(0.0, 0, Procedure::Knockoffs, &[0, 3], &[]);
        assert_eq!((r.false_count, r.true_count, r.power_contrib), (2, 0, 0.0));
    }

    #[test]
    fn aggregates() {
        let mut cfg = SimConfig::desk();
        cfg.procedures = vec![Procedure::Holm];
        cfg.k = 2;
        let recs = vec![
            Record::score(0.0, 0, Procedure::Holm, &[0, 1, 2], &[0]),
            Record::score(0.0, 1, Procedure::Holm, &[0], &[0]),
        ];
        let rep = SimReport::new(SweepParam::Rho, 0.0, &cfg, recs);
        let a = rep.aggregate(Procedure::Holm).unwrap();
        assert_eq!(a.replicates, 2);
        assert_eq!(a.power, 1.0);
        assert_eq!(a.kfwer, 0.5);
        assert_eq!(a.mean_false, 1.0);
        let mut buf = Vec::new();
        write_aggregate(&[rep], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("grid_param,grid_value,procedure"));
        assert!(text.contains("rho,0,holm,2,1,0,0.5"));
    }
}
