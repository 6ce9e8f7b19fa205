use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Raw design with column labels and a response that may have gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    design: DMatrix<f64>,
    response: Vec<Option<f64>>,
    labels: Vec<String>,
    response_name: String,
}

impl Dataset {
    pub fn new(
        design: DMatrix<f64>,
        response: Vec<Option<f64>>,
        labels: Vec<String>,
        response_name: impl Into<String>,
    ) -> Result<Self> {
        if labels.len() != design.ncols() {
            return Err(Error::DimensionError(format!(
                "{} labels for {} columns",
                labels.len(),
                design.ncols()
            )));
        }
        if response.len() != design.nrows() {
            return Err(Error::DimensionError(format!(
                "response has {} entries for {} rows",
                response.len(),
                design.nrows()
            )));
        }
        Ok(Dataset {
            design,
            response,
            labels,
            response_name: response_name.into(),
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn response(&self) -> &[Option<f64>] {
        &self.response
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    /// Response without gaps; fails if any value is missing.
    pub fn response_values(&self) -> Result<Vec<f64>> {
        self.response
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| Error::InvalidInput(format!("response missing in row {}", i + 1)))
            })
            .collect()
    }

    /// Count of nonzero entries per column.
    pub fn column_counts(&self) -> Vec<usize> {
        self.design
            .column_iter()
            .map(|c| c.iter().filter(|&&v| v != 0.0).count())
            .collect()
    }
}

/// Parse a headered CSV. `response` names the response column; every other
/// column is a design column. Empty response cells are missing; an empty or
/// non-numeric design cell is an error.
pub fn read_csv<R: Read>(reader: R, response: &str) -> Result<Dataset> {
    read_table(reader, Some(response))
}

/// Parse a headered CSV in which every column is a design column. The
/// response of the returned dataset is entirely missing.
pub fn read_design_csv<R: Read>(reader: R) -> Result<Dataset> {
    read_table(reader, None)
}

fn read_table<R: Read>(mut reader: R, response: Option<&str>) -> Result<Dataset> {
    let mut text = Vec::new();
    reader.read_to_end(&mut text)?;
    // Line numbers come from byte offsets; the reader's own count lags on
    // CRLF input.
    let newlines: Vec<u64> = text
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .map(|(i, _)| i as u64)
        .collect();
    // A record start may sit on the `\n` of the previous CRLF.
    let line_of = |byte: u64| newlines.partition_point(|&nl| nl <= byte) as u64 + 1;
    let parse_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| line_of(p.byte()));
        let column = match e.kind() {
            csv::ErrorKind::UnequalLengths { len, .. } => *len as usize,
            _ => 0,
        };
        Error::Parse {
            line,
            column,
            message: e.to_string(),
        }
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_slice());
    let headers = rdr.headers().map_err(parse_err)?.clone();
    let resp_col =
        match response {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidInput(format!("response column {name:?} not found"))
            })?),
            None => None,
        };
    let labels: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != resp_col)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut y = Vec::new();
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_err)?;
        let line = rec.position().map_or(0, |p| line_of(p.byte()));
        for (c, field) in rec.iter().enumerate() {
            let parsed = if field.is_empty() {
                None
            } else {
                Some(field.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    column: c + 1,
                    message: format!("not a number: {field:?}"),
                })?)
            };
            if Some(c) == resp_col {
                y.push(parsed);
            } else {
                cells.push(parsed.ok_or_else(|| Error::Parse {
                    line,
                    column: c + 1,
                    message: format!("missing value in design column {:?}", &headers[c]),
                })?);
            }
        }
    }
    let n = cells.len() / labels.len().max(1);
    if resp_col.is_none() {
        y = vec![None; n];
    }
    let design = DMatrix::from_row_slice(n, labels.len(), &cells);
    Dataset::new(design, y, labels, response.unwrap_or(""))
}

pub fn read_csv_path(path: &Path, response: Option<&str>) -> Result<Dataset> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file), response)
}

/// Drop rows with a missing response, then columns with fewer than
/// `min_mutations` nonzero entries among the remaining rows, then require full
/// column rank. Nothing is dropped to repair rank: the offending columns are
/// reported instead.
pub fn clean_dataset(ds: &Dataset, min_mutations: usize) -> Result<Dataset> {
    if min_mutations == 0 {
        return Err(Error::Config("min_mutations must be at least 1".into()));
    }
    let rows: Vec<usize> = (0..ds.n()).filter(|&i| ds.response[i].is_some()).collect();
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let culled = ds.design.select_rows(&rows);
    let cols: Vec<usize> = (0..ds.p())
        .filter(|&j| culled.column(j).iter().filter(|&&v| v != 0.0).count() >= min_mutations)
        .collect();
    if cols.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let design = culled.select_columns(&cols);
    let labels: Vec<String> = cols.iter().map(|&j| ds.labels[j].clone()).collect();
    let dependent = dependent_columns(&design);
    if !dependent.is_empty() {
        return Err(Error::RankDeficientAfterCleaning {
            columns: dependent.iter().map(|&j| labels[j].clone()).collect(),
        });
    }
    let response = rows.iter().map(|&i| ds.response[i]).collect();
    Dataset::new(design, response, labels, ds.response_name.clone())
}

/// Columns lying (numerically) in the span of the columns before them, found
/// by modified Gram–Schmidt in column order.
fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for (j, col) in x.column_iter().enumerate() {
        let norm = col.norm();
        let mut v = col.clone_owned();
        for q in &basis {
            let d = q.dot(&v);
            v.axpy(-d, q, 1.0);
        }
        let rest = v.norm();
        if norm == 0.0 || rest <= 1e-10 * norm {
            dependent.push(j);
        } else {
            basis.push(v / rest);
        }
    }
    dependent
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
y,a,b,c
1.5,1,0,1
,0,1,1
2.0,1,1,0
0.5,0,0,1
";

    #[test]
    fn reads_and_marks_missing() {
        let ds = read_csv(SAMPLE.as_bytes(), "y").unwrap();
        assert_eq!(ds.labels(), &["a", "b", "c"]);
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.response()[1], None);
        assert_eq!(ds.design()[(2, 1)], 1.0);
    }

    #[test]
    fn parse_error_names_line_and_column() {
        let bad = "y,a,b\n1,0,1\n2,x,1\n";
        match read_csv(bad.as_bytes(), "y").unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let crlf = "y,a,b\r\n1,0,1\r\n2,x,1\r\n";
        assert!(matches!(
            read_csv(crlf.as_bytes(), "y").unwrap_err(),
            Error::Parse {
                line: 3,
                column: 2,
                ..
            }
        ));
        let ragged = "y,a,b\n1,0,1\n2,1\n";
        assert!(matches!(
            read_csv(ragged.as_bytes(), "y").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        let gap = "y,a\n1,\n";
        assert!(matches!(
            read_csv(gap.as_bytes(), "y").unwrap_err(),
            Error::Parse {
                line: 2,
                column: 2,
                ..
            }
        ));
        assert!(matches!(
            read_csv(SAMPLE.as_bytes(), "z").unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn design_only() {
        let ds = read_design_csv("a,b\n1,2\n3,4\n5,6\n".as_bytes()).unwrap();
        assert_eq!((ds.n(), ds.p()), (3, 2));
        assert!(ds.response().iter().all(Option::is_none));
    }

    #[test]
    fn cleaning_counts_on_culled_rows() {
        let ds = read_csv(SAMPLE.as_bytes(), "y").unwrap();
        // After dropping row 2: a has 2 ones, b has 1, c has 2.
        let cleaned = clean_dataset(&ds, 2).unwrap();
        assert_eq!(cleaned.n(), 3);
        assert_eq!(cleaned.labels(), &["a", "c"]);
        assert_eq!(cleaned.response_values().unwrap(), vec![1.5, 2.0, 0.5]);
        assert_eq!(clean_dataset(&cleaned, 2).unwrap(), cleaned);
    }

    #[test]
    fn clean_dataset_without_changes() {
        let text = "y,a,b\n1,1,0\n2,0,1\n3,1,1\n";
        let ds = read_csv(text.as_bytes(), "y").unwrap();
        assert_eq!(clean_dataset(&ds, 1).unwrap(), ds);
    }

    #[test]
    fn rank_deficiency_lists_columns() {
        let text = "y,a,b,c\n1,1,0,1\n2,0,1,1\n3,1,0,1\n4,0,1,1\n";
        let ds = read_csv(text.as_bytes(), "y").unwrap();
        match clean_dataset(&ds, 1).unwrap_err() {
            Error::RankDeficientAfterCleaning { columns } => assert_eq!(columns, vec!["c"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_after_cleaning() {
        let text = "y,a\n,1\n,0\n";
        let ds = read_csv(text.as_bytes(), "y").unwrap();
        assert_eq!(clean_dataset(&ds, 1).unwrap_err(), Error::EmptyDataset);
        let text = "y,a\n1,1\n2,0\n";
        let ds = read_csv(text.as_bytes(), "y").unwrap();
        assert_eq!(clean_dataset(&ds, 5).unwrap_err(), Error::EmptyDataset);
    }
}
