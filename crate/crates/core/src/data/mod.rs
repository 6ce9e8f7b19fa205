//! Tabular data ingestion, cleaning and truth-panel scoring.

mod dataset;
mod panel;

pub use dataset::{clean_dataset, read_csv, read_csv_path, read_design_csv, Dataset};
pub use panel::{score_against_panel, TruthPanel};
