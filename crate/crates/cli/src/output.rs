use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Everything needed to replay a run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, A: Serialize, C: Serialize> {
    pub tool: &'static str,
    pub cli_version: &'static str,
    pub core_version: &'static str,
    pub command: &'static str,
    pub args: &'a A,
    pub config: &'a C,
}

impl<'a, A: Serialize, C: Serialize> Manifest<'a, A, C> {
    pub fn new(command: &'static str, args: &'a A, config: &'a C) -> Self {
        Manifest {
            tool: "kfwer",
            cli_version: env!("CARGO_PKG_VERSION"),
            core_version: kfwer_core::VERSION,
            command,
            args,
            config,
        }
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `report.csv` -> `report.<ext>`.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}
