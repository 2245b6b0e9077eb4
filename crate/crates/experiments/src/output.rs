//! CSV tables, the JSON manifest and field dumps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    pub flag_counts: BTreeMap<String, usize>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, seeds: Vec<u64>) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("wnlw-experiments".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("wnlw-core".to_string(), wnlw_core::VERSION.to_string());
        versions.insert("output-format".to_string(), FORMAT_VERSION.to_string());
        Self {
            command: command.to_string(),
            config: config.clone(),
            seeds,
            versions,
            flag_counts: BTreeMap::new(),
            files: Vec::new(),
        }
    }
}

/// Write `rows` as `name` under `dir` with a header from the row type; an
/// empty table writes nothing. Returns whether a file was written.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<bool> {
    if rows.is_empty() {
        return Ok(false);
    }
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(true)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let r = BufReader::new(File::open(dir.join("manifest.json"))?);
    Ok(serde_json::from_reader(r)?)
}

/// Write the tables that are nonempty, then the manifest listing them.
pub fn write_outputs(dir: &Path, mut manifest: Manifest, tables: &[(&str, &dyn CsvTable)]) -> Result<Manifest> {
    for (name, table) in tables {
        if table.write(dir, name)? {
            manifest.files.push((*name).to_string());
        }
    }
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

/// A row set that can be written as CSV.
pub trait CsvTable {
    fn write(&self, dir: &Path, name: &str) -> Result<bool>;
}

impl<T: Serialize> CsvTable for Vec<T> {
    fn write(&self, dir: &Path, name: &str) -> Result<bool> {
        write_csv(dir, name, self)
    }
}
