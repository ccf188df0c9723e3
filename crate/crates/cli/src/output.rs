//! CSV tables and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting (`{:?}`,
//! exponent notation for very small or large magnitudes), so parsing a value
//! back yields the identical `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ap_kinetic::micromacro::RunStats;

/// Writes a header row and numeric rows to `path`, creating parent directories.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|&x| num(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|s| s.parse::<f64>().with_context(|| format!("bad number `{s}` in {}", path.display())))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((header, rows))
}

/// Shortest round-trip text of `x`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Values that can be recorded in a [`Manifest`].
pub trait ManifestValue {
    fn render(&self) -> String;
}

impl ManifestValue for f64 {
    fn render(&self) -> String {
        num(*self)
    }
}

macro_rules! display_value {
    ($($t:ty),*) => {
        $(impl ManifestValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })*
    };
}

display_value!(usize, u64, bool, &str, String);

/// File name for a field at one time, e.g. `phi_t0.25.csv`.
pub fn snapshot_name(field: &str, t: f64) -> String {
    format!("{field}_t{t}.csv")
}

/// Key-value record of a run, written as `key = value` lines.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(experiment: &str) -> Self {
        let mut m = Manifest::default();
        m.push("experiment", experiment);
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ManifestValue) {
        self.entries.push((key.into(), value.render()));
    }

    pub fn extend(&mut self, prefix: &str, entries: Vec<(String, String)>) {
        for (k, v) in entries {
            let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
            self.entries.push((key, v));
        }
    }

    /// Newton statistics of a micro-macro run.
    pub fn newton(&mut self, prefix: &str, stats: &RunStats) {
        let hist: Vec<String> = stats.histogram.iter().map(|c| c.to_string()).collect();
        self.push(format!("{prefix}.newton_median"), stats.median_iterations());
        self.push(format!("{prefix}.newton_max"), stats.max_iterations());
        self.push(format!("{prefix}.newton_solves"), stats.solves());
        self.push(format!("{prefix}.newton_histogram"), hist.join(","));
        self.push(format!("{prefix}.max_exp_eta"), stats.max_exp_eta);
        self.push(format!("{prefix}.max_exp_neg_eta"), stats.max_exp_neg_eta);
        let v = stats.max_principle_violation;
        self.push(format!("{prefix}.max_principle_violation"), format!("{},{},{}", num(v[0]), num(v[1]), num(v[2])));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("manifest.txt");
        let mut f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(path)
    }
}
