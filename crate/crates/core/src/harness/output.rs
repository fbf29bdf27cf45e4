//! CSV tables tagged with the hash of the configuration that produced them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};

/// SHA-256 over the canonical JSON of each part, in order.
pub fn fingerprint<T: Serialize + ?Sized>(parts: &[&T]) -> Result<String> {
    let mut h = Sha256::new();
    for p in parts {
        h.update(serde_json::to_vec(p)?);
        h.update([0u8]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Hash identifying a run: configuration, scenario and a description of
/// the experiment parameters.
pub fn run_fingerprint(cfg: &SystemConfig, sc: Option<&Scenario>, run: &str) -> Result<String> {
    let scenario = sc.map(Scenario::to_json_string).unwrap_or_default();
    let cfg = serde_json::to_string(cfg)?;
    fingerprint(&[cfg.as_str(), scenario.as_str(), run])
}

/// Writes the metadata comment, header and rows of `records` to `out`.
pub fn write_records<W: Write, R: Serialize>(
    out: W,
    hash: &str,
    seed: u64,
    records: &[R],
    header: &[&str],
) -> Result<()> {
    let mut out = out;
    writeln!(out, "# config_hash={hash} seed={seed}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_records`] into a file, creating parent directories.
pub fn write_csv<R: Serialize>(
    path: impl AsRef<Path>,
    hash: &str,
    seed: u64,
    records: &[R],
    header: &[&str],
) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_records(BufWriter::new(File::create(path)?), hash, seed, records, header)
}

/// [`write_records`] into a string.
pub fn render_csv<R: Serialize>(hash: &str, seed: u64, records: &[R], header: &[&str]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, hash, seed, records, header)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
