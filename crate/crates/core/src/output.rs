//! CSV and JSON writers. Every file starts with the artifact version and the
//! SHA-256 of the config that produced it: a `#` comment line for CSV, a
//! leading `meta` object for JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::flow::RunRecord;
use crate::hypersurface::GeometrySnapshot;
use crate::isoperimetric::IsoProfile;
use crate::VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub warpflow: String,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(config_sha256: &str) -> Self {
        Self { warpflow: VERSION.to_string(), config_sha256: config_sha256.to_string() }
    }

    pub fn comment(&self) -> String {
        format!("# warpflow {} config_sha256={}", self.warpflow, self.config_sha256)
    }
}

/// Shortest round-trip representation; empty for `None`.
pub fn fmt_value(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:?}"),
        None => String::new(),
    }
}

fn write_csv<const C: usize>(
    path: &Path,
    meta: &Meta,
    header: [&str; C],
    rows: impl Iterator<Item = [Option<f64>; C]>,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.comment())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_value(*x)))?;
    }
    w.flush()
}

pub fn write_records_csv(path: &Path, meta: &Meta, records: &[RunRecord]) -> io::Result<()> {
    write_csv(path, meta, RunRecord::HEADER, records.iter().map(RunRecord::fields))
}

pub const SNAPSHOT_HEADER: [&str; 6] = ["angle", "rho", "u", "H", "A2", "f"];

pub fn write_snapshot_csv(path: &Path, meta: &Meta, snap: &GeometrySnapshot) -> io::Result<()> {
    let rows = (0..snap.len()).map(|i| {
        [
            Some(snap.angle[i]),
            Some(snap.rho[i]),
            Some(snap.u[i]),
            Some(snap.mean_curvature[i]),
            Some(snap.norm_a_sq[i]),
            Some(snap.speed[i]),
        ]
    });
    write_csv(path, meta, SNAPSHOT_HEADER, rows)
}

pub const PROFILE_HEADER: [&str; 4] = ["r", "level_value", "area", "volume"];

pub fn write_profile_csv(path: &Path, meta: &Meta, profile: &IsoProfile) -> io::Result<()> {
    let rows = profile.rows.iter().map(|r| [Some(r.r), r.level_value, Some(r.area), Some(r.volume)]);
    write_csv(path, meta, PROFILE_HEADER, rows)
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &WithMeta { meta, body })?;
    writeln!(out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_formatting() {
        assert_eq!(fmt_value(Some(2.0)), "2.0");
        assert_eq!(fmt_value(Some(1e-10)), "1e-10");
        assert_eq!(fmt_value(None), "");
    }

    #[test]
    fn csv_starts_with_header_comment() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let meta = Meta::new("abc");
        let profile = IsoProfile { r1: 0.0, rows: vec![] };
        write_profile_csv(&path, &meta, &profile).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# warpflow {VERSION} config_sha256=abc"));
        assert_eq!(lines.next().unwrap(), "r,level_value,area,volume");
    }

    #[test]
    fn json_leads_with_meta() {
        #[derive(Serialize)]
        struct Body {
            x: f64,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        write_json(&path, &Meta::new("abc"), &Body { x: 1.5 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["meta"]["config_sha256"], "abc");
        assert_eq!(v["x"], 1.5);
    }
}
