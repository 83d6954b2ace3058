//! On-disk formats: BER CSV, permutation files, run manifests.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sweep::{BerCurve, SweepSpec, DATA_RATE_BPS};

pub const CSV_HEADER: &str = "power_dbm,ber,ci95,bits,errors";
pub const MANIFEST_VERSION: u32 = 1;

/// Numbers use Rust's shortest round-trip decimal formatting.
pub fn curve_to_csv(curve: &BerCurve) -> String {
    let mut out = String::with_capacity(32 * (curve.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&format!("{},{},{},{},{}\n", p.power_dbm, p.ber, p.ci95, p.bits, p.errors));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub power_dbm: f64,
    pub ber: f64,
    pub ci95: f64,
    pub bits: u64,
    pub errors: u64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("bad CSV header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(format!("row {}: expected 5 fields", i + 1));
            }
            let bad = |e: &dyn std::fmt::Display| format!("row {}: {e}", i + 1);
            Ok(CsvRow {
                power_dbm: f[0].parse().map_err(|e| bad(&e))?,
                ber: f[1].parse().map_err(|e| bad(&e))?,
                ci95: f[2].parse().map_err(|e| bad(&e))?,
                bits: f[3].parse().map_err(|e| bad(&e))?,
                errors: f[4].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

/// First line `N`, second line the space-separated permutation.
pub fn format_permutation(perm: &[usize]) -> String {
    let body: Vec<String> = perm.iter().map(|p| p.to_string()).collect();
    format!("{}\n{}\n", perm.len(), body.join(" "))
}

pub fn parse_permutation(text: &str) -> Result<Vec<usize>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or("empty permutation file")?
        .trim()
        .parse()
        .map_err(|e| format!("bad length line: {e}"))?;
    let perm = lines
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| format!("bad index `{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if lines.next().is_some() {
        return Err("trailing content after permutation".into());
    }
    if perm.len() != n {
        return Err(format!("header says {n} entries, found {}", perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in &perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(format!("not a permutation of 0..{n}"));
        }
    }
    Ok(perm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub power_dbm: f64,
    pub bits: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub name: String,
    pub csv: String,
    pub spec: SweepSpec,
    pub point_seeds: Vec<u64>,
    pub config_hash: String,
    pub data_rate_bps: f64,
    pub flagged: Vec<FlaggedPoint>,
}

/// SHA-256 of the canonical JSON encoding of `spec`, as hex.
pub fn spec_hash(spec: &SweepSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("spec serializes");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(name: &str, csv: &str, spec: &SweepSpec, curve: &BerCurve) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        RunManifest {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            created_unix,
            name: name.into(),
            csv: csv.into(),
            spec: spec.clone(),
            point_seeds: (0..spec.powers_dbm.len()).map(|i| spec.point_seed(i)).collect(),
            config_hash: spec_hash(spec),
            data_rate_bps: DATA_RATE_BPS,
            flagged: curve
                .flagged()
                .map(|p| FlaggedPoint {
                    power_dbm: p.power_dbm,
                    bits: p.bits,
                    errors: p.errors,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Parses a manifest and checks its hash against the embedded spec.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let m: RunManifest = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if spec_hash(&m.spec) != m.config_hash {
            return Err("config hash does not match embedded spec".into());
        }
        Ok(m)
    }
}

/// Writes through a sibling temporary file and renames, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", file.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_text_round_trip() {
        let p = vec![2, 0, 3, 1];
        let text = format_permutation(&p);
        assert_eq!(text, "4\n2 0 3 1\n");
        assert_eq!(parse_permutation(&text).unwrap(), p);
        assert!(parse_permutation("3\n0 1 1\n").is_err());
        assert!(parse_permutation("3\n0 1\n").is_err());
        assert!(parse_permutation("2\n0 2\n").is_err());
        assert!(parse_permutation("x\n").is_err());
    }

    #[test]
    fn csv_parse_rejects_garbage() {
        assert!(parse_csv("power,ber\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
        let rows = parse_csv(&format!("{CSV_HEADER}\n14.5,0.25,0.001,100,25\n")).unwrap();
        assert_eq!(rows[0].errors, 25);
    }
}
