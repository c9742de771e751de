//! File formats.
//!
//! * Point cloud CSV: one point per row, comma-separated, no header.
//! * Distance matrix CSV: one matrix row per line, same layout.
//! * Collection manifest: `{"clouds": [{"path": str, "label": str}]}`,
//!   paths relative to the manifest.
//! * Barcode JSON: `{"dim": int, "bars": [[birth, death], ...]}`.
//! * Embedding dump: `{"n": int, "m": int, "d": int, "vectors": [[...], ...]}`.
//! * Test result JSON: the fields of [`TestResult`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::persistence::{Bar, Barcode};
use crate::synthgeo::{DistanceMatrix, PointCloud};
use crate::twosample::TestResult;

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn parse_csv_rows(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::parse(
                        path,
                        lineno + 1,
                        format!("field {} (`{}`) is not a number", col + 1, field.trim()),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn at_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Input(msg) => Error::parse(path, 0, msg),
        other => other,
    })
}

pub fn read_point_cloud_csv(path: &Path) -> Result<PointCloud> {
    let rows = parse_csv_rows(path, &read_to_string(path)?)?;
    at_file(path, PointCloud::new(rows))
}

fn format_csv_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_point_cloud_csv(path: &Path, pc: &PointCloud) -> Result<()> {
    write_string(path, &format_csv_rows(pc.points().iter().map(Vec::as_slice)))
}

pub fn read_distance_matrix_csv(path: &Path) -> Result<DistanceMatrix> {
    let rows = parse_csv_rows(path, &read_to_string(path)?)?;
    at_file(path, DistanceMatrix::from_rows(rows))
}

pub fn write_distance_matrix_csv(path: &Path, dm: &DistanceMatrix) -> Result<()> {
    write_string(path, &format_csv_rows(dm.rows()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub clouds: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_string(path, &text)
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Resolves a collection location: a manifest file, or a directory that
    /// either contains `manifest.json` or whose files with extension `ext`
    /// are taken in name order. Returns `(path, label)` pairs.
    pub fn resolve(location: &Path, ext: &str) -> Result<Vec<(PathBuf, String)>> {
        let (manifest_path, manifest) = if location.is_dir() {
            let candidate = location.join(MANIFEST_NAME);
            if candidate.is_file() {
                let m = Manifest::read(&candidate)?;
                (candidate, m)
            } else {
                let mut names: Vec<PathBuf> = fs::read_dir(location)
                    .map_err(|e| Error::io(location, e))?
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == ext))
                    .collect();
                names.sort();
                let entries = names
                    .into_iter()
                    .map(|p| {
                        let label = p
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_default();
                        (p, label)
                    })
                    .collect::<Vec<_>>();
                if entries.is_empty() {
                    return Err(Error::Input(format!(
                        "{} holds no manifest and no .{ext} files",
                        location.display()
                    )));
                }
                return Ok(entries);
            }
        } else {
            (location.to_path_buf(), Manifest::read(location)?)
        };
        if manifest.clouds.is_empty() {
            return Err(Error::Input(format!("{} lists no entries", manifest_path.display())));
        }
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        Ok(manifest
            .clouds
            .into_iter()
            .map(|e| (base.join(&e.path), e.label))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BarcodeFile {
    dim: usize,
    bars: Vec<[f64; 2]>,
}

pub fn barcode_to_json(barcode: &Barcode) -> String {
    let file = BarcodeFile {
        dim: barcode.homology_dim(),
        bars: barcode.bars().iter().map(|b| [b.birth, b.death]).collect(),
    };
    let mut text = serde_json::to_string(&file).expect("serializable");
    text.push('\n');
    text
}

pub fn barcode_from_json(path: &Path, text: &str) -> Result<Barcode> {
    let file: BarcodeFile =
        serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let bars = file
        .bars
        .iter()
        .map(|&[b, d]| Bar::from_interval(b, d))
        .collect::<Result<Vec<_>>>();
    at_file(path, bars.and_then(|bars| Barcode::new(file.dim, bars)))
}

pub fn read_barcode_json(path: &Path) -> Result<Barcode> {
    barcode_from_json(path, &read_to_string(path)?)
}

pub fn write_barcode_json(path: &Path, barcode: &Barcode) -> Result<()> {
    write_string(path, &barcode_to_json(barcode))
}

/// Sorted embeddings of one collection, in manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDump {
    pub n: usize,
    pub m: u64,
    pub d: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddingDump {
    pub fn read(path: &Path) -> Result<Self> {
        let dump: EmbeddingDump = read_json(path)?;
        if dump.d != crate::tropical::coordinate_count(dump.n) {
            return Err(Error::parse(path, 0, format!("d = {} does not match n = {}", dump.d, dump.n)));
        }
        if let Some(v) = dump.vectors.iter().find(|v| v.len() != dump.d) {
            return Err(Error::parse(path, 0, format!("vector of length {} in a d = {} dump", v.len(), dump.d)));
        }
        Ok(dump)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub fn read_test_result(path: &Path) -> Result<TestResult> {
    read_json(path)
}

pub fn write_test_result(path: &Path, result: &TestResult) -> Result<()> {
    write_string(path, &canonical_json(&serde_json::to_value(result).expect("serializable")))
}

/// Floats in canonical output: 17 significant digits, exponent form.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Deterministic JSON: object keys sorted, floats via [`format_float`],
/// two-space indentation, trailing newline.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    let pad = |out: &mut String, level: usize| {
        out.push('\n');
        out.extend(std::iter::repeat_n(' ', 2 * level));
    };
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(value).expect("serializable"))
        }
        Value::Number(num) => {
            if let Some(u) = num.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = num.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_float(num.as_f64().expect("finite number")));
            }
        }
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, indent + 1);
                write_value(item, indent + 1, out);
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("serializable"));
                out.push_str(": ");
                write_value(&map[key], indent + 1, out);
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_errors_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        write_string(&p, "0,1\n2,x\n").unwrap();
        match read_point_cloud_csv(&p) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("`x`"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        write_string(&p, "0,1\n2\n").unwrap();
        assert!(matches!(read_point_cloud_csv(&p), Err(Error::Parse { .. })));
        assert!(matches!(
            read_point_cloud_csv(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn point_cloud_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pc.csv");
        let pc = PointCloud::new(vec![vec![0.1, -2.5e-7], vec![1.0 / 3.0, 4.0]]).unwrap();
        write_point_cloud_csv(&p, &pc).unwrap();
        assert_eq!(read_point_cloud_csv(&p).unwrap(), pc);
    }

    #[test]
    fn canonical_json_layout() {
        let v = serde_json::json!({"b": 1, "a": [0.5, -2.0], "c": {"z": true, "y": "s"}, "e": []});
        assert_eq!(
            canonical_json(&v),
            "{\n  \"a\": [\n    5.0000000000000000e-1,\n    -2.0000000000000000e0\n  ],\n  \"b\": 1,\n  \
             \"c\": {\n    \"y\": \"s\",\n    \"z\": true\n  },\n  \"e\": []\n}\n"
        );
        let back: Value = serde_json::from_str(&canonical_json(&v)).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn test_result_json_keys() {
        let r = TestResult {
            statistic: 1.5,
            critical_value: 0.25,
            p_value: 0.001,
            alpha: 0.05,
            num_permutations: 999,
            reject: true,
            seed: 7,
            exact: false,
        };
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["alpha", "critical_value", "p_value", "permutations", "reject", "seed", "statistic"]
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_test_result(&p, &r).unwrap();
        assert_eq!(read_test_result(&p).unwrap(), r);
    }

    proptest! {
        #[test]
        fn barcode_json_round_trip(
            bars in prop::collection::vec((0.0..100.0f64, 0.0..50.0f64), 0..12),
            dim in 0usize..3,
        ) {
            let b = Barcode::from_pairs(dim, &bars).unwrap();
            let back = barcode_from_json(Path::new("mem"), &barcode_to_json(&b)).unwrap();
            prop_assert_eq!(back, b);
        }
    }
}
