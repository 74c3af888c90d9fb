//! Model documents (JSON) and CSV data files.
//!
//! A saved model is a canonical document: keys sorted, copula vertices
//! sorted by (level, left, right), numbers in shortest round-trip form.
//! Saving a loaded canonical document reproduces it byte for byte.

use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Map, Number, Value};

use crate::bicop::{BivariateCopula, CopulaFamily, Rotation};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::scheduler::SamplingOrder;
use crate::vcg::{CopulaVertex, VarSet, VineModel, MAX_DIM};

pub const SCHEMA_VERSION: u64 = 1;

fn number(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn index_array(xs: impl IntoIterator<Item = usize>) -> Value {
    Value::Array(xs.into_iter().map(|x| json!(x)).collect())
}

/// Canonical JSON text of `m`, newline-terminated.
pub fn save<T: Scalar>(m: &VineModel<T>) -> String {
    let mut vertices: Vec<(&CopulaVertex, &BivariateCopula<T>)> = m.pairs().collect();
    vertices.sort_by_key(|(v, _)| **v);
    let records: Vec<Value> = vertices
        .into_iter()
        .map(|(v, c)| {
            json!({
                "left": v.left(),
                "right": v.right(),
                "cond": index_array(v.cond()),
                "family": c.family().name(),
                "rotation": c.rotation().degrees(),
                "theta": number(c.theta().to_f64().unwrap_or(f64::NAN)),
            })
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("d".into(), json!(m.d()));
    doc.insert("vertices".into(), Value::Array(records));
    if let Some(o) = m.default_order() {
        doc.insert("default_order".into(), index_array(o.iter().copied()));
    }
    if let Some(c) = m.cond_set() {
        doc.insert("cond_set".into(), index_array(c));
    }
    if let Some(p) = m.provenance() {
        doc.insert("provenance".into(), json!(p));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("values serialise");
    text.push('\n');
    text
}

pub fn save_to_path<T: Scalar>(m: &VineModel<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, save(m))?;
    Ok(())
}

pub fn load_from_path<T: Scalar>(path: impl AsRef<Path>) -> Result<VineModel<T>> {
    load_bytes(&std::fs::read(path)?)
}

pub fn load<T: Scalar>(text: &str) -> Result<VineModel<T>> {
    load_bytes(text.as_bytes())
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in bytes.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{path}{key}"), "missing field"))
}

fn as_index(v: &Value, path: &str, bound: usize) -> Result<usize> {
    let x = v
        .as_u64()
        .ok_or_else(|| schema(path, "expected a non-negative integer"))?;
    if x as u128 >= bound as u128 {
        return Err(schema(path, format!("{x} is not below {bound}")));
    }
    Ok(x as usize)
}

fn index_list(v: &Value, path: &str, bound: usize) -> Result<Vec<usize>> {
    let arr = v.as_array().ok_or_else(|| schema(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_index(x, &format!("{path}[{i}]"), bound))
        .collect()
}

fn ascending_set(v: &Value, path: &str, bound: usize) -> Result<VarSet> {
    let xs = index_list(v, path, bound)?;
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(schema(path, "expected strictly ascending indices"));
    }
    Ok(xs.into_iter().collect())
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{path}{k}"), "unknown field")),
        None => Ok(()),
    }
}

/// Parses and validates a model document from raw bytes.
pub fn load_bytes<T: Scalar>(bytes: &[u8]) -> Result<VineModel<T>> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let root = doc
        .as_object()
        .ok_or_else(|| schema("$", "expected a JSON object"))?;
    check_keys(
        root,
        &["schema_version", "d", "vertices", "default_order", "cond_set", "provenance"],
        "",
    )?;
    let version = field(root, "schema_version", "")?;
    if version.as_u64() != Some(SCHEMA_VERSION) {
        return Err(schema(
            "schema_version",
            format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
        ));
    }
    let d = as_index(field(root, "d", "")?, "d", MAX_DIM + 1)?;
    if d < 2 {
        return Err(schema("d", format!("dimension {d} is below 2")));
    }
    let records = field(root, "vertices", "")?
        .as_array()
        .ok_or_else(|| schema("vertices", "expected an array"))?;
    let mut pairs = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let path = format!("vertices[{i}]");
        let obj = rec
            .as_object()
            .ok_or_else(|| schema(&path, "expected an object"))?;
        let prefix = format!("{path}.");
        check_keys(obj, &["left", "right", "cond", "family", "rotation", "theta"], &prefix)?;
        let left = as_index(field(obj, "left", &prefix)?, &format!("{path}.left"), d)?;
        let right = as_index(field(obj, "right", &prefix)?, &format!("{path}.right"), d)?;
        let cond = ascending_set(field(obj, "cond", &prefix)?, &format!("{path}.cond"), d)?;
        let family: CopulaFamily = field(obj, "family", &prefix)?
            .as_str()
            .ok_or_else(|| schema(format!("{path}.family"), "expected a string"))?
            .parse()
            .map_err(|e: Error| schema(format!("{path}.family"), e.to_string()))?;
        let rotation = field(obj, "rotation", &prefix)?
            .as_i64()
            .and_then(Rotation::from_degrees)
            .ok_or_else(|| schema(format!("{path}.rotation"), "expected 0, 90, 180 or 270"))?;
        let theta = field(obj, "theta", &prefix)?
            .as_f64()
            .ok_or_else(|| schema(format!("{path}.theta"), "expected a number"))?;
        let copula = BivariateCopula::new(family, rotation, lit::<T>(theta))
            .map_err(|e| schema(format!("{path}.theta"), e.to_string()))?;
        pairs.push((CopulaVertex::new(left, right, cond), copula));
    }
    let mut model = VineModel::from_vertices(d, pairs)?;

    let cond = match root.get("cond_set") {
        Some(v) => {
            let c = ascending_set(v, "cond_set", d)?;
            if c.len() >= d {
                return Err(schema("cond_set", "leaves no variable to sample"));
            }
            Some(c)
        }
        None => None,
    };
    if let Some(v) = root.get("default_order") {
        let order = index_list(v, "default_order", d)?;
        SamplingOrder::new(d, order.clone(), cond.unwrap_or_default())
            .map_err(|e| schema("default_order", e.to_string()))?;
        model = model.with_default_order(Some(order));
    }
    if let Some(v) = root.get("provenance") {
        let p = v
            .as_str()
            .ok_or_else(|| schema("provenance", "expected a string"))?;
        model = model.with_provenance(Some(p.to_string()));
    }
    Ok(model.with_cond_set(cond))
}

/// Numeric table read from CSV with its header names.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvData {
    pub fn ncols(&self) -> usize {
        self.headers.len()
    }
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_csv(file)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("row has {len} fields, expected {expected_len}"),
        _ => e.to_string(),
    };
    Error::Csv { line, message }
}

/// Reads a header row plus one or more numeric rows.
pub fn parse_csv<R: Read>(reader: R) -> Result<CsvData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Csv {
            line: None,
            message: "empty file".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line());
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Csv {
                    line,
                    message: format!(
                        "non-numeric cell `{cell}` in data row {}, column {} ({})",
                        rows.len() + 1,
                        j + 1,
                        headers[j]
                    ),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            line: None,
            message: "no data rows after the header".into(),
        });
    }
    Ok(CsvData { headers, rows })
}

/// Writes a header and rows with LF line endings.
pub fn write_csv<W: Write>(out: W, headers: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let to_err = |e: csv::Error| Error::Csv {
        line: None,
        message: e.to_string(),
    };
    w.write_record(headers).map_err(to_err)?;
    for r in rows {
        w.write_record(r).map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcg::fig1a;

    #[test]
    fn csv_examples() {
        let c = parse_csv("a,b\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(c.headers, ["a", "b"]);
        assert_eq!(c.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let c = parse_csv("x\n1\n2\n".as_bytes()).unwrap();
        assert_eq!(c.rows, vec![vec![1.0], vec![2.0]]);
        let c = parse_csv("a,b\r\n1,2\r\n".as_bytes()).unwrap();
        assert_eq!(c.rows, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn csv_errors() {
        let e = parse_csv("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Csv { line: Some(3), .. }), "{e}");
        let e = parse_csv("a,b\n1,x\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("column 2"), "{e}");
        assert!(parse_csv("".as_bytes()).is_err());
    }

    #[test]
    fn reference_vine_document() {
        let m = VineModel::<f64>::independence(fig1a());
        let text = save(&m);
        let doc: Value = serde_json::from_str(&text).unwrap();
        let v = doc["vertices"].as_array().unwrap();
        assert_eq!(v.len(), 10);
        let sizes: Vec<usize> = (0..4)
            .map(|k| v.iter().filter(|r| r["cond"].as_array().unwrap().len() == k).count())
            .collect();
        assert_eq!(sizes, [4, 3, 2, 1]);
        let again = save(&load::<f64>(&text).unwrap());
        assert_eq!(text, again);
    }

    #[test]
    fn truncated_document_reports_offset() {
        let text = save(&VineModel::<f64>::independence(fig1a()));
        let cut = &text[..100];
        match load::<f64>(cut).unwrap_err() {
            Error::Parse { offset, .. } => assert!(offset + 1 >= cut.len() && offset <= cut.len()),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn schema_errors_name_the_path() {
        let text = save(&VineModel::<f64>::independence(fig1a())).replace(
            "\"family\": \"independence\"",
            "\"family\": \"student\"",
        );
        match load::<f64>(&text).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "vertices[0].family"),
            e => panic!("unexpected {e}"),
        }
    }
}
