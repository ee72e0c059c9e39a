//! Point-cloud CSV and JSON file helpers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use tpot_core::geometry::PointCloud;

use crate::error::{AppError, Result};

/// Reads a point cloud from CSV: one point per row, comma separated.
///
/// Blank lines and lines starting with `#` are skipped. A first row that is
/// not numeric is taken as a header.
pub fn read_points_csv(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_points_csv(&text, path)
}

pub fn parse_points_csv(text: &str, path: &Path) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| AppError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if let Some(prev) = rows.first() {
                    if prev.len() != row.len() {
                        return Err(AppError::Parse {
                            path: path.to_path_buf(),
                            line,
                            message: format!("expected {} columns, found {}", prev.len(), row.len()),
                        });
                    }
                }
                if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
                    return Err(AppError::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("column {} is not finite", bad + 1),
                    });
                }
                rows.push(row);
            }
            Err(_) if first => {}
            Err(_) => {
                let field = record.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                return Err(AppError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("cannot parse {field:?} as a number"),
                });
            }
        }
        first = false;
    }
    if rows.is_empty() {
        return Err(AppError::Input(format!("{}: no points", path.display())));
    }
    Ok(PointCloud::new(&rows)?)
}

pub fn write_points_csv(path: &Path, pc: &PointCloud) -> Result<()> {
    let mut out = String::new();
    for p in pc.points() {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes one compact JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, values: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for v in values {
        serde_json::to_writer(&mut buf, v).map_err(|e| AppError::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        buf.write_all(b"\n").map_err(|e| AppError::io(path, e))?;
    }
    write_text(path, &String::from_utf8(buf).expect("serde_json emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PointCloud> {
        parse_points_csv(text, Path::new("pts.csv"))
    }

    #[test]
    fn header_comments_and_blank_lines() {
        let pc = parse("x,y\n# note\n0,1\n\n2.5, -3\n").unwrap();
        assert_eq!(pc.len(), 2);
        assert_eq!(pc.point(1), &[2.5, -3.0]);
    }

    #[test]
    fn bad_number_reports_line() {
        let err = parse("0,0\n1,1\n1,abc\n").unwrap_err();
        match err {
            AppError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse("0,0\n1,1,1\n").unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(parse("x,y\n"), Err(AppError::Input(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pc = PointCloud::new(&[vec![0.1, 1.0 / 3.0], vec![-2e-17, 7.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_points_csv(&path, &pc).unwrap();
        assert_eq!(read_points_csv(&path).unwrap(), pc);
    }
}
