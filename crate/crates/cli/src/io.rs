//! CSV ingestion and COO plan export.

use std::fmt::Write as _;
use std::path::Path;

use sparse_uot::{DenseMatrix, DiscreteMeasure, PointCloud, SparsePlan};

use crate::error::{CliError, CliResult};

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Numeric rows of a comma-separated file with 1-based line numbers.
///
/// The first non-empty line is treated as a header when it does not parse as numbers.
pub fn parse_table(path: &Path, text: &str) -> CliResult<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    let mut seen_first = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let first = !seen_first;
        seen_first = true;
        match parsed {
            Ok(vals) => {
                if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
                    return Err(CliError::at_line(path, idx + 1, format!("non-finite value {bad}")));
                }
                rows.push((idx + 1, vals));
            }
            Err(_) if first => {}
            Err(_) => {
                return Err(CliError::at_line(path, idx + 1, format!("cannot parse '{line}' as numbers")));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no numeric rows", path.display())));
    }
    let width = rows[0].1.len();
    if let Some((line, r)) = rows.iter().find(|(_, r)| r.len() != width) {
        return Err(CliError::at_line(
            path,
            *line,
            format!("expected {width} fields, found {}", r.len()),
        ));
    }
    Ok(rows)
}

fn read_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    Ok(parse_table(path, &text)?.into_iter().map(|(_, r)| r).collect())
}

pub fn read_points(path: &Path) -> CliResult<PointCloud<f64>> {
    PointCloud::new(&read_rows(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Weights listed one per line or comma-separated on one line.
pub fn read_weights(path: &Path) -> CliResult<DiscreteMeasure<f64>> {
    let text = read_text(path)?;
    let mut w = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::at_line(path, idx + 1, format!("cannot parse '{}' as a weight", field.trim()))
            })?;
            w.push(v);
        }
    }
    DiscreteMeasure::new(w).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> CliResult<DenseMatrix<f64>> {
    DenseMatrix::from_rows(&read_rows(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub const COO_HEADER: &str = "i,j,value";

/// COO text of the entries above `tol`, sorted by `(i, j)`.
///
/// Values use the shortest representation that parses back to the same `f64`.
pub fn format_coo(plan: &SparsePlan<f64>, tol: f64) -> String {
    let mut s = String::from(COO_HEADER);
    s.push('\n');
    for (&(i, j), &v) in plan.entries() {
        if v > tol {
            let _ = writeln!(s, "{i},{j},{v}");
        }
    }
    s
}

pub fn parse_coo(path: &Path, text: &str, rows: usize, cols: usize) -> CliResult<SparsePlan<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == COO_HEADER => {}
        Some((idx, _)) => return Err(CliError::at_line(path, idx + 1, format!("expected header '{COO_HEADER}'"))),
        None => return Err(CliError::input(format!("{}: empty plan file", path.display()))),
    }
    let mut entries = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::at_line(path, line, format!("expected 3 fields, found {}", fields.len())));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| CliError::at_line(path, line, format!("bad row index '{}'", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| CliError::at_line(path, line, format!("bad column index '{}'", fields[1])))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| CliError::at_line(path, line, format!("bad value '{}'", fields[2])))?;
        if i >= rows || j >= cols {
            return Err(CliError::at_line(path, line, format!("entry ({i}, {j}) outside {rows}x{cols}")));
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::at_line(path, line, format!("plan entries must be finite and >= 0, got {v}")));
        }
        entries.push(((i, j), v));
    }
    SparsePlan::from_entries(entries).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_coo(path: &Path, rows: usize, cols: usize) -> CliResult<SparsePlan<f64>> {
    parse_coo(path, &read_text(path)?, rows, cols)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_header_is_optional() {
        let p = Path::new("x.csv");
        let t = parse_table(p, "x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(t, vec![(2, vec![1.0, 2.0]), (3, vec![3.0, 4.0])]);
        assert_eq!(parse_table(p, "1,2\n3,4\n").unwrap().len(), 2);
    }

    #[test]
    fn table_errors_name_the_line() {
        let p = Path::new("x.csv");
        let e = parse_table(p, "1,2\n3,oops\n").unwrap_err().to_string();
        assert!(e.contains("x.csv:2"), "{e}");
        let e = parse_table(p, "1,2\n\n3\n").unwrap_err().to_string();
        assert!(e.contains("x.csv:3"), "{e}");
    }

    #[test]
    fn coo_round_trip_is_exact() {
        let plan = SparsePlan::from_entries(vec![((0, 1), 0.1 + 0.2), ((2, 0), 1.0 / 3.0), ((1, 1), 0.0)]).unwrap();
        let text = format_coo(&plan, 1e-12);
        assert_eq!(text.lines().count(), 3);
        let back = parse_coo(Path::new("p.csv"), &text, 3, 2).unwrap();
        assert_eq!(back.value_at((0, 1)), 0.1 + 0.2);
        assert_eq!(back.value_at((2, 0)), 1.0 / 3.0);
    }

    #[test]
    fn coo_rejects_out_of_range() {
        let e = parse_coo(Path::new("p.csv"), "i,j,value\n0,0,1\n5,0,1\n", 2, 2).unwrap_err();
        assert!(e.to_string().contains("p.csv:3"));
    }
}
