//! CSV and JSON emission with self-describing headers, deterministic
//! formatting, and a schema check used by the tests.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// How a column transforms under the presentation `--gamma` rescale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    /// Times in 1/gamma: divided by the presentation rate.
    Time,
    /// Frequencies/rates in gamma: multiplied by it.
    Frequency,
    /// Spectral densities in 1/gamma: divided by it.
    SpectralDensity,
    /// Pure numbers: unchanged.
    Dimensionless,
}

impl ColumnKind {
    fn scale(self, gamma: f64, v: f64) -> f64 {
        match self {
            ColumnKind::Time => v / gamma,
            ColumnKind::Frequency => v * gamma,
            ColumnKind::SpectralDensity => v / gamma,
            ColumnKind::Dimensionless => v,
        }
    }
}

pub struct Column {
    pub name: &'static str,
    pub kind: ColumnKind,
}

pub fn col(name: &'static str, kind: ColumnKind) -> Column {
    Column { name, kind }
}

/// A CSV table plus the `# key=value` metadata lines above it.
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table { columns, rows: Vec::new(), meta: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match columns");
        self.rows.push(row);
    }

    pub fn add_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    /// Render with the presentation rescale applied per column kind.
    pub fn to_csv(&self, command: &str, gamma: f64, reproducible: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# pep-lab {command}");
        if !reproducible {
            let _ = writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"));
            let stamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# generated_unix={stamp}");
        }
        let _ = writeln!(out, "# units: gamma={gamma}");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        let _ = writeln!(out, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(v, c)| format!("{}", c.kind.scale(gamma, *v)))
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Validate an emitted CSV: every data row has the declared column count
/// and every cell parses as a finite number.
pub fn check_csv_schema(text: &str) -> Result<(), String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("missing header row")?;
    let ncols = header.split(',').count();
    if ncols == 0 {
        return Err("empty header".into());
    }
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(format!("row {i}: {} cells, expected {ncols}", cells.len()));
        }
        for cell in cells {
            let v: f64 = cell.parse().map_err(|_| format!("row {i}: unparseable cell {cell:?}"))?;
            if !v.is_finite() {
                return Err(format!("row {i}: non-finite value {cell}"));
            }
        }
    }
    Ok(())
}

/// Write `text` to `<base><suffix>`, creating parent directories.
pub fn write_text(base: &Path, suffix: &str, text: &str) -> std::io::Result<PathBuf> {
    let path = with_suffix(base, suffix);
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    base.with_file_name(name)
}

pub fn write_json<T: Serialize>(base: &Path, suffix: &str, value: &T) -> std::io::Result<PathBuf> {
    let text = serde_json::to_string_pretty(value).expect("serializable summary");
    write_text(base, suffix, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_and_schema() {
        let mut t = Table::new(vec![
            col("t", ColumnKind::Time),
            col("n", ColumnKind::Dimensionless),
        ]);
        t.add_meta("delta", 1.5);
        t.push_row(vec![0.0, 1.0]);
        t.push_row(vec![0.5, 0.25]);
        let text = t.to_csv("population", 1.0, true);
        assert!(text.contains("# delta=1.5"));
        assert!(!text.contains("version="));
        check_csv_schema(&text).unwrap();
    }

    #[test]
    fn schema_rejects_bad_rows() {
        assert!(check_csv_schema("a,b\n1.0\n").is_err());
        assert!(check_csv_schema("a,b\n1.0,NaN\n").is_err());
        assert!(check_csv_schema("a,b\n1.0,2.0\n").is_ok());
    }

    #[test]
    fn gamma_rescale_applies_per_kind() {
        let mut t = Table::new(vec![
            col("t", ColumnKind::Time),
            col("w", ColumnKind::Frequency),
            col("s", ColumnKind::SpectralDensity),
            col("g", ColumnKind::Dimensionless),
        ]);
        t.push_row(vec![2.0, 3.0, 4.0, 5.0]);
        let text = t.to_csv("x", 2.0, true);
        let data = text.lines().last().unwrap();
        assert_eq!(data, "1,6,2,5");
    }
}
