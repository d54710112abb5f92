//! CSV and JSON artifact writers with pinned formatting.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated, header row, LF endings.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric table in the pinned float format.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    write_csv(path, header, rows.into_iter().map(|r| r.into_iter().map(fmt_f)))
}

/// Pretty JSON with a trailing newline; keys follow struct field order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Creates `dir` and returns it.
pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(fmt_f(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f(1.0).parse::<f64>().unwrap(), 1.0);
        let x = 0.469_599_988_361_017_3;
        assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_uses_lf_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_table(&p, &["a", "b"], vec![vec![1.0, 2.0]]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
