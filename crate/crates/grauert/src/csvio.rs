//! CSV output in full-precision scientific notation (17 significant
//! digits), so downstream re-checks of any table are exact.

use std::io::Write;
use std::path::Path;

/// One value, 17 significant digits, scientific notation.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Write a table of float rows under the given headers.
pub fn write_csv(
    path: &Path,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_roundtrips() {
        for &x in &[0.0, 1.0, -3.5e-12, std::f64::consts::PI, 6.02e23] {
            let s = format_value(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s} did not round-trip");
        }
    }
}
