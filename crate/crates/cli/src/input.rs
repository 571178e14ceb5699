//! Small text formats accepted on the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ssguard_core::Vec3;

/// `a:b` with finite ends and a != b.
pub fn parse_tau(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').with_context(|| format!("--tau expects a:b, got {s:?}"))?;
    let a: f64 = a.trim().parse().with_context(|| format!("--tau start {a:?}"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("--tau end {b:?}"))?;
    if !a.is_finite() || !b.is_finite() || a == b {
        bail!("--tau needs two distinct finite values, got {s:?}");
    }
    Ok((a, b))
}

/// Rows of whitespace- or comma-separated numbers; `#` starts a comment.
pub fn read_rows(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rows(&text, cols).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_rows(text: &str, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().with_context(|| format!("line {}: bad number {t:?}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != cols {
            bail!("line {}: expected {cols} columns, got {}", i + 1, vals.len());
        }
        if vals.iter().any(|v| !v.is_finite()) {
            bail!("line {}: non-finite value", i + 1);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        bail!("no data rows");
    }
    Ok(rows)
}

pub fn read_points(path: &Path) -> Result<Vec<Vec3>> {
    Ok(read_rows(path, 3)?.into_iter().map(|r| Vec3::new(r[0], r[1], r[2])).collect())
}

pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    Ok(read_rows(path, 2)?.into_iter().map(|r| (r[0], r[1])).collect())
}

/// `r,z` or `r z`.
pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let v = parse_rows(s, 2).with_context(|| format!("expected r,z, got {s:?}"))?;
    Ok((v[0][0], v[0][1]))
}

/// `key=value` fixture parameters.
pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').with_context(|| format!("parameter {s:?} is not key=value"))?;
    let v: f64 = v.trim().parse().with_context(|| format!("parameter {k}: bad number {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

/// Accepts `inf`/`infinity` for p = infinity.
pub fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|e| format!("{e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_ranges() {
        assert_eq!(parse_tau("0:2.5").unwrap(), (0.0, 2.5));
        assert_eq!(parse_tau(" -1 : 0 ").unwrap(), (-1.0, 0.0));
        assert!(parse_tau("1").is_err());
        assert!(parse_tau("1:1").is_err());
        assert!(parse_tau("0:nan").is_err());
    }

    #[test]
    fn rows_with_comments() {
        let r = parse_rows("# header\n1 2 3\n4,5,6 # trailing\n\n", 3).unwrap();
        assert_eq!(r, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert!(parse_rows("1 2\n", 3).is_err());
        assert!(parse_rows("# nothing\n", 3).is_err());
    }

    #[test]
    fn params_and_exponents() {
        assert_eq!(parse_param("gamma=0.45").unwrap(), ("gamma".into(), 0.45));
        assert!(parse_param("gamma").is_err());
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_pair("1.5,0").unwrap(), (1.5, 0.0));
    }
}
