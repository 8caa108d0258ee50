//! Field files: an `r × C` CSV of readings plus a `key=value` sidecar.
//!
//! Values are written with 17 significant digits, so a file read back gives
//! bit-identical doubles.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gp::{Hyperparams, Widths};

/// Shortest fixed format that round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Hex SHA-256 of `bytes`.
pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `field.csv` → `field.meta`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

/// Sidecar metadata. Every key is optional so that a partial sidecar can be
/// layered under command-line flags and over built-in defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMeta {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub ell1: Option<f64>,
    pub ell2: Option<f64>,
    pub signal_var: Option<f64>,
    pub noise_var: Option<f64>,
    pub prior_mean: Option<f64>,
    pub seed: Option<u64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("line {line}: bad value {v:?} for {key}")))
}

impl FieldMeta {
    pub fn complete(
        grid: (usize, usize),
        widths: &Widths,
        hyp: &Hyperparams,
        prior_mean: f64,
        seed: Option<u64>,
    ) -> Self {
        Self {
            rows: Some(grid.0),
            cols: Some(grid.1),
            omega1: Some(widths.omega1),
            omega2: Some(widths.omega2),
            ell1: Some(hyp.ell1),
            ell2: Some(hyp.ell2),
            signal_var: Some(hyp.signal_var),
            noise_var: Some(hyp.noise_var),
            prior_mean: Some(prior_mean),
            seed,
        }
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            let (k, v, n) = (k.trim(), v.trim(), n + 1);
            match k {
                "rows" => m.rows = Some(parse_value(k, v, n)?),
                "cols" => m.cols = Some(parse_value(k, v, n)?),
                "omega1" => m.omega1 = Some(parse_value(k, v, n)?),
                "omega2" => m.omega2 = Some(parse_value(k, v, n)?),
                "ell1" => m.ell1 = Some(parse_value(k, v, n)?),
                "ell2" => m.ell2 = Some(parse_value(k, v, n)?),
                "signal_var" => m.signal_var = Some(parse_value(k, v, n)?),
                "noise_var" => m.noise_var = Some(parse_value(k, v, n)?),
                "prior_mean" => m.prior_mean = Some(parse_value(k, v, n)?),
                "seed" => m.seed = Some(parse_value(k, v, n)?),
                other => return Err(Error::Parse(format!("line {n}: unknown key {other:?}"))),
            }
        }
        Ok(m)
    }

    /// Present keys in a fixed order.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k}={v}");
            }
        };
        put("rows", self.rows.map(|v| v.to_string()));
        put("cols", self.cols.map(|v| v.to_string()));
        put("omega1", self.omega1.map(fmt_f64));
        put("omega2", self.omega2.map(fmt_f64));
        put("ell1", self.ell1.map(fmt_f64));
        put("ell2", self.ell2.map(fmt_f64));
        put("signal_var", self.signal_var.map(fmt_f64));
        put("noise_var", self.noise_var.map(fmt_f64));
        put("prior_mean", self.prior_mean.map(fmt_f64));
        put("seed", self.seed.map(|v| v.to_string()));
        s
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overlay(&self, over: &FieldMeta) -> FieldMeta {
        FieldMeta {
            rows: over.rows.or(self.rows),
            cols: over.cols.or(self.cols),
            omega1: over.omega1.or(self.omega1),
            omega2: over.omega2.or(self.omega2),
            ell1: over.ell1.or(self.ell1),
            ell2: over.ell2.or(self.ell2),
            signal_var: over.signal_var.or(self.signal_var),
            noise_var: over.noise_var.or(self.noise_var),
            prior_mean: over.prior_mean.or(self.prior_mean),
            seed: over.seed.or(self.seed),
        }
    }

    fn require(v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Parse(format!("missing {key}")))
    }

    pub fn hyperparams(&self) -> Result<Hyperparams> {
        Hyperparams::new(
            Self::require(self.ell1, "ell1")?,
            Self::require(self.ell2, "ell2")?,
            Self::require(self.signal_var, "signal_var")?,
            Self::require(self.noise_var, "noise_var")?,
        )
    }

    pub fn widths(&self) -> Result<Widths> {
        Widths::new(Self::require(self.omega1, "omega1")?, Self::require(self.omega2, "omega2")?)
    }
}

/// CSV text, one grid row per line, no header.
pub fn format_csv(z: &DMatrix<f64>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in 0..z.nrows() {
        w.write_record((0..z.ncols()).map(|c| fmt_f64(z[(r, c)]))).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rd =
        csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse(format!("row {}: bad number {f:?}", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!("row {} has {} values, expected {}", n + 1, row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse("empty field file".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Writes the CSV and its sidecar; returns the CSV checksum.
pub fn write_field(path: &Path, z: &DMatrix<f64>, meta: &FieldMeta) -> Result<String> {
    let text = format_csv(z)?;
    fs::write(path, &text)?;
    fs::write(sidecar_path(path), meta.render())?;
    Ok(checksum(text.as_bytes()))
}

/// Reads a field CSV and, if present, its sidecar. A sidecar whose shape
/// disagrees with the CSV is rejected.
pub fn read_field(path: &Path) -> Result<(DMatrix<f64>, FieldMeta)> {
    let z = parse_csv(&fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    let meta = if side.exists() { FieldMeta::parse(&fs::read_to_string(side)?)? } else { FieldMeta::default() };
    if meta.rows.is_some_and(|r| r != z.nrows()) || meta.cols.is_some_and(|c| c != z.ncols()) {
        return Err(Error::Parse(format!(
            "sidecar says {:?}×{:?}, CSV is {}×{}",
            meta.rows,
            meta.cols,
            z.nrows(),
            z.ncols()
        )));
    }
    Ok((z, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, f64::MIN_POSITIVE, 1e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn checksum_known_vector() {
        assert_eq!(checksum(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let z = DMatrix::from_row_slice(2, 3, &[1.0, 2.5, -3.25, 0.1, 1e-9, 7.0]);
        let text = format_csv(&z).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_csv(&text).unwrap(), z);
        assert!(matches!(parse_csv("1,2\n3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv("1,x\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv("1,NaN\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv(""), Err(Error::Parse(_))));
    }

    #[test]
    fn meta_round_trip_and_overlay() {
        let hyp = Hyperparams::temperature();
        let w = Widths::new(5.0, 5.0).unwrap();
        let m = FieldMeta::complete((5, 30), &w, &hyp, 10.0, Some(7));
        let back = FieldMeta::parse(&m.render()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hyperparams().unwrap(), hyp);
        let over = FieldMeta { ell1: Some(3.0), ..Default::default() };
        let merged = m.overlay(&over);
        assert_eq!(merged.ell1, Some(3.0));
        assert_eq!(merged.ell2, m.ell2);
        assert!(FieldMeta::parse("ell1 3").is_err());
        assert!(FieldMeta::parse("colour=blue").is_err());
        assert!(FieldMeta::parse("rows=-1").is_err());
        assert!(FieldMeta::default().hyperparams().is_err());
    }
}
