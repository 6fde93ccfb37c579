//! Polygonal partial-sum paths (the Donsker line) and their plain-text file
//! format.
//!
//! A path built from increments `x_1, …, x_n` has vertices `(i/n, scale·S_i)`
//! with `S_0 = 0` and `S_i = x_1 + … + x_i`, and is linear between vertices.
//!
//! File format: a header line `<n> <scale>` followed by exactly `n` lines,
//! one increment per line, in decimal text. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalPath {
    increments: Vec<f64>,
    partial: Vec<f64>,
    scale: f64,
}

/// Builds the polygonal line of `x` scaled by `scale`.
pub fn build_polygonal(x: &[f64], scale: f64) -> Result<PolygonalPath> {
    PolygonalPath::new(x.to_vec(), scale)
}

impl PolygonalPath {
    pub fn new(increments: Vec<f64>, scale: f64) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::EmptyInput("increment sequence"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("scale", format!("must be positive and finite, got {scale}")));
        }
        if let Some(i) = increments.iter().position(|v| !v.is_finite()) {
            return Err(invalid("increments", format!("non-finite value at index {i}")));
        }
        let mut partial = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        partial.push(0.0);
        for &v in &increments {
            acc += v;
            partial.push(acc);
        }
        Ok(Self {
            increments,
            partial,
            scale,
        })
    }

    /// The Donsker normalisation `n^{-1/2}`.
    pub fn donsker(increments: Vec<f64>) -> Result<Self> {
        let n = increments.len().max(1) as f64;
        Self::new(increments, 1.0 / n.sqrt())
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Unscaled partial sums `S_0 = 0, S_1, …, S_n`.
    pub fn partial_sums(&self) -> &[f64] {
        &self.partial
    }

    /// Scaled vertex value at abscissa `i/n`.
    pub fn vertex(&self, i: usize) -> f64 {
        self.scale * self.partial[i]
    }

    pub fn vertex_values(&self) -> Vec<f64> {
        self.partial.iter().map(|s| self.scale * s).collect()
    }

    /// Slope of segment `i` (between `(i-1)/n` and `i/n`), `1 ≤ i ≤ n`.
    pub fn slope(&self, i: usize) -> f64 {
        self.scale * self.increments[i - 1] * self.n() as f64
    }

    pub fn max_abs_slope(&self) -> f64 {
        let m = self.increments.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.scale * m * self.n() as f64
    }

    /// Evaluates the path at `t ∈ [0, 1]` (clamped).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.n();
        let nt = (t.clamp(0.0, 1.0)) * n as f64;
        let q = (nt.floor() as usize).min(n);
        if q == n {
            return self.vertex(n);
        }
        let frac = nt - q as f64;
        self.scale * (self.partial[q] + frac * self.increments[q])
    }

    /// Evaluates at the dyadic point `k / 2^j` with exact index arithmetic.
    pub fn eval_dyadic(&self, k: u128, j: u32) -> f64 {
        let n = self.n() as u128;
        let num = n * k;
        let q = (num >> j) as usize;
        if q >= self.n() {
            return self.vertex(self.n());
        }
        let rem = num - ((q as u128) << j);
        let frac = rem as f64 * (-(j as f64)).exp2();
        self.scale * (self.partial[q] + frac * self.increments[q])
    }
}

/// Parses the plain-text path format.
pub fn parse_path_file(text: &str) -> Result<PolygonalPath> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing header line".into(),
    })?;
    let mut fields = header
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty());
    let n: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
        line: hline,
        message: "header must start with the increment count".into(),
    })?;
    let scale: f64 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
        line: hline,
        message: "header must contain a scale".into(),
    })?;
    if fields.next().is_some() {
        return Err(Error::Parse {
            line: hline,
            message: "unexpected trailing header fields".into(),
        });
    }
    if n == 0 {
        return Err(Error::Parse {
            line: hline,
            message: "increment count must be positive".into(),
        });
    }

    let mut inc = Vec::with_capacity(n.min(1 << 20));
    for (line, l) in lines {
        if inc.len() == n {
            return Err(Error::Parse {
                line,
                message: format!("more than {n} increments"),
            });
        }
        let v: f64 = l.parse().map_err(|_| Error::Parse {
            line,
            message: format!("not a number: {l:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: "non-finite increment".into(),
            });
        }
        inc.push(v);
    }
    if inc.len() != n {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {n} increments, found {}", inc.len()),
        });
    }
    PolygonalPath::new(inc, scale).map_err(|e| Error::Parse {
        line: hline,
        message: e.to_string(),
    })
}

pub fn write_path_file(path: &PolygonalPath) -> String {
    let mut out = String::with_capacity(path.n() * 20 + 32);
    let _ = writeln!(out, "{} {}", path.n(), path.scale());
    for v in path.increments() {
        let _ = writeln!(out, "{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_increments_give_zero_path() {
        let p = build_polygonal(&[0.0, 0.0, 0.0], 1.0).unwrap();
        for k in 0..=30 {
            assert_eq!(p.eval(k as f64 / 30.0), 0.0);
        }
    }

    #[test]
    fn unit_increments_give_identity() {
        let n = 7;
        let p = build_polygonal(&vec![1.0; n], 1.0 / n as f64).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            assert!((p.eval(t) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn interpolation_between_vertices() {
        let p = build_polygonal(&[1.0, -1.0, 1.0, -1.0], 0.5).unwrap();
        assert!((p.eval(3.0 / 8.0) - 0.25).abs() < 1e-15);
        assert_eq!(p.eval_dyadic(3, 3), 0.25);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(build_polygonal(&[], 1.0), Err(Error::EmptyInput("increment sequence")));
        assert!(build_polygonal(&[1.0], 0.0).is_err());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let p = build_polygonal(&[0.1, -2.5e-7, 3.0, 1.0 / 3.0], 0.5).unwrap();
        let q = parse_path_file(&write_path_file(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_files() {
        assert!(parse_path_file("").is_err());
        assert!(parse_path_file("2 1.0\n1\n").is_err());
        assert!(parse_path_file("1 1.0\n1\n2\n").is_err());
        assert!(parse_path_file("1 -1.0\n1\n").is_err());
        assert!(parse_path_file("1 1.0\nNaN\n").is_err());
        assert!(parse_path_file("x 1.0\n1\n").is_err());
        let ok = parse_path_file("# fixture\n2, 1\n\n1\n-1\n").unwrap();
        assert_eq!(ok.n(), 2);
    }
}
