//! Fixed-precision base-b digit storage and the shared-prefix function γ.
//!
//! Every coordinate is kept as `P` digits `d_1 .. d_P` (most significant
//! first) with value `Σ d_r b^{-r}`. Because nothing is rounded, γ and the
//! scrambles built on top of it are exact.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digits are stored as `u16`, so bases up to 65536 are representable.
pub const MAX_BASE: u32 = 1 << 16;

/// Fixed-point numerators are `u128`; one spare base-b digit of headroom is
/// kept so that multiply-and-truncate steps never overflow.
const FIXED_BITS: f64 = 120.0;

pub fn check_base(base: u32) -> Result<()> {
    if !(2..=MAX_BASE).contains(&base) {
        return Err(Error::InvalidBase(base));
    }
    Ok(())
}

/// Smallest `P` with `b^P >= 2^64`, so 64-bit fixed-point inputs survive a
/// round trip through the digit expansion.
pub fn default_precision(base: u32) -> usize {
    let b = base as u128;
    let target = 1u128 << 64;
    let mut p = 0;
    let mut acc = 1u128;
    while acc < target {
        acc *= b;
        p += 1;
    }
    p
}

/// Largest precision whose fixed-point numerators fit the internal `u128`.
pub fn max_precision(base: u32) -> usize {
    (FIXED_BITS / (base as f64).log2()).floor() as usize
}

pub(crate) fn check_precision(base: u32, precision: usize) -> Result<()> {
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be at least 1".into()));
    }
    if precision > max_precision(base) {
        return Err(Error::PrecisionOverflow(format!(
            "{precision} digits in base {base} exceed the {} digit limit",
            max_precision(base)
        )));
    }
    Ok(())
}

/// Value of γ: a finite count of shared leading digits, or `Infinite` when
/// all stored digits agree.
///
/// The derived ordering puts every finite value below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gamma {
    Finite(u32),
    Infinite,
}

impl Gamma {
    pub fn finite(self) -> Option<u32> {
        match self {
            Gamma::Finite(g) => Some(g),
            Gamma::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Gamma::Infinite)
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Finite(g) => write!(f, "{g}"),
            Gamma::Infinite => f.write_str("inf"),
        }
    }
}

/// Componentwise γ of two points together with its total `|i|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaVector {
    pub entries: Vec<Gamma>,
}

impl GammaVector {
    pub fn total(&self) -> Gamma {
        let mut sum = 0u32;
        for g in &self.entries {
            match g {
                Gamma::Finite(v) => sum += v,
                Gamma::Infinite => return Gamma::Infinite,
            }
        }
        Gamma::Finite(sum)
    }

    /// The entries as plain integers, or `None` if any entry is infinite.
    pub fn to_finite(&self) -> Option<Vec<u32>> {
        self.entries.iter().map(|g| g.finite()).collect()
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// Borrowed view of one coordinate's digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coord<'a> {
    pub base: u32,
    pub digits: &'a [u16],
}

impl<'a> Coord<'a> {
    pub fn new(base: u32, digits: &'a [u16]) -> Self {
        Coord { base, digits }
    }

    pub fn to_f64(&self) -> f64 {
        digits_to_f64(self.base, self.digits)
    }

    /// Exact value as a numerator over `b^P`.
    pub fn fixed(&self) -> u128 {
        digits_to_fixed(self.base, self.digits)
    }
}

pub(crate) fn digits_to_f64(base: u32, digits: &[u16]) -> f64 {
    let b = base as f64;
    digits.iter().rev().fold(0.0, |v, &d| (v + d as f64) / b)
}

pub(crate) fn digits_to_fixed(base: u32, digits: &[u16]) -> u128 {
    let b = base as u128;
    digits.iter().fold(0u128, |acc, &d| acc * b + d as u128)
}

/// Truncated base-b expansion of `x` in `[0,1)` to `precision` digits.
pub(crate) fn f64_to_digits(base: u32, precision: usize, x: f64) -> Result<Vec<u16>> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("coordinate {x} is outside [0,1)")));
    }
    // Convert the binary float into an exact fraction m / 2^e first, then
    // run long division, so the digits are those of the float itself.
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (mut mant, shift) = if exp == 0 {
        (bits & ((1u64 << 52) - 1), 1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), 1075 - exp)
    };
    let mut out = Vec::with_capacity(precision);
    if mant == 0 {
        out.resize(precision, 0);
        return Ok(out);
    }
    // Drop trailing zero bits to keep the denominator small.
    let tz = mant.trailing_zeros().min(shift as u32);
    mant >>= tz;
    let shift = shift - tz as i32;
    if shift > 100 {
        // Tiny values: fall back to the float recurrence, which is exact
        // for the leading digits that matter at supported precisions.
        let mut v = x;
        for _ in 0..precision {
            v *= base as f64;
            let d = v.floor();
            out.push(d as u16);
            v -= d;
        }
        return Ok(out);
    }
    let denom = 1u128 << shift;
    let mut num = mant as u128;
    for _ in 0..precision {
        num *= base as u128;
        out.push((num / denom) as u16);
        num %= denom;
    }
    Ok(out)
}

/// γ_b for two coordinates of equal base and precision.
pub fn gamma_scalar(x: Coord<'_>, y: Coord<'_>) -> Result<Gamma> {
    if x.base != y.base {
        return Err(Error::BaseMismatch { left: x.base, right: y.base });
    }
    if x.digits.len() != y.digits.len() {
        return Err(Error::PrecisionMismatch {
            left: x.digits.len(),
            right: y.digits.len(),
        });
    }
    Ok(gamma_digits(x.digits, y.digits))
}

#[inline]
pub(crate) fn gamma_digits(x: &[u16], y: &[u16]) -> Gamma {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(i) => Gamma::Finite(i as u32),
        None => Gamma::Infinite,
    }
}

/// A single point: `s` coordinates of `precision` digits each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitPoint {
    base: u32,
    precision: usize,
    digits: Vec<u16>,
}

impl DigitPoint {
    pub fn from_coords(base: u32, precision: usize, coords: &[Vec<u16>]) -> Result<Self> {
        check_base(base)?;
        check_precision(base, precision)?;
        let mut digits = Vec::with_capacity(coords.len() * precision);
        for c in coords {
            if c.len() != precision {
                return Err(Error::PrecisionMismatch { left: precision, right: c.len() });
            }
            for &d in c {
                if d as u32 >= base {
                    return Err(Error::DigitOutOfRange { digit: d as u32, base });
                }
            }
            digits.extend_from_slice(c);
        }
        Ok(DigitPoint { base, precision, digits })
    }

    /// Truncated expansion of each value in `[0,1)`.
    pub fn from_f64(base: u32, precision: usize, values: &[f64]) -> Result<Self> {
        check_base(base)?;
        check_precision(base, precision)?;
        let mut digits = Vec::with_capacity(values.len() * precision);
        for &v in values {
            digits.extend(f64_to_digits(base, precision, v)?);
        }
        Ok(DigitPoint { base, precision, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.digits.len() / self.precision
    }

    pub fn coord(&self, j: usize) -> Coord<'_> {
        Coord::new(self.base, &self.digits[j * self.precision..(j + 1) * self.precision])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.coord(j).to_f64()).collect()
    }

    /// Replace every digit `d` with `b-1-d`, mapping `x` to `1 - b^{-P} - x`.
    pub fn flip(&self) -> DigitPoint {
        let top = (self.base - 1) as u16;
        DigitPoint {
            base: self.base,
            precision: self.precision,
            digits: self.digits.iter().map(|&d| top - d).collect(),
        }
    }

    /// Multiply every coordinate by `b^{-k}`: prepend `k` zero digits and
    /// drop the last `k`. Shared prefixes grow by exactly `k` as long as
    /// the original γ was below `P - k`.
    pub fn shift_down(&self, k: usize) -> DigitPoint {
        let p = self.precision;
        let k = k.min(p);
        let mut digits = Vec::with_capacity(self.digits.len());
        for c in self.digits.chunks(p) {
            digits.extend(std::iter::repeat_n(0u16, k));
            digits.extend_from_slice(&c[..p - k]);
        }
        DigitPoint { base: self.base, precision: p, digits }
    }
}

/// Componentwise γ of two points.
pub fn gamma_vector(x: &DigitPoint, y: &DigitPoint) -> Result<GammaVector> {
    if x.base != y.base {
        return Err(Error::BaseMismatch { left: x.base, right: y.base });
    }
    if x.precision != y.precision {
        return Err(Error::PrecisionMismatch { left: x.precision, right: y.precision });
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let p = x.precision;
    let entries = x
        .digits
        .chunks(p)
        .zip(y.digits.chunks(p))
        .map(|(a, b)| gamma_digits(a, b))
        .collect();
    Ok(GammaVector { entries })
}

pub fn digit_flip(x: &DigitPoint) -> DigitPoint {
    x.flip()
}

/// Where a point set came from, carried along for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Unspecified,
    Construction { descriptor: String },
    File { path: String },
    Derived { operation: String, from: Box<Provenance> },
}

impl Provenance {
    pub fn derived(&self, operation: impl Into<String>) -> Provenance {
        Provenance::Derived { operation: operation.into(), from: Box::new(self.clone()) }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Unspecified => f.write_str("unspecified"),
            Provenance::Construction { descriptor } => f.write_str(descriptor),
            Provenance::File { path } => write!(f, "file {path}"),
            Provenance::Derived { operation, from } => write!(f, "{operation} of ({from})"),
        }
    }
}

/// `n` points in `[0,1)^s`, all sharing one base and precision.
///
/// Digits live in one flat buffer indexed as `[point][coord][digit]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    base: u32,
    precision: usize,
    s: usize,
    n: usize,
    digits: Vec<u16>,
    provenance: Provenance,
}

impl PointSet {
    /// Build from a flat `[point][coord][digit]` buffer.
    pub fn from_flat(
        base: u32,
        precision: usize,
        s: usize,
        digits: Vec<u16>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_base(base)?;
        check_precision(base, precision)?;
        if s == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let stride = s * precision;
        if digits.len() % stride != 0 {
            return Err(Error::DimensionMismatch {
                expected: stride,
                found: digits.len() % stride,
            });
        }
        if let Some(&d) = digits.iter().find(|&&d| d as u32 >= base) {
            return Err(Error::DigitOutOfRange { digit: d as u32, base });
        }
        let n = digits.len() / stride;
        Ok(PointSet { base, precision, s, n, digits, provenance })
    }

    pub fn from_points(points: &[DigitPoint], provenance: Provenance) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty point list".into()))?;
        let (base, precision, s) = (first.base, first.precision, first.dim());
        let mut digits = Vec::with_capacity(points.len() * s * precision);
        for p in points {
            if p.base != base {
                return Err(Error::BaseMismatch { left: base, right: p.base });
            }
            if p.precision != precision {
                return Err(Error::PrecisionMismatch { left: precision, right: p.precision });
            }
            if p.dim() != s {
                return Err(Error::DimensionMismatch { expected: s, found: p.dim() });
            }
            digits.extend_from_slice(&p.digits);
        }
        PointSet::from_flat(base, precision, s, digits, provenance)
    }

    /// Truncated expansions of floating-point coordinates.
    pub fn from_f64(base: u32, precision: usize, points: &[Vec<f64>]) -> Result<Self> {
        let pts = points
            .iter()
            .map(|p| DigitPoint::from_f64(base, precision, p))
            .collect::<Result<Vec<_>>>()?;
        PointSet::from_points(&pts, Provenance::Unspecified)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn flat_digits(&self) -> &[u16] {
        &self.digits
    }

    pub fn coord_digits(&self, i: usize, j: usize) -> &[u16] {
        let start = (i * self.s + j) * self.precision;
        &self.digits[start..start + self.precision]
    }

    pub fn coord(&self, i: usize, j: usize) -> Coord<'_> {
        Coord::new(self.base, self.coord_digits(i, j))
    }

    pub fn point(&self, i: usize) -> DigitPoint {
        let stride = self.s * self.precision;
        DigitPoint {
            base: self.base,
            precision: self.precision,
            digits: self.digits[i * stride..(i + 1) * stride].to_vec(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = DigitPoint> + '_ {
        (0..self.n).map(|i| self.point(i))
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        digits_to_f64(self.base, self.coord_digits(i, j))
    }

    /// All coordinates as `f64`, point-major.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.s).map(|j| self.value(i, j)).collect())
            .collect()
    }

    pub fn gamma(&self, i: usize, l: usize) -> GammaVector {
        let entries = (0..self.s)
            .map(|j| gamma_digits(self.coord_digits(i, j), self.coord_digits(l, j)))
            .collect();
        GammaVector { entries }
    }

    /// Check that in every coordinate the `n` stored values are pairwise
    /// distinct. Reports the first offending pair.
    pub fn validate_distinct(&self) -> Result<()> {
        for j in 0..self.s {
            let mut idx: Vec<usize> = (0..self.n).collect();
            idx.sort_unstable_by(|&a, &b| self.coord_digits(a, j).cmp(self.coord_digits(b, j)));
            for w in idx.windows(2) {
                if self.coord_digits(w[0], j) == self.coord_digits(w[1], j) {
                    let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
                    return Err(Error::CoincidentCoordinates {
                        coord: j,
                        first,
                        second,
                        precision: self.precision,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn has_distinct_coordinates(&self) -> bool {
        self.validate_distinct().is_ok()
    }

    /// Flip every digit of every point.
    pub fn flip(&self) -> PointSet {
        let top = (self.base - 1) as u16;
        PointSet {
            digits: self.digits.iter().map(|&d| top - d).collect(),
            provenance: self.provenance.derived("digit flip"),
            ..self.clone()
        }
    }

    /// Keep the points `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<PointSet> {
        if start > end || end > self.n {
            return Err(Error::IndexOutOfRange { index: end, len: self.n });
        }
        let stride = self.s * self.precision;
        Ok(PointSet {
            n: end - start,
            digits: self.digits[start * stride..end * stride].to_vec(),
            provenance: self.provenance.derived(format!("points {start}..{end}")),
            ..self.clone()
        })
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "base={} s={} n={} precision={}",
            self.base, self.s, self.n, self.precision
        )?;
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for j in 0..self.s {
                if j > 0 {
                    line.push(' ');
                }
                encode_digits(self.base, self.coord_digits(i, j), &mut line);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("encoder emits ASCII")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<PointSet> {
        let mut header: Option<Header> = None;
        let mut digits = Vec::new();
        let mut rows = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some(h) = &header else {
                header = Some(parse_header(trimmed, lineno, &["base", "s", "n", "precision"])
                    .map(|v| Header { base: v[0] as u32, s: v[1], n: v[2], precision: v[3] })?);
                continue;
            };
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != h.s {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {} coordinates, found {}", h.s, tokens.len()),
                });
            }
            for t in tokens {
                decode_digits(h.base, h.precision, t, lineno, &mut digits)?;
            }
            rows += 1;
        }
        let h = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
        if rows != h.n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares n={} but {rows} points follow", h.n),
            });
        }
        PointSet::from_flat(h.base, h.precision, h.s, digits, Provenance::Unspecified)
    }

    pub fn from_text(text: &str) -> Result<PointSet> {
        PointSet::read_text(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PointSet> {
        let path = path.as_ref();
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(PointSet::read_text(f)?
            .with_provenance(Provenance::File { path: path.display().to_string() }))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(f)
    }
}

struct Header {
    base: u32,
    s: usize,
    n: usize,
    precision: usize,
}

/// Parse `key=value` pairs in the given order.
pub(crate) fn parse_header(line: &str, lineno: usize, keys: &[&str]) -> Result<Vec<usize>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != keys.len() {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("header must be `{}`", keys.iter().map(|k| format!("{k}=<{k}>")).collect::<Vec<_>>().join(" ")),
        });
    }
    fields
        .iter()
        .zip(keys)
        .map(|(f, k)| {
            let v = f
                .strip_prefix(k)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("expected `{k}=` in header") })?;
            v.parse::<usize>()
                .map_err(|e| Error::Parse { line: lineno, msg: format!("bad {k}: {e}") })
        })
        .collect()
}

const ALPHABET: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Bases up to 36 write one character per digit; larger bases write decimal
/// digit values joined by `.`.
pub(crate) fn encode_digits(base: u32, digits: &[u16], out: &mut String) {
    if base <= 36 {
        out.extend(digits.iter().map(|&d| ALPHABET[d as usize] as char));
    } else {
        for (r, d) in digits.iter().enumerate() {
            if r > 0 {
                out.push('.');
            }
            out.push_str(&d.to_string());
        }
    }
}

pub(crate) fn decode_digits(
    base: u32,
    precision: usize,
    token: &str,
    lineno: usize,
    out: &mut Vec<u16>,
) -> Result<()> {
    let before = out.len();
    if base <= 36 {
        for c in token.chars() {
            let d = c.to_digit(36).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("invalid digit character {c:?}"),
            })?;
            if d >= base || c.is_ascii_uppercase() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("digit {c:?} not valid in base {base}"),
                });
            }
            out.push(d as u16);
        }
    } else {
        for part in token.split('.') {
            let d: u32 = part.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid digit {part:?}"),
            })?;
            if d >= base {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("digit {d} not valid in base {base}"),
                });
            }
            out.push(d as u16);
        }
    }
    let got = out.len() - before;
    if got != precision {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {precision} digits, found {got}"),
        });
    }
    Ok(())
}

/// Lexicographic order on digit strings is the numeric order of the values.
pub fn compare_coords(x: Coord<'_>, y: Coord<'_>) -> Ordering {
    x.digits.cmp(y.digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(b: u32, p: usize, v: &[f64]) -> DigitPoint {
        DigitPoint::from_f64(b, p, v).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let x = pt(2, 8, &[0.25, 0.5]);
        let y = pt(2, 8, &[0.375, 0.25]);
        assert_eq!(gamma_scalar(x.coord(0), y.coord(0)).unwrap(), Gamma::Finite(2));
        assert_eq!(gamma_scalar(x.coord(1), y.coord(1)).unwrap(), Gamma::Finite(0));
        let g = gamma_vector(&x, &y).unwrap();
        assert_eq!(g.entries, vec![Gamma::Finite(2), Gamma::Finite(0)]);
        assert_eq!(g.total(), Gamma::Finite(2));
        let same = gamma_vector(&x, &x).unwrap();
        assert!(same.entries.iter().all(|g| g.is_infinite()));
        assert_eq!(same.total(), Gamma::Infinite);
    }

    #[test]
    fn gamma_rejects_mixed_bases() {
        let x = pt(2, 6, &[0.5]);
        let y = pt(3, 6, &[0.5]);
        assert!(matches!(
            gamma_scalar(x.coord(0), y.coord(0)),
            Err(Error::BaseMismatch { .. })
        ));
        let z = pt(2, 6, &[0.5, 0.5]);
        assert!(matches!(gamma_vector(&x, &z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn flip_examples() {
        let x = DigitPoint::from_coords(2, 3, &[vec![1, 0, 1]]).unwrap();
        assert_eq!(x.flip().coord(0).digits, &[0, 1, 0]);
        assert_eq!(x.flip().flip(), x);
        let a = pt(2, 8, &[0.25]);
        let b = pt(2, 8, &[0.375]);
        let g = gamma_vector(&a.flip(), &b.flip()).unwrap();
        assert_eq!(g.entries, vec![Gamma::Finite(2)]);
    }

    #[test]
    fn default_precision_covers_64_bits() {
        assert_eq!(default_precision(2), 64);
        assert_eq!(default_precision(3), 41);
        assert_eq!(default_precision(53), 12);
        for b in [2u32, 3, 5, 7, 17, 53, 101, 65521] {
            let p = default_precision(b);
            assert!(p <= max_precision(b), "base {b}");
            assert!((p as f64) * (b as f64).log2() >= 64.0);
            assert!(((p - 1) as f64) * (b as f64).log2() < 64.0);
        }
    }

    #[test]
    fn f64_expansion_is_exact() {
        let d = f64_to_digits(53, 12, 0.5).unwrap();
        assert!(d.iter().all(|&x| x == 26));
        let d = f64_to_digits(2, 5, 0.6875).unwrap();
        assert_eq!(d, vec![1, 0, 1, 1, 0]);
        let v = 0.123456789;
        let d = f64_to_digits(2, 64, v).unwrap();
        assert_eq!(digits_to_f64(2, &d), v);
        assert!(f64_to_digits(2, 4, 1.0).is_err());
    }

    #[test]
    fn text_round_trip_small_and_large_base() {
        for (b, p) in [(2u32, 10usize), (17, 6), (53, 4)] {
            let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 / 7.0, (i * i % 7) as f64 / 7.0]).collect();
            let set = PointSet::from_f64(b, p, &pts).unwrap();
            let text = set.to_text();
            let back = PointSet::from_text(&text).unwrap();
            assert_eq!(back.flat_digits(), set.flat_digits());
            assert_eq!(back.base(), b);
        }
    }

    #[test]
    fn text_rejects_malformed_input() {
        assert!(PointSet::from_text("base=2 s=1 n=1 precision=3\n012\n").is_err());
        assert!(PointSet::from_text("base=2 s=1 n=2 precision=3\n010\n").is_err());
        assert!(PointSet::from_text("base=2 s=2 n=1 precision=3\n010\n").is_err());
        assert!(PointSet::from_text("# comment\nbase=2 s=1 n=1 precision=3\n010\n").is_ok());
    }

    #[test]
    fn distinctness_is_checked_per_coordinate() {
        let set = PointSet::from_f64(2, 4, &[vec![0.0, 0.5], vec![0.5, 0.5]]).unwrap();
        match set.validate_distinct() {
            Err(Error::CoincidentCoordinates { coord, first, second, .. }) => {
                assert_eq!((coord, first, second), (1, 0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_down_adds_to_gamma() {
        let a = pt(3, 10, &[0.2, 0.7]);
        let b = pt(3, 10, &[0.21, 0.1]);
        let g = gamma_vector(&a, &b).unwrap().to_finite().unwrap();
        let gs = gamma_vector(&a.shift_down(2), &b.shift_down(2)).unwrap().to_finite().unwrap();
        assert_eq!(gs, g.iter().map(|v| v + 2).collect::<Vec<_>>());
    }
}
