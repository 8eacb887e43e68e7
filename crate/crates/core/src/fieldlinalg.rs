//! Dense matrices over the prime field F_b.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;

use crate::digits::parse_header;
use crate::error::{Error, Result};

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(b: u32) -> Result<()> {
    if !(2..=crate::digits::MAX_BASE).contains(&b) {
        return Err(Error::InvalidBase(b));
    }
    if !is_prime(b) {
        return Err(Error::NonPrimeBase(b));
    }
    Ok(())
}

/// Inverse of `a` modulo the prime `p` by extended Euclid.
pub fn inv_mod(a: u32, p: u32) -> Option<u32> {
    let (mut r0, mut r1) = (p as i64, (a % p) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(p as i64) as u32)
}

/// Row-major matrix with entries in `0..base`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FbMatrix {
    base: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FbMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FbMatrix(base={}, {}x{})", self.base, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FbMatrix {
    pub fn zeros(base: u32, rows: usize, cols: usize) -> Result<Self> {
        check_prime(base)?;
        Ok(FbMatrix { base, rows, cols, data: vec![0; rows * cols] })
    }

    pub fn identity(base: u32, n: usize) -> Result<Self> {
        let mut m = FbMatrix::zeros(base, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    /// Entries are reduced modulo `base`.
    pub fn from_rows(base: u32, rows: &[Vec<u32>]) -> Result<Self> {
        check_prime(base)?;
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r.iter().map(|&v| v % base));
        }
        Ok(FbMatrix { base, rows: rows.len(), cols, data })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.base;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// `M v` over F_b.
    pub fn matvec(&self, v: &[u16]) -> Result<Vec<u16>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let mut out = vec![0u16; self.rows];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, v: &[u16], out: &mut [u16]) {
        let b = self.base as u64;
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let acc = self
                .row(r)
                .iter()
                .zip(v)
                .fold(0u64, |acc, (&a, &x)| (acc + a as u64 * x as u64) % b);
            *o = acc as u16;
        }
    }

    pub fn mul(&self, other: &FbMatrix) -> Result<FbMatrix> {
        if self.base != other.base {
            return Err(Error::BaseMismatch { left: self.base, right: other.base });
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let b = self.base as u64;
        let mut out = FbMatrix { base: self.base, rows: self.rows, cols: other.cols, data: vec![0; self.rows * other.cols] };
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, c) as u64) % b) as u32;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> Result<FbMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let mut result = FbMatrix::identity(self.base, self.rows)?;
        let mut sq = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(result)
    }

    /// Rank over F_b by Gaussian elimination, taking the first nonzero
    /// entry in each column as pivot.
    pub fn rank(&self) -> usize {
        let b = self.base as u64;
        let mut a = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| a[r * cols + c] != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..cols {
                    a.swap(p * cols + k, rank * cols + k);
                }
            }
            let inv = inv_mod(a[rank * cols + c], self.base).expect("prime base") as u64;
            for k in c..cols {
                a[rank * cols + k] = ((a[rank * cols + k] as u64 * inv) % b) as u32;
            }
            for r in rank + 1..rows {
                let f = a[r * cols + c] as u64;
                if f == 0 {
                    continue;
                }
                for k in c..cols {
                    let sub = (f * a[rank * cols + k] as u64) % b;
                    a[r * cols + k] = ((a[r * cols + k] as u64 + b - sub) % b) as u32;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c) == 0))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|r| (0..r.min(self.cols)).all(|c| self.get(r, c) == 0))
    }

    /// Upper-left `rows x cols` block.
    pub fn truncate(&self, rows: usize, cols: usize) -> Result<FbMatrix> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows.max(self.cols), found: rows.max(cols) });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend_from_slice(&self.row(r)[..cols]);
        }
        Ok(FbMatrix { base: self.base, rows, cols, data })
    }
}

/// The first `k_j` rows of each `C_j`, stacked in order `j = 1..s`.
pub fn stack_rows(matrices: &[FbMatrix], k: &[usize]) -> Result<FbMatrix> {
    if matrices.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: matrices.len(), found: k.len() });
    }
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidArgument("no matrices".into()))?;
    let (base, cols) = (first.base, first.cols);
    let mut data = Vec::new();
    for (j, (m, &kj)) in matrices.iter().zip(k).enumerate() {
        if m.base != base {
            return Err(Error::BaseMismatch { left: base, right: m.base });
        }
        if m.cols != cols {
            return Err(Error::DimensionMismatch { expected: cols, found: m.cols });
        }
        if kj > m.rows {
            return Err(Error::InvalidArgument(format!(
                "k_{} = {kj} exceeds the {} rows of matrix {}",
                j + 1,
                m.rows,
                j + 1
            )));
        }
        data.extend_from_slice(&m.data[..kj * cols]);
    }
    let rows = data.len() / cols.max(1);
    Ok(FbMatrix { base, rows, cols, data })
}

/// Random nonsingular lower-triangular matrix: diagonal uniform on
/// `1..b`, strictly lower part uniform on `0..b`.
pub fn random_nlt<R: Rng + ?Sized>(b: u32, m: usize, rng: &mut R) -> Result<FbMatrix> {
    let mut out = FbMatrix::zeros(b, m, m)?;
    for r in 0..m {
        for c in 0..r {
            out.data[r * m + c] = rng.random_range(0..b);
        }
        out.data[r * m + r] = rng.random_range(1..b);
    }
    Ok(out)
}

/// `s` generating matrices sharing a base and input width.
///
/// Each matrix maps the `cols` low-order digits of a point index to `rows`
/// output digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingMatrices {
    base: u32,
    matrices: Vec<FbMatrix>,
}

impl GeneratingMatrices {
    pub fn new(matrices: Vec<FbMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("need at least one matrix".into()))?;
        let (base, rows, cols) = (first.base, first.rows, first.cols);
        for m in &matrices {
            if m.base != base {
                return Err(Error::BaseMismatch { left: base, right: m.base });
            }
            if m.rows != rows || m.cols != cols {
                return Err(Error::DimensionMismatch { expected: rows * cols, found: m.rows * m.cols });
            }
        }
        Ok(GeneratingMatrices { base, matrices })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// Number of index digits consumed.
    pub fn cols(&self) -> usize {
        self.matrices[0].cols
    }

    /// Number of output digits produced.
    pub fn rows(&self) -> usize {
        self.matrices[0].rows
    }

    pub fn matrices(&self) -> &[FbMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &FbMatrix {
        &self.matrices[j]
    }

    /// r(k): rank of the first `k_j` rows of each matrix stacked, with
    /// r(0) = 0.
    pub fn r(&self, k: &[usize]) -> Result<usize> {
        if k.iter().all(|&v| v == 0) {
            if k.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: k.len() });
            }
            return Ok(0);
        }
        Ok(stack_rows(&self.matrices, k)?.rank())
    }

    /// Keep the selected coordinates (0-based), in the order given.
    pub fn select(&self, coords: &[usize]) -> Result<GeneratingMatrices> {
        let ms = coords
            .iter()
            .map(|&j| {
                self.matrices
                    .get(j)
                    .cloned()
                    .ok_or(Error::IndexOutOfRange { index: j, len: self.dim() })
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratingMatrices::new(ms)
    }

    /// Upper-left `rows x cols` block of every matrix.
    pub fn truncate(&self, rows: usize, cols: usize) -> Result<GeneratingMatrices> {
        GeneratingMatrices::new(
            self.matrices
                .iter()
                .map(|m| m.truncate(rows, cols))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Digital t-value from ranks: `m - max{l : r(k) = |k| for all |k| = l}`
    /// with `m = cols`. Exhaustive over compositions, so keep `m` small.
    pub fn t_value(&self) -> Result<usize> {
        let m = self.cols();
        let s = self.dim();
        let mut best = 0;
        for l in 1..=m {
            let mut ok = true;
            for_each_composition(l, s, &mut |k| {
                // Too few rows for k means r(k) < |k|, so stack_rows errs.
                ok = ok && self.r(k).is_ok_and(|r| r == l);
            });
            if !ok {
                break;
            }
            best = l;
        }
        Ok(m - best)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        if self.rows() != self.cols() {
            return Err(Error::InvalidArgument(
                "matrix files hold square matrices only".into(),
            ));
        }
        writeln!(w, "base={} m={} s={}", self.base, self.cols(), self.dim())?;
        for (j, mat) in self.matrices.iter().enumerate() {
            if j > 0 {
                writeln!(w)?;
            }
            for r in 0..mat.rows {
                let row: Vec<String> = mat.row(r).iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", row.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_text(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ASCII output"))
    }

    /// Reads the `base=<b> m=<m> s=<s>` format: `s` blocks of `m` rows of
    /// `m` whitespace-separated entries. Blank and `#` lines are ignored.
    /// Base-2 rows may also be written as a single run of `0`/`1`.
    pub fn read_text<R: BufRead>(r: R) -> Result<GeneratingMatrices> {
        let mut header: Option<(u32, usize, usize)> = None;
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let Some((b, m, _)) = header else {
                let v = parse_header(t, lineno, &["base", "m", "s"])?;
                check_prime(v[0] as u32)?;
                header = Some((v[0] as u32, v[1], v[2]));
                continue;
            };
            let toks: Vec<&str> = t.split_whitespace().collect();
            let row: Vec<u32> = if toks.len() == 1 && m > 1 {
                toks[0]
                    .chars()
                    .map(|c| c.to_digit(10).filter(|&d| d < b))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse { line: lineno, msg: "bad compact row".into() })?
            } else {
                toks.iter()
                    .map(|s| s.parse::<u32>().ok().filter(|&d| d < b))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse { line: lineno, msg: format!("entries must be integers in 0..{b}") })?
            };
            if row.len() != m {
                return Err(Error::Parse { line: lineno, msg: format!("expected {m} entries, found {}", row.len()) });
            }
            rows.push(row);
        }
        let (b, m, s) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
        if rows.len() != m * s {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} rows, found {}", m * s, rows.len()),
            });
        }
        let ms = rows
            .chunks(m)
            .map(|c| FbMatrix::from_rows(b, c))
            .collect::<Result<Vec<_>>>()?;
        GeneratingMatrices::new(ms)
    }

    pub fn from_text(text: &str) -> Result<GeneratingMatrices> {
        GeneratingMatrices::read_text(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GeneratingMatrices> {
        GeneratingMatrices::read_text(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_text(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Calls `f` on every `k` in N^s with `|k| = total`, in lexicographic
/// order (largest `k_1` last).
pub fn for_each_composition(total: usize, s: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(pos: usize, left: usize, k: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == k.len() {
            k[pos] = left;
            f(k);
            return;
        }
        for v in 0..=left {
            k[pos] = v;
            rec(pos + 1, left - v, k, f);
        }
    }
    if s == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut k = vec![0; s];
    rec(0, total, &mut k, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primes() {
        let small: Vec<u32> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(65521));
        assert!(matches!(FbMatrix::zeros(4, 1, 1), Err(Error::NonPrimeBase(4))));
    }

    #[test]
    fn inverses() {
        for p in [2u32, 3, 5, 53, 65521] {
            for a in 1..p.min(200) {
                let i = inv_mod(a, p).unwrap();
                assert_eq!((a as u64 * i as u64) % p as u64, 1);
            }
        }
    }

    #[test]
    fn matvec_examples() {
        let id = FbMatrix::identity(5, 3).unwrap();
        assert_eq!(id.matvec(&[4, 2, 1]).unwrap(), vec![4, 2, 1]);
        let m = FbMatrix::from_rows(2, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(m.matvec(&[1, 1]).unwrap(), vec![0, 1]);
        let z = FbMatrix::zeros(3, 2, 2).unwrap();
        assert_eq!(z.matvec(&[2, 1]).unwrap(), vec![0, 0]);
        assert!(m.matvec(&[1]).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FbMatrix::identity(7, 4).unwrap().rank(), 4);
        assert_eq!(FbMatrix::zeros(7, 3, 4).unwrap().rank(), 0);
        let m = FbMatrix::from_rows(2, &[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(m.rank(), 2);
        // Over F_3 the same rows are independent.
        let m3 = FbMatrix::from_rows(3, &[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(m3.rank(), 3);
    }

    #[test]
    fn stack_rows_examples() {
        let i3 = FbMatrix::identity(2, 3).unwrap();
        let pascal = FbMatrix::from_rows(2, &[vec![1, 1, 1], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let ms = [i3.clone(), pascal];
        let st = stack_rows(&ms, &[1, 1]).unwrap();
        assert_eq!(st.to_rows(), vec![vec![1, 0, 0], vec![1, 1, 1]]);
        assert_eq!(st.rank(), 2);
        assert_eq!(stack_rows(&ms, &[0, 0]).unwrap().rows(), 0);
        assert_eq!(stack_rows(&ms, &[3, 0]).unwrap().rank(), 3);
        assert!(stack_rows(&ms, &[4, 0]).is_err());
        let g = GeneratingMatrices::new(ms.to_vec()).unwrap();
        assert_eq!(g.r(&[0, 0]).unwrap(), 0);
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let m = FbMatrix::from_rows(5, &[vec![1, 2, 3], vec![0, 1, 4], vec![0, 0, 1]]).unwrap();
        let mut acc = FbMatrix::identity(5, 3).unwrap();
        for e in 0..8 {
            assert_eq!(m.pow(e).unwrap(), acc);
            acc = acc.mul(&m).unwrap();
        }
    }

    #[test]
    fn nlt_shape_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = random_nlt(2, 6, &mut rng).unwrap();
        assert!(l.is_lower_triangular());
        assert!((0..6).all(|i| l.get(i, i) == 1));
        assert_eq!(l.rank(), 6);
        let a = random_nlt(53, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_nlt(53, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!((0..5).all(|i| a.get(i, i) != 0));
    }

    #[test]
    fn matrix_file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ms = (0..3).map(|_| random_nlt(5, 4, &mut rng).unwrap()).collect();
        let g = GeneratingMatrices::new(ms).unwrap();
        let text = g.to_text().unwrap();
        assert!(text.starts_with("base=5 m=4 s=3\n"));
        assert_eq!(GeneratingMatrices::from_text(&text).unwrap(), g);
        let compact = "base=2 m=2 s=1\n10\n01\n";
        assert_eq!(GeneratingMatrices::from_text(compact).unwrap().matrix(0).rank(), 2);
    }

    #[test]
    fn compositions_count() {
        let mut n = 0;
        for_each_composition(4, 3, &mut |k| {
            assert_eq!(k.iter().sum::<usize>(), 4);
            n += 1;
        });
        assert_eq!(n, 15);
    }
}
