//! Point set construction: digital nets from generating matrices, Faure and
//! generalized Faure matrices, Sobol' matrices with unit initial direction
//! numbers, sequence prefixes and coordinate projections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{check_precision, default_precision, PointSet, Provenance};
use crate::error::{Error, Result};
use crate::fieldlinalg::{check_prime, random_nlt, FbMatrix, GeneratingMatrices};
use crate::seed::{rng_for, tag};

/// Base-b digits of `i`, least significant first.
pub fn index_digits(i: u128, base: u32, len: usize) -> Vec<u16> {
    let b = base as u128;
    let mut v = i;
    (0..len)
        .map(|_| {
            let d = (v % b) as u16;
            v /= b;
            d
        })
        .collect()
}

/// `b^e`, or `None` on overflow.
pub fn checked_pow(base: u32, e: u32) -> Option<u128> {
    (base as u128).checked_pow(e)
}

/// Upper-triangular Pascal matrix raised to `power`, `size x size`:
/// entry `(r, c)` (0-based) is `binom(c, r) power^(c-r) mod b`.
pub fn pascal_power(b: u32, size: usize, power: u64) -> Result<FbMatrix> {
    check_prime(b)?;
    let bb = b as u64;
    let mut binom = vec![vec![0u64; size]; size];
    for c in 0..size {
        binom[c][0] = 1;
        for r in 1..=c {
            binom[c][r] = (binom[c - 1][r - 1] + if r < c { binom[c - 1][r] } else { 0 }) % bb;
        }
    }
    let p = power % bb;
    let mut pw = vec![1u64; size];
    for e in 1..size {
        pw[e] = pw[e - 1] * p % bb;
    }
    // 0^0 = 1 keeps the identity on the diagonal for power 0.
    let rows: Vec<Vec<u32>> = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| if c < r { 0 } else { (binom[c][r] * pw[c - r] % bb) as u32 })
                .collect()
        })
        .collect();
    FbMatrix::from_rows(b, &rows)
}

/// Faure matrices `C_j = P^{j-1}` of size `size x size`, for `j = 1..s`.
pub fn faure_matrices(b: u32, s: usize, size: usize) -> Result<GeneratingMatrices> {
    check_prime(b)?;
    if s == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if (b as usize) < s {
        return Err(Error::InvalidArgument(format!(
            "Faure construction needs base >= dimension, got base {b} and s = {s}"
        )));
    }
    GeneratingMatrices::new(
        (0..s)
            .map(|j| pascal_power(b, size, j as u64))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Generalized Faure matrices `L_j C_j` with random nonsingular
/// lower-triangular `L_j`, each drawn from its own stream under `seed`.
pub fn gfaure_matrices(b: u32, s: usize, size: usize, seed: u64) -> Result<GeneratingMatrices> {
    let faure = faure_matrices(b, s, size)?;
    let ms = faure
        .matrices()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut rng = rng_for(seed, &[tag::GFAURE, j as u64]);
            random_nlt(b, size, &mut rng)?.mul(c)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneratingMatrices::new(ms)
}

/// A primitive polynomial over F_2 of the given degree. The coefficient
/// bits of `x^{deg-1} .. x^1` are packed into `a`, highest power in the
/// most significant position; the leading and constant terms are implicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SobolPoly {
    pub degree: u32,
    pub a: u32,
}

/// Primitive polynomials for coordinates 2 onward, ordered by degree and
/// then by `a`, following the Joe-Kuo direction-number tables. Coordinate 1
/// is van der Corput and has no polynomial.
pub const SOBOL_POLYS: &[(u32, u32)] = &[
    (1, 0),
    (2, 1),
    (3, 1), (3, 2),
    (4, 1), (4, 4),
    (5, 2), (5, 4), (5, 7), (5, 11), (5, 13), (5, 14),
    (6, 1), (6, 13), (6, 16), (6, 19), (6, 22), (6, 25),
    (7, 1), (7, 4), (7, 7), (7, 8), (7, 14), (7, 19), (7, 21), (7, 28), (7, 31),
    (7, 32), (7, 37), (7, 41), (7, 42), (7, 50), (7, 55), (7, 56), (7, 59), (7, 62),
    (8, 14), (8, 21), (8, 22), (8, 38), (8, 47), (8, 49), (8, 50), (8, 52),
    (8, 56), (8, 67), (8, 70), (8, 84), (8, 97), (8, 103), (8, 115), (8, 122),
];

pub fn sobol_max_dim() -> usize {
    SOBOL_POLYS.len() + 1
}

fn sobol_poly(coord: usize) -> Option<SobolPoly> {
    SOBOL_POLYS
        .get(coord.checked_sub(2)?)
        .map(|&(degree, a)| SobolPoly { degree, a })
}

/// Direction integers `m_1 .. m_len` for 1-based coordinate `coord`, with
/// every initial value set to 1.
pub fn sobol_direction_integers(coord: usize, len: usize) -> Result<Vec<u128>> {
    if coord == 1 {
        return Ok(vec![1; len]);
    }
    let p = sobol_poly(coord).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "bundled polynomial table covers {} coordinates, asked for {coord}",
            sobol_max_dim()
        ))
    })?;
    let s = p.degree as usize;
    let mut m: Vec<u128> = Vec::with_capacity(len);
    for k in 0..len {
        if k < s {
            m.push(1);
            continue;
        }
        let mut v = m[k - s] ^ (m[k - s] << s);
        for l in 1..s {
            if (p.a >> (s - 1 - l)) & 1 == 1 {
                v ^= m[k - l] << l;
            }
        }
        m.push(v);
    }
    Ok(m)
}

/// Sobol' matrices over F_2 with `rows` output bits and `cols` index bits.
/// Column `k` holds the binary expansion of `m_k / 2^k`.
pub fn sobol_unit_matrices(s: usize, rows: usize, cols: usize) -> Result<GeneratingMatrices> {
    if rows < cols || cols > 126 {
        return Err(Error::InvalidArgument(format!(
            "Sobol' matrices need cols <= rows and cols <= 126, got {rows}x{cols}"
        )));
    }
    let mut ms = Vec::with_capacity(s);
    for coord in 1..=s {
        let dir = sobol_direction_integers(coord, cols)?;
        let mut mat = FbMatrix::zeros(2, rows, cols)?;
        for (k0, &mk) in dir.iter().enumerate() {
            let k = k0 + 1;
            for r in 1..=k {
                mat.set(r - 1, k0, ((mk >> (k - r)) & 1) as u32);
            }
        }
        ms.push(mat);
    }
    GeneratingMatrices::new(ms)
}

/// Points `i = 0 .. b^m - 1` of the digital net defined by `matrices`.
/// Only the first `m` columns are used; coordinates carry one digit per
/// matrix row.
pub fn generate_digital_net(matrices: &GeneratingMatrices, m: u32) -> Result<PointSet> {
    let n = checked_pow(matrices.base(), m)
        .filter(|&n| n <= usize::MAX as u128 && n <= u32::MAX as u128)
        .ok_or_else(|| Error::PrecisionOverflow(format!("b^m with m = {m} is too large")))?
        as usize;
    if (m as usize) > matrices.cols() {
        return Err(Error::DimensionMismatch { expected: matrices.cols(), found: m as usize });
    }
    let ps = generate_points(matrices, m as usize, n)?;
    Ok(ps.with_provenance(Provenance::Construction {
        descriptor: format!("digital net base {} m {} s {}", matrices.base(), m, matrices.dim()),
    }))
}

/// The first `n` points `i = 0 .. n-1` generated with the first `cols`
/// matrix columns.
fn generate_points(matrices: &GeneratingMatrices, cols: usize, n: usize) -> Result<PointSet> {
    let b = matrices.base();
    let p = matrices.rows().max(1);
    check_precision(b, p)?;
    let s = matrices.dim();
    let narrowed;
    let mats = if cols < matrices.cols() {
        narrowed = matrices.truncate(matrices.rows(), cols)?;
        &narrowed
    } else {
        matrices
    };
    let stride = s * p;
    let mut digits = vec![0u16; n * stride];
    digits.par_chunks_mut(stride).enumerate().for_each(|(i, out)| {
        let idx = index_digits(i as u128, b, cols);
        for (j, c) in mats.matrices().iter().enumerate() {
            c.matvec_into(&idx, &mut out[j * p..j * p + c.rows()]);
        }
    });
    PointSet::from_flat(b, p, s, digits, Provenance::Unspecified)
}

/// The first `n` points of the sequence defined by square `P x P` matrices.
pub fn sequence_prefix_from_matrices(matrices: &GeneratingMatrices, n: usize) -> Result<PointSet> {
    let b = matrices.base();
    let cols = matrices.cols();
    let cap = checked_pow(b, cols as u32).unwrap_or(u128::MAX);
    if (n as u128) > cap {
        return Err(Error::PrecisionOverflow(format!(
            "{n} points need more than {cols} base-{b} index digits"
        )));
    }
    // Use only as many index digits as n - 1 needs.
    let mut used = 0usize;
    while checked_pow(b, used as u32).is_some_and(|v| v < n as u128) {
        used += 1;
    }
    generate_points(matrices, used.min(cols), n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Faure,
    Gfaure,
}

/// The first `n` points of the Faure or generalized Faure sequence in base
/// `b`, using `precision` digits (default: [`default_precision`]).
pub fn sequence_prefix(
    kind: SequenceKind,
    b: u32,
    s: usize,
    n: usize,
    seed: u64,
    precision: Option<usize>,
) -> Result<PointSet> {
    let p = precision.unwrap_or_else(|| default_precision(b));
    let mats = match kind {
        SequenceKind::Faure => faure_matrices(b, s, p)?,
        SequenceKind::Gfaure => gfaure_matrices(b, s, p, seed)?,
    };
    let name = match kind {
        SequenceKind::Faure => "Faure".to_string(),
        SequenceKind::Gfaure => format!("generalized Faure (seed {seed})"),
    };
    Ok(sequence_prefix_from_matrices(&mats, n)?.with_provenance(Provenance::Construction {
        descriptor: format!("first {n} points of the {name} sequence, base {b}, s {s}"),
    }))
}

/// Keep the listed coordinates (0-based) in the given order.
pub fn project(ps: &PointSet, coords: &[usize]) -> Result<PointSet> {
    let s = ps.dim();
    if coords.is_empty() {
        return Err(Error::InvalidArgument("projection needs at least one coordinate".into()));
    }
    if let Some(&bad) = coords.iter().find(|&&j| j >= s) {
        return Err(Error::IndexOutOfRange { index: bad, len: s });
    }
    let p = ps.precision();
    let mut digits = Vec::with_capacity(ps.len() * coords.len() * p);
    for i in 0..ps.len() {
        for &j in coords {
            digits.extend_from_slice(ps.coord_digits(i, j));
        }
    }
    let label: Vec<String> = coords.iter().map(|j| (j + 1).to_string()).collect();
    PointSet::from_flat(
        ps.base(),
        p,
        coords.len(),
        digits,
        ps.provenance().derived(format!("projection on coordinates ({})", label.join(","))),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Faure,
    Gfaure,
    SobolUnit,
    FromFile,
}

/// Serializable construction descriptor.
///
/// Exactly one of `m` (net of `b^m` points) or `n` (sequence prefix of `n`
/// points) is given. `coords` lists 1-based coordinates to keep after
/// construction; when present, `s` is the dimension of the full
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub kind: NetKind,
    #[serde(default)]
    pub base: Option<u32>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub coords: Option<Vec<usize>>,
    #[serde(default)]
    pub matrix_file: Option<String>,
    #[serde(default)]
    pub precision: Option<usize>,
}

impl NetSpec {
    pub fn matrices(&self) -> Result<GeneratingMatrices> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::InvalidArgument(format!("{name} is required for {:?}", self.kind)))
        };
        match (self.m, self.n) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("give either m or n, not both".into()))
            }
            (None, None) => return Err(Error::InvalidArgument("one of m or n is required".into())),
            _ => {}
        }
        match self.kind {
            NetKind::FromFile => {
                let path = self
                    .matrix_file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("matrix_file is required".into()))?;
                let g = GeneratingMatrices::load(path)?;
                if let Some(b) = self.base {
                    if b != g.base() {
                        return Err(Error::BaseMismatch { left: b, right: g.base() });
                    }
                }
                Ok(g)
            }
            NetKind::Faure | NetKind::Gfaure => {
                let b = need(self.base.map(|b| b as usize), "base")? as u32;
                let s = need(self.s, "s")?;
                let p = self.precision.unwrap_or_else(|| default_precision(b));
                let p = match self.m {
                    Some(m) if self.precision.is_none() => m as usize,
                    _ => p,
                };
                if self.kind == NetKind::Faure {
                    faure_matrices(b, s, p)
                } else {
                    gfaure_matrices(b, s, p, self.seed.unwrap_or(0))
                }
            }
            NetKind::SobolUnit => {
                if let Some(b) = self.base {
                    if b != 2 {
                        return Err(Error::InvalidArgument("Sobol' matrices are base 2".into()));
                    }
                }
                let s = need(self.s, "s")?;
                let p = self.precision.unwrap_or_else(|| default_precision(2));
                let cols = match self.m {
                    Some(m) => m as usize,
                    None => p.min(126),
                };
                sobol_unit_matrices(s, p.max(cols), cols)
            }
        }
    }

    pub fn build(&self) -> Result<PointSet> {
        let mats = self.matrices()?;
        let ps = match (self.m, self.n) {
            (Some(m), None) => generate_digital_net(&mats, m)?,
            (None, Some(n)) => sequence_prefix_from_matrices(&mats, n)?,
            _ => unreachable!("checked in matrices()"),
        };
        let ps = ps.with_provenance(Provenance::Construction { descriptor: self.describe() });
        match &self.coords {
            None => Ok(ps),
            Some(cs) => {
                let zero: Vec<usize> = cs
                    .iter()
                    .map(|&c| c.checked_sub(1).ok_or(Error::IndexOutOfRange { index: 0, len: ps.dim() }))
                    .collect::<Result<_>>()?;
                project(&ps, &zero)
            }
        }
    }

    pub fn describe(&self) -> String {
        serde_json::to_string(self).expect("NetSpec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlinalg::for_each_composition;

    fn values(ps: &PointSet) -> Vec<f64> {
        (0..ps.len()).map(|i| ps.value(i, 0)).collect()
    }

    #[test]
    fn net_examples() {
        let one = GeneratingMatrices::new(vec![FbMatrix::identity(2, 1).unwrap()]).unwrap();
        assert_eq!(values(&generate_digital_net(&one, 1).unwrap()), vec![0.0, 0.5]);
        let id = GeneratingMatrices::new(vec![FbMatrix::identity(2, 2).unwrap()]).unwrap();
        assert_eq!(values(&generate_digital_net(&id, 2).unwrap()), vec![0.0, 0.5, 0.25, 0.75]);
        let f = faure_matrices(5, 3, 3).unwrap();
        let ps = generate_digital_net(&f, 3).unwrap();
        assert!(ps.coord_digits(0, 0).iter().chain(ps.coord_digits(0, 2)).all(|&d| d == 0));
    }

    #[test]
    fn faure_small_cases() {
        let f = faure_matrices(53, 2, 2).unwrap();
        assert_eq!(f.matrix(0), &FbMatrix::identity(53, 2).unwrap());
        assert_eq!(f.matrix(1).to_rows(), vec![vec![1, 1], vec![0, 1]]);
        assert!(faure_matrices(2, 3, 2).is_err());
        // P^2 over F_3, entry (r,c) = binom(c,r) 2^(c-r).
        let p2 = pascal_power(3, 3, 2).unwrap();
        assert_eq!(p2.to_rows(), vec![vec![1, 2, 1], vec![0, 1, 1], vec![0, 0, 1]]);
        assert_eq!(p2, pascal_power(3, 3, 1).unwrap().pow(2).unwrap());
    }

    #[test]
    fn faure_nets_have_t_zero() {
        for (b, s, m) in [(2u32, 2usize, 5usize), (3, 3, 4), (5, 3, 4), (7, 4, 3), (53, 3, 3)] {
            let f = faure_matrices(b, s, m).unwrap();
            assert_eq!(f.t_value().unwrap(), 0, "b={b} s={s} m={m}");
            for l in 0..=m {
                for_each_composition(l, s, &mut |k| assert_eq!(f.r(k).unwrap(), l));
            }
        }
    }

    #[test]
    fn gfaure_deterministic_and_t_zero() {
        let a = gfaure_matrices(5, 3, 4, 11).unwrap();
        assert_eq!(a, gfaure_matrices(5, 3, 4, 11).unwrap());
        assert_ne!(a, gfaure_matrices(5, 3, 4, 12).unwrap());
        assert_eq!(a.t_value().unwrap(), 0);
    }

    #[test]
    fn sobol_first_coordinates() {
        let g = sobol_unit_matrices(4, 8, 8).unwrap();
        assert_eq!(g.matrix(0), &FbMatrix::identity(2, 8).unwrap());
        for j in 0..4 {
            assert!(g.matrix(j).is_upper_triangular());
            assert_eq!(g.matrix(j).rank(), 8);
        }
        // Coordinate 2, x + 1: m_k = 1, 3, 5, 15, 17, ...
        assert_eq!(sobol_direction_integers(2, 5).unwrap(), vec![1, 3, 5, 15, 17]);
        assert!(sobol_unit_matrices(sobol_max_dim() + 1, 4, 4).is_err());
    }

    /// Order of x modulo the polynomial is 2^deg - 1 exactly when the
    /// polynomial is primitive.
    #[test]
    fn bundled_polynomials_are_primitive_and_distinct() {
        let mut seen = std::collections::HashSet::new();
        for &(deg, a) in SOBOL_POLYS {
            let poly: u32 = (1 << deg) | (a << 1) | 1;
            assert!(seen.insert(poly));
            let period = (1u32 << deg) - 1;
            let mut x = 1u32;
            let mut order = 0;
            loop {
                x <<= 1;
                if x & (1 << deg) != 0 {
                    x ^= poly;
                }
                order += 1;
                if x == 1 {
                    break;
                }
                assert!(order <= period);
            }
            assert_eq!(order, period, "degree {deg} a {a}");
        }
    }

    #[test]
    fn sequence_prefix_matches_net() {
        let seq = sequence_prefix(SequenceKind::Faure, 3, 2, 27, 0, Some(6)).unwrap();
        let net = generate_digital_net(&faure_matrices(3, 2, 6).unwrap(), 3).unwrap();
        assert_eq!(seq.flat_digits(), net.flat_digits());
        let g = sequence_prefix(SequenceKind::Gfaure, 3, 2, 27, 4, Some(6)).unwrap();
        let gn = generate_digital_net(&gfaure_matrices(3, 2, 6, 4).unwrap(), 3).unwrap();
        assert_eq!(g.flat_digits(), gn.flat_digits());
        assert!(sequence_prefix(SequenceKind::Faure, 2, 1, 17, 0, Some(4)).is_err());
    }

    #[test]
    fn projection_composes() {
        let ps = sequence_prefix(SequenceKind::Faure, 5, 3, 40, 0, None).unwrap();
        assert_eq!(project(&ps, &[0, 1, 2]).unwrap().flat_digits(), ps.flat_digits());
        let a = project(&project(&ps, &[0, 1]).unwrap(), &[0]).unwrap();
        assert_eq!(a.flat_digits(), project(&ps, &[0]).unwrap().flat_digits());
        assert!(project(&ps, &[3]).is_err());
    }

    #[test]
    fn net_spec_json() {
        let spec: NetSpec =
            serde_json::from_str(r#"{"kind":"faure","base":5,"s":3,"n":30,"coords":[2,3]}"#).unwrap();
        let ps = spec.build().unwrap();
        assert_eq!((ps.len(), ps.dim()), (30, 2));
        let full = sequence_prefix(SequenceKind::Faure, 5, 3, 30, 0, None).unwrap();
        assert_eq!(ps.flat_digits(), project(&full, &[1, 2]).unwrap().flat_digits());
        let bad: NetSpec = serde_json::from_str(r#"{"kind":"faure","base":5,"s":3}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
