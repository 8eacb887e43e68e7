//! Base-b digital scrambles: nested uniform scrambling of arbitrary point
//! sets, and affine matrix scrambling (random NLT left factor plus digital
//! shift) of digital nets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{check_base, check_precision, default_precision, PointSet};
use crate::error::{Error, Result};
use crate::fieldlinalg::{check_prime, random_nlt, FbMatrix, GeneratingMatrices};
use crate::netgen::{checked_pow, generate_digital_net, sequence_prefix_from_matrices};
use crate::seed::{child_seed, rng_for, splitmix64, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleMethod {
    NestedUniform,
    AffineNlt,
}

/// `depth` is the number of output digits; `None` means
/// [`default_precision`] of `base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrambleSpec {
    pub base: u32,
    pub method: ScrambleMethod,
    pub seed: u64,
    #[serde(default)]
    pub depth: Option<usize>,
}

impl ScrambleSpec {
    pub fn nested(base: u32, seed: u64) -> Self {
        ScrambleSpec { base, method: ScrambleMethod::NestedUniform, seed, depth: None }
    }

    pub fn affine(base: u32, seed: u64) -> Self {
        ScrambleSpec { base, method: ScrambleMethod::AffineNlt, seed, depth: None }
    }

    pub fn depth(&self) -> usize {
        self.depth.unwrap_or_else(|| default_precision(self.base))
    }

    /// The same scramble with seed `child_seed(seed, [replicate])`.
    pub fn replicate(&self, r: u64) -> ScrambleSpec {
        ScrambleSpec { seed: child_seed(self.seed, &[tag::REPLICATE, r]), ..*self }
    }
}

/// Re-expand every coordinate in `new_base` with `precision` digits by
/// multiply-and-truncate on the exact fixed-point value.
pub fn rebase(ps: &PointSet, new_base: u32, precision: usize) -> Result<PointSet> {
    check_base(new_base)?;
    check_precision(new_base, precision)?;
    if ps.base() == new_base && ps.precision() == precision {
        return Ok(ps.clone());
    }
    let (b, p) = (ps.base(), ps.precision());
    if b == new_base {
        // Same base: pad with zeros or truncate.
        let mut digits = Vec::with_capacity(ps.len() * ps.dim() * precision);
        for i in 0..ps.len() {
            for j in 0..ps.dim() {
                let c = ps.coord_digits(i, j);
                let keep = p.min(precision);
                digits.extend_from_slice(&c[..keep]);
                digits.extend(std::iter::repeat_n(0u16, precision - keep));
            }
        }
        return PointSet::from_flat(
            new_base,
            precision,
            ps.dim(),
            digits,
            ps.provenance().derived(format!("{precision}-digit expansion")),
        );
    }
    let denom = checked_pow(b, p as u32)
        .filter(|d| d.checked_mul(new_base as u128).is_some())
        .ok_or_else(|| {
            Error::PrecisionOverflow(format!("base {b} with {p} digits cannot be re-expanded exactly"))
        })?;
    let nb = new_base as u128;
    let mut digits = vec![0u16; ps.len() * ps.dim() * precision];
    digits
        .par_chunks_mut(ps.dim() * precision)
        .enumerate()
        .for_each(|(i, out)| {
            for j in 0..ps.dim() {
                let mut num = ps.coord(i, j).fixed();
                for d in out[j * precision..(j + 1) * precision].iter_mut() {
                    num *= nb;
                    *d = (num / denom) as u16;
                    num %= denom;
                }
            }
        });
    PointSet::from_flat(
        new_base,
        precision,
        ps.dim(),
        digits,
        ps.provenance().derived(format!("base-{new_base} expansion")),
    )
}

/// Node key for the permutation applied below a digit prefix. Keys are a
/// hash chain over the prefix digits, rooted at the coordinate's stream.
#[inline]
fn child_key(parent: u64, digit: u16) -> u64 {
    splitmix64(parent ^ splitmix64(digit as u64 + 1))
}

/// Uniform random permutation of `0..b` owned by the node `key`.
pub(crate) fn node_permutation(key: u64, b: u32, buf: &mut Vec<u16>) {
    buf.clear();
    buf.extend(0..b as u16);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    buf.shuffle(&mut rng);
}

/// Owen's nested uniform scramble in `spec.base`, which must equal the
/// point set's base (see [`scramble`] for automatic re-expansion).
///
/// The permutation applied to digit `r + 1` of coordinate `j` is keyed by
/// `(seed, j, d_1 .. d_r)`, so a point's image depends only on its own
/// digits and the seed. Inputs shorter than the output depth are padded
/// with zeros.
pub fn nested_uniform_scramble(ps: &PointSet, spec: &ScrambleSpec) -> Result<PointSet> {
    if ps.base() != spec.base {
        return Err(Error::BaseMismatch { left: ps.base(), right: spec.base });
    }
    let depth = spec.depth();
    let src = rebase(ps, spec.base, depth)?;
    let b = spec.base;
    let s = src.dim();
    let roots: Vec<u64> = (0..s)
        .map(|j| child_seed(spec.seed, &[tag::NESTED, j as u64]))
        .collect();
    let mut digits = vec![0u16; src.len() * s * depth];
    digits
        .par_chunks_mut(s * depth)
        .enumerate()
        .for_each_init(Vec::new, |perm, (i, out)| {
            for j in 0..s {
                let mut key = roots[j];
                for (r, &d) in src.coord_digits(i, j).iter().enumerate() {
                    node_permutation(key, b, perm);
                    out[j * depth + r] = perm[d as usize];
                    key = child_key(key, d);
                }
            }
        });
    PointSet::from_flat(
        b,
        depth,
        s,
        digits,
        ps.provenance().derived(format!("nested uniform scramble base {b} seed {}", spec.seed)),
    )
}

/// Scrambled generating matrices `S_j C_j` and the digital shift that goes
/// with them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineScramble {
    pub matrices: GeneratingMatrices,
    pub shifts: Vec<Vec<u16>>,
}

impl AffineScramble {
    /// The `b^m`-point net, shifted.
    pub fn net(&self, m: u32) -> Result<PointSet> {
        self.shifted(generate_digital_net(&self.matrices, m)?)
    }

    /// The first `n` points of the scrambled sequence, shifted.
    pub fn prefix(&self, n: usize) -> Result<PointSet> {
        self.shifted(sequence_prefix_from_matrices(&self.matrices, n)?)
    }

    fn shifted(&self, ps: PointSet) -> Result<PointSet> {
        let (b, p, s) = (ps.base(), ps.precision(), ps.dim());
        let mut digits = ps.flat_digits().to_vec();
        for chunk in digits.chunks_mut(s * p) {
            for (j, shift) in self.shifts.iter().enumerate() {
                for (d, &e) in chunk[j * p..(j + 1) * p].iter_mut().zip(shift) {
                    *d = ((*d as u32 + e as u32) % b) as u16;
                }
            }
        }
        PointSet::from_flat(b, p, s, digits, ps.provenance().derived("affine matrix scramble"))
    }
}

/// Left-multiply each `C_j` by a random NLT matrix and draw a uniform
/// digital shift per coordinate.
///
/// The matrices are first padded with zero rows to `spec.depth()` output
/// digits, so digits beyond the original rows are randomized as well.
pub fn affine_matrix_scramble(matrices: &GeneratingMatrices, spec: &ScrambleSpec) -> Result<AffineScramble> {
    check_prime(spec.base)?;
    if matrices.base() != spec.base {
        return Err(Error::BaseMismatch { left: matrices.base(), right: spec.base });
    }
    let b = spec.base;
    let rows = spec.depth().max(matrices.rows());
    check_precision(b, rows)?;
    let mut ms = Vec::with_capacity(matrices.dim());
    let mut shifts = Vec::with_capacity(matrices.dim());
    for (j, c) in matrices.matrices().iter().enumerate() {
        let padded = pad_rows(c, rows)?;
        let mut rng = rng_for(spec.seed, &[tag::AFFINE, j as u64]);
        let l = random_nlt(b, rows, &mut rng)?;
        ms.push(l.mul(&padded)?);
        shifts.push((0..rows).map(|_| rng.random_range(0..b) as u16).collect());
    }
    Ok(AffineScramble { matrices: GeneratingMatrices::new(ms)?, shifts })
}

fn pad_rows(c: &FbMatrix, rows: usize) -> Result<FbMatrix> {
    if c.rows() >= rows {
        return Ok(c.clone());
    }
    let mut r = c.to_rows();
    r.resize(rows, vec![0; c.cols()]);
    FbMatrix::from_rows(c.base(), &r)
}

/// Nested uniform scramble in `spec.base`, re-expanding the input first if
/// it was built in another base. Affine scrambles need the generating
/// matrices and go through [`affine_matrix_scramble`] instead.
pub fn scramble(ps: &PointSet, spec: &ScrambleSpec) -> Result<PointSet> {
    match spec.method {
        ScrambleMethod::NestedUniform => {
            let src = if ps.base() == spec.base { ps.clone() } else { rebase(ps, spec.base, spec.depth())? };
            nested_uniform_scramble(&src, spec)
        }
        ScrambleMethod::AffineNlt => Err(Error::InvalidArgument(
            "affine scrambling needs generating matrices, not a point set".into(),
        )),
    }
}
