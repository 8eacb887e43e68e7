//! Joint law of a scrambled pair and the lower-orthant function
//! `H(x,y) = P(U ≤ x, V ≤ y)` for two distinct points of a scrambled set.
//!
//! Two routes compute `H`. The first integrates the piecewise-constant joint
//! density: `H = Σ_i V_i(x,y) ψ_i`. The second expands the box volume in
//! nonnegative coefficients `t_k` and weights them by the C values:
//! `H = Σ_k t_k C_b(k)`. Both sums are finite, so they agree up to
//! rounding.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::f64_to_digits;
use crate::error::{Error, Result};
use crate::quality::{for_each_in_box, to_f64, MultiIndex, PairCounts, QualityProfile};

/// Digits of `min(x,y)` and γ of the pair, read far enough to settle every
/// case comparison up to `depth`.
#[derive(Clone, Debug)]
struct ScalarPair {
    x: f64,
    y: f64,
    b: u32,
    /// Shared leading digits, capped at `depth + 1`.
    gamma: u32,
    /// `h_0 ..= h_{depth+1}`: truncations of `min(x,y)`.
    h: Vec<f64>,
    /// `b^{-i}` for `i = 0 ..= depth+1`.
    w: Vec<f64>,
    /// Some coordinate equals 1.
    edge: bool,
}

fn check_unit(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::InvalidArgument(format!("{v} is outside [0,1]")));
    }
    Ok(())
}

impl ScalarPair {
    fn new(x: f64, y: f64, b: u32, depth: usize) -> Result<Self> {
        check_unit(x)?;
        check_unit(y)?;
        if b < 2 {
            return Err(Error::InvalidBase(b));
        }
        let len = depth + 2;
        let bf = b as f64;
        let mut w = Vec::with_capacity(len);
        let mut p = 1.0;
        for _ in 0..len {
            w.push(p);
            p /= bf;
        }
        if x == 1.0 || y == 1.0 {
            return Ok(ScalarPair { x, y, b, gamma: 0, h: vec![0.0; len], w, edge: true });
        }
        let dx = f64_to_digits(b, len, x)?;
        let dy = f64_to_digits(b, len, y)?;
        let gamma = dx.iter().zip(&dy).position(|(a, c)| a != c).unwrap_or(len) as u32;
        let dmin = if x <= y { &dx } else { &dy };
        let mut h = Vec::with_capacity(len);
        let mut acc = 0.0;
        h.push(0.0);
        for r in 1..len {
            acc += dmin[r - 1] as f64 * w[r];
            h.push(acc);
        }
        Ok(ScalarPair { x, y, b, gamma, h, w, edge: false })
    }

    /// V_i, written to avoid cancellation between O(1) terms.
    fn v(&self, i: usize) -> f64 {
        let bf = self.b as f64;
        let wi = self.w[i];
        if self.edge {
            return self.x * self.y * (bf - 1.0) * wi / bf;
        }
        let lo = self.x.min(self.y);
        let g = self.gamma as usize;
        if g < i {
            (bf - 1.0) / bf * lo * wi
        } else if g == i {
            let h = self.h[i];
            let (rx, ry) = (self.x - h, self.y - h);
            rx * ry + h * wi * (1.0 - 1.0 / bf) - (lo - h) * wi / bf
        } else {
            let (h0, h1) = (self.h[i], self.h[i + 1]);
            let delta = h1 - h0;
            let r = (self.x - h1) + (self.y - h1);
            h1 * (bf - 1.0) * self.w[i + 1] + delta * (delta + r - wi)
        }
    }
}

/// `V_i(x,y)`: area of `{(u,v) ∈ [0,x)×[0,y) : γ_b(u,v) = i}`.
pub fn v_scalar(x: f64, y: f64, i: u32, b: u32) -> Result<f64> {
    Ok(ScalarPair::new(x, y, b, i as usize)?.v(i as usize))
}

/// `V_0 .. V_{depth-1}` for one coordinate.
pub fn v_scalar_range(x: f64, y: f64, b: u32, depth: usize) -> Result<Vec<f64>> {
    let p = ScalarPair::new(x, y, b, depth)?;
    Ok((0..depth).map(|i| p.v(i)).collect())
}

/// `V_i(x,y)` in exact rational arithmetic, for `x, y ∈ [0,1]`.
pub fn v_scalar_exact(x: &BigRational, y: &BigRational, i: u32, b: u32) -> Result<BigRational> {
    let one = BigRational::one();
    let zero = BigRational::zero();
    for v in [x, y] {
        if *v < zero || *v > one {
            return Err(Error::InvalidArgument(format!("{v} is outside [0,1]")));
        }
    }
    let bb = BigRational::from_integer(BigInt::from(b));
    let w = |e: u32| BigRational::new(BigInt::one(), BigInt::from(b).pow(e));
    let wi = w(i);
    if *x == one || *y == one {
        return Ok(x * y * (&bb - &one) * &wi / &bb);
    }
    let trunc = |v: &BigRational, e: u32| -> BigRational {
        let s = BigRational::from_integer(BigInt::from(b).pow(e));
        (v * &s).floor() / s
    };
    // γ compared against i and i + 1 only.
    let gamma_ge = |e: u32| trunc(x, e) == trunc(y, e);
    let lo = if x <= y { x.clone() } else { y.clone() };
    let hi_i = trunc(&lo, i);
    let hi_next = trunc(&lo, i + 1);
    let v = if !gamma_ge(i) {
        (&bb - &one) / &bb * &lo * &wi
    } else if !gamma_ge(i + 1) {
        x * y - &hi_i * (x + y - &hi_i - &wi) - &lo * w(i + 1)
    } else {
        &hi_next * (x + y - &hi_next - w(i + 1)) - &hi_i * (x + y - &hi_i - &wi)
    };
    Ok(v)
}

/// `V_i^s(x,y) = ∏_j V_{i_j}(x_j, y_j)`.
pub fn v_vector(x: &[f64], y: &[f64], i: &[u32], b: u32) -> Result<f64> {
    if x.len() != y.len() || x.len() != i.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len().min(i.len()) });
    }
    let mut prod = 1.0;
    for j in 0..x.len() {
        prod *= v_scalar(x[j], y[j], i[j], b)?;
    }
    Ok(prod)
}

/// `Vol(D_i^s) = (b-1)^s / b^{s+|i|}`.
pub fn vol_d(b: u32, i: &[u32]) -> BigRational {
    let s = i.len() as u32;
    let norm: u32 = i.iter().sum();
    BigRational::new(BigInt::from(b - 1).pow(s), BigInt::from(b).pow(s + norm))
}

/// Per-coordinate `V_i` tables, `i < depth`, with their tensor product
/// available on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub base: u32,
    pub depth: usize,
    pub per_coord: Vec<Vec<f64>>,
}

impl VolumeVector {
    pub fn new(x: &[f64], y: &[f64], b: u32, depth: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        let per_coord = x
            .iter()
            .zip(y)
            .map(|(&a, &c)| v_scalar_range(a, c, b, depth))
            .collect::<Result<Vec<_>>>()?;
        Ok(VolumeVector { x: x.to_vec(), y: y.to_vec(), base: b, depth, per_coord })
    }

    /// `V_i^s`, zero when some `i_j` is at or past the truncation depth.
    pub fn get(&self, i: &[u32]) -> f64 {
        i.iter()
            .zip(&self.per_coord)
            .map(|(&ij, v)| v.get(ij as usize).copied().unwrap_or(0.0))
            .product()
    }

    /// `Σ_i V_i^s` over the truncated box.
    pub fn total(&self) -> f64 {
        self.per_coord.iter().map(|v| v.iter().sum::<f64>()).product()
    }

    /// Box volume `∏ x_j y_j`.
    pub fn box_volume(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, c)| a * c).product()
    }
}

/// Truncation depth for a horizon: two guard levels past it, and deep
/// enough that the geometric tail `(b-1)/b^depth` is below `1e-9`.
pub fn truncation_depth(b: u32, horizon: u32) -> usize {
    let mut d = horizon as usize + 2;
    while (b as f64 - 1.0) / (b as f64).powi(d as i32) >= 1e-9 {
        d += 1;
    }
    d
}

/// Coefficients `t_k = ∏_j t_{j,k_j}` with `t_{j,0} = b V_0 / (b-1)` and
/// `t_{j,k} = (b V_k - V_{k-1}) / (b-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompCoeffs {
    pub base: u32,
    pub depth: usize,
    pub per_coord: Vec<Vec<f64>>,
}

impl DecompCoeffs {
    pub fn get(&self, k: &[u32]) -> f64 {
        k.iter()
            .zip(&self.per_coord)
            .map(|(&kj, t)| t.get(kj as usize).copied().unwrap_or(0.0))
            .product()
    }

    pub fn total(&self) -> f64 {
        self.per_coord.iter().map(|t| t.iter().sum::<f64>()).product()
    }

    pub fn min(&self) -> f64 {
        self.per_coord.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Rounding slack allowed before a negative coefficient counts as a bug.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

pub fn t_coefficients(x: &[f64], y: &[f64], b: u32, depth: usize) -> Result<DecompCoeffs> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let vols = VolumeVector::new(x, y, b, depth)?;
    let bf = b as f64;
    let mut per_coord = Vec::with_capacity(x.len());
    for (j, v) in vols.per_coord.iter().enumerate() {
        let mut t = Vec::with_capacity(depth);
        t.push(bf * v[0] / (bf - 1.0));
        for k in 1..depth {
            t.push((bf * v[k] - v[k - 1]) / (bf - 1.0));
        }
        if let Some((k, &bad)) = t.iter().enumerate().find(|(_, &c)| c < -NEGATIVE_TOLERANCE) {
            return Err(Error::Consistency(format!(
                "t_{{{},{k}}} = {bad:e} < 0 at x = {}, y = {}",
                j + 1,
                x[j],
                y[j]
            )));
        }
        per_coord.push(t);
    }
    Ok(DecompCoeffs { base: b, depth, per_coord })
}

/// ψ on each `D_i^s`, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointPdf {
    pub base: u32,
    pub n: usize,
    pub s: usize,
    pub horizon: Vec<u32>,
    /// Nonzero values in graded lexicographic order of `i`.
    #[serde(with = "support_serde")]
    pub support: Vec<(MultiIndex, BigRational)>,
}

/// `ψ_i = N_b(i) / (n(n-1)) · b^{s+|i|} / (b-1)^s`.
pub fn joint_pdf(counts: &PairCounts) -> JointPdf {
    let b = counts.base();
    let s = counts.dim() as u32;
    let pairs = BigInt::from(counts.ordered_pairs());
    let support = counts
        .n_support()
        .into_iter()
        .map(|(i, nb)| {
            let num = BigInt::from(nb) * BigInt::from(b).pow(s + i.norm());
            let den = &pairs * BigInt::from(b - 1).pow(s);
            (i, BigRational::new(num, den))
        })
        .collect();
    JointPdf { base: b, n: counts.n(), s: counts.dim(), horizon: counts.horizon().to_vec(), support }
}

impl JointPdf {
    pub fn value(&self, i: &[u32]) -> BigRational {
        self.support
            .iter()
            .find(|(k, _)| k.as_slice() == i)
            .map_or_else(BigRational::zero, |(_, v)| v.clone())
    }

    /// `Σ_i ψ_i Vol(D_i^s)`; exactly one for a valid pdf.
    pub fn normalization(&self) -> BigRational {
        self.support
            .iter()
            .map(|(i, v)| v * vol_d(self.base, i.as_slice()))
            .fold(BigRational::zero(), |a, c| a + c)
    }

    /// `b^{|k|} Σ_{i ≥ k} ψ_i Vol(D_i^s)`, which recovers `C_b(k)`.
    pub fn c_value(&self, k: &[u32]) -> BigRational {
        let norm: u32 = k.iter().sum();
        let tail = self
            .support
            .iter()
            .filter(|(i, _)| i.as_slice().iter().zip(k).all(|(a, c)| a >= c))
            .map(|(i, v)| v * vol_d(self.base, i.as_slice()))
            .fold(BigRational::zero(), |a, c| a + c);
        tail * BigRational::from_integer(BigInt::from(self.base).pow(norm))
    }

    /// Whether ψ depends on `i` only through `|i|`.
    pub fn depends_only_on_norm(&self) -> bool {
        let mut by_level: BTreeMap<u32, BigRational> = BTreeMap::new();
        let mut ok = true;
        for_each_in_box(
            &self.horizon.iter().map(|h| h.saturating_sub(1)).collect::<Vec<_>>(),
            |i| {
                let v = self.value(i);
                let level: u32 = i.iter().sum();
                match by_level.get(&level) {
                    Some(prev) if *prev != v => ok = false,
                    Some(_) => {}
                    None => {
                        by_level.insert(level, v);
                    }
                }
            },
        );
        ok
    }

    fn max_index(&self) -> Vec<usize> {
        let mut m = vec![0usize; self.s];
        for (i, _) in &self.support {
            for (mj, &ij) in m.iter_mut().zip(i.as_slice()) {
                *mj = (*mj).max(ij as usize + 1);
            }
        }
        m
    }
}

fn check_point(x: &[f64], y: &[f64], s: usize) -> Result<()> {
    if x.len() != s || y.len() != s {
        return Err(Error::DimensionMismatch { expected: s, found: if x.len() != s { x.len() } else { y.len() } });
    }
    Ok(())
}

/// `H(x,y) = Σ_i V_i^s(x,y) ψ_i` over the support of ψ.
pub fn h_via_pdf(pdf: &JointPdf, x: &[f64], y: &[f64]) -> Result<f64> {
    check_point(x, y, pdf.s)?;
    let depth = pdf.max_index();
    let tables = (0..pdf.s)
        .map(|j| v_scalar_range(x[j], y[j], pdf.base, depth[j].max(1)))
        .collect::<Result<Vec<_>>>()?;
    let mut h = 0.0;
    for (i, psi) in &pdf.support {
        let v: f64 = i.as_slice().iter().zip(&tables).map(|(&ij, t)| t[ij as usize]).product();
        h += v * to_f64(psi);
    }
    Ok(h)
}

/// `H(x,y) = Σ_k t_k C_b(k)`.
///
/// C vanishes once some `k_j` reaches the horizon, so the sum runs over
/// `k_j < K_j` and needs no truncation.
pub fn h_via_decomposition(profile: &QualityProfile, x: &[f64], y: &[f64]) -> Result<f64> {
    check_point(x, y, profile.s)?;
    let depth = profile.horizon.iter().copied().max().unwrap_or(0) as usize + 1;
    let t = t_coefficients(x, y, profile.base, depth)?;
    let mut h = 0.0;
    for v in profile.nonzero() {
        h += t.get(v.k.as_slice()) * to_f64(&v.c);
    }
    Ok(h)
}

/// `T(x,y) = P(U > x, V > y)`, which equals `H(1-x, 1-y)` because ψ is
/// invariant under `(u,v) -> (1-u, 1-v)`.
pub fn t_survival(pdf: &JointPdf, x: &[f64], y: &[f64]) -> Result<f64> {
    let fx: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    let fy: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    h_via_pdf(pdf, &fx, &fy)
}

/// `H(x,y)` in exact arithmetic for rational arguments.
pub fn h_exact(pdf: &JointPdf, x: &[BigRational], y: &[BigRational]) -> Result<BigRational> {
    if x.len() != pdf.s || y.len() != pdf.s {
        return Err(Error::DimensionMismatch { expected: pdf.s, found: x.len() });
    }
    let mut h = BigRational::zero();
    for (i, psi) in &pdf.support {
        let mut v = psi.clone();
        for (j, &ij) in i.as_slice().iter().enumerate() {
            v *= v_scalar_exact(&x[j], &y[j], ij, pdf.base)?;
        }
        h += v;
    }
    Ok(h)
}

/// Evidence that a scrambled point set is not negatively lower-orthant
/// dependent: at `x = y = b^{-k}`, `H = C_b(k)/b^{2|k|}` exceeds the
/// independent value `b^{-2|k|}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlodWitness {
    pub k: MultiIndex,
    #[serde(with = "crate::quality::rational_string")]
    pub c: BigRational,
    /// `H(b^{-k}, b^{-k})`.
    #[serde(with = "crate::quality::rational_string")]
    pub h: BigRational,
    /// `b^{-2|k|}`.
    #[serde(with = "crate::quality::rational_string")]
    pub product: BigRational,
    /// `(C_b(k) - 1) / b^{2|k|}`.
    #[serde(with = "crate::quality::rational_string")]
    pub excess: BigRational,
    pub excess_f64: f64,
}

/// The largest C value above one, if any, with the first maximizer in
/// graded lexicographic order.
pub fn nlod_witness(profile: &QualityProfile) -> Option<NlodWitness> {
    let one = BigRational::one();
    if profile.c_max <= one {
        return None;
    }
    let k = profile.c_argmax.clone()?;
    let scale = BigRational::from_integer(BigInt::from(profile.base).pow(2 * k.norm()));
    let c = profile.c_max.clone();
    let h = &c / &scale;
    let product = &one / &scale;
    let excess = &h - &product;
    debug_assert!(excess.is_positive());
    Some(NlodWitness { excess_f64: to_f64(&excess), k, c, h, product, excess })
}

/// `Σ_{I ⊆ {1..s}} (-1)^{|I|} f(z^I)` where `z^I` takes `lower_j` on `I`
/// and `upper_j` elsewhere.
pub fn quasi_monotone_delta(f: &dyn Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64]) -> Result<f64> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
    }
    let s = lower.len();
    let mut z = upper.to_vec();
    let mut total = 0.0;
    for mask in 0u64..(1 << s) {
        for j in 0..s {
            z[j] = if (mask >> j) & 1 == 1 { lower[j] } else { upper[j] };
        }
        let v = f(&z);
        total += if mask.count_ones() % 2 == 0 { v } else { -v };
    }
    Ok(total)
}

/// One evaluation of both routes to `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub h_pdf: f64,
    pub h_decomposition: f64,
    pub product: f64,
}

/// Summary of the dependence analysis of one point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub pdf_support: usize,
    #[serde(with = "crate::quality::rational_string")]
    pub normalization_check: BigRational,
    pub h_samples: Vec<HSample>,
    pub witness: Option<NlodWitness>,
    pub identity_max_error: f64,
}

/// Evaluate `H` both ways at the given points and collect the largest
/// disagreement.
pub fn analyze(profile: &QualityProfile, pdf: &JointPdf, points: &[(Vec<f64>, Vec<f64>)]) -> Result<AnalysisReport> {
    let mut samples = Vec::with_capacity(points.len());
    let mut worst: f64 = 0.0;
    for (x, y) in points {
        let a = h_via_pdf(pdf, x, y)?;
        let d = h_via_decomposition(profile, x, y)?;
        worst = worst.max((a - d).abs());
        samples.push(HSample {
            x: x.clone(),
            y: y.clone(),
            h_pdf: a,
            h_decomposition: d,
            product: x.iter().zip(y).map(|(u, v)| u * v).product(),
        });
    }
    Ok(AnalysisReport {
        pdf_support: pdf.support.len(),
        normalization_check: pdf.normalization(),
        h_samples: samples,
        witness: nlod_witness(profile),
        identity_max_error: worst,
    })
}

/// Sanity check that the report's rationals convert for display.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

mod support_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::quality::MultiIndex;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        i: MultiIndex,
        psi: String,
    }

    pub fn serialize<S: Serializer>(v: &[(MultiIndex, BigRational)], s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = v.iter().map(|(i, p)| Entry { i: i.clone(), psi: p.to_string() }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(MultiIndex, BigRational)>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        entries
            .into_iter()
            .map(|e| Ok((e.i, e.psi.parse().map_err(serde::de::Error::custom)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::PointSet;
    use crate::netgen::{faure_matrices, generate_digital_net, sequence_prefix, SequenceKind};
    use crate::quality::{count_pairs, quality_profile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `W_k` = area of the part of `[0,x)×[0,y)` where the first `k` digits
    /// agree, summed interval by interval; `V_i = W_i - W_{i+1}`.
    fn v_oracle(x: f64, y: f64, i: u32, b: u32) -> f64 {
        let w = |k: u32| {
            let width = (b as f64).powi(-(k as i32));
            let cells = (b as u64).pow(k);
            let mut total = 0.0;
            for a in 0..cells {
                let lo = a as f64 * width;
                if lo >= x || lo >= y {
                    break;
                }
                let lx = (x.min(lo + width) - lo).max(0.0);
                let ly = (y.min(lo + width) - lo).max(0.0);
                total += lx * ly;
            }
            total
        };
        w(i) - w(i + 1)
    }

    #[test]
    fn closed_forms_agree_with_interval_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let b = [2u32, 3, 5][rng.random_range(0..3)];
            let x: f64 = rng.random();
            let y = if rng.random_bool(0.5) {
                // Share a few leading digits.
                let g = rng.random_range(1..4);
                let s = (b as f64).powi(g);
                ((x * s).floor() + rng.random::<f64>()) / s
            } else {
                rng.random()
            };
            for i in 0..5 {
                let v = v_scalar(x, y, i, b).unwrap();
                assert!((v - v_oracle(x, y, i, b)).abs() < 1e-12, "b={b} x={x} y={y} i={i}");
            }
        }
    }

    #[test]
    fn v_examples() {
        for b in [2u32, 3, 53] {
            for i in 0..6 {
                let expect = (b as f64 - 1.0) / (b as f64).powi(i as i32 + 1);
                assert!((v_scalar(1.0, 1.0, i, b).unwrap() - expect).abs() < 1e-15);
            }
        }
        assert_eq!(v_scalar(0.5, 0.5, 0, 2).unwrap(), 0.0);
        assert!((v_scalar(0.5, 1.0, 0, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!(v_scalar(1.5, 0.5, 0, 2).is_err());
        assert_eq!(v_vector(&[0.3, 0.0], &[0.4, 0.9], &[1, 0], 3).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_float() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let b = [2u32, 3, 7][rng.random_range(0..3)];
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            let (xq, yq) = (BigRational::from_float(x).unwrap(), BigRational::from_float(y).unwrap());
            for i in 0..4 {
                let e = v_scalar_exact(&xq, &yq, i, b).unwrap().to_f64().unwrap();
                assert!((e - v_scalar(x, y, i, b).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coefficients_examples() {
        let t = t_coefficients(&[1.0], &[1.0], 3, 10).unwrap();
        assert!((t.per_coord[0][0] - 1.0).abs() < 1e-15);
        assert!(t.per_coord[0][1..].iter().all(|v| v.abs() < 1e-15));
        // x = y = b^{-k}: mass b^{-2k} sits at k.
        let t = t_coefficients(&[0.25, 0.5], &[0.25, 0.5], 2, 30).unwrap();
        for k0 in 0..5u32 {
            for k1 in 0..5u32 {
                let expect = if (k0, k1) == (2, 1) { 0.25f64.powi(2) * 0.25 } else { 0.0 };
                assert!((t.get(&[k0, k1]) - expect).abs() < 1e-15, "{k0} {k1}");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let t = t_coefficients(&x, &y, 3, truncation_depth(3, 0)).unwrap();
            let vol: f64 = x.iter().zip(&y).map(|(a, b)| a * b).product();
            assert!((t.total() - vol).abs() < 1e-9);
            assert!(t.min() >= -NEGATIVE_TOLERANCE);
        }
    }

    #[test]
    fn pdf_of_two_points() {
        let ps = PointSet::from_f64(2, 4, &[vec![0.0], vec![0.5]]).unwrap();
        let pdf = joint_pdf(&count_pairs(&ps, 2).unwrap());
        assert_eq!(pdf.support, vec![(MultiIndex(vec![0]), BigRational::from_integer(2.into()))]);
        assert_eq!(pdf.normalization(), BigRational::one());
    }

    #[test]
    fn net_pdf_depends_on_norm_and_identity_holds() {
        let ps = generate_digital_net(&faure_matrices(3, 2, 4).unwrap(), 4).unwrap();
        let counts = count_pairs(&ps, 3).unwrap();
        let pdf = joint_pdf(&counts);
        let prof = quality_profile(&ps, 3).unwrap();
        assert!(pdf.depends_only_on_norm());
        assert_eq!(pdf.normalization(), BigRational::one());
        for v in &prof.values {
            assert_eq!(pdf.c_value(v.k.as_slice()), v.c);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let a = h_via_pdf(&pdf, &x, &y).unwrap();
            let d = h_via_decomposition(&prof, &x, &y).unwrap();
            assert!((a - d).abs() < 1e-12);
            assert!(a <= x[0] * y[0] * x[1] * y[1] + 1e-12);
        }
        assert!((h_via_pdf(&pdf, &[1.0, 1.0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(h_via_pdf(&pdf, &[0.0, 0.3], &[0.5, 0.3]).unwrap(), 0.0);
        assert!((t_survival(&pdf, &[0.0, 0.0], &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(nlod_witness(&prof).is_none());
    }

    #[test]
    fn witness_for_a_bad_set() {
        // Points on the diagonal pile up in the k = (1,1) intervals.
        let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 8.0, i as f64 / 8.0]).collect();
        let ps = PointSet::from_f64(2, 6, &pts).unwrap();
        let prof = quality_profile(&ps, 2).unwrap();
        let pdf = joint_pdf(&count_pairs(&ps, 2).unwrap());
        let w = nlod_witness(&prof).unwrap();
        let x: Vec<BigRational> = w
            .k
            .as_slice()
            .iter()
            .map(|&kj| BigRational::new(BigInt::one(), BigInt::from(2).pow(kj)))
            .collect();
        assert_eq!(h_exact(&pdf, &x, &x).unwrap(), w.h);
        assert!(w.excess.is_positive());
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap()).collect();
        assert!((h_via_pdf(&pdf, &xf, &xf).unwrap() - w.h.to_f64().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn delta_examples() {
        let c = |_: &[f64]| 3.0;
        assert_eq!(quasi_monotone_delta(&c, &[0.1, 0.2], &[0.5, 0.9]).unwrap(), 0.0);
        let id = |z: &[f64]| z[0];
        assert_eq!(quasi_monotone_delta(&id, &[0.0], &[1.0]).unwrap(), 1.0);
        let f = |z: &[f64]| z.iter().map(|u| 1.0 + 0.7 * (u - 0.5)).product::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 0.5).collect();
            let b: Vec<f64> = a.iter().map(|v| v + rng.random::<f64>() * 0.5).collect();
            assert!(quasi_monotone_delta(&f, &a, &b).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sequence_prefix_is_nlod() {
        let ps = sequence_prefix(SequenceKind::Faure, 5, 2, 60, 0, Some(6)).unwrap();
        let prof = quality_profile(&ps, 5).unwrap();
        assert!(prof.cqe);
        assert!(nlod_witness(&prof).is_none());
    }
}
