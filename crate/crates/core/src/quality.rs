//! Pair counts over elementary intervals and the exact C_b(k) values built
//! from them.
//!
//! For a multi-index `k`, `M_b(k)` is the number of ordered pairs of
//! distinct points that share the first `k_j` digits of every coordinate
//! `j`, and `C_b(k) = b^{|k|} M_b(k) / (n(n-1))`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{gamma_digits, Gamma, PointSet};
use crate::error::{Error, Result};
use crate::netgen::checked_pow;

/// `k = (k_1, .., k_s)` with `|k| = Σ k_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(s: usize) -> Self {
        MultiIndex(vec![0; s])
    }

    pub fn norm(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Graded lexicographic order: by `|k|`, then lexicographically.
    pub fn graded_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.norm().cmp(&other.norm()).then_with(|| self.0.cmp(&other.0))
    }

    /// `k <= i` componentwise.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Calls `f` on every `k` with `0 <= k_j <= bound_j`.
pub fn for_each_in_box(bound: &[u32], mut f: impl FnMut(&[u32])) {
    let s = bound.len();
    let mut k = vec![0u32; s];
    loop {
        f(&k);
        let mut j = s;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if k[j] < bound[j] {
                k[j] += 1;
                break;
            }
            k[j] = 0;
        }
    }
}

/// Dense prefix labels: `ids[j][k][i]` numbers the distinct length-`k`
/// prefixes of coordinate `j` in increasing order.
struct PrefixIds {
    horizon: Vec<u32>,
    ids: Vec<Vec<Vec<u32>>>,
    classes: Vec<Vec<u64>>,
}

fn prefix_ids(ps: &PointSet) -> Result<PrefixIds> {
    let n = ps.len();
    let s = ps.dim();
    let per: Vec<(u32, Vec<Vec<u32>>, Vec<u64>)> = (0..s)
        .into_par_iter()
        .map(|j| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_unstable_by(|&a, &b| ps.coord_digits(a, j).cmp(ps.coord_digits(b, j)));
            // gaps[t] = γ between sorted neighbours t-1 and t.
            let mut gaps = vec![0u32; n];
            for t in 1..n {
                match gamma_digits(ps.coord_digits(order[t - 1], j), ps.coord_digits(order[t], j)) {
                    Gamma::Finite(g) => gaps[t] = g,
                    Gamma::Infinite => {
                        return Err(Error::CoincidentCoordinates {
                            coord: j,
                            first: order[t - 1].min(order[t]),
                            second: order[t - 1].max(order[t]),
                            precision: ps.precision(),
                        })
                    }
                }
            }
            let horizon = if n <= 1 { 0 } else { gaps[1..].iter().max().unwrap() + 1 };
            let mut ids = Vec::with_capacity(horizon as usize + 1);
            let mut classes = Vec::with_capacity(horizon as usize + 1);
            for k in 0..=horizon {
                let mut v = vec![0u32; n];
                let mut id = 0u32;
                for t in 0..n {
                    if t > 0 && gaps[t] < k {
                        id += 1;
                    }
                    v[order[t]] = id;
                }
                ids.push(v);
                classes.push(if n == 0 { 0 } else { id as u64 + 1 });
            }
            Ok((horizon, ids, classes))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = PrefixIds { horizon: Vec::new(), ids: Vec::new(), classes: Vec::new() };
    for (h, ids, c) in per {
        out.horizon.push(h);
        out.ids.push(ids);
        out.classes.push(c);
    }
    Ok(out)
}

/// `M_b(k)` for every `k` in the box `∏ {0..K_j}`, where `K_j` is the
/// smallest depth at which all coordinate-`j` prefixes are distinct.
/// Outside the box `M_b` vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounts {
    base: u32,
    n: usize,
    horizon: Vec<u32>,
    strides: Vec<usize>,
    m: Vec<u64>,
}

impl PairCounts {
    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.horizon.len()
    }

    pub fn horizon(&self) -> &[u32] {
        &self.horizon
    }

    pub fn ordered_pairs(&self) -> u64 {
        (self.n as u64) * (self.n as u64).saturating_sub(1)
    }

    fn offset(&self, k: &[u32]) -> Option<usize> {
        if k.len() != self.horizon.len() {
            return None;
        }
        let mut off = 0;
        for ((&kj, &h), &st) in k.iter().zip(&self.horizon).zip(&self.strides) {
            if kj > h {
                return None;
            }
            off += kj as usize * st;
        }
        Some(off)
    }

    /// `M_b(k)`; zero beyond the horizon.
    pub fn m(&self, k: &[u32]) -> u64 {
        self.offset(k).map_or(0, |o| self.m[o])
    }

    /// `N_b(i) = Σ_{e ∈ {0,1}^s} (-1)^{|e|} M_b(i + e)`: the number of
    /// ordered pairs whose γ vector is exactly `i`.
    pub fn n_exact(&self, i: &[u32]) -> u64 {
        let v = inclusion_exclusion(i, |k| self.m(k) as i128);
        debug_assert!(v >= 0);
        v as u64
    }

    /// Every multi-index in the counted box, in storage order.
    pub fn grid(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(self.m.len());
        for_each_in_box(&self.horizon, |k| out.push(MultiIndex(k.to_vec())));
        out
    }

    /// Nonzero `N_b(i)` values, in graded lexicographic order of `i`.
    pub fn n_support(&self) -> Vec<(MultiIndex, u64)> {
        let mut out: Vec<(MultiIndex, u64)> = self
            .grid()
            .into_iter()
            .map(|i| {
                let v = self.n_exact(&i.0);
                (i, v)
            })
            .filter(|(_, v)| *v > 0)
            .collect();
        out.sort_by(|a, b| a.0.graded_cmp(&b.0));
        out
    }

    /// Exact `C_b(k) = b^{|k|} M_b(k) / (n(n-1))`.
    pub fn c_value(&self, k: &[u32]) -> BigRational {
        let pairs = self.ordered_pairs();
        let m = self.m(k);
        if m == 0 || pairs == 0 {
            return BigRational::zero();
        }
        let norm: u32 = k.iter().sum();
        let num = BigInt::from(self.base).pow(norm) * BigInt::from(m);
        BigRational::new(num, BigInt::from(pairs))
    }
}

/// `Σ_{e ∈ {0,1}^s} (-1)^{|e|} g(i + e)`.
pub fn inclusion_exclusion(i: &[u32], mut g: impl FnMut(&[u32]) -> i128) -> i128 {
    let s = i.len();
    let mut k = i.to_vec();
    let mut total = 0i128;
    for mask in 0u32..(1 << s) {
        for (j, kj) in k.iter_mut().enumerate() {
            *kj = i[j] + ((mask >> j) & 1);
        }
        let v = g(&k);
        if mask.count_ones() % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// Pair counts over the full horizon. The point set must already be
/// expressed in the counting base `b` and have pairwise distinct values in
/// each coordinate.
pub fn count_pairs(ps: &PointSet, b: u32) -> Result<PairCounts> {
    if ps.base() != b {
        return Err(Error::BaseMismatch { left: ps.base(), right: b });
    }
    let n = ps.len();
    if n < 2 {
        return Err(Error::InvalidArgument("pair counts need at least two points".into()));
    }
    let pre = prefix_ids(ps)?;
    let s = ps.dim();
    let mut strides = vec![1usize; s];
    for j in (0..s.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * (pre.horizon[j + 1] as usize + 1);
    }
    let size = strides[0] * (pre.horizon[0] as usize + 1);
    let mut grid = Vec::with_capacity(size);
    for_each_in_box(&pre.horizon, |k| grid.push(k.to_vec()));
    let m: Vec<u64> = grid
        .par_iter()
        .map_init(Vec::new, |keys: &mut Vec<u128>, k| {
            if k.iter().zip(&pre.horizon).any(|(a, h)| a == h) {
                return 0;
            }
            keys.clear();
            keys.resize(n, 0);
            let mut mult = 1u128;
            for (j, &kj) in k.iter().enumerate() {
                let ids = &pre.ids[j][kj as usize];
                for (key, &id) in keys.iter_mut().zip(ids) {
                    *key += id as u128 * mult;
                }
                mult *= pre.classes[j][kj as usize] as u128;
            }
            keys.sort_unstable();
            let mut total = 0u64;
            let mut run = 1u64;
            for t in 1..=n {
                if t < n && keys[t] == keys[t - 1] {
                    run += 1;
                } else {
                    total += run * (run - 1);
                    run = 1;
                }
            }
            total
        })
        .collect();
    Ok(PairCounts { base: b, n, horizon: pre.horizon, strides, m })
}

/// `M_b(k)` for a single `k`, counted straight from the leading digits.
///
/// Needs no horizon pass, so it suits large nets where only a few `k` are of
/// interest. Cells are tallied in a dense array when there are at most
/// `max(4n, 2^20)` of them and by sorting otherwise.
pub fn pair_count(ps: &PointSet, k: &[u32]) -> Result<u64> {
    let s = ps.dim();
    if k.len() != s {
        return Err(Error::DimensionMismatch { expected: s, found: k.len() });
    }
    let p = ps.precision();
    if let Some(&kj) = k.iter().find(|&&kj| kj as usize > p) {
        return Err(Error::PrecisionOverflow(format!("depth {kj} exceeds the {p} stored digits")));
    }
    let n = ps.len();
    let b = ps.base() as u128;
    let cells = k.iter().try_fold(1u128, |acc, &kj| acc.checked_mul(b.checked_pow(kj)?));
    let cell = |i: usize| -> u128 {
        let mut key = 0u128;
        for (j, &kj) in k.iter().enumerate() {
            for &d in &ps.coord_digits(i, j)[..kj as usize] {
                key = key * b + d as u128;
            }
        }
        key
    };
    let pairs = |c: u64| c * c.saturating_sub(1);
    match cells {
        Some(c) if c <= (4 * n as u128).max(1 << 20) => {
            let mut counts = vec![0u32; c as usize];
            for i in 0..n {
                counts[cell(i) as usize] += 1;
            }
            Ok(counts.iter().map(|&c| pairs(c as u64)).sum())
        }
        Some(_) => {
            let mut keys: Vec<u128> = (0..n).into_par_iter().map(cell).collect();
            keys.par_sort_unstable();
            Ok(keys.chunk_by(|a, b| a == b).map(|run| pairs(run.len() as u64)).sum())
        }
        None => Err(Error::PrecisionOverflow("cell index does not fit in 128 bits".into())),
    }
}

/// `C_b(k)` from [`pair_count`].
pub fn c_value_direct(ps: &PointSet, k: &[u32]) -> Result<BigRational> {
    let n = ps.len() as u64;
    if n < 2 {
        return Err(Error::InvalidArgument("pair counts need at least two points".into()));
    }
    let m = pair_count(ps, k)?;
    let norm: u32 = k.iter().sum();
    Ok(BigRational::new(BigInt::from(ps.base()).pow(norm) * BigInt::from(m), BigInt::from(n * (n - 1))))
}

/// `m_b(k; P_n, U_l)`: how many other points share the `k`-interval of
/// point `l`.
pub fn point_count(ps: &PointSet, l: usize, k: &[u32]) -> usize {
    (0..ps.len())
        .filter(|&i| {
            i != l
                && k.iter().enumerate().all(|(j, &kj)| {
                    ps.coord_digits(i, j)[..kj as usize] == ps.coord_digits(l, j)[..kj as usize]
                })
        })
        .count()
}

/// `n_b(k; P_n, U_l)`: how many other points have γ vector exactly `k`
/// with point `l`, via inclusion-exclusion on [`point_count`].
pub fn point_exact_count(ps: &PointSet, l: usize, k: &[u32]) -> i128 {
    let p = ps.precision() as u32;
    inclusion_exclusion(k, |kk| {
        if kk.iter().any(|&v| v > p) {
            0
        } else {
            point_count(ps, l, kk) as i128
        }
    })
}

/// Half-even rounding of `r` to `places` decimals.
pub fn render_decimal(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = r * BigRational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = &scaled - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = if frac > half || (frac == half && floor.is_odd()) {
        floor + BigInt::one()
    } else {
        floor
    };
    let neg = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int, dec) = padded.split_at(padded.len() - places);
        format!("{int}.{dec}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One `k` of a profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CValue {
    pub k: MultiIndex,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "C_exact", with = "rational_string")]
    pub c: BigRational,
    #[serde(rename = "C_decimal")]
    pub decimal: String,
}

/// Largest C over one level `|k| = level`, with its first maximizer in
/// graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMax {
    #[serde(with = "rational_string")]
    pub value: BigRational,
    pub decimal: String,
    pub argmax: MultiIndex,
}

/// Exact C values over the whole counted box, plus summaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityProfile {
    pub base: u32,
    pub n: usize,
    pub s: usize,
    pub horizon: Vec<u32>,
    pub values: Vec<CValue>,
    /// β_{b,ℓ} for every level ℓ >= 1 up to `Σ K_j`.
    pub beta: BTreeMap<u32, LevelMax>,
    /// Max of β over levels >= 1 (zero when there are none).
    #[serde(rename = "C_max", with = "rational_string")]
    pub c_max: BigRational,
    #[serde(rename = "C_max_decimal")]
    pub c_max_decimal: String,
    #[serde(rename = "C_argmax")]
    pub c_argmax: Option<MultiIndex>,
    pub cqe: bool,
    pub t: Option<u32>,
}

impl QualityProfile {
    pub fn from_counts(counts: &PairCounts) -> QualityProfile {
        let mut grid = counts.grid();
        grid.sort_by(|a, b| a.graded_cmp(b));
        let values: Vec<CValue> = grid
            .into_iter()
            .map(|k| {
                let c = counts.c_value(&k.0);
                CValue { m: counts.m(&k.0), decimal: render_decimal(&c, 2), c, k }
            })
            .collect();
        let mut beta: BTreeMap<u32, LevelMax> = BTreeMap::new();
        let top: u32 = counts.horizon.iter().sum();
        for v in &values {
            let level = v.k.norm();
            if level == 0 {
                continue;
            }
            match beta.get(&level) {
                Some(cur) if cur.value >= v.c => {}
                _ => {
                    beta.insert(
                        level,
                        LevelMax { value: v.c.clone(), decimal: v.decimal.clone(), argmax: v.k.clone() },
                    );
                }
            }
        }
        debug_assert!(beta.len() as u32 == top);
        let mut c_max = BigRational::zero();
        let mut c_argmax = None;
        for lm in beta.values() {
            if c_argmax.is_none() || lm.value > c_max {
                c_max = lm.value.clone();
                c_argmax = Some(lm.argmax.clone());
            }
        }
        let one = BigRational::one();
        let cqe = values.iter().all(|v| v.c <= one);
        let mut p = QualityProfile {
            base: counts.base,
            n: counts.n,
            s: counts.dim(),
            horizon: counts.horizon.clone(),
            c_max_decimal: render_decimal(&c_max, 2),
            values,
            beta,
            c_max,
            c_argmax,
            cqe,
            t: None,
        };
        p.t = p.net_exponent().and_then(|m| t_parameter(&p, m).ok());
        p
    }

    pub fn c_value(&self, k: &[u32]) -> BigRational {
        self.values
            .binary_search_by(|v| {
                v.k.norm()
                    .cmp(&k.iter().sum())
                    .then_with(|| v.k.0.as_slice().cmp(k))
            })
            .map(|i| self.values[i].c.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// β_{b,ℓ}, zero for levels beyond the horizon.
    pub fn beta(&self, level: u32) -> BigRational {
        self.beta.get(&level).map_or_else(BigRational::zero, |l| l.value.clone())
    }

    /// `m` with `n = b^m`, if any.
    pub fn net_exponent(&self) -> Option<u32> {
        let mut m = 0u32;
        loop {
            match checked_pow(self.base, m) {
                Some(v) if v == self.n as u128 => return Some(m),
                Some(v) if v < self.n as u128 => m += 1,
                _ => return None,
            }
        }
    }

    /// Nonzero C values only, in graded lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = &CValue> {
        self.values.iter().filter(|v| !v.c.is_zero())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Count pairs and summarize in one step.
pub fn quality_profile(ps: &PointSet, b: u32) -> Result<QualityProfile> {
    Ok(QualityProfile::from_counts(&count_pairs(ps, b)?))
}

pub fn beta_summary(profile: &QualityProfile) -> (&BTreeMap<u32, LevelMax>, &BigRational) {
    (&profile.beta, &profile.c_max)
}

pub fn is_cqe(profile: &QualityProfile) -> bool {
    profile.cqe
}

/// Whether every elementary `k`-interval holds exactly `b^{m-|k|}` points.
pub fn is_equidistributed(ps: &PointSet, k: &[u32]) -> Result<bool> {
    let b = ps.base();
    let n = ps.len() as u128;
    let mut m = 0u32;
    while checked_pow(b, m).is_some_and(|v| v < n) {
        m += 1;
    }
    if checked_pow(b, m) != Some(n) {
        return Err(Error::Precondition(format!("n = {n} is not a power of {b}")));
    }
    if k.len() != ps.dim() {
        return Err(Error::DimensionMismatch { expected: ps.dim(), found: k.len() });
    }
    let norm: u32 = k.iter().sum();
    if norm > m {
        return Err(Error::Precondition(format!("|k| = {norm} exceeds m = {m}")));
    }
    if k.iter().any(|&kj| kj as usize > ps.precision()) {
        return Ok(false);
    }
    let mut buckets: HashMap<Vec<u16>, u128> = HashMap::new();
    for i in 0..ps.len() {
        let key: Vec<u16> = k
            .iter()
            .enumerate()
            .flat_map(|(j, &kj)| ps.coord_digits(i, j)[..kj as usize].iter().copied())
            .collect();
        *buckets.entry(key).or_default() += 1;
    }
    let expect = checked_pow(b, m - norm).unwrap();
    Ok(buckets.len() as u128 == checked_pow(b, norm).unwrap() && buckets.values().all(|&c| c == expect))
}

/// `t = m - max{ℓ <= m : C_b(k) <= 1 for every |k| = ℓ' <= ℓ}`.
///
/// Needs `n = b^m` and every one-dimensional projection to be a
/// `(0,m,1)`-net, i.e. `K_j <= m` for all `j`; otherwise refuses. For
/// digital nets the cumulative condition is the same as asking it of level
/// `ℓ` alone, since equidistribution at one level implies it below.
pub fn t_parameter(profile: &QualityProfile, m: u32) -> Result<u32> {
    let n = checked_pow(profile.base, m);
    if n != Some(profile.n as u128) {
        return Err(Error::Precondition(format!(
            "n = {} is not {}^{m}",
            profile.n, profile.base
        )));
    }
    if let Some((j, &h)) = profile.horizon.iter().enumerate().find(|(_, &h)| h > m) {
        return Err(Error::Precondition(format!(
            "coordinate {} is not a (0,{m},1)-net: its points stay paired up to depth {}",
            j + 1,
            h - 1
        )));
    }
    let one = BigRational::one();
    let mut best = 0;
    for level in 1..=m {
        if profile.beta(level) > one {
            break;
        }
        best = level;
    }
    Ok(m - best)
}

/// `b^{|k|} (b^{m-r} - 1) / (b^m - 1)`: the C value of a digital net with
/// `(0,m,1)` projections in terms of the rank `r = r(k)`.
pub fn c_value_from_rank(b: u32, m: u32, k_norm: u32, r: u32) -> BigRational {
    let bb = BigInt::from(b);
    let num = bb.pow(k_norm) * (bb.pow(m - r) - BigInt::one());
    BigRational::new(num, bb.pow(m) - BigInt::one())
}

/// `b^{|k|} j (n - b^{|k|} + r) / (n(n-1))` with `n = j b^{|k|} + r`: the C
/// value of the first `n` points of a `(0,s)`-sequence when `b^{|k|} <= n`.
pub fn c_value_for_sequence_prefix(b: u32, n: u64, k_norm: u32) -> BigRational {
    let bk = BigInt::from(b).pow(k_norm);
    let nn = BigInt::from(n);
    let (j, r) = nn.div_rem(&bk);
    let num = &bk * &j * (&nn - &bk + r);
    BigRational::new(num, &nn * (&nn - BigInt::one()))
}

pub(crate) mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::Provenance;
    use crate::netgen::{faure_matrices, generate_digital_net, sequence_prefix, SequenceKind};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_point_example() {
        let ps = PointSet::from_f64(2, 4, &[vec![0.0], vec![0.5]]).unwrap();
        let c = count_pairs(&ps, 2).unwrap();
        assert_eq!(c.m(&[0]), 2);
        assert_eq!(c.m(&[1]), 0);
        assert_eq!(c.n_exact(&[0]), 2);
        assert_eq!(c.horizon(), &[1]);
        assert_eq!(c.c_value(&[0]), BigRational::one());
    }

    #[test]
    fn net_counts_match_closed_forms() {
        // (0,m,s)-net: M = b^m (b^{m-|k|} - 1) for |k| <= m.
        for (b, s, m) in [(2u32, 2usize, 4u32), (3, 3, 3), (5, 2, 2)] {
            let ps = generate_digital_net(&faure_matrices(b, s, m as usize).unwrap(), m).unwrap();
            let c = count_pairs(&ps, b).unwrap();
            let n = (b as u64).pow(m);
            for k in c.grid() {
                let l = k.norm();
                if l <= m {
                    assert_eq!(c.m(&k.0), n * ((b as u64).pow(m - l) - 1), "{k}");
                }
                // n_b(i) = Σ_k (-1)^k binom(s,k) max(b^{m-|i|-k}, 1) per point.
                let li = l as i64;
                let mut expect = 0i64;
                let mut binom = 1i64;
                for kk in 0..=s as i64 {
                    let e = m as i64 - li - kk;
                    let v = if e >= 0 { (b as i64).pow(e as u32) } else { 1 };
                    expect += if kk % 2 == 0 { binom * v } else { -binom * v };
                    binom = binom * (s as i64 - kk) / (kk + 1);
                }
                assert_eq!(c.n_exact(&k.0) as i64, n as i64 * expect, "{k}");
            }
        }
    }

    #[test]
    fn direct_count_agrees_with_horizon_pass() {
        let ps = sequence_prefix(SequenceKind::Faure, 3, 2, 50, 0, Some(8)).unwrap();
        let c = count_pairs(&ps, 3).unwrap();
        for k in c.grid() {
            assert_eq!(pair_count(&ps, &k.0).unwrap(), c.m(&k.0), "{k}");
            assert_eq!(c_value_direct(&ps, &k.0).unwrap(), c.c_value(&k.0));
        }
        // Past the horizon every cell holds at most one point.
        assert_eq!(pair_count(&ps, &[8, 8]).unwrap(), 0);
        assert!(pair_count(&ps, &[9, 0]).is_err());
    }

    #[test]
    fn per_point_inclusion_exclusion() {
        let ps = sequence_prefix(SequenceKind::Faure, 3, 2, 20, 0, Some(6)).unwrap();
        let c = count_pairs(&ps, 3).unwrap();
        for i in c.grid() {
            let total: i128 = (0..ps.len()).map(|l| point_exact_count(&ps, l, &i.0)).sum();
            assert_eq!(total as u64, c.n_exact(&i.0));
        }
        // s = 1 reduces to a difference.
        let p1 = sequence_prefix(SequenceKind::Faure, 3, 1, 10, 0, Some(6)).unwrap();
        for l in 0..10 {
            assert_eq!(
                point_exact_count(&p1, l, &[1]),
                point_count(&p1, l, &[1]) as i128 - point_count(&p1, l, &[2]) as i128
            );
        }
    }

    #[test]
    fn decimal_rounding_is_half_even() {
        assert_eq!(render_decimal(&q(1, 8), 2), "0.12");
        assert_eq!(render_decimal(&q(3, 8), 2), "0.38");
        assert_eq!(render_decimal(&q(5, 1), 2), "5.00");
        assert_eq!(render_decimal(&q(-1, 3), 3), "-0.333");
        assert_eq!(render_decimal(&q(1, 200), 2), "0.00");
        assert_eq!(render_decimal(&q(3, 200), 2), "0.02");
        assert_eq!(render_decimal(&q(7, 2), 0), "4");
    }

    #[test]
    fn sequence_prefix_profile() {
        let ps = sequence_prefix(SequenceKind::Faure, 53, 2, 1024, 0, None).unwrap();
        let p = quality_profile(&ps, 53).unwrap();
        assert_eq!(p.beta(1), q(53 * 19 * 988, 1024 * 1023));
        assert!(p.beta.range(2..).all(|(_, l)| l.value.is_zero()));
        assert!(p.cqe);
        assert_eq!(p.c_max_decimal, "0.95");
        assert_eq!(c_value_for_sequence_prefix(53, 1024, 1), p.beta(1));
    }

    #[test]
    fn coincident_coordinates_rejected() {
        let ps = PointSet::from_f64(2, 4, &[vec![0.25, 0.0], vec![0.25, 0.5]]).unwrap();
        assert!(matches!(count_pairs(&ps, 2), Err(Error::CoincidentCoordinates { coord: 0, .. })));
    }

    #[test]
    fn t_parameter_refuses_without_preconditions() {
        let ps = PointSet::from_f64(2, 4, &[vec![0.0], vec![0.5], vec![0.25]]).unwrap();
        let p = quality_profile(&ps, 2).unwrap();
        assert!(t_parameter(&p, 2).is_err());
        let ps = PointSet::from_flat(2, 3, 1, vec![0, 0, 0, 0, 0, 1], Provenance::Unspecified).unwrap();
        let p = quality_profile(&ps, 2).unwrap();
        assert!(matches!(t_parameter(&p, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn json_round_trip() {
        let ps = sequence_prefix(SequenceKind::Faure, 3, 2, 9, 0, Some(4)).unwrap();
        let p = quality_profile(&ps, 3).unwrap();
        let back: QualityProfile = serde_json::from_str(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.t, Some(0));
    }
}
