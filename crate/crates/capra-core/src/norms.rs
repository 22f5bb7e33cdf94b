//! Source norms, restriction and K-star norms, and the coordinate-k /
//! dual coordinate-k norm sequences generated by an lp source norm.
//!
//! For an lp source norm with dual exponent q, the dual coordinate-k
//! norm has the closed form "lq norm of the k largest magnitudes"
//! (top-(k,q) norm). The primal coordinate-k norm is the dual of that;
//! it has no elementary formula for general p, but a sorting/pooling
//! evaluation generalizes the well-known k-support-norm algorithm from
//! p = 2 to every p in (1, inf) and is exact up to roundoff. p = 1,
//! p = inf, k = 1 and k = d all reduce to elementary expressions.

use crate::error::CapraError;
use crate::l0core::{is_supported_in, SupportSet};
use crate::Result;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Descriptor of an lp source norm, `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceNorm {
    p: f64,
}

impl SourceNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(CapraError::InvalidArgument(format!(
                "lp exponent must satisfy p >= 1 (got {p})"
            )));
        }
        Ok(SourceNorm { p })
    }

    pub fn l1() -> Self {
        SourceNorm { p: 1.0 }
    }

    pub fn l2() -> Self {
        SourceNorm { p: 2.0 }
    }

    pub fn linf() -> Self {
        SourceNorm { p: f64::INFINITY }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Dual exponent q with 1/p + 1/q = 1.
    pub fn dual_exponent(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    pub fn dual(&self) -> SourceNorm {
        SourceNorm { p: self.dual_exponent() }
    }

    /// The normed space (R^d, lp) is strictly convex iff p in (1, inf).
    pub fn is_strictly_convex(&self) -> bool {
        self.p > 1.0 && self.p.is_finite()
    }

    /// Parses a CLI exponent: a decimal or the token "inf".
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            return Ok(SourceNorm::linf());
        }
        let p: f64 = s
            .trim()
            .parse()
            .map_err(|_| CapraError::InvalidArgument(format!("cannot parse p from {s:?}")))?;
        SourceNorm::new(p)
    }
}

impl Serialize for SourceNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.p)
        }
    }
}

impl<'de> Deserialize<'de> for SourceNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = crate::extreal::ExtReal::deserialize(d)?;
        match e {
            crate::extreal::ExtReal::Finite(p) => SourceNorm::new(p),
            crate::extreal::ExtReal::PosInf => Ok(SourceNorm::linf()),
            crate::extreal::ExtReal::NegInf => Err(CapraError::InvalidArgument(
                "p = -inf is not a norm exponent".into(),
            )),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// lp norm of a slice, scaled to avoid overflow for large exponents.
fn lp(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        return values.map(f64::abs).sum();
    }
    if p.is_infinite() {
        return values.map(f64::abs).fold(0.0, f64::max);
    }
    let abs: Vec<f64> = values.map(f64::abs).collect();
    let m = abs.iter().fold(0.0f64, |a, &b| a.max(b));
    if m == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s: f64 = abs.iter().map(|v| (v / m) * (v / m)).sum();
        return m * s.sqrt();
    }
    let s: f64 = abs.iter().map(|v| (v / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// `||x||_p`.
pub fn source_norm(x: &[f64], src: SourceNorm) -> f64 {
    lp(x.iter().copied(), src.p)
}

/// `||y||_q` with 1/p + 1/q = 1, so that `<x,y> <= ||x||_p ||y||_q`.
pub fn dual_norm(y: &[f64], src: SourceNorm) -> f64 {
    lp(y.iter().copied(), src.dual_exponent())
}

/// Source norm of a vector supported in `set` (the K-restriction norm).
pub fn restriction_norm(x: &[f64], set: &SupportSet, src: SourceNorm) -> Result<f64> {
    if set.dim() != x.len() {
        return Err(CapraError::DimensionMismatch { expected: set.dim(), got: x.len() });
    }
    if !is_supported_in(x, set, 0.0) {
        return Err(CapraError::NotSupportedInSet);
    }
    Ok(source_norm(x, src))
}

/// Dual of the K-restriction norm, on the subspace of vectors supported
/// in `set` (first restriction, then dual). For lp sources this is the
/// lq norm of the entries on the set.
pub fn k_star_norm(y: &[f64], set: &SupportSet, src: SourceNorm) -> Result<f64> {
    if set.dim() != y.len() {
        return Err(CapraError::DimensionMismatch { expected: set.dim(), got: y.len() });
    }
    if !is_supported_in(y, set, 0.0) {
        return Err(CapraError::NotSupportedInSet);
    }
    Ok(lp(set.indices().iter().map(|&j| y[j]), src.dual_exponent()))
}

/// Magnitudes sorted in nonincreasing order, ties broken by index.
fn sorted_abs_desc(y: &[f64]) -> Vec<f64> {
    let mut abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    abs
}

/// Indices of the k largest magnitudes, ties broken by smaller index.
pub(crate) fn top_k_indices(y: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| {
        y[b].abs()
            .partial_cmp(&y[a].abs())
            .expect("finite entries")
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Dual coordinate-k norm: lq norm of the k largest magnitudes of `y`
/// (top-(k,q) norm), with the convention that k = 0 gives 0.
pub fn dual_coordinate_norm(y: &[f64], k: usize, src: SourceNorm) -> Result<f64> {
    if k > y.len() {
        return Err(CapraError::KOutOfRange { k, max: y.len() });
    }
    Ok(dual_coordinate_sequence(y, src)[k])
}

/// All dual coordinate-k norms at once: entry `k` of the result is the
/// top-(k,q) norm of `y`, for k = 0..=d. Nondecreasing in k, ending at
/// the dual norm.
pub fn dual_coordinate_sequence(y: &[f64], src: SourceNorm) -> Vec<f64> {
    let d = y.len();
    let q = src.dual_exponent();
    let abs = sorted_abs_desc(y);
    let mut out = Vec::with_capacity(d + 1);
    out.push(0.0);
    if q.is_infinite() {
        // top-(k,inf) is the max magnitude for every k >= 1
        for _ in 1..=d {
            out.push(abs[0]);
        }
        return out;
    }
    let m = abs.first().copied().unwrap_or(0.0);
    if m == 0.0 {
        out.resize(d + 1, 0.0);
        return out;
    }
    let mut acc = 0.0;
    for &a in &abs {
        let t = a / m;
        acc += if q == 1.0 {
            t
        } else if q == 2.0 {
            t * t
        } else {
            t.powf(q)
        };
        out.push(if q == 1.0 { m * acc } else { m * acc.powf(1.0 / q) });
    }
    out
}

/// Coordinate-k norm of `x`: the norm whose dual is the top-(k,q) norm.
/// Exact sorting/pooling evaluation for every p; see module docs.
pub fn coordinate_norm(x: &[f64], k: usize, src: SourceNorm) -> Result<f64> {
    let d = x.len();
    if k == 0 || k > d {
        return Err(CapraError::KOutOfRange { k, max: d });
    }
    if k == d {
        return Ok(source_norm(x, src));
    }
    // k = 1: the unit ball is the convex hull of the signed coordinate
    // vectors, whose gauge is l1 for every source exponent.
    if k == 1 || src.p == 1.0 {
        return Ok(lp(x.iter().copied(), 1.0));
    }
    if src.p.is_infinite() {
        let linf = lp(x.iter().copied(), f64::INFINITY);
        let l1 = lp(x.iter().copied(), 1.0);
        return Ok(linf.max(l1 / k as f64));
    }
    Ok(pooled_support_norm(x, k, src.p))
}

/// Sorting/pooling evaluation of the (p,k)-support norm, p in (1, inf).
///
/// With magnitudes a_1 >= ... >= a_d and tail sums
/// C_m = a_{k-m+1} + ... + a_d, the smallest m in 1..=k with
/// a_{k-m} >= C_m / m (sentinel a_0 = +inf) pools the last m slots and
/// the norm is ( sum_{i<=k-m} a_i^p + C_m^p / m^(p-1) )^(1/p).
/// For p = 2 this is the classical k-support norm evaluation.
fn pooled_support_norm(x: &[f64], k: usize, p: f64) -> f64 {
    let abs = sorted_abs_desc(x);
    let m0 = abs[0];
    if m0 == 0.0 {
        return 0.0;
    }
    let a: Vec<f64> = abs.iter().map(|v| v / m0).collect();
    let mut tail: f64 = a[k - 1..].iter().sum();
    let mut m = 1usize;
    while m < k && a[k - m - 1] < tail / m as f64 {
        m += 1;
        tail += a[k - m];
    }
    let head: f64 = a[..k - m].iter().map(|v| v.powf(p)).sum();
    let pooled = tail.powf(p) / (m as f64).powf(p - 1.0);
    m0 * (head + pooled).powf(1.0 / p)
}

/// The l-sparse point of the source unit sphere attaining
/// `<y, s> = |||y|||_(l,*)` (the aligned atom of grade `l` at `y`).
pub(crate) fn aligned_atom(y: &[f64], l: usize, src: SourceNorm) -> Vec<f64> {
    let d = y.len();
    debug_assert!(l >= 1 && l <= d);
    let mut s = vec![0.0; d];
    let top = top_k_indices(y, l);
    let p = src.p();
    if p == 1.0 {
        // on the l1 sphere the support function picks one coordinate
        let j = top[0];
        s[j] = if y[j] < 0.0 { -1.0 } else { 1.0 };
        return s;
    }
    if p.is_infinite() {
        for &j in &top {
            s[j] = if y[j] < 0.0 { -1.0 } else { 1.0 };
        }
        return s;
    }
    let q = src.dual_exponent();
    let topval = dual_coordinate_sequence(y, src)[l];
    if topval == 0.0 {
        s[top[0]] = 1.0;
        return s;
    }
    for &j in &top {
        s[j] = y[j].signum() * (y[j].abs() / topval).powf(q - 1.0);
    }
    // renormalize to kill roundoff drift off the unit sphere
    let ns = source_norm(&s, src);
    if ns > 0.0 {
        s.iter_mut().for_each(|v| *v /= ns);
    }
    s
}

/// Subgradient of the top-(k,q) norm at `y` (any element; ties pick
/// lower indices for determinism). Satisfies `<g, y> = top_(k,q)(y)`.
pub(crate) fn top_k_supergradient(y: &[f64], k: usize, src: SourceNorm) -> Vec<f64> {
    let d = y.len();
    let mut g = vec![0.0; d];
    if k == 0 {
        return g;
    }
    let q = src.dual_exponent();
    let top = top_k_indices(y, k);
    if q.is_infinite() {
        let j = top[0];
        g[j] = y[j].signum();
        return g;
    }
    if q == 1.0 {
        for &j in &top {
            g[j] = y[j].signum();
        }
        return g;
    }
    let topval = dual_coordinate_sequence(y, src)[k];
    if topval == 0.0 {
        return g;
    }
    for &j in &top {
        g[j] = y[j].signum() * (y[j].abs() / topval).powf(q - 1.0);
    }
    g
}

/// A dual-norm-unit vector y with `<y, x> = |||x|||` (a subgradient of
/// the source norm at x; the lp duality map up to normalization).
pub(crate) fn duality_map(x: &[f64], src: SourceNorm) -> Vec<f64> {
    let d = x.len();
    let p = src.p();
    let n = source_norm(x, src);
    let mut y = vec![0.0; d];
    if n == 0.0 {
        return y;
    }
    if p == 1.0 {
        for j in 0..d {
            if x[j] != 0.0 {
                y[j] = x[j].signum();
            }
        }
        return y;
    }
    if p.is_infinite() {
        // distribute l1 mass over the max-magnitude coordinates
        let maxed: Vec<usize> =
            (0..d).filter(|&j| x[j].abs() >= n * (1.0 - 1e-12)).collect();
        for &j in &maxed {
            y[j] = x[j].signum() / maxed.len() as f64;
        }
        return y;
    }
    for j in 0..d {
        if x[j] != 0.0 {
            y[j] = x[j].signum() * (x[j].abs() / n).powf(p - 1.0);
        }
    }
    y
}

/// Primal and dual coordinate-k norm sequences of one vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSequence {
    /// Entry k-1 is the coordinate-k norm of the vector; nonincreasing,
    /// ending at the source norm.
    pub values: Vec<f64>,
    /// Entry k-1 is the dual coordinate-k norm; nondecreasing, ending at
    /// the dual norm.
    pub dual_values: Vec<f64>,
}

pub fn norm_sequence(x: &[f64], src: SourceNorm) -> Result<NormSequence> {
    let d = x.len();
    let mut values = Vec::with_capacity(d);
    for k in 1..=d {
        values.push(coordinate_norm(x, k, src)?);
    }
    let dual_values = dual_coordinate_sequence(x, src)[1..].to_vec();
    Ok(NormSequence { values, dual_values })
}

/// Smallest k whose coordinate-k norm already equals the source norm
/// (relative tolerance `tol`). Equals l0(x) when the source space is
/// strictly convex (p in (1, inf)); a lower bound on l0(x) for every p.
pub fn sparsity_from_grading(x: &[f64], src: SourceNorm, tol: f64) -> Result<usize> {
    let s = source_norm(x, src);
    if s == 0.0 {
        return Err(CapraError::ZeroVector);
    }
    for k in 1..=x.len() {
        if (coordinate_norm(x, k, src)? - s).abs() <= tol * s {
            return Ok(k);
        }
    }
    // k = d always matches exactly; unreachable for tol >= 0
    Ok(x.len())
}
