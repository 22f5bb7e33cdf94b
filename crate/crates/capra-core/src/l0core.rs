//! The l0 pseudonorm, supports, coordinate projections and level sets.
//!
//! Vectors are plain `&[f64]` slices with finite entries. Index sets are
//! 0-based in the Rust API; JSON and the CLI use the 1-based convention.

use crate::error::CapraError;
use crate::Result;
use serde::{Deserialize, Serialize};

/// A sorted set of coordinate indices within `0..dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
    dim: usize,
}

impl SupportSet {
    /// Builds a support set from 0-based indices; sorts and deduplicates.
    pub fn new(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(CapraError::InvalidArgument(format!(
                    "index {} out of range for dimension {dim} (0-based)",
                    last
                )));
            }
        }
        Ok(SupportSet { indices, dim })
    }

    /// Builds a support set from the 1-based indices used in JSON.
    pub fn from_one_based(indices: &[usize], dim: usize) -> Result<Self> {
        let zero_based = indices
            .iter()
            .map(|&i| {
                i.checked_sub(1).ok_or_else(|| {
                    CapraError::InvalidArgument("support indices are 1-based".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SupportSet::new(zero_based, dim)
    }

    pub fn empty(dim: usize) -> Self {
        SupportSet { indices: Vec::new(), dim }
    }

    pub fn full(dim: usize) -> Self {
        SupportSet { indices: (0..dim).collect(), dim }
    }

    /// 0-based indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i + 1).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

impl Serialize for SupportSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let one_based = Vec::<usize>::deserialize(d)?;
        let dim = one_based.iter().copied().max().unwrap_or(0);
        SupportSet::from_one_based(&one_based, dim).map_err(serde::de::Error::custom)
    }
}

/// Number of entries with `|x_j| > tol`.
pub fn l0(x: &[f64], tol: f64) -> usize {
    debug_assert!(tol >= 0.0);
    x.iter().filter(|v| v.abs() > tol).count()
}

/// Indices of the entries with `|x_j| > tol`.
pub fn support(x: &[f64], tol: f64) -> SupportSet {
    let indices = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(j, _)| j)
        .collect();
    SupportSet { indices, dim: x.len() }
}

/// Orthogonal projection onto the subspace of vectors supported in `set`.
pub fn project(x: &[f64], set: &SupportSet) -> Result<Vec<f64>> {
    if set.dim() != x.len() {
        return Err(CapraError::DimensionMismatch { expected: set.dim(), got: x.len() });
    }
    let mut out = vec![0.0; x.len()];
    for &j in set.indices() {
        out[j] = x[j];
    }
    Ok(out)
}

/// Whether `x` is supported in `set` up to `tol` (all off-set entries small).
pub fn is_supported_in(x: &[f64], set: &SupportSet, tol: f64) -> bool {
    set.dim() == x.len()
        && x.iter()
            .enumerate()
            .all(|(j, v)| set.contains(j) || v.abs() <= tol)
}

/// Membership of `x` in the level set `{ l0 <= k }`.
pub fn level_set_contains(x: &[f64], k: usize, tol: f64) -> Result<bool> {
    if k > x.len() {
        return Err(CapraError::KOutOfRange { k, max: x.len() });
    }
    Ok(l0(x, tol) <= k)
}
