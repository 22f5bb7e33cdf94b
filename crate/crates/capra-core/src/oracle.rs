//! Independent brute-force reference implementations.
//!
//! These run in the shipped library, not only in tests, so `capra check`
//! can re-certify the closed forms in the field. They deliberately avoid
//! the code paths they are meant to validate: subset enumeration instead
//! of top-k selection, grid suprema instead of conjugate formulas,
//! sampled convex hulls instead of gauge evaluations.

use crate::error::CapraError;
use crate::norms::{self, SourceNorm};
use crate::solver;
use crate::Result;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A uniform grid on `[lo, hi]^dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub dim: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64, dim: usize) -> Result<Self> {
        if !(lo < hi) || !(step > 0.0) {
            return Err(CapraError::InvalidArgument(
                "grid needs lo < hi and step > 0".into(),
            ));
        }
        if dim == 0 || dim > 3 {
            return Err(CapraError::InvalidArgument("grid dimension must be 1..=3".into()));
        }
        let g = GridSpec { lo, hi, step, dim };
        if g.node_count() > 10_000_000 {
            return Err(CapraError::InvalidArgument("grid exceeds 1e7 points".into()));
        }
        Ok(g)
    }

    pub fn points_per_axis(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn node_count(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    /// Decodes the flat index into grid coordinates.
    pub fn node(&self, mut index: usize) -> Vec<f64> {
        let n = self.points_per_axis();
        let mut out = vec![0.0; self.dim];
        for axis in 0..self.dim {
            out[axis] = self.lo + (index % n) as f64 * self.step;
            index /= n;
        }
        out
    }
}

/// Literal evaluation of the dual coordinate-k norm as the supremum of
/// K-star norms over all supports of size at most k.
pub fn dual_norm_by_subsets(y: &[f64], k: usize, src: SourceNorm) -> Result<f64> {
    let d = y.len();
    if d > 20 {
        return Err(CapraError::InvalidArgument(
            "subset enumeration is guarded to d <= 20".into(),
        ));
    }
    if k > d {
        return Err(CapraError::KOutOfRange { k, max: d });
    }
    let q = src.dual_exponent();
    // own lq evaluation so the oracle shares nothing with the closed form
    let lq_of = |mask: u32| -> f64 {
        let picked = (0..d).filter(|j| mask & (1 << j) != 0).map(|j| y[j].abs());
        if q.is_infinite() {
            picked.fold(0.0, f64::max)
        } else if q == 1.0 {
            picked.sum()
        } else {
            picked.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
        }
    };
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << d) {
        if (mask.count_ones() as usize) <= k {
            best = best.max(lq_of(mask));
        }
    }
    Ok(best)
}

/// A function sampled on a grid; `+inf` marks points outside the domain.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn sample(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(&grid.node(i))).collect();
        SampledFunction { grid, values }
    }
}

/// Discrete Legendre transform of a sampled function, evaluable at
/// arbitrary dual points: `g(y) = max over finite-valued nodes x of
/// <x, y> - f(x)`.
#[derive(Debug, Clone)]
pub struct GridConjugate {
    dim: usize,
    step: f64,
    extent: f64,
    points: Vec<f64>,
    values: Vec<f64>,
}

/// Builds the discrete conjugate. Only nodes with finite sample values
/// contribute, so indicator-like functions are cheap.
pub fn legendre_on_grid(f: &SampledFunction) -> Result<GridConjugate> {
    if f.grid.dim > 2 {
        return Err(CapraError::InvalidArgument(
            "grid Legendre transform is guarded to dim <= 2".into(),
        ));
    }
    let dim = f.grid.dim;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, &v) in f.values.iter().enumerate() {
        if v.is_finite() {
            points.extend_from_slice(&f.grid.node(i));
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(CapraError::InvalidArgument(
            "function is +inf on the whole grid".into(),
        ));
    }
    Ok(GridConjugate {
        dim,
        step: f.grid.step,
        extent: f.grid.lo.abs().max(f.grid.hi.abs()),
        points,
        values,
    })
}

impl GridConjugate {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.eval_with_diagnostics(y).0
    }

    /// Value plus a crude error estimate `step * ||y||_1` (grid
    /// resolution times the Lipschitz constant of `<., y>`); the flag
    /// reports whether the argmax sits on the grid boundary, where
    /// truncation error dominates.
    pub fn eval_with_diagnostics(&self, y: &[f64]) -> (f64, f64, bool) {
        debug_assert_eq!(y.len(), self.dim);
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0;
        for (j, &fv) in self.values.iter().enumerate() {
            let x = &self.points[j * self.dim..(j + 1) * self.dim];
            let v = solver::dot(x, y) - fv;
            if v > best {
                best = v;
                best_idx = j;
            }
        }
        let x = &self.points[best_idx * self.dim..(best_idx + 1) * self.dim];
        let on_boundary = x.iter().any(|v| (v.abs() - self.extent).abs() < 0.5 * self.step);
        let err = self.step * y.iter().map(|v| v.abs()).sum::<f64>();
        (best, err, on_boundary)
    }

    /// Samples this conjugate on `grid` so it can be transformed again.
    pub fn resample(&self, grid: GridSpec) -> SampledFunction {
        SampledFunction::sample(grid, |y| self.eval(y))
    }
}

/// Double grid transform: the discrete Fenchel biconjugate of `f`,
/// with the conjugate sampled on `dual_grid`.
pub fn biconjugate_on_grid(f: &SampledFunction, dual_grid: GridSpec) -> Result<GridConjugate> {
    let conj = legendre_on_grid(f)?;
    legendre_on_grid(&conj.resample(dual_grid))
}

/// Two-sided bracket on a norm value produced by sampling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AtomBracket {
    pub lower: f64,
    pub upper: f64,
}

impl AtomBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slop: f64) -> bool {
        v >= self.lower - slop && v <= self.upper + slop
    }
}

fn subspace_atom_aligned(x: &[f64], support: &[usize], src: SourceNorm) -> Vec<f64> {
    let d = x.len();
    let p = src.p();
    let mut a = vec![0.0; d];
    let nonzero: Vec<usize> = support.iter().copied().filter(|&j| x[j] != 0.0).collect();
    if nonzero.is_empty() {
        a[support[0]] = 1.0;
        return a;
    }
    if p == 1.0 {
        let &j = nonzero
            .iter()
            .max_by(|&&i, &&j| x[i].abs().partial_cmp(&x[j].abs()).unwrap())
            .unwrap();
        a[j] = x[j].signum();
        return a;
    }
    if p.is_infinite() {
        for &j in &nonzero {
            a[j] = x[j].signum();
        }
        return a;
    }
    for &j in &nonzero {
        a[j] = x[j].signum() * x[j].abs().powf(1.0 / (p - 1.0));
    }
    let n = norms::source_norm(&a, src);
    a.iter_mut().for_each(|v| *v /= n);
    a
}

/// Brackets the coordinate-k norm of `x` by sampling k-sparse points of
/// the source unit sphere: a cheapest convex-combination fit over the
/// sampled atoms upper-bounds the gauge, and any dual-feasible point
/// lower-bounds it.
pub fn gauge_by_sampled_atoms(
    x: &[f64],
    k: usize,
    src: SourceNorm,
    n_atoms: usize,
    seed: u64,
) -> Result<AtomBracket> {
    let d = x.len();
    if d > 4 {
        return Err(CapraError::InvalidArgument(
            "sampled-atom bracket is guarded to d <= 4".into(),
        ));
    }
    if n_atoms > 100_000 {
        return Err(CapraError::InvalidArgument("n_atoms is guarded to 1e5".into()));
    }
    if k == 0 || k > d {
        return Err(CapraError::KOutOfRange { k, max: d });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(AtomBracket { lower: 0.0, upper: 0.0 });
    }

    let mut atoms: Vec<Vec<f64>> = Vec::new();
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        atoms.push(e);
    }
    // aligned atom on every support of size <= k
    for mask in 1u32..(1 << d) {
        let size = mask.count_ones() as usize;
        if size > k {
            continue;
        }
        let support: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
        atoms.push(subspace_atom_aligned(x, &support, src));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while atoms.len() < n_atoms {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.shuffle(&mut rng);
        let mut a = vec![0.0; d];
        for &j in idx.iter().take(k) {
            a[j] = rng.gen_range(-1.0..1.0);
        }
        let n = norms::source_norm(&a, src);
        if n > 1e-9 {
            a.iter_mut().for_each(|v| *v /= n);
            atoms.push(a);
        }
    }

    // upper bound: cheapest total mass representing x over +-atoms
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * atoms.len());
    for a in &atoms {
        columns.push(a.clone());
        columns.push(a.iter().map(|v| -v).collect());
    }
    let costs = vec![1.0; columns.len()];
    let lp = solver::solve_min_lp(&columns, x, &costs)?;
    let upper = lp.value;

    // lower bound: best <x, y> over dual-feasible candidates
    let mut lower = 0.0f64;
    let mut consider = |y: &[f64]| {
        let g = norms::dual_coordinate_norm(y, k, src).unwrap_or(f64::INFINITY);
        if g > 1e-12 {
            let scaled: f64 = solver::dot(x, y) / g;
            if scaled > lower {
                lower = scaled;
            }
        }
    };
    consider(x);
    for a in atoms.iter().take(4096) {
        consider(a);
    }
    Ok(AtomBracket { lower, upper })
}
