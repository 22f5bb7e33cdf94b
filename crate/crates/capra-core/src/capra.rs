//! The constant-along-primal-rays coupling and the conjugacy calculus
//! for functions of the l0 pseudonorm.
//!
//! The coupling pairs `x` with `y` through `<x,y>/|||x|||` (zero at
//! `x = 0`), i.e. it is the Fenchel coupling after primal normalization.
//! For a table `phi` on `{0..d}`, the conjugate of `phi(l0(.))` is the
//! supremum over l of `|||y|||_(l,*) - phi(l)`, the biconjugate factors
//! through the normalization map, and subdifferential membership reduces
//! to one coupling equality plus one argmax condition. Each formula here
//! is exercised against an independent route: grid Legendre transforms,
//! the decomposition program, or plain enumeration.

use crate::error::CapraError;
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};
use crate::l0core;
use crate::norms::{self, SourceNorm};
use crate::solver::{self, SolverConfig};
use crate::Result;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------
// Phi tables
// ---------------------------------------------------------------------

/// A function `{0..d} -> [-inf, +inf]` given as a table of d+1 entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhiSpec {
    values: Vec<ExtReal>,
}

impl PhiSpec {
    pub fn new(values: Vec<ExtReal>) -> Result<Self> {
        if values.is_empty() {
            return Err(CapraError::InvalidPhi("phi table cannot be empty".into()));
        }
        Ok(PhiSpec { values })
    }

    /// phi(l) = l, encoding l0 itself.
    pub fn identity(d: usize) -> Self {
        PhiSpec { values: (0..=d).map(|l| Finite(l as f64)).collect() }
    }

    /// phi(l) = sqrt(l).
    pub fn sqrt(d: usize) -> Self {
        PhiSpec { values: (0..=d).map(|l| Finite((l as f64).sqrt())).collect() }
    }

    /// Indicator of `{0..k}`, encoding the level set `{ l0 <= k }`.
    pub fn level_set_indicator(d: usize, k: usize) -> Result<Self> {
        if k > d {
            return Err(CapraError::KOutOfRange { k, max: d });
        }
        Ok(PhiSpec {
            values: (0..=d).map(|l| if l <= k { Finite(0.0) } else { PosInf }).collect(),
        })
    }

    /// Parses a named preset (`l0`, `sqrt`, `levelset:k`) or a JSON array
    /// with `"inf"` / `"-inf"` tokens.
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        match s.trim() {
            "l0" => return Ok(PhiSpec::identity(d)),
            "sqrt" => return Ok(PhiSpec::sqrt(d)),
            other => {
                if let Some(k) = other.strip_prefix("levelset:") {
                    let k: usize = k.parse().map_err(|_| {
                        CapraError::InvalidPhi(format!("bad level-set preset {other:?}"))
                    })?;
                    return PhiSpec::level_set_indicator(d, k);
                }
            }
        }
        let values: Vec<ExtReal> = serde_json::from_str(s)
            .map_err(|e| CapraError::InvalidPhi(format!("cannot parse phi table: {e}")))?;
        let spec = PhiSpec::new(values)?;
        if spec.dim() != d {
            return Err(CapraError::InvalidPhi(format!(
                "phi table has {} entries, expected {} for dimension {d}",
                spec.dim() + 1,
                d + 1
            )));
        }
        Ok(spec)
    }

    /// d such that the table covers {0..d}.
    pub fn dim(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, l: usize) -> ExtReal {
        self.values[l]
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Finite, nonnegative, with phi(0) = 0: the hypothesis of the
    /// variational biconjugate route and of the phi-norm construction.
    pub fn is_nonneg_zero_at_zero(&self) -> bool {
        self.values[0] == Finite(0.0)
            && self.values.iter().all(|v| matches!(v, Finite(x) if *x >= 0.0))
    }

    pub fn finite_values(&self) -> Option<Vec<f64>> {
        self.values.iter().map(|v| v.finite()).collect()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(CapraError::DimensionMismatch { expected: self.dim(), got: d });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Coupling and normalization
// ---------------------------------------------------------------------

/// `x / |||x|||` for nonzero `x`, and 0 at 0.
pub fn normalize(x: &[f64], src: SourceNorm) -> Vec<f64> {
    let n = norms::source_norm(x, src);
    if n == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v / n).collect()
    }
}

/// The coupling `<x,y>/|||x|||`, constant along primal rays; 0 at x = 0.
pub fn coupling(x: &[f64], y: &[f64], src: SourceNorm) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CapraError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n = norms::source_norm(x, src);
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(solver::dot(x, y) / n)
}

// ---------------------------------------------------------------------
// Conjugate
// ---------------------------------------------------------------------

/// Conjugate of `phi(l0(.))` under the coupling:
/// `sup over l in {0..d} of |||y|||_(l,*) lower-plus (-phi(l))`, with the
/// k = 0 dual coordinate norm taken as 0. Always closed convex in `y`.
pub fn capra_conjugate(phi: &PhiSpec, y: &[f64], src: SourceNorm) -> Result<ExtReal> {
    phi.check_dim(y.len())?;
    let tops = norms::dual_coordinate_sequence(y, src);
    let mut best = NegInf;
    for l in 0..=y.len() {
        best = best.max(Finite(tops[l]).lower_add(phi.value(l).neg()));
    }
    Ok(best)
}

use crate::norms::top_k_supergradient;

// ---------------------------------------------------------------------
// Biconjugate
// ---------------------------------------------------------------------

/// Biconjugate of `phi(l0(.))` at a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Biconjugate {
    /// Value of the ascent route (supremum of coupling minus conjugate).
    pub value: ExtReal,
    /// Value of the decomposition route, when `phi` is finite
    /// nonnegative with phi(0) = 0; skipped (None) otherwise.
    pub variational: Option<f64>,
    /// |ascent - variational| when both ran.
    pub gap: Option<f64>,
}

/// Maximizes `tau -> tau*a - max_l (tau*b_l - phi_l)` over `tau >= 0`
/// exactly (the function is piecewise linear and concave).
fn ray_max(a: f64, b: &[f64], phi: &[f64]) -> (f64, f64) {
    let eval = |tau: f64| -> f64 {
        let mut g = f64::NEG_INFINITY;
        for (bl, pl) in b.iter().zip(phi) {
            g = g.max(tau * bl - pl);
        }
        tau * a - g
    };
    let mut best_tau = 0.0;
    let mut best = eval(0.0);
    for i in 0..b.len() {
        for j in (i + 1)..b.len() {
            if (b[i] - b[j]).abs() > 1e-14 {
                let tau = (phi[i] - phi[j]) / (b[i] - b[j]);
                if tau > 0.0 && tau.is_finite() {
                    let v = eval(tau);
                    if v > best {
                        best = v;
                        best_tau = tau;
                    }
                }
            }
        }
    }
    (best, best_tau)
}

/// Biconjugate by two independent routes.
///
/// Route (a) maximizes `coupling(x, y) - conjugate(y)` over `y`
/// (exact piecewise-linear maximization along aligned rays, then
/// supergradient polish). Route (b) solves the decomposition minimum
/// `(1/|||x|||) min sum phi(l) |||z^(l)|||_(l)` subject to
/// `sum z^(l) = x` and `sum |||z^(l)|||_(l) <= |||x|||`; it runs when
/// `phi` is finite nonnegative with phi(0) = 0. The returned value is
/// route (a); tables with infinite entries are resolved by the exact
/// case analysis (recession against the largest finite grade).
pub fn capra_biconjugate(
    phi: &PhiSpec,
    x: &[f64],
    src: SourceNorm,
    cfg: &SolverConfig,
) -> Result<Biconjugate> {
    let d = x.len();
    phi.check_dim(d)?;

    if phi.values().iter().any(|v| *v == NegInf) {
        // one -inf entry drives the conjugate to +inf everywhere
        return Ok(Biconjugate { value: NegInf, variational: None, gap: None });
    }
    let finite_ls: Vec<usize> = (0..=d).filter(|&l| phi.value(l).is_finite()).collect();
    if finite_ls.is_empty() {
        return Ok(Biconjugate { value: PosInf, variational: None, gap: None });
    }

    let xnorm = norms::source_norm(x, src);
    if xnorm == 0.0 {
        let min_finite = finite_ls
            .iter()
            .map(|&l| phi.value(l).finite().unwrap())
            .fold(f64::INFINITY, f64::min);
        return Ok(Biconjugate { value: Finite(min_finite), variational: None, gap: None });
    }

    let xhat = normalize(x, src);
    let lmax = *finite_ls.last().unwrap();
    if lmax < d {
        // recession test: beyond the largest finite grade the conjugate
        // grows like the top-(lmax,q) norm, so the supremum is +inf
        // exactly when xhat leaves the coordinate-lmax unit ball
        let reach = if lmax == 0 {
            f64::INFINITY
        } else {
            norms::coordinate_norm(&xhat, lmax, src)?
        };
        if reach > 1.0 + 1e-7 {
            return Ok(Biconjugate { value: PosInf, variational: None, gap: None });
        }
    }

    let phi_eff: Vec<f64> = (0..=lmax).map(|l| phi.value(l).to_f64()).collect();
    let objective = |y: &[f64]| -> f64 {
        let tops = norms::dual_coordinate_sequence(y, src);
        let mut g = f64::NEG_INFINITY;
        for l in 0..=lmax {
            if phi_eff[l].is_finite() {
                g = g.max(tops[l] - phi_eff[l]);
            }
        }
        solver::dot(&xhat, y) - g
    };
    let supergrad = |y: &[f64]| -> Vec<f64> {
        let tops = norms::dual_coordinate_sequence(y, src);
        let mut gmax = f64::NEG_INFINITY;
        let mut lstar = 0usize;
        for l in 0..=lmax {
            if phi_eff[l].is_finite() && tops[l] - phi_eff[l] > gmax {
                gmax = tops[l] - phi_eff[l];
                lstar = l;
            }
        }
        let inner = top_k_supergradient(y, lstar, src);
        xhat.iter().zip(&inner).map(|(a, b)| a - b).collect()
    };

    // candidate directions: duality-mapped truncations of xhat, whose
    // rays carry the optimum whenever a single grade is active
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    candidates.push(xhat.clone());
    let p = src.p();
    let order = norms::top_k_indices(&xhat, d);
    for l in 1..=lmax.max(1).min(d) {
        let mut v = vec![0.0; d];
        for &j in order.iter().take(l) {
            v[j] = if p.is_infinite() {
                xhat[j].signum()
            } else if p == 1.0 {
                xhat[j].signum()
            } else {
                xhat[j].signum() * xhat[j].abs().powf(p - 1.0)
            };
        }
        if v.iter().any(|&t| t != 0.0) {
            candidates.push(v);
        }
    }

    let phi_finite_only: Vec<f64> = (0..=lmax)
        .filter(|&l| phi_eff[l].is_finite())
        .map(|l| phi_eff[l])
        .collect();
    let mut best_y = vec![0.0; d];
    let mut best_val = objective(&best_y);
    for v in &candidates {
        let tops = norms::dual_coordinate_sequence(v, src);
        let a = solver::dot(&xhat, v);
        let b: Vec<f64> = (0..=lmax)
            .filter(|&l| phi_eff[l].is_finite())
            .map(|l| tops[l])
            .collect();
        let (val, tau) = ray_max(a, &b, &phi_finite_only);
        if val > best_val {
            best_val = val;
            best_y = v.iter().map(|t| t * tau).collect();
        }
    }
    let (val, _) = solver::concave_ascent(&objective, &supergrad, &best_y, cfg)?;
    let value = val.max(best_val);

    // with infinite entries present, a near-boundary recession direction
    // can make the supremum much larger than any finite phi value; the
    // finite suprema are capped by max phi on the finite grades
    let max_finite = phi_finite_only.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ext_value = if lmax < d && value > max_finite + 1e-6 {
        PosInf
    } else {
        Finite(value)
    };

    let mut variational = None;
    let mut gap = None;
    if phi.is_nonneg_zero_at_zero() {
        let phi_f: Vec<f64> = phi.finite_values().expect("checked finite");
        let dec = solver::decomposition_min(x, &phi_f, src, xnorm, cfg)?;
        let vb = dec.value / xnorm;
        variational = Some(vb);
        if ext_value.is_finite() {
            gap = Some((value - vb).abs());
        }
    }
    Ok(Biconjugate { value: ext_value, variational, gap })
}

/// Closed form for the biconjugate of the level-set indicator
/// `delta_{l0 <= k}`: zero where the coordinate-k norm already equals
/// the source norm, `+inf` elsewhere.
pub fn biconjugate_levelset_indicator(
    k: usize,
    x: &[f64],
    src: SourceNorm,
    tol: f64,
) -> Result<ExtReal> {
    let d = x.len();
    if k > d {
        return Err(CapraError::KOutOfRange { k, max: d });
    }
    let s = norms::source_norm(x, src);
    if s == 0.0 {
        return Ok(Finite(0.0));
    }
    if k == 0 {
        return Ok(PosInf);
    }
    let cn = norms::coordinate_norm(x, k, src)?;
    if (cn - s).abs() <= tol * s {
        Ok(Finite(0.0))
    } else {
        Ok(PosInf)
    }
}

// ---------------------------------------------------------------------
// Subdifferentials
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubdiffCase {
    AtZero,
    NonzeroFinite,
    NonzeroInfiniteAll,
    NonzeroEmpty,
}

/// Evidence for (or against) `y` belonging to the subdifferential of
/// `phi(l0(.))` at a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdiffCertificate {
    pub member: bool,
    pub case_tag: SubdiffCase,
    /// Grades attaining the conjugate supremum (within tolerance); for
    /// the at-zero case, the grades whose ball constraint is tight.
    pub argmax_set: Vec<usize>,
    /// Relative residual of the coupling equality
    /// `<x,y> = |||x|||_(l) |||y|||_(l,*)`; for the at-zero case, the
    /// worst relative violation of the ball constraints.
    pub residual_coupling_eq: f64,
    /// Relative distance of grade l0(x) from the argmax value.
    pub residual_argmax: f64,
}

/// Membership test for the subdifferential at the origin:
/// `y` belongs iff `|||y|||_(l,*) <= phi(l) upper-plus (-phi(0))` for
/// every l >= 1, with negative scalings giving the empty set and `+inf`
/// the whole space.
pub fn subdiff_at_zero_contains(
    phi: &PhiSpec,
    y: &[f64],
    src: SourceNorm,
    tol: f64,
) -> Result<SubdiffCertificate> {
    let d = y.len();
    phi.check_dim(d)?;
    let tops = norms::dual_coordinate_sequence(y, src);
    let mut member = true;
    let mut worst = 0.0f64;
    let mut tight = Vec::new();
    for l in 1..=d {
        let c = phi.value(l).upper_add(phi.value(0).neg());
        match c {
            PosInf => {}
            NegInf => {
                member = false;
                worst = f64::INFINITY;
            }
            Finite(c) => {
                if c < 0.0 {
                    // negative radius scales the ball to the empty set
                    member = false;
                    worst = f64::INFINITY;
                    continue;
                }
                let violation = (tops[l] - c) / (1.0 + c.abs());
                if violation > tol {
                    member = false;
                }
                worst = worst.max(violation.max(0.0));
                if violation.abs() <= tol {
                    tight.push(l);
                }
            }
        }
    }
    Ok(SubdiffCertificate {
        member,
        case_tag: SubdiffCase::AtZero,
        argmax_set: tight,
        residual_coupling_eq: worst,
        residual_argmax: 0.0,
    })
}

/// Membership test for the subdifferential at `x != 0`.
///
/// With `l = l0(x, tol)`: when phi(l) is finite, `y` belongs iff the
/// coupling equality `<x,y> = |||x|||_(l) |||y|||_(l,*)` holds and l
/// attains `max_j (|||y|||_(j,*) - phi(j))`, both within tolerance.
/// `phi(l) = -inf` or an identically-(+inf) table admit every y; a
/// `+inf` value at l with some other finite entry admits none.
pub fn subdiff_membership(
    phi: &PhiSpec,
    x: &[f64],
    y: &[f64],
    src: SourceNorm,
    tol: f64,
) -> Result<SubdiffCertificate> {
    let d = x.len();
    phi.check_dim(d)?;
    if y.len() != d {
        return Err(CapraError::DimensionMismatch { expected: d, got: y.len() });
    }
    let l = l0core::l0(x, tol);
    if l == 0 {
        return Err(CapraError::ZeroVector);
    }

    if phi.value(l) == NegInf || phi.values().iter().all(|v| *v == PosInf) {
        return Ok(SubdiffCertificate {
            member: true,
            case_tag: SubdiffCase::NonzeroInfiniteAll,
            argmax_set: (0..=d).collect(),
            residual_coupling_eq: 0.0,
            residual_argmax: 0.0,
        });
    }
    if phi.value(l) == PosInf {
        return Ok(SubdiffCertificate {
            member: false,
            case_tag: SubdiffCase::NonzeroEmpty,
            argmax_set: Vec::new(),
            residual_coupling_eq: f64::INFINITY,
            residual_argmax: f64::INFINITY,
        });
    }

    let cn = norms::coordinate_norm(x, l, src)?;
    let tops = norms::dual_coordinate_sequence(y, src);
    let dot = solver::dot(x, y);
    let residual_coupling_eq = (dot - cn * tops[l]).abs() / (1.0 + dot.abs() + cn * tops[l]);

    let terms: Vec<ExtReal> =
        (0..=d).map(|j| Finite(tops[j]).lower_add(phi.value(j).neg())).collect();
    let gmax = terms.iter().fold(NegInf, |a, &b| a.max(b));
    let scale = 1.0 + gmax.finite().map_or(0.0, f64::abs);
    let in_argmax = |t: ExtReal| match (t, gmax) {
        (Finite(a), Finite(b)) => (b - a) / scale <= tol,
        (a, b) => a == b,
    };
    let argmax_set: Vec<usize> = (0..=d).filter(|&j| in_argmax(terms[j])).collect();
    let residual_argmax = match (terms[l], gmax) {
        (Finite(a), Finite(b)) => ((b - a) / scale).max(0.0),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    };

    Ok(SubdiffCertificate {
        member: residual_coupling_eq <= tol && residual_argmax <= tol,
        case_tag: SubdiffCase::NonzeroFinite,
        argmax_set,
        residual_coupling_eq,
        residual_argmax,
    })
}

// ---------------------------------------------------------------------
// Conditional infimum and the convexity checker
// ---------------------------------------------------------------------

/// A scalar function evaluable along rays.
pub struct RayFunction<'a> {
    pub eval: &'a dyn Fn(&[f64]) -> f64,
    /// Declared constant along open rays (`f(lambda x) = f(x)` for
    /// lambda > 0), in which case the infimum is the value itself.
    pub ray_constant: bool,
}

/// Conditional infimum of `f` through the normalization map:
/// `inf over lambda > 0 of f(lambda x)` on the unit sphere (and at 0),
/// `+inf` elsewhere. Without the ray-constant declaration the infimum
/// is approximated on a logarithmic grid of scalings.
pub fn conditional_infimum(f: &RayFunction<'_>, x: &[f64], src: SourceNorm) -> ExtReal {
    let n = norms::source_norm(x, src);
    if n == 0.0 {
        return ExtReal::from_f64((f.eval)(x));
    }
    if (n - 1.0).abs() > 1e-9 {
        return PosInf;
    }
    if f.ray_constant {
        return ExtReal::from_f64((f.eval)(x));
    }
    let mut best = f64::INFINITY;
    let steps = 161;
    for i in 0..steps {
        let lambda = 10f64.powf(-8.0 + 16.0 * i as f64 / (steps - 1) as f64);
        let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        best = best.min((f.eval)(&scaled));
    }
    ExtReal::from_f64(best)
}

/// Report of a pointwise Capra-convexity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub max_residual: f64,
    pub samples: usize,
    pub worst_point: Vec<f64>,
}

/// Tests `f = f^cc'` on sample points by rebuilding the biconjugate with
/// the grid Legendre oracle (d <= 2): the conditional infimum of `f` is
/// sampled on a thin shell around the unit sphere, conjugated twice, and
/// composed with the normalization map.
pub fn capra_convexity_check(
    f: &RayFunction<'_>,
    src: SourceNorm,
    points: &[Vec<f64>],
    grid: crate::oracle::GridSpec,
    dual_grid: crate::oracle::GridSpec,
) -> Result<ConvexityReport> {
    if grid.dim > 2 {
        return Err(CapraError::InvalidArgument(
            "convexity check is guarded to d <= 2".into(),
        ));
    }
    let band = 0.75 * grid.step;
    let shell = crate::oracle::SampledFunction::sample(grid, |node| {
        let n = norms::source_norm(node, src);
        if n == 0.0 {
            (f.eval)(node)
        } else if (n - 1.0).abs() <= band {
            // the ray through the node crosses the sphere; the ray
            // infimum at the node equals the conditional infimum there
            if f.ray_constant {
                (f.eval)(node)
            } else {
                let mut best = f64::INFINITY;
                for i in 0..65 {
                    let lambda = 10f64.powf(-6.0 + 12.0 * i as f64 / 64.0);
                    let scaled: Vec<f64> = node.iter().map(|v| v * lambda).collect();
                    best = best.min((f.eval)(&scaled));
                }
                best
            }
        } else {
            f64::INFINITY
        }
    });
    let reconstruction = crate::oracle::biconjugate_on_grid(&shell, dual_grid)?;
    let mut max_residual = 0.0f64;
    let mut worst_point = points.first().cloned().unwrap_or_default();
    for point in points {
        let fx = (f.eval)(point);
        let rebuilt = reconstruction.eval(&normalize(point, src));
        let residual = (fx - rebuilt).abs();
        if residual > max_residual {
            max_residual = residual;
            worst_point = point.clone();
        }
    }
    Ok(ConvexityReport { max_residual, samples: points.len(), worst_point })
}
