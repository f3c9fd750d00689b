//! Sturm-sequence counting and bisection for symmetric tridiagonal operators
//! with unit off-diagonals, plus the corner element of the resolvent.
//!
//! This is the independent eigenvalue route. Nothing here touches the phase
//! recursion in [`crate::pruefer`].

use crate::error::{invalid, Error, Result};
use crate::model::TridiagonalOperator;

/// Eigenvalue search over `[lo, hi)` to an absolute energy tolerance.
#[derive(Debug, Clone, Copy)]
pub struct SpectralQuery<'a> {
    operator: &'a TridiagonalOperator,
    lo: f64,
    hi: f64,
    tolerance: f64,
}

impl<'a> SpectralQuery<'a> {
    pub fn new(operator: &'a TridiagonalOperator, lo: f64, hi: f64, tolerance: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("interval", format!("need lo < hi, got ({lo}, {hi})")));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(invalid("tolerance", format!("must be positive, got {tolerance}")));
        }
        Ok(Self {
            operator,
            lo,
            hi,
            tolerance,
        })
    }

    /// Query covering the whole spectrum.
    pub fn full(operator: &'a TridiagonalOperator, tolerance: f64) -> Result<Self> {
        let b = operator.spectral_bound() + 1.0;
        Self::new(operator, -b, b, tolerance)
    }
}

fn pivot_floor(op: &TridiagonalOperator) -> f64 {
    f64::EPSILON * op.spectral_bound().max(1.0)
}

/// Number of eigenvalues strictly below `energy`.
///
/// Counts negative pivots of `H - E` in the ratio recursion
/// `p_1 = d_1 - E`, `p_n = d_n - E - 1/p_{n-1}`. An exact zero pivot is
/// replaced by `+eps * scale`, so an eigenvalue equal to `energy` is not counted.
pub fn sturm_count(op: &TridiagonalOperator, energy: f64) -> usize {
    let floor = pivot_floor(op);
    let (first, rest) = op.diagonal().split_first().expect("operator is never empty");
    let mut pivot = first - energy;
    if pivot == 0.0 {
        pivot = floor;
    }
    let mut count = usize::from(pivot < 0.0);
    for &d in rest {
        pivot = d - energy - 1.0 / pivot;
        if pivot == 0.0 {
            pivot = floor;
        }
        count += usize::from(pivot < 0.0);
    }
    count
}

/// All eigenvalues in `[lo, hi)`, ascending, each within `tolerance / 2`.
pub fn bisect_eigenvalues(query: &SpectralQuery<'_>) -> Vec<f64> {
    let op = query.operator;
    let c_lo = sturm_count(op, query.lo);
    let c_hi = sturm_count(op, query.hi);
    let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    refine(op, query.lo, c_lo, query.hi, c_hi, query.tolerance, &mut out);
    out
}

fn refine(
    op: &TridiagonalOperator,
    lo: f64,
    c_lo: usize,
    hi: f64,
    c_hi: usize,
    tol: f64,
    out: &mut Vec<f64>,
) {
    if c_hi <= c_lo {
        return;
    }
    if c_hi - c_lo == 1 {
        out.push(isolate(op, lo, c_lo, hi, tol));
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo < tol || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n(mid, c_hi - c_lo));
        return;
    }
    let c_mid = sturm_count(op, mid);
    refine(op, lo, c_lo, mid, c_mid, tol, out);
    refine(op, mid, c_mid, hi, c_hi, tol, out);
}

/// Counts at three energies in one pass; the independent recurrences overlap
/// in the pipeline, so this costs little more than a single count.
fn sturm_count3(op: &TridiagonalOperator, e: [f64; 3]) -> [usize; 3] {
    let floor = pivot_floor(op);
    let mut pivot = [f64::INFINITY; 3];
    let mut count = [0usize; 3];
    for &d in op.diagonal() {
        for j in 0..3 {
            let mut p = d - e[j] - 1.0 / pivot[j];
            if p == 0.0 {
                p = floor;
            }
            count[j] += usize::from(p < 0.0);
            pivot[j] = p;
        }
    }
    count
}

/// Quadrisection of a bracket holding exactly one eigenvalue.
fn isolate(op: &TridiagonalOperator, mut lo: f64, c_lo: usize, mut hi: f64, tol: f64) -> f64 {
    while hi - lo >= tol {
        let step = 0.25 * (hi - lo);
        let e = [lo + step, lo + 2.0 * step, lo + 3.0 * step];
        if e[0] <= lo || e[2] >= hi {
            break;
        }
        let c = sturm_count3(op, e);
        // the eigenvalue lies below the first point whose count exceeds c_lo
        match c.iter().position(|&c| c > c_lo) {
            Some(0) => hi = e[0],
            Some(j) => {
                lo = e[j - 1];
                hi = e[j];
            }
            None => lo = e[2],
        }
    }
    0.5 * (lo + hi)
}

/// Whole spectrum, ascending.
pub fn all_eigenvalues(op: &TridiagonalOperator, tolerance: f64) -> Result<Vec<f64>> {
    Ok(bisect_eigenvalues(&SpectralQuery::full(op, tolerance)?))
}

/// Distance from `energy` to the nearest eigenvalue, to within `tolerance`.
pub fn distance_to_spectrum(op: &TridiagonalOperator, energy: f64, tolerance: f64) -> f64 {
    let below = sturm_count(op, energy);
    let b = op.spectral_bound() + 1.0;
    let mut best = f64::INFINITY;
    if below > 0 {
        if let Ok(q) = SpectralQuery::new(op, -b, energy, tolerance) {
            if let Some(&e) = bisect_eigenvalues(&q).last() {
                best = best.min(energy - e);
            }
        }
    }
    if below < op.len() {
        if let Ok(q) = SpectralQuery::new(op, energy, b, tolerance) {
            if let Some(&e) = bisect_eigenvalues(&q).first() {
                best = best.min(e - energy);
            }
        }
    }
    best.max(0.0)
}

/// `<delta_L, (E - H)^{-1} delta_L>`.
///
/// Solves `(E - H) x = delta_L` by Gaussian elimination with partial row
/// pivoting and returns `x_L`. Rejects energies within `tolerance` of an
/// eigenvalue, reporting the distance.
pub fn resolvent_corner(op: &TridiagonalOperator, energy: f64, tolerance: f64) -> Result<f64> {
    if !energy.is_finite() {
        return Err(invalid("energy", format!("must be finite, got {energy}")));
    }
    if sturm_count(op, energy - tolerance) != sturm_count(op, energy + tolerance) {
        let distance = distance_to_spectrum(op, energy, tolerance * 1e-3);
        return Err(Error::NearSpectrum { energy, distance });
    }
    let n = op.len();
    // Rows of E - H: sub/super diagonals are -1. `upper` and `upper2` hold the
    // first and (fill-in) second superdiagonal of the eliminated row.
    let mut diag: Vec<f64> = op.diagonal().iter().map(|d| energy - d).collect();
    let mut upper = vec![-1.0; n.saturating_sub(1)];
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    for i in 0..n.saturating_sub(1) {
        let lower = -1.0;
        if diag[i].abs() >= 1.0 {
            let fact = lower / diag[i];
            diag[i + 1] -= fact * upper[i];
            rhs[i + 1] -= fact * rhs[i];
        } else {
            // swap rows i and i+1
            let fact = diag[i] / lower;
            diag[i] = lower;
            let temp = diag[i + 1];
            diag[i + 1] = upper[i] - fact * temp;
            if i + 2 < n {
                let upper2 = upper[i + 1];
                upper[i + 1] = -fact * upper2;
            }
            upper[i] = temp;
            let temp = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = temp - fact * rhs[i + 1];
        }
    }
    if diag[n - 1] == 0.0 {
        return Err(Error::NearSpectrum {
            energy,
            distance: 0.0,
        });
    }
    Ok(rhs[n - 1] / diag[n - 1])
}
