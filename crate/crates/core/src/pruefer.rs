//! Pruefer phase recursion and eigenphase root-finding.
//!
//! For `E = 2 cos(theta)` with `theta` in `(0, pi)`, the generalized eigenvector
//! with `u_0 = 0`, `u_1 = 1` is written as `(u_n, u_{n-1}) = r_n (sin y_n,
//! sin(y_n - theta))`. The phase obeys
//!
//! ```text
//! y_1 = theta
//! y_{n+1} = y_n + theta + arg(1 - (d_n sin y_n / sin theta) e^{-i y_n})
//! ```
//!
//! with the principal argument in `(-pi, pi)`. `2 cos(theta)` is a Dirichlet
//! eigenvalue of `H_L` exactly when `y_{L+1}(theta)` is a multiple of `pi`, and
//! `y_{L+1}` is increasing in `theta`.
//!
//! The increment only depends on `y_n` modulo `pi`, so phases are carried as a
//! winding number plus a remainder in `[0, pi)`. That keeps `sin y_n` accurate
//! for long chains, and the eigenphase count is the winding itself.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::model::TridiagonalOperator;

/// Default absolute tolerance on eigenphase roots in `theta`.
pub const DEFAULT_ROOT_TOLERANCE: f64 = 1e-11 * PI;

/// `|sin y_{L+1}|` below which a count query is flagged as sitting on an eigenphase.
pub const COUNT_TOLERANCE: f64 = 1e-10;

/// A phase `winding * pi + remainder` with `remainder` in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    winding: i64,
    remainder: f64,
}

impl Phase {
    pub fn from_value(y: f64) -> Self {
        Phase {
            winding: 0,
            remainder: 0.0,
        }
        .advance(y)
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn remainder(&self) -> f64 {
        self.remainder
    }

    pub fn value(&self) -> f64 {
        self.winding as f64 * PI + self.remainder
    }

    /// `y - k pi`, exact in the winding part.
    pub fn offset_from_multiple(&self, k: i64) -> f64 {
        (self.winding - k) as f64 * PI + self.remainder
    }

    /// `|sin y|`.
    pub fn abs_sin(&self) -> f64 {
        self.remainder.sin().abs()
    }

    fn advance(self, delta: f64) -> Self {
        let mut rem = self.remainder + delta;
        let mut winding = self.winding;
        if !(0.0..PI).contains(&rem) {
            let k = (rem / PI).floor();
            rem -= k * PI;
            winding += k as i64;
            // rounding in the reduction can land on either side of the cut
            if rem < 0.0 {
                rem += PI;
                winding -= 1;
            } else if rem >= PI {
                rem -= PI;
                winding += 1;
            }
        }
        Phase {
            winding,
            remainder: rem,
        }
    }
}

/// `(Re, Im)` of `1 - (d sin y / sin theta) e^{-iy}`.
#[inline]
fn log_argument(sin_y: f64, cos_y: f64, sin_theta: f64, d: f64) -> (f64, f64) {
    let c = d * sin_y / sin_theta;
    (1.0 - c * cos_y, c * sin_y)
}

/// Principal `Im ln` of the step factor. Only depends on `y` modulo `pi`.
#[inline]
fn increment(sin_y: f64, cos_y: f64, sin_theta: f64, d: f64) -> f64 {
    let (re, im) = log_argument(sin_y, cos_y, sin_theta, d);
    // 1 - z can only reach the cut (-inf, 0] through z = 0 exactly
    assert!(
        im != 0.0 || re > 0.0,
        "phase step hit the branch cut: re = {re}, im = {im}"
    );
    im.atan2(re)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(invalid("theta", format!("must lie strictly inside (0, pi), got {theta}")))
    }
}

/// One step of the phase recursion: `y + theta + Im ln(1 - (d sin y / sin theta) e^{-iy})`.
pub fn phase_step(y: f64, theta: f64, d: f64) -> Result<f64> {
    check_theta(theta)?;
    if !d.is_finite() || !y.is_finite() {
        return Err(invalid("d", format!("site term and phase must be finite, got d = {d}, y = {y}")));
    }
    let (sin_y, cos_y) = y.sin_cos();
    Ok(y + theta + increment(sin_y, cos_y, theta.sin(), d))
}

/// Runs the recursion over every site, calling `visit(n, y_n, ytilde_n, ln|1 - z|)`
/// for `n = 1..=L+1`; the last argument is the log-modulus of the step that led
/// to `y_n` (zero for `n = 1`).
fn sweep_with<F: FnMut(usize, Phase, f64, f64)>(diagonal: &[f64], theta: f64, mut visit: F) {
    let sin_theta = theta.sin();
    let mut phase = Phase::from_value(theta);
    let mut y_tilde = 0.0;
    visit(1, phase, y_tilde, 0.0);
    for (i, &d) in diagonal.iter().enumerate() {
        let (sin_y, cos_y) = phase.remainder.sin_cos();
        let inc = increment(sin_y, cos_y, sin_theta, d);
        let (re, im) = log_argument(sin_y, cos_y, sin_theta, d);
        y_tilde += inc;
        phase = phase.advance(theta + inc);
        visit(i + 2, phase, y_tilde, re.hypot(im).ln());
    }
}

/// `y_{L+1}(theta)` and `ytilde_{L+1}(theta)` without storing the trace.
pub fn end_phase(op: &TridiagonalOperator, theta: f64) -> Result<(Phase, f64)> {
    check_theta(theta)?;
    Ok(end_phase_unchecked(op.diagonal(), theta))
}

fn end_phase_unchecked(diagonal: &[f64], theta: f64) -> (Phase, f64) {
    let sin_theta = theta.sin();
    let mut phase = Phase::from_value(theta);
    let mut y_tilde = 0.0;
    for &d in diagonal {
        let (sin_y, cos_y) = phase.remainder.sin_cos();
        let inc = increment(sin_y, cos_y, sin_theta, d);
        y_tilde += inc;
        phase = phase.advance(theta + inc);
    }
    (phase, y_tilde)
}

/// `ytilde_n(theta)` at each requested `n` (1-based, up to `L+1`), in one pass.
pub fn y_tilde_at(op: &TridiagonalOperator, theta: f64, indices: &[usize]) -> Result<Vec<f64>> {
    check_theta(theta)?;
    if let Some(&bad) = indices.iter().find(|&&n| n == 0 || n > op.len() + 1) {
        return Err(Error::SiteOutOfRange {
            index: bad,
            size: op.len() + 1,
        });
    }
    let mut out = vec![0.0; indices.len()];
    let last = indices.iter().copied().max().unwrap_or(1);
    sweep_with(&op.diagonal()[..last - 1], theta, |n, _, yt, _| {
        for (slot, &want) in out.iter_mut().zip(indices) {
            if want == n {
                *slot = yt;
            }
        }
    });
    Ok(out)
}

/// Phases `y_1..y_{L+1}` at a fixed `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrueferTrace {
    theta: f64,
    phases: Vec<Phase>,
    y_tilde: Vec<f64>,
    log_amplitude: Option<Vec<f64>>,
}

impl PrueferTrace {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Number of stored phases, `L + 1`.
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// `y_n`, 1-based.
    pub fn y(&self, n: usize) -> f64 {
        self.phases[n - 1].value()
    }

    pub fn phase(&self, n: usize) -> Phase {
        self.phases[n - 1]
    }

    pub fn y_values(&self) -> Vec<f64> {
        self.phases.iter().map(Phase::value).collect()
    }

    /// `ytilde_n = y_n - n theta`, accumulated directly from the increments.
    pub fn y_tilde(&self) -> &[f64] {
        &self.y_tilde
    }

    /// `ln r_n` with `(u_n, u_{n-1}) = r_n (sin y_n, sin(y_n - theta))`, if tracked.
    pub fn log_amplitude(&self) -> Option<&[f64]> {
        self.log_amplitude.as_deref()
    }

    /// `sin y_n / sin(y_n - theta)`, the ratio `u_n / u_{n-1}` implied by the phase.
    pub fn implied_ratio(&self, n: usize) -> f64 {
        let rem = self.phases[n - 1].remainder;
        rem.sin() / (rem - self.theta).sin()
    }
}

/// Full phase trace. `with_amplitude` also tracks `ln r_n`.
pub fn pruefer_sweep(op: &TridiagonalOperator, theta: f64, with_amplitude: bool) -> Result<PrueferTrace> {
    check_theta(theta)?;
    let n = op.len() + 1;
    let mut phases = Vec::with_capacity(n);
    let mut y_tilde = Vec::with_capacity(n);
    let mut log_r = with_amplitude.then(|| Vec::with_capacity(n));
    let mut acc = -theta.sin().ln();
    sweep_with(op.diagonal(), theta, |_, phase, yt, log_step| {
        phases.push(phase);
        y_tilde.push(yt);
        if let Some(v) = log_r.as_mut() {
            acc += log_step;
            v.push(acc);
        }
    });
    Ok(PrueferTrace {
        theta,
        phases,
        y_tilde,
        log_amplitude: log_r,
    })
}

/// Ratios `w_n = u_n / u_{n-1}` for `n = 2..=L+1` at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTrace {
    energy: f64,
    w: Vec<f64>,
}

impl RatioTrace {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `w_n` for `2 <= n <= L+1`. May be infinite.
    pub fn w(&self, n: usize) -> f64 {
        self.w[n - 2]
    }

    /// `w_{L+1}`.
    pub fn last(&self) -> f64 {
        *self.w.last().expect("ratio trace is never empty")
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// `w_2 = E - d_1`, `w_{n+1} = E - d_n - 1/w_n`. A zero `w_n` yields an
/// infinite `w_{n+1}`, and `1/inf = 0` restarts the recursion.
pub fn ratio_sweep(op: &TridiagonalOperator, energy: f64) -> Result<RatioTrace> {
    if !energy.is_finite() {
        return Err(invalid("energy", format!("must be finite, got {energy}")));
    }
    let mut w = Vec::with_capacity(op.len());
    let mut prev = f64::INFINITY;
    for &d in op.diagonal() {
        let next = energy - d - 1.0 / prev;
        w.push(next);
        prev = next;
    }
    Ok(RatioTrace { energy, w })
}

/// `floor(y_{L+1}(theta) / pi)`: eigenvalues of `H_L` at or above `2 cos(theta)`.
///
/// Fails with [`Error::BoundaryAmbiguous`] when `2 cos(theta)` is an eigenvalue
/// to within [`COUNT_TOLERANCE`]; see [`eigenphase_count_half_open`].
pub fn eigenphase_count(op: &TridiagonalOperator, theta: f64) -> Result<usize> {
    let (phase, _) = end_phase(op, theta)?;
    let residual = phase.abs_sin();
    if residual < COUNT_TOLERANCE {
        return Err(Error::BoundaryAmbiguous { theta, residual });
    }
    Ok(phase.winding.max(0) as usize)
}

/// Number of eigenvalues strictly above `2 cos(theta)`; a phase within
/// [`COUNT_TOLERANCE`] above a multiple of `pi` is treated as sitting on it.
pub fn eigenphase_count_half_open(op: &TridiagonalOperator, theta: f64) -> Result<usize> {
    let (phase, _) = end_phase(op, theta)?;
    let winding = if phase.remainder.sin() < COUNT_TOLERANCE && phase.remainder < 1.0 {
        phase.winding - 1
    } else {
        phase.winding
    };
    Ok(winding.max(0) as usize)
}

/// A root of `y_{L+1}(theta) = k pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenphaseRoot {
    pub theta_root: f64,
    pub multiple_index: i64,
    pub energy: f64,
    /// Width of the final bracket around `theta_root`.
    pub bracket_width: f64,
}

/// Solves `y_{L+1}(theta) = k pi` inside `bracket`.
///
/// Bisection shrinks the bracket to a thousandth of its width, then an
/// Illinois-safeguarded secant iteration polishes to `tol` in `theta`.
pub fn locate_eigenphase(
    op: &TridiagonalOperator,
    k: i64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<EigenphaseRoot> {
    let (mut lo, mut hi) = bracket;
    check_theta(lo)?;
    check_theta(hi)?;
    if lo >= hi {
        return Err(invalid("bracket", format!("need lo < hi, got ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    let diag = op.diagonal();
    let g = |theta: f64| end_phase_unchecked(diag, theta).0.offset_from_multiple(k);
    let root = |theta: f64, width: f64| EigenphaseRoot {
        theta_root: theta,
        multiple_index: k,
        energy: 2.0 * theta.cos(),
        bracket_width: width,
    };

    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(root(lo, 0.0));
    }
    if g_hi == 0.0 {
        return Ok(root(hi, 0.0));
    }
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::Bracketing {
            k,
            theta_lo: lo,
            theta_hi: hi,
        });
    }

    let coarse = 1e-3 * (hi - lo);
    while hi - lo > coarse && hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(root(mid, hi - lo));
        }
        if g_mid < 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }

    // Illinois: the scaled values drive the secant, the true values give the
    // final interpolation.
    let (mut s_lo, mut s_hi) = (g_lo, g_hi);
    let mut side = 0i8;
    let mut width_before = hi - lo;
    let mut iterations = 0;
    while hi - lo > tol && iterations < 200 {
        iterations += 1;
        let secant = hi - s_hi * (hi - lo) / (s_hi - s_lo);
        let stalled = iterations % 3 == 0 && hi - lo > 0.5 * width_before;
        if iterations % 3 == 0 {
            width_before = hi - lo;
        }
        let x = if stalled || !(secant > lo && secant < hi) {
            0.5 * (lo + hi)
        } else {
            secant
        };
        if x <= lo || x >= hi {
            break;
        }
        let g_x = g(x);
        if g_x == 0.0 {
            return Ok(root(x, hi - lo));
        }
        // An accurate secant iterate only moves one end of the bracket. Probe
        // just past it so the other end can follow.
        if x == secant && !stalled {
            let probe = if g_x < 0.0 { x + 0.5 * tol } else { x - 0.5 * tol };
            if probe > lo && probe < hi {
                let g_p = g(probe);
                if g_p == 0.0 {
                    return Ok(root(probe, hi - lo));
                }
                if (g_p < 0.0) != (g_x < 0.0) {
                    let (a, ga, b, gb) = if g_x < 0.0 { (x, g_x, probe, g_p) } else { (probe, g_p, x, g_x) };
                    lo = a;
                    g_lo = ga;
                    hi = b;
                    g_hi = gb;
                    break;
                }
            }
        }
        if g_x < 0.0 {
            lo = x;
            g_lo = g_x;
            s_lo = g_x;
            if side == -1 {
                s_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = g_x;
            s_hi = g_x;
            if side == 1 {
                s_lo *= 0.5;
            }
            side = 1;
        }
    }
    let estimate = (hi - g_hi * (hi - lo) / (g_hi - g_lo)).clamp(lo, hi);
    Ok(root(estimate, hi - lo))
}

/// Every eigenphase root with `y_{L+1}(theta)` crossing a multiple of `pi`
/// strictly inside `(theta_lo, theta_hi)`, ordered by `theta`.
pub fn eigenphases_in_window(
    op: &TridiagonalOperator,
    theta_lo: f64,
    theta_hi: f64,
    tol: f64,
) -> Result<Vec<EigenphaseRoot>> {
    let (p_lo, _) = end_phase(op, theta_lo)?;
    let (p_hi, _) = end_phase(op, theta_hi)?;
    let first = p_lo.winding + 1;
    let last = if p_hi.remainder > 0.0 {
        p_hi.winding
    } else {
        p_hi.winding - 1
    };
    (first..=last)
        .map(|k| locate_eigenphase(op, k, (theta_lo, theta_hi), tol))
        .collect()
}

/// Largest `gamma` with `|sin(theta + x)| > |sin theta| / 2` for all `|x| < gamma`.
pub fn gamma_neighborhood(theta: f64) -> f64 {
    let a = (0.5 * theta.sin()).asin();
    (theta - a).min(PI - a - theta)
}

/// Lipschitz constant bounding `|y_N(theta + p) - y_N(theta + q)| / |p - q|`
/// for `|p|, |q| < gamma_neighborhood(theta)`:
///
/// ```text
/// sum_{n=1}^{N-1} (2 + |d_n|/s + 4|d_n|/s^2) prod_{m=n}^{N-1} (3 + 2|d_m|/s),  s = |sin theta|
/// ```
pub fn lipschitz_bound(op: &TridiagonalOperator, theta: f64, n_sites: usize) -> Result<f64> {
    check_theta(theta)?;
    if n_sites < 2 || n_sites > op.len() + 1 {
        return Err(invalid(
            "N",
            format!("must lie in 2..={}, got {n_sites}", op.len() + 1),
        ));
    }
    let s = theta.sin().abs();
    let mut product = 1.0;
    let mut sum = 0.0;
    for &d in op.diagonal()[..n_sites - 1].iter().rev() {
        let a = d.abs();
        product *= 3.0 + 2.0 * a / s;
        sum += (2.0 + a / s + 4.0 * a / (s * s)) * product;
    }
    Ok(sum)
}
