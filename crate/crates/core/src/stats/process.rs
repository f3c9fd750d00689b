use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::TridiagonalOperator;
use crate::pruefer::{eigenphases_in_window, gamma_neighborhood, DEFAULT_ROOT_TOLERANCE};
use crate::sturm::{bisect_eigenvalues, SpectralQuery};

/// Largest accepted disagreement between Pruefer and Sturm energies.
pub const ORACLE_ENERGY_TOLERANCE: f64 = 1e-8;

/// Absolute energy tolerance of the Sturm cross-check.
const ORACLE_BISECTION_TOLERANCE: f64 = 1e-13;

/// Relative margin added to the theta window, `K' = K / (2 sin theta0) * (1 + 10/L)`.
fn window_half_width(theta0: f64, window_k: f64, size: usize) -> f64 {
    window_k / (2.0 * theta0.sin()) * (1.0 + 10.0 / size as f64)
}

/// Eigenvalues of `H_L` near `E0 = 2 cos(theta0)`, rescaled by `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointProcessSample {
    pub theta0: f64,
    pub window_k: f64,
    pub size: usize,
    /// Eigenphases `theta_i`, increasing.
    pub thetas: Vec<f64>,
    /// `x_i = L (theta_i - theta0)`, increasing.
    pub x_points: Vec<f64>,
    /// `L (E_i - E0)`, paired with `x_points`.
    pub energy_points: Vec<f64>,
    /// `k_i` with `y_{L+1}(theta_i) = k_i pi`; consecutive integers.
    pub multiples: Vec<i64>,
    /// `n` with `k_i = n + i`, where index 0 is the point of smallest `|x|`.
    pub enumeration_offset: Option<i64>,
    /// `max_i |L(E_i - E0) + 2 sin(theta0) x_i| / (K^2 / L)`.
    pub max_remainder_ratio: f64,
    /// `max_i |E_i(Pruefer) - E_i(Sturm)|`.
    pub oracle_max_energy_deviation: f64,
    /// `max_i L |theta_i - arccos(E_i(Sturm) / 2)|`.
    pub oracle_max_x_deviation: f64,
    /// `(master_seed, realization_index)` when built from a sampled realization.
    pub realization: Option<(u64, u64)>,
}

impl PointProcessSample {
    pub fn len(&self) -> usize {
        self.x_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_points.is_empty()
    }

    /// Enumeration index `i = k_i - n` of each point.
    pub fn indices(&self) -> Vec<i64> {
        match self.enumeration_offset {
            Some(n) => self.multiples.iter().map(|k| k - n).collect(),
            None => Vec::new(),
        }
    }

    pub fn with_realization(mut self, master_seed: u64, index: u64) -> Self {
        self.realization = Some((master_seed, index));
        self
    }
}

/// Finds every eigenphase with `|L(E - E0)|` up to `K` (plus a margin) and
/// cross-checks the set against Sturm bisection on the same energy window.
///
/// Fails with [`Error::SpectralEdge`] when the theta window leaves `(0, pi)` or
/// the Lipschitz neighbourhood of `theta0`, and with [`Error::OracleMismatch`]
/// when the two eigensolvers disagree.
pub fn local_point_process(
    op: &TridiagonalOperator,
    theta0: f64,
    window_k: f64,
) -> Result<PointProcessSample> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(invalid("theta0", format!("must lie inside (0, pi), got {theta0}")));
    }
    if !(window_k.is_finite() && window_k > 0.0) {
        return Err(invalid("window_k", format!("must be positive, got {window_k}")));
    }
    let size = op.len();
    let l = size as f64;
    let half = window_half_width(theta0, window_k, size) / l;
    let (lo, hi) = (theta0 - half, theta0 + half);
    if lo <= 0.0 || hi >= std::f64::consts::PI {
        return Err(Error::SpectralEdge {
            lo,
            hi,
            reason: "theta window leaves (0, pi)".into(),
        });
    }
    if half >= gamma_neighborhood(theta0) {
        return Err(Error::SpectralEdge {
            lo,
            hi,
            reason: format!(
                "half-width {half} exceeds the neighbourhood {}",
                gamma_neighborhood(theta0)
            ),
        });
    }

    let roots = eigenphases_in_window(op, lo, hi, DEFAULT_ROOT_TOLERANCE)?;
    let e0 = 2.0 * theta0.cos();
    let thetas: Vec<f64> = roots.iter().map(|r| r.theta_root).collect();
    let x_points: Vec<f64> = thetas.iter().map(|t| l * (t - theta0)).collect();
    let energy_points: Vec<f64> = roots.iter().map(|r| l * (r.energy - e0)).collect();
    let multiples: Vec<i64> = roots.iter().map(|r| r.multiple_index).collect();

    if x_points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::OracleMismatch("eigenphases not strictly increasing".into()));
    }

    let enumeration_offset = x_points
        .iter()
        .zip(&multiples)
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(b.0.total_cmp(a.0)))
        .map(|(_, &k)| k);

    let scale = window_k * window_k / l;
    let max_remainder_ratio = x_points
        .iter()
        .zip(&energy_points)
        .map(|(x, e)| (e + 2.0 * theta0.sin() * x).abs() / scale)
        .fold(0.0, f64::max);

    // Sturm oracle on the image of the theta window.
    let query = SpectralQuery::new(op, 2.0 * hi.cos(), 2.0 * lo.cos(), ORACLE_BISECTION_TOLERANCE)?;
    let mut sturm = bisect_eigenvalues(&query);
    sturm.reverse();
    if sturm.len() != roots.len() {
        return Err(Error::OracleMismatch(format!(
            "Pruefer found {} eigenvalues in ({lo}, {hi}), Sturm found {}",
            roots.len(),
            sturm.len()
        )));
    }
    let mut oracle_max_energy_deviation: f64 = 0.0;
    let mut oracle_max_x_deviation: f64 = 0.0;
    for (root, &e) in roots.iter().zip(&sturm) {
        oracle_max_energy_deviation = oracle_max_energy_deviation.max((root.energy - e).abs());
        let theta_oracle = (0.5 * e).clamp(-1.0, 1.0).acos();
        oracle_max_x_deviation = oracle_max_x_deviation.max(l * (root.theta_root - theta_oracle).abs());
    }
    if oracle_max_energy_deviation > ORACLE_ENERGY_TOLERANCE {
        return Err(Error::OracleMismatch(format!(
            "energy deviation {oracle_max_energy_deviation:e} exceeds {ORACLE_ENERGY_TOLERANCE:e}"
        )));
    }

    Ok(PointProcessSample {
        theta0,
        window_k,
        size,
        thetas,
        x_points,
        energy_points,
        multiples,
        enumeration_offset,
        max_remainder_ratio,
        oracle_max_energy_deviation,
        oracle_max_x_deviation,
        realization: None,
    })
}

/// A test function given by samples, linearly interpolated and zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(invalid("grid", "needs at least two nodes"));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("grid", "nodes and values must be finite"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "nodes must be strictly increasing"));
        }
        Ok(Self { grid, values })
    }

    /// Smallest interval outside which the interpolant vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|&v| v != 0.0)?;
        let last = self.values.iter().rposition(|&v| v != 0.0)?;
        let lo = self.grid[first.saturating_sub(1)];
        let hi = self.grid[(last + 1).min(self.grid.len() - 1)];
        Some((lo, hi))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        let j = self.grid.partition_point(|&g| g <= x);
        if j == n {
            return self.values[n - 1];
        }
        if j == 0 {
            return self.values[0];
        }
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let t = (x - x0) / (x1 - x0);
        self.values[j - 1] + t * (self.values[j] - self.values[j - 1])
    }
}

/// `sum_i f(L(E_i - E0))` over the sample's energy points.
///
/// The support of `f` must sit inside `[-K, K]`; anything wider would be
/// silently truncated by the window and is rejected.
pub fn evaluate_linear_statistic(sample: &PointProcessSample, f: &SampledFunction) -> Result<f64> {
    if let Some((lo, hi)) = f.support() {
        if lo < -sample.window_k || hi > sample.window_k {
            return Err(invalid(
                "f",
                format!("support [{lo}, {hi}] exceeds the window [-{k}, {k}]", k = sample.window_k),
            ));
        }
    }
    Ok(sample.energy_points.iter().map(|&e| f.eval(e)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn free_sample() -> PointProcessSample {
        local_point_process(&TridiagonalOperator::free(99).unwrap(), FRAC_PI_2, 10.0).unwrap()
    }

    #[test]
    fn free_lattice_points() {
        let s = free_sample();
        let spacing = 99.0 * PI / 100.0;
        assert_eq!(s.len(), 3);
        for (x, i) in s.x_points.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((x - i * spacing).abs() < 1e-11, "{x}");
        }
        assert_eq!(s.enumeration_offset, Some(50));
        assert_eq!(s.indices(), vec![-1, 0, 1]);
        assert!(s.oracle_max_energy_deviation < 1e-12);
    }

    #[test]
    fn bump_statistic_on_free_lattice() {
        let s = free_sample();
        let bump = SampledFunction::new(vec![-3.5, -3.0, 3.0, 3.5], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(evaluate_linear_statistic(&s, &bump).unwrap(), 1.0);
        let zero = SampledFunction::new(vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(evaluate_linear_statistic(&s, &zero).unwrap(), 0.0);
    }

    #[test]
    fn wide_support_rejected() {
        let s = free_sample();
        let wide = SampledFunction::new(vec![-12.0, 0.0, 12.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(evaluate_linear_statistic(&s, &wide).is_err());
        // zero tails beyond the window do not count as support
        let padded =
            SampledFunction::new(vec![-50.0, -2.0, 0.0, 2.0, 50.0], vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(padded.support(), Some((-2.0, 2.0)));
        assert_eq!(evaluate_linear_statistic(&s, &padded).unwrap(), 1.0);
    }

    #[test]
    fn interpolation() {
        let f = SampledFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 4.0, 0.0]).unwrap();
        assert_eq!(f.eval(0.5), 3.0);
        assert_eq!(f.eval(2.0), 2.0);
        assert_eq!(f.eval(3.0), 0.0);
        assert_eq!(f.eval(-0.1), 0.0);
        assert!(SampledFunction::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn single_site() {
        let op = TridiagonalOperator::from_diagonal(vec![0.3]).unwrap();
        let theta0 = (0.15f64).acos();
        let s = local_point_process(&op, theta0, 0.05).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.x_points[0].abs() < 1e-12);
        // y_2 crosses pi at the root: the one eigenvalue at or above E0
        assert_eq!(s.enumeration_offset, Some(1));
    }

    #[test]
    fn edge_window_rejected() {
        let op = TridiagonalOperator::free(10).unwrap();
        assert!(matches!(
            local_point_process(&op, 0.05, 5.0),
            Err(Error::SpectralEdge { .. })
        ));
    }
}
