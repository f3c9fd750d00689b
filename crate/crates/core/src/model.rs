//! The random operator family.
//!
//! `H u_n = u_{n+1} + u_{n-1} + a_n w_n u_n` on `{1, ..., L}` with Dirichlet
//! boundary, where the coupling envelope `a_n` is either `n^-alpha` (decaying
//! site potential) or the constant `L^-alpha`, and `w_n` are i.i.d. draws from
//! a symmetric, possibly fat-tailed, single-site law.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of the coupling envelope `a_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `a_n = n^-alpha`.
    DecayingSite,
    /// `a_n = L^-alpha` for every site.
    UniformScaled,
}

/// Decay exponent, system size, coupling variant and reference energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    size: usize,
    variant: Variant,
    energy_theta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, size: usize, variant: Variant, energy_theta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be a positive real, got {alpha}")));
        }
        if size == 0 {
            return Err(invalid("size", "must be at least 1"));
        }
        if !(energy_theta > 0.0 && energy_theta < PI) {
            return Err(invalid(
                "theta",
                format!("must lie strictly inside (0, pi), got {energy_theta}"),
            ));
        }
        Ok(Self {
            alpha,
            size,
            variant,
            energy_theta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn energy_theta(&self) -> f64 {
        self.energy_theta
    }

    /// Reference energy `E0 = 2 cos(theta)`.
    pub fn reference_energy(&self) -> f64 {
        2.0 * self.energy_theta.cos()
    }

    /// Same model at a different system size.
    pub fn with_size(&self, size: usize) -> Result<Self> {
        Self::new(self.alpha, size, self.variant, self.energy_theta)
    }

    /// Coupling `a_n` at site `n` (1-based).
    pub fn coupling(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.size {
            return Err(Error::SiteOutOfRange {
                index: n,
                size: self.size,
            });
        }
        Ok(self.coupling_unchecked(n))
    }

    fn coupling_unchecked(&self, n: usize) -> f64 {
        match self.variant {
            Variant::DecayingSite => (n as f64).powf(-self.alpha),
            Variant::UniformScaled => (self.size as f64).powf(-self.alpha),
        }
    }

    /// All couplings `a_1, ..., a_L`.
    pub fn couplings(&self) -> Vec<f64> {
        (1..=self.size).map(|n| self.coupling_unchecked(n)).collect()
    }
}

/// Symmetric single-site law of the disorder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisorderDistribution {
    PointMassZero,
    #[serde(rename = "bernoulli-pm1")]
    BernoulliPm1,
    Uniform { half_width: f64 },
    /// `sign * scale * U^(-1/delta)` with `U` uniform on `(0, 1]`.
    SymmetrizedPareto { delta: f64, scale: f64 },
    Cauchy { scale: f64 },
}

impl DisorderDistribution {
    pub fn uniform(half_width: f64) -> Result<Self> {
        let d = Self::Uniform { half_width };
        d.validate().map(|_| d)
    }

    pub fn symmetrized_pareto(delta: f64, scale: f64) -> Result<Self> {
        let d = Self::SymmetrizedPareto { delta, scale };
        d.validate().map(|_| d)
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        let d = Self::Cauchy { scale };
        d.validate().map(|_| d)
    }

    /// Checks the parameters. Deserialized values bypass the constructors,
    /// so every consumer of a distribution calls this first.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be a positive real, got {v}")))
            }
        }
        match *self {
            Self::PointMassZero | Self::BernoulliPm1 => Ok(()),
            Self::Uniform { half_width } => positive("half_width", half_width),
            Self::SymmetrizedPareto { delta, scale } => {
                positive("delta", delta)?;
                positive("scale", scale)
            }
            Self::Cauchy { scale } => positive("scale", scale),
        }
    }

    /// Tail exponent `delta` in `P(|w| > R) <= C R^-delta`; infinite for bounded laws.
    pub fn tail_exponent(&self) -> f64 {
        match *self {
            Self::SymmetrizedPareto { delta, .. } => delta,
            Self::Cauchy { .. } => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// A constant `C` valid for every `R > 0` in `P(|w| > R) <= C R^-delta`.
    /// Zero for bounded laws, where the tail vanishes past the support.
    pub fn tail_constant(&self) -> f64 {
        match *self {
            Self::SymmetrizedPareto { delta, scale } => scale.powf(delta),
            Self::Cauchy { scale } => 2.0 * scale / PI,
            _ => 0.0,
        }
    }

    /// Exact `P(|w| > r)` for `r >= 0`.
    pub fn tail_probability(&self, r: f64) -> f64 {
        match *self {
            Self::PointMassZero => 0.0,
            Self::BernoulliPm1 => {
                if r < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { half_width } => (1.0 - r / half_width).clamp(0.0, 1.0),
            Self::SymmetrizedPareto { delta, scale } => (r / scale).powf(-delta).min(1.0),
            Self::Cauchy { scale } => 1.0 - (r / scale).atan() / FRAC_PI_2,
        }
    }

    /// One draw, consuming a single 64-bit word of `rng` (none for the point mass).
    ///
    /// The low bit picks the sign and the remaining 53 bits give a magnitude
    /// variate on `(0, 1]`, so every law is exactly symmetric.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Self::PointMassZero = self {
            return 0.0;
        }
        let word = rng.next_u64();
        let sign = if word & 1 == 0 { 1.0 } else { -1.0 };
        let u = ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let magnitude = match *self {
            Self::PointMassZero => unreachable!(),
            Self::BernoulliPm1 => 1.0,
            Self::Uniform { half_width } => half_width * u,
            Self::SymmetrizedPareto { delta, scale } => scale * u.powf(-1.0 / delta),
            Self::Cauchy { scale } => scale * (FRAC_PI_2 * u).tan(),
        };
        sign * magnitude
    }
}

/// Disorder values `w_1, ..., w_L` together with their seed provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    values: Vec<f64>,
    master_seed: u64,
    realization_index: u64,
}

impl DisorderRealization {
    /// Wraps explicit values, e.g. hand-built potentials in tests.
    pub fn from_values(values: Vec<f64>, master_seed: u64, realization_index: u64) -> Self {
        Self {
            values,
            master_seed,
            realization_index,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn realization_index(&self) -> u64 {
        self.realization_index
    }
}

/// Random stream for realization `index` under `master_seed`.
///
/// ChaCha8 keyed by the master seed, one stream per realization index. Streams
/// are independent of evaluation order, and the first `L` draws of a stream do
/// not depend on how many are eventually consumed.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Draws `size` i.i.d. values. Realizations of different sizes with the same
/// `(master_seed, index)` agree on their common prefix.
pub fn sample_disorder(
    dist: &DisorderDistribution,
    size: usize,
    master_seed: u64,
    index: u64,
) -> Result<DisorderRealization> {
    dist.validate()?;
    if size == 0 {
        return Err(invalid("size", "must be at least 1"));
    }
    let mut rng = realization_rng(master_seed, index);
    let values = (0..size).map(|_| dist.sample(&mut rng)).collect();
    Ok(DisorderRealization {
        values,
        master_seed,
        realization_index: index,
    })
}

/// Symmetric tridiagonal operator with diagonal `d_n` and unit off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diagonal: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn from_diagonal(diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(invalid("diagonal", "operator needs at least one site"));
        }
        if let Some(bad) = diagonal.iter().find(|d| !d.is_finite()) {
            return Err(invalid("diagonal", format!("non-finite entry {bad}")));
        }
        Ok(Self { diagonal })
    }

    /// Free Dirichlet Laplacian on `size` sites.
    pub fn free(size: usize) -> Result<Self> {
        Self::from_diagonal(vec![0.0; size])
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Gershgorin bound: the spectrum lies in `[-b, b]`.
    pub fn spectral_bound(&self) -> f64 {
        let hop = if self.len() > 1 { 2.0 } else { 0.0 };
        hop + self.max_abs_diagonal()
    }

    /// Leading principal `size x size` block.
    pub fn truncated(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.len() {
            return Err(invalid("size", format!("truncation {size} outside 1..={}", self.len())));
        }
        Self::from_diagonal(self.diagonal[..size].to_vec())
    }
}

/// Assembles `H_L` with `d_n = a_n w_n`.
pub fn build_hamiltonian(
    params: &ModelParams,
    disorder: &DisorderRealization,
) -> Result<TridiagonalOperator> {
    if disorder.len() != params.size() {
        return Err(Error::LengthMismatch {
            expected: params.size(),
            actual: disorder.len(),
        });
    }
    let diagonal = params
        .couplings()
        .into_iter()
        .zip(disorder.values())
        .map(|(a, w)| a * w)
        .collect();
    TridiagonalOperator::from_diagonal(diagonal)
}
