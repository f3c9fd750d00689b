use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{build_hamiltonian, sample_disorder, DisorderDistribution, ModelParams, TridiagonalOperator, Variant};
use crate::pruefer::{end_phase, gamma_neighborhood, y_tilde_at};

/// `n^w = max{n : |d_n| >= n^-beta |sin theta|}` over the sites of `op`, 0 if no site qualifies.
pub fn tail_exit_index(op: &TridiagonalOperator, beta: f64, theta: f64) -> usize {
    let s = theta.sin().abs();
    op.diagonal()
        .iter()
        .enumerate()
        .rev()
        .find(|(i, d)| d.abs() >= ((i + 1) as f64).powf(-beta) * s)
        .map_or(0, |(i, _)| i + 1)
}

/// Lemma-4 style sup-discrepancy `sup_{|x|<K} |ytilde_{L+1}(theta + x/L) - ytilde_{L+1}(theta)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupDiscrepancySpec {
    pub sizes: Vec<usize>,
    pub window_k: f64,
    /// Midpoint grid `x_j = -K + 2K (j + 1/2) / G`.
    pub grid_points: usize,
    pub threshold: f64,
    /// Realizations per size; the sup is much more expensive than the moment.
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSpec {
    pub distribution: DisorderDistribution,
    pub alpha: f64,
    pub variant: Variant,
    pub theta: f64,
    pub beta: f64,
    /// Cut points `N`, increasing, each below `m`.
    pub n_list: Vec<usize>,
    /// Far index `M`; realizations have `M` sites.
    pub m: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub sup: Option<SupDiscrepancySpec>,
}

impl TailSpec {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        ModelParams::new(self.alpha, self.m, self.variant, self.theta)?;
        let upper = self.alpha - 1.0 / self.distribution.tail_exponent();
        if !(self.beta > 0.5 && self.beta < upper) {
            return Err(invalid(
                "beta",
                format!("must lie in (1/2, {upper}), got {}", self.beta),
            ));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("n_list", "must be non-empty and strictly increasing"));
        }
        if self.n_list[0] == 0 || *self.n_list.last().unwrap() >= self.m {
            return Err(invalid("n_list", format!("entries must lie in 1..{}", self.m)));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        if let Some(sup) = &self.sup {
            if sup.sizes.is_empty() || sup.grid_points == 0 || sup.realizations == 0 {
                return Err(invalid("sup", "sizes, grid_points and realizations must be non-empty"));
            }
            if !(sup.window_k.is_finite() && sup.window_k > 0.0) || !(sup.threshold > 0.0) {
                return Err(invalid("sup", "window_k and threshold must be positive"));
            }
            let gamma = gamma_neighborhood(self.theta);
            for &l in &sup.sizes {
                ModelParams::new(self.alpha, l, self.variant, self.theta)?;
                if sup.window_k / l as f64 >= gamma {
                    return Err(Error::SpectralEdge {
                        lo: self.theta - sup.window_k / l as f64,
                        hi: self.theta + sup.window_k / l as f64,
                        reason: format!("K/L must stay below gamma = {gamma}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    /// Realizations in `B_N = {n^w < N}`.
    pub b_n_count: usize,
    pub b_n_frequency: f64,
    /// `(1/R) sum_{w in B_N} |ytilde_M - ytilde_N|^2`, the integral over `B_N`.
    /// `None` when `B_N` is empty.
    pub restricted_moment: Option<f64>,
    /// Same sum divided by `|B_N|` instead of `R`.
    pub conditional_moment: Option<f64>,
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma4Row {
    pub size: usize,
    pub realizations: usize,
    /// Fraction of realizations with sup above the threshold.
    pub exceed_fraction: f64,
    pub mean_sup: f64,
    pub max_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDiagnostics {
    pub beta: f64,
    pub theta: f64,
    pub m: usize,
    pub realizations: usize,
    pub n_omega_samples: Vec<usize>,
    pub moments: Vec<MomentRow>,
    /// `C` in the envelope `C N^(1 - 2 beta)`, fitted at the smallest `N`.
    pub envelope_constant: Option<f64>,
    pub lemma4: Vec<Lemma4Row>,
}

struct RealizationTail {
    exit_index: usize,
    /// `ytilde_M - ytilde_N` for each `N` in the list.
    differences: Vec<f64>,
}

fn one_realization(spec: &TailSpec, params: &ModelParams, index: u64) -> Result<RealizationTail> {
    let disorder = sample_disorder(&spec.distribution, spec.m, spec.master_seed, index)?;
    let op = build_hamiltonian(params, &disorder)?;
    let mut wanted = spec.n_list.clone();
    wanted.push(spec.m);
    let yt = y_tilde_at(&op, spec.theta, &wanted)?;
    let far = yt[yt.len() - 1];
    Ok(RealizationTail {
        exit_index: tail_exit_index(&op, spec.beta, spec.theta),
        differences: yt[..yt.len() - 1].iter().map(|y| far - y).collect(),
    })
}

fn sup_discrepancy(spec: &TailSpec, sup: &SupDiscrepancySpec, size: usize, index: u64) -> Result<f64> {
    let params = ModelParams::new(spec.alpha, size, spec.variant, spec.theta)?;
    let disorder = sample_disorder(&spec.distribution, size, spec.master_seed, index)?;
    let op = build_hamiltonian(&params, &disorder)?;
    let (_, centre) = end_phase(&op, spec.theta)?;
    let k = sup.window_k;
    let g = sup.grid_points as f64;
    let mut worst: f64 = 0.0;
    for j in 0..sup.grid_points {
        let x = -k + 2.0 * k * (j as f64 + 0.5) / g;
        let (_, yt) = end_phase(&op, spec.theta + x / size as f64)?;
        worst = worst.max((yt - centre).abs());
    }
    Ok(worst)
}

/// Moments of `ytilde_M - ytilde_N` on the events `B_N`, and optionally the
/// sup-discrepancy near `theta`. Realizations run on the current rayon pool
/// and are reduced in index order.
pub fn phase_convergence_diagnostic(spec: &TailSpec) -> Result<TailDiagnostics> {
    spec.validate()?;
    let params = ModelParams::new(spec.alpha, spec.m, spec.variant, spec.theta)?;
    let per: Vec<RealizationTail> = (0..spec.realizations as u64)
        .into_par_iter()
        .map(|i| one_realization(spec, &params, i))
        .collect::<Result<_>>()?;

    let r = spec.realizations as f64;
    let exponent = 1.0 - 2.0 * spec.beta;
    let mut moments: Vec<MomentRow> = spec
        .n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let (count, sum) = per
                .iter()
                .filter(|t| t.exit_index < n)
                .fold((0usize, 0.0), |(c, s), t| (c + 1, s + t.differences[j].powi(2)));
            let insufficient = count == 0;
            MomentRow {
                n,
                b_n_count: count,
                b_n_frequency: count as f64 / r,
                restricted_moment: (!insufficient).then_some(sum / r),
                conditional_moment: (!insufficient).then(|| sum / count as f64),
                envelope: None,
            }
        })
        .collect();
    let envelope_constant = moments[0]
        .restricted_moment
        .map(|m0| m0 / (moments[0].n as f64).powf(exponent));
    if let Some(c) = envelope_constant {
        for row in &mut moments {
            row.envelope = Some(c * (row.n as f64).powf(exponent));
        }
    }

    let mut lemma4 = Vec::new();
    if let Some(sup) = &spec.sup {
        for &size in &sup.sizes {
            let sups: Vec<f64> = (0..sup.realizations as u64)
                .into_par_iter()
                .map(|i| sup_discrepancy(spec, sup, size, i))
                .collect::<Result<_>>()?;
            let n = sups.len() as f64;
            lemma4.push(Lemma4Row {
                size,
                realizations: sups.len(),
                exceed_fraction: sups.iter().filter(|&&s| s > sup.threshold).count() as f64 / n,
                mean_sup: sups.iter().sum::<f64>() / n,
                max_sup: sups.iter().copied().fold(0.0, f64::max),
            });
        }
    }

    Ok(TailDiagnostics {
        beta: spec.beta,
        theta: spec.theta,
        m: spec.m,
        realizations: spec.realizations,
        n_omega_samples: per.iter().map(|t| t.exit_index).collect(),
        moments,
        envelope_constant,
        lemma4,
    })
}
