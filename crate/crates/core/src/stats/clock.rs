use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use super::mean_std;
use super::process::local_point_process;
use crate::error::{invalid, Result};
use crate::model::{build_hamiltonian, sample_disorder, DisorderDistribution, DisorderRealization, ModelParams, Variant};
use crate::pruefer::end_phase;

/// Ensemble protocol for the clock-spacing experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub distribution: DisorderDistribution,
    pub alpha: f64,
    pub variant: Variant,
    pub theta0: f64,
    pub window_k: f64,
    /// System sizes `L`, increasing.
    pub sizes: Vec<usize>,
    pub realizations: usize,
    pub master_seed: u64,
    pub histogram_bins: usize,
    /// Upper edge of the spacing histogram; the lower edge is 0.
    pub histogram_max: f64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.sizes.is_empty() {
            return Err(invalid("sizes", "at least one system size is required"));
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sizes", "must be strictly increasing"));
        }
        for &l in &self.sizes {
            ModelParams::new(self.alpha, l, self.variant, self.theta0)?;
        }
        if !(self.window_k.is_finite() && self.window_k > 0.0) {
            return Err(invalid("window_k", format!("must be positive, got {}", self.window_k)));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        if self.histogram_bins == 0 {
            return Err(invalid("histogram_bins", "must be at least 1"));
        }
        if !(self.histogram_max.is_finite() && self.histogram_max > 0.0) {
            return Err(invalid("histogram_max", "must be positive"));
        }
        Ok(())
    }

    fn params(&self, size: usize) -> ModelParams {
        ModelParams::new(self.alpha, size, self.variant, self.theta0).expect("validated")
    }
}

/// What one realization contributes at one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub size: usize,
    pub realization: u64,
    /// Points with `|L(E_i - E0)| < K`.
    pub x_points: Vec<f64>,
    /// Enumeration index of each point.
    pub indices: Vec<i64>,
    /// Nearest-neighbour gaps of `x_points`.
    pub gaps: Vec<f64>,
    pub enumeration_offset: i64,
    /// `phi = n pi - (L+1) theta0 - g_hat`, reduced to `[0, pi)`.
    pub offset: f64,
    /// Mean of `x_i - i pi - phi` over the points; tends to 0 as the phase converges.
    pub residual: f64,
    pub max_remainder_ratio: f64,
    pub oracle_max_energy_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub realization: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins on `[0, max]`; values outside land in the end bins.
    pub fn build(values: &[f64], bins: usize, max: f64) -> Self {
        let width = max / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let b = ((v / width).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }
}

/// Pooled statistics at one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingStats {
    pub size: usize,
    /// Number of pooled gaps.
    pub sample_count: usize,
    pub mean_spacing: Option<f64>,
    pub std_spacing: Option<f64>,
    pub histogram: Histogram,
    pub offset_samples: Vec<f64>,
    pub residual_mean: Option<f64>,
    pub residual_variance: Option<f64>,
    pub realizations_used: usize,
    pub excluded: Vec<Excluded>,
    pub max_remainder_ratio: f64,
    pub oracle_max_energy_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockReport {
    pub spec: EnsembleSpec,
    pub per_size: Vec<SpacingStats>,
    /// Ordered by size, then realization index.
    pub records: Vec<RealizationRecord>,
}

fn realization_records(spec: &EnsembleSpec, index: u64) -> Vec<std::result::Result<RealizationRecord, String>> {
    let l_max = *spec.sizes.last().expect("validated");
    let full = match sample_disorder(&spec.distribution, l_max, spec.master_seed, index) {
        Ok(r) => r,
        Err(e) => return spec.sizes.iter().map(|_| Err(e.to_string())).collect(),
    };
    let operator_at = |size: usize| {
        let prefix = DisorderRealization::from_values(full.values()[..size].to_vec(), spec.master_seed, index);
        build_hamiltonian(&spec.params(size), &prefix)
    };
    // plug-in estimate of the limiting phase: ytilde_{L+1}(theta0) at the largest L
    let g_hat = match operator_at(l_max).and_then(|op| end_phase(&op, spec.theta0)) {
        Ok((_, y_tilde)) => y_tilde,
        Err(e) => return spec.sizes.iter().map(|_| Err(e.to_string())).collect(),
    };

    spec.sizes
        .iter()
        .map(|&size| {
            let op = operator_at(size).map_err(|e| e.to_string())?;
            let sample = local_point_process(&op, spec.theta0, spec.window_k).map_err(|e| e.to_string())?;
            let n = sample
                .enumeration_offset
                .ok_or_else(|| "no eigenvalue in the window".to_string())?;
            let l = size as f64;
            let raw = n as f64 * PI - (l + 1.0) * spec.theta0 - g_hat;
            let offset = raw.rem_euclid(PI);

            let mut x_points = Vec::new();
            let mut indices = Vec::new();
            let mut residual_sum = 0.0;
            for ((&x, &e), &k) in sample.x_points.iter().zip(&sample.energy_points).zip(&sample.multiples) {
                if e.abs() < spec.window_k {
                    x_points.push(x);
                    indices.push(k - n);
                    residual_sum += x - (k - n) as f64 * PI - raw;
                }
            }
            if x_points.is_empty() {
                return Err("no eigenvalue with |L(E - E0)| < K".to_string());
            }
            let residual = residual_sum / x_points.len() as f64;
            let gaps = x_points.windows(2).map(|w| w[1] - w[0]).collect();
            Ok(RealizationRecord {
                size,
                realization: index,
                x_points,
                indices,
                gaps,
                enumeration_offset: n,
                offset,
                residual,
                max_remainder_ratio: sample.max_remainder_ratio,
                oracle_max_energy_deviation: sample.oracle_max_energy_deviation,
            })
        })
        .collect()
}

/// Runs the ensemble on the current rayon pool. Realizations are evaluated
/// independently and merged in index order, so the report does not depend on
/// the number of worker threads.
pub fn clock_spacing_experiment(spec: &EnsembleSpec) -> Result<ClockReport> {
    spec.validate()?;
    let per_realization: Vec<_> = (0..spec.realizations as u64)
        .into_par_iter()
        .map(|index| realization_records(spec, index))
        .collect();

    let mut per_size = Vec::with_capacity(spec.sizes.len());
    let mut records = Vec::new();
    for (s, &size) in spec.sizes.iter().enumerate() {
        let mut gaps = Vec::new();
        let mut offsets = Vec::new();
        let mut residuals = Vec::new();
        let mut excluded = Vec::new();
        let mut max_remainder_ratio: f64 = 0.0;
        let mut oracle_dev: f64 = 0.0;
        for (index, results) in per_realization.iter().enumerate() {
            match &results[s] {
                Ok(rec) => {
                    gaps.extend_from_slice(&rec.gaps);
                    offsets.push(rec.offset);
                    residuals.push(rec.residual);
                    max_remainder_ratio = max_remainder_ratio.max(rec.max_remainder_ratio);
                    oracle_dev = oracle_dev.max(rec.oracle_max_energy_deviation);
                    records.push(rec.clone());
                }
                Err(reason) => excluded.push(Excluded {
                    realization: index as u64,
                    reason: reason.clone(),
                }),
            }
        }
        let spacing = mean_std(&gaps);
        let residual = mean_std(&residuals);
        per_size.push(SpacingStats {
            size,
            sample_count: gaps.len(),
            mean_spacing: spacing.map(|(m, _)| m),
            std_spacing: spacing.map(|(_, s)| s),
            histogram: Histogram::build(&gaps, spec.histogram_bins, spec.histogram_max),
            offset_samples: offsets,
            residual_mean: residual.map(|(m, _)| m),
            residual_variance: residual.map(|(_, s)| s * s),
            realizations_used: spec.realizations - excluded.len(),
            excluded,
            max_remainder_ratio,
            oracle_max_energy_deviation: oracle_dev,
        });
    }
    Ok(ClockReport {
        spec: spec.clone(),
        per_size,
        records,
    })
}

/// Distance between `a` and `b` on the unit circle `R / Z`.
fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// The `count` sizes in `range` whose `frac((L+1) theta / pi)` is closest to
/// `target` on the circle, ascending. Ties go to the smaller `L`.
pub fn resonant_subsequence(theta: f64, target: f64, count: usize, range: RangeInclusive<usize>) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&target) {
        return Err(invalid("target", format!("must lie in [0, 1), got {target}")));
    }
    if count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    if range.is_empty() || *range.start() == 0 {
        return Err(invalid("range", "must be a non-empty range of positive sizes"));
    }
    let ratio = theta / PI;
    let mut scored: Vec<(f64, usize)> = range
        .map(|l| (circular_distance(((l + 1) as f64 * ratio).fract(), target), l))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = scored.into_iter().take(count).map(|(_, l)| l).collect();
    chosen.sort_unstable();
    Ok(chosen)
}
