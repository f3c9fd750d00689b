//! Local eigenvalue statistics around a reference energy.
//!
//! * [`process`]: the rescaled point process `x_i = L(theta_i - theta0)` and
//!   its linear statistics `sum_i f(L(E_i - E0))`.
//! * [`clock`]: nearest-neighbour spacings and lattice offsets pooled over
//!   disorder ensembles, plus resonant system-size selection.
//! * [`tail`]: the exit index `n^w`, the events `B_N` and the decay of
//!   `ytilde_M - ytilde_N` restricted to them.

pub mod clock;
pub mod process;
pub mod tail;

pub use clock::{
    clock_spacing_experiment, resonant_subsequence, ClockReport, EnsembleSpec, Histogram,
    RealizationRecord, SpacingStats,
};
pub use process::{evaluate_linear_statistic, local_point_process, PointProcessSample, SampledFunction};
pub use tail::{
    phase_convergence_diagnostic, tail_exit_index, Lemma4Row, MomentRow, SupDiscrepancySpec,
    TailDiagnostics, TailSpec,
};

/// Mean and sample standard deviation; `None` for fewer than two values.
pub(crate) fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}
