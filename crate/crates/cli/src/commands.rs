use std::f64::consts::PI;

use anderson_clock::model::{build_hamiltonian, sample_disorder, DisorderRealization, ModelParams, TridiagonalOperator};
use anderson_clock::pruefer::{eigenphases_in_window, end_phase, pruefer_sweep, DEFAULT_ROOT_TOLERANCE};
use anderson_clock::stats::{
    clock_spacing_experiment, local_point_process, phase_convergence_diagnostic, resonant_subsequence,
    Lemma4Row, MomentRow, SpacingStats,
};
use anderson_clock::sturm::{all_eigenvalues, bisect_eigenvalues, SpectralQuery};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{real, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    PrueferTrace,
    Process,
    Ensemble,
    DiagnoseTail,
    Subsequence,
    CompareOracle,
}

/// Fills in the defaulted sections used by `command`.
pub fn resolve(config: &mut Config, command: Command) {
    config.disorder.get_or_insert(anderson_clock::model::DisorderDistribution::PointMassZero);
    match command {
        Command::Spectrum => drop(config.spectrum.get_or_insert_with(Default::default)),
        Command::PrueferTrace => {
            let theta0 = config.model.theta0;
            let t = config.pruefer_trace.get_or_insert_with(Default::default);
            t.theta.get_or_insert(theta0);
        }
        Command::Process => drop(config.process.get_or_insert_with(Default::default)),
        Command::Ensemble => drop(config.ensemble.get_or_insert_with(Default::default)),
        Command::DiagnoseTail => {
            let theta0 = config.model.theta0;
            let t = config.diagnose_tail.get_or_insert_with(Default::default);
            t.theta.get_or_insert(theta0);
        }
        Command::Subsequence => drop(config.subsequence.get_or_insert_with(Default::default)),
        Command::CompareOracle => drop(config.compare_oracle.get_or_insert_with(Default::default)),
    }
}

fn positive(field: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be a positive real, got {value}")))
    }
}

/// Checks every parameter `command` will use, before anything is computed or written.
pub fn validate(config: &Config, command: Command) -> Result<(), CliError> {
    config.disorder().validate()?;
    match command {
        Command::Spectrum => {
            config.model_params()?;
            positive("spectrum.tolerance", config.spectrum.as_ref().unwrap().tolerance)?;
        }
        Command::PrueferTrace => {
            config.model_params()?;
            let theta = config.pruefer_trace.as_ref().unwrap().theta.unwrap();
            if !(theta > 0.0 && theta < PI) {
                return Err(CliError::config("pruefer_trace.theta", format!("must lie in (0, pi), got {theta}")));
            }
        }
        Command::Process => {
            config.model_params()?;
            positive("process.window_k", config.process.as_ref().unwrap().window_k)?;
        }
        Command::Ensemble => config.ensemble_spec().validate()?,
        Command::DiagnoseTail => config.tail_spec().validate()?,
        Command::Subsequence => {
            let s = config.subsequence.as_ref().unwrap();
            if !(0.0..1.0).contains(&s.target) {
                return Err(CliError::config("subsequence.target", format!("must lie in [0, 1), got {}", s.target)));
            }
            if s.count == 0 {
                return Err(CliError::config("subsequence.count", "must be at least 1"));
            }
            if s.l_min == 0 || s.l_min > s.l_max {
                return Err(CliError::config("subsequence.l_min", "need 1 <= l_min <= l_max"));
            }
            let theta = config.model.theta0;
            if !(theta > 0.0 && theta < PI) {
                return Err(CliError::config("theta0", format!("must lie in (0, pi), got {theta}")));
            }
        }
        Command::CompareOracle => {
            config.model_params()?;
            let c = config.compare_oracle.as_ref().unwrap();
            positive("compare_oracle.tolerance", c.tolerance)?;
            if let Some(k) = c.window_k {
                positive("compare_oracle.window_k", k)?;
            }
        }
    }
    Ok(())
}

pub fn run(config: &Config, command: Command, out: &mut OutputDir) -> Result<String, CliError> {
    match command {
        Command::Spectrum => spectrum(config, out),
        Command::PrueferTrace => trace(config, out),
        Command::Process => process(config, out),
        Command::Ensemble => ensemble(config, out),
        Command::DiagnoseTail => diagnose_tail(config, out),
        Command::Subsequence => subsequence(config, out),
        Command::CompareOracle => compare_oracle(config, out),
    }
}

fn realization(config: &Config, index: u64) -> Result<(ModelParams, DisorderRealization, TridiagonalOperator), CliError> {
    let params = config.model_params()?;
    let disorder = sample_disorder(config.disorder(), params.size(), config.run.master_seed, index)?;
    let op = build_hamiltonian(&params, &disorder)?;
    Ok((params, disorder, op))
}

fn write_realization(out: &mut OutputDir, params: &ModelParams, disorder: &DisorderRealization, op: &TridiagonalOperator) -> Result<(), CliError> {
    let rows = disorder
        .values()
        .iter()
        .zip(params.couplings())
        .zip(op.diagonal())
        .enumerate()
        .map(|(i, ((w, a), d))| vec![(i + 1).to_string(), real(*w), real(a), real(*d)]);
    out.write_csv("realization.csv", &["n", "omega_n", "a_n", "d_n"], rows)
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn spectrum(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let section = config.spectrum.as_ref().unwrap();
    let (params, disorder, op) = realization(config, section.realization)?;
    let evs = all_eigenvalues(&op, section.tolerance)?;
    write_realization(out, &params, &disorder, &op)?;
    out.write_csv(
        "eigenvalues.csv",
        &["index", "energy"],
        evs.iter().enumerate().map(|(i, e)| vec![(i + 1).to_string(), real(*e)]),
    )?;
    #[derive(Serialize)]
    struct Summary {
        size: usize,
        count: usize,
        min: f64,
        max: f64,
        tolerance: f64,
    }
    out.write_json(
        "summary.json",
        &Summary {
            size: op.len(),
            count: evs.len(),
            min: evs[0],
            max: evs[evs.len() - 1],
            tolerance: section.tolerance,
        },
    )?;
    Ok(format!("spectrum: {} eigenvalues in [{:?}, {:?}]", evs.len(), evs[0], evs[evs.len() - 1]))
}

fn trace(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let section = config.pruefer_trace.as_ref().unwrap();
    let theta = section.theta.unwrap();
    let (params, disorder, op) = realization(config, section.realization)?;
    let trace = pruefer_sweep(&op, theta, false)?;
    write_realization(out, &params, &disorder, &op)?;
    out.write_csv(
        "trace.csv",
        &["n", "y_n", "y_tilde_n"],
        (1..=trace.len()).map(|n| vec![n.to_string(), real(trace.y(n)), real(trace.y_tilde()[n - 1])]),
    )?;
    let last = trace.phase(trace.len());
    #[derive(Serialize)]
    struct Summary {
        theta: f64,
        size: usize,
        y_end: f64,
        y_tilde_end: f64,
        winding: i64,
    }
    let summary = Summary {
        theta,
        size: op.len(),
        y_end: last.value(),
        y_tilde_end: trace.y_tilde()[trace.len() - 1],
        winding: last.winding(),
    };
    out.write_json("summary.json", &summary)?;
    Ok(format!(
        "pruefer-trace: y_(L+1) = {:?}, ytilde_(L+1) = {:?}, winding {}",
        summary.y_end, summary.y_tilde_end, summary.winding
    ))
}

fn process(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let section = config.process.as_ref().unwrap();
    let (params, disorder, op) = realization(config, section.realization)?;
    let sample = local_point_process(&op, config.model.theta0, section.window_k)?
        .with_realization(config.run.master_seed, section.realization);
    write_realization(out, &params, &disorder, &op)?;
    let n = sample.enumeration_offset;
    out.write_csv(
        "points.csv",
        &["i", "k", "theta", "x", "energy_scaled"],
        (0..sample.len()).map(|j| {
            let k = sample.multiples[j];
            vec![
                n.map(|n| (k - n).to_string()).unwrap_or_default(),
                k.to_string(),
                real(sample.thetas[j]),
                real(sample.x_points[j]),
                real(sample.energy_points[j]),
            ]
        }),
    )?;
    out.write_csv(
        "roots.csv",
        &["k", "theta", "energy"],
        (0..sample.len()).map(|j| {
            let energy = 2.0 * sample.thetas[j].cos();
            vec![sample.multiples[j].to_string(), real(sample.thetas[j]), real(energy)]
        }),
    )?;
    out.write_json("summary.json", &sample)?;
    Ok(format!(
        "process: {} points, enumeration offset {:?}, max remainder ratio {:?}",
        sample.len(),
        n,
        sample.max_remainder_ratio
    ))
}

fn ensemble(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let spec = config.ensemble_spec();
    let report = clock_spacing_experiment(&spec)?;
    let mut rows = Vec::new();
    for rec in &report.records {
        for (j, (x, i)) in rec.x_points.iter().zip(&rec.indices).enumerate() {
            let gap = if j == 0 { String::new() } else { real(rec.gaps[j - 1]) };
            rows.push(vec![rec.size.to_string(), rec.realization.to_string(), i.to_string(), real(*x), gap]);
        }
    }
    out.write_csv("spacings.csv", &["L", "realization", "i", "x_i", "gap"], rows)?;
    out.write_csv(
        "offsets.csv",
        &["L", "realization", "enumeration_offset", "offset", "residual"],
        report.records.iter().map(|r| {
            vec![
                r.size.to_string(),
                r.realization.to_string(),
                r.enumeration_offset.to_string(),
                real(r.offset),
                real(r.residual),
            ]
        }),
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        spec: &'a anderson_clock::stats::EnsembleSpec,
        per_size: &'a [SpacingStats],
    }
    out.write_json(
        "summary.json",
        &Summary {
            spec: &report.spec,
            per_size: &report.per_size,
        },
    )?;
    let parts: Vec<String> = report
        .per_size
        .iter()
        .map(|s| {
            format!(
                "L={} mean={} std={} gaps={} excluded={}",
                s.size,
                opt(s.mean_spacing),
                opt(s.std_spacing),
                s.sample_count,
                s.excluded.len()
            )
        })
        .collect();
    Ok(format!("ensemble: {}", parts.join("; ")))
}

fn diagnose_tail(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let spec = config.tail_spec();
    let diag = phase_convergence_diagnostic(&spec)?;
    out.write_csv(
        "diagnostics.csv",
        &["N", "moment", "envelope", "b_n_frequency", "conditional_moment"],
        diag.moments.iter().map(|m| {
            vec![
                m.n.to_string(),
                opt(m.restricted_moment),
                opt(m.envelope),
                real(m.b_n_frequency),
                opt(m.conditional_moment),
            ]
        }),
    )?;
    out.write_csv(
        "n_omega.csv",
        &["realization", "n_omega"],
        diag.n_omega_samples.iter().enumerate().map(|(i, n)| vec![i.to_string(), n.to_string()]),
    )?;
    if !diag.lemma4.is_empty() {
        out.write_csv(
            "sup_discrepancy.csv",
            &["L", "realizations", "exceed_fraction", "mean_sup", "max_sup"],
            diag.lemma4.iter().map(|r| {
                vec![
                    r.size.to_string(),
                    r.realizations.to_string(),
                    real(r.exceed_fraction),
                    real(r.mean_sup),
                    real(r.max_sup),
                ]
            }),
        )?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        beta: f64,
        theta: f64,
        m: usize,
        realizations: usize,
        envelope_constant: Option<f64>,
        moments: &'a [MomentRow],
        sup_discrepancy: &'a [Lemma4Row],
    }
    out.write_json(
        "summary.json",
        &Summary {
            beta: diag.beta,
            theta: diag.theta,
            m: diag.m,
            realizations: diag.realizations,
            envelope_constant: diag.envelope_constant,
            moments: &diag.moments,
            sup_discrepancy: &diag.lemma4,
        },
    )?;
    let parts: Vec<String> = diag
        .moments
        .iter()
        .map(|m| format!("N={} moment={} envelope={}", m.n, opt(m.restricted_moment), opt(m.envelope)))
        .collect();
    Ok(format!("diagnose-tail: {}", parts.join("; ")))
}

fn subsequence(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let s = config.subsequence.as_ref().unwrap();
    let theta = config.model.theta0;
    let sizes = resonant_subsequence(theta, s.target, s.count, s.l_min..=s.l_max)?;
    let frac = |l: usize| ((l + 1) as f64 * (theta / PI)).fract();
    out.write_csv(
        "subsequence.csv",
        &["L", "frac", "distance"],
        sizes.iter().map(|&l| {
            let d = (frac(l) - s.target).rem_euclid(1.0);
            vec![l.to_string(), real(frac(l)), real(d.min(1.0 - d))]
        }),
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        theta: f64,
        target: f64,
        sizes: &'a [usize],
    }
    out.write_json(
        "summary.json",
        &Summary {
            theta,
            target: s.target,
            sizes: &sizes,
        },
    )?;
    Ok(format!("subsequence: {} sizes, first {:?}", sizes.len(), sizes.first()))
}

fn compare_oracle(config: &Config, out: &mut OutputDir) -> Result<String, CliError> {
    let section = config.compare_oracle.as_ref().unwrap();
    let (params, disorder, op) = realization(config, section.realization)?;
    let l = op.len() as f64;
    let (theta_lo, theta_hi) = match section.window_k {
        Some(k) => {
            let theta0 = config.model.theta0;
            let (lo, hi) = (theta0 - k / l, theta0 + k / l);
            if lo <= 0.0 || hi >= PI {
                return Err(anderson_clock::Error::SpectralEdge {
                    lo,
                    hi,
                    reason: "theta window leaves (0, pi)".into(),
                }
                .into());
            }
            (lo, hi)
        }
        None => (1e-6, PI - 1e-6),
    };
    let roots = eigenphases_in_window(&op, theta_lo, theta_hi, DEFAULT_ROOT_TOLERANCE)?;
    let query = SpectralQuery::new(&op, 2.0 * theta_hi.cos(), 2.0 * theta_lo.cos(), 1e-13)?;
    let mut sturm = bisect_eigenvalues(&query);
    sturm.reverse();
    let counts_match = roots.len() == sturm.len();
    let deviations: Vec<f64> = roots.iter().zip(&sturm).map(|(r, e)| (r.energy - e).abs()).collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let pass = counts_match && max_deviation < section.tolerance;

    write_realization(out, &params, &disorder, &op)?;
    out.write_csv(
        "comparison.csv",
        &["k", "theta", "energy_pruefer", "energy_sturm", "deviation"],
        roots.iter().zip(&sturm).zip(&deviations).map(|((r, e), d)| {
            vec![r.multiple_index.to_string(), real(r.theta_root), real(r.energy), real(*e), real(*d)]
        }),
    )?;
    #[derive(Serialize)]
    struct Comparison {
        status: &'static str,
        count_pruefer: usize,
        count_sturm: usize,
        max_deviation: f64,
        tolerance: f64,
        theta_window: (f64, f64),
        y_tilde_end: f64,
    }
    let comparison = Comparison {
        status: if pass { "pass" } else { "fail" },
        count_pruefer: roots.len(),
        count_sturm: sturm.len(),
        max_deviation,
        tolerance: section.tolerance,
        theta_window: (theta_lo, theta_hi),
        y_tilde_end: end_phase(&op, config.model.theta0)?.1,
    };
    out.write_json("comparison.json", &comparison)?;
    let line = format!(
        "compare-oracle: {} ({} vs {} eigenvalues, max deviation {:?})",
        comparison.status, comparison.count_pruefer, comparison.count_sturm, max_deviation
    );
    if pass {
        Ok(line)
    } else {
        Err(CliError::OracleFailed(line))
    }
}
