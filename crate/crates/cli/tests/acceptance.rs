//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anderson_clock::model::{
    build_hamiltonian, sample_disorder, DisorderDistribution, ModelParams, TridiagonalOperator, Variant,
};
use anderson_clock::pruefer::{
    eigenphase_count, eigenphases_in_window, end_phase, gamma_neighborhood, lipschitz_bound, ratio_sweep,
    DEFAULT_ROOT_TOLERANCE,
};
use anderson_clock::stats::{
    clock_spacing_experiment, local_point_process, phase_convergence_diagnostic, EnsembleSpec, TailSpec,
};
use anderson_clock::sturm::{all_eigenvalues, bisect_eigenvalues, resolvent_corner, sturm_count, SpectralQuery};
use anderson_clock::Error;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// The two ensembles used throughout: Uniform(1) with alpha = 1 and Cauchy(1) with alpha = 2.
fn laws() -> [(DisorderDistribution, f64, &'static str); 2] {
    [
        (DisorderDistribution::uniform(1.0).unwrap(), 1.0, "uniform"),
        (DisorderDistribution::cauchy(1.0).unwrap(), 2.0, "cauchy"),
    ]
}

fn operator(law: &DisorderDistribution, alpha: f64, size: usize, index: u64) -> TridiagonalOperator {
    let params = ModelParams::new(alpha, size, Variant::DecayingSite, FRAC_PI_2).unwrap();
    let disorder = sample_disorder(law, size, SEED, index).unwrap();
    build_hamiltonian(&params, &disorder).unwrap()
}

/// Deterministic low-discrepancy points in [0, 1).
fn weyl(i: usize, shift: f64) -> f64 {
    (i as f64 * 0.618_033_988_749_894_9 + shift).fract()
}

fn free_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut counts_ok = true;
    for size in [5usize, 99, 1000] {
        let op = TridiagonalOperator::free(size).unwrap();
        let l1 = (size + 1) as f64;
        let exact: Vec<f64> = (1..=size).map(|k| 2.0 * (k as f64 * PI / l1).cos()).collect();
        let sturm = all_eigenvalues(&op, 1e-13).unwrap();
        let roots = eigenphases_in_window(&op, 0.5 * PI / l1, PI - 0.5 * PI / l1, DEFAULT_ROOT_TOLERANCE).unwrap();
        counts_ok &= sturm.len() == size && roots.len() == size;
        // roots ascend in theta (descending energy), like `exact`
        for ((r, s), e) in roots.iter().zip(sturm.iter().rev()).zip(&exact) {
            worst = worst.max((r.energy - e).abs()).max((s - e).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        counts_ok && worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max |E - 2cos(k pi/(L+1))| = {worst:e} over both routes, {elapsed:.2?}"),
    )
}

struct OracleRun {
    outcome: Outcome,
    max_remainder_ratio: f64,
    samples: usize,
}

fn oracle_equivalence() -> OracleRun {
    let start = Instant::now();
    let k = 15.0;
    let mut worst: f64 = 0.0;
    let mut count_mismatches = 0;
    let mut failures = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut samples = 0;
    for (law, alpha, name) in laws() {
        for index in 0..100 {
            let full = operator(&law, alpha, 2000, index);
            for size in [200usize, 500, 2000] {
                let op = full.truncated(size).unwrap();
                let l = size as f64;
                for theta0 in [FRAC_PI_3, FRAC_PI_2] {
                    let sample = match local_point_process(&op, theta0, k) {
                        Ok(s) => s,
                        Err(e) => {
                            failures.push(format!("{name} #{index} L={size}: {e}"));
                            continue;
                        }
                    };
                    samples += 1;
                    max_ratio = max_ratio.max(sample.max_remainder_ratio);
                    // independent Sturm enumeration of the energy window E0 +- K/L
                    let e0 = 2.0 * theta0.cos();
                    let q = SpectralQuery::new(&op, e0 - k / l, e0 + k / l, 1e-13).unwrap();
                    let mut sturm = bisect_eigenvalues(&q);
                    sturm.reverse();
                    let pruefer: Vec<f64> = sample
                        .thetas
                        .iter()
                        .map(|t| 2.0 * t.cos())
                        .filter(|e| (e - e0).abs() < k / l)
                        .collect();
                    if pruefer.len() != sturm.len() {
                        count_mismatches += 1;
                        continue;
                    }
                    for (a, b) in pruefer.iter().zip(&sturm) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && count_mismatches == 0 && worst <= 1e-8 && elapsed < Duration::from_secs(120);
    let mut detail = format!(
        "{samples} windows, max |E_pruefer - E_sturm| = {worst:e}, count mismatches {count_mismatches}, {elapsed:.2?}"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!(", {} failed windows (first: {f})", failures.len()));
    }
    OracleRun {
        outcome: outcome(pass, detail),
        max_remainder_ratio: max_ratio,
        samples,
    }
}

fn monotonicity() -> Outcome {
    let size = 500;
    let grid: Vec<f64> = (0..1000).map(|j| PI * (j as f64 + 0.5) / 1000.0).collect();
    let mut decreases = 0;
    let mut edge_sin: f64 = 0.0;
    let mut mismatches = 0;
    let mut ambiguous = 0;
    for index in 0..50u64 {
        let (law, alpha, _) = &laws()[(index % 2) as usize];
        let op = operator(law, *alpha, size, 1000 + index);
        let ys: Vec<f64> = grid.iter().map(|&t| end_phase(&op, t).unwrap().0.value()).collect();
        for j in 0..grid.len() - 1 {
            if ys[j + 1] < ys[j] {
                decreases += 1;
                edge_sin = edge_sin.max(grid[j].sin().min(grid[j + 1].sin()));
            }
        }
        let counts: Vec<Option<usize>> = grid.iter().map(|&t| eigenphase_count(&op, t).ok()).collect();
        ambiguous += counts.iter().filter(|c| c.is_none()).count();
        for j in 0..grid.len() - 1 {
            if let (Some(a), Some(b)) = (counts[j], counts[j + 1]) {
                let between = sturm_count(&op, 2.0 * grid[j].cos()) - sturm_count(&op, 2.0 * grid[j + 1].cos());
                if b - a != between {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        decreases == 0 && mismatches == 0 && ambiguous == 0,
        format!(
            "50 x 1000 grid on (0, pi): {decreases} decreases of y_(L+1) (all at |sin theta| <= {edge_sin:.4}), \
             {mismatches} count mismatches, {ambiguous} ambiguous points"
        ),
    )
}

fn green_identity() -> Outcome {
    let size = 500;
    let mut worst_ratio: f64 = 0.0;
    let mut pairs = 0;
    let mut i = 0;
    while pairs < 100 && i < 1000 {
        let index = pairs as u64;
        let (law, alpha, _) = &laws()[pairs % 2];
        let op = operator(law, *alpha, size, 2000 + index);
        let energy = -3.0 + 6.0 * weyl(i, 0.123);
        i += 1;
        match resolvent_corner(&op, energy, 1e-6) {
            Ok(g) => {
                let w = ratio_sweep(&op, energy).unwrap().last();
                worst_ratio = worst_ratio.max((g - 1.0 / w).abs() / (1e-9 * (1.0 + g.abs())));
                pairs += 1;
            }
            Err(Error::NearSpectrum { .. }) => continue,
            Err(e) => return outcome(false, format!("unexpected error {e}")),
        }
    }
    outcome(
        pairs == 100 && worst_ratio <= 1.0,
        format!("{pairs} pairs, max |G - 1/w| / (1e-9 (1+|G|)) = {worst_ratio:.3e}"),
    )
}

fn clock_concentration() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (law, alpha, name) in laws() {
        let spec = EnsembleSpec {
            distribution: law,
            alpha,
            variant: Variant::DecayingSite,
            theta0: FRAC_PI_2,
            window_k: 15.0,
            sizes: vec![500, 2000, 8000],
            realizations: 200,
            master_seed: SEED,
            histogram_bins: 40,
            histogram_max: 2.0 * PI,
        };
        let report = match clock_spacing_experiment(&spec) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        let stds: Vec<f64> = report.per_size.iter().map(|s| s.std_spacing.unwrap_or(f64::NAN)).collect();
        let means: Vec<f64> = report.per_size.iter().map(|s| s.mean_spacing.unwrap_or(f64::NAN)).collect();
        let excluded: usize = report.per_size.iter().map(|s| s.excluded.len()).sum();
        pass &= stds.windows(2).all(|w| w[1] < w[0]);
        if name == "uniform" {
            pass &= ((means[2] - PI) / PI).abs() <= 0.02;
        }
        parts.push(format!(
            "{name}: std {:.4}/{:.4}/{:.4}, mean {:.4}/{:.4}/{:.4}, excluded {excluded}",
            stds[0], stds[1], stds[2], means[0], means[1], means[2]
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    outcome(pass, format!("{} ({elapsed:.2?})", parts.join("; ")))
}

fn lemma6_decay() -> Outcome {
    let start = Instant::now();
    let spec = TailSpec {
        distribution: DisorderDistribution::uniform(1.0).unwrap(),
        alpha: 1.0,
        variant: Variant::DecayingSite,
        theta: FRAC_PI_3,
        beta: 0.75,
        n_list: vec![10, 40, 160],
        m: 10_000,
        realizations: 10_000,
        master_seed: SEED,
        sup: None,
    };
    let diag = match phase_convergence_diagnostic(&spec) {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let moments: Vec<f64> = diag.moments.iter().map(|m| m.restricted_moment.unwrap_or(f64::NAN)).collect();
    let envelope: Vec<f64> = diag.moments.iter().map(|m| m.envelope.unwrap_or(f64::NAN)).collect();
    let elapsed = start.elapsed();
    let pass = moments.windows(2).all(|w| w[1] <= w[0])
        && (1..3).all(|j| moments[j] <= envelope[j])
        && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "moments {:.3e}/{:.3e}/{:.3e}, envelope {:.3e}/{:.3e}/{:.3e}, P(B_N) {}/{}/{} ({elapsed:.2?})",
            moments[0],
            moments[1],
            moments[2],
            envelope[0],
            envelope[1],
            envelope[2],
            diag.moments[0].b_n_frequency,
            diag.moments[1].b_n_frequency,
            diag.moments[2].b_n_frequency,
        ),
    )
}

fn lipschitz() -> Outcome {
    let n = 20;
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for index in 0..50u64 {
        let (law, alpha, _) = &laws()[(index % 2) as usize];
        let op = operator(law, *alpha, n - 1, 3000 + index);
        let theta = if index % 4 < 2 { FRAC_PI_3 } else { FRAC_PI_2 };
        let gamma = gamma_neighborhood(theta);
        let bound = lipschitz_bound(&op, theta, n).unwrap();
        for j in 0..100 {
            let p = (2.0 * weyl(j, 0.1) - 1.0) * gamma * 0.999;
            let q = (2.0 * weyl(j + 7919, 0.37) - 1.0) * gamma * 0.999;
            if p == q {
                continue;
            }
            let yp = end_phase(&op, theta + p).unwrap().0.value();
            let yq = end_phase(&op, theta + q).unwrap().0.value();
            worst = worst.max((yp - yq).abs() / (p - q).abs() / bound);
            samples += 1;
        }
    }
    outcome(worst <= 1.0, format!("{samples} pairs, max quotient / bound = {worst:.3e}"))
}

fn data_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let root = std::env::temp_dir().join(format!("anderson-clock-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&root);
    fs::create_dir_all(&root).unwrap();
    let config = root.join("ensemble.toml");
    fs::write(
        &config,
        "[run]\nmaster_seed = 77\n[model]\nalpha = 1.0\ntheta0 = 1.5707963267948966\n\
         [disorder]\nkind = \"uniform\"\nhalf_width = 1.0\n\
         [ensemble]\nsizes = [500, 2000]\nrealizations = 40\nwindow_k = 15.0\n",
    )
    .unwrap();
    let mut results = Vec::new();
    for (name, threads) in [("first", "8"), ("second", "8"), ("single", "1")] {
        let out = root.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_anderson-clock"))
            .args(["ensemble", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .args(["--threads", threads])
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run {name} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        results.push(data_csvs(&out));
    }
    let _ = fs::remove_dir_all(&root);
    let names: Vec<&str> = results[0].iter().map(|(n, _)| n.as_str()).collect();
    let repeat = results[0] == results[1];
    let threads = results[0] == results[2];
    outcome(
        repeat && threads && !names.is_empty(),
        format!("{names:?}: repeat identical = {repeat}, threads 8 vs 1 identical = {threads}"),
    )
}

fn main() {
    let mut all = true;
    let mut report = |number: usize, title: &str, o: Outcome| {
        all &= o.pass;
        println!("criterion {number} [{}] {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "free-model exactness", free_exactness());
    let oracle = oracle_equivalence();
    let ratio = oracle.max_remainder_ratio;
    let samples = oracle.samples;
    report(2, "oracle equivalence", oracle.outcome);
    report(3, "monotonicity and oscillation", monotonicity());
    report(4, "Green identity", green_identity());
    report(5, "clock concentration", clock_concentration());
    report(6, "restricted moment decay", lemma6_decay());
    report(7, "Lipschitz bound", lipschitz());
    report(8, "determinism", determinism());
    report(
        9,
        "energy-phase remainder",
        outcome(
            samples > 0 && ratio <= 8.0,
            format!("max |L(E-E0) + 2 sin(theta0) x| / (K^2/L) = {ratio:.4} over {samples} windows (limit 8)"),
        ),
    );
    if !all {
        std::process::exit(1);
    }
}
