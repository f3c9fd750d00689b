mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use anderson_clock::model::{DisorderDistribution, TridiagonalOperator};
use anderson_clock::pruefer::{eigenphases_in_window, phase_step, ratio_sweep, DEFAULT_ROOT_TOLERANCE};
use anderson_clock::sturm::{all_eigenvalues, resolvent_corner, sturm_count};
use anderson_clock::Error;
use common::{dense, dense_eigenvalues, random_operator};

#[test]
fn phase_step_matches_extended_precision() {
    // 3.000444915431922919983469842600579610443..., computed independently in
    // 40-digit arithmetic
    let reference = 3.000_444_915_431_923_f64;
    let got = phase_step(1.0, FRAC_PI_2, 0.5).unwrap();
    assert!((got - reference).abs() < 1e-14, "{got} vs {reference}");
}

#[test]
fn sturm_matches_dense_solver() {
    let laws = [
        (DisorderDistribution::uniform(1.0).unwrap(), 0.3),
        (DisorderDistribution::cauchy(1.0).unwrap(), 0.5),
        (DisorderDistribution::symmetrized_pareto(1.5, 2.0).unwrap(), 1.0),
    ];
    for (law, alpha) in &laws {
        for (index, size) in [(0u64, 7usize), (1, 64), (2, 300)] {
            let op = random_operator(law, *alpha, size, 17, index);
            let sturm = all_eigenvalues(&op, 1e-13).unwrap();
            let reference = dense_eigenvalues(&op);
            assert_eq!(sturm.len(), reference.len());
            let scale = 1.0 + op.spectral_bound();
            for (a, b) in sturm.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-10 * scale, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn pruefer_roots_match_dense_solver_inside_band() {
    let law = DisorderDistribution::uniform(1.0).unwrap();
    for (index, size) in [(0u64, 10usize), (1, 120), (2, 300)] {
        let op = random_operator(&law, 0.7, size, 5, index);
        let roots = eigenphases_in_window(&op, 1e-6, PI - 1e-6, DEFAULT_ROOT_TOLERANCE).unwrap();
        let mut band: Vec<f64> = dense_eigenvalues(&op)
            .into_iter()
            .filter(|e| e.abs() < 2.0 * (1e-6f64).cos())
            .collect();
        band.reverse();
        assert_eq!(roots.len(), band.len(), "L = {size}");
        for (r, e) in roots.iter().zip(&band) {
            assert!((r.energy - e).abs() < 1e-9, "{} vs {e}", r.energy);
        }
    }
}

#[test]
fn free_eigenvalues_closed_form() {
    for size in [5usize, 99, 1000] {
        let op = TridiagonalOperator::free(size).unwrap();
        let l1 = (size + 1) as f64;
        let mut expected: Vec<f64> = (1..=size).map(|k| 2.0 * (k as f64 * PI / l1).cos()).collect();
        expected.reverse();
        let sturm = all_eigenvalues(&op, 1e-13).unwrap();
        let roots = eigenphases_in_window(&op, 0.5 * PI / l1, PI - 0.5 * PI / l1, DEFAULT_ROOT_TOLERANCE).unwrap();
        assert_eq!(sturm.len(), size);
        assert_eq!(roots.len(), size);
        for ((s, r), e) in sturm.iter().zip(roots.iter().rev()).zip(&expected) {
            assert!((s - e).abs() < 1e-10);
            assert!((r.energy - e).abs() < 1e-10);
        }
    }
}

#[test]
fn resolvent_corner_matches_dense_inverse() {
    let law = DisorderDistribution::cauchy(1.0).unwrap();
    for index in 0..10u64 {
        let op = random_operator(&law, 1.0, 40, 9, index);
        let energy = -2.5 + 0.5 * index as f64 + 0.0123;
        let mut m = -dense(&op);
        for i in 0..op.len() {
            m[(i, i)] += energy;
        }
        let inv = m.try_inverse().unwrap();
        let reference = inv[(op.len() - 1, op.len() - 1)];
        match resolvent_corner(&op, energy, 1e-9) {
            Ok(g) => {
                assert!((g - reference).abs() < 1e-9 * (1.0 + reference.abs()), "{g} vs {reference}");
                let w = ratio_sweep(&op, energy).unwrap().last();
                assert!((g - 1.0 / w).abs() < 1e-9 * (1.0 + g.abs()));
            }
            Err(Error::NearSpectrum { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn sturm_count_matches_dense_at_random_energies() {
    let law = DisorderDistribution::symmetrized_pareto(1.0, 1.0).unwrap();
    let op = random_operator(&law, 0.5, 200, 1, 0);
    let evs = dense_eigenvalues(&op);
    for j in 0..200 {
        let e = -6.0 + 12.0 * (j as f64 + 0.37) / 200.0;
        let below = evs.iter().filter(|&&v| v < e).count();
        assert_eq!(sturm_count(&op, e), below);
    }
}
