#![allow(dead_code)]

use anderson_clock::model::{build_hamiltonian, sample_disorder, DisorderDistribution, ModelParams, TridiagonalOperator, Variant};
use nalgebra::DMatrix;

pub fn random_operator(dist: &DisorderDistribution, alpha: f64, size: usize, seed: u64, index: u64) -> TridiagonalOperator {
    let params = ModelParams::new(alpha, size, Variant::DecayingSite, 1.0).unwrap();
    let disorder = sample_disorder(dist, size, seed, index).unwrap();
    build_hamiltonian(&params, &disorder).unwrap()
}

pub fn dense(op: &TridiagonalOperator) -> DMatrix<f64> {
    let n = op.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            op.diagonal()[i]
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// Ascending eigenvalues from a dense symmetric solver.
pub fn dense_eigenvalues(op: &TridiagonalOperator) -> Vec<f64> {
    let mut evs: Vec<f64> = dense(op).symmetric_eigen().eigenvalues.iter().copied().collect();
    evs.sort_by(f64::total_cmp);
    evs
}
