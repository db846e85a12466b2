#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vrd_core::numcore::{ComplexMatrix, DensityOperator, PureState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_vec(n, n, (0..n * n).map(|_| gaussian(r)).collect()).unwrap()
}

pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    random_matrix(r, n).hermitian_part()
}

pub fn random_density(r: &mut ChaCha8Rng, dims: Vec<usize>) -> DensityOperator {
    let n = dims.iter().product();
    let g = random_matrix(r, n);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / t).hermitian_part(), dims).unwrap()
}

pub fn random_pure(r: &mut ChaCha8Rng, dims: Vec<usize>) -> PureState {
    let n = dims.iter().product();
    PureState::normalized((0..n).map(|_| gaussian(r)).collect(), dims).unwrap()
}
