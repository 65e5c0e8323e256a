use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random PSD `A` of rank `min(n, rank)` and PD `B = Y Y^H + 0.1 I`.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, rank: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let x = DMatrix::from_fn(n, rank, |_, _| random_vector(rng, 1)[0]);
    let y = DMatrix::from_fn(n, n, |_, _| random_vector(rng, 1)[0]);
    let a = &x * x.adjoint();
    let b = &y * y.adjoint() + DMatrix::identity(n, n) * C64::from(0.1);
    (a, b)
}
