//! Seeded random states, unitaries and state sets for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{normalize, Operator, C64};

/// Platform-stable generator used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random unit vector.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    loop {
        if let Some(v) = normalize(&gaussian_vector(rng, dim)) {
            return v;
        }
    }
}

/// Haar-random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v = gaussian_vector(rng, dim);
        for q in &columns {
            let proj = crate::linalg::inner(q, &v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        if let Some(v) = normalize(&v) {
            if crate::linalg::norm(&v) > 0.5 {
                columns.push(v);
            }
        }
    }
    Operator::from_columns(&columns).expect("square")
}

/// `count` random unit vectors of dimension `dim`.
pub fn random_states<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<Vec<C64>> {
    (0..count).map(|_| random_state(rng, dim)).collect()
}
