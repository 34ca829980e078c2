//! Seeded random draws used by the sampling-based checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::exterior::{GlElement, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut SeededRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn real_vector(rng: &mut SeededRng, dim: usize) -> Vector {
    Vector::real(&normal_vec(rng, dim))
}

/// Uniform on the unit sphere.
pub fn unit_vector(rng: &mut SeededRng, dim: usize) -> Vector {
    loop {
        let v = normal_vec(rng, dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return Vector::real(&v.iter().map(|x| x / norm).collect::<Vec<_>>());
        }
    }
}

pub fn normal_matrix(rng: &mut SeededRng, dim: usize) -> DMatrix<f64> {
    DMatrix::from_vec(dim, dim, normal_vec(rng, dim * dim))
}

/// `Id + scale·N` with `N` standard normal, redrawn until comfortably
/// invertible.
pub fn gl_near_identity(rng: &mut SeededRng, dim: usize, scale: f64) -> GlElement {
    loop {
        let m = DMatrix::identity(dim, dim) + normal_matrix(rng, dim) * scale;
        let sv = m.clone().singular_values();
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.2 {
            return GlElement::new(m).expect("square");
        }
    }
}
