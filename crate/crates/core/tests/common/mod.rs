#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weyl_lab::duhamel::{DeltaLemmaInstance, ProfileTerm};
use weyl_lab::galerkin::hermitian_eigen;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex(r: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller; quality is irrelevant here, only determinism
    let u: f64 = r.random_range(f64::EPSILON..1.0);
    let v: f64 = r.random();
    Complex64::from_polar((-2.0 * u.ln()).sqrt(), 2.0 * std::f64::consts::PI * v)
}

pub fn random_unitary(r: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian_complex(r));
    g.qr().q()
}

pub fn random_hermitian(r: &mut ChaCha8Rng, d: usize, scale: f64) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian_complex(r));
    (&g + g.adjoint()).scale(0.5 * scale / (d as f64).sqrt())
}

/// Hermitian pair `(A, A+B)` with both spectra at least one.
pub struct HermitianPair {
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl HermitianPair {
    pub fn random(r: &mut ChaCha8Rng, d: usize, top: f64, coupling: f64) -> Self {
        let q = random_unitary(r, d);
        let diag: Vec<f64> = (0..d).map(|_| r.random_range(1.0..top)).collect();
        let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, diag.iter().map(|&x| Complex64::new(x, 0.0)))) * q.adjoint();
        let a = (&a + a.adjoint()).scale(0.5);
        let mut b = random_hermitian(r, d, coupling);
        let (low, _) = hermitian_eigen(&(&a + &b)).unwrap();
        if low[0] < 1.0 {
            for i in 0..d {
                b[(i, i)] += Complex64::new(1.0 - low[0], 0.0);
            }
        }
        Self { a, b }
    }

    /// `(ν, U, μ, V)`: frequencies and eigenvectors of `A` and `A+B`.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>) {
        let (la, ua) = hermitian_eigen(&self.a).unwrap();
        let (lb, ub) = hermitian_eigen(&(&self.a + &self.b)).unwrap();
        (la.iter().map(|x| x.sqrt()).collect(), ua, lb.iter().map(|x| x.sqrt()).collect(), ub)
    }
}

/// Random instance of the `δ_τ`-lemma: orthonormal functions from a random
/// unitary mix of plane waves, a quadratic-in-`s` cosine profile, random shifts.
pub fn random_delta_instance(r: &mut ChaCha8Rng) -> DeltaLemmaInstance {
    let grid = 64;
    let modes = r.random_range(1..=8usize);
    let pool = 12usize;
    let q = random_unitary(r, pool);
    let waves: Vec<Vec<Complex64>> = (0..pool)
        .map(|j| {
            let k = j as f64 - (pool / 2) as f64;
            (0..grid).map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k * i as f64 / grid as f64)).collect()
        })
        .collect();
    let functions = (0..modes)
        .map(|m| (0..grid).map(|i| (0..pool).map(|j| q[(j, m)] * waves[j][i]).sum()).collect())
        .collect();
    let delta = r.random_range(0.0..1.0);
    let profile = (0..r.random_range(1..=4usize))
        .map(|_| ProfileTerm {
            frequency: r.random_range(0..6),
            phase: r.random_range(0.0..std::f64::consts::TAU),
            coeffs: [r.random_range(-2.0..2.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)],
        })
        .collect();
    DeltaLemmaInstance {
        grid,
        delta,
        profile,
        shifts: (0..modes).map(|_| r.random_range(0.0..=delta)).collect(),
        coefficients: (0..modes).map(|_| gaussian_complex(r)).collect(),
        functions,
    }
}
