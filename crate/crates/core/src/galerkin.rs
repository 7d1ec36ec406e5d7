//! Fourier–Galerkin truncation of `H_V = −Δ + 1 + V` and its dense
//! eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_modes, shell_frequency, LatticeMode};
use crate::potentials::{shift_to_floor, PotentialData};

pub const DEFAULT_MAX_DIM: usize = 4000;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub cutoff: u64,
    pub grid: usize,
    pub spec_hash: String,
}

/// Truncated matrix `H[a,b] = (4π²|k_a|²+1) δ_ab + V̂(k_a − k_b) + c δ_ab`.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub n: usize,
    pub cutoff: u64,
    pub modes: Vec<LatticeMode>,
    pub matrix: DMatrix<Complex64>,
    /// Constant already folded into the diagonal.
    pub shift: f64,
    /// Frequency margin used for the reliable band.
    pub margin: f64,
    pub provenance: Provenance,
}

impl DiscreteHamiltonian {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// The free matrix on the same basis.
    pub fn free(n: usize, cutoff: u64) -> Result<Self> {
        let modes = enumerate_modes(n, cutoff)?;
        let d = modes.len();
        let matrix = DMatrix::from_fn(d, d, |a, b| if a == b { Complex64::new(modes[a].eigenvalue_sq, 0.0) } else { Complex64::new(0.0, 0.0) });
        Ok(Self {
            n,
            cutoff,
            modes,
            matrix,
            shift: 0.0,
            margin: 0.0,
            provenance: Provenance { cutoff, grid: 0, spec_hash: "free".into() },
        })
    }
}

/// Matrix of multiplication by `V` (plus `shift`) in the plane-wave basis.
pub fn potential_matrix(modes: &[LatticeMode], potential: &PotentialData, shift: f64) -> Result<DMatrix<Complex64>> {
    let fourier = potential
        .fourier
        .as_ref()
        .ok_or(Error::InsufficientCutoff { have: 0, need: 1 })?;
    let max_norm = modes.iter().map(|m| m.k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)).max().unwrap_or(0);
    let need = 2 * max_norm as usize;
    if fourier.cutoff < need {
        return Err(Error::InsufficientCutoff { have: fourier.cutoff, need });
    }
    let d = modes.len();
    let columns: Vec<Vec<Complex64>> = (0..d)
        .into_par_iter()
        .map(|b| {
            (0..d)
                .map(|a| {
                    let diff: Vec<i64> = modes[a].k.iter().zip(&modes[b].k).map(|(x, y)| x - y).collect();
                    let mut v = fourier.get(&diff);
                    if a == b {
                        v += shift;
                    }
                    v
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(d, d, |a, b| columns[b][a]))
}

pub fn assemble(n: usize, cutoff: u64, potential: &PotentialData) -> Result<DiscreteHamiltonian> {
    assemble_with_limit(n, cutoff, potential, DEFAULT_MAX_DIM)
}

pub fn assemble_with_limit(n: usize, cutoff: u64, potential: &PotentialData, max_dim: usize) -> Result<DiscreteHamiltonian> {
    if potential.n() != n {
        return Err(Error::InvalidArgument(format!("potential lives in dimension {}, basis in {n}", potential.n())));
    }
    let modes = enumerate_modes(n, cutoff)?;
    if modes.len() > max_dim {
        return Err(Error::Resource { dim: modes.len(), max: max_dim });
    }
    let mut matrix = potential_matrix(&modes, potential, potential.shift)?;
    for (a, mode) in modes.iter().enumerate() {
        matrix[(a, a)] += mode.eigenvalue_sq;
    }
    Ok(DiscreteHamiltonian {
        n,
        cutoff,
        modes,
        matrix,
        shift: potential.shift,
        margin: 2.0 * potential.sup_abs(),
        provenance: Provenance { cutoff, grid: potential.grid, spec_hash: potential.spec.hash() },
    })
}

/// Eigenvectors in the plane-wave basis. Diagonal matrices keep the
/// standard basis implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Eigenvectors {
    /// Eigenvector `k` is the basis vector `order[k]`.
    Standard(Vec<usize>),
    Dense(DMatrix<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub n: usize,
    pub modes: Vec<LatticeMode>,
    /// `τ_k²`, ascending, shift included.
    pub eigenvalues_sq: Vec<f64>,
    /// `τ_k`, ascending.
    pub frequencies: Vec<f64>,
    pub vectors: Eigenvectors,
    /// Total constant added to `−Δ + 1 + V`.
    pub shift: f64,
    pub margin: f64,
    pub provenance: Provenance,
}

/// A count together with whether it lies inside the trusted band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counted {
    pub value: u64,
    pub reliable: bool,
}

fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for a in 0..d {
        for b in a..d {
            worst = worst.max((m[(a, b)] - m[(b, a)].conj()).norm());
        }
    }
    worst
}

fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    let d = m.nrows();
    (0..d).all(|b| (0..d).all(|a| a == b || m[(a, b)] == Complex64::new(0.0, 0.0)))
}

/// Ascending eigenvalues and phase-normalized eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    let asym = max_asymmetry(m);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |a, k| eig.eigenvectors[(a, order[k])]);
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.norm() > col[best].norm() {
                best = i;
            }
        }
        let pivot = col[best];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|v| *v *= phase);
        }
    }
    Ok((values, vectors))
}

pub fn diagonalize(h: &DiscreteHamiltonian) -> Result<SpectralData> {
    let (raw, vectors) = if is_diagonal(&h.matrix) {
        let d = h.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| h.matrix[(a, a)].re.total_cmp(&h.matrix[(b, b)].re));
        let raw = order.iter().map(|&i| h.matrix[(i, i)].re).collect::<Vec<_>>();
        if h.matrix.iter().any(|v| v.im != 0.0) {
            return Err(Error::NotHermitian(h.matrix.iter().map(|v| v.im.abs()).fold(0.0, f64::max)));
        }
        (raw, Eigenvectors::Standard(order))
    } else {
        let (raw, vecs) = hermitian_eigen(&h.matrix)?;
        (raw, Eigenvectors::Dense(vecs))
    };
    let extra = raw.first().map_or(0.0, |&lo| shift_to_floor(lo));
    let eigenvalues_sq: Vec<f64> = raw.iter().map(|v| v + extra).collect();
    let frequencies = eigenvalues_sq.iter().map(|v| v.sqrt()).collect();
    Ok(SpectralData {
        n: h.n,
        modes: h.modes.clone(),
        eigenvalues_sq,
        frequencies,
        vectors,
        shift: h.shift + extra,
        margin: h.margin,
        provenance: h.provenance.clone(),
    })
}

impl SpectralData {
    /// Free spectrum on the ball `|k| <= cutoff`, without building a matrix.
    pub fn free(n: usize, cutoff: u64) -> Result<Self> {
        let modes = enumerate_modes(n, cutoff)?;
        let eigenvalues_sq: Vec<f64> = modes.iter().map(|m| m.eigenvalue_sq).collect();
        Ok(Self {
            n,
            frequencies: eigenvalues_sq.iter().map(|v| v.sqrt()).collect(),
            eigenvalues_sq,
            vectors: Eigenvectors::Standard((0..modes.len()).collect()),
            modes,
            shift: 0.0,
            margin: 0.0,
            provenance: Provenance { cutoff, grid: 0, spec_hash: "free".into() },
        })
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    pub fn cutoff(&self) -> u64 {
        self.provenance.cutoff
    }

    /// Largest frequency below which truncation is trusted.
    pub fn reliable_band(&self) -> f64 {
        shell_frequency(self.cutoff() * self.cutoff()) - self.margin
    }

    /// Coefficient of plane wave `a` in eigenvector `k`.
    pub fn coefficient(&self, a: usize, k: usize) -> Complex64 {
        match &self.vectors {
            Eigenvectors::Standard(order) => {
                if order[k] == a {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Eigenvectors::Dense(m) => m[(a, k)],
        }
    }

    pub fn dense_vectors(&self) -> DMatrix<Complex64> {
        match &self.vectors {
            Eigenvectors::Dense(m) => m.clone(),
            Eigenvectors::Standard(order) => {
                let d = order.len();
                DMatrix::from_fn(d, d, |a, k| if order[k] == a { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            }
        }
    }

    /// Plane-wave values `exp(2πi k_a·x)` for every basis mode.
    pub fn plane_waves(&self, x: &[f64]) -> Vec<Complex64> {
        use std::f64::consts::PI;
        self.modes
            .iter()
            .map(|m| {
                let phase: f64 = m.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .collect()
    }

    /// `e_{τ_k}(x)` given precomputed plane waves.
    pub fn eigenfunction_with(&self, k: usize, waves: &[Complex64]) -> Complex64 {
        match &self.vectors {
            Eigenvectors::Standard(order) => waves[order[k]],
            Eigenvectors::Dense(m) => m.column(k).iter().zip(waves).map(|(c, w)| c * w).sum(),
        }
    }

    /// `e_{τ_k}(x)` for every `k` at once.
    pub fn eigenfunction_values(&self, x: &[f64]) -> Vec<Complex64> {
        let waves = self.plane_waves(x);
        match &self.vectors {
            Eigenvectors::Standard(order) => order.iter().map(|&a| waves[a]).collect(),
            Eigenvectors::Dense(m) => m.tr_mul(&nalgebra::DVector::from_vec(waves)).iter().copied().collect(),
        }
    }

    pub fn eigenfunction(&self, k: usize, x: &[f64]) -> Complex64 {
        self.eigenfunction_with(k, &self.plane_waves(x))
    }

    /// Number of frequencies `<= lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.frequencies.partition_point(|&t| t <= lambda)
    }
}

/// `N_V(λ) = #{k : τ_k <= λ}`.
pub fn counting_function(s: &SpectralData, lambda: f64) -> Counted {
    Counted { value: s.count_below(lambda) as u64, reliable: lambda <= s.reliable_band() }
}

/// `#{k : τ_k ∈ [λ, λ+1)}`.
pub fn band_trace(s: &SpectralData, lambda: f64) -> Counted {
    let lo = s.frequencies.partition_point(|&t| t < lambda);
    let hi = s.frequencies.partition_point(|&t| t < lambda + 1.0);
    Counted { value: (hi - lo) as u64, reliable: lambda + 1.0 <= s.reliable_band() }
}

/// `E^V_λ(x,x) = Σ_{τ_k <= λ} |e_{τ_k}(x)|²`.
pub fn spectral_function_diag(s: &SpectralData, x: &[f64], lambda: f64) -> f64 {
    let waves = s.plane_waves(x);
    (0..s.count_below(lambda)).map(|k| s.eigenfunction_with(k, &waves).norm_sqr()).sum()
}

/// `Σ_k cos(t τ_k)`.
pub fn wave_trace(s: &SpectralData, t: f64) -> f64 {
    s.frequencies.iter().map(|tau| (t * tau).cos()).sum()
}
