//! Divided-difference form of Duhamel's principle at matrix level:
//!
//! `Tr f(√(A+B)) − Tr f(√A) = Σ_{j,k} m(ν_j, μ_k) ⟨u_j, v_k⟩* ⟨u_j, B v_k⟩`
//!
//! with `m(ν, μ) = (f(ν) − f(μ)) / (ν² − μ²)` and `f′(τ)/(2τ)` on the diagonal.
//! For finite Hermitian matrices this is an exact identity, and it is the
//! central correctness check of the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::galerkin::{potential_matrix, SpectralData};
use crate::mollify::MollifiedIndicator;
use crate::potentials::PotentialData;
use crate::quadrature::integrate;

/// A scalar spectral function with a first derivative.
pub trait SpectralFunction: Sync {
    fn value(&self, tau: f64) -> Result<f64>;
    fn derivative(&self, tau: f64) -> Result<f64>;
}

impl SpectralFunction for MollifiedIndicator {
    fn value(&self, tau: f64) -> Result<f64> {
        MollifiedIndicator::value(self, tau)
    }

    fn derivative(&self, tau: f64) -> Result<f64> {
        MollifiedIndicator::derivative(self, tau, 1)
    }
}

/// `(f, f′)` given as plain closures.
pub struct FnPair<F, G>(pub F, pub G);

impl<F, G> SpectralFunction for FnPair<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    fn value(&self, tau: f64) -> Result<f64> {
        Ok((self.0)(tau))
    }

    fn derivative(&self, tau: f64) -> Result<f64> {
        Ok((self.1)(tau))
    }
}

/// Relative width of the band around the diagonal where the derivative form
/// replaces the quotient.
pub const DIAGONAL_TOL: f64 = 1e-6;

pub fn diagonal_tolerance(nu: f64, mu: f64) -> f64 {
    DIAGONAL_TOL * nu.max(mu)
}

/// `m(ν, μ)` from precomputed values `f(ν)`, `f(μ)`; the derivative is
/// requested only inside the diagonal band.
fn kernel_from_values<F: SpectralFunction + ?Sized>(f: &F, nu: f64, f_nu: f64, mu: f64, f_mu: f64) -> Result<f64> {
    if (nu - mu).abs() > diagonal_tolerance(nu, mu) {
        Ok((f_nu - f_mu) / ((nu - mu) * (nu + mu)))
    } else {
        let mid = 0.5 * (nu + mu);
        Ok(f.derivative(mid)? / (nu + mu))
    }
}

pub fn divided_difference<F: SpectralFunction + ?Sized>(f: &F, nu: f64, mu: f64) -> Result<f64> {
    if (nu - mu).abs() > diagonal_tolerance(nu, mu) {
        kernel_from_values(f, nu, f.value(nu)?, mu, f.value(mu)?)
    } else {
        kernel_from_values(f, nu, 0.0, mu, 0.0)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.total()
}

/// `Σ_k f(μ_k) − Σ_j f(ν_j)` for frequency lists `mu` (perturbed) and `nu` (reference).
pub fn trace_difference<F: SpectralFunction + ?Sized>(f: &F, nu: &[f64], mu: &[f64]) -> Result<f64> {
    let fm = mu.iter().map(|&t| f.value(t)).collect::<Result<Vec<_>>>()?;
    let fn_ = nu.iter().map(|&t| f.value(t)).collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum(fm.into_iter().chain(fn_.into_iter().map(|v| -v))))
}

/// Double sum `Σ_{j,k} m(ν_j, μ_k) conj(O_jk) W_jk` with `O = U†V`,
/// `W = U† B V`. `nu`, `mu` are frequencies (square roots of eigenvalues).
pub fn duhamel_double_sum<F: SpectralFunction + ?Sized>(
    f: &F,
    nu: &[f64],
    u: &DMatrix<Complex64>,
    mu: &[f64],
    v: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Result<f64> {
    let overlap = u.adjoint() * v;
    let coupling = u.adjoint() * b * v;
    let f_nu = nu.iter().map(|&t| f.value(t)).collect::<Result<Vec<_>>>()?;
    let f_mu = mu.iter().map(|&t| f.value(t)).collect::<Result<Vec<_>>>()?;

    let rows: Vec<f64> = (0..nu.len())
        .into_par_iter()
        .map(|j| {
            // derivative values are shared within a row of equal frequencies
            let cache: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
            let mut acc = Compensated::default();
            for k in 0..mu.len() {
                let (a, b) = (nu[j], mu[k]);
                let m = if (a - b).abs() > diagonal_tolerance(a, b) {
                    (f_mu[k] - f_nu[j]) / ((b - a) * (b + a))
                } else {
                    let mid = 0.5 * (a + b);
                    let d = cache.borrow().get(&mid.to_bits()).copied();
                    let d = match d {
                        Some(d) => d,
                        None => {
                            let d = f.derivative(mid)?;
                            cache.borrow_mut().insert(mid.to_bits(), d);
                            d
                        }
                    };
                    d / (a + b)
                };
                let term = overlap[(j, k)].conj() * coupling[(j, k)];
                acc.add(m * term.re);
            }
            Ok(acc.total())
        })
        .collect::<Result<_>>()?;
    Ok(compensated_sum(rows))
}

fn check_same_truncation(s_v: &SpectralData, s_0: &SpectralData) -> Result<()> {
    if s_v.n != s_0.n || s_v.cutoff() != s_0.cutoff() || s_v.modes != s_0.modes {
        return Err(Error::MismatchedTruncation(format!(
            "(n={}, K={}) vs (n={}, K={})",
            s_v.n,
            s_v.cutoff(),
            s_0.n,
            s_0.cutoff()
        )));
    }
    Ok(())
}

/// `Σ_k 1̃_λ(τ_k) − Σ_j 1̃_λ(λ_j)`.
pub fn trace_difference_direct(s_v: &SpectralData, s_0: &SpectralData, mi: &MollifiedIndicator) -> Result<f64> {
    check_same_truncation(s_v, s_0)?;
    trace_difference(mi, &s_0.frequencies, &s_v.frequencies)
}

/// Perturbation matrix `B` between the two diagonalized operators: the
/// potential's multiplication matrix plus the difference of recorded shifts.
pub fn perturbation_matrix(s_v: &SpectralData, s_0: &SpectralData, potential: &PotentialData) -> Result<DMatrix<Complex64>> {
    potential_matrix(&s_v.modes, potential, s_v.shift - s_0.shift)
}

pub fn trace_difference_duhamel(
    s_v: &SpectralData,
    s_0: &SpectralData,
    potential: &PotentialData,
    mi: &MollifiedIndicator,
) -> Result<f64> {
    check_same_truncation(s_v, s_0)?;
    let b = perturbation_matrix(s_v, s_0, potential)?;
    duhamel_double_sum(mi, &s_0.frequencies, &s_0.dense_vectors(), &s_v.frequencies, &s_v.dense_vectors(), &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub lambda: f64,
    pub width: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub dim_free: usize,
    pub dim_perturbed: usize,
    pub pass: bool,
}

pub const IDENTITY_TOL: f64 = 1e-9;

impl ComparisonReport {
    pub fn new(lambda: f64, width: f64, lhs: f64, rhs: f64, dim_free: usize, dim_perturbed: usize) -> Self {
        let residual = (lhs - rhs).abs();
        Self { lambda, width, lhs, rhs, residual, dim_free, dim_perturbed, pass: residual <= IDENTITY_TOL * (1.0 + lhs.abs()) }
    }
}

pub fn verify_identity(
    s_v: &SpectralData,
    s_0: &SpectralData,
    potential: &PotentialData,
    mi: &MollifiedIndicator,
) -> Result<ComparisonReport> {
    let lhs = trace_difference_direct(s_v, s_0, mi)?;
    let rhs = trace_difference_duhamel(s_v, s_0, potential, mi)?;
    Ok(ComparisonReport::new(mi.lambda, mi.width, lhs, rhs, s_0.dim(), s_v.dim()))
}

/// Residuals of the two trigonometric convolution identities:
/// `r1` for `∫_0^t sin((t−s)μ)/μ cos(sτ) ds = (cos tτ − cos tμ)/(μ² − τ²)`
/// (absent when `μ = τ`), and `r2` for the diagonal case
/// `∫_0^t sin((t−s)τ)/τ cos(sτ) ds = t sin(tτ)/(2τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigResiduals {
    pub r1: Option<f64>,
    pub r2: f64,
}

pub fn trig_identity_residuals(t: f64, mu: f64, tau: f64) -> Result<TrigResiduals> {
    if !(mu > 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("mu and tau must be positive, got {mu}, {tau}")));
    }
    let panel = std::f64::consts::PI / (mu + tau).max(1.0);
    let r1 = if mu != tau {
        let q = integrate(|s| ((t - s) * mu).sin() / mu * (s * tau).cos(), 0.0, t, panel, 1e-14)?;
        let closed = ((t * tau).cos() - (t * mu).cos()) / (mu * mu - tau * tau);
        Some((q - closed).abs())
    } else {
        None
    };
    let q = integrate(|s| ((t - s) * tau).sin() / tau * (s * tau).cos(), 0.0, t, panel, 1e-14)?;
    let r2 = (q - t * (t * tau).sin() / (2.0 * tau)).abs();
    Ok(TrigResiduals { r1, r2 })
}

/// One term `(c₀ + c₁ s + c₂ s²) cos(2π f x + φ)` of a smooth profile `m(s, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub frequency: i64,
    pub phase: f64,
    pub coeffs: [f64; 3],
}

/// Data for one instance of the `δ_τ`-lemma on the one-dimensional torus,
/// discretized on `grid` equispaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaLemmaInstance {
    pub grid: usize,
    pub delta: f64,
    pub profile: Vec<ProfileTerm>,
    /// `δ_{τ_k} ∈ [0, δ]`.
    pub shifts: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    /// Orthonormal functions sampled on the grid, one row per `k`.
    pub functions: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaLemmaOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl DeltaLemmaInstance {
    fn profile_at(&self, s: f64, x: f64) -> f64 {
        self.profile
            .iter()
            .map(|p| (p.coeffs[0] + s * (p.coeffs[1] + s * p.coeffs[2])) * (2.0 * std::f64::consts::PI * p.frequency as f64 * x + p.phase).cos())
            .sum()
    }

    fn profile_ds(&self, s: f64, x: f64) -> f64 {
        self.profile
            .iter()
            .map(|p| (p.coeffs[1] + 2.0 * s * p.coeffs[2]) * (2.0 * std::f64::consts::PI * p.frequency as f64 * x + p.phase).cos())
            .sum()
    }

    fn l2(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = 1.0 / self.grid as f64;
        ((0..self.grid).map(|i| g(i as f64 * h).powi(2)).sum::<f64>() * h).sqrt()
    }
}

/// `∫|Σ_k m(δ_k, x) a_k e_k(x)| dx` versus
/// `(‖m(0,·)‖₂ + ∫_0^δ ‖∂_s m(s,·)‖₂ ds)(Σ|a_k|²)^{1/2}`.
pub fn delta_lemma_check(inst: &DeltaLemmaInstance) -> Result<DeltaLemmaOutcome> {
    if inst.shifts.iter().any(|&d| d < 0.0 || d > inst.delta) {
        return Err(Error::InvalidArgument("shifts must lie in [0, delta]".into()));
    }
    if inst.shifts.len() != inst.coefficients.len() || inst.functions.len() != inst.coefficients.len() {
        return Err(Error::InvalidArgument("shifts, coefficients and functions must have equal length".into()));
    }
    let h = 1.0 / inst.grid as f64;
    let lhs = (0..inst.grid)
        .map(|i| {
            let x = i as f64 * h;
            inst.shifts
                .iter()
                .zip(&inst.coefficients)
                .zip(&inst.functions)
                .map(|((&d, &a), e)| a * e[i] * inst.profile_at(d, x))
                .sum::<Complex64>()
                .norm()
        })
        .sum::<f64>()
        * h;
    let base = inst.l2(|x| inst.profile_at(0.0, x));
    let variation = if inst.delta > 0.0 {
        integrate(|s| inst.l2(|x| inst.profile_ds(s, x)), 0.0, inst.delta, inst.delta, 1e-13)?
    } else {
        0.0
    };
    let a_norm = inst.coefficients.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let rhs = (base + variation) * a_norm;
    Ok(DeltaLemmaOutcome { lhs, rhs, ok: lhs <= rhs * (1.0 + 1e-8) })
}
