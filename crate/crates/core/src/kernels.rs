//! Heat, inverse-power and cutoff-resolvent kernels evaluated as eigen-sums,
//! together with the majorants they are compared against.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{Eigenvectors, SpectralData};
use crate::mollify::smooth_step;
use crate::potentials::{kato_kernel, periodic_distance};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Heat,
    InversePower,
    Resolvent,
    DyadicProjector,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Heat => "heat",
            KernelKind::InversePower => "inverse_power",
            KernelKind::Resolvent => "resolvent",
            KernelKind::DyadicProjector => "dyadic_projector",
        }
    }
}

/// One kernel evaluation with its majorant at the same point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub kind: KernelKind,
    /// `t`, `j`, `τ` or `λ` depending on `kind`.
    pub parameter: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: Complex64,
    pub bound_value: f64,
}

impl KernelSample {
    pub fn ratio(&self) -> f64 {
        self.value.norm() / self.bound_value
    }
}

/// Smallest `C` with `|value| <= C·bound_value` on the sample set.
pub fn fitted_constant(samples: &[KernelSample]) -> f64 {
    samples.iter().map(KernelSample::ratio).fold(0.0, f64::max)
}

/// `Σ_k exp(−t τ_k²)`.
pub fn heat_trace(s: &SpectralData, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("heat time must be nonnegative, got {t}")));
    }
    Ok(s.eigenvalues_sq.iter().rev().map(|l| (-t * l).exp()).sum())
}

fn pair_weights(s: &SpectralData, x: &[f64], y: &[f64]) -> Vec<Complex64> {
    let ex = s.eigenfunction_values(x);
    if x == y {
        return ex.iter().map(|e| Complex64::new(e.norm_sqr(), 0.0)).collect();
    }
    let ey = s.eigenfunction_values(y);
    ex.iter().zip(&ey).map(|(a, b)| a * b.conj()).collect()
}

/// `Σ_k exp(−t τ_k²) e_k(x) conj(e_k(y))`.
pub fn heat_kernel(s: &SpectralData, t: f64, x: &[f64], y: &[f64]) -> Complex64 {
    let w = pair_weights(s, x, y);
    s.eigenvalues_sq.iter().zip(&w).rev().map(|(l, w)| w * (-t * l).exp()).sum()
}

/// `Σ_k exp(−t τ_k²) |e_k(x)|²`.
pub fn heat_kernel_diag(s: &SpectralData, t: f64, x: &[f64]) -> f64 {
    heat_kernel(s, t, x, x).re
}

/// `Σ_k τ_k^{−2j} e_k(x) conj(e_k(y))`.
pub fn inverse_power_kernel(s: &SpectralData, j: u32, x: &[f64], y: &[f64]) -> Result<Complex64> {
    if j == 0 {
        return Err(Error::InvalidArgument("power j must be at least 1".into()));
    }
    let w = pair_weights(s, x, y);
    Ok(s.eigenvalues_sq.iter().zip(&w).rev().map(|(l, w)| w * l.powi(-(j as i32))).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversePowerCheck {
    pub direct: Complex64,
    pub integral: Complex64,
    pub residual: f64,
    /// Majorant of the neglected part of the time integral.
    pub tail_bound: f64,
    /// Upper end of the integrated time range.
    pub t_max: f64,
}

const TAIL_TOL: f64 = 1e-14;

fn factorial(j: u32) -> f64 {
    (1..=j).map(f64::from).product()
}

/// Direct eigen-sum against `∫_0^∞ t^{j−1} heat(t, x, y) dt / (j−1)!`.
///
/// The time integral is split at `t = 1`; beyond that every term carries the
/// factor `exp(−τ₁²(t−1))`, which fixes where the integral can be cut off.
pub fn inverse_power_cross_check(s: &SpectralData, j: u32, x: &[f64], y: &[f64]) -> Result<InversePowerCheck> {
    let direct = inverse_power_kernel(s, j, x, y)?;
    let w = pair_weights(s, x, y);
    let lam = &s.eigenvalues_sq;
    let floor = lam.first().copied().ok_or_else(|| Error::InvalidArgument("empty spectrum".into()))?;
    if floor <= 0.0 {
        return Err(Error::Precondition(format!("lowest eigenvalue {floor} is not positive")));
    }
    let jm1 = (j - 1) as i32;
    let integrand = |t: f64, part: fn(Complex64) -> f64| -> f64 {
        let tp = t.powi(jm1);
        lam.iter().zip(&w).rev().map(|(l, w)| part(*w) * (-t * l).exp()).sum::<f64>() * tp
    };
    let scale: f64 = w.iter().map(|w| w.norm()).sum::<f64>().max(f64::MIN_POSITIVE);

    // |heat(t)| <= exp(−floor (t−1)) M for t >= 1
    let m1: f64 = lam.iter().zip(&w).map(|(l, w)| w.norm() * (-l).exp()).sum();
    let tail_after = |t_max: f64| -> f64 {
        // ∫_{t_max}^∞ t^{j−1} e^{−floor (t−1)} dt, bounded by a geometric series over unit panels
        let mut total = 0.0;
        let mut t = t_max;
        loop {
            let piece = (t + 1.0).powi(jm1) * (-floor * (t - 1.0)).exp();
            total += piece;
            if piece < 1e-3 * total || piece == 0.0 {
                break;
            }
            t += 1.0;
        }
        m1 * total
    };
    let mut t_max = 2.0;
    while tail_after(t_max) > TAIL_TOL * scale && t_max < 1e6 {
        t_max *= 1.5;
    }
    let tail_bound = tail_after(t_max);

    let part = |p: fn(Complex64) -> f64| -> Result<f64> {
        let tol = 1e-13 * scale;
        let mut acc = integrate(|t| integrand(t, p), 0.0, 2f64.powi(-40), 1.0, tol)?;
        for i in (0..40).rev() {
            let (a, b) = (2f64.powi(-i - 1), 2f64.powi(-i));
            acc += integrate(|t| integrand(t, p), a, b, 1.0, tol)?;
        }
        acc += integrate(|t| integrand(t, p), 1.0, t_max, 1.0, tol)?;
        Ok(acc)
    };
    let (re, im) = if w.iter().all(|w| w.im == 0.0) {
        (part(|c| c.re)?, 0.0)
    } else {
        (part(|c| c.re)?, part(|c| c.im)?)
    };
    let integral = Complex64::new(re, im) / factorial(j - 1);
    Ok(InversePowerCheck { direct, integral, residual: (direct - integral).norm(), tail_bound, t_max })
}

/// Cutoff `η(s)`: zero for `s <= 2`, one for `s >= 4`.
pub fn resolvent_cutoff(s: f64) -> f64 {
    smooth_step((s - 2.0) / 2.0)
}

/// Weight applied to mode `k` of a ball truncation of radius `cutoff`: one up
/// to `cutoff/2`, then a smooth roll-off to zero at `cutoff`. A sharp edge
/// leaves ringing of size `O(1/K)` that swamps the off-diagonal kernel.
pub fn truncation_taper(norm: f64, cutoff: f64) -> f64 {
    1.0 - smooth_step(2.0 * norm / cutoff - 1.0)
}

/// `R_τ(x, y) = Σ_j η(λ_j/τ) (λ_j² − τ²)^{−1} e_j(x) conj(e_j(y))` over the
/// free basis, with the tail rolled off by [`truncation_taper`].
pub fn resolvent_kernel(s0: &SpectralData, tau: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if tau < 2.0 {
        return Err(Error::InvalidArgument(format!("resolvent parameter must be at least 2, got {tau}")));
    }
    let order = match &s0.vectors {
        Eigenvectors::Standard(order) => order,
        Eigenvectors::Dense(_) => {
            return Err(Error::Precondition("resolvent kernel is built from free eigenfunctions".into()));
        }
    };
    let w = pair_weights(s0, x, y);
    let tau2 = tau * tau;
    let cutoff = s0.cutoff() as f64;
    Ok((0..s0.dim())
        .rev()
        .map(|j| {
            let eta = resolvent_cutoff(s0.frequencies[j] / tau);
            if eta == 0.0 {
                return 0.0;
            }
            let norm = (s0.modes[order[j]].norm_sq() as f64).sqrt();
            eta * truncation_taper(norm, cutoff) * w[j].re / (s0.eigenvalues_sq[j] - tau2)
        })
        .sum())
}

/// `τ^{n−2} h_n(τd) (1 + τd)^{−order}`.
pub fn resolvent_bound(n: usize, tau: f64, d: f64, order: i32) -> f64 {
    tau.powi(n as i32 - 2) * kato_kernel(n, tau * d) * (1.0 + tau * d).powi(-order)
}

pub fn resolvent_sample(s0: &SpectralData, tau: f64, x: &[f64], y: &[f64], order: i32, min_distance: f64) -> Result<KernelSample> {
    let value = resolvent_kernel(s0, tau, x, y)?;
    let d = periodic_distance(x, y).max(min_distance);
    Ok(KernelSample {
        kind: KernelKind::Resolvent,
        parameter: tau,
        x: x.to_vec(),
        y: y.to_vec(),
        value: Complex64::new(value, 0.0),
        bound_value: resolvent_bound(s0.n, tau, d, order),
    })
}

pub fn heat_sample(s: &SpectralData, t: f64, x: &[f64]) -> KernelSample {
    KernelSample {
        kind: KernelKind::Heat,
        parameter: t,
        x: x.to_vec(),
        y: x.to_vec(),
        value: Complex64::new(heat_kernel_diag(s, t, x), 0.0),
        bound_value: t.powf(-(s.n as f64) / 2.0),
    }
}

pub fn inverse_power_sample(s: &SpectralData, j: u32, x: &[f64], y: &[f64], min_distance: f64) -> Result<KernelSample> {
    let value = inverse_power_kernel(s, j, x, y)?;
    let d = periodic_distance(x, y).max(min_distance);
    let exponent = 2 * j as i32 - s.n as i32;
    let bound_value = match exponent {
        e if e < 0 => d.powi(e),
        0 => (2.0 + 1.0 / d).ln(),
        _ => 1.0,
    };
    Ok(KernelSample { kind: KernelKind::InversePower, parameter: j as f64, x: x.to_vec(), y: y.to_vec(), value, bound_value })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorSup {
    pub lambda: f64,
    pub sup: f64,
    pub argmax: Vec<f64>,
    /// `sup / λ^n`.
    pub ratio: f64,
    pub reliable: bool,
}

/// `sup_x Σ_{τ_k ∈ [λ, 2λ)} |e_k(x)|²` over the grid of `grid^n` points.
pub fn dyadic_projector_sup(s: &SpectralData, lambda: f64, grid: usize) -> Result<ProjectorSup> {
    if grid == 0 || lambda <= 0.0 {
        return Err(Error::InvalidArgument("grid and lambda must be positive".into()));
    }
    let lo = s.frequencies.partition_point(|&t| t < lambda);
    let hi = s.frequencies.partition_point(|&t| t < 2.0 * lambda);
    let reliable = 2.0 * lambda <= s.reliable_band();
    if !reliable {
        log::warn!("dyadic band [{lambda}, {}) exceeds the reliable band {}", 2.0 * lambda, s.reliable_band());
    }
    let n = s.n;
    let total = grid.pow(n as u32);
    // ties go to the lowest flat index so the argmax does not depend on scheduling
    let (sup, _, arg) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut flat = idx;
            let mut x = vec![0.0; n];
            for xi in x.iter_mut().rev() {
                *xi = (flat % grid) as f64 / grid as f64;
                flat /= grid;
            }
            let e = if lo < hi { s.eigenfunction_values(&x) } else { Vec::new() };
            let v: f64 = e.get(lo..hi).map_or(0.0, |b| b.iter().map(|c| c.norm_sqr()).sum());
            (v, idx, x)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(ProjectorSup { lambda, sup, argmax: arg, ratio: sup / lambda.powi(n as i32), reliable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{assemble, diagonalize};
    use crate::lattice::count_free;
    use crate::potentials::{sample, PotentialKind, PotentialSpec};
    use std::f64::consts::PI;

    #[test]
    fn heat_trace_limits() {
        let s = SpectralData::free(2, 4).unwrap();
        assert_eq!(heat_trace(&s, 0.0).unwrap(), s.dim() as f64);
        let t = 3.0;
        assert!((heat_trace(&s, t).unwrap() / (-t).exp() - 1.0).abs() < 1e-12);
        assert!(heat_trace(&s, 0.2).unwrap() < heat_trace(&s, 0.1).unwrap());
    }

    #[test]
    fn free_heat_trace_small_time() {
        let s = SpectralData::free(2, 40).unwrap();
        let t: f64 = 0.02;
        let scaled = t * t.exp() * heat_trace(&s, t).unwrap();
        assert!((scaled * 4.0 * PI - 1.0).abs() < 0.05, "{scaled}");
    }

    #[test]
    fn free_heat_diagonal_is_flat() {
        let s = SpectralData::free(2, 6).unwrap();
        let tr = heat_trace(&s, 0.1).unwrap();
        for x in [[0.0, 0.0], [0.31, 0.77], [0.5, 0.25]] {
            assert!((heat_kernel_diag(&s, 0.1, &x) - tr).abs() < 1e-10 * tr);
        }
    }

    #[test]
    fn heat_diagonal_peaks_in_a_well() {
        let spec = PotentialSpec::new(
            1,
            PotentialKind::IndicatorWell { inside: -200.0, outside: 0.0, radius: 0.1, center: Some(vec![0.5]) },
        );
        let v = sample(&spec, 64).unwrap().with_fourier(24).unwrap();
        let s = diagonalize(&assemble(1, 12, &v).unwrap()).unwrap();
        let t = 0.05;
        assert!(heat_kernel_diag(&s, t, &[0.5]) > heat_kernel_diag(&s, t, &[0.0]));
        assert!(heat_kernel_diag(&s, t, &[0.0]) > -1e-8);
    }

    #[test]
    fn inverse_power_identity_free() {
        let s = SpectralData::free(2, 6).unwrap();
        for (j, x, y) in [(1, [0.1, 0.2], [0.4, 0.9]), (2, [0.3, 0.3], [0.3, 0.3]), (3, [0.0, 0.5], [0.7, 0.1])] {
            let c = inverse_power_cross_check(&s, j, &x, &y).unwrap();
            assert!(c.residual <= 1e-6, "j={j}: {c:?}");
            assert!(c.tail_bound <= 1e-12);
        }
    }

    #[test]
    fn inverse_power_identity_with_potential() {
        let spec = PotentialSpec::new(1, PotentialKind::IndicatorWell { inside: -30.0, outside: 0.0, radius: 0.2, center: Some(vec![0.5]) });
        let v = sample(&spec, 64).unwrap().with_fourier(20).unwrap();
        let s = diagonalize(&assemble(1, 10, &v).unwrap()).unwrap();
        let c = inverse_power_cross_check(&s, 1, &[0.45], &[0.1]).unwrap();
        assert!(c.residual <= 1e-6, "{c:?}");
    }

    #[test]
    fn inverse_power_diagonal_behaviour_in_three_dimensions() {
        let x = [0.0, 0.0, 0.0];
        let vals: Vec<f64> = [2, 4, 6].iter().map(|&k| inverse_power_kernel(&SpectralData::free(3, k).unwrap(), 1, &x, &x).unwrap().re).collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
        let bounded: Vec<f64> = [4, 6, 8].iter().map(|&k| inverse_power_kernel(&SpectralData::free(3, k).unwrap(), 2, &x, &x).unwrap().re).collect();
        assert!((bounded[2] - bounded[1]).abs() < (bounded[1] - bounded[0]).abs());
    }

    #[test]
    fn resolvent_cutoff_shape() {
        assert_eq!(resolvent_cutoff(2.0), 0.0);
        assert_eq!(resolvent_cutoff(4.0), 1.0);
        assert!(resolvent_cutoff(3.0) > 0.0 && resolvent_cutoff(3.0) < 1.0);
    }

    #[test]
    fn resolvent_converges_off_diagonal() {
        let (x, y) = ([0.0, 0.0], [0.5, 0.0]);
        let a = resolvent_kernel(&SpectralData::free(2, 40).unwrap(), 8.0, &x, &y).unwrap();
        let b = resolvent_kernel(&SpectralData::free(2, 60).unwrap(), 8.0, &x, &y).unwrap();
        assert!((a - b).abs() < 1e-4 * a.abs(), "{a} vs {b}");
        let c = resolvent_sample(&SpectralData::free(2, 40).unwrap(), 8.0, &x, &y, 4, 0.0).unwrap();
        assert!(c.ratio() < 10.0);
    }

    #[test]
    fn resolvent_ignores_low_modes() {
        // every mode has λ_j <= 2τ, so the sum is empty
        let s = SpectralData::free(2, 2).unwrap();
        assert_eq!(resolvent_kernel(&s, 8.0, &[0.0, 0.0], &[0.1, 0.0]).unwrap(), 0.0);
        assert!(resolvent_kernel(&s, 1.0, &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn dyadic_projector_free_equals_band_count() {
        let s = SpectralData::free(2, 8).unwrap();
        let lambda = 10.0;
        let p = dyadic_projector_sup(&s, lambda, 4).unwrap();
        let band = count_free(2, 2.0 * lambda - 1e-9).unwrap() - count_free(2, lambda - 1e-9).unwrap();
        assert!((p.sup - band as f64).abs() < 1e-9);
        assert_eq!(dyadic_projector_sup(&s, 0.1, 4).unwrap().sup, 0.0);
    }
}
