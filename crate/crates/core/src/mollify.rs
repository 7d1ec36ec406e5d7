//! Smoothing functions: the compactly supported bump `ρ`, the Schwartz
//! window `χ` with compactly supported Fourier transform, and the
//! mollified indicator `1̃_λ` at arbitrary time width `T`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::galerkin::{Counted, SpectralData};
use crate::quadrature::integrate;

/// Absolute tolerance of every oscillatory quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

fn transition(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = transition(x);
        a / (a + transition(1.0 - x))
    }
}

/// Even bump, equal to 1 on `[−½, ½]` and supported in `(−1, 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpRho;

impl BumpRho {
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 {
            1.0
        } else if a >= 1.0 {
            0.0
        } else {
            smooth_step(2.0 * (1.0 - a))
        }
    }
}

pub fn build_rho() -> BumpRho {
    BumpRho
}

/// `sin(λt)/t`, continuous at the origin.
#[inline]
pub fn sinc_scaled(lambda: f64, t: f64) -> f64 {
    if t.abs() < 1e-8 {
        let z = lambda * t;
        lambda * (1.0 - z * z / 6.0)
    } else {
        (lambda * t).sin() / t
    }
}

fn oscillatory(a: f64, b: f64, omega: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let panel = PI / omega.abs().max(1.0);
    integrate(f, a, b, panel, QUAD_TOL)
}

/// `φ_1(s) = (1/2π) ∫ ρ(t) e^{its} dt`, the kernel whose transform is `ρ`.
pub fn mollifier_kernel(s: f64) -> Result<f64> {
    let rho = BumpRho;
    Ok(oscillatory(0.0, 1.0, s, |t| rho.eval(t) * (s * t).cos())? / PI)
}

/// `φ_1'(s)`.
pub fn mollifier_kernel_derivative(s: f64) -> Result<f64> {
    let rho = BumpRho;
    Ok(-oscillatory(0.0, 1.0, s, |t| rho.eval(t) * t * (s * t).sin())? / PI)
}

/// `Φ_1(u) = ∫_0^u φ_1 = (1/π) ∫_0^1 ρ(t) sin(ut)/t dt`.
pub fn mollifier_antiderivative(u: f64) -> Result<f64> {
    let rho = BumpRho;
    Ok(oscillatory(0.0, 1.0, u, |t| rho.eval(t) * sinc_scaled(u, t))? / PI)
}

/// Nonnegative Schwartz window `χ = A·φ²`, where `φ` is the inverse
/// transform of the bump `ρ(4·)`; hence `χ̂` is supported in `[−½, ½]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwartzChi {
    pub amplitude: f64,
}

impl SchwartzChi {
    /// Half-width of the support of `χ̂`.
    pub const TRANSFORM_SUPPORT: f64 = 0.5;

    fn profile(tau: f64) -> Result<f64> {
        let rho = BumpRho;
        Ok(oscillatory(0.0, 0.25, tau, |t| rho.eval(4.0 * t) * (tau * t).cos())? / PI)
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        let p = Self::profile(tau)?;
        Ok(self.amplitude * p * p)
    }
}

pub fn build_chi() -> Result<SchwartzChi> {
    // profile is positive and decreasing on [0, 1]; pin χ(±1) = 2
    let p1 = SchwartzChi::profile(1.0)?;
    Ok(SchwartzChi { amplitude: 2.0 / (p1 * p1) })
}

/// `χ(T(λ−τ)) + χ(T(λ+τ))`.
pub fn chi_window(chi: &SchwartzChi, lambda: f64, width: f64, tau: f64) -> Result<f64> {
    Ok(chi.eval(width * (lambda - tau))? + chi.eval(width * (lambda + tau))?)
}

/// `1̃_λ(τ) = (1/π) ∫ ρ(t/T) (sin λt / t) cos(τt) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifiedIndicator {
    pub lambda: f64,
    pub width: f64,
    #[serde(skip)]
    pub rho: BumpRho,
}

impl MollifiedIndicator {
    pub fn new(lambda: f64, width: f64) -> Result<Self> {
        if !(width >= 1.0) {
            return Err(Error::InvalidArgument(format!("time width T must be >= 1, got {width}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
        }
        Ok(Self { lambda, width, rho: BumpRho })
    }

    /// Time-domain quadrature.
    pub fn value(&self, tau: f64) -> Result<f64> {
        let (lambda, width) = (self.lambda, self.width);
        let v = oscillatory(0.0, width, lambda + tau.abs(), |t| {
            self.rho.eval(t / width) * sinc_scaled(lambda, t) * (tau * t).cos()
        })?;
        Ok(2.0 * v / PI)
    }

    /// Same value as the convolution `(1_{[−λ,λ]} ⋆ φ_T)(τ)`.
    pub fn convolution_value(&self, tau: f64) -> Result<f64> {
        let w = self.width;
        Ok(mollifier_antiderivative(w * (tau + self.lambda))? - mollifier_antiderivative(w * (tau - self.lambda))?)
    }

    /// `d^j/dτ^j 1̃_λ(τ)` for `j ∈ {1, 2}`, differentiating under the integral.
    pub fn derivative(&self, tau: f64, order: u32) -> Result<f64> {
        let (lambda, width) = (self.lambda, self.width);
        let rho = self.rho;
        let v = match order {
            1 => oscillatory(0.0, width, lambda + tau.abs(), |t| {
                -rho.eval(t / width) * sinc_scaled(lambda, t) * t * (tau * t).sin()
            })?,
            2 => oscillatory(0.0, width, lambda + tau.abs(), |t| {
                -rho.eval(t / width) * sinc_scaled(lambda, t) * t * t * (tau * t).cos()
            })?,
            j => return Err(Error::InvalidArgument(format!("derivative order must be 1 or 2, got {j}"))),
        };
        Ok(2.0 * v / PI)
    }

    /// Unsmoothed indicator `1_{[−λ,λ]}(τ)`.
    pub fn sharp(&self, tau: f64) -> f64 {
        if tau.abs() <= self.lambda {
            1.0
        } else {
            0.0
        }
    }
}

/// Which quantity a decay fit measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayTarget {
    /// `1_λ − 1̃_λ`
    IndicatorError,
    /// `d^j/dτ^j 1̃_λ`
    Derivative(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub constant: f64,
    /// `τ` at which the maximum was attained.
    pub argmax: f64,
    pub points: usize,
}

/// `C_N = max_τ |target(τ)| (1 + T|λ−τ|)^N` over a grid on `[1, 4λ]` with
/// spacing `min(½, 1/(2T))`.
pub fn decay_fit(target: DecayTarget, lambda: f64, width: f64, order: i32) -> Result<DecayFit> {
    if order > 6 {
        return Err(Error::InvalidArgument(format!("decay order must be <= 6, got {order}")));
    }
    let mi = MollifiedIndicator::new(lambda, width)?;
    let step = (0.5f64).min(0.5 / width);
    let points = (((4.0 * lambda - 1.0) / step).floor() as usize).max(1) + 1;
    let values: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .map(|i| {
            let tau = 1.0 + step * i as f64;
            let v = match target {
                DecayTarget::IndicatorError => mi.sharp(tau) - mi.value(tau)?,
                DecayTarget::Derivative(j) => mi.derivative(tau, j)?,
            };
            Ok((tau, v.abs() * (1.0 + width * (lambda - tau).abs()).powi(order)))
        })
        .collect::<Result<_>>()?;
    let (argmax, constant) = values.into_iter().fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(DecayFit { constant, argmax, points })
}

/// `Σ_k 1̃_λ(τ_k)`.
pub fn smoothed_trace(s: &SpectralData, mi: &MollifiedIndicator) -> Result<(f64, bool)> {
    let mut total = 0.0;
    let mut comp = 0.0;
    for &tau in &s.frequencies {
        let v = mi.value(tau)? - comp;
        let t = total + v;
        comp = (t - total) - v;
        total = t;
    }
    let reliable = mi.lambda + 3.0 <= s.reliable_band();
    Ok((total, reliable))
}

/// Reliability tag reused from counting.
pub fn smoothed_trace_counted(s: &SpectralData, mi: &MollifiedIndicator) -> Result<(f64, Counted)> {
    let (v, reliable) = smoothed_trace(s, mi)?;
    Ok((v, Counted { value: s.count_below(mi.lambda) as u64, reliable }))
}
