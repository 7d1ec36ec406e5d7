//! Weyl remainders, exponent fits, band-count experiments and the exponent
//! bootstrap recurrences for the torus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::SpectralData;
use crate::lattice::{check_dim, unit_ball_volume, weyl_main_term, FreeCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesSource {
    FreeExact,
    Galerkin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderSeries {
    pub n: usize,
    pub source: SeriesSource,
    pub lambdas: Vec<f64>,
    pub counts: Vec<u64>,
    pub main: Vec<f64>,
    pub remainders: Vec<f64>,
    pub provenance: String,
}

/// `start, start·factor, …` up to and including `stop` (when hit).
pub fn geometric_ladder(start: f64, stop: f64, factor: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && factor > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ladder needs 0 < start <= stop and factor > 1, got ({start}, {stop}, {factor})"
        )));
    }
    let steps = ((stop / start).ln() / factor.ln() + 1e-9).floor() as i32;
    Ok((0..=steps).map(|i| start * factor.powi(i)).collect())
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas[0] <= 0.0 {
        return Err(Error::InvalidArgument("lambda grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Assembles a series from counts; remainders are `count − main` by construction.
pub fn series_from_counts(n: usize, source: SeriesSource, lambdas: Vec<f64>, counts: Vec<u64>, provenance: String) -> Result<RemainderSeries> {
    check_grid(&lambdas)?;
    if counts.len() != lambdas.len() {
        return Err(Error::InvalidArgument("one count per lambda required".into()));
    }
    let main: Vec<f64> = lambdas.iter().map(|&l| weyl_main_term(n, l)).collect();
    let remainders = counts.iter().zip(&main).map(|(&c, m)| c as f64 - m).collect();
    Ok(RemainderSeries { n, source, lambdas, counts, main, remainders, provenance })
}

/// Exact free counts `N^0(λ)`.
pub fn build_series_free(n: usize, lambdas: &[f64]) -> Result<RemainderSeries> {
    build_series_constant(n, 0.0, lambdas)
}

/// Exact counts for the constant potential `V ≡ c`, namely `N^0(√(λ² − c))`.
pub fn build_series_constant(n: usize, c: f64, lambdas: &[f64]) -> Result<RemainderSeries> {
    check_dim(n)?;
    check_grid(lambdas)?;
    let top = *lambdas.last().unwrap();
    let counter = FreeCounter::new(n, (top * top - c).max(0.0).sqrt())?;
    let counts = lambdas
        .iter()
        .map(|&l| {
            let arg = l * l - c;
            if arg < 0.0 {
                Ok(0)
            } else {
                counter.count(arg.sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = if c == 0.0 { "free".to_string() } else { format!("constant:{c}") };
    series_from_counts(n, SeriesSource::FreeExact, lambdas.to_vec(), counts, provenance)
}

/// Counts from a Galerkin spectrum; every `λ` must lie in its reliable band.
pub fn build_series_galerkin(s: &SpectralData, lambdas: &[f64]) -> Result<RemainderSeries> {
    check_grid(lambdas)?;
    let band = s.reliable_band();
    if let Some(&top) = lambdas.last() {
        if top > band {
            return Err(Error::Precondition(format!("lambda {top} exceeds the reliable band {band}")));
        }
    }
    let counts = lambdas.iter().map(|&l| s.count_below(l) as u64).collect();
    let provenance = format!("K={},G={},V={}", s.provenance.cutoff, s.provenance.grid, s.provenance.spec_hash);
    series_from_counts(s.n, SeriesSource::Galerkin, lambdas.to_vec(), counts, provenance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(λ at the block maximum, max |R| over the block)`.
    pub bins: Vec<(f64, f64)>,
}

pub const MIN_FIT_POINTS: usize = 8;
pub const MIN_FIT_BINS: usize = 3;

/// Maximum of `|R|` over each dyadic block `[2^j λ_lo, 2^{j+1} λ_lo)`.
pub fn dyadic_max_bins(lambdas: &[f64], values: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut bins: Vec<(i32, f64, f64)> = Vec::new();
    for (&l, &v) in lambdas.iter().zip(values) {
        if l < lo || l > hi || v == 0.0 {
            continue;
        }
        let block = (l / lo).log2().floor() as i32;
        match bins.last_mut() {
            Some(b) if b.0 == block => {
                if v.abs() > b.2 {
                    b.1 = l;
                    b.2 = v.abs();
                }
            }
            _ => bins.push((block, l, v.abs())),
        }
    }
    bins.into_iter().map(|(_, l, v)| (l, v)).collect()
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Log–log slope of the dyadically binned `|R|` over `window = (lo, hi)`.
pub fn fit_exponent(series: &RemainderSeries, window: (f64, f64)) -> Result<ExponentFit> {
    fit_exponent_raw(&series.lambdas, &series.remainders, window)
}

pub fn fit_exponent_raw(lambdas: &[f64], values: &[f64], window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    let nonzero = lambdas.iter().zip(values).filter(|(&l, &v)| l >= lo && l <= hi && v != 0.0).count();
    if nonzero < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!("{nonzero} nonzero points in window, need {MIN_FIT_POINTS}")));
    }
    let bins = dyadic_max_bins(lambdas, values, lo, hi);
    if bins.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientData(format!("{} dyadic blocks in window, need {MIN_FIT_BINS}", bins.len())));
    }
    let logs: Vec<(f64, f64)> = bins.iter().map(|&(l, v)| (l.ln(), v.ln())).collect();
    let (slope, intercept, r2) = least_squares(&logs);
    Ok(ExponentFit { slope, intercept, r2, bins })
}

/// Band width as a function of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum WidthRule {
    Fixed { epsilon: f64 },
    /// `λ^{−a}`.
    Power { a: f64 },
    /// `1/log λ`.
    InverseLog,
    Unit,
}

impl WidthRule {
    pub fn width(&self, lambda: f64) -> Result<f64> {
        let w = match *self {
            WidthRule::Fixed { epsilon } => epsilon,
            WidthRule::Power { a } => lambda.powf(-a),
            WidthRule::InverseLog => 1.0 / lambda.ln(),
            WidthRule::Unit => 1.0,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("width rule {self:?} gives {w} at lambda {lambda}")));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub lambda: f64,
    pub width: f64,
    pub count: u64,
    /// `count / (width · λ^{n−1})`.
    pub per_width: f64,
    /// `count / λ^{n−1−a}` with `a = (n−1)/(n+1)`.
    pub per_power: f64,
}

/// Counting source for band experiments.
pub enum BandSource<'a> {
    Free(usize),
    Spectrum(&'a SpectralData),
}

/// `a = (n−1)/(n+1)`.
pub fn hlawka_gain(n: usize) -> f64 {
    (n as f64 - 1.0) / (n as f64 + 1.0)
}

/// Counts in the closed band `[λ, λ + w(λ)]` along a ladder.
pub fn band_experiment(source: &BandSource, lambdas: &[f64], rule: WidthRule) -> Result<Vec<BandRow>> {
    check_grid(lambdas)?;
    let widths = lambdas.iter().map(|&l| rule.width(l)).collect::<Result<Vec<_>>>()?;
    let top = lambdas.iter().zip(&widths).map(|(l, w)| l + w).fold(0.0, f64::max);
    let n = match source {
        BandSource::Free(n) => *n,
        BandSource::Spectrum(s) => s.n,
    };
    let counts: Vec<u64> = match source {
        BandSource::Free(n) => {
            let counter = FreeCounter::new(*n, top)?;
            lambdas
                .par_iter()
                .zip(&widths)
                .map(|(&l, &w)| Ok(counter.count(l + w)? - counter.count(l.next_down())?))
                .collect::<Result<_>>()?
        }
        BandSource::Spectrum(s) => {
            if top > s.reliable_band() {
                log::warn!("band experiment reaches {top}, beyond the reliable band {}", s.reliable_band());
            }
            lambdas
                .iter()
                .zip(&widths)
                .map(|(&l, &w)| {
                    let lo = s.frequencies.partition_point(|&t| t < l);
                    let hi = s.frequencies.partition_point(|&t| t <= l + w);
                    (hi - lo) as u64
                })
                .collect()
        }
    };
    let a = hlawka_gain(n);
    Ok(lambdas
        .iter()
        .zip(&widths)
        .zip(counts)
        .map(|((&lambda, &width), count)| BandRow {
            lambda,
            width,
            count,
            per_width: count as f64 / (width * lambda.powi(n as i32 - 1)),
            per_power: count as f64 / lambda.powf(n as f64 - 1.0 - a),
        })
        .collect())
}

/// Limit of `count/(width·λ^{n−1})` for the free torus: `n ω_n (2π)^{−n}`.
pub fn band_density(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n) / (2.0 * std::f64::consts::PI).powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Onset {
    /// First ladder point after which every ratio stays at or below `bound`.
    pub lambda: f64,
    pub bound: f64,
    pub max_after: f64,
}

/// Empirical onset `Λ` of `ratio(λ) <= bound` over the rest of the ladder.
pub fn band_onset(rows: &[BandRow], ratio: impl Fn(&BandRow) -> f64, bound: f64) -> Option<Onset> {
    let last_bad = rows.iter().rposition(|r| ratio(r) > bound);
    let start = last_bad.map_or(0, |i| i + 1);
    let tail = rows.get(start..).filter(|t| !t.is_empty())?;
    Some(Onset { lambda: tail[0].lambda, bound, max_after: tail.iter().map(&ratio).fold(0.0, f64::max) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapVariant {
    Torus,
    N5,
    Lp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapState {
    pub variant: BootstrapVariant,
    pub n: usize,
    pub p: Option<f64>,
    pub a: f64,
    pub iterates: Vec<f64>,
    pub converged: bool,
    pub fixed_point: f64,
    pub steps: usize,
    /// The a-priori bound on the number of strictly increasing steps, when one is known.
    pub iteration_bound: Option<u64>,
    /// `μ(p)`, the guaranteed increment of the `L^p` recurrence.
    pub mu: Option<f64>,
}

pub const BOOTSTRAP_TOL: f64 = 1e-14;
pub const BOOTSTRAP_MAX_STEPS: usize = 200;

/// Iterates `step` from `b0` for at most `max_steps` steps, stopping early
/// once two consecutive iterates agree to [`BOOTSTRAP_TOL`] when `stop` is set.
pub fn iterate(step: impl Fn(f64) -> f64, b0: f64, max_steps: usize, stop: bool) -> (Vec<f64>, bool) {
    let mut it = vec![b0];
    let mut converged = false;
    for _ in 0..max_steps {
        let b = *it.last().unwrap();
        let next = step(b);
        it.push(next);
        if (next - b).abs() <= BOOTSTRAP_TOL {
            converged = true;
            if stop {
                break;
            }
        }
    }
    (it, converged)
}

fn state(variant: BootstrapVariant, n: usize, p: Option<f64>, a: f64, (iterates, converged): (Vec<f64>, bool)) -> BootstrapState {
    BootstrapState {
        variant,
        n,
        p,
        a,
        fixed_point: *iterates.last().unwrap(),
        steps: iterates.len() - 1,
        iterates,
        converged,
        iteration_bound: None,
        mu: None,
    }
}

/// One step of `n−1−b_{m+1} = max{n−2 + (n−1)/(2(n+1)) − b_m/2, n−1−a}`.
pub fn torus_step(n: usize, b: f64) -> f64 {
    let nf = n as f64;
    let a = hlawka_gain(n);
    let k = nf - 2.0 + (nf - 1.0) / (2.0 * (nf + 1.0)) - b / 2.0;
    (nf - 1.0) - k.max(nf - 1.0 - a)
}

/// `⌊((n−5)/(n+1) + 1)/(4/(n+1))⌋ + 1`, evaluated exactly as `⌊(n−2)/2⌋ + 1`.
pub fn torus_iteration_bound(n: usize) -> u64 {
    (n as u64).saturating_sub(2) / 2 + 1
}

pub fn bootstrap_torus(n: usize, b0: f64) -> Result<BootstrapState> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut s = state(BootstrapVariant::Torus, n, None, hlawka_gain(n), iterate(|b| torus_step(n, b), b0, BOOTSTRAP_MAX_STEPS, true));
    s.iteration_bound = Some(torus_iteration_bound(n));
    Ok(s)
}

pub fn n5_step(b: f64) -> f64 {
    (1.0 + b) / 2.0
}

/// `1 − 2^{1−m}`.
pub fn n5_closed_form(m: u32) -> f64 {
    1.0 - 2f64.powi(1 - m as i32)
}

/// Steps taken by [`bootstrap_n5`]; the recurrence only reaches 1 once the
/// gap underflows, so it runs a fixed length rather than stopping early.
pub const N5_STEPS: usize = 64;

pub fn bootstrap_n5(b0: f64) -> BootstrapState {
    state(BootstrapVariant::N5, 5, None, 1.0, iterate(n5_step, b0, N5_STEPS, false))
}

/// `k(b, p) = (n−1+a)/2 − 1 + ((n−1−b)/2)(2 − 2/p) + (n/2)(2/p − 1)`.
pub fn lp_exponent(n: usize, b: f64, p: f64) -> f64 {
    let nf = n as f64;
    let a = hlawka_gain(n);
    (nf - 1.0 + a) / 2.0 - 1.0 + (nf - 1.0 - b) / 2.0 * (2.0 - 2.0 / p) + nf / 2.0 * (2.0 / p - 1.0)
}

/// `μ(p)`, positive exactly when `p > 2n/(n+2)`.
pub fn lp_increment(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (nf + 3.0) / (2.0 * (nf + 1.0)) - 1.0 / p + 0.5
        - (2.0 * nf - (nf + 2.0) * p) / ((nf + 1.0) * (p - 1.0) * p)
        - (nf - 1.0) / ((nf + 1.0) * p)
}

pub fn lp_threshold(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 + 2.0)
}

pub fn lp_step(n: usize, p: f64, b: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) - lp_exponent(n, b, p).max(nf - 1.0 - hlawka_gain(n))
}

/// Two-dimensional variant: `1 − b_{m+1} = max{1/6 − b_m/2, 2/3}` from `b_0 = 0`.
pub fn lp_step_planar(b: f64) -> f64 {
    1.0 - (1.0 / 6.0 - b / 2.0).max(2.0 / 3.0)
}

pub fn bootstrap_lp(n: usize, p: f64, b0: f64) -> Result<BootstrapState> {
    match n {
        0 | 1 => Err(Error::UnsupportedDimension(n)),
        2 => Ok(state(BootstrapVariant::Lp, 2, Some(p), hlawka_gain(2), iterate(lp_step_planar, 0.0, BOOTSTRAP_MAX_STEPS, true))),
        _ => {
            let threshold = lp_threshold(n);
            if !(p > threshold) {
                return Err(Error::Precondition(format!("need p > 2n/(n+2) = {threshold} for n = {n}, got p = {p}")));
            }
            let mut s = state(BootstrapVariant::Lp, n, Some(p), hlawka_gain(n), iterate(|b| lp_step(n, p, b), b0, BOOTSTRAP_MAX_STEPS, true));
            let nf = n as f64;
            let mu = lp_increment(n, p);
            let switch = (2.0 * nf - (nf + 2.0) * p) / ((nf + 1.0) * (p - 1.0)) + hlawka_gain(n);
            s.mu = Some(mu);
            s.iteration_bound = Some(((switch + 1.0) / mu).floor().max(0.0) as u64 + 1);
            Ok(s)
        }
    }
}

/// Exact rational `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub const fn new(num: i64, den: i64) -> Self {
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Best known order of the free-torus remainder: `λ^e (log λ)^l`, with an
/// arbitrarily small extra power when `epsilon` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRemainder {
    pub n: usize,
    pub exponent: Rational,
    pub log_power: Option<Rational>,
    pub epsilon: bool,
}

pub fn reference_remainders(n: usize) -> Result<ReferenceRemainder> {
    let r = |exponent, log_power, epsilon| Ok(ReferenceRemainder { n, exponent, log_power, epsilon });
    match n {
        2 => r(Rational::new(131, 208), Some(Rational::new(18627, 8320)), false),
        3 => r(Rational::new(21, 16), None, true),
        4 => r(Rational::new(2, 1), Some(Rational::new(2, 3)), false),
        5..=8 => r(Rational::new(n as i64 - 2, 1), None, false),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}
