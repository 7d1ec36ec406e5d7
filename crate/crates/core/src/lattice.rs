//! Exact spectrum of the free operator `-Δ + 1` on the standard torus
//! `R^n / Z^n`, by enumeration of integer frequency vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;
pub const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Eigenvalue `4π²m + 1` of `H^0` on the shell `|k|² = m`.
#[inline]
pub fn shell_eigenvalue_sq(norm_sq: u64) -> f64 {
    FOUR_PI_SQ * norm_sq as f64 + 1.0
}

/// Frequency `sqrt(4π²m + 1)`; all threshold comparisons go through this.
#[inline]
pub fn shell_frequency(norm_sq: u64) -> f64 {
    shell_eigenvalue_sq(norm_sq).sqrt()
}

/// A plane wave `exp(2πi k·x)` together with its free eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeMode {
    pub k: Vec<i64>,
    pub eigenvalue_sq: f64,
    pub frequency: f64,
}

impl LatticeMode {
    pub fn new(k: Vec<i64>) -> Self {
        let m = norm_sq(&k);
        Self { k, eigenvalue_sq: shell_eigenvalue_sq(m), frequency: shell_frequency(m) }
    }

    pub fn norm_sq(&self) -> u64 {
        norm_sq(&self.k)
    }
}

pub fn norm_sq(k: &[i64]) -> u64 {
    k.iter().map(|&c| (c * c) as u64).sum()
}

/// Largest `m` with `frequency(m) <= lambda`, or `None` when `lambda < 1`.
pub fn max_shell_below(lambda: f64) -> Option<u64> {
    if !(lambda >= 1.0) {
        return None;
    }
    let mut m = (((lambda * lambda - 1.0) / FOUR_PI_SQ).max(0.0)).floor() as u64;
    while m > 0 && shell_frequency(m) > lambda {
        m -= 1;
    }
    while shell_frequency(m + 1) <= lambda {
        m += 1;
    }
    Some(m)
}

fn push_vectors(prefix: &mut Vec<i64>, remaining_dims: usize, budget: u64, out: &mut Vec<Vec<i64>>) {
    if remaining_dims == 0 {
        out.push(prefix.clone());
        return;
    }
    let r = isqrt(budget) as i64;
    for c in -r..=r {
        prefix.push(c);
        push_vectors(prefix, remaining_dims - 1, budget - (c * c) as u64, out);
        prefix.pop();
    }
}

pub(crate) fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// All `k ∈ Z^n` with `|k| <= radius`, sorted by `|k|²` then lexicographically.
pub fn enumerate_modes(n: usize, radius: u64) -> Result<Vec<LatticeMode>> {
    check_dim(n)?;
    let budget = radius * radius;
    let r = radius as i64;
    // stripes over the first coordinate
    let mut vectors: Vec<Vec<i64>> = (-r..=r)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut out = Vec::new();
            let mut prefix = vec![c];
            push_vectors(&mut prefix, n - 1, budget - (c * c) as u64, &mut out);
            out
        })
        .collect();
    vectors.sort_by(|a, b| norm_sq(a).cmp(&norm_sq(b)).then_with(|| a.cmp(b)));
    Ok(vectors.into_iter().map(LatticeMode::new).collect())
}

/// Representation numbers `r_n(m) = #{k ∈ Z^n : |k|² = m}` for `m <= max_norm_sq`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellTable {
    pub n: usize,
    pub max_norm_sq: u64,
    pub counts: Vec<u64>,
}

impl ShellTable {
    pub fn get(&self, m: u64) -> u64 {
        self.counts.get(m as usize).copied().unwrap_or(0)
    }

    /// `#{k : |k|² <= m}`.
    pub fn cumulative(&self, m: u64) -> u64 {
        self.counts[..=(m.min(self.max_norm_sq) as usize)].iter().sum()
    }

    pub fn prefix_sums(&self) -> Vec<u64> {
        self.counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

/// Builds the shell table by peeling off one coordinate at a time:
/// `r_n(m) = Σ_{c² <= m} r_{n-1}(m - c²)`.
pub fn representation_numbers(n: usize, max_norm_sq: u64) -> Result<ShellTable> {
    check_dim(n)?;
    let len = max_norm_sq as usize + 1;
    let mut counts = vec![0u64; len];
    counts[0] = 1;
    for _ in 0..n {
        let prev = counts;
        counts = (0..len)
            .into_par_iter()
            .map(|m| {
                let mut total = prev[m];
                let mut c = 1usize;
                while c * c <= m {
                    total += 2 * prev[m - c * c];
                    c += 1;
                }
                total
            })
            .collect();
    }
    Ok(ShellTable { n, max_norm_sq, counts })
}

/// Exact counting function `N^0(λ) = #{k : sqrt(4π²|k|²+1) <= λ}`.
pub fn count_free(n: usize, lambda: f64) -> Result<u64> {
    check_dim(n)?;
    match max_shell_below(lambda) {
        None => Ok(0),
        Some(m) => Ok(representation_numbers(n, m)?.cumulative(m)),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    // π^{n/2} / Γ(n/2 + 1), via the two-step recurrence ω_n = 2π/n ω_{n-2}
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Weyl main term `(2π)^{-n} ω_n λ^n` on the unit-volume torus.
pub fn weyl_main_term(n: usize, lambda: f64) -> f64 {
    unit_ball_volume(n) * (lambda / (2.0 * std::f64::consts::PI)).powi(n as i32)
}

/// `N^0(λ) − (2π)^{-n} ω_n λ^n`.
pub fn free_remainder(n: usize, lambda: f64) -> Result<f64> {
    Ok(count_free(n, lambda)? as f64 - weyl_main_term(n, lambda))
}

/// `N^0(λ+ε) − N^0(λ)`.
pub fn band_count_free(n: usize, lambda: f64, width: f64) -> Result<u64> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!("band width must be positive, got {width}")));
    }
    FreeCounter::new(n, lambda + width)?.band(lambda, width)
}

/// Counting oracle backed by one shell table, for repeated queries up to a
/// fixed maximum frequency.
#[derive(Debug, Clone)]
pub struct FreeCounter {
    n: usize,
    max_lambda: f64,
    prefix: Vec<u64>,
}

impl FreeCounter {
    pub fn new(n: usize, max_lambda: f64) -> Result<Self> {
        check_dim(n)?;
        let m = max_shell_below(max_lambda.max(1.0)).unwrap_or(0);
        let table = representation_numbers(n, m)?;
        Ok(Self { n, max_lambda: max_lambda.max(1.0), prefix: table.prefix_sums() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, lambda: f64) -> Result<u64> {
        if lambda > self.max_lambda {
            return Err(Error::InvalidArgument(format!(
                "lambda {lambda} beyond counter range {}",
                self.max_lambda
            )));
        }
        Ok(match max_shell_below(lambda) {
            None => 0,
            Some(m) => self.prefix[(m as usize).min(self.prefix.len() - 1)],
        })
    }

    pub fn remainder(&self, lambda: f64) -> Result<f64> {
        Ok(self.count(lambda)? as f64 - weyl_main_term(self.n, lambda))
    }

    pub fn band(&self, lambda: f64, width: f64) -> Result<u64> {
        Ok(self.count(lambda + width)? - self.count(lambda)?)
    }
}
