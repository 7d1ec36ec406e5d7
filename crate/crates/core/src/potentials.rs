//! Real potentials on the torus: sampling, Fourier data, the Kato functional,
//! the positive/negative split and the positivity shift.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::check_dim;
use crate::quadrature::gauss_legendre;

/// One term `amplitude · cos(2π k·x)` of a cosine sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub k: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    Constant {
        value: f64,
    },
    CosineSum {
        terms: Vec<CosineTerm>,
    },
    /// `amplitude · (|x − c|²_per + ε²)^{−α/2}`.
    RadialPower {
        amplitude: f64,
        alpha: f64,
        #[serde(default)]
        epsilon: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `inside` on the periodized ball `|x − c| < radius`, `outside` elsewhere.
    IndicatorWell {
        inside: f64,
        #[serde(default)]
        outside: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Samples on the unshifted grid `i / grid`, row-major.
    CustomGrid {
        grid: usize,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: PotentialKind,
}

/// Periodized distance between two points of `R^n / Z^n`.
pub fn periodic_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(1.0);
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Kato kernel: `log(2 + 1/r)` in two dimensions, `r^{2−n}` otherwise.
pub fn kato_kernel(n: usize, r: f64) -> f64 {
    if n == 2 {
        (2.0 + 1.0 / r).ln()
    } else {
        r.powi(2 - n as i32)
    }
}

impl PotentialSpec {
    pub fn new(n: usize, kind: PotentialKind) -> Self {
        Self { n, kind }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.n)?;
        let check_center = |c: &Option<Vec<f64>>| match c {
            Some(c) if c.len() != self.n => {
                Err(Error::InvalidArgument(format!("center has {} coordinates, expected {}", c.len(), self.n)))
            }
            _ => Ok(()),
        };
        match &self.kind {
            PotentialKind::Constant { .. } => Ok(()),
            PotentialKind::CosineSum { terms } => {
                if terms.iter().any(|t| t.k.len() != self.n) {
                    return Err(Error::InvalidArgument("cosine wavevector has wrong dimension".into()));
                }
                Ok(())
            }
            PotentialKind::RadialPower { alpha, epsilon, center, .. } => {
                check_center(center)?;
                if *epsilon < 0.0 {
                    return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
                }
                if *epsilon == 0.0 && *alpha >= self.n as f64 {
                    return Err(Error::NonIntegrable { alpha: *alpha, n: self.n });
                }
                Ok(())
            }
            PotentialKind::IndicatorWell { radius, center, .. } => {
                check_center(center)?;
                if !(*radius > 0.0) {
                    return Err(Error::InvalidArgument(format!("well radius must be positive, got {radius}")));
                }
                Ok(())
            }
            PotentialKind::CustomGrid { grid, values } => {
                if values.len() != grid.pow(self.n as u32) {
                    return Err(Error::InvalidArgument(format!(
                        "custom grid needs {} values, got {}",
                        grid.pow(self.n as u32),
                        values.len()
                    )));
                }
                Ok(())
            }
        }
    }

    fn center(&self, c: &Option<Vec<f64>>) -> Vec<f64> {
        c.clone().unwrap_or_else(|| vec![0.0; self.n])
    }

    /// True when the potential is unbounded at its center.
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, PotentialKind::RadialPower { alpha, epsilon, .. } if epsilon == 0.0 && alpha > 0.0)
    }

    /// Points where the potential concentrates (centers of radial kinds).
    pub fn hot_spots(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            PotentialKind::RadialPower { center, .. } | PotentialKind::IndicatorWell { center, .. } => {
                vec![self.center(center)]
            }
            _ => Vec::new(),
        }
    }

    /// Pointwise value; `+∞` magnitude at the singular center of an unmollified power.
    pub fn eval(&self, x: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match &self.kind {
            PotentialKind::Constant { value } => *value,
            PotentialKind::CosineSum { terms } => terms
                .iter()
                .map(|t| {
                    let phase: f64 = t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    t.amplitude * (2.0 * PI * phase).cos()
                })
                .sum(),
            PotentialKind::RadialPower { amplitude, alpha, epsilon, center } => {
                let c = self.center(center);
                let r = periodic_distance(x, &c);
                amplitude * (r * r + epsilon * epsilon).powf(-alpha / 2.0)
            }
            PotentialKind::IndicatorWell { inside, outside, radius, center } => {
                let c = self.center(center);
                if periodic_distance(x, &c) < *radius {
                    *inside
                } else {
                    *outside
                }
            }
            PotentialKind::CustomGrid { grid, values } => {
                // piecewise constant on cells centered at the nodes
                let g = *grid;
                let mut idx = 0usize;
                for &xi in x {
                    let i = ((xi.rem_euclid(1.0) * g as f64).round() as usize) % g;
                    idx = idx * g + i;
                }
                values[idx]
            }
        }
    }

    /// Stable short hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("potential spec serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Fourier coefficients `V̂(m)` on the cube `|m_i| <= cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub n: usize,
    pub cutoff: usize,
    values: Vec<Complex64>,
}

impl FourierCoefficients {
    fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    fn index(&self, m: &[i64]) -> Option<usize> {
        let c = self.cutoff as i64;
        let mut idx = 0usize;
        for &mi in m {
            if mi.abs() > c {
                return None;
            }
            idx = idx * self.side() + (mi + c) as usize;
        }
        Some(idx)
    }

    /// `V̂(m)`, zero outside the stored cube.
    pub fn get(&self, m: &[i64]) -> Complex64 {
        self.index(m).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// All stored `(m, V̂(m))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        let side = self.side();
        let c = self.cutoff as i64;
        self.values.iter().enumerate().map(move |(mut idx, &v)| {
            let mut m = vec![0i64; self.n];
            for d in (0..self.n).rev() {
                m[d] = (idx % side) as i64 - c;
                idx /= side;
            }
            (m, v)
        })
    }

    /// Trigonometric synthesis `Σ V̂(m) exp(2πi m·x)`.
    pub fn synthesize(&self, x: &[f64]) -> Complex64 {
        use std::f64::consts::PI;
        self.iter()
            .map(|(m, v)| {
                let phase: f64 = m.iter().zip(x).map(|(&mi, &xi)| mi as f64 * xi).sum();
                v * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }
}

/// A potential sampled on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialData {
    pub spec: PotentialSpec,
    pub grid: usize,
    /// Nodes sit at `(i + ½)/G` instead of `i/G`.
    pub offset: bool,
    pub samples: Vec<f64>,
    pub negative_part: Vec<f64>,
    pub fourier: Option<FourierCoefficients>,
    pub shift: f64,
}

impl PotentialData {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let g = self.grid;
        let o = if self.offset { 0.5 } else { 0.0 };
        let mut x = vec![0.0; self.n()];
        for d in (0..self.n()).rev() {
            x[d] = ((flat % g) as f64 + o) / g as f64;
            flat /= g;
        }
        x
    }

    pub fn sup_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Computes and stores the Fourier data for later assembly.
    pub fn with_fourier(mut self, cutoff: usize) -> Result<Self> {
        self.fourier = Some(fourier_coefficients(&self, cutoff)?);
        Ok(self)
    }

    /// Pointwise multiple `a·V` with Fourier data rescaled accordingly.
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v *= a);
        out.negative_part = out.samples.iter().map(|v| (-v).max(0.0)).collect();
        if let Some(f) = out.fourier.as_mut() {
            f.values.iter_mut().for_each(|v| *v *= a);
        }
        out.spec = PotentialSpec::new(
            self.spec.n,
            PotentialKind::CustomGrid { grid: self.grid, values: out.samples.clone() },
        );
        out
    }
}

/// Samples `spec` on a `G^n` grid. Unmollified singular powers use the
/// half-cell-offset grid so that no node hits the singularity.
pub fn sample(spec: &PotentialSpec, grid: usize) -> Result<PotentialData> {
    spec.validate()?;
    if grid < 4 || !grid.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("grid size must be even and >= 4, got {grid}")));
    }
    if let PotentialKind::CustomGrid { grid: g, .. } = spec.kind {
        if g != grid {
            return Err(Error::InvalidArgument(format!("custom grid has size {g}, sampling requested {grid}")));
        }
    }
    let offset = spec.is_singular();
    let total = grid.pow(spec.n as u32);
    let mut data = PotentialData {
        spec: spec.clone(),
        grid,
        offset,
        samples: Vec::new(),
        negative_part: Vec::new(),
        fourier: None,
        shift: 0.0,
    };
    let samples: Vec<f64> = (0..total).into_par_iter().map(|i| spec.eval(&data.node(i))).collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularNode);
    }
    data.negative_part = samples.iter().map(|v| (-v).max(0.0)).collect();
    data.samples = samples;
    Ok(data)
}

fn fft_along_axes(values: &mut [Complex64], n: usize, g: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(g);
    let mut line = vec![Complex64::new(0.0, 0.0); g];
    for axis in 0..n {
        let stride = g.pow((n - 1 - axis) as u32);
        for start in 0..values.len() {
            // visit each line once: its first element has axis index 0
            if !(start / stride).is_multiple_of(g) {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = values[start + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                values[start + j * stride] = *v;
            }
        }
    }
}

/// `V̂(m) = G^{-n} Σ_i V(x_i) exp(−2πi m·x_i)` for `|m_i| <= cutoff`, with
/// Hermitian symmetry enforced exactly.
pub fn fourier_coefficients(data: &PotentialData, cutoff: usize) -> Result<FourierCoefficients> {
    use std::f64::consts::PI;
    let g = data.grid;
    if cutoff + 1 > g / 2 {
        return Err(Error::Aliasing { cutoff, grid: g });
    }
    let n = data.n();
    let mut raw: Vec<Complex64> = data.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_along_axes(&mut raw, n, g);
    let norm = 1.0 / raw.len() as f64;
    let o = if data.offset { 0.5 } else { 0.0 };
    let raw_at = |m: &[i64]| -> Complex64 {
        let mut idx = 0usize;
        let mut msum = 0i64;
        for &mi in m {
            idx = idx * g + mi.rem_euclid(g as i64) as usize;
            msum += mi;
        }
        raw[idx] * norm * Complex64::from_polar(1.0, -2.0 * PI * msum as f64 * o / g as f64)
    };
    let mut out = FourierCoefficients { n, cutoff, values: vec![Complex64::new(0.0, 0.0); (2 * cutoff + 1).pow(n as u32)] };
    let modes: Vec<Vec<i64>> = out.iter().map(|(m, _)| m).collect();
    for (i, m) in modes.iter().enumerate() {
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        out.values[i] = 0.5 * (raw_at(m) + raw_at(&neg).conj());
    }
    Ok(out)
}

/// `(V⁺, V⁻)` sample arrays.
pub fn split_parts(data: &PotentialData) -> (Vec<f64>, Vec<f64>) {
    let pos = data.samples.iter().map(|v| v.max(0.0)).collect();
    let neg = data.samples.iter().map(|v| (-v).max(0.0)).collect();
    (pos, neg)
}

/// Additive constant making the lowest eigenvalue at least one.
pub fn shift_to_floor(lowest_eigenvalue: f64) -> f64 {
    (1.0 - lowest_eigenvalue).max(0.0)
}

struct SphereRule {
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn sphere_rule(n: usize) -> SphereRule {
    use std::f64::consts::PI;
    let mut directions = Vec::new();
    let mut weights = Vec::new();
    match n {
        1 => {
            directions = vec![vec![1.0], vec![-1.0]];
            weights = vec![1.0, 1.0];
        }
        2 => {
            let m = 48;
            for i in 0..m {
                let phi = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                directions.push(vec![phi.cos(), phi.sin()]);
                weights.push(2.0 * PI / m as f64);
            }
        }
        3 => {
            let (zs, wz) = gauss_legendre(8);
            let m = 16;
            for (z, w) in zs.iter().zip(&wz) {
                let s = (1.0 - z * z).sqrt();
                for i in 0..m {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    directions.push(vec![s * phi.cos(), s * phi.sin(), *z]);
                    weights.push(w * 2.0 * PI / m as f64);
                }
            }
        }
        _ => {
            // Hopf coordinates with u = sin²η, dσ = ½ du dξ₁ dξ₂
            let (us, wu) = gauss_legendre(6);
            let m = 12;
            for (u, w) in us.iter().zip(&wu) {
                let u = 0.5 * (u + 1.0);
                let (c, s) = ((1.0 - u).sqrt(), u.sqrt());
                for i in 0..m {
                    for j in 0..m {
                        let a = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                        let b = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                        directions.push(vec![c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]);
                        weights.push(0.5 * 0.5 * w * (2.0 * PI / m as f64).powi(2));
                    }
                }
            }
        }
    }
    SphereRule { directions, weights }
}

const KATO_PANELS: usize = 8;
const KATO_ORDER: usize = 6;

/// `∫_{B(x,δ)} |V(y)| h_n(|x−y|) dy` in polar coordinates about `x`, with
/// dyadic radial panels `[δ/2^{j+1}, δ/2^j]`.
fn kato_integral_at(spec: &PotentialSpec, x: &[f64], delta: f64, rule: &SphereRule, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let n = spec.n;
    let mut y = vec![0.0; n];
    let mut shell = |r: f64| -> f64 {
        let mut acc = 0.0;
        for (dir, w) in rule.directions.iter().zip(&rule.weights) {
            for d in 0..n {
                y[d] = x[d] + r * dir[d];
            }
            let v = spec.eval(&y).abs();
            if v.is_finite() {
                acc += w * v;
            }
        }
        // h_n(r) r^{n-1}
        acc * kato_kernel(n, r) * r.powi(n as i32 - 1)
    };
    let mut total = 0.0;
    let mut hi = delta;
    for panel in 0..=KATO_PANELS {
        let lo = if panel == KATO_PANELS { 0.0 } else { hi * 0.5 };
        let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        for (t, w) in gl.0.iter().zip(&gl.1) {
            total += w * half * shell(mid + half * t);
        }
        hi = lo;
    }
    total
}

/// Kato functional `sup_x ∫_{B(x,δ)} |V(y)| h_n(d(x,y)) dy`, the supremum
/// taken over the sample nodes and the potential's centers.
pub fn kato_norm(data: &PotentialData, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || delta > 0.5 {
        return Err(Error::InvalidArgument(format!("kato radius must lie in (0, 1/2], got {delta}")));
    }
    let spec = &data.spec;
    let rule = sphere_rule(spec.n);
    let gl = gauss_legendre(KATO_ORDER);
    let mut points: Vec<Vec<f64>> = (0..data.samples.len()).map(|i| data.node(i)).collect();
    points.extend(spec.hot_spots());
    let best = points
        .par_iter()
        .map(|x| kato_integral_at(spec, x, delta, &rule, &gl))
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn radial(n: usize, amplitude: f64, alpha: f64, epsilon: f64) -> PotentialSpec {
        PotentialSpec::new(n, PotentialKind::RadialPower { amplitude, alpha, epsilon, center: None })
    }

    #[test]
    fn constant_samples() {
        let d = sample(&PotentialSpec::new(2, PotentialKind::Constant { value: 3.0 }), 8).unwrap();
        assert!(d.samples.iter().all(|&v| v == 3.0));
        let f = fourier_coefficients(&d, 3).unwrap();
        assert!((f.get(&[0, 0]) - 3.0).norm() < 1e-14);
        assert!(f.iter().filter(|(m, _)| m != &vec![0, 0]).all(|(_, v)| v.norm() < 1e-14));
    }

    #[test]
    fn single_cosine_mode() {
        let spec = PotentialSpec::new(2, PotentialKind::CosineSum { terms: vec![CosineTerm { amplitude: 1.0, k: vec![1, 0] }] });
        let d = sample(&spec, 8).unwrap();
        for i in 0..64 {
            let x = d.node(i);
            assert!((d.samples[i] - (2.0 * PI * x[0]).cos()).abs() < 1e-15);
        }
        let f = fourier_coefficients(&d, 3).unwrap();
        assert!((f.get(&[1, 0]) - 0.5).norm() < 1e-12);
        assert!((f.get(&[-1, 0]) - 0.5).norm() < 1e-12);
        assert!(f.get(&[0, 1]).norm() < 1e-12);
    }

    #[test]
    fn singular_power_uses_offset_grid() {
        let spec = radial(3, -1.0, 1.0, 0.0);
        let d = sample(&spec, 16).unwrap();
        assert!(d.offset);
        let nearest = (0..d.samples.len())
            .min_by(|&a, &b| {
                let da = periodic_distance(&d.node(a), &[0.0; 3]);
                let db = periodic_distance(&d.node(b), &[0.0; 3]);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let min = d.samples.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, d.samples[nearest]);
        assert!(min.is_finite());
        assert!((min + 16.0 / (0.75f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_integrable_power() {
        assert!(matches!(sample(&radial(2, 1.0, 2.0, 0.0), 8), Err(Error::NonIntegrable { .. })));
        assert!(sample(&radial(2, 1.0, 2.0, 0.1), 8).is_ok());
    }

    #[test]
    fn rejects_aliasing_cutoff() {
        let d = sample(&PotentialSpec::new(1, PotentialKind::Constant { value: 1.0 }), 8).unwrap();
        assert!(fourier_coefficients(&d, 3).is_ok());
        assert!(matches!(fourier_coefficients(&d, 4), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn hermitian_symmetry_is_exact() {
        let spec = PotentialSpec::new(
            2,
            PotentialKind::IndicatorWell { inside: -5.0, outside: 1.0, radius: 0.2, center: Some(vec![0.13, 0.41]) },
        );
        let d = sample(&spec, 16).unwrap();
        let f = fourier_coefficients(&d, 7).unwrap();
        for (m, v) in f.iter() {
            let neg: Vec<i64> = m.iter().map(|x| -x).collect();
            assert_eq!(f.get(&neg), v.conj());
        }
    }

    #[test]
    fn singular_mean_converges_under_refinement() {
        let spec = radial(3, 1.0, 1.0, 0.0);
        let means: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&g| fourier_coefficients(&sample(&spec, g).unwrap(), 1).unwrap().get(&[0, 0, 0]).re)
            .collect();
        let d = sample(&spec, 16).unwrap();
        assert!((means[1] - d.mean()).abs() < 1e-12);
        let e1 = (means[1] - means[0]).abs();
        let e2 = (means[2] - means[1]).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 1.0, "observed order {order}");
    }

    #[test]
    fn split_examples() {
        let d = sample(&PotentialSpec::new(1, PotentialKind::Constant { value: -2.0 }), 8).unwrap();
        let (p, m) = split_parts(&d);
        assert!(p.iter().all(|&v| v == 0.0) && m.iter().all(|&v| v == 2.0));

        let spec = PotentialSpec::new(
            2,
            PotentialKind::IndicatorWell { inside: -5.0, outside: 1.0, radius: 0.25, center: Some(vec![0.5, 0.5]) },
        );
        let d = sample(&spec, 16).unwrap();
        let (p, m) = split_parts(&d);
        for i in 0..d.samples.len() {
            let inside = periodic_distance(&d.node(i), &[0.5, 0.5]) < 0.25;
            assert_eq!(p[i], if inside { 0.0 } else { 1.0 });
            assert_eq!(m[i], if inside { 5.0 } else { 0.0 });
            assert_eq!(p[i] - m[i], d.samples[i]);
            assert_eq!(p[i] * m[i], 0.0);
        }
        assert_eq!(m, d.negative_part);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_to_floor(3.0), 0.0);
        assert_eq!(shift_to_floor(0.25), 0.75);
    }

    #[test]
    fn kato_zero_potential() {
        let d = sample(&PotentialSpec::new(3, PotentialKind::Constant { value: 0.0 }), 4).unwrap();
        assert_eq!(kato_norm(&d, 0.2).unwrap(), 0.0);
        assert!(kato_norm(&d, 0.0).is_err());
    }

    #[test]
    fn kato_constant_matches_radial_integral() {
        let d = sample(&PotentialSpec::new(3, PotentialKind::Constant { value: 1.0 }), 4).unwrap();
        let v = kato_norm(&d, 0.2).unwrap();
        assert!((v / (2.0 * PI * 0.04) - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn kato_two_dimensional_kernel() {
        // ∫_0^δ 2π r log(2 + 1/r) dr by independent quadrature
        let d = sample(&PotentialSpec::new(2, PotentialKind::Constant { value: 1.0 }), 4).unwrap();
        let delta = 0.1;
        let oracle = crate::quadrature::integrate(|r| 2.0 * PI * r * (2.0 + 1.0 / r).ln(), 1e-300, delta, 0.01, 1e-14).unwrap();
        assert!((kato_norm(&d, delta).unwrap() - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn fourier_round_trip_band_limited() {
        let spec = PotentialSpec::new(
            2,
            PotentialKind::CosineSum {
                terms: vec![
                    CosineTerm { amplitude: 1.5, k: vec![1, 2] },
                    CosineTerm { amplitude: -0.7, k: vec![3, -1] },
                    CosineTerm { amplitude: 0.2, k: vec![0, 0] },
                ],
            },
        );
        let d = sample(&spec, 8).unwrap();
        let f = fourier_coefficients(&d, 3).unwrap();
        for i in 0..d.samples.len() {
            let v = f.synthesize(&d.node(i));
            assert!((v.re - d.samples[i]).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn spec_hash_tracks_parameters() {
        let a = radial(2, 1.0, 1.0, 0.1);
        let b = radial(2, 1.0, 1.0, 0.2);
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
