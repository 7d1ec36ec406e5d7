//! Runs one configured experiment and writes its CSV/JSON artifacts.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache::{CacheKey, SpectrumCache};
use crate::config::{Experiment, ExperimentConfig};
use crate::duhamel::{verify_identity, ComparisonReport};
use crate::error::{Error, Result};
use crate::galerkin::{assemble, diagonalize, SpectralData};
use crate::kernels::{
    dyadic_projector_sup, fitted_constant, heat_sample, inverse_power_cross_check, inverse_power_sample, resolvent_sample, KernelKind,
    KernelSample,
};
use crate::mollify::MollifiedIndicator;
use crate::output::{format_point, write_csv, write_json, Cell, Meta, Table};
use crate::potentials::{kato_norm, sample, PotentialData};
use crate::weyl::{
    band_density, band_experiment, band_onset, bootstrap_lp, bootstrap_n5, bootstrap_torus, build_series_free, build_series_galerkin,
    fit_exponent, hlawka_gain, reference_remainders, BandSource, BootstrapVariant, ExponentFit, ReferenceRemainder, RemainderSeries,
    SeriesSource, WidthRule,
};

/// Files written by a run, and the verdict of experiments that check something.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub pass: Option<bool>,
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    out: &'a Path,
    meta: Meta,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.out.join(name);
        write_csv(&path, &self.meta, table)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let path = self.out.join(name);
        write_json(&path, &self.meta, body)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx { config, out, meta: Meta::new(config.experiment.as_str(), &config.hash()), files: Vec::new() };
    let pass = match config.experiment {
        Experiment::Count => run_count(&mut ctx)?,
        Experiment::Spectrum => run_spectrum(&mut ctx)?,
        Experiment::Kato => run_kato(&mut ctx)?,
        Experiment::DuhamelCheck => run_duhamel(&mut ctx)?,
        Experiment::WeylFit => run_weyl_fit(&mut ctx)?,
        Experiment::Band => run_band(&mut ctx)?,
        Experiment::Kernels => run_kernels(&mut ctx)?,
        Experiment::Bootstrap => run_bootstrap(&mut ctx)?,
    };
    Ok(RunSummary { files: ctx.files, pass })
}

/// Sampled potential with Fourier data sufficient for assembly at `cutoff`.
pub fn potential_data(config: &ExperimentConfig) -> Result<PotentialData> {
    let spec = config.potential_spec().ok_or_else(|| Error::Config("a potential is required".into()))?;
    let data = sample(&spec, config.grid()?)?;
    match config.cutoff {
        Some(k) => data.with_fourier(2 * k as usize),
        None => Ok(data),
    }
}

/// Galerkin spectrum for the configured potential, through the cache when enabled.
pub fn spectrum(config: &ExperimentConfig, potential: &PotentialData, cache_dir: &Path) -> Result<(SpectralData, bool)> {
    let cutoff = config.cutoff()?;
    let key = CacheKey { n: config.n, cutoff, grid: potential.grid, spec_hash: potential.spec.hash() };
    let cache = if config.cache { Some(SpectrumCache::from_env_or(cache_dir)?) } else { None };
    if let Some(hit) = cache.as_ref().and_then(|c| c.lookup(&key)) {
        return Ok((hit, true));
    }
    let s = diagonalize(&assemble(config.n, cutoff, potential)?)?;
    if let Some(c) = &cache {
        if let Err(e) = c.store(&s) {
            log::warn!("could not cache spectrum: {e}");
        }
    }
    Ok((s, false))
}

fn cache_dir(ctx: &Ctx) -> PathBuf {
    ctx.out.join("cache")
}

fn series(ctx: &Ctx) -> Result<RemainderSeries> {
    let c = ctx.config;
    let ladder = c.ladder()?;
    match c.source.unwrap_or(SeriesSource::FreeExact) {
        SeriesSource::FreeExact => build_series_free(c.n, &ladder),
        SeriesSource::Galerkin => {
            let v = potential_data(c)?;
            let (s, _) = spectrum(c, &v, &cache_dir(ctx))?;
            build_series_galerkin(&s, &ladder)
        }
    }
}

fn series_table(s: &RemainderSeries) -> Table {
    let mut t = Table::new(&["lambda", "count", "main", "remainder", "normalized"]);
    for i in 0..s.lambdas.len() {
        let l = s.lambdas[i];
        t.push(vec![l.into(), s.counts[i].into(), s.main[i].into(), s.remainders[i].into(), (s.remainders[i] / l.powi(s.n as i32 - 1)).into()]);
    }
    t
}

fn run_count(ctx: &mut Ctx) -> Result<Option<bool>> {
    let s = series(ctx)?;
    ctx.csv("count.csv", &series_table(&s))?;
    Ok(None)
}

#[derive(Serialize)]
struct FitReport {
    n: usize,
    source: SeriesSource,
    window: (f64, f64),
    fit: ExponentFit,
    /// `n − 1 − (n−1)/(n+1)`.
    hlawka_exponent: f64,
    reference: Option<ReferenceRemainder>,
}

fn run_weyl_fit(ctx: &mut Ctx) -> Result<Option<bool>> {
    let s = series(ctx)?;
    let window = ctx.config.window.unwrap_or((s.lambdas[0], *s.lambdas.last().unwrap()));
    let fit = fit_exponent(&s, window)?;
    ctx.csv("weyl_fit.csv", &series_table(&s))?;
    let n = s.n;
    let report = FitReport {
        n,
        source: s.source,
        window,
        fit,
        hlawka_exponent: n as f64 - 1.0 - hlawka_gain(n),
        reference: reference_remainders(n).ok(),
    };
    ctx.json("weyl_fit.json", &report)?;
    Ok(None)
}

#[derive(Serialize)]
struct BandSummary {
    rule: WidthRule,
    rows: usize,
    max_per_width: f64,
    max_per_power: f64,
    density: f64,
    onset: Option<crate::weyl::Onset>,
}

fn run_band(ctx: &mut Ctx) -> Result<Option<bool>> {
    let c = ctx.config;
    let ladder = c.ladder()?;
    let rule = c.band.unwrap_or(WidthRule::Unit);
    let rows = match c.source.unwrap_or(SeriesSource::FreeExact) {
        SeriesSource::FreeExact => band_experiment(&BandSource::Free(c.n), &ladder, rule)?,
        SeriesSource::Galerkin => {
            let v = potential_data(c)?;
            let (s, _) = spectrum(c, &v, &cache_dir(ctx))?;
            band_experiment(&BandSource::Spectrum(&s), &ladder, rule)?
        }
    };
    let mut t = Table::new(&["lambda", "width", "count", "per_width", "per_power"]);
    for r in &rows {
        t.push(vec![r.lambda.into(), r.width.into(), r.count.into(), r.per_width.into(), r.per_power.into()]);
    }
    ctx.csv("band.csv", &t)?;
    let density = band_density(c.n);
    let summary = BandSummary {
        rule,
        rows: rows.len(),
        max_per_width: rows.iter().map(|r| r.per_width).fold(0.0, f64::max),
        max_per_power: rows.iter().map(|r| r.per_power).fold(0.0, f64::max),
        density,
        onset: band_onset(&rows, |r| r.per_width, 2.0 * density),
    };
    ctx.json("band.json", &summary)?;
    Ok(None)
}

#[derive(Serialize)]
struct SpectrumSummary {
    n: usize,
    cutoff: u64,
    grid: usize,
    spec_hash: String,
    dim: usize,
    shift: f64,
    margin: f64,
    reliable_band: f64,
    cache_hit: bool,
}

fn run_spectrum(ctx: &mut Ctx) -> Result<Option<bool>> {
    let v = potential_data(ctx.config)?;
    let (s, hit) = spectrum(ctx.config, &v, &cache_dir(ctx))?;
    let band = s.reliable_band();
    let mut t = Table::new(&["index", "eigenvalue_sq", "frequency", "reliable"]);
    for (i, (&e, &f)) in s.eigenvalues_sq.iter().zip(&s.frequencies).enumerate() {
        t.push(vec![i.into(), e.into(), f.into(), (f <= band).into()]);
    }
    ctx.csv("spectrum.csv", &t)?;
    let summary = SpectrumSummary {
        n: s.n,
        cutoff: s.provenance.cutoff,
        grid: s.provenance.grid,
        spec_hash: s.provenance.spec_hash.clone(),
        dim: s.dim(),
        shift: s.shift,
        margin: s.margin,
        reliable_band: band,
        cache_hit: hit,
    };
    ctx.json("spectrum.json", &summary)?;
    Ok(None)
}

fn run_kato(ctx: &mut Ctx) -> Result<Option<bool>> {
    let v = potential_data(ctx.config)?;
    let deltas = ctx.config.deltas.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    let mut t = Table::new(&["delta", "kato_norm"]);
    for d in deltas {
        t.push(vec![d.into(), kato_norm(&v, d)?.into()]);
    }
    ctx.csv("kato.csv", &t)?;
    Ok(None)
}

#[derive(Serialize)]
struct DuhamelSummary {
    pass: bool,
    max_residual: f64,
    reports: Vec<ComparisonReport>,
}

fn run_duhamel(ctx: &mut Ctx) -> Result<Option<bool>> {
    let c = ctx.config;
    let v = potential_data(c)?;
    let (s_v, _) = spectrum(c, &v, &cache_dir(ctx))?;
    let s_0 = SpectralData::free(c.n, c.cutoff()?)?;
    let lambdas = match c.ladder {
        Some(_) => c.ladder()?,
        None => vec![0.5 * s_v.reliable_band().max(2.0)],
    };
    let reports = lambdas
        .iter()
        .map(|&l| verify_identity(&s_v, &s_0, &v, &MollifiedIndicator::new(l, c.mollifier.width(l))?))
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let summary = DuhamelSummary { pass, max_residual: reports.iter().map(|r| r.residual).fold(0.0, f64::max), reports };
    ctx.json("duhamel_check.json", &summary)?;
    Ok(Some(pass))
}

#[derive(Serialize)]
struct KernelFit {
    kind: KernelKind,
    parameter: f64,
    constant: f64,
}

#[derive(Serialize)]
struct KernelSummary {
    fits: Vec<KernelFit>,
    max_identity_residual: f64,
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn run_kernels(ctx: &mut Ctx) -> Result<Option<bool>> {
    let c = ctx.config;
    let opts = c.kernels.clone().unwrap_or_default();
    let cutoff = c.cutoff()?;
    let s = match c.potential {
        Some(_) => spectrum(c, &potential_data(c)?, &cache_dir(ctx))?.0,
        None => SpectralData::free(c.n, cutoff)?,
    };
    let s0 = SpectralData::free(c.n, cutoff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let spacing = 1.0 / (2.0 * cutoff.max(1) as f64);
    let mut samples: Vec<KernelSample> = Vec::new();
    let mut fits = Vec::new();
    let mut max_residual: f64 = 0.0;

    let points: Vec<Vec<f64>> = (0..opts.points).map(|_| random_point(&mut rng, c.n)).collect();
    for &t in &opts.heat_times {
        let batch: Vec<KernelSample> = points.iter().map(|x| heat_sample(&s, t, x)).collect();
        fits.push(KernelFit { kind: KernelKind::Heat, parameter: t, constant: fitted_constant(&batch) });
        samples.extend(batch);
    }
    let partners: Vec<Vec<f64>> = (0..opts.points).map(|_| random_point(&mut rng, c.n)).collect();
    for &j in &opts.powers {
        let mut batch = Vec::new();
        for (x, y) in points.iter().zip(&partners) {
            batch.push(inverse_power_sample(&s, j, x, y, spacing)?);
            max_residual = max_residual.max(inverse_power_cross_check(&s, j, x, y)?.residual);
        }
        fits.push(KernelFit { kind: KernelKind::InversePower, parameter: j as f64, constant: fitted_constant(&batch) });
        samples.extend(batch);
    }
    let origin = vec![0.0; c.n];
    for &tau in &opts.taus {
        let batch = (1..=32)
            .map(|i| {
                let mut y = origin.clone();
                y[0] = i as f64 / 64.0;
                resolvent_sample(&s0, tau, &origin, &y, opts.decay_order, spacing)
            })
            .collect::<Result<Vec<_>>>()?;
        fits.push(KernelFit { kind: KernelKind::Resolvent, parameter: tau, constant: fitted_constant(&batch) });
        samples.extend(batch);
    }
    if let Some(ladder) = c.ladder {
        for lambda in ladder.points()? {
            let p = dyadic_projector_sup(&s, lambda, 2 * cutoff as usize + 2)?;
            let smp = KernelSample {
                kind: KernelKind::DyadicProjector,
                parameter: lambda,
                x: p.argmax.clone(),
                y: p.argmax,
                value: num_complex::Complex64::new(p.sup, 0.0),
                bound_value: lambda.powi(c.n as i32),
            };
            fits.push(KernelFit { kind: KernelKind::DyadicProjector, parameter: lambda, constant: smp.ratio() });
            samples.push(smp);
        }
    }

    let mut t = Table::new(&["kind", "parameter", "x", "y", "value", "value_im", "bound_value"]);
    for smp in &samples {
        t.push(vec![
            smp.kind.as_str().into(),
            smp.parameter.into(),
            Cell::Text(format_point(&smp.x)),
            Cell::Text(format_point(&smp.y)),
            smp.value.re.into(),
            smp.value.im.into(),
            smp.bound_value.into(),
        ]);
    }
    ctx.csv("kernels.csv", &t)?;
    ctx.json("kernels.json", &KernelSummary { fits, max_identity_residual: max_residual })?;
    Ok(None)
}

fn run_bootstrap(ctx: &mut Ctx) -> Result<Option<bool>> {
    let c = ctx.config;
    let opts = c.bootstrap.clone().ok_or_else(|| Error::Config("missing [bootstrap]".into()))?;
    let state = match opts.variant {
        BootstrapVariant::Torus => bootstrap_torus(c.n, opts.b0)?,
        BootstrapVariant::N5 => bootstrap_n5(opts.b0),
        BootstrapVariant::Lp => {
            let p = opts.p.ok_or_else(|| Error::Config("variant lp needs `p`".into()))?;
            bootstrap_lp(c.n, p, opts.b0)?
        }
    };
    ctx.json("bootstrap.json", &state)?;
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_toml(text: &str) -> (tempfile::TempDir, RunSummary) {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::from_toml(text).unwrap();
        c.cache = false;
        let s = run(&c, dir.path()).unwrap();
        (dir, s)
    }

    #[test]
    fn bootstrap_json() {
        let (_d, s) = run_toml("experiment = \"bootstrap\"\nn = 3\n[bootstrap]\nvariant = \"torus\"\n");
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&s.files[0]).unwrap()).unwrap();
        let it: Vec<f64> = serde_json::from_value(v["iterates"].clone()).unwrap();
        assert_eq!(&it[..3], &[-1.0, 0.25, 0.5]);
        assert_eq!(v["variant"], "torus");
    }

    #[test]
    fn duhamel_check_passes() {
        let (_d, s) = run_toml(
            "experiment = \"duhamel-check\"\nn = 1\ncutoff = 4\ngrid = 32\n[potential]\nkind = \"cosine-sum\"\nterms = [{ amplitude = 2.0, k = [1] }]\n",
        );
        assert_eq!(s.pass, Some(true));
    }

    #[test]
    fn weyl_fit_rows() {
        let (_d, s) = run_toml("experiment = \"weyl-fit\"\nn = 2\n[ladder]\nstart = 10.0\nstop = 1000.0\nfactor = 1.1\n");
        let csv = std::fs::read_to_string(&s.files[0]).unwrap();
        assert!(csv.lines().count() - 2 >= 20);
    }
}
