//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "duhamel-check"
//! n = 1
//! cutoff = 4
//! grid = 32
//!
//! [potential]
//! kind = "cosine-sum"
//! terms = [{ amplitude = 2.0, k = [1] }]
//!
//! [ladder]
//! start = 4.0
//! stop = 8.0
//! factor = 1.25
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::check_dim;
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::weyl::{geometric_ladder, BootstrapVariant, SeriesSource, WidthRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Count,
    Spectrum,
    Kato,
    DuhamelCheck,
    WeylFit,
    Band,
    Kernels,
    Bootstrap,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Count => "count",
            Experiment::Spectrum => "spectrum",
            Experiment::Kato => "kato",
            Experiment::DuhamelCheck => "duhamel-check",
            Experiment::WeylFit => "weyl-fit",
            Experiment::Band => "band",
            Experiment::Kernels => "kernels",
            Experiment::Bootstrap => "bootstrap",
        }
    }
}

/// Time-window width `T` of the mollifier as a function of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum MollifierRule {
    Constant { width: f64 },
    /// `T = λ^exponent`.
    Power { exponent: f64 },
    /// `T = log λ`.
    Log,
}

impl Default for MollifierRule {
    fn default() -> Self {
        MollifierRule::Constant { width: 1.0 }
    }
}

impl MollifierRule {
    /// Never below one, which the mollifier requires.
    pub fn width(&self, lambda: f64) -> f64 {
        match *self {
            MollifierRule::Constant { width } => width,
            MollifierRule::Power { exponent } => lambda.powf(exponent).max(1.0),
            MollifierRule::Log => lambda.ln().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub start: f64,
    pub stop: f64,
    pub factor: f64,
}

impl Ladder {
    pub fn points(&self) -> Result<Vec<f64>> {
        geometric_ladder(self.start, self.stop, self.factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub variant: BootstrapVariant,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_b0")]
    pub b0: f64,
}

fn default_b0() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    #[serde(default = "default_heat_times")]
    pub heat_times: Vec<f64>,
    #[serde(default = "default_powers")]
    pub powers: Vec<u32>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    /// Number of random evaluation points per kernel.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_order")]
    pub decay_order: i32,
}

fn default_heat_times() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn default_powers() -> Vec<u32> {
    vec![1, 2]
}
fn default_taus() -> Vec<f64> {
    vec![8.0, 16.0]
}
fn default_points() -> usize {
    10
}
fn default_order() -> i32 {
    4
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            heat_times: default_heat_times(),
            powers: default_powers(),
            taus: default_taus(),
            points: default_points(),
            decay_order: default_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    /// Truncation radius `K` of the plane-wave basis.
    #[serde(default)]
    pub cutoff: Option<u64>,
    /// Samples per axis for the potential.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub potential: Option<PotentialKind>,
    #[serde(default)]
    pub mollifier: MollifierRule,
    #[serde(default)]
    pub ladder: Option<Ladder>,
    #[serde(default)]
    pub source: Option<SeriesSource>,
    #[serde(default)]
    pub band: Option<WidthRule>,
    #[serde(default)]
    pub bootstrap: Option<BootstrapOptions>,
    #[serde(default)]
    pub kernels: Option<KernelOptions>,
    /// Radii for the Kato functional.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    /// Fit window `[lo, hi]`; defaults to the ladder range.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_cache")]
    pub cache: bool,
}

fn default_cache() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let canonical = self.to_toml().unwrap_or_default();
        Sha256::digest(canonical.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn potential_spec(&self) -> Option<PotentialSpec> {
        self.potential.clone().map(|k| PotentialSpec::new(self.n, k))
    }

    fn require<T: Copy>(&self, v: Option<T>, what: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("experiment {} needs `{what}`", self.experiment.as_str())))
    }

    pub fn cutoff(&self) -> Result<u64> {
        self.require(self.cutoff, "cutoff")
    }

    pub fn grid(&self) -> Result<usize> {
        self.require(self.grid, "grid")
    }

    pub fn ladder(&self) -> Result<Vec<f64>> {
        self.require(self.ladder, "ladder")?.points()
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment == Experiment::Bootstrap {
            // the recurrences are scalar, so any dimension from 2 up is allowed
            if self.n < 2 {
                return Err(Error::Config(format!("bootstrap needs n >= 2, got {}", self.n)));
            }
        } else {
            check_dim(self.n).map_err(|_| Error::Config(format!("n = {} outside 1..=4", self.n)))?;
        }
        if let Some(spec) = self.potential_spec() {
            spec.validate().map_err(|e| Error::Config(format!("potential: {e}")))?;
        }
        if let Some(g) = self.grid {
            if g < 4 || g % 2 != 0 {
                return Err(Error::Config(format!("grid must be even and at least 4, got {g}")));
            }
        }
        if let (Some(k), Some(g)) = (self.cutoff, self.grid) {
            if self.potential.is_some() && 2 * k as usize + 1 > g / 2 {
                return Err(Error::Config(format!(
                    "grid {g} too coarse for cutoff {k}: need grid >= {}",
                    2 * (2 * k as usize + 1)
                )));
            }
        }
        if let Some(l) = &self.ladder {
            l.points().map_err(|e| Error::Config(format!("ladder: {e}")))?;
        }
        if let MollifierRule::Constant { width } = self.mollifier {
            if width < 1.0 {
                return Err(Error::Config(format!("mollifier width must be at least 1, got {width}")));
            }
        }
        if let Some(d) = &self.deltas {
            if d.iter().any(|&x| !(x > 0.0 && x <= 0.5)) {
                return Err(Error::Config("deltas must lie in (0, 0.5]".into()));
            }
        }
        match self.experiment {
            Experiment::Spectrum | Experiment::DuhamelCheck => {
                self.cutoff()?;
                self.grid()?;
                if self.potential.is_none() {
                    return Err(Error::Config(format!("experiment {} needs `potential`", self.experiment.as_str())));
                }
            }
            Experiment::Kato => {
                self.grid()?;
                if self.potential.is_none() {
                    return Err(Error::Config("experiment kato needs `potential`".into()));
                }
            }
            Experiment::Count | Experiment::WeylFit | Experiment::Band => {
                self.require(self.ladder, "ladder")?;
                if self.source == Some(SeriesSource::Galerkin) {
                    self.cutoff()?;
                    self.grid()?;
                }
            }
            Experiment::Bootstrap => {
                self.bootstrap.as_ref().ok_or_else(|| Error::Config("experiment bootstrap needs `[bootstrap]`".into()))?;
            }
            Experiment::Kernels => {
                self.cutoff()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUHAMEL: &str = r#"
experiment = "duhamel-check"
n = 1
cutoff = 4
grid = 32

[potential]
kind = "cosine-sum"
terms = [{ amplitude = 2.0, k = [1] }]

[ladder]
start = 4.0
stop = 8.0
factor = 1.25
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(DUHAMEL).unwrap();
        assert_eq!(c.experiment, Experiment::DuhamelCheck);
        assert_eq!(c.mollifier, MollifierRule::Constant { width: 1.0 });
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn bootstrap_config() {
        let c = ExperimentConfig::from_toml("experiment = \"bootstrap\"\nn = 3\n[bootstrap]\nvariant = \"torus\"\n").unwrap();
        assert_eq!(c.bootstrap.unwrap().b0, -1.0);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "experiment = \"bootstrap\"\nn = 3\n",
            "experiment = \"count\"\nn = 7\n[ladder]\nstart = 1.0\nstop = 2.0\nfactor = 1.1\n",
            "experiment = \"count\"\nn = 2\n[ladder]\nstart = 1.0\nstop = 2.0\nfactor = 0.5\n",
            "experiment = \"kato\"\nn = 2\ngrid = 7\n[potential]\nkind = \"constant\"\nvalue = 1.0\n",
            "experiment = \"count\"\nn = 2\nbogus = 1\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(bad), Err(Error::Config(_))), "{bad}");
        }
        let coarse = DUHAMEL.replace("grid = 32", "grid = 16");
        assert!(ExperimentConfig::from_toml(&coarse).is_err());
    }

    #[test]
    fn mollifier_rules() {
        assert_eq!(MollifierRule::Power { exponent: 1.0 / 3.0 }.width(27.0), 27f64.powf(1.0 / 3.0));
        assert_eq!(MollifierRule::Log.width(2.0), 1.0);
    }
}
