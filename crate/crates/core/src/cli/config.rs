//! JSON experiment configuration.

use serde::Deserialize;

use crate::corrmat::Preset;
use crate::fso::{CN2_REFERENCE, WAVENUMBER_REFERENCE};
use crate::mcsim::{Detector, SimConfig};
use crate::mvgg::SeriesControl;

/// Quantity computed along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Pdf,
    Cdf,
    Mgf,
    SumCdf,
    OutageSc,
    OutageMrc,
    BerMrc,
    BerFso,
    KsTest,
}

impl Scenario {
    /// Scenarios whose abscissa is an SNR ratio (dB grids allowed).
    pub fn snr_axis(self) -> bool {
        matches!(
            self,
            Scenario::OutageSc | Scenario::OutageMrc | Scenario::BerMrc | Scenario::BerFso
        )
    }
}

/// A scalar or a list of scalars; a list produces one curve per entry.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Fading parameters. `beta` may list several values; for `ber-fso` both
/// shapes may instead come from `link`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub m: Option<f64>,
    pub beta: Option<OneOrMany>,
    #[serde(default = "one")]
    pub omega: f64,
    pub n: usize,
}

fn one() -> f64 {
    1.0
}

/// Optical link geometry; `length` may list several values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default = "default_cn2")]
    pub cn2: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    pub length: OneOrMany,
    #[serde(default)]
    pub aperture: f64,
}

fn default_cn2() -> f64 {
    CN2_REFERENCE
}

fn default_k() -> f64 {
    WAVENUMBER_REFERENCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Db,
    Linear,
}

/// `points` abscissae from `start` to `stop`, evenly spaced in the stated
/// scale (dB values are converted to linear ratios internally).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: Scale,
}

fn default_scale() -> Scale {
    Scale::Linear
}

impl GridConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modulation {
    Bpsk,
    Nbfsk,
}

/// Truncation settings of the joint series.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_index: usize,
    pub max_branches: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        let c = SeriesControl::<f64>::default();
        Self {
            rel_tol: c.rel_tol,
            max_index: c.max_index,
            max_branches: c.max_branches,
        }
    }
}

impl From<SeriesConfig> for SeriesControl<f64> {
    fn from(c: SeriesConfig) -> Self {
        Self {
            rel_tol: c.rel_tol,
            max_index: c.max_index,
            max_branches: c.max_branches,
        }
    }
}

/// Repeated goodness-of-fit test of the sum approximation.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KsConfig {
    pub repetitions: usize,
    pub samples: usize,
    pub alpha: f64,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            repetitions: 20,
            samples: 10_000,
            alpha: 0.05,
        }
    }
}

/// One experiment.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: ParamsConfig,
    #[serde(default = "default_correlation")]
    pub correlation: Preset,
    pub grid: Option<GridConfig>,
    /// Outage threshold `λ_th` in dB; the grid then gives `λ̄/λ_th`.
    #[serde(default)]
    pub threshold_db: f64,
    pub modulation: Option<Modulation>,
    /// Conditional error probability used by the simulator for `ber-mrc`.
    pub detector: Option<Detector>,
    /// Simulate `ber-fso` with the exact Q function instead of its
    /// exponential approximation.
    #[serde(default)]
    pub exact_q: bool,
    /// Also emit the high-SNR curves where available.
    #[serde(default)]
    pub asymptotic: bool,
    pub link: Option<LinkConfig>,
    #[serde(default = "default_green_tol")]
    pub green_tol: f64,
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub series: SeriesConfig,
    pub ks: Option<KsConfig>,
    pub output: Option<String>,
}

fn default_correlation() -> Preset {
    Preset::Independent
}

fn default_green_tol() -> f64 {
    1e-12
}

impl ExperimentConfig {
    /// Checks scenario-specific requirements before any computation.
    pub fn validate(&self) -> Result<(), String> {
        let p = &self.params;
        if p.n == 0 {
            return Err("params.n must be >= 1".into());
        }
        if !(p.omega > 0.0) {
            return Err(format!("params.omega must be > 0, got {}", p.omega));
        }
        match (self.scenario, &self.link) {
            (Scenario::BerFso, Some(_)) => {
                if p.m.is_some() || p.beta.is_some() {
                    return Err("ber-fso takes either link or params.m/params.beta, not both".into());
                }
            }
            (_, Some(_)) => return Err("link is only used by ber-fso".into()),
            _ => {
                if p.m.is_none() || p.beta.is_none() {
                    return Err("params.m and params.beta are required".into());
                }
                if p.beta.as_ref().is_some_and(|b| b.values().is_empty()) {
                    return Err("params.beta list is empty".into());
                }
            }
        }
        if let Some(l) = &self.link {
            if l.length.values().is_empty() {
                return Err("link.length list is empty".into());
            }
        }
        if self.scenario == Scenario::KsTest {
            let ks = self.ks.unwrap_or_default();
            if ks.repetitions == 0 || ks.samples < 100 {
                return Err("ks needs >= 1 repetition and >= 100 samples".into());
            }
        } else {
            let g = self.grid.as_ref().ok_or("grid is required")?;
            if g.points == 0 {
                return Err("grid.points must be >= 1".into());
            }
            if g.points > 1 && !(g.stop > g.start) {
                return Err("grid must be strictly increasing (stop > start)".into());
            }
            if g.scale == Scale::Db && !self.scenario.snr_axis() {
                return Err("dB grids apply only to SNR scenarios".into());
            }
            if !self.scenario.snr_axis() && g.start < 0.0 {
                return Err("grid values must be >= 0".into());
            }
        }
        if self.scenario == Scenario::BerMrc && self.modulation.is_none() {
            return Err("ber-mrc needs modulation (bpsk or nbfsk)".into());
        }
        if self.scenario != Scenario::BerMrc && (self.modulation.is_some() || self.detector.is_some()) {
            return Err("modulation and detector are only used by ber-mrc".into());
        }
        if self.asymptotic
            && !matches!(self.scenario, Scenario::OutageSc | Scenario::OutageMrc)
            && !(self.scenario == Scenario::BerMrc && self.modulation == Some(Modulation::Bpsk))
        {
            return Err("asymptotic curves exist for outage-sc, outage-mrc and ber-mrc with bpsk".into());
        }
        if !(self.green_tol > 0.0) {
            return Err("green_tol must be > 0".into());
        }
        if let Some(s) = &self.sim {
            if s.batch == 0 {
                return Err("sim.batch must be >= 1".into());
            }
        }
        Ok(())
    }
}
