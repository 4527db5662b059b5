//! Run configuration: a JSON document, overlaid by command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::AdiabaticThresholds;
use crate::error::{Error, Result};
use crate::modes::{ChirpProfile, SimulationWindow};
use crate::oracle::{self, Backend, Coupling};
use crate::spectrum::{FourierWindow, LaserDrive, PhysicalScales, DEFAULT_ETA_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    Exponential,
    Modulated,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Sharp,
    FreeDriftTail,
}

impl From<WindowKind> for FourierWindow {
    fn from(w: WindowKind) -> Self {
        match w {
            WindowKind::Sharp => FourierWindow::Sharp,
            WindowKind::FreeDriftTail => FourierWindow::FreeDriftTail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Fock,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Linear,
    FullExponential,
}

/// Same shape as the tagged `ChirpProfile` JSON, with every field optional
/// so flags can fill or replace parts of it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: Option<ProfileKind>,
    pub nu0: Option<f64>,
    pub kappa: Option<f64>,
    pub depth: Option<f64>,
    pub mod_freq: Option<f64>,
    pub knots: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub rabi: Option<f64>,
    pub eta0: Option<f64>,
    /// Ω₀η₀; fixes Ω₀ given η₀.
    pub omega_eta: Option<f64>,
    pub scales: Option<PhysicalScales>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub t_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub count: Option<usize>,
    /// Geometric spacing; both ends must share a sign.
    pub log: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub backend: Option<BackendKind>,
    pub truncation: Option<usize>,
    pub grid_points: Option<usize>,
    pub coupling: Option<CouplingKind>,
    /// Tune Ω₀ so the first-order probability equals this value.
    pub target_p1: Option<f64>,
    pub leakage_limit: Option<f64>,
    pub steps_per_period: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    pub start_min: Option<f64>,
    pub end_max: Option<f64>,
    pub eta: Option<f64>,
}

/// The JSON config file. Every section is optional; flags fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub drive: DriveSpec,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    pub fourier_window: Option<WindowKind>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    /// Frequencies are cyclic (cycles per time unit) and get multiplied by 2π.
    pub hz: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub deltas: Vec<f64>,
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub backend: Backend,
    pub coupling: Coupling,
    pub target_p1: Option<f64>,
    pub leakage_limit: f64,
    pub steps_per_period: f64,
}

/// Fully resolved, unit-converted run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: ChirpProfile,
    pub drive: LaserDrive,
    /// Whether Ω₀ was fixed explicitly rather than left at its default.
    pub drive_explicit: bool,
    pub window: SimulationWindow,
    pub sweep: Option<Sweep>,
    pub fourier_window: Option<FourierWindow>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub oracle: OracleSettings,
    pub thresholds: AdiabaticThresholds,
    pub eta_threshold: f64,
    pub hz: bool,
    pub threads: Option<usize>,
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing {what}")))
}

fn profile_from(spec: &ProfileSpec, scale: f64) -> Result<ChirpProfile> {
    let kind = need(spec.kind, "profile kind (--profile)")?;
    let nu0 = || need(spec.nu0, "nu0 (--nu0)").map(|v| v * scale);
    Ok(match kind {
        ProfileKind::Constant => ChirpProfile::Constant { nu0: nu0()? },
        ProfileKind::Exponential => ChirpProfile::Exponential {
            nu0: nu0()?,
            kappa: need(spec.kappa, "kappa (--kappa)")? * scale,
        },
        ProfileKind::Modulated => ChirpProfile::Modulated {
            nu0: nu0()?,
            depth: need(spec.depth, "modulation depth (--depth)")?,
            mod_freq: need(spec.mod_freq, "modulation frequency (--mod-freq)")? * scale,
        },
        ProfileKind::Sampled => ChirpProfile::Sampled {
            knots: need(spec.knots.clone(), "knots (--knots)")?
                .into_iter()
                .map(|(t, v)| (t, v * scale))
                .collect(),
        },
    })
}

fn sweep_from(spec: &SweepSpec, scale: f64) -> Result<Option<Sweep>> {
    let Some(lo) = spec.delta_min else {
        if spec.delta_max.is_some() || spec.count.is_some() {
            return Err(Error::Config("the sweep needs delta_min (--delta-min)".into()));
        }
        return Ok(None);
    };
    let count = spec.count.unwrap_or(if spec.delta_max.is_some() { 2 } else { 1 });
    let log = spec.log.unwrap_or(false);
    if count == 0 {
        return Err(Error::Config("sweep count must be at least 1".into()));
    }
    let hi = spec.delta_max.unwrap_or(lo);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Config("sweep bounds must be finite".into()));
    }
    if count > 1 && !(lo < hi) {
        return Err(Error::Config(format!(
            "delta_min ({lo}) must be below delta_max ({hi})"
        )));
    }
    if count == 1 && hi != lo && spec.count.is_some() {
        return Err(Error::Config(
            "a single-point sweep must not set a different delta_max".into(),
        ));
    }
    if log && !(lo * hi > 0.0) {
        return Err(Error::Config(
            "a log sweep needs both bounds non-zero and of the same sign".into(),
        ));
    }
    let deltas = (0..count)
        .map(|i| {
            if count == 1 {
                return lo;
            }
            let s = i as f64 / (count - 1) as f64;
            if i == count - 1 {
                hi
            } else if log {
                lo.signum() * (lo.abs().ln() + s * (hi.abs().ln() - lo.abs().ln())).exp()
            } else {
                lo + s * (hi - lo)
            }
        })
        .map(|d| d * scale)
        .collect();
    Ok(Some(Sweep { deltas, log }))
}

fn drive_from(spec: &DriveSpec, nu0: f64, scale: f64) -> Result<(LaserDrive, bool)> {
    let eta_given = LaserDrive {
        rabi: 0.0,
        eta0: spec.eta0,
        scales: spec.scales,
        detuning: 0.0,
    };
    let eta0 = if spec.eta0.is_none() && spec.scales.is_none() {
        oracle::DEFAULT_ETA0
    } else {
        eta_given.resolve_eta0(nu0)?
    };
    let rabi_from_product = spec.omega_eta.map(|oe| oe * scale / eta0);
    let rabi = match (spec.rabi.map(|r| r * scale), rabi_from_product) {
        (Some(r), Some(p)) if (r - p).abs() > 1e-9 * r.abs().max(p.abs()) => {
            return Err(Error::Config(format!(
                "rabi = {r} disagrees with omega_eta / eta0 = {p}"
            )))
        }
        (Some(r), _) | (None, Some(r)) => Some(r),
        (None, None) => None,
    };
    let drive = LaserDrive {
        rabi: rabi.unwrap_or(scale / eta0),
        eta0: Some(eta0),
        scales: spec.scales,
        detuning: 0.0,
    };
    drive.resolve_eta0(nu0)?;
    Ok((drive, rabi.is_some()))
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("CHIRPOSC_THREADS") {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| if n == 0 { None } else { Some(n) })
            .map_err(|_| Error::Config(format!("CHIRPOSC_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl FileConfig {
    pub fn resolve(&self) -> Result<RunConfig> {
        let hz = self.hz.unwrap_or(false);
        let scale = if hz { 2.0 * PI } else { 1.0 };
        let profile = profile_from(&self.profile, scale)?;
        let t_end = need(self.window.t_end, "t_end (--tend)")?;
        let mut window = SimulationWindow::new(t_end);
        if let Some(v) = self.window.rel_tol {
            window.rel_tol = v;
        }
        if let Some(v) = self.window.abs_tol {
            window.abs_tol = v;
        }
        if let Some(v) = self.window.max_step {
            window.max_step = v;
        }
        window.validate()?;
        profile.validate(t_end)?;
        let (drive, drive_explicit) = drive_from(&self.drive, profile.nu0(), scale)?;
        let sweep = sweep_from(&self.sweep, scale)?;

        let o = &self.oracle;
        let backend = match o.backend.unwrap_or(BackendKind::Fock) {
            BackendKind::Fock => Backend::Fock {
                truncation: o.truncation.unwrap_or(oracle::DEFAULT_TRUNCATION),
            },
            BackendKind::Grid => Backend::Grid {
                points: o.grid_points,
                half_width: None,
            },
        };
        if let Some(p) = o.target_p1 {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Config(format!("target_p1 must lie in (0, 1), got {p}")));
            }
        }
        let oracle = OracleSettings {
            backend,
            coupling: match o.coupling.unwrap_or(CouplingKind::Linear) {
                CouplingKind::Linear => Coupling::Linear,
                CouplingKind::FullExponential => Coupling::FullExponential,
            },
            target_p1: o.target_p1,
            leakage_limit: o.leakage_limit.unwrap_or(oracle::DEFAULT_LEAKAGE_LIMIT),
            steps_per_period: o.steps_per_period.unwrap_or(oracle::DEFAULT_STEPS_PER_PERIOD),
        };
        let defaults = AdiabaticThresholds::default();
        Ok(RunConfig {
            profile,
            drive,
            drive_explicit,
            window,
            sweep,
            fourier_window: self.fourier_window.map(Into::into),
            out: self.output.path.clone(),
            format: self.output.format.unwrap_or_default(),
            oracle,
            thresholds: AdiabaticThresholds {
                start_min: self.thresholds.start_min.unwrap_or(defaults.start_min),
                end_max: self.thresholds.end_max.unwrap_or(defaults.end_max),
            },
            eta_threshold: self.thresholds.eta.unwrap_or(DEFAULT_ETA_THRESHOLD),
            hz,
            threads: threads_from_env()?,
        })
    }
}
