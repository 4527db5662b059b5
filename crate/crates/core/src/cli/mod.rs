//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when a validation or comparison fails (or a
//! run is rejected, e.g. truncation leakage), 1 for configuration errors.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analytic::{
    adiabatic_conditions, closed_form_probability, gh_ratio, gibbons_hawking_probability, sideband_ratio,
    ExpChirpParams,
};
use crate::error::{Error, Result};
use crate::modes::{solve_modes, wronskian_deviation, ChirpProfile};
use crate::oracle::{compare_oracle_pt, evolve_exact, OracleConfig};
use crate::spectrum::{
    excitation_probability_with, fourier_amplitude_with, lamb_dicke_validity, spectrum_from_solution, FourierOptions,
    FourierWindow, PhysicalScales, Spectrum, SweepOptions,
};

use config::{BackendKind, CouplingKind, ProfileKind, WindowKind};
pub use config::{FileConfig, Format, RunConfig};
use output::{emit, to_json_string, Cell, Table};

/// Ω₀ is tuned to this P⁽¹⁾ for `oracle` runs without an explicit drive.
pub const DEFAULT_ORACLE_TARGET: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "chirposc", version, about = "Trapped ion in a chirped harmonic trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate the mode functions h, g and f = h − iν₀g.
    Modes,
    /// First-order excitation spectrum over a detuning sweep.
    Spectrum,
    /// Exponential-chirp closed forms over the sweep.
    Analytic,
    /// Numeric spectrum against the exponential closed form.
    Compare,
    /// Exact evolution at one detuning against first-order theory.
    Oracle,
    /// Adiabaticity and Lamb-Dicke reports.
    Validate,
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub profile: Option<ProfileKind>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub depth: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mod_freq: Option<f64>,
    /// CSV of `time,frequency` rows for the sampled profile.
    #[arg(long, global = true)]
    pub knots: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tend: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Ω₀η₀ (sets Ω₀ given η₀).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega_eta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rabi: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_max: Option<f64>,
    #[arg(long, global = true)]
    pub delta_count: Option<usize>,
    #[arg(long, global = true)]
    pub log_sweep: bool,
    /// How the Fourier integral is closed at T.
    #[arg(long, global = true, value_enum)]
    pub window: Option<WindowKind>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub fock_n: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub coupling: Option<CouplingKind>,
    /// Tune Ω₀ so the first-order probability equals this value.
    #[arg(long, global = true)]
    pub target_p1: Option<f64>,
    /// Frequency inputs are cyclic and are multiplied by 2π.
    #[arg(long, global = true)]
    pub hz: bool,
    #[arg(long, global = true)]
    pub start_min: Option<f64>,
    #[arg(long, global = true)]
    pub end_max: Option<f64>,
    #[arg(long, global = true)]
    pub eta_threshold: Option<f64>,
}

fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut knots = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Vec<_> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed.as_slice() {
            [Ok(t), Ok(v)] => knots.push((*t, *v)),
            // a header row
            _ if knots.is_empty() && i == 0 => continue,
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: expected `time,frequency`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(knots)
}

impl Flags {
    /// Config file (if any) with every given flag laid over it.
    pub fn merge(&self) -> Result<FileConfig> {
        let mut c = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        fn set<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        set(&mut c.profile.kind, &self.profile);
        set(&mut c.profile.nu0, &self.nu0);
        set(&mut c.profile.kappa, &self.kappa);
        set(&mut c.profile.depth, &self.depth);
        set(&mut c.profile.mod_freq, &self.mod_freq);
        if let Some(p) = &self.knots {
            c.profile.knots = Some(read_knots(p)?);
        }
        set(&mut c.window.t_end, &self.tend);
        set(&mut c.window.rel_tol, &self.rel_tol);
        set(&mut c.window.abs_tol, &self.abs_tol);
        set(&mut c.drive.omega_eta, &self.omega_eta);
        set(&mut c.drive.rabi, &self.rabi);
        set(&mut c.drive.eta0, &self.eta0);
        set(&mut c.sweep.delta_min, &self.delta_min);
        set(&mut c.sweep.delta_max, &self.delta_max);
        set(&mut c.sweep.count, &self.delta_count);
        if self.log_sweep {
            c.sweep.log = Some(true);
        }
        set(&mut c.fourier_window, &self.window);
        set(&mut c.output.path, &self.out);
        set(&mut c.output.format, &self.format);
        set(&mut c.oracle.truncation, &self.fock_n);
        set(&mut c.oracle.backend, &self.backend);
        set(&mut c.oracle.grid_points, &self.grid_points);
        set(&mut c.oracle.coupling, &self.coupling);
        set(&mut c.oracle.target_p1, &self.target_p1);
        if self.hz {
            c.hz = Some(true);
        }
        set(&mut c.thresholds.start_min, &self.start_min);
        set(&mut c.thresholds.end_max, &self.end_max);
        set(&mut c.thresholds.eta, &self.eta_threshold);
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ValidationFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::ValidationFailed => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub status: Status,
}

/// 1 for anything the user can fix in the configuration, 2 otherwise.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::InvalidProfile(_) | Error::Domain(_) => 1,
        _ => 2,
    }
}

fn units(cfg: &RunConfig) -> String {
    let base = match cfg.profile {
        ChirpProfile::Exponential { .. } => "frequencies and rabi in units of kappa, times in 1/kappa",
        _ => "frequencies and rabi in units of nu0, times in 1/nu0",
    };
    if cfg.hz {
        format!("{base}; inputs were cyclic and scaled by 2*pi, outputs are angular")
    } else {
        base.to_string()
    }
}

fn header(t: &mut Table, cfg: &RunConfig) {
    t.meta("units", units(cfg))
        .meta("profile", cfg.profile.descriptor())
        .meta("t_end", output::format_float(cfg.window.t_end))
        .meta("rel_tol", output::format_float(cfg.window.rel_tol))
        .meta("abs_tol", output::format_float(cfg.window.abs_tol))
        .meta("version", env!("CARGO_PKG_VERSION"));
}

fn deltas(cfg: &RunConfig) -> Result<&[f64]> {
    cfg.sweep
        .as_ref()
        .map(|s| s.deltas.as_slice())
        .ok_or_else(|| Error::Config("this command needs a detuning sweep (--delta-min)".into()))
}

fn exp_params(cfg: &RunConfig) -> Result<ExpChirpParams> {
    match cfg.profile {
        ChirpProfile::Exponential { nu0, kappa } => ExpChirpParams::new(nu0, kappa, cfg.window.t_end),
        _ => Err(Error::Config("this command needs the exponential profile".into())),
    }
}

fn window_name(w: FourierWindow) -> &'static str {
    match w {
        FourierWindow::Sharp => "sharp",
        FourierWindow::FreeDriftTail => "free_drift_tail",
    }
}

fn modes(cfg: &RunConfig) -> Result<Outcome> {
    let sol = solve_modes(&cfg.profile, &cfg.window)?;
    let mut t = Table::new(&["t", "h", "hdot", "g", "gdot", "re_f", "im_f", "wronskian_deviation"]);
    header(&mut t, cfg);
    t.meta("segments", sol.segments().len()).meta(
        "max_wronskian_deviation",
        output::format_float(wronskian_deviation(&sol)),
    );
    for i in 0..sol.times().len() {
        let w = sol.h()[i] * sol.gdot()[i] - sol.hdot()[i] * sol.g()[i];
        t.push(vec![
            sol.times()[i].into(),
            sol.h()[i].into(),
            sol.hdot()[i].into(),
            sol.g()[i].into(),
            sol.gdot()[i].into(),
            sol.f()[i].re.into(),
            sol.f()[i].im.into(),
            (w - 1.0).abs().into(),
        ]);
    }
    Ok(Outcome {
        text: t.render(cfg.format)?,
        status: Status::Success,
    })
}

fn sweep_spectrum(cfg: &RunConfig, window: FourierWindow) -> Result<Spectrum> {
    let sol = solve_modes(&cfg.profile, &cfg.window)?;
    let opts = SweepOptions {
        fourier: FourierOptions::with_window(window),
        threads: cfg.threads,
    };
    spectrum_from_solution(&sol, &cfg.drive, deltas(cfg)?, &opts)
}

#[derive(Serialize)]
struct SpectrumDocument<'a> {
    units: String,
    #[serde(flatten)]
    spectrum: &'a Spectrum,
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let window = cfg.fourier_window.unwrap_or(FourierWindow::Sharp);
    let s = sweep_spectrum(cfg, window)?;
    let text = match cfg.format {
        Format::Json => to_json_string(&SpectrumDocument {
            units: units(cfg),
            spectrum: &s,
        })?,
        Format::Csv => {
            let mut t = Table::new(&["delta", "p1"]);
            header(&mut t, cfg);
            t.meta("omega_eta", output::format_float(s.metadata.omega_eta))
                .meta("window", window_name(window))
                .meta(
                    "perturbative_warnings",
                    s.entries.iter().filter(|e| e.perturbative_warning).count(),
                )
                .meta("small_detuning", s.entries.iter().filter(|e| e.small_detuning).count());
            for e in &s.entries {
                t.push(vec![e.delta.into(), e.p1.into()]);
            }
            t.to_csv()
        }
    };
    Ok(Outcome {
        text,
        status: Status::Success,
    })
}

fn analytic(cfg: &RunConfig) -> Result<Outcome> {
    let p = exp_params(cfg)?;
    let oe = cfg.drive.omega_eta(p.nu0)?;
    let mut t = Table::new(&[
        "delta",
        "p1_closed_form",
        "p1_gh",
        "sideband_ratio",
        "gh_ratio_exact",
        "gh_ratio_approx",
    ]);
    header(&mut t, cfg);
    t.meta("omega_eta", output::format_float(oe));
    for &d in deltas(cfg)? {
        let ratio = gh_ratio(&p, d).ok();
        t.push(vec![
            d.into(),
            closed_form_probability(&p, oe, d).ok().into(),
            gibbons_hawking_probability(&p, oe, d).ok().into(),
            sideband_ratio(d, p.kappa)?.into(),
            ratio.map(|r| r.exact).into(),
            ratio.map(|r| r.approx).into(),
        ]);
    }
    Ok(Outcome {
        text: t.render(cfg.format)?,
        status: Status::Success,
    })
}

fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let p = exp_params(cfg)?;
    let window = cfg.fourier_window.unwrap_or(FourierWindow::FreeDriftTail);
    let s = sweep_spectrum(cfg, window)?;
    let oe = s.metadata.omega_eta;
    let mut t = Table::new(&["delta", "p1_numeric", "p1_closed_form", "rel_gap"]);
    header(&mut t, cfg);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for e in &s.entries {
        let cf = closed_form_probability(&p, oe, e.delta).ok();
        let gap = cf.map(|c| (e.p1 - c).abs() / c);
        if let Some(g) = gap {
            worst = if g.is_nan() { f64::NAN } else { worst.max(g) };
        }
        rows.push(vec![e.delta.into(), e.p1.into(), cf.into(), gap.into()]);
    }
    t.meta("omega_eta", output::format_float(oe))
        .meta("window", window_name(window))
        .meta("max_rel_gap", output::format_float(worst));
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Outcome {
        text: t.render(cfg.format)?,
        status: Status::Success,
    })
}

fn oracle(cfg: &RunConfig) -> Result<Outcome> {
    let ds = deltas(cfg)?;
    let &[delta] = ds else {
        return Err(Error::Config(
            "oracle takes a single detuning (--delta-min only)".into(),
        ));
    };
    let window = cfg.fourier_window.unwrap_or(FourierWindow::Sharp);
    let fourier = FourierOptions::with_window(window);
    let sol = solve_modes(&cfg.profile, &cfg.window)?;
    let mut drive = cfg.drive.at_detuning(delta);
    let target = cfg
        .oracle
        .target_p1
        .or((!cfg.drive_explicit).then_some(DEFAULT_ORACLE_TARGET));
    if let Some(target) = target {
        let f = fourier_amplitude_with(&sol, delta, &fourier)?.value.norm();
        if !(f > 0.0) {
            return Err(Error::Config(format!(
                "P1 vanishes at delta = {delta}; cannot tune the drive"
            )));
        }
        drive.rabi = target.sqrt() / (drive.resolve_eta0(sol.nu0())? * f);
    }
    let p1 = excitation_probability_with(&sol, &drive, &fourier)?.p1;
    let mut oc = OracleConfig::new(cfg.profile.clone(), drive, cfg.window)
        .with_backend(cfg.oracle.backend)
        .with_coupling(cfg.oracle.coupling);
    oc.leakage_limit = cfg.oracle.leakage_limit;
    oc.steps_per_period = cfg.oracle.steps_per_period;
    let run = evolve_exact(&oc)?;
    let cmp = compare_oracle_pt(&run, p1);
    let mut t = Table::new(&[
        "delta",
        "rabi",
        "p1",
        "oracle_population",
        "rel_error",
        "leakage",
        "norm_drift",
        "steps",
        "backend",
        "pass",
    ]);
    header(&mut t, cfg);
    t.meta("window", window_name(window)).meta(
        "coupling",
        match cfg.oracle.coupling {
            crate::oracle::Coupling::Linear => "linear",
            crate::oracle::Coupling::FullExponential => "full_exponential",
        },
    );
    t.push(vec![
        delta.into(),
        drive.rabi.into(),
        p1.into(),
        run.excited_population.into(),
        cmp.rel_error.into(),
        run.leakage.into(),
        run.norm_drift.into(),
        run.steps.into(),
        run.backend.as_str().into(),
        cmp.pass.into(),
    ]);
    Ok(Outcome {
        text: t.render(cfg.format)?,
        status: if cmp.pass {
            Status::Success
        } else {
            Status::ValidationFailed
        },
    })
}

fn validate(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&["check", "quantity", "value", "threshold", "pass"]);
    header(&mut t, cfg);
    let mut status = Status::Success;
    match exp_params(cfg) {
        Ok(p) => {
            let r = adiabatic_conditions(&p, &cfg.thresholds);
            let th = &cfg.thresholds;
            t.push(vec![
                "adiabatic".into(),
                "ratio_start".into(),
                r.ratio_start.into(),
                th.start_min.into(),
                (r.ratio_start >= th.start_min).into(),
            ]);
            t.push(vec![
                "adiabatic".into(),
                "ratio_end".into(),
                r.ratio_end.into(),
                th.end_max.into(),
                (r.ratio_end <= th.end_max).into(),
            ]);
            t.meta("adiabatic", if r.pass { "pass" } else { "fail" });
            if !r.pass {
                status = Status::ValidationFailed;
            }
        }
        Err(_) => {
            t.meta("adiabatic", "not_applicable");
        }
    }
    let nu0 = cfg.profile.nu0();
    let scales = match cfg.drive.scales {
        Some(s) => s,
        None => PhysicalScales::natural(cfg.drive.resolve_eta0(nu0)?, nu0),
    };
    let ld = lamb_dicke_validity(&cfg.profile, &scales, &cfg.window, cfg.eta_threshold)?;
    t.push(vec![
        "lamb_dicke".into(),
        "max_eta".into(),
        ld.max_eta.into(),
        ld.threshold.into(),
        ld.first_violation_time.is_none().into(),
    ]);
    t.push(vec![
        "lamb_dicke".into(),
        "first_violation_time".into(),
        ld.first_violation_time.into(),
        Cell::Empty,
        ld.first_violation_time.is_none().into(),
    ]);
    // η is evaluated with the instantaneous ground-state width, which
    // overstates the spread once the state freezes out; report only
    t.meta(
        "lamb_dicke",
        if ld.first_violation_time.is_none() {
            "pass"
        } else {
            "warn"
        },
    );
    Ok(Outcome {
        text: t.render(cfg.format)?,
        status,
    })
}

/// Run one subcommand on a resolved configuration; the caller writes the text.
pub fn run(cfg: &RunConfig, command: Command) -> Result<Outcome> {
    match command {
        Command::Modes => modes(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Analytic => analytic(cfg),
        Command::Compare => compare(cfg),
        Command::Oracle => oracle(cfg),
        Command::Validate => validate(cfg),
    }
}

/// Parse and run without writing; `Ok(None)` when clap handled help or version.
pub fn run_args<I, T>(args: I) -> Result<Option<(Outcome, Option<std::path::PathBuf>)>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(None);
        }
        Err(e) => {
            let msg = e.render().to_string();
            return Err(Error::Config(msg.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    let cfg = cli.flags.merge()?.resolve()?;
    let out = run(&cfg, cli.command)?;
    Ok(Some((out, cfg.out)))
}

/// Parse, run, write; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = run_args(args).and_then(|r| match r {
        None => Ok(0),
        Some((out, path)) => {
            emit(&out.text, path.as_deref())?;
            Ok(out.status.code())
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}
