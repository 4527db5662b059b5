//! First-order excitation spectra from the complex mode function.
//!
//! P⁽¹⁾(Δ) = (Ω₀η₀)² |F(Δ)|², with F = ∫₀ᵀ e^{−iΔt} f(t) dt.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{solve_modes, ChirpProfile, ModeSolution, SimulationWindow};

/// First-order results above this are flagged as untrustworthy.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;
/// |Δ| below this many κ is flagged for exponential chirps.
pub const SMALL_DETUNING_KAPPAS: f64 = 5.0;
pub const DEFAULT_ETA_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScales {
    pub mass: f64,
    pub hbar: f64,
    pub wave_number: f64,
    /// Angle between the beam and the trap axis, radians.
    pub beam_angle: f64,
}

impl PhysicalScales {
    /// ħ = M = 1 with k cos θ chosen so that η(ν₀) = eta0.
    pub fn natural(eta0: f64, nu0: f64) -> Self {
        PhysicalScales {
            mass: 1.0,
            hbar: 1.0,
            wave_number: eta0 * (2.0 * nu0).sqrt(),
            beam_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("hbar", self.hbar),
            ("wave_number", self.wave_number),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.beam_angle.is_finite() || self.beam_angle.cos().abs() < 1e-12 {
            return Err(Error::InvalidInput(format!(
                "beam angle {} leaves no projection on the trap axis",
                self.beam_angle
            )));
        }
        Ok(())
    }

    /// Ground-state position variance ħ/(2Mν).
    pub fn ground_variance(&self, nu: f64) -> f64 {
        self.hbar / (2.0 * self.mass * nu)
    }

    /// k cos θ
    pub fn projected_wave_number(&self) -> f64 {
        self.wave_number * self.beam_angle.cos()
    }
}

/// η(ν) = √(ħk²cos²θ / 2Mν)
pub fn lamb_dicke(scales: &PhysicalScales, nu: f64) -> Result<f64> {
    scales.validate()?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain(format!("trap frequency must be positive, got {nu}")));
    }
    Ok((scales.hbar * scales.projected_wave_number().powi(2) / (2.0 * scales.mass * nu)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambDickeReport {
    pub max_eta: f64,
    pub threshold: f64,
    pub first_violation_time: Option<f64>,
}

/// Largest η over the window and the first time it exceeds `threshold`.
pub fn lamb_dicke_validity(
    profile: &ChirpProfile,
    scales: &PhysicalScales,
    window: &SimulationWindow,
    threshold: f64,
) -> Result<LambDickeReport> {
    profile.validate(window.t_end)?;
    let t_end = window.t_end;
    let max_eta = lamb_dicke(scales, profile.min_nu_on(0.0, t_end))?;
    let eta_at = |t: f64| lamb_dicke(scales, profile.nu(t));
    let first_violation_time = if !(max_eta > threshold) {
        None
    } else if eta_at(0.0)? > threshold {
        Some(0.0)
    } else if let ChirpProfile::Exponential { kappa, .. } = profile {
        // η₀ e^{κt/2} = threshold
        Some(2.0 * (threshold / eta_at(0.0)?).ln() / kappa)
    } else {
        let n = 20_000;
        let mut prev = 0.0;
        let mut found = None;
        for i in 1..=n {
            let t = t_end * i as f64 / n as f64;
            if eta_at(t)? > threshold {
                let (mut lo, mut hi) = (prev, t);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if eta_at(mid)? > threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                found = Some(hi);
                break;
            }
            prev = t;
        }
        // a violation strictly between grid points and knots is still caught
        // by max_eta; report the time of minimum ν as a fallback
        found.or(Some(t_end))
    };
    Ok(LambDickeReport {
        max_eta,
        threshold,
        first_violation_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserDrive {
    /// Ω₀
    pub rabi: f64,
    #[serde(default)]
    pub eta0: Option<f64>,
    #[serde(default)]
    pub scales: Option<PhysicalScales>,
    /// Δ = ω_A − ω_L
    pub detuning: f64,
}

impl LaserDrive {
    pub fn with_eta(rabi: f64, eta0: f64, detuning: f64) -> Self {
        LaserDrive {
            rabi,
            eta0: Some(eta0),
            scales: None,
            detuning,
        }
    }

    /// η₀ from whichever of eta0/scales is present; both must agree to 1e-9.
    pub fn resolve_eta0(&self, nu0: f64) -> Result<f64> {
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "rabi must be non-negative, got {}",
                self.rabi
            )));
        }
        let from_scales = self.scales.map(|s| lamb_dicke(&s, nu0)).transpose()?;
        let eta = match (self.eta0, from_scales) {
            (Some(e), Some(s)) => {
                if (e - s).abs() > 1e-9 * e.abs().max(s.abs()) {
                    return Err(Error::InvalidInput(format!(
                        "eta0 = {e} disagrees with the value {s} implied by the physical scales"
                    )));
                }
                e
            }
            (Some(e), None) => e,
            (None, Some(s)) => s,
            (None, None) => return Err(Error::InvalidInput("the drive needs eta0 or physical scales".into())),
        };
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidInput(format!("eta0 must be positive, got {eta}")));
        }
        Ok(eta)
    }

    pub fn omega_eta(&self, nu0: f64) -> Result<f64> {
        Ok(self.rabi * self.resolve_eta0(nu0)?)
    }

    pub fn at_detuning(&self, detuning: f64) -> Self {
        LaserDrive { detuning, ..*self }
    }
}

/// ⟨q(t₁)q(t₂)⟩ = (ħ/2Mν₀) f(t₁) f*(t₂) in the initial ground state.
pub fn two_time_correlation(sol: &ModeSolution, scales: &PhysicalScales, t1: f64, t2: f64) -> Result<Complex64> {
    scales.validate()?;
    let f1 = sol.eval(t1)?.f();
    let f2 = sol.eval(t2)?.f();
    Ok(scales.ground_variance(sol.nu0()) * f1 * f2.conj())
}

/// How the Fourier integral is closed at t = T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierWindow {
    /// ∫₀ᵀ exactly as written.
    #[default]
    Sharp,
    /// Adds the Abel-regularized free-particle continuation past T,
    /// e^{−iΔT}[f(T)/(iΔ) + ḟ(T)/(iΔ)²], for chirps that end with ν(T) ≪ |Δ|.
    FreeDriftTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    pub window: FourierWindow,
    /// Panel width as a fraction of the shortest period among 2π/|Δ| and 2π/ν.
    pub panel_fraction: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            window: FourierWindow::Sharp,
            panel_fraction: 1.0 / 20.0,
        }
    }
}

impl FourierOptions {
    pub fn with_window(window: FourierWindow) -> Self {
        FourierOptions {
            window,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierAmplitude {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// ∫₀¹ θ^l e^{−iωθ} dθ for l = 0..4 and |ω| ≲ 1.
fn moments(omega: f64) -> [Complex64; 5] {
    let z = Complex64::new(0.0, -omega);
    let mut out = [Complex64::default(); 5];
    for (l, m) in out.iter_mut().enumerate() {
        let mut term = Complex64::new(1.0, 0.0); // z^n / n!
        let mut acc = Complex64::new(1.0 / (l as f64 + 1.0), 0.0);
        for n in 1..40 {
            term *= z / n as f64;
            let add = term / (l + n + 1) as f64;
            acc += add;
            if add.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        *m = acc;
    }
    out
}

/// Coefficients of p((m + φ)/n) as a polynomial in φ.
fn shift_poly(c: &[Complex64; 5], m: f64, n: f64) -> [Complex64; 5] {
    const BINOM: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut out = [Complex64::default(); 5];
    let inv_n = 1.0 / n;
    for (j, cj) in c.iter().enumerate() {
        let scale = inv_n.powi(j as i32);
        for (l, o) in out.iter_mut().enumerate().take(j + 1) {
            *o += cj * (BINOM[j][l] * m.powi((j - l) as i32) * scale);
        }
    }
    out
}

/// F(Δ) by exact integration of e^{−iΔt} against each dense polynomial piece.
pub fn fourier_amplitude_with(sol: &ModeSolution, delta: f64, opts: &FourierOptions) -> Result<FourierAmplitude> {
    if !delta.is_finite() {
        return Err(Error::InvalidInput(format!("detuning must be finite, got {delta}")));
    }
    if !(opts.panel_fraction > 0.0 && opts.panel_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "panel_fraction must lie in (0, 1], got {}",
            opts.panel_fraction
        )));
    }
    let profile = sol.profile();
    let nu0 = sol.nu0();
    let panel_angle = 2.0 * PI * opts.panel_fraction;

    let mut total = Complex64::default();
    let mut comp = Complex64::default(); // Kahan compensation
    let mut cum_f = 0.0;
    let mut cum_fdot = 0.0;
    let mut trunc = 0.0;
    let mut mass = 0.0;
    let mut panels = 0usize;
    for seg in sol.segments() {
        let coeffs = sol.rotated_coefficients(seg);
        let c: [Complex64; 5] = std::array::from_fn(|j| Complex64::new(coeffs[0][j], -coeffs[2][j]));
        let omega_ref = delta.abs().max(profile.max_nu_on(seg.t0, seg.t0 + seg.dt));
        let n_sub = ((omega_ref * seg.dt / panel_angle).ceil() as usize).max(1);
        let nf = n_sub as f64;
        let sub_dt = seg.dt / nf;
        let mom = moments(delta * sub_dt);
        for m in 0..n_sub {
            let d = if n_sub == 1 { c } else { shift_poly(&c, m as f64, nf) };
            let t_start = seg.t0 + m as f64 * sub_dt;
            let phase = Complex64::from_polar(sub_dt, -delta * t_start);
            let piece = phase * d.iter().zip(&mom).map(|(a, b)| a * b).sum::<Complex64>();
            let y = piece - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
            mass += sub_dt * d.iter().map(|v| v.norm()).sum::<f64>();
        }
        panels += n_sub;
        trunc += seg.dt * cum_f;
        cum_f += seg.err[0].abs() + seg.err[2].abs();
        cum_fdot += nu0 * (seg.err[1].abs() + seg.err[3].abs());
    }

    let mut error_estimate = trunc + 8.0 * f64::EPSILON * mass * (panels as f64).sqrt().max(1.0);

    if opts.window == FourierWindow::FreeDriftTail {
        if delta == 0.0 {
            return Err(Error::InvalidInput(
                "the free-drift tail needs a non-zero detuning".into(),
            ));
        }
        let end = sol.eval(sol.t_end())?;
        let i_delta = Complex64::new(0.0, delta);
        let tail =
            Complex64::from_polar(1.0, -delta * sol.t_end()) * (end.f() / i_delta + end.fdot() / (i_delta * i_delta));
        total += tail;
        error_estimate += cum_f / delta.abs() + cum_fdot / (delta * delta);
    }

    Ok(FourierAmplitude {
        value: total,
        error_estimate,
    })
}

/// F(Δ) = ∫₀ᵀ e^{−iΔt} f(t) dt over the sharp window.
pub fn fourier_amplitude(sol: &ModeSolution, delta: f64) -> Result<FourierAmplitude> {
    fourier_amplitude_with(sol, delta, &FourierOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub delta: f64,
    pub p1: f64,
    pub amplitude: FourierAmplitude,
    /// p1 exceeds the first-order validity limit.
    pub perturbative_warning: bool,
    /// Δ is too close to zero for the result to be trusted.
    pub small_detuning: bool,
}

fn small_detuning(profile: &ChirpProfile, delta: f64) -> bool {
    match profile.kappa() {
        Some(k) => delta.abs() < SMALL_DETUNING_KAPPAS * k,
        None => delta == 0.0,
    }
}

pub fn excitation_probability_with(
    sol: &ModeSolution,
    drive: &LaserDrive,
    opts: &FourierOptions,
) -> Result<Excitation> {
    let oe = drive.omega_eta(sol.nu0())?;
    let amplitude = fourier_amplitude_with(sol, drive.detuning, opts)?;
    let p1 = oe * oe * amplitude.value.norm_sqr();
    let perturbative_warning = p1 > PERTURBATIVE_LIMIT;
    if perturbative_warning {
        warn!(
            "P1 = {p1:e} at delta = {} exceeds {PERTURBATIVE_LIMIT}; first-order theory is unreliable",
            drive.detuning
        );
    }
    Ok(Excitation {
        delta: drive.detuning,
        p1,
        amplitude,
        perturbative_warning,
        small_detuning: small_detuning(sol.profile(), drive.detuning),
    })
}

/// (Ω₀η₀)² |F|² over the sharp window.
pub fn excitation_probability(sol: &ModeSolution, drive: &LaserDrive) -> Result<f64> {
    excitation_probability_with(sol, drive, &FourierOptions::default()).map(|e| e.p1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub delta: f64,
    pub p1: f64,
    pub error_estimate: f64,
    pub perturbative_warning: bool,
    pub small_detuning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub profile: String,
    pub omega_eta: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub window: FourierWindow,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub metadata: SpectrumMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub fourier: FourierOptions,
    /// Worker threads; `None` or `Some(0)` uses the global pool.
    pub threads: Option<usize>,
}

/// Evaluate a sweep on an already solved set of mode functions.
pub fn spectrum_from_solution(
    sol: &ModeSolution,
    drive: &LaserDrive,
    deltas: &[f64],
    opts: &SweepOptions,
) -> Result<Spectrum> {
    if deltas.is_empty() {
        return Err(Error::InvalidInput("the detuning list is empty".into()));
    }
    let omega_eta = drive.omega_eta(sol.nu0())?;
    let run = || -> Result<Vec<SpectrumEntry>> {
        deltas
            .par_iter()
            .map(|&d| {
                let e = excitation_probability_with(sol, &drive.at_detuning(d), &opts.fourier)?;
                Ok(SpectrumEntry {
                    delta: d,
                    p1: e.p1,
                    error_estimate: 2.0 * omega_eta * omega_eta * e.amplitude.value.norm() * e.amplitude.error_estimate,
                    perturbative_warning: e.perturbative_warning,
                    small_detuning: e.small_detuning,
                })
            })
            .collect()
    };
    let mut entries = match opts.threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        _ => run()?,
    };
    entries.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let w = sol.window();
    Ok(Spectrum {
        entries,
        metadata: SpectrumMetadata {
            profile: sol.profile().descriptor(),
            omega_eta,
            t_end: w.t_end,
            rel_tol: w.rel_tol,
            abs_tol: w.abs_tol,
            window: opts.fourier.window,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Solve the mode functions once and evaluate every detuning.
pub fn spectrum_sweep(
    profile: &ChirpProfile,
    drive: &LaserDrive,
    deltas: &[f64],
    window: &SimulationWindow,
    opts: &SweepOptions,
) -> Result<Spectrum> {
    if deltas.is_empty() {
        return Err(Error::InvalidInput("the detuning list is empty".into()));
    }
    let sol = solve_modes(profile, window)?;
    spectrum_from_solution(&sol, drive, deltas, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::rotate_modes;

    fn constant(nu0: f64, t_end: f64) -> ModeSolution {
        solve_modes(&ChirpProfile::Constant { nu0 }, &SimulationWindow::new(t_end)).unwrap()
    }

    #[test]
    fn lamb_dicke_examples() {
        let s = PhysicalScales {
            mass: 1.0,
            hbar: 2.0,
            wave_number: 1.0,
            beam_angle: 0.0,
        };
        assert!((lamb_dicke(&s, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let s = PhysicalScales::natural(0.1, 8.0);
        assert!((lamb_dicke(&s, 8.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((lamb_dicke(&s, 2.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(lamb_dicke(&s, 0.0).is_err());
        let tilted = PhysicalScales {
            beam_angle: PI / 2.0,
            ..s
        };
        assert!(lamb_dicke(&tilted, 1.0).is_err());
    }

    #[test]
    fn lamb_dicke_validity_examples() {
        let s = PhysicalScales::natural(0.1, 2.0);
        let w = SimulationWindow::new(10.0);
        let r = lamb_dicke_validity(&ChirpProfile::Constant { nu0: 2.0 }, &s, &w, 0.3).unwrap();
        assert!((r.max_eta - 0.1).abs() < 1e-15 && r.first_violation_time.is_none());

        let exp = ChirpProfile::Exponential { nu0: 2.0, kappa: 1.0 };
        let r = lamb_dicke_validity(&exp, &s, &w, 0.3).unwrap();
        assert!((r.max_eta - 0.1 * 5f64.exp()).abs() < 1e-12);
        assert!((r.first_violation_time.unwrap() - 2.0 * 3f64.ln()).abs() < 1e-12);
        let r = lamb_dicke_validity(&exp, &s, &w, f64::INFINITY).unwrap();
        assert!(r.first_violation_time.is_none());

        // sampled profile reproducing the exponential: bisection finds the crossing
        let knots: Vec<(f64, f64)> = (0..=2000)
            .map(|i| {
                let t = i as f64 * 0.005;
                (t, 2.0 * (-t).exp())
            })
            .collect();
        let r = lamb_dicke_validity(&ChirpProfile::Sampled { knots }, &s, &w, 0.3).unwrap();
        assert!((r.first_violation_time.unwrap() - 2.0 * 3f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn drive_eta_resolution() {
        let s = PhysicalScales::natural(0.05, 3.0);
        let mut d = LaserDrive {
            rabi: 1.0,
            eta0: Some(0.05),
            scales: Some(s),
            detuning: 0.0,
        };
        assert!((d.resolve_eta0(3.0).unwrap() - 0.05).abs() < 1e-15);
        d.eta0 = Some(0.0500001);
        assert!(matches!(d.resolve_eta0(3.0), Err(Error::InvalidInput(_))));
        d.eta0 = None;
        assert!((d.resolve_eta0(3.0).unwrap() - 0.05).abs() < 1e-15);
        d.scales = None;
        assert!(d.resolve_eta0(3.0).is_err());
    }

    #[test]
    fn correlation_examples() {
        let nu0 = 2.0;
        let sol = constant(nu0, 5.0);
        let s = PhysicalScales::natural(0.1, nu0);
        let c00 = two_time_correlation(&sol, &s, 0.0, 0.0).unwrap();
        assert!((c00 - 0.25).norm() < 1e-15);
        let (t1, t2) = (1.3, 3.7);
        let c = two_time_correlation(&sol, &s, t1, t2).unwrap();
        let want = 0.25 * Complex64::from_polar(1.0, -nu0 * (t1 - t2));
        assert!((c - want).norm() < 1e-9);
        let back = two_time_correlation(&sol, &s, t2, t1).unwrap();
        assert!((c - back.conj()).norm() < 1e-15);
        assert!(two_time_correlation(&sol, &s, 0.0, 6.0).is_err());
    }

    #[test]
    fn constant_profile_fourier_values() {
        let nu0 = 3.0;
        let t_end = 10.0;
        let sol = constant(nu0, t_end);
        let f = fourier_amplitude(&sol, -nu0).unwrap();
        assert!((f.value - t_end).norm() < 1e-8, "{:?}", f);
        let f = fourier_amplitude(&sol, nu0).unwrap();
        assert!((f.value.norm() - (nu0 * t_end).sin().abs() / nu0).abs() < 1e-8);
        assert!(f.error_estimate <= 1e-6 * f.value.norm().max(t_end * 1e-3));
    }

    #[test]
    fn moments_match_closed_form() {
        let m = moments(1e-6);
        assert!((m[0] - Complex64::new(1.0, -0.5e-6)).norm() < 1e-12);
        for w in [0.1, 0.3, 1.0] {
            let m = moments(w);
            let iw = Complex64::new(0.0, w);
            let m0 = (1.0 - (-iw).exp()) / iw;
            assert!((m[0] - m0).norm() < 1e-14);
            let m1 = (m0 - (-iw).exp()) / iw;
            assert!((m[1] - m1).norm() < 1e-14);
        }
    }

    #[test]
    fn probability_examples() {
        let nu0 = 2.0;
        let t_end = 4.0;
        let sol = constant(nu0, t_end);
        let d = LaserDrive::with_eta(0.01, 0.1, -nu0);
        let p = excitation_probability(&sol, &d).unwrap();
        assert!((p - (0.001f64 * t_end).powi(2)).abs() < 1e-12);
        let zero = LaserDrive::with_eta(0.0, 0.1, -nu0);
        assert_eq!(excitation_probability(&sol, &zero).unwrap(), 0.0);
        let strong = LaserDrive::with_eta(10.0, 0.1, -nu0);
        assert!(
            excitation_probability_with(&sol, &strong, &FourierOptions::default())
                .unwrap()
                .perturbative_warning
        );
    }

    #[test]
    fn sweep_ordering_and_single_entry() {
        let profile = ChirpProfile::Exponential { nu0: 50.0, kappa: 1.0 };
        let w = SimulationWindow::new(6.0);
        let drive = LaserDrive::with_eta(0.01, 0.05, 0.0);
        let deltas = [-7.0, 3.0, -2.0, 5.5];
        let opts = SweepOptions::default();
        let a = spectrum_sweep(&profile, &drive, &deltas, &w, &opts).unwrap();
        let rev: Vec<f64> = deltas.iter().rev().copied().collect();
        let b = spectrum_sweep(
            &profile,
            &drive,
            &rev,
            &w,
            &SweepOptions {
                threads: Some(2),
                ..opts
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.entries.windows(2).all(|p| p[0].delta <= p[1].delta));
        let sol = solve_modes(&profile, &w).unwrap();
        let single = excitation_probability(&sol, &drive.at_detuning(3.0)).unwrap();
        let one = spectrum_sweep(&profile, &drive, &[3.0], &w, &opts).unwrap();
        assert_eq!(one.entries[0].p1, single);
        assert!(spectrum_sweep(&profile, &drive, &[], &w, &opts).is_err());
        assert!(a.entries.iter().all(|e| e.small_detuning == (e.delta.abs() < 5.0)));
    }

    #[test]
    fn rotation_leaves_spectrum_unchanged() {
        let sol = solve_modes(
            &ChirpProfile::Exponential { nu0: 40.0, kappa: 1.0 },
            &SimulationWindow::new(5.0),
        )
        .unwrap();
        for phi in [0.3, PI / 4.0, 2.0] {
            let rot = rotate_modes(&sol, phi);
            for d in [-8.0, -3.0, 2.0] {
                let a = fourier_amplitude(&sol, d).unwrap().value.norm();
                let b = fourier_amplitude(&rot, d).unwrap().value.norm();
                assert!(((a - b) / a).abs() < 1e-10, "phi = {phi}, delta = {d}");
            }
        }
    }

    #[test]
    fn panel_halving_is_within_estimate() {
        let sol = solve_modes(
            &ChirpProfile::Exponential { nu0: 60.0, kappa: 1.0 },
            &SimulationWindow::new(6.0),
        )
        .unwrap();
        for d in [-10.0, -3.0, 4.0] {
            let a = fourier_amplitude(&sol, d).unwrap();
            let half = FourierOptions {
                panel_fraction: 1.0 / 40.0,
                ..Default::default()
            };
            let b = fourier_amplitude_with(&sol, d, &half).unwrap();
            assert!(
                (a.value.norm() - b.value.norm()).abs() <= a.error_estimate,
                "delta = {d}"
            );
        }
    }
}
