//! Closed forms for the exponential chirp ν(t) = ν₀e^{−κt}.
//!
//! With a = ν₀/κ and z = ν(t)/κ the mode functions are Bessel combinations,
//! and in the adiabatic-start, late-time limit the excitation probability
//! reduces to a squared Planck factor in Δ/κ.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{ChirpProfile, ModeState, SimulationWindow};
use crate::quad::GaussLegendre;
use crate::specfun::dd::DD;
use crate::specfun::gamma::{gamma, ln_gamma};
use crate::specfun::{self, bessel_set, hankel1_0, EULER_GAMMA};

/// Below this ν₀/κ the Hankel form of f is not trusted.
pub const ASYMPTOTIC_MIN_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpChirpParams {
    pub nu0: f64,
    pub kappa: f64,
    pub t_end: f64,
}

impl ExpChirpParams {
    pub fn new(nu0: f64, kappa: f64, t_end: f64) -> Result<Self> {
        let p = ExpChirpParams { nu0, kappa, t_end };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu0", self.nu0), ("kappa", self.kappa), ("t_end", self.t_end)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// ν₀/κ
    pub fn ratio(&self) -> f64 {
        self.nu0 / self.kappa
    }

    pub fn nu(&self, t: f64) -> f64 {
        self.nu0 * (-self.kappa * t).exp()
    }

    pub fn profile(&self) -> ChirpProfile {
        ChirpProfile::Exponential {
            nu0: self.nu0,
            kappa: self.kappa,
        }
    }

    pub fn window(&self) -> SimulationWindow {
        SimulationWindow::new(self.t_end)
    }
}

/// Exact h, ḣ, g, ġ at time t from the Bessel combinations
///
/// h = (πa/2)[J₁(a)Y₀(z) − Y₁(a)J₀(z)],  g = (π/2κ)[Y₀(a)J₀(z) − J₀(a)Y₀(z)],
///
/// using d/dt Z₀(z) = κz Z₁(z).
pub fn exp_modes_exact(p: &ExpChirpParams, t: f64) -> Result<ModeState> {
    p.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let a = p.ratio();
    let z = p.nu(t) / p.kappa;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("nu(t)/kappa underflows to {z} at t = {t}")));
    }
    let ba = bessel_set(a)?;
    let bz = bessel_set(z)?;
    let pa = 0.5 * PI * a;
    let h = pa * (ba.j1 * bz.y0 - ba.y1 * bz.j0);
    let hdot = pa * p.kappa * z * (ba.j1 * bz.y1 - ba.y1 * bz.j1);
    let g = 0.5 * PI / p.kappa * (ba.y0 * bz.j0 - ba.j0 * bz.y0);
    let gdot = 0.5 * PI * z * (ba.y0 * bz.j1 - ba.j0 * bz.y1);
    Ok(ModeState {
        h,
        hdot,
        g,
        gdot,
        nu0: p.nu0,
    })
}

/// f(t) ≈ −i √(πν₀/2κ) H₀⁽¹⁾(ν(t)/κ), equal to h − iν₀g up to a constant
/// phase-space rotation and O(κ/ν₀) corrections.
pub fn exp_f_asymptotic(p: &ExpChirpParams, t: f64) -> Result<Complex64> {
    p.validate()?;
    if p.ratio() < ASYMPTOTIC_MIN_RATIO {
        return Err(Error::Regime(format!(
            "nu0/kappa = {} is below {ASYMPTOTIC_MIN_RATIO}",
            p.ratio()
        )));
    }
    let z = p.nu(t) / p.kappa;
    let hk = hankel1_0(z)?;
    Ok(Complex64::new(0.0, -(0.5 * PI * p.ratio()).sqrt()) * hk)
}

fn require_nonzero(delta: f64) -> Result<()> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "detuning must be finite and non-zero, got {delta}"
        )));
    }
    Ok(())
}

/// (e^x − 1)^{−2} without overflow.
fn planck_sq(x: f64) -> f64 {
    if x > 0.0 {
        (-2.0 * x).exp() / (-x).exp_m1().powi(2)
    } else {
        x.exp_m1().powi(-2)
    }
}

/// (e^x − 1)^{−1} without overflow.
fn planck(x: f64) -> f64 {
    if x > 0.0 {
        -(-x).exp() / (-x).exp_m1()
    } else {
        1.0 / x.exp_m1()
    }
}

/// (Ω₀η₀)² · 2πν₀/(κΔ²) · (e^{πΔ/κ} − 1)^{−2}
pub fn closed_form_probability(p: &ExpChirpParams, omega_eta: f64, delta: f64) -> Result<f64> {
    p.validate()?;
    require_nonzero(delta)?;
    let x = PI * delta / p.kappa;
    Ok(omega_eta.powi(2) * 2.0 * PI * p.nu0 / (p.kappa * delta * delta) * planck_sq(x))
}

/// (Ω₀η₀)² · 2π/(κΔ) · (e^{2πΔ/κ} − 1)^{−1}
pub fn gibbons_hawking_probability(p: &ExpChirpParams, omega_eta: f64, delta: f64) -> Result<f64> {
    p.validate()?;
    require_nonzero(delta)?;
    let y = 2.0 * PI * delta / p.kappa;
    Ok(omega_eta.powi(2) * 2.0 * PI / (p.kappa * delta) * planck(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhRatio {
    /// closed_form / gibbons_hawking = (ν₀/|Δ|)(1 + y)/(1 − y), y = e^{−π|Δ|/κ}
    pub exact: f64,
    /// (ν₀/|Δ|)(1 + 2y)
    pub approx: f64,
    /// |exact − approx| / exact, evaluated in double-double arithmetic
    pub rel_deviation: f64,
}

pub fn gh_ratio(p: &ExpChirpParams, delta: f64) -> Result<GhRatio> {
    p.validate()?;
    let r = delta.abs() / p.kappa;
    if !(r >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "gh_ratio needs |delta|/kappa >= 1, got {r}"
        )));
    }
    let y = (-(DD::PI.mul_f64(r))).exp();
    let pref = p.nu0 / delta.abs();
    let exact = (DD::ONE + y) / (DD::ONE - y);
    let approx = DD::ONE + y.mul_f64(2.0);
    let dev = ((exact - approx) / exact).abs();
    Ok(GhRatio {
        exact: pref * exact.to_f64(),
        approx: pref * approx.to_f64(),
        rel_deviation: dev.to_f64(),
    })
}

/// e^{−2πΔ/κ}
pub fn sideband_ratio(delta: f64, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidInput(format!("kappa must be positive, got {kappa}")));
    }
    Ok((-2.0 * PI * delta / kappa).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticThresholds {
    pub start_min: f64,
    pub end_max: f64,
}

impl Default for AdiabaticThresholds {
    fn default() -> Self {
        AdiabaticThresholds {
            start_min: 50.0,
            end_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub ratio_start: f64,
    pub ratio_end: f64,
    pub pass: bool,
}

/// Slow start (ν₀/κ ≫ 1) and long chirp (ν(T)/κ ≪ 1).
pub fn adiabatic_conditions(p: &ExpChirpParams, th: &AdiabaticThresholds) -> AdiabaticReport {
    let ratio_start = p.ratio();
    let ratio_end = p.nu(p.t_end) / p.kappa;
    AdiabaticReport {
        ratio_start,
        ratio_end,
        pass: ratio_start >= th.start_min && ratio_end <= th.end_max,
    }
}

/// −2^{ix} Γ(ix/2) / ((e^{πx} − 1) Γ(1 − ix/2)), the Mellin transform of
/// H₀⁽¹⁾ on the imaginary axis.
pub fn mellin_formula(x: f64) -> Result<Complex64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let half = Complex64::new(0.0, 0.5 * x);
    let ratio = (ln_gamma(half)? - ln_gamma(1.0 - half)?).exp();
    let two_ix = Complex64::from_polar(1.0, x * std::f64::consts::LN_2);
    Ok(-two_ix * ratio * planck(PI * x))
}

/// ∫₀^∞ u^{s−1} H₀⁽¹⁾(u) du = 2^{s−1} Γ(s/2)/Γ(1 − s/2) · (1 − i cot(πs/2))
/// for 0 < Re s < 1/2.
pub fn mellin_hankel_transform(s: Complex64) -> Result<Complex64> {
    let g = gamma(s / 2.0)? / gamma(1.0 - s / 2.0)?;
    let cot = (PI * s / 2.0).cos() / (PI * s / 2.0).sin();
    Ok(Complex64::new(2.0, 0.0).powc(s - 1.0) * g * (1.0 - Complex64::i() * cot))
}

/// |Γ(ix/2) / Γ(1 − ix/2)|², which equals 4/x².
pub fn gamma_ratio_modulus_sq(x: f64) -> Result<f64> {
    let half = Complex64::new(0.0, 0.5 * x);
    Ok((2.0 * (ln_gamma(half)? - ln_gamma(1.0 - half)?).re).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinCheck {
    pub numeric: Complex64,
    pub formula: Complex64,
    pub gap: f64,
    /// Estimated absolute quadrature error of `numeric`.
    pub error_estimate: f64,
}

const MELLIN_SPLIT: f64 = 200.0;
const MELLIN_RAY: f64 = 60.0;

/// ∫₀¹ u^{s−1} H₀⁽¹⁾(u) du, termwise from the ascending series.
fn mellin_head(s: Complex64) -> Complex64 {
    let mut c = 1.0; // (−1)^k / (4^k (k!)²)
    let mut harmonic = 0.0;
    let (mut j, mut y_log, mut y_h) = (Complex64::default(), Complex64::default(), Complex64::default());
    for k in 0..40 {
        if k > 0 {
            let kf = k as f64;
            c *= -0.25 / (kf * kf);
            harmonic += 1.0 / kf;
        }
        let d = s + 2.0 * k as f64;
        j += c / d;
        y_log -= c / (d * d);
        y_h += harmonic * c / d;
    }
    let y = (2.0 / PI) * ((EULER_GAMMA - std::f64::consts::LN_2) * j + y_log - y_h);
    j + Complex64::i() * y
}

fn mellin_body(s: Complex64, rule: &GaussLegendre) -> Result<Complex64> {
    let mut acc = Complex64::default();
    let panels = (MELLIN_SPLIT - 1.0) as usize;
    for k in 0..panels {
        let (a, b) = (1.0 + k as f64, 2.0 + k as f64);
        let mut err = None;
        let part = rule.integrate(a, b, |u| match hankel1_0(u) {
            Ok(h) => Complex64::new(u, 0.0).powc(s - 1.0) * h,
            Err(e) => {
                err = Some(e);
                Complex64::default()
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        acc += part;
    }
    Ok(acc)
}

/// ∫ along u = U + iy, y ∈ [0, ∞), where the integrand decays like e^{−y}.
fn mellin_tail(s: Complex64, rule: &GaussLegendre) -> Complex64 {
    let mut acc = Complex64::default();
    let panels = MELLIN_RAY as usize;
    for k in 0..panels {
        let (a, b) = (k as f64, k as f64 + 1.0);
        acc += rule.integrate(a, b, |y| {
            let u = Complex64::new(MELLIN_SPLIT, y);
            u.powc(s - 1.0) * specfun::hankel1_0_asymptotic(u) * Complex64::i()
        });
    }
    acc
}

/// Numerically evaluates ∫₀^∞ u^{ix+ε−1} H₀⁽¹⁾(u) du and compares it with
/// the ε → 0 closed form.
pub fn mellin_hankel_check(x: f64, epsilon: f64) -> Result<MellinCheck> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 0.1], got {epsilon}")));
    }
    let s = Complex64::new(epsilon, x);
    let fine = GaussLegendre::new(24);
    let coarse = GaussLegendre::new(16);
    let head = mellin_head(s);
    let body = mellin_body(s, &fine)?;
    let body_c = mellin_body(s, &coarse)?;
    let tail = mellin_tail(s, &fine);
    let tail_c = mellin_tail(s, &coarse);
    let numeric = head + body + tail;
    let error_estimate = (body - body_c).norm() + (tail - tail_c).norm();
    if error_estimate > 1e-8 * numeric.norm().max(1e-300) {
        return Err(Error::Quadrature {
            estimate: error_estimate,
        });
    }
    let formula = mellin_formula(x)?;
    Ok(MellinCheck {
        numeric,
        formula,
        gap: (numeric - formula).norm(),
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_set;

    fn params(ratio: f64) -> ExpChirpParams {
        ExpChirpParams::new(ratio, 1.0, 12.0).unwrap()
    }

    #[test]
    fn initial_conditions() {
        for ratio in [10.0, 100.0, 1000.0] {
            let s = exp_modes_exact(&params(ratio), 0.0).unwrap();
            assert!((s.h - 1.0).abs() < 1e-10, "{ratio}: h = {}", s.h);
            assert!(s.hdot.abs() < 1e-10 * ratio);
            assert!(s.g.abs() < 1e-10);
            assert!((s.gdot - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn wronskian_at_sampled_times() {
        let p = params(100.0);
        for t in [0.3, 1.0, 4.0, 9.0, 12.0] {
            let w = exp_modes_exact(&p, t).unwrap().wronskian();
            assert!((w - 1.0).abs() < 1e-10, "t = {t}: {w}");
        }
    }

    #[test]
    fn asymptotic_f_at_start() {
        let p = params(1000.0);
        let f0 = exp_f_asymptotic(&p, 0.0).unwrap();
        assert!((f0.norm() - 1.0).abs() < 1e-3);
        assert!(matches!(exp_f_asymptotic(&params(5.0), 0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn asymptotic_modulus_tracks_exact() {
        let p = params(1000.0);
        let mut t = 0.0;
        while p.nu(t) / p.kappa >= 10.0 {
            let exact = exp_modes_exact(&p, t).unwrap().f().norm();
            let asym = exp_f_asymptotic(&p, t).unwrap().norm();
            assert!(((asym - exact) / exact).abs() <= 3.0 / p.ratio(), "t = {t}");
            t += 0.05;
        }
    }

    #[test]
    fn closed_form_worked_values() {
        let p = params(1000.0);
        let v = closed_form_probability(&p, 1.0, -1000.0).unwrap();
        assert!((v - 2.0 * PI * 1e-3).abs() < 1e-15);
        let gh = gibbons_hawking_probability(&p, 1.0, -1000.0).unwrap();
        assert!((gh - 2.0 * PI * 1e-3).abs() < 1e-15);
        assert!(closed_form_probability(&p, 1.0, 0.0).is_err());
        assert!(gibbons_hawking_probability(&p, 1.0, 0.0).is_err());
        // far into the blue tail both are finite and tiny
        let far = closed_form_probability(&p, 1.0, 1e6).unwrap();
        assert!(far == 0.0 || far.is_normal() || far.is_subnormal());
        assert!(closed_form_probability(&p, 1.0, -1e6).unwrap().is_finite());
    }

    #[test]
    fn closed_form_decreases_into_the_blue() {
        let p = params(200.0);
        let mut last = f64::INFINITY;
        for d in [0.5, 1.0, 2.0, 5.0, 10.0, 40.0] {
            let v = closed_form_probability(&p, 1.0, d).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn thermal_ratio_identities() {
        let p = params(200.0);
        for d in [0.3, 1.0, 2.0, 3.0, 7.5] {
            let want = sideband_ratio(d, p.kappa).unwrap();
            let cf = closed_form_probability(&p, 1.0, d).unwrap() / closed_form_probability(&p, 1.0, -d).unwrap();
            assert!(((cf - want) / want).abs() < 1e-12, "closed form at {d}");
            let gh =
                gibbons_hawking_probability(&p, 1.0, d).unwrap() / gibbons_hawking_probability(&p, 1.0, -d).unwrap();
            assert!(((gh - want) / want).abs() < 1e-12, "GH at {d}");
            assert!(gibbons_hawking_probability(&p, 1.0, d).unwrap() > 0.0);
        }
        assert!((sideband_ratio(1.0, 1.0).unwrap() - 1.867_442_731_707_988_8e-3).abs() < 1e-17);
        assert_eq!(sideband_ratio(0.0, 1.0).unwrap(), 1.0);
        assert!((sideband_ratio(-1.0, 1.0).unwrap() - 535.491_655_524_764_7).abs() < 1e-9);
        assert!(sideband_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn gh_ratio_limits() {
        let p = params(1000.0);
        let r = gh_ratio(&p, 1000.0).unwrap();
        assert!((r.approx - 1.0).abs() < 1e-15);
        assert!((gh_ratio(&p, -500.0).unwrap().approx - 2.0).abs() < 1e-15);
        for d in [2.0, 5.0, 10.0] {
            let r = gh_ratio(&p, d).unwrap();
            let y = (-PI * d).exp();
            // exact deviation is 2y²/(1+y)
            let want = 2.0 * y * y / (1.0 + y);
            assert!(((r.rel_deviation - want) / want).abs() < 1e-4, "d = {d}");
            let literal =
                closed_form_probability(&p, 1.0, d).unwrap() / gibbons_hawking_probability(&p, 1.0, d).unwrap();
            assert!(((literal - r.exact) / r.exact).abs() < 1e-13);
        }
        assert!(gh_ratio(&p, 0.5).is_err());
    }

    #[test]
    fn adiabatic_examples() {
        let th = AdiabaticThresholds::default();
        let r = adiabatic_conditions(&ExpChirpParams::new(1000.0, 1.0, 10.0).unwrap(), &th);
        assert!((r.ratio_end - 1000.0 * (-10f64).exp()).abs() < 1e-12);
        assert!(r.pass);
        // 1 MHz and 1 kHz as cyclic frequencies, 5 ms
        let tau = 2.0 * PI;
        let r = adiabatic_conditions(&ExpChirpParams::new(tau * 1e6, tau * 1e3, 5e-3).unwrap(), &th);
        assert!(r.pass && (r.ratio_start - 1000.0).abs() < 1e-9);
        // the same numbers read as angular rates give κT = 5, too short
        let r = adiabatic_conditions(&ExpChirpParams::new(1e6, 1e3, 5e-3).unwrap(), &th);
        assert!(!r.pass && (r.ratio_end - 1000.0 * (-5f64).exp()).abs() < 1e-9);
        for t in [1.0, 10.0, 100.0] {
            assert!(!adiabatic_conditions(&ExpChirpParams::new(5.0, 1.0, t).unwrap(), &th).pass);
        }
    }

    #[test]
    fn gamma_modulus_identity() {
        for x in [0.5, 1.0, 2.0, 5.0] {
            let m = gamma_ratio_modulus_sq(x).unwrap();
            assert!((m - 4.0 / (x * x)).abs() < 1e-10 * 4.0 / (x * x), "x = {x}");
        }
    }

    #[test]
    fn mellin_formula_modulus_and_value() {
        let f = mellin_formula(1.0).unwrap();
        assert!((f.norm() - 2.0 / (PI.exp() - 1.0)).abs() < 1e-12);
        // independent evaluation with mpmath at 30 digits
        assert!((f - Complex64::new(-0.018_391_213_46, 0.088_439_397_51)).norm() < 1e-10);
        let general = mellin_hankel_transform(Complex64::new(0.0, 1.0)).unwrap();
        assert!((general - f).norm() < 1e-12);
    }

    #[test]
    fn mellin_head_matches_direct_quadrature() {
        // away from the u = 0 singularity, compare the series piece on [δ, 1]
        // against the same series integrated over [0, δ] plus quadrature
        let s = Complex64::new(0.6, 1.0);
        let delta: f64 = 0.25;
        let rule = GaussLegendre::new(30);
        let direct: Complex64 = rule.integrate(delta, 1.0, |u| {
            let b = bessel_set(u).unwrap();
            Complex64::new(u, 0.0).powc(s - 1.0) * Complex64::new(b.j0, b.y0)
        });
        // ∫₀^δ u^{s−1}H(u)du = δ^s ∫₀¹ v^{s−1} H(δv) dv, so scale the series
        let small = {
            let mut c = 1.0;
            let mut harmonic = 0.0;
            let mut acc = Complex64::default();
            let ln_half_d = (delta / 2.0).ln() + EULER_GAMMA;
            for k in 0..40 {
                if k > 0 {
                    let kf = k as f64;
                    c *= -0.25 / (kf * kf);
                    harmonic += 1.0 / kf;
                }
                let d = s + 2.0 * k as f64;
                let dk = delta.powi(2 * k);
                let j = c * dk / d;
                let y = (2.0 / PI) * (ln_half_d * j - c * dk / (d * d) - harmonic * c * dk / d);
                acc += j + Complex64::i() * y;
            }
            acc * Complex64::new(delta, 0.0).powc(s)
        };
        let head = mellin_head(s);
        assert!((head - (small + direct)).norm() < 1e-12, "{head} vs {}", small + direct);
    }

    #[test]
    fn mellin_numeric_matches_transform_off_axis() {
        // for Re s > 0 the integral converges and equals the general transform
        let s = Complex64::new(0.3, 1.0);
        let rule = GaussLegendre::new(24);
        let num = mellin_head(s) + mellin_body(s, &rule).unwrap() + mellin_tail(s, &rule);
        let want = mellin_hankel_transform(s).unwrap();
        assert!((num - want).norm() < 1e-9 * want.norm(), "{num} vs {want}");
    }

    #[test]
    fn mellin_gap_shrinks_with_epsilon() {
        let a = mellin_hankel_check(1.0, 0.01).unwrap();
        let b = mellin_hankel_check(1.0, 0.05).unwrap();
        assert!(a.gap < b.gap);
        // the gap is first order in ε: M(ix + ε) − M(ix) ≈ ε M′(ix)
        assert!((a.gap / 0.01 - b.gap / 0.05).abs() < 0.05 * a.gap / 0.01);
        assert!((a.numeric.norm() - a.formula.norm()).abs() < 0.01 * a.formula.norm());
        assert!(mellin_hankel_check(1.0, 0.2).is_err());
        assert!(mellin_hankel_check(0.0, 0.01).is_err());
    }
}
