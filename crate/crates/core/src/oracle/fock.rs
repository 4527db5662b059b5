//! Truncated number-basis operators and a commutator-free Magnus propagator.
//!
//! Composite index ordering: `atom * N + n`, atom 0 = |g⟩, atom 1 = |e⟩.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Coupling, OracleConfig, OracleResult, RunMonitor};
use crate::error::{Error, Result};
use crate::spectrum::PhysicalScales;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct FockSystem {
    pub truncation: usize,
    pub scales: PhysicalScales,
    pub nu0: f64,
    /// q = √(ħ/2Mν₀)(a + a†)
    pub position: CMat,
    /// p = i√(ħMν₀/2)(a† − a)
    pub momentum: CMat,
    /// σ₊ = |e⟩⟨g|
    pub raise: CMat,
    /// σ₋ = |g⟩⟨e|
    pub lower: CMat,
}

pub fn build_fock_system(n: usize, scales: &PhysicalScales, nu0: f64) -> Result<FockSystem> {
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "Fock truncation must be at least 4, got {n}"
        )));
    }
    scales.validate()?;
    if !(nu0.is_finite() && nu0 > 0.0) {
        return Err(Error::InvalidInput(format!("nu0 must be positive, got {nu0}")));
    }
    let mut a = CMat::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let s = (scales.hbar / (2.0 * scales.mass * nu0)).sqrt();
    let position = (&a + &ad) * Complex64::new(s, 0.0);
    let momentum = (&ad - &a) * Complex64::new(0.0, scales.mass * nu0 * s);
    let mut raise = CMat::zeros(2, 2);
    raise[(1, 0)] = ONE;
    let lower = raise.adjoint();
    Ok(FockSystem {
        truncation: n,
        scales: *scales,
        nu0,
        position,
        momentum,
        raise,
        lower,
    })
}

impl FockSystem {
    /// max |([q, p] − iħ)_{jk}| over levels below the top two.
    pub fn commutator_deviation(&self) -> f64 {
        let c = &self.position * &self.momentum - &self.momentum * &self.position;
        let m = self.truncation - 2;
        let mut worst: f64 = 0.0;
        for j in 0..m {
            for k in 0..m {
                let want = if j == k {
                    Complex64::new(0.0, self.scales.hbar)
                } else {
                    ZERO
                };
                worst = worst.max((c[(j, k)] - want).norm());
            }
        }
        worst
    }

    /// A ⊗ B on the composite space.
    pub fn kron(atom: &CMat, osc: &CMat) -> CMat {
        atom.kronecker(osc)
    }

    pub fn dim(&self) -> usize {
        2 * self.truncation
    }

    pub fn ground_state(&self) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[0] = ONE;
        v
    }

    /// Occupation of the top two oscillator levels, both atomic states.
    pub fn leakage(&self, psi: &CVec) -> f64 {
        let n = self.truncation;
        [n - 2, n - 1, 2 * n - 2, 2 * n - 1]
            .iter()
            .map(|&i| psi[i].norm_sqr())
            .sum()
    }

    pub fn excited_population(&self, psi: &CVec) -> f64 {
        let n = self.truncation;
        (n..2 * n).map(|i| psi[i].norm_sqr()).sum()
    }

    /// Static Hamiltonian pieces: H(t) = h_static + ν(t)² · h_trap.
    fn hamiltonian_parts(&self, rabi: f64, delta: f64, coupling: Coupling) -> (CMat, CMat) {
        let hbar = self.scales.hbar;
        let mass = self.scales.mass;
        let id2 = CMat::identity(2, 2);
        let idn = CMat::identity(self.truncation, self.truncation);
        let kinetic = &self.momentum * &self.momentum / Complex64::new(2.0 * mass, 0.0);
        let trap = &self.position * &self.position * Complex64::new(0.5 * mass, 0.0);
        let excited = &self.raise * &self.lower;
        let mut h = Self::kron(&id2, &kinetic) + Self::kron(&excited, &idn) * Complex64::new(hbar * delta, 0.0);
        let kc = self.scales.projected_wave_number();
        match coupling {
            Coupling::Linear => {
                let sx = &self.raise + &self.lower;
                h += Self::kron(&sx, &self.position) * Complex64::new(hbar * rabi * kc, 0.0);
            }
            Coupling::FullExponential => {
                // −iħΩ₀[σ₊(e^{ikq} − 1) − σ₋(e^{−ikq} − 1)]
                let e = (&self.position * Complex64::new(0.0, kc)).exp();
                let plus = Self::kron(&self.raise, &(&e - &idn));
                let minus = Self::kron(&self.lower, &(e.adjoint() - &idn));
                h += (plus - minus) * Complex64::new(0.0, -hbar * rabi);
            }
        }
        (h, Self::kron(&id2, &trap))
    }
}

/// exp(−iτX)ψ by Taylor series, sub-stepped so that ‖τX‖ ≤ 1.
fn expm_apply(x: &CMat, tau: f64, psi: &mut CVec) {
    let norm = x
        .row_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let subs = ((norm * tau.abs()).ceil() as usize).max(1);
    let step = Complex64::new(0.0, -tau / subs as f64);
    for _ in 0..subs {
        let mut term = psi.clone();
        let mut acc = psi.clone();
        for k in 1..60 {
            term = (x * &term) * (step / k as f64);
            acc += &term;
            if term.norm() < 1e-17 * acc.norm() {
                break;
            }
        }
        *psi = acc;
    }
}

pub(super) fn evolve(cfg: &OracleConfig, truncation: usize, scales: &PhysicalScales) -> Result<OracleResult> {
    let nu0 = cfg.profile.nu0();
    let sys = build_fock_system(truncation, scales, nu0)?;
    let hbar = scales.hbar;
    let (h_static, h_trap) = sys.hamiltonian_parts(cfg.drive.rabi, cfg.drive.detuning, cfg.coupling);
    let mut psi = sys.ground_state();
    let t_end = cfg.window.t_end;

    let sq3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - sq3 / 6.0, 0.5 + sq3 / 6.0);
    let (a1, a2) = ((3.0 - 2.0 * sq3) / 12.0, (3.0 + 2.0 * sq3) / 12.0);
    let mut monitor = RunMonitor::new(cfg.leakage_limit, truncation, 2 * truncation);

    let mut t = 0.0;
    let mut steps = 0usize;
    while t < t_end {
        let dt = cfg.step_size(t).min(t_end - t);
        let n1 = cfg.profile.nu(t + c1 * dt).powi(2);
        let n2 = cfg.profile.nu(t + c2 * dt).powi(2);
        // rightmost factor acts first
        let first = &h_static * Complex64::new(a2 + a1, 0.0) + &h_trap * Complex64::new(a2 * n1 + a1 * n2, 0.0);
        let second = &h_static * Complex64::new(a1 + a2, 0.0) + &h_trap * Complex64::new(a1 * n1 + a2 * n2, 0.0);
        expm_apply(&first, dt / hbar, &mut psi);
        expm_apply(&second, dt / hbar, &mut psi);
        t += dt;
        steps += 1;
        monitor.observe(psi.norm_squared(), sys.leakage(&psi))?;
    }
    Ok(OracleResult {
        excited_population: sys.excited_population(&psi),
        leakage: monitor.max_leakage,
        norm_drift: monitor.max_norm_drift,
        steps,
        backend: format!("fock(N={truncation})"),
    })
}
