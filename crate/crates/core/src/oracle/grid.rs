//! Position-grid split-operator propagation of the two-level ion.
//!
//! Strang splitting: half potential step, full kinetic step in momentum
//! space, half potential step. The potential step is an exact 2×2
//! exponential at every grid point, so the laser coupling never needs to be
//! linearized for the full-exponential run.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Coupling, OracleConfig, OracleResult, RunMonitor};
use crate::error::{Error, Result};
use crate::spectrum::PhysicalScales;

/// Fraction of the grid half-width (and of the momentum cutoff) beyond which
/// probability counts as leakage.
const EDGE: f64 = 0.9;
/// Steps between leakage checks.
const CHECK_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl GridSpec {
    /// Size the grid from the adiabatic position width at the lowest ν and
    /// the momentum width at the highest ν.
    pub fn auto(cfg: &OracleConfig, scales: &PhysicalScales) -> GridSpec {
        let (hbar, mass) = (scales.hbar, scales.mass);
        let t_end = cfg.window.t_end;
        let nu_min = cfg.profile.min_nu_on(0.0, t_end);
        let nu_max = cfg.profile.max_nu_on(0.0, t_end);
        let sigma_q = (hbar / (2.0 * mass * nu_min)).sqrt();
        let sigma_p = (hbar * mass * nu_max / 2.0).sqrt();
        let half_width = 10.0 * sigma_q;
        let p_max = 12.0 * sigma_p + 4.0 * hbar * scales.projected_wave_number().abs();
        let dx = PI * hbar / p_max;
        let points = ((2.0 * half_width / dx).ceil() as usize).next_power_of_two().max(256);
        GridSpec { points, half_width }
    }
}

struct Grid {
    x: Vec<f64>,
    dx: f64,
    p: Vec<f64>,
    p_max: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Grid {
    fn new(spec: GridSpec, hbar: f64) -> Grid {
        let n = spec.points;
        let dx = 2.0 * spec.half_width / n as f64;
        let x = (0..n).map(|j| -spec.half_width + j as f64 * dx).collect();
        let dk = 2.0 * PI / (n as f64 * dx);
        let p = (0..n)
            .map(|k| {
                let ks = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                hbar * dk * ks
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        Grid {
            x,
            dx,
            p,
            p_max: hbar * dk * (n / 2) as f64,
            fwd,
            inv,
            scratch,
        }
    }

    fn norm_sqr(&self, psi: &[Complex64]) -> f64 {
        psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }

    fn edge_mass(&self, psi: &[Complex64], half_width: f64) -> f64 {
        psi.iter()
            .zip(&self.x)
            .filter(|(_, x)| x.abs() > EDGE * half_width)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            * self.dx
    }

    /// Probability at |p| > EDGE·p_max; normalized like the position norm.
    fn momentum_edge_mass(&mut self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.fwd.process_with_scratch(&mut buf, &mut self.scratch);
        let n = buf.len() as f64;
        buf.iter()
            .zip(&self.p)
            .filter(|(_, p)| p.abs() > EDGE * self.p_max)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            * self.dx
            / n
    }
}

pub(super) fn evolve(cfg: &OracleConfig, spec: GridSpec, scales: &PhysicalScales) -> Result<OracleResult> {
    if spec.points < 16 || !spec.points.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "grid size must be a power of two of at least 16, got {}",
            spec.points
        )));
    }
    if !(spec.half_width.is_finite() && spec.half_width > 0.0) {
        return Err(Error::InvalidInput(format!(
            "grid half-width must be positive, got {}",
            spec.half_width
        )));
    }
    let (hbar, mass) = (scales.hbar, scales.mass);
    let nu0 = cfg.profile.nu0();
    let delta = cfg.drive.detuning;
    let rabi = cfg.drive.rabi;
    let kc = scales.projected_wave_number();
    let mut grid = Grid::new(spec, hbar);
    let n = spec.points;

    // ground state of the ν₀ oscillator
    let alpha = mass * nu0 / hbar;
    let mut g: Vec<Complex64> = grid
        .x
        .iter()
        .map(|x| Complex64::new((-0.5 * alpha * x * x).exp(), 0.0))
        .collect();
    let norm = grid.norm_sqr(&g).sqrt();
    g.iter_mut().for_each(|v| *v /= norm);
    let mut e = vec![Complex64::default(); n];

    // ⟨e|V|g⟩/ħ per grid point
    let w: Vec<Complex64> = grid
        .x
        .iter()
        .map(|&x| match cfg.coupling {
            Coupling::Linear => Complex64::new(rabi * kc * x, 0.0),
            Coupling::FullExponential => Complex64::new(0.0, -rabi) * (Complex64::from_polar(1.0, kc * x) - 1.0),
        })
        .collect();
    let r: Vec<f64> = w.iter().map(|w| (0.25 * delta * delta + w.norm_sqr()).sqrt()).collect();
    let inv_n = 1.0 / n as f64;

    let half_potential = |g: &mut [Complex64], e: &mut [Complex64], x: &[f64], nu: f64, tau: f64| {
        let k = 0.5 * mass * nu * nu / hbar;
        for j in 0..g.len() {
            let phase = Complex64::from_polar(1.0, -tau * (k * x[j] * x[j] + 0.5 * delta));
            let (s, c) = (tau * r[j]).sin_cos();
            let sinc = if r[j] > 0.0 { s / r[j] } else { tau };
            let mi = Complex64::new(0.0, -sinc);
            // exp(−iτB), B = [[−Δ/2, w*], [w, Δ/2]]
            let gg = c + mi * (-0.5 * delta);
            let ee = c + mi * (0.5 * delta);
            let ge = mi * w[j].conj();
            let eg = mi * w[j];
            let (a, b) = (g[j], e[j]);
            g[j] = phase * (gg * a + ge * b);
            e[j] = phase * (eg * a + ee * b);
        }
    };

    let mut monitor = RunMonitor::new(cfg.leakage_limit, n, 2 * n);
    let t_end = cfg.window.t_end;
    let mut t = 0.0;
    let mut steps = 0usize;
    while t < t_end {
        let dt = cfg.step_size(t).min(t_end - t);
        let nu_mid = cfg.profile.nu(t + 0.5 * dt);
        half_potential(&mut g, &mut e, &grid.x, nu_mid, 0.5 * dt);
        for psi in [&mut g, &mut e] {
            grid.fwd.process_with_scratch(psi, &mut grid.scratch);
            for (v, p) in psi.iter_mut().zip(&grid.p) {
                *v *= Complex64::from_polar(inv_n, -dt * p * p / (2.0 * mass * hbar));
            }
            grid.inv.process_with_scratch(psi, &mut grid.scratch);
        }
        half_potential(&mut g, &mut e, &grid.x, nu_mid, 0.5 * dt);
        t += dt;
        steps += 1;
        if steps.is_multiple_of(CHECK_EVERY) || t >= t_end {
            let leak = grid.edge_mass(&g, spec.half_width)
                + grid.edge_mass(&e, spec.half_width)
                + grid.momentum_edge_mass(&g)
                + grid.momentum_edge_mass(&e);
            monitor.observe(grid.norm_sqr(&g) + grid.norm_sqr(&e), leak)?;
        }
    }
    Ok(OracleResult {
        excited_population: grid.norm_sqr(&e),
        leakage: monitor.max_leakage,
        norm_drift: monitor.max_norm_drift,
        steps,
        backend: format!("grid(points={n},half_width={:e})", spec.half_width),
    })
}
