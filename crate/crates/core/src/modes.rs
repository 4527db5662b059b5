//! Classical mode functions of `q̈ + ν(t)² q = 0`.
//!
//! `h` and `g` are the solutions with `h(0) = ġ(0) = 1`, `ḣ(0) = g(0) = 0`;
//! the complex combination `f = h − iν₀g` carries the ground-state response.
//! Internally the integrator works on `u = [h, ḣ/ν₀, ν₀g, ġ]`, which keeps
//! all four components of order one at the start of the chirp.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Dopri5Options};

/// Minimum number of stored grid points per period of ν(t).
pub const POINTS_PER_PERIOD: f64 = 40.0;
/// Solver steps never exceed this fraction of the shortest period.
pub const MAX_STEP_FRACTION: f64 = 1.0 / 20.0;

/// Trap-frequency trajectory ν(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChirpProfile {
    Constant {
        nu0: f64,
    },
    /// ν(t) = ν₀ e^{−κt}
    Exponential {
        nu0: f64,
        kappa: f64,
    },
    /// ν(t) = ν₀ (1 + depth · sin(mod_freq · t))
    Modulated {
        nu0: f64,
        depth: f64,
        mod_freq: f64,
    },
    /// Piecewise-linear ν(t) through `(time, frequency)` knots.
    Sampled {
        knots: Vec<(f64, f64)>,
    },
}

impl ChirpProfile {
    pub fn nu(&self, t: f64) -> f64 {
        match self {
            ChirpProfile::Constant { nu0 } => *nu0,
            ChirpProfile::Exponential { nu0, kappa } => nu0 * (-kappa * t).exp(),
            ChirpProfile::Modulated { nu0, depth, mod_freq } => nu0 * (1.0 + depth * (mod_freq * t).sin()),
            ChirpProfile::Sampled { knots } => interpolate(knots, t),
        }
    }

    pub fn nu0(&self) -> f64 {
        self.nu(0.0)
    }

    /// The decay rate for exponential profiles.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            ChirpProfile::Exponential { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }

    /// Checks the profile invariants over `[0, t_end]`.
    pub fn validate(&self, t_end: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        match self {
            ChirpProfile::Constant { nu0 } => {
                if !(nu0.is_finite() && *nu0 > 0.0) {
                    return bad(format!("nu0 must be positive, got {nu0}"));
                }
            }
            ChirpProfile::Exponential { nu0, kappa } => {
                if !(nu0.is_finite() && *nu0 > 0.0) {
                    return bad(format!("nu0 must be positive, got {nu0}"));
                }
                if !(kappa.is_finite() && *kappa > 0.0) {
                    return bad(format!("kappa must be positive (decaying chirp), got {kappa}"));
                }
                if self.nu(t_end) <= 0.0 {
                    return bad(format!("nu underflows to zero before t = {t_end}"));
                }
            }
            ChirpProfile::Modulated { nu0, depth, mod_freq } => {
                if !(nu0.is_finite() && *nu0 > 0.0) {
                    return bad(format!("nu0 must be positive, got {nu0}"));
                }
                if !(depth.is_finite() && depth.abs() < 1.0) {
                    return bad(format!("modulation depth must satisfy |depth| < 1, got {depth}"));
                }
                if !mod_freq.is_finite() {
                    return bad(format!("mod_freq must be finite, got {mod_freq}"));
                }
            }
            ChirpProfile::Sampled { knots } => {
                if knots.len() < 2 {
                    return bad("sampled profile needs at least 2 knots".into());
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return bad("knot times must be strictly increasing".into());
                }
                if knots
                    .iter()
                    .any(|k| !(k.1.is_finite() && k.1 > 0.0) || !k.0.is_finite())
                {
                    return bad("knot frequencies must be positive and finite".into());
                }
                let (first, last) = (knots[0].0, knots[knots.len() - 1].0);
                if first > 0.0 || last < t_end {
                    return bad(format!("knots span [{first}, {last}] but the window is [0, {t_end}]"));
                }
            }
        }
        Ok(())
    }

    /// An upper bound on ν over `[a, b]`.
    pub fn max_nu_on(&self, a: f64, b: f64) -> f64 {
        match self {
            ChirpProfile::Constant { nu0 } => *nu0,
            ChirpProfile::Exponential { .. } => self.nu(a).max(self.nu(b)),
            ChirpProfile::Modulated { nu0, depth, .. } => nu0 * (1.0 + depth.abs()),
            ChirpProfile::Sampled { knots } => knots
                .iter()
                .filter(|k| k.0 > a && k.0 < b)
                .map(|k| k.1)
                .fold(self.nu(a).max(self.nu(b)), f64::max),
        }
    }

    /// The minimum of ν over `[a, b]` (exact for every kind).
    pub fn min_nu_on(&self, a: f64, b: f64) -> f64 {
        match self {
            ChirpProfile::Constant { nu0 } => *nu0,
            ChirpProfile::Exponential { .. } => self.nu(a).min(self.nu(b)),
            ChirpProfile::Modulated { nu0, depth, mod_freq } => {
                let ends = self.nu(a).min(self.nu(b));
                if *mod_freq == 0.0 || *depth == 0.0 {
                    return ends;
                }
                // sin(ω t) reaches −sign(depth) at ω t = −sign(depth)·π/2 + 2πn
                let target = if *depth > 0.0 { -PI / 2.0 } else { PI / 2.0 };
                let w = mod_freq.abs();
                let phase_target = if *mod_freq > 0.0 { target } else { -target };
                let n = ((w * a - phase_target) / (2.0 * PI)).ceil();
                let t_min = (phase_target + 2.0 * PI * n) / w;
                if t_min <= b {
                    nu0 * (1.0 - depth.abs())
                } else {
                    ends
                }
            }
            ChirpProfile::Sampled { knots } => knots
                .iter()
                .filter(|k| k.0 > a && k.0 < b)
                .map(|k| k.1)
                .fold(self.nu(a).min(self.nu(b)), f64::min),
        }
    }

    /// Short deterministic description for output metadata.
    pub fn descriptor(&self) -> String {
        match self {
            ChirpProfile::Constant { nu0 } => format!("constant(nu0={nu0:e})"),
            ChirpProfile::Exponential { nu0, kappa } => {
                format!("exponential(nu0={nu0:e},kappa={kappa:e})")
            }
            ChirpProfile::Modulated { nu0, depth, mod_freq } => {
                format!("modulated(nu0={nu0:e},depth={depth:e},mod_freq={mod_freq:e})")
            }
            ChirpProfile::Sampled { knots } => format!("sampled(knots={})", knots.len()),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let i = knots.partition_point(|k| k.0 <= t);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (t0, v0) = knots[i - 1];
    let (t1, v1) = knots[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationWindow {
    /// Upper limit T of the Fourier integral.
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_step() -> f64 {
    f64::INFINITY
}

impl SimulationWindow {
    pub fn new(t_end: f64) -> Self {
        SimulationWindow {
            t_end,
            rel_tol: default_tol(),
            abs_tol: default_tol(),
            max_step: default_max_step(),
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidInput(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-6) {
                return Err(Error::InvalidInput(format!("{name} must lie in (0, 1e-6], got {v}")));
            }
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        Ok(())
    }
}

/// One dense piece of the solution: `u_k(t0 + θ·dt) = Σ_j coeffs[k][j] θ^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub dt: f64,
    pub coeffs: [[f64; 5]; 4],
    /// Local error estimate per scaled component.
    pub err: [f64; 4],
}

impl Segment {
    fn eval(&self, t: f64) -> [f64; 4] {
        let th = (t - self.t0) / self.dt;
        std::array::from_fn(|k| self.coeffs[k].iter().rev().fold(0.0, |acc, &c| acc * th + c))
    }
}

/// Mode functions and derivatives at a single time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub h: f64,
    pub hdot: f64,
    pub g: f64,
    pub gdot: f64,
    pub nu0: f64,
}

impl ModeState {
    pub fn f(&self) -> Complex64 {
        Complex64::new(self.h, -self.nu0 * self.g)
    }

    pub fn fdot(&self) -> Complex64 {
        Complex64::new(self.hdot, -self.nu0 * self.gdot)
    }

    pub fn wronskian(&self) -> f64 {
        self.h * self.gdot - self.hdot * self.g
    }
}

/// Rotate scaled components by φ: (h, ν₀g) → (c h + s ν₀g, −s h + c ν₀g).
fn rotate_scaled(u: [f64; 4], phi: f64) -> [f64; 4] {
    if phi == 0.0 {
        return u;
    }
    let (s, c) = phi.sin_cos();
    [
        c * u[0] + s * u[2],
        c * u[1] + s * u[3],
        -s * u[0] + c * u[2],
        -s * u[1] + c * u[3],
    ]
}

fn state_from_scaled(u: [f64; 4], nu0: f64) -> ModeState {
    ModeState {
        h: u[0],
        hdot: nu0 * u[1],
        g: u[2] / nu0,
        gdot: u[3],
        nu0,
    }
}

#[derive(Debug, Clone)]
pub struct ModeSolution {
    profile: ChirpProfile,
    window: SimulationWindow,
    nu0: f64,
    rotation: f64,
    times: Vec<f64>,
    h: Vec<f64>,
    hdot: Vec<f64>,
    g: Vec<f64>,
    gdot: Vec<f64>,
    f: Vec<Complex64>,
    fdot: Vec<Complex64>,
    segments: Arc<Vec<Segment>>,
}

impl ModeSolution {
    fn from_segments(profile: ChirpProfile, window: SimulationWindow, segments: Vec<Segment>, grid: Vec<f64>) -> Self {
        let nu0 = profile.nu0();
        let mut sol = ModeSolution {
            profile,
            window,
            nu0,
            rotation: 0.0,
            times: Vec::new(),
            h: Vec::new(),
            hdot: Vec::new(),
            g: Vec::new(),
            gdot: Vec::new(),
            f: Vec::new(),
            fdot: Vec::new(),
            segments: Arc::new(segments),
        };
        sol.fill_grid(grid);
        sol
    }

    fn fill_grid(&mut self, grid: Vec<f64>) {
        let n = grid.len();
        let mut h = Vec::with_capacity(n);
        let mut hdot = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut gdot = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        let mut fdot = Vec::with_capacity(n);
        for &t in &grid {
            let s = self.eval_unchecked(t);
            h.push(s.h);
            hdot.push(s.hdot);
            g.push(s.g);
            gdot.push(s.gdot);
            f.push(s.f());
            fdot.push(s.fdot());
        }
        self.times = grid;
        self.h = h;
        self.hdot = hdot;
        self.g = g;
        self.gdot = gdot;
        self.f = f;
        self.fdot = fdot;
    }

    /// Build a solution from sampled values; the dense evaluator is a cubic
    /// Hermite interpolant that uses `ḧ = −ν²h` for the derivative components.
    pub fn from_samples(
        profile: ChirpProfile,
        window: SimulationWindow,
        times: Vec<f64>,
        h: Vec<f64>,
        hdot: Vec<f64>,
        g: Vec<f64>,
        gdot: Vec<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 || [h.len(), hdot.len(), g.len(), gdot.len()].iter().any(|&l| l != n) {
            return Err(Error::InvalidInput(
                "sample arrays must share a length of at least 2".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
        }
        let nu0 = profile.nu0();
        let scaled = |i: usize| [h[i], hdot[i] / nu0, nu0 * g[i], gdot[i]];
        let derivs = |i: usize| {
            let nu2 = profile.nu(times[i]).powi(2);
            [hdot[i], -nu2 * h[i] / nu0, nu0 * gdot[i], -nu2 * g[i]]
        };
        let segments = (0..n - 1)
            .map(|i| {
                let dt = times[i + 1] - times[i];
                let (p0, p1) = (scaled(i), scaled(i + 1));
                let (d0, d1) = (derivs(i), derivs(i + 1));
                let coeffs = std::array::from_fn(|k| {
                    let (m0, m1) = (dt * d0[k], dt * d1[k]);
                    [
                        p0[k],
                        m0,
                        3.0 * (p1[k] - p0[k]) - 2.0 * m0 - m1,
                        2.0 * (p0[k] - p1[k]) + m0 + m1,
                        0.0,
                    ]
                });
                Segment {
                    t0: times[i],
                    dt,
                    coeffs,
                    err: [0.0; 4],
                }
            })
            .collect();
        let f = (0..n).map(|i| Complex64::new(h[i], -nu0 * g[i])).collect();
        let fdot = (0..n).map(|i| Complex64::new(hdot[i], -nu0 * gdot[i])).collect();
        Ok(ModeSolution {
            profile,
            window,
            nu0,
            rotation: 0.0,
            times,
            h,
            hdot,
            g,
            gdot,
            f,
            fdot,
            segments: Arc::new(segments),
        })
    }

    pub fn profile(&self) -> &ChirpProfile {
        &self.profile
    }

    pub fn window(&self) -> &SimulationWindow {
        &self.window
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// Accumulated phase-space rotation applied by [`rotate_modes`].
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn t_start(&self) -> f64 {
        self.segments.first().map(|s| s.t0).unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map(|s| s.t0 + s.dt).unwrap_or(0.0)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn hdot(&self) -> &[f64] {
        &self.hdot
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn gdot(&self) -> &[f64] {
        &self.gdot
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn fdot(&self) -> &[Complex64] {
        &self.fdot
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Scaled components `[h, ḣ/ν₀, ν₀g, ġ]` of a segment's polynomial,
    /// with this solution's rotation applied to the coefficients.
    pub fn rotated_coefficients(&self, seg: &Segment) -> [[f64; 5]; 4] {
        if self.rotation == 0.0 {
            return seg.coeffs;
        }
        let mut out = [[0.0; 5]; 4];
        for j in 0..5 {
            let r = rotate_scaled(
                [seg.coeffs[0][j], seg.coeffs[1][j], seg.coeffs[2][j], seg.coeffs[3][j]],
                self.rotation,
            );
            for (row, v) in out.iter_mut().zip(r) {
                row[j] = v;
            }
        }
        out
    }

    fn eval_unchecked(&self, t: f64) -> ModeState {
        let segs = &self.segments;
        let i = segs.partition_point(|s| s.t0 <= t).saturating_sub(1);
        let u = rotate_scaled(segs[i].eval(t), self.rotation);
        state_from_scaled(u, self.nu0)
    }

    /// Dense evaluation anywhere inside the window.
    pub fn eval(&self, t: f64) -> Result<ModeState> {
        let (start, end) = (self.t_start(), self.t_end());
        let slack = 1e-12 * (end - start).abs().max(1.0);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        Ok(self.eval_unchecked(t.clamp(start, end)))
    }
}

fn scaled_rhs(profile: &ChirpProfile, nu0: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |t, u| {
        let w2 = profile.nu(t).powi(2) / nu0;
        [nu0 * u[1], -w2 * u[0], nu0 * u[3], -w2 * u[2]]
    }
}

/// Integrate the mode functions over `[0, window.t_end]`.
pub fn solve_modes(profile: &ChirpProfile, window: &SimulationWindow) -> Result<ModeSolution> {
    window.validate()?;
    profile.validate(window.t_end)?;
    let t_end = window.t_end;
    let nu0 = profile.nu0();
    let nu_max = profile.max_nu_on(0.0, t_end);
    let opts = Dopri5Options {
        rel_tol: window.rel_tol,
        abs_tol: window.abs_tol,
        max_step: window.max_step.min(MAX_STEP_FRACTION * 2.0 * PI / nu_max),
        ..Default::default()
    };
    let steps = ode::integrate(scaled_rhs(profile, nu0), 0.0, [1.0, 0.0, 0.0, 1.0], t_end, &opts)?;

    let mut grid = Vec::with_capacity(steps.len() * 2 + 1);
    let segments: Vec<Segment> = steps
        .iter()
        .map(|s| {
            let local_max = profile.max_nu_on(s.t0, s.t1());
            let n_sub = ((POINTS_PER_PERIOD * s.h * local_max / (2.0 * PI)).ceil() as usize).max(1);
            for j in 0..n_sub {
                grid.push(s.t0 + s.h * j as f64 / n_sub as f64);
            }
            Segment {
                t0: s.t0,
                dt: s.h,
                coeffs: s.power_coefficients(),
                err: s.err,
            }
        })
        .collect();
    grid.push(t_end);
    Ok(ModeSolution::from_segments(profile.clone(), *window, segments, grid))
}

/// max over the stored grid of |h ġ − ḣ g − 1|.
pub fn wronskian_deviation(sol: &ModeSolution) -> f64 {
    (0..sol.times.len())
        .map(|i| (sol.h[i] * sol.gdot[i] - sol.hdot[i] * sol.g[i] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Apply the phase-space rotation (h′, ν₀g′) = R(φ)(h, ν₀g); f′ = e^{iφ} f.
pub fn rotate_modes(sol: &ModeSolution, phi: f64) -> ModeSolution {
    let mut out = sol.clone();
    out.rotation = sol.rotation + phi;
    let nu0 = sol.nu0;
    for i in 0..sol.times.len() {
        let u = [sol.h[i], sol.hdot[i] / nu0, nu0 * sol.g[i], sol.gdot[i]];
        let s = state_from_scaled(rotate_scaled(u, phi), nu0);
        out.h[i] = s.h;
        out.hdot[i] = s.hdot;
        out.g[i] = s.g;
        out.gdot[i] = s.gdot;
        out.f[i] = s.f();
        out.fdot[i] = s.fdot();
    }
    out
}
