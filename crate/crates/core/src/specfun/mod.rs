//! Real-argument Bessel functions J₀, J₁, Y₀, Y₁ and the Hankel function H₀⁽¹⁾.
//!
//! Small and moderate arguments use the ascending series summed in
//! double-double arithmetic, so the cancellation between large alternating
//! terms (up to ~10⁷ at the crossover) costs nothing at double precision.
//! Large arguments use the Hankel asymptotic expansions in P/Q form, whose
//! smallest term at the crossover is below 10⁻¹⁷.

pub(crate) mod dd;
pub mod gamma;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use dd::DD;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments up to this value use the ascending series.
pub const SERIES_LIMIT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselKind {
    J0,
    J1,
    Y0,
    Y1,
}

impl BesselKind {
    pub fn is_second_kind(self) -> bool {
        matches!(self, BesselKind::Y0 | BesselKind::Y1)
    }
}

pub fn bessel(kind: BesselKind, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("{kind:?} at non-finite argument {x}")));
    }
    if kind.is_second_kind() && x <= 0.0 {
        return Err(Error::Domain(format!("{kind:?} requires x > 0, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("{kind:?} requires x >= 0, got {x}")));
    }
    if x <= SERIES_LIMIT {
        Ok(series(kind, x))
    } else {
        Ok(asymptotic(kind, x))
    }
}

pub fn j0(x: f64) -> Result<f64> {
    bessel(BesselKind::J0, x)
}

pub fn j1(x: f64) -> Result<f64> {
    bessel(BesselKind::J1, x)
}

pub fn y0(x: f64) -> Result<f64> {
    bessel(BesselKind::Y0, x)
}

pub fn y1(x: f64) -> Result<f64> {
    bessel(BesselKind::Y1, x)
}

/// H₀⁽¹⁾(x) = J₀(x) + i·Y₀(x).
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("H0(1) requires x > 0, got {x}")));
    }
    Ok(Complex64::new(j0(x)?, y0(x)?))
}

/// All four functions at once; shares the series work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSet {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

pub fn bessel_set(x: f64) -> Result<BesselSet> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel set requires finite x > 0, got {x}")));
    }
    if x <= SERIES_LIMIT {
        let s = SeriesSums::new(x);
        Ok(BesselSet {
            j0: s.j0(),
            j1: s.j1(),
            y0: s.y0(),
            y1: s.y1(),
        })
    } else {
        let (p0, q0) = pq(0.0, x);
        let (p1, q1) = pq(1.0, x);
        let amp = (2.0 / (PI * x)).sqrt();
        let (s, c) = x.sin_cos();
        let (c0, s0) = ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2);
        let (c1, s1) = ((s - c) * FRAC_1_SQRT_2, (-s - c) * FRAC_1_SQRT_2);
        Ok(BesselSet {
            j0: amp * (p0 * c0 - q0 * s0),
            y0: amp * (p0 * s0 + q0 * c0),
            j1: amp * (p1 * c1 - q1 * s1),
            y1: amp * (p1 * s1 + q1 * c1),
        })
    }
}

/// Partial sums of the ascending series, kept in double-double.
struct SeriesSums {
    x: f64,
    j0: DD,
    j1: DD,
    // Σ H_k t_k for the Y₀ series and Σ (H_k + H_{k+1}) s_k for Y₁.
    y0_tail: DD,
    y1_tail: DD,
}

impl SeriesSums {
    fn new(x: f64) -> Self {
        let half = DD::from_f64(x).mul_f64(0.5);
        let q = half * half;
        // t_k = (-1)^k q^k / (k!)^2, s_k = (-1)^k (x/2)^{2k+1} / (k!(k+1)!)
        let mut t = DD::ONE;
        let mut s = half;
        let mut harmonic = DD::ZERO; // H_k
        let mut j0 = t;
        let mut j1 = s;
        let mut y0_tail = DD::ZERO;
        let mut y1_tail = s; // (H_0 + H_1) s_0 = s_0
        let mut k = 1u32;
        loop {
            let kf = k as f64;
            t = -(t * q).div_f64(kf * kf);
            s = -(s * q).div_f64(kf * (kf + 1.0));
            harmonic = harmonic + DD::ONE.div_f64(kf);
            let next_harmonic = harmonic + DD::ONE.div_f64(kf + 1.0);
            j0 = j0 + t;
            j1 = j1 + s;
            y0_tail = y0_tail + harmonic * t;
            y1_tail = y1_tail + (harmonic + next_harmonic) * s;
            if t.hi.abs() < 1e-34 && s.hi.abs() < 1e-34 && k > 4 {
                break;
            }
            k += 1;
        }
        SeriesSums {
            x,
            j0,
            j1,
            y0_tail,
            y1_tail,
        }
    }

    fn log_term(&self) -> f64 {
        (self.x * 0.5).ln() + EULER_GAMMA
    }

    fn j0(&self) -> f64 {
        self.j0.to_f64()
    }

    fn j1(&self) -> f64 {
        self.j1.to_f64()
    }

    fn y0(&self) -> f64 {
        // Y₀ = (2/π)[(ln(x/2) + γ) J₀ − Σ_{k≥1} H_k t_k]
        let v = self.j0.mul_f64(self.log_term()) - self.y0_tail;
        v.to_f64() * (2.0 / PI)
    }

    fn y1(&self) -> f64 {
        // Y₁ = −2/(πx) + (2/π)(ln(x/2) + γ) J₁ − (1/π) Σ_{k≥0} (H_k + H_{k+1}) s_k
        let v = self.j1.mul_f64(2.0 * self.log_term()) - self.y1_tail;
        let v = v - DD::from_f64(2.0).div_f64(self.x);
        v.to_f64() / PI
    }
}

pub(crate) fn series(kind: BesselKind, x: f64) -> f64 {
    if x == 0.0 {
        return match kind {
            BesselKind::J0 => 1.0,
            BesselKind::J1 => 0.0,
            _ => f64::NEG_INFINITY,
        };
    }
    let s = SeriesSums::new(x);
    match kind {
        BesselKind::J0 => s.j0(),
        BesselKind::J1 => s.j1(),
        BesselKind::Y0 => s.y0(),
        BesselKind::Y1 => s.y1(),
    }
}

/// Hankel P and Q sums for order `nu`, truncated at the smallest term.
fn pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k(ν)/x^k
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = a.abs();
        if mag > last {
            break;
        }
        last = mag;
        // P = Σ (-1)^m a_{2m}/x^{2m}, Q = Σ (-1)^m a_{2m+1}/x^{2m+1}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

pub(crate) fn asymptotic(kind: BesselKind, x: f64) -> f64 {
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    // cos/sin of x − π/4 and x − 3π/4 without subtracting from a large x
    match kind {
        BesselKind::J0 | BesselKind::Y0 => {
            let (p, q) = pq(0.0, x);
            let (cc, ss) = ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2);
            if kind == BesselKind::J0 {
                amp * (p * cc - q * ss)
            } else {
                amp * (p * ss + q * cc)
            }
        }
        BesselKind::J1 | BesselKind::Y1 => {
            let (p, q) = pq(1.0, x);
            let (cc, ss) = ((s - c) * FRAC_1_SQRT_2, (-s - c) * FRAC_1_SQRT_2);
            if kind == BesselKind::J1 {
                amp * (p * cc - q * ss)
            } else {
                amp * (p * ss + q * cc)
            }
        }
    }
}

/// H₀⁽¹⁾(z) for complex z from the Hankel expansion, truncated at the
/// smallest term. Accurate to ~1e-15 once |z| ≥ 20 with Re z > 0.
pub fn hankel1_0_asymptotic(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..100u32 {
        let odd = (2 * k - 1) as f64;
        term *= i * (-odd * odd) / (8.0 * k as f64 * z);
        let mag = term.norm();
        if mag > last {
            break;
        }
        last = mag;
        sum += term;
        if mag < 1e-17 * sum.norm() {
            break;
        }
    }
    (2.0 / (PI * z)).sqrt() * (i * (z - PI / 4.0)).exp() * sum
}
