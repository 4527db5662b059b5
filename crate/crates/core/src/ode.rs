//! Dormand–Prince 5(4) with the standard PI step-size controller and the
//! fourth-order continuous extension (Hairer, Nørsett & Wanner, *Solving ODEs I*).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub rcont: [[f64; N]; 5],
    /// Embedded local error estimate (absolute, per component).
    pub err: [f64; N],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_theta(&self, theta: f64) -> [f64; N] {
        let [r1, r2, r3, r4, r5] = &self.rcont;
        let th1 = 1.0 - theta;
        std::array::from_fn(|i| r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i]))))
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        self.eval_theta((t - self.t0) / self.h)
    }

    /// Power-basis coefficients of the dense polynomial in θ ∈ [0, 1].
    pub fn power_coefficients(&self) -> [[f64; 5]; N] {
        let [r1, r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| {
            [
                r1[i],
                r2[i] + r3[i],
                -r3[i] + r4[i] + r5[i],
                -r4[i] - 2.0 * r5[i],
                r5[i],
            ]
        })
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn initial_step<const N: usize, F>(rhs: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], opts: &Dopri5Options) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let n = N as f64;
    let sk: [f64; N] = std::array::from_fn(|i| opts.abs_tol + opts.rel_tol * y0[i].abs());
    let dnf = (0..N).map(|i| (f0[i] / sk[i]).powi(2)).sum::<f64>() / n;
    let dny = (0..N).map(|i| (y0[i] / sk[i]).powi(2)).sum::<f64>() / n;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(opts.max_step);
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + h * f0[i]);
    let f1 = rhs(t0 + h, &y1);
    let der2 = ((0..N).map(|i| ((f1[i] - f0[i]) / sk[i]).powi(2)).sum::<f64>() / n).sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(opts.max_step)
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end > t0`, returning every
/// accepted step. Steps are clipped so the last one ends exactly at `t_end`.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Dopri5Options,
) -> Result<Vec<DenseStep<N>>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!(
            "integration span [{t0}, {t_end}] is empty"
        )));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    let mut steps = Vec::new();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(&mut rhs, t, &y, &k1, opts);
    let mut fac_old = 1e-4_f64;
    let mut rejected_last = false;
    let expo = 0.2 - BETA * 0.75;
    let n = N as f64;

    loop {
        if steps.len() >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let remaining = t_end - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let y2 = combine(&y, h, &[(A21, &k1)]);
        let k2 = rhs(t + C2 * h, &y2);
        let y3 = combine(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = rhs(t + C3 * h, &y3);
        let y4 = combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = rhs(t + C4 * h, &y4);
        let y5 = combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = rhs(t + C5 * h, &y5);
        let y6 = combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t_end } else { t + h };
        let k6 = rhs(t_new, &y6);
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t_new, &y_new);

        let e: [f64; N] =
            std::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
        let err = ((0..N)
            .map(|i| {
                let sk = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                (e[i] / sk).powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt();

        let fac11 = err.powf(expo);
        let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let r3: [f64; N] = std::array::from_fn(|i| h * k1[i] - r2[i]);
            let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
            let r5: [f64; N] = std::array::from_fn(|i| {
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            steps.push(DenseStep {
                t0: t,
                h,
                rcont: [y, r2, r3, r4, r5],
                err: e,
            });
            k1 = k7;
            y = y_new;
            t = t_new;
            if last {
                return Ok(steps);
            }
            if h_new.abs() > opts.max_step {
                h_new = opts.max_step;
            }
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
        } else {
            h_new = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
            rejected_last = true;
        }
        h = h_new;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = Dopri5Options {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let steps = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &opts).unwrap();
        let last = steps.last().unwrap();
        assert_eq!(last.t1(), 5.0);
        let y_end = last.eval_theta(1.0)[0];
        assert!((y_end - (-5.0f64).exp()).abs() < 1e-12);
        // dense output between steps
        for s in &steps {
            let tm = s.t0 + 0.37 * s.h;
            let d = (s.eval(tm)[0] - (-tm).exp()).abs();
            assert!(d < 1e-10, "{d:e} at {tm} h={}", s.h);
        }
    }

    #[test]
    fn power_basis_matches_nested_form() {
        let opts = Dopri5Options::default();
        let steps = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 3.0, &opts).unwrap();
        for s in &steps {
            let c = s.power_coefficients();
            for &th in &[0.0, 0.2, 0.5, 0.9, 1.0] {
                let nested = s.eval_theta(th);
                for i in 0..2 {
                    let p = c[i].iter().rev().fold(0.0, |acc, &ck| acc * th + ck);
                    assert!((p - nested[i]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn respects_max_step() {
        let opts = Dopri5Options {
            max_step: 0.01,
            ..Default::default()
        };
        let steps = integrate(|_, y: &[f64; 1]| [0.0 * y[0]], 0.0, [1.0], 1.0, &opts).unwrap();
        assert!(steps.iter().all(|s| s.h <= 0.01 + 1e-15));
        assert!(steps.len() >= 100);
    }

    #[test]
    fn rejects_empty_span() {
        let r = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, &Dopri5Options::default());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn reports_step_underflow_time() {
        // blow-up at t = 1
        let opts = Dopri5Options {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            ..Default::default()
        };
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, &opts);
        match r {
            Err(Error::StepSizeUnderflow { t, .. }) => assert!(t > 0.9 && t <= 1.0, "t = {t}"),
            other => panic!("expected underflow, got {:?}", other.map(|s| s.len())),
        }
    }
}
