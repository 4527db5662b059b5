//! log Γ for complex arguments (upward shift + Stirling series).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// B₂ₖ / (2k(2k−1)) for k = 1..7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

const SHIFT_TO: f64 = 15.0;

/// A branch of ln Γ(z); only `exp` of the result is meaningful across branches.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("ln_gamma of non-finite {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!("Gamma has a pole at {}", z.re)));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_TO || w.re < 0.5 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        corr += pow * c;
        pow *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + corr - shift)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(|l| l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_values() {
        assert!((gamma(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((gamma(c(5.0, 0.0)).unwrap() - 24.0).norm() < 1e-12);
        assert!((gamma(c(0.5, 0.0)).unwrap() - PI.sqrt()).norm() < 1e-14);
        assert!((gamma(c(-0.5, 0.0)).unwrap() + 2.0 * PI.sqrt()).norm() < 1e-13);
    }

    #[test]
    fn complex_reference() {
        // mpmath.gamma(1+1j), mpmath.gamma(0.5j)
        let g = gamma(c(1.0, 1.0)).unwrap();
        assert!((g - c(0.498_015_668_118_356_04, -0.154_949_828_301_810_69)).norm() < 1e-14);
        let g = gamma(c(0.0, 0.5)).unwrap();
        assert!((g - c(-0.399_279_476_329_192_7, -1.603_388_194_139_434_4)).norm() < 1e-13);
    }

    #[test]
    fn imaginary_axis_modulus() {
        for y in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let m2 = gamma(c(0.0, y)).unwrap().norm_sqr();
            let want = PI / (y * (PI * y).sinh());
            assert!(((m2 - want) / want).abs() < 1e-13, "y = {y}");
        }
    }

    #[test]
    fn poles_are_errors() {
        assert!(ln_gamma(c(0.0, 0.0)).is_err());
        assert!(ln_gamma(c(-3.0, 0.0)).is_err());
        assert!(ln_gamma(c(f64::NAN, 0.0)).is_err());
    }
}
