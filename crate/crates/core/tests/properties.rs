use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use chirposc::analytic::{closed_form_probability, gibbons_hawking_probability, sideband_ratio, ExpChirpParams};
use chirposc::cli::output::format_float;
use chirposc::modes::{rotate_modes, solve_modes, wronskian_deviation, ChirpProfile, SimulationWindow};
use chirposc::quad::GaussLegendre;
use chirposc::specfun::bessel_set;
use chirposc::specfun::gamma::gamma;
use chirposc::spectrum::fourier_amplitude;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_conserved(nu0 in 0.5f64..20.0, depth in 0.0f64..0.6, mod_freq in 0.1f64..5.0, t_end in 0.5f64..8.0) {
        let profile = ChirpProfile::Modulated { nu0, depth, mod_freq };
        let sol = solve_modes(&profile, &SimulationWindow::new(t_end)).unwrap();
        prop_assert!(wronskian_deviation(&sol) <= 1e-9);
    }

    #[test]
    fn spectra_are_rotation_invariant(nu0 in 2.0f64..20.0, phi in -PI..PI, delta in -30.0f64..30.0) {
        let profile = ChirpProfile::Exponential { nu0, kappa: 1.0 };
        let sol = solve_modes(&profile, &SimulationWindow::new(3.0)).unwrap();
        let a = fourier_amplitude(&sol, delta).unwrap().value.norm_sqr();
        let b = fourier_amplitude(&rotate_modes(&sol, phi), delta).unwrap().value.norm_sqr();
        prop_assert!((a - b).abs() <= 1e-10 * a, "{} vs {}", a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn thermal_ratio_is_exact(ratio in 50.0f64..5000.0, d in 0.05f64..8.0) {
        let p = ExpChirpParams::new(ratio, 1.0, 12.0).unwrap();
        let want = sideband_ratio(d, 1.0).unwrap();
        let cf = closed_form_probability(&p, 1.0, d).unwrap() / closed_form_probability(&p, 1.0, -d).unwrap();
        let gh = gibbons_hawking_probability(&p, 1.0, d).unwrap() / gibbons_hawking_probability(&p, 1.0, -d).unwrap();
        prop_assert!(((cf - want) / want).abs() < 1e-12);
        prop_assert!(((gh - want) / want).abs() < 1e-12);
    }

    #[test]
    fn bessel_wronskian(x in 0.05f64..150.0) {
        let b = bessel_set(x).unwrap();
        let w = b.j1 * b.y0 - b.j0 * b.y1;
        let want = 2.0 / (PI * x);
        prop_assert!((w - want).abs() <= 1e-12 * want.max(1.0), "x = {}: {} vs {}", x, w, want);
    }

    #[test]
    fn gamma_modulus_on_the_imaginary_axis(y in 0.05f64..20.0) {
        let g = gamma(Complex64::new(0.0, y)).unwrap();
        let want = PI / (y * (PI * y).sinh());
        prop_assert!((g.norm_sqr() - want).abs() <= 1e-11 * want);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1(n in 1usize..20, c in prop::collection::vec(-1.0f64..1.0, 40), a in -2.0f64..0.0, b in 0.1f64..3.0) {
        let deg = 2 * n - 1;
        let rule = GaussLegendre::new(n);
        let got = rule.integrate(a, b, |x| c[..=deg].iter().rev().fold(0.0, |acc, &k| acc * x + k));
        let want: f64 = c[..=deg]
            .iter()
            .enumerate()
            .map(|(j, &k)| k * (b.powi(j as i32 + 1) - a.powi(j as i32 + 1)) / (j + 1) as f64)
            .sum();
        prop_assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()) * 3f64.powi(deg as i32 / 4), "{} vs {}", got, want);
    }

    #[test]
    fn output_floats_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}
