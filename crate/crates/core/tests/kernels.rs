mod common;

use bradyset::kernels::{eval_convolution, eval_kernel, kernel_moments, KernelKind};
use common::{convolution_by_quadrature, integrate, integrate_pieces, kernel_mass};
use proptest::prelude::*;

#[test]
fn reference_values() {
    let g = KernelKind::Gaussian;
    assert!((eval_kernel(g, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    assert_eq!(eval_kernel(KernelKind::Epanechnikov, 1.5), 0.0);
    assert_eq!(eval_kernel(KernelKind::Uniform, 0.7), 0.5);
    assert_eq!(eval_kernel(KernelKind::Uniform, 1.0), 0.5);
    assert!((eval_kernel(KernelKind::Cosine, 0.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);

    assert!((eval_convolution(g, 0.0) - 0.282_094_791_773_878_1).abs() < 1e-15);
    assert!((eval_convolution(KernelKind::Uniform, 0.0) - 0.5).abs() < 1e-15);
    assert_eq!(eval_convolution(KernelKind::Epanechnikov, 2.1), 0.0);
    let oracle = convolution_by_quadrature("cosine", 1.0);
    assert!((eval_convolution(KernelKind::Cosine, 1.0) - oracle).abs() < 1e-9);
}

#[test]
fn convolution_matches_quadrature_everywhere() {
    for kind in KernelKind::ALL {
        let worst = (0..400)
            .map(|i| -4.0 + 8.0 * i as f64 / 399.0)
            .map(|v| (eval_convolution(kind, v) - convolution_by_quadrature(kind.name(), v)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{kind}: {worst}");
    }
}

#[test]
fn masses_are_one() {
    for kind in KernelKind::ALL {
        assert!((kernel_mass(kind.name()) - 1.0).abs() < 1e-6, "{kind}");
        let lim = if kind == KernelKind::Gaussian { 20.0 } else { 2.0 };
        let conv = integrate_pieces(&|v| eval_convolution(kind, v), -lim, lim, &[0.0], 1e-12);
        assert!((conv - 1.0).abs() < 1e-6, "{kind}: {conv}");
    }
}

#[test]
fn moments_match_quadrature() {
    for kind in KernelKind::ALL {
        let lim = if kind == KernelKind::Gaussian { 12.0 } else { 1.0 };
        let kappa = integrate(&|u| eval_kernel(kind, u).powi(2), -lim, lim, 1e-13);
        let kappa2 = integrate(&|u| u * u * eval_kernel(kind, u), -lim, lim, 1e-13);
        let (k, k2) = kernel_moments(kind);
        assert!((k - kappa).abs() < 1e-9, "{kind}: {k} vs {kappa}");
        assert!((k2 - kappa2).abs() < 1e-9, "{kind}: {k2} vs {kappa2}");
    }
    let (k, k2) = kernel_moments(KernelKind::Epanechnikov);
    assert!((k - 0.6).abs() < 1e-15 && (k2 - 0.2).abs() < 1e-15);
    let (k, k2) = kernel_moments(KernelKind::Uniform);
    assert!((k - 0.5).abs() < 1e-15 && (k2 - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn names_round_trip() {
    for kind in KernelKind::ALL {
        assert_eq!(kind.name().parse::<KernelKind>().unwrap(), kind);
    }
    assert!("Gaussian".parse::<KernelKind>().is_err());
    assert!("triangle".parse::<KernelKind>().is_err());
}

proptest! {
    #[test]
    fn kernels_are_nonnegative_and_even(u in -5.0f64..5.0) {
        for kind in KernelKind::ALL {
            prop_assert!(eval_kernel(kind, u) >= 0.0);
            prop_assert_eq!(eval_kernel(kind, u), eval_kernel(kind, -u));
            prop_assert!(eval_convolution(kind, u) >= 0.0);
            prop_assert!((eval_convolution(kind, u) - eval_convolution(kind, -u)).abs() < 1e-15);
        }
    }

    #[test]
    fn convolution_bounded_by_its_peak(v in -5.0f64..5.0) {
        for kind in KernelKind::ALL {
            prop_assert!(eval_convolution(kind, v) <= eval_convolution(kind, 0.0) + 1e-15);
        }
    }
}
