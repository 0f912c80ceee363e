mod common;

use bradyset::density::{densities_at_samples, kde_grid, kde_product, kde_univariate, Bandwidth, Sample1D, SampleQD};
use bradyset::kernels::KernelKind;
use common::{integrate_pieces, naive_kde, naive_kde_qd, normal_sample};
use proptest::prelude::*;

fn s1(v: &[f64]) -> Sample1D {
    Sample1D::new(v.to_vec()).unwrap()
}

#[test]
fn univariate_examples() {
    let g = kde_univariate(&s1(&[0.0]), KernelKind::Gaussian, 1.0, 0.0).unwrap();
    assert!((g - 0.398_942_3).abs() < 1e-7);
    let u = kde_univariate(&s1(&[-1.0, 1.0]), KernelKind::Uniform, 1.0, 0.0).unwrap();
    assert_eq!(u, 0.5);
    let data: Vec<f64> = (0..10).map(f64::from).collect();
    let e = kde_univariate(&s1(&data), KernelKind::Epanechnikov, 2.0, 5.0).unwrap();
    assert!((e - naive_kde("epanechnikov", &data, 2.0, 5.0)).abs() < 1e-15);
}

#[test]
fn bad_inputs() {
    assert!(Sample1D::new(vec![]).is_err());
    assert!(Sample1D::new(vec![1.0, f64::NAN]).is_err());
    assert!(kde_univariate(&s1(&[0.0]), KernelKind::Gaussian, 0.0, 0.0).is_err());
    assert!(kde_univariate(&s1(&[0.0]), KernelKind::Gaussian, -1.0, 0.0).is_err());
    let d = SampleQD::from_points(&[[0.0, 0.0]]).unwrap();
    assert!(kde_product(&d, KernelKind::Gaussian, &Bandwidth::isotropic(1.0, 3).unwrap(), &[0.0, 0.0]).is_err());
    assert!(kde_product(&d, KernelKind::Gaussian, &Bandwidth::isotropic(1.0, 2).unwrap(), &[0.0]).is_err());
}

#[test]
fn matches_naive_sum_for_every_kernel() {
    let data = normal_sample(11, 80, 0.0, 1.0);
    for kind in KernelKind::ALL {
        for &h in &[0.1, 0.4, 1.3] {
            for &x in &[-2.0, -0.3, 0.0, 0.77, 3.1] {
                let got = kde_univariate(&s1(&data), kind, h, x).unwrap();
                let want = naive_kde(kind.name(), &data, h, x);
                assert!((got - want).abs() < 1e-13, "{kind} h={h} x={x}");
            }
        }
    }
}

#[test]
fn univariate_integrates_to_one() {
    let data = normal_sample(4, 30, 0.0, 1.0);
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for kind in KernelKind::ALL {
        let h = 0.5;
        let mut breaks: Vec<f64> = Vec::new();
        if kind != KernelKind::Gaussian {
            breaks = data.iter().flat_map(|&x| [x - h, x + h]).collect();
        }
        let mass = integrate_pieces(
            &|x| kde_univariate(&s1(&data), kind, h, x).unwrap(),
            lo - 10.0 * h,
            hi + 10.0 * h,
            &breaks,
            1e-9,
        );
        assert!((mass - 1.0).abs() < 1e-3, "{kind}: {mass}");
    }
}

#[test]
fn product_examples() {
    let d = SampleQD::from_points(&[[0.0, 0.0]]).unwrap();
    let h = Bandwidth::isotropic(1.0, 2).unwrap();
    let v = kde_product(&d, KernelKind::Gaussian, &h, &[0.0, 0.0]).unwrap();
    assert!((v - 0.159_154_9).abs() < 1e-7);

    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 5) as f64 * 0.3, (i / 5) as f64 * 0.25]).collect();
    let d = SampleQD::from_rows(&rows).unwrap();
    let h = Bandwidth::new(vec![0.5, 0.5]).unwrap();
    let got = kde_product(&d, KernelKind::Cosine, &h, &[0.1, 0.2]).unwrap();
    let want = naive_kde_qd("cosine", &rows, &[0.5, 0.5], &[0.1, 0.2]);
    assert!((got - want).abs() < 1e-14);
}

#[test]
fn one_dimension_reduces_to_univariate() {
    let data = normal_sample(2, 40, 1.0, 2.0);
    let q = SampleQD::from_flat(data.clone(), 1).unwrap();
    for kind in KernelKind::ALL {
        for &x in &[-1.0, 0.5, 2.0] {
            let a = kde_product(&q, kind, &Bandwidth::isotropic(0.7, 1).unwrap(), &[x]).unwrap();
            let b = kde_univariate(&s1(&data), kind, 0.7, x).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn grid_examples() {
    let d = SampleQD::from_points(&[[0.0, 0.0]]).unwrap();
    let h = Bandwidth::isotropic(1.0, 2).unwrap();
    let g = kde_grid(&d, KernelKind::Gaussian, &h, 3, 3.0).unwrap();
    assert!((g.value(1, 1) - 0.159_154_9).abs() < 1e-7);
    let c = g.value(0, 0);
    for (i, j) in [(0, 2), (2, 0), (2, 2)] {
        assert!((g.value(i, j) - c).abs() < 1e-18);
    }
    assert_eq!(g.x_axis, vec![-3.0, 0.0, 3.0]);
}

#[test]
fn grid_integrates_close_to_one() {
    let xs = normal_sample(100, 100, 0.0, 1.0);
    let ys = normal_sample(200, 100, 0.0, 1.0);
    let pts: Vec<[f64; 2]> = xs.iter().zip(&ys).map(|(&x, &y)| [x, y]).collect();
    let d = SampleQD::from_points(&pts).unwrap();
    let g = kde_grid(&d, KernelKind::Gaussian, &Bandwidth::isotropic(0.4, 2).unwrap(), 64, 3.0).unwrap();
    assert!(g.values.iter().all(|&v| v >= 0.0));
    // trapezoid rule over the grid
    let trap_w = |axis: &[f64], i: usize| {
        let n = axis.len();
        let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
        let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
        0.5 * (left + right)
    };
    let mut total = 0.0;
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            total += trap_w(&g.x_axis, i) * trap_w(&g.y_axis, j) * g.value(i, j);
        }
    }
    assert!((0.97..=1.0).contains(&total), "{total}");
}

#[test]
fn grid_equals_pointwise_estimate() {
    let xs = normal_sample(5, 40, 0.0, 1.0);
    let ys = normal_sample(6, 40, 2.0, 0.5);
    let pts: Vec<[f64; 2]> = xs.iter().zip(&ys).map(|(&x, &y)| [x, y]).collect();
    let d = SampleQD::from_points(&pts).unwrap();
    for kind in KernelKind::ALL {
        let h = Bandwidth::new(vec![0.6, 0.3]).unwrap();
        let g = kde_grid(&d, kind, &h, 17, 2.0).unwrap();
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let p = kde_product(&d, kind, &h, &g.node(i, j)).unwrap();
                assert!((g.value(i, j) - p).abs() <= 1e-12 * p.max(1.0));
            }
        }
        let ys = densities_at_samples(&d, kind, &h).unwrap();
        for (k, p) in pts.iter().enumerate() {
            assert_eq!(ys[k], kde_product(&d, kind, &h, p).unwrap());
        }
    }
}

fn points() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec([-5.0f64..5.0, -5.0f64..5.0], 1..25)
}

fn kind() -> impl Strategy<Value = KernelKind> {
    prop::sample::select(KernelKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn permutation_invariant(pts in points(), kind in kind(), h in 0.1f64..3.0, x in [-5.0f64..5.0, -5.0f64..5.0], seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut common::rng(seed));
        let bw = Bandwidth::isotropic(h, 2).unwrap();
        let a = kde_product(&SampleQD::from_points(&pts).unwrap(), kind, &bw, &x).unwrap();
        let b = kde_product(&SampleQD::from_points(&shuffled).unwrap(), kind, &bw, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn translation_equivariant(pts in points(), kind in kind(), h in 0.1f64..3.0, x in [-5.0f64..5.0, -5.0f64..5.0], shift in [-50.0f64..50.0, -50.0f64..50.0]) {
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect();
        let bw = Bandwidth::isotropic(h, 2).unwrap();
        let a = kde_product(&SampleQD::from_points(&pts).unwrap(), kind, &bw, &x).unwrap();
        let b = kde_product(&SampleQD::from_points(&moved).unwrap(), kind, &bw, &[x[0] + shift[0], x[1] + shift[1]]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn scaling_law(pts in points(), kind in kind(), h in 0.1f64..3.0, x in [-5.0f64..5.0, -5.0f64..5.0], c in 0.1f64..10.0) {
        let scaled: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] * c, p[1] * c]).collect();
        let a = kde_product(&SampleQD::from_points(&pts).unwrap(), kind, &Bandwidth::isotropic(h, 2).unwrap(), &x).unwrap();
        let b = kde_product(&SampleQD::from_points(&scaled).unwrap(), kind, &Bandwidth::isotropic(h * c, 2).unwrap(), &[x[0] * c, x[1] * c]).unwrap();
        prop_assert!((b * c * c - a).abs() <= 1e-10 * a.max(1e-12), "{} vs {}", a, b * c * c);
    }
}
