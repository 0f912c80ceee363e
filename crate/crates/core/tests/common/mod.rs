//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical code.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_sample(seed: u64, n: usize, mean: f64, sd: f64) -> Vec<f64> {
    let mut r = rng(seed);
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(&mut r)).collect()
}

pub fn uniform_sample(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| lo + (hi - lo) * r.random::<f64>()).collect()
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Kernel basis functions written out from their textbook definitions.
pub fn kernel(name: &str, u: f64) -> f64 {
    match name {
        "gaussian" => normal_pdf(u),
        "epanechnikov" if u.abs() <= 1.0 => 0.75 * (1.0 - u * u),
        "uniform" if u.abs() <= 1.0 => 0.5,
        "cosine" if u.abs() <= 1.0 => PI / 4.0 * (PI * u / 2.0).cos(),
        "epanechnikov" | "uniform" | "cosine" => 0.0,
        _ => panic!("unknown kernel {name}"),
    }
}

/// Breakpoints where the compact kernels lose smoothness.
fn kinks(name: &str) -> Vec<f64> {
    if name == "gaussian" {
        vec![]
    } else {
        vec![-1.0, 1.0]
    }
}

fn simpson_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Quadrature split at the given breakpoints.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| integrate(f, w[0], w[1], tol)).sum()
}

/// `∫ k(u) k(v - u) du` by quadrature over the kernel support.
pub fn convolution_by_quadrature(name: &str, v: f64) -> f64 {
    let f = |u: f64| kernel(name, u) * kernel(name, v - u);
    if name == "gaussian" {
        return integrate(&f, -12.0 + v / 2.0, 12.0 + v / 2.0, 1e-13);
    }
    let mut breaks = kinks(name);
    breaks.extend(kinks(name).iter().map(|k| v - k));
    integrate_pieces(&f, -1.0, 1.0, &breaks, 1e-13)
}

/// `∫ k(u) du` over a range covering the support.
pub fn kernel_mass(name: &str) -> f64 {
    let lim = if name == "gaussian" { 12.0 } else { 1.0 };
    integrate_pieces(&|u| kernel(name, u), -lim, lim, &kinks(name), 1e-13)
}

/// Naive `(1/(nh)) Σ k((xᵢ - x)/h)`.
pub fn naive_kde(name: &str, data: &[f64], h: f64, x: f64) -> f64 {
    data.iter().map(|&xi| kernel(name, (xi - x) / h)).sum::<f64>() / (data.len() as f64 * h)
}

/// Naive product-kernel estimate for q-dimensional rows.
pub fn naive_kde_qd(name: &str, data: &[Vec<f64>], h: &[f64], x: &[f64]) -> f64 {
    let vol: f64 = h.iter().product();
    data.iter()
        .map(|r| (0..x.len()).map(|s| kernel(name, (r[s] - x[s]) / h[s])).product::<f64>())
        .sum::<f64>()
        / (data.len() as f64 * vol)
}

/// Closed-form convolution kernels restated independently of the library.
pub fn conv_closed_form(name: &str, v: f64) -> f64 {
    let a = v.abs();
    match name {
        "gaussian" => (-v * v / 4.0).exp() / (4.0 * PI).sqrt(),
        _ if a > 2.0 => 0.0,
        "uniform" => (2.0 - a) / 4.0,
        "epanechnikov" => 3.0 / 160.0 * (2.0 - a).powi(3) * (a * a + 6.0 * a + 4.0),
        "cosine" => {
            PI * PI / 32.0 * ((2.0 / PI) * (PI * a / 2.0).sin() + (2.0 - a) * (PI * a / 2.0).cos())
        }
        _ => panic!("unknown kernel {name}"),
    }
}

/// Leave-one-out score by a plain double loop over all ordered pairs:
/// `(1/n²) ΣᵢΣⱼ K̄ₕ(xᵢ - xⱼ) - 2/(n(n-1)) Σᵢ Σ_{j≠i} Kₕ(xᵢ - xⱼ)`.
pub fn naive_cv(name: &str, data: &[Vec<f64>], h: &[f64]) -> f64 {
    let n = data.len();
    let vol: f64 = h.iter().product();
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut c = 1.0;
            let mut k = 1.0;
            for s in 0..h.len() {
                let u = (data[i][s] - data[j][s]) / h[s];
                c *= conv_closed_form(name, u);
                k *= kernel(name, u);
            }
            first += c;
            if i != j {
                second += k;
            }
        }
    }
    let nf = n as f64;
    first / (nf * nf * vol) - 2.0 * second / (nf * (nf - 1.0) * vol)
}

pub fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Brute-force hull: a point is a vertex iff it is an endpoint of some pair
/// with every other point strictly on one side or on the closed segment.
/// Returns the vertex set sorted lexicographically, collinear points excluded.
pub fn brute_force_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let on_segment = |a: [f64; 2], b: [f64; 2], p: [f64; 2]| {
        cross(a, b, p) == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    let mut verts = Vec::new();
    for &p in &pts {
        // p is extreme if some edge (p, q) has every point on its left or on the segment
        let extreme = pts.iter().any(|&q| {
            q != p
                && pts.iter().all(|&r| {
                    let c = cross(p, q, r);
                    c > 0.0 || (c == 0.0 && on_segment(p, q, r))
                })
        });
        if extreme {
            verts.push(p);
        }
    }
    if verts.is_empty() {
        // all points collinear: endpoints only
        return vec![pts[0], *pts.last().unwrap()];
    }
    verts
}

/// Closed-polygon containment by winding-free half-plane test against a CCW hull.
pub fn inside_ccw(hull: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    (0..hull.len()).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        cross(a, b, p) / len >= -tol
    })
}

/// `n` identical Gaussian-shaped pulses of width `sigma_s` seconds at `period_s`
/// spacing starting at `first_s`, sampled at `fs`. Returns samples and peak indices.
pub fn pulse_train(fs: f64, duration_s: f64, first_s: f64, period_s: f64, n: usize, amps: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let len = (duration_s * fs) as usize;
    let peaks: Vec<usize> = (0..n).map(|i| ((first_s + i as f64 * period_s) * fs).round() as usize).collect();
    let sigma = 0.01 * fs;
    let mut x = vec![0.0; len];
    for (i, &p) in peaks.iter().enumerate() {
        let a = amps[i % amps.len()];
        for (t, v) in x.iter_mut().enumerate() {
            let d = (t as f64 - p as f64) / sigma;
            if d.abs() < 10.0 {
                *v += a * (-0.5 * d * d).exp();
            }
        }
    }
    (x, peaks)
}
