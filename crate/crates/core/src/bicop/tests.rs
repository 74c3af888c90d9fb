use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::deptools::kendall_tau;
use crate::special::adaptive_simpson;

use CopulaFamily::*;
use Rotation::*;

fn cop(family: CopulaFamily, rotation: Rotation, theta: f64) -> BivariateCopula<f64> {
    BivariateCopula::new(family, rotation, theta).unwrap()
}

/// Three parameter values per family, covering weak to strong dependence.
fn parameter_grid() -> Vec<BivariateCopula<f64>> {
    let mut out = vec![BivariateCopula::independence()];
    for &r in &[-0.7, 0.2, 0.85] {
        out.push(cop(Gaussian, R0, r));
    }
    for rot in [R0, R90, R180, R270] {
        for &t in &[0.5, 2.0, 6.0] {
            out.push(cop(Clayton, rot, t));
        }
        for &t in &[1.2, 2.0, 4.0] {
            out.push(cop(Gumbel, rot, t));
        }
    }
    for &t in &[-6.0, 1.5, 10.0] {
        out.push(cop(Frank, R0, t));
    }
    out
}

fn grid9() -> impl Iterator<Item = (f64, f64)> {
    (1..=9).flat_map(|i| (1..=9).map(move |j| (i as f64 / 10.0, j as f64 / 10.0)))
}

fn bisect(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simulate(c: &BivariateCopula<f64>, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(1e-9..1.0);
        let w: f64 = rng.random_range(1e-9..1.0);
        u.push(a);
        v.push(c.hinv2(w, a).unwrap());
    }
    (u, v)
}

#[test]
fn trivial_values() {
    let ind = BivariateCopula::<f64>::independence();
    assert_eq!(ind.pdf(0.3, 0.8), 1.0);
    assert!((ind.cdf(0.4, 0.5) - 0.2).abs() < 1e-15);
    assert_eq!(ind.hfunc1(0.2, 0.9), 0.2);
    assert_eq!(ind.hfunc2(0.2, 0.9), 0.9);
    assert_eq!(ind.hinv1(0.55, 0.3).unwrap(), 0.55);
    assert_eq!(ind.hinv2(0.55, 0.3).unwrap(), 0.55);

    let g0 = cop(Gaussian, R0, 0.0);
    assert!((g0.pdf(0.25, 0.75) - 1.0).abs() < 1e-12);
    assert!((g0.hfunc1(0.7, 0.1) - 0.7).abs() < 1e-12);

    let g = cop(Gaussian, R0, 0.4);
    assert!((g.hfunc2(0.3, 0.8) - g.hfunc1(0.8, 0.3)).abs() < 1e-14);

    let g = cop(Gaussian, R0, 0.5);
    assert!((g.hinv1(g.hfunc1(0.3, 0.7), 0.7).unwrap() - 0.3).abs() < 1e-8);
    assert!((g.hinv2(g.hfunc2(0.7, 0.3), 0.7).unwrap() - 0.3).abs() < 1e-8);
}

#[test]
fn margins_are_uniform() {
    for c in parameter_grid() {
        for &u in &[0.0, 0.3, 1.0] {
            assert!((c.cdf(u, 1.0) - u).abs() < 1e-12, "{c:?} u={u}");
            assert!((c.cdf(1.0, u) - u).abs() < 1e-12, "{c:?} v={u}");
        }
        assert!(c.cdf(0.0, 0.6).abs() < 1e-9);
        assert!(c.cdf(0.6, 0.0).abs() < 1e-9);
    }
}

#[test]
fn gaussian_pdf_matches_cdf_mixed_difference() {
    let c = cop(Gaussian, R0, 0.5);
    let h = 1e-5;
    let (u, v) = (0.5, 0.5);
    let fd = (c.cdf(u + h, v + h) - c.cdf(u + h, v - h) - c.cdf(u - h, v + h) + c.cdf(u - h, v - h))
        / (4.0 * h * h);
    assert!((c.pdf(u, v) - fd).abs() < 1e-6, "{} vs {fd}", c.pdf(u, v));
}

#[test]
fn clayton_cdf_matches_integrated_pdf() {
    let c = cop(Clayton, R0, 2.0);
    let inner = |x: f64| adaptive_simpson(&|y: f64| c.pdf(x, y), 0.0, 0.6, 1e-8);
    let q = adaptive_simpson(&inner, 0.0, 0.3, 1e-6);
    assert!((c.cdf(0.3, 0.6) - q).abs() < 1e-4, "{} vs {q}", c.cdf(0.3, 0.6));
}

#[test]
fn hfunctions_match_cdf_differences() {
    let d = 1e-6;
    let c = cop(Gumbel, R0, 1.5);
    let fd = (c.cdf(0.4, 0.6 + d) - c.cdf(0.4, 0.6 - d)) / (2.0 * d);
    assert!((c.hfunc1(0.4, 0.6) - fd).abs() < 1e-5);

    let c = cop(Frank, R0, 3.0);
    let fd = (c.cdf(0.5 + d, 0.25) - c.cdf(0.5 - d, 0.25)) / (2.0 * d);
    assert!((c.hfunc2(0.5, 0.25) - fd).abs() < 1e-5);
}

#[test]
fn clayton_inverse_matches_bisection() {
    let c = cop(Clayton, R0, 4.0);
    let oracle = bisect(|u| c.hfunc1(u, 0.1), 0.9);
    assert!((c.hinv1(0.9, 0.1).unwrap() - oracle).abs() < 1e-10);
    let oracle = bisect(|v| c.hfunc2(0.1, v), 0.9);
    assert!((c.hinv2(0.9, 0.1).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn hfunc_is_nondecreasing_with_fixed_ends() {
    for c in parameter_grid() {
        for j in 1..=9 {
            let v = j as f64 / 10.0;
            let mut prev = c.hfunc1(0.0, v);
            assert!(prev.abs() < 1e-8, "{c:?}");
            for i in 1..=1000 {
                let h = c.hfunc1(i as f64 / 1000.0, v);
                assert!(h >= prev - 1e-15, "{c:?} v={v} i={i}");
                prev = h;
            }
            assert!((prev - 1.0).abs() < 1e-8, "{c:?}");
        }
    }
}

#[test]
fn inverse_round_trips_on_grid() {
    for c in parameter_grid() {
        for (u, v) in grid9() {
            let back = c.hinv1(c.hfunc1(u, v), v).unwrap();
            assert!((back - u).abs() < 1e-8, "{c:?} hinv1 at ({u},{v}): {back}");
            let back = c.hinv2(c.hfunc2(u, v), u).unwrap();
            assert!((back - v).abs() < 1e-8, "{c:?} hinv2 at ({u},{v}): {back}");
        }
    }
}

#[test]
fn density_integrates_to_one() {
    // midpoint rule after the substitution x = t^2 (3 - 2t), which flattens
    // the corner peaks of the tail-dependent families
    let m = 200;
    let nodes: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let t = (i as f64 + 0.5) / m as f64;
            (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t) / m as f64)
        })
        .collect();
    for c in parameter_grid() {
        let mut s = 0.0;
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                s += c.pdf(x, y) * wx * wy;
            }
        }
        assert!((s - 1.0).abs() < 1e-3, "{c:?}: {s}");
    }
}

#[test]
fn rotation_mirrors_density_and_tau() {
    let c0 = cop(Clayton, R0, 3.0);
    let c180 = cop(Clayton, R180, 3.0);
    for (u, v) in grid9() {
        assert!((c180.pdf(u, v) - c0.pdf(1.0 - u, 1.0 - v)).abs() < 1e-10);
    }
    let c90 = cop(Clayton, R90, 3.0);
    assert!((c90.tau() + c0.tau()).abs() < 1e-10);
    assert!((c180.tau() - c0.tau()).abs() < 1e-10);
}

#[test]
fn tau_theta_round_trip() {
    let cases = [(Gaussian, R0), (Frank, R0), (Clayton, R0), (Clayton, R90), (Gumbel, R0), (Gumbel, R270)];
    for (fam, rot) in cases {
        for i in -9..=9 {
            let tau = i as f64 / 10.0;
            let Ok(theta) = tau_to_theta(fam, rot, tau) else { continue };
            let back = theta_to_tau(fam, rot, theta);
            assert!((back - tau).abs() < 1e-8, "{fam} {rot} tau={tau}: {back}");
        }
    }
    assert_eq!(tau_to_theta(Gaussian, R0, 0.0).unwrap(), 0.0);
    assert!(tau_to_theta(Clayton, R0, -0.5).is_err());
}

#[test]
fn half_tau_gives_theta_two() {
    for fam in [Clayton, Gumbel] {
        let theta: f64 = tau_to_theta(fam, R0, 0.5).unwrap();
        assert!((theta - 2.0).abs() < 1e-12);
        let (u, v) = simulate(&cop(fam, R0, theta), 1_000_000, 7);
        let t = kendall_tau(&u, &v).unwrap();
        assert!((t - 0.5).abs() < 0.01, "{fam}: {t}");
    }
}

#[test]
fn parameter_domains_are_checked() {
    assert!(matches!(
        BivariateCopula::new(Gaussian, R0, 1.0),
        Err(Error::Domain { family: Gaussian, .. })
    ));
    assert!(BivariateCopula::new(Clayton, R0, 0.0).is_err());
    assert!(BivariateCopula::new(Gumbel, R0, 0.9).is_err());
    assert!(BivariateCopula::new(Frank, R0, 0.0).is_err());
    assert!(BivariateCopula::new(Gaussian, R90, 0.3).is_err());
}

#[test]
fn fit_detects_independence() {
    let hits = (0..20)
        .filter(|&s| {
            let (u, v) = simulate(&BivariateCopula::independence(), 1000, s);
            fit(&CopulaFamily::ALL, &u, &v, &FitOptions::default())
                .unwrap()
                .is_independence()
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn fit_recovers_gaussian() {
    let (u, v) = simulate(&cop(Gaussian, R0, 0.6), 5000, 11);
    let fam = [Gaussian];
    for method in [FitMethod::Itau, FitMethod::Mle] {
        let opts = FitOptions { method, ..FitOptions::default() };
        let c = fit(&fam, &u, &v, &opts).unwrap();
        assert_eq!(c.family(), Gaussian);
        assert!((c.theta() - 0.6).abs() < 0.05, "{method:?}: {}", c.theta());
    }
}

#[test]
fn fit_prefers_clayton_for_clayton_data() {
    let truth = cop(Clayton, R0, 2.0);
    let hits = (0..100)
        .filter(|&s| {
            let (u, v) = simulate(&truth, 5000, 1000 + s);
            fit(&[Clayton, Gumbel], &u, &v, &FitOptions::default()).unwrap().family() == Clayton
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn fit_rejects_bad_input() {
    let u = [0.5; 5];
    assert!(matches!(
        fit(&CopulaFamily::ALL, &u, &u, &FitOptions::<f64>::default()),
        Err(Error::TooFewObservations { .. })
    ));
    let u: Vec<f64> = (1..=20).map(|i| i as f64 / 21.0).collect();
    assert!(matches!(fit(&[], &u, &u, &FitOptions::default()), Err(Error::EmptyFamilySet)));
}

#[test]
fn single_precision_round_trip() {
    let c = BivariateCopula::<f32>::new(Gumbel, R0, 2.0).unwrap();
    let back = c.hinv1(c.hfunc1(0.3, 0.6), 0.6).unwrap();
    assert!((back - 0.3).abs() < 1e-4);
}

#[test]
fn single_precision_agrees_with_double() {
    for fam in [Gaussian, Clayton, Gumbel, Frank] {
        for tau in [0.2, 0.5, 0.8, 0.95] {
            let wide = BivariateCopula::<f64>::from_tau(fam, R0, tau).unwrap();
            let narrow = BivariateCopula::<f32>::from_tau(fam, R0, tau as f32).unwrap();
            for i in 1..50 {
                for j in 1..50 {
                    let (p, v) = (i as f32 / 50.0, j as f32 / 50.0);
                    let (pw, vw) = (p as f64, v as f64);
                    let dh = (wide.hfunc1(pw, vw) - narrow.hfunc1(p, v) as f64).abs();
                    let di = (wide.hinv1(pw, vw).unwrap() - narrow.hinv1(p, v).unwrap() as f64).abs();
                    assert!(dh < 2e-5 && di < 2e-5, "{fam} tau {tau} at ({p}, {v}): {dh:e} {di:e}");
                }
            }
        }
    }
}
