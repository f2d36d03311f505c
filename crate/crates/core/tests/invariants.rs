use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use schroeder_core::corpus::least_repelling_fixed_point;
use schroeder_core::dynamics::{classify, periodic_points, PointClass};
use schroeder_core::poly::Poly;
use schroeder_core::rational::RationalMap;
use schroeder_core::render::render_julia;
use schroeder_core::schroeder::{SchroederSeries, DEFAULT_ORDER};
use schroeder_core::singularity::lambda::cycles_of;
use schroeder_core::sphere::{chordal, SpherePoint};
use schroeder_core::sweep::{sweep_cell, SweepOptions};

fn quadratic_series(c: Complex64) -> SchroederSeries {
    let map = Arc::new(RationalMap::unicritical(2, c).unwrap());
    let p = least_repelling_fixed_point(&map, 1.2).unwrap().unwrap();
    SchroederSeries::build(map, &p, DEFAULT_ORDER).unwrap()
}

fn small_c() -> impl Strategy<Value = Complex64> {
    (-0.2f64..0.2, -0.2f64..0.2).prop_map(|(x, y)| Complex64::new(x, y))
}

fn sphere_point() -> impl Strategy<Value = SpherePoint> {
    prop_oneof![
        9 => (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| SpherePoint::Finite(Complex64::new(x, y))),
        1 => Just(SpherePoint::Infinity),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_and_functional_equation(c in small_c(), t in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        let s = quadratic_series(c);
        prop_assert_eq!(s.coeffs()[0], s.z0());
        prop_assert_eq!(s.coeffs()[1], Complex64::new(1.0, 0.0));
        let w = Complex64::from_polar(5.0 * s.r_safe() * t, theta);
        let lhs = s.map().eval(s.evaluate(w));
        let rhs = s.evaluate(s.lambda() * w);
        prop_assert!(chordal(lhs, rhs) < 1e-7);
    }

    #[test]
    fn deeper_pullback_agrees(c in small_c(), t in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        let s = quadratic_series(c);
        let w = Complex64::from_polar(3.0 * s.r_safe() * t, theta);
        let d = s.depth_for(w);
        let a = s.evaluate_at_depth(w, d);
        let b = s.evaluate_at_depth(w, d + 1);
        prop_assert!(chordal(a, b) < 1e-8, "depth {} vs {}: {:?} {:?}", d, d + 1, a, b);
    }

    #[test]
    fn fixed_points_count_with_multiplicity(c in small_c()) {
        let map = RationalMap::unicritical(2, c).unwrap();
        let pts = periodic_points(&map, 1).unwrap();
        prop_assert_eq!(pts.iter().map(|p| p.multiplicity).sum::<usize>(), 3);
        prop_assert!(pts.iter().any(|p| p.z0.is_infinite() && p.class.is_attracting()));
        // sum of 1/(1 - lambda) over finite fixed points of a polynomial is 0
        let s: Complex64 = pts
            .iter()
            .filter(|p| !p.z0.is_infinite())
            .map(|p| (Complex64::new(1.0, 0.0) - p.multiplier).inv())
            .sum();
        prop_assert!(s.norm() < 1e-8);
    }

    #[test]
    fn cycle_multiplier_is_the_same_at_each_point(c in small_c()) {
        let map = RationalMap::unicritical(2, c).unwrap();
        let pts: Vec<_> = periodic_points(&map, 2).unwrap().into_iter().filter(|p| !p.z0.is_infinite()).collect();
        prop_assert_eq!(pts.len(), 2);
        let d = (pts[0].multiplier - pts[1].multiplier).norm();
        prop_assert!(d < 1e-8 * (1.0 + pts[0].multiplier.norm()));
        prop_assert_eq!(classify(pts[0].multiplier), PointClass::Repelling);
    }

    #[test]
    fn chordal_metric_is_inversion_invariant(a in sphere_point(), b in sphere_point()) {
        let d = chordal(a, b);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&d));
        prop_assert!((d - chordal(b, a)).abs() < 1e-15);
        prop_assert!((d - chordal(a.reciprocal(), b.reciprocal())).abs() < 1e-12);
    }

    #[test]
    fn permutation_cycles_partition(perm in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
        let cycles = cycles_of(&perm);
        let mut seen: Vec<usize> = cycles.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..7).collect::<Vec<_>>());
        for cyc in &cycles {
            for (k, &i) in cyc.iter().enumerate() {
                prop_assert_eq!(perm[i], cyc[(k + 1) % cyc.len()]);
            }
        }
    }

    #[test]
    fn sweep_silhouette(x in -2.5f64..1.5, y in -2.0f64..2.0) {
        let c = Complex64::new(x, y);
        let cell = sweep_cell(&SweepOptions::default(), c);
        if c.norm() > 2.0 {
            prop_assert!(!cell.in_c);
        }
        // the main cardioid: c = mu/2 - mu^2/4 with |mu| < 1
        let mu = Complex64::new(1.0, 0.0) - (Complex64::new(1.0, 0.0) - 4.0 * c).sqrt();
        if mu.norm() < 0.95 {
            prop_assert!(cell.in_c && cell.in_h && cell.period == Some(1));
        }
        prop_assert!(!cell.in_h || cell.in_c);
    }
}

#[test]
fn julia_render_has_expected_shape() {
    let map = RationalMap::polynomial(Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
    let img = render_julia(&map, Complex64::new(0.0, 0.0), 2.0, 64, 100).unwrap();
    let bytes = img.encode();
    let header = b"P6\n64 64\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 64 * 64 * 3);
    assert!(render_julia(&map, Complex64::new(0.0, 0.0), 2.0, 9000, 10).is_err());
}
