use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use isoflat::bounds::*;
use isoflat::geodesic::DistanceSolver;
use isoflat::metric::{make_perturbed, ConformalMetric, GaussianBump, Point};
use isoflat::report::{VerificationRecord, VerificationReport};
use proptest::prelude::*;

const T_MAX: f64 = CRITICAL_PRODUCT;

#[test]
fn bracket_term_increases_on_dense_grid() {
    let n = 10_000;
    let ts: Vec<f64> = (1..n).map(|i| T_MAX * i as f64 / n as f64).collect();
    for w in ts.windows(2) {
        assert!(bracket_term(w[1]) > bracket_term(w[0]), "not increasing at t = {}", w[0]);
    }
    assert!((bracket_term(1e-10) - CRITICAL_PRODUCT).abs() < 1e-8);
    assert!(bracket_term(T_MAX * (1.0 - 1e-9)) > 1e9);
}

#[test]
fn theorem_bound_below_linear_bound_on_grid() {
    let n = 10_000;
    let failures = (1..=n)
        .map(|i| LINEAR_REGIME_PRODUCT * i as f64 / (n + 1) as f64)
        .filter(|&t| {
            let b = CurvatureBudget::new(1.0, t).unwrap();
            theorem_bound(&b) > corollary_bound(&b).unwrap().0
        })
        .count();
    assert_eq!(failures, 0);
}

fn budget() -> impl Strategy<Value = CurvatureBudget> {
    (0.05f64..5.0, 1e-4f64..0.999).prop_map(|(d, s)| CurvatureBudget::new(d, s * T_MAX / (d * d)).unwrap())
}

proptest! {
    #[test]
    fn bracket_term_is_monotone(a in 1e-6f64..T_MAX * 0.999, gap in 1e-6f64..0.5) {
        let b = (a + gap).min(T_MAX * 0.9999);
        prop_assume!(b > a);
        prop_assert!(bracket_term(b) > bracket_term(a));
    }

    #[test]
    fn spherical_barrier_below_hyperbolic(kappa in 0.01f64..10.0, s in 1e-3f64..0.999) {
        let d = s * PI / kappa.sqrt();
        prop_assert!(barrier_spherical(d, kappa).unwrap() < barrier_hyperbolic(d, kappa).unwrap());
    }

    #[test]
    fn barriers_decrease_with_distance(kappa in 0.01f64..10.0, s in 1e-3f64..0.99, gap in 1e-6f64..0.5) {
        let sk = kappa.sqrt();
        let (d1, d2) = (s * PI / sk, (s + gap).min(0.999) * PI / sk);
        prop_assume!(d2 > d1);
        prop_assert!(barrier_spherical(d2, kappa).unwrap() < barrier_spherical(d1, kappa).unwrap());
        prop_assert!(barrier_hyperbolic(d2, kappa).unwrap() < barrier_hyperbolic(d1, kappa).unwrap());
    }

    #[test]
    fn angle_profile_decreases_to_two_a_over_pi(a in 0.01f64..FRAC_PI_2 - 0.01, x in 0.01f64..3.0, gap in 1e-4f64..1.0) {
        let y = (x + gap).min(PI);
        prop_assert!(spherical_angle_profile(a, y).unwrap() < spherical_angle_profile(a, x).unwrap());
        let inf = spherical_angle_profile(a, PI).unwrap();
        prop_assert!(((inf - 2.0 * a / PI) / (2.0 * a / PI)).abs() < 1e-12);
    }

    #[test]
    fn factor_bounds_are_ordered(b in budget()) {
        for r in [
            center_factor_bounds(&b),
            boundary_factor_bounds(&b),
            distance_ratio_bounds(&b),
            boundary_distance_ratio_bounds(&b),
            arc_ratio_bounds(&b),
        ] {
            prop_assert!(0.0 < r.lower && r.lower <= r.upper, "{r:?}");
        }
        prop_assert!(theorem_bound(&b) >= 0.5 * b.product());
    }

    #[test]
    fn pass_flag_is_recomputable(measured in -10.0f64..10.0, bound in -10.0f64..10.0, tol in 0.0f64..1.0, upper: bool) {
        let r = if upper {
            VerificationRecord::upper("x", measured, bound, tol, "a <= b")
        } else {
            VerificationRecord::lower("x", measured, bound, tol, "a >= b")
        };
        prop_assert_eq!(r.passed, r.evaluate());
        prop_assert_eq!(r.passed, r.slack() >= 0.0);
        let mut report = VerificationReport::new(isoflat::report::ReportMeta {
            budget: CurvatureBudget::new(1.0, 1.0).unwrap(),
            h: 0.01,
            seed: 0,
            version: "0".into(),
            tolerance_slope: 0.01,
            metric: "flat".into(),
            near_degenerate: false,
            timestamp: None,
        });
        report.push(r.clone());
        let back = VerificationReport::from_json(&report.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.records[0].passed, back.records[0].evaluate());
    }
}

fn random_point(rng: &mut impl rand::Rng) -> Point {
    let r = 0.9 * rng.gen::<f64>().sqrt();
    Point::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

#[test]
fn distance_is_symmetric_and_satisfies_triangle_inequality() {
    use rand::SeedableRng;
    use rayon::prelude::*;
    let metric: Arc<dyn ConformalMetric> = make_perturbed(1.0, 0.1, Arc::new(GaussianBump)).unwrap();
    let solver = DistanceSolver::new(metric);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let triples: Vec<[Point; 3]> =
        (0..1000).map(|_| [random_point(&mut rng), random_point(&mut rng), random_point(&mut rng)]).collect();
    let (worst_triangle, worst_symmetry) = triples
        .par_iter()
        .map(|[p, q, r]| {
            let d = |a: Point, b: Point| solver.distance(a, b).unwrap();
            let (pq, qr, pr) = (d(*p, *q), d(*q, *r), d(*p, *r));
            (pr - pq - qr, (pq - d(*q, *p)).abs())
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    assert!(worst_triangle <= 1e-8, "triangle violation {worst_triangle:e}");
    assert!(worst_symmetry <= 1e-8, "asymmetry {worst_symmetry:e}");
}
