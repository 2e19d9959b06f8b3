//! Cross-geometry grading checks that are too heavy for the unit suites:
//! the quadraticity verdict flips between the two test geometries, and the
//! closed-form inner products keep matching the series route at level 2.

use num_complex::Complex64;
use qtheta::bimodule::{
    embed_holomorphic, holo_inner, make_geometry, rieffel_inner, HolomorphicVector,
    SeriesOptions, Side,
};
use qtheta::qarith::{IntMatrix2, QuadraticIrrational};
use qtheta::rings::{polishchuk_predicate, quadraticity_check, RingContext};

const TAU_I: Complex64 = Complex64::new(0.0, 1.0);

fn theta21() -> QuadraticIrrational {
    QuadraticIrrational::new(-1, 1, 10, 21).unwrap()
}

fn theta56() -> QuadraticIrrational {
    QuadraticIrrational::new(-1, 1, 6, 5).unwrap()
}

fn g21() -> IntMatrix2 {
    IntMatrix2::new(2, 1, 5, 3)
}

fn g95() -> IntMatrix2 {
    IntMatrix2::new(2, 1, 9, 5)
}

#[test]
fn the_wide_stabilizer_ring_is_quadratic() {
    assert!(polishchuk_predicate(&g95(), 1), "c = 9 >= a + d + 1 = 8");
    let ctx = RingContext::new(&g95(), &theta56(), TAU_I, 1e-14, 3).unwrap();
    let report = quadraticity_check(&ctx).unwrap();
    assert_eq!(report.dim_k2, 18, "c_1^2 - c_2 = 81 - 63");
    assert_eq!(report.dim_k3, 297, "c_1^3 - c_3 = 729 - 432");
    assert_eq!(report.span_rank, 297);
    assert!(report.quadratic);
}

#[test]
fn the_narrow_stabilizer_fails_the_quadratic_bound() {
    assert!(polishchuk_predicate(&g21(), 0), "c = 5 >= a + d = 5");
    assert!(!polishchuk_predicate(&g21(), 1), "c = 5 < a + d + 1 = 6");
}

#[test]
fn closed_inner_products_match_the_series_route_at_level_two() {
    let geom = make_geometry(&g21(), &theta21(), TAU_I, 2).unwrap();
    let opts = SeriesOptions::with_tol(1e-14);
    let mut worst = 0f64;
    for (i, j) in [(0i64, 0i64), (3, 7), (24, 1)] {
        let vi = HolomorphicVector::delta(geom.clone(), i);
        let vj = HolomorphicVector::delta(geom.clone(), j);
        let closed = holo_inner(&vi, &vj, &opts).unwrap();
        let series = rieffel_inner(
            &embed_holomorphic(&vi, 1e-14),
            &embed_holomorphic(&vj, 1e-14),
            &geom,
            Side::Left,
            &opts,
        )
        .unwrap();
        worst = worst.max(closed.max_abs_diff(&series));
    }
    assert!(worst < 1e-9, "level-2 series route deviates by {worst:.3e}");
}
