//! Property checks on randomized inputs.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use faberlab::cauchy::BoundaryFunction;
use faberlab::cauchy::{plemelj_values, singular_op};
use faberlab::conformal::{build_map, Direction};
use faberlab::curve::{geometric_radii, resample, CurveSpec};
use faberlab::faber::{faber_plus, FaberOptions};
use faberlab::riemann::{solve_nonhomogeneous, CoefficientPair, SolveOptions};
use faberlab::weights::{beta_exponents, weighted_norm, BetaOptions, WeightSpec};
use faberlab::C64;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radii_hit_both_ends(lo in 1e-4..0.5f64, span in 1.01..50.0f64, count in 2usize..64) {
        let hi = lo * span;
        let r = geometric_radii(lo, hi, count);
        prop_assert_eq!(r.len(), count);
        prop_assert_eq!(r[count - 1], hi);
        prop_assert!((r[0] - lo).abs() < 1e-15 * hi);
        prop_assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn plemelj_jump_reproduces_data(c in prop::collection::vec(cplx(), 7)) {
        let curve = resample(&CurveSpec::ellipse(2.0, 1.0), 128).unwrap();
        let f: Vec<C64> = curve.z.iter().map(|&z| (-3i32..=3).map(|n| c[(n + 3) as usize] * z.powi(n)).sum()).collect();
        let (plus, minus) = plemelj_values(&curve, &f).unwrap();
        for j in 0..f.len() {
            prop_assert!((plus[j] - minus[j] - f[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_operator_is_an_involution_up_to_quarter(c in prop::collection::vec(cplx(), 9)) {
        // S^2 = I/4 on smooth data.
        let curve = resample(&CurveSpec::ellipse(1.5, 1.0), 256).unwrap();
        let f: Vec<C64> = curve.z.iter().map(|&z| (-4i32..=4).map(|n| c[(n + 4) as usize] * z.powi(n)).sum()).collect();
        let s2 = singular_op(&curve, &singular_op(&curve, &f).unwrap()).unwrap();
        let scale = f.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for j in 0..f.len() {
            prop_assert!((s2[j] - 0.25 * f[j]).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn circle_faber_is_monomial(p in 1.1..6.0f64, n in 1usize..12) {
        let phi = build_map(&CurveSpec::circle(1.0), Direction::Phi, 16).unwrap();
        let f = faber_plus(&phi, p, n, FaberOptions::default()).unwrap();
        for (k, c) in f.coeffs.iter().enumerate() {
            let want = if k == n { 1.0 } else { 0.0 };
            prop_assert!((c - want).norm() < 1e-10);
        }
    }

    #[test]
    fn beta_is_affine_in_jump(p in 1.2..5.0f64, h in -2.0..2.0f64, a in -0.5..0.5f64) {
        let w = WeightSpec::new(vec![1.0], vec![a], p).unwrap();
        let rep = beta_exponents(&w, &[(1.0, h)], 2.0 * PI, BetaOptions::default()).unwrap();
        prop_assert_eq!(rep.points.len(), 1);
        let want = -p / (2.0 * PI) * h + a;
        prop_assert!((rep.points[0].beta - want).abs() < 1e-14);
    }

    #[test]
    fn constant_pair_residual_is_small(a in cplx(), b in cplx(), c in prop::collection::vec(cplx(), 5)) {
        prop_assume!(a.norm() > 0.2 && b.norm() > 0.2);
        let curve = resample(&CurveSpec::ellipse(2.0, 1.0), 256).unwrap();
        let pair = CoefficientPair::constant(&curve, a, b).unwrap();
        let f = BoundaryFunction::from_fn(&curve, |z| (-2i32..=2).map(|n| c[(n + 2) as usize] * z.powi(n)).sum());
        let opts = SolveOptions { skip_condition_alpha: true, ..Default::default() };
        let sol = solve_nonhomogeneous(&pair, &curve, &WeightSpec::unit(2.0), &f, -1, true, None, opts).unwrap();
        prop_assert!(sol.residual < 1e-10);
    }
}

#[test]
fn weighted_norm_of_constant_is_length_power() {
    let curve = resample(&CurveSpec::circle(1.0), 512).unwrap();
    let one = vec![C64::new(1.0, 0.0); curve.len()];
    for p in [1.0, 2.0, 3.5] {
        let n = weighted_norm(&one, &curve, &WeightSpec::unit(p), p).unwrap();
        assert_relative_eq!(n, (2.0 * PI).powf(1.0 / p), max_relative = 1e-6);
    }
}
