//! Polynomial-layer invariants: print/parse round-trip, differentiation
//! linearity, finite-difference agreement, Hessian symmetry, substitution
//! versus evaluation.

mod common;

use common::{random_point, random_poly, var_space};
use crosscert::{parse_poly, MultiPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn print_parse_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let space = var_space(n);
        let terms = rng.gen_range(1..10);
        let p = random_poly(&mut rng, &space, 6, terms);
        let printed = p.to_string();
        let back = parse_poly(&printed, &space).unwrap_or_else(|e| {
            panic!("reparse of `{printed}` failed: {e}");
        });
        assert_eq!(back, p, "round-trip changed `{printed}`");
    }
}

#[test]
fn differentiation_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let space = var_space(n);
        let p = random_poly(&mut rng, &space, 5, 6);
        let q = random_poly(&mut rng, &space, 5, 6);
        let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let combo = p.scale(a).add(&q.scale(b));
        for i in 0..n {
            let lhs = combo.differentiate(i);
            let rhs = p
                .differentiate(i)
                .scale(a)
                .add(&q.differentiate(i).scale(b));
            // termwise: same support, coefficients equal up to the one
            // reordered multiply
            assert_eq!(lhs.num_terms(), rhs.num_terms());
            for (e, c) in lhs.terms() {
                let rc = rhs.coeff(e);
                assert!(
                    (c - rc).abs() <= 1e-12 * c.abs().max(rc.abs()).max(1e-300),
                    "coeff mismatch {c} vs {rc}"
                );
            }
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let h = 1e-5;
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let space = var_space(n);
        let f = random_poly(&mut rng, &space, 4, 6);
        let grad = f.gradient();
        let x = random_point(&mut rng, n, 2.0);
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.eval(&xp).unwrap() - f.eval(&xm).unwrap()) / (2.0 * h);
            let g = grad[i].eval(&x).unwrap();
            assert!(
                (fd - g).abs() <= 1e-5 * g.abs().max(1.0),
                "fd {fd} vs gradient {g}"
            );
        }
    }
}

#[test]
fn hessian_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let space = var_space(n);
        let f = random_poly(&mut rng, &space, 6, 8);
        let h = f.hessian();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(h[i][j], h[j][i]);
            }
        }
    }
}

#[test]
fn full_specialization_equals_eval_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let space = var_space(n);
        let f = random_poly(&mut rng, &space, 5, 7);
        let x = random_point(&mut rng, n, 2.0);
        let names: Vec<&str> = (0..n).map(|i| space.name(i)).collect();
        let specialized = f.specialize(&names, &x).unwrap();
        assert_eq!(specialized.num_vars(), 0);
        let via_specialize = specialized.eval(&[]).unwrap();
        let via_eval = f.eval(&x).unwrap();
        assert_eq!(via_specialize.to_bits(), via_eval.to_bits());
    }
}

#[test]
fn partial_specialization_commutes_with_eval() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..200 {
        let space = var_space(4);
        let f = random_poly(&mut rng, &space, 4, 8);
        let vals: Vec<f64> = random_point(&mut rng, 2, 1.5);
        let partial = f.specialize(&["x2", "x4"], &vals).unwrap();
        assert_eq!(
            partial.space().names(),
            &["x1".to_string(), "x3".to_string()]
        );
        let w = random_point(&mut rng, 2, 1.5);
        let merged = vec![w[0], vals[0], w[1], vals[1]];
        let a = partial.eval(&w).unwrap();
        let b = f.eval(&merged).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn degenerate_calculus_cases() {
    let space = var_space(2);
    let zero = parse_poly("0", &space).unwrap();
    assert_eq!(zero.eval(&[3.7, -1.2]).unwrap(), 0.0);
    assert_eq!(zero.degree(), -1);

    let seven = parse_poly("7", &space).unwrap();
    for g in seven.gradient() {
        assert!(g.is_zero());
    }

    let linear = parse_poly("3*x1 - x2 + 2", &space).unwrap();
    for row in linear.hessian() {
        for entry in row {
            assert!(entry.is_zero());
        }
    }
}

#[test]
fn specialize_nothing_is_identity() {
    let space = var_space(3);
    let f = parse_poly("x1^2*x3 - 2*x2 + 5", &space).unwrap();
    let same = f.specialize(&[], &[]).unwrap();
    assert_eq!(same, f);
}

#[test]
fn elliptic_joint_specialization() {
    // fix (x, y) = (1, 0) in the quartic-family joint: the residual is
    // 1 - B, a hyperplane in the remaining parameters.
    let space = crosscert::VarSpace::new(vec!["x", "y", "A", "B", "M", "N"]).unwrap();
    let joint = parse_poly("M*y^3 - N*y^2 + A*y - B + x^2", &space).unwrap();
    let t = joint.specialize(&["x", "y"], &[1.0, 0.0]).unwrap();
    let expected = MultiPoly::from_terms(
        t.space(),
        vec![(vec![0, 1, 0, 0], -1.0), (vec![0, 0, 0, 0], 1.0)],
    )
    .unwrap();
    assert_eq!(t, expected);
}
