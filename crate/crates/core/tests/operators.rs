use thetacalc::algebra::{Monomial, ThetaPoly};
use thetacalc::cli::commands::sweep_operators;
use thetacalc::coeff::{rat, CoeffExpr};
use thetacalc::operators::{
    commutator_with_derivative, graded_commutator, is_total_derivative, make_d1, make_d2, make_d_lambda,
    variational_derivative_theta, variational_derivative_u, EvolutionaryOp,
};
use thetacalc::sample::Sampler;

fn g() -> CoeffExpr {
    CoeffExpr::func("g", 0)
}

#[test]
fn sweep_small_degrees() {
    let r = sweep_operators(&make_d1(&g()), &make_d2(&g()), 3, 4);
    assert!(r.passed(), "{}", r.to_text());
    assert_eq!(r.checks.len(), 16);
}

#[test]
fn d_lambda_squares_to_zero() {
    let dl = make_d_lambda(&g());
    let mut rng = Sampler::new(3);
    for d in 0..=4 {
        for _ in 0..10 {
            let a = rng.poly(d, 4, 3);
            let r = graded_commutator(&dl, &dl, &a);
            assert!(r.is_zero(), "[D_l, D_l] on {a}: {r}");
            assert!(commutator_with_derivative(&dl, &a).is_zero());
        }
    }
}

/// A derivation with the sign of the θ-characteristic flipped must break the sweep.
#[test]
fn sign_bug_is_detected() {
    let d1 = make_d1(&g());
    let bad = EvolutionaryOp::new(d1.x_u().clone(), -d1.x_theta(), true);
    let r = sweep_operators(&bad, &make_d2(&g()), 2, 3);
    assert!(!r.passed());
    assert!(r.failures().any(|c| c.name.starts_with("operators/d1_squared")));
}

#[test]
fn derivation_rule() {
    let d = make_d2(&g());
    let mut rng = Sampler::new(4);
    for sd in 0..=2u32 {
        let basis: Vec<_> = Monomial::enumerate(2, 3).into_iter().filter(|m| m.super_degree() == sd).collect();
        for _ in 0..15 {
            let a = rng.combination(&basis, 3, false);
            let b = rng.poly(3, 3, 3);
            // D(ab) = D(a)b + (−1)^|a| a D(b)
            let left = d.apply(&(&a * &b));
            let tail = &a * &d.apply(&b);
            let head = &d.apply(&a) * &b;
            let right = if sd % 2 == 1 { &head - &tail } else { &head + &tail };
            assert_eq!(left, right, "Leibniz on {a} * {b}");
        }
    }
}

#[test]
fn euler_operators_kill_total_derivatives() {
    let mut rng = Sampler::new(5);
    for d in 0..=5 {
        for _ in 0..15 {
            let a = rng.poly(d, 4, 3);
            let da = a.total_derivative();
            assert!(variational_derivative_u(&da).is_zero());
            assert!(variational_derivative_theta(&da).is_zero());
        }
    }
}

#[test]
fn exactness_oracle() {
    let mut rng = Sampler::new(6);
    let mut n = 0;
    while n < 200 {
        let a = rng.poly(n % 6, 4, 3);
        let da = a.total_derivative();
        if da.is_zero() {
            continue;
        }
        let r = is_total_derivative(&da).unwrap();
        assert!(r.exact, "{da}");
        let w = r.witness.expect("witness");
        assert_eq!(w.total_derivative(), da);
        n += 1;
    }
    assert!(!is_total_derivative(&ThetaPoly::thetas(&[0, 1])).unwrap().exact);
    // u u¹ θ is not exact: δ/δθ = u u¹
    let m = ThetaPoly::u_jet(0) * ThetaPoly::u_jet(1) * ThetaPoly::theta(0);
    assert!(!is_total_derivative(&m).unwrap().exact);
}

#[test]
fn constant_density_is_an_obstruction() {
    assert!(matches!(is_total_derivative(&ThetaPoly::one()), Err(thetacalc::Error::ConstantObstruction(_))));
}

#[test]
fn hydrodynamic_characteristics() {
    let d = make_d1(&g());
    let half = ThetaPoly::from_coeff(CoeffExpr::func("g", 1).scale(&rat(1, 2)));
    assert_eq!(d.x_theta(), &(half * ThetaPoly::thetas(&[0, 1])));
    assert!(d.is_odd());
    let m = Monomial::u(1);
    assert_eq!(d.apply(&ThetaPoly::monomial(m)), d.x_u().total_derivative());
}
