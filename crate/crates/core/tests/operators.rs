use bihamo::jet::{slice_basis, Element, Grading};
use bihamo::operators::*;
use bihamo::pencil::{Pencil, PencilData};
use bihamo::rat::rat;
use bihamo::{Coeff, CoeffFn, FormalScalar};

type E = Element<CoeffFn>;

fn flat(n: usize) -> Pencil<CoeffFn> {
    Pencil::concrete(&PencilData::flat(n)).unwrap()
}

/// Diagonal metric with polynomial square roots and vanishing rotation coefficients.
fn square_metric() -> Pencil<CoeffFn> {
    let u = CoeffFn::u;
    let data = PencilData::concrete(vec![u(0).mul(&u(0)), CoeffFn::from_int(4)], Some(vec![u(0), CoeffFn::from_int(2)])).unwrap();
    Pencil::concrete(&data).unwrap()
}

#[test]
fn delta_minus_one_on_first_jet() {
    let out = apply(&flat(1), OperatorId::DeltaMinus1, &E::u(1, 0, 1)).unwrap();
    let want = E::theta(1, 0, 2).mul_coeff(&CoeffFn::u_minus_lambda(0));
    assert_eq!(out, want);
}

#[test]
fn theta_one_part_of_first_odd_jet() {
    let p = flat(1);
    let out = apply(&p, OperatorId::Delta0Minus1, &E::theta(1, 0, 1)).unwrap();
    assert_eq!(out, E::theta(1, 0, 0).mul(&E::theta(1, 0, 2)).scale(&rat(1, 2)));
    assert!(split_check_theta1(&p, &E::theta(1, 0, 1)).unwrap().is_zero());
    // no theta^1 factor: nothing to lower
    let x = E::theta(1, 0, 0).mul(&E::u(1, 0, 2));
    assert!(split_check_theta1(&p, &x).unwrap().is_zero());
}

#[test]
fn splits_on_mixed_elements() {
    let p = square_metric();
    for m in slice_basis(2, 3, 2) {
        let a = E::monomial(2, m, CoeffFn::u(1).add(&CoeffFn::lambda()));
        assert!(split_check_degu(&p, &a).unwrap().passed());
        assert!(split_check_theta1(&p, &a).unwrap().is_zero());
    }
    assert!(split_check_degu(&p, &E::one(2)).unwrap().passed());
}

#[test]
fn every_differential_shifts_bidegree_by_one() {
    let p = square_metric();
    let ids = [
        OperatorId::DLambda,
        OperatorId::DeltaMinus1,
        OperatorId::Delta0,
        OperatorId::Dhat(0),
        OperatorId::Di(1),
        OperatorId::DiTilde(0),
        OperatorId::Delta01,
        OperatorId::Delta00,
        OperatorId::Delta0Minus1,
    ];
    for id in ids {
        assert_eq!(id.bidegree_shift(), (1, 1));
        let op = Operator::new(&p, id).unwrap();
        for m in slice_basis(1, 2, 2) {
            let out = op.apply(&E::monomial(2, m.clone(), CoeffFn::one())).unwrap();
            for (k, _) in out.terms() {
                assert_eq!((k.theta_degree(), k.standard_degree()), (2, 3), "{id} {m} -> {k}");
            }
        }
    }
}

#[test]
fn conjugation_residual_examples() {
    // a single component leaves nothing behind
    let one = flat(1);
    let r = conjugation_residual(&one, &E::theta(1, 0, 2)).unwrap();
    assert!(r.residual.is_zero());
    assert!(conjugation_residual(&one, &E::zero(1)).unwrap().residual.is_zero());
    // vanishing rotation coefficients: every leftover term is trivial in cohomology
    let p = square_metric();
    for i in 0..2 {
        let r = conjugation_residual(&p, &E::theta(2, i, 2)).unwrap();
        assert!(r.passed(), "{}", r.unexplained);
    }
}

#[test]
fn formal_square_matches_double_application() {
    let p = Pencil::<FormalScalar>::formal(2).unwrap();
    let d = Operator::new(&p, OperatorId::DLambda).unwrap();
    let sq = Square::new(&d).unwrap();
    let a = Element::<FormalScalar>::theta(2, 0, 1).mul(&Element::u(2, 1, 1));
    assert!(sq.apply(&a).unwrap().is_zero());
    assert!(Square::new(&Operator::new(&p, OperatorId::Euler(0)).unwrap()).is_err());
}

#[test]
fn d_lambda_is_homogeneous_for_constant_metric() {
    let p = flat(2);
    let d = Operator::new(&p, OperatorId::DLambda).unwrap();
    let x = E::u(2, 0, 1).mul(&E::theta(2, 1, 0)).mul_coeff(&CoeffFn::u(1));
    let out = d.apply(&x).unwrap();
    assert_eq!(out.degree(Grading::Standard), Some(2));
    assert_eq!(out.degree(Grading::Theta), Some(2));
}
