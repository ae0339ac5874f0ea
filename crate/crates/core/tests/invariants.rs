use bihamo::functionals::{schouten, variational, FieldVar, Functional};
use bihamo::jet::{slice_basis, Element, Gen, Grading, JetMonomial};
use bihamo::linalg::SparseMatrix;
use bihamo::rat::{int, Rat};
use bihamo::{Coeff, CoeffFn, FormalScalar};
use proptest::prelude::*;
use std::collections::BTreeMap;

const N: usize = 2;
type E = Element<CoeffFn>;

fn coeff() -> impl Strategy<Value = CoeffFn> {
    (-3i64..=3, -2i64..=2, -2i64..=2, any::<bool>()).prop_map(|(a, b, c, lam)| {
        let mut x = CoeffFn::from_int(a).add(&CoeffFn::u(0).scale(&int(b))).add(&CoeffFn::u(1).mul(&CoeffFn::u(0)).scale(&int(c)));
        if lam {
            x = x.add(&CoeffFn::lambda());
        }
        x
    })
}

/// Random element of the slice `(p, d)`.
fn slice(p: usize, d: usize) -> impl Strategy<Value = E> {
    let basis = slice_basis(p, d, N);
    let k = basis.len().clamp(1, 4);
    proptest::collection::vec((0..basis.len().max(1), coeff()), 1..=k).prop_map(move |terms| {
        let mut x = E::zero(N);
        for (i, c) in terms {
            if let Some(m) = basis.get(i) {
                x.add_assign(&E::monomial(N, m.clone(), c));
            }
        }
        x
    })
}

/// Random element homogeneous in theta-degree, any standard degree up to 3.
fn homogeneous(p: usize) -> impl Strategy<Value = E> {
    (p..=3).prop_flat_map(move |d| slice(p, d))
}

fn any_element() -> impl Strategy<Value = E> {
    proptest::collection::vec((0usize..=2).prop_flat_map(homogeneous), 1..=2).prop_map(|xs| xs.iter().fold(E::zero(N), |a, b| a.add(b)))
}

fn parity(x: &E) -> i64 {
    x.degree(Grading::Theta).unwrap_or(0) % 2
}

fn generator() -> impl Strategy<Value = Gen> {
    prop_oneof![(0..N, 0usize..3).prop_map(|(i, s)| Gen::U(i, s)), (0..N, 0usize..3).prop_map(|(i, s)| Gen::Theta(i, s))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graded_commutativity(p in 0usize..=3, q in 0usize..=3, seed in any::<u64>()) {
        let (a, b) = sample(p, q, seed);
        let sign = if (p * q) % 2 == 0 { int(1) } else { int(-1) };
        prop_assert_eq!(a.mul(&b), b.mul(&a).scale(&sign));
    }

    #[test]
    fn product_is_associative(a in any_element(), b in any_element(), c in any_element()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn total_derivative_is_even_derivation(a in any_element(), b in any_element()) {
        prop_assert_eq!(a.mul(&b).dx(), a.dx().mul(&b).add(&a.mul(&b.dx())));
    }

    #[test]
    fn partials_are_graded_derivations(pa in 1usize..=2, seed in any::<u64>(), b in any_element(), g in generator()) {
        let a = sample(pa, 0, seed).0;
        let lhs = a.mul(&b).partial(g);
        let odd = matches!(g, Gen::Theta(..)) && parity(&a) == 1;
        let second = a.mul(&b.partial(g));
        let rhs = a.partial(g).mul(&b).add(&if odd { second.neg() } else { second });
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn variational_kills_total_derivatives(a in any_element(), i in 0..N, odd in any::<bool>()) {
        let v = if odd { FieldVar::Theta(i) } else { FieldVar::U(i) };
        prop_assert!(variational(&a.dx(), v).is_zero());
    }

    #[test]
    fn schouten_graded_symmetry(p in 0usize..=2, q in 0usize..=2, seed in any::<u64>()) {
        let (a, b) = sample(p, q, seed);
        let (fa, fb) = (Functional::new(a), Functional::new(b));
        let ab = schouten(&fa, &fb).unwrap();
        let ba = schouten(&fb, &fa).unwrap();
        let sign = if (p * q) % 2 == 0 { int(1) } else { int(-1) };
        prop_assert!(ab.sub(&ba.scale(&sign)).is_zero(), "[A,B] = {} [B,A] = {}", ab, ba);
    }

    #[test]
    fn formal_mixed_partials_commute(x in formal(), k in 0usize..3, l in 0usize..3) {
        prop_assert!(x.mixed_partial_check(k, l, 3), "{}", x);
    }

    #[test]
    fn rank_ignores_row_and_column_order(cols in matrix(), rows in any::<u64>(), flip in any::<bool>()) {
        let m = build(&cols, 5, |i| i);
        let perm = permutation(5, rows);
        let mut shuffled: Vec<Vec<(usize, i64)>> = cols.clone();
        if flip {
            shuffled.reverse();
        }
        let q = build(&shuffled, 5, |i| perm[i]);
        prop_assert_eq!(m.rank(), q.rank());
    }
}

/// A pair of homogeneous elements of theta-degrees `p`, `q`.
fn sample(p: usize, q: usize, seed: u64) -> (E, E) {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &bytes));
    let a = homogeneous(p).new_tree(&mut runner).unwrap().current();
    let b = homogeneous(q).new_tree(&mut runner).unwrap().current();
    (a, b)
}

fn formal() -> impl Strategy<Value = FormalScalar> {
    let atom = prop_oneof![
        (0usize..3).prop_map(FormalScalar::u),
        (0usize..3).prop_map(FormalScalar::h),
        (0usize..3).prop_map(FormalScalar::h_inv),
        (0usize..3, 0usize..3).prop_filter("off diagonal", |(i, j)| i != j).prop_map(|(i, j)| FormalScalar::gamma(i, j)),
        (-2i64..=2).prop_map(FormalScalar::from_int),
    ];
    proptest::collection::vec(proptest::collection::vec(atom, 1..=3), 1..=3).prop_map(|terms| {
        terms.iter().fold(FormalScalar::zero(), |acc, t| acc.add(&t.iter().fold(FormalScalar::one(), |p, x| p.mul(x))))
    })
}

fn matrix() -> impl Strategy<Value = Vec<Vec<(usize, i64)>>> {
    proptest::collection::vec(proptest::collection::vec((0usize..5, -3i64..=3), 0..4), 1..7)
}

fn build(cols: &[Vec<(usize, i64)>], rows: usize, at: impl Fn(usize) -> usize) -> SparseMatrix {
    let mut m = SparseMatrix::new(rows);
    for c in cols {
        let mut col: BTreeMap<usize, Rat> = BTreeMap::new();
        for &(i, v) in c {
            *col.entry(at(i)).or_insert_with(|| int(0)) += int(v);
        }
        col.retain(|_, v| *v != int(0));
        m.push_col(col);
    }
    m
}

fn permutation(n: usize, mut seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        p.swap(i, (seed >> 33) as usize % (i + 1));
    }
    p
}

#[test]
fn derivative_of_a_single_jet() {
    let x = E::monomial(N, JetMonomial::ujet(0, 1), CoeffFn::one());
    assert_eq!(x.dx(), E::u(N, 0, 2));
}
