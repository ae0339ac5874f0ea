//! Local functionals: densities modulo total x-derivatives.

use std::fmt;

use crate::coeff::{Coeff, CoeffFn};
use crate::error::{Error, Result};
use crate::jet::{Element, Gen, Grading, JetMonomial};
use crate::operators::{Operator, OperatorId};
use crate::pencil::{DeformationCoeffs, Pencil};
use crate::rat::int;

/// A field variable of the variational calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldVar {
    U(usize),
    Theta(usize),
}

impl FieldVar {
    fn jet(self, s: usize) -> Gen {
        match self {
            FieldVar::U(i) => Gen::U(i, s),
            FieldVar::Theta(i) => Gen::Theta(i, s),
        }
    }
}

/// `sum_s (-d_x)^s d/d(var^s)`.
pub fn variational<C: Coeff>(a: &Element<C>, var: FieldVar) -> Element<C> {
    let top = a
        .terms()
        .flat_map(|(m, _)| m.generators())
        .filter_map(|g| match (g, var) {
            (Gen::U(i, s), FieldVar::U(j)) | (Gen::Theta(i, s), FieldVar::Theta(j)) if i == j => Some(s),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut out = Element::zero(a.n());
    for s in (0..=top).rev() {
        // Horner in -d_x
        out = out.dx().neg();
        out.add_assign(&a.partial(var.jet(s)));
    }
    out
}

/// The class of a density in `A / d_x A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional<C: Coeff> {
    density: Element<C>,
}

impl<C: Coeff> Functional<C> {
    pub fn new(density: Element<C>) -> Self {
        Functional { density }
    }

    pub fn density(&self) -> &Element<C> {
        &self.density
    }

    pub fn n(&self) -> usize {
        self.density.n()
    }

    pub fn variational(&self, var: FieldVar) -> Element<C> {
        variational(&self.density, var)
    }

    /// Part of the density free of jet variables.
    pub fn augmentation(&self) -> C {
        self.density.coeff_of(&JetMonomial::one())
    }

    /// All variational derivatives vanish and the augmentation is zero.
    pub fn is_zero(&self) -> bool {
        let n = self.n();
        let vars = (0..n).flat_map(|i| [FieldVar::U(i), FieldVar::Theta(i)]);
        self.augmentation().normalize(n).is_zero()
            && vars.into_iter().all(|v| self.variational(v).map_coeffs(|c| c.normalize(n)).is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Functional::new(self.density.add(&o.density))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Functional::new(self.density.sub(&o.density))
    }

    pub fn scale(&self, c: &crate::rat::Rat) -> Self {
        Functional::new(self.density.scale(c))
    }

    pub fn theta_degree(&self) -> Option<i64> {
        if self.density.is_zero() {
            return Some(0);
        }
        self.density.degree(Grading::Theta)
    }
}

impl<C: Coeff> fmt::Display for Functional<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int {}", self.density)
    }
}

/// `[A, B] = int (dA/dtheta_i dB/du^i + (-1)^p dA/du^i dB/dtheta_i)` with `p` the theta-degree of `A`.
pub fn schouten<C: Coeff>(a: &Functional<C>, b: &Functional<C>) -> Result<Functional<C>> {
    let p = a.theta_degree().ok_or(Error::NonHomogeneous)?;
    let sign = if p % 2 == 0 { int(1) } else { int(-1) };
    let mut out = Element::zero(a.n());
    for i in 0..a.n() {
        out.add_assign(&a.variational(FieldVar::Theta(i)).mul(&b.variational(FieldVar::U(i))));
        out.add_assign(&a.variational(FieldVar::U(i)).mul(&b.variational(FieldVar::Theta(i))).scale(&sign));
    }
    Ok(Functional::new(out))
}

/// The class of `D_lambda` applied to a representative density.
pub fn d_lambda_functional<C: Coeff>(p: &Pencil<C>, f: &Functional<C>) -> Result<Functional<C>> {
    Ok(Functional::new(Operator::new(p, OperatorId::DLambda)?.apply(f.density())?))
}

/// Central invariants with the check that each `c_i` depends on `u^i` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralInvariants {
    pub c: Vec<CoeffFn>,
    /// `depends_only_on_own[i]` is false when some `d_j c_i`, `j != i`, is nonzero.
    pub depends_only_on_own: Vec<bool>,
}

impl CentralInvariants {
    pub fn is_consistent(&self) -> bool {
        self.depends_only_on_own.iter().all(|&b| b)
    }

    /// Components flagged as depending on a foreign variable (0-based).
    pub fn violations(&self) -> Vec<usize> {
        (0..self.c.len()).filter(|&i| !self.depends_only_on_own[i]).collect()
    }
}

/// `c_i = (A^{ii}_{2,3;2} - u^i A^{ii}_{2,3;1}
///         + sum_{k != i} (A^{ki}_{1,2;2} - u^i A^{ki}_{1,2;1})^2 / (f^k (u^k - u^i))) / (3 (f^i)^2)`.
pub fn central_invariants(p: &Pencil<CoeffFn>, a: &DeformationCoeffs) -> Result<CentralInvariants> {
    let n = p.n();
    if a.n != n {
        return Err(Error::InvalidPencil(format!("deformation has {} components, pencil has {n}", a.n)));
    }
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let ui = CoeffFn::u(i);
        let mut x = a.get(2, 3, 2, i, i).sub(&ui.mul(&a.get(2, 3, 1, i, i)));
        for k in (0..n).filter(|&k| k != i) {
            let t = a.get(1, 2, 2, k, i).sub(&ui.mul(&a.get(1, 2, 1, k, i)));
            if t.is_zero() {
                continue;
            }
            let den = p.f(k).mul(&CoeffFn::u(k).sub(&ui));
            x = x.add(&t.mul(&t).checked_div(&den)?);
        }
        let fi = p.f(i);
        c.push(x.checked_div(&fi.mul(fi).scale(&int(3)))?);
    }
    let depends_only_on_own = (0..n).map(|i| (0..n).all(|j| j == i || !c[i].depends_on_u(j))).collect();
    Ok(CentralInvariants { c, depends_only_on_own })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::PencilData;
    use crate::rat::rat;

    type E = Element<CoeffFn>;

    fn flat(n: usize) -> Pencil<CoeffFn> {
        Pencil::concrete(&PencilData::flat(n)).unwrap()
    }

    #[test]
    fn euler_lagrange_examples() {
        let a = E::u(1, 0, 1).mul(&E::u(1, 0, 1)).scale(&rat(1, 2));
        assert_eq!(variational(&a, FieldVar::U(0)), E::u(1, 0, 2).neg());
        let b = E::theta(1, 0, 1).mul(&E::u(1, 0, 1));
        assert_eq!(variational(&b, FieldVar::Theta(0)), E::u(1, 0, 2).neg());
    }

    #[test]
    fn zero_functionals() {
        let a = E::u(1, 0, 0).mul(&E::theta(1, 0, 0)).dx();
        assert!(Functional::new(a).is_zero());
        assert!(Functional::new(E::u(1, 0, 1)).is_zero());
        assert!(!Functional::new(E::theta(1, 0, 0)).is_zero());
        assert!(!Functional::new(E::one(1)).is_zero());
    }

    #[test]
    fn schouten_examples() {
        let a = Functional::new(E::theta(2, 0, 0).mul(&E::theta(2, 1, 0)));
        let b = Functional::new(E::u(2, 0, 0));
        assert_eq!(schouten(&a, &b).unwrap(), Functional::new(E::theta(2, 1, 0)));
        assert!(schouten(&b, &b).unwrap().is_zero());
        let t = Functional::new(E::theta(1, 0, 0));
        assert!(schouten(&t, &t).unwrap().is_zero());
        let mixed = Functional::new(E::theta(1, 0, 0).add(&E::one(1)));
        assert_eq!(schouten(&mixed, &t), Err(Error::NonHomogeneous));
    }

    #[test]
    fn d_lambda_of_function() {
        // N = 1, f = 1: D_lambda c(u) = c'(u) (u - lambda) theta^1 + c'(u)/2 u^1 theta^0
        let p = flat(1);
        let c = CoeffFn::u(0).mul(&CoeffFn::u(0));
        let f = Functional::new(E::from_coeff(1, c.clone()));
        let out = d_lambda_functional(&p, &f).unwrap();
        let dc = c.partial(0, 1);
        let expect = E::theta(1, 0, 1)
            .mul_coeff(&dc.mul(&CoeffFn::u_minus_lambda(0)))
            .add(&E::u(1, 0, 1).mul(&E::theta(1, 0, 0)).mul_coeff(&dc.scale(&rat(1, 2))));
        assert!(out.sub(&Functional::new(expect)).is_zero());
        assert!(d_lambda_functional(&p, &Functional::new(E::zero(1))).unwrap().density().is_zero());
    }

    #[test]
    fn kdv_central_invariant() {
        let mut a = DeformationCoeffs::new(1);
        a.set(2, 3, 2, 0, 0, CoeffFn::from_rat(rat(1, 8))).unwrap();
        let c = central_invariants(&flat(1), &a).unwrap();
        assert_eq!(c.c, vec![CoeffFn::from_rat(rat(1, 24))]);
        assert!(c.is_consistent());
    }

    #[test]
    fn zero_deformation() {
        let c = central_invariants(&flat(2), &DeformationCoeffs::new(2)).unwrap();
        assert!(c.c.iter().all(|x| x.is_zero()));
        assert!(c.is_consistent());
    }

    #[test]
    fn foreign_dependence_is_flagged() {
        let mut a = DeformationCoeffs::new(2);
        a.set(1, 2, 2, 1, 0, CoeffFn::one()).unwrap();
        let c = central_invariants(&flat(2), &a).unwrap();
        let expect = CoeffFn::from_rat(rat(1, 3)).checked_div(&CoeffFn::u(1).sub(&CoeffFn::u(0))).unwrap();
        assert_eq!(c.c[0], expect);
        assert_eq!(c.violations(), vec![0]);
    }
}
