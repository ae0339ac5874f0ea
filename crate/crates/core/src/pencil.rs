//! Diagonal pencil data `g1 = diag(f^i)`, `g2 = diag(u^i f^i)` in canonical
//! coordinates, rotation coefficients and the `Psi` rescaling.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::{Coeff, CoeffFn};
use crate::error::{Error, Result};
use crate::formal::FormalScalar;
use crate::jet::{Element, JetMonomial};
use crate::rat::rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Concrete,
    Formal,
}

/// User-facing pencil description. In formal mode `f` is ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PencilData {
    pub n: usize,
    pub mode: Mode,
    pub f: Vec<CoeffFn>,
    pub sqrt_witness: Option<Vec<CoeffFn>>,
}

impl PencilData {
    pub fn concrete(f: Vec<CoeffFn>, sqrt_witness: Option<Vec<CoeffFn>>) -> Result<Self> {
        let n = f.len();
        if n == 0 {
            return Err(Error::InvalidPencil("at least one component required".into()));
        }
        if let Some(i) = f.iter().position(|x| x.is_zero()) {
            return Err(Error::InvalidPencil(format!("f{} is zero", i + 1)));
        }
        if let Some(h) = &sqrt_witness {
            if h.len() != n {
                return Err(Error::InvalidPencil(format!("expected {n} witnesses, got {}", h.len())));
            }
            for (i, (hi, fi)) in h.iter().zip(&f).enumerate() {
                if hi.mul(hi) != *fi {
                    return Err(Error::InvalidPencil(format!("h{0}^2 differs from f{0}", i + 1)));
                }
            }
        }
        Ok(PencilData { n, mode: Mode::Concrete, f, sqrt_witness })
    }

    /// `f^i = 1` for every component, with witnesses `h_i = 1`.
    pub fn flat(n: usize) -> Self {
        let one = vec![CoeffFn::one(); n];
        PencilData { n, mode: Mode::Concrete, f: one.clone(), sqrt_witness: Some(one) }
    }

    pub fn formal(n: usize) -> Self {
        PencilData { n, mode: Mode::Formal, f: vec![], sqrt_witness: None }
    }

    /// Constant metric `f^i = c_i`; witnesses only when every `c_i` is a square.
    pub fn constant(c: &[crate::rat::Rat]) -> Result<Self> {
        PencilData::concrete(c.iter().map(|x| CoeffFn::from_rat(x.clone())).collect(), None)
    }

    /// Largest total u-degree among the `f^i`, if all are polynomials.
    pub fn max_f_degree(&self) -> Result<i64> {
        let mut m = 0;
        for fi in &self.f {
            if !fi.is_polynomial() || fi.lambda_degree() > 0 {
                return Err(Error::UnsupportedCoefficient(fi.to_string()));
            }
            m = m.max(fi.u_degree());
        }
        Ok(m)
    }
}

/// Precomputed pencil quantities over a coefficient ring.
#[derive(Clone, Debug)]
pub struct Pencil<C: Coeff> {
    n: usize,
    f: Vec<C>,
    /// `df[k][i] = d_k f^i`.
    df: Vec<Vec<C>>,
    /// `l[i][j] = d_i f^j / f^j`.
    l: Vec<Vec<C>>,
    h: Option<Vec<C>>,
    h_inv: Option<Vec<C>>,
    /// `None` where a witness would be needed but is absent.
    gamma: Vec<Vec<Option<C>>>,
}

impl<C: Coeff> Pencil<C> {
    fn build(n: usize, f: Vec<C>, h: Option<Vec<C>>, h_inv: Option<Vec<C>>, gamma_of: impl Fn(usize, usize, &C) -> Option<C>) -> Result<Self> {
        let df: Vec<Vec<C>> = (0..n).map(|k| (0..n).map(|i| f[i].partial(k, n)).collect()).collect();
        let mut l = vec![vec![C::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                l[i][j] = df[i][j].checked_div(&f[j])?;
            }
        }
        let mut gamma = vec![vec![Some(C::zero()); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    gamma[i][j] = if df[i][j].is_zero() { Some(C::zero()) } else { gamma_of(i, j, &df[i][j]) };
                }
            }
        }
        Ok(Pencil { n, f, df, l, h, h_inv, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self, i: usize) -> &C {
        &self.f[i]
    }

    /// `d_k f^i`.
    pub fn df(&self, k: usize, i: usize) -> &C {
        &self.df[k][i]
    }

    /// `d_i f^j / f^j`.
    pub fn l(&self, i: usize, j: usize) -> &C {
        &self.l[i][j]
    }

    pub fn has_witness(&self) -> bool {
        self.h.is_some()
    }

    pub fn h(&self, i: usize) -> Result<&C> {
        self.h.as_ref().map(|h| &h[i]).ok_or(Error::MissingSqrtWitness(i))
    }

    pub fn h_inv(&self, i: usize) -> Result<&C> {
        self.h_inv.as_ref().map(|h| &h[i]).ok_or(Error::MissingSqrtWitness(i))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }

    /// Rotation coefficient `gamma_ij = H_i^{-1} d_i H_j`.
    pub fn gamma(&self, i: usize, j: usize) -> Result<C> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::EqualIndices(i));
        }
        self.gamma[i][j].clone().ok_or(Error::MissingSqrtWitness(i))
    }

    /// True when every rotation coefficient vanishes.
    pub fn gamma_vanishes(&self) -> bool {
        self.gamma.iter().flatten().all(|g| g.as_ref().is_some_and(|g| g.is_zero()))
    }

    /// Rescaling `u^{i,s} -> h_i^s u^{i,s}`, `theta_i^s -> h_i^{s+1} theta_i^s`.
    pub fn psi(&self, a: &Element<C>, inverse: bool) -> Result<Element<C>> {
        let hs = if inverse { self.h_inv.as_ref() } else { self.h.as_ref() }.ok_or(Error::MissingSqrtWitness(0))?;
        let mut pows: BTreeMap<(usize, usize), C> = BTreeMap::new();
        let mut pow = |i: usize, e: usize| -> C {
            pows.entry((i, e))
                .or_insert_with(|| {
                    let mut acc = C::one();
                    for _ in 0..e {
                        acc = acc.mul(&hs[i]);
                    }
                    acc
                })
                .clone()
        };
        let mut out = Element::zero(self.n);
        for (m, c) in a.terms() {
            let mut k = c.clone();
            for &((i, s), e) in m.ujets() {
                k = k.mul(&pow(i, s * e as usize));
            }
            for &(i, s) in m.thetas() {
                k = k.mul(&pow(i, s + 1));
            }
            out.add_term(m.clone(), k);
        }
        Ok(out)
    }

    /// `theta_bar_i^0 = theta_i^0 + 2 sum_{j != i} (u^j - u^i) gamma_ji theta_j^0`.
    pub fn theta_bar(&self, i: usize) -> Result<Element<C>> {
        self.check_index(i)?;
        let n = self.n;
        let mut out = Element::theta(n, i, 0);
        for j in (0..n).filter(|&j| j != i) {
            let c = C::u(j).sub(&C::u(i)).mul(&self.gamma(j, i)?).scale(&rat(2, 1));
            out.add_term(JetMonomial::theta(j, 0), c);
        }
        Ok(out)
    }

    /// `theta_tilde_i^0 = f^i theta_i^0 + sum_{j != i} (u^i - u^j) f^j (d_j f^i / f^i) theta_j^0`.
    pub fn theta_tilde(&self, i: usize) -> Element<C> {
        let n = self.n;
        let mut out = Element::monomial(n, JetMonomial::theta(i, 0), self.f[i].clone());
        for j in (0..n).filter(|&j| j != i) {
            let c = C::u(i).sub(&C::u(j)).mul(&self.f[j]).mul(&self.l[j][i]);
            out.add_term(JetMonomial::theta(j, 0), c);
        }
        out
    }

    pub fn validate_ferapontov(&self) -> Result<FerapontovReport<C>> {
        let n = self.n;
        let mut residuals = Vec::new();
        let g = |i, j| self.gamma(i, j);
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                for k in (0..n).filter(|&k| k != i && k != j) {
                    let v = g(i, j)?.partial(k, n).sub(&g(i, k)?.mul(&g(k, j)?));
                    residuals.push(FerapontovResidual { family: Family::CrossDerivative, indices: vec![i, j, k], value: v });
                }
            }
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let mut s = C::zero();
                let mut t = C::zero();
                for k in (0..n).filter(|&k| k != i && k != j) {
                    let p = g(k, i)?.mul(&g(k, j)?);
                    t = t.add(&C::u(k).mul(&p));
                    s = s.add(&p);
                }
                let di = g(i, j)?.partial(i, n);
                let dj = g(j, i)?.partial(j, n);
                let trace = di.add(&dj).add(&s);
                residuals.push(FerapontovResidual { family: Family::Trace, indices: vec![i, j], value: trace });
                let weighted = C::u(i)
                    .mul(&di)
                    .add(&C::u(j).mul(&dj))
                    .add(&t)
                    .add(&g(i, j)?.add(&g(j, i)?).scale(&rat(1, 2)));
                residuals.push(FerapontovResidual { family: Family::WeightedTrace, indices: vec![i, j], value: weighted });
            }
        }
        Ok(FerapontovReport { residuals })
    }
}

impl Pencil<CoeffFn> {
    pub fn concrete(p: &PencilData) -> Result<Self> {
        if p.mode != Mode::Concrete {
            return Err(Error::RingMismatch);
        }
        let n = p.n;
        let h = p.sqrt_witness.clone();
        let h_inv = match &h {
            Some(h) => Some(h.iter().map(|x| CoeffFn::one().checked_div(x)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let hh = h.clone();
        Pencil::build(n, p.f.clone(), h, h_inv, move |i, j, dif| {
            // -1/2 h_i / h_j^3 d_i f^j
            let h = hh.as_ref()?;
            let hj3 = h[j].mul(&h[j]).mul(&h[j]);
            let r = h[i].mul(dif).checked_div(&hj3).ok()?;
            Some(r.scale(&rat(-1, 2)))
        })
    }
}

impl Pencil<FormalScalar> {
    /// Formal pencil: `f^i = H_i^{-2}`, `h_i = H_i^{-1}`.
    pub fn formal(n: usize) -> Result<Self> {
        let f = (0..n).map(|i| FormalScalar::h_pow(i, -2)).collect();
        let h = (0..n).map(FormalScalar::h_inv).collect();
        let h_inv = (0..n).map(FormalScalar::h).collect();
        Pencil::build(n, f, Some(h), Some(h_inv), |i, j, _| Some(FormalScalar::gamma(i, j)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `d_k gamma_ij = gamma_ik gamma_kj`.
    CrossDerivative,
    /// `d_i gamma_ij + d_j gamma_ji + sum_k gamma_ki gamma_kj = 0`.
    Trace,
    /// `u^i d_i gamma_ij + u^j d_j gamma_ji + sum_k u^k gamma_ki gamma_kj + (gamma_ij + gamma_ji)/2 = 0`.
    WeightedTrace,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::CrossDerivative => "dgammaijk",
            Family::Trace => "dgammaij",
            Family::WeightedTrace => "udgamma",
        })
    }
}

#[derive(Clone, Debug)]
pub struct FerapontovResidual<C> {
    pub family: Family,
    pub indices: Vec<usize>,
    pub value: C,
}

#[derive(Clone, Debug)]
pub struct FerapontovReport<C> {
    pub residuals: Vec<FerapontovResidual<C>>,
}

impl<C: Coeff> FerapontovReport<C> {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.value.is_zero())
    }

    pub fn failures(&self) -> impl Iterator<Item = &FerapontovResidual<C>> {
        self.residuals.iter().filter(|r| !r.value.is_zero())
    }
}

/// Deformation coefficients `A^{ij}_{k,l;a}`; absent entries are zero.
/// Keys are `(k, l, a, i, j)` with `k, l, a` as written and `i, j` 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeformationCoeffs {
    pub n: usize,
    entries: BTreeMap<(usize, usize, usize, usize, usize), CoeffFn>,
}

impl DeformationCoeffs {
    pub fn new(n: usize) -> Self {
        DeformationCoeffs { n, entries: BTreeMap::new() }
    }

    pub fn set(&mut self, k: usize, l: usize, a: usize, i: usize, j: usize, v: CoeffFn) -> Result<()> {
        for x in [i, j] {
            if x >= self.n {
                return Err(Error::IndexOutOfRange { index: x, n: self.n });
            }
        }
        self.entries.insert((k, l, a, i, j), v);
        Ok(())
    }

    pub fn get(&self, k: usize, l: usize, a: usize, i: usize, j: usize) -> CoeffFn {
        self.entries.get(&(k, l, a, i, j)).cloned().unwrap_or_else(CoeffFn::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn u(i: usize) -> CoeffFn {
        CoeffFn::u(i)
    }

    #[test]
    fn constant_metric_has_no_rotation() {
        let p = Pencil::concrete(&PencilData::flat(2)).unwrap();
        assert!(p.gamma(0, 1).unwrap().is_zero());
        assert!(p.validate_ferapontov().unwrap().passed());
        assert_eq!(p.gamma(0, 0), Err(Error::EqualIndices(0)));
    }

    #[test]
    fn separable_without_witness() {
        let d = PencilData::concrete(vec![u(0), CoeffFn::one()], None).unwrap();
        let p = Pencil::concrete(&d).unwrap();
        assert!(p.gamma(0, 1).unwrap().is_zero());
        assert!(p.validate_ferapontov().unwrap().passed());
        assert!(p.psi(&Element::theta(2, 0, 0), false).is_err());
    }

    #[test]
    fn crafted_failure() {
        // H1 = u2, H2 = 1: f1 = u2^-2, h1 = 1/u2
        let inv_u2 = CoeffFn::new(Poly::one(), Poly::var(1)).unwrap();
        let f1 = inv_u2.mul(&inv_u2);
        let d = PencilData::concrete(vec![f1, CoeffFn::one()], Some(vec![inv_u2, CoeffFn::one()])).unwrap();
        let p = Pencil::concrete(&d).unwrap();
        assert!(p.gamma(0, 1).unwrap().is_zero());
        assert!(p.gamma(1, 0).unwrap().is_one());
        let r = p.validate_ferapontov().unwrap();
        let bad: Vec<_> = r.failures().collect();
        assert!(!bad.is_empty());
        assert!(bad.iter().all(|x| x.family == Family::WeightedTrace && x.value == CoeffFn::from_rat(rat(1, 2))));
    }

    #[test]
    fn witness_mismatch_rejected() {
        assert!(PencilData::concrete(vec![u(0)], Some(vec![u(0)])).is_err());
    }

    #[test]
    fn theta_bar_and_tilde() {
        let p = Pencil::formal(2).unwrap();
        let tb = p.theta_bar(0).unwrap();
        let expect = Element::theta(2, 0, 0).add(&Element::theta(2, 1, 0).mul_coeff(
            &FormalScalar::u(1).sub(&FormalScalar::u(0)).mul(&FormalScalar::gamma(1, 0)).scale(&rat(2, 1)),
        ));
        assert_eq!(tb, expect);
        // Psi^{-1} theta_tilde = h_i theta_bar
        for i in 0..2 {
            let lhs = p.psi(&p.theta_tilde(i), true).unwrap();
            let rhs = p.theta_bar(i).unwrap().mul_coeff(p.h(i).unwrap());
            assert_eq!(lhs, rhs);
        }
        let flat = Pencil::concrete(&PencilData::flat(1)).unwrap();
        assert_eq!(flat.theta_tilde(0), Element::theta(1, 0, 0));
    }

    #[test]
    fn psi_roundtrip() {
        let p = Pencil::formal(2).unwrap();
        let a = Element::u(2, 0, 2).mul(&Element::theta(2, 1, 0)).add(&Element::theta(2, 0, 3));
        let b = p.psi(&a, false).unwrap();
        assert_eq!(p.psi(&b, true).unwrap(), a);
        assert_eq!(p.psi(&Element::theta(2, 0, 0), false).unwrap(), Element::theta(2, 0, 0).mul_coeff(&FormalScalar::h_inv(0)));
    }

    #[test]
    fn formal_ferapontov_is_normal_form_identity() {
        for n in 2..=3 {
            let p = Pencil::formal(n).unwrap();
            assert!(p.validate_ferapontov().unwrap().passed());
        }
    }
}
