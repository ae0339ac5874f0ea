//! The super-polynomial jet algebra: even jets `u^{i,s}` (`s >= 1`), odd jets
//! `theta_i^s` (`s >= 0`), coefficients in a [`Coeff`] ring that carries the
//! `u^{i,0}` dependence and `lambda`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::coeff::Coeff;
use crate::rat::{rat, Rat};

/// A generator of the jet algebra. `U(i, 0)` stands for the coefficient
/// variable `u^i`; derivations reach it through the coefficient partial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    U(usize, usize),
    Theta(usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetMonomial {
    ujets: Vec<((usize, usize), u32)>,
    thetas: Vec<(usize, usize)>,
}

/// Sign of merging two sorted theta lists, or `None` if a factor repeats.
fn merge_thetas(a: &[(usize, usize)], b: &[(usize, usize)]) -> Option<(Vec<(usize, usize)>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut odd = false;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] jumps over the remaining a-factors
                if (a.len() - i) % 2 == 1 {
                    odd = !odd;
                }
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, odd))
}

impl JetMonomial {
    pub fn one() -> Self {
        JetMonomial::default()
    }

    pub fn ujet(i: usize, s: usize) -> Self {
        assert!(s >= 1, "u^{{i,0}} lives in the coefficient ring");
        JetMonomial { ujets: vec![((i, s), 1)], thetas: vec![] }
    }

    pub fn theta(i: usize, s: usize) -> Self {
        JetMonomial { ujets: vec![], thetas: vec![(i, s)] }
    }

    /// Build from parts; returns `None` if a theta repeats. The flag is the Koszul sign.
    pub fn from_parts(ujets: &[((usize, usize), u32)], thetas: &[(usize, usize)]) -> Option<(Self, bool)> {
        let mut m = JetMonomial::one();
        for &(k, e) in ujets {
            if e > 0 {
                m = m.mul_ujet(k, e);
            }
        }
        let mut odd = false;
        for &t in thetas {
            let (th, o) = merge_thetas(&m.thetas, &[t])?;
            m.thetas = th;
            odd ^= o;
        }
        Some((m, odd))
    }

    pub fn ujets(&self) -> &[((usize, usize), u32)] {
        &self.ujets
    }

    pub fn thetas(&self) -> &[(usize, usize)] {
        &self.thetas
    }

    pub fn is_one(&self) -> bool {
        self.ujets.is_empty() && self.thetas.is_empty()
    }

    fn mul_ujet(&self, k: (usize, usize), e: u32) -> Self {
        let mut u = self.ujets.clone();
        match u.binary_search_by(|x| x.0.cmp(&k)) {
            Ok(p) => u[p].1 += e,
            Err(p) => u.insert(p, (k, e)),
        }
        JetMonomial { ujets: u, thetas: self.thetas.clone() }
    }

    /// Product with the Koszul sign flag, or `None` if it vanishes.
    pub fn mul(&self, o: &JetMonomial) -> Option<(JetMonomial, bool)> {
        let (thetas, odd) = merge_thetas(&self.thetas, &o.thetas)?;
        let mut ujets = self.ujets.clone();
        for &(k, e) in &o.ujets {
            match ujets.binary_search_by(|x| x.0.cmp(&k)) {
                Ok(p) => ujets[p].1 += e,
                Err(p) => ujets.insert(p, (k, e)),
            }
        }
        Some((JetMonomial { ujets, thetas }, odd))
    }

    pub fn u_exp(&self, i: usize, s: usize) -> u32 {
        self.ujets.iter().find(|x| x.0 == (i, s)).map_or(0, |x| x.1)
    }

    pub fn has_theta(&self, i: usize, s: usize) -> bool {
        self.thetas.binary_search(&(i, s)).is_ok()
    }

    /// `m / u^{i,s}` with the exponent it had.
    fn drop_ujet(&self, i: usize, s: usize) -> Option<(JetMonomial, u32)> {
        let p = self.ujets.iter().position(|x| x.0 == (i, s))?;
        let e = self.ujets[p].1;
        let mut u = self.ujets.clone();
        if e == 1 {
            u.remove(p);
        } else {
            u[p].1 -= 1;
        }
        Some((JetMonomial { ujets: u, thetas: self.thetas.clone() }, e))
    }

    /// Left derivative in `theta_i^s`: the remaining monomial and whether the sign is negative.
    fn drop_theta(&self, i: usize, s: usize) -> Option<(JetMonomial, bool)> {
        let p = self.thetas.binary_search(&(i, s)).ok()?;
        let mut t = self.thetas.clone();
        t.remove(p);
        Some((JetMonomial { ujets: self.ujets.clone(), thetas: t }, p % 2 == 1))
    }

    pub fn theta_degree(&self) -> usize {
        self.thetas.len()
    }

    pub fn standard_degree(&self) -> usize {
        self.ujets.iter().map(|&((_, s), e)| s * e as usize).sum::<usize>() + self.thetas.iter().map(|t| t.1).sum::<usize>()
    }

    /// Number of u-jet factors counted with multiplicity.
    pub fn u_count(&self) -> usize {
        self.ujets.iter().map(|x| x.1 as usize).sum()
    }

    pub fn count_theta_order(&self, s: usize) -> usize {
        self.thetas.iter().filter(|t| t.1 == s).count()
    }

    pub fn generators(&self) -> impl Iterator<Item = Gen> + '_ {
        self.ujets
            .iter()
            .map(|&((i, s), _)| Gen::U(i, s))
            .chain(self.thetas.iter().map(|&(i, s)| Gen::Theta(i, s)))
    }
}

impl fmt::Display for JetMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        for &((i, s), e) in &self.ujets {
            if e == 1 {
                parts.push(format!("u[{},{}]", i + 1, s));
            } else {
                parts.push(format!("u[{},{}]^{}", i + 1, s, e));
            }
        }
        for &(i, s) in &self.thetas {
            parts.push(format!("theta[{},{}]", i + 1, s));
        }
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grading {
    Standard,
    Theta,
    UCount,
    Theta1,
    Theta0,
    ThetaGe2,
    LambdaDeg,
}

/// A finite sum of jet monomials with coefficients in `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element<C: Coeff> {
    n: usize,
    terms: BTreeMap<JetMonomial, C>,
}

impl<C: Coeff> Element<C> {
    pub fn zero(n: usize) -> Self {
        Element { n, terms: BTreeMap::new() }
    }

    pub fn from_coeff(n: usize, c: C) -> Self {
        Element::monomial(n, JetMonomial::one(), c)
    }

    pub fn one(n: usize) -> Self {
        Element::from_coeff(n, C::one())
    }

    pub fn monomial(n: usize, m: JetMonomial, c: C) -> Self {
        let mut e = Element::zero(n);
        if !c.is_zero() {
            e.terms.insert(m, c);
        }
        e
    }

    /// `u^{i,s}`; for `s = 0` the coefficient `u^i`.
    pub fn u(n: usize, i: usize, s: usize) -> Self {
        if s == 0 {
            Element::from_coeff(n, C::u(i))
        } else {
            Element::monomial(n, JetMonomial::ujet(i, s), C::one())
        }
    }

    pub fn theta(n: usize, i: usize, s: usize) -> Self {
        Element::monomial(n, JetMonomial::theta(i, s), C::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_of(&self, m: &JetMonomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: JetMonomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Element<C>) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, o: &Element<C>) -> Self {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn sub(&self, o: &Element<C>) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Element::zero(self.n);
        }
        self.map_coeffs(|c| c.scale(r))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        if k.is_zero() {
            return Element::zero(self.n);
        }
        self.map_coeffs(|c| c.mul(k))
    }

    /// Apply `f` to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Element { n: self.n, terms }
    }

    pub fn filter_terms(&self, keep: impl Fn(&JetMonomial, &C) -> bool) -> Self {
        Element {
            n: self.n,
            terms: self.terms.iter().filter(|(m, c)| keep(m, c)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Super-commutative product.
    pub fn mul(&self, o: &Element<C>) -> Self {
        let mut out = Element::zero(self.n.max(o.n));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if let Some((m, odd)) = ma.mul(mb) {
                    let c = ca.mul(cb);
                    out.add_term(m, if odd { c.neg() } else { c });
                }
            }
        }
        out
    }

    /// Partial derivative by a generator: left derivative for odd jets,
    /// coefficient partial for `U(i, 0)`.
    pub fn partial(&self, g: Gen) -> Self {
        let mut out = Element::zero(self.n);
        for (m, c) in &self.terms {
            match g {
                Gen::U(i, 0) => out.add_term(m.clone(), c.partial(i, self.n)),
                Gen::U(i, s) => {
                    if let Some((r, e)) = m.drop_ujet(i, s) {
                        out.add_term(r, c.scale(&Rat::from_integer(e.into())));
                    }
                }
                Gen::Theta(i, s) => {
                    if let Some((r, neg)) = m.drop_theta(i, s) {
                        out.add_term(r, if neg { c.neg() } else { c.clone() });
                    }
                }
            }
        }
        out
    }

    /// Apply the derivation `sum_g X^g d/dg` with components supplied by
    /// `comp`; components multiply from the left.
    pub fn apply_derivation(&self, comp: &mut dyn FnMut(Gen) -> Option<Element<C>>) -> Self {
        let mut out = Element::zero(self.n);
        let mut gens: Vec<Gen> = (0..self.n).map(|i| Gen::U(i, 0)).collect();
        for m in self.terms.keys() {
            gens.extend(m.generators());
        }
        gens.sort();
        gens.dedup();
        for g in gens {
            let d = self.partial(g);
            if d.is_zero() {
                continue;
            }
            if let Some(x) = comp(g) {
                if !x.is_zero() {
                    out.add_assign(&x.mul(&d));
                }
            }
        }
        out
    }

    /// Total x-derivative.
    pub fn dx(&self) -> Self {
        let n = self.n;
        self.apply_derivation(&mut |g| {
            Some(match g {
                Gen::U(i, s) => Element::u(n, i, s + 1),
                Gen::Theta(i, s) => Element::theta(n, i, s + 1),
            })
        })
    }

    pub fn dx_pow(&self, k: usize) -> Self {
        let mut a = self.clone();
        for _ in 0..k {
            a = a.dx();
        }
        a
    }

    fn term_degrees(m: &JetMonomial, c: &C, g: Grading) -> Vec<i64> {
        match g {
            Grading::Standard => vec![m.standard_degree() as i64],
            Grading::Theta => vec![m.theta_degree() as i64],
            Grading::UCount => vec![m.u_count() as i64],
            Grading::Theta1 => vec![m.count_theta_order(1) as i64],
            Grading::Theta0 => vec![m.count_theta_order(0) as i64],
            Grading::ThetaGe2 => vec![m.thetas().iter().filter(|t| t.1 >= 2).count() as i64],
            Grading::LambdaDeg => c.lambda_degrees().into_iter().map(i64::from).collect(),
        }
    }

    /// The common degree of all terms, or `None` if not homogeneous. Zero has no degree.
    pub fn degree(&self, g: Grading) -> Option<i64> {
        let mut deg = None;
        for (m, c) in &self.terms {
            for d in Element::term_degrees(m, c, g) {
                match deg {
                    None => deg = Some(d),
                    Some(x) if x != d => return None,
                    _ => {}
                }
            }
        }
        deg
    }

    pub fn homogeneous_component(&self, g: Grading, k: i64) -> Self {
        if g == Grading::LambdaDeg {
            let Ok(k32) = i32::try_from(k) else {
                return Element::zero(self.n);
            };
            return self.map_coeffs(|c| c.lambda_part(k32));
        }
        self.filter_terms(|m, c| Element::term_degrees(m, c, g)[0] == k)
    }

    /// All degrees present under `g`.
    pub fn degrees(&self, g: Grading) -> Vec<i64> {
        let mut v: Vec<i64> = self.terms.iter().flat_map(|(m, c)| Element::term_degrees(m, c, g)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn map_coeffs_into<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Element<D> {
        let mut out = Element::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs_into<D: Coeff, E>(&self, f: impl Fn(&C) -> Result<D, E>) -> Result<Element<D>, E> {
        let mut out = Element::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }
}

impl<C: Coeff> fmt::Display for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| if m.is_one() { format!("({c})") } else { format!("({c})*{m}") })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Every jet monomial with `p` odd factors and standard degree `d`.
pub fn slice_basis(p: usize, d: usize, n: usize) -> Vec<JetMonomial> {
    let thetas: Vec<(usize, usize)> = (0..=d).flat_map(|s| (0..n).map(move |i| (i, s))).collect();
    let mut thetas = thetas;
    thetas.sort();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    choose_thetas(&thetas, 0, p, d, &mut chosen, &mut |ths, rest| {
        let mut ujs = Vec::new();
        fill_ujets(n, rest, (0, 1), &mut ujs, &mut |u| {
            out.push(JetMonomial { ujets: u.to_vec(), thetas: ths.to_vec() });
        });
    });
    out.sort();
    out
}

fn choose_thetas(
    all: &[(usize, usize)],
    start: usize,
    left: usize,
    budget: usize,
    chosen: &mut Vec<(usize, usize)>,
    emit: &mut dyn FnMut(&[(usize, usize)], usize),
) {
    if left == 0 {
        emit(chosen, budget);
        return;
    }
    for k in start..all.len() {
        let t = all[k];
        if t.1 > budget {
            continue;
        }
        chosen.push(t);
        choose_thetas(all, k + 1, left - 1, budget - t.1, chosen, emit);
        chosen.pop();
    }
}

/// Multisets of u-jets `(i, s)` (`s >= 1`) of total order `budget`, generated
/// in increasing `(i, s)` order starting at `from`.
fn fill_ujets(
    n: usize,
    budget: usize,
    from: (usize, usize),
    acc: &mut Vec<((usize, usize), u32)>,
    emit: &mut dyn FnMut(&[((usize, usize), u32)]),
) {
    if budget == 0 {
        emit(acc);
        return;
    }
    let (i0, s0) = from;
    for i in i0..n {
        let smin = if i == i0 { s0 } else { 1 };
        for s in smin..=budget {
            let mut e = 1u32;
            while s * e as usize <= budget {
                acc.push(((i, s), e));
                fill_ujets(n, budget - s * e as usize, (i, s + 1), acc, emit);
                acc.pop();
                e += 1;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubspaceClass {
    CHat,
    /// Nontrivial monomials of a single index.
    CiNt(usize),
    MHat,
}

pub fn subspace_classify(m: &JetMonomial) -> SubspaceClass {
    let mut idx: Option<usize> = None;
    let mut mixed = false;
    let pos = m.ujets().iter().map(|x| x.0 .0).chain(m.thetas().iter().filter(|t| t.1 >= 2).map(|t| t.0));
    for i in pos {
        match idx {
            None => idx = Some(i),
            Some(j) if j != i => mixed = true,
            _ => {}
        }
    }
    match (idx, mixed) {
        (_, true) => SubspaceClass::MHat,
        (Some(i), false) => SubspaceClass::CiNt(i),
        (None, _) => SubspaceClass::CHat,
    }
}

/// Weight `w_i`: `u^{i,s} -> s/2 + 1`, `theta_i^{s-1} -> s/2 - 1`, other generators 0.
pub fn weight(m: &JetMonomial, i: usize) -> Rat {
    let mut w = Rat::zero();
    for &((j, s), e) in m.ujets() {
        if j == i {
            w += rat(s as i64 + 2, 2) * Rat::from_integer(e.into());
        }
    }
    for &(j, t) in m.thetas() {
        if j == i {
            w += rat(t as i64 + 1, 2) - Rat::one();
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffFn;

    type E = Element<CoeffFn>;

    #[test]
    fn koszul_sign() {
        let a = E::theta(2, 1, 0).mul(&E::theta(2, 0, 0));
        assert_eq!(a, E::theta(2, 0, 0).mul(&E::theta(2, 1, 0)).neg());
        assert!(E::theta(1, 0, 0).mul(&E::theta(1, 0, 0)).is_zero());
        let u = E::u(1, 0, 1);
        assert_eq!(u.mul(&u).terms().next().unwrap().0.u_exp(0, 1), 2);
    }

    #[test]
    fn left_derivative() {
        let a = E::theta(2, 0, 0).mul(&E::theta(2, 1, 0));
        assert_eq!(a.partial(Gen::Theta(1, 0)), E::theta(2, 0, 0).neg());
        let b = E::u(2, 0, 1).mul(&E::u(2, 1, 1));
        assert_eq!(b.partial(Gen::U(0, 1)), E::u(2, 1, 1));
        assert!(E::u(1, 0, 1).partial(Gen::Theta(0, 0)).is_zero());
    }

    #[test]
    fn total_derivative() {
        assert_eq!(E::theta(1, 0, 0).dx(), E::theta(1, 0, 1));
        let c = E::from_coeff(1, CoeffFn::u(0).mul(&CoeffFn::u(0)));
        assert_eq!(c.dx(), E::u(1, 0, 1).mul_coeff(&CoeffFn::u(0).scale(&crate::rat::int(2))));
        let a = E::u(1, 0, 1).mul(&E::theta(1, 0, 0));
        let expect = E::u(1, 0, 2).mul(&E::theta(1, 0, 0)).add(&E::u(1, 0, 1).mul(&E::theta(1, 0, 1)));
        assert_eq!(a.dx(), expect);
    }

    #[test]
    fn degrees() {
        let a = E::u(3, 0, 2).mul(&E::theta(3, 2, 1));
        assert_eq!(a.degree(Grading::Standard), Some(3));
        assert_eq!(a.degree(Grading::Theta), Some(1));
        assert_eq!(E::u(1, 0, 1).add(&E::theta(1, 0, 0)).degree(Grading::Standard), None);
        let b = E::u(1, 0, 1).mul(&E::theta(1, 0, 0)).add(&E::theta(1, 0, 1));
        assert_eq!(b.homogeneous_component(Grading::UCount, 1), E::u(1, 0, 1).mul(&E::theta(1, 0, 0)));
        assert_eq!(b.homogeneous_component(Grading::UCount, 0), E::theta(1, 0, 1));
        assert!(b.homogeneous_component(Grading::Theta, -5).is_zero());
    }

    #[test]
    fn small_slices() {
        assert_eq!(slice_basis(1, 0, 2).len(), 2);
        assert_eq!(slice_basis(0, 1, 2).len(), 2);
        let b = slice_basis(3, 3, 1);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].to_string(), "theta[1,0] theta[1,1] theta[1,2]");
        assert_eq!(slice_basis(0, 0, 3), vec![JetMonomial::one()]);
    }

    #[test]
    fn classification_examples() {
        let m = |e: E| e.terms().next().unwrap().0.clone();
        assert_eq!(subspace_classify(&m(E::theta(2, 0, 0).mul(&E::theta(2, 1, 1)))), SubspaceClass::CHat);
        assert_eq!(subspace_classify(&m(E::u(2, 0, 1).mul(&E::theta(2, 0, 2)))), SubspaceClass::CiNt(0));
        assert_eq!(subspace_classify(&m(E::u(2, 0, 1).mul(&E::u(2, 1, 1)))), SubspaceClass::MHat);
    }

    #[test]
    fn weights() {
        assert_eq!(weight(&JetMonomial::ujet(0, 1), 0), rat(3, 2));
        assert_eq!(weight(&JetMonomial::theta(0, 0), 0), rat(-1, 2));
        assert_eq!(weight(&JetMonomial::theta(1, 5), 0), Rat::zero());
    }
}
