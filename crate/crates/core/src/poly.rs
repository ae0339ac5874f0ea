//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are plain `u32` identifiers. Exponents are signed so that the
//! same representation can carry Laurent monomials (used by the formal
//! coefficient ring for inverse Lamé coefficients); the gcd machinery is only
//! ever called on polynomials with non-negative exponents.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rat::Rat;

pub type Var = u32;

pub const MERSENNE61: u64 = (1 << 61) - 1;

pub fn mul_mod(a: u64, b: u64) -> u64 {
    let x = a as u128 * b as u128;
    let r = (x as u64 & MERSENNE61) + (x >> 61) as u64;
    let r = (r & MERSENNE61) + (r >> 61);
    if r >= MERSENNE61 {
        r - MERSENNE61
    } else {
        r
    }
}

pub fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    b %= MERSENNE61;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b);
        }
        b = mul_mod(b, b);
        e >>= 1;
    }
    acc
}

fn int_mod(x: &num_bigint::BigInt) -> u64 {
    use num_traits::ToPrimitive;
    if let Some(v) = x.to_i64() {
        return v.rem_euclid(MERSENNE61 as i64) as u64;
    }
    let m = num_bigint::BigInt::from(MERSENNE61);
    let mut r = x % &m;
    if r.is_negative() {
        r += &m;
    }
    r.to_u64().expect("reduced residue fits")
}

fn rat_mod(c: &Rat) -> Option<u64> {
    let n = int_mod(c.numer());
    if c.denom().is_one() {
        return Some(n);
    }
    let d = int_mod(c.denom());
    (d != 0).then(|| mul_mod(n, pow_mod(d, MERSENNE61 - 2)))
}

/// A monomial: sorted `(variable, exponent)` pairs with non-zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub Vec<(Var, i32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: Var, e: i32) -> Self {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(v, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, v: Var) -> i32 {
        match self.0.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(k) => self.0[k].1,
            Err(_) => 0,
        }
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e as i64).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / other` if every exponent stays non-negative.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = self.0.clone();
        for &(v, e) in &other.0 {
            match out.binary_search_by_key(&v, |&(w, _)| w) {
                Ok(k) => {
                    out[k].1 -= e;
                    if out[k].1 < 0 {
                        return None;
                    }
                }
                Err(_) => return None,
            }
        }
        out.retain(|&(_, e)| e != 0);
        Some(Mono(out))
    }

    pub fn with_exp(&self, v: Var, e: i32) -> Mono {
        let mut out = self.0.clone();
        match out.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(k) => {
                if e == 0 {
                    out.remove(k);
                } else {
                    out[k].1 = e;
                }
            }
            Err(k) => {
                if e != 0 {
                    out.insert(k, (v, e));
                }
            }
        }
        Mono(out)
    }

    /// Graded lexicographic comparison (smaller variable ids are "larger").
    pub fn cmp_grlex(&self, other: &Mono) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn var(v: Var) -> Self {
        Poly::monomial(Mono::var(v, 1), Rat::one())
    }

    pub fn monomial(m: Mono, c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rat)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
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

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Mono::is_one)
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) != 0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn degree_in(&self, v: Var) -> i32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Total degree over the given variable set (other variables ignored).
    pub fn degree_over(&self, pred: impl Fn(Var) -> bool) -> i64 {
        self.terms
            .keys()
            .map(|m| m.0.iter().filter(|(v, _)| pred(*v)).map(|&(_, e)| e as i64).sum::<i64>())
            .max()
            .unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_terms(self.terms.iter().map(|(k, x)| (k.mul(m), x * c)))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    /// Value modulo the Mersenne prime `2^61 - 1` at the point `value(v)`, or
    /// `None` if a denominator or an inverted variable vanishes there.
    pub fn eval_mod(&self, value: &dyn Fn(Var) -> u64) -> Option<u64> {
        // (var, value, inverse) seen so far
        let mut seen: Vec<(Var, u64, u64)> = Vec::new();
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let mut t = rat_mod(c)?;
            for &(v, e) in &m.0 {
                let k = match seen.iter().position(|s| s.0 == v) {
                    Some(k) => k,
                    None => {
                        let x = value(v) % MERSENNE61;
                        let inv = if x == 0 { 0 } else { pow_mod(x, MERSENNE61 - 2) };
                        seen.push((v, x, inv));
                        seen.len() - 1
                    }
                };
                let (_, x, inv) = seen[k];
                let base = if e < 0 {
                    if x == 0 {
                        return None;
                    }
                    inv
                } else {
                    x
                };
                for _ in 0..e.unsigned_abs() {
                    t = mul_mod(t, base);
                }
            }
            acc += t;
            if acc >= MERSENNE61 {
                acc -= MERSENNE61;
            }
        }
        Some(acc)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn partial(&self, v: Var) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(v);
            (e != 0).then(|| (m.with_exp(v, e - 1), c * Rat::from_integer(e.into())))
        }))
    }

    /// Substitute variable `from` by variable `to`.
    pub fn rename_var(&self, from: Var, to: Var) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exp(from);
            if e == 0 {
                (m.clone(), c.clone())
            } else {
                let m2 = m.with_exp(from, 0);
                let e2 = m2.exp(to) + e;
                (m2.with_exp(to, e2), c.clone())
            }
        }))
    }

    /// Evaluate a single variable at a rational value.
    pub fn eval_var(&self, v: Var, x: &Rat) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let e = m.exp(v);
            if e == 0 {
                (m.clone(), c.clone())
            } else {
                (m.with_exp(v, 0), c * rat_pow(x, e))
            }
        }))
    }

    /// View as a polynomial in `v` with coefficients free of `v`.
    pub fn coefficients_in(&self, v: Var) -> BTreeMap<i32, Poly> {
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            out.entry(e).or_default().add_term(m.with_exp(v, 0), c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    pub fn from_coefficients_in(v: Var, coeffs: &BTreeMap<i32, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (&e, p) in coeffs {
            for (m, c) in &p.terms {
                out.add_term(m.with_exp(v, e), c.clone());
            }
        }
        out
    }

    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().max_by(|a, b| a.0.cmp_grlex(b.0))
    }

    /// Scale so that the graded-lex leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if d.is_one() {
            return Some(self.clone());
        }
        if d.is_constant() {
            return Some(self.scale(&d.constant_term().recip()));
        }
        let (ld, lc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((lm, lcr)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let q = lm.div(&ld)?;
            let qc = lcr / &lc;
            rem = rem.sub(&d.mul_mono(&q, &qc));
            quot.add_term(q, qc);
        }
        Some(quot)
    }

    /// Greatest common divisor, normalised to be monic. Non-negative exponents only.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self == other {
            return self.monic();
        }
        let mut vs = self.vars();
        vs.extend(other.vars());
        vs.sort_unstable();
        vs.dedup();
        let v = vs[0];
        let (ca, pa) = split_content(self, v);
        let (cb, pb) = split_content(other, v);
        let c = ca.gcd(&cb);
        let g = if pa.contains_var(v) && pb.contains_var(v) {
            prs_gcd(pa, pb, v)
        } else {
            Poly::one()
        };
        c.mul(&g).monic()
    }

    pub fn to_string_with(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms: Vec<(&Mono, &Rat)> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.cmp_grlex(a.0));
        let mut s = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for &(v, e) in &m.0 {
                if e == 1 {
                    factors.push(name(v));
                } else {
                    factors.push(format!("{}^{}", name(v), e));
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

fn rat_pow(x: &Rat, e: i32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Content with respect to `v` (gcd of the coefficients) and primitive part.
fn split_content(p: &Poly, v: Var) -> (Poly, Poly) {
    if !p.contains_var(v) {
        return (p.monic(), Poly::one());
    }
    let coeffs = p.coefficients_in(v);
    let mut c = Poly::zero();
    for q in coeffs.values() {
        c = c.gcd(q);
        if c.is_one() {
            break;
        }
    }
    let prim = p.div_exact(&c).expect("content divides");
    (c, prim)
}

fn primitive_in(p: &Poly, v: Var) -> Poly {
    split_content(p, v).1
}

/// Pseudo-remainder of `a` by `b` as polynomials in `v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let db = b.degree_in(v);
    let bc = b.coefficients_in(v);
    let lb = bc[&db].clone();
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let dr = r.degree_in(v);
        if dr < db {
            return r;
        }
        let rc = r.coefficients_in(v);
        let lr = rc[&dr].clone();
        let shift = Mono::var(v, dr - db);
        r = r.mul(&lb).sub(&b.mul(&lr).mul_mono(&shift, &Rat::one()));
    }
}

fn prs_gcd(a: Poly, b: Poly, v: Var) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            return primitive_in(&b, v);
        }
        if !r.contains_var(v) {
            return Poly::one();
        }
        a = b;
        b = primitive_in(&r, v);
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&|v| format!("x{v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: Var) -> Poly {
        Poly::var(v)
    }

    fn c(n: i64) -> Poly {
        Poly::constant(Rat::from_integer(n.into()))
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = x(0).sub(&x(1));
        let a = f.mul(&x(0).add(&c(3)));
        let b = f.mul(&f).mul(&x(2));
        assert_eq!(a.gcd(&b), f.monic());
    }

    #[test]
    fn gcd_coprime() {
        let a = x(0).mul(&x(0)).add(&c(1));
        let b = x(0).add(&x(1));
        assert!(a.gcd(&b).is_one());
    }

    #[test]
    fn exact_division() {
        let a = x(0).mul(&x(0)).sub(&x(1).mul(&x(1)));
        let q = a.div_exact(&x(0).sub(&x(1))).unwrap();
        assert_eq!(q, x(0).add(&x(1)));
        assert!(a.div_exact(&x(2)).is_none());
    }

    #[test]
    fn grlex_order() {
        let a = Mono(vec![(0, 2)]);
        let b = Mono(vec![(0, 1), (1, 1)]);
        let c1 = Mono(vec![(1, 2)]);
        assert_eq!(a.cmp_grlex(&b), Ordering::Greater);
        assert_eq!(b.cmp_grlex(&c1), Ordering::Greater);
    }
}
