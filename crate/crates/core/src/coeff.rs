//! Coefficient rings.
//!
//! [`Coeff`] is the interface every jet-algebra element is generic over. The
//! concrete implementation [`CoeffFn`] holds rational functions in `u1..uN`
//! that are polynomial in the pencil parameter `lambda`; the formal
//! implementation lives in [`crate::formal`].

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Mono, Poly, Var};
use crate::rat::Rat;

/// Variable id of `lambda` inside coefficient polynomials. `u^i` (0-based) is `i`.
pub const LAMBDA: Var = 1 << 30;

pub fn var_name(v: Var) -> String {
    if v == LAMBDA {
        "lambda".into()
    } else {
        format!("u{}", v + 1)
    }
}

pub trait Coeff: Clone + PartialEq + Eq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(c: Rat) -> Self;
    /// The coordinate function `u^i` (0-based index).
    fn u(i: usize) -> Self;
    fn lambda() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
    /// Partial derivative along `u^j` in an `n`-component setting.
    fn partial(&self, j: usize, n: usize) -> Self;
    /// Substitute `lambda -> u^i`.
    fn set_lambda(&self, i: usize) -> Self;
    fn checked_div(&self, o: &Self) -> Result<Self>;
    /// Distinct powers of lambda occurring in the numerator.
    fn lambda_degrees(&self) -> Vec<i32>;
    /// The part of the numerator carrying `lambda^k`, over the same denominator.
    fn lambda_part(&self, k: i32) -> Self;

    fn add_assign(&mut self, o: &Self) {
        *self = self.add(o);
    }

    /// Normal form in an `n`-component setting; identity unless the ring has relations.
    fn normalize(&self, _n: usize) -> Self {
        self.clone()
    }

    fn from_int(n: i64) -> Self {
        Self::from_rat(crate::rat::int(n))
    }

    /// `u^i - lambda`.
    fn u_minus_lambda(i: usize) -> Self {
        Self::u(i).sub(&Self::lambda())
    }
}

/// Rational function `num / den` with `den` free of lambda, coprime to `num`
/// and monic in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffFn {
    num: Poly,
    den: Poly,
}

impl CoeffFn {
    pub fn from_poly(p: Poly) -> Self {
        CoeffFn { num: p, den: Poly::one() }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c = CoeffFn::reduce(num, den);
        if c.den.contains_var(LAMBDA) {
            return Err(Error::LambdaInDenominator);
        }
        Ok(c)
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return CoeffFn { num, den: Poly::one() };
        }
        if den.is_one() {
            return CoeffFn { num, den };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero denominator");
        if lc.is_one() {
            CoeffFn { num, den }
        } else {
            let inv = lc.recip();
            CoeffFn { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn depends_on_u(&self, j: usize) -> bool {
        self.num.contains_var(j as Var) || self.den.contains_var(j as Var)
    }

    pub fn lambda_degree(&self) -> i32 {
        self.num.degree_in(LAMBDA)
    }

    /// Total u-degree of the numerator (the denominator must be constant for
    /// this to be meaningful).
    pub fn u_degree(&self) -> i64 {
        self.num.degree_over(|v| v != LAMBDA)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = CoeffFn::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Coeff for CoeffFn {
    fn zero() -> Self {
        CoeffFn::from_poly(Poly::zero())
    }

    fn one() -> Self {
        CoeffFn::from_poly(Poly::one())
    }

    fn from_rat(c: Rat) -> Self {
        CoeffFn::from_poly(Poly::constant(c))
    }

    fn u(i: usize) -> Self {
        CoeffFn::from_poly(Poly::var(i as Var))
    }

    fn lambda() -> Self {
        CoeffFn::from_poly(Poly::var(LAMBDA))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            if self.den.is_one() {
                return CoeffFn { num: self.num.add(&o.num), den: Poly::one() };
            }
            return CoeffFn::reduce(self.num.add(&o.num), self.den.clone());
        }
        CoeffFn::reduce(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn add_assign(&mut self, o: &Self) {
        if self.den.is_one() && o.den.is_one() {
            self.num.add_assign(&o.num);
        } else {
            *self = self.add(o);
        }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.den.is_one() && o.den.is_one() {
            return CoeffFn { num: self.num.mul(&o.num), den: Poly::one() };
        }
        CoeffFn::reduce(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn neg(&self) -> Self {
        CoeffFn { num: self.num.neg(), den: self.den.clone() }
    }

    fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return CoeffFn::zero();
        }
        CoeffFn { num: self.num.scale(c), den: self.den.clone() }
    }

    fn partial(&self, j: usize, _n: usize) -> Self {
        let v = j as Var;
        let dn = self.num.partial(v);
        if self.den.is_one() {
            return CoeffFn::from_poly(dn);
        }
        let dd = self.den.partial(v);
        if dd.is_zero() {
            return CoeffFn::reduce(dn, self.den.clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        CoeffFn::reduce(num, self.den.mul(&self.den))
    }

    fn set_lambda(&self, i: usize) -> Self {
        if !self.num.contains_var(LAMBDA) {
            return self.clone();
        }
        CoeffFn::reduce(self.num.rename_var(LAMBDA, i as Var), self.den.clone())
    }

    fn checked_div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        CoeffFn::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    fn lambda_degrees(&self) -> Vec<i32> {
        self.num.coefficients_in(LAMBDA).into_keys().collect()
    }

    fn lambda_part(&self, k: i32) -> Self {
        let part = self.num.coefficients_in(LAMBDA).remove(&k).unwrap_or_default();
        CoeffFn::reduce(part.mul_mono(&Mono::var(LAMBDA, k), &Rat::one()), self.den.clone())
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num.to_string_with(&var_name);
        if self.den.is_one() {
            f.write_str(&n)
        } else {
            let d = self.den.to_string_with(&var_name);
            let wrap = |s: String, p: &Poly| if p.len() > 1 { format!("({s})") } else { s };
            write!(f, "{}/{}", wrap(n, &self.num), wrap(d, &self.den))
        }
    }
}

/// Split a polynomial coefficient into `(u-monomial, lambda power, value)` triples.
pub fn poly_coordinates(c: &CoeffFn) -> Result<Vec<(Mono, i32, Rat)>> {
    if !c.is_polynomial() {
        return Err(Error::UnsupportedCoefficient(c.to_string()));
    }
    Ok(c
        .num()
        .terms()
        .map(|(m, x)| {
            let b = m.exp(LAMBDA);
            (m.with_exp(LAMBDA, 0), b, x.clone())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn u(i: usize) -> CoeffFn {
        CoeffFn::u(i)
    }

    #[test]
    fn rational_sum() {
        let a = CoeffFn::from_rat(rat(1, 2)).add(&CoeffFn::from_rat(rat(1, 3)));
        assert_eq!(a, CoeffFn::from_rat(rat(5, 6)));
    }

    #[test]
    fn difference_of_squares() {
        let l = CoeffFn::lambda();
        let p = u(0).sub(&l).mul(&u(0).add(&l));
        assert_eq!(p, u(0).mul(&u(0)).sub(&l.mul(&l)));
    }

    #[test]
    fn cancellation() {
        let d = u(0).sub(&u(1));
        assert_eq!(d.checked_div(&d).unwrap(), CoeffFn::one());
    }

    #[test]
    fn division_errors() {
        assert_eq!(u(0).checked_div(&CoeffFn::zero()), Err(Error::DivisionByZero));
        assert_eq!(u(0).checked_div(&CoeffFn::lambda()), Err(Error::LambdaInDenominator));
    }

    #[test]
    fn partials() {
        assert_eq!(u(0).mul(&u(0)).partial(0, 2), u(0).scale(&int(2)));
        assert!(u(0).partial(1, 2).is_zero());
        let d = u(0).sub(&u(1));
        let inv = CoeffFn::one().checked_div(&d).unwrap();
        let expect = CoeffFn::from_int(-1).checked_div(&d.mul(&d)).unwrap();
        assert_eq!(inv.partial(0, 2), expect);
    }

    #[test]
    fn lambda_substitution() {
        assert!(u(0).sub(&CoeffFn::lambda()).set_lambda(0).is_zero());
        let l2 = CoeffFn::lambda().mul(&CoeffFn::lambda());
        assert_eq!(l2.set_lambda(1), u(1).mul(&u(1)));
        assert_eq!(u(0).set_lambda(1), u(0));
    }
}
