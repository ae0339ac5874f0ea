//! Arbitrary-precision rationals.

use num_bigint::BigInt;
use num_rational::BigRational;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn binomial(n: usize, k: usize) -> Rat {
    if k > n {
        return int(0);
    }
    let mut acc = BigInt::from(1);
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    Rat::from_integer(acc)
}
