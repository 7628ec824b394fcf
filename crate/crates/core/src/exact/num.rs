//! Checked arithmetic shared by the integer and rational kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

/// Euclidean ring element with overflow-aware operations.
pub(crate) trait Euclid: Clone + Debug + PartialEq + Zero + One {
    fn sub_c(&self, o: &Self) -> Option<Self>;
    fn mul_c(&self, o: &Self) -> Option<Self>;
    /// Truncating quotient.
    fn quot_c(&self, o: &Self) -> Option<Self>;
    fn abs_c(&self) -> Option<Self>;
    fn is_unit(&self) -> bool;
    fn big(&self) -> BigInt;
    fn abs_lt(&self, o: &Self) -> bool;
}

impl Euclid for i64 {
    fn sub_c(&self, o: &Self) -> Option<Self> {
        i64::checked_sub(*self, *o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        i64::checked_mul(*self, *o)
    }
    fn quot_c(&self, o: &Self) -> Option<Self> {
        i64::checked_div(*self, *o)
    }
    fn abs_c(&self) -> Option<Self> {
        self.checked_abs()
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.unsigned_abs() < o.unsigned_abs()
    }
}

impl Euclid for BigInt {
    fn sub_c(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn quot_c(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn abs_c(&self) -> Option<Self> {
        Some(self.abs())
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn big(&self) -> BigInt {
        self.clone()
    }
    fn abs_lt(&self, o: &Self) -> bool {
        self.abs() < o.abs()
    }
}

/// Ordered field element with overflow-aware operations.
pub(crate) trait Field: Clone + Debug + PartialEq + PartialOrd {
    fn f_zero() -> Self;
    fn f_one() -> Self;
    fn add_c(&self, o: &Self) -> Option<Self>;
    fn sub_c(&self, o: &Self) -> Option<Self>;
    fn mul_c(&self, o: &Self) -> Option<Self>;
    fn div_c(&self, o: &Self) -> Option<Self>;
    fn neg_c(&self) -> Option<Self>;
    fn from_rat(r: &BigRational) -> Option<Self>;
    fn to_rat(&self) -> BigRational;
    fn is_zero_f(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
}

pub(crate) type SmallRat = Ratio<i64>;

impl Field for SmallRat {
    fn f_zero() -> Self {
        Ratio::from_integer(0)
    }
    fn f_one() -> Self {
        Ratio::from_integer(1)
    }
    fn add_c(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub_c(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div_c(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn neg_c(&self) -> Option<Self> {
        Some(Ratio::new_raw(self.numer().checked_neg()?, *self.denom()))
    }
    fn from_rat(r: &BigRational) -> Option<Self> {
        let p = r.numer().to_i64()?;
        let q = r.denom().to_i64()?;
        Some(Ratio::new(p, q))
    }
    fn to_rat(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
    fn is_zero_f(&self) -> bool {
        self.numer().is_zero()
    }
    fn is_pos(&self) -> bool {
        *self.numer() > 0
    }
    fn is_neg(&self) -> bool {
        *self.numer() < 0
    }
}

impl Field for BigRational {
    fn f_zero() -> Self {
        Zero::zero()
    }
    fn f_one() -> Self {
        One::one()
    }
    fn add_c(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub_c(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul_c(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_c(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            None
        } else {
            Some(self / o)
        }
    }
    fn neg_c(&self) -> Option<Self> {
        Some(-self)
    }
    fn from_rat(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_rat(&self) -> BigRational {
        self.clone()
    }
    fn is_zero_f(&self) -> bool {
        self.is_zero()
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

/// gcd/lcm normalization of a list of positive integers into a divisibility
/// chain, sorted ascending.
pub(crate) fn divisibility_chain(mut d: Vec<BigInt>) -> Vec<BigInt> {
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = &d[i] / &g * &d[j];
            d[i] = g;
            d[j] = l;
        }
    }
    d.sort();
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn chain_from_coprime_pair() {
        assert_eq!(divisibility_chain(big(&[2, 3])), big(&[1, 6]));
        assert_eq!(divisibility_chain(big(&[4, 6, 10])), big(&[2, 2, 60]));
    }

    #[test]
    fn small_rat_neg_overflow() {
        let m = Ratio::new_raw(i64::MIN, 1);
        assert!(m.neg_c().is_none());
        assert_eq!(Ratio::new(3i64, 4).neg_c(), Some(Ratio::new(-3, 4)));
    }
}
