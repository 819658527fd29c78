//! Exact rationals of the form `n / d^k`.
//!
//! Every probability and squared overlap in the engine has this shape, so a
//! numerator plus a power of the prime dimension is enough for exactness.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Serialize, Serializer};

use crate::arith::PrimeModulus;

/// `num / d^exp`, canonical: `num` is not divisible by `d` unless zero, and
/// zero has `exp = 0`. `exp` may be negative.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PowerRatio {
    modulus: PrimeModulus,
    num: i128,
    exp: i32,
}

impl PowerRatio {
    pub fn new(modulus: PrimeModulus, num: i128, exp: i32) -> Self {
        let mut out = Self { modulus, num, exp };
        out.normalize();
        out
    }

    pub fn zero(modulus: PrimeModulus) -> Self {
        Self::new(modulus, 0, 0)
    }

    pub fn one(modulus: PrimeModulus) -> Self {
        Self::new(modulus, 1, 0)
    }

    /// `1 / d^k`.
    pub fn inv_power(modulus: PrimeModulus, k: i32) -> Self {
        Self::new(modulus, 1, k)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let d = self.modulus.get() as i128;
        while self.num % d == 0 {
            self.num /= d;
            self.exp -= 1;
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> i32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == 1 && self.exp == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 * (self.modulus.get() as f64).powi(-self.exp)
    }

    /// Numerators of `self` and `other` over the common denominator
    /// `d^max(exp)`.
    pub fn aligned(&self, other: &Self) -> (i128, i128, i32) {
        assert_eq!(self.modulus, other.modulus, "ratio moduli differ");
        let exp = self.exp.max(other.exp);
        let d = self.modulus.get() as i128;
        let lift = |r: &Self| r.num * d.pow((exp - r.exp) as u32);
        (lift(self), lift(other), exp)
    }

    /// Numerator over the denominator `d^exp` for `exp >= self.exponent()`.
    pub fn numerator_at(&self, exp: i32) -> i128 {
        assert!(exp >= self.exp || self.num == 0, "exponent too small");
        if self.num == 0 {
            return 0;
        }
        self.num * (self.modulus.get() as i128).pow((exp - self.exp) as u32)
    }
}

impl Add for PowerRatio {
    type Output = PowerRatio;
    fn add(self, rhs: Self) -> Self {
        let (a, b, exp) = self.aligned(&rhs);
        Self::new(self.modulus, a + b, exp)
    }
}

impl Sub for PowerRatio {
    type Output = PowerRatio;
    fn sub(self, rhs: Self) -> Self {
        let (a, b, exp) = self.aligned(&rhs);
        Self::new(self.modulus, a - b, exp)
    }
}

impl Mul for PowerRatio {
    type Output = PowerRatio;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "ratio moduli differ");
        Self::new(self.modulus, self.num * rhs.num, self.exp + rhs.exp)
    }
}

impl std::iter::Sum for PowerRatio {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut iter = iter.peekable();
        let first = match iter.next() {
            Some(r) => r,
            None => panic!("sum of an empty ratio sequence has no modulus"),
        };
        iter.fold(first, |a, b| a + b)
    }
}

impl PartialOrd for PowerRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PowerRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for PowerRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp <= 0 {
            let d = self.modulus.get() as i128;
            write!(f, "{}", self.num * d.pow((-self.exp) as u32))
        } else {
            write!(f, "{}/{}^{}", self.num, self.modulus, self.exp)
        }
    }
}

impl fmt::Debug for PowerRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for PowerRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
