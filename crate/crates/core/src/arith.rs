//! Prime-field residues.
//!
//! Every index in the engine (computational-basis labels, MUB state labels,
//! basis labels, line parameters) lives in `Z_d` for an odd prime `d`.
//! Fractions such as `b/2` always mean multiplication by the inverse of two.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ArithError, Result};

/// Largest dimension the engine accepts.
pub const MAX_DIMENSION: u32 = 97;

/// A validated odd prime dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    /// Validate `d` as an odd prime in `3..=MAX_DIMENSION`.
    pub fn new(d: u32) -> Result<Self> {
        if d == 2 {
            return Err(ArithError::IsTwo.into());
        }
        if d > MAX_DIMENSION {
            return Err(ArithError::OutOfRange(d).into());
        }
        if !is_prime(d) {
            return Err(ArithError::NotPrime(d).into());
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// The residue with the given value, reduced mod d.
    pub fn residue(self, value: i64) -> Residue {
        Residue {
            value: value.rem_euclid(self.0 as i64) as u32,
            modulus: self,
        }
    }

    pub fn zero(self) -> Residue {
        self.residue(0)
    }

    pub fn one(self) -> Residue {
        self.residue(1)
    }

    /// All residues `0, 1, ..., d-1` in order.
    pub fn residues(self) -> impl Iterator<Item = Residue> + Clone {
        (0..self.0).map(move |v| Residue {
            value: v,
            modulus: self,
        })
    }

    /// Inverse of two, i.e. `(d + 1) / 2`.
    pub fn inv_two(self) -> Residue {
        self.residue(self.0.div_ceil(2) as i64)
    }

    /// Legendre symbol of -1: `+1` when `d ≡ 1 (mod 4)`, `-1` otherwise.
    pub fn minus_one_is_square(self) -> bool {
        self.0 % 4 == 1
    }
}

impl TryFrom<u32> for PrimeModulus {
    type Error = crate::error::Error;

    fn try_from(d: u32) -> Result<Self> {
        Self::new(d)
    }
}

impl From<PrimeModulus> for u32 {
    fn from(p: PrimeModulus) -> u32 {
        p.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Validate a convenience constructor for tests and examples.
///
/// Panics if `d` is not a supported odd prime.
pub fn prime(d: u32) -> PrimeModulus {
    PrimeModulus::new(d).expect("invalid dimension")
}

/// An element of `Z_d`, always kept reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue {
    value: u32,
    modulus: PrimeModulus,
}

impl Residue {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse via Fermat, `x^(d-2)`.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(ArithError::ZeroDivision.into());
        }
        Ok(self.pow(self.modulus.0 - 2))
    }

    /// `x / 2`, i.e. `x · inv(2)`.
    pub fn half(self) -> Self {
        self * self.modulus.inv_two()
    }

    pub fn pow(self, mut e: u32) -> Self {
        let d = self.modulus.0 as u64;
        let mut base = self.value as u64;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % d;
            }
            base = base * base % d;
            e >>= 1;
        }
        Residue {
            value: acc as u32,
            modulus: self.modulus,
        }
    }

    /// Same-modulus check used by the fallible arithmetic entry points.
    pub fn check_same(self, other: Residue) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(ArithError::ModulusMismatch {
                left: self.modulus.0,
                right: other.modulus.0,
            }
            .into());
        }
        Ok(())
    }

    pub fn try_add(self, other: Residue) -> Result<Residue> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn try_mul(self, other: Residue) -> Result<Residue> {
        self.check_same(other)?;
        Ok(self * other)
    }

    #[inline]
    fn assert_same(self, other: Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "residues of different moduli mixed"
        );
    }
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus.0)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        self.assert_same(rhs);
        let d = self.modulus.0;
        let s = self.value + rhs.value;
        Residue {
            value: if s >= d { s - d } else { s },
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        self + (-rhs)
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        let d = self.modulus.0;
        Residue {
            value: if self.value == 0 { 0 } else { d - self.value },
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        self.assert_same(rhs);
        let d = self.modulus.0 as u64;
        Residue {
            value: (self.value as u64 * rhs.value as u64 % d) as u32,
            modulus: self.modulus,
        }
    }
}

impl Add<u32> for Residue {
    type Output = Residue;
    fn add(self, rhs: u32) -> Residue {
        self + self.modulus.residue(rhs as i64)
    }
}

impl Mul<u32> for Residue {
    type Output = Residue;
    fn mul(self, rhs: u32) -> Residue {
        self * self.modulus.residue(rhs as i64)
    }
}
