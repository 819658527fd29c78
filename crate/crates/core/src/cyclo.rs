//! Exact amplitudes in `Z[ω_d] · d^(-k/2)`.
//!
//! Elements are stored on the integral basis `ω^0, ..., ω^(d-2)`; the
//! relation `1 + ω + ... + ω^(d-1) = 0` eliminates `ω^(d-1)`. A value also
//! carries a scale `k` standing for an overall factor `d^(-k/2)`.
//!
//! Canonical form: zero is all-zero coefficients at scale 0, and a nonzero
//! value never has every coefficient divisible by `d` (such a factor is moved
//! into the scale). Two canonical values with scales of equal parity are
//! equal iff they are structurally equal. Scales of different parity are
//! reconciled with the quadratic Gauss sum, which equals `+√d` when
//! `d ≡ 1 (mod 4)`; for `d ≡ 3 (mod 4)`, `√d` is not in `Q(ω_d)` and mixed
//! parity values are only equal when both are zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::arith::{PrimeModulus, Residue};
use crate::error::{ArithError, Result};
use crate::ratio::PowerRatio;

#[derive(Clone)]
pub struct CycloAmplitude {
    modulus: PrimeModulus,
    coeffs: Vec<i128>,
    scale: i32,
}

fn overflow() -> ArithError {
    ArithError::Overflow
}

fn cmul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| overflow().into())
}

fn cadd(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(|| overflow().into())
}

impl CycloAmplitude {
    pub fn zero(modulus: PrimeModulus) -> Self {
        Self {
            modulus,
            coeffs: vec![0; modulus.as_usize() - 1],
            scale: 0,
        }
    }

    pub fn one(modulus: PrimeModulus) -> Self {
        Self::from_int(modulus, 1)
    }

    pub fn from_int(modulus: PrimeModulus, n: i128) -> Self {
        let mut raw = vec![0; modulus.as_usize()];
        raw[0] = n;
        Self::from_raw(modulus, raw, 0)
    }

    /// `ω^t` with scale 0.
    pub fn root_power(t: Residue) -> Self {
        let modulus = t.modulus();
        let mut raw = vec![0; modulus.as_usize()];
        raw[t.value() as usize] = 1;
        Self::from_raw(modulus, raw, 0)
    }

    /// `d^(-1/2)`.
    pub fn inv_sqrt_d(modulus: PrimeModulus) -> Self {
        Self::one(modulus).with_scale_shift(1)
    }

    /// Build from `d` raw coefficients on `ω^0 .. ω^(d-1)` (not necessarily
    /// reduced) and a scale.
    pub fn from_raw(modulus: PrimeModulus, raw: Vec<i128>, scale: i32) -> Self {
        assert_eq!(raw.len(), modulus.as_usize(), "raw coefficient length");
        let top = raw[raw.len() - 1];
        let coeffs: Vec<i128> = raw[..raw.len() - 1].iter().map(|c| c - top).collect();
        let mut out = Self {
            modulus,
            coeffs,
            scale,
        };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        if self.coeffs.iter().all(|&c| c == 0) {
            self.scale = 0;
            return;
        }
        let d = self.modulus.get() as i128;
        while self.coeffs.iter().all(|&c| c % d == 0) {
            for c in &mut self.coeffs {
                *c /= d;
            }
            self.scale -= 2;
        }
    }

    /// Multiply by `d^(-shift/2)`.
    pub fn with_scale_shift(mut self, shift: i32) -> Self {
        if !self.is_zero() {
            self.scale += shift;
        }
        self
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Coefficients on `ω^0 .. ω^(d-2)`.
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check_modulus(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(ArithError::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            }
            .into());
        }
        Ok(())
    }

    /// Quadratic Gauss sum `Σ_t ω^(t²)` as raw coefficients.
    fn gauss_sum_raw(modulus: PrimeModulus) -> Vec<i128> {
        let d = modulus.as_usize();
        let mut raw = vec![0; d];
        for t in 0..d {
            raw[t * t % d] += 1;
        }
        raw
    }

    /// Re-express an odd-scale value at even scale using `√d = g` (only
    /// valid when `d ≡ 1 mod 4`).
    fn to_even_scale(&self) -> Result<Self> {
        if self.scale % 2 == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        if !self.modulus.minus_one_is_square() {
            return Err(ArithError::ScaleParity {
                d: self.modulus.get(),
                left: self.scale,
                right: self.scale + 1,
            }
            .into());
        }
        let g = Self::from_raw(self.modulus, Self::gauss_sum_raw(self.modulus), 0);
        // x·d^(-k/2) = x·g·d^(-(k+1)/2)
        let mut out = self.try_mul(&g)?;
        out.scale += 1;
        Ok(out)
    }

    /// Bring two values to a common scale; returns coefficient vectors at that
    /// scale.
    fn aligned(&self, other: &Self) -> Result<(Vec<i128>, Vec<i128>, i32)> {
        self.check_modulus(other)?;
        if self.is_zero() {
            return Ok((vec![0; other.coeffs.len()], other.coeffs.clone(), other.scale));
        }
        if other.is_zero() {
            return Ok((self.coeffs.clone(), vec![0; self.coeffs.len()], self.scale));
        }
        let (a, b) = if (self.scale - other.scale) % 2 != 0 {
            if !self.modulus.minus_one_is_square() {
                return Err(ArithError::ScaleParity {
                    d: self.modulus.get(),
                    left: self.scale,
                    right: other.scale,
                }
                .into());
            }
            (self.to_even_scale()?, other.to_even_scale()?)
        } else {
            (self.clone(), other.clone())
        };
        let scale = a.scale.max(b.scale);
        let lift = |v: &Self| -> Result<Vec<i128>> {
            let steps = (scale - v.scale) / 2;
            let d = v.modulus.get() as i128;
            let mut factor: i128 = 1;
            for _ in 0..steps {
                factor = cmul(factor, d)?;
            }
            v.coeffs.iter().map(|&c| cmul(c, factor)).collect()
        };
        Ok((lift(&a)?, lift(&b)?, scale))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let (a, b, scale) = self.aligned(other)?;
        let mut raw = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| cadd(x, y))
            .collect::<Result<Vec<_>>>()?;
        raw.push(0);
        Ok(Self::from_raw(self.modulus, raw, scale))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_modulus(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.modulus));
        }
        let d = self.modulus.as_usize();
        let mut raw = vec![0i128; d];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let slot = (i + j) % d;
                raw[slot] = cadd(raw[slot], cmul(x, y)?)?;
            }
        }
        Ok(Self::from_raw(self.modulus, raw, self.scale + other.scale))
    }

    /// Complex conjugate: `ω^t ↦ ω^(d-t)`.
    pub fn conj(&self) -> Self {
        let d = self.modulus.as_usize();
        let mut raw = vec![0i128; d];
        for (t, &c) in self.coeffs.iter().enumerate() {
            raw[(d - t) % d] = c;
        }
        Self::from_raw(self.modulus, raw, self.scale)
    }

    /// Evaluate at `ω = e^(2πi/d)` and apply `d^(-k/2)`.
    pub fn to_complex(&self) -> Complex64 {
        let d = self.modulus.get() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc += Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / d) * c as f64;
            }
        }
        acc * d.powf(-(self.scale as f64) / 2.0)
    }

    /// The value as an exact rational `n / d^k`, when it is one.
    pub fn to_ratio(&self) -> Option<PowerRatio> {
        if self.is_zero() {
            return Some(PowerRatio::zero(self.modulus));
        }
        if self.coeffs[1..].iter().any(|&c| c != 0) || self.scale % 2 != 0 {
            return None;
        }
        Some(PowerRatio::new(self.modulus, self.coeffs[0], self.scale / 2))
    }

    /// `|a|²` as an exact rational, if it is one.
    pub fn norm_sqr_ratio(&self) -> Result<PowerRatio> {
        self.try_mul(&self.conj())?
            .to_ratio()
            .ok_or_else(|| ArithError::NotRational.into())
    }

    /// If the value is `c · ω^t · d^(-k/2)`, returns `(c, t)`.
    pub fn as_monomial(&self) -> Option<(i128, u32)> {
        let nonzero: Vec<usize> = (0..self.coeffs.len())
            .filter(|&i| self.coeffs[i] != 0)
            .collect();
        match nonzero.len() {
            1 => Some((self.coeffs[nonzero[0]], nonzero[0] as u32)),
            n if n == self.coeffs.len() && self.coeffs.iter().all(|&c| c == self.coeffs[0]) => {
                Some((-self.coeffs[0], self.modulus.get() - 1))
            }
            _ => None,
        }
    }

    pub fn try_eq(&self, other: &Self) -> Result<bool> {
        self.check_modulus(other)?;
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ok(true),
            (true, false) | (false, true) => return Ok(false),
            _ => {}
        }
        if (self.scale - other.scale) % 2 == 0 {
            return Ok(self.scale == other.scale && self.coeffs == other.coeffs);
        }
        if !self.modulus.minus_one_is_square() {
            return Ok(false);
        }
        let a = self.to_even_scale()?;
        let b = other.to_even_scale()?;
        Ok(a.scale == b.scale && a.coeffs == b.coeffs)
    }
}

impl PartialEq for CycloAmplitude {
    fn eq(&self, other: &Self) -> bool {
        self.try_eq(other).unwrap_or(false)
    }
}

impl Add for CycloAmplitude {
    type Output = CycloAmplitude;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("cyclotomic addition")
    }
}

impl<'a> Add<&'a CycloAmplitude> for &'a CycloAmplitude {
    type Output = CycloAmplitude;
    fn add(self, rhs: Self) -> CycloAmplitude {
        self.try_add(rhs).expect("cyclotomic addition")
    }
}

impl Sub for CycloAmplitude {
    type Output = CycloAmplitude;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for CycloAmplitude {
    type Output = CycloAmplitude;
    fn neg(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = -*c;
        }
        self
    }
}

impl Mul for CycloAmplitude {
    type Output = CycloAmplitude;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("cyclotomic multiplication")
    }
}

impl<'a> Mul<&'a CycloAmplitude> for &'a CycloAmplitude {
    type Output = CycloAmplitude;
    fn mul(self, rhs: Self) -> CycloAmplitude {
        self.try_mul(rhs).expect("cyclotomic multiplication")
    }
}

impl fmt::Debug for CycloAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        if let Some((c, t)) = self.as_monomial() {
            terms.push(match t {
                0 => format!("{c}"),
                _ => format!("{c}w^{t}"),
            });
        } else {
            for (t, &c) in self.coeffs.iter().enumerate() {
                if c != 0 {
                    terms.push(match t {
                        0 => format!("{c}"),
                        _ => format!("{c}w^{t}"),
                    });
                }
            }
        }
        let body = terms.join(" + ");
        match self.scale {
            0 => write!(f, "{body}"),
            k => write!(f, "({body})·{}^(-{k}/2)", self.modulus),
        }
    }
}
