//! Amplitude backends.
//!
//! The exact backend is [`CycloAmplitude`]; the floating backend is
//! [`Complex64`]. Constructions in `mub` and `states` are generic over
//! [`Amplitude`] so both backends compute every quantity independently.

use std::fmt::Debug;

use num_complex::Complex64;

use crate::arith::{PrimeModulus, Residue};
use crate::cyclo::CycloAmplitude;

pub trait Amplitude: Clone + Debug + Send + Sync + 'static {
    /// `true` for the exact backend; tolerances are then ignored.
    const EXACT: bool;
    const NAME: &'static str;

    fn zero(p: PrimeModulus) -> Self;
    fn one(p: PrimeModulus) -> Self;
    /// `ω^t`.
    fn root(t: Residue) -> Self;
    /// `1/√d`.
    fn inv_sqrt_d(p: PrimeModulus) -> Self;
    /// `√d`.
    fn sqrt_d(p: PrimeModulus) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn to_complex(&self) -> Complex64;

    /// Equality: exact for the exact backend, within `tol` otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    fn is_zero_within(&self, tol: f64) -> bool;
}

impl Amplitude for CycloAmplitude {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero(p: PrimeModulus) -> Self {
        CycloAmplitude::zero(p)
    }

    fn one(p: PrimeModulus) -> Self {
        CycloAmplitude::one(p)
    }

    fn root(t: Residue) -> Self {
        CycloAmplitude::root_power(t)
    }

    fn inv_sqrt_d(p: PrimeModulus) -> Self {
        CycloAmplitude::inv_sqrt_d(p)
    }

    fn sqrt_d(p: PrimeModulus) -> Self {
        CycloAmplitude::one(p).with_scale_shift(-1)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn neg(&self) -> Self {
        -self.clone()
    }

    fn conj(&self) -> Self {
        CycloAmplitude::conj(self)
    }

    fn to_complex(&self) -> Complex64 {
        CycloAmplitude::to_complex(self)
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Amplitude for Complex64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn zero(_p: PrimeModulus) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one(_p: PrimeModulus) -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn root(t: Residue) -> Self {
        let d = t.modulus().get() as f64;
        Complex64::from_polar(1.0, std::f64::consts::TAU * t.value() as f64 / d)
    }

    fn inv_sqrt_d(p: PrimeModulus) -> Self {
        Complex64::new(1.0 / (p.get() as f64).sqrt(), 0.0)
    }

    fn sqrt_d(p: PrimeModulus) -> Self {
        Complex64::new((p.get() as f64).sqrt(), 0.0)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
}
