//! Kets over dimension `d` or `d²`, monomial operators `ω^t X^a Z^c (I)`,
//! and a dense matrix path used only as a cross-check oracle.
//!
//! Two-particle layout: slot `n1·d + n2`, particle 1 is the left tensor
//! factor.

use crate::amplitude::Amplitude;
use crate::arith::{PrimeModulus, Residue};
use crate::cyclo::CycloAmplitude;
use crate::error::{Error, Result};
use crate::ratio::PowerRatio;

#[derive(Clone, Debug)]
pub struct Ket<A> {
    modulus: PrimeModulus,
    amps: Vec<A>,
}

pub type ExactKet = Ket<CycloAmplitude>;

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

impl<A: Amplitude> Ket<A> {
    /// `dim` must be `d` or `d²`.
    pub fn from_amps(modulus: PrimeModulus, amps: Vec<A>) -> Result<Self> {
        let d = modulus.as_usize();
        if amps.len() != d && amps.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: amps.len(),
            });
        }
        Ok(Self { modulus, amps })
    }

    pub fn zeros(modulus: PrimeModulus, dim: usize) -> Result<Self> {
        Self::from_amps(modulus, vec![A::zero(modulus); dim])
    }

    /// `|n⟩` in dimension `dim`.
    pub fn basis(modulus: PrimeModulus, dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::IndexOutOfRange { index: n, dim });
        }
        let mut k = Self::zeros(modulus, dim)?;
        k.amps[n] = A::one(modulus);
        Ok(k)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[A] {
        &self.amps
    }

    pub fn amp(&self, slot: usize) -> &A {
        &self.amps[slot]
    }

    /// Amplitude at `|n1⟩|n2⟩` of a two-particle ket.
    pub fn amp2(&self, n1: usize, n2: usize) -> &A {
        &self.amps[n1 * self.modulus.as_usize() + n2]
    }

    pub fn is_pair(&self) -> bool {
        let d = self.modulus.as_usize();
        self.amps.len() == d * d
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let d = self.modulus.as_usize();
        check_dim(d, self.dim())?;
        check_dim(d, other.dim())?;
        let mut amps = Vec::with_capacity(d * d);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a.mul(b));
            }
        }
        Ok(Self {
            modulus: self.modulus,
            amps,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<A> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .filter(|(a, b)| !a.is_zero_within(0.0) && !b.is_zero_within(0.0))
            .fold(A::zero(self.modulus), |acc, (a, b)| {
                acc.add(&a.conj().mul(b))
            }))
    }

    pub fn norm_sqr(&self) -> A {
        self.inner(self).expect("same ket")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            modulus: self.modulus,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            modulus: self.modulus,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn scaled(&self, factor: &A) -> Self {
        Self {
            modulus: self.modulus,
            amps: self.amps.iter().map(|a| factor.mul(a)).collect(),
        }
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| a.close_to(b, tol))
    }

    /// Largest amplitude difference, for residual reporting.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a.to_complex() - b.to_complex()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.norm_sqr().close_to(&A::one(self.modulus), tol)
    }

    /// Indices of nonzero amplitudes.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| !self.amps[i].is_zero_within(tol))
            .collect()
    }

    /// `(⟨bra|⊗𝟙)|self⟩` for a two-particle ket.
    pub fn contract_first(&self, bra: &Self) -> Result<Self> {
        let d = self.modulus.as_usize();
        check_dim(d * d, self.dim())?;
        check_dim(d, bra.dim())?;
        let mut amps = vec![A::zero(self.modulus); d];
        for (n1, b) in bra.amps.iter().enumerate() {
            if b.is_zero_within(0.0) {
                continue;
            }
            let bc = b.conj();
            for (n2, slot) in amps.iter_mut().enumerate() {
                *slot = slot.add(&bc.mul(&self.amps[n1 * d + n2]));
            }
        }
        Ok(Self {
            modulus: self.modulus,
            amps,
        })
    }

    /// `(𝟙⊗op)|self⟩`.
    pub fn apply_second(&self, op: &MonomialOperator) -> Result<Self> {
        let d = self.modulus.as_usize();
        check_dim(d * d, self.dim())?;
        let mut amps = vec![A::zero(self.modulus); d * d];
        for n2 in op.modulus.residues() {
            let (phase, target) = op.action(n2);
            let phase = A::root(phase);
            for n1 in 0..d {
                amps[n1 * d + target.value() as usize] =
                    phase.mul(&self.amps[n1 * d + n2.value() as usize]);
            }
        }
        Ok(Self {
            modulus: self.modulus,
            amps,
        })
    }

    /// Reduced density matrix of particle 1 (`first = true`) or particle 2.
    pub fn reduced_density(&self, first: bool) -> Result<DenseMatrix<A>> {
        let d = self.modulus.as_usize();
        check_dim(d * d, self.dim())?;
        let mut rho = DenseMatrix::zeros(self.modulus, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = A::zero(self.modulus);
                for k in 0..d {
                    let (a, b) = if first {
                        (&self.amps[i * d + k], &self.amps[j * d + k])
                    } else {
                        (&self.amps[k * d + i], &self.amps[k * d + j])
                    };
                    acc = acc.add(&a.mul(&b.conj()));
                }
                rho.set(i, j, acc);
            }
        }
        Ok(rho)
    }

    /// Numerical copy on the floating backend.
    pub fn to_float(&self) -> Ket<num_complex::Complex64> {
        Ket {
            modulus: self.modulus,
            amps: self.amps.iter().map(|a| a.to_complex()).collect(),
        }
    }
}

impl Ket<CycloAmplitude> {
    pub fn norm_sqr_ratio(&self) -> Result<PowerRatio> {
        let n = self.norm_sqr();
        n.to_ratio()
            .ok_or_else(|| Error::NotNormalized(n.to_string()))
    }

    /// Exact `|⟨self|other⟩|²`.
    pub fn overlap_sqr(&self, other: &Self) -> Result<PowerRatio> {
        self.inner(other)?.norm_sqr_ratio()
    }

    /// Rescale a ket whose squared norm is exactly `d^-k` to unit norm.
    pub fn renormalized(&self) -> Result<Self> {
        let n = self.norm_sqr_ratio()?;
        if n.numerator() != 1 {
            return Err(Error::Renormalize(n.to_string()));
        }
        Ok(Self {
            modulus: self.modulus,
            amps: self
                .amps
                .iter()
                .map(|a| a.clone().with_scale_shift(-n.exponent()))
                .collect(),
        })
    }
}

/// `ω^phase · X^x_power · Z^z_power · (inversion if flagged)`, applied
/// right to left: inversion first, then `Z`, then `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MonomialOperator {
    modulus: PrimeModulus,
    pub x_power: Residue,
    pub z_power: Residue,
    pub inverted: bool,
    pub phase: Residue,
}

impl MonomialOperator {
    pub fn new(x_power: Residue, z_power: Residue, inverted: bool, phase: Residue) -> Self {
        x_power.check_same(z_power).expect("operator residues");
        x_power.check_same(phase).expect("operator residues");
        Self {
            modulus: x_power.modulus(),
            x_power,
            z_power,
            inverted,
            phase,
        }
    }

    pub fn identity(p: PrimeModulus) -> Self {
        Self::new(p.zero(), p.zero(), false, p.zero())
    }

    /// Shift `X|n⟩ = |n+1⟩`.
    pub fn shift(p: PrimeModulus) -> Self {
        Self::new(p.one(), p.zero(), false, p.zero())
    }

    /// Clock `Z|n⟩ = ω^n|n⟩`.
    pub fn clock(p: PrimeModulus) -> Self {
        Self::new(p.zero(), p.one(), false, p.zero())
    }

    /// Inversion `|n⟩ ↦ |-n⟩`.
    pub fn inversion(p: PrimeModulus) -> Self {
        Self::new(p.zero(), p.zero(), true, p.zero())
    }

    /// `X^a Z^c`.
    pub fn weyl(a: Residue, c: Residue) -> Self {
        Self::new(a, c, false, a.modulus().zero())
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Where `|n⟩` goes: `op|n⟩ = ω^phase |target⟩`.
    pub fn action(&self, n: Residue) -> (Residue, Residue) {
        let n1 = if self.inverted { -n } else { n };
        (self.phase + self.z_power * n1, n1 + self.x_power)
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        // Move self's inversion through other's X and Z, then commute
        // Z^c1 past X^a2 using Z X = ω X Z.
        let (a2, c2) = if self.inverted {
            (-other.x_power, -other.z_power)
        } else {
            (other.x_power, other.z_power)
        };
        Self::new(
            self.x_power + a2,
            self.z_power + c2,
            self.inverted ^ other.inverted,
            self.phase + other.phase + self.z_power * a2,
        )
    }

    pub fn adjoint(&self) -> Self {
        // (ω^t X^a Z^c I^s)† = ω^(-t) I^s Z^-c X^-a = ω^(ca - t) I^s X^-a Z^-c
        let inner = Self::new(
            -self.x_power,
            -self.z_power,
            false,
            self.z_power * self.x_power - self.phase,
        );
        if self.inverted {
            Self::inversion(self.modulus).compose(&inner)
        } else {
            inner
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(self.modulus), |acc, _| acc.compose(self))
    }

    pub fn apply<A: Amplitude>(&self, ket: &Ket<A>) -> Result<Ket<A>> {
        let d = self.modulus.as_usize();
        check_dim(d, ket.dim())?;
        let mut amps = vec![A::zero(self.modulus); d];
        for n in self.modulus.residues() {
            let (phase, target) = self.action(n);
            amps[target.value() as usize] = A::root(phase).mul(&ket.amps[n.value() as usize]);
        }
        Ok(Ket {
            modulus: self.modulus,
            amps,
        })
    }

    pub fn to_dense<A: Amplitude>(&self) -> DenseMatrix<A> {
        let d = self.modulus.as_usize();
        let mut m = DenseMatrix::zeros(self.modulus, d);
        for n in self.modulus.residues() {
            let (phase, target) = self.action(n);
            m.set(target.value() as usize, n.value() as usize, A::root(phase));
        }
        m
    }
}

/// Square dense matrix, row-major. Oracle path only.
#[derive(Clone, Debug)]
pub struct DenseMatrix<A> {
    modulus: PrimeModulus,
    dim: usize,
    data: Vec<A>,
}

impl<A: Amplitude> DenseMatrix<A> {
    pub fn zeros(modulus: PrimeModulus, dim: usize) -> Self {
        Self {
            modulus,
            dim,
            data: vec![A::zero(modulus); dim * dim],
        }
    }

    pub fn identity(modulus: PrimeModulus, dim: usize) -> Self {
        let mut m = Self::zeros(modulus, dim);
        for i in 0..dim {
            m.set(i, i, A::one(modulus));
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Ket<A>, b: &Ket<A>) -> Self {
        let dim = a.dim();
        let mut m = Self::zeros(a.modulus, dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, a.amps[i].mul(&b.amps[j].conj()));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &A {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: A) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            modulus: self.modulus,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            modulus: self.modulus,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scaled(&self, factor: &A) -> Self {
        Self {
            modulus: self.modulus,
            dim: self.dim,
            data: self.data.iter().map(|a| factor.mul(a)).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(self.modulus, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero_within(0.0) {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero_within(0.0) {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, ket: &Ket<A>) -> Result<Ket<A>> {
        check_dim(self.dim, ket.dim())?;
        let amps = (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(A::zero(self.modulus), |acc, j| {
                    acc.add(&self.get(i, j).mul(&ket.amps[j]))
                })
            })
            .collect();
        Ok(Ket {
            modulus: self.modulus,
            amps,
        })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(self.modulus, n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(self.modulus, n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if a.is_zero_within(0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.set(i * m + k, j * m + l, a.mul(other.get(k, l)));
                    }
                }
            }
        }
        out
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.close_to(b, tol))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.to_complex() - b.to_complex()).norm())
            .fold(0.0, f64::max)
    }

    /// Every row and column has exactly one nonzero entry.
    pub fn is_generalized_permutation(&self) -> bool {
        let n = self.dim;
        let row_ok = (0..n).all(|i| (0..n).filter(|&j| !self.get(i, j).is_zero_within(1e-12)).count() == 1);
        let col_ok = (0..n).all(|j| (0..n).filter(|&i| !self.get(i, j).is_zero_within(1e-12)).count() == 1);
        row_ok && col_ok
    }
}
