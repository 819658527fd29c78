//! The `d + 1` mutually unbiased bases of a prime dimension.
//!
//! Basis `b ∈ Z_d` holds the states
//! `|m;b⟩ = d^(-1/2) Σ_n ω^((b/2)·n(n-1) - n·m) |n⟩`, with the exponent
//! evaluated in `Z_d` and `b/2 = b·2⁻¹`. The computational basis is a
//! separate label ([`BasisLabel::Computational`]); it is not `b = 0` and not
//! `b = -1`, and takes no part in `Z_d` arithmetic.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::amplitude::Amplitude;
use crate::arith::{PrimeModulus, Residue};
use crate::cyclo::CycloAmplitude;
use crate::error::{Error, Result};
use crate::hilbert::{DenseMatrix, Ket, MonomialOperator};
use crate::ratio::PowerRatio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    /// The eigenbasis of `Z`, drawn as the leftmost column.
    Computational,
    Numeric(Residue),
}

impl BasisLabel {
    /// All `d + 1` labels in column order: computational basis, then `0..d`.
    pub fn all(p: PrimeModulus) -> impl Iterator<Item = BasisLabel> + Clone {
        std::iter::once(BasisLabel::Computational).chain(p.residues().map(BasisLabel::Numeric))
    }

    pub fn numeric(self) -> Option<Residue> {
        match self {
            BasisLabel::Numeric(b) => Some(b),
            BasisLabel::Computational => None,
        }
    }

    pub fn is_computational(self) -> bool {
        matches!(self, BasisLabel::Computational)
    }

    /// Column position: 0 for the computational basis, `b + 1` otherwise.
    pub fn column(self) -> usize {
        match self {
            BasisLabel::Computational => 0,
            BasisLabel::Numeric(b) => b.value() as usize + 1,
        }
    }

    pub fn from_column(p: PrimeModulus, column: usize) -> Self {
        match column {
            0 => BasisLabel::Computational,
            c => BasisLabel::Numeric(p.residue(c as i64 - 1)),
        }
    }

    /// Parse `"CB"` or a number.
    pub fn parse(p: PrimeModulus, s: &str) -> Option<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("cb") {
            return Some(BasisLabel::Computational);
        }
        let v: u32 = s.parse().ok()?;
        (v < p.get()).then(|| BasisLabel::Numeric(p.residue(v as i64)))
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Computational => write!(f, "CB"),
            BasisLabel::Numeric(b) => write!(f, "{b}"),
        }
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BasisLabel::Computational => s.serialize_str("CB"),
            BasisLabel::Numeric(b) => s.serialize_u32(b.value()),
        }
    }
}

/// State `m` of basis `b`; also a point `(m, b)` of the geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MubIndex {
    pub m: Residue,
    pub b: BasisLabel,
}

impl MubIndex {
    pub fn new(m: Residue, b: BasisLabel) -> Self {
        if let BasisLabel::Numeric(b) = b {
            m.check_same(b).expect("index residues");
        }
        Self { m, b }
    }

    pub fn numeric(m: Residue, b: Residue) -> Self {
        Self::new(m, BasisLabel::Numeric(b))
    }

    pub fn computational(m: Residue) -> Self {
        Self::new(m, BasisLabel::Computational)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.m.modulus()
    }

    /// Every index, column by column.
    pub fn all(p: PrimeModulus) -> impl Iterator<Item = MubIndex> + Clone {
        BasisLabel::all(p).flat_map(move |b| p.residues().map(move |m| MubIndex::new(m, b)))
    }
}

impl fmt::Display for MubIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.b)
    }
}

impl Serialize for MubIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The conjugate partner: `(d-m, d-b)`; the computational column is fixed.
pub fn tilde(idx: MubIndex) -> MubIndex {
    match idx.b {
        BasisLabel::Computational => idx,
        BasisLabel::Numeric(b) => MubIndex::numeric(-idx.m, -b),
    }
}

/// Exponent of `ω` in `⟨n|m;b⟩·√d`.
pub fn state_exponent(m: Residue, b: Residue, n: Residue) -> Residue {
    b.half() * n * (n - n.modulus().one()) - n * m
}

pub fn mub_state<A: Amplitude>(idx: MubIndex) -> Ket<A> {
    let p = idx.modulus();
    match idx.b {
        BasisLabel::Computational => {
            Ket::basis(p, p.as_usize(), idx.m.value() as usize).expect("index in range")
        }
        BasisLabel::Numeric(b) => {
            let norm = A::inv_sqrt_d(p);
            let amps = p
                .residues()
                .map(|n| A::root(state_exponent(idx.m, b, n)).mul(&norm))
                .collect();
            Ket::from_amps(p, amps).expect("dimension d")
        }
    }
}

/// Whether `X Z^b |m;b⟩ = ω^m |m;b⟩` holds for the given ket.
pub fn eigenrelation_holds<A: Amplitude>(idx: MubIndex, state: &Ket<A>, tol: f64) -> Result<bool> {
    let b = idx.b.numeric().ok_or(Error::ComputationalBasis)?;
    let p = idx.modulus();
    let op = MonomialOperator::shift(p).compose(&MonomialOperator::clock(p).pow(b.value()));
    let lhs = op.apply(state)?;
    let rhs = state.scaled(&A::root(idx.m));
    Ok(lhs.close_to(&rhs, tol))
}

pub fn check_eigenrelation<A: Amplitude>(idx: MubIndex, tol: f64) -> Result<bool> {
    eigenrelation_holds(idx, &mub_state::<A>(idx), tol)
}

/// Exact `|⟨i1|i2⟩|²`.
pub fn overlap_magnitude_squared(i1: MubIndex, i2: MubIndex) -> Result<PowerRatio> {
    mub_state::<CycloAmplitude>(i1).overlap_sqr(&mub_state(i2))
}

/// `⟨n|m;b⟩⟨m;b|n'⟩ = d⁻¹ ω^((n-n')[(b/2)(n+n'-1) - m])` for numeric `b`.
pub fn projector_element<A: Amplitude>(idx: MubIndex, n: Residue, n2: Residue) -> Result<A> {
    let b = idx.b.numeric().ok_or(Error::ComputationalBasis)?;
    let p = idx.modulus();
    let exponent = (n - n2) * (b.half() * (n + n2 - p.one()) - idx.m);
    let inv = A::inv_sqrt_d(p);
    Ok(A::root(exponent).mul(&inv).mul(&inv))
}

/// Computational-basis projector element `δ_{n,m} δ_{n,n'}`.
pub fn cb_projector_element<A: Amplitude>(m: Residue, n: Residue, n2: Residue) -> A {
    let p = m.modulus();
    if n == m && n2 == m {
        A::one(p)
    } else {
        A::zero(p)
    }
}

/// Projector element for any label.
pub fn any_projector_element<A: Amplitude>(idx: MubIndex, n: Residue, n2: Residue) -> A {
    match idx.b {
        BasisLabel::Computational => cb_projector_element(idx.m, n, n2),
        BasisLabel::Numeric(_) => projector_element(idx, n, n2).expect("numeric basis"),
    }
}

/// Dense `|m;b⟩⟨m;b|` built from the state vector.
pub fn projector_dense<A: Amplitude>(idx: MubIndex) -> DenseMatrix<A> {
    let k = mub_state::<A>(idx);
    DenseMatrix::outer(&k, &k)
}

/// All `d(d+1)` states, column by column, built once.
#[derive(Clone, Debug)]
pub struct MubSet<A> {
    modulus: PrimeModulus,
    states: Vec<(MubIndex, Ket<A>)>,
}

impl<A: Amplitude> MubSet<A> {
    pub fn new(p: PrimeModulus) -> Self {
        Self {
            modulus: p,
            states: MubIndex::all(p).map(|i| (i, mub_state(i))).collect(),
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn iter(&self) -> impl Iterator<Item = &(MubIndex, Ket<A>)> {
        self.states.iter()
    }

    pub fn state(&self, idx: MubIndex) -> &Ket<A> {
        let d = self.modulus.as_usize();
        &self.states[idx.b.column() * d + idx.m.value() as usize].1
    }

    pub fn basis(&self, b: BasisLabel) -> &[(MubIndex, Ket<A>)] {
        let d = self.modulus.as_usize();
        &self.states[b.column() * d..(b.column() + 1) * d]
    }
}
