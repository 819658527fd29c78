//! Exact verification engine for mutually unbiased bases in odd prime
//! dimension, their dual affine plane coordinatization, the maximally
//! entangled line states it induces on two qudits, and the Mean King
//! retrodiction protocol built on them.

pub mod amplitude;
pub mod arith;
pub mod cyclo;
pub mod dapg;
pub mod error;
pub mod hilbert;
pub mod meanking;
pub mod mub;
#[cfg(test)]
mod props;
pub mod ratio;
pub mod states;
pub mod verify;

pub use amplitude::Amplitude;
pub use arith::{PrimeModulus, Residue};
pub use cyclo::CycloAmplitude;
pub use error::{ArithError, Error, Result};
pub use hilbert::{DenseMatrix, ExactKet, Ket, MonomialOperator};
pub use ratio::PowerRatio;
pub use dapg::{Incidence, Line, Point};
pub use mub::{BasisLabel, MubIndex};
pub use meanking::{DeductionRule, OutcomeTable, Preparation, ProtocolEngine, ProtocolOptions};
pub use verify::{Backend, Check, VerifyReport, PINNED_CONVENTIONS};
