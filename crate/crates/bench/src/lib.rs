//! Shared fixtures for the criterion benches.

use kingsline::arith::prime;
use kingsline::meanking::{DeductionRule, Preparation, ProtocolEngine, ProtocolOptions};
use kingsline::{Line, PrimeModulus};

pub fn modulus(d: u32) -> PrimeModulus {
    prime(d)
}

/// Engine for the certified strategy.
pub fn balanced_engine(d: u32) -> ProtocolEngine {
    ProtocolEngine::new(prime(d), Preparation::Balanced, DeductionRule::LineRule, ProtocolOptions::default())
        .expect("balanced preparation supports the line rule")
}

/// Engine for the literal strategy on the line `(1, 2)`.
pub fn literal_engine(d: u32) -> ProtocolEngine {
    let p = prime(d);
    let j = Line::new(p.one(), p.residue(2));
    ProtocolEngine::new(p, Preparation::LineVector(j), DeductionRule::Literal, ProtocolOptions::default())
        .expect("line preparation supports the literal rule")
}
