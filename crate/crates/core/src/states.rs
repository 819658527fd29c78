//! Two-qudit states carried by the geometry.
//!
//! A point `(m, b)` carries the product state `|m,b⟩|m̃,b̃⟩`, and every
//! column of points sums to the same balanced state `R = Σ_n |n⟩|n⟩`. A line
//! `j` carries `|P_j⟩ = d^(-1/2) (Σ_{α∈j} |A_α⟩ - R)`, a maximally entangled
//! state; the `d²` line states form an orthonormal basis.
//!
//! The sum-over-points construction is the definition. The closed form
//! `ω^(2m̈m(0)) d^(-1/2) Σ_n |n⟩ X^(2m̈) Z^(2m(0)) I |n⟩` and the coefficient
//! formula `δ_{n+n',2m̈} ω^(∓(n-n')m(0))` are checked against it.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::Amplitude;
use crate::arith::{PrimeModulus, Residue};
use crate::cyclo::CycloAmplitude;
use crate::dapg::{line_points, Line, Point};
use crate::error::Result;
use crate::hilbert::{DenseMatrix, Ket, MonomialOperator};
use crate::mub::{any_projector_element, mub_state, tilde, BasisLabel};
use crate::ratio::PowerRatio;

#[derive(Clone, Debug)]
pub struct ProductState<A> {
    pub point: Point,
    pub ket: Ket<A>,
}

#[derive(Clone, Debug)]
pub struct LineState<A> {
    pub line: Line,
    pub ket: Ket<A>,
}

/// `Σ_n |n⟩|n⟩`, unnormalized (squared norm `d`).
#[derive(Clone, Debug)]
pub struct BalancedState<A> {
    pub ket: Ket<A>,
}

pub fn product_state<A: Amplitude>(pt: Point) -> ProductState<A> {
    let ket = mub_state::<A>(pt)
        .tensor(&mub_state(tilde(pt)))
        .expect("single-particle kets");
    ProductState { point: pt, ket }
}

pub fn balanced_state<A: Amplitude>(p: PrimeModulus) -> BalancedState<A> {
    let d = p.as_usize();
    let mut amps = vec![A::zero(p); d * d];
    for n in 0..d {
        amps[n * d + n] = A::one(p);
    }
    BalancedState {
        ket: Ket::from_amps(p, amps).expect("dimension d²"),
    }
}

/// `Σ_m |A_(m,b)⟩` over one column.
pub fn column_sum<A: Amplitude>(p: PrimeModulus, b: BasisLabel) -> Ket<A> {
    p.residues()
        .map(|m| product_state::<A>(Point::new(m, b)).ket)
        .reduce(|a, k| a.add(&k).expect("same dimension"))
        .expect("d > 0")
}

pub fn line_state_geometric<A: Amplitude>(j: Line) -> LineState<A> {
    let p = j.modulus();
    let sum = line_points(j)
        .into_iter()
        .map(|pt| product_state::<A>(pt).ket)
        .reduce(|a, k| a.add(&k).expect("same dimension"))
        .expect("d+1 points");
    let ket = sum
        .sub(&balanced_state::<A>(p).ket)
        .expect("same dimension")
        .scaled(&A::inv_sqrt_d(p));
    LineState { line: j, ket }
}

/// `X^(2m̈) Z^(2m(0)) I`.
pub fn line_monomial(j: Line) -> MonomialOperator {
    let p = j.modulus();
    MonomialOperator::new(j.mddot * 2, j.m0 * 2, true, p.zero())
}

pub fn line_state_closed<A: Amplitude>(j: Line) -> LineState<A> {
    let p = j.modulus();
    let prefactor = A::root(j.mddot * j.m0 * 2).mul(&A::inv_sqrt_d(p));
    let ket = balanced_state::<A>(p)
        .ket
        .apply_second(&line_monomial(j))
        .expect("dimension d²")
        .scaled(&prefactor);
    LineState { line: j, ket }
}

/// Sign of the exponent in the line-state coefficient
/// `δ_{n+n',2m̈} ω^(±(n-n')m(0))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSign {
    /// `ω^(-(n-n')m(0))`, as written for the line state itself.
    Minus,
    /// `ω^(+(n-n')m(0))`, as written for the line-sum matrix.
    Plus,
}

impl ExponentSign {
    pub fn apply(self, r: Residue) -> Residue {
        match self {
            ExponentSign::Minus => -r,
            ExponentSign::Plus => r,
        }
    }
}

/// The sign validated by exact comparison against the sum-over-points
/// construction (see `resolve_exponent_sign`); pinned here as a regression
/// value.
pub const RESOLVED_EXPONENT_SIGN: ExponentSign = ExponentSign::Minus;

/// `δ_{n+n',2m̈} ω^(±(n-n')m(0))`.
pub fn line_coefficient<A: Amplitude>(j: Line, n: Residue, n2: Residue, sign: ExponentSign) -> A {
    if n + n2 != j.mddot * 2 {
        return A::zero(j.modulus());
    }
    A::root(sign.apply((n - n2) * j.m0))
}

/// Line state from the coefficient formula, with the given exponent sign.
pub fn line_state_formula<A: Amplitude>(j: Line, sign: ExponentSign) -> LineState<A> {
    let p = j.modulus();
    let norm = A::inv_sqrt_d(p);
    let amps = p
        .residues()
        .flat_map(|n| p.residues().map(move |n2| (n, n2)))
        .map(|(n, n2)| line_coefficient::<A>(j, n, n2, sign).mul(&norm))
        .collect();
    LineState {
        line: j,
        ket: Ket::from_amps(p, amps).expect("dimension d²"),
    }
}

/// `⟨n| Σ_{α∈j} Â_α - 𝟙 |n'⟩` from projector elements.
pub fn line_sum_matrix<A: Amplitude>(j: Line, n: Residue, n2: Residue) -> A {
    let p = j.modulus();
    let sum = line_points(j)
        .into_iter()
        .map(|pt| any_projector_element::<A>(pt, n, n2))
        .fold(A::zero(p), |acc, e| acc.add(&e));
    if n == n2 {
        sum.sub(&A::one(p))
    } else {
        sum
    }
}

/// Which signs reproduce the line-sum matrix exactly for every line and
/// every `(n, n')` in dimension `p`.
pub fn resolve_exponent_sign(p: PrimeModulus) -> Vec<ExponentSign> {
    [ExponentSign::Minus, ExponentSign::Plus]
        .into_iter()
        .filter(|&sign| {
            Line::all(p).all(|j| {
                p.residues().all(|n| {
                    p.residues().all(|n2| {
                        line_sum_matrix::<CycloAmplitude>(j, n, n2)
                            == line_coefficient::<CycloAmplitude>(j, n, n2, sign)
                    })
                })
            })
        })
        .collect()
}

/// `⟨A_p|P_j⟩`.
pub fn overlap_point_line<A: Amplitude>(pt: Point, j: Line) -> A {
    product_state::<A>(pt)
        .ket
        .inner(&line_state_geometric::<A>(j).ket)
        .expect("same dimension")
}

/// Exponent of the phase `ω^(2bm̈² - bm̈)` stated for incident points of a
/// numeric column.
pub fn stated_overlap_phase(b: Residue, j: Line) -> Residue {
    b * j.mddot * j.mddot * 2 - b * j.mddot
}

/// All `d²` line states (geometric construction), in line-index order.
pub fn line_basis<A: Amplitude>(p: PrimeModulus) -> Vec<LineState<A>> {
    Line::all(p)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(line_state_geometric)
        .collect()
}

/// One off-identity Gram entry.
#[derive(Clone, Debug, Serialize)]
pub struct GramDefect {
    pub row: String,
    pub col: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub d: u32,
    pub size: usize,
    pub passed: bool,
    /// Largest `|G - 𝟙|` entry on the floating bridge.
    pub max_residual: f64,
    pub defects: Vec<GramDefect>,
}

/// Full Gram matrix of the line states against the identity.
pub fn verify_orthonormality<A: Amplitude>(p: PrimeModulus, tol: f64) -> GramReport {
    let basis = line_basis::<A>(p);
    gram_against_identity(p, &basis, tol)
}

pub fn gram_against_identity<A: Amplitude>(p: PrimeModulus, basis: &[LineState<A>], tol: f64) -> GramReport {
    let rows: Vec<(f64, Vec<GramDefect>)> = basis
        .par_iter()
        .enumerate()
        .map(|(i, bi)| {
            let mut worst = 0.0f64;
            let mut defects = Vec::new();
            for (k, bk) in basis.iter().enumerate() {
                let g = bi.ket.inner(&bk.ket).expect("same dimension");
                let target = if i == k { A::one(p) } else { A::zero(p) };
                worst = worst.max((g.to_complex() - target.to_complex()).norm());
                if !g.close_to(&target, tol) {
                    defects.push(GramDefect {
                        row: bi.line.to_string(),
                        col: bk.line.to_string(),
                        value: format!("{g:?}"),
                    });
                }
            }
            (worst, defects)
        })
        .collect();
    let max_residual = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let defects: Vec<GramDefect> = rows.into_iter().flat_map(|r| r.1).collect();
    GramReport {
        d: p.get(),
        size: basis.len(),
        passed: defects.is_empty(),
        max_residual,
        defects,
    }
}

/// Whether both single-particle reductions equal `𝟙/d`.
pub fn is_maximally_entangled<A: Amplitude>(ket: &Ket<A>, tol: f64) -> Result<bool> {
    let p = ket.modulus();
    let inv = A::inv_sqrt_d(p);
    let target = DenseMatrix::identity(p, p.as_usize()).scaled(&inv.mul(&inv));
    Ok(ket.reduced_density(true)?.close_to(&target, tol)
        && ket.reduced_density(false)?.close_to(&target, tol))
}

/// `Σ_j |P_j⟩⟨P_j|` against the identity on `d²`.
pub fn line_basis_complete<A: Amplitude>(p: PrimeModulus, tol: f64) -> bool {
    let d2 = p.as_usize() * p.as_usize();
    let sum = line_basis::<A>(p)
        .iter()
        .map(|l| DenseMatrix::outer(&l.ket, &l.ket))
        .reduce(|a, b| a.add(&b))
        .expect("d² lines");
    sum.close_to(&DenseMatrix::identity(p, d2), tol)
}

/// Exact squared overlap of a point state with a line state.
pub fn overlap_sqr_exact(pt: Point, j: Line) -> Result<PowerRatio> {
    overlap_point_line::<CycloAmplitude>(pt, j).norm_sqr_ratio()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::prime;
    use crate::dapg::point_on_line;
    use crate::mub::{projector_element, MubIndex};
    use num_complex::Complex64;

    type C = CycloAmplitude;

    fn line(p: PrimeModulus, a: i64, m0: i64) -> Line {
        Line::new(p.residue(a), p.residue(m0))
    }

    fn w(p: PrimeModulus, t: i64) -> C {
        C::root_power(p.residue(t))
    }

    #[test]
    fn product_state_examples() {
        let p = prime(3);
        let cb = product_state::<C>(Point::computational(p.residue(2)));
        assert_eq!(cb.ket.support(0.0), vec![2 * 3 + 2]);
        let pt = Point::numeric(p.residue(1), p.residue(2));
        let expected = mub_state::<C>(pt)
            .tensor(&mub_state(Point::numeric(p.residue(2), p.residue(1))))
            .unwrap();
        assert!(product_state::<C>(pt).ket.close_to(&expected, 0.0));
        for pt in MubIndex::all(p) {
            assert!(product_state::<C>(pt).ket.norm_sqr_ratio().unwrap().is_one());
        }
    }

    #[test]
    fn balance_per_column() {
        for d in [3, 5] {
            let p = prime(d);
            let r = balanced_state::<C>(p).ket;
            assert_eq!(r.norm_sqr_ratio().unwrap(), PowerRatio::new(p, d as i128, 0));
            for b in BasisLabel::all(p) {
                assert!(column_sum::<C>(p, b).close_to(&r, 0.0), "column {b}");
            }
        }
    }

    #[test]
    fn worked_line_state_d3() {
        let p = prime(3);
        let j = line(p, 1, 2);
        let s = line_state_geometric::<C>(j).ket;
        assert_eq!(s.support(0.0), vec![2, 4, 6]);
        let inv = C::inv_sqrt_d(p);
        assert_eq!(*s.amp2(0, 2), &w(p, 1) * &inv);
        assert_eq!(*s.amp2(1, 1), inv);
        assert_eq!(*s.amp2(2, 0), &w(p, 2) * &inv);
        assert!(s.norm_sqr_ratio().unwrap().is_one());
    }

    #[test]
    fn closed_form_equals_geometric_exactly() {
        for d in [3, 5] {
            let p = prime(d);
            for j in Line::all(p) {
                let g = line_state_geometric::<C>(j).ket;
                let c = line_state_closed::<C>(j).ket;
                assert!(g.close_to(&c, 0.0), "line {j}");
            }
        }
        let p = prime(3);
        let z = line_state_closed::<C>(line(p, 0, 0)).ket;
        let inv = C::inv_sqrt_d(p);
        for n in 0..3 {
            assert_eq!(*z.amp2(n, (3 - n) % 3), inv);
        }
    }

    #[test]
    fn exponent_sign_resolution() {
        for d in [3, 5, 7] {
            assert_eq!(resolve_exponent_sign(prime(d)), vec![RESOLVED_EXPONENT_SIGN]);
        }
        let p = prime(5);
        for j in Line::all(p) {
            assert!(line_state_formula::<C>(j, RESOLVED_EXPONENT_SIGN)
                .ket
                .close_to(&line_state_geometric::<C>(j).ket, 0.0));
        }
    }

    #[test]
    fn line_sum_matrix_examples() {
        let p = prime(3);
        let j = line(p, 1, 2);
        for n in p.residues() {
            for n2 in p.residues() {
                let v = line_sum_matrix::<C>(j, n, n2);
                if n + n2 != j.mddot * 2 {
                    assert!(v.is_zero());
                } else if n == n2 {
                    assert_eq!(n, j.mddot);
                    assert_eq!(v, C::one(p));
                }
            }
        }
        // (0, 2): four projector elements minus δ = a single root of unity
        let v = line_sum_matrix::<C>(j, p.residue(0), p.residue(2));
        assert_eq!(v.as_monomial(), Some((1, 1)));
        assert_eq!(v, w(p, 1));
    }

    #[test]
    fn equal_elements_along_a_line() {
        for d in [3, 5] {
            let p = prime(d);
            for j in Line::all(p) {
                let pts: Vec<_> = line_points(j).into_iter().filter(|x| !x.b.is_computational()).collect();
                for n in p.residues() {
                    let n2 = j.mddot * 2 - n;
                    if n == n2 {
                        continue;
                    }
                    let first = projector_element::<C>(pts[0], n, n2).unwrap();
                    for &x in &pts[1..] {
                        assert_eq!(projector_element::<C>(x, n, n2).unwrap(), first);
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_examples_d3() {
        let p = prime(3);
        let j = line(p, 1, 2);
        assert_eq!(
            overlap_sqr_exact(Point::numeric(p.one(), p.one()), j).unwrap(),
            PowerRatio::inv_power(p, 1)
        );
        assert!(overlap_point_line::<C>(Point::numeric(p.zero(), p.one()), j).is_zero());
        let cb = overlap_point_line::<C>(Point::computational(p.one()), j);
        assert_eq!(cb, C::inv_sqrt_d(p));
    }

    #[test]
    fn overlap_sweep_and_entanglement() {
        for d in [3, 5] {
            let p = prime(d);
            for j in Line::all(p) {
                assert!(is_maximally_entangled(&line_state_geometric::<C>(j).ket, 0.0).unwrap());
                for pt in MubIndex::all(p) {
                    let o = overlap_sqr_exact(pt, j).unwrap();
                    if point_on_line(pt, j) {
                        assert_eq!(o, PowerRatio::inv_power(p, 1));
                    } else {
                        assert!(o.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormal_and_complete() {
        for d in [3, 5] {
            let p = prime(d);
            let r = verify_orthonormality::<C>(p, 0.0);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.size, (d * d) as usize);
            assert!(line_basis_complete::<C>(p, 0.0));
            assert!(verify_orthonormality::<Complex64>(p, 1e-10).passed);
        }
    }
}
