//! Verification suites shared by the command line and the test targets.
//!
//! Every suite is generic over the amplitude backend. On the exact backend
//! each check is a decision by exact equality and the tolerance is unused;
//! on the float backend it is the comparison tolerance. Residuals are always
//! reported on the floating bridge.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::Amplitude;
use crate::arith::PrimeModulus;
use crate::cyclo::CycloAmplitude;
use crate::dapg::{format_points, line_points, verify_axioms, Line, Point};
use crate::hilbert::{DenseMatrix, Ket, MonomialOperator};
use crate::meanking::{Preparation, ProtocolOptions};
use crate::mub::{any_projector_element, check_eigenrelation, mub_state, projector_dense, BasisLabel, MubIndex, MubSet};
use crate::states::{
    balanced_state, column_sum, gram_against_identity, is_maximally_entangled, line_basis, line_coefficient,
    line_state_closed, line_state_formula, line_sum_matrix, product_state, resolve_exponent_sign, stated_overlap_phase,
    ExponentSign, LineState, RESOLVED_EXPONENT_SIGN,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend {other:?} (expected exact or float)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Mub,
    Geometry,
    Balance,
    LineStates,
    Overlap,
    Projector,
    Coherence,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    /// Largest deviation from the target on the floating bridge.
    pub residual: f64,
    pub detail: String,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, passed: bool, residual: f64, detail: impl Into<String>) -> Self {
        Self {
            suite,
            name: name.into(),
            passed,
            residual,
            detail: detail.into(),
        }
    }

    pub fn suite_name(&self) -> &'static str {
        match self.suite {
            Suite::Mub => "mub",
            Suite::Geometry => "geometry",
            Suite::Balance => "balance",
            Suite::LineStates => "line_states",
            Suite::Overlap => "overlap",
            Suite::Projector => "projector",
            Suite::Coherence => "coherence",
        }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Failures and worst residual over a sweep.
#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    total: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn record(&mut self, ok: bool, residual: f64) {
        self.total += 1;
        self.failures += usize::from(!ok);
        self.worst = self.worst.max(residual);
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            total: self.total + other.total,
            failures: self.failures + other.failures,
            worst: self.worst.max(other.worst),
        }
    }

    fn check(self, suite: Suite, name: &str, unit: &str) -> Check {
        Check::new(
            suite,
            name,
            self.failures == 0,
            self.worst,
            format!("{} {unit}, {} violations", self.total, self.failures),
        )
    }
}

fn cmp<A: Amplitude>(value: &A, target: &A, tol: f64) -> (bool, f64) {
    (value.close_to(target, tol), (value.to_complex() - target.to_complex()).norm())
}

fn abs_sqr<A: Amplitude>(z: &A) -> A {
    z.mul(&z.conj())
}

fn inv_d<A: Amplitude>(p: PrimeModulus) -> A {
    let s = A::inv_sqrt_d(p);
    s.mul(&s)
}

pub fn mub_suite<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let set = MubSet::<A>::new(p);
    let states: Vec<(MubIndex, Ket<A>)> = set.iter().cloned().collect();
    let target = inv_d::<A>(p);
    let (cross, gram) = states
        .par_iter()
        .enumerate()
        .map(|(i, (ii, ki))| {
            let mut cross = Tally::default();
            let mut gram = Tally::default();
            for (ik, kk) in &states[i..] {
                let g = ki.inner(kk).expect("dimension d");
                if ii.b == ik.b {
                    let t = if ii == ik { A::one(p) } else { A::zero(p) };
                    let (ok, r) = cmp(&g, &t, tol);
                    gram.record(ok, r);
                } else {
                    let (ok, r) = cmp(&abs_sqr(&g), &target, tol);
                    cross.record(ok, r);
                }
            }
            (cross, gram)
        })
        .reduce(|| (Tally::default(), Tally::default()), |a, b| (a.0.merge(b.0), a.1.merge(b.1)));

    let mut eigen = Tally::default();
    for idx in MubIndex::all(p) {
        let ok = match idx.b {
            BasisLabel::Numeric(_) => check_eigenrelation::<A>(idx, tol).expect("numeric basis"),
            BasisLabel::Computational => {
                let k = mub_state::<A>(idx);
                MonomialOperator::clock(p)
                    .apply(&k)
                    .expect("dimension d")
                    .close_to(&k.scaled(&A::root(idx.m)), tol)
            }
        };
        eigen.record(ok, 0.0);
    }

    let mut complete = Tally::default();
    let id = DenseMatrix::<A>::identity(p, p.as_usize());
    for b in BasisLabel::all(p) {
        let sum = set
            .basis(b)
            .iter()
            .map(|(_, k)| DenseMatrix::outer(k, k))
            .reduce(|a, m| a.add(&m))
            .expect("d states");
        complete.record(sum.close_to(&id, tol), sum.max_abs_diff(&id));
    }

    vec![
        cross.check(Suite::Mub, "cross-basis squared overlaps equal 1/d", "pairs"),
        gram.check(Suite::Mub, "within-basis Gram equals identity", "pairs"),
        eigen.check(Suite::Mub, "eigenrelation X Z^b |m;b> = w^m |m;b> (Z |m> = w^m |m> on CB)", "states"),
        complete.check(Suite::Mub, "each basis resolves the identity", "bases"),
    ]
}

pub fn geometry_suite(p: PrimeModulus) -> Vec<Check> {
    let report = verify_axioms(p);
    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .map(|c| Check::new(Suite::Geometry, format!("{}: {}", c.axiom, c.statement), c.passed, 0.0, c.detail.clone()))
        .collect();
    if p.get() == 3 {
        let rendered = format_points(&line_points(Line::new(p.one(), p.residue(2))));
        let expected = "{(1,CB),(2,0),(1,1),(0,2)}";
        checks.push(Check::new(
            Suite::Geometry,
            "worked example: line (1,2)",
            rendered == expected,
            0.0,
            rendered,
        ));
    }
    checks
}

pub fn balance_suite<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let r = balanced_state::<A>(p).ket;
    let mut cols = Tally::default();
    for b in BasisLabel::all(p) {
        let s = column_sum::<A>(p, b);
        cols.record(s.close_to(&r, tol), s.max_abs_diff(&r));
    }
    let norm = r.norm_sqr();
    let d = A::sqrt_d(p).mul(&A::sqrt_d(p));
    let (ok, res) = cmp(&norm, &d, tol);
    vec![
        cols.check(Suite::Balance, "every column sums to R", "columns"),
        Check::new(Suite::Balance, "<R|R> = d", ok, res, format!("{:?}", norm.to_complex().re)),
    ]
}

pub fn line_state_suite<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let basis = line_basis::<A>(p);
    let (closed, formula, reduced) = basis
        .par_iter()
        .map(|l| {
            let mut c = Tally::default();
            let mut f = Tally::default();
            let mut r = Tally::default();
            let k = line_state_closed::<A>(l.line).ket;
            c.record(k.close_to(&l.ket, tol), k.max_abs_diff(&l.ket));
            let k = line_state_formula::<A>(l.line, RESOLVED_EXPONENT_SIGN).ket;
            f.record(k.close_to(&l.ket, tol), k.max_abs_diff(&l.ket));
            r.record(is_maximally_entangled(&l.ket, tol).expect("two-particle ket"), 0.0);
            (c, f, r)
        })
        .reduce(
            Default::default,
            |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)),
        );
    let gram = gram_against_identity(p, &basis, tol);
    vec![
        closed.check(Suite::LineStates, "closed form equals sum over points", "lines"),
        formula.check(Suite::LineStates, "coefficient formula equals sum over points", "lines"),
        Check::new(
            Suite::LineStates,
            "Gram of line states equals identity",
            gram.passed,
            gram.max_residual,
            format!("{0}x{0} Gram, {1} defects", gram.size, gram.defects.len()),
        ),
        reduced.check(Suite::LineStates, "reduced density equals identity/d", "lines"),
    ]
}

/// How the stated incident-point phase `ω^(2bm̈²-bm̈)` compares with the
/// measured overlaps on numeric columns.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseFinding {
    pub stated: &'static str,
    pub incident_pairs: usize,
    pub matching: usize,
    pub mismatching: usize,
    /// Lines whose discrepancy is one phase shared by all their numeric
    /// points.
    pub lines_with_single_offset: usize,
    pub lines: usize,
    /// Every discrepancy is a single phase per line.
    pub reconcilable: bool,
}

/// The computational-basis overlap coefficient.
#[derive(Clone, Debug, Serialize)]
pub struct CbOverlapFinding {
    pub measured: &'static str,
    pub stated: &'static str,
    /// The measured value holds for every line.
    pub measured_holds: bool,
    pub stated_flagged_as_typo: bool,
}

struct OverlapData<A> {
    checks: Vec<Check>,
    phase: PhaseFinding,
    cb: CbOverlapFinding,
    _backend: std::marker::PhantomData<A>,
}

fn overlap_data<A: Amplitude>(p: PrimeModulus, tol: f64) -> OverlapData<A> {
    let lines = line_basis::<A>(p);
    let points: Vec<(Point, Ket<A>)> = MubIndex::all(p).map(|pt| (pt, product_state::<A>(pt).ket)).collect();
    let target = inv_d::<A>(p);
    let zero = A::zero(p);
    let inv_sqrt = A::inv_sqrt_d(p);

    struct Row {
        mag: Tally,
        cb: Tally,
        matching: usize,
        mismatching: usize,
        single_offset: bool,
    }

    let rows: Vec<Row> = lines
        .par_iter()
        .map(|l: &LineState<A>| {
            let mut row = Row {
                mag: Tally::default(),
                cb: Tally::default(),
                matching: 0,
                mismatching: 0,
                single_offset: true,
            };
            let mut offset: Option<A> = None;
            for (pt, k) in &points {
                let ov = k.inner(&l.ket).expect("dimension d²");
                let incident = l.line.point_at(pt.b) == *pt;
                let t = if incident { &target } else { &zero };
                let (ok, r) = cmp(&abs_sqr(&ov), t, tol);
                row.mag.record(ok, r);
                if !incident {
                    continue;
                }
                match pt.b {
                    BasisLabel::Computational => {
                        let (ok, r) = cmp(&ov, &inv_sqrt, tol);
                        row.cb.record(ok, r);
                    }
                    BasisLabel::Numeric(b) => {
                        let stated = A::root(stated_overlap_phase(b, l.line)).mul(&inv_sqrt);
                        if ov.close_to(&stated, tol) {
                            row.matching += 1;
                        } else {
                            row.mismatching += 1;
                        }
                        // unit-modulus ratio measured/stated
                        let ratio = ov.mul(&stated.conj()).mul(&A::sqrt_d(p)).mul(&A::sqrt_d(p));
                        match &offset {
                            None => offset = Some(ratio),
                            Some(o) => row.single_offset &= o.close_to(&ratio, tol),
                        }
                    }
                }
            }
            row
        })
        .collect();

    let mag = rows.iter().fold(Tally::default(), |a, r| a.merge(r.mag));
    let cb = rows.iter().fold(Tally::default(), |a, r| a.merge(r.cb));
    let matching: usize = rows.iter().map(|r| r.matching).sum();
    let mismatching: usize = rows.iter().map(|r| r.mismatching).sum();
    let single = rows.iter().filter(|r| r.single_offset).count();
    let phase = PhaseFinding {
        stated: "w^(2*b*mdd^2 - b*mdd) / sqrt(d)",
        incident_pairs: matching + mismatching,
        matching,
        mismatching,
        lines_with_single_offset: single,
        lines: rows.len(),
        reconcilable: single == rows.len(),
    };
    let cb_finding = CbOverlapFinding {
        measured: "1/sqrt(d)",
        stated: "1/sqrt(2)",
        measured_holds: cb.failures == 0,
        stated_flagged_as_typo: true,
    };
    let checks = vec![
        mag.check(
            Suite::Overlap,
            "squared overlap is 1/d on incident pairs and 0 otherwise",
            "point-line pairs",
        ),
        cb.check(Suite::Overlap, "computational-basis overlap equals 1/sqrt(d)", "lines"),
    ];
    OverlapData {
        checks,
        phase,
        cb: cb_finding,
        _backend: std::marker::PhantomData,
    }
}

pub fn overlap_suite<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    overlap_data::<A>(p, tol).checks
}

/// The stated incident-point phase, measured on the given backend.
pub fn overlap_phase_finding<A: Amplitude>(p: PrimeModulus, tol: f64) -> PhaseFinding {
    overlap_data::<A>(p, tol).phase
}

pub fn projector_suite<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let mut elements = Tally::default();
    for idx in MubIndex::all(p) {
        let dense = projector_dense::<A>(idx);
        for n in p.residues() {
            for n2 in p.residues() {
                let e = any_projector_element::<A>(idx, n, n2);
                let t = dense.get(n.value() as usize, n2.value() as usize);
                let (ok, r) = cmp(&e, t, tol);
                elements.record(ok, r);
            }
        }
    }
    let mut support = Tally::default();
    let mut diagonal = Tally::default();
    let mut coefficient = Tally::default();
    for j in Line::all(p) {
        for n in p.residues() {
            for n2 in p.residues() {
                let v = line_sum_matrix::<A>(j, n, n2);
                let on = n + n2 == j.mddot * 2;
                support.record(v.is_zero_within(tol) != on, 0.0);
                if n == j.mddot && n2 == j.mddot {
                    let (ok, r) = cmp(&v, &A::one(p), tol);
                    diagonal.record(ok, r);
                }
                let c = line_coefficient::<A>(j, n, n2, RESOLVED_EXPONENT_SIGN);
                let (ok, r) = cmp(&v, &c, tol);
                coefficient.record(ok, r);
            }
        }
    }
    let resolved = resolve_exponent_sign(p);
    vec![
        elements.check(Suite::Projector, "projector element formula equals outer product", "elements"),
        support.check(Suite::Projector, "line-sum matrix supported on n + n' = 2 mdd", "elements"),
        diagonal.check(Suite::Projector, "line-sum matrix has unit entry at n = n' = mdd", "lines"),
        coefficient.check(Suite::Projector, "line-sum matrix equals coefficient with the resolved sign", "elements"),
        Check::new(
            Suite::Projector,
            "exponent sign resolves uniquely to the pinned value",
            resolved == [RESOLVED_EXPONENT_SIGN],
            0.0,
            format!("{resolved:?}"),
        ),
    ]
}

fn ket_diff<A: Amplitude>(exact: &Ket<A>, float: &Ket<Complex64>) -> f64 {
    exact
        .amps()
        .iter()
        .zip(float.amps())
        .map(|(e, f)| (e.to_complex() - f).norm())
        .fold(0.0, f64::max)
}

/// `P(m, j')` on the float backend, without the exact engine.
fn float_joint(prep: Preparation, p: PrimeModulus, b: BasisLabel, lines: &[LineState<Complex64>]) -> Vec<Vec<f64>> {
    let psi: Ket<Complex64> = match prep {
        Preparation::LineVector(j) => lines[j.index()].ket.clone(),
        Preparation::Balanced => balanced_state::<Complex64>(p).ket.scaled(&Complex64::inv_sqrt_d(p)),
    };
    p.residues()
        .map(|m| {
            let bra = mub_state::<Complex64>(Point::new(m, b));
            let v = bra.tensor(&psi.contract_first(&bra).expect("dimension")).expect("dimension");
            lines.iter().map(|l| l.ket.inner(&v).expect("dimension").norm_sqr()).collect()
        })
        .collect()
}

/// Exact quantities converted to floats against the float backend.
pub fn coherence_suite(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let mut kets = Tally::default();
    for idx in MubIndex::all(p) {
        let r = ket_diff(&mub_state::<CycloAmplitude>(idx), &mub_state::<Complex64>(idx));
        kets.record(r <= tol, r);
    }
    let exact_lines = line_basis::<CycloAmplitude>(p);
    let float_lines = line_basis::<Complex64>(p);
    let mut lines = Tally::default();
    for (e, f) in exact_lines.iter().zip(&float_lines) {
        let r = ket_diff(&e.ket, &f.ket);
        lines.record(r <= tol, r);
    }
    let mut overlaps = Tally::default();
    for pt in MubIndex::all(p) {
        let ae = product_state::<CycloAmplitude>(pt).ket;
        let af = product_state::<Complex64>(pt).ket;
        for (e, f) in exact_lines.iter().zip(&float_lines) {
            let r = (ae.inner(&e.ket).expect("dimension").to_complex() - af.inner(&f.ket).expect("dimension")).norm();
            overlaps.record(r <= tol, r);
        }
    }
    let mut tables = Tally::default();
    let preps = [Preparation::Balanced, Preparation::LineVector(Line::new(p.one(), p.residue(2)))];
    for prep in preps {
        for b in BasisLabel::all(p) {
            let exact = crate::meanking::exact_joint_distribution(prep, p, b, ProtocolOptions::default())
                .expect("valid preparation");
            let float = float_joint(prep, p, b, &float_lines);
            for (m, row) in float.iter().enumerate() {
                for (k, &q) in row.iter().enumerate() {
                    let e = exact.get(p.residue(m as i64), Line::from_index(p, k)).to_f64();
                    let r = (e - q).abs();
                    tables.record(r <= tol, r);
                }
            }
        }
    }
    vec![
        kets.check(Suite::Coherence, "basis states agree across backends", "states"),
        lines.check(Suite::Coherence, "line states agree across backends", "lines"),
        overlaps.check(Suite::Coherence, "point-line overlaps agree across backends", "pairs"),
        tables.check(Suite::Coherence, "protocol outcome probabilities agree across backends", "cells"),
    ]
}

/// Conventions and resolved discrepancies, computed exactly.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub omega: &'static str,
    pub half: &'static str,
    pub computational_basis_label: &'static str,
    pub exponent_sign: ExponentSign,
    pub exponent_sign_candidates: Vec<ExponentSign>,
    pub rejected_exponent_signs: Vec<ExponentSign>,
    /// Phase `c` with closed form = `c` · sum over points, when one `c`
    /// serves every line.
    pub closed_form_phase_offset: Option<String>,
    pub overlap_phase: PhaseFinding,
    pub cb_overlap: CbOverlapFinding,
}

fn closed_form_offset(p: PrimeModulus) -> Option<String> {
    let mut found: Option<CycloAmplitude> = None;
    for l in line_basis::<CycloAmplitude>(p) {
        let closed = line_state_closed::<CycloAmplitude>(l.line).ket;
        let slot = l.ket.amps().iter().position(|a| !a.is_zero())?;
        // |amp|² = 1/d on the support, so d·closed·conj(geo) is the ratio
        let d = CycloAmplitude::from_int(p, p.get() as i128);
        let c = closed.amp(slot).clone() * l.ket.amp(slot).conj() * d;
        if !closed.close_to(&l.ket.scaled(&c), 0.0) {
            return None;
        }
        match &found {
            None => found = Some(c),
            Some(f) if *f != c => return None,
            _ => {}
        }
    }
    found.map(|c| c.to_string())
}

pub fn conventions(p: PrimeModulus) -> Conventions {
    let candidates = resolve_exponent_sign(p);
    let rejected = [ExponentSign::Minus, ExponentSign::Plus]
        .into_iter()
        .filter(|s| !candidates.contains(s))
        .collect();
    let overlap = overlap_data::<CycloAmplitude>(p, 0.0);
    Conventions {
        omega: "exp(2*pi*i/d)",
        half: "b/2 is b*(d+1)/2 mod d",
        computational_basis_label: "CB, the Z eigenbasis (also written b = -1); fixed by the tilde map",
        exponent_sign: RESOLVED_EXPONENT_SIGN,
        exponent_sign_candidates: candidates,
        rejected_exponent_signs: rejected,
        closed_form_phase_offset: closed_form_offset(p),
        overlap_phase: overlap.phase,
        cb_overlap: overlap.cb,
    }
}

/// Compact form of the conventions for report headers, pinned from the
/// exact conformance pass (regression-tested against `conventions`).
#[derive(Clone, Debug, Serialize)]
pub struct PinnedConventions {
    pub omega: &'static str,
    pub half: &'static str,
    pub exponent_sign: ExponentSign,
    pub closed_form_phase_offset: &'static str,
    pub cb_overlap: &'static str,
    pub incident_phase: &'static str,
}

pub const PINNED_CONVENTIONS: PinnedConventions = PinnedConventions {
    omega: "exp(2*pi*i/d)",
    half: "b/2 is b*(d+1)/2 mod d",
    exponent_sign: RESOLVED_EXPONENT_SIGN,
    closed_form_phase_offset: "1",
    cb_overlap: "1/sqrt(d)",
    incident_phase: "<A_p|P_j> = 1/sqrt(d) for every incident point",
};

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub d: u32,
    pub backend: Backend,
    /// `None` on the exact backend.
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub conventions: Conventions,
}

fn suites<A: Amplitude>(p: PrimeModulus, tol: f64) -> Vec<Check> {
    let mut checks = mub_suite::<A>(p, tol);
    checks.extend(geometry_suite(p));
    checks.extend(balance_suite::<A>(p, tol));
    checks.extend(line_state_suite::<A>(p, tol));
    checks.extend(overlap_suite::<A>(p, tol));
    checks.extend(projector_suite::<A>(p, tol));
    checks
}

/// All suites for one dimension. The pass/fail status covers the checks;
/// conventions are reported alongside.
pub fn verify_dimension(p: PrimeModulus, backend: Backend, tol: f64) -> VerifyReport {
    let checks = match backend {
        Backend::Exact => suites::<CycloAmplitude>(p, tol),
        Backend::Float => suites::<Complex64>(p, tol),
    };
    VerifyReport {
        d: p.get(),
        backend,
        tolerance: (backend == Backend::Float).then_some(tol),
        passed: checks.iter().all(|c| c.passed),
        checks,
        conventions: conventions(p),
    }
}
