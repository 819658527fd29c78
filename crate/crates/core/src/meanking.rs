//! Mean King retrodiction protocol.
//!
//! Alice prepares a two-qudit state. The King measures particle 1 in one of
//! the `d + 1` bases and keeps both the basis and the outcome to himself.
//! Alice then measures both particles in the line-state basis `{|P_j⟩}`
//! (outcomes labelled by the line). Only after that does she learn the basis
//! `b`, and she must name the King's outcome `m`.
//!
//! Two preparations are supported. `LineVector(j)` uses a line state as the
//! initial state. `Balanced` uses `R/√d`: it decomposes as
//! `d^(-1/2) Σ_m |A_(m,b)⟩` in every column, so the King leaves the point
//! state `|A_(m,b)⟩`. Alice's outcome is then a line through `(m, b)` and
//! the line rule recovers `m`.
//!
//! All probabilities are exact `n/d^k` values and sampling draws integers
//! against those numerators, so the Monte Carlo path is backed by the same
//! tables the oracle reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{PrimeModulus, Residue};
use crate::cyclo::CycloAmplitude;
use crate::dapg::{Line, Point};
use crate::error::{Error, Result};
use crate::hilbert::{DenseMatrix, ExactKet};
use crate::mub::{mub_state, projector_dense, BasisLabel};
use crate::ratio::PowerRatio;
use crate::states::{balanced_state, line_basis, line_monomial, line_state_closed, LineState};

type C = CycloAmplitude;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preparation {
    LineVector(Line),
    Balanced,
}

impl Preparation {
    /// The normalized initial ket.
    pub fn ket(&self, p: PrimeModulus) -> ExactKet {
        match self {
            Preparation::LineVector(j) => crate::states::line_state_geometric::<C>(*j).ket,
            Preparation::Balanced => balanced_state::<C>(p).ket.scaled(&C::inv_sqrt_d(p)),
        }
    }

    pub fn line(&self) -> Option<Line> {
        match self {
            Preparation::LineVector(j) => Some(*j),
            Preparation::Balanced => None,
        }
    }
}

impl std::fmt::Display for Preparation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Preparation::LineVector(j) => write!(f, "line{j}"),
            Preparation::Balanced => write!(f, "balanced"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeductionRule {
    /// `m = m(0) - m'(0) + (b/2)(m̈ - m̈')`.
    Literal,
    /// Row of the measured line in column `b`.
    LineRule,
}

impl DeductionRule {
    pub fn name(self) -> &'static str {
        match self {
            DeductionRule::Literal => "literal",
            DeductionRule::LineRule => "line_rule",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ProtocolOptions {
    /// Undo the line-state monomial on particle 2 before the control
    /// measurement. Only affects line-vector preparations.
    pub undo_rotation: bool,
}

/// Alice's guess. `None` only for the literal rule without a prepared line.
pub fn deduce(rule: DeductionRule, prepared: Option<Line>, measured: Line, b: BasisLabel) -> Option<Residue> {
    match rule {
        DeductionRule::LineRule => Some(measured.row_at(b)),
        DeductionRule::Literal => {
            let j = prepared?;
            let dm0 = j.m0 - measured.m0;
            let dmddot = j.mddot - measured.mddot;
            Some(match b {
                BasisLabel::Numeric(b) => dm0 + b.half() * dmddot,
                // provisional: no computational-basis branch is given for this rule
                BasisLabel::Computational => dmddot + dm0,
            })
        }
    }
}

/// Nonzero-probability condition for the control outcome `j'` after a
/// line-vector preparation `j`, as observed in the exact tables:
/// `m(0) - m'(0) + b(m̈ - m̈') ≡ 0` for numeric `b`, `m̈ = m̈'` for the
/// computational basis. It does not involve the King's outcome.
pub fn literal_support_predicate(j: Line, measured: Line, b: BasisLabel) -> bool {
    match b {
        BasisLabel::Numeric(b) => (j.m0 - measured.m0 + b * (j.mddot - measured.mddot)).is_zero(),
        BasisLabel::Computational => j.mddot == measured.mddot,
    }
}

/// One King outcome: its probability and the normalized post-measurement
/// state (absent when the probability is zero).
#[derive(Clone, Debug)]
pub struct KingBranch {
    pub m: Residue,
    pub probability: PowerRatio,
    pub post: Option<ExactKet>,
}

fn prepared_state(prep: Preparation, p: PrimeModulus) -> ExactKet {
    prep.ket(p)
}

/// Exact Born distribution of the King's measurement of particle 1.
pub fn king_branches(prep: Preparation, p: PrimeModulus, b: BasisLabel) -> Result<Vec<KingBranch>> {
    let psi = prepared_state(prep, p);
    p.residues()
        .map(|m| {
            let bra = mub_state::<C>(Point::new(m, b));
            let rest = psi.contract_first(&bra)?;
            let probability = rest.norm_sqr_ratio()?;
            let post = if probability.is_zero() {
                None
            } else {
                Some(bra.tensor(&rest)?.renormalized()?)
            };
            Ok(KingBranch { m, probability, post })
        })
        .collect()
}

/// Draw an index with probability exactly `probs[i]`; the probabilities
/// must sum to one.
pub fn sample_exact<R: Rng + ?Sized>(probs: &[PowerRatio], rng: &mut R) -> usize {
    let exp = probs.iter().map(|r| r.exponent()).max().unwrap_or(0).max(0);
    let nums: Vec<i128> = probs.iter().map(|r| r.numerator_at(exp)).collect();
    let total: i128 = nums.iter().sum();
    debug_assert_eq!(
        total,
        (probs[0].modulus().get() as i128).pow(exp as u32),
        "probabilities must sum to one"
    );
    let mut u = rng.gen_range(0..total as u128) as i128;
    for (i, &n) in nums.iter().enumerate() {
        if u < n {
            return i;
        }
        u -= n;
    }
    unreachable!("draw exceeds total")
}

pub fn king_measure<R: Rng + ?Sized>(
    prep: Preparation,
    p: PrimeModulus,
    b: BasisLabel,
    rng: &mut R,
) -> Result<(Residue, ExactKet)> {
    let branches = king_branches(prep, p, b)?;
    let probs: Vec<PowerRatio> = branches.iter().map(|br| br.probability).collect();
    let k = sample_exact(&probs, rng);
    let br = branches.into_iter().nth(k).expect("sampled index");
    Ok((br.m, br.post.expect("nonzero branch")))
}

/// `|⟨P_j'|post⟩|²` for every line, in line-index order.
pub fn alice_distribution(post: &ExactKet, basis: &[LineState<C>]) -> Result<Vec<PowerRatio>> {
    let norm = post.norm_sqr_ratio()?;
    if !norm.is_one() {
        return Err(Error::NotNormalized(norm.to_string()));
    }
    basis.iter().map(|l| l.ket.overlap_sqr(post)).collect()
}

pub fn alice_measure<R: Rng + ?Sized>(post: &ExactKet, rng: &mut R) -> Result<Line> {
    let p = post.modulus();
    let basis = line_basis::<C>(p);
    let probs = alice_distribution(post, &basis)?;
    Ok(basis[sample_exact(&probs, rng)].line)
}

fn apply_options(prep: Preparation, options: ProtocolOptions, post: ExactKet) -> Result<ExactKet> {
    match (prep, options.undo_rotation) {
        (Preparation::LineVector(j), true) => post.apply_second(&line_monomial(j).adjoint()),
        _ => Ok(post),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeEntry {
    pub m: u32,
    pub line: Line,
    pub probability: PowerRatio,
}

/// Exact joint distribution of (King outcome, control outcome) for one
/// preparation and basis. Only nonzero entries are stored.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeTable {
    pub d: u32,
    pub preparation: Preparation,
    pub basis: BasisLabel,
    pub options: ProtocolOptions,
    pub entries: Vec<OutcomeEntry>,
    pub total: PowerRatio,
}

impl OutcomeTable {
    fn from_dense(
        p: PrimeModulus,
        prep: Preparation,
        b: BasisLabel,
        options: ProtocolOptions,
        probs: Vec<Vec<PowerRatio>>,
    ) -> Self {
        let mut entries = Vec::new();
        for (m, row) in probs.iter().enumerate() {
            for (k, &pr) in row.iter().enumerate() {
                if !pr.is_zero() {
                    entries.push(OutcomeEntry {
                        m: m as u32,
                        line: Line::from_index(p, k),
                        probability: pr,
                    });
                }
            }
        }
        let total = entries
            .iter()
            .map(|e| e.probability)
            .fold(PowerRatio::zero(p), |a, b| a + b);
        Self {
            d: p.get(),
            preparation: prep,
            basis: b,
            options,
            entries,
            total,
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        PrimeModulus::new(self.d).expect("validated")
    }

    pub fn get(&self, m: Residue, line: Line) -> PowerRatio {
        self.entries
            .iter()
            .find(|e| e.m == m.value() && e.line == line)
            .map(|e| e.probability)
            .unwrap_or_else(|| PowerRatio::zero(m.modulus()))
    }

    pub fn marginal(&self, m: Residue) -> PowerRatio {
        self.entries
            .iter()
            .filter(|e| e.m == m.value())
            .map(|e| e.probability)
            .fold(PowerRatio::zero(m.modulus()), |a, b| a + b)
    }

    /// Same support and same exact values.
    pub fn same_values(&self, other: &OutcomeTable) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().all(|e| {
                other
                    .entries
                    .iter()
                    .any(|o| o.m == e.m && o.line == e.line && o.probability == e.probability)
            })
    }
}

/// Exact table from King branches and line-state overlaps.
pub fn exact_joint_distribution(
    prep: Preparation,
    p: PrimeModulus,
    b: BasisLabel,
    options: ProtocolOptions,
) -> Result<OutcomeTable> {
    let basis = line_basis::<C>(p);
    exact_joint_distribution_with(prep, p, b, options, &basis)
}

fn exact_joint_distribution_with(
    prep: Preparation,
    p: PrimeModulus,
    b: BasisLabel,
    options: ProtocolOptions,
    basis: &[LineState<C>],
) -> Result<OutcomeTable> {
    let probs = king_branches(prep, p, b)?
        .into_iter()
        .map(|br| match br.post {
            None => Ok(vec![PowerRatio::zero(p); basis.len()]),
            Some(post) => {
                let post = apply_options(prep, options, post)?;
                Ok(alice_distribution(&post, basis)?
                    .into_iter()
                    .map(|q| q * br.probability)
                    .collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeTable::from_dense(p, prep, b, options, probs))
}

/// Independent recomputation with dense `d² × d²` operators:
/// `P(m, j') = |⟨P_j'| U (Π_(m,b) ⊗ 𝟙) |ψ⟩|²`, with line states from the
/// closed form and `U` the optional particle-2 correction.
pub fn dense_joint_distribution(
    prep: Preparation,
    p: PrimeModulus,
    b: BasisLabel,
    options: ProtocolOptions,
) -> Result<OutcomeTable> {
    let d = p.as_usize();
    let psi = prepared_state(prep, p);
    let id = DenseMatrix::<C>::identity(p, d);
    let correction = match (prep, options.undo_rotation) {
        (Preparation::LineVector(j), true) => id.kron(&line_monomial(j).adjoint().to_dense()),
        _ => DenseMatrix::identity(p, d * d),
    };
    let lines: Vec<ExactKet> = Line::all(p).map(|j| line_state_closed::<C>(j).ket).collect();
    let probs = p
        .residues()
        .map(|m| {
            let proj = projector_dense::<C>(Point::new(m, b)).kron(&id);
            let v = correction.matmul(&proj).apply(&psi)?;
            lines
                .iter()
                .map(|l| l.overlap_sqr(&v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeTable::from_dense(p, prep, b, options, probs))
}

/// Exact fraction `num/den` for figures that are not of the `n/d^k` form
/// (averages over the `d + 1` bases).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: i128,
    pub den: i128,
}

impl Fraction {
    pub fn new(num: i128, den: i128) -> Self {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    /// Uniform average of ratios.
    pub fn mean(values: &[PowerRatio]) -> Self {
        let exp = values.iter().map(|v| v.exponent()).max().unwrap_or(0).max(0);
        let d = values[0].modulus().get() as i128;
        let num: i128 = values.iter().map(|v| v.numerator_at(exp)).sum();
        Self::new(num, d.pow(exp as u32) * values.len() as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_one(self) -> bool {
        self.num == self.den
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisOutcome {
    pub basis: BasisLabel,
    pub success_probability: PowerRatio,
    pub success_probability_f64: f64,
    /// Every nonzero-probability `(m, j')` is deduced correctly.
    pub all_outcomes_succeed: bool,
    pub nonzero_outcomes: usize,
    pub failing_outcomes: usize,
    /// Whether the table's support matches `literal_support_predicate`
    /// (line-vector preparations without correction only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_law_holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleReport {
    pub d: u32,
    pub preparation: Preparation,
    pub rule: DeductionRule,
    pub options: ProtocolOptions,
    pub per_basis: Vec<BasisOutcome>,
    /// Success probability with the basis drawn uniformly from all `d + 1`.
    pub overall_success: Fraction,
    pub overall_success_f64: f64,
    /// Success probability exactly one in every basis.
    pub certain: bool,
}

fn check_rule(prep: Preparation, rule: DeductionRule) -> Result<()> {
    if rule == DeductionRule::Literal && prep.line().is_none() {
        return Err(Error::IncompatibleRule { rule: rule.name() });
    }
    Ok(())
}

fn score_table(table: &OutcomeTable, rule: DeductionRule, prep: Preparation) -> BasisOutcome {
    let p = table.modulus();
    let b = table.basis;
    let mut success = PowerRatio::zero(p);
    let mut failing = 0;
    for e in &table.entries {
        let guess = deduce(rule, prep.line(), e.line, b);
        if guess.map(|g| g.value()) == Some(e.m) {
            success = success + e.probability;
        } else {
            failing += 1;
        }
    }
    let support_law_holds = match (prep, table.options.undo_rotation) {
        (Preparation::LineVector(j), false) => Some(p.residues().all(|m| {
            Line::all(p).all(|jm| !table.get(m, jm).is_zero() == literal_support_predicate(j, jm, b))
        })),
        _ => None,
    };
    BasisOutcome {
        basis: b,
        success_probability: success,
        success_probability_f64: success.to_f64(),
        all_outcomes_succeed: failing == 0,
        nonzero_outcomes: table.entries.len(),
        failing_outcomes: failing,
        support_law_holds,
    }
}

/// Exhaustive exact evaluation of a deduction rule over every basis.
pub fn evaluate_rule(
    p: PrimeModulus,
    prep: Preparation,
    rule: DeductionRule,
    options: ProtocolOptions,
) -> Result<RuleReport> {
    check_rule(prep, rule)?;
    let basis = line_basis::<C>(p);
    let per_basis = BasisLabel::all(p)
        .map(|b| {
            let t = exact_joint_distribution_with(prep, p, b, options, &basis)?;
            Ok(score_table(&t, rule, prep))
        })
        .collect::<Result<Vec<_>>>()?;
    let probs: Vec<PowerRatio> = per_basis.iter().map(|o| o.success_probability).collect();
    let overall = Fraction::mean(&probs);
    Ok(RuleReport {
        d: p.get(),
        preparation: prep,
        rule,
        options,
        certain: probs.iter().all(|s| s.is_one()),
        overall_success: overall,
        overall_success_f64: overall.to_f64(),
        per_basis,
    })
}

/// One protocol round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolTranscript {
    pub trial: u64,
    pub seed: u64,
    pub d: u32,
    pub preparation: Preparation,
    pub rule: DeductionRule,
    pub king_basis: BasisLabel,
    pub king_outcome: u32,
    pub alice_outcome: Line,
    pub revealed_basis: BasisLabel,
    pub deduced: Option<u32>,
    pub success: bool,
}

/// Chi-square goodness of fit of sampled `(m, j')` counts against an exact
/// table, with a 5σ acceptance threshold `dof + 5√(2·dof)`.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub basis: BasisLabel,
    pub samples: u64,
    pub chi_square: f64,
    pub dof: usize,
    pub threshold: f64,
    /// Samples that landed on zero-probability cells.
    pub impossible_hits: u64,
    pub passed: bool,
}

/// `|k - np| ≤ 5√(np(1-p))`; exact equality when the variance is zero.
pub fn within_five_sigma(count: u64, n: u64, prob: f64) -> bool {
    let mean = n as f64 * prob;
    let sd = (n as f64 * prob * (1.0 - prob)).max(0.0).sqrt();
    if sd < 1e-12 {
        return (count as f64 - mean).abs() < 1e-9;
    }
    (count as f64 - mean).abs() <= 5.0 * sd
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisTally {
    pub basis: BasisLabel,
    pub trials: u64,
    pub successes: u64,
    pub exact_success: PowerRatio,
    pub success_within_5_sigma: bool,
    pub king_outcome_counts: Vec<u64>,
    pub exact_king_probabilities: Vec<PowerRatio>,
    pub king_uniformity_within_5_sigma: bool,
    pub fit: FitReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub d: u32,
    pub seed: u64,
    pub preparation: Preparation,
    pub rule: DeductionRule,
    pub options: ProtocolOptions,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub exact_success: Fraction,
    pub exact_success_f64: f64,
    pub success_within_5_sigma: bool,
    pub per_basis: Vec<BasisTally>,
    /// Sampled `(m, j')` frequencies agree with the exact tables in every
    /// basis.
    pub oracle_agreement: bool,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub transcripts: Vec<ProtocolTranscript>,
    pub summary: RunSummary,
}

struct BasisModel {
    label: BasisLabel,
    king: Vec<PowerRatio>,
    /// `alice[m]` over lines; empty for zero-probability `m`.
    alice: Vec<Vec<PowerRatio>>,
    table: OutcomeTable,
    score: BasisOutcome,
}

/// Precomputed exact tables for one (dimension, preparation, rule, options).
pub struct ProtocolEngine {
    modulus: PrimeModulus,
    prep: Preparation,
    rule: DeductionRule,
    options: ProtocolOptions,
    bases: Vec<BasisModel>,
}

impl ProtocolEngine {
    pub fn new(
        p: PrimeModulus,
        prep: Preparation,
        rule: DeductionRule,
        options: ProtocolOptions,
    ) -> Result<Self> {
        check_rule(prep, rule)?;
        let lines = line_basis::<C>(p);
        let bases = BasisLabel::all(p)
            .map(|b| {
                let branches = king_branches(prep, p, b)?;
                let mut king = Vec::new();
                let mut alice = Vec::new();
                for br in branches {
                    king.push(br.probability);
                    alice.push(match br.post {
                        Some(post) => alice_distribution(&apply_options(prep, options, post)?, &lines)?,
                        None => Vec::new(),
                    });
                }
                let table = exact_joint_distribution_with(prep, p, b, options, &lines)?;
                let score = score_table(&table, rule, prep);
                Ok(BasisModel {
                    label: b,
                    king,
                    alice,
                    table,
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            modulus: p,
            prep,
            rule,
            options,
            bases,
        })
    }

    pub fn table(&self, b: BasisLabel) -> &OutcomeTable {
        &self.bases[b.column()].table
    }

    /// Per-trial stream: ChaCha8 keyed by the master seed, stream number =
    /// trial index.
    pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        rng
    }

    pub fn run_trial(&self, seed: u64, trial: u64) -> ProtocolTranscript {
        let p = self.modulus;
        let mut rng = Self::trial_rng(seed, trial);
        let column = rng.gen_range(0..self.bases.len());
        let model = &self.bases[column];
        let m = sample_exact(&model.king, &mut rng);
        let k = sample_exact(&model.alice[m], &mut rng);
        let measured = Line::from_index(p, k);
        // the basis is revealed only now
        let revealed = model.label;
        let deduced = deduce(self.rule, self.prep.line(), measured, revealed).map(|r| r.value());
        ProtocolTranscript {
            trial,
            seed,
            d: p.get(),
            preparation: self.prep,
            rule: self.rule,
            king_basis: model.label,
            king_outcome: m as u32,
            alice_outcome: measured,
            revealed_basis: revealed,
            deduced,
            success: deduced == Some(m as u32),
        }
    }

    /// Run `trials` rounds. `threads = 1` runs sequentially; otherwise a
    /// dedicated pool of that size is used (0 = rayon default). The
    /// transcript is identical either way.
    pub fn run(&self, trials: u64, seed: u64, threads: usize) -> Result<ProtocolRun> {
        if trials == 0 {
            return Err(Error::NoTrials);
        }
        let transcripts: Vec<ProtocolTranscript> = if threads == 1 {
            (0..trials).map(|t| self.run_trial(seed, t)).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| self.run_trial(seed, t))
                    .collect()
            })
        };
        let summary = self.summarize(&transcripts, seed);
        Ok(ProtocolRun {
            transcripts,
            summary,
        })
    }

    fn summarize(&self, transcripts: &[ProtocolTranscript], seed: u64) -> RunSummary {
        let p = self.modulus;
        let d = p.as_usize();
        let n_lines = d * d;
        let per_basis: Vec<BasisTally> = self
            .bases
            .iter()
            .map(|model| {
                let rows: Vec<&ProtocolTranscript> =
                    transcripts.iter().filter(|t| t.king_basis == model.label).collect();
                let n = rows.len() as u64;
                let successes = rows.iter().filter(|t| t.success).count() as u64;
                let mut king_counts = vec![0u64; d];
                let mut cells = vec![0u64; d * n_lines];
                for t in &rows {
                    king_counts[t.king_outcome as usize] += 1;
                    cells[t.king_outcome as usize * n_lines + t.alice_outcome.index()] += 1;
                }
                let uniform = king_counts
                    .iter()
                    .zip(&model.king)
                    .all(|(&c, pr)| within_five_sigma(c, n, pr.to_f64()));
                let fit = self.fit(model, &cells, n);
                BasisTally {
                    basis: model.label,
                    trials: n,
                    successes,
                    exact_success: model.score.success_probability,
                    success_within_5_sigma: within_five_sigma(
                        successes,
                        n,
                        model.score.success_probability.to_f64(),
                    ),
                    king_outcome_counts: king_counts,
                    exact_king_probabilities: model.king.clone(),
                    king_uniformity_within_5_sigma: uniform,
                    fit,
                }
            })
            .collect();
        let trials = transcripts.len() as u64;
        let successes = transcripts.iter().filter(|t| t.success).count() as u64;
        let exact: Vec<PowerRatio> = self.bases.iter().map(|m| m.score.success_probability).collect();
        let exact_success = Fraction::mean(&exact);
        RunSummary {
            d: p.get(),
            seed,
            preparation: self.prep,
            rule: self.rule,
            options: self.options,
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            exact_success,
            exact_success_f64: exact_success.to_f64(),
            success_within_5_sigma: within_five_sigma(successes, trials, exact_success.to_f64()),
            oracle_agreement: per_basis.iter().all(|t| t.fit.passed),
            per_basis,
        }
    }

    fn fit(&self, model: &BasisModel, cells: &[u64], n: u64) -> FitReport {
        let p = self.modulus;
        let n_lines = p.as_usize() * p.as_usize();
        let mut chi = 0.0;
        let mut support = 0usize;
        let mut impossible = 0u64;
        for (idx, &obs) in cells.iter().enumerate() {
            let m = p.residue((idx / n_lines) as i64);
            let prob = model.table.get(m, Line::from_index(p, idx % n_lines)).to_f64();
            if prob == 0.0 {
                impossible += obs;
                continue;
            }
            support += 1;
            let expected = n as f64 * prob;
            chi += (obs as f64 - expected).powi(2) / expected;
        }
        let dof = support.saturating_sub(1);
        let threshold = dof as f64 + 5.0 * (2.0 * dof as f64).sqrt();
        FitReport {
            basis: model.label,
            samples: n,
            chi_square: chi,
            dof,
            threshold,
            impossible_hits: impossible,
            passed: impossible == 0 && (n == 0 || chi <= threshold),
        }
    }
}

pub fn run_protocol(
    p: PrimeModulus,
    prep: Preparation,
    rule: DeductionRule,
    options: ProtocolOptions,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<ProtocolRun> {
    ProtocolEngine::new(p, prep, rule, options)?.run(trials, seed, threads)
}

/// Per-(line, basis) result of the literal protocol.
#[derive(Clone, Debug, Serialize)]
pub struct LiteralFinding {
    pub line: Line,
    pub basis: BasisLabel,
    pub success_probability: PowerRatio,
    /// The literal deduction names the King's outcome on every
    /// nonzero-probability branch.
    pub agrees_with_oracle: bool,
    pub support_law_holds: bool,
    /// Excluded from acceptance: the literal rule has no stated
    /// computational-basis branch.
    pub provisional: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FindingsReport {
    pub d: u32,
    pub literal: Vec<LiteralFinding>,
    /// Literal protocol, success averaged over lines and bases.
    pub literal_overall_success: Fraction,
    pub literal_with_correction: Vec<RuleReport>,
    pub balanced_line_rule: RuleReport,
}

/// Exact findings for every line-vector preparation under the literal rule,
/// with and without the particle-2 correction, plus the balanced strategy.
pub fn findings(p: PrimeModulus) -> Result<FindingsReport> {
    let lines: Vec<Line> = Line::all(p).collect();
    let per_line: Vec<(Vec<LiteralFinding>, RuleReport)> = lines
        .par_iter()
        .map(|&j| {
            let prep = Preparation::LineVector(j);
            let plain = evaluate_rule(p, prep, DeductionRule::Literal, ProtocolOptions::default())?;
            let corrected = evaluate_rule(
                p,
                prep,
                DeductionRule::Literal,
                ProtocolOptions { undo_rotation: true },
            )?;
            let literal = plain
                .per_basis
                .iter()
                .map(|o| LiteralFinding {
                    line: j,
                    basis: o.basis,
                    success_probability: o.success_probability,
                    agrees_with_oracle: o.all_outcomes_succeed,
                    support_law_holds: o.support_law_holds.unwrap_or(false),
                    provisional: o.basis.is_computational(),
                })
                .collect();
            Ok((literal, corrected))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut literal = Vec::new();
    let mut corrected = Vec::new();
    for (l, c) in per_line {
        literal.extend(l);
        corrected.push(c);
    }
    let probs: Vec<PowerRatio> = literal.iter().map(|f| f.success_probability).collect();
    Ok(FindingsReport {
        d: p.get(),
        literal_overall_success: Fraction::mean(&probs),
        literal,
        literal_with_correction: corrected,
        balanced_line_rule: evaluate_rule(
            p,
            Preparation::Balanced,
            DeductionRule::LineRule,
            ProtocolOptions::default(),
        )?,
    })
}
