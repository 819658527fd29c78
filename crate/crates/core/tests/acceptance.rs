//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output; exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use kingsline::arith::prime;
use kingsline::dapg::{format_points, line_points};
use kingsline::meanking::{evaluate_rule, findings, king_branches, DeductionRule, Preparation, ProtocolEngine, ProtocolOptions};
use kingsline::states::{resolve_exponent_sign, ExponentSign, RESOLVED_EXPONENT_SIGN};
use kingsline::verify::{
    balance_suite, coherence_suite, conventions, geometry_suite, line_state_suite, mub_suite, overlap_phase_finding,
    overlap_suite, projector_suite, verify_dimension, Check,
};
use kingsline::{Backend, BasisLabel, CycloAmplitude, Incidence, Line, PowerRatio, PrimeModulus};
use num_complex::Complex64;

const SEED: u64 = 0x5eed_2024;
const TRIALS: u64 = 10_000;
const TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn failing(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect()
}

fn dims(ds: &[u32]) -> Vec<PrimeModulus> {
    ds.iter().copied().map(prime).collect()
}

fn mub() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in dims(&[3, 5, 7, 11, 13]) {
        bad.extend(failing(&mub_suite::<CycloAmplitude>(p, 0.0)).into_iter().map(|s| format!("d={} exact: {s}", p.get())));
        bad.extend(failing(&mub_suite::<Complex64>(p, TOL)).into_iter().map(|s| format!("d={} float: {s}", p.get())));
    }
    let secs = start.elapsed().as_secs_f64();
    let fast = secs < 10.0;
    outcome(
        bad.is_empty() && fast,
        format!("d in {{3,5,7,11,13}}, exact and float, {secs:.2}s (limit 10s) {}", bad.join("; ")),
    )
}

fn geometry() -> Outcome {
    let mut bad = Vec::new();
    for p in dims(&[3, 5, 7, 11]) {
        let d = p.as_usize();
        bad.extend(failing(&geometry_suite(p)).into_iter().map(|s| format!("d={d}: {s}")));
        let inc = Incidence::new(p);
        if inc.lines().len() != d * d || inc.points().len() != d * (d + 1) {
            bad.push(format!("d={d}: counts {} lines, {} points", inc.lines().len(), inc.points().len()));
        }
    }
    let p = prime(3);
    let example = format_points(&line_points(Line::new(p.one(), p.residue(2))));
    if example != "{(1,CB),(2,0),(1,1),(0,2)}" {
        bad.push(format!("d=3 example line renders {example}"));
    }
    outcome(bad.is_empty(), format!("axioms (a)-(e) for d in {{3,5,7,11}}; line (1,2) = {example} {}", bad.join("; ")))
}

fn balance() -> Outcome {
    let mut bad = Vec::new();
    for p in dims(&[3, 5, 7, 11]) {
        bad.extend(failing(&balance_suite::<CycloAmplitude>(p, 0.0)).into_iter().map(|s| format!("d={}: {s}", p.get())));
    }
    outcome(bad.is_empty(), format!("column sums equal R, <R|R> = d, d in {{3,5,7,11}} {}", bad.join("; ")))
}

fn line_states() -> Outcome {
    let mut bad = Vec::new();
    let mut offsets = Vec::new();
    for p in dims(&[3, 5, 7]) {
        bad.extend(failing(&line_state_suite::<CycloAmplitude>(p, 0.0)).into_iter().map(|s| format!("d={}: {s}", p.get())));
        let off = conventions(p).closed_form_phase_offset;
        offsets.push(format!("d={}: {}", p.get(), off.as_deref().unwrap_or("none")));
        if off.is_none() {
            bad.push(format!("d={}: no single phase offset", p.get()));
        }
    }
    outcome(
        bad.is_empty(),
        format!("closed form vs sum over points, Gram, reduced density; offsets [{}] {}", offsets.join(", "), bad.join("; ")),
    )
}

fn overlap() -> Outcome {
    let mut bad = Vec::new();
    let mut phase = Vec::new();
    for p in dims(&[3, 5]) {
        bad.extend(failing(&overlap_suite::<CycloAmplitude>(p, 0.0)).into_iter().map(|s| format!("d={}: {s}", p.get())));
        let f = overlap_phase_finding::<CycloAmplitude>(p, 0.0);
        phase.push(format!(
            "d={}: stated phase matches {}/{} incident pairs, single offset on {}/{} lines",
            p.get(),
            f.matching,
            f.incident_pairs,
            f.lines_with_single_offset,
            f.lines
        ));
        if !(f.mismatching == 0 || f.reconcilable) {
            bad.push(format!("d={}: incident phase w^(2b mdd^2 - b mdd) not reproduced", p.get()));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "magnitudes in {{0,1/d}} iff incident, CB coefficient measured 1/sqrt(d) (stated 1/sqrt(2) flagged); {} {}",
            phase.join("; "),
            bad.join("; ")
        ),
    )
}

fn projector() -> Outcome {
    let mut bad = Vec::new();
    for p in dims(&[3, 5]) {
        bad.extend(failing(&projector_suite::<CycloAmplitude>(p, 0.0)).into_iter().map(|s| format!("d={}: {s}", p.get())));
        let r = resolve_exponent_sign(p);
        if r != [ExponentSign::Minus] {
            bad.push(format!("d={}: sign candidates {r:?}", p.get()));
        }
    }
    if RESOLVED_EXPONENT_SIGN != ExponentSign::Minus {
        bad.push("pinned sign changed".into());
    }
    outcome(bad.is_empty(), format!("element formula, line-sum support, sign pinned to {RESOLVED_EXPONENT_SIGN:?} {}", bad.join("; ")))
}

fn transcript_bytes(engine: &ProtocolEngine, threads: usize) -> Vec<u8> {
    let run = engine.run(TRIALS, SEED, threads).expect("run");
    let mut out = Vec::new();
    for t in &run.transcripts {
        out.extend(serde_json::to_vec(t).unwrap());
        out.push(b'\n');
    }
    out
}

fn certified() -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for p in dims(&[3, 5, 7]) {
        let d = p.get();
        let r = evaluate_rule(p, Preparation::Balanced, DeductionRule::LineRule, ProtocolOptions::default()).unwrap();
        if !r.certain {
            bad.push(format!("d={d}: exact success {}", r.overall_success));
        }
        let engine =
            ProtocolEngine::new(p, Preparation::Balanced, DeductionRule::LineRule, ProtocolOptions::default()).unwrap();
        let run = engine.run(TRIALS, SEED, 0).unwrap();
        notes.push(format!("d={d}: {}/{}", run.summary.successes, run.summary.trials));
        if run.summary.successes != TRIALS {
            bad.push(format!("d={d}: {} successes", run.summary.successes));
        }
        let reference = transcript_bytes(&engine, 1);
        let rerun = transcript_bytes(&engine, 1);
        let parallel = transcript_bytes(&engine, 4);
        let pooled = transcript_bytes(&engine, 0);
        if reference != rerun || reference != parallel || reference != pooled {
            bad.push(format!("d={d}: transcripts differ across runs or thread counts"));
        }
    }
    outcome(bad.is_empty(), format!("exact success 1; Monte Carlo {} {}", notes.join(", "), bad.join("; ")))
}

fn literal() -> Outcome {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for (d, lines) in [(3u32, vec![(1, 2), (0, 0)]), (5, vec![(3, 1)])] {
        let p = prime(d);
        for (a, m0) in lines {
            let j = Line::new(p.residue(a), p.residue(m0));
            let engine = ProtocolEngine::new(p, Preparation::LineVector(j), DeductionRule::Literal, ProtocolOptions::default())
                .unwrap();
            let s = engine.run(TRIALS, SEED, 0).unwrap().summary;
            let worst = s.per_basis.iter().map(|b| b.fit.chi_square - b.fit.threshold).fold(f64::MIN, f64::max);
            notes.push(format!("d={d} j={j}: {}/{} vs exact {}", s.successes, s.trials, s.exact_success));
            if !s.oracle_agreement {
                bad.push(format!("d={d} j={j}: chi-square over 5 sigma threshold by {worst:.2}"));
            }
        }
        let f = findings(p).unwrap();
        let expected = (d * d * (d + 1)) as usize;
        let agree = f.literal.iter().filter(|x| !x.provisional && x.agrees_with_oracle).count();
        notes.push(format!(
            "d={d} findings: {} (line, basis) entries, literal rule certain on {agree} numeric-basis cases",
            f.literal.len()
        ));
        if f.literal.len() != expected {
            bad.push(format!("d={d}: findings enumerate {} entries, expected {expected}", f.literal.len()));
        }
        if !f.literal.iter().all(|x| x.support_law_holds) {
            bad.push(format!("d={d}: support law violated"));
        }
    }
    outcome(bad.is_empty(), format!("{} {}", notes.join("; "), bad.join("; ")))
}

fn uniformity() -> Outcome {
    let mut bad = Vec::new();
    for p in dims(&[3, 5, 7]) {
        let d = p.get();
        let inv = PowerRatio::inv_power(p, 1);
        for prep in [Preparation::Balanced, Preparation::LineVector(Line::new(p.one(), p.residue(2)))] {
            for b in BasisLabel::all(p) {
                if !king_branches(prep, p, b).unwrap().iter().all(|br| br.probability == inv) {
                    bad.push(format!("d={d} {prep} basis {b}: exact P(m) != 1/d"));
                }
            }
            let rule = match prep {
                Preparation::Balanced => DeductionRule::LineRule,
                Preparation::LineVector(_) => DeductionRule::Literal,
            };
            let s = ProtocolEngine::new(p, prep, rule, ProtocolOptions::default())
                .unwrap()
                .run(TRIALS, SEED, 0)
                .unwrap()
                .summary;
            for t in &s.per_basis {
                if !t.king_uniformity_within_5_sigma {
                    bad.push(format!("d={d} {prep} basis {}: counts {:?}", t.basis, t.king_outcome_counts));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("both preparations, every basis, d in {{3,5,7}} {}", bad.join("; ")))
}

fn coherence() -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for p in dims(&[3, 5, 7]) {
        for c in coherence_suite(p, TOL) {
            worst = worst.max(c.residual);
            if !c.passed {
                bad.push(format!("d={}: {} ({})", p.get(), c.name, c.detail));
            }
        }
        let float = verify_dimension(p, Backend::Float, TOL);
        bad.extend(failing(&float.checks).into_iter().map(|s| format!("d={} float: {s}", p.get())));
        worst = worst.max(float.checks.iter().map(|c| c.residual).fold(0.0, f64::max));
    }
    outcome(bad.is_empty(), format!("max residual {worst:.2e} (limit {TOL:e}) {}", bad.join("; ")))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("MUB suite", mub),
        ("geometry suite", geometry),
        ("balance suite", balance),
        ("line-state suite", line_states),
        ("overlap theorem", overlap),
        ("projector elements and sign", projector),
        ("certified protocol", certified),
        ("literal protocol", literal),
        ("King-outcome uniformity", uniformity),
        ("backend coherence", coherence),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failures += usize::from(!o.passed);
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail.trim_end()
        );
    }
    println!("acceptance: {}/10 criteria pass", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
