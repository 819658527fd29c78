use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kingsline::dapg::{format_points, AxiomReport};
use kingsline::meanking::{evaluate_rule, exact_joint_distribution, findings as exact_findings, FindingsReport, RuleReport};
use kingsline::verify::{coherence_suite, verify_dimension};
use kingsline::{
    Backend, BasisLabel, DeductionRule, Incidence, Line, OutcomeTable, Preparation, PrimeModulus, ProtocolEngine,
    ProtocolOptions, VerifyReport,
};
use serde::Serialize;

use crate::output::{write_atomic, write_json, CliError, Envelope};

fn dims(ps: &[PrimeModulus]) -> Vec<u32> {
    ps.iter().map(|p| p.get()).collect()
}

#[derive(Serialize)]
struct VerifyBody {
    passed: bool,
    reports: Vec<VerifyReport>,
}

pub fn verify(
    dir: &Path,
    ps: &[PrimeModulus],
    backend: Backend,
    tol: f64,
    coherence: bool,
    out: Option<PathBuf>,
) -> Result<bool, CliError> {
    let mut reports = Vec::new();
    for &p in ps {
        let mut r = verify_dimension(p, backend, tol);
        if coherence {
            r.checks.extend(coherence_suite(p, tol));
            r.passed = r.checks.iter().all(|c| c.passed);
        }
        for c in &r.checks {
            println!("d={} [{}] {} {}: {} ({})", p.get(), backend.name(), c.status(), c.suite_name(), c.name, c.detail);
        }
        let ph = &r.conventions.overlap_phase;
        println!(
            "d={} note: stated incident phase {} matches {}/{} pairs; computational-basis coefficient measured {} (stated {})",
            p.get(),
            ph.stated,
            ph.matching,
            ph.incident_pairs,
            r.conventions.cb_overlap.measured,
            r.conventions.cb_overlap.stated
        );
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let path = out.unwrap_or_else(|| dir.join("verify.json"));
    write_json(
        &path,
        &Envelope::new("kingsline/verify", dims(ps), backend.name(), None, VerifyBody { passed, reports }),
    )?;
    println!("{} -> {}", if passed { "PASS" } else { "FAIL" }, path.display());
    Ok(passed)
}

#[derive(Serialize)]
struct LineEntry {
    index: usize,
    line: Line,
    points: Vec<String>,
}

#[derive(Serialize)]
struct Example {
    line: Line,
    points: String,
    note: &'static str,
}

#[derive(Serialize)]
struct GeometryBody {
    rows: u32,
    columns: u32,
    points: Vec<String>,
    lines: Vec<LineEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    example: Option<Example>,
    axioms: AxiomReport,
}

pub fn geometry(dir: &Path, p: PrimeModulus, json: Option<PathBuf>, csv: Option<PathBuf>) -> Result<bool, CliError> {
    let inc = Incidence::new(p);
    let axioms = inc.verify_axioms();
    let lines = inc
        .lines()
        .iter()
        .map(|&j| LineEntry {
            index: j.index(),
            line: j,
            points: inc.points_of(j).iter().map(|pt| pt.to_string()).collect(),
        })
        .collect();
    let example = (p.get() == 3).then(|| {
        let j = Line::new(p.one(), p.residue(2));
        Example {
            line: j,
            points: format_points(&kingsline::dapg::line_points(j)),
            note: "worked example: slope 1, intercept m(0) = 2, one point per column in order CB, 0, 1, 2",
        }
    });
    let passed = axioms.all_passed();
    let body = GeometryBody {
        rows: p.get(),
        columns: p.get() + 1,
        points: inc.points().iter().map(|pt| pt.to_string()).collect(),
        lines,
        example,
        axioms,
    };
    let json = json.unwrap_or_else(|| dir.join(format!("geometry-d{}.json", p.get())));
    let csv = csv.unwrap_or_else(|| dir.join(format!("incidence-d{}.csv", p.get())));
    write_json(&json, &Envelope::new("kingsline/geometry", vec![p.get()], "exact", None, body))?;
    write_atomic(&csv, inc.to_csv().as_bytes())?;
    println!(
        "d={}: {} lines x {} points, axioms {} -> {}, {}",
        p.get(),
        inc.lines().len(),
        inc.points().len(),
        if passed { "PASS" } else { "FAIL" },
        json.display(),
        csv.display()
    );
    Ok(passed)
}

#[derive(Serialize)]
struct SupportLaw {
    statement: &'static str,
    holds: Vec<(BasisLabel, bool)>,
}

#[derive(Serialize)]
struct OracleBody {
    preparation: Preparation,
    options: ProtocolOptions,
    /// Cells per table, zero or not: `d · d²`.
    cells_per_table: usize,
    tables: Vec<OutcomeTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support_law: Option<SupportLaw>,
    rules: Vec<RuleReport>,
}

pub fn oracle(
    dir: &Path,
    p: PrimeModulus,
    prep: Preparation,
    basis: Option<BasisLabel>,
    undo_rotation: bool,
    out: Option<PathBuf>,
) -> Result<bool, CliError> {
    let options = ProtocolOptions { undo_rotation };
    let bases: Vec<BasisLabel> = match basis {
        Some(b) => vec![b],
        None => BasisLabel::all(p).collect(),
    };
    let mut tables = Vec::new();
    for b in bases {
        let t = exact_joint_distribution(prep, p, b, options)?;
        if !t.total.is_one() {
            eprintln!("table for basis {b} sums to {}, not 1; nothing written", t.total);
            return Ok(false);
        }
        println!("d={} {prep} basis {b}: {} nonzero entries, total {}", p.get(), t.entries.len(), t.total);
        tables.push(t);
    }
    let mut rules = vec![evaluate_rule(p, prep, DeductionRule::LineRule, options)?];
    if prep.line().is_some() {
        rules.push(evaluate_rule(p, prep, DeductionRule::Literal, options)?);
    }
    let support_law = rules[0].per_basis.iter().all(|o| o.support_law_holds.is_some()).then(|| SupportLaw {
        statement: "P(m, j') > 0 iff m0 - m0' + b (mdd - mdd') = 0 mod d (numeric b), mdd = mdd' (CB); independent of m",
        holds: rules[0]
            .per_basis
            .iter()
            .map(|o| (o.basis, o.support_law_holds.unwrap_or(false)))
            .collect(),
    });
    for r in &rules {
        println!("{} rule: overall success {}", r.rule.name(), r.overall_success);
    }
    let body = OracleBody {
        preparation: prep,
        options,
        cells_per_table: p.as_usize().pow(3),
        tables,
        support_law,
        rules,
    };
    let path = out.unwrap_or_else(|| dir.join(format!("oracle-d{}-{}.json", p.get(), file_tag(prep))));
    write_json(&path, &Envelope::new("kingsline/oracle", vec![p.get()], "exact", None, body))?;
    println!("-> {}", path.display());
    Ok(true)
}

fn file_tag(prep: Preparation) -> String {
    match prep {
        Preparation::Balanced => "balanced".into(),
        Preparation::LineVector(j) => format!("line{}-{}", j.mddot, j.m0),
    }
}

pub struct SimulateConfig {
    pub p: PrimeModulus,
    pub prep: Preparation,
    pub rule: DeductionRule,
    pub trials: u64,
    pub seed: u64,
    pub threads: usize,
    pub undo_rotation: bool,
    pub csv: bool,
    pub transcripts: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn simulate(dir: &Path, cfg: SimulateConfig) -> Result<bool, CliError> {
    let p = cfg.p;
    let engine = ProtocolEngine::new(
        p,
        cfg.prep,
        cfg.rule,
        ProtocolOptions {
            undo_rotation: cfg.undo_rotation,
        },
    )?;
    let run = engine.run(cfg.trials, cfg.seed, cfg.threads)?;
    let stem = format!("d{}-{}-{}-seed{}", p.get(), file_tag(cfg.prep), cfg.rule.name(), cfg.seed);

    let mut jsonl = String::new();
    for t in &run.transcripts {
        jsonl.push_str(&serde_json::to_string(t).expect("transcript serializes"));
        jsonl.push('\n');
    }
    let tpath = cfg.transcripts.unwrap_or_else(|| dir.join(format!("transcripts-{stem}.jsonl")));
    write_atomic(&tpath, jsonl.as_bytes())?;

    let s = &run.summary;
    let spath = cfg
        .summary
        .unwrap_or_else(|| dir.join(format!("summary-{stem}.{}", if cfg.csv { "csv" } else { "json" })));
    if cfg.csv {
        let mut out = String::from(
            "basis,trials,successes,exact_success,success_within_5_sigma,chi_square,dof,threshold,impossible_hits,fit_passed\n",
        );
        for b in &s.per_basis {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{},{:.6},{},{}",
                b.basis,
                b.trials,
                b.successes,
                b.exact_success,
                b.success_within_5_sigma,
                b.fit.chi_square,
                b.fit.dof,
                b.fit.threshold,
                b.fit.impossible_hits,
                b.fit.passed
            );
        }
        write_atomic(&spath, out.as_bytes())?;
    } else {
        write_json(&spath, &Envelope::new("kingsline/simulate", vec![p.get()], "exact", Some(cfg.seed), s))?;
    }
    println!(
        "d={} {} {}: {}/{} successes (exact {}), sampled tables agree with oracle: {}",
        p.get(),
        cfg.prep,
        cfg.rule.name(),
        s.successes,
        s.trials,
        s.exact_success,
        s.oracle_agreement
    );
    println!("-> {}, {}", tpath.display(), spath.display());
    Ok(true)
}

#[derive(Serialize)]
struct FindingsBody {
    reports: Vec<FindingsReport>,
}

pub fn findings(dir: &Path, ps: &[PrimeModulus], out: Option<PathBuf>) -> Result<bool, CliError> {
    let mut reports = Vec::new();
    for &p in ps {
        let f = exact_findings(p)?;
        let numeric: Vec<_> = f.literal.iter().filter(|x| !x.provisional).collect();
        println!(
            "d={}: literal rule correct on {}/{} (line, numeric basis) cases; mean success {}; balanced line rule {}",
            p.get(),
            numeric.iter().filter(|x| x.agrees_with_oracle).count(),
            numeric.len(),
            f.literal_overall_success,
            f.balanced_line_rule.overall_success
        );
        reports.push(f);
    }
    let path = out.unwrap_or_else(|| dir.join("findings.json"));
    write_json(&path, &Envelope::new("kingsline/findings", dims(ps), "exact", None, FindingsBody { reports }))?;
    println!("-> {}", path.display());
    Ok(true)
}
