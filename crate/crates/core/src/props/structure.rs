use crate::arith::prime;
use crate::dapg::{line_points, line_through, point_on_line};
use crate::meanking::{deduce, DeductionRule, Preparation, ProtocolEngine, ProtocolOptions};
use crate::mub::{mub_state, projector_element, tilde};
use crate::{BasisLabel, CycloAmplitude, Incidence, Line, MubIndex, PrimeModulus};
use proptest::prelude::*;

type C = CycloAmplitude;

fn modulus(choices: &'static [u32]) -> impl Strategy<Value = PrimeModulus> {
    prop::sample::select(choices).prop_map(prime)
}

fn line(p: PrimeModulus) -> impl Strategy<Value = Line> {
    let d = p.get() as i64;
    (0..d, 0..d).prop_map(move |(a, m0)| Line::new(p.residue(a), p.residue(m0)))
}

fn basis(p: PrimeModulus) -> impl Strategy<Value = BasisLabel> {
    (0..=p.as_usize()).prop_map(move |c| BasisLabel::from_column(p, c))
}

const GEOMETRY_PRIMES: [u32; 6] = [3, 5, 7, 11, 13, 97];

proptest! {
    #[test]
    fn line_through_round_trip(
        (j, i, k) in modulus(&GEOMETRY_PRIMES).prop_flat_map(|p| {
            let cols = p.as_usize() + 1;
            (line(p), 0..cols, 0..cols)
        })
    ) {
        prop_assume!(i != k);
        let pts = line_points(j);
        prop_assert_eq!(line_through(pts[i], pts[k]).unwrap(), j);
    }

    #[test]
    fn each_line_has_one_point_per_column((j, b) in modulus(&GEOMETRY_PRIMES).prop_flat_map(|p| (line(p), basis(p)))) {
        let pt = j.point_at(b);
        prop_assert!(point_on_line(pt, j));
        let p = j.modulus();
        let hits = p.residues().filter(|&m| point_on_line(MubIndex::new(m, b), j)).count();
        prop_assert_eq!(hits, 1);
    }

    #[test]
    fn conjugation_closure((m, b, n) in modulus(&[3, 5, 7, 11, 13]).prop_flat_map(|p| {
        let d = p.get() as i64;
        (0..d, 0..d, 0..d).prop_map(move |(m, b, n)| (p.residue(m), p.residue(b), p.residue(n)))
    })) {
        let idx = MubIndex::numeric(m, b);
        let bra = mub_state::<C>(tilde(idx));
        prop_assert_eq!(mub_state::<C>(idx).amp(n.value() as usize).clone(), bra.amp(n.value() as usize).conj());
    }

    #[test]
    fn projector_elements_agree_along_a_line(
        (j, b1, b2, n) in modulus(&[3, 5, 7, 11]).prop_flat_map(|p| {
            let d = p.get() as i64;
            (line(p), 0..d, 0..d, 0..d)
        })
    ) {
        let p = j.modulus();
        let n = p.residue(n);
        let n2 = j.mddot * 2 - n;
        let e1 = projector_element::<C>(j.point_at(BasisLabel::Numeric(p.residue(b1))), n, n2).unwrap();
        let e2 = projector_element::<C>(j.point_at(BasisLabel::Numeric(p.residue(b2))), n, n2).unwrap();
        prop_assert_eq!(e1, e2);
    }

    #[test]
    fn deduce_is_pure(
        (j, jm, b) in modulus(&[3, 5, 7, 97]).prop_flat_map(|p| (line(p), line(p), basis(p)))
    ) {
        for rule in [DeductionRule::LineRule, DeductionRule::Literal] {
            let first = deduce(rule, Some(j), jm, b);
            prop_assert!(first.is_some());
            prop_assert_eq!(first, deduce(rule, Some(j), jm, b));
        }
        prop_assert_eq!(deduce(DeductionRule::LineRule, None, jm, b), Some(jm.row_at(b)));
    }
}

#[test]
fn incidence_sums() {
    for d in [3, 5, 7, 11, 13] {
        let inc = Incidence::new(prime(d));
        let m = inc.matrix();
        assert!(m.iter().all(|row| row.iter().filter(|&&x| x).count() == d as usize + 1));
        for k in 0..inc.points().len() {
            assert_eq!(m.iter().filter(|row| row[k]).count(), d as usize);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn balanced_outcomes_contain_the_kings_point(seed in any::<u64>(), d in prop::sample::select(&[3u32, 5][..])) {
        let p = prime(d);
        let engine = ProtocolEngine::new(p, Preparation::Balanced, DeductionRule::LineRule, ProtocolOptions::default()).unwrap();
        for t in engine.run(200, seed, 1).unwrap().transcripts {
            let pt = MubIndex::new(p.residue(t.king_outcome as i64), t.king_basis);
            prop_assert!(point_on_line(pt, t.alice_outcome));
            prop_assert!(t.success);
        }
    }

    #[test]
    fn transcripts_do_not_depend_on_threads(seed in any::<u64>(), threads in 2usize..6) {
        let p = prime(3);
        let j = Line::new(p.one(), p.residue(2));
        let engine = ProtocolEngine::new(p, Preparation::LineVector(j), DeductionRule::Literal, ProtocolOptions::default()).unwrap();
        let a = engine.run(300, seed, 1).unwrap();
        let b = engine.run(300, seed, threads).unwrap();
        prop_assert_eq!(a.transcripts, b.transcripts);
    }

    #[test]
    fn line_vector_outcomes_respect_support_law(seed in any::<u64>(), a in 0i64..3, m0 in 0i64..3) {
        let p = prime(3);
        let j = Line::new(p.residue(a), p.residue(m0));
        let engine = ProtocolEngine::new(p, Preparation::LineVector(j), DeductionRule::Literal, ProtocolOptions::default()).unwrap();
        for t in engine.run(100, seed, 1).unwrap().transcripts {
            prop_assert!(crate::meanking::literal_support_predicate(j, t.alice_outcome, t.king_basis));
        }
    }
}
