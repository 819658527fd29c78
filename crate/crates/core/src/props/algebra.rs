use crate::arith::prime;
use crate::hilbert::{DenseMatrix, Ket};
use crate::{CycloAmplitude, MonomialOperator, PrimeModulus};
use num_complex::Complex64;
use proptest::prelude::*;

const SMALL_PRIMES: [u32; 6] = [3, 5, 7, 11, 13, 17];
const PRIMES_TO_31: [u32; 10] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

fn modulus(choices: &'static [u32]) -> impl Strategy<Value = PrimeModulus> {
    prop::sample::select(choices).prop_map(prime)
}

/// Cyclotomic value with the given coefficient bound and an even scale
/// (even scales add without parity alignment in every dimension).
fn cyclo(p: PrimeModulus, bound: i128) -> impl Strategy<Value = CycloAmplitude> {
    (
        prop::collection::vec(-bound..=bound, p.as_usize()),
        prop::sample::select(&[0, 2, 4][..]),
    )
        .prop_map(move |(raw, scale)| CycloAmplitude::from_raw(p, raw, scale))
}

fn triple(bound: i128) -> impl Strategy<Value = (CycloAmplitude, CycloAmplitude, CycloAmplitude)> {
    modulus(&SMALL_PRIMES).prop_flat_map(move |p| (cyclo(p, bound), cyclo(p, bound), cyclo(p, bound)))
}

fn coeff_mass(a: &CycloAmplitude) -> f64 {
    let d = a.modulus().get() as f64;
    a.coeffs().iter().map(|&c| (c as f64).abs()).sum::<f64>() * d.powf(-(a.scale() as f64) / 2.0)
}

proptest! {
    #[test]
    fn ring_laws((a, b, c) in triple(1000)) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!(&a * &(b.clone() + c.clone()), &a * &b + &a * &c);
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn canonical_form_is_idempotent(a in modulus(&SMALL_PRIMES).prop_flat_map(|p| cyclo(p, 10_000))) {
        let mut raw = a.coeffs().to_vec();
        raw.push(0);
        let again = CycloAmplitude::from_raw(a.modulus(), raw, a.scale());
        prop_assert_eq!(again.coeffs(), a.coeffs());
        prop_assert_eq!(again.scale(), a.scale());
    }

    #[test]
    fn complex_bridge_is_a_ring_morphism(
        (a, b) in modulus(&PRIMES_TO_31).prop_flat_map(|p| (cyclo(p, 1_000_000), cyclo(p, 1_000_000)))
    ) {
        // f64 carries ~16 digits, so the bound scales with the coefficient mass
        let scale = 1.0 + coeff_mass(&a) * coeff_mass(&b);
        let sum = (a.clone() + b.clone()).to_complex() - (a.to_complex() + b.to_complex());
        let prod = (&a * &b).to_complex() - a.to_complex() * b.to_complex();
        prop_assert!(sum.norm() <= 1e-12 * scale, "sum error {}", sum.norm());
        prop_assert!(prod.norm() <= 1e-12 * scale, "product error {}", prod.norm());
        prop_assert!((a.conj().to_complex() - a.to_complex().conj()).norm() <= 1e-12 * (1.0 + coeff_mass(&a)));
    }

    #[test]
    fn complex_bridge_absolute_for_unit_coefficients(
        (a, b) in modulus(&PRIMES_TO_31).prop_flat_map(|p| (cyclo(p, 1), cyclo(p, 1)))
    ) {
        let prod = (&a * &b).to_complex() - a.to_complex() * b.to_complex();
        prop_assert!(prod.norm() < 1e-12);
    }

    #[test]
    fn zero_iff_tiny(a in modulus(&SMALL_PRIMES[..5]).prop_flat_map(|p| cyclo(p, 20))) {
        prop_assert_eq!(a.is_zero(), a.to_complex().norm() < 1e-9);
    }

    #[test]
    fn difference_with_self_is_zero(a in modulus(&SMALL_PRIMES).prop_flat_map(|p| cyclo(p, 1000))) {
        prop_assert!((a.clone() - a.clone()).is_zero());
        prop_assert_eq!(a.clone() + (-a.clone()), CycloAmplitude::zero(a.modulus()));
    }
}

fn ket(p: PrimeModulus, dim: usize) -> impl Strategy<Value = Ket<CycloAmplitude>> {
    prop::collection::vec(cyclo(p, 5), dim).prop_map(move |amps| Ket::from_amps(p, amps).unwrap())
}

fn monomial(p: PrimeModulus) -> impl Strategy<Value = MonomialOperator> {
    let d = p.get() as i64;
    (0..d, 0..d, any::<bool>(), 0..d)
        .prop_map(move |(a, c, inv, t)| MonomialOperator::new(p.residue(a), p.residue(c), inv, p.residue(t)))
}

const OP_PRIMES: [u32; 3] = [3, 5, 7];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomial_apply_matches_dense(
        (op, k) in modulus(&OP_PRIMES).prop_flat_map(|p| (monomial(p), ket(p, p.as_usize())))
    ) {
        let dense: DenseMatrix<CycloAmplitude> = op.to_dense();
        prop_assert!(op.apply(&k).unwrap().close_to(&dense.apply(&k).unwrap(), 0.0));
        let lhs = k.inner(&op.apply(&k).unwrap()).unwrap();
        let rhs = k.inner(&dense.apply(&k).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_is_associative_and_adjoint_inverts(
        (a, b, c) in modulus(&OP_PRIMES).prop_flat_map(|p| (monomial(p), monomial(p), monomial(p)))
    ) {
        let p = a.modulus();
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert_eq!(a.compose(&a.adjoint()), MonomialOperator::identity(p));
        prop_assert_eq!(a.adjoint().compose(&a), MonomialOperator::identity(p));
        let dense_adj: DenseMatrix<CycloAmplitude> = a.adjoint().to_dense();
        prop_assert!(dense_adj.close_to(&a.to_dense::<CycloAmplitude>().adjoint(), 0.0));
        let ab: DenseMatrix<CycloAmplitude> = a.compose(&b).to_dense();
        prop_assert!(ab.close_to(&a.to_dense::<CycloAmplitude>().matmul(&b.to_dense()), 0.0));
    }

    #[test]
    fn tensor_factorizes_inner_products(
        (a, b, c, e, s) in modulus(&OP_PRIMES).prop_flat_map(|p| {
            let d = p.as_usize();
            (ket(p, d), ket(p, d), ket(p, d), ket(p, d), cyclo(p, 5))
        })
    ) {
        let lhs = a.tensor(&b).unwrap().inner(&c.tensor(&e).unwrap()).unwrap();
        prop_assert_eq!(lhs, &a.inner(&c).unwrap() * &b.inner(&e).unwrap());
        // bilinearity in each slot
        let left = a.add(&c).unwrap().tensor(&b).unwrap();
        prop_assert!(left.close_to(&a.tensor(&b).unwrap().add(&c.tensor(&b).unwrap()).unwrap(), 0.0));
        let scaled = a.scaled(&s).tensor(&b).unwrap();
        prop_assert!(scaled.close_to(&a.tensor(&b.scaled(&s)).unwrap(), 0.0));
    }

    #[test]
    fn float_backend_tracks_exact_kets(
        (op, k) in modulus(&OP_PRIMES).prop_flat_map(|p| (monomial(p), ket(p, p.as_usize())))
    ) {
        let exact = op.apply(&k).unwrap().to_float();
        let float: Ket<Complex64> = op.apply(&k.to_float()).unwrap();
        prop_assert!(exact.max_abs_diff(&float) < 1e-9);
    }
}
