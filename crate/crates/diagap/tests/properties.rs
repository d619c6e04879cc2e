//! Randomized property tests for the structural invariants: CRT round-trips,
//! exact integer roots, symmetry invariance of counts, partition guarantees,
//! and serialization round-trips.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

use diagap::arith::{crt, int_root, primes_in, ResidueSystem};
use diagap::counting::{count_brute_all, DiagonalForm};
use diagap::gapcraft::{
    partition_bins, ratio_from_string, ratio_to_string, SelectedPrime,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// CRT: the combined residue reproduces every congruence and is reduced.
    #[test]
    fn crt_round_trip(residues in proptest::collection::vec(0u64..10_000, 1..20)) {
        let pool = primes_in(2, 300);
        let pairs: Vec<(BigUint, u64)> = residues
            .iter()
            .zip(pool.iter())
            .map(|(r, &p)| (BigUint::from(r % p), p))
            .collect();
        let expect_m: BigUint = pairs.iter().map(|(_, p)| BigUint::from(*p)).product();
        let (m, big_m) = crt(&ResidueSystem::new(pairs.clone())).unwrap();
        prop_assert_eq!(&big_m, &expect_m);
        prop_assert!(m < big_m);
        for (r, p) in &pairs {
            prop_assert_eq!(&(&m % *p), r);
        }
    }

    /// int_root returns the exact floor root: r^s <= n < (r+1)^s.
    #[test]
    fn int_root_exact(hi in 0u128..u128::MAX, s in 1u32..6) {
        let n = BigUint::from(hi);
        let r = int_root(&n, s);
        prop_assert!(r.pow(s) <= n);
        prop_assert!((&r + 1u32).pow(s) > n);
    }

    /// Counts are invariant under coefficient permutation and under scaling
    /// one coefficient by an s-th power (the substitution x -> x/u).
    #[test]
    fn count_symmetry(
        coeffs in proptest::array::uniform3(1u64..30),
        unit in 1u64..30,
        seed in 0usize..6,
    ) {
        let p = 31u64;
        let form = DiagonalForm::cubic(coeffs);
        let base = count_brute_all(&form, p);
        // A permutation of the coefficients.
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0],
        ];
        let perm = perms[seed];
        let permuted = DiagonalForm::cubic([coeffs[perm[0]], coeffs[perm[1]], coeffs[perm[2]]]);
        prop_assert_eq!(&count_brute_all(&permuted, p), &base);
        // Scale the first coefficient by unit^3 (must stay nonzero mod p).
        if unit % p != 0 {
            let scaled = [
                coeffs[0] * unit * unit * unit,
                coeffs[1],
                coeffs[2],
            ];
            let scaled = DiagonalForm::cubic(scaled);
            prop_assert_eq!(&count_brute_all(&scaled, p), &base);
        }
    }

    /// Greedy partition guarantee: min bin weight >= total/K - max single
    /// weight, all bins nonempty.
    #[test]
    fn partition_guarantee(
        ratios in proptest::collection::vec((1u32..999, 1000u32..2000), 3..40),
        k in 1u32..5,
    ) {
        prop_assume!(ratios.len() as u32 >= k);
        let pool = primes_in(2, 10_000);
        let primes: Vec<SelectedPrime> = ratios
            .iter()
            .zip(pool.iter())
            .map(|((num, den), &p)| SelectedPrime {
                p,
                t: 0,
                k: None,
                ratio0: BigRational::new(BigInt::from(*num), BigInt::from(*den)),
            })
            .collect();
        let bins = partition_bins(&primes, k).unwrap();
        prop_assert_eq!(bins.len(), k as usize);
        prop_assert!(bins.iter().all(|b| !b.is_empty()));
        prop_assert_eq!(
            bins.iter().map(|b| b.len()).sum::<usize>(),
            primes.len()
        );
        let weight = |p: u64| -> f64 {
            let sp = primes.iter().find(|s| s.p == p).unwrap();
            -sp.ratio0.to_f64().unwrap().ln()
        };
        let totals: Vec<f64> = bins
            .iter()
            .map(|b| b.iter().map(|&p| weight(p)).sum())
            .collect();
        let total: f64 = totals.iter().sum();
        let max_single = primes
            .iter()
            .map(|s| -s.ratio0.to_f64().unwrap().ln())
            .fold(0.0f64, f64::max);
        let min_bin = totals.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(min_bin >= total / k as f64 - max_single - 1e-9);
    }

    /// Rational string round-trip in lowest terms.
    #[test]
    fn ratio_string_round_trip(num in -100_000i64..100_000, den in 1i64..100_000) {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        let s = ratio_to_string(&r);
        prop_assert_eq!(ratio_from_string(&s).unwrap(), r);
    }

    /// Sieve membership matches the exact window search on random windows.
    #[test]
    fn sieve_window_consistency(a in 0u64..4000, k in 1u64..8) {
        use diagap::sieve::{sieve_values, window_has_value};
        let form = DiagonalForm::cubic([1, 1, 2]);
        let n = 5000u64;
        prop_assume!(a + k < n);
        let bits = sieve_values(&form, n).unwrap();
        let window = window_has_value(&form, &BigUint::from(a), k);
        let expect: Vec<u64> = (a + 1..=a + k).filter(|&i| bits.get(i)).collect();
        let mut got: Vec<u64> = window
            .representations
            .iter()
            .map(|r| r.n.to_u64().unwrap())
            .collect();
        got.sort_unstable();
        got.dedup();
        prop_assert_eq!(got, expect);
    }
}

/// Multiplicativity across coprime prime moduli on random residues (not a
/// proptest macro case because the convolution oracle is reused).
#[test]
fn squarefree_multiplicativity() {
    let form = DiagonalForm::cubic([1, 2, 3]);
    let a5 = count_brute_all(&form, 5);
    let a7 = count_brute_all(&form, 7);
    let a11 = count_brute_all(&form, 11);
    for m in 0..(5u64 * 7 * 11) {
        let expected = a5[(m % 5) as usize] * a7[(m % 7) as usize] * a11[(m % 11) as usize];
        let got = diagap::counting::count_squarefree(&form, &BigUint::from(m), &[5, 7, 11])
            .unwrap();
        assert_eq!(got.exact_count(), Some(&BigUint::from(expected)));
    }
    let one = BigRational::from_integer(BigInt::one());
    let total: BigRational = (0..(5u64 * 7 * 11))
        .map(|m| {
            diagap::counting::count_squarefree(&form, &BigUint::from(m), &[5, 7, 11])
                .unwrap()
                .ratio
        })
        .sum();
    // Mass conservation: Σ_m r(m, M) = M^s, i.e. Σ ratios = M.
    assert_eq!(total, &one * BigInt::from(5u64 * 7 * 11));
}
