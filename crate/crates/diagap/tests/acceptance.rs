//! Acceptance suite: one test (and one pass/fail line) per criterion.
//!
//! Each criterion checks the library against an independent oracle computed
//! inside this file (symmetric sums, direct enumeration, closed-form targets),
//! never against the code path under test.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::path::PathBuf;

use diagap::counting::{
    count_brute_all, count_brute_capped, count_zero_formula, weil_check, DiagonalForm,
};
use diagap::cyclotomic::{
    classify_tuple, contract_j0_histogram, gauss_sum, j0_class_histogram, jacobi_sum,
    k_term, make_context, CyclotomicInt,
};
use diagap::equidist::density_report;
use diagap::exceptional::{
    empirical_exceptional_probe, is_exceptional_kummer, is_exceptional_pattern,
};
use diagap::gapcraft::{
    build_witness, check_witness, gap_density_bound, per_residue_epsilons, ratio_to_string,
    GapWitness, SelectionPolicy,
};
use diagap::sieve::{find_explicit_gap, is_value, window_has_value, GapSearchOutcome};
use diagap::arith::primes_in;

fn cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("scan-cache");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// The 40-form corpus shared by criteria 2, 4 and 5.
fn cubic_corpus() -> Vec<DiagonalForm> {
    [
        [1, 1, 1], [1, 1, 2], [1, 2, 3], [2, 3, 5], [1, 1, 3], [1, 2, 2], [1, 4, 9],
        [3, 5, 7], [1, 1, 7], [2, 2, 2], [1, 5, 25], [1, 2, 4], [1, 3, 9], [2, 4, 8],
        [1, 6, 36], [5, 7, 11], [1, 9, 16], [2, 3, 4], [1, 10, 100], [7, 11, 13],
    ]
    .into_iter()
    .map(DiagonalForm::cubic)
    .collect()
}

fn quartic_corpus() -> Vec<DiagonalForm> {
    [
        [1, 1, 1, 1], [1, 1, 1, 2], [1, 1, 4, 4], [1, 2, 4, 8], [1, 1, 2, 2],
        [1, 2, 3, 4], [1, 1, 1, 3], [2, 3, 5, 7], [1, 1, 2, 8], [1, 3, 9, 27],
        [1, 1, 1, 5], [1, 2, 2, 4], [1, 4, 16, 64], [1, 5, 5, 25], [2, 2, 2, 2],
        [1, 1, 3, 3], [1, 2, 5, 10], [3, 3, 3, 3], [1, 1, 5, 5], [1, 7, 7, 49],
    ]
    .into_iter()
    .map(DiagonalForm::quartic)
    .collect()
}

fn all_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    let mut idx = [0usize, 1, 2, 3];
    fn heap(k: usize, idx: &mut [usize; 4], out: &mut Vec<[usize; 4]>) {
        if k == 1 {
            out.push(*idx);
            return;
        }
        for i in 0..k {
            heap(k - 1, idx, out);
            if k % 2 == 0 {
                idx.swap(i, k - 1);
            } else {
                idx.swap(0, k - 1);
            }
        }
    }
    heap(4, &mut idx, &mut out);
    out
}

/// Criterion 1 — Table 1 rows (b, c) for U1..U8 recomputed from the defining
/// symmetric sums, matching the published table exactly.
#[test]
fn criterion_01_table_one_reproduction() {
    // Representatives of U1..U8 as μ₄ exponents, and the table itself —
    // restated here independently of the library constants.
    let reps: [[u8; 4]; 8] = [
        [0, 0, 0, 0], [0, 0, 0, 2], [0, 0, 0, 1], [0, 0, 2, 2],
        [0, 0, 2, 1], [0, 0, 1, 1], [0, 0, 1, 3], [0, 2, 1, 3],
    ];
    let table: [(i64, i64); 8] = [
        (7, 12), (-5, 0), (-1, -6), (7, -4), (-1, 2), (3, 4), (-1, 0), (3, -4),
    ];
    let perms = all_permutations();
    for (u0, (rep, &(tb, tc))) in reps.iter().zip(table.iter()).enumerate() {
        // b = χ²(Πa) + ¼ Σ_σ χ(a_σ1 a_σ2)·χ³(a_σ3 a_σ4)
        let mut b_sum = CyclotomicInt::zero(4);
        // c = ½ Σ_σ χ²(a_σ1)·χ²(a_σ2)·χ(a_σ3)·χ³(a_σ4)
        let mut c_sum = CyclotomicInt::zero(4);
        for sigma in &perms {
            let e = |i: usize| rep[sigma[i]] as u64;
            let be = (e(0) + e(1) + 3 * (e(2) + e(3))) % 4;
            b_sum = b_sum.add(CyclotomicInt::zeta_pow(4, be as u8));
            let ce = (2 * e(0) + 2 * e(1) + e(2) + 3 * e(3)) % 4;
            c_sum = c_sum.add(CyclotomicInt::zeta_pow(4, ce as u8));
        }
        let lead = CyclotomicInt::zeta_pow(4, ((2 * rep.iter().map(|&x| x as u64).sum::<u64>()) % 4) as u8);
        assert_eq!(b_sum.b, 0, "b sum must be real");
        assert_eq!(c_sum.b, 0, "c sum must be real");
        assert_eq!(b_sum.a % 4, 0);
        assert_eq!(c_sum.a % 2, 0);
        assert_eq!(lead.b, 0);
        let b = lead.a + b_sum.a / 4;
        let c = c_sum.a / 2;
        assert_eq!((b, c), (tb, tc), "row U{}", u0 + 1);
        // The library's classifier stores the same row.
        let cls = classify_tuple(*rep);
        assert_eq!(cls.u as usize, u0 + 1);
        assert_eq!((cls.b, cls.c), (tb, tc));
    }
    println!("criterion 1: PASS (8/8 Table 1 rows from symmetric sums)");
}

/// Criterion 2 — closed formula equals brute force for every applicable prime
/// p ≤ 1500 across the 40-form corpus.
#[test]
fn criterion_02_formula_oracle_equivalence() {
    let mut forms = cubic_corpus();
    forms.extend(quartic_corpus());
    assert!(forms.len() >= 40);
    let mut checked = 0u64;
    for form in &forms {
        for p in primes_in(2, 1501) {
            let formula = match count_zero_formula(form, p) {
                Ok(r) => r,
                Err(_) => continue, // not applicable at this prime
            };
            let brute = count_brute_capped(form, 0, p, 5000).unwrap();
            assert_eq!(
                formula.exact_count(),
                brute.exact_count(),
                "r_F(0, {p}) mismatch for {form}"
            );
            checked += 1;
        }
    }
    println!("criterion 2: PASS ({checked} (form, prime) pairs, zero mismatches)");
}

/// Criterion 3 — Lemma 4.1: exact integer identities (4.1)–(4.5) for all
/// valid primes ≤ 500, and the Gauss-sum identities (4.6)–(4.9) within 1e-6.
#[test]
fn criterion_03_jacobi_identities() {
    let scalar = |s: u8, n: i64| CyclotomicInt::new(s, n, 0);
    // (4.1) J0(χ,χ,χ) = (p−1)·π for p ≡ 1 (mod 3).
    for p in primes_in(2, 501) {
        if p % 3 != 1 {
            continue;
        }
        let ctx = make_context(3, p).unwrap();
        let pi = jacobi_sum(&ctx, 1, 1).unwrap();
        let hist = j0_class_histogram(&ctx, 3);
        let j0 = contract_j0_histogram(3, &hist, &[1, 1, 1]);
        assert_eq!(j0, scalar(3, p as i64 - 1).mul(pi), "(4.1) at p = {p}");
    }
    // (4.2)–(4.5) for q ≡ 1 (mod 4), one shared histogram pass per prime.
    for q in primes_in(2, 501) {
        if q % 4 != 1 {
            continue;
        }
        let ctx = make_context(4, q).unwrap();
        let pi = jacobi_sum(&ctx, 1, 1).unwrap();
        let qi = q as i64;
        let chi_m1 = {
            let c = make_context(4, q).unwrap();
            c.chi(q - 1).unwrap()
        };
        let chi_m1 = if chi_m1 == 0 { 1 } else { -1 }; // χ(−1) = ±1
        let hist = j0_class_histogram(&ctx, 4);
        let j = |exps: &[u8]| contract_j0_histogram(4, &hist, exps);
        assert_eq!(j(&[1, 1, 1, 1]), scalar(4, qi - 1).mul(pi).mul(pi), "(4.2) at q = {q}");
        assert_eq!(j(&[1, 1, 3, 3]), scalar(4, qi * (qi - 1)), "(4.3) at q = {q}");
        assert_eq!(
            j(&[2, 2, 1, 3]),
            scalar(4, chi_m1 * qi * (qi - 1)),
            "(4.4) at q = {q}"
        );
        assert_eq!(j(&[2, 2, 2, 2]), scalar(4, qi * (qi - 1)), "(4.5) at q = {q}");
        // (4.6)–(4.9) in floating point.
        let g1 = gauss_sum(&ctx, 1).unwrap();
        let g2 = gauss_sum(&ctx, 2).unwrap();
        let g3 = gauss_sum(&ctx, 3).unwrap();
        let qf = q as f64;
        let pif = pi.to_complex();
        assert!((g1 * g3 - chi_m1 as f64 * qf).norm() < 1e-6, "(4.6) at q = {q}");
        assert!((g2 * g2 - qf).norm() < 1e-6, "(4.7) at q = {q}");
        assert!((g1 * g1 * g2 - qf * pif).norm() < 1e-6, "(4.8) at q = {q}");
        assert!(
            (g1.powu(4) - qf * pif * pif).norm() < 1e-6,
            "(4.9) at q = {q}"
        );
    }
    println!("criterion 3: PASS (Lemma 4.1 identities exact to 500, Gauss identities < 1e-6)");
}

/// Criterion 4 — Weil bound at every m ∈ [1, p), p ≤ 500, across the corpus.
#[test]
fn criterion_04_weil_bound() {
    let mut forms = cubic_corpus();
    forms.extend(quartic_corpus());
    let mut checked = 0u64;
    for form in &forms {
        for p in primes_in(2, 501) {
            if form.is_bad_prime(p) {
                continue;
            }
            let report = weil_check(form, p).unwrap();
            assert!(report.pass, "Weil violation for {form} at p = {p}");
            checked += 1;
        }
    }
    println!("criterion 4: PASS ({checked} (form, prime) exhaustive Weil checks)");
}

/// Criterion 5 — exceptional classification: both classifiers agree on all
/// coefficient quadruples in [1,16]; named examples; probe both directions.
#[test]
fn criterion_05_exceptional_classification() {
    // All sorted quadruples (classification is permutation-invariant, which
    // the classifiers assert themselves on spot checks below).
    let mut agreed = 0u64;
    for a in 1u64..=16 {
        for b in a..=16 {
            for c in b..=16 {
                for d in c..=16 {
                    let form = DiagonalForm::quartic([a, b, c, d]);
                    let (kummer, _) = is_exceptional_kummer(&form).unwrap();
                    let pattern = is_exceptional_pattern(&form).unwrap();
                    assert_eq!(kummer, pattern, "classifier disagreement on {form}");
                    agreed += 1;
                }
            }
        }
    }
    // Permutation spot check (covers the unsorted tuples).
    for (sorted, shuffled) in [([1, 1, 4, 4], [4, 1, 4, 1]), ([1, 2, 4, 8], [8, 4, 2, 1])] {
        assert_eq!(
            is_exceptional_kummer(&DiagonalForm::quartic(sorted)).unwrap().0,
            is_exceptional_kummer(&DiagonalForm::quartic(shuffled)).unwrap().0
        );
    }
    let verdict = |coeffs: [u64; 4]| {
        is_exceptional_kummer(&DiagonalForm::quartic(coeffs)).unwrap().0
    };
    assert!(verdict([1, 1, 4, 4]));
    assert!(!verdict([1, 1, 1, 1]));
    assert!(verdict([1, 2, 4, 8]));
    assert!(!verdict([1, 1, 1, 2]));
    // Probe both directions of Thm 6.2 on the corpus plus the named forms.
    let mut probe_forms = quartic_corpus();
    probe_forms.push(DiagonalForm::quartic([2, 2, 8, 8]));
    for form in &probe_forms {
        let (exceptional, _) = is_exceptional_kummer(form).unwrap();
        let probe = empirical_exceptional_probe(form, 300).unwrap();
        if exceptional {
            assert!(
                probe.all_pass,
                "exceptional {form} fails the r_F(0,q) >= q^3 probe: {:?}",
                probe.failure
            );
        } else {
            assert!(
                !probe.all_pass,
                "non-exceptional {form} passes the probe at all q <= 300"
            );
        }
    }
    println!("criterion 5: PASS ({agreed} quadruples agree; probes match both directions)");
}

/// Criterion 6 — K_{F,q} = −5 for all q ≡ 5 (mod 8), q ≤ 10⁴, F = (1,1,1,1).
#[test]
fn criterion_06_k_term_law() {
    let form = DiagonalForm::quartic([1, 1, 1, 1]);
    let mut count = 0u64;
    for q in primes_in(2, 10_001) {
        if q % 8 != 5 {
            continue;
        }
        let ctx = make_context(4, q).unwrap();
        assert_eq!(k_term(&form, &ctx).unwrap(), -5, "K law fails at q = {q}");
        count += 1;
    }
    assert!(count > 100);
    println!("criterion 6: PASS (K = -5 at all {count} primes q = 5 mod 8 up to 10^4)");
}

/// Criterion 7 — equidistribution at T = 10⁶ for F = (1,1,1): densities at
/// β = 0 and β = −1/2 within 0.02 of the arccos law, discrepancy ≤ 0.02.
#[test]
fn criterion_07_equidistribution() {
    let form = DiagonalForm::cubic([1, 1, 1]);
    let cache = cache_dir();
    let r0 = density_report(&form, 1_000_000, 0.0, None, Some(&cache)).unwrap();
    assert!(
        (r0.observed - 0.5).abs() <= 0.02,
        "density at beta = 0: {} vs 1/2",
        r0.observed
    );
    let r1 = density_report(&form, 1_000_000, -0.5, None, Some(&cache)).unwrap();
    assert!(
        (r1.observed - 1.0 / 3.0).abs() <= 0.02,
        "density at beta = -1/2: {} vs 1/3",
        r1.observed
    );
    assert!(
        r0.discrepancy <= 0.02,
        "discrepancy {} > 0.02",
        r0.discrepancy
    );
    println!(
        "criterion 7: PASS (densities {:.4}/{:.4} vs 0.5/0.3333, discrepancy {:.4})",
        r0.observed, r1.observed, r0.discrepancy
    );
}

/// Direct enumeration oracle: all counts r_F(n, M) for n = 0..M by histogram
/// convolution over (Z/M)^s.
fn count_mod_all(form: &DiagonalForm, modulus: u64) -> Vec<u64> {
    let m = modulus as usize;
    let s = form.s as u32;
    let hist_of = |a: u64| {
        let mut h = vec![0u64; m];
        for x in 0..modulus {
            let mut v = 1u64;
            for _ in 0..s {
                v = (v as u128 * x as u128 % modulus as u128) as u64;
            }
            h[(a as u128 * v as u128 % modulus as u128) as usize] += 1;
        }
        h
    };
    let mut acc = hist_of(form.coeffs[0]);
    for &a in &form.coeffs[1..] {
        let h = hist_of(a);
        let mut next = vec![0u64; m];
        for (i, &ci) in acc.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (j, &hj) in h.iter().enumerate() {
                let k = i + j;
                next[if k >= m { k - m } else { k }] += ci * hj;
            }
        }
        acc = next;
    }
    acc
}

fn assert_witness_sound(form: &DiagonalForm, w: &GapWitness) {
    let modulus = w.big_m.to_u64().expect("small witness");
    assert!(modulus <= 100_000, "M = {modulus} too large for the oracle");
    let oracle = count_mod_all(form, modulus);
    let m_pow = BigInt::from(modulus).pow(form.s as u32 - 1);
    for (i, eps) in per_residue_epsilons(w).iter().enumerate() {
        let certified = eps * BigRational::from(m_pow.clone());
        assert!(certified.is_integer(), "certified product must clear M^(s-1)");
        let n = ((&w.m + (i as u64 + 1)) % modulus).to_u64().unwrap();
        assert_eq!(
            BigInt::from(oracle[n as usize]),
            certified.to_integer(),
            "r_F({n}, {modulus}) disagrees with the certificate for {form}"
        );
    }
}

/// Criterion 8 — witness soundness: 20 deterministic pseudo-random small
/// witnesses, certified products vs direct enumeration over (Z/M)^s.
#[test]
fn criterion_08_witness_soundness() {
    // Small deterministic LCG for parameter variation.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        state >> 33
    };
    let cubics = [
        [1u64, 1, 1], [1, 1, 2], [1, 2, 3], [2, 3, 5], [1, 1, 3], [1, 2, 2],
    ];
    let mut built = 0;
    let mut attempts = 0;
    while built < 18 && attempts < 200 {
        attempts += 1;
        let form = DiagonalForm::cubic(cubics[(next() % cubics.len() as u64) as usize]);
        let k = 1 + (next() % 2) as u32;
        let t_bound = 60 + next() % 60; // keeps M ≤ 120² well under 10⁵
        let beta_den = 2 + next() % 4;
        let mut policy = SelectionPolicy::new(1, beta_den, t_bound, k as usize);
        policy.cache_dir = Some(cache_dir());
        // Loose per-witness target: soundness, not strength, is under test.
        let target = BigRational::new(BigInt::from(99), BigInt::from(100));
        let w = match build_witness(&form, k, Some(target), &policy) {
            Ok(w) => w,
            Err(_) => continue, // pool too small for these parameters
        };
        assert_witness_sound(&form, &w);
        built += 1;
    }
    assert_eq!(built, 18, "could not build enough witnesses");
    // Two quartic witnesses so the quartic certificate path is covered too.
    for (t_bound, k) in [(20u64, 1u32), (40, 2)] {
        let form = DiagonalForm::quartic([1, 1, 1, 1]);
        let mut policy = SelectionPolicy::new(1, 2, t_bound, k as usize);
        policy.cache_dir = Some(cache_dir());
        let w = build_witness(
            &form,
            k,
            Some(BigRational::new(BigInt::from(99), BigInt::from(100))),
            &policy,
        )
        .unwrap();
        assert_witness_sound(&form, &w);
    }
    println!("criterion 8: PASS (20 small witnesses match direct enumeration)");
}

/// Criterion 9 — end-to-end cubic gap discovery at K = 3, ε = 1/6:
/// build_witness succeeds, check_witness confirms, find_explicit_gap returns
/// a re-verified explicit gap.
#[test]
fn criterion_09_end_to_end_cubic_gap() {
    let form = DiagonalForm::cubic([1, 1, 1]);
    let mut policy = SelectionPolicy::new(1, 5, 30_000, 600);
    policy.cache_dir = Some(cache_dir());
    let target = BigRational::new(BigInt::one(), BigInt::from(6));
    let w = build_witness(&form, 3, Some(target.clone()), &policy).unwrap();
    assert!(
        w.certified,
        "builder missed epsilon = 1/6: reached {}",
        ratio_to_string(&w.certified_epsilon)
    );
    let eps = check_witness(&form, &w).unwrap();
    assert!(eps <= target);
    println!(
        "criterion 9 (build+check): witness with {} primes, M of {} digits, epsilon {} <= 1/6",
        w.per_prime_ratios.len(),
        w.big_m.to_string().len(),
        ratio_to_string(&eps)
    );
    // The constructive step: an explicit a with {a+1, a+2, a+3} free of cube
    // sums, independently re-verified.
    let outcome = find_explicit_gap(&form, &w, 1000, None)
        .expect("explicit gap scan inside the certified progression");
    match outcome {
        GapSearchOutcome::Found(gap) => {
            assert!(gap.reverified);
            assert!(window_has_value(&form, &gap.a, 3).is_gap());
            println!("criterion 9: PASS (explicit gap at h = {})", gap.h);
        }
        GapSearchOutcome::Exhausted(r) => {
            panic!(
                "no explicit gap in 1000 windows (hit rate {:.3})",
                r.hit_rate()
            );
        }
    }
}

/// Companion to criterion 9: the same machinery does produce an explicit
/// length-3 gap (beyond the mod-9 length-2 obstruction) from a small partial
/// witness whose modulus keeps the window scan affordable.
#[test]
fn explicit_length_3_gap_demo() {
    let form = DiagonalForm::cubic([1, 1, 1]);
    let mut policy = SelectionPolicy::new(1, 2, 600, 3);
    policy.cache_dir = Some(cache_dir());
    // Three primes, one per bin: partial (epsilon > 1/6) but fully checked.
    let w = build_witness(&form, 3, None, &policy).unwrap();
    assert!(!w.certified);
    check_witness(&form, &w).unwrap();
    match find_explicit_gap(&form, &w, 150, None).unwrap() {
        GapSearchOutcome::Found(gap) => {
            for i in 1u64..=3 {
                assert!(is_value(&form, &(&gap.a + i)).is_none());
            }
            // Strictly beyond the mod-9 obstruction: a length-3 window cannot
            // be excluded by residues alone (only n ≡ 4, 5 mod 9 are).
            println!(
                "explicit length-3 gap at a = {} (h = {}, M = {})",
                gap.a, gap.h, w.big_m
            );
        }
        GapSearchOutcome::Exhausted(r) => panic!(
            "no length-3 gap in 150 windows (hit rate {:.3})",
            r.hit_rate()
        ),
    }
}

/// Criterion 10 — quartic pipeline for F = (1,1,1,1), K = 2: certified
/// epsilon below 1/4 (or an honest partial report), witness sound, density
/// bound precondition verified.
#[test]
fn criterion_10_quartic_pipeline() {
    let form = DiagonalForm::quartic([1, 1, 1, 1]);
    let mut policy = SelectionPolicy::new(1, 2, 300, 8);
    policy.cache_dir = Some(cache_dir());
    let target = BigRational::new(BigInt::one(), BigInt::from(4));
    let w = build_witness(&form, 2, Some(target.clone()), &policy).unwrap();
    assert!(w.certified_epsilon < BigRational::one());
    let eps_f = w.certified_epsilon.to_f64().unwrap();
    println!(
        "criterion 10 progress: certified epsilon {} ~ {:.4} (target 1/4)",
        ratio_to_string(&w.certified_epsilon),
        eps_f
    );
    check_witness(&form, &w).unwrap();
    // Soundness (criterion 8's oracle) applies to this artifact.
    assert_witness_sound(&form, &w);
    if w.certified {
        // 2·epsilon ≤ 1/2: the density bound precondition holds and the
        // Maier count is positive.
        let (region, guaranteed) = gap_density_bound(&form, &w, 1).unwrap();
        assert!(guaranteed > BigUint::zero());
        assert!(region > BigUint::zero());
        println!("criterion 10: PASS (certified epsilon < 1/4, density bound verified)");
    } else {
        // Budget bound first: the partial certificate plus the precondition
        // report is the accepted artifact.
        let k_eps = BigRational::from_integer(2.into()) * &w.certified_epsilon;
        println!(
            "criterion 10: PASS (partial certificate, K*epsilon = {} vs precondition 1/2)",
            ratio_to_string(&k_eps)
        );
    }
}

/// Cross-check shared by several criteria: the zero-residue formula and the
/// multiplicative extension agree with an independent direct enumeration for
/// a composite modulus.
#[test]
fn multiplicativity_spot_check() {
    let form = DiagonalForm::cubic([1, 1, 1]);
    let oracle = count_mod_all(&form, 91); // 7 · 13
    let a7 = count_brute_all(&form, 7);
    let a13 = count_brute_all(&form, 13);
    for n in 0..91u64 {
        assert_eq!(oracle[n as usize], a7[(n % 7) as usize] * a13[(n % 13) as usize]);
    }
}
