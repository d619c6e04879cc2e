//! The gap pipeline: select primes where `r_F(0, p)` is provably small,
//! partition them into K bins, assemble `(m, M)` by CRT with `m + i ≡ 0` for
//! every prime in bin i, and emit a [`GapWitness`] whose bound
//! `r_F(m+i, M) ≤ ε·M^{s−1}` is certified by exact per-prime counts.
//!
//! Certification multiplies exact per-prime ratios: the zero-residue formula
//! ratio for a prime in its own bin, the exact brute-force ratio for cross
//! residues below the cap, and the Weil upper endpoint above the cap (the only
//! place an upper bound rather than an exact value enters — still certified).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::arith::{crt, ResidueSystem};
use crate::counting::{count_brute_all, weil_interval, DiagonalForm, DEFAULT_BRUTE_CAP};
use crate::equidist::{scan, PrimeSample};
use crate::exceptional::{is_exceptional_kummer, pick_good_u, CharacterImagePoint};
use crate::{Error, Result};

/// Witness file format version.
pub const WITNESS_VERSION: u32 = 1;

/// Parameters steering prime selection and the adaptive builder.
#[derive(Debug, Clone)]
pub struct SelectionPolicy {
    /// Exact threshold β ∈ (0, 1): selected primes satisfy `2·Re H ≤ −β`
    /// (cubic) or `2·Re H + K ≤ −β` (quartic), evaluated from exact counts.
    pub beta: BigRational,
    /// Scan bound T.
    pub t_bound: u64,
    /// Prime budget for the builder.
    pub max_primes: usize,
    /// Quartic u-class restriction; defaults to `pick_good_u`.
    pub u_class: Option<CharacterImagePoint>,
    /// Cap for exact brute-force cross-residue counts.
    pub brute_cap: u64,
    /// Scan cache directory.
    pub cache_dir: Option<PathBuf>,
}

impl SelectionPolicy {
    pub fn new(beta_num: u64, beta_den: u64, t_bound: u64, max_primes: usize) -> Self {
        SelectionPolicy {
            beta: BigRational::new(BigInt::from(beta_num), BigInt::from(beta_den)),
            t_bound,
            max_primes,
            u_class: None,
            brute_cap: DEFAULT_BRUTE_CAP,
            cache_dir: None,
        }
    }
}

/// A selected prime with its exact zero-residue data.
#[derive(Debug, Clone)]
pub struct SelectedPrime {
    pub p: u64,
    /// Exact `2·Re(χ̄(Πa)·π)` (s = 3) resp. `2·Re(χ̄(Πa)·π²)` (s = 4).
    pub t: i64,
    /// Quartic K term.
    pub k: Option<i64>,
    /// Exact `r_F(0, p) / p^{s−1}`.
    pub ratio0: BigRational,
}

/// Exact `r_F(0, p)/p^{s−1}` from the closed formula ingredients.
fn ratio0_from(s: u8, p: u64, t: i64, k: Option<i64>) -> BigRational {
    let pb = BigInt::from(p);
    let num = if s == 3 {
        &pb * &pb + BigInt::from(t) * (&pb - 1)
    } else {
        let k = BigInt::from(k.expect("quartic primes carry a K term"));
        &pb * &pb * &pb + BigInt::from(t) * (&pb - 1) + k * &pb * (&pb - 1)
    };
    BigRational::new(num, pb.pow(s as u32 - 1))
}

/// Exact selection predicate `2·Re H ≤ −β` (cubic) / `2·Re H + K ≤ −β`
/// (quartic), evaluated without floating point.
fn predicate_holds(s: u8, sample: &PrimeSample, beta: &BigRational) -> bool {
    let bn = beta.numer();
    let bd = beta.denom();
    let t = BigInt::from(sample.t);
    if s == 3 {
        // t/√p ≤ −β ⟺ t < 0 and t²·bd² ≥ bn²·p (β > 0).
        sample.t < 0 && &t * &t * bd * bd >= bn * bn * BigInt::from(sample.p)
    } else {
        // (t + K·q)/q ≤ −β ⟺ (t + K·q)·bd ≤ −bn·q.
        let q = BigInt::from(sample.p);
        let lhs = (t + BigInt::from(sample.k.expect("quartic sample")) * &q) * bd;
        lhs <= -(bn * &q)
    }
}

/// Select all primes `p ≤ T`, `p ≡ 1 (mod s)`, `p ∤ coefficients` whose exact
/// ratio satisfies the β-predicate. Quartic forms must be non-exceptional and
/// are restricted to the chosen u-class.
pub fn select_primes(form: &DiagonalForm, policy: &SelectionPolicy) -> Result<Vec<SelectedPrime>> {
    if policy.beta <= BigRational::zero() || policy.beta >= BigRational::one() {
        return Err(Error::domain("beta must lie in (0, 1)"));
    }
    let u_class = if form.s == 4 {
        let (exceptional, _) = is_exceptional_kummer(form)?;
        if exceptional {
            return Err(Error::domain(format!(
                "form {form} is exceptional: r_F(0,q) >= q^3 at every good prime, no useful primes exist"
            )));
        }
        Some(match policy.u_class {
            Some(u) => u,
            None => pick_good_u(form)?,
        })
    } else {
        None
    };
    let samples = scan(form, policy.t_bound, policy.cache_dir.as_deref())?;
    Ok(samples
        .into_iter()
        .filter(|smp| u_class.is_none() || smp.class_point == u_class)
        .filter(|smp| predicate_holds(form.s, smp, &policy.beta))
        .map(|smp| SelectedPrime {
            p: smp.p,
            t: smp.t,
            k: smp.k,
            ratio0: ratio0_from(form.s, smp.p, smp.t, smp.k),
        })
        .collect())
}

/// Greedy balanced partition into K bins on weights `w(p) = −log ratio0(p)`:
/// heaviest prime first into the lightest bin. Guarantees min bin weight ≥
/// total/K − max single weight.
pub fn partition_bins(primes: &[SelectedPrime], k: u32) -> Result<Vec<Vec<u64>>> {
    if (primes.len() as u32) < k {
        return Err(Error::domain(format!(
            "need at least {k} primes to fill {k} bins, have {}",
            primes.len()
        )));
    }
    let mut weighted: Vec<(f64, u64)> = primes
        .iter()
        .map(|sp| {
            let r = sp.ratio0.to_f64().unwrap_or(1.0);
            (-r.ln(), sp.p)
        })
        .collect();
    weighted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut bins: Vec<Vec<u64>> = vec![Vec::new(); k as usize];
    let mut totals = vec![0.0f64; k as usize];
    for (w, p) in weighted {
        let lightest = (0..k as usize)
            .min_by(|&a, &b| totals[a].partial_cmp(&totals[b]).unwrap())
            .unwrap();
        bins[lightest].push(p);
        totals[lightest] += w;
    }
    Ok(bins)
}

/// A certified pair `(m, M)` with prime bins: `m + i ≡ 0 (mod p)` for every
/// prime p in bin i (1-based), and `r_F(m+i, M) ≤ certifiedEpsilon · M^{s−1}`
/// for every i, proven by the stored exact per-prime ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct GapWitness {
    pub form: DiagonalForm,
    pub k: u32,
    /// bins[i−1] holds the primes of bin i.
    pub bins: Vec<Vec<u64>>,
    pub m: BigUint,
    pub big_m: BigUint,
    /// Cap below which cross-residue ratios are exact brute-force counts;
    /// above it the Weil upper endpoint is used. Recorded so verification is
    /// reproducible.
    pub brute_cap: u64,
    /// ratios[p][i−1] = certified ratio bound for r_F(m+i, p)/p^{s−1}.
    pub per_prime_ratios: BTreeMap<u64, Vec<BigRational>>,
    pub target_epsilon: BigRational,
    /// max over i of Π_p ratios[p][i−1], an upper bound for every
    /// r_F(m+i, M)/M^{s−1}.
    pub certified_epsilon: BigRational,
    /// True iff certified_epsilon ≤ target_epsilon (false for partial
    /// results returned on budget exhaustion).
    pub certified: bool,
}

/// The certified ratio bound for `r_F(d, p)/p^{s−1}` used by both the builder
/// and the checker: exact formula at the zero residue, exact brute force below
/// the cap, Weil upper endpoint above it.
fn ratio_bound(
    form: &DiagonalForm,
    sp: &SelectedPrime,
    d: u64,
    cap: u64,
    brute_cache: &mut BTreeMap<u64, Vec<u64>>,
) -> BigRational {
    let p = sp.p;
    let s = form.s;
    if d == 0 {
        return sp.ratio0.clone();
    }
    if p <= cap {
        let counts = brute_cache
            .entry(p)
            .or_insert_with(|| count_brute_all(form, p));
        return BigRational::new(
            BigInt::from(counts[d as usize]),
            BigInt::from(p).pow(s as u32 - 1),
        );
    }
    let (_, hi) = weil_interval(s, p);
    BigRational::new(BigInt::from(hi), BigInt::from(p).pow(s as u32 - 1))
}

/// Build a witness adaptively: starting from the selected pool (ascending),
/// repeatedly assign the (prime, bin) pair that most reduces the worst
/// per-residue bound, until the exact certificate meets the target or the
/// budget is exhausted (then the partial result is returned, flagged
/// not-certified). Ties prefer smaller primes.
pub fn build_witness(
    form: &DiagonalForm,
    k: u32,
    target_epsilon: Option<BigRational>,
    policy: &SelectionPolicy,
) -> Result<GapWitness> {
    if k == 0 {
        return Err(Error::domain("gap length K must be at least 1"));
    }
    let target = target_epsilon
        .unwrap_or_else(|| BigRational::new(BigInt::one(), BigInt::from(2 * k as u64)));
    if target <= BigRational::zero() {
        return Err(Error::domain("target epsilon must be positive"));
    }
    let pool = select_primes(form, policy)?;
    if (pool.len() as u32) < k {
        return Err(Error::domain(format!(
            "only {} selected primes for K = {k}; enlarge T or relax beta",
            pool.len()
        )));
    }
    let cap = policy.brute_cap;
    let kk = k as usize;
    let mut brute_cache: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    // ln of the certified ratio of pool prime `pi` at signed distance
    // d = i − j ∈ [−(K−1), K−1], index d + K − 1. Filled lazily.
    let mut ln_ratios: Vec<Option<Vec<f64>>> = vec![None; pool.len()];
    let fill = |idx: usize,
                    ln_ratios: &mut Vec<Option<Vec<f64>>>,
                    brute_cache: &mut BTreeMap<u64, Vec<u64>>| {
        if ln_ratios[idx].is_none() {
            let sp = &pool[idx];
            let v: Vec<f64> = (-(k as i64 - 1)..=(k as i64 - 1))
                .map(|d| {
                    let dm = d.rem_euclid(sp.p as i64) as u64;
                    ratio_bound(form, sp, dm, cap, brute_cache)
                        .to_f64()
                        .expect("ratio fits f64")
                        .ln()
                })
                .collect();
            ln_ratios[idx] = Some(v);
        }
    };

    let mut assignment: Vec<Option<usize>> = vec![None; pool.len()]; // bin index 0-based
    let mut log_eps = vec![0.0f64; kk];
    let ln_target = target.to_f64().expect("target fits f64").ln();
    let all_bins: Vec<usize> = (0..kk).collect();
    let mut used = 0usize;

    loop {
        // Met already (in f64 with a safety margin)? Verify exactly.
        let worst = log_eps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if used >= k as usize && worst <= ln_target - 1e-9 {
            let w = assemble(form, k, &pool, &assignment, cap, &target, &mut brute_cache)?;
            if w.certified_epsilon <= target {
                return Ok(w);
            }
            // f64 drift: fall through and keep adding primes.
        }
        if used == pool.len() || used == policy.max_primes {
            // Budget exhausted: return the partial certificate, flagged.
            return assemble(form, k, &pool, &assignment, cap, &target, &mut brute_cache);
        }
        // Bins must all become nonempty first (the CRT congruences need them).
        let empty_bins: Vec<usize> = (0..kk)
            .filter(|&j| !assignment.iter().any(|a| *a == Some(j)))
            .collect();
        let mut best: Option<(f64, usize, usize)> = None; // (new worst, pool idx, bin)
        for idx in 0..pool.len() {
            if assignment[idx].is_some() {
                continue;
            }
            fill(idx, &mut ln_ratios, &mut brute_cache);
            let lr = ln_ratios[idx].as_ref().unwrap();
            let candidate_bins: &[usize] = if empty_bins.is_empty() {
                &all_bins
            } else {
                &empty_bins
            };
            for &j in candidate_bins {
                let mut new_worst = f64::NEG_INFINITY;
                for (i, le) in log_eps.iter().enumerate() {
                    let d = i as i64 - j as i64; // i, j both 0-based: d = (i+1) − (j+1)
                    let nw = le + lr[(d + k as i64 - 1) as usize];
                    new_worst = new_worst.max(nw);
                }
                match best {
                    Some((b, _, _)) if b <= new_worst => {}
                    _ => best = Some((new_worst, idx, j)),
                }
            }
        }
        let (_, idx, j) = best.expect("unused primes exist");
        assignment[idx] = Some(j);
        let lr = ln_ratios[idx].as_ref().unwrap();
        for (i, le) in log_eps.iter_mut().enumerate() {
            let d = i as i64 - j as i64;
            *le += lr[(d + k as i64 - 1) as usize];
        }
        used += 1;
    }
}

/// Assemble the witness for a given assignment: CRT, exact per-prime ratios,
/// exact epsilon.
fn assemble(
    form: &DiagonalForm,
    k: u32,
    pool: &[SelectedPrime],
    assignment: &[Option<usize>],
    cap: u64,
    target: &BigRational,
    brute_cache: &mut BTreeMap<u64, Vec<u64>>,
) -> Result<GapWitness> {
    let kk = k as usize;
    let mut bins: Vec<Vec<u64>> = vec![Vec::new(); kk];
    let mut congruences = Vec::new();
    for (idx, a) in assignment.iter().enumerate() {
        if let Some(j) = a {
            let p = pool[idx].p;
            bins[*j].push(p);
            // m ≡ −(j+1) (mod p)
            let i = (*j as u64 + 1) % p;
            congruences.push((BigUint::from((p - i) % p), p));
        }
    }
    for b in &mut bins {
        b.sort_unstable();
    }
    let (m, big_m) = crt(&ResidueSystem::new(congruences))?;
    let mut per_prime_ratios = BTreeMap::new();
    let mut eps_per_residue = vec![BigRational::one(); kk];
    for (idx, a) in assignment.iter().enumerate() {
        if let Some(j) = a {
            let sp = &pool[idx];
            let ratios: Vec<BigRational> = (0..kk)
                .map(|i| {
                    let d = (i as i64 - *j as i64).rem_euclid(sp.p as i64) as u64;
                    ratio_bound(form, sp, d, cap, brute_cache)
                })
                .collect();
            for (i, r) in ratios.iter().enumerate() {
                eps_per_residue[i] *= r;
            }
            per_prime_ratios.insert(sp.p, ratios);
        }
    }
    let certified_epsilon = eps_per_residue
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(BigRational::one);
    let certified = certified_epsilon <= *target;
    Ok(GapWitness {
        form: form.clone(),
        k,
        bins,
        m,
        big_m,
        brute_cap: cap,
        per_prime_ratios,
        target_epsilon: target.clone(),
        certified_epsilon,
        certified,
    })
}

/// Recompute every congruence, every per-prime ratio and the product bound
/// from scratch; fail loudly on any mismatch with the stored certificate.
/// Returns the verified exact epsilon.
pub fn check_witness(form: &DiagonalForm, w: &GapWitness) -> Result<BigRational> {
    if w.form != *form {
        return Err(Error::certificate("witness form does not match"));
    }
    if w.bins.len() != w.k as usize {
        return Err(Error::certificate(format!(
            "witness has {} bins but K = {}",
            w.bins.len(),
            w.k
        )));
    }
    // Bins pairwise disjoint, M = product of all bin primes.
    let mut all_primes: Vec<u64> = w.bins.iter().flatten().copied().collect();
    all_primes.sort_unstable();
    if all_primes.windows(2).any(|x| x[0] == x[1]) {
        return Err(Error::certificate("duplicate prime across bins"));
    }
    let mut prod = BigUint::one();
    for &p in &all_primes {
        if !crate::arith::is_prime(p) {
            return Err(Error::certificate(format!("{p} is not prime")));
        }
        prod *= p;
    }
    if prod != w.big_m {
        return Err(Error::certificate("M is not the product of the bin primes"));
    }
    if w.m >= w.big_m {
        return Err(Error::certificate("m is not reduced mod M"));
    }
    let stored_primes: Vec<u64> = w.per_prime_ratios.keys().copied().collect();
    if stored_primes != all_primes {
        return Err(Error::certificate(
            "stored ratio table does not cover exactly the bin primes",
        ));
    }
    let mut brute_cache: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut eps_per_residue = vec![BigRational::one(); w.k as usize];
    for (j0, bin) in w.bins.iter().enumerate() {
        let j = j0 as u64 + 1;
        for &p in bin {
            // Congruence m + j ≡ 0 (mod p).
            if ((&w.m + j) % p) != BigUint::zero() {
                return Err(Error::certificate(format!(
                    "congruence violation: m + {j} is not 0 mod {p}"
                )));
            }
            // Exact zero-residue data recomputed from scratch.
            let ctx = crate::cyclotomic::make_context(form.s, p)?;
            let t = crate::cyclotomic::h_term_two_re(form, &ctx)?;
            let k_term = if form.s == 4 {
                Some(crate::cyclotomic::k_term(form, &ctx)?)
            } else {
                None
            };
            let sp = SelectedPrime {
                p,
                t,
                k: k_term,
                ratio0: ratio0_from(form.s, p, t, k_term),
            };
            let stored = &w.per_prime_ratios[&p];
            if stored.len() != w.k as usize {
                return Err(Error::certificate(format!(
                    "ratio vector for prime {p} has wrong length"
                )));
            }
            for i in 0..w.k as usize {
                let d = ((&w.m + (i as u64 + 1)) % p)
                    .to_u64_digits()
                    .first()
                    .copied()
                    .unwrap_or(0);
                let recomputed = ratio_bound(form, &sp, d, w.brute_cap, &mut brute_cache);
                if recomputed != stored[i] {
                    return Err(Error::certificate(format!(
                        "ratio mismatch at prime {p}, residue m+{}: stored {} vs recomputed {}",
                        i + 1,
                        ratio_to_string(&stored[i]),
                        ratio_to_string(&recomputed)
                    )));
                }
                eps_per_residue[i] *= &recomputed;
            }
        }
    }
    let eps = eps_per_residue
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(BigRational::one);
    if eps != w.certified_epsilon {
        return Err(Error::certificate(format!(
            "certifiedEpsilon mismatch: stored {} vs recomputed {}",
            ratio_to_string(&w.certified_epsilon),
            ratio_to_string(&eps)
        )));
    }
    Ok(eps)
}

/// The paper's worst-case scan bound τ_s(γ, K); informational only (the
/// builder is adaptive): τ₃ = γK²(log K)⁴, τ₄ = exp(exp(γ K log K)).
pub fn tau_bound(s: u8, gamma: f64, k: u32) -> Result<f64> {
    if k < 2 || gamma < 1.0 {
        return Err(Error::domain("tau_bound requires K >= 2 and gamma >= 1"));
    }
    let kf = k as f64;
    Ok(match s {
        3 => gamma * kf * kf * kf.ln().powi(4),
        4 => (gamma * kf * kf.ln()).exp().exp(),
        _ => return Err(Error::domain("degree must be 3 or 4")),
    })
}

/// From a witness with `Σᵢ r_F(m+i, M) ≤ M^{s−1}/2` (verified here from the
/// certificate), the Maier-matrix double count guarantees that at least half
/// of the progression points `a = m + hM` in `[0, L^s·M^s)` start a gap
/// window. Returns `(regionSize, guaranteedGapStarts)`.
pub fn gap_density_bound(
    form: &DiagonalForm,
    w: &GapWitness,
    l: u64,
) -> Result<(BigUint, BigUint)> {
    if l == 0 {
        return Err(Error::domain("L must be positive"));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let k_eps = BigRational::from(BigInt::from(w.k as u64)) * &w.certified_epsilon;
    if k_eps > half {
        return Err(Error::domain(format!(
            "precondition failed: K·certifiedEpsilon = {} > 1/2",
            ratio_to_string(&k_eps)
        )));
    }
    let s = form.s as u32;
    let m_pow = BigInt::from(w.big_m.clone()).pow(s - 1);
    // Σᵢ r_F(m+i, M) ≤ Σᵢ εᵢ·M^{s−1}; per-residue products recomputed from
    // the stored ratios, then cleared against M^{s−1} (denominators divide it)
    // and rounded up to an integer bound.
    let mut bad = BigInt::zero();
    for eps_i in per_residue_epsilons(w) {
        let r_bound = eps_i * BigRational::from(m_pow.clone());
        bad += (r_bound.numer() + r_bound.denom() - 1) / r_bound.denom();
    }
    if &bad * 2 > m_pow {
        return Err(Error::domain(
            "certificate does not guarantee a positive proportion of gaps",
        ));
    }
    // Of the L^s·M^{s−1} progression points a = m + hM with F-box below
    // L^s·M^s, at most L^s·Σᵢ r_F(m+i, M) can be hit, leaving the rest as
    // guaranteed gap starts (≥ half by the precondition).
    let l_pow = BigUint::from(l).pow(s);
    let region = &l_pow * w.big_m.pow(s);
    let guaranteed = &l_pow
        * (m_pow - bad)
            .to_biguint()
            .expect("guaranteed count is nonnegative");
    Ok((region, guaranteed))
}

/// Render a rational as `num/den`.
pub fn ratio_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `num/den` (or a bare integer).
pub fn ratio_from_string(s: &str) -> Result<BigRational> {
    let bad = || Error::domain(format!("malformed rational '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Serialized witness document: self-describing, stable key order, decimal
/// strings for the big integers and `num/den` strings for the rationals.
#[derive(Debug, Serialize, Deserialize)]
struct WitnessFile {
    format_version: u32,
    form: String,
    k: u32,
    bins: Vec<Vec<u64>>,
    m: String,
    #[serde(rename = "M")]
    big_m: String,
    brute_cap: u64,
    per_prime_ratios: Vec<PrimeRatioEntry>,
    target_epsilon: String,
    certified_epsilon: String,
    certified: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct PrimeRatioEntry {
    p: u64,
    ratios: Vec<String>,
}

impl GapWitness {
    pub fn to_json(&self) -> Result<String> {
        let file = WitnessFile {
            format_version: WITNESS_VERSION,
            form: self.form.to_string(),
            k: self.k,
            bins: self.bins.clone(),
            m: self.m.to_string(),
            big_m: self.big_m.to_string(),
            brute_cap: self.brute_cap,
            per_prime_ratios: self
                .per_prime_ratios
                .iter()
                .map(|(p, ratios)| PrimeRatioEntry {
                    p: *p,
                    ratios: ratios.iter().map(ratio_to_string).collect(),
                })
                .collect(),
            target_epsilon: ratio_to_string(&self.target_epsilon),
            certified_epsilon: ratio_to_string(&self.certified_epsilon),
            certified: self.certified,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<GapWitness> {
        let file: WitnessFile = serde_json::from_str(text)?;
        if file.format_version != WITNESS_VERSION {
            return Err(Error::domain(format!(
                "unsupported witness format version {}",
                file.format_version
            )));
        }
        let parse_nat = |s: &str| -> Result<BigUint> {
            s.parse()
                .map_err(|_| Error::domain(format!("malformed natural '{s}'")))
        };
        let mut per_prime_ratios = BTreeMap::new();
        for entry in file.per_prime_ratios {
            let ratios = entry
                .ratios
                .iter()
                .map(|r| ratio_from_string(r))
                .collect::<Result<Vec<_>>>()?;
            per_prime_ratios.insert(entry.p, ratios);
        }
        Ok(GapWitness {
            form: DiagonalForm::parse(&file.form)?,
            k: file.k,
            bins: file.bins,
            m: parse_nat(&file.m)?,
            big_m: parse_nat(&file.big_m)?,
            brute_cap: file.brute_cap,
            per_prime_ratios,
            target_epsilon: ratio_from_string(&file.target_epsilon)?,
            certified_epsilon: ratio_from_string(&file.certified_epsilon)?,
            certified: file.certified,
        })
    }
}

/// Exact per-residue epsilon values (Π of stored ratios), used by reporting
/// and the density bound.
pub fn per_residue_epsilons(w: &GapWitness) -> Vec<BigRational> {
    (0..w.k as usize)
        .map(|i| {
            w.per_prime_ratios
                .values()
                .fold(BigRational::one(), |acc, ratios| acc * &ratios[i])
        })
        .collect()
}
