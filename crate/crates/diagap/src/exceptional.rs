//! Classification of exceptional biquadratic forms: a quartic diagonal form is
//! exceptional iff it equals `a·x⁴ + b·y⁴ + 4a·z⁴ + 4b·w⁴` up to permutation
//! and fourth-power scalings, iff `r_F(0, q) ≥ q³` at every good prime.
//!
//! Two independent classifiers are provided: the Kummer-group character
//! criterion (via the group Δ_F and the image of φ̄_F) and a direct
//! coefficient-pattern search. They must agree on every form.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::counting::{count_brute, count_zero_formula, DiagonalForm};
use crate::cyclotomic::classify_tuple;
use crate::{Error, Result};

/// Trial-division factorization; coefficients are small by construction.
fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Fourth-power-free part of n.
fn fourth_power_free(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .map(|(p, e)| p.pow(e % 4))
        .product()
}

/// The subgroup Δ_F of Q₊/(Q^×)⁴ generated by a₁, ..., a₄ and 4, presented by
/// valuation vectors mod 4 over the primes dividing 2·a₁a₂a₃a₄. The prime 2 is
/// always listed (it supports the generator 4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaGroup {
    /// Supporting primes, ascending, always starting with 2.
    pub support: Vec<u64>,
    /// Exponent vectors mod 4 for the 5 generators (a₁, a₂, a₃, a₄, 4).
    pub generators: [Vec<u8>; 5],
}

/// One point of `(μ₄⁴/∼) × {±1}`: a class U1..U8 and the sign χ(−1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterImagePoint {
    /// Class index 1..=8.
    pub u: u8,
    /// χ(−1) ∈ {+1, −1}.
    pub u5: i8,
}

impl std::fmt::Display for CharacterImagePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.u5 >= 0 { "+1" } else { "-1" };
        write!(f, "(U{}, {})", self.u, sign)
    }
}

/// Valuation-vector presentation of Δ_F.
pub fn delta_group(form: &DiagonalForm) -> Result<DeltaGroup> {
    if form.s != 4 {
        return Err(Error::domain("delta_group is defined for quartic forms"));
    }
    let mut support = vec![2u64];
    for &a in &form.coeffs {
        for (p, _) in factor(a) {
            if !support.contains(&p) {
                support.push(p);
            }
        }
    }
    support.sort_unstable();
    let vec_of = |n: u64| -> Vec<u8> {
        let f = factor(n);
        support
            .iter()
            .map(|&p| {
                f.iter()
                    .find(|&&(q, _)| q == p)
                    .map(|&(_, e)| (e % 4) as u8)
                    .unwrap_or(0)
            })
            .collect()
    };
    let generators = [
        vec_of(form.coeffs[0]),
        vec_of(form.coeffs[1]),
        vec_of(form.coeffs[2]),
        vec_of(form.coeffs[3]),
        vec_of(4),
    ];
    Ok(DeltaGroup {
        support,
        generators,
    })
}

/// The allowed image points of Lemma 6.6: φ̄_F hitting any of these at some
/// character means the form is NOT exceptional (good primes exist).
pub const ALLOWED_POINTS: [CharacterImagePoint; 10] = [
    CharacterImagePoint { u: 2, u5: 1 },
    CharacterImagePoint { u: 3, u5: 1 },
    CharacterImagePoint { u: 5, u5: 1 },
    CharacterImagePoint { u: 7, u5: 1 },
    CharacterImagePoint { u: 8, u5: 1 },
    CharacterImagePoint { u: 1, u5: -1 },
    CharacterImagePoint { u: 2, u5: -1 },
    CharacterImagePoint { u: 5, u5: -1 },
    CharacterImagePoint { u: 6, u5: -1 },
    CharacterImagePoint { u: 7, u5: -1 },
];

/// The image of φ̄_F with fiber multiplicities (ambient-character counts).
/// Every character of Δ_F extends to the ambient group (Z/4)^support because
/// μ₄ is injective over Z/4, and all restriction fibers have equal size, so
/// ambient enumeration sees exactly the image with proportional multiplicity.
pub fn char_image_with_fibers(form: &DiagonalForm) -> Result<Vec<(CharacterImagePoint, u64)>> {
    let delta = delta_group(form)?;
    let n = delta.support.len();
    let total = 1u64 << (2 * n); // 4^n ambient characters
    let mut counts = std::collections::BTreeMap::new();
    for psi_code in 0..total {
        // ψ assigns an exponent in Z/4 to each supporting prime.
        let psi: Vec<u8> = (0..n).map(|j| ((psi_code >> (2 * j)) & 3) as u8).collect();
        let eval = |v: &Vec<u8>| -> u8 {
            v.iter()
                .zip(&psi)
                .map(|(&e, &w)| (e as u32) * (w as u32))
                .sum::<u32>() as u8
                % 4
        };
        let exps = [
            eval(&delta.generators[0]),
            eval(&delta.generators[1]),
            eval(&delta.generators[2]),
            eval(&delta.generators[3]),
        ];
        // χ(−1) = χ(4): −4 = (1+i)⁴ is a fourth power in F_q for q ≡ 1 (mod 4).
        let e4 = eval(&delta.generators[4]);
        debug_assert!(e4 % 2 == 0, "chi(4) is a square, exponent must be even");
        let u5: i8 = if e4 == 0 { 1 } else { -1 };
        let point = CharacterImagePoint {
            u: classify_tuple(exps).u,
            u5,
        };
        *counts.entry(point).or_insert(0u64) += 1;
    }
    Ok(counts.into_iter().collect())
}

/// The deduplicated image of φ̄_F in `(μ₄⁴/∼) × {±1}`.
pub fn char_image(form: &DiagonalForm) -> Result<Vec<CharacterImagePoint>> {
    Ok(char_image_with_fibers(form)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

/// Kummer criterion: exceptional iff the image of φ̄_F misses the allowed set.
/// When not exceptional, returns one allowed image point as certificate (a
/// valid u-class for gap construction).
pub fn is_exceptional_kummer(form: &DiagonalForm) -> Result<(bool, Option<CharacterImagePoint>)> {
    let image = char_image(form)?;
    let hit = image.iter().find(|p| ALLOWED_POINTS.contains(p));
    Ok((hit.is_none(), hit.copied()))
}

/// Select the allowed image point with the largest character fiber (largest
/// Chebotarev density of usable primes), breaking ties by U-index. Errors on
/// exceptional forms.
pub fn pick_good_u(form: &DiagonalForm) -> Result<CharacterImagePoint> {
    let fibers = char_image_with_fibers(form)?;
    fibers
        .iter()
        .filter(|(p, _)| ALLOWED_POINTS.contains(p))
        .max_by_key(|(p, n)| (*n, std::cmp::Reverse(p.u)))
        .map(|(p, _)| *p)
        .ok_or_else(|| {
            Error::domain(format!(
                "form {form} is exceptional: r_F(0,q) >= q^3 at every good prime"
            ))
        })
}

/// Direct pattern test of the defining shape: after stripping fourth-power
/// parts, the coefficients must split into two pairs {w, ff(4w)}.
pub fn is_exceptional_pattern(form: &DiagonalForm) -> Result<bool> {
    if form.s != 4 {
        return Err(Error::domain(
            "is_exceptional_pattern is defined for quartic forms",
        ));
    }
    let w: Vec<u64> = form
        .coeffs
        .iter()
        .map(|&a| fourth_power_free(a))
        .collect();
    let paired = |x: u64, y: u64| y == fourth_power_free(4 * x);
    // The three ways to split {0,1,2,3} into two unordered pairs.
    let splits = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
    Ok(splits.iter().any(|split| {
        split
            .iter()
            .all(|&(i, j)| paired(w[i], w[j]) || paired(w[j], w[i]))
    }))
}

/// Result of the empirical probe of `r_F(0, q) ≥ q³` over small primes.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub q_max: u64,
    pub primes_checked: usize,
    pub all_pass: bool,
    /// First prime where the probe failed, with the exact count there.
    pub failure: Option<(u64, BigUint)>,
}

/// Check `r_F(0, q) ≥ q³` at every prime `q ≤ q_max` not dividing the
/// coefficients. Exceptional forms must pass everywhere; non-exceptional forms
/// must fail somewhere.
pub fn empirical_exceptional_probe(form: &DiagonalForm, q_max: u64) -> Result<ProbeReport> {
    if form.s != 4 {
        return Err(Error::domain("the probe is defined for quartic forms"));
    }
    if q_max > crate::counting::DEFAULT_BRUTE_CAP {
        return Err(Error::domain("q_max exceeds the brute-force cap"));
    }
    let mut checked = 0usize;
    let mut failure = None;
    for q in crate::arith::primes_in(2, q_max + 1) {
        if form.is_bad_prime(q) {
            continue;
        }
        checked += 1;
        let r = if q == 2 {
            count_brute(form, 0, q)?
        } else {
            count_zero_formula(form, q)?
        };
        let count = r.exact_count().expect("both paths are exact").clone();
        if count < BigUint::from(q).pow(3) {
            failure = Some((q, count));
            break;
        }
    }
    Ok(ProbeReport {
        q_max,
        primes_checked: checked,
        all_pass: failure.is_none(),
        failure,
    })
}
