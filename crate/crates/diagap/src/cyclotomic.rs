//! Exact arithmetic in Z[ζ₃] and Z[i], power residue characters mod p, Gauss
//! and Jacobi sums, and the H and K terms attached to a diagonal form.
//!
//! All certificate-bearing quantities are integer pairs `a + b·ζ_s`; floating
//! point appears only in [`gauss_sum`] and [`h_term`], which are quarantined to
//! property tests and reporting.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::arith::{is_prime, mod_pow, mul_mod};
use crate::counting::DiagonalForm;
use crate::{Error, Result};

/// An element `a + b·ζ_s` of Z[ζ₃] (s = 3) or Z[i] (s = 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclotomicInt {
    pub s: u8,
    pub a: i64,
    pub b: i64,
}

impl CyclotomicInt {
    pub fn new(s: u8, a: i64, b: i64) -> Self {
        assert!(s == 3 || s == 4, "degree must be 3 or 4");
        CyclotomicInt { s, a, b }
    }

    pub fn zero(s: u8) -> Self {
        CyclotomicInt::new(s, 0, 0)
    }

    /// `ζ_s^k` as a ring element.
    pub fn zeta_pow(s: u8, k: u8) -> Self {
        let k = (k % s) as usize;
        let (a, b) = match (s, k) {
            (_, 0) => (1, 0),
            (_, 1) => (0, 1),
            (3, 2) => (-1, -1), // ζ₃² = −1 − ζ₃
            (4, 2) => (-1, 0),
            (4, 3) => (0, -1),
            _ => unreachable!(),
        };
        CyclotomicInt::new(s, a, b)
    }

    pub fn add(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        CyclotomicInt::new(self.s, self.a + o.a, self.b + o.b)
    }

    pub fn mul(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let (a1, b1, a2, b2) = (
            self.a as i128,
            self.b as i128,
            o.a as i128,
            o.b as i128,
        );
        let (a, b) = if self.s == 3 {
            // ζ² = −1 − ζ
            (a1 * a2 - b1 * b2, a1 * b2 + a2 * b1 - b1 * b2)
        } else {
            // i² = −1
            (a1 * a2 - b1 * b2, a1 * b2 + a2 * b1)
        };
        CyclotomicInt::new(
            self.s,
            i64::try_from(a).expect("cyclotomic overflow"),
            i64::try_from(b).expect("cyclotomic overflow"),
        )
    }

    /// Complex conjugate (ζ ↦ ζ̄).
    pub fn conj(self) -> Self {
        if self.s == 3 {
            // conj(a + bζ) = a + b ζ² = (a − b) − b ζ
            CyclotomicInt::new(3, self.a - self.b, -self.b)
        } else {
            CyclotomicInt::new(4, self.a, -self.b)
        }
    }

    /// Field norm; always nonnegative.
    pub fn norm(self) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        if self.s == 3 {
            a * a - a * b + b * b
        } else {
            a * a + b * b
        }
    }

    /// Exact `2·Re(self)` as an integer (an integer because `2·Re(ζ₃)` = −1).
    pub fn two_re(self) -> i64 {
        if self.s == 3 {
            2 * self.a - self.b
        } else {
            2 * self.a
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let zeta = if self.s == 3 {
            Complex64::new(-0.5, 3f64.sqrt() / 2.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        Complex64::new(self.a as f64, 0.0) + zeta * self.b as f64
    }
}

impl std::fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let unit = if self.s == 3 { "zeta3" } else { "i" };
        write!(f, "{} + {}*{}", self.a, self.b, unit)
    }
}

/// A prime `p ≡ 1 (mod s)` together with the canonical root of the defining
/// polynomial (x²+x+1 for s = 3, x²+1 for s = 4) mod p. The root fixes the
/// prime above p and hence the character χ_{s,p}; we always take the smallest
/// positive root so the choice is deterministic.
#[derive(Debug, Clone)]
pub struct PrimeCharContext {
    pub s: u8,
    pub p: u64,
    pub root: u64,
    /// Images of ζ_s^k mod p for k = 0..s under ζ_s ↦ root.
    zeta_pows: [u64; 4],
}

/// Build the canonical context for `(s, p)`; rejects `p` in the wrong residue
/// class.
pub fn make_context(s: u8, p: u64) -> Result<PrimeCharContext> {
    if s != 3 && s != 4 {
        return Err(Error::domain(format!("degree must be 3 or 4, got {s}")));
    }
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if p % s as u64 != 1 {
        return Err(Error::domain(format!("{p} is not 1 mod {s}")));
    }
    let e = (p - 1) / s as u64;
    // Find an element t of multiplicative order exactly s by scanning small
    // bases; the two roots of the defining polynomial are then {t, t²} (s = 3)
    // or {t, p − t} (s = 4), and the canonical root is the smaller.
    let mut root = 0u64;
    for a in 2..p {
        let t = mod_pow(a, e, p);
        if t == 1 {
            continue;
        }
        if s == 4 && mul_mod(t, t, p) != p - 1 {
            // a was a quadratic residue: t has order 2, keep scanning.
            continue;
        }
        let other = if s == 3 { mul_mod(t, t, p) } else { p - t };
        root = t.min(other);
        break;
    }
    debug_assert!(root > 0);
    let mut zeta_pows = [1u64; 4];
    for k in 1..s as usize {
        zeta_pows[k] = mul_mod(zeta_pows[k - 1], root, p);
    }
    Ok(PrimeCharContext {
        s,
        p,
        root,
        zeta_pows,
    })
}

impl PrimeCharContext {
    /// χ_{s,p}(a) as an exponent `k` with χ(a) = ζ_s^k, or `None` when p | a.
    pub fn chi(&self, a: u64) -> Option<u8> {
        let a = a % self.p;
        if a == 0 {
            return None;
        }
        let t = mod_pow(a, (self.p - 1) / self.s as u64, self.p);
        for k in 0..self.s as usize {
            if self.zeta_pows[k] == t {
                return Some(k as u8);
            }
        }
        unreachable!("a^((p-1)/s) must be an s-th root of unity")
    }

    /// χ(−1) as ±1 (always +1 for s = 3).
    pub fn chi_minus_one(&self) -> i64 {
        match self.chi(self.p - 1).expect("p does not divide -1") {
            0 => 1,
            2 => -1,
            k => unreachable!("chi(-1) exponent must be 0 or 2, got {k}"),
        }
    }

    /// `cls[x]` = exponent class of x in F_p^× (cls[0] = SENTINEL). One pass of
    /// O(p) multiplications; at most s−1 modular exponentiations total.
    pub fn power_classes(&self) -> Vec<u8> {
        const SENTINEL: u8 = u8::MAX;
        let p = self.p;
        let s = self.s as u64;
        let mut cls = vec![SENTINEL; p as usize];
        // Mark the subgroup of s-th powers (class 0).
        for v in 1..p {
            // x = v^s mod p, built with s−1 multiplications.
            let mut x = v % p;
            for _ in 1..s {
                x = mul_mod(x, v, p);
            }
            cls[x as usize] = 0;
        }
        let subgroup: Vec<u64> = (1..p).filter(|&v| cls[v as usize] == 0).collect();
        // Remaining cosets: classify one representative by modular
        // exponentiation, then translate the whole subgroup.
        for g in 2..p {
            if cls[g as usize] != SENTINEL {
                continue;
            }
            let k = self.chi(g).expect("g is a unit");
            for &v in &subgroup {
                cls[mul_mod(g, v, p) as usize] = k;
            }
        }
        cls
    }
}

/// Exact Jacobi sum `J(χ^{e1}, χ^{e2}) = Σ_{t1+t2=1} χ^{e1}(t1) χ^{e2}(t2)`
/// in O(p) time. For `e1 = e2 = 1` this is the generator π_{s,p} of the prime
/// above p, with `norm(π) = p`.
pub fn jacobi_sum(ctx: &PrimeCharContext, e1: u8, e2: u8) -> Result<CyclotomicInt> {
    let s = ctx.s;
    if e1 % s == 0 || e2 % s == 0 {
        return Err(Error::domain(
            "jacobi_sum requires nontrivial characters (exponent not 0 mod s)",
        ));
    }
    let cls = ctx.power_classes();
    jacobi_sum_with_classes(ctx, &cls, e1, e2)
}

/// As [`jacobi_sum`] but reusing a precomputed class table (used by scans).
pub fn jacobi_sum_with_classes(
    ctx: &PrimeCharContext,
    cls: &[u8],
    e1: u8,
    e2: u8,
) -> Result<CyclotomicInt> {
    let s = ctx.s;
    if e1 % s == 0 || e2 % s == 0 {
        return Err(Error::domain(
            "jacobi_sum requires nontrivial characters (exponent not 0 mod s)",
        ));
    }
    let p = ctx.p;
    let mut cnt = [0i64; 4];
    // t1 + t2 = 1 mod p with both nonzero: t1 ranges over 2..p (t1 = 1 gives
    // t2 = 0); t2 = 1 − t1 + p.
    for t1 in 2..p {
        let t2 = 1 + p - t1;
        let e = (e1 as u64 * cls[t1 as usize] as u64 + e2 as u64 * cls[t2 as usize] as u64)
            % s as u64;
        cnt[e as usize] += 1;
    }
    Ok(reduce_zeta_counts(s, cnt))
}

/// Fold counts of ζ^k into the basis {1, ζ}.
fn reduce_zeta_counts(s: u8, cnt: [i64; 4]) -> CyclotomicInt {
    if s == 3 {
        // ζ² = −1 − ζ
        CyclotomicInt::new(3, cnt[0] - cnt[2], cnt[1] - cnt[2])
    } else {
        // i² = −1, i³ = −i
        CyclotomicInt::new(4, cnt[0] - cnt[2], cnt[1] - cnt[3])
    }
}

/// Joint histogram of the power classes `(c_1, ..., c_l)` over the l-tuples of
/// UNITS with `t_1 + ... + t_l = 0`, the last coordinate forced. Index packing:
/// 2 bits per class, first coordinate highest. O(p^{l−1}) time; this is the
/// brute-force enumeration that [`j0_sum`] contracts against its exponents.
pub fn j0_class_histogram(ctx: &PrimeCharContext, l: usize) -> Vec<u64> {
    assert!((2..=4).contains(&l), "only lengths 2..4 are needed");
    let p = ctx.p as usize;
    let cls = ctx.power_classes();
    // Doubled table so the forced coordinate needs no modular reduction.
    let mut cls2 = Vec::with_capacity(2 * p);
    cls2.extend_from_slice(&cls);
    cls2.extend_from_slice(&cls);
    let mut hist = vec![0u64; 1 << (2 * l)];
    match l {
        2 => {
            // t2 = −t1
            for t1 in 1..p {
                let t2 = p - t1;
                hist[(cls[t1] as usize) << 2 | cls[t2] as usize] += 1;
            }
        }
        3 => {
            for t1 in 1..p {
                let base1 = (cls[t1] as usize) << 4;
                // t3 = −t1 − t2 = (2p − t1) − t2, skip t2 ≡ −t1 (t3 = 0).
                let z = 2 * p - t1;
                for t2 in 1..p {
                    if t2 == p - t1 {
                        continue;
                    }
                    let t3 = z - t2; // in [1, 2p−2]; cls2 folds mod p
                    hist[base1 | (cls[t2] as usize) << 2 | cls2[t3] as usize] += 1;
                }
            }
        }
        4 => {
            for t1 in 1..p {
                let base1 = (cls[t1] as usize) << 6;
                for t2 in 1..p {
                    let base2 = base1 | (cls[t2] as usize) << 4;
                    // t4 = −t1 − t2 − t3; with t0 = (t1 + t2) mod p we need
                    // t3 ≠ −t0, and t4 = (2p − t0) − t3 has 2p−t0−t3 ∈ [1, 2p).
                    let t0 = (t1 + t2) % p;
                    let z = 2 * p - t0;
                    let skip = p - t0; // t3 value that forces t4 = 0 (p when t0=0)
                    for t3 in 1..p {
                        if t3 == skip {
                            continue;
                        }
                        let t4 = z - t3; // in [p+1−p, 2p−1] range of cls2
                        hist[base2 | (cls[t3] as usize) << 2 | cls2[t4] as usize] += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    hist
}

/// Exact `J₀(χ^{e_1}, ..., χ^{e_l}) = Σ_{t_1+...+t_l=0} Π χ^{e_i}(t_i)`,
/// brute-force over tuples with the last coordinate forced. Requires all
/// exponents nonzero and Σ e_i ≡ 0 (mod s).
pub fn j0_sum(ctx: &PrimeCharContext, exps: &[u8]) -> Result<CyclotomicInt> {
    let s = ctx.s;
    if exps.iter().any(|&e| e % s == 0) {
        return Err(Error::domain("j0_sum requires all characters nontrivial"));
    }
    if exps.iter().map(|&e| e as u64).sum::<u64>() % s as u64 != 0 {
        return Err(Error::domain(
            "j0_sum requires exponents summing to 0 mod s",
        ));
    }
    let hist = j0_class_histogram(ctx, exps.len());
    Ok(contract_j0_histogram(s, &hist, exps))
}

/// Contract a joint class histogram against character exponents.
pub fn contract_j0_histogram(s: u8, hist: &[u64], exps: &[u8]) -> CyclotomicInt {
    let l = exps.len();
    let mut cnt = [0i64; 4];
    for (idx, &h) in hist.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let mut e = 0u64;
        for (i, &ei) in exps.iter().enumerate() {
            let ci = (idx >> (2 * (l - 1 - i))) & 3;
            e += ei as u64 * ci as u64;
        }
        cnt[(e % s as u64) as usize] += h as i64;
    }
    reduce_zeta_counts(s, cnt)
}

/// Gauss sum `G(χ^e) = Σ_t χ^e(t) e^{2πit/p}` in floating point; only used in
/// property tests of the multiplicative identities (|G| = √p etc.).
pub fn gauss_sum(ctx: &PrimeCharContext, e: u8) -> Result<Complex64> {
    if e % ctx.s == 0 {
        return Err(Error::domain("gauss_sum requires a nontrivial character"));
    }
    let p = ctx.p;
    let cls = ctx.power_classes();
    let zeta_s = |k: u8| CyclotomicInt::zeta_pow(ctx.s, k).to_complex();
    let mut acc = Complex64::new(0.0, 0.0);
    let tau = std::f64::consts::TAU;
    for t in 1..p {
        let k = (e as u64 * cls[t as usize] as u64 % ctx.s as u64) as u8;
        let angle = tau * t as f64 / p as f64;
        acc += zeta_s(k) * Complex64::new(angle.cos(), angle.sin());
    }
    Ok(acc)
}

/// Exact integer `2·Re(χ̄(a₁⋯a_s)·π)` (s = 3) or `2·Re(χ̄(a₁⋯a₄)·π²)` (s = 4):
/// the numerator of the paper's H term. Convention-free (conjugating the
/// context changes only the imaginary part).
pub fn h_term_two_re(form: &DiagonalForm, ctx: &PrimeCharContext) -> Result<i64> {
    Ok(h_term_exact(form, ctx)?.two_re())
}

/// The exact cyclotomic integer `χ̄(a₁⋯a_s)·π_{3,p}` (s = 3) or
/// `χ̄(a₁⋯a₄)·π²_{4,q}` (s = 4); H is this divided by √p resp. q.
pub fn h_term_exact(form: &DiagonalForm, ctx: &PrimeCharContext) -> Result<CyclotomicInt> {
    check_form_prime(form, ctx)?;
    let pi = jacobi_sum(ctx, 1, 1)?;
    let mut prod = 1u64;
    for &a in &form.coeffs {
        prod = mul_mod(prod, a % ctx.p, ctx.p);
    }
    let e = ctx.chi(prod).expect("p does not divide the coefficients");
    // χ̄(prod) = ζ^{−e}
    let conj_unit = CyclotomicInt::zeta_pow(ctx.s, (ctx.s - e % ctx.s) % ctx.s);
    let base = if ctx.s == 3 { pi } else { pi.mul(pi) };
    Ok(conj_unit.mul(base))
}

/// The paper's H term as a complex number of modulus 1 (floating point; for
/// reports and property tests only — certificates use [`h_term_two_re`]).
pub fn h_term(form: &DiagonalForm, ctx: &PrimeCharContext) -> Result<Complex64> {
    let exact = h_term_exact(form, ctx)?;
    let scale = if ctx.s == 3 {
        (ctx.p as f64).sqrt()
    } else {
        ctx.p as f64
    };
    Ok(exact.to_complex() / scale)
}

fn check_form_prime(form: &DiagonalForm, ctx: &PrimeCharContext) -> Result<()> {
    if form.s != ctx.s {
        return Err(Error::domain("form degree does not match context degree"));
    }
    if form.coeffs.iter().any(|&a| a % ctx.p == 0) {
        return Err(Error::domain(format!(
            "prime {} divides a coefficient",
            ctx.p
        )));
    }
    Ok(())
}

/// One of the eight classes of `μ₄⁴/∼` with its table row (b, c).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleClass {
    /// Class index 1..=8 (U1..U8).
    pub u: u8,
    pub b: i64,
    pub c: i64,
}

/// Table rows (b, c) for U1..U8.
const BC_TABLE: [(i64, i64); 8] = [
    (7, 12),  // U1
    (-5, 0),  // U2
    (-1, -6), // U3
    (7, -4),  // U4
    (-1, 2),  // U5
    (3, 4),   // U6
    (-1, 0),  // U7
    (3, -4),  // U8
];

/// Representatives of U1..U8 as exponent quadruples (1 ↦ 0, i ↦ 1, −1 ↦ 2,
/// −i ↦ 3).
const CLASS_REPS: [[u8; 4]; 8] = [
    [0, 0, 0, 0], // (1, 1, 1, 1)
    [0, 0, 0, 2], // (1, 1, 1, −1)
    [0, 0, 0, 1], // (1, 1, 1, i)
    [0, 0, 2, 2], // (1, 1, −1, −1)
    [0, 0, 2, 1], // (1, 1, −1, i)
    [0, 0, 1, 1], // (1, 1, i, i)
    [0, 0, 1, 3], // (1, 1, i, −i)
    [0, 2, 1, 3], // (1, −1, i, −i)
];

/// Canonical form of a quadruple under sorting (permutations), the four μ₄
/// scalings, and conjugation: the lexicographically smallest variant, packed
/// into a byte.
fn canonical_key(t: [u8; 4]) -> u8 {
    let mut best = u8::MAX;
    for conj in 0..2 {
        for scale in 0..4 {
            let mut v: Vec<u8> = t
                .iter()
                .map(|&e| {
                    let e = if conj == 1 { (4 - e) % 4 } else { e };
                    (e + scale) % 4
                })
                .collect();
            v.sort_unstable();
            let packed = v[0] << 6 | v[1] << 4 | v[2] << 2 | v[3];
            best = best.min(packed);
        }
    }
    best
}

fn class_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut keys = [0u8; 8];
        for (i, rep) in CLASS_REPS.iter().enumerate() {
            keys[i] = canonical_key(*rep);
        }
        let mut table = [0u8; 256];
        for packed in 0..256usize {
            let t = [
                (packed >> 6) as u8 & 3,
                (packed >> 4) as u8 & 3,
                (packed >> 2) as u8 & 3,
                packed as u8 & 3,
            ];
            let key = canonical_key(t);
            let u = keys
                .iter()
                .position(|&k| k == key)
                .expect("every quadruple belongs to one of the 8 classes");
            table[packed] = (u + 1) as u8;
        }
        table
    })
}

/// Classify a quadruple of μ₄-exponents into its class U1..U8 with the (b, c)
/// row of the table.
pub fn classify_tuple(exps: [u8; 4]) -> TupleClass {
    let e = exps.map(|x| x % 4);
    let packed = (e[0] as usize) << 6 | (e[1] as usize) << 4 | (e[2] as usize) << 2 | e[3] as usize;
    let u = class_table()[packed];
    let (b, c) = BC_TABLE[(u - 1) as usize];
    TupleClass { u, b, c }
}

/// The exact K term `K_{F,q} = b + χ(−1)·c` of a quartic form at a prime
/// `q ≡ 1 (mod 4)`; always in [−7, 19].
pub fn k_term(form: &DiagonalForm, ctx: &PrimeCharContext) -> Result<i64> {
    if form.s != 4 || ctx.s != 4 {
        return Err(Error::domain("k_term is defined for quartic forms only"));
    }
    check_form_prime(form, ctx)?;
    let mut exps = [0u8; 4];
    for (i, &a) in form.coeffs.iter().enumerate() {
        exps[i] = ctx.chi(a % ctx.p).expect("q does not divide coefficients");
    }
    let cls = classify_tuple(exps);
    let k = cls.b + ctx.chi_minus_one() * cls.c;
    debug_assert!((-7..=19).contains(&k));
    Ok(k)
}
