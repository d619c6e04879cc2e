//! Exact solution counts `r_F(m, p)` by brute force (power histograms plus
//! cyclic convolution) and by closed formula, extended multiplicatively to
//! squarefree moduli, with Weil-bound verification.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::mod_pow;
use crate::cyclotomic::{h_term_two_re, k_term, make_context};
use crate::{Error, Result};

/// Default cap for the brute-force counting path (`O(s·p²)` per prime).
pub const DEFAULT_BRUTE_CAP: u64 = 5000;

/// A diagonal form `F(x) = a_1 x_1^s + ... + a_s x_s^s` with s in {3, 4}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub s: u8,
    pub coeffs: Vec<u64>,
}

impl DiagonalForm {
    pub fn new(s: u8, coeffs: Vec<u64>) -> Result<Self> {
        if s != 3 && s != 4 {
            return Err(Error::domain(format!("degree must be 3 or 4, got {s}")));
        }
        if coeffs.len() != s as usize {
            return Err(Error::domain(format!(
                "expected {} coefficients, got {}",
                s,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|&a| a == 0) {
            return Err(Error::domain("coefficients must be positive"));
        }
        Ok(DiagonalForm { s, coeffs })
    }

    pub fn cubic(coeffs: [u64; 3]) -> Self {
        DiagonalForm::new(3, coeffs.to_vec()).unwrap()
    }

    pub fn quartic(coeffs: [u64; 4]) -> Self {
        DiagonalForm::new(4, coeffs.to_vec()).unwrap()
    }

    /// Parse the CLI grammar `<degree>:<c1>,<c2>,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (deg, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("malformed form spec '{spec}', expected <degree>:<c1>,<c2>,...")))?;
        let s: u8 = deg
            .parse()
            .map_err(|_| Error::domain(format!("malformed degree '{deg}'")))?;
        let coeffs = rest
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::domain(format!("malformed coefficient '{c}'")))
            })
            .collect::<Result<Vec<u64>>>()?;
        DiagonalForm::new(s, coeffs)
    }

    /// Product of the coefficients reduced mod p.
    pub fn coeff_product_mod(&self, p: u64) -> u64 {
        self.coeffs
            .iter()
            .fold(1u64, |acc, &a| crate::arith::mul_mod(acc, a % p, p))
    }

    /// True iff p divides some coefficient (p ∈ Σ_F).
    pub fn is_bad_prime(&self, p: u64) -> bool {
        self.coeffs.iter().any(|&a| a % p == 0)
    }

    /// Stable identifier used in file names and cache keys.
    pub fn key_string(&self) -> String {
        let coeffs: Vec<String> = self.coeffs.iter().map(|a| a.to_string()).collect();
        format!("{}_{}", self.s, coeffs.join("-"))
    }
}

impl std::fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let coeffs: Vec<String> = self.coeffs.iter().map(|a| a.to_string()).collect();
        write!(f, "{}:{}", self.s, coeffs.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMethod {
    Brute,
    Formula,
    Multiplicative,
    WeilInterval,
}

/// Either an exact count or a certified enclosing interval (Weil bound).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountValue {
    Exact(BigUint),
    Interval { lo: BigUint, hi: BigUint },
}

#[derive(Debug, Clone)]
pub struct CountResult {
    pub value: CountValue,
    pub method: CountMethod,
    /// `count / M^{s−1}` in lowest terms for exact counts; the upper interval
    /// endpoint ratio for Weil intervals (a certified upper bound either way).
    pub ratio: BigRational,
}

impl CountResult {
    fn exact(count: BigUint, method: CountMethod, modulus_pow: BigUint) -> Self {
        let ratio = BigRational::new(BigInt::from(count.clone()), BigInt::from(modulus_pow));
        CountResult {
            value: CountValue::Exact(count),
            method,
            ratio,
        }
    }

    pub fn exact_count(&self) -> Option<&BigUint> {
        match &self.value {
            CountValue::Exact(c) => Some(c),
            CountValue::Interval { .. } => None,
        }
    }
}

/// All counts `r_F(m, p)` for m = 0..p at once: per-variable histograms
/// `h_i[v] = #{x : a_i x^s ≡ v}` convolved cyclically, O(s·p²).
pub fn count_brute_all(form: &DiagonalForm, p: u64) -> Vec<u64> {
    let pu = p as usize;
    let s = form.s as u64;
    // Histogram of s-th powers, including x = 0.
    let mut pw = vec![0u64; pu];
    for x in 0..p {
        let mut v = x % p;
        for _ in 1..s {
            v = crate::arith::mul_mod(v, x, p);
        }
        pw[v as usize] += 1;
    }
    let mut acc: Vec<u64> = vec![0; pu];
    acc[0] = 1; // empty form: the zero sum
    for &a in &form.coeffs {
        // h[v] = #{x : a x^s ≡ v} is pw permuted by multiplication by a.
        let mut h = vec![0u64; pu];
        let am = a % p;
        for v in 0..pu {
            h[crate::arith::mul_mod(am, v as u64, p) as usize] += pw[v];
        }
        // Cyclic convolution acc ⊛ h into a doubled buffer, then fold.
        let mut next = vec![0u64; 2 * pu];
        for v in 0..pu {
            let cv = acc[v];
            if cv == 0 {
                continue;
            }
            for w in 0..pu {
                next[v + w] += cv * h[w];
            }
        }
        for j in pu..2 * pu {
            next[j - pu] += next[j];
        }
        next.truncate(pu);
        acc = next;
    }
    acc
}

/// Exact `r_F(m, p)` by brute force; rejects primes above the cap.
pub fn count_brute(form: &DiagonalForm, m: u64, p: u64) -> Result<CountResult> {
    count_brute_capped(form, m, p, DEFAULT_BRUTE_CAP)
}

pub fn count_brute_capped(form: &DiagonalForm, m: u64, p: u64, cap: u64) -> Result<CountResult> {
    if p > cap {
        return Err(Error::domain(format!(
            "prime {p} exceeds the brute-force cap {cap}; use the formula path"
        )));
    }
    let counts = count_brute_all(form, p);
    let count = BigUint::from(counts[(m % p) as usize]);
    Ok(CountResult::exact(
        count,
        CountMethod::Brute,
        BigUint::from(p).pow(form.s as u32 - 1),
    ))
}

/// Exact `r_F(0, p)` by closed formula, without enumerating tuples:
/// cubic p ≡ 1 (mod 3) via π_{3,p}; cubic p ≡ 2 (mod 3) returns p²;
/// quartic q ≡ 1 (mod 4) via π², the (b, c) table and χ(−1); quartic
/// q ≡ 3 (mod 4) via the Legendre symbol.
pub fn count_zero_formula(form: &DiagonalForm, p: u64) -> Result<CountResult> {
    if form.is_bad_prime(p) {
        return Err(Error::domain(format!(
            "prime {p} divides a coefficient; the closed formula does not apply"
        )));
    }
    if p % form.s as u64 == 0 || (form.s == 4 && p == 2) {
        return Err(Error::domain(format!(
            "prime {p} divides the degree; the closed formula does not apply"
        )));
    }
    let s = form.s;
    let count: BigUint = match (s, p % s as u64) {
        (3, 1) => {
            let ctx = make_context(3, p)?;
            let t = h_term_two_re(form, &ctx)?; // 2Re(χ̄(a₁a₂a₃)π)
            signed_count(BigUint::from(p).pow(2), t, p - 1)
        }
        (3, 2) => {
            // Cubing is a bijection: one solution per choice of (x₂, x₃).
            BigUint::from(p).pow(2)
        }
        (4, 1) => {
            let ctx = make_context(4, p)?;
            // r = q³ + (2·Re H + K)·q(q−1) with H = χ̄(a₁a₂a₃a₄)π²/q, i.e.
            // q³ + t·(q−1) + K·q(q−1) for the exact integer t = 2Re(χ̄π²).
            let t = h_term_two_re(form, &ctx)?;
            let k = k_term(form, &ctx)?;
            let base = signed_count(BigUint::from(p).pow(3), t, p - 1);
            signed_count(base, k, p * (p - 1))
        }
        (4, 3) => {
            // Lemma with the Legendre symbol of the coefficient product.
            let prod = form.coeff_product_mod(p);
            let leg = mod_pow(prod, (p - 1) / 2, p);
            let sign: i64 = if leg == 1 { 1 } else { -1 };
            signed_count(BigUint::from(p).pow(3), sign, p * (p - 1))
        }
        _ => unreachable!("p = 2 for s = 4 is rejected above; p prime"),
    };
    Ok(CountResult::exact(
        count,
        CountMethod::Formula,
        BigUint::from(p).pow(s as u32 - 1),
    ))
}

/// `base + t·scale` with signed `t`, known nonnegative by the Weil bound.
fn signed_count(base: BigUint, t: i64, scale: u64) -> BigUint {
    let delta = BigUint::from(t.unsigned_abs()) * scale;
    if t >= 0 {
        base + delta
    } else {
        base - delta
    }
}

/// The certified Weil interval for `r_F(m, p)` with p ∤ m, p ∤ coefficients:
/// `|r − p^{s−1}| ≤ (s−1)^s p^{(s−1)/2}`, with integer endpoints that enclose
/// the irrational bound.
pub fn weil_interval(s: u8, p: u64) -> (BigUint, BigUint) {
    let main = BigUint::from(p).pow(s as u32 - 1);
    // ceil((s−1)^s · p^{(s−1)/2}) via an exact integer square root.
    let c = BigUint::from((s as u64 - 1).pow(s as u32));
    let val = &c * &c * &main;
    let b = val.sqrt();
    let bound = if &b * &b == val { b } else { b + 1u32 };
    let lo = if bound >= main {
        BigUint::zero()
    } else {
        &main - &bound
    };
    (lo, main + bound)
}

/// Dispatch: exact count when available (formula for the zero residue, brute
/// force below the cap), otherwise the certified Weil interval.
pub fn count_general(form: &DiagonalForm, m: &BigUint, p: u64) -> Result<CountResult> {
    count_general_capped(form, m, p, DEFAULT_BRUTE_CAP)
}

pub fn count_general_capped(
    form: &DiagonalForm,
    m: &BigUint,
    p: u64,
    cap: u64,
) -> Result<CountResult> {
    let m_red = (m % p).to_u64_digits().first().copied().unwrap_or(0);
    let formula_ok =
        m_red == 0 && !form.is_bad_prime(p) && p % form.s as u64 != 0 && !(form.s == 4 && p == 2);
    if formula_ok {
        return count_zero_formula(form, p);
    }
    if p <= cap {
        return count_brute_capped(form, m_red, p, cap);
    }
    if form.is_bad_prime(p) || m_red == 0 {
        return Err(Error::domain(format!(
            "no exact path for r_F({m_red}, {p}) above the brute cap, and the Weil bound does not apply"
        )));
    }
    let (lo, hi) = weil_interval(form.s, p);
    let ratio = BigRational::new(
        BigInt::from(hi.clone()),
        BigInt::from(BigUint::from(p).pow(form.s as u32 - 1)),
    );
    Ok(CountResult {
        value: CountValue::Interval { lo, hi },
        method: CountMethod::WeilInterval,
        ratio,
    })
}

/// `r_F(m, M)` for squarefree `M = Π primes` via multiplicativity: the product
/// of the per-prime exact counts, with the exact rational ratio.
pub fn count_squarefree(form: &DiagonalForm, m: &BigUint, primes: &[u64]) -> Result<CountResult> {
    let mut seen = primes.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("duplicate primes in squarefree modulus"));
    }
    let mut count = BigUint::one();
    let mut ratio = BigRational::one();
    for &p in primes {
        let r = count_general(form, m, p)?;
        let c = r.exact_count().ok_or_else(|| {
            Error::domain(format!("per-prime count at {p} is not exactly computable"))
        })?;
        count *= c;
        ratio *= &r.ratio;
    }
    Ok(CountResult {
        value: CountValue::Exact(count),
        method: CountMethod::Multiplicative,
        ratio,
    })
}

/// Report from an exhaustive Weil-bound check at one prime.
#[derive(Debug, Clone)]
pub struct WeilReport {
    pub p: u64,
    pub pass: bool,
    /// Largest |r_F(m,p) − p^{s−1}| over m ∈ [1, p).
    pub max_deviation: u64,
    pub m_at_max: u64,
}

/// Verify `|r_F(m,p) − p^{s−1}| ≤ (s−1)^s p^{(s−1)/2}` for every m ∈ [1, p).
pub fn weil_check(form: &DiagonalForm, p: u64) -> Result<WeilReport> {
    if form.is_bad_prime(p) {
        return Err(Error::domain(format!("prime {p} divides a coefficient")));
    }
    let counts = count_brute_all(form, p);
    let main = p.pow(form.s as u32 - 1);
    let c = (form.s as u128 - 1).pow(form.s as u32);
    // dev ≤ c·p^{(s−1)/2} ⟺ dev² ≤ c²·p^{s−1}, all in exact integers.
    let bound_sq = c * c * main as u128;
    let mut max_dev = 0u64;
    let mut m_at_max = 0u64;
    let mut pass = true;
    for m in 1..p {
        let r = counts[m as usize];
        let dev = r.abs_diff(main);
        if dev > max_dev {
            max_dev = dev;
            m_at_max = m;
        }
        if (dev as u128) * (dev as u128) > bound_sq {
            pass = false;
        }
    }
    Ok(WeilReport {
        p,
        pass,
        max_deviation: max_dev,
        m_at_max,
    })
}
