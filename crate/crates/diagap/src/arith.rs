//! Deterministic integer primitives: primality, prime generation, modular
//! exponentiation, exact integer roots, and CRT over arbitrary-precision
//! naturals. No probabilistic answers anywhere: certificates must be exact.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// `a * b mod m` without overflow for any 64-bit operands.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `a^e mod p` by binary exponentiation; `p >= 1` (so `x mod 1 == 0`).
pub fn mod_pow(a: u64, mut e: u64, p: u64) -> u64 {
    assert!(p >= 1, "modulus must be positive");
    if p == 1 {
        return 0;
    }
    let mut base = a % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

/// Miller–Rabin witness set that is deterministic for all 64-bit integers.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // n - 1 = d * 2^r with d odd
    let mut d = n - 1;
    let mut r = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        r += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Ascending list of primes in the half-open range `[lo, hi)`, by segmented
/// sieve over base primes up to `sqrt(hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    assert!(lo <= hi, "primes_in requires lo <= hi");
    if hi <= 2 {
        return Vec::new();
    }
    let lo = lo.max(2);
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    let root = (hi as f64).sqrt() as u64 + 2;
    let base = small_primes_upto(root);
    for &p in &base {
        // first multiple of p in [lo, hi) that is >= p*p
        let start = std::cmp::max(p * p, lo.div_ceil(p) * p);
        let mut k = start;
        while k < hi {
            composite[(k - lo) as usize] = true;
            k += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i] && lo + i as u64 >= 2)
        .map(|i| lo + i as u64)
        .collect()
}

/// Simple sieve of Eratosthenes for the base primes.
fn small_primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut p = 2usize;
    while p * p <= n {
        if sieve[p] {
            let mut k = p * p;
            while k <= n {
                sieve[k] = false;
                k += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Floor of the real `s`-th root of `n`, verified exactly: the returned `r`
/// satisfies `r^s <= n < (r+1)^s`. The library root is only a seed; the
/// verification loop never trusts it.
pub fn int_root(n: &BigUint, s: u32) -> BigUint {
    assert!(s >= 1);
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut r = n.nth_root(s);
    // Exact correction: walk down/up until r^s <= n < (r+1)^s holds.
    while r.pow(s) > *n {
        r -= 1u32;
    }
    while (&r + 1u32).pow(s) <= *n {
        r += 1u32;
    }
    r
}

/// A list of congruences `x ≡ rᵢ (mod Mᵢ)` with pairwise coprime moduli.
#[derive(Debug, Clone, Default)]
pub struct ResidueSystem {
    pub pairs: Vec<(BigUint, u64)>,
}

impl ResidueSystem {
    pub fn new(pairs: Vec<(BigUint, u64)>) -> Self {
        ResidueSystem { pairs }
    }
}

/// Extended gcd on signed 128-bit integers: returns `(g, x, y)` with
/// `a*x + b*y = g`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Chinese remainder: combine the congruences into `(m, M)` with `0 <= m < M`
/// and `M` the product of the moduli. Rejects non-coprime moduli.
pub fn crt(sys: &ResidueSystem) -> Result<(BigUint, BigUint)> {
    let mut m = BigUint::zero();
    let mut big_m = BigUint::one();
    for (i, (r, p)) in sys.pairs.iter().enumerate() {
        if *p == 0 {
            return Err(Error::domain(format!("modulus #{i} is zero")));
        }
        if *r >= BigUint::from(*p) {
            return Err(Error::domain(format!(
                "residue #{i} is not reduced: {r} >= {p}"
            )));
        }
        let m_mod_p = (&m % *p).to_u64_digits().first().copied().unwrap_or(0);
        let big_m_mod_p = (&big_m % *p).to_u64_digits().first().copied().unwrap_or(0);
        let (g, inv, _) = ext_gcd(big_m_mod_p as i128, *p as i128);
        if g != 1 {
            return Err(Error::domain(format!(
                "moduli are not pairwise coprime: gcd with modulus {p} is {g}"
            )));
        }
        let r_u64 = (r % *p).to_u64_digits().first().copied().unwrap_or(0);
        // t = (r - m) * M^{-1} mod p
        let diff = (r_u64 + p - m_mod_p) % p;
        let inv = inv.rem_euclid(*p as i128) as u64;
        let t = mul_mod(diff, inv, *p);
        m += &big_m * t;
        big_m *= *p;
    }
    debug_assert!(m < big_m || (big_m.is_one() && m.is_zero()));
    Ok((m, big_m))
}
