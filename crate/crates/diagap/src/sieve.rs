//! Ground truth about the value set S_F = {n : r_F(n) ≠ 0}: a dense bitset
//! sieve on [0, N), exact windowed representation search at arbitrarily large
//! offsets, gap scanning, and explicit gap discovery inside a witness's
//! arithmetic progression.
//!
//! Everything here is exact integer arithmetic — representations are
//! re-evaluated on emission and window searches use verified integer roots,
//! never floating point.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::arith::int_root;
use crate::counting::DiagonalForm;
use crate::gapcraft::{check_witness, GapWitness};
use crate::{Error, Result};

/// Default bitset memory budget: 2³⁰ bits (128 MiB).
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 30;

/// Default work budget for explicit gap scans, in units of inner search steps
/// (roughly `hMax · (A+K)^{(s−1)/s}`).
pub const DEFAULT_WORK_BUDGET: u64 = 10_000_000_000;

/// Bitset export header: magic "SF", format version, then N as u32.
const EXPORT_MAGIC: [u8; 2] = *b"SF";
const EXPORT_VERSION: u8 = 1;

/// Dense characteristic vector of S_F on [0, N): bit n is set iff n is a
/// value of F over nonnegative integers. Bit 0 is always set (the zero
/// vector).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueBitset {
    n: u64,
    words: Vec<u64>,
}

impl ValueBitset {
    fn new(n: u64) -> Self {
        ValueBitset {
            n,
            words: vec![0u64; n.div_ceil(64) as usize],
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1u64 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        assert!(i < self.n, "index {i} out of range [0, {})", self.n);
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Raw little-endian bit array with an 8-byte header: magic "SF", format
    /// version, a reserved byte, then N as a little-endian u32. Bit n lives
    /// in byte `8 + n/8` at position `n % 8`.
    pub fn export(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.n.div_ceil(8) as usize);
        out.extend_from_slice(&EXPORT_MAGIC);
        out.push(EXPORT_VERSION);
        out.push(0);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for i in 0..self.n.div_ceil(8) {
            let word = self.words[(i / 8) as usize];
            out.push((word >> (8 * (i % 8))) as u8);
        }
        out
    }

    /// Parse an exported bitset, validating the header.
    pub fn import(data: &[u8]) -> Result<ValueBitset> {
        if data.len() < 8 || data[0..2] != EXPORT_MAGIC {
            return Err(Error::domain("not a bitset export (bad magic)"));
        }
        if data[2] != EXPORT_VERSION {
            return Err(Error::domain(format!(
                "unsupported bitset export version {}",
                data[2]
            )));
        }
        let n = u32::from_le_bytes(data[4..8].try_into().unwrap()) as u64;
        if data.len() as u64 != 8 + n.div_ceil(8) {
            return Err(Error::domain("bitset export length does not match N"));
        }
        let mut bits = ValueBitset::new(n);
        for (i, &b) in data[8..].iter().enumerate() {
            bits.words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        Ok(bits)
    }
}

/// Exact S_F ∩ [0, N) by nested enumeration with early cutoff. Forms with all
/// coefficients equal are enumerated with x₁ ≥ x₂ ≥ … (order does not change
/// the value), cutting the work by up to s!.
pub fn sieve_values(form: &DiagonalForm, n: u64) -> Result<ValueBitset> {
    sieve_values_with_budget(form, n, DEFAULT_BIT_BUDGET)
}

pub fn sieve_values_with_budget(
    form: &DiagonalForm,
    n: u64,
    bit_budget: u64,
) -> Result<ValueBitset> {
    if n > bit_budget {
        return Err(Error::budget(format!(
            "bitset of {n} bits exceeds the budget of {bit_budget} bits"
        )));
    }
    let mut bits = ValueBitset::new(n);
    if n == 0 {
        return Ok(bits);
    }
    let s = form.s as u32;
    let symmetric = form.coeffs.windows(2).all(|w| w[0] == w[1]);
    // Depth-first over x_1, ..., x_s with partial sums kept below n.
    fn rec(
        coeffs: &[u64],
        s: u32,
        idx: usize,
        acc: u64,
        bound: Option<u64>,
        n: u64,
        bits: &mut ValueBitset,
    ) {
        if idx == coeffs.len() {
            bits.set(acc);
            return;
        }
        let a = coeffs[idx] as u128;
        let mut x = 0u64;
        loop {
            if bound.is_some_and(|b| x > b) {
                break;
            }
            let term = a * (x as u128).pow(s);
            if acc as u128 + term >= n as u128 {
                break;
            }
            rec(
                coeffs,
                s,
                idx + 1,
                acc + term as u64,
                bound.map(|_| x),
                n,
                bits,
            );
            x += 1;
        }
    }
    rec(
        &form.coeffs,
        s,
        0,
        0,
        if symmetric { Some(u64::MAX) } else { None },
        n,
        &mut bits,
    );
    Ok(bits)
}

/// The longest run of unset bits inside [0, N), reported as `(a, length)`
/// with bits `a+1 ..= a+length` all unset (matching the witness convention
/// for a gap start). First occurrence wins ties; an all-set bitset yields
/// `(0, 0)`.
pub fn max_gap(bits: &ValueBitset) -> Result<(u64, u64)> {
    if bits.is_empty() {
        return Err(Error::domain("max_gap requires a nonempty bitset"));
    }
    let mut best = (0u64, 0u64);
    let mut run_start = None::<u64>;
    for i in 0..bits.len() {
        if !bits.get(i) {
            run_start.get_or_insert(i);
        } else if let Some(start) = run_start.take() {
            let len = i - start;
            if len > best.1 {
                // start > 0 always in practice (bit 0 is set for a sieve).
                best = (start.saturating_sub(1), len);
            }
        }
    }
    if let Some(start) = run_start {
        let len = bits.len() - start;
        if len > best.1 {
            best = (start.saturating_sub(1), len);
        }
    }
    Ok(best)
}

/// An exact representation F(x) = n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    pub n: BigUint,
    pub x: Vec<BigUint>,
}

/// The outcome of a window search over (A, A+K].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueWindow {
    pub a: BigUint,
    pub k: u64,
    pub representations: Vec<Representation>,
}

impl ValueWindow {
    pub fn is_gap(&self) -> bool {
        self.representations.is_empty()
    }
}

/// Find ALL n ∈ (A, A+K] with a representation, enumerating x₁ descending
/// from the integer root of A+K and recursing on the exact residual interval.
/// Symmetric forms impose x₁ ≥ x₂ ≥ …; every emitted representation is
/// re-evaluated exactly before being recorded.
pub fn window_has_value(form: &DiagonalForm, a: &BigUint, k: u64) -> ValueWindow {
    let mut out = search_interval(form, &form.coeffs, &(a + 1u32), &(a + k));
    out.sort_by(|r1, r2| r1.n.cmp(&r2.n).then(r1.x.cmp(&r2.x)));
    out.dedup();
    ValueWindow {
        a: a.clone(),
        k,
        representations: out,
    }
}

/// All (n, x) with `Σ coeffs[i]·x_i^s = n ∈ [lo, hi]`, variables enumerated
/// in the given coefficient order (descending per variable). Symmetric forms
/// are restricted to weakly decreasing x.
fn search_interval(
    form: &DiagonalForm,
    coeffs: &[u64],
    lo: &BigUint,
    hi: &BigUint,
) -> Vec<Representation> {
    struct Search<'a> {
        coeffs: &'a [u64],
        s: u32,
        lo: &'a BigUint,
        hi: &'a BigUint,
        symmetric: bool,
        xs: Vec<BigUint>,
        found: Vec<Representation>,
    }

    impl Search<'_> {
        /// Enumerate variable `idx` descending. `bound` caps x for symmetric
        /// forms (weakly decreasing tuples); `acc <= hi` on entry.
        fn rec(&mut self, idx: usize, acc: &BigUint, bound: Option<&BigUint>) {
            let a = BigUint::from(self.coeffs[idx]);
            let last = idx + 1 == self.coeffs.len();
            let mut x = int_root(&((self.hi - acc) / &a), self.s);
            if let Some(b) = bound {
                if *b < x {
                    x = b.clone();
                }
            }
            loop {
                let new_acc = acc + &a * x.pow(self.s);
                if last {
                    if new_acc < *self.lo {
                        // Descending: every smaller x is also below lo.
                        break;
                    }
                    {
                        // In [lo, hi] by the cap on x: re-evaluate and emit.
                        self.xs.push(x.clone());
                        let n: BigUint = self
                            .coeffs
                            .iter()
                            .zip(self.xs.iter())
                            .map(|(c, xi)| BigUint::from(*c) * xi.pow(self.s))
                            .sum();
                        assert_eq!(n, new_acc, "representation re-evaluation mismatch");
                        self.found.push(Representation { n, x: self.xs.clone() });
                        self.xs.pop();
                    }
                } else {
                    // Lower prune: the remaining variables contribute at most
                    // Σ_j a_j·⌊((hi−newAcc)/a_j)^{1/s}⌋^s; if even that falls
                    // short of lo this subtree is empty (but smaller x leave
                    // more room, so only skip, never stop).
                    let residual = self.hi - &new_acc;
                    let mut rem_max = BigUint::zero();
                    for &aj in &self.coeffs[idx + 1..] {
                        let ajb = BigUint::from(aj);
                        let mut cap = int_root(&(&residual / &ajb), self.s);
                        if self.symmetric && cap > x {
                            cap = x.clone();
                        }
                        rem_max += ajb * cap.pow(self.s);
                    }
                    if &new_acc + rem_max >= *self.lo {
                        self.xs.push(x.clone());
                        let b = if self.symmetric { Some(x.clone()) } else { None };
                        self.rec(idx + 1, &new_acc, b.as_ref());
                        self.xs.pop();
                    }
                }
                if x.is_zero() {
                    break;
                }
                x -= 1u32;
            }
        }
    }

    if lo > hi {
        return Vec::new();
    }
    let mut search = Search {
        coeffs,
        s: form.s as u32,
        lo,
        hi,
        symmetric: coeffs.windows(2).all(|w| w[0] == w[1]),
        xs: Vec::with_capacity(coeffs.len()),
        found: Vec::new(),
    };
    search.rec(0, &BigUint::zero(), None);
    search.found
}

/// Exact membership test with an independent variable order (reversed), used
/// to re-verify reported gaps.
pub fn is_value(form: &DiagonalForm, n: &BigUint) -> Option<Representation> {
    let mut rev: Vec<u64> = form.coeffs.clone();
    rev.reverse();
    let mut hits = search_interval(form, &rev, n, n);
    hits.pop().map(|mut r| {
        r.x.reverse(); // back to the form's coefficient order
        r
    })
}

/// An explicit gap found inside the witness progression, plus the scan
/// statistics leading up to it.
#[derive(Debug, Clone)]
pub struct GapFind {
    /// The gap start: {a+1, ..., a+K} ∩ S_F = ∅.
    pub a: BigUint,
    /// a = m + (h−1)·M.
    pub h: u64,
    pub windows_scanned: u64,
    pub hits: u64,
    /// Confirmed by the independent re-verification pass.
    pub reverified: bool,
}

/// Scan statistics when hMax is exhausted without finding a gap.
#[derive(Debug, Clone)]
pub struct ExhaustedReport {
    pub h_max: u64,
    pub hits: u64,
}

impl ExhaustedReport {
    /// Empirical fraction of windows containing a value; should not exceed
    /// min(1, K·certifiedEpsilon) by much for a sound witness.
    pub fn hit_rate(&self) -> f64 {
        self.hits as f64 / self.h_max as f64
    }
}

#[derive(Debug, Clone)]
pub enum GapSearchOutcome {
    Found(GapFind),
    Exhausted(ExhaustedReport),
}

/// Scan h = 1, 2, …, hMax for the first a = m + (h−1)M whose window
/// (a, a+K] misses S_F entirely. The witness is verified first (tampered
/// certificates are refused), the scan cost is estimated against the work
/// budget up front, and any reported gap is re-verified by an independent
/// second pass before being returned.
pub fn find_explicit_gap(
    form: &DiagonalForm,
    w: &GapWitness,
    h_max: u64,
    work_budget: Option<u64>,
) -> Result<GapSearchOutcome> {
    check_witness(form, w)?;
    if h_max == 0 {
        return Err(Error::domain("hMax must be positive"));
    }
    let budget = work_budget.unwrap_or(DEFAULT_WORK_BUDGET);
    // Estimated cost: hMax windows, each O(root(A+K)^{s−1}) search steps at
    // the largest offset scanned.
    let a_top = &w.m + &w.big_m * (h_max - 1) + w.k;
    let per_window = int_root(&a_top, form.s as u32).pow(form.s as u32 - 1);
    let estimate = per_window * h_max;
    if estimate > BigUint::from(budget) {
        return Err(Error::budget(format!(
            "explicit gap scan needs about {estimate} search steps (hMax = {h_max}, \
             M has {} digits), over the budget of {budget}; the witness modulus is \
             too large for direct window enumeration",
            w.big_m.to_string().len()
        )));
    }
    let mut hits = 0u64;
    for h in 1..=h_max {
        let a = &w.m + &w.big_m * (h - 1);
        let window = window_has_value(form, &a, w.k as u64);
        if !window.is_gap() {
            hits += 1;
            continue;
        }
        // Independent re-verification: per-integer membership tests with a
        // different enumeration order.
        let reverified = (1..=w.k as u64).all(|i| is_value(form, &(&a + i)).is_none());
        if !reverified {
            return Err(Error::certificate(format!(
                "window scan and membership re-verification disagree at h = {h}"
            )));
        }
        return Ok(GapSearchOutcome::Found(GapFind {
            a,
            h,
            windows_scanned: h,
            hits,
            reverified,
        }));
    }
    Ok(GapSearchOutcome::Exhausted(ExhaustedReport { h_max, hits }))
}
