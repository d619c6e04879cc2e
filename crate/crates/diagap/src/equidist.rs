//! Prime scans collecting (Re H, K) statistics and empirical tests of the
//! arccos-law densities, including an Erdős–Turán-style discrepancy statistic.
//!
//! Samples are computed from exact Jacobi sums (integer pairs); floating point
//! enters only in the final normalized Re H. Scans are chunked by prime range
//! and cached on disk, one file per (form, range), with atomic whole-file
//! replacement so concurrent writers are safe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::arith::primes_in;
use crate::counting::DiagonalForm;
use crate::cyclotomic::{classify_tuple, h_term_two_re, k_term, make_context};
use crate::exceptional::CharacterImagePoint;
use crate::{Error, Result};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "DIAGAP_CACHE_DIR";

/// Prime-range chunk size for scan caching.
const CHUNK: u64 = 100_000;

/// Cache format version; bump when the line format changes.
const CACHE_VERSION: u32 = 1;

/// One scanned prime: the exact integer `t = 2·Re(χ̄(Πa)·π)` (s = 3) resp.
/// `2·Re(χ̄(Πa)·π²)` (s = 4), plus the quartic K term and image point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSample {
    pub p: u64,
    /// Exact numerator: Re H = t / (2√p) for s = 3, t / (2q) for s = 4.
    pub t: i64,
    pub k: Option<i64>,
    pub class_point: Option<CharacterImagePoint>,
}

impl PrimeSample {
    /// Normalized Re H ∈ [−1, 1]; the only floating-point conversion.
    pub fn re_h(&self, s: u8) -> f64 {
        if s == 3 {
            self.t as f64 / (2.0 * (self.p as f64).sqrt())
        } else {
            self.t as f64 / (2.0 * self.p as f64)
        }
    }
}

/// Density test report; both normalizations are stated: `observed` and
/// `expected` are fractions RELATIVE to the scanned progression
/// (p ≡ 1 mod s, p ∤ coeffs); the absolute density among all primes is the
/// relative fraction divided by φ(s) (i.e. halved).
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub t_bound: u64,
    pub beta: f64,
    pub samples: usize,
    pub observed: f64,
    pub expected: f64,
    /// observed / 2: the density normalized over all primes.
    pub observed_absolute: f64,
    pub discrepancy: f64,
}

/// Scan all primes `p ≤ T` with `p ≡ 1 (mod s)`, `p ∤ coefficients`, in
/// ascending order, using the chunk cache when a directory is available.
pub fn scan(form: &DiagonalForm, t_bound: u64, cache_dir: Option<&Path>) -> Result<Vec<PrimeSample>> {
    if t_bound < 2 {
        return Err(Error::domain("scan requires T >= 2"));
    }
    let cache_dir = resolve_cache_dir(cache_dir);
    let mut out = Vec::new();
    let mut lo = 0u64;
    while lo <= t_bound {
        let hi = (lo + CHUNK).min(t_bound + 1);
        let chunk = scan_chunk(form, lo, hi, cache_dir.as_deref())?;
        out.extend(chunk);
        lo = hi;
    }
    Ok(out)
}

fn resolve_cache_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(d) = explicit {
        return Some(d.to_path_buf());
    }
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

/// One chunk `[lo, hi)`: served from cache when possible, else computed in
/// parallel and stored with an atomic rename.
fn scan_chunk(
    form: &DiagonalForm,
    lo: u64,
    hi: u64,
    cache_dir: Option<&Path>,
) -> Result<Vec<PrimeSample>> {
    let path = cache_dir.map(|d| {
        d.join(format!(
            "scan-v{CACHE_VERSION}-{}-{lo}-{hi}.csv",
            form.key_string()
        ))
    });
    if let Some(p) = &path {
        if let Some(cached) = load_chunk(p, form, lo, hi)? {
            return Ok(cached);
        }
    }
    let samples = compute_chunk(form, lo, hi)?;
    if let Some(p) = &path {
        store_chunk(p, form, lo, hi, &samples)?;
    }
    Ok(samples)
}

fn compute_chunk(form: &DiagonalForm, lo: u64, hi: u64) -> Result<Vec<PrimeSample>> {
    let s = form.s;
    let primes: Vec<u64> = primes_in(lo, hi)
        .into_iter()
        .filter(|&p| p % s as u64 == 1 && !form.is_bad_prime(p))
        .collect();
    let mut samples = primes
        .par_iter()
        .map(|&p| -> Result<PrimeSample> {
            let ctx = make_context(s, p)?;
            let t = h_term_two_re(form, &ctx)?;
            let (k, class_point) = if s == 4 {
                let mut exps = [0u8; 4];
                for (i, &a) in form.coeffs.iter().enumerate() {
                    exps[i] = ctx.chi(a % p).expect("p does not divide coefficients");
                }
                let point = CharacterImagePoint {
                    u: classify_tuple(exps).u,
                    u5: ctx.chi_minus_one() as i8,
                };
                (Some(k_term(form, &ctx)?), Some(point))
            } else {
                (None, None)
            };
            Ok(PrimeSample {
                p,
                t,
                k,
                class_point,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by_key(|s| s.p);
    Ok(samples)
}

fn load_chunk(
    path: &Path,
    form: &DiagonalForm,
    lo: u64,
    hi: u64,
) -> Result<Option<Vec<PrimeSample>>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut lines = text.lines();
    let expect_header = chunk_header(form, lo, hi);
    match lines.next() {
        Some(h) if h == expect_header => {}
        // Stale or foreign file: recompute rather than trust it.
        _ => return Ok(None),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Ok(None);
        }
        let parse_err = |what: &str| Error::domain(format!("corrupt cache line ({what}): {line}"));
        let p: u64 = fields[0].parse().map_err(|_| parse_err("p"))?;
        let t: i64 = fields[1].parse().map_err(|_| parse_err("t"))?;
        let k = if fields[2].is_empty() {
            None
        } else {
            Some(fields[2].parse::<i64>().map_err(|_| parse_err("k"))?)
        };
        let class_point = if fields[3].is_empty() {
            None
        } else {
            Some(CharacterImagePoint {
                u: fields[3].parse().map_err(|_| parse_err("u"))?,
                u5: fields[4].parse().map_err(|_| parse_err("u5"))?,
            })
        };
        out.push(PrimeSample {
            p,
            t,
            k,
            class_point,
        });
    }
    Ok(Some(out))
}

fn chunk_header(form: &DiagonalForm, lo: u64, hi: u64) -> String {
    format!(
        "# diagap scan v{CACHE_VERSION} form={} range={lo}..{hi} fields=p,t,k,u,u5",
        form.key_string()
    )
}

fn store_chunk(
    path: &Path,
    form: &DiagonalForm,
    lo: u64,
    hi: u64,
    samples: &[PrimeSample],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = chunk_header(form, lo, hi);
    text.push('\n');
    for s in samples {
        let (k, u, u5) = match (s.k, s.class_point) {
            (Some(k), Some(cp)) => (k.to_string(), cp.u.to_string(), cp.u5.to_string()),
            _ => (String::new(), String::new(), String::new()),
        };
        text.push_str(&format!("{},{},{},{},{}\n", s.p, s.t, k, u, u5));
    }
    // Atomic whole-file replacement: unique temp name, then rename.
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Number of equal angle windows in the discrepancy grid.
const GRID: usize = 64;

/// Sup over grid windows `[φ₁, φ₂] ⊆ [0, π]` of
/// `|observed fraction of arccos(Re H) in window − (φ₂−φ₁)/π|`.
fn discrepancy_of(samples: &[PrimeSample], s: u8) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("discrepancy is undefined with zero samples"));
    }
    let n = samples.len() as f64;
    let mut bins = [0u64; GRID];
    for smp in samples {
        let angle = smp.re_h(s).clamp(-1.0, 1.0).acos(); // in [0, π]
        let idx = ((angle / std::f64::consts::PI) * GRID as f64) as usize;
        bins[idx.min(GRID - 1)] += 1;
    }
    let mut prefix = [0u64; GRID + 1];
    for i in 0..GRID {
        prefix[i + 1] = prefix[i] + bins[i];
    }
    let mut sup: f64 = 0.0;
    for i in 0..GRID {
        for j in i + 1..=GRID {
            let observed = (prefix[j] - prefix[i]) as f64 / n;
            let expected = (j - i) as f64 / GRID as f64;
            sup = sup.max((observed - expected).abs());
        }
    }
    Ok(sup)
}

/// The discrepancy statistic over a full scan.
pub fn discrepancy(form: &DiagonalForm, t_bound: u64, cache_dir: Option<&Path>) -> Result<f64> {
    if t_bound < 100 {
        return Err(Error::domain("discrepancy requires T >= 100"));
    }
    let samples = scan(form, t_bound, cache_dir)?;
    discrepancy_of(&samples, form.s)
}

/// Empirical density of `Re H ≤ β` against the arccos law
/// `arccos(−β)/π` (the relative fraction within the scanned progression).
/// For quartic scans an optional u-class restriction filters the samples
/// first.
pub fn density_report(
    form: &DiagonalForm,
    t_bound: u64,
    beta: f64,
    restriction: Option<CharacterImagePoint>,
    cache_dir: Option<&Path>,
) -> Result<DensityReport> {
    if !(-1.0 < beta && beta <= 1.0) {
        return Err(Error::domain("beta must lie in (-1, 1]"));
    }
    let all = scan(form, t_bound, cache_dir)?;
    let samples: Vec<PrimeSample> = match restriction {
        Some(u) => all
            .into_iter()
            .filter(|s| s.class_point == Some(u))
            .collect(),
        None => all,
    };
    if samples.is_empty() {
        return Err(Error::domain("no samples in scan range"));
    }
    let n = samples.len();
    let hits = samples
        .iter()
        .filter(|s| s.re_h(form.s) <= beta)
        .count();
    let observed = hits as f64 / n as f64;
    let expected = (-beta).acos() / std::f64::consts::PI;
    let disc = discrepancy_of(&samples, form.s)?;
    Ok(DensityReport {
        t_bound,
        beta,
        samples: n,
        observed,
        expected,
        observed_absolute: observed / 2.0,
        discrepancy: disc,
    })
}
