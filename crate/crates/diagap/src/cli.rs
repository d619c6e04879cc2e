//! Batch command-line front end: parses a [`RunConfig`], dispatches to the
//! library modules, and renders a flat report as text, JSON, or CSV.
//!
//! Exit codes: 0 success, 1 domain rejection (bad input, budget), 2 internal
//! inconsistency (certificate mismatch — never silent).

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::path::PathBuf;

use crate::counting::{count_general, count_squarefree, CountValue, DiagonalForm};
use crate::cyclotomic::{jacobi_sum, make_context};
use crate::equidist::{density_report, discrepancy};
use crate::exceptional::{char_image, is_exceptional_kummer, is_exceptional_pattern};
use crate::gapcraft::{
    build_witness, check_witness, per_residue_epsilons, ratio_to_string,
    GapWitness, SelectionPolicy,
};
use crate::sieve::{
    find_explicit_gap, max_gap, sieve_values_with_budget, GapSearchOutcome, DEFAULT_BIT_BUDGET,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// Top-level batch configuration: one subcommand per pipeline stage.
#[derive(Debug, Parser)]
#[command(
    name = "diagap",
    about = "Exact congruence counts and certified gaps for diagonal cubic and quartic forms"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long = "out", global = true, value_enum, default_value = "text")]
    pub out: OutputFormat,
    /// Cache directory for prime scans (overrides the environment variable).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker pool size (0 = all cores). Results never depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct FormArg {
    /// Diagonal form as `<degree>:<c1>,<c2>,...`, e.g. `3:1,1,1`.
    #[arg(long)]
    pub form: String,
}

impl FormArg {
    fn parse(&self) -> Result<DiagonalForm> {
        DiagonalForm::parse(&self.form)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact solution count r_F(m, M) for a prime or squarefree modulus.
    Count {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        modulus: u64,
        #[arg(long, default_value_t = 0)]
        residue: u64,
    },
    /// Cyclotomic data at a prime: canonical character, Jacobi sum, H term.
    Jacobi {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        prime: u64,
    },
    /// Exceptional-form classification with certificate.
    Classify {
        #[command(flatten)]
        form: FormArg,
    },
    /// Empirical equidistribution report over primes up to the limit.
    Equidist {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "limit", short = 'T')]
        limit: u64,
        /// Threshold β for the density statistic Pr[2·Re H ≤ −β].
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
    /// Build or check a certified gap witness.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Sieve the value set on [0, N) and optionally export the bitset.
    Sieve {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "limit", short = 'N')]
        limit: u64,
        /// Write the raw bitset export here.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Longest gap in the sieved value set on [0, N).
    Maxgap {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "limit", short = 'N')]
        limit: u64,
    },
    /// Scan a witness progression for an explicit verified gap.
    Findgap {
        #[command(flatten)]
        form: FormArg,
        /// Witness JSON file.
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        hmax: u64,
        /// Work budget in search steps.
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// Build a witness: select primes, bin them, certify epsilon exactly.
    Build {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "gap-length", short = 'K')]
        gap_length: u32,
        /// Target epsilon as `num/den` (default 1/(2K)).
        #[arg(long)]
        epsilon: Option<String>,
        /// Selection threshold β as `num/den`.
        #[arg(long, default_value = "1/2")]
        beta: String,
        /// Prime scan bound T.
        #[arg(long = "limit", short = 'T', default_value_t = 10_000)]
        limit: u64,
        /// Prime budget.
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Write the witness JSON here.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Re-verify a witness file from scratch.
    Check {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        file: PathBuf,
    },
}

/// A flat, ordered report: rendered as `key: value` lines, a JSON object, or
/// a CSV header + row.
#[derive(Debug, Default)]
pub struct Report {
    pub fields: Vec<(String, String)>,
}

impl Report {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self
                .fields
                .iter()
                .map(|(k, v)| format!("{k}: {v}"))
                .collect::<Vec<_>>()
                .join("\n"),
            OutputFormat::Json => {
                let mut map = serde_json::Map::new();
                for (k, v) in &self.fields {
                    map.insert(k.clone(), serde_json::Value::String(v.clone()));
                }
                serde_json::to_string_pretty(&serde_json::Value::Object(map)).unwrap()
            }
            OutputFormat::Csv => {
                let esc = |s: &str| {
                    if s.contains([',', '"', '\n']) {
                        format!("\"{}\"", s.replace('"', "\"\""))
                    } else {
                        s.to_string()
                    }
                };
                let header: Vec<String> = self.fields.iter().map(|(k, _)| esc(k)).collect();
                let row: Vec<String> = self.fields.iter().map(|(_, v)| esc(v)).collect();
                format!("{}\n{}", header.join(","), row.join(","))
            }
        }
    }
}

/// Execute the configured subcommand and return its report.
pub fn run(config: &RunConfig) -> Result<Report> {
    if config.threads > 0 {
        // Best-effort: ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    let cache_dir = config.cache_dir.as_deref();
    let mut report = Report::default();
    match &config.command {
        Command::Count {
            form,
            modulus,
            residue,
        } => {
            let form = form.parse()?;
            if *modulus == 0 {
                return Err(Error::domain("modulus must be positive"));
            }
            let m = BigUint::from(*residue % *modulus);
            let result = if crate::arith::is_prime(*modulus) {
                count_general(&form, &m, *modulus)?
            } else {
                // Squarefree composite: split into primes by trial division.
                let mut rest = *modulus;
                let mut primes = Vec::new();
                let mut d = 2u64;
                while d * d <= rest {
                    if rest % d == 0 {
                        primes.push(d);
                        rest /= d;
                        if rest % d == 0 {
                            return Err(Error::domain(format!(
                                "modulus {modulus} is not squarefree (divisible by {d}²)"
                            )));
                        }
                    }
                    d += 1;
                }
                if rest > 1 {
                    primes.push(rest);
                }
                count_squarefree(&form, &m, &primes)?
            };
            report.push("form", &form);
            report.push("modulus", modulus);
            report.push("residue", residue % modulus);
            match &result.value {
                CountValue::Exact(n) => report.push("count", n),
                CountValue::Interval { lo, hi } => {
                    report.push("count_lo", lo);
                    report.push("count_hi", hi);
                }
            }
            report.push("method", format!("{:?}", result.method));
            report.push("ratio", ratio_to_string(&result.ratio));
        }
        Command::Jacobi { form, prime } => {
            let form = form.parse()?;
            let ctx = make_context(form.s, *prime)?;
            report.push("degree", form.s);
            report.push("prime", prime);
            report.push("root", ctx.root);
            let pi = jacobi_sum(&ctx, 1, 1)?;
            report.push("pi", &pi);
            report.push("norm", pi.norm());
            report.push("t", crate::cyclotomic::h_term_two_re(&form, &ctx)?);
            if form.s == 4 {
                report.push("k", crate::cyclotomic::k_term(&form, &ctx)?);
            }
        }
        Command::Classify { form } => {
            let form = form.parse()?;
            let (kummer, certificate) = is_exceptional_kummer(&form)?;
            let pattern = is_exceptional_pattern(&form)?;
            if kummer != pattern {
                return Err(Error::certificate(format!(
                    "classifier disagreement on {form}: kummer says {kummer}, pattern says {pattern}"
                )));
            }
            report.push("form", &form);
            report.push("exceptional", kummer);
            match certificate {
                Some(point) => report.push("missing_point", point),
                None => report.push("missing_point", "none"),
            }
            let image: Vec<String> = char_image(&form)?
                .into_iter()
                .map(|p| p.to_string())
                .collect();
            report.push("character_image", image.join(" "));
        }
        Command::Equidist { form, limit, beta } => {
            let form = form.parse()?;
            let dr = density_report(&form, *limit, *beta, None, cache_dir)?;
            report.push("form", &form);
            report.push("limit", limit);
            report.push("beta", beta);
            report.push("samples", dr.samples);
            report.push("observed", dr.observed);
            report.push("expected", dr.expected);
            report.push("observed_count", dr.observed_absolute);
            report.push("discrepancy", discrepancy(&form, *limit, cache_dir)?);
        }
        Command::Witness(WitnessCommand::Build {
            form,
            gap_length,
            epsilon,
            beta,
            limit,
            budget,
            file,
        }) => {
            let form = form.parse()?;
            let target = epsilon
                .as_deref()
                .map(crate::gapcraft::ratio_from_string)
                .transpose()?;
            let mut policy = SelectionPolicy::new(1, 2, *limit, *budget);
            policy.beta = crate::gapcraft::ratio_from_string(beta)?;
            policy.cache_dir = config.cache_dir.clone();
            let witness = build_witness(&form, *gap_length, target, &policy)?;
            witness_report(&mut report, &witness);
            let json = witness.to_json()?;
            if let Some(path) = file {
                std::fs::write(path, &json)?;
                report.push("file", path.display());
            } else {
                return Ok(Report {
                    fields: vec![("witness".into(), json)],
                });
            }
        }
        Command::Witness(WitnessCommand::Check { form, file }) => {
            let form = form.parse()?;
            let witness = GapWitness::from_json(&std::fs::read_to_string(file)?)?;
            let eps = check_witness(&form, &witness)?;
            witness_report(&mut report, &witness);
            report.push("verified_epsilon", ratio_to_string(&eps));
            report.push("verified", true);
        }
        Command::Sieve { form, limit, file } => {
            let form = form.parse()?;
            let bits = sieve_values_with_budget(&form, *limit, DEFAULT_BIT_BUDGET)?;
            report.push("form", &form);
            report.push("limit", limit);
            report.push("values", bits.count_ones());
            if let Some(path) = file {
                std::fs::write(path, bits.export())?;
                report.push("file", path.display());
            }
        }
        Command::Maxgap { form, limit } => {
            let form = form.parse()?;
            let bits = sieve_values_with_budget(&form, *limit, DEFAULT_BIT_BUDGET)?;
            let (start, length) = max_gap(&bits)?;
            report.push("form", &form);
            report.push("limit", limit);
            report.push("gap_start", start);
            report.push("gap_length", length);
        }
        Command::Findgap {
            form,
            file,
            hmax,
            budget,
        } => {
            let form = form.parse()?;
            let witness = GapWitness::from_json(&std::fs::read_to_string(file)?)?;
            report.push("form", &form);
            report.push("K", witness.k);
            report.push("M", &witness.big_m);
            match find_explicit_gap(&form, &witness, *hmax, *budget)? {
                GapSearchOutcome::Found(gap) => {
                    report.push("found", true);
                    report.push("a", &gap.a);
                    report.push("h", gap.h);
                    report.push("windows_scanned", gap.windows_scanned);
                    report.push("hits_before", gap.hits);
                    report.push("reverified", gap.reverified);
                    for i in 1..=witness.k as u64 {
                        report.push(
                            &format!("check_a_plus_{i}"),
                            format!("{} not represented", &gap.a + BigUint::from(i)),
                        );
                    }
                }
                GapSearchOutcome::Exhausted(r) => {
                    report.push("found", false);
                    report.push("h_max", r.h_max);
                    report.push("hits", r.hits);
                    report.push("hit_rate", format!("{:.4}", r.hit_rate()));
                    let bound = (BigRational::from_integer(witness.k.into())
                        * &witness.certified_epsilon)
                        .to_f64()
                        .unwrap_or(f64::INFINITY);
                    report.push("certified_hit_bound", format!("{:.4}", bound.min(1.0)));
                }
            }
        }
    }
    Ok(report)
}

fn witness_report(report: &mut Report, w: &GapWitness) {
    report.push("form", &w.form);
    report.push("K", w.k);
    report.push("primes", w.per_prime_ratios.len());
    for (i, bin) in w.bins.iter().enumerate() {
        let ps: Vec<String> = bin.iter().map(|p| p.to_string()).collect();
        report.push(&format!("bin_{}", i + 1), ps.join(" "));
    }
    report.push("m", &w.m);
    report.push("M", &w.big_m);
    for (i, eps) in per_residue_epsilons(w).iter().enumerate() {
        report.push(
            &format!("epsilon_{}", i + 1),
            format!(
                "{} ~ {:.6}",
                ratio_to_string(eps),
                eps.to_f64().unwrap_or(f64::NAN)
            ),
        );
    }
    report.push("target_epsilon", ratio_to_string(&w.target_epsilon));
    report.push("certified_epsilon", ratio_to_string(&w.certified_epsilon));
    report.push("certified", w.certified);
}

/// Map an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Certificate(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run_args(args: &[&str]) -> Result<Report> {
        let config = RunConfig::try_parse_from(args)
            .map_err(|e| Error::domain(e.to_string()))?;
        run(&config)
    }

    fn field<'r>(report: &'r Report, key: &str) -> &'r str {
        &report
            .fields
            .iter()
            .find(|(k, _)| k == key)
            .unwrap_or_else(|| panic!("missing field {key}"))
            .1
    }

    #[test]
    fn count_example() {
        let r = run_args(&[
            "diagap", "count", "--form", "3:1,1,1", "--modulus", "7", "--residue", "0",
        ])
        .unwrap();
        assert_eq!(field(&r, "count"), "55");
    }

    #[test]
    fn classify_examples() {
        let r = run_args(&["diagap", "classify", "--form", "4:1,1,4,4"]).unwrap();
        assert_eq!(field(&r, "exceptional"), "true");
        let r = run_args(&["diagap", "classify", "--form", "4:1,1,1,1"]).unwrap();
        assert_eq!(field(&r, "exceptional"), "false");
    }

    #[test]
    fn maxgap_example() {
        let r = run_args(&["diagap", "maxgap", "--form", "3:1,1,1", "-N", "100"]).unwrap();
        assert_eq!(field(&r, "gap_start"), "43");
        assert_eq!(field(&r, "gap_length"), "10");
    }

    #[test]
    fn witness_build_check_round_trip() {
        let dir = std::env::temp_dir().join(format!("diagap-cli-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.json");
        let r = run_args(&[
            "diagap", "witness", "build", "--form", "3:1,1,1", "-K", "2", "--epsilon", "9/10",
            "-T", "2000", "--budget", "12", "--file", path.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(field(&r, "certified"), "true");
        // JSON output round-trips: the built file is accepted verbatim.
        let r = run_args(&[
            "diagap", "witness", "check", "--form", "3:1,1,1", "--file", path.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(field(&r, "verified"), "true");

        // Tampered file → certificate error, exit code 2, failing prime named.
        let text = std::fs::read_to_string(&path).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let entry = &mut doc["per_prime_ratios"][0];
        let prime = entry["p"].as_u64().unwrap();
        let ratio = entry["ratios"][0].as_str().unwrap().to_string();
        entry["ratios"][0] = serde_json::Value::String(format!("1{ratio}"));
        let tampered_path = dir.join("tampered.json");
        std::fs::write(&tampered_path, serde_json::to_string(&doc).unwrap()).unwrap();
        let err = run_args(&[
            "diagap", "witness", "check", "--form", "3:1,1,1", "--file",
            tampered_path.to_str().unwrap(),
        ])
        .unwrap_err();
        assert_eq!(exit_code(&err), 2, "got: {err}");
        assert!(err.to_string().contains(&prime.to_string()));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn output_formats() {
        let config = RunConfig::try_parse_from([
            "diagap", "count", "--form", "3:1,1,1", "--modulus", "7", "--out", "json",
        ])
        .unwrap();
        let r = run(&config).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.render(OutputFormat::Json)).unwrap();
        assert_eq!(v["count"], "55");
        let csv = r.render(OutputFormat::Csv);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("form,modulus"));
        assert!(lines.next().unwrap().contains("55"));
    }

    #[test]
    fn malformed_form_is_domain_error() {
        let err = run_args(&["diagap", "count", "--form", "5:1,1,1", "--modulus", "7"])
            .unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }
}
