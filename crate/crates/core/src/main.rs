//! Batch front door: parse element, sequence, and relation files, dispatch to
//! the library, and print exact results.
//!
//! Output is deterministic — exact rationals as `a/b`, valuations per the
//! `Valuation` display rules, field elements as coordinate lists — so that
//! identical inputs produce byte-identical reports.  `--machine` switches to
//! one `key=value` line per result.  The `AX_PRECISION` environment variable
//! overrides the certified precision of every parsed or constructed tower.
//! Exit status: 0 on success, 1 on domain errors (printed with the owning
//! module's error name), 2 on parse errors.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num::BigRational;

use axtower::apf;
use axtower::ax;
use axtower::cohomology::{self, IndexSet};
use axtower::error::{Error, Result};
use axtower::oracle;
use axtower::tower::{TowerConfig, TowerElement};
use axtower::twistrec::{self, RelationFile, SequenceFile, TwistRelation, TwistSequence};
use axtower::valuation::{format_rat, Valuation};

#[derive(Parser)]
#[command(
    name = "axtower",
    version,
    about = "Exact Galois oscillation, twisted recurrences and integral \
             cohomology invariants on Kummer towers"
)]
struct Cli {
    /// Emit one machine-readable `key=value` line per result.
    #[arg(long, global = true)]
    machine: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Galois oscillation of the element in FILE.
    Osc { file: PathBuf },

    /// Optimal level-m approximant of the element and the defect v(x - y).
    Approx {
        file: PathBuf,
        /// Tower level of the approximant.
        #[arg(long)]
        m: u32,
    },

    /// Both sides of the oscillation identity, with the per-level table.
    Identity { file: PathBuf },

    /// Oscillation recomputed by the brute-force conjugate oracle.
    Oracle { file: PathBuf },

    /// The optimal constant 1/(p^m(p-1)) next to the classical p/(p-1)^2.
    Constants {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },

    /// Ramification breaks, both different expressions, and the integral.
    Apf {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        n: u32,
    },

    /// Frobenius-twisted recurrences over the residue field.
    #[command(subcommand)]
    Twist(TwistCmd),

    /// Integral cohomology classes and their digit calculus.
    #[command(subcommand)]
    Coh(CohCmd),
}

#[derive(Subcommand)]
enum TwistCmd {
    /// Whether every window of SEQUENCE satisfies RELATION.
    Check {
        sequence: PathBuf,
        relation: PathBuf,
    },

    /// Smallest-order relation satisfied by SEQUENCE, if any.
    Find {
        sequence: PathBuf,
        /// Largest order to search; defaults to half the sequence length.
        #[arg(long)]
        r_max: Option<usize>,
    },

    /// Extend the seed sequence under RELATION to the requested length.
    Gen {
        relation: PathBuf,
        seed: PathBuf,
        #[arg(long)]
        count: usize,
    },

    /// Exhaustive count of the length-LEN solutions of RELATION.
    Count {
        relation: PathBuf,
        #[arg(long)]
        len: usize,
    },
}

#[derive(Subcommand)]
enum CohCmd {
    /// Check the invariant-class conditions and print the certificate.
    Validate { file: PathBuf },

    /// Digit stream of the validated class (one row per eta-power for e > 1).
    Psi {
        file: PathBuf,
        /// Number of digits to extract.
        #[arg(long, default_value_t = 4)]
        count: usize,
    },

    /// Order of the class under multiplication by the base uniformizer.
    Torsion { file: PathBuf },

    /// Valuations along the xi-tower sequence of the class.
    Xiseq {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        s_max: usize,
    },

    /// Linear dependence among the xi-tower elements, as a twist relation.
    Deps {
        file: PathBuf,
        /// Last xi-index to include; defaults to level - 1.
        #[arg(long)]
        s_max: Option<usize>,
    },

    /// Additive witness polynomial of RELATION seeded with the digit PREFIX.
    Witness {
        relation: PathBuf,
        prefix: PathBuf,
        /// Certified precision of the ambient tower (AX_PRECISION overrides).
        #[arg(long, default_value_t = 24)]
        precision: u32,
    },

    /// Valuations of the witness polynomial at its stage-1..n roots.
    Defect {
        relation: PathBuf,
        prefix: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 24)]
        precision: u32,
    },

    /// Newton polygon of degree:valuation points, e.g. `0:1 1:0 2:>=3`.
    Newton {
        #[arg(required = true)]
        points: Vec<String>,
    },

    /// Index combinatorics tau, rho, I and I_r for (p, e, r).
    Indices {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        r: u32,
    },

    /// Canonical slot decomposition of the negative support of the class.
    Support { file: PathBuf },
}

/// Per-subcommand printing: the same keys in both modes, `key = value` lines
/// for reading and `key=value` lines for diffing; `bare` prints the value
/// alone in human mode for single-answer commands.
struct Out {
    machine: bool,
}

impl Out {
    fn kv(&self, key: &str, value: impl Display) {
        if self.machine {
            println!("{key}={value}");
        } else {
            println!("{key} = {value}");
        }
    }

    fn bare(&self, key: &str, value: impl Display) {
        if self.machine {
            println!("{key}={value}");
        } else {
            println!("{value}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out {
        machine: cli.machine,
    };
    match run(&cli.command, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: &Command, out: &Out) -> Result<()> {
    match command {
        Command::Osc { file } => {
            let x = read_element(file)?;
            let report = ax::galois_oscillation(&x)?;
            out.bare("oscillation", &report.oscillation);
            if out.machine {
                println!("level={}", report.level);
                if let Some(i) = report.argmin_index {
                    println!("argmin_index={i}");
                }
            }
            Ok(())
        }
        Command::Approx { file, m } => {
            let x = read_element(file)?;
            let y = ax::best_approximant(&x, *m)?;
            out.kv("defect", ax::approximation_defect(&x, *m)?);
            out.kv("approximant", y.to_json());
            Ok(())
        }
        Command::Identity { file } => {
            let x = read_element(file)?;
            let report = ax::oscillation_identity(&x)?;
            out.kv("oscillation", &report.oscillation);
            out.kv("defect_side", &report.defect_side);
            for (m, defect, constant, sum) in &report.per_level {
                out.kv(
                    &format!("level_{m}"),
                    format!("{defect},{},{sum}", format_rat(constant)),
                );
            }
            match report.tight_m {
                Some(m) => out.kv("tight_m", m),
                None => out.kv("tight_m", "none"),
            }
            out.kv("holds", report.holds);
            Ok(())
        }
        Command::Oracle { file } => {
            let x = read_element(file)?;
            let by_oracle = oracle::cyclotomic_oracle_oscillation(&x)?;
            let by_formula = ax::galois_oscillation(&x)?.oscillation;
            out.kv("oracle", &by_oracle);
            out.kv("formula", &by_formula);
            out.kv("agree", by_oracle == by_formula);
            Ok(())
        }
        Command::Constants { p, m } => {
            if *p < 2 {
                return Err(Error::InvalidConfig("constants need p >= 2".into()));
            }
            let (optimal, classical) = ax::ax_constants(*p, *m);
            out.kv("optimal", format_rat(&optimal));
            out.kv("ax_original", format_rat(&classical));
            Ok(())
        }
        Command::Apf { p, e, n } => {
            let profile = apf::ramification_profile(*n, *p, *e)?;
            let different = apf::different_valuation(*n, *p, *e)?;
            let herbrand = apf::herbrand_integral_check(*n, *p, *e)?;
            out.kv("breaks", join_rats(&profile.breaks));
            out.kv("consistent_breaks", join_rats(&herbrand.breaks_used));
            out.kv("different", format_rat(&different.derivative));
            out.kv("stated_different", format_rat(&different.stated));
            out.kv("different_agree", different.agree);
            out.kv("integral", format_rat(&herbrand.integral));
            out.kv("integral_agrees", herbrand.agrees);
            out.kv("stated_integral_agrees", herbrand.stated_agrees);
            Ok(())
        }
        Command::Twist(cmd) => run_twist(cmd, out),
        Command::Coh(cmd) => run_coh(cmd, out),
    }
}

fn run_twist(command: &TwistCmd, out: &Out) -> Result<()> {
    match command {
        TwistCmd::Check { sequence, relation } => {
            let seq = read_sequence(sequence)?;
            let rel = read_relation(relation)?;
            out.bare("satisfied", twistrec::check_relation(&seq, &rel)?);
            Ok(())
        }
        TwistCmd::Find { sequence, r_max } => {
            let seq = read_sequence(sequence)?;
            let r_max = r_max.unwrap_or(seq.len() / 2);
            match twistrec::find_relation(&seq, r_max)? {
                Some(rel) => print_relation(&rel, out),
                None => out.bare("found", "none"),
            }
            Ok(())
        }
        TwistCmd::Gen {
            relation,
            seed,
            count,
        } => {
            let rel = read_relation(relation)?;
            let seed = read_sequence(seed)?;
            let seq = twistrec::extend_sequence(&rel, seed.terms(), *count)?;
            out.bare("terms", join_elements(seq.terms()));
            Ok(())
        }
        TwistCmd::Count { relation, len } => {
            let rel = read_relation(relation)?;
            out.bare("solutions", twistrec::solution_count(&rel, *len)?);
            Ok(())
        }
    }
}

fn run_coh(command: &CohCmd, out: &Out) -> Result<()> {
    match command {
        CohCmd::Validate { file } => {
            let cls = cohomology::validate_invariant(&read_element(file)?)?;
            out.kv("validated", cls.is_validated());
            out.kv("oscillation", cls.oscillation());
            out.kv("valuation", cls.valuation());
            Ok(())
        }
        CohCmd::Psi { file, count } => {
            let cls = cohomology::validate_invariant(&read_element(file)?)?;
            if cls.config().e() == 1 {
                let digits = cohomology::psi_digits(&cls, *count)?;
                out.bare("digits", join_elements(&digits));
            } else {
                for (j, row) in cohomology::psi_digit_table(&cls, *count)?
                    .iter()
                    .enumerate()
                {
                    out.kv(&format!("row_{}", j + 1), join_elements(row));
                }
            }
            Ok(())
        }
        CohCmd::Torsion { file } => {
            let cls = cohomology::validate_invariant(&read_element(file)?)?;
            out.bare("torsion", cohomology::torsion_check(&cls)?);
            Ok(())
        }
        CohCmd::Xiseq { file, s_max } => {
            let cls = cohomology::validate_invariant(&read_element(file)?)?;
            let xis = cohomology::xi_tower_sequence(&cls, *s_max)?;
            for (s, xi) in xis.iter().enumerate() {
                out.kv(&format!("valuation_{s}"), xi.valuation());
            }
            Ok(())
        }
        CohCmd::Deps { file, s_max } => {
            let x = read_element(file)?;
            let cls = cohomology::validate_invariant(&x)?;
            let s_max = s_max.unwrap_or_else(|| cls.level().saturating_sub(1) as usize);
            let xis = cohomology::xi_tower_sequence(&cls, s_max)?;
            let rel = cohomology::find_K_linear_dependence(&xis)?;
            print_relation(&rel, out);
            Ok(())
        }
        CohCmd::Witness {
            relation,
            prefix,
            precision,
        } => {
            let pol = witness_from_files(relation, prefix, *precision)?;
            out.kv("order", pol.order());
            out.kv("digits", join_elements(pol.digits().terms()));
            out.kv("constant_valuation", pol.constant().valuation());
            if out.machine {
                println!("constant={}", pol.constant().to_json());
            }
            Ok(())
        }
        CohCmd::Defect {
            relation,
            prefix,
            n,
            precision,
        } => {
            let pol = witness_from_files(relation, prefix, *precision)?;
            let p = pol.config().p() as i64;
            for stage in 1..=*n {
                let defect = cohomology::approximate_root_defect(&pol, stage)?;
                let bound = BigRational::new((-1).into(), p.pow(stage + 1).into());
                out.kv(
                    &format!("defect_{stage}"),
                    format!("{defect} bound={}", format_rat(&bound)),
                );
            }
            Ok(())
        }
        CohCmd::Newton { points } => {
            let polygon = cohomology::newton_polygon(&parse_points(points)?)?;
            let segments: Vec<String> = polygon
                .segments()
                .iter()
                .map(|(slope, len)| format!("{}:{len}", format_rat(slope)))
                .collect();
            out.kv("segments", segments.join(" "));
            out.kv(
                "positive_valuation_root",
                polygon.has_positive_valuation_root(),
            );
            out.kv(
                "nonnegative_valuation_root",
                polygon.has_nonnegative_valuation_root(),
            );
            Ok(())
        }
        CohCmd::Indices { p, e, r } => {
            let idx = cohomology::index_sets(*p, *e, *r)?;
            if out.machine {
                println!("tau={}", idx.tau());
                println!("rho={}", idx.rho());
                println!("pairs={}", join_pairs(idx.restricted()));
                println!("count={}", idx.restricted().len());
                println!("bound={}", format_rat(&idx.bound()));
                println!("within_bound={}", idx.bound_holds());
            } else {
                println!("{}", indices_line(&idx));
            }
            Ok(())
        }
        CohCmd::Support { file } => {
            let cls = cohomology::validate_invariant(&read_element(file)?)?;
            let support = cohomology::ramified_support(&cls)?;
            out.kv("slots", support.len());
            for ((i, gamma), beta) in &support {
                out.kv(&format!("beta_{i}_{gamma}"), beta.valuation());
            }
            Ok(())
        }
    }
}

// ---- input plumbing ----

fn env_precision() -> Result<Option<u32>> {
    match std::env::var("AX_PRECISION") {
        Ok(text) => text
            .trim()
            .parse::<u32>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("AX_PRECISION: {text:?} is not a whole number"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(err) => Err(Error::Parse(format!("AX_PRECISION: {err}"))),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|err| Error::Parse(format!("{}: {err}", path.display())))
}

fn read_element(path: &Path) -> Result<TowerElement> {
    let text = read_text(path)?;
    TowerElement::from_json(&text, env_precision()?)
        .map_err(|err| err.at_input(&path.display().to_string()))
}

fn read_sequence(path: &Path) -> Result<TwistSequence> {
    let file: SequenceFile = serde_json::from_str(&read_text(path)?)
        .map_err(|err| Error::Parse(format!("{}: {err}", path.display())))?;
    TwistSequence::from_file(&file)
}

fn read_relation(path: &Path) -> Result<TwistRelation> {
    let file: RelationFile = serde_json::from_str(&read_text(path)?)
        .map_err(|err| Error::Parse(format!("{}: {err}", path.display())))?;
    TwistRelation::from_file(&file)
}

fn witness_from_files(
    relation: &Path,
    prefix: &Path,
    precision: u32,
) -> Result<cohomology::AdditiveWitnessPolynomial> {
    let rel = read_relation(relation)?;
    let seed = read_sequence(prefix)?;
    let precision = env_precision()?.unwrap_or(precision);
    let config = TowerConfig::unramified(Arc::clone(rel.field()), precision)?;
    cohomology::build_witness_polynomial(&config, &rel, seed.terms())
}

/// Parses `degree:valuation` tokens; valuations read as `a/b`, `+inf`, or
/// `>=a/b` (spaceless, so each point stays one shell word).
fn parse_points(tokens: &[String]) -> Result<BTreeMap<usize, Valuation>> {
    let mut points = BTreeMap::new();
    for token in tokens {
        let (degree, val) = token
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("point {token:?}: expected degree:valuation")))?;
        let degree: usize = degree
            .parse()
            .map_err(|_| Error::Parse(format!("point {token:?}: bad degree")))?;
        let val = Valuation::parse(val)
            .ok_or_else(|| Error::Parse(format!("point {token:?}: bad valuation")))?;
        if points.insert(degree, val).is_some() {
            return Err(Error::Parse(format!("degree {degree} given twice")));
        }
    }
    Ok(points)
}

// ---- formatting ----

fn join_rats(values: &[BigRational]) -> String {
    let parts: Vec<String> = values.iter().map(format_rat).collect();
    parts.join(" ")
}

fn join_elements<T: Display>(values: &[T]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    parts.join(" ")
}

fn join_pairs(pairs: &[(u32, u32)]) -> String {
    let parts: Vec<String> = pairs.iter().map(|(i, g)| format!("({i},{g})")).collect();
    parts.join(" ")
}

/// The one-line human form: sorted pairs, the cardinality against the sharp
/// bound, and whether it holds.
fn indices_line(idx: &IndexSet) -> String {
    let verdict = if idx.bound_holds() { "OK" } else { "EXCEEDED" };
    format!(
        "{} |I_r|={} bound={} {verdict}",
        join_pairs(idx.restricted()),
        idx.restricted().len(),
        format_rat(&idx.bound()),
    )
}

fn print_relation(rel: &TwistRelation, out: &Out) {
    if out.machine {
        println!("order={}", rel.order());
        println!("coeffs={}", join_elements(rel.coeffs()));
    } else {
        println!("{}", join_elements(rel.coeffs()));
    }
}
