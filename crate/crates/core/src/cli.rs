//! Command-line front end. Exit codes: 0 success, 1 witness found, 2 invalid
//! rule, 3 parse error, 4 inexpressible conversion, 5 budget exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{self, AuditBudget, Status};
use crate::error::Error;
use crate::io;
use crate::rule::Rule;
use crate::transform::{self, Representation};
use crate::validation::ViolationCode;

#[derive(Debug, Parser)]
#[command(
    name = "peakdip",
    version,
    about = "Two-step voting rules for single-peaked and single-dipped agents"
)]
pub struct Cli {
    /// Worker threads for audits and tabulation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a rule file against the conditions of its representation.
    Validate { rule: PathBuf },
    /// Evaluate a rule on a profile file.
    Eval {
        rule: PathBuf,
        profile: PathBuf,
        /// Also print the first-step element and second-step counts.
        #[arg(long)]
        trace: bool,
    },
    /// Translate a rule into the other representation.
    Convert {
        rule: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Write the converted rule here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Search for manipulations and anonymity violations.
    Audit {
        rule: PathBuf,
        /// Comma-separated subset of sp, gsp, anon.
        #[arg(long, value_delimiter = ',', default_values_t = vec![Check::Sp, Check::Gsp, Check::Anon])]
        checks: Vec<Check>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Add wall-clock time to each record (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Print the outcome of every profile.
    Table {
        rule: PathBuf,
        #[arg(long, default_value_t = AuditBudget::default().max_exhaustive)]
        max_exhaustive: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Median,
    Coalition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    Sp,
    Gsp,
    Anon,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Check::Sp => "sp",
            Check::Gsp => "gsp",
            Check::Anon => "anon",
        })
    }
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Seed for the sampled regime.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest profile space searched exhaustively.
    #[arg(long, default_value_t = AuditBudget::default().max_exhaustive)]
    max_exhaustive: u64,
    /// Profiles drawn when the space exceeds the exhaustive budget.
    #[arg(long, default_value_t = AuditBudget::default().samples)]
    samples: u64,
    /// Largest coalition tried by the group search.
    #[arg(long, default_value_t = AuditBudget::default().coalition_cap)]
    coalition_cap: usize,
}

impl BudgetArgs {
    fn budget(&self) -> AuditBudget {
        AuditBudget {
            max_exhaustive: self.max_exhaustive,
            samples: self.samples,
            seed: self.seed,
            coalition_cap: self.coalition_cap,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invalid(_) | Error::Unsatisfiable(_) => 2,
        Error::Inexpressible(_) => 4,
        Error::BudgetExceeded { .. } | Error::GuardExceeded { .. } => 5,
        _ => 3,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 3,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn load_rule(path: &Path) -> Result<Rule, Failure> {
    Ok(io::parse_rule(&read(path)?)?)
}

/// Loads a rule and rejects it with exit code 2 unless it validates.
fn load_valid_rule(path: &Path) -> Result<Rule, Failure> {
    let rule = load_rule(path)?;
    let report = rule.validate();
    if !report.is_ok() {
        return Err(Error::Invalid(report.violations).into());
    }
    Ok(rule)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 3;
        }
    };
    match dispatch(cli.command, &pool, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(
    command: Command,
    pool: &rayon::ThreadPool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let emit = |e: std::io::Error| Failure {
        code: 3,
        message: format!("cannot write output: {e}"),
    };
    match command {
        Command::Validate { rule } => validate(&rule, out),
        Command::Eval { rule, profile, trace } => {
            let rule = load_valid_rule(&rule)?;
            let profile = io::parse_profile(&read(&profile)?, &rule)?;
            let t = rule.trace(&profile)?;
            let space = rule.space();
            writeln!(out, "{}", io::show_point(space, t.outcome)).map_err(emit)?;
            if trace {
                match t.counts {
                    Some((ca, cd)) => writeln!(out, "step1={} counts=({ca},{cd})", space.display(t.first_step)),
                    None => writeln!(out, "step1={}", space.display(t.first_step)),
                }
                .map_err(emit)?;
            }
            Ok(0)
        }
        Command::Convert {
            rule,
            to,
            out: path,
            budget,
        } => {
            let source = load_valid_rule(&rule)?;
            let to = match to {
                Target::Median => Representation::Median,
                Target::Coalition => Representation::Coalition,
            };
            let (converted, report) = transform::convert(&source, to)?;
            let text = io::rule_to_json(&converted);
            let check = pool.install(|| audit::check_equivalence(&source, &converted, &budget.budget()))?;
            let mut log: Vec<String> = report.notes.iter().map(|n| format!("note: {n}")).collect();
            log.push(format!(
                "behaviorally equal: {} ({}, {} profiles)",
                match check.status() {
                    Status::Pass => "yes",
                    Status::PartialCoverage => "no difference found",
                    Status::Witness => "NO",
                },
                match check.coverage {
                    audit::Coverage::Exhaustive => "exhaustive",
                    audit::Coverage::Sampled { .. } => "sampled",
                },
                check.profiles
            ));
            if let Some(w) = &check.witness {
                log.push(io::witness_json(source.space(), w).to_string());
            }
            match path {
                Some(p) => {
                    fs::write(&p, &text).map_err(|e| Failure {
                        code: 3,
                        message: format!("cannot write {}: {e}", p.display()),
                    })?;
                    for line in &log {
                        writeln!(out, "{line}").map_err(emit)?;
                    }
                }
                None => {
                    out.write_all(text.as_bytes()).map_err(emit)?;
                    for line in &log {
                        writeln!(err, "{line}").map_err(emit)?;
                    }
                }
            }
            Ok(if check.witness.is_some() { 1 } else { 0 })
        }
        Command::Audit {
            rule,
            checks,
            budget,
            timing,
        } => {
            let rule = load_valid_rule(&rule)?;
            let budget = budget.budget();
            let mut found = false;
            let mut seen = Vec::new();
            for check in checks {
                if seen.contains(&check) {
                    continue;
                }
                seen.push(check);
                let start = Instant::now();
                let result = pool.install(|| match check {
                    Check::Sp => audit::find_manipulation(&rule, &budget),
                    Check::Gsp => audit::find_group_manipulation(&rule, &budget),
                    Check::Anon => audit::check_type_anonymity(&rule, &budget),
                });
                let elapsed = timing.then(|| start.elapsed().as_millis());
                found |= result.witness.is_some();
                writeln!(out, "{}", io::audit_json(rule.space(), &result, elapsed)).map_err(emit)?;
            }
            Ok(if found { 1 } else { 0 })
        }
        Command::Table { rule, max_exhaustive } => {
            let rule = load_valid_rule(&rule)?;
            let budget = AuditBudget {
                max_exhaustive,
                ..Default::default()
            };
            let table = pool.install(|| audit::tabulate(&rule, &budget))?;
            let space = rule.space();
            let mut text = String::new();
            for (p, o) in table.iter() {
                text.push_str(&format!(
                    "peaks={} dips={} outcome={}\n",
                    io::show_points(space, &p.peaks),
                    io::show_points(space, &p.dips),
                    io::show_point(space, o)
                ));
            }
            out.write_all(text.as_bytes()).map_err(emit)?;
            Ok(0)
        }
    }
}

const MEDIAN_CHECKS: &[ViolationCode] = &[
    ViolationCode::PhantomCount,
    ViolationCode::LowestPhantom,
    ViolationCode::HighestPhantom,
    ViolationCode::PairPhantomWithoutDipped,
    ViolationCode::QuotaKeys,
    ViolationCode::QuotaBounds,
    ViolationCode::QuotaAntichain,
    ViolationCode::QuotaMinimalPeaked,
    ViolationCode::QuotaCount,
];

const COALITION_CHECKS: &[ViolationCode] = &[
    ViolationCode::RangeLow,
    ViolationCode::RangeHigh,
    ViolationCode::RangeInterior,
    ViolationCode::CoalitionBounds,
    ViolationCode::CoalitionMonotone,
    ViolationCode::EmptyCoalition,
    ViolationCode::CoalitionSizeClosure,
    ViolationCode::NotWellDefined,
    ViolationCode::DecisiveKeys,
    ViolationCode::DecisiveNoDipped,
    ViolationCode::DecisiveCoverage,
    ViolationCode::DecisiveAntichain,
    ViolationCode::DecisiveCountClosure,
];

fn validate(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let rule = load_rule(path)?;
    let report = rule.validate();
    let checks = match rule {
        Rule::Median(_) => MEDIAN_CHECKS,
        Rule::Coalition(_) => COALITION_CHECKS,
    };
    let mut text = String::new();
    for &code in checks {
        let failed: Vec<_> = report.violations.iter().filter(|v| v.code == code).collect();
        if failed.is_empty() {
            text.push_str(&format!("ok {}\n", code.code()));
        }
        for v in failed {
            text.push_str(&format!("violation {v}\n"));
        }
    }
    for note in &report.anonymity_notes {
        text.push_str(&format!("note {note} (rule not declared type-anonymous)\n"));
    }
    for w in &report.warnings {
        text.push_str(&format!("warning {w}\n"));
    }
    text.push_str(if report.is_ok() { "valid\n" } else { "invalid\n" });
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: 3,
        message: format!("cannot write output: {e}"),
    })?;
    Ok(if report.is_ok() { 0 } else { 2 })
}
