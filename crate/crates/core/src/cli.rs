//! The `tdatalog` command line.
//!
//! Exit codes: 0 success or `yes`, 1 invalid input or a failed self-test,
//! 2 step limit reached or entailment undecided, 3 `no`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::chase::{run_chase, ChaseError, ChaseStatus, StepLimit, StrategyConfig};
use crate::degrees::{DegreeFormat, TruthDegree};
use crate::lang::{
    check_weak_acyclicity, compute_stratification, parse_dataset_with, parse_ground_atom,
    parse_program, Program, StratifyError, WeakAcyclicity,
};
use crate::model::{FuzzyDataset, FuzzyInterpretation};
use crate::oracle::{negative_control, run_suite, Caps};
use crate::reason::{entails, evaluate_stratified, EntailOptions, EntailmentQuery, ReasonError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_INCOMPLETE: u8 = 2;
pub const EXIT_NO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tdatalog",
    version,
    about = "Fuzzy Datalog with existential rules"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Six decimal places.
    #[default]
    Table,
    /// JSON with round-trip degrees.
    Structured,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum CapsArg {
    Tiny,
    #[default]
    Standard,
}

#[derive(Debug, clap::Args)]
pub struct ChaseArgs {
    /// Program file (.tdl).
    pub program: PathBuf,
    /// Dataset file (.tdf); repeatable, files are unioned.
    #[arg(long = "data", required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, default_value = "r-greedy", value_parser = parse_strategy)]
    pub strategy: StrategyConfig,
    #[arg(long = "K", default_value = "1", value_parser = parse_degree)]
    pub k: TruthDegree,
    /// Step cap; without it the cap is derived from the input.
    #[arg(long = "max-steps", conflicts_with = "unbounded")]
    pub max_steps: Option<usize>,
    /// Run without a step cap.
    #[arg(long)]
    pub unbounded: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl ChaseArgs {
    fn limit(&self) -> StepLimit {
        match (self.max_steps, self.unbounded) {
            (Some(n), _) => StepLimit::Bounded(n),
            (None, true) => StepLimit::Unbounded,
            (None, false) => StepLimit::Auto,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and classify a program.
    Check {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Chase a dataset and print the resulting interpretation.
    Run {
        #[command(flatten)]
        args: ChaseArgs,
        /// Write the trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Decide whether a ground goal holds to at least degree c.
    Entail {
        #[command(flatten)]
        args: ChaseArgs,
        #[arg(long)]
        goal: String,
        #[arg(long = "c", default_value = "1", value_parser = parse_degree)]
        c: TruthDegree,
    },
    /// Randomized differential suite against the reference oracles.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        caps: CapsArg,
        /// Run the broken connective fixture instead; it must fail.
        #[arg(long = "negative-control")]
        negative_control: bool,
    },
}

fn parse_strategy(s: &str) -> Result<StrategyConfig, String> {
    s.parse()
        .map_err(|e: crate::chase::UnknownStrategy| e.to_string())
}

fn parse_degree(s: &str) -> Result<TruthDegree, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    TruthDegree::new(v).map_err(|e| e.to_string())
}

/// Runs one command, writing results to `out` and complaints to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Check { program, format } => cmd_check(&program, format, out),
        Command::Run { args, trace } => cmd_run(&args, trace.as_deref(), out, err),
        Command::Entail { args, goal, c } => cmd_entail(&args, &goal, c, out, err),
        Command::Selftest {
            seed,
            caps,
            negative_control,
        } => cmd_selftest(seed, caps, negative_control, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure(u8, String);

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(EXIT_INVALID, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID, message.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| {
        let lines: Vec<String> = e
            .diagnostics
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect();
        invalid(lines.join("\n"))
    })
}

fn load_inputs(args: &ChaseArgs) -> Result<(Program, FuzzyDataset), Failure> {
    let program = load_program(&args.program)?;
    let mut dataset = FuzzyDataset::new();
    for path in &args.data {
        let part = parse_dataset_with(&read(path)?, program.arities()).map_err(|e| {
            let lines: Vec<String> = e
                .diagnostics
                .iter()
                .map(|d| format!("{}:{d}", path.display()))
                .collect();
            invalid(lines.join("\n"))
        })?;
        dataset
            .merge(part)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    dataset
        .check_signature(&program)
        .map_err(|e| invalid(e.to_string()))?;
    Ok((program, dataset))
}

fn stratification_summary(s: &Result<crate::lang::Stratification, StratifyError>) -> String {
    match s {
        Ok(s) => s.to_string(),
        Err(StratifyError::Existentials) => {
            "stratification not applicable (existential variables)".into()
        }
        Err(e) => e.to_string(),
    }
}

fn cmd_check(path: &Path, format: Format, out: &mut dyn Write) -> Result<u8, Failure> {
    let text = read(path)?;
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            match format {
                Format::Table => {
                    for d in &e.diagnostics {
                        writeln!(out, "{}:{d}", path.display())?;
                    }
                }
                Format::Structured => {
                    let diags: Vec<Json> = e
                        .diagnostics
                        .iter()
                        .map(|d| json!({"line": d.line, "col": d.col, "message": d.message}))
                        .collect();
                    writeln!(out, "{}", json!({"ok": false, "diagnostics": diags}))?;
                }
            }
            return Ok(EXIT_INVALID);
        }
    };
    let wa = check_weak_acyclicity(&program);
    let strat = compute_stratification(&program);
    match format {
        Format::Table => {
            writeln!(
                out,
                "{}; {wa}; {}",
                program.fragment(),
                stratification_summary(&strat)
            )?;
            writeln!(out, "rules: {}", program.len())?;
            if let Ok(s) = &strat {
                for (i, rules) in s.strata.iter().enumerate() {
                    let preds: Vec<&str> = s
                        .levels
                        .iter()
                        .filter(|(_, &l)| l == i + 1)
                        .map(|(p, _)| &**p)
                        .collect();
                    let ids: Vec<String> = rules.iter().map(|r| format!("r{r}")).collect();
                    writeln!(
                        out,
                        "stratum {}: {} ({})",
                        i + 1,
                        preds.join(", "),
                        ids.join(", ")
                    )?;
                }
            }
        }
        Format::Structured => {
            let cycle: Vec<String> = match &wa {
                WeakAcyclicity::WeaklyAcyclic => Vec::new(),
                WeakAcyclicity::NotWeaklyAcyclic { cycle } => {
                    cycle.iter().map(ToString::to_string).collect()
                }
            };
            let strata = match &strat {
                Ok(s) => json!(s.strata),
                Err(_) => Json::Null,
            };
            let doc = json!({
                "ok": true,
                "fragment": program.fragment().to_string(),
                "rules": program.len(),
                "weakly_acyclic": wa.is_weakly_acyclic(),
                "cycle": cycle,
                "stratifiable": strat.is_ok(),
                "stratification": stratification_summary(&strat),
                "strata": strata,
            });
            writeln!(out, "{doc}")?;
        }
    }
    Ok(EXIT_OK)
}

fn degree_format(format: Format) -> DegreeFormat {
    match format {
        Format::Table => DegreeFormat::Fixed,
        Format::Structured => DegreeFormat::RoundTrip,
    }
}

fn write_interpretation(
    out: &mut dyn Write,
    interp: &FuzzyInterpretation,
    format: Format,
    status: &str,
    steps: Option<usize>,
) -> std::io::Result<()> {
    match format {
        Format::Table => out.write_all(interp.dump(DegreeFormat::Fixed).as_bytes()),
        Format::Structured => {
            let atoms: Vec<Json> = interp
                .entries()
                .into_iter()
                .map(|(a, d)| json!({"atom": a.to_string(), "degree": d.value()}))
                .collect();
            let doc = json!({"status": status, "steps": steps, "atoms": atoms});
            writeln!(out, "{doc}")
        }
    }
}

fn chase_failure(e: ChaseError) -> Failure {
    invalid(e.to_string())
}

fn cmd_run(
    args: &ChaseArgs,
    trace: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, Failure> {
    let (program, dataset) = load_inputs(args)?;
    if !program.is_semipositive() {
        if trace.is_some() {
            return Err(invalid("programs with unary operators on derived predicates are evaluated stratum by stratum and have no single trace"));
        }
        if !args.k.is_one() {
            return Err(invalid(ReasonError::KNotSupported(args.k).to_string()));
        }
        let interp = evaluate_stratified(&program, &dataset).map_err(|e| invalid(e.to_string()))?;
        write_interpretation(out, &interp, args.format, "completed", None)?;
        return Ok(EXIT_OK);
    }
    let config = args
        .strategy
        .clone()
        .with_k(args.k)
        .with_max_steps(args.limit());
    let res = run_chase(&program, &dataset, config).map_err(chase_failure)?;
    if let Some(path) = trace {
        fs::write(path, res.trace_json_lines())
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    let complete = res.status == ChaseStatus::Completed;
    let status = if complete {
        "completed"
    } else {
        "step_limit_exceeded"
    };
    write_interpretation(
        out,
        &res.interpretation,
        args.format,
        status,
        Some(res.trace.len()),
    )?;
    if complete {
        Ok(EXIT_OK)
    } else {
        writeln!(
            err,
            "step limit exceeded after {} steps; an active trigger remains",
            res.trace.len()
        )?;
        Ok(EXIT_INCOMPLETE)
    }
}

fn cmd_entail(
    args: &ChaseArgs,
    goal: &str,
    c: TruthDegree,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, Failure> {
    let (program, dataset) = load_inputs(args)?;
    let goal = parse_ground_atom(goal).map_err(|e| invalid(format!("goal: {e}")))?;
    let query = EntailmentQuery::new(goal, c).with_k(args.k);
    let options = EntailOptions {
        activity: args.strategy.activity,
        max_steps: args.limit(),
    };
    match entails(&program, &dataset, &query, &options) {
        Ok(e) => {
            let word = if e.answer { "yes" } else { "no" };
            match args.format {
                Format::Table => writeln!(
                    out,
                    "{word} {}",
                    degree_format(args.format).render(e.degree)
                )?,
                Format::Structured => writeln!(
                    out,
                    "{}",
                    json!({"answer": word, "degree": e.degree.value(), "c": c.value(), "K": args.k.value()})
                )?,
            }
            Ok(if e.answer { EXIT_OK } else { EXIT_NO })
        }
        Err(e @ ReasonError::Undecided { .. }) => {
            writeln!(out, "undecided")?;
            writeln!(err, "{e}")?;
            Ok(EXIT_INCOMPLETE)
        }
        Err(e) => Err(invalid(e.to_string())),
    }
}

fn cmd_selftest(
    seed: u64,
    caps: CapsArg,
    negative: bool,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    if negative {
        let report = negative_control();
        write!(out, "{report}")?;
        writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" })?;
        return Ok(if report.passed() {
            EXIT_OK
        } else {
            EXIT_INVALID
        });
    }
    let caps = match caps {
        CapsArg::Tiny => Caps::TINY,
        CapsArg::Standard => Caps::STANDARD,
    };
    let report = run_suite(seed, &caps);
    write!(out, "{report}")?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn entail_requires_goal() {
        let r = Cli::try_parse_from(["tdatalog", "entail", "p.tdl", "--data", "d.tdf"]);
        assert!(r.is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "tdatalog",
            "run",
            "p.tdl",
            "--data",
            "a.tdf",
            "--data",
            "b.tdf",
            "--strategy",
            "so-fifo",
            "--K",
            "0.5",
            "--max-steps",
            "10",
        ])
        .unwrap();
        let Command::Run { args, trace } = cli.command else {
            panic!("run expected")
        };
        assert_eq!(args.data.len(), 2);
        assert_eq!(args.strategy.strategy_name(), "so-fifo");
        assert_eq!(args.k.value(), 0.5);
        assert_eq!(args.limit(), StepLimit::Bounded(10));
        assert!(trace.is_none());
        assert!(
            Cli::try_parse_from(["tdatalog", "run", "p", "--data", "d", "--K", "1.5"]).is_err()
        );
        assert!(
            Cli::try_parse_from(["tdatalog", "run", "p", "--data", "d", "--strategy", "x"])
                .is_err()
        );
    }
}
