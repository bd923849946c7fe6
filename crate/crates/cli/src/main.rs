use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use strictfeas::certify::VerdictReport;
use strictfeas::facial::{
    certificate_null_vectors, find_reducing_certificate, reduce_until_stable, Diagnosis,
    FacialOptions, ReductionLog,
};
use strictfeas::reproduce::{
    builtin_problem, reproduce, ReproduceOptions, ReproduceReport, SolveSummary, Target,
    BUILTIN_NAMES,
};
use strictfeas::sdp::json::{exact_problem_to_string, load_problem, AnyProblem};
use strictfeas::sdp::StatusTag;
use strictfeas::solver::{diagnostics_report, solve_sdp, SolverOptions};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_TROUBLE: u8 = 2;

/// Diagnose and repair SDPs that fail strict feasibility.
#[derive(Parser, Debug)]
#[command(name = "strictfeas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Flags,
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// Relative duality-gap tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    gap_tol: f64,
    /// Relative residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    feas_tol: f64,
    /// Iteration limit of the interior-point method.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,
    /// Largest denominator tried when rounding certificates.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    max_den: u64,
    /// Relative eigenvalue cutoff for reading the range of a numerical certificate.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eig_threshold: f64,
    /// Output path: the JSON report for solve, diagnose and reproduce; the
    /// problem file for reduce and export.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an SDP file with the interior-point method.
    Solve { file: PathBuf },
    /// Look for a reducing certificate.
    Diagnose { file: PathBuf },
    /// Substitute the implied constraints and write the reduced problem.
    Reduce { file: PathBuf },
    /// Run the built-in reproductions: problem1, problem2, chsh-toy or all.
    Reproduce { target: Target },
    /// Write a built-in problem as JSON.
    Export {
        name: Option<String>,
        /// List the built-in names.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Serialize, Debug, Clone)]
struct OptionsEcho {
    gap_tol: f64,
    feas_tol: f64,
    max_iter: usize,
    max_den: u64,
    eig_threshold: f64,
    seed: Option<u64>,
}

#[derive(Serialize, Debug, Default)]
struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Serialize, Debug)]
struct RunReport {
    command: String,
    inputs: Inputs,
    options: OptionsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnosis: Option<Diagnosis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    null_vectors: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduction: Option<ReductionLog>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    verdicts: Vec<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reproduce: Option<ReproduceReport>,
    timings_ms: BTreeMap<String, f64>,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl Flags {
    fn solver(&self) -> SolverOptions {
        SolverOptions {
            gap_tol: self.gap_tol,
            feas_tol: self.feas_tol,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        }
    }

    fn facial(&self) -> FacialOptions {
        FacialOptions {
            eig_threshold: self.eig_threshold,
            ..FacialOptions::default()
        }
        .with_max_den(self.max_den)
    }
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("STRICTFEAS_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("STRICTFEAS_SEED must be a non-negative integer, got {s:?}")),
        Err(_) => Ok(None),
    }
}

fn load(path: &Path) -> Result<AnyProblem> {
    load_problem(path).map_err(|e| anyhow!("{e}"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn vectors_to_strings(vs: &[Vec<strictfeas::exactnum::QuadExt>]) -> Vec<Vec<String>> {
    vs.iter().map(|v| v.iter().map(ToString::to_string).collect()).collect()
}

struct Run<'a> {
    flags: &'a Flags,
    report: RunReport,
    text: String,
}

impl Run<'_> {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.report
            .timings_ms
            .insert(stage.into(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    fn solve(&mut self, file: &Path) -> Result<u8> {
        let prob = self.time("load", || load(file))?;
        let opts = self.flags.solver();
        let res = self
            .time("solve", || solve_sdp(&prob.to_f64(), &opts))
            .map_err(|e| anyhow!("{e}"))?;
        self.text = diagnostics_report(&res);
        self.report.solve = Some(SolveSummary::from(&res));
        Ok(if res.status.tag == StatusTag::Optimal {
            EXIT_OK
        } else {
            EXIT_TROUBLE
        })
    }

    fn diagnose(&mut self, file: &Path) -> Result<u8> {
        let prob = self.time("load", || load(file))?.to_exact();
        let opts = self.flags.facial();
        let d = self
            .time("diagnose", || find_reducing_certificate(&prob, &opts))
            .map_err(|e| anyhow!("{e}"))?;
        match &d {
            Diagnosis::Reducible(cert) => {
                let vs = certificate_null_vectors(cert);
                self.text = format!(
                    "reducing certificate found ({:?}); {} null vector(s):\n",
                    cert.method,
                    vs.len()
                );
                for v in &vs {
                    let cells: Vec<String> = v.iter().map(ToString::to_string).collect();
                    self.text.push_str(&format!("  ({})\n", cells.join(", ")));
                }
                self.report.null_vectors = Some(vectors_to_strings(&vs));
            }
            Diagnosis::StrictlyFeasible(s) => {
                self.text = if s.tolerance == 0.0 {
                    format!("strictly feasible: {}\n", s.solver_message)
                } else {
                    format!(
                        "strictly feasible (numerical verdict at tolerance {:e}, not a proof): {}\n",
                        s.tolerance, s.solver_message
                    )
                };
                if let Some(e) = s.min_eigenvalue {
                    self.text.push_str(&format!("  smallest eigenvalue at the interior point: {e:.6e}\n"));
                }
            }
        }
        self.report.diagnosis = Some(d);
        Ok(EXIT_OK)
    }

    fn reduce(&mut self, file: &Path) -> Result<u8> {
        let prob = self.time("load", || load(file))?.to_exact();
        let opts = self.flags.facial();
        let (mut reduced, log) = self
            .time("reduce", || reduce_until_stable(&prob, &opts))
            .map_err(|e| anyhow!("{e}"))?;
        let subs: Vec<String> = log.substitutions().map(ToString::to_string).collect();
        if subs.is_empty() {
            self.text = "no variables eliminated\n".into();
        } else {
            reduced.name = format!("{}-reduced", prob.name);
            self.text = format!("{:<12} expression\n", "variable");
            for s in log.substitutions() {
                self.text.push_str(&format!("{:<12} {}\n", s.var, s.expr));
            }
        }
        self.text.push_str(&format!("remaining variables: {}\n", log.remaining_variables.join(", ")));
        let body = exact_problem_to_string(&reduced);
        match &self.flags.out {
            Some(path) => write_file(path, &body)?,
            None if !self.flags.json => self.text.push_str(&body),
            None => {}
        }
        self.report.reduction = Some(log);
        Ok(EXIT_OK)
    }

    fn reproduce(&mut self, target: Target) -> Result<u8> {
        let opts = ReproduceOptions {
            solver: self.flags.solver(),
            facial: self.flags.facial(),
        };
        let r = self.time("reproduce", || reproduce(target, &opts));
        for p in &r.problems {
            self.text.push_str(&format!("{} (certified value {})\n", p.problem, p.certified_value));
            for c in &p.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                self.text.push_str(&format!("  [{mark}] {}: {}\n", c.claim, c.detail));
            }
        }
        let code = if r.passed { EXIT_OK } else { EXIT_ERROR };
        self.text.push_str(if r.passed { "all checks passed\n" } else { "some checks failed\n" });
        self.report.verdicts = r.problems.iter().flat_map(|p| p.verdicts.clone()).collect();
        self.report.reproduce = Some(r);
        Ok(code)
    }

    fn export(&mut self, name: Option<&str>, list: bool) -> Result<u8> {
        if list {
            self.text = BUILTIN_NAMES.join("\n") + "\n";
            return Ok(EXIT_OK);
        }
        let Some(name) = name else {
            bail!("export needs a problem name (see --list)");
        };
        let prob = builtin_problem(name)
            .ok_or_else(|| anyhow!("unknown built-in problem {name:?}; known: {}", BUILTIN_NAMES.join(", ")))?;
        let body = exact_problem_to_string(&prob);
        match &self.flags.out {
            Some(path) => write_file(path, &body)?,
            None => self.text = body,
        }
        Ok(EXIT_OK)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, inputs) = match &cli.command {
        Command::Solve { file } => ("solve", file_input(file)),
        Command::Diagnose { file } => ("diagnose", file_input(file)),
        Command::Reduce { file } => ("reduce", file_input(file)),
        Command::Reproduce { target } => (
            "reproduce",
            Inputs {
                target: Some(target.to_string()),
                ..Inputs::default()
            },
        ),
        Command::Export { name, .. } => (
            "export",
            Inputs {
                name: name.clone(),
                ..Inputs::default()
            },
        ),
    };
    let seed = seed_from_env();
    let flags = &cli.opts;
    let mut run = Run {
        flags,
        report: RunReport {
            command: name.into(),
            inputs,
            options: OptionsEcho {
                gap_tol: flags.gap_tol,
                feas_tol: flags.feas_tol,
                max_iter: flags.max_iter,
                max_den: flags.max_den,
                eig_threshold: flags.eig_threshold,
                seed: seed.as_ref().ok().copied().flatten(),
            },
            solve: None,
            diagnosis: None,
            null_vectors: None,
            reduction: None,
            verdicts: Vec::new(),
            reproduce: None,
            timings_ms: BTreeMap::new(),
            exit_code: EXIT_OK,
            error: None,
        },
        text: String::new(),
    };

    let result = seed.and_then(|_| validate(flags)).and_then(|()| match &cli.command {
        Command::Solve { file } => run.solve(file),
        Command::Diagnose { file } => run.diagnose(file),
        Command::Reduce { file } => run.reduce(file),
        Command::Reproduce { target } => run.reproduce(*target),
        Command::Export { name, list } => run.export(name.as_deref(), *list),
    });
    let code = match result {
        Ok(c) => c,
        Err(e) => {
            run.report.error = Some(format!("{e:#}"));
            EXIT_ERROR
        }
    };
    run.report.exit_code = code;
    finish(run, name)
}

fn file_input(file: &Path) -> Inputs {
    Inputs {
        file: Some(file.display().to_string()),
        ..Inputs::default()
    }
}

fn validate(flags: &Flags) -> Result<()> {
    flags.solver().check().map_err(|e| anyhow!(e))?;
    if !(flags.eig_threshold > 0.0 && flags.eig_threshold < 1.0) {
        bail!("--eig-threshold must lie in (0, 1)");
    }
    if flags.max_den == 0 {
        bail!("--max-den must be at least 1");
    }
    Ok(())
}

fn finish(run: Run<'_>, command: &str) -> ExitCode {
    let Run { flags, report, text } = run;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let writes_report = matches!(command, "solve" | "diagnose" | "reproduce");
    let mut code = report.exit_code;
    if writes_report {
        if let Some(path) = &flags.out {
            if let Err(e) = write_file(path, &json) {
                eprintln!("error: {e:#}");
                code = EXIT_ERROR;
            }
        }
    }
    if flags.json {
        println!("{json}");
    } else {
        print!("{text}");
        if let Some(e) = &report.error {
            eprintln!("error: {e}");
        }
    }
    ExitCode::from(code)
}
