//! File formats, parallel sampling and the `wact` command line on top of
//! [`wact_core`].

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod file;
pub mod report;

use std::path::Path;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Map, Value};
use wact_core::deform::{self, DeformParams, Direction, PotentialField};
use wact_core::{classify, structure, verify, SamplePlan, Structure};

use cli::{Cli, Command, Options};
pub use error::{CliError, EXIT_MATH, EXIT_OK, EXIT_USAGE};
use exec::Parallel;
pub use file::{PhitildeFile, StructureFile};

/// What a command printed and how the process should exit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stderr: text,
                    ..Outcome::default()
                }
            } else {
                Outcome {
                    stdout: text,
                    ..Outcome::default()
                }
            };
        }
    };
    let exec = Parallel::from_env();
    let mut ctx = Context {
        opts: &cli.opts,
        exec: &exec,
        out: Outcome::default(),
        started: Instant::now(),
    };
    match ctx.dispatch(&cli.command) {
        Ok(()) => ctx.out,
        Err(e) => {
            let mut out = ctx.out;
            out.code = e.exit_code();
            out.stderr.push_str(&format!("error: {}: {e}\n", e.name()));
            out
        }
    }
}

struct Context<'a> {
    opts: &'a Options,
    exec: &'a Parallel,
    out: Outcome,
    started: Instant,
}

impl Context<'_> {
    fn plan(&self) -> Result<SamplePlan, CliError> {
        SamplePlan::new(self.opts.points, self.opts.seed, self.opts.margin).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn tol(&self) -> Result<f64, CliError> {
        let t = self.opts.tol;
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(CliError::Usage(format!("--tol must be positive, got {t}")))
        }
    }

    fn load(&self, path: &Path) -> Result<(StructureFile, Structure), CliError> {
        let file = StructureFile::load(path)?;
        let raw = file.to_raw()?;
        let (s, _) = structure::validate(raw, &self.plan()?, self.tol()?, self.exec)?;
        Ok((file, s))
    }

    /// Prints the table unless the JSON goes to stdout, and writes the JSON
    /// report when asked for.
    fn emit(&mut self, table: String, mut report: Map<String, Value>) -> Result<(), CliError> {
        if self.opts.timings {
            let ms = self.started.elapsed().as_secs_f64() * 1e3;
            report.insert("timings".into(), json!({ "total_ms": report::num(ms) }));
        }
        match &self.opts.json {
            Some(p) if p.as_os_str() == "-" => self.out.stdout.push_str(&report::to_text(report)),
            Some(p) => {
                self.out.stdout.push_str(&table);
                write(p, &report::to_text(report))?;
            }
            None => self.out.stdout.push_str(&table),
        }
        Ok(())
    }

    fn emit_structure(&mut self, file: &StructureFile, output: Option<&Path>) -> Result<(), CliError> {
        match output {
            Some(p) => {
                write(p, &file.to_json())?;
                self.out.stdout.push_str(&format!(
                    "wrote {} ({}, dim {})\n",
                    p.display(),
                    file.name,
                    file.dimension
                ));
            }
            None => self.out.stdout.push_str(&file.to_json()),
        }
        Ok(())
    }

    fn dispatch(&mut self, command: &Command) -> Result<(), CliError> {
        match command {
            Command::Check { file } => self.check(file),
            Command::Classify { file } => self.classify(file),
            Command::Verify { file, check } => self.verify(file, check),
            Command::Deform {
                file,
                lambda,
                lambda_prime,
                inverse,
                output,
            } => {
                let params = DeformParams::new(*lambda, *lambda_prime)?;
                let dir = if *inverse {
                    Direction::Inverse
                } else {
                    Direction::Forward
                };
                let (f, s) = self.load(file)?;
                let t = deform::deform(&s, params, dir, &self.plan()?, self.tol()?, self.exec)
                    .map_err(deform::DeformError::ValidationFailed)?;
                self.emit_structure(
                    &StructureFile::from_structure(&format!("{}_deformed", f.name), &t),
                    output.as_deref(),
                )
            }
            Command::ExtractSasakian { file, output } => {
                let (f, s) = self.load(file)?;
                let t = deform::extract_sasakian(&s, &self.plan()?, self.tol()?, self.exec)?;
                self.emit_structure(
                    &StructureFile::from_structure(&format!("{}_sasakian", f.name), &t),
                    output.as_deref(),
                )
            }
            Command::Product { phitilde, nu, output } => {
                if !(*nu > 0.0 && nu.is_finite()) {
                    return Err(CliError::Usage(format!("--nu must be positive, got {nu}")));
                }
                let base = PhitildeFile::load(phitilde)?;
                let (ph, g) = base.fields()?;
                let s = deform::product_construction(&ph, &g, *nu, &self.plan()?, self.tol()?, self.exec)?;
                self.emit_structure(&StructureFile::from_structure(&base.name, &s), output.as_deref())
            }
            Command::Cvf { file, field, potential } => self.cvf(file, field.as_deref(), potential.as_deref()),
        }
    }

    fn check(&mut self, path: &Path) -> Result<(), CliError> {
        let (plan, tol) = (self.plan()?, self.tol()?);
        let file = StructureFile::load(path)?;
        let raw = file.to_raw()?;
        let dim = raw.chart.dim();
        let r = structure::check(&raw, &plan, tol, self.exec)?;
        let mut m = report::header("check", &file.name, &plan, tol);
        report::validation(&mut m, &r);
        let table = report::plan_line(&file.name, dim, &plan, tol) + &report::validation_table(&r);
        self.emit(table, m)?;
        if let Some(v) = r.first_violation() {
            self.out.code = EXIT_MATH;
            self.out.stderr.push_str(&format!(
                "error: AxiomViolation: axiom `{}` violated at {:?} (residual {:e})\n",
                v.axiom.id(),
                v.worst_point,
                v.residual
            ));
        }
        Ok(())
    }

    fn classify(&mut self, path: &Path) -> Result<(), CliError> {
        let (plan, tol) = (self.plan()?, self.tol()?);
        let (f, s) = self.load(path)?;
        let c = classify(&s, &plan, tol, self.exec)?;
        let mut m = report::header("classify", &f.name, &plan, tol);
        m.insert("classification".into(), report::classification_value(&c));
        let table = report::plan_line(&f.name, s.dim(), &plan, tol) + &report::classification_table(&c);
        self.emit(table, m)
    }

    fn verify(&mut self, path: &Path, check: &str) -> Result<(), CliError> {
        let (plan, tol) = (self.plan()?, self.tol()?);
        let (f, s) = self.load(path)?;
        let id = (check != "all").then_some(check);
        let r = verify(&s, id, &plan, tol, self.exec)?;
        let mut m = report::header("verify", &f.name, &plan, tol);
        report::checks(&mut m, &r);
        let table = report::plan_line(&f.name, s.dim(), &plan, tol) + &report::check_table(&r);
        self.emit(table, m)?;
        if !r.all_passed() {
            self.out.code = EXIT_MATH;
            let failed: Vec<&str> = r
                .checks
                .iter()
                .filter(|c| c.verdict == wact_core::Verdict::Fail)
                .map(|c| c.id)
                .collect();
            self.out
                .stderr
                .push_str(&format!("error: CheckFailed: {}\n", failed.join(", ")));
        }
        Ok(())
    }

    fn cvf(&mut self, path: &Path, field: Option<&str>, potential: Option<&str>) -> Result<(), CliError> {
        let (plan, tol) = (self.plan()?, self.tol()?);
        let (f, s) = self.load(path)?;
        let mut m = report::header("cvf", &f.name, &plan, tol);
        let r = match (field, potential) {
            (Some(spec), _) => {
                let x = file::parse_field(spec, s.chart())?;
                m.insert("field".into(), json!(x.sources()));
                deform::contact_vector_field(&s, &x, &plan, tol, self.exec)?
            }
            (None, Some(src)) => {
                let pot = file::parse_scalar("--potential", src, s.chart())?;
                m.insert("potential".into(), json!(pot.to_source(s.chart().coords())));
                let x = PotentialField {
                    structure: &s,
                    potential: pot,
                };
                deform::contact_vector_field(&s, &x, &plan, tol, self.exec)?
            }
            (None, None) => return Err(CliError::Usage("one of --field or --potential is required".into())),
        };
        report::cvf(&mut m, &r);
        let table = report::plan_line(&f.name, s.dim(), &plan, tol) + &report::cvf_table(&r);
        self.emit(table, m)
    }
}
