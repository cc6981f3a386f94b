use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rustlight::borrowck::BorrowOptions;
use rustlight::driver::{self, BorrowPlacement, Compilation, Options, Stage, DUMPS};
use rustlight::interp::{self, Outcome, SValue};
use rustlight::ir::RirModule;
use rustlight::types::Ty;

#[derive(Parser)]
#[command(
    name = "rustlight",
    version,
    about = "Compiler and borrow checker for a small Rust subset"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check and report diagnostics.
    Check(Common),
    /// Check, then emit C.
    Build {
        #[command(flatten)]
        common: Common,
        /// Output file; defaults to the input with a `.c` extension.
        #[arg(short = 'o')]
        out: Option<PathBuf>,
        /// Also compile the emitted C with this compiler.
        #[arg(long)]
        cc: Option<String>,
    },
    /// Check, then interpret `main`.
    Run {
        #[command(flatten)]
        common: Common,
        /// Arguments passed to `main`.
        #[arg(long, num_args = 0.., allow_negative_numbers = true)]
        args: Vec<String>,
        /// Print the event trace before the result.
        #[arg(long)]
        trace: bool,
    },
    /// Print intermediate representations and analysis states.
    Dump(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ErrorFormat {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    file: PathBuf,
    /// What to print: ast, rustir, rustir-elab, dataflow:<liveness|move|init|borrow>.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(DUMPS))]
    dump: Vec<String>,
    /// Write loan facts as JSON to the given path, or to stdout.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "-")]
    emit_loans: Option<String>,
    /// Treat borrows of distinct fields of one local as overlapping.
    #[arg(long)]
    borrow_field_insensitive: bool,
    /// Also borrow-check the IR before drop elaboration and report both.
    #[arg(long)]
    check_after_elab: bool,
    /// Stop after this pass.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Stage::ALL.map(|s| s.name())))]
    stage: Option<String>,
    #[arg(long, value_enum, default_value_t = ErrorFormat::Text)]
    error_format: ErrorFormat,
}

impl Common {
    fn options(&self) -> Options {
        let stop_after = self
            .stage
            .as_deref()
            .and_then(Stage::from_name)
            .unwrap_or(Stage::BorrowCheck)
            .min(Stage::BorrowCheck);
        Options {
            stop_after,
            borrow: BorrowOptions {
                field_insensitive: self.borrow_field_insensitive,
            },
            placement: if self.check_after_elab {
                BorrowPlacement::Both
            } else {
                BorrowPlacement::PostElab
            },
        }
    }
}

fn report(c: &Compilation, file: &Path, format: ErrorFormat) {
    let name = file.display().to_string();
    let mut err = std::io::stderr().lock();
    for d in &c.diagnostics {
        let line = match format {
            ErrorFormat::Text => d.render(&name),
            ErrorFormat::Json => d.to_json(&name),
        };
        let _ = writeln!(err, "{}", line);
    }
}

/// Compile, print requested dumps and loan facts, report diagnostics.
fn front(common: &Common) -> Result<(Compilation, String), ExitCode> {
    let source = fs::read_to_string(&common.file).map_err(|e| {
        eprintln!("error: cannot read {}: {}", common.file.display(), e);
        ExitCode::from(2)
    })?;
    let c = driver::compile(&source, &common.options());
    let mut out = std::io::stdout().lock();
    for sel in &common.dump {
        match driver::render_dump(&c, sel) {
            Some(text) => {
                let _ = out.write_all(text.as_bytes());
            }
            None if c.ok() => eprintln!("note: `--dump {}` needs the {} stage", sel, driver::dump_stage(sel)),
            None => {}
        }
    }
    if let Some(dest) = &common.emit_loans {
        if let Some(json) = driver::loan_facts_json(&c) {
            if dest == "-" {
                let _ = out.write_all(json.as_bytes());
            } else if let Err(e) = fs::write(dest, json) {
                eprintln!("error: cannot write {}: {}", dest, e);
                return Err(ExitCode::from(1));
            }
        }
    }
    report(&c, &common.file, common.error_format);
    if c.ok() {
        Ok((c, source))
    } else {
        Err(ExitCode::from(1))
    }
}

fn runnable(c: &Compilation) -> Result<&RirModule, ExitCode> {
    c.runnable().ok_or_else(|| {
        eprintln!("error: --stage stops before the checks complete");
        ExitCode::from(1)
    })
}

fn parse_args(m: &RirModule, args: &[String]) -> Result<Vec<SValue>, String> {
    let main = m.function("main").ok_or("no `main` function")?;
    let params: Vec<_> = main.params().collect();
    if params.len() != args.len() {
        return Err(format!("`main` takes {} argument(s), got {}", params.len(), args.len()));
    }
    params
        .iter()
        .zip(args)
        .map(|(&l, a)| match main.local_ty(l) {
            Ty::I32 => a.parse().map(SValue::I32).map_err(|_| format!("`{}` is not an i32", a)),
            Ty::Bool => a
                .parse()
                .map(SValue::Bool)
                .map_err(|_| format!("`{}` is not a bool", a)),
            _ => Err("only i32 and bool parameters can be passed on the command line".to_string()),
        })
        .collect()
}

fn build(common: &Common, out: Option<PathBuf>, cc: Option<String>) -> Result<(), ExitCode> {
    let (c, source) = front(common)?;
    let m = runnable(&c)?;
    let out = out.unwrap_or_else(|| common.file.with_extension("c"));
    fs::write(&out, driver::emit_c(m, &source)).map_err(|e| {
        eprintln!("error: cannot write {}: {}", out.display(), e);
        ExitCode::from(1)
    })?;
    if let Some(cc) = cc {
        let status = Command::new(&cc)
            .args(["-std=c99", "-O1", "-o"])
            .arg(out.with_extension(""))
            .arg(&out)
            .status()
            .map_err(|e| {
                eprintln!("error: cannot run {}: {}", cc, e);
                ExitCode::from(1)
            })?;
        if !status.success() {
            eprintln!("error: {} failed with {}", cc, status);
            return Err(ExitCode::from(1));
        }
    }
    Ok(())
}

fn run(common: &Common, args: &[String], trace: bool) -> Result<(), ExitCode> {
    let (c, _) = front(common)?;
    let m = runnable(&c)?;
    let args = parse_args(m, args).map_err(|e| {
        eprintln!("error: {}", e);
        ExitCode::from(2)
    })?;
    let r = interp::eval(
        m,
        "main",
        args,
        interp::Config {
            trace_assigns: trace,
            ..Default::default()
        },
    );
    let mut out = std::io::stdout().lock();
    if trace {
        let _ = write!(out, "{}", r.trace);
    }
    let _ = writeln!(out, "{}", r.outcome);
    match r.outcome {
        Outcome::Returned(_) => Ok(()),
        Outcome::Trap(_) => Err(ExitCode::from(1)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Check(common) | Cmd::Dump(common) => front(&common).map(|_| ()),
        Cmd::Build { common, out, cc } => build(&common, out, cc),
        Cmd::Run { common, args, trace } => run(&common, &args, trace),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
