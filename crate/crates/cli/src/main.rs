mod commands;

use clap::{Parser, Subcommand};
use commands::Options;
use cstar_descent::instance::InstanceFile;
use cstar_descent::{Report, Tolerance};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Verify descent data for Hilbert C*-modules over finite-dimensional C*-algebras.
///
/// Every command writes a JSON report (to stdout, or to --report) and exits 0 exactly
/// when every check passed.
#[derive(Parser)]
#[command(name = "cstar-descent", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Uniform absolute and relative tolerance, overriding the instance file.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here and print a short summary instead.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Matrix levels for the completely bounded norm audit.
    #[arg(long, global = true, default_value_t = 2)]
    levels: usize,
}

#[derive(Subcommand)]
enum Verb {
    /// Validate algebras, inclusions, modules and correspondences.
    Check { instance: PathBuf },
    /// Build the adjoint pair and coalgebra of every inclusion and correspondence.
    Coalgebra { instance: PathBuf },
    /// Check the comodule axioms of every comodule.
    ComoduleVerify { instance: PathBuf },
    /// Reconstruct the A-module of every comodule, with its Gram data and witness.
    Descend { instance: PathBuf },
    /// Module and comodule round trips.
    Roundtrip { instance: PathBuf },
    /// Leibniz, Hermitian and flatness checks of every connection.
    ConnectionVerify { instance: PathBuf },
    /// Descend every flat Hermitian connection through its kernel.
    ConnectionDescend { instance: PathBuf },
    /// Completely bounded norm audit of every comodule's coaction.
    Audit { instance: PathBuf },
    /// Run a gallery generator end to end (`group --order n`, `covering`, or a named instance).
    Gallery {
        name: String,
        #[arg(long)]
        order: Option<usize>,
        /// Also write the generated instance file here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        eprintln!("error [invalid-argument]: --tol must be positive");
        return ExitCode::from(2);
    }
    let opts = Options { tol: cli.tol.map(Tolerance::uniform), levels: cli.levels };
    let start = Instant::now();
    let (command, path) = match &cli.verb {
        Verb::Check { instance } => ("check", Some(instance)),
        Verb::Coalgebra { instance } => ("coalgebra", Some(instance)),
        Verb::ComoduleVerify { instance } => ("comodule-verify", Some(instance)),
        Verb::Descend { instance } => ("descend", Some(instance)),
        Verb::Roundtrip { instance } => ("roundtrip", Some(instance)),
        Verb::ConnectionVerify { instance } => ("connection-verify", Some(instance)),
        Verb::ConnectionDescend { instance } => ("connection-descend", Some(instance)),
        Verb::Audit { instance } => ("audit", Some(instance)),
        Verb::Gallery { .. } => ("gallery", None),
    };
    let mut report = Report::new(command, &path.map(|p| p.display().to_string()).unwrap_or_default());

    let outcome = match &cli.verb {
        Verb::Gallery { name, order, emit } => {
            commands::gallery_run(name, *order, &opts, &mut report, emit.is_some()).and_then(|file| {
                if let (Some(path), Some(file)) = (emit, file) {
                    std::fs::write(path, file.emit() + "\n").map_err(|e| {
                        cstar_descent::Error::new(cstar_descent::Kind::InvalidArgument, format!("{}: {e}", path.display()))
                    })?;
                }
                Ok(())
            })
        }
        verb => {
            let path = path.expect("file verbs carry a path");
            InstanceFile::read(path).and_then(|file| {
                report.instance = file.name.clone();
                match verb {
                    Verb::Check { .. } => commands::check(file, &opts, &mut report),
                    Verb::Coalgebra { .. } => commands::coalgebra(file, &opts, &mut report),
                    Verb::ComoduleVerify { .. } => commands::comodule_verify(file, &opts, &mut report),
                    Verb::Descend { .. } => commands::descend(file, &opts, &mut report),
                    Verb::Roundtrip { .. } => commands::roundtrip(file, &opts, &mut report),
                    Verb::ConnectionVerify { .. } => commands::connection_verify(file, &opts, &mut report),
                    Verb::ConnectionDescend { .. } => commands::connection_descend(file, &opts, &mut report),
                    Verb::Audit { .. } => commands::audit(file, &opts, &mut report),
                    Verb::Gallery { .. } => unreachable!(),
                }
            })
        }
    };
    if let Err(e) = &outcome {
        report.error(command, e);
    }
    report.finish(start.elapsed().as_secs_f64() * 1e3);

    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            let s = &report.summary;
            println!("{}: {} checks, {} passed, {} failed", command, s.total, s.passed, s.failed);
        }
        None => println!("{}", report.to_json()),
    }
    if report.success() {
        ExitCode::SUCCESS
    } else {
        let first = report.summary.first_failure.clone().unwrap_or_default();
        eprintln!("FAIL {first}");
        ExitCode::from(1)
    }
}
