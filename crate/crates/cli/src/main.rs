//! `ccdegen` command-line front end.
//!
//! Exit codes: 0 success or nondegenerate, 1 input error, 10 degenerate,
//! 11 not a central configuration, 20 certification failed.

mod problem;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccdegen::certifier::{self, CertifyOptions, Status};
use ccdegen::families::{family_scan, Family};
use ccdegen::reduction::{count_near_zero, reduce_with, spectrum, ReduceOptions, Verdict};
use ccdegen::{cc, Error, Form};
use clap::{Parser, Subcommand};

use problem::ProblemFile;

const EXIT_INPUT: u8 = 1;
const EXIT_DEGENERATE: u8 = 10;
const EXIT_NOT_CC: u8 = 11;
const EXIT_CERT_FAILED: u8 = 20;
const EIG_REL_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "ccdegen",
    version,
    about = "Degeneracy of planar central configurations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the configuration in a problem file is degenerate.
    Check {
        file: PathBuf,
        #[arg(long, value_parser = parse_form)]
        form: Option<Form>,
        /// Central-configuration tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample det(J2) along a one-parameter family and write CSV.
    Scan {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, value_parser = parse_form)]
        form: Form,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify det(J2) > 0 along the rhombus family with interval arithmetic.
    CertifyRhombus {
        #[arg(long, default_value_t = certifier::DEFAULT_MAX_DEPTH)]
        max_depth: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the Jacobian spectrum and flag the near-zero eigenvalues.
    Eig {
        file: PathBuf,
        #[arg(long, value_parser = parse_form)]
        form: Option<Form>,
    },
}

fn parse_form(s: &str) -> Result<Form, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Check { file, form, tol } => cmd_check(&file, form, tol),
        Command::Scan {
            family,
            form,
            from,
            to,
            steps,
            out,
        } => cmd_scan(family, form, from, to, steps, &out),
        Command::CertifyRhombus { max_depth, out } => cmd_certify(max_depth, &out),
        Command::Eig { file, form } => cmd_eig(&file, form),
    };
    ExitCode::from(code)
}

fn input_error(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

fn cmd_check(path: &Path, form: Option<Form>, tol: Option<f64>) -> u8 {
    let problem = match ProblemFile::read(path).and_then(|f| f.validate(form)) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return input_error(format!("--tol {t} must be positive"));
        }
    }
    let tolerances = problem.file.tolerances.clone();
    let mut opts = ReduceOptions::default();
    if let Some(t) = tolerances.as_ref().and_then(|t| t.cc) {
        opts.cc_tol = t;
    }
    if let Some(t) = tol {
        opts.cc_tol = t;
    }
    if let Some(t) = tolerances.as_ref().and_then(|t| t.det) {
        opts.det_tol = t;
    }

    let (q, m) = (&problem.configuration, &problem.masses);
    let scalars = match cc::scalars(q, m) {
        Ok(s) => s,
        Err(e) => return input_error(e),
    };
    let residual = match cc::residual(problem.form, q, m) {
        Ok(r) => r.amax(),
        Err(e) => return input_error(e),
    };
    let report = match reduce_with(problem.form, q, m, &opts) {
        Ok(r) => r,
        Err(Error::NotCentral {
            residual,
            threshold,
        }) => {
            println!("verdict = \"not-central\"");
            println!("residual_norm = {residual:e}");
            println!("threshold = {threshold:e}");
            eprintln!("not a central configuration under Form {}", problem.form);
            return EXIT_NOT_CC;
        }
        Err(e) => return input_error(e),
    };

    let mut echo = problem.file.clone();
    echo.form = Some(problem.form.to_string());
    echo.tolerances = Some(problem::Tolerances {
        cc: Some(opts.cc_tol),
        det: Some(opts.det_tol),
    });
    let mut out = echo.to_toml();
    let _ = writeln!(out, "\n[report]");
    let _ = writeln!(out, "U = {:e}", scalars.u);
    let _ = writeln!(out, "I = {:e}", scalars.i);
    let _ = writeln!(out, "c = [{:e}, {:e}]", scalars.c[0], scalars.c[1]);
    let _ = writeln!(out, "lambda = {:e}", scalars.lambda);
    let _ = writeln!(out, "residual_norm = {residual:e}");
    let _ = writeln!(out, "det_j2 = {:e}", report.det_j2);
    let _ = writeln!(out, "det_scale = {:e}", report.det_scale);
    let _ = writeln!(
        out,
        "zero_column_residual = {:e}",
        report.zero_column_residual
    );
    let _ = writeln!(out, "pivot_rows = {:?}", report.pivot_rows);
    let _ = writeln!(out, "verdict = \"{}\"", report.verdict);
    print!("{out}");
    match report.verdict {
        Verdict::Nondegenerate => 0,
        Verdict::Degenerate | Verdict::Uncertain => EXIT_DEGENERATE,
    }
}

fn cmd_scan(family: Family, form: Form, from: f64, to: f64, steps: usize, out: &Path) -> u8 {
    let points = match family_scan(family, form, from, to, steps) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let mut csv = String::from("param,detJ2,verdict\n");
    for p in &points {
        match &p.sample {
            Ok(s) => {
                let _ = writeln!(csv, "{},{:e},{}", p.param, s.det_j2, s.verdict);
            }
            Err(Error::Domain(_)) => {
                let _ = writeln!(csv, "{},,domain-error", p.param);
            }
            Err(Error::NotCentral { .. }) => {
                let _ = writeln!(csv, "{},,not-central", p.param);
            }
            Err(_) => {
                let _ = writeln!(csv, "{},,error", p.param);
            }
        }
    }
    if let Err(e) = std::fs::write(out, csv) {
        return input_error(format!("{}: {e}", out.display()));
    }
    let ok = points.iter().filter(|p| p.sample.is_ok()).count();
    println!(
        "{family} Form {form}: {} samples ({ok} evaluated) written to {}",
        points.len(),
        out.display()
    );
    0
}

fn cmd_certify(max_depth: u32, out: &Path) -> u8 {
    let cert = certifier::certify_rhombus_with(&CertifyOptions {
        max_depth,
        ..Default::default()
    });
    let range = cert.regime_a_range;
    println!(
        "regime A: a in [{:e}, {:e}], {} leaves",
        range.lo(),
        range.hi(),
        cert.leaves.len()
    );
    if let Some(min) = cert
        .leaves
        .iter()
        .map(|l| l.value.lo())
        .min_by(f64::total_cmp)
    {
        println!("regime A: smallest leaf lower bound {min:e}");
    }
    if let Some(b) = &cert.regime_b {
        println!(
            "regime B: a in [{:e}, {:e}], tail positive for m1 >= {}: {}, m1 >= {:e}",
            b.a_box.lo(),
            b.a_box.hi(),
            b.threshold,
            b.tail_positive,
            b.m1_at_right.lo()
        );
    }
    if let Err(e) = cert.write_to(out) {
        return input_error(format!("{}: {e}", out.display()));
    }
    match &cert.status {
        Status::Certified => {
            println!("certified; certificate written to {}", out.display());
            0
        }
        Status::Failed { regime, a, reason } => {
            println!(
                "failed in regime {regime} on [{:e}, {:e}]: {reason}",
                a.lo(),
                a.hi()
            );
            EXIT_CERT_FAILED
        }
    }
}

fn cmd_eig(path: &Path, form: Option<Form>) -> u8 {
    let problem = match ProblemFile::read(path).and_then(|f| f.validate(form)) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let eigs = match spectrum(problem.form, &problem.configuration, &problem.masses) {
        Ok(e) => e,
        Err(e) => return input_error(e),
    };
    let radius = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in &eigs {
        let flag = if z.norm() <= EIG_REL_TOL * radius {
            "  near-zero"
        } else {
            ""
        };
        println!("{:+.12e} {:+.12e}i{flag}", z.re, z.im);
    }
    println!(
        "near_zero = {} (trivial for Form {}: {})",
        count_near_zero(&eigs, EIG_REL_TOL),
        problem.form,
        problem.form.symmetry_count()
    );
    0
}
