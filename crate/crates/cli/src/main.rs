use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use microsymp::micro::{self, extract_germ, is_micromorphism, tensor_all};
use microsymp::operad::{check_operad_axioms, AxiomBounds};
use microsymp::text::{parse_morphism, parse_poly, parse_record, serialize_morphism};
use microsymp::{selfcheck, CoreMap, Error, MicroObject, Micromorphism};

#[derive(Parser)]
#[command(name = "microsymp", version, about = "Exact symplectic micromorphism calculator")]
struct Cli {
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compose morphisms left to right: `compose F G` is `G ∘ F`.
    Compose {
        /// Morphism files or inline records.
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<String>,
        /// Truncate the inputs to this order first.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        order: Option<u32>,
    },
    /// Cotangent lift of a polynomial map given by its components in x1..xn.
    Lift {
        /// Number of variables of the map.
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        /// Components, e.g. `x1^2 + x2`.
        #[arg(allow_hyphen_values = true)]
        components: Vec<String>,
    },
    /// Tensor product of morphisms.
    Tensor {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        order: Option<u32>,
    },
    /// Run the micromorphism checks on a record and report every failure.
    Check { input: String },
    /// Symplectomorphism germ of a morphism with affine invertible core.
    Germ { input: String },
    /// Verify the operad axioms of the lagrangian operads.
    Operad {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full verification suite.
    Selfcheck {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

enum Failure {
    Lib(Error),
    Io(String),
    /// The command ran but its verdict is negative.
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Shape(_)
        | Error::Filtration(_)
        | Error::NormalForm(_)
        | Error::Validity(_)
        | Error::UnsupportedCore(_) => 1,
        Error::Syntax { .. } => 2,
        Error::Convergence(_) | Error::Internal(_) => 3,
    }
}

/// Reads `arg` as a file if it exists, else treats it as an inline record.
fn load_text(arg: &str) -> Result<(String, String), Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{arg}: {e}")))?;
        Ok((arg.to_string(), text))
    } else if arg.contains('=') {
        Ok(("<inline>".to_string(), arg.to_string()))
    } else {
        Err(Failure::Io(format!("{arg}: no such file")))
    }
}

fn load(arg: &str) -> Result<Micromorphism, Failure> {
    let (name, text) = load_text(arg)?;
    parse_morphism(&text).map_err(|e| Failure::Lib(with_context(&name, e)))
}

fn with_context(name: &str, e: Error) -> Error {
    match e {
        Error::Syntax { line, column, message } => Error::Syntax {
            line,
            column,
            message: format!("{name}: {message}"),
        },
        Error::Shape(m) => Error::Shape(format!("{name}: {m}")),
        Error::Validity(m) => Error::Validity(format!("{name}: {m}")),
        other => other,
    }
}

fn load_all(inputs: &[String], order: Option<u32>) -> Result<Vec<Micromorphism>, Failure> {
    inputs
        .iter()
        .map(|a| {
            let f = load(a)?;
            Ok(match order {
                Some(k) => f.truncate(k)?,
                None => f,
            })
        })
        .collect()
}

fn run(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Compose { inputs, order } => {
            let fs = load_all(&inputs, order)?;
            let mut acc = fs[0].clone();
            for g in &fs[1..] {
                acc = micro::compose(g, &acc)?;
            }
            Ok(serialize_morphism(&acc))
        }
        Command::Lift { dim, order, components } => {
            let comps = components
                .iter()
                .map(|c| parse_poly(c, 0, dim, 0))
                .collect::<Result<Vec<_>, _>>()?;
            let phi = CoreMap::new(dim, comps)?;
            Ok(serialize_morphism(&micro::cotangent_lift(&phi, order)?))
        }
        Command::Tensor { inputs, order } => {
            let fs = load_all(&inputs, order)?;
            let k = fs[0].order();
            Ok(serialize_morphism(&tensor_all(&fs, k)?))
        }
        Command::Check { input } => {
            let (name, text) = load_text(&input)?;
            let rec = parse_record(&text).map_err(|e| with_context(&name, e))?;
            let check = is_micromorphism(&rec.s, &MicroObject::new(rec.source), &MicroObject::new(rec.target))?;
            let mut out = String::new();
            if check.offending_terms.is_empty() {
                out.push_str("normal form: ok\n");
            } else {
                let _ = writeln!(out, "normal form: S(0,x) != 0, offending terms: {}", check.offending_terms.join(", "));
            }
            if check.linear_failures.is_empty() {
                out.push_str("linear checks: ok\n");
            } else {
                for f in &check.linear_failures {
                    let _ = writeln!(out, "linear check: {f}");
                }
            }
            if check.ok() {
                rec.into_morphism().map_err(|e| with_context(&name, e))?;
                out.push_str("status=valid\n");
                Ok(out)
            } else {
                out.push_str("status=invalid\n");
                Err(Failure::Verdict(out))
            }
        }
        Command::Germ { input } => {
            let f = load(&input)?;
            let g = extract_germ(&f)?;
            let mut out = format!("dim={} order={}\n", g.dim(), g.order());
            for (i, c) in g.position().iter().enumerate() {
                let _ = writeln!(out, "x2_{} = {c}", i + 1);
            }
            for (i, c) in g.momentum().iter().enumerate() {
                let _ = writeln!(out, "p2_{} = {c}", i + 1);
            }
            Ok(out)
        }
        Command::Operad { dim, arity, levels, samples, order, seed } => {
            let bounds = AxiomBounds {
                max_arity: arity,
                levels,
                samples: samples as usize,
                order,
            };
            let report = check_operad_axioms(&MicroObject::new(dim), seed, bounds)?;
            let text = report.render();
            if report.all_passed() {
                Ok(text)
            } else {
                Err(Failure::Verdict(text))
            }
        }
        Command::Selfcheck { seed } => {
            let report = selfcheck::run_all(seed);
            let text = report.to_string();
            if report.passed() {
                Ok(text)
            } else {
                Err(Failure::Verdict(text))
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|text| emit(&cli.out, &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(text)) => match emit(&cli.out, &text) {
            Ok(()) => ExitCode::from(1),
            Err(_) => ExitCode::from(2),
        },
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
