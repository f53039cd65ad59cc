use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser as ClapParser, Subcommand, ValueEnum};

use thetacalc::cli::commands::{self, Construct, DeformFormat};
use thetacalc::cli::Report;
use thetacalc::coeff::Parser;
use thetacalc::pencil::format::read_bracket;
use thetacalc::pencil::MiuraTransform;
use thetacalc::Result;

#[derive(ClapParser)]
#[command(name = "thetacalc", version, about = "Theta-formalism calculus for scalar Poisson pencils")]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-times in the report (reports are byte-stable without it).
    #[arg(long, global = true)]
    timings: bool,
    /// Write the emitted bracket or density to a file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Central invariant of two bracket files in the canonical coordinate.
    CentralInvariant { bracket1: PathBuf, bracket2: PathBuf },
    /// Reproduce a built-in example.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
    },
    /// Emit the order-2 deformation of the pencil for given g and c.
    Deform {
        #[arg(long, default_value = "g(u)")]
        g: String,
        #[arg(long, default_value = "c(u)")]
        c: String,
        #[arg(long, value_enum, default_value_t = Format::Theta)]
        format: Format,
        #[arg(long, value_enum, default_value_t = ConstructArg::Formula)]
        construct: ConstructArg,
    },
    /// Apply a second-type Miura transformation to a bracket file.
    Miura {
        bracket: PathBuf,
        /// Old coordinate in terms of the new one, e.g. `u + eps/(2*sqrt(2))*u1`.
        #[arg(long)]
        transform: String,
        /// Name of the new coordinate.
        #[arg(long, default_value = "u")]
        to: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// D1^2 = D2^2 = D1D2 + D2D1 = [D_lambda, D] = 0 on a basis sweep.
    Operators {
        #[arg(long, default_value_t = 5)]
        max_degree: u32,
        #[arg(long, default_value_t = 6)]
        max_jet: u32,
    },
    /// h d1 + d1 h = id on seeded samples of E1 at (p, q).
    Homotopy {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "g(u)")]
        g: String,
    },
    /// The order-2 deformation is a cocycle, with a negative control.
    Deformation {
        #[arg(long, default_value = "g(u)")]
        g: String,
        #[arg(long, default_value = "c(u)")]
        c: String,
        #[arg(long, value_enum, default_value_t = ConstructArg::Formula)]
        construct: ConstructArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
    Kdv,
    CamassaHolm,
    Volterra,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Theta,
    Delta,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructArg {
    Formula,
    Dlz,
}

impl From<ConstructArg> for Construct {
    fn from(c: ConstructArg) -> Self {
        match c {
            ConstructArg::Formula => Construct::Formula,
            ConstructArg::Dlz => Construct::Dlz,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn run(cli: &Cli) -> Result<(Report, Option<String>)> {
    let parser = Parser::new();
    Ok(match &cli.command {
        Command::Verify { what } => match what {
            Verify::Operators { max_degree, max_jet } => (commands::verify_operators(*max_degree, *max_jet), None),
            Verify::Homotopy { p, q, samples, seed, g } => {
                let g = commands::parse_scalar(g)?;
                (commands::verify_homotopy(*p, *q, *samples, *seed, &g)?, None)
            }
            Verify::Deformation { g, c, construct } => {
                let (g, c) = (commands::parse_scalar(g)?, commands::parse_scalar(c)?);
                let dlz = matches!(construct, ConstructArg::Dlz);
                (commands::verify_deformation(&g, &c, dlz)?, None)
            }
        },
        Command::CentralInvariant { bracket1, bracket2 } => {
            let b1 = read_bracket(&read(bracket1)?, &parser)?;
            let b2 = read_bracket(&read(bracket2)?, &parser)?;
            (commands::central_invariant_report(&b1, &b2), None)
        }
        Command::Example { name } => {
            let name = match name {
                ExampleName::Kdv => "kdv",
                ExampleName::CamassaHolm => "camassa-holm",
                ExampleName::Volterra => "volterra",
            };
            (commands::example(name)?, None)
        }
        Command::Deform { g, c, format, construct } => {
            let (g, c) = (commands::parse_scalar(g)?, commands::parse_scalar(c)?);
            let format = match format {
                Format::Theta => DeformFormat::Theta,
                Format::Delta => DeformFormat::Delta,
            };
            let (r, out) = commands::deform(&g, &c, format, (*construct).into())?;
            (r, Some(out))
        }
        Command::Miura { bracket, transform, to, order } => {
            let b = read_bracket(&read(bracket)?, &parser)?;
            let f = MiuraTransform::parse(b.coordinate(), to, transform, &parser)?;
            let (r, out) = commands::miura(&b, &f, *order)?;
            (r, Some(out))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, emitted)) => {
            let mut report = report.finish(cli.timings);
            if let Some(text) = emitted {
                match &cli.out {
                    Some(path) => {
                        if let Err(e) = fs::write(path, format!("{text}\n")) {
                            eprintln!("error: cannot write {}: {e}", path.display());
                            return ExitCode::from(2);
                        }
                    }
                    None if !cli.json => println!("{text}"),
                    None => report.emitted = Some(text),
                }
            }
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
