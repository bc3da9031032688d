use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logres_cli::commands::{canonical, error_report};
use logres_cli::{run, Command, Options};

#[derive(Parser)]
#[command(name = "logres", version, about = "Exact computations for logarithmic connections on toric models")]
struct Cli {
    /// Emit the full report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Emit a DOT digraph (faces, strata).
    #[arg(long, global = true)]
    dot: bool,
    /// Exponent window such as "(-1,0]".
    #[arg(long = "tau-window", visible_alias = "tau", global = true, value_name = "WINDOW", allow_hyphen_values = true)]
    tau_window: Option<String>,
    /// Search bound for monoid membership tests.
    #[arg(long, global = true)]
    bound: Option<i64>,
    #[command(subcommand)]
    command: Top,
}

/// An input file followed by further files or declaration names.
#[derive(Args)]
struct Inputs {
    #[arg(required = true, value_name = "FILE|NAME")]
    inputs: Vec<String>,
}

#[derive(Subcommand)]
enum Top {
    /// Face lattice of a monoid.
    Faces(Inputs),
    /// Log stratification of a model.
    Strata(Inputs),
    /// Hollow / locally constant classification of a model.
    Classify(Inputs),
    /// Integrability of a connection.
    Flat(Inputs),
    /// Higgs decomposition along a splitting.
    Higgs(Inputs),
    /// Conversions between connections and graded monodromy objects.
    #[command(subcommand)]
    Rh(Rh),
    /// Canonical extension across a good embedding.
    #[command(subcommand)]
    Canext(Canext),
    /// Differential module germs on a punctured disc.
    #[command(subcommand)]
    Germ(Germ),
    /// Koszul, de Rham and comparison cohomology.
    #[command(subcommand)]
    Cohomology(Cohomology),
    /// Local systems in log coordinates.
    #[command(subcommand)]
    Locsys(Locsys),
}

#[derive(Subcommand)]
enum Rh {
    /// Graded object of a constant connection.
    ToLobject(Inputs),
    /// Constant connection of a graded object.
    FromLobject(Inputs),
}

#[derive(Subcommand)]
enum Canext {
    /// Extend an object across the divisor at infinity.
    Extend(Inputs),
    /// Restrict an extended object to the open part.
    Restrict(Inputs),
    /// Exponents at infinity and adaptedness to the window.
    Exponents(Inputs),
}

#[derive(Subcommand)]
enum Germ {
    /// Regular singularity test.
    Fuchs(Inputs),
    /// Pull a connection back along a curve germ.
    Pullback(Inputs),
    /// Tensor product of two germs.
    Tensor(Inputs),
}

#[derive(Subcommand)]
enum Cohomology {
    /// Koszul cohomology of a commuting family.
    Koszul(Inputs),
    /// De Rham cohomology of a connection on a hollow model.
    Derham(Inputs),
    /// Compare de Rham, group and local system cohomology.
    Compare(Inputs),
}

#[derive(Subcommand)]
enum Locsys {
    /// Build the graded object of a local system and recover it.
    Roundtrip(Inputs),
}

impl Top {
    fn split(self) -> (Command, Vec<String>) {
        let (c, i) = match self {
            Top::Faces(i) => (Command::Faces, i),
            Top::Strata(i) => (Command::Strata, i),
            Top::Classify(i) => (Command::Classify, i),
            Top::Flat(i) => (Command::Flat, i),
            Top::Higgs(i) => (Command::Higgs, i),
            Top::Rh(Rh::ToLobject(i)) => (Command::RhToLObject, i),
            Top::Rh(Rh::FromLobject(i)) => (Command::RhFromLObject, i),
            Top::Canext(Canext::Extend(i)) => (Command::CanextExtend, i),
            Top::Canext(Canext::Restrict(i)) => (Command::CanextRestrict, i),
            Top::Canext(Canext::Exponents(i)) => (Command::CanextExponents, i),
            Top::Germ(Germ::Fuchs(i)) => (Command::GermFuchs, i),
            Top::Germ(Germ::Pullback(i)) => (Command::GermPullback, i),
            Top::Germ(Germ::Tensor(i)) => (Command::GermTensor, i),
            Top::Cohomology(Cohomology::Koszul(i)) => (Command::CohomologyKoszul, i),
            Top::Cohomology(Cohomology::Derham(i)) => (Command::CohomologyDeRham, i),
            Top::Cohomology(Cohomology::Compare(i)) => (Command::CohomologyCompare, i),
            Top::Locsys(Locsys::Roundtrip(i)) => (Command::LocsysRoundtrip, i),
        };
        (c, i.inputs)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let options = Options {
        json: cli.json,
        dot: cli.dot,
        tau_window: cli.tau_window,
        bound: cli.bound,
    };
    let (command, inputs) = cli.command.split();
    match run(command, &inputs, &options) {
        Ok(out) => {
            print!("{}", out.render(&options));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("logres: {e}");
            if options.json {
                let value = serde_json::to_value(error_report(command, &e)).expect("serializable");
                let report = serde_json::to_string_pretty(&canonical(value)).expect("serializable");
                println!("{report}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
