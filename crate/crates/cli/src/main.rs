//! `pcalc`: run parabolic-calculus commands on JSON scenario files, or the
//! randomized property verifier.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parcalc::verify::{verify_with, Ops};
use parcalc::{run_command, Command, CommandArgs, Error, Scenario, VerifierConfig};

#[derive(Parser)]
#[command(
    name = "pcalc",
    version,
    about = "Exact calculus of parabolic bundles under ramified coverings"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Table,
    Json,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Object to act on; repeat where a command takes several.
    #[arg(long = "name")]
    names: Vec<String>,
    /// Covering to act along; `compose` takes two, applied in order.
    #[arg(long = "map")]
    maps: Vec<String>,
    #[arg(long, value_enum, default_value = "table")]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Table1,
    Table2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pull a bundle back along a covering.
    Pullback(Common),
    /// Direct image of a bundle along a covering.
    Pushforward(Common),
    /// Parabolic degree of a bundle, or degree of a covering.
    Degree(Common),
    /// Slope (par-deg over rank) of a bundle.
    Slope(Common),
    /// Split-model semistability, stability and polystability.
    Stability(Common),
    /// Residue of a local field and its flag conditions.
    Residue {
        #[command(flatten)]
        common: Common,
        /// Pull back along a point of this multiplicity.
        #[arg(long, conflicts_with = "pushforward")]
        pullback: Option<u32>,
        /// Take the direct-image residue (multiplicity = the field's order).
        #[arg(long)]
        pushforward: bool,
    },
    /// Spectral correspondence tables.
    Naht {
        #[arg(value_enum)]
        table: Table,
        #[command(flatten)]
        common: Common,
        /// Local multiplicity; table2 takes one per --name.
        #[arg(long)]
        m: Vec<u32>,
    },
    /// Compose two coverings: `--map g --map f` gives f after g.
    Compose(Common),
    /// Validate every object, and report on unvalidated profiles.
    Validate(Common),
    /// Re-evaluate the property recorded in the scenario's `check` section.
    Check(Common),
    /// Run the randomized property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        #[arg(long, default_value_t = 3)]
        max_degree: i64,
        #[arg(long, default_value_t = 4)]
        max_multiplicity: u32,
        #[arg(long, default_value_t = 6)]
        weight_denominator_bound: i64,
        /// Only run these properties.
        #[arg(long)]
        property: Vec<String>,
        #[arg(long, value_enum, default_value = "table")]
        out: Output,
    },
}

fn run_scenario_command(
    command: Command,
    common: Common,
    mut args: CommandArgs,
) -> Result<u8, Error> {
    let scenario = Scenario::load(&common.scenario)?;
    args.names = common.names;
    args.maps = common.maps;
    let report = run_command(&scenario, command, &args)?;
    match common.out {
        Output::Table => print!("{}", report.to_table()),
        Output::Json => println!("{}", report.to_json()),
    }
    Ok(report.exit_status())
}

fn run(cli: Cli) -> Result<u8, Error> {
    let plain = CommandArgs::default;
    match cli.command {
        Cmd::Pullback(c) => run_scenario_command(Command::Pullback, c, plain()),
        Cmd::Pushforward(c) => run_scenario_command(Command::Pushforward, c, plain()),
        Cmd::Degree(c) => run_scenario_command(Command::Degree, c, plain()),
        Cmd::Slope(c) => run_scenario_command(Command::Slope, c, plain()),
        Cmd::Stability(c) => run_scenario_command(Command::Stability, c, plain()),
        Cmd::Compose(c) => run_scenario_command(Command::Compose, c, plain()),
        Cmd::Validate(c) => run_scenario_command(Command::Validate, c, plain()),
        Cmd::Check(c) => run_scenario_command(Command::Check, c, plain()),
        Cmd::Residue {
            common,
            pullback,
            pushforward,
        } => run_scenario_command(
            Command::Residue,
            common,
            CommandArgs {
                pullback,
                pushforward,
                ..plain()
            },
        ),
        Cmd::Naht { table, common, m } => {
            let table = match table {
                Table::Table1 => "table1",
                Table::Table2 => "table2",
            };
            run_scenario_command(
                Command::Naht,
                common,
                CommandArgs {
                    table: Some(table.to_owned()),
                    m,
                    ..plain()
                },
            )
        }
        Cmd::Verify {
            seed,
            trials,
            max_rank,
            max_degree,
            max_multiplicity,
            weight_denominator_bound,
            property,
            out,
        } => {
            let config = VerifierConfig {
                seed,
                trials,
                max_rank,
                max_degree,
                max_multiplicity,
                weight_denominator_bound,
            };
            let names: Vec<&str> = property.iter().map(String::as_str).collect();
            let report = verify_with(&config, &Ops::default(), &names).map_err(|e| match e {
                Error::InvalidValue(m) => Error::Usage(m),
                other => other,
            })?;
            match out {
                Output::Table => print!("{}", report.render()),
                Output::Json => println!("{}", report.to_json()),
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pcalc: {e}");
            ExitCode::from(e.exit_status())
        }
    }
}
