//! Command-line driver: group analysis, identity checks, jet counting, and
//! catalog listing, with text or JSON output.
//!
//! Exit codes form a stable contract: 0 success (and the identity holds),
//! 1 verification failure, 2 input error, 3 budget error.

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use motivic_mckay::finite_group::{
    catalog_group, catalog_group_ids, Group, GroupSpec, DEFAULT_GROUP_CAP,
};
use motivic_mckay::jet_oracle::{a_model, jet_count_table, JetBudget, JetProblem};
use motivic_mckay::mckay::McKayReport;
use motivic_mckay::resolution::{
    ade_catalog, catalog_ids, check_mckay_identity, CheckOutcome, ResolutionData,
};
use motivic_mckay::Error;

#[derive(Parser)]
#[command(
    name = "mckay",
    version,
    about = "Exact motivic invariants of finite-group quotient singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class table, weights, and motivic sums for a finite matrix group.
    AnalyzeGroup(AnalyzeArgs),
    /// Compare a resolution's measure with a group's orbifold sum.
    CheckMckay(CheckArgs),
    /// Jet counting table for an equation system over a prime field.
    Jets(JetsArgs),
    /// List the built-in groups and resolutions.
    Catalog(CatalogArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Catalog id (see `mckay catalog`) or path to a group JSON file.
    input: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Element cap for group generation.
    #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
    cap_group: usize,
    /// Print the Euler realization.
    #[arg(long)]
    euler: bool,
    /// Print the Hodge realization.
    #[arg(long)]
    hodge: bool,
    /// Evaluate the sums at L = q.
    #[arg(long, value_name = "q")]
    point_count: Option<u64>,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Catalog id (A:<d>, D:<m>, E6, E7, E8, Z3:111) or path to a
    /// resolution JSON file.
    resolution: String,
    /// Group to compare against: catalog id or JSON path.  Defaults to the
    /// catalog entry's own group; required for resolution files.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
    cap_group: usize,
    /// Print the Euler realizations of both sides.
    #[arg(long)]
    euler: bool,
    /// Print the Hodge realizations of both sides.
    #[arg(long)]
    hodge: bool,
    /// Evaluate both sides at L = q.
    #[arg(long, value_name = "q")]
    point_count: Option<u64>,
}

#[derive(clap::Args)]
struct JetsArgs {
    /// Path to a jet-problem JSON file; omitted, the built-in uv = w^d
    /// model at the origin is used.
    problem: Option<String>,
    /// Field size (prime).
    #[arg(long)]
    q: Option<u64>,
    /// Jet level n.
    #[arg(long)]
    level: Option<u32>,
    /// Exponent d of the built-in model.
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Partition liftable jets by arc class (built-in model only).
    #[arg(long)]
    classify: bool,
    /// Node cap for the enumeration.
    #[arg(long, default_value_t = 100_000_000)]
    cap_budget: u128,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(clap::Args)]
struct CatalogArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            code: if e.is_budget() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::input(format!("invalid JSON: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::AnalyzeGroup(args) => run_analyze(args),
        Command::CheckMckay(args) => run_check(args),
        Command::Jets(args) => run_jets(args),
        Command::Catalog(args) => run_catalog(args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn looks_like_path(s: &str) -> bool {
    s.contains('/') || s.ends_with(".json") || Path::new(s).is_file()
}

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {path}: {e}")))
}

fn load_group_spec(input: &str) -> Result<GroupSpec, Failure> {
    if looks_like_path(input) {
        Ok(serde_json::from_str(&read_file(input)?)?)
    } else {
        Ok(catalog_group(input)?)
    }
}

fn run_analyze(args: AnalyzeArgs) -> Result<ExitCode, Failure> {
    let spec = load_group_spec(&args.input)?;
    let group = Group::generate(&spec, args.cap_group)?;
    let report = McKayReport::build(&group);
    match args.format {
        Format::Text => {
            print!("{}", report.to_text());
            if args.euler {
                println!("euler: {}", report.euler);
            }
            if args.hodge {
                println!("hodge: {}", report.hodge);
            }
            if let Some(q) = args.point_count {
                let m = report.measure_sum.point_count_realize(q)?;
                let f = report.fiber_sum.point_count_realize(q)?;
                println!("point_count(L={q}): measure_sum = {m}, fiber_sum = {f}");
            }
        }
        Format::Json => {
            let mut value = serde_json::to_value(&report)?;
            if let Some(q) = args.point_count {
                let m = report.measure_sum.point_count_realize(q)?;
                let f = report.fiber_sum.point_count_realize(q)?;
                value["point_count"] = json!({
                    "q": q,
                    "measure_sum": m.to_string(),
                    "fiber_sum": f.to_string(),
                });
            }
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_check_inputs(args: &CheckArgs) -> Result<(ResolutionData, GroupSpec), Failure> {
    if looks_like_path(&args.resolution) {
        let res: ResolutionData = serde_json::from_str(&read_file(&args.resolution)?)?;
        let group = args
            .group
            .as_deref()
            .ok_or_else(|| Failure::input("--group is required with a resolution file"))?;
        Ok((res, load_group_spec(group)?))
    } else {
        let entry = ade_catalog(&args.resolution)?;
        let spec = match args.group.as_deref() {
            Some(g) => load_group_spec(g)?,
            None => entry.group,
        };
        Ok((entry.resolution, spec))
    }
}

fn realization_lines(
    outcome: &CheckOutcome,
    euler: bool,
    hodge: bool,
    point_count: Option<u64>,
) -> Result<Vec<(String, String, String)>, Failure> {
    let mut lines = Vec::new();
    if euler {
        lines.push((
            "euler".to_string(),
            outcome.lhs.euler_realize().to_string(),
            outcome.rhs.euler_realize().to_string(),
        ));
    }
    if hodge {
        lines.push((
            "hodge".to_string(),
            outcome.lhs.hodge_realize().to_string(),
            outcome.rhs.hodge_realize().to_string(),
        ));
    }
    if let Some(q) = point_count {
        lines.push((
            format!("point_count(L={q})"),
            outcome.lhs.point_count_realize(q)?.to_string(),
            outcome.rhs.point_count_realize(q)?.to_string(),
        ));
    }
    Ok(lines)
}

fn run_check(args: CheckArgs) -> Result<ExitCode, Failure> {
    let (res, spec) = load_check_inputs(&args)?;
    let group = Group::generate(&spec, args.cap_group)?;
    let outcome = check_mckay_identity(&res, &group)?;
    let extra = realization_lines(&outcome, args.euler, args.hodge, args.point_count)?;
    let lhs_text = outcome.lhs.simplified().to_string();
    let rhs_text = outcome.rhs.simplified().to_string();
    match args.format {
        Format::Text => {
            println!("lhs: {lhs_text}");
            println!("rhs: {rhs_text}");
            for (name, l, r) in &extra {
                println!("{name}: lhs = {l}, rhs = {r}");
            }
            println!("holds: {}", outcome.holds);
        }
        Format::Json => {
            let mut value = serde_json::to_value(&outcome)?;
            value["lhs_text"] = json!(lhs_text);
            value["rhs_text"] = json!(rhs_text);
            for (name, l, r) in &extra {
                value[name] = json!({ "lhs": l, "rhs": r });
            }
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
    }
    if outcome.holds {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn run_jets(args: JetsArgs) -> Result<ExitCode, Failure> {
    let budget = JetBudget {
        node_cap: args.cap_budget,
        ..JetBudget::default()
    };
    let (problem, classify) = match &args.problem {
        Some(path) => {
            if args.classify {
                return Err(Failure::input(
                    "--classify applies only to the built-in model",
                ));
            }
            let mut p: JetProblem = serde_json::from_str(&read_file(path)?)?;
            if let Some(q) = args.q {
                p.q = q;
            }
            if let Some(level) = args.level {
                p.level = level;
            }
            (p, None)
        }
        None => {
            let p = a_model(args.d, args.q.unwrap_or(3), args.level.unwrap_or(1))?;
            (p, args.classify.then_some(args.d))
        }
    };
    let table = jet_count_table(&problem, classify, &budget)?;
    match args.format {
        Format::Text => print!("{}", table.to_text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&table)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_catalog(args: CatalogArgs) -> Result<ExitCode, Failure> {
    let groups = catalog_group_ids();
    let resolutions = catalog_ids();
    match args.format {
        Format::Text => {
            println!("groups:");
            for id in &groups {
                println!("  {id}");
            }
            println!("resolutions:");
            for id in &resolutions {
                println!("  {id}");
            }
        }
        Format::Json => {
            let value = json!({ "groups": groups, "resolutions": resolutions });
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}
