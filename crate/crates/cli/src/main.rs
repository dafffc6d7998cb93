use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use voalog_core::descriptor::{parse_point, ModeDescriptor};
use voalog_core::modes::ExtendedSector;
use voalog_core::rational::{fmt_q, parse_q, Q64};
use voalog_core::report::{Format, Status};
use voalog_core::suites::{run_suite, SuiteConfig};
use voalog_core::{Case, Error, FockElement};

#[derive(Parser)]
#[command(name = "voalog", version, about = "Exact checks for logarithmic modules of lattice vertex algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its report
    Verify(VerifyArgs),
    /// Print the basis of one weight component of a sector
    Basis(BasisArgs),
    /// Apply one mode to a state
    Apply(ApplyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// triplet, wpp, super, affine, logint or all
    #[arg(long)]
    suite: String,
    #[arg(long)]
    p: Option<i64>,
    #[arg(long)]
    pprime: Option<i64>,
    /// Largest weight the checks look at
    #[arg(long, default_value_t = 6)]
    cutoff: i64,
    /// Write the report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long, default_value = "standard")]
    cocycle: String,
    #[arg(long, env = "VOALOG_JOBS", default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Triplet,
    Super,
    Affine,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long = "case", value_enum, default_value = "triplet")]
    case: CaseArg,
    /// Defaults to 2 (triplet) or 3 (super)
    #[arg(long)]
    p: Option<i64>,
    #[arg(long, default_value_t = 1)]
    pprime: i64,
}

impl CaseArgs {
    fn build(&self) -> Result<Case, Error> {
        match self.case {
            CaseArg::Triplet => Case::triplet(self.p.unwrap_or(2), self.pprime),
            CaseArg::Super => Case::super_ns(self.p.unwrap_or(3), self.pprime),
            CaseArg::Affine => {
                if self.p.is_some() {
                    return Err(Error::Config("the affine case takes no --p".into()));
                }
                Ok(Case::affine())
            }
        }
    }
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Sector representative: coefficient of α, or "a,b" for aγ + bδ
    #[arg(long, allow_hyphen_values = true)]
    sector: String,
    #[arg(long, allow_hyphen_values = true)]
    weight: String,
    /// δ-coordinate window (affine case)
    #[arg(long, allow_hyphen_values = true)]
    charge: Option<String>,
    /// Use V_{λ+L} ⊕ V_{λ+shift+L} of the case's extended algebra
    #[arg(long)]
    extended: bool,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Mode descriptor as JSON
    #[arg(long)]
    op: String,
    /// State as JSON
    #[arg(long)]
    to: String,
}

fn rational(s: &str) -> Result<Q64, Error> {
    parse_q(s).ok_or_else(|| Error::Config(format!("not a rational: {s:?}")))
}

fn parse_json(what: &str, s: &str) -> Result<Value, Error> {
    serde_json::from_str(s).map_err(|e| Error::Config(format!("{what} is not valid JSON: {e}")))
}

fn verify(a: VerifyArgs) -> Result<bool, Error> {
    let format: Format = a.format.parse().map_err(Error::Config)?;
    let mut cfg = SuiteConfig::new(a.suite.parse()?);
    cfg.p = a.p;
    cfg.pprime = a.pprime;
    cfg.cutoff = a.cutoff;
    cfg.cocycle = a.cocycle;
    cfg.jobs = a.jobs;
    let report = run_suite(&cfg)?;
    let text = report.render(format);
    match &a.report {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!(
        "{}: {} pass, {} fail, {} skipped",
        cfg.suite.as_str(),
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped),
    );
    Ok(report.passed())
}

fn basis(a: BasisArgs) -> Result<bool, Error> {
    let case = a.case.build()?;
    let coords: Vec<String> = a.sector.split(',').map(|s| s.trim().to_string()).collect();
    let rep = parse_point(&coords)?;
    let weight = rational(&a.weight)?;
    let charge = a.charge.as_deref().map(rational).transpose()?;
    let basis = if a.extended {
        case.extended_basis(&ExtendedSector::new(rep, case.shift), weight, charge)?
    } else {
        case.graded_basis(&rep, weight, charge)?
    };
    let out = json!({
        "case": case.name(),
        "sector": rep.0[..case.cfg.rank].iter().map(|c| fmt_q(*c)).collect::<Vec<_>>(),
        "weight": fmt_q(weight),
        "dim": basis.len(),
        "basis": basis.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(true)
}

fn apply(a: ApplyArgs) -> Result<bool, Error> {
    let case = a.case.build()?;
    let op = ModeDescriptor::from_json(&parse_json("--op", &a.op)?)?;
    let w = FockElement::from_json(&parse_json("--to", &a.to)?)?;
    let out = op.apply(&case, &w)?;
    println!("{}", serde_json::to_string_pretty(&out.to_json()).expect("json"));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Basis(a) => basis(a),
        Command::Apply(a) => apply(a),
    };
    match run {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
