use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qpbound::lp_builder::{assemble, solve_bound, FunctionShape, ProblemKind};
use qpbound::lp_solver::export_lp_text;
use qpbound::model::{parse_model, solve_rate_pair, ModelDoc, PerturbationPair, PerturbationRule};
use qpbound::oracle::{stationary_truncated, steady_state_value};
use qpbound::piecewise::CLinearFn;
use qpbound::sweep::{format_sig, run_sweep, write_csv, SweepSpec};
use qpbound::verify::{self, Defect, Suite, VerifyOptions};
use qpbound::{Coefficients, Measure, Pair, ProductForm};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_OPTIMAL: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "qpbound", version, about = "Certified bounds for random walks in the quarter-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one bound program and print the bound.
    Bound(BoundArgs),
    /// Run a parameter sweep described by a JSON spec and write CSV.
    Sweep(SweepArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Steady-state value of a measure from the truncated chain.
    Oracle(OracleArgs),
    /// Write a bound program in LP format.
    ExportLp(BoundArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Model JSON: an explicit kernel or a family stanza.
    #[arg(long)]
    model: PathBuf,
    /// Perturbed model: a JSON path or a rule (split, swap, swap-mirrored) applied to a family stanza.
    #[arg(long)]
    perturbed: String,
    /// Performance measure: indicator_origin, n1, n2, one, or a JSON path.
    #[arg(long, default_value = "indicator_origin")]
    measure: String,
    #[arg(long, default_value = "upper-error")]
    kind: String,
    /// Bias-bound shape: clinear, global-linear or constant.
    #[arg(long, default_value = "clinear")]
    shape: String,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Where to write the certificate JSON (bound) or LP text (export-lp).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec JSON.
    spec: PathBuf,
    /// Output CSV; defaults to the spec's `out`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle tolerance, overriding the spec.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (repeatable); all by default.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Random cases for the randomized suites.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Additional model files to check.
    #[arg(long)]
    model: Vec<PathBuf>,
    /// Dump the coefficient tables as JSON instead of running suites.
    #[arg(long)]
    coefficients: bool,
    /// Write the JSON report here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "indicator_origin")]
    measure: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the truncated stationary distribution as CSV (n1,n2,value).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INPUT, message: message.to_string() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelDoc, Failure> {
    parse_model(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_measure(spec: &str) -> Result<Measure, Failure> {
    if let Some(f) = CLinearFn::named(spec) {
        return Ok(f);
    }
    CLinearFn::from_json(&read(Path::new(spec))?).map_err(|e| input(format!("{spec}: {e}")))
}

struct Problem {
    kind: ProblemKind,
    shape: FunctionShape,
    pair: Pair,
    r: ProductForm,
    f: Measure,
}

fn load_problem(args: &ProblemArgs) -> Result<Problem, Failure> {
    let doc = load_model(&args.model)?;
    let perturbed = match args.perturbed.parse::<PerturbationRule>() {
        Ok(rule) => {
            let family = doc
                .family
                .ok_or_else(|| input(format!("perturbation rule `{rule}` needs a family stanza in {}", args.model.display())))?;
            family.perturb(rule).walk().map_err(|e| input(format!("perturbed model: {e}")))?
        }
        Err(_) => load_model(Path::new(&args.perturbed))?.walk,
    };
    let pair = PerturbationPair::new(doc.walk, perturbed).map_err(input)?;
    let r = solve_rate_pair(&pair.perturbed).map_err(|e| input(format!("perturbed model: {e}")))?;
    Ok(Problem {
        kind: args.kind.parse().map_err(input)?,
        shape: args.shape.parse().map_err(input)?,
        pair,
        r,
        f: load_measure(&args.measure)?,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(input),
    }
}

fn cmd_bound(args: BoundArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    let out = solve_bound(p.kind, &p.pair, &p.r, &p.f, p.shape).map_err(input)?;
    println!("kind: {}", p.kind);
    println!("shape: {}", p.shape.key());
    println!("r: {} {}", format_sig(p.r.r1()), format_sig(p.r.r2()));
    println!("status: {}", out.stats.status.name());
    println!("variables: {}", out.stats.variables);
    println!("constraints: {}", out.stats.constraints);
    println!("iterations: {}", out.stats.iterations);
    match &out.certificate {
        Some(cert) => {
            println!("bound: {}", format_sig(cert.bound));
            if let Some(path) = &args.out {
                let text = serde_json::to_string_pretty(&cert.to_json()).expect("serialisable");
                write_out(Some(path), &(text + "\n"))?;
            }
            Ok(())
        }
        None => {
            println!("bound: inf");
            Err(Failure { code: EXIT_NOT_OPTIMAL, message: format!("no bound: solver status {}", out.stats.status.name()) })
        }
    }
}

fn cmd_export_lp(args: BoundArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    let problem = assemble(p.kind, &p.pair, &p.r, &p.f, p.shape).map_err(input)?;
    write_out(args.out.as_deref(), &export_lp_text(&problem.lp))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut spec = SweepSpec::from_json(&read(&args.spec)?).map_err(input)?;
    if let Some(tol) = args.tol {
        spec.tol = tol;
    }
    let rows = run_sweep(&spec);
    for row in &rows {
        for note in &row.notes {
            eprintln!("{} = {}: {note}", spec.parameter, format_sig(row.value));
        }
    }
    let mut buf = Vec::new();
    write_csv(&spec, &rows, &mut buf).map_err(input)?;
    let target = args.out.or_else(|| spec.out.as_ref().map(PathBuf::from));
    write_out(target.as_deref(), std::str::from_utf8(&buf).expect("utf-8 CSV"))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut models = Vec::new();
    for path in &args.model {
        models.push((path.display().to_string(), load_model(path)?.walk));
    }
    if args.coefficients {
        let list = if models.is_empty() { verify::reference_models() } else { models };
        let mut tables = serde_json::Map::new();
        for (name, w) in &list {
            tables.insert(name.clone(), Coefficients::from_table1(w).to_json());
        }
        let text = serde_json::to_string_pretty(&tables).expect("serialisable") + "\n";
        return write_out(args.out.as_deref(), &text);
    }
    let suites: Vec<Suite> = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(input)?
    };
    let opts = VerifyOptions { random: args.random, seed: args.seed, models, defect: Defect::from_env() };
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for suite in suites {
        let report = verify::run_suite(suite, &opts);
        println!("{}", report.to_json());
        if !report.passed {
            failed.push(suite.key());
        }
        reports.push(report.to_json());
    }
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&json!({ "suites": reports })).expect("serialisable") + "\n";
        write_out(Some(path), &text)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY_FAILED, message: format!("failed suites: {}", failed.join(", ")) })
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let doc = load_model(&args.model)?;
    let f = load_measure(&args.measure)?;
    let value = steady_state_value(&doc.walk, &f, args.tol).map_err(input)?;
    println!("value: {}", format_sig(value.value));
    println!("error_bar: {}", format_sig(value.error_bar));
    println!("m: {}", value.m);
    if let Some(path) = &args.out {
        let dist = stationary_truncated(&doc.walk, value.m, args.tol * 1e-4).map_err(input)?;
        let file = fs::File::create(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        dist.probs.write_csv(io::BufWriter::new(file)).map_err(input)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::ExportLp(a) => cmd_export_lp(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
