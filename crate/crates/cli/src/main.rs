use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsp_mediator::scenario_io::GeneratorBlock;
use gsp_mediator::{
    accounting_check, compare, fitness_sweep, generate_scenario, market_failures, parse_scenario,
    run_baseline, verify_sne, write_baseline_report, write_report, write_sweep, Error,
    GeneratorParams, MarketScenario, ReportFormat, ScenarioDocument, SneOutcome, SneVerdict,
    Tolerance,
};
use rayon::prelude::*;

/// Equilibrium outcomes of a GSP position auction with a reselling mediator.
///
/// Exit status: 0 on success, 1 on bad input, 2 when an invariant check
/// fails.
#[derive(Debug, Parser)]
#[command(name = "gspm", version)]
struct Cli {
    /// Numerical tolerance for every invariant check.
    #[arg(long, global = true, env = "GSPM_TOLERANCE", default_value_t = Tolerance::DEFAULT.value())]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and print its outcome.
    Run(ScenarioArgs),
    /// Compare a scenario with and without its mediator and check every
    /// comparative-statics identity.
    Compare(ScenarioArgs),
    /// Re-run a scenario over a range of mediator fitness values.
    Sweep(SweepArgs),
    /// Check equilibria and invariants on one scenario or a seeded campaign.
    Verify(VerifyArgs),
    /// Write seeded random scenarios.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "table", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    #[arg(long)]
    f_min: f64,
    #[arg(long)]
    f_max: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    /// Force L = K and a sub-auction order equal to the primary order.
    #[arg(long)]
    aligned: bool,
    #[arg(long)]
    min_slots: Option<usize>,
    #[arg(long)]
    max_slots: Option<usize>,
    #[arg(long)]
    max_advertisers: Option<usize>,
}

impl GeneratorArgs {
    fn params(&self) -> GeneratorParams {
        let mut p = GeneratorParams {
            aligned: self.aligned,
            ..GeneratorParams::default()
        };
        if let Some(n) = self.min_slots {
            p.min_slots = n;
        }
        if let Some(n) = self.max_slots {
            p.max_slots = n;
        }
        if let Some(n) = self.max_advertisers {
            p.max_advertisers = n;
            p.min_advertisers = p.min_advertisers.min(n);
        }
        p
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Verify a single scenario file instead of a campaign.
    #[arg(long, conflicts_with_all = ["seed", "count"])]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Raise the top primary price above the top score before checking.
    #[arg(long, hide = true)]
    corrupt_prices: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Directory for `scenario-NNNN.toml` files; standard output if absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
        .map_err(|_| format!("expected `table` or `structured`, got `{s}`"))
}

enum Failure {
    Input(String),
    Invariant,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(format!("error[{}]: {e}", e.code()))
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant) => ExitCode::from(2),
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    if !(cli.tolerance.is_finite() && cli.tolerance > 0.0) {
        return Err(Failure::Input(format!(
            "tolerance must be positive, got {}",
            cli.tolerance
        )));
    }
    let tol = Tolerance(cli.tolerance);
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Compare(args) => cmd_compare(&args, tol),
        Command::Sweep(args) => cmd_sweep(&args, tol),
        Command::Verify(args) => cmd_verify(&args, tol),
        Command::Gen(args) => cmd_gen(&args),
    }
}

fn load(path: &Path) -> Result<MarketScenario, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
        .map_err(|e| Failure::Input(format!("{}: error[{}]: {e}", path.display(), e.code())))
}

fn emit(text: &str) -> CmdResult {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn cmd_run(args: &ScenarioArgs) -> CmdResult {
    let scenario = load(&args.scenario)?;
    let text = if scenario.mediator.is_some() {
        write_report(&compare(&scenario)?, args.format)
    } else {
        write_baseline_report(&scenario, &run_baseline(&scenario)?, args.format)
    };
    emit(&text)
}

fn cmd_compare(args: &ScenarioArgs, tol: Tolerance) -> CmdResult {
    let scenario = load(&args.scenario)?;
    if scenario.mediator.is_none() {
        return Err(Failure::Input("mediator required for compare".into()));
    }
    let report = compare(&scenario)?;
    emit(&write_report(&report, args.format))?;
    let violations = report.violations(tol);
    for v in &violations {
        eprintln!("violation: {v}");
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

fn cmd_sweep(args: &SweepArgs, tol: Tolerance) -> CmdResult {
    let scenario = load(&args.input.scenario)?;
    if scenario.mediator.is_none() {
        return Err(Failure::Input("mediator required for sweep".into()));
    }
    let rows = fitness_sweep(&scenario, args.f_min, args.f_max, args.steps, tol)?;
    emit(&write_sweep(&rows, args.input.format))
}

fn corrupt(auction: &mut SneOutcome) {
    if let (Some(top), Some(price)) = (auction.scores.first(), auction.price_scores.first_mut()) {
        *price = top + 1.0;
    }
}

/// All failures for one scenario; empty when it passes.
fn check(scenario: &MarketScenario, tol: Tolerance, corrupt_prices: bool) -> Vec<String> {
    let result = if scenario.mediator.is_some() {
        compare(scenario).and_then(|mut report| {
            if corrupt_prices {
                corrupt(&mut report.with_mediator.p_auction);
            }
            market_failures(scenario, &report, tol)
        })
    } else {
        run_baseline(scenario).and_then(|mut base| {
            if corrupt_prices {
                corrupt(&mut base.p_auction);
            }
            let mut out = Vec::new();
            let verdict = verify_sne(
                &scenario.ctr,
                &base.p_auction.scores,
                &base.p_auction.price_scores,
                tol,
            )?;
            if let SneVerdict::Fail(w) = verdict {
                out.push(format!("baseline auction not in equilibrium: {w:?}"));
            }
            let residual = accounting_check(&base);
            if residual.abs() > tol.value() * (1.0 + base.efficiency.abs()) {
                out.push(format!("accounting residual (baseline) = {residual}"));
            }
            Ok(out)
        })
    };
    result.unwrap_or_else(|e| vec![format!("engine error[{}]: {e}", e.code())])
}

fn cmd_verify(args: &VerifyArgs, tol: Tolerance) -> CmdResult {
    if let Some(path) = &args.scenario {
        let scenario = load(path)?;
        let failures = check(&scenario, tol, args.corrupt_prices);
        for f in &failures {
            eprintln!("violation: {f}");
        }
        let passed = usize::from(failures.is_empty());
        emit(&format!("{passed}/1 pass\n"))?;
        return if failures.is_empty() {
            Ok(())
        } else {
            Err(Failure::Invariant)
        };
    }

    if args.count == 0 {
        return Err(Failure::Input("--count must be at least 1".into()));
    }
    let params = args.generator.params();
    params.validate()?;
    let results: Vec<(u64, MarketScenario, Vec<String>)> = (0..args.count)
        .into_par_iter()
        .map(|i| {
            let scenario = generate_scenario(args.seed, i, &params)?;
            let failures = check(&scenario, tol, args.corrupt_prices);
            Ok((i, scenario, failures))
        })
        .collect::<Result<_, Error>>()?;
    let passed = results.iter().filter(|(_, _, f)| f.is_empty()).count();
    emit(&format!("{passed}/{} pass\n", args.count))?;
    let Some((index, scenario, failures)) = results.into_iter().find(|(_, _, f)| !f.is_empty())
    else {
        return Ok(());
    };
    eprintln!("first failure: seed {} index {index}", args.seed);
    for f in &failures {
        eprintln!("violation: {f}");
    }
    let block = GeneratorBlock {
        seed: args.seed,
        index,
        params,
    };
    emit(&format!(
        "\n{}",
        ScenarioDocument::from_scenario(&scenario, Some(block)).to_toml()
    ))?;
    Err(Failure::Invariant)
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    if args.count == 0 {
        return Err(Failure::Input("--count must be at least 1".into()));
    }
    let params = args.generator.params();
    params.validate()?;
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    for index in 0..args.count {
        let scenario = generate_scenario(args.seed, index, &params)?;
        let block = GeneratorBlock {
            seed: args.seed,
            index,
            params: params.clone(),
        };
        let text = ScenarioDocument::from_scenario(&scenario, Some(block)).to_toml();
        match &args.out_dir {
            Some(dir) => {
                let path = dir.join(format!("scenario-{index:04}.toml"));
                fs::write(&path, text)
                    .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            None => {
                if index > 0 {
                    emit("\n")?;
                }
                emit(&format!("# seed {} index {index}\n{text}", args.seed))?;
            }
        }
    }
    Ok(())
}
