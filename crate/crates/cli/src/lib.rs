//! `groupbh` command line: run weighted BH procedures on p-value files,
//! Monte Carlo studies, identity sweeps, and layout generation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use groupbh::format::{forest_from_json, forest_to_json, parse_pvalues, parse_truth};
use groupbh::layouts::eeg_forest;
use groupbh::simulate::{
    even_grid, prds_plan, run_lambda_study, run_study, simulation_tree, SimulationPlan,
    PRDS_LAMBDAS,
};
use groupbh::validate::{run_sweep, SweepConfig};
use groupbh::{
    outcome_metrics, run_method, AdaptiveOptions, AncestorEstimate, ClassificationForest, HierTree,
    Method,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "groupbh",
    version,
    about = "Weighted BH for grouped hypotheses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one procedure to a p-value file.
    Test(TestArgs),
    /// Monte Carlo study on the two-level overlapping layout.
    Simulate(SimulateArgs),
    /// Check the weight identities on random configurations.
    Validate(ValidateArgs),
    /// Write a classification file for a built-in layout.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long, default_value = "bh")]
    pub method: Method,
    #[arg(long)]
    pub pvalues: PathBuf,
    /// Classification JSON; without it the hypotheses are unclassified.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Null labels (1 = true null); required by oracle methods.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value = "direct")]
    pub ancestor_estimate: AncestorEstimate,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    /// Sweep the signal density.
    Density,
    /// Positively dependent statistics, sweep lambda.
    Prds,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "density")]
    pub study: Study,
    #[arg(long, default_value_t = 500)]
    pub replicates: usize,
    #[arg(long)]
    pub rho_l1: Option<f64>,
    #[arg(long)]
    pub rho_l2: Option<f64>,
    /// Number of equispaced values of 1 - pi0 in [0, 1].
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Tuning parameter; for the prds study a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<Method>,
    #[arg(long, default_value = "direct")]
    pub ancestor_estimate: AncestorEstimate,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "direct")]
    pub ancestor_estimate: AncestorEstimate,
    /// JSON-lines report, one record per identity and trial.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// 50 x 100 two-level overlapping tree.
    Simulation,
    /// Two trees over 61 x 61 x T electrode pairs.
    Eeg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub layout: Layout,
    /// Time points for the eeg layout.
    #[arg(long, default_value_t = 256)]
    pub times: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl From<groupbh::Error> for CliError {
    fn from(e: groupbh::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn cmd_test(args: &TestArgs) -> CliResult<String> {
    let pvalues = parse_pvalues(&read(&args.pvalues)?)?;
    let forest = match &args.spec {
        Some(p) => forest_from_json(&read(p)?)?,
        None => ClassificationForest::single(HierTree::flat(pvalues.len())),
    };
    if forest.n() != pvalues.len() {
        return Err(CliError::Input(format!(
            "classification covers {} hypotheses but {} p-values were given",
            forest.n(),
            pvalues.len()
        )));
    }
    let truth = match &args.truth {
        Some(p) => {
            let t = parse_truth(&read(p)?)?;
            t.check_len(pvalues.len())?;
            Some(t)
        }
        None => None,
    };
    let opts = AdaptiveOptions {
        lambda: args.lambda,
        ancestors: args.ancestor_estimate,
    };
    let (weights, outcome) = run_method(
        args.method,
        &forest,
        &pvalues,
        truth.as_ref(),
        args.alpha,
        opts,
    )?;

    let mut s = String::new();
    let _ = writeln!(s, "# method={}", args.method);
    let _ = writeln!(s, "# n={}", pvalues.len());
    let _ = writeln!(s, "# trees={}", forest.s_count());
    let _ = writeln!(s, "# alpha={}", args.alpha);
    if !args.method.is_oracle() && args.method != Method::Bh {
        let _ = writeln!(s, "# lambda={}", args.lambda);
        let _ = writeln!(
            s,
            "# ancestor_estimate={}",
            match args.ancestor_estimate {
                AncestorEstimate::Direct => "direct",
                AncestorEstimate::Lineage => "lineage",
            }
        );
    }
    let _ = writeln!(s, "# rejections={}", outcome.rejections());
    let _ = writeln!(s, "# threshold_index={}", outcome.threshold_index);
    let _ = writeln!(s, "# cutoff={}", outcome.cutoff());
    if let Some(t) = &truth {
        let m = outcome_metrics(&outcome, t)?;
        let _ = writeln!(s, "# false_rejections={}", m.false_rejections);
        let _ = writeln!(s, "# fdp={}", m.fdp);
        let _ = writeln!(s, "# power={}", m.power);
    }
    s.push_str("index,p,weight,weighted_p,rejected\n");
    for i in 0..pvalues.len() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{}",
            pvalues[i], weights[i], outcome.weighted[i], outcome.rejected[i] as u8
        );
    }
    Ok(s)
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let base = match args.study {
        Study::Density => SimulationPlan {
            grid: even_grid(args.grid),
            ..SimulationPlan::default()
        },
        Study::Prds => prds_plan(),
    };
    let mut plan = SimulationPlan {
        replicates: args.replicates,
        seed: args.seed,
        alpha: args.alpha,
        ancestors: args.ancestor_estimate,
        rho_l1: args.rho_l1.unwrap_or(base.rho_l1),
        rho_l2: args.rho_l2.unwrap_or(base.rho_l2),
        ..base
    };
    if !args.method.is_empty() {
        plan.methods = args.method.clone();
    }
    let summary = match args.study {
        Study::Density => {
            match args.lambda.as_slice() {
                [] => {}
                [l] => plan.lambda = *l,
                _ => {
                    return Err(CliError::Input(
                        "the density study takes a single --lambda".into(),
                    ))
                }
            }
            run_study(&plan)?
        }
        Study::Prds => {
            let lambdas = if args.lambda.is_empty() {
                PRDS_LAMBDAS.to_vec()
            } else {
                args.lambda.clone()
            };
            run_lambda_study(&plan, &lambdas)?
        }
    };
    let mut buf = Vec::new();
    summary.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Returns the JSON-lines report and a human summary; fails iff some
/// identity fails.
pub fn cmd_validate(args: &ValidateArgs) -> CliResult<(String, String, bool)> {
    let cfg = SweepConfig {
        trials: args.trials,
        seed: args.seed,
        lambda: args.lambda,
        alpha: args.alpha,
        ancestors: args.ancestor_estimate,
        corrupt: args.corrupt,
        ..SweepConfig::default()
    };
    let report = run_sweep(&cfg)?;
    let mut lines = String::new();
    for r in &report.records {
        lines.push_str(&serde_json::to_string(r).map_err(groupbh::Error::from)?);
        lines.push('\n');
    }
    let mut human = String::new();
    let _ = writeln!(
        human,
        "{:<28} {:>8} {:>8}  worst",
        "identity", "passed", "checked"
    );
    for t in report.tally() {
        let _ = writeln!(
            human,
            "{:<28} {:>8} {:>8}  {:e}",
            t.identity, t.passed, t.checked, t.worst
        );
    }
    let failed = report.failures().count();
    let _ = writeln!(human, "{} records, {} failed", report.records.len(), failed);
    Ok((lines, human, report.all_pass()))
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<String> {
    let forest = match args.layout {
        Layout::Simulation => {
            ClassificationForest::single(simulation_tree(&SimulationPlan::default()))
        }
        Layout::Eeg => {
            if args.times == 0 {
                return Err(CliError::Input("--times must be positive".into()));
            }
            eeg_forest(args.times)
        }
    };
    let mut json = forest_to_json(&forest)?;
    json.push('\n');
    Ok(json)
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Test(a) => {
            let text = cmd_test(a)?;
            emit(&a.out, &text)?;
            if a.out.is_some() {
                let summary: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
                eprintln!("{}", summary.join("\n"));
            }
            Ok(())
        }
        Command::Simulate(a) => emit(&a.out, &cmd_simulate(a)?),
        Command::Validate(a) => {
            let (lines, human, ok) = cmd_validate(a)?;
            if let Some(p) = &a.out {
                emit(&Some(p.clone()), &lines)?;
            }
            print!("{human}");
            if ok {
                Ok(())
            } else {
                Err(CliError::Failed("some identities failed".into()))
            }
        }
        Command::Generate(a) => emit(&a.out, &cmd_generate(a)?),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("{msg}");
            EXIT_FAILED
        }
    }
}
