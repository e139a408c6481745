use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xyzsov::campaign::{self, Config, Report, Verdict};

#[derive(Parser)]
#[command(name = "xyzsov", version, about = "Verification campaigns for the open XYZ spin chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Algebraic identities and transfer-matrix structure.
    VerifyAlgebra(Common),
    /// Orthogonality of the separation-of-variables bases.
    Sov(Common),
    /// Direct spectrum against the discrete SoV characterisation.
    Spectrum(Common),
    /// Constrained TQ solutions and their eigenvectors.
    Bethe(Common),
    /// Scalar-product formulas against the explicit SoV sum.
    ScalarProducts(Common),
    /// Convergence towards the XXZ chain.
    TrigLimit(Common),
    /// Every suite selected by the configuration (all suites by default).
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML campaign file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Chain length, overriding each suite's defaults.
    #[arg(long)]
    n: Option<usize>,
    /// Run only this suite (repeatable).
    #[arg(long)]
    suite: Vec<String>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table of all checks.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn config_for(default_suites: Option<&[&str]>, c: &Common) -> xyzsov::Result<Config> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = default_suites {
        cfg.suites = s.iter().map(|x| x.to_string()).collect();
    }
    if !c.suite.is_empty() {
        cfg.suites = c.suite.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(n) = c.n {
        cfg.sizes = Some(vec![n]);
    }
    if let Some(s) = c.tolerance_scale {
        cfg.tolerance_scale = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &Report, c: &Common) -> xyzsov::Result<()> {
    match &c.out {
        Some(p) => report.write_json(p)?,
        None => println!("{}", report.to_json()?),
    }
    if let Some(p) = &c.csv {
        report.write_csv(p)?;
    }
    for ch in report.checks.iter().filter(|c| c.verdict != Verdict::Pass) {
        eprintln!(
            "{:?} {}/{} value={:e} tol={:e}{}",
            ch.verdict,
            ch.suite,
            ch.name,
            ch.value,
            ch.tolerance,
            ch.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    let s = &report.summary;
    eprintln!("{} pass, {} fail, {} inconclusive", s.pass, s.fail, s.inconclusive);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (suites, common): (Option<&[&str]>, &Common) = match &cli.command {
        Command::VerifyAlgebra(c) => (Some(&["algebra", "transfer"]), c),
        Command::Sov(c) => (Some(&["sov"]), c),
        Command::Spectrum(c) => (Some(&["spectrum"]), c),
        Command::Bethe(c) => (Some(&["bethe"]), c),
        Command::ScalarProducts(c) => (Some(&["scalar"]), c),
        Command::TrigLimit(c) => (Some(&["trig"]), c),
        Command::Report(c) => (None, c),
    };
    let run = || -> xyzsov::Result<i32> {
        let cfg = config_for(suites, common)?;
        let report = campaign::run_campaign(cfg)?;
        emit(&report, common)?;
        Ok(report.exit_code())
    };
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
