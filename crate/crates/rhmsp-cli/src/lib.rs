//! Batch command-line surface for the `rhmsp` library.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or a runtime
//! error, 2 on a usage or configuration error.

pub mod config;
pub mod output;
pub mod suite;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{parse_flat, RunConfig, SEED_ENV};
use output::Staging;
use suite::Ctx;

#[derive(Parser, Debug)]
#[command(name = "rhmsp", version, about = "Simulation and verification suites for harmonizable multifractional stable processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key=value` configuration file.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output directory, or a `.csv` file for `simulate`.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    /// Replace an existing non-empty output.
    #[arg(long, global = true)]
    pub force: bool,
    /// Overrides the config file and RHMSP_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Reduced sizes for smoke runs.
    #[arg(long, global = true)]
    pub quick: bool,

    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub hurst: Option<String>,
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// `start:end:count`, inclusive endpoints.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub paths: Option<String>,
    #[arg(long, global = true)]
    pub terms: Option<String>,
    #[arg(long, global = true)]
    pub h: Option<String>,
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long, global = true)]
    pub x: Option<String>,
    /// Comma-separated; `2^-k` accepted.
    #[arg(long, global = true)]
    pub u: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true)]
    pub times: Option<String>,
    #[arg(long, global = true)]
    pub coeffs: Option<String>,
    #[arg(long, global = true)]
    pub center: Option<String>,
    #[arg(long, global = true)]
    pub spacings: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub deltas: Option<String>,
    #[arg(long, global = true)]
    pub bins: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Sample paths to CSV.
    Simulate,
    /// Empirical against exact characteristic function at one point.
    CfCheck,
    /// α-norm of a finite-dimensional combination.
    Norm,
    /// Local nondeterminism ratio study.
    Lnd,
    /// Localizability error over a δ schedule.
    Localize,
    /// Occupation densities, and the second moment when `--h` is given.
    Localtime,
    /// Fourier transform of the Y kernel against its closed form.
    FtCheck,
    /// Hölder slope of simulated paths.
    Holder,
    /// Full acceptance suite.
    VerifyAll,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let mut seed_given = false;
    if let Some(p) = &cli.spec {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        let pairs = parse_flat(&text).map_err(|e| format!("{}: {e}", p.display()))?;
        seed_given |= pairs.iter().any(|(k, _)| k == "seed");
        cfg.apply(&pairs).map_err(|e| e.to_string())?;
    }
    for kv in &cli.sets {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects key=value, got `{kv}`"))?;
        seed_given |= k.trim() == "seed";
        cfg.set(k.trim(), v.trim()).map_err(|e| e.to_string())?;
    }
    let flags = [
        ("alpha", &cli.alpha),
        ("hurst", &cli.hurst),
        ("kernel", &cli.kernel),
        ("grid", &cli.grid),
        ("paths", &cli.paths),
        ("terms", &cli.terms),
        ("h", &cli.h),
        ("t", &cli.t),
        ("x", &cli.x),
        ("u", &cli.u),
        ("lambda", &cli.lambda),
        ("times", &cli.times),
        ("coeffs", &cli.coeffs),
        ("center", &cli.center),
        ("spacings", &cli.spacings),
        ("n", &cli.n),
        ("deltas", &cli.deltas),
        ("bins", &cli.bins),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v).map_err(|e| e.to_string())?;
        }
    }
    if cli.quick {
        cfg.set("quick", "true").map_err(|e| e.to_string())?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string()).map_err(|e| e.to_string())?;
    } else if !seed_given {
        if let Ok(v) = std::env::var(SEED_ENV) {
            v.trim().parse::<u64>().map_err(|_| format!("{SEED_ENV}: expected a nonnegative integer, got `{v}`"))?;
            cfg.set("seed", v.trim()).map_err(|e| e.to_string())?;
        }
    }
    // fail early on malformed values
    cfg.spec().map_err(|e| e.to_string())?;
    cfg.quad().map_err(|e| e.to_string())?;
    cfg.grid().map_err(|e| e.to_string())?;
    for key in ["paths", "terms", "seed"] {
        cfg.u64(key).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let cfg = resolve(cli).map_err(Failure::Usage)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Ctx::new(&cfg).map_err(Failure::Usage)?;
    if cli.command != Command::Simulate && cli.out.extension().is_some_and(|e| e == "csv") {
        return Err(Failure::Usage("only simulate writes to a .csv file; pass a directory".into()));
    }
    let stage = Staging::new(&cli.out, cli.force, cfg.to_json()).map_err(Failure::Usage)?;
    let rt = Failure::Runtime;
    let ok = match cli.command {
        Command::Simulate => suite::simulate(&ctx, &stage).map_err(rt)?,
        Command::Norm => suite::norm(&ctx, &stage).map_err(rt)?,
        Command::Localtime => suite::localtime_command(&ctx, &stage).map_err(rt)?,
        Command::VerifyAll => suite::verify_all(&ctx, &stage).map_err(rt)?,
        Command::CfCheck => suite::emit(&stage, "", suite::cf_check(&ctx).map_err(rt)?).map_err(rt)?,
        Command::Lnd => suite::emit(&stage, "", suite::lnd_command(&ctx).map_err(rt)?).map_err(rt)?,
        Command::Localize => suite::emit(&stage, "", suite::localize(&ctx).map_err(rt)?).map_err(rt)?,
        Command::FtCheck => suite::emit(&stage, "", suite::ft_command(&ctx).map_err(rt)?).map_err(rt)?,
        Command::Holder => suite::emit(&stage, "", suite::holder_command(&ctx).map_err(rt)?).map_err(rt)?,
    };
    if !matches!(cli.command, Command::Simulate) {
        stage.text("config.cfg", &cfg.to_flat()).map_err(rt)?;
    }
    stage.commit().map_err(Failure::Runtime)?;
    Ok(ok)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}
