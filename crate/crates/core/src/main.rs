use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kgvim::runner::verify::{run_suite, VerifyInputs, DEFAULT_SEED};
use kgvim::runner::{
    cmd_dump, cmd_run, cmd_sweep, DumpTarget, Emit, ModeKind, RunConfig, SweepConfig,
};
use kgvim::Result;

#[derive(Parser)]
#[command(
    name = "kgvim",
    version,
    about = "Exact variational iteration for φ'' + (r+1)φ = 0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate and report the error of every iterate.
    Run(RunArgs),
    /// Compare partial-sum runs for several truncation orders.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated truncation orders.
        #[arg(long = "N-values", value_delimiter = ',', required = true)]
        n_values: Vec<usize>,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print exact coefficients as JSON.
    Dump {
        /// alpha, airy or iterate
        what: DumpTarget,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with run settings; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<ModeKind>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    emit: Option<Emit>,
    #[arg(long)]
    verify: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.r {
            cfg.r = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.tail_tol {
            cfg.tail_tol = v;
        }
        if let Some(v) = self.emit {
            cfg.emit = v;
        }
        cfg.verify |= self.verify;
        Ok(cfg)
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            for warning in cfg.advisories() {
                eprintln!("warning: {warning}");
            }
            let report = cmd_run(&cfg)?;
            args.write(&report.render()?)?;
        }
        Command::Sweep { run, n_values } => {
            let cfg = SweepConfig {
                base: run.resolve()?,
                n_values,
            };
            let report = cmd_sweep(&cfg)?;
            let text = match cfg.base.emit {
                Emit::Csv => report.to_csv(),
                Emit::Json => serde_json::to_string_pretty(&report)? + "\n",
            };
            run.write(&text)?;
        }
        Command::Verify { seed } => {
            let summary = run_suite(&VerifyInputs::new(seed)?)?;
            print!("{}", summary.render());
            if !summary.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Dump { what, run } => {
            let cfg = run.resolve()?;
            let order = match what {
                DumpTarget::Alpha | DumpTarget::Airy => run.k.unwrap_or(cfg.k),
                DumpTarget::Iterate => 0,
            };
            run.write(&cmd_dump(what, order, &cfg)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
