use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metade::landscape::{characterize, LandscapeSettings};
use metade::problems::lookup;
use metade::runner::{exit_code, run_from_config, Mode, OutputFormat, RunConfig};
use metade::{decode_strategy_name, encode_strategy, Error, Strategy};

#[derive(Parser)]
#[command(name = "metade", version, about = "Meta-evolved differential evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run MetaDE or a single PDE variant on a benchmark problem.
    Run(Box<RunArgs>),
    /// Print FDC and RIE for each problem as JSON lines.
    Landscape(LandscapeArgs),
    /// Inspect the strategy table.
    Strategies {
        #[command(subcommand)]
        action: StrategiesCmd,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with RunConfig fields. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    problem_seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    cr: Option<f64>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    gens: Option<u64>,
    #[arg(long)]
    meta_np: Option<usize>,
    #[arg(long)]
    meta_gens: Option<u64>,
    #[arg(long)]
    exec_np: Option<usize>,
    #[arg(long)]
    exec_gens: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Accepts scientific notation, e.g. `2e7`.
    #[arg(long, value_parser = parse_count)]
    budget_fes: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    budget_ms: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct LandscapeArgs {
    /// Comma-separated registry names, e.g. `sphere,rastrigin@rot`.
    #[arg(long, value_delimiter = ',', required = true)]
    problems: Vec<String>,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    problem_seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    walk_length: usize,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum StrategiesCmd {
    /// All 192 strategies with their codes.
    List,
    /// Name to `bl br dn cs`.
    Encode { name: String },
    /// `bl br dn cs` to name.
    Decode { bl: u8, br: u8, dn: u8, cs: u8 },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "metade" => Ok(Mode::Metade),
        "pde" => Ok(Mode::Pde),
        _ => Err(format!("expected metade or pde, got {s}")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("expected csv or json, got {s}")),
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("not a non-negative integer: {s}"))
    }
}

impl RunArgs {
    fn into_config(self) -> metade::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(problem => problem, dim => dim, problem_seed => problem_seed, mode => mode,
             np => np, meta_np => meta_np, meta_gens => meta_gens, exec_np => exec_np,
             exec_gens => exec_gens, seed => seed, workers => workers);
        macro_rules! set_opt {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if self.$flag.is_some() { cfg.$field = self.$flag; })*
            };
        }
        set_opt!(strategy => strategy, f => f, cr => cr, gens => generations,
                 budget_fes => budget_fes, budget_ms => budget_ms, out => out, format => format);
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> metade::Result<()> {
    let cfg = args.into_config()?;
    let summary = run_from_config(&cfg)?;
    println!(
        "{} D={} best={:e} (raw {:e}) strategy={} F={:.4} CR={:.4} fes={} wall_ms={:.1}",
        summary.problem,
        summary.dim,
        summary.best_fitness,
        summary.best_fitness_raw,
        summary.strategy,
        summary.config.f,
        summary.config.cr,
        summary.total_fes,
        summary.wall_ms
    );
    Ok(())
}

fn landscape(args: LandscapeArgs) -> metade::Result<()> {
    let settings = LandscapeSettings {
        samples: args.samples,
        walk_length: args.walk_length,
        step_fraction: args.step,
        seed: args.seed,
        ..Default::default()
    };
    let mut out = std::io::stdout().lock();
    for name in &args.problems {
        let problem = lookup(name.trim(), args.dim, args.problem_seed)?;
        let report = characterize(&problem, &settings)?;
        serde_json::to_writer(&mut out, &report)?;
        writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn strategies(action: StrategiesCmd) -> metade::Result<()> {
    match action {
        StrategiesCmd::List => {
            for s in Strategy::all() {
                let (bl, br, dn, cs) = s.codes();
                println!("{bl} {br} {dn} {cs}\t{s}");
            }
        }
        StrategiesCmd::Encode { name } => {
            let (bl, br, dn, cs) = encode_strategy(&name)?.codes();
            println!("{bl} {br} {dn} {cs}");
        }
        StrategiesCmd::Decode { bl, br, dn, cs } => println!("{}", decode_strategy_name(bl, br, dn, cs)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Landscape(args) => landscape(args),
        Command::Strategies { action } => strategies(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
