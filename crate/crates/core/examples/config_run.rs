//! A config-driven run that streams its convergence log to CSV and reads it
//! back.

use metade::runner::{read_csv_log, run_from_config, RunConfig};

const CONFIG: &str = r#"
problem = "rosenbrock@shift"
dim = 8
problem_seed = 4
mode = "pde"
strategy = "DE/rand-to-best/2/exp"
f = 0.5
cr = 0.95
np = 60
generations = 400
seed = 9
workers = 2
"#;

fn main() -> metade::Result<()> {
    let dir = std::env::temp_dir().join("metade-config-run");
    std::fs::create_dir_all(&dir).map_err(|e| metade::Error::io(&dir, e))?;
    let mut cfg: RunConfig = toml::from_str(CONFIG)?;
    cfg.out = Some(dir.join("run.csv"));

    let summary = run_from_config(&cfg)?;
    let log = read_csv_log(cfg.out.as_ref().unwrap())?;
    println!("{} rows written to {}", log.len(), cfg.out.unwrap().display());
    println!("{} on {}: {:e} ({} FEs)", summary.strategy, summary.problem, summary.best_fitness, summary.total_fes);
    Ok(())
}
