//! MetaDE on shifted-rotated Rastrigin at desk scale.
//!
//! `cargo run --release --example tune_rastrigin -- [seed] [workers]`

use metade::meta::{metade_run_with, MetaDeSettings};
use metade::problems::lookup;
use metade::{with_workers, RunBudget};

fn main() -> metade::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let workers = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let problem = lookup("rastrigin@rot", 10, 0)?;
    let settings = MetaDeSettings::new(20, 10, 50, 300, seed).with_budget(RunBudget {
        max_generations: Some(10),
        max_fes: Some(20_000_000),
        max_wall_ms: Some(120_000),
    });
    let out = with_workers(workers, || {
        metade_run_with(&problem, &settings, |r| {
            println!("meta gen {:>2}: best {:.4e}, {} FEs", r.generation, r.best_fitness, r.cumulative_fes);
            Ok(())
        })
    })??;
    println!("best config {}", out.best_config);
    println!("best fitness {:.6e}, {} FEs total", out.best_fitness, out.total_fes);
    Ok(())
}
