//! MetaDE: a differential-evolution evolver that tunes the hyperparameters
//! and strategy of a fully parameterized DE executor.
//!
//! The executor ([`pde`]) is configured by a six-element [`HyperConfig`]
//! `(F, CR, bl, br, dn, cs)` spanning 192 mutation/crossover strategies.
//! The evolver ([`meta`]) runs DE/rand/1/bin over that space, scoring each
//! genome with one executor run on the target problem.
//!
//! ```no_run
//! use metade::{meta, problems};
//!
//! let problem = problems::lookup("rastrigin@rot", 10, 0)?;
//! let settings = meta::MetaDeSettings::new(20, 10, 50, 300, 42);
//! let out = metade::with_workers(8, || meta::metade_run(&problem, &settings))??;
//! println!("{} -> {:e}", out.best_config, out.best_fitness);
//! # Ok::<(), metade::Error>(())
//! ```

pub mod budget;
pub mod error;
pub mod landscape;
pub mod meta;
pub mod pde;
pub mod population;
pub mod problems;
pub mod rng;
pub mod runner;
pub mod strategy;

pub use budget::{ConvergenceRecord, RunBudget};
pub use error::{Error, Result};
pub use meta::{metade_run, MetaDeOutcome, MetaDeSettings};
pub use pde::{run_pde, PdeOutcome};
pub use population::{Bounds, Population};
pub use problems::Problem;
pub use rng::{RngStream, StreamId};
pub use strategy::{decode_strategy_name, encode_strategy, HyperConfig, Strategy};

/// Runs `f` on a dedicated rayon pool with `workers` threads. Everything
/// parallel inside `f` (executor fan-out, batch evaluation) uses that pool.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Err(Error::Config {
            field: "workers",
            reason: "must be at least 1".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}
