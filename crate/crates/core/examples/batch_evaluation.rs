//! Scoring a batch of meta-genomes in one shot, the way the evolver does.
//! Every executor shares the seed, so repeated and worker-count-varied
//! calls give the same numbers.

use metade::meta::{evaluate_batch, ExecutorPlan, MetaGenome};
use metade::problems::lookup;
use metade::with_workers;

fn main() -> metade::Result<()> {
    let problem = lookup("griewank@rot", 10, 0)?;
    let plan = ExecutorPlan::new(40, 100, 7);
    let trials = vec![
        MetaGenome([0.5, 0.9, 1.0, 1.0, 1.0, 1.0]),
        MetaGenome([0.7, 0.2, 4.0, 3.0, 1.0, 1.0]),
        MetaGenome([0.3, 0.5, 2.0, 2.0, 2.9, 2.0]),
        MetaGenome([0.9, 1.0, 1.0, 1.0, 1.0, 3.0]),
    ];
    for workers in [1, 4] {
        let results = with_workers(workers, || evaluate_batch(&trials, &problem, &plan, false))?;
        println!("workers={workers}");
        for r in &results {
            println!("  {:<40} {:.6e} ({} FEs)", r.config.to_string(), r.fitness, r.evaluations);
        }
    }
    Ok(())
}
