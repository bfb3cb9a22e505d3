//! One fixed DE variant on a rotated function, printing the convergence
//! curve every 100 generations.

use metade::pde::{run_pde_with, PdeSettings};
use metade::problems::lookup;
use metade::HyperConfig;

fn main() -> metade::Result<()> {
    let problem = lookup("griewank@rot", 10, 3)?;
    let config = HyperConfig::named("DE/current-to-pbest/1/bin", 0.6, 0.9)?;
    let settings = PdeSettings {
        pbest_fraction: 0.2,
        ..PdeSettings::new(60, 1)
    };
    let out = run_pde_with(&problem, config, settings, 1000)?;
    for r in out.history.iter().step_by(100) {
        println!("{:>5} {:>12.4e} {:>8}", r.generation, r.best_fitness, r.cumulative_fes);
    }
    println!("{config}: best {:.3e} after {} evaluations", out.best_fitness, out.evaluations);
    Ok(())
}
