//! Plugging in a user objective, including a maximization problem and a
//! shifted-rotated copy of it.

use metade::problems::{with_transform, Transform};
use metade::{run_pde, Bounds, HyperConfig, Problem};

fn main() -> metade::Result<()> {
    // Maximize a smooth bump with its peak at (1, -2, 0.5).
    let peak = [1.0, -2.0, 0.5];
    let bounds = Bounds::uniform(3, -5.0, 5.0)?;
    let bump = Problem::maximize("bump", bounds, move |x| {
        let r2: f64 = x.iter().zip(&peak).map(|(a, b)| (a - b).powi(2)).sum();
        (-r2).exp()
    })
    .with_optimum(peak.to_vec(), -1.0);

    let cfg = HyperConfig::named("DE/rand/1/bin", 0.5, 0.9)?;
    let out = run_pde(&bump, cfg, 30, 200, 0)?;
    println!("bump: max {:.6} at {:.4?}", -out.best_fitness, out.best_vector);

    let moved = with_transform(&bump, 11)?;
    let out = run_pde(&moved, cfg, 30, 200, 0)?;
    println!("{}: max {:.6}, optimum now at {:.4?}", moved.name(), -out.best_fitness, moved.optimum().unwrap().location);

    let shifted = bump.transformed(Transform::shift(bump.bounds(), 5))?;
    println!("{} f(optimum) = {}", shifted.name(), shifted.evaluate(&shifted.optimum().unwrap().location));
    Ok(())
}
