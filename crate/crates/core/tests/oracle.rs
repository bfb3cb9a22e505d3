mod common;

use metade::pde::{binomial_row, exponential_row, PdeExecutor, PdeSettings};
use metade::problems::make_function;
use metade::rng::{Role, RngStream, StreamId};
use metade::HyperConfig;

#[test]
fn executor_matches_straight_line_de_across_settings() {
    for (seed, d, np, f, cr) in [(0, 2, 5, 0.5, 0.9), (9, 5, 7, 0.9, 0.1), (123, 10, 30, 0.3, 1.0), (7, 3, 12, 0.0, 0.0)] {
        let expect = common::vanilla_de_sphere(seed, d, np, 40, f, cr);
        let problem = make_function("sphere", d).unwrap();
        let cfg = HyperConfig::named("DE/rand/1/bin", f, cr).unwrap();
        let mut exec = PdeExecutor::new(&problem, cfg, PdeSettings::new(np, seed)).unwrap();
        for snap in &expect[1..] {
            exec.step().unwrap();
            let pop = exec.population();
            for i in 0..np {
                assert_eq!(pop.row(i).to_vec(), snap.x[i], "seed {seed} row {i}");
            }
            assert_eq!(pop.fitness(), &snap.fitness[..]);
        }
    }
}

#[test]
fn exponential_lengths_follow_censored_geometric() {
    for (cr, d) in [(0.0, 5), (0.3, 4), (0.9, 6), (1.0, 3)] {
        let n = 200_000;
        let mut counts = vec![0u64; d + 1];
        let mut starts = vec![0u64; d];
        let mut rng = RngStream::new(5, StreamId::new(Role::Crossover, 3));
        for _ in 0..n {
            let (s, l) = exponential_row(&mut rng, d, cr);
            counts[l] += 1;
            starts[s] += 1;
        }
        for (l, p) in (1..=d).zip(common::censored_geometric(cr, d)) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt().max(1e-9);
            assert!((counts[l] as f64 - n as f64 * p).abs() <= 4.0 * sigma, "cr {cr} length {l}");
        }
        let uniform = n as f64 / d as f64;
        for s in starts {
            assert!((s as f64 - uniform).abs() < 5.0 * uniform.sqrt());
        }
    }
}

#[test]
fn binomial_always_takes_one_gene() {
    let mut rng = RngStream::new(1, StreamId::new(Role::Crossover, 4));
    for d in 1..8 {
        for _ in 0..500 {
            assert_eq!(binomial_row(&mut rng, d, 0.0).iter().filter(|t| **t).count(), 1);
            assert!(binomial_row(&mut rng, d, 1.0).iter().all(|t| *t));
        }
    }
}
