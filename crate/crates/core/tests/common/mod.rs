#![allow(dead_code)]

use metade::rng::{Role, RngStream, StreamId};

/// One generation of a straight-line DE/rand/1/bin run: population rows
/// and their fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

// Partial Fisher-Yates over 0..np without `skip`, written out by hand.
fn pick(rng: &mut RngStream, np: usize, skip: usize, k: usize) -> Vec<usize> {
    let mut pool = Vec::with_capacity(np - 1);
    for j in 0..np {
        if j != skip {
            pool.push(j);
        }
    }
    for t in 0..k {
        let j = t + rng.below(pool.len() - t);
        pool.swap(t, j);
    }
    pool[..k].to_vec()
}

/// Vanilla DE/rand/1/bin on the sphere in `[-100, 100]^d`, generational.
/// Consumes the same streams as the library executor. Returns the
/// initial snapshot followed by one per generation.
pub fn vanilla_de_sphere(seed: u64, d: usize, np: usize, gens: u64, f: f64, cr: f64) -> Vec<Snapshot> {
    let (lo, hi) = (-100.0, 100.0);
    let mut x: Vec<Vec<f64>> = (0..np)
        .map(|i| {
            let mut r = RngStream::new(seed, StreamId::row(Role::Init, 0, i));
            (0..d).map(|_| lo + r.uniform() * (hi - lo)).collect()
        })
        .collect();
    let mut fit: Vec<f64> = x.iter().map(|v| sphere(v)).collect();
    let mut out = vec![Snapshot {
        x: x.clone(),
        fitness: fit.clone(),
    }];
    for g in 1..=gens {
        let parents = x.clone();
        for i in 0..np {
            let mut mr = RngStream::new(seed, StreamId::row(Role::Mutation, g, i));
            let r = pick(&mut mr, np, i, 4);
            let (r1, r2, r3) = (r[0], r[1], r[2]);
            let mut cx = RngStream::new(seed, StreamId::row(Role::Crossover, g, i));
            let j_rand = cx.below(d);
            let mut u = parents[i].clone();
            for j in 0..d {
                let rr = cx.uniform_open_closed();
                if rr <= cr || j == j_rand {
                    let v = parents[r1][j] + f * (parents[r2][j] - parents[r3][j]);
                    u[j] = v.clamp(lo, hi);
                }
            }
            let fu = sphere(&u);
            if fu <= fit[i] {
                x[i] = u;
                fit[i] = fu;
            }
        }
        out.push(Snapshot {
            x: x.clone(),
            fitness: fit.clone(),
        });
    }
    out
}

/// Censored geometric mass of the exponential block length on `1..=d`.
pub fn censored_geometric(cr: f64, d: usize) -> Vec<f64> {
    (1..=d)
        .map(|l| {
            if l < d {
                cr.powi(l as i32 - 1) * (1.0 - cr)
            } else {
                cr.powi(d as i32 - 1)
            }
        })
        .collect()
}
