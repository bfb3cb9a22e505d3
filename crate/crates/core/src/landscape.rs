//! Fitness-landscape characteristics: fitness distance correlation (FDC)
//! and the entropic ruggedness measure (RIE) computed from a progressive
//! random walk.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::{Role, RngStream, StreamId};

pub const MIN_SAMPLES: usize = 30;
pub const MIN_WALK: usize = 100;

/// Points with their fitness and Euclidean distance to the known optimum.
#[derive(Debug, Clone)]
pub struct LandscapeSample {
    pub points: Array2<f64>,
    pub fitness: Vec<f64>,
    pub distances: Vec<f64>,
}

impl LandscapeSample {
    pub fn new(points: Array2<f64>, fitness: Vec<f64>, optimum: &[f64]) -> Result<Self> {
        if points.nrows() < MIN_SAMPLES {
            return Err(Error::config("samples", format!("need at least {MIN_SAMPLES} points")));
        }
        if points.nrows() != fitness.len() || points.ncols() != optimum.len() {
            return Err(Error::config("samples", "shape mismatch"));
        }
        let distances = points
            .outer_iter()
            .map(|p| {
                p.iter()
                    .zip(optimum)
                    .fold(0.0, |acc, (a, b)| acc + (a - b).powi(2))
                    .sqrt()
            })
            .collect();
        Ok(LandscapeSample {
            points,
            fitness,
            distances,
        })
    }

    /// `n` points drawn uniformly in the problem's box.
    pub fn uniform(problem: &Problem, n: usize, seed: u64) -> Result<Self> {
        let optimum = problem
            .optimum()
            .ok_or_else(|| Error::config("problem", "FDC needs a known optimum"))?
            .location
            .clone();
        let b = problem.bounds();
        let mut rng = RngStream::new(seed, StreamId::new(Role::Landscape, 0));
        let points = Array2::from_shape_fn((n, problem.dim()), |(_, j)| {
            rng.uniform_in(b.lower()[j], b.upper()[j])
        });
        let fitness = problem.evaluate_batch(points.view())?;
        LandscapeSample::new(points, fitness, &optimum)
    }
}

/// Pearson correlation of `a` and `b`. Zero variance is an error.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedMetric("correlation with zero variance"));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Fitness distance correlation.
pub fn fdc(sample: &LandscapeSample) -> Result<f64> {
    pearson(&sample.fitness, &sample.distances)
}

/// Fitness values along a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSeries {
    pub fitness: Vec<f64>,
    pub step_fraction: f64,
}

impl WalkSeries {
    pub fn new(fitness: Vec<f64>, step_fraction: f64) -> Result<Self> {
        if fitness.len() < MIN_WALK {
            return Err(Error::config("walk_length", format!("need at least {MIN_WALK} steps")));
        }
        Ok(WalkSeries {
            fitness,
            step_fraction,
        })
    }

    /// Progressive random walk: each coordinate keeps a direction and moves
    /// by `U(0, s)` per step, reflecting (and flipping direction) at the
    /// bounds. `s` is chosen so the longest possible step is
    /// `step_fraction` of the box diagonal.
    pub fn progressive(problem: &Problem, length: usize, step_fraction: f64, seed: u64) -> Result<Self> {
        let b = problem.bounds();
        let d = problem.dim();
        let step = step_fraction * b.diagonal() / (d as f64).sqrt();
        let mut rng = RngStream::new(seed, StreamId::new(Role::Landscape, 1));
        let mut x: Vec<f64> = (0..d).map(|j| rng.uniform_in(b.lower()[j], b.upper()[j])).collect();
        let mut dir: Vec<f64> = (0..d)
            .map(|_| if rng.below(2) == 0 { -1.0 } else { 1.0 })
            .collect();
        let mut points = Array2::zeros((length, d));
        for t in 0..length {
            points.row_mut(t).assign(&ndarray::ArrayView1::from(&x));
            for j in 0..d {
                let mut next = x[j] + dir[j] * rng.uniform() * step;
                let (lo, hi) = (b.lower()[j], b.upper()[j]);
                if next > hi {
                    next = (2.0 * hi - next).max(lo);
                    dir[j] = -dir[j];
                } else if next < lo {
                    next = (2.0 * lo - next).min(hi);
                    dir[j] = -dir[j];
                }
                x[j] = next;
            }
        }
        let fitness = problem.evaluate_batch(points.view())?;
        WalkSeries::new(fitness, step_fraction)
    }

    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .fitness
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

/// Information content `H(ε)` of a fitness sequence, base-6 entropy over
/// consecutive pairs of distinct symbols.
pub fn information_content(fitness: &[f64], epsilon: f64) -> f64 {
    let symbols: Vec<usize> = fitness
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d < -epsilon {
                0
            } else if d > epsilon {
                2
            } else {
                1
            }
        })
        .collect();
    if symbols.len() < 2 {
        return 0.0;
    }
    let mut counts = [[0usize; 3]; 3];
    for p in symbols.windows(2) {
        counts[p[0]][p[1]] += 1;
    }
    let pairs = (symbols.len() - 1) as f64;
    let mut h = 0.0;
    for (a, row) in counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if a != b && c > 0 {
                let p = c as f64 / pairs;
                h -= p * p.ln() / 6f64.ln();
            }
        }
    }
    h
}

/// Maximum information content over `epsilons`, which must be ascending
/// and non-empty. A constant walk has ruggedness 0.
pub fn rie(walk: &WalkSeries, epsilons: &[f64]) -> Result<f64> {
    if epsilons.is_empty() {
        return Err(Error::config("epsilons", "at least one threshold required"));
    }
    if epsilons.windows(2).any(|w| w[1] < w[0]) || epsilons[0] < 0.0 {
        return Err(Error::config("epsilons", "thresholds must be non-negative and ascending"));
    }
    Ok(epsilons
        .iter()
        .map(|&e| information_content(&walk.fitness, e))
        .fold(0.0, f64::max))
}

/// Geometric ε grid from `1e-8·range` to `range` with `count` points.
pub fn default_epsilons(walk: &WalkSeries, count: usize) -> Vec<f64> {
    let range = walk.range();
    if range == 0.0 || count == 0 {
        return vec![0.0];
    }
    if count == 1 {
        return vec![range];
    }
    (0..count)
        .map(|k| range * 10f64.powf(-8.0 + 8.0 * k as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSettings {
    pub samples: usize,
    pub walk_length: usize,
    pub step_fraction: f64,
    pub epsilon_count: usize,
    pub seed: u64,
}

impl Default for LandscapeSettings {
    fn default() -> Self {
        LandscapeSettings {
            samples: 10_000,
            walk_length: 1000,
            step_fraction: 0.01,
            epsilon_count: 41,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub problem: String,
    pub dim: usize,
    pub fdc: f64,
    pub rie: f64,
}

pub fn characterize(problem: &Problem, settings: &LandscapeSettings) -> Result<LandscapeReport> {
    let sample = LandscapeSample::uniform(problem, settings.samples, settings.seed)?;
    let walk = WalkSeries::progressive(problem, settings.walk_length, settings.step_fraction, settings.seed)?;
    let eps = default_epsilons(&walk, settings.epsilon_count);
    Ok(LandscapeReport {
        problem: problem.name().to_string(),
        dim: problem.dim(),
        fdc: fdc(&sample)?,
        rie: rie(&walk, &eps)?,
    })
}
