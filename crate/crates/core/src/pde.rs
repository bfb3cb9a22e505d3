//! The parameterized DE executor.
//!
//! Reproduction works on whole `NP × D` matrices. Each row of each
//! generation draws from its own [`RngStream`] (one for mutation, one for
//! crossover), so a row's offspring depends only on `(seed, generation,
//! row)` and never on evaluation order or worker count.
//!
//! Mutation follows
//!
//! ```text
//! v = x_bl + F·(x_br − x_bl) + F·(Δ_1 + … + Δ_dn)
//! ```
//!
//! with the directional term omitted when `bl == br`.

use ndarray::{Array2, ArrayView2, Zip};

use crate::budget::{executor_fes, ConvergenceRecord, Stopwatch};
use crate::error::{Error, Result};
use crate::population::{Bounds, Population};
use crate::problems::Problem;
use crate::rng::{Role, RngStream, StreamId};
use crate::strategy::{BaseVector, CrossoverScheme, HyperConfig};

/// Share of the population eligible as `pbest`.
pub const DEFAULT_PBEST_FRACTION: f64 = 0.10;

/// Smallest population that can supply `2·dn + 2` distinct indices that all
/// differ from the target row.
pub const fn required_population(differences: usize) -> usize {
    2 * differences + 3
}

pub fn pbest_pool_size(population: usize, fraction: f64) -> usize {
    ((fraction * population as f64).ceil() as usize).clamp(1, population)
}

/// Per-row mutation draws.
///
/// Each row holds `2·dn + 2` distinct indices, none equal to the row itself:
/// slot 0 is the random left base, slots `1..=2·dn` are the difference
/// pairs `(a_k, b_k)`, and the last slot is the random right base. `pbest`
/// holds the population index chosen from the top of the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationContext {
    width: usize,
    indices: Vec<usize>,
    pbest: Vec<usize>,
    pbest_pool_size: usize,
}

impl MutationContext {
    pub fn sample(
        pop: &Population,
        differences: usize,
        pbest_fraction: f64,
        seed: u64,
        generation: u64,
    ) -> Result<Self> {
        let np = pop.size();
        check_population(np, differences)?;
        let width = 2 * differences + 2;
        let pool = pbest_pool_size(np, pbest_fraction);
        let ranking = pop.ranking();
        let mut indices = Vec::with_capacity(np * width);
        let mut pbest = Vec::with_capacity(np);
        for i in 0..np {
            let mut rng = RngStream::new(seed, StreamId::row(Role::Mutation, generation, i));
            indices.extend(rng.distinct_excluding(np, i, width));
            pbest.push(ranking[rng.below(pool)]);
        }
        Ok(MutationContext {
            width,
            indices,
            pbest,
            pbest_pool_size: pool,
        })
    }

    /// Builds a context from explicit draws, checking the index invariants.
    pub fn from_parts(
        population: usize,
        differences: usize,
        rows: Vec<Vec<usize>>,
        pbest: Vec<usize>,
    ) -> Result<Self> {
        check_population(population, differences)?;
        let width = 2 * differences + 2;
        if rows.len() != population || pbest.len() != population {
            return Err(Error::config("mutation context", "one draw row per individual required"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::config("mutation context", format!("row {i} needs {width} indices")));
            }
            let mut seen = vec![false; population];
            for &r in row {
                if r >= population || r == i || seen[r] {
                    return Err(Error::config(
                        "mutation context",
                        format!("row {i}: index {r} repeats, is out of range or equals the row"),
                    ));
                }
                seen[r] = true;
            }
        }
        Ok(MutationContext {
            width,
            indices: rows.concat(),
            pbest,
            pbest_pool_size: 0,
        })
    }

    pub fn indices(&self, row: usize) -> &[usize] {
        &self.indices[row * self.width..(row + 1) * self.width]
    }

    pub fn pbest(&self, row: usize) -> usize {
        self.pbest[row]
    }

    pub fn pbest_pool_size(&self) -> usize {
        self.pbest_pool_size
    }

    pub fn differences(&self) -> usize {
        (self.width - 2) / 2
    }
}

fn check_population(population: usize, differences: usize) -> Result<()> {
    let required = required_population(differences);
    if population < required {
        return Err(Error::PopulationTooSmall {
            population,
            differences,
            required,
        });
    }
    Ok(())
}

/// Index of the individual a base vector refers to for `row`. `right`
/// selects the right-hand random slot.
fn base_index(
    base: BaseVector,
    right: bool,
    row: usize,
    best: usize,
    ctx: &MutationContext,
) -> usize {
    match base {
        BaseVector::Rand => {
            let idx = ctx.indices(row);
            if right {
                idx[idx.len() - 1]
            } else {
                idx[0]
            }
        }
        BaseVector::Best => best,
        BaseVector::PBest => ctx.pbest(row),
        BaseVector::Current => row,
    }
}

/// Mutant matrix from explicit draws. The result is not bound-clamped.
pub fn mutate_with(pop: &Population, cfg: &HyperConfig, ctx: &MutationContext) -> Result<Array2<f64>> {
    let strategy = cfg.strategy;
    let dn = strategy.differences();
    if ctx.differences() != dn || ctx.indices.len() != pop.size() * ctx.width {
        return Err(Error::config("mutation context", "draws do not match the configuration"));
    }
    let f = cfg.f();
    let x = pop.rows();
    let best = pop.best_index();
    let directional = strategy.is_directional();
    let mut v = Array2::zeros(x.dim());

    for (i, mut out) in v.outer_iter_mut().enumerate() {
        let idx = ctx.indices(i);
        let left = x.row(base_index(strategy.left, false, i, best, ctx));
        let right = x.row(base_index(strategy.right, directional, i, best, ctx));
        for j in 0..x.ncols() {
            let mut diff = x[[idx[1], j]] - x[[idx[2], j]];
            for k in 1..dn {
                diff += x[[idx[2 * k + 1], j]] - x[[idx[2 * k + 2], j]];
            }
            out[j] = if directional {
                left[j] + f * (right[j] - left[j]) + f * diff
            } else {
                left[j] + f * diff
            };
        }
    }
    Ok(v)
}

/// Samples the mutation draws for `generation` and builds the mutants.
pub fn mutate_batch(
    pop: &Population,
    cfg: &HyperConfig,
    seed: u64,
    generation: u64,
    pbest_fraction: f64,
) -> Result<Array2<f64>> {
    let ctx = MutationContext::sample(pop, cfg.strategy.differences(), pbest_fraction, seed, generation)?;
    mutate_with(pop, cfg, &ctx)
}

fn crossover_stream(seed: u64, generation: u64, row: usize) -> RngStream {
    RngStream::new(seed, StreamId::row(Role::Crossover, generation, row))
}

/// Binomial mask for one row: `j_rand`, then one `(0, 1]` draw per gene.
pub fn binomial_row(rng: &mut RngStream, dim: usize, cr: f64) -> Vec<bool> {
    let j_rand = rng.below(dim);
    (0..dim)
        .map(|j| {
            let r = rng.uniform_open_closed();
            r <= cr || j == j_rand
        })
        .collect()
}

/// Exponential block for one row: start `n` uniform in `0..D`, length `L`
/// grown while a `(0, 1]` draw is `<= CR`, censored at `D`.
pub fn exponential_row(rng: &mut RngStream, dim: usize, cr: f64) -> (usize, usize) {
    let start = rng.below(dim);
    let mut len = 1;
    while len < dim && rng.uniform_open_closed() <= cr {
        len += 1;
    }
    (start, len)
}

fn check_shapes(v: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>) {
    assert_eq!(v.dim(), x.dim(), "mutant and parent matrices differ in shape");
}

pub fn crossover_binomial(
    v: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    cr: f64,
    seed: u64,
    generation: u64,
) -> Array2<f64> {
    check_shapes(v, x);
    let mut u = x.to_owned();
    for i in 0..x.nrows() {
        let mask = binomial_row(&mut crossover_stream(seed, generation, i), x.ncols(), cr);
        for (j, take) in mask.into_iter().enumerate() {
            if take {
                u[[i, j]] = v[[i, j]];
            }
        }
    }
    u
}

pub fn crossover_exponential(
    v: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    cr: f64,
    seed: u64,
    generation: u64,
) -> Array2<f64> {
    check_shapes(v, x);
    let d = x.ncols();
    let mut u = x.to_owned();
    for i in 0..x.nrows() {
        let (start, len) = exponential_row(&mut crossover_stream(seed, generation, i), d, cr);
        for t in 0..len {
            let j = (start + t) % d;
            u[[i, j]] = v[[i, j]];
        }
    }
    u
}

/// `u_i = x_i + K_i·(v_i − x_i)` with one `K_i` per row.
pub fn crossover_arithmetic_with(
    v: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    weights: &[f64],
) -> Array2<f64> {
    check_shapes(v, x);
    assert_eq!(weights.len(), x.nrows(), "one weight per row");
    let mut u = x.to_owned();
    for (i, mut row) in u.outer_iter_mut().enumerate() {
        let k = weights[i];
        Zip::from(&mut row)
            .and(v.row(i))
            .for_each(|ui, &vi| *ui += k * (vi - *ui));
    }
    u
}

pub fn arithmetic_weights(rows: usize, seed: u64, generation: u64) -> Vec<f64> {
    (0..rows)
        .map(|i| crossover_stream(seed, generation, i).uniform())
        .collect()
}

pub fn crossover_arithmetic(
    v: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    seed: u64,
    generation: u64,
) -> Array2<f64> {
    crossover_arithmetic_with(v, x, &arithmetic_weights(x.nrows(), seed, generation))
}

/// Dispatches on the configured scheme. Arithmetic recombination ignores CR.
pub fn crossover(
    scheme: CrossoverScheme,
    v: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    cr: f64,
    seed: u64,
    generation: u64,
) -> Array2<f64> {
    match scheme {
        CrossoverScheme::Binomial => crossover_binomial(v, x, cr, seed, generation),
        CrossoverScheme::Exponential => crossover_exponential(v, x, cr, seed, generation),
        CrossoverScheme::Arithmetic => crossover_arithmetic(v, x, seed, generation),
    }
}

/// Saturating projection of every gene into its interval.
pub fn clamp_to_bounds(u: &mut Array2<f64>, bounds: &Bounds) {
    for mut row in u.outer_iter_mut() {
        for (j, g) in row.iter_mut().enumerate() {
            *g = bounds.clamp(j, *g);
        }
    }
}

/// Draws the initial population uniformly inside the bounds, one stream per
/// row.
pub fn initial_rows(bounds: &Bounds, population: usize, seed: u64) -> Array2<f64> {
    let d = bounds.dim();
    let mut x = Array2::zeros((population, d));
    for (i, mut row) in x.outer_iter_mut().enumerate() {
        let mut rng = RngStream::new(seed, StreamId::row(Role::Init, 0, i));
        for (j, g) in row.iter_mut().enumerate() {
            *g = rng.uniform_in(bounds.lower()[j], bounds.upper()[j]);
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeSettings {
    pub population_size: usize,
    pub seed: u64,
    pub pbest_fraction: f64,
}

impl PdeSettings {
    pub fn new(population_size: usize, seed: u64) -> Self {
        PdeSettings {
            population_size,
            seed,
            pbest_fraction: DEFAULT_PBEST_FRACTION,
        }
    }
}

/// Result of one executor run.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeOutcome {
    pub best_fitness: f64,
    pub best_vector: Vec<f64>,
    pub evaluations: u64,
    pub history: Vec<ConvergenceRecord>,
}

/// One PDE instance stepping a population on a problem.
#[derive(Debug)]
pub struct PdeExecutor<'p> {
    problem: &'p Problem,
    config: HyperConfig,
    settings: PdeSettings,
    population: Population,
    generation: u64,
    evaluations: u64,
    clock: Stopwatch,
}

impl<'p> PdeExecutor<'p> {
    /// Validates the configuration and evaluates the initial population.
    pub fn new(problem: &'p Problem, config: HyperConfig, settings: PdeSettings) -> Result<Self> {
        check_population(settings.population_size, config.strategy.differences())?;
        if !(0.0..=1.0).contains(&settings.pbest_fraction) || settings.pbest_fraction == 0.0 {
            return Err(Error::config("pbest_fraction", "must lie in (0, 1]"));
        }
        let clock = Stopwatch::start();
        let x = initial_rows(problem.bounds(), settings.population_size, settings.seed);
        let fitness = evaluate(problem, x.view(), 0)?;
        let population = Population::new(x, fitness)?;
        Ok(PdeExecutor {
            problem,
            config,
            settings,
            population,
            generation: 0,
            evaluations: settings.population_size as u64,
            clock,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn config(&self) -> &HyperConfig {
        &self.config
    }

    pub fn record(&self) -> ConvergenceRecord {
        ConvergenceRecord {
            generation: self.generation,
            best_fitness: self.population.best_fitness(),
            cumulative_fes: self.evaluations,
            elapsed_ms: self.clock.elapsed_ms(),
        }
    }

    /// Mutation, crossover, clamping, evaluation and selection for one
    /// generation.
    pub fn step(&mut self) -> Result<ConvergenceRecord> {
        let g = self.generation + 1;
        let seed = self.settings.seed;
        let v = mutate_batch(&self.population, &self.config, seed, g, self.settings.pbest_fraction)?;
        let mut u = crossover(
            self.config.strategy.crossover,
            v.view(),
            self.population.rows(),
            self.config.cr(),
            seed,
            g,
        );
        clamp_to_bounds(&mut u, self.problem.bounds());
        let fu = evaluate(self.problem, u.view(), g)?;
        self.population.select(u.view(), &fu);
        self.generation = g;
        self.evaluations += u.nrows() as u64;
        Ok(self.record())
    }

    pub fn outcome(&self, history: Vec<ConvergenceRecord>) -> PdeOutcome {
        PdeOutcome {
            best_fitness: self.population.best_fitness(),
            best_vector: self.population.best_vector(),
            evaluations: self.evaluations,
            history,
        }
    }
}

fn evaluate(problem: &Problem, x: ArrayView2<'_, f64>, generation: u64) -> Result<Vec<f64>> {
    problem.evaluate_batch(x).map_err(|e| match e {
        Error::NonFinite { row, value } => Error::Evaluation {
            problem: problem.name().to_string(),
            generation,
            row,
            value,
        },
        other => other,
    })
}

/// Runs PDE for `generations` generations and returns the best solution,
/// the number of evaluations (`NP·(G + 1)`) and the per-generation log.
pub fn run_pde(
    problem: &Problem,
    config: HyperConfig,
    population_size: usize,
    generations: u64,
    seed: u64,
) -> Result<PdeOutcome> {
    run_pde_with(problem, config, PdeSettings::new(population_size, seed), generations)
}

pub fn run_pde_with(
    problem: &Problem,
    config: HyperConfig,
    settings: PdeSettings,
    generations: u64,
) -> Result<PdeOutcome> {
    if generations == 0 {
        return Err(Error::config("generations", "must be at least 1"));
    }
    let mut exec = PdeExecutor::new(problem, config, settings)?;
    let mut history = Vec::with_capacity(generations as usize + 1);
    history.push(exec.record());
    for _ in 0..generations {
        history.push(exec.step()?);
    }
    debug_assert_eq!(
        exec.evaluations(),
        executor_fes(settings.population_size as u64, generations)
    );
    Ok(exec.outcome(history))
}
