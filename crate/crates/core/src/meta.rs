//! The meta level: a DE/rand/1/bin evolver over the six PDE hyperparameters
//! whose individuals are scored by running PDE executors.
//!
//! Two mechanisms shape the scoring. Every executor receives the same seed
//! (one-shot evaluation), so a genome's fitness is a deterministic single-run
//! measurement that never goes stale. The last meta generation runs its
//! executors for five times as many generations (power-up).

use std::time::Duration;

use rayon::prelude::*;

use crate::budget::{executor_fes, ConvergenceRecord, RunBudget, Stopwatch};
use crate::error::{Error, Result};
use crate::pde::{run_pde_with, PdeSettings, DEFAULT_PBEST_FRACTION};
use crate::problems::Problem;
use crate::rng::{Role, RngStream, StreamId};
use crate::strategy::{HyperConfig, Strategy};

pub const GENOME_LEN: usize = 6;
pub const META_LOWER: [f64; GENOME_LEN] = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
pub const META_UPPER: [f64; GENOME_LEN] = [1.0, 1.0, 5.0, 5.0, 5.0, 4.0];

pub const EVOLVER_F: f64 = 0.5;
pub const EVOLVER_CR: f64 = 0.9;
pub const POWER_UP_FACTOR: u64 = 5;

/// XORed into the master seed to obtain the seed shared by all executors.
pub const EXECUTOR_SEED_TAG: u64 = 0x5EED_E8EC_0000_0001;

pub const fn executor_seed(master_seed: u64) -> u64 {
    master_seed ^ EXECUTOR_SEED_TAG
}

/// A raw point in the meta box `[META_LOWER, META_UPPER]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaGenome(pub [f64; GENOME_LEN]);

impl MetaGenome {
    pub fn clamped(mut self) -> Self {
        for (j, g) in self.0.iter_mut().enumerate() {
            *g = g.clamp(META_LOWER[j], META_UPPER[j]);
        }
        self
    }

    pub fn decode(&self) -> HyperConfig {
        decode_params(&self.0)
    }
}

fn floor_code(value: f64, lo: f64, max: u8) -> u8 {
    (value.max(lo).floor() as u8).clamp(1, max)
}

/// Maps a raw genome to a configuration: `F = u1`, `CR = u2`, and the
/// categorical genes are floored, with the closed upper edge folded into the
/// last category. Out-of-box inputs are clamped first, so every input
/// decodes.
pub fn decode_params(u: &[f64; GENOME_LEN]) -> HyperConfig {
    let u = MetaGenome(*u).clamped().0;
    let strategy = Strategy::from_codes(
        floor_code(u[2], META_LOWER[2], 4),
        floor_code(u[3], META_LOWER[3], 4),
        floor_code(u[4], META_LOWER[4], 4),
        floor_code(u[5], META_LOWER[5], 3),
    )
    .expect("floored codes are always in range");
    HyperConfig::new(u[0], u[1], strategy).expect("clamped F and CR lie in [0, 1]")
}

/// Meta population and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaState {
    pub genomes: Vec<MetaGenome>,
    /// Best fitness of each genome's latest executor run, `+inf` if never
    /// evaluated.
    pub fitness: Vec<f64>,
    pub generation: u64,
    pub evaluations: u64,
}

impl MetaState {
    /// Uniform initial genomes with every fitness set to `+inf`.
    pub fn initialize(size: usize, master_seed: u64) -> Result<Self> {
        if size < 4 {
            return Err(Error::config("meta_np", format!("need at least 4 genomes, got {size}")));
        }
        let genomes = (0..size)
            .map(|i| {
                let mut rng = RngStream::new(master_seed, StreamId::row(Role::MetaInit, 0, i));
                let mut g = [0.0; GENOME_LEN];
                for (j, v) in g.iter_mut().enumerate() {
                    *v = rng.uniform_in(META_LOWER[j], META_UPPER[j]);
                }
                MetaGenome(g)
            })
            .collect();
        Ok(MetaState {
            genomes,
            fitness: vec![f64::INFINITY; size],
            generation: 0,
            evaluations: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.genomes.len()
    }

    /// Greedy replacement: trial `i` replaces genome `i` when its fitness is
    /// `<=` the incumbent's.
    pub fn select(&mut self, trials: &[MetaGenome], fitness: &[f64]) -> usize {
        assert_eq!(trials.len(), self.size());
        assert_eq!(fitness.len(), self.size());
        let mut replaced = 0;
        for i in 0..self.size() {
            if fitness[i] <= self.fitness[i] {
                self.genomes[i] = trials[i];
                self.fitness[i] = fitness[i];
                replaced += 1;
            }
        }
        replaced
    }

    pub fn best(&self) -> usize {
        crate::population::argmin(&self.fitness)
    }
}

/// Evolver reproduction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolverParams {
    pub f: f64,
    pub cr: f64,
}

impl Default for EvolverParams {
    fn default() -> Self {
        EvolverParams {
            f: EVOLVER_F,
            cr: EVOLVER_CR,
        }
    }
}

/// Per-genome evolver draws for one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolverDraws {
    /// `(r1, r2, r3)`, distinct and different from the row.
    pub indices: Vec<[usize; 3]>,
    pub j_rand: Vec<usize>,
    /// One `(0, 1]` draw per gene.
    pub gene_draws: Vec<[f64; GENOME_LEN]>,
}

impl EvolverDraws {
    pub fn sample(size: usize, master_seed: u64, generation: u64) -> Self {
        let mut indices = Vec::with_capacity(size);
        let mut j_rand = Vec::with_capacity(size);
        let mut gene_draws = Vec::with_capacity(size);
        for i in 0..size {
            let mut m = RngStream::new(master_seed, StreamId::row(Role::MetaMutation, generation, i));
            let r = m.distinct_excluding(size, i, 3);
            indices.push([r[0], r[1], r[2]]);
            let mut c = RngStream::new(master_seed, StreamId::row(Role::MetaCrossover, generation, i));
            j_rand.push(c.below(GENOME_LEN));
            let mut draws = [0.0; GENOME_LEN];
            for d in draws.iter_mut() {
                *d = c.uniform_open_closed();
            }
            gene_draws.push(draws);
        }
        EvolverDraws {
            indices,
            j_rand,
            gene_draws,
        }
    }
}

/// DE/rand/1/bin trials from explicit draws, clamped to the meta box.
pub fn evolver_trials(state: &MetaState, params: EvolverParams, draws: &EvolverDraws) -> Vec<MetaGenome> {
    (0..state.size())
        .map(|i| {
            let [r1, r2, r3] = draws.indices[i];
            let (a, b, c) = (&state.genomes[r1].0, &state.genomes[r2].0, &state.genomes[r3].0);
            let x = &state.genomes[i].0;
            let mut u = *x;
            for j in 0..GENOME_LEN {
                if draws.gene_draws[i][j] <= params.cr || j == draws.j_rand[i] {
                    u[j] = a[j] + params.f * (b[j] - c[j]);
                }
            }
            MetaGenome(u).clamped()
        })
        .collect()
}

/// Trial genomes for the next meta generation (`state.generation + 1`).
pub fn evolver_step(state: &MetaState, master_seed: u64) -> Vec<MetaGenome> {
    let draws = EvolverDraws::sample(state.size(), master_seed, state.generation + 1);
    evolver_trials(state, EvolverParams::default(), &draws)
}

/// What one executor reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutorResult {
    pub config: HyperConfig,
    pub fitness: f64,
    pub best_vector: Option<Vec<f64>>,
    pub evaluations: u64,
}

/// Executor sizing shared by every trial of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutorPlan {
    pub population_size: usize,
    pub generations: u64,
    pub seed: u64,
    pub pbest_fraction: f64,
}

impl ExecutorPlan {
    pub fn new(population_size: usize, generations: u64, seed: u64) -> Self {
        ExecutorPlan {
            population_size,
            generations,
            seed,
            pbest_fraction: DEFAULT_PBEST_FRACTION,
        }
    }

    pub fn generations_for(&self, powered: bool) -> u64 {
        if powered {
            POWER_UP_FACTOR * self.generations
        } else {
            self.generations
        }
    }

    /// Executor FEs of one full batch of `trials` genomes.
    pub fn batch_fes(&self, trials: usize, powered: bool) -> u64 {
        trials as u64 * executor_fes(self.population_size as u64, self.generations_for(powered))
    }
}

/// Runs one executor per trial, all with the same seed, in parallel on the
/// current rayon pool. Output is in trial order. A configuration the
/// executor rejects scores `+inf` and is logged.
pub fn evaluate_batch(
    trials: &[MetaGenome],
    problem: &Problem,
    plan: &ExecutorPlan,
    powered: bool,
) -> Vec<ExecutorResult> {
    let settings = PdeSettings {
        population_size: plan.population_size,
        seed: plan.seed,
        pbest_fraction: plan.pbest_fraction,
    };
    let generations = plan.generations_for(powered);
    trials
        .par_iter()
        .map(|genome| {
            let config = genome.decode();
            match run_pde_with(problem, config, settings, generations) {
                Ok(out) => ExecutorResult {
                    config,
                    fitness: out.best_fitness,
                    best_vector: Some(out.best_vector),
                    evaluations: out.evaluations,
                },
                Err(e) => {
                    log::warn!("executor for {config} failed: {e}");
                    ExecutorResult {
                        config,
                        fitness: f64::INFINITY,
                        best_vector: None,
                        evaluations: 0,
                    }
                }
            }
        })
        .collect()
}

/// Meta-run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaDeSettings {
    pub meta_population: usize,
    pub max_generations: u64,
    pub exec_population: usize,
    pub exec_generations: u64,
    pub seed: u64,
    /// Extra FE or wall-clock limits. `max_generations` here, when set,
    /// further caps `max_generations` above.
    pub budget: RunBudget,
    pub evolver: EvolverParams,
    pub pbest_fraction: f64,
}

impl MetaDeSettings {
    pub fn new(
        meta_population: usize,
        max_generations: u64,
        exec_population: usize,
        exec_generations: u64,
        seed: u64,
    ) -> Self {
        MetaDeSettings {
            meta_population,
            max_generations,
            exec_population,
            exec_generations,
            seed,
            budget: RunBudget::generations(max_generations),
            evolver: EvolverParams::default(),
            pbest_fraction: DEFAULT_PBEST_FRACTION,
        }
    }

    pub fn with_budget(mut self, budget: RunBudget) -> Self {
        self.budget = budget;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.meta_population < 4 {
            return Err(Error::config("meta_np", "must be at least 4"));
        }
        if self.max_generations == 0 {
            return Err(Error::config("meta_gens", "must be at least 1"));
        }
        if self.exec_population == 0 {
            return Err(Error::config("exec_np", "must be positive"));
        }
        if self.exec_generations == 0 {
            return Err(Error::config("exec_gens", "must be at least 1"));
        }
        self.budget.validate()
    }

    pub fn plan(&self) -> ExecutorPlan {
        ExecutorPlan {
            population_size: self.exec_population,
            generations: self.exec_generations,
            seed: executor_seed(self.seed),
            pbest_fraction: self.pbest_fraction,
        }
    }
}

/// Result of a meta run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDeOutcome {
    /// Decoded configuration of the best genome in the final meta
    /// population.
    pub best_config: HyperConfig,
    /// Best decision vector seen in any executor run.
    pub best_vector: Vec<f64>,
    pub best_fitness: f64,
    pub total_fes: u64,
    /// Executor FEs spent by each meta generation, in order.
    pub generation_fes: Vec<u64>,
    /// Which meta generations ran powered.
    pub powered: Vec<bool>,
    pub records: Vec<ConvergenceRecord>,
    pub state: MetaState,
}

/// Full meta run with a callback per completed meta generation.
pub fn metade_run_with(
    problem: &Problem,
    settings: &MetaDeSettings,
    mut on_generation: impl FnMut(&ConvergenceRecord) -> Result<()>,
) -> Result<MetaDeOutcome> {
    settings.validate()?;
    let clock = Stopwatch::start();
    let plan = settings.plan();
    let budget = settings.budget;
    let max_gens = budget
        .max_generations
        .map_or(settings.max_generations, |g| g.min(settings.max_generations));
    let normal_cost = plan.batch_fes(settings.meta_population, false);
    let powered_cost = plan.batch_fes(settings.meta_population, true);
    if let Some(max_fes) = budget.max_fes {
        if max_fes < powered_cost {
            return Err(Error::BudgetTooSmall(format!(
                "max_fes = {max_fes} cannot cover the powered meta generation ({powered_cost} FEs)"
            )));
        }
    }
    let wall = budget.wall_limit();

    let mut state = MetaState::initialize(settings.meta_population, settings.seed)?;
    let mut best_fitness = f64::INFINITY;
    let mut best_vector: Option<Vec<f64>> = None;
    let mut records = Vec::new();
    let mut generation_fes = Vec::new();
    let mut powered_flags = Vec::new();
    let mut normal_time = Duration::ZERO;
    let mut normal_count = 0u32;

    loop {
        let g = state.generation + 1;
        let powered = g >= max_gens || !room_for_another(
            &budget,
            wall,
            &clock,
            state.evaluations,
            normal_cost,
            powered_cost,
            normal_time.checked_div(normal_count).unwrap_or(Duration::ZERO),
        );
        let started = clock.elapsed();
        let draws = EvolverDraws::sample(state.size(), settings.seed, g);
        let trials = evolver_trials(&state, settings.evolver, &draws);
        let results = evaluate_batch(&trials, problem, &plan, powered);
        let fitness: Vec<f64> = results.iter().map(|r| r.fitness).collect();
        let spent: u64 = results.iter().map(|r| r.evaluations).sum();
        for r in &results {
            if r.fitness < best_fitness {
                if let Some(v) = &r.best_vector {
                    best_fitness = r.fitness;
                    best_vector = Some(v.clone());
                }
            }
        }
        state.select(&trials, &fitness);
        state.generation = g;
        state.evaluations += spent;
        generation_fes.push(spent);
        powered_flags.push(powered);
        if !powered {
            normal_time += clock.elapsed() - started;
            normal_count += 1;
        }

        if g == 1 {
            if let Some(limit) = wall {
                if clock.elapsed() > limit && !powered {
                    return Err(Error::BudgetTooSmall(format!(
                        "wall-clock limit of {} ms expired during the first meta generation",
                        limit.as_millis()
                    )));
                }
            }
        }

        let record = ConvergenceRecord {
            generation: g,
            best_fitness,
            cumulative_fes: state.evaluations,
            elapsed_ms: clock.elapsed_ms(),
        };
        on_generation(&record)?;
        records.push(record);
        if powered {
            break;
        }
    }

    let best_config = state.genomes[state.best()].decode();
    let best_vector = best_vector.ok_or_else(|| {
        Error::config("exec_np", "no executor run succeeded; the executor population is too small")
    })?;
    Ok(MetaDeOutcome {
        best_config,
        best_vector,
        best_fitness,
        total_fes: state.evaluations,
        generation_fes,
        powered: powered_flags,
        records,
        state,
    })
}

/// Whether one more normal generation still leaves room for the powered one.
fn room_for_another(
    budget: &RunBudget,
    wall: Option<Duration>,
    clock: &Stopwatch,
    spent: u64,
    normal_cost: u64,
    powered_cost: u64,
    mean_normal: Duration,
) -> bool {
    if let Some(max_fes) = budget.max_fes {
        if spent + normal_cost + powered_cost > max_fes {
            return false;
        }
    }
    if let Some(limit) = wall {
        let reserve = mean_normal * (POWER_UP_FACTOR as u32 + 1);
        if clock.elapsed() + reserve > limit {
            return false;
        }
    }
    true
}

/// Generation-limited meta run.
pub fn metade_run(problem: &Problem, settings: &MetaDeSettings) -> Result<MetaDeOutcome> {
    metade_run_with(problem, settings, |_| Ok(()))
}
