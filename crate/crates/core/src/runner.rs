//! Configuration-driven runs with convergence logging.
//!
//! CSV logs use the header `generation,best_fitness,cumulative_fes,elapsed_ms`
//! and are flushed after every row, so an interrupted run leaves a valid
//! prefix. `best_fitness` is truncated for reporting (values below `1e-8`
//! become 0). The JSON summary carries the same rows plus the raw best
//! fitness and the decoded strategy.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::budget::{truncate_for_report, ConvergenceRecord, RunBudget, Stopwatch};
use crate::error::{Error, Result};
use crate::meta::{metade_run_with, MetaDeSettings};
use crate::pde::{PdeExecutor, PdeSettings};
use crate::problems::{lookup, Problem};
use crate::strategy::HyperConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Metade,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub dim: usize,
    /// Seed of the problem's shift/rotation, independent of the run seed.
    pub problem_seed: u64,
    pub mode: Mode,
    /// PDE mode: strategy name, e.g. `DE/rand/1/bin`.
    pub strategy: Option<String>,
    pub f: Option<f64>,
    pub cr: Option<f64>,
    /// PDE mode population size.
    pub np: usize,
    /// PDE mode generation count.
    pub generations: Option<u64>,
    pub meta_np: usize,
    pub meta_gens: u64,
    pub exec_np: usize,
    pub exec_gens: u64,
    pub seed: u64,
    pub budget_fes: Option<u64>,
    pub budget_ms: Option<u64>,
    pub out: Option<PathBuf>,
    /// Inferred from the `out` extension when absent (`.json` → JSON,
    /// anything else → CSV).
    pub format: Option<OutputFormat>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "sphere".into(),
            dim: 10,
            problem_seed: 0,
            mode: Mode::Metade,
            strategy: None,
            f: None,
            cr: None,
            np: 100,
            generations: None,
            meta_np: 20,
            meta_gens: 20,
            exec_np: 50,
            exec_gens: 300,
            seed: 0,
            budget_fes: None,
            budget_ms: None,
            out: None,
            format: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

pub const DEFAULT_F: f64 = 0.5;
pub const DEFAULT_CR: f64 = 0.9;

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.dim < 2 {
            return Err(Error::config("dim", "must be at least 2"));
        }
        match self.mode {
            Mode::Pde => {
                if self.strategy.is_none() {
                    return Err(Error::config("strategy", "required in pde mode"));
                }
                self.hyper_config()?;
                if self.generations.is_none() && self.budget_fes.is_none() && self.budget_ms.is_none() {
                    return Err(Error::config("generations", "pde mode needs generations or a budget"));
                }
                if self.generations == Some(0) {
                    return Err(Error::config("generations", "must be at least 1"));
                }
            }
            Mode::Metade => {
                if self.meta_np < 4 {
                    return Err(Error::config("meta_np", "must be at least 4"));
                }
                for (field, v) in [("meta_gens", self.meta_gens), ("exec_gens", self.exec_gens)] {
                    if v == 0 {
                        return Err(Error::config(field, "must be at least 1"));
                    }
                }
                if self.exec_np == 0 {
                    return Err(Error::config("exec_np", "must be positive"));
                }
            }
        }
        self.budget().validate()
    }

    pub fn hyper_config(&self) -> Result<HyperConfig> {
        let name = self
            .strategy
            .as_deref()
            .ok_or_else(|| Error::config("strategy", "missing"))?;
        HyperConfig::named(name, self.f.unwrap_or(DEFAULT_F), self.cr.unwrap_or(DEFAULT_CR))
    }

    pub fn budget(&self) -> RunBudget {
        RunBudget {
            max_generations: match self.mode {
                Mode::Pde => self.generations,
                Mode::Metade => Some(self.meta_gens),
            },
            max_fes: self.budget_fes,
            max_wall_ms: self.budget_ms,
        }
    }

    pub fn output_format(&self) -> OutputFormat {
        self.format.unwrap_or_else(|| match &self.out {
            Some(p) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        })
    }
}

/// Flat view of a [`HyperConfig`] for output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "CR")]
    pub cr: f64,
    pub bl: u8,
    pub br: u8,
    pub dn: u8,
    pub cs: u8,
}

impl From<&HyperConfig> for ConfigReport {
    fn from(c: &HyperConfig) -> Self {
        let (bl, br, dn, cs) = c.strategy.codes();
        ConfigReport {
            f: c.f(),
            cr: c.cr(),
            bl,
            br,
            dn,
            cs,
        }
    }
}

/// Output record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub dim: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Best fitness after the `1e-8` reporting truncation.
    pub best_fitness: f64,
    pub best_fitness_raw: f64,
    pub strategy: String,
    pub config: ConfigReport,
    pub best_vector: Vec<f64>,
    pub total_fes: u64,
    pub wall_ms: f64,
    pub records: Vec<ConvergenceRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    generation: u64,
    best_fitness: f64,
    cumulative_fes: u64,
    elapsed_ms: String,
}

/// Streams convergence rows to a CSV file, flushing after each.
struct CsvLog {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvLog {
    fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(CsvLog {
            path: path.to_owned(),
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        })
    }

    fn push(&mut self, r: &ConvergenceRecord) -> Result<()> {
        let row = CsvRow {
            generation: r.generation,
            best_fitness: truncate_for_report(r.best_fitness),
            cumulative_fes: r.cumulative_fes,
            elapsed_ms: format!("{:.3}", r.elapsed_ms),
        };
        self.writer.serialize(row).map_err(|e| self.csv_error(e))?;
        self.writer
            .flush()
            .map_err(|e| Error::io(&self.path, e))
    }

    fn csv_error(&self, e: csv::Error) -> Error {
        Error::io(&self.path, std::io::Error::other(e))
    }
}

/// Reads a CSV convergence log back. `best_fitness` is the reported
/// (truncated) value.
pub fn read_csv_log(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            Ok(ConvergenceRecord {
                generation: row.generation,
                best_fitness: row.best_fitness,
                cumulative_fes: row.cumulative_fes,
                elapsed_ms: row.elapsed_ms.parse().unwrap_or(f64::NAN),
            })
        })
        .collect()
}

/// Validates `cfg`, runs it on a pool of `cfg.workers` threads and writes
/// the requested output.
pub fn run_from_config(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let problem = lookup(&cfg.problem, cfg.dim, cfg.problem_seed)?;
    let format = cfg.output_format();
    let mut csv = match (&cfg.out, format) {
        (Some(path), OutputFormat::Csv) => Some(CsvLog::create(path)?),
        _ => None,
    };
    let mut sink = |r: &ConvergenceRecord| match csv.as_mut() {
        Some(log) => log.push(r),
        None => Ok(()),
    };

    let summary = crate::with_workers(cfg.workers, || match cfg.mode {
        Mode::Pde => run_pde_mode(cfg, &problem, &mut sink),
        Mode::Metade => run_metade_mode(cfg, &problem, &mut sink),
    })??;

    if let (Some(path), OutputFormat::Json) = (&cfg.out, format) {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &summary)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    Ok(summary)
}

fn run_pde_mode(
    cfg: &RunConfig,
    problem: &Problem,
    sink: &mut impl FnMut(&ConvergenceRecord) -> Result<()>,
) -> Result<RunSummary> {
    let clock = Stopwatch::start();
    let config = cfg.hyper_config()?;
    let budget = cfg.budget();
    let settings = PdeSettings::new(cfg.np, cfg.seed);
    if budget.max_fes.is_some_and(|m| m < cfg.np as u64) {
        return Err(Error::BudgetTooSmall(format!(
            "max_fes cannot cover the initial population of {}",
            cfg.np
        )));
    }
    let mut exec = PdeExecutor::new(problem, config, settings)?;
    let mut records = vec![exec.record()];
    sink(&records[0])?;
    let wall = budget.wall_limit();
    loop {
        if budget.max_generations.is_some_and(|g| exec.generation() >= g)
            || budget.max_fes.is_some_and(|m| exec.evaluations() + cfg.np as u64 > m)
            || wall.is_some_and(|w| clock.elapsed() >= w)
        {
            break;
        }
        let r = exec.step()?;
        sink(&r)?;
        records.push(r);
    }
    let best = exec.population().best_fitness();
    Ok(RunSummary {
        problem: problem.name().to_string(),
        dim: problem.dim(),
        mode: Mode::Pde,
        seed: cfg.seed,
        best_fitness: truncate_for_report(best),
        best_fitness_raw: best,
        strategy: config.strategy.name(),
        config: (&config).into(),
        best_vector: exec.population().best_vector(),
        total_fes: exec.evaluations(),
        wall_ms: clock.elapsed_ms(),
        records,
    })
}

fn run_metade_mode(
    cfg: &RunConfig,
    problem: &Problem,
    sink: &mut impl FnMut(&ConvergenceRecord) -> Result<()>,
) -> Result<RunSummary> {
    let clock = Stopwatch::start();
    let settings = MetaDeSettings::new(cfg.meta_np, cfg.meta_gens, cfg.exec_np, cfg.exec_gens, cfg.seed)
        .with_budget(cfg.budget());
    let out = metade_run_with(problem, &settings, |r| sink(r))?;
    Ok(RunSummary {
        problem: problem.name().to_string(),
        dim: problem.dim(),
        mode: Mode::Metade,
        seed: cfg.seed,
        best_fitness: truncate_for_report(out.best_fitness),
        best_fitness_raw: out.best_fitness,
        strategy: out.best_config.strategy.name(),
        config: (&out.best_config).into(),
        best_vector: out.best_vector,
        total_fes: out.total_fes,
        wall_ms: clock.elapsed_ms(),
        records: out.records,
    })
}

/// Process exit status for an error: 2 for usage errors, 3 for a budget that
/// is too small, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::StrategyParse { .. }
        | Error::Domain { .. }
        | Error::UnknownProblem(_)
        | Error::PopulationTooSmall { .. }
        | Error::ConfigFile(_) => 2,
        Error::BudgetTooSmall(_) => 3,
        _ => 1,
    }
}
