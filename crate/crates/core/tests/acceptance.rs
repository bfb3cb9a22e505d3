//! End-to-end acceptance checks. Runs every criterion, prints one line
//! each and exits non-zero if any failed.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{array, Array2};

use metade::budget::{is_monotone, metade_fes, ConvergenceRecord};
use metade::landscape::{default_epsilons, fdc, rie, LandscapeSample, WalkSeries};
use metade::meta::{evaluate_batch, metade_run, ExecutorPlan, MetaGenome, MetaDeSettings, META_LOWER, META_UPPER};
use metade::pde::{crossover_arithmetic_with, exponential_row, binomial_row, mutate_with, MutationContext, PdeExecutor, PdeSettings};
use metade::problems::{lookup, make_function};
use metade::rng::{Role, RngStream, StreamId};
use metade::runner::read_csv_log;
use metade::{decode_strategy_name, encode_strategy, run_pde, with_workers, HyperConfig, Population, Strategy};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

/// Convergence logs gathered along the way for the monotonicity check.
#[derive(Default)]
struct Logs(Vec<(String, Vec<ConvergenceRecord>)>);

impl Logs {
    fn add(&mut self, label: impl Into<String>, records: Vec<ConvergenceRecord>) {
        self.0.push((label.into(), records));
    }
}

fn oracle_equivalence(logs: &mut Logs) -> Check {
    let clock = Instant::now();
    let (seed, d, np, gens) = (2024, 10, 50, 100);
    let expect = common::vanilla_de_sphere(seed, d, np, gens, 0.5, 0.9);
    let problem = make_function("sphere", d).map_err(|e| e.to_string())?;
    let cfg = HyperConfig::new(0.5, 0.9, Strategy::from_codes(1, 1, 1, 1).unwrap()).unwrap();
    let mut exec = PdeExecutor::new(&problem, cfg, PdeSettings::new(np, seed)).map_err(|e| e.to_string())?;
    let mut records = vec![exec.record()];
    for g in 0..=gens as usize {
        if g > 0 {
            records.push(exec.step().map_err(|e| e.to_string())?);
        }
        let pop = exec.population();
        for i in 0..np {
            let row = pop.row(i);
            let same = row.iter().zip(&expect[g].x[i]).all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, format!("generation {g} row {i} differs"))?;
            ensure(
                pop.fitness()[i].to_bits() == expect[g].fitness[i].to_bits(),
                format!("generation {g} fitness {i} differs"),
            )?;
        }
    }
    logs.add("oracle pde", records);
    within(clock.elapsed(), 5.0)?;
    Ok(format!("{gens} generations bit-identical, best {:e}", exec.population().best_fitness()))
}

fn strategy_table() -> Check {
    let clock = Instant::now();
    let table = [
        ("DE/rand/1/bin", (1, 1, 1, 1)),
        ("DE/best/1/bin", (2, 2, 1, 1)),
        ("DE/current-to-best/1/bin", (4, 2, 1, 1)),
        ("DE/rand/2/bin", (1, 1, 2, 1)),
        ("DE/best/2/bin", (2, 2, 2, 1)),
        ("DE/current-to-pbest/1/bin", (4, 3, 1, 1)),
        ("DE/current-to-rand/1", (1, 1, 1, 3)),
    ];
    for (name, codes) in table {
        let s = encode_strategy(name).map_err(|e| e.to_string())?;
        ensure(s.codes() == codes, format!("{name} encodes to {:?}", s.codes()))?;
        let back = decode_strategy_name(codes.0, codes.1, codes.2, codes.3).map_err(|e| e.to_string())?;
        ensure(encode_strategy(&back).unwrap() == s, format!("{codes:?} decodes to {back}"))?;
    }

    let x: Array2<f64> = array![
        [0.3, -1.2, 2.5, 0.0],
        [1.1, 0.4, -0.7, 3.3],
        [-2.0, 1.5, 0.9, -0.4],
        [0.8, -0.3, -1.9, 1.2],
        [2.2, 2.0, 0.1, -1.1],
        [-0.6, -2.4, 1.3, 0.7],
        [1.7, 0.9, -2.2, -2.8],
        [-1.3, 0.2, 0.6, 2.1],
        [0.05, -0.15, 0.25, -0.35],
        [3.0, -3.0, 1.0, -1.0],
    ];
    let fit: Vec<f64> = x.outer_iter().map(|r| r.iter().map(|v| v * v).sum()).collect();
    let pop = Population::new(x.clone(), fit).unwrap();
    let best = pop.best_index();
    let np = x.nrows();
    let f = 0.7;
    let rows = |width: usize| -> Vec<Vec<usize>> {
        (0..np).map(|i| (1..=width).map(|k| (i + k) % np).collect()).collect()
    };
    let pbest: Vec<usize> = (0..np).map(|i| (i + 3) % np).collect();
    let xr = |i: usize, j: usize| x[[i, j]];
    type Closed<'a> = Box<dyn Fn(usize, &[usize], usize) -> f64 + 'a>;
    let cases: Vec<(&str, usize, Closed)> = vec![
        ("DE/rand/1/bin", 1, Box::new(|j, r, _| xr(r[0], j) + f * (xr(r[1], j) - xr(r[2], j)))),
        ("DE/best/1/bin", 1, Box::new(|j, r, _| xr(best, j) + f * (xr(r[1], j) - xr(r[2], j)))),
        (
            "DE/rand/2/bin",
            2,
            Box::new(|j, r, _| xr(r[0], j) + f * (xr(r[1], j) - xr(r[2], j)) + f * (xr(r[3], j) - xr(r[4], j))),
        ),
        (
            "DE/best/2/bin",
            2,
            Box::new(|j, r, _| xr(best, j) + f * (xr(r[1], j) - xr(r[2], j)) + f * (xr(r[3], j) - xr(r[4], j))),
        ),
        (
            "DE/current-to-best/1/bin",
            1,
            Box::new(|j, r, i| xr(i, j) + f * (xr(best, j) - xr(i, j)) + f * (xr(r[1], j) - xr(r[2], j))),
        ),
        (
            "DE/current-to-pbest/1/bin",
            1,
            Box::new(|j, r, i| {
                let pb = (i + 3) % 10;
                xr(i, j) + f * (xr(pb, j) - xr(i, j)) + f * (xr(r[1], j) - xr(r[2], j))
            }),
        ),
    ];
    for (name, dn, closed) in &cases {
        let cfg = HyperConfig::named(name, f, 0.9).unwrap();
        let draws = rows(2 * dn + 2);
        let ctx = MutationContext::from_parts(np, *dn, draws.clone(), pbest.clone()).map_err(|e| e.to_string())?;
        let v = mutate_with(&pop, &cfg, &ctx).map_err(|e| e.to_string())?;
        for i in 0..np {
            for j in 0..x.ncols() {
                let want = closed(j, &draws[i], i);
                ensure(
                    (v[[i, j]] - want).abs() <= 1e-12,
                    format!("{name} row {i} gene {j}: {} vs {want}", v[[i, j]]),
                )?;
            }
        }
    }

    let cfg = HyperConfig::named("DE/current-to-rand/1", f, 0.9).unwrap();
    let draws = rows(4);
    let ctx = MutationContext::from_parts(np, 1, draws.clone(), pbest).unwrap();
    let v = mutate_with(&pop, &cfg, &ctx).unwrap();
    let k: Vec<f64> = (0..np).map(|i| (i as f64 + 0.5) / np as f64).collect();
    let u = crossover_arithmetic_with(v.view(), x.view(), &k);
    for i in 0..np {
        let r = &draws[i];
        for j in 0..x.ncols() {
            let want = xr(i, j) + k[i] * (xr(r[0], j) - xr(i, j)) + k[i] * f * (xr(r[1], j) - xr(r[2], j));
            ensure(
                (u[[i, j]] - want).abs() <= 1e-12,
                format!("current-to-rand row {i} gene {j}: {} vs {want}", u[[i, j]]),
            )?;
        }
    }
    within(clock.elapsed(), 1.0)?;
    Ok(format!("{} table rows, {} closed forms plus the arithmetic expansion", table.len(), cases.len()))
}

fn cardinality() -> Check {
    let all: Vec<_> = Strategy::all().map(|s| s.codes()).collect();
    let mut uniq = all.clone();
    uniq.sort_unstable();
    uniq.dedup();
    ensure(all.len() == 192 && uniq.len() == 192, format!("{} tuples, {} distinct", all.len(), uniq.len()))?;
    Ok("192 distinct tuples".into())
}

fn crossover_distributions() -> Check {
    let clock = Instant::now();
    let (cr, d, n) = (0.6, 10usize, 1_000_000usize);
    let mut counts = vec![0u64; d + 1];
    let mut rng = RngStream::new(77, StreamId::new(Role::Crossover, 0));
    for _ in 0..n {
        let (_, len) = exponential_row(&mut rng, d, cr);
        counts[len] += 1;
    }
    let mass = common::censored_geometric(cr, d);
    let mut worst: f64 = 0.0;
    for (l, p) in (1..=d).zip(&mass) {
        let expect = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let z = (counts[l] as f64 - expect).abs() / sigma;
        worst = worst.max(z);
        ensure(z <= 3.0, format!("exp length {l}: {} vs {expect:.1} ({z:.2} sigma)", counts[l]))?;
    }

    let mut genes = 0u64;
    let mut rng = RngStream::new(78, StreamId::new(Role::Crossover, 1));
    for _ in 0..n {
        genes += binomial_row(&mut rng, d, cr).iter().filter(|&&t| t).count() as u64;
    }
    let mean = genes as f64 / n as f64;
    let expect = 1.0 + (d as f64 - 1.0) * cr;
    let rel = (mean - expect).abs() / expect;
    ensure(rel <= 0.01, format!("binomial mean {mean} vs {expect}"))?;
    within(clock.elapsed(), 10.0)?;
    Ok(format!("exp worst bin {worst:.2} sigma, binomial mean {mean:.4} vs {expect}"))
}

fn power_up_accounting(logs: &mut Logs) -> Check {
    let problem = make_function("sphere", 5).unwrap();
    let settings = MetaDeSettings::new(10, 3, 20, 50, 5);
    let out = metade_run(&problem, &settings).map_err(|e| e.to_string())?;
    ensure(out.total_fes == 70_600, format!("total {}", out.total_fes))?;
    ensure(metade_fes(10, 20, 50, 3, 5) == 70_600, "closed form")?;
    ensure(out.generation_fes == vec![10_200, 10_200, 50_200], format!("per generation {:?}", out.generation_fes))?;
    ensure(out.powered == vec![false, false, true], format!("powered {:?}", out.powered))?;
    // Each executor also evaluates its initial population once.
    let init = 10 * 20;
    let (normal, powered) = (out.generation_fes[0] - init, out.generation_fes[2] - init);
    ensure(powered == 5 * normal, format!("powered iterations {powered} vs normal {normal}"))?;
    logs.add("power-up meta", out.records);
    Ok(format!("total 70600, per generation {:?}", out.generation_fes))
}

fn one_shot_determinism() -> Check {
    let problem = lookup("rastrigin@rot", 10, 3).unwrap();
    let plan = ExecutorPlan::new(20, 30, 991);
    let mut rng = RngStream::new(4, StreamId::new(Role::MetaInit, 0));
    let mut trials: Vec<MetaGenome> = (0..14)
        .map(|_| {
            let mut g = [0.0; 6];
            for (k, v) in g.iter_mut().enumerate() {
                *v = rng.uniform_in(META_LOWER[k], META_UPPER[k]);
            }
            MetaGenome(g)
        })
        .collect();
    trials.push(trials[2]);
    trials.push(trials[9]);
    let mut reference: Option<Vec<u64>> = None;
    for workers in [1, 4, 8] {
        for _ in 0..3 {
            let out = with_workers(workers, || evaluate_batch(&trials, &problem, &plan, false)).unwrap();
            let bits: Vec<u64> = out.iter().map(|r| r.fitness.to_bits()).collect();
            match &reference {
                None => reference = Some(bits),
                Some(r) => ensure(*r == bits, format!("workers={workers} differs"))?,
            }
        }
    }
    let r = reference.unwrap();
    ensure(r[14] == r[2] && r[15] == r[9], "duplicate trials scored differently")?;
    Ok("16 trials identical over 3 repeats and workers {1,4,8}".into())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn desk_convergence(logs: &mut Logs) -> Check {
    let clock = Instant::now();
    let problem = lookup("rastrigin@rot", 10, 0).unwrap();
    let f_star = problem.optimum().unwrap().value;
    let budget = metade_fes(20, 50, 300, 10, 5);
    let baseline_np = 100usize;
    let baseline_gens = budget / baseline_np as u64 - 1;
    let baseline_cfg = HyperConfig::named("DE/rand/1/bin", 0.5, 0.9).unwrap();
    let (mut meta_err, mut base_err) = (Vec::new(), Vec::new());
    for seed in 0..5u64 {
        let out = metade_run(&problem, &MetaDeSettings::new(20, 10, 50, 300, seed)).map_err(|e| e.to_string())?;
        ensure(out.total_fes == budget, format!("metade spent {}", out.total_fes))?;
        meta_err.push(out.best_fitness - f_star);
        logs.add(format!("desk meta seed {seed}"), out.records);

        let base = run_pde(&problem, baseline_cfg, baseline_np, baseline_gens, seed).map_err(|e| e.to_string())?;
        ensure(base.evaluations == budget, format!("baseline spent {}", base.evaluations))?;
        base_err.push(base.best_fitness - f_star);
        logs.add(format!("desk baseline seed {seed}"), base.history);
    }
    let (mm, mb) = (median(meta_err.clone()), median(base_err.clone()));
    let hits = meta_err.iter().filter(|&&e| e <= 1e-2).count();
    let detail = format!("metade errors {meta_err:.3?} median {mm:.3}; rand/1/bin {base_err:.3?} median {mb:.3}; {hits}/5 at <=1e-2");
    ensure(mm <= mb, format!("median worse than baseline: {detail}"))?;
    ensure(hits >= 3, format!("too few seeds reach 1e-2: {detail}"))?;
    within(clock.elapsed(), 600.0)?;
    Ok(detail)
}

fn monotonicity(logs: &Logs) -> Check {
    for (label, records) in &logs.0 {
        ensure(!records.is_empty(), format!("{label} is empty"))?;
        ensure(is_monotone(records), format!("{label} increases"))?;
    }
    Ok(format!("{} logs non-increasing", logs.0.len()))
}

fn landscape() -> Check {
    let clock = Instant::now();
    let sphere = make_function("sphere", 10).unwrap();
    let s = LandscapeSample::uniform(&sphere, 10_000, 1).map_err(|e| e.to_string())?;
    let f = fdc(&s).map_err(|e| e.to_string())?;
    ensure(f >= 0.9, format!("sphere fdc {f}"))?;

    let mut rng = RngStream::new(0, StreamId::new(Role::Landscape, 5));
    let pts = Array2::from_shape_fn((500, 4), |_| rng.uniform_in(-3.0, 3.0));
    let mut syn = LandscapeSample::new(pts, vec![0.0; 500], &[0.5, -1.0, 2.0, 0.0]).unwrap();
    syn.fitness = syn.distances.clone();
    let exact = fdc(&syn).unwrap();
    ensure(exact == 1.0, format!("synthetic fdc {exact}"))?;

    let rastrigin = make_function("rastrigin", 10).unwrap();
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..5 {
        let ws = WalkSeries::progressive(&sphere, 1000, 0.01, seed).unwrap();
        let wr = WalkSeries::progressive(&rastrigin, 1000, 0.01, seed).unwrap();
        let hs = rie(&ws, &default_epsilons(&ws, 41)).unwrap();
        let hr = rie(&wr, &default_epsilons(&wr, 41)).unwrap();
        wins += (hr > hs) as usize;
        pairs.push((hr, hs));
    }
    ensure(wins >= 3, format!("rastrigin rougher on {wins}/5: {pairs:.3?}"))?;
    within(clock.elapsed(), 30.0)?;
    Ok(format!("sphere fdc {f:.4}, synthetic 1.0, rie rastrigin > sphere on {wins}/5"))
}

fn strip_elapsed(path: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn cli_reproducibility(logs: &mut Logs) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        (
            "metade",
            "problem = \"rastrigin@rot\"\ndim = 6\nmode = \"metade\"\nmeta_np = 10\nmeta_gens = 4\nexec_np = 20\nexec_gens = 40\nseed = 42\nworkers = 2\n",
        ),
        (
            "pde",
            "problem = \"ackley@shift\"\ndim = 8\nmode = \"pde\"\nstrategy = \"DE/current-to-pbest/1/exp\"\nf = 0.6\ncr = 0.8\nnp = 40\ngenerations = 200\nseed = 7\n",
        ),
    ];
    for (label, toml) in configs {
        let cfg = dir.path().join(format!("{label}.toml"));
        std::fs::write(&cfg, toml).unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{label}-{run}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_metade"))
                .args(["run", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), format!("{label} run {run}: {}", String::from_utf8_lossy(&status.stderr)))?;
            outputs.push(out);
        }
        let (a, b) = (strip_elapsed(&outputs[0])?, strip_elapsed(&outputs[1])?);
        ensure(a.lines().count() > 2, format!("{label}: short log"))?;
        ensure(a == b, format!("{label}: csv differs between processes"))?;
        logs.add(format!("cli {label}"), read_csv_log(&outputs[0]).map_err(|e| e.to_string())?);
    }
    Ok("metade and pde logs byte-identical across two processes".into())
}

fn main() {
    let mut logs = Logs::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, result: Check| {
        match &result {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {why}");
            }
        }
    };
    report(1, "oracle equivalence", oracle_equivalence(&mut logs));
    report(2, "strategy table", strategy_table());
    report(3, "cardinality", cardinality());
    report(4, "crossover distributions", crossover_distributions());
    report(5, "power-up accounting", power_up_accounting(&mut logs));
    report(6, "one-shot determinism", one_shot_determinism());
    report(7, "desk-scale convergence", desk_convergence(&mut logs));
    report(10, "cli reproducibility", cli_reproducibility(&mut logs));
    let mono = monotonicity(&logs);
    report(8, "monotonicity", mono);
    report(9, "landscape metrics", landscape());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
