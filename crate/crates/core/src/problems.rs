//! Benchmark objectives with optional shift and rotation.
//!
//! All functions are minimized. Summation inside a row always runs from the
//! lowest to the highest index, so batch and scalar evaluation agree bit for
//! bit and results do not depend on the worker count.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::population::Bounds;
use crate::rng::{Role, RngStream, StreamId};

type Objective = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Rows per rayon task in [`Problem::evaluate_batch`]. Smaller batches are
/// evaluated inline.
const PAR_MIN_ROWS: usize = 64;

/// Location and value of the global minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum {
    pub location: Vec<f64>,
    pub value: f64,
}

/// A bounded black-box objective.
#[derive(Clone)]
pub struct Problem {
    name: String,
    bounds: Bounds,
    objective: Arc<Objective>,
    optimum: Option<KnownOptimum>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("optimum", &self.optimum)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Problem {
            name: name.into(),
            bounds,
            objective: Arc::new(objective),
            optimum: None,
        }
    }

    pub fn with_optimum(mut self, location: Vec<f64>, value: f64) -> Self {
        assert_eq!(location.len(), self.dim(), "optimum dimension");
        self.optimum = Some(KnownOptimum { location, value });
        self
    }

    /// Wraps a maximization objective by negation.
    pub fn maximize(
        name: impl Into<String>,
        bounds: Bounds,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Problem::new(name, bounds, move |x| -objective(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn optimum(&self) -> Option<&KnownOptimum> {
        self.optimum.as_ref()
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    /// Evaluates every row of `x`. Rows are independent and the output is in
    /// row order. A non-finite value is reported with its row index.
    pub fn evaluate_batch(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        assert_eq!(x.ncols(), self.dim(), "batch dimension");
        let eval_row = |(i, row): (usize, ndarray::ArrayView1<'_, f64>)| {
            let value = match row.as_slice() {
                Some(s) => self.evaluate(s),
                None => self.evaluate(&row.to_vec()),
            };
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinite { row: i, value })
            }
        };
        if x.nrows() < PAR_MIN_ROWS {
            x.outer_iter().enumerate().map(eval_row).collect()
        } else {
            let rows: Vec<_> = x.outer_iter().enumerate().collect();
            rows.into_par_iter().with_min_len(PAR_MIN_ROWS).map(eval_row).collect()
        }
    }

    /// Applies `g(x) = f(M·(x − o) + x*)`, where `x*` is the base optimum, so
    /// the minimum moves to `o` with the same value.
    pub fn transformed(&self, transform: Transform) -> Result<Problem> {
        let opt = self
            .optimum
            .clone()
            .ok_or_else(|| Error::config("transform", "base problem has no known optimum"))?;
        if transform.shift.len() != self.dim() || transform.rotation.dim() != (self.dim(), self.dim())
        {
            return Err(Error::config("transform", "dimension mismatch"));
        }
        let base = Arc::clone(&self.objective);
        let anchor = opt.location.clone();
        let shift = transform.shift.clone();
        let rotation = transform.rotation.clone();
        let d = self.dim();
        let objective = move |x: &[f64]| {
            let mut z = vec![0.0; d];
            for (i, zi) in z.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += rotation[[i, j]] * (x[j] - shift[j]);
                }
                *zi = acc + anchor[i];
            }
            base(&z)
        };
        let name = format!("{}@{}", self.name, transform.label);
        Ok(Problem {
            name,
            bounds: self.bounds.clone(),
            objective: Arc::new(objective),
            optimum: Some(KnownOptimum {
                location: transform.shift,
                value: opt.value,
            }),
        })
    }
}

/// A shift vector and an orthogonal rotation.
#[derive(Debug, Clone)]
pub struct Transform {
    pub shift: Vec<f64>,
    pub rotation: Array2<f64>,
    label: &'static str,
}

impl Transform {
    pub fn identity(dim: usize) -> Self {
        Transform {
            shift: vec![0.0; dim],
            rotation: Array2::eye(dim),
            label: "id",
        }
    }

    /// Shift drawn uniformly from the central 80% of the box, no rotation.
    pub fn shift(bounds: &Bounds, seed: u64) -> Self {
        let mut rng = RngStream::new(seed, StreamId::new(Role::Transform, 0));
        Transform {
            shift: central_shift(bounds, &mut rng),
            rotation: Array2::eye(bounds.dim()),
            label: "shift",
        }
    }

    /// Shift as in [`Transform::shift`] plus a rotation obtained from the QR
    /// factorization of a Gaussian matrix, with column signs fixed by the
    /// diagonal of R.
    pub fn shift_rotate(bounds: &Bounds, seed: u64) -> Self {
        let mut rng = RngStream::new(seed, StreamId::new(Role::Transform, 0));
        let shift = central_shift(bounds, &mut rng);
        let d = bounds.dim();
        let mut rng = RngStream::new(seed, StreamId::new(Role::Transform, 1));
        let gauss = DMatrix::from_fn(d, d, |_, _| rng.normal());
        let qr = gauss.qr();
        let q = qr.q();
        let r = qr.r();
        let rotation = Array2::from_shape_fn((d, d), |(i, j)| {
            let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
            q[(i, j)] * sign
        });
        Transform {
            shift,
            rotation,
            label: "rot",
        }
    }
}

fn central_shift(bounds: &Bounds, rng: &mut RngStream) -> Vec<f64> {
    (0..bounds.dim())
        .map(|j| {
            let mid = 0.5 * (bounds.lower()[j] + bounds.upper()[j]);
            let half = 0.4 * bounds.width(j);
            rng.uniform_in(mid - half, mid + half)
        })
        .collect()
}

/// The base functions of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sphere,
    Rastrigin,
    Rosenbrock,
    Ackley,
    Griewank,
    Schwefel,
}

/// Location of the Schwefel 2.26 minimum in every coordinate.
pub const SCHWEFEL_OPTIMUM: f64 = 420.968_746_359_982;

impl Function {
    pub const ALL: [Function; 6] = [
        Function::Sphere,
        Function::Rastrigin,
        Function::Rosenbrock,
        Function::Ackley,
        Function::Griewank,
        Function::Schwefel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sphere => "sphere",
            Function::Rastrigin => "rastrigin",
            Function::Rosenbrock => "rosenbrock",
            Function::Ackley => "ackley",
            Function::Griewank => "griewank",
            Function::Schwefel => "schwefel",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Function::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))
    }

    pub fn default_range(self) -> (f64, f64) {
        match self {
            Function::Schwefel => (-500.0, 500.0),
            _ => (-100.0, 100.0),
        }
    }

    pub fn optimum_location(self, dim: usize) -> Vec<f64> {
        match self {
            Function::Rosenbrock => vec![1.0; dim],
            Function::Schwefel => vec![SCHWEFEL_OPTIMUM; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Function::Sphere => sphere(x),
            Function::Rastrigin => rastrigin(x),
            Function::Rosenbrock => rosenbrock(x),
            Function::Ackley => ackley(x),
            Function::Griewank => griewank(x),
            Function::Schwefel => schwefel(x),
        }
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc + v * v)
}

pub fn rastrigin(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    10.0 * n + x.iter().fold(0.0, |acc, v| acc + (v * v - 10.0 * (2.0 * PI * v).cos()))
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).fold(0.0, |acc, w| {
        acc + 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2)
    })
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().fold(0.0, |acc, v| acc + v * v);
    let cs = x.iter().fold(0.0, |acc, v| acc + (2.0 * PI * v).cos());
    -20.0 * (-0.2 * (sq / n).sqrt()).exp() - (cs / n).exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().fold(0.0, |acc, v| acc + v * v) / 4000.0;
    let prod = x
        .iter()
        .enumerate()
        .fold(1.0, |acc, (i, v)| acc * (v / ((i + 1) as f64).sqrt()).cos());
    1.0 + sum - prod
}

pub fn schwefel(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    418.982_887_272_433_8 * n - x.iter().fold(0.0, |acc, v| acc + v * v.abs().sqrt().sin())
}

/// Builds a base benchmark in `dim` dimensions.
pub fn make_function(name: &str, dim: usize) -> Result<Problem> {
    let function = Function::from_name(name)?;
    if dim < 2 {
        return Err(Error::config("dim", format!("need at least 2 dimensions, got {dim}")));
    }
    let (lo, hi) = function.default_range();
    let location = function.optimum_location(dim);
    let value = function.eval(&location);
    Ok(Problem::new(function.name(), Bounds::uniform(dim, lo, hi)?, move |x| function.eval(x))
        .with_optimum(location, value))
}

/// Shifts and rotates `problem` with a transform derived from `seed`.
pub fn with_transform(problem: &Problem, seed: u64) -> Result<Problem> {
    problem.transformed(Transform::shift_rotate(problem.bounds(), seed))
}

/// Resolves a registry name: `rastrigin`, `rastrigin@shift` or
/// `rastrigin@rot` (shifted and rotated).
pub fn lookup(name: &str, dim: usize, transform_seed: u64) -> Result<Problem> {
    let (base, variant) = match name.split_once('@') {
        Some((b, v)) => (b, Some(v)),
        None => (name, None),
    };
    let problem = make_function(base, dim)?;
    match variant {
        None => Ok(problem),
        Some("shift") => problem.transformed(Transform::shift(problem.bounds(), transform_seed)),
        Some("rot") => with_transform(&problem, transform_seed),
        Some(_) => Err(Error::UnknownProblem(name.to_string())),
    }
}

/// Every name accepted by [`lookup`].
pub fn registry_names() -> Vec<String> {
    Function::ALL
        .iter()
        .flat_map(|f| {
            let n = f.name();
            [n.to_string(), format!("{n}@shift"), format!("{n}@rot")]
        })
        .collect()
}
