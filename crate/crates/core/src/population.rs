use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Box constraints `[lb, ub]`, one interval per decision variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::config(
                "bounds",
                format!("lower has {} entries, upper has {}", lower.len(), upper.len()),
            ));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::config(
                "bounds",
                format!("lb[{j}] = {} is not below ub[{j}] = {}", lower[j], upper[j]),
            ));
        }
        Ok(Bounds { lower, upper })
    }

    /// The same interval in every dimension.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Bounds::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    #[inline]
    pub fn clamp(&self, j: usize, value: f64) -> f64 {
        value.clamp(self.lower[j], self.upper[j])
    }
}

/// Index of the smallest value, ties broken by lowest index. NaN never wins
/// against a number.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

/// NP decision vectors stored row-major, plus their fitness values.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    x: Array2<f64>,
    fitness: Vec<f64>,
    best: usize,
}

impl Population {
    pub fn new(x: Array2<f64>, fitness: Vec<f64>) -> Result<Self> {
        if x.nrows() != fitness.len() || x.nrows() == 0 {
            return Err(Error::config(
                "population",
                format!("{} rows but {} fitness values", x.nrows(), fitness.len()),
            ));
        }
        let best = argmin(&fitness);
        Ok(Population { x, fitness, best })
    }

    pub fn size(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn best_fitness(&self) -> f64 {
        self.fitness[self.best]
    }

    pub fn best_vector(&self) -> Vec<f64> {
        self.x.row(self.best).to_vec()
    }

    /// Indices sorted by ascending fitness, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size()).collect();
        order.sort_by(|&a, &b| self.fitness[a].total_cmp(&self.fitness[b]).then(a.cmp(&b)));
        order
    }

    /// One-to-one greedy replacement: row `i` takes trial `i` whenever
    /// `trial_fitness[i] <= fitness[i]`. Returns the number of replacements.
    pub fn select(&mut self, trials: ArrayView2<'_, f64>, trial_fitness: &[f64]) -> usize {
        assert_eq!(trials.dim(), self.x.dim(), "trial matrix shape");
        assert_eq!(trial_fitness.len(), self.size(), "trial fitness length");
        let mut replaced = 0;
        for i in 0..self.size() {
            if trial_fitness[i] <= self.fitness[i] {
                self.x.row_mut(i).assign(&trials.row(i));
                self.fitness[i] = trial_fitness[i];
                replaced += 1;
            }
        }
        self.best = argmin(&self.fitness);
        replaced
    }
}
