//! Online Kohonen self-organizing map on a rectangular grid.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagefeat::euclidean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub grid_w: usize,
    pub grid_h: usize,
    pub dim: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub lr_final: f64,
    pub nbhd0: f64,
    pub nbhd_final: f64,
    pub seed: u64,
}

impl SomConfig {
    /// Default schedule: 50 epochs, learning rate 0.5 -> 0.01, neighborhood
    /// max(grid)/2 -> 0.5.
    pub fn new(grid_w: usize, grid_h: usize, dim: usize, seed: u64) -> Self {
        SomConfig {
            grid_w,
            grid_h,
            dim,
            epochs: 50,
            lr0: 0.5,
            lr_final: 0.01,
            nbhd0: grid_w.max(grid_h) as f64 / 2.0,
            nbhd_final: 0.5,
            seed,
        }
    }

    pub fn units(&self) -> usize {
        self.grid_w * self.grid_h
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_w * self.grid_h < 4 {
            return Err(Error::invalid("SOM grid needs at least 4 units"));
        }
        if self.dim == 0 || self.epochs == 0 {
            return Err(Error::invalid("SOM dim and epochs must be positive"));
        }
        if !(self.lr0 > 0.0 && self.lr0 <= 1.0 && self.lr_final > 0.0 && self.lr_final <= self.lr0) {
            return Err(Error::invalid("SOM learning rates must satisfy 0 < lr_final <= lr0 <= 1"));
        }
        if !(self.nbhd_final >= 0.0 && self.nbhd_final <= self.nbhd0) {
            return Err(Error::invalid("SOM neighborhood must satisfy 0 <= nbhd_final <= nbhd0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Som {
    pub config: SomConfig,
    /// Row-major `grid_h x grid_w` units, each `dim` values.
    pub weights: Vec<f64>,
    pub trained_samples: usize,
    pub initial_qe: f64,
    pub final_qe: f64,
}

/// `a * (b / a)^frac`, with `b` floored so that a zero endpoint stays usable.
fn exp_decay(a: f64, b: f64, frac: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let b = b.max(a * 1e-3);
    a * (b / a).powf(frac)
}

fn check_samples(samples: &[Vec<f64>], dim: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::invalid(format!("sample length {} != dim {dim}", bad.len())));
    }
    Ok(())
}

impl Som {
    /// Weights drawn uniformly inside the per-dimension bounding box of
    /// `samples`.
    pub fn initialize(samples: &[Vec<f64>], config: &SomConfig) -> Result<Som> {
        config.validate()?;
        check_samples(samples, config.dim)?;
        let mut lo = samples[0].clone();
        let mut hi = samples[0].clone();
        for s in samples {
            for d in 0..config.dim {
                lo[d] = lo[d].min(s[d]);
                hi[d] = hi[d].max(s[d]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut weights = Vec::with_capacity(config.units() * config.dim);
        for _ in 0..config.units() {
            for d in 0..config.dim {
                let t: f64 = rng.gen();
                weights.push(lo[d] + t * (hi[d] - lo[d]));
            }
        }
        Ok(Som { config: config.clone(), weights, trained_samples: 0, initial_qe: 0.0, final_qe: 0.0 })
    }

    pub fn train(samples: &[Vec<f64>], config: &SomConfig) -> Result<Som> {
        let mut som = Som::initialize(samples, config)?;
        som.initial_qe = som.quantization_error(samples)?;
        // Separate stream so initialization and ordering don't interfere.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
        let total = config.epochs * samples.len();
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut step = 0usize;
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let frac = if total > 1 { step as f64 / (total - 1) as f64 } else { 0.0 };
                let lr = exp_decay(config.lr0, config.lr_final, frac);
                let radius = exp_decay(config.nbhd0, config.nbhd_final, frac);
                som.update(&samples[i], lr, radius);
                step += 1;
            }
        }
        som.trained_samples = samples.len();
        som.final_qe = som.quantization_error(samples)?;
        Ok(som)
    }

    fn update(&mut self, x: &[f64], lr: f64, radius: f64) {
        let (b, _) = self.bmu_unchecked(x);
        let (bx, by) = self.coords(b);
        let dim = self.config.dim;
        let two_r2 = 2.0 * radius * radius;
        for u in 0..self.units() {
            let (ux, uy) = self.coords(u);
            let dx = ux as f64 - bx as f64;
            let dy = uy as f64 - by as f64;
            let d2 = dx * dx + dy * dy;
            let h = if two_r2 > 0.0 {
                (-d2 / two_r2).exp()
            } else if u == b {
                1.0
            } else {
                0.0
            };
            let g = lr * h;
            if g < 1e-12 {
                continue;
            }
            let w = &mut self.weights[u * dim..(u + 1) * dim];
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += g * (xi - *wi);
            }
        }
    }

    pub fn units(&self) -> usize {
        self.config.units()
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn weight(&self, unit: usize) -> &[f64] {
        let d = self.config.dim;
        &self.weights[unit * d..(unit + 1) * d]
    }

    /// Grid position (column, row) of a unit.
    pub fn coords(&self, unit: usize) -> (usize, usize) {
        (unit % self.config.grid_w, unit / self.config.grid_w)
    }

    /// Chebyshev distance between two units on the grid.
    pub fn grid_distance(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        ax.abs_diff(bx).max(ay.abs_diff(by))
    }

    /// Largest Chebyshev distance on the grid.
    pub fn diameter(&self) -> usize {
        self.config.grid_w.max(self.config.grid_h) - 1
    }

    fn bmu_unchecked(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for u in 0..self.units() {
            let d = euclidean(self.weight(u), x);
            if d < best.1 {
                best = (u, d);
            }
        }
        best
    }

    /// Best-matching unit and its Euclidean distance; ties go to the lowest
    /// unit index.
    pub fn bmu(&self, x: &[f64]) -> Result<(usize, f64)> {
        if x.len() != self.config.dim {
            return Err(Error::invalid(format!("query length {} != dim {}", x.len(), self.config.dim)));
        }
        Ok(self.bmu_unchecked(x))
    }

    /// Units within Chebyshev distance `radius` of `unit`, ordered by
    /// (distance, index).
    pub fn neighborhood(&self, unit: usize, radius: usize) -> Result<Vec<usize>> {
        if unit >= self.units() {
            return Err(Error::invalid(format!("unit {unit} out of range")));
        }
        let (cx, cy) = self.coords(unit);
        let x0 = cx.saturating_sub(radius);
        let y0 = cy.saturating_sub(radius);
        let x1 = (cx + radius).min(self.config.grid_w - 1);
        let y1 = (cy + radius).min(self.config.grid_h - 1);
        let mut out: Vec<(usize, usize)> = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let u = y * self.config.grid_w + x;
                out.push((self.grid_distance(unit, u), u));
            }
        }
        out.sort_unstable();
        Ok(out.into_iter().map(|(_, u)| u).collect())
    }

    pub fn quantization_error(&self, samples: &[Vec<f64>]) -> Result<f64> {
        check_samples(samples, self.config.dim)?;
        Ok(samples.iter().map(|s| self.bmu_unchecked(s).1).sum::<f64>() / samples.len() as f64)
    }
}
