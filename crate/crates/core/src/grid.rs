use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Uniform truncation of the real line. All quadratures and samplings in the
/// crate live on one of these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Validation("grid bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::Validation(format!(
                "grid requires x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 16 {
            return Err(Error::Validation(format!(
                "grid requires n_points >= 16, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Default desk-scale truncation: [-40, 40] with 4096 points.
    pub fn default_box() -> Self {
        Self {
            x_min: -40.0,
            x_max: 40.0,
            n_points: 4096,
        }
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.spacing()).round() as isize;
        i.clamp(0, self.n_points as isize - 1) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Fourth-order end-corrected quadrature weights for this grid.
    pub fn weights(&self) -> Vec<f64> {
        quad::gregory_weights(self.n_points, self.spacing())
    }
}

/// Complex state sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub samples: Vec<Complex64>,
    pub grid: SpatialGrid,
}

impl WaveFunction {
    pub fn new(samples: Vec<Complex64>, grid: SpatialGrid) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::Usage(format!(
                "wavefunction has {} samples for a grid of {} points",
                samples.len(),
                grid.n_points
            )));
        }
        Ok(Self { samples, grid })
    }

    pub fn zero(grid: SpatialGrid) -> Self {
        Self {
            samples: vec![Complex64::ZERO; grid.n_points],
            grid,
        }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            samples: (0..grid.n_points).map(|i| f(grid.point(i))).collect(),
            grid,
        }
    }

    /// Gaussian wave packet `exp(-(x-x0)^2/(2 sigma^2) + i k0 (x-x0))`,
    /// L2-normalized on the grid.
    pub fn gaussian_packet(grid: SpatialGrid, x0: f64, sigma: f64, k0: f64) -> Self {
        let mut wf = Self::from_fn(grid, |x| {
            let u = x - x0;
            Complex64::new(-u * u / (2.0 * sigma * sigma), k0 * u).exp()
        });
        let n = wf.norm();
        if n > 0.0 {
            wf.scale(Complex64::new(1.0 / n, 0.0));
        }
        wf
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// L2 inner product <self, other> = integral self * conj(other).
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let w = self.grid.weights();
        self.samples
            .iter()
            .zip(&other.samples)
            .zip(&w)
            .map(|((a, b), wi)| a * b.conj() * wi)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.weights();
        self.samples
            .iter()
            .zip(&w)
            .map(|(a, wi)| a.norm_sqr() * wi)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, c: Complex64) {
        for s in &mut self.samples {
            *s *= c;
        }
    }

    pub fn add_scaled(&mut self, other: &WaveFunction, c: Complex64) {
        for (s, o) in self.samples.iter_mut().zip(&other.samples) {
            *s += c * o;
        }
    }

    pub fn sub(&self, other: &WaveFunction) -> WaveFunction {
        WaveFunction {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
            grid: self.grid,
        }
    }

    /// Spatial center of mass of |psi|^2.
    pub fn center_of_mass(&self) -> f64 {
        let w = self.grid.weights();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (s, wi)) in self.samples.iter().zip(&w).enumerate() {
            let p = s.norm_sqr() * wi;
            num += self.grid.point(i) * p;
            den += p;
        }
        num / den
    }

    pub fn same_grid(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Usage("wavefunctions live on different grids".into()));
        }
        Ok(())
    }
}
