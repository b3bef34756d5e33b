//! Real-valued potentials: an integrable density sampled on the grid plus
//! finitely many Dirac atoms `(location, mass)`. Atoms are kept exact and
//! enter the solvers through jump conditions and rank-one terms; they are
//! never smeared onto the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

#[derive(Debug, Clone)]
pub struct Potential {
    /// Density samples on the grid (energy units).
    pub density: Vec<f64>,
    /// Dirac atoms as (location, mass), mass in energy * length.
    pub atoms: Vec<(f64, f64)>,
    pub label: String,
}

/// Norm diagnostics and membership flags for the admissible classes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialNorms {
    pub l1: f64,
    /// L2 norm of the density part only; atoms carry no L2 meaning.
    pub l2: f64,
    /// integral of (1 + x^2) |V|, atoms included.
    pub l1_weighted2: f64,
    pub in_l1_cap_l2: bool,
    pub in_m2: bool,
}

impl Potential {
    pub fn zero(grid: &SpatialGrid) -> Self {
        Self {
            density: vec![0.0; grid.n_points],
            atoms: Vec::new(),
            label: "zero".into(),
        }
    }

    pub fn from_density_fn(grid: &SpatialGrid, label: &str, f: impl Fn(f64) -> f64) -> Self {
        Self {
            density: (0..grid.n_points).map(|i| f(grid.point(i))).collect(),
            atoms: Vec::new(),
            label: label.into(),
        }
    }

    pub fn from_samples(
        grid: &SpatialGrid,
        label: &str,
        density: Vec<f64>,
        atoms: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if density.len() != grid.n_points {
            return Err(Error::Validation(format!(
                "density has {} samples for a grid of {}",
                density.len(),
                grid.n_points
            )));
        }
        if density.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("density contains non-finite samples".into()));
        }
        for &(loc, mass) in &atoms {
            if !loc.is_finite() || !mass.is_finite() {
                return Err(Error::Validation("atom with non-finite entries".into()));
            }
            if !grid.contains(loc) {
                return Err(Error::Validation(format!(
                    "atom at {loc} lies outside the grid [{}, {}]",
                    grid.x_min, grid.x_max
                )));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            density,
            atoms,
            label: label.into(),
        })
    }

    /// Built-in families.
    ///
    /// * `poschl_teller(s)`: density `-s sech^2 x`
    /// * `dirac(b)`: a single atom `(0, 2b)`
    /// * `gaussian_bump(amp, center, width)`: `amp exp(-(x-c)^2/(2 w^2))`
    /// * `square_well(depth, half_width)`: `-depth` on `|x| <= half_width`
    /// * `zero`
    pub fn builtin(name: &str, params: &[f64], grid: &SpatialGrid) -> Result<Self> {
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite parameter for potential family '{name}'"
            )));
        }
        match name {
            "zero" => Ok(Self::zero(grid)),
            "poschl_teller" => {
                let s = params.first().copied().unwrap_or(6.0);
                Ok(Self::from_density_fn(grid, &format!("poschl_teller({s})"), |x| {
                    let c = x.cosh();
                    -s / (c * c)
                }))
            }
            "dirac" => {
                let b = params.first().copied().unwrap_or(1.0);
                Self::from_samples(
                    grid,
                    &format!("dirac({b})"),
                    vec![0.0; grid.n_points],
                    vec![(0.0, 2.0 * b)],
                )
            }
            "gaussian_bump" => {
                let amp = params.first().copied().unwrap_or(1.0);
                let center = params.get(1).copied().unwrap_or(0.0);
                let width = params.get(2).copied().unwrap_or(1.0);
                if width <= 0.0 {
                    return Err(Error::Validation("gaussian_bump needs width > 0".into()));
                }
                Ok(Self::from_density_fn(
                    grid,
                    &format!("gaussian_bump({amp},{center},{width})"),
                    |x| amp * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
                ))
            }
            "square_well" => {
                let depth = params.first().copied().unwrap_or(1.0);
                let half_width = params.get(1).copied().unwrap_or(1.0);
                if half_width <= 0.0 {
                    return Err(Error::Validation("square_well needs half_width > 0".into()));
                }
                Ok(Self::from_density_fn(
                    grid,
                    &format!("square_well({depth},{half_width})"),
                    |x| if x.abs() <= half_width { -depth } else { 0.0 },
                ))
            }
            other => Err(Error::Config(format!("unknown potential family '{other}'"))),
        }
    }

    /// Sum of a few Gaussian bumps with seeded random parameters. Widths and
    /// amplitudes are kept moderate so the high-order solvers stay in their
    /// resolution regime on the default grid.
    pub fn random_bumps(grid: &SpatialGrid, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n_bumps = rng.gen_range(2..=4);
        let mut bumps = Vec::new();
        for _ in 0..n_bumps {
            let amp: f64 = rng.gen_range(0.3..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let center: f64 = rng.gen_range(-6.0..6.0);
            let width: f64 = rng.gen_range(1.5..3.0);
            bumps.push((amp, center, width));
        }
        Self::from_density_fn(grid, &format!("random_bumps(seed={seed})"), |x| {
            bumps
                .iter()
                .map(|&(a, c, w)| a * (-(x - c).powi(2) / (2.0 * w * w)).exp())
                .sum()
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            density: self.density.iter().map(|v| c * v).collect(),
            atoms: self.atoms.iter().map(|&(l, m)| (l, c * m)).collect(),
            label: format!("{} * {c}", self.label),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.iter().all(|&v| v == 0.0)
    }

    /// Quadrature norms and class flags.
    pub fn norms(&self, grid: &SpatialGrid) -> Result<PotentialNorms> {
        if self.density.len() != grid.n_points {
            return Err(Error::Usage("potential sampled on a different grid".into()));
        }
        for &(loc, _) in &self.atoms {
            if !grid.contains(loc) {
                return Err(Error::Validation(format!("atom at {loc} outside grid")));
            }
        }
        let h = grid.spacing();
        let mut l1 = 0.0;
        let mut l2sq = 0.0;
        let mut w2 = 0.0;
        for (i, &v) in self.density.iter().enumerate() {
            let x = grid.point(i);
            let w = if i == 0 || i == grid.n_points - 1 {
                0.5 * h
            } else {
                h
            };
            l1 += w * v.abs();
            l2sq += w * v * v;
            w2 += w * (1.0 + x * x) * v.abs();
        }
        for &(loc, mass) in &self.atoms {
            l1 += mass.abs();
            w2 += (1.0 + loc * loc) * mass.abs();
        }
        let finite_cap = 1e12;
        Ok(PotentialNorms {
            l1,
            l2: l2sq.sqrt(),
            l1_weighted2: w2,
            in_l1_cap_l2: l1 < finite_cap && l2sq.sqrt() < finite_cap,
            in_m2: w2 < finite_cap,
        })
    }

    /// Indices of grid points with non-negligible density.
    pub fn support_indices(&self, threshold: f64) -> Vec<usize> {
        self.density
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() > threshold)
            .map(|(i, _)| i)
            .collect()
    }
}
