//! Independent finite-difference reference: a dense (tridiagonal) symmetric
//! Hamiltonian, full eigendecomposition, band projections, resolvent solves
//! and a Crank-Nicolson stepper. Everything here is deliberately built from
//! different machinery than the spectral path so the two can referee each
//! other.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, WaveFunction};
use crate::linalg;
use crate::potential::Potential;

/// Second-order central-difference Hamiltonian with Dirichlet walls. The
/// matrix is symmetric tridiagonal: diagonal `2/h^2 + V_i`, off-diagonal
/// `-1/h^2`; atoms are added to the diagonal as `mass / h` at the nearest
/// node.
pub struct DenseHamiltonian {
    pub grid: SpatialGrid,
    pub diag: Vec<f64>,
    pub off: f64,
}

impl DenseHamiltonian {
    pub fn new(potential: &Potential, grid: &SpatialGrid) -> Result<Self> {
        if potential.density.len() != grid.n_points {
            return Err(Error::Usage("potential sampled on a different grid".into()));
        }
        let h = grid.spacing();
        let mut diag: Vec<f64> = potential
            .density
            .iter()
            .map(|&v| 2.0 / (h * h) + v)
            .collect();
        for &(pos, mass) in &potential.atoms {
            diag[grid.nearest_index(pos)] += mass / h;
        }
        Ok(Self {
            grid: *grid,
            diag,
            off: -1.0 / (h * h),
        })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin lower bound of the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        self.diag
            .iter()
            .map(|&d| d - 2.0 * self.off.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn norm_estimate(&self) -> f64 {
        self.diag
            .iter()
            .map(|&d| d.abs() + 2.0 * self.off.abs())
            .fold(0.0, f64::max)
    }

    /// `H v` for a complex vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off * v[i - 1];
                }
                if i < n - 1 {
                    acc += self.off * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// All eigenvalues, sorted ascending (implicit QL with shifts, O(n^2)).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = vec![self.off; self.n()];
        e[self.n() - 1] = 0.0;
        tqli_eigenvalues(&mut d, &mut e)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenpairs with eigenvalues in `[lo, hi]`, orthonormalized in the
    /// h-weighted discrete inner product.
    pub fn eigenpairs_in(&self, lo: f64, hi: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let evs = self.eigenvalues()?;
        let h = self.grid.spacing();
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        for &ev in evs.iter().filter(|&&ev| ev >= lo && ev <= hi) {
            let mut v = self.inverse_iteration(ev)?;
            // re-orthogonalize against earlier vectors (clustered levels)
            for (_, u) in &out {
                let ip: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() * h;
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= ip * ui;
                }
            }
            let nrm = (v.iter().map(|a| a * a).sum::<f64>() * h).sqrt();
            if nrm < 1e-8 {
                return Err(Error::OracleFailure(format!(
                    "inverse iteration collapsed at eigenvalue {ev}"
                )));
            }
            for vi in &mut v {
                *vi /= nrm;
            }
            out.push((ev, v));
        }
        Ok(out)
    }

    /// Negative-eigenvalue pairs (bound states of the discrete operator).
    pub fn negative_eigenpairs(&self) -> Result<Vec<(f64, Vec<f64>)>> {
        self.eigenpairs_in(self.gershgorin_lower() - 1.0, -1e-10)
    }

    fn inverse_iteration(&self, ev: f64) -> Result<Vec<f64>> {
        let n = self.n();
        let shift = ev + 1e-11 * self.norm_estimate().max(1.0) * 1e-3;
        let mut v: Vec<f64> = (0..n)
            .map(|i| ((i * 2654435761 + 12345) % 1000) as f64 / 1000.0 - 0.5)
            .collect();
        let mut lam = ev;
        for it in 0..6 {
            let w = solve_shifted_tridiag(&self.diag, self.off, shift, &v)?;
            let nrm = (w.iter().map(|a| a * a).sum::<f64>()).sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::OracleFailure("inverse iteration diverged".into()));
            }
            v = w.into_iter().map(|a| a / nrm).collect();
            // Rayleigh quotient for the residual stop
            let hv = self.apply_real(&v);
            lam = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>();
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(h, u)| (h - lam * u) * (h - lam * u))
                .sum::<f64>()
                .sqrt();
            if res <= 1e-9 * self.norm_estimate() && it >= 1 {
                break;
            }
        }
        let _ = lam;
        Ok(v)
    }

    fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off * v[i - 1];
                }
                if i < n - 1 {
                    acc += self.off * v[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// Full eigendecomposition (all eigenvalues, all eigenvectors). Quadratic
/// memory; intended for moderate n.
pub fn fd_eigensolve(ham: &DenseHamiltonian) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if ham.n() > 8192 {
        return Err(Error::Validation("fd_eigensolve limited to n <= 8192".into()));
    }
    let evs = ham.eigenvalues()?;
    let pairs = ham.eigenpairs_in(f64::NEG_INFINITY, f64::INFINITY)?;
    let vecs = pairs.into_iter().map(|(_, v)| v).collect();
    Ok((evs, vecs))
}

/// Spectral projection onto `band = [lo, hi]` by summing eigenpairs.
pub fn fd_projection(
    ham: &DenseHamiltonian,
    f: &WaveFunction,
    band: (f64, f64),
) -> Result<WaveFunction> {
    let h = ham.grid.spacing();
    let pairs = ham.eigenpairs_in(band.0, band.1)?;
    let mut out = vec![Complex64::ZERO; ham.n()];
    for (_, v) in &pairs {
        let coef: Complex64 = f
            .samples
            .iter()
            .zip(v)
            .map(|(fi, &vi)| fi * vi)
            .sum::<Complex64>()
            * h;
        for (o, &vi) in out.iter_mut().zip(v) {
            *o += coef * vi;
        }
    }
    WaveFunction::new(out, ham.grid)
}

/// Direct solve of `(H - zeta) g = f`.
pub fn fd_resolvent(
    ham: &DenseHamiltonian,
    zeta: Complex64,
    f: &WaveFunction,
) -> Result<WaveFunction> {
    let n = ham.n();
    let diag: Vec<Complex64> = ham
        .diag
        .iter()
        .map(|&d| Complex64::new(d, 0.0) - zeta)
        .collect();
    let off = vec![Complex64::new(ham.off, 0.0); n - 1];
    let g = linalg::tridiag_solve(&diag, &off, &off, &f.samples)?;
    WaveFunction::new(g, ham.grid)
}

/// Crank-Nicolson propagation to time `t` in `steps` steps.
pub fn crank_nicolson(
    ham: &DenseHamiltonian,
    phi0: &WaveFunction,
    t: f64,
    steps: usize,
) -> Result<WaveFunction> {
    let n = ham.n();
    let dt = t / steps as f64;
    let half = Complex64::new(0.0, 0.5 * dt);
    let diag_p: Vec<Complex64> = ham.diag.iter().map(|&d| 1.0 + half * d).collect();
    let off_p = vec![half * ham.off; n - 1];
    let mut psi = phi0.samples.clone();
    for _ in 0..steps {
        // rhs = (I - i dt/2 H) psi
        let mut rhs = vec![Complex64::ZERO; n];
        for i in 0..n {
            let mut acc = (1.0 - half * ham.diag[i]) * psi[i];
            if i > 0 {
                acc -= half * ham.off * psi[i - 1];
            }
            if i < n - 1 {
                acc -= half * ham.off * psi[i + 1];
            }
            rhs[i] = acc;
        }
        psi = linalg::tridiag_solve(&diag_p, &off_p, &off_p, &rhs)?;
    }
    WaveFunction::new(psi, ham.grid)
}

/// Fourth-order finite-difference application of `H = -d^2/dx^2 + V`
/// (density part only; callers mask near atoms).
pub fn apply_h_fd4(potential: &Potential, f: &WaveFunction) -> WaveFunction {
    let n = f.grid.n_points;
    let h2 = f.grid.spacing() * f.grid.spacing();
    let s = &f.samples;
    let mut out = vec![Complex64::ZERO; n];
    for i in 0..n {
        let lap = if i >= 2 && i + 2 < n {
            (-s[i - 2] + 16.0 * s[i - 1] - 30.0 * s[i] + 16.0 * s[i + 1] - s[i + 2]) / (12.0 * h2)
        } else if i >= 1 && i + 1 < n {
            (s[i - 1] - 2.0 * s[i] + s[i + 1]) / h2
        } else {
            Complex64::ZERO
        };
        out[i] = -lap + potential.density[i] * s[i];
    }
    WaveFunction {
        samples: out,
        grid: f.grid,
    }
}

/// Discrete quadratic form `<H f, f>`: FD gradient energy plus the potential
/// terms, atoms included.
pub fn energy_form(potential: &Potential, f: &WaveFunction) -> f64 {
    let n = f.grid.n_points;
    let h = f.grid.spacing();
    let mut kinetic = 0.0;
    for i in 0..n - 1 {
        let d = (f.samples[i + 1] - f.samples[i]) / h;
        kinetic += d.norm_sqr() * h;
    }
    let mut pot = 0.0;
    for i in 0..n {
        pot += potential.density[i] * f.samples[i].norm_sqr() * h;
    }
    for &(ppos, mass) in &potential.atoms {
        let idx = f.grid.nearest_index(ppos);
        pot += mass * f.samples[idx].norm_sqr();
    }
    kinetic + pot
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `d` holds the diagonal, `e[i]` the coupling between rows i and i+1
/// (`e[n-1]` ignored). On return `d` holds the eigenvalues, unsorted.
fn tqli_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::OracleFailure(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut i = m;
            while i > l {
                let i1 = i - 1;
                let f = s * e[i1];
                let b = c * e[i1];
                r = f.hypot(g);
                e[i] = r;
                if r == 0.0 {
                    d[i] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i] - p;
                r = (d[i1] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i] = g + p;
                g = c * r - b;
                i -= 1;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Shifted tridiagonal solve `(T - shift) x = b` with partial pivoting
/// (the shift sits near an eigenvalue during inverse iteration).
fn solve_shifted_tridiag(diag: &[f64], off: f64, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    // banded storage: rows of [lower, diag, upper, fill]
    let mut dl = vec![off; n];
    let mut dm: Vec<f64> = diag.iter().map(|&d| d - shift).collect();
    let mut du = vec![off; n];
    let mut du2 = vec![0.0f64; n];
    dl[0] = 0.0;
    du[n - 1] = 0.0;
    let mut x = b.to_vec();
    let mut perm = vec![false; n];
    for k in 0..n - 1 {
        if dm[k].abs() >= dl[k + 1].abs() {
            if dm[k] == 0.0 {
                dm[k] = 1e-300;
            }
            let m = dl[k + 1] / dm[k];
            dm[k + 1] -= m * du[k];
            x[k + 1] -= m * x[k];
            dl[k + 1] = 0.0;
        } else {
            perm[k] = true;
            let m = dm[k] / dl[k + 1];
            dm[k] = dl[k + 1];
            let tmp = dm[k + 1];
            dm[k + 1] = du[k] - m * tmp;
            du2[k] = du[k + 1];
            du[k] = tmp;
            du[k + 1] = -m * du2[k];
            x.swap(k, k + 1);
            x[k + 1] -= m * x[k];
        }
    }
    if dm[n - 1] == 0.0 {
        dm[n - 1] = 1e-300;
    }
    x[n - 1] /= dm[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dm[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        x[k] = (x[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / dm[k];
    }
    Ok(x)
}
