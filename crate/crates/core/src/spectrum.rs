//! Bound states as zeros of `alpha(i kappa)` on the positive imaginary
//! axis, the exceptional-frequency scan, and the continuous spectral
//! density kernel.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, WaveFunction};
use crate::jost::{self, Frequency, Side};
use crate::lippmann;
use crate::oracle;
use crate::potential::Potential;
use crate::scattering;

/// Mesh size of the kappa scan used to bracket the zeros of alpha.
const KAPPA_MESH: usize = 400;
const KAPPA_MIN: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct BoundState {
    /// Zero of alpha at `z = i kappa`.
    pub kappa: f64,
    /// Eigenvalue `-kappa^2`.
    pub lambda: f64,
    /// L2-normalized eigenfunction, real-valued samples with the phase fixed
    /// positive at the maximum-modulus point.
    pub eigenfunction: WaveFunction,
    /// Relative finite-difference residual of `(H - lambda) u`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExceptionalFlag {
    pub k: f64,
    pub condition: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumData {
    pub bound_states: Vec<BoundState>,
    pub exceptional: Vec<ExceptionalFlag>,
    pub notes: String,
}

/// All zeros of `kappa -> alpha(i kappa)` on `(KAPPA_MIN, kappa_max]`,
/// bracketed on a mesh and refined by bisection + secant, each converted to
/// a normalized eigenfunction built from `J^+_{i kappa}`.
pub fn bound_states(
    potential: &Potential,
    grid: &SpatialGrid,
    kappa_max: f64,
) -> Result<Vec<BoundState>> {
    if kappa_max <= 0.0 {
        return Err(Error::Validation("kappa_max must be positive".into()));
    }
    if potential.is_zero() {
        return Ok(Vec::new());
    }
    let alpha = |kappa: f64| -> Result<f64> { jost::alpha_on_imaginary_axis(potential, kappa, grid) };

    let mesh: Vec<f64> = (0..=KAPPA_MESH)
        .map(|i| KAPPA_MIN + (kappa_max - KAPPA_MIN) * i as f64 / KAPPA_MESH as f64)
        .collect();
    let values: Result<Vec<f64>> = mesh.par_iter().map(|&k| alpha(k)).collect();
    let values = values?;

    let mut roots = Vec::new();
    for i in 0..KAPPA_MESH {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(mesh[i]);
            continue;
        }
        if a * b < 0.0 {
            // bisect, then a few secant steps
            let (mut lo, mut hi) = (mesh[i], mesh[i + 1]);
            let (mut fa, mut fb) = (a, b);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let fm = alpha(mid)?;
                if fa * fm <= 0.0 {
                    hi = mid;
                    fb = fm;
                } else {
                    lo = mid;
                    fa = fm;
                }
                if hi - lo < 1e-12 * kappa_max.max(1.0) {
                    break;
                }
            }
            let mut x0 = lo;
            let mut x1 = hi;
            let mut f0 = fa;
            let mut f1 = fb;
            for _ in 0..4 {
                if (f1 - f0).abs() < 1e-300 {
                    break;
                }
                let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
                if !x2.is_finite() || x2 <= KAPPA_MIN || x2 > kappa_max {
                    break;
                }
                let f2 = alpha(x2)?;
                x0 = x1;
                f0 = f1;
                x1 = x2;
                f1 = f2;
                if f1.abs() < 1e-14 {
                    break;
                }
            }
            roots.push(x1);
        }
    }

    let mut out = Vec::new();
    for kappa in roots {
        out.push(build_bound_state(potential, grid, kappa)?);
    }
    // sorted by ascending eigenvalue = descending kappa
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

fn build_bound_state(
    potential: &Potential,
    grid: &SpatialGrid,
    kappa: f64,
) -> Result<BoundState> {
    // Glue J^+ (clean decay on the right) to J^- (clean decay on the left).
    // The one-sided solution alone is unusable: alpha is only zero to root
    // tolerance, and the residual admixture of the growing mode gets
    // amplified by e^{kappa |x|} across the box.
    let z = Frequency::imaginary(kappa)?;
    let plus = jost::jost_solve(potential, z, Side::Plus, grid)?;
    let minus = jost::jost_solve(potential, z, Side::Minus, grid)?;
    let jp = plus.jost_samples();
    let jm = minus.jost_samples();

    // match around the |V|-weighted centroid, least squares over a window
    // so nodes of the eigenfunction cannot poison the scale
    let mut wsum = 0.0;
    let mut xsum = 0.0;
    for (i, &rho) in potential.density.iter().enumerate() {
        wsum += rho.abs();
        xsum += rho.abs() * grid.point(i);
    }
    for &(pos, mass) in &potential.atoms {
        wsum += mass.abs() / grid.spacing();
        xsum += mass.abs() / grid.spacing() * pos;
    }
    let center = if wsum > 0.0 { xsum / wsum } else { 0.0 };
    let ic = grid.nearest_index(center);
    let half_window = 32.min(grid.n_points / 4);
    let lo = ic.saturating_sub(half_window);
    let hi = (ic + half_window).min(grid.n_points - 1);
    let mut num = Complex64::ZERO;
    let mut den = 0.0;
    for i in lo..=hi {
        num += jp[i] * jm[i].conj();
        den += jm[i].norm_sqr();
    }
    if den == 0.0 || num.norm() == 0.0 {
        return Err(Error::SolverFailure(format!(
            "bound-state match failed at kappa = {kappa}"
        )));
    }
    let scale = num / den;
    let raw: Vec<Complex64> = (0..grid.n_points)
        .map(|i| if i < ic { scale * jm[i] } else { jp[i] })
        .collect();
    let mut wf = WaveFunction::new(raw, *grid)?;
    let nrm = wf.norm();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::SolverFailure(format!(
            "bound-state candidate at kappa = {kappa} produced a degenerate function"
        )));
    }
    wf.scale(Complex64::new(1.0 / nrm, 0.0));
    // phase convention: real and positive at the maximum-modulus point
    let imax = (0..wf.len())
        .max_by(|&i, &j| wf.samples[i].norm().total_cmp(&wf.samples[j].norm()))
        .unwrap();
    let phase = wf.samples[imax] / wf.samples[imax].norm();
    wf.scale(phase.conj());

    let lambda = -kappa * kappa;
    let residual = eigen_residual(potential, &wf, lambda);
    Ok(BoundState {
        kappa,
        lambda,
        eigenfunction: wf,
        residual,
    })
}

/// `||(H - lambda) u|| / ||u||` by fourth-order finite differences, skipping
/// a neighborhood of each atom where the derivative jumps.
pub fn eigen_residual(potential: &Potential, u: &WaveFunction, lambda: f64) -> f64 {
    let hu = oracle::apply_h_fd4(potential, u);
    let grid = &u.grid;
    let h = grid.spacing();
    let mut num = 0.0;
    let mut den = 0.0;
    'pts: for i in 2..grid.n_points - 2 {
        let x = grid.point(i);
        for &(pos, _) in &potential.atoms {
            if (x - pos).abs() < 3.5 * h {
                continue 'pts;
            }
        }
        num += (hu.samples[i] - lambda * u.samples[i]).norm_sqr() * h;
        den += u.samples[i].norm_sqr() * h;
    }
    (num / den.max(1e-300)).sqrt()
}

/// Condition-number scan of the discretized `I + T(k)`.
pub fn exceptional_scan(
    potential: &Potential,
    k_grid: &[f64],
    grid: &SpatialGrid,
) -> Result<Vec<ExceptionalFlag>> {
    k_grid
        .par_iter()
        .map(|&k| {
            let condition = lippmann::condition_at(potential, k, grid)?;
            Ok(ExceptionalFlag {
                k,
                condition,
                flagged: condition > lippmann::COND_THRESHOLD,
            })
        })
        .collect()
}

/// Full spectrum report.
pub fn spectrum_data(
    potential: &Potential,
    grid: &SpatialGrid,
    kappa_max: f64,
    k_grid: &[f64],
) -> Result<SpectrumData> {
    let bound = bound_states(potential, grid, kappa_max)?;
    let exceptional = exceptional_scan(potential, k_grid, grid)?;
    let notes = format!(
        "{} bound state(s); {} exceptional flag(s) on {} scanned frequencies",
        bound.len(),
        exceptional.iter().filter(|f| f.flagged).count(),
        exceptional.len()
    );
    Ok(SpectrumData {
        bound_states: bound,
        exceptional,
        notes,
    })
}

/// Spectral density kernel of the absolutely continuous part,
/// `p(x, y, lambda) = Re(phi_k^+(y) phi_k^-(x) / (k t_k)) / (2 pi)` with
/// `k = sqrt(lambda)`.
pub fn spectral_density(
    potential: &Potential,
    x: f64,
    y: f64,
    lambda: f64,
    grid: &SpatialGrid,
) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Domain("spectral density needs lambda > 0".into()));
    }
    let k = lambda.sqrt();
    let phi_p = scattering::scattering_solution(potential, Frequency::real(k)?, Side::Plus, grid)?;
    let phi_m = scattering::scattering_solution(potential, Frequency::real(k)?, Side::Minus, grid)?;
    let coeffs = jost::jost_coefficients(potential, Frequency::real(k)?, grid)?;
    let t = coeffs.alpha.inv();
    let val = phi_p.eval(y) * phi_m.eval(x) / (k * t);
    Ok(val.re / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> SpatialGrid {
        SpatialGrid::default_box()
    }

    #[test]
    fn poschl_teller_bound_states() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let bs = bound_states(&v, &g, 6.0).unwrap();
        assert_eq!(bs.len(), 2);
        assert_abs_diff_eq!(bs[0].lambda, -4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(bs[1].lambda, -1.0, epsilon = 1e-6);
        for b in &bs {
            assert!((b.eigenfunction.norm() - 1.0).abs() < 1e-10);
            assert!(b.residual < 1e-4, "residual {:.3e}", b.residual);
            let a = jost::alpha_on_imaginary_axis(&v, b.kappa, &g).unwrap();
            assert!(a.abs() < 1e-9, "alpha at root {a:.3e}");
        }
        // closed forms: lambda=-4 state is sech^2/norm; lambda=-1 is sech*tanh
        let b0 = &bs[0];
        let i = g.nearest_index(0.7);
        let x = g.point(i);
        let expected = |x: f64| {
            let s = 1.0 / x.cosh();
            s * s
        };
        let ratio = b0.eigenfunction.samples[i].re / expected(x);
        let j = g.nearest_index(1.3);
        let ratio2 = b0.eigenfunction.samples[j].re / expected(g.point(j));
        assert_abs_diff_eq!(ratio, ratio2, epsilon = 1e-7 * ratio.abs());
    }

    #[test]
    fn dirac_well_bound_state() {
        let g = grid();
        let v = Potential::builtin("dirac", &[-1.0], &g).unwrap();
        let bs = bound_states(&v, &g, 4.0).unwrap();
        assert_eq!(bs.len(), 1);
        assert_abs_diff_eq!(bs[0].lambda, -1.0, epsilon = 1e-10);
        // eigenfunction proportional to e^{-|x|}; compare against the same
        // grid-quadrature normalization (the kink at the atom biases the
        // continuum normalization at the h^2 level)
        let reference = WaveFunction::from_fn(g, |x| Complex64::new((-x.abs()).exp(), 0.0));
        let rnorm = reference.norm();
        for &xt in &[0.5, -1.5, 3.0] {
            let i = g.nearest_index(xt);
            let x = g.point(i);
            let expected = (-x.abs()).exp() / rnorm;
            assert_abs_diff_eq!(bs[0].eigenfunction.samples[i].re, expected, epsilon = 1e-10);
        }
        assert!(bs[0].residual < 1e-4);
    }

    #[test]
    fn zero_potential_has_no_bound_states() {
        let g = grid();
        let v = Potential::zero(&g);
        assert!(bound_states(&v, &g, 4.0).unwrap().is_empty());
        // and a repulsive bump has none either
        let v = Potential::builtin("gaussian_bump", &[1.0, 0.0, 1.0], &g).unwrap();
        assert!(bound_states(&v, &g, 4.0).unwrap().is_empty());
    }

    #[test]
    fn eigenvalue_count_matches_oracle() {
        let g = grid();
        for (name, params) in [
            ("poschl_teller", vec![6.0]),
            ("dirac", vec![-1.0]),
            ("gaussian_bump", vec![-1.5, 0.0, 1.5]),
            ("zero", vec![]),
        ] {
            let v = Potential::builtin(name, &params, &g).unwrap();
            let bs = bound_states(&v, &g, 6.0).unwrap();
            let ham = oracle::DenseHamiltonian::new(&v, &g).unwrap();
            let fd = ham.negative_eigenpairs().unwrap();
            assert_eq!(bs.len(), fd.len(), "{name}: count mismatch");
            for (b, (ev, _)) in bs.iter().zip(&fd) {
                // atom discretization in the oracle is first order
                let tol = if v.atoms.is_empty() { 2e-3 } else { 5e-2 };
                assert!(
                    (b.lambda - ev).abs() < tol * ev.abs().max(1.0),
                    "{name}: {} vs oracle {}",
                    b.lambda,
                    ev
                );
            }
        }
    }

    #[test]
    fn bound_eigenfunctions_are_orthogonal() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let bs = bound_states(&v, &g, 6.0).unwrap();
        let ip = bs[0].eigenfunction.inner(&bs[1].eigenfunction);
        assert!(ip.norm() < 1e-8, "overlap {:.3e}", ip.norm());
    }

    #[test]
    fn exceptional_scan_values() {
        let g = grid();
        let v = Potential::zero(&g);
        let flags = exceptional_scan(&v, &[0.5, 1.0], &g).unwrap();
        for f in &flags {
            assert!((f.condition - 1.0).abs() < 1e-10);
            assert!(!f.flagged);
        }
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let ks: Vec<f64> = (0..25).map(|i| 0.2 + i as f64 * 0.2).collect();
        let flags = exceptional_scan(&v, &ks, &g).unwrap();
        assert!(flags.iter().all(|f| !f.flagged));
        let v = Potential::builtin("dirac", &[1.0], &g).unwrap();
        let flags = exceptional_scan(&v, &[0.3, 1.0, 4.0], &g).unwrap();
        assert!(flags.iter().all(|f| f.condition.is_finite() && f.condition < 1e3));
    }

    #[test]
    fn spectral_density_zero_potential() {
        let g = grid();
        let v = Potential::zero(&g);
        for &(x, y, lam) in &[(0.0, 0.0, 1.0), (1.0, -0.5, 2.0), (2.0, 2.5, 0.5)] {
            let p = spectral_density(&v, x, y, lam, &g).unwrap();
            let k = lam.sqrt();
            let expected = (k * (x - y)).cos() / (2.0 * std::f64::consts::PI * k);
            assert_abs_diff_eq!(p, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn spectral_density_symmetry() {
        let g = grid();
        for v in [
            Potential::builtin("poschl_teller", &[6.0], &g).unwrap(),
            Potential::builtin("gaussian_bump", &[1.0, 0.4, 1.2], &g).unwrap(),
            Potential::builtin("dirac", &[1.0], &g).unwrap(),
        ] {
            let a = spectral_density(&v, 1.0, -0.5, 2.0, &g).unwrap();
            let b = spectral_density(&v, -0.5, 1.0, 2.0, &g).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn spectral_density_matches_oracle_window() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let lambda = 1.0;
        let p = spectral_density(&v, 0.0, 0.0, lambda, &g).unwrap();
        // oracle: Gaussian-windowed local density of states at x = y = 0.
        // The same window is applied to the spectral-route density so the
        // smoothing bias cancels and only genuine disagreement remains.
        let ham = oracle::DenseHamiltonian::new(&v, &g).unwrap();
        let s = 0.2; // window stays inside the positive spectrum
        let pairs = ham.eigenpairs_in(lambda - 4.0 * s, lambda + 4.0 * s).unwrap();
        let i0 = g.nearest_index(0.0);
        let x0 = g.point(i0);
        let gauss = |u: f64| (-u * u / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let mut acc = 0.0;
        for (ev, vv) in &pairs {
            acc += gauss(ev - lambda) * vv[i0] * vv[i0];
        }
        let mut smoothed = 0.0;
        let m = 33;
        let dl = 8.0 * s / (m - 1) as f64;
        for j in 0..m {
            let lj = lambda - 4.0 * s + j as f64 * dl;
            let w = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            smoothed += w * dl * gauss(lj - lambda) * spectral_density(&v, x0, x0, lj, &g).unwrap();
        }
        let rel = (acc - smoothed).abs() / smoothed.abs();
        assert!(
            rel < 1e-2,
            "windowed density {smoothed:.6e} vs oracle {acc:.6e} ({rel:.3e}); raw point value {p:.6e}"
        );
    }
}
