//! Green's functions, resolvent application, and the Nystrom solver for the
//! modified Lippmann-Schwinger equation
//!
//! ```text
//!   psi(x) = |V(x)|^{1/2} e^{ix xi}
//!            + (2i|xi|)^{-1} int |V(x)|^{1/2} e^{i|xi||x-y|} V^{1/2}(y) psi(y) dy
//! ```
//!
//! discretized on the support of `V` with kink-split fourth-order row
//! weights, then solved densely with pivoted elimination. The continuum
//! eigenfunction is reconstructed on the full grid from the node solution.
//! Atoms enter as exact rank-one terms with weight equal to their mass.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, WaveFunction};
use crate::jost::{self, Frequency, Side};
use crate::linalg::LuFactors;
use crate::potential::Potential;
use crate::quad;

/// Density samples below this are not Nystrom nodes.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Condition estimates above this flag the frequency as exceptional.
pub const COND_THRESHOLD: f64 = 1e8;

/// Square root with `Im >= 0`.
pub fn sqrt_upper(zeta: Complex64) -> Complex64 {
    let s = zeta.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Free Green's function `G_0(x, y; zeta) = -(2i sqrt(zeta))^{-1}
/// e^{i sqrt(zeta) |x-y|}`, `Im sqrt(zeta) > 0`.
pub fn green_free(x: f64, y: f64, zeta: Complex64) -> Result<Complex64> {
    if zeta.im == 0.0 && zeta.re >= 0.0 {
        return Err(Error::Domain(
            "zeta on the branch cut [0, infinity)".into(),
        ));
    }
    let kappa = sqrt_upper(zeta);
    Ok(-((Complex64::I * kappa * (x - y).abs()).exp()) / (2.0 * Complex64::I * kappa))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeKind {
    Density { grid_idx: usize },
    Atom,
}

/// Discretized `I + T(kappa)` on the support of `V`.
pub struct LsSystem {
    pub kappa: Complex64,
    positions: Vec<f64>,
    scale: Vec<f64>, // |V|^{1/2} resp. sqrt(|mass|)
    sign: Vec<f64>,
    kind: Vec<NodeKind>,
    lu: LuFactors,
    pub condition: f64,
}

impl LsSystem {
    /// Assemble and factor the system. `kappa` may be real (`|xi|`) or
    /// complex with `Im >= 0` (resolvent use).
    pub fn assemble(potential: &Potential, kappa: Complex64, grid: &SpatialGrid) -> Result<Self> {
        if kappa.norm() < jost::SMALL_Z_GUARD {
            return Err(Error::Domain(format!(
                "|kappa| = {:.3e} below the small-frequency guard",
                kappa.norm()
            )));
        }
        let h = grid.spacing();
        let support = potential.support_indices(SUPPORT_THRESHOLD);

        let mut positions = Vec::new();
        let mut scale = Vec::new();
        let mut sign = Vec::new();
        let mut kind = Vec::new();
        for &gi in &support {
            let rho = potential.density[gi];
            positions.push(grid.point(gi));
            scale.push(rho.abs().sqrt());
            sign.push(rho.signum());
            kind.push(NodeKind::Density { grid_idx: gi });
        }
        for &(pos, mass) in &potential.atoms {
            positions.push(pos);
            scale.push(mass.abs().sqrt());
            sign.push(mass.signum());
            kind.push(NodeKind::Atom);
        }
        let n = positions.len();
        if n == 0 {
            // zero potential: I is the system
            return Ok(Self {
                kappa,
                positions,
                scale,
                sign,
                kind,
                lu: LuFactors::new(vec![Complex64::new(1.0, 0.0)], 1)?,
                condition: 1.0,
            });
        }

        // contiguous runs of density grid indices (node-list ranges)
        let mut runs: Vec<(usize, usize)> = Vec::new(); // [node_lo, node_hi] inclusive
        let mut start = 0;
        for t in 1..=support.len() {
            if t == support.len() || support[t] != support[t - 1] + 1 {
                runs.push((start, t - 1));
                start = t;
            }
        }

        let pref = (2.0 * Complex64::I * kappa).inv();
        let mut mat = vec![Complex64::ZERO; n * n];
        // e^{i kappa h d} lookup for on-grid distances
        let max_d = if support.is_empty() {
            0
        } else {
            support[support.len() - 1] - support[0] + 1
        };
        let etab: Vec<Complex64> = (0..=max_d)
            .map(|d| (Complex64::I * kappa * (h * d as f64)).exp())
            .collect();

        for i in 0..n {
            // per-row quadrature weights over density nodes, split at the
            // kink of |x_i - y|
            let mut w = vec![0.0f64; n];
            for &(lo, hi) in &runs {
                let len = hi - lo + 1;
                let gi_lo = match kind[lo] {
                    NodeKind::Density { grid_idx } => grid_idx,
                    NodeKind::Atom => unreachable!(),
                };
                let split = match kind[i] {
                    NodeKind::Density { grid_idx } => grid_idx as isize - gi_lo as isize,
                    NodeKind::Atom => {
                        (((positions[i] - grid.point(gi_lo)) / h).round() as isize).clamp(-1, len as isize)
                    }
                };
                if split > 0 && (split as usize) < len - 1 {
                    let s = split as usize;
                    let wl = quad::gregory_weights(s + 1, h);
                    let wr = quad::gregory_weights(len - s, h);
                    for (t, &wv) in wl.iter().enumerate() {
                        w[lo + t] += wv;
                    }
                    for (t, &wv) in wr.iter().enumerate() {
                        w[lo + s + t] += wv;
                    }
                } else {
                    let wfull = quad::gregory_weights(len, h);
                    for (t, &wv) in wfull.iter().enumerate() {
                        w[lo + t] += wv;
                    }
                }
            }

            for j in 0..n {
                let wq = match kind[j] {
                    NodeKind::Density { .. } => w[j],
                    NodeKind::Atom => 1.0,
                };
                if wq == 0.0 && !matches!(kind[j], NodeKind::Atom) {
                    continue;
                }
                let ker = match (kind[i], kind[j]) {
                    (NodeKind::Density { grid_idx: gi }, NodeKind::Density { grid_idx: gj }) => {
                        etab[gi.abs_diff(gj)]
                    }
                    _ => (Complex64::I * kappa * (positions[i] - positions[j]).abs()).exp(),
                };
                let t_ij = -pref * scale[i] * ker * sign[j] * scale[j] * wq;
                mat[i * n + j] = t_ij;
            }
            mat[i * n + i] += 1.0;
        }

        let lu = LuFactors::new(mat, n)?;
        let condition = lu.condition_estimate();
        Ok(Self {
            kappa,
            positions,
            scale,
            sign,
            kind,
            lu,
            condition,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    fn is_trivial(&self) -> bool {
        self.positions.is_empty()
    }

    /// Solve `(I + T) psi = rhs_fn(node position) * scale` and return the
    /// node solution of the modified equation.
    fn solve_nodes(&self, rhs_fn: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        if self.is_trivial() {
            return Vec::new();
        }
        let rhs: Vec<Complex64> = self
            .positions
            .iter()
            .zip(&self.scale)
            .map(|(&p, &s)| rhs_fn(p) * s)
            .collect();
        self.lu.solve(&rhs)
    }

    /// Charges `V^{1/2} psi` placed on the full grid plus the atom charges.
    fn charges(
        &self,
        psi: &[Complex64],
        grid: &SpatialGrid,
    ) -> (Vec<Complex64>, Vec<(f64, Complex64)>) {
        let mut dens = vec![Complex64::ZERO; grid.n_points];
        let mut atoms = Vec::new();
        for (t, &k) in self.kind.iter().enumerate() {
            let q = self.sign[t] * self.scale[t] * psi[t];
            match k {
                NodeKind::Density { grid_idx } => dens[grid_idx] = q,
                NodeKind::Atom => atoms.push((self.positions[t], q)),
            }
        }
        (dens, atoms)
    }

    /// `(2i kappa)^{-1} int e^{i kappa |x - y|} V^{1/2} psi dy` on the grid.
    fn scattered_field(&self, psi: &[Complex64], grid: &SpatialGrid) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; grid.n_points];
        if self.is_trivial() {
            return out;
        }
        let (dens, atoms) = self.charges(psi, grid);
        let (left, right) = quad::one_sided_exp_integrals(self.kappa, grid.spacing(), &dens);
        for i in 0..grid.n_points {
            out[i] = left[i] + right[i];
        }
        for (pos, q) in atoms {
            quad::add_point_source(&mut out, self.kappa, grid.x_min, grid.spacing(), pos, q);
        }
        let pref = (2.0 * Complex64::I * self.kappa).inv();
        for o in &mut out {
            *o *= pref;
        }
        out
    }
}

/// A continuum eigenfunction `e(x, xi)` with its solve diagnostics.
#[derive(Debug, Clone)]
pub struct ContinuumEigenfunction {
    pub xi: f64,
    pub samples: Vec<Complex64>,
    pub ls_residual: f64,
    pub condition: f64,
}

fn ls_solve_impl(
    potential: &Potential,
    xi: f64,
    sign: Side,
    grid: &SpatialGrid,
    system: Option<&LsSystem>,
) -> Result<ContinuumEigenfunction> {
    if xi == 0.0 {
        return Err(Error::Domain("xi = 0 excluded".into()));
    }
    let kappa = Complex64::new(xi.abs(), 0.0);
    let built;
    let sys = match system {
        Some(s) => s,
        None => {
            built = LsSystem::assemble(potential, kappa, grid)?;
            &built
        }
    };
    if sys.condition > COND_THRESHOLD {
        return Err(Error::Exceptional {
            xi: xi.abs(),
            cond: sys.condition,
        });
    }
    let k_inc = match sign {
        Side::Plus => xi,
        Side::Minus => -xi,
    };
    let psi = sys.solve_nodes(|p| (Complex64::I * k_inc * p).exp());
    let scat = sys.scattered_field(&psi, grid);
    let samples: Vec<Complex64> = (0..grid.n_points)
        .map(|i| (Complex64::I * k_inc * grid.point(i)).exp() + scat[i])
        .collect();

    // a-posteriori defect of the unmodified equation on the grid
    let ls_residual = {
        let mut dens = vec![Complex64::ZERO; grid.n_points];
        for i in 0..grid.n_points {
            dens[i] = potential.density[i] * samples[i];
        }
        let (left, right) = quad::one_sided_exp_integrals(kappa, grid.spacing(), &dens);
        let mut field: Vec<Complex64> = (0..grid.n_points).map(|i| left[i] + right[i]).collect();
        for &(pos, mass) in &potential.atoms {
            // e is continuous; value at the atom from the reconstruction
            let idx = grid.nearest_index(pos);
            let e_at = if (grid.point(idx) - pos).abs() < 1e-12 {
                samples[idx]
            } else {
                // reconstruct exactly at the atom position
                let mut v = (Complex64::I * k_inc * pos).exp();
                let (dq, aq) = sys.charges(&psi, grid);
                let (l2, r2) = quad::one_sided_exp_integrals(kappa, grid.spacing(), &dq);
                let il = interp_linear(grid, &l2, &r2, pos);
                v += (2.0 * Complex64::I * kappa).inv()
                    * (il
                        + aq.iter()
                            .map(|&(p2, q2)| {
                                q2 * (Complex64::I * kappa * (pos - p2).abs()).exp()
                            })
                            .sum::<Complex64>());
                v
            };
            quad::add_point_source(&mut field, kappa, grid.x_min, grid.spacing(), pos, mass * e_at);
        }
        let pref = (2.0 * Complex64::I * kappa).inv();
        let mut sup_d = 0.0f64;
        let mut sup_e = 0.0f64;
        for i in 0..grid.n_points {
            let rhs = (Complex64::I * k_inc * grid.point(i)).exp() + pref * field[i];
            sup_d = sup_d.max((samples[i] - rhs).norm());
            sup_e = sup_e.max(samples[i].norm());
        }
        sup_d / sup_e.max(1.0)
    };

    Ok(ContinuumEigenfunction {
        xi: k_inc,
        samples,
        ls_residual,
        condition: sys.condition,
    })
}

fn interp_linear(grid: &SpatialGrid, l: &[Complex64], r: &[Complex64], x: f64) -> Complex64 {
    let h = grid.spacing();
    let t = ((x - grid.x_min) / h).clamp(0.0, (grid.n_points - 1) as f64);
    let i = (t.floor() as usize).min(grid.n_points - 2);
    let f = t - i as f64;
    let v0 = l[i] + r[i];
    let v1 = l[i + 1] + r[i + 1];
    v0 * (1.0 - f) + v1 * f
}

fn interp_cubic(grid: &SpatialGrid, vals: &[Complex64], x: f64) -> Complex64 {
    let n = grid.n_points;
    let h = grid.spacing();
    let t = (x - grid.x_min) / h;
    let i0 = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = t - i0 as f64;
    let w = [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ];
    (0..4).map(|q| w[q] * vals[i0 + q]).sum()
}

/// Continuum eigenfunction with incident wave `e^{i x xi}`.
pub fn ls_solve(
    potential: &Potential,
    xi: f64,
    grid: &SpatialGrid,
) -> Result<ContinuumEigenfunction> {
    ls_solve_impl(potential, xi, Side::Plus, grid, None)
}

/// Variant with incident wave `e^{+- i x xi}`.
pub fn ls_solve_pm(
    potential: &Potential,
    xi: f64,
    sign: Side,
    grid: &SpatialGrid,
) -> Result<ContinuumEigenfunction> {
    ls_solve_impl(potential, xi, sign, grid, None)
}

/// Both-signs solve sharing one factorization (used by the basis builder).
pub fn ls_solve_pair(
    potential: &Potential,
    xi_abs: f64,
    grid: &SpatialGrid,
) -> Result<(ContinuumEigenfunction, ContinuumEigenfunction, f64)> {
    let sys = LsSystem::assemble(potential, Complex64::new(xi_abs, 0.0), grid)?;
    let cond = sys.condition;
    let plus = ls_solve_impl(potential, xi_abs, Side::Plus, grid, Some(&sys))?;
    let minus = ls_solve_impl(potential, -xi_abs, Side::Plus, grid, Some(&sys))?;
    Ok((plus, minus, cond))
}

/// Condition estimate of `I + T(|xi|)` (exceptional-frequency scan).
pub fn condition_at(potential: &Potential, xi: f64, grid: &SpatialGrid) -> Result<f64> {
    let sys = LsSystem::assemble(potential, Complex64::new(xi.abs(), 0.0), grid)?;
    Ok(sys.condition)
}

/// Apply the resolvent `R(zeta) = (H - zeta)^{-1}` to `f` through
/// `R_0 - R_0 V^{1/2} (I + |V|^{1/2} R_0 V^{1/2})^{-1} |V|^{1/2} R_0`.
pub fn resolvent_apply(
    potential: &Potential,
    zeta: Complex64,
    f: &WaveFunction,
) -> Result<WaveFunction> {
    let grid = f.grid;
    if zeta.im.abs() < 1e-10 && zeta.re >= -1e-10 {
        return Err(Error::SpectralProximity {
            zeta_re: zeta.re,
            zeta_im: zeta.im,
            dist: zeta.im.abs(),
        });
    }
    let kappa = sqrt_upper(zeta);

    // R_0 f on the grid
    let (l, r) = quad::one_sided_exp_integrals(kappa, grid.spacing(), &f.samples);
    let pref = -(2.0 * Complex64::I * kappa).inv();
    let r0f: Vec<Complex64> = (0..grid.n_points).map(|i| pref * (l[i] + r[i])).collect();

    let sys = LsSystem::assemble(potential, kappa, &grid)?;
    if sys.is_trivial() {
        return WaveFunction::new(r0f, grid);
    }
    if sys.condition > 1e10 {
        return Err(Error::SpectralProximity {
            zeta_re: zeta.re,
            zeta_im: zeta.im,
            dist: 1.0 / sys.condition,
        });
    }
    // |V|^{1/2} R_0 f at the nodes (R_0 f is smooth, cubic interpolation)
    let rhs: Vec<Complex64> = sys
        .positions
        .iter()
        .zip(&sys.scale)
        .map(|(&p, &s)| interp_cubic(&grid, &r0f, p) * s)
        .collect();
    let a = sys.lu.solve(&rhs);
    // R_0 V^{1/2} a: same machinery as the scattered field but with the
    // resolvent prefactor -(2i kappa)^{-1}
    let scat = sys.scattered_field(&a, &grid);
    let samples: Vec<Complex64> = (0..grid.n_points)
        .map(|i| r0f[i] + scat[i]) // scattered_field has +(2ik)^{-1}; R_0 = -(...)
        .collect();
    WaveFunction::new(samples, grid)
}

/// Green's kernel of `R(zeta)` built from the two Jost solutions.
pub struct GreensKernel {
    pub zeta: Complex64,
    pub kappa: Complex64,
    plus: jost::JostSolution,
    minus: jost::JostSolution,
    wronskian: Complex64,
}

impl GreensKernel {
    pub fn new(potential: &Potential, zeta: Complex64, grid: &SpatialGrid) -> Result<Self> {
        if zeta.im == 0.0 && zeta.re >= 0.0 {
            return Err(Error::Domain("zeta on the continuous spectrum".into()));
        }
        let kappa = sqrt_upper(zeta);
        let fz = Frequency::new(kappa)?;
        let plus = jost::jost_solve(potential, fz, Side::Plus, grid)?;
        let minus = jost::jost_solve(potential, fz, Side::Minus, grid)?;
        let wronskian = jost::wronskian(&plus, &minus)?;
        if wronskian.norm() < 1e-10 {
            return Err(Error::SpectralProximity {
                zeta_re: zeta.re,
                zeta_im: zeta.im,
                dist: wronskian.norm(),
            });
        }
        Ok(Self {
            zeta,
            kappa,
            plus,
            minus,
            wronskian,
        })
    }

    /// `G(x, y; zeta) = J^+(max) J^-(min) / W`.
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        let jp = eval_jost(&self.plus, hi);
        let jm = eval_jost(&self.minus, lo);
        jp * jm / self.wronskian
    }

    pub fn free(&self, x: f64, y: f64) -> Complex64 {
        -((Complex64::I * self.kappa * (x - y).abs()).exp()) / (2.0 * Complex64::I * self.kappa)
    }
}

fn eval_jost(sol: &jost::JostSolution, x: f64) -> Complex64 {
    let grid = &sol.grid;
    let n = grid.n_points;
    let h = grid.spacing();
    let t = (x - grid.x_min) / h;
    let i0 = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = t - i0 as f64;
    let w = [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ];
    let mut a = Complex64::ZERO;
    let mut b = Complex64::ZERO;
    for q in 0..4 {
        a += w[q] * sol.amp_incident[i0 + q];
        b += w[q] * sol.amp_reflected[i0 + q];
    }
    let sgn = match sol.side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let e = (Complex64::I * sol.z * (sgn * x)).exp();
    a * e + b / e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::Frequency;
    use crate::scattering;

    fn grid() -> SpatialGrid {
        SpatialGrid::default_box()
    }

    #[test]
    fn green_free_values() {
        let zeta = Complex64::new(-1.0, 0.0);
        let g = green_free(1.0, 1.0, zeta).unwrap();
        assert!((g - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let g1 = green_free(2.0, 1.0, zeta).unwrap();
        assert!((g1 - Complex64::new(0.5 * (-1.0f64).exp(), 0.0)).norm() < 1e-14);
        assert_eq!(green_free(1.0, 3.0, zeta).unwrap(), green_free(3.0, 1.0, zeta).unwrap());
        assert!(green_free(0.0, 0.0, Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn ls_zero_potential_is_plane_wave() {
        let g = grid();
        let v = Potential::zero(&g);
        let e = ls_solve(&v, 1.0, &g).unwrap();
        assert!(e.ls_residual < 1e-14);
        for i in (0..g.n_points).step_by(400) {
            let x = g.point(i);
            assert!((e.samples[i] - (Complex64::I * x).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn ls_poschl_teller_matches_jost_route() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let e = ls_solve(&v, 1.0, &g).unwrap();
        let psi = scattering::psi_family(&v, 1.0, Side::Plus, &g).unwrap();
        let mut worst = 0.0f64;
        for i in (0..g.n_points).step_by(53) {
            worst = worst.max((e.samples[i] - psi.samples[i]).norm());
        }
        assert!(worst < 1e-6, "worst {worst:.3e}");
        assert!(e.ls_residual < 1e-8, "residual {:.3e}", e.ls_residual);
    }

    #[test]
    fn ls_gaussian_negative_xi_matches_jost_route() {
        let g = grid();
        let v = Potential::builtin("gaussian_bump", &[1.0, 0.0, 1.0], &g).unwrap();
        let e = ls_solve(&v, -1.5, &g).unwrap();
        let psi = scattering::psi_family(&v, -1.5, Side::Plus, &g).unwrap();
        let mut worst = 0.0f64;
        for i in (0..g.n_points).step_by(53) {
            worst = worst.max((e.samples[i] - psi.samples[i]).norm());
        }
        assert!(worst < 1e-6, "worst {worst:.3e}");
    }

    #[test]
    fn ls_pm_minus_matches_psi_minus_for_dirac() {
        let g = grid();
        let v = Potential::builtin("dirac", &[1.0], &g).unwrap();
        let e = ls_solve_pm(&v, 1.0, Side::Minus, &g).unwrap();
        // psi^-(x, 1) = phi^-_1 = (printed piecewise J^-) / alpha
        let alpha = Complex64::new(1.0, 1.0);
        for i in (0..g.n_points).step_by(97) {
            let x = g.point(i);
            let jm = if x >= 0.0 {
                (-Complex64::I * x).exp() + 2.0 * Complex64::new(x.sin(), 0.0)
            } else {
                (-Complex64::I * x).exp()
            };
            let expected = jm / alpha;
            assert!(
                (e.samples[i] - expected).norm() < 1e-10,
                "x={x}: {} vs {}",
                e.samples[i],
                expected
            );
        }
        // plus sign reproduces ls_solve exactly
        let a = ls_solve_pm(&v, 0.7, Side::Plus, &g).unwrap();
        let b = ls_solve(&v, 0.7, &g).unwrap();
        for i in (0..g.n_points).step_by(401) {
            assert_eq!(a.samples[i], b.samples[i]);
        }
    }

    #[test]
    fn resolvent_zero_potential_is_convolution() {
        let g = grid();
        let v = Potential::zero(&g);
        let f = WaveFunction::gaussian_packet(g, 0.0, 1.0, 0.0);
        let zeta = Complex64::new(-2.0, 0.5);
        let rf = resolvent_apply(&v, zeta, &f).unwrap();
        // (H0 - zeta) R0 f = f, checked with the fourth-order stencil
        let hrf = crate::oracle::apply_h_fd4(&v, &rf);
        let mut worst = 0.0f64;
        for i in (2..g.n_points - 2).step_by(37) {
            let lhs = hrf.samples[i] - zeta * rf.samples[i];
            worst = worst.max((lhs - f.samples[i]).norm());
        }
        assert!(worst < 1e-6 * f.sup_norm(), "worst {worst:.3e}");
    }

    #[test]
    fn resolvent_identity_for_builtins() {
        let g = grid();
        let zeta = Complex64::new(-2.0, 0.5);
        let f = WaveFunction::gaussian_packet(g, 1.0, 1.2, 0.0);
        for v in [
            Potential::builtin("poschl_teller", &[6.0], &g).unwrap(),
            Potential::builtin("gaussian_bump", &[1.0, -0.5, 1.5], &g).unwrap(),
        ] {
            let rf = resolvent_apply(&v, zeta, &f).unwrap();
            let hrf = crate::oracle::apply_h_fd4(&v, &rf);
            let mut err2 = 0.0f64;
            let mut nrm2 = 0.0f64;
            for i in 2..g.n_points - 2 {
                let lhs = hrf.samples[i] - zeta * rf.samples[i];
                err2 += (lhs - f.samples[i]).norm_sqr();
                nrm2 += f.samples[i].norm_sqr();
            }
            let rel = (err2 / nrm2).sqrt();
            assert!(rel < 1e-4, "{}: residual {rel:.3e}", v.label);
        }
    }

    #[test]
    fn resolvent_matches_fd_oracle_dense_solve() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let f = WaveFunction::gaussian_packet(g, 0.0, 1.5, 0.0);
        let zeta = Complex64::new(-2.0, 0.0);
        let rf = resolvent_apply(&v, zeta, &f).unwrap();
        let ham = crate::oracle::DenseHamiltonian::new(&v, &g).unwrap();
        let rf_fd = crate::oracle::fd_resolvent(&ham, zeta, &f).unwrap();
        let rel = rf.sub(&rf_fd).norm() / rf_fd.norm();
        assert!(rel < 1e-3, "relative {rel:.3e}");
    }

    #[test]
    fn resolvent_rejects_spectrum() {
        let g = grid();
        let v = Potential::zero(&g);
        let f = WaveFunction::gaussian_packet(g, 0.0, 1.0, 0.0);
        assert!(matches!(
            resolvent_apply(&v, Complex64::new(1.0, 0.0), &f),
            Err(Error::SpectralProximity { .. })
        ));
    }

    #[test]
    fn greens_kernel_symmetry_and_conjugation() {
        let g = grid();
        let v = Potential::builtin("poschl_teller", &[6.0], &g).unwrap();
        let zeta = Complex64::new(-2.0, 0.7);
        let gk = GreensKernel::new(&v, zeta, &g).unwrap();
        let pairs = [(-1.0, 2.0), (0.3, 0.4), (-3.0, -1.5)];
        for &(x, y) in &pairs {
            assert!((gk.eval(x, y) - gk.eval(y, x)).norm() < 1e-10);
        }
        let gk_conj = GreensKernel::new(&v, zeta.conj(), &g).unwrap();
        for &(x, y) in &pairs {
            assert!(
                (gk.eval(x, y).conj() - gk_conj.eval(x, y)).norm() < 1e-8,
                "conjugation at ({x},{y})"
            );
        }
    }

    #[test]
    fn greens_kernel_matches_free_for_zero_potential() {
        let g = grid();
        let v = Potential::zero(&g);
        let zeta = Complex64::new(-1.0, 0.0) * Complex64::new(1.0, 0.3);
        let gk = GreensKernel::new(&v, zeta, &g).unwrap();
        for &(x, y) in &[(0.0, 1.0), (-2.0, 3.0)] {
            assert!((gk.eval(x, y) - gk.free(x, y)).norm() < 1e-10);
        }
    }

    #[test]
    fn contraction_regime_for_large_kappa() {
        // For |kappa| > 2 ||V||_1 the Neumann iteration contracts.
        let g = grid();
        let v = Potential::builtin("gaussian_bump", &[1.0, 0.0, 1.0], &g).unwrap();
        let norm_l1 = v.norms(&g).unwrap().l1;
        let kappa = Complex64::new(2.5 * norm_l1, 0.0);
        let sys = LsSystem::assemble(&v, kappa, &g).unwrap();
        // apply T twice to the incident rhs and compare magnitudes
        let b: Vec<Complex64> = sys
            .positions
            .iter()
            .zip(&sys.scale)
            .map(|(&p, &s)| (Complex64::I * kappa.re * p).exp() * s)
            .collect();
        // (I+T)^{-1} b stays close to b when T is a contraction, and the
        // deviation bounds ||T|| from below by a convergent geometric tail
        let x = sys.lu.solve(&b);
        let diff: f64 = x
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff / bn < 0.5, "ratio {}", diff / bn);
    }

    #[test]
    fn condition_scan_zero_and_dirac() {
        let g = grid();
        let v = Potential::zero(&g);
        assert!((condition_at(&v, 1.0, &g).unwrap() - 1.0).abs() < 1e-12);
        let v = Potential::builtin("dirac", &[1.0], &g).unwrap();
        for &k in &[0.3, 1.0, 3.0] {
            let c = condition_at(&v, k, &g).unwrap();
            assert!(c.is_finite() && c < 100.0, "k={k}: cond {c}");
        }
    }
}
