//! Jost solutions of `-u'' + V u = z^2 u` for `Im z >= 0`, `z != 0`.
//!
//! `J_z^+` is asymptotic to `e^{izx}` on the right, `J_z^-` to `e^{-izx}` on
//! the left. Writing `J_z^+ = a(x) e^{izx} + b(x) e^{-izx}` with the usual
//! variation-of-parameters constraint turns the defining Volterra equation
//! into a first-order system for the amplitudes
//!
//! ```text
//!   a' =  (V/(2iz)) (a + b e^{-2izx}),   a(+inf) = 1
//!   b' = -(V/(2iz)) (a e^{+2izx} + b),   b(+inf) = 0
//! ```
//!
//! which is marched inward panel by panel. The oscillatory factors
//! `e^{+-2izy}` are integrated exactly against a septic interpolant of the
//! slow factors (`quad::panel_weights`), so the truncation error carries
//! derivatives of `V a` and `V b` only and is uniform in `|z|`. Dirac atoms
//! enter through the exact jump `J'(p+) - J'(p-) = mass * J(p)`; panels are
//! split at atom positions and the per-panel fixed point stays a 2x2 linear
//! solve. The far-side limits of `(a, b)` are exactly the coefficients
//! `alpha_z`, `beta_z^+` of the standard quadrature formulas.
//!
//! The minus side is solved by mirroring `x -> -x`.
//!
//! Plain Picard iteration of the Volterra equation is not used: for strong
//! potentials at small `|z|` the Neumann series reaches sizes near `e^{L}`
//! with `L = O(||V||_1 / |z|)` before converging, which destroys all
//! significant digits in double precision.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::potential::Potential;
use crate::quad::{self, PANEL_POINTS};

/// Frequencies below this modulus are rejected: the `1/z` kernel makes the
/// marching system ill-conditioned and the underlying bounds blow up.
pub const SMALL_Z_GUARD: f64 = 1e-4;

/// Largest admissible `2 Im z * max|x|` before `e^{2 Im z |x|}` overflows.
const MAX_IMAG_EXTENT: f64 = 650.0;

/// Spectral parameter for the Jost machinery: `Im z >= 0`, `z != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(Complex64);

impl Frequency {
    pub fn new(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Validation("frequency must be finite".into()));
        }
        if z.im < 0.0 {
            return Err(Error::Domain(format!(
                "frequency must satisfy Im z >= 0, got {z}"
            )));
        }
        if z.norm() == 0.0 {
            return Err(Error::Domain("frequency z = 0 is excluded".into()));
        }
        Ok(Self(z))
    }

    pub fn real(k: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0))
    }

    /// `z = i kappa` on the positive imaginary axis.
    pub fn imaginary(kappa: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, kappa))
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One Jost solution as amplitude samples on the grid.
///
/// For side `Plus`: `J(x) = a(x) e^{izx} + b(x) e^{-izx}`; for side `Minus`
/// the roles of the exponentials are mirrored.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub side: Side,
    pub z: Complex64,
    pub grid: SpatialGrid,
    /// Coefficient of the side's own exponential (`-> 1` at its infinity).
    pub amp_incident: Vec<Complex64>,
    /// Coefficient of the opposite exponential (`-> beta` at the far side).
    pub amp_reflected: Vec<Complex64>,
    /// Far-side limit of `amp_incident`, i.e. `alpha_z`.
    pub alpha: Complex64,
    /// Far-side limit of `amp_reflected`, i.e. `beta_z^{side}`.
    pub beta: Complex64,
    /// Atom locations of the potential, kept for derivative bookkeeping.
    pub atom_positions: Vec<f64>,
}

impl JostSolution {
    #[inline]
    fn sign(&self) -> f64 {
        match self.side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    /// Modified Jost function `j = e^{∓izx} J`, tending to 1 at the side's
    /// own infinity.
    pub fn j_samples(&self) -> Vec<Complex64> {
        let s = self.sign();
        (0..self.grid.n_points)
            .map(|i| {
                let x = self.grid.point(i);
                let osc = (Complex64::I * self.z * (-2.0 * s * x)).exp();
                self.amp_incident[i] + self.amp_reflected[i] * osc
            })
            .collect()
    }

    /// `J_z^{side}` on the grid.
    pub fn jost_samples(&self) -> Vec<Complex64> {
        let s = self.sign();
        (0..self.grid.n_points)
            .map(|i| {
                let x = self.grid.point(i);
                let e = (Complex64::I * self.z * (s * x)).exp();
                let eb = (Complex64::I * self.z * (-s * x)).exp();
                self.amp_incident[i] * e + self.amp_reflected[i] * eb
            })
            .collect()
    }

    /// Spatial derivative of `J`, exact in the computed amplitudes. At an
    /// atom this is the one-sided derivative from the side's own infinity.
    pub fn jost_deriv_samples(&self) -> Vec<Complex64> {
        let s = self.sign();
        let iz = Complex64::I * self.z;
        (0..self.grid.n_points)
            .map(|i| {
                let x = self.grid.point(i);
                let e = (iz * (s * x)).exp();
                let eb = (iz * (-s * x)).exp();
                s * iz * (self.amp_incident[i] * e - self.amp_reflected[i] * eb)
            })
            .collect()
    }

    /// `J` at one grid index.
    pub fn jost_at(&self, i: usize) -> Complex64 {
        let s = self.sign();
        let x = self.grid.point(i);
        self.amp_incident[i] * (Complex64::I * self.z * (s * x)).exp()
            + self.amp_reflected[i] * (Complex64::I * self.z * (-s * x)).exp()
    }

    fn jost_deriv_at(&self, i: usize) -> Complex64 {
        let s = self.sign();
        let iz = Complex64::I * self.z;
        let x = self.grid.point(i);
        s * iz
            * (self.amp_incident[i] * (iz * (s * x)).exp()
                - self.amp_reflected[i] * (iz * (-s * x)).exp())
    }
}

/// Coefficients `alpha_z`, `beta_z^+`, `beta_z^-`.
#[derive(Debug, Clone, Copy)]
pub struct JostCoefficients {
    pub alpha: Complex64,
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
}

#[derive(Clone, Copy)]
struct Affine {
    c0: Complex64,
    ca: Complex64,
    cb: Complex64,
}

impl Affine {
    fn constant(c: Complex64) -> Self {
        Self {
            c0: c,
            ca: Complex64::ZERO,
            cb: Complex64::ZERO,
        }
    }
    fn zero() -> Self {
        Self::constant(Complex64::ZERO)
    }
    fn add_scaled(&mut self, other: &Affine, s: Complex64) {
        self.c0 += s * other.c0;
        self.ca += s * other.ca;
        self.cb += s * other.cb;
    }
}

struct Marcher<'a> {
    x0: f64,
    h: f64,
    n: usize,
    rho: &'a [f64],
    /// Atoms sorted ascending by position.
    atoms: &'a [(f64, f64)],
    z: Complex64,
    c: Complex64, // 1/(2iz)
    coeffs: Vec<Vec<f64>>,
    w_zero: Vec<Complex64>,
    w_plus: Vec<Complex64>,
    /// `e^{-i theta0 q}`: dephasing of the reflected amplitude at stencil
    /// node q relative to the panel origin. The raw amplitude `b` carries an
    /// `e^{2izy}` ripple inside the potential, so the interpolation acts on
    /// `b e^{-2iz(y - x_i)}` which is slow uniformly in `z`.
    dephase: Vec<Complex64>,
}

impl<'a> Marcher<'a> {
    fn new(x0: f64, h: f64, n: usize, rho: &'a [f64], atoms: &'a [(f64, f64)], z: Complex64) -> Self {
        let coeffs = quad::lagrange_monomial_coeffs(PANEL_POINTS.min(n));
        let theta0 = 2.0 * z * h;
        let w_zero = quad::panel_weights(&coeffs, Complex64::ZERO, 0, 0.0, 1.0);
        let w_plus = quad::panel_weights(&coeffs, theta0, 0, 0.0, 1.0);
        let dephase = (0..coeffs.len())
            .map(|q| (-Complex64::I * theta0 * q as f64).exp())
            .collect();
        Self {
            x0,
            h,
            n,
            rho,
            atoms,
            z,
            c: (2.0 * Complex64::I * z).inv(),
            coeffs,
            w_zero,
            w_plus,
            dephase,
        }
    }

    /// March from the right edge; returns amplitude arrays.
    fn run(&self) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let n = self.n;
        let p = self.coeffs.len();
        let mut a = vec![Complex64::ZERO; n];
        let mut b = vec![Complex64::ZERO; n];
        a[n - 1] = Complex64::new(1.0, 0.0);

        // Atoms exactly at the right edge are crossed before any panel.
        {
            let mut a_cur = Affine::constant(a[n - 1]);
            let mut b_cur = Affine::constant(b[n - 1]);
            let mut touched = false;
            for &(pos, mass) in self.atoms.iter().rev() {
                if pos == self.x0 + (n - 1) as f64 * self.h {
                    self.apply_jump(&mut a_cur, &mut b_cur, pos, mass);
                    touched = true;
                }
            }
            if touched {
                a[n - 1] = a_cur.c0;
                b[n - 1] = b_cur.c0;
            }
        }

        let x_last = self.x0 + (n - 1) as f64 * self.h;
        for i in (0..n - 1).rev() {
            let s = i.min(n - p);
            let q0 = i - s;
            let x_i = self.x0 + i as f64 * self.h;
            let x_next = x_i + self.h;

            // Atoms with positions in (x_i, x_{i+1}]. Panel 0 also takes an
            // atom sitting exactly on x_0; the right edge point was crossed
            // before the loop.
            let lo_open = if i == 0 { x_i - 0.5 * self.h } else { x_i };
            let panel_atoms: Vec<(f64, f64)> = self
                .atoms
                .iter()
                .copied()
                .filter(|&(pos, _)| pos > lo_open && pos <= x_next && pos != x_last)
                .collect();

            let mut a_cur = Affine::constant(a[i + 1]);
            let mut b_cur = Affine::constant(b[i + 1]);

            if panel_atoms.is_empty() {
                self.integrate_window(&mut a_cur, &mut b_cur, i, s, q0, 0.0, 1.0, &a, &b)?;
            } else {
                let mut t_hi = 1.0;
                for &(pos, mass) in panel_atoms.iter().rev() {
                    let tp = ((pos - x_i) / self.h).clamp(0.0, 1.0);
                    if t_hi - tp > 1e-14 {
                        self.integrate_window(&mut a_cur, &mut b_cur, i, s, q0, tp, t_hi, &a, &b)?;
                    }
                    self.apply_jump(&mut a_cur, &mut b_cur, pos, mass);
                    t_hi = tp;
                }
                if t_hi > 1e-14 {
                    self.integrate_window(&mut a_cur, &mut b_cur, i, s, q0, 0.0, t_hi, &a, &b)?;
                }
            }

            // Close the fixed point: (A, B) = (a_cur, b_cur)(A, B).
            let det = (1.0 - a_cur.ca) * (1.0 - b_cur.cb) - a_cur.cb * b_cur.ca;
            if det.norm() < 1e-8 {
                return Err(Error::SolverFailure(format!(
                    "panel fixed point near-singular at x = {x_i:.4} (z = {})",
                    self.z
                )));
            }
            let av = ((1.0 - b_cur.cb) * a_cur.c0 + a_cur.cb * b_cur.c0) / det;
            let bv = (b_cur.ca * a_cur.c0 + (1.0 - a_cur.ca) * b_cur.c0) / det;
            if !av.re.is_finite() || !av.im.is_finite() || !bv.re.is_finite() || !bv.im.is_finite()
            {
                return Err(Error::SolverFailure(format!(
                    "non-finite amplitudes at x = {x_i:.4} (z = {})",
                    self.z
                )));
            }
            a[i] = av;
            b[i] = bv;
        }
        Ok((a, b))
    }

    /// Accumulate the density integral over the window `[t0, t1]` (panel
    /// coordinates) of panel `i` onto the running affine state.
    #[allow(clippy::too_many_arguments)]
    fn integrate_window(
        &self,
        a_cur: &mut Affine,
        b_cur: &mut Affine,
        i: usize,
        s: usize,
        q0: usize,
        t0: f64,
        t1: f64,
        a: &[Complex64],
        b: &[Complex64],
    ) -> Result<()> {
        let p = self.coeffs.len();
        let h = self.h;
        let x_i = self.x0 + i as f64 * h;
        let interior = s == i && t0 == 0.0 && t1 == 1.0;
        let delta = s as i32 - i as i32;
        let theta0 = 2.0 * self.z * h;
        let (tw, pw);
        let (t_w, p_w): (&[Complex64], &[Complex64]) = if interior {
            (&self.w_zero, &self.w_plus)
        } else {
            tw = quad::panel_weights(&self.coeffs, Complex64::ZERO, delta, t0, t1);
            pw = quad::panel_weights(&self.coeffs, theta0, delta, t0, t1);
            (&tw, &pw)
        };

        let e_plus = (2.0 * Complex64::I * self.z * x_i).exp(); // e^{+2izx_i}
        let e_minus = (-2.0 * Complex64::I * self.z * x_i).exp();

        // Sums over the stencil; the q0 node carries the unknowns. The
        // reflected samples are dephased to the panel origin so both
        // interpolated products are slow.
        let mut sa = Affine::zero(); // int rho a
        let mut spa = Affine::zero(); // int rho a e^{+2iz(y-x_i)}
        let mut sb = Affine::zero(); // int rho b~
        let mut spb = Affine::zero(); // int rho b~ e^{+2iz(y-x_i)}
        for q in 0..p {
            let idx = s + q;
            let rho = self.rho[idx];
            if rho == 0.0 {
                continue;
            }
            let tau_q = delta + q as i32;
            let deph = if interior {
                self.dephase[q]
            } else {
                (-Complex64::I * theta0 * tau_q as f64).exp()
            };
            let (aval, bval) = if q == q0 {
                (
                    Affine {
                        c0: Complex64::ZERO,
                        ca: Complex64::new(1.0, 0.0),
                        cb: Complex64::ZERO,
                    },
                    Affine {
                        c0: Complex64::ZERO,
                        ca: Complex64::ZERO,
                        cb: deph,
                    },
                )
            } else {
                (Affine::constant(a[idx]), Affine::constant(b[idx] * deph))
            };
            let rho_c = Complex64::new(rho * h, 0.0);
            sa.add_scaled(&aval, t_w[q] * rho_c);
            sb.add_scaled(&bval, t_w[q] * rho_c);
            spa.add_scaled(&aval, p_w[q] * rho_c);
            spb.add_scaled(&bval, p_w[q] * rho_c);
        }

        // a -= c (int rho a + e^{-2izx_i} int rho b~)
        // b += c (e^{+2izx_i} int rho a e^{2iz(y-x_i)} + int rho b~ e^{2iz(y-x_i)})
        a_cur.add_scaled(&sa, -self.c);
        a_cur.add_scaled(&sb, -self.c * e_minus);
        b_cur.add_scaled(&spa, self.c * e_plus);
        b_cur.add_scaled(&spb, self.c);
        Ok(())
    }

    /// Exact amplitude jump when crossing an atom leftward.
    fn apply_jump(&self, a_cur: &mut Affine, b_cur: &mut Affine, pos: f64, mass: f64) {
        let e_minus = (-2.0 * Complex64::I * self.z * pos).exp();
        let e_plus = (2.0 * Complex64::I * self.z * pos).exp();
        // j(p) = a + b e^{-2izp}
        let mut j_at = Affine::zero();
        j_at.add_scaled(a_cur, Complex64::new(1.0, 0.0));
        j_at.add_scaled(b_cur, e_minus);
        let cm = self.c * mass;
        a_cur.add_scaled(&j_at, -cm);
        b_cur.add_scaled(&j_at, cm * e_plus);
    }
}

fn validate_z(z: Complex64, grid: &SpatialGrid) -> Result<()> {
    if z.im < 0.0 {
        return Err(Error::Domain(format!("Im z must be >= 0, got {z}")));
    }
    if z.norm() < SMALL_Z_GUARD {
        return Err(Error::Domain(format!(
            "|z| = {:.3e} below the small-frequency guard {SMALL_Z_GUARD:.0e}",
            z.norm()
        )));
    }
    let extent = grid.x_min.abs().max(grid.x_max.abs());
    if 2.0 * z.im * extent > MAX_IMAG_EXTENT {
        return Err(Error::Domain(format!(
            "Im z = {} too large for the truncation [{}, {}]",
            z.im, grid.x_min, grid.x_max
        )));
    }
    Ok(())
}

/// Solve for one Jost solution.
pub fn jost_solve(
    potential: &Potential,
    z: Frequency,
    side: Side,
    grid: &SpatialGrid,
) -> Result<JostSolution> {
    let z = z.z();
    validate_z(z, grid)?;
    if potential.density.len() != grid.n_points {
        return Err(Error::Usage("potential sampled on a different grid".into()));
    }
    let h = grid.spacing();
    let n = grid.n_points;
    match side {
        Side::Plus => {
            let marcher = Marcher::new(
                grid.x_min,
                h,
                n,
                &potential.density,
                &potential.atoms,
                z,
            );
            let (a, b) = marcher.run()?;
            let (alpha, beta) = (a[0], b[0]);
            Ok(JostSolution {
                side,
                z,
                grid: *grid,
                amp_incident: a,
                amp_reflected: b,
                alpha,
                beta,
                atom_positions: potential.atoms.iter().map(|&(l, _)| l).collect(),
            })
        }
        Side::Minus => {
            // mirror: J^-(x; V) = J^+(-x; V(-.))
            let rho_m: Vec<f64> = potential.density.iter().rev().copied().collect();
            let mut atoms_m: Vec<(f64, f64)> =
                potential.atoms.iter().map(|&(l, m)| (-l, m)).collect();
            atoms_m.sort_by(|a, b| a.0.total_cmp(&b.0));
            let marcher = Marcher::new(-grid.x_max, h, n, &rho_m, &atoms_m, z);
            let (a_m, b_m) = marcher.run()?;
            let (alpha, beta) = (a_m[0], b_m[0]);
            let a: Vec<Complex64> = a_m.into_iter().rev().collect();
            let b: Vec<Complex64> = b_m.into_iter().rev().collect();
            Ok(JostSolution {
                side,
                z,
                grid: *grid,
                amp_incident: a,
                amp_reflected: b,
                alpha,
                beta,
                atom_positions: potential.atoms.iter().map(|&(l, _)| l).collect(),
            })
        }
    }
}

/// Wronskian `W[J^+, J^-] = J^+ (J^-)' - (J^+)' J^-`, averaged over interior
/// sample points with a constancy check.
pub fn wronskian(left: &JostSolution, right: &JostSolution) -> Result<Complex64> {
    if left.side == right.side {
        return Err(Error::Usage(
            "wronskian needs Jost solutions from opposite sides".into(),
        ));
    }
    if (left.z - right.z).norm() > 1e-14 * (1.0 + left.z.norm()) {
        return Err(Error::Usage("wronskian needs matching frequencies".into()));
    }
    if left.grid != right.grid {
        return Err(Error::Usage("wronskian needs a shared grid".into()));
    }
    let (plus, minus) = if left.side == Side::Plus {
        (left, right)
    } else {
        (right, left)
    };
    let grid = &plus.grid;
    let n = grid.n_points;
    let h = grid.spacing();
    let mut vals = Vec::new();
    for frac in 1..=19 {
        let i = (n - 1) * frac / 20;
        // at an atom the stored derivatives are one-sided; sample elsewhere
        if plus
            .atom_positions
            .iter()
            .any(|&pos| (grid.point(i) - pos).abs() < 1.5 * h)
        {
            continue;
        }
        let w = plus.jost_at(i) * minus.jost_deriv_at(i) - plus.jost_deriv_at(i) * minus.jost_at(i);
        vals.push(w);
        if vals.len() >= 9 {
            break;
        }
    }
    let mean: Complex64 = vals.iter().sum::<Complex64>() / vals.len() as f64;
    let spread = vals
        .iter()
        .map(|v| (v - mean).norm())
        .fold(0.0, f64::max);
    let scale = mean.norm().max(2.0 * plus.z.norm());
    if spread > 1e-5 * scale {
        return Err(Error::SolverFailure(format!(
            "wronskian not constant: spread {spread:.3e} vs scale {scale:.3e}"
        )));
    }
    Ok(mean)
}

/// `alpha_z`, `beta_z^+` and `beta_z^-` with a Wronskian cross-check.
pub fn jost_coefficients(
    potential: &Potential,
    z: Frequency,
    grid: &SpatialGrid,
) -> Result<JostCoefficients> {
    let plus = jost_solve(potential, z, Side::Plus, grid)?;
    let minus = jost_solve(potential, z, Side::Minus, grid)?;
    let alpha = plus.alpha;
    let w = wronskian(&plus, &minus)?;
    let target = -2.0 * Complex64::I * plus.z * alpha;
    let scale = target.norm().max(2.0 * plus.z.norm());
    if (w - target).norm() > 1e-5 * scale {
        return Err(Error::SolverFailure(format!(
            "wronskian {w} disagrees with -2iz alpha = {target}"
        )));
    }
    Ok(JostCoefficients {
        alpha,
        beta_plus: plus.beta,
        beta_minus: minus.beta,
    })
}

/// `alpha(i kappa)` is real for real potentials; used by the bound-state scan.
pub fn alpha_on_imaginary_axis(
    potential: &Potential,
    kappa: f64,
    grid: &SpatialGrid,
) -> Result<f64> {
    let sol = jost_solve(potential, Frequency::imaginary(kappa)?, Side::Plus, grid)?;
    Ok(sol.alpha.re)
}
