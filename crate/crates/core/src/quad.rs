//! Quadrature kernels shared by the solvers.
//!
//! Three ingredients:
//! * Gregory end-corrected trapezoid weights for plain inner products and
//!   norms (fourth order, positive weights).
//! * Oscillatory panel moments: exact integrals of `tau^m e^{i theta tau}`
//!   over subintervals, combined with Lagrange interpolation of the smooth
//!   factor. The marching Jost solver relies on these being exact in the
//!   oscillation so its error is uniform in the frequency.
//! * Stable one-sided exponential running sums for kernels of the form
//!   `e^{i kappa |x - y|}` (free resolvent applications, Lippmann-Schwinger
//!   reconstruction). The recurrence only ever multiplies by factors of
//!   modulus <= 1 when `Im kappa >= 0`.

use num_complex::Complex64;

/// Stencil size of the high-order panel rules (septic interpolation).
pub const PANEL_POINTS: usize = 8;

const GREGORY_END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
/// Corrections of the Gregory rule relative to plain trapezoid weights.
pub const GREGORY_DELTA: [f64; 3] = [-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0];

/// Fourth-order end-corrected trapezoid weights on a uniform grid.
pub fn gregory_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 8 {
        for s in 0..3 {
            w[s] = GREGORY_END[s] * h;
            w[n - 1 - s] = GREGORY_END[s] * h;
        }
    } else if n >= 2 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Monomial moments `mu_m = int_{t0}^{t1} tau^m e^{i theta tau} d tau` for
/// m = 0..m_max-1. Series evaluation for small |theta|, upward recurrence
/// otherwise.
pub fn monomial_moments(theta: Complex64, t0: f64, t1: f64, m_max: usize) -> Vec<Complex64> {
    let mut mu = vec![Complex64::ZERO; m_max];
    let i_theta = Complex64::I * theta;
    if theta.norm() < 4.0 {
        // mu_m = sum_j (i theta)^j (t1^{m+j+1} - t0^{m+j+1}) / (j! (m+j+1))
        let top = m_max + 60;
        let mut pow1 = vec![0.0f64; top + 1];
        let mut pow0 = vec![0.0f64; top + 1];
        pow1[0] = 1.0;
        pow0[0] = 1.0;
        for p in 1..=top {
            pow1[p] = pow1[p - 1] * t1;
            pow0[p] = pow0[p - 1] * t0;
        }
        for (m, slot) in mu.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0); // (i theta)^j / j!
            let mut acc = Complex64::ZERO;
            for j in 0..60 {
                let p = m + j + 1;
                let contrib = term * ((pow1[p] - pow0[p]) / p as f64);
                acc += contrib;
                if contrib.norm() < 1e-22 * (1.0 + acc.norm()) && j > 4 {
                    break;
                }
                term *= i_theta / (j as f64 + 1.0);
            }
            *slot = acc;
        }
    } else {
        let e1 = (i_theta * t1).exp();
        let e0 = (i_theta * t0).exp();
        mu[0] = (e1 - e0) / i_theta;
        let mut p1 = Complex64::new(1.0, 0.0);
        let mut p0 = Complex64::new(1.0, 0.0);
        for m in 1..m_max {
            p1 *= t1;
            p0 *= t0;
            mu[m] = (p1 * e1 - p0 * e0 - mu[m - 1] * m as f64) / i_theta;
        }
    }
    mu
}

/// Monomial coefficients of the Lagrange basis on integer nodes 0..p-1,
/// computed exactly in integer arithmetic. `coeffs[q][m]` multiplies tau^m.
pub fn lagrange_monomial_coeffs(p: usize) -> Vec<Vec<f64>> {
    assert!(p >= 2 && p <= 12);
    let mut out = Vec::with_capacity(p);
    for q in 0..p {
        let mut num: Vec<i128> = vec![1]; // product of (tau - r)
        let mut den: i128 = 1;
        for r in 0..p {
            if r == q {
                continue;
            }
            den *= q as i128 - r as i128;
            let mut next = vec![0i128; num.len() + 1];
            for (m, &c) in num.iter().enumerate() {
                next[m + 1] += c;
                next[m] -= c * r as i128;
            }
            num = next;
        }
        out.push(num.iter().map(|&c| c as f64 / den as f64).collect());
    }
    out
}

/// Weights turning samples at integer nodes `delta..delta+p-1` (in units of
/// the panel coordinate tau) into the integral
/// `int_{t0}^{t1} g(tau) e^{i theta tau} d tau`.
pub fn panel_weights(
    coeffs: &[Vec<f64>],
    theta: Complex64,
    delta: i32,
    t0: f64,
    t1: f64,
) -> Vec<Complex64> {
    let p = coeffs.len();
    // Shift to sigma = tau - delta so nodes sit at 0..p-1.
    let s0 = t0 - delta as f64;
    let s1 = t1 - delta as f64;
    let mu = monomial_moments(theta, s0, s1, p);
    let phase = (Complex64::I * theta * delta as f64).exp();
    (0..p)
        .map(|q| {
            let val: Complex64 = coeffs[q]
                .iter()
                .zip(&mu)
                .map(|(&c, m)| m * c)
                .sum();
            val * phase
        })
        .collect()
}

/// One-sided exponentially weighted sums
/// `L(i) = int_{x_0}^{x_i} q(y) e^{i kappa (x_i - y)} dy` and
/// `R(i) = int_{x_i}^{x_{n-1}} q(y) e^{i kappa (y - x_i)} dy`,
/// both fourth-order accurate for smooth `q`, evaluated for every i in O(n).
pub fn one_sided_exp_integrals(
    kappa: Complex64,
    h: f64,
    charges: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = charges.len();
    let step = (Complex64::I * kappa * h).exp();
    let mut left = vec![Complex64::ZERO; n];
    let mut right = vec![Complex64::ZERO; n];

    // Plain trapezoid via the stable recurrence, then Gregory corrections.
    let mut acc = Complex64::ZERO; // sum_{j<=i} q_j e^{i kappa (x_i - x_j)}
    for i in 0..n {
        acc = if i == 0 { charges[0] } else { acc * step + charges[i] };
        left[i] = acc;
    }
    let mut acc = Complex64::ZERO;
    for i in (0..n).rev() {
        acc = if i == n - 1 {
            charges[n - 1]
        } else {
            acc * step + charges[i]
        };
        right[i] = acc;
    }

    // Convert raw sums to trapezoid integrals and apply end corrections.
    // Windows shorter than 8 points fall back to the trapezoid value.
    let kernel = |dist: f64| (Complex64::I * kappa * dist).exp();
    for i in 0..n {
        let far = kernel(i as f64 * h);
        let mut l = h * (left[i] - 0.5 * charges[i] - 0.5 * far * charges[0]);
        if i >= 7 {
            for (s, d) in GREGORY_DELTA.iter().enumerate() {
                l += h * d * kernel((i - s) as f64 * h) * charges[s];
                l += h * d * kernel(s as f64 * h) * charges[i - s];
            }
        }
        left[i] = l;

        let m = n - 1 - i;
        let far = kernel(m as f64 * h);
        let mut r = h * (right[i] - 0.5 * charges[i] - 0.5 * far * charges[n - 1]);
        if m >= 7 {
            for (s, d) in GREGORY_DELTA.iter().enumerate() {
                r += h * d * kernel((m - s) as f64 * h) * charges[n - 1 - s];
                r += h * d * kernel(s as f64 * h) * charges[i + s];
            }
        }
        right[i] = r;
    }
    (left, right)
}

/// `sum_j e^{i kappa |x_i - y|} q` for a point source at `y` with charge `q`,
/// added onto `out` for every grid point.
pub fn add_point_source(
    out: &mut [Complex64],
    kappa: Complex64,
    x0: f64,
    h: f64,
    y: f64,
    q: Complex64,
) {
    for (i, o) in out.iter_mut().enumerate() {
        let x = x0 + i as f64 * h;
        *o += q * (Complex64::I * kappa * (x - y).abs()).exp();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gregory_exact_on_cubics() {
        let n = 41;
        let h = 0.1;
        let w = gregory_weights(n, h);
        for pow in 0..=3 {
            let exact = ((n - 1) as f64 * h).powi(pow + 1) / (pow + 1) as f64;
            let approx: f64 = (0..n)
                .map(|i| (i as f64 * h).powi(pow) * w[i])
                .sum();
            assert_abs_diff_eq!(approx, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn gregory_fourth_order_on_smooth() {
        let f = |x: f64| (1.5 * x).sin() * (-0.3 * x).exp();
        let exact = {
            // antiderivative of e^{ax} sin(bx), a=-0.3, b=1.5
            let (a, b) = (-0.3, 1.5);
            let ad = |x: f64| (a * x).exp() * (a * (b * x).sin() - b * (b * x).cos()) / (a * a + b * b);
            ad(2.0) - ad(0.0)
        };
        let mut errs = Vec::new();
        for &n in &[33usize, 65] {
            let h = 2.0 / (n - 1) as f64;
            let w = gregory_weights(n, h);
            let val: f64 = (0..n).map(|i| f(i as f64 * h) * w[i]).sum();
            errs.push((val - exact).abs());
        }
        // halving h should shrink the error by about 2^4
        assert!(errs[1] < errs[0] / 10.0, "errors: {errs:?}");
    }

    #[test]
    fn moments_match_series_and_recurrence() {
        // consistency across the |theta| switch
        for &th in &[3.9, 4.1] {
            let theta = Complex64::new(th, 0.3);
            let a = monomial_moments(theta, 0.0, 1.0, 8);
            // reference by fine Simpson
            let nn = 20001;
            let hh = 1.0 / (nn - 1) as f64;
            for m in 0..8 {
                let mut acc = Complex64::ZERO;
                for j in 0..nn {
                    let t = j as f64 * hh;
                    let v = t.powi(m as i32) * (Complex64::I * theta * t).exp();
                    let w = if j == 0 || j == nn - 1 {
                        1.0
                    } else if j % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += v * w;
                }
                acc *= hh / 3.0;
                assert!((a[m] - acc).norm() < 1e-12, "m={m} theta={theta}");
            }
        }
    }

    #[test]
    fn panel_weights_exact_on_polynomials() {
        let coeffs = lagrange_monomial_coeffs(PANEL_POINTS);
        let theta = Complex64::new(2.0, 0.4);
        let w = panel_weights(&coeffs, theta, 0, 0.0, 1.0);
        // g(t) = (t/7)^3 + 0.2 (t/7)^7 is reproduced exactly by the interpolant
        let g = |t: f64| (t / 7.0).powi(3) + 0.2 * (t / 7.0).powi(7);
        let approx: Complex64 = (0..PANEL_POINTS).map(|q| w[q] * g(q as f64)).sum();
        let exact: Complex64 = {
            let mu = monomial_moments(theta, 0.0, 1.0, 8);
            mu[3] / 343.0 + 0.2 * mu[7] / 7f64.powi(7)
        };
        assert!(
            (approx - exact).norm() < 1e-13,
            "err {:.3e}",
            (approx - exact).norm()
        );
    }

    #[test]
    fn panel_weights_integrate_oscillatory_product() {
        // int_0^1 g(tau) e^{i theta tau}, g smooth but not polynomial:
        // septic interpolation over the 8-point stencil limits the error
        let coeffs = lagrange_monomial_coeffs(PANEL_POINTS);
        let theta = Complex64::new(2.0, 0.0);
        let w = panel_weights(&coeffs, theta, 0, 0.0, 1.0);
        let g = |t: f64| (0.3 * t).cos() + t * t;
        let approx: Complex64 = (0..PANEL_POINTS)
            .map(|q| w[q] * g(q as f64))
            .sum();
        // dense reference
        let nn = 40001;
        let hh = 1.0 / (nn - 1) as f64;
        let mut acc = Complex64::ZERO;
        for j in 0..nn {
            let t = j as f64 * hh;
            let v = g(t) * (Complex64::I * theta * t).exp();
            let w = if j == 0 || j == nn - 1 {
                0.5
            } else {
                1.0
            };
            acc += v * w;
        }
        acc *= hh;
        assert!((approx - acc).norm() < 1e-6, "err {:.3e}", (approx - acc).norm());
    }

    #[test]
    fn one_sided_sums_match_direct() {
        let n = 64;
        let h = 0.05;
        let kappa = Complex64::new(1.3, 0.4);
        let q: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                Complex64::new((-(x - 1.5f64).powi(2)).exp(), 0.1 * x.sin())
            })
            .collect();
        let (left, right) = one_sided_exp_integrals(kappa, h, &q);
        // direct trapezoid-with-corrections reference at one interior point
        let i = 40;
        let mut dl = Complex64::ZERO;
        let wl = gregory_weights(i + 1, h);
        for j in 0..=i {
            dl += wl[j] * q[j] * (Complex64::I * kappa * ((i - j) as f64 * h)).exp();
        }
        assert!((left[i] - dl).norm() < 1e-12);
        let m = n - i;
        let wr = gregory_weights(m, h);
        let mut dr = Complex64::ZERO;
        for j in i..n {
            dr += wr[j - i] * q[j] * (Complex64::I * kappa * ((j - i) as f64 * h)).exp();
        }
        assert!((right[i] - dr).norm() < 1e-12);
    }
}
