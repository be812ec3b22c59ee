//! Quadrature and local-interpolation helpers on uniform grids.
//!
//! All series in this crate live on uniform grids, so the composite trapezoid
//! rule is the workhorse: for integrands that decay at both window ends (every
//! admissible current or density series) its Euler–Maclaurin error terms
//! vanish with the endpoint derivatives, and for band-limited integrands
//! sampled above the Nyquist rate it is spectrally accurate.
//!
//! Integrals over sub-intervals whose endpoints fall between samples (the
//! `Delta_<` gap set) get no such cancellation and need the local cubic
//! models: [`CubicPoly::hermite`] when a derivative series is available and
//! [`CubicPoly::lagrange4`] when only values are.

use num_complex::Complex64;

/// Composite trapezoid rule.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

/// Composite trapezoid rule for complex samples.
pub fn trapezoid_c(values: &[Complex64], dx: f64) -> Complex64 {
    if values.len() < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let mut sum = 0.5 * (values[0] + values[values.len() - 1]);
    for v in &values[1..values.len() - 1] {
        sum += v;
    }
    dx * sum
}

/// Cumulative trapezoid integral, anchored to zero at the first sample.
pub fn cumulative_trapezoid(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson rule; falls back to a 3/8 block on the trailing three
/// cells when the cell count is odd, and to trapezoid below four samples.
pub fn simpson(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 4 {
        return trapezoid(values, dx);
    }
    let cells = n - 1;
    let (simpson_cells, tail) = if cells % 2 == 0 { (cells, 0) } else { (cells - 3, 3) };
    let mut total = 0.0;
    if simpson_cells > 0 {
        let mut sum = values[0] + values[simpson_cells];
        let mut i = 1;
        while i < simpson_cells {
            sum += 4.0 * values[i];
            if i + 1 < simpson_cells {
                sum += 2.0 * values[i + 1];
            }
            i += 2;
        }
        total += dx / 3.0 * sum;
    }
    if tail == 3 {
        let m = simpson_cells;
        total += 3.0 * dx / 8.0
            * (values[m] + 3.0 * values[m + 1] + 3.0 * values[m + 2] + values[m + 3]);
    }
    total
}

/// Cubic polynomial `f(t) = sum c_i (t - t0)^i`, valid on `[t0, t0 + span]`.
#[derive(Debug, Clone, Copy)]
pub struct CubicPoly {
    pub t0: f64,
    pub span: f64,
    c: [f64; 4],
}

impl CubicPoly {
    /// Hermite interpolant on one cell from endpoint values and derivatives.
    pub fn hermite(t0: f64, h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> Self {
        let c2 = (3.0 * (f1 - f0) / h - 2.0 * d0 - d1) / h;
        let c3 = (2.0 * (f0 - f1) / h + d0 + d1) / (h * h);
        CubicPoly { t0, span: h, c: [f0, d0, c2, c3] }
    }

    /// Interpolant through four consecutive uniform samples starting at `t0`.
    pub fn lagrange4(t0: f64, h: f64, f: [f64; 4]) -> Self {
        let a1 = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / 6.0;
        let a2 = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / 2.0;
        let a3 = (-f[0] + 3.0 * f[1] - 3.0 * f[2] + f[3]) / 6.0;
        CubicPoly {
            t0,
            span: 3.0 * h,
            c: [f[0], a1 / h, a2 / (h * h), a3 / (h * h * h)],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = t - self.t0;
        ((self.c[3] * u + self.c[2]) * u + self.c[1]) * u + self.c[0]
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let u = t - self.t0;
        (3.0 * self.c[3] * u + 2.0 * self.c[2]) * u + self.c[1]
    }

    /// Exact `∫_{ta}^{tb} f(t) dt`.
    pub fn integral(&self, ta: f64, tb: f64) -> f64 {
        let anti = |u: f64| {
            (((self.c[3] / 4.0 * u + self.c[2] / 3.0) * u + self.c[1] / 2.0) * u + self.c[0]) * u
        };
        anti(tb - self.t0) - anti(ta - self.t0)
    }

    /// Exact `∫_{ta}^{tb} t^p f'(t) dt` for `p` in 0..=2.
    pub fn integral_tp_deriv(&self, ta: f64, tb: f64, p: u32) -> f64 {
        let ua = ta - self.t0;
        let ub = tb - self.t0;
        // Moments of f'(u) = c1 + 2 c2 u + 3 c3 u^2 against powers of u.
        let m = |q: u32, u: f64| -> f64 {
            let q = q as f64;
            self.c[1] * u.powf(q + 1.0) / (q + 1.0)
                + 2.0 * self.c[2] * u.powf(q + 2.0) / (q + 2.0)
                + 3.0 * self.c[3] * u.powf(q + 3.0) / (q + 3.0)
        };
        let mom = |q: u32| m(q, ub) - m(q, ua);
        match p {
            0 => mom(0),
            1 => self.t0 * mom(0) + mom(1),
            2 => self.t0 * self.t0 * mom(0) + 2.0 * self.t0 * mom(1) + mom(2),
            _ => unreachable!("only moments up to t^2 are used"),
        }
    }

    /// Bisect `f(t) = y` on `[ta, tb]`; requires a sign change of `f - y`.
    pub fn solve(&self, ta: f64, tb: f64, y: f64) -> Option<f64> {
        let mut lo = ta;
        let mut hi = tb;
        let mut flo = self.eval(lo) - y;
        let fhi = self.eval(hi) - y;
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() == fhi.signum() {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fmid = self.eval(mid) - y;
            if fmid == 0.0 {
                return Some(mid);
            }
            if fmid.signum() == flo.signum() {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Location of the interior extremum closest to being a maximum of `f`
    /// on `[ta, tb]`, if the derivative changes sign there.
    pub fn max_location(&self, ta: f64, tb: f64) -> Option<f64> {
        // f' is quadratic; bisect on the derivative.
        let dlo = self.deriv(ta);
        let dhi = self.deriv(tb);
        if dlo == 0.0 {
            return Some(ta);
        }
        if dhi == 0.0 {
            return Some(tb);
        }
        if dlo.signum() == dhi.signum() {
            return None;
        }
        let mut lo = ta;
        let mut hi = tb;
        let mut flo = dlo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fmid = self.deriv(mid);
            if fmid == 0.0 {
                return Some(mid);
            }
            if fmid.signum() == flo.signum() {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_decaying_integrand_is_spectral() {
        // Gaussian over a window wide enough that endpoints vanish.
        let n = 401;
        let dx = 20.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = -10.0 + dx * i as f64;
                (-x * x / 2.0).exp()
            })
            .collect();
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(trapezoid(&vals, dx), exact, max_relative = 1e-12);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for n in [5usize, 6, 9, 12] {
            let dx = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n)
                .map(|i| {
                    let x = dx * i as f64;
                    3.0 * x * x * x - 2.0 * x * x + x - 7.0
                })
                .collect();
            // ∫_0^1 = 3/4 - 2/3 + 1/2 - 7
            assert_relative_eq!(simpson(&vals, dx), 0.75 - 2.0 / 3.0 + 0.5 - 7.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn cumulative_matches_total() {
        let vals = [0.0, 1.0, 4.0, 9.0, 16.0];
        let cum = cumulative_trapezoid(&vals, 0.5);
        assert_eq!(cum[0], 0.0);
        assert_relative_eq!(*cum.last().unwrap(), trapezoid(&vals, 0.5), epsilon = 1e-15);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 2.0 * t * t * t - t * t + 3.0 * t + 1.0;
        let d = |t: f64| 6.0 * t * t - 2.0 * t + 3.0;
        let (t0, h) = (1.25, 0.4);
        let p = CubicPoly::hermite(t0, h, f(t0), f(t0 + h), d(t0), d(t0 + h));
        for s in [0.0, 0.3, 0.77, 1.0] {
            let t = t0 + s * h;
            assert_relative_eq!(p.eval(t), f(t), epsilon = 1e-12);
            assert_relative_eq!(p.deriv(t), d(t), epsilon = 1e-11);
        }
        // ∫ t f'(t) dt against the closed form on a sub-cell.
        let (ta, tb) = (t0 + 0.1 * h, t0 + 0.9 * h);
        let exact = {
            // ∫ t f' = [t f] - ∫ f
            let anti_f =
                |t: f64| 0.5 * t * t * t * t - t * t * t / 3.0 + 1.5 * t * t + t;
            tb * f(tb) - ta * f(ta) - (anti_f(tb) - anti_f(ta))
        };
        assert_relative_eq!(p.integral_tp_deriv(ta, tb, 1), exact, epsilon = 1e-12);
    }

    #[test]
    fn lagrange4_reproduces_cubic() {
        let f = |t: f64| -t * t * t + 4.0 * t * t - t + 0.5;
        let (t0, h) = (-0.3, 0.2);
        let p = CubicPoly::lagrange4(t0, h, [f(t0), f(t0 + h), f(t0 + 2.0 * h), f(t0 + 3.0 * h)]);
        for s in [0.0, 0.5, 1.7, 2.4, 3.0] {
            let t = t0 + s * h;
            assert_relative_eq!(p.eval(t), f(t), epsilon = 1e-12);
        }
        let anti = |t: f64| -0.25 * t * t * t * t + 4.0 * t * t * t / 3.0 - 0.5 * t * t + 0.5 * t;
        let (ta, tb) = (t0 + 0.2 * h, t0 + 2.6 * h);
        assert_relative_eq!(p.integral(ta, tb), anti(tb) - anti(ta), epsilon = 1e-12);
    }

    #[test]
    fn solve_finds_roots() {
        let p = CubicPoly::hermite(0.0, 1.0, -1.0, 1.0, 2.0, 2.0);
        let r = p.solve(0.0, 1.0, 0.0).unwrap();
        assert!(p.eval(r).abs() < 1e-12);
        assert!(p.solve(0.6, 1.0, -0.9).is_none());
    }

    #[test]
    fn max_location_finds_peak() {
        // f(t) = -(t-0.4)^2 + 1 as a Hermite cell.
        let f = |t: f64| 1.0 - (t - 0.4) * (t - 0.4);
        let d = |t: f64| -2.0 * (t - 0.4);
        let p = CubicPoly::hermite(0.0, 1.0, f(0.0), f(1.0), d(0.0), d(1.0));
        let m = p.max_location(0.0, 1.0).unwrap();
        assert_relative_eq!(m, 0.4, epsilon = 1e-10);
    }
}
