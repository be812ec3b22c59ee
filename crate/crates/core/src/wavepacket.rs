//! Momentum-space states, free evolution and the transform to position space.
//!
//! States are complex amplitudes sampled on a uniform `k` grid.  Everything
//! downstream (currents, densities, moments) is a quadrature over these
//! samples, so the state *is* its grid representation: test states are
//! Gaussian superpositions truncated by the grid, with tail mass below
//! `1e-12` of the total for the bundled scenarios so that closed-form
//! Gaussian results apply at full precision.
//!
//! [`GaussianState`] carries the same superposition in closed form.  The free
//! evolution of a Gaussian component has an exact position-space image
//!
//! ```text
//! Phi_j(x, t) = w_j / sqrt(2 pi) * sqrt(pi / a) * exp(b^2 / (4a) + c)
//! a = 1/(4 sigma^2) + i hbar t / (2m)
//! b = k0/(2 sigma^2) + i (x - x0)
//! c = -k0^2 / (4 sigma^2)
//! ```
//!
//! which the trajectory module uses as a fast, grid-independent velocity
//! field; tests pin it against the quadrature route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{KGrid, XGrid};
use crate::quad::{trapezoid, trapezoid_c};
use crate::units::Units;

pub type C64 = Complex64;

/// One Gaussian component `w * exp(-(k-k0)^2/(4 sigma^2)) * exp(-i k x0)`.
///
/// `x0` is the position-space center of the component at `t = 0`; `sigma_k`
/// is the standard deviation of `|phi|^2` in `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: (f64, f64),
    pub k0: f64,
    pub sigma_k: f64,
    pub x0: f64,
}

impl GaussianComponent {
    pub fn weight_c(&self) -> C64 {
        C64::new(self.weight.0, self.weight.1)
    }

    /// Amplitude of this component at wavenumber `k` (no normalization).
    pub fn amplitude(&self, k: f64) -> C64 {
        let d = k - self.k0;
        let env = (-d * d / (4.0 * self.sigma_k * self.sigma_k)).exp();
        let phase = C64::new(0.0, -k * self.x0).exp();
        self.weight_c() * env * phase
    }
}

fn validate_components(components: &[GaussianComponent]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::invalid("component list is empty"));
    }
    for (j, c) in components.iter().enumerate() {
        if !(c.sigma_k > 0.0) {
            return Err(Error::invalid(format!(
                "component {j}: sigma_k must be > 0, got {}",
                c.sigma_k
            )));
        }
        if !c.k0.is_finite() || !c.x0.is_finite() {
            return Err(Error::invalid(format!("component {j}: non-finite parameters")));
        }
    }
    if components.iter().all(|c| c.weight_c().norm() == 0.0) {
        return Err(Error::DegenerateState("all component weights are zero".into()));
    }
    Ok(())
}

/// Momentum-space wave function on a uniform `k` grid.
#[derive(Debug, Clone)]
pub struct MomentumWavefunction {
    pub units: Units,
    pub grid: KGrid,
    pub amplitudes: Vec<C64>,
    pub label: String,
}

impl MomentumWavefunction {
    pub fn new(units: Units, grid: KGrid, amplitudes: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if amplitudes.len() != grid.n_k {
            return Err(Error::invalid(format!(
                "amplitude count {} does not match grid size {}",
                amplitudes.len(),
                grid.n_k
            )));
        }
        Ok(MomentumWavefunction { units, grid, amplitudes, label: label.into() })
    }

    /// Squared norm `∫ |phi(k)|^2 dk` by trapezoid.
    pub fn norm_sq(&self) -> f64 {
        let dens: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        trapezoid(&dens, self.grid.spacing())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `∫ conj(self) other dk`; both states must share a grid.
    pub fn inner(&self, other: &MomentumWavefunction) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::invalid("inner product requires matching k grids"));
        }
        let prod: Vec<C64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(trapezoid_c(&prod, self.grid.spacing()))
    }

    /// Fraction of `|phi|^2` mass on grid points with `k <= 0`.
    pub fn nonpositive_mass_fraction(&self) -> f64 {
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let dens: Vec<f64> = self
            .amplitudes
            .iter()
            .zip(self.grid.points())
            .map(|(a, k)| if k <= 0.0 { a.norm_sqr() } else { 0.0 })
            .collect();
        trapezoid(&dens, self.grid.spacing()) / total
    }

    pub fn scaled(&self, c: C64) -> MomentumWavefunction {
        let mut out = self.clone();
        for a in &mut out.amplitudes {
            *a *= c;
        }
        out
    }

    /// Pointwise complex conjugate of the amplitudes (the time-reversed state
    /// up to a momentum reflection).
    pub fn conjugated(&self) -> MomentumWavefunction {
        let mut out = self.clone();
        for a in &mut out.amplitudes {
            *a = a.conj();
        }
        out.label = format!("{}*", self.label);
        out
    }

    /// Parity image `phi(-k)` on the reflected grid.
    pub fn parity(&self) -> MomentumWavefunction {
        let grid = KGrid { k_min: -self.grid.k_max, k_max: -self.grid.k_min, n_k: self.grid.n_k };
        let amplitudes: Vec<C64> = self.amplitudes.iter().rev().copied().collect();
        MomentumWavefunction {
            units: self.units,
            grid,
            amplitudes,
            label: format!("{}-mirror", self.label),
        }
    }

    /// `c1 * a + c2 * b` on the shared grid.
    pub fn linear_combination(
        c1: C64,
        a: &MomentumWavefunction,
        c2: C64,
        b: &MomentumWavefunction,
    ) -> Result<MomentumWavefunction> {
        if a.grid != b.grid {
            return Err(Error::invalid("linear combination requires matching k grids"));
        }
        let amplitudes: Vec<C64> = a
            .amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| c1 * x + c2 * y)
            .collect();
        Ok(MomentumWavefunction {
            units: a.units,
            grid: a.grid,
            amplitudes,
            label: format!("mix({}, {})", a.label, b.label),
        })
    }
}

/// Build the superposition of Gaussian components, sampled on `grid`.
///
/// The result is *not* normalized.
pub fn make_gaussian_superposition(
    units: Units,
    grid: KGrid,
    components: &[GaussianComponent],
    label: impl Into<String>,
) -> Result<MomentumWavefunction> {
    validate_components(components)?;
    let amplitudes: Vec<C64> = grid
        .points()
        .map(|k| components.iter().map(|c| c.amplitude(k)).sum())
        .collect();
    MomentumWavefunction::new(units, grid, amplitudes, label)
}

/// Scale to unit norm.
pub fn normalize(phi: &MomentumWavefunction) -> Result<MomentumWavefunction> {
    let n = phi.norm();
    if n <= 0.0 || !n.is_finite() {
        return Err(Error::DegenerateState(format!("cannot normalize state with norm {n}")));
    }
    Ok(phi.scaled(C64::new(1.0 / n, 0.0)))
}

/// Move the arrival point to `x`: multiply by `exp(-i k x)`.
pub fn shift_arrival_point(phi: &MomentumWavefunction, x: f64) -> MomentumWavefunction {
    let mut out = phi.clone();
    for (a, k) in out.amplitudes.iter_mut().zip(phi.grid.points()) {
        *a *= C64::new(0.0, -k * x).exp();
    }
    out
}

/// Free evolution by `t`: multiply by `exp(-i hbar k^2 t / 2m)`.
pub fn evolve(phi: &MomentumWavefunction, t: f64) -> MomentumWavefunction {
    let alpha = phi.units.hbar * t / (2.0 * phi.units.mass);
    let mut out = phi.clone();
    for (a, k) in out.amplitudes.iter_mut().zip(phi.grid.points()) {
        *a *= C64::new(0.0, -alpha * k * k).exp();
    }
    out
}

/// Position-space field at a fixed time.
#[derive(Debug, Clone)]
pub struct PositionField {
    pub x_grid: XGrid,
    pub values: Vec<C64>,
    pub t: f64,
}

impl PositionField {
    /// `∫ |Phi|^2 dx` by trapezoid.
    pub fn norm_sq(&self) -> f64 {
        let dens: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        trapezoid(&dens, self.x_grid.spacing())
    }

    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Fourier transform to position space: `Phi(x) = (2 pi)^{-1/2} ∫ e^{ikx} phi(k) dk`.
///
/// Fails with a resolution error unless `dx * |k|_max < pi`.
pub fn to_position(phi: &MomentumWavefunction, x_grid: &XGrid) -> Result<PositionField> {
    let dx_kmax = x_grid.spacing() * phi.grid.abs_k_max();
    if !(dx_kmax < std::f64::consts::PI) {
        return Err(Error::Resolution { dx_kmax });
    }
    let dk = phi.grid.spacing();
    let pref = dk / (2.0 * std::f64::consts::PI).sqrt();
    let n_k = phi.grid.n_k;
    let mut values = Vec::with_capacity(x_grid.n_x);
    for x in x_grid.points() {
        // e^{ikx} by phase recurrence over the uniform k grid; the
        // accumulated rounding (~n_k eps) sits far below the 1e-8 Parseval
        // budget and saves an exp per (x, k) pair.
        let step = C64::new(0.0, dk * x).exp();
        let mut phase = C64::new(0.0, phi.grid.k_min * x).exp();
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in phi.amplitudes.iter().enumerate() {
            let w = if i == 0 || i == n_k - 1 { 0.5 } else { 1.0 };
            acc += w * a * phase;
            phase *= step;
        }
        values.push(pref * acc);
    }
    Ok(PositionField { x_grid: *x_grid, values, t: 0.0 })
}

/// Evolve to time `t`, then transform; the field records `t`.
pub fn to_position_at(phi: &MomentumWavefunction, x_grid: &XGrid, t: f64) -> Result<PositionField> {
    let mut field = to_position(&evolve(phi, t), x_grid)?;
    field.t = t;
    Ok(field)
}

/// Closed-form Gaussian superposition used as an analytic, grid-free state.
///
/// Carries the grid-normalization scale so that the analytic field matches
/// the sampled state to the truncated-tail level.  `time_offset` folds an
/// `evolve` into the evaluation time; arrival shifts fold into `x0`.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub units: Units,
    pub components: Vec<GaussianComponent>,
    pub scale: f64,
    pub time_offset: f64,
}

impl GaussianState {
    /// Build the analytic state and its grid sampling, normalized on the grid.
    pub fn normalized_on(
        units: Units,
        grid: KGrid,
        components: &[GaussianComponent],
        label: impl Into<String>,
    ) -> Result<(MomentumWavefunction, GaussianState)> {
        let raw = make_gaussian_superposition(units, grid, components, label)?;
        let n = raw.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::DegenerateState("superposition has zero norm on this grid".into()));
        }
        let phi = raw.scaled(C64::new(1.0 / n, 0.0));
        let state = GaussianState {
            units,
            components: components.to_vec(),
            scale: 1.0 / n,
            time_offset: 0.0,
        };
        Ok((phi, state))
    }

    pub fn shift_arrival_point(&self, x: f64) -> GaussianState {
        let mut out = self.clone();
        for c in &mut out.components {
            c.x0 += x;
        }
        out
    }

    pub fn evolve_by(&self, s: f64) -> GaussianState {
        let mut out = self.clone();
        out.time_offset += s;
        out
    }

    fn component_field(&self, c: &GaussianComponent, x: f64, tau: f64) -> (C64, C64) {
        let s2 = c.sigma_k * c.sigma_k;
        let a = C64::new(1.0 / (4.0 * s2), self.units.hbar * tau / (2.0 * self.units.mass));
        let b = C64::new(c.k0 / (2.0 * s2), x - c.x0);
        let cc = -c.k0 * c.k0 / (4.0 * s2);
        let pref = (std::f64::consts::PI / a).sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        let val = c.weight_c() * pref * (b * b / (4.0 * a) + cc).exp();
        let grad = C64::new(0.0, 1.0) * b / (2.0 * a) * val;
        (val, grad)
    }

    /// `Phi(x, t)` and `d/dx Phi(x, t)` in closed form.
    pub fn field_and_gradient(&self, x: f64, t: f64) -> (C64, C64) {
        let tau = t + self.time_offset;
        let mut val = C64::new(0.0, 0.0);
        let mut grad = C64::new(0.0, 0.0);
        for c in &self.components {
            let (v, g) = self.component_field(c, x, tau);
            val += v;
            grad += g;
        }
        (self.scale * val, self.scale * grad)
    }

    pub fn density(&self, x: f64, t: f64) -> f64 {
        self.field_and_gradient(x, t).0.norm_sqr()
    }

    /// Probability current `J(x, t) = (hbar/m) Im[conj(Phi) dPhi/dx]`.
    pub fn current(&self, x: f64, t: f64) -> f64 {
        let (v, g) = self.field_and_gradient(x, t);
        self.units.hbar / self.units.mass * (v.conj() * g).im
    }

    /// Upper bound on the peak density at time `t` (sum of component peaks).
    pub fn peak_density_bound(&self, t: f64) -> f64 {
        let tau = t + self.time_offset;
        let mut amp = 0.0;
        for c in &self.components {
            let s2 = c.sigma_k * c.sigma_k;
            let a = C64::new(1.0 / (4.0 * s2), self.units.hbar * tau / (2.0 * self.units.mass));
            let pref = (std::f64::consts::PI / a).norm().sqrt() / (2.0 * std::f64::consts::PI).sqrt();
            amp += c.weight_c().norm() * pref;
        }
        (self.scale * amp).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn single_gaussian() -> (MomentumWavefunction, GaussianState) {
        let units = Units::natural();
        let grid = KGrid::new(1.0, 9.0, 2048).unwrap();
        let comps = [GaussianComponent { weight: (1.0, 0.0), k0: 5.0, sigma_k: 0.5, x0: -20.0 }];
        GaussianState::normalized_on(units, grid, &comps, "gauss").unwrap()
    }

    #[test]
    fn superposition_matches_closed_form_pointwise() {
        let units = Units::natural();
        let grid = KGrid::new(1.0, 9.0, 64).unwrap();
        let comps = [GaussianComponent { weight: (1.0, 0.0), k0: 5.0, sigma_k: 0.5, x0: -20.0 }];
        let phi = make_gaussian_superposition(units, grid, &comps, "g").unwrap();
        for (i, k) in grid.points().enumerate() {
            let d = k - 5.0;
            let expect = (-d * d / 1.0).exp() * C64::new(0.0, 20.0 * k).exp();
            assert_abs_diff_eq!(phi.amplitudes[i].re, expect.re, epsilon = 1e-14);
            assert_abs_diff_eq!(phi.amplitudes[i].im, expect.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn empty_components_is_invalid_input() {
        let err = make_gaussian_superposition(
            Units::natural(),
            KGrid::new(1.0, 9.0, 64).unwrap(),
            &[],
            "empty",
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn zero_weights_are_degenerate() {
        let comps = [GaussianComponent { weight: (0.0, 0.0), k0: 5.0, sigma_k: 0.5, x0: 0.0 }];
        let err = make_gaussian_superposition(
            Units::natural(),
            KGrid::new(1.0, 9.0, 64).unwrap(),
            &comps,
            "zero",
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateState(_)));
    }

    #[test]
    fn normalize_scale_invariance_and_idempotence() {
        let (phi, _) = single_gaussian();
        let scaled = phi.scaled(C64::new(3.0, 0.0));
        let n1 = normalize(&scaled).unwrap();
        let n2 = normalize(&phi).unwrap();
        for (a, b) in n1.amplitudes.iter().zip(&n2.amplitudes) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
        }
        assert_relative_eq!(n1.norm_sq(), 1.0, epsilon = 1e-12);
        // Already normalized: unchanged within 1e-15.
        let again = normalize(&n2).unwrap();
        for (a, b) in again.amplitudes.iter().zip(&n2.amplitudes) {
            assert!((a - b).norm() <= 1e-15 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn normalize_zero_state_fails() {
        let grid = KGrid::new(1.0, 9.0, 64).unwrap();
        let zero = MomentumWavefunction::new(
            Units::natural(),
            grid,
            vec![C64::new(0.0, 0.0); 64],
            "null",
        )
        .unwrap();
        assert!(matches!(normalize(&zero), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn shift_is_pure_phase_and_invertible() {
        let (phi, _) = single_gaussian();
        let shifted = shift_arrival_point(&phi, 3.7);
        for (a, b) in shifted.amplitudes.iter().zip(&phi.amplitudes) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-15);
        }
        let back = shift_arrival_point(&shifted, -3.7);
        for (a, b) in back.amplitudes.iter().zip(&phi.amplitudes) {
            assert!((a - b).norm() <= 1e-15 * (1.0 + b.norm()));
        }
        let same = shift_arrival_point(&phi, 0.0);
        for (a, b) in same.amplitudes.iter().zip(&phi.amplitudes) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn evolve_is_unitary_group() {
        let (phi, _) = single_gaussian();
        for t in [-10.0, -3.0, 0.0, 1.0, 10.0] {
            let ev = evolve(&phi, t);
            assert_abs_diff_eq!(ev.norm(), phi.norm(), epsilon = 1e-14);
        }
        let e0 = evolve(&phi, 0.0);
        for (a, b) in e0.amplitudes.iter().zip(&phi.amplitudes) {
            assert_eq!(a, b);
        }
        let one = evolve(&evolve(&phi, 1.3), 2.4);
        let two = evolve(&phi, 3.7);
        for (a, b) in one.amplitudes.iter().zip(&two.amplitudes) {
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn position_field_matches_gaussian_closed_form() {
        let (phi, state) = single_gaussian();
        let xg = XGrid::new(-40.0, 0.0, 1024).unwrap();
        let field = to_position(&phi, &xg).unwrap();
        // |Phi_0|^2 is a Gaussian centered at -20 with sigma_x = 1.
        let sigma_x: f64 = 1.0;
        let peak = 1.0 / (2.0 * std::f64::consts::PI * sigma_x * sigma_x).sqrt();
        for (i, x) in xg.points().enumerate() {
            let expect = peak * (-(x + 20.0) * (x + 20.0) / (2.0 * sigma_x * sigma_x)).exp();
            assert_abs_diff_eq!(field.values[i].norm_sqr(), expect, epsilon = 1e-9);
            // Closed-form field agrees with the quadrature route pointwise.
            let analytic = state.field_and_gradient(x, 0.0).0;
            assert!((field.values[i] - analytic).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval_holds() {
        let (phi, _) = single_gaussian();
        let xg = XGrid::new(-60.0, 20.0, 4096).unwrap();
        let field = to_position(&phi, &xg).unwrap();
        assert_abs_diff_eq!(field.norm_sq(), phi.norm_sq(), epsilon = 1e-8);
    }

    #[test]
    fn evolved_packet_center_moves_ballistically() {
        let (phi, _) = single_gaussian();
        let xg = XGrid::new(-30.0, 30.0, 4096).unwrap();
        let field = to_position_at(&phi, &xg, 4.0).unwrap();
        let dens = field.densities();
        let dx = xg.spacing();
        let mass = trapezoid(&dens, dx);
        let weighted: Vec<f64> =
            dens.iter().zip(xg.points()).map(|(d, x)| d * x).collect();
        let center = trapezoid(&weighted, dx) / mass;
        // x = -20 + (hbar k0 / m) * 4 = 0 within 0.05.
        assert_abs_diff_eq!(center, 0.0, epsilon = 0.05);
    }

    #[test]
    fn undersampled_x_grid_is_rejected() {
        let (phi, _) = single_gaussian();
        let xg = XGrid::new(-400.0, 400.0, 64).unwrap();
        assert!(matches!(to_position(&phi, &xg), Err(Error::Resolution { .. })));
    }

    #[test]
    fn analytic_state_tracks_evolution_and_shift() {
        let (phi, state) = single_gaussian();
        let shifted = shift_arrival_point(&phi, -1.5);
        let sstate = state.shift_arrival_point(-1.5);
        let xg = XGrid::new(-25.0, -15.0, 256).unwrap();
        let f1 = to_position_at(&shifted, &xg, 0.7).unwrap();
        let evolved_state = sstate.evolve_by(0.7);
        for (i, x) in xg.points().enumerate() {
            let v = evolved_state.field_and_gradient(x, 0.0).0;
            assert!((f1.values[i] - v).norm() < 1e-9, "mismatch at x = {x}");
        }
    }

    #[test]
    fn right_mover_tail_mass_is_negligible() {
        let (phi, _) = single_gaussian();
        assert!(phi.nonpositive_mass_fraction() < 1e-12);
        // Analytic mass below the grid: erfc(8/sqrt(2))/2 < 1e-12 of total.
        let lost = 1.0 - phi.norm_sq() / phi.norm_sq();
        assert!(lost.abs() < 1e-12);
    }
}
