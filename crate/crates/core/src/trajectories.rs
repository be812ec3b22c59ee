//! Bohmian-trajectory Monte Carlo estimate of the detection probability.
//!
//! This module is the independent oracle for the running-supremum formula:
//! it never touches the flux pipeline.  Initial positions are drawn from
//! `|Phi_{t0}|^2` by inverse-CDF sampling, paths follow the guidance law
//!
//! ```text
//! dx/dt = v(x, t) = (hbar/m) Im[conj(Phi) dPhi/dx] / |Phi|^2
//! ```
//!
//! with the closed-form Gaussian field (tests pin it against the quadrature
//! route), and `P_hat(t)` counts first crossings of the detector.  Only the
//! first crossing of each path is recorded; 1D Bohmian paths cannot cross
//! each other, so re-entering probability mass never creates new arrivals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::current::{Quantity, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::{integrate_with_crossing, StepControl};
use crate::tolerances;
use crate::wavepacket::{GaussianState, MomentumWavefunction};

/// Guidance velocity field of an analytic Gaussian superposition.
pub struct VelocityField {
    pub state: GaussianState,
    /// Node floor relative to the instantaneous peak density.
    pub node_floor_rel: f64,
}

impl VelocityField {
    pub fn new(state: GaussianState) -> Self {
        VelocityField { state, node_floor_rel: tolerances::NODE_FLOOR_REL }
    }

    fn floor_at(&self, t: f64) -> f64 {
        self.node_floor_rel * self.state.peak_density_bound(t)
    }

    /// Guidance velocity; errors when the density sits below the node floor.
    pub fn velocity(&self, x: f64, t: f64) -> Result<f64> {
        let (val, grad) = self.state.field_and_gradient(x, t);
        let rho = val.norm_sqr();
        let floor = self.floor_at(t);
        if rho <= floor {
            return Err(Error::NodeProximity { x, t, density: rho, floor });
        }
        let u = self.state.units;
        Ok(u.hbar / u.mass * (val.conj() * grad).im / rho)
    }

    /// Velocity with the denominator floored; the flag marks a clamped call.
    pub fn velocity_clamped(&self, x: f64, t: f64) -> (f64, bool) {
        let (val, grad) = self.state.field_and_gradient(x, t);
        let rho = val.norm_sqr();
        let floor = self.floor_at(t);
        let u = self.state.units;
        if rho <= floor {
            (u.hbar / u.mass * (val.conj() * grad).im / floor.max(f64::MIN_POSITIVE), true)
        } else {
            (u.hbar / u.mass * (val.conj() * grad).im / rho, false)
        }
    }
}

/// Quadrature route for the guidance velocity: `Phi` and `dPhi/dx` as single
/// `k` integrals of the sampled state at the point `(x, t)`.
pub fn velocity_from_grid(phi: &MomentumWavefunction, x: f64, t: f64) -> Result<f64> {
    let phi_t = crate::wavepacket::evolve(phi, t);
    let dk = phi_t.grid.spacing();
    let n = phi_t.grid.n_k;
    let mut val = crate::C64::new(0.0, 0.0);
    let mut grad = crate::C64::new(0.0, 0.0);
    for (i, (a, k)) in phi_t.amplitudes.iter().zip(phi_t.grid.points()).enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let ph = crate::C64::new(0.0, k * x).exp();
        val += w * a * ph;
        grad += w * a * ph * crate::C64::new(0.0, k);
    }
    let pref = dk / (2.0 * std::f64::consts::PI).sqrt();
    let val = pref * val;
    let grad = pref * grad;
    let rho = val.norm_sqr();
    if rho <= 0.0 {
        return Err(Error::NodeProximity { x, t, density: rho, floor: 0.0 });
    }
    Ok(phi.units.hbar / phi.units.mass * (val.conj() * grad).im / rho)
}

/// Tabulated `|Phi_{t0}|^2` with piecewise-linear density between samples.
struct TabulatedDensity {
    x_lo: f64,
    dx: f64,
    rho: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    fn build(state: &GaussianState, t0: f64, n_tab: usize) -> Self {
        // Cover every component to 14 sigma at t0.
        let u = state.units;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let tau = t0 + state.time_offset;
        for c in &state.components {
            let center = c.x0 + u.hbar * c.k0 / u.mass * tau;
            let sx0 = 1.0 / (2.0 * c.sigma_k);
            let sx = (sx0 * sx0 + (u.hbar * c.sigma_k * tau / u.mass).powi(2)).sqrt();
            lo = lo.min(center - 14.0 * sx);
            hi = hi.max(center + 14.0 * sx);
        }
        let dx = (hi - lo) / (n_tab - 1) as f64;
        let rho: Vec<f64> = (0..n_tab).map(|i| state.density(lo + dx * i as f64, t0)).collect();
        let mut cdf = Vec::with_capacity(n_tab);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in rho.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            cdf.push(acc);
        }
        TabulatedDensity { x_lo: lo, dx, rho, cdf }
    }

    fn total(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    /// Exact inverse of the piecewise-linear-density CDF.
    fn invert(&self, u: f64) -> f64 {
        let target = u * self.total();
        let mut lo = 0usize;
        let mut hi = self.cdf.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let area = target - self.cdf[lo];
        let r0 = self.rho[lo];
        let r1 = self.rho[lo + 1];
        let slope = (r1 - r0) / self.dx;
        let s = if slope.abs() * self.dx < 1e-14 * (r0 + r1).max(f64::MIN_POSITIVE) {
            if r0 > 0.0 {
                area / r0
            } else {
                0.5 * self.dx
            }
        } else {
            let disc = (r0 * r0 + 2.0 * slope * area).max(0.0);
            (disc.sqrt() - r0) / slope
        };
        self.x_lo + self.dx * lo as f64 + s.clamp(0.0, self.dx)
    }

    fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.x_lo {
            return 0.0;
        }
        let pos = (x - self.x_lo) / self.dx;
        let i = (pos.floor() as usize).min(self.cdf.len() - 2);
        let s = x - (self.x_lo + self.dx * i as f64);
        let r0 = self.rho[i];
        let slope = (self.rho[i + 1] - r0) / self.dx;
        ((self.cdf[i] + r0 * s + 0.5 * slope * s * s) / self.total()).min(1.0)
    }
}

/// Quantum-equilibrium sample of initial positions at `t0`, deterministic in
/// the seed.
pub fn sample_initial_positions(state: &GaussianState, t0: f64, n: usize, seed: u64) -> Vec<f64> {
    let tab = TabulatedDensity::build(state, t0, 16384);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| tab.invert(rng.random::<f64>())).collect()
}

/// Kolmogorov–Smirnov statistic of samples against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Monte Carlo detection ensemble.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    pub t0: f64,
    /// Sorted initial positions.
    pub initial_positions: Vec<f64>,
    pub crossing_times: Vec<Option<f64>>,
    pub final_positions: Vec<f64>,
    pub p_hat: TimeSeries,
    pub stderr: TimeSeries,
    /// Count of adjacent pairs whose final order flipped (1D flow forbids it).
    pub order_violations: usize,
    pub node_failure_fraction: f64,
    pub total_steps: usize,
    /// KS statistic of the initial sample against the tabulated CDF.
    pub ks_initial: f64,
}

/// Integrate `n` trajectories from `tgrid.t_min` to `tgrid.t_max` and count
/// first crossings of the detector at `x = 0` (arrival shifts are already
/// folded into the state).
pub fn monte_carlo_detection(
    state: &GaussianState,
    tgrid: &TimeGrid,
    n: usize,
    seed: u64,
    ctrl: &StepControl,
) -> Result<TrajectoryEnsemble> {
    if n < 100 {
        return Err(Error::invalid(format!("ensemble needs N >= 100, got {n}")));
    }
    let t0 = tgrid.t_min;
    let t_end = tgrid.t_max;
    let tab = TabulatedDensity::build(state, t0, 16384);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut initial: Vec<f64> = (0..n).map(|_| tab.invert(rng.random::<f64>())).collect();
    let mut ks_sample = initial.clone();
    let ks_initial = ks_statistic(&mut ks_sample, |x| tab.cdf_at(x));
    initial.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let field = VelocityField::new(state.clone());
    let rhs = |x: f64, t: f64| field.velocity_clamped(x, t);

    let mut crossing_times = Vec::with_capacity(n);
    let mut final_positions = Vec::with_capacity(n);
    let mut flagged = 0usize;
    let mut total_steps = 0usize;
    for &x0 in &initial {
        let out = integrate_with_crossing(&rhs, x0, t0, t_end, 0.0, ctrl, false);
        crossing_times.push(out.crossing);
        final_positions.push(out.final_x);
        flagged += out.flagged_steps;
        total_steps += out.accepted_steps;
    }
    let node_failure_fraction = if total_steps > 0 { flagged as f64 / total_steps as f64 } else { 0.0 };
    if node_failure_fraction > tolerances::NODE_FAILURE_MAX {
        return Err(Error::ScenarioRejected(format!(
            "node-proximity failures on {:.3}% of steps (limit 0.1%)",
            100.0 * node_failure_fraction
        )));
    }

    let order_violations = final_positions.windows(2).filter(|w| w[1] < w[0]).count();

    let mut crossed: Vec<f64> = crossing_times.iter().flatten().copied().collect();
    crossed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let p_vals: Vec<f64> = tgrid
        .points()
        .map(|t| {
            let k = crossed.partition_point(|&c| c <= t);
            k as f64 / nf
        })
        .collect();
    let se_vals: Vec<f64> = p_vals.iter().map(|&p| (p * (1.0 - p) / nf).sqrt()).collect();

    Ok(TrajectoryEnsemble {
        seed,
        t0,
        initial_positions: initial,
        crossing_times,
        final_positions,
        p_hat: TimeSeries::new(*tgrid, p_vals, Quantity::Detection)?,
        stderr: TimeSeries::new(*tgrid, se_vals, Quantity::Detection)?,
        order_violations,
        node_failure_fraction,
        total_steps,
        ks_initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current::{cumulative_flux, current_series};
    use crate::grid::KGrid;
    use crate::units::Units;
    use crate::wavepacket::GaussianComponent;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian_state(k0: f64, sigma: f64, x0: f64) -> (MomentumWavefunction, GaussianState) {
        let lo = (k0 - 8.0 * sigma).max(1e-3);
        let grid = KGrid::new(lo, k0 + 8.0 * sigma, 1024).unwrap();
        let comps = [GaussianComponent { weight: (1.0, 0.0), k0, sigma_k: sigma, x0 }];
        GaussianState::normalized_on(Units::natural(), grid, &comps, "mc").unwrap()
    }

    #[test]
    fn bulk_velocity_is_de_broglie() {
        let (_, state) = gaussian_state(5.0, 0.1, 0.0);
        let field = VelocityField::new(state);
        for x in [-2.0, 0.0, 1.5] {
            let v = field.velocity(x, 0.0).unwrap();
            assert_relative_eq!(v, 5.0, max_relative = 0.02);
        }
    }

    #[test]
    fn packet_center_velocity() {
        let (_, state) = gaussian_state(5.0, 0.5, 0.0);
        let v = VelocityField::new(state).velocity(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(v, 5.0, epsilon = 0.1);
    }

    #[test]
    fn real_field_has_zero_velocity() {
        // k0 = 0, x0 = 0: Phi is real at t = 0, so the phase gradient vanishes.
        let grid = KGrid::new(-4.0, 4.0, 512).unwrap();
        let comps = [GaussianComponent { weight: (1.0, 0.0), k0: 0.0, sigma_k: 0.5, x0: 0.0 }];
        let (_, state) =
            GaussianState::normalized_on(Units::natural(), grid, &comps, "still").unwrap();
        let v = VelocityField::new(state).velocity(0.3, 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_velocity_matches_quadrature() {
        let (phi, state) = gaussian_state(5.0, 0.5, -20.0);
        let field = VelocityField::new(state);
        for (x, t) in [(-20.0, 0.0), (-18.0, 0.2), (-10.0, 2.0), (0.0, 4.0)] {
            let va = field.velocity(x, t).unwrap();
            let vg = velocity_from_grid(&phi, x, t).unwrap();
            assert_abs_diff_eq!(va, vg, epsilon = 1e-8 * (1.0 + va.abs()));
        }
    }

    #[test]
    fn node_proximity_is_reported() {
        let (_, state) = gaussian_state(5.0, 0.5, 0.0);
        let field = VelocityField::new(state);
        // 40 sigma_x away from the center the density is numerically zero.
        assert!(matches!(field.velocity(-40.0, 0.0), Err(Error::NodeProximity { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let (_, state) = gaussian_state(5.0, 0.5, -20.0);
        let a = sample_initial_positions(&state, 0.0, 500, 42);
        let b = sample_initial_positions(&state, 0.0, 500, 42);
        assert_eq!(a, b);
        let c = sample_initial_positions(&state, 0.0, 500, 43);
        assert_ne!(a, c);
        let n = 10_000usize;
        let s = sample_initial_positions(&state, 0.0, n, 7);
        let mean: f64 = s.iter().sum::<f64>() / n as f64;
        // sigma_x = 1, so the sample mean sits within 3/sqrt(N) of -20.
        assert_abs_diff_eq!(mean, -20.0, epsilon = 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn ks_statistic_below_critical() {
        let (_, state) = gaussian_state(5.0, 0.5, -20.0);
        let tab = TabulatedDensity::build(&state, 0.0, 16384);
        let n = 10_000usize;
        let mut s = sample_initial_positions(&state, 0.0, n, 11);
        let d = ks_statistic(&mut s, |x| tab.cdf_at(x));
        assert!(d < tolerances::KS_CRITICAL_1PCT / (n as f64).sqrt(), "KS = {d}");
    }

    #[test]
    fn ensemble_matches_analytic_detection() {
        let (phi, state) = gaussian_state(5.0, 0.5, -20.0);
        let tg = TimeGrid::new(-4.0, 16.0, 1000).unwrap();
        let j = current_series(&phi, &tg);
        let f = cumulative_flux(&j).unwrap();
        let det = crate::bohm::detection_probability(&f).unwrap();

        let n = 2000usize;
        let ctrl = StepControl::with_local_tol(1e-8, 20.0);
        let ens = monte_carlo_detection(&state, &tg, n, 1234, &ctrl).unwrap();
        assert_eq!(ens.order_violations, 0);
        assert!(ens.node_failure_fraction == 0.0);

        // Compare at detection quantiles 0.1 .. 0.9.
        for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let idx = det.p.values.iter().position(|&p| p >= q).unwrap();
            let t = tg.point(idx);
            let p_ref = det.p.values[idx];
            let p_hat = ens.p_hat.value_at(t);
            let se = (p_ref * (1.0 - p_ref) / n as f64).sqrt();
            assert!(
                (p_hat - p_ref).abs() <= 4.0 * se,
                "P_hat = {p_hat}, P = {p_ref} at t = {t}, 4se = {}",
                4.0 * se
            );
        }
    }

    #[test]
    fn stderr_halves_with_quadruple_n() {
        let (_, state) = gaussian_state(5.0, 0.5, -20.0);
        let tg = TimeGrid::new(-4.0, 16.0, 400).unwrap();
        let ctrl = StepControl::with_local_tol(1e-8, 20.0);
        let small = monte_carlo_detection(&state, &tg, 400, 5, &ctrl).unwrap();
        let large = monte_carlo_detection(&state, &tg, 1600, 5, &ctrl).unwrap();
        // At the median crossing time.
        let idx = small.p_hat.values.iter().position(|&p| p >= 0.5).unwrap();
        let ratio = small.stderr.values[idx] / large.stderr.values[idx];
        assert!((ratio - 2.0).abs() < 0.4, "ratio = {ratio}");
    }
}
