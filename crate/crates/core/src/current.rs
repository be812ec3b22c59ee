//! Probability current at the arrival point, cumulative flux, backflow scan.
//!
//! The current at `x = 0` of a state `phi` (arrival point already folded in
//! by `shift_arrival_point`) has the factorized form
//!
//! ```text
//! J0(phi) = (hbar / 2 pi m) * Re[ conj(I0) * I1 ],   I0 = ∫ phi dk,  I1 = ∫ k phi dk
//! ```
//!
//! equivalent to the double integral `(hbar/4 pi m) ∬ (k+l) conj(phi(l)) phi(k)`:
//! splitting `(k+l)` gives `conj(I0) I1 + conj(I1) I0 = 2 Re[conj(I0) I1]`.
//! Both routes are implemented; the `O(n_k^2)` double sum stays as the
//! cross-check path for small grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad::{cumulative_trapezoid, simpson, CubicPoly};
use crate::tolerances;
use crate::wavepacket::{evolve, to_position_at, MomentumWavefunction, C64};
use crate::XGrid;

/// What a [`TimeSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Current,
    Flux,
    Detection,
    BohmDensity,
    KijowskiDensity,
}

/// Real values sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub quantity: Quantity,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>, quantity: Quantity) -> Result<Self> {
        if values.len() != grid.n_t {
            return Err(Error::invalid(format!(
                "series length {} does not match time grid size {}",
                values.len(),
                grid.n_t
            )));
        }
        Ok(TimeSeries { grid, values, quantity })
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Linear interpolation between samples (clamped at the ends).
    pub fn value_at(&self, t: f64) -> f64 {
        let dt = self.spacing();
        let pos = (t - self.grid.t_min) / dt;
        if pos <= 0.0 {
            return self.values[0];
        }
        let last = (self.grid.n_t - 1) as f64;
        if pos >= last {
            return *self.values.last().unwrap();
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Open interval `]a, b[` of times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

/// Sorted, pairwise disjoint intervals.
#[derive(Debug, Clone, Default)]
pub struct IntervalList(Vec<Interval>);

impl IntervalList {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        intervals.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
        for w in intervals.windows(2) {
            if w[0].b > w[1].a {
                return Err(Error::invalid(format!(
                    "intervals ]{}, {}[ and ]{}, {}[ overlap",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        if intervals.iter().any(|iv| !(iv.a < iv.b)) {
            return Err(Error::invalid("interval with a >= b"));
        }
        Ok(IntervalList(intervals))
    }

    pub fn empty() -> Self {
        IntervalList(Vec::new())
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.0.iter().map(|iv| iv.b - iv.a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.0.iter().any(|iv| iv.a < t && t < iv.b)
    }
}

fn current_prefactor(phi: &MomentumWavefunction) -> f64 {
    phi.units.hbar / (2.0 * std::f64::consts::PI * phi.units.mass)
}

/// Trapezoid moments `I0 = ∫ phi dk` and `I1 = ∫ k phi dk` of the state as-is.
fn k_moments(phi: &MomentumWavefunction) -> (C64, C64) {
    let n = phi.grid.n_k;
    let dk = phi.grid.spacing();
    let mut i0 = C64::new(0.0, 0.0);
    let mut i1 = C64::new(0.0, 0.0);
    for (i, (a, k)) in phi.amplitudes.iter().zip(phi.grid.points()).enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        i0 += w * a;
        i1 += w * k * a;
    }
    (dk * i0, dk * i1)
}

/// Current at the arrival point at time `t`, factorized single-integral form.
pub fn current_at_origin(phi: &MomentumWavefunction, t: f64) -> f64 {
    let phi_t = evolve(phi, t);
    let (i0, i1) = k_moments(&phi_t);
    current_prefactor(phi) * (i0.conj() * i1).re
}

/// Same quantity through the `O(n_k^2)` double integral
/// `(hbar/4 pi m) ∬ (k+l) conj(phi(l)) phi(k) dk dl`; cross-check path for
/// grids up to a few hundred points.
pub fn current_at_origin_direct(phi: &MomentumWavefunction, t: f64) -> f64 {
    let phi_t = evolve(phi, t);
    let n = phi_t.grid.n_k;
    let dk = phi_t.grid.spacing();
    let ks: Vec<f64> = phi_t.grid.points().collect();
    let mut sum = 0.0;
    for i in 0..n {
        let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        for j in 0..n {
            let wj = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let z = phi_t.amplitudes[j].conj() * phi_t.amplitudes[i];
            sum += wi * wj * (ks[i] + ks[j]) * z.re;
        }
    }
    phi.units.hbar / (4.0 * std::f64::consts::PI * phi.units.mass) * dk * dk * sum
}

/// `I0(t) = ∫ phi_t dk` and `I1(t) = ∫ k phi_t dk` over a time grid.
///
/// Both are linear in the state, which lets superposition scans assemble the
/// current of any mixture from the moments of its two ingredients.
pub(crate) fn k_moment_series(
    phi: &MomentumWavefunction,
    tgrid: &TimeGrid,
) -> (Vec<C64>, Vec<C64>) {
    let n = phi.grid.n_k;
    let dk = phi.grid.spacing();
    let alpha = phi.units.hbar / (2.0 * phi.units.mass);
    let ks: Vec<f64> = phi.grid.points().collect();
    let mut m0 = Vec::with_capacity(tgrid.n_t);
    let mut m1 = Vec::with_capacity(tgrid.n_t);
    for t in tgrid.points() {
        let mut i0 = C64::new(0.0, 0.0);
        let mut i1 = C64::new(0.0, 0.0);
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let a = phi.amplitudes[i] * C64::new(0.0, -alpha * ks[i] * ks[i] * t).exp();
            i0 += w * a;
            i1 += w * ks[i] * a;
        }
        m0.push(dk * i0);
        m1.push(dk * i1);
    }
    (m0, m1)
}

/// Current sampled over a time grid.
pub fn current_series(phi: &MomentumWavefunction, tgrid: &TimeGrid) -> TimeSeries {
    let n = phi.grid.n_k;
    let dk = phi.grid.spacing();
    let pref = current_prefactor(phi);
    let alpha = phi.units.hbar / (2.0 * phi.units.mass);
    let ks: Vec<f64> = phi.grid.points().collect();
    let k2: Vec<f64> = ks.iter().map(|k| k * k).collect();
    let values: Vec<f64> = tgrid
        .points()
        .map(|t| {
            let mut i0 = C64::new(0.0, 0.0);
            let mut i1 = C64::new(0.0, 0.0);
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                let a = phi.amplitudes[i] * C64::new(0.0, -alpha * k2[i] * t).exp();
                i0 += w * a;
                i1 += w * ks[i] * a;
            }
            pref * dk * dk * (i0.conj() * i1).re
        })
        .collect();
    TimeSeries { grid: *tgrid, values, quantity: Quantity::Current }
}

/// Cumulative flux `f(t) = ∫_{t_min}^t J ds`, anchored to zero at `t_min`.
///
/// Rejects series whose endpoints have not decayed: the anchor stands in for
/// the `t -> -infinity` limit and is meaningless while the packet still
/// crosses the window edge.
pub fn cumulative_flux(j: &TimeSeries) -> Result<TimeSeries> {
    cumulative_flux_with_decay_tol(j, tolerances::ENDPOINT_DECAY)
}

pub fn cumulative_flux_with_decay_tol(j: &TimeSeries, decay_tol: f64) -> Result<TimeSeries> {
    let first = j.values.first().copied().unwrap_or(0.0);
    let last = j.values.last().copied().unwrap_or(0.0);
    if first.abs() > decay_tol || last.abs() > decay_tol {
        return Err(Error::GridCoverage(format!(
            "current has not decayed at the window ends: |J(t_min)| = {:.3e}, |J(t_max)| = {:.3e}, tol = {:.1e}",
            first.abs(),
            last.abs(),
            decay_tol
        )));
    }
    let values = cumulative_trapezoid(&j.values, j.spacing());
    Ok(TimeSeries { grid: j.grid, values, quantity: Quantity::Flux })
}

/// Probability mass on `x > 0` at time `t`: `∫_0^∞ |Phi_t|^2 dx`.
///
/// Composite-Simpson in `x`; the cell containing `x = 0` is handled by a
/// local cubic so the detector need not sit on a grid point.
pub fn flux_via_position(phi: &MomentumWavefunction, t: f64, x_grid: &XGrid) -> Result<f64> {
    let field = to_position_at(phi, x_grid, t)?;
    let dens = field.densities();
    let peak = dens.iter().fold(0.0f64, |m, &d| m.max(d));
    let edge = dens[0].max(*dens.last().unwrap());
    if peak > 0.0 && edge > tolerances::SUPPORT_LEAK_REL * peak {
        return Err(Error::GridCoverage(format!(
            "position support leaks beyond the x grid: edge density {:.3e} vs peak {:.3e}",
            edge, peak
        )));
    }
    let dx = x_grid.spacing();
    let n = x_grid.n_x;
    if x_grid.x_min >= 0.0 {
        return Ok(simpson(&dens, dx));
    }
    if x_grid.x_max <= 0.0 {
        return Ok(0.0);
    }
    // First sample at or right of the detector.
    let split = x_grid.points().position(|x| x >= 0.0).unwrap();
    let x_split = x_grid.point(split);
    let mut total = simpson(&dens[split..], dx);
    if x_split > 0.0 && split > 0 {
        // Partial cell [0, x_split] through a local cubic in the density.
        let lo = split.saturating_sub(1).min(n - 4).max(0);
        let cube = CubicPoly::lagrange4(
            x_grid.point(lo),
            dx,
            [dens[lo], dens[lo + 1], dens[lo + 2], dens[lo + 3]],
        );
        total += cube.integral(0.0, x_split);
    }
    Ok(total)
}

/// Maximal intervals on which `J < -threshold`, endpoints by linear
/// interpolation between samples.
pub fn backflow_intervals(j: &TimeSeries, threshold: f64) -> IntervalList {
    assert!(threshold >= 0.0, "backflow threshold must be >= 0");
    let level = -threshold;
    let v = &j.values;
    let n = v.len();
    let dt = j.spacing();
    let t_of = |i: usize| j.grid.point(i);
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for i in 0..n {
        let below = v[i] < level;
        match (below, open) {
            (true, None) => {
                let a = if i == 0 {
                    t_of(0)
                } else {
                    // crossing of J = level inside [i-1, i]
                    let frac = (level - v[i - 1]) / (v[i] - v[i - 1]);
                    t_of(i - 1) + frac * dt
                };
                open = Some(a);
            }
            (false, Some(a)) => {
                let frac = (level - v[i - 1]) / (v[i] - v[i - 1]);
                let b = t_of(i - 1) + frac * dt;
                if b > a {
                    out.push(Interval { a, b });
                }
                open = None;
            }
            _ => {}
        }
    }
    if let Some(a) = open {
        let b = t_of(n - 1);
        if b > a {
            out.push(Interval { a, b });
        }
    }
    IntervalList::new(out).expect("constructed intervals are sorted and disjoint")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::KGrid;
    use crate::units::Units;
    use crate::wavepacket::{normalize, GaussianComponent, GaussianState, MomentumWavefunction};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn crossing_gaussian(n_k: usize) -> MomentumWavefunction {
        let grid = KGrid::new(1.0, 9.0, n_k).unwrap();
        let comps = [GaussianComponent { weight: (1.0, 0.0), k0: 5.0, sigma_k: 0.5, x0: 0.0 }];
        GaussianState::normalized_on(Units::natural(), grid, &comps, "crossing").unwrap().0
    }

    fn random_state(seed: u64, n_k: usize) -> MomentumWavefunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = KGrid::new(0.5, 6.5, n_k).unwrap();
        let amps: Vec<C64> = (0..n_k)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let phi = MomentumWavefunction::new(Units::natural(), grid, amps, "random").unwrap();
        normalize(&phi).unwrap()
    }

    #[test]
    fn factorized_matches_double_integral() {
        for (seed, n_k) in [(1u64, 64usize), (2, 128), (3, 128), (4, 256)] {
            let phi = random_state(seed, n_k);
            for t in [0.0, 0.4, -1.3] {
                let fast = current_at_origin(&phi, t);
                let slow = current_at_origin_direct(&phi, t);
                assert_abs_diff_eq!(fast, slow, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn crossing_packet_has_positive_current() {
        let phi = crossing_gaussian(1024);
        assert!(current_at_origin(&phi, 0.0) > 0.0);
    }

    #[test]
    fn gaussian_current_is_nonnegative_and_decays() {
        let phi = crossing_gaussian(1024);
        let tg = TimeGrid::new(-12.0, 12.0, 600).unwrap();
        let j = current_series(&phi, &tg);
        assert!(j.values.iter().all(|&v| v >= -1e-12));
        assert!(j.values[0].abs() < 1e-10);
        assert!(j.values.last().unwrap().abs() < 1e-10);
    }

    #[test]
    fn real_amplitude_series_is_time_symmetric() {
        // x0 = 0 and real weights give a PT-symmetric state: J(-t) = J(t),
        // which is also the current of the conjugated state.
        let phi = crossing_gaussian(512);
        for t in [0.3, 1.1, 2.6] {
            let fwd = current_at_origin(&phi, t);
            let bwd = current_at_origin(&phi, -t);
            assert_abs_diff_eq!(fwd, bwd, epsilon = 1e-12);
            let conj_eval = current_at_origin(&phi.conjugated(), t);
            assert_abs_diff_eq!(bwd, conj_eval, epsilon = 1e-12);
        }
    }

    #[test]
    fn flux_reaches_one_for_right_mover() {
        let phi = crossing_gaussian(1024);
        let tg = TimeGrid::new(-14.0, 14.0, 1400).unwrap();
        let j = current_series(&phi, &tg);
        let f = cumulative_flux(&j).unwrap();
        assert_eq!(f.values[0], 0.0);
        assert_abs_diff_eq!(*f.values.last().unwrap(), 1.0, epsilon = 1e-6);
        assert!(f.values.iter().all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v)));
    }

    #[test]
    fn zero_current_gives_zero_flux() {
        let tg = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let j = TimeSeries::new(tg, vec![0.0; 64], Quantity::Current).unwrap();
        let f = cumulative_flux(&j).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flux_rejects_uncovered_transit() {
        let phi = crossing_gaussian(512);
        // Window ends mid-transit: current at the edge is order one.
        let tg = TimeGrid::new(-1.0, 1.0, 64).unwrap();
        let j = current_series(&phi, &tg);
        assert!(matches!(cumulative_flux(&j), Err(Error::GridCoverage(_))));
    }

    #[test]
    fn position_flux_matches_time_flux() {
        let phi = crossing_gaussian(1024);
        let tg = TimeGrid::new(-14.0, 14.0, 1400).unwrap();
        let j = current_series(&phi, &tg);
        let f = cumulative_flux(&j).unwrap();
        let xg = XGrid::new(-80.0, 80.0, 4001).unwrap();
        for t in [-2.0, 0.0, 1.5] {
            let p = flux_via_position(&phi, t, &xg).unwrap();
            assert_abs_diff_eq!(p, f.value_at(t), epsilon = 1e-6);
        }
    }

    #[test]
    fn half_line_localization() {
        let phi = crossing_gaussian(1024);
        let xg = XGrid::new(-120.0, 120.0, 4001).unwrap();
        assert!(flux_via_position(&phi, -12.0, &xg).unwrap() < 0.01);
        assert!(flux_via_position(&phi, 12.0, &xg).unwrap() > 0.99);
    }

    #[test]
    fn backflow_scan_edge_cases() {
        let tg = TimeGrid::new(0.0, 1.0, 101).unwrap();
        let dt = tg.spacing();
        // A dip below zero between samples 40 and 60.
        let vals: Vec<f64> = (0..101)
            .map(|i| {
                let t = i as f64 * dt;
                0.2 - 0.5 * (-(t - 0.5) * (t - 0.5) / 0.002).exp()
            })
            .collect();
        let j = TimeSeries::new(tg, vals, Quantity::Current).unwrap();
        let iv = backflow_intervals(&j, 1e-10);
        assert_eq!(iv.len(), 1);
        let iv0 = iv.as_slice()[0];
        assert!(iv0.a < 0.5 && 0.5 < iv0.b);
        // Threshold larger than |min J| gives nothing.
        assert!(backflow_intervals(&j, 1.0).is_empty());
        // Nonnegative series gives nothing.
        let pos = TimeSeries::new(tg, vec![0.3; 101], Quantity::Current).unwrap();
        assert!(backflow_intervals(&pos, 1e-10).is_empty());
    }
}
