//! Bohmian detection probability and arrival density.
//!
//! The detection probability is the two-term running supremum
//!
//! ```text
//! P(t) = sup{ f(s) | s <= t }  +  sup{ -f(s) | s <= t }
//! ```
//!
//! (each supremum floored at the `t -> -infinity` limit 0), and the arrival
//! density is the current gated by the cutoff `chi`:
//!
//! ```text
//! B(t) = [ J(t) chi(f(t) - sup f)  -  J(t) chi(-f(t) - sup(-f)) ] / P(inf)
//! ```
//!
//! `chi(0) = 1, chi(s != 0) = 0` compares reals for exact equality, which is
//! meaningless on floats; the active set used here is
//! `{ t : sup - f <= tol }` with `tol` small relative to `max f`.  The gap
//! set `Delta_<` where the cutoff kills the density is a disjoint union of
//! open intervals `]a, b[` with `f(a) = f(b)`; endpoints and the held
//! supremum level are refined with local cubics because everything at the
//! 1e-6 scale — the unit integral of `B`, its first moment, and the identity
//!
//! ```text
//! t_mean_K - t_mean_B = - ∫_{Delta_<} (f(t) - f(a)) dt
//! ```
//!
//! — hinges on them.  The identity is checked through two deliberately
//! different quadratures: moments integrate `t J(t)` with per-cell Hermite
//! models (values + derivatives), while the flux-level route integrates `f`
//! itself with Simpson and value-only cubics.

use serde::Serialize;

use crate::current::{current_series, Interval, IntervalList, Quantity, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kijowski::mean_from_current;
use crate::quad::{simpson, CubicPoly};
use crate::tolerances;
use crate::wavepacket::MomentumWavefunction;

/// Running suprema of `f` and `-f`, and their sum `P`.
#[derive(Debug, Clone)]
pub struct DetectionCurve {
    pub p: TimeSeries,
    pub sup_plus: TimeSeries,
    pub sup_minus: TimeSeries,
}

impl DetectionCurve {
    pub fn p_infinity(&self) -> f64 {
        *self.p.values.last().unwrap()
    }
}

/// Running suprema of a cumulative flux with `f(t_min) = 0`.
pub fn detection_probability(f: &TimeSeries) -> Result<DetectionCurve> {
    if f.values.first().copied().unwrap_or(0.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "detection probability needs f(t_min) = 0, got {:.3e}",
            f.values[0]
        )));
    }
    let n = f.values.len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for &v in &f.values {
        hi = hi.max(v);
        lo = lo.max(-v);
        plus.push(hi);
        minus.push(lo);
    }
    let p: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a + b).collect();
    Ok(DetectionCurve {
        p: TimeSeries::new(f.grid, p, Quantity::Detection)?,
        sup_plus: TimeSeries::new(f.grid, plus, Quantity::Detection)?,
        sup_minus: TimeSeries::new(f.grid, minus, Quantity::Detection)?,
    })
}

/// One gap of the running supremum: an interval on which the series sits more
/// than `tol` below its held maximum `level`.
#[derive(Debug, Clone, Copy)]
pub struct SupremumGap {
    pub a: f64,
    /// `None` when the series never recovers before the window ends.
    pub b: Option<f64>,
    /// Refined held supremum; `f(a) = f(b) = level - tol`.
    pub level: f64,
    /// First and last sample index strictly inside the gap.
    pub first_inside: usize,
    pub last_inside: usize,
}

impl SupremumGap {
    pub fn end_or(&self, t_max: f64) -> f64 {
        self.b.unwrap_or(t_max)
    }
}

/// How gap endpoints are refined between samples.
enum CellModel<'a> {
    /// Cubic Hermite from values and the derivative series.
    Hermite(&'a [f64]),
    /// Value-only cubic through four neighbouring samples.
    Values,
}

fn cell_poly(g: &[f64], model: &CellModel, grid: &TimeGrid, cell: usize) -> CubicPoly {
    let dt = grid.spacing();
    match model {
        CellModel::Hermite(deriv) => CubicPoly::hermite(
            grid.point(cell),
            dt,
            g[cell],
            g[cell + 1],
            deriv[cell],
            deriv[cell + 1],
        ),
        CellModel::Values => {
            let lo = cell.saturating_sub(1).min(g.len() - 4);
            CubicPoly::lagrange4(grid.point(lo), dt, [g[lo], g[lo + 1], g[lo + 2], g[lo + 3]])
        }
    }
}

/// Scan a series for running-supremum gaps deeper than `tol`.
///
/// The held level is refined to the local maximum of the cell model (the
/// sampled maximum undershoots a smooth peak by `O(dt^2)`, which would leak
/// straight into the gap integrals), and both endpoints are refined to
/// `g = level - tol`.
fn supremum_gaps(g: &[f64], model: CellModel, grid: &TimeGrid, tol: f64) -> Vec<SupremumGap> {
    assert!(tol > 0.0, "cutoff tolerance must be positive");
    let n = g.len();
    let mut gaps = Vec::new();
    let mut level = g[0];
    let mut peak_t = grid.point(0);
    let mut argmax = 0usize;
    let mut open: Option<(f64, f64, usize)> = None; // (a, level, first_inside)

    for i in 0..n {
        match open {
            None => {
                if g[i] > level {
                    level = g[i];
                    peak_t = grid.point(i);
                    argmax = i;
                }
                if level - g[i] > tol {
                    // Refine the peak in the cells flanking the sampled argmax.
                    let mut best = (level, peak_t);
                    for cell in [argmax.saturating_sub(1), argmax] {
                        if cell + 1 >= n {
                            continue;
                        }
                        let poly = cell_poly(g, &model, grid, cell);
                        if let Some(tm) = poly.max_location(grid.point(cell), grid.point(cell + 1))
                        {
                            let vm = poly.eval(tm);
                            if vm > best.0 {
                                best = (vm, tm);
                            }
                        }
                    }
                    level = best.0;
                    peak_t = best.1;
                    // Walk forward from the peak cell to the first sample
                    // inside the gap, looking for the downward crossing of
                    // level - tol.
                    let target = level - tol;
                    let start_cell = ((peak_t - grid.t_min) / grid.spacing()).floor() as usize;
                    let mut a = peak_t;
                    'outer: for cell in start_cell..i {
                        let poly = cell_poly(g, &model, grid, cell);
                        let lo = grid.point(cell).max(peak_t);
                        let hi = grid.point(cell + 1);
                        if let Some(root) = poly.solve(lo, hi, target) {
                            a = root;
                            break 'outer;
                        }
                        a = hi;
                    }
                    open = Some((a, level, i));
                }
            }
            Some((a, lvl, first)) => {
                if lvl - g[i] <= tol {
                    // Recovery: upward crossing of level - tol in [i-1, i].
                    let poly = cell_poly(g, &model, grid, i - 1);
                    let b = poly
                        .solve(grid.point(i - 1), grid.point(i), lvl - tol)
                        .unwrap_or(grid.point(i));
                    gaps.push(SupremumGap { a, b: Some(b), level: lvl, first_inside: first, last_inside: i - 1 });
                    open = None;
                    level = lvl;
                    if g[i] > level {
                        level = g[i];
                        peak_t = grid.point(i);
                        argmax = i;
                    } else {
                        peak_t = b;
                        argmax = i;
                    }
                }
            }
        }
    }
    if let Some((a, lvl, first)) = open {
        gaps.push(SupremumGap { a, b: None, level: lvl, first_inside: first, last_inside: n - 1 });
    }
    gaps
}

/// The open set where the cumulative flux sits below its running supremum,
/// as maximal intervals with refined endpoints satisfying
/// `|f(a) - f(b)| < 10 tol`.
pub fn delta_less(f: &TimeSeries, tol: f64) -> Result<IntervalList> {
    if !(tol > 0.0) {
        return Err(Error::invalid("delta_less needs tol > 0"));
    }
    let gaps = supremum_gaps(&f.values, CellModel::Values, &f.grid, tol);
    IntervalList::new(
        gaps.iter()
            .map(|g| Interval { a: g.a, b: g.end_or(f.grid.t_max) })
            .collect(),
    )
}

/// Arrival density with its gap structure and normalization.
#[derive(Debug, Clone)]
pub struct BohmDensityCurve {
    pub b: TimeSeries,
    /// Gaps of the `+f` branch (right-mover `Delta_<`).
    pub delta_plus: IntervalList,
    /// Gaps of the `-f` branch (carries the weight for left movers).
    pub delta_minus: IntervalList,
    pub p_infinity: f64,
    pub warnings: Vec<String>,
}

impl BohmDensityCurve {
    /// Gap set of the branch that carries the detection weight.
    pub fn delta_less(&self) -> &IntervalList {
        if self.carries_minus() {
            &self.delta_minus
        } else {
            &self.delta_plus
        }
    }

    fn carries_minus(&self) -> bool {
        self.delta_minus.total_length() < self.delta_plus.total_length()
    }
}

/// Full analysis of one current series: flux, detection curve, gap structure
/// and the cutoff density, with interval-aware quadrature for the moments.
pub struct ArrivalAnalysis {
    pub j: TimeSeries,
    pub f: TimeSeries,
    pub detection: DetectionCurve,
    pub chi_tol: f64,
    plus_gaps: Vec<SupremumGap>,
    minus_gaps: Vec<SupremumGap>,
    neg_f: Vec<f64>,
    pub p_infinity: f64,
    pub warnings: Vec<String>,
}

impl ArrivalAnalysis {
    /// Build from a current series; `chi_rel` scales the cutoff tolerance by
    /// `max |f|`.
    pub fn new(j: TimeSeries, f: TimeSeries, chi_rel: f64) -> Result<Self> {
        if j.grid != f.grid {
            return Err(Error::invalid("current and flux series must share a grid"));
        }
        let detection = detection_probability(&f)?;
        let p_infinity = detection.p_infinity();
        let chi_tol = chi_rel * f.max_abs().max(f64::MIN_POSITIVE);
        let plus_gaps = supremum_gaps(&f.values, CellModel::Hermite(&j.values), &f.grid, chi_tol);
        let neg_f: Vec<f64> = f.values.iter().map(|v| -v).collect();
        let neg_j: Vec<f64> = j.values.iter().map(|v| -v).collect();
        let minus_gaps = supremum_gaps(&neg_f, CellModel::Hermite(&neg_j), &f.grid, chi_tol);
        let mut warnings = Vec::new();
        if p_infinity < tolerances::P_INFINITY_SUSPICIOUS {
            warnings.push(format!(
                "suspicious scenario: detection probability saturates at {p_infinity:.6} < 0.5; \
                 the packet barely reaches the detector"
            ));
        }
        Ok(ArrivalAnalysis {
            j,
            f,
            detection,
            chi_tol,
            plus_gaps,
            minus_gaps,
            neg_f,
            p_infinity,
            warnings,
        })
    }

    /// Convenience constructor from the current alone.
    pub fn from_current(j: TimeSeries, chi_rel: f64) -> Result<Self> {
        let f = crate::current::cumulative_flux(&j)?;
        ArrivalAnalysis::new(j, f, chi_rel)
    }

    fn inside_any(gaps: &[SupremumGap], i: usize) -> bool {
        gaps.iter().any(|g| g.first_inside <= i && i <= g.last_inside)
    }

    /// The sampled cutoff density `B`.
    pub fn density(&self) -> BohmDensityCurve {
        let n = self.j.values.len();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let plus_active = !Self::inside_any(&self.plus_gaps, i);
            let minus_active = !Self::inside_any(&self.minus_gaps, i);
            let mut v = 0.0;
            if plus_active {
                v += self.j.values[i];
            }
            if minus_active {
                v -= self.j.values[i];
            }
            values.push(v / self.p_infinity);
        }
        let b = TimeSeries::new(self.j.grid, values, Quantity::BohmDensity).unwrap();
        let mut warnings = self.warnings.clone();
        let min_b = b.min();
        if min_b < tolerances::DENSITY_FLAG {
            warnings.push(format!(
                "arrival density dips to {min_b:.3e}; mixed-momentum sign convention violated"
            ));
        }
        let t_max = self.j.grid.t_max;
        BohmDensityCurve {
            b,
            delta_plus: IntervalList::new(
                self.plus_gaps
                    .iter()
                    .map(|g| Interval { a: g.a, b: g.end_or(t_max) })
                    .collect(),
            )
            .unwrap(),
            delta_minus: IntervalList::new(
                self.minus_gaps
                    .iter()
                    .map(|g| Interval { a: g.a, b: g.end_or(t_max) })
                    .collect(),
            )
            .unwrap(),
            p_infinity: self.p_infinity,
            warnings,
        }
    }

    /// `∫ t^p g'(t) dt` over one gap, per-cell Hermite (exact for the local
    /// cubic model of `g`, so both full and partial cells carry `O(dt^4)`
    /// accuracy).
    fn gap_tp_deriv_integral(&self, g: &[f64], d: &[f64], gap: &SupremumGap, p: u32) -> f64 {
        let grid = &self.j.grid;
        let dt = grid.spacing();
        let a = gap.a;
        let b = gap.end_or(grid.t_max);
        let first_cell = ((a - grid.t_min) / dt).floor().max(0.0) as usize;
        let last_cell = (((b - grid.t_min) / dt).ceil() as usize).min(grid.n_t - 1);
        let mut total = 0.0;
        for cell in first_cell..last_cell {
            let lo = grid.point(cell).max(a);
            let hi = grid.point(cell + 1).min(b);
            if hi <= lo {
                continue;
            }
            let poly = CubicPoly::hermite(grid.point(cell), dt, g[cell], g[cell + 1], d[cell], d[cell + 1]);
            total += poly.integral_tp_deriv(lo, hi, p);
        }
        total
    }

    /// `∫ t^p B(t) dt` with the gap intervals excised exactly.
    ///
    /// `B = J (chi_plus - chi_minus) / p_inf` and the indicator difference is
    /// `inside_minus - inside_plus`, so the moment reduces to
    /// `[∫ t^p J over minus-gaps - ∫ t^p J over plus-gaps] / p_inf`: the
    /// whole-line integral cancels between the two branch terms.
    pub fn density_moment(&self, p: u32) -> f64 {
        let neg_j = negated(&self.j.values);
        let mut total = 0.0;
        for gap in &self.minus_gaps {
            // The minus-branch model is built on g = -f, so t^p J integrals
            // over its gaps come out negated.
            total += -self.gap_tp_deriv_integral(&self.neg_f, &neg_j, gap, p);
        }
        for gap in &self.plus_gaps {
            total -= self.gap_tp_deriv_integral(&self.f.values, &self.j.values, gap, p);
        }
        total / self.p_infinity
    }

    /// Unit-integral check value `∫ B dt`.
    pub fn density_integral(&self) -> f64 {
        self.density_moment(0)
    }

    /// Flux-level route for the forward gap:
    /// `sum over carrying-branch gaps of -∫ (g(t) - g(a)) dt`, Simpson on the
    /// interior samples and value-only cubics on the partial cells.
    pub fn gap_by_f_integral(&self) -> f64 {
        let (gaps, series): (&[SupremumGap], &[f64]) = if self.carries_minus() {
            (&self.minus_gaps, &self.neg_f)
        } else {
            (&self.plus_gaps, &self.f.values)
        };
        let grid = &self.f.grid;
        let dt = grid.spacing();
        let mut total = 0.0;
        for gap in gaps {
            let b = match gap.b {
                Some(b) => b,
                None => continue, // open gap: no recovery, identity does not apply
            };
            let a = gap.a;
            let anchor = gap.level - self.chi_tol; // = g(a) = g(b) by refinement
            let i_first = ((a - grid.t_min) / dt).ceil() as usize;
            let i_last = ((b - grid.t_min) / dt).floor() as usize;
            let mut integral = 0.0;
            if i_first <= i_last {
                integral += simpson(&series[i_first..=i_last], dt);
                if a < grid.point(i_first) {
                    integral += partial_cell_integral(series, grid, a, grid.point(i_first));
                }
                if grid.point(i_last) < b {
                    integral += partial_cell_integral(series, grid, grid.point(i_last), b);
                }
            } else {
                integral += partial_cell_integral(series, grid, a, b);
            }
            total += -(integral - anchor * (b - a));
        }
        total
    }

    fn carries_minus(&self) -> bool {
        *self.detection.sup_minus.values.last().unwrap()
            > *self.detection.sup_plus.values.last().unwrap()
    }

    pub fn plus_gaps(&self) -> &[SupremumGap] {
        &self.plus_gaps
    }

    pub fn minus_gaps(&self) -> &[SupremumGap] {
        &self.minus_gaps
    }
}

fn negated(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// Value-only cubic integral of a sampled series over `[a, b]` inside one
/// cell span.
fn partial_cell_integral(series: &[f64], grid: &TimeGrid, a: f64, b: f64) -> f64 {
    let dt = grid.spacing();
    let cell = ((a - grid.t_min) / dt).floor().max(0.0) as usize;
    let lo = cell.saturating_sub(1).min(series.len() - 4);
    let poly = CubicPoly::lagrange4(
        grid.point(lo),
        dt,
        [series[lo], series[lo + 1], series[lo + 2], series[lo + 3]],
    );
    poly.integral(a, b)
}

/// Spec-facing wrapper: the cutoff density from current and flux series.
pub fn arrival_density(j: &TimeSeries, f: &TimeSeries, chi_rel: f64) -> Result<BohmDensityCurve> {
    let analysis = ArrivalAnalysis::new(j.clone(), f.clone(), chi_rel)?;
    Ok(analysis.density())
}

/// Which way the packet moves, judged from the saturated flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoverDirection {
    Right,
    Left,
}

/// Comparison of the mean Kijowski-family arrival time with the Bohmian one.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// `∫ t J(t) dt` — the common first moment of the axiomatic family
    /// (for left movers this is the raw, sign-carrying value).
    pub t_mean_k: f64,
    /// First moment of the cutoff density `B`.
    pub t_mean_b: f64,
    /// `t_mean_k - t_mean_b`.
    pub gap: f64,
    /// The gap oriented along the direction of motion; nonnegative up to
    /// quadrature noise, and zero exactly for backflow-free states.
    pub gap_forward: f64,
    /// Independent flux-level evaluation of `gap_forward`.
    pub gap_by_f_integral: f64,
    pub has_backflow: bool,
    pub direction: MoverDirection,
    pub p_infinity: f64,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Run the full flux/cutoff pipeline for `phi` and compare the mean arrival
/// times.
pub fn gap_report(phi: &MomentumWavefunction, tgrid: &TimeGrid, chi_rel: f64) -> Result<GapReport> {
    let j = current_series(phi, tgrid);
    gap_report_from_current(j, chi_rel)
}

pub fn gap_report_from_current(j: TimeSeries, chi_rel: f64) -> Result<GapReport> {
    let t_mean_k = mean_from_current(&j)?;
    let analysis = ArrivalAnalysis::from_current(j, chi_rel)?;
    let t_mean_b = analysis.density_moment(1);
    let direction = if analysis.carries_minus() { MoverDirection::Left } else { MoverDirection::Right };
    let gap = t_mean_k - t_mean_b;
    let gap_forward = match direction {
        MoverDirection::Right => gap,
        MoverDirection::Left => -t_mean_k - t_mean_b,
    };
    let gap_by_f_integral = analysis.gap_by_f_integral();
    Ok(GapReport {
        t_mean_k,
        t_mean_b,
        gap,
        gap_forward,
        gap_by_f_integral,
        has_backflow: gap_forward > tolerances::HAS_BACKFLOW_GAP,
        direction,
        p_infinity: analysis.p_infinity,
        warnings: analysis.warnings.clone(),
    })
}
