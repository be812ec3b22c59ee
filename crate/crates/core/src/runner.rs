//! Executes a scenario: builds the state, runs the requested pipelines and
//! checks, writes CSV series and a JSON summary.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bohm::{
    gap_report_from_current, ArrivalAnalysis, GapReport, MoverDirection,
};
use crate::current::{backflow_intervals, current_series, flux_via_position, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::{KGrid, TimeGrid, XGrid};
use crate::kijowski::{
    axiom_check, mean_from_current, moments, q0_series, AxiomReport, QuadraticFormModel,
};
use crate::ode::StepControl;
use crate::quad::trapezoid;
use crate::quadform::{
    construct_theorem4_pair, quadratic_form_scan, sinusoid_fit, superposition_scan,
    violation_report,
};
use crate::report::{write_series_csv, write_summary_json, F17};
use crate::scenario::{BackflowExpectation, GapExpectation, ScenarioConfig};
use crate::tolerances;
use crate::trajectories::monte_carlo_detection;
use crate::units::Units;
use crate::wavepacket::{evolve, shift_arrival_point, GaussianState, MomentumWavefunction};

/// One named pass/fail verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult { name: name.into(), passed, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub label: String,
    pub norm_sq: F17,
    pub nonpositive_mass_fraction: F17,
    pub evolve_by: F17,
    pub arrival_x: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxCheckpoint {
    pub t: F17,
    pub time_route: F17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_route: Option<F17>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxSummary {
    pub f_final: F17,
    pub f_min: F17,
    pub f_max: F17,
    pub checkpoints: Vec<FluxCheckpoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomResultJson {
    pub passed: bool,
    pub statistic: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomsJson {
    pub positivity: AxiomResultJson,
    pub conjugation_symmetry: AxiomResultJson,
    pub time_normalization: AxiomResultJson,
    pub second_moment_tail: AxiomResultJson,
    pub all_pass: bool,
}

impl From<&AxiomReport> for AxiomsJson {
    fn from(r: &AxiomReport) -> Self {
        let conv = |a: &crate::kijowski::AxiomResult| AxiomResultJson {
            passed: a.passed,
            statistic: F17(a.statistic),
        };
        AxiomsJson {
            positivity: conv(&r.positivity),
            conjugation_symmetry: conv(&r.conjugation_symmetry),
            time_normalization: conv(&r.time_normalization),
            second_moment_tail: conv(&r.second_moment_tail),
            all_pass: r.all_pass(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KijowskiSummary {
    pub t_mean_current: F17,
    pub t_mean_q0: F17,
    pub variance_q0: F17,
    pub q0_time_integral: F17,
    pub axioms: AxiomsJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapSummary {
    pub t_mean_k: F17,
    pub t_mean_b: F17,
    pub gap: F17,
    pub gap_forward: F17,
    pub gap_by_f_integral: F17,
    pub has_backflow: bool,
    pub direction: MoverDirection,
    pub p_infinity: F17,
}

impl From<&GapReport> for GapSummary {
    fn from(r: &GapReport) -> Self {
        GapSummary {
            t_mean_k: F17(r.t_mean_k),
            t_mean_b: F17(r.t_mean_b),
            gap: F17(r.gap),
            gap_forward: F17(r.gap_forward),
            gap_by_f_integral: F17(r.gap_by_f_integral),
            has_backflow: r.has_backflow,
            direction: r.direction,
            p_infinity: F17(r.p_infinity),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BackflowSummary {
    pub min_current: F17,
    pub intervals: Vec<[F17; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McCheckpoint {
    pub t: F17,
    pub p_hat: F17,
    pub p_ref: F17,
    pub stderr: F17,
    pub deviation_sigma: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub n: usize,
    pub seed: u64,
    pub ks_statistic: F17,
    pub ks_critical: F17,
    pub order_violations: usize,
    pub node_failure_fraction: F17,
    pub max_deviation_sigma: F17,
    pub checkpoints: Vec<McCheckpoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadformSummary {
    pub m: usize,
    pub t_star: F17,
    pub alpha: F17,
    pub overlap_before: [F17; 2],
    pub j_phi: F17,
    pub j_psi: F17,
    pub beta0: F17,
    pub plateau_start: F17,
    pub plateau_fraction: F17,
    pub residual_rel: F17,
    pub control_residual_rel: F17,
    pub verdict: String,
}

/// Everything a run reports, serialized as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub defaults_version: u32,
    pub state: StateSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kijowski: Option<KijowskiSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backflow: Option<BackflowSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectorySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadform: Option<QuadformSummary>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Outcome of one scenario run.
#[derive(Debug)]
pub struct RunSummary {
    pub name: String,
    pub pass: bool,
    pub summary: Summary,
    pub out_dir: Option<PathBuf>,
}

/// Grid indices where `p` first reaches each quantile of its final value.
fn quantile_indices(p: &TimeSeries, quantiles: &[f64]) -> Vec<usize> {
    let p_inf = *p.values.last().unwrap();
    quantiles
        .iter()
        .map(|q| {
            let target = q * p_inf;
            p.values.iter().position(|&v| v >= target).unwrap_or(p.values.len() - 1)
        })
        .collect()
}

/// Run one scenario; write outputs under `out_dir/<name>/` when given.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    config.validate()?;
    let units = Units::new(config.units.hbar, config.units.mass)?;
    let kgrid = KGrid::new(config.kgrid.k_min, config.kgrid.k_max, config.kgrid.n_k)?;
    let tgrid = TimeGrid::new(config.time.t_min, config.time.t_max, config.time.n_t)?;
    let xgrid = match &config.xgrid {
        Some(g) => Some(XGrid::new(g.x_min, g.x_max, g.n_x)?),
        None => None,
    };
    let chi_rel = config.tolerances.chi_rel;

    let comps: Vec<_> = config.state.components.iter().map(|c| c.to_component()).collect();
    let (phi0, state0) = GaussianState::normalized_on(units, kgrid, &comps, config.name.clone())?;
    let phi = evolve(&shift_arrival_point(&phi0, config.arrival.x), config.state.evolve_by);
    let state = state0.shift_arrival_point(config.arrival.x).evolve_by(config.state.evolve_by);

    let mut checks: Vec<CheckResult> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    let j = current_series(&phi, &tgrid);
    let analysis = ArrivalAnalysis::from_current(j.clone(), chi_rel)?;
    warnings.extend(analysis.warnings.clone());
    let density = analysis.density();
    let is_right = matches!(direction_of(&analysis), MoverDirection::Right);

    // Flux checkpoints at detection quantiles, on exact grid samples.
    let cp_idx = quantile_indices(&analysis.detection.p, &[0.05, 0.25, 0.5, 0.75, 0.95]);

    if config.checks.unitarity {
        let mut drift = 0.0f64;
        for i in (0..tgrid.n_t).step_by((tgrid.n_t / 32).max(1)) {
            let t = tgrid.point(i);
            drift = drift.max((evolve(&phi, t).norm() - 1.0).abs());
        }
        checks.push(CheckResult::new(
            "unitarity",
            drift < tolerances::UNITARITY,
            format!("max norm drift {drift:.3e} (limit {:.0e})", tolerances::UNITARITY),
        ));
    }

    if config.checks.parseval {
        let xg = xgrid.as_ref().expect("validated");
        let mut worst = 0.0f64;
        for &i in &cp_idx {
            let t = tgrid.point(i);
            let field = crate::wavepacket::to_position_at(&phi, xg, t)?;
            worst = worst.max((field.norm_sq() - 1.0).abs());
        }
        checks.push(CheckResult::new(
            "parseval",
            worst < tolerances::PARSEVAL,
            format!("max |x-norm - 1| = {worst:.3e} (limit {:.0e})", tolerances::PARSEVAL),
        ));
    }

    let mut flux_summary = None;
    if config.checks.flux {
        let f = &analysis.f;
        let f_final = *f.values.last().unwrap();
        let (f_min, f_max) = (f.min(), f.max());
        let eps = tolerances::FLUX_BOUNDS;
        let bounds_ok = if is_right {
            f_min >= -eps && f_max <= 1.0 + eps
        } else {
            f_min >= -1.0 - eps && f_max <= eps
        };
        let final_target = if is_right { 1.0 } else { -1.0 };
        let final_ok = (f_final - final_target).abs() <= tolerances::UNIT_INTEGRAL;

        let mut checkpoints = Vec::new();
        let mut cross_ok = true;
        let mut half_line_ok = true;
        let mut worst_cross = 0.0f64;
        if let Some(xg) = &xgrid {
            for &i in &cp_idx {
                let t = tgrid.point(i);
                let pos = flux_via_position(&phi, t, xg)?;
                let time_route = f.values[i];
                // For left movers the mass on x > 0 is 1 + f(t).
                let expected_pos = if is_right { time_route } else { 1.0 + time_route };
                let diff = (pos - expected_pos).abs();
                worst_cross = worst_cross.max(diff);
                cross_ok &= diff <= tolerances::MOMENT_ROUTE;
                checkpoints.push(FluxCheckpoint {
                    t: F17(t),
                    time_route: F17(time_route),
                    position_route: Some(F17(pos)),
                });
            }
            let early = flux_via_position(&phi, tgrid.t_min, xg)?;
            let late = flux_via_position(&phi, tgrid.t_max, xg)?;
            half_line_ok = if is_right {
                early < 0.01 && late > 0.99
            } else {
                early > 0.99 && late < 0.01
            };
        } else {
            for &i in &cp_idx {
                checkpoints.push(FluxCheckpoint {
                    t: F17(tgrid.point(i)),
                    time_route: F17(f.values[i]),
                    position_route: None,
                });
            }
        }
        checks.push(CheckResult::new(
            "flux",
            bounds_ok && final_ok && cross_ok && half_line_ok,
            format!(
                "f in [{f_min:.3e}, {f_max:.3e}], f(t_max) = {f_final:.9}, \
                 max route difference {worst_cross:.3e}, half-line {}",
                if half_line_ok { "ok" } else { "violated" }
            ),
        ));
        flux_summary = Some(FluxSummary {
            f_final: F17(f_final),
            f_min: F17(f_min),
            f_max: F17(f_max),
            checkpoints,
        });
    }

    let mut kijowski_summary = None;
    if config.checks.axioms || config.checks.first_moment_equality {
        let q0 = q0_series(&phi, &tgrid)?;
        let q0_integral = trapezoid(&q0.values, tgrid.spacing());
        let report = axiom_check(&QuadraticFormModel::q0(), &phi, &tgrid);
        let t_mean_current = mean_from_current(&j)?;
        let q0_moments = moments(&q0)?;

        if config.checks.axioms {
            checks.push(CheckResult::new(
                "kijowski-axioms",
                report.all_pass() && (q0_integral - 1.0).abs() <= tolerances::UNIT_INTEGRAL,
                format!(
                    "axioms {}, ∫q0 dt = {q0_integral:.9}",
                    if report.all_pass() { "pass" } else { "FAIL" }
                ),
            ));
        }
        if config.checks.first_moment_equality {
            let diff = (t_mean_current - q0_moments.mean).abs();
            checks.push(CheckResult::new(
                "first-moment-equality",
                diff < tolerances::MOMENT_ROUTE,
                format!(
                    "∫tJ = {t_mean_current:.9}, ∫t q0 = {:.9}, diff {diff:.3e}",
                    q0_moments.mean
                ),
            ));
        }
        kijowski_summary = Some(KijowskiSummary {
            t_mean_current: F17(t_mean_current),
            t_mean_q0: F17(q0_moments.mean),
            variance_q0: F17(q0_moments.variance),
            q0_time_integral: F17(q0_integral),
            axioms: AxiomsJson::from(&report),
        });
    }

    let mut gap_summary = None;
    if config.checks.gap != GapExpectation::None {
        let report = gap_report_from_current(j.clone(), chi_rel)?;
        warnings.extend(report.warnings.clone());
        let route_diff = (report.gap_forward - report.gap_by_f_integral).abs();
        let routes_ok = route_diff < tolerances::MOMENT_ROUTE;
        let nonneg_ok = report.gap_forward >= -tolerances::GAP_NONNEGATIVE;
        let (expect_ok, detail) = match config.checks.gap {
            GapExpectation::Equality => {
                let mut max_bj = 0.0f64;
                for (b, jv) in density.b.values.iter().zip(&j.values) {
                    max_bj = max_bj.max((b - jv).abs());
                }
                let ok = report.gap_forward.abs() <= tolerances::GAP_EQUALITY
                    && max_bj <= 1e-12
                    && !report.has_backflow;
                (ok, format!("|gap| = {:.3e}, max|B-J| = {max_bj:.3e}", report.gap_forward.abs()))
            }
            GapExpectation::Strict => {
                let ok = report.gap_forward > 0.0 && report.has_backflow;
                (ok, format!("gap_forward = {:.6e} > 0", report.gap_forward))
            }
            GapExpectation::Mirror => {
                let ok = report.direction == MoverDirection::Left && report.gap <= 0.0;
                (ok, format!("direction {:?}, t_K - t_B = {:.6e} <= 0", report.direction, report.gap))
            }
            GapExpectation::None => unreachable!(),
        };
        checks.push(CheckResult::new(
            "gap",
            expect_ok && routes_ok && nonneg_ok,
            format!("{detail}; route difference {route_diff:.3e}; forward gap {:.6e}", report.gap_forward),
        ));
        gap_summary = Some(GapSummary::from(&report));
    }

    let mut backflow_summary = None;
    if config.checks.backflow != BackflowExpectation::Ignore {
        let intervals = backflow_intervals(&j, config.tolerances.backflow_threshold);
        let min_j = j.min();
        let (ok, detail) = match config.checks.backflow {
            BackflowExpectation::Forbidden => (
                intervals.is_empty(),
                format!("min J = {min_j:.3e}, {} backflow intervals", intervals.len()),
            ),
            BackflowExpectation::Required => (
                !intervals.is_empty() && min_j < -tolerances::BACKFLOW_CURRENT_MIN,
                format!("min J = {min_j:.6e}, {} backflow intervals", intervals.len()),
            ),
            BackflowExpectation::Ignore => unreachable!(),
        };
        checks.push(CheckResult::new("backflow", ok, detail));
        backflow_summary = Some(BackflowSummary {
            min_current: F17(min_j),
            intervals: intervals.as_slice().iter().map(|iv| [F17(iv.a), F17(iv.b)]).collect(),
        });
    }

    let mut quadform_summary = None;
    let mut scan_for_csv = None;
    if config.checks.quadform {
        let spec = config.quadform.as_ref().expect("validated");
        let (phi_base, _) = GaussianState::normalized_on(
            units,
            kgrid,
            &[spec.phi.to_component()],
            format!("{}-phi", config.name),
        )?;
        let phi_base = shift_arrival_point(&phi_base, config.arrival.x);
        let pair = construct_theorem4_pair(&phi_base, &phi, &tgrid)?;
        let scan = superposition_scan(&pair.phi, &pair.psi, spec.m, &tgrid, chi_rel)?;
        let fit = sinusoid_fit(&scan)?;
        let verdict = violation_report(&scan, &fit);
        let control = quadratic_form_scan(&QuadraticFormModel::q0(), &pair.phi, &pair.psi, spec.m)?;
        let control_fit = sinusoid_fit(&control)?;
        let control_ok = control_fit.residual_rel < tolerances::RESIDUAL_CONTROL_MAX;
        checks.push(CheckResult::new(
            "quadform",
            verdict.violated && control_ok,
            format!(
                "beta(0) = {:.4e}, plateau {:.1}% from xi = {:.4}, residual {:.4}, control residual {:.3e}{}",
                verdict.beta0,
                100.0 * verdict.plateau_fraction,
                verdict.plateau_start,
                verdict.residual_rel,
                control_fit.residual_rel,
                if verdict.failed_witnesses.is_empty() {
                    String::new()
                } else {
                    format!("; failed: {}", verdict.failed_witnesses.join("; "))
                }
            ),
        ));
        quadform_summary = Some(QuadformSummary {
            m: spec.m,
            t_star: F17(pair.t_star),
            alpha: F17(pair.alpha),
            overlap_before: [F17(pair.overlap_before.0), F17(pair.overlap_before.1)],
            j_phi: F17(pair.j_phi),
            j_psi: F17(pair.j_psi),
            beta0: F17(verdict.beta0),
            plateau_start: F17(verdict.plateau_start),
            plateau_fraction: F17(verdict.plateau_fraction),
            residual_rel: F17(fit.residual_rel),
            control_residual_rel: F17(control_fit.residual_rel),
            verdict: if verdict.violated { "violated".into() } else { "not-violated".into() },
        });
        scan_for_csv = Some((scan, fit));
    }

    let mut trajectory_summary = None;
    let mut ensemble_for_csv = None;
    if config.checks.trajectories {
        let spec = config.trajectories.as_ref().expect("validated");
        let mut ctrl = StepControl::with_local_tol(spec.local_tol, tgrid.t_max - tgrid.t_min);
        ctrl.h_max = spec.h_max;
        let ens = monte_carlo_detection(&state, &tgrid, spec.n, spec.seed, &ctrl)?;
        let qs: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
        let idx = quantile_indices(&analysis.detection.p, &qs);
        let mut checkpoints = Vec::new();
        let mut max_dev = 0.0f64;
        for &i in &idx {
            let p_ref = analysis.detection.p.values[i];
            let p_hat = ens.p_hat.values[i];
            let se = ens.stderr.values[i].max(f64::MIN_POSITIVE);
            let dev = (p_hat - p_ref).abs() / se;
            max_dev = max_dev.max(dev);
            checkpoints.push(McCheckpoint {
                t: F17(tgrid.point(i)),
                p_hat: F17(p_hat),
                p_ref: F17(p_ref),
                stderr: F17(ens.stderr.values[i]),
                deviation_sigma: F17(dev),
            });
        }
        let ks_critical = tolerances::KS_CRITICAL_1PCT / (spec.n as f64).sqrt();
        let ok = max_dev <= tolerances::MC_SIGMA_BOUND
            && ens.order_violations == 0
            && ens.ks_initial < ks_critical;
        checks.push(CheckResult::new(
            "trajectories",
            ok,
            format!(
                "max deviation {max_dev:.2} sigma (limit 4), {} order violations, \
                 KS {:.5} (critical {ks_critical:.5}), node failures {:.2e}",
                ens.order_violations, ens.ks_initial, ens.node_failure_fraction
            ),
        ));
        trajectory_summary = Some(TrajectorySummary {
            n: spec.n,
            seed: spec.seed,
            ks_statistic: F17(ens.ks_initial),
            ks_critical: F17(ks_critical),
            order_violations: ens.order_violations,
            node_failure_fraction: F17(ens.node_failure_fraction),
            max_deviation_sigma: F17(max_dev),
            checkpoints,
        });
        ensemble_for_csv = Some(ens);
    }

    let pass = checks.iter().all(|c| c.passed);
    let summary = Summary {
        name: config.name.clone(),
        defaults_version: config.defaults_version,
        state: StateSummary {
            label: phi.label.clone(),
            norm_sq: F17(phi.norm_sq()),
            nonpositive_mass_fraction: F17(phi.nonpositive_mass_fraction()),
            evolve_by: F17(config.state.evolve_by),
            arrival_x: F17(config.arrival.x),
        },
        flux: flux_summary,
        kijowski: kijowski_summary,
        gap: gap_summary,
        backflow: backflow_summary,
        trajectories: trajectory_summary,
        quadform: quadform_summary,
        warnings,
        checks: checks.clone(),
        pass,
    };

    let mut written_dir = None;
    if let Some(dir) = out_dir {
        let scenario_dir = dir.join(&config.name);
        std::fs::create_dir_all(&scenario_dir)?;
        write_summary_json(&scenario_dir.join("summary.json"), &summary)?;
        if config.outputs.series_csv {
            let ts: Vec<f64> = tgrid.points().collect();
            write_series_csv(
                &scenario_dir.join("series.csv"),
                &[
                    ("t", &ts),
                    ("J", &j.values),
                    ("f", &analysis.f.values),
                    ("P", &analysis.detection.p.values),
                    ("B", &density.b.values),
                ],
            )?;
        }
        if config.outputs.scan_csv {
            if let Some((scan, fit)) = &scan_for_csv {
                let fitted: Vec<f64> = scan
                    .xi
                    .iter()
                    .map(|x| fit.a + fit.b * (2.0 * x).cos() + fit.c * (2.0 * x).sin())
                    .collect();
                let residual: Vec<f64> =
                    scan.beta.iter().zip(&fitted).map(|(b, f)| b - f).collect();
                write_series_csv(
                    &scenario_dir.join("scan.csv"),
                    &[
                        ("xi", &scan.xi),
                        ("beta", &scan.beta),
                        ("fit", &fitted),
                        ("residual", &residual),
                    ],
                )?;
            }
        }
        if config.outputs.trajectories_csv {
            if let Some(ens) = &ensemble_for_csv {
                let mut out = String::from("index,x_init,crossing_time\n");
                for (i, (x0, tc)) in
                    ens.initial_positions.iter().zip(&ens.crossing_times).enumerate()
                {
                    out.push_str(&format!(
                        "{i},{},{}\n",
                        crate::report::fmt17(*x0),
                        tc.map(crate::report::fmt17).unwrap_or_default()
                    ));
                }
                std::fs::write(scenario_dir.join("trajectories.csv"), out)?;
            }
        }
        written_dir = Some(scenario_dir);
    }

    Ok(RunSummary { name: config.name.clone(), pass, summary, out_dir: written_dir })
}

fn direction_of(analysis: &ArrivalAnalysis) -> MoverDirection {
    if *analysis.detection.sup_minus.values.last().unwrap()
        > *analysis.detection.sup_plus.values.last().unwrap()
    {
        MoverDirection::Left
    } else {
        MoverDirection::Right
    }
}

/// Run several scenarios, optionally in parallel, each into its own
/// subdirectory.
pub fn run_many(
    configs: &[ScenarioConfig],
    out_dir: Option<&Path>,
    parallel: bool,
) -> Vec<(String, Result<RunSummary>)> {
    if parallel && configs.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|cfg| {
                    scope.spawn(move || (cfg.name.clone(), run_scenario(cfg, out_dir)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
        })
    } else {
        configs.iter().map(|cfg| (cfg.name.clone(), run_scenario(cfg, out_dir))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    #[test]
    fn quantiles_pick_monotone_indices() {
        let grid = TimeGrid::new(0.0, 1.0, 101).unwrap();
        let p: Vec<f64> = grid.points().map(|t| t).collect();
        let series = TimeSeries::new(grid, p, crate::current::Quantity::Detection).unwrap();
        let idx = quantile_indices(&series, &[0.1, 0.5, 0.9]);
        assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(idx[1], 50);
    }

    #[test]
    fn misconfigured_scenario_fails_early() {
        let text = r#"
name = "coverage-hole"
[kgrid]
k_min = 1.0
k_max = 9.0
n_k = 256
[state]
[[state.components]]
weight_re = 1.0
k0 = 5.0
sigma_k = 0.5
x0 = -20.0
[time]
t_min = -1.0
t_max = 1.0
n_t = 128
[checks]
flux = true
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        // The window ends mid-transit, so the flux anchor is invalid.
        let err = run_scenario(&cfg, None).unwrap_err();
        assert!(matches!(err, Error::GridCoverage(_)), "{err}");
    }
}
