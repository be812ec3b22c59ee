//! The superposition scan: the Bohmian density at a fixed time is not a
//! quadratic form of the state.
//!
//! For any quadratic form `q` the scan `xi -> q(cos(xi) phi + sin(xi) psi)`
//! is exactly `a + b cos(2 xi) + c sin(2 xi)` (half-angle algebra on
//! `cos^2, sin^2, sin*cos`).  The Bohmian value `beta(xi) = B(0)` of the
//! mixed state violates that shape: with `phi` caught mid-crossing
//! (`beta(0) > 0`) and `psi` caught inside a backflow interval (`B_psi(0) =
//! 0`), the mixed current at `t = 0` stays negative on a whole trailing
//! `xi` interval, forcing `beta = 0` on a plateau ending at `pi/2` — a shape
//! no sinusoid with `beta(0) > 0` can reproduce.

use serde::Serialize;

use crate::bohm::ArrivalAnalysis;
use crate::current::{backflow_intervals, current_series, k_moment_series, Quantity, TimeSeries};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kijowski::QuadraticFormModel;
use crate::tolerances;
use crate::wavepacket::{evolve, normalize, MomentumWavefunction, C64};

/// `beta(xi)` sampled on `M` points of `[0, pi/2]`.
#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionScan {
    pub xi: Vec<f64>,
    pub beta: Vec<f64>,
    pub phi_label: String,
    pub psi_label: String,
    /// `<phi, psi>` of the scanned pair; each scanned state is renormalized
    /// explicitly rather than assuming this vanishes.
    pub overlap: (f64, f64),
}

/// Least-squares fit of a scan onto `{1, cos 2xi, sin 2xi}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SinusoidFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `| beta - fit |_2 / | beta |_2`.
    pub residual_rel: f64,
    /// Relative residual of the 3x3 normal equations at the solution.
    pub normal_eq_residual: f64,
}

/// The two states of the Theorem-4 construction plus its bookkeeping.
#[derive(Debug, Clone)]
pub struct TheoremPair {
    pub phi: MomentumWavefunction,
    pub psi: MomentumWavefunction,
    /// Backflow instant used to time-shift the second state.
    pub t_star: f64,
    /// Phase applied to `psi` to drive the current cross term most negative.
    pub alpha: f64,
    /// `<phi, psi_raw>` before the projection that removed it.
    pub overlap_before: (f64, f64),
    /// `J0` of the two states at `t = 0`.
    pub j_phi: f64,
    pub j_psi: f64,
}

fn k_moments_at0(phi: &MomentumWavefunction) -> (C64, C64) {
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

/// Hermitian polarization of the current form:
/// `S_J(u, v) = (hbar/4 pi m) [conj(I0(u)) I1(v) + conj(I1(u)) I0(v)]`,
/// so that `J0(chi) = S_J(chi, chi)`.
pub fn current_cross_term(u: &MomentumWavefunction, v: &MomentumWavefunction) -> C64 {
    let (u0, u1) = k_moments_at0(u);
    let (v0, v1) = k_moments_at0(v);
    let pref = u.units.hbar / (4.0 * std::f64::consts::PI * u.units.mass);
    pref * (u0.conj() * v1 + u1.conj() * v0)
}

/// Build the Theorem-4 pair from a crossing packet and a backflow state.
///
/// `psi` is the backflow state evolved to its deepest backflow instant, then
/// projected orthogonal to `phi` (so mixtures keep unit norm) and rotated by
/// the phase that makes the current cross term most negative, which pulls the
/// zero plateau of the scan as far left as the pair allows.
pub fn construct_theorem4_pair(
    phi_base: &MomentumWavefunction,
    backflow_state: &MomentumWavefunction,
    tgrid: &TimeGrid,
) -> Result<TheoremPair> {
    let j_bf = current_series(backflow_state, tgrid);
    let intervals = backflow_intervals(&j_bf, tolerances::BACKFLOW_CURRENT_MIN);
    if intervals.is_empty() {
        return Err(Error::Construction(
            "no backflow interval deeper than the threshold; cannot pick psi".into(),
        ));
    }
    // Deepest instant.
    let (mut t_star, mut j_min) = (tgrid.t_min, f64::INFINITY);
    for (i, &v) in j_bf.values.iter().enumerate() {
        if v < j_min {
            j_min = v;
            t_star = tgrid.point(i);
        }
    }
    let psi_raw = evolve(backflow_state, t_star);

    let phi = normalize(phi_base)?;
    let overlap = phi.inner(&psi_raw)?;
    let projected = MomentumWavefunction::linear_combination(
        C64::new(1.0, 0.0),
        &psi_raw,
        -overlap,
        &phi,
    )?;
    let psi0 = normalize(&projected)?;

    let j_psi = crate::current::current_at_origin(&psi0, 0.0);
    if j_psi >= -tolerances::BACKFLOW_CURRENT_MIN {
        return Err(Error::Construction(format!(
            "projected psi lost its backflow: J0(psi) = {j_psi:.3e}"
        )));
    }
    let cross = current_cross_term(&phi, &psi0);
    let alpha = std::f64::consts::PI - cross.im.atan2(cross.re);
    let psi = psi0.scaled(C64::new(0.0, alpha).exp());

    let j_phi = crate::current::current_at_origin(&phi, 0.0);
    Ok(TheoremPair {
        phi,
        psi,
        t_star,
        alpha,
        overlap_before: (overlap.re, overlap.im),
        j_phi,
        j_psi,
    })
}

fn index_of_time_zero(tgrid: &TimeGrid) -> Result<usize> {
    let i = tgrid.nearest_index(0.0);
    if tgrid.point(i).abs() > 1e-9 * tgrid.spacing().max(1.0) {
        return Err(Error::invalid(format!(
            "time grid must sample t = 0; nearest point is {:.3e}",
            tgrid.point(i)
        )));
    }
    Ok(i)
}

/// Scan `xi -> B_{cos(xi) phi + sin(xi) psi}(0)` over `M` points.
///
/// Each mixture runs the full flux / running-supremum / cutoff pipeline.  The
/// current series of the mixture is assembled from the `k` moments of `phi`
/// and `psi` (both linear in the state), so the heavy quadrature happens
/// twice, not `M` times.
pub fn superposition_scan(
    phi: &MomentumWavefunction,
    psi: &MomentumWavefunction,
    m: usize,
    tgrid: &TimeGrid,
    chi_rel: f64,
) -> Result<SuperpositionScan> {
    if m < 33 {
        return Err(Error::invalid(format!("scan needs M >= 33 points, got {m}")));
    }
    for (s, name) in [(phi, "phi"), (psi, "psi")] {
        let n = s.norm_sq();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("{name} must be unit norm, got |{name}|^2 = {n}")));
        }
    }
    let i0 = index_of_time_zero(tgrid)?;
    let overlap = phi.inner(psi)?;
    let pref = phi.units.hbar / (2.0 * std::f64::consts::PI * phi.units.mass);

    let (p0, p1) = k_moment_series(phi, tgrid);
    let (q0m, q1m) = k_moment_series(psi, tgrid);

    let mut xi_points = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    for idx in 0..m {
        let xi = std::f64::consts::FRAC_PI_2 * idx as f64 / (m - 1) as f64;
        let (cs, sn) = (xi.cos(), xi.sin());
        let norm_sq = 1.0 + 2.0 * cs * sn * overlap.re;
        let values: Vec<f64> = (0..tgrid.n_t)
            .map(|i| {
                let m0 = cs * p0[i] + sn * q0m[i];
                let m1 = cs * p1[i] + sn * q1m[i];
                pref * (m0.conj() * m1).re / norm_sq
            })
            .collect();
        let j = TimeSeries::new(*tgrid, values, Quantity::Current)?;
        let analysis = ArrivalAnalysis::from_current(j, chi_rel).map_err(|e| {
            Error::Construction(format!("scan pipeline failed at xi = {xi:.6}: {e}"))
        })?;
        beta.push(analysis.density().b.values[i0]);
        xi_points.push(xi);
    }
    Ok(SuperpositionScan {
        xi: xi_points,
        beta,
        phi_label: phi.label.clone(),
        psi_label: psi.label.clone(),
        overlap: (overlap.re, overlap.im),
    })
}

/// Scan a quadratic-form model over the same mixtures (control experiment).
pub fn quadratic_form_scan(
    q: &QuadraticFormModel,
    phi: &MomentumWavefunction,
    psi: &MomentumWavefunction,
    m: usize,
) -> Result<SuperpositionScan> {
    if m < 33 {
        return Err(Error::invalid(format!("scan needs M >= 33 points, got {m}")));
    }
    let overlap = phi.inner(psi)?;
    let mut xi_points = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    for idx in 0..m {
        let xi = std::f64::consts::FRAC_PI_2 * idx as f64 / (m - 1) as f64;
        let chi = MomentumWavefunction::linear_combination(
            C64::new(xi.cos(), 0.0),
            phi,
            C64::new(xi.sin(), 0.0),
            psi,
        )?;
        let chi = normalize(&chi)?;
        beta.push(q.evaluate(&chi));
        xi_points.push(xi);
    }
    Ok(SuperpositionScan {
        xi: xi_points,
        beta,
        phi_label: phi.label.clone(),
        psi_label: psi.label.clone(),
        overlap: (overlap.re, overlap.im),
    })
}

/// Least-squares fit of the scan onto `{1, cos 2xi, sin 2xi}` via the normal
/// equations (3x3, solved by Gaussian elimination with pivoting).
pub fn sinusoid_fit(scan: &SuperpositionScan) -> Result<SinusoidFit> {
    let n = scan.beta.len();
    let norm_beta: f64 = scan.beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm_beta == 0.0 {
        return Err(Error::DegenerateScan("scan values are identically zero".into()));
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (xi, b) in scan.xi.iter().zip(&scan.beta) {
        let row = [1.0, (2.0 * xi).cos(), (2.0 * xi).sin()];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * b;
        }
    }
    let x = solve3(ata, atb)?;
    // Normal-equation residual at the solution.
    let mut ne_res = 0.0f64;
    let mut rhs_scale = 1.0f64;
    for r in 0..3 {
        let mut lhs = 0.0;
        for c in 0..3 {
            lhs += ata[r][c] * x[c];
        }
        ne_res = ne_res.max((lhs - atb[r]).abs());
        rhs_scale = rhs_scale.max(atb[r].abs());
    }
    let mut ss = 0.0;
    for (xi, b) in scan.xi.iter().zip(&scan.beta) {
        let fit = x[0] + x[1] * (2.0 * xi).cos() + x[2] * (2.0 * xi).sin();
        ss += (b - fit) * (b - fit);
    }
    Ok(SinusoidFit {
        a: x[0],
        b: x[1],
        c: x[2],
        residual_rel: ss.sqrt() / norm_beta,
        normal_eq_residual: ne_res / rhs_scale,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::DegenerateScan("singular normal equations".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in (row + 1)..3 {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Witnesses and verdict of the quadratic-form violation.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub violated: bool,
    pub beta0: f64,
    pub beta0_pass: bool,
    /// Fraction of `[0, pi/2]` covered by the trailing zero plateau.
    pub plateau_fraction: f64,
    /// First scan point of the trailing plateau.
    pub plateau_start: f64,
    pub plateau_pass: bool,
    pub residual_rel: f64,
    pub residual_pass: bool,
    pub failed_witnesses: Vec<String>,
}

/// Combine scan and fit into the Theorem-4 verdict.
pub fn violation_report(scan: &SuperpositionScan, fit: &SinusoidFit) -> ViolationReport {
    let beta_max = scan.beta.iter().fold(0.0f64, |m, &b| m.max(b.abs()));
    let zero_level = tolerances::PLATEAU_ZERO_REL * beta_max;
    let beta0 = scan.beta[0];

    // Trailing plateau: largest suffix of scan points at numerical zero.
    let mut start_idx = scan.beta.len();
    for i in (0..scan.beta.len()).rev() {
        if scan.beta[i].abs() <= zero_level {
            start_idx = i;
        } else {
            break;
        }
    }
    let (plateau_fraction, plateau_start) = if start_idx < scan.beta.len() {
        (
            (scan.xi[scan.beta.len() - 1] - scan.xi[start_idx]) / std::f64::consts::FRAC_PI_2,
            scan.xi[start_idx],
        )
    } else {
        (0.0, std::f64::consts::FRAC_PI_2)
    };

    let beta0_pass = beta0 > tolerances::BETA0_MIN;
    let plateau_pass = plateau_fraction >= tolerances::PLATEAU_FRACTION_MIN;
    let residual_pass = fit.residual_rel > tolerances::RESIDUAL_VIOLATION_MIN;
    let mut failed = Vec::new();
    if !beta0_pass {
        failed.push(format!("beta(0) = {beta0:.3e} not above {:.0e}", tolerances::BETA0_MIN));
    }
    if !plateau_pass {
        failed.push(format!(
            "zero plateau covers {plateau_fraction:.3} of the range, needs {:.2}",
            tolerances::PLATEAU_FRACTION_MIN
        ));
    }
    if !residual_pass {
        failed.push(format!(
            "fit residual {:.3e} not above {:.0e}",
            fit.residual_rel,
            tolerances::RESIDUAL_VIOLATION_MIN
        ));
    }
    ViolationReport {
        violated: beta0_pass && plateau_pass && residual_pass,
        beta0,
        beta0_pass,
        plateau_fraction,
        plateau_start,
        plateau_pass,
        residual_rel: fit.residual_rel,
        residual_pass,
        failed_witnesses: failed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::KGrid;
    use crate::units::Units;
    use crate::wavepacket::{GaussianComponent, GaussianState};
    use approx::assert_abs_diff_eq;

    /// Two unit bumps with disjoint momentum support: orthogonal by
    /// construction, so mixtures have unit norm automatically.
    fn orthogonal_pair() -> (MomentumWavefunction, MomentumWavefunction) {
        let grid = KGrid::new(0.5, 9.5, 1024).unwrap();
        let a = GaussianState::normalized_on(
            Units::natural(),
            grid,
            &[GaussianComponent { weight: (1.0, 0.0), k0: 2.5, sigma_k: 0.2, x0: -3.0 }],
            "low",
        )
        .unwrap()
        .0;
        let b = GaussianState::normalized_on(
            Units::natural(),
            grid,
            &[GaussianComponent { weight: (0.0, 1.0), k0: 7.5, sigma_k: 0.2, x0: 2.0 }],
            "high",
        )
        .unwrap()
        .0;
        (a, b)
    }

    #[test]
    fn quadratic_forms_scan_as_sinusoids() {
        let (phi, psi) = orthogonal_pair();
        // Rank-one hermitian form |<g, chi>|^2 with a lopsided witness g.
        let g = MomentumWavefunction::linear_combination(
            C64::new(0.8, 0.1),
            &phi,
            C64::new(-0.3, 0.55),
            &psi,
        )
        .unwrap();
        let form = QuadraticFormModel::new("rank-one", move |chi| {
            g.inner(chi).map(|z| z.norm_sqr()).unwrap_or(f64::NAN)
        });
        let scan = quadratic_form_scan(&form, &phi, &psi, 65).unwrap();
        let fit = sinusoid_fit(&scan).unwrap();
        assert!(fit.residual_rel < 1e-10, "residual = {:.3e}", fit.residual_rel);
        assert!(fit.normal_eq_residual < tolerances::FIT_NORMAL_EQ);
    }

    #[test]
    fn q0_scan_is_a_sinusoid() {
        let (phi, psi) = orthogonal_pair();
        let scan = quadratic_form_scan(&QuadraticFormModel::q0(), &phi, &psi, 65).unwrap();
        let fit = sinusoid_fit(&scan).unwrap();
        assert!(fit.residual_rel < 1e-8, "residual = {:.3e}", fit.residual_rel);
    }

    #[test]
    fn identical_states_scan_to_a_constant() {
        let (phi, _) = orthogonal_pair();
        let scan = quadratic_form_scan(&QuadraticFormModel::q0(), &phi, &phi, 65).unwrap();
        let first = scan.beta[0];
        for b in &scan.beta {
            assert_abs_diff_eq!(*b, first, epsilon = 1e-12 * (1.0 + first.abs()));
        }
        let fit = sinusoid_fit(&scan).unwrap();
        assert!(fit.residual_rel < 1e-10);
    }

    #[test]
    fn fit_recovers_exact_sinusoid() {
        let m = 65;
        let xi: Vec<f64> =
            (0..m).map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (m - 1) as f64).collect();
        let beta: Vec<f64> =
            xi.iter().map(|x| 0.3 + 0.1 * (2.0 * x).cos() - 0.05 * (2.0 * x).sin()).collect();
        let scan = SuperpositionScan {
            xi,
            beta,
            phi_label: "a".into(),
            psi_label: "b".into(),
            overlap: (0.0, 0.0),
        };
        let fit = sinusoid_fit(&scan).unwrap();
        assert_abs_diff_eq!(fit.a, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.b, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.c, -0.05, epsilon = 1e-12);
        assert!(fit.residual_rel < 1e-12);
    }

    #[test]
    fn fit_is_a_least_squares_optimum() {
        let m = 65;
        let xi: Vec<f64> =
            (0..m).map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (m - 1) as f64).collect();
        // Non-sinusoidal target.
        let beta: Vec<f64> = xi.iter().map(|x| if *x < 0.7 { 1.0 - x } else { 0.0 }).collect();
        let scan = SuperpositionScan {
            xi: xi.clone(),
            beta: beta.clone(),
            phi_label: "a".into(),
            psi_label: "b".into(),
            overlap: (0.0, 0.0),
        };
        let fit = sinusoid_fit(&scan).unwrap();
        let residual = |a: f64, b: f64, c: f64| -> f64 {
            xi.iter()
                .zip(&beta)
                .map(|(x, v)| {
                    let f = a + b * (2.0 * x).cos() + c * (2.0 * x).sin();
                    (v - f) * (v - f)
                })
                .sum::<f64>()
                .sqrt()
        };
        let base = residual(fit.a, fit.b, fit.c);
        for d in [
            (1e-6, 0.0, 0.0),
            (-1e-6, 0.0, 0.0),
            (0.0, 1e-6, 0.0),
            (0.0, -1e-6, 0.0),
            (0.0, 0.0, 1e-6),
            (0.0, 0.0, -1e-6),
        ] {
            assert!(residual(fit.a + d.0, fit.b + d.1, fit.c + d.2) >= base);
        }
    }

    #[test]
    fn zero_scan_is_degenerate() {
        let scan = SuperpositionScan {
            xi: vec![0.0, 0.5, 1.0],
            beta: vec![0.0, 0.0, 0.0],
            phi_label: "a".into(),
            psi_label: "b".into(),
            overlap: (0.0, 0.0),
        };
        assert!(matches!(sinusoid_fit(&scan), Err(Error::DegenerateScan(_))));
    }

    #[test]
    fn violation_report_flags_missing_witnesses() {
        let m = 65;
        let xi: Vec<f64> =
            (0..m).map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (m - 1) as f64).collect();
        let beta: Vec<f64> =
            xi.iter().map(|x| 0.3 + 0.1 * (2.0 * x).cos() + 0.12 * (2.0 * x).sin()).collect();
        let scan = SuperpositionScan {
            xi,
            beta,
            phi_label: "a".into(),
            psi_label: "b".into(),
            overlap: (0.0, 0.0),
        };
        let fit = sinusoid_fit(&scan).unwrap();
        let report = violation_report(&scan, &fit);
        assert!(!report.violated);
        assert!(!report.failed_witnesses.is_empty());
    }
}
