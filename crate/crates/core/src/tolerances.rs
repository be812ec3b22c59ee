//! Numerical thresholds used across the crate.
//!
//! Every tolerance that a check or an acceptance gate depends on is pinned
//! here rather than scattered through call sites.

/// Norm drift allowed across free evolution (pointwise phase multiplication).
pub const UNITARITY: f64 = 1e-14;

/// Allowed defect of `‖phi‖^2 = 1` after `normalize`.
pub const NORMALIZE: f64 = 1e-12;

/// Agreement between the momentum-space and position-space norms.
pub const PARSEVAL: f64 = 1e-8;

/// Current magnitude required at the time-window ends before a cumulative
/// flux anchored at zero is meaningful.
pub const ENDPOINT_DECAY: f64 = 1e-10;

/// Relative position-space density allowed at the x-grid edges.
pub const SUPPORT_LEAK_REL: f64 = 1e-10;

/// Factorized vs direct double-integral current agreement.
pub const CURRENT_FACTORIZATION: f64 = 1e-10;

/// Flux bound slack: `-eps <= f <= 1 + eps` for right movers.
pub const FLUX_BOUNDS: f64 = 1e-8;

/// `f(t_max) = 1` tolerance for right movers, and the general unit-integral
/// tolerance for arrival densities.
pub const UNIT_INTEGRAL: f64 = 1e-6;

/// Agreement between independent quadrature routes for moments and the gap.
pub const MOMENT_ROUTE: f64 = 1e-6;

/// Equality-branch gap bound for a state without backflow.
pub const GAP_EQUALITY: f64 = 1e-8;

/// The forward gap may go negative only by quadrature noise.
pub const GAP_NONNEGATIVE: f64 = 1e-9;

/// Threshold on the forward gap above which backflow is diagnosed.
pub const HAS_BACKFLOW_GAP: f64 = 1e-7;

/// Pointwise floor for arrival densities (`B >= -1e-10`, `q0 >= -1e-10`).
pub const DENSITY_FLOOR: f64 = -1e-10;

/// A mixed-momentum state driving `B` below this is flagged, not clamped.
pub const DENSITY_FLAG: f64 = -1e-6;

/// Default cutoff tolerance for the chi-active set, relative to `max f`.
pub const CHI_REL: f64 = 1e-9;

/// Default threshold separating backflow from quadrature noise.
pub const BACKFLOW_THRESHOLD: f64 = 1e-10;

/// Minimal |min J| certifying the tuned backflow state.
pub const BACKFLOW_CURRENT_MIN: f64 = 1e-4;

/// Mass fraction at `k <= 0` beyond which `q0` refuses the state.
pub const Q0_DOMAIN_TAIL: f64 = 1e-12;

/// Quadratic-form homogeneity check `q(c phi) = |c|^2 q(phi)`.
pub const HOMOGENEITY: f64 = 1e-12;

/// Axiom-4 surrogate: `t^2 q(phi_t)` at the window ends must sit below this.
pub const SECOND_MOMENT_TAIL: f64 = 1e-8;

/// Detection probability considered suspicious below this (packet misses the
/// detector); results are still normalized by it.
pub const P_INFINITY_SUSPICIOUS: f64 = 0.5;

/// Monte Carlo deviation bound in units of the binomial standard error.
pub const MC_SIGMA_BOUND: f64 = 4.0;

/// Kolmogorov-Smirnov critical coefficient at the 1% level (`D * sqrt(N)`).
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Node floor for the guidance velocity, relative to the peak density.
pub const NODE_FLOOR_REL: f64 = 1e-12;

/// Fraction of flagged integration steps above which an ensemble is rejected.
pub const NODE_FAILURE_MAX: f64 = 1e-3;

/// Local error tolerance of the trajectory integrator.
pub const ODE_LOCAL_TOL: f64 = 1e-8;

/// Scan value counted as part of the zero plateau, relative to `max beta`.
pub const PLATEAU_ZERO_REL: f64 = 1e-10;

/// Witnesses for the quadratic-form violation verdict.
pub const BETA0_MIN: f64 = 1e-3;
pub const PLATEAU_FRACTION_MIN: f64 = 0.20;
pub const RESIDUAL_VIOLATION_MIN: f64 = 0.02;
pub const RESIDUAL_CONTROL_MAX: f64 = 1e-8;

/// Normal-equation residual allowed for the least-squares sinusoid fit.
pub const FIT_NORMAL_EQ: f64 = 1e-12;

/// Relative change allowed for reported moments under grid doubling.
pub const CONVERGENCE_REL: f64 = 1e-6;
