//! Arrival-time densities for free one-dimensional Schrödinger wave packets.
//!
//! The crate computes and cross-validates two notions of the time at which a
//! freely evolving packet arrives at a fixed point on the line:
//!
//! * **Kijowski's density** `q0(phi_t) = (hbar/2 pi m) |∫ sqrt(k) phi_t(k) dk|^2`,
//!   the distinguished member of the axiomatic family of arrival-time
//!   densities for right-moving states.
//! * **The Bohmian first-crossing density** `B(t)`, obtained from the
//!   probability current `J0` at the arrival point through a running-supremum
//!   cutoff that discards re-entering flux.
//!
//! Both are driven by momentum-space states sampled on a uniform `k` grid and
//! evolved by pointwise phases `exp(-i hbar k^2 t / 2m)`.  The crate exposes:
//!
//! * [`wavepacket`] — states, normalization, arrival-point shifts, free
//!   evolution and the transform to position space;
//! * [`current`] — the current at the arrival point, its cumulative flux and
//!   backflow intervals;
//! * [`kijowski`] — `q0`, the axiom checker and moment computations;
//! * [`bohm`] — detection probability, the `Delta_<` gap set, the cutoff
//!   density and the mean-arrival gap report;
//! * [`trajectories`] — an independent Bohmian-trajectory Monte Carlo
//!   estimate of the detection probability;
//! * [`quadform`] — the superposition scan showing that `B` at a fixed time
//!   is not a quadratic form of the state;
//! * [`scenario`] / [`runner`] — reproducible experiment definitions, CSV and
//!   JSON exports, and the bundled scenario library used by the `toa` binary.

pub mod bohm;
pub mod current;
pub mod error;
pub mod grid;
pub mod kijowski;
pub mod quad;
pub mod quadform;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod tolerances;
pub mod trajectories;
pub mod units;
pub mod wavepacket;

mod ode;

pub use error::{Error, Result};
pub use grid::{KGrid, TimeGrid, XGrid};
pub use units::Units;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
