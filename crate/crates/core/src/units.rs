//! Physical constants of the evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant and particle mass entering the free evolution phase
/// `exp(-i hbar k^2 t / 2m)` and the prefactors of `J0` and `q0`.
///
/// The default is natural units `hbar = m = 1`; scenario configs may override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Units {
    pub fn natural() -> Self {
        Units { hbar: 1.0, mass: 1.0 }
    }

    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::invalid(format!(
                "units must be strictly positive, got hbar = {hbar}, mass = {mass}"
            )));
        }
        Ok(Units { hbar, mass })
    }

    /// Group velocity of the plane wave with wavenumber `k`.
    pub fn velocity(&self, k: f64) -> f64 {
        self.hbar * k / self.mass
    }
}

impl Default for Units {
    fn default() -> Self {
        Units::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(Units::new(0.0, 1.0).is_err());
        assert!(Units::new(1.0, -2.0).is_err());
        assert!(Units::new(f64::NAN, 1.0).is_err());
        assert!(Units::new(1.0, 1.0).is_ok());
    }
}
