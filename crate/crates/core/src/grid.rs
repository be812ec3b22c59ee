//! Uniform sampling grids in momentum, position and time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform momentum grid `[k_min, k_max]` with `n_k` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl KGrid {
    pub fn new(k_min: f64, k_max: f64, n_k: usize) -> Result<Self> {
        if !(k_min < k_max) {
            return Err(Error::invalid(format!(
                "k grid needs k_min < k_max, got [{k_min}, {k_max}]"
            )));
        }
        if n_k < 16 {
            return Err(Error::invalid(format!("k grid needs n_k >= 16, got {n_k}")));
        }
        Ok(KGrid { k_min, k_max, n_k })
    }

    pub fn spacing(&self) -> f64 {
        (self.k_max - self.k_min) / (self.n_k - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.k_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_k).map(move |i| self.point(i))
    }

    /// Largest |k| on the grid; bounds the fastest spatial oscillation.
    pub fn abs_k_max(&self) -> f64 {
        self.k_min.abs().max(self.k_max.abs())
    }

    /// True if every grid point lies strictly on the positive half line.
    pub fn is_positive(&self) -> bool {
        self.k_min > 0.0
    }

    /// Grid with the same bounds and doubled point count (convergence checks).
    pub fn refined(&self) -> Self {
        KGrid { k_min: self.k_min, k_max: self.k_max, n_k: 2 * self.n_k }
    }
}

/// Uniform position grid `[x_min, x_max]` with `n_x` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl XGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::invalid(format!(
                "x grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_x < 16 {
            return Err(Error::invalid(format!("x grid needs n_x >= 16, got {n_x}")));
        }
        Ok(XGrid { x_min, x_max, n_x })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_x).map(move |i| self.point(i))
    }
}

/// Uniform time grid `[t_min, t_max]` with `n_t` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_t: usize) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(Error::invalid(format!(
                "time grid needs t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_t < 64 {
            return Err(Error::invalid(format!("time grid needs n_t >= 64, got {n_t}")));
        }
        Ok(TimeGrid { t_min, t_max, n_t })
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.t_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_t).map(move |i| self.point(i))
    }

    /// Index of the sample closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let raw = ((t - self.t_min) / self.spacing()).round();
        (raw.max(0.0) as usize).min(self.n_t - 1)
    }

    pub fn refined(&self) -> Self {
        TimeGrid { t_min: self.t_min, t_max: self.t_max, n_t: 2 * self.n_t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_hit_bounds() {
        let g = KGrid::new(1.0, 9.0, 17).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 17);
        assert!((pts[0] - 1.0).abs() < 1e-15);
        assert!((pts[16] - 9.0).abs() < 1e-15);
        assert!((g.spacing() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(KGrid::new(2.0, 1.0, 64).is_err());
        assert!(KGrid::new(0.0, 1.0, 8).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 32).is_err());
        assert!(XGrid::new(0.0, 0.0, 64).is_err());
    }

    #[test]
    fn nearest_index_clamps() {
        let g = TimeGrid::new(-1.0, 1.0, 101).unwrap();
        assert_eq!(g.nearest_index(-5.0), 0);
        assert_eq!(g.nearest_index(5.0), 100);
        assert_eq!(g.nearest_index(0.0), 50);
    }
}
