//! Uniform periodic 1-D lattice and the physical constants attached to a run.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform periodic spatial lattice. Points are `x_j = x_min + j dx` for
/// `j in [0, n)`; the right endpoint `x_max` is identified with `x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
}

impl Grid1D {
    /// Build a grid with `n` points on `[x_min, x_max)`. `n` must be a power
    /// of two of at least 64 so spectral differentiation applies.
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidBounds(x_min, x_max));
        }
        let dx = (x_max - x_min) / n as f64;
        Ok(Grid1D { n, x_min, x_max, dx })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// All grid points in order.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Spectral wavenumbers in FFT ordering:
    /// `[0, 1, ..., n/2-1, -n/2, ..., -1] * 2 pi / L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let base = 2.0 * PI / self.length();
        (0..self.n)
            .map(|j| {
                let m = if j <= self.n / 2 - 1 {
                    j as i64
                } else {
                    j as i64 - self.n as i64
                };
                base * m as f64
            })
            .collect()
    }

    /// Wrap a coordinate into `[x_min, x_max)`.
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let y = x - l * ((x - self.x_min) / l).floor();
        // Guard the half-open interval against rounding at the seam.
        if y >= self.x_max {
            self.x_min
        } else {
            y
        }
    }

    /// Index of the cell `[x_j, x_{j+1})` containing `x` (after wrapping).
    #[inline]
    pub fn cell_of(&self, x: f64) -> usize {
        let w = self.wrap(x);
        (((w - self.x_min) / self.dx) as usize).min(self.n - 1)
    }
}

/// Physical constants of a run: the action scale (the regraduated eta is
/// stored as `hbar`), the mass, and the osmotic mass. The ratio
/// sigma^2/tau = hbar/m is kept for traceability; it never enters on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub m: f64,
    pub mu: f64,
    pub sigma2_over_tau: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, m: f64, mu: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParams("hbar must be positive"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParams("m must be positive"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParams("mu must be nonnegative"));
        }
        Ok(PhysicalParams {
            hbar,
            m,
            mu,
            sigma2_over_tau: hbar / m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_examples() {
        let g = Grid1D::new(256, -20.0, 20.0).unwrap();
        assert_eq!(g.dx(), 0.15625);
        let g = Grid1D::new(64, 0.0, 64.0).unwrap();
        assert_eq!(g.dx(), 1.0);
    }

    #[test]
    fn rejects_bad_sizes_and_bounds() {
        assert!(matches!(
            Grid1D::new(100, -10.0, 10.0),
            Err(Error::InvalidGridSize(100))
        ));
        assert!(matches!(
            Grid1D::new(32, -10.0, 10.0),
            Err(Error::InvalidGridSize(32))
        ));
        assert!(matches!(
            Grid1D::new(128, 5.0, -5.0),
            Err(Error::InvalidBounds(..))
        ));
    }

    #[test]
    fn wavenumber_ordering() {
        let g = Grid1D::new(64, 0.0, 64.0).unwrap();
        let k = g.wavenumbers();
        let base = 2.0 * PI / 64.0;
        assert_eq!(k[0], 0.0);
        assert!((k[1] - base).abs() < 1e-15);
        assert!((k[31] - 31.0 * base).abs() < 1e-12);
        assert!((k[32] + 32.0 * base).abs() < 1e-12);
        assert!((k[63] + base).abs() < 1e-15);
    }

    #[test]
    fn wrap_stays_in_domain() {
        let g = Grid1D::new(64, -2.0, 2.0).unwrap();
        assert!((g.wrap(2.5) - (-1.5)).abs() < 1e-12);
        assert!((g.wrap(-2.5) - 1.5).abs() < 1e-12);
        assert_eq!(g.wrap(2.0), -2.0);
    }

    #[test]
    fn params_tie_ratio_to_hbar() {
        let p = PhysicalParams::new(2.0, 4.0, 1.0).unwrap();
        assert_eq!(p.sigma2_over_tau * p.m, p.hbar);
        assert!(PhysicalParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -0.5).is_err());
    }
}
