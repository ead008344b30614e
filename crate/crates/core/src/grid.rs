//! Periodic grids with period 2π per axis.
//!
//! Wavenumbers are integers in [-n/2, n/2); physical lengths enter the
//! models only through parameters, never through the grid.

use crate::error::CoreError;
use crate::Result;

pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// Uniform periodic grid in one or two dimensions, n points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    fn new(dim: usize, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(CoreError::InvalidGrid(format!("n = {n} < 8")));
        }
        if !n.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!("n = {n} is not a power of two")));
        }
        Ok(Grid { dim, n })
    }

    pub fn new_1d(n: usize) -> Result<Self> {
        Grid::new(1, n)
    }

    pub fn new_2d(n: usize) -> Result<Self> {
        Grid::new(2, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing 2π/n.
    pub fn spacing(&self) -> f64 {
        PERIOD / self.n as f64
    }

    /// Integer wavenumber of FFT bin `i`, in [-n/2, n/2).
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if 2 * i < n {
            i
        } else {
            i - n
        }
    }

    /// A mode is kept by the 2/3 rule when 3|k| <= n on every axis.
    pub fn dealias_keeps(&self, k: &[i64]) -> bool {
        k.iter().all(|&ki| 3 * ki.abs() <= self.n as i64)
    }

    /// Largest wavenumber kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }

    /// Physical coordinates of flat node index `idx` (row-major, x1 slow).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// Wavevector of flat coefficient index `idx`, padded with 0 in 1D.
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.wavenumber(idx), 0],
            _ => [self.wavenumber(idx / self.n), self.wavenumber(idx % self.n)],
        }
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(CoreError::GridMismatch(format!(
                "{}D n={} vs {}D n={}",
                self.dim, self.n, other.dim, other.n
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_non_power_of_two() {
        assert!(Grid::new_1d(4).is_err());
        assert!(Grid::new_2d(48).is_err());
        assert!(Grid::new_2d(64).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = Grid::new_1d(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn dealias_threshold_is_strict_two_thirds() {
        let g = Grid::new_1d(128).unwrap();
        assert!(g.dealias_keeps(&[42]));
        assert!(!g.dealias_keeps(&[43]));
    }

    #[test]
    fn positions_row_major() {
        let g = Grid::new_2d(8).unwrap();
        let p = g.position(8 + 2); // i1 = 1, i2 = 2
        let h = g.spacing();
        assert!((p[0] - h).abs() < 1e-15);
        assert!((p[1] - 2.0 * h).abs() < 1e-15);
    }
}
