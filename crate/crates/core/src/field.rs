//! Real scalar fields on periodic grids, stored together with their
//! discrete Fourier coefficients.
//!
//! Transform normalization: the coefficient at wavevector 0 equals the
//! spatial mean, i.e. forward = FFT / n^d, inverse = plain inverse FFT.
//! Fields are immutable after construction; every operation returns a new
//! field, so sharing across threads is safe.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::CoreError;
use crate::grid::Grid;
use crate::rng::CounterRng;
use crate::symbol::MultiplierSymbol;
use crate::Result;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn fft_in_place(buf: &mut [Complex64], n: usize, inverse: bool) {
    let plan = PLANS.with(|p| {
        p.borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    });
    plan.process(buf);
}

/// Maximum tolerated imaginary remnant when a coefficient set is claimed to
/// represent a real field (relative to the field scale).
const HERMITIAN_TOL: f64 = 1e-9;

/// Real scalar field paired with its Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Field from physical samples (row-major, x1 slow in 2D).
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count must match grid");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward(grid, &mut buf);
        SpectralField { grid, values, coeffs: buf }
    }

    /// Field from Fourier coefficients (FFT bin order). Panics if the
    /// coefficients do not describe a real field.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count must match grid");
        let mut buf = coeffs.clone();
        inverse(grid, &mut buf);
        let scale = buf.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
        let worst = buf.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
        assert!(
            worst <= HERMITIAN_TOL * scale,
            "non-Hermitian coefficients: imaginary remnant {worst:.3e} at scale {scale:.3e}"
        );
        let values = buf.iter().map(|c| c.re).collect();
        SpectralField { grid, values, coeffs }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        SpectralField::from_values(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            values: vec![0.0; grid.len()],
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let mut coeffs = vec![Complex64::default(); grid.len()];
        coeffs[0] = Complex64::new(c, 0.0);
        SpectralField { grid, values: vec![c; grid.len()], coeffs }
    }

    /// Random real field with Hermitian-symmetric coefficients supported on
    /// |k|_inf <= max_mode, coefficient amplitudes in [-amp, amp].
    pub fn random_band_limited(
        grid: Grid,
        max_mode: i64,
        amp: f64,
        mean: f64,
        rng: &mut CounterRng,
    ) -> Self {
        let n = grid.n();
        let len = grid.len();
        let mut coeffs = vec![Complex64::default(); len];
        for idx in 0..len {
            let k = grid.wavevector(idx);
            if k[0].abs() > max_mode || k[1].abs() > max_mode {
                continue;
            }
            if k == [0, 0] {
                coeffs[idx] = Complex64::new(mean, 0.0);
                continue;
            }
            // Fill each conjugate pair once, from its lexicographically
            // positive member.
            if k[0] < 0 || (k[0] == 0 && k[1] < 0) {
                continue;
            }
            let c = Complex64::new(rng.symmetric(amp), rng.symmetric(amp));
            let conj_idx = conj_index(grid, idx);
            if conj_idx == idx {
                coeffs[idx] = Complex64::new(c.re, 0.0);
            } else {
                coeffs[idx] = c;
                coeffs[conj_idx] = c.conj();
            }
            let _ = n;
        }
        SpectralField::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Spatial mean (the zero coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    // ---- norms and reductions (grid quadrature) ----

    pub fn quadrature_weight(&self) -> f64 {
        self.grid.spacing().powi(self.grid.dim() as i32)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.quadrature_weight()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.quadrature_weight()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integral over the domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.quadrature_weight()
    }

    /// L2 inner product by grid quadrature.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.quadrature_weight()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    // ---- pointwise algebra ----

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        SpectralField::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip(&self, other: &SpectralField, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        SpectralField::from_values(self.grid, v)
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &SpectralField) -> SpectralField {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        self.map(|v| s * v)
    }

    pub fn add_scalar(&self, s: f64) -> SpectralField {
        self.map(|v| v + s)
    }

    // ---- spectral operators ----

    /// Apply a Fourier multiplier.
    pub fn apply(&self, m: &MultiplierSymbol) -> Result<SpectralField> {
        m.check_dim(self.grid.dim())?;
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = self.grid.wavevector(idx);
                m.value(&k[..self.grid.dim()]) * c
            })
            .collect();
        Ok(SpectralField::from_coeffs(self.grid, coeffs))
    }

    /// Spectral derivative along `axis` (0-based). The self-conjugate
    /// Nyquist mode is zeroed, the usual convention for odd symbols on even
    /// grids.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField> {
        if axis >= self.grid.dim() {
            return Err(CoreError::InvalidAxis { axis, dim: self.grid.dim() });
        }
        let nyq = -(self.grid.n() as i64) / 2;
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = self.grid.wavevector(idx)[axis];
                if k == nyq {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, k as f64) * c
                }
            })
            .collect();
        Ok(SpectralField::from_coeffs(self.grid, coeffs))
    }

    /// Inverse Laplacian with the mean projected out.
    pub fn inverse_laplacian(&self) -> SpectralField {
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = self.grid.wavevector(idx);
                let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
                if k2 == 0.0 {
                    Complex64::default()
                } else {
                    c / k2
                }
            })
            .collect();
        SpectralField::from_coeffs(self.grid, coeffs)
    }

    /// 1D Hilbert transform, symbol -i sign(k); mean and Nyquist map to 0.
    pub fn hilbert(&self) -> Result<SpectralField> {
        if self.grid.dim() != 1 {
            return Err(CoreError::DimensionMismatch { expected: 1, found: self.grid.dim() });
        }
        let nyq = -(self.grid.n() as i64) / 2;
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = self.grid.wavenumber(idx);
                if k == 0 || k == nyq {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, -(k.signum() as f64)) * c
                }
            })
            .collect();
        Ok(SpectralField::from_coeffs(self.grid, coeffs))
    }

    /// 2/3-rule dealiasing: zero every coefficient with 3|k| > n on any axis.
    pub fn dealiased(&self) -> SpectralField {
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let k = self.grid.wavevector(idx);
                if self.grid.dealias_keeps(&k) {
                    c
                } else {
                    Complex64::default()
                }
            })
            .collect();
        SpectralField::from_coeffs(self.grid, coeffs)
    }

    pub fn project_mean_zero(&self) -> SpectralField {
        self.add_scalar(-self.mean())
    }

    /// Resample on a grid twice as fine by zero padding (exact for
    /// band-limited fields).
    pub fn refined(&self) -> SpectralField {
        let n = self.grid.n();
        let fine = if self.grid.dim() == 1 {
            Grid::new_1d(2 * n).expect("refinement keeps grid valid")
        } else {
            Grid::new_2d(2 * n).expect("refinement keeps grid valid")
        };
        let mut coeffs = vec![Complex64::default(); fine.len()];
        for idx in 0..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let fidx = index_of_wavevector(&fine, k);
            coeffs[fidx] = self.coeffs[idx];
        }
        SpectralField::from_coeffs(fine, coeffs)
    }

    /// Sup of |f(x + shift) - f(x)| for an integer grid shift (circular).
    pub fn sup_shifted_diff(&self, shift: [i64; 2]) -> f64 {
        let n = self.grid.n() as i64;
        let mut worst = 0.0f64;
        match self.grid.dim() {
            1 => {
                let s = shift[0].rem_euclid(n) as usize;
                for i in 0..n as usize {
                    let j = (i + s) % n as usize;
                    worst = worst.max((self.values[j] - self.values[i]).abs());
                }
            }
            _ => {
                let s1 = shift[0].rem_euclid(n) as usize;
                let s2 = shift[1].rem_euclid(n) as usize;
                let nu = n as usize;
                for i1 in 0..nu {
                    let j1 = (i1 + s1) % nu;
                    for i2 in 0..nu {
                        let j2 = (i2 + s2) % nu;
                        let d = self.values[j1 * nu + j2] - self.values[i1 * nu + i2];
                        worst = worst.max(d.abs());
                    }
                }
            }
        }
        worst
    }

    // ---- off-grid evaluation ----

    /// Exact evaluation by direct Fourier summation over retained modes.
    pub fn eval_fourier(&self, x: [f64; 2]) -> f64 {
        let mut acc = Complex64::default();
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let k = self.grid.wavevector(idx);
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc.re
    }

    /// Periodic cubic Lagrange interpolation (tensor product in 2D); error
    /// O(h^4) for smooth fields.
    pub fn eval_cubic(&self, x: [f64; 2]) -> f64 {
        eval_cubic_grid(&self.grid, &self.values, x)
    }
}

/// Cubic Lagrange interpolation of raw grid samples at an off-grid point.
pub fn eval_cubic_grid(grid: &Grid, values: &[f64], x: [f64; 2]) -> f64 {
    let n = grid.n();
    let h = grid.spacing();
    match grid.dim() {
        1 => {
            let (i0, w) = cubic_stencil(x[0], h, n);
            (0..4).map(|a| w[a] * values[(i0 + a) % n]).sum()
        }
        _ => {
            let (i0, w1) = cubic_stencil(x[0], h, n);
            let (j0, w2) = cubic_stencil(x[1], h, n);
            let mut acc = 0.0;
            for a in 0..4 {
                let row = ((i0 + a) % n) * n;
                let mut inner = 0.0;
                for b in 0..4 {
                    inner += w2[b] * values[row + (j0 + b) % n];
                }
                acc += w1[a] * inner;
            }
            acc
        }
    }
}

/// Base index and Lagrange weights of the 4-point stencil around x.
fn cubic_stencil(x: f64, h: f64, n: usize) -> (usize, [f64; 4]) {
    let t = x / h;
    let i = t.floor();
    let s = t - i;
    // Nodes i-1, i, i+1, i+2; weights are the cubic Lagrange basis at s.
    let w = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    let ni = n as i64;
    let base = ((i as i64 - 1).rem_euclid(ni)) as usize;
    (base, w)
}

/// Inverse transform straight to physical samples; used on coefficient
/// arrays that are Hermitian by construction (solver internals).
pub(crate) fn inverse_to_values(grid: &Grid, coeffs: &[num_complex::Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse(*grid, &mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Forward transform of physical samples to coefficients.
pub(crate) fn forward_from_values(grid: &Grid, values: &[f64]) -> Vec<num_complex::Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(*grid, &mut buf);
    buf
}

/// Flat coefficient index of wavevector k on `grid`.
pub fn index_of_wavevector(grid: &Grid, k: [i64; 2]) -> usize {
    let n = grid.n() as i64;
    let wrap = |ki: i64| ki.rem_euclid(n) as usize;
    match grid.dim() {
        1 => wrap(k[0]),
        _ => wrap(k[0]) * grid.n() + wrap(k[1]),
    }
}

fn conj_index(grid: Grid, idx: usize) -> usize {
    let k = grid.wavevector(idx);
    index_of_wavevector(&grid, [-k[0], -k[1]])
}

fn forward(grid: Grid, buf: &mut [Complex64]) {
    let n = grid.n();
    match grid.dim() {
        1 => fft_in_place(buf, n, false),
        _ => fft_2d(buf, n, false),
    }
    let scale = 1.0 / grid.len() as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

fn inverse(grid: Grid, buf: &mut [Complex64]) {
    let n = grid.n();
    match grid.dim() {
        1 => fft_in_place(buf, n, true),
        _ => fft_2d(buf, n, true),
    }
}

fn fft_2d(buf: &mut [Complex64], n: usize, inv: bool) {
    // Rows (contiguous x2 lines) first, then columns through a scratch line.
    for row in buf.chunks_exact_mut(n) {
        fft_in_place(row, n, inv);
    }
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        fft_in_place(&mut col, n, inv);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
}
