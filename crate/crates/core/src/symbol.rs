//! Fourier multiplier symbols: the strain operators A and B, Riesz
//! transforms and the 1D Hilbert transform.
//!
//! All degree-zero symbols assign 0 to the mean mode, matching the
//! decaying-at-infinity normalization; identities like 4(A^2 + B^2) = I
//! therefore hold on mean-zero fields only.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::SpectralField;
use crate::Result;

type EvalFn = dyn Fn(&[i64]) -> Complex64 + Send + Sync;

/// A scalar Fourier multiplier: wavevector -> real or purely imaginary
/// value, with the zero-mode value stored explicitly.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: &'static str,
    dim: Option<usize>,
    eval: Arc<EvalFn>,
    at_zero: Complex64,
}

impl std::fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultiplierSymbol({})", self.name)
    }
}

impl MultiplierSymbol {
    pub fn new(
        name: &'static str,
        dim: Option<usize>,
        at_zero: Complex64,
        eval: impl Fn(&[i64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSymbol { name, dim, eval: Arc::new(eval), at_zero }
    }

    /// A = (R1^2 - R2^2)/2, symbol (k2^2 - k1^2) / (2|k|^2).
    pub fn strain_a() -> Self {
        MultiplierSymbol::new("A", Some(2), Complex64::default(), |k| {
            let (k1, k2) = (k[0] as f64, k[1] as f64);
            Complex64::new((k2 * k2 - k1 * k1) / (2.0 * (k1 * k1 + k2 * k2)), 0.0)
        })
    }

    /// B = R1 R2, symbol -k1 k2 / |k|^2.
    pub fn strain_b() -> Self {
        MultiplierSymbol::new("B", Some(2), Complex64::default(), |k| {
            let (k1, k2) = (k[0] as f64, k[1] as f64);
            Complex64::new(-(k1 * k2) / (k1 * k1 + k2 * k2), 0.0)
        })
    }

    /// Riesz transform R_j, symbol i k_j / |k|.
    pub fn riesz(axis: usize) -> Self {
        let name: &'static str = match axis {
            0 => "R1",
            _ => "R2",
        };
        MultiplierSymbol::new(name, None, Complex64::default(), move |k| {
            let norm = (k.iter().map(|&ki| (ki * ki) as f64).sum::<f64>()).sqrt();
            Complex64::new(0.0, k[axis] as f64 / norm)
        })
    }

    /// 1D Hilbert transform, symbol -i sign(k).
    pub fn hilbert() -> Self {
        MultiplierSymbol::new("H", Some(1), Complex64::default(), |k| {
            Complex64::new(0.0, -(k[0].signum() as f64))
        })
    }

    /// Inverse Laplacian, symbol 1/|k|^2 with the mean projected out.
    pub fn inverse_laplacian() -> Self {
        MultiplierSymbol::new("inv_laplacian", None, Complex64::default(), |k| {
            let k2 = k.iter().map(|&ki| (ki * ki) as f64).sum::<f64>();
            Complex64::new(1.0 / k2, 0.0)
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != dim => Err(CoreError::DimensionMismatch { expected: d, found: dim }),
            _ => Ok(()),
        }
    }

    /// Symbol value at wavevector k; the stored zero-mode value at k = 0.
    pub fn value(&self, k: &[i64]) -> Complex64 {
        if k.iter().all(|&ki| ki == 0) {
            self.at_zero
        } else {
            (self.eval)(k)
        }
    }
}

/// Apply a multiplier: output coefficient at k is m(k) * f_hat(k).
pub fn apply_multiplier(f: &SpectralField, m: &MultiplierSymbol) -> Result<SpectralField> {
    f.apply(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rng::CounterRng;

    fn g2(n: usize) -> Grid {
        Grid::new_2d(n).unwrap()
    }

    /// Brute-force multiplier application by direct DFT sums, independent
    /// of the FFT path. O(N^2), test sizes only.
    fn apply_by_dft(f: &SpectralField, m: &MultiplierSymbol) -> Vec<f64> {
        let grid = *f.grid();
        let len = grid.len();
        let mut coeffs = vec![Complex64::default(); len];
        for kidx in 0..len {
            let k = grid.wavevector(kidx);
            let mut acc = Complex64::default();
            for vidx in 0..len {
                let x = grid.position(vidx);
                let phase = -(k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                acc += f.values()[vidx] * Complex64::from_polar(1.0, phase);
            }
            coeffs[kidx] = m.value(&k[..grid.dim()]) * acc / len as f64;
        }
        let mut out = vec![0.0; len];
        for (vidx, o) in out.iter_mut().enumerate() {
            let x = grid.position(vidx);
            let mut acc = Complex64::default();
            for (kidx, &c) in coeffs.iter().enumerate() {
                let k = grid.wavevector(kidx);
                let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
                acc += c * Complex64::from_polar(1.0, phase);
            }
            *o = acc.re;
        }
        out
    }

    #[test]
    fn a_symbol_on_single_mode() {
        // cos(x1) is an eigenfunction; symbol at (±1, 0) is -1/2.
        let f = SpectralField::from_fn(g2(32), |x| x[0].cos());
        let af = f.apply(&MultiplierSymbol::strain_a()).unwrap();
        let expect = f.scale(-0.5);
        assert!(af.sub(&expect).linf_norm() < 1e-13);
    }

    #[test]
    fn b_symbol_matches_dft_oracle() {
        // B cos(x1)cos(x2) = (1/2) sin(x1) sin(x2); checked against the
        // hand-expanded DFT and against the closed form.
        let f = SpectralField::from_fn(g2(16), |x| x[0].cos() * x[1].cos());
        let bf = f.apply(&MultiplierSymbol::strain_b()).unwrap();
        let expect = SpectralField::from_fn(g2(16), |x| 0.5 * x[0].sin() * x[1].sin());
        assert!(bf.sub(&expect).linf_norm() < 1e-13);

        let oracle = apply_by_dft(&f, &MultiplierSymbol::strain_b());
        let worst = bf
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn zero_symbol_kills_constants() {
        let c = SpectralField::constant(g2(16), 7.5);
        for m in [
            MultiplierSymbol::strain_a(),
            MultiplierSymbol::strain_b(),
            MultiplierSymbol::riesz(0),
            MultiplierSymbol::inverse_laplacian(),
        ] {
            assert!(c.apply(&m).unwrap().linf_norm() < 1e-14, "{}", m.name());
        }
    }

    #[test]
    fn dimension_check() {
        let f1 = SpectralField::constant(Grid::new_1d(16).unwrap(), 1.0);
        assert!(f1.apply(&MultiplierSymbol::strain_a()).is_err());
    }

    #[test]
    fn symbols_are_homogeneous_degree_zero() {
        for m in [MultiplierSymbol::strain_a(), MultiplierSymbol::strain_b()] {
            for k in [[1i64, 2], [3, -1], [-2, 5]] {
                let a = m.value(&k);
                let b = m.value(&[2 * k[0], 2 * k[1]]);
                assert!((a - b).norm() < 1e-15);
            }
        }
        let h = MultiplierSymbol::hilbert();
        assert_eq!(h.value(&[3]), h.value(&[6]));
    }

    #[test]
    fn strain_identity_and_commutation() {
        let a = MultiplierSymbol::strain_a();
        let b = MultiplierSymbol::strain_b();
        let mut rng = CounterRng::new(21);
        let f = SpectralField::random_band_limited(g2(64), 20, 1.0, 0.0, &mut rng);

        let aa = f.apply(&a).unwrap().apply(&a).unwrap();
        let bb = f.apply(&b).unwrap().apply(&b).unwrap();
        let ident = aa.add(&bb).scale(4.0);
        assert!(ident.sub(&f).linf_norm() <= 1e-12 * f.linf_norm());

        let ab = f.apply(&a).unwrap().apply(&b).unwrap();
        let ba = f.apply(&b).unwrap().apply(&a).unwrap();
        assert!(ab.sub(&ba).linf_norm() <= 1e-12 * f.linf_norm());
    }

    #[test]
    fn self_adjoint_in_l2() {
        let a = MultiplierSymbol::strain_a();
        let mut rng = CounterRng::new(33);
        let f = SpectralField::random_band_limited(g2(64), 20, 1.0, 0.2, &mut rng);
        let g = SpectralField::random_band_limited(g2(64), 20, 1.0, -0.1, &mut rng);
        let lhs = f.apply(&a).unwrap().inner(&g);
        let rhs = f.inner(&g.apply(&a).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * f.l2_norm() * g.l2_norm());
    }
}
