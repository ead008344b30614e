//! Steady Stokes inversion: velocity, velocity gradient and the
//! (λ, μ, ω) decomposition from the added stress.
//!
//! With -Δu + ∇p = k div τ and div u = 0, the velocity is
//! u^i = k Λ^{-1}(R_l τ^{il} + R_i R_m R_n τ^{mn}); in coefficients
//! u_hat^i = k [ i k_l τ^{il} / |k|^2 - i k_i k_m k_n τ^{mn} / |k|^4 ].
//! Mean modes of the stress produce no velocity, and pressure only ever
//! exists inside the residual functional.

use num_complex::Complex64;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::symbol::MultiplierSymbol;
use crate::Result;

/// Symmetric 2D stress with components σ11, σ12, σ22 on a shared grid.
///
/// Positivity ((c/2)^2 >= a^2 + b^2) is a monitored property of solver
/// states, never enforced here.
#[derive(Debug, Clone)]
pub struct StressField2D {
    s11: SpectralField,
    s12: SpectralField,
    s22: SpectralField,
}

impl StressField2D {
    pub fn new(s11: SpectralField, s12: SpectralField, s22: SpectralField) -> Result<Self> {
        s11.grid().same_as(s12.grid())?;
        s11.grid().same_as(s22.grid())?;
        if s11.grid().dim() != 2 {
            return Err(crate::CoreError::DimensionMismatch {
                expected: 2,
                found: s11.grid().dim(),
            });
        }
        Ok(StressField2D { s11, s12, s22 })
    }

    /// Build from the shear variables a = (σ11-σ22)/2, b = σ12 and the
    /// trace c = σ11 + σ22.
    pub fn from_abc(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> Result<Self> {
        let half_c = c.scale(0.5);
        StressField2D::new(half_c.add(a), b.clone(), half_c.sub(a))
    }

    pub fn grid(&self) -> &Grid {
        self.s11.grid()
    }

    pub fn s11(&self) -> &SpectralField {
        &self.s11
    }

    pub fn s12(&self) -> &SpectralField {
        &self.s12
    }

    pub fn s22(&self) -> &SpectralField {
        &self.s22
    }

    /// a = (σ11 - σ22)/2.
    pub fn a(&self) -> SpectralField {
        self.s11.sub(&self.s22).scale(0.5)
    }

    /// b = σ12.
    pub fn b(&self) -> SpectralField {
        self.s12.clone()
    }

    /// c = Tr σ.
    pub fn c(&self) -> SpectralField {
        self.s11.add(&self.s22)
    }

    /// Pointwise Euclidean (Frobenius) norm field sqrt(Tr σ^T σ).
    pub fn frobenius(&self) -> SpectralField {
        let v: Vec<f64> = self
            .s11
            .values()
            .iter()
            .zip(self.s12.values())
            .zip(self.s22.values())
            .map(|((&x, &y), &z)| (x * x + 2.0 * y * y + z * z).sqrt())
            .collect();
        SpectralField::from_values(*self.grid(), v)
    }

    /// Sup over the grid of the pointwise Euclidean norm.
    pub fn linf_norm(&self) -> f64 {
        self.frobenius().linf_norm()
    }
}

/// Divergence-free 2D velocity with spectral gradient accessors.
#[derive(Debug, Clone)]
pub struct VelocityField2D {
    u1: SpectralField,
    u2: SpectralField,
}

impl VelocityField2D {
    pub fn new(u1: SpectralField, u2: SpectralField) -> Result<Self> {
        u1.grid().same_as(u2.grid())?;
        Ok(VelocityField2D { u1, u2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        VelocityField2D { u1: SpectralField::zeros(grid), u2: SpectralField::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid {
        self.u1.grid()
    }

    pub fn u1(&self) -> &SpectralField {
        &self.u1
    }

    pub fn u2(&self) -> &SpectralField {
        &self.u2
    }

    /// ∂_j u^i, spectral.
    pub fn gradient_entry(&self, i: usize, j: usize) -> Result<SpectralField> {
        let comp = if i == 0 { &self.u1 } else { &self.u2 };
        comp.derivative(j)
    }

    /// All four gradient entries [[∂1u1, ∂2u1], [∂1u2, ∂2u2]].
    pub fn gradient(&self) -> Result<[[SpectralField; 2]; 2]> {
        Ok([
            [self.u1.derivative(0)?, self.u1.derivative(1)?],
            [self.u2.derivative(0)?, self.u2.derivative(1)?],
        ])
    }

    /// Sup of the pointwise Euclidean norm of ∇u.
    pub fn grad_inf_norm(&self) -> Result<f64> {
        let g = self.gradient()?;
        let mut worst = 0.0f64;
        for idx in 0..self.grid().len() {
            let mut s = 0.0;
            for gi in &g {
                for gij in gi {
                    let v = gij.values()[idx];
                    s += v * v;
                }
            }
            worst = worst.max(s.sqrt());
        }
        Ok(worst)
    }

    pub fn linf_norm(&self) -> f64 {
        self.u1.linf_norm().max(self.u2.linf_norm())
    }

    /// Sup norm of the spectral divergence.
    pub fn divergence_inf(&self) -> Result<f64> {
        Ok(self.u1.derivative(0)?.add(&self.u2.derivative(1)?).linf_norm())
    }
}

/// Invert the Stokes system for the velocity induced by a stress.
pub fn velocity_from_stress(tau: &StressField2D, k: f64) -> Result<VelocityField2D> {
    let grid = *tau.grid();
    let n = grid.len();
    let mut u1 = vec![Complex64::default(); n];
    let mut u2 = vec![Complex64::default(); n];
    let t11 = tau.s11.coeffs();
    let t12 = tau.s12.coeffs();
    let t22 = tau.s22.coeffs();
    for idx in 0..n {
        let kv = grid.wavevector(idx);
        let (k1, k2) = (kv[0] as f64, kv[1] as f64);
        let k2norm = k1 * k1 + k2 * k2;
        if k2norm == 0.0 {
            continue;
        }
        let i = Complex64::new(0.0, 1.0);
        // div τ rows and the scalar k_m k_n τ^{mn}.
        let div1 = i * (k1 * t11[idx] + k2 * t12[idx]);
        let div2 = i * (k1 * t12[idx] + k2 * t22[idx]);
        let kk = k1 * k1 * t11[idx] + 2.0 * k1 * k2 * t12[idx] + k2 * k2 * t22[idx];
        u1[idx] = k * (div1 / k2norm - i * k1 * kk / (k2norm * k2norm));
        u2[idx] = k * (div2 / k2norm - i * k2 * kk / (k2norm * k2norm));
    }
    VelocityField2D::new(
        SpectralField::from_coeffs(grid, u1),
        SpectralField::from_coeffs(grid, u2),
    )
}

/// ∇u = k R τ, computed as the spectral derivative of the inverted velocity.
pub fn gradient_from_stress(tau: &StressField2D, k: f64) -> Result<[[SpectralField; 2]; 2]> {
    velocity_from_stress(tau, k)?.gradient()
}

/// The (λ, μ, ω) decomposition of ∇u directly from the shear stress parts:
/// ω = 2k(Ab - Ba), λ = Bω, μ = -Aω.
pub fn lambda_mu_omega(
    a: &SpectralField,
    b: &SpectralField,
    k: f64,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    a.grid().same_as(b.grid())?;
    let op_a = MultiplierSymbol::strain_a();
    let op_b = MultiplierSymbol::strain_b();
    let omega = b.apply(&op_a)?.sub(&a.apply(&op_b)?).scale(2.0 * k);
    let lambda = omega.apply(&op_b)?;
    let mu = omega.apply(&op_a)?.scale(-1.0);
    Ok((lambda, mu, omega))
}

/// Sup-norm residual of -Δu + ∇p - k div τ with p = -k R_m R_n τ^{mn}.
pub fn stokes_residual(tau: &StressField2D, u: &VelocityField2D, k: f64) -> Result<f64> {
    tau.grid().same_as(u.grid())?;
    let grid = *tau.grid();
    let n = grid.len();
    let mut r1 = vec![Complex64::default(); n];
    let mut r2 = vec![Complex64::default(); n];
    let t11 = tau.s11.coeffs();
    let t12 = tau.s12.coeffs();
    let t22 = tau.s22.coeffs();
    let u1 = u.u1.coeffs();
    let u2 = u.u2.coeffs();
    for idx in 0..n {
        let kv = grid.wavevector(idx);
        let (k1, k2) = (kv[0] as f64, kv[1] as f64);
        let k2norm = k1 * k1 + k2 * k2;
        let i = Complex64::new(0.0, 1.0);
        let div1 = i * (k1 * t11[idx] + k2 * t12[idx]);
        let div2 = i * (k1 * t12[idx] + k2 * t22[idx]);
        // Pressure eliminates the longitudinal stress part.
        let p = if k2norm == 0.0 {
            Complex64::default()
        } else {
            k * (k1 * k1 * t11[idx] + 2.0 * k1 * k2 * t12[idx] + k2 * k2 * t22[idx]) / k2norm
        };
        r1[idx] = k2norm * u1[idx] + i * k1 * p - k * div1;
        r2[idx] = k2norm * u2[idx] + i * k2 * p - k * div2;
    }
    let f1 = SpectralField::from_coeffs(grid, r1);
    let f2 = SpectralField::from_coeffs(grid, r2);
    Ok(f1.linf_norm().max(f2.linf_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn g(n: usize) -> Grid {
        Grid::new_2d(n).unwrap()
    }

    fn random_stress(grid: Grid, rng: &mut CounterRng) -> StressField2D {
        let m = grid.dealias_cutoff().min(12);
        StressField2D::new(
            SpectralField::random_band_limited(grid, m, 1.0, rng.symmetric(1.0), rng),
            SpectralField::random_band_limited(grid, m, 1.0, rng.symmetric(1.0), rng),
            SpectralField::random_band_limited(grid, m, 1.0, rng.symmetric(1.0), rng),
        )
        .unwrap()
    }

    #[test]
    fn zero_stress_zero_velocity() {
        let z = SpectralField::zeros(g(32));
        let tau = StressField2D::new(z.clone(), z.clone(), z).unwrap();
        let u = velocity_from_stress(&tau, 2.0).unwrap();
        assert!(u.linf_norm() < 1e-15);
        assert!(stokes_residual(&tau, &u, 2.0).unwrap() < 1e-15);
    }

    #[test]
    fn isotropic_stress_is_absorbed_by_pressure() {
        let phi = SpectralField::from_fn(g(64), |x| (x[0]).cos() * (2.0 * x[1]).sin() + 0.3);
        let z = SpectralField::zeros(g(64));
        let tau = StressField2D::new(phi.clone(), z, phi).unwrap();
        let u = velocity_from_stress(&tau, 1.5).unwrap();
        assert!(u.linf_norm() <= 1e-12);
    }

    #[test]
    fn shear_mode_closed_form() {
        // τ12 = cos(x2) drives u = (-k sin(x2), 0).
        let k = 1.7;
        let grid = g(64);
        let z = SpectralField::zeros(grid);
        let tau = StressField2D::new(
            z.clone(),
            SpectralField::from_fn(grid, |x| x[1].cos()),
            z.clone(),
        )
        .unwrap();
        let u = velocity_from_stress(&tau, k).unwrap();
        let expect = SpectralField::from_fn(grid, |x| -k * x[1].sin());
        assert!(u.u1().sub(&expect).linf_norm() < 1e-12);
        assert!(u.u2().linf_norm() < 1e-13);

        // Gradient entry ∂2 u1 = -k cos(x2), everything else 0.
        let grad = gradient_from_stress(&tau, k).unwrap();
        let expect_g = SpectralField::from_fn(grid, |x| -k * x[1].cos());
        assert!(grad[0][1].sub(&expect_g).linf_norm() < 1e-12);
        assert!(grad[0][0].linf_norm() < 1e-13);
        assert!(grad[1][0].linf_norm() < 1e-13);
        assert!(grad[1][1].linf_norm() < 1e-13);

        // Residual of the non-solution u = 0 is exactly k on this data.
        let zero_u = VelocityField2D::zeros(grid);
        let res = stokes_residual(&tau, &zero_u, k).unwrap();
        assert!((res - k).abs() < 1e-12);
    }

    #[test]
    fn inverse_has_small_residual_and_divergence() {
        let mut rng = CounterRng::new(101);
        for _ in 0..10 {
            let tau = random_stress(g(64), &mut rng);
            let k = 0.5 + rng.uniform();
            let u = velocity_from_stress(&tau, k).unwrap();
            let res = stokes_residual(&tau, &u, k).unwrap();
            assert!(res <= 1e-11 * k * tau.linf_norm());
            let div = u.divergence_inf().unwrap();
            let scale = u.grad_inf_norm().unwrap().max(1.0);
            assert!(div <= 1e-12 * scale);
        }
    }

    #[test]
    fn linearity_of_inversion() {
        let mut rng = CounterRng::new(55);
        let t1 = random_stress(g(32), &mut rng);
        let t2 = random_stress(g(32), &mut rng);
        let (al, be) = (0.7, -1.3);
        let k = 1.1;
        let combo = StressField2D::new(
            t1.s11().scale(al).add(&t2.s11().scale(be)),
            t1.s12().scale(al).add(&t2.s12().scale(be)),
            t1.s22().scale(al).add(&t2.s22().scale(be)),
        )
        .unwrap();
        let u_combo = velocity_from_stress(&combo, k).unwrap();
        let u1 = velocity_from_stress(&t1, k).unwrap();
        let u2 = velocity_from_stress(&t2, k).unwrap();
        let expect1 = u1.u1().scale(al).add(&u2.u1().scale(be));
        let expect2 = u1.u2().scale(al).add(&u2.u2().scale(be));
        let scale = u_combo.linf_norm().max(1.0);
        assert!(u_combo.u1().sub(&expect1).linf_norm() <= 1e-12 * scale);
        assert!(u_combo.u2().sub(&expect2).linf_norm() <= 1e-12 * scale);
    }

    #[test]
    fn lambda_mu_omega_examples() {
        let grid = g(64);
        let k = 1.3;
        let zero = SpectralField::zeros(grid);

        // a = b = 0 -> all zero.
        let (l, m, o) = lambda_mu_omega(&zero, &zero, k).unwrap();
        assert!(l.linf_norm() + m.linf_norm() + o.linf_norm() < 1e-15);

        // a = cos(x2), b = 0: B and AB vanish on (0, ±1).
        let a = SpectralField::from_fn(grid, |x| x[1].cos());
        let (l, m, o) = lambda_mu_omega(&a, &zero, k).unwrap();
        assert!(l.linf_norm() < 1e-13);
        assert!(m.linf_norm() < 1e-13);
        assert!(o.linf_norm() < 1e-13);

        // a = 0, b = cos(x2): ω = k cos(x2), λ = 0, μ = -(k/2) cos(x2).
        let b = SpectralField::from_fn(grid, |x| x[1].cos());
        let (l, m, o) = lambda_mu_omega(&zero, &b, k).unwrap();
        let expect_o = SpectralField::from_fn(grid, |x| k * x[1].cos());
        let expect_m = SpectralField::from_fn(grid, |x| -0.5 * k * x[1].cos());
        assert!(o.sub(&expect_o).linf_norm() < 1e-12);
        assert!(m.sub(&expect_m).linf_norm() < 1e-12);
        assert!(l.linf_norm() < 1e-13);
    }

    #[test]
    fn decomposition_reconstructs_gradient() {
        // ∇u = [[λ, μ-ω/2], [μ+ω/2, -λ]] must match gradient_from_stress
        // entrywise; the trace part of the stress is irrelevant.
        let mut rng = CounterRng::new(77);
        let tau = random_stress(g(64), &mut rng);
        let k = 0.9;
        let (l, m, o) = lambda_mu_omega(&tau.a(), &tau.b(), k).unwrap();
        let grad = gradient_from_stress(&tau, k).unwrap();
        let half_o = o.scale(0.5);
        let scale = 1.0 + grad.iter().flatten().map(|f| f.linf_norm()).fold(0.0, f64::max);
        assert!(grad[0][0].sub(&l).linf_norm() <= 1e-12 * scale);
        assert!(grad[0][1].sub(&m.sub(&half_o)).linf_norm() <= 1e-12 * scale);
        assert!(grad[1][0].sub(&m.add(&half_o)).linf_norm() <= 1e-12 * scale);
        assert!(grad[1][1].add(&l).linf_norm() <= 1e-12 * scale);
        // Trace-free to spectral precision.
        assert!(grad[0][0].add(&grad[1][1]).linf_norm() <= 1e-12 * scale);
    }
}
