//! One-dimensional Hilbert-coupled model: D_t σ = 2kσHσ - 2κ₀σ + 2κ₀ with
//! u_x = kHσ, characteristic tracking, the constant-coefficient Riccati
//! closed form for z = Hσ + iσ, and blow-up time extrapolation.
//!
//! On the torus the analytic signal along a characteristic obeys
//! D_t z = kz² - 2κ₀z + 2iκ₀ + k m² - Γ, where m is the mean of σ and
//! Γ = H(u σ_x) - u (Hσ)_x is the advective commutator; both corrections
//! vanish only for mean-free data without transport. `riccati_exact`
//! implements the bare constant-coefficient law; `riccati_exact_with_mean`
//! adds the k m² source and is exact for advection-free runs.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::{self, SpectralField};
use crate::grid::Grid;
use crate::Result;

/// Parameters of the 1D model: coupling k and half damping rate κ₀ = ε/R².
#[derive(Debug, Clone, Copy)]
pub struct OneDParams {
    pub k: f64,
    pub kappa0: f64,
}

impl OneDParams {
    pub fn new(k: f64, kappa0: f64) -> Result<Self> {
        if k <= 0.0 || kappa0 < 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "need k > 0 and κ₀ >= 0 (got k={k}, κ₀={kappa0})"
            )));
        }
        Ok(OneDParams { k, kappa0 })
    }
}

/// 1D state: the nonnegative stress trace on a periodic grid.
#[derive(Debug, Clone)]
pub struct OneDState {
    pub sigma: SpectralField,
    pub time: f64,
}

impl OneDState {
    pub fn new(sigma: SpectralField) -> Result<Self> {
        if sigma.grid().dim() != 1 {
            return Err(CoreError::DimensionMismatch { expected: 1, found: sigma.grid().dim() });
        }
        Ok(OneDState { sigma, time: 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct OneDConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Disable for the transport-free (fixed-characteristic) limit.
    pub advection: bool,
    /// ‖σ‖∞ beyond which the run flags blow-up.
    pub blow_up_threshold: f64,
    pub record_every: usize,
    /// Optional spatially varying relaxation source ρ₀(x); the default
    /// source is the constant 1.
    pub rho_source: Option<SpectralField>,
}

impl OneDConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        OneDConfig {
            dt,
            t_end,
            dealias: true,
            advection: true,
            blow_up_threshold: 1e8,
            record_every: 1,
            rho_source: None,
        }
    }
}

/// Tendency and reconstructed velocity of the 1D model.
pub struct OneDTendency {
    pub dsigma: Vec<Complex64>,
    pub u: SpectralField,
    pub blow_up: bool,
}

/// Velocity from u_x = kHσ: u = -k Λ^{-1}(σ - mean σ), zero-mean gauge.
pub fn velocity_1d(sigma: &SpectralField, k: f64) -> SpectralField {
    let grid = *sigma.grid();
    let coeffs: Vec<Complex64> = sigma
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let kw = grid.wavenumber(idx);
            if kw == 0 {
                Complex64::default()
            } else {
                -k * c / (kw.abs() as f64)
            }
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// Right-hand side: -u σ_x + 2kσHσ - 2κ₀σ + 2κ₀ρ₀, products dealiased.
pub fn rhs_1d(state: &OneDState, params: &OneDParams, config: &OneDConfig) -> OneDTendency {
    let grid = *state.sigma.grid();
    let len = grid.len();
    if !state.sigma.is_finite() {
        return OneDTendency {
            dsigma: vec![Complex64::default(); len],
            u: SpectralField::zeros(grid),
            blow_up: true,
        };
    }
    let u = velocity_1d(&state.sigma, params.k);
    let hsigma = state.sigma.hilbert().expect("1D state");
    let sv = state.sigma.values();
    let hv = hsigma.values();
    let mut t = vec![0.0; len];
    for i in 0..len {
        t[i] = 2.0 * params.k * sv[i] * hv[i] - 2.0 * params.kappa0 * sv[i];
    }
    match &config.rho_source {
        Some(rho) => {
            for i in 0..len {
                t[i] += 2.0 * params.kappa0 * rho.values()[i];
            }
        }
        None => {
            for ti in t.iter_mut() {
                *ti += 2.0 * params.kappa0;
            }
        }
    }
    if config.advection {
        let sx = field::inverse_to_values(&grid, &derivative_coeffs(&grid, state.sigma.coeffs()));
        for i in 0..len {
            t[i] -= u.values()[i] * sx[i];
        }
    }
    let mut dsigma = field::forward_from_values(&grid, &t);
    if config.dealias {
        for (idx, c) in dsigma.iter_mut().enumerate() {
            if !grid.dealias_keeps(&grid.wavevector(idx)) {
                *c = Complex64::default();
            }
        }
    }
    OneDTendency { dsigma, u, blow_up: false }
}

fn derivative_coeffs(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let nyq = -(grid.n() as i64) / 2;
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let kw = grid.wavenumber(idx);
            if kw == nyq {
                Complex64::default()
            } else {
                Complex64::new(0.0, kw as f64) * c
            }
        })
        .collect()
}

/// Cotlar identity residual, mean-adjusted: both sides of
/// H(σHσ) = ((Hσ)² - σ²)/2 are formed on a doubled grid (alias-free for
/// dealiased inputs), their means subtracted, and the sup difference
/// returned.
pub fn cotlar_residual(sigma: &SpectralField) -> Result<f64> {
    if sigma.grid().dim() != 1 {
        return Err(CoreError::DimensionMismatch { expected: 1, found: sigma.grid().dim() });
    }
    let fine = sigma.refined();
    let h = fine.hilbert()?;
    let lhs = fine.mul(&h).hilbert()?;
    let rhs = h.mul(&h).sub(&fine.mul(&fine)).scale(0.5);
    Ok(lhs.project_mean_zero().sub(&rhs.project_mean_zero()).linf_norm())
}

/// Value of the closed-form Riccati solution, or the blow-up flag with the
/// attached pole time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiValue {
    Value(Complex64),
    BlownUp { t_star: f64 },
}

impl RiccatiValue {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            RiccatiValue::Value(v) => Some(*v),
            RiccatiValue::BlownUp { .. } => None,
        }
    }
}

/// Generic constant-coefficient Riccati z' = q2 z² + q1 z + q0 with the
/// linear-fractional closed form through the roots of q2 r² + q1 r + q0.
fn solve_riccati(z0: Complex64, q2: f64, q1: Complex64, q0: Complex64, t: f64) -> RiccatiValue {
    let disc = (q1 * q1 - 4.0 * q2 * q0).sqrt();
    let r_plus = (-q1 + disc) / (2.0 * q2);
    let r_minus = (-q1 - disc) / (2.0 * q2);
    let tiny = 1e-13;
    if (r_plus - r_minus).norm() < tiny * (1.0 + r_plus.norm()) {
        // Double root: z = r + (z0 - r)/(1 - q2 t (z0 - r)).
        let w = z0 - r_plus;
        let denom = Complex64::new(1.0, 0.0) - q2 * t * w;
        if denom.norm() < tiny * (1.0 + (q2 * t * w).norm()) {
            let t_star = double_root_pole(w, q2).unwrap_or(t);
            return RiccatiValue::BlownUp { t_star };
        }
        if let Some(t_star) = double_root_pole(w, q2) {
            if t >= t_star {
                return RiccatiValue::BlownUp { t_star };
            }
        }
        return RiccatiValue::Value(r_plus + w / denom);
    }
    let beta = q2 * (r_minus - r_plus);
    let e = (beta * t).exp();
    let denom = (z0 - r_minus) - (z0 - r_plus) * e;
    if let Some(t_star) = general_pole(z0, r_plus, r_minus, beta) {
        if t >= t_star - 1e-13 * t_star.abs() {
            return RiccatiValue::BlownUp { t_star };
        }
    }
    if denom.norm() < 1e-300 {
        return RiccatiValue::BlownUp { t_star: t };
    }
    RiccatiValue::Value((r_plus * (z0 - r_minus) - r_minus * (z0 - r_plus) * e) / denom)
}

fn double_root_pole(w: Complex64, q2: f64) -> Option<f64> {
    // 1 - q2 t w = 0 needs real positive t with w effectively real.
    if w.norm() == 0.0 {
        return None;
    }
    let t = 1.0 / (q2 * w.re);
    if w.im.abs() <= 1e-12 * w.norm() && t > 0.0 {
        Some(t)
    } else {
        None
    }
}

fn general_pole(z0: Complex64, r_plus: Complex64, r_minus: Complex64, beta: Complex64) -> Option<f64> {
    // e^{βt} = (z0 - r_minus)/(z0 - r_plus) =: w at some real t > 0.
    let num = z0 - r_minus;
    let den = z0 - r_plus;
    if den.norm() == 0.0 || num.norm() == 0.0 {
        return None;
    }
    let w = num / den;
    let ln_mod = w.norm().ln();
    let theta = w.arg();
    let b2 = beta.norm_sqr();
    if b2 == 0.0 {
        return None;
    }
    let mut best: Option<f64> = None;
    for m in -64i64..=64 {
        let phase = theta + 2.0 * std::f64::consts::PI * m as f64;
        // t = (ln|w| + i phase) / β must be real positive.
        let t = (ln_mod * beta.re + phase * beta.im) / b2;
        let imag = (phase * beta.re - ln_mod * beta.im) / b2;
        if t > 1e-14 && imag.abs() <= 1e-9 * (1.0 + t.abs()) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}

/// Closed-form solution of D_t z = k z² - 2κ₀ z + 2iκ₀; for κ₀ = 0 this is
/// z(t) = z₀ / (1 - k t z₀).
pub fn riccati_exact(z0: Complex64, k: f64, kappa0: f64, t: f64) -> RiccatiValue {
    solve_riccati(
        z0,
        k,
        Complex64::new(-2.0 * kappa0, 0.0),
        Complex64::new(0.0, 2.0 * kappa0),
        t,
    )
}

/// Closed-form solution including the torus mean correction:
/// D_t z = k z² - 2κ₀ z + 2iκ₀ + k m². Exact for advection-free runs with
/// conserved mean m.
pub fn riccati_exact_with_mean(
    z0: Complex64,
    k: f64,
    kappa0: f64,
    mean: f64,
    t: f64,
) -> RiccatiValue {
    solve_riccati(
        z0,
        k,
        Complex64::new(-2.0 * kappa0, 0.0),
        Complex64::new(k * mean * mean, 2.0 * kappa0),
        t,
    )
}

/// Riccati pole time for the given initial value, if one exists.
pub fn riccati_blow_up_time(z0: Complex64, k: f64, kappa0: f64) -> Option<f64> {
    match riccati_exact(z0, k, kappa0, f64::INFINITY) {
        RiccatiValue::BlownUp { t_star } if t_star.is_finite() => Some(t_star),
        _ => None,
    }
}

/// Per-characteristic track: position, grid signal z = (Hσ + iσ)(x(t)) and
/// the Riccati reference from the initial value.
#[derive(Debug, Clone)]
pub struct CharTrack {
    pub z0: Complex64,
    /// (t, x, z_grid, z_riccati); the reference is NaN past its pole.
    pub samples: Vec<(f64, f64, Complex64, Complex64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneDStatus {
    Completed,
    BlowUp { time: f64 },
}

pub struct OneDRun {
    /// (t, ‖σ‖∞, min σ, mean σ, ∫σHσ) per record.
    pub records: Vec<(f64, f64, f64, f64, f64)>,
    pub trackers: Vec<CharTrack>,
    pub final_state: OneDState,
    pub status: OneDStatus,
}

impl OneDRun {
    /// (t, ‖σ‖∞) series for blow-up extrapolation.
    pub fn sup_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|&(t, sup, ..)| (t, sup)).collect()
    }
}

fn sample_z(sigma: &SpectralField, x: f64) -> Complex64 {
    let h = sigma.hilbert().expect("1D field");
    Complex64::new(h.eval_fourier([x, 0.0]), sigma.eval_fourier([x, 0.0]))
}

/// Integrate the 1D model, tracking characteristics seeded at `positions`.
/// Characteristics advance with the same RK4 stages as the field (fixed
/// points when advection is disabled).
pub fn run_1d(
    state0: OneDState,
    params: &OneDParams,
    config: &OneDConfig,
    positions: &[f64],
) -> Result<OneDRun> {
    let grid = *state0.sigma.grid();
    let len = grid.len();
    let mut state = state0;
    let mut xs: Vec<f64> = positions.to_vec();
    let mut trackers: Vec<CharTrack> = positions
        .iter()
        .map(|&x| CharTrack { z0: sample_z(&state.sigma, x), samples: Vec::new() })
        .collect();
    let mut records = Vec::new();
    let mut status = OneDStatus::Completed;

    let push_record = |state: &OneDState,
                       xs: &[f64],
                       trackers: &mut Vec<CharTrack>,
                       records: &mut Vec<(f64, f64, f64, f64, f64)>| {
        let hs = state.sigma.hilbert().expect("1D field");
        records.push((
            state.time,
            state.sigma.linf_norm(),
            state.sigma.min_value(),
            state.sigma.mean(),
            state.sigma.inner(&hs),
        ));
        for (ti, &x) in trackers.iter_mut().zip(xs) {
            let zg = sample_z(&state.sigma, x);
            let zr = match riccati_exact(ti.z0, params.k, params.kappa0, state.time) {
                RiccatiValue::Value(v) => v,
                RiccatiValue::BlownUp { .. } => Complex64::new(f64::NAN, f64::NAN),
            };
            ti.samples.push((state.time, x, zg, zr));
        }
    };

    push_record(&state, &xs, &mut trackers, &mut records);

    while state.time < config.t_end - 1e-12 {
        // RK4 over (σ, x₁..x_m) with stage-consistent velocities.
        let k1 = rhs_1d(&state, params, config);
        if k1.blow_up {
            status = OneDStatus::BlowUp { time: state.time };
            break;
        }
        let dt = config.dt;
        let axpy = |coeffs: &[Complex64], parts: &[(&OneDTendency, f64)]| {
            let mut out = coeffs.to_vec();
            for (tend, w) in parts {
                for i in 0..len {
                    out[i] += dt * w * tend.dsigma[i];
                }
            }
            SpectralField::from_coeffs(grid, out)
        };
        let mk_state = |sigma: SpectralField, time: f64| OneDState { sigma, time };

        let y2 = mk_state(axpy(state.sigma.coeffs(), &[(&k1, 0.5)]), state.time);
        let k2 = rhs_1d(&y2, params, config);
        let y3 = mk_state(axpy(state.sigma.coeffs(), &[(&k2, 0.5)]), state.time);
        let k3 = rhs_1d(&y3, params, config);
        let y4 = mk_state(axpy(state.sigma.coeffs(), &[(&k3, 1.0)]), state.time);
        let k4 = rhs_1d(&y4, params, config);
        if k2.blow_up || k3.blow_up || k4.blow_up {
            status = OneDStatus::BlowUp { time: state.time };
            break;
        }

        let next_sigma = axpy(
            state.sigma.coeffs(),
            &[(&k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)],
        );

        if config.advection {
            let stages = [&k1.u, &k2.u, &k3.u, &k4.u];
            for x in xs.iter_mut() {
                let v1 = stages[0].eval_fourier([*x, 0.0]);
                let v2 = stages[1].eval_fourier([*x + 0.5 * dt * v1, 0.0]);
                let v3 = stages[2].eval_fourier([*x + 0.5 * dt * v2, 0.0]);
                let v4 = stages[3].eval_fourier([*x + dt * v3, 0.0]);
                *x += dt / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
            }
        }

        state = mk_state(next_sigma, state.time + dt);
        if !state.sigma.is_finite() || state.sigma.linf_norm() > config.blow_up_threshold {
            status = OneDStatus::BlowUp { time: state.time };
            push_record(&state, &xs, &mut trackers, &mut records);
            break;
        }
        let n_steps = ((state.time / dt).round()) as usize;
        if n_steps % config.record_every == 0 || state.time >= config.t_end - 1e-12 {
            push_record(&state, &xs, &mut trackers, &mut records);
        }
    }
    Ok(OneDRun { records, trackers, final_state: state, status })
}

/// Linear extrapolation of 1/‖σ‖∞ to zero over a trailing window (25% of
/// the samples, at least 20 points). Returns (T_est, confidence) where the
/// confidence is the normalized rms residual of the fit; refused when the
/// tail is not monotonically growing.
pub fn blowup_time_estimate(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 20 {
        return Err(CoreError::InsufficientSamples { needed: 20, got: series.len() });
    }
    let window = (series.len() / 4).max(20);
    let tail = &series[series.len() - window..];
    for pair in tail.windows(2) {
        if pair[1].1 <= pair[0].1 * (1.0 - 1e-12) {
            return Err(CoreError::EstimateRefused(
                "trailing window is not monotonically growing".into(),
            ));
        }
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(t, v)| (t, 1.0 / v)).collect();
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    if slope >= 0.0 {
        return Err(CoreError::EstimateRefused("1/norm is not decreasing".into()));
    }
    let t_est = -intercept / slope;
    let mut ss = 0.0;
    for &(t, y) in &pts {
        ss += (y - (intercept + slope * t)).powi(2);
    }
    let confidence = (ss / n).sqrt() / (sy / n).abs().max(f64::MIN_POSITIVE);
    Ok((t_est, confidence))
}

/// Blow-up scenario data: a narrow nonnegative bump below the watch point
/// x*, plus a far counter-bump tuned so the initial velocity vanishes at
/// x*. σ₀(x*) is exponentially small and Hσ₀(x*) > 0.
pub struct BlowupScenario {
    pub sigma0: SpectralField,
    pub x_star: f64,
    pub h0: f64,
    /// 1/(k h0): the bare Riccati pole time for unit k.
    pub t_star_unit_k: f64,
}

fn periodic_gaussian(x: f64, center: f64, width: f64) -> f64 {
    let mut acc = 0.0;
    for m in -3i64..=3 {
        let d = x - center + m as f64 * crate::grid::PERIOD;
        acc += (-d * d / (2.0 * width * width)).exp();
    }
    acc
}

pub fn blowup_scenario_data(
    grid: Grid,
    amp: f64,
    width: f64,
    dist: f64,
) -> Result<BlowupScenario> {
    if grid.dim() != 1 {
        return Err(CoreError::DimensionMismatch { expected: 1, found: grid.dim() });
    }
    let x_star = std::f64::consts::PI;
    let c1 = x_star - dist;
    let c2 = c1 + std::f64::consts::PI;
    let g1 = SpectralField::from_fn(grid, |x| amp * periodic_gaussian(x[0], c1, width));
    let g2 = SpectralField::from_fn(grid, |x| amp * periodic_gaussian(x[0], c2, width));
    // u_i = -Λ^{-1}(g_i - mean); β kills the total velocity at x*.
    let phi1 = lambda_inv_at(&g1, x_star);
    let phi2 = lambda_inv_at(&g2, x_star);
    if phi2.abs() < 1e-12 {
        return Err(CoreError::InvalidParameter("counter-bump placement degenerate".into()));
    }
    let beta = -phi1 / phi2;
    if beta < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "counter-bump weight {beta:.3e} negative; widen the separation"
        )));
    }
    let sigma0 = g1.add(&g2.scale(beta)).dealiased();
    let h0 = sigma0.hilbert()?.eval_fourier([x_star, 0.0]);
    if h0 <= 0.0 {
        return Err(CoreError::InvalidParameter("Hσ₀(x*) must be positive".into()));
    }
    Ok(BlowupScenario { sigma0, x_star, h0, t_star_unit_k: 1.0 / h0 })
}

fn lambda_inv_at(f: &SpectralField, x: f64) -> f64 {
    let grid = *f.grid();
    let coeffs: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let kw = grid.wavenumber(idx);
            if kw == 0 {
                Complex64::default()
            } else {
                c / kw.abs() as f64
            }
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).eval_fourier([x, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g1(n: usize) -> Grid {
        Grid::new_1d(n).unwrap()
    }

    #[test]
    fn constant_state_relaxes_without_velocity() {
        let params = OneDParams::new(1.0, 0.8).unwrap();
        let config = OneDConfig::new(1e-3, 0.0);
        let state = OneDState::new(SpectralField::constant(g1(64), 3.0)).unwrap();
        let tend = rhs_1d(&state, &params, &config);
        assert!(tend.u.linf_norm() < 1e-14);
        // dσ/dt = -2κ₀(σ̄ - 1) uniform.
        let want = -2.0 * 0.8 * (3.0 - 1.0);
        let got = SpectralField::from_coeffs(g1(64), tend.dsigma.clone());
        assert!((got.mean() - want).abs() < 1e-13);
        assert!(got.sub(&SpectralField::constant(g1(64), want)).linf_norm() < 1e-13);
    }

    #[test]
    fn velocity_of_single_mode() {
        // σ = 1 + 0.1 cos x -> u = -0.1 k cos x, and u_x = kHσ spectrally.
        let k = 1.4;
        let sigma = SpectralField::from_fn(g1(128), |x| 1.0 + 0.1 * x[0].cos());
        let u = velocity_1d(&sigma, k);
        let want = SpectralField::from_fn(g1(128), |x| -0.1 * k * x[0].cos());
        assert!(u.sub(&want).linf_norm() < 1e-13);
        let ux = u.derivative(0).unwrap();
        let khs = sigma.hilbert().unwrap().scale(k);
        assert!(ux.sub(&khs).linf_norm() < 1e-13);
    }

    #[test]
    fn uniform_equilibrium_is_fixed() {
        let params = OneDParams::new(2.0, 0.5).unwrap();
        let config = OneDConfig::new(1e-3, 0.0);
        let state = OneDState::new(SpectralField::constant(g1(64), 1.0)).unwrap();
        let tend = rhs_1d(&state, &params, &config);
        let got = SpectralField::from_coeffs(g1(64), tend.dsigma);
        assert!(got.linf_norm() < 1e-15);
    }

    #[test]
    fn cotlar_identity_single_mode() {
        // σ = cos x: both sides equal -(1/2) cos 2x exactly.
        let sigma = SpectralField::from_fn(g1(128), |x| x[0].cos());
        assert!(cotlar_residual(&sigma).unwrap() < 1e-13);

        let c = SpectralField::constant(g1(128), 2.5);
        assert!(cotlar_residual(&c).unwrap() < 1e-14);
    }

    #[test]
    fn cotlar_identity_random_band_limited() {
        let mut rng = crate::rng::CounterRng::new(100);
        for _ in 0..20 {
            let sigma =
                SpectralField::random_band_limited(g1(256), 80, 1.0, rng.symmetric(2.0), &mut rng);
            let res = cotlar_residual(&sigma).unwrap();
            let scale = sigma.linf_norm().powi(2);
            assert!(res <= 1e-11 * scale, "residual {res:.3e} at scale {scale:.3e}");
        }
    }

    #[test]
    fn riccati_pure_quadratic() {
        // κ₀ = 0, z₀ = 1, k = 1: z = 1/(1-t), pole at 1.
        let z0 = Complex64::new(1.0, 0.0);
        match riccati_exact(z0, 1.0, 0.0, 0.5) {
            RiccatiValue::Value(v) => assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-12),
            _ => panic!("should not have blown up yet"),
        }
        assert_eq!(riccati_blow_up_time(z0, 1.0, 0.0), Some(1.0));
        match riccati_exact(z0, 1.0, 0.0, 1.5) {
            RiccatiValue::BlownUp { t_star } => assert!((t_star - 1.0).abs() < 1e-12),
            _ => panic!("must be past the pole"),
        }
    }

    #[test]
    fn riccati_fixed_point_is_constant() {
        let (k, kappa0) = (1.3, 0.4);
        // Roots of k r² - 2κ₀ r + 2iκ₀ = 0.
        let disc = (Complex64::new(4.0 * kappa0 * kappa0, 0.0)
            - Complex64::new(0.0, 8.0 * k * kappa0))
        .sqrt();
        let r_plus = (Complex64::new(2.0 * kappa0, 0.0) + disc) / (2.0 * k);
        for &t in &[0.3, 1.0, 2.5] {
            match riccati_exact(r_plus, k, kappa0, t) {
                RiccatiValue::Value(v) => {
                    assert!((v - r_plus).norm() < 1e-10, "drift {:e}", (v - r_plus).norm())
                }
                _ => panic!("fixed point cannot blow up"),
            }
        }
    }

    #[test]
    fn riccati_matches_independent_integration() {
        // Reference: classical RK4 on the ODE with tiny steps.
        let z0 = Complex64::new(0.3, 0.7);
        let (k, kappa0) = (1.0, 0.2);
        let f = |z: Complex64| k * z * z - 2.0 * kappa0 * z + Complex64::new(0.0, 2.0 * kappa0);
        let mut z = z0;
        let dt = 1e-5;
        let steps = (1.0 / dt) as usize;
        for _ in 0..steps {
            let q1 = f(z);
            let q2 = f(z + 0.5 * dt * q1);
            let q3 = f(z + 0.5 * dt * q2);
            let q4 = f(z + dt * q3);
            z += dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
        }
        match riccati_exact(z0, k, kappa0, 1.0) {
            RiccatiValue::Value(v) => assert!((v - z).norm() < 1e-10, "gap {:e}", (v - z).norm()),
            _ => panic!("no pole expected on [0,1]"),
        }
    }

    #[test]
    fn mean_corrected_riccati_matches_advection_free_run() {
        // With advection off the analytic signal of the mean-corrected
        // Riccati is exact along fixed characteristics.
        let grid = g1(256);
        let sigma0 = SpectralField::from_fn(grid, |x| 1.0 + 0.6 * x[0].cos() + 0.2 * (2.0 * x[0]).sin());
        let params = OneDParams::new(1.0, 0.0).unwrap();
        let mut config = OneDConfig::new(2e-4, 0.25);
        config.advection = false;
        let x0 = 1.234;
        let run = run_1d(OneDState::new(sigma0.clone()).unwrap(), &params, &config, &[x0]).unwrap();
        assert_eq!(run.status, OneDStatus::Completed);
        let mean = sigma0.mean();
        let z0 = run.trackers[0].z0;
        let mut worst = 0.0f64;
        for &(t, _, zg, _) in &run.trackers[0].samples {
            if let RiccatiValue::Value(zr) = riccati_exact_with_mean(z0, params.k, params.kappa0, mean, t)
            {
                worst = worst.max((zg - zr).norm());
            }
        }
        assert!(worst < 1e-8, "mean-corrected oracle deviation {worst:.3e}");
    }

    #[test]
    fn sigma_hsigma_pairing_is_zero_both_ways() {
        // ∫σHσ = 0: physical quadrature against the coefficient pairing.
        let mut rng = crate::rng::CounterRng::new(5);
        let sigma = SpectralField::random_band_limited(g1(256), 60, 1.0, 1.5, &mut rng);
        let h = sigma.hilbert().unwrap();
        let quad = sigma.inner(&h);
        let coeff: f64 = {
            use num_complex::Complex64;
            let mut acc = Complex64::default();
            for (idx, &c) in sigma.coeffs().iter().enumerate() {
                let kw = sigma.grid().wavenumber(idx);
                let hq = if kw == 0 || kw == -(sigma.grid().n() as i64) / 2 {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, -(kw.signum() as f64)) * c
                };
                acc += c.conj() * hq;
            }
            (acc * crate::grid::PERIOD).re
        };
        assert!(quad.abs() < 1e-12 * sigma.l2_norm().powi(2).max(1.0));
        assert!(coeff.abs() < 1e-12 * sigma.l2_norm().powi(2).max(1.0));
        assert!((quad - coeff).abs() < 1e-12);
    }

    #[test]
    fn blowup_estimate_on_synthetic_hyperbola() {
        let t_blow = 2.0;
        let series: Vec<(f64, f64)> =
            (0..200).map(|i| {
                let t = i as f64 * 0.009;
                (t, 1.0 / (t_blow - t))
            }).collect();
        let (t_est, conf) = blowup_time_estimate(&series).unwrap();
        assert!((t_est - t_blow).abs() < 1e-6, "estimate {t_est}");
        assert!(conf < 1e-9);

        // Decaying series must be refused.
        let decay: Vec<(f64, f64)> =
            (0..100).map(|i| (i as f64 * 0.01, (-(i as f64) * 0.01).exp())).collect();
        assert!(matches!(
            blowup_time_estimate(&decay),
            Err(CoreError::EstimateRefused(_))
        ));
        assert!(blowup_time_estimate(&series[..10]).is_err());
    }

    #[test]
    fn scenario_data_has_stagnation_point() {
        let sc = blowup_scenario_data(g1(512), 1.0, 0.35, 1.1).unwrap();
        assert!(sc.sigma0.min_value() > -1e-10, "σ₀ must stay nonnegative");
        assert!(sc.sigma0.eval_fourier([sc.x_star, 0.0]).abs() < 1e-2);
        assert!(sc.h0 > 0.0);
        let u0 = velocity_1d(&sc.sigma0, 1.0);
        assert!(u0.eval_fourier([sc.x_star, 0.0]).abs() < 1e-10);
        let _ = PI;
    }
}
