//! Time integration of the closed 2D system for (a, b, c, ρ) coupled to
//! steady Stokes, in the relaxational regime and in the relaxationless
//! regime where the trace is slaved to the transported determinant.
//!
//! The semi-discrete system: ω = 2k(Ab - Ba), λ = Bω, μ = -Aω, u from the
//! stream function, every pointwise product dealiased by the 2/3 rule.
//! Time stepping is fixed-step classical RK4 behind a CFL guard. Blow-up
//! is a flagged termination, never a panic: runs end carrying their last
//! finite diagnostics.

use num_complex::Complex64;

use crate::diagnostics::{DiagnosticsRecord, DiagnosticsSeries};
use crate::error::CoreError;
use crate::field::{self, SpectralField};
use crate::grid::{Grid, PERIOD};
use crate::lagrangian::{Mat2, ParticleSet};
use crate::stokes::StressField2D;
use crate::Result;

/// Physical model parameters. The paper-normalized system (time in units
/// of 1/(2k)) is recovered by setting k = 1/2.
///
/// Note the rescaled large-data system uses "ε" for the Deborah-like
/// number k/κ₀, while ε here is always the particle diffusivity; only
/// (k, ε, R) are exposed and everything else is derived.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub k: f64,
    pub epsilon: f64,
    pub r: f64,
}

impl ModelParams {
    pub fn new(k: f64, epsilon: f64, r: f64) -> Result<Self> {
        if k <= 0.0 || epsilon < 0.0 || r <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "need k > 0, ε >= 0, R > 0 (got k={k}, ε={epsilon}, R={r})"
            )));
        }
        Ok(ModelParams { k, epsilon, r })
    }

    /// Half the damping rate, κ₀ = ε/R².
    pub fn kappa0(&self) -> f64 {
        self.epsilon / (self.r * self.r)
    }

    /// Deborah number k R²/ε (infinite at ε = 0).
    pub fn deborah(&self) -> f64 {
        if self.epsilon == 0.0 {
            f64::INFINITY
        } else {
            self.k * self.r * self.r / self.epsilon
        }
    }
}

/// Fixed-step integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// 2/3-rule dealiasing of every pointwise product.
    pub dealias: bool,
    /// Max allowed ‖u‖∞ dt / h.
    pub cfl_guard: f64,
    /// Disable to run the reaction-only limit.
    pub advection: bool,
    /// Record diagnostics every this many steps.
    pub record_every: usize,
    /// Hölder exponent for the recorded seminorm; None skips it.
    pub holder_alpha: Option<f64>,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if dt <= 0.0 || t_end < 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "need dt > 0 and t_end >= 0 (got dt={dt}, t_end={t_end})"
            )));
        }
        Ok(SolverConfig {
            dt,
            t_end,
            dealias: true,
            cfl_guard: 0.5,
            advection: true,
            record_every: 1,
            holder_alpha: Some(0.5),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 {
            return Err(CoreError::InvalidParameter("dt must be positive".into()));
        }
        if !(0.0 < self.cfl_guard && self.cfl_guard < 1.0) {
            return Err(CoreError::InvalidParameter("cfl_guard must lie in (0,1)".into()));
        }
        if self.record_every == 0 {
            return Err(CoreError::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// The four macroscopic fields plus the exponentially damped dissipation
/// accumulator I(t) = ∫₀ᵗ e^{-2κ₀(t-s)} ∫|∇u|² dx ds, integrated with the
/// same RK4 stages so the trace balance closes at integrator order.
#[derive(Debug, Clone)]
pub struct OldroydState {
    pub a: SpectralField,
    pub b: SpectralField,
    pub c: SpectralField,
    pub rho: SpectralField,
    pub time: f64,
    pub dissipation_memory: f64,
}

impl OldroydState {
    pub fn new(
        a: SpectralField,
        b: SpectralField,
        c: SpectralField,
        rho: SpectralField,
    ) -> Result<Self> {
        a.grid().same_as(b.grid())?;
        a.grid().same_as(c.grid())?;
        a.grid().same_as(rho.grid())?;
        if a.grid().dim() != 2 {
            return Err(CoreError::DimensionMismatch { expected: 2, found: a.grid().dim() });
        }
        Ok(OldroydState { a, b, c, rho, time: 0.0, dissipation_memory: 0.0 })
    }

    /// Equilibrium σ = ρ I for a given density field: a = b = 0, c = 2ρ.
    pub fn equilibrium(rho: SpectralField) -> Result<Self> {
        let grid = *rho.grid();
        let c = rho.scale(2.0);
        OldroydState::new(SpectralField::zeros(grid), SpectralField::zeros(grid), c, rho)
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn stress(&self) -> Result<StressField2D> {
        StressField2D::from_abc(&self.a, &self.b, &self.c)
    }

    /// Reduced stress τ = σ - ρI as (τ11, τ12, τ22) sample arrays.
    pub fn tau_components(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let len = self.grid().len();
        let mut t11 = Vec::with_capacity(len);
        let mut t22 = Vec::with_capacity(len);
        for i in 0..len {
            let half_c = 0.5 * self.c.values()[i];
            t11.push(half_c + self.a.values()[i] - self.rho.values()[i]);
            t22.push(half_c - self.a.values()[i] - self.rho.values()[i]);
        }
        (t11, self.b.values().to_vec(), t22)
    }

    /// Pointwise Frobenius norm samples of τ.
    pub fn tau_frobenius(&self) -> Vec<f64> {
        let (t11, t12, t22) = self.tau_components();
        t11.iter()
            .zip(&t12)
            .zip(&t22)
            .map(|((&x, &y), &z)| (x * x + 2.0 * y * y + z * z).sqrt())
            .collect()
    }

    /// Determinant field c²/4 - a² - b².
    pub fn determinant_field(&self) -> SpectralField {
        let v: Vec<f64> = (0..self.grid().len())
            .map(|i| {
                let (a, b, c) =
                    (self.a.values()[i], self.b.values()[i], self.c.values()[i]);
                c * c / 4.0 - a * a - b * b
            })
            .collect();
        SpectralField::from_values(*self.grid(), v)
    }

    /// Eigenvalue fields z₁ >= z₂ of σ: c/2 ± sqrt(a² + b²).
    pub fn eigenvalue_fields(&self) -> (SpectralField, SpectralField) {
        let len = self.grid().len();
        let mut hi = Vec::with_capacity(len);
        let mut lo = Vec::with_capacity(len);
        for i in 0..len {
            let (a, b, c) = (self.a.values()[i], self.b.values()[i], self.c.values()[i]);
            let r = (a * a + b * b).sqrt();
            hi.push(0.5 * c + r);
            lo.push(0.5 * c - r);
        }
        (
            SpectralField::from_values(*self.grid(), hi),
            SpectralField::from_values(*self.grid(), lo),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.rho.is_finite()
    }
}

/// Velocity and its gradient sampled on the grid at one RK stage, for
/// stage-consistent particle transport.
pub struct StageVelocity {
    grid: Grid,
    u1: Vec<f64>,
    u2: Vec<f64>,
    g11: Vec<f64>,
    g12: Vec<f64>,
    g21: Vec<f64>,
    g22: Vec<f64>,
}

impl StageVelocity {
    pub fn eval(&self, x: [f64; 2]) -> ([f64; 2], Mat2) {
        let u = [
            field::eval_cubic_grid(&self.grid, &self.u1, x),
            field::eval_cubic_grid(&self.grid, &self.u2, x),
        ];
        let g = [
            [
                field::eval_cubic_grid(&self.grid, &self.g11, x),
                field::eval_cubic_grid(&self.grid, &self.g12, x),
            ],
            [
                field::eval_cubic_grid(&self.grid, &self.g21, x),
                field::eval_cubic_grid(&self.grid, &self.g22, x),
            ],
        ];
        (u, g)
    }
}

/// Tendencies of (a, b, c, ρ) in coefficient space plus stage diagnostics.
pub struct OldroydTendency {
    pub da: Vec<Complex64>,
    pub db: Vec<Complex64>,
    pub dc: Vec<Complex64>,
    pub drho: Vec<Complex64>,
    /// ∫|∇u|² dx at this stage (drives the dissipation accumulator).
    pub dissipation_rate: f64,
    pub u_inf: f64,
    pub grad_u_inf: f64,
    pub blow_up: bool,
    pub stage_velocity: Option<StageVelocity>,
}

impl OldroydTendency {
    fn blown(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        OldroydTendency {
            da: z.clone(),
            db: z.clone(),
            dc: z.clone(),
            drho: z,
            dissipation_rate: 0.0,
            u_inf: 0.0,
            grad_u_inf: 0.0,
            blow_up: true,
            stage_velocity: None,
        }
    }
}

/// Velocity-related spectral data of one state: coefficient arrays of
/// (ω, λ, μ, u1, u2) and the dissipation integral ∫|∇u|² = ∫ω².
struct Velocity {
    omega: Vec<Complex64>,
    lambda: Vec<Complex64>,
    mu: Vec<Complex64>,
    u1: Vec<Complex64>,
    u2: Vec<Complex64>,
    dissipation: f64,
}

fn velocity_spectra(grid: &Grid, a: &[Complex64], b: &[Complex64], k: f64) -> Velocity {
    let len = grid.len();
    let mut omega = vec![Complex64::default(); len];
    let mut lambda = vec![Complex64::default(); len];
    let mut mu = vec![Complex64::default(); len];
    let mut u1 = vec![Complex64::default(); len];
    let mut u2 = vec![Complex64::default(); len];
    let mut diss = 0.0;
    for idx in 0..len {
        let kv = grid.wavevector(idx);
        let (k1, k2) = (kv[0] as f64, kv[1] as f64);
        let k2norm = k1 * k1 + k2 * k2;
        if k2norm == 0.0 {
            continue;
        }
        let asym = (k2 * k2 - k1 * k1) / (2.0 * k2norm);
        let bsym = -(k1 * k2) / k2norm;
        let w = (asym * b[idx] - bsym * a[idx]) * (2.0 * k);
        omega[idx] = w;
        lambda[idx] = bsym * w;
        mu[idx] = -asym * w;
        // Stream function ψ = -(−Δ)^{-1}ω, u = (-∂2ψ, ∂1ψ).
        let i = Complex64::new(0.0, 1.0);
        u1[idx] = i * k2 * w / k2norm;
        u2[idx] = -i * k1 * w / k2norm;
        diss += w.norm_sqr();
    }
    Velocity { omega, lambda, mu, u1, u2, dissipation: diss * PERIOD * PERIOD }
}

fn dealias_in_place(grid: &Grid, coeffs: &mut [Complex64]) {
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if !grid.dealias_keeps(&grid.wavevector(idx)) {
            *c = Complex64::default();
        }
    }
}

fn spectral_gradient(grid: &Grid, f: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let len = grid.len();
    let nyq = -(grid.n() as i64) / 2;
    let mut dx = vec![Complex64::default(); len];
    let mut dy = vec![Complex64::default(); len];
    for idx in 0..len {
        let kv = grid.wavevector(idx);
        let i = Complex64::new(0.0, 1.0);
        if kv[0] != nyq {
            dx[idx] = i * kv[0] as f64 * f[idx];
        }
        if kv[1] != nyq {
            dy[idx] = i * kv[1] as f64 * f[idx];
        }
    }
    (field::inverse_to_values(grid, &dx), field::inverse_to_values(grid, &dy))
}

/// Right-hand side of the (a, b, c, ρ) system.
pub fn rhs(state: &OldroydState, params: &ModelParams, config: &SolverConfig) -> OldroydTendency {
    rhs_full(state, params, config, false)
}

fn rhs_full(
    state: &OldroydState,
    params: &ModelParams,
    config: &SolverConfig,
    want_velocity: bool,
) -> OldroydTendency {
    let grid = *state.grid();
    if !state.is_finite() {
        return OldroydTendency::blown(grid);
    }
    let len = grid.len();
    let kappa0 = params.kappa0();
    let vel = velocity_spectra(&grid, state.a.coeffs(), state.b.coeffs(), params.k);

    let omega = field::inverse_to_values(&grid, &vel.omega);
    let lambda = field::inverse_to_values(&grid, &vel.lambda);
    let mu = field::inverse_to_values(&grid, &vel.mu);
    let u1 = field::inverse_to_values(&grid, &vel.u1);
    let u2 = field::inverse_to_values(&grid, &vel.u2);

    let (av, bv, cv, rv) =
        (state.a.values(), state.b.values(), state.c.values(), state.rho.values());

    let mut ta = vec![0.0; len];
    let mut tb = vec![0.0; len];
    let mut tc = vec![0.0; len];
    let mut tr = vec![0.0; len];
    for i in 0..len {
        ta[i] = -omega[i] * bv[i] + lambda[i] * cv[i] - 2.0 * kappa0 * av[i];
        tb[i] = omega[i] * av[i] + mu[i] * cv[i] - 2.0 * kappa0 * bv[i];
        tc[i] = 4.0 * (lambda[i] * av[i] + mu[i] * bv[i]) - 2.0 * kappa0 * cv[i]
            + 4.0 * kappa0 * rv[i];
    }
    if config.advection {
        for (f, t) in [
            (state.a.coeffs(), &mut ta),
            (state.b.coeffs(), &mut tb),
            (state.c.coeffs(), &mut tc),
            (state.rho.coeffs(), &mut tr),
        ] {
            let (dx, dy) = spectral_gradient(&grid, f);
            for i in 0..len {
                t[i] -= u1[i] * dx[i] + u2[i] * dy[i];
            }
        }
    }

    let mut da = field::forward_from_values(&grid, &ta);
    let mut db = field::forward_from_values(&grid, &tb);
    let mut dc = field::forward_from_values(&grid, &tc);
    let mut drho = field::forward_from_values(&grid, &tr);
    if config.dealias {
        for coeffs in [&mut da, &mut db, &mut dc, &mut drho] {
            dealias_in_place(&grid, coeffs);
        }
    }

    let u_inf = u1
        .iter()
        .chain(&u2)
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    let grad_u_inf = (0..len)
        .map(|i| {
            (2.0 * lambda[i] * lambda[i] + 2.0 * mu[i] * mu[i] + 0.5 * omega[i] * omega[i]).sqrt()
        })
        .fold(0.0, f64::max);

    let stage_velocity = want_velocity.then(|| {
        let mut g12 = vec![0.0; len];
        let mut g21 = vec![0.0; len];
        let mut g22 = vec![0.0; len];
        for i in 0..len {
            g12[i] = mu[i] - 0.5 * omega[i];
            g21[i] = mu[i] + 0.5 * omega[i];
            g22[i] = -lambda[i];
        }
        StageVelocity { grid, u1, u2, g11: lambda, g12, g21, g22 }
    });

    OldroydTendency {
        da,
        db,
        dc,
        drho,
        dissipation_rate: vel.dissipation,
        u_inf,
        grad_u_inf,
        blow_up: false,
        stage_velocity,
    }
}

fn state_axpy(state: &OldroydState, tends: &[(&OldroydTendency, f64)], dt: f64) -> OldroydState {
    let grid = *state.grid();
    let len = grid.len();
    let combine = |base: &[Complex64], pick: &dyn Fn(&OldroydTendency) -> &[Complex64]| {
        let mut out = base.to_vec();
        for (tend, w) in tends {
            let src = pick(tend);
            for i in 0..len {
                out[i] += dt * w * src[i];
            }
        }
        out
    };
    let a = SpectralField::from_coeffs(grid, combine(state.a.coeffs(), &|t| &t.da));
    let b = SpectralField::from_coeffs(grid, combine(state.b.coeffs(), &|t| &t.db));
    let c = SpectralField::from_coeffs(grid, combine(state.c.coeffs(), &|t| &t.dc));
    let rho = SpectralField::from_coeffs(grid, combine(state.rho.coeffs(), &|t| &t.drho));
    OldroydState {
        a,
        b,
        c,
        rho,
        time: state.time,
        dissipation_memory: state.dissipation_memory,
    }
}

/// Outcome of one step: either an advanced state or a blow-up flag.
pub enum StepOutcome {
    State(OldroydState),
    BlowUp { time: f64 },
}

/// One RK4 step; optionally advances a particle set with stage-consistent
/// velocities. CFL violations are errors, blow-up is a flagged outcome.
pub fn step_with_particles(
    state: &OldroydState,
    params: &ModelParams,
    config: &SolverConfig,
    particles: Option<&ParticleSet>,
) -> Result<(StepOutcome, Option<ParticleSet>)> {
    let want_vel = particles.is_some();
    let dt = config.dt;
    let kappa0 = params.kappa0();
    let t = state.time;

    let k1 = rhs_full(state, params, config, want_vel);
    if k1.blow_up {
        return Ok((StepOutcome::BlowUp { time: t }, None));
    }
    if config.advection {
        let courant = k1.u_inf * dt / state.grid().spacing();
        if courant > config.cfl_guard {
            return Err(CoreError::CflViolation { time: t, courant, guard: config.cfl_guard });
        }
    }

    let y2 = state_axpy(state, &[(&k1, 0.5)], dt);
    let k2 = rhs_full(&y2, params, config, want_vel);
    let y3 = state_axpy(state, &[(&k2, 0.5)], dt);
    let k3 = rhs_full(&y3, params, config, want_vel);
    let y4 = state_axpy(state, &[(&k3, 1.0)], dt);
    let k4 = rhs_full(&y4, params, config, want_vel);
    if k2.blow_up || k3.blow_up || k4.blow_up {
        return Ok((StepOutcome::BlowUp { time: t }, None));
    }

    let mut new_state = state_axpy(
        state,
        &[(&k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)],
        dt,
    );
    new_state.time = t + dt;

    // Dissipation accumulator advanced with the same stages.
    let i0 = state.dissipation_memory;
    let d1 = -2.0 * kappa0 * i0 + k1.dissipation_rate;
    let d2 = -2.0 * kappa0 * (i0 + 0.5 * dt * d1) + k2.dissipation_rate;
    let d3 = -2.0 * kappa0 * (i0 + 0.5 * dt * d2) + k3.dissipation_rate;
    let d4 = -2.0 * kappa0 * (i0 + dt * d3) + k4.dissipation_rate;
    new_state.dissipation_memory = i0 + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);

    if !new_state.is_finite() {
        return Ok((StepOutcome::BlowUp { time: t }, None));
    }

    let advanced_particles = particles.map(|p| {
        let stages = [
            k1.stage_velocity.as_ref().expect("stage velocity requested"),
            k2.stage_velocity.as_ref().expect("stage velocity requested"),
            k3.stage_velocity.as_ref().expect("stage velocity requested"),
            k4.stage_velocity.as_ref().expect("stage velocity requested"),
        ];
        let kin = p
            .kinematics()
            .rk4(p.time(), dt, p.kappa0(), |x, _t, stage| stages[stage].eval(x));
        p.with_kinematics(kin, p.time() + dt)
    });

    Ok((StepOutcome::State(new_state), advanced_particles))
}

/// One RK4 step of the field system alone.
pub fn step(
    state: &OldroydState,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<StepOutcome> {
    step_with_particles(state, params, config, None).map(|(o, _)| o)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUp { time: f64 },
}

pub struct OldroydRun {
    pub series: DiagnosticsSeries,
    pub final_state: OldroydState,
    pub status: RunStatus,
    pub particles: Option<ParticleSet>,
    pub int_c0: f64,
    pub int_rho0: f64,
}

/// Extra columns recorded by `run`: trace integral, dissipation memory,
/// L2 of ρ, sup |u|.
pub const RUN_EXTRA_COLUMNS: [&str; 4] = ["int_c", "diss_memory", "l2_rho", "u_inf"];

fn record(
    state: &OldroydState,
    params: &ModelParams,
    config: &SolverConfig,
    int_c0: f64,
    int_rho0: f64,
) -> Result<DiagnosticsRecord> {
    let grid = *state.grid();
    let kappa0 = params.kappa0();
    let vel = velocity_spectra(&grid, state.a.coeffs(), state.b.coeffs(), params.k);
    let omega = field::inverse_to_values(&grid, &vel.omega);
    let lambda = field::inverse_to_values(&grid, &vel.lambda);
    let mu = field::inverse_to_values(&grid, &vel.mu);
    let u1 = field::inverse_to_values(&grid, &vel.u1);
    let u2 = field::inverse_to_values(&grid, &vel.u2);
    let len = grid.len();
    let grad_u_inf = (0..len)
        .map(|i| {
            (2.0 * lambda[i] * lambda[i] + 2.0 * mu[i] * mu[i] + 0.5 * omega[i] * omega[i]).sqrt()
        })
        .fold(0.0, f64::max);
    let u_inf = u1.iter().chain(&u2).map(|v| v.abs()).fold(0.0, f64::max);

    let tau_frob = state.tau_frobenius();
    let weight = state.a.quadrature_weight();
    let l1_tau = tau_frob.iter().sum::<f64>() * weight;
    let linf_tau = tau_frob.iter().copied().fold(0.0, f64::max);
    let holder_tau = match config.holder_alpha {
        Some(alpha) => {
            let (t11, t12, t22) = state.tau_components();
            let mut worst = 0.0f64;
            for comp in [t11, t12, t22] {
                let f = SpectralField::from_values(grid, comp);
                worst = worst.max(crate::diagnostics::holder_seminorm(&f, alpha)?);
            }
            worst
        }
        None => 0.0,
    };

    let int_c = state.c.integral();
    let damp = (-2.0 * kappa0 * state.time).exp();
    let energy_residual = int_c + (2.0 / params.k) * state.dissipation_memory
        - damp * int_c0
        - 2.0 * (1.0 - damp) * int_rho0;

    Ok(DiagnosticsRecord {
        t: state.time,
        l1_tau,
        linf_tau,
        holder_tau,
        l1_rho: state.rho.l1_norm(),
        linf_rho: state.rho.linf_norm(),
        grad_u_inf,
        energy_residual,
        det_min: state.determinant_field().min_value(),
        extras: vec![int_c, state.dissipation_memory, state.rho.l2_norm(), u_inf],
    })
}

/// Integrate to t_end, recording diagnostics and optionally dragging a
/// particle set along the RK stages.
pub fn run(
    state0: OldroydState,
    params: &ModelParams,
    config: &SolverConfig,
    particles: Option<ParticleSet>,
) -> Result<OldroydRun> {
    config.validate()?;
    let int_c0 = state0.c.integral();
    let int_rho0 = state0.rho.integral();
    let mut series =
        DiagnosticsSeries::new(RUN_EXTRA_COLUMNS.iter().map(|s| s.to_string()).collect());
    series.push(record(&state0, params, config, int_c0, int_rho0)?);

    let mut state = state0;
    let mut parts = particles;
    let mut status = RunStatus::Completed;
    let mut step_index = 0usize;
    while state.time < config.t_end - 1e-12 {
        match step_with_particles(&state, params, config, parts.as_ref())? {
            (StepOutcome::State(next), p) => {
                state = next;
                parts = p.or(parts);
            }
            (StepOutcome::BlowUp { time }, _) => {
                status = RunStatus::BlowUp { time };
                break;
            }
        }
        step_index += 1;
        if step_index % config.record_every == 0 || state.time >= config.t_end - 1e-12 {
            series.push(record(&state, params, config, int_c0, int_rho0)?);
        }
    }
    Ok(OldroydRun { series, final_state: state, status, particles: parts, int_c0, int_rho0 })
}

/// Residual time series of the integrated trace balance law.
pub fn energy_balance_residual(run: &OldroydRun) -> Vec<(f64, f64)> {
    run.series
        .records
        .iter()
        .map(|r| (r.t, r.energy_residual))
        .collect()
}

// ---- relaxationless regime ----

/// State of the ε = ∞ system: shear parts (a, b) and the transported
/// determinant d₀, with the trace slaved to c = 2 sqrt(a² + b² + d₀).
#[derive(Debug, Clone)]
pub struct RelaxationlessState {
    pub a: SpectralField,
    pub b: SpectralField,
    pub d0: SpectralField,
    pub time: f64,
    pub dissipation_memory: f64,
}

impl RelaxationlessState {
    pub fn new(a: SpectralField, b: SpectralField, d0: SpectralField) -> Result<Self> {
        a.grid().same_as(b.grid())?;
        a.grid().same_as(d0.grid())?;
        Ok(RelaxationlessState { a, b, d0, time: 0.0, dissipation_memory: 0.0 })
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// Slaved trace field; None when the radicand loses positivity.
    pub fn trace_field(&self) -> Option<SpectralField> {
        let len = self.grid().len();
        let mut v = Vec::with_capacity(len);
        for i in 0..len {
            let rad = self.a.values()[i].powi(2) + self.b.values()[i].powi(2)
                + self.d0.values()[i];
            if rad < 0.0 {
                return None;
            }
            v.push(2.0 * rad.sqrt());
        }
        Some(SpectralField::from_values(*self.grid(), v))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.d0.is_finite()
    }
}

pub struct RelaxationlessTendency {
    pub da: Vec<Complex64>,
    pub db: Vec<Complex64>,
    pub dd0: Vec<Complex64>,
    pub u_inf: f64,
    /// ∫|∇u|² dx.
    pub dissipation_rate: f64,
    pub flagged: bool,
}

/// Right-hand side of the relaxationless system in physical time; the
/// paper-normalized form (time in units of 1/(2k)) is k = 1/2.
pub fn rhs_relaxationless(
    state: &RelaxationlessState,
    params: &ModelParams,
    config: &SolverConfig,
) -> RelaxationlessTendency {
    let grid = *state.grid();
    let len = grid.len();
    let flagged_out = |len: usize| RelaxationlessTendency {
        da: vec![Complex64::default(); len],
        db: vec![Complex64::default(); len],
        dd0: vec![Complex64::default(); len],
        u_inf: 0.0,
        dissipation_rate: 0.0,
        flagged: true,
    };
    if !state.is_finite() {
        return flagged_out(len);
    }
    let trace = match state.trace_field() {
        Some(t) => t,
        None => return flagged_out(len),
    };
    let vel = velocity_spectra(&grid, state.a.coeffs(), state.b.coeffs(), params.k);
    let omega = field::inverse_to_values(&grid, &vel.omega);
    let lambda = field::inverse_to_values(&grid, &vel.lambda);
    let mu = field::inverse_to_values(&grid, &vel.mu);
    let u1 = field::inverse_to_values(&grid, &vel.u1);
    let u2 = field::inverse_to_values(&grid, &vel.u2);

    let (av, bv, cv) = (state.a.values(), state.b.values(), trace.values());
    let mut ta = vec![0.0; len];
    let mut tb = vec![0.0; len];
    let mut td = vec![0.0; len];
    for i in 0..len {
        ta[i] = -omega[i] * bv[i] + lambda[i] * cv[i];
        tb[i] = omega[i] * av[i] + mu[i] * cv[i];
    }
    if config.advection {
        for (f, t) in [
            (state.a.coeffs(), &mut ta),
            (state.b.coeffs(), &mut tb),
            (state.d0.coeffs(), &mut td),
        ] {
            let (dx, dy) = spectral_gradient(&grid, f);
            for i in 0..len {
                t[i] -= u1[i] * dx[i] + u2[i] * dy[i];
            }
        }
    }

    let mut da = field::forward_from_values(&grid, &ta);
    let mut db = field::forward_from_values(&grid, &tb);
    let mut dd0 = field::forward_from_values(&grid, &td);
    if config.dealias {
        for coeffs in [&mut da, &mut db, &mut dd0] {
            dealias_in_place(&grid, coeffs);
        }
    }
    let u_inf = u1.iter().chain(&u2).map(|v| v.abs()).fold(0.0, f64::max);
    RelaxationlessTendency {
        da,
        db,
        dd0,
        u_inf,
        dissipation_rate: vel.dissipation,
        flagged: false,
    }
}

pub enum RelaxationlessOutcome {
    State(RelaxationlessState),
    Flagged { time: f64 },
}

pub fn step_relaxationless(
    state: &RelaxationlessState,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<RelaxationlessOutcome> {
    let dt = config.dt;
    let grid = *state.grid();
    let len = grid.len();
    let axpy = |base: &RelaxationlessState,
                tends: &[(&RelaxationlessTendency, f64)]|
     -> RelaxationlessState {
        let combine = |b: &[Complex64], pick: &dyn Fn(&RelaxationlessTendency) -> &[Complex64]| {
            let mut out = b.to_vec();
            for (tend, w) in tends {
                let src = pick(tend);
                for i in 0..len {
                    out[i] += dt * w * src[i];
                }
            }
            out
        };
        RelaxationlessState {
            a: SpectralField::from_coeffs(grid, combine(base.a.coeffs(), &|t| &t.da)),
            b: SpectralField::from_coeffs(grid, combine(base.b.coeffs(), &|t| &t.db)),
            d0: SpectralField::from_coeffs(grid, combine(base.d0.coeffs(), &|t| &t.dd0)),
            time: base.time,
            dissipation_memory: base.dissipation_memory,
        }
    };

    let k1 = rhs_relaxationless(state, params, config);
    if k1.flagged {
        return Ok(RelaxationlessOutcome::Flagged { time: state.time });
    }
    if config.advection {
        let courant = k1.u_inf * dt / grid.spacing();
        if courant > config.cfl_guard {
            return Err(CoreError::CflViolation {
                time: state.time,
                courant,
                guard: config.cfl_guard,
            });
        }
    }
    let k2 = rhs_relaxationless(&axpy(state, &[(&k1, 0.5)]), params, config);
    let k3 = rhs_relaxationless(&axpy(state, &[(&k2, 0.5)]), params, config);
    let k4 = rhs_relaxationless(&axpy(state, &[(&k3, 1.0)]), params, config);
    if k2.flagged || k3.flagged || k4.flagged {
        return Ok(RelaxationlessOutcome::Flagged { time: state.time });
    }
    let mut next = axpy(
        state,
        &[(&k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)],
    );
    next.time = state.time + dt;
    next.dissipation_memory = state.dissipation_memory
        + dt / 6.0
            * (k1.dissipation_rate
                + 2.0 * k2.dissipation_rate
                + 2.0 * k3.dissipation_rate
                + k4.dissipation_rate);
    if !next.is_finite() {
        return Ok(RelaxationlessOutcome::Flagged { time: state.time });
    }
    Ok(RelaxationlessOutcome::State(next))
}
