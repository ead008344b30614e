//! Lagrangian solution oracle: particle paths, deformation gradients and
//! the closed-form stress representation along characteristics.
//!
//! The memory integral of the stress formula is carried as an auxiliary
//! ODE, dJ/dt = e^{2κ₀ t} ((∇_a X)^T ∇_a X)^{-1}, so reconstruction is
//! σ(X(a,t),t) = e^{-2κ₀ t} F [ 2κ₀ ρ₀ J(t) + σ₀ ] F^T with F = ∇_a X.
//! Everything here only consumes a velocity history; it never looks at the
//! Eulerian stress, which is what makes it usable as an oracle.

use std::sync::Arc;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::Result;

pub type Mat2 = [[f64; 2]; 2];

pub const MAT2_IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn mat_scale(a: &Mat2, s: f64) -> Mat2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

pub fn mat_frobenius(a: &Mat2) -> f64 {
    (a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1]).sqrt()
}

/// Symmetric 2x2 tensor value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn isotropic(v: f64) -> Self {
        Sym2 { xx: v, xy: 0.0, yy: v }
    }

    pub fn zero() -> Self {
        Sym2::isotropic(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m + r, m - r)
    }

    pub fn frobenius(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }

    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2 { xx: s * self.xx, xy: s * self.xy, yy: s * self.yy }
    }

    fn from_mat(m: &Mat2) -> Sym2 {
        Sym2 { xx: m[0][0], xy: 0.5 * (m[0][1] + m[1][0]), yy: m[1][1] }
    }

    fn to_mat(self) -> Mat2 {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    /// F · S · F^T.
    pub fn sandwich(&self, f: &Mat2) -> Sym2 {
        Sym2::from_mat(&mat_mul(&mat_mul(f, &self.to_mat()), &mat_transpose(f)))
    }
}

/// Velocity histories the particle integrator can consume.
pub trait VelocitySampler {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2];
    fn velocity_gradient(&self, x: [f64; 2], t: f64) -> Mat2;
}

/// u = 0 everywhere.
pub struct ZeroVelocity;

impl VelocitySampler for ZeroVelocity {
    fn velocity(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn velocity_gradient(&self, _x: [f64; 2], _t: f64) -> Mat2 {
        [[0.0; 2]; 2]
    }
}

/// u = G (x - center), divergence-free when G is traceless.
pub struct ConstantGradient {
    pub grad: Mat2,
    pub center: [f64; 2],
}

impl VelocitySampler for ConstantGradient {
    fn velocity(&self, x: [f64; 2], _t: f64) -> [f64; 2] {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        [
            self.grad[0][0] * d[0] + self.grad[0][1] * d[1],
            self.grad[1][0] * d[0] + self.grad[1][1] * d[1],
        ]
    }
    fn velocity_gradient(&self, _x: [f64; 2], _t: f64) -> Mat2 {
        self.grad
    }
}

/// Arbitrary closed-form velocity, for analytically forced tests.
pub struct AnalyticVelocity {
    pub u: Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>,
    pub grad: Arc<dyn Fn([f64; 2], f64) -> Mat2 + Send + Sync>,
}

impl VelocitySampler for AnalyticVelocity {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        (self.u)(x, t)
    }
    fn velocity_gradient(&self, x: [f64; 2], t: f64) -> Mat2 {
        (self.grad)(x, t)
    }
}

/// How a snapshot sampler evaluates fields between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceInterp {
    /// Direct Fourier summation: exact for band-limited fields, O(modes).
    Fourier,
    /// Periodic cubic Lagrange: O(h^4), constant cost.
    Cubic,
}

struct VelocityFrame {
    u: [SpectralField; 2],
    grad: [SpectralField; 4], // row-major ∂j u^i
}

/// Stored velocity snapshots with cubic Lagrange interpolation in time.
pub struct SnapshotSampler {
    times: Vec<f64>,
    frames: Vec<VelocityFrame>,
    interp: SpaceInterp,
}

impl SnapshotSampler {
    /// Build from velocity snapshots; gradients are formed spectrally.
    pub fn new(
        times: Vec<f64>,
        velocities: Vec<[SpectralField; 2]>,
        interp: SpaceInterp,
    ) -> Result<Self> {
        assert_eq!(times.len(), velocities.len());
        assert!(!times.is_empty(), "need at least one snapshot");
        let mut frames = Vec::with_capacity(times.len());
        for [u1, u2] in velocities {
            let grad = [
                u1.derivative(0)?,
                u1.derivative(1)?,
                u2.derivative(0)?,
                u2.derivative(1)?,
            ];
            frames.push(VelocityFrame { u: [u1, u2], grad });
        }
        Ok(SnapshotSampler { times, frames, interp })
    }

    fn eval_field(&self, f: &SpectralField, x: [f64; 2]) -> f64 {
        match self.interp {
            SpaceInterp::Fourier => f.eval_fourier(x),
            SpaceInterp::Cubic => f.eval_cubic(x),
        }
    }

    /// Frame indices and Lagrange weights bracketing time t.
    fn time_weights(&self, t: f64) -> Vec<(usize, f64)> {
        let m = self.times.len();
        if m == 1 {
            return vec![(0, 1.0)];
        }
        // Locate the interval, then take up to 4 nodes around it.
        let mut hi = self.times.partition_point(|&s| s < t).min(m - 1).max(1);
        if hi == 0 {
            hi = 1;
        }
        let lo = hi - 1;
        let start = lo.saturating_sub(1);
        let end = (hi + 1).min(m - 1);
        let nodes: Vec<usize> = (start..=end).collect();
        let mut out = Vec::with_capacity(nodes.len());
        for &i in &nodes {
            let mut w = 1.0;
            for &j in &nodes {
                if j != i {
                    w *= (t - self.times[j]) / (self.times[i] - self.times[j]);
                }
            }
            out.push((i, w));
        }
        out
    }
}

impl VelocitySampler for SnapshotSampler {
    fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let w = self.time_weights(t);
        let mut out = [0.0; 2];
        for &(i, wi) in &w {
            out[0] += wi * self.eval_field(&self.frames[i].u[0], x);
            out[1] += wi * self.eval_field(&self.frames[i].u[1], x);
        }
        out
    }

    fn velocity_gradient(&self, x: [f64; 2], t: f64) -> Mat2 {
        let w = self.time_weights(t);
        let mut g = [0.0; 4];
        for &(i, wi) in &w {
            for (slot, field) in self.frames[i].grad.iter().enumerate() {
                g[slot] += wi * self.eval_field(field, x);
            }
        }
        [[g[0], g[1]], [g[2], g[3]]]
    }
}

/// Position/deformation/memory triple in RK4-combinable form.
#[derive(Debug, Clone)]
pub(crate) struct Kinematics {
    pub pos: Vec<[f64; 2]>,
    pub deform: Vec<Mat2>,
    pub memory: Vec<Mat2>,
}

impl Kinematics {
    fn axpy(&self, d: &Kinematics, s: f64) -> Kinematics {
        let pos = self
            .pos
            .iter()
            .zip(&d.pos)
            .map(|(p, dp)| [p[0] + s * dp[0], p[1] + s * dp[1]])
            .collect();
        let deform = self
            .deform
            .iter()
            .zip(&d.deform)
            .map(|(f, df)| mat_add(f, &mat_scale(df, s)))
            .collect();
        let memory = self
            .memory
            .iter()
            .zip(&d.memory)
            .map(|(j, dj)| mat_add(j, &mat_scale(dj, s)))
            .collect();
        Kinematics { pos, deform, memory }
    }

    /// Time derivative given a velocity/gradient evaluation at (x, t).
    pub fn derivative(
        &self,
        t: f64,
        kappa0: f64,
        mut eval: impl FnMut([f64; 2], f64) -> ([f64; 2], Mat2),
    ) -> Kinematics {
        let growth = (2.0 * kappa0 * t).exp();
        let mut pos = Vec::with_capacity(self.pos.len());
        let mut deform = Vec::with_capacity(self.pos.len());
        let mut memory = Vec::with_capacity(self.pos.len());
        for (i, &x) in self.pos.iter().enumerate() {
            let (u, g) = eval(x, t);
            pos.push(u);
            deform.push(mat_mul(&g, &self.deform[i]));
            // (F^T F)^{-1} via the adjugate; det F stays near 1 for
            // incompressible histories.
            let f = &self.deform[i];
            let m = mat_mul(&mat_transpose(f), f);
            let det = mat_det(&m);
            let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
            memory.push(mat_scale(&inv, growth));
        }
        Kinematics { pos, deform, memory }
    }

    /// One classical RK4 step of (X, F, J).
    pub fn rk4(
        &self,
        t: f64,
        dt: f64,
        kappa0: f64,
        mut eval: impl FnMut([f64; 2], f64, usize) -> ([f64; 2], Mat2),
    ) -> Kinematics {
        let k1 = self.derivative(t, kappa0, |x, s| eval(x, s, 0));
        let k2 = self.axpy(&k1, 0.5 * dt).derivative(t + 0.5 * dt, kappa0, |x, s| eval(x, s, 1));
        let k3 = self.axpy(&k2, 0.5 * dt).derivative(t + 0.5 * dt, kappa0, |x, s| eval(x, s, 2));
        let k4 = self.axpy(&k3, dt).derivative(t + dt, kappa0, |x, s| eval(x, s, 3));
        let mut out = self.clone();
        for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
            out = out.axpy(k, dt * w / 6.0);
        }
        out
    }
}

/// Threshold on the condition estimate of ∇_a X beyond which the particle
/// set is flagged degenerate.
const DEGENERACY_COND: f64 = 1e12;

/// Lagrangian markers: labels, positions, deformation gradients and the
/// accumulated memory integral of the stress formula.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    labels: Vec<[f64; 2]>,
    kin: Kinematics,
    time: f64,
    kappa0: f64,
    degenerate: bool,
}

impl ParticleSet {
    pub fn new(labels: Vec<[f64; 2]>, kappa0: f64) -> Self {
        let n = labels.len();
        let kin = Kinematics {
            pos: labels.clone(),
            deform: vec![MAT2_IDENTITY; n],
            memory: vec![[[0.0; 2]; 2]; n],
        };
        ParticleSet { labels, kin, time: 0.0, kappa0, degenerate: false }
    }

    /// Equispaced seed of per_axis x per_axis markers on a 2D grid domain.
    pub fn grid_seeded(grid: &Grid, per_axis: usize, kappa0: f64) -> Self {
        let h = crate::grid::PERIOD / per_axis as f64;
        let mut labels = Vec::with_capacity(per_axis * per_axis);
        for i in 0..per_axis {
            for j in 0..per_axis {
                labels.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            }
        }
        let _ = grid;
        ParticleSet::new(labels, kappa0)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[[f64; 2]] {
        &self.labels
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.kin.pos
    }

    pub fn deformations(&self) -> &[Mat2] {
        &self.kin.deform
    }

    pub fn memories(&self) -> &[Mat2] {
        &self.kin.memory
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Worst |det ∇_a X - 1| over the set.
    pub fn max_volume_defect(&self) -> f64 {
        self.kin
            .deform
            .iter()
            .map(|f| (mat_det(f) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn kinematics(&self) -> &Kinematics {
        &self.kin
    }

    pub(crate) fn with_kinematics(&self, kin: Kinematics, time: f64) -> ParticleSet {
        let mut out = ParticleSet {
            labels: self.labels.clone(),
            kin,
            time,
            kappa0: self.kappa0,
            degenerate: self.degenerate,
        };
        out.update_degeneracy();
        out
    }

    fn update_degeneracy(&mut self) {
        if self.degenerate {
            return;
        }
        for f in &self.kin.deform {
            let nf = mat_frobenius(f);
            let cond = nf * nf / mat_det(f).abs().max(f64::MIN_POSITIVE);
            if !cond.is_finite() || cond > DEGENERACY_COND {
                self.degenerate = true;
                return;
            }
        }
    }
}

/// Advance particles by one RK4 step under the given velocity history.
pub fn advance_particles(
    p: &ParticleSet,
    v: &dyn VelocitySampler,
    dt: f64,
) -> ParticleSet {
    let kin = p.kin.rk4(p.time, dt, p.kappa0, |x, t, _stage| {
        (v.velocity(x, t), v.velocity_gradient(x, t))
    });
    p.with_kinematics(kin, p.time + dt)
}

/// Advance through [0, t_end] in steps of dt (last step shortened).
pub fn advance_particles_to(
    p: &ParticleSet,
    v: &dyn VelocitySampler,
    dt: f64,
    t_end: f64,
) -> ParticleSet {
    let mut cur = p.clone();
    while cur.time < t_end - 1e-14 {
        let step = dt.min(t_end - cur.time);
        cur = advance_particles(&cur, v, step);
    }
    cur
}

/// Closed-form stress at particle positions from initial density and
/// stress sampled at the labels.
pub fn stress_reconstruct(p: &ParticleSet, rho0: &[f64], sigma0: &[Sym2]) -> Vec<Sym2> {
    assert_eq!(rho0.len(), p.len());
    assert_eq!(sigma0.len(), p.len());
    let damp = (-2.0 * p.kappa0 * p.time).exp();
    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let f = &p.kin.deform[i];
        let jm = &p.kin.memory[i];
        let core = Sym2 {
            xx: 2.0 * p.kappa0 * rho0[i] * damp * jm[0][0] + damp * sigma0[i].xx,
            xy: p.kappa0 * rho0[i] * damp * (jm[0][1] + jm[1][0]) + damp * sigma0[i].xy,
            yy: 2.0 * p.kappa0 * rho0[i] * damp * jm[1][1] + damp * sigma0[i].yy,
        };
        out.push(core.sandwich(f));
    }
    out
}

/// Density along particles: transport is exact, so this is ρ₀ at labels.
pub fn density_at_particles(p: &ParticleSet, rho0: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    p.labels.iter().map(|&a| rho0(a)).collect()
}

/// Max over particles of |(∇_a X)^T ∇_x θ(X) - ∇_a θ₀(a)|: the transported
/// gradient invariant, zero for exact flows.
pub fn ertel_check(
    p: &ParticleSet,
    grad_theta_now: impl Fn([f64; 2]) -> [f64; 2],
    grad_theta0: impl Fn([f64; 2]) -> [f64; 2],
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let ft = mat_transpose(&p.kin.deform[i]);
        let gx = grad_theta_now(p.kin.pos[i]);
        let ga = grad_theta0(p.labels[i]);
        let v = [
            ft[0][0] * gx[0] + ft[0][1] * gx[1] - ga[0],
            ft[1][0] * gx[0] + ft[1][1] * gx[1] - ga[1],
        ];
        worst = worst.max((v[0] * v[0] + v[1] * v[1]).sqrt());
    }
    worst
}

/// cosh-like pair (c, t·sinc) for the fundamental solution of F' = gF with
/// g² = δI: F(t) = c(δt²) I + s(δ, t) g.
fn fundamental_pair(delta: f64, t: f64) -> (f64, f64) {
    let x = delta * t * t;
    if x.abs() < 1e-8 {
        // Series: covers the polynomial (δ = 0) regime smoothly.
        (1.0 + x / 2.0 + x * x / 24.0, t * (1.0 + x / 6.0 + x * x / 120.0))
    } else if x > 0.0 {
        let r = x.sqrt();
        (r.cosh(), t * r.sinh() / r)
    } else {
        let r = (-x).sqrt();
        (r.cos(), t * r.sin() / r)
    }
}

/// exp(t g) for traceless g, via the Hamilton-Cayley closed form.
pub fn expm_traceless(g: &Mat2, t: f64) -> Mat2 {
    let delta = -mat_det(g);
    let (c, s) = fundamental_pair(delta, t);
    mat_add(&mat_scale(&MAT2_IDENTITY, c), &mat_scale(g, s))
}

const GL16_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gauss_legendre_mat(a: f64, b: f64, f: impl Fn(f64) -> Mat2) -> Mat2 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = [[0.0; 2]; 2];
    for i in 0..8 {
        for sign in [-1.0, 1.0] {
            let s = mid + sign * half * GL16_NODES[i];
            acc = mat_add(&acc, &mat_scale(&f(s), GL16_WEIGHTS[i] * half));
        }
    }
    acc
}

/// Exact-in-space reference solution for a constant traceless velocity
/// gradient: F(t) closed form, memory integral by high-order quadrature.
pub fn constant_gradient_reference(
    g: &Mat2,
    t: f64,
    kappa0: f64,
    sigma0: Sym2,
    rho0: f64,
) -> Sym2 {
    let f = expm_traceless(g, t);
    let delta = -mat_det(g);
    let rate = 2.0 * kappa0 + 2.0 * delta.max(0.0).sqrt() + 1.0;
    let panels = ((rate * t / 8.0).ceil() as usize).max(1);
    let mut j = [[0.0; 2]; 2];
    for p in 0..panels {
        let a = t * p as f64 / panels as f64;
        let b = t * (p + 1) as f64 / panels as f64;
        j = mat_add(
            &j,
            &gauss_legendre_mat(a, b, |s| {
                let fm = expm_traceless(g, -s); // F(s)^{-1}
                mat_scale(&mat_mul(&fm, &mat_transpose(&fm)), (2.0 * kappa0 * s).exp())
            }),
        );
    }
    let damp = (-2.0 * kappa0 * t).exp();
    let core = Sym2 {
        xx: 2.0 * kappa0 * rho0 * damp * j[0][0] + damp * sigma0.xx,
        xy: kappa0 * rho0 * damp * (j[0][1] + j[1][0]) + damp * sigma0.xy,
        yy: 2.0 * kappa0 * rho0 * damp * j[1][1] + damp * sigma0.yy,
    };
    core.sandwich(&f)
}

/// Growth classification of the constant-gradient solution: fitted
/// late-time exponential rate of ||σ|| against a threshold of κ₀/2
/// (marginal linear-in-t growth at √δ = κ₀ classifies as bounded).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Growing,
}

pub fn classify_constant_gradient_growth(
    g: &Mat2,
    kappa0: f64,
    sigma0: Sym2,
    rho0: f64,
) -> Growth {
    let horizon = 12.0 / kappa0.max(1e-6);
    let n1 = constant_gradient_reference(g, 0.5 * horizon, kappa0, sigma0, rho0).frobenius();
    let n2 = constant_gradient_reference(g, horizon, kappa0, sigma0, rho0).frobenius();
    let rate = (n2 / n1).ln() / (0.5 * horizon);
    if rate > 0.5 * kappa0 {
        Growth::Growing
    } else {
        Growth::Bounded
    }
}
