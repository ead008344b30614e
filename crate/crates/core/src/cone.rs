//! Galerkin-truncated scalar model ∂_t τ = -τ A²τ in Fourier coefficients:
//! dτ_l/dt = -Σ_{k+j=l} τ_k α²(j) τ_j over the truncated lattice.
//!
//! The cone τ₀ >= Σ_{k≠0}|τ_k| is invariant: the truncated interaction sum
//! is a subset of the full one while the l = 0 dissipation is complete, so
//! the Gronwall comparison survives Galerkin truncation unchanged. This
//! module stays independent of the spectral machinery: at desk-scale
//! cutoffs a dense O(K²) convolution is all that is needed.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::CoreError;
use crate::Result;

/// Even, bounded, real multiplier table on the truncated lattice with
/// α(0) = 0.
#[derive(Debug, Clone)]
pub struct AlphaSymbol {
    dim: usize,
    k_max: i64,
    table: Vec<f64>,
    gamma: f64,
}

impl AlphaSymbol {
    /// Build from an evaluation rule; evenness is checked, α(0) forced to 0.
    pub fn from_fn(dim: usize, k_max: i64, f: impl Fn([i64; 2]) -> f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(CoreError::InvalidParameter("cone lattice dim must be 1 or 2".into()));
        }
        if k_max < 1 {
            return Err(CoreError::InvalidParameter("cone cutoff must be >= 1".into()));
        }
        let lattice = lattice_points(dim, k_max);
        let mut table = vec![0.0; lattice.len()];
        for (idx, &l) in lattice.iter().enumerate() {
            table[idx] = if l == [0, 0] { 0.0 } else { f(l) };
        }
        let sym = AlphaSymbol { dim, k_max, table, gamma: 0.0 };
        for &l in &lattice {
            let v = sym.raw(l);
            let w = sym.raw([-l[0], -l[1]]);
            if (v - w).abs() > 1e-14 * (1.0 + v.abs()) {
                return Err(CoreError::SymmetryViolation(format!(
                    "α not even at {:?}: {v} vs {w}",
                    l
                )));
            }
        }
        let gamma = sym.table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(AlphaSymbol { gamma, ..sym })
    }

    /// Random admissible symbol with |α| <= gamma, even, α(0) = 0.
    pub fn random(dim: usize, k_max: i64, gamma: f64, rng: &mut crate::rng::CounterRng) -> Self {
        let lattice = lattice_points(dim, k_max);
        let mut table = vec![0.0; lattice.len()];
        for (idx, &l) in lattice.iter().enumerate() {
            if l == [0, 0] || l[0] < 0 || (l[0] == 0 && l[1] < 0) {
                continue;
            }
            table[idx] = rng.symmetric(gamma);
        }
        // Mirror to the negative half.
        let mut sym = AlphaSymbol { dim, k_max, table, gamma };
        for &l in &lattice {
            if l[0] < 0 || (l[0] == 0 && l[1] < 0) {
                let v = sym.raw([-l[0], -l[1]]);
                let idx = sym.index(l).unwrap();
                sym.table[idx] = v;
            }
        }
        sym.gamma = sym.table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        sym
    }

    fn index(&self, l: [i64; 2]) -> Option<usize> {
        lattice_index(self.dim, self.k_max, l)
    }

    fn raw(&self, l: [i64; 2]) -> f64 {
        self.index(l).map(|i| self.table[i]).unwrap_or(0.0)
    }

    pub fn value(&self, l: [i64; 2]) -> f64 {
        self.raw(l)
    }

    /// Uniform bound Γ on |α|.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn lattice_points(dim: usize, k_max: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    match dim {
        1 => {
            for l in -k_max..=k_max {
                out.push([l, 0]);
            }
        }
        _ => {
            for l1 in -k_max..=k_max {
                for l2 in -k_max..=k_max {
                    out.push([l1, l2]);
                }
            }
        }
    }
    out
}

fn lattice_index(dim: usize, k_max: i64, l: [i64; 2]) -> Option<usize> {
    let side = 2 * k_max + 1;
    match dim {
        1 => {
            if l[0].abs() > k_max || l[1] != 0 {
                None
            } else {
                Some((l[0] + k_max) as usize)
            }
        }
        _ => {
            if l[0].abs() > k_max || l[1].abs() > k_max {
                None
            } else {
                Some(((l[0] + k_max) * side + (l[1] + k_max)) as usize)
            }
        }
    }
}

/// Complex Fourier coefficients on the truncated lattice with Hermitian
/// symmetry (τ_{-l} = conj τ_l, τ₀ real).
#[derive(Debug, Clone)]
pub struct ConeState {
    dim: usize,
    k_max: i64,
    coeffs: Vec<Complex64>,
    pub time: f64,
}

impl ConeState {
    pub fn new(dim: usize, k_max: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = lattice_points(dim, k_max).len();
        if coeffs.len() != expected {
            return Err(CoreError::InvalidParameter(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        let state = ConeState { dim, k_max, coeffs, time: 0.0 };
        state.check_symmetry()?;
        Ok(state)
    }

    /// Zero state except the mean mode.
    pub fn mean_only(dim: usize, k_max: i64, tau0: f64) -> Self {
        let mut coeffs = vec![Complex64::default(); lattice_points(dim, k_max).len()];
        coeffs[lattice_index(dim, k_max, [0, 0]).unwrap()] = Complex64::new(tau0, 0.0);
        ConeState { dim, k_max, coeffs, time: 0.0 }
    }

    /// Random state inside the cone: side modes drawn first, then τ₀ set
    /// to (1 + slack) times their absolute sum.
    pub fn random_in_cone(
        dim: usize,
        k_max: i64,
        amp: f64,
        slack: f64,
        rng: &mut crate::rng::CounterRng,
    ) -> Self {
        let lattice = lattice_points(dim, k_max);
        let mut coeffs = vec![Complex64::default(); lattice.len()];
        for (idx, &l) in lattice.iter().enumerate() {
            if l == [0, 0] || l[0] < 0 || (l[0] == 0 && l[1] < 0) {
                continue;
            }
            coeffs[idx] = Complex64::new(rng.symmetric(amp), rng.symmetric(amp));
        }
        let mut state = ConeState { dim, k_max, coeffs, time: 0.0 };
        for &l in &lattice {
            if l[0] < 0 || (l[0] == 0 && l[1] < 0) {
                let v = state.get([-l[0], -l[1]]).conj();
                let idx = lattice_index(dim, k_max, l).unwrap();
                state.coeffs[idx] = v;
            }
        }
        let side_sum: f64 = lattice
            .iter()
            .filter(|&&l| l != [0, 0])
            .map(|&l| state.get(l).norm())
            .sum();
        let idx0 = lattice_index(dim, k_max, [0, 0]).unwrap();
        state.coeffs[idx0] = Complex64::new(side_sum * (1.0 + slack), 0.0);
        state
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn lattice(&self) -> Vec<[i64; 2]> {
        lattice_points(self.dim, self.k_max)
    }

    pub fn get(&self, l: [i64; 2]) -> Complex64 {
        lattice_index(self.dim, self.k_max, l)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Mean coefficient τ₀ (real by symmetry).
    pub fn tau0(&self) -> f64 {
        self.get([0, 0]).re
    }

    fn check_symmetry(&self) -> Result<()> {
        let scale =
            self.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1e-300);
        for &l in &self.lattice() {
            let diff = (self.get(l) - self.get([-l[0], -l[1]]).conj()).norm();
            if diff > 1e-12 * scale {
                return Err(CoreError::SymmetryViolation(format!(
                    "τ at {:?} vs conjugate mirror differ by {diff:.3e}",
                    l
                )));
            }
        }
        Ok(())
    }

    /// τ₀ - Σ_{k≠0} |τ_k|; positive means strictly inside the cone.
    pub fn cone_margin(&self) -> f64 {
        let side: f64 = self
            .lattice()
            .iter()
            .filter(|&&l| l != [0, 0])
            .map(|&l| self.get(l).norm())
            .sum();
        self.tau0() - side
    }

    /// Weighted norm Σ_k (1 + |k|)^s |τ_k| (Euclidean |k|).
    pub fn weighted_norm(&self, sexp: f64) -> f64 {
        self.lattice()
            .iter()
            .map(|&l| {
                let kn = ((l[0] * l[0] + l[1] * l[1]) as f64).sqrt();
                (1.0 + kn).powf(sexp) * self.get(l).norm()
            })
            .sum()
    }

    /// Reconstructed field values Σ τ_k e^{ikx} on an m-point grid per axis
    /// (imaginary parts cancel by symmetry).
    pub fn reconstruct(&self, m: usize) -> Vec<f64> {
        let lattice = self.lattice();
        let h = crate::grid::PERIOD / m as f64;
        match self.dim {
            1 => (0..m)
                .map(|i| {
                    let x = i as f64 * h;
                    lattice
                        .iter()
                        .map(|&l| (self.get(l) * Complex64::from_polar(1.0, l[0] as f64 * x)).re)
                        .sum()
                })
                .collect(),
            _ => {
                let mut out = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        let x = [i as f64 * h, j as f64 * h];
                        out.push(
                            lattice
                                .iter()
                                .map(|&l| {
                                    let phase = l[0] as f64 * x[0] + l[1] as f64 * x[1];
                                    (self.get(l) * Complex64::from_polar(1.0, phase)).re
                                })
                                .sum(),
                        );
                    }
                }
                out
            }
        }
    }
}

/// Envelope check against C_s(0) e^{2^{s+1} τ₀(0) Γ² t}.
pub fn bound_check(
    state: &ConeState,
    sexp: f64,
    c_s0: f64,
    tau0_initial: f64,
    gamma: f64,
) -> bool {
    let envelope = c_s0 * (2.0f64.powf(sexp + 1.0) * tau0_initial * gamma * gamma * state.time).exp();
    state.weighted_norm(sexp) <= envelope * (1.0 + 1e-6)
}

/// Galerkin-truncated tendency: for |l| <= K,
/// dτ_l/dt = -Σ_{k+j=l, |k|,|j| <= K} τ_k α²(j) τ_j.
/// Hermitian symmetry of the output is enforced exactly by computing one
/// member of each conjugate pair.
pub fn rhs_cone(state: &ConeState, alpha: &AlphaSymbol) -> Result<Vec<Complex64>> {
    state.check_symmetry()?;
    if alpha.dim != state.dim || alpha.k_max < state.k_max {
        return Err(CoreError::InvalidParameter(
            "α table does not cover the state lattice".into(),
        ));
    }
    let lattice = state.lattice();
    let mut out = vec![Complex64::default(); lattice.len()];
    for &l in &lattice {
        // Fill each pair from its lexicographically positive member.
        if l[0] < 0 || (l[0] == 0 && l[1] < 0) {
            continue;
        }
        let mut acc = Complex64::default();
        for &k in &lattice {
            let j = [l[0] - k[0], l[1] - k[1]];
            if lattice_index(state.dim, state.k_max, j).is_none() {
                continue;
            }
            let aj = alpha.value(j);
            acc -= state.get(k) * (aj * aj) * state.get(j);
        }
        let idx = lattice_index(state.dim, state.k_max, l).unwrap();
        if l == [0, 0] {
            out[idx] = Complex64::new(acc.re, 0.0);
        } else {
            out[idx] = acc;
            let midx = lattice_index(state.dim, state.k_max, [-l[0], -l[1]]).unwrap();
            out[midx] = acc.conj();
        }
    }
    Ok(out)
}

/// One RK4 step.
pub fn step_cone(state: &ConeState, alpha: &AlphaSymbol, dt: f64) -> Result<ConeState> {
    let axpy = |base: &[Complex64], d: &[Complex64], s: f64| -> Vec<Complex64> {
        base.iter().zip(d).map(|(b, k)| b + s * k).collect()
    };
    let mk = |coeffs: Vec<Complex64>, time: f64| ConeState {
        dim: state.dim,
        k_max: state.k_max,
        coeffs,
        time,
    };
    let k1 = rhs_cone(state, alpha)?;
    let k2 = rhs_cone(&mk(axpy(&state.coeffs, &k1, 0.5 * dt), state.time), alpha)?;
    let k3 = rhs_cone(&mk(axpy(&state.coeffs, &k2, 0.5 * dt), state.time), alpha)?;
    let k4 = rhs_cone(&mk(axpy(&state.coeffs, &k3, dt), state.time), alpha)?;
    let mut coeffs = state.coeffs.clone();
    for i in 0..coeffs.len() {
        coeffs[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(mk(coeffs, state.time + dt))
}

/// Trajectory summary of a cone simulation.
pub struct ConeTrajectory {
    /// (t, τ₀, cone margin, weighted norm at the configured exponent).
    pub samples: Vec<(f64, f64, f64, f64)>,
    pub final_state: ConeState,
    /// Worst margin over the trajectory.
    pub min_margin: f64,
    /// Set when the state left finiteness (out-of-cone explorations).
    pub blow_up: bool,
}

/// Integrate to t_end with RK4. dt is capped at the Lipschitz scale
/// 0.1/(Γ² τ₀(0)) when the initial datum is in the cone.
pub fn simulate_cone(
    state0: &ConeState,
    alpha: &AlphaSymbol,
    dt: f64,
    t_end: f64,
    weighted_exp: f64,
) -> Result<ConeTrajectory> {
    let tau00 = state0.tau0();
    let cap = if tau00 > 0.0 && alpha.gamma() > 0.0 {
        0.1 / (alpha.gamma().powi(2) * tau00)
    } else {
        f64::INFINITY
    };
    let dt = dt.min(cap);
    let mut state = state0.clone();
    let mut samples = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut blow_up = false;
    let push = |s: &ConeState, samples: &mut Vec<(f64, f64, f64, f64)>, min_margin: &mut f64| {
        let margin = s.cone_margin();
        *min_margin = min_margin.min(margin);
        samples.push((s.time, s.tau0(), margin, s.weighted_norm(weighted_exp)));
    };
    push(&state, &mut samples, &mut min_margin);
    while state.time < t_end - 1e-12 {
        let next = step_cone(&state, alpha, dt.min(t_end - state.time))?;
        if !next.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            blow_up = true;
            break;
        }
        state = next;
        push(&state, &mut samples, &mut min_margin);
    }
    Ok(ConeTrajectory { samples, final_state: state, min_margin, blow_up })
}

/// Plain-text coefficient table: one line per wavevector, "l_x [l_y] re im".
pub fn write_coeff_table(state: &ConeState, mut w: impl Write) -> std::io::Result<()> {
    for &l in &state.lattice() {
        let c = state.get(l);
        match state.dim {
            1 => writeln!(w, "{} {:.17e} {:.17e}", l[0], c.re, c.im)?,
            _ => writeln!(w, "{} {} {:.17e} {:.17e}", l[0], l[1], c.re, c.im)?,
        }
    }
    Ok(())
}

/// Read a coefficient table written by `write_coeff_table`; the lattice
/// cutoff is inferred from the largest wavevector present.
pub fn read_coeff_table(r: impl BufRead) -> Result<ConeState> {
    let mut entries: Vec<([i64; 2], Complex64)> = Vec::new();
    let mut dim = 1;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| CoreError::Io(format!("bad number {s:?}: {e}")))
        };
        let parse_int = |s: &str| -> Result<i64> {
            s.parse::<i64>()
                .map_err(|e| CoreError::Io(format!("bad wavevector {s:?}: {e}")))
        };
        match parts.len() {
            3 => entries.push(([parse_int(parts[0])?, 0], Complex64::new(parse(parts[1])?, parse(parts[2])?))),
            4 => {
                dim = 2;
                entries.push((
                    [parse_int(parts[0])?, parse_int(parts[1])?],
                    Complex64::new(parse(parts[2])?, parse(parts[3])?),
                ));
            }
            _ => {
                return Err(CoreError::Io(format!(
                    "expected 'l_x [l_y] re im', got {line:?}"
                )))
            }
        }
    }
    let k_max = entries
        .iter()
        .map(|(l, _)| l[0].abs().max(l[1].abs()))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut coeffs = vec![Complex64::default(); lattice_points(dim, k_max).len()];
    for (l, c) in entries {
        let idx = lattice_index(dim, k_max, l)
            .ok_or_else(|| CoreError::Io(format!("wavevector {l:?} outside lattice")))?;
        coeffs[idx] = c;
    }
    ConeState::new(dim, k_max, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn two_mode_state(tau0: f64, tau1: Complex64, k_max: i64) -> ConeState {
        let mut coeffs = vec![Complex64::default(); (2 * k_max + 1) as usize];
        coeffs[(k_max) as usize] = Complex64::new(tau0, 0.0);
        coeffs[(k_max + 1) as usize] = tau1;
        coeffs[(k_max - 1) as usize] = tau1.conj();
        ConeState::new(1, k_max, coeffs).unwrap()
    }

    #[test]
    fn mean_only_state_is_stationary() {
        let s = ConeState::mean_only(1, 4, 2.0);
        let alpha = AlphaSymbol::from_fn(1, 4, |l| 0.5 * l[0].abs() as f64).unwrap();
        let dt = rhs_cone(&s, &alpha).unwrap();
        assert!(dt.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn two_mode_hand_convolution() {
        // Modes {0, ±1}: dτ₀/dt = -2α₁²|τ₁|², dτ₁/dt = -α₁²τ₀τ₁.
        let a1 = 0.8;
        let alpha = AlphaSymbol::from_fn(1, 4, move |l| if l[0].abs() == 1 { a1 } else { 0.0 })
            .unwrap();
        let tau1 = Complex64::new(0.3, -0.2);
        let s = two_mode_state(1.5, tau1, 4);
        let dt = rhs_cone(&s, &alpha).unwrap();
        let d0 = dt[4];
        let d1 = dt[5];
        assert!((d0 - Complex64::new(-2.0 * a1 * a1 * tau1.norm_sqr(), 0.0)).norm() < 1e-14);
        assert!((d1 - Complex64::new(-a1 * a1 * 1.5, 0.0) * tau1).norm() < 1e-14);
    }

    #[test]
    fn real_even_class_stays_real() {
        // All-real coefficients (even field) have all-real tendencies.
        let alpha = AlphaSymbol::from_fn(1, 3, |l| (l[0].abs() as f64).sqrt()).unwrap();
        let mut coeffs = vec![Complex64::default(); 7];
        coeffs[3] = Complex64::new(1.0, 0.0);
        coeffs[4] = Complex64::new(0.2, 0.0);
        coeffs[2] = Complex64::new(0.2, 0.0);
        coeffs[5] = Complex64::new(-0.1, 0.0);
        coeffs[1] = Complex64::new(-0.1, 0.0);
        let s = ConeState::new(1, 3, coeffs).unwrap();
        let dt = rhs_cone(&s, &alpha).unwrap();
        assert!(dt.iter().all(|c| c.im.abs() < 1e-15));
    }

    #[test]
    fn dissipation_identity_at_mean_mode() {
        let mut rng = CounterRng::new(3);
        let alpha = AlphaSymbol::random(1, 6, 1.0, &mut rng);
        let s = ConeState::random_in_cone(1, 6, 0.3, 0.2, &mut rng);
        let dt = rhs_cone(&s, &alpha).unwrap();
        let d0 = dt[6].re;
        let want: f64 = s
            .lattice()
            .iter()
            .filter(|&&l| l != [0, 0])
            .map(|&l| alpha.value(l).powi(2) * s.get(l).norm_sqr())
            .sum::<f64>();
        assert!((d0 + want).abs() <= 1e-14 * want.max(1.0));
    }

    #[test]
    fn cone_margin_examples() {
        let s = two_mode_state(1.0, Complex64::new(0.4, 0.0), 3);
        assert!((s.cone_margin() - 0.2).abs() < 1e-15);

        let m = ConeState::mean_only(1, 3, 1.0);
        assert!((m.cone_margin() - 1.0).abs() < 1e-15);

        let b = two_mode_state(0.8, Complex64::new(0.4, 0.0), 3);
        assert!(b.cone_margin().abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_examples() {
        let m = ConeState::mean_only(1, 3, 1.0);
        assert!((m.weighted_norm(2.0) - 1.0).abs() < 1e-15);

        let s = two_mode_state(1.0, Complex64::new(0.25, 0.0), 3);
        // 1·τ₀ + two side modes at (1+1)^1 |τ₁|.
        assert!((s.weighted_norm(1.0) - (1.0 + 2.0 * 2.0 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn symmetry_violation_rejected() {
        let mut coeffs = vec![Complex64::default(); 7];
        coeffs[3] = Complex64::new(1.0, 0.0);
        coeffs[4] = Complex64::new(0.3, 0.1);
        coeffs[2] = Complex64::new(0.3, 0.1); // should be the conjugate
        assert!(ConeState::new(1, 3, coeffs).is_err());
    }

    #[test]
    fn cone_invariance_two_mode_long_run() {
        let alpha = AlphaSymbol::from_fn(1, 4, |l| if l[0] != 0 { 1.0 } else { 0.0 }).unwrap();
        let s0 = two_mode_state(1.0, Complex64::new(0.25, 0.0), 4);
        let traj = simulate_cone(&s0, &alpha, 0.05, 10.0, 1.0).unwrap();
        assert!(!traj.blow_up);
        assert!(traj.min_margin >= -1e-10);
        // τ₀ monotone nonincreasing.
        for w in traj.samples.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        // Against a tiny-step reference.
        let fine = simulate_cone(&s0, &alpha, 0.001, 10.0, 1.0).unwrap();
        let d = (traj.final_state.tau0() - fine.final_state.tau0()).abs();
        assert!(d < 1e-7, "integrator gap {d:.3e}");
    }

    #[test]
    fn exploration_outside_cone_is_recorded_not_asserted() {
        let alpha = AlphaSymbol::from_fn(1, 3, |l| if l[0] != 0 { 1.0 } else { 0.0 }).unwrap();
        let s0 = two_mode_state(0.0, Complex64::new(0.5, 0.0), 3);
        let traj = simulate_cone(&s0, &alpha, 0.01, 2.0, 1.0).unwrap();
        assert!(traj.samples.len() > 10);
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let alpha = AlphaSymbol::from_fn(1, 3, |l| l[0].abs() as f64).unwrap();
        let s0 = ConeState::mean_only(1, 3, 0.0);
        let traj = simulate_cone(&s0, &alpha, 0.1, 1.0, 1.0).unwrap();
        assert!(traj.final_state.coeffs().iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn coeff_table_round_trip() {
        let mut rng = CounterRng::new(40);
        for dim in [1usize, 2] {
            let s = ConeState::random_in_cone(dim, 3, 0.5, 0.1, &mut rng);
            let mut buf = Vec::new();
            write_coeff_table(&s, &mut buf).unwrap();
            let back = read_coeff_table(&buf[..]).unwrap();
            assert_eq!(back.dim(), dim);
            assert_eq!(back.k_max(), 3);
            for &l in &s.lattice() {
                assert!((back.get(l) - s.get(l)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hermitian_symmetry_preserved_along_run() {
        let mut rng = CounterRng::new(9);
        let alpha = AlphaSymbol::random(2, 3, 1.0, &mut rng);
        let s0 = ConeState::random_in_cone(2, 3, 0.1, 0.3, &mut rng);
        let traj = simulate_cone(&s0, &alpha, 0.02, 3.0, 1.0).unwrap();
        traj.final_state.check_symmetry().unwrap();
        assert!(traj.final_state.get([0, 0]).im == 0.0);
    }
}
