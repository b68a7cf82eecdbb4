use super::{rotate, SpinPhaseState};
use crate::error::SimError;
use crate::model::{CavityCount, DisorderRealization, InteractionKernel, SystemConfig};
use crate::observables::CollectiveSample;
use crate::stream::complex_normal;
use num_complex::Complex64;
use rand::Rng;

const MAX_HALVINGS: u32 = 6;
const LENGTH_TOL: f64 = 3e-2;

/// Constants and RK4 buffers for the model with explicit damped modes.
pub struct FullWorkspace {
    gamma: f64,
    kappa: f64,
    /// Spin–mode coupling: g/√2 for two modes, g for the single homogeneous mode.
    coef: f64,
    two_modes: bool,
    hamiltonian: bool,
    kernel: InteractionKernel,
    phase: Vec<Complex64>,
    delta_omega: Vec<f64>,
    w: Vec<Complex64>,
    sin_sum: Vec<Complex64>,
    scratch: Vec<Complex64>,
    ku: [Vec<Complex64>; 4],
    kz: [Vec<f64>; 4],
    ka: [[Complex64; 2]; 4],
    tu: Vec<Complex64>,
    tz: Vec<f64>,
}

impl FullWorkspace {
    pub fn new(config: &SystemConfig, r: &DisorderRealization, kernel: &InteractionKernel) -> Self {
        let n = r.n();
        let two_modes = config.cavity_count == CavityCount::Two;
        let g = config.coupling_g();
        let zc = || vec![Complex64::default(); n];
        let zr = || vec![0.0; n];
        FullWorkspace {
            gamma: config.gamma,
            kappa: config.kappa(),
            coef: if two_modes { g / std::f64::consts::SQRT_2 } else { g },
            two_modes,
            hamiltonian: config.include_hamiltonian && r.xi.iter().any(|&x| x != 0.0),
            kernel: kernel.clone(),
            phase: r.phases(),
            delta_omega: r.delta_omega_j.clone(),
            w: zc(),
            sin_sum: zc(),
            scratch: zc(),
            ku: [zc(), zc(), zc(), zc()],
            kz: [zr(), zr(), zr(), zr()],
            ka: [[Complex64::default(); 2]; 4],
            tu: zc(),
            tz: zr(),
        }
    }

    /// `−½ d(Σ s^z)/dt` carried by the mode drive at the current state.
    pub fn field_rate(&self, state: &SpinPhaseState, _phys: &[Complex64], s: &CollectiveSample) -> f64 {
        let a = [state.alpha0[0] + state.alpha1[0], state.alpha0[1] + state.alpha1[1]];
        if self.two_modes {
            2.0 * self.coef * (a[0] * s.j_r.conj() + a[1] * s.j_l.conj()).re
        } else {
            2.0 * self.coef * (a[0] * s.j_r.conj()).re
        }
    }

    /// Drift of `(u, s^z, α⁽¹⁾)` at time `t` with the stochastic part `a0` frozen.
    fn drift(&mut self, t: f64, u: &[Complex64], sz: &[f64], a1: [Complex64; 2], a0: [Complex64; 2], slot: usize) {
        rotate(u, &self.delta_omega, -t, &mut self.w);
        if self.hamiltonian {
            self.kernel.apply_sin(&self.w, &mut self.sin_sum, &mut self.scratch);
        }
        let a = [a0[0] + a1[0], a0[1] + a1[1]];
        let rotating = t != 0.0 && self.delta_omega.iter().any(|&x| x != 0.0);
        let half_gamma_i = Complex64::new(0.0, self.gamma / 2.0);
        let mut jr = Complex64::default();
        let mut jl = Complex64::default();
        for j in 0..self.w.len() {
            let p = self.phase[j];
            let s = self.w[j];
            let drive = if self.two_modes { a[0] * p + a[1] * p.conj() } else { a[0] };
            let mut g = self.coef * drive;
            if self.hamiltonian {
                g += half_gamma_i * self.sin_sum[j];
            }
            let ds = sz[j] * g;
            self.ku[slot][j] = if rotating { ds * Complex64::from_polar(1.0, self.delta_omega[j] * t) } else { ds };
            self.kz[slot][j] = -4.0 * (s.conj() * g).re;
            jr += p.conj() * s;
            jl += p * s;
        }
        let h = -self.kappa / 2.0;
        self.ka[slot] = if self.two_modes {
            [h * a1[0] + self.coef * jr, h * a1[1] + self.coef * jl]
        } else {
            [h * a1[0] + self.coef * jr, Complex64::default()]
        };
    }

    /// Classical RK4 over `[t, t+dt]` with `a0` interpolated linearly from `a_start` to `a_end`.
    fn rk4(&mut self, state: &mut SpinPhaseState, dt: f64, a_start: [Complex64; 2], a_end: [Complex64; 2]) {
        let t = state.t;
        let lerp = |f: f64| [a_start[0] + (a_end[0] - a_start[0]) * f, a_start[1] + (a_end[1] - a_start[1]) * f];
        let n = state.s_z.len();
        let u0 = state.s_minus.clone();
        let z0 = state.s_z.clone();
        let a10 = state.alpha1;
        self.drift(t, &u0, &z0, a10, a_start, 0);
        for (c, h, f) in [(1usize, 0.5, 0.5), (2, 0.5, 0.5), (3, 1.0, 1.0)] {
            let mut tu = std::mem::take(&mut self.tu);
            let mut tz = std::mem::take(&mut self.tz);
            for j in 0..n {
                tu[j] = u0[j] + self.ku[c - 1][j] * (h * dt);
                tz[j] = z0[j] + self.kz[c - 1][j] * (h * dt);
            }
            let ta = [a10[0] + self.ka[c - 1][0] * (h * dt), a10[1] + self.ka[c - 1][1] * (h * dt)];
            self.drift(t + f * dt, &tu, &tz, ta, lerp(f), c);
            self.tu = tu;
            self.tz = tz;
        }
        let w6 = dt / 6.0;
        for j in 0..n {
            state.s_minus[j] = u0[j] + (self.ku[0][j] + 2.0 * self.ku[1][j] + 2.0 * self.ku[2][j] + self.ku[3][j]) * w6;
            state.s_z[j] = z0[j] + (self.kz[0][j] + 2.0 * self.kz[1][j] + 2.0 * self.kz[2][j] + self.kz[3][j]) * w6;
        }
        for m in 0..2 {
            state.alpha1[m] = a10[m] + (self.ka[0][m] + 2.0 * self.ka[1][m] + 2.0 * self.ka[2][m] + self.ka[3][m]) * w6;
        }
        state.t = t + dt;
    }

    fn acceptable(state: &SpinPhaseState) -> bool {
        state.alpha1.iter().all(|a| a.re.is_finite() && a.im.is_finite())
            && (0..state.s_z.len()).all(|j| {
                let l = state.spin_length_sq(j);
                l.is_finite() && (l - 3.0).abs() <= 3.0 * LENGTH_TOL
            })
    }

    /// Deterministic part over `[t, t+dt]`, subdividing when the result is rejected.
    fn advance(
        &mut self,
        state: &mut SpinPhaseState,
        dt: f64,
        a_start: [Complex64; 2],
        a_end: [Complex64; 2],
        depth: u32,
    ) -> Result<(), SimError> {
        let backup = state.clone();
        self.rk4(state, dt, a_start, a_end);
        if Self::acceptable(state) {
            return Ok(());
        }
        if depth >= MAX_HALVINGS {
            return Err(SimError::StepRejected { t: backup.t, retries: depth });
        }
        *state = backup;
        let mid = [(a_start[0] + a_end[0]) * 0.5, (a_start[1] + a_end[1]) * 0.5];
        self.advance(state, dt / 2.0, a_start, mid, depth + 1)?;
        self.advance(state, dt / 2.0, mid, a_end, depth + 1)
    }
}

/// One step of the full model: exact Ornstein–Uhlenbeck update of the
/// stochastic mode part `α⁽⁰⁾`, then RK4 for spins and `α⁽¹⁾`.
pub fn step_full<R: Rng + ?Sized>(
    state: &mut SpinPhaseState,
    ws: &mut FullWorkspace,
    rng: &mut R,
    dt: f64,
) -> Result<(), SimError> {
    let decay = (-ws.kappa * dt / 2.0).exp();
    let var = (1.0 - (-ws.kappa * dt).exp()) / 4.0;
    let a_start = state.alpha0;
    let modes = if ws.two_modes { 2 } else { 1 };
    let mut a_end = [Complex64::default(); 2];
    for m in 0..modes {
        a_end[m] = a_start[m] * decay + complex_normal(rng, var);
    }
    ws.advance(state, dt, a_start, a_end, 0)?;
    state.alpha0 = a_end;
    Ok(())
}
