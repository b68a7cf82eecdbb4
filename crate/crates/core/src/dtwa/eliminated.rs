use super::{rotate, SpinPhaseState};
use crate::error::SimError;
use crate::model::{DisorderRealization, InteractionKernel, SystemConfig};
use crate::stream::complex_normal;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

/// Buffers and constants for the eliminated-mode SDE.
pub struct ElimWorkspace {
    gamma: f64,
    exp_kernel: bool,
    kernel: InteractionKernel,
    phase: Vec<Complex64>,
    delta_omega: Vec<f64>,
    w: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl ElimWorkspace {
    pub fn new(config: &SystemConfig, r: &DisorderRealization, kernel: &InteractionKernel) -> Self {
        let n = r.n();
        ElimWorkspace {
            gamma: config.gamma,
            exp_kernel: config.include_hamiltonian,
            kernel: kernel.clone(),
            phase: r.phases(),
            delta_omega: r.delta_omega_j.clone(),
            w: vec![Complex64::default(); n],
            f: vec![Complex64::default(); n],
        }
    }
}

/// One Euler–Maruyama step of the Itô SDE
///
/// `ds⁻_j = [−(γ/2)s⁻_j + (γ/2)s_j^z Σ_l K_jl s⁻_l]dt + √(γ/2) s_j^z dW_j`,
/// `ds_j^z = [−γ s_j^z − γΣ_l(s⁺_j K_jl s⁻_l + c.c.)]dt − √(2γ)(s⁺_j dW_j + c.c.)`,
///
/// with `K_jj = 1` and `dW_j = (e^{iξ_j}dW_R + e^{−iξ_j}dW_L)/√2`. Without the
/// Hamiltonian `K_jl` is replaced by its real part `cos(ξ_j − ξ_l)`.
pub fn step_eliminated<R: Rng + ?Sized>(
    state: &mut SpinPhaseState,
    ws: &mut ElimWorkspace,
    rng: &mut R,
    dt: f64,
) -> Result<(), SimError> {
    let g = ws.gamma;
    let t = state.t;
    rotate(&state.s_minus, &ws.delta_omega, -t, &mut ws.w);
    if ws.exp_kernel {
        ws.kernel.apply_exp(&ws.w, &mut ws.f);
    } else {
        ws.kernel.apply_cos(&ws.w, &mut ws.f);
    }
    let dw_r = complex_normal(rng, dt / 2.0);
    let dw_l = complex_normal(rng, dt / 2.0);
    let amp_s = (g / 2.0).sqrt();
    let amp_z = (2.0 * g).sqrt();
    let rotating = t != 0.0 && ws.delta_omega.iter().any(|&x| x != 0.0);
    for j in 0..ws.w.len() {
        let s = ws.w[j];
        let z = state.s_z[j];
        let f = (ws.f[j] + s) * (g / 2.0);
        let p = ws.phase[j];
        let dwj = (p * dw_r + p.conj() * dw_l) * FRAC_1_SQRT_2;
        let ds = (-0.5 * g * s + z * f) * dt + amp_s * z * dwj;
        let dz = (-g * z - 4.0 * (s.conj() * f).re) * dt - amp_z * 2.0 * (s.conj() * dwj).re;
        if rotating {
            state.s_minus[j] += ds * Complex64::from_polar(1.0, ws.delta_omega[j] * t);
        } else {
            state.s_minus[j] += ds;
        }
        state.s_z[j] = z + dz;
        if !(state.s_z[j].is_finite() && state.s_minus[j].re.is_finite() && state.s_minus[j].im.is_finite()) {
            return Err(SimError::NonFinite { t, what: format!("spin {j}") });
        }
    }
    state.t = t + dt;
    Ok(())
}
