use super::disorder::DisorderRealization;
use num_complex::Complex64;

/// Pair kernel `K_jl = e^{i k0 |z_j − z_l|}` evaluated with prefix sums over the
/// position order. For `z_l < z_j` the factor is `e^{iξ_j} e^{−iξ_l}`, otherwise
/// `e^{−iξ_j} e^{iξ_l}`.
#[derive(Debug, Clone)]
pub struct InteractionKernel {
    order: Vec<usize>,
    phase: Vec<Complex64>,
}

impl InteractionKernel {
    pub fn new(r: &DisorderRealization) -> Self {
        InteractionKernel { order: r.z_order.clone(), phase: r.phases() }
    }

    pub fn n(&self) -> usize {
        self.phase.len()
    }

    /// `kx_j = Σ_{l≠j} K_jl x_l` and `kbx_j = Σ_{l≠j} conj(K_jl) x_l`.
    pub fn apply_both(&self, x: &[Complex64], kx: &mut [Complex64], kbx: &mut [Complex64]) {
        let p = &self.phase;
        let mut am = Complex64::new(0.0, 0.0);
        let mut ap = Complex64::new(0.0, 0.0);
        for &j in &self.order {
            kx[j] = p[j] * am;
            kbx[j] = p[j].conj() * ap;
            am += p[j].conj() * x[j];
            ap += p[j] * x[j];
        }
        let mut bm = Complex64::new(0.0, 0.0);
        let mut bp = Complex64::new(0.0, 0.0);
        for &j in self.order.iter().rev() {
            kx[j] += p[j].conj() * bp;
            kbx[j] += p[j] * bm;
            bm += p[j].conj() * x[j];
            bp += p[j] * x[j];
        }
    }

    pub fn apply_exp(&self, x: &[Complex64], out: &mut [Complex64]) {
        let p = &self.phase;
        let mut a = Complex64::new(0.0, 0.0);
        for &j in &self.order {
            out[j] = p[j] * a;
            a += p[j].conj() * x[j];
        }
        let mut b = Complex64::new(0.0, 0.0);
        for &j in self.order.iter().rev() {
            out[j] += p[j].conj() * b;
            b += p[j] * x[j];
        }
    }

    /// `Σ_{l≠j} sin(k0|z_j − z_l|) x_l`.
    pub fn apply_sin(&self, x: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        self.apply_both(x, out, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = (*o - *s) * Complex64::new(0.0, -0.5);
        }
    }

    /// `Σ_{l≠j} cos(ξ_j − ξ_l) x_l`; no ordering needed.
    pub fn apply_cos(&self, x: &[Complex64], out: &mut [Complex64]) {
        let p = &self.phase;
        let mut sm = Complex64::new(0.0, 0.0);
        let mut sp = Complex64::new(0.0, 0.0);
        for j in 0..x.len() {
            sm += p[j].conj() * x[j];
            sp += p[j] * x[j];
        }
        for j in 0..x.len() {
            out[j] = 0.5 * (p[j] * sm + p[j].conj() * sp) - x[j];
        }
    }

    /// Single entry, for brute-force paths.
    pub fn coefficient(&self, j: usize, l: usize, pos: &[f64]) -> Complex64 {
        let (a, b) = (self.phase[j], self.phase[l]);
        if pos[l] < pos[j] {
            a * b.conj()
        } else if pos[l] > pos[j] {
            a.conj() * b
        } else {
            Complex64::new(1.0, 0.0)
        }
    }
}
