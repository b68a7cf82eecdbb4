//! Dense Lindblad integration for a few atoms. Test utility only.

use crate::model::{DisorderRealization, InteractionKernel};
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;
type M = DMatrix<C>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSample {
    /// Mean single-atom `⟨σᶻ⟩`.
    pub sz_mean: f64,
    pub rate: f64,
    pub rate_r: f64,
    pub rate_l: f64,
    /// `⟨J_η†J_η'†J_η'J_η⟩` for RR, LL, RL.
    pub g4: [f64; 3],
}

pub struct DenseLindblad {
    pub n: usize,
    gamma: f64,
    heff: M,
    jr: M,
    jl: M,
    sz_total: Vec<f64>,
}

fn lowering(n: usize, j: usize) -> M {
    let d = 1 << n;
    let mut m = M::zeros(d, d);
    for b in 0..d {
        if b & (1 << j) != 0 {
            m[(b ^ (1 << j), b)] = C::new(1.0, 0.0);
        }
    }
    m
}

impl DenseLindblad {
    /// Builds `H_eff = −(iγ/2)Σ_ij K_ij σ_i⁺σ_j⁻ + Σ_j (δω_j/2)σ_j^z` and the two jump operators.
    pub fn new(r: &DisorderRealization, include_hamiltonian: bool) -> Self {
        let n = r.n();
        assert!(n <= 8, "dense oracle is limited to 8 atoms");
        let d = 1 << n;
        let kernel = InteractionKernel::new(r);
        let phase = r.phases();
        let low: Vec<M> = (0..n).map(|j| lowering(n, j)).collect();
        let mut heff = M::zeros(d, d);
        let mut jr = M::zeros(d, d);
        let mut jl = M::zeros(d, d);
        let minus_half_i = C::new(0.0, -r.gamma / 2.0);
        for i in 0..n {
            jr += &low[i] * phase[i].conj();
            jl += &low[i] * phase[i];
            for j in 0..n {
                let k = if i == j {
                    C::new(1.0, 0.0)
                } else if include_hamiltonian {
                    kernel.coefficient(i, j, &r.positions)
                } else {
                    C::new((r.xi[i] - r.xi[j]).cos(), 0.0)
                };
                heff += low[i].adjoint() * &low[j] * (minus_half_i * k);
            }
        }
        let sz_total: Vec<f64> = (0..d).map(|b: usize| 2.0 * b.count_ones() as f64 - n as f64).collect();
        for b in 0..d {
            let mut e = 0.0;
            for j in 0..n {
                e += if b & (1 << j) != 0 { 0.5 } else { -0.5 } * r.delta_omega_j[j];
            }
            heff[(b, b)] += C::new(e, 0.0);
        }
        DenseLindblad { n, gamma: r.gamma, heff, jr, jl, sz_total }
    }

    fn generator(&self, rho: &M) -> M {
        let mi = C::new(0.0, -1.0);
        let a = &self.heff * rho;
        let mut out = (&a - a.adjoint()) * mi;
        let h = self.gamma / 2.0;
        out += &self.jr * rho * self.jr.adjoint() * C::new(h, 0.0);
        out += &self.jl * rho * self.jl.adjoint() * C::new(h, 0.0);
        out
    }

    pub fn observe(&self, rho: &M) -> DenseSample {
        let n = self.n as f64;
        let d = rho.nrows();
        let sz: f64 = (0..d).map(|b| rho[(b, b)].re * self.sz_total[b]).sum();
        let tr = |op: &M| (op * rho).trace().re;
        let nr = tr(&(self.jr.adjoint() * &self.jr));
        let nl = tr(&(self.jl.adjoint() * &self.jl));
        let four = |a: &M, b: &M| {
            let x = b * a;
            tr(&(x.adjoint() * x))
        };
        DenseSample {
            sz_mean: sz / n,
            rate: self.gamma / 2.0 * (nr + nl),
            rate_r: self.gamma / 2.0 * nr,
            rate_l: self.gamma / 2.0 * nl,
            g4: [four(&self.jr, &self.jr), four(&self.jl, &self.jl), four(&self.jr, &self.jl)],
        }
    }

    pub fn excited_state(&self) -> M {
        let d = 1 << self.n;
        let mut rho = M::zeros(d, d);
        rho[(d - 1, d - 1)] = C::new(1.0, 0.0);
        rho
    }

    /// RK4 from the fully excited state, sampled on `grid` (step at most `dt`).
    pub fn evolve_excited(&self, grid: &[f64], dt: f64) -> Vec<DenseSample> {
        let mut rho = self.excited_state();
        let mut t = grid[0];
        let mut out = vec![self.observe(&rho)];
        for &tg in &grid[1..] {
            let steps = ((tg - t) / dt).ceil().max(1.0) as usize;
            let h = (tg - t) / steps as f64;
            let hc = C::new(h, 0.0);
            for _ in 0..steps {
                let k1 = self.generator(&rho);
                let k2 = self.generator(&(&rho + &k1 * (hc * 0.5)));
                let k3 = self.generator(&(&rho + &k2 * (hc * 0.5)));
                let k4 = self.generator(&(&rho + &k3 * hc));
                rho += (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * (hc / 6.0);
            }
            t = tg;
            out.push(self.observe(&rho));
        }
        out
    }
}
