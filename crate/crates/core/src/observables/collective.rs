//! O(N) collective contractions of a classical spin configuration.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Collective quantities of one trajectory at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CollectiveSample {
    /// `Σ e^{−iξ_j} s_j⁻`
    pub j_r: Complex64,
    /// `Σ e^{iξ_j} s_j⁻`
    pub j_l: Complex64,
    /// `Σ |s_j⁻|²`
    pub diag: f64,
    pub sum_sz: f64,
    /// `(γ/2)⟨J_R†J_R⟩`, diagonal included.
    pub rate_r: f64,
    pub rate_l: f64,
    /// `⟨J_η†J_η'†J_η'J_η⟩` for RR, LL, RL; NaN when not computed.
    pub g4: [f64; 3],
}

impl CollectiveSample {
    pub fn rate(&self) -> f64 {
        self.rate_r + self.rate_l
    }

    /// Pair-only directional rates `(γ/2)(|⟨J_η⟩|² − Σ|s⁻|²)`.
    pub fn pair_rates(&self, gamma: f64) -> (f64, f64) {
        (
            gamma / 2.0 * (self.j_r.norm_sqr() - self.diag),
            gamma / 2.0 * (self.j_l.norm_sqr() - self.diag),
        )
    }
}

/// Computes the collective sample. `phase[j] = e^{iξ_j}`.
pub fn collective_sample(
    phase: &[Complex64],
    s_minus: &[Complex64],
    s_z: &[f64],
    gamma: f64,
    with_g4: bool,
) -> CollectiveSample {
    let mut j_r = Complex64::default();
    let mut j_l = Complex64::default();
    let mut diag = 0.0;
    let mut sum_sz = 0.0;
    for ((p, s), &z) in phase.iter().zip(s_minus).zip(s_z) {
        j_r += p.conj() * s;
        j_l += p * s;
        diag += s.norm_sqr();
        sum_sz += z;
    }
    let occ = (phase.len() as f64 + sum_sz) / 2.0;
    let g4 = if with_g4 { g4_moments(phase, s_minus, s_z) } else { [f64::NAN; 3] };
    CollectiveSample {
        j_r,
        j_l,
        diag,
        sum_sz,
        rate_r: gamma / 2.0 * (j_r.norm_sqr() - diag + occ),
        rate_l: gamma / 2.0 * (j_l.norm_sqr() - diag + occ),
        g4,
    }
}

struct Partition {
    blocks: Vec<u8>,
    mu: f64,
}

fn partitions(k: usize) -> &'static [Partition] {
    static P: OnceLock<Vec<Vec<Partition>>> = OnceLock::new();
    let all = P.get_or_init(|| {
        (0..=4)
            .map(|k| {
                let mut out = Vec::new();
                let mut cur: Vec<u8> = Vec::new();
                build(0, k, &mut cur, &mut out);
                out.into_iter()
                    .map(|blocks: Vec<u8>| {
                        let mu = blocks
                            .iter()
                            .map(|b| {
                                let s = b.count_ones() as i32;
                                let f: f64 = (1..s).map(|x| x as f64).product();
                                if s % 2 == 0 { -f } else { f }
                            })
                            .product();
                        Partition { blocks, mu }
                    })
                    .collect()
            })
            .collect()
    });
    &all[k]
}

fn build(i: usize, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if i == k {
        out.push(cur.clone());
        return;
    }
    for b in 0..cur.len() {
        cur[b] |= 1 << i;
        build(i + 1, k, cur, out);
        cur[b] &= !(1 << i);
    }
    cur.push(1 << i);
    build(i + 1, k, cur, out);
    cur.pop();
}

/// `Σ_{i_1,…,i_k pairwise distinct} Π_m v_m[i_m]` by Möbius inversion over set partitions.
pub fn distinct_sum(v: &[&[Complex64]]) -> Complex64 {
    let k = v.len();
    assert!((1..=4).contains(&k));
    let n = v[0].len();
    let mut subset = [Complex64::default(); 16];
    for i in 0..n {
        for mask in 1usize..(1 << k) {
            let mut p = Complex64::new(1.0, 0.0);
            for (m, vm) in v.iter().enumerate() {
                if mask & (1 << m) != 0 {
                    p *= vm[i];
                }
            }
            subset[mask] += p;
        }
    }
    partitions(k)
        .iter()
        .map(|p| p.mu * p.blocks.iter().map(|&b| subset[b as usize]).product::<Complex64>())
        .sum()
}

/// Fourth-order moments `⟨J_η†J_η'†J_η'J_η⟩` for (η,η') = RR, LL, RL.
///
/// Coincident sites reduce exactly (σ⁺σ⁺ = σ⁻σ⁻ = 0, σ⁺σ⁻ = (1+σᶻ)/2); distinct
/// sites use classical products.
pub fn g4_moments(phase: &[Complex64], s_minus: &[Complex64], s_z: &[f64]) -> [f64; 3] {
    let cr: Vec<Complex64> = phase.iter().map(|p| p.conj()).collect();
    let cl: Vec<Complex64> = phase.to_vec();
    let n: Vec<f64> = s_z.iter().map(|z| (1.0 + z) / 2.0).collect();
    [
        g4_single(&cr, &cr, s_minus, &n),
        g4_single(&cl, &cl, s_minus, &n),
        g4_single(&cr, &cl, s_minus, &n),
    ]
}

/// `Σ c_i* d_j* d_k c_l ⟨σ_i⁺σ_j⁺σ_k⁻σ_l⁻⟩` with `J_η = Σ c σ⁻`, `J_η' = Σ d σ⁻`.
fn g4_single(c: &[Complex64], d: &[Complex64], s: &[Complex64], n: &[f64]) -> f64 {
    let a: Vec<Complex64> = c.iter().zip(s).map(|(x, y)| x * y).collect();
    let b: Vec<Complex64> = d.iter().zip(s).map(|(x, y)| x * y).collect();
    let ac: Vec<Complex64> = a.iter().map(|x| x.conj()).collect();
    let bc: Vec<Complex64> = b.iter().map(|x| x.conj()).collect();
    let u: Vec<Complex64> = c.iter().zip(d).zip(n).map(|((x, y), m)| x.conj() * y * m).collect();
    let uc: Vec<Complex64> = u.iter().map(|x| x.conj()).collect();
    let nn: Vec<Complex64> = n.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let total = distinct_sum(&[&ac, &bc, &b, &a])
        + distinct_sum(&[&u, &bc, &a])
        + distinct_sum(&[&ac, &uc, &b])
        + distinct_sum(&[&nn, &bc, &b])
        + distinct_sum(&[&ac, &nn, &a])
        + distinct_sum(&[&u, &uc])
        + distinct_sum(&[&nn, &nn]);
    total.re
}
