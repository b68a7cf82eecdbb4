use super::config::{wrap_phase, DisorderKind, SystemConfig};
use crate::error::ConfigError;
use crate::stream::normal;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// One draw of propagation phases and frequency offsets.
///
/// Positions are in units of the resonant wavelength, so k0 = 2π and
/// `e^{i k0 z_j} = e^{i xi_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub xi: Vec<f64>,
    pub positions: Vec<f64>,
    pub z_order: Vec<usize>,
    pub delta_omega_j: Vec<f64>,
    pub gamma: f64,
    pub cached_c: Complex64,
    pub cached_gamma_pm: (f64, f64),
}

impl DisorderRealization {
    /// Builds a realization from raw offset phases `k0·δ_j` (not necessarily wrapped).
    pub fn from_offsets(raw: &[f64], delta_omega_j: Vec<f64>, gamma: f64) -> Self {
        let positions: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(j, &x)| (j + 1) as f64 + x / (2.0 * PI))
            .collect();
        let xi = raw.iter().map(|&x| wrap_phase(x)).collect();
        Self::assemble(xi, positions, delta_omega_j, gamma)
    }

    /// Builds a realization from explicit positions (in wavelengths).
    pub fn from_positions(positions: Vec<f64>, delta_omega_j: Vec<f64>, gamma: f64) -> Self {
        let xi = positions.iter().map(|&z| wrap_phase(2.0 * PI * z.fract())).collect();
        Self::assemble(xi, positions, delta_omega_j, gamma)
    }

    fn assemble(xi: Vec<f64>, positions: Vec<f64>, delta_omega_j: Vec<f64>, gamma: f64) -> Self {
        assert_eq!(xi.len(), delta_omega_j.len());
        let mut z_order: Vec<usize> = (0..xi.len()).collect();
        z_order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));
        let n = xi.len() as f64;
        let c = xi.iter().map(|&x| Complex64::from_polar(1.0, -2.0 * x)).sum::<Complex64>() / n;
        let a = c.norm().min(1.0);
        DisorderRealization {
            xi,
            positions,
            z_order,
            delta_omega_j,
            gamma,
            cached_c: c,
            cached_gamma_pm: (gamma * n * (1.0 + a) / 2.0, gamma * n * (1.0 - a) / 2.0),
        }
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn has_frequency_disorder(&self) -> bool {
        self.delta_omega_j.iter().any(|&w| w != 0.0)
    }

    /// `e^{i xi_j}` for every atom.
    pub fn phases(&self) -> Vec<Complex64> {
        self.xi.iter().map(|&x| Complex64::from_polar(1.0, x)).collect()
    }
}

pub fn sample_uniform_disorder<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> DisorderRealization {
    let n = config.n_atoms;
    let th = config.theta;
    let raw: Vec<f64> = (0..n)
        .map(|_| if th == 0.0 { 0.0 } else { th * (rng.gen::<f64>() - 0.5) })
        .collect();
    let dw = sample_frequency_offsets(config, rng);
    DisorderRealization::from_offsets(&raw, dw, config.gamma)
}

pub fn sample_gaussian_disorder<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> DisorderRealization {
    let n = config.n_atoms;
    let sd = config.theta / 2.0;
    let raw: Vec<f64> = (0..n)
        .map(|_| if sd == 0.0 { 0.0 } else { sd * normal(rng) })
        .collect();
    let dw = sample_frequency_offsets(config, rng);
    DisorderRealization::from_offsets(&raw, dw, config.gamma)
}

/// Deterministic lattice `z_j = j·d` with `k0·d = k0d`; no stream is consumed.
pub fn regular_lattice(config: &SystemConfig, k0d: f64) -> DisorderRealization {
    let n = config.n_atoms;
    let d = k0d / (2.0 * PI);
    let positions: Vec<f64> = (1..=n).map(|j| j as f64 * d).collect();
    let xi = (1..=n).map(|j| wrap_phase(j as f64 * k0d)).collect();
    DisorderRealization::assemble(xi, positions, vec![0.0; n], config.gamma)
}

pub fn sample_frequency_offsets<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<f64> {
    let sd = config.delta_omega / 2.0;
    if sd == 0.0 {
        return vec![0.0; config.n_atoms];
    }
    (0..config.n_atoms).map(|_| sd * normal(rng)).collect()
}

/// Draws a realization according to `config.disorder_kind`.
pub fn sample_realization<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> DisorderRealization {
    match config.disorder_kind {
        DisorderKind::UniformOffset => sample_uniform_disorder(config, rng),
        DisorderKind::GaussianOffset => sample_gaussian_disorder(config, rng),
        DisorderKind::RegularLattice(k0d) => {
            let mut r = regular_lattice(config, k0d);
            r.delta_omega_j = sample_frequency_offsets(config, rng);
            r
        }
    }
}

pub fn overlap_c(realization: &DisorderRealization) -> Complex64 {
    realization.cached_c
}

pub fn channel_rates(realization: &DisorderRealization) -> (f64, f64) {
    realization.cached_gamma_pm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderMoments {
    pub mu_a: f64,
    pub var_a: f64,
    pub mu_b: f64,
    pub var_b: f64,
}

/// Means and variances of cos 2ξ and sin 2ξ.
pub fn disorder_moments(theta: f64, kind: DisorderKind) -> Result<DisorderMoments, ConfigError> {
    match kind {
        DisorderKind::UniformOffset => {
            if theta == 0.0 {
                return Ok(DisorderMoments { mu_a: 1.0, var_a: 0.0, mu_b: 0.0, var_b: 0.0 });
            }
            if theta < 1e-4 {
                // leading terms of the series; the closed forms cancel catastrophically here
                return Ok(DisorderMoments {
                    mu_a: theta.sin() / theta,
                    var_a: theta.powi(4) / 45.0,
                    mu_b: 0.0,
                    var_b: theta * theta / 3.0,
                });
            }
            let t2 = theta * theta;
            let (s, c) = theta.sin_cos();
            Ok(DisorderMoments {
                mu_a: s / theta,
                var_a: (t2 + (2.0 * theta).cos() + theta * c * s - 1.0) / (2.0 * t2),
                mu_b: 0.0,
                var_b: (theta - c * s) / (2.0 * theta),
            })
        }
        DisorderKind::GaussianOffset => {
            let e1 = (-theta * theta).exp();
            Ok(DisorderMoments {
                mu_a: (-theta * theta / 2.0).exp(),
                var_a: (1.0 - 2.0 * e1 + e1 * e1) / 2.0,
                mu_b: 0.0,
                var_b: (1.0 - e1 * e1) / 2.0,
            })
        }
        DisorderKind::RegularLattice(_) => {
            Err(ConfigError::invalid("disorder_kind", "moments are defined for random offsets only"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::seed_stream;
    use proptest::prelude::*;

    fn cfg(n: usize, theta: f64) -> SystemConfig {
        SystemConfig::new(n).with_theta(theta)
    }

    fn mean_se(v: &[f64]) -> (f64, f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt(), var)
    }

    #[test]
    fn zero_width_gives_dicke_point() {
        let r = sample_uniform_disorder(&cfg(7, 0.0), &mut seed_stream(1, 0));
        assert!(r.xi.iter().all(|&x| x == 0.0));
        assert!((overlap_c(&r) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let r = sample_gaussian_disorder(&cfg(7, 0.0), &mut seed_stream(1, 0));
        assert!(r.xi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_two_pi_mean_cos() {
        let r = sample_uniform_disorder(&cfg(100_000, 2.0 * PI), &mut seed_stream(2, 0));
        let v: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).cos()).collect();
        let (m, se, _) = mean_se(&v);
        assert!(m.abs() < 3.0 * se, "{m} {se}");
    }

    #[test]
    fn uniform_pi_variance_half() {
        let r = sample_uniform_disorder(&cfg(100_000, PI), &mut seed_stream(3, 0));
        let v: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).cos()).collect();
        let (_, _, var) = mean_se(&v);
        assert!((var - 0.5).abs() < 0.005, "{var}");
        assert!(r.xi.iter().all(|&x| x >= -PI / 2.0 && x < PI / 2.0));
    }

    #[test]
    fn gaussian_means() {
        for (theta, target) in [(PI, (-PI * PI / 2.0).exp()), (PI / 2.0, (-PI * PI / 8.0).exp())] {
            let r = sample_gaussian_disorder(&cfg(100_000, theta), &mut seed_stream(4, 0));
            let v: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).cos()).collect();
            let (m, se, _) = mean_se(&v);
            assert!((m - target).abs() < 3.0 * se, "{theta}: {m} vs {target}");
        }
        assert!(((-PI * PI / 8.0).exp() - 0.291).abs() < 1e-3);
    }

    #[test]
    fn lattice_examples() {
        let c = SystemConfig::new(4);
        let r = regular_lattice(&c, 2.0 * PI);
        assert!(r.xi.iter().all(|x| x.abs() < 1e-12));
        let r = regular_lattice(&c, PI);
        let expect = [PI, 0.0, PI, 0.0];
        for (a, b) in r.xi.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{:?}", r.xi);
        }
        assert!((overlap_c(&r) - 1.0).norm() < 1e-12);
        let r = regular_lattice(&c, PI / 2.0);
        assert!(overlap_c(&r).norm() < 1e-12);
    }

    #[test]
    fn frequency_offsets() {
        let mut c = SystemConfig::new(100_000);
        assert!(sample_frequency_offsets(&c, &mut seed_stream(5, 0)).iter().all(|&w| w == 0.0));
        c.delta_omega = 2.0;
        let w = sample_frequency_offsets(&c, &mut seed_stream(5, 0));
        let (_, _, var) = mean_se(&w);
        assert!((var.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn overlap_examples() {
        let r = DisorderRealization::from_offsets(&[0.0, PI / 2.0], vec![0.0; 2], 1.0);
        assert!(overlap_c(&r).norm() < 1e-15);
        let r = DisorderRealization::from_offsets(&[0.0; 10], vec![0.0; 10], 1.0);
        assert_eq!(channel_rates(&r), (10.0, 0.0));
    }

    #[test]
    fn channel_rates_degenerate() {
        let r = regular_lattice(&SystemConfig::new(10), PI / 2.0);
        let (p, m) = channel_rates(&r);
        assert!((p - 5.0).abs() < 1e-12 && (m - 5.0).abs() < 1e-12);
    }

    #[test]
    fn moments_closed_forms() {
        let m = disorder_moments(0.0, DisorderKind::UniformOffset).unwrap();
        assert_eq!((m.mu_a, m.var_a, m.mu_b, m.var_b), (1.0, 0.0, 0.0, 0.0));
        let m = disorder_moments(1e-7, DisorderKind::UniformOffset).unwrap();
        assert!((m.mu_a - 1.0).abs() < 1e-12 && m.var_a < 1e-20 && m.var_b < 1e-13);
        let m = disorder_moments(PI, DisorderKind::UniformOffset).unwrap();
        assert!(m.mu_a.abs() < 1e-15 && (m.var_a - 0.5).abs() < 1e-15 && (m.var_b - 0.5).abs() < 1e-15);
        assert!(disorder_moments(1.0, DisorderKind::RegularLattice(1.0)).is_err());
    }

    #[test]
    fn moments_series_matches_closed_form_crossover() {
        let a = disorder_moments(1.0001e-4, DisorderKind::UniformOffset).unwrap();
        let b = disorder_moments(0.9999e-4, DisorderKind::UniformOffset).unwrap();
        assert!((a.var_b - b.var_b).abs() / a.var_b < 1e-3);
    }

    #[test]
    fn moments_monte_carlo_two_pi() {
        let theta = 2.0 * PI;
        let r = sample_uniform_disorder(&cfg(1_000_000, theta), &mut seed_stream(6, 0));
        let a: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).cos()).collect();
        let b: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).sin()).collect();
        let m = disorder_moments(theta, DisorderKind::UniformOffset).unwrap();
        let (ma, sea, va) = mean_se(&a);
        let (mb, seb, vb) = mean_se(&b);
        assert!((ma - m.mu_a).abs() < 3.0 * sea);
        assert!((mb - m.mu_b).abs() < 3.0 * seb);
        // SE of a sample variance of bounded variables is below sqrt(1/n)
        assert!((va - m.var_a).abs() < 3e-3);
        assert!((vb - m.var_b).abs() < 3e-3);
    }

    #[test]
    fn gaussian_moments_monte_carlo() {
        let theta = 1.3;
        let r = sample_gaussian_disorder(&cfg(400_000, theta), &mut seed_stream(7, 0));
        let a: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).cos()).collect();
        let b: Vec<f64> = r.xi.iter().map(|x| (2.0 * x).sin()).collect();
        let m = disorder_moments(theta, DisorderKind::GaussianOffset).unwrap();
        let (ma, sea, va) = mean_se(&a);
        let (_, _, vb) = mean_se(&b);
        assert!((ma - m.mu_a).abs() < 3.0 * sea);
        assert!((va - m.var_a).abs() < 5e-3);
        assert!((vb - m.var_b).abs() < 5e-3);
    }

    proptest! {
        #[test]
        fn rates_invariants(n in 1usize..60, theta in 0.0f64..7.0, seed in any::<u64>()) {
            let r = sample_uniform_disorder(&cfg(n, theta), &mut seed_stream(seed, 0));
            let (p, m) = channel_rates(&r);
            prop_assert!(overlap_c(&r).norm() <= 1.0 + 1e-12);
            prop_assert!(p >= 0.0 && m >= 0.0);
            prop_assert!(((p + m) - n as f64).abs() <= 1e-12 * n as f64);
            prop_assert!(r.xi.iter().all(|&x| x > -PI && x <= PI));
        }

        #[test]
        fn sampling_is_pure(seed in any::<u64>(), idx in any::<u64>()) {
            let c = cfg(20, 2.0);
            let a = sample_uniform_disorder(&c, &mut seed_stream(seed, idx));
            let b = sample_uniform_disorder(&c, &mut seed_stream(seed, idx));
            prop_assert_eq!(a, b);
        }
    }
}
