//! Rate equation on the symmetric Dicke ladder of an ideal array.

use super::deterministic_statistics;
use crate::observables::{find_peak, EnsembleStatistics};

/// `Γ_m = γ(J+m)(J−m+1)` for `m = J, J−1, …, −J+1`, indexed by excitation number
/// `k = J+m` from `N` down to 1.
pub fn dicke_ladder_rates(n: usize, gamma: f64) -> Vec<f64> {
    (1..=n).rev().map(|k| gamma * k as f64 * (n - k + 1) as f64).collect()
}

/// Populations `p[k]` over excitation number, advanced by RK4 with step `h`.
fn integrate(rates: &[f64], grid: &[f64], h_max: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = rates.len();
    // gamma_k: rate out of k excitations, k = 1..=n
    let mut out_rate = vec![0.0; n + 1];
    for (i, &g) in rates.iter().enumerate() {
        out_rate[n - i] = g;
    }
    let deriv = |p: &[f64], d: &mut [f64]| {
        for k in 0..=n {
            let gain = if k < n { out_rate[k + 1] * p[k + 1] } else { 0.0 };
            d[k] = gain - out_rate[k] * p[k];
        }
    };
    let mut p = vec![0.0; n + 1];
    p[n] = 1.0;
    let observe = |p: &[f64]| {
        let r: f64 = p.iter().zip(&out_rate).map(|(a, b)| a * b).sum();
        let e: f64 = p.iter().enumerate().map(|(k, a)| k as f64 * a).sum::<f64>() / n as f64;
        (r, e)
    };
    let (mut rs, mut es) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    let (r0, e0) = observe(&p);
    rs.push(r0);
    es.push(e0);
    let mut k = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
    let mut tmp = vec![0.0; n + 1];
    for w in grid.windows(2) {
        let steps = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / steps as f64;
        for _ in 0..steps {
            deriv(&p, &mut k[0]);
            for (stage, frac) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
                for i in 0..=n {
                    tmp[i] = p[i] + frac * h * k[stage - 1][i];
                }
                deriv(&tmp, &mut k[stage]);
            }
            for i in 0..=n {
                p[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
        }
        let (r, e) = observe(&p);
        rs.push(r);
        es.push(e);
    }
    (rs, es, p)
}

/// Ideal-array decay from the fully excited state. The step is halved until the
/// peak rate moves by less than 1e-4 relative.
pub fn dicke_rate_equation_evolve(n: usize, gamma: f64, grid: &[f64]) -> EnsembleStatistics {
    let rates = dicke_ladder_rates(n, gamma);
    let max_rate = rates.iter().cloned().fold(0.0, f64::max);
    let mut h = 0.05 / max_rate;
    let (mut r, mut e, _) = integrate(&rates, grid, h);
    let peak_of = |r: &[f64]| find_peak(r, grid).map(|p| p.r_star).unwrap_or_else(|_| r.iter().cloned().fold(0.0, f64::max));
    for _ in 0..20 {
        h /= 2.0;
        let (r2, e2, _) = integrate(&rates, grid, h);
        let (a, b) = (peak_of(&r), peak_of(&r2));
        r = r2;
        e = e2;
        if (a - b).abs() <= 1e-4 * b.abs() {
            break;
        }
    }
    deterministic_statistics(grid, n, gamma, r, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::uniform_grid;

    #[test]
    fn rates_small_cases() {
        assert_eq!(dicke_ladder_rates(1, 1.0), vec![1.0]);
        assert_eq!(dicke_ladder_rates(2, 1.0), vec![2.0, 2.0]);
        let r = dicke_ladder_rates(100, 1.0);
        assert_eq!(r.iter().cloned().fold(0.0, f64::max), 2550.0);
    }

    #[test]
    fn single_atom_is_exponential() {
        let g = uniform_grid(5.0, 51);
        let s = dicke_rate_equation_evolve(1, 1.0, &g);
        for (k, t) in g.iter().enumerate() {
            assert!((s.r_of_t.mean[k] - (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn two_atoms_closed_form() {
        // p2 = e^{−2t}, p1 = 2t e^{−2t}, R = 2p2 + 2p1
        let g = uniform_grid(3.0, 31);
        let s = dicke_rate_equation_evolve(2, 1.0, &g);
        for (k, &t) in g.iter().enumerate() {
            let want = 2.0 * (-2.0 * t).exp() * (1.0 + 2.0 * t);
            assert!((s.r_of_t.mean[k] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn hundred_atom_burst() {
        let n = 100;
        let g = uniform_grid(5.0 * (n as f64).ln() / n as f64, 2001);
        let s = dicke_rate_equation_evolve(n, 1.0, &g);
        let scaled = s.r_star() / (n * n) as f64;
        assert!((0.18..=0.20).contains(&scaled), "{scaled}");
        let ratio = s.t_star() / ((n as f64).ln() / n as f64);
        assert!((1.0 / 1.5..=1.5).contains(&ratio), "{ratio}");
        assert!(s.r_of_t.mean.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn populations_conserved_and_nonnegative() {
        let g = uniform_grid(0.2, 5);
        let (r, _, p) = integrate(&dicke_ladder_rates(40, 1.0), &g, 1e-4);
        assert!(r.iter().all(|&x| x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!(p.iter().all(|&x| x > -1e-12));
    }
}
