//! Exact references: quantum jumps for small disordered arrays, the Dicke ladder for
//! ideal arrays, and the collective spin coupled to one lossy cavity.

pub mod cavity;
pub mod ladder;
#[doc(hidden)]
pub mod oracle;
pub mod quantum_jump;

pub use cavity::{ed_collective_cavity_evolve, CavityEd, CavitySample, MAX_ED_ATOMS};
pub use ladder::{dicke_ladder_rates, dicke_rate_equation_evolve};
pub use quantum_jump::{quantum_jump_run, QjSystem, MAX_QJ_ATOMS};

use crate::observables::{find_peak, EnsembleStatistics, Peak, Series};

/// Wraps a deterministic curve as statistics with zero standard error.
pub(crate) fn deterministic_statistics(grid: &[f64], n_atoms: usize, gamma: f64, r: Vec<f64>, p_e: Vec<f64>) -> EnsembleStatistics {
    let zeros = vec![0.0; grid.len()];
    let peak = find_peak(&r, grid).unwrap_or(Peak { r_star: f64::NAN, t_star: f64::NAN, index: 0, at_boundary: true });
    EnsembleStatistics {
        grid: grid.to_vec(),
        n_atoms,
        gamma,
        r_of_t: Series { mean: r, se: zeros.clone() },
        p_e: Series { mean: p_e, se: zeros },
        r_field: None,
        g2_auto_rr: None,
        g2_auto_ll: None,
        g2_cross_rl: None,
        g2_total: None,
        peak,
        n_effective: 1,
        n_failed: 0,
    }
}
