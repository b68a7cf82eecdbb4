use crate::error::ConfigError;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisorderKind {
    UniformOffset,
    GaussianOffset,
    /// Regular lattice with spacing phase k0·d.
    RegularLattice(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavityCount {
    Two,
    OneHomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    DtwaFull,
    DtwaEliminated,
    Qsdmf,
    QuantumJump,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::DtwaFull => "dtwa-full",
            Engine::DtwaEliminated => "dtwa-elim",
            Engine::Qsdmf => "qsdmf",
            Engine::QuantumJump => "qj",
        }
    }

    pub fn parse(s: &str) -> Option<Engine> {
        match s {
            "dtwa-full" => Some(Engine::DtwaFull),
            "dtwa-elim" | "dtwa" => Some(Engine::DtwaEliminated),
            "qsdmf" => Some(Engine::Qsdmf),
            "qj" => Some(Engine::QuantumJump),
            _ => None,
        }
    }
}

/// Physical and numerical parameters of one experiment.
///
/// `t_end`, `dt` and `kappa` are optional; the accessors fill in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_atoms: usize,
    pub gamma: f64,
    pub theta: f64,
    pub disorder_kind: DisorderKind,
    pub delta_omega: f64,
    pub kappa: Option<f64>,
    pub coupling_g: Option<f64>,
    pub include_hamiltonian: bool,
    pub cavity_count: CavityCount,
    pub t_end: Option<f64>,
    pub n_samples: usize,
    pub dt: Option<f64>,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub frozen_disorder: bool,
}

impl SystemConfig {
    pub fn new(n_atoms: usize) -> Self {
        SystemConfig {
            n_atoms,
            gamma: 1.0,
            theta: 0.0,
            disorder_kind: DisorderKind::UniformOffset,
            delta_omega: 0.0,
            kappa: None,
            coupling_g: None,
            include_hamiltonian: true,
            cavity_count: CavityCount::Two,
            t_end: None,
            n_samples: 2000,
            dt: None,
            n_trajectories: 1000,
            master_seed: 0,
            frozen_disorder: false,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or_else(|| {
            if self.n_atoms >= 2 {
                5.0 * (self.n_atoms as f64).ln() / (self.gamma * self.n_atoms as f64)
            } else {
                5.0 / self.gamma
            }
        })
    }

    /// Defaults to 50γN, deep in the Markovian regime.
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(50.0 * self.gamma * self.n_atoms as f64)
    }

    pub fn coupling_g(&self) -> f64 {
        self.coupling_g.unwrap_or_else(|| (self.gamma * self.kappa()).sqrt() / 2.0)
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_end(), self.n_samples)
    }

    pub fn sample_spacing(&self) -> f64 {
        self.t_end() / (self.n_samples - 1) as f64
    }

    /// Requested step for an engine, before alignment to the sample grid.
    pub fn nominal_dt(&self, engine: Engine) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        let gn = self.gamma * self.n_atoms.max(1) as f64;
        match engine {
            Engine::DtwaEliminated | Engine::Qsdmf => 1e-3 / gn,
            Engine::DtwaFull => (0.1 / self.kappa()).min(5e-3 / gn),
            Engine::QuantumJump => {
                let n = self.n_atoms as f64;
                0.2 / (self.gamma * (n * n / 4.0 + n) / 2.0)
            }
        }
    }

    /// Number of integrator steps between consecutive samples and the resulting step.
    pub fn steps_per_sample(&self, engine: Engine) -> (usize, f64) {
        let h = self.sample_spacing();
        let k = (h / self.nominal_dt(engine) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (k, h / k as f64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_atoms < 1 {
            return Err(ConfigError::invalid("n_atoms", "must be at least 1"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(ConfigError::invalid("gamma", "must be positive"));
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(ConfigError::invalid("theta", "must be nonnegative"));
        }
        if !(self.delta_omega >= 0.0) || !self.delta_omega.is_finite() {
            return Err(ConfigError::invalid("delta_omega", "must be nonnegative"));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) || !k.is_finite() {
                return Err(ConfigError::invalid("kappa", "must be positive"));
            }
        }
        if let Some(g) = self.coupling_g {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(ConfigError::invalid("coupling_g", "must be nonnegative"));
            }
        }
        if self.n_samples < 2 {
            return Err(ConfigError::invalid("n_samples", "must be at least 2"));
        }
        let t_end = self.t_end();
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(ConfigError::invalid("t_end", "must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(ConfigError::invalid("dt", "must be positive"));
            }
            if dt > t_end / self.n_samples as f64 {
                return Err(ConfigError::invalid("dt", format!("{dt} exceeds t_end/n_samples")));
            }
        }
        if self.n_trajectories < 1 {
            return Err(ConfigError::invalid("n_trajectories", "must be at least 1"));
        }
        if self.cavity_count == CavityCount::OneHomogeneous
            && (self.theta != 0.0 || self.delta_omega != 0.0)
        {
            return Err(ConfigError::invalid(
                "cavity_count",
                "the single homogeneous cavity requires theta = 0 and delta_omega = 0",
            ));
        }
        if let DisorderKind::RegularLattice(k0d) = self.disorder_kind {
            if !k0d.is_finite() {
                return Err(ConfigError::invalid("k0d", "must be finite"));
            }
        }
        Ok(())
    }
}

pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let h = t_end / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { t_end } else { k as f64 * h }).collect()
}

/// Reduces an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Reduces an angle to [−π, π).
pub fn wrap_half_open(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI { y - 2.0 * PI } else { y }
}
