//! Flat `key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Every key must appear in [`KEYS`];
//! anything else is rejected.

use crate::error::ConfigError;
use crate::model::{CavityCount, DisorderKind, Engine, SystemConfig};
use std::f64::consts::PI;
use std::path::PathBuf;

/// `(key, type, meaning)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("n_atoms", "integer", "number of atoms N"),
    ("gamma", "float", "single-atom decay rate"),
    ("theta", "angle", "disorder strength Θ"),
    ("disorder", "uniform|gaussian|lattice", "offset distribution"),
    ("k0d", "angle", "lattice spacing phase (disorder = lattice)"),
    ("delta_omega", "float", "frequency disorder width Δω"),
    ("kappa", "float", "cavity linewidth (default 50γN)"),
    ("coupling_g", "float", "atom-cavity coupling (default sqrt(γκ)/2)"),
    ("include_hamiltonian", "bool", "keep the coherent exchange term"),
    ("cavity_count", "two|one", "two waveguide modes or one homogeneous cavity"),
    ("t_end", "float", "final time (default 5 ln N/(γN))"),
    ("n_samples", "integer", "grid points"),
    ("dt", "float", "integrator step (engine default when absent)"),
    ("n_trajectories", "integer", "ensemble size"),
    ("master_seed", "integer", "root of all random streams"),
    ("frozen_disorder", "bool", "one realization shared by all trajectories"),
    ("engine", "dtwa-full|dtwa-elim|qsdmf|qj", "trajectory engine"),
    ("with_g4", "bool", "record fourth-order moments"),
    ("n_list", "integers", "atom numbers for sweeps"),
    ("theta_list", "angles", "disorder strengths for sweeps"),
    ("kappa_list", "floats", "κ/(γN) values for the non-Markovian sweep"),
    ("delta_omega_list", "floats", "Δω values for sweeps (empty: use delta_omega)"),
    ("realizations", "integer", "realizations per Θ for bounds"),
    ("restarts", "integer", "random restarts of the phase optimizer"),
    ("bins", "integer", "histogram bins per axis"),
    ("pair_budget", "integer", "atom pairs per snapshot in ordering histograms"),
    ("pilot_trajectories", "integer", "trajectories used to locate t★"),
    ("output_dir", "path", "directory for CSV and manifest files"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub engine: Engine,
    pub with_g4: bool,
    pub n_list: Vec<usize>,
    pub theta_list: Vec<f64>,
    pub kappa_list: Vec<f64>,
    pub delta_omega_list: Vec<f64>,
    pub realizations: usize,
    pub restarts: usize,
    pub bins: usize,
    pub pair_budget: usize,
    pub pilot_trajectories: usize,
    pub output_dir: PathBuf,
    /// Keys set explicitly, in order, with their raw values.
    pub echo: Vec<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemConfig::new(100),
            engine: Engine::DtwaEliminated,
            with_g4: false,
            n_list: vec![25, 50, 100, 200, 400],
            theta_list: vec![0.0, PI / 2.0, PI, 2.0 * PI],
            kappa_list: vec![1.0, 2.0, 5.0, 10.0, 50.0],
            delta_omega_list: Vec::new(),
            realizations: 100,
            restarts: 8,
            bins: 64,
            pair_budget: 20_000,
            pilot_trajectories: 100,
            output_dir: PathBuf::from("out"),
            echo: Vec::new(),
        }
    }
}

/// Parses `2`, `-0.5`, `pi`, `2pi`, `pi/2`, `1.5*pi`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim().to_ascii_lowercase();
    if let Some(i) = s.find("pi") {
        let (head, tail) = (s[..i].trim().trim_end_matches('*').trim(), s[i + 2..].trim());
        let mult = if head.is_empty() { 1.0 } else if head == "-" { -1.0 } else { head.parse::<f64>().ok()? };
        let div = if tail.is_empty() { 1.0 } else { tail.strip_prefix('/')?.trim().parse::<f64>().ok()? };
        Some(mult * PI / div)
    } else {
        s.parse().ok()
    }
}

fn parse_err(key: &str, value: &str) -> ConfigError {
    ConfigError::Parse { key: key.to_string(), value: value.to_string() }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| parse_err(key, v))
}

fn angle(key: &str, v: &str) -> Result<f64, ConfigError> {
    parse_angle(v).ok_or_else(|| parse_err(key, v))
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(key, v)),
    }
}

fn list<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| f(key, s)).collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let s = &mut self.system;
        match key {
            "n_atoms" => s.n_atoms = num(key, v)?,
            "gamma" => s.gamma = num(key, v)?,
            "theta" => s.theta = angle(key, v)?,
            "disorder" => {
                s.disorder_kind = match v {
                    "uniform" => DisorderKind::UniformOffset,
                    "gaussian" => DisorderKind::GaussianOffset,
                    "lattice" => DisorderKind::RegularLattice(match s.disorder_kind {
                        DisorderKind::RegularLattice(d) => d,
                        _ => PI / 2.0,
                    }),
                    _ => return Err(parse_err(key, v)),
                }
            }
            "k0d" => s.disorder_kind = DisorderKind::RegularLattice(angle(key, v)?),
            "delta_omega" => s.delta_omega = angle(key, v)?,
            "kappa" => s.kappa = Some(num(key, v)?),
            "coupling_g" => s.coupling_g = Some(num(key, v)?),
            "include_hamiltonian" => s.include_hamiltonian = boolean(key, v)?,
            "cavity_count" => {
                s.cavity_count = match v {
                    "two" | "2" => CavityCount::Two,
                    "one" | "1" => CavityCount::OneHomogeneous,
                    _ => return Err(parse_err(key, v)),
                }
            }
            "t_end" => s.t_end = Some(num(key, v)?),
            "n_samples" => s.n_samples = num(key, v)?,
            "dt" => s.dt = Some(num(key, v)?),
            "n_trajectories" => s.n_trajectories = num(key, v)?,
            "master_seed" => s.master_seed = num(key, v)?,
            "frozen_disorder" => s.frozen_disorder = boolean(key, v)?,
            "engine" => self.engine = Engine::parse(v).ok_or_else(|| parse_err(key, v))?,
            "with_g4" => self.with_g4 = boolean(key, v)?,
            "n_list" => self.n_list = list(key, v, num)?,
            "theta_list" => self.theta_list = list(key, v, angle)?,
            "kappa_list" => self.kappa_list = list(key, v, num)?,
            "delta_omega_list" => self.delta_omega_list = list(key, v, angle)?,
            "realizations" => self.realizations = num(key, v)?,
            "restarts" => self.restarts = num(key, v)?,
            "bins" => self.bins = num(key, v)?,
            "pair_budget" => self.pair_budget = num(key, v)?,
            "pilot_trajectories" => self.pilot_trajectories = num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        self.echo.retain(|(k, _)| k != key);
        self.echo.push((key.to_string(), v.to_string()));
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Other(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system.validate()?;
        if self.n_list.iter().any(|&n| n == 0) {
            return Err(ConfigError::invalid("n_list", "atom numbers must be positive"));
        }
        if self.theta_list.iter().any(|t| !(*t >= 0.0)) {
            return Err(ConfigError::invalid("theta_list", "angles must be nonnegative"));
        }
        if self.kappa_list.iter().any(|k| !(*k > 0.0)) {
            return Err(ConfigError::invalid("kappa_list", "ratios must be positive"));
        }
        if self.delta_omega_list.iter().any(|k| !(*k >= 0.0)) {
            return Err(ConfigError::invalid("delta_omega_list", "widths must be nonnegative"));
        }
        if self.bins < 2 {
            return Err(ConfigError::invalid("bins", "need at least 2"));
        }
        if self.engine == Engine::QuantumJump && self.system.n_atoms > crate::exact::MAX_QJ_ATOMS {
            return Err(ConfigError::invalid("n_atoms", format!("quantum jumps are limited to N ≤ {}", crate::exact::MAX_QJ_ATOMS)));
        }
        Ok(())
    }
}
