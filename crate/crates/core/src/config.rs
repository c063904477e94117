use serde::{Deserialize, Serialize};

/// Environment variable that overrides [`Config::tol`].
pub const TOL_ENV: &str = "REALFACTOR_TOL";

/// Numerical knobs shared by the true-pair recursion and the factorizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Residual tolerance for true pairs, relative to `(1 + |A|)^2`.
    pub tol: f64,
    /// Pivot threshold for rank decisions, relative to `max(1, |M|_inf)`.
    pub pivot_tol: f64,
    /// Tolerance for invariance and commutation checks on restricted operators.
    pub subspace_tol: f64,
    /// Largest dimension a symmetric lift may produce.
    pub max_lift_dim: usize,
    /// Relative threshold under which a division remainder counts as zero.
    pub tau_rem: f64,
    /// Relative residual accepted for a root found through the eigenvalue path.
    pub tau_root: f64,
    /// A quadratic pair with `beta` at or below this is a repeated real root.
    pub tau_split: f64,
    /// Restarts allowed to the Bairstow oracle.
    pub max_restarts: usize,
    /// Seed for the oracle's restarts and fallback start vectors.
    pub seed: u64,
    /// Record trace events.
    pub trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-8,
            pivot_tol: 1e-9,
            subspace_tol: 1e-6,
            max_lift_dim: 300,
            tau_rem: 1e-8,
            tau_root: 1e-8,
            tau_split: 1e-7,
            max_restarts: 200,
            seed: 0,
            trace: false,
        }
    }
}

impl Config {
    /// Defaults, with `tol` taken from `REALFACTOR_TOL` when it is set and parses.
    pub fn from_env() -> Self {
        let mut cfg = Config::default();
        if let Some(tol) = std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
        {
            cfg.tol = tol;
        }
        cfg
    }
}
