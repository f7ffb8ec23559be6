use serde::{Deserialize, Serialize};

/// Quadrature knobs for the nonlocal modular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    /// Adjacent cell pairs are subdivided into 2^depth sub-cells per side
    /// before the midpoint rule is applied.
    pub subdiv_depth: u32,
    /// Number of geometrically graded GK15 panels for the exterior tails.
    pub tail_panels: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            subdiv_depth: 4,
            tail_panels: 12,
        }
    }
}

/// Trial-step selection for the backtracking line search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepPolicy {
    /// Barzilai–Borwein spectral step as the trial, safeguarded by Armijo.
    Bb,
    /// Previous accepted step times two as the trial.
    Grow,
}

/// Descent and sweep controls shared by every solver in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative Euler–Lagrange residual at which constrained descent stops.
    pub tol: f64,
    /// Dirichlet solves stop at gradient norm `dirichlet_rtol · ‖f‖`.
    pub dirichlet_rtol: f64,
    pub max_iter: usize,
    /// Independent restarts with perturbed initial data; best minimum wins.
    pub restarts: usize,
    pub step_policy: StepPolicy,
    /// Seed for every randomized ingredient (restart perturbations, trials).
    pub seed: u64,
    pub quad: QuadConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            dirichlet_rtol: 1e-8,
            max_iter: 50_000,
            restarts: 3,
            step_policy: StepPolicy::Bb,
            seed: 0,
            quad: QuadConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}
