//! Circuit solvers: Newton-Raphson DC operating point with gmin and source
//! stepping, and fixed-grid implicit transient analysis.

mod dc;
mod lu;
mod mna;
mod newton;
mod transient;

pub use dc::{dc_operating_point, DcOptions, Homotopy, OpPoint};
pub use lu::{lu_solve, DenseMatrix, Singular};
pub use mna::{assemble, cap_branches, AssembleCtx, CapBranch, Companion, Mna, Scheme};
pub use transient::{transient, TranOptions, Waveforms};

use thiserror::Error;

/// Node voltages and voltage-source branch currents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SysState {
    pub v: Vec<f64>,
    pub i_branch: Vec<f64>,
}

impl SysState {
    pub fn zeros(n_nodes: usize, n_branches: usize) -> Self {
        SysState {
            v: vec![0.0; n_nodes],
            i_branch: vec![0.0; n_branches],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len() + self.i_branch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Add `dx` to flat unknown `k` (nodes first, then branches).
    pub fn add_to(&mut self, k: usize, dx: f64) {
        let nn = self.v.len();
        if k < nn {
            self.v[k] += dx;
        } else {
            self.i_branch[k - nn] += dx;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().chain(&self.i_branch).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("DC operating point did not converge (gmin and source stepping exhausted); largest residual {residual:.3e} at `{node}`")]
    NoConvergence { node: String, residual: f64 },
    #[error("singular Jacobian at unknown `{unknown}`; check for a floating node")]
    Singular { unknown: String },
    #[error("timestep underflow at t = {time:.6e} s after 8 halvings")]
    StepUnderflow { time: f64 },
    #[error("non-finite solution at t = {time:.6e} s")]
    NonFinite { time: f64 },
    #[error("invalid analysis request: {0}")]
    InvalidRequest(String),
}
