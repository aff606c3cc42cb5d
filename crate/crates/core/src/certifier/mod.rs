//! Computer-assisted check that `Q_{alpha,beta} > alpha / beta` away from the
//! triangular lattice, on the compact region below the threshold height.

mod adaptive;
mod grid;
mod lipschitz;
mod sweep;
mod threshold;

use serde::{Deserialize, Serialize};

pub use adaptive::{certify_adaptive, AdaptiveConfig, AdaptiveSummary, CellStatus, CellVerdict, NearA2Summary};
pub use grid::{build_grid, GridSpec};
pub use lipschitz::{
    gradient_enclosure, gradient_norm_bound, local_lipschitz, paper_lipschitz, Cell, LipschitzBound,
    GRADIENT_REL_TOL,
};
pub use sweep::{sweep_paper_mode, REFERENCE_TOL};
pub use threshold::{
    eta_constants, round_up, threshold_y, Etas, ThresholdBranch, ThresholdResult, DEFAULT_DECIMALS,
    THRESHOLD_ZETA_TOL,
};

use crate::energy::ExponentPair;
use crate::error::{Error, Result};
use crate::zeta::CertifiedValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificationMode {
    Paper,
    Adaptive,
}

/// Grid dimensions without the coordinate arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub delta: f64,
    #[serde(rename = "I")]
    pub i_count: usize,
    #[serde(rename = "J")]
    pub j_count: usize,
    pub y1: f64,
    pub y_top: f64,
}

impl From<&GridSpec> for GridSummary {
    fn from(g: &GridSpec) -> Self {
        GridSummary { delta: g.delta, i_count: g.i_count, j_count: g.j_count, y1: g.y1, y_top: g.y_top }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperSweepSummary {
    pub truncation: u32,
    pub m_supplied: f64,
    /// `M delta sqrt(2) / 2`.
    pub lipschitz_margin: f64,
    /// `min (Q.mid - Q.rad) - M delta sqrt(2) / 2`.
    pub min_q_lower_minus_margin: f64,
    /// The global Lipschitz formula evaluated literally at the same truncation.
    pub literal_formula_m: f64,
    pub points_evaluated: usize,
    /// Grid points whose quotient enclosure was refused (denominator not positive).
    pub refused_points: Vec<[f64; 2]>,
}

/// Outcome of a certification run. Contains no timing or host data, so runs
/// with equal inputs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub mode: CertificationMode,
    pub exponents: ExponentPair,
    /// The bound the quotient must strictly exceed, normally `alpha / beta`.
    pub required_margin: f64,
    pub threshold: ThresholdResult,
    pub grid: GridSummary,
    pub verdict: bool,
    /// Smallest quotient enclosure (by lower end) among evaluated points.
    pub min_q: Option<CertifiedValue>,
    pub argmin: Option<[f64; 2]>,
    pub paper: Option<PaperSweepSummary>,
    pub adaptive: Option<AdaptiveSummary>,
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Default worker count: the machine's available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Threshold, grid and paper-mode sweep in one call.
pub fn certify_paper_mode(
    e: &ExponentPair,
    delta: f64,
    m: f64,
    t: crate::zeta::TruncationSpec,
    k: u32,
    workers: usize,
) -> Result<CertificationReport> {
    let threshold = threshold_y(e, k, THRESHOLD_ZETA_TOL)?;
    let grid = build_grid(&threshold, delta)?;
    sweep_paper_mode(e, &threshold, &grid, m, t, workers)
}
