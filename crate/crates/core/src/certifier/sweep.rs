//! Uniform grid sweep with a global Lipschitz constant.

use rayon::prelude::*;

use super::grid::GridSpec;
use super::lipschitz::paper_lipschitz;
use super::threshold::ThresholdResult;
use super::{with_workers, CertificationMode, CertificationReport, GridSummary, PaperSweepSummary};
use crate::energy::{quotient_from_parts, ExponentPair};
use crate::error::{Error, Result};
use crate::lattice::{in_domain, sandwich_terms, DomainPoint};
use crate::zeta::{epstein_at_order, CertifiedValue, TruncationSpec};

/// Tolerance for the triangular reference values used by the sweep.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Evaluates the quotient at every grid point with fixed truncation `t` and
/// checks `min (Q.mid - Q.rad) - M delta sqrt(2)/2 > alpha / beta`.
/// Points where the quotient enclosure is refused are excluded and listed.
pub fn sweep_paper_mode(
    e: &ExponentPair,
    threshold: &ThresholdResult,
    grid: &GridSpec,
    m: f64,
    t: TruncationSpec,
    workers: usize,
) -> Result<CertificationReport> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("Lipschitz constant must be >= 0, got {m}")));
    }
    let ref_a = crate::energy::triangular_zeta(e.alpha, REFERENCE_TOL)?;
    let ref_b = crate::energy::triangular_zeta(e.beta, REFERENCE_TOL)?;
    let coords: Vec<(f64, f64)> = grid.points().collect();

    let values: Vec<Result<CertifiedValue>> = with_workers(workers, || {
        coords
            .par_iter()
            .map(|&(x, y)| {
                let p = DomainPoint::new(x, y)?;
                if in_domain(x, y) {
                    let (lo, mid, hi) = sandwich_terms(&p, 1, 1);
                    debug_assert!(lo <= mid && mid <= hi);
                }
                let za = epstein_at_order(&p, e.alpha, t)?;
                let zb = epstein_at_order(&p, e.beta, t)?;
                quotient_from_parts(&p, &za, &zb, &ref_a, &ref_b)
            })
            .collect()
    })?;

    let mut best: Option<(CertifiedValue, (f64, f64))> = None;
    let mut refused = Vec::new();
    for (&(x, y), v) in coords.iter().zip(values) {
        match v {
            Ok(q) => {
                if best.is_none_or(|(b, _)| q.mid - q.rad < b.mid - b.rad) {
                    best = Some((q, (x, y)));
                }
            }
            Err(Error::NearTriangular { .. }) => refused.push([x, y]),
            Err(other) => return Err(other),
        }
    }
    let (min_q, argmin) = best.ok_or_else(|| Error::InvalidGrid("no grid point was evaluated".into()))?;
    let lipschitz_margin = m * grid.delta * std::f64::consts::SQRT_2 / 2.0;
    let lower = min_q.mid - min_q.rad - lipschitz_margin;
    let literal_m = paper_lipschitz(e, threshold.y_bar, t)?;

    Ok(CertificationReport {
        mode: CertificationMode::Paper,
        exponents: *e,
        required_margin: e.ratio(),
        threshold: threshold.clone(),
        grid: GridSummary::from(grid),
        verdict: lower > e.ratio(),
        min_q: Some(min_q),
        argmin: Some([argmin.0, argmin.1]),
        paper: Some(PaperSweepSummary {
            truncation: t.n,
            m_supplied: m,
            lipschitz_margin,
            min_q_lower_minus_margin: lower,
            literal_formula_m: literal_m,
            points_evaluated: coords.len() - refused.len(),
            refused_points: refused,
        }),
        adaptive: None,
    })
}
