//! Sound cell-by-cell certification with local Lipschitz bounds and quadtree refinement.
//!
//! Cells of side `delta` are centred on the grid points, so together they cover
//! `[-delta/2, 1/2 + delta/2] x [y1 - delta/2, y_top + delta/2]`. A cell is certified
//! when `Q(centre).lo - L r > margin`, where `L` bounds `||grad Q||` on the cell and
//! `r` is its half-diagonal; otherwise it is split into four. Cells meeting the
//! `epsilon`-ball around the triangular lattice are not evaluated: they are
//! refined until they lie inside the ball (or the depth limit is hit) and then
//! covered by a dense sample of `Q` around the triangular lattice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::build_grid;
use super::lipschitz::{lipschitz_from_center, Cell, CellGradients};
use super::threshold::{threshold_y, THRESHOLD_ZETA_TOL};
use super::{with_workers, CertificationMode, CertificationReport, GridSummary};
use crate::energy::{quotient_from_parts, triangular_zeta, ExponentPair};
use crate::error::{Error, Result};
use crate::lattice::{DomainPoint, SQRT3_2};
use crate::zeta::{attainable_tol, epstein_certified, epstein_certified_with_terms, CertifiedValue};

const A2: (f64, f64) = (0.5, SQRT3_2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Side of the initial cells.
    pub delta: f64,
    pub max_depth: u32,
    /// Radius of the ball around the triangular lattice handled by sampling.
    pub epsilon: f64,
    /// Finest absolute tolerance per zeta value, floored at a relative
    /// `1e-12` of the value itself.
    pub zeta_tol: f64,
    /// First tolerance tried on each cell; the finer one is used only when it can change the outcome.
    pub coarse_tol: f64,
    /// Decimals for rounding the threshold height.
    pub k: u32,
    /// Replaces `alpha / beta` as the bound to exceed.
    pub required_margin: Option<f64>,
    pub fallback_samples: usize,
    /// Emit every cell verdict in the report.
    pub include_cells: bool,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            delta: 0.01,
            max_depth: 8,
            epsilon: 0.01,
            zeta_tol: 1e-8,
            coarse_tol: 1e-4,
            k: 2,
            required_margin: None,
            fallback_samples: 10_000,
            include_cells: false,
            workers: super::default_workers(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    #[serde(rename = "certified")]
    Certified,
    #[serde(rename = "subdivided")]
    Subdivided,
    #[serde(rename = "near-A2-fallback")]
    NearA2Fallback,
    #[serde(rename = "failed")]
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVerdict {
    pub center: [f64; 2],
    pub side: f64,
    pub depth: u32,
    /// Half-diagonal of the cell.
    pub radius: f64,
    pub q: Option<CertifiedValue>,
    pub lipschitz: Option<f64>,
    /// `q.lo - lipschitz * radius - required_margin`; certified cells have it positive.
    pub margin: Option<f64>,
    pub zeta_tol: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearA2Summary {
    pub epsilon: f64,
    pub fallback_cells: usize,
    pub samples_checked: usize,
    pub sample_min_radius: f64,
    pub sample_max_radius: f64,
    pub min_sample_q: Option<CertifiedValue>,
    pub min_sample_point: Option<[f64; 2]>,
    pub all_samples_pass: bool,
    pub failing_samples: Vec<[f64; 2]>,
    /// The cells inside the ball are covered by the strict local minimality of the
    /// triangular lattice together with the samples, not by a Lipschitz certificate.
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSummary {
    pub config: AdaptiveConfig,
    pub cells_evaluated: usize,
    pub cells_certified: usize,
    pub cells_subdivided: usize,
    pub cells_fallback: usize,
    pub cells_failed: usize,
    pub max_depth_reached: u32,
    pub min_certified_margin: Option<f64>,
    pub max_lipschitz: Option<f64>,
    pub zeta_terms: u64,
    pub near_a2: NearA2Summary,
    pub failures: Vec<CellVerdict>,
    pub cells: Option<Vec<CellVerdict>>,
}

struct Context<'a> {
    e: &'a ExponentPair,
    required: f64,
    tiers: Vec<f64>,
}

enum Outcome {
    Certified,
    Open,
    /// `Q(centre) <= required`: refinement cannot help.
    Counterexample,
}

struct Evaluation {
    verdict: CellVerdict,
    outcome: Outcome,
    terms: u64,
}

fn evaluate(cell: &Cell, depth: u32, ctx: &Context) -> Result<Evaluation> {
    let (cx, cy) = cell.center();
    let p = DomainPoint::new(cx, cy)?;
    let r = cell.radius();
    let mut verdict = CellVerdict {
        center: [cx, cy],
        side: cell.x1 - cell.x0,
        depth,
        radius: r,
        q: None,
        lipschitz: None,
        margin: None,
        zeta_tol: None,
        status: CellStatus::Failed,
    };
    let mut terms = 0;
    let mut gradients: Option<CellGradients> = None;
    for (i, &tol) in ctx.tiers.iter().enumerate() {
        let last = i + 1 == ctx.tiers.len();
        let (za, na) = epstein_certified_with_terms(&p, ctx.e.alpha, attainable_tol(&p, ctx.e.alpha, tol))?;
        let (zb, nb) = epstein_certified_with_terms(&p, ctx.e.beta, attainable_tol(&p, ctx.e.beta, tol))?;
        terms += na + nb;
        let ra = triangular_zeta(ctx.e.alpha, tol)?;
        let rb = triangular_zeta(ctx.e.beta, tol)?;
        verdict.zeta_tol = Some(tol);
        let q = match quotient_from_parts(&p, &za, &zb, &ra, &rb) {
            Ok(q) => q,
            Err(Error::NearTriangular { .. }) => continue,
            Err(e) => return Err(e),
        };
        verdict.q = Some(q);
        if q.hi() <= ctx.required {
            return Ok(Evaluation { verdict, outcome: Outcome::Counterexample, terms });
        }
        let g = match gradients {
            Some(g) => g,
            None => *gradients.insert(CellGradients::new(cell, ctx.e, za.mid, zb.mid)?),
        };
        let d_alpha = za.interval() - ra.interval();
        let d_beta = zb.interval() - rb.interval();
        let lip = match lipschitz_from_center(cell, d_alpha, d_beta, g) {
            Ok(l) => l,
            Err(Error::NearTriangular { .. }) => continue,
            Err(e) => return Err(e),
        };
        let margin = q.lo() - lip.bound * r * (1.0 + 4.0 * f64::EPSILON) - ctx.required;
        verdict.lipschitz = Some(lip.bound);
        verdict.margin = Some(margin);
        if margin > 0.0 {
            verdict.status = CellStatus::Certified;
            return Ok(Evaluation { verdict, outcome: Outcome::Certified, terms });
        }
        // a finer tolerance can only recover about the width of the enclosure
        if last || -margin > 4.0 * q.rad {
            break;
        }
    }
    Ok(Evaluation { verdict, outcome: Outcome::Open, terms })
}

fn fallback_verdict(cell: &Cell, depth: u32) -> CellVerdict {
    let (cx, cy) = cell.center();
    CellVerdict {
        center: [cx, cy],
        side: cell.x1 - cell.x0,
        depth,
        radius: cell.radius(),
        q: None,
        lipschitz: None,
        margin: None,
        zeta_tol: None,
        status: CellStatus::NearA2Fallback,
    }
}

fn subdivided_without_evaluation(cell: &Cell, depth: u32) -> CellVerdict {
    CellVerdict { status: CellStatus::Subdivided, ..fallback_verdict(cell, depth) }
}

/// Certifies `Q_{alpha,beta} > alpha / beta` on the compact region below the threshold.
pub fn certify_adaptive(e: &ExponentPair, config: &AdaptiveConfig) -> Result<CertificationReport> {
    if !(config.epsilon > 0.0) || !(config.zeta_tol > 0.0) || !(config.coarse_tol > 0.0) {
        return Err(Error::InvalidParameter("epsilon and tolerances must be positive".into()));
    }
    let threshold = threshold_y(e, config.k, THRESHOLD_ZETA_TOL)?;
    let grid = build_grid(&threshold, config.delta)?;
    let required = config.required_margin.unwrap_or_else(|| e.ratio());
    let mut tiers = vec![config.coarse_tol.max(config.zeta_tol)];
    if config.zeta_tol < tiers[0] {
        tiers.push(config.zeta_tol);
    }
    let ctx = Context { e, required, tiers };

    // extra bottom row when the first grid row leaves sqrt(3)/2 uncovered
    let mut ys = grid.ys.clone();
    if grid.y1 - 0.5 * grid.delta > SQRT3_2 {
        ys.insert(0, grid.y1 - grid.delta);
    }
    let mut level: Vec<Cell> = ys
        .iter()
        .flat_map(|&y| grid.xs.iter().map(move |&x| Cell::centered(x, y, grid.delta)))
        .collect();

    let mut all = Vec::new();
    let mut fallback_cells = Vec::new();
    let mut failures = Vec::new();
    let mut evaluated = 0usize;
    let mut terms = 0u64;
    let mut max_depth_reached = 0;

    for depth in 0..=config.max_depth {
        if level.is_empty() {
            break;
        }
        max_depth_reached = depth;
        let near: Vec<bool> = level
            .iter()
            .map(|c| c.distance_to(A2.0, A2.1) <= config.epsilon)
            .collect();
        let evaluations: Vec<Option<Result<Evaluation>>> = with_workers(config.workers, || {
            level
                .par_iter()
                .zip(near.par_iter())
                .map(|(cell, &is_near)| (!is_near).then(|| evaluate(cell, depth, &ctx)))
                .collect()
        })?;

        let mut next = Vec::new();
        for ((cell, is_near), ev) in level.iter().zip(near).zip(evaluations) {
            if is_near {
                let inside = cell.max_distance_to(A2.0, A2.1) <= config.epsilon;
                if inside || depth == config.max_depth {
                    fallback_cells.push(*cell);
                    all.push(fallback_verdict(cell, depth));
                } else {
                    next.extend(cell.split());
                    all.push(subdivided_without_evaluation(cell, depth));
                }
                continue;
            }
            let ev = ev.expect("evaluated")?;
            evaluated += 1;
            terms += ev.terms;
            let mut v = ev.verdict;
            match ev.outcome {
                Outcome::Certified => {}
                Outcome::Open if depth < config.max_depth => {
                    v.status = CellStatus::Subdivided;
                    next.extend(cell.split());
                }
                Outcome::Open | Outcome::Counterexample => {
                    v.status = CellStatus::Failed;
                    failures.push(v.clone());
                }
            }
            all.push(v);
        }
        level = next;
    }

    let near_a2 = sample_near_a2(e, config, required, &fallback_cells)?;

    let count = |s: CellStatus| all.iter().filter(|v| v.status == s).count();
    let certified: Vec<&CellVerdict> = all.iter().filter(|v| v.status == CellStatus::Certified).collect();
    let min_certified_margin = certified.iter().filter_map(|v| v.margin).reduce(f64::min);
    let max_lipschitz = certified.iter().filter_map(|v| v.lipschitz).reduce(f64::max);
    let mut best: Option<&CellVerdict> = None;
    for v in &all {
        if let Some(q) = v.q {
            if best.is_none_or(|b| q.lo() < b.q.expect("has q").lo()) {
                best = Some(v);
            }
        }
    }

    let verdict = failures.is_empty() && near_a2.all_samples_pass;
    let summary = AdaptiveSummary {
        config: config.clone(),
        cells_evaluated: evaluated,
        cells_certified: count(CellStatus::Certified),
        cells_subdivided: count(CellStatus::Subdivided),
        cells_fallback: count(CellStatus::NearA2Fallback),
        cells_failed: count(CellStatus::Failed),
        max_depth_reached,
        min_certified_margin,
        max_lipschitz,
        zeta_terms: terms,
        near_a2,
        failures,
        cells: config.include_cells.then_some(all.clone()),
    };
    Ok(CertificationReport {
        mode: CertificationMode::Adaptive,
        exponents: *e,
        required_margin: required,
        threshold,
        grid: GridSummary::from(&grid),
        verdict,
        min_q: best.and_then(|v| v.q),
        argmin: best.map(|v| v.center),
        paper: None,
        adaptive: Some(summary),
    })
}

/// Polar sample around the triangular lattice, kept where it falls in a fallback cell.
fn sample_near_a2(
    e: &ExponentPair,
    config: &AdaptiveConfig,
    required: f64,
    cells: &[Cell],
) -> Result<NearA2Summary> {
    let min_radius = config.epsilon / 10.0;
    let max_radius = cells
        .iter()
        .map(|c| c.max_distance_to(A2.0, A2.1))
        .fold(config.epsilon, f64::max);
    let mut summary = NearA2Summary {
        epsilon: config.epsilon,
        fallback_cells: cells.len(),
        samples_checked: 0,
        sample_min_radius: min_radius,
        sample_max_radius: max_radius,
        min_sample_q: None,
        min_sample_point: None,
        all_samples_pass: true,
        failing_samples: Vec::new(),
        justification: "strict local minimum of the triangular lattice plus dense sampling".into(),
    };
    if cells.is_empty() || config.fallback_samples == 0 {
        return Ok(summary);
    }
    let n_r = (config.fallback_samples as f64).sqrt().ceil() as usize;
    let n_t = config.fallback_samples.div_ceil(n_r);
    let mut points = Vec::new();
    for i in 0..n_r {
        let rho = min_radius + (max_radius - min_radius) * (i as f64 + 0.5) / n_r as f64;
        for j in 0..n_t {
            let theta = std::f64::consts::TAU * (j as f64 + 0.5) / n_t as f64;
            let (x, y) = (A2.0 + rho * theta.cos(), A2.1 + rho * theta.sin());
            if cells.iter().any(|c| c.contains(x, y)) {
                points.push((x, y));
            }
        }
    }
    let tol = config.zeta_tol;
    let ra = triangular_zeta(e.alpha, tol)?;
    let rb = triangular_zeta(e.beta, tol)?;
    let values: Vec<Result<CertifiedValue>> = with_workers(config.workers, || {
        points
            .par_iter()
            .map(|&(x, y)| {
                let p = DomainPoint::new(x, y)?;
                let za = epstein_certified(&p, e.alpha, attainable_tol(&p, e.alpha, tol))?;
                let zb = epstein_certified(&p, e.beta, attainable_tol(&p, e.beta, tol))?;
                quotient_from_parts(&p, &za, &zb, &ra, &rb)
            })
            .collect()
    })?;
    for (&(x, y), v) in points.iter().zip(values) {
        summary.samples_checked += 1;
        match v {
            Ok(q) => {
                if summary.min_sample_q.is_none_or(|m| q.lo() < m.lo()) {
                    summary.min_sample_q = Some(q);
                    summary.min_sample_point = Some([x, y]);
                }
                if !(q.lo() > required) {
                    summary.all_samples_pass = false;
                    summary.failing_samples.push([x, y]);
                }
            }
            Err(Error::NearTriangular { .. }) => {
                summary.all_samples_pass = false;
                summary.failing_samples.push([x, y]);
            }
            Err(other) => return Err(other),
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_geometry() {
        let c = Cell::centered(0.5, SQRT3_2, 0.01);
        assert_eq!(c.distance_to(0.5, SQRT3_2), 0.0);
        let kids = c.split();
        assert!(kids.iter().all(|k| (k.x1 - k.x0 - 0.005).abs() < 1e-15));
        assert!((c.radius() - 0.005 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn impossible_margin_fails_with_listed_cells() {
        let e = ExponentPair::new(24.0, 6.0).unwrap();
        let cfg = AdaptiveConfig {
            delta: 0.05,
            max_depth: 1,
            required_margin: Some(1e3),
            fallback_samples: 100,
            workers: 1,
            ..AdaptiveConfig::default()
        };
        let r = certify_adaptive(&e, &cfg).unwrap();
        assert!(!r.verdict);
        assert!(!r.adaptive.unwrap().failures.is_empty());
    }
}
