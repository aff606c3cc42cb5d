//! Independent rechecks of certification output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trilattice::certifier::{
    certify_adaptive, certify_paper_mode, AdaptiveConfig, CellStatus, CertificationMode,
};
use trilattice::energy::{quotient_q, ExponentPair};
use trilattice::lattice::DomainPoint;
use trilattice::zeta::{attainable_tol, TruncationSpec};

fn recheck_tol(p: &DomainPoint, e: &ExponentPair) -> f64 {
    attainable_tol(p, e.alpha, 1e-10)
}

#[test]
fn certified_cells_survive_recheck() {
    let e = ExponentPair::new(24.0, 6.0).unwrap();
    let cfg = AdaptiveConfig { include_cells: true, workers: 2, ..AdaptiveConfig::default() };
    let report = certify_adaptive(&e, &cfg).unwrap();
    assert_eq!(report.mode, CertificationMode::Adaptive);
    assert!(report.verdict);
    let summary = report.adaptive.unwrap();
    let cells = summary.cells.unwrap();
    let certified: Vec<_> = cells.iter().filter(|c| c.status == CellStatus::Certified).collect();
    assert_eq!(certified.len(), summary.cells_certified);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cell in certified.iter().step_by((certified.len() / 150).max(1)) {
        let [cx, cy] = cell.center;
        let p = DomainPoint::new(cx, cy).unwrap();
        let q = quotient_q(&p, &e, recheck_tol(&p, &e)).unwrap();
        let recorded = cell.q.unwrap();
        assert!(q.lo() <= recorded.hi() && recorded.lo() <= q.hi(), "centre value moved at {:?}", cell.center);
        assert!(cell.margin.unwrap() > 0.0);

        // points inside the cell must clear the bound as the certificate claims
        let h = cell.side / 2.0;
        for _ in 0..3 {
            let (x, y) = (cx + rng.gen_range(-h..=h), cy + rng.gen_range(-h..=h));
            let pt = DomainPoint::new(x, y).unwrap();
            let qv = quotient_q(&pt, &e, recheck_tol(&pt, &e)).unwrap();
            let implied = recorded.lo() - cell.lipschitz.unwrap() * ((x - cx).hypot(y - cy));
            assert!(qv.hi() >= implied, "certificate contradicted at ({x}, {y})");
            assert!(qv.lo() > e.ratio());
        }
    }
}

#[test]
fn fallback_region_is_sampled() {
    let e = ExponentPair::new(24.0, 6.0).unwrap();
    let cfg = AdaptiveConfig { delta: 0.05, max_depth: 5, workers: 2, fallback_samples: 2000, ..AdaptiveConfig::default() };
    // a shallow run may leave cells open, but the fallback sample is still complete
    let report = certify_adaptive(&e, &cfg).unwrap();
    let near = report.adaptive.unwrap().near_a2;
    assert!(near.fallback_cells > 0);
    assert!(near.samples_checked > 0);
    assert!(near.all_samples_pass);
    assert!(near.failing_samples.is_empty());
    assert!(near.min_sample_q.unwrap().lo() > e.ratio());
}

#[test]
fn paper_mode_reports_margin_arithmetic() {
    let e = ExponentPair::new(24.0, 6.0).unwrap();
    let report = certify_paper_mode(&e, 0.05, 33.0, TruncationSpec::new(20).unwrap(), 2, 2).unwrap();
    let paper = report.paper.as_ref().unwrap();
    let margin = 33.0 * 0.05 * std::f64::consts::SQRT_2 / 2.0;
    assert!((paper.lipschitz_margin - margin).abs() < 1e-12);
    let q = report.min_q.unwrap();
    assert!((paper.min_q_lower_minus_margin - (q.lo() - margin)).abs() < 1e-9);
    assert_eq!(report.verdict, paper.min_q_lower_minus_margin > e.ratio());
    assert_eq!(paper.points_evaluated, report.grid.i_count * report.grid.j_count);
}
