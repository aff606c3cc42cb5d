//! Gradient and Lipschitz bounds for the zeta quotient.

use serde::{Deserialize, Serialize};

use crate::energy::{triangular_zeta, ExponentPair};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::{norm_ratio_bound_box, DomainPoint, SQRT3_2};
use crate::zeta::{
    epstein_certified, lattice_sum, tail_from_ratio, truncation_for, Compensated, Decay,
    TruncationSpec, MAX_TRUNCATION,
};

/// An axis-aligned box `[x0, x1] x [y0, y1]` in shape coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cell {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 <= x1 && y0 <= y1 && y0 > 0.0) || !(x1.is_finite() && y1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bad cell [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Cell { x0, x1, y0, y1 })
    }

    /// Square cell of side `side` centred at `(x, y)`.
    pub fn centered(x: f64, y: f64, side: f64) -> Self {
        let h = 0.5 * side;
        Cell { x0: x - h, x1: x + h, y0: y - h, y1: y + h }
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Distance from the centre to the farthest corner, rounded up.
    pub fn radius(&self) -> f64 {
        let (cx, cy) = self.center();
        let dx = (self.x1 - cx).max(cx - self.x0);
        let dy = (self.y1 - cy).max(cy - self.y0);
        dx.hypot(dy) * (1.0 + 4.0 * f64::EPSILON)
    }

    /// The four quadrants, ordered (low x, low y), (high x, low y), (low x, high y), (high x, high y).
    pub fn split(&self) -> [Cell; 4] {
        let (cx, cy) = self.center();
        [
            Cell { x0: self.x0, x1: cx, y0: self.y0, y1: cy },
            Cell { x0: cx, x1: self.x1, y0: self.y0, y1: cy },
            Cell { x0: self.x0, x1: cx, y0: cy, y1: self.y1 },
            Cell { x0: cx, x1: self.x1, y0: cy, y1: self.y1 },
        ]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    /// Euclidean distance from `(x, y)` to the nearest point of the cell.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x0 - x).max(0.0).max(x - self.x1);
        let dy = (self.y0 - y).max(0.0).max(y - self.y1);
        dx.hypot(dy)
    }

    /// Euclidean distance from `(x, y)` to the farthest corner.
    pub fn max_distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (x - self.x0).abs().max((x - self.x1).abs());
        let dy = (y - self.y0).abs().max((y - self.y1).abs());
        dx.hypot(dy)
    }
}

/// Per-term rounding budget of the interval gradient terms.
const GRADIENT_TERM_OPS: f64 = 40.0;

/// Enclosures of `d/dx zeta_L(s)` and `d/dy zeta_L(s)` valid for every shape in
/// `cell`, truncated at `n_max` and including the truncation tail.
pub fn gradient_enclosure(cell: &Cell, s: f64, n_max: u32) -> (Interval, Interval) {
    let decay = Decay::new(s + 2.0);
    let (x0, x1) = (cell.x0, cell.x1);
    let (ya, yb) = (cell.y0 * cell.y0, cell.y1 * cell.y1);

    let mut sx = [Compensated::default(); 2];
    let mut sy = [Compensated::default(); 2];
    let mut abs = Compensated::default();
    for k in 1..=n_max as i64 {
        let kf = k as f64;
        let mut shell = [0.0f64; 5];
        let mut term = |ulo: f64, uhi: f64, n: f64| {
            let (a, b) = (ulo * ulo, uhi * uhi);
            let u2lo = if ulo <= 0.0 && uhi >= 0.0 { 0.0 } else { a.min(b) };
            let u2hi = a.max(b);
            let n2 = n * n;
            let plo = decay.eval(u2hi + yb * n2);
            let phi = decay.eval(u2lo + ya * n2);
            let (w0, w1) = ((n * ulo).min(n * uhi), (n * ulo).max(n * uhi));
            let (v0, v1) = (u2lo - yb * n2, u2hi - ya * n2);
            let gx_lo = if w0 >= 0.0 { w0 * plo } else { w0 * phi };
            let gx_hi = if w1 >= 0.0 { w1 * phi } else { w1 * plo };
            let gy_lo = if v0 >= 0.0 { v0 * plo } else { v0 * phi };
            let gy_hi = if v1 >= 0.0 { v1 * phi } else { v1 * plo };
            shell[0] += gx_lo;
            shell[1] += gx_hi;
            shell[2] += gy_lo;
            shell[3] += gy_hi;
            shell[4] += gx_lo.abs().max(gx_hi.abs()) + gy_lo.abs().max(gy_hi.abs());
        };
        for m in -k..=k {
            let mf = m as f64;
            term(mf + kf * x0, mf + kf * x1, kf);
        }
        for n in -(k - 1)..=(k - 1) {
            let nf = n as f64;
            let (a, b) = (kf + nf * x0, kf + nf * x1);
            term(a.min(b), a.max(b), nf);
        }
        sx[0].add(shell[0]);
        sx[1].add(shell[1]);
        sy[0].add(shell[2]);
        sy[1].add(shell[3]);
        abs.add(shell[4]);
    }
    let slop = 2.0 * (4.0 * n_max as f64 + GRADIENT_TERM_OPS) * f64::EPSILON * abs.value();
    let sum_x = Interval::new(2.0 * sx[0].value(), 2.0 * sx[1].value()).inflate(slop);
    let sum_y = Interval::new(2.0 * sy[0].value(), 2.0 * sy[1].value()).inflate(slop);

    let slack = 1.0 + 16.0 * f64::EPSILON;
    let pow = |e: f64| Interval::new(cell.y0.powf(e) / slack, cell.y1.powf(e) * slack);
    let kx = pow(s / 2.0).scale(-s);
    let ky = pow(s / 2.0 - 1.0).scale(s / 2.0);

    let tail = gradient_tail_on_cell(cell, s, n_max);
    ((sum_x * kx).inflate(tail), (sum_y * ky).inflate(tail))
}

/// Bound on each gradient component of the zeta tail beyond order `n`, uniform over `cell`.
pub fn gradient_tail_on_cell(cell: &Cell, s: f64, n: u32) -> f64 {
    let c = norm_ratio_bound_box(cell.x0, cell.x1, cell.y0, cell.y1);
    0.5 * s / cell.y0 * tail_from_ratio(c, s, n)
}

/// Truncation order for [`gradient_enclosure`] whose tail is at most `target`.
pub fn gradient_truncation(cell: &Cell, s: f64, target: f64) -> Result<u32> {
    let c = norm_ratio_bound_box(cell.x0, cell.x1, cell.y0, cell.y1);
    truncation_for(c, s, target * 2.0 * cell.y0 / s, MAX_TRUNCATION).ok_or(
        Error::ToleranceUnreachable { tol: target, achieved: gradient_tail_on_cell(cell, s, MAX_TRUNCATION) },
    )
}

/// Upper bound on `||grad zeta_L(s)||` over `cell`. The truncation tail is kept
/// below `rel * zeta_L(s)` at the centre scale.
pub fn gradient_norm_bound(cell: &Cell, s: f64, zeta_scale: f64, rel: f64) -> Result<f64> {
    let n = gradient_truncation(cell, s, rel * zeta_scale * s / cell.y0)?;
    let (gx, gy) = gradient_enclosure(cell, s, n);
    Ok(gx.mag().hypot(gy.mag()) * (1.0 + 4.0 * f64::EPSILON))
}

/// Relative size of the gradient truncation tail used by the certifier.
pub const GRADIENT_REL_TOL: f64 = 1e-6;

/// A Lipschitz bound for the quotient over a cell together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    /// Upper bound on `||grad Q||` over the cell.
    pub bound: f64,
    pub g_alpha: f64,
    pub g_beta: f64,
    pub delta_beta_min: f64,
    pub q_abs_max: f64,
}

/// Gradient norm bounds of both zeta functions over a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellGradients {
    pub g_alpha: f64,
    pub g_beta: f64,
}

impl CellGradients {
    pub(crate) fn new(cell: &Cell, e: &ExponentPair, scale_alpha: f64, scale_beta: f64) -> Result<Self> {
        Ok(CellGradients {
            g_alpha: gradient_norm_bound(cell, e.alpha, scale_alpha, GRADIENT_REL_TOL)?,
            g_beta: gradient_norm_bound(cell, e.beta, scale_beta, GRADIENT_REL_TOL)?,
        })
    }
}

/// Bound from enclosures `d_alpha`, `d_beta` of `zeta(s) - zeta_A2(s)` at the cell centre.
///
/// With `G_s >= ||grad zeta(s)||` on the cell and `r` the cell radius,
/// `Delta_beta >= d_beta.lo - G_beta r > 0` and `|Q| <= max|Delta_alpha| / Delta_beta_min`
/// everywhere in the cell, so `||grad Q|| <= (G_alpha + |Q|_max G_beta) / Delta_beta_min`.
pub(crate) fn lipschitz_from_center(
    cell: &Cell,
    d_alpha: Interval,
    d_beta: Interval,
    g: CellGradients,
) -> Result<LipschitzBound> {
    let r = cell.radius();
    let CellGradients { g_alpha, g_beta } = g;
    let delta_beta_min = d_beta.lo - g_beta * r;
    if !(delta_beta_min > 0.0) {
        let (cx, cy) = cell.center();
        return Err(Error::NearTriangular { x: cx, y: cy });
    }
    let num_max = (d_alpha.hi + g_alpha * r).abs().max((d_alpha.lo - g_alpha * r).abs());
    let q_abs_max = num_max / delta_beta_min * (1.0 + 4.0 * f64::EPSILON);
    let bound = (g_alpha + q_abs_max * g_beta) / delta_beta_min * (1.0 + 8.0 * f64::EPSILON);
    Ok(LipschitzBound { bound, g_alpha, g_beta, delta_beta_min, q_abs_max })
}

/// Upper bound on `||grad Q_{alpha,beta}||` over `cell`, with the centre values
/// evaluated to `tol`.
pub fn local_lipschitz(cell: &Cell, e: &ExponentPair, tol: f64) -> Result<LipschitzBound> {
    let (cx, cy) = cell.center();
    let p = DomainPoint::new(cx, cy)?;
    let za = epstein_certified(&p, e.alpha, tol)?;
    let zb = epstein_certified(&p, e.beta, tol)?;
    let ra = triangular_zeta(e.alpha, tol)?;
    let rb = triangular_zeta(e.beta, tol)?;
    let d_alpha = za.interval() - ra.interval();
    let d_beta = zb.interval() - rb.interval();
    let g = CellGradients::new(cell, e, za.mid, zb.mid)?;
    lipschitz_from_center(cell, d_alpha, d_beta, g)
}

/// Literal global Lipschitz formula `zeta_{L_bar}(alpha) (S(alpha) + S(beta))` with
/// `L_bar = (0, y_bar)` and
/// `S(s) = 2^s s^2 y_bar^{s-2} { y_bar^2 A_s^2 + B_s^2 }`,
/// `A_s = sum' 2|n|(|m| + |n|/2) / (m^2 + n^2)^{s/2+1}`,
/// `B_s = sum' (m^2 + n^2/4 + |m||n|) / (m^2 + n^2)^{s/2+1}`,
/// all sums truncated at `t`.
pub fn paper_lipschitz(e: &ExponentPair, y_bar: f64, t: TruncationSpec) -> Result<f64> {
    if !(y_bar >= SQRT3_2) {
        return Err(Error::InvalidParameter(format!("y_bar = {y_bar} is below sqrt(3)/2")));
    }
    let s_of = |s: f64| {
        let decay = Decay::new(s + 2.0);
        let a = lattice_sum(0.0, t.n, |m, n| {
            2.0 * n.abs() * (m.abs() + 0.5 * n.abs()) * decay.eval(m * m + n * n)
        });
        let b = lattice_sum(0.0, t.n, |m, n| {
            (m * m + 0.25 * n * n + m.abs() * n.abs()) * decay.eval(m * m + n * n)
        });
        2f64.powf(s) * s * s * y_bar.powf(s - 2.0) * (y_bar * y_bar * a.value * a.value + b.value * b.value)
    };
    let lbar = DomainPoint::new(0.0, y_bar)?;
    let zeta_lbar = crate::zeta::epstein_partial(&lbar, e.alpha, t)?;
    Ok(zeta_lbar * (s_of(e.alpha) + s_of(e.beta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::{epstein_gradient, epstein_partial};

    #[test]
    fn enclosure_contains_sampled_gradients() {
        let cell = Cell::new(0.1, 0.13, 1.2, 1.23).unwrap();
        let (gx, gy) = gradient_enclosure(&cell, 6.0, 60);
        let t = TruncationSpec::new(60).unwrap();
        for i in 0..=4 {
            for j in 0..=4 {
                let x = cell.x0 + 0.03 * i as f64 / 4.0;
                let y = cell.y0 + 0.03 * j as f64 / 4.0;
                let (dx, dy) = epstein_gradient(&DomainPoint::new(x, y).unwrap(), 6.0, t).unwrap();
                assert!(gx.contains(dx) && gy.contains(dy), "{dx} {dy} {gx:?} {gy:?}");
            }
        }
    }

    #[test]
    fn enclosure_tightens_to_point_gradient() {
        let p = DomainPoint::new(0.3, 1.6).unwrap();
        let cell = Cell::new(p.x, p.x, p.y, p.y).unwrap();
        let (gx, gy) = gradient_enclosure(&cell, 12.0, 40);
        let (dx, dy) = epstein_gradient(&p, 12.0, TruncationSpec::new(40).unwrap()).unwrap();
        assert!(gx.contains(dx) && gy.contains(dy));
        assert!(gx.width() < 1e-6 * dx.abs().max(1.0) && gy.width() < 1e-6 * dy.abs().max(1.0));
    }

    #[test]
    fn local_bound_dominates_difference_quotients() {
        let e = ExponentPair::new(12.0, 6.0).unwrap();
        let cell = Cell::new(0.0, 0.01, 1.0, 1.01).unwrap();
        let l = local_lipschitz(&cell, &e, 1e-9).unwrap();
        let t = TruncationSpec::new(60).unwrap();
        let q = |x: f64, y: f64| {
            let p = DomainPoint::new(x, y).unwrap();
            let a = epstein_partial(&p, 12.0, t).unwrap() - epstein_partial(&DomainPoint::TRIANGULAR, 12.0, t).unwrap();
            let b = epstein_partial(&p, 6.0, t).unwrap() - epstein_partial(&DomainPoint::TRIANGULAR, 6.0, t).unwrap();
            a / b
        };
        let mut sampled: f64 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let (x, y) = (0.001 * i as f64, 1.0 + 0.001 * j as f64);
                let h = 1e-4;
                let gx = (q(x + h, y) - q(x, y)) / h;
                let gy = (q(x, y + h) - q(x, y)) / h;
                sampled = sampled.max(gx.hypot(gy));
            }
        }
        assert!(l.bound >= sampled, "{} < {sampled}", l.bound);
        assert!(l.bound <= 50.0 * sampled, "{} vs {sampled}", l.bound);
    }

    #[test]
    fn refuses_cells_at_the_triangular_lattice() {
        let e = ExponentPair::new(12.0, 6.0).unwrap();
        let cell = Cell::centered(0.5, SQRT3_2, 0.01);
        assert!(matches!(local_lipschitz(&cell, &e, 1e-9), Err(Error::NearTriangular { .. })));
    }

    #[test]
    fn paper_formula_is_finite_and_monotone() {
        let e = ExponentPair::new(12.0, 6.0).unwrap();
        let t = TruncationSpec::paper();
        let m1 = paper_lipschitz(&e, 7.52, t).unwrap();
        let m2 = paper_lipschitz(&e, 8.0, t).unwrap();
        assert!(m1.is_finite() && m1 > 181.0);
        assert!(m2 > m1);
    }
}
