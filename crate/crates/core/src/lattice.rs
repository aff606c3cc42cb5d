//! Two-dimensional lattices, the half-fundamental domain and Gauss–Lagrange
//! reduction.
//!
//! A unit-covolume lattice is described by a point `(x, y)` of the
//! half-fundamental domain `{y > 0, 0 <= x <= 1/2, x^2 + y^2 >= 1}` through the
//! basis `u = (1/sqrt(y), 0)`, `v = (x/sqrt(y), sqrt(y))`. Its quadratic form is
//! `Q(m, n) = (m + x n)^2 / y + y n^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt(3) / 2`, the height of the triangular lattice in the domain.
pub const SQRT3_2: f64 = 0.866_025_403_784_438_6;

const REDUCTION_REL_TOL: f64 = 1e-12;
const REDUCTION_MAX_STEPS: usize = 10_000;

/// Shape parameters `(x, y)` of a unit-covolume lattice.
///
/// Points outside the reduced domain are allowed (any `y > 0` defines a
/// lattice); `is_reduced` tells whether the point is the canonical
/// representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub x: f64,
    pub y: f64,
}

impl DomainPoint {
    /// The square lattice `Z^2`.
    pub const SQUARE: DomainPoint = DomainPoint { x: 0.0, y: 1.0 };
    /// The triangular lattice `A2`.
    pub const TRIANGULAR: DomainPoint = DomainPoint { x: 0.5, y: SQRT3_2 };

    /// Any point with `y > 0`; the lattice it describes need not be reduced.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lattice shape needs finite x and y > 0, got ({x}, {y})"
            )));
        }
        Ok(DomainPoint { x, y })
    }

    /// A point that must lie in the half-fundamental domain.
    pub fn reduced(x: f64, y: f64) -> Result<Self> {
        if !in_domain(x, y) {
            return Err(Error::InvalidParameter(format!(
                "({x}, {y}) is not in the half-fundamental domain"
            )));
        }
        Ok(DomainPoint { x, y })
    }

    pub fn is_reduced(&self) -> bool {
        in_domain(self.x, self.y)
    }

    pub fn distance(&self, other: &DomainPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A pair of plane vectors spanning a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Basis {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Result<Self> {
        let b = Basis { u, v };
        if !(b.covolume() > 0.0) || !b.covolume().is_finite() {
            return Err(Error::DegenerateBasis);
        }
        Ok(b)
    }

    pub fn det(&self) -> f64 {
        self.u[0] * self.v[1] - self.u[1] * self.v[0]
    }

    pub fn covolume(&self) -> f64 {
        self.det().abs()
    }

    /// `|m u + n v|^2`.
    pub fn norm_sq(&self, m: i64, n: i64) -> f64 {
        let (m, n) = (m as f64, n as f64);
        let px = m * self.u[0] + n * self.v[0];
        let py = m * self.u[1] + n * self.v[1];
        px * px + py * py
    }

    pub fn scaled(&self, factor: f64) -> Basis {
        Basis {
            u: [self.u[0] * factor, self.u[1] * factor],
            v: [self.v[0] * factor, self.v[1] * factor],
        }
    }
}

/// `sqrt(V) L` for the unit-covolume lattice `L` of `shape`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledLattice {
    pub shape: DomainPoint,
    pub covolume: f64,
}

impl ScaledLattice {
    pub fn new(shape: DomainPoint, covolume: f64) -> Result<Self> {
        if !(covolume > 0.0) || !covolume.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "covolume must be positive, got {covolume}"
            )));
        }
        Ok(ScaledLattice { shape, covolume })
    }

    pub fn quadratic_form(&self, m: i64, n: i64) -> f64 {
        self.covolume * quadratic_form(&self.shape, m, n)
    }

    pub fn basis(&self) -> Basis {
        basis_from_domain_point(&self.shape).scaled(self.covolume.sqrt())
    }
}

/// Relative slack on the unit-circle boundary, so that the rounded
/// coordinates of the triangular lattice count as reduced.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Membership in the half-fundamental domain.
pub fn in_domain(x: f64, y: f64) -> bool {
    y > 0.0 && (0.0..=0.5).contains(&x) && x * x + y * y >= 1.0 - DOMAIN_SLACK
}

/// `Q_L(m, n) = (m + x n)^2 / y + y n^2`.
pub fn quadratic_form(p: &DomainPoint, m: i64, n: i64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    let u = m + p.x * n;
    u * u / p.y + p.y * n * n
}

pub fn basis_from_domain_point(p: &DomainPoint) -> Basis {
    let sy = p.y.sqrt();
    Basis {
        u: [1.0 / sy, 0.0],
        v: [p.x / sy, sy],
    }
}

/// Reduces an arbitrary basis to its domain point and covolume.
///
/// Gauss–Lagrange reduction. The unimodular transform is tracked in integers
/// and the working vectors are rebuilt from the input at every step, so
/// rounding does not accumulate. Boundary ties resolve to `x >= 0`.
pub fn reduce_to_domain(b: &Basis) -> Result<(DomainPoint, f64)> {
    let covolume = b.covolume();
    if !(covolume > 0.0) || !covolume.is_finite() {
        return Err(Error::DegenerateBasis);
    }
    // rows: coefficients of the current (u, v) in terms of the input (u, v)
    let mut t = [[1i64, 0i64], [0i64, 1i64]];
    let vec_of = |c: [i64; 2]| -> [f64; 2] {
        let (a, bb) = (c[0] as f64, c[1] as f64);
        [a * b.u[0] + bb * b.v[0], a * b.u[1] + bb * b.v[1]]
    };
    let dot = |p: [f64; 2], q: [f64; 2]| p[0] * q[0] + p[1] * q[1];

    let mut steps = 0;
    loop {
        steps += 1;
        if steps > REDUCTION_MAX_STEPS {
            return Err(Error::Internal("lattice reduction did not terminate".into()));
        }
        let (mut u, mut v) = (vec_of(t[0]), vec_of(t[1]));
        if dot(v, v) < dot(u, u) * (1.0 - REDUCTION_REL_TOL) {
            t.swap(0, 1);
            std::mem::swap(&mut u, &mut v);
        }
        let ratio = dot(u, v) / dot(u, u);
        if ratio.abs() <= 0.5 + REDUCTION_REL_TOL {
            break;
        }
        let mu = ratio.round() as i64;
        t[1] = [t[1][0] - mu * t[0][0], t[1][1] - mu * t[0][1]];
    }

    let (u, v) = (vec_of(t[0]), vec_of(t[1]));
    let uu = dot(u, u);
    let y = covolume / uu;
    let x = (dot(u, v) / uu).abs().min(0.5);
    Ok((DomainPoint { x, y }, covolume))
}

/// The two sides of `(m^2 + n^2)/2 <= (m + x n)^2 + y^2 n^2 <= 3/2 m^2 + (3/4 + y^2) n^2`,
/// returned as `(lower, middle, upper)`. Valid on the reduced domain.
pub fn sandwich_terms(p: &DomainPoint, m: i64, n: i64) -> (f64, f64, f64) {
    let (mf, nf) = (m as f64, n as f64);
    let u = mf + p.x * nf;
    let mid = u * u + p.y * p.y * nf * nf;
    let lo = (mf * mf + nf * nf) / 2.0;
    let hi = 1.5 * mf * mf + (0.75 + p.y * p.y) * nf * nf;
    (lo, mid, hi)
}

/// A constant `c` with `Q_L(m, n) >= (m^2 + n^2) / c` for every `(m, n)`.
///
/// `(1 + x^2 + y^2) / y` holds for any shape (smallest eigenvalue of the
/// Gram matrix is at least `det / trace`); on the reduced domain `2 y` also holds.
pub fn norm_ratio_bound(x: f64, y: f64) -> f64 {
    let general = (1.0 + x * x + y * y) / y;
    if in_domain(x, y) {
        general.min(2.0 * y)
    } else {
        general
    }
}

/// `norm_ratio_bound` valid uniformly over the box `[x0, x1] x [y0, y1]`.
pub fn norm_ratio_bound_box(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let xm = x0.abs().max(x1.abs());
    let g = |y: f64| (1.0 + xm * xm + y * y) / y;
    // convex in y: the maximum is at an endpoint
    let general = g(y0).max(g(y1));
    let xmin = if x0 <= 0.0 && x1 >= 0.0 { 0.0 } else { x0.abs().min(x1.abs()) };
    let inside = x0 >= 0.0 && x1 <= 0.5 && xmin * xmin + y0 * y0 >= 1.0;
    if inside {
        general.min(2.0 * y1)
    } else {
        general
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_examples() {
        assert_eq!(quadratic_form(&DomainPoint::SQUARE, 1, 0), 1.0);
        let a2 = quadratic_form(&DomainPoint::TRIANGULAR, 1, 0);
        assert!((a2 - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        let p = DomainPoint::new(0.3, 1.2).unwrap();
        let expected = 1.7 * 1.7 / 1.2 + 1.2;
        assert!((quadratic_form(&p, 2, -1) - expected).abs() < 1e-14);
        assert!((quadratic_form(&p, 2, -1) - 3.6083).abs() < 1e-4);
        assert_eq!(quadratic_form(&p, 0, 0), 0.0);
    }

    #[test]
    fn basis_examples() {
        let b = basis_from_domain_point(&DomainPoint::SQUARE);
        assert_eq!(b.u, [1.0, 0.0]);
        assert_eq!(b.v, [0.0, 1.0]);
        let b = basis_from_domain_point(&DomainPoint::TRIANGULAR);
        let s = (2.0 / 3f64.sqrt()).sqrt();
        assert!((b.u[0] - s).abs() < 1e-15 && b.u[1] == 0.0);
        assert!((b.v[0] - s / 2.0).abs() < 1e-15);
        assert!((b.v[1] - SQRT3_2.sqrt()).abs() < 1e-15);
        assert!((b.covolume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reduce_examples() {
        let (p, v) = reduce_to_domain(&Basis::new([2.0, 0.0], [0.0, 2.0]).unwrap()).unwrap();
        assert!((p.x - 0.0).abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        assert!((v - 4.0).abs() < 1e-15);

        let (p, v) = reduce_to_domain(&Basis::new([1.0, 0.0], [5.5, 1.0]).unwrap()).unwrap();
        assert!((p.x - 0.5).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-15);

        let s = (2.0 / 3f64.sqrt()).sqrt();
        let tri = Basis::new([s, 0.0], [s * 0.5, s * SQRT3_2]).unwrap();
        let (p, v) = reduce_to_domain(&tri).unwrap();
        assert!((p.x - 0.5).abs() < 1e-12 && (p.y - SQRT3_2).abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_rejects_degenerate() {
        let b = Basis { u: [1.0, 2.0], v: [2.0, 4.0] };
        assert_eq!(reduce_to_domain(&b), Err(Error::DegenerateBasis));
        assert!(Basis::new([1.0, 0.0], [3.0, 0.0]).is_err());
    }

    #[test]
    fn reduce_reflects_negative_shear() {
        // v = (-0.3, 1.2) after normalisation: mirror image of x = 0.3
        let b = Basis::new([1.0, 0.0], [-0.3, 1.2]).unwrap();
        let (p, v) = reduce_to_domain(&b).unwrap();
        assert!((p.x - 0.3 / 1.0).abs() < 1e-12);
        assert!((p.y - 1.2).abs() < 1e-12);
        assert!((v - 1.2).abs() < 1e-15);
    }

    #[test]
    fn in_domain_examples() {
        assert!(in_domain(0.0, 1.0));
        assert!(!in_domain(0.3, 0.9));
        assert!(in_domain(0.5, SQRT3_2));
        assert!(!in_domain(-0.1, 2.0));
        assert!(!in_domain(0.6, 2.0));
    }

    #[test]
    fn scaled_lattice_form_scales_termwise() {
        let p = DomainPoint::new(0.2, 1.3).unwrap();
        let l = ScaledLattice::new(p, 3.5).unwrap();
        for (m, n) in [(1, 0), (2, -3), (-4, 7)] {
            let direct = l.basis().norm_sq(m, n);
            assert!((l.quadratic_form(m, n) - 3.5 * quadratic_form(&p, m, n)).abs() < 1e-12);
            assert!((direct - l.quadratic_form(m, n)).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn norm_ratio_bound_is_a_lower_bound_off_domain() {
        for &(x, y) in &[(0.0, 0.87), (0.5, 0.865), (0.24, 0.97), (0.505, 0.9), (-0.005, 2.0)] {
            let c = norm_ratio_bound(x, y);
            let p = DomainPoint::new(x, y).unwrap();
            for m in -30..=30 {
                for n in -30..=30 {
                    if (m, n) == (0, 0) {
                        continue;
                    }
                    let q = quadratic_form(&p, m, n);
                    assert!(q * c >= (m * m + n * n) as f64 * (1.0 - 1e-12));
                }
            }
        }
    }
}
