//! Height above which the quotient provably exceeds `alpha / beta`.
//!
//! With `eta1 = 2^{1+alpha/2} 3^{-alpha/2} zeta(alpha)`,
//! `eta2 = 2^{beta/2} (alpha/beta) zeta_{Z^2}(beta)` and
//! `eta3 = (alpha/beta) zeta_A2(beta) - zeta_A2(alpha)`, every reduced shape with
//! `eta1 y^{alpha/2} - eta2 y^{beta/2} + eta3 > 0` has `Q > alpha / beta`.
//! The general threshold drops `eta3`; when `alpha = 2 beta` the inequality is a
//! quadratic in `y^{beta/2}` and is solved exactly.

use serde::{Deserialize, Serialize};

use crate::energy::{triangular_zeta, ExponentPair};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::DomainPoint;
use crate::zeta::{epstein_certified, riemann_certified};

/// Decimal places used for rounding the threshold up.
pub const DEFAULT_DECIMALS: u32 = 2;

/// Tolerance used for the zeta inputs of the threshold.
pub const THRESHOLD_ZETA_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdBranch {
    AlphaEqualsTwoBeta,
    General,
}

/// Enclosures of the three constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Etas {
    pub eta1: Interval,
    pub eta2: Interval,
    pub eta3: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Certified upper enclosure of the threshold.
    pub y_exact: f64,
    /// `y_exact` rounded up to `k` decimals.
    pub y_bar: f64,
    pub y_bar_text: String,
    pub k: u32,
    pub branch: ThresholdBranch,
    /// Upper enclosure of the general-branch formula, reported even when the
    /// quadratic branch is used.
    pub y_general: f64,
    pub etas: Etas,
}

// relative slack for the handful of roundings in the closed forms
const FORMULA_SLACK: f64 = 32.0 * f64::EPSILON;

fn widen(i: Interval) -> Interval {
    Interval::new(i.lo * (1.0 - FORMULA_SLACK), i.hi * (1.0 + FORMULA_SLACK))
}

/// Calls `f` with `tol`, loosening it tenfold while it is unreachable. Exponents
/// close to 2 converge too slowly for tight absolute tolerances.
fn relaxed<T>(tol: f64, f: impl Fn(f64) -> Result<T>) -> Result<T> {
    let mut t = tol;
    loop {
        match f(t) {
            Err(Error::ToleranceUnreachable { .. }) if t < 1.0 => t *= 10.0,
            r => return r,
        }
    }
}

pub fn eta_constants(e: &ExponentPair, tol: f64) -> Result<Etas> {
    let (a, b) = (e.alpha, e.beta);
    let zeta_a = relaxed(tol, |t| riemann_certified(a, t))?.interval();
    let z2_b = relaxed(tol, |t| epstein_certified(&DomainPoint::SQUARE, b, t))?.interval();
    let a2_a = relaxed(tol, |t| triangular_zeta(a, t))?.interval();
    let a2_b = relaxed(tol, |t| triangular_zeta(b, t))?.interval();

    let eta1 = widen(zeta_a.scale(2f64.powf(1.0 + a / 2.0) * 3f64.powf(-a / 2.0)));
    let eta2 = widen(z2_b.scale(2f64.powf(b / 2.0) * (a / b)));
    let eta3 = a2_b.scale(a / b) - a2_a;
    let eta3 = Interval::new(eta3.lo - FORMULA_SLACK * a2_b.hi * a / b, eta3.hi + FORMULA_SLACK * a2_b.hi * a / b);
    if !(eta3.lo > 0.0) {
        return Err(Error::Internal(format!(
            "eta3 enclosure [{}, {}] is not strictly positive for ({a}, {b})",
            eta3.lo, eta3.hi
        )));
    }
    Ok(Etas { eta1, eta2, eta3 })
}

/// Upper bound of `(eta2 / eta1)^{2/(alpha - beta)}`.
fn general_branch(e: &ExponentPair, etas: &Etas) -> f64 {
    let ratio = etas.eta2.hi / etas.eta1.lo;
    ratio.powf(2.0 / (e.alpha - e.beta)) * (1.0 + FORMULA_SLACK)
}

/// Upper bound of the larger root of `eta1 X^2 - eta2 X + eta3`, mapped to `y = X^{2/beta}`.
/// The root increases with `eta2` and decreases with `eta1` and `eta3`.
fn quadratic_branch(e: &ExponentPair, etas: &Etas) -> Result<f64> {
    let (e1, e2, e3) = (etas.eta1.lo, etas.eta2.hi, etas.eta3.lo);
    let disc = e2 * e2 - 4.0 * e1 * e3;
    if !(disc > 0.0) {
        return Err(Error::Internal(format!("non-positive discriminant {disc}")));
    }
    let root = (e2 + disc.sqrt()) / (2.0 * e1);
    Ok(root.powf(2.0 / e.beta) * (1.0 + FORMULA_SLACK))
}

pub fn threshold_y(e: &ExponentPair, k: u32, tol: f64) -> Result<ThresholdResult> {
    if k > 12 {
        return Err(Error::InvalidParameter(format!("rounding decimals k = {k} is too large")));
    }
    let etas = eta_constants(e, tol)?;
    let y_general = general_branch(e, &etas);
    let (branch, y_exact) = if e.alpha == 2.0 * e.beta {
        (ThresholdBranch::AlphaEqualsTwoBeta, quadratic_branch(e, &etas)?)
    } else {
        (ThresholdBranch::General, y_general)
    };
    let (y_bar, y_bar_text) = round_up(y_exact, k);
    Ok(ThresholdResult { y_exact, y_bar, y_bar_text, k, branch, y_general, etas })
}

/// Smallest multiple of `10^{-k}` that is `>= y`, as a value and as text.
pub fn round_up(y: f64, k: u32) -> (f64, String) {
    let scale = 10f64.powi(k as i32);
    let mut n = (y * scale).ceil() as u64;
    while (n as f64) / scale < y {
        n += 1;
    }
    let text = if k == 0 {
        format!("{n}")
    } else {
        let s = format!("{:0width$}", n, width = k as usize + 1);
        let (int, frac) = s.split_at(s.len() - k as usize);
        format!("{int}.{frac}")
    };
    ((n as f64) / scale, text)
}
