//! Epstein and Riemann zeta functions with certified truncation radii.
//!
//! Lattice sums run over the index box `|m|, |n| <= N` shell by shell
//! (`max(|m|, |n|) = k`, `k = 1..=N`). Each shell is accumulated naively and
//! the shell totals are combined with compensated summation in increasing `k`,
//! so results do not depend on how callers parallelise over lattices.
//! Only half of every shell is visited: terms are even under `(m, n) -> (-m, -n)`.
//!
//! Truncation radii come from the bound `Q_L(m, n) >= (m^2 + n^2) / c`
//! (see [`crate::lattice::norm_ratio_bound`]) together with the fact that at
//! most `8 k` index pairs lie on shell `k`:
//! `zeta_L(s) - zeta_L^N(s) <= 8 c^{s/2} N^{2-s} / (s - 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::{norm_ratio_bound, DomainPoint};

/// Truncation order used by the published (12,6) computation.
pub const PAPER_TRUNCATION: u32 = 40;

/// Largest truncation order certified evaluation will reach for.
pub const MAX_TRUNCATION: u32 = 20_000;

/// Half-width `N` of the summation box `|m|, |n| <= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub n: u32,
}

impl TruncationSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("truncation order N must be >= 1".into()));
        }
        Ok(TruncationSpec { n })
    }

    pub fn paper() -> Self {
        TruncationSpec { n: PAPER_TRUNCATION }
    }

    /// Number of nonzero index pairs in the box.
    pub fn term_count(&self) -> u64 {
        let n = self.n as u64;
        4 * n * (n + 1)
    }
}

/// A real number with an absolute error radius: the true value lies in
/// `[mid - rad, mid + rad]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub mid: f64,
    pub rad: f64,
}

impl CertifiedValue {
    pub fn new(mid: f64, rad: f64) -> Self {
        debug_assert!(rad >= 0.0);
        CertifiedValue { mid, rad }
    }

    pub fn exact(v: f64) -> Self {
        CertifiedValue { mid: v, rad: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        (self.mid - self.rad).next_down()
    }

    pub fn hi(&self) -> f64 {
        (self.mid + self.rad).next_up()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo() <= v && v <= self.hi()
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo(), self.hi())
    }

    pub fn from_interval(i: Interval) -> Self {
        CertifiedValue { mid: i.mid(), rad: i.rad() }
    }

    pub fn sub(&self, o: &CertifiedValue) -> CertifiedValue {
        CertifiedValue::from_interval(self.interval() - o.interval())
    }

    pub fn scale(&self, k: f64) -> CertifiedValue {
        CertifiedValue::from_interval(self.interval().scale(k))
    }
}

/// `q -> q^{-s/2}`, with a multiply-only path when `s/2` is an integer.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Decay {
    Int(u32),
    Real(f64),
}

impl Decay {
    pub(crate) fn new(s: f64) -> Self {
        let h = s / 2.0;
        if h.fract() == 0.0 && h > 0.0 && h <= 64.0 {
            Decay::Int(h as u32)
        } else {
            Decay::Real(-h)
        }
    }

    #[inline(always)]
    pub(crate) fn eval(self, q: f64) -> f64 {
        match self {
            Decay::Int(k) => {
                let mut base = q.recip();
                let mut e = k;
                let mut acc = 1.0;
                while e > 0 {
                    if e & 1 == 1 {
                        acc *= base;
                    }
                    base *= base;
                    e >>= 1;
                }
                acc
            }
            Decay::Real(p) => q.powf(p),
        }
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Result of a truncated lattice sum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatticeSum {
    pub value: f64,
    /// Sum of absolute values of the terms, for the rounding bound.
    pub abs: f64,
    /// `sum_k 4k |shell_k|`: shell `k` is summed naively over `4k` terms.
    pub weighted: f64,
    pub n: u32,
}

impl LatticeSum {
    /// Worst-case accumulated rounding, given `ops` roundings per term: naive
    /// summation inside each shell, per-term evaluation error, and the
    /// compensated combination of shell totals. Inflated by 1% for the
    /// neglected second-order terms.
    pub(crate) fn rounding_bound(&self, ops: f64) -> f64 {
        1.01 * f64::EPSILON * (self.weighted + (ops + 8.0) * self.abs)
    }

    pub(crate) fn terms(&self) -> u64 {
        TruncationSpec { n: self.n }.term_count()
    }
}

/// Per-term rounding budget for `q^{-s/2}` style terms.
pub(crate) fn term_ops(s: f64) -> f64 {
    8.0 + 3.0 * s
}

/// Sums `term(u, n)` over the nonzero box `|m|, |n| <= N`, where `u = m + x n`.
/// `term` must be even under `(m, n) -> (-m, -n)`.
#[inline(always)]
pub(crate) fn lattice_sum<F>(x: f64, n_max: u32, mut term: F) -> LatticeSum
where
    F: FnMut(f64, f64) -> f64,
{
    let mut total = Compensated::default();
    let mut abs_total = Compensated::default();
    let mut weighted = 0.0;
    for k in 1..=n_max as i64 {
        let kf = k as f64;
        let mut shell = 0.0;
        let mut shell_abs = 0.0;
        // row n = k, m = -k..=k
        let xk = x * kf;
        for m in -k..=k {
            let t = term(m as f64 + xk, kf);
            shell += t;
            shell_abs += t.abs();
        }
        // column m = k, n = -(k-1)..=(k-1)
        for n in -(k - 1)..=(k - 1) {
            let nf = n as f64;
            let t = term(kf + x * nf, nf);
            shell += t;
            shell_abs += t.abs();
        }
        total.add(shell);
        abs_total.add(shell_abs);
        weighted += 4.0 * kf * shell_abs;
    }
    LatticeSum {
        value: 2.0 * total.value(),
        abs: 2.0 * abs_total.value(),
        weighted: 2.0 * weighted,
        n: n_max,
    }
}

fn check_exponent(s: f64, min: f64) -> Result<()> {
    if !(s > min) || !s.is_finite() {
        return Err(Error::DivergentExponent { s, min });
    }
    Ok(())
}

pub(crate) fn epstein_sum(p: &DomainPoint, s: f64, n: u32) -> LatticeSum {
    let decay = Decay::new(s);
    let inv_y = p.y.recip();
    let y = p.y;
    lattice_sum(p.x, n, |u, n| decay.eval(u * u * inv_y + y * n * n))
}

/// `zeta_L^N(s)`: the Epstein zeta function truncated to `|m|, |n| <= N`.
pub fn epstein_partial(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<f64> {
    check_exponent(s, 2.0)?;
    Ok(epstein_sum(p, s, t.n).value)
}

/// Upper bound on `zeta_L(s) - zeta_L^N(s)`, uniform over `x` in `[0, 1/2]`
/// for reduced shapes with height `y`: `(2y)^{s/2} 8 N^{2-s} / (s - 2)`.
pub fn epstein_tail_bound(y: f64, s: f64, t: TruncationSpec) -> Result<f64> {
    check_exponent(s, 2.0)?;
    if !(y > 0.0) {
        return Err(Error::InvalidParameter(format!("y must be positive, got {y}")));
    }
    Ok(tail_from_ratio(2.0 * y, s, t.n))
}

/// Truncation bound at a specific shape, valid also off the reduced domain.
pub fn tail_bound_at(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<f64> {
    check_exponent(s, 2.0)?;
    Ok(tail_from_ratio(norm_ratio_bound(p.x, p.y), s, t.n))
}

pub(crate) fn tail_from_ratio(c: f64, s: f64, n: u32) -> f64 {
    8.0 * c.powf(s / 2.0) * (n as f64).powf(2.0 - s) / (s - 2.0)
}

/// Smallest `N` with `tail_from_ratio(c, s, N) <= target`, if it is at most `cap`.
pub(crate) fn truncation_for(c: f64, s: f64, target: f64, cap: u32) -> Option<u32> {
    let guess = (8.0 * c.powf(s / 2.0) / ((s - 2.0) * target)).powf(1.0 / (s - 2.0));
    if !guess.is_finite() || guess > cap as f64 * 1.01 + 2.0 {
        return None;
    }
    let mut n = (guess.ceil() as u32).max(1);
    while n > 1 && tail_from_ratio(c, s, n - 1) <= target {
        n -= 1;
    }
    while tail_from_ratio(c, s, n) > target {
        n += 1;
    }
    (n <= cap).then_some(n)
}

/// Epstein zeta value with radius at most `tol`.
///
/// `N` is the smallest order whose truncation bound is within `tol / 2`;
/// the radius is that bound plus the summation rounding bound.
pub fn epstein_certified(p: &DomainPoint, s: f64, tol: f64) -> Result<CertifiedValue> {
    epstein_certified_with_terms(p, s, tol).map(|(v, _)| v)
}

pub(crate) fn epstein_certified_with_terms(
    p: &DomainPoint,
    s: f64,
    tol: f64,
) -> Result<(CertifiedValue, u64)> {
    check_exponent(s, 2.0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let c = norm_ratio_bound(p.x, p.y);
    let n = truncation_for(c, s, tol / 2.0, MAX_TRUNCATION).ok_or(Error::ToleranceUnreachable {
        tol,
        achieved: tail_from_ratio(c, s, MAX_TRUNCATION),
    })?;
    let sum = epstein_sum(p, s, n);
    let rad = tail_from_ratio(c, s, n) + sum.rounding_bound(term_ops(s));
    if rad > tol {
        return Err(Error::ToleranceUnreachable { tol, achieved: rad });
    }
    Ok((CertifiedValue::new(sum.value, rad), sum.terms()))
}

/// Smallest relative radius requested from certified sums; absolute tolerances
/// below `RELATIVE_FLOOR * zeta` are not representable in double precision.
pub const RELATIVE_FLOOR: f64 = 1e-12;

/// `max(tol, RELATIVE_FLOOR * zeta_L(s))`, using the first shell as a lower bound for `zeta_L(s)`.
pub fn attainable_tol(p: &DomainPoint, s: f64, tol: f64) -> f64 {
    tol.max(RELATIVE_FLOOR * epstein_sum(p, s, 1).value)
}

/// Epstein zeta value truncated at a fixed order, with its certified radius.
pub fn epstein_at_order(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<CertifiedValue> {
    check_exponent(s, 2.0)?;
    let sum = epstein_sum(p, s, t.n);
    let rad = tail_bound_at(p, s, t)? + sum.rounding_bound(term_ops(s));
    Ok(CertifiedValue::new(sum.value, rad))
}

/// `sum_{m=1}^{N} m^{-s}`, accumulated from the small end.
pub fn riemann_partial(s: f64, n: u64) -> Result<f64> {
    check_exponent(s, 1.0)?;
    Ok(riemann_sum(s, n))
}

fn riemann_sum(s: f64, n: u64) -> f64 {
    let decay = Decay::new(2.0 * s);
    let mut acc = Compensated::default();
    for m in (1..=n).rev() {
        let mf = m as f64;
        acc.add(decay.eval(mf));
    }
    acc.value()
}

/// Bound `s/(s-1) N^{1-s}` on the Riemann zeta tail after `N` terms.
pub fn riemann_tail_bound(s: f64, n: u64) -> Result<f64> {
    check_exponent(s, 1.0)?;
    Ok(s / (s - 1.0) * (n as f64).powf(1.0 - s))
}

/// Riemann zeta value with radius at most `tol`.
pub fn riemann_certified(s: f64, tol: f64) -> Result<CertifiedValue> {
    check_exponent(s, 1.0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    const CAP: u64 = 50_000_000;
    let target = tol / 2.0;
    let guess = (s / ((s - 1.0) * target)).powf(1.0 / (s - 1.0));
    if !guess.is_finite() || guess > CAP as f64 {
        return Err(Error::ToleranceUnreachable { tol, achieved: f64::INFINITY });
    }
    let bound = |n: u64| s / (s - 1.0) * (n as f64).powf(1.0 - s);
    let mut n = (guess.ceil() as u64).max(1);
    while n > 1 && bound(n - 1) <= target {
        n -= 1;
    }
    while bound(n) > target {
        n += 1;
    }
    let mid = riemann_sum(s, n);
    // terms are added from the small end, so each partial sum is at most `mid`
    let rad = bound(n) + (n as f64 + term_ops(s) + 8.0) * f64::EPSILON * mid;
    if rad > tol {
        return Err(Error::ToleranceUnreachable { tol, achieved: rad });
    }
    Ok(CertifiedValue::new(mid, rad))
}

/// `(d/dx, d/dy)` of the truncated Epstein zeta function in shape coordinates.
pub fn epstein_gradient(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<(f64, f64)> {
    check_exponent(s, 2.0)?;
    let (gx, gy) = gradient_sums(p, s, t.n);
    Ok((gx.value, gy.value))
}

pub(crate) fn gradient_sums(p: &DomainPoint, s: f64, n: u32) -> (LatticeSum, LatticeSum) {
    let decay = Decay::new(s + 2.0);
    let (x, y) = (p.x, p.y);
    let y2 = y * y;
    let sx = lattice_sum(x, n, |u, n| n * u * decay.eval(u * u + y2 * n * n));
    let sy = lattice_sum(x, n, |u, n| (u * u - y2 * n * n) * decay.eval(u * u + y2 * n * n));
    let kx = -s * y.powf(s / 2.0);
    let ky = 0.5 * s * y.powf(s / 2.0 - 1.0);
    (
        LatticeSum { value: kx * sx.value, abs: kx.abs() * sx.abs, weighted: kx.abs() * sx.weighted, n },
        LatticeSum { value: ky * sy.value, abs: ky.abs() * sy.abs, weighted: ky.abs() * sy.weighted, n },
    )
}

/// Bound on each gradient component of the Epstein tail beyond order `N`.
///
/// Per term `|d_x Q|, |d_y Q| <= Q / y`, so each component of the tail is at
/// most `s / (2 y)` times the zeta tail.
pub fn gradient_tail_bound(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<f64> {
    Ok(0.5 * s / p.y * tail_bound_at(p, s, t)?)
}

/// `F_s(L) = -sum' (s log|p| + 1) / |p|^s`, truncated at `N`.
pub fn log_weighted_sum(p: &DomainPoint, s: f64, t: TruncationSpec) -> Result<f64> {
    check_exponent(s, 2.0)?;
    let decay = Decay::new(s);
    let (x, y) = (p.x, p.y);
    let inv_y = y.recip();
    let half_s = 0.5 * s;
    let sum = lattice_sum(x, t.n, |u, n| {
        let q = u * u * inv_y + y * n * n;
        (half_s * q.ln() + 1.0) * decay.eval(q)
    });
    Ok(-sum.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::quadratic_form;

    // Independent oracles: plain double loops over the full box.
    fn brute_zeta(p: &DomainPoint, s: f64, n: i64) -> f64 {
        let mut acc = 0.0;
        for m in -n..=n {
            for k in -n..=n {
                if (m, k) != (0, 0) {
                    acc += quadratic_form(p, m, k).powf(-s / 2.0);
                }
            }
        }
        acc
    }

    // Catalan-type Dirichlet beta by alternating series with Euler averaging.
    fn dirichlet_beta(k: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..2_000_000u64 {
            let t = ((2 * j + 1) as f64).powf(-k);
            acc += if j % 2 == 0 { t } else { -t };
        }
        acc
    }

    fn riemann_brute(k: f64) -> f64 {
        (1..=1_000_000u64).rev().map(|m| (m as f64).powf(-k)).sum()
    }

    #[test]
    fn partial_sum_square_n1() {
        let v = epstein_partial(&DomainPoint::SQUARE, 6.0, TruncationSpec::new(1).unwrap()).unwrap();
        assert!((v - 4.5).abs() < 1e-15);
    }

    #[test]
    fn partial_matches_brute_force() {
        let p = DomainPoint::new(0.3, 1.7).unwrap();
        for &s in &[3.3, 6.0, 12.0] {
            let a = epstein_partial(&p, s, TruncationSpec::new(25).unwrap()).unwrap();
            let b = brute_zeta(&p, s, 25);
            assert!((a - b).abs() < 1e-13 * b, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn square_lattice_matches_beta_identity() {
        // zeta_{Z^2}(2k) = 4 zeta(k) beta(k)
        let oracle = 4.0 * riemann_brute(3.0) * dirichlet_beta(3.0);
        let direct = brute_zeta(&DomainPoint::SQUARE, 6.0, 200);
        assert!((oracle - 4.658_913_6).abs() < 1e-6);
        assert!((direct - oracle).abs() < 1e-6);
        let c = epstein_certified(&DomainPoint::SQUARE, 6.0, 1e-8).unwrap();
        assert!(c.contains(oracle) || (c.mid - oracle).abs() < 1e-10);
    }

    #[test]
    fn triangular_below_square_at_six() {
        let a2 = epstein_partial(&DomainPoint::TRIANGULAR, 6.0, TruncationSpec::new(200).unwrap()).unwrap();
        let sq = epstein_partial(&DomainPoint::SQUARE, 6.0, TruncationSpec::new(200).unwrap()).unwrap();
        assert!((a2 - 4.1413).abs() < 1e-3);
        assert!(a2 < sq);
    }

    #[test]
    fn certified_twelve() {
        let c = epstein_certified(&DomainPoint::SQUARE, 12.0, 1e-8).unwrap();
        assert!(c.rad <= 1e-8);
        let oracle = 4.0 * riemann_brute(6.0) * dirichlet_beta(6.0);
        assert!((c.mid - oracle).abs() <= c.rad + 1e-12);
        assert!((c.mid - 4.0640).abs() < 1e-4);
        let t = epstein_certified(&DomainPoint::TRIANGULAR, 12.0, 1e-8).unwrap();
        let brute = brute_zeta(&DomainPoint::TRIANGULAR, 12.0, 200);
        assert!((t.mid - brute).abs() <= t.rad + 1e-12);
        assert!((t.mid - 2.5354).abs() < 1e-3);
    }

    #[test]
    fn certified_homogeneity_brackets_scaled_sum() {
        let p = DomainPoint::new(0.2, 1.4).unwrap();
        let c = epstein_certified(&p, 6.0, 1e-9).unwrap();
        let v: f64 = 4.0;
        let basis = crate::lattice::basis_from_domain_point(&p).scaled(v.sqrt());
        let mut direct = 0.0;
        for m in -300i64..=300 {
            for n in -300i64..=300 {
                if (m, n) != (0, 0) {
                    direct += basis.norm_sq(m, n).powf(-3.0);
                }
            }
        }
        let scaled = c.scale(v.powf(-3.0));
        assert!((direct - scaled.mid).abs() <= scaled.rad + 1e-12);
    }

    #[test]
    fn tail_bound_examples() {
        let b = epstein_tail_bound(7.52, 12.0, TruncationSpec::new(40).unwrap()).unwrap();
        assert!((b - 8.8e-10).abs() < 0.1e-10, "{b}");
        let b = epstein_tail_bound(7.52, 6.0, TruncationSpec::new(100).unwrap()).unwrap();
        assert!((b - 6.8e-5).abs() < 0.1e-5, "{b}");
        for n in [1, 5, 40, 300] {
            let a = epstein_tail_bound(1.3, 4.5, TruncationSpec::new(n).unwrap()).unwrap();
            let b = epstein_tail_bound(1.3, 4.5, TruncationSpec::new(2 * n).unwrap()).unwrap();
            assert!(b < a);
        }
    }

    #[test]
    fn rejects_divergent_exponents() {
        let t = TruncationSpec::new(3).unwrap();
        let p = DomainPoint::SQUARE;
        assert!(matches!(epstein_partial(&p, 2.0, t), Err(Error::DivergentExponent { .. })));
        assert!(epstein_tail_bound(1.0, 1.5, t).is_err());
        assert!(epstein_gradient(&p, 2.0, t).is_err());
        assert!(log_weighted_sum(&p, -1.0, t).is_err());
        assert!(riemann_certified(1.0, 1e-8).is_err());
        assert!(epstein_certified(&p, f64::NAN, 1e-8).is_err());
    }

    #[test]
    fn unreachable_tolerance_fails_loudly() {
        let r = epstein_certified(&DomainPoint::new(0.0, 7.0).unwrap(), 6.0, 1e-16);
        assert!(matches!(r, Err(Error::ToleranceUnreachable { .. })));
        assert!(matches!(riemann_certified(1.01, 1e-15), Err(Error::ToleranceUnreachable { .. })));
    }

    #[test]
    fn riemann_values() {
        let pi = std::f64::consts::PI;
        let z12 = riemann_certified(12.0, 1e-12).unwrap();
        assert!(z12.contains(691.0 * pi.powi(12) / 638_512_875.0));
        assert!((z12.mid - 1.000246).abs() < 1e-6);
        let z6 = riemann_certified(6.0, 1e-12).unwrap();
        assert!(z6.contains(pi.powi(6) / 945.0));
        let a = riemann_partial(6.0, 10).unwrap();
        let b = riemann_partial(6.0, 40).unwrap();
        assert!((b - a).abs() <= riemann_tail_bound(6.0, 10).unwrap());
    }

    #[test]
    fn gradient_examples() {
        let t = TruncationSpec::new(60).unwrap();
        let (dx, _) = epstein_gradient(&DomainPoint::SQUARE, 6.0, t).unwrap();
        assert!(dx.abs() < 1e-12);
        let (dx, dy) = epstein_gradient(&DomainPoint::TRIANGULAR, 6.0, t).unwrap();
        let tail = gradient_tail_bound(&DomainPoint::TRIANGULAR, 6.0, t).unwrap();
        assert!(dx.abs() <= tail && dy.abs() <= tail, "{dx} {dy} {tail}");

        let p = DomainPoint::new(0.2, 1.1).unwrap();
        let (dx, dy) = epstein_gradient(&p, 6.0, t).unwrap();
        let h = 1e-6;
        let f = |x: f64, y: f64| epstein_partial(&DomainPoint::new(x, y).unwrap(), 6.0, t).unwrap();
        let fdx = (f(p.x + h, p.y) - f(p.x - h, p.y)) / (2.0 * h);
        let fdy = (f(p.x, p.y + h) - f(p.x, p.y - h)) / (2.0 * h);
        assert!((dx - fdx).abs() < 1e-4 * fdx.abs(), "{dx} {fdx}");
        assert!((dy - fdy).abs() < 1e-4 * fdy.abs(), "{dy} {fdy}");
    }

    #[test]
    fn log_weighted_identity_and_stability() {
        let t = TruncationSpec::new(80).unwrap();
        let p = DomainPoint::SQUARE;
        let s = 8.0;
        let h = 1e-5;
        let z = |s: f64| epstein_partial(&p, s, t).unwrap();
        let ds = (z(s + h) - z(s - h)) / (2.0 * h);
        let f = log_weighted_sum(&p, s, t).unwrap();
        let rhs = s * ds - z(s);
        assert!((f - rhs).abs() < 1e-4 * rhs.abs(), "{f} vs {rhs}");

        let q = DomainPoint::new(0.3, 1.5).unwrap();
        let a = log_weighted_sum(&q, 6.0, TruncationSpec::new(50).unwrap()).unwrap();
        let b = log_weighted_sum(&q, 6.0, TruncationSpec::new(100).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-5, "{}", (a - b).abs());

        let t = TruncationSpec::new(100).unwrap();
        let fa = log_weighted_sum(&DomainPoint::TRIANGULAR, 12.0, t).unwrap();
        let fs = log_weighted_sum(&DomainPoint::SQUARE, 12.0, t).unwrap();
        assert!(fa < fs);
    }

    #[test]
    fn decay_paths_agree() {
        for &q in &[0.3, 1.0, 2.7, 91.0] {
            for k in 1..=15u32 {
                let a = Decay::Int(k).eval(q);
                let b = q.powf(-(k as f64));
                assert!((a - b).abs() <= 1e-14 * b);
            }
        }
    }
}
