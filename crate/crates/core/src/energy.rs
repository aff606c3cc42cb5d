//! Lennard-Jones type lattice energies `E_f[L] = a zeta_L(alpha) - b zeta_L(beta)`,
//! their optimal dilations and the zeta quotient
//! `Q(L) = (zeta_L(alpha) - zeta_A2(alpha)) / (zeta_L(beta) - zeta_A2(beta))`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DomainPoint;
use crate::zeta::{epstein_certified, log_weighted_sum, CertifiedValue, TruncationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub alpha: f64,
    pub beta: f64,
}

impl ExponentPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > beta && beta > 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidExponents { alpha, beta });
        }
        Ok(ExponentPair { alpha, beta })
    }

    /// Margin `alpha / beta` the quotient must exceed.
    pub fn ratio(&self) -> f64 {
        self.alpha / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LJParams {
    pub exponents: ExponentPair,
    pub a: f64,
    pub b: f64,
}

impl LJParams {
    /// `b = 0` is accepted as the degenerate purely repulsive case; `a` must be positive.
    pub fn new(exponents: ExponentPair, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "potential coefficients need a > 0 and b >= 0, got a = {a}, b = {b}"
            )));
        }
        Ok(LJParams { exponents, a, b })
    }

    /// The normalisation `a = 1, b = alpha/beta` whose pair potential bottoms out at r = 1.
    pub fn unit_well(exponents: ExponentPair) -> Self {
        LJParams { exponents, a: 1.0, b: exponents.ratio() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub repulsive: f64,
    pub attractive: f64,
}

/// `value = a * parts.repulsive - b * parts.attractive`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub parts: EnergyParts,
}

/// `E_f[sqrt(V) L] = a V^{-alpha/2} zeta_L(alpha) - b V^{-beta/2} zeta_L(beta)`.
pub fn lj_energy(p: &DomainPoint, volume: f64, params: &LJParams, tol: f64) -> Result<EnergyValue> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::InvalidParameter(format!("volume must be positive, got {volume}")));
    }
    let e = params.exponents;
    let za = epstein_certified(p, e.alpha, tol)?.mid;
    let zb = epstein_certified(p, e.beta, tol)?.mid;
    Ok(energy_from_zetas(za, zb, volume, params))
}

fn energy_from_zetas(za: f64, zb: f64, volume: f64, params: &LJParams) -> EnergyValue {
    let e = params.exponents;
    let repulsive = volume.powf(-e.alpha / 2.0) * za;
    let attractive = volume.powf(-e.beta / 2.0) * zb;
    EnergyValue {
        value: params.a * repulsive - params.b * attractive,
        parts: EnergyParts { repulsive, attractive },
    }
}

/// Unique minimiser `V_L = (a alpha zeta_L(alpha) / (b beta zeta_L(beta)))^{2/(alpha-beta)}`
/// of `V -> E_f[sqrt(V) L]`.
pub fn optimal_volume(p: &DomainPoint, params: &LJParams, tol: f64) -> Result<f64> {
    require_attraction(params)?;
    let e = params.exponents;
    let za = epstein_certified(p, e.alpha, tol)?.mid;
    let zb = epstein_certified(p, e.beta, tol)?.mid;
    Ok(volume_from_zetas(za, zb, params))
}

fn volume_from_zetas(za: f64, zb: f64, params: &LJParams) -> f64 {
    let e = params.exponents;
    (params.a * e.alpha * za / (params.b * e.beta * zb)).powf(2.0 / (e.alpha - e.beta))
}

fn require_attraction(params: &LJParams) -> Result<()> {
    if params.b > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("no finite optimal volume without attraction (b = 0)".into()))
    }
}

/// Closed form of `min_V E_f[sqrt(V) L]`; always negative.
pub fn min_dilated_energy(p: &DomainPoint, params: &LJParams, tol: f64) -> Result<f64> {
    require_attraction(params)?;
    let e = params.exponents;
    let za = epstein_certified(p, e.alpha, tol)?.mid;
    let zb = epstein_certified(p, e.beta, tol)?.mid;
    let (a, b) = (params.a, params.b);
    let d = e.alpha - e.beta;
    let ra = e.alpha / d;
    let rb = e.beta / d;
    let q = e.beta / e.alpha;
    Ok((b * zb).powf(ra) / (a * za).powf(rb) * q.powf(rb) * (q - 1.0))
}

/// Upper bound `(a alpha / (b beta))^{2/(alpha-beta)}` on the covolume of a global minimiser.
pub fn global_volume_bound(params: &LJParams) -> Result<f64> {
    require_attraction(params)?;
    let e = params.exponents;
    Ok((params.a * e.alpha / (params.b * e.beta)).powf(2.0 / (e.alpha - e.beta)))
}

type CacheKey = (u64, u64);

fn triangular_cache() -> &'static RwLock<HashMap<CacheKey, CertifiedValue>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, CertifiedValue>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `zeta_A2(s)` to tolerance `tol`, memoised on the exact bits of `(s, tol)`.
pub fn triangular_zeta(s: f64, tol: f64) -> Result<CertifiedValue> {
    let key = (s.to_bits(), tol.to_bits());
    if let Some(v) = triangular_cache().read().expect("cache poisoned").get(&key) {
        return Ok(*v);
    }
    let v = epstein_certified(&DomainPoint::TRIANGULAR, s, tol)?;
    // a racing writer computes the identical value, so last write wins harmlessly
    triangular_cache().write().expect("cache poisoned").insert(key, v);
    Ok(v)
}

/// Enclosure of the quotient from enclosures of its four zeta values.
pub fn quotient_from_parts(
    p: &DomainPoint,
    za: &CertifiedValue,
    zb: &CertifiedValue,
    ref_a: &CertifiedValue,
    ref_b: &CertifiedValue,
) -> Result<CertifiedValue> {
    let num = za.interval() - ref_a.interval();
    let den = zb.interval() - ref_b.interval();
    if den.lo <= 0.0 {
        return Err(Error::NearTriangular { x: p.x, y: p.y });
    }
    let q = num.checked_div(den).ok_or(Error::NearTriangular { x: p.x, y: p.y })?;
    Ok(CertifiedValue::from_interval(q))
}

/// Certified enclosure of `Q_{alpha,beta}` at `p`; each of the four zeta values
/// is evaluated to `tol / 4`.
pub fn quotient_q(p: &DomainPoint, e: &ExponentPair, tol: f64) -> Result<CertifiedValue> {
    let t = tol / 4.0;
    let ra = triangular_zeta(e.alpha, t)?;
    let rb = triangular_zeta(e.beta, t)?;
    let za = epstein_certified(p, e.alpha, t)?;
    let zb = epstein_certified(p, e.beta, t)?;
    quotient_from_parts(p, &za, &zb, &ra, &rb)
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureScan {
    pub s: f64,
    pub truncation: u32,
    pub points: Vec<ScanPoint>,
    pub argmin: ScanPoint,
}

/// Evaluates `F_s` on every point of `grid` (row-major in `y`, then `x`).
pub fn conjecture_scan(
    s: f64,
    grid: &crate::certifier::GridSpec,
    t: TruncationSpec,
) -> Result<ConjectureScan> {
    if !(s > 2.0) {
        return Err(Error::DivergentExponent { s, min: 2.0 });
    }
    let coords: Vec<(f64, f64)> = grid.points().collect();
    let values: Vec<Result<f64>> = coords
        .par_iter()
        .map(|&(x, y)| log_weighted_sum(&DomainPoint::new(x, y)?, s, t))
        .collect();
    let mut points = Vec::with_capacity(coords.len());
    for ((x, y), v) in coords.into_iter().zip(values) {
        points.push(ScanPoint { x, y, value: v? });
    }
    let argmin = points
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
    Ok(ConjectureScan { s, truncation: t.n, points, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn pair(a: f64, b: f64) -> ExponentPair {
        ExponentPair::new(a, b).unwrap()
    }

    #[test]
    fn exponent_pair_validation() {
        assert!(ExponentPair::new(6.0, 12.0).is_err());
        assert!(ExponentPair::new(12.0, 2.0).is_err());
        assert!(ExponentPair::new(6.0, 6.0).is_err());
        assert!(LJParams::new(pair(12.0, 6.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn triangular_energy_example() {
        let params = LJParams::new(pair(12.0, 6.0), 1.0, 2.0).unwrap();
        let e = lj_energy(&DomainPoint::TRIANGULAR, 1.0, &params, TOL).unwrap();
        assert!((e.value - (2.5354 - 2.0 * 4.1413)).abs() < 2e-3, "{}", e.value);
        assert!((e.value - (e.parts.repulsive - 2.0 * e.parts.attractive)).abs() < 1e-15);
    }

    #[test]
    fn energy_large_volume_and_repulsive_only() {
        let params = LJParams::new(pair(12.0, 6.0), 1.0, 1.0).unwrap();
        let p = DomainPoint::new(0.1, 1.3).unwrap();
        let far = lj_energy(&p, 1e3, &params, TOL).unwrap();
        assert!(far.value < 0.0 && far.value > -1e-8);
        let rep = LJParams::new(pair(12.0, 6.0), 1.0, 0.0).unwrap();
        let e = lj_energy(&p, 1.5, &rep, TOL).unwrap();
        assert!(e.value > 0.0);
        let z12 = epstein_certified(&p, 12.0, TOL).unwrap().mid;
        assert!((e.value - 1.5f64.powf(-6.0) * z12).abs() < 1e-14);
        assert!(optimal_volume(&p, &rep, TOL).is_err());
    }

    #[test]
    fn optimal_volume_examples() {
        let params = LJParams::new(pair(12.0, 6.0), 1.0, 1.0).unwrap();
        let v = optimal_volume(&DomainPoint::TRIANGULAR, &params, TOL).unwrap();
        let za = triangular_zeta(12.0, TOL).unwrap().mid;
        let zb = triangular_zeta(6.0, TOL).unwrap().mid;
        assert!((v - (2.0 * za / zb).powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((v - 1.07).abs() < 0.01, "{v}");
        let params8 = LJParams::new(pair(12.0, 6.0), 8.0, 1.0).unwrap();
        let v8 = optimal_volume(&DomainPoint::TRIANGULAR, &params8, TOL).unwrap();
        assert!((v8 / v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_volume_is_stationary() {
        let params = LJParams::new(pair(12.0, 6.0), 1.0, 2.0).unwrap();
        let p = DomainPoint::new(0.25, 1.4).unwrap();
        let v = optimal_volume(&p, &params, TOL).unwrap();
        let h = 1e-6 * v;
        let e = |vv: f64| lj_energy(&p, vv, &params, TOL).unwrap().value;
        let d = (e(v + h) - e(v - h)) / (2.0 * h);
        assert!(d.abs() < 1e-6 * e(v).abs(), "{d}");
    }

    #[test]
    fn min_dilated_matches_golden_section() {
        let params = LJParams::new(pair(12.0, 6.0), 1.0, 2.0).unwrap();
        let p = DomainPoint::TRIANGULAR;
        let closed = min_dilated_energy(&p, &params, TOL).unwrap();
        assert!(closed < 0.0);
        // golden-section line search over V
        let f = |v: f64| lj_energy(&p, v, &params, TOL).unwrap().value;
        let (mut a, mut b) = (0.3, 3.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..120 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let line = f(0.5 * (a + b));
        assert!((line - closed).abs() < 1e-10 * closed.abs(), "{line} vs {closed}");
    }

    #[test]
    fn global_bound_examples() {
        let p = LJParams::new(pair(12.0, 6.0), 1.0, 2.0).unwrap();
        assert!((global_volume_bound(&p).unwrap() - 1.0).abs() < 1e-15);
        let p = LJParams::new(pair(12.0, 6.0), 1.0, 1.0).unwrap();
        assert!((global_volume_bound(&p).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let q = LJParams::new(pair(12.0, 6.0), 7.0, 7.0).unwrap();
        assert!((global_volume_bound(&q).unwrap() - global_volume_bound(&p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn quotient_examples() {
        let e = pair(12.0, 6.0);
        let q = quotient_q(&DomainPoint::SQUARE, &e, 1e-9).unwrap();
        assert!((q.mid - 2.953).abs() < 2e-3, "{q:?}");
        assert!(q.lo() > 2.0);
        let high = quotient_q(&DomainPoint::new(0.0, 7.52).unwrap(), &e, 1e-6).unwrap();
        assert!(high.lo() > 100.0, "{high:?}");
        let near = quotient_q(&DomainPoint::TRIANGULAR, &e, 1e-9);
        assert!(matches!(near, Err(Error::NearTriangular { .. })));
    }

    #[test]
    fn quotient_depends_only_on_lattice() {
        let e = pair(12.0, 6.0);
        // (0.24, 0.97) is below the unit circle; reduce it and compare
        let p = DomainPoint::new(0.24, 0.97).unwrap();
        let (r, _) = crate::lattice::reduce_to_domain(&crate::lattice::basis_from_domain_point(&p)).unwrap();
        let a = quotient_q(&p, &e, 1e-9).unwrap();
        let b = quotient_q(&r, &e, 1e-9).unwrap();
        assert!((a.mid - b.mid).abs() <= a.rad + b.rad + 1e-9);
    }
}
