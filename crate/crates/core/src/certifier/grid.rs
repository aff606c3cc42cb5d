use serde::{Deserialize, Serialize};

use super::threshold::ThresholdResult;
use crate::error::{Error, Result};
use crate::lattice::SQRT3_2;

/// Equispaced grid `x_i = i delta` on `[0, 1/2]` and `y_j` from the first
/// aligned value `>= sqrt(3)/2` up to the first aligned value `>= y_top`.
///
/// `delta` is stored as the decimal fraction `step / 10^decimals` so grid
/// coordinates are computed as exactly-rounded quotients of integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta: f64,
    #[serde(rename = "I")]
    pub i_count: usize,
    #[serde(rename = "J")]
    pub j_count: usize,
    pub y1: f64,
    pub y_top: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// `delta = step / 10^decimals` with `step` dividing `10^decimals / 2`.
fn decimal_step(delta: f64) -> Result<(u64, u64)> {
    if !(delta > 0.0) || delta > 0.5 {
        return Err(Error::InvalidGrid(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    for d in 0..=9u32 {
        let den = 10u64.pow(d);
        let scaled = delta * den as f64;
        let step = scaled.round();
        if step >= 1.0 && (scaled - step).abs() <= 1e-9 * scaled {
            let step = step as u64;
            if den % (2 * step) != 0 {
                return Err(Error::InvalidGrid(format!(
                    "delta = {delta} does not divide 1/2 into an integer number of steps"
                )));
            }
            return Ok((step, den));
        }
    }
    Err(Error::InvalidGrid(format!("delta = {delta} is not a decimal fraction with <= 9 digits")))
}

impl GridSpec {
    /// Grid over `[0, 1/2] x [y_lo, y_top]` with the first row the smallest aligned `y >= y_lo`.
    pub fn rectangle(delta: f64, y_lo: f64, y_top: f64) -> Result<Self> {
        if !(y_top >= y_lo) || !(y_lo > 0.0) {
            return Err(Error::InvalidGrid(format!("bad y range [{y_lo}, {y_top}]")));
        }
        let (step, den) = decimal_step(delta)?;
        let at = |i: u64| (i * step) as f64 / den as f64;
        let i_count = (den / (2 * step)) as usize + 1;
        let xs: Vec<f64> = (0..i_count as u64).map(at).collect();

        let first = aligned_ceil(y_lo, step, den, &at);
        let last = aligned_ceil(y_top, step, den, &at).max(first);
        let ys: Vec<f64> = (first..=last).map(at).collect();
        Ok(GridSpec {
            delta: step as f64 / den as f64,
            i_count,
            j_count: ys.len(),
            y1: ys[0],
            y_top: *ys.last().expect("non-empty"),
            xs,
            ys,
        })
    }

    /// Row-major points: `y` outer, `x` inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ys.iter().flat_map(move |&y| self.xs.iter().map(move |&x| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.i_count * self.j_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance from `(x, y)` to the nearest grid point.
    pub fn distance_to_grid(&self, x: f64, y: f64) -> f64 {
        let nearest = |v: f64, axis: &[f64]| {
            axis.iter().map(|a| (a - v).abs()).fold(f64::INFINITY, f64::min)
        };
        nearest(x, &self.xs).hypot(nearest(y, &self.ys))
    }
}

/// Index of the smallest multiple of `step/den` that is `>= v`.
fn aligned_ceil(v: f64, step: u64, den: u64, at: &dyn Fn(u64) -> f64) -> u64 {
    let mut i = (v * den as f64 / step as f64 - 1e-9).ceil().max(0.0) as u64;
    while at(i) < v {
        i += 1;
    }
    while i > 0 && at(i - 1) >= v {
        i -= 1;
    }
    i
}

/// Grid covering the compact region below the threshold height.
pub fn build_grid(threshold: &ThresholdResult, delta: f64) -> Result<GridSpec> {
    let g = GridSpec::rectangle(delta, SQRT3_2, threshold.y_bar)?;
    debug_assert!(g.y1 >= SQRT3_2 && g.y1 - SQRT3_2 < g.delta);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_grid_dimensions() {
        let g = GridSpec::rectangle(0.01, SQRT3_2, 7.52).unwrap();
        assert_eq!(g.i_count, 51);
        assert_eq!(g.j_count, 666);
        assert_eq!(g.y1, 0.87);
        assert_eq!(g.y_top, 7.52);
        assert_eq!(g.xs[0], 0.0);
        assert_eq!(*g.xs.last().unwrap(), 0.5);
        assert!(g.y1 > SQRT3_2);
        for w in g.ys.windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_dividing_delta() {
        assert!(GridSpec::rectangle(0.03, 0.9, 2.0).is_err());
        assert!(GridSpec::rectangle(0.0, 0.9, 2.0).is_err());
        assert!(GridSpec::rectangle(std::f64::consts::PI / 100.0, 0.9, 2.0).is_err());
        assert!(GridSpec::rectangle(0.05, 0.9, 2.0).is_ok());
        assert!(GridSpec::rectangle(0.025, 0.9, 2.0).is_ok());
    }
}
