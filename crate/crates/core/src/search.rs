//! One-dimensional global maximization: exhaustive coarse grid, then
//! golden-section refinement inside the bracket around the best grid point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Lower edge of the search interval (radians).
    pub lo: f64,
    /// Upper edge of the search interval (radians).
    pub hi: f64,
    pub coarse_step: f64,
    pub refine_tol: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let half = std::f64::consts::FRAC_PI_2;
        if !(self.lo < self.hi) {
            return Err(Error::invalid("search span is empty"));
        }
        if !(self.lo > -half && self.hi < half) {
            return Err(Error::invalid("search span must lie inside (-90°, 90°)"));
        }
        if !(self.coarse_step > 0.0) || !(self.refine_tol > 0.0) {
            return Err(Error::invalid("search steps must be positive"));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Coarse grid covering `[lo, hi]` with both edges included.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.coarse_step).ceil().max(1.0) as usize;
        let step = (self.hi - self.lo) / n as f64;
        (0..=n).map(|i| self.lo + i as f64 * step).collect()
    }

    /// Global argmax of `f`. Grid ties go to the point closest to `prefer`.
    pub fn argmax<F: Fn(f64) -> f64>(&self, f: F, prefer: f64) -> Result<f64> {
        self.validate()?;
        let grid = self.grid();
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &x) in grid.iter().enumerate() {
            let v = f(x);
            if v > best_val || (v == best_val && (x - prefer).abs() < (grid[best] - prefer).abs()) {
                best = i;
                best_val = v;
            }
        }
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(grid.len() - 1)];
        let x = golden_max(&f, a, b, self.refine_tol);
        // the refined point must not be worse than the grid winner
        Ok(if f(x) >= best_val { x } else { grid[best] })
    }
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_global_among_local_maxima() {
        let cfg = SearchConfig {
            lo: -1.5,
            hi: 1.5,
            coarse_step: 0.01,
            refine_tol: 1e-9,
        };
        // local max near -1, global at 0.8123
        let f = |x: f64| -(x - 0.8123).powi(2) + 0.5 * (-(x + 1.0).powi(2) * 50.0).exp() - 0.0;
        let x = cfg.argmax(f, 0.0).unwrap();
        assert!((x - 0.8123).abs() < 1e-8);
    }

    #[test]
    fn edge_maximum() {
        let cfg = SearchConfig {
            lo: -0.5,
            hi: 0.5,
            coarse_step: 0.1,
            refine_tol: 1e-9,
        };
        let x = cfg.argmax(|x| x, 0.0).unwrap();
        assert!((x - 0.5).abs() < 1e-8);
    }

    #[test]
    fn ties_prefer_reference() {
        let cfg = SearchConfig {
            lo: -1.0,
            hi: 1.0,
            coarse_step: 0.5,
            refine_tol: 1e-6,
        };
        let x = cfg.argmax(|_| 1.0, 0.4).unwrap();
        assert!((x - 0.5).abs() <= 0.5 + 1e-12);
    }

    #[test]
    fn rejects_bad_spans() {
        let cfg = SearchConfig {
            lo: 0.1,
            hi: 0.1,
            coarse_step: 0.01,
            refine_tol: 1e-6,
        };
        assert!(cfg.argmax(|x| x, 0.0).is_err());
        let cfg = SearchConfig {
            lo: -2.0,
            hi: 0.1,
            coarse_step: 0.01,
            refine_tol: 1e-6,
        };
        assert!(cfg.argmax(|x| x, 0.0).is_err());
    }
}
