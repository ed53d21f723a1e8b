//! Piecewise-cubic Hermite representation of u₂(η) on [α₀, ξ].

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};

/// Minimum number of grid nodes a profile may have.
pub const MIN_NODES: usize = 33;

/// A C¹ piecewise-cubic function given by node values and node slopes.
///
/// Profiles produced by the integral operators carry exact slopes; profiles
/// built from values alone get monotone (Fritsch–Carlson) slopes, which keep
/// the interpolant inside the data range on every panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// `n` equally spaced nodes on [lo, hi], with the end points exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    g[n - 1] = hi;
    g
}

impl ProfileFunction {
    /// Profile from node values, slopes and grid.
    pub fn from_hermite(grid: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() || slopes.len() != grid.len() {
            return Err(StefanError::invalid(
                "profile",
                "grid, values and slopes lengths differ",
            ));
        }
        if !values.iter().chain(&slopes).all(|v| v.is_finite()) {
            return Err(StefanError::invalid("profile", "non-finite node data"));
        }
        Ok(ProfileFunction { grid, values, slopes })
    }

    /// Profile from node values with monotone slopes.
    pub fn from_values(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(StefanError::invalid("profile", "grid and values lengths differ"));
        }
        let slopes = monotone_slopes(&grid, &values);
        Self::from_hermite(grid, values, slopes)
    }

    /// Sample `f` on `n` uniform nodes over [lo, hi].
    pub fn uniform(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) || n < MIN_NODES {
            return Err(StefanError::invalid(
                "profile",
                format!("need hi > lo and at least {MIN_NODES} nodes (got [{lo}, {hi}], n = {n})"),
            ));
        }
        let grid = linspace(lo, hi, n);
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Left end of the domain (α₀).
    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    /// Right end of the domain (ξ).
    pub fn end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// True if `eta` lies in the domain, allowing a relative slack of a few ulps.
    pub fn contains(&self, eta: f64) -> bool {
        let slack = 4.0 * f64::EPSILON * self.end().abs().max(1.0);
        eta >= self.start() - slack && eta <= self.end() + slack
    }

    /// Index of the panel [grid[i], grid[i+1]] containing `eta` (clamped).
    pub fn panel_of(&self, eta: f64) -> usize {
        let n = self.grid.len();
        let i = self.grid.partition_point(|&x| x <= eta);
        i.clamp(1, n - 1) - 1
    }

    /// Evaluate on panel `i`; `eta` is expected to lie in that panel.
    #[inline]
    pub fn eval_in_panel(&self, i: usize, eta: f64) -> f64 {
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (eta - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative on panel `i`.
    pub fn derivative_in_panel(&self, i: usize, eta: f64) -> f64 {
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (eta - x0) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.values[i] + d10 * self.slopes[i] + d01 * self.values[i + 1] + d11 * self.slopes[i + 1]
    }

    /// Evaluate at `eta`, clamped to the domain.
    pub fn eval(&self, eta: f64) -> f64 {
        let eta = eta.clamp(self.start(), self.end());
        self.eval_in_panel(self.panel_of(eta), eta)
    }

    /// Derivative at `eta`, clamped to the domain.
    pub fn derivative(&self, eta: f64) -> f64 {
        let eta = eta.clamp(self.start(), self.end());
        self.derivative_in_panel(self.panel_of(eta), eta)
    }

    /// Nodes plus panel midpoints: the point set on which sup norms are taken.
    pub fn norm_points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(2 * self.grid.len() - 1);
        for w in self.grid.windows(2) {
            pts.push(w[0]);
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(self.end());
        pts
    }

    /// max |u| over nodes and midpoints.
    pub fn sup_norm(&self) -> f64 {
        self.norm_points()
            .iter()
            .map(|&x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }

    /// max |u − v| over the nodes and midpoints of both profiles that lie in
    /// the common part of their domains.
    pub fn sup_distance(&self, other: &ProfileFunction) -> f64 {
        let lo = self.start().max(other.start());
        let hi = self.end().min(other.end());
        self.norm_points()
            .into_iter()
            .chain(other.norm_points())
            .filter(|&x| x >= lo && x <= hi)
            .map(|x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Profile on the same grid with `f` applied to every node value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(StefanError::invalid("profile", "grid needs at least two nodes"));
    }
    if !grid.iter().all(|x| x.is_finite()) || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(StefanError::invalid(
            "profile",
            "grid must be finite and strictly increasing",
        ));
    }
    Ok(())
}

/// Fritsch–Carlson slopes with the three-point, shape-preserving end rule.
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// First derivative of uniformly sampled data by fourth-order differences
/// (central in the interior, one-sided at the two nodes nearest each end).
pub fn fd_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "need at least five samples");
    let f = values;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let m = n - 1;
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
    d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_short_or_unsorted_grids() {
        assert!(ProfileFunction::uniform(0.5, 1.0, 8, |x| x).is_err());
        assert!(ProfileFunction::uniform(1.0, 0.5, 40, |x| x).is_err());
        assert!(ProfileFunction::from_values(vec![0.0, 1.0, 0.5], vec![0.0; 3]).is_err());
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let p = ProfileFunction::uniform(0.3, 1.7, 257, |x| x).unwrap();
        assert_eq!(p.start(), 0.3);
        assert_eq!(p.end(), 1.7);
    }

    #[test]
    fn hermite_reproduces_cubics_exactly() {
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let df = |x: f64| 6.0 * x * x - 1.0;
        let g = linspace(0.5, 2.0, 40);
        let p = ProfileFunction::from_hermite(
            g.clone(),
            g.iter().map(|&x| f(x)).collect(),
            g.iter().map(|&x| df(x)).collect(),
        )
        .unwrap();
        for k in 0..100 {
            let x = 0.5 + 1.5 * k as f64 / 99.0;
            assert!((p.eval(x) - f(x)).abs() < 1e-13);
            assert!((p.derivative(x) - df(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_differences() {
        let h = 0.01;
        let v: Vec<f64> = (0..50).map(|i| (1.0 + i as f64 * h).sin()).collect();
        let d = fd_derivative(&v, h);
        for (i, di) in d.iter().enumerate() {
            let x = 1.0 + i as f64 * h;
            assert!((di - x.cos()).abs() < 1e-8, "{i}");
        }
    }

    #[test]
    fn evaluation_is_reproducible() {
        let p = ProfileFunction::uniform(0.5, 1.5, 65, |x| (3.0 * x).sin()).unwrap();
        let a: Vec<u64> = (0..200).map(|k| p.eval(0.5 + k as f64 / 199.0).to_bits()).collect();
        let b: Vec<u64> = (0..200).map(|k| p.eval(0.5 + k as f64 / 199.0).to_bits()).collect();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_interpolant_within_data_range(
            steps in proptest::collection::vec(0.0f64..1.0, 40)
        ) {
            let mut acc = 0.0;
            let values: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
            let grid = linspace(0.0, 1.0, values.len());
            let p = ProfileFunction::from_values(grid, values.clone()).unwrap();
            let lo = values[0];
            let hi = values[values.len() - 1];
            for k in 0..400 {
                let v = p.eval(k as f64 / 399.0);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
