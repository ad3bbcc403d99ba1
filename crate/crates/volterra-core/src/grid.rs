//! Uniform time grids.

use crate::{Error, Result};

/// Uniform grid `t_i = i * T / N`, `i = 0..=N`, on the horizon `[0, T]`.
///
/// Times are computed as `T * i / N` rather than `i * dt`, so `time(N) == T`
/// exactly and refining by an integer factor reproduces shared nodes bit for
/// bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidHorizon(horizon));
        }
        if steps == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `N` (one less than the number of nodes).
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node `t_i = T * i / N`; `i` may be any index up to `N`.
    pub fn time(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        self.horizon * (i as f64) / (self.steps as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// Same horizon with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let steps = self
            .steps
            .checked_mul(factor.max(1))
            .ok_or(Error::EmptyGrid)?;
        TimeGrid::new(self.horizon, steps)
    }

    /// True when `other` halves this grid's step an integer number of times.
    pub fn refines(&self, coarser: &TimeGrid) -> bool {
        self.horizon == coarser.horizon
            && self.steps % coarser.steps == 0
            && (self.steps / coarser.steps).is_power_of_two()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = TimeGrid::new(2.0, 1000).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(1000), 2.0);
        assert_eq!(g.len(), 1001);
    }

    #[test]
    fn refinement_shares_nodes_bitwise() {
        let coarse = TimeGrid::new(1.7, 125).unwrap();
        let fine = coarse.refined(8).unwrap();
        for i in 0..=125 {
            assert_eq!(coarse.time(i), fine.time(8 * i));
        }
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert_eq!(TimeGrid::new(0.0, 10), Err(Error::InvalidHorizon(0.0)));
        assert_eq!(TimeGrid::new(-1.0, 10), Err(Error::InvalidHorizon(-1.0)));
        assert_eq!(TimeGrid::new(1.0, 0), Err(Error::EmptyGrid));
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
    }
}
