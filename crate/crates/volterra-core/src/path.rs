//! Scalar and vector-valued paths sampled on a [`TimeGrid`].

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, TimeGrid};

/// Real-valued path `t_i -> v_i` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(ScalarPath { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        ScalarPath {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: TimeGrid, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = grid.times().map(&mut f).collect();
        ScalarPath { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup distance to another path on the same grid.
    pub fn sup_distance(&self, other: &ScalarPath) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Keep every `factor`-th node (the shared nodes of the coarser grid).
    pub fn restricted(&self, factor: usize) -> Result<ScalarPath> {
        if factor == 0 || self.grid.steps() % factor != 0 {
            return Err(Error::NotARefinement);
        }
        let coarse = TimeGrid::new(self.grid.horizon(), self.grid.steps() / factor)?;
        let values = (0..coarse.len()).map(|i| self.values[i * factor]).collect();
        Ok(ScalarPath {
            grid: coarse,
            values,
        })
    }
}

/// Path of mode coefficients: one row per eigenmode, one column per node.
///
/// The row-major layout keeps a single mode's trajectory contiguous, which is
/// what the convolution loops traverse.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertPath {
    grid: TimeGrid,
    modes: usize,
    data: Vec<f64>,
}

impl HilbertPath {
    pub fn zeros(grid: TimeGrid, modes: usize) -> Self {
        HilbertPath {
            grid,
            modes,
            data: vec![0.0; modes * grid.len()],
        }
    }

    pub fn from_rows(grid: TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * grid.len());
        let modes = rows.len();
        for row in rows {
            if row.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: row.len(),
                });
            }
            data.extend_from_slice(&row);
        }
        Ok(HilbertPath { grid, modes, data })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn row(&self, mode: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[mode * n..(mode + 1) * n]
    }

    pub fn row_mut(&mut self, mode: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[mode * n..(mode + 1) * n]
    }

    pub fn value(&self, mode: usize, i: usize) -> f64 {
        self.data[mode * self.grid.len() + i]
    }

    /// Hilbert norm of the mode column at node `i`.
    pub fn norm_at(&self, i: usize) -> f64 {
        let n = self.grid.len();
        let mut s = 0.0;
        for k in 0..self.modes {
            let v = self.data[k * n + i];
            s += v * v;
        }
        libm::sqrt(s)
    }

    /// Hilbert norm of `X(t_{i+1}) - X(t_i)`.
    pub fn increment_norm(&self, i: usize) -> f64 {
        let n = self.grid.len();
        let mut s = 0.0;
        for k in 0..self.modes {
            let d = self.data[k * n + i + 1] - self.data[k * n + i];
            s += d * d;
        }
        libm::sqrt(s)
    }

    /// Largest increment norm over the grid.
    pub fn max_increment(&self) -> f64 {
        (0..self.grid.steps()).fold(0.0, |m, i| m.max(self.increment_norm(i)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out
    }

    /// `self + factor * other`, elementwise on matching grids.
    pub fn add_scaled(&self, factor: f64, other: &HilbertPath) -> Result<HilbertPath> {
        if self.grid != other.grid || self.modes != other.modes {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += factor * w;
        }
        Ok(out)
    }

    /// Sup over nodes of the Hilbert distance to `other` (same grid).
    pub fn sup_distance(&self, other: &HilbertPath) -> Result<f64> {
        if self.grid != other.grid || self.modes != other.modes {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let mut sup = 0.0_f64;
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..self.modes {
                let d = self.data[k * n + i] - other.data[k * n + i];
                s += d * d;
            }
            sup = sup.max(libm::sqrt(s));
        }
        Ok(sup)
    }

    /// Keep every `factor`-th node.
    pub fn restricted(&self, factor: usize) -> Result<HilbertPath> {
        if factor == 0 || self.grid.steps() % factor != 0 {
            return Err(Error::NotARefinement);
        }
        let coarse = TimeGrid::new(self.grid.horizon(), self.grid.steps() / factor)?;
        let n = self.grid.len();
        let mut data = Vec::with_capacity(self.modes * coarse.len());
        for k in 0..self.modes {
            for i in 0..coarse.len() {
                data.push(self.data[k * n + i * factor]);
            }
        }
        Ok(HilbertPath {
            grid: coarse,
            modes: self.modes,
            data,
        })
    }
}
