//! Uniform tensor-product sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::check_dim;

/// One axis: samples at `start + i * step` for `i in 0..len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) || len == 0 {
            return Err(Error::domain(
                "Axis",
                format!("need finite start, step > 0, len > 0; got ({start}, {step}, {len})"),
            ));
        }
        Ok(Axis { start, step, len })
    }

    /// `len` left endpoints of the cells partitioning `[lo, hi)`.
    pub fn covering(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len == 0 || !(hi > lo) {
            return Err(Error::domain("Axis::covering", format!("empty interval [{lo}, {hi})")));
        }
        Axis::new(lo, (hi - lo) / len as f64, len)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    /// Same interval with twice as many samples.
    pub fn refined(&self) -> Self {
        Axis {
            start: self.start,
            step: self.step / 2.0,
            len: self.len * 2,
        }
    }
}

/// Tensor product of one or two axes; points are row-major in the first axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub axes: Vec<Axis>,
}

impl UniformGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        check_dim("UniformGrid", axes.len())?;
        Ok(UniformGrid { axes })
    }

    /// The cube `[lo, hi)^n` with `len` cells per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, len: usize) -> Result<Self> {
        let ax = Axis::covering(lo, hi, len)?;
        UniformGrid::new(vec![ax; n])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(|a| a.step).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.axes.iter().map(Axis::max_abs).fold(0.0, f64::max)
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self.axes.as_slice() {
            [a] => [a.at(idx), 0.0],
            [a, b] => [a.at(idx / b.len), b.at(idx % b.len)],
            _ => unreachable!("dimension checked on construction"),
        }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn refined(&self) -> Self {
        UniformGrid {
            axes: self.axes.iter().map(Axis::refined).collect(),
        }
    }
}
