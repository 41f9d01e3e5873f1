//! Integer lattice points and spatial points in dimension 1 or 2.
//!
//! Both are stored as two-component arrays; in dimension 1 the second
//! component is always zero, so norms and dot products need no branching.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Checks that `n` is a supported dimension.
pub fn check_dim(op: &'static str, n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("dimension must be 1 or 2, got {n}")))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LatticePoint(pub [i64; 2]);

impl LatticePoint {
    pub const ZERO: LatticePoint = LatticePoint([0, 0]);

    pub fn new1(k: i64) -> Self {
        LatticePoint([k, 0])
    }

    pub fn new2(k1: i64, k2: i64) -> Self {
        LatticePoint([k1, k2])
    }

    pub fn norm_sq(&self) -> i64 {
        self.0[0] * self.0[0] + self.0[1] * self.0[1]
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0]
    }

    pub fn to_f64(self) -> [f64; 2] {
        [self.0[0] as f64, self.0[1] as f64]
    }

    /// `x . k` for a spatial point `x`.
    pub fn dot(&self, x: &[f64; 2]) -> f64 {
        self.0[0] as f64 * x[0] + self.0[1] as f64 * x[1]
    }

    /// All points with `|k|_inf <= r` in dimension `n`, lexicographic order.
    pub fn cube(n: usize, r: i64) -> impl Iterator<Item = LatticePoint> {
        let r2 = if n == 2 { r } else { 0 };
        (-r..=r).flat_map(move |a| (-r2..=r2).map(move |b| LatticePoint([a, b])))
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: Self) -> Self {
        LatticePoint([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: Self) -> Self {
        LatticePoint([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0[0], self.0[1])
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0[1] == 0 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{} {}", self.0[0], self.0[1])
        }
    }
}

pub fn norm(x: &[f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

/// Closed real interval `[lo, hi]` of norms, membership tested on `|k|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBand {
    pub lo: f64,
    pub hi: f64,
}

impl NormBand {
    pub fn contains(&self, k: &LatticePoint) -> bool {
        let s = k.norm_sq() as f64;
        s >= self.lo * self.lo && s <= self.hi * self.hi
    }

    /// Lattice points of the band in dimension `n`, lexicographic order.
    pub fn points(&self, n: usize) -> Vec<LatticePoint> {
        let r = self.hi.floor() as i64;
        LatticePoint::cube(n, r).filter(|k| self.contains(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(LatticePoint::new2(3, 4).norm(), 5.0);
        assert_eq!(LatticePoint::new1(-3).norm_sq(), 9);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn cube_sizes_and_order() {
        assert_eq!(LatticePoint::cube(1, 3).count(), 7);
        assert_eq!(LatticePoint::cube(2, 2).count(), 25);
        let v: Vec<_> = LatticePoint::cube(2, 1).collect();
        let mut s = v.clone();
        s.sort();
        assert_eq!(v, s);
    }

    #[test]
    fn band_is_closed() {
        let b = NormBand { lo: 2.0, hi: 8.0 };
        let pts = b.points(1);
        assert_eq!(pts.len(), 14);
        assert!(b.contains(&LatticePoint::new1(-8)));
        assert!(!b.contains(&LatticePoint::new1(1)));
    }

    #[test]
    fn dims() {
        assert!(check_dim("t", 1).is_ok());
        assert!(check_dim("t", 3).is_err());
    }
}
