//! Frequency bumps and their inverse Fourier transforms.
//!
//! Both bumps are tensor products of an even one-dimensional profile, so the
//! inverse transform factorizes and only a one-dimensional table of
//! `F^{-1}(profile)` on `[0, R]` is stored. Quadrature is the trapezoid rule
//! on the profile's support; for profiles that vanish to infinite order at the
//! support edge this converges faster than any power of the node spacing.
//!
//! Convention: `F^{-1} g(x) = (2 pi)^{-n} ∫ e^{i x.xi} g(xi) dxi`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::check_dim;

/// Node count of the default trapezoid rule on the support.
pub const DEFAULT_NODES: usize = 2048;
/// Spacing of the stored spatial table.
pub const TABLE_STEP: f64 = 1.0 / 64.0;
/// Lebesgue exponents the tail certificate must cover.
pub const TAIL_EXPONENTS: [f64; 3] = [1.0, 2.0, 4.0];
/// Relative tail allowed in any certified `L^p` norm.
pub const TAIL_TOLERANCE: f64 = 1e-4;
/// Factor applied to the fitted decay envelope.
pub const TAIL_SAFETY: f64 = 10.0;
/// Required lower bound of `|Phi|` on `[-1,1]^n`.
pub const LOWER_BOUND_TARGET: f64 = 1.05;

const MAX_RADIUS: f64 = 8192.0;
const START_RADIUS: f64 = 16.0;

fn bump_exp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// `S(s) = e(s) / (e(s) + e(1 - s))`, a smooth step from 0 at `s <= 0` to 1 at `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    let a = bump_exp(s);
    let b = bump_exp(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Even one-dimensional profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Profile1D {
    /// `c exp(-1 / (1 - (4 xi)^2))` on `|xi| < 1/4`.
    Mollifier { amplitude: f64 },
    /// 1 on `[-1/4, 1/4]`, 0 outside `[-1/2, 1/2]`.
    Plateau,
    /// Indicator of `[-h, h]`.
    Indicator { halfwidth: f64 },
    /// `exp(-xi^2 / (2 sigma^2))` cut off at `|xi| = h`.
    Gaussian { sigma: f64, halfwidth: f64 },
}

impl Profile1D {
    pub fn halfwidth(&self) -> f64 {
        match *self {
            Profile1D::Mollifier { .. } => 0.25,
            Profile1D::Plateau => 0.5,
            Profile1D::Indicator { halfwidth } | Profile1D::Gaussian { halfwidth, .. } => halfwidth,
        }
    }

    pub fn value(&self, xi: f64) -> f64 {
        let a = xi.abs();
        match *self {
            Profile1D::Mollifier { amplitude } => {
                let u = 4.0 * a;
                if u >= 1.0 {
                    0.0
                } else {
                    amplitude * (-1.0 / (1.0 - u * u)).exp()
                }
            }
            Profile1D::Plateau => {
                if a <= 0.25 {
                    1.0
                } else if a >= 0.5 {
                    0.0
                } else {
                    smooth_step(4.0 * (0.5 - a))
                }
            }
            Profile1D::Indicator { halfwidth } => {
                if a <= halfwidth {
                    1.0
                } else {
                    0.0
                }
            }
            Profile1D::Gaussian { sigma, halfwidth } => {
                if a <= halfwidth {
                    (-xi * xi / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Trapezoid nodes `xi_i` and weights `w_i * profile(xi_i)` on `[-h, h]`.
    fn weighted_nodes(&self, nodes: usize) -> (Vec<f64>, Vec<f64>) {
        let h = self.halfwidth();
        let d = 2.0 * h / nodes as f64;
        let xs: Vec<f64> = (0..=nodes).map(|i| -h + i as f64 * d).collect();
        let ws = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let w = if i == 0 || i == nodes { 0.5 * d } else { d };
                w * self.value(x)
            })
            .collect();
        (xs, ws)
    }

    /// `(2 pi)^{-1} ∫ e^{i x xi} profile(xi) dxi` by the trapezoid rule, no symmetry assumed.
    pub fn inverse_fourier(&self, x: f64, nodes: usize) -> Complex64 {
        let (xs, ws) = self.weighted_nodes(nodes);
        let s: Complex64 = xs
            .iter()
            .zip(&ws)
            .map(|(&xi, &w)| Complex64::from_polar(w, x * xi))
            .sum();
        s / (2.0 * PI)
    }

    /// Real inverse transform at many points, using evenness and a rotation recurrence.
    fn inverse_fourier_even(&self, xs: &[f64], nodes: usize) -> Vec<f64> {
        let half = nodes / 2;
        let (xis, ws) = self.weighted_nodes(2 * half);
        let xis = &xis[half..];
        let ws = &ws[half..];
        let d = xis.get(1).map_or(0.0, |v| v - xis[0]);
        xs.iter()
            .map(|&x| {
                let rot = Complex64::from_polar(1.0, x * d);
                let mut z = Complex64::new(1.0, 0.0);
                let mut acc = ws[0];
                for (i, &w) in ws.iter().enumerate().skip(1) {
                    z *= rot;
                    // re-anchor against drift of the recurrence
                    if i % 64 == 0 {
                        z = Complex64::from_polar(1.0, x * xis[i]);
                    }
                    acc += 2.0 * w * z.re;
                }
                acc / (2.0 * PI)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpKind {
    /// `phi`: support in `[-1/4,1/4]^n`, `|F^{-1} phi| >= 1` on `[-1,1]^n`.
    Phi,
    /// `phi~`: 1 on `[-1/4,1/4]^n`, support in `[-1/2,1/2]^n`.
    PhiTilde,
    Custom,
}

/// Samples of the one-dimensional inverse transform at `k * step`, `0 <= k * step <= radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialTable {
    pub step: f64,
    pub radius: f64,
    pub values: Vec<f64>,
}

impl SpatialTable {
    fn build(profile: &Profile1D, radius: f64, nodes: usize) -> Self {
        let count = (radius / TABLE_STEP).round() as usize + 1;
        let xs: Vec<f64> = (0..count).map(|k| k as f64 * TABLE_STEP).collect();
        SpatialTable {
            step: TABLE_STEP,
            radius: (count - 1) as f64 * TABLE_STEP,
            values: profile.inverse_fourier_even(&xs, nodes),
        }
    }

    /// Cubic Lagrange interpolation; zero beyond the radius.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a > self.radius {
            return 0.0;
        }
        let u = a / self.step;
        let last = self.values.len() - 1;
        let i = (u.floor() as usize).min(last);
        if (u - i as f64) == 0.0 {
            return self.values[i];
        }
        // stencil i-1..i+2, reflected at 0 by evenness, clamped at the far end
        let base = i as isize - 1;
        let fetch = |k: isize| -> f64 {
            let k = k.unsigned_abs();
            if k > last {
                0.0
            } else {
                self.values[k]
            }
        };
        let t = u - base as f64;
        let f = [fetch(base), fetch(base + 1), fetch(base + 2), fetch(base + 3)];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * f[0] + l1 * f[1] + l2 * f[2] + l3 * f[3]
    }

    fn abs_peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Power-law decay certificate `|F^{-1}(x)| <= safety * amplitude * |x|^{-decay}` for `|x| >= radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub radius: f64,
    pub amplitude: f64,
    pub decay: f64,
    /// Worst relative `L^p` tail over [`TAIL_EXPONENTS`], in dimension `n`.
    pub relative_tail: f64,
}

fn fit_tail(table: &SpatialTable, n: usize) -> Option<TailCertificate> {
    let r = table.radius;
    let start = table.values.len() / 2;
    // running max from the right: monotone envelope of |F^{-1}|
    let mut env = vec![0.0; table.values.len()];
    let mut m: f64 = 0.0;
    for k in (start..table.values.len()).rev() {
        m = m.max(table.values[k].abs());
        env[k] = m;
    }
    let pts: Vec<(f64, f64)> = (start..table.values.len())
        .step_by(16)
        .filter(|&k| env[k] > 0.0 && k > 0)
        .map(|k| ((k as f64 * table.step).ln(), env[k].ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let nn = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / nn, sy / nn);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    let decay = -sxy / sxx;
    if !(decay.is_finite() && decay > 0.0) {
        return None;
    }
    let amplitude = (start..table.values.len())
        .filter(|&k| k > 0)
        .map(|k| env[k] * (k as f64 * table.step).powf(decay))
        .fold(0.0, f64::max);
    let a = TAIL_SAFETY * amplitude;
    let mut worst: f64 = 0.0;
    for &p in &TAIL_EXPONENTS {
        if decay * p <= 1.0 {
            return None;
        }
        let tail1 = 2.0 * a.powf(p) * r.powf(1.0 - decay * p) / (decay * p - 1.0);
        let body1: f64 = 2.0 * table.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * table.step;
        let rel1 = tail1 / body1;
        let rel = if n == 1 { rel1 } else { 2.0 * rel1 * (1.0 + rel1) };
        worst = worst.max(rel);
    }
    Some(TailCertificate {
        radius: r,
        amplitude: a,
        decay,
        relative_tail: worst,
    })
}

/// Tensor-product bump with a certified spatial table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub n: usize,
    pub kind: BumpKind,
    pub axis: Profile1D,
    pub nodes: usize,
    pub table: SpatialTable,
    pub tail: TailCertificate,
    /// Certified `min |F^{-1}|` on `[-1,1]^n` (phi only).
    pub min_modulus: Option<f64>,
}

impl Bump {
    /// Builds a bump from an even profile, growing the table radius until the tail certifies.
    pub fn from_profile(n: usize, kind: BumpKind, axis: Profile1D, nodes: usize) -> Result<Bump> {
        check_dim("Bump", n)?;
        if nodes < 16 {
            return Err(Error::domain("Bump", format!("need at least 16 quadrature nodes, got {nodes}")));
        }
        let mut radius = START_RADIUS;
        loop {
            let table = SpatialTable::build(&axis, radius, nodes);
            if let Some(tail) = fit_tail(&table, n) {
                if tail.relative_tail < TAIL_TOLERANCE {
                    return Ok(Bump {
                        n,
                        kind,
                        axis,
                        nodes,
                        table,
                        tail,
                        min_modulus: None,
                    });
                }
            }
            radius *= 2.0;
            if radius > MAX_RADIUS {
                return Err(Error::Certification {
                    stage: "bump tail",
                    detail: format!("no radius up to {MAX_RADIUS} certifies a relative tail below {TAIL_TOLERANCE}"),
                });
            }
        }
    }

    /// The bump `phi` with amplitude chosen so that `min |Phi| = 1.05` on `[-1,1]^n`.
    pub fn phi(n: usize) -> Result<Bump> {
        Bump::phi_with_nodes(n, DEFAULT_NODES)
    }

    pub fn phi_with_nodes(n: usize, nodes: usize) -> Result<Bump> {
        check_dim("make_phi", n)?;
        let unit = Profile1D::Mollifier { amplitude: 1.0 };
        let probe = unit.inverse_fourier_even(&[1.0], nodes)[0];
        if !(probe > 0.0) {
            return Err(Error::Certification {
                stage: "phi amplitude",
                detail: format!("unit profile transform at 1 is {probe}"),
            });
        }
        // Phi_1 is positive and decreasing on [0,1] (|x xi| <= 1/4), so the minimum sits at |x| = 1
        let per_axis = LOWER_BOUND_TARGET.powf(1.0 / n as f64) * (1.0 + 1e-9);
        let axis = Profile1D::Mollifier {
            amplitude: per_axis / probe,
        };
        let mut bump = Bump::from_profile(n, BumpKind::Phi, axis, nodes)?;
        let coarse = bump.grid_min_on_unit_cube(1024);
        let fine = bump.grid_min_on_unit_cube(2048);
        if !(coarse >= LOWER_BOUND_TARGET && fine >= LOWER_BOUND_TARGET) || (coarse - fine).abs() > 0.01 * fine {
            return Err(Error::Certification {
                stage: "phi lower bound",
                detail: format!("grid minima {coarse} / {fine} on [-1,1]^{n}"),
            });
        }
        bump.min_modulus = Some(fine);
        Ok(bump)
    }

    /// The plateau `phi~`.
    pub fn phi_tilde(n: usize) -> Result<Bump> {
        Bump::from_profile(n, BumpKind::PhiTilde, Profile1D::Plateau, DEFAULT_NODES)
    }

    /// `min |Phi|` over a tensor grid with `cells` cells per axis on `[-1,1]^n`.
    pub fn grid_min_on_unit_cube(&self, cells: usize) -> f64 {
        let m1 = (0..=cells)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / cells as f64;
                self.axis.inverse_fourier(x, self.nodes).norm()
            })
            .fold(f64::INFINITY, f64::min);
        m1.powi(self.n as i32)
    }

    pub fn support_halfwidth(&self) -> f64 {
        self.axis.halfwidth()
    }

    pub fn radius(&self) -> f64 {
        self.table.radius
    }

    pub fn profile(&self, xi: &[f64; 2]) -> f64 {
        (0..self.n).map(|d| self.axis.value(xi[d])).product()
    }

    /// Direct trapezoid quadrature of the inverse Fourier integral.
    pub fn inverse_fourier(&self, points: &[[f64; 2]]) -> Vec<Complex64> {
        points
            .iter()
            .map(|x| {
                (0..self.n)
                    .map(|d| self.axis.inverse_fourier(x[d], self.nodes))
                    .product()
            })
            .collect()
    }

    /// One-dimensional factor of `F^{-1}` read from the table.
    pub fn eval_axis(&self, x: f64) -> f64 {
        self.table.eval(x)
    }

    /// `F^{-1}(x)` read from the table, zero outside `[-R, R]^n`.
    pub fn eval_spatial(&self, x: &[f64; 2]) -> f64 {
        (0..self.n).map(|d| self.table.eval(x[d])).product()
    }

    pub fn peak(&self) -> f64 {
        self.table.abs_peak().powi(self.n as i32)
    }

    /// Writes the recipe header and table; floats use shortest round-trip formatting.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "# bscrit bump table v1");
        let _ = writeln!(s, "recipe={}", serde_json::to_string(&self.axis)?);
        let _ = writeln!(s, "kind={}", serde_json::to_string(&self.kind)?);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "nodes={}", self.nodes);
        let _ = writeln!(s, "tail={}", serde_json::to_string(&self.tail)?);
        let _ = writeln!(s, "min_modulus={}", serde_json::to_string(&self.min_modulus)?);
        let _ = writeln!(s, "step={}", self.table.step);
        let _ = writeln!(s, "radius={}", self.table.radius);
        let _ = writeln!(s, "count={}", self.table.values.len());
        for v in &self.table.values {
            let _ = writeln!(s, "{v}");
        }
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Bump> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        if lines.next() != Some("# bscrit bump table v1") {
            return Err(Error::Parse(format!("{}: missing bump table header", path.display())));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("bump table: missing {key}")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("bump table: expected {key}, got {line:?}")))
        };
        let num = |s: String| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}"))) };
        let axis: Profile1D = serde_json::from_str(&field("recipe")?)?;
        let kind: BumpKind = serde_json::from_str(&field("kind")?)?;
        let n: usize = field("n")?.parse().map_err(|_| Error::Parse("bad n".into()))?;
        let nodes: usize = field("nodes")?.parse().map_err(|_| Error::Parse("bad nodes".into()))?;
        let tail: TailCertificate = serde_json::from_str(&field("tail")?)?;
        let min_modulus: Option<f64> = serde_json::from_str(&field("min_modulus")?)?;
        let step = num(field("step")?)?;
        let radius = num(field("radius")?)?;
        let count: usize = field("count")?.parse().map_err(|_| Error::Parse("bad count".into()))?;
        let values = lines.map(|l| num(l.to_string())).collect::<Result<Vec<f64>>>()?;
        if values.len() != count {
            return Err(Error::Parse(format!("bump table: expected {count} samples, got {}", values.len())));
        }
        check_dim("Bump::load", n)?;
        Ok(Bump {
            n,
            kind,
            axis,
            nodes,
            table: SpatialTable { step, radius, values },
            tail,
            min_modulus,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn phi1() -> &'static Bump {
        static B: OnceLock<Bump> = OnceLock::new();
        B.get_or_init(|| Bump::phi(1).unwrap())
    }

    fn phit1() -> &'static Bump {
        static B: OnceLock<Bump> = OnceLock::new();
        B.get_or_init(|| Bump::phi_tilde(1).unwrap())
    }

    #[test]
    fn indicator_at_zero() {
        let p = Profile1D::Indicator { halfwidth: 0.25 };
        let v = p.inverse_fourier(0.0, 512);
        assert!((v.re - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn gaussian_pair() {
        // F^{-1} exp(-xi^2/2s^2) = s exp(-s^2 x^2 / 2) / sqrt(2 pi); the cutoff at 8 s is below 1e-13
        let s = 0.05;
        let p = Profile1D::Gaussian { sigma: s, halfwidth: 8.0 * s };
        for &x in &[0.0, 3.0, 17.5, 40.0] {
            let exact = s * (-(s * x).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
            let got = p.inverse_fourier(x, 1024);
            assert!((got.re - exact).abs() < 1e-12 * s, "x={x}: {} vs {exact}", got.re);
        }
    }

    #[test]
    fn linearity() {
        let a = Profile1D::Mollifier { amplitude: 1.0 };
        let b = Profile1D::Plateau;
        // a + 2b sampled as a Gaussian-free combination via direct sums
        for &x in &[0.3, 2.0, 9.0] {
            let lhs = a.inverse_fourier(x, 2048) * 3.0 - b.inverse_fourier(x, 2048) * 2.0;
            let h = 0.5;
            let d = 2.0 * h / 2048.0;
            let direct: Complex64 = (0..=2048)
                .map(|i| {
                    let xi = -h + i as f64 * d;
                    let w = if i == 0 || i == 2048 { 0.5 * d } else { d };
                    Complex64::from_polar(w * (3.0 * a.value(xi) - 2.0 * b.value(xi)), x * xi)
                })
                .sum::<Complex64>()
                / (2.0 * PI);
            assert!((lhs - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn phi_support_and_lower_bound() {
        let b = phi1();
        assert_eq!(b.axis.value(0.25), 0.0);
        assert_eq!(b.axis.value(-0.25), 0.0);
        assert!(b.axis.value(0.2) > 0.0);
        let m = b.min_modulus.unwrap();
        assert!(m >= LOWER_BOUND_TARGET);
        // independent oracle: fine midpoint Riemann sum of the inverse integral at x = 1
        let cells = 200_000;
        let d = 0.5 / cells as f64;
        let riemann: f64 = (0..cells)
            .map(|i| {
                let xi = -0.25 + (i as f64 + 0.5) * d;
                b.axis.value(xi) * xi.cos()
            })
            .sum::<f64>()
            * d
            / (2.0 * PI);
        assert!((riemann - b.eval_axis(1.0)).abs() < 1e-9);
        assert!((b.eval_axis(1.0) - LOWER_BOUND_TARGET).abs() < 1e-6);
    }

    #[test]
    fn phi_two_dims() {
        let b = Bump::phi(2).unwrap();
        assert!(b.min_modulus.unwrap() >= LOWER_BOUND_TARGET);
        let v = b.eval_spatial(&[1.0, -1.0]);
        assert!((v - LOWER_BOUND_TARGET).abs() < 1e-6);
    }

    #[test]
    fn spatial_decay_beyond_radius() {
        for b in [phi1(), phit1()] {
            let r = b.radius();
            let far: Vec<[f64; 2]> = [1.0, 1.5, 2.0, 3.7].iter().map(|f| [f * r, 0.0]).collect();
            for v in b.inverse_fourier(&far) {
                assert!(v.norm() < 1e-6, "{:?} at R={r}: {v}", b.kind);
            }
            assert!(b.tail.relative_tail < TAIL_TOLERANCE);
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for b in [phi1(), phit1()] {
            let xs: Vec<[f64; 2]> = (0..200).map(|i| [i as f64 * 0.377 - 30.0, 0.0]).collect();
            let direct = b.inverse_fourier(&xs);
            for (x, d) in xs.iter().zip(direct) {
                assert!((b.eval_spatial(x) - d.re).abs() < 1e-10 * b.peak(), "x={}", x[0]);
                assert!(d.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quadrature_converged() {
        for p in [Profile1D::Mollifier { amplitude: 60.0 }, Profile1D::Plateau] {
            let peak = p.inverse_fourier(0.0, 4096).re;
            for &x in &[0.0, 0.9, 5.0, 31.0, 120.0] {
                let a = p.inverse_fourier(x, 2048);
                let b = p.inverse_fourier(x, 4096);
                assert!((a - b).norm() < 1e-8 * peak);
            }
        }
    }

    #[test]
    fn plateau_values() {
        let p = Profile1D::Plateau;
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.25), 1.0);
        let mid = p.value(0.375);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(p.value(0.5), 0.0);
        assert_eq!(p.value(-0.7), 0.0);
    }

    #[test]
    fn shifted_supports() {
        let phi = phi1();
        let pt = phit1();
        for k in -3i32..=3 {
            for l in -3i32..=3 {
                for i in 0..=4000 {
                    let xi = -5.0 + i as f64 * 0.0025;
                    let a = phi.axis.value(xi - k as f64);
                    let prod = a * pt.axis.value(xi - l as f64);
                    if k == l {
                        assert_eq!(prod, a);
                    } else {
                        assert_eq!(prod, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cache_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.tbl");
        let b = phit1();
        b.save(&path).unwrap();
        let back = Bump::load(&path).unwrap();
        assert_eq!(&back, b);
        std::fs::write(&path, "garbage").unwrap();
        assert!(Bump::load(&path).is_err());
    }

    #[test]
    fn bad_dimension() {
        assert!(Bump::phi(3).is_err());
        assert!(Bump::phi_tilde(0).is_err());
    }
}
