//! Wainger-type test functions.
//!
//! ```text
//! f(x) = ( sum_{0 < |l| <= L} e^{-t|l|} |l|^{-b} e^{i|l|^a} e^{i s x.l} ) s^n Phi~(s x),   s = 2^{j rho}
//! ```
//!
//! with Fourier transform `sum_l c_l phi~(xi / s - l)`. Its `L^p` norm is bounded
//! uniformly in `t` once `b` exceeds `n - na/2 - n/p + na/p`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::lattice::{check_dim, LatticePoint};
use crate::trig::{enveloped_lp_norm, Envelope, TrigPolynomial};

/// Relative truncation tail a lattice radius must certify.
pub const TAIL_TOLERANCE: f64 = 1e-4;
/// Radius caps; beyond these the certified tail is recorded instead of enforced.
pub const RADIUS_CAP_1D: i64 = 4096;
pub const RADIUS_CAP_2D: i64 = 64;

pub fn radius_cap(n: usize) -> i64 {
    if n == 1 {
        RADIUS_CAP_1D
    } else {
        RADIUS_CAP_2D
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaingerParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub lattice_radius: i64,
    pub j: u32,
    pub rho: f64,
}

impl WaingerParams {
    /// Parameters with the smallest certified radius (capped per dimension).
    pub fn with_auto_radius(n: usize, a: f64, b: f64, t: f64, j: u32, rho: f64) -> Result<Self> {
        let mut p = WaingerParams {
            n,
            a,
            b,
            t,
            lattice_radius: 1,
            j,
            rho,
        };
        p.validate()?;
        p.lattice_radius = required_radius(n, b, t, TAIL_TOLERANCE).unwrap_or(radius_cap(n));
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("WaingerParams", self.n)?;
        let bad = |d: String| Err(Error::domain("WaingerParams", d));
        if !(self.a > 0.0 && self.a < 1.0) {
            return bad(format!("a must lie in (0,1), got {}", self.a));
        }
        if !(self.b > 0.0 && self.b < self.n as f64) {
            return bad(format!("b must lie in (0,n), got {}", self.b));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if self.lattice_radius < 1 {
            return bad(format!("lattice radius must be positive, got {}", self.lattice_radius));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0,1), got {}", self.rho));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        2f64.powf(self.j as f64 * self.rho)
    }
}

fn modulus(t: f64, b: f64, norm: f64) -> f64 {
    (-t * norm).exp() * norm.powf(-b)
}

/// Upper bound on `sum_{|l| > R} e^{-t|l|} |l|^{-b}`.
pub fn tail_bound_abs(n: usize, b: f64, t: f64, radius: i64) -> f64 {
    let r = radius as f64;
    if n == 1 {
        return 2.0 * r.powf(-b) * (-t * (r + 1.0)).exp() / (1.0 - (-t).exp());
    }
    // lattice points with m - 1 < |l| <= m number at most pi (1 + sqrt 2)(2m + 1)
    let c = std::f64::consts::PI * (1.0 + std::f64::consts::SQRT_2);
    let stop = radius + (60.0 / t).ceil() as i64 + 2;
    let body: f64 = (radius + 1..=stop)
        .map(|m| c * (2 * m + 1) as f64 * modulus(t, b, (m - 1).max(1) as f64))
        .sum();
    // beyond `stop` the terms are below e^{-60} times a polynomial; bound them geometrically
    let last = c * (2 * stop + 3) as f64 * modulus(t, b, stop as f64);
    body + last / (1.0 - (-t).exp()).powi(2)
}

fn retained_mass(n: usize, b: f64, t: f64, radius: i64) -> f64 {
    if n == 1 {
        2.0 * (1..=radius).map(|l| modulus(t, b, l as f64)).sum::<f64>()
    } else {
        LatticePoint::cube(2, radius)
            .filter(|k| !k.is_zero() && k.norm_sq() <= radius * radius)
            .map(|k| modulus(t, b, k.norm()))
            .sum()
    }
}

/// Relative tail of the truncated coefficient set.
pub fn relative_tail(n: usize, b: f64, t: f64, radius: i64) -> f64 {
    tail_bound_abs(n, b, t, radius) / retained_mass(n, b, t, radius)
}

/// Smallest radius up to the cap with relative tail below `tol`; `None` when the cap is hit.
pub fn required_radius(n: usize, b: f64, t: f64, tol: f64) -> Option<i64> {
    let cap = radius_cap(n);
    let mut r = 1;
    while r < cap && relative_tail(n, b, t, r) >= tol {
        r *= 2;
    }
    let r = r.min(cap);
    if relative_tail(n, b, t, r) >= tol {
        return if r == cap { None } else { Some(r) };
    }
    // bisect down to the smallest certifying radius
    let (mut lo, mut hi) = (r / 2, r);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if relative_tail(n, b, t, mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Clone, Debug)]
pub struct WaingerFunction {
    pub params: WaingerParams,
    /// `(l, e^{-t|l|} |l|^{-b} e^{i|l|^a})`, lexicographic in `l`.
    pub coeffs: Vec<(LatticePoint, Complex64)>,
    /// Certified relative truncation tail (above [`TAIL_TOLERANCE`] only at the radius cap).
    pub tail_bound: f64,
    pub envelope: Arc<Envelope>,
}

pub fn wainger_coefficient(a: f64, b: f64, t: f64, l: &LatticePoint) -> Complex64 {
    let r = l.norm();
    Complex64::from_polar(modulus(t, b, r), r.powf(a))
}

/// Enumerates `0 < |l| <= radius`; rejects radii that neither certify the tail nor sit at the cap.
pub fn build_wainger(params: WaingerParams, envelope: Arc<Envelope>) -> Result<WaingerFunction> {
    params.validate()?;
    if envelope.n() != params.n {
        return Err(Error::domain("build_wainger", "envelope dimension differs from params"));
    }
    let WaingerParams {
        n,
        a,
        b,
        t,
        lattice_radius: radius,
        ..
    } = params;
    let tail = relative_tail(n, b, t, radius);
    if tail >= TAIL_TOLERANCE && radius < radius_cap(n) {
        let need = required_radius(n, b, t, TAIL_TOLERANCE).unwrap_or(radius_cap(n));
        return Err(Error::Certification {
            stage: "wainger truncation",
            detail: format!("radius {radius} leaves relative tail {tail:.3e}; radius {need} required"),
        });
    }
    let coeffs = LatticePoint::cube(n, radius)
        .filter(|k| !k.is_zero() && k.norm_sq() <= radius * radius)
        .map(|k| (k, wainger_coefficient(a, b, t, &k)))
        .collect();
    Ok(WaingerFunction {
        params,
        coeffs,
        tail_bound: tail,
        envelope,
    })
}

/// `n - na/2 - n/p + na/p` with `inv_p = 1/p`.
pub fn membership_threshold(a: f64, inv_p: f64, n: usize) -> f64 {
    let n = n as f64;
    n - n * a / 2.0 - n * inv_p + n * a * inv_p
}

impl WaingerFunction {
    pub fn polynomial(&self) -> TrigPolynomial {
        TrigPolynomial {
            n: self.params.n,
            terms: self.coeffs.clone(),
        }
    }

    pub fn l1_mass(&self) -> f64 {
        self.coeffs.iter().map(|(_, c)| c.norm()).sum()
    }

    /// Direct evaluation on a grid fine enough for the fastest phase.
    pub fn evaluate_f(&self, grid: &UniformGrid) -> Result<Vec<Complex64>> {
        let s = self.params.scale();
        let limit = std::f64::consts::PI / (s * (self.params.lattice_radius as f64 + 0.5));
        if grid.dim() != self.params.n || grid.max_step() >= limit {
            return Err(Error::Resolution {
                op: "evaluate_f",
                detail: format!("grid step {} must stay below {limit}", grid.max_step()),
            });
        }
        let poly = self.polynomial();
        let amp = s.powi(self.params.n as i32);
        Ok(grid
            .points()
            .iter()
            .map(|x| {
                let u = [s * x[0], s * x[1]];
                poly.eval(&u) * (amp * self.envelope.eval(&u))
            })
            .collect())
    }

    /// `f^(xi) = sum_l c_l phi~(xi / s - l)`.
    pub fn fourier_transform(&self, xi: &[f64; 2]) -> Complex64 {
        let s = self.params.scale();
        let axis = &self.envelope.bump.axis;
        let u = [xi[0] / s, xi[1] / s];
        self.coeffs
            .iter()
            .map(|(l, c)| {
                let w: f64 = (0..self.params.n).map(|d| axis.value(u[d] - l.0[d] as f64)).product();
                c * w
            })
            .sum()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        enveloped_lp_norm(&self.polynomial(), &self.envelope, self.params.scale(), 1, p)
    }
}

/// `1, 1/2, ..., 2^{-halvings}`.
pub fn t_schedule(halvings: u32) -> Vec<f64> {
    (0..=halvings).map(|k| 2f64.powi(-(k as i32))).collect()
}

/// Behavior of `||f_{a,b,t}||_p` along a decreasing `t` schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TSequence {
    pub t: Vec<f64>,
    pub norms: Vec<f64>,
    pub radii: Vec<i64>,
    pub tails: Vec<f64>,
}

impl TSequence {
    /// Relative increments `norm_{k+1} / norm_k - 1`.
    pub fn increments(&self) -> Vec<f64> {
        self.norms.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.norms.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn last_increment(&self) -> f64 {
        self.increments().last().copied().unwrap_or(0.0)
    }

    /// Stabilizing: last relative increment below `tol` and the last increments contracting.
    pub fn stabilizes(&self, tol: f64) -> bool {
        let inc = self.increments();
        let k = inc.len();
        k >= 3 && inc[k - 1] < tol && inc[k - 1] < inc[k - 2] && inc[k - 2] < inc[k - 3]
    }

    pub fn sup(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn t_sequence(n: usize, a: f64, b: f64, p: f64, rho: f64, j: u32, ts: &[f64], envelope: &Arc<Envelope>) -> Result<TSequence> {
    let mut out = TSequence {
        t: ts.to_vec(),
        norms: Vec::with_capacity(ts.len()),
        radii: Vec::with_capacity(ts.len()),
        tails: Vec::with_capacity(ts.len()),
    };
    for &t in ts {
        let params = WaingerParams::with_auto_radius(n, a, b, t, j, rho)?;
        let f = build_wainger(params, Arc::clone(envelope))?;
        out.norms.push(f.lp_norm(p)?);
        out.radii.push(params.lattice_radius);
        out.tails.push(f.tail_bound);
    }
    Ok(out)
}

/// Per-`j` norms at the smallest `t`, with the fitted and predicted `log2` slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormScaling {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub rho: f64,
    pub n: usize,
    pub t_min: f64,
    pub j: Vec<u32>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub max_residual: f64,
    pub t_sequence: TSequence,
}

/// `log2`-slope of `||f||_{L^p}` over `j`, compared with `rho n (1 - 1/p)`.
#[allow(clippy::too_many_arguments)]
pub fn norm_scaling_experiment(
    n: usize,
    a: f64,
    b: f64,
    p: f64,
    rho: f64,
    js: &[u32],
    ts: &[f64],
    envelope: &Arc<Envelope>,
) -> Result<NormScaling> {
    if js.len() < 3 {
        return Err(Error::domain("norm_scaling_experiment", "need at least 3 values of j for a slope"));
    }
    let t_min = ts.iter().copied().fold(f64::INFINITY, f64::min);
    if !t_min.is_finite() {
        return Err(Error::domain("norm_scaling_experiment", "empty t schedule"));
    }
    let seq = t_sequence(n, a, b, p, rho, js[0], ts, envelope)?;
    let params = WaingerParams::with_auto_radius(n, a, b, t_min, 0, rho)?;
    let mut norms = Vec::with_capacity(js.len());
    for &j in js {
        let f = build_wainger(WaingerParams { j, ..params }, Arc::clone(envelope))?;
        norms.push(f.lp_norm(p)?);
    }
    let pts: Vec<(f64, f64)> = js.iter().zip(&norms).map(|(&j, &v)| (j as f64, v)).collect();
    let fit = crate::harness::fit_log2_slope(&pts)?;
    Ok(NormScaling {
        a,
        b,
        p,
        rho,
        n,
        t_min,
        j: js.to_vec(),
        norms,
        fitted_slope: fit.slope,
        predicted_slope: rho * n as f64 * (1.0 - 1.0 / p),
        max_residual: fit.max_residual,
        t_sequence: seq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::Bump;
    use crate::grid::Axis;
    use crate::trig::EnvelopePower;
    use std::sync::OnceLock;

    fn env(n: usize) -> Arc<Envelope> {
        static E1: OnceLock<Arc<Envelope>> = OnceLock::new();
        static E2: OnceLock<Arc<Envelope>> = OnceLock::new();
        let cell = if n == 1 { &E1 } else { &E2 };
        Arc::clone(cell.get_or_init(|| Arc::new(Envelope::new(Arc::new(Bump::phi_tilde(n).unwrap()), EnvelopePower::One))))
    }

    #[test]
    fn coefficient_formula() {
        let c = wainger_coefficient(0.5, 1.0, 1.0, &LatticePoint::new1(1));
        assert!((c - Complex64::from_polar((-1f64).exp(), 1.0)).norm() < 1e-15);
        let p = WaingerParams { n: 1, a: 0.5, b: 0.5, t: 1.0, lattice_radius: 64, j: 0, rho: 0.5 };
        let f = build_wainger(p, env(1)).unwrap();
        assert!(f.coeffs.iter().all(|(k, _)| !k.is_zero()));
        assert_eq!(f.coeffs.len(), 128);
        for (k, c) in &f.coeffs {
            assert!((c.norm() - (-k.norm()).exp() * k.norm().powf(-0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn l1_mass_matches_independent_sum() {
        let p = WaingerParams { n: 1, a: 0.5, b: 0.8, t: 0.25, lattice_radius: 64, j: 0, rho: 0.5 };
        let f = build_wainger(p, env(1)).unwrap();
        // oracle: compensated summation in reversed order
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for l in (1..=64).rev() {
            for _ in 0..2 {
                let term = (-0.25 * l as f64).exp() * (l as f64).powf(-0.8) - comp;
                let next = sum + term;
                comp = (next - sum) - term;
                sum = next;
            }
        }
        assert!((f.l1_mass() - sum).abs() < 1e-13 * sum);
    }

    #[test]
    fn radius_rejection() {
        let p = WaingerParams { n: 1, a: 0.5, b: 0.5, t: 0.01, lattice_radius: 8, j: 0, rho: 0.5 };
        match build_wainger(p, env(1)) {
            Err(Error::Certification { detail, .. }) => assert!(detail.contains("required")),
            other => panic!("expected rejection, got {other:?}"),
        }
        let capped = WaingerParams::with_auto_radius(1, 0.9, 0.55, 2f64.powi(-10), 0, 0.5).unwrap();
        assert_eq!(capped.lattice_radius, RADIUS_CAP_1D);
        let f = build_wainger(capped, env(1)).unwrap();
        assert!(f.tail_bound > 0.0 && f.tail_bound < 1e-2);
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        for &(b, t, r) in &[(0.5, 0.1, 40i64), (1.2, 0.05, 100)] {
            let exact: f64 = 2.0 * (r + 1..r + 20_000).map(|l| modulus(t, b, l as f64)).sum::<f64>();
            assert!(tail_bound_abs(1, b, t, r) >= exact);
        }
        let (b, t, r) = (1.0, 0.3, 10i64);
        let exact: f64 = LatticePoint::cube(2, 300)
            .filter(|k| k.norm_sq() > r * r)
            .map(|k| modulus(t, b, k.norm()))
            .sum();
        assert!(tail_bound_abs(2, b, t, r) >= exact);
    }

    #[test]
    fn single_term_evaluation() {
        let e = env(1);
        let f = WaingerFunction {
            params: WaingerParams { n: 1, a: 0.5, b: 0.5, t: 1.0, lattice_radius: 1, j: 0, rho: 0.5 },
            coeffs: vec![(LatticePoint::new1(1), Complex64::new(1.0, 0.0))],
            tail_bound: 0.0,
            envelope: Arc::clone(&e),
        };
        let g = UniformGrid::new(vec![Axis::new(-3.0, 0.01, 600).unwrap()]).unwrap();
        let v = f.evaluate_f(&g).unwrap();
        for (x, val) in g.points().iter().zip(v) {
            let expect = Complex64::from_polar(1.0, x[0]) * e.bump.eval_axis(x[0]);
            assert!((val - expect).norm() < 1e-15);
        }
        let coarse = UniformGrid::new(vec![Axis::new(-3.0, 2.5, 3).unwrap()]).unwrap();
        assert!(f.evaluate_f(&coarse).is_err());
    }

    #[test]
    fn shift_by_period_rescales_by_envelope() {
        let p = WaingerParams { n: 1, a: 0.7, b: 0.5, t: 0.5, lattice_radius: 24, j: 2, rho: 0.5 };
        let f = build_wainger(p, env(1)).unwrap();
        let s = p.scale();
        let x0 = 0.3;
        let shift = 2.0 * std::f64::consts::PI / s;
        let g = UniformGrid::new(vec![Axis::new(x0, shift, 2).unwrap()]).unwrap();
        // the grid itself is coarse; evaluate the two points directly
        let poly = f.polynomial();
        let v: Vec<Complex64> = g
            .points()
            .iter()
            .map(|x| poly.eval(&[s * x[0], 0.0]) * s * f.envelope.eval(&[s * x[0], 0.0]))
            .collect();
        let env_ratio = f.envelope.eval(&[s * (x0 + shift), 0.0]) / f.envelope.eval(&[s * x0, 0.0]);
        assert!((v[1] / v[0] - env_ratio).norm() < 1e-10);
    }

    #[test]
    fn forward_transform_matches_coefficients() {
        // oracle: Riemann sum of ∫ e^{-i x xi} f(x) dx over the evaluated samples
        // a short uncertified sum keeps the oracle cheap
        let p = WaingerParams { n: 1, a: 0.5, b: 0.5, t: 0.5, lattice_radius: 3, j: 0, rho: 0.5 };
        let f = WaingerFunction {
            params: p,
            coeffs: LatticePoint::cube(1, 3)
                .filter(|k| !k.is_zero())
                .map(|k| (k, wainger_coefficient(p.a, p.b, p.t, &k)))
                .collect(),
            tail_bound: 0.0,
            envelope: env(1),
        };
        let dx = 1.0 / 16.0;
        let lim = 512.0;
        let g = UniformGrid::new(vec![Axis::new(-lim, dx, (2.0 * lim / dx) as usize).unwrap()]).unwrap();
        let vals = f.evaluate_f(&g).unwrap();
        for &xi in &[0.0, 1.0, 1.3, 2.1, -2.9, 3.6] {
            let ft: Complex64 = g
                .points()
                .iter()
                .zip(&vals)
                .map(|(x, v)| v * Complex64::from_polar(dx, -x[0] * xi))
                .sum();
            let expect = f.fourier_transform(&[xi, 0.0]);
            assert!((ft - expect).norm() < 1e-6, "xi={xi}: {ft} vs {expect}");
        }
    }

    #[test]
    fn thresholds() {
        assert!((membership_threshold(1.0, 0.5, 1) - 0.5).abs() < 1e-15);
        assert!((membership_threshold(0.0, 0.0, 1) - 1.0).abs() < 1e-15);
        assert!((membership_threshold(0.5, 0.25, 2) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn scaling_needs_three_js() {
        let ts = t_schedule(2);
        assert!(norm_scaling_experiment(1, 0.9, 0.55, 2.0, 0.5, &[4, 5], &ts, &env(1)).is_err());
        let r = norm_scaling_experiment(1, 0.9, 0.55, 2.0, 0.5, &[4, 5, 6], &ts, &env(1)).unwrap();
        assert!((r.predicted_slope - 0.25).abs() < 1e-15);
        assert!((r.fitted_slope - 0.25).abs() < 1e-9);
    }

    #[test]
    fn two_dimensional_norm_matches_brute_force() {
        let e = env(2);
        let (a, b, t) = (0.5, 1.5, 1.0);
        let coeffs: Vec<_> = LatticePoint::cube(2, 3)
            .filter(|k| !k.is_zero() && k.norm_sq() <= 9)
            .map(|k| (k, wainger_coefficient(a, b, t, &k)))
            .collect();
        let f = WaingerFunction {
            params: WaingerParams { n: 2, a, b, t, lattice_radius: 3, j: 1, rho: 0.5 },
            coeffs,
            tail_bound: 0.0,
            envelope: Arc::clone(&e),
        };
        let fast = f.lp_norm(2.0).unwrap();
        let ax = Axis::new(-40.0, 0.1, 800).unwrap();
        let g = UniformGrid::new(vec![ax, ax]).unwrap();
        let brute = crate::operator::lp_norm(&f.evaluate_f(&g).unwrap(), 2.0, &g).unwrap();
        assert!((fast - brute).abs() < 1e-4 * brute, "{fast} vs {brute}");
    }
}
