//! The lattice counterexample at the critical order: the pair set `D_j`, the
//! symbol `sigma_j`, its coefficients and the closed form of `T_sigma(f_1, f_2)`.
//!
//! With `s = 2^{j rho}` and `c = 2^{j(1-rho)}`,
//!
//! ```text
//! sigma_j(xi1, xi2) = sum_{(k1,k2) in D_j} c_{k1,k2} (1+|k1|+|k2|)^{m0} phi(xi1/s - k1) phi(xi2/s - k2)
//! T(x) = (s^n Phi(s x))^2 sum_k r_k e^{i s x.k} d_{k,t}
//! ```
//!
//! where `m0` is the modified order `m0~` of the exponent point.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::Bump;
use crate::error::{Error, Result};
use crate::exponents::{locate, m0_tilde, ExponentPoint, ExponentTriple, Rational, RegionFamily};
use crate::grid::UniformGrid;
use crate::lattice::{check_dim, LatticePoint};
use crate::operator::{Symbol, SupportBox};
use crate::stochastics::SignSource;
use crate::trig::{enveloped_lp_norm, Envelope, EnvelopePower, TrigPolynomial};
use crate::wainger::membership_threshold;

/// `{k : lower * 2^{j(1-rho)} <= |k| <= upper * 2^{j(1-rho)}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBand {
    pub j: u32,
    pub rho: Rational,
    pub n: usize,
    pub lower_factor: f64,
    pub upper_factor: f64,
}

impl DyadicBand {
    pub fn new(j: u32, rho: Rational, n: usize) -> Result<Self> {
        Self::with_factors(j, rho, n, 0.5, 2.0)
    }

    pub fn with_factors(j: u32, rho: Rational, n: usize, lower_factor: f64, upper_factor: f64) -> Result<Self> {
        check_dim("DyadicBand", n)?;
        if rho < Rational::ZERO || rho > Rational::ONE {
            return Err(Error::domain("DyadicBand", format!("rho must lie in [0,1], got {rho}")));
        }
        if !(lower_factor > 0.0 && upper_factor > lower_factor) {
            return Err(Error::domain("DyadicBand", "need 0 < lower_factor < upper_factor"));
        }
        let band = DyadicBand {
            j,
            rho,
            n,
            lower_factor,
            upper_factor,
        };
        if band.points().is_empty() {
            return Err(Error::domain(
                "DyadicBand",
                format!("band [{}, {}] holds no lattice point", band.lower(), band.upper()),
            ));
        }
        Ok(band)
    }

    /// `2^{j(1-rho)}`.
    pub fn center(&self) -> f64 {
        2f64.powf(self.j as f64 * (1.0 - self.rho.to_f64()))
    }

    /// Frequency scale `s = 2^{j rho}`.
    pub fn scale(&self) -> f64 {
        2f64.powf(self.j as f64 * self.rho.to_f64())
    }

    pub fn lower(&self) -> f64 {
        self.lower_factor * self.center()
    }

    pub fn upper(&self) -> f64 {
        self.upper_factor * self.center()
    }

    pub fn contains(&self, k: &LatticePoint) -> bool {
        let r = k.norm();
        r >= self.lower() && r <= self.upper()
    }

    /// Band points in lexicographic order.
    pub fn points(&self) -> Vec<LatticePoint> {
        LatticePoint::cube(self.n, self.upper().floor() as i64)
            .filter(|k| self.contains(k))
            .collect()
    }
}

/// Recommended `(a1, a2)` for an exponent point: the limits `1` and `0` are
/// approached as `0.9` and `0.1` according to the `I`-quadrant.
pub fn recommended_a(point: ExponentPoint) -> (f64, f64) {
    match locate(point, RegionFamily::I).index {
        1 => (0.9, 0.9),
        2 => (0.9, 0.1),
        3 => (0.1, 0.9),
        _ => (0.1, 0.1),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub triple: ExponentTriple,
    pub rho: Rational,
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub epsilon: f64,
    /// Added to `b_i` after the formula; zero except in negative controls.
    pub b_offset: [f64; 2],
}

impl CounterexampleParams {
    pub fn new(triple: ExponentTriple, rho: Rational, n: usize, a1: f64, a2: f64, epsilon: f64) -> Result<Self> {
        let p = CounterexampleParams {
            triple,
            rho,
            n,
            a1,
            a2,
            epsilon,
            b_offset: [0.0, 0.0],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("CounterexampleParams", self.n)?;
        if !(self.rho > Rational::ZERO && self.rho < Rational::ONE) {
            return Err(Error::domain("CounterexampleParams", format!("rho must lie in (0,1), got {}", self.rho)));
        }
        for (name, a) in [("a1", self.a1), ("a2", self.a2)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::domain("CounterexampleParams", format!("{name} must lie in (0,1], got {a}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain("CounterexampleParams", format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn rho_f64(&self) -> f64 {
        self.rho.to_f64()
    }

    /// `n - n a_i/2 - n/p_i + n a_i/p_i + epsilon`.
    pub fn b1(&self) -> f64 {
        membership_threshold(self.a1, self.triple.inv_p1.to_f64(), self.n) + self.epsilon + self.b_offset[0]
    }

    pub fn b2(&self) -> f64 {
        membership_threshold(self.a2, self.triple.inv_p2.to_f64(), self.n) + self.epsilon + self.b_offset[1]
    }

    pub fn m0(&self) -> Rational {
        m0_tilde(self.triple.point(), self.n as u32)
    }

    fn gap(&self) -> f64 {
        self.m0().to_f64() - self.b1() - self.b2()
    }

    /// Predicted log2-slope of `max_k d_k`.
    pub fn dk_max_slope(&self) -> f64 {
        (1.0 - self.rho_f64()) * (self.gap() + self.n as f64)
    }

    /// Predicted log2-slope of `(sum d_k^2)^{1/2}`.
    pub fn dk_l2_slope(&self) -> f64 {
        (1.0 - self.rho_f64()) * (self.gap() + 1.5 * self.n as f64)
    }

    pub fn slice_slope(&self) -> f64 {
        (1.0 - self.rho_f64()) * self.n as f64
    }

    /// Predicted slope of `||f_i||_{L^{p_i}}`: `rho n (1 - 1/p_i)`.
    pub fn f_norm_slope(&self, i: usize) -> f64 {
        let inv = if i == 1 { self.triple.inv_p1 } else { self.triple.inv_p2 };
        self.rho_f64() * self.n as f64 * (1.0 - inv.to_f64())
    }

    /// Predicted slope of `||T(f1,f2)||_p / (||f1|| ||f2||)`.
    pub fn blowup_slope(&self) -> f64 {
        let t = &self.triple;
        let holder = (t.inv_p1 + t.inv_p2 - t.inv_p).to_f64();
        self.dk_l2_slope() + self.rho_f64() * self.n as f64 * holder
    }
}

/// All `(k1, k2)` with `|k1|, |k2|, |k1 + k2|` in the band, lexicographic.
pub fn build_dj(band: &DyadicBand) -> Vec<(LatticePoint, LatticePoint)> {
    let pts = band.points();
    pts.par_iter()
        .flat_map_iter(|&k1| {
            pts.iter()
                .filter(move |&&k2| band.contains(&(k1 + k2)))
                .map(move |&k2| (k1, k2))
        })
        .collect()
}

/// `c_{k1,k2} = r_{k1+k2} e^{-i|k1|^{a1}} e^{-i|k2|^{a2}}`.
pub fn choose_c(
    signs: SignSource,
    a1: f64,
    a2: f64,
    dj: &[(LatticePoint, LatticePoint)],
) -> Vec<(LatticePoint, LatticePoint, Complex64)> {
    dj.iter()
        .map(|&(k1, k2)| {
            let r = signs.sign(&(k1 + k2));
            let phase = -(k1.norm().powf(a1) + k2.norm().powf(a2));
            (k1, k2, Complex64::from_polar(r, phase))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct LatticeSymbol {
    pub j: u32,
    pub rho: Rational,
    pub n: usize,
    pub m0: Rational,
    pub scale: f64,
    /// `(k1, k2, c)`.
    pub pairs: Vec<(LatticePoint, LatticePoint, Complex64)>,
    /// `c (1+|k1|+|k2|)^{m0}` per pair.
    amplitudes: Vec<Complex64>,
    index: HashMap<(LatticePoint, LatticePoint), usize>,
    pub bump: Arc<Bump>,
}

pub fn build_sigma(
    params: &CounterexampleParams,
    band: &DyadicBand,
    coeffs: Vec<(LatticePoint, LatticePoint, Complex64)>,
    bump: Arc<Bump>,
) -> Result<LatticeSymbol> {
    if bump.n != params.n || band.n != params.n {
        return Err(Error::domain("build_sigma", "dimension mismatch between params, band and bump"));
    }
    if bump.support_halfwidth() >= 0.5 {
        return Err(Error::domain("build_sigma", "bump support must stay inside one lattice cell"));
    }
    let m0 = params.m0();
    let mut index = HashMap::with_capacity(coeffs.len());
    let mut amplitudes = Vec::with_capacity(coeffs.len());
    for (i, (k1, k2, c)) in coeffs.iter().enumerate() {
        if !(band.contains(k1) && band.contains(k2) && band.contains(&(*k1 + *k2))) {
            return Err(Error::domain("build_sigma", format!("pair {k1:?}, {k2:?} is outside D_j")));
        }
        if c.norm() > 1.0 + 1e-12 {
            return Err(Error::domain("build_sigma", "coefficients must satisfy |c| <= 1"));
        }
        index.insert((*k1, *k2), i);
        amplitudes.push(c * (1.0 + k1.norm() + k2.norm()).powf(m0.to_f64()));
    }
    Ok(LatticeSymbol {
        j: band.j,
        rho: band.rho,
        n: params.n,
        m0,
        scale: band.scale(),
        pairs: coeffs,
        amplitudes,
        index,
        bump,
    })
}

impl LatticeSymbol {
    fn cell(&self, u: &[f64; 2]) -> LatticePoint {
        let mut k = LatticePoint::ZERO;
        for (kd, ud) in k.0.iter_mut().zip(u).take(self.n) {
            *kd = ud.round() as i64;
        }
        k
    }

    /// `sigma_j(xi1, xi2)`; at most one pair contributes.
    pub fn eval(&self, xi1: &[f64; 2], xi2: &[f64; 2]) -> Complex64 {
        let s = self.scale;
        let u1 = [xi1[0] / s, xi1[1] / s];
        let u2 = [xi2[0] / s, xi2[1] / s];
        let (k1, k2) = (self.cell(&u1), self.cell(&u2));
        let Some(&i) = self.index.get(&(k1, k2)) else {
            return Complex64::new(0.0, 0.0);
        };
        let axis = &self.bump.axis;
        let mut w = 1.0;
        for d in 0..self.n {
            w *= axis.value(u1[d] - k1.0[d] as f64) * axis.value(u2[d] - k2.0[d] as f64);
        }
        self.amplitudes[i] * w
    }

    /// Support boxes `s (k1 + [-h,h]^n) x s (k2 + [-h,h]^n)` in `(xi1, xi2)` coordinates.
    pub fn support_boxes(&self) -> Vec<SupportBox> {
        let h = self.bump.support_halfwidth();
        let s = self.scale;
        self.pairs
            .iter()
            .map(|(k1, k2, _)| {
                let mut lo = [0.0; 4];
                let mut hi = [0.0; 4];
                for d in 0..self.n {
                    lo[d] = s * (k1.0[d] as f64 - h);
                    hi[d] = s * (k1.0[d] as f64 + h);
                    lo[self.n + d] = s * (k2.0[d] as f64 - h);
                    hi[self.n + d] = s * (k2.0[d] as f64 + h);
                }
                SupportBox { lo, hi }
            })
            .collect()
    }
}

impl Symbol for LatticeSymbol {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, _x: &[f64; 2], xi1: &[f64; 2], xi2: &[f64; 2]) -> Complex64 {
        LatticeSymbol::eval(self, xi1, xi2)
    }

    fn support(&self) -> Option<Vec<SupportBox>> {
        Some(self.support_boxes())
    }
}

/// `d_{k,t}` with slice cardinalities; only nonempty slices are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct DkTable {
    pub t: f64,
    pub values: BTreeMap<LatticePoint, f64>,
    pub cardinality: BTreeMap<LatticePoint, usize>,
}

impl DkTable {
    pub fn max(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    pub fn l2(&self) -> f64 {
        self.values.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_cardinality(&self) -> usize {
        self.cardinality.values().copied().max().unwrap_or(0)
    }

    /// Columns `k, d_k, slice cardinality`; `k` is written as `k1` or `k1;k2`.
    pub fn write_csv(&self, path: &Path, n: usize) -> Result<()> {
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::from("k,d_k,slice_cardinality\n");
        for (k, v) in &self.values {
            let key = if n == 1 {
                k.0[0].to_string()
            } else {
                format!("{};{}", k.0[0], k.0[1])
            };
            text.push_str(&format!("{key},{v:.17e},{}\n", self.cardinality[k]));
        }
        out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Single term of the slice sum.
pub fn dk_term(m0: f64, b1: f64, b2: f64, t: f64, k1: &LatticePoint, k2: &LatticePoint) -> f64 {
    let (r1, r2) = (k1.norm(), k2.norm());
    (1.0 + r1 + r2).powf(m0) * r1.powf(-b1) * r2.powf(-b2) * (-t * (r1 + r2)).exp()
}

/// `d_{k,t} = sum_{k1 : |k1|, |k-k1| in band} (1+|k1|+|k-k1|)^{m0} |k1|^{-b1} |k-k1|^{-b2} e^{-t(|k1|+|k-k1|)}`.
pub fn compute_dk(params: &CounterexampleParams, band: &DyadicBand, t: f64) -> Result<DkTable> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain("compute_dk", format!("t must be finite and >= 0, got {t}")));
    }
    let (m0, b1, b2) = (params.m0().to_f64(), params.b1(), params.b2());
    let pts = band.points();
    let rows: Vec<(LatticePoint, f64, usize)> = pts
        .par_iter()
        .map(|&k| {
            let mut sum = 0.0;
            let mut count = 0;
            for k1 in &pts {
                let k2 = k - *k1;
                if band.contains(&k2) {
                    sum += dk_term(m0, b1, b2, t, k1, &k2);
                    count += 1;
                }
            }
            (k, sum, count)
        })
        .collect();
    let mut values = BTreeMap::new();
    let mut cardinality = BTreeMap::new();
    for (k, v, c) in rows.into_iter().filter(|r| r.2 > 0) {
        values.insert(k, v);
        cardinality.insert(k, c);
    }
    Ok(DkTable { t, values, cardinality })
}

fn output_polynomial(n: usize, dk: &BTreeMap<LatticePoint, f64>, signs: SignSource) -> Result<TrigPolynomial> {
    TrigPolynomial::new(
        n,
        dk.iter().map(|(k, v)| (*k, Complex64::new(signs.sign(k) * v, 0.0))).collect(),
    )
}

/// `(s^n Phi(s x))^2 sum_k r_k e^{i s x.k} d_k` on `x_grid`; `bump` is `phi`.
pub fn closed_form_t(
    band: &DyadicBand,
    dk: &BTreeMap<LatticePoint, f64>,
    signs: SignSource,
    x_grid: &UniformGrid,
    bump: &Bump,
) -> Result<Vec<Complex64>> {
    let n = band.n;
    if x_grid.dim() != n || bump.n != n {
        return Err(Error::domain("closed_form_t", "dimension mismatch"));
    }
    let s = band.scale();
    let poly = output_polynomial(n, dk, signs)?;
    let kmax = poly.max_frequency() as f64;
    let limit = std::f64::consts::PI / (s * (kmax + 0.5));
    if x_grid.max_step() >= limit {
        return Err(Error::Resolution {
            op: "closed_form_t",
            detail: format!("grid step {} must stay below {limit}", x_grid.max_step()),
        });
    }
    let amp = s.powi(n as i32);
    Ok(x_grid
        .points()
        .iter()
        .map(|x| {
            let u = [s * x[0], s * x[1]];
            let env = amp * bump.eval_spatial(&u);
            poly.eval(&u) * (env * env)
        })
        .collect())
}

/// `||T(f1, f2)||_{L^p}` from the closed form; `envelope` must be `Phi^2`.
pub fn closed_form_norm(
    band: &DyadicBand,
    dk: &BTreeMap<LatticePoint, f64>,
    signs: SignSource,
    envelope: &Envelope,
    p: f64,
) -> Result<f64> {
    if envelope.power != EnvelopePower::Two {
        return Err(Error::domain("closed_form_norm", "envelope must be the squared transform"));
    }
    let poly = output_polynomial(band.n, dk, signs)?;
    enveloped_lp_norm(&poly, envelope, band.scale(), 2, p)
}
