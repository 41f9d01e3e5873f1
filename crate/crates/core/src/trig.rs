//! Trigonometric polynomials times a tensor envelope, and their `L^p` norms.
//!
//! Functions of the form `F(x) = A * P(s x) * E(s x)` with `P(u) = sum c_k e^{i u.k}`
//! (period `2 pi` in each variable) and `E(u) = prod_d e(u_d)` appear for both
//! the Wainger inputs and the closed form of the counterexample output.
//! Substituting `u = s x` and sampling `u` on the grid `2 pi i / m`:
//!
//! ```text
//! ∫ |F|^p dx = A^p s^{-n} ∫ |P(u)|^p |E(u)|^p du
//!           ≈ A^p s^{-n} sum_r |P_r|^p prod_d W_{r_d},
//! W_r = h sum_{i ≡ r mod m} |e(2 pi i / m)|^p,   h = 2 pi / m,
//! ```
//!
//! where `P_r = P(2 pi r / m)` comes from one inverse FFT. The fold `W` depends
//! only on `(m, p)`, so it is computed once and reused across scales and
//! coefficient sets.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::bumps::Bump;
use crate::error::{Error, Result};
use crate::lattice::{check_dim, LatticePoint};

/// Minimum samples per period of the fastest mode.
pub const SAMPLES_PER_PERIOD: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    pub n: usize,
    pub terms: Vec<(LatticePoint, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(n: usize, terms: Vec<(LatticePoint, Complex64)>) -> Result<Self> {
        check_dim("TrigPolynomial", n)?;
        if n == 1 && terms.iter().any(|(k, _)| k.0[1] != 0) {
            return Err(Error::domain("TrigPolynomial", "second component must vanish in dimension 1"));
        }
        Ok(TrigPolynomial { n, terms })
    }

    /// Largest `|k_d|` over terms and axes.
    pub fn max_frequency(&self) -> i64 {
        self.terms
            .iter()
            .map(|(k, _)| k.0[0].abs().max(k.0[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// Smallest power of two with at least [`SAMPLES_PER_PERIOD`] samples per fastest period.
    pub fn torus_size(&self) -> usize {
        let need = (SAMPLES_PER_PERIOD as i64 * self.max_frequency().max(1)) as usize;
        need.next_power_of_two()
    }

    pub fn eval(&self, u: &[f64; 2]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k.dot(u)))
            .sum()
    }

    /// `P(2 pi r / m)` for all `r` in `[0, m)^n`, row-major.
    pub fn torus_values(&self, m: usize) -> Result<Vec<Complex64>> {
        if (2 * self.max_frequency()) as usize >= m {
            return Err(Error::Resolution {
                op: "torus_values",
                detail: format!("torus size {m} aliases frequency {}", self.max_frequency()),
            });
        }
        let wrap = |k: i64| k.rem_euclid(m as i64) as usize;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(m);
        match self.n {
            1 => {
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (k, c) in &self.terms {
                    buf[wrap(k.0[0])] += c;
                }
                fft.process(&mut buf);
                Ok(buf)
            }
            _ => {
                let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
                for (k, c) in &self.terms {
                    buf[wrap(k.0[0]) * m + wrap(k.0[1])] += c;
                }
                for row in buf.chunks_mut(m) {
                    fft.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); m];
                for j in 0..m {
                    for i in 0..m {
                        col[i] = buf[i * m + j];
                    }
                    fft.process(&mut col);
                    for i in 0..m {
                        buf[i * m + j] = col[i];
                    }
                }
                Ok(buf)
            }
        }
    }
}

/// Which power of the bump's transform forms the envelope factor `e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvelopePower {
    One,
    Two,
}

// keyed by (torus size, bits of p)
type FoldCache = HashMap<(usize, u64), Arc<Vec<f64>>>;

/// Envelope `e(u) = (F^{-1} bump)(u)` or its square, with cached folds.
pub struct Envelope {
    pub bump: Arc<Bump>,
    pub power: EnvelopePower,
    folds: Mutex<FoldCache>,
}

impl std::fmt::Debug for Envelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Envelope")
            .field("kind", &self.bump.kind)
            .field("power", &self.power)
            .finish()
    }
}

impl Envelope {
    pub fn new(bump: Arc<Bump>, power: EnvelopePower) -> Self {
        Envelope {
            bump,
            power,
            folds: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.bump.n
    }

    pub fn axis(&self, u: f64) -> f64 {
        let v = self.bump.eval_axis(u);
        match self.power {
            EnvelopePower::One => v,
            EnvelopePower::Two => v * v,
        }
    }

    pub fn eval(&self, u: &[f64; 2]) -> f64 {
        (0..self.n()).map(|d| self.axis(u[d])).product()
    }

    /// `W_r` for `r in [0, m)`; for `p = inf` the fold takes maxima instead of sums.
    pub fn fold(&self, m: usize, p: f64) -> Arc<Vec<f64>> {
        let key = (m, p.to_bits());
        if let Some(w) = self.folds.lock().expect("fold cache poisoned").get(&key) {
            return Arc::clone(w);
        }
        let h = 2.0 * PI / m as f64;
        let imax = (self.bump.radius() / h).floor() as i64;
        let mut w = vec![0.0; m];
        for i in -imax..=imax {
            let v = self.axis(i as f64 * h).abs();
            let r = i.rem_euclid(m as i64) as usize;
            if p.is_infinite() {
                w[r] = f64::max(w[r], v);
            } else {
                w[r] += v.powf(p) * h;
            }
        }
        let w = Arc::new(w);
        self.folds
            .lock()
            .expect("fold cache poisoned")
            .insert(key, Arc::clone(&w));
        w
    }
}

fn check_p(op: &'static str, p: f64) -> Result<()> {
    if !(p > 0.0) || p.is_nan() {
        return Err(Error::domain(op, format!("p must be positive, got {p}")));
    }
    if p < 1.0 {
        return Err(Error::Certification {
            stage: "envelope tail",
            detail: format!("tail certificate covers p >= 1, got {p}"),
        });
    }
    Ok(())
}

/// `|| A P(s x) E(s x) ||_{L^p(R^n)}` with `A = s^{amp_power * n}`.
pub fn enveloped_lp_norm(poly: &TrigPolynomial, env: &Envelope, s: f64, amp_power: i32, p: f64) -> Result<f64> {
    check_p("enveloped_lp_norm", p)?;
    if poly.n != env.n() {
        return Err(Error::domain("enveloped_lp_norm", "dimension mismatch"));
    }
    let n = poly.n;
    let m = poly.torus_size();
    let vals = poly.torus_values(m)?;
    let w = env.fold(m, p);
    let amp = s.powi(amp_power * n as i32);
    if p.is_infinite() {
        let mut best: f64 = 0.0;
        for (idx, v) in vals.iter().enumerate() {
            let weight = if n == 1 { w[idx] } else { w[idx / m] * w[idx % m] };
            best = best.max(v.norm() * weight);
        }
        return Ok(amp * best);
    }
    let sum: f64 = vals
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let weight = if n == 1 { w[idx] } else { w[idx / m] * w[idx % m] };
            v.norm().powf(p) * weight
        })
        .sum();
    Ok(amp * (sum / s.powi(n as i32)).powf(1.0 / p))
}
