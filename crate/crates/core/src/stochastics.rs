//! Counter-based Rademacher signs and Monte-Carlo Khintchine ratios.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_dim, LatticePoint};

pub const DEFAULT_TRIALS: usize = 128;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const MIN_TRIALS: usize = 32;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Where the signs `r_k` come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignSource {
    /// `r_k = +-1` from the parity bit of a hash of `(seed, k)`.
    Seed(u64),
    /// `r_k = +1` for every `k`.
    AllPlus,
}

impl SignSource {
    pub fn sign(&self, k: &LatticePoint) -> f64 {
        match *self {
            SignSource::AllPlus => 1.0,
            SignSource::Seed(seed) => {
                let h = splitmix64(splitmix64(splitmix64(seed) ^ k.0[0] as u64) ^ k.0[1] as u64);
                if h & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

pub fn sign(seed: u64, k: &LatticePoint) -> f64 {
    SignSource::Seed(seed).sign(k)
}

pub fn signs(seed: u64, keys: &[LatticePoint]) -> BTreeMap<LatticePoint, i8> {
    keys.iter().map(|k| (*k, sign(seed, k) as i8)).collect()
}

/// Seed of trial `i` derived from a base seed.
pub fn trial_seed(base: u64, i: usize) -> u64 {
    splitmix64(base ^ splitmix64(i as u64 ^ 0xD1B5_4A32_D192_ED03))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KhintchineEstimate {
    pub p: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

/// Midpoint nodes of `[-1,1]^n`: 4096 in dimension 1, 256 per axis in dimension 2.
fn cube_nodes(n: usize) -> (Vec<[f64; 2]>, f64) {
    let per_axis = if n == 1 { 4096 } else { 256 };
    let h = 2.0 / per_axis as f64;
    let axis: Vec<f64> = (0..per_axis).map(|i| -1.0 + (i as f64 + 0.5) * h).collect();
    let pts = if n == 1 {
        axis.iter().map(|&x| [x, 0.0]).collect()
    } else {
        axis.iter().flat_map(|&a| axis.iter().map(move |&b| [a, b])).collect()
    };
    (pts, h.powi(n as i32))
}

fn ratio_of(mean_pp: f64, p: f64, l2: f64) -> f64 {
    mean_pp.powf(1.0 / p) / l2
}

/// `(mean_t || sum_k r_k e^{ix.k} d_k ||_{L^p([-1,1]^n)}^p)^{1/p} / (sum d_k^2)^{1/2}`.
pub fn khintchine_ratio(d: &BTreeMap<LatticePoint, f64>, p: f64, n: usize, trials: usize, seed: u64) -> Result<KhintchineEstimate> {
    check_dim("khintchine_ratio", n)?;
    if d.is_empty() {
        return Err(Error::domain("khintchine_ratio", "empty coefficient map"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("khintchine_ratio", format!("p must lie in (0, inf), got {p}")));
    }
    if trials < MIN_TRIALS {
        return Err(Error::domain("khintchine_ratio", format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let keys: Vec<LatticePoint> = d.keys().copied().collect();
    let coef: Vec<f64> = d.values().copied().collect();
    let l2 = coef.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (nodes, vol) = cube_nodes(n);
    // phases e^{i x.k} for every node and key, shared by all trials
    let phases: Vec<Complex64> = nodes
        .iter()
        .flat_map(|x| keys.iter().map(move |k| Complex64::from_polar(1.0, k.dot(x))))
        .collect();
    let kk = keys.len();
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let src = SignSource::Seed(trial_seed(seed, t));
            let w: Vec<f64> = keys.iter().zip(&coef).map(|(k, c)| src.sign(k) * c).collect();
            phases
                .chunks(kk)
                .map(|row| {
                    let s: Complex64 = row.iter().zip(&w).map(|(e, c)| e * c).sum();
                    s.norm().powf(p)
                })
                .sum::<f64>()
                * vol
        })
        .collect();
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let s: f64 = (0..trials).map(|_| per_trial[rng.gen_range(0..trials)]).sum();
            ratio_of(s / trials as f64, p, l2)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let q = |f: f64| boot[((f * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize).min(BOOTSTRAP_RESAMPLES - 1)];
    Ok(KhintchineEstimate {
        p,
        ratio: ratio_of(mean, p, l2),
        ci_low: q(0.025),
        ci_high: q(0.975),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_signed() {
        let keys: Vec<_> = (-20..20).map(LatticePoint::new1).collect();
        let a = signs(7, &keys);
        assert_eq!(a, signs(7, &keys));
        assert!(a.values().all(|&s| s == 1 || s == -1));
        assert_ne!(a, signs(8, &keys));
    }

    #[test]
    fn mean_and_correlation_over_seeds() {
        let k1 = LatticePoint::new1(5);
        let k2 = LatticePoint::new2(5, 1);
        let n = 10_000u64;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        for seed in 0..n {
            let a = sign(seed, &k1);
            let b = sign(seed, &k2);
            s1 += a;
            s2 += b;
            s12 += a * b;
        }
        let (m1, m2) = (s1 / n as f64, s2 / n as f64);
        assert!(m1.abs() < 0.03 && m2.abs() < 0.03);
        let corr = (s12 / n as f64 - m1 * m2) / ((1.0 - m1 * m1) * (1.0 - m2 * m2)).sqrt();
        assert!(corr.abs() < 0.05);
    }

    #[test]
    fn single_key_is_exact() {
        let d: BTreeMap<_, _> = [(LatticePoint::new1(3), 2.5)].into_iter().collect();
        for &p in &[1.0, 2.0, 4.0] {
            let e = khintchine_ratio(&d, p, 1, 32, 1).unwrap();
            assert!((e.ratio - 2f64.powf(1.0 / p)).abs() < 1e-12);
            assert!((e.ci_high - e.ci_low).abs() < 1e-12);
        }
    }

    #[test]
    fn p2_ci_covers_root_two() {
        let d: BTreeMap<_, _> = (3..30).map(|k| (LatticePoint::new1(k), 1.0 / k as f64)).collect();
        let e = khintchine_ratio(&d, 2.0, 1, 128, 11).unwrap();
        let target = 2f64.sqrt();
        assert!(e.ci_low <= target && target <= e.ci_high, "{e:?}");
    }

    #[test]
    fn scale_invariant_and_reproducible() {
        let d: BTreeMap<_, _> = (2..12).map(|k| (LatticePoint::new1(k), (k as f64).sqrt())).collect();
        let scaled: BTreeMap<_, _> = d.iter().map(|(k, v)| (*k, 8.0 * v)).collect();
        let a = khintchine_ratio(&d, 4.0, 1, 64, 3).unwrap();
        let b = khintchine_ratio(&scaled, 4.0, 1, 64, 3).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
        assert_eq!(a, khintchine_ratio(&d, 4.0, 1, 64, 3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let empty = BTreeMap::new();
        assert!(khintchine_ratio(&empty, 2.0, 1, 64, 0).is_err());
        let d: BTreeMap<_, _> = [(LatticePoint::new1(1), 1.0)].into_iter().collect();
        assert!(khintchine_ratio(&d, 2.0, 1, 8, 0).is_err());
        assert!(khintchine_ratio(&d, f64::INFINITY, 1, 64, 0).is_err());
    }

    #[test]
    fn two_dimensional_single_key() {
        let d: BTreeMap<_, _> = [(LatticePoint::new2(1, 2), 1.0)].into_iter().collect();
        let e = khintchine_ratio(&d, 2.0, 2, 32, 0).unwrap();
        assert!((e.ratio - 2.0).abs() < 1e-12);
    }
}
