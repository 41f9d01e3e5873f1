//! Brute-force evaluation of bilinear operators by frequency quadrature, and
//! finite-difference estimates of `BS^m_{rho,delta}` seminorms.
//!
//! ```text
//! T(f1, f2)(x) = (2 pi)^{-2n} ∫∫ e^{i x.(xi1 + xi2)} sigma(x, xi1, xi2) f1^(xi1) f2^(xi2) dxi1 dxi2
//! ```

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::lattice::{check_dim, norm};

/// Axis-aligned box in `(xi1, xi2)` coordinates; the first `n` entries belong to `xi1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

pub trait Symbol: Sync {
    fn n(&self) -> usize;
    fn eval(&self, x: &[f64; 2], xi1: &[f64; 2], xi2: &[f64; 2]) -> Complex64;
    fn x_independent(&self) -> bool {
        true
    }
    /// Boxes covering the support, when known.
    fn support(&self) -> Option<Vec<SupportBox>> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantSymbol {
    pub n: usize,
    pub value: Complex64,
}

impl Symbol for ConstantSymbol {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, _: &[f64; 2], _: &[f64; 2], _: &[f64; 2]) -> Complex64 {
        self.value
    }
}

/// A symbol given by a closure `(x, xi1, xi2) -> value`.
pub struct FnSymbol<F> {
    pub n: usize,
    pub x_independent: bool,
    pub f: F,
}

impl<F> Symbol for FnSymbol<F>
where
    F: Fn(&[f64; 2], &[f64; 2], &[f64; 2]) -> Complex64 + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64; 2], xi1: &[f64; 2], xi2: &[f64; 2]) -> Complex64 {
        (self.f)(x, xi1, xi2)
    }

    fn x_independent(&self) -> bool {
        self.x_independent
    }
}

/// Samples of `f^` on a frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySamples {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

impl FrequencySamples {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::domain("FrequencySamples", "sample count differs from grid size"));
        }
        Ok(FrequencySamples { grid, values })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(&[f64; 2]) -> Complex64 + Sync) -> Self {
        let values = grid.points().par_iter().map(&f).collect();
        FrequencySamples { grid, values }
    }

    fn on_boundary(&self, idx: usize) -> bool {
        let mut rest = idx;
        for ax in self.grid.axes.iter().rev() {
            let i = rest % ax.len;
            rest /= ax.len;
            if i == 0 || i + 1 == ax.len {
                return true;
            }
        }
        false
    }
}

/// Relative size below which boundary samples count as vanishing.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

fn phases(points: &[[f64; 2]], x: &[f64; 2]) -> Vec<Complex64> {
    points
        .iter()
        .map(|xi| Complex64::from_polar(1.0, x[0] * xi[0] + x[1] * xi[1]))
        .collect()
}

/// Double Riemann sum of the bilinear integral at each point of `x_grid`.
pub fn apply_bilinear(
    symbol: &dyn Symbol,
    f1: &FrequencySamples,
    f2: &FrequencySamples,
    x_grid: &UniformGrid,
) -> Result<Vec<Complex64>> {
    let n = symbol.n();
    check_dim("apply_bilinear", n)?;
    if f1.grid.dim() != n || f2.grid.dim() != n || x_grid.dim() != n {
        return Err(Error::domain("apply_bilinear", "dimension mismatch"));
    }
    let delta = f1.grid.max_step().max(f2.grid.max_step());
    if x_grid.max_abs() * delta > std::f64::consts::FRAC_PI_2 {
        return Err(Error::Resolution {
            op: "apply_bilinear",
            detail: format!(
                "phase step |x| * dxi = {} exceeds pi/2",
                x_grid.max_abs() * delta
            ),
        });
    }
    let p1 = f1.grid.points();
    let p2 = f2.grid.points();
    let xs = x_grid.points();
    let vol = f1.grid.cell_volume() * f2.grid.cell_volume() / (2.0 * std::f64::consts::PI).powi(2 * n as i32);
    let zero = Complex64::new(0.0, 0.0);

    if !symbol.x_independent() {
        return Ok(xs
            .par_iter()
            .map(|x| {
                let e1 = phases(&p1, x);
                let e2 = phases(&p2, x);
                let mut acc = zero;
                for (i1, xi1) in p1.iter().enumerate() {
                    let a = f1.values[i1] * e1[i1];
                    if a == zero {
                        continue;
                    }
                    for (i2, xi2) in p2.iter().enumerate() {
                        acc += a * e2[i2] * f2.values[i2] * symbol.eval(x, xi1, xi2);
                    }
                }
                acc * vol
            })
            .collect());
    }

    let origin = [0.0, 0.0];
    let rows: Vec<Vec<(u32, u32, Complex64)>> = (0..p1.len())
        .into_par_iter()
        .map(|i1| {
            let a = f1.values[i1];
            if a == zero {
                return Vec::new();
            }
            p2.iter()
                .enumerate()
                .filter_map(|(i2, xi2)| {
                    let b = f2.values[i2];
                    if b == zero {
                        return None;
                    }
                    let w = symbol.eval(&origin, &p1[i1], xi2) * a * b;
                    (w != zero).then_some((i1 as u32, i2 as u32, w))
                })
                .collect()
        })
        .collect();
    let weights: Vec<(u32, u32, Complex64)> = rows.into_iter().flatten().collect();
    let peak = weights.iter().map(|w| w.2.norm()).fold(0.0, f64::max);
    let edge = weights
        .iter()
        .filter(|(i1, i2, _)| f1.on_boundary(*i1 as usize) || f2.on_boundary(*i2 as usize))
        .map(|w| w.2.norm())
        .fold(0.0, f64::max);
    if edge > BOUNDARY_TOLERANCE * peak {
        return Err(Error::Resolution {
            op: "apply_bilinear",
            detail: format!("integrand reaches the frequency-grid boundary (relative size {:.3e})", edge / peak),
        });
    }
    Ok(xs
        .par_iter()
        .map(|x| {
            let e1 = phases(&p1, x);
            let e2 = phases(&p2, x);
            let acc: Complex64 = weights
                .iter()
                .map(|&(i1, i2, w)| w * e1[i1 as usize] * e2[i2 as usize])
                .sum();
            acc * vol
        })
        .collect())
}

/// Riemann-sum `L^p` norm; `p = inf` takes the maximum.
pub fn lp_norm(values: &[Complex64], p: f64, grid: &UniformGrid) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain("lp_norm", format!("p must be positive, got {p}")));
    }
    if values.len() != grid.len() {
        return Err(Error::domain("lp_norm", "sample count differs from grid size"));
    }
    if p.is_infinite() {
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((s * grid.cell_volume()).powf(1.0 / p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolClassParams {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub n: usize,
}

impl SymbolClassParams {
    pub fn new(m: f64, rho: f64, delta: f64, n: usize) -> Result<Self> {
        check_dim("SymbolClassParams", n)?;
        if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain("SymbolClassParams", "rho and delta must lie in [0,1]"));
        }
        Ok(SymbolClassParams { m, rho, delta, n })
    }
}

/// Where the supremum is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EvalNodes {
    /// `per_axis` interior midpoints per coordinate in every support box of the symbol.
    SupportBoxes { per_axis: usize },
    /// Explicit `(xi1, xi2)` nodes, first `n` entries for `xi1`.
    Points(Vec<[f64; 4]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormConfig {
    /// `M`: bound on each of `|alpha|, |beta1|, |beta2|`.
    pub max_order: u32,
    /// Step relative to `scale`.
    pub fd_step: f64,
    /// Natural frequency scale of the symbol.
    pub scale: f64,
    pub nodes: EvalNodes,
    /// `x` nodes for x-dependent symbols.
    pub x_points: Vec<[f64; 2]>,
}

impl SeminormConfig {
    pub fn new(max_order: u32, scale: f64, nodes: EvalNodes) -> Self {
        SeminormConfig {
            max_order,
            fd_step: 1e-3,
            scale,
            nodes,
            x_points: vec![[0.0, 0.0]],
        }
    }

    pub fn step(&self) -> f64 {
        self.fd_step * self.scale
    }
}

/// Largest supported order: the 5-point stencils reach the fourth derivative.
pub const MAX_STENCIL_ORDER: u32 = 4;

const STENCILS: [[f64; 5]; 5] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormTerm {
    pub alpha: [u32; 2],
    pub beta1: [u32; 2],
    pub beta2: [u32; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub value: f64,
    pub max_order: u32,
    pub nodes: usize,
    pub breakdown: Vec<SeminormTerm>,
}

/// Multi-indices in `N^n` of length at most `m`.
fn multi_indices(n: usize, m: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for a in 0..=m {
        if n == 1 {
            out.push([a, 0]);
        } else {
            for b in 0..=(m - a) {
                out.push([a, b]);
            }
        }
    }
    out
}

fn box_nodes(b: &SupportBox, dims: usize, per_axis: usize) -> Vec<[f64; 4]> {
    let mut out = vec![[0.0; 4]];
    for d in 0..dims {
        let mut next = Vec::with_capacity(out.len() * per_axis);
        for z in &out {
            for i in 0..per_axis {
                let mut w = *z;
                w[d] = b.lo[d] + (i as f64 + 0.5) / per_axis as f64 * (b.hi[d] - b.lo[d]);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Max over nodes and multi-indices of
/// `(1+|xi1|+|xi2|)^{-m - delta|alpha| + rho(|beta1|+|beta2|)} |d_x^alpha d_xi1^beta1 d_xi2^beta2 sigma|`
/// with central second-order differences.
pub fn seminorm_estimate(symbol: &dyn Symbol, params: &SymbolClassParams, config: &SeminormConfig) -> Result<SeminormReport> {
    let n = params.n;
    if symbol.n() != n {
        return Err(Error::domain("seminorm_estimate", "dimension mismatch"));
    }
    if config.max_order > MAX_STENCIL_ORDER {
        return Err(Error::domain(
            "seminorm_estimate",
            format!("max_order {} exceeds {MAX_STENCIL_ORDER}", config.max_order),
        ));
    }
    let h = config.step();
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("seminorm_estimate", format!("step must be positive, got {h}")));
    }
    let xi_nodes: Vec<[f64; 4]> = match &config.nodes {
        EvalNodes::Points(p) => p.clone(),
        EvalNodes::SupportBoxes { per_axis } => {
            let boxes = symbol.support().ok_or_else(|| {
                Error::domain("seminorm_estimate", "symbol does not expose support boxes")
            })?;
            boxes.iter().flat_map(|b| box_nodes(b, 2 * n, (*per_axis).max(1))).collect()
        }
    };
    if xi_nodes.is_empty() {
        return Err(Error::domain("seminorm_estimate", "no evaluation nodes"));
    }
    let reach = xi_nodes
        .iter()
        .flat_map(|z| z.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    if h <= 1e-8 * reach.max(1.0) {
        return Err(Error::Resolution {
            op: "seminorm_estimate",
            detail: format!("step {h} underflows against node magnitude {reach}"),
        });
    }

    let x_dep = !symbol.x_independent();
    let m = config.max_order;
    let alphas = if x_dep { multi_indices(n, m) } else { vec![[0, 0]] };
    let betas = multi_indices(n, m);
    let mut indices = Vec::new();
    for a in &alphas {
        for b1 in &betas {
            for b2 in &betas {
                indices.push((*a, *b1, *b2));
            }
        }
    }
    // stencil coordinates: xi1 (n), xi2 (n), then x (n) when x-dependent
    let dims = if x_dep { 3 * n } else { 2 * n };
    let offsets = 5usize.pow(dims as u32);
    let orders: Vec<Vec<u32>> = indices
        .iter()
        .map(|(a, b1, b2)| {
            let mut o: Vec<u32> = b1[..n].iter().chain(&b2[..n]).copied().collect();
            if x_dep {
                o.extend_from_slice(&a[..n]);
            }
            o
        })
        .collect();
    let x_nodes: Vec<[f64; 2]> = if x_dep { config.x_points.clone() } else { vec![[0.0, 0.0]] };
    let combos: Vec<([f64; 2], [f64; 4])> = x_nodes
        .iter()
        .flat_map(|x| xi_nodes.iter().map(move |z| (*x, *z)))
        .collect();

    let per_node: Vec<Vec<f64>> = combos
        .par_iter()
        .map(|(x, z)| {
            let mut vals = vec![Complex64::new(0.0, 0.0); offsets];
            let mut digits = vec![0usize; dims];
            for (idx, v) in vals.iter_mut().enumerate() {
                let mut r = idx;
                for d in digits.iter_mut() {
                    *d = r % 5;
                    r /= 5;
                }
                let shift = |d: usize| (digits[d] as f64 - 2.0) * h;
                let mut xi1 = [0.0; 2];
                let mut xi2 = [0.0; 2];
                let mut xx = *x;
                for d in 0..n {
                    xi1[d] = z[d] + shift(d);
                    xi2[d] = z[n + d] + shift(n + d);
                    if x_dep {
                        xx[d] += shift(2 * n + d);
                    }
                }
                *v = symbol.eval(&xx, &xi1, &xi2);
            }
            let size = 1.0 + norm(&[z[0], if n == 2 { z[1] } else { 0.0 }]) + norm(&[z[n], if n == 2 { z[n + 1] } else { 0.0 }]);
            indices
                .iter()
                .zip(&orders)
                .map(|((a, b1, b2), ord)| {
                    let total: u32 = ord.iter().sum();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (idx, v) in vals.iter().enumerate() {
                        let mut r = idx;
                        let mut c = 1.0;
                        for &k in ord {
                            c *= STENCILS[k as usize][r % 5];
                            r /= 5;
                            if c == 0.0 {
                                break;
                            }
                        }
                        if c != 0.0 {
                            acc += v * c;
                        }
                    }
                    let deriv = acc.norm() / h.powi(total as i32);
                    let alen = (a[0] + a[1]) as f64;
                    let blen = (b1[0] + b1[1] + b2[0] + b2[1]) as f64;
                    deriv * size.powf(-params.m - params.delta * alen + params.rho * blen)
                })
                .collect()
        })
        .collect();

    let breakdown: Vec<SeminormTerm> = indices
        .iter()
        .enumerate()
        .map(|(i, (a, b1, b2))| SeminormTerm {
            alpha: *a,
            beta1: *b1,
            beta2: *b2,
            value: per_node.iter().map(|row| row[i]).fold(0.0, f64::max),
        })
        .collect();
    Ok(SeminormReport {
        value: breakdown.iter().map(|t| t.value).fold(0.0, f64::max),
        max_order: m,
        nodes: combos.len(),
        breakdown,
    })
}
