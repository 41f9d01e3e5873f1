//! End-to-end scaling experiments: slope fits, the blow-up run, the component
//! suite and the self-test.

mod config;
mod report;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ReportFormat};
pub use report::{emit_report, BlowupVerdict, Check, JRow, ReportKind, ScalingReport};

use crate::bumps::{Bump, TAIL_TOLERANCE as BUMP_TAIL_TOLERANCE};
use crate::counterexample::{build_dj, build_sigma, choose_c, closed_form_norm, closed_form_t, compute_dk, CounterexampleParams, DyadicBand};
use crate::derivation::{derive_necessity, Conclusion};
use crate::error::{Error, Result};
use crate::exponents::{ExponentTriple, Rational};
use crate::grid::{Axis, UniformGrid};
use crate::lattice::{check_dim, LatticePoint};
use crate::operator::{apply_bilinear, seminorm_estimate, EvalNodes, FrequencySamples, SeminormConfig, SymbolClassParams};
use crate::stochastics::{khintchine_ratio, SignSource};
use crate::trig::{Envelope, EnvelopePower};
use crate::wainger::{build_wainger, t_schedule, t_sequence, wainger_coefficient, WaingerParams, TAIL_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Least-squares line through `(j, log2 value)`.
pub fn fit_log2_slope(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::domain("fit_log2_slope", format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(j, v)) = points.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::domain("fit_log2_slope", format!("value at j = {j} is not positive: {v}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit_log2_slope", "all abscissae coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(Fit {
        slope,
        intercept,
        max_residual,
    })
}

/// The j-independent bumps and envelopes of one dimension, built once per process.
pub struct Bumps {
    pub phi: Arc<Bump>,
    pub phi_tilde: Arc<Bump>,
    /// `Phi~`, the envelope of the inputs.
    pub input_envelope: Arc<Envelope>,
    /// `Phi^2`, the envelope of the output.
    pub output_envelope: Arc<Envelope>,
}

impl Bumps {
    pub fn build(n: usize) -> Result<Self> {
        check_dim("Bumps", n)?;
        let phi = Arc::new(Bump::phi(n)?);
        let phi_tilde = Arc::new(Bump::phi_tilde(n)?);
        Ok(Bumps {
            input_envelope: Arc::new(Envelope::new(Arc::clone(&phi_tilde), EnvelopePower::One)),
            output_envelope: Arc::new(Envelope::new(Arc::clone(&phi), EnvelopePower::Two)),
            phi,
            phi_tilde,
        })
    }
}

/// Process-wide [`Bumps`] for dimension `n`.
pub fn shared_bumps(n: usize) -> Result<&'static Bumps> {
    static ONE: OnceLock<Bumps> = OnceLock::new();
    static TWO: OnceLock<Bumps> = OnceLock::new();
    let cell = match n {
        1 => &ONE,
        2 => &TWO,
        _ => return Err(Error::domain("shared_bumps", format!("dimension {n} not supported"))),
    };
    if let Some(b) = cell.get() {
        return Ok(b);
    }
    let built = Bumps::build(n)?;
    Ok(cell.get_or_init(|| built))
}

fn inv_to_p(inv: Rational) -> f64 {
    if inv.is_zero() {
        f64::INFINITY
    } else {
        1.0 / inv.to_f64()
    }
}

fn capped_tail_note(j: u32, which: &str, tail: f64, radius: i64) -> Option<String> {
    (tail >= TAIL_TOLERANCE).then(|| format!("j={j}: {which} truncated at radius cap {radius}, certified relative tail {tail:.3e}"))
}

fn report_header(kind: ReportKind, cfg: &ExperimentConfig, p: &CounterexampleParams) -> ScalingReport {
    ScalingReport {
        kind,
        config: cfg.clone(),
        m0: p.m0().to_string(),
        b1: p.b1(),
        b2: p.b2(),
        rows: Vec::new(),
        checks: Vec::new(),
        verdict: None,
        notes: Vec::new(),
    }
}

fn sign_flip_note(name: &str, series: &[(f64, f64)]) -> Option<String> {
    let inc: Vec<f64> = series.windows(2).map(|w| w[1].1.log2() - w[0].1.log2()).collect();
    let flips = inc.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    (flips > 0).then(|| format!("{name}: log2 increments change sign {flips} time(s); asymptotics not yet dominant"))
}

/// `L_j = ||T(f1, f2)||_p / (||f1||_{p1} ||f2||_{p2})` over `j`, fitted against
/// `(1-rho)(m0 - b1 - b2 + 3n/2) + rho n (1/p1 + 1/p2 - 1/p)`.
pub fn run_blowup_experiment(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let params = cfg.counterexample_params()?;
    let bumps = shared_bumps(cfg.n)?;
    let js = cfg.js();
    if js.len() < 3 {
        return Err(Error::domain("fit_log2_slope", format!("need at least 3 points, got {}", js.len())));
    }
    let t = 2f64.powi(-(cfg.t_halvings as i32));
    let rho = params.rho_f64();
    let tr = &params.triple;
    let (p1, p2, p) = (inv_to_p(tr.inv_p1), inv_to_p(tr.inv_p2), inv_to_p(tr.inv_p));
    let rows: Vec<(JRow, Vec<String>)> = js
        .par_iter()
        .map(|&j| {
            let band = DyadicBand::new(j, params.rho, cfg.n)?;
            let dk = compute_dk(&params, &band, t)?;
            let t_norm = closed_form_norm(&band, &dk.values, SignSource::Seed(cfg.seed), &bumps.output_envelope, p)?;
            let w1 = build_wainger(WaingerParams::with_auto_radius(cfg.n, cfg.a1, params.b1(), t, j, rho)?, Arc::clone(&bumps.input_envelope))?;
            let w2 = build_wainger(WaingerParams::with_auto_radius(cfg.n, cfg.a2, params.b2(), t, j, rho)?, Arc::clone(&bumps.input_envelope))?;
            let (f1, f2) = (w1.lp_norm(p1)?, w2.lp_norm(p2)?);
            let mut q = BTreeMap::new();
            q.insert("f1_norm".to_string(), f1);
            q.insert("f2_norm".to_string(), f2);
            q.insert("t_norm".to_string(), t_norm);
            q.insert("ratio".to_string(), t_norm / (f1 * f2));
            q.insert("dk_l2".to_string(), dk.l2());
            q.insert("dk_max".to_string(), dk.max());
            q.insert("slice_cardinality".to_string(), dk.max_cardinality() as f64);
            let notes = [
                capped_tail_note(j, "f1", w1.tail_bound, w1.params.lattice_radius),
                capped_tail_note(j, "f2", w2.tail_bound, w2.params.lattice_radius),
            ]
            .into_iter()
            .flatten()
            .collect();
            Ok((JRow { j, quantities: q }, notes))
        })
        .collect::<Result<_>>()?;
    let mut report = report_header(ReportKind::Blowup, cfg, &params);
    for (row, notes) in rows {
        report.rows.push(row);
        report.notes.extend(notes);
    }
    let series = report.series("ratio");
    let fit = fit_log2_slope(&series)?;
    let predicted = params.blowup_slope();
    report.checks.push(
        Check::slope("blowup_slope", fit.slope, predicted, cfg.slope_tolerance, fit.max_residual)
            .with_detail(format!("t = 2^-{}", cfg.t_halvings)),
    );
    report.verdict = Some(if fit.slope > cfg.witness_margin {
        BlowupVerdict::UnboundedWitness
    } else {
        BlowupVerdict::Consistent
    });
    report.notes.extend(sign_flip_note("ratio", &series));
    Ok(report)
}

fn seminorm_of(params: &CounterexampleParams, band: &DyadicBand, seed: u64, cfg: &ExperimentConfig, bumps: &Bumps) -> Result<f64> {
    let dj = build_dj(band);
    let c = choose_c(SignSource::Seed(seed), params.a1, params.a2, &dj);
    let sigma = build_sigma(params, band, c, Arc::clone(&bumps.phi))?;
    let rho = params.rho_f64();
    let class = SymbolClassParams::new((1.0 - rho) * params.m0().to_f64(), rho, rho, params.n)?;
    let sc = SeminormConfig::new(
        cfg.seminorm_order,
        band.scale(),
        EvalNodes::SupportBoxes {
            per_axis: cfg.seminorm_nodes,
        },
    );
    Ok(seminorm_estimate(&sigma, &class, &sc)?.value)
}

struct SuiteRow {
    j: u32,
    q: BTreeMap<String, f64>,
    stabilized: [bool; 2],
    last_increment: [f64; 2],
    p2_covered: bool,
    notes: Vec<String>,
}

/// The component checks of the construction as six separate verdicts.
pub fn run_lemma_suite(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let params = cfg.counterexample_params()?;
    let bumps = shared_bumps(cfg.n)?;
    let js = cfg.js();
    if js.len() < 3 {
        return Err(Error::domain("fit_log2_slope", format!("need at least 3 points, got {}", js.len())));
    }
    let rho = params.rho_f64();
    let n = cfg.n;
    let tr = &params.triple;
    let (p1, p2) = (inv_to_p(tr.inv_p1), inv_to_p(tr.inv_p2));
    let ts = t_schedule(cfg.t_halvings);
    let khin_target = 2f64.powf(n as f64 / 2.0);

    let rows: Vec<SuiteRow> = js
        .par_iter()
        .map(|&j| {
            let band = DyadicBand::new(j, params.rho, n)?;
            let s1 = t_sequence(n, cfg.a1, params.b1(), p1, rho, j, &ts, &bumps.input_envelope)?;
            let s2 = t_sequence(n, cfg.a2, params.b2(), p2, rho, j, &ts, &bumps.input_envelope)?;
            let dk = compute_dk(&params, &band, 0.0)?;
            let semi = seminorm_of(&params, &band, cfg.seed, cfg, bumps)?;
            let k4 = khintchine_ratio(&dk.values, 4.0, n, cfg.khintchine_trials, cfg.seed)?;
            let k2 = khintchine_ratio(&dk.values, 2.0, n, cfg.khintchine_trials, cfg.seed)?;
            let mut q = BTreeMap::new();
            q.insert("f1_norm".to_string(), *s1.norms.last().expect("nonempty schedule"));
            q.insert("f2_norm".to_string(), *s2.norms.last().expect("nonempty schedule"));
            q.insert("dk_max".to_string(), dk.max());
            q.insert("dk_l2".to_string(), dk.l2());
            q.insert("slice_cardinality".to_string(), dk.max_cardinality() as f64);
            q.insert("seminorm".to_string(), semi);
            q.insert("khintchine_p4".to_string(), k4.ratio);
            q.insert("khintchine_p2".to_string(), k2.ratio);
            let last = |s: &crate::wainger::TSequence, i: usize| {
                capped_tail_note(j, if i == 1 { "f1" } else { "f2" }, *s.tails.last().unwrap_or(&0.0), *s.radii.last().unwrap_or(&0))
            };
            Ok(SuiteRow {
                j,
                q,
                stabilized: [s1.stabilizes(cfg.t_tolerance), s2.stabilizes(cfg.t_tolerance)],
                last_increment: [s1.last_increment(), s2.last_increment()],
                p2_covered: k2.ci_low <= khin_target && khin_target <= k2.ci_high,
                notes: [last(&s1, 1), last(&s2, 2)].into_iter().flatten().collect(),
            })
        })
        .collect::<Result<_>>()?;

    let mut report = report_header(ReportKind::LemmaSuite, cfg, &params);
    let slope_tol = cfg.slope_tolerance;
    let unif_tol = cfg.uniformity_tolerance;
    for r in &rows {
        report.notes.extend(r.notes.iter().cloned());
        report.rows.push(JRow { j: r.j, quantities: r.q.clone() });
    }
    let mut fits = BTreeMap::new();
    for q in ["f1_norm", "f2_norm", "dk_max", "dk_l2", "slice_cardinality", "seminorm", "khintchine_p4"] {
        fits.insert(q, fit_log2_slope(&report.series(q))?);
    }
    let fit = |q: &str| -> Result<Fit> { Ok(fits[q]) };

    let f1 = fit("f1_norm")?;
    let f2 = fit("f2_norm")?;
    let pred2 = params.f_norm_slope(2);
    let mut f_check = Check::slope("f_norms", f1.slope, params.f_norm_slope(1), slope_tol, f1.max_residual)
        .with_detail(format!("f2 fitted {:.4}, predicted {:.4}", f2.slope, pred2))
        .and((f2.slope - pred2).abs() <= slope_tol, "f2 slope off");
    for r in &rows {
        for i in 0..2 {
            f_check = f_check.and(
                r.stabilized[i],
                &format!("f{} t-sequence not stabilizing at j={} (last increment {:.3})", i + 1, r.j, r.last_increment[i]),
            );
        }
    }
    report.checks.push(f_check);

    let d = fit("dk_max")?;
    report.checks.push(Check::slope("dk_max", d.slope, params.dk_max_slope(), slope_tol, d.max_residual));
    let d = fit("dk_l2")?;
    report.checks.push(Check::slope("dk_l2", d.slope, params.dk_l2_slope(), slope_tol, d.max_residual));
    let d = fit("slice_cardinality")?;
    report.checks.push(Check::slope("slice_cardinality", d.slope, params.slice_slope(), slope_tol, d.max_residual));

    let semi = fit("seminorm")?;
    let band0 = DyadicBand::new(cfg.j_min, params.rho, n)?;
    let seeded: Vec<f64> = (0..cfg.seminorm_seeds as u64)
        .into_par_iter()
        .map(|s| seminorm_of(&params, &band0, s, cfg, bumps))
        .collect::<Result<_>>()?;
    let (lo, hi) = seeded.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    report.checks.push(
        Check::bound("seminorm_uniformity", semi.slope, unif_tol, semi.slope <= unif_tol)
            .with_detail(format!("M = {}, seed spread max/min {:.6} over {} seeds at j={}", cfg.seminorm_order, hi / lo, cfg.seminorm_seeds, cfg.j_min))
            .and(hi / lo <= 1.01, "seminorm varies across seeds"),
    );

    let k = fit("khintchine_p4")?;
    let mut kc = Check::bound("khintchine_stability", k.slope, unif_tol, k.slope.abs() <= unif_tol)
        .with_detail(format!("p=4 slope; p=2 target {khin_target:.4}"));
    for r in &rows {
        kc = kc.and(r.p2_covered, &format!("p=2 interval misses target at j={}", r.j));
    }
    report.checks.push(kc);

    for q in ["f1_norm", "dk_l2", "seminorm"] {
        report.notes.extend(sign_flip_note(q, &report.series(q)));
    }
    Ok(report)
}

/// Closed form against brute-force quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub j: u32,
    pub points: usize,
    pub max_abs_error: f64,
    pub max_closed_form: f64,
    /// `max |brute - closed| / max |closed|`.
    pub relative_error: f64,
}

/// `f^_i` near the band: only lattice cells adjacent to `xi / s` contribute.
fn local_wainger_hat(a: f64, b: f64, t: f64, s: f64, bump: &Bump, xi: f64) -> Complex64 {
    let u = xi / s;
    let c = u.round() as i64;
    (c - 1..=c + 1)
        .filter(|&l| l != 0)
        .map(|l| wainger_coefficient(a, b, t, &LatticePoint::new1(l)) * bump.axis.value(u - l as f64))
        .sum()
}

/// Dimension one: `x` on `[-8, 8)` with `points` samples, frequency step `1/32`.
pub fn oracle_comparison(cfg: &ExperimentConfig, j: u32, points: usize) -> Result<OracleComparison> {
    if cfg.n != 1 {
        return Err(Error::domain("oracle_comparison", "the quadrature oracle runs in dimension 1"));
    }
    let params = cfg.counterexample_params()?;
    let bumps = shared_bumps(1)?;
    let band = DyadicBand::new(j, params.rho, 1)?;
    let s = band.scale();
    let t = 2f64.powi(-(cfg.t_halvings as i32));
    let signs = SignSource::Seed(cfg.seed);
    let sigma = build_sigma(&params, &band, choose_c(signs, params.a1, params.a2, &build_dj(&band)), Arc::clone(&bumps.phi))?;
    let dk = compute_dk(&params, &band, t)?;

    let x_grid = UniformGrid::cube(1, -8.0, 8.0, points)?;
    let dxi = 1.0 / 32.0;
    let reach = s * (band.upper() + 1.0);
    let count = (2.0 * reach / dxi).ceil() as usize + 1;
    let xi_grid = UniformGrid::new(vec![Axis::new(-reach, dxi, count)?])?;
    let hat = |a: f64, b: f64| FrequencySamples::from_fn(xi_grid.clone(), |xi| local_wainger_hat(a, b, t, s, &bumps.phi_tilde, xi[0]));
    let f1 = hat(params.a1, params.b1());
    let f2 = hat(params.a2, params.b2());
    let brute = apply_bilinear(&sigma, &f1, &f2, &x_grid)?;
    let closed = closed_form_t(&band, &dk.values, signs, &x_grid, &bumps.phi)?;
    let max_abs_error = brute.iter().zip(&closed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let max_closed_form = closed.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(OracleComparison {
        j,
        points,
        max_abs_error,
        max_closed_form,
        relative_error: max_abs_error / max_closed_form,
    })
}

/// Bump certification and oracle cross-checks.
pub fn selftest() -> Result<Vec<Check>> {
    let bumps = shared_bumps(1)?;
    let mut out = Vec::new();
    let min = bumps.phi.grid_min_on_unit_cube(256);
    out.push(Check::bound("phi_lower_bound", min, 1.0, min >= 1.0).with_detail("min |Phi| on [-1,1]"));
    let worst_tail = bumps.phi.tail.relative_tail.max(bumps.phi_tilde.tail.relative_tail);
    out.push(Check::bound("bump_tails", worst_tail, BUMP_TAIL_TOLERANCE, worst_tail < BUMP_TAIL_TOLERANCE));

    let cfg = ExperimentConfig::default();
    let oracle = oracle_comparison(&cfg, 4, 512)?;
    out.push(
        Check::bound("oracle_equivalence", oracle.relative_error, 1e-6, oracle.relative_error < 1e-6)
            .with_detail("closed form vs frequency quadrature, j=4"),
    );

    let single: BTreeMap<_, _> = [(LatticePoint::new1(5), 3.0)].into_iter().collect();
    let k = khintchine_ratio(&single, 4.0, 1, 32, 0)?;
    let err = (k.ratio - 2f64.powf(0.25)).abs();
    out.push(Check::bound("khintchine_single_key", err, 1e-12, err < 1e-12));

    let mut replay_ok = true;
    let mut mismatches = 0usize;
    for (p1, p2, p) in [("2", "2", "1"), ("2", "2", "2"), ("4", "4/3", "1"), ("inf", "2", "2"), ("1", "inf", "1")] {
        let triple = ExponentTriple::from_exponents(p1, p2, p)?;
        let trace = derive_necessity(triple, Rational::HALF, 1)?;
        replay_ok &= trace.replay().is_ok();
        let expect = if triple.is_hoelder() {
            Conclusion::ForcesEquality
        } else {
            Conclusion::Contradiction
        };
        mismatches += usize::from(trace.conclusion != expect);
    }
    out.push(Check::bound("derivation_replay", mismatches as f64, 0.0, replay_ok && mismatches == 0));
    Ok(out)
}
