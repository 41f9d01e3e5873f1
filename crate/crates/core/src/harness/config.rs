//! Flat `key = value` experiment configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counterexample::{recommended_a, CounterexampleParams};
use crate::error::{Error, Result};
use crate::exponents::{format_exponent, parse_exponent, ExponentTriple, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" => Ok(ReportFormat::Plotdata),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

impl ReportFormat {
    pub fn name(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Plotdata => "plotdata",
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Plotdata => "dat",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub triple: ExponentTriple,
    pub rho: Rational,
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub epsilon: f64,
    pub j_min: u32,
    pub j_max: u32,
    /// Seed of the Rademacher signs `r_k`.
    pub seed: u64,
    pub khintchine_trials: usize,
    /// Number of sign seeds for the seminorm invariance check.
    pub seminorm_seeds: usize,
    /// `M`.
    pub seminorm_order: u32,
    /// Sample nodes per coordinate in every support box.
    pub seminorm_nodes: usize,
    /// `t` runs over `1, 1/2, ..., 2^{-t_halvings}`.
    pub t_halvings: u32,
    /// Relative last increment below which a `t`-sequence counts as stabilized.
    pub t_tolerance: f64,
    pub b1_offset: f64,
    pub b2_offset: f64,
    pub slope_tolerance: f64,
    pub uniformity_tolerance: f64,
    /// Fitted blow-up slope above which the run is a witness.
    pub witness_margin: f64,
    pub output: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let triple = ExponentTriple::from_exponents("2", "2", "2").expect("valid default triple");
        ExperimentConfig {
            triple,
            rho: Rational::HALF,
            n: 1,
            a1: 0.9,
            a2: 0.9,
            epsilon: 0.05,
            j_min: 4,
            j_max: 9,
            seed: 1,
            khintchine_trials: crate::stochastics::DEFAULT_TRIALS,
            seminorm_seeds: 100,
            seminorm_order: 3,
            seminorm_nodes: 8,
            t_halvings: 10,
            t_tolerance: 0.10,
            b1_offset: 0.0,
            b2_offset: 0.0,
            slope_tolerance: 0.2,
            uniformity_tolerance: 0.05,
            witness_margin: 0.025,
            output: None,
            formats: vec![ReportFormat::Json],
        }
    }
}

impl ExperimentConfig {
    /// Defaults at a triple, with `(a1, a2)` taken from the triple's quadrant.
    pub fn for_triple(triple: ExponentTriple, rho: Rational) -> Self {
        let (a1, a2) = recommended_a(triple.point());
        ExperimentConfig {
            triple,
            rho,
            a1,
            a2,
            ..ExperimentConfig::default()
        }
    }

    pub fn js(&self) -> Vec<u32> {
        (self.j_min..=self.j_max).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.rho > Rational::ZERO && self.rho < Rational::ONE) {
            return bad(format!("rho must lie in (0,1), got {}", self.rho));
        }
        if self.n != 1 && self.n != 2 {
            return bad(format!("n must be 1 or 2, got {}", self.n));
        }
        for (k, a) in [("a1", self.a1), ("a2", self.a2)] {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("{k} must lie in (0,1), got {a}"));
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.j_max < self.j_min {
            return bad(format!("empty j range {}..{}", self.j_min, self.j_max));
        }
        if self.khintchine_trials < 32 {
            return bad("khintchine_trials must be at least 32".into());
        }
        if self.seminorm_seeds == 0 || self.seminorm_nodes == 0 {
            return bad("seminorm_seeds and seminorm_nodes must be positive".into());
        }
        if self.t_halvings < 3 {
            return bad("t_halvings must be at least 3".into());
        }
        Ok(())
    }

    pub fn counterexample_params(&self) -> Result<CounterexampleParams> {
        let mut p = CounterexampleParams::new(self.triple, self.rho, self.n, self.a1, self.a2, self.epsilon)?;
        p.b_offset = [self.b1_offset, self.b2_offset];
        Ok(p)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let (mut p1, mut p2, mut p) = (None, None, None);
        let mut a_given = [false, false];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = |e: String| Error::Config(format!("line {}: {key}: {e}", lineno + 1));
            let num = |v: &str| v.parse::<f64>().map_err(|e| ctx(e.to_string()));
            let int = |v: &str| v.parse::<u64>().map_err(|e| ctx(e.to_string()));
            match key {
                "p1" => p1 = Some(parse_exponent(value).map_err(|e| ctx(e.to_string()))?),
                "p2" => p2 = Some(parse_exponent(value).map_err(|e| ctx(e.to_string()))?),
                "p" => p = Some(parse_exponent(value).map_err(|e| ctx(e.to_string()))?),
                "rho" => cfg.rho = value.parse().map_err(|e: Error| ctx(e.to_string()))?,
                "n" => cfg.n = int(value)? as usize,
                "a1" => {
                    cfg.a1 = num(value)?;
                    a_given[0] = true;
                }
                "a2" => {
                    cfg.a2 = num(value)?;
                    a_given[1] = true;
                }
                "epsilon" => cfg.epsilon = num(value)?,
                "j_min" => cfg.j_min = int(value)? as u32,
                "j_max" => cfg.j_max = int(value)? as u32,
                "seed" => cfg.seed = int(value)?,
                "khintchine_trials" => cfg.khintchine_trials = int(value)? as usize,
                "seminorm_seeds" => cfg.seminorm_seeds = int(value)? as usize,
                "seminorm_order" => cfg.seminorm_order = int(value)? as u32,
                "seminorm_nodes" => cfg.seminorm_nodes = int(value)? as usize,
                "t_halvings" => cfg.t_halvings = int(value)? as u32,
                "t_tolerance" => cfg.t_tolerance = num(value)?,
                "b1_offset" => cfg.b1_offset = num(value)?,
                "b2_offset" => cfg.b2_offset = num(value)?,
                "slope_tolerance" => cfg.slope_tolerance = num(value)?,
                "uniformity_tolerance" => cfg.uniformity_tolerance = num(value)?,
                "witness_margin" => cfg.witness_margin = num(value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "formats" => {
                    cfg.formats = value
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| ctx(e.to_string()))?
                }
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        let d = cfg.triple;
        cfg.triple = ExponentTriple::new(p1.unwrap_or(d.inv_p1), p2.unwrap_or(d.inv_p2), p.unwrap_or(d.inv_p))?;
        let (ra1, ra2) = recommended_a(cfg.triple.point());
        if !a_given[0] {
            cfg.a1 = ra1;
        }
        if !a_given[1] {
            cfg.a2 = ra2;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Inverse of [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let t = &self.triple;
        let mut s = format!(
            "p1 = {}\np2 = {}\np = {}\nrho = {}\nn = {}\na1 = {}\na2 = {}\nepsilon = {}\n",
            format_exponent(t.inv_p1),
            format_exponent(t.inv_p2),
            format_exponent(t.inv_p),
            self.rho,
            self.n,
            self.a1,
            self.a2,
            self.epsilon
        );
        s += &format!(
            "j_min = {}\nj_max = {}\nseed = {}\nkhintchine_trials = {}\nseminorm_seeds = {}\nseminorm_order = {}\nseminorm_nodes = {}\n",
            self.j_min, self.j_max, self.seed, self.khintchine_trials, self.seminorm_seeds, self.seminorm_order, self.seminorm_nodes
        );
        s += &format!(
            "t_halvings = {}\nt_tolerance = {}\nb1_offset = {}\nb2_offset = {}\nslope_tolerance = {}\nuniformity_tolerance = {}\nwitness_margin = {}\n",
            self.t_halvings,
            self.t_tolerance,
            self.b1_offset,
            self.b2_offset,
            self.slope_tolerance,
            self.uniformity_tolerance,
            self.witness_margin
        );
        if let Some(o) = &self.output {
            s += &format!("output = {}\n", o.display());
        }
        let f: Vec<&str> = self.formats.iter().map(|f| f.name()).collect();
        s += &format!("formats = {}\n", f.join(","));
        s
    }
}
