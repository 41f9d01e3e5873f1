//! Symbolic rule engine for the necessity of `1/p = 1/p1 + 1/p2`.
//!
//! A derivation starts from the hypothesis that every operator with symbol in
//! `BS^{m_rho(p1,p2)}_{rho,rho}` is bounded `H^{p1} x H^{p2} -> L^p` (or `BMO`
//! when `p = inf`) and chains trusted axioms until it reaches a constraint on
//! the original exponents. Every step stores its axiom, the indices of its
//! inputs and its output, so [`DerivationTrace::replay`] can re-run the whole
//! chain in exact arithmetic.
//!
//! Spaces carry no numerical meaning; `H^p` with `p > 1` is identified with
//! `L^p`, so a Hardy tag only survives for reciprocals `>= 1`.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{m0_tilde, m_rho, ExponentPoint, ExponentTriple, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// `L^p`, stored as `1/p`; `0` is `L^inf`.
    Lebesgue(Rational),
    /// `H^p` with `1/p >= 1`.
    Hardy(Rational),
    Bmo,
}

impl Space {
    /// Source space with reciprocal `r`: `L^p` for `p > 1`, `H^p` otherwise.
    pub fn source(r: Rational) -> Space {
        if r < Rational::ONE {
            Space::Lebesgue(r)
        } else {
            Space::Hardy(r)
        }
    }

    /// Target space with reciprocal `r`: `BMO` stands in for `p = inf`.
    pub fn target(r: Rational) -> Space {
        if r.is_zero() {
            Space::Bmo
        } else {
            Space::Lebesgue(r)
        }
    }

    pub fn recip(&self) -> Rational {
        match *self {
            Space::Lebesgue(r) | Space::Hardy(r) => r,
            Space::Bmo => Rational::ZERO,
        }
    }

    fn valid_source(&self) -> bool {
        *self == Space::source(self.recip()) && !self.recip().is_negative()
    }

    fn valid_target(&self) -> bool {
        matches!(self, Space::Bmo) || matches!(self, Space::Lebesgue(r) if r.is_positive())
    }

    /// Dual of a target, used as a source after transposition.
    fn dual_of_target(&self) -> Option<Space> {
        match *self {
            Space::Bmo => Some(Space::Hardy(Rational::ONE)),
            Space::Lebesgue(z) if z.is_positive() && z <= Rational::ONE => Some(Space::source(Rational::ONE - z)),
            _ => None,
        }
    }

    /// Dual of a source, used as a target after transposition.
    fn dual_of_source(&self) -> Option<Space> {
        match *self {
            Space::Hardy(r) if r == Rational::ONE => Some(Space::Bmo),
            Space::Lebesgue(x) if x < Rational::ONE => Some(Space::target(Rational::ONE - x)),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Lebesgue(r) => write!(f, "L[{r}]"),
            Space::Hardy(r) => write!(f, "H[{r}]"),
            Space::Bmo => write!(f, "BMO"),
        }
    }
}

/// `Op(BS^order_{rho,rho}) ⊂ B(sources[0] x sources[1] -> target)` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundednessStatement {
    pub order: Rational,
    pub sources: [Space; 2],
    pub target: Space,
    pub rho: Rational,
    pub n: u32,
}

impl BoundednessStatement {
    pub fn new(order: Rational, sources: [Space; 2], target: Space, rho: Rational, n: u32) -> Result<Self> {
        let s = BoundednessStatement {
            order,
            sources,
            target,
            rho,
            n,
        };
        if !(sources[0].valid_source() && sources[1].valid_source()) {
            return Err(Error::domain("BoundednessStatement", format!("invalid source spaces in {s}")));
        }
        if !s.target.valid_target() {
            return Err(Error::domain("BoundednessStatement", format!("invalid target space in {s}")));
        }
        Ok(s)
    }

    pub fn triple(&self) -> ExponentTriple {
        ExponentTriple {
            inv_p1: self.sources[0].recip(),
            inv_p2: self.sources[1].recip(),
            inv_p: self.target.recip(),
        }
    }
}

impl fmt::Display for BoundednessStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "order={} rho={} n={} src={},{} tgt={}",
            self.order, self.rho, self.n, self.sources[0], self.sources[1], self.target
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// `1/p = 1/p1 + 1/p2`
    Eq,
    /// `1/p <= 1/p1 + 1/p2`
    Le,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub relation: Relation,
    pub triple: ExponentTriple,
    pub satisfied: bool,
}

impl Constraint {
    pub fn new(relation: Relation, triple: ExponentTriple) -> Self {
        let gap = triple.hoelder_gap();
        let satisfied = match relation {
            Relation::Eq => gap.is_zero(),
            Relation::Le => !gap.is_positive(),
        };
        Constraint {
            relation,
            triple,
            satisfied,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Eq => "=",
            Relation::Le => "<=",
        };
        let t = &self.triple;
        write!(
            f,
            "{} {rel} {} + {} [{}]",
            t.inv_p,
            t.inv_p1,
            t.inv_p2,
            if self.satisfied { "satisfied" } else { "violated" }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fact {
    Statement(BoundednessStatement),
    Constraint(Constraint),
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Statement(s) => write!(f, "statement {s}"),
            Fact::Constraint(c) => write!(f, "constraint {c}"),
        }
    }
}

/// Trusted rules. Parameters that cannot be read off the inputs live in the variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// The assumed boundedness at the critical order `m_rho(p1, p2)`.
    Hypothesis { triple: ExponentTriple },
    /// `Op(BS^{-(1-rho)n/2}) ⊂ B(L^2 x L^2 -> L^1)`.
    KnownL2L2L1,
    /// `Op(BS^{-(1-rho)n/2}) ⊂ B(L^a x L^b -> L^2)`, `1/a + 1/b = 1/2`.
    KnownL1LbToL2 { inv_a: Rational },
    /// Passing to the first transposed symbol, which stays in the same class.
    Transpose,
    /// Complex interpolation; the output carries weight `theta` on the second input.
    Interpolate { theta: Rational },
    /// A smaller order gives a smaller class.
    ClassInclusion { new_order: Rational },
    /// Boundedness of multiplier classes forces `1/p <= 1/p1 + 1/p2`.
    MultiplierNecessity,
    /// The key lemma: boundedness at order `m~_rho` forces equality.
    KeyLemma,
    /// `L^inf x L^inf -> BMO` satisfies the relation trivially.
    EndpointIdentity,
    /// Transfers a constraint at an interpolated triple back to the far endpoint.
    InterpolationPullback { theta: Rational, base: ExponentTriple },
    /// Transfers a constraint at a transposed triple back through the duality.
    DualityPullback,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Hypothesis { .. } => "hypothesis",
            Axiom::KnownL2L2L1 => "known-l2l2l1",
            Axiom::KnownL1LbToL2 { .. } => "known-lalb-l2",
            Axiom::Transpose => "transpose",
            Axiom::Interpolate { .. } => "interpolate",
            Axiom::ClassInclusion { .. } => "class-inclusion",
            Axiom::MultiplierNecessity => "multiplier-necessity",
            Axiom::KeyLemma => "key-lemma",
            Axiom::EndpointIdentity => "endpoint-identity",
            Axiom::InterpolationPullback { .. } => "interpolation-pullback",
            Axiom::DualityPullback => "duality-pullback",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conclusion {
    ForcesEquality,
    Contradiction,
    Inconclusive,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::ForcesEquality => "ForcesEquality",
            Conclusion::Contradiction => "Contradiction",
            Conclusion::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub axiom: Axiom,
    pub inputs: Vec<usize>,
    pub output: Fact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub triple: ExponentTriple,
    pub rho: Rational,
    pub n: u32,
    pub steps: Vec<Step>,
    pub conclusion: Conclusion,
}

fn check_rho(op: &'static str, rho: Rational) -> Result<()> {
    if !rho.is_positive() || rho >= Rational::ONE {
        return Err(Error::domain(op, format!("rho must lie in (0,1), got {rho}")));
    }
    Ok(())
}

fn half_order(rho: Rational, n: u32) -> Rational {
    -((Rational::ONE - rho) * Rational::from_integer(i64::from(n)) * Rational::HALF)
}

/// `(L^2 x L^2 -> L^1)` at order `-(1-rho)n/2`.
pub fn l2l2l1(rho: Rational, n: u32) -> Result<BoundednessStatement> {
    check_rho("known_boundedness", rho)?;
    let h = Rational::HALF;
    BoundednessStatement::new(
        half_order(rho, n),
        [Space::Lebesgue(h), Space::Lebesgue(h)],
        Space::Lebesgue(Rational::ONE),
        rho,
        n,
    )
}

/// `(L^a x L^b -> L^2)` at order `-(1-rho)n/2` with `1/b = 1/2 - 1/a`.
pub fn lalb_l2(rho: Rational, n: u32, inv_a: Rational) -> Result<BoundednessStatement> {
    check_rho("known_boundedness", rho)?;
    if !inv_a.is_positive() || inv_a >= Rational::HALF {
        return Err(Error::domain("known_boundedness", format!("need 0 < 1/a < 1/2, got {inv_a}")));
    }
    BoundednessStatement::new(
        half_order(rho, n),
        [Space::Lebesgue(inv_a), Space::Lebesgue(Rational::HALF - inv_a)],
        Space::Lebesgue(Rational::HALF),
        rho,
        n,
    )
}

/// The two known boundedness facts, with the `L^a x L^b` family sampled at `1/a = 1/8, 1/4, 3/8`.
pub fn known_boundedness(rho: Rational, n: u32) -> Result<Vec<BoundednessStatement>> {
    let mut out = vec![l2l2l1(rho, n)?];
    for k in 1..=3 {
        out.push(lalb_l2(rho, n, Rational::new(k, 8))?);
    }
    Ok(out)
}

/// The hypothesis statement at the critical order `m_rho(p1, p2)`.
pub fn hypothesis(triple: ExponentTriple, rho: Rational, n: u32) -> Result<BoundednessStatement> {
    check_rho("hypothesis", rho)?;
    let order = m_rho(triple.point(), n, rho)?;
    BoundednessStatement::new(
        order,
        [Space::source(triple.inv_p1), Space::source(triple.inv_p2)],
        Space::target(triple.inv_p),
        rho,
        n,
    )
}

/// Transposition in the first slot: `(X1 x X2 -> Y)` becomes `(Y* x X2 -> X1*)`.
pub fn transpose(stmt: &BoundednessStatement) -> Result<BoundednessStatement> {
    let undefined = || Error::domain("transpose", format!("no dual pairing for {stmt}"));
    let src = stmt.target.dual_of_target().ok_or_else(undefined)?;
    let tgt = stmt.sources[0].dual_of_source().ok_or_else(undefined)?;
    BoundednessStatement::new(stmt.order, [src, stmt.sources[1]], tgt, stmt.rho, stmt.n)
}

/// Affine combination with weights `(1 - theta, theta)` of reciprocals and orders.
pub fn interpolate(
    s0: &BoundednessStatement,
    s1: &BoundednessStatement,
    theta: Rational,
) -> Result<BoundednessStatement> {
    if !theta.is_positive() || theta >= Rational::ONE {
        return Err(Error::domain("interpolate", format!("theta must lie in (0,1), got {theta}")));
    }
    if s0.rho != s1.rho || s0.n != s1.n {
        return Err(Error::domain("interpolate", "statements differ in rho or n"));
    }
    let w = Rational::ONE - theta;
    let mix = |a: Rational, b: Rational| w * a + theta * b;
    BoundednessStatement::new(
        mix(s0.order, s1.order),
        [
            Space::source(mix(s0.sources[0].recip(), s1.sources[0].recip())),
            Space::source(mix(s0.sources[1].recip(), s1.sources[1].recip())),
        ],
        Space::target(mix(s0.target.recip(), s1.target.recip())),
        s0.rho,
        s0.n,
    )
}

pub fn class_inclusion(stmt: &BoundednessStatement, new_order: Rational) -> Result<BoundednessStatement> {
    if new_order > stmt.order {
        return Err(Error::domain(
            "class_inclusion",
            format!("cannot raise order {} to {new_order}", stmt.order),
        ));
    }
    Ok(BoundednessStatement {
        order: new_order,
        ..*stmt
    })
}

fn lebesgue_sources_and_target(op: &'static str, stmt: &BoundednessStatement) -> Result<ExponentTriple> {
    let lebesgue = |s: &Space| matches!(s, Space::Lebesgue(_));
    if !(lebesgue(&stmt.sources[0]) && lebesgue(&stmt.sources[1]) && lebesgue(&stmt.target)) {
        return Err(Error::domain(op, format!("needs Lebesgue spaces, got {stmt}")));
    }
    Ok(stmt.triple())
}

/// `1/p <= 1/p1 + 1/p2` from boundedness of the multiplier subclass.
pub fn multiplier_necessity(stmt: &BoundednessStatement) -> Result<Constraint> {
    let t = lebesgue_sources_and_target("multiplier_necessity", stmt)?;
    Ok(Constraint::new(Relation::Le, t))
}

/// The key lemma on `L^{p1} x L^{p2} -> L^p` with `1 < p1, p2 < inf`, `0 < p < inf`.
pub fn keylem_axiom(stmt: &BoundednessStatement) -> Result<Constraint> {
    let t = lebesgue_sources_and_target("keylem_axiom", stmt)?;
    if !t.point().in_open_unit_square() || !t.inv_p.is_positive() {
        return Err(Error::domain(
            "keylem_axiom",
            format!("needs 1 < p1, p2 < inf and p < inf, got {t}"),
        ));
    }
    let critical = (Rational::ONE - stmt.rho) * m0_tilde(t.point(), stmt.n);
    if stmt.order < critical {
        return Err(Error::domain(
            "keylem_axiom",
            format!("order {} lies below the critical order {critical}", stmt.order),
        ));
    }
    Ok(Constraint::new(Relation::Eq, t))
}

fn endpoint_identity(stmt: &BoundednessStatement) -> Result<Constraint> {
    let inf = Space::Lebesgue(Rational::ZERO);
    if stmt.sources != [inf, inf] || stmt.target != Space::Bmo {
        return Err(Error::domain("endpoint_identity", format!("needs L^inf x L^inf -> BMO, got {stmt}")));
    }
    Ok(Constraint::new(Relation::Eq, stmt.triple()))
}

/// Recovers `t` from `affine(base, t, theta)`; requires a Hoelder base so the gap scales by `theta`.
fn interpolation_pullback(c: &Constraint, theta: Rational, base: &ExponentTriple) -> Result<Constraint> {
    if !theta.is_positive() || theta >= Rational::ONE || !base.is_hoelder() {
        return Err(Error::domain("interpolation_pullback", "needs theta in (0,1) and a Hoelder base"));
    }
    let w = Rational::ONE - theta;
    let back = |v: Rational, b: Rational| (v - w * b) / theta;
    let t = ExponentTriple::new(
        back(c.triple.inv_p1, base.inv_p1),
        back(c.triple.inv_p2, base.inv_p2),
        back(c.triple.inv_p, base.inv_p),
    )?;
    Ok(Constraint::new(c.relation, t))
}

/// `(x, y, z) -> (1 - z, y, 1 - x)`; the relation `z ~ x + y` is preserved.
fn duality_pullback(c: &Constraint) -> Result<Constraint> {
    let t = &c.triple;
    let back = ExponentTriple::new(Rational::ONE - t.inv_p, t.inv_p2, Rational::ONE - t.inv_p1)?;
    Ok(Constraint::new(c.relation, back))
}

/// Applies one axiom to concrete input facts.
pub fn apply_axiom(axiom: &Axiom, inputs: &[Fact], rho: Rational, n: u32) -> Result<Fact> {
    let stmt = |i: usize| match inputs.get(i) {
        Some(Fact::Statement(s)) => Ok(*s),
        _ => Err(Error::domain("apply_axiom", format!("{} expects a statement at input {i}", axiom.name()))),
    };
    let cons = |i: usize| match inputs.get(i) {
        Some(Fact::Constraint(c)) => Ok(*c),
        _ => Err(Error::domain("apply_axiom", format!("{} expects a constraint at input {i}", axiom.name()))),
    };
    let arity = match axiom {
        Axiom::Hypothesis { .. } | Axiom::KnownL2L2L1 | Axiom::KnownL1LbToL2 { .. } => 0,
        Axiom::Interpolate { .. } => 2,
        _ => 1,
    };
    if inputs.len() != arity {
        return Err(Error::domain(
            "apply_axiom",
            format!("{} takes {arity} inputs, got {}", axiom.name(), inputs.len()),
        ));
    }
    Ok(match axiom {
        Axiom::Hypothesis { triple } => Fact::Statement(hypothesis(*triple, rho, n)?),
        Axiom::KnownL2L2L1 => Fact::Statement(l2l2l1(rho, n)?),
        Axiom::KnownL1LbToL2 { inv_a } => Fact::Statement(lalb_l2(rho, n, *inv_a)?),
        Axiom::Transpose => Fact::Statement(transpose(&stmt(0)?)?),
        Axiom::Interpolate { theta } => Fact::Statement(interpolate(&stmt(0)?, &stmt(1)?, *theta)?),
        Axiom::ClassInclusion { new_order } => Fact::Statement(class_inclusion(&stmt(0)?, *new_order)?),
        Axiom::MultiplierNecessity => Fact::Constraint(multiplier_necessity(&stmt(0)?)?),
        Axiom::KeyLemma => Fact::Constraint(keylem_axiom(&stmt(0)?)?),
        Axiom::EndpointIdentity => Fact::Constraint(endpoint_identity(&stmt(0)?)?),
        Axiom::InterpolationPullback { theta, base } => {
            Fact::Constraint(interpolation_pullback(&cons(0)?, *theta, base)?)
        }
        Axiom::DualityPullback => Fact::Constraint(duality_pullback(&cons(0)?)?),
    })
}

struct Builder {
    rho: Rational,
    n: u32,
    steps: Vec<Step>,
}

impl Builder {
    fn push(&mut self, axiom: Axiom, inputs: Vec<usize>) -> Result<usize> {
        let facts: Vec<Fact> = inputs.iter().map(|&i| self.steps[i].output).collect();
        let output = apply_axiom(&axiom, &facts, self.rho, self.n)?;
        self.steps.push(Step { axiom, inputs, output });
        Ok(self.steps.len() - 1)
    }

    fn statement(&self, i: usize) -> BoundednessStatement {
        match self.steps[i].output {
            Fact::Statement(s) => s,
            Fact::Constraint(_) => unreachable!("step {i} is a constraint"),
        }
    }

    fn constraint(&self, i: usize) -> Constraint {
        match self.steps[i].output {
            Fact::Constraint(c) => c,
            Fact::Statement(_) => unreachable!("step {i} is a statement"),
        }
    }

    /// Interpolates `stmt` with the base fact, runs `inner` on the result and pulls back.
    fn via_interpolation(
        &mut self,
        stmt_idx: usize,
        base_axiom: Axiom,
        inner: fn(&mut Builder, usize) -> Result<usize>,
    ) -> Result<usize> {
        let base_idx = self.push(base_axiom, vec![])?;
        let base = self.statement(base_idx).triple();
        let theta = interpolation_theta(base.point(), self.statement(stmt_idx).triple().point());
        let mid = self.push(Axiom::Interpolate { theta }, vec![base_idx, stmt_idx])?;
        let c = inner(self, mid)?;
        self.push(Axiom::InterpolationPullback { theta, base }, vec![c])
    }

    /// Derivation for a finite target; returns the step holding a constraint on the input triple.
    fn finite_target(&mut self, idx: usize) -> Result<usize> {
        let stmt = self.statement(idx);
        let t = stmt.triple();
        let pt = t.point();
        if pt.in_open_unit_square() {
            if strictly_in_j0(pt) {
                return self.j0_chain(idx);
            }
            let critical = (Rational::ONE - self.rho) * m0_tilde(pt, self.n);
            let idx = if stmt.order > critical {
                self.push(Axiom::ClassInclusion { new_order: critical }, vec![idx])?
            } else {
                idx
            };
            return self.push(Axiom::KeyLemma, vec![idx]);
        }
        let base = if strictly_in_j0(pt) || (pt.inv_p1.is_zero() && pt.inv_p2.is_zero()) {
            Axiom::KnownL1LbToL2 {
                inv_a: Rational::new(1, 4),
            }
        } else {
            Axiom::KnownL2L2L1
        };
        self.via_interpolation(idx, base, Builder::finite_target)
    }

    /// Duality argument for points strictly inside `J0` within the open unit square.
    fn j0_chain(&mut self, idx: usize) -> Result<usize> {
        let le = self.push(Axiom::MultiplierNecessity, vec![idx])?;
        if !self.constraint(le).satisfied {
            return Ok(le);
        }
        let tr = self.push(Axiom::Transpose, vec![idx])?;
        let z = self.statement(idx).triple().inv_p;
        let order = -((Rational::ONE - self.rho) * Rational::from_integer(i64::from(self.n)) * (Rational::ONE - z));
        let lowered = self.push(Axiom::ClassInclusion { new_order: order }, vec![tr])?;
        let eq = self.push(Axiom::KeyLemma, vec![lowered])?;
        self.push(Axiom::DualityPullback, vec![eq])
    }

    /// Derivation for a `BMO` target.
    fn bmo_target(&mut self, idx: usize) -> Result<usize> {
        let pt = self.statement(idx).triple().point();
        let (x, y) = (pt.inv_p1, pt.inv_p2);
        if x.is_zero() && y.is_zero() {
            return self.push(Axiom::EndpointIdentity, vec![idx]);
        }
        if x < Rational::ONE && y < Rational::ONE {
            let tr = self.push(Axiom::Transpose, vec![idx])?;
            let dual_pt = ExponentPoint::new(Rational::ONE, y)?;
            let order = m_rho(dual_pt, self.n, self.rho)?;
            let lowered = self.push(Axiom::ClassInclusion { new_order: order }, vec![tr])?;
            let c = self.finite_target(lowered)?;
            return self.push(Axiom::DualityPullback, vec![c]);
        }
        self.via_interpolation(idx, Axiom::KnownL2L2L1, Builder::finite_target)
    }
}

fn strictly_in_j0(pt: ExponentPoint) -> bool {
    pt.inv_p1 + pt.inv_p2 < Rational::HALF
}

/// Half the parameter at which `base + theta (pt - base)` leaves the open unit square, capped at 1.
pub fn interpolation_theta(base: ExponentPoint, pt: ExponentPoint) -> Rational {
    let exit = |b: Rational, p: Rational| {
        if p >= Rational::ONE && p > b {
            (Rational::ONE - b) / (p - b)
        } else if !p.is_positive() && p < b {
            b / (b - p)
        } else {
            Rational::ONE
        }
    };
    let theta_max = exit(base.inv_p1, pt.inv_p1)
        .min(exit(base.inv_p2, pt.inv_p2))
        .min(Rational::ONE);
    theta_max * Rational::HALF
}

/// Mechanizes the necessity argument for one exponent triple.
pub fn derive_necessity(triple: ExponentTriple, rho: Rational, n: u32) -> Result<DerivationTrace> {
    check_rho("derive_necessity", rho)?;
    if n == 0 {
        return Err(Error::domain("derive_necessity", "n must be positive"));
    }
    let mut b = Builder {
        rho,
        n,
        steps: Vec::new(),
    };
    let h = b.push(Axiom::Hypothesis { triple }, vec![])?;
    let last = if triple.inv_p.is_zero() {
        b.bmo_target(h)?
    } else {
        b.finite_target(h)?
    };
    let fin = b.constraint(last);
    debug_assert_eq!(fin.triple, triple);
    let any_violated = b
        .steps
        .iter()
        .any(|s| matches!(s.output, Fact::Constraint(c) if !c.satisfied));
    let conclusion = if any_violated || !fin.satisfied {
        Conclusion::Contradiction
    } else if fin.relation == Relation::Eq && fin.triple == triple {
        Conclusion::ForcesEquality
    } else {
        Conclusion::Inconclusive
    };
    Ok(DerivationTrace {
        triple,
        rho,
        n,
        steps: b.steps,
        conclusion,
    })
}

impl DerivationTrace {
    /// Re-applies every axiom and compares with the recorded output.
    pub fn replay(&self) -> Result<()> {
        for (i, step) in self.steps.iter().enumerate() {
            if step.inputs.iter().any(|&j| j >= i) {
                return Err(Error::domain("replay", format!("step {i} refers forward")));
            }
            let inputs: Vec<Fact> = step.inputs.iter().map(|&j| self.steps[j].output).collect();
            let out = apply_axiom(&step.axiom, &inputs, self.rho, self.n)?;
            if out != step.output {
                return Err(Error::domain(
                    "replay",
                    format!("step {i} ({}) recorded {} but replays to {out}", step.axiom.name(), step.output),
                ));
            }
        }
        match self.steps.first() {
            Some(Step {
                axiom: Axiom::Hypothesis { triple },
                ..
            }) if *triple == self.triple => Ok(()),
            _ => Err(Error::domain("replay", "trace must open with the hypothesis on its triple")),
        }
    }

    pub fn final_constraint(&self) -> Option<Constraint> {
        self.steps.iter().rev().find_map(|s| match s.output {
            Fact::Constraint(c) => Some(c),
            Fact::Statement(_) => None,
        })
    }

    /// One record per step: `index | axiom | inputs | output`, rationals as `num/den`.
    pub fn to_text(&self) -> String {
        let t = &self.triple;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# triple inv_p1={} inv_p2={} inv_p={} rho={} n={}",
            t.inv_p1, t.inv_p2, t.inv_p, self.rho, self.n
        );
        for (i, s) in self.steps.iter().enumerate() {
            let params = match s.axiom {
                Axiom::Interpolate { theta } => format!(" theta={theta}"),
                Axiom::ClassInclusion { new_order } => format!(" new_order={new_order}"),
                Axiom::KnownL1LbToL2 { inv_a } => format!(" inv_a={inv_a}"),
                Axiom::InterpolationPullback { theta, base } => format!(
                    " theta={theta} base={},{},{}",
                    base.inv_p1, base.inv_p2, base.inv_p
                ),
                _ => String::new(),
            };
            let inputs: Vec<String> = s.inputs.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{i} | {}{params} | [{}] | {}",
                s.axiom.name(),
                inputs.join(","),
                s.output
            );
        }
        let _ = writeln!(out, "# conclusion {}", self.conclusion);
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn tri(p1: &str, p2: &str, p: &str) -> ExponentTriple {
        ExponentTriple::from_exponents(p1, p2, p).unwrap()
    }

    fn leb(x: Rational) -> Space {
        Space::Lebesgue(x)
    }

    #[test]
    fn transpose_example() {
        let s = BoundednessStatement::new(r(-1, 4), [leb(r(1, 4)), leb(r(1, 4))], leb(r(1, 2)), r(1, 2), 1).unwrap();
        let t = transpose(&s).unwrap();
        assert_eq!(t.sources, [leb(r(1, 2)), leb(r(1, 4))]);
        assert_eq!(t.target, leb(r(3, 4)));
        assert_eq!(t.order, s.order);
        assert_eq!(transpose(&t).unwrap(), s);
    }

    #[test]
    fn transpose_bmo() {
        let s = BoundednessStatement::new(r(-1, 2), [leb(r(1, 3)), Space::Hardy(r(2, 1))], Space::Bmo, r(1, 2), 1)
            .unwrap();
        let t = transpose(&s).unwrap();
        assert_eq!(t.sources, [Space::Hardy(Rational::ONE), Space::Hardy(r(2, 1))]);
        assert_eq!(t.target, leb(r(2, 3)));
        assert_eq!(transpose(&t).unwrap(), s);
        let bad = BoundednessStatement::new(r(-1, 2), [Space::Hardy(r(2, 1)), leb(r(1, 2))], leb(r(1, 2)), r(1, 2), 1)
            .unwrap();
        assert!(transpose(&bad).is_err());
    }

    #[test]
    fn interpolate_example() {
        let s0 = l2l2l1(r(1, 2), 1).unwrap();
        let p = r(1, 3);
        let s1 = BoundednessStatement::new(r(-1, 2), [leb(Rational::ZERO), leb(Rational::ZERO)], leb(p), r(1, 2), 1)
            .unwrap();
        let s = interpolate(&s0, &s1, Rational::HALF).unwrap();
        assert_eq!(s.order, r(-3, 8));
        assert_eq!(s.sources, [leb(r(1, 4)), leb(r(1, 4))]);
        assert_eq!(s.target, leb((Rational::ONE + p) * Rational::HALF));
        assert!(interpolate(&s0, &s1, Rational::ZERO).is_err());
        assert_eq!(interpolate(&s0, &s0, r(1, 7)).unwrap(), s0);
    }

    #[test]
    fn known_facts() {
        let facts = known_boundedness(r(1, 2), 1).unwrap();
        let four = BoundednessStatement::new(r(-1, 4), [leb(r(1, 4)), leb(r(1, 4))], leb(r(1, 2)), r(1, 2), 1).unwrap();
        assert!(facts.contains(&l2l2l1(r(1, 2), 1).unwrap()));
        assert_eq!(facts[0].order, r(-1, 4));
        assert!(facts.contains(&four));
        assert!(known_boundedness(Rational::ZERO, 1).is_err());
    }

    #[test]
    fn keylem_examples() {
        let s = l2l2l1(r(1, 2), 1).unwrap();
        assert!(keylem_axiom(&s).unwrap().satisfied);
        let s4 = BoundednessStatement::new(r(-1, 4), [leb(r(1, 4)), leb(r(1, 4))], leb(r(1, 4)), r(1, 2), 1).unwrap();
        assert!(!keylem_axiom(&s4).unwrap().satisfied);
        let s1 =
            BoundednessStatement::new(r(-1, 4), [Space::Hardy(Rational::ONE), leb(r(1, 2))], leb(Rational::ONE), r(1, 2), 1)
                .unwrap();
        assert!(keylem_axiom(&s1).is_err());
    }

    #[test]
    fn class_inclusion_examples() {
        let s = l2l2l1(r(1, 2), 1).unwrap();
        assert_eq!(class_inclusion(&s, r(-1, 2)).unwrap().order, r(-1, 2));
        assert!(class_inclusion(&class_inclusion(&s, r(-1, 2)).unwrap(), r(-1, 4)).is_err());
        assert_eq!(class_inclusion(&s, s.order).unwrap(), s);
    }

    #[test]
    fn derive_examples() {
        let t = derive_necessity(tri("2", "2", "1"), r(1, 2), 1).unwrap();
        assert_eq!(t.conclusion, Conclusion::ForcesEquality);
        assert_eq!(t.steps.len(), 2);
        let t = derive_necessity(tri("inf", "inf", "inf"), r(1, 2), 1).unwrap();
        assert_eq!(t.conclusion, Conclusion::ForcesEquality);
        let t = derive_necessity(tri("inf", "inf", "2"), r(1, 2), 1).unwrap();
        assert_eq!(t.conclusion, Conclusion::Contradiction);
        t.replay().unwrap();
        assert!(derive_necessity(tri("2", "2", "1"), Rational::ONE, 1).is_err());
    }

    #[test]
    fn j0_uses_duality() {
        let t = derive_necessity(tri("4", "8", "8/3"), r(1, 3), 2).unwrap();
        assert_eq!(t.conclusion, Conclusion::ForcesEquality);
        assert!(t.steps.iter().any(|s| s.axiom == Axiom::Transpose));
        t.replay().unwrap();
    }

    #[test]
    fn replay_detects_tampering() {
        let mut t = derive_necessity(tri("1", "4", "4/5"), r(1, 2), 1).unwrap();
        t.replay().unwrap();
        if let Fact::Statement(ref mut s) = t.steps[0].output {
            s.order = s.order + Rational::ONE;
        }
        assert!(t.replay().is_err());
    }

    #[test]
    fn text_and_json() {
        let t = derive_necessity(tri("inf", "4", "2"), r(1, 2), 1).unwrap();
        let text = t.to_text();
        assert_eq!(text.lines().count(), t.steps.len() + 2);
        assert!(text.contains("theta=1/2"));
        let back = DerivationTrace::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    fn recip() -> impl Strategy<Value = Rational> {
        prop_oneof![
            Just(Rational::ZERO),
            (1i64..=24, 1i64..=12).prop_map(|(a, b)| Rational::new(a, b)),
        ]
    }

    proptest! {
        #[test]
        fn conclusion_matches_hoelder(x in recip(), y in recip(), dz in recip(), equal in any::<bool>(), rho_num in 1i64..8, n in 1u32..3) {
            let z = if equal { x + y } else { dz };
            let triple = ExponentTriple::new(x, y, z).unwrap();
            let rho = Rational::new(rho_num, 8);
            let t = derive_necessity(triple, rho, n).unwrap();
            t.replay().unwrap();
            let fin = t.final_constraint().unwrap();
            prop_assert_eq!(fin.triple, triple);
            if triple.is_hoelder() {
                prop_assert_eq!(t.conclusion, Conclusion::ForcesEquality);
                prop_assert!(fin.satisfied);
            } else {
                prop_assert_eq!(t.conclusion, Conclusion::Contradiction);
            }
        }

        #[test]
        fn transpose_keeps_order_and_rho(x in 0i64..8, y in 0i64..30, z in 1i64..=8) {
            let s = BoundednessStatement::new(
                Rational::new(-x - 1, 3),
                [Space::source(Rational::new(x, 8)), Space::source(Rational::new(y, 8))],
                Space::target(Rational::new(z, 8)),
                Rational::HALF,
                1,
            ).unwrap();
            let t = transpose(&s).unwrap();
            prop_assert_eq!(t.order, s.order);
            prop_assert_eq!(t.rho, s.rho);
            prop_assert_eq!(transpose(&t).unwrap(), s);
        }
    }
}
