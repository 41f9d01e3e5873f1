//! Exact critical orders of the bilinear classes `BS^m_{rho,rho}`.
//!
//! Everything here works on reciprocals of Lebesgue exponents: the point
//! `(1/p1, 1/p2)` is an [`ExponentPoint`] and `p = inf` is encoded as the
//! reciprocal `0`. All formulas are affine in the reciprocals, so rational
//! arithmetic keeps region boundaries exact.
//!
//! Two families of regions partition the quadrant:
//!
//! ```text
//!  J-family (all of [0, inf)^2)            I-family ([0,1]^2)
//!   J0: x + y <= 1/2                        I1: x <= 1/2, y <= 1/2
//!   J1: x, y <= 1/2, x + y >= 1/2           I2: x <= 1/2, y >= 1/2
//!   J2: x <= 1/2, y >= 1/2                  I3: x >= 1/2, y <= 1/2
//!   J3: x >= 1/2, y <= 1/2                  I4: x >= 1/2, y >= 1/2
//!   J4: x >= 1/2, y >= 1/2
//! ```
//!
//! Regions are classified from these inequalities, not from the max formula,
//! so comparing a region's closed form against the max formula is a real check.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
///
/// Displays and parses as `num/den`; plain integers are accepted on input.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));
    pub const HALF: Rational = Rational(Ratio::new_raw(1, 2));

    /// Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(self) -> Self {
        Rational(self.0.recip())
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(Rational::new(n, d))
            }
            None => s.parse::<i64>().map(Rational::from_integer).map_err(|_| bad()),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

/// Parses a Lebesgue exponent (`2`, `4/3`, `inf`) and returns its reciprocal.
pub fn parse_exponent(s: &str) -> Result<Rational> {
    let t = s.trim();
    if matches!(t, "inf" | "infinity" | "Inf" | "INF" | "oo") {
        return Ok(Rational::ZERO);
    }
    let p: Rational = t.parse()?;
    if !p.is_positive() {
        return Err(Error::Parse(format!("exponent must be positive or inf: {s:?}")));
    }
    Ok(p.recip())
}

/// Formats a reciprocal back as an exponent, `inf` for zero.
pub fn format_exponent(inv: Rational) -> String {
    if inv.is_zero() {
        "inf".to_string()
    } else {
        let p = inv.recip();
        if p.denom() == 1 {
            p.numer().to_string()
        } else {
            p.to_string()
        }
    }
}

/// The point `(1/p1, 1/p2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub inv_p1: Rational,
    pub inv_p2: Rational,
}

impl ExponentPoint {
    pub fn new(inv_p1: Rational, inv_p2: Rational) -> Result<Self> {
        if inv_p1.is_negative() || inv_p2.is_negative() {
            return Err(Error::domain(
                "ExponentPoint",
                format!("reciprocals must be >= 0, got ({inv_p1}, {inv_p2})"),
            ));
        }
        Ok(ExponentPoint { inv_p1, inv_p2 })
    }

    pub fn swap(self) -> Self {
        ExponentPoint {
            inv_p1: self.inv_p2,
            inv_p2: self.inv_p1,
        }
    }

    /// Whether the point lies in the open square `(0,1)^2`.
    pub fn in_open_unit_square(&self) -> bool {
        let open = |r: Rational| r.is_positive() && r < Rational::ONE;
        open(self.inv_p1) && open(self.inv_p2)
    }
}

/// Reciprocal exponents `(1/p1, 1/p2, 1/p)`, all `>= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub inv_p1: Rational,
    pub inv_p2: Rational,
    pub inv_p: Rational,
}

impl ExponentTriple {
    pub fn new(inv_p1: Rational, inv_p2: Rational, inv_p: Rational) -> Result<Self> {
        if inv_p1.is_negative() || inv_p2.is_negative() || inv_p.is_negative() {
            return Err(Error::domain(
                "ExponentTriple",
                format!("reciprocals must be >= 0, got ({inv_p1}, {inv_p2}, {inv_p})"),
            ));
        }
        Ok(ExponentTriple {
            inv_p1,
            inv_p2,
            inv_p,
        })
    }

    /// Builds the triple from exponent strings such as `"2"`, `"4/3"`, `"inf"`.
    pub fn from_exponents(p1: &str, p2: &str, p: &str) -> Result<Self> {
        Self::new(parse_exponent(p1)?, parse_exponent(p2)?, parse_exponent(p)?)
    }

    pub fn point(&self) -> ExponentPoint {
        ExponentPoint {
            inv_p1: self.inv_p1,
            inv_p2: self.inv_p2,
        }
    }

    /// `1/p - 1/p1 - 1/p2`.
    pub fn hoelder_gap(&self) -> Rational {
        self.inv_p - self.inv_p1 - self.inv_p2
    }

    pub fn is_hoelder(&self) -> bool {
        self.hoelder_gap().is_zero()
    }

    /// `(1 - theta) * a + theta * b`, componentwise.
    pub fn affine(a: &ExponentTriple, b: &ExponentTriple, theta: Rational) -> ExponentTriple {
        let w = Rational::ONE - theta;
        ExponentTriple {
            inv_p1: w * a.inv_p1 + theta * b.inv_p1,
            inv_p2: w * a.inv_p2 + theta * b.inv_p2,
            inv_p: w * a.inv_p + theta * b.inv_p,
        }
    }
}

impl fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(p1, p2, p) = ({}, {}, {})",
            format_exponent(self.inv_p1),
            format_exponent(self.inv_p2),
            format_exponent(self.inv_p)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionFamily {
    J,
    I,
}

impl FromStr for RegionFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "J" | "j" => Ok(RegionFamily::J),
            "I" | "i" => Ok(RegionFamily::I),
            other => Err(Error::Parse(format!("unknown region family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub family: RegionFamily,
    pub index: u8,
    /// The point lies in the closure of at least two regions of the family.
    pub on_boundary: bool,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            RegionFamily::J => "J",
            RegionFamily::I => "I",
        };
        write!(f, "{fam}{}", self.index)?;
        if self.on_boundary {
            write!(f, "*")?;
        }
        Ok(())
    }
}

fn n_rat(n: u32) -> Rational {
    Rational::from_integer(i64::from(n))
}

/// The five competing terms of `m_0`, indexed like `J0..J4`.
fn j_terms(pt: ExponentPoint) -> [Rational; 5] {
    let (x, y) = (pt.inv_p1, pt.inv_p2);
    [
        Rational::ONE - x - y,
        Rational::HALF,
        y,
        x,
        x + y - Rational::HALF,
    ]
}

/// The four competing terms of the tilde order, indexed like `I1..I4`.
fn i_terms(pt: ExponentPoint) -> [Rational; 4] {
    let (x, y) = (pt.inv_p1, pt.inv_p2);
    [Rational::HALF, y, x, x + y - Rational::HALF]
}

fn max_of(terms: &[Rational]) -> Rational {
    terms.iter().copied().fold(terms[0], Rational::max)
}

/// `m_0(p1, p2) = -n * max{1/2, 1/p1, 1/p2, 1 - 1/p1 - 1/p2, 1/p1 + 1/p2 - 1/2}`.
pub fn m0(point: ExponentPoint, n: u32) -> Rational {
    -(n_rat(n) * max_of(&j_terms(point)))
}

/// `m~_0(p1, p2) = -n * max{1/2, 1/p1, 1/p2, 1/p1 + 1/p2 - 1/2}`.
pub fn m0_tilde(point: ExponentPoint, n: u32) -> Rational {
    -(n_rat(n) * max_of(&i_terms(point)))
}

fn check_rho(rho: Rational) -> Result<()> {
    if rho.is_negative() || rho >= Rational::ONE {
        return Err(Error::domain("m_rho", format!("rho must lie in [0,1), got {rho}")));
    }
    Ok(())
}

/// `m_rho = (1 - rho) m_0`.
pub fn m_rho(point: ExponentPoint, n: u32, rho: Rational) -> Result<Rational> {
    check_rho(rho)?;
    Ok((Rational::ONE - rho) * m0(point, n))
}

/// `m~_rho = (1 - rho) m~_0`.
pub fn m_rho_tilde(point: ExponentPoint, n: u32, rho: Rational) -> Result<Rational> {
    check_rho(rho)?;
    Ok((Rational::ONE - rho) * m0_tilde(point, n))
}

/// Closed-region membership from the defining inequalities; index list in ascending order.
fn memberships(point: ExponentPoint, family: RegionFamily) -> Vec<u8> {
    let (x, y) = (point.inv_p1, point.inv_p2);
    let h = Rational::HALF;
    let quadrants = |offset: u8| {
        let mut out = Vec::with_capacity(4);
        if x <= h && y <= h {
            out.push(offset);
        }
        if x <= h && y >= h {
            out.push(offset + 1);
        }
        if x >= h && y <= h {
            out.push(offset + 2);
        }
        if x >= h && y >= h {
            out.push(offset + 3);
        }
        out
    };
    match family {
        RegionFamily::I => quadrants(1),
        RegionFamily::J => {
            let mut out = Vec::with_capacity(5);
            if x + y <= h {
                out.push(0);
            }
            if x <= h && y <= h && x + y >= h {
                out.push(1);
            }
            out.extend(quadrants(1).into_iter().filter(|&i| i != 1));
            out
        }
    }
}

/// Region lookup on the whole quadrant `[0, inf)^2`; the I-quadrants extend past 1.
pub fn locate(point: ExponentPoint, family: RegionFamily) -> Region {
    let members = memberships(point, family);
    Region {
        family,
        index: members[0],
        on_boundary: members.len() >= 2,
    }
}

/// Classifies `point` into `J0..J4` or `I1..I4`.
///
/// Boundary points report the smallest admissible index with `on_boundary`
/// set. The I-family is only defined on `[0,1]^2`.
pub fn classify_region(point: ExponentPoint, family: RegionFamily) -> Result<Region> {
    if family == RegionFamily::I && (point.inv_p1 > Rational::ONE || point.inv_p2 > Rational::ONE) {
        return Err(Error::domain(
            "classify_region",
            format!(
                "I-family is defined on [0,1]^2, got ({}, {})",
                point.inv_p1, point.inv_p2
            ),
        ));
    }
    Ok(locate(point, family))
}

/// The closed form attached to a region (e.g. `-n/p2` on `J2`).
pub fn region_formula(region: Region, point: ExponentPoint, n: u32) -> Rational {
    let (x, y) = (point.inv_p1, point.inv_p2);
    let nn = n_rat(n);
    let j4 = nn * (Rational::HALF - x - y);
    match (region.family, region.index) {
        (RegionFamily::J, 0) => nn * (x + y - Rational::ONE),
        (RegionFamily::J, 1) | (RegionFamily::I, 1) => -(nn * Rational::HALF),
        (RegionFamily::J, 2) | (RegionFamily::I, 2) => -(nn * y),
        (RegionFamily::J, 3) | (RegionFamily::I, 3) => -(nn * x),
        (RegionFamily::J, 4) | (RegionFamily::I, 4) => j4,
        (fam, idx) => unreachable!("no region {fam:?}{idx}"),
    }
}

/// `m_0` evaluated through the region's closed form.
pub fn piecewise_m0(point: ExponentPoint, n: u32) -> Rational {
    region_formula(locate(point, RegionFamily::J), point, n)
}

/// `m~_0` evaluated through the (quadrant-extended) I-region closed form.
pub fn piecewise_m0_tilde(point: ExponentPoint, n: u32) -> Rational {
    region_formula(locate(point, RegionFamily::I), point, n)
}

/// Number of competing terms attaining the maximum (J-family).
pub fn tied_max_terms(point: ExponentPoint, family: RegionFamily) -> usize {
    let count = |terms: &[Rational]| {
        let m = max_of(terms);
        terms.iter().filter(|t| t.cmp(&&m) == Ordering::Equal).count()
    };
    match family {
        RegionFamily::J => count(&j_terms(point)),
        RegionFamily::I => count(&i_terms(point)),
    }
}

/// One grid point of an exponent map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRow {
    pub point: ExponentPoint,
    pub region: Region,
    /// `m_0` (J-family) or `m~_0` (I-family) from the max formula.
    pub critical: Rational,
    /// The same order through the region's closed form.
    pub piecewise: Rational,
}

/// Regions and critical orders on the `d x d` grid `max * (i, k) / (d - 1)`.
pub fn exponent_map(n: u32, family: RegionFamily, d: usize, max: Rational) -> Result<Vec<MapRow>> {
    if d < 2 {
        return Err(Error::domain("exponent_map", format!("grid needs at least 2 points per axis, got {d}")));
    }
    if !max.is_positive() {
        return Err(Error::domain("exponent_map", format!("grid extent must be positive, got {max}")));
    }
    let step = max * Rational::new(1, d as i64 - 1);
    let mut rows = Vec::with_capacity(d * d);
    for i in 0..d {
        for k in 0..d {
            let point = ExponentPoint::new(step * Rational::from(i as i64), step * Rational::from(k as i64))?;
            let (critical, piecewise) = match family {
                RegionFamily::J => (m0(point, n), piecewise_m0(point, n)),
                RegionFamily::I => (m0_tilde(point, n), piecewise_m0_tilde(point, n)),
            };
            rows.push(MapRow {
                point,
                region: locate(point, family),
                critical,
                piecewise,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `inv_p1,inv_p2,region,critical_order,piecewise_order`.
pub fn exponent_map_csv(rows: &[MapRow]) -> String {
    let mut s = String::from("inv_p1,inv_p2,region,critical_order,piecewise_order\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.point.inv_p1, r.point.inv_p2, r.region, r.critical, r.piecewise
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_grid_agrees() {
        for fam in [RegionFamily::J, RegionFamily::I] {
            let rows = exponent_map(2, fam, 7, Rational::new(3, 2)).unwrap();
            assert_eq!(rows.len(), 49);
            assert!(rows.iter().all(|r| r.critical == r.piecewise));
            assert_eq!(rows[8].point, ExponentPoint::new(Rational::new(1, 4), Rational::new(1, 4)).unwrap());
        }
        assert!(exponent_map(1, RegionFamily::J, 1, Rational::ONE).is_err());
        let csv = exponent_map_csv(&exponent_map(1, RegionFamily::J, 3, Rational::ONE).unwrap());
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.contains("1/2,1/2,J1*,-1/2,-1/2"));
    }
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn pt(x: Rational, y: Rational) -> ExponentPoint {
        ExponentPoint::new(x, y).unwrap()
    }

    #[test]
    fn m0_examples() {
        assert_eq!(m0(pt(r(1, 2), r(1, 2)), 1), r(-1, 2));
        assert_eq!(m0(pt(r(0, 1), r(0, 1)), 1), r(-1, 1));
        assert_eq!(m0(pt(r(1, 1), r(1, 1)), 1), r(-3, 2));
    }

    #[test]
    fn m0_tilde_examples() {
        assert_eq!(m0_tilde(pt(r(1, 2), r(1, 2)), 1), r(-1, 2));
        assert_eq!(m0_tilde(pt(r(1, 8), r(1, 8)), 1), r(-1, 2));
        assert_eq!(m0_tilde(pt(r(3, 4), r(3, 4)), 1), r(-1, 1));
    }

    #[test]
    fn m_rho_examples() {
        assert_eq!(m_rho(pt(r(1, 2), r(1, 2)), 1, r(1, 2)).unwrap(), r(-1, 4));
        let p = pt(r(1, 3), r(5, 7));
        assert_eq!(m_rho(p, 3, Rational::ZERO).unwrap(), m0(p, 3));
        assert_eq!(m_rho(pt(r(0, 1), r(0, 1)), 2, r(1, 3)).unwrap(), r(-4, 3));
        assert!(m_rho(p, 1, Rational::ONE).is_err());
        assert!(m_rho(p, 1, r(-1, 5)).is_err());
        assert_eq!(m_rho_tilde(pt(r(3, 4), r(3, 4)), 1, r(1, 2)).unwrap(), r(-1, 2));
    }

    #[test]
    fn classify_examples() {
        let reg = classify_region(pt(r(1, 8), r(1, 8)), RegionFamily::J).unwrap();
        assert_eq!((reg.index, reg.on_boundary), (0, false));
        let reg = classify_region(pt(r(1, 4), r(1, 4)), RegionFamily::J).unwrap();
        assert_eq!((reg.index, reg.on_boundary), (0, true));
        let reg = classify_region(pt(r(1, 4), r(3, 4)), RegionFamily::J).unwrap();
        assert_eq!((reg.index, reg.on_boundary), (2, false));
        let reg = classify_region(pt(r(3, 4), r(3, 4)), RegionFamily::I).unwrap();
        assert_eq!((reg.index, reg.on_boundary), (4, false));
        assert!(classify_region(pt(r(5, 4), r(1, 4)), RegionFamily::I).is_err());
        // the J-family covers the whole quadrant
        let reg = classify_region(pt(r(2, 1), r(0, 1)), RegionFamily::J).unwrap();
        assert_eq!(reg.index, 3);
    }

    #[test]
    fn corner_lies_in_four_regions() {
        let reg = classify_region(pt(Rational::HALF, Rational::HALF), RegionFamily::J).unwrap();
        assert_eq!(reg.index, 1);
        assert!(reg.on_boundary);
        assert_eq!(memberships(pt(Rational::HALF, Rational::HALF), RegionFamily::J), vec![1, 2, 3, 4]);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(parse_exponent("inf").unwrap(), Rational::ZERO);
        assert_eq!(parse_exponent("4/3").unwrap(), r(3, 4));
        assert_eq!(parse_exponent("2").unwrap(), Rational::HALF);
        assert!(parse_exponent("0").is_err());
        assert!(parse_exponent("-2").is_err());
        assert_eq!(format_exponent(r(3, 4)), "4/3");
        assert_eq!(format_exponent(Rational::ZERO), "inf");
        assert_eq!(r(2, 4).to_string(), "1/2");
        assert_eq!(Rational::from_integer(3).to_string(), "3/1");
        assert_eq!("-6/4".parse::<Rational>().unwrap(), r(-3, 2));
        assert!("1/0".parse::<Rational>().is_err());
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (0i64..=48, 1i64..=16).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn piecewise_matches_max(x in small_rational(), y in small_rational(), n in 1u32..4) {
            let p = pt(x, y);
            prop_assert_eq!(piecewise_m0(p, n), m0(p, n));
            prop_assert_eq!(piecewise_m0_tilde(p, n), m0_tilde(p, n));
        }

        #[test]
        fn boundary_flag_matches_ties(x in small_rational(), y in small_rational()) {
            let p = pt(x, y);
            prop_assert_eq!(locate(p, RegionFamily::J).on_boundary, tied_max_terms(p, RegionFamily::J) >= 2);
            prop_assert_eq!(locate(p, RegionFamily::I).on_boundary, tied_max_terms(p, RegionFamily::I) >= 2);
        }

        #[test]
        fn tilde_dominates(x in small_rational(), y in small_rational(), n in 1u32..4) {
            let p = pt(x, y);
            let terms = j_terms(p);
            let unique_j0 = terms[1..].iter().all(|t| *t < terms[0]);
            prop_assert!(m0_tilde(p, n) >= m0(p, n));
            prop_assert_eq!(m0_tilde(p, n) > m0(p, n), unique_j0);
        }

        #[test]
        fn symmetric(x in small_rational(), y in small_rational()) {
            prop_assert_eq!(m0(pt(x, y), 1), m0(pt(y, x), 1));
            prop_assert_eq!(m0_tilde(pt(x, y), 1), m0_tilde(pt(y, x), 1));
        }

        #[test]
        fn concave_midpoint(a in small_rational(), b in small_rational(), c in small_rational(), d in small_rational()) {
            let mid = pt((a + c) * Rational::HALF, (b + d) * Rational::HALF);
            let avg = (m0(pt(a, b), 2) + m0(pt(c, d), 2)) * Rational::HALF;
            prop_assert!(m0(mid, 2) >= avg);
        }
    }
}
