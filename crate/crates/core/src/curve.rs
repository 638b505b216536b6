//! Points, divisors and factored rational functions on the projective line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::QPoly;
use crate::rational::{fmt_rational, parse_rational, Rational};

/// A finite point `t = a` or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurvePoint {
    Finite(Rational),
    Infinity,
}

impl CurvePoint {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            CurvePoint::Finite(a) => Some(a),
            CurvePoint::Infinity => None,
        }
    }
}

impl From<Rational> for CurvePoint {
    fn from(a: Rational) -> Self {
        CurvePoint::Finite(a)
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Finite(a) => f.write_str(&fmt_rational(a)),
            CurvePoint::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for CurvePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            Ok(CurvePoint::Infinity)
        } else {
            parse_rational(s).map(CurvePoint::Finite)
        }
    }
}

impl Serialize for CurvePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CurvePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Weil divisor: a finite map from points to nonzero multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CDivisor {
    points: BTreeMap<CurvePoint, i64>,
}

impl CDivisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = (CurvePoint, i64)>) -> Self {
        let mut d = Self::new();
        for (p, m) in points {
            d.add_point(p, m);
        }
        d
    }

    pub fn add_point(&mut self, p: CurvePoint, m: i64) {
        let e = self.points.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.points.retain(|_, v| *v != 0);
        }
    }

    pub fn multiplicity(&self, p: &CurvePoint) -> i64 {
        self.points.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.points.values().sum()
    }

    pub fn is_reduced(&self) -> bool {
        self.points.values().all(|&m| m == 1)
    }

    pub fn is_effective(&self) -> bool {
        self.points.values().all(|&m| m > 0)
    }

    pub fn support(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CurvePoint, i64)> {
        self.points.iter().map(|(p, &m)| (p, m))
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &CDivisor, k: i64) -> CDivisor {
        let mut out = self.clone();
        if k != 0 {
            for (p, m) in other.iter() {
                out.add_point(p.clone(), k * m);
            }
        }
        out
    }
}

/// `c * prod (t - a)^e` with distinct finite roots `a`; the order at
/// infinity is `-sum e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    constant: Rational,
    factors: BTreeMap<Rational, i64>,
}

/// Value and first derivative at a point, or a pole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointValue {
    Regular { value: Rational, derivative: Rational },
    Pole,
}

impl RationalFunction {
    pub fn new(constant: Rational, factors: impl IntoIterator<Item = (Rational, i64)>) -> Result<Self> {
        if constant.is_zero() {
            return Err(Error::Parse("rational function with zero constant".into()));
        }
        let mut f = Self::constant(constant);
        for (a, e) in factors {
            f.mul_linear(a, e);
        }
        Ok(f)
    }

    pub fn constant(c: Rational) -> Self {
        assert!(!c.is_zero(), "zero constant");
        Self {
            constant: c,
            factors: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// `t - a`.
    pub fn linear(a: Rational) -> Self {
        let mut f = Self::one();
        f.mul_linear(a, 1);
        f
    }

    fn mul_linear(&mut self, a: Rational, e: i64) {
        let x = self.factors.entry(a.clone()).or_insert(0);
        *x += e;
        if *x == 0 {
            self.factors.remove(&a);
        }
    }

    pub fn constant_factor(&self) -> &Rational {
        &self.constant
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Rational, i64)> {
        self.factors.iter().map(|(a, &e)| (a, e))
    }

    pub fn order_at_infinity(&self) -> i64 {
        -self.factors.values().sum::<i64>()
    }

    pub fn divisor(&self) -> CDivisor {
        let mut d = CDivisor::from_points(
            self.factors
                .iter()
                .map(|(a, &e)| (CurvePoint::Finite(a.clone()), e)),
        );
        d.add_point(CurvePoint::Infinity, self.order_at_infinity());
        d
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        let mut out = self.clone();
        out.constant *= &other.constant;
        for (a, &e) in &other.factors {
            out.mul_linear(a.clone(), e);
        }
        out
    }

    pub fn pow(&self, k: i64) -> RationalFunction {
        if k == 0 {
            return Self::one();
        }
        let c = if k > 0 {
            num_traits::pow(self.constant.clone(), k as usize)
        } else {
            num_traits::pow(self.constant.recip(), k.unsigned_abs() as usize)
        };
        RationalFunction {
            constant: c,
            factors: self.factors.iter().map(|(a, &e)| (a.clone(), e * k)).collect(),
        }
    }

    pub fn inv(&self) -> RationalFunction {
        self.pow(-1)
    }

    pub fn scale(&self, c: &Rational) -> RationalFunction {
        let mut out = self.clone();
        out.constant *= c;
        assert!(!out.constant.is_zero(), "zero constant");
        out
    }

    /// `c * prod_{e > 0} (t - a)^e`.
    pub fn numerator(&self) -> QPoly {
        self.part(|e| e > 0).scale(&self.constant)
    }

    /// `prod_{e < 0} (t - a)^(-e)`.
    pub fn denominator(&self) -> QPoly {
        self.part(|e| e < 0)
    }

    fn part(&self, keep: impl Fn(i64) -> bool) -> QPoly {
        let mut p = QPoly::one();
        for (a, &e) in &self.factors {
            if keep(e) {
                p = &p * &QPoly::linear(a).pow(e.unsigned_abs() as u32);
            }
        }
        p
    }

    pub fn eval(&self, p: &CurvePoint) -> Option<Rational> {
        let CurvePoint::Finite(x) = p else {
            return match self.evaluate_with_derivative(p) {
                PointValue::Regular { value, .. } => Some(value),
                PointValue::Pole => None,
            };
        };
        match self.factors.get(x).copied().unwrap_or(0) {
            e if e < 0 => return None,
            e if e > 0 => return Some(Rational::zero()),
            _ => {}
        }
        // integer products, normalised once
        let (mut num, mut den) = (self.constant.numer().clone(), self.constant.denom().clone());
        for (a, &e) in &self.factors {
            let d = x - a;
            let (n, m) = (d.numer().pow(e.unsigned_abs() as u32), d.denom().pow(e.unsigned_abs() as u32));
            if e > 0 {
                num *= n;
                den *= m;
            } else {
                num *= m;
                den *= n;
            }
        }
        Some(Rational::new(num, den))
    }

    /// Value and derivative at `p`; at infinity the derivative is taken in
    /// the local parameter `s = 1/t` at `s = 0`.
    pub fn evaluate_with_derivative(&self, p: &CurvePoint) -> PointValue {
        match p {
            CurvePoint::Finite(x) => self.eval_finite(x),
            CurvePoint::Infinity => self.eval_infinity(),
        }
    }

    fn eval_finite(&self, x: &Rational) -> PointValue {
        let ex = self.factors.get(x).copied().unwrap_or(0);
        if ex < 0 {
            return PointValue::Pole;
        }
        // g = the function with the factor at x removed
        let mut g = self.constant.clone();
        let mut log_deriv = Rational::zero();
        for (a, &e) in &self.factors {
            if a == x {
                continue;
            }
            let d = x - a;
            g *= pow_signed(&d, e);
            log_deriv += Rational::from_integer(BigInt::from(e)) / d;
        }
        match ex {
            0 => PointValue::Regular {
                derivative: &g * log_deriv,
                value: g,
            },
            1 => PointValue::Regular {
                value: Rational::zero(),
                derivative: g,
            },
            _ => PointValue::Regular {
                value: Rational::zero(),
                derivative: Rational::zero(),
            },
        }
    }

    fn eval_infinity(&self) -> PointValue {
        // f(1/s) = c s^(-n) prod (1 - a s)^e with n = sum e
        let n: i64 = self.factors.values().sum();
        match n {
            n if n > 0 => PointValue::Pole,
            0 => {
                let slope: Rational = self
                    .factors
                    .iter()
                    .map(|(a, &e)| a * Rational::from_integer(BigInt::from(e)))
                    .sum();
                PointValue::Regular {
                    derivative: -(&self.constant * slope),
                    value: self.constant.clone(),
                }
            }
            -1 => PointValue::Regular {
                value: Rational::zero(),
                derivative: self.constant.clone(),
            },
            _ => PointValue::Regular {
                value: Rational::zero(),
                derivative: Rational::zero(),
            },
        }
    }
}

fn pow_signed(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), e.unsigned_abs() as usize)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalFunctionRepr {
    constant: String,
    factors: Vec<(String, i64)>,
}

impl Serialize for RationalFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalFunctionRepr {
            constant: fmt_rational(&self.constant),
            factors: self
                .factors
                .iter()
                .map(|(a, &e)| (fmt_rational(a), e))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = RationalFunctionRepr::deserialize(d)?;
        let c = parse_rational(&r.constant).map_err(D::Error::custom)?;
        let mut factors = Vec::with_capacity(r.factors.len());
        let mut seen = BTreeSet::new();
        for (a, e) in r.factors {
            let a = parse_rational(&a).map_err(D::Error::custom)?;
            if !seen.insert(a.clone()) {
                return Err(D::Error::custom(format!("repeated root {}", fmt_rational(&a))));
            }
            factors.push((a, e));
        }
        RationalFunction::new(c, factors).map_err(D::Error::custom)
    }
}

/// The function field of a smooth projective curve, reduced to what the
/// coefficient scaling needs.
pub trait FunctionField {
    fn genus(&self) -> u32;
}

/// The projective line over the rationals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProjectiveLine;

impl FunctionField for ProjectiveLine {
    fn genus(&self) -> u32 {
        0
    }
}

/// Numerator bound and denominator range of the first sampling round.
const NUM_BOUND: i64 = 30;
const DEN_BOUND: i64 = 5;
/// Rejections before the numerator range doubles.
const WIDEN_AFTER: u32 = 256;

impl ProjectiveLine {
    /// `d` distinct finite points outside `avoid`, reduced, drawn from a
    /// generator seeded by `seed`.
    pub fn sample_divisor(&self, d: usize, seed: u64, avoid: &BTreeSet<CurvePoint>) -> CDivisor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = CDivisor::new();
        let mut bound = NUM_BOUND;
        let mut misses = 0;
        while out.points.len() < d {
            let n = rng.random_range(-bound..=bound);
            let q = rng.random_range(1..=DEN_BOUND);
            let p = CurvePoint::Finite(Rational::new(n.into(), q.into()));
            if avoid.contains(&p) || out.points.contains_key(&p) {
                misses += 1;
                if misses == WIDEN_AFTER {
                    misses = 0;
                    bound *= 2;
                }
                continue;
            }
            out.points.insert(p, 1);
        }
        out
    }

    /// The function with divisor exactly `d` and constant 1.
    pub fn principal_function(&self, d: &CDivisor) -> Result<RationalFunction> {
        let deg = d.degree();
        if deg != 0 {
            return Err(Error::NotDegreeZero(deg));
        }
        RationalFunction::new(
            Rational::one(),
            d.iter().filter_map(|(p, m)| p.finite().map(|a| (a.clone(), m))),
        )
    }
}
