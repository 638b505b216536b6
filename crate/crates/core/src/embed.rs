//! Morphism data for a map from the projective line to a toric 3-fold:
//! per-ray divisors, the character homomorphism on a lattice basis, a torus
//! element, and the coordinate functions on each affine chart.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::curve::{CDivisor, CurvePoint, ProjectiveLine, RationalFunction};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::intersect::{TDivisor, XiVector};
use crate::rational::{serde_rational_vec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingData {
    pub fan: Fan,
    pub h: TDivisor,
    pub xi: XiVector,
    /// `None` for hand-built divisor data.
    pub seed: Option<u64>,
    /// `divisors[j]` lies over ray `j`.
    pub divisors: Vec<CDivisor>,
    /// Images of the standard basis `m_1, m_2, m_3`.
    pub epsilon: [RationalFunction; 3],
    #[serde(with = "serde_rational_vec")]
    pub torus: Vec<Rational>,
}

/// Seed for the divisor over ray `j`.
fn ray_seed(seed: u64, j: usize) -> u64 {
    let mut z = seed.wrapping_add((j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples one divisor per ray, pairwise disjoint and away from infinity,
/// then builds the character homomorphism from them.
pub fn build_embedding_data(
    fan: &Fan,
    h: &TDivisor,
    xi: &XiVector,
    seed: u64,
    torus: &[Rational; 3],
) -> Result<EmbeddingData> {
    xi.check(fan)?;
    let line = ProjectiveLine;
    let mut avoid: BTreeSet<CurvePoint> = [CurvePoint::Infinity].into();
    let mut divisors = Vec::with_capacity(fan.num_rays());
    for (j, &d) in xi.xi.iter().enumerate() {
        let dj = line.sample_divisor(d as usize, ray_seed(seed, j), &avoid);
        avoid.extend(dj.support().cloned());
        divisors.push(dj);
    }
    EmbeddingData::from_divisors(fan, h, xi, divisors, torus, Some(seed))
}

impl EmbeddingData {
    /// Builds the homomorphism from given divisors. Reducedness and
    /// disjointness are not required, so fixtures can violate them.
    pub fn from_divisors(
        fan: &Fan,
        h: &TDivisor,
        xi: &XiVector,
        divisors: Vec<CDivisor>,
        torus: &[Rational; 3],
        seed: Option<u64>,
    ) -> Result<EmbeddingData> {
        xi.check(fan)?;
        if divisors.len() != fan.num_rays() {
            return Err(Error::Dimension(format!(
                "{} divisors for {} rays",
                divisors.len(),
                fan.num_rays()
            )));
        }
        for (j, (d, &x)) in divisors.iter().zip(&xi.xi).enumerate() {
            if d.degree() != x || !d.is_effective() {
                return Err(Error::XiMismatch(format!(
                    "divisor {j} is not effective of degree {x}"
                )));
            }
        }
        if torus.iter().any(Zero::is_zero) {
            return Err(Error::InvalidTorus);
        }
        let mut data = EmbeddingData {
            fan: fan.clone(),
            h: h.clone(),
            xi: xi.clone(),
            seed,
            divisors,
            epsilon: [RationalFunction::one(), RationalFunction::one(), RationalFunction::one()],
            torus: torus.to_vec(),
        };
        let line = ProjectiveLine;
        for i in 0..3 {
            let mut m = [0; 3];
            m[i] = 1;
            let d = data.character_divisor(&m);
            debug_assert_eq!(d.degree(), 0);
            data.epsilon[i] = line.principal_function(&d)?.scale(&torus[i]);
        }
        Ok(data)
    }

    /// `sum_j <m, n_j> D_j`.
    pub fn character_divisor(&self, m: &[i64; 3]) -> CDivisor {
        self.fan
            .rays
            .iter()
            .zip(&self.divisors)
            .fold(CDivisor::new(), |acc, (n, d)| acc.add_scaled(d, n.dot(m)))
    }

    /// `epsilon(m) = prod_i epsilon(m_i)^(m_i)`.
    pub fn epsilon_of(&self, m: &[i64; 3]) -> RationalFunction {
        self.epsilon
            .iter()
            .zip(m)
            .fold(RationalFunction::one(), |acc, (f, &k)| acc.mul(&f.pow(k)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding data serializes")
    }

    pub fn from_json(text: &str) -> Result<EmbeddingData> {
        let data: EmbeddingData =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if data.torus.len() != 3 {
            return Err(Error::Parse("torus must have three entries".into()));
        }
        if data.torus.iter().any(Zero::is_zero) {
            return Err(Error::InvalidTorus);
        }
        if data.divisors.len() != data.fan.num_rays() {
            return Err(Error::Parse("one divisor per ray required".into()));
        }
        Ok(data)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionWitness {
    /// A point lying on every divisor of a primitive collection.
    SharedPoint { collection: Vec<usize>, point: CurvePoint },
    /// `div(epsilon(m_i))` and `sum_j a_ij D_j` differ at `point`.
    DivisorMismatch { basis: usize, point: CurvePoint, expected: i64, found: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub disjoint_collections: bool,
    pub principal_divisors: bool,
    pub witnesses: Vec<ConditionWitness>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.disjoint_collections && self.principal_divisors
    }
}

/// Every non-face contains a primitive collection, so the empty
/// intersection need only be checked on those; the divisor identity is
/// linear in `m`, so the basis suffices.
pub fn check_theorem_conditions(data: &EmbeddingData) -> ConditionReport {
    let mut witnesses = Vec::new();
    for coll in data.fan.primitive_collections() {
        let mut common: BTreeSet<&CurvePoint> = data.divisors[coll[0]].support().collect();
        for &j in &coll[1..] {
            let s: BTreeSet<&CurvePoint> = data.divisors[j].support().collect();
            common.retain(|p| s.contains(p));
        }
        if let Some(p) = common.first() {
            witnesses.push(ConditionWitness::SharedPoint {
                collection: coll.clone(),
                point: (*p).clone(),
            });
        }
    }
    let disjoint = witnesses.is_empty();
    for i in 0..3 {
        let mut m = [0; 3];
        m[i] = 1;
        let expected = data.character_divisor(&m);
        let found = data.epsilon[i].divisor();
        let points: BTreeSet<CurvePoint> =
            expected.support().chain(found.support()).cloned().collect();
        for p in points
            .into_iter()
            .filter(|p| expected.multiplicity(p) != found.multiplicity(p))
        {
            witnesses.push(ConditionWitness::DivisorMismatch {
                basis: i,
                expected: expected.multiplicity(&p),
                found: found.multiplicity(&p),
                point: p,
            });
        }
    }
    let principal = !witnesses
        .iter()
        .any(|w| matches!(w, ConditionWitness::DivisorMismatch { .. }));
    ConditionReport {
        disjoint_collections: disjoint,
        principal_divisors: principal,
        witnesses,
    }
}

/// Coordinates of the map on the affine chart of one maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pub index: usize,
    /// Global ray indices; position `k` is the chart's `k`-th ray.
    pub cone: [usize; 3],
    /// `duals[k]` pairs to 1 with `cone[k]` and to 0 with the others.
    pub duals: [[i64; 3]; 3],
    /// `coords[k] = epsilon(duals[k])`.
    pub coords: [RationalFunction; 3],
    /// Union of the divisors over rays outside the cone.
    pub excluded: BTreeSet<CurvePoint>,
}

impl ChartMap {
    pub fn contains(&self, p: &CurvePoint) -> bool {
        !self.excluded.contains(p)
    }

    /// Finite excluded points.
    pub fn excluded_finite(&self) -> Vec<Rational> {
        self.excluded.iter().filter_map(|p| p.finite().cloned()).collect()
    }

    /// Chart coordinates at `p`, `None` outside the chart.
    pub fn eval(&self, p: &CurvePoint) -> Option<[Rational; 3]> {
        if !self.contains(p) {
            return None;
        }
        let v: Vec<Rational> = self.coords.iter().map(|f| f.eval(p)).collect::<Option<_>>()?;
        v.try_into().ok()
    }
}

pub fn chart_maps(data: &EmbeddingData) -> Result<Vec<ChartMap>> {
    (0..data.fan.cones.len()).map(|ci| chart_map(data, ci)).collect()
}

pub fn chart_map(data: &EmbeddingData, ci: usize) -> Result<ChartMap> {
    let cone = data.fan.cones[ci];
    let duals = data.fan.cone_duals(ci)?;
    let coords = duals.map(|l| data.epsilon_of(&l));
    let excluded: BTreeSet<CurvePoint> = (0..data.fan.num_rays())
        .filter(|j| !cone.contains(j))
        .flat_map(|j| data.divisors[j].support().cloned())
        .collect();
    for (k, f) in coords.iter().enumerate() {
        let pole = f
            .divisor()
            .iter()
            .find(|(p, m)| *m < 0 && !excluded.contains(*p))
            .map(|(p, _)| p.clone());
        if let Some(p) = pole {
            return Err(Error::IrregularChart { chart: ci, coord: k, point: p.to_string() });
        }
    }
    Ok(ChartMap { index: ci, cone, duals, coords, excluded })
}
