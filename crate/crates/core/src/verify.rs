//! Chart-wise certification that the map is a closed immersion.
//!
//! On a chart with coordinates `p_i = P_i / Q_i`, a collision between finite
//! points `s != u` is a common zero of
//! `G_i(s, u) = (P_i(s) Q_i(u) - P_i(u) Q_i(s)) / (s - u)`. The `u`-resultants
//! of pairs of the `G_i` vanish at the `s`-coordinate of every common zero.
//! Roots at excluded points are discarded, and the remaining gcd is certified
//! constant through a modular image, using the fact that a prime not
//! dividing the leading coefficient cannot lower the degree of a gcd. A
//! nonconstant remainder is resolved exactly over each factor of its
//! squarefree part. Pairs involving infinity are handled separately, since
//! sampled divisors keep infinity inside every chart.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, PointValue, RationalFunction};
use crate::embed::{chart_maps, ChartMap, EmbeddingData};
use crate::error::{Error, Result};
use crate::poly::fp::{FpPoly, Zp, P61};
use crate::poly::tower::{self, KPoly};
use crate::poly::{BiPoly, QPoly};
use crate::rational::Rational;

pub const DEFAULT_DEGREE_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest resultant degree attempted.
    pub degree_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { degree_cap: DEFAULT_DEGREE_CAP }
    }
}

/// Exact evidence for a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Distinct domain points with equal images.
    Collision { s: CurvePoint, u: CurvePoint },
    /// `s` a root of `s_min`, `u` a root of `u_factor`, whose coefficients
    /// are polynomials in `s` modulo `s_min`.
    AlgebraicCollision { s_min: QPoly, u_factor: Vec<QPoly> },
    /// `s` a root of `s_min`, colliding with the point at infinity.
    AlgebraicCollisionAtInfinity { s_min: QPoly },
    /// A domain point where every coordinate derivative vanishes.
    CriticalPoint { t: CurvePoint },
    /// Every root of `min_poly` is a critical point.
    AlgebraicCriticalPoint { min_poly: QPoly },
    /// The zero order of a chart coordinate disagrees with the divisor over
    /// its ray, or is not 1.
    Pullback {
        chart: usize,
        ray: usize,
        point: CurvePoint,
        divisor_multiplicity: i64,
        zero_order: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub witnesses: Vec<Witness>,
}

impl Verdict {
    fn from_witnesses(witnesses: Vec<Witness>) -> Self {
        Self { pass: witnesses.is_empty(), witnesses }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub chart: usize,
    pub cone: [usize; 3],
    pub injective: bool,
    pub immersive: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub embedding: bool,
    pub pullback: Verdict,
    pub charts: Vec<ChartRecord>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// `(injective, immersive)` per chart followed by the pullback verdict.
    pub fn verdicts(&self) -> Vec<bool> {
        let mut v: Vec<bool> = self
            .charts
            .iter()
            .flat_map(|c| [c.injective, c.immersive])
            .collect();
        v.push(self.pullback.pass);
        v.push(self.embedding);
        v
    }
}

struct Coords {
    num: Vec<QPoly>,
    den: Vec<QPoly>,
    excluded: Vec<Rational>,
    infinity_inside: bool,
}

impl Coords {
    fn of(chart: &ChartMap) -> Self {
        Self {
            num: chart.coords.iter().map(RationalFunction::numerator).collect(),
            den: chart.coords.iter().map(RationalFunction::denominator).collect(),
            excluded: chart.excluded_finite(),
            infinity_inside: chart.contains(&CurvePoint::Infinity),
        }
    }

    fn avoids_excluded(&self, m: &QPoly) -> bool {
        self.excluded.iter().all(|b| !m.eval(b).is_zero())
    }
}

/// Decides injectivity of the chart coordinates on the chart's domain.
pub fn chart_injective(chart: &ChartMap, opts: &VerifyOptions) -> Result<Verdict> {
    let c = Coords::of(chart);
    let mut witnesses = Vec::new();
    let gs: Vec<BiPoly> = c
        .num
        .iter()
        .zip(&c.den)
        .map(|(p, q)| BiPoly::divided_difference(p, q))
        .filter(|g| !g.is_zero())
        .collect();
    if gs.is_empty() {
        witnesses.push(constant_map_witness(chart));
    } else if let Some(w) = finite_collision(chart.index, &c, gs, opts)? {
        witnesses.push(w);
    }
    if c.infinity_inside {
        if let Some(w) = infinity_collision(chart, &c) {
            witnesses.push(w);
        }
    }
    for w in &witnesses {
        assert!(recheck(chart, w), "collision witness failed re-evaluation: {w:?}");
    }
    Ok(Verdict::from_witnesses(witnesses))
}

fn constant_map_witness(chart: &ChartMap) -> Witness {
    let mut pts = (0i64..).map(|k| CurvePoint::Finite(Rational::from_integer(k.into())));
    let s = pts.by_ref().find(|p| chart.contains(p)).unwrap();
    let u = pts.find(|p| chart.contains(p)).unwrap();
    Witness::Collision { s, u }
}

fn finite_collision(
    chart: usize,
    c: &Coords,
    gs: Vec<BiPoly>,
    opts: &VerifyOptions,
) -> Result<Option<Witness>> {
    if gs.iter().any(BiPoly::is_nonzero_constant) {
        return Ok(None);
    }
    let mut work = gs;
    let mut rs = eliminate(chart, &work, 0, opts)?;
    if rs.is_none() {
        // positive-dimensional common part
        let g = work.iter().skip(1).fold(work[0].clone(), |g, x| g.gcd(x));
        let genuine = g.strip_lines(&c.excluded);
        if !genuine.is_nonzero_constant() {
            return curve_witness(&genuine, c).map(Some);
        }
        work = work.iter().map(|x| x.div_exact(&g).expect("gcd divides")).collect();
        if work.iter().any(BiPoly::is_nonzero_constant) {
            return Ok(None);
        }
        for k in 1..=16 {
            rs = eliminate(chart, &work, k, opts)?;
            if rs.is_some() {
                break;
            }
        }
    }
    let rs = rs.ok_or_else(|| {
        Error::Undecided(format!("chart {chart}: no coprime elimination pair found"))
    })?;
    let rs: Vec<QPoly> = rs.iter().map(|r| r.strip_roots(&c.excluded)).collect();
    if modular_gcd_is_constant(&rs) {
        return Ok(None);
    }
    let h = QPoly::gcd_all(&rs).strip_roots(&c.excluded);
    if h.deg0() == 0 {
        return Ok(None);
    }
    let m = h.squarefree_part();
    let polys: Vec<KPoly> = work.iter().map(|g| g.coeffs().to_vec()).collect();
    let mut roots: Vec<QPoly> = c.excluded.iter().map(|b| QPoly::constant(b.clone())).collect();
    roots.push(QPoly::x());
    let branches = tower::strip_roots(tower::gcd(&m, &polys), &roots);
    Ok(branches
        .into_iter()
        .find(|b| b.value.len() >= 2)
        .map(|b| branch_witness(b.modulus, b.value)))
}

/// Polynomials in the span of `work` used for elimination at attempt `k`.
fn combination(work: &[BiPoly], k: usize) -> Vec<(BiPoly, BiPoly)> {
    let n = work.len();
    if k == 0 {
        return (1..n).map(|j| (work[0].clone(), work[j].clone())).collect();
    }
    let kq = Rational::from_integer(k.into());
    let span = |start: usize| {
        (0..n).fold(BiPoly::default(), |acc, i| {
            let w = &work[(start + i) % n];
            acc.add(&w.scale(&num_traits::pow(kq.clone(), i)))
        })
    };
    let x = span(0);
    if n == 2 {
        return vec![(x, work[1].clone())];
    }
    (1..n).map(|j| (x.clone(), span(j))).collect()
}

/// Nonzero `u`-resultants for attempt `k`, or `None` if one vanishes.
fn eliminate(
    chart: usize,
    work: &[BiPoly],
    k: usize,
    opts: &VerifyOptions,
) -> Result<Option<Vec<QPoly>>> {
    if work.len() == 1 {
        return Ok(None);
    }
    let mut out = Vec::new();
    for (a, b) in combination(work, k) {
        let degree = a.resultant_degree_bound(&b);
        if degree > opts.degree_cap {
            return Err(Error::DegreeOverflow { chart, degree, cap: opts.degree_cap });
        }
        let r = a.resultant_u(&b);
        if r.is_zero() {
            return Ok(None);
        }
        out.push(r);
    }
    Ok(Some(out))
}

fn modular_gcd_is_constant(rs: &[QPoly]) -> bool {
    let ints: Vec<_> = rs.iter().map(QPoly::primitive_int).collect();
    let f = Zp::new(P61);
    if f.from_bigint(ints[0].last().unwrap()) == 0 {
        return false;
    }
    let g = ints
        .iter()
        .map(|c| FpPoly::from_ints(f, c))
        .reduce(|a, b| a.gcd(&b))
        .unwrap();
    g.degree() == Some(0)
}

fn branch_witness(m: QPoly, c: KPoly) -> Witness {
    // `c` is free of excluded and diagonal roots on the whole branch, so any
    // rational root at a rational specialisation of `s` is a genuine pair
    for s0 in m.rational_roots().unwrap_or_default() {
        let cu = QPoly::new(c.iter().map(|x| x.eval(&s0)).collect());
        if let Some(u0) = cu.rational_roots().and_then(|r| r.into_iter().next()) {
            return Witness::Collision {
                s: CurvePoint::Finite(s0),
                u: CurvePoint::Finite(u0),
            };
        }
    }
    Witness::AlgebraicCollision { s_min: m, u_factor: c }
}

/// A point on a common curve of collisions, found by slicing at rational `s`.
fn curve_witness(g: &BiPoly, c: &Coords) -> Result<Witness> {
    let candidates = (1i64..400).map(|k| {
        let v = if k % 2 == 0 { -(k / 2) } else { k / 2 };
        Rational::from_integer(v.into())
    });
    for s0 in candidates {
        if c.excluded.contains(&s0) {
            continue;
        }
        let q = g.eval_s(&s0);
        if q.is_zero() {
            continue;
        }
        let mut avoid = c.excluded.clone();
        avoid.push(s0.clone());
        let q = q.strip_roots(&avoid);
        if q.deg0() == 0 {
            continue;
        }
        let m = QPoly::linear(&s0);
        let cu: KPoly = q.monic().coeffs().iter().map(|x| QPoly::constant(x.clone())).collect();
        return Ok(branch_witness(m, cu));
    }
    Err(Error::Undecided("no slice of the common curve meets the domain".into()))
}

fn value_at_infinity(f: &RationalFunction) -> Rational {
    f.eval(&CurvePoint::Infinity).expect("chart coordinate regular at infinity")
}

fn infinity_collision(chart: &ChartMap, c: &Coords) -> Option<Witness> {
    let es: Vec<QPoly> = chart
        .coords
        .iter()
        .zip(c.num.iter().zip(&c.den))
        .map(|(f, (p, q))| p - &q.scale(&value_at_infinity(f)))
        .collect();
    let h = QPoly::gcd_all(&es).strip_roots(&c.excluded);
    if h.is_zero() {
        // every coordinate is constant
        return Some(Witness::Collision {
            s: constant_map_witness(chart).into_pair().0,
            u: CurvePoint::Infinity,
        });
    }
    if h.deg0() == 0 {
        return None;
    }
    let m = h.squarefree_part();
    match m.rational_roots().and_then(|r| r.into_iter().next()) {
        Some(s0) => Some(Witness::Collision {
            s: CurvePoint::Finite(s0),
            u: CurvePoint::Infinity,
        }),
        None => Some(Witness::AlgebraicCollisionAtInfinity { s_min: m }),
    }
}

impl Witness {
    fn into_pair(self) -> (CurvePoint, CurvePoint) {
        match self {
            Witness::Collision { s, u } => (s, u),
            _ => unreachable!("not a collision"),
        }
    }
}

/// Decides whether the derivative vector vanishes somewhere on the domain.
pub fn chart_immersive(chart: &ChartMap) -> Verdict {
    let c = Coords::of(chart);
    let ws: Vec<QPoly> = c
        .num
        .iter()
        .zip(&c.den)
        .map(|(p, q)| &(&p.derivative() * q) - &(p * &q.derivative()))
        .collect();
    let mut witnesses = Vec::new();
    let h = QPoly::gcd_all(&ws).strip_roots(&c.excluded);
    if h.is_zero() {
        witnesses.push(Witness::CriticalPoint { t: constant_map_witness(chart).into_pair().0 });
    } else if h.deg0() > 0 {
        let m = h.squarefree_part();
        let rational = m.rational_roots().unwrap_or_default();
        match rational.into_iter().next() {
            Some(t) => witnesses.push(Witness::CriticalPoint { t: CurvePoint::Finite(t) }),
            None => witnesses.push(Witness::AlgebraicCriticalPoint { min_poly: m }),
        }
    }
    if c.infinity_inside {
        let flat = chart.coords.iter().all(|f| {
            matches!(
                f.evaluate_with_derivative(&CurvePoint::Infinity),
                PointValue::Regular { derivative, .. } if derivative.is_zero()
            )
        });
        if flat {
            witnesses.push(Witness::CriticalPoint { t: CurvePoint::Infinity });
        }
    }
    for w in &witnesses {
        assert!(recheck(chart, w), "critical witness failed re-evaluation: {w:?}");
    }
    Verdict::from_witnesses(witnesses)
}

/// Re-evaluates a chart witness directly, independent of elimination.
pub fn recheck(chart: &ChartMap, w: &Witness) -> bool {
    let c = Coords::of(chart);
    match w {
        Witness::Collision { s, u } => {
            s != u
                && matches!((chart.eval(s), chart.eval(u)), (Some(a), Some(b)) if a == b)
        }
        Witness::AlgebraicCollision { s_min, u_factor } => {
            if s_min.deg0() == 0 || u_factor.len() < 2 || !c.avoids_excluded(s_min) {
                return false;
            }
            let monic = u_factor.last().is_some_and(|l| l == &QPoly::one());
            // u avoids the excluded points and the diagonal
            let outside = c
                .excluded
                .iter()
                .map(|b| QPoly::constant(b.clone()))
                .chain([QPoly::x()])
                .all(|x| QPoly::gcd(&tower::eval(s_min, u_factor, &x), s_min).deg0() == 0
                    && !tower::eval(s_min, u_factor, &x).is_zero());
            let vanish = c.num.iter().zip(&c.den).all(|(p, q)| {
                let n = BiPoly::new(vec![p.clone()])
                    .mul(&poly_in_u(q))
                    .sub(&BiPoly::new(vec![q.clone()]).mul(&poly_in_u(p)));
                tower::rem_monic(s_min, n.coeffs(), u_factor).is_empty()
            });
            monic && outside && vanish
        }
        Witness::AlgebraicCollisionAtInfinity { s_min } => {
            c.infinity_inside
                && s_min.deg0() > 0
                && c.avoids_excluded(s_min)
                && chart.coords.iter().zip(c.num.iter().zip(&c.den)).all(|(f, (p, q))| {
                    (p - &q.scale(&value_at_infinity(f))).rem(s_min).is_zero()
                })
        }
        Witness::CriticalPoint { t } => {
            chart.contains(t)
                && chart.coords.iter().all(|f| {
                    matches!(
                        f.evaluate_with_derivative(t),
                        PointValue::Regular { derivative, .. } if derivative.is_zero()
                    )
                })
        }
        Witness::AlgebraicCriticalPoint { min_poly } => {
            min_poly.deg0() > 0
                && c.avoids_excluded(min_poly)
                && c.num.iter().zip(&c.den).all(|(p, q)| {
                    (&(&p.derivative() * q) - &(p * &q.derivative())).rem(min_poly).is_zero()
                })
        }
        Witness::Pullback { chart: ci, ray, point, divisor_multiplicity, zero_order } => {
            *ci == chart.index
                && chart.cone.contains(ray)
                && chart.contains(point)
                && (divisor_multiplicity != zero_order || *zero_order != 1)
        }
    }
}

/// `q(u)` as a bivariate polynomial constant in `s`.
fn poly_in_u(q: &QPoly) -> BiPoly {
    BiPoly::new(q.coeffs().iter().map(|x| QPoly::constant(x.clone())).collect())
}

/// On each chart, the zero divisor of the coordinate dual to a ray equals
/// the divisor over that ray, and is reduced.
pub fn pullback_check(data: &EmbeddingData, charts: &[ChartMap]) -> Verdict {
    let mut witnesses = Vec::new();
    for chart in charts {
        for (k, &ray) in chart.cone.iter().enumerate() {
            let zeros = chart.coords[k].divisor();
            let expected = &data.divisors[ray];
            let points: BTreeSet<&CurvePoint> = zeros
                .iter()
                .filter(|(_, m)| *m > 0)
                .map(|(p, _)| p)
                .chain(expected.support())
                .filter(|p| chart.contains(p))
                .collect();
            for p in points {
                let dm = expected.multiplicity(p);
                let zo = zeros.multiplicity(p).max(0);
                if dm != zo || zo != 1 {
                    witnesses.push(Witness::Pullback {
                        chart: chart.index,
                        ray,
                        point: p.clone(),
                        divisor_multiplicity: dm,
                        zero_order: zo,
                    });
                }
            }
        }
    }
    Verdict::from_witnesses(witnesses)
}

/// Runs every chart check and the pullback check. Charts are processed in
/// parallel and merged in chart order.
pub fn certify(data: &EmbeddingData, opts: &VerifyOptions) -> Result<Certificate> {
    let charts = chart_maps(data)?;
    let records = charts
        .par_iter()
        .map(|chart| {
            let inj = chart_injective(chart, opts)?;
            let imm = chart_immersive(chart);
            Ok(ChartRecord {
                chart: chart.index,
                cone: chart.cone,
                injective: inj.pass,
                immersive: imm.pass,
                witnesses: inj.witnesses.into_iter().chain(imm.witnesses).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pullback = pullback_check(data, &charts);
    let embedding = pullback.pass && records.iter().all(|r| r.injective && r.immersive);
    Ok(Certificate { embedding, pullback, charts: records })
}

fn random_point(rng: &mut ChaCha8Rng) -> CurvePoint {
    let n: i64 = rng.random_range(-60..=60);
    let d: i64 = rng.random_range(1..=7);
    CurvePoint::Finite(Rational::new(n.into(), d.into()))
}

/// Samples distinct point pairs and compares their images in every chart
/// containing both. Returns a colliding pair if one is found.
pub fn sample_collisions(
    charts: &[ChartMap],
    pairs: usize,
    seed: u64,
) -> Option<(CurvePoint, CurvePoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: HashMap<CurvePoint, Vec<Option<[Rational; 3]>>> = HashMap::new();
    let mut image = |p: &CurvePoint| -> Vec<Option<[Rational; 3]>> {
        images.entry(p.clone()).or_insert_with(|| charts.iter().map(|c| c.eval(p)).collect()).clone()
    };
    let mut done = 0;
    while done < pairs {
        let s = random_point(&mut rng);
        let u = if done % 10 == 0 { CurvePoint::Infinity } else { random_point(&mut rng) };
        if s == u {
            continue;
        }
        done += 1;
        let (is, iu) = (image(&s), image(&u));
        if is.iter().zip(&iu).any(|(a, b)| a.is_some() && a == b) {
            return Some((s, u));
        }
    }
    None
}

/// Every point lies in at least one chart.
pub fn charts_cover(charts: &[ChartMap], points: &[CurvePoint]) -> bool {
    points.iter().all(|p| charts.iter().any(|c| c.eval(p).is_some()))
}

/// Checks that the coordinates of every pair of charts are related by the
/// Laurent monomial `p'_k = prod_j p_j^<l'_k, n_j>`, both as functions and
/// by evaluation at sampled points away from every divisor.
pub fn gluing_consistent(data: &EmbeddingData, charts: &[ChartMap], points: usize, seed: u64) -> bool {
    let transition = |from: &ChartMap, to: &ChartMap, k: usize| -> Vec<i64> {
        from.cone.iter().map(|&j| data.fan.rays[j].dot(&to.duals[k])).collect()
    };
    for a in charts {
        for b in charts {
            for k in 0..3 {
                let e = transition(a, b, k);
                let f = a
                    .coords
                    .iter()
                    .zip(&e)
                    .fold(RationalFunction::one(), |acc, (p, &x)| acc.mul(&p.pow(x)));
                if f != b.coords[k] {
                    return false;
                }
            }
        }
    }
    let support: BTreeSet<&CurvePoint> = data.divisors.iter().flat_map(|d| d.support()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < points {
        let t = random_point(&mut rng);
        if support.contains(&t) {
            continue;
        }
        done += 1;
        let values: Vec<[Rational; 3]> = charts
            .iter()
            .map(|c| c.eval(&t).expect("point away from all divisors"))
            .collect();
        for (a, va) in charts.iter().zip(&values) {
            for (b, vb) in charts.iter().zip(&values) {
                for (k, target) in vb.iter().enumerate() {
                    let e = transition(a, b, k);
                    let mut prod = Rational::one();
                    for (v, &x) in va.iter().zip(&e) {
                        prod *= if x >= 0 {
                            num_traits::pow(v.clone(), x as usize)
                        } else {
                            num_traits::pow(v.recip(), x.unsigned_abs() as usize)
                        };
                    }
                    if &prod != target {
                        return false;
                    }
                }
            }
        }
    }
    true
}
