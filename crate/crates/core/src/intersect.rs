//! Torus-invariant divisors on a smooth complete toric 3-fold: wall-curve
//! degrees, triple intersection numbers, ampleness, and positive
//! coefficient vectors in the kernel of the ray matrix.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::FunctionField;
use crate::error::{Error, Result};
use crate::fan::{Fan, Wall};
use crate::linalg::lp::{self, LpOutcome, StandardLp};
use crate::linalg::to_i64;
use crate::rational::{denom_lcm, Rational};

/// A torus-invariant divisor `sum_j coeffs[j] V_j`, indexed like the rays.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TDivisor {
    pub coeffs: Vec<i64>,
}

impl TDivisor {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Self { coeffs }
    }

    /// The prime divisor `V_i` on a fan with `r` rays.
    pub fn prime(r: usize, i: usize) -> Self {
        let mut coeffs = vec![0; r];
        coeffs[i] = 1;
        Self { coeffs }
    }

    /// Sum of all prime divisors (the anticanonical divisor).
    pub fn anticanonical(r: usize) -> Self {
        Self { coeffs: vec![1; r] }
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `D + div(e(m))`, i.e. `c_j + <m, n_j>`.
    pub fn shifted(&self, fan: &Fan, m: &[i64; 3]) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&fan.rays)
                .map(|(c, r)| c + r.dot(m))
                .collect(),
        }
    }

    fn check_len(&self, fan: &Fan) -> Result<()> {
        if self.coeffs.len() != fan.num_rays() {
            return Err(Error::Dimension(format!(
                "divisor has {} coefficients, fan has {} rays",
                self.coeffs.len(),
                fan.num_rays()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XiMethod {
    Intersection,
    Kernel,
}

impl std::str::FromStr for XiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(XiMethod::Intersection),
            "kernel" => Ok(XiMethod::Kernel),
            other => Err(Error::Parse(format!("unknown xi method `{other}`"))),
        }
    }
}

/// Strictly positive integer vector with `sum_j xi_j n_j = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiVector {
    pub xi: Vec<i64>,
    pub method: XiMethod,
}

impl XiVector {
    /// Checks `A xi = 0` and positivity against the fan's rays.
    pub fn check(&self, fan: &Fan) -> Result<()> {
        if self.xi.len() != fan.num_rays() {
            return Err(Error::XiMismatch(format!(
                "{} entries for {} rays",
                self.xi.len(),
                fan.num_rays()
            )));
        }
        if let Some(j) = self.xi.iter().position(|&x| x <= 0) {
            return Err(Error::XiMismatch(format!("entry {j} is not positive")));
        }
        let mut sum = [0i64; 3];
        for (x, r) in self.xi.iter().zip(&fan.rays) {
            for (s, n) in sum.iter_mut().zip(r.0) {
                *s += x * n;
            }
        }
        if sum != [0, 0, 0] {
            return Err(Error::XiMismatch(format!(
                "sum of xi_j n_j is {sum:?}, not zero"
            )));
        }
        Ok(())
    }
}

/// Degree of `D` on the torus-invariant curve of a wall:
/// `c_k + c_l + a c_i + b c_j`.
pub fn wall_curve_degree(wall: &Wall, d: &TDivisor) -> i64 {
    let c = &d.coeffs;
    let (i, j) = wall.rays;
    let (k, l) = wall.third;
    let (a, b) = wall.coeffs;
    c[k] + c[l] + a * c[i] + b * c[j]
}

/// Memoized triple intersection numbers `V_i V_j V_k`.
pub struct IntersectionTable<'a> {
    fan: &'a Fan,
    walls: HashMap<(usize, usize), Wall>,
    faces: HashSet<Vec<usize>>,
    memo: HashMap<[usize; 3], i64>,
}

impl<'a> IntersectionTable<'a> {
    /// Requires a smooth complete fan.
    pub fn new(fan: &'a Fan) -> Result<Self> {
        let walls = fan.walls()?.into_iter().map(|w| (w.rays, w)).collect();
        Ok(Self {
            fan,
            walls,
            faces: fan.face_set(),
            memo: HashMap::new(),
        })
    }

    fn is_face(&self, rays: &[usize]) -> bool {
        let mut v = rays.to_vec();
        v.sort_unstable();
        v.dedup();
        self.faces.contains(&v)
    }

    /// `m` with `<m, n_i> = -1` vanishing on the other rays of the first
    /// maximal cone that contains `with`.
    fn shift_character(&self, i: usize, with: &[usize]) -> Result<[i64; 3]> {
        let cone = self
            .fan
            .cone_containing(with)
            .ok_or_else(|| Error::MalformedFan(format!("rays {with:?} lie in no cone")))?;
        let duals = self.fan.cone_duals(cone)?;
        let pos = self.fan.cones[cone].iter().position(|&x| x == i).unwrap();
        Ok(duals[pos].map(|x| -x))
    }

    pub fn triple(&mut self, i: usize, j: usize, k: usize) -> Result<i64> {
        let mut key = [i, j, k];
        key.sort_unstable();
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let [a, b, c] = key;
        let v = if a != b && b != c {
            if self.is_face(&key) {
                1
            } else if let Some(pair) = [(a, b, c), (a, c, b), (b, c, a)]
                .into_iter()
                .find(|(p, q, _)| self.walls.contains_key(&(*p, *q)))
            {
                let wall = self.walls[&(pair.0, pair.1)];
                wall_curve_degree(&wall, &TDivisor::prime(self.fan.num_rays(), pair.2))
            } else {
                0
            }
        } else {
            // a repeated index: replace one copy of V_i by V_i + div(e(m))
            let (rep, other) = if a == b { (a, c) } else { (b, a) };
            if !self.is_face(&[rep, other]) {
                0
            } else {
                let with: Vec<usize> = if rep == other { vec![rep] } else { vec![rep, other] };
                let m = self.shift_character(rep, &with)?;
                let mut total = 0;
                for rho in 0..self.fan.num_rays() {
                    if rho == rep {
                        continue;
                    }
                    let coef = self.fan.rays[rho].dot(&m);
                    if coef != 0 {
                        total += coef * self.triple(rho, rep, other)?;
                    }
                }
                total
            }
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Intersection number of three divisors, expanded multilinearly.
    pub fn product(&mut self, d1: &TDivisor, d2: &TDivisor, d3: &TDivisor) -> Result<i64> {
        for d in [d1, d2, d3] {
            d.check_len(self.fan)?;
        }
        let nz = |d: &TDivisor| -> Vec<(usize, i64)> {
            d.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| (i, *c))
                .collect()
        };
        let (a, b, c) = (nz(d1), nz(d2), nz(d3));
        let mut total = 0;
        for &(i, x) in &a {
            for &(j, y) in &b {
                for &(k, z) in &c {
                    total += x * y * z * self.triple(i, j, k)?;
                }
            }
        }
        Ok(total)
    }
}

pub fn triple_intersection(fan: &Fan, i: usize, j: usize, k: usize) -> Result<i64> {
    IntersectionTable::new(fan)?.triple(i, j, k)
}

/// Strict convexity of the support function. For each maximal cone `s`,
/// `m_s` solves `<m_s, n_rho> = -c_rho` on the rays of `s`; the divisor is
/// ample iff `<m_s, n_l> > -c_l` across every wall.
pub fn is_ample(fan: &Fan, d: &TDivisor) -> Result<bool> {
    d.check_len(fan)?;
    let walls = fan.walls()?;
    let mut m_cone = Vec::with_capacity(fan.cones.len());
    for ci in 0..fan.cones.len() {
        let duals = fan.cone_duals(ci)?;
        let mut m = [0i64; 3];
        for (pos, &rho) in fan.cones[ci].iter().enumerate() {
            for c in 0..3 {
                m[c] -= d.coeffs[rho] * duals[pos][c];
            }
        }
        m_cone.push(m);
    }
    Ok(walls.iter().all(|w| {
        let (s, s2) = w.cones;
        let (k, l) = w.third;
        fan.rays[l].dot(&m_cone[s]) > -d.coeffs[l] && fan.rays[k].dot(&m_cone[s2]) > -d.coeffs[k]
    }))
}

fn scale_to_integers(x: &[Rational]) -> Result<Vec<i64>> {
    let l = denom_lcm(x);
    x.iter()
        .map(|q| {
            let v = q * Rational::from_integer(l.clone());
            to_i64(v.numer())
        })
        .collect()
}

/// An ample divisor vanishing on the rays of the first maximal cone, with
/// minimal coefficient sum subject to degree >= 1 on every wall curve.
pub fn find_ample(fan: &Fan) -> Result<TDivisor> {
    let walls = fan.walls()?;
    let r = fan.num_rays();
    let gauge = fan.cones.first().ok_or(Error::NotProjective)?;
    let free: Vec<usize> = (0..r).filter(|j| !gauge.contains(j)).collect();
    let n = free.len() + walls.len();
    let mut a = Vec::with_capacity(walls.len());
    for (w_idx, w) in walls.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        for (col, &rho) in free.iter().enumerate() {
            let deg = wall_curve_degree(w, &TDivisor::prime(r, rho));
            row[col] = Rational::from_integer(BigInt::from(deg));
        }
        row[free.len() + w_idx] = -Rational::one();
        a.push(row);
    }
    let mut c = vec![Rational::zero(); n];
    for x in c.iter_mut().take(free.len()) {
        *x = Rational::one();
    }
    let lp = StandardLp {
        a,
        b: vec![Rational::one(); walls.len()],
        c,
    };
    match lp::solve(&lp) {
        LpOutcome::Optimal { x, .. } => {
            let ints = scale_to_integers(&x[..free.len()])?;
            let mut coeffs = vec![0; r];
            for (&rho, v) in free.iter().zip(ints) {
                coeffs[rho] = v;
            }
            Ok(TDivisor::new(coeffs))
        }
        LpOutcome::Infeasible | LpOutcome::Unbounded => Err(Error::NotProjective),
    }
}

/// Positive integer solution of `sum_j xi_j n_j = 0`, scaled so that every
/// entry exceeds twice the genus of the curve.
pub fn xi_vector(
    fan: &Fan,
    h: &TDivisor,
    method: XiMethod,
    curve: &impl FunctionField,
) -> Result<XiVector> {
    let raw = match method {
        XiMethod::Intersection => {
            if !is_ample(fan, h)? {
                return Err(Error::NotAmple);
            }
            let mut table = IntersectionTable::new(fan)?;
            (0..fan.num_rays())
                .map(|j| table.product(h, h, &TDivisor::prime(fan.num_rays(), j)))
                .collect::<Result<Vec<i64>>>()?
        }
        XiMethod::Kernel => positive_kernel_vector(fan)?,
    };
    if raw.iter().any(|&x| x <= 0) {
        return Err(Error::NoPositiveKernel);
    }
    let twice_genus = 2 * i64::from(curve.genus());
    let min = *raw.iter().min().ok_or(Error::NoPositiveKernel)?;
    let scale = if min > twice_genus { 1 } else { twice_genus / min + 1 };
    let xi = XiVector {
        xi: raw.iter().map(|x| x * scale).collect(),
        method,
    };
    xi.check(fan)?;
    Ok(xi)
}

/// Minimizes `sum xi_j` over rational kernel vectors with every `xi_j >= 1`,
/// then clears denominators.
fn positive_kernel_vector(fan: &Fan) -> Result<Vec<i64>> {
    let r = fan.num_rays();
    // xi = 1 + y with y >= 0:  A y = -A 1
    let mut a = vec![vec![Rational::zero(); r]; 3];
    let mut b = vec![Rational::zero(); 3];
    for (j, ray) in fan.rays.iter().enumerate() {
        for i in 0..3 {
            a[i][j] = Rational::from_integer(BigInt::from(ray.0[i]));
            b[i] -= &a[i][j];
        }
    }
    let lp = StandardLp {
        a,
        b,
        c: vec![Rational::one(); r],
    };
    match lp::solve(&lp) {
        LpOutcome::Optimal { x, .. } => {
            let xi: Vec<Rational> = x.iter().map(|y| y + Rational::one()).collect();
            let v = scale_to_integers(&xi)?;
            debug_assert!(v.iter().all(|x| *x > 0));
            Ok(v)
        }
        _ => Err(Error::NoPositiveKernel),
    }
}
