use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::fp::{Zp, P61};
use crate::rational::{denom_lcm, fmt_rational, serde_rational_vec, Rational};

/// Dense univariate polynomial over the rationals, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `x - a`
    pub fn linear(a: &Rational) -> Self {
        Self::new(vec![-a.clone(), Rational::one()])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lc(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().recip();
        self.scale(&inv)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Coefficients reversed: `x^deg p(1/x)`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg0();
        if self.coeffs.len() < d.coeffs.len() {
            return (QPoly::zero(), self.clone());
        }
        let inv = d.lc().recip();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if c.is_zero() {
                continue;
            }
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[k + i] -= &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    /// Scales to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive_int(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = denom_lcm(&self.coeffs);
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        primitive(ints)
    }

    pub fn from_int(c: &[BigInt]) -> Self {
        Self::new(c.iter().map(|x| Rational::from_integer(x.clone())).collect())
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let g = int_gcd(self.primitive_int(), other.primitive_int());
        QPoly::from_int(&g).monic()
    }

    pub fn gcd_all<'a>(polys: impl IntoIterator<Item = &'a QPoly>) -> QPoly {
        polys.into_iter().fold(QPoly::zero(), |g, p| g.gcd(p))
    }

    /// Extended Euclid: `(g, s, t)` with `s a + t b = g`, `g` monic.
    pub fn ext_gcd(a: &QPoly, b: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s2 = &s0 - &(&q * &s1);
            let t2 = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let k = r0.lc().recip();
        (r0.scale(&k), s0.scale(&k), t0.scale(&k))
    }

    pub fn squarefree_part(&self) -> QPoly {
        if self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_exact(&g).expect("gcd divides").monic()
    }

    /// Removes every factor `x - a` for the given roots.
    pub fn strip_roots<'a>(&self, roots: impl IntoIterator<Item = &'a Rational>) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let f = Zp::new(P61);
        let mut c = self.primitive_int();
        for a in roots {
            let (n, d) = (a.numer(), a.denom());
            let dp = f.from_bigint(d);
            let ap = (dp != 0).then(|| f.mul(f.from_bigint(n), f.inv(dp)));
            while c.len() > 1 {
                if let Some(ap) = ap {
                    let cp: Vec<u64> = c.iter().map(|x| f.from_bigint(x)).collect();
                    if f.eval(&cp, ap) != 0 {
                        break;
                    }
                }
                match div_int_linear(&c, n, d) {
                    Some(q) => c = q,
                    None => break,
                }
            }
        }
        QPoly::from_int(&c)
    }

    /// Rational roots by the rational root test. Coefficient sizes above the
    /// trial-division limit yield `None`.
    pub fn rational_roots(&self) -> Option<Vec<Rational>> {
        if self.is_zero() {
            return None;
        }
        let mut c = self.primitive_int();
        let mut roots = Vec::new();
        if c.first().is_some_and(Zero::is_zero) {
            roots.push(Rational::zero());
            let k = c.iter().position(|x| !x.is_zero()).unwrap();
            c.drain(..k);
        }
        if c.len() <= 1 {
            return Some(roots);
        }
        let num_div = small_divisors(&c[0])?;
        let den_div = small_divisors(c.last().unwrap())?;
        let p = QPoly::from_int(&c);
        let mut found = Vec::new();
        for n in &num_div {
            for d in &den_div {
                for sign in [1i64, -1] {
                    let cand = Rational::new(n * BigInt::from(sign), d.clone());
                    if !found.contains(&cand) && p.eval(&cand).is_zero() {
                        found.push(cand);
                    }
                }
            }
        }
        roots.extend(found);
        roots.sort();
        Some(roots)
    }
}

fn primitive(mut c: Vec<BigInt>) -> Vec<BigInt> {
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.is_empty() {
        return c;
    }
    let g = c.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let neg = c.last().unwrap().is_negative();
    for x in c.iter_mut() {
        *x /= &g;
        if neg {
            *x = -&*x;
        }
    }
    c
}

/// Pseudo-remainder `lc(b)^k a mod b` over the integers.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() >= b.len() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - b.len();
        for x in r.iter_mut() {
            *x *= lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &lr * bc;
        }
        r.pop();
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    r
}

/// Primitive PRS gcd of integer polynomials (content ignored).
/// Quotient of the integer polynomial `c` by `d x - n`, if exact.
fn div_int_linear(c: &[BigInt], n: &BigInt, d: &BigInt) -> Option<Vec<BigInt>> {
    // synthetic division from the top: c = (d x - n) q
    let k = c.len() - 1;
    let mut q = vec![BigInt::zero(); k];
    let mut carry = c[k].clone();
    for i in (0..k).rev() {
        let (qi, r) = carry.div_rem(d);
        if !r.is_zero() {
            return None;
        }
        carry = &c[i] + &qi * n;
        q[i] = qi;
    }
    carry.is_zero().then_some(q)
}

fn int_gcd(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    let (mut a, mut b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    while !b.is_empty() {
        if b.len() == 1 {
            return vec![BigInt::one()];
        }
        let r = primitive(prem(&a, &b));
        a = b;
        b = r;
    }
    a
}

const TRIAL_DIVISION_LIMIT: u64 = 1 << 40;

fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let n: u64 = (&n).try_into().ok().filter(|&v| v <= TRIAL_DIVISION_LIMIT)?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    out.sort();
    Some(out)
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl QPoly {
    /// Renders with the given variable name, highest degree first.
    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&fmt_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{mono}", fmt_rational(&abs)));
            }
        }
        out
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({})", self.display("x"))
    }
}

/// Serialized as the coefficient list, lowest degree first.
impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_rational_vec::serialize(&self.coeffs, s)
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_rational_vec::deserialize(d).map(QPoly::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p(c: &[i64]) -> QPoly {
        QPoly::from_ints(c)
    }

    #[test]
    fn divrem_and_gcd() {
        let a = &p(&[-1, 0, 1]) * &p(&[2, 1]); // (x^2-1)(x+2)
        let b = &p(&[1, 1]) * &p(&[-3, 1]); // (x+1)(x-3)
        assert_eq!(a.gcd(&b), p(&[1, 1]));
        let (q, r) = a.divrem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.deg0() < b.deg0());
        assert_eq!(p(&[5]).gcd(&p(&[0, 1])), QPoly::one());
    }

    #[test]
    fn ext_gcd_bezout() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[1, 2, 1]);
        let (g, s, t) = QPoly::ext_gcd(&a, &b);
        assert_eq!(g, p(&[1, 1]));
        assert_eq!(&(&s * &a) + &(&t * &b), g);
    }

    #[test]
    fn squarefree_and_roots() {
        let f = &(&p(&[-1, 1]).pow(3) * &p(&[3, 2])) * &p(&[0, 1]); // (x-1)^3 (2x+3) x
        assert_eq!(f.squarefree_part(), (&(&p(&[-1, 1]) * &p(&[3, 2])) * &p(&[0, 1])).monic());
        assert_eq!(
            f.rational_roots().unwrap(),
            vec![rat(-3, 2), int(0), int(1)]
        );
        assert_eq!(p(&[-2, 0, 1]).rational_roots().unwrap(), vec![]);
    }

    #[test]
    fn strip_and_display() {
        let f = &p(&[-1, 1]).pow(2) * &p(&[1, 0, 1]);
        assert_eq!(f.strip_roots(&[int(1)]), p(&[1, 0, 1]));
        assert_eq!(p(&[1, -3, 0, 2]).display("t"), "2*t^3 - 3*t + 1");
        assert_eq!(QPoly::new(vec![rat(-1, 2)]).display("t"), "-1/2");
    }
}
