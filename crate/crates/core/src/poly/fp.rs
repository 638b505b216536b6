//! Arithmetic modulo word-sized primes.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// The Mersenne prime 2^61 - 1.
pub const P61: u64 = (1 << 61) - 1;

/// The field of integers modulo a prime below 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zp {
    pub p: u64,
}

impl Zp {
    pub fn new(p: u64) -> Self {
        debug_assert!(is_prime(p) && p < 1 << 63);
        Self { p }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero mod p");
        self.pow(a, self.p - 2)
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let mut r = x % &p;
        if r.is_negative() {
            r += p;
        }
        r.to_u64().expect("reduced residue fits")
    }

    pub fn eval(&self, c: &[u64], x: u64) -> u64 {
        c.iter().rev().fold(0, |acc, &k| self.add(self.mul(acc, x), k))
    }

    /// Determinant by Gaussian elimination, consuming the row-major matrix.
    pub fn det(&self, n: usize, mut a: Vec<u64>) -> u64 {
        let mut det = 1;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = self.sub(0, det);
            }
            let d = a[col * n + col];
            det = self.mul(det, d);
            let inv = self.inv(d);
            for r in col + 1..n {
                let f = self.mul(a[r * n + col], inv);
                if f == 0 {
                    continue;
                }
                for j in col..n {
                    let t = self.mul(f, a[col * n + j]);
                    a[r * n + j] = self.sub(a[r * n + j], t);
                }
            }
        }
        det
    }

    /// Coefficients of the polynomial of degree `< ys.len()` through
    /// `(k, ys[k])`.
    pub fn interpolate_consecutive(&self, ys: &[u64]) -> Vec<u64> {
        let n = ys.len();
        // Newton divided differences on nodes 0, 1, ..., n-1
        let mut c = ys.to_vec();
        for j in 1..n {
            let inv_j = self.inv(j as u64 % self.p);
            for i in (j..n).rev() {
                c[i] = self.mul(self.sub(c[i], c[i - 1]), inv_j);
            }
        }
        let mut out = vec![0u64; n];
        for k in (0..n).rev() {
            // out = out * (x - k) + c[k]
            let mut next = vec![0u64; n];
            for i in 0..n {
                if out[i] == 0 {
                    continue;
                }
                if i + 1 < n {
                    next[i + 1] = self.add(next[i + 1], out[i]);
                }
                next[i] = self.sub(next[i], self.mul(out[i], k as u64));
            }
            next[0] = self.add(next[0], c[k]);
            out = next;
        }
        out
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'bases: for &b in &BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primes below 2^61 in decreasing order, starting with 2^61 - 1.
pub fn primes() -> impl Iterator<Item = u64> {
    (0..).map(|k| P61 - 2 * k).filter(|&n| is_prime(n))
}

/// Dense polynomial mod `p`, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub field: Zp,
    pub c: Vec<u64>,
}

impl FpPoly {
    pub fn new(field: Zp, mut c: Vec<u64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { field, c }
    }

    pub fn from_ints(field: Zp, c: &[BigInt]) -> Self {
        Self::new(field, c.iter().map(|x| field.from_bigint(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        let f = self.field;
        let dd = d.c.len() - 1;
        let inv_lc = f.inv(d.c[dd]);
        let mut r = self.c.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let q = f.mul(*r.last().unwrap(), inv_lc);
            for (i, &dc) in d.c.iter().enumerate() {
                r[k + i] = f.sub(r[k + i], f.mul(q, dc));
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        FpPoly::new(f, r)
    }

    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }
}

/// Incremental Chinese remaindering of integer vectors.
pub struct Crt {
    modulus: BigInt,
    values: Vec<BigInt>,
}

impl Crt {
    pub fn new(len: usize) -> Self {
        Self { modulus: BigInt::from(1), values: vec![BigInt::zero(); len] }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn add(&mut self, field: Zp, residues: &[u64]) {
        let m_mod_p = field.from_bigint(&self.modulus);
        let inv = field.inv(m_mod_p);
        for (v, &r) in self.values.iter_mut().zip(residues) {
            let cur = field.from_bigint(v);
            let t = field.mul(field.sub(r, cur), inv);
            *v += &self.modulus * BigInt::from(t);
        }
        self.modulus *= BigInt::from(field.p);
    }

    /// Values in the symmetric range around zero.
    pub fn symmetric(&self) -> Vec<BigInt> {
        let half = &self.modulus / 2;
        self.values
            .iter()
            .map(|v| if *v > half { v - &self.modulus } else { v.clone() })
            .collect()
    }
}
