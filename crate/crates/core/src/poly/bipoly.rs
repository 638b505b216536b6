use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::QPoly;
use super::fp::{primes, Crt, Zp};
use crate::rational::{denom_lcm, Rational};

/// Polynomial in `s, u` stored as coefficients in `u` over `Q[s]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BiPoly {
    c: Vec<QPoly>,
}

impl BiPoly {
    pub fn new(mut c: Vec<QPoly>) -> Self {
        while c.last().is_some_and(QPoly::is_zero) {
            c.pop();
        }
        Self { c }
    }

    pub fn coeffs(&self) -> &[QPoly] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg_u(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn deg_s(&self) -> usize {
        self.c.iter().map(QPoly::deg0).max().unwrap_or(0)
    }

    /// Nonzero and free of both variables.
    pub fn is_nonzero_constant(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_constant()
    }

    /// `(P(s) Q(u) - P(u) Q(s)) / (s - u)`.
    pub fn divided_difference(p: &QPoly, q: &QPoly) -> Self {
        let n = p.coeffs().len().max(q.coeffs().len());
        let mut grid = vec![vec![Rational::zero(); n.max(1)]; n.max(1)];
        for i in 0..n {
            for j in 0..i {
                let cij = p.coeff(i) * q.coeff(j) - p.coeff(j) * q.coeff(i);
                if cij.is_zero() {
                    continue;
                }
                // (s^i u^j - s^j u^i) / (s - u) = sum_k s^(j+k) u^(i-1-k)
                for k in 0..(i - j) {
                    grid[j + k][i - 1 - k] += &cij;
                }
            }
        }
        Self::from_grid(grid)
    }

    /// `grid[a][b]` is the coefficient of `s^a u^b`.
    fn from_grid(grid: Vec<Vec<Rational>>) -> Self {
        let nu = grid.first().map_or(0, Vec::len);
        let c = (0..nu)
            .map(|b| QPoly::new(grid.iter().map(|row| row[b].clone()).collect()))
            .collect();
        Self::new(c)
    }

    pub fn eval_s(&self, s: &Rational) -> QPoly {
        QPoly::new(self.c.iter().map(|p| p.eval(s)).collect())
    }

    pub fn eval_u(&self, u: &Rational) -> QPoly {
        let mut acc = QPoly::zero();
        for p in self.c.iter().rev() {
            acc = &acc.scale(u) + p;
        }
        acc
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.c.iter().map(|p| p.scale(k)).collect())
    }

    pub fn add(&self, o: &BiPoly) -> Self {
        let n = self.c.len().max(o.c.len());
        let z = QPoly::zero();
        Self::new(
            (0..n)
                .map(|i| self.c.get(i).unwrap_or(&z) + o.c.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, o: &BiPoly) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn mul(&self, o: &BiPoly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::default();
        }
        let mut c = vec![QPoly::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Self::new(c)
    }

    /// Gcd of the `u`-coefficients, monic in `s`.
    pub fn content(&self) -> QPoly {
        QPoly::gcd_all(&self.c)
    }

    fn div_content(&self, g: &QPoly) -> Self {
        Self::new(
            self.c
                .iter()
                .map(|p| p.div_exact(g).expect("content divides"))
                .collect(),
        )
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.div_content(&self.content())
    }

    /// Pseudo-remainder in `u`.
    fn prem(&self, b: &BiPoly) -> BiPoly {
        let db = b.deg_u();
        let lb = b.c[db].clone();
        let mut r = self.c.clone();
        while r.len() > db && !r.is_empty() {
            let lr = r.last().unwrap().clone();
            let shift = r.len() - 1 - db;
            for x in r.iter_mut() {
                *x = &*x * &lb;
            }
            for (i, bc) in b.c.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &(&lr * bc);
            }
            r.pop();
            while r.last().is_some_and(QPoly::is_zero) {
                r.pop();
            }
        }
        BiPoly::new(r)
    }

    /// Gcd in `Q[s, u]` up to a rational constant, by primitive PRS in `u`.
    pub fn gcd(&self, other: &BiPoly) -> BiPoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let cont = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.deg_u() < b.deg_u() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.deg_u() == 0 {
                a = BiPoly::new(vec![QPoly::one()]);
                break;
            }
            let r = a.prem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.mul(&BiPoly::new(vec![cont])).normalized()
    }

    /// Scales so the leading coefficient in `u` is monic in `s`.
    pub fn normalized(&self) -> BiPoly {
        match self.c.last() {
            Some(l) => self.scale(&l.lc().recip()),
            None => self.clone(),
        }
    }

    /// Exact quotient in `Q[s][u]`, or `None`.
    pub fn div_exact(&self, d: &BiPoly) -> Option<BiPoly> {
        assert!(!d.is_zero());
        let dd = d.deg_u();
        let ld = &d.c[dd];
        let mut r = self.c.clone();
        if r.len() <= dd {
            return r.iter().all(QPoly::is_zero).then(BiPoly::default);
        }
        let mut q = vec![QPoly::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = r[k + dd].clone();
            if top.is_zero() {
                continue;
            }
            let c = top.div_exact(ld)?;
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] = &r[k + i] - &(&c * dc);
            }
            q[k] = c;
        }
        r.iter().all(QPoly::is_zero).then(|| BiPoly::new(q))
    }

    /// Removes every factor `s - b` and `u - b` for the given values.
    pub fn strip_lines(&self, values: &[Rational]) -> BiPoly {
        let mut g = self.clone();
        for b in values {
            let ls = BiPoly::new(vec![QPoly::linear(b)]);
            let lu = BiPoly::new(vec![QPoly::constant(-b.clone()), QPoly::one()]);
            for lin in [ls, lu] {
                while !g.is_nonzero_constant() {
                    match g.div_exact(&lin) {
                        Some(q) => g = q,
                        None => break,
                    }
                }
            }
        }
        g
    }

    /// Integer coefficient grid scaled to clear denominators.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        let all: Vec<&Rational> = self.c.iter().flat_map(|p| p.coeffs()).collect();
        let l = Rational::from_integer(denom_lcm(all));
        self.c
            .iter()
            .map(|p| p.coeffs().iter().map(|x| (x * &l).to_integer()).collect())
            .collect()
    }

    /// Degree bound in `s` for `Res_u(self, other)`.
    pub fn resultant_degree_bound(&self, other: &BiPoly) -> usize {
        self.deg_s() * other.deg_u() + other.deg_s() * self.deg_u()
    }

    /// `Res_u(self, other)` as a polynomial in `s`, up to a nonzero rational
    /// factor.
    ///
    /// Computed on the integer multiples of both inputs: determinants of the
    /// Sylvester matrix at `s = 0, 1, ..., bound` modulo enough word-sized
    /// primes, interpolated and lifted by Chinese remaindering. The modulus
    /// exceeds twice the product of the Sylvester row norms, which bounds
    /// every coefficient.
    pub fn resultant_u(&self, other: &BiPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let bound = self.resultant_degree_bound(other);
        let a = self.integer_rows();
        let b = other.integer_rows();
        let (da, db) = (a.len() - 1, b.len() - 1);
        let norm = |rows: &[Vec<BigInt>]| -> BigInt {
            rows.iter().flatten().map(|x| x.abs()).sum()
        };
        let limit = BigInt::from(2) * norm(&a).pow(db as u32) * norm(&b).pow(da as u32);
        let mut crt = Crt::new(bound + 1);
        for p in primes() {
            if *crt.modulus() > limit {
                break;
            }
            let f = Zp::new(p);
            let am: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| f.from_bigint(x)).collect()).collect();
            let bm: Vec<Vec<u64>> = b.iter().map(|r| r.iter().map(|x| f.from_bigint(x)).collect()).collect();
            let ys: Vec<u64> = (0..=bound as u64)
                .map(|x| {
                    let ea: Vec<u64> = am.iter().map(|c| f.eval(c, x)).collect();
                    let eb: Vec<u64> = bm.iter().map(|c| f.eval(c, x)).collect();
                    f.det(da + db, sylvester(&ea, &eb, da, db, 0))
                })
                .collect();
            crt.add(f, &f.interpolate_consecutive(&ys));
        }
        QPoly::new(crt.symmetric().into_iter().map(Rational::from_integer).collect())
    }
}

/// Row-major Sylvester matrix with formal degrees `da`, `db` (coefficients
/// low first).
fn sylvester<T: Clone>(a: &[T], b: &[T], da: usize, db: usize, zero: T) -> Vec<T> {
    let n = da + db;
    let mut m = vec![zero; n * n];
    for r in 0..db {
        for (k, x) in a.iter().enumerate() {
            m[r * n + r + (da - k)] = x.clone();
        }
    }
    for r in 0..da {
        for (k, x) in b.iter().enumerate() {
            m[(db + r) * n + r + (db - k)] = x.clone();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::linalg::bareiss_det;
    use crate::rational::int;

    fn horner(c: &[BigInt], x: &BigInt) -> BigInt {
        c.iter().rev().fold(BigInt::zero(), |acc, k| acc * x + k)
    }

    /// Polynomial through `(k, ys[k])` by forward differences over Q.
    fn interpolate_consecutive(ys: &[BigInt]) -> QPoly {
        let mut diffs: Vec<BigInt> = Vec::with_capacity(ys.len());
        let mut row = ys.to_vec();
        while !row.is_empty() {
            diffs.push(row[0].clone());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        let mut acc = QPoly::zero();
        for k in (0..diffs.len()).rev() {
            let step = &acc * &QPoly::linear(&Rational::from_integer(BigInt::from(k)));
            acc = &step.scale(&Rational::new(BigInt::one(), BigInt::from(k + 1)))
                + &QPoly::constant(Rational::from_integer(diffs[k].clone()));
        }
        acc
    }

    /// Exact big-integer evaluation of the Sylvester determinant.
    fn resultant_oracle(x: &BiPoly, y: &BiPoly) -> QPoly {
        let bound = x.resultant_degree_bound(y);
        let (a, b) = (x.integer_rows(), y.integer_rows());
        let (da, db) = (a.len() - 1, b.len() - 1);
        let ys: Vec<BigInt> = (0..=bound as i64)
            .map(|s| {
                let s = BigInt::from(s);
                let ea: Vec<BigInt> = a.iter().map(|p| horner(p, &s)).collect();
                let eb: Vec<BigInt> = b.iter().map(|p| horner(p, &s)).collect();
                if da + db == 0 {
                    return BigInt::one();
                }
                bareiss_det(da + db, sylvester(&ea, &eb, da, db, BigInt::zero()))
            })
            .collect();
        interpolate_consecutive(&ys)
    }

    fn bipoly() -> impl Strategy<Value = BiPoly> {
        prop::collection::vec(prop::collection::vec(-40i64..40, 1..4), 1..4).prop_map(|rows| {
            BiPoly::new(rows.iter().map(|r| QPoly::from_ints(r)).collect())
        })
    }

    proptest! {
        #[test]
        fn modular_resultant_matches_exact(a in bipoly(), b in bipoly()) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            prop_assert_eq!(a.resultant_u(&b), resultant_oracle(&a, &b));
        }
    }

    fn p(c: &[i64]) -> QPoly {
        QPoly::from_ints(c)
    }

    #[test]
    fn divided_difference_of_square() {
        // (s^2 - u^2) / (s - u) = s + u
        let g = BiPoly::divided_difference(&p(&[0, 0, 1]), &p(&[1]));
        assert_eq!(g, BiPoly::new(vec![p(&[0, 1]), p(&[1])]));
    }

    #[test]
    fn resultant_matches_hand_value() {
        // Res_u(u - s, u^2 - 2) = s^2 - 2 up to sign
        let a = BiPoly::new(vec![p(&[0, -1]), p(&[1])]);
        let b = BiPoly::new(vec![p(&[-2]), p(&[0]), p(&[1])]);
        let r = a.resultant_u(&b);
        assert_eq!(r.monic(), p(&[-2, 0, 1]));
    }

    #[test]
    fn bivariate_gcd_and_strip() {
        let f = BiPoly::new(vec![p(&[0, 1]), p(&[1])]); // s + u
        let g1 = f.mul(&BiPoly::new(vec![p(&[-3]), p(&[1])])); // (s+u)(u-3)
        let g2 = f.mul(&BiPoly::new(vec![p(&[0, 2, 1])])); // (s+u) s (s+2)
        let g = g1.gcd(&g2);
        assert_eq!(g, f);
        let h = g1.strip_lines(&[int(3)]);
        assert_eq!(h, f);
    }

    #[test]
    fn interpolation() {
        let ys: Vec<BigInt> = (0..5).map(|k| BigInt::from(k * k * k - 2)).collect();
        assert_eq!(interpolate_consecutive(&ys), p(&[-2, 0, 0, 1]));
    }
}
