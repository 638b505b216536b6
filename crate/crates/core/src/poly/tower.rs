//! Polynomials in `u` over `K = Q[s]/(m)` for squarefree `m`, with
//! dynamic evaluation: a zero divisor met during a computation splits `m`
//! into coprime factors and the computation continues on each branch.

use super::QPoly;

/// Element of `K[u]`, coefficients reduced mod `m`, lowest degree first.
pub type KPoly = Vec<QPoly>;

/// A branch `m_k` of the splitting and the value computed on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub modulus: QPoly,
    pub value: KPoly,
}

fn trim(mut a: KPoly) -> KPoly {
    while a.last().is_some_and(QPoly::is_zero) {
        a.pop();
    }
    a
}

pub fn reduce(m: &QPoly, a: &[QPoly]) -> KPoly {
    trim(a.iter().map(|c| c.rem(m)).collect())
}

/// Inverse of `x` mod `m`, or a proper factor of `m`.
fn inverse(m: &QPoly, x: &QPoly) -> Result<QPoly, QPoly> {
    let (g, s, _) = QPoly::ext_gcd(x, m);
    if g.deg0() == 0 && !g.is_zero() {
        Ok(s.rem(m))
    } else {
        Err(g)
    }
}

fn make_monic(m: &QPoly, a: &KPoly) -> Result<KPoly, QPoly> {
    let Some(l) = a.last() else {
        return Ok(Vec::new());
    };
    let il = inverse(m, l)?;
    Ok(a.iter().map(|c| (c * &il).rem(m)).collect())
}

fn rem(m: &QPoly, a: &KPoly, b: &KPoly) -> Result<KPoly, QPoly> {
    let b = make_monic(m, b)?;
    let db = b.len() - 1;
    let mut r = a.clone();
    while r.len() > db && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = (&r[shift + i] - &(&lr * bc)).rem(m);
        }
        r = trim(r);
    }
    Ok(r)
}

fn gcd_pair(m: &QPoly, a: &KPoly, b: &KPoly) -> Result<KPoly, QPoly> {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(m, &a, &b)?;
        a = b;
        b = r;
    }
    make_monic(m, &a)
}

fn split(m: &QPoly, g: &QPoly) -> [QPoly; 2] {
    let g = g.monic();
    let h = m.div_exact(&g).expect("factor divides modulus").monic();
    [g, h]
}

/// Runs `step` on every branch, splitting the modulus until it succeeds.
fn on_branches<T>(
    m: &QPoly,
    mut step: impl FnMut(&QPoly) -> Result<T, QPoly>,
) -> Vec<(QPoly, T)> {
    let mut work = vec![m.monic()];
    let mut out = Vec::new();
    while let Some(mk) = work.pop() {
        match step(&mk) {
            Ok(v) => out.push((mk, v)),
            Err(g) => work.extend(split(&mk, &g)),
        }
    }
    out.sort_by(|a, b| a.0.coeffs().cmp(b.0.coeffs()));
    out
}

/// Monic gcd of the inputs on every branch of `m`.
pub fn gcd(m: &QPoly, polys: &[KPoly]) -> Vec<Branch> {
    on_branches(m, |mk| {
        let mut g: KPoly = Vec::new();
        for p in polys {
            g = gcd_pair(mk, &g, &reduce(mk, p))?;
        }
        Ok(g)
    })
    .into_iter()
    .map(|(modulus, value)| Branch { modulus, value })
    .collect()
}

/// Value of `a` at `u = x`, reduced mod `m`.
pub fn eval(m: &QPoly, a: &KPoly, x: &QPoly) -> QPoly {
    let mut acc = QPoly::zero();
    for c in a.iter().rev() {
        acc = (&(&acc * x) + c).rem(m);
    }
    acc
}

/// Synthetic division by `u - x`.
fn div_linear(m: &QPoly, a: &KPoly, x: &QPoly) -> KPoly {
    let mut q = vec![QPoly::zero(); a.len() - 1];
    let mut carry = QPoly::zero();
    for k in (1..a.len()).rev() {
        carry = (&(&carry * x) + &a[k]).rem(m);
        q[k - 1] = carry.clone();
    }
    trim(q)
}

/// Removes every factor `u - x` for each root `x` in `K`, on each branch.
pub fn strip_roots(branches: Vec<Branch>, roots: &[QPoly]) -> Vec<Branch> {
    let mut out = Vec::new();
    for b in branches {
        let stripped = on_branches(&b.modulus, |mk| {
            let mut a = reduce(mk, &b.value);
            for x in roots {
                let x = x.rem(mk);
                while a.len() > 1 {
                    let v = eval(mk, &a, &x);
                    if v.is_zero() {
                        a = div_linear(mk, &a, &x);
                    } else {
                        inverse(mk, &v)?;
                        break;
                    }
                }
            }
            Ok(a)
        });
        out.extend(
            stripped
                .into_iter()
                .map(|(modulus, value)| Branch { modulus, value }),
        );
    }
    out
}

/// Remainder of `a` by the monic `c` in `K[u]`.
pub fn rem_monic(m: &QPoly, a: &[QPoly], c: &KPoly) -> KPoly {
    rem(m, &reduce(m, a), c).expect("monic divisor needs no inversion")
}
