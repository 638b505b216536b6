//! Deliberately degenerate inputs: data violating the construction's
//! hypotheses or its genericity, and a complete fan that is not projective.

use crate::curve::{CDivisor, CurvePoint, ProjectiveLine, RationalFunction};
use crate::embed::{build_embedding_data, EmbeddingData};
use crate::error::Result;
use crate::fan::Fan;
use crate::intersect::{find_ample, xi_vector, TDivisor, XiMethod, XiVector};
use crate::rational::{int, rat, Rational};

/// Complete smooth fan on 7 rays without an ample divisor.
pub const NONPROJECTIVE_TOML: &str = include_str!("../../../fixtures/nonprojective.toml");

pub fn nonprojective() -> Fan {
    Fan::from_toml(NONPROJECTIVE_TOML).expect("fixture parses")
}

fn ones() -> [Rational; 3] {
    [int(1), int(1), int(1)]
}

fn points(v: &[Rational]) -> CDivisor {
    CDivisor::from_points(v.iter().map(|a| (CurvePoint::Finite(a.clone()), 1)))
}

/// `D_j = {r_j, -r_j}`, so every character function is even in `t` and
/// `t`, `-t` always collide. Needs a fan with `sum_j n_j = 0`.
pub fn symmetric(fan: &Fan, radii: &[i64]) -> Result<EmbeddingData> {
    let divisors: Vec<CDivisor> = radii.iter().map(|&r| points(&[int(r), int(-r)])).collect();
    let xi = XiVector { xi: vec![2; radii.len()], method: XiMethod::Kernel };
    EmbeddingData::from_divisors(fan, &TDivisor::anticanonical(radii.len()), &xi, divisors, &ones(), None)
}

/// On P^3, `D_0 = 2 [1/2]`: the first coordinate vanishes to order 2 there.
pub fn doubled_point() -> Result<(EmbeddingData, CurvePoint)> {
    let fan = Fan::preset("p3")?;
    let a = CurvePoint::Finite(rat(1, 2));
    let divisors = vec![
        CDivisor::from_points([(a.clone(), 2)]),
        points(&[int(2), int(3)]),
        points(&[int(4), int(5)]),
        points(&[int(6), int(7)]),
    ];
    let xi = XiVector { xi: vec![2; 4], method: XiMethod::Kernel };
    let data = EmbeddingData::from_divisors(&fan, &TDivisor::prime(4, 0), &xi, divisors, &ones(), None)?;
    Ok((data, a))
}

/// A P^3 pipeline run whose `epsilon(m_1)` gains a zero at `z = 97/3` that
/// no divisor accounts for. The matching pole is put on a point of `D_4`,
/// which chart 0 excludes, so chart 0 stays regular.
pub fn smuggled_zero(seed: u64) -> Result<(EmbeddingData, CurvePoint)> {
    let fan = Fan::preset("p3")?;
    let h = find_ample(&fan)?;
    let xi = xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine)?;
    let mut data = build_embedding_data(&fan, &h, &xi, seed, &ones())?;
    let z = rat(97, 3);
    let w = data.divisors[3].support().next().and_then(CurvePoint::finite).cloned().expect("D_4 is finite");
    data.epsilon[0] = data.epsilon[0]
        .mul(&RationalFunction::linear(z.clone()))
        .mul(&RationalFunction::linear(w).inv());
    Ok((data, CurvePoint::Finite(z)))
}

/// A P^1 x P^1 x P^1 pipeline run with `-101/7` added to both `D_1` and
/// `D_2`, whose rays form a primitive collection.
pub fn shared_point(seed: u64) -> Result<(EmbeddingData, CurvePoint)> {
    let fan = Fan::preset("p1p1p1")?;
    let h = find_ample(&fan)?;
    let xi = xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine)?;
    let base = build_embedding_data(&fan, &h, &xi, seed, &ones())?;
    let shared = CurvePoint::Finite(rat(-101, 7));
    let mut divisors = base.divisors;
    divisors[0].add_point(shared.clone(), 1);
    divisors[1].add_point(shared.clone(), 1);
    let mut xi = xi;
    xi.xi[0] += 1;
    xi.xi[1] += 1;
    let data = EmbeddingData::from_divisors(&fan, &h, &xi, divisors, &ones(), None)?;
    Ok((data, shared))
}
