//! Smooth fans in a rank-3 lattice: validation, walls, primitive
//! collections, star subdivisions, presets and the fan file format.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det3, to_i64, unimodular_inverse, IntMatrix};

/// Primitive generator of a ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ray(pub [i64; 3]);

impl Ray {
    pub fn is_primitive(&self) -> bool {
        self.0.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
    }

    pub fn dot(&self, m: &[i64; 3]) -> i64 {
        self.0.iter().zip(m).map(|(a, b)| a * b).sum()
    }
}

impl std::ops::Add for Ray {
    type Output = Ray;
    fn add(self, o: Ray) -> Ray {
        Ray([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

/// A fan given by its rays and its 3-dimensional cones (index triples).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fan {
    pub name: String,
    pub rays: Vec<Ray>,
    pub cones: Vec<[usize; 3]>,
}

/// Two maximal cones sharing the 2-face spanned by rays `i`, `j`, with
/// `n_k + n_l + a n_i + b n_j = 0` for the third rays `k` (of `cones.0`)
/// and `l` (of `cones.1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub rays: (usize, usize),
    pub cones: (usize, usize),
    pub third: (usize, usize),
    pub coeffs: (i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub smooth: bool,
    pub complete: bool,
    /// (#rays, #2-faces, #maximal cones)
    pub counts: [usize; 3],
    pub non_primitive_rays: Vec<usize>,
    pub singular_cones: Vec<usize>,
    pub overlapping_cones: Vec<(usize, usize)>,
    /// 2-faces with the number of maximal cones containing them, when not 2
    pub unbalanced_faces: Vec<((usize, usize), usize)>,
}

fn sorted3(c: [usize; 3]) -> [usize; 3] {
    let mut c = c;
    c.sort_unstable();
    c
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [i128; 3], b: [i128; 3]) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn wide(r: Ray) -> [i128; 3] {
    r.0.map(i128::from)
}

impl Fan {
    /// Builds a fan, rejecting structurally malformed input.
    pub fn new(name: impl Into<String>, rays: Vec<Ray>, cones: Vec<[usize; 3]>) -> Result<Self> {
        let fan = Fan {
            name: name.into(),
            rays,
            cones,
        };
        fan.check_well_formed()?;
        Ok(fan)
    }

    fn check_well_formed(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, r) in self.rays.iter().enumerate() {
            if r.0 == [0, 0, 0] {
                return Err(Error::MalformedFan(format!("ray {i} is zero")));
            }
            if !seen.insert(*r) {
                return Err(Error::MalformedFan(format!("ray {i} duplicates an earlier ray")));
            }
        }
        let mut used = vec![false; self.rays.len()];
        let mut cone_set = HashSet::new();
        for (ci, c) in self.cones.iter().enumerate() {
            for &i in c {
                if i >= self.rays.len() {
                    return Err(Error::MalformedFan(format!(
                        "cone {ci} refers to ray {i}, but there are {} rays",
                        self.rays.len()
                    )));
                }
                used[i] = true;
            }
            let s = sorted3(*c);
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::MalformedFan(format!("cone {ci} repeats a ray")));
            }
            if !cone_set.insert(s) {
                return Err(Error::MalformedFan(format!("cone {ci} duplicates an earlier cone")));
            }
            let [a, b, cc] = c.map(|i| self.rays[i].0);
            if det3(a, b, cc) == 0 {
                return Err(Error::MalformedFan(format!("cone {ci} is not 3-dimensional")));
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::MalformedFan(format!("ray {i} lies in no cone")));
        }
        Ok(())
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    /// The 3 x r matrix whose columns are the ray generators; its rows are
    /// the pairings of the standard dual basis with the rays.
    pub fn ray_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(&self.rays.iter().map(|r| r.0).collect::<Vec<_>>())
    }

    pub fn cone_matrix(&self, cone: usize) -> IntMatrix {
        IntMatrix::from_columns(&self.cones[cone].map(|i| self.rays[i].0))
    }

    /// Dual basis of a smooth cone: row `k` pairs to 1 with the k-th ray of
    /// the cone and to 0 with the other two.
    pub fn cone_duals(&self, cone: usize) -> Result<[[i64; 3]; 3]> {
        let inv = unimodular_inverse(&self.cone_matrix(cone))?;
        let mut out = [[0i64; 3]; 3];
        for (k, row) in out.iter_mut().enumerate() {
            for (x, v) in row.iter_mut().zip(inv.row(k)) {
                *x = to_i64(v)?;
            }
        }
        Ok(out)
    }

    /// Sorted 2-faces, each with the maximal cones that contain it.
    pub fn two_faces(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.cones.iter().enumerate() {
            let s = sorted3(*c);
            for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
                faces.entry((a, b)).or_default().push(ci);
            }
        }
        faces
    }

    /// All cones of the fan (including the rays and 2-faces) as sorted index sets.
    pub fn face_set(&self) -> HashSet<Vec<usize>> {
        let mut set = HashSet::new();
        set.insert(Vec::new());
        for c in &self.cones {
            let s = sorted3(*c);
            for mask in 1u8..8 {
                let f: Vec<usize> = (0..3).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                set.insert(f);
            }
        }
        set
    }

    /// Whether two maximal cones meet in their common face.
    fn meet_in_common_face(&self, c1: usize, c2: usize) -> bool {
        let common: Vec<usize> = self.cones[c1]
            .iter()
            .filter(|i| self.cones[c2].contains(i))
            .copied()
            .collect();
        let mut normals = Vec::with_capacity(6);
        for c in [c1, c2] {
            let [a, b, cc] = self.cones[c].map(|i| wide(self.rays[i]));
            let sign = if dot(a, cross(b, cc)) > 0 { 1 } else { -1 };
            for n in [cross(b, cc), cross(cc, a), cross(a, b)] {
                normals.push(n.map(|x| x * sign));
            }
        }
        // every extreme ray of the intersection lies on two facet planes
        for p in 0..normals.len() {
            for q in p + 1..normals.len() {
                let r = cross(normals[p], normals[q]);
                if r == [0, 0, 0] {
                    continue;
                }
                for r in [r, r.map(|x| -x)] {
                    if normals.iter().all(|&n| dot(n, r) >= 0) {
                        let on_common = common.iter().any(|&i| {
                            let v = wide(self.rays[i]);
                            cross(r, v) == [0, 0, 0] && dot(r, v) > 0
                        });
                        if !on_common {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn validate(&self) -> ValidationReport {
        let non_primitive_rays: Vec<usize> = (0..self.rays.len())
            .filter(|&i| !self.rays[i].is_primitive())
            .collect();
        let singular_cones: Vec<usize> = (0..self.cones.len())
            .filter(|&c| {
                let [a, b, cc] = self.cones[c].map(|i| self.rays[i].0);
                det3(a, b, cc).abs() != 1
            })
            .collect();
        let mut overlapping_cones = Vec::new();
        for c1 in 0..self.cones.len() {
            for c2 in c1 + 1..self.cones.len() {
                if !self.meet_in_common_face(c1, c2) {
                    overlapping_cones.push((c1, c2));
                }
            }
        }
        let faces = self.two_faces();
        let unbalanced_faces: Vec<((usize, usize), usize)> = faces
            .iter()
            .filter(|(_, cs)| cs.len() != 2)
            .map(|(f, cs)| (*f, cs.len()))
            .collect();
        let smooth = non_primitive_rays.is_empty() && singular_cones.is_empty();
        let complete =
            !self.cones.is_empty() && unbalanced_faces.is_empty() && overlapping_cones.is_empty();
        ValidationReport {
            smooth,
            complete,
            counts: [self.rays.len(), faces.len(), self.cones.len()],
            non_primitive_rays,
            singular_cones,
            overlapping_cones,
            unbalanced_faces,
        }
    }

    /// One wall per 2-face; requires every 2-face to lie in exactly two cones.
    pub fn walls(&self) -> Result<Vec<Wall>> {
        let mut out = Vec::new();
        for ((i, j), cs) in self.two_faces() {
            if cs.len() != 2 {
                return Err(Error::NotComplete(i, j, cs.len()));
            }
            let third = |c: usize| *self.cones[c].iter().find(|&&x| x != i && x != j).unwrap();
            let (k, l) = (third(cs[0]), third(cs[1]));
            let basis = IntMatrix::from_columns(&[self.rays[i].0, self.rays[j].0, self.rays[k].0]);
            let inv = unimodular_inverse(&basis)?;
            let x = inv.mul_vec(&self.rays[l].0.map(num_bigint::BigInt::from))?;
            let x: Vec<i64> = x.iter().map(to_i64).collect::<Result<_>>()?;
            if x[2] != -1 {
                return Err(Error::MalformedFan(format!(
                    "cones {} and {} lie on the same side of face ({i}, {j})",
                    cs[0], cs[1]
                )));
            }
            out.push(Wall {
                rays: (i, j),
                cones: (cs[0], cs[1]),
                third: (k, l),
                coeffs: (-x[0], -x[1]),
            });
        }
        Ok(out)
    }

    /// Minimal sets of rays that do not span a cone of the fan.
    pub fn primitive_collections(&self) -> Vec<Vec<usize>> {
        let faces = self.face_set();
        let r = self.rays.len();
        let mut out = Vec::new();
        let mut subset = Vec::new();
        fn rec(
            start: usize,
            size: usize,
            r: usize,
            subset: &mut Vec<usize>,
            faces: &HashSet<Vec<usize>>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if subset.len() == size {
                if faces.contains(subset) {
                    return;
                }
                let minimal = (0..size).all(|skip| {
                    let sub: Vec<usize> = subset
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    faces.contains(&sub)
                });
                if minimal {
                    out.push(subset.clone());
                }
                return;
            }
            for i in start..r {
                subset.push(i);
                rec(i + 1, size, r, subset, faces, out);
                subset.pop();
            }
        }
        // in dimension 3 every 4-set is a non-face, so minimal ones have size <= 4
        for size in 1..=4 {
            rec(0, size, r, &mut subset, &faces, &mut out);
        }
        out
    }

    /// Star subdivision of a maximal cone at the sum of its generators.
    pub fn star_subdivision(&self, cone: [usize; 3]) -> Result<Fan> {
        let target = sorted3(cone);
        let idx = self
            .cones
            .iter()
            .position(|c| sorted3(*c) == target)
            .ok_or_else(|| Error::ConeNotInFan(cone.to_vec()))?;
        let [i, j, k] = self.cones[idx];
        let mut rays = self.rays.clone();
        let w = rays.len();
        rays.push(self.rays[i] + self.rays[j] + self.rays[k]);
        let mut cones = self.cones.clone();
        cones[idx] = [i, j, w];
        cones.push([j, k, w]);
        cones.push([i, k, w]);
        Fan::new(format!("{}+star({i},{j},{k})", self.name), rays, cones)
    }

    /// Applies `steps` star subdivisions at seeded random cones.
    pub fn random_blowups(&self, steps: usize, seed: u64) -> Result<Fan> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fan = self.clone();
        for _ in 0..steps {
            let c = rng.random_range(0..fan.cones.len());
            fan = fan.star_subdivision(fan.cones[c])?;
        }
        Ok(fan)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fan serializes")
    }

    pub fn from_toml(text: &str) -> Result<Fan> {
        let fan: Fan = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        fan.check_well_formed()?;
        Ok(fan)
    }

    pub fn preset(name: &str) -> Result<Fan> {
        let e = |v: [i64; 3]| Ray(v);
        match name {
            "p3" => Fan::new(
                "p3",
                vec![e([1, 0, 0]), e([0, 1, 0]), e([0, 0, 1]), e([-1, -1, -1])],
                vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
            ),
            "p1p1p1" => {
                let rays = vec![
                    e([1, 0, 0]),
                    e([-1, 0, 0]),
                    e([0, 1, 0]),
                    e([0, -1, 0]),
                    e([0, 0, 1]),
                    e([0, 0, -1]),
                ];
                let mut cones = Vec::new();
                for a in [0, 1] {
                    for b in [2, 3] {
                        for c in [4, 5] {
                            cones.push([a, b, c]);
                        }
                    }
                }
                Fan::new("p1p1p1", rays, cones)
            }
            "bl-p3-point" => {
                let mut f = Fan::preset("p3")?.star_subdivision([0, 1, 2])?;
                f.name = "bl-p3-point".into();
                Ok(f)
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub const PRESETS: [&'static str; 3] = ["p3", "p1p1p1", "bl-p3-point"];

    /// Index of the first maximal cone containing all of `rays`.
    pub fn cone_containing(&self, rays: &[usize]) -> Option<usize> {
        self.cones
            .iter()
            .position(|c| rays.iter().all(|r| c.contains(r)))
    }

    pub fn cone_set(&self) -> BTreeSet<[usize; 3]> {
        self.cones.iter().map(|c| sorted3(*c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for (name, counts) in [
            ("p3", [4, 6, 4]),
            ("p1p1p1", [6, 12, 8]),
            ("bl-p3-point", [5, 9, 6]),
        ] {
            let f = Fan::preset(name).unwrap();
            let rep = f.validate();
            assert!(rep.smooth && rep.complete, "{name}: {rep:?}");
            assert_eq!(rep.counts, counts, "{name}");
        }
        assert_eq!(Fan::preset("p2"), Err(Error::UnknownPreset("p2".into())));
    }

    #[test]
    fn non_primitive_ray_is_not_smooth() {
        let f = Fan::new(
            "bad",
            vec![Ray([2, 0, 0]), Ray([0, 1, 0]), Ray([0, 0, 1]), Ray([-1, -1, -1])],
            vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        )
        .unwrap();
        let rep = f.validate();
        assert!(!rep.smooth);
        assert_eq!(rep.non_primitive_rays, vec![0]);
    }

    #[test]
    fn deleting_a_cone_breaks_completeness() {
        let mut f = Fan::preset("p3").unwrap();
        f.cones.remove(3);
        let rep = f.validate();
        assert!(rep.smooth);
        assert!(!rep.complete);
        assert_eq!(rep.unbalanced_faces.len(), 3);
        assert!(rep.unbalanced_faces.iter().all(|(_, n)| *n == 1));
        assert!(matches!(f.walls(), Err(Error::NotComplete(..))));
    }

    #[test]
    fn overlapping_cones_detected() {
        // the cones <e1,e2,e3> and <e1,e2,e1+e2+e3> overlap
        let f = Fan::new(
            "overlap",
            vec![Ray([1, 0, 0]), Ray([0, 1, 0]), Ray([0, 0, 1]), Ray([1, 1, 1])],
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        assert_eq!(f.validate().overlapping_cones, vec![(0, 1)]);
    }

    #[test]
    fn malformed_inputs() {
        let r = vec![Ray([1, 0, 0]), Ray([0, 1, 0]), Ray([0, 0, 1])];
        assert!(matches!(
            Fan::new("x", r.clone(), vec![[0, 1, 3]]),
            Err(Error::MalformedFan(_))
        ));
        assert!(matches!(
            Fan::new("x", vec![r[0], r[1], r[2], r[0]], vec![[0, 1, 2]]),
            Err(Error::MalformedFan(_))
        ));
        assert!(matches!(
            Fan::new("x", r.clone(), vec![[0, 1, 1]]),
            Err(Error::MalformedFan(_))
        ));
    }

    #[test]
    fn wall_relations() {
        let f = Fan::preset("p1p1p1").unwrap();
        let w = f.walls().unwrap();
        let w01 = w.iter().find(|w| w.rays == (0, 2)).unwrap();
        assert_eq!(w01.coeffs, (0, 0));

        let f = Fan::preset("p3").unwrap();
        let w = f.walls().unwrap();
        let w01 = w.iter().find(|w| w.rays == (0, 1)).unwrap();
        assert_eq!(w01.coeffs, (1, 1));

        // e2 + e3 + e1 - (1,1,1) = 0
        let f = Fan::preset("bl-p3-point").unwrap();
        let w = f.walls().unwrap();
        let w = w.iter().find(|w| w.rays == (0, 4)).unwrap();
        let third: BTreeSet<usize> = [w.third.0, w.third.1].into();
        assert_eq!(third, BTreeSet::from([1, 2]));
        assert_eq!(w.coeffs, (1, -1));
    }

    #[test]
    fn wall_relations_hold_independently() {
        for name in Fan::PRESETS {
            let f = Fan::preset(name).unwrap();
            for w in f.walls().unwrap() {
                let (i, j) = w.rays;
                let (k, l) = w.third;
                let (a, b) = w.coeffs;
                for c in 0..3 {
                    let s = f.rays[k].0[c] + f.rays[l].0[c] + a * f.rays[i].0[c] + b * f.rays[j].0[c];
                    assert_eq!(s, 0);
                }
            }
        }
    }

    #[test]
    fn primitive_collections_examples() {
        let f = Fan::preset("p3").unwrap();
        assert_eq!(f.primitive_collections(), vec![vec![0, 1, 2, 3]]);

        let f = Fan::preset("p1p1p1").unwrap();
        assert_eq!(
            f.primitive_collections(),
            vec![vec![0, 1], vec![2, 3], vec![4, 5]]
        );

        let f = Fan::preset("bl-p3-point").unwrap();
        let pc = f.primitive_collections();
        assert!(pc.contains(&vec![3, 4]));
        assert!(pc.contains(&vec![0, 1, 2]));
    }

    #[test]
    fn star_subdivision_counts() {
        let p3 = Fan::preset("p3").unwrap();
        let bl = p3.star_subdivision([0, 1, 2]).unwrap();
        assert_eq!((bl.rays.len(), bl.cones.len()), (5, 6));
        assert_eq!(bl.rays[4], Ray([1, 1, 1]));
        let twice = bl.star_subdivision([1, 2, 3]).unwrap();
        assert_eq!((twice.rays.len(), twice.cones.len()), (6, 8));
        let rep = twice.validate();
        assert!(rep.smooth && rep.complete);
        assert_eq!(
            p3.star_subdivision([0, 1, 4]),
            Err(Error::ConeNotInFan(vec![0, 1, 4]))
        );
    }

    #[test]
    fn toml_round_trip_and_unknown_fields() {
        let f = Fan::preset("bl-p3-point").unwrap();
        let text = f.to_toml();
        assert_eq!(Fan::from_toml(&text).unwrap(), f);
        assert_eq!(Fan::from_toml(&text).unwrap().to_toml(), text);
        let extra = format!("{text}weight = 3\n");
        assert!(matches!(Fan::from_toml(&extra), Err(Error::Parse(_))));
        let missing = "name = \"x\"\nrays = [[1, 0, 0]]\n";
        assert!(matches!(Fan::from_toml(missing), Err(Error::Parse(_))));
    }
}
