//! Concrete finitely generated groups with a solved word problem.
//!
//! Three families are shipped:
//!
//! * `Z^d` with generators `±e_1, …, ±e_d`, elements are integer vectors;
//! * `F_k`, the free group on `k` letters, elements are freely reduced words;
//! * `H3`, the integer Heisenberg group in upper-triangular coordinates
//!   `(x, y, z) ↔ [[1, x, z], [0, 1, y], [0, 0, 1]]`, generated by
//!   `a = (1,0,0)` and `b = (0,1,0)`.
//!
//! Every element has exactly one normal form, so `Eq`/`Hash`/`Ord` on
//! [`GroupElement`] are equality in the group.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Normal form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupElement {
    /// Integer coordinates in `Z^d`.
    Lattice(SmallVec<[i64; 4]>),
    /// Freely reduced word; letter `i` is `a_i` and `-i` its inverse (`i ≥ 1`).
    Word(SmallVec<[i8; 16]>),
    /// Upper-triangular coordinates `(x, y, z)`.
    Heisenberg([i64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Lattice { dim: usize },
    Free { rank: usize },
    Heisenberg,
}

impl Family {
    /// Growth degree of the family (`None` for exponential growth).
    pub fn growth_degree(&self) -> Option<usize> {
        match *self {
            Family::Lattice { dim } => Some(dim),
            Family::Free { rank: 1 } => Some(1),
            Family::Free { .. } => None,
            Family::Heisenberg => Some(4),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lattice { dim } => write!(f, "Z^{dim}"),
            Family::Free { rank } => write!(f, "F_{rank}"),
            Family::Heisenberg => write!(f, "H3"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts `Z^d`, `Z_d`, `Zd`, `F_k`, `F^k`, `Fk`, `H3`, `H_3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownFamily(s.to_string());
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(unknown)?;
        let rest = chars.as_str().trim_start_matches(['^', '_']);
        let param = |rest: &str| -> Result<usize> {
            let v: i64 = rest.parse().map_err(|_| unknown())?;
            if v < 1 {
                return Err(Error::InvalidParameter(format!(
                    "family parameter must be positive, got {v} in `{s}`"
                )));
            }
            Ok(v as usize)
        };
        match head {
            'Z' | 'z' => Ok(Family::Lattice { dim: param(rest)? }),
            'F' | 'f' => {
                let rank = param(rest)?;
                if rank > 26 {
                    return Err(Error::InvalidParameter(format!(
                        "free rank {rank} exceeds the 26 available letters"
                    )));
                }
                Ok(Family::Free { rank })
            }
            'H' | 'h' if rest == "3" => Ok(Family::Heisenberg),
            _ => Err(unknown()),
        }
    }
}

/// A group together with its fixed symmetric generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    family: Family,
    generators: Vec<GroupElement>,
    inverse_of: Vec<usize>,
    central: Option<GroupElement>,
}

impl GroupModel {
    pub fn new(family: Family) -> Result<Self> {
        let (generators, central) = match family {
            Family::Lattice { dim } => {
                if dim == 0 {
                    return Err(Error::InvalidParameter("Z^d needs d >= 1".into()));
                }
                let mut gens = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    for sign in [1, -1] {
                        let mut v: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim);
                        v[i] = sign;
                        gens.push(GroupElement::Lattice(v));
                    }
                }
                let mut z: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim);
                z[0] = 1;
                (gens, Some(GroupElement::Lattice(z)))
            }
            Family::Free { rank } => {
                if rank == 0 || rank > 26 {
                    return Err(Error::InvalidParameter(format!(
                        "F_k needs 1 <= k <= 26, got {rank}"
                    )));
                }
                let mut gens = Vec::with_capacity(2 * rank);
                for i in 1..=rank as i8 {
                    gens.push(GroupElement::Word(SmallVec::from_slice(&[i])));
                    gens.push(GroupElement::Word(SmallVec::from_slice(&[-i])));
                }
                // F_1 = Z is abelian; its generator is central.
                let central = (rank == 1).then(|| GroupElement::Word(SmallVec::from_slice(&[1])));
                (gens, central)
            }
            Family::Heisenberg => (
                vec![
                    GroupElement::Heisenberg([1, 0, 0]),
                    GroupElement::Heisenberg([-1, 0, 0]),
                    GroupElement::Heisenberg([0, 1, 0]),
                    GroupElement::Heisenberg([0, -1, 0]),
                ],
                Some(GroupElement::Heisenberg([0, 0, 1])),
            ),
        };
        // generators come in (g, g^-1) pairs
        let inverse_of = (0..generators.len()).map(|j| j ^ 1).collect();
        Ok(GroupModel {
            family,
            generators,
            inverse_of,
            central,
        })
    }

    /// Parse a group spec such as `Z^3`, `F2` or `H3`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        GroupModel::new(spec.parse()?)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Canonical spec string (`Z^d`, `F_k`, `H3`).
    pub fn spec(&self) -> String {
        self.family.to_string()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> &GroupElement {
        &self.generators[j]
    }

    /// `|S|`.
    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// Index of `g_j^{-1}` in the generating set.
    pub fn inverse_index(&self, j: usize) -> usize {
        self.inverse_of[j]
    }

    /// Central element of infinite order, when the family has an obvious one.
    pub fn central_element(&self) -> Option<&GroupElement> {
        self.central.as_ref()
    }

    pub fn identity(&self) -> GroupElement {
        match self.family {
            Family::Lattice { dim } => GroupElement::Lattice(SmallVec::from_elem(0, dim)),
            Family::Free { .. } => GroupElement::Word(SmallVec::new()),
            Family::Heisenberg => GroupElement::Heisenberg([0, 0, 0]),
        }
    }

    pub fn is_identity(&self, x: &GroupElement) -> bool {
        match x {
            GroupElement::Lattice(v) => v.iter().all(|&c| c == 0),
            GroupElement::Word(w) => w.is_empty(),
            GroupElement::Heisenberg(h) => *h == [0, 0, 0],
        }
    }

    /// Group law. Panics if the elements come from different families; the
    /// caller is responsible for only mixing elements of one model.
    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        match (x, y) {
            (GroupElement::Lattice(a), GroupElement::Lattice(b)) => {
                debug_assert_eq!(a.len(), b.len());
                GroupElement::Lattice(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (GroupElement::Word(a), GroupElement::Word(b)) => {
                let mut out: SmallVec<[i8; 16]> = a.clone();
                for &letter in b {
                    if out.last() == Some(&-letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                GroupElement::Word(out)
            }
            (GroupElement::Heisenberg([x1, y1, z1]), GroupElement::Heisenberg([x2, y2, z2])) => {
                GroupElement::Heisenberg([x1 + x2, y1 + y2, z1 + z2 + x1 * y2])
            }
            _ => panic!("multiply: elements from different families"),
        }
    }

    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        match x {
            GroupElement::Lattice(a) => GroupElement::Lattice(a.iter().map(|c| -c).collect()),
            GroupElement::Word(w) => GroupElement::Word(w.iter().rev().map(|l| -l).collect()),
            GroupElement::Heisenberg([x, y, z]) => GroupElement::Heisenberg([-x, -y, -z + x * y]),
        }
    }

    /// `x^n` for `n ≥ 0`.
    pub fn pow(&self, x: &GroupElement, n: u32) -> GroupElement {
        let mut acc = self.identity();
        for _ in 0..n {
            acc = self.multiply(&acc, x);
        }
        acc
    }

    /// Product `g_{j_1} g_{j_2} ⋯` of generators given by index.
    pub fn word(&self, letters: &[usize]) -> GroupElement {
        letters.iter().fold(self.identity(), |acc, &j| {
            self.multiply(&acc, &self.generators[j])
        })
    }

    /// `x · g_j^{-1}`, the neighbour read by `α ∗ (g_j − 1)`.
    pub fn step_back(&self, x: &GroupElement, j: usize) -> GroupElement {
        self.multiply(x, &self.generators[self.inverse_of[j]])
    }

    /// Whether `x` belongs to this model's family (shape check only).
    pub fn contains(&self, x: &GroupElement) -> bool {
        match (self.family, x) {
            (Family::Lattice { dim }, GroupElement::Lattice(v)) => v.len() == dim,
            (Family::Free { rank }, GroupElement::Word(w)) => {
                w.iter()
                    .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Family::Heisenberg, GroupElement::Heisenberg(_)) => true,
            _ => false,
        }
    }

    /// Normal-form string: `(1,-2)` for `Z^d`, `abA` for `F_k`, `(x,y,z)` for `H3`.
    /// The empty word prints as the empty string.
    pub fn format_element(&self, x: &GroupElement) -> String {
        match x {
            GroupElement::Lattice(v) => tuple_string(v),
            GroupElement::Heisenberg(h) => tuple_string(h),
            GroupElement::Word(w) => w
                .iter()
                .map(|&l| {
                    let c = (b'a' + (l.unsigned_abs() - 1)) as char;
                    if l > 0 {
                        c
                    } else {
                        c.to_ascii_uppercase()
                    }
                })
                .collect(),
        }
    }

    /// Inverse of [`format_element`](Self::format_element). Free words are
    /// reduced on input.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let bad = |reason: &str| Error::ParseElement {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        match self.family {
            Family::Lattice { dim } => {
                let v = parse_tuple(t).ok_or_else(|| bad("expected (c1,...,cd)"))?;
                if v.len() != dim {
                    return Err(bad(&format!("expected {dim} coordinates")));
                }
                Ok(GroupElement::Lattice(v.into_iter().collect()))
            }
            Family::Heisenberg => {
                let v = parse_tuple(t).ok_or_else(|| bad("expected (x,y,z)"))?;
                match v[..] {
                    [x, y, z] => Ok(GroupElement::Heisenberg([x, y, z])),
                    _ => Err(bad("expected 3 coordinates")),
                }
            }
            Family::Free { rank } => {
                let mut letters = Vec::with_capacity(t.len());
                for c in t.chars() {
                    if !c.is_ascii_alphabetic() {
                        return Err(bad("letters only"));
                    }
                    let idx = (c.to_ascii_lowercase() as u8 - b'a' + 1) as i8;
                    if idx as usize > rank {
                        return Err(bad(&format!("letter `{c}` outside F_{rank}")));
                    }
                    letters.push(if c.is_ascii_lowercase() { idx } else { -idx });
                }
                let w = GroupElement::Word(SmallVec::new());
                let raw = GroupElement::Word(letters.into_iter().collect());
                Ok(self.multiply(&w, &raw))
            }
        }
    }

    /// Checks the structural invariants of the model: symmetric `S`, no
    /// identity in `S`, and that the declared central element commutes with
    /// every generator and has no small torsion.
    pub fn validate(&self) -> Result<()> {
        for (j, g) in self.generators.iter().enumerate() {
            if self.is_identity(g) {
                return Err(Error::Invariant(format!("generator {j} is the identity")));
            }
            let inv = &self.generators[self.inverse_of[j]];
            if self.inverse(g) != *inv {
                return Err(Error::Invariant(format!(
                    "generating set is not symmetric at {j}"
                )));
            }
        }
        if let Some(z) = &self.central {
            for g in &self.generators {
                if self.multiply(z, g) != self.multiply(g, z) {
                    return Err(Error::Invariant(
                        "declared central element does not commute".into(),
                    ));
                }
            }
            let mut acc = z.clone();
            for n in 1..=64 {
                if self.is_identity(&acc) {
                    return Err(Error::Invariant(format!("central element has order {n}")));
                }
                acc = self.multiply(&acc, z);
            }
        }
        Ok(())
    }
}

fn tuple_string(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

fn parse_tuple(t: &str) -> Option<Vec<i64>> {
    let inner = t.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|p| p.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(g: &GroupModel, rng: &mut ChaCha8Rng) -> GroupElement {
        let len = rng.random_range(0..12);
        let letters: Vec<usize> = (0..len).map(|_| rng.random_range(0..g.degree())).collect();
        g.word(&letters)
    }

    fn families() -> Vec<GroupModel> {
        ["Z^1", "Z^2", "Z^3", "F_2", "F_3", "H3"]
            .iter()
            .map(|s| GroupModel::from_spec(s).unwrap())
            .collect()
    }

    #[test]
    fn generating_set_sizes() {
        assert_eq!(GroupModel::from_spec("Z^2").unwrap().degree(), 4);
        let f2 = GroupModel::from_spec("F_2").unwrap();
        assert_eq!(f2.degree(), 4);
        assert!(f2.central_element().is_none());
        let h = GroupModel::from_spec("H3").unwrap();
        assert_eq!(h.degree(), 4);
    }

    /// 3×3 upper-triangular integer matrices, multiplied the long way.
    fn heis_matrix(x: &GroupElement) -> [[i64; 3]; 3] {
        match x {
            GroupElement::Heisenberg([a, b, c]) => [[1, *a, *c], [0, 1, *b], [0, 0, 1]],
            _ => unreachable!(),
        }
    }

    fn matmul(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
        let mut out = [[0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn heisenberg_commutator_is_central_generator() {
        let h = GroupModel::from_spec("H3").unwrap();
        let a = h.generator(0).clone();
        let b = h.generator(2).clone();
        let m = |x: &GroupElement, y: &GroupElement| h.multiply(x, y);
        let comm = m(&m(&m(&h.inverse(&a), &h.inverse(&b)), &a), &b);
        let oracle = matmul(
            matmul(
                matmul(heis_matrix(&h.inverse(&a)), heis_matrix(&h.inverse(&b))),
                heis_matrix(&a),
            ),
            heis_matrix(&b),
        );
        assert_eq!(heis_matrix(&comm), oracle);
        assert_eq!(comm, GroupElement::Heisenberg([0, 0, 1]));
        assert_eq!(Some(&comm), h.central_element());
    }

    #[test]
    fn heisenberg_law_matches_matrix_product() {
        let h = GroupModel::from_spec("H3").unwrap();
        let x = GroupElement::Heisenberg([1, 0, 0]);
        let y = GroupElement::Heisenberg([0, 1, 0]);
        assert_eq!(h.multiply(&x, &y), GroupElement::Heisenberg([1, 1, 1]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let x = random_element(&h, &mut rng);
            let y = random_element(&h, &mut rng);
            assert_eq!(
                heis_matrix(&h.multiply(&x, &y)),
                matmul(heis_matrix(&x), heis_matrix(&y))
            );
        }
    }

    #[test]
    fn elementary_products() {
        let z2 = GroupModel::from_spec("Z^2").unwrap();
        let e1 = z2.parse_element("(1,0)").unwrap();
        let e2 = z2.parse_element("(0,1)").unwrap();
        assert_eq!(z2.format_element(&z2.multiply(&e1, &e2)), "(1,1)");

        let f2 = GroupModel::from_spec("F_2").unwrap();
        let ab = f2.parse_element("ab").unwrap();
        let b_inv = f2.parse_element("B").unwrap();
        assert_eq!(f2.format_element(&f2.multiply(&ab, &b_inv)), "a");
        assert_eq!(f2.format_element(&f2.parse_element("abBA").unwrap()), "");
    }

    #[test]
    fn group_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in families() {
            g.validate().unwrap();
            let e = g.identity();
            for _ in 0..10_000 {
                let x = random_element(&g, &mut rng);
                let y = random_element(&g, &mut rng);
                let z = random_element(&g, &mut rng);
                assert_eq!(
                    g.multiply(&g.multiply(&x, &y), &z),
                    g.multiply(&x, &g.multiply(&y, &z))
                );
                assert_eq!(g.multiply(&x, &g.inverse(&x)), e);
                assert_eq!(g.multiply(&e, &x), x);
                assert!(g.contains(&x));
            }
        }
    }

    #[test]
    fn central_element_commutes_with_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in families() {
            let Some(z) = g.central_element().cloned() else {
                continue;
            };
            for _ in 0..1000 {
                let x = random_element(&g, &mut rng);
                assert_eq!(g.multiply(&x, &z), g.multiply(&z, &x));
            }
        }
    }

    #[test]
    fn normal_form_round_trip_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for g in families() {
            for _ in 0..500 {
                let x = random_element(&g, &mut rng);
                let s = g.format_element(&x);
                let y = g.parse_element(&s).unwrap();
                assert_eq!(x, y);
                assert_eq!(g.format_element(&y), s);
            }
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("Z^3".parse::<Family>().unwrap(), Family::Lattice { dim: 3 });
        assert_eq!("Z2".parse::<Family>().unwrap(), Family::Lattice { dim: 2 });
        assert_eq!("F_2".parse::<Family>().unwrap(), Family::Free { rank: 2 });
        assert_eq!("F2".parse::<Family>().unwrap(), Family::Free { rank: 2 });
        assert_eq!("H3".parse::<Family>().unwrap(), Family::Heisenberg);
        assert!(matches!(
            "Q5".parse::<Family>(),
            Err(Error::UnknownFamily(_))
        ));
        assert!(matches!(
            "Z^0".parse::<Family>(),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            "F_-1".parse::<Family>(),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn parse_errors() {
        let z2 = GroupModel::from_spec("Z^2").unwrap();
        assert!(z2.parse_element("(1,2,3)").is_err());
        assert!(z2.parse_element("1,2").is_err());
        let f2 = GroupModel::from_spec("F_2").unwrap();
        assert!(f2.parse_element("abc").is_err());
    }
}
