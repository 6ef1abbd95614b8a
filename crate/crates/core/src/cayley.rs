//! Indexed word-metric balls `B_R` of a Cayley graph.
//!
//! Vertices are numbered in breadth-first discovery order from the identity
//! (index 0), expanding each vertex by `x·g_0, x·g_1, …` in generator order.
//! The neighbour table stores, for vertex `i` and generator `j`, the index of
//! `x_i·g_j^{-1}`; this is the point read by the difference operator
//! `α ∗ (g_j − 1)`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};

/// Default cap on the number of vertices in a ball.
pub const DEFAULT_MAX_VERTICES: usize = 5_000_000;

/// Marker for neighbours that fall outside the ball.
const EXTERIOR: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct CayleyBall {
    group: GroupModel,
    radius: u32,
    vertices: Vec<GroupElement>,
    index: HashMap<GroupElement, u32>,
    neighbors: Vec<u32>,
    word_length: Vec<u32>,
    sphere_sizes: Vec<usize>,
}

impl CayleyBall {
    /// Ball of the given radius with the default vertex cap.
    pub fn build(group: &GroupModel, radius: u32) -> Result<Self> {
        Self::build_with_cap(group, radius, DEFAULT_MAX_VERTICES)
    }

    pub fn build_with_cap(group: &GroupModel, radius: u32, max_vertices: usize) -> Result<Self> {
        let degree = group.degree();
        let mut vertices = vec![group.identity()];
        let mut index = HashMap::new();
        index.insert(group.identity(), 0u32);
        let mut word_length = vec![0u32];
        let mut forward: Vec<u32> = Vec::new();

        let mut head = 0;
        while head < vertices.len() {
            let depth = word_length[head];
            let x = vertices[head].clone();
            for j in 0..degree {
                let y = group.multiply(&x, group.generator(j));
                let slot = match index.get(&y) {
                    Some(&k) => k,
                    None if depth < radius => {
                        if vertices.len() >= max_vertices {
                            return Err(Error::BallTooLarge {
                                radius,
                                limit: max_vertices,
                            });
                        }
                        let k = vertices.len() as u32;
                        index.insert(y.clone(), k);
                        vertices.push(y);
                        word_length.push(depth + 1);
                        k
                    }
                    None => EXTERIOR,
                };
                forward.push(slot);
            }
            head += 1;
        }

        // x·g_j^{-1} = x·g_{inv(j)}
        let n = vertices.len();
        let mut neighbors = vec![EXTERIOR; n * degree];
        for i in 0..n {
            for j in 0..degree {
                neighbors[i * degree + j] = forward[i * degree + group.inverse_index(j)];
            }
        }

        let mut sphere_sizes = vec![0usize; radius as usize + 1];
        for &l in &word_length {
            sphere_sizes[l as usize] += 1;
        }

        Ok(CayleyBall {
            group: group.clone(),
            radius,
            vertices,
            index,
            neighbors,
            word_length,
            sphere_sizes,
        })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.vertices[i]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn index_of(&self, x: &GroupElement) -> Option<usize> {
        self.index.get(x).map(|&k| k as usize)
    }

    /// Index of `x_i·g_j^{-1}`, or `None` if it lies outside the ball.
    #[inline]
    pub fn neighbor(&self, i: usize, j: usize) -> Option<usize> {
        let k = self.neighbors[i * self.degree() + j];
        (k != EXTERIOR).then_some(k as usize)
    }

    /// Index of `x_i·g_j`.
    #[inline]
    pub fn forward(&self, i: usize, j: usize) -> Option<usize> {
        self.neighbor(i, self.group.inverse_index(j))
    }

    pub fn word_length(&self, i: usize) -> u32 {
        self.word_length[i]
    }

    pub fn word_lengths(&self) -> &[u32] {
        &self.word_length
    }

    /// `sphere_sizes()[r] = |{x : |x| = r}|`.
    pub fn sphere_sizes(&self) -> &[usize] {
        &self.sphere_sizes
    }

    /// Vertices with word length `< R`; all of their neighbours are in the ball.
    pub fn is_interior(&self, i: usize) -> bool {
        self.word_length[i] < self.radius
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_interior(i))
    }

    /// The outermost sphere `|x| = R`.
    pub fn sphere(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.word_length[i] == self.radius)
    }

    /// Number of generators leading out of the ball from vertex `i`.
    pub fn exterior_count(&self, i: usize) -> usize {
        (0..self.degree())
            .filter(|&j| self.neighbor(i, j).is_none())
            .count()
    }

    /// Ball `B_r` for `r ≤ R` as a subset (a prefix of the vertex order).
    pub fn sub_ball(&self, r: u32) -> SubsetView {
        SubsetView::from_indices(
            self.len(),
            (0..self.len()).filter(|&i| self.word_length[i] <= r),
        )
    }

    pub fn summary(&self, with_neighbors: bool) -> BallSummary {
        BallSummary {
            group: self.group.spec(),
            radius: self.radius,
            vertex_count: self.len(),
            sphere_sizes: self.sphere_sizes.clone(),
            vertices: with_neighbors.then(|| {
                self.vertices
                    .iter()
                    .map(|x| self.group.format_element(x))
                    .collect()
            }),
            neighbors: with_neighbors.then(|| {
                (0..self.len())
                    .map(|i| (0..self.degree()).map(|j| self.neighbor(i, j)).collect())
                    .collect()
            }),
        }
    }
}

/// Serializable view of a ball for the `ball` subcommand.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BallSummary {
    pub group: String,
    pub radius: u32,
    pub vertex_count: usize,
    pub sphere_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vertices: Option<Vec<String>>,
    /// `neighbors[i][j]` = index of `x_i·g_j^{-1}`, `null` outside the ball.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub neighbors: Option<Vec<Vec<Option<usize>>>>,
}

/// A finite subset `A` of a ball's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetView {
    members: Vec<bool>,
    count: usize,
}

impl SubsetView {
    pub fn empty(ball_len: usize) -> Self {
        SubsetView {
            members: vec![false; ball_len],
            count: 0,
        }
    }

    pub fn from_indices(ball_len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(ball_len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        if !self.members[i] {
            self.members[i] = true;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, i: usize) {
        if self.members[i] {
            self.members[i] = false;
            self.count -= 1;
        }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }
}

/// The vertex boundary `∂A = {x ∈ A : x·g ∉ A for some g ∈ S}`.
///
/// Targets outside the stored ball are not members of `A` (which lives in
/// the ball), so such `x` are counted as boundary points; nothing is clamped.
pub fn vertex_boundary(ball: &CayleyBall, a: &SubsetView) -> SubsetView {
    let mut out = SubsetView::empty(ball.len());
    for x in a.indices() {
        let exits = (0..ball.degree()).any(|j| match ball.forward(x, j) {
            Some(y) => !a.contains(y),
            None => true,
        });
        if exits {
            out.insert(x);
        }
    }
    out
}

/// `|∂A|` for a subset given by group elements, using group arithmetic only.
pub fn vertex_boundary_size(group: &GroupModel, a: &HashSet<GroupElement>) -> usize {
    a.iter()
        .filter(|x| {
            group
                .generators()
                .iter()
                .any(|g| !a.contains(&group.multiply(x, g)))
        })
        .count()
}

/// Number of directed pairs `(x, g)` with `x ∈ A`, `x·g ∉ A`.
pub fn directed_edge_boundary(group: &GroupModel, a: &HashSet<GroupElement>) -> usize {
    a.iter()
        .map(|x| {
            group
                .generators()
                .iter()
                .filter(|g| !a.contains(&group.multiply(x, g)))
                .count()
        })
        .sum()
}
