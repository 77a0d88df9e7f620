//! Signed graphs of influence patterns and structural balance.
//!
//! A signed graph is structurally balanced when its nodes split into two
//! camps with only positive edges inside a camp and only negative edges
//! across. Deciding it is a two-coloring where a negative edge forces
//! opposite colors and a positive edge forces equal ones.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SignMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("sign matrix is not symmetric at ({i}, {j})")]
    AsymmetricInput { i: usize, j: usize },
    #[error("invalid edge ({i}, {j}, {sign}) on {n} nodes")]
    InvalidEdge { i: usize, j: usize, sign: i8, n: usize },
    #[error("duplicate edge between {i} and {j}")]
    DuplicateEdge { i: usize, j: usize },
}

/// Undirected edge with `i < j` and sign `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedEdge {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<SignedEdge>,
    /// Per node, `(neighbor, sign)` in ascending neighbor order.
    adjacency: Vec<Vec<(usize, i8)>>,
}

impl SignedGraph {
    /// Edges are the nonzero off-diagonal entries; self-loops are dropped.
    pub fn from_sign_matrix(signs: &SignMatrix) -> Result<Self, GraphError> {
        let n = signs.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let s = signs.get(i, j);
                if s != signs.get(j, i) {
                    return Err(GraphError::AsymmetricInput { i, j });
                }
                if s != 0 {
                    edges.push(SignedEdge { i, j, sign: s });
                }
            }
        }
        Self::from_edges(n, edges)
    }

    /// Accepts edges in either orientation; rejects loops, zero signs and
    /// repeated pairs.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = SignedEdge>,
    ) -> Result<Self, GraphError> {
        let mut norm = Vec::new();
        for e in edges {
            if e.i == e.j || e.i >= n || e.j >= n || !(e.sign == 1 || e.sign == -1) {
                return Err(GraphError::InvalidEdge { i: e.i, j: e.j, sign: e.sign, n });
            }
            norm.push(SignedEdge { i: e.i.min(e.j), j: e.i.max(e.j), sign: e.sign });
        }
        norm.sort();
        if let Some(w) = norm.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(GraphError::DuplicateEdge { i: w[0].i, j: w[0].j });
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &norm {
            adjacency[e.i].push((e.j, e.sign));
            adjacency[e.j].push((e.i, e.sign));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Self { n, edges: norm, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges sorted by `(i, j)`.
    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    /// Undirected DOT: solid edges for `+`, dashed for `-`, nodes labelled
    /// `1..=n`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph \"{}\" {{", name.replace('"', "\\\""));
        for v in 1..=self.n {
            let _ = writeln!(out, "  {v} [label=\"{v}\"];");
        }
        for e in &self.edges {
            let (style, label) = if e.sign > 0 { ("solid", "+") } else { ("dashed", "-") };
            let _ = writeln!(
                out,
                "  {} -- {} [style={style}, label=\"{label}\"];",
                e.i + 1,
                e.j + 1
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn across(self, sign: i8) -> Self {
        if sign > 0 {
            self
        } else {
            self.flip()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BalancePartition {
    pub side: Vec<Side>,
}

impl BalancePartition {
    pub fn members(&self, s: Side) -> Vec<usize> {
        (0..self.side.len()).filter(|&v| self.side[v] == s).collect()
    }

    /// Whether every edge of `g` respects this split.
    pub fn respects(&self, g: &SignedGraph) -> bool {
        g.edges().iter().all(|e| self.side[e.j] == self.side[e.i].across(e.sign))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Balance {
    Balanced(BalancePartition),
    /// `conflict` is the edge whose constraint failed against the sides
    /// assigned so far (`partial`; `None` for nodes not reached yet).
    Unbalanced {
        conflict: SignedEdge,
        partial: Vec<Option<Side>>,
    },
}

impl Balance {
    pub fn is_balanced(&self) -> bool {
        matches!(self, Balance::Balanced(_))
    }

    pub fn partition(&self) -> Option<&BalancePartition> {
        match self {
            Balance::Balanced(p) => Some(p),
            Balance::Unbalanced { .. } => None,
        }
    }
}

/// Breadth-first two-coloring. Each component is seeded from its lowest
/// node on side `A`; neighbors are visited in ascending order, so the result
/// is deterministic. Components are decided independently.
pub fn is_structurally_balanced(g: &SignedGraph) -> Balance {
    let mut side: Vec<Option<Side>> = vec![None; g.n];
    let mut queue = VecDeque::new();
    for seed in 0..g.n {
        if side[seed].is_some() {
            continue;
        }
        side[seed] = Some(Side::A);
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            let su = side[u].expect("queued nodes are colored");
            for &(v, sign) in &g.adjacency[u] {
                let want = su.across(sign);
                match side[v] {
                    None => {
                        side[v] = Some(want);
                        queue.push_back(v);
                    }
                    Some(sv) if sv != want => {
                        return Balance::Unbalanced {
                            conflict: SignedEdge { i: u.min(v), j: u.max(v), sign },
                            partial: side,
                        };
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Balance::Balanced(BalancePartition {
        side: side.into_iter().map(|s| s.expect("every node seeded")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, j: usize, sign: i8) -> SignedEdge {
        SignedEdge { i, j, sign }
    }

    fn triangle(s01: i8, s12: i8, s02: i8) -> SignedGraph {
        SignedGraph::from_edges(3, [e(0, 1, s01), e(1, 2, s12), e(0, 2, s02)]).unwrap()
    }

    /// Brute force over all 2^n splits.
    fn brute_force(g: &SignedGraph) -> Vec<u32> {
        (0..1u32 << g.n())
            .filter(|mask| {
                g.edges().iter().all(|e| {
                    let same = (mask >> e.i & 1) == (mask >> e.j & 1);
                    same == (e.sign > 0)
                })
            })
            .collect()
    }

    #[test]
    fn from_sign_matrix_reads_off_diagonal() {
        let s = SignMatrix::from_rows(&[vec![1, -1], vec![-1, 1]]).unwrap();
        let g = SignedGraph::from_sign_matrix(&s).unwrap();
        assert_eq!(g.edges(), &[e(0, 1, -1)]);
        let g = SignedGraph::from_sign_matrix(&SignMatrix::identity(4)).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.n(), 4);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let s = SignMatrix::from_rows(&[vec![1, 1], vec![-1, 1]]).unwrap();
        assert_eq!(
            SignedGraph::from_sign_matrix(&s),
            Err(GraphError::AsymmetricInput { i: 0, j: 1 })
        );
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(SignedGraph::from_edges(2, [e(0, 0, 1)]).is_err());
        assert!(SignedGraph::from_edges(2, [e(0, 2, 1)]).is_err());
        assert!(SignedGraph::from_edges(2, [e(0, 1, 0)]).is_err());
        assert_eq!(
            SignedGraph::from_edges(2, [e(0, 1, 1), e(1, 0, -1)]),
            Err(GraphError::DuplicateEdge { i: 0, j: 1 })
        );
    }

    #[test]
    fn canonical_triangles() {
        let b = is_structurally_balanced(&triangle(1, 1, 1));
        let p = b.partition().unwrap();
        assert_eq!(p.members(Side::A), vec![0, 1, 2]);
        assert!(p.members(Side::B).is_empty());

        let b = is_structurally_balanced(&triangle(1, 1, -1));
        assert!(!b.is_balanced());

        // Negative edges 0-1 and 1-2: node 1 alone.
        let g = triangle(-1, -1, 1);
        let b = is_structurally_balanced(&g);
        let p = b.partition().unwrap();
        assert_eq!(p.members(Side::A), vec![0, 2]);
        assert_eq!(p.members(Side::B), vec![1]);
        // Exactly one split up to swapping the camps.
        assert_eq!(brute_force(&g), vec![0b010, 0b101]);
    }

    #[test]
    fn conflict_witness_violates_partial_assignment() {
        let g = SignedGraph::from_edges(
            5,
            [e(0, 1, 1), e(1, 2, -1), e(2, 3, 1), e(3, 0, 1), e(3, 4, -1)],
        )
        .unwrap();
        match is_structurally_balanced(&g) {
            Balance::Unbalanced { conflict, partial } => {
                let (a, b) = (partial[conflict.i].unwrap(), partial[conflict.j].unwrap());
                assert_ne!(b, a.across(conflict.sign));
                assert!(g.edges().contains(&conflict));
            }
            Balance::Balanced(_) => panic!("odd negative cycle must be unbalanced"),
        }
    }

    #[test]
    fn components_seeded_independently() {
        let g = SignedGraph::from_edges(5, [e(0, 1, -1), e(3, 4, -1)]).unwrap();
        let p = is_structurally_balanced(&g).partition().cloned().unwrap();
        assert_eq!(p.side, vec![Side::A, Side::B, Side::A, Side::A, Side::B]);
        assert!(p.respects(&g));
    }

    #[test]
    fn deterministic() {
        let g = SignedGraph::from_edges(4, [e(2, 3, -1), e(0, 3, 1), e(1, 2, 1)]).unwrap();
        let a = is_structurally_balanced(&g);
        for _ in 0..10 {
            assert_eq!(is_structurally_balanced(&g), a);
        }
    }

    #[test]
    fn dot_output() {
        let g = triangle(1, -1, 1);
        let dot = g.to_dot("w");
        assert_eq!(
            dot,
            "graph \"w\" {\n  1 [label=\"1\"];\n  2 [label=\"2\"];\n  3 [label=\"3\"];\n  \
             1 -- 2 [style=solid, label=\"+\"];\n  1 -- 3 [style=solid, label=\"+\"];\n  \
             2 -- 3 [style=dashed, label=\"-\"];\n}\n"
        );
    }
}
