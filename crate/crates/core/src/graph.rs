//! Primal graphs over variable ids.
//!
//! Vertices are kept in ascending id order; algorithms address them by their
//! dense index into that order and use [`VertexSet`] bitsets over indices.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::qbf::{QbfInstance, Var};

/// A set of dense vertex indices.
pub type VertexSet = FixedBitSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalGraph {
    vertices: Vec<Var>,
    index: HashMap<Var, usize>,
    adj: Vec<VertexSet>,
}

impl PrimalGraph {
    /// Graph on `vertices` with the given edges. Self-loops are ignored;
    /// an edge naming an absent vertex is an error.
    pub fn from_edges(
        vertices: impl IntoIterator<Item = Var>,
        edges: impl IntoIterator<Item = (Var, Var)>,
    ) -> Result<Self> {
        let mut vertices: Vec<Var> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let index: HashMap<Var, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = vertices.len();
        let mut adj = vec![VertexSet::with_capacity(n); n];
        for (u, v) in edges {
            let iu = *index.get(&u).ok_or(Error::UnknownVariable(u))?;
            let iv = *index.get(&v).ok_or(Error::UnknownVariable(v))?;
            if iu != iv {
                adj[iu].insert(iv);
                adj[iv].insert(iu);
            }
        }
        Ok(PrimalGraph {
            vertices,
            index,
            adj,
        })
    }

    pub fn from_instance(instance: &QbfInstance) -> Self {
        let mut edges = Vec::new();
        for clause in instance.clauses() {
            let vars: Vec<Var> = clause.vars().collect();
            for (i, &u) in vars.iter().enumerate() {
                for &v in &vars[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(instance.vars(), edges).expect("clause variables are quantified")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Var] {
        &self.vertices
    }

    pub fn var(&self, index: usize) -> Var {
        self.vertices[index]
    }

    pub fn index_of(&self, var: Var) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn index_of_checked(&self, var: Var) -> Result<usize> {
        self.index_of(var).ok_or(Error::UnknownVariable(var))
    }

    pub fn neighbors(&self, index: usize) -> &VertexSet {
        &self.adj[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj[index].count_ones(..)
    }

    pub fn has_edge(&self, u: Var, v: Var) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.adj[a].contains(b),
            _ => false,
        }
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Var, Var)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for j in nbrs.ones().filter(|&j| j > i) {
                out.push((self.vertices[i], self.vertices[j]));
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones(..)).sum::<usize>() / 2
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> VertexSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, vars: &[Var]) -> Result<VertexSet> {
        let mut s = self.empty_set();
        for &v in vars {
            s.insert(self.index_of_checked(v)?);
        }
        Ok(s)
    }

    pub fn vars_of(&self, set: &VertexSet) -> Vec<Var> {
        set.ones().map(|i| self.vertices[i]).collect()
    }

    /// Vertices outside `set` with a neighbor inside it.
    pub fn guards_of(&self, set: &VertexSet) -> VertexSet {
        let mut out = self.empty_set();
        for i in set.ones() {
            out.union_with(&self.adj[i]);
        }
        out.difference_with(set);
        out
    }

    /// δ(S) by variable ids, ascending.
    pub fn guards(&self, vars: &[Var]) -> Result<Vec<Var>> {
        let set = self.set_of(vars)?;
        Ok(self.vars_of(&self.guards_of(&set)))
    }

    /// Connected components of the graph with `removed` deleted, ordered by
    /// their smallest member.
    pub fn components_without(&self, removed: &VertexSet) -> Vec<VertexSet> {
        let mut seen = removed.clone();
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for w in self.adj[u].ones() {
                    if !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<VertexSet> {
        self.components_without(&self.empty_set())
    }
}
