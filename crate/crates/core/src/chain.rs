//! Exact dependency treewidth by search over downward-closed sets.
//!
//! A downward-closed set is encoded by how many elements it takes from the
//! bottom of each chain of a minimum chain partition, so there are at most
//! `∏ (|W_j| + 1)` states. Growing a set by one poset-maximal element at a
//! time lists a linear extension of the poset; its reverse is an elimination
//! ordering, and the degree of the added element at its elimination time
//! depends only on the set it was added to.

use std::collections::HashSet;

use crate::decomp::EliminationOrdering;
use crate::error::{Error, Result};
use crate::graph::{PrimalGraph, VertexSet};
use crate::poset::DependencyPoset;
use crate::qbf::Var;

/// Number of vertices of `set ∖ {d}` adjacent to `d` or reachable from it
/// through vertices outside `set`.
pub(crate) fn backdegree_idx(g: &PrimalGraph, set: &VertexSet, d: usize) -> usize {
    let mut seen = g.empty_set();
    seen.insert(d);
    let mut stack = vec![d];
    let mut count = 0;
    while let Some(u) = stack.pop() {
        for w in g.neighbors(u).ones() {
            if seen.put(w) {
                continue;
            }
            if set.contains(w) {
                count += 1;
            } else {
                stack.push(w);
            }
        }
    }
    count
}

/// Degree of `d` when it is eliminated right after every vertex outside
/// `set`.
pub fn backdegree(g: &PrimalGraph, set: &[Var], d: Var) -> Result<usize> {
    let bits = g.set_of(set)?;
    let di = g.index_of_checked(d)?;
    if !bits.contains(di) {
        return Err(Error::Precondition(format!("{d} is not in the set")));
    }
    Ok(backdegree_idx(g, &bits, di))
}

pub struct ChainSearch<'a> {
    g: &'a PrimalGraph,
    p: &'a DependencyPoset,
    chains: Vec<Vec<usize>>,
    memoize: bool,
    states_visited: usize,
}

impl<'a> ChainSearch<'a> {
    pub fn new(g: &'a PrimalGraph, p: &'a DependencyPoset) -> Result<Self> {
        if g.vertices() != p.elements() {
            return Err(Error::ElementMismatch);
        }
        let chains = p
            .chain_partition()
            .chains
            .iter()
            .map(|c| c.iter().map(|&v| p.index_of(v).expect("own element")).collect())
            .collect();
        Ok(ChainSearch {
            g,
            p,
            chains,
            memoize: true,
            states_visited: 0,
        })
    }

    /// With memoization off every path through the state space is explored;
    /// only useful as a reference on tiny inputs.
    pub fn memoize(mut self, on: bool) -> Self {
        self.memoize = on;
        self
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    /// `∏ (|W_j| + 1)`, the number of chain-prefix codes.
    pub fn state_bound(&self) -> u128 {
        self.chains
            .iter()
            .map(|c| c.len() as u128 + 1)
            .fold(1u128, |acc, x| acc.saturating_mul(x))
    }

    /// States entered by the last call to [`ChainSearch::find`].
    pub fn states_visited(&self) -> usize {
        self.states_visited
    }

    /// An elimination ordering compatible with the poset of width at most
    /// `omega`, if one exists.
    pub fn find(&mut self, omega: usize) -> Option<EliminationOrdering> {
        self.states_visited = 0;
        let mut code = vec![0usize; self.chains.len()];
        let mut set = self.g.empty_set();
        let mut added = Vec::with_capacity(self.g.len());
        let mut dead = HashSet::new();
        if self.extend(omega, &mut code, &mut set, &mut added, &mut dead) {
            let order = added.iter().rev().map(|&i| self.g.var(i)).collect();
            Some(EliminationOrdering::new(order))
        } else {
            None
        }
    }

    fn extend(
        &mut self,
        omega: usize,
        code: &mut Vec<usize>,
        set: &mut VertexSet,
        added: &mut Vec<usize>,
        dead: &mut HashSet<Vec<usize>>,
    ) -> bool {
        if self.memoize && !dead.insert(code.clone()) {
            return false;
        }
        self.states_visited += 1;
        if added.len() == self.g.len() {
            return true;
        }
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for (j, chain) in self.chains.iter().enumerate() {
            if let Some(&next) = chain.get(code[j]) {
                if self.p.down_set(next).is_subset(set) {
                    candidates.push((next, j));
                }
            }
        }
        candidates.sort_unstable();
        for (next, j) in candidates {
            set.insert(next);
            if backdegree_idx(self.g, set, next) <= omega {
                code[j] += 1;
                added.push(next);
                if self.extend(omega, code, set, added, dead) {
                    return true;
                }
                added.pop();
                code[j] -= 1;
            }
            set.set(next, false);
        }
        false
    }
}

/// Convenience wrapper around [`ChainSearch::find`].
pub fn find_ordering_of_width(
    g: &PrimalGraph,
    p: &DependencyPoset,
    omega: usize,
) -> Result<Option<EliminationOrdering>> {
    Ok(ChainSearch::new(g, p)?.find(omega))
}

#[derive(Clone, Debug)]
pub struct ChainWidth {
    /// Minimum width, or `None` if it exceeds the cap.
    pub width: Option<usize>,
    pub ordering: Option<EliminationOrdering>,
    pub poset_width: usize,
    pub states_visited: usize,
}

/// Minimum width by ascending `ω = 0, 1, …` up to `max_width`.
pub fn min_width_via_chains_capped(
    g: &PrimalGraph,
    p: &DependencyPoset,
    max_width: usize,
) -> Result<ChainWidth> {
    let mut search = ChainSearch::new(g, p)?;
    let mut total = 0;
    for omega in 0..=max_width {
        let found = search.find(omega);
        total += search.states_visited();
        if let Some(ordering) = found {
            return Ok(ChainWidth {
                width: Some(omega),
                ordering: Some(ordering),
                poset_width: search.chain_count(),
                states_visited: total,
            });
        }
    }
    Ok(ChainWidth {
        width: None,
        ordering: None,
        poset_width: search.chain_count(),
        states_visited: total,
    })
}

/// Minimum width of a compatible elimination ordering, with a witness.
pub fn min_width_via_chains(g: &PrimalGraph, p: &DependencyPoset) -> Result<(usize, EliminationOrdering)> {
    let cap = g.len().saturating_sub(1);
    let res = min_width_via_chains_capped(g, p, cap)?;
    Ok((
        res.width.expect("every compatible ordering has width below n"),
        res.ordering.expect("present with width"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{check_compatibility, ordering_width};

    fn k3() -> PrimalGraph {
        PrimalGraph::from_edges([1, 2, 3], [(1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn backdegree_examples() {
        let path = PrimalGraph::from_edges([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        assert_eq!(backdegree(&path, &[1, 3], 1).unwrap(), 1);
        assert_eq!(backdegree(&path, &[2], 2).unwrap(), 0);
        assert_eq!(backdegree(&k3(), &[1, 2, 3], 3).unwrap(), 2);
        assert!(backdegree(&path, &[1], 3).is_err());
    }

    #[test]
    fn k3_linear() {
        let p = DependencyPoset::from_pairs([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let o = find_ordering_of_width(&k3(), &p, 2).unwrap().unwrap();
        assert_eq!(o.as_slice(), &[3, 2, 1]);
        assert!(find_ordering_of_width(&k3(), &p, 1).unwrap().is_none());
    }

    #[test]
    fn edgeless_is_zero() {
        let g = PrimalGraph::from_edges([1, 2, 3], []).unwrap();
        let p = DependencyPoset::from_pairs([1, 2, 3], [(2, 3)]).unwrap();
        let (w, o) = min_width_via_chains(&g, &p).unwrap();
        assert_eq!(w, 0);
        assert!(check_compatibility(&o, &p).unwrap());
        assert_eq!(ordering_width(&g, &o).unwrap(), 0);
    }

    #[test]
    fn empty_graph() {
        let g = PrimalGraph::from_edges([], []).unwrap();
        let p = DependencyPoset::discrete([]);
        let (w, o) = min_width_via_chains(&g, &p).unwrap();
        assert_eq!(w, 0);
        assert!(o.is_empty());
    }

    #[test]
    fn state_bound_holds() {
        let p = DependencyPoset::discrete([1, 2, 3]);
        let g = k3();
        let mut search = ChainSearch::new(&g, &p).unwrap();
        assert_eq!(search.state_bound(), 8);
        assert!(search.find(1).is_none());
        assert!(search.states_visited() as u128 <= search.state_bound());
    }
}
