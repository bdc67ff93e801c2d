//! Dependency posets over the variables of an instance.
//!
//! The strict order is stored transitively closed as one up-set and one
//! down-set bitset per element, so comparability queries are O(1).

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::qbf::{QbfInstance, Var};

/// Default element cap for [`DependencyPoset::linear_extensions`].
pub const LINEAR_EXTENSION_BOUND: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyPoset {
    elements: Vec<Var>,
    index: HashMap<Var, usize>,
    above: Vec<FixedBitSet>,
    below: Vec<FixedBitSet>,
}

impl DependencyPoset {
    /// The reflexive-transitive closure of `pairs`, where `(u, v)` asserts
    /// `u ≤ v`. Rejects unknown elements and cycles among distinct elements.
    pub fn from_pairs(
        elements: impl IntoIterator<Item = Var>,
        pairs: impl IntoIterator<Item = (Var, Var)>,
    ) -> Result<Self> {
        let mut elements: Vec<Var> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        let n = elements.len();
        let index: HashMap<Var, usize> =
            elements.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut above = vec![FixedBitSet::with_capacity(n); n];
        for (u, v) in pairs {
            let iu = *index.get(&u).ok_or(Error::UnknownVariable(u))?;
            let iv = *index.get(&v).ok_or(Error::UnknownVariable(v))?;
            if iu != iv {
                above[iu].insert(iv);
            }
        }
        // Warshall closure on bit rows
        for k in 0..n {
            let row_k = above[k].clone();
            for row in above.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        for i in 0..n {
            if let Some(j) = above[i].ones().find(|&j| above[j].contains(i)) {
                return Err(Error::InvalidPoset(format!(
                    "cycle between {} and {}",
                    elements[i], elements[j]
                )));
            }
        }
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in above.iter().enumerate() {
            for j in row.ones() {
                below[j].insert(i);
            }
        }
        Ok(DependencyPoset {
            elements,
            index,
            above,
            below,
        })
    }

    /// Poset with no strict relations.
    pub fn discrete(elements: impl IntoIterator<Item = Var>) -> Self {
        Self::from_pairs(elements, []).expect("no pairs")
    }

    /// `x < y` whenever `x` lies in an earlier quantifier block than `y`.
    pub fn trivial(instance: &QbfInstance) -> Self {
        let vars = instance.vars();
        let mut pairs = Vec::new();
        for &x in &vars {
            for &y in &vars {
                if instance.block(x) < instance.block(y) {
                    pairs.push((x, y));
                }
            }
        }
        Self::from_pairs(vars, pairs).expect("block order is acyclic")
    }

    /// Parses a poset file: `#` comments and `u v` lines asserting `u ≤ v`.
    /// The result is closed and checked against the prefix of `instance`.
    pub fn parse(text: &str, instance: &QbfInstance) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err(format!("expected `u v`, got {line:?}")));
            }
            let parse_var = |s: &str| -> Result<Var> {
                let v: Var = s.parse().map_err(|_| err(format!("bad variable {s:?}")))?;
                if !instance.contains_var(v) {
                    return Err(err(format!("unknown variable {v}")));
                }
                Ok(v)
            };
            let u = parse_var(fields[0])?;
            let v = parse_var(fields[1])?;
            if u != v && instance.position(u) > instance.position(v) {
                return Err(err(format!("pair {u} {v}: {u} comes after {v} in the prefix")));
            }
            pairs.push((u, v));
        }
        let poset = Self::from_pairs(instance.vars(), pairs)?;
        poset.check_prefix(instance)?;
        Ok(poset)
    }

    /// Checks that the poset ranges over the instance variables and that
    /// every strict pair follows the prefix order.
    pub fn check_prefix(&self, instance: &QbfInstance) -> Result<()> {
        if self.elements != instance.vars() {
            return Err(Error::ElementMismatch);
        }
        for (u, v) in self.strict_pairs() {
            if instance.position(u) >= instance.position(v) {
                return Err(Error::InvalidPoset(format!(
                    "{u} ≤ {v} but {u} does not precede {v} in the prefix"
                )));
            }
        }
        Ok(())
    }

    /// Poset file text listing every strict pair, readable by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.strict_pairs() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Every relation flipped. Not prefix-respecting in general.
    pub fn reverse(&self) -> Self {
        DependencyPoset {
            elements: self.elements.clone(),
            index: self.index.clone(),
            above: self.below.clone(),
            below: self.above.clone(),
        }
    }

    pub fn elements(&self) -> &[Var] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, var: Var) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn var(&self, index: usize) -> Var {
        self.elements[index]
    }

    /// `u ≤ v`, reflexive. Unknown elements compare as unrelated.
    pub fn leq(&self, u: Var, v: Var) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => a == b || self.above[a].contains(b),
            _ => false,
        }
    }

    /// Strict `i < j` on dense indices.
    pub fn lt_idx(&self, i: usize, j: usize) -> bool {
        self.above[i].contains(j)
    }

    /// Elements strictly above `i`.
    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.above[i]
    }

    /// Elements strictly below `i`.
    pub fn down_set(&self, i: usize) -> &FixedBitSet {
        &self.below[i]
    }

    pub fn strict_pairs(&self) -> Vec<(Var, Var)> {
        let mut out = Vec::new();
        for (i, row) in self.above.iter().enumerate() {
            out.extend(row.ones().map(|j| (self.elements[i], self.elements[j])));
        }
        out
    }

    pub fn is_downward_closed(&self, set: &[Var]) -> Result<bool> {
        let mut bits = FixedBitSet::with_capacity(self.len());
        for &v in set {
            bits.insert(self.index_of(v).ok_or(Error::UnknownVariable(v))?);
        }
        Ok(self.is_down_closed_idx(&bits))
    }

    pub(crate) fn is_down_closed_idx(&self, set: &FixedBitSet) -> bool {
        set.ones().all(|i| self.below[i].is_subset(set))
    }

    /// Minimum chain partition via maximum bipartite matching on the strict
    /// order. Chains are listed bottom-up, ordered by their least element.
    pub fn chain_partition(&self) -> ChainPartition {
        let n = self.len();
        let mut match_left: Vec<Option<usize>> = vec![None; n];
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        for u in 0..n {
            let mut visited = FixedBitSet::with_capacity(n);
            self.augment(u, &mut visited, &mut match_left, &mut match_right);
        }
        let mut chains = Vec::new();
        for start in (0..n).filter(|&i| match_right[i].is_none()) {
            let mut chain = vec![self.elements[start]];
            let mut cur = start;
            while let Some(next) = match_left[cur] {
                chain.push(self.elements[next]);
                cur = next;
            }
            chains.push(chain);
        }
        ChainPartition { chains }
    }

    fn augment(
        &self,
        u: usize,
        visited: &mut FixedBitSet,
        match_left: &mut [Option<usize>],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for v in self.above[u].ones() {
            if visited.put(v) {
                continue;
            }
            let free = match match_right[v] {
                None => true,
                Some(w) => self.augment(w, visited, match_left, match_right),
            };
            if free {
                match_left[u] = Some(v);
                match_right[v] = Some(u);
                return true;
            }
        }
        false
    }

    /// Size of a largest antichain.
    pub fn width(&self) -> usize {
        self.chain_partition().chains.len()
    }

    /// Every linear extension, lexicographically by variable id. Refuses
    /// posets with more than `bound` elements.
    pub fn linear_extensions(&self, bound: usize) -> Result<LinearExtensions<'_>> {
        if self.len() > bound {
            return Err(Error::BoundExceeded {
                what: "poset",
                size: self.len(),
                bound,
            });
        }
        Ok(LinearExtensions {
            poset: self,
            current: Vec::new(),
            placed: FixedBitSet::with_capacity(self.len()),
            started: false,
            done: false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainPartition {
    pub chains: Vec<Vec<Var>>,
}

impl ChainPartition {
    pub fn width(&self) -> usize {
        self.chains.len()
    }
}

pub struct LinearExtensions<'a> {
    poset: &'a DependencyPoset,
    current: Vec<usize>,
    placed: FixedBitSet,
    started: bool,
    done: bool,
}

impl LinearExtensions<'_> {
    fn available(&self, i: usize) -> bool {
        !self.placed.contains(i) && self.poset.below[i].is_subset(&self.placed)
    }

    fn fill(&mut self) {
        while self.current.len() < self.poset.len() {
            let next = (0..self.poset.len())
                .find(|&i| self.available(i))
                .expect("an acyclic order always has a minimal element");
            self.placed.insert(next);
            self.current.push(next);
        }
    }
}

impl Iterator for LinearExtensions<'_> {
    type Item = Vec<Var>;

    fn next(&mut self) -> Option<Vec<Var>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
        } else {
            loop {
                let Some(last) = self.current.pop() else {
                    self.done = true;
                    return None;
                };
                self.placed.set(last, false);
                if let Some(alt) = (last + 1..self.poset.len()).find(|&i| self.available(i)) {
                    self.placed.insert(alt);
                    self.current.push(alt);
                    self.fill();
                    break;
                }
            }
        }
        Some(self.current.iter().map(|&i| self.poset.elements[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::parse_qdimacs;

    fn example() -> QbfInstance {
        parse_qdimacs("p cnf 3 2\ne 1 0\na 2 0\ne 3 0\n1 3 0\n2 3 0\n")
            .unwrap()
            .0
    }

    #[test]
    fn trivial_poset_of_example() {
        let p = DependencyPoset::trivial(&example());
        assert_eq!(p.strict_pairs(), vec![(1, 2), (1, 3), (2, 3)]);
        p.check_prefix(&example()).unwrap();
    }

    #[test]
    fn same_block_is_incomparable() {
        let (inst, _) = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 2 0\n").unwrap();
        let p = DependencyPoset::trivial(&inst);
        assert!(p.strict_pairs().is_empty());
    }

    #[test]
    fn parse_file_examples() {
        let inst = example();
        let p = DependencyPoset::parse("# refined\n2 3\n", &inst).unwrap();
        assert_eq!(p.strict_pairs(), vec![(2, 3)]);
        assert!(p.leq(1, 1));
        let empty = DependencyPoset::parse("", &inst).unwrap();
        assert!(empty.strict_pairs().is_empty());
        match DependencyPoset::parse("3 2\n", &inst) {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("3 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            DependencyPoset::parse("1 7\n", &inst),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn cycle_rejected() {
        let err = DependencyPoset::from_pairs([1, 2, 3], [(1, 2), (2, 3), (3, 1)]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoset(_)));
    }

    #[test]
    fn reverse_examples() {
        let p = DependencyPoset::from_pairs([1, 2], [(1, 2)]).unwrap();
        assert_eq!(p.reverse().strict_pairs(), vec![(2, 1)]);
        let d = DependencyPoset::discrete([1, 2, 3]);
        assert_eq!(d.reverse(), d);
        let t = DependencyPoset::trivial(&example()).reverse();
        assert!(t.leq(3, 2) && t.leq(2, 1) && t.leq(3, 1));
        assert!(!t.leq(1, 3));
    }

    #[test]
    fn chain_partition_examples() {
        let line = DependencyPoset::from_pairs([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        assert_eq!(line.chain_partition().chains, vec![vec![1, 2, 3]]);
        let anti = DependencyPoset::discrete([1, 2, 3]);
        assert_eq!(anti.width(), 3);
        let p = DependencyPoset::from_pairs([1, 2, 3], [(2, 3)]).unwrap();
        assert_eq!(p.chain_partition().chains, vec![vec![1], vec![2, 3]]);
    }

    #[test]
    fn downward_closed_examples() {
        let p = DependencyPoset::from_pairs([1, 2], [(1, 2)]).unwrap();
        assert!(p.is_downward_closed(&[1]).unwrap());
        assert!(!p.is_downward_closed(&[2]).unwrap());
        let t = DependencyPoset::trivial(&example());
        assert!(t.is_downward_closed(&[1, 2]).unwrap());
        assert!(t.is_downward_closed(&[]).unwrap());
    }

    #[test]
    fn linear_extension_examples() {
        let line = DependencyPoset::from_pairs([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let all: Vec<_> = line.linear_extensions(10).unwrap().collect();
        assert_eq!(all, vec![vec![1, 2, 3]]);
        let anti = DependencyPoset::discrete([1, 2]);
        let all: Vec<_> = anti.linear_extensions(10).unwrap().collect();
        assert_eq!(all, vec![vec![1, 2], vec![2, 1]]);
        let p = DependencyPoset::from_pairs([1, 2, 3], [(2, 3)]).unwrap();
        let all: Vec<_> = p.linear_extensions(10).unwrap().collect();
        assert_eq!(all, vec![vec![1, 2, 3], vec![2, 1, 3], vec![2, 3, 1]]);
        let empty = DependencyPoset::discrete([]);
        assert_eq!(empty.linear_extensions(10).unwrap().count(), 1);
    }

    #[test]
    fn linear_extension_bound() {
        let big = DependencyPoset::discrete(1..=11);
        assert!(matches!(
            big.linear_extensions(LINEAR_EXTENSION_BOUND),
            Err(Error::BoundExceeded { size: 11, .. })
        ));
    }
}
