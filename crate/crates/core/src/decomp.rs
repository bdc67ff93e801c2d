//! Elimination orderings, fill-in graphs and dependency tree decompositions,
//! with the conversions between orderings and decompositions.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{PrimalGraph, VertexSet};
use crate::poset::DependencyPoset;
use crate::qbf::Var;

/// A permutation of the graph vertices; the first entry is eliminated first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EliminationOrdering(Vec<Var>);

impl EliminationOrdering {
    pub fn new(order: Vec<Var>) -> Self {
        EliminationOrdering(order)
    }

    pub fn as_slice(&self) -> &[Var] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Var> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dense graph indices in elimination order, checking that the ordering
    /// is a permutation of the vertex set.
    pub fn indices(&self, g: &PrimalGraph) -> Result<Vec<usize>> {
        if self.0.len() != g.len() {
            return Err(Error::InvalidOrdering(format!(
                "{} entries for {} vertices",
                self.0.len(),
                g.len()
            )));
        }
        let mut seen = g.empty_set();
        let mut out = Vec::with_capacity(self.0.len());
        for &v in &self.0 {
            let i = g
                .index_of(v)
                .ok_or_else(|| Error::InvalidOrdering(format!("{v} is not a vertex")))?;
            if seen.put(i) {
                return Err(Error::InvalidOrdering(format!("{v} appears twice")));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// `positions[i]` is the step at which vertex index `i` is eliminated.
    pub fn positions(&self, g: &PrimalGraph) -> Result<Vec<usize>> {
        let idx = self.indices(g)?;
        let mut pos = vec![0; idx.len()];
        for (step, &i) in idx.iter().enumerate() {
            pos[i] = step;
        }
        Ok(pos)
    }
}

impl fmt::Display for EliminationOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("o")?;
        for v in &self.0 {
            write!(f, " {v}")?;
        }
        f.write_str(" 0")
    }
}

/// The primal graph plus the fill edges forced by an elimination ordering.
#[derive(Clone, Debug)]
pub struct FillInGraph {
    vertices: Vec<Var>,
    positions: Vec<usize>,
    adj: Vec<VertexSet>,
    fill_edges: Vec<(Var, Var)>,
}

impl FillInGraph {
    pub fn fill_edges(&self) -> &[(Var, Var)] {
        &self.fill_edges
    }

    pub fn neighbors_idx(&self, i: usize) -> &VertexSet {
        &self.adj[i]
    }

    /// Neighbors eliminated after vertex index `i`.
    pub fn later_neighbors_idx(&self, i: usize) -> VertexSet {
        let mut out = self.adj[i].clone();
        for j in self.adj[i].ones() {
            if self.positions[j] < self.positions[i] {
                out.set(j, false);
            }
        }
        out
    }

    pub fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    pub fn width(&self) -> usize {
        (0..self.vertices.len())
            .map(|i| self.later_neighbors_idx(i).count_ones(..))
            .max()
            .unwrap_or(0)
    }
}

/// Builds the fill-in graph by visiting vertices in elimination order and
/// turning the later neighbors of each into a clique.
pub fn fill_in_graph(g: &PrimalGraph, ordering: &EliminationOrdering) -> Result<FillInGraph> {
    let order = ordering.indices(g)?;
    let positions = ordering.positions(g)?;
    let mut adj: Vec<VertexSet> = (0..g.len()).map(|i| g.neighbors(i).clone()).collect();
    let mut fill_edges = Vec::new();
    for &v in &order {
        let later: Vec<usize> = adj[v]
            .ones()
            .filter(|&u| positions[u] > positions[v])
            .collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if !adj[x].contains(y) {
                    adj[x].insert(y);
                    adj[y].insert(x);
                    let (s, t) = (g.var(x).min(g.var(y)), g.var(x).max(g.var(y)));
                    fill_edges.push((s, t));
                }
            }
        }
    }
    fill_edges.sort_unstable();
    Ok(FillInGraph {
        vertices: g.vertices().to_vec(),
        positions,
        adj,
        fill_edges,
    })
}

/// Maximum number of later neighbors of any vertex in the fill-in graph.
pub fn ordering_width(g: &PrimalGraph, ordering: &EliminationOrdering) -> Result<usize> {
    Ok(fill_in_graph(g, ordering)?.width())
}

fn ensure_same_elements(g: &PrimalGraph, p: &DependencyPoset) -> Result<()> {
    if g.vertices() != p.elements() {
        return Err(Error::ElementMismatch);
    }
    Ok(())
}

/// First strict pair `u < v` of the poset with `u` eliminated before `v`.
fn first_violation(p: &DependencyPoset, ordering: &EliminationOrdering) -> Result<Option<(Var, Var)>> {
    let mut sorted = ordering.as_slice().to_vec();
    sorted.sort_unstable();
    let before = sorted.len();
    sorted.dedup();
    if sorted.len() != before || sorted.as_slice() != p.elements() {
        return Err(Error::ElementMismatch);
    }
    let mut pos = vec![0; p.len()];
    for (step, &v) in ordering.as_slice().iter().enumerate() {
        pos[p.index_of(v).expect("checked")] = step;
    }
    for u in 0..p.len() {
        for v in p.up_set(u).ones() {
            if pos[u] < pos[v] {
                return Ok(Some((p.var(u), p.var(v))));
            }
        }
    }
    Ok(None)
}

/// True iff the ordering is a linear extension of the reverse of `p`.
pub fn check_compatibility(ordering: &EliminationOrdering, p: &DependencyPoset) -> Result<bool> {
    Ok(first_violation(p, ordering)?.is_none())
}

pub(crate) fn require_compatible(ordering: &EliminationOrdering, p: &DependencyPoset) -> Result<()> {
    match first_violation(p, ordering)? {
        None => Ok(()),
        Some((earlier, later)) => Err(Error::Incompatible { later, earlier }),
    }
}

/// A rooted tree with a bag of variables on every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyTreeDecomposition {
    bags: Vec<Vec<Var>>,
    parent: Vec<Option<usize>>,
}

impl DependencyTreeDecomposition {
    /// Unchecked constructor; run [`validate_decomposition`] before trusting
    /// the result.
    pub fn new(bags: Vec<Vec<Var>>, parent: Vec<Option<usize>>) -> Self {
        assert_eq!(bags.len(), parent.len());
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        DependencyTreeDecomposition { bags, parent }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn bag(&self, node: usize) -> &[Var] {
        &self.bags[node]
    }

    pub fn bags(&self) -> &[Vec<Var>] {
        &self.bags
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                out[*p].push(c);
            }
        }
        out
    }

    /// Largest bag size minus one, zero when every bag is empty.
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Writes the `s td` text format with 1-based node ids.
    pub fn to_text(&self, num_vertices: usize) -> String {
        let mut out = String::new();
        writeln!(out, "s td {} {} {}", self.len(), self.max_bag_size(), num_vertices).unwrap();
        for (i, bag) in self.bags.iter().enumerate() {
            write!(out, "b {}", i + 1).unwrap();
            for v in bag {
                write!(out, " {v}").unwrap();
            }
            out.push_str(" 0\n");
        }
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                writeln!(out, "e {} {}", p + 1, c + 1).unwrap();
            }
        }
        if let Some(r) = self.root() {
            writeln!(out, "r {}", r + 1).unwrap();
        }
        out
    }

    /// Parses the `s td` format; lines starting with `c` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_nodes = None;
        let mut bags: Vec<Option<Vec<Var>>> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut root = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: idx + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let nums = |from: usize| -> Result<Vec<usize>> {
                fields[from..]
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|_| err("bad number")))
                    .collect()
            };
            let node = |id: usize, n: usize| -> Result<usize> {
                if id == 0 || id > n {
                    Err(err("node id out of range"))
                } else {
                    Ok(id - 1)
                }
            };
            match fields[0] {
                "s" => {
                    if fields.len() != 5 || fields[1] != "td" {
                        return Err(err("malformed `s td` header"));
                    }
                    let vals = nums(2)?;
                    n_nodes = Some(vals[0]);
                    bags = vec![None; vals[0]];
                    parent = vec![None; vals[0]];
                }
                "b" | "e" | "r" => {
                    let n = n_nodes.ok_or_else(|| err("data before header"))?;
                    let vals = nums(1)?;
                    match fields[0] {
                        "b" => {
                            if vals.len() < 2 || *vals.last().unwrap() != 0 {
                                return Err(err("bag line must end with 0"));
                            }
                            let id = node(vals[0], n)?;
                            let bag = vals[1..vals.len() - 1]
                                .iter()
                                .map(|&v| Var::try_from(v).map_err(|_| err("vertex id too large")))
                                .collect::<Result<Vec<Var>>>()?;
                            bags[id] = Some(bag);
                        }
                        "e" => {
                            if vals.len() != 2 {
                                return Err(err("edge line needs two node ids"));
                            }
                            let (p, c) = (node(vals[0], n)?, node(vals[1], n)?);
                            if parent[c].is_some() {
                                return Err(err("node has two parents"));
                            }
                            parent[c] = Some(p);
                        }
                        _ => {
                            if vals.len() != 1 {
                                return Err(err("root line needs one node id"));
                            }
                            root = Some(node(vals[0], n)?);
                        }
                    }
                }
                _ => return Err(err("unknown line type")),
            }
        }
        let bags: Vec<Vec<Var>> = bags
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                b.ok_or_else(|| Error::InvalidDecomposition(format!("node {} has no bag line", i + 1)))
            })
            .collect::<Result<_>>()?;
        let td = Self::new(bags, parent);
        if td.root() != root {
            return Err(Error::InvalidDecomposition("root line disagrees with edges".into()));
        }
        Ok(td)
    }
}

/// One violated property of a dependency tree decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Not a rooted tree, or a bag names an unknown vertex.
    Structure(String),
    /// Vertex in no bag.
    Uncovered(Var),
    /// Edge in no bag.
    EdgeUncovered(Var, Var),
    /// Nodes containing the vertex are not connected.
    Disconnected(Var),
    /// The topmost bag of `upper` is a strict ancestor of that of
    /// `lower`, yet `lower < upper` in the poset.
    Order { upper: Var, lower: Var },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Structure(msg) => write!(f, "structure: {msg}"),
            Violation::Uncovered(v) => write!(f, "vertex {v} is in no bag"),
            Violation::EdgeUncovered(u, v) => write!(f, "edge {u}-{v} is in no bag"),
            Violation::Disconnected(v) => write!(f, "bags containing {v} are not connected"),
            Violation::Order { upper, lower } => write!(
                f,
                "order: {upper} is introduced above {lower} but {lower} ≤ {upper}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionReport {
    pub violations: Vec<Violation>,
}

impl DecompositionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Depth-first entry/exit times for O(1) ancestor queries.
struct TreeIndex {
    enter: Vec<usize>,
    exit: Vec<usize>,
    depth: Vec<usize>,
}

impl TreeIndex {
    fn build(td: &DependencyTreeDecomposition, root: usize) -> Self {
        let children = td.children();
        let n = td.len();
        let mut enter = vec![0; n];
        let mut exit = vec![0; n];
        let mut depth = vec![0; n];
        let mut clock = 0;
        let mut stack = vec![(root, false)];
        while let Some((node, done)) = stack.pop() {
            if done {
                exit[node] = clock;
                clock += 1;
                continue;
            }
            enter[node] = clock;
            clock += 1;
            stack.push((node, true));
            for &c in children[node].iter().rev() {
                depth[c] = depth[node] + 1;
                stack.push((c, false));
            }
        }
        TreeIndex { enter, exit, depth }
    }

    fn is_strict_ancestor(&self, a: usize, b: usize) -> bool {
        a != b && self.enter[a] < self.enter[b] && self.exit[b] < self.exit[a]
    }
}

fn check_structure(td: &DependencyTreeDecomposition) -> std::result::Result<usize, String> {
    let n = td.len();
    if n == 0 {
        return Err("no nodes".into());
    }
    let roots: Vec<usize> = (0..n).filter(|&i| td.parent[i].is_none()).collect();
    if roots.len() != 1 {
        return Err(format!("{} roots", roots.len()));
    }
    for (i, p) in td.parent.iter().enumerate() {
        if let Some(p) = p {
            if *p >= n {
                return Err(format!("node {i} has out-of-range parent {p}"));
            }
        }
    }
    // every node must reach the root within n steps
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while let Some(p) = td.parent[cur] {
            cur = p;
            steps += 1;
            if steps > n {
                return Err(format!("node {start} lies on a cycle"));
            }
        }
    }
    Ok(roots[0])
}

/// Checks coverage, connectivity and poset order independently, collecting a witness for every violation.
pub fn validate_decomposition(
    g: &PrimalGraph,
    p: &DependencyPoset,
    td: &DependencyTreeDecomposition,
) -> DecompositionReport {
    let mut violations = Vec::new();
    let root = match check_structure(td) {
        Ok(r) => r,
        Err(msg) => {
            return DecompositionReport {
                violations: vec![Violation::Structure(msg)],
            }
        }
    };
    let mut bag_sets = Vec::with_capacity(td.len());
    for (i, bag) in td.bags.iter().enumerate() {
        let mut set = g.empty_set();
        for &v in bag {
            match g.index_of(v) {
                Some(x) => set.insert(x),
                None => violations.push(Violation::Structure(format!(
                    "bag {i} names unknown vertex {v}"
                ))),
            }
        }
        bag_sets.push(set);
    }
    if !violations.is_empty() {
        return DecompositionReport { violations };
    }

    for v in 0..g.len() {
        if !bag_sets.iter().any(|b| b.contains(v)) {
            violations.push(Violation::Uncovered(g.var(v)));
        }
    }
    for (u, v) in g.edges() {
        let (a, b) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
        if !bag_sets.iter().any(|s| s.contains(a) && s.contains(b)) {
            violations.push(Violation::EdgeUncovered(u, v));
        }
    }

    let index = TreeIndex::build(td, root);
    // a vertex's occurrence set is connected iff exactly one occurrence has
    // a parent not containing it
    let mut top: Vec<Option<usize>> = vec![None; g.len()];
    for (v, slot) in top.iter_mut().enumerate() {
        let heads: Vec<usize> = (0..td.len())
            .filter(|&t| {
                bag_sets[t].contains(v) && td.parent[t].is_none_or(|p| !bag_sets[p].contains(v))
            })
            .collect();
        if heads.len() > 1 {
            violations.push(Violation::Disconnected(g.var(v)));
        }
        *slot = heads.into_iter().min_by_key(|&t| index.depth[t]);
    }

    for u in 0..g.len() {
        for v in 0..g.len() {
            let (Some(tu), Some(tv)) = (top[u], top[v]) else {
                continue;
            };
            if index.is_strict_ancestor(tu, tv) && p.leq(g.var(v), g.var(u)) {
                violations.push(Violation::Order {
                    upper: g.var(u),
                    lower: g.var(v),
                });
            }
        }
    }
    DecompositionReport { violations }
}

/// Turns a compatible elimination ordering into a dependency tree
/// decomposition: walking the ordering backwards, each vertex gets a new leaf
/// holding itself and its later fill-in neighbors, attached below the most
/// recently created node that already covers those neighbors.
pub fn ordering_to_decomposition(
    g: &PrimalGraph,
    p: &DependencyPoset,
    ordering: &EliminationOrdering,
) -> Result<DependencyTreeDecomposition> {
    ensure_same_elements(g, p)?;
    require_compatible(ordering, p)?;
    let order = ordering.indices(g)?;
    if order.is_empty() {
        return Ok(DependencyTreeDecomposition::new(vec![Vec::new()], vec![None]));
    }
    let fill = fill_in_graph(g, ordering)?;
    let n = order.len();
    let mut bag_sets: Vec<VertexSet> = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut first = g.empty_set();
    first.insert(order[n - 1]);
    bag_sets.push(first);
    parent.push(None);
    for &v in order[..n - 1].iter().rev() {
        let later = fill.later_neighbors_idx(v);
        let attach = (0..bag_sets.len())
            .rev()
            .find(|&t| later.is_subset(&bag_sets[t]))
            .expect("later neighbors form a clique covered by some bag");
        let mut bag = later;
        bag.insert(v);
        bag_sets.push(bag);
        parent.push(Some(attach));
    }
    let bags = bag_sets.iter().map(|b| g.vars_of(b)).collect();
    Ok(DependencyTreeDecomposition::new(bags, parent))
}

/// Reads an elimination ordering off a valid decomposition: vertices whose
/// topmost bag lies deeper are eliminated first, poset-greater vertices
/// before smaller ones, remaining ties by ascending id.
pub fn decomposition_to_ordering(
    g: &PrimalGraph,
    p: &DependencyPoset,
    td: &DependencyTreeDecomposition,
) -> Result<EliminationOrdering> {
    ensure_same_elements(g, p)?;
    let report = validate_decomposition(g, p, td);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidDecomposition(v.to_string()));
    }
    let root = td.root().expect("validated");
    let index = TreeIndex::build(td, root);
    let n = g.len();
    let top: Vec<usize> = (0..n)
        .map(|v| {
            (0..td.len())
                .filter(|&t| td.bags[t].binary_search(&g.var(v)).is_ok())
                .min_by_key(|&t| index.depth[t])
                .unwrap_or(root)
        })
        .collect();
    // must_precede[a] holds b when a has to be eliminated before b
    let mut succ: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); n];
    for a in 0..n {
        for b in 0..n {
            if a != b && (index.is_strict_ancestor(top[b], top[a]) || p.lt_idx(b, a)) {
                succ[a].insert(b);
            }
        }
    }
    let mut indegree = vec![0usize; n];
    for row in &succ {
        for b in row.ones() {
            indegree[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(a)) = ready.pop() {
        order.push(g.var(a));
        for b in succ[a].ones() {
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.push(Reverse(b));
            }
        }
    }
    if order.len() != n {
        return Err(Error::InvalidDecomposition(
            "tree order and poset admit no common linear extension".into(),
        ));
    }
    Ok(EliminationOrdering::new(order))
}
