//! The dependency cops-and-robber game.
//!
//! For a fixed number of cops the game is unfolded into a bipartite arena
//! whose robber-owned sinks are captures. The cop player's winning region is
//! the attractor of those sinks; a memoryless winning strategy unfolds into a
//! strategy tree, which converts into a dependency tree decomposition and
//! back.

use std::collections::HashMap;

use crate::decomp::{
    decomposition_to_ordering, validate_decomposition, DependencyTreeDecomposition,
    EliminationOrdering,
};
use crate::error::{Error, Result};
use crate::graph::{PrimalGraph, VertexSet};
use crate::poset::DependencyPoset;
use crate::qbf::Var;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CopPosition {
    pub cops: VertexSet,
    pub robber: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RobberPosition {
    pub cops: VertexSet,
    pub next_cops: VertexSet,
    pub robber: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArenaNode {
    /// Robber-owned; moves to `(∅, R)` for each component `R`.
    Start,
    Cop(CopPosition),
    Robber(RobberPosition),
}

impl ArenaNode {
    pub fn is_cop_owned(&self) -> bool {
        matches!(self, ArenaNode::Cop(_))
    }
}

/// Positions reachable from the start node. Node 0 is the start.
#[derive(Clone, Debug)]
pub struct Arena {
    pub cops: usize,
    pub nodes: Vec<ArenaNode>,
    pub succ: Vec<Vec<usize>>,
}

impl Arena {
    pub const START: usize = 0;

    pub fn num_cop_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_cop_owned()).count()
    }

    pub fn num_robber_nodes(&self) -> usize {
        self.nodes.len() - self.num_cop_nodes()
    }

    pub fn num_arcs(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }
}

fn new_cops_down_closed(p: &DependencyPoset, cops: &VertexSet, next: &VertexSet, robber: &VertexSet) -> bool {
    let mut free = robber.clone();
    free.difference_with(next);
    next.ones()
        .filter(|&c| !cops.contains(c))
        .all(|c| p.down_set(c).is_disjoint(&free))
}

fn legal_idx(
    g: &PrimalGraph,
    p: &DependencyPoset,
    from: &CopPosition,
    to: &CopPosition,
) -> bool {
    let Some(r0) = from.robber.minimum() else {
        return false;
    };
    // guards of the robber space stay occupied
    if !g.guards_of(&from.robber).is_subset(&to.cops) {
        return false;
    }
    // new cops form a down-set within the robber space
    if !new_cops_down_closed(p, &from.cops, &to.cops, &from.robber) {
        return false;
    }
    // the robber stays in its region of G minus the cops that stay
    if to.robber.is_clear() {
        return from.robber.is_subset(&to.cops);
    }
    let mut kept = from.cops.clone();
    kept.intersect_with(&to.cops);
    g.components_without(&kept)
        .into_iter()
        .find(|c| c.contains(r0))
        .is_some_and(|c| to.robber.is_subset(&c))
}

fn ensure_same_elements(g: &PrimalGraph, p: &DependencyPoset) -> Result<()> {
    if g.vertices() != p.elements() {
        return Err(Error::ElementMismatch);
    }
    Ok(())
}

/// Whether moving from `(C, R)` to `(C', R')` is a legal monotone dependency move.
/// An empty `R'` stands for capture and requires `R ⊆ C'`.
pub fn is_legal_move(
    g: &PrimalGraph,
    p: &DependencyPoset,
    from: (&[Var], &[Var]),
    to: (&[Var], &[Var]),
) -> Result<bool> {
    ensure_same_elements(g, p)?;
    let from = CopPosition {
        cops: g.set_of(from.0)?,
        robber: g.set_of(from.1)?,
    };
    let to = CopPosition {
        cops: g.set_of(to.0)?,
        robber: g.set_of(to.1)?,
    };
    Ok(legal_idx(g, p, &from, &to))
}

/// Calls `f` on every subset of `items` with at most `max` members, by
/// increasing size and lexicographically within a size.
fn for_each_subset(items: &[usize], max: usize, mut f: impl FnMut(&[usize])) {
    let mut chosen = Vec::new();
    for size in 0..=max.min(items.len()) {
        fn rec(items: &[usize], start: usize, size: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
            if chosen.len() == size {
                f(chosen);
                return;
            }
            let need = size - chosen.len();
            for i in start..=items.len() - need {
                chosen.push(items[i]);
                rec(items, i + 1, size, chosen, f);
                chosen.pop();
            }
        }
        rec(items, 0, size, &mut chosen, &mut f);
    }
}

/// Builds the arena for `cops` cops, generating only positions reachable
/// from the start. Candidate cop sets are `δ(R) ∪ S` for down-closed
/// `S ⊆ R`.
pub fn build_arena(g: &PrimalGraph, p: &DependencyPoset, cops: usize) -> Result<Arena> {
    ensure_same_elements(g, p)?;
    if cops == 0 {
        return Err(Error::Precondition("at least one cop is required".into()));
    }
    let mut nodes = vec![ArenaNode::Start];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut ids: HashMap<ArenaNode, usize> = HashMap::new();
    ids.insert(ArenaNode::Start, Arena::START);

    let mut intern = |node: ArenaNode, nodes: &mut Vec<ArenaNode>, succ: &mut Vec<Vec<usize>>, queue: &mut Vec<usize>| -> usize {
        if let Some(&id) = ids.get(&node) {
            return id;
        }
        let id = nodes.len();
        ids.insert(node.clone(), id);
        nodes.push(node);
        succ.push(Vec::new());
        queue.push(id);
        id
    };

    let mut queue = Vec::new();
    for comp in g.components() {
        let node = ArenaNode::Cop(CopPosition {
            cops: g.empty_set(),
            robber: comp,
        });
        let id = intern(node, &mut nodes, &mut succ, &mut queue);
        succ[Arena::START].push(id);
    }

    let mut head = 0;
    while head < queue.len() {
        let id = queue[head];
        head += 1;
        let mut out = Vec::new();
        match nodes[id].clone() {
            ArenaNode::Start => unreachable!(),
            ArenaNode::Cop(pos) => {
                let guards = g.guards_of(&pos.robber);
                let fixed = guards.count_ones(..);
                if fixed <= cops {
                    let members: Vec<usize> = pos.robber.ones().collect();
                    let mut candidates = Vec::new();
                    for_each_subset(&members, cops - fixed, |s| {
                        let mut next = guards.clone();
                        next.extend(s.iter().copied());
                        if new_cops_down_closed(p, &pos.cops, &next, &pos.robber) {
                            candidates.push(next);
                        }
                    });
                    for next in candidates {
                        let node = ArenaNode::Robber(RobberPosition {
                            cops: pos.cops.clone(),
                            next_cops: next,
                            robber: pos.robber.clone(),
                        });
                        out.push(intern(node, &mut nodes, &mut succ, &mut queue));
                    }
                }
            }
            ArenaNode::Robber(pos) => {
                // δ(R) ⊆ C', so every component of G ∖ C' meeting R lies in R
                for comp in g.components_without(&pos.next_cops) {
                    if comp.is_subset(&pos.robber) {
                        let node = ArenaNode::Cop(CopPosition {
                            cops: pos.next_cops.clone(),
                            robber: comp,
                        });
                        out.push(intern(node, &mut nodes, &mut succ, &mut queue));
                    }
                }
            }
        }
        succ[id] = out;
    }
    Ok(Arena { cops, nodes, succ })
}

/// Winning region of the cop player with attractor ranks and a memoryless
/// strategy.
#[derive(Clone, Debug)]
pub struct GameSolution {
    pub winning: Vec<bool>,
    /// Attractor round in which the node joined the winning region.
    pub rank: Vec<Option<usize>>,
    /// For cop-owned winning nodes, a winning successor of smaller rank.
    pub strategy: Vec<Option<usize>>,
}

impl GameSolution {
    pub fn cop_wins(&self) -> bool {
        self.winning[Arena::START]
    }
}

/// Attractor computation in time linear in nodes plus arcs. Robber-owned
/// sinks form round 0; a cop node joins with its first winning successor, a
/// robber node once all its successors have joined.
pub fn solve_game(arena: &Arena) -> GameSolution {
    let n = arena.nodes.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, outs) in arena.succ.iter().enumerate() {
        for &w in outs {
            pred[w].push(v);
        }
    }
    let mut pending: Vec<usize> = arena.succ.iter().map(Vec::len).collect();
    let mut winning = vec![false; n];
    let mut rank = vec![None; n];
    let mut frontier: Vec<usize> = (0..n)
        .filter(|&v| !arena.nodes[v].is_cop_owned() && arena.succ[v].is_empty())
        .collect();
    for &v in &frontier {
        winning[v] = true;
        rank[v] = Some(0);
    }
    let mut round = 0;
    while !frontier.is_empty() {
        round += 1;
        let mut next = Vec::new();
        for &w in &frontier {
            for &v in &pred[w] {
                if winning[v] {
                    continue;
                }
                let joins = if arena.nodes[v].is_cop_owned() {
                    true
                } else {
                    pending[v] -= 1;
                    pending[v] == 0
                };
                if joins {
                    winning[v] = true;
                    rank[v] = Some(round);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    let strategy = (0..n)
        .map(|v| {
            if !(winning[v] && arena.nodes[v].is_cop_owned()) {
                return None;
            }
            arena.succ[v]
                .iter()
                .copied()
                .filter(|&w| winning[w])
                .min_by_key(|&w| rank[w])
        })
        .collect();
    GameSolution {
        winning,
        rank,
        strategy,
    }
}

/// A cop strategy as a rooted tree: `alpha[t]` are the cops at node `t`,
/// `beta[t]` the robber space labelling the edge from `t`'s parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTree {
    pub alpha: Vec<Vec<Var>>,
    pub beta: Vec<Vec<Var>>,
    pub parent: Vec<Option<usize>>,
}

impl StrategyTree {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
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

    /// Maximum number of cops placed at once.
    pub fn max_cops(&self) -> usize {
        self.alpha.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Unfolds the memoryless cop strategy from the start node. Ranks strictly
/// decrease along every branch, so the unfolding is finite.
pub fn extract_strategy(arena: &Arena, solution: &GameSolution, g: &PrimalGraph) -> Result<StrategyTree> {
    if !solution.cop_wins() {
        return Err(Error::RobberWins);
    }
    let mut tree = StrategyTree {
        alpha: vec![Vec::new()],
        beta: vec![Vec::new()],
        parent: vec![None],
    };
    let mut stack: Vec<(usize, usize)> = arena.succ[Arena::START]
        .iter()
        .rev()
        .map(|&cop_node| (cop_node, 0))
        .collect();
    while let Some((cop_node, parent)) = stack.pop() {
        let ArenaNode::Cop(pos) = &arena.nodes[cop_node] else {
            unreachable!("robber moves lead to cop positions");
        };
        let robber_node = solution.strategy[cop_node].expect("winning cop node has a strategy");
        let ArenaNode::Robber(choice) = &arena.nodes[robber_node] else {
            unreachable!("cop moves lead to robber positions");
        };
        let id = tree.len();
        tree.alpha.push(g.vars_of(&choice.next_cops));
        tree.beta.push(g.vars_of(&pos.robber));
        tree.parent.push(Some(parent));
        for &next in arena.succ[robber_node].iter().rev() {
            stack.push((next, id));
        }
    }
    Ok(tree)
}

/// Checks that the root is empty, that children match robber components
/// and that every move, including moves into leaves, is legal.
pub fn validate_strategy(g: &PrimalGraph, p: &DependencyPoset, s: &StrategyTree) -> Vec<String> {
    let mut problems = Vec::new();
    let n = s.len();
    if n == 0 || s.parent.iter().filter(|x| x.is_none()).count() != 1 || s.parent[0].is_some() {
        return vec!["node 0 must be the unique root".into()];
    }
    let set = |vars: &[Var]| g.set_of(vars);
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for t in 0..n {
        match (set(&s.alpha[t]), set(&s.beta[t])) {
            (Ok(a), Ok(b)) => {
                alpha.push(a);
                beta.push(b);
            }
            _ => return vec![format!("node {t} names an unknown vertex")],
        }
    }
    let children = s.children();
    if !alpha[0].is_clear() {
        problems.push("root carries cops".into());
    }
    let check_children = |t: usize, space: &VertexSet, problems: &mut Vec<String>| {
        let mut expected: Vec<VertexSet> = g
            .components_without(&alpha[t])
            .into_iter()
            .filter(|c| c.is_subset(space))
            .collect();
        let mut got: Vec<VertexSet> = children[t].iter().map(|&c| beta[c].clone()).collect();
        expected.sort_by_key(|c| c.minimum());
        got.sort_by_key(|c| c.minimum());
        if expected != got {
            problems.push(format!(
                "node {t}: children do not match the components of G \\ alpha inside the robber space"
            ));
        }
    };
    check_children(0, &g.full_set(), &mut problems);
    for t in 1..n {
        let p_node = s.parent[t].expect("non-root");
        let from = CopPosition {
            cops: alpha[p_node].clone(),
            robber: beta[t].clone(),
        };
        let is_component = g.components_without(&from.cops).contains(&from.robber);
        if !is_component {
            problems.push(format!("node {t}: beta is not a component of G \\ alpha(parent)"));
            continue;
        }
        check_children(t, &beta[t], &mut problems);
        if children[t].is_empty() {
            let caught = CopPosition {
                cops: alpha[t].clone(),
                robber: g.empty_set(),
            };
            if !legal_idx(g, p, &from, &caught) {
                problems.push(format!("node {t}: final move is illegal"));
            }
        }
        for &c in &children[t] {
            let to = CopPosition {
                cops: alpha[t].clone(),
                robber: beta[c].clone(),
            };
            if !legal_idx(g, p, &from, &to) {
                problems.push(format!("move from node {p_node} via {t} to {c} is illegal"));
            }
        }
    }
    problems
}

/// Bags are the cop sets, after shrinking each to the robber space plus
/// its guards.
pub fn strategy_to_decomposition(
    s: &StrategyTree,
    g: &PrimalGraph,
    p: &DependencyPoset,
) -> Result<DependencyTreeDecomposition> {
    ensure_same_elements(g, p)?;
    let problems = validate_strategy(g, p, s);
    if let Some(first) = problems.into_iter().next() {
        return Err(Error::InvalidStrategy(first));
    }
    let mut bags = Vec::with_capacity(s.len());
    for t in 0..s.len() {
        if s.parent[t].is_none() {
            bags.push(Vec::new());
            continue;
        }
        let space = g.set_of(&s.beta[t])?;
        let mut keep = g.guards_of(&space);
        keep.union_with(&space);
        let mut bag = g.set_of(&s.alpha[t])?;
        bag.intersect_with(&keep);
        bags.push(g.vars_of(&bag));
    }
    let td = DependencyTreeDecomposition::new(bags, s.parent.clone());
    if let Some(v) = validate_decomposition(g, p, &td).violations.first() {
        return Err(Error::InvalidStrategy(format!("converted decomposition fails: {v}")));
    }
    Ok(td)
}

/// Normalizes the decomposition to have an empty root bag and children
/// covering exactly one component below their parent's bag, then reads off
/// the strategy.
pub fn decomposition_to_strategy(
    td: &DependencyTreeDecomposition,
    g: &PrimalGraph,
    p: &DependencyPoset,
) -> Result<StrategyTree> {
    ensure_same_elements(g, p)?;
    if let Some(v) = validate_decomposition(g, p, td).violations.first() {
        return Err(Error::InvalidDecomposition(v.to_string()));
    }
    let children = td.children();
    let root = td.root().expect("validated");
    let bag_sets: Vec<VertexSet> = td
        .bags()
        .iter()
        .map(|b| g.set_of(b))
        .collect::<Result<_>>()?;
    // union of bags in each original subtree, children before parents
    let mut subtree = bag_sets.clone();
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        order.extend(children[order[i]].iter().copied());
        i += 1;
    }
    for &t in order.iter().rev() {
        for &c in &children[t] {
            let below = subtree[c].clone();
            subtree[t].union_with(&below);
        }
    }

    let mut tree = StrategyTree {
        alpha: vec![Vec::new()],
        beta: vec![Vec::new()],
        parent: vec![None],
    };
    // (original subtree root, allowed vertices, new parent, new parent's bag)
    let mut stack = vec![(root, g.full_set(), 0usize, g.empty_set())];
    while let Some((orig, allowed, new_parent, parent_bag)) = stack.pop() {
        let mut below = subtree[orig].clone();
        below.intersect_with(&allowed);
        below.difference_with(&parent_bag);
        for comp in g.components_without(&parent_bag) {
            if comp.is_disjoint(&below) {
                continue;
            }
            let mut restricted = comp.clone();
            restricted.union_with(&parent_bag);
            restricted.intersect_with(&allowed);
            let mut bag = bag_sets[orig].clone();
            bag.intersect_with(&restricted);
            let id = tree.len();
            tree.alpha.push(g.vars_of(&bag));
            tree.beta.push(g.vars_of(&comp));
            tree.parent.push(Some(new_parent));
            for &c in children[orig].iter().rev() {
                stack.push((c, restricted.clone(), id, bag.clone()));
            }
        }
    }
    let problems = validate_strategy(g, p, &tree);
    if let Some(first) = problems.into_iter().next() {
        return Err(Error::InvalidDecomposition(format!("normalization failed: {first}")));
    }
    Ok(tree)
}

/// Result of the ascending search over cop numbers.
#[derive(Clone, Debug)]
pub struct GameWidth {
    /// Dependency treewidth, or `None` if more than `max_width + 1` cops
    /// are needed.
    pub width: Option<usize>,
    pub strategy: Option<StrategyTree>,
    pub decomposition: Option<DependencyTreeDecomposition>,
    pub ordering: Option<EliminationOrdering>,
    /// Arena sizes (nodes, arcs) per cop count tried.
    pub arenas: Vec<(usize, usize)>,
}

/// Tries 1, 2, … , `max_width + 1` cops and stops at the first win.
pub fn treewidth_via_game(g: &PrimalGraph, p: &DependencyPoset, max_width: usize) -> Result<GameWidth> {
    let mut arenas = Vec::new();
    for cops in 1..=max_width + 1 {
        let arena = build_arena(g, p, cops)?;
        arenas.push((arena.nodes.len(), arena.num_arcs()));
        let solution = solve_game(&arena);
        if solution.cop_wins() {
            let strategy = extract_strategy(&arena, &solution, g)?;
            let decomposition = strategy_to_decomposition(&strategy, g, p)?;
            let ordering = decomposition_to_ordering(g, p, &decomposition)?;
            return Ok(GameWidth {
                width: Some(cops - 1),
                strategy: Some(strategy),
                decomposition: Some(decomposition),
                ordering: Some(ordering),
                arenas,
            });
        }
    }
    Ok(GameWidth {
        width: None,
        strategy: None,
        decomposition: None,
        ordering: None,
        arenas,
    })
}
