#![allow(dead_code)]

use std::collections::HashSet;

use dtw_core::{Clause, DependencyPoset, Literal, PrimalGraph, QbfInstance, Quantifier, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random prenex CNF with an alternating block prefix.
pub fn random_qbf(rng: &mut ChaCha8Rng, vars: usize, clauses: usize) -> QbfInstance {
    let mut order: Vec<Var> = (1..=vars as Var).collect();
    order.shuffle(rng);
    let mut prefix = Vec::new();
    let mut q = if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
    let mut rest = &order[..];
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len().min(3));
        prefix.extend(rest[..take].iter().map(|&v| (v, q)));
        rest = &rest[take..];
        q = match q {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        };
    }
    let mut matrix = Vec::new();
    for _ in 0..clauses {
        let len = rng.gen_range(2.min(vars)..=4.min(vars));
        let chosen: Vec<Var> = order.choose_multiple(rng, len).copied().collect();
        matrix.push(Clause::new(chosen.into_iter().map(|v| Literal::new(v, rng.gen_bool(0.5)))));
    }
    QbfInstance::new(prefix, matrix).unwrap().0
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> PrimalGraph {
    let mut edges = Vec::new();
    for u in 1..=n as Var {
        for v in u + 1..=n as Var {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    PrimalGraph::from_edges(1..=n as Var, edges).unwrap()
}

/// Random poset on `1..=n` whose relations all go from smaller to larger id.
pub fn random_poset(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DependencyPoset {
    let mut pairs = Vec::new();
    for u in 1..=n as Var {
        for v in u + 1..=n as Var {
            if rng.gen_bool(density) {
                pairs.push((u, v));
            }
        }
    }
    DependencyPoset::from_pairs(1..=n as Var, pairs).unwrap()
}

pub fn permutations(items: &[Var]) -> Vec<Vec<Var>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Width of an ordering by playing the elimination game on adjacency sets.
pub fn elimination_game_width(g: &PrimalGraph, order: &[Var]) -> usize {
    let mut adj: Vec<HashSet<Var>> = vec![HashSet::new(); order.iter().copied().max().unwrap_or(0) as usize + 1];
    for (u, v) in g.edges() {
        adj[u as usize].insert(v);
        adj[v as usize].insert(u);
    }
    let mut width = 0;
    for &v in order {
        let nbrs: Vec<Var> = adj[v as usize].iter().copied().collect();
        width = width.max(nbrs.len());
        for &a in &nbrs {
            adj[a as usize].remove(&v);
            for &b in &nbrs {
                if a != b {
                    adj[a as usize].insert(b);
                }
            }
        }
    }
    width
}

/// True iff no pair u < v of the poset has u eliminated before v.
pub fn eliminates_greater_first(p: &DependencyPoset, order: &[Var]) -> bool {
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if a != b && p.leq(a, b) {
                return false;
            }
        }
    }
    true
}

/// Minimum width over every permutation compatible with `p`.
pub fn permutation_min_width(g: &PrimalGraph, p: &DependencyPoset) -> usize {
    permutations(g.vertices())
        .into_iter()
        .filter(|o| eliminates_greater_first(p, o))
        .map(|o| elimination_game_width(g, &o))
        .min()
        .unwrap_or(0)
}

/// Independent QBF evaluation by Shannon expansion on the clause list.
pub fn shannon_truth(prefix: &[(Var, Quantifier)], clauses: &[Vec<i64>]) -> bool {
    if clauses.iter().any(Vec::is_empty) {
        return false;
    }
    let Some((&(var, q), rest)) = prefix.split_first() else {
        return clauses.is_empty();
    };
    let assign = |value: bool| -> Vec<Vec<i64>> {
        let sat = if value { var as i64 } else { -(var as i64) };
        clauses
            .iter()
            .filter(|c| !c.contains(&sat))
            .map(|c| c.iter().copied().filter(|&l| l != -sat).collect())
            .collect()
    };
    let (f, t) = (shannon_truth(rest, &assign(false)), shannon_truth(rest, &assign(true)));
    match q {
        Quantifier::Exists => f || t,
        Quantifier::Forall => f && t,
    }
}

pub fn instance_truth(inst: &QbfInstance) -> bool {
    let clauses: Vec<Vec<i64>> = inst.clauses().iter().map(Clause::to_dimacs).collect();
    shannon_truth(inst.prefix(), &clauses)
}
