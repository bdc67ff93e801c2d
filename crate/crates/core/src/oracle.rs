//! Exhaustive reference computations for small inputs.

use crate::decomp::{ordering_width, EliminationOrdering};
use crate::error::{Error, Result};
use crate::graph::PrimalGraph;
use crate::poset::DependencyPoset;
use crate::qbf::{QbfInstance, Quantifier};

pub const TRUTH_BOUND: usize = 20;
pub const WIDTH_BOUND: usize = 9;

/// Truth value by expanding the prefix, refusing more than [`TRUTH_BOUND`]
/// variables.
pub fn brute_force_truth(instance: &QbfInstance) -> Result<bool> {
    brute_force_truth_bounded(instance, TRUTH_BOUND)
}

pub fn brute_force_truth_bounded(instance: &QbfInstance, bound: usize) -> Result<bool> {
    if instance.num_vars() > bound {
        return Err(Error::BoundExceeded {
            what: "variables",
            size: instance.num_vars(),
            bound,
        });
    }
    let mut assignment = vec![false; instance.max_var() as usize + 1];
    Ok(evaluate(instance, 0, &mut assignment))
}

fn evaluate(instance: &QbfInstance, depth: usize, assignment: &mut [bool]) -> bool {
    let Some(&(var, q)) = instance.prefix().get(depth) else {
        return instance
            .clauses()
            .iter()
            .all(|c| c.literals().iter().any(|l| assignment[l.var() as usize] == l.is_positive()));
    };
    let mut branch = |value: bool| {
        assignment[var as usize] = value;
        evaluate(instance, depth + 1, assignment)
    };
    match q {
        Quantifier::Exists => branch(false) || branch(true),
        Quantifier::Forall => branch(false) && branch(true),
    }
}

/// Minimum width over all elimination orderings compatible with `p`,
/// refusing graphs with more than [`WIDTH_BOUND`] vertices.
pub fn brute_force_min_width(g: &PrimalGraph, p: &DependencyPoset) -> Result<usize> {
    if g.vertices() != p.elements() {
        return Err(Error::ElementMismatch);
    }
    let mut best: Option<usize> = None;
    for order in p.reverse().linear_extensions(WIDTH_BOUND)? {
        let w = ordering_width(g, &EliminationOrdering::new(order))?;
        best = Some(best.map_or(w, |b| b.min(w)));
    }
    Ok(best.unwrap_or(0))
}
