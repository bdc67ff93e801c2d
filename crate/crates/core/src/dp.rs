//! Davis–Putnam evaluation along a dependency elimination ordering.
//!
//! The prefix is replaced by the reverse of the ordering and variables are
//! eliminated innermost first: existential variables by resolving every
//! positive occurrence against every negative one, universal variables by
//! ∀-reduction. Every clause ever created is logged with its derivation, so
//! a false instance yields a Q-resolution refutation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::decomp::{fill_in_graph, require_compatible, EliminationOrdering, FillInGraph};
use crate::error::{Error, Result};
use crate::graph::PrimalGraph;
use crate::poset::DependencyPoset;
use crate::proof::{Refutation, Rule, Step};
use crate::qbf::{Clause, QbfInstance, Quantifier, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
}

/// Counters for one elimination step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Clauses added that were not already live.
    pub new_clauses: usize,
    /// Resolvent pairs tried, tautologies included.
    pub pairs: usize,
}

/// Clause set under a reordered prefix, with an occurrence index and the
/// full derivation log.
#[derive(Clone, Debug)]
pub struct WorkingFormula<'a> {
    instance: &'a QbfInstance,
    remaining: Vec<Var>,
    live: BTreeMap<u64, Clause>,
    ids: HashMap<Clause, u64>,
    occurs: HashMap<Var, BTreeSet<u64>>,
    log: Vec<Step>,
}

impl<'a> WorkingFormula<'a> {
    /// Loads the matrix as input steps `1..=m` under the prefix
    /// `reverse(ordering)`.
    pub fn new(instance: &'a QbfInstance, ordering: &EliminationOrdering) -> Self {
        let mut w = WorkingFormula {
            instance,
            remaining: ordering.as_slice().iter().rev().copied().collect(),
            live: BTreeMap::new(),
            ids: HashMap::new(),
            occurs: HashMap::new(),
            log: Vec::new(),
        };
        for clause in instance.clauses() {
            w.add(clause.clone(), Rule::Input);
        }
        w
    }

    pub fn remaining_prefix(&self) -> &[Var] {
        &self.remaining
    }

    pub fn clauses(&self) -> impl Iterator<Item = (u64, &Clause)> {
        self.live.iter().map(|(&id, c)| (id, c))
    }

    pub fn num_clauses(&self) -> usize {
        self.live.len()
    }

    pub fn log(&self) -> &[Step] {
        &self.log
    }

    pub fn clause(&self, id: u64) -> Option<&Clause> {
        self.live.get(&id)
    }

    fn next_id(&self) -> u64 {
        self.log.len() as u64 + 1
    }

    /// Adds a clause unless an identical one is live. Returns the id of the
    /// live copy and whether it is new.
    fn add(&mut self, clause: Clause, rule: Rule) -> (u64, bool) {
        debug_assert!(!clause.is_tautological());
        if let Some(&id) = self.ids.get(&clause) {
            return (id, false);
        }
        let id = self.next_id();
        for v in clause.vars() {
            self.occurs.entry(v).or_default().insert(id);
        }
        self.ids.insert(clause.clone(), id);
        self.live.insert(id, clause.clone());
        self.log.push(Step { id, clause, rule });
        (id, true)
    }

    fn remove(&mut self, id: u64) -> Clause {
        let clause = self.live.remove(&id).expect("live clause");
        for v in clause.vars() {
            if let Some(set) = self.occurs.get_mut(&v) {
                set.remove(&id);
            }
        }
        self.ids.remove(&clause);
        clause
    }

    fn pop_innermost(&mut self, var: Var, quantifier: Quantifier) -> Result<()> {
        if self.remaining.last() != Some(&var) {
            return Err(Error::Precondition(format!("{var} is not the innermost variable")));
        }
        if self.instance.quantifier(var) != Some(quantifier) {
            return Err(Error::Precondition(format!("{var} has the wrong quantifier")));
        }
        self.remaining.pop();
        Ok(())
    }

    fn occurrences(&self, var: Var) -> Vec<u64> {
        self.occurs
            .get(&var)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Replaces the clauses on `var` by their non-tautological resolvents.
    /// Returns the ids of clauses that were actually added.
    pub fn eliminate_existential(&mut self, var: Var) -> Result<(Vec<u64>, StepStats)> {
        self.pop_innermost(var, Quantifier::Exists)?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for id in self.occurrences(var) {
            let polarity = self.live[&id].polarity_of(var).expect("indexed");
            let clause = self.remove(id);
            if polarity {
                positive.push((id, clause));
            } else {
                negative.push((id, clause));
            }
        }
        let mut stats = StepStats::default();
        let mut added = Vec::new();
        for (left, d) in &positive {
            for (right, c) in &negative {
                stats.pairs += 1;
                let resolvent = d.resolve(c, var);
                if resolvent.is_tautological() {
                    continue;
                }
                let rule = Rule::Resolution {
                    pivot: var,
                    left: *left,
                    right: *right,
                };
                let (id, fresh) = self.add(resolvent, rule);
                if fresh {
                    added.push(id);
                }
            }
        }
        stats.new_clauses = added.len();
        Ok((added, stats))
    }

    /// Deletes `var` from every clause by ∀-reduction.
    pub fn eliminate_universal(&mut self, var: Var) -> Result<(Vec<u64>, StepStats)> {
        self.pop_innermost(var, Quantifier::Forall)?;
        let mut added = Vec::new();
        for id in self.occurrences(var) {
            let clause = self.remove(id);
            let (new_id, fresh) = self.add(
                clause.without_var(var),
                Rule::Reduction {
                    var,
                    antecedent: id,
                },
            );
            if fresh {
                added.push(new_id);
            }
        }
        let stats = StepStats {
            new_clauses: added.len(),
            pairs: 0,
        };
        Ok((added, stats))
    }

    /// Reduces an all-universal clause to the empty clause, innermost
    /// variable first. Returns the id of the empty clause.
    fn reduce_to_empty(&mut self, mut id: u64) -> u64 {
        loop {
            let clause = self.live[&id].clone();
            let Some(var) = self
                .remaining
                .iter()
                .rev()
                .copied()
                .find(|&v| clause.polarity_of(v).is_some())
            else {
                debug_assert!(clause.is_empty());
                return id;
            };
            let (next, _) = self.add(
                clause.without_var(var),
                Rule::Reduction {
                    var,
                    antecedent: id,
                },
            );
            id = next;
        }
    }

    fn is_all_universal(&self, clause: &Clause) -> bool {
        clause
            .vars()
            .all(|v| self.instance.quantifier(v) == Some(Quantifier::Forall))
    }

    fn refutation(&self, ordering: &EliminationOrdering) -> Refutation {
        Refutation {
            ordering: ordering.as_slice().to_vec(),
            steps: self.log.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// New clauses per elimination step, in elimination order.
    pub new_per_step: Vec<usize>,
    pub resolvents: usize,
    pub max_clauses: usize,
    pub max_clause_width: usize,
    /// ∀-reductions emitted by the all-universal early stop.
    pub early_stop_reductions: usize,
    pub input_clauses: usize,
    pub total_clauses: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub refutation: Option<Refutation>,
    pub stats: SolveStats,
}

/// Decides `instance` along `ordering`, which must be compatible with
/// `poset`. A false verdict comes with a refutation.
pub fn solve(
    instance: &QbfInstance,
    poset: &DependencyPoset,
    ordering: &EliminationOrdering,
) -> Result<SolveOutcome> {
    if poset.elements() != instance.vars().as_slice() {
        return Err(Error::ElementMismatch);
    }
    let graph = PrimalGraph::from_instance(instance);
    ordering.indices(&graph)?;
    require_compatible(ordering, poset)?;
    let fill = if cfg!(debug_assertions) {
        Some(fill_in_graph(&graph, ordering)?)
    } else {
        None
    };

    let mut w = WorkingFormula::new(instance, ordering);
    let mut stats = SolveStats {
        input_clauses: instance.clauses().len(),
        ..SolveStats::default()
    };
    let observe = |w: &WorkingFormula, stats: &mut SolveStats| {
        stats.max_clauses = stats.max_clauses.max(w.num_clauses());
        let widest = w.live.values().map(Clause::len).max().unwrap_or(0);
        stats.max_clause_width = stats.max_clause_width.max(widest);
    };
    observe(&w, &mut stats);

    let input_ids: Vec<u64> = w.live.keys().copied().collect();
    let mut falsified = stop_clause(&w, &input_ids);
    for &var in ordering.as_slice() {
        if falsified.is_some() {
            break;
        }
        let (added, step) = match instance.quantifier(var).expect("checked") {
            Quantifier::Exists => w.eliminate_existential(var)?,
            Quantifier::Forall => w.eliminate_universal(var)?,
        };
        if let Some(h) = &fill {
            debug_assert_clauses_in_fill(&graph, h, &w, &added);
        }
        stats.new_per_step.push(step.new_clauses);
        if instance.quantifier(var) == Some(Quantifier::Exists) {
            stats.resolvents += step.new_clauses;
        }
        observe(&w, &mut stats);
        falsified = stop_clause(&w, &added);
    }

    let outcome = match falsified {
        None => SolveOutcome {
            verdict: Verdict::True,
            refutation: None,
            stats,
        },
        Some(id) => {
            let before = w.log.len();
            w.reduce_to_empty(id);
            stats.early_stop_reductions = w.log.len() - before;
            stats.total_clauses = w.log.len();
            SolveOutcome {
                verdict: Verdict::False,
                refutation: Some(w.refutation(ordering)),
                stats,
            }
        }
    };
    Ok(SolveOutcome {
        stats: SolveStats {
            total_clauses: w.log.len(),
            ..outcome.stats
        },
        ..outcome
    })
}

/// First of `ids` that is empty or contains only universal variables.
fn stop_clause(w: &WorkingFormula, ids: &[u64]) -> Option<u64> {
    ids.iter()
        .copied()
        .find(|id| w.clause(*id).is_some_and(|c| c.is_empty()))
        .or_else(|| {
            ids.iter()
                .copied()
                .find(|id| w.clause(*id).is_some_and(|c| w.is_all_universal(c)))
        })
}

fn debug_assert_clauses_in_fill(g: &PrimalGraph, h: &FillInGraph, w: &WorkingFormula, added: &[u64]) {
    for &id in added {
        let vars: Vec<usize> = w.live[&id]
            .vars()
            .map(|v| g.index_of(v).expect("instance variable"))
            .collect();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                debug_assert!(h.has_edge_idx(a, b), "derived clause leaves the fill-in graph");
            }
        }
    }
}
