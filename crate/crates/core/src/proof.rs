//! Q-resolution refutations: the `dqrp` text format and a standalone
//! checker.
//!
//! Format, one record per line:
//!
//! ```text
//! p dqrp 1
//! o <v_1> ... <v_n> 0
//! <id> I 0 <lit>... 0
//! <id> R <pivot> <ant1> <ant2> 0 <lit>... 0
//! <id> U <var> <ant> 0 <lit>... 0
//! ```
//!
//! The ordering line lists the elimination ordering; the prefix under which
//! the proof is checked is its reverse. The checker depends only on the
//! formula types, never on the solver that produced the proof.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::poset::DependencyPoset;
use crate::qbf::{Clause, Literal, QbfInstance, Quantifier, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Input,
    /// `left` holds the pivot positively, `right` negatively.
    Resolution { pivot: Var, left: u64, right: u64 },
    Reduction { var: Var, antecedent: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub id: u64,
    pub clause: Clause,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub ordering: Vec<Var>,
    pub steps: Vec<Step>,
}

fn write_lits(out: &mut String, clause: &Clause) {
    for lit in clause.literals() {
        write!(out, " {lit}").unwrap();
    }
    out.push_str(" 0\n");
}

impl Refutation {
    pub fn to_text(&self) -> String {
        let mut out = String::from("p dqrp 1\no");
        for v in &self.ordering {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
        for step in &self.steps {
            match step.rule {
                Rule::Input => write!(out, "{} I 0", step.id),
                Rule::Resolution { pivot, left, right } => {
                    write!(out, "{} R {pivot} {left} {right} 0", step.id)
                }
                Rule::Reduction { var, antecedent } => {
                    write!(out, "{} U {var} {antecedent} 0", step.id)
                }
            }
            .unwrap();
            write_lits(&mut out, &step.clause);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = false;
        let mut ordering = None;
        let mut steps = Vec::new();
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
            if !header {
                if fields != ["p", "dqrp", "1"] {
                    return Err(err("expected `p dqrp 1`"));
                }
                header = true;
                continue;
            }
            if ordering.is_none() {
                if fields.first() != Some(&"o") || fields.last() != Some(&"0") {
                    return Err(err("expected ordering line `o ... 0`"));
                }
                let vars = fields[1..fields.len() - 1]
                    .iter()
                    .map(|s| s.parse::<Var>().ok().filter(|&v| v > 0))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err("bad variable in ordering"))?;
                ordering = Some(vars);
                continue;
            }
            if fields.len() < 4 {
                return Err(err("truncated step"));
            }
            let id: u64 = fields[0].parse().map_err(|_| err("bad step id"))?;
            let nums = |slice: &[&str]| -> Result<Vec<i64>> {
                slice
                    .iter()
                    .map(|s| s.parse::<i64>().map_err(|_| err("bad number")))
                    .collect()
            };
            let rest = nums(&fields[2..])?;
            let sep = rest
                .iter()
                .position(|&x| x == 0)
                .ok_or_else(|| err("missing terminator after rule arguments"))?;
            let (args, lits) = (&rest[..sep], &rest[sep + 1..]);
            if lits.last() != Some(&0) || lits[..lits.len() - 1].contains(&0) {
                return Err(err("literal list must end with a single 0"));
            }
            let clause = Clause::from_dimacs(&lits[..lits.len() - 1])
                .ok_or_else(|| err("bad literal"))?;
            let positive = |x: i64| -> Result<u64> {
                u64::try_from(x).ok().filter(|&v| v > 0).ok_or_else(|| err("expected positive number"))
            };
            let var = |x: i64| -> Result<Var> {
                Var::try_from(positive(x)?).map_err(|_| err("variable out of range"))
            };
            let rule = match (fields[1], args) {
                ("I", []) => Rule::Input,
                ("R", &[pivot, left, right]) => Rule::Resolution {
                    pivot: var(pivot)?,
                    left: positive(left)?,
                    right: positive(right)?,
                },
                ("U", &[v, ant]) => Rule::Reduction {
                    var: var(v)?,
                    antecedent: positive(ant)?,
                },
                _ => return Err(err("unknown rule or wrong argument count")),
            };
            steps.push(Step { id, clause, rule });
        }
        if !header {
            return Err(Error::Parse {
                line: 1,
                msg: "missing `p dqrp 1` header".into(),
            });
        }
        let ordering = ordering.ok_or(Error::Parse {
            line: text.lines().count(),
            msg: "missing ordering line".into(),
        })?;
        Ok(Refutation { ordering, steps })
    }

    pub fn derives_empty_clause(&self) -> bool {
        self.steps.iter().any(|s| s.clause.is_empty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub step: Option<u64>,
    pub reason: String,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(id) => write!(f, "step {id}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosetCheck {
    /// No poset supplied: soundness of the reordered prefix is trusted.
    NotChecked,
    Compatible,
    Incompatible { later: Var, earlier: Var },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub problems: Vec<Problem>,
    pub poset: PosetCheck,
}

impl CheckReport {
    pub fn verified(&self) -> bool {
        self.problems.is_empty() && !matches!(self.poset, PosetCheck::Incompatible { .. })
    }
}

/// Parses and checks a refutation against `instance`.
pub fn check_refutation(
    instance: &QbfInstance,
    proof: &str,
    poset: Option<&DependencyPoset>,
) -> Result<CheckReport> {
    Ok(check_parsed(instance, &Refutation::parse(proof)?, poset))
}

pub fn check_parsed(
    instance: &QbfInstance,
    proof: &Refutation,
    poset: Option<&DependencyPoset>,
) -> CheckReport {
    let mut problems = Vec::new();
    let mut problem = |step: Option<u64>, reason: String| problems.push(Problem { step, reason });

    // position of each variable in the reversed ordering
    let n = proof.ordering.len();
    let mut tau: HashMap<Var, usize> = HashMap::new();
    for (i, &v) in proof.ordering.iter().enumerate() {
        if tau.insert(v, n - 1 - i).is_some() {
            problem(None, format!("ordering lists {v} twice"));
        }
    }
    let mut ordered: Vec<Var> = proof.ordering.clone();
    ordered.sort_unstable();
    ordered.dedup();
    if ordered != instance.vars() {
        problem(None, "ordering is not a permutation of the instance variables".into());
    }

    let matrix: HashSet<&Clause> = instance.clauses().iter().collect();
    let mut derived: HashMap<u64, &Clause> = HashMap::new();
    let mut last_id = None;
    let mut empty_found = false;
    for step in &proof.steps {
        let id = step.id;
        if last_id.is_some_and(|prev| id <= prev) {
            problem(Some(id), "ids must strictly increase".into());
        }
        last_id = Some(id);
        let clause = &step.clause;
        if clause.is_tautological() {
            problem(Some(id), "clause is tautological".into());
        }
        if let Some(v) = clause.vars().find(|&v| !instance.contains_var(v)) {
            problem(Some(id), format!("unknown variable {v}"));
        }
        let fetch = |ant: u64| derived.get(&ant).copied();
        let outcome: std::result::Result<(), String> = match step.rule {
            Rule::Input => {
                if matrix.contains(clause) {
                    Ok(())
                } else {
                    Err(format!("{clause} is not a matrix clause"))
                }
            }
            Rule::Resolution { pivot, left, right } => match (fetch(left), fetch(right)) {
                (Some(a), Some(b)) => {
                    if instance.quantifier(pivot) != Some(Quantifier::Exists) {
                        Err(format!("pivot {pivot} is not existential"))
                    } else if !a.contains(Literal::positive(pivot)) {
                        Err(format!("antecedent {left} lacks {pivot}"))
                    } else if !b.contains(Literal::negative(pivot)) {
                        Err(format!("antecedent {right} lacks -{pivot}"))
                    } else if a.resolve(b, pivot) != *clause {
                        Err(format!("resolvent is {}, not {clause}", a.resolve(b, pivot)))
                    } else {
                        Ok(())
                    }
                }
                _ => Err("antecedent does not name an earlier step".into()),
            },
            Rule::Reduction { var, antecedent } => match fetch(antecedent) {
                Some(a) => {
                    if instance.quantifier(var) != Some(Quantifier::Forall) {
                        Err(format!("reduced variable {var} is not universal"))
                    } else if a.polarity_of(var).is_none() {
                        Err(format!("antecedent {antecedent} does not contain {var}"))
                    } else if a.without_var(var) != *clause {
                        Err(format!("reduction yields {}, not {clause}", a.without_var(var)))
                    } else if let Some(e) = a.vars().find(|&e| {
                        instance.quantifier(e) == Some(Quantifier::Exists)
                            && tau.get(&e).is_none_or(|&pe| tau.get(&var).is_none_or(|&pv| pe > pv))
                    }) {
                        Err(format!("existential {e} follows {var} in the reordered prefix"))
                    } else {
                        Ok(())
                    }
                }
                None => Err("antecedent does not name an earlier step".into()),
            },
        };
        if let Err(reason) = outcome {
            problem(Some(id), reason);
        } else if clause.is_empty() {
            empty_found = true;
        }
        derived.insert(id, clause);
    }
    if !empty_found {
        problem(None, "no valid step derives the empty clause".into());
    }

    let poset = match poset {
        None => PosetCheck::NotChecked,
        Some(p) => {
            let mut result = PosetCheck::Compatible;
            'outer: for (i, &a) in proof.ordering.iter().enumerate() {
                for &b in &proof.ordering[i + 1..] {
                    // a is eliminated first, so it must not lie strictly below b
                    if a != b && p.leq(a, b) {
                        result = PosetCheck::Incompatible { later: b, earlier: a };
                        break 'outer;
                    }
                }
            }
            result
        }
    };
    CheckReport { problems, poset }
}
