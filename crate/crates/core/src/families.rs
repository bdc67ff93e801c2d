//! Parameterized instance families with known dependency treewidth.
//!
//! * `A(i)`: `∃x1..xi ∀y ∃x (y∨x) ∧ ⋀ (xj∨x)`, a star. Variables `xj = j`,
//!   `y = i+1`, `x = i+2`. Refined poset `{y ≤ x}`.
//! * `B(i)`: alternating prefix over `x1..x_{2^i+1}`, a binary tree.
//! * `E(i)`: universal clique on `x1..xi`.
//! * `F(i)`: two paths joined at `z`, with `xj = j`, `yj = 2i+j`,
//!   `z = 4i+1`. Refined poset: two chains ending in `z`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poset::DependencyPoset;
use crate::qbf::{Clause, Literal, QbfInstance, Quantifier, Var};

const MAX_B: usize = 16;
const MAX_INDEX: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    E,
    F,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "E" | "e" => Ok(Family::E),
            "F" | "f" => Ok(Family::F),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::A => "A",
            Family::B => "B",
            Family::E => "E",
            Family::F => "F",
        };
        f.write_str(name)
    }
}

fn pos_clause(vars: &[Var]) -> Clause {
    Clause::new(vars.iter().map(|&v| Literal::positive(v)))
}

/// The `i`-th member of `family`, with its refined poset when it has one.
pub fn generate(family: Family, i: usize) -> Result<(QbfInstance, Option<DependencyPoset>)> {
    let limit = if family == Family::B { MAX_B } else { MAX_INDEX };
    if i == 0 || i > limit {
        return Err(Error::FamilyRange(i));
    }
    let n = i as Var;
    let (prefix, clauses, pairs) = match family {
        Family::A => {
            let (y, x) = (n + 1, n + 2);
            let mut prefix: Vec<_> = (1..=n).map(|v| (v, Quantifier::Exists)).collect();
            prefix.push((y, Quantifier::Forall));
            prefix.push((x, Quantifier::Exists));
            let mut clauses = vec![pos_clause(&[y, x])];
            clauses.extend((1..=n).map(|j| pos_clause(&[j, x])));
            (prefix, clauses, Some(vec![(y, x)]))
        }
        Family::B => {
            let last = (1u32 << i) + 1;
            let prefix = (1..=last)
                .map(|v| {
                    let q = if v % 2 == 1 { Quantifier::Exists } else { Quantifier::Forall };
                    (v, q)
                })
                .collect();
            let mut clauses = Vec::new();
            for j in 1..=(1u32 << (i - 1)) {
                clauses.push(pos_clause(&[j, 2 * j]));
                clauses.push(pos_clause(&[j, 2 * j + 1]));
            }
            (prefix, clauses, None)
        }
        Family::E => {
            let prefix = (1..=n).map(|v| (v, Quantifier::Forall)).collect();
            let mut clauses = Vec::new();
            for p in 1..=n {
                for q in p + 1..=n {
                    clauses.push(pos_clause(&[p, q]));
                }
            }
            (prefix, clauses, None)
        }
        Family::F => {
            let len = 2 * n;
            let x = |j: Var| j;
            let y = |j: Var| len + j;
            let z = 2 * len + 1;
            let mut prefix = Vec::new();
            for j in (1..=len).rev() {
                let q = if j % 2 == 0 { Quantifier::Forall } else { Quantifier::Exists };
                prefix.push((x(j), q));
                prefix.push((y(j), q));
            }
            prefix.push((z, Quantifier::Forall));
            let mut clauses = vec![pos_clause(&[z, x(1), y(1)])];
            for j in 1..len {
                clauses.push(pos_clause(&[x(j), x(j + 1)]));
                clauses.push(pos_clause(&[y(j), y(j + 1)]));
            }
            for j in 1..=n {
                clauses.push(pos_clause(&[x(2 * j - 1), y(1)]));
            }
            let mut pairs = vec![(x(1), z), (y(1), z)];
            for j in 1..len {
                pairs.push((x(j + 1), x(j)));
                pairs.push((y(j + 1), y(j)));
            }
            (prefix, clauses, Some(pairs))
        }
    };
    let (instance, _) = QbfInstance::new(prefix, clauses)?;
    let poset = match pairs {
        None => None,
        Some(pairs) => {
            let p = DependencyPoset::from_pairs(instance.vars(), pairs)?;
            p.check_prefix(&instance)?;
            Some(p)
        }
    };
    Ok((instance, poset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PrimalGraph;

    fn dimacs(inst: &QbfInstance) -> Vec<Vec<i64>> {
        inst.clauses().iter().map(Clause::to_dimacs).collect()
    }

    #[test]
    fn a2() {
        let (inst, p) = generate(Family::A, 2).unwrap();
        assert_eq!(
            inst.to_qdimacs(),
            "p cnf 4 3\ne 1 2 0\na 3 0\ne 4 0\n3 4 0\n1 4 0\n2 4 0\n"
        );
        assert_eq!(p.unwrap().strict_pairs(), vec![(3, 4)]);
    }

    #[test]
    fn b2() {
        let (inst, p) = generate(Family::B, 2).unwrap();
        assert!(p.is_none());
        assert_eq!(inst.prefix().len(), 5);
        assert_eq!(inst.quantifier(4), Some(Quantifier::Forall));
        assert_eq!(dimacs(&inst), vec![vec![1, 2], vec![1, 3], vec![2, 4], vec![2, 5]]);
    }

    #[test]
    fn e3_is_clique() {
        let (inst, _) = generate(Family::E, 3).unwrap();
        assert_eq!(dimacs(&inst), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        for i in 2..6 {
            let (inst, _) = generate(Family::E, i).unwrap();
            assert_eq!(PrimalGraph::from_instance(&inst).num_edges(), i * (i - 1) / 2);
        }
    }

    #[test]
    fn f1() {
        let (inst, p) = generate(Family::F, 1).unwrap();
        assert_eq!(inst.num_vars(), 5);
        assert_eq!(inst.quantifier(5), Some(Quantifier::Forall));
        assert_eq!(inst.quantifier(1), Some(Quantifier::Exists));
        assert_eq!(inst.quantifier(2), Some(Quantifier::Forall));
        let p = p.unwrap();
        assert!(p.leq(2, 1) && p.leq(1, 5) && p.leq(4, 3) && p.leq(3, 5));
        assert!(!p.leq(1, 3));
    }

    #[test]
    fn errors() {
        assert!(matches!("Q".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!(generate(Family::A, 0), Err(Error::FamilyRange(0))));
        assert!(matches!(generate(Family::B, 40), Err(Error::FamilyRange(40))));
    }
}
