//! Prenex CNF formulas and the QDIMACS encoding.
//!
//! Every [`QbfInstance`] is normalized on construction: literals inside a
//! clause are sorted and deduplicated, tautological and repeated clauses are
//! removed, matrix variables without a quantifier are bound existentially in a
//! new outermost block, and prefix variables that never occur in the matrix
//! are dropped.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Variable identifier as used in QDIMACS, always `>= 1`.
pub type Var = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn symbol(self) -> char {
        match self {
            Quantifier::Exists => 'e',
            Quantifier::Forall => 'a',
        }
    }
}

/// A variable together with its polarity. Orders by variable first, positive
/// before negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: Var,
    negated: bool,
}

impl Literal {
    pub fn new(var: Var, positive: bool) -> Self {
        assert!(var >= 1, "variable ids start at 1");
        Literal {
            var,
            negated: !positive,
        }
    }

    pub fn positive(var: Var) -> Self {
        Self::new(var, true)
    }

    pub fn negative(var: Var) -> Self {
        Self::new(var, false)
    }

    /// Decodes a nonzero signed DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u64::from(Var::MAX) {
            return None;
        }
        Some(Self::new(value.unsigned_abs() as Var, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -i64::from(self.var)
        } else {
            i64::from(self.var)
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        !self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A clause in canonical form: literals sorted by `(variable, polarity)`
/// without repetition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut lits: Vec<Literal> = literals.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause(lits)
    }

    pub fn from_dimacs(values: &[i64]) -> Option<Self> {
        values
            .iter()
            .map(|&v| Literal::from_dimacs(v))
            .collect::<Option<Vec<_>>>()
            .map(Clause::new)
    }

    pub fn empty() -> Self {
        Clause(Vec::new())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if the clause contains some variable in both polarities.
    pub fn is_tautological(&self) -> bool {
        self.0.windows(2).any(|w| w[0].var == w[1].var)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn polarity_of(&self, var: Var) -> Option<bool> {
        self.0.iter().find(|l| l.var == var).map(|l| l.is_positive())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let mut last = None;
        self.0.iter().filter_map(move |l| {
            if last == Some(l.var) {
                None
            } else {
                last = Some(l.var);
                Some(l.var)
            }
        })
    }

    /// The clause with every literal over `var` removed.
    pub fn without_var(&self, var: Var) -> Clause {
        Clause(self.0.iter().copied().filter(|l| l.var != var).collect())
    }

    /// `(self \ {pivot}) ∪ (other \ {¬pivot})`, not checked for tautology.
    pub fn resolve(&self, other: &Clause, pivot: Var) -> Clause {
        Clause::new(
            self.0
                .iter()
                .chain(other.0.iter())
                .copied()
                .filter(|l| l.var != pivot),
        )
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_char(')')
    }
}

/// Side effects of normalization, reported rather than silently applied.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizationReport {
    pub tautologies_dropped: usize,
    pub duplicate_clauses_dropped: usize,
    pub free_variables_bound: Vec<Var>,
    pub unused_variables_dropped: Vec<Var>,
}

/// A closed prenex CNF formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QbfInstance {
    prefix: Vec<(Var, Quantifier)>,
    clauses: Vec<Clause>,
    position: HashMap<Var, usize>,
    block: Vec<usize>,
}

impl QbfInstance {
    /// Builds a normalized instance. Fails only if a variable is quantified
    /// twice.
    pub fn new(
        prefix: Vec<(Var, Quantifier)>,
        clauses: Vec<Clause>,
    ) -> Result<(Self, NormalizationReport)> {
        let mut report = NormalizationReport::default();
        let mut seen = HashSet::new();
        for &(v, _) in &prefix {
            if v == 0 {
                return Err(Error::Precondition("variable id 0".into()));
            }
            if !seen.insert(v) {
                return Err(Error::Precondition(format!("variable {v} quantified twice")));
            }
        }

        let mut kept = Vec::with_capacity(clauses.len());
        let mut distinct = HashSet::new();
        for clause in clauses {
            if clause.is_tautological() {
                report.tautologies_dropped += 1;
            } else if distinct.insert(clause.clone()) {
                kept.push(clause);
            } else {
                report.duplicate_clauses_dropped += 1;
            }
        }

        let used: BTreeSet<Var> = kept.iter().flat_map(|c| c.vars()).collect();
        let mut full_prefix: Vec<(Var, Quantifier)> = used
            .iter()
            .copied()
            .filter(|v| !seen.contains(v))
            .map(|v| (v, Quantifier::Exists))
            .collect();
        report.free_variables_bound = full_prefix.iter().map(|&(v, _)| v).collect();
        for (v, q) in prefix {
            if used.contains(&v) {
                full_prefix.push((v, q));
            } else {
                report.unused_variables_dropped.push(v);
            }
        }

        Ok((Self::from_normalized(full_prefix, kept), report))
    }

    fn from_normalized(prefix: Vec<(Var, Quantifier)>, clauses: Vec<Clause>) -> Self {
        let position = prefix
            .iter()
            .enumerate()
            .map(|(i, &(v, _))| (v, i))
            .collect();
        let mut block = Vec::with_capacity(prefix.len());
        let mut current = 0;
        for i in 0..prefix.len() {
            if i > 0 && prefix[i].1 != prefix[i - 1].1 {
                current += 1;
            }
            block.push(current);
        }
        QbfInstance {
            prefix,
            clauses,
            position,
            block,
        }
    }

    pub fn prefix(&self) -> &[(Var, Quantifier)] {
        &self.prefix
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_vars(&self) -> usize {
        self.prefix.len()
    }

    /// Variables in ascending id order.
    pub fn vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self.prefix.iter().map(|&(v, _)| v).collect();
        vars.sort_unstable();
        vars
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.position.contains_key(&var)
    }

    pub fn quantifier(&self, var: Var) -> Option<Quantifier> {
        self.position.get(&var).map(|&i| self.prefix[i].1)
    }

    /// Zero-based position of `var` in the prefix.
    pub fn position(&self, var: Var) -> Option<usize> {
        self.position.get(&var).copied()
    }

    /// Index of the maximal quantifier block containing `var`.
    pub fn block(&self, var: Var) -> Option<usize> {
        self.position.get(&var).map(|&i| self.block[i])
    }

    pub fn max_var(&self) -> Var {
        self.prefix.iter().map(|&(v, _)| v).max().unwrap_or(0)
    }

    /// Serializes in QDIMACS, one quantifier line per block.
    pub fn to_qdimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p cnf {} {}", self.max_var(), self.clauses.len()).unwrap();
        let mut i = 0;
        while i < self.prefix.len() {
            let q = self.prefix[i].1;
            out.push(q.symbol());
            while i < self.prefix.len() && self.prefix[i].1 == q {
                write!(out, " {}", self.prefix[i].0).unwrap();
                i += 1;
            }
            out.push_str(" 0\n");
        }
        for clause in &self.clauses {
            for lit in clause.literals() {
                write!(out, "{lit} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses QDIMACS text and normalizes the result.
///
/// Clauses may span lines; a clause still open at end of input is an error.
pub fn parse_qdimacs(text: &str) -> Result<(QbfInstance, NormalizationReport)> {
    let mut header: Option<(usize, usize)> = None;
    let mut prefix: Vec<(Var, Quantifier)> = Vec::new();
    let mut quantified: HashSet<Var> = HashSet::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0;
    let mut seen_clause = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(lineno, "malformed header, expected `p cnf <vars> <clauses>`"));
            }
            let nvars = fields[2]
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, "malformed variable count in header"))?;
            let nclauses = fields[3]
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, "malformed clause count in header"))?;
            header = Some((nvars, nclauses));
            continue;
        }
        let Some((nvars, _)) = header else {
            return Err(parse_err(lineno, "data before the `p cnf` header"));
        };
        let check_var = |v: i64| -> Result<Var> {
            if v == 0 {
                return Err(parse_err(lineno, "variable id 0"));
            }
            let var = v.unsigned_abs();
            if var > nvars as u64 {
                return Err(parse_err(lineno, format!("variable {var} exceeds declared maximum {nvars}")));
            }
            Ok(var as Var)
        };

        let first = line.as_bytes()[0];
        if first == b'e' || first == b'a' {
            if seen_clause || !pending.is_empty() {
                return Err(parse_err(lineno, "quantifier line after clauses"));
            }
            let quant = if first == b'e' {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            let mut tokens = line[1..].split_whitespace().peekable();
            let mut terminated = false;
            while let Some(tok) = tokens.next() {
                let v: i64 = tok
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad token {tok:?}")))?;
                if v == 0 {
                    if tokens.peek().is_some() {
                        return Err(parse_err(lineno, "tokens after quantifier terminator"));
                    }
                    terminated = true;
                    break;
                }
                if v < 0 {
                    return Err(parse_err(lineno, "negative variable in quantifier line"));
                }
                let var = check_var(v)?;
                if !quantified.insert(var) {
                    return Err(parse_err(lineno, format!("variable {var} quantified twice")));
                }
                prefix.push((var, quant));
            }
            if !terminated {
                return Err(parse_err(lineno, "unterminated quantifier line"));
            }
            continue;
        }

        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad token {tok:?}")))?;
            if v == 0 {
                clauses.push(Clause::from_dimacs(&pending).expect("literals checked"));
                pending.clear();
                seen_clause = true;
            } else {
                check_var(v)?;
                if pending.is_empty() {
                    pending_line = lineno;
                }
                pending.push(v);
            }
        }
    }

    if header.is_none() {
        return Err(parse_err(text.lines().count().max(1), "missing `p cnf` header"));
    }
    if !pending.is_empty() {
        return Err(parse_err(pending_line, "unterminated clause"));
    }
    QbfInstance::new(prefix, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (QbfInstance, NormalizationReport) {
        parse_qdimacs(&text.replace(" / ", "\n")).unwrap()
    }

    #[test]
    fn example_formula() {
        let (inst, report) = parse("p cnf 3 2 / e 1 0 / a 2 0 / e 3 0 / 1 3 0 / 2 3 0");
        assert_eq!(
            inst.prefix(),
            &[(1, Quantifier::Exists), (2, Quantifier::Forall), (3, Quantifier::Exists)]
        );
        assert_eq!(
            inst.clauses(),
            &[Clause::from_dimacs(&[1, 3]).unwrap(), Clause::from_dimacs(&[2, 3]).unwrap()]
        );
        assert_eq!(report, NormalizationReport::default());
        assert_eq!(inst.block(1), Some(0));
        assert_eq!(inst.block(3), Some(2));
    }

    #[test]
    fn empty_matrix_keeps_nothing() {
        let (inst, report) = parse("p cnf 1 0 / e 1 0");
        assert!(inst.clauses().is_empty());
        // the lone prefix variable is unused, so it is dropped
        assert!(inst.prefix().is_empty());
        assert_eq!(report.unused_variables_dropped, vec![1]);
    }

    #[test]
    fn tautology_dropped() {
        let (inst, report) = parse("p cnf 2 1 / e 1 2 0 / 1 -1 2 0");
        assert!(inst.clauses().is_empty());
        assert_eq!(report.tautologies_dropped, 1);
    }

    #[test]
    fn free_variables_bound_outermost() {
        let (inst, report) = parse("p cnf 3 1 / a 2 0 / 3 2 -1 0");
        assert_eq!(report.free_variables_bound, vec![1, 3]);
        assert_eq!(inst.prefix()[0], (1, Quantifier::Exists));
        assert_eq!(inst.prefix()[1], (3, Quantifier::Exists));
        assert_eq!(inst.prefix()[2], (2, Quantifier::Forall));
    }

    #[test]
    fn duplicate_literals_and_clauses() {
        let (inst, report) = parse("p cnf 2 2 / e 1 2 0 / 1 1 2 0 / 2 1 0");
        assert_eq!(inst.clauses().len(), 1);
        assert_eq!(inst.clauses()[0].len(), 2);
        assert_eq!(report.duplicate_clauses_dropped, 1);
    }

    #[test]
    fn empty_clause_is_kept() {
        let (inst, _) = parse("p cnf 1 2 / e 1 0 / 1 0 / 0");
        assert!(inst.clauses().iter().any(Clause::is_empty));
    }

    #[test]
    fn clause_may_span_lines() {
        let (inst, _) = parse("p cnf 3 1 / e 1 2 3 0 / 1 2 / 3 0");
        assert_eq!(inst.clauses()[0].len(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("p cnf x 1\n", 1),
            ("c hi\np cnf 2 1\ne 1 0\n1 3 0\n", 4),
            ("p cnf 2 1\ne 1 0\n1 2\n", 3),
            ("p cnf 2 1\ne 1 0\na 1 0\n", 3),
            ("1 2 0\n", 1),
            ("p cnf 2 1\ne 1 2 0\n1 0\ne 2 0\n", 4),
        ];
        for (text, line) in cases {
            match parse_qdimacs(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn serialize_reparses_identically() {
        let (inst, _) = parse("p cnf 5 3 / a 4 0 / e 1 2 0 / a 3 0 / e 5 0 / -5 4 0 / 1 3 -2 0 / 5 3 0");
        let (again, report) = parse_qdimacs(&inst.to_qdimacs()).unwrap();
        assert_eq!(inst, again);
        assert_eq!(report, NormalizationReport::default());
    }

    #[test]
    fn blocks_merge_after_dropping_unused() {
        let (inst, _) = parse("p cnf 3 1 / e 1 0 / a 2 0 / e 3 0 / 1 3 0");
        assert_eq!(inst.block(1), inst.block(3));
    }
}
