//! Monotone CNF formulas, Min-Mon-SAT instances and the brute-force oracle.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest variable count the oracle will enumerate.
pub const ORACLE_MAX_VARS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("variable {var} in clause {clause} is outside 1..={n}")]
    VarOutOfRange { clause: usize, var: u32, n: u32 },
    #[error("formula needs at least one variable")]
    NoVariables,
    #[error("k = {k} exceeds the variable count {n}")]
    KTooLarge { k: u32, n: u32 },
    #[error("{n} variables exceed the oracle bound {max}")]
    TooLarge { n: u32, max: u32 },
    #[error("assignment has {size} true variables but k = {k}")]
    AssignmentTooLarge { size: usize, k: u32 },
    #[error("assignment names variable {var} outside 1..={n}")]
    AssignmentOutOfRange { var: u32, n: u32 },
}

/// A CNF formula with only positive literals. Variables are 1-based; each
/// clause is kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    n: u32,
    clauses: Vec<Vec<u32>>,
}

impl Formula {
    pub fn new(n: u32, clauses: Vec<Vec<u32>>) -> Result<Self, FormulaError> {
        if n == 0 {
            return Err(FormulaError::NoVariables);
        }
        let mut out = Vec::with_capacity(clauses.len());
        for (ci, mut c) in clauses.into_iter().enumerate() {
            if c.is_empty() {
                return Err(FormulaError::EmptyClause { clause: ci + 1 });
            }
            if let Some(&var) = c.iter().find(|&&v| v == 0 || v > n) {
                return Err(FormulaError::VarOutOfRange { clause: ci + 1, var, n });
            }
            c.sort_unstable();
            c.dedup();
            out.push(c);
        }
        Ok(Self { n, clauses: out })
    }

    pub fn num_vars(&self) -> u32 {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<u32>] {
        &self.clauses
    }

    pub fn contains(&self, clause: usize, var: u32) -> bool {
        self.clauses[clause].binary_search(&var).is_ok()
    }

    pub fn satisfied_by(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|v| a.is_true(*v)))
    }

    /// Clauses sorted, for comparing formulas up to clause order.
    pub fn canonical_clauses(&self) -> Vec<Vec<u32>> {
        let mut c = self.clauses.clone();
        c.sort();
        c
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self
            .clauses
            .iter()
            .map(|c| format!("({})", c.iter().map(|v| format!("x{v}")).join(" ∨ ")))
            .join(" ∧ ");
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MmsInstance {
    pub formula: Formula,
    pub k: u32,
}

impl MmsInstance {
    pub fn new(formula: Formula, k: u32) -> Result<Self, FormulaError> {
        if k > formula.num_vars() {
            return Err(FormulaError::KTooLarge { k, n: formula.num_vars() });
        }
        Ok(Self { formula, k })
    }
}

/// The set of variables set to true.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeSet<u32>);

impl Assignment {
    pub fn new<I: IntoIterator<Item = u32>>(vars: I) -> Self {
        Self(vars.into_iter().collect())
    }

    pub fn is_true(&self, var: u32) -> bool {
        self.0.contains(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(|v| format!("x{v}")).join(", "))
    }
}

/// Pads `a` with the lowest-indexed false variables until it has exactly `k`
/// true variables. Monotonicity keeps a satisfying assignment satisfying.
pub fn normalize_assignment(a: &Assignment, k: u32, n: u32) -> Result<Assignment, FormulaError> {
    if let Some(var) = a.iter().find(|&v| v == 0 || v > n) {
        return Err(FormulaError::AssignmentOutOfRange { var, n });
    }
    if a.len() > k as usize {
        return Err(FormulaError::AssignmentTooLarge { size: a.len(), k });
    }
    if k > n {
        return Err(FormulaError::KTooLarge { k, n });
    }
    let mut set = a.0.clone();
    let mut v = 1;
    while set.len() < k as usize {
        set.insert(v);
        v += 1;
    }
    Ok(Assignment(set))
}

/// Searches for an assignment with at most `k` true variables. Returns the
/// first satisfying `k`-subset in lexicographic order, which is already
/// normalized.
pub fn oracle_solve(inst: &MmsInstance) -> Result<Option<Assignment>, FormulaError> {
    let n = inst.formula.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(FormulaError::TooLarge { n, max: ORACLE_MAX_VARS });
    }
    let masks: Vec<u32> = inst
        .formula
        .clauses()
        .iter()
        .map(|c| c.iter().fold(0u32, |m, v| m | 1 << (v - 1)))
        .collect();
    for subset in (1..=n).combinations(inst.k as usize) {
        let bits = subset.iter().fold(0u32, |m, v| m | 1 << (v - 1));
        if masks.iter().all(|c| c & bits != 0) {
            return Ok(Some(Assignment::new(subset)));
        }
    }
    Ok(None)
}

/// Index of the witness variable per clause: the lowest true variable in
/// it, or `None` if the clause is unsatisfied.
pub fn clause_witnesses(f: &Formula, a: &Assignment) -> Vec<Option<u32>> {
    f.clauses()
        .iter()
        .map(|c| c.iter().copied().find(|v| a.is_true(*v)))
        .collect()
}

/// Undirected simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn new(n: u32, edges: Vec<(u32, u32)>) -> Self {
        Self { n, edges }
    }

    pub fn path(n: u32) -> Self {
        Self::new(n, (1..n).map(|v| (v, v + 1)).collect())
    }

    pub fn cycle(n: u32) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.edges.push((n, 1));
        }
        g
    }

    /// Closed neighbourhood of `v`, sorted.
    pub fn closed_neighbourhood(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = std::iter::once(v)
            .chain(self.edges.iter().filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            }))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A dominating set of size at most `k` exists iff the formula with one
/// clause per closed neighbourhood has a model with at most `k` true
/// variables.
pub fn dominating_set_to_mms(g: &Graph, k: u32) -> Result<MmsInstance, FormulaError> {
    let clauses = (1..=g.n).map(|v| g.closed_neighbourhood(v)).collect();
    MmsInstance::new(Formula::new(g.n, clauses)?, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_finds_lexicographically_first_model() {
        let f = Formula::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let a = oracle_solve(&MmsInstance::new(f.clone(), 1).unwrap()).unwrap();
        assert_eq!(a, Some(Assignment::new([2])));
        let a = oracle_solve(&MmsInstance::new(f, 2).unwrap()).unwrap();
        assert_eq!(a, Some(Assignment::new([1, 2])));
    }

    #[test]
    fn k_zero_is_unsatisfiable_with_clauses() {
        let f = Formula::new(2, vec![vec![1]]).unwrap();
        assert_eq!(oracle_solve(&MmsInstance::new(f, 0).unwrap()).unwrap(), None);
        let empty = Formula::new(2, vec![]).unwrap();
        assert_eq!(
            oracle_solve(&MmsInstance::new(empty, 0).unwrap()).unwrap(),
            Some(Assignment::default())
        );
    }

    #[test]
    fn normalize_pads_lowest_indices() {
        let a = normalize_assignment(&Assignment::new([4]), 3, 5).unwrap();
        assert_eq!(a, Assignment::new([1, 2, 4]));
        assert!(normalize_assignment(&Assignment::new([1, 2]), 1, 5).is_err());
    }

    #[test]
    fn formula_validation() {
        assert_eq!(Formula::new(2, vec![vec![]]), Err(FormulaError::EmptyClause { clause: 1 }));
        assert_eq!(
            Formula::new(2, vec![vec![3]]),
            Err(FormulaError::VarOutOfRange { clause: 1, var: 3, n: 2 })
        );
        let f = Formula::new(3, vec![vec![3, 1, 3]]).unwrap();
        assert_eq!(f.clauses(), &[vec![1, 3]]);
    }

    #[test]
    fn witnesses_pick_lowest_true_variable() {
        let f = Formula::new(
            5,
            vec![vec![1, 3, 4], vec![1, 5], vec![2, 4], vec![1, 4, 5]],
        )
        .unwrap();
        let w = clause_witnesses(&f, &Assignment::new([2, 4, 5]));
        assert_eq!(w, vec![Some(4), Some(5), Some(2), Some(4)]);
    }

    #[test]
    fn neighbourhood_clauses() {
        let g = Graph::path(3);
        let inst = dominating_set_to_mms(&g, 1).unwrap();
        assert_eq!(inst.formula.clauses(), &[vec![1, 2], vec![1, 2, 3], vec![2, 3]]);
    }
}
