//! Cross-checking compiled levels against the brute-force oracle.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{run_outcome, RailLayout, Outcome};
use crate::model::{Position, RailPiece};

use super::compile::ReductionPlan;
use super::formula::{Assignment, Formula, MmsInstance};

/// Every monotone formula with `1..=max_m` clauses over `n` variables,
/// one representative per multiset of clauses.
pub fn enumerate_formulas(n: u32, max_m: usize) -> Vec<Formula> {
    let subsets: Vec<Vec<u32>> = (1..=n)
        .powerset()
        .filter(|s| !s.is_empty())
        .collect();
    let mut out = Vec::new();
    for m in 1..=max_m {
        for clauses in (0..subsets.len()).combinations_with_replacement(m) {
            let cl = clauses.iter().map(|&i| subsets[i].clone()).collect();
            out.push(Formula::new(n, cl).expect("subsets are valid clauses"));
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert(f.canonical_clauses()));
    out
}

/// The `k`-subset satisfying the most clauses, first in lexicographic order.
pub fn nearest_assignment(inst: &MmsInstance) -> Assignment {
    let f = &inst.formula;
    let mut best = (0usize, Assignment::default());
    let mut first = true;
    for subset in (1..=f.num_vars()).combinations(inst.k as usize) {
        let a = Assignment::new(subset);
        let sat = f.clauses().iter().filter(|c| c.iter().any(|v| a.is_true(*v))).count();
        if first || sat > best.0 {
            best = (sat, a);
            first = false;
        }
    }
    best.1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationReport {
    pub tried: u64,
    pub wins: u64,
    pub first_win: Option<RailLayout>,
}

/// Applies `samples` seeded random edits of one to three cells to `base`
/// and counts the edited layouts that win. Half the edited cells are taken
/// from the cells `base` already uses, half from anywhere on the board.
pub fn mutation_search(plan: &ReductionPlan, base: &RailLayout, samples: u64, seed: u64, cap: u64) -> MutationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let used: Vec<Position> = base.iter().map(|(p, _)| p).collect();
    let free: Vec<Position> = plan.level.empty_cells().collect();
    let catalog = RailPiece::catalog();
    let mut report = MutationReport {
        tried: 0,
        wins: 0,
        first_win: None,
    };
    for _ in 0..samples {
        let mut l = base.clone();
        for _ in 0..rng.gen_range(1..=3) {
            let pool = if !used.is_empty() && rng.gen_bool(0.5) { &used } else { &free };
            if pool.is_empty() {
                continue;
            }
            let p = pool[rng.gen_range(0..pool.len())];
            let pick = rng.gen_range(0..=catalog.len());
            if pick == catalog.len() {
                l.remove(p);
            } else {
                l.insert(p, catalog[pick]);
            }
        }
        report.tried += 1;
        let outcome = run_outcome(&plan.level, &l, cap).expect("edits stay on free cells");
        if outcome == Outcome::Won {
            report.wins += 1;
            report.first_win.get_or_insert(l);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_counts() {
        assert_eq!(enumerate_formulas(1, 2).len(), 2);
        assert_eq!(enumerate_formulas(2, 2).len(), 3 + 6);
        assert_eq!(enumerate_formulas(3, 2).len(), 7 + 28);
    }

    #[test]
    fn nearest_prefers_more_satisfied_clauses() {
        let f = Formula::new(3, vec![vec![1], vec![3], vec![3]]).unwrap();
        let a = nearest_assignment(&MmsInstance::new(f, 1).unwrap());
        assert_eq!(a, Assignment::new([3]));
    }
}
