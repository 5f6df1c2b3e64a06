//! The intended solution of a compiled level, and reading an assignment
//! back out of a trace.
//!
//! True rows receive the departures through the routing area, false rows
//! the replicator outputs. In each clause column the lowest true variable's
//! cross-satisfy gadget duplicates its row train upward; every other
//! cross-satisfy lets trains pass. AND buffers are then tuned one gadget at
//! a time from probe runs in which crashing trains are simply dropped.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{simulate_with, CrashPolicy, RailLayout, Status, Trace, DEFAULT_STEP_CAP};
use crate::gadgets::catalog::{and2_design, designs, GadgetError, GadgetKind};
use crate::model::{Direction, RailPiece};

use super::compile::{and_capacity, lay_path, polyline, Rc, ReductionPlan};
use super::formula::{clause_witnesses, normalize_assignment, Assignment, FormulaError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("assignment {assignment} leaves clause {clause} unsatisfied")]
    Unsatisfied { clause: usize, assignment: Assignment },
    #[error("trace ended {0:?}, not won")]
    NotWon(Status),
    #[error("AND gadget {and} needs a delay of {needed} but holds at most {capacity}")]
    BufferOverflow { and: usize, needed: u64, capacity: u64 },
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// The winning layout for a satisfying assignment with at most `k` true
/// variables (padded to exactly `k` with the lowest free indices).
pub fn canonical_layout(plan: &ReductionPlan, a: &Assignment) -> Result<RailLayout, CanonicalError> {
    let f = &plan.instance.formula;
    let a = normalize_assignment(a, plan.instance.k, f.num_vars())?;
    if let Some(j) = clause_witnesses(f, &a).iter().position(Option::is_none) {
        return Err(CanonicalError::Unsatisfied {
            clause: j + 1,
            assignment: a,
        });
    }
    build(plan, &a)
}

/// As [`canonical_layout`] but for any assignment: clauses it leaves
/// unsatisfied simply get no duplicated train.
pub fn nearest_canonical_layout(plan: &ReductionPlan, a: &Assignment) -> Result<RailLayout, CanonicalError> {
    let f = &plan.instance.formula;
    let a = normalize_assignment(a, plan.instance.k, f.num_vars())?;
    build(plan, &a)
}

fn build(plan: &ReductionPlan, a: &Assignment) -> Result<RailLayout, CanonicalError> {
    let g = plan.geometry;
    let f = &plan.instance.formula;
    let mut rails: BTreeMap<Rc, RailPiece> = BTreeMap::new();

    // routing area: sources in order to true rows, then to false rows
    let (_, gx1) = g.green_cols();
    let (_, gy1) = g.green_rows();
    let rows: Vec<i64> = (1..=g.n)
        .filter(|v| a.is_true(*v as u32))
        .chain((1..=g.n).filter(|v| !a.is_true(*v as u32)))
        .collect();
    for (q, &var) in rows.iter().enumerate() {
        let c = g.source_col(q as i64);
        let y = g.row_y(var);
        lay_path(&mut rails, &polyline(&[(gy1, c), (y, c), (y, gx1)]), Direction::South, Direction::East);
    }

    let mut layout = plan.fixed_rails.clone();
    for (rc, p) in rails {
        layout.insert(g.pos(rc), p);
    }

    // matrix: one duplicator per satisfied clause
    let cs = designs(GadgetKind::CrossSatisfy);
    let pass = &cs.iter().find(|d| d.name == "pass_through").unwrap().layout;
    let dup = &cs.iter().find(|d| d.name == "duplicate").unwrap().layout;
    let witnesses = clause_witnesses(f, a);
    for (j, clause) in f.clauses().iter().enumerate() {
        for &var in clause {
            let design = if witnesses[j] == Some(var) { dup } else { pass };
            let o = g.cell_origin(var as i64, j as i64 + 1);
            for (p, piece) in design.iter() {
                layout.insert(g.pos((o.0 + p.row as i64, o.1 + p.col as i64)), piece);
            }
        }
    }

    // AND buffers, synchronised one gadget at a time
    let slots = g.slots as u32;
    let place = |layout: &mut RailLayout, j: usize, dl: u64, dr: u64| -> Result<(), CanonicalError> {
        let o = g.and_origin(j as i64 + 1);
        for (p, piece) in and2_design(slots, dl, dr)?.iter() {
            layout.insert(g.pos((o.0 + p.row as i64, o.1 + p.col as i64)), piece);
        }
        Ok(())
    };
    for j in 0..plan.and_inputs.len() {
        place(&mut layout, j, 0, 0)?;
    }
    let capacity = and_capacity(&g);
    for (j, &(left, right)) in plan.and_inputs.iter().enumerate() {
        let probe = simulate_with(&plan.level, &layout, DEFAULT_STEP_CAP, CrashPolicy::Remove)
            .expect("canonical rails sit on free cells");
        let (Some(tl), Some(tr)) = (probe.trace.first_visit(left), probe.trace.first_visit(right)) else {
            continue;
        };
        let needed = tl.abs_diff(tr);
        if needed > capacity {
            return Err(CanonicalError::BufferOverflow {
                and: j + 1,
                needed,
                capacity,
            });
        }
        let (dl, dr) = if tl < tr { (needed, 0) } else { (0, needed) };
        place(&mut layout, j, dl, dr)?;
    }
    Ok(layout)
}

/// Variables whose row admitted a train before the replicator fired.
pub fn extract_assignment(plan: &ReductionPlan, trace: &Trace) -> Result<Assignment, CanonicalError> {
    let status = trace.last().status;
    if status != Status::Won {
        return Err(CanonicalError::NotWon(status));
    }
    let cutoff = plan
        .replicator_input
        .and_then(|p| trace.first_visit(p))
        .unwrap_or(u64::MAX);
    Ok(Assignment::new(
        plan.row_entries
            .iter()
            .enumerate()
            .filter(|(_, &p)| trace.first_visit(p).is_some_and(|t| t < cutoff))
            .map(|(i, _)| i as u32 + 1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Outcome};
    use crate::reduction::compile::compile;
    use crate::reduction::formula::{Formula, MmsInstance};

    fn inst(n: u32, clauses: Vec<Vec<u32>>, k: u32) -> MmsInstance {
        MmsInstance::new(Formula::new(n, clauses).unwrap(), k).unwrap()
    }

    #[test]
    fn single_clause_single_variable_wins() {
        let p = compile(&inst(1, vec![vec![1]], 1)).unwrap();
        let layout = canonical_layout(&p, &Assignment::new([1])).unwrap();
        let r = simulate(&p.level, &layout, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(r.outcome, Outcome::Won, "{:?}", r.trace.last().status);
        assert_eq!(extract_assignment(&p, &r.trace).unwrap(), Assignment::new([1]));
    }

    #[test]
    fn two_clause_instance_wins() {
        let p = compile(&inst(3, vec![vec![1, 2], vec![2, 3]], 1)).unwrap();
        let layout = canonical_layout(&p, &Assignment::new([2])).unwrap();
        let r = simulate(&p.level, &layout, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(r.outcome, Outcome::Won, "{:?}", r.trace.last().status);
        assert_eq!(extract_assignment(&p, &r.trace).unwrap(), Assignment::new([2]));
    }

    #[test]
    fn unsatisfying_assignment_is_rejected() {
        let p = compile(&inst(3, vec![vec![1, 2], vec![2, 3]], 1)).unwrap();
        assert!(matches!(
            canonical_layout(&p, &Assignment::new([1])),
            Err(CanonicalError::Unsatisfied { clause: 2, .. })
        ));
        let near = nearest_canonical_layout(&p, &Assignment::new([1])).unwrap();
        let r = simulate(&p.level, &near, DEFAULT_STEP_CAP).unwrap();
        assert_ne!(r.outcome, Outcome::Won);
        assert!(matches!(extract_assignment(&p, &r.trace), Err(CanonicalError::NotWon(_))));
    }
}
