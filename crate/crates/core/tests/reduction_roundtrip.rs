use std::time::Instant;

use trainyard::engine::{simulate, Outcome, DEFAULT_STEP_CAP};
use trainyard::reduction::{canonical_layout, compile, extract_assignment, Assignment, Formula, MmsInstance};

#[test]
fn five_variable_instance_round_trips() {
    let f = Formula::new(5, vec![vec![1, 3, 4], vec![1, 5], vec![2, 4], vec![1, 4, 5]]).unwrap();
    let t = Instant::now();
    let plan = compile(&MmsInstance::new(f, 3).unwrap()).unwrap();
    let a = Assignment::new([2, 4, 5]);
    let layout = canonical_layout(&plan, &a).unwrap();
    let r = simulate(&plan.level, &layout, DEFAULT_STEP_CAP).unwrap();
    println!(
        "{}x{} board, {} steps, {:?}",
        plan.level.width(),
        plan.level.height(),
        r.trace.last().step,
        t.elapsed()
    );
    assert_eq!(r.outcome, Outcome::Won, "{:?}", r.trace.last().status);
    assert_eq!(extract_assignment(&plan, &r.trace).unwrap(), a);
}

#[test]
fn oracle_equivalence_small() {
    use trainyard::reduction::equivalence::{enumerate_formulas, mutation_search, nearest_assignment};
    use trainyard::reduction::{nearest_canonical_layout, oracle_solve};
    let t = Instant::now();
    let (mut sat, mut unsat) = (0, 0);
    for n in 1..=3 {
        for f in enumerate_formulas(n, 2) {
            for k in 0..=n {
                let inst = MmsInstance::new(f.clone(), k).unwrap();
                let plan = compile(&inst).unwrap();
                match oracle_solve(&inst).unwrap() {
                    Some(a) => {
                        sat += 1;
                        let layout = canonical_layout(&plan, &a).unwrap();
                        let r = simulate(&plan.level, &layout, DEFAULT_STEP_CAP).unwrap();
                        assert_eq!(r.outcome, Outcome::Won, "{f} k={k}");
                        assert_eq!(extract_assignment(&plan, &r.trace).unwrap(), a, "{f} k={k}");
                    }
                    None => {
                        unsat += 1;
                        let base = nearest_canonical_layout(&plan, &nearest_assignment(&inst)).unwrap();
                        let rep = mutation_search(&plan, &base, 10_000, 1, 2_000);
                        assert_eq!(rep.wins, 0, "{f} k={k}: {:?}", rep.first_win);
                    }
                }
            }
        }
    }
    println!("sat {sat} unsat {unsat} in {:?}", t.elapsed());
}
