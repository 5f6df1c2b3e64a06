//! Contract verification by exhaustive enumeration or seeded sampling.
//!
//! Only pieces with a track through the side a train enters are ever
//! considered: any other choice crashes that train on the spot, which can
//! neither win a viable scenario nor violate a forbidden one. Cells no train
//! visits are left undecided, so counts are over visited-cell assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RailLayout;
use crate::model::{Color, RailPiece};

use super::catalog::{designs, stamp, GadgetError, GadgetKind};
use super::contract::{contract, Contract, Scenario, ScenarioKind};
use super::harness::{DesignChooser, Harness, RandomChooser, ReplayChooser, RunResult};

/// Exhaustive search refuses stamps with more free cells than this.
pub const DEFAULT_EXHAUSTIVE_BOUND: usize = 6;
/// Random double mutations tried per design in the adversarial pass.
const DOUBLE_MUTATIONS: usize = 400;
const MAX_COUNTEREXAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive { bound: usize },
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub scenario: String,
    pub source: String,
    pub layout: RailLayout,
    pub exits: Vec<(String, Color)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: GadgetKind,
    pub mode: VerifyMode,
    pub free_cells: usize,
    pub scenarios: usize,
    /// Viable scenarios their intended design failed to meet.
    pub canonical_failures: Vec<String>,
    /// Enumerated leaves or drawn samples.
    pub layouts_checked: u64,
    pub adversarial_checked: u64,
    /// Searched layouts meeting at least one viable scenario.
    pub viable_layouts: u64,
    pub violations: u64,
    pub counterexamples: Vec<Counterexample>,
    /// Behavior class -> first layout seen exhibiting it.
    pub witnessed: BTreeMap<String, String>,
    pub missing_classes: Vec<String>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.canonical_failures.is_empty() && self.missing_classes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{cells} free cells exceed the exhaustive bound {bound}")]
    TooManyCells { cells: usize, bound: usize },
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

struct Tally {
    violations: u64,
    viable: u64,
    counterexamples: Vec<Counterexample>,
    witnessed: BTreeMap<String, String>,
}

impl Tally {
    /// Scores one run. Returns true when it met a viable scenario.
    fn record(&mut self, h: &Harness, sc: &Scenario, r: &RunResult, source: &dyn Fn() -> String) -> bool {
        if !h.satisfies(sc, r) {
            return false;
        }
        match sc.kind {
            ScenarioKind::Forbidden => {
                self.violations += 1;
                if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    self.counterexamples.push(Counterexample {
                        scenario: sc.name.clone(),
                        source: source(),
                        layout: h.decided_layout(),
                        exits: r
                            .exits
                            .iter()
                            .map(|e| (h.stamp.ports[e.port].name.clone(), e.color))
                            .collect(),
                    });
                }
                false
            }
            ScenarioKind::Viable => {
                if let Some(class) = &sc.class {
                    self.witnessed.entry(class.clone()).or_insert_with(source);
                }
                true
            }
        }
    }
}

fn run_fixed(h: &mut Harness, sc: &Scenario, layout: &RailLayout) -> RunResult {
    h.reset_layout();
    let free = h.stamp.free_cells.clone();
    let mut c = DesignChooser {
        layout,
        free_cells: &free,
    };
    h.run(sc, &mut c)
}

/// Layouts one or two cells away from `base`.
fn mutations(base: &RailLayout, free: &[crate::model::Position], rng: &mut ChaCha8Rng) -> Vec<RailLayout> {
    let mut choices: Vec<Option<RailPiece>> = vec![None];
    choices.extend(RailPiece::catalog().into_iter().map(Some));
    let set = |l: &mut RailLayout, p, c: Option<RailPiece>| match c {
        Some(piece) => {
            l.insert(p, piece);
        }
        None => {
            l.remove(p);
        }
    };
    let mut out = Vec::new();
    for &p in free {
        for &c in &choices {
            if base.get(p) == c {
                continue;
            }
            let mut l = base.clone();
            set(&mut l, p, c);
            out.push(l);
        }
    }
    if free.len() >= 2 {
        for _ in 0..DOUBLE_MUTATIONS {
            let mut l = base.clone();
            for _ in 0..2 {
                let p = free[rng.gen_range(0..free.len())];
                set(&mut l, p, choices[rng.gen_range(0..choices.len())]);
            }
            out.push(l);
        }
    }
    out
}

/// Runs the canonical, adversarial and searched layouts of `kind` against
/// its contract.
pub fn verify(kind: GadgetKind, mode: VerifyMode) -> Result<VerificationReport, VerifyError> {
    verify_contract(&contract(kind), mode)
}

pub fn verify_contract(c: &Contract, mode: VerifyMode) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    let kind = c.kind;
    let s = stamp(kind)?;
    let free = s.free_cells.clone();
    if let VerifyMode::Exhaustive { bound } = mode {
        if free.len() > bound {
            return Err(VerifyError::TooManyCells {
                cells: free.len(),
                bound,
            });
        }
    }
    let mut h = Harness::new(s);
    let mut tally = Tally {
        violations: 0,
        viable: 0,
        counterexamples: Vec::new(),
        witnessed: BTreeMap::new(),
    };

    // canonical designs, plus every scenario's own witness layout
    let mut canonical_failures = Vec::new();
    let mut bases: Vec<(String, RailLayout)> = designs(kind).into_iter().map(|d| (d.name.to_string(), d.layout)).collect();
    for sc in c.viable() {
        let Some((name, layout)) = &sc.witness else { continue };
        let r = run_fixed(&mut h, sc, layout);
        if !tally.record(&h, sc, &r, &|| format!("design:{name}")) {
            canonical_failures.push(format!("{} ({name}): {:?} {:?}", sc.name, r.status, r.exits));
        }
        if !bases.iter().any(|(_, l)| l == layout) {
            bases.push((name.clone(), layout.clone()));
        }
    }
    for (name, layout) in &bases {
        for sc in c.forbidden() {
            let r = run_fixed(&mut h, sc, layout);
            tally.record(&h, sc, &r, &|| format!("design:{name}"));
        }
    }

    // adversarial: local perturbations of each design
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut adversarial_checked = 0;
    for (name, base) in &bases {
        for layout in mutations(base, &free, &mut rng) {
            adversarial_checked += 1;
            for sc in &c.scenarios {
                let r = run_fixed(&mut h, sc, &layout);
                tally.record(&h, sc, &r, &|| format!("mutation of {name}"));
            }
        }
    }

    let mut layouts_checked = 0;
    let options = h.options().clone();
    match mode {
        VerifyMode::Exhaustive { .. } => {
            for sc in &c.scenarios {
                let mut rc = ReplayChooser {
                    options: &options,
                    trail: Vec::new(),
                    depth: 0,
                };
                loop {
                    h.reset_layout();
                    let r = h.run(sc, &mut rc);
                    layouts_checked += 1;
                    if tally.record(&h, sc, &r, &|| "exhaustive".to_string()) {
                        tally.viable += 1;
                    }
                    if !rc.backtrack() {
                        break;
                    }
                }
            }
        }
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..samples {
                h.reset_layout();
                let mut met = false;
                for sc in &c.scenarios {
                    let mut rc = RandomChooser {
                        rng: &mut rng,
                        options: &options,
                    };
                    let r = h.run(sc, &mut rc);
                    met |= tally.record(&h, sc, &r, &|| format!("sample {i}"));
                }
                layouts_checked += 1;
                if met {
                    tally.viable += 1;
                }
            }
        }
    }

    let classes: BTreeSet<String> = c.classes().into_iter().collect();
    let missing_classes = classes
        .into_iter()
        .filter(|k| !tally.witnessed.contains_key(k))
        .collect();
    Ok(VerificationReport {
        kind,
        mode,
        free_cells: free.len(),
        scenarios: c.scenarios.len(),
        canonical_failures,
        layouts_checked,
        adversarial_checked,
        viable_layouts: tally.viable,
        violations: tally.violations,
        counterexamples: tally.counterexamples,
        witnessed: tally.witnessed,
        missing_classes,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}
