//! Behavioral contracts: what each gadget must be able to do, and what no
//! rail layout on it may ever achieve.
//!
//! A scenario injects trains at ports at given steps. A `Viable` scenario
//! needs a witness layout that wins with exactly the expected exits. A
//! `Forbidden` scenario is violated by any layout that wins with exits its
//! expectation rejects.

use serde::{Deserialize, Serialize};

use crate::engine::RailLayout;
use crate::model::Color;

use super::catalog::{and2_delay_capacity, and2_design, designs, GadgetKind};

/// One train placed at a port's exterior cell at step `at`, heading in.
/// Injecting at an output port models a train arriving the wrong way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub port: String,
    pub color: Color,
    pub at: u64,
}

impl Injection {
    pub fn at(port: &str, color: Color, at: u64) -> Self {
        Self {
            port: port.to_string(),
            color,
            at,
        }
    }
}

/// One expected exiting train; `None` accepts any color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitSpec {
    pub port: String,
    pub color: Option<Color>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "exits", rename_all = "snake_case")]
pub enum Expect {
    /// Won with exactly these exits.
    Exact(Vec<ExitSpec>),
    /// Won at all.
    Any,
    /// Won with exits matching none of the listed multisets.
    AnyExcept(Vec<Vec<ExitSpec>>),
}

fn specs(exits: &[(&str, Option<Color>)]) -> Vec<ExitSpec> {
    exits
        .iter()
        .map(|&(port, color)| ExitSpec {
            port: port.to_string(),
            color,
        })
        .collect()
}

impl Expect {
    pub fn exact(exits: &[(&str, Option<Color>)]) -> Self {
        Expect::Exact(specs(exits))
    }

    pub fn any_except(allowed: &[&[(&str, Option<Color>)]]) -> Self {
        Expect::AnyExcept(allowed.iter().map(|a| specs(a)).collect())
    }
}

/// Multiset match of observed exits against specs. Concrete colors are
/// matched first, so greedy assignment of the wildcards is exact.
pub fn exits_match(spec: &[ExitSpec], exits: &[(&str, Color)]) -> bool {
    if spec.len() != exits.len() {
        return false;
    }
    let mut left: Vec<(&str, Color)> = exits.to_vec();
    let ordered = spec
        .iter()
        .filter(|s| s.color.is_some())
        .chain(spec.iter().filter(|s| s.color.is_none()));
    for s in ordered {
        let hit = left
            .iter()
            .position(|&(p, c)| p == s.port && s.color.is_none_or(|sc| sc == c));
        match hit {
            Some(i) => {
                left.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Viable,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub inputs: Vec<Injection>,
    pub expect: Expect,
    /// Behavior class a viable scenario demonstrates, if it is one the
    /// verifier must see witnessed.
    pub class: Option<String>,
    /// Layout expected to witness a viable scenario.
    #[serde(skip)]
    pub witness: Option<(String, RailLayout)>,
}

impl Scenario {
    pub fn viable(name: &str, inputs: Vec<Injection>, expect: Expect) -> Self {
        Self {
            name: name.to_string(),
            kind: ScenarioKind::Viable,
            inputs,
            expect,
            class: None,
            witness: None,
        }
    }

    pub fn forbidden(name: &str, inputs: Vec<Injection>, expect: Expect) -> Self {
        Self {
            name: name.to_string(),
            kind: ScenarioKind::Forbidden,
            inputs,
            expect,
            class: None,
            witness: None,
        }
    }

    fn class(mut self, class: &str) -> Self {
        self.class = Some(class.to_string());
        self
    }

    fn witness(mut self, name: &str, layout: RailLayout) -> Self {
        self.witness = Some((name.to_string(), layout));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub kind: GadgetKind,
    pub scenarios: Vec<Scenario>,
}

impl Contract {
    pub fn viable(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter().filter(|s| s.kind == ScenarioKind::Viable)
    }

    pub fn forbidden(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter().filter(|s| s.kind == ScenarioKind::Forbidden)
    }

    /// Behavior classes that must be witnessed.
    pub fn classes(&self) -> Vec<String> {
        let mut v: Vec<String> = self.scenarios.iter().filter_map(|s| s.class.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn design(kind: GadgetKind, name: &str) -> (String, RailLayout) {
    let d = designs(kind)
        .into_iter()
        .find(|d| d.name == name)
        .expect("design exists");
    (d.name.to_string(), d.layout)
}

use Color::*;

fn inj(port: &str, color: Color, at: u64) -> Injection {
    Injection::at(port, color, at)
}

/// The contract for `kind`.
pub fn contract(kind: GadgetKind) -> Contract {
    let mut sc = Vec::new();
    match kind {
        GadgetKind::Lane { .. } => {
            let (n, d) = design(kind, "straight");
            for c in Color::ALL {
                sc.push(
                    Scenario::viable(&format!("pass_{c}"), vec![inj("in", c, 0)], Expect::exact(&[("out", Some(c))]))
                        .witness(&n, d.clone()),
                );
                sc.push(Scenario::forbidden(
                    &format!("recolor_{c}"),
                    vec![inj("in", c, 0)],
                    Expect::any_except(&[&[("out", Some(c))]]),
                ));
            }
        }
        GadgetKind::Terminus => {
            let (n, d) = design(kind, "forced");
            for c in Color::ALL {
                sc.push(
                    Scenario::viable(&format!("absorb_{c}"), vec![inj("in", c, 0)], Expect::exact(&[]))
                        .witness(&n, d.clone()),
                );
            }
            sc.push(Scenario::forbidden("idle", vec![], Expect::Any));
            sc.push(Scenario::forbidden(
                "two_trains",
                vec![inj("in", Red, 0), inj("in", Blue, 2)],
                Expect::Any,
            ));
        }
        GadgetKind::OneWay => {
            let (n, d) = design(kind, "split_rejoin");
            for c in Color::ALL {
                sc.push(
                    Scenario::viable(&format!("pass_{c}"), vec![inj("in", c, 0)], Expect::exact(&[("out", Some(c))]))
                        .witness(&n, d.clone()),
                );
                sc.push(Scenario::forbidden(
                    &format!("pass_other_{c}"),
                    vec![inj("in", c, 0)],
                    Expect::any_except(&[&[("out", Some(c))]]),
                ));
            }
            sc.push(Scenario::forbidden("reverse", vec![inj("out", Red, 0)], Expect::Any));
        }
        GadgetKind::OneTimePass => {
            let (n, d) = design(kind, "forced");
            for c in Color::ALL {
                let out = c.split().1;
                sc.push(
                    Scenario::viable(&format!("pass_{c}"), vec![inj("in", c, 0)], Expect::exact(&[("out", Some(out))]))
                        .witness(&n, d.clone()),
                );
                sc.push(Scenario::forbidden(
                    &format!("pass_other_{c}"),
                    vec![inj("in", c, 0)],
                    Expect::any_except(&[&[("out", Some(out))]]),
                ));
            }
            sc.push(Scenario::forbidden("idle", vec![], Expect::Any));
            for gap in [1, 2, 3, 6] {
                sc.push(Scenario::forbidden(
                    &format!("second_pass_{gap}"),
                    vec![inj("in", Red, 0), inj("in", Red, gap)],
                    Expect::Any,
                ));
            }
            sc.push(Scenario::forbidden("reverse", vec![inj("out", Red, 0)], Expect::Any));
            sc.push(Scenario::forbidden(
                "reverse_after_pass",
                vec![inj("in", Red, 0), inj("out", Red, 8)],
                Expect::Any,
            ));
        }
        GadgetKind::CrossIgnore | GadgetKind::CrossSatisfy => {
            let satisfy = kind == GadgetKind::CrossSatisfy;
            let (pass_name, pass) = if satisfy {
                design(kind, "pass_through")
            } else {
                design(kind, "crossing")
            };
            let horizontal: &[(&str, Option<Color>)] = &[("right", None)];
            let both: &[(&str, Option<Color>)] = &[("right", None), ("top", None)];
            let dup_both: &[(&str, Option<Color>)] = &[("right", None), ("top", None), ("top", None)];
            let left_allowed: Vec<&[(&str, Option<Color>)]> =
                if satisfy { vec![horizontal, both] } else { vec![horizontal] };
            // merging both trains on the crossing cell is a legal (if useless)
            // way to keep the arrival fed
            let both_allowed: Vec<&[(&str, Option<Color>)]> = if satisfy {
                vec![both, dup_both, horizontal]
            } else {
                vec![both, horizontal]
            };
            for c in Color::ALL {
                let mut s = Scenario::viable(
                    &format!("left_{c}"),
                    vec![inj("left", c, 0)],
                    Expect::exact(&[("right", Some(Red))]),
                )
                .witness(&pass_name, pass.clone());
                if c == Red {
                    s = s.class("pass_through");
                }
                sc.push(s);
                sc.push(Scenario::forbidden(
                    &format!("left_only_{c}"),
                    vec![inj("left", c, 0)],
                    Expect::any_except(&left_allowed),
                ));
            }
            if satisfy {
                let (dn, dd) = design(kind, "duplicate");
                sc.push(
                    Scenario::viable(
                        "left_duplicated",
                        vec![inj("left", Red, 0)],
                        Expect::exact(&[("right", Some(Red)), ("top", Some(Blue))]),
                    )
                    .witness(&dn, dd.clone())
                    .class("duplicate"),
                );
                sc.push(
                    Scenario::viable(
                        "left_duplicated_with_bottom",
                        vec![inj("left", Red, 0), inj("bottom", Blue, 20)],
                        Expect::exact(&[("right", Some(Red)), ("top", Some(Blue)), ("top", Some(Blue))]),
                    )
                    .witness(&dn, dd),
                );
            }
            // the left train spends six extra steps in the duplicator
            let sync = if satisfy { 6 } else { 0 };
            for offset in [0u64, 1, 2, 3, 4, 6] {
                for (left_at, bottom_at) in [(0, offset + sync), (offset, sync)] {
                    if offset == 0 && left_at != 0 {
                        continue;
                    }
                    let inputs = vec![inj("left", Red, left_at), inj("bottom", Blue, bottom_at)];
                    sc.push(
                        Scenario::viable(
                            &format!("both_{left_at}_{bottom_at}"),
                            inputs.clone(),
                            Expect::exact(&[("right", Some(Red)), ("top", Some(Blue))]),
                        )
                        .witness(&pass_name, pass.clone()),
                    );
                    sc.push(Scenario::forbidden(
                        &format!("both_other_{left_at}_{bottom_at}"),
                        inputs,
                        Expect::any_except(&both_allowed),
                    ));
                }
            }
            sc.push(Scenario::forbidden("bottom_only", vec![inj("bottom", Blue, 0)], Expect::Any));
            sc.push(Scenario::forbidden("idle", vec![], Expect::Any));
            sc.push(Scenario::forbidden(
                "reverse_right",
                vec![inj("left", Red, 0), inj("right", Red, 0)],
                Expect::Any,
            ));
            sc.push(Scenario::forbidden(
                "reverse_top",
                vec![inj("left", Red, 0), inj("top", Blue, 0)],
                Expect::Any,
            ));
        }
        GadgetKind::And2 { buffer_slots } => {
            let (n, d) = design(kind, "synchronous");
            sc.push(
                Scenario::viable(
                    "both",
                    vec![inj("left", Red, 0), inj("right", Blue, 0)],
                    Expect::exact(&[("top", Some(Red))]),
                )
                .witness(&n, d)
                .class("conjunction"),
            );
            let cap = and2_delay_capacity(buffer_slots);
            for delay in (2..=cap).step_by(2).filter(|d| *d <= 6 || *d == cap) {
                let hold_left = and2_design(buffer_slots, delay, 0).expect("within capacity");
                let hold_right = and2_design(buffer_slots, 0, delay).expect("within capacity");
                sc.push(
                    Scenario::viable(
                        &format!("right_late_{delay}"),
                        vec![inj("left", Red, 0), inj("right", Blue, delay)],
                        Expect::exact(&[("top", Some(Red))]),
                    )
                    .witness("hold_left", hold_left),
                );
                sc.push(
                    Scenario::viable(
                        &format!("left_late_{delay}"),
                        vec![inj("left", Red, delay), inj("right", Blue, 0)],
                        Expect::exact(&[("top", Some(Red))]),
                    )
                    .witness("hold_right", hold_right),
                );
            }
            for c in [Red, Blue, Purple] {
                sc.push(Scenario::forbidden(&format!("left_only_{c}"), vec![inj("left", c, 0)], Expect::Any));
                sc.push(Scenario::forbidden(&format!("right_only_{c}"), vec![inj("right", c, 0)], Expect::Any));
            }
            sc.push(Scenario::forbidden("idle", vec![], Expect::Any));
            for (l, r) in [(0, 0), (0, 4), (4, 0)] {
                sc.push(Scenario::forbidden(
                    &format!("both_other_{l}_{r}"),
                    vec![inj("left", Red, l), inj("right", Blue, r)],
                    Expect::any_except(&[&[("top", None)]]),
                ));
            }
            sc.push(Scenario::forbidden("reverse", vec![inj("top", Red, 0)], Expect::Any));
        }
        GadgetKind::Replicator { outputs } => {
            let (n, d) = design(kind, "forced");
            let names: Vec<String> = (0..outputs).map(|t| format!("out{t}")).collect();
            let exact: Vec<(&str, Option<Color>)> = names.iter().map(|s| (s.as_str(), Some(Red))).collect();
            let loose: Vec<(&str, Option<Color>)> = names.iter().map(|s| (s.as_str(), None)).collect();
            sc.push(
                Scenario::viable("fan_out", vec![inj("in", Red, 0)], Expect::exact(&exact))
                    .witness(&n, d)
                    .class("fan_out"),
            );
            for c in Color::ALL {
                sc.push(Scenario::forbidden(
                    &format!("fan_other_{c}"),
                    vec![inj("in", c, 0)],
                    Expect::any_except(&[&loose]),
                ));
            }
            sc.push(Scenario::forbidden("reverse", vec![inj("out0", Red, 0)], Expect::Any));
        }
    }
    Contract { kind, scenarios: sc }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_matching_is_a_multiset_match() {
        let spec = specs(&[("top", None), ("top", Some(Blue)), ("right", Some(Red))]);
        assert!(exits_match(&spec, &[("top", Blue), ("right", Red), ("top", Red)]));
        assert!(exits_match(&spec, &[("top", Blue), ("top", Blue), ("right", Red)]));
        assert!(!exits_match(&spec, &[("top", Red), ("top", Red), ("right", Red)]));
        assert!(!exits_match(&spec, &[("top", Blue), ("right", Red)]));
        assert!(exits_match(&[], &[]));
    }

    #[test]
    fn every_contract_has_viable_and_forbidden_scenarios() {
        for kind in GadgetKind::catalog() {
            let c = contract(kind);
            assert!(c.viable().count() > 0, "{kind:?}");
            assert!(c.viable().all(|s| s.witness.is_some()), "{kind:?}");
            if !matches!(kind, GadgetKind::Lane { .. }) {
                assert!(c.forbidden().count() > 0, "{kind:?}");
            }
        }
        assert_eq!(
            contract(GadgetKind::CrossSatisfy).classes(),
            vec!["duplicate".to_string(), "pass_through".to_string()]
        );
    }
}
