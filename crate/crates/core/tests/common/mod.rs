//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use thimac::dsl::ModelDocument;
use thimac::event::{ChronologyEntry, ChronologySpec, EventDecl, Occurrence, Region};
use thimac::model::{ActionKind, ActionRef, ActionSet, StaticModel, ThimacPath};
use thimac::sim::{run, ExistenceLedger, SimError, Trace};
use thimac::time::{Literal, TimePoint};

/// Includes words the grammar also uses, so the printer's output is
/// exercised against keyword-like names.
pub const NAMES: &[&str] = &[
    "A", "B", "Cx", "Depot", "Row", "Id", "Price", "flow", "Create", "process", "event", "repeat", "key", "at", "t9_x",
];

pub fn action_set(rng: &mut StdRng, p: f64) -> ActionSet {
    ActionKind::ALL.iter().copied().filter(|_| rng.gen_bool(p)).collect()
}

/// A thimac tree of `count` nodes with random nesting; attribute leaves when
/// `attributes` is set.
pub fn random_tree(rng: &mut StdRng, count: usize, attributes: bool, p_action: f64) -> StaticModel {
    let mut m = StaticModel::new("");
    let mut containers: Vec<Option<ThimacPath>> = vec![None];
    for _ in 0..count {
        let parent = containers.choose(rng).cloned().expect("non-empty");
        let attribute = attributes && parent.is_some() && rng.gen_bool(0.3);
        let mut actions = action_set(rng, p_action);
        if attribute {
            actions.insert(ActionKind::Create);
        }
        for _ in 0..4 {
            let name = NAMES.choose(rng).expect("non-empty");
            if let Ok(path) = m.add_thimac(parent.as_ref(), name, actions, attribute) {
                if !attribute {
                    containers.push(Some(path));
                }
                break;
            }
        }
    }
    m
}

/// Small models with arbitrary flows between at most `max_actions` actions.
pub fn random_flow_model(rng: &mut StdRng, max_actions: usize) -> StaticModel {
    loop {
        let thimacs = rng.gen_range(1..=4);
        let m = random_tree(rng, thimacs, false, 0.45);
        let n = m.actions().len();
        if n < 2 || n > max_actions {
            continue;
        }
        let mut m = m;
        let actions = m.actions();
        let transfers: Vec<ActionRef> = actions
            .iter()
            .filter(|a| a.kind == ActionKind::Transfer)
            .cloned()
            .collect();
        let flows = rng.gen_range(1..=n * 2);
        for _ in 0..flows {
            let mut from = actions.choose(rng).expect("non-empty").clone();
            let mut to = actions.choose(rng).expect("non-empty").clone();
            // transfers are where routes enter and leave
            if !transfers.is_empty() && rng.gen_bool(0.4) {
                if rng.gen_bool(0.5) {
                    from = transfers.choose(rng).expect("non-empty").clone();
                } else {
                    to = transfers.choose(rng).expect("non-empty").clone();
                }
            }
            let _ = m.add_flow(from, to);
        }
        return m;
    }
}

pub fn random_text(rng: &mut StdRng) -> String {
    const PIECES: &[&str] = &[
        "a",
        "Old",
        " ",
        "\"",
        "\\",
        "é",
        "’",
        "\t",
        "\n",
        "#",
        "{",
        "}",
        "->",
        "9999-12-31",
        "x y",
    ];
    (0..rng.gen_range(0..6))
        .map(|_| *PIECES.choose(rng).expect("non-empty"))
        .collect()
}

pub fn random_literal(rng: &mut StdRng) -> Literal {
    match rng.gen_range(0..4) {
        0 => Literal::Int(rng.gen()),
        1 => Literal::Int(rng.gen_range(-3..20)),
        _ => Literal::Text(random_text(rng)),
    }
}

pub fn random_time(rng: &mut StdRng) -> TimePoint {
    loop {
        let t = match rng.gen_range(0..4) {
            0 => TimePoint::Year(rng.gen_range(0..=9999)),
            1 => TimePoint::Tick(rng.gen()),
            2 => TimePoint::Tick(rng.gen_range(0..20_000)),
            _ => {
                let text = format!(
                    "{:04}-{:02}-{:02}",
                    rng.gen_range(0..=9999),
                    rng.gen_range(1..=12),
                    rng.gen_range(1..=31)
                );
                match TimePoint::parse(&text) {
                    Ok(t) => t,
                    Err(_) => continue,
                }
            }
        };
        if t != TimePoint::sentinel() {
            return t;
        }
    }
}

/// Any document the parser accepts: arbitrary arcs, events and
/// chronologies, not necessarily valid under the structural rules.
pub fn random_document(rng: &mut StdRng) -> ModelDocument {
    let count = rng.gen_range(0..7);
    let mut model = random_tree(rng, count, true, 0.5);
    if rng.gen_bool(0.5) {
        model.set_name(random_text(rng));
    }
    let actions = model.actions();
    let thimacs: Vec<ThimacPath> = model.thimacs().into_iter().map(|(p, _)| p).collect();
    if !actions.is_empty() {
        for _ in 0..rng.gen_range(0..8) {
            let from = actions.choose(rng).expect("non-empty").clone();
            let to = actions.choose(rng).expect("non-empty").clone();
            if rng.gen_bool(0.7) {
                let _ = model.add_flow(from, to);
            } else {
                let _ = model.add_trigger(from, ActionRef::new(to.thimac, ActionKind::Create));
            }
        }
    }

    let mut events = Vec::new();
    let ids = ["E1", "E2", "Born", "repeat", "at", "key"];
    for id in ids.iter().take(rng.gen_range(0..=ids.len())) {
        let included: Vec<ActionRef> = actions.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        let mut e = EventDecl::new(
            *id,
            random_text(rng),
            Region::induced(&model, included),
            random_time(rng),
        );
        e.duration = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(2..1000) };
        if !thimacs.is_empty() {
            if rng.gen_bool(0.3) {
                e.terminates = thimacs.choose(rng).cloned();
            }
            for _ in 0..rng.gen_range(0..3) {
                e.bindings
                    .insert(thimacs.choose(rng).expect("non-empty").clone(), random_literal(rng));
            }
            for _ in 0..rng.gen_range(0..2) {
                e.keys
                    .insert(thimacs.choose(rng).expect("non-empty").clone(), random_literal(rng));
            }
        }
        events.push(e);
    }

    let mut entries = Vec::new();
    if !events.is_empty() {
        for _ in 0..rng.gen_range(0..5) {
            let id = events.choose(rng).expect("non-empty").id.clone();
            if rng.gen_bool(0.7) {
                entries.push(ChronologyEntry::Event(id));
            } else {
                let more = events.choose(rng).expect("non-empty").id.clone();
                entries.push(ChronologyEntry::Repeat {
                    count: rng.gen_range(1..5),
                    events: vec![id, more],
                });
            }
        }
    }
    ModelDocument {
        model,
        events,
        chronology: ChronologySpec { entries },
        spans: BTreeMap::new(),
    }
}

pub struct Scenario {
    pub model: StaticModel,
    pub events: Vec<EventDecl>,
    pub chronology: ChronologySpec,
}

impl Scenario {
    pub fn occurrences(&self) -> Vec<Occurrence> {
        thimac::event::expand(&self.chronology)
    }

    pub fn run(&self) -> Result<(Trace, ExistenceLedger), SimError> {
        run(&self.model, &self.events, &self.occurrences())
    }
}

/// A model with zero structural errors: creates feed process and release
/// inside each thimac, and triggers link thimacs.
pub fn random_valid_model(rng: &mut StdRng) -> StaticModel {
    let count = rng.gen_range(1..7);
    let mut m = random_tree(rng, count, true, 0.6);
    let thimacs: Vec<(ThimacPath, ActionSet)> = m.thimacs().into_iter().map(|(p, t)| (p, t.actions())).collect();
    use ActionKind::*;
    for (path, actions) in &thimacs {
        for (f, t) in [
            (Create, Process),
            (Process, Release),
            (Create, Release),
            (Receive, Process),
        ] {
            if actions.contains(f) && actions.contains(t) && rng.gen_bool(0.7) {
                m.add_flow(path.action(f), path.action(t)).expect("declared actions");
            }
        }
    }
    let actions = m.actions();
    let creates: Vec<&ActionRef> = actions.iter().filter(|a| a.kind == Create).collect();
    if !creates.is_empty() {
        for _ in 0..rng.gen_range(0..6) {
            let from = actions.choose(rng).expect("non-empty").clone();
            let to = (*creates.choose(rng).expect("non-empty")).clone();
            let _ = m.add_trigger(from, to);
        }
    }
    assert!(
        !thimac::diagnostic::has_errors(&thimac::validate::validate(&m)),
        "generator produced an invalid model"
    );
    m
}

/// Connected region grown from a random action along arcs.
pub fn random_region(rng: &mut StdRng, m: &StaticModel) -> Region {
    let actions = m.actions();
    let seed = actions.choose(rng).expect("model has actions").clone();
    let mut included = vec![seed];
    let mut frontier = 0;
    while frontier < included.len() {
        let here = included[frontier].clone();
        frontier += 1;
        let neighbours = m
            .flows()
            .iter()
            .map(|a| (&a.from, &a.to))
            .chain(m.triggers().iter().map(|a| (&a.from, &a.to)))
            .filter_map(|(f, t)| {
                if *f == here {
                    Some(t.clone())
                } else if *t == here {
                    Some(f.clone())
                } else {
                    None
                }
            })
            .collect::<Vec<_>>();
        for n in neighbours {
            if !included.contains(&n) && rng.gen_bool(0.5) {
                included.push(n);
            }
        }
    }
    Region::induced(m, included)
}

/// Valid model, connected event regions, and a time-monotone chronology
/// that the simulator accepts.
pub fn random_scenario(rng: &mut StdRng) -> Scenario {
    let model = loop {
        let m = random_valid_model(rng);
        if !m.actions().is_empty() {
            break m;
        }
    };
    let thimacs: Vec<ThimacPath> = model
        .thimacs()
        .into_iter()
        .filter(|(_, t)| t.actions().contains(ActionKind::Create))
        .map(|(p, _)| p)
        .collect();
    let pool = [Literal::Int(1), Literal::Int(2), Literal::from("a"), Literal::from("b")];

    let count = rng.gen_range(1..8);
    let mut events: Vec<EventDecl> = Vec::new();
    for k in 0..count {
        let region = random_region(rng, &model);
        let mut e = EventDecl::new(format!("E{k}"), format!("event {k}"), region, TimePoint::Tick(0));
        for a in e.region.actions().clone() {
            if a.kind == ActionKind::Create
                && model.thimac(&a.thimac).is_some_and(|t| t.is_attribute())
                && rng.gen_bool(0.7)
            {
                e.bindings
                    .insert(a.thimac.clone(), pool.choose(rng).expect("non-empty").clone());
            }
        }
        if let Some(t) = thimacs.choose(rng).filter(|_| rng.gen_bool(0.3)) {
            e.keys.insert(t.clone(), Literal::Int(rng.gen_range(1..3)));
        }
        if rng.gen_bool(0.25) {
            e.terminates = thimacs.choose(rng).cloned();
        }
        e.duration = rng.gen_range(1..4);
        events.push(e);
    }

    // each event appears once; groups share one time and duration
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(rng);
    let mut entries = Vec::new();
    let mut clock = rng.gen_range(0..5u64);
    let mut i = 0;
    while i < order.len() {
        if rng.gen_bool(0.25) && i + 1 < order.len() {
            let take = rng.gen_range(1..=2).min(order.len() - i);
            let reps: u32 = rng.gen_range(1..4);
            let duration = rng.gen_range(1..4);
            let group = &order[i..i + take];
            for &g in group {
                events[g].time = TimePoint::Tick(clock);
                events[g].duration = duration;
            }
            entries.push(ChronologyEntry::Repeat {
                count: reps,
                events: group.iter().map(|&g| events[g].id.clone()).collect(),
            });
            clock += duration * u64::from(reps) + rng.gen_range(0..3);
            i += take;
        } else {
            events[order[i]].time = TimePoint::Tick(clock);
            entries.push(ChronologyEntry::Event(events[order[i]].id.clone()));
            clock += rng.gen_range(0..3);
            i += 1;
        }
    }

    let mut scenario = Scenario {
        model,
        events,
        chronology: ChronologySpec { entries },
    };
    // drop terminations the run cannot honour
    loop {
        match scenario.run() {
            Ok(_) => return scenario,
            Err(
                SimError::TerminateWithoutExistence { occurrence, .. }
                | SimError::InstantaneousExistence { occurrence, .. },
            ) => {
                let e = scenario
                    .events
                    .iter_mut()
                    .find(|e| e.id == occurrence.event)
                    .expect("known event");
                e.terminates = None;
            }
            Err(other) => panic!("unexpected simulation error: {other}"),
        }
    }
}

pub const STORE: &str = "\
thimac Store {
  create process
  thimac Item {
    create
    attribute Id
    attribute Name
    attribute Cost
  }
  flow create -> process
}
trigger Store.process -> Store.Item.create
trigger Store.Item.create -> Store.Item.Id.create
trigger Store.Item.create -> Store.Item.Name.create
trigger Store.Item.create -> Store.Item.Cost.create
trigger Store.process -> Store.Item.Cost.create
trigger Store.process -> Store.Item.Name.create
";

/// Entity-table workload: items inserted, updated and deleted over time.
pub fn random_store(rng: &mut StdRng) -> Scenario {
    let doc = thimac::dsl::parse(STORE).expect("store model parses");
    let model = doc.model;
    let a = |s: &str| -> ActionRef { s.parse().expect("valid ref") };
    let item: ThimacPath = "Store.Item".parse().expect("valid path");
    let attr = |n: &str| -> ThimacPath { format!("Store.Item.{n}").parse().expect("valid path") };

    let mut live = [false; 4];
    let mut events = Vec::new();
    let mut entries = Vec::new();
    let mut clock = 0u64;
    for k in 0..rng.gen_range(1..25) {
        let key = rng.gen_range(0..4usize);
        let id = format!("Op{k}");
        let mut e = EventDecl::new(id.clone(), id.clone(), Region::default(), TimePoint::Tick(clock));
        e.keys.insert(item.clone(), Literal::Int(key as i64));
        let names = ["x", "y"];
        if !live[key] {
            e.region = Region::induced(
                &model,
                [
                    "Store.process",
                    "Store.Item.create",
                    "Store.Item.Id.create",
                    "Store.Item.Name.create",
                    "Store.Item.Cost.create",
                ]
                .map(a),
            );
            e.bindings.insert(attr("Id"), Literal::Int(key as i64 * 10));
            e.bindings
                .insert(attr("Name"), Literal::from(*names.choose(rng).expect("non-empty")));
            e.bindings.insert(attr("Cost"), Literal::Int(rng.gen_range(1..4)));
            live[key] = true;
        } else if rng.gen_bool(0.25) {
            e.region = Region::induced(&model, [a("Store.process")]);
            e.terminates = Some(item.clone());
            live[key] = false;
        } else if rng.gen_bool(0.5) {
            e.region = Region::induced(&model, [a("Store.process"), a("Store.Item.Cost.create")]);
            e.bindings.insert(attr("Cost"), Literal::Int(rng.gen_range(1..4)));
        } else {
            e.region = Region::induced(&model, [a("Store.process"), a("Store.Item.Name.create")]);
            e.bindings
                .insert(attr("Name"), Literal::from(*names.choose(rng).expect("non-empty")));
        }
        events.push(e);
        entries.push(ChronologyEntry::Event(id));
        clock += rng.gen_range(1..4);
    }
    Scenario {
        model,
        events,
        chronology: ChronologySpec { entries },
    }
}
