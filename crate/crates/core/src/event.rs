//! Events as timed regions of the static model, and the checks that a
//! chronology of such events must pass.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::diagnostic::{Diagnostic, RuleCode, Subject};
use crate::model::{ActionKind, ActionRef, FlowArc, StaticModel, ThimacPath, TriggerArc};
use crate::time::{Literal, TimeError, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionArc {
    Flow(FlowArc),
    Trigger(TriggerArc),
}

impl RegionArc {
    pub fn endpoints(&self) -> (&ActionRef, &ActionRef) {
        match self {
            RegionArc::Flow(a) => (&a.from, &a.to),
            RegionArc::Trigger(a) => (&a.from, &a.to),
        }
    }

    fn subject(&self) -> Subject {
        match self {
            RegionArc::Flow(a) => Subject::Flow(a.clone()),
            RegionArc::Trigger(a) => Subject::Trigger(a.clone()),
        }
    }
}

impl fmt::Display for RegionArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionArc::Flow(a) => a.fmt(f),
            RegionArc::Trigger(a) => a.fmt(f),
        }
    }
}

/// Subdiagram of the static model: the atemporal footprint of an event.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Region {
    actions: BTreeSet<ActionRef>,
    arcs: BTreeSet<RegionArc>,
}

impl Region {
    pub fn new(actions: impl IntoIterator<Item = ActionRef>, arcs: impl IntoIterator<Item = RegionArc>) -> Self {
        Self {
            actions: actions.into_iter().collect(),
            arcs: arcs.into_iter().collect(),
        }
    }

    /// The given actions plus every model arc running between two of them.
    pub fn induced(model: &StaticModel, actions: impl IntoIterator<Item = ActionRef>) -> Self {
        let actions: BTreeSet<ActionRef> = actions.into_iter().collect();
        let flows = model
            .flows()
            .iter()
            .filter(|a| actions.contains(&a.from) && actions.contains(&a.to))
            .cloned()
            .map(RegionArc::Flow);
        let triggers = model
            .triggers()
            .iter()
            .filter(|a| actions.contains(&a.from) && actions.contains(&a.to))
            .cloned()
            .map(RegionArc::Trigger);
        let arcs = flows.chain(triggers).collect();
        Self { actions, arcs }
    }

    pub fn actions(&self) -> &BTreeSet<ActionRef> {
        &self.actions
    }

    pub fn arcs(&self) -> &BTreeSet<RegionArc> {
        &self.arcs
    }

    pub fn contains(&self, action: &ActionRef) -> bool {
        self.actions.contains(action)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub id: String,
    pub label: String,
    pub region: Region,
    pub time: TimePoint,
    /// Activation length in units of the time's granularity.
    pub duration: u64,
    pub terminates: Option<ThimacPath>,
    /// Attribute values set by this event.
    pub bindings: BTreeMap<ThimacPath, Literal>,
    /// Instance keys: which instance of a repeatedly created thimac this
    /// event acts on.
    pub keys: BTreeMap<ThimacPath, Literal>,
}

impl EventDecl {
    pub fn new(id: impl Into<String>, label: impl Into<String>, region: Region, time: TimePoint) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            region,
            time,
            duration: 1,
            terminates: None,
            bindings: BTreeMap::new(),
            keys: BTreeMap::new(),
        }
    }

    /// Time of the `repetition`-th pass (1-based) through a repeat group;
    /// later passes start where the previous activation ended.
    pub fn occurrence_time(&self, repetition: u32) -> Result<TimePoint, TimeError> {
        let k = u64::from(repetition.max(1) - 1);
        let units = k
            .checked_mul(self.duration)
            .ok_or(TimeError::Overflow(self.time, u64::MAX))?;
        self.time.shifted(units)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChronologyEntry {
    Event(String),
    Repeat { count: u32, events: Vec<String> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChronologySpec {
    pub entries: Vec<ChronologyEntry>,
}

impl ChronologySpec {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn event_ids(&self) -> impl Iterator<Item = &String> {
        self.entries.iter().flat_map(|e| match e {
            ChronologyEntry::Event(id) => std::slice::from_ref(id).iter(),
            ChronologyEntry::Repeat { events, .. } => events.iter(),
        })
    }
}

/// One pass of an event through the chronology.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub event: String,
    /// 1-based pass within the enclosing repeat group; 1 outside groups.
    pub repetition: u32,
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.event, self.repetition)
    }
}

/// Unrolls repeat groups in place.
pub fn expand(chronology: &ChronologySpec) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for entry in &chronology.entries {
        match entry {
            ChronologyEntry::Event(id) => out.push(Occurrence {
                event: id.clone(),
                repetition: 1,
            }),
            ChronologyEntry::Repeat { count, events } => {
                for k in 1..=*count {
                    out.extend(events.iter().map(|id| Occurrence {
                        event: id.clone(),
                        repetition: k,
                    }));
                }
            }
        }
    }
    out
}

/// Empty iff the region is a non-empty, weakly connected subdiagram of the model.
pub fn check_region(model: &StaticModel, region: &Region) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let Some(first) = region.actions.iter().next() else {
        return vec![Diagnostic::error(
            RuleCode::EmptyRegion,
            Subject::Events(Vec::new()),
            "region has no actions",
        )];
    };
    for action in &region.actions {
        if !model.resolves(action) {
            out.push(Diagnostic::error(
                RuleCode::SubdiagramViolation,
                Subject::Action(action.clone()),
                "action is not part of the static model",
            ));
        }
    }
    for arc in &region.arcs {
        let in_model = match arc {
            RegionArc::Flow(a) => model.flows().contains(a),
            RegionArc::Trigger(a) => model.triggers().contains(a),
        };
        if !in_model {
            out.push(Diagnostic::error(
                RuleCode::SubdiagramViolation,
                arc.subject(),
                "arc is not part of the static model",
            ));
        }
        let (from, to) = arc.endpoints();
        for end in [from, to] {
            if !region.actions.contains(end) {
                out.push(Diagnostic::error(
                    RuleCode::SubdiagramViolation,
                    arc.subject(),
                    format!("endpoint `{end}` lies outside the region"),
                ));
            }
        }
    }

    let mut neighbours: HashMap<&ActionRef, Vec<&ActionRef>> = HashMap::new();
    for arc in &region.arcs {
        let (from, to) = arc.endpoints();
        if region.actions.contains(from) && region.actions.contains(to) {
            neighbours.entry(from).or_default().push(to);
            neighbours.entry(to).or_default().push(from);
        }
    }
    let mut reached: HashSet<&ActionRef> = HashSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(node) = queue.pop_front() {
        for &next in neighbours.get(node).into_iter().flatten() {
            if reached.insert(next) {
                queue.push_back(next);
            }
        }
    }
    for action in &region.actions {
        if !reached.contains(action) {
            out.push(Diagnostic::error(
                RuleCode::Disconnected,
                Subject::Action(action.clone()),
                format!("action is not connected to `{first}` within the region"),
            ));
        }
    }
    out
}

/// Region, binding, key and termination checks for every event.
pub fn check_events(model: &StaticModel, events: &[EventDecl]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for event in events {
        let subject = || Subject::Event(event.id.clone());
        for d in check_region(model, &event.region) {
            let message = match &d.subject {
                Subject::Events(ids) if ids.is_empty() => d.message.clone(),
                s => format!("{s}: {}", d.message),
            };
            out.push(Diagnostic {
                subject: subject(),
                message,
                ..d
            });
        }
        for path in event.bindings.keys() {
            let problem = match model.thimac(path) {
                None => Some("names no thimac"),
                Some(t) if !t.is_attribute() => Some("is not an attribute"),
                Some(_) if !event.region.contains(&path.action(ActionKind::Create)) => {
                    Some("has no create in the region")
                }
                Some(_) => None,
            };
            if let Some(problem) = problem {
                out.push(Diagnostic::error(
                    RuleCode::InvalidBinding,
                    subject(),
                    format!("binding `{path}` {problem}"),
                ));
            }
        }
        for path in event.keys.keys() {
            if model.thimac(path).is_none() {
                out.push(Diagnostic::error(
                    RuleCode::InvalidBinding,
                    subject(),
                    format!("key `{path}` names no thimac"),
                ));
            }
        }
        if let Some(path) = &event.terminates {
            if !model.resolves(&path.action(ActionKind::Create)) {
                out.push(Diagnostic::error(
                    RuleCode::InvalidTermination,
                    subject(),
                    format!("`{path}` has no create, so it never exists"),
                ));
            }
        }
    }
    out.sort_by_key(|d| d.code);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("events are mutually reachable: {}", .0.iter().map(|c| c.join(", ")).collect::<Vec<_>>().join("; "))]
    CyclicOrder(Vec<Vec<String>>),
}

/// Logical order among events induced by the static arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowOrder {
    ids: Vec<String>,
    direct: Vec<Vec<bool>>,
    closure: Vec<Vec<bool>>,
    cyclic: Vec<bool>,
}

impl FlowOrder {
    /// Event `a` reaches event `b` when a path of one or more model arcs
    /// leads from an action of `a` to an action of `b` without using an arc
    /// that lies wholly inside either region.
    pub fn derive(model: &StaticModel, events: &[EventDecl]) -> Self {
        let actions = model.actions();
        let index: HashMap<&ActionRef, usize> = actions.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let arcs: Vec<(usize, usize)> = model
            .flows()
            .iter()
            .map(|a| (&a.from, &a.to))
            .chain(model.triggers().iter().map(|a| (&a.from, &a.to)))
            .filter_map(|(f, t)| Some((*index.get(f)?, *index.get(t)?)))
            .collect();
        let members: Vec<Vec<bool>> = events
            .iter()
            .map(|e| {
                let mut m = vec![false; actions.len()];
                for a in e.region.actions() {
                    if let Some(&i) = index.get(a) {
                        m[i] = true;
                    }
                }
                m
            })
            .collect();

        let n = events.len();
        let mut direct = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let (ma, mb) = (&members[a], &members[b]);
                let mut succ = vec![Vec::new(); actions.len()];
                for &(f, t) in &arcs {
                    let interior = (ma[f] && ma[t]) || (mb[f] && mb[t]);
                    if !interior {
                        succ[f].push(t);
                    }
                }
                // seed with one step so that shared actions do not count as reached
                let mut seen = vec![false; actions.len()];
                let mut queue: VecDeque<usize> = VecDeque::new();
                for s in (0..actions.len()).filter(|&i| ma[i]) {
                    for &t in &succ[s] {
                        if !seen[t] {
                            seen[t] = true;
                            queue.push_back(t);
                        }
                    }
                }
                while let Some(v) = queue.pop_front() {
                    if mb[v] {
                        direct[a][b] = true;
                        break;
                    }
                    for &t in &succ[v] {
                        if !seen[t] {
                            seen[t] = true;
                            queue.push_back(t);
                        }
                    }
                }
            }
        }

        let mut closure = direct.clone();
        for k in 0..n {
            for i in 0..n {
                if closure[i][k] {
                    let via = closure[k].clone();
                    for (cell, reach) in closure[i].iter_mut().zip(via) {
                        *cell |= reach;
                    }
                }
            }
        }
        let cyclic = (0..n).map(|i| closure[i][i]).collect();
        Self {
            ids: events.iter().map(|e| e.id.clone()).collect(),
            direct,
            closure,
            cyclic,
        }
    }

    fn index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// The raw reachability relation, before closure.
    pub fn reaches(&self, a: &str, b: &str) -> bool {
        matches!((self.index(a), self.index(b)), (Some(i), Some(j)) if self.direct[i][j])
    }

    /// Strict precedence on the acyclic core.
    pub fn precedes(&self, a: &str, b: &str) -> bool {
        matches!((self.index(a), self.index(b)), (Some(i), Some(j)) if self.precedes_idx(i, j))
    }

    fn precedes_idx(&self, i: usize, j: usize) -> bool {
        !self.cyclic[i] && !self.cyclic[j] && self.closure[i][j]
    }

    /// Groups of mutually reachable events.
    pub fn cycles(&self) -> Vec<Vec<String>> {
        let n = self.ids.len();
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if !self.cyclic[i] || assigned[i] {
                continue;
            }
            let group: Vec<usize> = (0..n)
                .filter(|&j| j == i || (self.closure[i][j] && self.closure[j][i]))
                .collect();
            for &j in &group {
                assigned[j] = true;
            }
            out.push(group.into_iter().map(|j| self.ids[j].clone()).collect());
        }
        out
    }

    /// Transitive reduction of the core order, in declaration order.
    pub fn reduction(&self) -> Vec<(String, String)> {
        let n = self.ids.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.precedes_idx(i, j) && !(0..n).any(|k| self.precedes_idx(i, k) && self.precedes_idx(k, j)) {
                    out.push((self.ids[i].clone(), self.ids[j].clone()));
                }
            }
        }
        out
    }
}

pub fn derive_flow_order(model: &StaticModel, events: &[EventDecl]) -> Result<FlowOrder, OrderError> {
    let order = FlowOrder::derive(model, events);
    let cycles = order.cycles();
    if cycles.is_empty() {
        Ok(order)
    } else {
        Err(OrderError::CyclicOrder(cycles))
    }
}

/// Identity, logical-order and time-monotonicity checks over the expanded
/// chronology.
pub fn check_chronology(model: &StaticModel, events: &[EventDecl], chronology: &ChronologySpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let by_id: HashMap<&str, usize> = events.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();

    let mut reported = HashSet::new();
    for id in chronology.event_ids() {
        if !by_id.contains_key(id.as_str()) && reported.insert(id) {
            out.push(Diagnostic::error(
                RuleCode::UnknownEvent,
                Subject::Event(id.clone()),
                "chronology names an undeclared event",
            ));
        }
    }

    let order = FlowOrder::derive(model, events);
    for cycle in order.cycles() {
        out.push(Diagnostic::error(
            RuleCode::CyclicOrder,
            Subject::Events(cycle),
            "events reach each other through the static arcs",
        ));
    }

    let occurrences = expand(chronology);
    let occurring: HashSet<usize> = occurrences
        .iter()
        .filter_map(|o| by_id.get(o.event.as_str()).copied())
        .collect();
    let mut seen = vec![false; events.len()];
    let mut identities: HashMap<(&Region, &BTreeMap<ThimacPath, Literal>, TimePoint), &Occurrence> = HashMap::new();
    let mut previous: Option<TimePoint> = None;
    for occ in &occurrences {
        let Some(&idx) = by_id.get(occ.event.as_str()) else {
            continue;
        };
        let event = &events[idx];
        let time = match event.occurrence_time(occ.repetition) {
            Ok(t) => t,
            Err(e) => {
                out.push(Diagnostic::error(
                    RuleCode::TimeMonotonicity,
                    Subject::Event(event.id.clone()),
                    e.to_string(),
                ));
                continue;
            }
        };

        match identities.get(&(&event.region, &event.keys, time)) {
            Some(first) => out.push(Diagnostic::error(
                RuleCode::IdentityViolation,
                Subject::Events(vec![first.to_string(), occ.to_string()]),
                format!("same region at the same time {time}"),
            )),
            None => {
                identities.insert((&event.region, &event.keys, time), occ);
            }
        }

        for (j, other) in events.iter().enumerate() {
            if occurring.contains(&j) && !seen[j] && order.precedes_idx(j, idx) {
                out.push(Diagnostic::error(
                    RuleCode::OrderViolation,
                    Subject::Events(vec![occ.to_string(), other.id.clone()]),
                    format!("{} occurs before {}, which precedes it", event.id, other.id),
                ));
            }
        }

        if let Some(prev) = previous {
            if time.start() < prev.start() {
                out.push(Diagnostic::warning(
                    RuleCode::TimeMonotonicity,
                    Subject::Event(occ.to_string()),
                    format!("time {time} is earlier than the preceding entry's {prev}"),
                ));
            }
        }
        seen[idx] = true;
        previous = Some(time);
    }
    out.sort_by_key(|d| d.code);
    out
}
