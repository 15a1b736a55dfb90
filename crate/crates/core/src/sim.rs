//! Runs an expanded chronology and records existence intervals (exicons).
//!
//! A create in an event's region either brings its thimac into existence
//! (becoming) or, when the thimac already exists, keeps it existing
//! (persisting). A new value for an existing attribute closes the current
//! exicon and opens the next one at the same instant.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::event::{EventDecl, Occurrence};
use crate::model::{ActionKind, StaticModel, ThimacPath, TriggerArc};
use crate::time::{Literal, TimeError, TimePoint};

/// A thimac path where repeatedly created thimacs carry the instance key of
/// the event that created them, e.g. `Table.Row[3].Price`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExistencePath {
    segments: Vec<(String, Option<Literal>)>,
}

impl ExistencePath {
    pub fn new(path: &ThimacPath, keys: &BTreeMap<ThimacPath, Literal>) -> Self {
        let mut segments = Vec::with_capacity(path.depth());
        let mut prefix: Vec<String> = Vec::new();
        for seg in path.segments() {
            prefix.push(seg.clone());
            let key = ThimacPath::new(prefix.iter().cloned())
                .ok()
                .and_then(|p| keys.get(&p).cloned());
            segments.push((seg.clone(), key));
        }
        Self { segments }
    }

    pub fn thimac_path(&self) -> ThimacPath {
        ThimacPath::new(self.segments.iter().map(|(s, _)| s.clone())).expect("segments came from a valid path")
    }

    pub fn name(&self) -> &str {
        &self.segments.last().expect("non-empty").0
    }

    pub fn key(&self) -> Option<&Literal> {
        self.segments.last().and_then(|(_, k)| k.as_ref())
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn parent(&self) -> Option<ExistencePath> {
        (self.segments.len() > 1).then(|| Self {
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }

    /// True for `self` and every path below it.
    pub fn is_within(&self, other: &ExistencePath) -> bool {
        self.segments.starts_with(&other.segments)
    }
}

impl From<&ThimacPath> for ExistencePath {
    fn from(path: &ThimacPath) -> Self {
        Self::new(path, &BTreeMap::new())
    }
}

impl fmt::Display for ExistencePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, key)) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(name)?;
            if let Some(key) = key {
                write!(f, "[{}]", key.to_source())?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exicon {
    /// 1-based, in opening order.
    pub id: usize,
    pub path: ExistencePath,
    pub becoming: TimePoint,
    /// Exclusive end; `None` while the thing still exists.
    pub end: Option<TimePoint>,
    pub value: Option<Literal>,
    pub origin: Occurrence,
}

impl Exicon {
    /// Closed-open containment by interval start.
    pub fn contains(&self, t: &TimePoint) -> bool {
        self.becoming.start() <= t.start() && self.end.is_none_or(|e| t.start() < e.start())
    }
}

/// `id path becoming end|open [value]`
impl fmt::Display for Exicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ", self.id, self.path, self.becoming)?;
        match self.end {
            Some(end) => write!(f, "{end}")?,
            None => f.write_str("open")?,
        }
        if let Some(v) = &self.value {
            write!(f, " {}", v.to_source())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExistenceLedger {
    exicons: Vec<Exicon>,
}

impl ExistenceLedger {
    /// Exicons in opening order, which is also (becoming, id) order for
    /// time-monotone chronologies.
    pub fn exicons(&self) -> &[Exicon] {
        &self.exicons
    }

    pub fn get(&self, id: usize) -> Option<&Exicon> {
        id.checked_sub(1).and_then(|i| self.exicons.get(i))
    }

    pub fn of<'a>(&'a self, path: &'a ExistencePath) -> impl Iterator<Item = &'a Exicon> + 'a {
        self.exicons.iter().filter(move |e| &e.path == path)
    }

    /// Everything that exists at `t`.
    pub fn at<'a>(&'a self, t: &'a TimePoint) -> impl Iterator<Item = &'a Exicon> + 'a {
        self.exicons.iter().filter(move |e| e.contains(t))
    }

    /// Pairs of exicons of one path whose intervals overlap. Empty for every
    /// ledger produced by [`run`].
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        let mut by_path: BTreeMap<&ExistencePath, Vec<&Exicon>> = BTreeMap::new();
        for e in &self.exicons {
            by_path.entry(&e.path).or_default().push(e);
        }
        let mut out = Vec::new();
        for mut list in by_path.into_values() {
            list.sort_by_key(|e| (e.becoming.start(), e.id));
            for pair in list.windows(2) {
                let disjoint = pair[0].end.is_some_and(|end| end.start() <= pair[1].becoming.start());
                if !disjoint {
                    out.push((pair[0].id, pair[1].id));
                }
            }
        }
        out
    }

    /// One exicon per line.
    pub fn dump(&self) -> String {
        self.exicons.iter().map(|e| format!("{e}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Existence {
    pub exists: bool,
    pub value: Option<Literal>,
}

pub fn exists_at(ledger: &ExistenceLedger, path: &ExistencePath, t: &TimePoint) -> Existence {
    match ledger.of(path).find(|e| e.contains(t)) {
        Some(e) => Existence {
            exists: true,
            value: e.value.clone(),
        },
        None => Existence {
            exists: false,
            value: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub occurrence: Occurrence,
    pub label: String,
    pub time: TimePoint,
    /// Exclusive end of the activation, `duration` units after `time`.
    pub until: TimePoint,
    pub opened: Vec<usize>,
    pub persisted: Vec<usize>,
    /// Exicons whose value was replaced at their own becoming instant.
    pub rebound: Vec<usize>,
    pub closed: Vec<usize>,
    /// Triggers from this region whose target create happens in a later
    /// occurrence.
    pub fired: Vec<TriggerArc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("chronology names undeclared event `{0}`")]
    UnknownEvent(String),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error("{occurrence} at {time} starts before the preceding occurrence at {previous}")]
    NonMonotonic {
        occurrence: Occurrence,
        time: TimePoint,
        previous: TimePoint,
    },
    #[error("{occurrence} terminates `{path}`, which does not exist at {time}")]
    TerminateWithoutExistence {
        occurrence: Occurrence,
        path: String,
        time: TimePoint,
    },
    #[error("{occurrence} binds `{path}` without its create in the region")]
    BindingWithoutCreate { occurrence: Occurrence, path: ThimacPath },
    #[error("{occurrence} terminates `{path}` at the instant it came into existence")]
    InstantaneousExistence { occurrence: Occurrence, path: String },
}

pub fn run(
    model: &StaticModel,
    events: &[EventDecl],
    occurrences: &[Occurrence],
) -> Result<(Trace, ExistenceLedger), SimError> {
    let by_id: HashMap<&str, &EventDecl> = events.iter().map(|e| (e.id.as_str(), e)).collect();
    let resolved: Vec<&EventDecl> = occurrences
        .iter()
        .map(|o| {
            by_id
                .get(o.event.as_str())
                .copied()
                .ok_or_else(|| SimError::UnknownEvent(o.event.clone()))
        })
        .collect::<Result<_, _>>()?;
    let creates: Vec<ThimacPath> = model
        .actions()
        .into_iter()
        .filter(|a| a.kind == ActionKind::Create)
        .map(|a| a.thimac)
        .collect();

    let mut ledger = ExistenceLedger::default();
    let mut open: HashMap<ExistencePath, usize> = HashMap::new();
    let mut trace = Trace::default();
    let mut previous: Option<TimePoint> = None;

    for (k, (occ, event)) in occurrences.iter().zip(&resolved).enumerate() {
        let time = event.occurrence_time(occ.repetition)?;
        let until = time.shifted(event.duration)?;
        if let Some(prev) = previous {
            if time.start() < prev.start() {
                return Err(SimError::NonMonotonic {
                    occurrence: occ.clone(),
                    time,
                    previous: prev,
                });
            }
        }
        previous = Some(time);

        for path in event.bindings.keys() {
            if !event.region.contains(&path.action(ActionKind::Create)) {
                return Err(SimError::BindingWithoutCreate {
                    occurrence: occ.clone(),
                    path: path.clone(),
                });
            }
        }

        let mut entry = TraceEntry {
            occurrence: occ.clone(),
            label: event.label.clone(),
            time,
            until,
            opened: Vec::new(),
            persisted: Vec::new(),
            rebound: Vec::new(),
            closed: Vec::new(),
            fired: Vec::new(),
        };

        for thimac in creates
            .iter()
            .filter(|p| event.region.contains(&p.action(ActionKind::Create)))
        {
            let path = ExistencePath::new(thimac, &event.keys);
            let value = event.bindings.get(thimac).cloned();
            let open_new = |ledger: &mut ExistenceLedger, open: &mut HashMap<_, _>, entry: &mut TraceEntry| {
                let id = ledger.exicons.len() + 1;
                ledger.exicons.push(Exicon {
                    id,
                    path: path.clone(),
                    becoming: time,
                    end: None,
                    value: value.clone(),
                    origin: occ.clone(),
                });
                open.insert(path.clone(), id);
                entry.opened.push(id);
            };
            match open.get(&path).copied() {
                None => open_new(&mut ledger, &mut open, &mut entry),
                Some(id) => {
                    let current = &mut ledger.exicons[id - 1];
                    if value.is_none() || value == current.value {
                        entry.persisted.push(id);
                    } else if current.becoming == time {
                        current.value = value.clone();
                        entry.rebound.push(id);
                    } else {
                        current.end = Some(time);
                        entry.closed.push(id);
                        open_new(&mut ledger, &mut open, &mut entry);
                    }
                }
            }
        }

        if let Some(target) = &event.terminates {
            let target = ExistencePath::new(target, &event.keys);
            let mut ending: Vec<usize> = open
                .iter()
                .filter(|(p, _)| p.is_within(&target))
                .map(|(_, &id)| id)
                .collect();
            if !ending.iter().any(|&id| ledger.exicons[id - 1].path == target) {
                return Err(SimError::TerminateWithoutExistence {
                    occurrence: occ.clone(),
                    path: target.to_string(),
                    time,
                });
            }
            ending.sort_unstable();
            for id in ending {
                let exicon = &mut ledger.exicons[id - 1];
                if exicon.becoming.start() >= time.start() {
                    return Err(SimError::InstantaneousExistence {
                        occurrence: occ.clone(),
                        path: exicon.path.to_string(),
                    });
                }
                exicon.end = Some(time);
                open.remove(&exicon.path);
                entry.closed.push(id);
            }
        }

        for trigger in model.triggers() {
            if event.region.contains(&trigger.from)
                && resolved[k + 1..].iter().any(|later| later.region.contains(&trigger.to))
            {
                entry.fired.push(trigger.clone());
            }
        }
        trace.entries.push(entry);
    }
    Ok((trace, ledger))
}
