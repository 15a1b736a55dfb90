use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::Days;
use thiserror::Error;

use super::Table;
use crate::model::is_identifier;
use crate::sim::{exists_at, ExistenceLedger, ExistencePath, Trace};
use crate::time::{Literal, TimePoint};

/// What an open end prints as.
pub const SENTINEL_TEXT: &str = "9999-12-31";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLogRow {
    pub time: TimePoint,
    pub description: String,
}

/// One row per occurrence, ordered by time with ties kept in chronology order.
pub fn emit_event_log(trace: &Trace) -> Vec<EventLogRow> {
    let mut rows: Vec<EventLogRow> = trace
        .entries
        .iter()
        .map(|e| EventLogRow {
            time: e.time,
            description: e.label.clone(),
        })
        .collect();
    rows.sort_by_key(|r| r.time.sort_key());
    rows
}

/// Marks the quiet day before an event with a `Nothing` row when the event
/// follows the previous day-granular row after a gap of at most `max_gap`
/// days. Rows of other granularities are never filled around.
pub fn fill_days(rows: &[EventLogRow], max_gap: u64) -> Vec<EventLogRow> {
    let mut out = Vec::with_capacity(rows.len());
    let mut prev: Option<&EventLogRow> = None;
    for row in rows {
        if let (Some(p), TimePoint::Day(next)) = (prev, row.time) {
            if let TimePoint::Day(last) = p.time {
                let gap = (next - last).num_days();
                if gap > 1 && gap as u64 <= max_gap {
                    out.push(EventLogRow {
                        time: TimePoint::Day(next - Days::new(1)),
                        description: "Nothing".into(),
                    });
                }
            }
        }
        out.push(row.clone());
        prev = Some(row);
    }
    out
}

impl EventLogRow {
    pub fn table(rows: &[EventLogRow]) -> Table {
        Table {
            header: vec!["Date".into(), "description".into()],
            rows: rows
                .iter()
                .map(|r| vec![r.time.to_string(), r.description.clone()])
                .collect(),
        }
    }
}

/// Dotted thimac pattern where `*` matches any one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPattern(Vec<Option<String>>);

impl GroupPattern {
    pub fn matches(&self, path: &ExistencePath) -> bool {
        let thimac = path.thimac_path();
        let segs = thimac.segments();
        segs.len() == self.0.len() && self.0.iter().zip(segs).all(|(p, s)| p.as_ref().is_none_or(|p| p == s))
    }
}

impl FromStr for GroupPattern {
    type Err = EmitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split('.')
            .map(|seg| match seg {
                "*" => Ok(None),
                seg if is_identifier(seg) => Ok(Some(seg.to_string())),
                _ => Err(EmitError::InvalidPattern(s.to_string())),
            })
            .collect::<Result<_, _>>()
            .map(GroupPattern)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("invalid group pattern `{0}`")]
    InvalidPattern(String),
    #[error("`{entity}` has no id attribute")]
    NoIdAttribute { entity: String },
    #[error("`{entity}` lacks a value for `{attribute}` at {at}")]
    MissingAttribute {
        entity: String,
        attribute: String,
        at: TimePoint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryRow {
    pub row: usize,
    pub id: Literal,
    pub start: TimePoint,
    /// `None` while the row's state still holds.
    pub end: Option<TimePoint>,
    pub attributes: Vec<Literal>,
}

impl HistoryRow {
    pub fn holds_at(&self, t: &TimePoint) -> bool {
        self.start.start() <= t.start() && self.end.is_none_or(|e| t.start() < e.start())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryTable {
    /// Attribute column names, lowercased, in order of first appearance.
    pub columns: Vec<String>,
    pub rows: Vec<HistoryRow>,
}

impl HistoryTable {
    pub fn table(&self) -> Table {
        let mut header: Vec<String> = ["Row", "id", "startTime", "endTime"].map(String::from).to_vec();
        header.extend(self.columns.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.row.to_string(),
                    r.id.to_string(),
                    r.start.to_string(),
                    r.end.map_or_else(|| SENTINEL_TEXT.to_string(), |e| e.to_string()),
                ];
                cells.extend(r.attributes.iter().map(ToString::to_string));
                cells
            })
            .collect();
        Table { header, rows }
    }
}

/// One row per maximal interval over which every attribute of one entity
/// stays constant. Entities are the existence paths selected by `pattern`;
/// their attribute children supply the cells, the one named `id` (any
/// case) the row identity.
pub fn emit_history_table(ledger: &ExistenceLedger, pattern: &GroupPattern) -> Result<HistoryTable, EmitError> {
    let mut entities: Vec<&ExistencePath> = Vec::new();
    for e in ledger.exicons() {
        if pattern.matches(&e.path) && !entities.contains(&&e.path) {
            entities.push(&e.path);
        }
    }

    // attribute children per entity, in first-exicon order
    let mut children: BTreeMap<&ExistencePath, Vec<&ExistencePath>> = BTreeMap::new();
    let mut columns: Vec<String> = Vec::new();
    for e in ledger.exicons() {
        let Some(parent) = e.path.parent() else { continue };
        let Some(&entity) = entities.iter().find(|p| ***p == parent) else {
            continue;
        };
        let list = children.entry(entity).or_default();
        if !list.contains(&&e.path) {
            list.push(&e.path);
        }
        let name = e.path.name().to_ascii_lowercase();
        if e.value.is_some() && name != "id" && !columns.contains(&name) {
            columns.push(name);
        }
    }

    let mut rows = Vec::new();
    for entity in entities {
        let kids = children.get(entity).map(Vec::as_slice).unwrap_or(&[]);
        let id_path = *kids
            .iter()
            .find(|p| p.name().eq_ignore_ascii_case("id"))
            .ok_or_else(|| EmitError::NoIdAttribute {
                entity: entity.to_string(),
            })?;
        let column_paths: Vec<(&String, Option<&ExistencePath>)> = columns
            .iter()
            .map(|c| (c, kids.iter().copied().find(|p| p.name().eq_ignore_ascii_case(c))))
            .collect();

        for life in ledger.of(entity) {
            let mut cuts: Vec<TimePoint> = vec![life.becoming];
            for kid in kids {
                for x in ledger.of(kid) {
                    cuts.push(x.becoming);
                    cuts.extend(x.end);
                }
            }
            cuts.retain(|c| life.contains(c));
            cuts.sort_by_key(TimePoint::sort_key);
            cuts.dedup_by_key(|c| c.start());

            let mut current: Option<HistoryRow> = None;
            for (i, &at) in cuts.iter().enumerate() {
                let end = cuts.get(i + 1).copied().or(life.end);
                let value_of = |path: Option<&ExistencePath>, name: &str| {
                    path.and_then(|p| exists_at(ledger, p, &at).value)
                        .ok_or_else(|| EmitError::MissingAttribute {
                            entity: entity.to_string(),
                            attribute: name.to_string(),
                            at,
                        })
                };
                let id = value_of(Some(id_path), id_path.name())?;
                let attributes = column_paths
                    .iter()
                    .map(|(name, path)| value_of(*path, name))
                    .collect::<Result<Vec<_>, _>>()?;
                match &mut current {
                    Some(row) if row.id == id && row.attributes == attributes => row.end = end,
                    _ => {
                        rows.extend(current.take());
                        current = Some(HistoryRow {
                            row: 0,
                            id,
                            start: at,
                            end,
                            attributes,
                        });
                    }
                }
            }
            rows.extend(current);
        }
    }

    rows.sort_by(|a, b| {
        a.id.cmp(&b.id)
            .then_with(|| a.start.sort_key().cmp(&b.start.sort_key()))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.row = i + 1;
    }
    Ok(HistoryTable { columns, rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotRow {
    pub row: usize,
    pub id: Literal,
    pub attributes: Vec<Literal>,
}

/// The rows holding at `t`, renumbered from 1.
pub fn snapshot(history: &HistoryTable, t: &TimePoint) -> (Vec<SnapshotRow>, Table) {
    let rows: Vec<SnapshotRow> = history
        .rows
        .iter()
        .filter(|r| r.holds_at(t))
        .enumerate()
        .map(|(i, r)| SnapshotRow {
            row: i + 1,
            id: r.id.clone(),
            attributes: r.attributes.clone(),
        })
        .collect();
    let mut header = vec!["Row".to_string(), "id".to_string()];
    header.extend(history.columns.iter().cloned());
    let cells = rows
        .iter()
        .map(|r| {
            let mut c = vec![r.row.to_string(), r.id.to_string()];
            c.extend(r.attributes.iter().map(ToString::to_string));
            c
        })
        .collect();
    (rows, Table { header, rows: cells })
}
