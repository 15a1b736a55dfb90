//! Text format for models, events and chronologies.
//!
//! ```text
//! model "shop"
//! thimac Table {
//!   create process
//!   thimac Row {
//!     create
//!     attribute Price
//!   }
//!   flow create -> process
//! }
//! trigger Table.process -> Table.Row.create
//! event Add "add a row" at 2011-01-01 {
//!   include Table.process, Table.Row.create
//!   key Table.Row = 1
//! }
//! chronology Add
//! ```
//!
//! Flows inside a thimac body use relative references: a bare kind names
//! the enclosing thimac's action, `Sub.kind` one of its descendants.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::event::{ChronologySpec, EventDecl};
use crate::model::{FlowArc, StaticModel, ThimacPath, TriggerArc};

pub use parser::parse;
pub use printer::print;

/// Nesting limit for thimac blocks, so hostile input cannot exhaust the stack.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementId {
    Thimac(ThimacPath),
    Flow(FlowArc),
    Trigger(TriggerArc),
    Event(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UnresolvedRef,
    DuplicateName,
    /// The model builder refused the element (self loop, trigger into a
    /// non-create, attribute rules).
    ModelRule,
    /// Malformed event or chronology detail (zero duration, reserved time).
    EventRule,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnresolvedRef => "unresolved reference",
            ParseErrorKind::DuplicateName => "duplicate name",
            ParseErrorKind::ModelRule => "model rule",
            ParseErrorKind::EventRule => "event rule",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelDocument {
    pub model: StaticModel,
    pub events: Vec<EventDecl>,
    /// Empty when the document declares no chronology.
    pub chronology: ChronologySpec,
    pub spans: BTreeMap<ElementId, SourceSpan>,
}

impl ModelDocument {
    /// Equality ignoring source positions.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.model == other.model && self.events == other.events && self.chronology == other.chronology
    }

    pub fn event(&self, id: &str) -> Option<&EventDecl> {
        self.events.iter().find(|e| e.id == id)
    }
}
