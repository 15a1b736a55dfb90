use std::fmt;

use crate::model::{ActionRef, FlowArc, TriggerArc};

/// Stable rule identifiers. Declaration order is the report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleCode {
    /// Flow between two action kinds that the machine does not connect.
    Adjacency,
    /// A create on a route that carries outside things through a thimac.
    TransitCreate,
    /// A flow ending in a create.
    CreateInflow,
    /// A trigger not aimed at a create.
    TriggerTarget,
    /// An action with no arc at all.
    Orphan,
    /// A reference that does not resolve against the thimac tree.
    UnresolvedRef,
    SubdiagramViolation,
    Disconnected,
    EmptyRegion,
    InvalidBinding,
    InvalidTermination,
    UnknownEvent,
    CyclicOrder,
    IdentityViolation,
    OrderViolation,
    TimeMonotonicity,
}

impl RuleCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::Adjacency => "TM-ADJ",
            RuleCode::TransitCreate => "TM-TRANSIT-CREATE",
            RuleCode::CreateInflow => "TM-CREATE-INFLOW",
            RuleCode::TriggerTarget => "TM-TRIGGER-TARGET",
            RuleCode::Orphan => "TM-ORPHAN",
            RuleCode::UnresolvedRef => "TM-REF",
            RuleCode::SubdiagramViolation => "EV-SUBDIAGRAM",
            RuleCode::Disconnected => "EV-DISCONNECTED",
            RuleCode::EmptyRegion => "EV-EMPTY-REGION",
            RuleCode::InvalidBinding => "EV-BINDING",
            RuleCode::InvalidTermination => "EV-TERMINATES",
            RuleCode::UnknownEvent => "EV-UNKNOWN",
            RuleCode::CyclicOrder => "EV-CYCLE",
            RuleCode::IdentityViolation => "EV-IDENTITY",
            RuleCode::OrderViolation => "EV-ORDER",
            RuleCode::TimeMonotonicity => "EV-TIME",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// What a diagnostic points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Subject {
    Action(ActionRef),
    Flow(FlowArc),
    Trigger(TriggerArc),
    Event(String),
    Events(Vec<String>),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Action(a) => a.fmt(f),
            Subject::Flow(a) => a.fmt(f),
            Subject::Trigger(a) => a.fmt(f),
            Subject::Event(id) => f.write_str(id),
            Subject::Events(ids) => f.write_str(&ids.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub code: RuleCode,
    pub severity: Severity,
    pub subject: Subject,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: RuleCode, subject: Subject, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Error,
            subject,
            message: message.into(),
        }
    }

    pub fn warning(code: RuleCode, subject: Subject, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Warning,
            subject,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `<severity> <code> <subject>: <message>`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.severity, self.code, self.subject, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
