//! Thinging-machine models: a static diagram of thimacs and their five
//! generic actions, events carved out of it, and the existence record a
//! chronology of events leaves behind.
//!
//! ```
//! use thimac::{dsl, validate::validate};
//!
//! let doc = dsl::parse(
//!     "thimac Person { create process flow create -> process }\n\
//!      event Born \"born\" at 1975-04-03 { include Person.create }\n\
//!      chronology Born\n",
//! )
//! .unwrap();
//! assert!(validate(&doc.model).is_empty());
//! let occurrences = thimac::event::expand(&doc.chronology);
//! let (_, ledger) = thimac::sim::run(&doc.model, &doc.events, &occurrences).unwrap();
//! assert_eq!(ledger.dump(), "1 Person 1975-04-03 open\n");
//! ```

pub mod diagnostic;
pub mod dsl;
pub mod emit;
pub mod event;
pub mod fixtures;
pub mod model;
pub mod sim;
pub mod time;
pub mod validate;

pub use diagnostic::{Diagnostic, RuleCode, Severity, Subject};
pub use dsl::{ModelDocument, ParseError};
pub use event::{ChronologyEntry, ChronologySpec, EventDecl, Occurrence, Region};
pub use model::{ActionKind, ActionRef, ActionSet, FlowArc, FlowKind, ModelError, StaticModel, ThimacPath, TriggerArc};
pub use sim::{Exicon, ExistenceLedger, ExistencePath, Trace};
pub use time::{Literal, TimePoint};
