use std::fmt::Write;

use super::ModelDocument;
use crate::event::ChronologyEntry;
use crate::model::{ActionKind, ActionSet, Thimac};
use crate::time::quote;

/// Canonical text: thimac blocks, then every arc at top level with absolute
/// references, then events, then a single chronology line.
pub fn print(doc: &ModelDocument) -> String {
    let mut sections: Vec<String> = Vec::new();
    let model = &doc.model;
    if !model.name().is_empty() {
        sections.push(format!("model {}\n", quote(model.name())));
    }

    let mut out = String::new();
    for root in model.roots() {
        thimac(&mut out, root, 0);
    }
    sections.push(out);

    let mut out = String::new();
    for arc in model.flows() {
        let _ = writeln!(out, "flow {} -> {}", arc.from, arc.to);
    }
    for arc in model.triggers() {
        let _ = writeln!(out, "trigger {} -> {}", arc.from, arc.to);
    }
    sections.push(out);

    for event in &doc.events {
        let mut out = format!("event {} {} at {}", event.id, quote(&event.label), event.time);
        if event.duration != 1 {
            let _ = write!(out, " for {}", event.duration);
        }
        if let Some(p) = &event.terminates {
            let _ = write!(out, " terminates {p}");
        }
        out.push_str(" {\n");
        for action in event.region.actions() {
            let _ = writeln!(out, "  include {action}");
        }
        for (path, value) in &event.keys {
            let _ = writeln!(out, "  key {path} = {}", value.to_source());
        }
        for (path, value) in &event.bindings {
            let _ = writeln!(out, "  set {path} = {}", value.to_source());
        }
        out.push_str("}\n");
        sections.push(out);
    }

    if !doc.chronology.is_empty() {
        let items: Vec<String> = doc
            .chronology
            .entries
            .iter()
            .map(|e| match e {
                ChronologyEntry::Event(id) => id.clone(),
                ChronologyEntry::Repeat { count, events } => format!("repeat {count} {{ {} }}", events.join(", ")),
            })
            .collect();
        sections.push(format!("chronology {}\n", items.join(", ")));
    }

    sections.retain(|s| !s.is_empty());
    sections.join("\n")
}

fn thimac(out: &mut String, t: &Thimac, depth: usize) {
    let pad = "  ".repeat(depth);
    if t.is_attribute() {
        if t.actions() == ActionSet::from([ActionKind::Create]) {
            let _ = writeln!(out, "{pad}attribute {}", t.name());
        } else {
            let kinds: Vec<&str> = t.actions().iter().map(ActionKind::keyword).collect();
            let _ = writeln!(out, "{pad}attribute {} {{ {} }}", t.name(), kinds.join(" "));
        }
        return;
    }
    if t.actions().is_empty() && t.subthimacs().is_empty() {
        let _ = writeln!(out, "{pad}thimac {} {{}}", t.name());
        return;
    }
    let _ = writeln!(out, "{pad}thimac {} {{", t.name());
    for kind in t.actions().iter() {
        let _ = writeln!(out, "{pad}  {kind}");
    }
    for sub in t.subthimacs() {
        thimac(out, sub, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}
