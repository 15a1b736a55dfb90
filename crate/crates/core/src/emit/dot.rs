use std::fmt::Write;

use crate::dsl::ModelDocument;
use crate::event::RegionArc;
use crate::model::{ActionRef, Thimac, ThimacPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotView {
    /// Thimacs as nested clusters with their flows and triggers.
    Static,
    /// One cluster `E<k>` per event holding a copy of its region.
    Events,
}

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
        .replace('\r', "")
}

fn node_id(a: &ActionRef) -> String {
    format!("{}__{}", a.thimac, a.kind)
}

fn edge(out: &mut String, indent: &str, from: &str, to: &str, trigger: bool) {
    let style = if trigger { " [style=dashed]" } else { "" };
    let _ = writeln!(out, "{indent}\"{}\" -> \"{}\"{style};", esc(from), esc(to));
}

pub fn emit_dot(doc: &ModelDocument, view: DotView) -> String {
    let name = if doc.model.name().is_empty() {
        "model"
    } else {
        doc.model.name()
    };
    let mut out = format!("digraph \"{}\" {{\n  compound=true;\n  node [shape=box];\n", esc(name));
    match view {
        DotView::Static => {
            for root in doc.model.roots() {
                let path = ThimacPath::root(root.name()).expect("declared names are identifiers");
                cluster(&mut out, root, &path, 1);
            }
            for arc in doc.model.flows() {
                edge(&mut out, "  ", &node_id(&arc.from), &node_id(&arc.to), false);
            }
            for arc in doc.model.triggers() {
                edge(&mut out, "  ", &node_id(&arc.from), &node_id(&arc.to), true);
            }
        }
        DotView::Events => {
            let tag = |k: usize| format!("E{}", k + 1);
            for (k, event) in doc.events.iter().enumerate() {
                let _ = writeln!(out, "  subgraph \"cluster_{}\" {{", tag(k));
                let _ = writeln!(out, "    label=\"{}: {}\";", tag(k), esc(&event.label));
                for a in event.region.actions() {
                    let _ = writeln!(
                        out,
                        "    \"{}/{}\" [label=\"{}\"];",
                        tag(k),
                        esc(&node_id(a)),
                        esc(&a.to_string())
                    );
                }
                for arc in event.region.arcs() {
                    let (f, t) = arc.endpoints();
                    let from = format!("{}/{}", tag(k), node_id(f));
                    let to = format!("{}/{}", tag(k), node_id(t));
                    edge(&mut out, "    ", &from, &to, matches!(arc, RegionArc::Trigger(_)));
                }
                out.push_str("  }\n");
            }
            // arcs that leave one event's region and enter another's
            let arcs = doc
                .model
                .flows()
                .iter()
                .map(|a| (&a.from, &a.to, false))
                .chain(doc.model.triggers().iter().map(|a| (&a.from, &a.to, true)));
            for (from, to, trigger) in arcs {
                for (i, a) in doc.events.iter().enumerate() {
                    for (j, b) in doc.events.iter().enumerate() {
                        if i != j && a.region.contains(from) && b.region.contains(to) && !a.region.contains(to) {
                            edge(
                                &mut out,
                                "  ",
                                &format!("{}/{}", tag(i), node_id(from)),
                                &format!("{}/{}", tag(j), node_id(to)),
                                trigger,
                            );
                        }
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

fn cluster(out: &mut String, t: &Thimac, path: &ThimacPath, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}subgraph \"cluster_{path}\" {{");
    let _ = writeln!(out, "{pad}  label=\"{}\";", t.name());
    if t.is_attribute() {
        let _ = writeln!(out, "{pad}  style=rounded;");
    }
    for kind in t.actions().iter() {
        let _ = writeln!(out, "{pad}  \"{}\" [label=\"{kind}\"];", node_id(&path.action(kind)));
    }
    for sub in t.subthimacs() {
        let child = path.child(sub.name()).expect("declared names are identifiers");
        cluster(out, sub, &child, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}
