//! Structural rules for static models.
//!
//! The adjacency table is the closure of the arrows of the canonical
//! machine. Within one thimac:
//!
//! | from     | to                 |
//! |----------|--------------------|
//! | transfer | receive            |
//! | receive  | process, release   |
//! | process  | release            |
//! | create   | process, release   |
//! | release  | transfer           |
//!
//! Across thimacs a thing leaves through release or transfer and arrives at
//! transfer, or directly at receive when the peer's transfer is elided:
//! release→transfer, transfer→transfer, transfer→receive. Strict pairing
//! drops the last one.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::diagnostic::{Diagnostic, RuleCode, Subject};
use crate::model::{ActionKind, ActionRef, FlowArc, StaticModel, ThimacPath};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Reject cross-thimac transfer→receive; require transfer→transfer pairing.
    pub strict_pairing: bool,
}

pub fn adjacency_allowed(from: ActionKind, to: ActionKind, same_thimac: bool, strict_pairing: bool) -> bool {
    use ActionKind::*;
    if same_thimac {
        matches!(
            (from, to),
            (Transfer, Receive)
                | (Receive, Process)
                | (Receive, Release)
                | (Process, Release)
                | (Create, Process)
                | (Create, Release)
                | (Release, Transfer)
        )
    } else {
        match (from, to) {
            (Release, Transfer) | (Transfer, Transfer) => true,
            (Transfer, Receive) => !strict_pairing,
            _ => false,
        }
    }
}

pub fn validate(model: &StaticModel) -> Vec<Diagnostic> {
    validate_with(model, ValidateOptions::default())
}

/// All findings, ordered by rule code and then declaration order.
pub fn validate_with(model: &StaticModel, options: ValidateOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for arc in model.flows() {
        let unresolved: Vec<&ActionRef> = [&arc.from, &arc.to]
            .into_iter()
            .filter(|a| !model.resolves(a))
            .collect();
        for a in &unresolved {
            out.push(Diagnostic::error(
                RuleCode::UnresolvedRef,
                Subject::Flow(arc.clone()),
                format!("`{a}` is not a declared action"),
            ));
        }
        if !unresolved.is_empty() {
            continue;
        }
        let same = arc.from.thimac == arc.to.thimac;
        if !adjacency_allowed(arc.from.kind, arc.to.kind, same, options.strict_pairing) {
            out.push(Diagnostic::error(
                RuleCode::Adjacency,
                Subject::Flow(arc.clone()),
                format!(
                    "{} cannot flow into {} {}",
                    arc.from.kind,
                    arc.to.kind,
                    if same { "within one thimac" } else { "across thimacs" }
                ),
            ));
        }
        if arc.to.kind == ActionKind::Create {
            out.push(Diagnostic::error(
                RuleCode::CreateInflow,
                Subject::Flow(arc.clone()),
                "create has no inflow; creation elsewhere is brought about by a trigger",
            ));
        }
    }

    let mut flagged = HashSet::new();
    for route in transit_routes(model) {
        for action in &route.actions {
            if action.kind == ActionKind::Create && flagged.insert(action.clone()) {
                out.push(Diagnostic::error(
                    RuleCode::TransitCreate,
                    Subject::Action(action.clone()),
                    format!("create on a transit path through `{}`", route.thimac),
                ));
            }
        }
    }

    for arc in model.triggers() {
        for a in [&arc.from, &arc.to] {
            if !model.resolves(a) {
                out.push(Diagnostic::error(
                    RuleCode::UnresolvedRef,
                    Subject::Trigger(arc.clone()),
                    format!("`{a}` is not a declared action"),
                ));
            }
        }
        if arc.to.kind != ActionKind::Create {
            out.push(Diagnostic::error(
                RuleCode::TriggerTarget,
                Subject::Trigger(arc.clone()),
                format!("trigger must target create, not {}", arc.to.kind),
            ));
        }
    }

    let connected = model.connected_actions();
    for (path, thimac) in model.thimacs() {
        for kind in thimac.actions().iter() {
            let action = path.action(kind);
            let exempt = kind == ActionKind::Create && (path.depth() == 1 || thimac.is_attribute());
            if !exempt && !connected.contains(&action) {
                out.push(Diagnostic::warning(
                    RuleCode::Orphan,
                    Subject::Action(action),
                    "action has no flow or trigger",
                ));
            }
        }
    }

    // stable: keeps declaration order within a code
    out.sort_by_key(|d| d.code);
    out
}

/// A transit route together with the thimac whose boundary it crosses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitRoute {
    pub thimac: ThimacPath,
    pub actions: Vec<ActionRef>,
}

/// Maximal routes that carry an outside thing into a thimac at transfer and
/// back out at transfer. Each route lists the thimac-side actions; a route
/// that returns to the single transfer node it entered through ends with
/// that node repeated.
pub fn find_transit_paths(model: &StaticModel) -> Vec<Vec<ActionRef>> {
    transit_routes(model).into_iter().map(|r| r.actions).collect()
}

pub fn transit_routes(model: &StaticModel) -> Vec<TransitRoute> {
    let actions = model.actions();
    let index: HashMap<&ActionRef, usize> = actions.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut succ = vec![Vec::new(); actions.len()];
    let mut pred = vec![Vec::new(); actions.len()];
    for arc in model.flows() {
        if let (Some(&f), Some(&t)) = (index.get(&arc.from), index.get(&arc.to)) {
            succ[f].push(t);
            pred[t].push(f);
        }
    }
    let is_transfer = |i: usize| actions[i].kind == ActionKind::Transfer;

    let mut found: Vec<(ThimacPath, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for (path, _) in model.thimacs() {
        let inside: Vec<bool> = actions.iter().map(|a| a.thimac.is_within(&path)).collect();
        let enters = |i: usize| {
            inside[i]
                && pred[i]
                    .iter()
                    .any(|&x| !inside[x] && (is_transfer(i) || is_transfer(x)))
        };
        let exits = |i: usize| {
            inside[i]
                && succ[i]
                    .iter()
                    .any(|&y| !inside[y] && (is_transfer(i) || is_transfer(y)))
        };

        for start in (0..actions.len()).filter(|&i| enters(i)) {
            let mut stack = vec![start];
            let mut on_path = vec![false; actions.len()];
            on_path[start] = true;
            dfs(
                start,
                &succ,
                &inside,
                &exits,
                &is_transfer,
                &mut stack,
                &mut on_path,
                &mut |p| {
                    if seen.insert(p.clone()) {
                        found.push((path.clone(), p));
                    }
                },
            );
        }
    }

    let maximal: Vec<bool> = found
        .iter()
        .map(|(_, p)| !found.iter().any(|(_, q)| q.len() > p.len() && contains_run(q, p)))
        .collect();
    found
        .into_iter()
        .zip(maximal)
        .filter(|(_, keep)| *keep)
        .map(|((thimac, p), _)| TransitRoute {
            thimac,
            actions: p.into_iter().map(|i| actions[i].clone()).collect(),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    node: usize,
    succ: &[Vec<usize>],
    inside: &[bool],
    exits: &dyn Fn(usize) -> bool,
    is_transfer: &dyn Fn(usize) -> bool,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    emit: &mut dyn FnMut(Vec<usize>),
) {
    let start = stack[0];
    if stack.len() >= 2 && exits(node) {
        emit(stack.clone());
    }
    for &next in &succ[node] {
        if next == start && stack.len() >= 2 && is_transfer(start) && exits(start) {
            let mut closed = stack.clone();
            closed.push(start);
            emit(closed);
        }
        if inside[next] && !on_path[next] {
            on_path[next] = true;
            stack.push(next);
            dfs(next, succ, inside, exits, is_transfer, stack, on_path, emit);
            stack.pop();
            on_path[next] = false;
        }
    }
}

fn contains_run(haystack: &[usize], needle: &[usize]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Flow arcs lying on some transit route, including the arcs that carry the
/// thing in and out.
pub(crate) fn transit_arcs(model: &StaticModel) -> BTreeSet<FlowArc> {
    let mut arcs = BTreeSet::new();
    for route in transit_routes(model) {
        for pair in route.actions.windows(2) {
            arcs.insert(FlowArc::new(pair[0].clone(), pair[1].clone()));
        }
        let first = &route.actions[0];
        let last = route.actions.last().expect("routes have two or more actions");
        let outside = |a: &ActionRef| !a.thimac.is_within(&route.thimac);
        let transfer = |a: &ActionRef| a.kind == ActionKind::Transfer;
        for arc in model.flows() {
            let entry = &arc.to == first && outside(&arc.from) && (transfer(first) || transfer(&arc.from));
            let exit = &arc.from == last && outside(&arc.to) && (transfer(last) || transfer(&arc.to));
            if entry || exit {
                arcs.insert(arc.clone());
            }
        }
    }
    arcs
}
