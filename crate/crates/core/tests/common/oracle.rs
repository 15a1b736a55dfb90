//! Brute-force reimplementations the library is checked against.

use std::collections::HashSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use thimac::event::{Region, RegionArc};
use thimac::model::{ActionKind, ActionRef, FlowArc, StaticModel, ThimacPath};
use thimac::validate::transit_routes;

/// Every simple path of the whole flow graph, found breadth-first.
pub fn all_simple_paths(m: &StaticModel) -> Vec<Vec<ActionRef>> {
    let mut out = Vec::new();
    let mut queue: Vec<Vec<ActionRef>> = m.actions().into_iter().map(|a| vec![a]).collect();
    while let Some(path) = queue.pop() {
        let last = path.last().unwrap().clone();
        for arc in m.flows().iter().filter(|f| f.from == last) {
            if !path.contains(&arc.to) {
                let mut longer = path.clone();
                longer.push(arc.to.clone());
                queue.push(longer);
            }
        }
        out.push(path);
    }
    out
}

/// Transit routes straight from the definition: a run of two or more
/// actions inside a thimac, entered from outside and left to outside, with
/// a transfer on each boundary crossing. A run that comes back to its own
/// transfer counts too.
pub fn transit_oracle(m: &StaticModel) -> std::collections::BTreeSet<Vec<ActionRef>> {
    let transfer = |a: &ActionRef| a.kind == ActionKind::Transfer;
    let has_flow = |f: &ActionRef, t: &ActionRef| m.flows().contains(&FlowArc::new(f.clone(), t.clone()));
    let actions = m.actions();
    let paths = all_simple_paths(m);
    let mut found: HashSet<Vec<ActionRef>> = HashSet::new();
    for (thimac, _) in m.thimacs() {
        let inside = |a: &ActionRef| a.thimac.is_within(&thimac);
        let entered = |first: &ActionRef| {
            actions
                .iter()
                .any(|x| !inside(x) && has_flow(x, first) && (transfer(x) || transfer(first)))
        };
        let left = |last: &ActionRef| {
            actions
                .iter()
                .any(|y| !inside(y) && has_flow(last, y) && (transfer(y) || transfer(last)))
        };
        for p in &paths {
            if p.len() < 2 || !p.iter().all(inside) || !entered(&p[0]) {
                continue;
            }
            if left(p.last().unwrap()) {
                found.insert(p.clone());
            }
            if transfer(&p[0]) && left(&p[0]) && has_flow(p.last().unwrap(), &p[0]) {
                let mut closed = p.clone();
                closed.push(p[0].clone());
                found.insert(closed);
            }
        }
    }
    let runs: Vec<Vec<ActionRef>> = found.iter().cloned().collect();
    runs.iter()
        .filter(|p| {
            !runs
                .iter()
                .any(|q| q.len() > p.len() && q.windows(p.len()).any(|w| w == p.as_slice()))
        })
        .cloned()
        .collect()
}

/// Raw event order by Floyd-Warshall over action reachability.
pub fn order_oracle(m: &StaticModel, a: &Region, b: &Region) -> bool {
    let actions = m.actions();
    let n = actions.len();
    let idx = |x: &ActionRef| actions.iter().position(|y| y == x).unwrap();
    let mut reach = vec![vec![false; n]; n];
    let arcs = m
        .flows()
        .iter()
        .map(|f| (&f.from, &f.to))
        .chain(m.triggers().iter().map(|t| (&t.from, &t.to)));
    for (f, t) in arcs {
        let interior = |r: &Region| r.contains(f) && r.contains(t);
        if !interior(a) && !interior(b) {
            reach[idx(f)][idx(t)] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    a.actions()
        .iter()
        .any(|x| b.actions().iter().any(|y| reach[idx(x)][idx(y)]))
}

/// Region well-formedness by direct graph search.
pub fn region_oracle(m: &StaticModel, r: &Region) -> bool {
    let acts: Vec<&ActionRef> = r.actions().iter().collect();
    if acts.is_empty() || !acts.iter().all(|a| m.resolves(a)) {
        return false;
    }
    for arc in r.arcs() {
        let (ok, f, t) = match arc {
            RegionArc::Flow(a) => (m.flows().contains(a), &a.from, &a.to),
            RegionArc::Trigger(a) => (m.triggers().contains(a), &a.from, &a.to),
        };
        if !ok || !r.contains(f) || !r.contains(t) {
            return false;
        }
    }
    let mut seen = vec![acts[0]];
    let mut grew = true;
    while grew {
        grew = false;
        for arc in r.arcs() {
            let (f, t) = arc.endpoints();
            if seen.contains(&f) != seen.contains(&t) {
                seen.push(if seen.contains(&f) { t } else { f });
                grew = true;
            }
        }
    }
    seen.len() == acts.len()
}

/// Splices a create into a random arc of a random transit route, or feeds
/// one from a route node.
pub fn mutate_with_create(rng: &mut StdRng, base: &StaticModel) -> StaticModel {
    let routes = transit_routes(base);
    let route = routes.choose(rng).unwrap();
    let at = rng.gen_range(0..route.actions.len() - 1);
    let (u, v) = (route.actions[at].clone(), route.actions[at + 1].clone());
    let host: ThimacPath = if rng.gen_bool(0.5) {
        u.thimac.clone()
    } else {
        v.thimac.clone()
    };
    let create = host.action(ActionKind::Create);
    let mut m = base.clone();
    if !m.resolves(&create) {
        m.add_action(&host, ActionKind::Create).unwrap();
    }
    if rng.gen_bool(0.6) {
        let _ = m.remove_flow(&FlowArc::new(u.clone(), v.clone()));
        let _ = m.add_flow(u, create.clone());
        let _ = m.add_flow(create, v);
    } else {
        let _ = m.add_flow(u, create);
    }
    m
}
