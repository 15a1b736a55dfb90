//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p thimac-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Duration;

use common::oracle::{mutate_with_create, order_oracle, transit_oracle};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thimac::diagnostic::Diagnostic;
use thimac::dsl::{parse, print};
use thimac::emit::{emit_history_table, snapshot};
use thimac::event::{check_chronology, ChronologyEntry, ChronologySpec, EventDecl};
use thimac::model::{ActionKind, ActionSet, StaticModel};
use thimac::sim::{ExistenceLedger, ExistencePath};
use thimac::time::Instant;
use thimac::validate::{find_transit_paths, transit_routes, validate};
use thimac::{fixtures, TimePoint};

const LIMIT_HISTORY: Duration = Duration::from_secs(1);
const LIMIT_SNAPSHOT: Duration = Duration::from_secs(1);
const LIMIT_JOHN_DOE: Duration = Duration::from_secs(1);
const LIMIT_VALIDATOR: Duration = Duration::from_secs(30);
const LIMIT_CHRONOLOGY: Duration = Duration::from_secs(5);
const LIMIT_ROUND_TRIP: Duration = Duration::from_secs(60);
const LIMIT_LEDGER: Duration = Duration::from_secs(30);

const MUTATIONS: usize = 1000;
const TRANSIT_MODELS: usize = 500;
const MAX_ACTIONS: usize = 8;
const FUZZ_DOCUMENTS: usize = 1000;
const BYTE_INPUTS: usize = 10_000;
const MAX_BYTES: usize = 256;
const SCENARIOS: usize = 500;

type Check = Result<String, String>;
type Span = (Instant, Option<Instant>, usize);
type Criterion = (u8, &'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = thimac_cli::run(
        std::iter::once("thimac").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

const CHEESEHUT_HISTORY: &str = "Row\tid\tstartTime\tendTime\tname\tprice\n\
1\t1\t2011-01-01\t9999-12-31\tYoung\t6\n\
2\t2\t2011-01-01\t9999-12-31\tMature\t8\n\
3\t3\t2011-01-01\t2014-01-01\tOld\t11\n\
4\t3\t2014-01-01\t9999-12-31\tOld\t12\n";

const CHEESEHUT_SNAPSHOT: &str = "Row\tid\tname\tprice\n1\t1\tYoung\t6\n2\t2\tMature\t8\n3\t3\tOld\t12\n";

const JOHN_DOE_LOG: &str = "Date\tdescription\n\
1975-04-03\tJohn is born\n\
1975-04-04\tJohn’s father officially reports John’s birth\n\
1993\tJohn's graduation\n\
1994-08-26\tAfter graduation, John moves to Bigtown, but forgets to register his new address\n\
1994-12-27\tJohn registers his new address\n\
2001-04-01\tJohn dies\n";

fn history() -> Check {
    let (code, out, err) = cli(&[
        "simulate",
        &fixture_path("cheesehut.tm"),
        "--format",
        "history",
        "--group",
        "Table.Row",
    ]);
    ensure(code == 0, format!("exit {code}: {err}"))?;
    ensure(out == CHEESEHUT_HISTORY, format!("history differs:\n{out}"))?;
    Ok("4 rows byte-exact".into())
}

fn snapshots() -> Check {
    let (code, out, err) = cli(&[
        "simulate",
        &fixture_path("cheesehut.tm"),
        "--format",
        "history",
        "--group",
        "Table.Row",
        "--at",
        "2015-06-01",
    ]);
    ensure(code == 0, format!("exit {code}: {err}"))?;
    ensure(out == CHEESEHUT_SNAPSHOT, format!("snapshot differs:\n{out}"))?;

    // every day of 2015 against one simulated history
    let doc = parse(fixtures::CHEESEHUT).map_err(|e| format!("{e:?}"))?;
    let (_, ledger) = thimac::sim::run(&doc.model, &doc.events, &thimac::event::expand(&doc.chronology))
        .map_err(|e| e.to_string())?;
    let group = "Table.Row".parse().map_err(|e| format!("{e}"))?;
    let history = emit_history_table(&ledger, &group).map_err(|e| e.to_string())?;
    let mut t = TimePoint::day(2015, 1, 1);
    let mut days = 0;
    while t < TimePoint::day(2016, 1, 1) {
        let table = snapshot(&history, &t).1.to_tsv();
        ensure(table == CHEESEHUT_SNAPSHOT, format!("{t}: snapshot differs:\n{table}"))?;
        t = t.shifted(1).map_err(|e| e.to_string())?;
        days += 1;
    }
    Ok(format!("{days} dates in 2015 byte-exact"))
}

fn john_doe() -> Check {
    let path = fixture_path("johndoe.tm");
    let (code, out, err) = cli(&["simulate", &path, "--format", "event-log"]);
    ensure(code == 0, format!("exit {code}: {err}"))?;
    ensure(out == JOHN_DOE_LOG, format!("event log differs:\n{out}"))?;
    let (_, ledger, _) = cli(&["simulate", &path, "--format", "ledger"]);
    let person: Vec<&str> = ledger
        .lines()
        .filter(|l| l.split(' ').nth(1) == Some("Person"))
        .collect();
    ensure(
        person == ["1 Person 1975-04-03 2001-04-01"],
        format!("Person exicons: {person:?}"),
    )?;
    Ok("6 rows byte-exact, Person [1975-04-03, 2001-04-01)".into())
}

fn error_codes(diags: &[Diagnostic]) -> Vec<&'static str> {
    diags.iter().filter(|d| d.is_error()).map(|d| d.code.as_str()).collect()
}

fn validator() -> Check {
    // (a) creates spliced into transit routes
    let mut rng = StdRng::seed_from_u64(0xacc4);
    let base = parse(fixtures::RELAY).map_err(|e| format!("{e:?}"))?.model;
    ensure(error_codes(&validate(&base)).is_empty(), "relay fixture is not valid")?;
    ensure(!transit_routes(&base).is_empty(), "relay fixture has no transit routes")?;
    for i in 0..MUTATIONS {
        let m = mutate_with_create(&mut rng, &base);
        let codes = error_codes(&validate(&m));
        ensure(
            codes.contains(&"TM-TRANSIT-CREATE") || codes.contains(&"TM-CREATE-INFLOW"),
            format!("mutation {i} not caught: {codes:?}"),
        )?;
    }

    // (b) transit detection against exhaustive path search
    let mut nonempty = 0;
    for i in 0..TRANSIT_MODELS {
        let m = common::random_flow_model(&mut rng, MAX_ACTIONS);
        ensure(
            m.actions().len() <= MAX_ACTIONS,
            format!("model {i} has {} actions", m.actions().len()),
        )?;
        let got: std::collections::BTreeSet<_> = find_transit_paths(&m).into_iter().collect();
        let want = transit_oracle(&m);
        ensure(got == want, format!("model {i}: transit routes {got:?} != {want:?}"))?;
        nonempty += usize::from(!want.is_empty());
    }

    // (c) every ordered kind pair, within one thimac and across two
    use ActionKind::*;
    let within = [
        (Create, Process),
        (Create, Release),
        (Receive, Process),
        (Receive, Release),
        (Process, Release),
        (Release, Transfer),
        (Transfer, Receive),
    ];
    let across = [(Release, Transfer), (Transfer, Transfer), (Transfer, Receive)];
    let mut pairs = 0;
    for from in ActionKind::ALL {
        for to in ActionKind::ALL {
            for same in [true, false] {
                pairs += 1;
                let allowed = if same {
                    within.contains(&(from, to))
                } else {
                    across.contains(&(from, to))
                };
                let mut m = StaticModel::new("pair");
                let a = m
                    .add_thimac(None, "A", ActionSet::from([from, to]), false)
                    .map_err(|e| e.to_string())?;
                let b = if same {
                    a.clone()
                } else {
                    m.add_thimac(None, "B", ActionSet::from([to]), false)
                        .map_err(|e| e.to_string())?
                };
                let added = m.add_flow(a.action(from), b.action(to));
                let rejected = match added {
                    Err(_) => true,
                    Ok(_) => error_codes(&validate(&m)).contains(&"TM-ADJ"),
                };
                let where_ = if same { "within" } else { "across" };
                ensure(
                    rejected != allowed,
                    format!("{from} -> {to} {where_}: rejected={rejected}"),
                )?;
            }
        }
    }
    Ok(format!(
        "{MUTATIONS} mutations caught, {TRANSIT_MODELS} models agree ({nonempty} with routes), {pairs} pairs"
    ))
}

/// Event precedence from the action reachability oracle, closed over events.
fn precedence_oracle(model: &StaticModel, events: &[EventDecl]) -> HashSet<(String, String)> {
    let n = events.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = i != j && order_oracle(model, &events[i].region, &events[j].region);
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
    let mut out = HashSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] && !reach[j][i] {
                out.insert((events[i].id.clone(), events[j].id.clone()));
            }
        }
    }
    out
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn chronology() -> Check {
    let doc = parse(fixtures::JOHN_DOE).map_err(|e| format!("{e:?}"))?;
    let ids: Vec<String> = doc.events.iter().map(|e| e.id.clone()).collect();
    let spec = |order: &[String]| ChronologySpec {
        entries: order.iter().map(|id| ChronologyEntry::Event(id.clone())).collect(),
    };
    let codes = |order: &[String]| -> Vec<&'static str> {
        error_codes(&check_chronology(&doc.model, &doc.events, &spec(order)))
    };

    ensure(codes(&ids).is_empty(), format!("E1..E6 rejected: {:?}", codes(&ids)))?;
    let oracle = precedence_oracle(&doc.model, &doc.events);
    for pair in [("E1", "E2"), ("E4", "E5")] {
        ensure(
            oracle.contains(&(pair.0.into(), pair.1.into())),
            format!("oracle lacks {} < {}", pair.0, pair.1),
        )?;
    }

    let pos = |order: &[String], id: &str| order.iter().position(|x| x == id).unwrap_or(usize::MAX);
    let (mut total, mut rejected) = (0, 0);
    for order in permutations(&ids) {
        total += 1;
        let got = codes(&order).contains(&"EV-ORDER");
        let want = oracle.iter().any(|(a, b)| pos(&order, b) < pos(&order, a));
        let named = pos(&order, "E2") < pos(&order, "E1") || pos(&order, "E5") < pos(&order, "E4");
        ensure(!named || got, format!("{order:?} not rejected"))?;
        ensure(got == want, format!("{order:?}: OrderViolation={got}, oracle={want}"))?;
        rejected += usize::from(got);
    }

    for id in &ids {
        let mut twice = ids.clone();
        let at = pos(&twice, id);
        twice.insert(at + 1, id.clone());
        ensure(
            codes(&twice).contains(&"EV-IDENTITY"),
            format!("duplicate {id} not rejected"),
        )?;
    }
    let mut group = ids.clone();
    group.retain(|x| x != "E3");
    let mut entries: Vec<ChronologyEntry> = group.iter().map(|id| ChronologyEntry::Event(id.clone())).collect();
    entries.insert(
        2,
        ChronologyEntry::Repeat {
            count: 2,
            events: vec!["E3".into()],
        },
    );
    let repeated = ChronologySpec { entries };
    ensure(
        !error_codes(&check_chronology(&doc.model, &doc.events, &repeated)).contains(&"EV-IDENTITY"),
        "repeat group flagged as duplicate",
    )?;
    Ok(format!(
        "{rejected} of {total} permutations rejected as the oracle predicts; duplicates rejected"
    ))
}

fn round_trip() -> Check {
    for (name, text) in fixtures::ALL {
        let doc = parse(text).map_err(|e| format!("{name}: {e:?}"))?;
        let printed = print(&doc);
        let again = parse(&printed).map_err(|e| format!("{name} reprint: {e:?}"))?;
        ensure(again.structurally_eq(&doc), format!("{name}: structure changed"))?;
        ensure(print(&again) == printed, format!("{name}: print not idempotent"))?;
    }
    let mut rng = StdRng::seed_from_u64(0xacc6);
    for i in 0..FUZZ_DOCUMENTS {
        let doc = common::random_document(&mut rng);
        let printed = print(&doc);
        let again = parse(&printed).map_err(|e| format!("document {i}: {e:?}\n{printed}"))?;
        ensure(
            again.structurally_eq(&doc),
            format!("document {i}: structure changed\n{printed}"),
        )?;
    }
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut panics = 0;
    for _ in 0..BYTE_INPUTS {
        let len = rng.gen_range(0..=MAX_BYTES);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        panics += usize::from(catch_unwind(|| drop(parse(&text))).is_err());
    }
    std::panic::set_hook(previous);
    ensure(panics == 0, format!("parser panicked on {panics} byte inputs"))?;
    Ok(format!(
        "{} fixtures, {FUZZ_DOCUMENTS} documents, {BYTE_INPUTS} byte inputs",
        fixtures::ALL.len()
    ))
}

/// Pairwise interval intersection per path, independent of the ledger's own sweep.
fn overlapping(ledger: &ExistenceLedger) -> Option<(usize, usize)> {
    let mut by_path: HashMap<&ExistencePath, Vec<Span>> = HashMap::new();
    for e in ledger.exicons() {
        by_path
            .entry(&e.path)
            .or_default()
            .push((e.becoming.start(), e.end.map(|t| t.start()), e.id));
    }
    let before = |t: Instant, end: Option<Instant>| end.is_none_or(|end| t < end);
    for spans in by_path.values() {
        for (i, a) in spans.iter().enumerate() {
            for b in &spans[i + 1..] {
                if before(a.0, b.1) && before(b.0, a.1) {
                    return Some((a.2, b.2));
                }
            }
        }
    }
    None
}

fn ledger_invariants() -> Check {
    let mut rng = StdRng::seed_from_u64(0xacc7);
    let mut exicons = 0;
    for i in 0..SCENARIOS {
        let s = common::random_scenario(&mut rng);
        let (_, ledger) = s.run().map_err(|e| format!("scenario {i}: {e}"))?;
        exicons += ledger.exicons().len();
        ensure(
            ledger.overlaps().is_empty(),
            format!("scenario {i}: sweep found {:?}", ledger.overlaps()),
        )?;
        ensure(
            overlapping(&ledger).is_none(),
            format!("scenario {i}: pairwise found {:?}", overlapping(&ledger)),
        )?;
        // snapshots at every boundary instant
        let mut instants: Vec<TimePoint> = ledger
            .exicons()
            .iter()
            .flat_map(|e| [Some(e.becoming), e.end])
            .flatten()
            .collect();
        instants.sort_by_key(|t| t.sort_key());
        instants.dedup();
        for t in &instants {
            let live: Vec<&ExistencePath> = ledger.at(t).map(|e| &e.path).collect();
            let unique: HashSet<&&ExistencePath> = live.iter().collect();
            ensure(
                live.len() == unique.len(),
                format!("scenario {i}: duplicate existence at {t}"),
            )?;
        }
    }
    let group = "Store.Item".parse().map_err(|e| format!("{e}"))?;
    for i in 0..SCENARIOS / 5 {
        let s = common::random_store(&mut rng);
        let (_, ledger) = s.run().map_err(|e| format!("store {i}: {e}"))?;
        let history = emit_history_table(&ledger, &group).map_err(|e| format!("store {i}: {e}"))?;
        for tick in 0..100 {
            let t = TimePoint::Tick(tick);
            let (rows, _) = snapshot(&history, &t);
            let ids: BTreeMap<String, usize> = rows.iter().fold(BTreeMap::new(), |mut m, r| {
                *m.entry(r.id.to_string()).or_default() += 1;
                m
            });
            ensure(
                ids.values().all(|&n| n == 1),
                format!("store {i}: duplicate entity at {t}"),
            )?;
        }
    }
    Ok(format!(
        "{SCENARIOS} scenarios, {exicons} exicons, {} entity tables",
        SCENARIOS / 5
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        (1, "CheeseHut history table", LIMIT_HISTORY, history),
        (2, "CheeseHut snapshot", LIMIT_SNAPSHOT, snapshots),
        (3, "John Doe event log and lifetime", LIMIT_JOHN_DOE, john_doe),
        (4, "validator properties", LIMIT_VALIDATOR, validator),
        (5, "chronology checks", LIMIT_CHRONOLOGY, chronology),
        (6, "round trip and parser robustness", LIMIT_ROUND_TRIP, round_trip),
        (7, "ledger invariants", LIMIT_LEDGER, ledger_invariants),
    ];
    let mut failed = 0;
    for (n, title, limit, check) in criteria {
        let start = std::time::Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed < limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS criterion {n}: {title}: {detail} ({elapsed:.2?} < {limit:?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n}: {title}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
