use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::lexer::{lex, Tok, Token};
use super::{ElementId, ModelDocument, ParseError, ParseErrorKind, SourceSpan, MAX_DEPTH};
use crate::event::{ChronologyEntry, ChronologySpec, EventDecl, Region};
use crate::model::{ActionKind, ActionRef, ActionSet, ModelError, StaticModel, ThimacPath};
use crate::time::{Literal, TimeError, TimePoint};

type Name = (String, SourceSpan);

/// Reference still to be resolved against the finished thimac tree.
#[derive(Debug, Clone)]
struct RawRef {
    /// Enclosing thimac for relative references.
    base: Option<ThimacPath>,
    segments: Vec<Name>,
}

impl RawRef {
    fn span(&self) -> SourceSpan {
        self.segments[0].1
    }

    fn text(&self) -> String {
        self.segments
            .iter()
            .map(|(s, _)| s.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    fn path(&self, segments: &[Name]) -> ThimacPath {
        let names = segments.iter().map(|(s, _)| s.clone());
        match &self.base {
            Some(base) => ThimacPath::new(base.segments().iter().cloned().chain(names)),
            None => ThimacPath::new(names),
        }
        .expect("lexer only yields identifiers")
    }

    /// `[Sub.]kind` relative to `base`, or `Path.kind` at top level.
    fn action(&self) -> ActionRef {
        let (kind, path) = self.segments.split_last().expect("non-empty");
        let kind = ActionKind::from_keyword(&kind.0).expect("checked when parsed");
        let thimac = if path.is_empty() {
            self.base.clone().expect("bare kinds only inside a thimac")
        } else {
            self.path(path)
        };
        ActionRef::new(thimac, kind)
    }

    fn thimac(&self) -> ThimacPath {
        self.path(&self.segments)
    }
}

#[derive(Debug)]
struct PendingArc {
    trigger: bool,
    from: RawRef,
    to: RawRef,
    span: SourceSpan,
}

#[derive(Debug)]
struct PendingEvent {
    id: Name,
    label: String,
    time: TimePoint,
    duration: u64,
    terminates: Option<RawRef>,
    includes: Vec<RawRef>,
    sets: Vec<(RawRef, Literal)>,
    keys: Vec<(RawRef, Literal)>,
}

#[derive(Debug, Clone)]
enum Ctx {
    Root,
    In(ThimacPath),
    /// Body of a thimac that could not be declared; contents are checked
    /// for syntax only.
    Detached,
}

/// Marker for an error already recorded.
struct Reported;

type PResult<T> = Result<T, Reported>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    model: StaticModel,
    model_named: bool,
    spans: BTreeMap<ElementId, SourceSpan>,
    arcs: Vec<PendingArc>,
    events: Vec<PendingEvent>,
    chronology: Vec<(ChronologyEntry, Vec<Name>)>,
}

/// Parses a whole document, collecting every error it can recover from.
pub fn parse(src: &str) -> Result<ModelDocument, Vec<ParseError>> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
        errors: Vec::new(),
        model: StaticModel::new(""),
        model_named: false,
        spans: BTreeMap::new(),
        arcs: Vec::new(),
        events: Vec::new(),
        chronology: Vec::new(),
    };
    while p.pos < p.toks.len() {
        let start = p.pos;
        if p.statement().is_err() {
            p.recover(start, false);
        }
    }
    let doc = p.resolve();
    if p.errors.is_empty() {
        Ok(doc)
    } else {
        p.errors.sort_by_key(|e| e.span);
        Err(p.errors)
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    fn here(&self) -> SourceSpan {
        match self.toks.get(self.pos) {
            Some(t) => t.span,
            None => match self.toks.last() {
                Some(t) => SourceSpan {
                    line: t.span.line,
                    column: t.span.column + t.span.length,
                    length: 0,
                },
                None => SourceSpan {
                    line: 1,
                    column: 1,
                    length: 0,
                },
            },
        }
    }

    fn error(&mut self, kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) {
        self.errors.push(ParseError {
            kind,
            span,
            message: message.into(),
        });
    }

    fn syntax<T>(&mut self, expected: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(Tok::Bad(m)) => m.clone(),
            Some(t) => format!("expected {expected}, found {}", t.describe()),
            None => format!("expected {expected}, found end of input"),
        };
        let span = self.here();
        self.error(ParseErrorKind::Syntax, span, found);
        Err(Reported)
    }

    /// Skips the rest of the offending line, always making progress. Inside
    /// a block a closing brace also ends the skip.
    fn recover(&mut self, start: usize, in_block: bool) {
        if self.pos == start {
            self.pos += 1;
        }
        while let Some(t) = self.toks.get(self.pos) {
            if t.line_start || (in_block && t.tok == Tok::RBrace) {
                break;
            }
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        let span = self.here();
        if self.eat(&tok) {
            Ok(span)
        } else {
            self.syntax(&tok.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        let span = self.here();
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(span)
        } else {
            self.syntax(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let name = (s.clone(), self.here());
                self.pos += 1;
                Ok(name)
            }
            _ => self.syntax(what),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.syntax("a string"),
        }
    }

    fn number(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Tok::Number(s)) => {
                let n = (s.clone(), self.here());
                self.pos += 1;
                Ok(n)
            }
            _ => self.syntax(what),
        }
    }

    fn count(&mut self, what: &str) -> PResult<(u64, SourceSpan)> {
        let (text, span) = self.number(what)?;
        match text.parse::<u64>() {
            Ok(0) => {
                self.error(ParseErrorKind::EventRule, span, format!("{what} must be at least 1"));
                Err(Reported)
            }
            Ok(n) => Ok((n, span)),
            Err(_) => {
                self.error(ParseErrorKind::Syntax, span, format!("`{text}` is not a valid {what}"));
                Err(Reported)
            }
        }
    }

    fn dotted(&mut self, what: &str) -> PResult<Vec<Name>> {
        let mut segs = vec![self.ident(what)?];
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            segs.push(self.ident("a name after `.`")?);
        }
        Ok(segs)
    }

    /// `Path.kind`, or inside a thimac body also a bare `kind`.
    fn action_ref(&mut self, base: Option<&ThimacPath>) -> PResult<RawRef> {
        let start = self.here();
        let segments = self.dotted("an action reference")?;
        let relative = base.is_some();
        let last = &segments[segments.len() - 1].0;
        if ActionKind::from_keyword(last).is_none() || (!relative && segments.len() < 2) {
            self.error(
                ParseErrorKind::Syntax,
                start,
                format!(
                    "`{}` is not an action reference; expected {}",
                    segments.iter().map(|s| s.0.as_str()).collect::<Vec<_>>().join("."),
                    if relative {
                        "`kind` or `Sub.kind`"
                    } else {
                        "`Thimac.kind`"
                    }
                ),
            );
            return Err(Reported);
        }
        Ok(RawRef {
            base: base.cloned(),
            segments,
        })
    }

    fn path_ref(&mut self, what: &str) -> PResult<RawRef> {
        Ok(RawRef {
            base: None,
            segments: self.dotted(what)?,
        })
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Literal::Text(s))
            }
            Some(Tok::Number(n)) => {
                let span = self.here();
                self.pos += 1;
                n.parse::<i64>().map(Literal::Int).map_err(|_| {
                    self.error(ParseErrorKind::Syntax, span, format!("`{n}` is not an integer literal"));
                    Reported
                })
            }
            _ => self.syntax("a string or integer literal"),
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let Some(Tok::Ident(kw)) = self.peek().cloned() else {
            return self.syntax("a declaration");
        };
        match kw.as_str() {
            "model" => {
                let span = self.here();
                self.pos += 1;
                let name = self.string()?;
                if self.model_named {
                    self.error(ParseErrorKind::DuplicateName, span, "model name given twice");
                } else {
                    self.model_named = true;
                    self.model.set_name(name);
                }
                Ok(())
            }
            "thimac" => self.thimac_block(Ctx::Root, 1),
            "attribute" => self.attribute(Ctx::Root),
            "flow" | "trigger" => self.arc(None),
            "event" => self.event(),
            "chronology" => self.chronology(),
            _ => self.syntax("`model`, `thimac`, `flow`, `trigger`, `event` or `chronology`"),
        }
    }

    fn declare(&mut self, ctx: &Ctx, name: &Name, actions: ActionSet, attribute: bool) -> Ctx {
        let parent = match ctx {
            Ctx::Detached => return Ctx::Detached,
            Ctx::Root => None,
            Ctx::In(p) => Some(p),
        };
        match self.model.add_thimac(parent, &name.0, actions, attribute) {
            Ok(path) => {
                self.spans.insert(ElementId::Thimac(path.clone()), name.1);
                Ctx::In(path)
            }
            Err(e) => {
                let kind = match e {
                    ModelError::DuplicateName(_) => ParseErrorKind::DuplicateName,
                    _ => ParseErrorKind::ModelRule,
                };
                self.error(kind, name.1, e.to_string());
                Ctx::Detached
            }
        }
    }

    fn thimac_block(&mut self, ctx: Ctx, depth: usize) -> PResult<()> {
        let kw = self.keyword("thimac")?;
        if depth > MAX_DEPTH {
            self.error(
                ParseErrorKind::Syntax,
                kw,
                format!("thimacs nested deeper than {MAX_DEPTH} levels"),
            );
            return Err(Reported);
        }
        let name = self.ident("a thimac name")?;
        self.expect(Tok::LBrace)?;
        let me = self.declare(&ctx, &name, ActionSet::empty(), false);
        loop {
            let start = self.pos;
            match self.peek().cloned() {
                None => return self.syntax("`}`"),
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => {
                    if self.body_item(&me, depth).is_err() {
                        self.recover(start, true);
                    }
                }
            }
        }
    }

    fn body_item(&mut self, me: &Ctx, depth: usize) -> PResult<()> {
        let Some(Tok::Ident(word)) = self.peek().cloned() else {
            return self.syntax("an action, `thimac`, `attribute`, `flow` or `}`");
        };
        if let Some(kind) = ActionKind::from_keyword(&word) {
            let span = self.here();
            self.pos += 1;
            if let Ctx::In(path) = me {
                if let Err(e) = self.model.add_action(path, kind) {
                    self.error(ParseErrorKind::DuplicateName, span, e.to_string());
                }
            }
            return Ok(());
        }
        match word.as_str() {
            "thimac" => self.thimac_block(me.clone(), depth + 1),
            "attribute" => self.attribute(me.clone()),
            "flow" | "trigger" => {
                let base = match me {
                    Ctx::In(p) => Some(p.clone()),
                    // parse relative to a placeholder, then drop
                    _ => Some(ThimacPath::root("Detached").expect("valid")),
                };
                let before = self.arcs.len();
                self.arc(base)?;
                if matches!(me, Ctx::Detached) {
                    self.arcs.truncate(before);
                }
                Ok(())
            }
            _ => self.syntax("an action, `thimac`, `attribute`, `flow` or `}`"),
        }
    }

    fn attribute(&mut self, ctx: Ctx) -> PResult<()> {
        self.keyword("attribute")?;
        let name = self.ident("an attribute name")?;
        let mut actions = ActionSet::empty();
        if self.eat(&Tok::LBrace) {
            loop {
                match self.peek().cloned() {
                    Some(Tok::RBrace) => {
                        self.pos += 1;
                        break;
                    }
                    Some(Tok::Ident(w)) if ActionKind::from_keyword(&w).is_some() => {
                        let span = self.here();
                        self.pos += 1;
                        let kind = ActionKind::from_keyword(&w).expect("checked");
                        if !actions.insert(kind) {
                            self.error(
                                ParseErrorKind::DuplicateName,
                                span,
                                format!("`{name}` already declares {kind}", name = name.0),
                            );
                        }
                    }
                    _ => return self.syntax("an action or `}`"),
                }
            }
        } else {
            actions.insert(ActionKind::Create);
        }
        self.declare(&ctx, &name, actions, true);
        Ok(())
    }

    fn arc(&mut self, base: Option<ThimacPath>) -> PResult<()> {
        let span = self.here();
        let trigger = self.is_keyword("trigger");
        self.pos += 1;
        let from = self.action_ref(base.as_ref())?;
        match self.peek() {
            Some(Tok::Arrow) => self.pos += 1,
            Some(Tok::Squiggle) if trigger => self.pos += 1,
            _ => return self.syntax("`->`"),
        }
        let to = self.action_ref(base.as_ref())?;
        self.arcs.push(PendingArc {
            trigger,
            from,
            to,
            span,
        });
        Ok(())
    }

    fn event(&mut self) -> PResult<()> {
        self.keyword("event")?;
        let id = self.ident("an event name")?;
        let label = self.string()?;
        self.keyword("at")?;
        let (text, tspan) = self.number("a time")?;
        let time = match TimePoint::parse(&text) {
            Ok(t) => t,
            Err(e @ TimeError::Reserved) => {
                self.error(ParseErrorKind::EventRule, tspan, e.to_string());
                return Err(Reported);
            }
            Err(e) => {
                self.error(ParseErrorKind::Syntax, tspan, e.to_string());
                return Err(Reported);
            }
        };
        let mut duration = 1;
        if self.is_keyword("for") {
            self.pos += 1;
            duration = self.count("duration")?.0;
        }
        let mut terminates = None;
        if self.is_keyword("terminates") {
            self.pos += 1;
            terminates = Some(self.path_ref("a thimac path")?);
        }
        self.expect(Tok::LBrace)?;
        let mut ev = PendingEvent {
            id,
            label,
            time,
            duration,
            terminates,
            includes: Vec::new(),
            sets: Vec::new(),
            keys: Vec::new(),
        };
        loop {
            let start = self.pos;
            match self.peek() {
                None => {
                    self.events.push(ev);
                    return self.syntax("`}`");
                }
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                _ => {
                    if self.event_item(&mut ev).is_err() {
                        self.recover(start, true);
                    }
                }
            }
        }
        self.events.push(ev);
        Ok(())
    }

    fn event_item(&mut self, ev: &mut PendingEvent) -> PResult<()> {
        if self.is_keyword("include") {
            self.pos += 1;
            ev.includes.push(self.action_ref(None)?);
            while self.eat(&Tok::Comma) {
                ev.includes.push(self.action_ref(None)?);
            }
            return Ok(());
        }
        let set = self.is_keyword("set");
        if set || self.is_keyword("key") {
            self.pos += 1;
            let path = self.path_ref("a thimac path")?;
            self.expect(Tok::Eq)?;
            let value = self.literal()?;
            let list = if set { &mut ev.sets } else { &mut ev.keys };
            list.push((path, value));
            return Ok(());
        }
        self.syntax("`include`, `set`, `key` or `}`")
    }

    fn chronology(&mut self) -> PResult<()> {
        self.keyword("chronology")?;
        loop {
            let repeat = self.is_keyword("repeat") && matches!(self.peek_at(1), Some(Tok::Number(_)));
            if repeat {
                self.pos += 1;
                let (count, span) = self.count("repeat count")?;
                let count = u32::try_from(count).map_err(|_| {
                    self.error(ParseErrorKind::EventRule, span, "repeat count is too large");
                    Reported
                })?;
                self.expect(Tok::LBrace)?;
                let mut names = vec![self.ident("an event name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident("an event name")?);
                }
                self.expect(Tok::RBrace)?;
                let events = names.iter().map(|n| n.0.clone()).collect();
                self.chronology.push((ChronologyEntry::Repeat { count, events }, names));
            } else {
                let name = self.ident("an event name or `repeat`")?;
                self.chronology
                    .push((ChronologyEntry::Event(name.0.clone()), vec![name]));
            }
            if !self.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }

    fn unresolved(&mut self, r: &RawRef, what: &str) {
        let text = match &r.base {
            Some(b) => format!("{b}.{}", r.text()),
            None => r.text(),
        };
        self.error(
            ParseErrorKind::UnresolvedRef,
            r.span(),
            format!("{what} `{text}` is not declared"),
        );
    }

    fn resolve_action(&mut self, r: &RawRef) -> Option<ActionRef> {
        let action = r.action();
        if self.model.resolves(&action) {
            Some(action)
        } else {
            self.unresolved(r, "action");
            None
        }
    }

    fn resolve_thimac(&mut self, r: &RawRef) -> Option<ThimacPath> {
        let path = r.thimac();
        if self.model.thimac(&path).is_some() {
            Some(path)
        } else {
            self.unresolved(r, "thimac");
            None
        }
    }

    fn resolve(&mut self) -> ModelDocument {
        for arc in std::mem::take(&mut self.arcs) {
            let from = self.resolve_action(&arc.from);
            let to = self.resolve_action(&arc.to);
            let (Some(from), Some(to)) = (from, to) else {
                continue;
            };
            let result = if arc.trigger {
                self.model
                    .add_trigger(from.clone(), to.clone())
                    .map(|_| ElementId::Trigger(crate::model::TriggerArc::new(from, to)))
            } else {
                self.model
                    .add_flow(from.clone(), to.clone())
                    .map(|_| ElementId::Flow(crate::model::FlowArc::new(from, to)))
            };
            match result {
                Ok(id) => {
                    self.spans.insert(id, arc.span);
                }
                Err(e) => {
                    let kind = match e {
                        ModelError::DuplicateArc(_) => ParseErrorKind::DuplicateName,
                        _ => ParseErrorKind::ModelRule,
                    };
                    self.error(kind, arc.span, e.to_string());
                }
            }
        }

        let mut events = Vec::new();
        let mut ids = HashSet::new();
        for pending in std::mem::take(&mut self.events) {
            let (id, id_span) = pending.id.clone();
            if !ids.insert(id.clone()) {
                self.error(
                    ParseErrorKind::DuplicateName,
                    id_span,
                    format!("event `{id}` declared twice"),
                );
                continue;
            }
            let mut actions = BTreeSet::new();
            for r in &pending.includes {
                if let Some(a) = self.resolve_action(r) {
                    actions.insert(a);
                }
            }
            let mut event = EventDecl::new(
                id.clone(),
                pending.label,
                Region::induced(&self.model, actions),
                pending.time,
            );
            event.duration = pending.duration;
            event.terminates = pending.terminates.as_ref().and_then(|r| self.resolve_thimac(r));
            for (list, target, what) in [
                (&pending.sets, &mut event.bindings, "set"),
                (&pending.keys, &mut event.keys, "key"),
            ] {
                for (r, value) in list {
                    let Some(path) = self.resolve_thimac(r) else { continue };
                    if target.insert(path.clone(), value.clone()).is_some() {
                        self.error(
                            ParseErrorKind::EventRule,
                            r.span(),
                            format!("`{path}` has two {what} values in event `{id}`"),
                        );
                    }
                }
            }
            self.spans.insert(ElementId::Event(id), id_span);
            events.push(event);
        }

        let mut entries = Vec::new();
        let mut reported = HashSet::new();
        for (entry, names) in std::mem::take(&mut self.chronology) {
            for (name, span) in names {
                if !ids.contains(&name) && reported.insert(name.clone()) {
                    self.error(
                        ParseErrorKind::UnresolvedRef,
                        span,
                        format!("event `{name}` is not declared"),
                    );
                }
            }
            entries.push(entry);
        }

        ModelDocument {
            model: std::mem::take(&mut self.model),
            events,
            chronology: ChronologySpec { entries },
            spans: std::mem::take(&mut self.spans),
        }
    }
}
