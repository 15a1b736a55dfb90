//! In-memory static model: the thimac tree, its action nodes, and the flow
//! and trigger arcs between them.
//!
//! Builders are permissive about which action kinds may be connected by a
//! flow; adjacency legality is the job of [`crate::validate`]. What the
//! builders do enforce is referential integrity and the canonical form
//! (one action node per kind per thimac).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Returns true when `s` is a letter followed by letters, digits or `_`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Dotted path naming a thimac: the root name followed by nested subthimac names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThimacPath(Vec<String>);

impl ThimacPath {
    pub fn new<I, S>(segments: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(ModelError::InvalidIdentifier(String::new()));
        }
        if let Some(bad) = segments.iter().find(|s| !is_identifier(s)) {
            return Err(ModelError::InvalidIdentifier(bad.clone()));
        }
        Ok(Self(segments))
    }

    pub fn root(name: &str) -> Result<Self, ModelError> {
        Self::new([name])
    }

    pub fn child(&self, name: &str) -> Result<Self, ModelError> {
        if !is_identifier(name) {
            return Err(ModelError::InvalidIdentifier(name.to_string()));
        }
        let mut segments = self.0.clone();
        segments.push(name.to_string());
        Ok(Self(segments))
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self) -> &str {
        self.0.last().expect("paths are non-empty")
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<ThimacPath> {
        (self.0.len() > 1).then(|| Self(self.0[..self.0.len() - 1].to_vec()))
    }

    /// True when `self` equals `other` or lies inside it.
    pub fn is_within(&self, other: &ThimacPath) -> bool {
        self.0.len() >= other.0.len() && self.0[..other.0.len()] == other.0[..]
    }

    pub fn action(&self, kind: ActionKind) -> ActionRef {
        ActionRef::new(self.clone(), kind)
    }
}

impl fmt::Display for ThimacPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

impl FromStr for ThimacPath {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s.split('.'))
    }
}

/// The five things a machine can do to a thing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Create,
        ActionKind::Process,
        ActionKind::Release,
        ActionKind::Transfer,
        ActionKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    /// Accepts the lowercase keyword or its capitalized form.
    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "create" | "Create" => ActionKind::Create,
            "process" | "Process" => ActionKind::Process,
            "release" | "Release" => ActionKind::Release,
            "transfer" | "Transfer" => ActionKind::Transfer,
            "receive" | "Receive" => ActionKind::Receive,
            _ => return None,
        })
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Set of action kinds; iteration follows the canonical kind order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ActionSet(u8);

impl ActionSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn contains(self, kind: ActionKind) -> bool {
        self.0 & kind.bit() != 0
    }

    /// Returns false if the kind was already present.
    pub fn insert(&mut self, kind: ActionKind) -> bool {
        let fresh = !self.contains(kind);
        self.0 |= kind.bit();
        fresh
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = ActionKind> {
        ActionKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}

impl FromIterator<ActionKind> for ActionSet {
    fn from_iter<T: IntoIterator<Item = ActionKind>>(iter: T) -> Self {
        let mut set = Self::empty();
        for kind in iter {
            set.insert(kind);
        }
        set
    }
}

impl<const N: usize> From<[ActionKind; N]> for ActionSet {
    fn from(kinds: [ActionKind; N]) -> Self {
        kinds.into_iter().collect()
    }
}

/// A specific action node: one kind on one thimac.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionRef {
    pub thimac: ThimacPath,
    pub kind: ActionKind,
}

impl ActionRef {
    pub fn new(thimac: ThimacPath, kind: ActionKind) -> Self {
        Self { thimac, kind }
    }
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.thimac, self.kind)
    }
}

impl FromStr for ActionRef {
    type Err = ModelError;

    /// Parses `Path.To.Thimac.kind`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (path, kind) = s
            .rsplit_once('.')
            .ok_or_else(|| ModelError::InvalidIdentifier(s.to_string()))?;
        let kind = ActionKind::from_keyword(kind).ok_or_else(|| ModelError::InvalidIdentifier(kind.to_string()))?;
        Ok(Self::new(path.parse()?, kind))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thimac {
    name: String,
    subthimacs: Vec<Thimac>,
    actions: ActionSet,
    attribute: bool,
}

impl Thimac {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn subthimacs(&self) -> &[Thimac] {
        &self.subthimacs
    }

    pub fn actions(&self) -> ActionSet {
        self.actions
    }

    /// Value-bearing leaf (an attribute such as a price or a name).
    pub fn is_attribute(&self) -> bool {
        self.attribute
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowArc {
    pub from: ActionRef,
    pub to: ActionRef,
}

impl FlowArc {
    pub fn new(from: ActionRef, to: ActionRef) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for FlowArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

/// Causation arc: an action somewhere brings about a Create in another thimac.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriggerArc {
    pub from: ActionRef,
    pub to: ActionRef,
}

impl TriggerArc {
    pub fn new(from: ActionRef, to: ActionRef) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for TriggerArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~> {}", self.from, self.to)
    }
}

/// Derived classification of a flow arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowKind {
    /// The whole thimac flowing through its own actions.
    Itself,
    /// Flow among the parts of a thimac (or otherwise not the whole).
    Internal,
    /// Part of a route carrying an outside thing in and back out.
    Transit,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Itself => "self",
            FlowKind::Internal => "internal",
            FlowKind::Transit => "transit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown parent thimac `{0}`")]
    UnknownParent(ThimacPath),
    #[error("unknown thimac `{0}`")]
    UnknownThimac(ThimacPath),
    #[error("duplicate thimac name `{0}`")]
    DuplicateName(ThimacPath),
    #[error("thimac `{0}` already declares {1}")]
    DuplicateAction(ThimacPath, ActionKind),
    #[error("attribute rule violated at `{path}`: {reason}")]
    AttributeRuleViolation { path: ThimacPath, reason: &'static str },
    #[error("unresolved action reference `{0}`")]
    UnresolvedRef(ActionRef),
    #[error("duplicate arc `{0}`")]
    DuplicateArc(String),
    #[error("arc from `{0}` to itself")]
    SelfLoop(ActionRef),
    #[error("trigger target `{0}` is not a create action")]
    TriggerTargetNotCreate(ActionRef),
    #[error("trigger stays within thimac `{0}`")]
    TriggerWithinThimac(ThimacPath),
    #[error("flow `{0}` is not part of the model")]
    UnknownArc(FlowArc),
}

/// The atemporal diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticModel {
    name: String,
    roots: Vec<Thimac>,
    flows: Vec<FlowArc>,
    triggers: Vec<TriggerArc>,
}

impl StaticModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn roots(&self) -> &[Thimac] {
        &self.roots
    }

    pub fn flows(&self) -> &[FlowArc] {
        &self.flows
    }

    pub fn triggers(&self) -> &[TriggerArc] {
        &self.triggers
    }

    pub fn thimac(&self, path: &ThimacPath) -> Option<&Thimac> {
        let (first, rest) = path.segments().split_first()?;
        let mut node = self.roots.iter().find(|t| &t.name == first)?;
        for seg in rest {
            node = node.subthimacs.iter().find(|t| &t.name == seg)?;
        }
        Some(node)
    }

    fn thimac_mut(&mut self, path: &ThimacPath) -> Option<&mut Thimac> {
        let (first, rest) = path.segments().split_first()?;
        let mut node = self.roots.iter_mut().find(|t| &t.name == first)?;
        for seg in rest {
            node = node.subthimacs.iter_mut().find(|t| &t.name == seg)?;
        }
        Some(node)
    }

    /// Every thimac in declaration preorder.
    pub fn thimacs(&self) -> Vec<(ThimacPath, &Thimac)> {
        fn walk<'a>(prefix: &[String], nodes: &'a [Thimac], out: &mut Vec<(ThimacPath, &'a Thimac)>) {
            for node in nodes {
                let mut segs = prefix.to_vec();
                segs.push(node.name.clone());
                out.push((ThimacPath(segs.clone()), node));
                walk(&segs, &node.subthimacs, out);
            }
        }
        let mut out = Vec::new();
        walk(&[], &self.roots, &mut out);
        out
    }

    /// Every declared action node in thimac preorder, kinds in canonical order.
    pub fn actions(&self) -> Vec<ActionRef> {
        self.thimacs()
            .into_iter()
            .flat_map(|(path, t)| t.actions.iter().map(move |k| ActionRef::new(path.clone(), k)))
            .collect()
    }

    pub fn resolves(&self, action: &ActionRef) -> bool {
        self.thimac(&action.thimac)
            .is_some_and(|t| t.actions.contains(action.kind))
    }

    pub fn add_thimac(
        &mut self,
        parent: Option<&ThimacPath>,
        name: &str,
        actions: ActionSet,
        attribute: bool,
    ) -> Result<ThimacPath, ModelError> {
        let path = match parent {
            Some(p) => p.child(name)?,
            None => ThimacPath::root(name)?,
        };
        if attribute && !actions.contains(ActionKind::Create) {
            return Err(ModelError::AttributeRuleViolation {
                path,
                reason: "an attribute must declare create",
            });
        }
        let thimac = Thimac {
            name: name.to_string(),
            subthimacs: Vec::new(),
            actions,
            attribute,
        };
        let siblings = match parent {
            Some(p) => {
                let node = self.thimac_mut(p).ok_or_else(|| ModelError::UnknownParent(p.clone()))?;
                if node.attribute {
                    return Err(ModelError::AttributeRuleViolation {
                        path,
                        reason: "an attribute cannot contain subthimacs",
                    });
                }
                &mut node.subthimacs
            }
            None => &mut self.roots,
        };
        if siblings.iter().any(|t| t.name == name) {
            return Err(ModelError::DuplicateName(path));
        }
        siblings.push(thimac);
        Ok(path)
    }

    pub fn add_action(&mut self, thimac: &ThimacPath, kind: ActionKind) -> Result<(), ModelError> {
        let node = self
            .thimac_mut(thimac)
            .ok_or_else(|| ModelError::UnknownThimac(thimac.clone()))?;
        if !node.actions.insert(kind) {
            return Err(ModelError::DuplicateAction(thimac.clone(), kind));
        }
        Ok(())
    }

    fn resolve(&self, action: &ActionRef) -> Result<(), ModelError> {
        if self.resolves(action) {
            Ok(())
        } else {
            Err(ModelError::UnresolvedRef(action.clone()))
        }
    }

    pub fn add_flow(&mut self, from: ActionRef, to: ActionRef) -> Result<(), ModelError> {
        self.resolve(&from)?;
        self.resolve(&to)?;
        if from == to {
            return Err(ModelError::SelfLoop(from));
        }
        let arc = FlowArc::new(from, to);
        if self.flows.contains(&arc) {
            return Err(ModelError::DuplicateArc(arc.to_string()));
        }
        self.flows.push(arc);
        Ok(())
    }

    pub fn remove_flow(&mut self, arc: &FlowArc) -> Result<(), ModelError> {
        let idx = self
            .flows
            .iter()
            .position(|a| a == arc)
            .ok_or_else(|| ModelError::UnknownArc(arc.clone()))?;
        self.flows.remove(idx);
        Ok(())
    }

    pub fn add_trigger(&mut self, from: ActionRef, to: ActionRef) -> Result<(), ModelError> {
        self.resolve(&from)?;
        self.resolve(&to)?;
        if to.kind != ActionKind::Create {
            return Err(ModelError::TriggerTargetNotCreate(to));
        }
        if from.thimac == to.thimac {
            return Err(ModelError::TriggerWithinThimac(from.thimac));
        }
        let arc = TriggerArc::new(from, to);
        if self.triggers.contains(&arc) {
            return Err(ModelError::DuplicateArc(arc.to_string()));
        }
        self.triggers.push(arc);
        Ok(())
    }

    /// Actions that some flow or trigger touches.
    pub fn connected_actions(&self) -> BTreeSet<&ActionRef> {
        self.flows
            .iter()
            .flat_map(|a| [&a.from, &a.to])
            .chain(self.triggers.iter().flat_map(|a| [&a.from, &a.to]))
            .collect()
    }

    /// Classifies one flow arc of this model.
    pub fn classify_flow(&self, arc: &FlowArc) -> Result<FlowKind, ModelError> {
        if !self.flows.contains(arc) {
            return Err(ModelError::UnknownArc(arc.clone()));
        }
        let transit = crate::validate::transit_arcs(self);
        Ok(classify_with(arc, &transit))
    }

    /// Classification of every flow, in declaration order.
    pub fn classify_flows(&self) -> Vec<(FlowArc, FlowKind)> {
        let transit = crate::validate::transit_arcs(self);
        self.flows
            .iter()
            .map(|a| (a.clone(), classify_with(a, &transit)))
            .collect()
    }
}

fn classify_with(arc: &FlowArc, transit: &BTreeSet<FlowArc>) -> FlowKind {
    if transit.contains(arc) {
        FlowKind::Transit
    } else if arc.from.thimac == arc.to.thimac && arc.from.thimac.depth() == 1 {
        FlowKind::Itself
    } else {
        FlowKind::Internal
    }
}
