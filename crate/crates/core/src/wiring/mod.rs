//! Decision trees: one party's adaptive strategy for consulting the
//! resources it holds a share of.
//!
//! The root branches on the party's setting. Every internal node names a
//! resource and the input supplied to it, and has one child per output the
//! party can observe from that resource. Along every root-to-terminal path
//! each resource in the tree's scope is consulted exactly once.

mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use json::{NodeFile, TreeFile, TreeFileError};

use crate::resource::{Alphabet, NonsignalingResource};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Internal {
        resource: String,
        input: u32,
        children: BTreeMap<u32, Node>,
    },
    /// End of a path, optionally labeled with the party's final outcome.
    Terminal { outcome: Option<u32> },
}

impl Node {
    pub fn terminal() -> Self {
        Node::Terminal { outcome: None }
    }

    pub fn labeled(outcome: u32) -> Self {
        Node::Terminal {
            outcome: Some(outcome),
        }
    }

    fn collect_resources(&self, out: &mut BTreeSet<String>) {
        if let Node::Internal {
            resource, children, ..
        } = self
        {
            out.insert(resource.clone());
            for c in children.values() {
                c.collect_resources(out);
            }
        }
    }

    fn terminals_mut(&mut self, f: &mut impl FnMut(&mut Node)) {
        match self {
            Node::Internal { children, .. } => {
                for c in children.values_mut() {
                    c.terminals_mut(f);
                }
            }
            t @ Node::Terminal { .. } => f(t),
        }
    }
}

/// One step on a path from the root, used to locate tree errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    Setting(u32),
    Output { resource: String, output: u32 },
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::Setting(s) => write!(f, "setting={s}"),
            PathStep::Output { resource, output } => write!(f, "{resource}->{output}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeErrorKind {
    #[error("no root edge for setting {0}")]
    MissingSetting(u32),
    #[error("root edge for setting {0}, which is not in the settings alphabet")]
    UnknownSetting(u32),
    #[error("resource `{0}` is not available")]
    DanglingResource(String),
    #[error("party is not a member of resource `{0}`")]
    NotAMember(String),
    #[error("resource `{0}` is consulted twice on one path")]
    Reused(String),
    #[error("input {input} is outside the input alphabet of `{resource}`")]
    InputOutOfAlphabet { resource: String, input: u32 },
    #[error("node for `{resource}` has output edges {found:?}, expected {expected:?}")]
    OutputEdges {
        resource: String,
        found: Vec<u32>,
        expected: Vec<u32>,
    },
    #[error("path ends after {consulted} of {expected} resources")]
    UnevenDepth { consulted: usize, expected: usize },
    #[error("resource `{0}` is not in the tree's scope")]
    OutOfScope(String),
    #[error("no output given for resource `{0}`")]
    MissingOutput(String),
    #[error("output {output} is not an edge of the node for `{resource}`")]
    NoSuchEdge { resource: String, output: u32 },
    #[error("resource `{0}` is already consulted by the tree")]
    AlreadyInScope(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TreeError {
    pub party: String,
    pub path: Vec<PathStep>,
    pub kind: TreeErrorKind,
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(ToString::to_string).collect();
        write!(
            f,
            "tree of `{}` at [{}]: {}",
            self.party,
            path.join(" / "),
            self.kind
        )
    }
}

/// Result of walking one maximal path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    /// Input supplied to each consulted resource.
    pub inputs: BTreeMap<String, u32>,
    pub consult_order: Vec<String>,
    pub outcome: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    party: String,
    root: BTreeMap<u32, Node>,
    scope: BTreeSet<String>,
}

impl DecisionTree {
    /// The scope is every resource named anywhere in the tree.
    pub fn new(party: impl Into<String>, root: BTreeMap<u32, Node>) -> Self {
        let mut scope = BTreeSet::new();
        for n in root.values() {
            n.collect_resources(&mut scope);
        }
        Self {
            party: party.into(),
            root,
            scope,
        }
    }

    pub fn party(&self) -> &str {
        &self.party
    }

    pub fn root(&self) -> &BTreeMap<u32, Node> {
        &self.root
    }

    pub fn scope(&self) -> &BTreeSet<String> {
        &self.scope
    }

    pub fn settings(&self) -> impl Iterator<Item = u32> + '_ {
        self.root.keys().copied()
    }

    fn err(&self, path: &[PathStep], kind: TreeErrorKind) -> TreeError {
        TreeError {
            party: self.party.clone(),
            path: path.to_vec(),
            kind,
        }
    }

    /// Checks the structural conditions against a settings alphabet and the
    /// available resources: one root edge per setting, each scope resource
    /// consulted exactly once per path, valid inputs, and one output edge per
    /// valid output.
    pub fn validate(
        &self,
        settings: &Alphabet,
        resources: &[&NonsignalingResource],
    ) -> Result<(), TreeError> {
        let lookup: BTreeMap<&str, &NonsignalingResource> =
            resources.iter().map(|r| (r.id(), *r)).collect();
        for k in &self.scope {
            let r = lookup
                .get(k.as_str())
                .ok_or_else(|| self.err(&[], TreeErrorKind::DanglingResource(k.clone())))?;
            if r.party_index(&self.party).is_none() {
                return Err(self.err(&[], TreeErrorKind::NotAMember(k.clone())));
            }
        }
        for &s in self.root.keys() {
            if !settings.contains(s) {
                return Err(self.err(&[], TreeErrorKind::UnknownSetting(s)));
            }
        }
        for &s in settings.symbols() {
            let node = self
                .root
                .get(&s)
                .ok_or_else(|| self.err(&[], TreeErrorKind::MissingSetting(s)))?;
            let mut path = vec![PathStep::Setting(s)];
            let mut used = BTreeSet::new();
            self.validate_node(node, &lookup, &mut path, &mut used)?;
        }
        Ok(())
    }

    fn validate_node(
        &self,
        node: &Node,
        lookup: &BTreeMap<&str, &NonsignalingResource>,
        path: &mut Vec<PathStep>,
        used: &mut BTreeSet<String>,
    ) -> Result<(), TreeError> {
        match node {
            Node::Terminal { .. } => {
                if used.len() != self.scope.len() {
                    return Err(self.err(
                        path,
                        TreeErrorKind::UnevenDepth {
                            consulted: used.len(),
                            expected: self.scope.len(),
                        },
                    ));
                }
                Ok(())
            }
            Node::Internal {
                resource,
                input,
                children,
            } => {
                let r = lookup.get(resource.as_str()).ok_or_else(|| {
                    self.err(path, TreeErrorKind::DanglingResource(resource.clone()))
                })?;
                let j = r
                    .party_index(&self.party)
                    .ok_or_else(|| self.err(path, TreeErrorKind::NotAMember(resource.clone())))?;
                if !used.insert(resource.clone()) {
                    return Err(self.err(path, TreeErrorKind::Reused(resource.clone())));
                }
                if !r.input_alphabets()[j].contains(*input) {
                    return Err(self.err(
                        path,
                        TreeErrorKind::InputOutOfAlphabet {
                            resource: resource.clone(),
                            input: *input,
                        },
                    ));
                }
                let outs = &r.output_alphabets()[j];
                let found: Vec<u32> = children.keys().copied().collect();
                let mut expected = outs.symbols().to_vec();
                expected.sort_unstable();
                if found != expected {
                    return Err(self.err(
                        path,
                        TreeErrorKind::OutputEdges {
                            resource: resource.clone(),
                            found,
                            expected,
                        },
                    ));
                }
                for (&out, child) in children {
                    path.push(PathStep::Output {
                        resource: resource.clone(),
                        output: out,
                    });
                    self.validate_node(child, lookup, path, used)?;
                    path.pop();
                }
                used.remove(resource);
                Ok(())
            }
        }
    }

    /// Follows the setting edge, then at each node the edge labeled with the
    /// given output of that node's resource.
    pub fn trace_path(
        &self,
        setting: u32,
        outputs: &BTreeMap<String, u32>,
    ) -> Result<PathTrace, TreeError> {
        let mut path = vec![PathStep::Setting(setting)];
        let mut node = self
            .root
            .get(&setting)
            .ok_or_else(|| self.err(&[], TreeErrorKind::UnknownSetting(setting)))?;
        let mut inputs = BTreeMap::new();
        let mut order = Vec::new();
        loop {
            match node {
                Node::Terminal { outcome } => {
                    return Ok(PathTrace {
                        inputs,
                        consult_order: order,
                        outcome: *outcome,
                    })
                }
                Node::Internal {
                    resource,
                    input,
                    children,
                } => {
                    let out = *outputs.get(resource).ok_or_else(|| {
                        self.err(&path, TreeErrorKind::MissingOutput(resource.clone()))
                    })?;
                    inputs.insert(resource.clone(), *input);
                    order.push(resource.clone());
                    node = children.get(&out).ok_or_else(|| {
                        self.err(
                            &path,
                            TreeErrorKind::NoSuchEdge {
                                resource: resource.clone(),
                                output: out,
                            },
                        )
                    })?;
                    path.push(PathStep::Output {
                        resource: resource.clone(),
                        output: out,
                    });
                }
            }
        }
    }

    /// Removes every consultation of `resource`, continuing along the edge
    /// chosen by `select(input)`.
    pub fn excise(
        &self,
        resource: &str,
        select: impl Fn(u32) -> u32,
    ) -> Result<DecisionTree, TreeError> {
        if !self.scope.contains(resource) {
            return Err(self.err(&[], TreeErrorKind::OutOfScope(resource.to_string())));
        }
        fn go(
            tree: &DecisionTree,
            node: &Node,
            resource: &str,
            select: &impl Fn(u32) -> u32,
            path: &mut Vec<PathStep>,
        ) -> Result<Node, TreeError> {
            match node {
                Node::Terminal { .. } => Ok(node.clone()),
                Node::Internal {
                    resource: r,
                    input,
                    children,
                } if r == resource => {
                    let out = select(*input);
                    let child = children.get(&out).ok_or_else(|| {
                        tree.err(
                            path,
                            TreeErrorKind::NoSuchEdge {
                                resource: r.clone(),
                                output: out,
                            },
                        )
                    })?;
                    go(tree, child, resource, select, path)
                }
                Node::Internal {
                    resource: r,
                    input,
                    children,
                } => {
                    let mut new_children = BTreeMap::new();
                    for (&o, c) in children {
                        path.push(PathStep::Output {
                            resource: r.clone(),
                            output: o,
                        });
                        new_children.insert(o, go(tree, c, resource, select, path)?);
                        path.pop();
                    }
                    Ok(Node::Internal {
                        resource: r.clone(),
                        input: *input,
                        children: new_children,
                    })
                }
            }
        }
        let mut root = BTreeMap::new();
        for (&s, n) in &self.root {
            let mut path = vec![PathStep::Setting(s)];
            root.insert(s, go(self, n, resource, &select, &mut path)?);
        }
        let mut scope = self.scope.clone();
        scope.remove(resource);
        Ok(DecisionTree {
            party: self.party.clone(),
            root,
            scope,
        })
    }

    /// Excision for an input-free resource whose output for this party is `output`.
    pub fn excise_input_free(
        &self,
        resource: &str,
        output: u32,
    ) -> Result<DecisionTree, TreeError> {
        self.excise(resource, |_| output)
    }

    /// Appends, below every terminal, a chain consulting each unused resource
    /// with the given dummy input; all output edges lead to the same subtree
    /// and the terminal's label is kept.
    pub fn append_unused(
        &self,
        unused: &[(&NonsignalingResource, u32)],
    ) -> Result<DecisionTree, TreeError> {
        let mut scope = self.scope.clone();
        let mut chain: Vec<(String, u32, Vec<u32>)> = Vec::new();
        for (r, dummy) in unused {
            if !scope.insert(r.id().to_string()) {
                return Err(self.err(&[], TreeErrorKind::AlreadyInScope(r.id().to_string())));
            }
            let j = r
                .party_index(&self.party)
                .ok_or_else(|| self.err(&[], TreeErrorKind::NotAMember(r.id().to_string())))?;
            if !r.input_alphabets()[j].contains(*dummy) {
                return Err(self.err(
                    &[],
                    TreeErrorKind::InputOutOfAlphabet {
                        resource: r.id().to_string(),
                        input: *dummy,
                    },
                ));
            }
            chain.push((
                r.id().to_string(),
                *dummy,
                r.output_alphabets()[j].symbols().to_vec(),
            ));
        }
        let mut root = self.root.clone();
        for n in root.values_mut() {
            n.terminals_mut(&mut |t| {
                let mut sub = t.clone();
                for (id, dummy, outs) in chain.iter().rev() {
                    sub = Node::Internal {
                        resource: id.clone(),
                        input: *dummy,
                        children: outs.iter().map(|&o| (o, sub.clone())).collect(),
                    };
                }
                *t = sub;
            });
        }
        Ok(DecisionTree {
            party: self.party.clone(),
            root,
            scope,
        })
    }

    /// Builds a tree from a policy. `next(setting, history)` names the next
    /// resource and its input given the outputs observed so far; `label`
    /// assigns each terminal its outcome. Output edges come from the party's
    /// output alphabet in each resource.
    pub fn build(
        party: &str,
        settings: &Alphabet,
        resources: &[&NonsignalingResource],
        mut next: impl FnMut(u32, &[(String, u32)]) -> (String, u32),
        mut label: impl FnMut(u32, &[(String, u32)]) -> Option<u32>,
    ) -> Result<DecisionTree, TreeError> {
        let lookup: BTreeMap<&str, &NonsignalingResource> =
            resources.iter().map(|r| (r.id(), *r)).collect();
        let depth = resources.len();
        #[allow(clippy::too_many_arguments)]
        fn go(
            party: &str,
            setting: u32,
            depth: usize,
            lookup: &BTreeMap<&str, &NonsignalingResource>,
            history: &mut Vec<(String, u32)>,
            next: &mut impl FnMut(u32, &[(String, u32)]) -> (String, u32),
            label: &mut impl FnMut(u32, &[(String, u32)]) -> Option<u32>,
        ) -> Result<Node, TreeError> {
            if history.len() == depth {
                return Ok(Node::Terminal {
                    outcome: label(setting, history),
                });
            }
            let (resource, input) = next(setting, history);
            let err = |kind| TreeError {
                party: party.to_string(),
                path: vec![PathStep::Setting(setting)],
                kind,
            };
            let r = lookup
                .get(resource.as_str())
                .ok_or_else(|| err(TreeErrorKind::DanglingResource(resource.clone())))?;
            if history.iter().any(|(k, _)| k == &resource) {
                return Err(err(TreeErrorKind::Reused(resource.clone())));
            }
            let j = r
                .party_index(party)
                .ok_or_else(|| err(TreeErrorKind::NotAMember(resource.clone())))?;
            let mut children = BTreeMap::new();
            for &o in r.output_alphabets()[j].symbols() {
                history.push((resource.clone(), o));
                children.insert(o, go(party, setting, depth, lookup, history, next, label)?);
                history.pop();
            }
            Ok(Node::Internal {
                resource,
                input,
                children,
            })
        }
        let mut root = BTreeMap::new();
        for &s in settings.symbols() {
            let mut history = Vec::new();
            root.insert(
                s,
                go(
                    party,
                    s,
                    depth,
                    &lookup,
                    &mut history,
                    &mut next,
                    &mut label,
                )?,
            );
        }
        let tree = DecisionTree::new(party, root);
        tree.validate(settings, resources)?;
        Ok(tree)
    }

    /// Consults `order` in sequence, each with input `input(setting, resource)`.
    pub fn fixed_order(
        party: &str,
        settings: &Alphabet,
        resources: &[&NonsignalingResource],
        input: impl Fn(u32, &str) -> u32,
    ) -> Result<DecisionTree, TreeError> {
        let order: Vec<String> = resources.iter().map(|r| r.id().to_string()).collect();
        Self::build(
            party,
            settings,
            resources,
            |s, h| {
                let k = order[h.len()].clone();
                let x = input(s, &k);
                (k, x)
            },
            |_, _| None,
        )
    }

    /// Replaces every terminal label by `label(setting, transcript)`, where the
    /// transcript lists `(resource, output)` in consultation order.
    pub fn relabel_terminals(
        &self,
        mut label: impl FnMut(u32, &[(String, u32)]) -> Option<u32>,
    ) -> DecisionTree {
        fn go(
            node: &Node,
            setting: u32,
            history: &mut Vec<(String, u32)>,
            label: &mut impl FnMut(u32, &[(String, u32)]) -> Option<u32>,
        ) -> Node {
            match node {
                Node::Terminal { .. } => Node::Terminal {
                    outcome: label(setting, history),
                },
                Node::Internal {
                    resource,
                    input,
                    children,
                } => {
                    let mut new_children = BTreeMap::new();
                    for (&o, c) in children {
                        history.push((resource.clone(), o));
                        new_children.insert(o, go(c, setting, history, label));
                        history.pop();
                    }
                    Node::Internal {
                        resource: resource.clone(),
                        input: *input,
                        children: new_children,
                    }
                }
            }
        }
        let root = self
            .root
            .iter()
            .map(|(&s, n)| (s, go(n, s, &mut Vec::new(), &mut label)))
            .collect();
        DecisionTree {
            party: self.party.clone(),
            root,
            scope: self.scope.clone(),
        }
    }

    /// True when every terminal carries an outcome label.
    pub fn fully_labeled(&self) -> bool {
        fn go(n: &Node) -> bool {
            match n {
                Node::Terminal { outcome } => outcome.is_some(),
                Node::Internal { children, .. } => children.values().all(go),
            }
        }
        self.root.values().all(go)
    }

    /// Distinct terminal labels, sorted.
    pub fn labels(&self) -> BTreeSet<u32> {
        fn go(n: &Node, out: &mut BTreeSet<u32>) {
            match n {
                Node::Terminal { outcome } => {
                    if let Some(o) = outcome {
                        out.insert(*o);
                    }
                }
                Node::Internal { children, .. } => children.values().for_each(|c| go(c, out)),
            }
        }
        let mut out = BTreeSet::new();
        self.root.values().for_each(|n| go(n, &mut out));
        out
    }

    /// Same tree with resources and party renamed.
    pub fn renamed(&self, party: &str, resource: impl Fn(&str) -> String) -> DecisionTree {
        fn go(n: &Node, f: &impl Fn(&str) -> String) -> Node {
            match n {
                Node::Terminal { .. } => n.clone(),
                Node::Internal {
                    resource,
                    input,
                    children,
                } => Node::Internal {
                    resource: f(resource),
                    input: *input,
                    children: children.iter().map(|(&o, c)| (o, go(c, f))).collect(),
                },
            }
        }
        let root = self
            .root
            .iter()
            .map(|(&s, n)| (s, go(n, &resource)))
            .collect();
        DecisionTree::new(party, root)
    }
}

#[cfg(test)]
mod tests;
