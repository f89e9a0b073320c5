//! Networks of resources wired together by per-party decision trees.
//!
//! For fixed settings, every assignment of outputs to all resource slots
//! determines, through each party's tree, the input every party feeds to
//! every resource. The probability of the assignment is the product of the
//! resource tables evaluated at those inputs and outputs.

mod json;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

pub use json::{load_resource, BinFile, OutcomeFile, Ref, ScenarioError, ScenarioFile};

use crate::index::Radix;
use crate::rational::{format_rational, Rational};
use crate::resource::{
    Alphabet, ConditionalTable, NonsignalingResource, ResourceError, SignalingWitness,
};
use crate::wiring::{DecisionTree, Node, TreeError};

/// Induced distribution of final outcomes given settings. Same type as a
/// resource, so every resource-level validator applies.
pub type Behavior = NonsignalingResource;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("party `{0}` appears twice")]
    DuplicateParty(String),
    #[error("resource id `{0}` appears twice")]
    DuplicateResource(String),
    #[error("resource `{resource}` names party `{party}`, which is not in the network")]
    UnknownMember { resource: String, party: String },
    #[error("no decision tree for party `{0}`")]
    MissingTree(String),
    #[error("decision tree for `{0}`, which is not a party")]
    StrayTree(String),
    #[error("tree of `{party}` consults {found:?}, but the party holds shares of {expected:?}")]
    ScopeMismatch {
        party: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("expected {expected} {what}, got {found}")]
    Arity {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("party `{party}`: terminal without an outcome label")]
    UnlabeledTerminal { party: String },
    #[error("party `{party}`: outcome {outcome} is not in its outcome alphabet")]
    OutcomeOutOfAlphabet { party: String, outcome: u32 },
    #[error("party `{party}`: bins do not cover transcript {transcript:?}")]
    BinNotTotal { party: String, transcript: Vec<u32> },
    #[error("symbol {symbol} out of range for {what}")]
    SymbolOutOfRange { what: String, symbol: u32 },
    #[error("resource `{0}` has not passed the nonsignaling check; use the unnormalized mode to evaluate it")]
    Unverified(String),
    #[error("joint distribution at settings {settings:?} sums to {sum}, not 1")]
    NotNormalized { settings: Vec<u32>, sum: String },
    #[error("induced behavior signals: {0}")]
    Signaling(Box<SignalingWitness<Rational>>),
    #[error("operation needs at least two parties")]
    TooFewParties,
    #[error("networks share party or resource `{0}`")]
    Overlap(String),
    #[error("{check}: the two computations differ at inputs {inputs:?}, outputs {outputs:?} ({left} vs {right})")]
    Mismatch {
        check: &'static str,
        inputs: Vec<u32>,
        outputs: Vec<u32>,
        left: String,
        right: String,
    },
}

/// How a party turns its path through the tree into a final outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeRule {
    /// The full transcript of outputs, indexed in mixed radix over the
    /// party's resources sorted by id (first resource slowest).
    Transcript,
    /// Terminal labels of the tree. The alphabet defaults to the labels used.
    Labels { alphabet: Option<Alphabet> },
    /// A map from transcripts (output symbols in resource-id order) to
    /// outcomes. The alphabet defaults to the image of the map.
    Bins {
        alphabet: Option<Alphabet>,
        map: BTreeMap<Vec<u32>, u32>,
    },
}

#[derive(Debug, Clone)]
enum Compiled {
    Internal {
        slot: usize,
        input: usize,
        children: Vec<Compiled>,
    },
    Terminal {
        outcome: usize,
    },
}

/// Output/input slot: one (resource, member party) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Slot {
    resource: usize,
    member: usize,
}

#[derive(Debug, Clone)]
pub struct Network {
    parties: Vec<String>,
    settings: Vec<Alphabet>,
    resources: Vec<NonsignalingResource>,
    trees: Vec<DecisionTree>,
    rules: Vec<OutcomeRule>,
    outcome_alphabets: Vec<Alphabet>,
    slots: Vec<Slot>,
    slot_offset: Vec<usize>,
    slot_radix: Radix,
    compiled: Vec<Vec<Compiled>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.parties == other.parties
            && self.settings == other.settings
            && self.resources == other.resources
            && self.trees == other.trees
            && self.rules == other.rules
            && self.outcome_alphabets == other.outcome_alphabets
    }
}

/// Exact joint distribution over all resource outputs at fixed settings.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub settings: Vec<u32>,
    resource_ids: Vec<String>,
    /// Output alphabets of each resource, per member party.
    outputs: Vec<Vec<Alphabet>>,
    radix: Radix,
    table: Vec<Rational>,
    sum: Rational,
}

impl JointDistribution {
    pub fn sum(&self) -> &Rational {
        &self.sum
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn resource_ids(&self) -> &[String] {
        &self.resource_ids
    }

    pub fn values(&self) -> &[Rational] {
        &self.table
    }

    fn decode(&self, index: usize) -> Vec<Vec<u32>> {
        let digits = self.radix.decode(index);
        let mut it = digits.into_iter();
        self.outputs
            .iter()
            .map(|alphas| {
                alphas
                    .iter()
                    .map(|a| a.symbol(it.next().unwrap_or(0)))
                    .collect()
            })
            .collect()
    }

    /// Nonzero entries as (per-resource output symbols, probability).
    pub fn support(&self) -> impl Iterator<Item = (Vec<Vec<u32>>, &Rational)> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (self.decode(i), p))
    }

    /// Probability of one assignment, given per resource in id order of
    /// [`JointDistribution::resource_ids`].
    pub fn get(&self, outputs: &[Vec<u32>]) -> Option<&Rational> {
        if outputs.len() != self.outputs.len() {
            return None;
        }
        let mut digits = Vec::with_capacity(self.radix.len());
        for (outs, alphas) in outputs.iter().zip(&self.outputs) {
            if outs.len() != alphas.len() {
                return None;
            }
            for (o, a) in outs.iter().zip(alphas) {
                digits.push(a.index_of(*o)?);
            }
        }
        self.table.get(self.radix.encode(&digits))
    }
}

/// One resource's contribution to a joint probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub resource: String,
    /// Input symbol per member party, in the resource's party order.
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub value: Rational,
}

fn position(
    alphabet: &Alphabet,
    symbol: u32,
    what: impl FnOnce() -> String,
) -> Result<usize, NetworkError> {
    alphabet
        .index_of(symbol)
        .ok_or_else(|| NetworkError::SymbolOutOfRange {
            what: what(),
            symbol,
        })
}

impl Network {
    /// Assembles and validates a network. Trees may be given in any order;
    /// each party needs exactly one, and its scope must be exactly the set of
    /// resources the party is a member of. Resources that failed (or skipped)
    /// the nonsignaling check are accepted here but refused by
    /// [`Network::joint_distribution`] unless explicitly allowed.
    pub fn new(
        parties: Vec<String>,
        settings: Vec<Alphabet>,
        resources: Vec<NonsignalingResource>,
        trees: Vec<DecisionTree>,
        rules: Vec<OutcomeRule>,
    ) -> Result<Self, NetworkError> {
        let n = parties.len();
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].contains(p) {
                return Err(NetworkError::DuplicateParty(p.clone()));
            }
        }
        for (what, found) in [
            ("settings alphabets", settings.len()),
            ("outcome rules", rules.len()),
        ] {
            if found != n {
                return Err(NetworkError::Arity {
                    what,
                    expected: n,
                    found,
                });
            }
        }
        let mut ids = BTreeSet::new();
        for r in &resources {
            if !ids.insert(r.id().to_string()) {
                return Err(NetworkError::DuplicateResource(r.id().to_string()));
            }
            for p in r.parties() {
                if !parties.contains(p) {
                    return Err(NetworkError::UnknownMember {
                        resource: r.id().to_string(),
                        party: p.clone(),
                    });
                }
            }
        }
        let mut by_party: BTreeMap<String, DecisionTree> = BTreeMap::new();
        for t in trees {
            if !parties.iter().any(|p| p == t.party()) {
                return Err(NetworkError::StrayTree(t.party().to_string()));
            }
            if by_party.insert(t.party().to_string(), t.clone()).is_some() {
                return Err(NetworkError::DuplicateParty(t.party().to_string()));
            }
        }
        let mut ordered = Vec::with_capacity(n);
        for (i, p) in parties.iter().enumerate() {
            let t = by_party
                .remove(p)
                .ok_or_else(|| NetworkError::MissingTree(p.clone()))?;
            let expected: Vec<String> = resources
                .iter()
                .filter(|r| r.party_index(p).is_some())
                .map(|r| r.id().to_string())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let found: Vec<String> = t.scope().iter().cloned().collect();
            if expected != found {
                return Err(NetworkError::ScopeMismatch {
                    party: p.clone(),
                    expected,
                    found,
                });
            }
            let in_scope: Vec<&NonsignalingResource> = resources
                .iter()
                .filter(|r| t.scope().contains(r.id()))
                .collect();
            t.validate(&settings[i], &in_scope)?;
            ordered.push(t);
        }
        let mut slots = Vec::new();
        let mut slot_offset = Vec::with_capacity(resources.len());
        let mut sizes = Vec::new();
        for (k, r) in resources.iter().enumerate() {
            slot_offset.push(slots.len());
            for j in 0..r.party_count() {
                slots.push(Slot {
                    resource: k,
                    member: j,
                });
                sizes.push(r.output_alphabets()[j].len());
            }
        }
        let mut net = Self {
            parties,
            settings,
            resources,
            trees: ordered,
            rules,
            outcome_alphabets: Vec::new(),
            slots,
            slot_offset,
            slot_radix: Radix::new(sizes),
            compiled: Vec::new(),
        };
        net.compile()?;
        Ok(net)
    }

    fn resource_index(&self, id: &str) -> Option<usize> {
        self.resources.iter().position(|r| r.id() == id)
    }

    /// Resources in `party`'s scope, sorted by id, with the party's position
    /// in each.
    fn transcript_layout(&self, p: usize) -> Vec<(usize, usize)> {
        self.trees[p]
            .scope()
            .iter()
            .map(|id| {
                let k = self.resource_index(id).expect("scope checked");
                (
                    k,
                    self.resources[k]
                        .party_index(&self.parties[p])
                        .expect("membership checked"),
                )
            })
            .collect()
    }

    fn transcript_radix(&self, p: usize) -> Radix {
        Radix::new(
            self.transcript_layout(p)
                .iter()
                .map(|&(k, j)| self.resources[k].output_alphabets()[j].len())
                .collect(),
        )
    }

    fn compile(&mut self) -> Result<(), NetworkError> {
        let mut alphabets = Vec::with_capacity(self.parties.len());
        let mut compiled = Vec::with_capacity(self.parties.len());
        for p in 0..self.parties.len() {
            let layout = self.transcript_layout(p);
            let radix = self.transcript_radix(p);
            let party = self.parties[p].clone();
            let alphabet = match &self.rules[p] {
                OutcomeRule::Transcript => Alphabet::range(radix.count()),
                OutcomeRule::Labels { alphabet: Some(a) }
                | OutcomeRule::Bins {
                    alphabet: Some(a), ..
                } => a.clone(),
                OutcomeRule::Labels { alphabet: None } => {
                    let labels = self.trees[p].labels();
                    if labels.is_empty() {
                        return Err(NetworkError::UnlabeledTerminal { party });
                    }
                    Alphabet::new(labels.into_iter().collect())?
                }
                OutcomeRule::Bins {
                    alphabet: None,
                    map,
                } => {
                    let image: BTreeSet<u32> = map.values().copied().collect();
                    if image.is_empty() {
                        return Err(NetworkError::BinNotTotal {
                            party,
                            transcript: Vec::new(),
                        });
                    }
                    Alphabet::new(image.into_iter().collect())?
                }
            };
            let mut roots = Vec::with_capacity(self.settings[p].len());
            for &s in self.settings[p].symbols() {
                let node = &self.trees[p].root()[&s];
                let mut digits = vec![0usize; layout.len()];
                roots.push(self.compile_node(p, node, &layout, &radix, &alphabet, &mut digits)?);
            }
            alphabets.push(alphabet);
            compiled.push(roots);
        }
        self.outcome_alphabets = alphabets;
        self.compiled = compiled;
        Ok(())
    }

    fn compile_node(
        &self,
        p: usize,
        node: &Node,
        layout: &[(usize, usize)],
        radix: &Radix,
        alphabet: &Alphabet,
        digits: &mut Vec<usize>,
    ) -> Result<Compiled, NetworkError> {
        let party = &self.parties[p];
        match node {
            Node::Terminal { outcome } => {
                let outcome = match &self.rules[p] {
                    OutcomeRule::Transcript => radix.encode(digits),
                    OutcomeRule::Labels { .. } => {
                        let o = outcome.ok_or_else(|| NetworkError::UnlabeledTerminal {
                            party: party.clone(),
                        })?;
                        alphabet
                            .index_of(o)
                            .ok_or_else(|| NetworkError::OutcomeOutOfAlphabet {
                                party: party.clone(),
                                outcome: o,
                            })?
                    }
                    OutcomeRule::Bins { map, .. } => {
                        let transcript: Vec<u32> = layout
                            .iter()
                            .zip(digits.iter())
                            .map(|(&(k, j), &d)| self.resources[k].output_alphabets()[j].symbol(d))
                            .collect();
                        let o = *map
                            .get(&transcript)
                            .ok_or_else(|| NetworkError::BinNotTotal {
                                party: party.clone(),
                                transcript: transcript.clone(),
                            })?;
                        alphabet
                            .index_of(o)
                            .ok_or_else(|| NetworkError::OutcomeOutOfAlphabet {
                                party: party.clone(),
                                outcome: o,
                            })?
                    }
                };
                Ok(Compiled::Terminal { outcome })
            }
            Node::Internal {
                resource,
                input,
                children,
            } => {
                let k = self.resource_index(resource).expect("validated tree");
                let r = &self.resources[k];
                let j = r.party_index(party).expect("validated tree");
                let pos = layout
                    .iter()
                    .position(|&(kk, _)| kk == k)
                    .expect("scope checked");
                let input = r.input_alphabets()[j]
                    .index_of(*input)
                    .expect("validated tree");
                let mut kids = Vec::with_capacity(children.len());
                for (d, &o) in r.output_alphabets()[j].symbols().iter().enumerate() {
                    digits[pos] = d;
                    kids.push(self.compile_node(
                        p,
                        &children[&o],
                        layout,
                        radix,
                        alphabet,
                        digits,
                    )?);
                }
                digits[pos] = 0;
                Ok(Compiled::Internal {
                    slot: self.slot_offset[k] + j,
                    input,
                    children: kids,
                })
            }
        }
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn settings_alphabets(&self) -> &[Alphabet] {
        &self.settings
    }

    pub fn resources(&self) -> &[NonsignalingResource] {
        &self.resources
    }

    pub fn resource(&self, id: &str) -> Option<&NonsignalingResource> {
        self.resources.iter().find(|r| r.id() == id)
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree(&self, party: &str) -> Option<&DecisionTree> {
        self.trees.iter().find(|t| t.party() == party)
    }

    pub fn outcome_rules(&self) -> &[OutcomeRule] {
        &self.rules
    }

    pub fn outcome_alphabets(&self) -> &[Alphabet] {
        &self.outcome_alphabets
    }

    /// True when every resource passed the nonsignaling check.
    pub fn all_verified(&self) -> bool {
        self.resources.iter().all(NonsignalingResource::is_verified)
    }

    /// Settings tuples in mixed-radix order (last party fastest).
    pub fn settings_tuples(&self) -> Vec<Vec<u32>> {
        Radix::new(self.settings.iter().map(Alphabet::len).collect())
            .iter()
            .map(|d| {
                d.iter()
                    .zip(&self.settings)
                    .map(|(&i, a)| a.symbol(i))
                    .collect()
            })
            .collect()
    }

    fn settings_positions(&self, settings: &[u32]) -> Result<Vec<usize>, NetworkError> {
        if settings.len() != self.parties.len() {
            return Err(NetworkError::Arity {
                what: "settings",
                expected: self.parties.len(),
                found: settings.len(),
            });
        }
        settings
            .iter()
            .zip(&self.settings)
            .zip(&self.parties)
            .map(|((&s, a), p)| position(a, s, || format!("settings of `{p}`")))
            .collect()
    }

    /// Walks every tree for one output assignment; fills the input position
    /// for every slot and the outcome position for every party.
    fn trace_all(
        &self,
        settings: &[usize],
        digits: &[usize],
        inputs: &mut [usize],
        outcomes: &mut [usize],
    ) {
        for (p, roots) in self.compiled.iter().enumerate() {
            let mut node = &roots[settings[p]];
            loop {
                match node {
                    Compiled::Terminal { outcome } => {
                        outcomes[p] = *outcome;
                        break;
                    }
                    Compiled::Internal {
                        slot,
                        input,
                        children,
                    } => {
                        inputs[*slot] = *input;
                        node = &children[digits[*slot]];
                    }
                }
            }
        }
    }

    /// Product of resource entries for one traced assignment; `None` as soon
    /// as a factor vanishes.
    fn product(&self, digits: &[usize], inputs: &[usize]) -> Option<Rational> {
        let mut acc: Option<Rational> = None;
        for (k, r) in self.resources.iter().enumerate() {
            let off = self.slot_offset[k];
            let m = r.party_count();
            let x = r.input_radix().encode(&inputs[off..off + m]);
            let a = r.output_radix().encode(&digits[off..off + m]);
            let v = r.entry(x, a);
            if v.is_zero() {
                return None;
            }
            acc = Some(match acc {
                None => v.clone(),
                Some(p) => p * v,
            });
        }
        Some(acc.unwrap_or_else(Rational::one))
    }

    fn assignment_digits(
        &self,
        outputs: &BTreeMap<String, Vec<u32>>,
    ) -> Result<Vec<usize>, NetworkError> {
        let mut digits = vec![0usize; self.slots.len()];
        for (k, r) in self.resources.iter().enumerate() {
            let outs = outputs
                .get(r.id())
                .ok_or_else(|| NetworkError::SymbolOutOfRange {
                    what: format!("missing outputs for `{}`", r.id()),
                    symbol: 0,
                })?;
            if outs.len() != r.party_count() {
                return Err(NetworkError::Arity {
                    what: "outputs",
                    expected: r.party_count(),
                    found: outs.len(),
                });
            }
            for (j, &o) in outs.iter().enumerate() {
                digits[self.slot_offset[k] + j] = position(&r.output_alphabets()[j], o, || {
                    format!("outputs of `{}`", r.id())
                })?;
            }
        }
        Ok(digits)
    }

    /// Per-resource factors of the product rule for one assignment.
    /// `outputs` maps each resource id to its output symbols in the
    /// resource's party order.
    pub fn joint_factors(
        &self,
        settings: &[u32],
        outputs: &BTreeMap<String, Vec<u32>>,
    ) -> Result<Vec<Factor>, NetworkError> {
        let s = self.settings_positions(settings)?;
        let digits = self.assignment_digits(outputs)?;
        let mut inputs = vec![0usize; self.slots.len()];
        let mut outcomes = vec![0usize; self.parties.len()];
        self.trace_all(&s, &digits, &mut inputs, &mut outcomes);
        Ok(self
            .resources
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let off = self.slot_offset[k];
                let m = r.party_count();
                let xs: Vec<u32> = (0..m)
                    .map(|j| r.input_alphabets()[j].symbol(inputs[off + j]))
                    .collect();
                let value = r.get(&inputs[off..off + m], &digits[off..off + m]).clone();
                Factor {
                    resource: r.id().to_string(),
                    inputs: xs,
                    outputs: outputs[r.id()].clone(),
                    value,
                }
            })
            .collect())
    }

    /// Product rule for one full output assignment.
    pub fn joint_probability(
        &self,
        settings: &[u32],
        outputs: &BTreeMap<String, Vec<u32>>,
    ) -> Result<Rational, NetworkError> {
        Ok(self
            .joint_factors(settings, outputs)?
            .into_iter()
            .fold(Rational::one(), |acc, f| acc * f.value))
    }

    fn check_verified(&self, allow_unnormalized: bool) -> Result<(), NetworkError> {
        if allow_unnormalized {
            return Ok(());
        }
        match self.resources.iter().find(|r| !r.is_verified()) {
            Some(r) => Err(NetworkError::Unverified(r.id().to_string())),
            None => Ok(()),
        }
    }

    /// Full table over all output assignments. The sum must be exactly 1;
    /// with `allow_unnormalized` unverified resources are accepted and the
    /// sum is only reported.
    pub fn joint_distribution(
        &self,
        settings: &[u32],
        allow_unnormalized: bool,
    ) -> Result<JointDistribution, NetworkError> {
        self.check_verified(allow_unnormalized)?;
        let s = self.settings_positions(settings)?;
        let count = self.slot_radix.count();
        let table: Vec<Rational> = (0..count)
            .into_par_iter()
            .map_init(
                || {
                    (
                        vec![0usize; self.slots.len()],
                        vec![0usize; self.slots.len()],
                        vec![0usize; self.parties.len()],
                    )
                },
                |(digits, inputs, outcomes), idx| {
                    let mut i = idx;
                    self.slot_radix.decode_into(&mut i, digits);
                    self.trace_all(&s, digits, inputs, outcomes);
                    self.product(digits, inputs).unwrap_or_else(Rational::zero)
                },
            )
            .collect();
        let sum: Rational = table.iter().sum();
        if !allow_unnormalized && !sum.is_one() {
            return Err(NetworkError::NotNormalized {
                settings: settings.to_vec(),
                sum: format_rational(&sum),
            });
        }
        Ok(JointDistribution {
            settings: settings.to_vec(),
            resource_ids: self.resources.iter().map(|r| r.id().to_string()).collect(),
            outputs: self
                .resources
                .iter()
                .map(|r| r.output_alphabets().to_vec())
                .collect(),
            radix: self.slot_radix.clone(),
            table,
            sum,
        })
    }

    /// Outcome distribution for one settings tuple (mixed radix over the
    /// outcome alphabets), with the total mass of the joint distribution.
    fn behavior_column(&self, s: &[usize], out_radix: &Radix) -> Vec<Rational> {
        let mut col = vec![Rational::zero(); out_radix.count()];
        let mut digits = vec![0usize; self.slots.len()];
        let mut inputs = vec![0usize; self.slots.len()];
        let mut outcomes = vec![0usize; self.parties.len()];
        for idx in 0..self.slot_radix.count() {
            let mut i = idx;
            self.slot_radix.decode_into(&mut i, &mut digits);
            self.trace_all(s, &digits, &mut inputs, &mut outcomes);
            if let Some(p) = self.product(&digits, &inputs) {
                col[out_radix.encode(&outcomes)] += p;
            }
        }
        col
    }

    /// Behavior table without the nonsignaling check. Settings columns are
    /// computed in parallel and assembled in order.
    pub fn behavior_table(
        &self,
        allow_unnormalized: bool,
    ) -> Result<ConditionalTable<Rational>, NetworkError> {
        self.check_verified(allow_unnormalized)?;
        let in_radix = Radix::new(self.settings.iter().map(Alphabet::len).collect());
        let out_radix = Radix::new(self.outcome_alphabets.iter().map(Alphabet::len).collect());
        let columns: Vec<Vec<Rational>> = (0..in_radix.count())
            .into_par_iter()
            .map(|x| self.behavior_column(&in_radix.decode(x), &out_radix))
            .collect();
        if !allow_unnormalized {
            for (x, col) in columns.iter().enumerate() {
                let sum: Rational = col.iter().sum();
                if !sum.is_one() {
                    let settings = in_radix
                        .decode(x)
                        .iter()
                        .zip(&self.settings)
                        .map(|(&i, a)| a.symbol(i))
                        .collect();
                    return Err(NetworkError::NotNormalized {
                        settings,
                        sum: format_rational(&sum),
                    });
                }
            }
        }
        Ok(ConditionalTable::from_data(
            self.parties.clone(),
            self.settings.clone(),
            self.outcome_alphabets.clone(),
            columns.into_iter().flatten().collect(),
        )?)
    }

    /// Behavior over the network parties, checked to be nonsignaling.
    pub fn induced_behavior(&self) -> Result<Behavior, NetworkError> {
        let table = self.behavior_table(false)?;
        NonsignalingResource::from_table("behavior", table).map_err(|e| match e {
            ResourceError::Signaling(w) => NetworkError::Signaling(w),
            other => NetworkError::Resource(other),
        })
    }

    fn party_position(&self, party: &str) -> Result<usize, NetworkError> {
        self.parties
            .iter()
            .position(|p| p == party)
            .ok_or_else(|| NetworkError::Resource(ResourceError::UnknownParty(party.to_string())))
    }

    /// Network with `party` deleted and every resource it shares replaced by
    /// the marginal over the remaining members. Resources held by `party`
    /// alone disappear.
    pub fn without_party(&self, party: &str) -> Result<Network, NetworkError> {
        let p = self.party_position(party)?;
        if self.parties.len() < 2 {
            return Err(NetworkError::TooFewParties);
        }
        let mut resources = Vec::new();
        for r in &self.resources {
            match r.party_index(party) {
                None => resources.push(r.clone()),
                Some(_) if r.party_count() == 1 => {}
                Some(_) => {
                    let keep: Vec<&str> = r
                        .parties()
                        .iter()
                        .filter(|q| *q != party)
                        .map(String::as_str)
                        .collect();
                    resources.push(r.marginal(&keep)?);
                }
            }
        }
        Network::new(
            without(&self.parties, p),
            without(&self.settings, p),
            resources,
            without(&self.trees, p),
            without(&self.rules, p),
        )
    }

    /// Behavior of the remaining parties, computed by marginalizing the full
    /// behavior and, independently, from the network with `party` removed.
    /// The two must agree exactly.
    pub fn marginal_without_party(&self, party: &str) -> Result<Behavior, NetworkError> {
        self.party_position(party)?;
        if self.parties.len() < 2 {
            return Err(NetworkError::TooFewParties);
        }
        let full = self.induced_behavior()?;
        let keep: Vec<&str> = self
            .parties
            .iter()
            .filter(|q| *q != party)
            .map(String::as_str)
            .collect();
        let by_marginal = full.marginal(&keep)?;
        let by_reduction = self.without_party(party)?.induced_behavior()?;
        compare(
            "marginal without party",
            by_marginal.table(),
            by_reduction.table(),
        )?;
        Ok(by_reduction)
    }

    /// Disjoint union: parties, resources, trees and rules concatenated.
    pub fn union(&self, other: &Network) -> Result<Network, NetworkError> {
        for p in &other.parties {
            if self.parties.contains(p) {
                return Err(NetworkError::Overlap(p.clone()));
            }
        }
        for r in &other.resources {
            if self.resource(r.id()).is_some() {
                return Err(NetworkError::Overlap(r.id().to_string()));
            }
        }
        Network::new(
            cat(&self.parties, &other.parties),
            cat(&self.settings, &other.settings),
            cat(&self.resources, &other.resources),
            cat(&self.trees, &other.trees),
            cat(&self.rules, &other.rules),
        )
    }

    /// Checks that the union of two networks with nothing in common induces
    /// the product of their behaviors.
    pub fn check_disjoint_factorization(&self, other: &Network) -> Result<Behavior, NetworkError> {
        let joint = self.union(other)?.induced_behavior()?;
        let product = self
            .induced_behavior()?
            .table()
            .tensor(other.induced_behavior()?.table())?;
        compare("disjoint factorization", joint.table(), &product)?;
        Ok(joint)
    }

    /// Structural copy with every party and resource id suffixed.
    pub fn replicated(&self, suffix: &str) -> Result<Network, NetworkError> {
        let rename = |s: &str| format!("{s}{suffix}");
        let resources = self
            .resources
            .iter()
            .map(|r| {
                let names = r.parties().iter().map(|p| rename(p)).collect();
                Ok(r.renamed_parties(names)?.with_id(rename(r.id())))
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        let trees = self
            .trees
            .iter()
            .map(|t| t.renamed(&rename(t.party()), rename))
            .collect();
        Network::new(
            self.parties.iter().map(|p| rename(p)).collect(),
            self.settings.clone(),
            resources,
            trees,
            self.rules.clone(),
        )
    }

    /// Replication check: a renamed copy yields identical joint distributions
    /// and behavior, and running original and copy side by side leaves each
    /// one's behavior unchanged.
    pub fn check_replication(&self, suffix: &str) -> Result<(), NetworkError> {
        let copy = self.replicated(suffix)?;
        for s in self.settings_tuples() {
            let a = self.joint_distribution(&s, false)?;
            let b = copy.joint_distribution(&s, false)?;
            if let Some(i) = (0..a.len()).find(|&i| a.table[i] != b.table[i]) {
                return Err(NetworkError::Mismatch {
                    check: "replication",
                    inputs: s,
                    outputs: a.decode(i).concat(),
                    left: format_rational(&a.table[i]),
                    right: format_rational(&b.table[i]),
                });
            }
        }
        let original = self.induced_behavior()?;
        let copied = copy
            .induced_behavior()?
            .into_table()
            .with_parties(self.parties.clone())?;
        compare("replication", original.table(), &copied)?;
        let both = self.union(&copy)?.induced_behavior()?;
        let n = self.parties.len();
        let first: Vec<usize> = (0..n).collect();
        let second: Vec<usize> = (n..2 * n).collect();
        compare(
            "replication",
            original.table(),
            &both.table().marginal_first(&first)?,
        )?;
        compare(
            "replication",
            original.table(),
            &both
                .table()
                .marginal_first(&second)?
                .with_parties(self.parties.clone())?,
        )?;
        Ok(())
    }

    /// Equivalent network whose parties carry explicit terminal labels equal
    /// to the outcomes of the current rules, with the outcome alphabets
    /// pinned. Excising resources from such a network keeps outcomes intact.
    pub fn with_materialized_outcomes(&self) -> Result<Network, NetworkError> {
        let mut trees = Vec::with_capacity(self.parties.len());
        let mut rules = Vec::with_capacity(self.parties.len());
        for p in 0..self.parties.len() {
            let layout = self.transcript_layout(p);
            let radix = self.transcript_radix(p);
            let alphabet = self.outcome_alphabets[p].clone();
            let rule = self.rules[p].clone();
            let ids: Vec<String> = layout
                .iter()
                .map(|&(k, _)| self.resources[k].id().to_string())
                .collect();
            let t = self.trees[p].relabel_terminals(|_, history| {
                let mut transcript = vec![0u32; layout.len()];
                for (id, o) in history {
                    let pos = ids.iter().position(|k| k == id).expect("scope checked");
                    transcript[pos] = *o;
                }
                match &rule {
                    OutcomeRule::Transcript => {
                        let d: Vec<usize> = layout
                            .iter()
                            .zip(&transcript)
                            .map(|(&(k, j), &o)| {
                                self.resources[k].output_alphabets()[j]
                                    .index_of(o)
                                    .expect("valid output")
                            })
                            .collect();
                        Some(alphabet.symbol(radix.encode(&d)))
                    }
                    OutcomeRule::Bins { map, .. } => map.get(&transcript).copied(),
                    OutcomeRule::Labels { .. } => None,
                }
            });
            match &self.rules[p] {
                OutcomeRule::Labels { .. } => trees.push(self.trees[p].clone()),
                _ => trees.push(t),
            }
            rules.push(OutcomeRule::Labels {
                alphabet: Some(alphabet),
            });
        }
        Network::new(
            self.parties.clone(),
            self.settings.clone(),
            self.resources.clone(),
            trees,
            rules,
        )
    }

    /// Replaces a resource by another with the same id and signature.
    pub fn with_resource(
        &self,
        replacement: NonsignalingResource,
    ) -> Result<Network, NetworkError> {
        let k = self.resource_index(replacement.id()).ok_or_else(|| {
            NetworkError::Resource(ResourceError::UnknownParty(replacement.id().to_string()))
        })?;
        if !self.resources[k].same_signature(replacement.table()) {
            return Err(NetworkError::Resource(ResourceError::SignatureMismatch));
        }
        let mut resources = self.resources.clone();
        resources[k] = replacement;
        Network::new(
            self.parties.clone(),
            self.settings.clone(),
            resources,
            self.trees.clone(),
            self.rules.clone(),
        )
    }

    /// Removes resource `id`, excising it from every member's tree. For each
    /// member party, `select(party, input)` gives the output that party sees.
    /// Outcomes should be materialized first if they depend on transcripts.
    pub fn excise_resource(
        &self,
        id: &str,
        select: impl Fn(&str, u32) -> u32,
    ) -> Result<Network, NetworkError> {
        let k = self
            .resource_index(id)
            .ok_or_else(|| NetworkError::Resource(ResourceError::UnknownParty(id.to_string())))?;
        let r = &self.resources[k];
        let mut trees = self.trees.clone();
        for t in trees.iter_mut() {
            if r.party_index(t.party()).is_some() {
                let party = t.party().to_string();
                *t = t.excise(id, |x| select(&party, x))?;
            }
        }
        let mut resources = self.resources.clone();
        resources.remove(k);
        Network::new(
            self.parties.clone(),
            self.settings.clone(),
            resources,
            trees,
            self.rules.clone(),
        )
    }
}

fn without<T: Clone>(v: &[T], skip: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, x)| x.clone())
        .collect()
}

fn cat<T: Clone>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().chain(b).cloned().collect()
}

/// Exact comparison of two tables with one signature.
pub fn compare(
    check: &'static str,
    left: &ConditionalTable<Rational>,
    right: &ConditionalTable<Rational>,
) -> Result<(), NetworkError> {
    if !left.same_signature(right) {
        return Err(NetworkError::Resource(ResourceError::SignatureMismatch));
    }
    for x in 0..left.input_count() {
        for a in 0..left.output_count() {
            if left.entry(x, a) != right.entry(x, a) {
                return Err(NetworkError::Mismatch {
                    check,
                    inputs: left.input_symbols(x),
                    outputs: left.output_symbols(a),
                    left: format_rational(left.entry(x, a)),
                    right: format_rational(right.entry(x, a)),
                });
            }
        }
    }
    Ok(())
}
