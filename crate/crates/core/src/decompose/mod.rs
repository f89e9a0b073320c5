//! Convex decompositions of resources and networks.
//!
//! Resources are split over vertex sets with an exact LP; networks are split
//! by factoring out input-free resources or by replacing every resource with
//! its decomposition. Every result is checked against the original by exact
//! comparison before it is returned.

pub mod lp;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::index::Radix;
use crate::network::{compare, Network, NetworkError};
use crate::rational::{format_rational, Rational};
use crate::resource::{
    make_local_deterministic, make_pr_class_box, Alphabet, ConditionalTable, NonsignalingResource,
    ResourceError,
};

use lp::LpOutcome;

/// Default bound on the number of enumerated vertices.
pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("vertex {0} has a different signature from vertex 0")]
    VertexSignature(usize),
    #[error("vertex {0} has not passed the nonsignaling check")]
    UnverifiedVertex(usize),
    #[error("vertices {0} and {1} are equal")]
    DuplicateVertex(usize, usize),
    #[error("{count} vertices exceed the cap of {cap}")]
    CapExceeded { count: String, cap: usize },
    #[error("resource and vertex set have different signatures")]
    SignatureMismatch,
    #[error("mixture weights must be positive and sum to 1, got sum {0}")]
    BadWeights(String),
    #[error("resource `{0}` is not in the convex hull of its vertex set")]
    NotDecomposable(String),
    #[error("vertex sets given for resources not in the network: {0:?}")]
    UnknownResource(Vec<String>),
    #[error("LP result failed verification")]
    Unverified,
}

/// Convex combination with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    components: Vec<(Rational, T)>,
}

impl<T> Mixture<T> {
    /// Drops zero-weight components; rejects negative weights and sums other
    /// than one.
    pub fn new(components: Vec<(Rational, T)>) -> Result<Self, DecomposeError> {
        let total: Rational = components.iter().map(|(w, _)| w.clone()).sum();
        if components.iter().any(|(w, _)| w.is_negative()) || !total.is_one() {
            return Err(DecomposeError::BadWeights(format_rational(&total)));
        }
        Ok(Self {
            components: components
                .into_iter()
                .filter(|(w, _)| !w.is_zero())
                .collect(),
        })
    }

    pub fn singleton(item: T) -> Self {
        Self {
            components: vec![(Rational::one(), item)],
        }
    }

    pub fn components(&self) -> &[(Rational, T)] {
        &self.components
    }

    pub fn into_components(self) -> Vec<(Rational, T)> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Mixture<U> {
        Mixture {
            components: self
                .components
                .into_iter()
                .map(|(w, t)| (w, f(t)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Deterministic,
    PrClass,
    External,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Deterministic => "deterministic",
            Provenance::PrClass => "pr-class",
            Provenance::External => "external",
        }
    }
}

/// Validated list of candidate extremal points sharing one signature.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    vertices: Vec<NonsignalingResource>,
    provenance: Vec<Provenance>,
}

impl VertexSet {
    pub fn new(
        vertices: Vec<NonsignalingResource>,
        provenance: Vec<Provenance>,
    ) -> Result<Self, DecomposeError> {
        assert_eq!(
            vertices.len(),
            provenance.len(),
            "one provenance tag per vertex"
        );
        let first = vertices.first().ok_or(DecomposeError::EmptyVertexSet)?;
        let mut seen: HashMap<&[Rational], usize> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if !v.same_signature(first.table()) {
                return Err(DecomposeError::VertexSignature(i));
            }
            if !v.is_verified() {
                return Err(DecomposeError::UnverifiedVertex(i));
            }
            if let Some(&j) = seen.get(v.data()) {
                return Err(DecomposeError::DuplicateVertex(j, i));
            }
            seen.insert(v.data(), i);
        }
        Ok(Self {
            vertices,
            provenance,
        })
    }

    pub fn vertices(&self) -> &[NonsignalingResource] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &NonsignalingResource {
        &self.vertices[i]
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        self.provenance[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Signature shared by all vertices.
    pub fn signature(&self) -> &ConditionalTable<Rational> {
        self.vertices[0].table()
    }

    /// Same vertices over renamed parties.
    pub fn renamed_parties(&self, names: &[String]) -> Result<Self, DecomposeError> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.renamed_parties(names.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            vertices,
            provenance: self.provenance.clone(),
        })
    }

    /// Vertices of `self` followed by those of `other` not already present.
    pub fn extended(&self, other: &VertexSet) -> Result<Self, DecomposeError> {
        let mut vertices = self.vertices.clone();
        let mut provenance = self.provenance.clone();
        for (v, p) in other.vertices.iter().zip(&other.provenance) {
            if !vertices.iter().any(|w| w.data() == v.data()) {
                vertices.push(v.clone());
                provenance.push(*p);
            }
        }
        Self::new(vertices, provenance)
    }
}

/// Number of local deterministic vertices, `prod_p |out_p|^|in_p|`.
pub fn local_vertex_count(inputs: &[Alphabet], outputs: &[Alphabet]) -> BigUint {
    inputs
        .iter()
        .zip(outputs)
        .map(|(i, o)| BigUint::from(o.len()).pow(i.len() as u32))
        .product()
}

/// All products of per-party functions from inputs to outputs.
pub fn local_deterministic_vertices(
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
    cap: usize,
) -> Result<VertexSet, DecomposeError> {
    if inputs.len() != parties.len() || outputs.len() != parties.len() {
        return Err(
            ResourceError::Shape("one input and one output alphabet per party".into()).into(),
        );
    }
    let count = local_vertex_count(inputs, outputs);
    if count > BigUint::from(cap) {
        return Err(DecomposeError::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    // Per party: every function as a digit vector over its input positions.
    let functions: Vec<Radix> = inputs
        .iter()
        .zip(outputs)
        .map(|(i, o)| Radix::new(vec![o.len(); i.len()]))
        .collect();
    let choice = Radix::new(functions.iter().map(Radix::count).collect());
    let mut vertices = Vec::with_capacity(choice.count());
    for (k, c) in choice.iter().enumerate() {
        let maps: Vec<BTreeMap<u32, u32>> = (0..parties.len())
            .map(|p| {
                let f = functions[p].decode(c[p]);
                inputs[p]
                    .symbols()
                    .iter()
                    .zip(&f)
                    .map(|(&x, &a)| (x, outputs[p].symbol(a)))
                    .collect()
            })
            .collect();
        vertices.push(make_local_deterministic(
            format!("D{k}"),
            parties,
            inputs,
            outputs,
            &maps,
        )?);
    }
    assert_eq!(BigUint::from(vertices.len()), count);
    let provenance = vec![Provenance::Deterministic; vertices.len()];
    VertexSet::new(vertices, provenance)
}

/// The 24 vertices of the bipartite binary nonsignaling polytope on parties
/// `A`, `B`: 16 deterministic boxes and 8 PR-class boxes. Each PR-class box
/// is checked to lie outside the hull of the other 23.
pub fn ns_vertices_222() -> VertexSet {
    let bin = Alphabet::range(2);
    let two = [bin.clone(), bin];
    let det = local_deterministic_vertices(&["A", "B"], &two, &two, 16).expect("16 vertices");
    let mut vertices = det.vertices;
    let mut provenance = det.provenance;
    for alpha in 0..2u8 {
        for beta in 0..2u8 {
            for gamma in 0..2u8 {
                vertices.push(make_pr_class_box(
                    format!("PR{alpha}{beta}{gamma}"),
                    ["A", "B"],
                    alpha,
                    beta,
                    gamma,
                ));
                provenance.push(Provenance::PrClass);
            }
        }
    }
    let set = VertexSet::new(vertices, provenance).expect("distinct nonsignaling vertices");
    for i in 16..24 {
        let rest: Vec<usize> = (0..24).filter(|&j| j != i).collect();
        let others = VertexSet {
            vertices: rest.iter().map(|&j| set.vertices[j].clone()).collect(),
            provenance: rest.iter().map(|&j| set.provenance[j]).collect(),
        };
        let d = decompose_extremal(&set.vertices[i], &others).expect("matching signatures");
        assert!(
            !d.is_feasible(),
            "PR-class box {i} lies in the hull of the others"
        );
    }
    set
}

/// Linear functional `f(q) = sum c(a|x) q(a|x)` with `f(v) <= bound` on every
/// vertex and `f(r) = value > bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingFunctional {
    pub coefficients: ConditionalTable<Rational>,
    pub bound: Rational,
    pub value: Rational,
}

impl SeparatingFunctional {
    pub fn apply(&self, q: &ConditionalTable<Rational>) -> Rational {
        apply(&self.coefficients, q)
    }
}

fn apply(c: &ConditionalTable<Rational>, q: &ConditionalTable<Rational>) -> Rational {
    c.data()
        .iter()
        .zip(q.data())
        .filter(|(u, v)| !u.is_zero() && !v.is_zero())
        .map(|(u, v)| u * v)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    /// Weights over vertex indices.
    Mixture(Mixture<usize>),
    Infeasible(SeparatingFunctional),
}

impl Decomposition {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Decomposition::Mixture(_))
    }

    pub fn mixture(&self) -> Option<&Mixture<usize>> {
        match self {
            Decomposition::Mixture(m) => Some(m),
            Decomposition::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&SeparatingFunctional> {
        match self {
            Decomposition::Mixture(_) => None,
            Decomposition::Infeasible(c) => Some(c),
        }
    }
}

/// Solves `r = sum_i p_i V_i`, `p >= 0`, `sum p_i = 1` exactly. Returns the
/// first basic feasible solution found or a separating functional; either is
/// verified before it is returned.
pub fn decompose_extremal(
    r: &NonsignalingResource,
    vs: &VertexSet,
) -> Result<Decomposition, DecomposeError> {
    if !r.same_signature(vs.signature()) {
        return Err(DecomposeError::SignatureMismatch);
    }
    let entries = r.data().len();
    let mut a: Vec<Vec<Rational>> = (0..entries)
        .map(|e| vs.vertices.iter().map(|v| v.data()[e].clone()).collect())
        .collect();
    a.push(vec![Rational::one(); vs.len()]);
    let mut b: Vec<Rational> = r.data().to_vec();
    b.push(Rational::one());
    let outcome = lp::feasibility(&a, &b);
    if !lp::verify(&a, &b, &outcome) {
        return Err(DecomposeError::Unverified);
    }
    match outcome {
        LpOutcome::Feasible(p) => {
            let mix = Mixture::new(p.into_iter().enumerate().map(|(i, w)| (w, i)).collect())?;
            let rebuilt = ConditionalTable::linear_combination(
                mix.components()
                    .iter()
                    .map(|(w, i)| (w.clone(), vs.vertices[*i].table())),
            )?;
            if rebuilt.data() != r.data() {
                return Err(DecomposeError::Unverified);
            }
            Ok(Decomposition::Mixture(mix))
        }
        LpOutcome::Infeasible { mut y } => {
            let y0 = y.pop().expect("normalization row");
            let coefficients = ConditionalTable::from_data(
                r.parties().to_vec(),
                r.input_alphabets().to_vec(),
                r.output_alphabets().to_vec(),
                y,
            )?;
            let cert = SeparatingFunctional {
                bound: -y0,
                value: apply(&coefficients, r.table()),
                coefficients,
            };
            let separated = cert.value > cert.bound
                && vs
                    .vertices
                    .iter()
                    .all(|v| cert.apply(v.table()) <= cert.bound);
            if !separated {
                return Err(DecomposeError::Unverified);
            }
            Ok(Decomposition::Infeasible(cert))
        }
    }
}

/// Result of a local-polytope membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct Locality {
    pub vertices: VertexSet,
    pub decomposition: Decomposition,
}

impl Locality {
    pub fn is_local(&self) -> bool {
        self.decomposition.is_feasible()
    }
}

/// Membership of `r` in the local polytope of its signature.
pub fn is_local(r: &NonsignalingResource, cap: usize) -> Result<Locality, DecomposeError> {
    let parties: Vec<&str> = r.parties().iter().map(String::as_str).collect();
    let vertices =
        local_deterministic_vertices(&parties, r.input_alphabets(), r.output_alphabets(), cap)?;
    let decomposition = decompose_extremal(r, &vertices)?;
    Ok(Locality {
        vertices,
        decomposition,
    })
}

/// Exact check that the mixture of induced behaviors equals the behavior of
/// `net`.
pub fn check_mixture_behavior(
    check: &'static str,
    net: &Network,
    mixture: &Mixture<Network>,
) -> Result<(), DecomposeError> {
    let whole = net.behavior_table(false)?;
    let parts = mixture
        .components()
        .par_iter()
        .map(|(_, n)| n.behavior_table(false))
        .collect::<Result<Vec<_>, _>>()?;
    let sum = ConditionalTable::linear_combination(
        mixture
            .components()
            .iter()
            .zip(&parts)
            .map(|((w, _), t)| (w.clone(), t)),
    )?;
    compare(check, &whole, &sum)?;
    Ok(())
}

/// Splits `net` over the joint outcomes `lambda` of its input-free
/// resources: each component removes those resources, every member party
/// proceeding as if it had seen its share of `lambda`.
pub fn factor_out_shared_randomness(net: &Network) -> Result<Mixture<Network>, DecomposeError> {
    let free: Vec<&NonsignalingResource> = net
        .resources()
        .iter()
        .filter(|r| r.is_input_free())
        .collect();
    if free.is_empty() {
        return Ok(Mixture::singleton(net.clone()));
    }
    let base = net.with_materialized_outcomes()?;
    // Combined product distribution over the outputs of all free resources.
    let mut combined: Vec<(Rational, Vec<Vec<u32>>)> = vec![(Rational::one(), Vec::new())];
    for r in &free {
        let mut next = Vec::new();
        for (w, lambda) in &combined {
            for a in 0..r.output_count() {
                let p = r.entry(0, a);
                if !p.is_zero() {
                    let mut l = lambda.clone();
                    l.push(r.output_symbols(a));
                    next.push((w * p, l));
                }
            }
        }
        combined = next;
    }
    let components = combined
        .into_par_iter()
        .map(|(w, lambda)| {
            let mut n = base.clone();
            for (r, outs) in free.iter().zip(&lambda) {
                n = n.excise_resource(r.id(), |party, _| {
                    outs[r.party_index(party).expect("member")]
                })?;
            }
            Ok((w, n))
        })
        .collect::<Result<Vec<_>, NetworkError>>()?;
    let mix = Mixture::new(components)?;
    check_mixture_behavior("shared-randomness factoring", net, &mix)?;
    Ok(mix)
}

/// Replaces every resource that has a vertex set by its decomposition,
/// giving a mixture of networks whose resources are all vertices. With
/// `excise_deterministic`, local deterministic resources are then cut out of
/// the trees. Resources without a vertex set are kept as they are.
pub fn expand_to_extremal_mixture(
    net: &Network,
    vertex_sets: &BTreeMap<String, VertexSet>,
    excise_deterministic: bool,
) -> Result<Mixture<Network>, DecomposeError> {
    let unknown: Vec<String> = vertex_sets
        .keys()
        .filter(|k| net.resource(k).is_none())
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(DecomposeError::UnknownResource(unknown));
    }
    let base = if excise_deterministic {
        net.with_materialized_outcomes()?
    } else {
        net.clone()
    };
    let mut parts: Vec<(Rational, Network)> = vec![(Rational::one(), base)];
    for r in net.resources() {
        let Some(vs) = vertex_sets.get(r.id()) else {
            continue;
        };
        let mix = match decompose_extremal(r, vs)? {
            Decomposition::Mixture(m) => m,
            Decomposition::Infeasible(_) => {
                return Err(DecomposeError::NotDecomposable(r.id().to_string()))
            }
        };
        let mut next = Vec::with_capacity(parts.len() * mix.len());
        for (w, n) in &parts {
            for (u, i) in mix.components() {
                next.push((
                    w * u,
                    n.with_resource(vs.vertex(*i).clone().with_id(r.id()))?,
                ));
            }
        }
        parts = next;
    }
    let expanded = Mixture::new(parts)?;
    check_mixture_behavior("extremal expansion", net, &expanded)?;
    if !excise_deterministic {
        return Ok(expanded);
    }
    let excised = Mixture::new(
        expanded
            .into_components()
            .into_par_iter()
            .map(|(w, n)| Ok((w, excise_local_deterministic(&n)?)))
            .collect::<Result<Vec<_>, NetworkError>>()?,
    )?;
    check_mixture_behavior("deterministic excision", net, &excised)?;
    Ok(excised)
}

/// Removes every local deterministic resource, each member party using the
/// output its function assigns to the input it would have supplied.
pub fn excise_local_deterministic(net: &Network) -> Result<Network, NetworkError> {
    let mut n = net.clone();
    for r in net.resources() {
        if let Some(funcs) = r.as_local_deterministic() {
            n = n.excise_resource(r.id(), |party, x| {
                let j = r.party_index(party).expect("member");
                let xi = r.input_alphabets()[j].index_of(x).expect("valid input");
                r.output_alphabets()[j].symbol(funcs[j][xi])
            })?;
        }
    }
    Ok(n)
}
