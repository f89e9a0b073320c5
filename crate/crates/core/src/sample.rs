//! Seeded random resources and networks for property tests and the
//! acceptance suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::decompose::{local_deterministic_vertices, DecomposeError, Provenance, VertexSet};
use crate::index::Radix;
use crate::network::{Network, OutcomeRule};
use crate::rational::{ratio, Rational};
use crate::resource::{
    make_local_deterministic, make_modular_box, make_pr_class_box, make_shared_randomness,
    Alphabet, NonsignalingResource,
};
use crate::wiring::DecisionTree;

const PARTY_NAMES: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Debug, Clone)]
pub struct NetworkParams {
    pub max_parties: usize,
    pub max_resources: usize,
    pub max_alphabet: usize,
    /// Upper bound on (output assignments) x (settings tuples).
    pub max_work: usize,
    /// Probability that a party bins its transcripts.
    pub bin_probability: f64,
    /// Probability that a resource is input-free.
    pub input_free_probability: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            max_parties: 3,
            max_resources: 3,
            max_alphabet: 3,
            max_work: 4096,
            bin_probability: 0.5,
            input_free_probability: 0.25,
        }
    }
}

/// Random deterministic resource.
pub fn random_deterministic<R: Rng>(
    rng: &mut R,
    id: &str,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
) -> NonsignalingResource {
    let functions: Vec<BTreeMap<u32, u32>> = inputs
        .iter()
        .zip(outputs)
        .map(|(i, o)| {
            i.symbols()
                .iter()
                .map(|&x| (x, *o.symbols().choose(rng).expect("non-empty")))
                .collect()
        })
        .collect();
    make_local_deterministic(id, parties, inputs, outputs, &functions).expect("total functions")
}

/// Random PR-type box: uniform over outputs summing to a random function of
/// the inputs modulo the smallest output alphabet size.
pub fn random_modular<R: Rng>(
    rng: &mut R,
    id: &str,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
) -> NonsignalingResource {
    let radix = Radix::new(inputs.iter().map(Alphabet::len).collect());
    let f: Vec<usize> = (0..radix.count()).map(|_| rng.gen_range(0..3)).collect();
    make_modular_box(id, parties, inputs, outputs, |x| f[radix.encode(x)])
        .expect("modular boxes are nonsignaling")
}

/// Random mixture of one to three deterministic or PR-type components with
/// random positive rational weights.
pub fn random_resource<R: Rng>(
    rng: &mut R,
    id: &str,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
) -> NonsignalingResource {
    random_resource_with_components(rng, id, parties, inputs, outputs).0
}

/// [`random_resource`] together with the components it mixes.
pub fn random_resource_with_components<R: Rng>(
    rng: &mut R,
    id: &str,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
) -> (NonsignalingResource, Vec<NonsignalingResource>) {
    let k = rng.gen_range(1..=3);
    let comps: Vec<NonsignalingResource> = (0..k)
        .map(|_| {
            if rng.gen_bool(0.5) {
                random_deterministic(rng, id, parties, inputs, outputs)
            } else {
                random_modular(rng, id, parties, inputs, outputs)
            }
        })
        .collect();
    let w: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = w.iter().sum();
    let weighted: Vec<(Rational, &NonsignalingResource)> = w
        .iter()
        .zip(&comps)
        .map(|(&wi, c)| (ratio(wi, total), c))
        .collect();
    let r = NonsignalingResource::mixture(id, &weighted).expect("valid mixture");
    (r, comps)
}

fn random_alphabets<R: Rng>(rng: &mut R, n: usize, max: usize) -> Vec<Alphabet> {
    (0..n)
        .map(|_| Alphabet::range(rng.gen_range(1..=max)))
        .collect()
}

/// Random nonsignaling resource over `n` parties named A, B, ...
pub fn random_nonsignaling<R: Rng>(
    rng: &mut R,
    n: usize,
    max_alphabet: usize,
) -> NonsignalingResource {
    let parties = &PARTY_NAMES[..n];
    let ins = random_alphabets(rng, n, max_alphabet);
    let outs = random_alphabets(rng, n, max_alphabet);
    random_resource(rng, "R", parties, &ins, &outs)
}

/// Random adaptive tree: at each node a random unused resource with a
/// random input.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    party: &str,
    settings: &Alphabet,
    resources: &[&NonsignalingResource],
    label: impl FnMut(u32, &[(String, u32)]) -> Option<u32>,
) -> DecisionTree {
    DecisionTree::build(
        party,
        settings,
        resources,
        |_, h| {
            let unused: Vec<&&NonsignalingResource> = resources
                .iter()
                .filter(|r| !h.iter().any(|(k, _)| k == r.id()))
                .collect();
            let r = unused.choose(rng).expect("a resource is left");
            let j = r.party_index(party).expect("member");
            let x = *r.input_alphabets()[j]
                .symbols()
                .choose(rng)
                .expect("non-empty");
            (r.id().to_string(), x)
        },
        label,
    )
    .expect("random trees are valid by construction")
}

/// Random total map from the party's transcripts to outcomes.
pub fn random_bins<R: Rng>(
    rng: &mut R,
    party: &str,
    resources: &[&NonsignalingResource],
) -> OutcomeRule {
    let mut scope: Vec<&&NonsignalingResource> = resources.iter().collect();
    scope.sort_by(|a, b| a.id().cmp(b.id()));
    let alphas: Vec<&Alphabet> = scope
        .iter()
        .map(|r| &r.output_alphabets()[r.party_index(party).expect("member")])
        .collect();
    let radix = Radix::new(alphas.iter().map(|a| a.len()).collect());
    let k = rng.gen_range(1..=3);
    let map = radix
        .iter()
        .map(|d| {
            let t: Vec<u32> = d.iter().zip(&alphas).map(|(&i, a)| a.symbol(i)).collect();
            (t, rng.gen_range(0..k as u32))
        })
        .collect();
    OutcomeRule::Bins {
        alphabet: Some(Alphabet::range(k)),
        map,
    }
}

fn work(resources: &[NonsignalingResource], settings: &[Alphabet]) -> usize {
    let outs: usize = resources
        .iter()
        .map(|r| {
            r.output_alphabets()
                .iter()
                .map(Alphabet::len)
                .product::<usize>()
        })
        .product();
    outs * settings.iter().map(Alphabet::len).product::<usize>()
}

/// Random network: 1..=max_parties parties, 1..=max_resources resources on
/// random non-empty member sets, random adaptive trees, transcript or random
/// binned outcomes. Resamples until the enumeration cost is within budget.
pub fn random_network<R: Rng>(rng: &mut R, params: &NetworkParams) -> Network {
    random_network_with_components(rng, params).0
}

/// [`random_network`] together with the mixture components of each resource,
/// in resource order.
pub fn random_network_with_components<R: Rng>(
    rng: &mut R,
    params: &NetworkParams,
) -> (Network, Vec<Vec<NonsignalingResource>>) {
    loop {
        let n = rng.gen_range(1..=params.max_parties);
        let parties = &PARTY_NAMES[..n];
        let m = rng.gen_range(1..=params.max_resources);
        let settings = random_alphabets(rng, n, params.max_alphabet);
        let mut resources = Vec::with_capacity(m);
        let mut components = Vec::with_capacity(m);
        for k in 0..m {
            let mut members: Vec<&str> = parties
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.6))
                .collect();
            if members.is_empty() {
                members.push(parties.choose(rng).expect("non-empty"));
            }
            let ins = if rng.gen_bool(params.input_free_probability) {
                vec![Alphabet::range(1); members.len()]
            } else {
                random_alphabets(rng, members.len(), params.max_alphabet)
            };
            let outs = random_alphabets(rng, members.len(), params.max_alphabet);
            let (r, c) =
                random_resource_with_components(rng, &format!("R{}", k + 1), &members, &ins, &outs);
            resources.push(r);
            components.push(c);
        }
        if work(&resources, &settings) > params.max_work {
            continue;
        }
        let mut trees = Vec::with_capacity(n);
        let mut rules = Vec::with_capacity(n);
        for (i, p) in parties.iter().enumerate() {
            let scope: Vec<&NonsignalingResource> = resources
                .iter()
                .filter(|r| r.party_index(p).is_some())
                .collect();
            trees.push(random_tree(rng, p, &settings[i], &scope, |_, _| None));
            rules.push(if rng.gen_bool(params.bin_probability) {
                random_bins(rng, p, &scope)
            } else {
                OutcomeRule::Transcript
            });
        }
        let net = Network::new(
            parties.iter().map(|s| s.to_string()).collect(),
            settings,
            resources,
            trees,
            rules,
        )
        .expect("random networks are valid by construction");
        return (net, components);
    }
}

/// Pair of random networks with disjoint parties and resource ids.
pub fn random_disjoint_pair<R: Rng>(rng: &mut R, params: &NetworkParams) -> (Network, Network) {
    let small = NetworkParams {
        max_parties: 2,
        max_resources: 2,
        max_work: (params.max_work as f64).sqrt() as usize,
        ..params.clone()
    };
    let a = random_network(rng, &small);
    let b = random_network(rng, &small)
        .replicated("'")
        .expect("renaming keeps validity");
    (a, b)
}

/// Tripartite network of bipartite resources (PR-class boxes, noisy
/// PR-class boxes or deterministic boxes, one per random pair) plus a shared
/// random variable, with random adaptive trees and random binary outcomes.
pub fn random_bipartite_network<R: Rng>(rng: &mut R) -> Network {
    let parties = ["A", "B", "C"];
    let bin = Alphabet::range(2);
    let pairs = [["A", "B"], ["B", "C"], ["A", "C"]];
    let mut resources = Vec::new();
    let lambda = rng.gen_range(1..=3usize);
    let mut dist = BTreeMap::new();
    let radix = Radix::new(vec![lambda; 3]);
    let mut w: Vec<i64> = (0..radix.count()).map(|_| rng.gen_range(0..=3)).collect();
    if w.iter().all(|&v| v == 0) {
        w[0] = 1;
    }
    let total: i64 = w.iter().sum();
    for (d, &wi) in radix.iter().zip(&w) {
        if wi > 0 {
            dist.insert(d.iter().map(|&v| v as u32).collect(), ratio(wi, total));
        }
    }
    let shared_outputs = vec![Alphabet::range(lambda); 3];
    resources.push(
        make_shared_randomness("lambda", &parties, &shared_outputs, &dist).expect("normalized"),
    );
    let count = rng.gen_range(1..=3);
    for k in 0..count {
        let pair = pairs[rng.gen_range(0..3)];
        let id = format!("S{}", k + 1);
        let r = match rng.gen_range(0..4) {
            0 => random_deterministic(
                rng,
                &id,
                &pair,
                &[bin.clone(), bin.clone()],
                &[bin.clone(), bin.clone()],
            ),
            1 => {
                let pr = make_pr_class_box(
                    &id,
                    pair,
                    rng.gen_range(0..2),
                    rng.gen_range(0..2),
                    rng.gen_range(0..2),
                );
                let det = random_deterministic(
                    rng,
                    &id,
                    &pair,
                    &[bin.clone(), bin.clone()],
                    &[bin.clone(), bin.clone()],
                );
                let v = ratio(rng.gen_range(0..=4), 4);
                let u = Rational::from_integer(1.into()) - &v;
                NonsignalingResource::mixture(id.as_str(), &[(v, &pr), (u, &det)])
                    .expect("valid mixture")
            }
            _ => make_pr_class_box(
                &id,
                pair,
                rng.gen_range(0..2),
                rng.gen_range(0..2),
                rng.gen_range(0..2),
            ),
        };
        resources.push(r);
    }
    let mut trees = Vec::new();
    for p in parties {
        let scope: Vec<&NonsignalingResource> = resources
            .iter()
            .filter(|r| r.party_index(p).is_some())
            .collect();
        let t = random_tree(rng, p, &bin, &scope, |_, _| None)
            .relabel_terminals(|_, _| Some(rng.gen_range(0..2)));
        trees.push(t);
    }
    Network::new(
        parties.iter().map(|s| s.to_string()).collect(),
        vec![bin.clone(), bin.clone(), bin.clone()],
        resources,
        trees,
        vec![
            OutcomeRule::Labels {
                alphabet: Some(bin)
            };
            3
        ],
    )
    .expect("valid by construction")
}

/// Vertex sets for the resources of a network drawn by
/// [`random_network_with_components`]: the local deterministic vertices of
/// each signature plus the non-deterministic components.
pub fn component_vertex_sets(
    net: &Network,
    components: &[Vec<NonsignalingResource>],
    cap: usize,
) -> Result<BTreeMap<String, VertexSet>, DecomposeError> {
    let mut out = BTreeMap::new();
    for (r, comps) in net.resources().iter().zip(components) {
        let parties: Vec<&str> = r.parties().iter().map(String::as_str).collect();
        let local =
            local_deterministic_vertices(&parties, r.input_alphabets(), r.output_alphabets(), cap)?;
        let mut extra: Vec<NonsignalingResource> = Vec::new();
        for c in comps {
            if !extra.iter().any(|e| e.data() == c.data()) {
                extra.push(c.clone());
            }
        }
        let n = extra.len();
        let vs = local.extended(&VertexSet::new(extra, vec![Provenance::External; n])?)?;
        out.insert(r.id().to_string(), vs);
    }
    Ok(out)
}
