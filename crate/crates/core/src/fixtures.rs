//! Hand-built networks used by the tests, the acceptance suite and the
//! shipped scenario files.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::network::{Network, OutcomeRule};
use crate::rational::{ratio, Rational};
use crate::resource::{
    make_modular_box, make_pr_class_box, make_shared_randomness, Alphabet, ConditionalTable,
    NonsignalingResource,
};
use crate::wiring::{DecisionTree, Node};

fn bin() -> Alphabet {
    Alphabet::range(2)
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Tripartite box on A, B, C: outputs uniform over `a+b+c = xyz (mod 2)`.
pub fn fig2_r1() -> NonsignalingResource {
    make_modular_box(
        "R1",
        &["A", "B", "C"],
        &[bin(), bin(), bin()],
        &[bin(), bin(), bin()],
        |x| x[0] * x[1] * x[2],
    )
    .expect("modular boxes are nonsignaling")
}

/// Bipartite box on A (ternary output) and C (binary output): with
/// probability 1/2 a PR box with A's output in {0, 1}, otherwise A outputs 2
/// and C a uniform bit.
pub fn fig2_r2() -> NonsignalingResource {
    let quarter = ratio(1, 4);
    let table = ConditionalTable::from_fn(
        names(&["A", "C"]),
        vec![bin(), bin()],
        vec![Alphabet::range(3), bin()],
        |x, a| match a[0] {
            2 => quarter.clone(),
            _ if (a[0] ^ a[1]) == (x[0] & x[1]) => quarter.clone(),
            _ => Rational::zero(),
        },
    )
    .expect("fixed shape");
    NonsignalingResource::from_table("R2", table).expect("mixture of nonsignaling boxes")
}

fn node(resource: &str, input: u32, children: Vec<(u32, Node)>) -> Node {
    Node::Internal {
        resource: resource.into(),
        input,
        children: children.into_iter().collect(),
    }
}

/// Alice's adaptive tree over R1 (binary output) and R2 (ternary output).
pub fn fig2_alice_tree() -> DecisionTree {
    let t = Node::terminal;
    let r2 = |input| node("R2", input, vec![(0, t()), (1, t()), (2, t())]);
    let r1 = |input| node("R1", input, vec![(0, t()), (1, t())]);
    DecisionTree::new(
        "A",
        BTreeMap::from([
            (0, node("R1", 0, vec![(0, r2(1)), (1, r2(0))])),
            (1, node("R2", 1, vec![(0, r1(0)), (1, r1(1)), (2, r1(0))])),
        ]),
    )
}

/// Three parties sharing R1 (all three) and R2 (A and C). Alice uses the
/// adaptive tree above; Bob feeds his setting to R1; Charlie feeds his
/// setting to R2 and R2's output to R1 (output 2 never occurs for him, his
/// R2 output is binary).
pub fn fig2_network() -> Network {
    let (r1, r2) = (fig2_r1(), fig2_r2());
    let bob = DecisionTree::fixed_order("B", &bin(), &[&r1], |s, _| s).expect("valid tree");
    let charlie = DecisionTree::build(
        "C",
        &bin(),
        &[&r2, &r1],
        |s, h| match h.len() {
            0 => ("R2".into(), s),
            _ => ("R1".into(), h[0].1),
        },
        |_, _| None,
    )
    .expect("valid tree");
    Network::new(
        names(&["A", "B", "C"]),
        vec![bin(), bin(), bin()],
        vec![r1, r2],
        vec![fig2_alice_tree(), bob, charlie],
        vec![OutcomeRule::Transcript; 3],
    )
    .expect("valid network")
}

/// Signaling pair on A, B: `R1(a,b|x,y) = delta(a, y)/2` and
/// `R2(a,b|x,y) = delta(b, 1-x)/2`. Alice consults R1 and feeds its output
/// to R2; Bob consults R2 and feeds its output to R1. Every assignment gets
/// probability zero.
pub fn bancal_network() -> Network {
    let half = ratio(1, 2);
    let r1 = ConditionalTable::from_fn(
        names(&["A", "B"]),
        vec![bin(), bin()],
        vec![bin(), bin()],
        |x, a| {
            if a[0] == x[1] {
                half.clone()
            } else {
                Rational::zero()
            }
        },
    )
    .expect("fixed shape");
    let r2 = ConditionalTable::from_fn(
        names(&["A", "B"]),
        vec![bin(), bin()],
        vec![bin(), bin()],
        |x, a| {
            if a[1] == 1 - x[0] {
                half.clone()
            } else {
                Rational::zero()
            }
        },
    )
    .expect("fixed shape");
    let r1 = NonsignalingResource::new_unchecked("R1", r1);
    let r2 = NonsignalingResource::new_unchecked("R2", r2);
    let one = Alphabet::range(1);
    let alice = DecisionTree::build(
        "A",
        &one,
        &[&r1, &r2],
        |_, h| match h.len() {
            0 => ("R1".into(), 0),
            _ => ("R2".into(), h[0].1),
        },
        |_, _| None,
    )
    .expect("valid tree");
    let bob = DecisionTree::build(
        "B",
        &one,
        &[&r1, &r2],
        |_, h| match h.len() {
            0 => ("R2".into(), 0),
            _ => ("R1".into(), h[0].1),
        },
        |_, _| None,
    )
    .expect("valid tree");
    Network::new(
        names(&["A", "B"]),
        vec![one.clone(), one],
        vec![r1, r2],
        vec![alice, bob],
        vec![OutcomeRule::Transcript; 2],
    )
    .expect("structurally valid network")
}

/// Three PR boxes, one per pair, plus a fair coin shared by all three.
/// Each party consults the coin, then its two boxes (the second input
/// depending on the first output), and outputs the parity of its two box
/// outputs, flipped by the coin on setting 1.
pub fn wired_pr_network() -> Network {
    let coin = make_shared_randomness(
        "coin",
        &["A", "B", "C"],
        &[bin(), bin(), bin()],
        &BTreeMap::from([(vec![0, 0, 0], ratio(1, 2)), (vec![1, 1, 1], ratio(1, 2))]),
    )
    .expect("normalized");
    let ab = make_pr_class_box("PR-AB", ["A", "B"], 0, 0, 0);
    let bc = make_pr_class_box("PR-BC", ["B", "C"], 0, 0, 0);
    let ac = make_pr_class_box("PR-AC", ["A", "C"], 0, 0, 0);
    let tree = |party: &str, first: &NonsignalingResource, second: &NonsignalingResource| {
        let (f, g) = (first.id().to_string(), second.id().to_string());
        DecisionTree::build(
            party,
            &bin(),
            &[&coin, first, second],
            |s, h| match h.len() {
                0 => ("coin".into(), 0),
                1 => (f.clone(), s),
                _ => (g.clone(), s ^ h[1].1),
            },
            |s, h| Some(h[1].1 ^ h[2].1 ^ (s & h[0].1)),
        )
        .expect("valid tree")
    };
    let trees = vec![
        tree("A", &ab, &ac),
        tree("B", &ab, &bc),
        tree("C", &bc, &ac),
    ];
    Network::new(
        names(&["A", "B", "C"]),
        vec![bin(), bin(), bin()],
        vec![coin.clone(), ab.clone(), bc.clone(), ac.clone()],
        trees,
        vec![
            OutcomeRule::Labels {
                alphabet: Some(bin())
            };
            3
        ],
    )
    .expect("valid network")
}

/// A single resource whose parties feed their settings straight in and
/// output what they receive. The induced behavior is the resource itself.
pub fn pass_through_network(r: &NonsignalingResource) -> Network {
    let trees = r
        .parties()
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let outs = r.output_alphabets()[j].clone();
            DecisionTree::build(
                p,
                &r.input_alphabets()[j],
                &[r],
                |s, _| (r.id().to_string(), s),
                |_, h| Some(h[0].1),
            )
            .map(|t| (t, outs))
        })
        .collect::<Result<Vec<_>, _>>()
        .expect("valid trees");
    let rules = trees
        .iter()
        .map(|(_, outs)| OutcomeRule::Labels {
            alphabet: Some(outs.clone()),
        })
        .collect();
    Network::new(
        r.parties().to_vec(),
        r.input_alphabets().to_vec(),
        vec![r.clone()],
        trees.into_iter().map(|(t, _)| t).collect(),
        rules,
    )
    .expect("valid network")
}

/// Scenario and resource files shipped under `fixtures/`, keyed by path
/// relative to that directory. The GHZ snapshot is produced by a search and
/// is not listed here.
pub fn shipped_files() -> Vec<(&'static str, serde_json::Value)> {
    use crate::network::ScenarioFile;
    use crate::resource::{make_local_deterministic, make_noisy_pr_box, make_pr_box, ResourceFile};

    fn json<T: serde::Serialize>(t: &T) -> serde_json::Value {
        serde_json::to_value(t).expect("serializable")
    }
    let scenario = |net: &Network, name: &str, description: &str| {
        json(&ScenarioFile::from_network(net, name, description))
    };
    let deterministic = make_local_deterministic(
        "D",
        &["A", "B"],
        &[bin(), bin()],
        &[bin(), bin()],
        &[
            BTreeMap::from([(0, 0), (1, 1)]),
            BTreeMap::from([(0, 1), (1, 1)]),
        ],
    )
    .expect("valid response functions");
    vec![
        (
            "fig2/scenario.json",
            scenario(
                &fig2_network(),
                "fig2",
                "three parties sharing R1 (A, B, C) and R2 (A, C); Alice wires R1 and R2 adaptively",
            ),
        ),
        (
            "bancal/scenario.json",
            scenario(
                &bancal_network(),
                "bancal",
                "two boxes wired in a loop by Alice and Bob; every joint probability is zero",
            ),
        ),
        (
            "wired-pr/scenario.json",
            scenario(
                &wired_pr_network(),
                "wired-pr",
                "PR boxes on each pair plus a shared coin, wired adaptively",
            ),
        ),
        ("boxes/pr.json", json(&ResourceFile::from_resource(&make_pr_box()))),
        (
            "boxes/noisy-pr-3-4.json",
            json(&ResourceFile::from_resource(&make_noisy_pr_box(&ratio(3, 4)).expect("valid weight"))),
        ),
        (
            "boxes/noisy-pr-1-2.json",
            json(&ResourceFile::from_resource(&make_noisy_pr_box(&ratio(1, 2)).expect("valid weight"))),
        ),
        ("boxes/deterministic.json", json(&ResourceFile::from_resource(&deterministic))),
    ]
}
