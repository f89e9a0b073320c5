use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::resource::{make_modular_box, make_uniform, Alphabet, NonsignalingResource};

fn bin() -> Alphabet {
    Alphabet::range(2)
}

fn r1() -> NonsignalingResource {
    make_modular_box(
        "R1",
        &["A", "B", "C"],
        &[bin(), bin(), bin()],
        &[bin(), bin(), bin()],
        |x| x[0] * x[1] * x[2],
    )
    .unwrap()
}

fn r2() -> NonsignalingResource {
    make_uniform(
        "R2",
        &["A", "C"],
        &[bin(), bin()],
        &[Alphabet::range(3), bin()],
    )
    .unwrap()
}

fn internal(resource: &str, input: u32, children: Vec<(u32, Node)>) -> Node {
    Node::Internal {
        resource: resource.into(),
        input,
        children: children.into_iter().collect(),
    }
}

fn adaptive_tree() -> DecisionTree {
    let t = Node::terminal;
    let s0 = internal(
        "R1",
        0,
        vec![
            (0, internal("R2", 1, vec![(0, t()), (1, t()), (2, t())])),
            (1, internal("R2", 0, vec![(0, t()), (1, t()), (2, t())])),
        ],
    );
    let s1 = internal(
        "R2",
        1,
        vec![
            (0, internal("R1", 0, vec![(0, t()), (1, t())])),
            (1, internal("R1", 1, vec![(0, t()), (1, t())])),
            (2, internal("R1", 0, vec![(0, t()), (1, t())])),
        ],
    );
    DecisionTree::new("A", BTreeMap::from([(0, s0), (1, s1)]))
}

#[test]
fn adaptive_tree_validates() {
    let (a, b) = (r1(), r2());
    let t = adaptive_tree();
    t.validate(&bin(), &[&a, &b]).unwrap();
    assert_eq!(
        t.scope(),
        &BTreeSet::from(["R1".to_string(), "R2".to_string()])
    );
}

#[test]
fn adaptive_tree_highlighted_path() {
    let tr = adaptive_tree()
        .trace_path(0, &BTreeMap::from([("R1".into(), 1), ("R2".into(), 0)]))
        .unwrap();
    assert_eq!(
        tr.inputs,
        BTreeMap::from([("R1".into(), 0), ("R2".into(), 0)])
    );
    assert_eq!(tr.consult_order, vec!["R1".to_string(), "R2".to_string()]);
    assert_eq!(tr.outcome, None);
}

#[test]
fn reuse_is_rejected() {
    let (a, b) = (r1(), r2());
    let t = Node::terminal;
    let reuse = internal(
        "R1",
        0,
        vec![
            (0, internal("R1", 1, vec![(0, t()), (1, t())])),
            (1, internal("R2", 0, vec![(0, t()), (1, t()), (2, t())])),
        ],
    );
    let mut root = adaptive_tree().root().clone();
    root.insert(0, reuse);
    let err = DecisionTree::new("A", root)
        .validate(&bin(), &[&a, &b])
        .unwrap_err();
    assert_eq!(err.kind, TreeErrorKind::Reused("R1".into()));
    assert_eq!(
        err.path,
        vec![
            PathStep::Setting(0),
            PathStep::Output {
                resource: "R1".into(),
                output: 0
            }
        ]
    );
}

#[test]
fn missing_output_edge_is_rejected() {
    let (a, b) = (r1(), r2());
    let t = Node::terminal;
    let mut root = adaptive_tree().root().clone();
    root.insert(
        0,
        internal(
            "R1",
            0,
            vec![
                (0, internal("R2", 1, vec![(0, t()), (1, t())])),
                (1, internal("R2", 0, vec![(0, t()), (1, t()), (2, t())])),
            ],
        ),
    );
    let err = DecisionTree::new("A", root)
        .validate(&bin(), &[&a, &b])
        .unwrap_err();
    assert!(
        matches!(err.kind, TreeErrorKind::OutputEdges { ref found, ref expected, .. } if found == &vec![0, 1] && expected == &vec![0, 1, 2])
    );
}

#[test]
fn other_structural_errors() {
    let (a, b) = (r1(), r2());
    let t = adaptive_tree();
    assert!(matches!(
        t.validate(&Alphabet::range(3), &[&a, &b]).unwrap_err().kind,
        TreeErrorKind::MissingSetting(2)
    ));
    assert!(matches!(
        t.validate(&bin(), &[&a]).unwrap_err().kind,
        TreeErrorKind::DanglingResource(_)
    ));
    let mut root = t.root().clone();
    root.insert(1, internal("R2", 5, vec![]));
    assert!(matches!(
        DecisionTree::new("A", root)
            .validate(&bin(), &[&a, &b])
            .unwrap_err()
            .kind,
        TreeErrorKind::InputOutOfAlphabet { input: 5, .. }
    ));
    let mut root = t.root().clone();
    root.insert(
        1,
        internal(
            "R2",
            0,
            vec![
                (0, Node::terminal()),
                (1, Node::terminal()),
                (2, Node::terminal()),
            ],
        ),
    );
    assert!(matches!(
        DecisionTree::new("A", root)
            .validate(&bin(), &[&a, &b])
            .unwrap_err()
            .kind,
        TreeErrorKind::UnevenDepth {
            consulted: 1,
            expected: 2
        }
    ));
    let bob = DecisionTree::new("B", BTreeMap::from([(0, internal("R2", 0, vec![]))]));
    assert!(matches!(
        bob.validate(&Alphabet::range(1), &[&b]).unwrap_err().kind,
        TreeErrorKind::NotAMember(_)
    ));
}

#[test]
fn single_resource_inputs_depend_on_setting_only() {
    let a = r1();
    let t = DecisionTree::fixed_order("B", &bin(), &[&a], |s, _| s).unwrap();
    for s in 0..2 {
        for o in 0..2 {
            let tr = t
                .trace_path(s, &BTreeMap::from([("R1".into(), o)]))
                .unwrap();
            assert_eq!(tr.inputs["R1"], s);
        }
    }
}

#[test]
fn excision_shortens_paths() {
    let (a, b) = (r1(), r2());
    let t = adaptive_tree();
    let e = t.excise_input_free("R1", 1).unwrap();
    assert_eq!(e.scope(), &BTreeSet::from(["R2".to_string()]));
    let tr = e
        .trace_path(0, &BTreeMap::from([("R2".into(), 0)]))
        .unwrap();
    assert_eq!(tr.inputs, BTreeMap::from([("R2".into(), 0)]));
    let tr = e
        .trace_path(1, &BTreeMap::from([("R2".into(), 1)]))
        .unwrap();
    assert_eq!(tr.consult_order, vec!["R2".to_string()]);
    e.validate(&bin(), &[&b]).unwrap();
    let _ = a;
    assert!(matches!(
        t.excise_input_free("R9", 0).unwrap_err().kind,
        TreeErrorKind::OutOfScope(_)
    ));
    assert!(matches!(
        t.excise_input_free("R1", 7).unwrap_err().kind,
        TreeErrorKind::NoSuchEdge { .. }
    ));
}

#[test]
fn excising_last_resource_only_changes_leaves() {
    let (a, b) = (r1(), r2());
    let t = DecisionTree::fixed_order("A", &bin(), &[&b, &a], |s, _| s).unwrap();
    let e = t.excise("R1", |x| x).unwrap();
    let direct = DecisionTree::fixed_order("A", &bin(), &[&b], |s, _| s).unwrap();
    assert_eq!(e, direct);
}

#[test]
fn append_unused_extends_every_path() {
    let (a, b) = (r1(), r2());
    let t = DecisionTree::fixed_order("A", &bin(), &[&a], |s, _| s).unwrap();
    assert_eq!(t.append_unused(&[]).unwrap(), t);
    let ext = t.append_unused(&[(&b, 1)]).unwrap();
    ext.validate(&bin(), &[&a, &b]).unwrap();
    let tr = ext
        .trace_path(1, &BTreeMap::from([("R1".into(), 0), ("R2".into(), 2)]))
        .unwrap();
    assert_eq!(tr.consult_order, vec!["R1".to_string(), "R2".to_string()]);
    assert_eq!(tr.inputs["R2"], 1);
    assert!(matches!(
        t.append_unused(&[(&b, 4)]).unwrap_err().kind,
        TreeErrorKind::InputOutOfAlphabet { .. }
    ));
    assert!(matches!(
        ext.append_unused(&[(&b, 0)]).unwrap_err().kind,
        TreeErrorKind::AlreadyInScope(_)
    ));
}

#[test]
fn labels_survive_append() {
    let (a, b) = (r1(), r2());
    let t = DecisionTree::fixed_order("A", &bin(), &[&a], |s, _| s)
        .unwrap()
        .relabel_terminals(|s, h| Some(s ^ h[0].1));
    assert!(t.fully_labeled());
    let ext = t.append_unused(&[(&b, 0)]).unwrap();
    for s in 0..2 {
        for o in 0..2 {
            for o2 in 0..3 {
                let tr = ext
                    .trace_path(s, &BTreeMap::from([("R1".into(), o), ("R2".into(), o2)]))
                    .unwrap();
                assert_eq!(tr.outcome, Some(s ^ o));
            }
        }
    }
    assert_eq!(ext.labels(), BTreeSet::from([0, 1]));
}

#[test]
fn json_roundtrip() {
    let t =
        adaptive_tree().relabel_terminals(|s, h| Some(s + h.iter().map(|(_, o)| o).sum::<u32>()));
    let f = TreeFile::from_tree(&t);
    let text = serde_json::to_string(&f).unwrap();
    let back: TreeFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_tree().unwrap(), t);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["settings"]["0"]["resource"], "R1");
    assert_eq!(
        v["settings"]["0"]["children"]["1"]["children"]["0"]["outcome"],
        "1"
    );
    let unlabeled: TreeFile = serde_json::from_str(
        &serde_json::to_string(&TreeFile::from_tree(&adaptive_tree())).unwrap(),
    )
    .unwrap();
    assert_eq!(unlabeled.to_tree().unwrap(), adaptive_tree());
}

#[test]
fn relabeling_resource_ids_preserves_validity() {
    let (a, b) = (r1(), r2());
    let t = adaptive_tree();
    let rename = |k: &str| format!("{k}'");
    let t2 = t.renamed("A", rename);
    let a2 = a.clone().with_id("R1'");
    let b2 = b.clone().with_id("R2'");
    assert!(t2.validate(&bin(), &[&a2, &b2]).is_ok());
    let mut bad = t.root().clone();
    bad.remove(&1);
    let bad = DecisionTree::new("A", bad);
    assert_eq!(
        bad.validate(&bin(), &[&a, &b]).is_ok(),
        bad.renamed("A", rename)
            .validate(&bin(), &[&a2, &b2])
            .is_ok()
    );
}

/// Random adaptive tree over up to three resources held by `A`, each with
/// its own input/output alphabet sizes; the policy is a hash of the history.
fn random_tree(sizes: &[(usize, usize)], seed: u64) -> (DecisionTree, Vec<NonsignalingResource>) {
    let resources: Vec<NonsignalingResource> = sizes
        .iter()
        .enumerate()
        .map(|(k, &(i, o))| {
            make_uniform(
                format!("R{k}"),
                &["A"],
                &[Alphabet::range(i)],
                &[Alphabet::range(o)],
            )
            .unwrap()
        })
        .collect();
    let refs: Vec<&NonsignalingResource> = resources.iter().collect();
    let mix = |s: u32, h: &[(String, u32)], salt: u64| -> u64 {
        let mut v = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(s);
        for (k, o) in h {
            v = v
                .wrapping_mul(6364136223846793005)
                .wrapping_add(k.len() as u64 * 31 + u64::from(*o) + 1);
            v ^= v >> 29;
        }
        v
    };
    let t = DecisionTree::build(
        "A",
        &Alphabet::range(2),
        &refs,
        |s, h| {
            let unused: Vec<usize> = (0..sizes.len())
                .filter(|k| !h.iter().any(|(id, _)| id == &format!("R{k}")))
                .collect();
            let k = unused[(mix(s, h, 1) % unused.len() as u64) as usize];
            (format!("R{k}"), (mix(s, h, 2) % sizes[k].0 as u64) as u32)
        },
        |_, _| None,
    )
    .unwrap();
    (t, resources)
}

fn all_outputs(sizes: &[(usize, usize)]) -> Vec<BTreeMap<String, u32>> {
    let radix = crate::index::Radix::new(sizes.iter().map(|s| s.1).collect());
    radix
        .iter()
        .map(|d| {
            d.iter()
                .enumerate()
                .map(|(k, &o)| (format!("R{k}"), o as u32))
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_is_injective_and_prefix_determined(
        sizes in prop::collection::vec((1usize..=3, 1usize..=3), 1..=3),
        seed in any::<u64>(),
    ) {
        let (t, _) = random_tree(&sizes, seed);
        for s in 0..2u32 {
            let mut seen = BTreeSet::new();
            let mut traces = Vec::new();
            for outs in all_outputs(&sizes) {
                let tr = t.trace_path(s, &outs).unwrap();
                prop_assert_eq!(tr.consult_order.len(), sizes.len());
                let path: Vec<(String, u32)> = tr.consult_order.iter().map(|k| (k.clone(), outs[k])).collect();
                prop_assert!(seen.insert(path));
                traces.push((outs, tr));
            }
            // The i-th consulted resource and its input are fixed by the
            // outputs of the first i-1 consulted resources.
            for (o1, t1) in &traces {
                for (o2, t2) in &traces {
                    let common = t1
                        .consult_order
                        .iter()
                        .zip(&t2.consult_order)
                        .take_while(|(k1, k2)| k1 == k2 && o1[*k1] == o2[*k2])
                        .count();
                    let upto = (common + 1).min(sizes.len());
                    for i in 0..upto {
                        prop_assert_eq!(&t1.consult_order[i], &t2.consult_order[i]);
                        let k = &t1.consult_order[i];
                        prop_assert_eq!(t1.inputs[k], t2.inputs[k]);
                    }
                }
            }
        }
    }

    #[test]
    fn built_trees_validate_under_renaming(
        sizes in prop::collection::vec((1usize..=3, 1usize..=3), 1..=3),
        seed in any::<u64>(),
    ) {
        let (t, rs) = random_tree(&sizes, seed);
        let refs: Vec<&NonsignalingResource> = rs.iter().collect();
        prop_assert!(t.validate(&Alphabet::range(2), &refs).is_ok());
        let renamed: Vec<NonsignalingResource> = rs.iter().map(|r| r.clone().with_id(format!("x{}", r.id()))).collect();
        let rrefs: Vec<&NonsignalingResource> = renamed.iter().collect();
        let t2 = t.renamed("A", |k| format!("x{}", k));
        prop_assert!(t2.validate(&Alphabet::range(2), &rrefs).is_ok());
    }
}
