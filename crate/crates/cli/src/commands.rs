use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use nonsig::decompose::{
    decompose_extremal, local_deterministic_vertices, ns_vertices_222, Decomposition, Provenance,
    VertexSet, DEFAULT_VERTEX_CAP,
};
use nonsig::inequality::{
    cao_inequality, cao_s14_linearized, chao_reichardt_correlator, chao_reichardt_probability_form,
    evaluate, evaluate_cao_s14, mao_inequality, mao_relabeled, mao_relabeled_swapped, trivial_a0c0,
    verify_derivation_chain, Evaluation, InequalityError, LinearInequality, DEFAULT_TOLERANCE,
};
use nonsig::network::{load_resource, Network, ScenarioFile};
use nonsig::quantum_oracle::{
    ghz_behavior, search_max_violation, QuantumStrategy, SearchConfig, StrategyFile,
};
use nonsig::rational::{format_rational, Rational, Scalar};
use nonsig::resource::{ConditionalTable, ResourceFile};

use crate::failure::{resource_is_domain, Failure};
use crate::{pretty, IneqName, Report};

fn report(json: Value, text: String, ok: bool) -> Report {
    Report {
        json,
        text,
        ok,
        output: None,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: invalid JSON: {e}", path.display())))
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

fn load_network(path: &Path) -> Result<(ScenarioFile, Network), Failure> {
    let file = ScenarioFile::load(path)?;
    let net = file.to_network(base_dir(path))?;
    Ok((file, net))
}

fn vertex_cap() -> Result<usize, Failure> {
    match std::env::var("NONSIG_VERTEX_CAP") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::input(format!(
                "NONSIG_VERTEX_CAP must be a positive integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_VERTEX_CAP),
    }
}

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

pub fn validate(path: &Path) -> Result<Report, Failure> {
    let file = ScenarioFile::load(path)?;
    let base = base_dir(path);
    let mut checks = Vec::new();
    let mut resources_ok = true;
    for rf in file.resource_files(base)? {
        let name = format!("resource {}", rf.id);
        match rf.to_resource() {
            Ok(_) => checks.push(Check {
                name,
                passed: true,
                detail: "normalized and nonsignaling".into(),
            }),
            Err(e) if resource_is_domain(&e) => {
                resources_ok = false;
                checks.push(Check {
                    name,
                    passed: false,
                    detail: e.to_string(),
                });
            }
            Err(e) => return Err(Failure::input(format!("resource `{}`: {e}", rf.id))),
        }
    }
    for tf in file.tree_files(base)? {
        let name = format!("tree {}", tf.party);
        match tf.to_tree() {
            Ok(_) => checks.push(Check {
                name,
                passed: true,
                detail: "well-formed".into(),
            }),
            Err(e) => checks.push(Check {
                name,
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    if resources_ok || file.counterexample {
        match file.to_network(base) {
            Ok(net) => {
                checks.push(Check {
                    name: "network".into(),
                    passed: true,
                    detail: format!(
                        "{} parties, {} resources",
                        net.parties().len(),
                        net.resources().len()
                    ),
                });
                if net.all_verified() {
                    let (passed, detail) = match net.induced_behavior() {
                        Ok(_) => (true, "normalized and nonsignaling".to_string()),
                        Err(e) => (false, e.to_string()),
                    };
                    checks.push(Check {
                        name: "behavior".into(),
                        passed,
                        detail,
                    });
                }
            }
            Err(e) if e.is_input_error() => return Err(e.into()),
            Err(e) => checks.push(Check {
                name: "network".into(),
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    let valid = checks.iter().all(|c| c.passed);
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.clone(), pass(c.passed).into(), c.detail.clone()])
        .collect();
    let text = format!(
        "scenario {}: {}\n{}",
        file.name,
        if valid { "valid" } else { "INVALID" },
        pretty::table(&["check", "result", "detail"], &rows)
    );
    let json = json!({
        "scenario": file.name,
        "valid": valid,
        "checks": checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
    });
    Ok(report(json, text, valid))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn parse_symbols(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Failure::input(format!("bad settings `{s}`")))
        })
        .collect()
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn joint(
    path: &Path,
    settings: Option<&str>,
    allow_unnormalized: bool,
) -> Result<Report, Failure> {
    let (_, net) = load_network(path)?;
    let tuples = match settings {
        Some(s) => vec![parse_symbols(s)?],
        None => net.settings_tuples(),
    };
    let mut dists = Vec::new();
    let mut text = String::new();
    for s in &tuples {
        let d = net.joint_distribution(s, allow_unnormalized)?;
        let ids = d.resource_ids().to_vec();
        let support: Vec<(Vec<Vec<u32>>, Rational)> =
            d.support().map(|(o, p)| (o, p.clone())).collect();
        let rows: Vec<Vec<String>> = support
            .iter()
            .map(|(o, p)| {
                let mut row: Vec<String> = o.iter().map(|v| join(v)).collect();
                row.push(format_rational(p));
                row
            })
            .collect();
        let mut header: Vec<&str> = ids.iter().map(String::as_str).collect();
        header.push("p");
        text.push_str(&format!(
            "settings {}  sum {}\n",
            join(s),
            format_rational(d.sum())
        ));
        text.push_str(&pretty::table(&header, &rows));
        text.push('\n');
        dists.push(json!({
            "settings": s,
            "sum": format_rational(d.sum()),
            "support": support.iter().map(|(o, p)| {
                let outs: BTreeMap<&str, &Vec<u32>> = ids.iter().map(String::as_str).zip(o).collect();
                json!({"outputs": outs, "p": format_rational(p)})
            }).collect::<Vec<_>>(),
        }));
    }
    let json = json!({
        "resources": net.resources().iter().map(|r| r.id()).collect::<Vec<_>>(),
        "distributions": dists,
    });
    Ok(report(json, text, true))
}

pub fn behavior(
    path: &Path,
    check_nosig: bool,
    output: Option<PathBuf>,
) -> Result<Report, Failure> {
    let (file, net) = load_network(path)?;
    let table = if check_nosig {
        net.induced_behavior()?.into_table()
    } else {
        net.behavior_table(false)?
    };
    let rf = ResourceFile::from_table(&format!("{}-behavior", file.name), &table);
    let text = pretty::conditional_table(&table);
    Ok(Report {
        json: serde_json::to_value(&rf).expect("serializable"),
        text,
        ok: true,
        output,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VertexFile {
    List(Vec<ResourceFile>),
    Wrapped { vertices: Vec<ResourceFile> },
}

pub fn decompose(path: &Path, vertices: &str) -> Result<Report, Failure> {
    let r = load_resource(path, false)?;
    let vs = match vertices {
        "local" => {
            let parties: Vec<&str> = r.parties().iter().map(String::as_str).collect();
            local_deterministic_vertices(
                &parties,
                r.input_alphabets(),
                r.output_alphabets(),
                vertex_cap()?,
            )?
        }
        "ns222" => {
            let set = ns_vertices_222();
            if r.parties().len() != 2 {
                return Err(Failure::input("ns222 vertices need a bipartite resource"));
            }
            set.renamed_parties(r.parties())?
        }
        file => {
            let files = match read_json::<VertexFile>(Path::new(file))? {
                VertexFile::List(v) | VertexFile::Wrapped { vertices: v } => v,
            };
            let mut list = Vec::with_capacity(files.len());
            for f in &files {
                list.push(
                    f.to_resource()
                        .map_err(|e| Failure::input(format!("vertex `{}`: {e}", f.id)))?,
                );
            }
            let provenance = vec![Provenance::External; list.len()];
            VertexSet::new(list, provenance)?
        }
    };
    let d = decompose_extremal(&r, &vs)?;
    Ok(match d {
        Decomposition::Mixture(m) => {
            let rows: Vec<Vec<String>> = m
                .components()
                .iter()
                .map(|(w, i)| {
                    vec![
                        format_rational(w),
                        vs.vertex(*i).id().to_string(),
                        vs.provenance(*i).as_str().to_string(),
                    ]
                })
                .collect();
            let json = json!({
                "resource": r.id(),
                "feasible": true,
                "vertex_count": vs.len(),
                "components": m.components().iter().map(|(w, i)| json!({
                    "weight": format_rational(w),
                    "vertex": vs.vertex(*i).id(),
                    "provenance": vs.provenance(*i).as_str(),
                })).collect::<Vec<_>>(),
            });
            let text = format!(
                "{} is a mixture of {} of {} vertices\n{}",
                r.id(),
                m.len(),
                vs.len(),
                pretty::table(&["weight", "vertex", "kind"], &rows)
            );
            report(json, text, true)
        }
        Decomposition::Infeasible(cert) => {
            let json = json!({
                "resource": r.id(),
                "feasible": false,
                "vertex_count": vs.len(),
                "certificate": {
                    "coefficients": ResourceFile::from_table("certificate", &cert.coefficients),
                    "bound": format_rational(&cert.bound),
                    "value": format_rational(&cert.value),
                },
            });
            let text = format!(
                "{} is outside the hull of {} vertices: functional value {} > bound {}\ncoefficients:\n{}",
                r.id(),
                vs.len(),
                format_rational(&cert.value),
                format_rational(&cert.bound),
                pretty::conditional_table(&cert.coefficients)
            );
            report(json, text, false)
        }
    })
}

fn linear(name: IneqName) -> Option<LinearInequality> {
    Some(match name {
        IneqName::Mao => mao_inequality(),
        IneqName::CrCorr => chao_reichardt_correlator(),
        IneqName::Cao => cao_inequality(),
        IneqName::CaoS14Linear => cao_s14_linearized(),
        IneqName::MaoRelabeled => mao_relabeled(),
        IneqName::MaoRelabeledSwapped => mao_relabeled_swapped(),
        IneqName::A0c0Trivial => trivial_a0c0(),
        IneqName::CrProb | IneqName::CaoS14 => return None,
    })
}

fn cli_name(name: IneqName) -> String {
    clap::ValueEnum::to_possible_value(&name)
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

/// `(value, relation, bound, satisfied)`.
fn eval_on<T: Scalar>(
    name: IneqName,
    b: &ConditionalTable<T>,
    tol: f64,
) -> Result<(T, &'static str, Rational, bool), InequalityError> {
    let done = |e: Evaluation<T>, rel, bound| (e.value, rel, bound, e.satisfied);
    Ok(match name {
        IneqName::CrProb => done(
            chao_reichardt_probability_form(b, tol)?,
            ">=",
            Rational::from_integer(1.into()),
        ),
        IneqName::CaoS14 => done(
            evaluate_cao_s14(b, tol)?,
            "<=",
            Rational::from_integer(6.into()),
        ),
        other => {
            let ineq = linear(other).expect("linear inequality");
            done(evaluate(&ineq, b, tol)?, "<=", ineq.bound().clone())
        }
    })
}

pub fn ineq_eval(name: IneqName, path: &Path) -> Result<Report, Failure> {
    let rf: ResourceFile = read_json(path)?;
    let (value, shown, rel, bound, satisfied) = if rf.is_exact() {
        let t = rf.to_exact_table()?;
        let (v, rel, bound, ok) = eval_on(name, &t, 0.0)?;
        (
            json!(format_rational(&v)),
            format_rational(&v),
            rel,
            bound,
            ok,
        )
    } else {
        let t = rf.to_float_table()?;
        let (v, rel, bound, ok) = eval_on(name, &t, DEFAULT_TOLERANCE)?;
        (json!(v), v.to_string(), rel, bound, ok)
    };
    let n = cli_name(name);
    let json = json!({
        "inequality": n,
        "value": value,
        "relation": rel,
        "bound": format_rational(&bound),
        "satisfied": satisfied,
    });
    let text = format!(
        "{n}: {shown} {rel} {}  {}\n",
        format_rational(&bound),
        if satisfied { "satisfied" } else { "VIOLATED" }
    );
    Ok(report(json, text, true))
}

pub fn ineq_derive() -> Report {
    let r = verify_derivation_chain();
    let rows: Vec<Vec<String>> = r
        .steps
        .iter()
        .map(|s| {
            let w = s
                .witness
                .as_ref()
                .map(|w| format!("{}: {} vs {}", w.behavior, w.left, w.right))
                .unwrap_or_default();
            vec![
                s.step.to_string(),
                pass(s.passed).into(),
                s.claim.clone(),
                s.detail.clone(),
                w,
            ]
        })
        .collect();
    let text = pretty::table(&["step", "result", "claim", "detail", "witness"], &rows);
    let ok = r.all_passed();
    let json = json!({"passed": ok, "steps": r.steps});
    report(json, text, ok)
}

pub fn ghz_search(name: IneqName, grid: usize, refine: f64) -> Result<Report, Failure> {
    let ineq = linear(name).ok_or_else(|| {
        Failure::input(format!(
            "`{}` is not a linear correlator inequality",
            cli_name(name)
        ))
    })?;
    if grid == 0 || !(refine > 0.0) {
        return Err(Failure::input(
            "grid must be positive and refine must be a positive step",
        ));
    }
    let r = search_max_violation(&ineq, &SearchConfig { grid, refine })?;
    let file = StrategyFile {
        inequality: cli_name(name),
        angles: r.strategy.angles.clone(),
        value: r.value,
    };
    let rows: Vec<Vec<String>> = r
        .strategy
        .angles
        .iter()
        .map(|(p, a)| {
            let mut row = vec![p.clone()];
            row.extend(a.iter().map(|t| format!("{t:.6}")));
            row
        })
        .collect();
    let text = format!(
        "{}: value {} (bound {})\n{}",
        file.inequality,
        r.value,
        format_rational(ineq.bound()),
        pretty::table(&["party", "angles"], &rows)
    );
    Ok(report(
        serde_json::to_value(&file).expect("serializable"),
        text,
        true,
    ))
}

#[derive(Deserialize)]
struct AnglesOnly {
    angles: BTreeMap<String, Vec<f64>>,
}

fn parse_strategy(spec: &str) -> Result<QuantumStrategy, Failure> {
    let inline: Option<Vec<f64>> = spec.split(',').map(|t| t.trim().parse().ok()).collect();
    match inline {
        Some(v) if spec.contains(',') => {
            if v.len() % 3 != 0 {
                return Err(Failure::input(
                    "inline angles need the same number of settings for A, B and C",
                ));
            }
            let k = v.len() / 3;
            Ok(QuantumStrategy::new(
                v[..k].to_vec(),
                v[k..2 * k].to_vec(),
                v[2 * k..].to_vec(),
            )?)
        }
        _ => {
            let f: AnglesOnly = read_json(Path::new(spec))?;
            let s = QuantumStrategy { angles: f.angles };
            s.validate()?;
            Ok(s)
        }
    }
}

pub fn ghz_eval(angles: &str, output: Option<PathBuf>) -> Result<Report, Failure> {
    let s = parse_strategy(angles)?;
    let t = ghz_behavior(&s)?;
    let rf = ResourceFile::from_table("ghz", &t);
    Ok(Report {
        json: serde_json::to_value(&rf).expect("serializable"),
        text: pretty::conditional_table(&t),
        ok: true,
        output,
    })
}
