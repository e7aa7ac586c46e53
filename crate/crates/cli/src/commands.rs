use std::fs;
use std::path::{Path, PathBuf};

use paracel_core::ansatz::{
    default_grid, greedy_decompose, identity_check_with, paper_decomps, AnsatzDecomp, AnsatzError,
    IdentityOutcome, PsdOutcome,
};
use paracel_core::cluster::{classify_pair, m_poly, ClusterError, PairSign};
use paracel_core::harness::{replay_file, run_fuzz, CheckConfig, FuzzConfig, HarnessError};
use paracel_core::instances::Instance;
use paracel_core::multigraph::{DEFAULT_MAX_EDGES, WARN_EDGES};
use paracel_core::paracel::{
    canonical_split, enumerate_paracels, format_exponents, render_table, twin_families,
    verify_with_m, ParacelError,
};
use paracel_core::polyring::{parse_rational, Evaluation, Weights};
use paracel_core::ust::{classify_lowest, lowest_q_part, UstOutcome};
use paracel_core::{
    parse_graph, EdgeSet, GraphError, MPoly, Multigraph, PolyError, Rational, Universe,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::{Outcome, RunReport, EXIT_FAIL, EXIT_USAGE};

pub const CAP_ENV: &str = "RC_MAX_EDGES";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: GraphError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Paracel(#[from] ParacelError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl CliError {
    /// Bad input exits with the usage code; anything else is a broken
    /// contract.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Poly(_) | CliError::Harness(HarnessError::Poly(_)) => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }
}

/// Enumeration cap, from `RC_MAX_EDGES` when set.
pub fn edge_cap() -> Result<usize, CliError> {
    match std::env::var(CAP_ENV) {
        Ok(raw) => {
            let cap: usize = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{CAP_ENV}={raw:?} is not an edge count")))?;
            eprintln!("warning: enumeration cap overridden to {cap} edges by {CAP_ENV}");
            Ok(cap)
        }
        Err(_) => Ok(DEFAULT_MAX_EDGES),
    }
}

pub fn load_graph(path: &Path) -> Result<Multigraph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let g = parse_graph(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    g.check_cap(edge_cap()?)?;
    if g.edge_count() > WARN_EDGES {
        eprintln!(
            "warning: {} edges; enumeration over 2^{} subsets may be slow",
            g.edge_count(),
            g.edge_count()
        );
    }
    Ok(g)
}

/// Empty ids are dropped so that `--a ""` names the empty set.
fn unmarked_set(g: &Multigraph, ids: &[String]) -> Result<EdgeSet, CliError> {
    let ids: Vec<&str> = ids
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    Ok(g.edge_set(&ids, Universe::Unmarked)?)
}

fn parse_weights(g: &Multigraph, pairs: &[String]) -> Result<Weights, CliError> {
    let mut weights = Weights::new();
    for pair in pairs {
        let (id, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("weight `{pair}` is not of the form id=value"))
        })?;
        if g.edge_index(id).is_none() {
            return Err(GraphError::UnknownEdge(id.to_string()).into());
        }
        let value =
            parse_rational(value).map_err(|e| CliError::Usage(format!("weight `{pair}`: {e}")))?;
        weights.insert(id.to_string(), value);
    }
    Ok(weights)
}

fn poly_value(p: &MPoly) -> Value {
    serde_json::to_value(p.to_json_model()).expect("polynomial serializes")
}

pub fn cmd_mpoly(
    g: &Multigraph,
    at_q: Option<&str>,
    weights: &[String],
) -> Result<RunReport, CliError> {
    let m = m_poly(g)?;
    let weights = if weights.is_empty() {
        None
    } else {
        Some(parse_weights(g, weights)?)
    };
    let q = at_q
        .map(|raw| parse_rational(raw).map_err(|e| CliError::Usage(format!("--at-q: {e}"))))
        .transpose()?;
    let (payload, text) = match (q, weights) {
        (Some(q), w) => match m.evaluate(&q, w.as_ref())? {
            Evaluation::Value(v) => (
                json!({ "q": q.to_string(), "value": v.to_string() }),
                v.to_string(),
            ),
            Evaluation::Poly(p) => (
                json!({ "q": q.to_string(), "poly": poly_value(&p) }),
                p.to_string(),
            ),
        },
        (None, Some(w)) => {
            let p = m.subst_edges(&w)?;
            (json!({ "poly": poly_value(&p) }), p.to_string())
        }
        (None, None) => (json!({ "poly": poly_value(&m) }), m.to_string()),
    };
    Ok(RunReport::new(
        "mpoly",
        Some(g),
        Outcome::Pass,
        payload,
        text,
    ))
}

pub fn cmd_verify(g: &Multigraph) -> Result<RunReport, CliError> {
    let m = m_poly(g)?;
    let check = verify_with_m(g, &m);
    let outcome = if check.is_equal() {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    let mut text = format!("M_ef(1) = {}\nrhs     = {}\n", check.lhs, check.rhs);
    if check.is_equal() {
        text.push_str("equal\n");
    } else {
        for d in &check.mismatches {
            text.push_str(&format!(
                "mismatch at {}: lhs {} rhs {}\n",
                d.monomial, d.lhs, d.rhs
            ));
        }
    }
    let payload = json!({
        "equal": check.is_equal(),
        "lhs": poly_value(&check.lhs),
        "rhs": poly_value(&check.rhs),
        "mismatches": check.mismatches,
    });
    Ok(RunReport::new("verify", Some(g), outcome, payload, text))
}

fn vertex_list(vs: &[usize]) -> String {
    let items: Vec<String> = vs.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

pub fn cmd_paracels(g: &Multigraph, table: bool) -> Result<RunReport, CliError> {
    let paracels = enumerate_paracels(g);
    let mut text = format!("{} paracel(s)\n", paracels.len());
    for p in &paracels {
        text.push_str(&format!(
            "{}  components {} {}  smoots {}\n",
            g.format_set(p.set),
            vertex_list(&p.c1),
            vertex_list(&p.c2),
            g.format_set(p.smoots)
        ));
    }
    let list: Vec<Value> = paracels
        .iter()
        .map(|p| {
            json!({
                "set": g.set_ids(p.set),
                "c1": p.c1,
                "c2": p.c2,
                "smoots": g.set_ids(p.smoots),
            })
        })
        .collect();
    let mut payload = json!({ "count": paracels.len(), "paracels": list });
    if table {
        let families = twin_families(g);
        text.push('\n');
        text.push_str(&render_table(g, &families));
        let rows: Vec<Value> = families
            .iter()
            .map(|fam| {
                json!({
                    "beta": g.set_ids(fam.beta),
                    "gamma": g.set_ids(fam.gamma),
                    "a": fam.compatible.iter().map(|&s| g.set_ids(s)).collect::<Vec<_>>(),
                    "b": fam
                        .monomials
                        .iter()
                        .map(|m| format_exponents(g, m))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        payload["table"] = Value::Array(rows);
    }
    Ok(RunReport::new(
        "paracels",
        Some(g),
        Outcome::Pass,
        payload,
        text,
    ))
}

pub fn cmd_split(g: &Multigraph, gamma: Option<&[String]>) -> Result<RunReport, CliError> {
    let gammas = match gamma {
        Some(ids) => vec![unmarked_set(g, ids)?],
        None => enumerate_paracels(g).into_iter().map(|p| p.set).collect(),
    };
    let mut text = String::new();
    let mut splits = Vec::new();
    for gamma in gammas {
        let s = canonical_split(g, gamma)?;
        text.push_str(&format!(
            "gamma {}  beta {}  alpha {}  alpha' {}\n",
            g.format_set(gamma),
            g.format_set(s.beta),
            g.format_set(s.alpha),
            g.format_set(s.alpha_prime)
        ));
        splits.push(json!({
            "gamma": g.set_ids(gamma),
            "beta": g.set_ids(s.beta),
            "alpha": g.set_ids(s.alpha),
            "alpha_prime": g.set_ids(s.alpha_prime),
        }));
    }
    if splits.is_empty() {
        text.push_str("no paracels\n");
    }
    Ok(RunReport::new(
        "split",
        Some(g),
        Outcome::Pass,
        json!({ "splits": splits }),
        text,
    ))
}

pub fn cmd_ust(g: &Multigraph) -> Result<RunReport, CliError> {
    let outcome = classify_lowest(g, &lowest_q_part(&m_poly(g)?));
    let kind = outcome.kind();
    let (verdict, payload, text) = match &outcome {
        UstOutcome::Square {
            q_order,
            degree,
            root,
            unit_coefficients,
        } => (
            Outcome::Pass,
            json!({
                "kind": kind,
                "q_order": q_order,
                "degree": degree,
                "root": poly_value(root),
                "unit_coefficients": unit_coefficients,
            }),
            format!("square at q^{q_order}, degree {degree}: ({root})^2\n"),
        ),
        UstOutcome::NotSquare {
            q_order,
            degree,
            part,
        } => (
            Outcome::Fail,
            json!({ "kind": kind, "q_order": q_order, "degree": degree, "part": poly_value(part) }),
            format!("not a square at q^{q_order}, degree {degree}: {part}\n"),
        ),
        UstOutcome::Zero => (
            Outcome::Pass,
            json!({ "kind": kind }),
            "q^2 part is zero\n".to_string(),
        ),
        UstOutcome::Anomaly { q_order, part } => (
            Outcome::Anomaly,
            json!({ "kind": kind, "q_order": q_order, "part": poly_value(part) }),
            format!("anomaly: lowest order q^{q_order} on a connected graph: {part}\n"),
        ),
    };
    Ok(RunReport::new("ust", Some(g), verdict, payload, text))
}

pub enum DecompSource<'a> {
    File(&'a Path),
    Paper(Instance),
    Search,
}

fn write_replay(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn cmd_ansatz(
    g: &Multigraph,
    source: DecompSource<'_>,
    replay_dir: &Path,
) -> Result<RunReport, CliError> {
    let m = m_poly(g)?;
    let bundled = matches!(source, DecompSource::Paper(_));
    let search = matches!(source, DecompSource::Search);
    let decomp = match source {
        DecompSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            AnsatzDecomp::from_json(g, &text)?
        }
        DecompSource::Paper(instance) => {
            let bundled = paper_decomps(instance);
            AnsatzDecomp::from_json(g, &bundled.to_json(&instance.graph()))?
        }
        DecompSource::Search => match greedy_decompose(g) {
            Some(d) => d,
            None => {
                return Ok(RunReport::new(
                    "ansatz",
                    Some(g),
                    Outcome::Pass,
                    json!({ "found": false }),
                    "none found\n".to_string(),
                ))
            }
        },
    };
    let decomp_json: Value =
        serde_json::to_value(decomp.to_json_model(g)).expect("decomposition serializes");
    let identity = match identity_check_with(g, &m, &decomp) {
        Err(AnsatzError::NotDivisibleByQ2(order)) => {
            return Ok(RunReport::new(
                "ansatz",
                Some(g),
                Outcome::Anomaly,
                json!({ "q_order": order }),
                format!("anomaly: M_ef(q) has q order {order}, below 2\n"),
            ))
        }
        other => other?,
    };
    let grid = default_grid();
    let mut failures = Vec::new();
    for entry in &decomp.entries {
        for point in entry.form.psd_sweep(&grid).failures() {
            if let PsdOutcome::NotPsd { witness, value } = &point.outcome {
                failures.push(json!({
                    "beta": g.set_ids(entry.beta),
                    "gamma": g.set_ids(entry.gamma),
                    "q": point.q.to_string(),
                    "witness": witness.iter().map(Rational::to_string).collect::<Vec<_>>(),
                    "value": value.to_string(),
                }));
            }
        }
    }
    let mut text = String::new();
    let mut payload = json!({
        "found": true,
        "entries": decomp.len(),
        "identity": identity.holds(),
        "psd": failures.is_empty(),
        "not_psd": failures,
    });
    match &identity {
        IdentityOutcome::Holds => text.push_str("identity holds\n"),
        IdentityOutcome::Residual(r) => {
            text.push_str(&format!("identity fails, residual {r}\n"));
            payload["residual"] = poly_value(r);
        }
    }
    if failures.is_empty() {
        text.push_str(&format!(
            "psd on all {} grid points for {} entries\n",
            grid.len(),
            decomp.len()
        ));
    } else {
        for f in &failures {
            text.push_str(&format!(
                "not psd: beta {} gamma {} at q = {}, value {}\n",
                f["beta"],
                f["gamma"],
                f["q"].as_str().unwrap_or(""),
                f["value"].as_str().unwrap_or("")
            ));
        }
    }
    let outcome = if !identity.holds() {
        Outcome::Fail
    } else if failures.is_empty() {
        Outcome::Pass
    } else if bundled {
        Outcome::Counterexample
    } else {
        Outcome::Fail
    };
    if outcome == Outcome::Counterexample {
        let body = format!(
            "# bundled decomposition is not psd on the grid\n{}",
            g.to_graph_file()
        );
        let path = write_replay(replay_dir, "ansatz-not-psd.graph", &body)?;
        payload["replay"] = json!(path.display().to_string());
        text.push_str(&format!("replay written to {}\n", path.display()));
    }
    if search {
        text.push_str(&serde_json::to_string(&decomp_json).expect("decomposition serializes"));
        text.push('\n');
    }
    payload["decomposition"] = decomp_json;
    Ok(RunReport::new("ansatz", Some(g), outcome, payload, text))
}

pub fn cmd_fuzz(config: FuzzConfig, replay_dir: &Path) -> Result<RunReport, CliError> {
    let summary = run_fuzz(&config, &CheckConfig::default())?;
    let mut text = format!(
        "{}/{} pass ({} with M = 0)\n",
        summary.passed, summary.instances, summary.zero_m
    );
    for f in &summary.failures {
        text.push_str(&format!(
            "instance {} failed: {}\n",
            f.index,
            f.failed.join(", ")
        ));
    }
    let mut replays = Vec::new();
    for f in &summary.counterexamples {
        let name = format!("fuzz-{}-{}.graph", config.seed, f.index);
        let path = write_replay(replay_dir, &name, &replay_file(f))?;
        text.push_str(&format!(
            "negative value on instance {}, replay {}\n",
            f.index,
            path.display()
        ));
        replays.push(path.display().to_string());
    }
    let outcome = if !summary.failures.is_empty() {
        Outcome::Fail
    } else if !summary.counterexamples.is_empty() {
        Outcome::Counterexample
    } else {
        Outcome::Pass
    };
    let mut payload = serde_json::to_value(&summary).expect("summary serializes");
    payload["replays"] = json!(replays);
    Ok(RunReport::new("fuzz", None, outcome, payload, text))
}

pub fn cmd_classify(g: &Multigraph, a: &[String], b: &[String]) -> Result<RunReport, CliError> {
    let (a, b) = (unmarked_set(g, a)?, unmarked_set(g, b)?);
    let class = classify_pair(g, a, b)?;
    let sign = match class.sign {
        PairSign::Positive => "positive",
        PairSign::Negative => "negative",
        PairSign::Neutral => "neutral",
    };
    let contribution = class.contribution();
    let mut exps = vec![0u32; g.edge_count()];
    for i in a.iter().chain(b.iter()) {
        exps[i] += 1;
    }
    let monomial = format_exponents(g, &exps);
    let text = format!(
        "A {} B {}: k1 = {}, k2 = {}, {sign}\n",
        g.format_set(a),
        g.format_set(b),
        class.k1,
        class.k2
    );
    let payload = json!({
        "a": g.set_ids(a),
        "b": g.set_ids(b),
        "k1": class.k1,
        "k2": class.k2,
        "sign": sign,
        "monomial": monomial,
        "contribution": contribution.coeff_strings(),
    });
    Ok(RunReport::new(
        "classify",
        Some(g),
        Outcome::Pass,
        payload,
        text,
    ))
}
