//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::{HashMap, VecDeque};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, ToPrimitive, Zero};
use paracel_core::ansatz::{default_grid, identity_check, lowest_part_at_q0, paper_decomps};
use paracel_core::cluster::{
    classify_pair, correlation_difference, m_poly, m_poly_at_one, registry,
    squarefree_full_coeff_at_one,
};
use paracel_core::harness::{
    check_instance, check_seed, exhaustive, fuzz_instances, lambda_case, random_lambda,
    CheckConfig, FuzzConfig,
};
use paracel_core::instances::{self, Instance};
use paracel_core::multigraph::{random_multigraph, submasks};
use paracel_core::paracel::{enumerate_paracels, rhs_theorem, verify_main_theorem};
use paracel_core::polyring::Registry;
use paracel_core::rng::SplitMix64;
use paracel_core::ust::{ust_square_check, UstOutcome};
use paracel_core::{EdgeSet, MPoly, Multigraph, Rational, Universe};
use serde_json::Value;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

/// Best of a few runs, so a cold cache does not decide a timing bound.
fn best_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..runs {
        let start = Instant::now();
        let value = f();
        best = best.min(start.elapsed());
        out = Some(value);
    }
    (out.expect("at least one run"), best)
}

/// Product of variables written as `x_g^2*x_h`; `1` is the empty product.
fn monomial(registry: &Arc<Registry>, text: &str) -> MPoly {
    let mut out = MPoly::one(registry);
    if text == "1" {
        return out;
    }
    for factor in text.split('*') {
        let factor = factor.strip_prefix("x_").expect("variable factor");
        let (name, power) = match factor.split_once('^') {
            Some((n, p)) => (n, p.parse::<u32>().expect("exponent")),
            None => (factor, 1),
        };
        let var = MPoly::var(registry, registry.index_of(name).expect("known edge"));
        for _ in 0..power {
            out = &out * &var;
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let g = instances::k3();
    let ((m, at_one), elapsed) = best_time(5, || {
        let m = m_poly(&g).unwrap();
        let at_one = m.subst_q(&Rational::one());
        (m, at_one)
    });
    let ok = m.to_string() == "x_g*q^3 + x_g^2*q^2"
        && at_one.to_string() == "x_g + x_g^2"
        && elapsed < Duration::from_millis(1);
    verdict(
        ok,
        format!(
            "M = {m}, M(1) = {at_one}, {:.3} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Verdict {
    let g = instances::k4_minus_edge();
    let reg = registry(&g);
    let printed = [
        // first line
        "x_g^2",
        "x_g^2*x_h^2",
        "x_g^2*x_k^2",
        "x_g^2*x_h",
        "x_g^2*x_k",
        "x_g^2*x_h*x_k",
        // x_g (1 + x_h^2 + x_k^2 + x_h + x_k + x_h x_k) and the four after it
        "x_g",
        "x_g*x_h^2",
        "x_g*x_k^2",
        "x_g*x_h",
        "x_g*x_k",
        "x_g*x_h*x_k",
        "x_h*x_g^2",
        "x_k*x_g^2",
        "x_g*x_h",
        "x_g*x_k",
        // last line
        "x_h*x_g^2*x_k^2",
        "x_h*x_g*x_k^2",
        "x_h*x_k*x_g^2",
        "x_h*x_g*x_k",
        "x_k*x_g^2*x_h^2",
        "x_k*x_g*x_h^2",
        "x_k*x_h*x_g^2",
        "x_k*x_g*x_h",
    ];
    assert_eq!(printed.len(), 24);
    let expected = printed
        .iter()
        .fold(MPoly::zero(&reg), |acc, t| &acc + &monomial(&reg, t));
    let ((rhs, check), elapsed) =
        best_time(3, || (rhs_theorem(&g), verify_main_theorem(&g).unwrap()));
    let ok = rhs == expected && check.is_equal() && elapsed < Duration::from_millis(50);
    verdict(
        ok,
        format!(
            "{} distinct terms, theorem {}, {:.2} ms",
            rhs.len(),
            if check.is_equal() { "holds" } else { "fails" },
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

/// Components of `(V, edges)` by breadth-first search.
fn bfs_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adjacent = vec![Vec::new(); n];
    for &(u, v) in edges {
        adjacent[u].push(v);
        adjacent[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adjacent[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

/// `D` by summing over every ordered pair `(A, B)` of subsets of `E^{ef}`,
/// keyed by the full exponent vector (edges, then `q`).
fn naive_difference(g: &Multigraph) -> HashMap<Vec<u32>, i64> {
    let unmarked: Vec<usize> = (0..g.edge_count())
        .filter(|&i| i != g.e() && i != g.f())
        .collect();
    let ends = |i: usize| (g.edge(i).u, g.edge(i).v);
    let subsets: Vec<Vec<usize>> = (0..1u32 << unmarked.len())
        .map(|m| {
            unmarked
                .iter()
                .enumerate()
                .filter(|(b, _)| m >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect()
        })
        .collect();
    let k = |set: &[usize], extra: &[usize]| {
        let edges: Vec<(usize, usize)> = set.iter().chain(extra).map(|&i| ends(i)).collect();
        bfs_components(g.vertex_count(), &edges)
    };
    let mut out: HashMap<Vec<u32>, i64> = HashMap::new();
    for a in &subsets {
        for b in &subsets {
            let mut exps = vec![0u32; g.edge_count() + 1];
            for &i in a.iter().chain(b) {
                exps[i] += 1;
            }
            exps[g.e()] = 1;
            exps[g.f()] = 1;
            let plus = k(a, &[g.e()]) + k(b, &[g.f()]);
            let minus = k(a, &[g.e(), g.f()]) + k(b, &[]);
            let q = g.edge_count();
            exps[q] = plus as u32;
            *out.entry(exps.clone()).or_default() += 1;
            exps[q] = minus as u32;
            *out.entry(exps).or_default() -= 1;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn as_table(p: &MPoly) -> HashMap<Vec<u32>, i64> {
    p.terms()
        .map(|(m, c)| {
            (
                m.exponents().to_vec(),
                c.to_integer().to_i64().expect("small coefficient"),
            )
        })
        .collect()
}

/// `classify_pair` against the BFS counts, and the summed contributions
/// against `M_ef(q)`.
fn classify_agrees(g: &Multigraph, m: &MPoly) -> bool {
    let unmarked = g.unmarked_mask();
    let edges = |mask: u64| -> Vec<(usize, usize)> {
        (0..g.edge_count())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (g.edge(i).u, g.edge(i).v))
            .collect()
    };
    let (e, f) = (1u64 << g.e(), 1u64 << g.f());
    let n = g.vertex_count();
    let mut total: HashMap<Vec<u32>, i64> = HashMap::new();
    for a in submasks(unmarked) {
        for b in submasks(unmarked) {
            let (sa, sb) = (
                EdgeSet::from_mask(a, Universe::Unmarked),
                EdgeSet::from_mask(b, Universe::Unmarked),
            );
            let class = classify_pair(g, sa, sb).unwrap();
            let k1 = bfs_components(n, &edges(a | e)) + bfs_components(n, &edges(b | f));
            let k2 = bfs_components(n, &edges(a | e | f)) + bfs_components(n, &edges(b));
            if (class.k1, class.k2) != (k1, k2) {
                return false;
            }
            let mut exps = vec![0u32; g.edge_count() + 1];
            for i in sa.iter().chain(sb.iter()) {
                exps[i] += 1;
            }
            for (power, c) in class.contribution().coeffs().iter().enumerate() {
                if !c.is_zero() {
                    exps[g.edge_count()] = power as u32;
                    *total.entry(exps.clone()).or_default() += c.to_integer().to_i64().unwrap();
                }
            }
        }
    }
    total.retain(|_, c| *c != 0);
    total == as_table(m)
}

#[derive(Default)]
struct Sweep {
    instances: usize,
    theorem_failures: usize,
    count_failures: usize,
    negative: usize,
    oracle_checked: usize,
    oracle_failures: usize,
    /// Time spent in the per-instance checks, oracles excluded.
    elapsed: Duration,
}

fn sweep() -> Sweep {
    let config = CheckConfig::default();
    let mut out = Sweep::default();
    let mut visit = |g: &Multigraph, seed: u64| {
        let mut rng = SplitMix64::new(seed);
        let start = Instant::now();
        let report = check_instance(g, &mut rng, &config).unwrap();
        out.elapsed += start.elapsed();
        out.instances += 1;
        out.theorem_failures += usize::from(!report.theorem.is_equal());
        out.count_failures += usize::from(!report.squarefree_ok());
        out.negative += usize::from(report.negative.is_some());
        if g.unmarked_count() <= 4 {
            out.oracle_checked += 1;
            let library = as_table(&correlation_difference(g));
            if library != naive_difference(g) || !classify_agrees(g, &report.m) {
                out.oracle_failures += 1;
            }
        }
    };
    for (index, g) in exhaustive(4, 4).enumerate() {
        visit(&g, check_seed(0, index));
    }
    let fuzz = FuzzConfig {
        max_vertices: 5,
        max_edges: 6,
        count: 500,
        seed: 11,
    };
    for (index, (_, g)) in fuzz_instances(&fuzz).unwrap().iter().enumerate() {
        visit(g, check_seed(fuzz.seed, index));
    }
    out
}

fn criterion_3(s: &Sweep) -> Verdict {
    verdict(
        s.theorem_failures == 0 && s.elapsed < Duration::from_secs(120),
        format!(
            "{} instances, {} failures, {:.1} s",
            s.instances,
            s.theorem_failures,
            s.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4(s: &Sweep) -> Verdict {
    let bundled: Vec<(usize, i64)> = Instance::ALL
        .iter()
        .map(|i| {
            let g = i.graph();
            let coeff = squarefree_full_coeff_at_one(&g).unwrap().to_i64().unwrap();
            (enumerate_paracels(&g).len(), coeff)
        })
        .collect();
    let ok = s.count_failures == 0 && bundled == [(1, 1), (3, 3), (2, 2)];
    verdict(
        ok,
        format!(
            "{} mismatches over the sweep, bundled (paracels, coefficient) {bundled:?}",
            s.count_failures
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = SplitMix64::new(5);
    let (mut pairs, mut holds, mut short, mut short_zero) = (0, 0, 0, 0);
    while pairs < 100 {
        let n = rng.range_inclusive(2, 5) as usize;
        let extra = rng.range_inclusive(1, 6) as usize;
        let g = random_multigraph(n, extra, rng.next_u64());
        let mut lambda = random_lambda(&g, &mut rng);
        // every fourth pair forces exponent 2 on an edge parallel to a mark
        if pairs % 4 == 0 {
            let parallel = (0..g.edge_count()).find(|&i| {
                i != g.e() && i != g.f() && (g.are_parallel(i, g.e()) || g.are_parallel(i, g.f()))
            });
            match parallel {
                Some(i) => lambda[i] = 2,
                None => continue,
            }
        }
        let m_at_one = m_poly_at_one(&g).unwrap();
        let case = lambda_case(&g, &m_at_one, &lambda).unwrap();
        pairs += 1;
        holds += usize::from(case.holds());
        if case.short_circuit.is_some() {
            short += 1;
            short_zero += usize::from(case.before == "0" && case.after == "0");
        }
    }
    verdict(
        holds == pairs && short > 0 && short_zero == short,
        format!(
            "{holds}/{pairs} invariant, {short_zero}/{short} parallel cases zero on both sides"
        ),
    )
}

fn root_of(g: &Multigraph) -> Option<MPoly> {
    match ust_square_check(g).unwrap() {
        UstOutcome::Square {
            q_order: 2, root, ..
        } => Some(root),
        _ => None,
    }
}

fn criterion_6() -> Verdict {
    let expected = [
        (Instance::K3, "x_g"),
        (Instance::K4MinusEdge, "x_g*x_k + x_g*x_h"),
        (Instance::K4, "-x_k*x_l + x_g*x_h"),
    ];
    let bundled_ok = expected
        .iter()
        .all(|(i, root)| root_of(&i.graph()).is_some_and(|r| r.to_string() == *root));
    let mut rng = SplitMix64::new(6);
    let (mut checked, mut squares, mut zero) = (0, 0, 0);
    while checked < 100 {
        let n = rng.range_inclusive(2, 5) as usize;
        let extra = rng.range_inclusive(0, 6) as usize;
        let g = random_multigraph(n, extra, rng.next_u64());
        if !g.is_connected() {
            continue;
        }
        checked += 1;
        match ust_square_check(&g).unwrap() {
            UstOutcome::Square { .. } => squares += 1,
            UstOutcome::Zero => zero += 1,
            UstOutcome::NotSquare { .. } | UstOutcome::Anomaly { .. } => {}
        }
    }
    let bad = checked - squares - zero;
    verdict(
        bundled_ok && bad == 0,
        format!(
            "bundled roots {}, random: {squares} square, {zero} zero, {bad} not square",
            if bundled_ok { "match" } else { "differ" }
        ),
    )
}

fn criterion_7() -> Verdict {
    let grid = default_grid();
    let mut details = Vec::new();
    let mut ok = true;
    for instance in Instance::ALL {
        let g = instance.graph();
        let d = paper_decomps(instance);
        let holds = identity_check(&g, &d).unwrap().holds();
        let psd = d.entries.iter().all(|e| e.form.psd_sweep(&grid).passes());
        let empty = EdgeSet::empty(Universe::Unmarked);
        let lowest_ok = match (d.entry(empty, empty), root_of(&g)) {
            (Some(entry), Some(root)) => lowest_part_at_q0(&g, &entry.form) == &root * &root,
            _ => false,
        };
        ok &= holds && psd && lowest_ok;
        details.push(format!(
            "{instance}: {} entries, identity {}, psd {}, q=0 part {}",
            d.len(),
            holds,
            psd,
            if lowest_ok { "matches" } else { "differs" }
        ));
    }
    verdict(ok, details.join("; "))
}

fn criterion_8(s: &Sweep) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_paracel"))
        .args([
            "fuzz",
            "--vertices",
            "5",
            "--edges",
            "6",
            "--count",
            "500",
            "--seed",
            "11",
            "--json",
        ])
        .arg("--replay-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&output.stdout).unwrap_or(Value::Null);
    let cli_ok = output.status.code() == Some(0)
        && report["outcome"] == "pass"
        && report["payload"]["counterexamples"]
            .as_array()
            .is_some_and(Vec::is_empty);
    let replays = std::fs::read_dir(dir.path()).unwrap().count();
    verdict(
        s.negative == 0 && cli_ok && replays == 0,
        format!(
            "{} negative over {} instances x 25 weights x 5 q; cli fuzz exit {:?}, {replays} replay files",
            s.negative,
            s.instances,
            output.status.code()
        ),
    )
}

fn criterion_9(s: &Sweep) -> Verdict {
    verdict(
        s.oracle_failures == 0 && s.oracle_checked > 0,
        format!(
            "{} instances, {} disagreements",
            s.oracle_checked, s.oracle_failures
        ),
    )
}

fn main() -> ExitCode {
    let shared = sweep();
    let results = [
        ("K3 exactness", criterion_1()),
        ("K4-e exactness", criterion_2()),
        ("expansion sweep", criterion_3(&shared)),
        ("paracel count", criterion_4(&shared)),
        ("lambda reduction", criterion_5()),
        ("tree-limit square", criterion_6()),
        ("bundled decompositions", criterion_7()),
        ("positivity sampling", criterion_8(&shared)),
        ("pair-sum oracle", criterion_9(&shared)),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
