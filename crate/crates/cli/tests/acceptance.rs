//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use pidkit::builtin;
use pidkit::formats::{parse_scenario, parse_witness};
use pidkit::render::DecompositionJson;
use pidkit_core::axioms::{
    audit, random_distribution, replay, theorem1_certificate, Axiom, AuditConfig, SearchConfig, Status,
};
use pidkit_core::geometric::{
    geometry, negative_synergy_demo, shared_posterior, verify_hull_lemma, PosteriorConfiguration,
};
use pidkit_core::knowledge::{Agent, Event, KnowledgeModel};
use pidkit_core::lattice::{evaluate_lattice, mobius_invert, Mode};
use pidkit_core::measures::{bivariate_decomposition, i_i, i_min};
use pidkit_core::{JointDistribution, MeasureKind, PiLattice, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name}: got {got:.12}, want {want:.12} (tol {tol:e})"))
}

fn cli(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pidkit::run(std::iter::once("pidkit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn xor_lattice() -> Check {
    let (code, out, err) = cli(&["decompose", "xor.dist", "--measure", "imin", "--self", "--format", "json"]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let doc: DecompositionJson = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let lattice = PiLattice::new(3).map_err(|e| e.to_string())?;
    ensure(doc.nodes.len() == lattice.len(), || format!("{} nodes", doc.nodes.len()))?;
    let two = ["123", "12", "13", "23", "12|13", "12|23", "13|23", "12|13|23"];
    for node in &doc.nodes {
        let cap = if two.contains(&node.label.as_str()) { 2.0 } else { 1.0 };
        let partial = if node.label == "12|13|23" || node.label == "1|2|3" { 1.0 } else { 0.0 };
        close(&format!("I_cap({})", node.label), node.i_cap, cap, 1e-9)?;
        close(&format!("I_partial({})", node.label), node.i_partial.unwrap_or(f64::NAN), partial, 1e-9)?;
    }
    let table = cli(&["decompose", "xor.dist", "--measure", "imin", "--self"]).1;
    ensure(table.lines().any(|l| l.trim() == "1|2|3: 1 (1)"), || "table lacks `1|2|3: 1 (1)`".into())?;
    Ok("18 nodes match".into())
}

fn left_monotonicity() -> Check {
    let case = builtin::load("left-mono").map_err(|e| e.to_string())?;
    let d = &case.dist;
    let s = d.resolve("S").map_err(|e| e.to_string())?;
    let ss = case.target;
    let want_s = 1.0 / 3.0 + (2.0 / 3.0) * (0.75 * 3f64.log2() - 1.0);
    let got_s = i_min(d, s, &case.sources).map_err(|e| e.to_string())?;
    let got_ss = i_min(d, ss, &case.sources).map_err(|e| e.to_string())?;
    close("I_min(S:X1;X2)", got_s, want_s, 1e-7)?;
    close("I_min(SS':X1;X2)", got_ss, 1.0 / 3.0, 1e-7)?;
    let config = AuditConfig::new(&[Axiom::LM], ss, case.sources.clone());
    let imin = &audit(&MeasureKind::Imin, d, &config).map_err(|e| e.to_string())?[0];
    ensure(imin.status == Status::Fail, || format!("I_min LM is {}", imin.status))?;
    close("LM gap", imin.gap, want_s - 1.0 / 3.0, 1e-7)?;
    close("LM gap (rounded)", imin.gap, 0.125815, 5e-7)?;
    let ii = &audit(&MeasureKind::Ii, d, &config).map_err(|e| e.to_string())?[0];
    ensure(ii.status == Status::Pass, || format!("I_I LM is {}", ii.status))?;
    let (code, out, _) = cli(&["axioms", "--builtin", "left-mono", "--measure", "imin"]);
    ensure(code == 1 && out.contains("LM: FAIL gap=0.125815"), || format!("cli exit {code}:\n{out}"))?;
    Ok(format!("gap {:.6}", imin.gap))
}

fn strong_symmetry_certificate() -> Check {
    let case = builtin::load("xor").map_err(|e| e.to_string())?;
    let cert = theorem1_certificate(&case.dist, &case.sources).map_err(|e| e.to_string())?;
    let entropy = |block: u16| (block.count_ones() as f64).min(2.0);
    let mut determined = 0;
    for (i, node) in cert.nodes.iter().enumerate() {
        let blocks = cert.lattice.node(i).blocks();
        let want = match blocks {
            [a] => entropy(*a),
            [a, b] => entropy(*a) + entropy(*b) - entropy(a | b),
            _ => continue,
        };
        ensure(node.is_determined(), || format!("{} is open", node.label))?;
        close(&format!("{} = {}", node.label, node.formula), node.lower, want, 1e-9)?;
        determined += 1;
    }
    let (label, bound) = cert.local_bound.clone().ok_or("no local bound")?;
    ensure(label == "12|13|23", || format!("bound on {label}"))?;
    close("local bound", bound, -1.0, 1e-9)?;
    ensure(cert.infeasible, || "certificate not infeasible".into())?;
    let (code, out, _) = cli(&["axioms", "--builtin", "xor", "--theorem1"]);
    ensure(out.contains("infeasible: I_∂(12|13|23) ≤ -1"), || format!("cli exit {code}:\n{out}"))?;
    Ok(format!("{determined} nodes determined, bound -1"))
}

/// Dense grid over the segment between two posteriors.
fn segment_argmin(q1: &[f64], q2: &[f64], prior: &[f64]) -> Vec<f64> {
    let mut best = (f64::INFINITY, Vec::new());
    for step in 0..=100_000 {
        let lambda = step as f64 * 1e-5;
        let m: Vec<f64> = q1.iter().zip(q2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let d: f64 = m.iter().zip(prior).filter(|(x, _)| **x > 0.0).map(|(x, p)| x * (x / p).log2()).sum();
        if d < best.0 {
            best = (d, m);
        }
    }
    best.1
}

fn geometric_counterexample() -> Check {
    let case = builtin::load("sec7").map_err(|e| e.to_string())?;
    let d = &case.dist;
    let (s, x1, x2) = (case.target, case.sources[0], case.sources[1]);
    let idx = |name: &str| d.index_of(name).unwrap();
    let (is, i1, i2) = (idx("S"), idx("X1"), idx("X2"));

    // oracle: posteriors straight from the rows, shared point from the grid
    let mut joint = [[[0.0f64; 2]; 2]; 2];
    for (row, m) in d.support() {
        joint[row[is]][row[i1]][row[i2]] += m.to_f64();
    }
    let prior: Vec<f64> = (0..2).map(|v| joint[v].iter().flatten().sum()).collect();
    let post = |which: usize, x: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..2)
            .map(|v| if which == 1 { joint[v][x].iter().sum() } else { joint[v][0][x] + joint[v][1][x] })
            .collect();
        let t: f64 = w.iter().sum();
        w.iter().map(|p| p / t).collect()
    };
    let (mut kl, mut lr) = (0.0, 0.0);
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let cell = [joint[0][a][b], joint[1][a][b]];
        let pab: f64 = cell.iter().sum();
        if pab == 0.0 {
            continue;
        }
        let m = segment_argmin(&post(1, a), &post(2, b), &prior);
        kl += pab * m.iter().zip(&prior).filter(|(x, _)| **x > 0.0).map(|(x, p)| x * (x / p).log2()).sum::<f64>();
        lr += (0..2).filter(|&v| cell[v] > 0.0).map(|v| cell[v] * (m[v] / prior[v]).log2()).sum::<f64>();
    }

    let g = geometry(d, s, &[x1, x2]).map_err(|e| e.to_string())?;
    let prior_fw = &g.configuration.prior;
    for (t, sp) in g.configuration.tuples.iter().zip(&g.shared) {
        let matched = t.outcomes[0] == t.outcomes[1];
        let want = if matched { &t.posteriors[0] } else { prior_fw };
        for (got, want) in sp.distribution.iter().zip(want) {
            close(&format!("shared posterior at {}", t.label()), *got, *want, 1e-8)?;
        }
    }
    let si_lr = g.si_lr.finite().map_err(|e| e.to_string())?;
    close("SI_KL vs grid", g.si_kl, kl, 1e-6)?;
    close("SI_lr vs grid", si_lr, lr, 1e-6)?;
    close("SI_KL closed form", g.si_kl, (2.0 / 3.0) * (1.0 - h2(1.0 / 3.0)), 1e-6)?;
    close("SI_lr closed form", si_lr, (2.0 / 3.0) * (4.0f64 / 3.0).log2(), 1e-6)?;
    close("SI_KL rounded", g.si_kl, 0.054469, 1e-6)?;

    let report = negative_synergy_demo(d, s, x1, x2).map_err(|e| e.to_string())?;
    close("I(S:X1)", report.mi_s_x1, 0.081704, 1e-6)?;
    ensure(g.si_kl < report.mi_s_x1 && report.mi_s_x1 < si_lr, || "ordering SI_KL < I(S:X1) < SI_lr".into())?;
    let ci_oracle = d.mutual_information(s, x1 | x2).unwrap() - d.mutual_information(s, x1).unwrap()
        - d.mutual_information(s, x2).unwrap()
        + kl;
    close("CI(SI_KL)", report.decomposition.ci, ci_oracle, 1e-6)?;
    close("CI(SI_KL) rounded", report.decomposition.ci, -0.027235, 1e-6)?;
    ensure(report.negative_synergy && report.decomposition.ci < 0.0, || "synergy not negative".into())?;
    Ok(format!("SI_KL {:.6}, SI_lr {:.6}, CI {:.6}", g.si_kl, si_lr, report.decomposition.ci))
}

fn copy_example() -> Check {
    let case = builtin::load("copy").map_err(|e| e.to_string())?;
    let (d, s) = (&case.dist, case.target);
    let (x1, x2) = (case.sources[0], case.sources[1]);
    close("I_min", i_min(d, s, &case.sources).map_err(|e| e.to_string())?, 1.0, 1e-9)?;
    close("I_I", i_i(d, s, &case.sources).map_err(|e| e.to_string())?, 1.0, 1e-9)?;
    for m in [MeasureKind::Imin, MeasureKind::Ii] {
        let b = bivariate_decomposition(&m, d, s, x1, x2).map_err(|e| e.to_string())?;
        for (name, got, want) in [("SI", b.si, 1.0), ("UI1", b.ui_1, 0.0), ("UI2", b.ui_2, 0.0), ("CI", b.ci, 1.0)] {
            close(&format!("{} {name}", m.key()), got, want, 1e-9)?;
        }
    }
    let scenario = parse_scenario(builtin::SEC8, "sec8.scenario").map_err(|e| e.to_string())?;
    let m = &scenario.model;
    let (_, event) = scenario.events.iter().find(|(n, _)| n == "E1").ok_or("no event E1")?;
    let agents: Vec<usize> = (0..m.agents().len()).collect();
    let sk = m.shared_knowledge(&agents, event).map_err(|e| e.to_string())?;
    let ck = m.common_knowledge(&agents, event).map_err(|e| e.to_string())?;
    ensure(m.labels(&sk) == ["(0,0,00)"], || format!("SK = {:?}", m.labels(&sk)))?;
    ensure(ck.is_empty(), || format!("CK = {:?}", m.labels(&ck)))?;
    let (code, out, _) = cli(&["knowledge", "sec8.scenario"]);
    ensure(code == 0 && out.contains("SK = {(0,0,00)}; CK = {}"), || format!("cli exit {code}:\n{out}"))?;
    Ok("decomposition (1,0,0,1); SK = {(0,0,00)}, CK = {}".into())
}

fn meet_oracle(m: &KnowledgeModel, event: &Event) -> Event {
    let n = m.states().len();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for a in m.agents() {
        for cell in a.cells() {
            let first = *cell.iter().next().unwrap();
            for &s in cell {
                let (x, y) = (find(&mut root, first), find(&mut root, s));
                root[x] = y;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|s| find(&mut root, s)).collect();
    (0..n).filter(|&s| (0..n).all(|t| roots[t] != roots[s] || event.contains(&t))).collect()
}

const PROPERTY_CASES: u64 = 1200;

fn lattice_and_measure_properties(d: &JointDistribution, target: VarSet, sources: &[VarSet]) -> Result<(), String> {
    let config = AuditConfig { tolerance: 1e-7, ..AuditConfig::new(&[Axiom::GP, Axiom::S0, Axiom::I, Axiom::M], target, sources.to_vec()) };
    for m in [MeasureKind::Imin, MeasureKind::Ii] {
        for v in audit(&m, d, &config).map_err(|e| e.to_string())? {
            ensure(v.status != Status::Fail, || format!("{} {}: gap {}", m.key(), v.label(), v.gap))?;
        }
    }
    let lattice = PiLattice::new(sources.len()).map_err(|e| e.to_string())?;
    let table = |m: &MeasureKind| evaluate_lattice(d, &lattice, sources, target, m, Mode::Standard);
    let imin = table(&MeasureKind::Imin).map_err(|e| e.to_string())?;
    let ii = table(&MeasureKind::Ii).map_err(|e| e.to_string())?;
    for (i, (a, b)) in imin.i_cap.iter().zip(&ii.i_cap).enumerate() {
        ensure(*a <= b + 1e-9, || format!("I_min {a} > I_I {b} at {}", lattice.node(i).label()))?;
    }
    for t in [&imin, &ii] {
        let back = mobius_invert(t, &lattice).cumulate(&lattice).unwrap();
        for (x, y) in back.iter().zip(&t.i_cap) {
            close("Möbius round trip", *x, *y, 1e-9)?;
        }
    }
    if sources.len() >= 2 {
        let conf = PosteriorConfiguration::new(d, target, sources).map_err(|e| e.to_string())?;
        for t in &conf.tuples {
            let mut previous = f64::INFINITY;
            for k in 1..=t.posteriors.len() {
                let qs = &t.posteriors[..k];
                let sp = shared_posterior(qs, &conf.prior).map_err(|e| e.to_string())?;
                ensure(sp.divergence <= previous + 1e-7, || format!("shrinkage at {} with {k} sources", t.label()))?;
                let lemma = verify_hull_lemma(&sp, qs, 1e-7);
                ensure(lemma.holds(), || format!("hull lemma at {}: {lemma:?}", t.label()))?;
                previous = sp.divergence;
            }
        }
    }
    Ok(())
}

fn knowledge_properties(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(1..=12);
    let mut m = KnowledgeModel::new((0..n).map(|i| format!("s{i}")).collect()).map_err(|e| e.to_string())?;
    for a in 0..rng.gen_range(1..=3) {
        let obs: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        m.push_agent(Agent::from_observations(format!("a{a}"), &obs));
    }
    let e: Event = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
    let f: Event = e.iter().copied().chain((0..n).filter(|_| rng.gen_bool(0.3))).collect();
    let agents: Vec<usize> = (0..m.agents().len()).collect();
    let sk = m.shared_knowledge(&agents, &e).map_err(|x| x.to_string())?;
    let (ck, steps) = m.common_knowledge_iterations(&agents, &e).map_err(|x| x.to_string())?;
    for &i in &agents {
        let ke = m.knows(i, &e).map_err(|x| x.to_string())?;
        ensure(ke.is_subset(&e), || "K(E) not within E".into())?;
        ensure(ke.is_subset(&m.knows(i, &f).unwrap()), || "K not monotone".into())?;
        ensure(m.knows(i, &ke).unwrap() == ke, || "K not idempotent".into())?;
        ensure(sk.is_subset(&ke), || "SK not within K_i".into())?;
    }
    ensure(ck.is_subset(&sk), || "CK not within SK".into())?;
    ensure(steps <= n, || format!("{steps} iterations for {n} states"))?;
    let all: BTreeSet<usize> = m.all_states();
    ensure(m.common_knowledge(&agents, &all).unwrap() == all, || "CK(all) is not all".into())?;
    ensure(ck == meet_oracle(&m, &e), || "CK disagrees with the meet partition".into())
}

fn property_suites() -> Check {
    for trial in 0..PROPERTY_CASES {
        let mut config = SearchConfig::new(Axiom::GP, 2024, 0);
        config.sources = 1 + (trial % 3) as usize;
        config.max_support = 10;
        config.max_denominator = 20;
        let d = random_distribution(&config, trial).map_err(|e| e.to_string())?;
        let (target, sources) = config.roles();
        lattice_and_measure_properties(&d, target, &sources).map_err(|e| format!("trial {trial}: {e}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for model in 0..PROPERTY_CASES {
        knowledge_properties(&mut rng).map_err(|e| format!("model {model}: {e}"))?;
    }
    Ok(format!("{PROPERTY_CASES} distributions, {PROPERTY_CASES} knowledge models"))
}

fn search_regression() -> Check {
    let path = std::env::temp_dir().join(format!("pidkit-acceptance-{}.dist", std::process::id()));
    let path_s = path.to_str().unwrap();
    let (code, out, err) =
        cli(&["search", "--measure", "imin", "--axiom", "lm", "--seed", "0", "--budget", "100000", "--witness-out", path_s]);
    ensure(code == 1, || format!("search exit {code}: {out}{err}"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&path);
    let file = parse_witness(&text, path_s).map_err(|e| e.to_string())?;
    let first = replay(&file.measure, file.axiom, file.clause, &file.witness, 1e-5).map_err(|e| e.to_string())?;
    let second = replay(&file.measure, file.axiom, file.clause, &file.witness, 1e-5).map_err(|e| e.to_string())?;
    ensure(first.status == Status::Fail && first.gap > 1e-5, || format!("replayed gap {}", first.gap))?;
    ensure(first.gap.to_bits() == second.gap.to_bits(), || "replay differs between runs".into())?;
    ensure(first.gap.to_bits() == file.witness.gap.to_bits(), || {
        format!("recorded {} replayed {}", file.witness.gap, first.gap)
    })?;
    let trial = out.split("trial ").nth(1).and_then(|s| s.split_whitespace().next()).unwrap_or("?");
    Ok(format!("trial {trial}, gap {:?}", first.gap))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("xor lattice reproduction", xor_lattice),
        ("left-monotonicity counterexample", left_monotonicity),
        ("strong-symmetry certificate", strong_symmetry_certificate),
        ("geometric counterexample", geometric_counterexample),
        ("copy example and common knowledge", copy_example),
        ("property suites", property_suites),
        ("violation search regression", search_regression),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
