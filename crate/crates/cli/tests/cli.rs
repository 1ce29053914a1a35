use std::path::PathBuf;
use std::process::Command;

use pidkit::builtin;
use pidkit::error::{EXIT_DATA, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use pidkit::formats::parse_dist;
use pidkit::render::{DecompositionJson, GeometryJson};
use pidkit_core::lattice::{evaluate_lattice, mobius_invert, Mode};
use pidkit_core::{MeasureKind, PiLattice};

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pidkit::run(std::iter::once("pidkit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("pidkit-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn json_decomposition_round_trips_bit_for_bit() {
    for (file, measure, roles) in [
        ("copy.dist", "ii", vec!["--target", "S"]),
        ("leftmono.dist", "imin", vec!["--target", "S,S'"]),
        ("xor.dist", "imin", vec!["--self"]),
    ] {
        let mut args = vec!["decompose", file, "--measure", measure, "--format", "json"];
        args.extend(roles);
        let (code, out, err) = run(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        let doc: DecompositionJson = serde_json::from_str(&out).unwrap();
        let text = builtin::FILES.iter().find(|(n, _)| *n == file).unwrap().1;
        let dist = parse_dist(text, file).unwrap().dist;
        let (lattice, table) = doc.to_table(&dist).unwrap();

        let sources: Vec<_> =
            doc.sources.iter().map(|s| dist.var_set(&s.iter().map(String::as_str).collect::<Vec<_>>()).unwrap()).collect();
        let mode = if doc.self_decomposition { Mode::SelfDecomposition } else { Mode::Standard };
        let m = MeasureKind::from_name(measure).unwrap();
        let fresh = mobius_invert(&evaluate_lattice(&dist, &lattice, &sources, table.target, &m, mode).unwrap(), &lattice);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&table.i_cap), bits(&fresh.i_cap), "{file}");
        assert_eq!(bits(table.i_partial.as_ref().unwrap()), bits(fresh.i_partial.as_ref().unwrap()), "{file}");
        let again = DecompositionJson::new(&dist, &lattice, &table, &sources, doc.self_decomposition);
        assert_eq!(serde_json::to_string_pretty(&again).unwrap().trim(), out.trim());
    }
}

#[test]
fn constant_target_decomposes_to_zeros() {
    let path = temp_file("constant.dist", "X1 X2 S\n0 0 0 1/3\n0 1 0 1/3\n1 1 0 1/3\n");
    let (code, out, _) = run(&["decompose", path.to_str().unwrap(), "--measure", "imin"]);
    assert_eq!(code, EXIT_OK);
    for line in out.lines().filter(|l| !l.starts_with('#')) {
        assert!(line.ends_with(": 0 (0)"), "{line}");
    }
    assert!(out.contains("# SI=0 UI(X1)=0 UI(X2)=0 CI=0"));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn copy_shared_information_row() {
    let (code, out, _) = run(&["decompose", "copy.dist", "--measure", "ii", "--target", "S"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "1|2: 1 (1)"), "{out}");
    assert!(out.contains("# SI=1 UI(X1)=0 UI(X2)=0 CI=1"), "{out}");
}

#[test]
fn axiom_exit_codes() {
    assert_eq!(run(&["axioms", "--builtin", "copy", "--measure", "ii"]).0, EXIT_OK);
    let (code, out, _) = run(&["axioms", "--builtin", "left-mono", "--measure", "imin"]);
    assert_eq!(code, EXIT_VIOLATION);
    assert!(out.contains("LM: FAIL"));
    let (code, out, _) = run(&["axioms", "--builtin", "left-mono", "--measure", "imin", "--expect-fail"]);
    assert_eq!(code, EXIT_VIOLATION, "{out}");
    let (code, _, err) = run(&["axioms", "--builtin", "copy", "--measure", "ii", "--expect-fail"]);
    assert_eq!(code, EXIT_DATA, "{err}");
    assert_eq!(run(&["axioms", "--builtin", "copy", "--axioms", "GP,XX"]).0, EXIT_USAGE);
    assert_eq!(run(&["axioms", "--builtin", "nothing"]).0, EXIT_USAGE);
}

#[test]
fn usage_and_data_errors() {
    assert_eq!(run(&["decompose", "/nonexistent/missing.dist"]).0, EXIT_DATA);
    assert_eq!(run(&["decompose", "copy.dist", "--measure", "mmi"]).0, EXIT_USAGE);
    assert_eq!(run(&["decompose", "copy.dist", "--target", "Q"]).0, EXIT_USAGE);
    assert_eq!(run(&["lattice", "5"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);

    let path = temp_file("unnormalized.dist", "X1 S\n0 0 1/2\n1 1 1/3\n");
    let (code, _, err) = run(&["decompose", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(!err.is_empty());
    std::fs::write(&path, "X1 S\n0 0 1/2\n1 oops 1/2\n").unwrap();
    let (code, _, err) = run(&["decompose", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains(":3"), "{err}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_pidkit");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["lattice", "3"]), Some(0));
    assert_eq!(status(&["axioms", "--builtin", "left-mono"]), Some(1));
    assert_eq!(status(&["lattice"]), Some(2));
    assert_eq!(status(&["knowledge", "/nonexistent/x.scenario"]), Some(3));
}

#[test]
fn search_is_independent_of_worker_count() {
    let base = ["search", "--measure", "imin", "--axiom", "lm", "--seed", "7", "--budget", "20000"];
    let (c1, one, _) = run(&[&base[..], &["--jobs", "1"]].concat());
    let (c4, four, _) = run(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!((c1, c4), (EXIT_VIOLATION, EXIT_VIOLATION));
    assert_eq!(one, four);
}

#[test]
fn search_witness_replays() {
    let path = std::env::temp_dir().join(format!("pidkit-cli-{}-witness.dist", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, _) = run(&["search", "--measure", "imin", "--axiom", "lm", "--witness-out", p]);
    assert_eq!(code, EXIT_VIOLATION);
    let (code, out, _) = run(&["axioms", "--replay", p]);
    assert_eq!(code, EXIT_VIOLATION);
    assert!(out.contains("bit-identical"), "{out}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn sound_measure_search_finds_nothing() {
    let (code, _, _) = run(&["search", "--measure", "ii", "--axiom", "gp", "--budget", "200"]);
    assert_eq!(code, EXIT_OK);
    let (code, _, _) = run(&["search", "--measure", "ii", "--axiom", "gp", "--budget", "200", "--expect-fail"]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn knowledge_edge_cases() {
    let (code, out, _) = run(&["knowledge", "sec8.scenario", "--event", "all"]);
    assert_eq!(code, EXIT_OK);
    let all = "{(0,0,00), (0,1,01), (1,0,10), (1,1,11)}";
    assert!(out.contains(&format!("SK = {all}; CK = {all}")), "{out}");

    let path = temp_file(
        "twins.scenario",
        "states: a b c d\nagent A: {a b} {c} {d}\nagent B: {a b} {c} {d}\nevent E: a b c\n",
    );
    let (code, out, _) = run(&["knowledge", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("K_A = {a, b, c}"), "{out}");
    assert!(out.contains("SK = {a, b, c}; CK = {a, b, c}"), "{out}");
    std::fs::write(&path, "states: a b\nagent A: {a} {q}\nevent E: a\n").unwrap();
    assert_eq!(run(&["knowledge", path.to_str().unwrap()]).0, EXIT_DATA);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn geometry_outputs() {
    let (code, out, _) = run(&["geometry", "sec7.dist"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("SI_KL=0.054469, SI_lr=0.276692, CI(SI_KL)=-0.027235 NEGATIVE"), "{out}");

    let (code, out, _) = run(&["geometry", "sec7.dist", "--emit-json"]);
    assert_eq!(code, EXIT_OK);
    let g: GeometryJson = serde_json::from_str(&out).unwrap();
    assert_eq!(g.tuples.len(), 4);
    assert!((g.si_kl - 0.054469).abs() < 1e-6);

    let path = temp_file("independent.dist", "X1 X2 S\n0 0 0 1/8\n0 0 1 1/8\n0 1 0 1/8\n0 1 1 1/8\n1 0 0 1/8\n1 0 1 1/8\n1 1 0 1/8\n1 1 1 1/8\n");
    let (code, out, _) = run(&["geometry", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("SI_KL=0, SI_lr=0"), "{out}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn lattice_structure_and_dot() {
    let (code, out, _) = run(&["lattice", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("3 sources, 18 nodes"), "{out}");
    let (_, dot, _) = run(&["lattice", "2", "--format", "dot"]);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), PiLattice::new(2).unwrap().covers().len());
}
