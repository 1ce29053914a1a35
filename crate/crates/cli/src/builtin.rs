//! Bundled example files and the expectations attached to them.

use pidkit_core::axioms::{Axiom, CounterexampleCase, ExpectedValue, ExpectedVerdict, Status};
use pidkit_core::{JointDistribution, MeasureKind, VarSet};

use crate::error::{CliError, CliResult};
use crate::formats::{parse_dist, parse_set};

pub const XOR: &str = include_str!("../data/xor.dist");
pub const COPY: &str = include_str!("../data/copy.dist");
pub const LEFT_MONO: &str = include_str!("../data/leftmono.dist");
pub const SEC7: &str = include_str!("../data/sec7.dist");
pub const SEC8: &str = include_str!("../data/sec8.scenario");

/// File names that resolve to bundled data when no such file exists on disk.
pub const FILES: [(&str, &str); 5] = [
    ("xor.dist", XOR),
    ("copy.dist", COPY),
    ("leftmono.dist", LEFT_MONO),
    ("sec7.dist", SEC7),
    ("sec8.scenario", SEC8),
];

/// Names accepted by `--builtin`.
pub const NAMES: [&str; 4] = ["xor", "copy", "left-mono", "sec7"];

/// A bundled distribution with its roles assigned.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub dist: JointDistribution,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    pub self_decomposition: bool,
}

fn roles(name: &'static str, text: &str, target: Option<&str>, sources: &[&str]) -> CliResult<Builtin> {
    let dist = parse_dist(text, name)?.dist;
    let sources = sources.iter().map(|s| parse_set(&dist, s)).collect::<CliResult<Vec<_>>>()?;
    let (target, self_decomposition) = match target {
        Some(t) => (parse_set(&dist, t)?, false),
        None => (sources.iter().fold(VarSet::EMPTY, |a, &s| a | s), true),
    };
    Ok(Builtin { name, dist, target, sources, self_decomposition })
}

pub fn load(name: &str) -> CliResult<Builtin> {
    match name {
        "xor" => roles("xor", XOR, None, &["X1", "X2", "X3"]),
        "copy" => roles("copy", COPY, Some("S"), &["X1", "X2"]),
        "left-mono" => roles("left-mono", LEFT_MONO, Some("S,S'"), &["X1", "X2"]),
        "sec7" => roles("sec7", SEC7, Some("S"), &["X1", "X2"]),
        _ => Err(CliError::Usage(format!("unknown builtin `{name}`; expected one of {}", NAMES.join(", ")))),
    }
}

fn verdict(measure: MeasureKind, axiom: Axiom, status: Status) -> ExpectedVerdict {
    ExpectedVerdict { measure, axiom, status }
}

fn value(measure: MeasureKind, target: VarSet, blocks: &[VarSet], value: f64, tolerance: f64) -> ExpectedValue {
    ExpectedValue { measure, target, blocks: blocks.to_vec(), value, tolerance }
}

/// Binary entropy in bits.
fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// The four bundled distributions with the values and verdicts they reproduce.
pub fn cases() -> CliResult<Vec<CounterexampleCase>> {
    use MeasureKind::*;
    use Status::*;
    let mut out = Vec::new();
    for name in NAMES {
        let b = load(name)?;
        let (t, x) = (b.target, b.sources.clone());
        let (values, verdicts) = match name {
            "xor" => (
                vec![value(Imin, t, &x, 1.0, 1e-9), value(Ii, t, &x, 1.0, 1e-9)],
                vec![verdict(Imin, Axiom::GP, Pass), verdict(Imin, Axiom::LP, Pass), verdict(Imin, Axiom::Id2, Fail)],
            ),
            "copy" => (
                vec![value(Imin, t, &x, 1.0, 1e-9), value(Ii, t, &x, 1.0, 1e-9)],
                vec![verdict(Ii, Axiom::LM, Pass), verdict(Imin, Axiom::Id2, Fail)],
            ),
            "left-mono" => {
                let s = b.dist.var_set(&["S"])?;
                (
                    vec![
                        value(Imin, s, &x, 1.0 / 3.0 + 2.0 / 3.0 * (0.75 * 3f64.log2() - 1.0), 1e-9),
                        value(Imin, t, &x, 1.0 / 3.0, 1e-9),
                    ],
                    vec![verdict(Imin, Axiom::LM, Fail), verdict(Ii, Axiom::LM, Pass)],
                )
            }
            "sec7" => (
                vec![
                    value(SiKl, t, &x, 2.0 / 3.0 * (1.0 - h2(1.0 / 3.0)), 1e-8),
                    value(SiLr, t, &x, 2.0 / 3.0 * (4.0f64 / 3.0).log2(), 1e-8),
                    value(Ii, t, &x, 1.0 - h2(1.0 / 3.0), 1e-9),
                ],
                vec![verdict(SiKl, Axiom::GP, Pass), verdict(SiKl, Axiom::I, Pass)],
            ),
            _ => unreachable!(),
        };
        out.push(CounterexampleCase {
            name: name.into(),
            dist: b.dist,
            target: b.target,
            sources: b.sources,
            expected_verdicts: verdicts,
            expected_values: values,
        });
    }
    Ok(out)
}
