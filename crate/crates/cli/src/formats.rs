//! Text formats: distributions, knowledge scenarios and axiom witnesses.
//!
//! A distribution file has a header of variable names, each optionally
//! `name:arity`, then one row per support point: the outcomes as integers
//! followed by a mass written as `a/b` or as a decimal. `#` starts a comment;
//! `#!key: value` lines carry metadata (used by witness files).
//!
//! ```text
//! X1 X2 S:2
//! 0 0 0 1/2
//! 1 1 1 1/2
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use pidkit_core::axioms::{Axiom, Clause, Witness};
use pidkit_core::knowledge::{Event, KnowledgeModel};
use pidkit_core::{JointDistribution, Mass, MeasureKind, VarSet, Variable};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct DistDocument {
    pub dist: JointDistribution,
    pub directives: Vec<(String, String)>,
}

impl DistDocument {
    pub fn directive(&self, key: &str) -> Option<&str> {
        self.directives.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn parse_mass(token: &str) -> Option<Mass> {
    if let Some((a, b)) = token.split_once('/') {
        let a: i64 = a.trim().parse().ok()?;
        let b: i64 = b.trim().parse().ok()?;
        return (b > 0).then(|| Mass::fraction(a, b));
    }
    if let Ok(n) = token.parse::<i64>() {
        return Some(Mass::fraction(n, 1));
    }
    token.parse::<f64>().ok().map(Mass::Real)
}

fn mass_token(m: Mass) -> String {
    match m {
        Mass::Exact(_) => m.to_string(),
        // shortest representation that parses back to the same float
        Mass::Real(x) => format!("{x:?}"),
    }
}

/// Header line number and `(name, declared arity)` per column.
type Header = (usize, Vec<(String, Option<usize>)>);

pub fn parse_dist(text: &str, origin: &str) -> CliResult<DistDocument> {
    let mut directives = Vec::new();
    let mut header: Option<Header> = None;
    let mut rows: Vec<(Vec<usize>, Mass)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = raw.trim();
        if let Some(d) = trimmed.strip_prefix("#!") {
            let (k, v) = d
                .split_once(':')
                .ok_or_else(|| CliError::parse(origin, line_no, "directive needs `key: value`"))?;
            directives.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((_, vars)) = &header else {
            let mut vars = Vec::new();
            for t in tokens {
                let (name, arity) = match t.split_once(':') {
                    Some((n, a)) => {
                        let a: usize = a
                            .parse()
                            .ok()
                            .filter(|&a| a >= 1)
                            .ok_or_else(|| CliError::parse(origin, line_no, format!("bad arity in `{t}`")))?;
                        (n, Some(a))
                    }
                    None => (t, None),
                };
                if name.is_empty() {
                    return Err(CliError::parse(origin, line_no, "empty variable name"));
                }
                if vars.iter().any(|(v, _)| v == name) {
                    return Err(CliError::parse(origin, line_no, format!("variable `{name}` declared twice")));
                }
                vars.push((name.to_string(), arity));
            }
            header = Some((line_no, vars));
            continue;
        };
        if tokens.len() != vars.len() + 1 {
            return Err(CliError::parse(
                origin,
                line_no,
                format!("expected {} outcomes and a mass, found {} fields", vars.len(), tokens.len()),
            ));
        }
        let mut outcome = Vec::with_capacity(vars.len());
        for (t, (name, arity)) in tokens.iter().zip(vars.iter()) {
            let x: usize = t
                .parse()
                .map_err(|_| CliError::parse(origin, line_no, format!("outcome `{t}` is not a nonnegative integer")))?;
            if let Some(a) = arity {
                if x >= *a {
                    return Err(CliError::parse(
                        origin,
                        line_no,
                        format!("outcome {x} of `{name}` is out of range for arity {a}"),
                    ));
                }
            }
            outcome.push(x);
        }
        let mass_text = tokens[vars.len()];
        let mass = parse_mass(mass_text)
            .ok_or_else(|| CliError::parse(origin, line_no, format!("`{mass_text}` is not a probability")))?;
        let p = mass.to_f64();
        if !p.is_finite() || p < 0.0 {
            return Err(CliError::parse(origin, line_no, format!("mass `{mass_text}` must be finite and nonnegative")));
        }
        if !seen.insert(outcome.clone()) {
            return Err(CliError::parse(origin, line_no, "outcome listed twice"));
        }
        rows.push((outcome, mass));
    }
    let Some((_, vars)) = header else {
        return Err(CliError::parse(origin, text.lines().count().max(1), "missing header line"));
    };
    let variables = vars
        .iter()
        .enumerate()
        .map(|(j, (name, arity))| {
            let observed = rows.iter().map(|(o, _)| o[j] + 1).max().unwrap_or(1);
            Variable::new(name.clone(), arity.unwrap_or(observed))
        })
        .collect();
    let dist = JointDistribution::new(variables, rows)?;
    Ok(DistDocument { dist, directives })
}

/// Write `dist` in the text format, arities explicit, masses verbatim.
pub fn write_dist(dist: &JointDistribution, directives: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in directives {
        let _ = writeln!(out, "#!{k}: {v}");
    }
    let header: Vec<String> = dist.variables().iter().map(|v| format!("{}:{}", v.name, v.arity)).collect();
    let _ = writeln!(out, "{}", header.join(" "));
    for (outcome, m) in dist.support() {
        let cells: Vec<String> = outcome.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{} {}", cells.join(" "), mass_token(m));
    }
    out
}

/// `S.1,S.2` for a set of variables.
pub fn set_text(dist: &JointDistribution, vars: VarSet) -> String {
    dist.names(vars).join(",")
}

/// Resolve a comma-separated list of variable or group names.
pub fn parse_set(dist: &JointDistribution, text: &str) -> CliResult<VarSet> {
    let mut set = VarSet::EMPTY;
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        set = set | dist.resolve(name)?;
    }
    if set.is_empty() {
        return Err(CliError::Usage(format!("`{text}` names no variables")));
    }
    Ok(set)
}

/// Sources separated by `|`, each a comma-separated list: `X1 | Y1,Y2`.
pub fn parse_sources(dist: &JointDistribution, text: &str) -> CliResult<Vec<VarSet>> {
    text.split('|').map(|s| parse_set(dist, s)).collect()
}

fn clause_text(c: Clause) -> &'static str {
    match c {
        Clause::Whole => "whole",
        Clause::Inequality => "inequality",
        Clause::Equality => "equality",
    }
}

fn parse_clause(s: &str) -> Option<Clause> {
    match s {
        "whole" => Some(Clause::Whole),
        "inequality" => Some(Clause::Inequality),
        "equality" => Some(Clause::Equality),
        _ => None,
    }
}

/// A witness read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFile {
    pub measure: MeasureKind,
    pub axiom: Axiom,
    pub clause: Clause,
    pub witness: Witness,
}

pub fn write_witness(witness: &Witness, axiom: Axiom, clause: Clause) -> String {
    let d = &witness.dist;
    let sources: Vec<String> = witness.sources.iter().map(|&s| set_text(d, s)).collect();
    let directives = vec![
        ("measure".to_string(), witness.measure.clone()),
        ("axiom".to_string(), axiom.to_string()),
        ("clause".to_string(), clause_text(clause).to_string()),
        ("target".to_string(), set_text(d, witness.target)),
        ("sources".to_string(), sources.join(" | ")),
        ("gap".to_string(), format!("{:?}", witness.gap)),
        ("detail".to_string(), witness.detail.replace('\n', " ")),
    ];
    write_dist(d, &directives)
}

pub fn parse_witness(text: &str, origin: &str) -> CliResult<WitnessFile> {
    let doc = parse_dist(text, origin)?;
    let need = |key: &str| {
        doc.directive(key)
            .ok_or_else(|| CliError::parse(origin, 1, format!("witness lacks a `#!{key}:` line")))
    };
    let measure = MeasureKind::from_name(need("measure")?)?;
    let axiom: Axiom = need("axiom")?.parse()?;
    let clause = parse_clause(need("clause")?)
        .ok_or_else(|| CliError::parse(origin, 1, "clause must be whole, inequality or equality"))?;
    let target = parse_set(&doc.dist, need("target")?)?;
    let sources = parse_sources(&doc.dist, need("sources")?)?;
    let gap: f64 = need("gap")?.parse().map_err(|_| CliError::parse(origin, 1, "gap is not a number"))?;
    let detail = doc.directive("detail").unwrap_or("").to_string();
    Ok(WitnessFile {
        measure,
        axiom,
        clause,
        witness: Witness { dist: doc.dist, measure: measure.key().into(), target, sources, detail, gap },
    })
}

/// Agents, states and named events for the knowledge operators.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub model: KnowledgeModel,
    pub events: Vec<(String, Event)>,
}

/// Split `{a b} {c}` into cells, or `a b c` into one list.
fn braced_cells(text: &str) -> Result<Vec<Vec<String>>, String> {
    let mut cells = Vec::new();
    let mut current: Option<Vec<String>> = None;
    let mut token = String::new();
    let flush = |token: &mut String, current: &mut Option<Vec<String>>| -> Result<(), String> {
        if token.is_empty() {
            return Ok(());
        }
        match current {
            Some(cell) => cell.push(std::mem::take(token)),
            None => return Err(format!("`{token}` is outside braces")),
        }
        Ok(())
    };
    for c in text.chars() {
        match c {
            '{' => {
                if current.is_some() {
                    return Err("nested `{`".into());
                }
                flush(&mut token, &mut current)?;
                current = Some(Vec::new());
            }
            '}' => {
                flush(&mut token, &mut current)?;
                cells.push(current.take().ok_or("unmatched `}`")?);
            }
            c if c.is_whitespace() => flush(&mut token, &mut current)?,
            c => token.push(c),
        }
    }
    if current.is_some() {
        return Err("unclosed `{`".into());
    }
    flush(&mut token, &mut current)?;
    Ok(cells)
}

pub fn parse_scenario(text: &str, origin: &str) -> CliResult<Scenario> {
    let mut model: Option<KnowledgeModel> = None;
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |m: String| CliError::parse(origin, line_no, m);
        let (head, rest) = content.split_once(':').ok_or_else(|| err("expected `keyword: ...`".into()))?;
        let mut head = head.split_whitespace();
        let keyword = head.next().unwrap_or("");
        let name = head.collect::<Vec<_>>().join(" ");
        match keyword {
            "states" => {
                if model.is_some() {
                    return Err(err("states listed twice".into()));
                }
                let states = rest.split_whitespace().map(String::from).collect();
                model = Some(KnowledgeModel::new(states).map_err(|e| err(e.to_string()))?);
            }
            "agent" | "event" => {
                let m = model.as_mut().ok_or_else(|| err("`states:` must come first".into()))?;
                if name.is_empty() {
                    return Err(err(format!("{keyword} needs a name")));
                }
                let index = |label: &str| m.state_index(label).ok_or_else(|| err(format!("unknown state `{label}`")));
                if keyword == "agent" {
                    let cells = braced_cells(rest)
                        .map_err(&err)?
                        .iter()
                        .map(|c| c.iter().map(|l| index(l)).collect::<CliResult<Vec<_>>>())
                        .collect::<CliResult<Vec<_>>>()?;
                    m.add_partition(name, cells).map_err(|e| err(e.to_string()))?;
                } else {
                    let event = rest.split_whitespace().map(index).collect::<CliResult<Event>>()?;
                    events.push((name, event));
                }
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    let model = model.ok_or_else(|| CliError::parse(origin, 1, "no `states:` line"))?;
    Ok(Scenario { model, events })
}
