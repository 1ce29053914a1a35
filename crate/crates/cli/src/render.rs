//! Plain-text tables, Graphviz DOT and JSON for lattices, decompositions and
//! shared-posterior geometry.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use pidkit_core::geometric::{Geometry, LogRatio};
use pidkit_core::{DecompositionTable, JointDistribution, PiLattice, VarSet};

use crate::error::{CliError, CliResult};
use crate::formats::set_text;

/// Six decimals with trailing zeros dropped; `-0` prints as `0`.
pub fn number(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn vector(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| number(x)).collect();
    format!("({})", parts.join(", "))
}

/// Node indices from the top layer down, canonical order within a layer.
pub fn top_down(lattice: &PiLattice) -> Vec<usize> {
    (0..lattice.num_layers()).rev().flat_map(|l| (0..lattice.len()).filter(move |&i| lattice.layer(i) == l)).collect()
}

fn node_value(table: &DecompositionTable, i: usize) -> String {
    match &table.i_partial {
        Some(p) => format!("{} ({})", number(table.i_cap[i]), number(p[i])),
        None => number(table.i_cap[i]),
    }
}

/// One `label: cap (partial)` line per node, top layer first.
pub fn decomposition_table(lattice: &PiLattice, table: &DecompositionTable) -> String {
    let mut out = String::new();
    for i in top_down(lattice) {
        let _ = writeln!(out, "{}: {}", lattice.node(i), node_value(table, i));
    }
    out
}

pub fn lattice_table(lattice: &PiLattice) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} sources, {} nodes, {} layers", lattice.sources(), lattice.len(), lattice.num_layers());
    for i in top_down(lattice) {
        let below: Vec<String> = lattice
            .covers()
            .iter()
            .filter(|&&(_, hi)| hi == i)
            .map(|&(lo, _)| lattice.node(lo).label())
            .collect();
        let _ = writeln!(out, "[{}] {} > {}", lattice.layer(i), lattice.node(i), below.join(" "));
    }
    out
}

/// Layered digraph, top node first, edges pointing down the order.
pub fn dot(lattice: &PiLattice, table: Option<&DecompositionTable>) -> String {
    let mut out = String::from("digraph pi_lattice {\n  rankdir=TB;\n  node [shape=box, fontname=\"Helvetica\"];\n");
    for layer in (0..lattice.num_layers()).rev() {
        let _ = write!(out, "  {{ rank=same;");
        for i in (0..lattice.len()).filter(|&i| lattice.layer(i) == layer) {
            let label = match table {
                Some(t) => format!("{}\\n{}", lattice.node(i), node_value(t, i)),
                None => lattice.node(i).label(),
            };
            let _ = write!(out, " n{i} [label=\"{label}\"];");
        }
        out.push_str(" }\n");
    }
    for &(lo, hi) in lattice.covers() {
        let _ = writeln!(out, "  n{hi} -> n{lo};");
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub label: String,
    pub layer: usize,
    pub i_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_partial: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub measure: String,
    pub self_decomposition: bool,
    pub target: Vec<String>,
    pub sources: Vec<Vec<String>>,
    pub nodes: Vec<NodeJson>,
}

fn names(dist: &JointDistribution, vars: VarSet) -> Vec<String> {
    dist.names(vars).into_iter().map(String::from).collect()
}

impl DecompositionJson {
    pub fn new(
        dist: &JointDistribution,
        lattice: &PiLattice,
        table: &DecompositionTable,
        sources: &[VarSet],
        self_decomposition: bool,
    ) -> Self {
        DecompositionJson {
            measure: table.measure.clone(),
            self_decomposition,
            target: names(dist, table.target),
            sources: sources.iter().map(|&s| names(dist, s)).collect(),
            nodes: (0..lattice.len())
                .map(|i| NodeJson {
                    label: lattice.node(i).label(),
                    layer: lattice.layer(i),
                    i_cap: table.i_cap[i],
                    i_partial: table.i_partial.as_ref().map(|p| p[i]),
                })
                .collect(),
        }
    }

    /// Rebuild the table; the lattice is recomputed from the source count.
    pub fn to_table(&self, dist: &JointDistribution) -> CliResult<(PiLattice, DecompositionTable)> {
        let lattice = PiLattice::new(self.sources.len())?;
        if lattice.len() != self.nodes.len() {
            return Err(CliError::Mismatch(format!(
                "{} nodes for {} sources; expected {}",
                self.nodes.len(),
                self.sources.len(),
                lattice.len()
            )));
        }
        let mut cap = vec![f64::NAN; lattice.len()];
        let mut partial = vec![f64::NAN; lattice.len()];
        for n in &self.nodes {
            let i = lattice.find(&n.label).ok_or_else(|| CliError::Mismatch(format!("unknown node `{}`", n.label)))?;
            cap[i] = n.i_cap;
            partial[i] = n.i_partial.unwrap_or(f64::NAN);
        }
        let names: Vec<&str> = self.target.iter().map(String::as_str).collect();
        let target = dist.var_set(&names)?;
        let mut table = DecompositionTable::from_values(target, self.measure.clone(), cap);
        if self.nodes.iter().all(|n| n.i_partial.is_some()) {
            table.i_partial = Some(partial);
        }
        Ok((lattice, table))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    pub tuple: String,
    pub probability: f64,
    pub posteriors: Vec<Vec<f64>>,
    pub shared: Vec<f64>,
    pub weights: Vec<f64>,
    pub weights_unique: bool,
    pub divergence: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryJson {
    pub target: Vec<String>,
    pub sources: Vec<Vec<String>>,
    pub target_outcomes: Vec<Vec<usize>>,
    pub prior: Vec<f64>,
    pub si_kl: f64,
    /// Absent when some tuple drives the log ratio to minus infinity.
    pub si_lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si_lr_infinite_at: Option<String>,
    pub tuples: Vec<TupleJson>,
}

impl GeometryJson {
    pub fn new(dist: &JointDistribution, g: &Geometry) -> Self {
        let c = &g.configuration;
        let (si_lr, at) = match &g.si_lr {
            LogRatio::Finite(v) => (Some(*v), None),
            LogRatio::NegInfinite { tuple } => (None, Some(tuple.clone())),
        };
        GeometryJson {
            target: names(dist, c.target),
            sources: c.sources.iter().map(|&s| names(dist, s)).collect(),
            target_outcomes: c.outcomes.clone(),
            prior: c.prior.clone(),
            si_kl: g.si_kl,
            si_lr,
            si_lr_infinite_at: at,
            tuples: c
                .tuples
                .iter()
                .zip(&g.shared)
                .map(|(t, sp)| TupleJson {
                    tuple: t.label(),
                    probability: t.probability,
                    posteriors: t.posteriors.clone(),
                    shared: sp.distribution.clone(),
                    weights: sp.weights.clone(),
                    weights_unique: sp.weights_unique,
                    divergence: sp.divergence,
                    gap: sp.gap,
                    iterations: sp.iterations,
                })
                .collect(),
        }
    }
}

/// Per-tuple text report of the shared posteriors.
pub fn geometry_table(dist: &JointDistribution, g: &Geometry) -> String {
    let c = &g.configuration;
    let mut out = String::new();
    let sources: Vec<String> = c.sources.iter().map(|&s| set_text(dist, s)).collect();
    let _ = writeln!(out, "target {}; sources {}", set_text(dist, c.target), sources.join(" | "));
    let _ = writeln!(out, "prior {}", vector(&c.prior));
    for (t, sp) in c.tuples.iter().zip(&g.shared) {
        let posts: Vec<String> = t.posteriors.iter().map(|q| vector(q)).collect();
        let _ = writeln!(
            out,
            "{} p={}: posteriors {}; shared {}; lambda {}{}; D={}",
            t.label(),
            number(t.probability),
            posts.join(" "),
            vector(&sp.distribution),
            vector(&sp.weights),
            if sp.weights_unique { "" } else { " (not unique)" },
            number(sp.divergence)
        );
    }
    out
}
