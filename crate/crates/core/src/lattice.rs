//! The lattice of antichains of nonempty source subsets.
//!
//! An antichain `(B_1, ..., B_k)` lies below `(A_1, ..., A_l)` when every
//! `A_i` contains some `B_j`. Cumulative redundancy values live on the nodes;
//! Möbius inversion turns them into local atoms.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::measures::RedundancyMeasure;
use crate::varset::VarSet;
use crate::TOLERANCE;

/// Largest supported number of sources.
pub const MAX_SOURCES: usize = 4;

/// A family of pairwise incomparable nonempty subsets of `{0, .., ground - 1}`.
///
/// Blocks are bitmasks over source positions, kept sorted by size and then by
/// their elements, so `{3}{1,2}` prints as `3|12`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Antichain {
    ground: usize,
    blocks: Vec<u16>,
}

fn block_cmp(a: &u16, b: &u16) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        let ea = (0..16).filter(|i| a & (1 << i) != 0);
        let eb = (0..16).filter(|i| b & (1 << i) != 0);
        ea.cmp(eb)
    })
}

impl Antichain {
    pub fn new(ground: usize, blocks: impl IntoIterator<Item = u16>) -> Result<Self> {
        if ground == 0 || ground > MAX_SOURCES {
            return Err(Error::Capacity { sources: ground });
        }
        let full = (1u16 << ground) - 1;
        let mut blocks: Vec<u16> = blocks.into_iter().collect();
        if blocks.is_empty() {
            return Err(Error::Argument("an antichain needs at least one block".into()));
        }
        for &b in &blocks {
            if b == 0 || b & !full != 0 {
                return Err(Error::Argument(format!("block {b:#b} is not a nonempty source subset")));
            }
        }
        blocks.sort_by(block_cmp);
        blocks.dedup();
        for (i, &a) in blocks.iter().enumerate() {
            for &b in &blocks[i + 1..] {
                if a & b == a || a & b == b {
                    return Err(Error::Argument("blocks are not pairwise incomparable".into()));
                }
            }
        }
        Ok(Antichain { ground, blocks })
    }

    /// Parse the juxtaposed-index notation, e.g. `12|13` or `1|2|3`.
    pub fn parse(ground: usize, label: &str) -> Result<Self> {
        let blocks = label
            .split('|')
            .map(|part| {
                part.trim().chars().try_fold(0u16, |acc, c| match c.to_digit(10) {
                    Some(d) if d >= 1 && (d as usize) <= ground => Ok(acc | 1 << (d - 1)),
                    _ => Err(Error::Argument(format!("bad antichain label `{label}`"))),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Antichain::new(ground, blocks)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn blocks(&self) -> &[u16] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Map each block to the union of the corresponding source variable sets.
    pub fn to_var_sets(&self, sources: &[VarSet]) -> Vec<VarSet> {
        self.blocks
            .iter()
            .map(|&b| {
                (0..self.ground)
                    .filter(|i| b & (1 << i) != 0)
                    .fold(VarSet::EMPTY, |acc, i| acc | sources[i])
            })
            .collect()
    }

    pub fn label(&self) -> String {
        let mut out = String::new();
        for (k, &b) in self.blocks.iter().enumerate() {
            if k > 0 {
                out.push('|');
            }
            for i in 0..self.ground {
                if b & (1 << i) != 0 {
                    out.push(char::from_digit(i as u32 + 1, 10).unwrap());
                }
            }
        }
        out
    }
}

impl fmt::Debug for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Antichain({})", self.label())
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl PartialOrd for Antichain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical total order used for sorting and hashing, not the lattice order.
impl Ord for Antichain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ground.cmp(&other.ground).then_with(|| {
            let mut a = self.blocks.iter();
            let mut b = other.blocks.iter();
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(_), None) => return Ordering::Greater,
                    (Some(x), Some(y)) => match block_cmp(x, y) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                }
            }
        })
    }
}

/// `lower <= upper` in the redundancy order.
pub fn leq(lower: &Antichain, upper: &Antichain) -> Result<bool> {
    if lower.ground != upper.ground {
        return Err(Error::GroundMismatch);
    }
    Ok(leq_blocks(&lower.blocks, &upper.blocks))
}

fn leq_blocks(lower: &[u16], upper: &[u16]) -> bool {
    upper.iter().all(|&a| lower.iter().any(|&b| b & !a == 0))
}

fn check_sources(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Argument("at least one source is required".into()))
    } else if n > MAX_SOURCES {
        Err(Error::Capacity { sources: n })
    } else {
        Ok(())
    }
}

/// All antichains over `n <= 3` sources by filtering every family of nonempty subsets.
pub fn antichains_by_filter(n: usize) -> Result<Vec<Antichain>> {
    check_sources(n)?;
    if n > 3 {
        return Err(Error::Capacity { sources: n });
    }
    let subsets: Vec<u16> = (1..(1u16 << n)).collect();
    let mut out = Vec::new();
    for family in 1u32..(1 << subsets.len()) {
        let blocks: Vec<u16> = subsets
            .iter()
            .enumerate()
            .filter(|(i, _)| family & (1 << i) != 0)
            .map(|(_, &b)| b)
            .collect();
        let incomparable = blocks.iter().enumerate().all(|(i, &a)| {
            blocks[i + 1..].iter().all(|&b| a & b != a && a & b != b)
        });
        if incomparable {
            out.push(Antichain::new(n, blocks)?);
        }
    }
    out.sort();
    Ok(out)
}

/// All antichains over `n <= 4` sources as the maximal elements of every family.
pub fn antichains_by_maximal(n: usize) -> Result<Vec<Antichain>> {
    check_sources(n)?;
    let subsets: Vec<u16> = (1..(1u16 << n)).collect();
    let mut seen = BTreeSet::new();
    for family in 1u32..(1 << subsets.len()) {
        let members = || {
            subsets.iter().enumerate().filter(move |(i, _)| family & (1 << i) != 0).map(|(_, &b)| b)
        };
        let maximal: Vec<u16> =
            members().filter(|&a| !members().any(|b| b != a && a & b == a)).collect();
        seen.insert(Antichain::new(n, maximal)?);
    }
    Ok(seen.into_iter().collect())
}

/// The partial information lattice over `n` sources.
#[derive(Clone, Debug)]
pub struct PiLattice {
    n: usize,
    nodes: Vec<Antichain>,
    order: Vec<bool>,
    layers: Vec<usize>,
    covers: Vec<(usize, usize)>,
    below: Vec<Vec<usize>>,
}

impl PiLattice {
    /// Enumerate every antichain over `n` sources, `1 <= n <= 4`.
    ///
    /// Nodes are indexed bottom-up: by layer (longest chain from the bottom),
    /// then canonically, so index order is a linear extension of the lattice.
    pub fn new(n: usize) -> Result<Self> {
        check_sources(n)?;
        let raw = if n <= 3 { antichains_by_filter(n)? } else { antichains_by_maximal(n)? };
        let m = raw.len();
        let mut order = vec![false; m * m];
        for i in 0..m {
            for j in 0..m {
                order[i * m + j] = leq_blocks(&raw[i].blocks, &raw[j].blocks);
            }
        }
        // longest chain from the bottom; strict predecessors have fewer
        // elements below them, so process by down-set size
        let mut by_size: Vec<usize> = (0..m).collect();
        by_size.sort_by_key(|&j| (0..m).filter(|&i| order[i * m + j]).count());
        let mut layer = vec![0usize; m];
        for &j in &by_size {
            layer[j] = (0..m)
                .filter(|&i| i != j && order[i * m + j])
                .map(|i| layer[i] + 1)
                .max()
                .unwrap_or(0);
        }
        let mut perm: Vec<usize> = (0..m).collect();
        perm.sort_by(|&a, &b| layer[a].cmp(&layer[b]).then_with(|| raw[a].cmp(&raw[b])));
        let nodes: Vec<Antichain> = perm.iter().map(|&i| raw[i].clone()).collect();
        let layers: Vec<usize> = perm.iter().map(|&i| layer[i]).collect();
        let mut sorted_order = vec![false; m * m];
        for (a, &pa) in perm.iter().enumerate() {
            for (b, &pb) in perm.iter().enumerate() {
                sorted_order[a * m + b] = order[pa * m + pb];
            }
        }
        let lt = |a: usize, b: usize| a != b && sorted_order[a * m + b];
        let mut covers = Vec::new();
        for b in 0..m {
            for a in 0..m {
                if lt(a, b) && !(0..m).any(|c| lt(a, c) && lt(c, b)) {
                    covers.push((a, b));
                }
            }
        }
        let below = (0..m).map(|b| (0..m).filter(|&a| lt(a, b)).collect()).collect();
        Ok(PiLattice { n, nodes, order: sorted_order, layers, covers, below })
    }

    pub fn sources(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Antichain] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Antichain {
        &self.nodes[i]
    }

    pub fn index_of(&self, a: &Antichain) -> Option<usize> {
        self.nodes.iter().position(|n| n == a)
    }

    /// Index of the node with the given label, e.g. `"12|13"`.
    pub fn find(&self, label: &str) -> Option<usize> {
        let a = Antichain::parse(self.n, label).ok()?;
        self.index_of(&a)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order[a * self.nodes.len() + b]
    }

    pub fn layer(&self, i: usize) -> usize {
        self.layers[i]
    }

    pub fn num_layers(&self) -> usize {
        self.layers.iter().max().map_or(0, |l| l + 1)
    }

    /// Cover relations as `(lower, upper)` pairs.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Nodes strictly below `i`.
    pub fn strictly_below(&self, i: usize) -> &[usize] {
        &self.below[i]
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// How the target relates to the sources when filling a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// The target is disjoint from every source.
    Standard,
    /// The target is the union of all sources: the system decomposing itself.
    SelfDecomposition,
}

/// Cumulative (`i_cap`) and, after inversion, local (`i_partial`) values per node.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTable {
    pub target: VarSet,
    pub measure: String,
    pub i_cap: Vec<f64>,
    pub i_partial: Option<Vec<f64>>,
}

/// A node whose local atom is below `-TOLERANCE`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityViolation {
    pub node: usize,
    pub value: f64,
}

impl DecompositionTable {
    pub fn from_values(target: VarSet, measure: impl Into<String>, i_cap: Vec<f64>) -> Self {
        DecompositionTable { target, measure: measure.into(), i_cap, i_partial: None }
    }

    /// Sum of local atoms over each node's down-set.
    pub fn cumulate(&self, lattice: &PiLattice) -> Option<Vec<f64>> {
        let partial = self.i_partial.as_ref()?;
        Some(
            (0..lattice.len())
                .map(|i| {
                    partial[i] + lattice.strictly_below(i).iter().map(|&j| partial[j]).sum::<f64>()
                })
                .collect(),
        )
    }

    /// Nodes whose local atom is negative beyond tolerance.
    pub fn local_positivity_violations(&self) -> Vec<PositivityViolation> {
        check_local_positivity(self)
    }

    /// Cover edges `(lower, upper)` along which `i_cap` decreases by more than `tol`.
    pub fn monotonicity_violations(&self, lattice: &PiLattice, tol: f64) -> Vec<(usize, usize)> {
        lattice
            .covers()
            .iter()
            .copied()
            .filter(|&(lo, hi)| self.i_cap[lo] > self.i_cap[hi] + tol)
            .collect()
    }
}

fn source_union(sources: &[VarSet]) -> VarSet {
    sources.iter().fold(VarSet::EMPTY, |acc, &s| acc | s)
}

/// Check that `sources` and `target` fit `mode` and the lattice.
pub fn check_arguments(
    dist: &JointDistribution,
    lattice: &PiLattice,
    sources: &[VarSet],
    target: VarSet,
    mode: Mode,
) -> Result<()> {
    if sources.len() != lattice.sources() {
        return Err(Error::Argument(format!(
            "{} sources given for a lattice over {}",
            sources.len(),
            lattice.sources()
        )));
    }
    let union = source_union(sources);
    dist.check_vars(union | target)?;
    for (i, s) in sources.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Argument(format!("source {} is empty", i + 1)));
        }
        if sources[..i].iter().any(|t| !t.is_disjoint(*s)) {
            return Err(Error::Argument("sources overlap".into()));
        }
    }
    match mode {
        Mode::Standard if target.is_empty() => Err(Error::Argument("empty target".into())),
        Mode::Standard if !target.is_disjoint(union) => {
            Err(Error::Argument("target overlaps the sources; use self-decomposition".into()))
        }
        Mode::SelfDecomposition if target != union => {
            Err(Error::Argument("self-decomposition targets the union of all sources".into()))
        }
        _ => Ok(()),
    }
}

/// Evaluate a single node.
pub fn evaluate_node(
    dist: &JointDistribution,
    lattice: &PiLattice,
    sources: &[VarSet],
    target: VarSet,
    measure: &dyn RedundancyMeasure,
    node: usize,
) -> Result<f64> {
    let a = lattice.node(node);
    let value = measure.evaluate(dist, target, &a.to_var_sets(sources))?;
    if value.is_nan() {
        return Err(Error::Evaluation { node: a.label(), measure: measure.name().into() });
    }
    Ok(value)
}

/// Fill `i_cap` at every node by calling `measure`.
pub fn evaluate_lattice(
    dist: &JointDistribution,
    lattice: &PiLattice,
    sources: &[VarSet],
    target: VarSet,
    measure: &dyn RedundancyMeasure,
    mode: Mode,
) -> Result<DecompositionTable> {
    check_arguments(dist, lattice, sources, target, mode)?;
    let i_cap = (0..lattice.len())
        .map(|i| evaluate_node(dist, lattice, sources, target, measure, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionTable::from_values(target, measure.name(), i_cap))
}

/// Local atoms by subtracting, bottom-up, the atoms of every strictly lower node.
pub fn mobius_invert(table: &DecompositionTable, lattice: &PiLattice) -> DecompositionTable {
    let mut partial = vec![0.0; lattice.len()];
    for i in 0..lattice.len() {
        let below: f64 = lattice.strictly_below(i).iter().map(|&j| partial[j]).sum();
        partial[i] = table.i_cap[i] - below;
    }
    DecompositionTable { i_partial: Some(partial), ..table.clone() }
}

/// Nodes whose local atom is below `-1e-9`. Empty when the table is not inverted.
pub fn check_local_positivity(table: &DecompositionTable) -> Vec<PositivityViolation> {
    table
        .i_partial
        .iter()
        .flatten()
        .enumerate()
        .filter(|(_, &v)| v < -TOLERANCE)
        .map(|(node, &value)| PositivityViolation { node, value })
        .collect()
}
