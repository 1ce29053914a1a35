//! Strong symmetry pins down most of the self-decomposition of three sources.
//!
//! With `S = X1 X2 X3` as target, the identity and strong-symmetry properties
//! force `I_cap(S : A) = H(A)` on single blocks and `I_cap(S : A; B) = I(A : B)`
//! on pairs. Only the bottom `1|2|3` and `12|13|23` stay free. Bounding those
//! by monotonicity and positivity gives an upper bound on the local atom of
//! `12|13|23`; a negative bound means no measure has all of these properties.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::lattice::PiLattice;
use crate::varset::VarSet;
use crate::AXIOM_TOLERANCE;

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateNode {
    pub label: String,
    /// `H(12)`, `I(12:13)`, or `?` for a node the properties leave open.
    pub formula: String,
    pub lower: f64,
    pub upper: f64,
}

impl CertificateNode {
    pub fn is_determined(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Clone, Debug)]
pub struct Theorem1Certificate {
    pub lattice: PiLattice,
    pub nodes: Vec<CertificateNode>,
    /// Node whose local atom was bounded, with the bound. Absent for two sources.
    pub local_bound: Option<(String, f64)>,
    /// Local atoms, when every node is determined.
    pub partials: Option<Vec<f64>>,
    pub infeasible: bool,
}

fn block_set(sources: &[VarSet], mask: u16) -> VarSet {
    (0..sources.len()).filter(|i| mask & (1 << i) != 0).fold(VarSet::EMPTY, |acc, i| acc | sources[i])
}

fn block_label(mask: u16, n: usize) -> String {
    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| char::from_digit(i as u32 + 1, 10).unwrap()).collect()
}

fn partials(lattice: &PiLattice, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let below: f64 = lattice.strictly_below(i).iter().map(|&j| out[j]).sum();
        out.push(v - below);
    }
    out
}

/// Build the certificate for two or three disjoint sources whose union is the
/// target of the self-decomposition.
pub fn theorem1_certificate(dist: &JointDistribution, sources: &[VarSet]) -> Result<Theorem1Certificate> {
    let n = sources.len();
    if !(2..=3).contains(&n) {
        return Err(Error::Argument(format!("the certificate covers two or three sources, not {n}")));
    }
    let lattice = PiLattice::new(n)?;
    crate::lattice::check_arguments(
        dist,
        &lattice,
        sources,
        sources.iter().fold(VarSet::EMPTY, |a, &s| a | s),
        crate::lattice::Mode::SelfDecomposition,
    )?;
    let mut nodes: Vec<CertificateNode> = lattice
        .nodes()
        .iter()
        .map(|a| {
            let b = a.blocks();
            let (formula, value) = match b.len() {
                1 => (format!("H({})", block_label(b[0], n)), dist.entropy_of(block_set(sources, b[0]))),
                2 => (
                    format!("I({}:{})", block_label(b[0], n), block_label(b[1], n)),
                    dist.information(block_set(sources, b[0]), block_set(sources, b[1])),
                ),
                _ => (String::from("?"), f64::NAN),
            };
            CertificateNode { label: a.label(), formula, lower: value, upper: value }
        })
        .collect();
    let open: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].formula == "?").collect();
    // upper covers of an open node are always determined for n <= 3
    for &i in &open {
        let upper = lattice.covers().iter().filter(|&&(lo, _)| lo == i).map(|&(_, hi)| nodes[hi].upper);
        let upper = upper.fold(f64::INFINITY, f64::min);
        let lower = lattice.covers().iter().filter(|&&(_, hi)| hi == i).map(|&(lo, _)| nodes[lo].lower);
        let lower = lower.filter(|v| !v.is_nan()).fold(0.0, f64::max);
        nodes[i].upper = upper;
        nodes[i].lower = lower;
    }
    if open.is_empty() {
        let values: Vec<f64> = nodes.iter().map(|c| c.lower).collect();
        let p = partials(&lattice, &values);
        let infeasible = p.iter().any(|&v| v < -AXIOM_TOLERANCE);
        return Ok(Theorem1Certificate { lattice, nodes, local_bound: None, partials: Some(p), infeasible });
    }
    // with three sources the open nodes are the bottom and 12|13|23; the
    // strict down-set of the latter is affine in the bottom value
    let bottom = lattice.bottom();
    let focus = *open.iter().find(|&&i| i != bottom).expect("two open nodes");
    let sum_below = |b: f64| {
        let mut values: Vec<f64> = nodes.iter().map(|c| c.lower).collect();
        values[bottom] = b;
        let p = partials(&lattice, &values);
        lattice.strictly_below(focus).iter().map(|&j| p[j]).sum::<f64>()
    };
    let lo = nodes[bottom].lower;
    let hi = nodes[bottom].upper;
    let min_sum = sum_below(lo).min(sum_below(hi));
    let bound = nodes[focus].upper - min_sum;
    let infeasible = bound < -AXIOM_TOLERANCE || lo > hi + AXIOM_TOLERANCE;
    let label = nodes[focus].label.clone();
    Ok(Theorem1Certificate { lattice, nodes, local_bound: Some((label, bound)), partials: None, infeasible })
}
