//! Redundancy measures and the bivariate decomposition they induce.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dist::{positions, JointDistribution};
use crate::error::{Error, Result};
use crate::geometric;
use crate::log2;
use crate::varset::VarSet;

/// Shared information of a target about a list of source blocks, in bits.
pub trait RedundancyMeasure {
    fn name(&self) -> &str;

    /// `I_cap(target : blocks[0]; ...; blocks[k-1])`.
    fn evaluate(&self, dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64>;
}

impl<M: RedundancyMeasure + ?Sized> RedundancyMeasure for &M {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn evaluate(&self, dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64> {
        (**self).evaluate(dist, target, blocks)
    }
}

/// The measures known by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Williams–Beer `I_min`.
    Imin,
    /// Minimum of the block mutual informations.
    Ii,
    /// KL-averaged shared posterior.
    SiKl,
    /// Log-ratio-averaged shared posterior.
    SiLr,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] =
        [MeasureKind::Imin, MeasureKind::Ii, MeasureKind::SiKl, MeasureKind::SiLr];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "imin" => Ok(MeasureKind::Imin),
            "ii" => Ok(MeasureKind::Ii),
            "si_kl" => Ok(MeasureKind::SiKl),
            "si_lr" => Ok(MeasureKind::SiLr),
            _ => Err(Error::UnknownMeasure(name.into())),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            MeasureKind::Imin => "imin",
            MeasureKind::Ii => "ii",
            MeasureKind::SiKl => "si_kl",
            MeasureKind::SiLr => "si_lr",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl RedundancyMeasure for MeasureKind {
    fn name(&self) -> &str {
        self.key()
    }

    fn evaluate(&self, dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64> {
        match self {
            MeasureKind::Imin => i_min(dist, target, blocks),
            MeasureKind::Ii => i_i(dist, target, blocks),
            MeasureKind::SiKl => geometric::si_kl(dist, target, blocks),
            MeasureKind::SiLr => geometric::si_lr(dist, target, blocks)?.finite(),
        }
    }
}

/// Validate redundancy arguments.
///
/// Blocks must be disjoint from the target, except in self-decomposition
/// usage where every block is contained in the target.
pub fn check_redundancy_args(dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::Argument("redundancy needs at least one source block".into()));
    }
    if target.is_empty() {
        return Err(Error::Argument("empty target".into()));
    }
    let union = blocks.iter().fold(target, |acc, &b| acc | b);
    dist.check_vars(union)?;
    if blocks.iter().any(|b| b.is_empty()) {
        return Err(Error::Argument("empty source block".into()));
    }
    let disjoint = blocks.iter().all(|b| b.is_disjoint(target));
    let contained = blocks.iter().all(|b| b.is_subset(target));
    if disjoint || contained {
        Ok(())
    } else {
        Err(Error::Argument("source blocks partially overlap the target".into()))
    }
}

/// Specific information terms `sum_a p(a,s) log p(a,s) / (p(a) p(s))`, keyed by
/// target outcome.
fn specific_information(dist: &JointDistribution, target: VarSet, block: VarSet) -> BTreeMap<Vec<usize>, f64> {
    let union = target | block;
    let ps = dist.marginal(target);
    let pa = dist.marginal(block);
    let a_pos = positions(block, union);
    let s_pos = positions(target, union);
    let mut out: BTreeMap<Vec<usize>, f64> = ps.keys().map(|k| (k.clone(), 0.0)).collect();
    for (key, &p) in &dist.marginal(union) {
        if p <= 0.0 {
            continue;
        }
        let a: Vec<usize> = a_pos.iter().map(|&i| key[i]).collect();
        let s: Vec<usize> = s_pos.iter().map(|&i| key[i]).collect();
        let term = p * log2(p / (pa[&a] * ps[&s]));
        *out.get_mut(&s).expect("target outcome") += term;
    }
    out
}

/// `I_min` with the minimizing block for each target outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct IminDetail {
    pub value: f64,
    /// `(target outcome, index of the minimizing block)`, lowest index on ties.
    pub argmin: Vec<(Vec<usize>, usize)>,
}

pub fn i_min_detailed(dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<IminDetail> {
    check_redundancy_args(dist, target, blocks)?;
    let per_block: Vec<_> = blocks.iter().map(|&b| specific_information(dist, target, b)).collect();
    let mut value = 0.0;
    let mut argmin = Vec::new();
    for s in per_block[0].keys() {
        let mut best = 0;
        for i in 1..per_block.len() {
            if per_block[i][s] < per_block[best][s] {
                best = i;
            }
        }
        value += per_block[best][s];
        argmin.push((s.clone(), best));
    }
    Ok(IminDetail { value, argmin })
}

/// `sum_s min_i sum_a p(a_i, s) log p(a_i, s) / (p(a_i) p(s))`.
pub fn i_min(dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64> {
    Ok(i_min_detailed(dist, target, blocks)?.value)
}

/// `min_i I(S : A_i)`.
pub fn i_i(dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64> {
    check_redundancy_args(dist, target, blocks)?;
    Ok(blocks
        .iter()
        .map(|&b| dist.information(target, b))
        .fold(f64::INFINITY, f64::min))
}

/// `sum_s p(s) measure(dist | given = s ; target : blocks)`.
///
/// Conditioning outcomes with zero mass are skipped.
pub fn conditional_measure<M: RedundancyMeasure + ?Sized>(
    measure: &M,
    dist: &JointDistribution,
    target: VarSet,
    blocks: &[VarSet],
    given: VarSet,
) -> Result<f64> {
    check_redundancy_args(dist, target, blocks)?;
    dist.check_vars(given)?;
    if given.is_empty() {
        return measure.evaluate(dist, target, blocks);
    }
    if !given.is_disjoint(target) || blocks.iter().any(|b| !b.is_disjoint(given)) {
        return Err(Error::Argument("conditioning set overlaps the target or a block".into()));
    }
    let mut total = 0.0;
    for (outcome, p) in dist.marginal(given) {
        if p <= 0.0 {
            continue;
        }
        let sliced = dist.slice(given, &outcome).expect("positive mass");
        total += p * measure.evaluate(&sliced, target, blocks)?;
    }
    Ok(total)
}

/// Shared, unique and complementary information of two sources.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateDecomposition {
    pub si: f64,
    pub ui_1: f64,
    pub ui_2: f64,
    pub ci: f64,
    /// `|I(S:X1) + UI_2 - I(S:X2) - UI_1|`; zero up to rounding.
    pub consistency_residual: f64,
}

impl BivariateDecomposition {
    pub fn total(&self) -> f64 {
        self.si + self.ui_1 + self.ui_2 + self.ci
    }
}

/// Decompose `I(S : X1 X2)` from the shared information `measure(S : X1; X2)`.
///
/// Negative unique or complementary terms are returned as they are.
pub fn bivariate_decomposition<M: RedundancyMeasure + ?Sized>(
    measure: &M,
    dist: &JointDistribution,
    s: VarSet,
    x1: VarSet,
    x2: VarSet,
) -> Result<BivariateDecomposition> {
    let si = measure.evaluate(dist, s, &[x1, x2])?;
    let i1 = dist.information(s, x1);
    let i2 = dist.information(s, x2);
    let i12 = dist.information(s, x1 | x2);
    let ui_1 = i1 - si;
    let ui_2 = i2 - si;
    let ci = i12 - si - ui_1 - ui_2;
    let consistency_residual = ((i1 + ui_2) - (i2 + ui_1)).abs();
    Ok(BivariateDecomposition { si, ui_1, ui_2, ci, consistency_residual })
}

/// `|I_Co(S:X1:X2) - (CI - SI)|`.
pub fn coinformation_identity_check(
    dist: &JointDistribution,
    s: VarSet,
    x1: VarSet,
    x2: VarSet,
    decomposition: &BivariateDecomposition,
) -> Result<f64> {
    let co = dist.co_information(s, x1, x2)?;
    Ok((co - (decomposition.ci - decomposition.si)).abs())
}

/// A measure described by a name and a closure; handy for plugging in
/// experimental definitions.
pub struct FnMeasure<F> {
    name: String,
    f: F,
}

impl<F> FnMeasure<F>
where
    F: Fn(&JointDistribution, VarSet, &[VarSet]) -> Result<f64>,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnMeasure { name: name.into(), f }
    }
}

impl<F> RedundancyMeasure for FnMeasure<F>
where
    F: Fn(&JointDistribution, VarSet, &[VarSet]) -> Result<f64>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, dist: &JointDistribution, target: VarSet, blocks: &[VarSet]) -> Result<f64> {
        (self.f)(dist, target, blocks)
    }
}
