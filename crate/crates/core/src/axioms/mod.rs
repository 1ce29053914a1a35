//! Executable versions of the properties a redundancy measure may satisfy.
//!
//! | id    | property                                                        |
//! |-------|-----------------------------------------------------------------|
//! | `GP`  | global positivity: `I_cap >= 0`                                 |
//! | `S0`  | weak symmetry in the source blocks                              |
//! | `I`   | self-redundancy: one block gives the mutual information         |
//! | `M`   | monotonicity, with equality when a superset block is appended   |
//! | `LP`  | local positivity of the Möbius atoms                            |
//! | `S1`  | strong symmetry in target and sources together                  |
//! | `LM`  | left monotonicity: enlarging the target never loses redundancy  |
//! | `LC`  | left chain rule                                                 |
//! | `Id2` | identity: `I_cap(A1 A2 : A1; A2) = I(A1 : A2)`                  |

mod search;
mod theorem1;

pub use search::{finish, random_distribution, run_trial, search_violations, shrink, SearchConfig, SearchOutcome, SearchWitness};
pub use theorem1::{theorem1_certificate, CertificateNode, Theorem1Certificate};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::lattice::{check_arguments, evaluate_lattice, mobius_invert, Mode, PiLattice};
use crate::measures::{conditional_measure, MeasureKind, RedundancyMeasure};
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    GP,
    S0,
    I,
    M,
    LP,
    S1,
    LM,
    LC,
    Id2,
}

impl Axiom {
    pub const ALL: [Axiom; 9] =
        [Axiom::GP, Axiom::S0, Axiom::I, Axiom::M, Axiom::LP, Axiom::S1, Axiom::LM, Axiom::LC, Axiom::Id2];

    /// Williams–Beer properties plus local positivity and left monotonicity.
    pub const DEFAULT: [Axiom; 6] = [Axiom::GP, Axiom::S0, Axiom::I, Axiom::M, Axiom::LP, Axiom::LM];

    pub fn id(self) -> &'static str {
        match self {
            Axiom::GP => "GP",
            Axiom::S0 => "S0",
            Axiom::I => "I",
            Axiom::M => "M",
            Axiom::LP => "LP",
            Axiom::S1 => "S1",
            Axiom::LM => "LM",
            Axiom::LC => "LC",
            Axiom::Id2 => "Id2",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAxiom(s.into()))
    }
}

/// Which part of an axiom a verdict covers. Only `M` has two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    Whole,
    Inequality,
    Equality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotApplicable => "N/A",
        })
    }
}

/// Everything needed to rerun a failed check.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub dist: JointDistribution,
    pub measure: String,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    /// The violated relation, written out with its values.
    pub detail: String,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub clause: Clause,
    pub status: Status,
    /// Largest violation found; at most the tolerance when passing.
    pub gap: f64,
    pub checks: usize,
    pub witness: Option<Witness>,
    /// Reason for a not-applicable verdict.
    pub note: Option<String>,
}

impl AxiomVerdict {
    pub fn label(&self) -> String {
        match self.clause {
            Clause::Whole => String::from(self.axiom.id()),
            Clause::Inequality => format!("{} (inequality)", self.axiom),
            Clause::Equality => format!("{} (equality)", self.axiom),
        }
    }
}

/// What to audit: the axioms, the designated target and the sources that
/// span the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub axioms: Vec<Axiom>,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    pub tolerance: f64,
}

impl AuditConfig {
    pub fn new(axioms: &[Axiom], target: VarSet, sources: Vec<VarSet>) -> Self {
        AuditConfig { axioms: axioms.to_vec(), target, sources, tolerance: crate::AXIOM_TOLERANCE }
    }
}

/// Worst violation seen by one check.
struct Tally {
    checks: usize,
    worst: f64,
    detail: String,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, worst: f64::NEG_INFINITY, detail: String::new() }
    }

    fn record(&mut self, gap: f64, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if gap > self.worst || gap.is_nan() {
            self.worst = gap;
            self.detail = detail();
        }
    }
}

struct Auditor<'a> {
    measure: &'a dyn RedundancyMeasure,
    dist: &'a JointDistribution,
    config: &'a AuditConfig,
    lattice: PiLattice,
    mode: Mode,
}

fn mask_label(mask: u16, n: usize) -> String {
    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| char::from_digit(i as u32 + 1, 10).unwrap()).collect()
}

fn list_label(masks: &[u16], n: usize) -> String {
    masks.iter().map(|&m| mask_label(m, n)).collect::<Vec<_>>().join("|")
}

impl<'a> Auditor<'a> {
    fn name(&self, vars: VarSet) -> String {
        self.dist.names(vars).join(",")
    }

    fn blocks(&self, masks: &[u16]) -> Vec<VarSet> {
        masks
            .iter()
            .map(|&b| {
                (0..self.config.sources.len())
                    .filter(|i| b & (1 << i) != 0)
                    .fold(VarSet::EMPTY, |acc, i| acc | self.config.sources[i])
            })
            .collect()
    }

    fn eval(&self, target: VarSet, masks: &[u16]) -> Result<f64> {
        self.measure.evaluate(self.dist, target, &self.blocks(masks))
    }

    fn n(&self) -> usize {
        self.config.sources.len()
    }

    fn node_values(&self, target: VarSet) -> Result<Vec<f64>> {
        self.lattice.nodes().iter().map(|a| self.eval(target, a.blocks())).collect()
    }

    fn target_splits(&self) -> Vec<(VarSet, VarSet)> {
        let t: Vec<usize> = self.config.target.iter().collect();
        (1..(1u64 << t.len()) - 1)
            .map(|m| {
                let s = VarSet::from_indices(t.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, &v)| v));
                (s, self.config.target.difference(s))
            })
            .collect()
    }

    fn run(&self, axiom: Axiom) -> Result<Vec<AxiomVerdict>> {
        let n = self.n();
        let tol = self.config.tolerance;
        let target = self.config.target;
        let not_applicable = |note: &str| {
            Ok(vec![AxiomVerdict {
                axiom,
                clause: Clause::Whole,
                status: Status::NotApplicable,
                gap: 0.0,
                checks: 0,
                witness: None,
                note: Some(note.into()),
            }])
        };
        let mut tallies: Vec<(Clause, Tally)> = Vec::new();
        match axiom {
            Axiom::GP => {
                let mut t = Tally::new();
                for (a, v) in self.lattice.nodes().iter().zip(self.node_values(target)?) {
                    t.record(-v, || format!("I({} : {}) = {v} < 0", self.name(target), a.label()));
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::S0 => {
                let mut t = Tally::new();
                for a in self.lattice.nodes().iter().filter(|a| a.len() > 1) {
                    let base = self.eval(target, a.blocks())?;
                    for perm in permutations(a.blocks()) {
                        let v = self.eval(target, &perm)?;
                        t.record((v - base).abs(), || {
                            format!("I(S : {}) = {base} but I(S : {}) = {v}", a.label(), list_label(&perm, n))
                        });
                    }
                }
                if t.checks == 0 {
                    return not_applicable("no antichain has two blocks");
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::I => {
                let mut t = Tally::new();
                for mask in 1..(1u16 << n) {
                    let block = self.blocks(&[mask])[0];
                    let v = self.eval(target, &[mask])?;
                    let mi = self.dist.information(target, block);
                    t.record((v - mi).abs(), || {
                        format!("I_cap(S : {}) = {v} but I(S : {}) = {mi}", mask_label(mask, n), mask_label(mask, n))
                    });
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::M => {
                let values = self.node_values(target)?;
                let mut ineq = Tally::new();
                let mut eq = Tally::new();
                for (i, a) in self.lattice.nodes().iter().enumerate() {
                    for b in 1..(1u16 << n) {
                        if a.blocks().contains(&b) {
                            continue;
                        }
                        let mut extended = a.blocks().to_vec();
                        extended.push(b);
                        let v = self.eval(target, &extended)?;
                        let base = values[i];
                        let describe = || {
                            format!("I(S : {}) = {v}, I(S : {}) = {base}", list_label(&extended, n), a.label())
                        };
                        ineq.record(v - base, describe);
                        if a.blocks().iter().any(|&x| x & !b == 0) {
                            eq.record((v - base).abs(), describe);
                        }
                    }
                    for j in 0..self.lattice.len() {
                        if j != i && self.lattice.leq(j, i) {
                            let (lo, hi) = (values[j], values[i]);
                            ineq.record(lo - hi, || {
                                format!("{} <= {} but I(S : {}) = {lo} > {hi}", self.lattice.node(j), a, self.lattice.node(j))
                            });
                        }
                    }
                }
                tallies.push((Clause::Inequality, ineq));
                tallies.push((Clause::Equality, eq));
            }
            Axiom::LP => {
                let table = evaluate_lattice(self.dist, &self.lattice, &self.config.sources, target, self.measure, self.mode)?;
                let table = mobius_invert(&table, &self.lattice);
                let mut t = Tally::new();
                for (i, &v) in table.i_partial.as_ref().expect("inverted").iter().enumerate() {
                    t.record(-v, || format!("I_partial(S : {}) = {v}", self.lattice.node(i)));
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::S1 => {
                if self.mode != Mode::Standard {
                    return not_applicable("the target overlaps the sources");
                }
                let mut t = Tally::new();
                for mask in 1..(1u16 << n) {
                    let mut args = vec![target];
                    args.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.config.sources[i]));
                    let mut values = Vec::with_capacity(args.len());
                    for j in 0..args.len() {
                        let rest: Vec<VarSet> = args.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &a)| a).collect();
                        values.push(self.measure.evaluate(self.dist, args[j], &rest)?);
                    }
                    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                    t.record(hi - lo, || {
                        let names: Vec<String> = args.iter().map(|&a| self.name(a)).collect();
                        format!("permuting ({}) gives values from {lo} to {hi}", names.join("; "))
                    });
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::LM | Axiom::LC => {
                if self.mode != Mode::Standard {
                    return not_applicable("the target overlaps the sources");
                }
                if target.len() < 2 {
                    return not_applicable("the target has fewer than two variables to split");
                }
                let whole = self.node_values(target)?;
                let mut t = Tally::new();
                for (s, s_prime) in self.target_splits() {
                    for (i, a) in self.lattice.nodes().iter().enumerate() {
                        let part = self.eval(s, a.blocks())?;
                        if axiom == Axiom::LM {
                            t.record(part - whole[i], || {
                                format!(
                                    "I({} : {a}) = {part} > I({} : {a}) = {}",
                                    self.name(s),
                                    self.name(target),
                                    whole[i]
                                )
                            });
                        } else {
                            let blocks = self.blocks(a.blocks());
                            let cond = conditional_measure(self.measure, self.dist, s_prime, &blocks, s)?;
                            t.record((whole[i] - part - cond).abs(), || {
                                format!(
                                    "I({} : {a}) = {} but I({} : {a}) + I({} : {a} | {}) = {part} + {cond}",
                                    self.name(target),
                                    whole[i],
                                    self.name(s),
                                    self.name(s_prime),
                                    self.name(s)
                                )
                            });
                        }
                    }
                }
                tallies.push((Clause::Whole, t));
            }
            Axiom::Id2 => {
                if n < 2 {
                    return not_applicable("needs at least two sources");
                }
                let mut t = Tally::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let (a, b) = (self.config.sources[i], self.config.sources[j]);
                        let v = self.measure.evaluate(self.dist, a | b, &[a, b])?;
                        let mi = self.dist.information(a, b);
                        t.record((v - mi).abs(), || {
                            format!(
                                "I_cap({} : {}; {}) = {v} but I({} : {}) = {mi}",
                                self.name(a | b),
                                self.name(a),
                                self.name(b),
                                self.name(a),
                                self.name(b)
                            )
                        });
                    }
                }
                tallies.push((Clause::Whole, t));
            }
        }
        Ok(tallies
            .into_iter()
            .map(|(clause, t)| self.verdict(axiom, clause, t, tol))
            .collect())
    }

    fn verdict(&self, axiom: Axiom, clause: Clause, t: Tally, tol: f64) -> AxiomVerdict {
        if t.checks == 0 {
            return AxiomVerdict {
                axiom,
                clause,
                status: Status::NotApplicable,
                gap: 0.0,
                checks: 0,
                witness: None,
                note: Some("no instances to check".into()),
            };
        }
        let failed = t.worst > tol || t.worst.is_nan();
        AxiomVerdict {
            axiom,
            clause,
            status: if failed { Status::Fail } else { Status::Pass },
            gap: t.worst,
            checks: t.checks,
            witness: failed.then(|| Witness {
                dist: self.dist.clone(),
                measure: self.measure.name().into(),
                target: self.config.target,
                sources: self.config.sources.clone(),
                detail: t.detail,
                gap: t.worst,
            }),
            note: None,
        }
    }
}

fn permutations(items: &[u16]) -> Vec<Vec<u16>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Check `measure` against each configured axiom on `dist`.
///
/// The sources span the lattice; the target is either disjoint from them or
/// their union (self-decomposition). Axioms that do not apply to that shape
/// come back as not-applicable verdicts.
pub fn audit(measure: &dyn RedundancyMeasure, dist: &JointDistribution, config: &AuditConfig) -> Result<Vec<AxiomVerdict>> {
    if config.tolerance.is_nan() || config.tolerance <= 0.0 {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let lattice = PiLattice::new(config.sources.len())?;
    let union = config.sources.iter().fold(VarSet::EMPTY, |acc, &s| acc | s);
    let mode = if config.target == union { Mode::SelfDecomposition } else { Mode::Standard };
    check_arguments(dist, &lattice, &config.sources, config.target, mode)?;
    let auditor = Auditor { measure, dist, config, lattice, mode };
    let mut out = Vec::new();
    for &axiom in &config.axioms {
        out.extend(auditor.run(axiom)?);
    }
    Ok(out)
}

/// Rerun the check behind a failed verdict on its witness.
pub fn replay(measure: &dyn RedundancyMeasure, axiom: Axiom, clause: Clause, witness: &Witness, tolerance: f64) -> Result<AxiomVerdict> {
    let config = AuditConfig { axioms: vec![axiom], target: witness.target, sources: witness.sources.clone(), tolerance };
    audit(measure, &witness.dist, &config)?
        .into_iter()
        .find(|v| v.clause == clause || v.clause == Clause::Whole)
        .ok_or_else(|| Error::Argument(format!("{axiom} produced no verdict")))
}

/// A redundancy value a case must reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedValue {
    pub measure: MeasureKind,
    pub target: VarSet,
    pub blocks: Vec<VarSet>,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedVerdict {
    pub measure: MeasureKind,
    pub axiom: Axiom,
    pub status: Status,
}

/// A known distribution with the verdicts and values it must reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleCase {
    pub name: String,
    pub dist: JointDistribution,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    pub expected_verdicts: Vec<ExpectedVerdict>,
    pub expected_values: Vec<ExpectedValue>,
}

/// Outcome of one expectation of a [`CounterexampleCase`].
#[derive(Clone, Debug, PartialEq)]
pub struct CaseCheck {
    pub description: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

impl CounterexampleCase {
    pub fn check(&self) -> Result<Vec<CaseCheck>> {
        let mut out = Vec::new();
        for e in &self.expected_values {
            let actual = e.measure.evaluate(&self.dist, e.target, &e.blocks)?;
            let blocks: Vec<String> = e.blocks.iter().map(|&b| self.dist.names(b).join(",")).collect();
            out.push(CaseCheck {
                description: format!("{}({} : {})", e.measure, self.dist.names(e.target).join(","), blocks.join("; ")),
                expected: format!("{}", e.value),
                actual: format!("{actual}"),
                ok: (actual - e.value).abs() <= e.tolerance,
            });
        }
        for e in &self.expected_verdicts {
            let config = AuditConfig::new(&[e.axiom], self.target, self.sources.clone());
            let verdicts = audit(&e.measure, &self.dist, &config)?;
            let failed = verdicts.iter().any(|v| v.status == Status::Fail);
            let all_na = verdicts.iter().all(|v| v.status == Status::NotApplicable);
            let status = if failed {
                Status::Fail
            } else if all_na {
                Status::NotApplicable
            } else {
                Status::Pass
            };
            out.push(CaseCheck {
                description: format!("{} {}", e.measure, e.axiom),
                expected: format!("{}", e.status),
                actual: format!("{status}"),
                ok: status == e.status,
            });
        }
        Ok(out)
    }
}
