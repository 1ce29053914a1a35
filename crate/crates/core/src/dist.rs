//! Exact finite joint distributions and the information functionals on them.
//!
//! All logarithms are base 2. Terms of the form `0 log 0` are zero, and rows
//! with zero mass are dropped from the support at construction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mass::Mass;
use crate::varset::VarSet;
use crate::{log2, TOLERANCE};

/// A named discrete variable with outcomes `0..arity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub arity: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Variable { name: name.into(), arity }
    }

    /// The group a variable belongs to: the part of its name before the first `.`.
    pub fn group(&self) -> &str {
        self.name.split('.').next().unwrap_or(&self.name)
    }
}

/// A probability table over the full outcome tuples of its variables.
///
/// Rows are kept sorted lexicographically by outcome tuple, so every sum over
/// the support runs in the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    variables: Vec<Variable>,
    rows: Vec<(Vec<usize>, Mass)>,
    probs: Vec<f64>,
}

/// Marginal table keyed by the projected outcome (variables in index order).
pub(crate) type Marginal = BTreeMap<Vec<usize>, f64>;

impl JointDistribution {
    pub fn new(variables: Vec<Variable>, rows: Vec<(Vec<usize>, Mass)>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Argument("a distribution needs at least one variable".into()));
        }
        if variables.len() > 64 {
            return Err(Error::TooManyVariables(variables.len()));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.arity == 0 {
                return Err(Error::Argument(format!("variable `{}` has arity 0", v.name)));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let mut table: BTreeMap<Vec<usize>, Mass> = BTreeMap::new();
        let mut total = 0.0;
        for (row, (outcome, mass)) in rows.into_iter().enumerate() {
            if outcome.len() != variables.len() {
                return Err(Error::WrongRowWidth {
                    row,
                    expected: variables.len(),
                    found: outcome.len(),
                });
            }
            for (v, &x) in variables.iter().zip(&outcome) {
                if x >= v.arity {
                    return Err(Error::OutcomeOutOfRange {
                        variable: v.name.clone(),
                        value: x,
                        arity: v.arity,
                    });
                }
            }
            let p = mass.to_f64();
            if !p.is_finite() {
                return Err(Error::NonFiniteMass { row });
            }
            if p < 0.0 {
                return Err(Error::NegativeMass { row });
            }
            total += p;
            if table.insert(outcome, mass).is_some() {
                return Err(Error::DuplicateOutcome { row });
            }
        }
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized { total });
        }
        let rows: Vec<_> = table.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        if rows.is_empty() {
            return Err(Error::EmptySupport);
        }
        let probs = rows.iter().map(|(_, m)| m.to_f64()).collect();
        Ok(JointDistribution { variables, rows, probs })
    }

    /// Build a distribution whose arities are the largest observed outcome plus one.
    pub fn with_inferred_arity(names: &[&str], rows: Vec<(Vec<usize>, Mass)>) -> Result<Self> {
        let mut arity = alloc::vec![1; names.len()];
        for (outcome, _) in &rows {
            for (a, &x) in arity.iter_mut().zip(outcome) {
                *a = (*a).max(x + 1);
            }
        }
        let variables = names.iter().zip(arity).map(|(n, a)| Variable::new(*n, a)).collect();
        Self::new(variables, rows)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Support rows in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&[usize], Mass)> + '_ {
        self.rows.iter().map(|(o, m)| (o.as_slice(), *m))
    }

    pub fn support_size(&self) -> usize {
        self.rows.len()
    }

    /// True when every support mass is an exact fraction.
    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|(_, m)| m.is_exact())
    }

    pub fn all(&self) -> VarSet {
        VarSet::from_indices(0..self.variables.len())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    pub fn var_set(&self, names: &[&str]) -> Result<VarSet> {
        names.iter().try_fold(VarSet::EMPTY, |acc, n| Ok(acc | VarSet::single(self.index_of(n)?)))
    }

    /// Resolve a name to a variable set: an exact variable name, or a group
    /// name matching every variable called `name.<suffix>`.
    pub fn resolve(&self, name: &str) -> Result<VarSet> {
        if let Ok(i) = self.index_of(name) {
            return Ok(VarSet::single(i));
        }
        let group = VarSet::from_indices(
            self.variables
                .iter()
                .enumerate()
                .filter(|(_, v)| v.name.contains('.') && v.group() == name)
                .map(|(i, _)| i),
        );
        if group.is_empty() {
            Err(Error::UnknownVariable(name.into()))
        } else {
            Ok(group)
        }
    }

    pub fn names(&self, vars: VarSet) -> Vec<&str> {
        vars.iter().map(|i| self.variables[i].name.as_str()).collect()
    }

    pub(crate) fn check_vars(&self, vars: VarSet) -> Result<()> {
        if vars.is_subset(self.all()) {
            Ok(())
        } else {
            Err(Error::UnknownVariable(format!("index set {vars:?}")))
        }
    }

    /// Marginal probabilities of `vars`, keyed by projected outcome.
    pub(crate) fn marginal(&self, vars: VarSet) -> Marginal {
        let idx: Vec<usize> = vars.iter().collect();
        let mut table = Marginal::new();
        for ((outcome, _), &p) in self.rows.iter().zip(&self.probs) {
            let key: Vec<usize> = idx.iter().map(|&i| outcome[i]).collect();
            *table.entry(key).or_insert(0.0) += p;
        }
        table
    }

    /// Distribution over `keep` only, summing out the rest. Exact masses stay exact.
    pub fn marginalize(&self, keep: VarSet) -> Result<JointDistribution> {
        if keep.is_empty() {
            return Err(Error::Argument("marginalize needs at least one variable".into()));
        }
        self.check_vars(keep)?;
        let idx: Vec<usize> = keep.iter().collect();
        let mut table: BTreeMap<Vec<usize>, Mass> = BTreeMap::new();
        for (outcome, mass) in &self.rows {
            let key: Vec<usize> = idx.iter().map(|&i| outcome[i]).collect();
            let slot = table.entry(key).or_default();
            *slot = *slot + *mass;
        }
        let variables = idx.iter().map(|&i| self.variables[i].clone()).collect();
        JointDistribution::new(variables, table.into_iter().collect())
    }

    /// The distribution conditioned on `given = outcome`, over the same variables.
    /// `None` when the conditioning event has zero probability.
    pub fn slice(&self, given: VarSet, outcome: &[usize]) -> Option<JointDistribution> {
        let idx: Vec<usize> = given.iter().collect();
        let matches = |o: &[usize]| idx.iter().zip(outcome).all(|(&i, &x)| o[i] == x);
        let total = self
            .rows
            .iter()
            .filter(|(o, _)| matches(o))
            .fold(Mass::default(), |acc, (_, m)| acc + *m);
        if total.is_zero() {
            return None;
        }
        let rows = self
            .rows
            .iter()
            .filter(|(o, _)| matches(o))
            .map(|(o, m)| (o.clone(), *m / total))
            .collect();
        JointDistribution::new(self.variables.clone(), rows).ok()
    }

    /// Posteriors `p(target | on = o)` for every `o` of positive probability.
    pub fn condition(&self, on: VarSet, target: VarSet) -> Result<ConditionalFamily> {
        self.check_vars(on | target)?;
        if !on.is_disjoint(target) {
            return Err(Error::Argument("conditioning and target sets overlap".into()));
        }
        if target.is_empty() {
            return Err(Error::Argument("empty target set".into()));
        }
        let prior_table = self.marginal(target);
        let outcomes: Vec<Vec<usize>> = prior_table.keys().cloned().collect();
        let prior: Vec<f64> = prior_table.values().copied().collect();
        let on_table = self.marginal(on);
        let joint = self.marginal(on | target);
        let on_pos = positions(on, on | target);
        let target_pos = positions(target, on | target);
        let mut members: Vec<Posterior> = on_table
            .iter()
            .map(|(o, &w)| Posterior {
                outcome: o.clone(),
                weight: w,
                probs: alloc::vec![0.0; outcomes.len()],
            })
            .collect();
        for (key, &p) in &joint {
            let o: Vec<usize> = on_pos.iter().map(|&i| key[i]).collect();
            let t: Vec<usize> = target_pos.iter().map(|&i| key[i]).collect();
            let m = members.binary_search_by(|m| m.outcome.cmp(&o)).expect("marginal key");
            let j = outcomes.binary_search(&t).expect("target key");
            members[m].probs[j] += p / members[m].weight;
        }
        Ok(ConditionalFamily { conditioner: on, target, outcomes, prior, members })
    }

    pub(crate) fn entropy_of(&self, vars: VarSet) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        -self.marginal(vars).values().filter(|&&p| p > 0.0).map(|&p| p * log2(p)).sum::<f64>()
    }

    /// Shannon entropy of the marginal on `vars`, in bits.
    pub fn entropy(&self, vars: VarSet) -> Result<f64> {
        if vars.is_empty() {
            return Err(Error::Argument("entropy of an empty variable set".into()));
        }
        self.check_vars(vars)?;
        Ok(self.entropy_of(vars))
    }

    /// `sum p(a,b) log p(a,b) / (p(a) p(b))` over the marginal on `a ∪ b`.
    ///
    /// Overlapping arguments are allowed; `I(A:A) = H(A)`. Arguments are put in a
    /// canonical order first so the result is exactly symmetric.
    pub(crate) fn information(&self, a: VarSet, b: VarSet) -> f64 {
        let (a, b) = if a.bits() <= b.bits() { (a, b) } else { (b, a) };
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let union = a | b;
        let pa = self.marginal(a);
        let pb = self.marginal(b);
        let a_pos = positions(a, union);
        let b_pos = positions(b, union);
        let mut total = 0.0;
        for (key, &p) in &self.marginal(union) {
            if p <= 0.0 {
                continue;
            }
            let ka: Vec<usize> = a_pos.iter().map(|&i| key[i]).collect();
            let kb: Vec<usize> = b_pos.iter().map(|&i| key[i]).collect();
            total += p * log2(p / (pa[&ka] * pb[&kb]));
        }
        total
    }

    /// `I(A:B)` for variable sets that may overlap, in bits.
    pub fn overlap_mutual_information(&self, a: VarSet, b: VarSet) -> Result<f64> {
        self.check_vars(a | b)?;
        Ok(self.information(a, b))
    }

    /// `I(A:B) = sum_b p(b) D(p(A|b) || p(A))`.
    pub fn mutual_information(&self, a: VarSet, b: VarSet) -> Result<f64> {
        self.check_vars(a | b)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument("mutual information of an empty set".into()));
        }
        if !a.is_disjoint(b) {
            return Err(Error::Argument("mutual information arguments overlap".into()));
        }
        Ok(self.information(a, b))
    }

    /// `I(A:B|C) = I(A:BC) - I(A:C)`.
    pub fn conditional_mutual_information(&self, a: VarSet, b: VarSet, c: VarSet) -> Result<f64> {
        self.check_vars(a | b | c)?;
        if !(a.is_disjoint(b) && a.is_disjoint(c) && b.is_disjoint(c)) {
            return Err(Error::Argument("conditional mutual information arguments overlap".into()));
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument("mutual information of an empty set".into()));
        }
        Ok(self.information(a, b | c) - self.information(a, c))
    }

    /// Co-information `I(S:A|B) - I(S:A)` (synergy minus redundancy).
    pub fn co_information(&self, s: VarSet, a: VarSet, b: VarSet) -> Result<f64> {
        Ok(self.conditional_mutual_information(s, a, b)? - self.mutual_information(s, a)?)
    }
}

/// Indices of `sub`'s variables within the ordered list of `sup`'s variables.
pub(crate) fn positions(sub: VarSet, sup: VarSet) -> Vec<usize> {
    let all: Vec<usize> = sup.iter().collect();
    sub.iter().map(|i| all.iter().position(|&j| j == i).expect("subset")).collect()
}

/// `D(q || p) = sum q(x) log2(q(x) / p(x))`.
///
/// Fails with [`Error::InfiniteDivergence`] when `q` puts mass where `p` has none.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::Argument(format!(
            "distributions have {} and {} outcomes",
            q.len(),
            p.len()
        )));
    }
    let mut total = 0.0;
    for (outcome, (&qi, &pi)) in q.iter().zip(p).enumerate() {
        if qi <= 0.0 {
            continue;
        }
        if pi <= 0.0 {
            return Err(Error::InfiniteDivergence { outcome });
        }
        total += qi * log2(qi / pi);
    }
    Ok(total)
}

/// One posterior of a [`ConditionalFamily`].
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    /// Outcome of the conditioning variables.
    pub outcome: Vec<usize>,
    /// Marginal probability of that outcome.
    pub weight: f64,
    /// Probabilities aligned with [`ConditionalFamily::outcomes`].
    pub probs: Vec<f64>,
}

/// The posteriors of a target set given each positive-probability outcome of a conditioner.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalFamily {
    pub conditioner: VarSet,
    pub target: VarSet,
    /// Target outcomes with positive marginal probability, in lexicographic order.
    pub outcomes: Vec<Vec<usize>>,
    pub prior: Vec<f64>,
    pub members: Vec<Posterior>,
}

impl ConditionalFamily {
    pub fn get(&self, outcome: &[usize]) -> Option<&Posterior> {
        self.members.iter().find(|m| m.outcome == outcome)
    }
}
