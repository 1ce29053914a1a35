//! Seeded random search for axiom violations, with greedy shrinking.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{audit, Axiom, AuditConfig, Status};
use crate::dist::{JointDistribution, Variable};
use crate::error::{Error, Result};
use crate::mass::Mass;
use crate::measures::RedundancyMeasure;
use crate::varset::VarSet;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub axiom: Axiom,
    pub sources: usize,
    /// Variables in the target; left axioms need at least two.
    pub target_vars: usize,
    /// Each variable is binary or has this arity (2 or 3).
    pub max_arity: usize,
    pub min_support: usize,
    pub max_support: usize,
    pub max_denominator: i64,
    pub seed: u64,
    pub budget: usize,
    /// Smallest gap that counts as a violation.
    pub threshold: f64,
}

impl SearchConfig {
    pub fn new(axiom: Axiom, seed: u64, budget: usize) -> Self {
        let left = matches!(axiom, Axiom::LM | Axiom::LC);
        SearchConfig {
            axiom,
            sources: 2,
            target_vars: if left { 2 } else { 1 },
            max_arity: 3,
            min_support: 3,
            max_support: 8,
            max_denominator: 12,
            seed,
            budget,
            threshold: 1e-5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sources == 0 || self.target_vars == 0 {
            return Err(Error::Argument("need at least one source and one target variable".into()));
        }
        if !(2..=3).contains(&self.max_arity) {
            return Err(Error::Argument("arity must be 2 or 3".into()));
        }
        if self.min_support == 0 || self.min_support > self.max_support {
            return Err(Error::Argument("invalid support range".into()));
        }
        if (self.max_denominator as usize) < self.max_support {
            return Err(Error::Argument("denominator bound below the support size".into()));
        }
        Ok(())
    }

    fn variable_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.sources).map(|i| format!("X{i}")).collect();
        names.extend((0..self.target_vars).map(|i| format!("S{}", "'".repeat(i))));
        names
    }

    /// Target and sources in the generated variable order: sources first.
    pub fn roles(&self) -> (VarSet, Vec<VarSet>) {
        let target = VarSet::from_indices(self.sources..self.sources + self.target_vars);
        (target, (0..self.sources).map(VarSet::single).collect())
    }
}

/// Distribution for trial `trial`; depends only on the seed and the trial index.
pub fn random_distribution(config: &SearchConfig, trial: u64) -> Result<JointDistribution> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let names = config.variable_names();
    let arities: Vec<usize> =
        names.iter().map(|_| if rng.gen_bool(0.5) { 2 } else { config.max_arity }).collect();
    let space: usize = arities.iter().product();
    let hi = config.max_support.min(space);
    let lo = config.min_support.min(hi);
    let rows = rng.gen_range(lo..=hi);
    let denom = rng.gen_range(rows as i64..=config.max_denominator);
    let mut cuts: Vec<i64> = if rows > 1 {
        sample(&mut rng, (denom - 1) as usize, rows - 1).into_iter().map(|c| c as i64 + 1).collect()
    } else {
        Vec::new()
    };
    cuts.sort_unstable();
    cuts.push(denom);
    let mut outcomes: Vec<usize> = sample(&mut rng, space, rows).into_vec();
    outcomes.sort_unstable();
    let mut prev = 0;
    let rows = outcomes
        .into_iter()
        .zip(cuts)
        .map(|(code, cut)| {
            let mut rest = code;
            let tuple = arities
                .iter()
                .map(|&a| {
                    let v = rest % a;
                    rest /= a;
                    v
                })
                .collect();
            let m = Mass::fraction(cut - prev, denom);
            prev = cut;
            (tuple, m)
        })
        .collect();
    let variables = names.into_iter().zip(arities).map(|(n, a)| Variable::new(n, a)).collect();
    JointDistribution::new(variables, rows)
}

fn violation(measure: &dyn RedundancyMeasure, config: &SearchConfig, dist: &JointDistribution) -> Result<Option<f64>> {
    let (target, sources) = config.roles();
    let audit_config = AuditConfig { axioms: vec![config.axiom], target, sources, tolerance: config.threshold };
    let mut worst: Option<f64> = None;
    for v in audit(measure, dist, &audit_config)? {
        if v.status == Status::Fail {
            worst = Some(worst.map_or(v.gap, |w| w.max(v.gap)));
        }
    }
    Ok(worst)
}

/// Gap of the violation found on trial `trial`, if any.
pub fn run_trial(measure: &dyn RedundancyMeasure, config: &SearchConfig, trial: u64) -> Result<Option<f64>> {
    violation(measure, config, &random_distribution(config, trial)?)
}

fn lcm_of_denominators(dist: &JointDistribution) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    dist.support().fold(1i64, |acc, (_, m)| match m {
        Mass::Exact(r) => {
            let d = *r.denom();
            (acc / gcd(acc, d)).saturating_mul(d)
        }
        Mass::Real(_) => i64::MAX,
    })
}

fn rebuild(dist: &JointDistribution, rows: Vec<(Vec<usize>, Mass)>) -> Option<JointDistribution> {
    let total = rows.iter().fold(Mass::default(), |acc, (_, m)| acc + *m);
    if total.is_zero() {
        return None;
    }
    let rows = rows.into_iter().map(|(t, m)| (t, m / total)).collect();
    JointDistribution::new(dist.variables().to_vec(), rows).ok()
}

/// Greedily drop support rows, then snap masses to smaller denominators, as
/// long as the violation stays above the threshold.
pub fn shrink(measure: &dyn RedundancyMeasure, config: &SearchConfig, dist: &JointDistribution) -> Result<JointDistribution> {
    let mut current = dist.clone();
    'outer: loop {
        let rows: Vec<(Vec<usize>, Mass)> = current.support().map(|(t, m)| (t.to_vec(), m)).collect();
        if rows.len() > 1 {
            for skip in 0..rows.len() {
                let kept = rows.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, r)| r.clone()).collect();
                if let Some(candidate) = rebuild(&current, kept) {
                    if violation(measure, config, &candidate)?.is_some() {
                        current = candidate;
                        continue 'outer;
                    }
                }
            }
        }
        let complexity = lcm_of_denominators(&current);
        for d in 2..=config.max_denominator {
            let counts: Vec<(Vec<usize>, Mass)> = rows
                .iter()
                .map(|(t, m)| (t.clone(), Mass::fraction((libm::round(m.to_f64() * d as f64) as i64).max(1), 1)))
                .collect();
            if let Some(candidate) = rebuild(&current, counts) {
                if lcm_of_denominators(&candidate) < complexity && violation(measure, config, &candidate)?.is_some() {
                    current = candidate;
                    continue 'outer;
                }
            }
        }
        return Ok(current);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchWitness {
    pub trial: u64,
    pub original: JointDistribution,
    pub dist: JointDistribution,
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(SearchWitness),
    NotFound { trials: usize },
}

/// Run trials `0..budget` in order and shrink the first violation.
pub fn search_violations(measure: &dyn RedundancyMeasure, config: &SearchConfig) -> Result<SearchOutcome> {
    for trial in 0..config.budget as u64 {
        if run_trial(measure, config, trial)?.is_some() {
            return finish(measure, config, trial);
        }
    }
    Ok(SearchOutcome::NotFound { trials: config.budget })
}

/// Shrink and package the violation found on `trial`.
pub fn finish(measure: &dyn RedundancyMeasure, config: &SearchConfig, trial: u64) -> Result<SearchOutcome> {
    let original = random_distribution(config, trial)?;
    let dist = shrink(measure, config, &original)?;
    let gap = violation(measure, config, &dist)?
        .ok_or_else(|| Error::Argument(format!("trial {trial} does not violate {}", config.axiom)))?;
    let (target, sources) = config.roles();
    Ok(SearchOutcome::Found(SearchWitness { trial, original, dist, target, sources, gap }))
}
