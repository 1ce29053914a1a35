//! Shared posteriors: the point of the convex hull of a tuple's posteriors
//! closest to the prior in KL divergence, and the two shared-information
//! quantities built from them.
//!
//! The minimization runs over mixture weights on the closed simplex with
//! away-step Frank–Wolfe and exact line search (bisection on the directional
//! derivative, which is monotone because the objective is convex along any
//! segment).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{kl_divergence, positions, JointDistribution};
use crate::error::{Error, Result};
use crate::log2;
use crate::measures::{bivariate_decomposition, check_redundancy_args, BivariateDecomposition};
use crate::varset::VarSet;

/// Frank–Wolfe gap at which the solver stops, in bits.
pub const GAP_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 20_000;
const LINE_SEARCH_STEPS: usize = 200;

/// Minimizer of `D(sum_i w_i q_i || prior)` over the weight simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedPosterior {
    /// Aligned with the prior's outcomes.
    pub distribution: Vec<f64>,
    pub weights: Vec<f64>,
    /// `D(distribution || prior)` in bits.
    pub divergence: f64,
    /// Frank–Wolfe gap at termination.
    pub gap: f64,
    pub iterations: usize,
    /// True when the posteriors are affinely independent, so no other weights
    /// give the same distribution.
    pub weights_unique: bool,
}

fn validate(posteriors: &[Vec<f64>], prior: &[f64]) -> Result<()> {
    if posteriors.is_empty() {
        return Err(Error::Argument("shared posterior needs at least one posterior".into()));
    }
    let normalized = |p: &[f64]| {
        (p.iter().sum::<f64>() - 1.0).abs() <= crate::TOLERANCE && p.iter().all(|&x| x >= 0.0)
    };
    if !normalized(prior) {
        return Err(Error::Argument("prior is not a probability vector".into()));
    }
    for (i, q) in posteriors.iter().enumerate() {
        if q.len() != prior.len() {
            return Err(Error::Argument(format!("posterior {i} has the wrong number of outcomes")));
        }
        if !normalized(q) {
            return Err(Error::Argument(format!("posterior {i} is not a probability vector")));
        }
    }
    Ok(())
}

fn mixture(vertices: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; vertices[0].len()];
    for (q, &w) in vertices.iter().zip(weights) {
        if w > 0.0 {
            for (ms, &qs) in m.iter_mut().zip(q) {
                *ms += w * qs;
            }
        }
    }
    m
}

/// Pointwise log-ratio `log2(m / p)`; `-inf` where `m` vanishes.
fn log_ratio(m: &[f64], prior: &[f64]) -> Vec<f64> {
    m.iter()
        .zip(prior)
        .map(|(&ms, &ps)| if ms > 0.0 { log2(ms / ps) } else { f64::NEG_INFINITY })
        .collect()
}

/// `<q, g>` skipping outcomes where `q` is zero.
fn pair(q: &[f64], g: &[f64]) -> f64 {
    q.iter().zip(g).filter(|(&qs, _)| qs > 0.0).map(|(&qs, &gs)| qs * gs).sum()
}

/// Derivative of `gamma -> D(m + gamma * dm || prior)`.
fn slope(m: &[f64], dm: &[f64], prior: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    for ((&ms, &ds), &ps) in m.iter().zip(dm).zip(prior) {
        if ds == 0.0 {
            continue;
        }
        let x = ms + gamma * ds;
        if x > 0.0 {
            total += ds * log2(x / ps);
        } else {
            // moving mass onto an empty outcome is infinitely attractive
            return if ds > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
    }
    total
}

fn line_search(m: &[f64], dm: &[f64], prior: &[f64], max_step: f64) -> f64 {
    if slope(m, dm, prior, max_step) <= 0.0 {
        return max_step;
    }
    let (mut lo, mut hi) = (0.0, max_step);
    for _ in 0..LINE_SEARCH_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(m, dm, prior, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn affinely_independent(vectors: &[&Vec<f64>]) -> bool {
    if vectors.len() <= 1 {
        return true;
    }
    let base = vectors[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &vectors[1..] {
        let mut d: Vec<f64> = v.iter().zip(base).map(|(a, b)| a - b).collect();
        for b in &basis {
            let dot: f64 = d.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in d.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = libm::sqrt(d.iter().map(|x| x * x).sum::<f64>());
        if norm < 1e-12 {
            return false;
        }
        basis.push(d.into_iter().map(|x| x / norm).collect());
    }
    true
}

/// The element of the convex hull of `posteriors` closest to `prior` in KL divergence.
///
/// Posteriors that put mass where the prior has none can never be part of a
/// mixture with finite divergence; they get weight zero. If every posterior
/// is like that the problem is infeasible.
pub fn shared_posterior(posteriors: &[Vec<f64>], prior: &[f64]) -> Result<SharedPosterior> {
    validate(posteriors, prior)?;
    let k = posteriors.len();
    let admissible: Vec<bool> = posteriors
        .iter()
        .map(|q| q.iter().zip(prior).all(|(&qs, &ps)| qs == 0.0 || ps > 0.0))
        .collect();
    let active: Vec<usize> = (0..k).filter(|&i| admissible[i]).collect();
    if active.is_empty() {
        return Err(Error::Infeasible {
            detail: "every posterior has mass outside the prior's support".into(),
        });
    }
    // restrict to the prior's support
    let support: Vec<usize> = (0..prior.len()).filter(|&s| prior[s] > 0.0).collect();
    let p: Vec<f64> = support.iter().map(|&s| prior[s]).collect();
    let verts: Vec<Vec<f64>> =
        active.iter().map(|&i| support.iter().map(|&s| posteriors[i][s]).collect()).collect();
    let n = verts.len();

    let mut w = vec![1.0 / n as f64; n];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let m = mixture(&verts, &w);
        let g = log_ratio(&m, &p);
        let grads: Vec<f64> = verts.iter().map(|q| pair(q, &g)).collect();
        let current: f64 = w.iter().zip(&grads).filter(|(&wi, _)| wi > 0.0).map(|(wi, gi)| wi * gi).sum();
        let mut fw = 0;
        for i in 1..n {
            if grads[i] < grads[fw] {
                fw = i;
            }
        }
        gap = current - grads[fw];
        if gap <= GAP_TOLERANCE {
            break;
        }
        iterations += 1;
        let mut away = None;
        for i in 0..n {
            if w[i] > 0.0 && away.is_none_or(|a: usize| grads[i] > grads[a]) {
                away = Some(i);
            }
        }
        let away = away.expect("weights are nonempty");
        let away_gap = grads[away] - current;
        if gap >= away_gap || w[away] >= 1.0 {
            let dm: Vec<f64> = verts[fw].iter().zip(&m).map(|(q, ms)| q - ms).collect();
            let gamma = line_search(&m, &dm, &p, 1.0);
            if gamma >= 1.0 {
                w.iter_mut().for_each(|x| *x = 0.0);
                w[fw] = 1.0;
            } else {
                w.iter_mut().for_each(|x| *x *= 1.0 - gamma);
                w[fw] += gamma;
            }
        } else {
            let max_step = w[away] / (1.0 - w[away]);
            let dm: Vec<f64> = m.iter().zip(&verts[away]).map(|(ms, q)| ms - q).collect();
            let gamma = line_search(&m, &dm, &p, max_step);
            w.iter_mut().for_each(|x| *x *= 1.0 + gamma);
            if gamma >= max_step {
                w[away] = 0.0;
            } else {
                w[away] -= gamma;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x = if *x > 0.0 { *x / total } else { 0.0 });
    }

    let m = mixture(&verts, &w);
    let mut distribution = vec![0.0; prior.len()];
    for (&s, &ms) in support.iter().zip(&m) {
        distribution[s] = ms;
    }
    let mut weights = vec![0.0; k];
    for (&i, &wi) in active.iter().zip(&w) {
        weights[i] = wi;
    }
    let divergence = kl_divergence(&distribution, prior)?;
    let weights_unique = affinely_independent(&posteriors.iter().collect::<Vec<_>>());
    Ok(SharedPosterior { distribution, weights, divergence, gap, iterations, weights_unique })
}

/// Smallest directional derivative of the objective from `weights` toward any
/// vertex; nonnegative (up to solver accuracy) exactly at the optimum.
pub fn kkt_residual(posteriors: &[Vec<f64>], prior: &[f64], weights: &[f64]) -> f64 {
    let m = mixture(posteriors, weights);
    let g = log_ratio(&m, prior);
    let at = pair(&m, &g);
    posteriors.iter().map(|q| pair(q, &g) - at).fold(f64::INFINITY, f64::min)
}

/// One joint outcome of the sources, with its posteriors about the target.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTuple {
    /// Outcome of each source, in source order.
    pub outcomes: Vec<Vec<usize>>,
    pub probability: f64,
    /// `p(S | x_i)` per source, aligned with the configuration's target outcomes.
    pub posteriors: Vec<Vec<f64>>,
    /// `p(s, x_1, ..., x_k)` per target outcome.
    pub joint: Vec<f64>,
}

impl SourceTuple {
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .outcomes
            .iter()
            .map(|o| o.iter().map(|x| format!("{x}")).collect::<Vec<_>>().concat())
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Prior and per-tuple posteriors of a target given several sources.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorConfiguration {
    pub target: VarSet,
    pub sources: Vec<VarSet>,
    /// Target outcomes with positive probability.
    pub outcomes: Vec<Vec<usize>>,
    pub prior: Vec<f64>,
    /// Source tuples of positive probability, in lexicographic order.
    pub tuples: Vec<SourceTuple>,
}

impl PosteriorConfiguration {
    pub fn new(dist: &JointDistribution, target: VarSet, sources: &[VarSet]) -> Result<Self> {
        check_redundancy_args(dist, target, sources)?;
        let prior_table = dist.marginal(target);
        let outcomes: Vec<Vec<usize>> = prior_table.keys().cloned().collect();
        let prior: Vec<f64> = prior_table.values().copied().collect();
        let s_index = |s: &[usize]| outcomes.binary_search_by(|o| o.as_slice().cmp(s)).expect("target outcome");

        // p(S | x_i) for every outcome x_i of every source
        let per_source: Vec<_> = sources
            .iter()
            .map(|&x| {
                let union = target | x;
                let px = dist.marginal(x);
                let (x_pos, s_pos) = (positions(x, union), positions(target, union));
                let mut table: alloc::collections::BTreeMap<Vec<usize>, Vec<f64>> =
                    px.keys().map(|k| (k.clone(), vec![0.0; outcomes.len()])).collect();
                for (key, &p) in &dist.marginal(union) {
                    let xo: Vec<usize> = x_pos.iter().map(|&i| key[i]).collect();
                    let so: Vec<usize> = s_pos.iter().map(|&i| key[i]).collect();
                    table.get_mut(&xo).expect("source outcome")[s_index(&so)] += p / px[&xo];
                }
                table
            })
            .collect();

        let union = sources.iter().fold(VarSet::EMPTY, |acc, &x| acc | x);
        let src_pos: Vec<Vec<usize>> = sources.iter().map(|&x| positions(x, union)).collect();
        let full = union | target;
        let u_pos = positions(union, full);
        let s_pos = positions(target, full);
        let joint_table = dist.marginal(full);
        let mut tuples = Vec::new();
        for (u, &pu) in &dist.marginal(union) {
            let outcomes_i: Vec<Vec<usize>> =
                src_pos.iter().map(|pos| pos.iter().map(|&i| u[i]).collect()).collect();
            let posteriors = outcomes_i
                .iter()
                .zip(&per_source)
                .map(|(o, table)| table[o].clone())
                .collect();
            let mut joint = vec![0.0; outcomes.len()];
            for (key, &p) in &joint_table {
                let uk: Vec<usize> = u_pos.iter().map(|&i| key[i]).collect();
                if &uk == u {
                    let so: Vec<usize> = s_pos.iter().map(|&i| key[i]).collect();
                    joint[s_index(&so)] += p;
                }
            }
            tuples.push(SourceTuple { outcomes: outcomes_i, probability: pu, posteriors, joint });
        }
        Ok(PosteriorConfiguration { target, sources: sources.to_vec(), outcomes, prior, tuples })
    }
}

/// `sum_s p(s,x) log2(shared(s) / p(s))`, or `-inf` at a tuple.
#[derive(Clone, Debug, PartialEq)]
pub enum LogRatio {
    Finite(f64),
    NegInfinite { tuple: String },
}

impl LogRatio {
    pub fn finite(&self) -> Result<f64> {
        match self {
            LogRatio::Finite(v) => Ok(*v),
            LogRatio::NegInfinite { tuple } => Err(Error::NegativeInfinity { tuple: tuple.clone() }),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            LogRatio::Finite(v) => *v,
            LogRatio::NegInfinite { .. } => f64::NEG_INFINITY,
        }
    }
}

/// Per-tuple shared posteriors together with `SI_KL` and `SI_lr`.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub configuration: PosteriorConfiguration,
    pub shared: Vec<SharedPosterior>,
    pub si_kl: f64,
    pub si_lr: LogRatio,
}

pub fn geometry(dist: &JointDistribution, target: VarSet, sources: &[VarSet]) -> Result<Geometry> {
    let configuration = PosteriorConfiguration::new(dist, target, sources)?;
    let prior = &configuration.prior;
    let mut shared = Vec::with_capacity(configuration.tuples.len());
    let mut si_kl = 0.0;
    let mut lr = 0.0;
    let mut infinite = None;
    for t in &configuration.tuples {
        let sp = shared_posterior(&t.posteriors, prior).map_err(|e| match e {
            Error::Infeasible { detail } => Error::Infeasible { detail: format!("tuple {}: {detail}", t.label()) },
            other => other,
        })?;
        si_kl += t.probability * sp.divergence;
        for ((&pj, &ms), &ps) in t.joint.iter().zip(&sp.distribution).zip(prior) {
            if pj <= 0.0 {
                continue;
            }
            if ms <= 0.0 {
                infinite.get_or_insert_with(|| t.label());
            } else {
                lr += pj * log2(ms / ps);
            }
        }
        shared.push(sp);
    }
    let si_lr = match infinite {
        Some(tuple) => LogRatio::NegInfinite { tuple },
        None => LogRatio::Finite(lr),
    };
    Ok(Geometry { configuration, shared, si_kl, si_lr })
}

/// `sum_x p(x) D(shared_x || p(S))`.
pub fn si_kl(dist: &JointDistribution, target: VarSet, sources: &[VarSet]) -> Result<f64> {
    Ok(geometry(dist, target, sources)?.si_kl)
}

/// `sum_{s,x} p(s,x) log2(shared_x(s) / p(s))`.
pub fn si_lr(dist: &JointDistribution, target: VarSet, sources: &[VarSet]) -> Result<LogRatio> {
    Ok(geometry(dist, target, sources)?.si_lr)
}

/// Violations of the two hull-preservation clauses on a computed shared posterior.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaReport {
    /// `(s1, s2, excess)`: every posterior has `q(s1) <= q(s2)` but the shared point does not.
    pub ordering: Vec<(usize, usize, f64)>,
    /// Outcomes that every posterior excludes but the shared point does not.
    pub zeros: Vec<usize>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.ordering.is_empty() && self.zeros.is_empty()
    }
}

/// Check the shared point against the posteriors, allowing `tol` of solver slack.
pub fn verify_hull_lemma(shared: &SharedPosterior, posteriors: &[Vec<f64>], tol: f64) -> LemmaReport {
    let m = &shared.distribution;
    let mut report = LemmaReport::default();
    for s1 in 0..m.len() {
        for s2 in 0..m.len() {
            if s1 != s2 && posteriors.iter().all(|q| q[s1] <= q[s2]) && m[s1] > m[s2] + tol {
                report.ordering.push((s1, s2, m[s1] - m[s2]));
            }
        }
        if posteriors.iter().all(|q| q[s1] == 0.0) && m[s1] > tol {
            report.zeros.push(s1);
        }
    }
    report
}

/// The bivariate decomposition under `SI_KL`, with the checks showing how
/// both geometric quantities break `SI(S:X1;X2) = I(S:X1)` when `S` is a
/// function of `X2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativeSynergyReport {
    pub decomposition: BivariateDecomposition,
    pub si_kl: f64,
    pub si_lr: LogRatio,
    pub mi_s_x1: f64,
    /// `I(S:X1|X2)`; zero when `S` is a function of `X2`.
    pub cmi_s_x1_given_x2: f64,
    pub negative_synergy: bool,
    pub si_kl_below_mi: bool,
    pub si_lr_above_mi: bool,
}

pub fn negative_synergy_demo(
    dist: &JointDistribution,
    s: VarSet,
    x1: VarSet,
    x2: VarSet,
) -> Result<NegativeSynergyReport> {
    let tol = crate::TOLERANCE;
    let g = geometry(dist, s, &[x1, x2])?;
    let kl = crate::measures::FnMeasure::new("si_kl", |_: &JointDistribution, _: VarSet, _: &[VarSet]| Ok(g.si_kl));
    let decomposition = bivariate_decomposition(&kl, dist, s, x1, x2)?;
    let mi_s_x1 = dist.mutual_information(s, x1)?;
    let cmi = dist.conditional_mutual_information(s, x1, x2)?;
    Ok(NegativeSynergyReport {
        decomposition,
        si_kl: g.si_kl,
        negative_synergy: decomposition.ci < -tol,
        si_kl_below_mi: g.si_kl < mi_s_x1 - tol,
        si_lr_above_mi: g.si_lr.value() > mi_s_x1 + tol,
        si_lr: g.si_lr,
        mi_s_x1,
        cmi_s_x1_given_x2: cmi,
    })
}
