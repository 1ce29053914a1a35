//! Partition models of agents' knowledge.
//!
//! Each agent observes a function of the state; it knows an event at a state
//! when every state consistent with its observation lies in the event.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::varset::VarSet;

/// A set of state indices.
pub type Event = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    /// Cell index of every state.
    cell_of: Vec<usize>,
    cells: Vec<Event>,
}

impl Agent {
    /// An agent from its observation of each state; states with equal
    /// observations share a cell.
    pub fn from_observations<T: Ord + Clone>(name: impl Into<String>, observations: &[T]) -> Self {
        let distinct: BTreeSet<T> = observations.iter().cloned().collect();
        let distinct: Vec<T> = distinct.into_iter().collect();
        let cell_of: Vec<usize> =
            observations.iter().map(|o| distinct.binary_search(o).expect("observed")).collect();
        let mut cells = alloc::vec![Event::new(); distinct.len()];
        for (s, &c) in cell_of.iter().enumerate() {
            cells[c].insert(s);
        }
        Agent { name: name.into(), cell_of, cells }
    }

    pub fn cells(&self) -> &[Event] {
        &self.cells
    }

    pub fn cell_of(&self, state: usize) -> &Event {
        &self.cells[self.cell_of[state]]
    }
}

/// Finite states plus one partition per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeModel {
    states: Vec<String>,
    agents: Vec<Agent>,
}

impl KnowledgeModel {
    pub fn new(states: Vec<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Argument("a knowledge model needs at least one state".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::Argument(format!("state `{s}` listed twice")));
            }
        }
        Ok(KnowledgeModel { states, agents: Vec::new() })
    }

    /// Add an agent given its partition as lists of state indices.
    pub fn add_partition(&mut self, name: impl Into<String>, cells: Vec<Vec<usize>>) -> Result<usize> {
        let name = name.into();
        let mut owner = alloc::vec![None; self.states.len()];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Argument(format!("agent `{name}` has an empty cell")));
            }
            for &s in cell {
                match owner.get_mut(s) {
                    None => return Err(Error::Argument(format!("agent `{name}`: unknown state {s}"))),
                    Some(Some(_)) => {
                        return Err(Error::Argument(format!(
                            "agent `{name}`: state `{}` is in two cells",
                            self.states[s]
                        )))
                    }
                    Some(slot) => *slot = Some(c),
                }
            }
        }
        let cell_of = owner
            .into_iter()
            .enumerate()
            .map(|(s, c)| {
                c.ok_or_else(|| {
                    Error::Argument(format!("agent `{name}`: state `{}` is in no cell", self.states[s]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.push_agent(Agent::from_observations(name, &cell_of));
        Ok(self.agents.len() - 1)
    }

    pub fn push_agent(&mut self, agent: Agent) {
        assert_eq!(agent.cell_of.len(), self.states.len(), "agent over a different state set");
        self.agents.push(agent);
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> Result<&Agent> {
        self.agents.get(i).ok_or(Error::UnknownAgent(i))
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn all_states(&self) -> Event {
        (0..self.states.len()).collect()
    }

    pub fn labels(&self, event: &Event) -> Vec<&str> {
        event.iter().map(|&s| self.states[s].as_str()).collect()
    }

    fn check_event(&self, event: &Event) -> Result<()> {
        match event.iter().find(|&&s| s >= self.states.len()) {
            Some(s) => Err(Error::Argument(format!("event contains unknown state {s}"))),
            None => Ok(()),
        }
    }

    /// `K_i(E)`: states whose cell for agent `i` lies inside `E`.
    pub fn knows(&self, agent: usize, event: &Event) -> Result<Event> {
        self.check_event(event)?;
        let a = self.agent(agent)?;
        Ok(a.cells.iter().filter(|c| c.is_subset(event)).flatten().copied().collect())
    }

    /// `SK(E)`: the intersection of `K_i(E)` over `agents`.
    pub fn shared_knowledge(&self, agents: &[usize], event: &Event) -> Result<Event> {
        let (first, rest) = agents
            .split_first()
            .ok_or_else(|| Error::Argument("shared knowledge needs at least one agent".into()))?;
        let mut out = self.knows(*first, event)?;
        for &i in rest {
            let k = self.knows(i, event)?;
            out.retain(|s| k.contains(s));
        }
        Ok(out)
    }

    /// `CK(E)` by iterating `SK` to its fixed point, with the number of
    /// applications needed to reach it.
    pub fn common_knowledge_iterations(&self, agents: &[usize], event: &Event) -> Result<(Event, usize)> {
        let mut current = self.shared_knowledge(agents, event)?;
        let mut steps = 1;
        loop {
            let next = self.shared_knowledge(agents, &current)?;
            if next == current {
                return Ok((current, steps));
            }
            current = next;
            steps += 1;
        }
    }

    pub fn common_knowledge(&self, agents: &[usize], event: &Event) -> Result<Event> {
        Ok(self.common_knowledge_iterations(agents, event)?.0)
    }

    /// Heuristic size of shared knowledge: `log2(|states| / |E|)`, the bits
    /// gained by narrowing all states down to those in `E`. Not an
    /// information measure.
    pub fn possibility_reduction_bits(&self, event: &Event) -> f64 {
        if event.is_empty() {
            return f64::INFINITY;
        }
        crate::log2(self.states.len() as f64 / event.len() as f64)
    }
}

/// States are the support of `dist`; agent `i` observes the variables in `agents[i]`.
///
/// State labels join the outcomes with commas, writing consecutive variables
/// of one dotted group (`S.1`, `S.2`) without separator, e.g. `(0,1,01)`.
pub fn model_from_distribution(dist: &JointDistribution, agents: &[(String, VarSet)]) -> Result<KnowledgeModel> {
    for (_, vars) in agents {
        dist.check_vars(*vars)?;
        if vars.is_empty() {
            return Err(Error::Argument("agent observes no variables".into()));
        }
    }
    let vars = dist.variables();
    let states: Vec<String> = dist
        .support()
        .map(|(outcome, _)| {
            let mut label = String::from("(");
            for (i, x) in outcome.iter().enumerate() {
                let joined = i > 0 && vars[i].name.contains('.') && vars[i - 1].name.contains('.')
                    && vars[i].group() == vars[i - 1].group();
                if i > 0 && !joined {
                    label.push(',');
                }
                label.push_str(&format!("{x}"));
            }
            label.push(')');
            label
        })
        .collect();
    let mut model = KnowledgeModel::new(states)?;
    for (name, set) in agents {
        let idx: Vec<usize> = set.iter().collect();
        let observations: Vec<Vec<usize>> =
            dist.support().map(|(o, _)| idx.iter().map(|&i| o[i]).collect()).collect();
        model.push_agent(Agent::from_observations(name.clone(), &observations));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::Mass;
    use alloc::vec;

    fn copy() -> JointDistribution {
        let q = Mass::fraction(1, 4);
        JointDistribution::with_inferred_arity(
            &["X1", "X2", "S.1", "S.2"],
            vec![
                (vec![0, 0, 0, 0], q),
                (vec![0, 1, 0, 1], q),
                (vec![1, 0, 1, 0], q),
                (vec![1, 1, 1, 1], q),
            ],
        )
        .unwrap()
    }

    fn copy_model() -> KnowledgeModel {
        let d = copy();
        model_from_distribution(&d, &[("X1".into(), VarSet::single(0)), ("X2".into(), VarSet::single(1))])
            .unwrap()
    }

    fn event(m: &KnowledgeModel, labels: &[&str]) -> Event {
        labels.iter().map(|l| m.state_index(l).unwrap()).collect()
    }

    #[test]
    fn labels_group_target_digits() {
        let m = copy_model();
        assert_eq!(m.states(), ["(0,0,00)", "(0,1,01)", "(1,0,10)", "(1,1,11)"]);
        let cell = m.agents()[0].cell_of(0);
        assert_eq!(m.labels(cell), ["(0,0,00)", "(0,1,01)"]);
        let cell = m.agents()[1].cell_of(1);
        assert_eq!(m.labels(cell), ["(0,1,01)", "(1,1,11)"]);
    }

    #[test]
    fn copy_example_knowledge() {
        let m = copy_model();
        let e = event(&m, &["(0,0,00)", "(0,1,01)", "(1,0,10)"]);
        assert_eq!(m.knows(0, &e).unwrap(), event(&m, &["(0,0,00)", "(0,1,01)"]));
        assert_eq!(m.knows(1, &e).unwrap(), event(&m, &["(0,0,00)", "(1,0,10)"]));
        let sk = m.shared_knowledge(&[0, 1], &e).unwrap();
        assert_eq!(sk, event(&m, &["(0,0,00)"]));
        assert!(m.shared_knowledge(&[0, 1], &sk).unwrap().is_empty());
        assert!(m.common_knowledge(&[0, 1], &e).unwrap().is_empty());
        let bits = m.possibility_reduction_bits(&e);
        assert!((bits - crate::log2(4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn full_and_empty_events() {
        let m = copy_model();
        let all = m.all_states();
        assert_eq!(m.knows(0, &all).unwrap(), all);
        assert_eq!(m.common_knowledge(&[0, 1], &all).unwrap(), all);
        assert!(m.shared_knowledge(&[0, 1], &Event::new()).unwrap().is_empty());
    }

    #[test]
    fn single_agent_shared_is_knows() {
        let m = copy_model();
        let e = event(&m, &["(0,0,00)", "(0,1,01)", "(1,0,10)"]);
        assert_eq!(m.shared_knowledge(&[1], &e).unwrap(), m.knows(1, &e).unwrap());
    }

    #[test]
    fn identical_partitions() {
        let mut m = KnowledgeModel::new((0..4).map(|i| format!("s{i}")).collect()).unwrap();
        m.add_partition("a", vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        m.add_partition("b", vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        let e: Event = [0, 1, 2].into_iter().collect();
        assert_eq!(m.common_knowledge(&[0, 1], &e).unwrap(), m.knows(0, &e).unwrap());
    }

    #[test]
    fn xor_agent_has_two_cells() {
        let q = Mass::fraction(1, 4);
        let d = JointDistribution::with_inferred_arity(
            &["X1", "X2", "X3"],
            vec![(vec![0, 0, 0], q), (vec![0, 1, 1], q), (vec![1, 0, 1], q), (vec![1, 1, 0], q)],
        )
        .unwrap();
        let m = model_from_distribution(&d, &[("X1".into(), VarSet::single(0))]).unwrap();
        assert_eq!(m.agents()[0].cells().len(), 2);
        assert!(m.agents()[0].cells().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn single_state_support() {
        let d = JointDistribution::with_inferred_arity(&["X", "Y"], vec![(vec![1, 0], Mass::fraction(1, 1))])
            .unwrap();
        let m = model_from_distribution(&d, &[("X".into(), VarSet::single(0))]).unwrap();
        assert_eq!(m.agents()[0].cells().len(), 1);
    }

    #[test]
    fn errors() {
        let m = copy_model();
        assert_eq!(m.knows(7, &Event::new()), Err(Error::UnknownAgent(7)));
        assert!(m.shared_knowledge(&[], &Event::new()).is_err());
        let mut m = KnowledgeModel::new(vec!["a".into(), "b".into()]).unwrap();
        assert!(m.add_partition("x", vec![vec![0]]).is_err());
        assert!(m.add_partition("x", vec![vec![0, 1], vec![1]]).is_err());
    }
}
