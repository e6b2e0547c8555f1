//! Greedy selection of (node, content) cache placements.
//!
//! Utility is facility-location shaped: every client (a region/content
//! demand cell) is credited with the largest gain offered by any selected
//! candidate, minus a fixed cost per selected candidate. Selection respects a
//! knapsack per node plus an optional global volume budget.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use crate::constellation::NodeId;
use crate::demand::ContentId;
use crate::error::{Error, Result};

const FIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub node: NodeId,
    pub content: ContentId,
    pub size_mb: f64,
    /// Charged once if the candidate is selected.
    pub cost: f64,
    /// `(client, gain)` pairs; a client takes the best gain among selections.
    pub gains: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlacementProblem {
    pub candidates: Vec<Candidate>,
    pub capacity_mb: BTreeMap<NodeId, f64>,
    /// Global limit on selected volume; `f64::INFINITY` for none.
    pub budget_mb: f64,
}

impl PlacementProblem {
    pub fn new(candidates: Vec<Candidate>, capacity_mb: BTreeMap<NodeId, f64>) -> Self {
        Self {
            candidates,
            capacity_mb,
            budget_mb: f64::INFINITY,
        }
    }

    fn clients(&self) -> usize {
        self.candidates
            .iter()
            .flat_map(|c| c.gains.iter().map(|g| g.0 + 1))
            .max()
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        for c in &self.candidates {
            if !(c.size_mb > 0.0) {
                return Err(Error::contract(format!("candidate ({}, {}) has size <= 0", c.node, c.content)));
            }
            if !(c.cost >= 0.0) || c.gains.iter().any(|g| !(g.1 >= 0.0)) {
                return Err(Error::contract(format!("candidate ({}, {}) has a negative score", c.node, c.content)));
            }
        }
        Ok(())
    }

    /// Utility of a set of candidate indices.
    pub fn utility(&self, selected: &[usize]) -> f64 {
        let mut best = vec![0.0f64; self.clients()];
        let mut cost = 0.0;
        for &i in selected {
            let c = &self.candidates[i];
            cost += c.cost;
            for &(k, g) in &c.gains {
                best[k] = best[k].max(g);
            }
        }
        best.iter().sum::<f64>() - cost
    }

    /// True if `selected` respects every node capacity and the budget.
    pub fn feasible(&self, selected: &[usize]) -> bool {
        let mut load: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut total = 0.0;
        for &i in selected {
            let c = &self.candidates[i];
            *load.entry(c.node).or_default() += c.size_mb;
            total += c.size_mb;
        }
        total <= self.budget_mb + FIT_TOLERANCE
            && load
                .iter()
                .all(|(n, l)| *l <= self.capacity_mb.get(n).copied().unwrap_or(0.0) + FIT_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Candidate indices in selection order.
    pub picked: Vec<usize>,
    pub utility: f64,
}

struct State<'a> {
    problem: &'a PlacementProblem,
    best: Vec<f64>,
    load: BTreeMap<NodeId, f64>,
    volume: f64,
    taken: Vec<bool>,
    picked: Vec<usize>,
}

impl<'a> State<'a> {
    fn new(problem: &'a PlacementProblem, clients: usize) -> Self {
        Self {
            problem,
            best: vec![0.0; clients],
            load: BTreeMap::new(),
            volume: 0.0,
            taken: vec![false; problem.candidates.len()],
            picked: Vec::new(),
        }
    }

    fn fits(&self, i: usize) -> bool {
        let c = &self.problem.candidates[i];
        let cap = self.problem.capacity_mb.get(&c.node).copied().unwrap_or(0.0);
        let load = self.load.get(&c.node).copied().unwrap_or(0.0);
        !self.taken[i]
            && load + c.size_mb <= cap + FIT_TOLERANCE
            && self.volume + c.size_mb <= self.problem.budget_mb + FIT_TOLERANCE
    }

    fn marginal(&self, i: usize) -> f64 {
        let c = &self.problem.candidates[i];
        c.gains
            .iter()
            .map(|&(k, g)| (g - self.best[k]).max(0.0))
            .sum::<f64>()
            - c.cost
    }

    fn take(&mut self, i: usize) {
        let c = &self.problem.candidates[i];
        for &(k, g) in &c.gains {
            self.best[k] = self.best[k].max(g);
        }
        *self.load.entry(c.node).or_default() += c.size_mb;
        self.volume += c.size_mb;
        self.taken[i] = true;
        self.picked.push(i);
    }

    fn utility(&self) -> f64 {
        self.problem.utility(&self.picked)
    }
}

/// Heap entry: larger gain first, then lower node, content and index.
#[derive(PartialEq)]
struct Entry {
    gain: f64,
    key: Reverse<(NodeId, ContentId, usize)>,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(self.key.cmp(&other.key))
    }
}

/// Lazy greedy completion: repeatedly adds the feasible candidate with the
/// largest positive marginal utility. Marginals never grow as the selection
/// grows, so stale heap values are valid upper bounds.
fn complete(state: &mut State<'_>) {
    let mut heap: BinaryHeap<Entry> = (0..state.problem.candidates.len())
        .filter(|&i| state.fits(i))
        .map(|i| {
            let c = &state.problem.candidates[i];
            Entry {
                gain: state.marginal(i),
                key: Reverse((c.node, c.content, i)),
            }
        })
        .collect();
    while let Some(top) = heap.pop() {
        let i = top.key.0 .2;
        if !state.fits(i) {
            continue;
        }
        let gain = state.marginal(i);
        if !(gain > 0.0) {
            // every other marginal is bounded above by a stale value <= top
            if top.gain <= 0.0 {
                break;
            }
            continue;
        }
        if heap.peek().is_none_or(|next| Entry { gain, key: top.key } > *next) {
            state.take(i);
        } else {
            heap.push(Entry { gain, key: top.key });
        }
    }
}

/// Greedy placement. With `seed_depth > 0` every feasible seed set of up to
/// that many candidates is completed greedily and the best result is kept
/// (partial enumeration); `seed_depth = 0` is the plain greedy rule.
pub fn greedy_place(problem: &PlacementProblem, seed_depth: usize) -> Result<Selection> {
    problem.validate()?;
    let clients = problem.clients();
    let run = |seed: &[usize]| {
        let mut s = State::new(problem, clients);
        for &i in seed {
            s.take(i);
        }
        complete(&mut s);
        Selection {
            utility: s.utility(),
            picked: s.picked,
        }
    };
    let mut best = run(&[]);
    let mut stack = Vec::new();
    enumerate_seeds(problem, seed_depth, 0, &mut stack, &mut |seed| {
        let r = run(seed);
        if r.utility > best.utility {
            best = r;
        }
    });
    Ok(best)
}

/// Visits every feasible index set of size 1..=depth in lexicographic order.
fn enumerate_seeds(problem: &PlacementProblem, depth: usize, from: usize, stack: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if stack.len() == depth {
        return;
    }
    for i in from..problem.candidates.len() {
        stack.push(i);
        if problem.feasible(stack) {
            visit(stack);
            enumerate_seeds(problem, depth, i + 1, stack, visit);
        }
        stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(node: u32, content: u32, size: f64, gains: &[(usize, f64)]) -> Candidate {
        Candidate {
            node: NodeId(node),
            content: ContentId(content),
            size_mb: size,
            cost: 0.0,
            gains: gains.to_vec(),
        }
    }

    fn caps(list: &[(u32, f64)]) -> BTreeMap<NodeId, f64> {
        list.iter().map(|&(n, c)| (NodeId(n), c)).collect()
    }

    #[test]
    fn single_fitting_candidate_is_selected() {
        let p = PlacementProblem::new(vec![cand(0, 0, 1.0, &[(0, 2.0)])], caps(&[(0, 1.0)]));
        assert_eq!(greedy_place(&p, 0).unwrap().picked, vec![0]);
    }

    #[test]
    fn higher_score_wins_the_slot() {
        let p = PlacementProblem::new(
            vec![cand(0, 0, 1.0, &[(0, 3.0)]), cand(0, 1, 1.0, &[(1, 5.0)])],
            caps(&[(0, 1.0)]),
        );
        let s = greedy_place(&p, 0).unwrap();
        assert_eq!(s.picked, vec![1]);
        assert_eq!(s.utility, 5.0);
    }

    #[test]
    fn ties_go_to_lower_node_then_content() {
        let p = PlacementProblem::new(
            vec![cand(1, 0, 1.0, &[(0, 2.0)]), cand(0, 1, 1.0, &[(1, 2.0)]), cand(0, 0, 1.0, &[(2, 2.0)])],
            caps(&[(0, 1.0), (1, 0.0)]),
        );
        assert_eq!(greedy_place(&p, 0).unwrap().picked, vec![2]);
    }

    #[test]
    fn shared_client_counts_once() {
        let p = PlacementProblem::new(
            vec![cand(0, 0, 1.0, &[(0, 4.0)]), cand(1, 0, 1.0, &[(0, 3.0), (1, 1.0)])],
            caps(&[(0, 1.0), (1, 1.0)]),
        );
        let s = greedy_place(&p, 0).unwrap();
        assert_eq!(s.picked, vec![0, 1]);
        assert_eq!(s.utility, 5.0);
    }

    #[test]
    fn cost_blocks_unprofitable_choice() {
        let mut c = cand(0, 0, 1.0, &[(0, 1.0)]);
        c.cost = 2.0;
        let p = PlacementProblem::new(vec![c], caps(&[(0, 5.0)]));
        assert!(greedy_place(&p, 0).unwrap().picked.is_empty());
    }

    #[test]
    fn budget_limits_total_volume() {
        let mut p = PlacementProblem::new(
            vec![cand(0, 0, 1.0, &[(0, 1.0)]), cand(1, 1, 1.0, &[(1, 1.0)])],
            caps(&[(0, 1.0), (1, 1.0)]),
        );
        p.budget_mb = 1.5;
        assert_eq!(greedy_place(&p, 0).unwrap().picked.len(), 1);
    }

    #[test]
    fn enumeration_fixes_the_knapsack_trap() {
        // plain greedy takes the big item (5); two small items give 8
        let p = PlacementProblem::new(
            vec![cand(0, 0, 10.0, &[(0, 5.0)]), cand(0, 1, 5.0, &[(1, 4.0)]), cand(0, 2, 5.0, &[(2, 4.0)])],
            caps(&[(0, 10.0)]),
        );
        assert_eq!(greedy_place(&p, 0).unwrap().utility, 5.0);
        assert_eq!(greedy_place(&p, 1).unwrap().utility, 8.0);
    }

    #[test]
    fn negative_scores_rejected() {
        let p = PlacementProblem::new(vec![cand(0, 0, 1.0, &[(0, -1.0)])], caps(&[(0, 1.0)]));
        assert!(greedy_place(&p, 0).is_err());
    }
}
