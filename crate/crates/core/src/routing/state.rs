use serde::{Deserialize, Serialize};

use super::{edge_endpoints, edge_token, Problem, RoutingError, RoutingInstance, Violation};
use crate::decoding::{Environment, Token};
use crate::error::{Error, Result};

/// A partial constructive solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteState {
    pub current: usize,
    pub start: usize,
    pub visited: Vec<bool>,
    /// Visited nodes counted toward completion: all nodes for TSP, customers otherwise.
    pub n_visited: usize,
    pub seq: Vec<Token>,
    pub load_used: f64,
    pub prize_collected: f64,
    pub length_used: f64,
    pub terminal: bool,
}

pub fn initial_state(inst: &RoutingInstance, start: usize) -> Result<RouteState, RoutingError> {
    let n = inst.n();
    let valid = match inst.problem {
        Problem::Tsp => start < n,
        _ => start == inst.depot,
    };
    if !valid {
        return Err(RoutingError::InvalidStart(start));
    }
    let mut visited = vec![false; n];
    visited[start] = true;
    Ok(RouteState {
        current: start,
        start,
        visited,
        n_visited: matches!(inst.problem, Problem::Tsp) as usize,
        seq: Vec::with_capacity(n + 1),
        load_used: 0.0,
        prize_collected: 0.0,
        length_used: 0.0,
        terminal: false,
    })
}

/// Why moving from `st.current` to `head` is infeasible, if it is.
pub(super) fn check_move(inst: &RoutingInstance, st: &RouteState, head: usize, step: usize) -> Result<(), Violation> {
    if st.terminal {
        return Err(Violation::AfterTerminal { step });
    }
    let cur = st.current;
    let depot = inst.depot;
    match &inst.problem {
        Problem::Tsp => {
            let complete = st.n_visited == inst.n();
            if head == st.start {
                if complete {
                    Ok(())
                } else {
                    Err(Violation::PrematureClosure { step, node: head })
                }
            } else if st.visited[head] {
                Err(Violation::RepeatedVisit { step, node: head })
            } else {
                Ok(())
            }
        }
        Problem::Cvrp { demands, capacity } => {
            if head == depot {
                if cur == depot {
                    Err(Violation::EmptyRoute { step })
                } else {
                    Ok(())
                }
            } else if st.visited[head] {
                Err(Violation::RepeatedVisit { step, node: head })
            } else if st.load_used + demands[head] > *capacity {
                Err(Violation::CapacityExceeded { step, node: head })
            } else {
                Ok(())
            }
        }
        Problem::Pctsp { min_prize, .. } => {
            if head == depot {
                if st.prize_collected >= *min_prize {
                    Ok(())
                } else {
                    Err(Violation::PrizeNotMet { step })
                }
            } else if st.visited[head] {
                Err(Violation::RepeatedVisit { step, node: head })
            } else {
                Ok(())
            }
        }
        Problem::Op { max_length, .. } => {
            if head == depot {
                Ok(())
            } else if st.visited[head] {
                Err(Violation::RepeatedVisit { step, node: head })
            } else if st.length_used + inst.dist(cur, head) + inst.dist(head, depot) > *max_length {
                Err(Violation::BudgetExceeded { step, node: head })
            } else {
                Ok(())
            }
        }
    }
}

/// Feasibility of each head node from `st.current`.
pub fn feasible_mask(inst: &RoutingInstance, st: &RouteState) -> Result<Vec<bool>> {
    let step = st.seq.len();
    let mask: Vec<bool> = (0..inst.n()).map(|j| check_move(inst, st, j, step).is_ok()).collect();
    if !st.terminal && !mask.iter().any(|&m| m) {
        return Err(Error::Deadlock);
    }
    Ok(mask)
}

pub(super) fn advance(inst: &RoutingInstance, st: &mut RouteState, head: usize) {
    let n = inst.n();
    let tail = st.current;
    let d = inst.dist(tail, head);
    st.seq.push(edge_token(n, tail, head));
    st.length_used += d;
    st.current = head;
    match &inst.problem {
        Problem::Tsp => {
            if head == st.start {
                st.terminal = true;
            } else {
                st.visited[head] = true;
                st.n_visited += 1;
            }
        }
        Problem::Cvrp { demands, .. } => {
            if head == inst.depot {
                st.load_used = 0.0;
                st.terminal = st.n_visited == inst.customers();
            } else {
                st.visited[head] = true;
                st.n_visited += 1;
                st.load_used += demands[head];
            }
        }
        Problem::Pctsp { prizes, .. } | Problem::Op { prizes, .. } => {
            if head == inst.depot {
                st.terminal = true;
            } else {
                st.visited[head] = true;
                st.n_visited += 1;
                st.prize_collected += prizes[head];
            }
        }
    }
}

/// Applies an edge token, rejecting it if it is not feasible.
pub fn apply_token(inst: &RoutingInstance, st: &RouteState, edge: Token) -> Result<RouteState, Violation> {
    let mut next = st.clone();
    apply_token_mut(inst, &mut next, edge)?;
    Ok(next)
}

pub(super) fn apply_token_mut(inst: &RoutingInstance, st: &mut RouteState, edge: Token) -> Result<(), Violation> {
    let n = inst.n();
    let step = st.seq.len();
    if edge.0 as usize >= n * n {
        return Err(Violation::TokenOutOfRange { step, token: edge.0 });
    }
    let (tail, head) = edge_endpoints(n, edge);
    if st.terminal {
        return Err(Violation::AfterTerminal { step });
    }
    if tail != st.current {
        return Err(Violation::WrongTail {
            step,
            tail,
            current: st.current,
        });
    }
    check_move(inst, st, head, step)?;
    advance(inst, st, head);
    Ok(())
}

impl RoutingInstance {
    pub fn initial_state(&self, start: usize) -> Result<RouteState, RoutingError> {
        initial_state(self, start)
    }

    pub fn is_move_feasible(&self, st: &RouteState, head: usize) -> bool {
        check_move(self, st, head, st.seq.len()).is_ok()
    }

    /// Sum of edge lengths taken in ascending order, so that any ordering of
    /// the same edge multiset (rotations, reversals) gives a bit-identical sum.
    pub fn canonical_length(&self, seq: &[Token]) -> f64 {
        let mut lens: Vec<f64> = seq.iter().map(|&t| self.edge_length(t)).collect();
        lens.sort_by(f64::total_cmp);
        lens.iter().sum()
    }

    /// Objective of a terminal state; higher is better.
    pub fn objective(&self, st: &RouteState) -> f64 {
        let length = self.canonical_length(&st.seq);
        match &self.problem {
            Problem::Tsp | Problem::Cvrp { .. } => -length,
            Problem::Pctsp { penalties, .. } => {
                let penalty: f64 = penalties
                    .iter()
                    .zip(&st.visited)
                    .filter(|(_, &v)| !v)
                    .map(|(p, _)| p)
                    .sum();
                -(length + penalty)
            }
            Problem::Op { prizes, .. } => prizes
                .iter()
                .zip(&st.visited)
                .enumerate()
                .filter(|&(i, (_, &v))| v && i != self.depot)
                .map(|(_, (p, _))| p)
                .sum(),
        }
    }
}

impl Environment for RoutingInstance {
    type State = RouteState;

    fn branching(&self) -> usize {
        self.n()
    }

    fn initial_states(&self) -> Vec<RouteState> {
        match self.problem {
            Problem::Tsp => (0..self.n())
                .map(|s| initial_state(self, s).expect("start in range"))
                .collect(),
            _ => vec![initial_state(self, self.depot).expect("depot in range")],
        }
    }

    #[inline]
    fn is_feasible(&self, state: &RouteState, slot: usize) -> bool {
        self.is_move_feasible(state, slot)
    }

    #[inline]
    fn slot_token(&self, state: &RouteState, slot: usize) -> Token {
        edge_token(self.n(), state.current, slot)
    }

    fn apply(&self, state: &mut RouteState, slot: usize) -> Result<()> {
        let t = edge_token(self.n(), state.current, slot);
        apply_token_mut(self, state, t)?;
        Ok(())
    }

    fn is_terminal(&self, state: &RouteState) -> bool {
        state.terminal
    }

    fn tokens<'a>(&self, state: &'a RouteState) -> &'a [Token] {
        &state.seq
    }

    fn reward(&self, state: &RouteState) -> f64 {
        self.objective(state)
    }

    /// Tour edges are undirected: both orientations of every parent edge.
    fn parent_tokens(&self, seq: &[Token]) -> Vec<Token> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * seq.len());
        for &t in seq {
            let (a, b) = edge_endpoints(n, t);
            out.push(t);
            if a != b {
                out.push(edge_token(n, b, a));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::Metric;

    fn square_coords() -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn tsp_initial_state() {
        let inst = RoutingInstance::tsp("sq", square_coords()).unwrap();
        let st = inst.initial_state(0).unwrap();
        assert_eq!(st.visited, vec![true, false, false, false]);
        assert!(st.seq.is_empty());
        assert_eq!(inst.initial_state(4), Err(RoutingError::InvalidStart(4)));
    }

    #[test]
    fn tsp_last_step_only_closes() {
        let inst = RoutingInstance::tsp("sq", square_coords()).unwrap();
        let mut st = inst.initial_state(1).unwrap();
        for j in [2, 3, 0] {
            st = apply_token(&inst, &st, edge_token(4, st.current, j)).unwrap();
        }
        assert_eq!(feasible_mask(&inst, &st).unwrap(), vec![false, true, false, false]);
        st = apply_token(&inst, &st, edge_token(4, 0, 1)).unwrap();
        assert!(st.terminal);
        assert_eq!(inst.objective(&st), -4.0);
    }

    #[test]
    fn cvrp_capacity_leaves_only_depot() {
        let inst = RoutingInstance::new(
            "c",
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            Metric::Euclidean,
            0,
            Problem::Cvrp {
                demands: vec![0.0, 0.7, 0.5],
                capacity: 1.0,
            },
        )
        .unwrap();
        let st = inst.initial_state(0).unwrap();
        assert_eq!(st.load_used, 0.0);
        let st = apply_token(&inst, &st, edge_token(3, 0, 1)).unwrap();
        assert_eq!(feasible_mask(&inst, &st).unwrap(), vec![true, false, false]);
        let st = apply_token(&inst, &st, edge_token(3, 1, 0)).unwrap();
        assert_eq!(st.load_used, 0.0);
        assert!(!st.terminal);
        assert_eq!(
            apply_token(&inst, &st, edge_token(3, 0, 0)),
            Err(Violation::EmptyRoute { step: 2 })
        );
        let st = apply_token(&inst, &st, edge_token(3, 0, 2)).unwrap();
        let st = apply_token(&inst, &st, edge_token(3, 2, 0)).unwrap();
        assert!(st.terminal);
    }

    #[test]
    fn op_budget_lookahead() {
        let inst = RoutingInstance::new(
            "o",
            vec![[0.0, 0.0], [1.0, 1.0], [0.5, 0.0]],
            Metric::Euclidean,
            0,
            Problem::Op {
                prizes: vec![0.0, 1.0, 1.0],
                max_length: 2.0,
            },
        )
        .unwrap();
        let st = inst.initial_state(0).unwrap();
        assert_eq!(st.length_used, 0.0);
        assert_eq!(st.prize_collected, 0.0);
        assert_eq!(feasible_mask(&inst, &st).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn pctsp_depot_masked_until_min_prize() {
        let inst = RoutingInstance::new(
            "p",
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            Metric::Euclidean,
            0,
            Problem::Pctsp {
                prizes: vec![0.0, 0.4, 0.8],
                penalties: vec![0.0, 0.1, 0.1],
                min_prize: 0.5,
            },
        )
        .unwrap();
        let st = inst.initial_state(0).unwrap();
        let st = apply_token(&inst, &st, edge_token(3, 0, 1)).unwrap();
        assert_eq!(
            apply_token(&inst, &st, edge_token(3, 1, 0)),
            Err(Violation::PrizeNotMet { step: 1 })
        );
        let st = apply_token(&inst, &st, edge_token(3, 1, 2)).unwrap();
        assert!(feasible_mask(&inst, &st).unwrap()[0]);
    }
}
