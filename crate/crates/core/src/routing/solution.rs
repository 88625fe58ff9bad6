use serde::{Deserialize, Serialize};

use super::state::{apply_token_mut, initial_state};
use super::{edge_endpoints, edge_token, Kind, Problem, RouteState, RoutingInstance, Violation};
use crate::decoding::Token;

/// A decoded solution: the edge sequence, its objective, and its routes.
///
/// For TSP `routes` holds one cycle listed from its start node. For the
/// depot-based kinds it holds one customer list per depot-to-depot leg; an
/// immediate depot return is a single empty route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub edges: Vec<Token>,
    pub objective: f64,
    pub routes: Vec<Vec<usize>>,
}

/// Replays `seq` from its start and returns the terminal state.
fn replay(inst: &RoutingInstance, seq: &[Token]) -> Result<RouteState, Violation> {
    let start = match (inst.kind(), seq.first()) {
        (Kind::Tsp, Some(&t)) => edge_endpoints(inst.n(), t).0,
        (Kind::Tsp, None) => return Err(Violation::NotClosed { len: 0 }),
        _ => inst.depot(),
    };
    let mut st = initial_state(inst, start).map_err(|_| Violation::TokenOutOfRange {
        step: 0,
        token: seq.first().map_or(0, |t| t.0),
    })?;
    for &t in seq {
        apply_token_mut(inst, &mut st, t)?;
    }
    if !st.terminal {
        return Err(Violation::NotClosed { len: seq.len() });
    }
    Ok(st)
}

/// Checks a complete sequence against every constraint of its kind.
pub fn validate(inst: &RoutingInstance, seq: &[Token]) -> Result<(), Violation> {
    replay(inst, seq).map(|_| ())
}

/// Reward of a complete sequence: negated cost for TSP/CVRP/PCTSP, collected
/// prize for OP.
pub fn reward(inst: &RoutingInstance, seq: &[Token]) -> Result<f64, Violation> {
    replay(inst, seq).map(|st| inst.objective(&st))
}

/// Maps a complete sequence to its routes.
pub fn decode(inst: &RoutingInstance, seq: &[Token]) -> Result<Solution, Violation> {
    let st = replay(inst, seq)?;
    let n = inst.n();
    let routes = match inst.problem() {
        Problem::Tsp => vec![seq.iter().map(|&t| edge_endpoints(n, t).0).collect()],
        _ => {
            let depot = inst.depot();
            let mut routes = Vec::new();
            let mut cur = Vec::new();
            for &t in seq {
                let head = edge_endpoints(n, t).1;
                if head == depot {
                    routes.push(std::mem::take(&mut cur));
                } else {
                    cur.push(head);
                }
            }
            routes
        }
    };
    Ok(Solution {
        edges: seq.to_vec(),
        objective: inst.objective(&st),
        routes,
    })
}

impl Solution {
    /// Inverse of [`decode`]: rebuilds the edge sequence from routes.
    pub fn from_routes(inst: &RoutingInstance, routes: Vec<Vec<usize>>) -> Result<Self, Violation> {
        let n = inst.n();
        let mut edges = Vec::new();
        match inst.problem() {
            Problem::Tsp => {
                let cycle = routes.first().map(Vec::as_slice).unwrap_or(&[]);
                edges.extend(super::cycle_tokens(n, cycle));
            }
            _ => {
                let depot = inst.depot();
                for r in &routes {
                    let mut prev = depot;
                    for &v in r {
                        edges.push(edge_token(n, prev, v));
                        prev = v;
                    }
                    edges.push(edge_token(n, prev, depot));
                }
            }
        }
        decode(inst, &edges)
    }
}
