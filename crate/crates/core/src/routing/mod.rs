//! Constructive routing environments with edge tokens.
//!
//! Four problem kinds share one instance type: TSP, CVRP, prize-collecting
//! TSP and the orienteering problem. A token is a directed edge with id
//! `tail * n + head`; at each step the candidate slots are the `n` possible
//! heads from the current node.

mod solution;
mod state;
mod two_opt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoding::Token;

pub use solution::{decode, reward, validate, Solution};
pub use state::{apply_token, feasible_mask, initial_state, RouteState};
pub use two_opt::two_opt;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("instance needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("{field} has {got} entries, expected {expected}")]
    FieldLength {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid start index {0}")]
    InvalidStart(usize),
    #[error("depot index {0} out of range")]
    InvalidDepot(usize),
    #[error("depot {0} must be zero")]
    DepotNotZero(&'static str),
    #[error("{0} must be finite and nonnegative")]
    Negative(&'static str),
    #[error("capacity must be positive")]
    NonPositiveCapacity,
    #[error("customer {node} demand {demand} exceeds capacity {capacity}")]
    DemandExceedsCapacity { node: usize, demand: f64, capacity: f64 },
    #[error("max_length must be positive")]
    NonPositiveBudget,
    #[error("min_prize {min_prize} exceeds total prize {total}")]
    UnreachableMinPrize { min_prize: f64, total: f64 },
    #[error("non-finite coordinate at node {0}")]
    BadCoordinate(usize),
}

/// First constraint broken by a token sequence.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum Violation {
    #[error("step {step}: token {token} out of range")]
    TokenOutOfRange { step: usize, token: u32 },
    #[error("step {step}: edge tail {tail} is not the current node {current}")]
    WrongTail { step: usize, tail: usize, current: usize },
    #[error("step {step}: repeated visit to node {node}")]
    RepeatedVisit { step: usize, node: usize },
    #[error("step {step}: premature return to start {node}")]
    PrematureClosure { step: usize, node: usize },
    #[error("step {step}: capacity exceeded at node {node}")]
    CapacityExceeded { step: usize, node: usize },
    #[error("step {step}: consecutive depot visit")]
    EmptyRoute { step: usize },
    #[error("step {step}: depot return before min prize collected")]
    PrizeNotMet { step: usize },
    #[error("step {step}: budget exceeded at node {node}")]
    BudgetExceeded { step: usize, node: usize },
    #[error("step {step}: tokens after the sequence is complete")]
    AfterTerminal { step: usize },
    #[error("sequence not closed after {len} tokens")]
    NotClosed { len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tsp,
    Cvrp,
    Pctsp,
    Op,
}

impl Kind {
    /// True when the reward is a negated cost.
    pub fn is_minimization(self) -> bool {
        !matches!(self, Kind::Op)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Tsp => "tsp",
            Kind::Cvrp => "cvrp",
            Kind::Pctsp => "pctsp",
            Kind::Op => "op",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsp" => Ok(Kind::Tsp),
            "cvrp" => Ok(Kind::Cvrp),
            "pctsp" => Ok(Kind::Pctsp),
            "op" => Ok(Kind::Op),
            other => Err(format!("unknown problem kind {other:?}")),
        }
    }
}

/// Kind-specific data. Vectors are indexed by node and hold 0 at the depot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Tsp,
    Cvrp {
        demands: Vec<f64>,
        capacity: f64,
    },
    Pctsp {
        prizes: Vec<f64>,
        penalties: Vec<f64>,
        min_prize: f64,
    },
    Op {
        prizes: Vec<f64>,
        max_length: f64,
    },
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self {
            Problem::Tsp => Kind::Tsp,
            Problem::Cvrp { .. } => Kind::Cvrp,
            Problem::Pctsp { .. } => Kind::Pctsp,
            Problem::Op { .. } => Kind::Op,
        }
    }
}

/// How pairwise distances are derived from coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Exact Euclidean distance.
    #[default]
    Euclidean,
    /// TSPLIB `EUC_2D`: Euclidean distance rounded to the nearest integer.
    Euc2d,
}

impl Metric {
    fn distance(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = (a[0] - b[0]).hypot(a[1] - b[1]);
        match self {
            Metric::Euclidean => d,
            Metric::Euc2d => (d + 0.5).floor(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceData {
    name: String,
    #[serde(default)]
    metric: Metric,
    #[serde(default)]
    depot: usize,
    coords: Vec<[f64; 2]>,
    problem: Problem,
}

/// A routing instance on the complete graph over `coords`.
///
/// Immutable after construction. The distance matrix is derived from the
/// coordinates and the metric, and is exactly symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceData", into = "InstanceData")]
pub struct RoutingInstance {
    name: String,
    metric: Metric,
    depot: usize,
    coords: Vec<[f64; 2]>,
    problem: Problem,
    dist: Vec<f64>,
}

impl TryFrom<InstanceData> for RoutingInstance {
    type Error = RoutingError;

    fn try_from(d: InstanceData) -> Result<Self, Self::Error> {
        RoutingInstance::new(d.name, d.coords, d.metric, d.depot, d.problem)
    }
}

impl From<RoutingInstance> for InstanceData {
    fn from(i: RoutingInstance) -> Self {
        InstanceData {
            name: i.name,
            metric: i.metric,
            depot: i.depot,
            coords: i.coords,
            problem: i.problem,
        }
    }
}

fn check_nonneg(field: &'static str, v: &[f64]) -> Result<(), RoutingError> {
    if v.iter().all(|x| x.is_finite() && *x >= 0.0) {
        Ok(())
    } else {
        Err(RoutingError::Negative(field))
    }
}

fn check_len(field: &'static str, v: &[f64], n: usize) -> Result<(), RoutingError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(RoutingError::FieldLength {
            field,
            expected: n,
            got: v.len(),
        })
    }
}

impl RoutingInstance {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<[f64; 2]>,
        metric: Metric,
        depot: usize,
        problem: Problem,
    ) -> Result<Self, RoutingError> {
        let n = coords.len();
        if n < 2 {
            return Err(RoutingError::TooFewNodes(n));
        }
        if let Some(i) = coords.iter().position(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(RoutingError::BadCoordinate(i));
        }
        if depot >= n {
            return Err(RoutingError::InvalidDepot(depot));
        }
        match &problem {
            Problem::Tsp => {}
            Problem::Cvrp { demands, capacity } => {
                check_len("demands", demands, n)?;
                check_nonneg("demands", demands)?;
                if !(*capacity > 0.0) || !capacity.is_finite() {
                    return Err(RoutingError::NonPositiveCapacity);
                }
                if demands[depot] != 0.0 {
                    return Err(RoutingError::DepotNotZero("demand"));
                }
                if let Some((node, &demand)) = demands.iter().enumerate().find(|(_, d)| **d > *capacity) {
                    return Err(RoutingError::DemandExceedsCapacity {
                        node,
                        demand,
                        capacity: *capacity,
                    });
                }
            }
            Problem::Pctsp {
                prizes,
                penalties,
                min_prize,
            } => {
                check_len("prizes", prizes, n)?;
                check_len("penalties", penalties, n)?;
                check_nonneg("prizes", prizes)?;
                check_nonneg("penalties", penalties)?;
                check_nonneg("min_prize", &[*min_prize])?;
                if prizes[depot] != 0.0 {
                    return Err(RoutingError::DepotNotZero("prize"));
                }
                if penalties[depot] != 0.0 {
                    return Err(RoutingError::DepotNotZero("penalty"));
                }
                let total: f64 = prizes.iter().sum();
                if *min_prize > total {
                    return Err(RoutingError::UnreachableMinPrize {
                        min_prize: *min_prize,
                        total,
                    });
                }
            }
            Problem::Op { prizes, max_length } => {
                check_len("prizes", prizes, n)?;
                check_nonneg("prizes", prizes)?;
                if !(*max_length > 0.0) || !max_length.is_finite() {
                    return Err(RoutingError::NonPositiveBudget);
                }
                if prizes[depot] != 0.0 {
                    return Err(RoutingError::DepotNotZero("prize"));
                }
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(coords[i], coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            name: name.into(),
            metric,
            depot,
            coords,
            problem,
            dist,
        })
    }

    /// Euclidean TSP on the given points.
    pub fn tsp(name: impl Into<String>, coords: Vec<[f64; 2]>) -> Result<Self, RoutingError> {
        Self::new(name, coords, Metric::Euclidean, 0, Problem::Tsp)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn kind(&self) -> Kind {
        self.problem.kind()
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn depot(&self) -> usize {
        self.depot
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n() + j]
    }

    pub fn edge_length(&self, t: Token) -> f64 {
        self.dist[t.0 as usize]
    }

    /// Number of nodes that must (TSP, CVRP) or may (PCTSP, OP) be visited
    /// besides the start.
    pub(crate) fn customers(&self) -> usize {
        match self.problem {
            Problem::Tsp => self.n(),
            _ => self.n() - 1,
        }
    }
}

pub fn edge_token(n: usize, tail: usize, head: usize) -> Token {
    Token((tail * n + head) as u32)
}

pub fn edge_endpoints(n: usize, t: Token) -> (usize, usize) {
    let t = t.0 as usize;
    (t / n, t % n)
}

/// Edge tokens of a closed walk through `nodes` (the last node returns to the first).
pub fn cycle_tokens(n: usize, nodes: &[usize]) -> Vec<Token> {
    nodes
        .iter()
        .zip(nodes.iter().cycle().skip(1))
        .map(|(&a, &b)| edge_token(n, a, b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonzero_depot_fields() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let cvrp = Problem::Cvrp {
            demands: vec![1.0, 1.0, 1.0],
            capacity: 5.0,
        };
        assert_eq!(
            RoutingInstance::new("x", coords.clone(), Metric::Euclidean, 0, cvrp),
            Err(RoutingError::DepotNotZero("demand"))
        );
        let pctsp = Problem::Pctsp {
            prizes: vec![0.0, 1.0, 1.0],
            penalties: vec![0.5, 1.0, 1.0],
            min_prize: 0.5,
        };
        assert_eq!(
            RoutingInstance::new("x", coords, Metric::Euclidean, 0, pctsp),
            Err(RoutingError::DepotNotZero("penalty"))
        );
    }

    #[test]
    fn distances_symmetric_with_zero_diagonal() {
        let inst = RoutingInstance::tsp("t", vec![[0.1, 0.3], [0.7, 0.2], [0.4, 0.9]]).unwrap();
        for i in 0..3 {
            assert_eq!(inst.dist(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(inst.dist(i, j).to_bits(), inst.dist(j, i).to_bits());
            }
        }
    }

    #[test]
    fn euc2d_rounds_to_nearest() {
        let inst = RoutingInstance::new(
            "r",
            vec![[0.0, 0.0], [3.0, 4.4], [1.0, 1.0]],
            Metric::Euc2d,
            0,
            Problem::Tsp,
        )
        .unwrap();
        assert_eq!(inst.dist(0, 1), 5.0);
        assert_eq!(inst.dist(0, 2), 1.0);
    }

    #[test]
    fn serde_round_trip() {
        let inst = RoutingInstance::new(
            "op",
            vec![[0.0, 0.0], [0.5, 0.5], [0.2, 0.9]],
            Metric::Euclidean,
            0,
            Problem::Op {
                prizes: vec![0.0, 0.3, 0.7],
                max_length: 2.0,
            },
        )
        .unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        let back: RoutingInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(inst, back);
    }
}
