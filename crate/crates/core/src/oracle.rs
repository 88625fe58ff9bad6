//! Exact references for small instances.
//!
//! Exhaustive and Held-Karp TSP solvers, a depth-first search over every
//! feasible token sequence of any routing kind, and exact enumeration of the
//! rollout distribution of a policy with or without parent restriction.

use std::collections::{BTreeMap, HashMap};

use crate::decoding::{Environment, Policy, Token};
use crate::error::{Error, Result};
use crate::routing::{cycle_tokens, Kind, RoutingInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    /// Best reward (negated optimal length for TSP).
    pub optimum: f64,
    pub argmax: Vec<Token>,
    pub count_explored: u64,
}

pub const EXHAUSTIVE_TSP_MAX: usize = 10;
pub const HELD_KARP_MAX: usize = 16;
pub const EXHAUSTIVE_BEST_MAX: usize = 8;
pub const ENUMERATION_LIMIT: usize = 1_000_000;

fn require_tsp(inst: &RoutingInstance) -> Result<()> {
    if inst.kind() == Kind::Tsp {
        Ok(())
    } else {
        Err(Error::OracleRefused(format!("{} is not a TSP instance", inst.name())))
    }
}

/// Enumerates every tour through node 0 once per direction pair.
pub fn exhaustive_tsp(inst: &RoutingInstance) -> Result<ExactResult> {
    require_tsp(inst)?;
    let n = inst.n();
    if n > EXHAUSTIVE_TSP_MAX {
        return Err(Error::OracleRefused(format!(
            "exhaustive search limited to n <= {EXHAUSTIVE_TSP_MAX}, got {n}"
        )));
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best_len = f64::INFINITY;
    let mut best_tour = Vec::new();
    let mut count = 0u64;
    permute(&mut rest, 0, &mut |perm| {
        // Each cycle appears twice (once reversed); keep the orientation with
        // the smaller second node.
        if perm.len() >= 2 && perm[0] > perm[perm.len() - 1] {
            return;
        }
        count += 1;
        let mut len = inst.dist(0, perm[0]);
        for w in perm.windows(2) {
            len += inst.dist(w[0], w[1]);
        }
        len += inst.dist(perm[perm.len() - 1], 0);
        if len < best_len {
            best_len = len;
            best_tour = perm.to_vec();
        }
    });
    let mut nodes = vec![0];
    nodes.extend(best_tour);
    let argmax = cycle_tokens(n, &nodes);
    Ok(ExactResult {
        optimum: -inst.canonical_length(&argmax),
        argmax,
        count_explored: count,
    })
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Bitmask dynamic program over subsets of the non-start nodes.
pub fn held_karp(inst: &RoutingInstance) -> Result<ExactResult> {
    require_tsp(inst)?;
    let n = inst.n();
    if n > HELD_KARP_MAX {
        return Err(Error::OracleRefused(format!(
            "Held-Karp limited to n <= {HELD_KARP_MAX}, got {n}"
        )));
    }
    // Node k + 1 is bit k; node 0 is the fixed start.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut cost = vec![f64::INFINITY; (1 << m) * m];
    let mut parent = vec![usize::MAX; (1 << m) * m];
    for k in 0..m {
        cost[(1 << k) * m + k] = inst.dist(0, k + 1);
    }
    for set in 1..=full {
        for last in 0..m {
            if set & (1 << last) == 0 {
                continue;
            }
            let c = cost[set * m + last];
            if !c.is_finite() {
                continue;
            }
            for next in 0..m {
                if set & (1 << next) != 0 {
                    continue;
                }
                let to = set | (1 << next);
                let cand = c + inst.dist(last + 1, next + 1);
                if cand < cost[to * m + next] {
                    cost[to * m + next] = cand;
                    parent[to * m + next] = last;
                }
            }
        }
    }
    let mut best = (f64::INFINITY, 0);
    for last in 0..m {
        let total = cost[full * m + last] + inst.dist(last + 1, 0);
        if total < best.0 {
            best = (total, last);
        }
    }
    let mut order = Vec::with_capacity(n);
    let (mut set, mut last) = (full, best.1);
    while last != usize::MAX {
        order.push(last + 1);
        let prev = parent[set * m + last];
        set &= !(1 << last);
        last = prev;
    }
    order.push(0);
    order.reverse();
    let argmax = cycle_tokens(n, &order);
    Ok(ExactResult {
        optimum: -inst.canonical_length(&argmax),
        argmax,
        count_explored: ((1u64 << m) * m as u64),
    })
}

fn dfs_best<E: Environment>(env: &E, state: &E::State, best: &mut Option<(f64, Vec<Token>)>, count: &mut u64) {
    if env.is_terminal(state) {
        *count += 1;
        let r = env.reward(state);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            *best = Some((r, env.tokens(state).to_vec()));
        }
        return;
    }
    for slot in 0..env.branching() {
        if env.is_feasible(state, slot) {
            let mut next = state.clone();
            if env.apply(&mut next, slot).is_ok() {
                dfs_best(env, &next, best, count);
            }
        }
    }
}

/// Best terminal sequence over every feasible decoding path, any kind.
pub fn exhaustive_best(inst: &RoutingInstance) -> Result<ExactResult> {
    let n = inst.n();
    if n > EXHAUSTIVE_BEST_MAX {
        return Err(Error::OracleRefused(format!(
            "exhaustive sequence search limited to n <= {EXHAUSTIVE_BEST_MAX}, got {n}"
        )));
    }
    let mut best = None;
    let mut count = 0;
    for start in inst.initial_states() {
        dfs_best(inst, &start, &mut best, &mut count);
    }
    let (optimum, argmax) = best.ok_or(Error::Deadlock)?;
    Ok(ExactResult {
        optimum,
        argmax,
        count_explored: count,
    })
}

/// Exact optimum when some oracle applies to this instance size.
pub fn exact_optimum(inst: &RoutingInstance) -> Option<ExactResult> {
    match inst.kind() {
        Kind::Tsp if inst.n() <= HELD_KARP_MAX => held_karp(inst).ok(),
        _ if inst.n() <= EXHAUSTIVE_BEST_MAX => exhaustive_best(inst).ok(),
        _ => None,
    }
}

/// Parent restriction for [`enumerate_rollout_distribution`].
#[derive(Clone, Debug)]
pub struct ParentSpec<'a> {
    pub parents: (&'a [Token], &'a [Token]),
    pub mu: f64,
    pub token_discard: bool,
}

struct Enumerator<'a, E: Environment, P> {
    env: &'a E,
    policy: &'a P,
    mu: f64,
    restricted: bool,
    limit: usize,
    out: HashMap<Vec<Token>, f64>,
}

impl<E: Environment, P: Policy<E>> Enumerator<'_, E, P> {
    fn expand(&mut self, state: &E::State, prob: f64, vocab: &BTreeMap<Token, u32>, discard: bool) -> Result<()> {
        if self.env.is_terminal(state) {
            let seq = self.env.tokens(state).to_vec();
            *self.out.entry(seq).or_insert(0.0) += prob;
            if self.out.len() > self.limit {
                return Err(Error::OracleRefused(format!(
                    "more than {} complete sequences",
                    self.limit
                )));
            }
            return Ok(());
        }
        let k = self.env.branching();
        let mut w = vec![0.0; k];
        self.policy.weights(self.env, state, &mut w)?;
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NoFeasibleToken);
        }
        let base: Vec<f64> = w.iter().map(|x| x / total).collect();
        let step: Vec<f64> = if self.restricted {
            let inside: Vec<bool> = (0..k)
                .map(|s| vocab.contains_key(&self.env.slot_token(state, s)))
                .collect();
            let mass: f64 = (0..k).filter(|&s| inside[s]).map(|s| base[s]).sum();
            if mass > 0.0 {
                (0..k)
                    .map(|s| {
                        let cross = if inside[s] { base[s] / mass } else { 0.0 };
                        self.mu * base[s] + (1.0 - self.mu) * cross
                    })
                    .collect()
            } else {
                base
            }
        } else {
            base
        };
        for (slot, &p) in step.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let mut next = state.clone();
            self.env.apply(&mut next, slot)?;
            if discard {
                let t = self.env.slot_token(state, slot);
                let mut v = vocab.clone();
                if let Some(c) = v.get_mut(&t) {
                    *c -= 1;
                    if *c == 0 {
                        v.remove(&t);
                    }
                }
                self.expand(&next, prob * p, &v, discard)?;
            } else {
                self.expand(&next, prob * p, vocab, discard)?;
            }
        }
        Ok(())
    }
}

/// Exact probability of every complete sequence a rollout can produce.
///
/// Without parents this is the product of normalized policy steps. With
/// parents each step mixes the unrestricted step (weight `mu`) with the
/// parent-restricted step (weight `1 - mu`), falling back to the unrestricted
/// step when the restricted mass is zero.
pub fn enumerate_rollout_distribution<E: Environment, P: Policy<E>>(
    policy: &P,
    env: &E,
    parents: Option<ParentSpec<'_>>,
) -> Result<HashMap<Vec<Token>, f64>> {
    enumerate_rollout_distribution_limited(policy, env, parents, ENUMERATION_LIMIT)
}

pub fn enumerate_rollout_distribution_limited<E: Environment, P: Policy<E>>(
    policy: &P,
    env: &E,
    parents: Option<ParentSpec<'_>>,
    limit: usize,
) -> Result<HashMap<Vec<Token>, f64>> {
    let mut vocab = BTreeMap::new();
    let (mu, restricted, discard) = match &parents {
        Some(spec) => {
            for &t in env
                .parent_tokens(spec.parents.0)
                .iter()
                .chain(&env.parent_tokens(spec.parents.1))
            {
                let c = vocab.entry(t).or_insert(0u32);
                *c = if spec.token_discard { *c + 1 } else { 1 };
            }
            (spec.mu, true, spec.token_discard)
        }
        None => (1.0, false, false),
    };
    let mut en = Enumerator {
        env,
        policy,
        mu,
        restricted,
        limit,
        out: HashMap::new(),
    };
    let starts = env.initial_states();
    let p0 = 1.0 / starts.len() as f64;
    for s in &starts {
        en.expand(s, p0, &vocab, discard)?;
    }
    Ok(en.out)
}
