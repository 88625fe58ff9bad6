//! Masked sequential decoding.
//!
//! A [`Policy`] assigns nonnegative weights to the candidate slots of an
//! [`Environment`] state, with infeasible slots weighted exactly zero. On top
//! of that this module provides the unrestricted step, the parent-restricted
//! (crossover) step, the mutation indicator, full offspring rollouts, and the
//! sampling / beam-search baselines.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Chromosome;
use crate::error::{Error, Result};

/// A vocabulary entry. Routing environments use directed edges `tail * n + head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(pub u32);

/// A constructive problem decoded one token at a time.
///
/// At every state the environment exposes `branching()` candidate slots;
/// `slot_token` maps a slot to its vocabulary token. Only feasible slots may be
/// applied.
pub trait Environment: Sync {
    type State: Clone + Send;

    fn branching(&self) -> usize;

    /// Equally likely start states. A rollout draws one uniformly.
    fn initial_states(&self) -> Vec<Self::State>;

    fn is_feasible(&self, state: &Self::State, slot: usize) -> bool;

    fn feasible_mask(&self, state: &Self::State, mask: &mut [bool]) {
        for (slot, m) in mask.iter_mut().enumerate() {
            *m = self.is_feasible(state, slot);
        }
    }

    fn slot_token(&self, state: &Self::State, slot: usize) -> Token;

    fn apply(&self, state: &mut Self::State, slot: usize) -> Result<()>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn tokens<'a>(&self, state: &'a Self::State) -> &'a [Token];

    /// Reward of a terminal state. Higher is better.
    fn reward(&self, state: &Self::State) -> f64;

    /// Tokens a parent sequence contributes to the restricted vocabulary.
    fn parent_tokens(&self, seq: &[Token]) -> Vec<Token> {
        seq.to_vec()
    }
}

/// Next-token weights for a state. Infeasible slots must get exactly 0, and
/// the result must depend on the state alone.
pub trait Policy<E: Environment>: Sync {
    fn weights(&self, env: &E, state: &E::State, out: &mut [f64]) -> Result<()>;
}

/// The restricted vocabulary built from two parents.
///
/// As a set (default) a token stays allowed once inserted. With
/// `token_discard` it is a multiset and every sampled token removes one copy.
#[derive(Clone, Debug)]
pub struct ParentVocab {
    counts: HashMap<Token, u32>,
    token_discard: bool,
}

impl ParentVocab {
    pub fn new(first: &[Token], second: &[Token], token_discard: bool) -> Self {
        let mut counts = HashMap::with_capacity(first.len() + second.len());
        for &t in first.iter().chain(second) {
            let c = counts.entry(t).or_insert(0u32);
            if token_discard {
                *c += 1;
            } else {
                *c = 1;
            }
        }
        Self { counts, token_discard }
    }

    /// Vocabulary of a parent pair, expanded through the environment.
    pub fn from_parents<E: Environment>(env: &E, parents: (&Chromosome, &Chromosome), token_discard: bool) -> Self {
        Self::new(
            &env.parent_tokens(&parents.0.tokens),
            &env.parent_tokens(&parents.1.tokens),
            token_discard,
        )
    }

    pub fn contains(&self, token: Token) -> bool {
        self.counts.contains_key(&token)
    }

    pub fn multiplicity(&self, token: Token) -> u32 {
        self.counts.get(&token).copied().unwrap_or(0)
    }

    pub fn token_discard(&self) -> bool {
        self.token_discard
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Records that `token` was sampled. No-op in set mode.
    pub fn consume(&mut self, token: Token) {
        if !self.token_discard {
            return;
        }
        if let Some(c) = self.counts.get_mut(&token) {
            *c -= 1;
            if *c == 0 {
                self.counts.remove(&token);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub slot: usize,
    pub token: Token,
    pub mutated: bool,
    /// The parent restriction had no feasible mass, so mutation was forced.
    pub forced: bool,
}

/// Result of a crossover step. `zero_mass` flags an all-zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossoverProbs {
    pub probs: Vec<f64>,
    pub zero_mass: bool,
}

fn normalize_in_place(weights: &mut [f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
    total
}

fn restrict<E: Environment>(env: &E, state: &E::State, pv: &ParentVocab, weights: &[f64], out: &mut [f64]) -> f64 {
    let mut mass = 0.0;
    for (slot, (o, &w)) in out.iter_mut().zip(weights).enumerate() {
        *o = if w > 0.0 && pv.contains(env.slot_token(state, slot)) {
            w
        } else {
            0.0
        };
        mass += *o;
    }
    mass
}

/// Inverse-CDF draw from unnormalized weights with a single uniform.
/// Zero-weight slots are never returned.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn pick_start<E: Environment, R: Rng + ?Sized>(env: &E, rng: &mut R) -> Result<E::State> {
    let mut starts = env.initial_states();
    if starts.is_empty() {
        return Err(Error::Deadlock);
    }
    let i = if starts.len() == 1 {
        0
    } else {
        rng.gen_range(0..starts.len())
    };
    Ok(starts.swap_remove(i))
}

/// Unrestricted next-slot distribution.
pub fn base_step<E: Environment, P: Policy<E>>(policy: &P, env: &E, state: &E::State) -> Result<Vec<f64>> {
    let mut probs = vec![0.0; env.branching()];
    policy.weights(env, state, &mut probs)?;
    if normalize_in_place(&mut probs) <= 0.0 {
        return Err(Error::NoFeasibleToken);
    }
    Ok(probs)
}

/// Next-slot distribution restricted to the parent vocabulary.
pub fn crossover_step<E: Environment, P: Policy<E>>(
    policy: &P,
    env: &E,
    state: &E::State,
    pv: &ParentVocab,
) -> Result<CrossoverProbs> {
    let mut weights = vec![0.0; env.branching()];
    policy.weights(env, state, &mut weights)?;
    let mut probs = vec![0.0; weights.len()];
    let mass = restrict(env, state, pv, &weights, &mut probs);
    let zero_mass = !(mass > 0.0);
    if !zero_mass {
        for p in probs.iter_mut() {
            *p /= mass;
        }
    }
    Ok(CrossoverProbs { probs, zero_mass })
}

/// Mutation indicator: forced when the restricted mass is zero, Bernoulli(mu)
/// otherwise.
pub fn mutation_indicator<R: Rng + ?Sized>(restricted_mass_zero: bool, mu: f64, rng: &mut R) -> bool {
    restricted_mass_zero || rng.gen::<f64>() < mu
}

/// Reusable buffers for one rollout.
struct StepBuffers {
    weights: Vec<f64>,
    restricted: Vec<f64>,
}

impl StepBuffers {
    fn new(branching: usize) -> Self {
        Self {
            weights: vec![0.0; branching],
            restricted: vec![0.0; branching],
        }
    }
}

fn ngs_step_with<E: Environment, P: Policy<E>, R: Rng + ?Sized>(
    buf: &mut StepBuffers,
    policy: &P,
    env: &E,
    state: &E::State,
    pv: &mut ParentVocab,
    mu: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    policy.weights(env, state, &mut buf.weights)?;
    let total: f64 = buf.weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoFeasibleToken);
    }
    let mass = restrict(env, state, pv, &buf.weights, &mut buf.restricted);
    let forced = !(mass > 0.0);
    let mutated = mutation_indicator(forced, mu, rng);
    let slot = if mutated {
        sample_index(&buf.weights, total, rng)
    } else {
        sample_index(&buf.restricted, mass, rng)
    };
    let token = env.slot_token(state, slot);
    pv.consume(token);
    Ok(StepOutcome {
        slot,
        token,
        mutated,
        forced,
    })
}

/// One crossover/mutation step. Does not advance `state`.
pub fn ngs_step<E: Environment, P: Policy<E>, R: Rng + ?Sized>(
    policy: &P,
    env: &E,
    state: &E::State,
    pv: &mut ParentVocab,
    mu: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    let mut buf = StepBuffers::new(env.branching());
    ngs_step_with(&mut buf, policy, env, state, pv, mu, rng)
}

/// Decodes one offspring from a parent pair.
pub fn ngs_rollout<E: Environment, P: Policy<E>, R: Rng + ?Sized>(
    policy: &P,
    env: &E,
    parents: (&Chromosome, &Chromosome),
    mu: f64,
    token_discard: bool,
    rng: &mut R,
) -> Result<Chromosome> {
    let mut pv = ParentVocab::from_parents(env, parents, token_discard);
    ngs_rollout_from(policy, env, &mut pv, mu, rng)
}

/// Like [`ngs_rollout`] but with a caller-built vocabulary.
pub fn ngs_rollout_from<E: Environment, P: Policy<E>, R: Rng + ?Sized>(
    policy: &P,
    env: &E,
    pv: &mut ParentVocab,
    mu: f64,
    rng: &mut R,
) -> Result<Chromosome> {
    let mut state = pick_start(env, rng)?;
    let mut buf = StepBuffers::new(env.branching());
    let mut mutation_count = 0;
    let mut forced_mutation_count = 0;
    while !env.is_terminal(&state) {
        let out = ngs_step_with(&mut buf, policy, env, &state, pv, mu, rng)?;
        mutation_count += out.mutated as usize;
        forced_mutation_count += out.forced as usize;
        env.apply(&mut state, out.slot)?;
    }
    Ok(Chromosome {
        tokens: env.tokens(&state).to_vec(),
        reward: env.reward(&state),
        mutation_count,
        forced_mutation_count,
    })
}

/// Unrestricted rollout from the policy.
pub fn sample_rollout<E: Environment, P: Policy<E>, R: Rng + ?Sized>(
    policy: &P,
    env: &E,
    rng: &mut R,
) -> Result<Chromosome> {
    let mut state = pick_start(env, rng)?;
    let mut weights = vec![0.0; env.branching()];
    while !env.is_terminal(&state) {
        policy.weights(env, &state, &mut weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NoFeasibleToken);
        }
        let slot = sample_index(&weights, total, rng);
        env.apply(&mut state, slot)?;
    }
    Ok(Chromosome::new(env.tokens(&state).to_vec(), env.reward(&state)))
}

/// Argmax rollout from the first start state; ties go to the smaller token.
pub fn greedy_rollout<E: Environment, P: Policy<E>>(policy: &P, env: &E) -> Result<Chromosome> {
    let mut state = env.initial_states().into_iter().next().ok_or(Error::Deadlock)?;
    let mut weights = vec![0.0; env.branching()];
    while !env.is_terminal(&state) {
        policy.weights(env, &state, &mut weights)?;
        let mut best: Option<(usize, f64, Token)> = None;
        for (slot, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let t = env.slot_token(&state, slot);
            let better = match best {
                None => true,
                Some((_, bw, bt)) => w > bw || (w == bw && t < bt),
            };
            if better {
                best = Some((slot, w, t));
            }
        }
        let (slot, _, _) = best.ok_or(Error::NoFeasibleToken)?;
        env.apply(&mut state, slot)?;
    }
    Ok(Chromosome::new(env.tokens(&state).to_vec(), env.reward(&state)))
}

/// A completed beam hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamHypothesis {
    pub chromosome: Chromosome,
    pub log_prob: f64,
}

struct Partial<S> {
    state: S,
    log_prob: f64,
}

fn beam_order(a_lp: f64, a: &[Token], b_lp: f64, b: &[Token]) -> Ordering {
    b_lp.total_cmp(&a_lp).then_with(|| a.cmp(b))
}

/// Breadth-synchronous beam search scored by cumulative log-probability.
///
/// Ties in log-probability go to the lexicographically smaller token sequence,
/// i.e. the smaller token id at the first difference. Returns at most `width`
/// completed sequences sorted by reward (best first).
pub fn beam_search<E: Environment, P: Policy<E>>(policy: &P, env: &E, width: usize) -> Result<Vec<BeamHypothesis>> {
    if width == 0 {
        return Err(Error::Config("beam width must be positive".into()));
    }
    let starts = env.initial_states();
    if starts.is_empty() {
        return Err(Error::Deadlock);
    }
    let start_lp = -(starts.len() as f64).ln();
    let mut beam: Vec<Partial<E::State>> = starts
        .into_iter()
        .take(width)
        .map(|state| Partial {
            state,
            log_prob: start_lp,
        })
        .collect();
    let mut finished: Vec<BeamHypothesis> = Vec::new();
    let mut probs = vec![0.0; env.branching()];

    while !beam.is_empty() {
        let mut candidates: Vec<Partial<E::State>> = Vec::new();
        for p in &beam {
            if env.is_terminal(&p.state) {
                continue;
            }
            policy.weights(env, &p.state, &mut probs)?;
            if normalize_in_place(&mut probs) <= 0.0 {
                return Err(Error::NoFeasibleToken);
            }
            for (slot, &pr) in probs.iter().enumerate() {
                if pr > 0.0 {
                    let mut state = p.state.clone();
                    env.apply(&mut state, slot)?;
                    candidates.push(Partial {
                        state,
                        log_prob: p.log_prob + pr.ln(),
                    });
                }
            }
        }
        candidates.sort_by(|a, b| beam_order(a.log_prob, env.tokens(&a.state), b.log_prob, env.tokens(&b.state)));
        candidates.truncate(width);
        beam.clear();
        for c in candidates {
            if env.is_terminal(&c.state) {
                finished.push(BeamHypothesis {
                    chromosome: Chromosome::new(env.tokens(&c.state).to_vec(), env.reward(&c.state)),
                    log_prob: c.log_prob,
                });
            } else {
                beam.push(c);
            }
        }
    }

    finished.sort_by(|a, b| beam_order(a.log_prob, &a.chromosome.tokens, b.log_prob, &b.chromosome.tokens));
    finished.truncate(width);
    finished.sort_by(|a, b| {
        b.chromosome
            .reward
            .total_cmp(&a.chromosome.reward)
            .then_with(|| beam_order(a.log_prob, &a.chromosome.tokens, b.log_prob, &b.chromosome.tokens))
    });
    Ok(finished)
}
