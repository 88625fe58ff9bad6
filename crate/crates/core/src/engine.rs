//! Population loop: rank-based parent selection, offspring decoding, and
//! rank-based replacement over the union of parents and offspring.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoding::{ngs_rollout, sample_rollout, Environment, Policy, Token};
use crate::error::{Error, Result};
use crate::rng::{substream, REPLACE_STREAM, SELECT_STREAM};

/// A complete sequence with its reward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub tokens: Vec<Token>,
    pub reward: f64,
    /// Steps decoded without the parent restriction.
    pub mutation_count: usize,
    /// Steps where the restriction had no feasible mass.
    pub forced_mutation_count: usize,
}

impl Chromosome {
    pub fn new(tokens: Vec<Token>, reward: f64) -> Self {
        Self {
            tokens,
            reward,
            mutation_count: 0,
            forced_mutation_count: 0,
        }
    }
}

/// Members sorted by nonincreasing reward; rank 0 is the best.
///
/// Equal rewards keep insertion order, so older members rank ahead.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Chromosome>,
    capacity: usize,
}

fn sort_by_reward(members: &mut [Chromosome]) {
    members.sort_by(|a, b| b.reward.total_cmp(&a.reward));
}

impl Population {
    pub fn new(mut members: Vec<Chromosome>, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("population capacity must be positive".into()));
        }
        if members.len() > capacity {
            return Err(Error::LengthMismatch {
                expected: capacity,
                got: members.len(),
            });
        }
        sort_by_reward(&mut members);
        Ok(Self { members, capacity })
    }

    pub fn members(&self) -> &[Chromosome] {
        &self.members
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Chromosome> {
        self.members.first()
    }
}

/// Search hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgsConfig {
    pub n_pop: usize,
    pub n_off: usize,
    pub n_iter: usize,
    /// Stochastic mutation rate.
    pub mu: f64,
    /// Rank weight shift; larger values flatten selection.
    pub kappa: f64,
    /// Weight of the novelty rank; 0 ranks by reward alone.
    pub omega: f64,
    pub token_discard: bool,
    pub seed: u64,
}

impl Default for NgsConfig {
    /// 100 + 9 × 100 = 1,000 evaluations.
    fn default() -> Self {
        Self {
            n_pop: 100,
            n_off: 100,
            n_iter: 9,
            mu: 0.01,
            kappa: 0.001,
            omega: 0.0,
            token_discard: false,
            seed: 0,
        }
    }
}

impl NgsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_pop == 0 {
            return bad("n_pop must be positive");
        }
        if self.n_off == 0 {
            return bad("n_off must be positive");
        }
        if self.n_iter > 0 && self.n_pop < 2 {
            return Err(Error::PopulationTooSmall(self.n_pop));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad("mu must lie in [0, 1]");
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return bad("kappa must be positive");
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return bad("omega must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.n_pop + self.n_iter * self.n_off
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// `(iteration, best reward so far)`; iteration 0 is the initial population.
    pub best_per_iteration: Vec<(usize, f64)>,
    pub final_population: Population,
    pub total_evaluations: usize,
    pub best: Chromosome,
}

fn shifted_inverse(ranks: impl Iterator<Item = f64>, kappa: f64, size: usize) -> Vec<f64> {
    let shift = kappa * size as f64;
    let mut w: Vec<f64> = ranks.map(|r| 1.0 / (shift + r)).collect();
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}

/// Selection probabilities `∝ 1 / (kappa·|P| + rank)` over the members.
pub fn rank_probabilities(pop: &Population, kappa: f64) -> Result<Vec<f64>> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if !(kappa > 0.0) {
        return Err(Error::Config("kappa must be positive".into()));
    }
    Ok(shifted_inverse((0..pop.len()).map(|r| r as f64), kappa, pop.len()))
}

/// Positions `0..len` ordered by descending score, ties by position.
fn descending_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r as f64;
    }
    ranks
}

/// `(1 - omega) · reward_rank + omega · novelty_rank`, with the most novel
/// member at novelty rank 0.
pub fn weighted_rank(pop: &Population, novelty_scores: &[f64], omega: f64) -> Result<Vec<f64>> {
    weighted_rank_of(pop.len(), novelty_scores, omega)
}

fn weighted_rank_of(len: usize, novelty_scores: &[f64], omega: f64) -> Result<Vec<f64>> {
    if novelty_scores.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: novelty_scores.len(),
        });
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::Config("omega must lie in [0, 1]".into()));
    }
    let novelty_rank = descending_ranks(novelty_scores);
    Ok(novelty_rank
        .iter()
        .enumerate()
        .map(|(r, &nr)| (1.0 - omega) * r as f64 + omega * nr)
        .collect())
}

fn jaccard(a: &HashSet<Token>, b: &HashSet<Token>) -> f64 {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    if union == 0 {
        1.0
    } else {
        common as f64 / union as f64
    }
}

/// Mean Jaccard distance between `candidate` and each of `others`.
pub fn novelty_of(candidate: &HashSet<Token>, others: &[HashSet<Token>]) -> f64 {
    if others.is_empty() {
        return 0.0;
    }
    others.iter().map(|o| 1.0 - jaccard(candidate, o)).sum::<f64>() / others.len() as f64
}

/// Mean Jaccard distance between the token set of `c` and each member's.
pub fn novelty(c: &Chromosome, pop: &Population) -> f64 {
    let own: HashSet<Token> = c.tokens.iter().copied().collect();
    let others: Vec<HashSet<Token>> = pop.members.iter().map(|m| m.tokens.iter().copied().collect()).collect();
    novelty_of(&own, &others)
}

/// Selection weights over `len` reward-sorted slots.
fn slot_probabilities(len: usize, kappa: f64, omega: f64, novelty: Option<&[f64]>) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::EmptyPopulation);
    }
    if !(kappa > 0.0) {
        return Err(Error::Config("kappa must be positive".into()));
    }
    if omega > 0.0 {
        let scores = novelty.ok_or(Error::MissingNovelty)?;
        let ranks = weighted_rank_of(len, scores, omega)?;
        Ok(shifted_inverse(ranks.into_iter(), kappa, len))
    } else {
        Ok(shifted_inverse((0..len).map(|r| r as f64), kappa, len))
    }
}

/// Draws `k` distinct slots, renormalizing after each draw.
fn draw_without_replacement<R: Rng + ?Sized>(weights: &mut [f64], k: usize, rng: &mut R) -> Vec<usize> {
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = weights.iter().sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut choice = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                choice = Some(i);
                if u < acc {
                    break;
                }
            }
        }
        let i = choice.expect("k must not exceed the number of positive weights");
        weights[i] = 0.0;
        picked.push(i);
    }
    picked
}

/// Draws `n_off` parent pairs as population slots. Within a pair the two
/// slots differ; pairs are independent of each other.
///
/// `novelty`, aligned with the members, is required when `omega > 0`.
pub fn select_parent_pairs<R: Rng + ?Sized>(
    pop: &Population,
    n_off: usize,
    kappa: f64,
    omega: f64,
    novelty: Option<&[f64]>,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if pop.len() < 2 {
        return Err(Error::PopulationTooSmall(pop.len()));
    }
    let probs = slot_probabilities(pop.len(), kappa, omega, novelty)?;
    let mut scratch = probs.clone();
    let mut pairs = Vec::with_capacity(n_off);
    for _ in 0..n_off {
        scratch.copy_from_slice(&probs);
        let d = draw_without_replacement(&mut scratch, 2, rng);
        pairs.push((d[0], d[1]));
    }
    Ok(pairs)
}

/// Samples `capacity` survivors without replacement from members followed by
/// offspring, ranked by reward over that union.
///
/// `novelty`, aligned with `members ++ offspring`, is required when
/// `omega > 0`.
pub fn replace<R: Rng + ?Sized>(
    pop: Population,
    offspring: Vec<Chromosome>,
    kappa: f64,
    omega: f64,
    novelty: Option<&[f64]>,
    rng: &mut R,
) -> Result<Population> {
    let capacity = pop.capacity;
    let union_len = pop.len() + offspring.len();
    if union_len < capacity {
        return Err(Error::UnionTooSmall {
            union: union_len,
            capacity,
        });
    }
    let mut tagged: Vec<(usize, Chromosome)> = pop.members.into_iter().chain(offspring).enumerate().collect();
    tagged.sort_by(|a, b| b.1.reward.total_cmp(&a.1.reward));
    let sorted_novelty: Option<Vec<f64>> = match (omega > 0.0, novelty) {
        (true, Some(nv)) => {
            if nv.len() != union_len {
                return Err(Error::LengthMismatch {
                    expected: union_len,
                    got: nv.len(),
                });
            }
            Some(tagged.iter().map(|(i, _)| nv[*i]).collect())
        }
        (true, None) => return Err(Error::MissingNovelty),
        (false, _) => None,
    };
    let mut weights = slot_probabilities(union_len, kappa, omega, sorted_novelty.as_deref())?;
    let mut keep = draw_without_replacement(&mut weights, capacity, rng);
    keep.sort_unstable();
    let mut slots: Vec<Option<Chromosome>> = tagged.into_iter().map(|(_, c)| Some(c)).collect();
    let members = keep
        .into_iter()
        .map(|i| slots[i].take().expect("distinct slots"))
        .collect();
    Ok(Population { members, capacity })
}

fn token_sets<E: Environment>(env: &E, members: &[Chromosome]) -> Vec<HashSet<Token>> {
    members
        .iter()
        .map(|m| env.parent_tokens(&m.tokens).into_iter().collect())
        .collect()
}

fn novelty_scores<E: Environment>(env: &E, members: &[Chromosome]) -> Vec<f64> {
    let sets = token_sets(env, members);
    sets.iter().map(|s| novelty_of(s, &sets)).collect()
}

/// Post-processing applied to every decoded sequence before evaluation,
/// e.g. local search.
pub type Refiner<'a> = dyn Fn(Chromosome) -> Result<Chromosome> + Sync + 'a;

/// Runs the genetic search.
pub fn run_ngs<E: Environment, P: Policy<E>>(policy: &P, env: &E, config: &NgsConfig) -> Result<SearchResult> {
    run_ngs_with(policy, env, config, None)
}

/// [`run_ngs`] with an optional refiner applied to every decoded sequence.
pub fn run_ngs_with<E: Environment, P: Policy<E>>(
    policy: &P,
    env: &E,
    config: &NgsConfig,
    refine: Option<&Refiner<'_>>,
) -> Result<SearchResult> {
    config.validate()?;
    let seed = config.seed;
    let finish = |c: Chromosome| -> Result<Chromosome> {
        match refine {
            Some(f) => f(c),
            None => Ok(c),
        }
    };

    let initial: Vec<Chromosome> = (0..config.n_pop)
        .into_par_iter()
        .map(|i| finish(sample_rollout(policy, env, &mut substream(seed, 0, i as u64))?))
        .collect::<Result<_>>()?;
    let mut best = initial
        .iter()
        .fold(None::<&Chromosome>, |b, c| match b {
            Some(b) if b.reward >= c.reward => Some(b),
            _ => Some(c),
        })
        .cloned()
        .ok_or(Error::EmptyPopulation)?;
    let mut pop = Population::new(initial, config.n_pop)?;
    let mut best_per_iteration = vec![(0, best.reward)];

    for it in 1..=config.n_iter {
        let it64 = it as u64;
        let select_novelty = (config.omega > 0.0).then(|| novelty_scores(env, pop.members()));
        let pairs = select_parent_pairs(
            &pop,
            config.n_off,
            config.kappa,
            config.omega,
            select_novelty.as_deref(),
            &mut substream(seed, it64, SELECT_STREAM),
        )?;
        let members = pop.members();
        let offspring: Vec<Chromosome> = pairs
            .par_iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let mut rng = substream(seed, it64, k as u64);
                let child = ngs_rollout(
                    policy,
                    env,
                    (&members[a], &members[b]),
                    config.mu,
                    config.token_discard,
                    &mut rng,
                )?;
                finish(child)
            })
            .collect::<Result<_>>()?;
        for c in &offspring {
            if c.reward > best.reward {
                best = c.clone();
            }
        }
        let replace_novelty = (config.omega > 0.0).then(|| {
            let union: Vec<Chromosome> = pop.members().iter().chain(&offspring).cloned().collect();
            novelty_scores(env, &union)
        });
        pop = replace(
            pop,
            offspring,
            config.kappa,
            config.omega,
            replace_novelty.as_deref(),
            &mut substream(seed, it64, REPLACE_STREAM),
        )?;
        best_per_iteration.push((it, best.reward));
    }

    Ok(SearchResult {
        best_per_iteration,
        final_population: pop,
        total_evaluations: config.evaluations(),
        best,
    })
}

/// Best-of-`n` unrestricted sampling on the same random streams as the
/// initial population of [`run_ngs`].
pub fn best_of_n<E: Environment, P: Policy<E>>(
    policy: &P,
    env: &E,
    n: usize,
    seed: u64,
    refine: Option<&Refiner<'_>>,
) -> Result<Chromosome> {
    let samples: Vec<Chromosome> = (0..n)
        .into_par_iter()
        .map(|i| {
            let c = sample_rollout(policy, env, &mut substream(seed, 0, i as u64))?;
            match refine {
                Some(f) => f(c),
                None => Ok(c),
            }
        })
        .collect::<Result<_>>()?;
    samples
        .into_iter()
        .reduce(|b, c| if c.reward > b.reward { c } else { b })
        .ok_or(Error::Config("sample count must be positive".into()))
}

/// Generation rounds needed for `k` sequences at mini-batch size `m`:
/// `(plain sampling, genetic search)`.
pub fn budget_iterations(k: usize, m: usize, n_pop: usize, n_off: usize) -> (usize, usize) {
    let plain = k.div_ceil(m);
    let init = n_pop.div_ceil(m);
    if k <= n_pop {
        return (plain, init);
    }
    (plain, init + (k - n_pop).div_ceil(n_off) * n_off.div_ceil(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heatmap::Heatmap;
    use crate::routing::RoutingInstance;
    use proptest::prelude::*;

    fn pop_of(rewards: &[f64]) -> Population {
        let members = rewards
            .iter()
            .enumerate()
            .map(|(i, &r)| Chromosome::new(vec![Token(i as u32)], r))
            .collect();
        Population::new(members, rewards.len()).unwrap()
    }

    #[test]
    fn rank_probabilities_examples() {
        let p = rank_probabilities(&pop_of(&[2.0, 1.0]), 0.001).unwrap();
        // Frozen from a direct evaluation of the rank formula.
        assert!((p[0] - 0.998_007_968_127_49).abs() < 1e-12);
        assert!((p[1] - 0.001_992_031_872_509_96).abs() < 1e-12);
        let p = rank_probabilities(&pop_of(&[3.0, 2.0, 1.0]), 0.01).unwrap();
        let want = [
            0.957_941_998_442_296_2,
            0.027_901_223_255_600_86,
            0.014_156_778_302_102_9,
        ];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{p:?}");
        }
        assert_eq!(rank_probabilities(&pop_of(&[5.0]), 0.3).unwrap(), vec![1.0]);
        assert!(matches!(
            rank_probabilities(&Population::new(vec![], 3).unwrap(), 0.1),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn equal_rewards_keep_insertion_order() {
        let pop = pop_of(&[1.0, 2.0, 1.0]);
        let ids: Vec<u32> = pop.members().iter().map(|m| m.tokens[0].0).collect();
        assert_eq!(ids, vec![1, 0, 2]);
    }

    #[test]
    fn weighted_rank_examples() {
        let pop = pop_of(&[3.0, 2.0, 1.0]);
        // novelty ranks (2, 0, 1)
        let nov = [0.1, 0.9, 0.5];
        assert_eq!(weighted_rank(&pop, &nov, 0.0).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(weighted_rank(&pop, &nov, 1.0).unwrap(), vec![2.0, 0.0, 1.0]);
        let w = weighted_rank(&pop, &nov, 0.1).unwrap();
        for (a, b) in w.iter().zip([0.2, 0.9, 1.9]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            weighted_rank(&pop, &[0.0], 0.1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn novelty_examples() {
        let c = Chromosome::new(vec![Token(1), Token(2)], 0.0);
        let same = Population::new(vec![c.clone(), c.clone()], 2).unwrap();
        assert_eq!(novelty(&c, &same), 0.0);
        let disjoint = pop_of(&[0.0, 0.0]);
        let far = Chromosome::new(vec![Token(7)], 0.0);
        assert_eq!(novelty(&far, &disjoint), 1.0);
        // Jaccard 1.0 and 0.5
        let half = Chromosome::new(vec![Token(1), Token(2), Token(3), Token(4)], 0.0);
        let mixed = Population::new(vec![c.clone(), half], 2).unwrap();
        assert_eq!(novelty(&c, &mixed), 0.25);
    }

    #[test]
    fn parent_pairs_edge_cases() {
        let mut rng = substream(0, 0, 0);
        let pop = pop_of(&[1.0, 0.0]);
        assert!(select_parent_pairs(&pop, 0, 0.01, 0.0, None, &mut rng)
            .unwrap()
            .is_empty());
        for (a, b) in select_parent_pairs(&pop, 50, 0.01, 0.0, None, &mut rng).unwrap() {
            assert_ne!(a, b);
        }
        assert!(matches!(
            select_parent_pairs(&pop_of(&[1.0]), 1, 0.01, 0.0, None, &mut rng),
            Err(Error::PopulationTooSmall(1))
        ));
        assert!(matches!(
            select_parent_pairs(&pop, 1, 0.01, 0.5, None, &mut rng),
            Err(Error::MissingNovelty)
        ));
    }

    #[test]
    fn replace_without_offspring_keeps_members() {
        let pop = pop_of(&[4.0, 3.0, 2.0, 1.0]);
        let out = replace(pop.clone(), vec![], 0.001, 0.0, None, &mut substream(1, 1, 1)).unwrap();
        assert_eq!(out, pop);
    }

    #[test]
    fn replace_all_survive_when_capacity_matches_union() {
        let pop = Population::new(vec![Chromosome::new(vec![], 1.0)], 3).unwrap();
        let off = vec![Chromosome::new(vec![], 5.0), Chromosome::new(vec![], 0.0)];
        let out = replace(pop, off, 0.5, 0.0, None, &mut substream(2, 2, 2)).unwrap();
        let r: Vec<f64> = out.members().iter().map(|m| m.reward).collect();
        assert_eq!(r, vec![5.0, 1.0, 0.0]);
    }

    #[test]
    fn replace_rejects_small_union() {
        let pop = Population::new(vec![Chromosome::new(vec![], 1.0)], 3).unwrap();
        assert!(matches!(
            replace(pop, vec![], 0.5, 0.0, None, &mut substream(0, 0, 0)),
            Err(Error::UnionTooSmall { union: 1, capacity: 3 })
        ));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_iterations(1000, 1000, 100, 100), (1, 10));
        assert_eq!(budget_iterations(7, 7, 7, 7), (1, 1));
        assert_eq!(budget_iterations(200, 50, 100, 100), (4, 4));
        assert_eq!(budget_iterations(50, 10, 100, 100), (5, 10));
    }

    fn square() -> RoutingInstance {
        RoutingInstance::tsp("sq", vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn finds_square_perimeter() {
        let inst = square();
        let hm = Heatmap::inverse_distance(&inst, 1.0).unwrap();
        let cfg = NgsConfig {
            n_pop: 8,
            n_off: 8,
            n_iter: 5,
            seed: 3,
            ..NgsConfig::default()
        };
        let res = run_ngs(&hm, &inst, &cfg).unwrap();
        assert_eq!(res.best.reward, -4.0);
        assert_eq!(res.total_evaluations, 48);
        assert_eq!(res.best_per_iteration.len(), 6);
        assert_eq!(res.final_population.len(), 8);
    }

    #[test]
    fn zero_iterations_equals_best_of_n() {
        let inst = RoutingInstance::tsp(
            "p",
            (0..9)
                .map(|i| [((i * 37) % 11) as f64 / 11.0, ((i * 53) % 13) as f64 / 13.0])
                .collect(),
        )
        .unwrap();
        let hm = Heatmap::inverse_distance(&inst, 3.0).unwrap();
        let cfg = NgsConfig {
            n_pop: 20,
            n_iter: 0,
            seed: 99,
            ..NgsConfig::default()
        };
        let res = run_ngs(&hm, &inst, &cfg).unwrap();
        let b = best_of_n(&hm, &inst, 20, 99, None).unwrap();
        assert_eq!(res.best.reward, b.reward);
        assert_eq!(res.best_per_iteration, vec![(0, b.reward)]);
    }

    #[test]
    fn config_errors() {
        let cfg = NgsConfig {
            n_pop: 1,
            n_iter: 1,
            ..NgsConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::PopulationTooSmall(1))));
        let cfg = NgsConfig {
            mu: 1.5,
            ..NgsConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn rank_probabilities_sum_to_one_and_decrease(len in 1usize..200, kappa in 1e-4f64..10.0) {
            let pop = pop_of(&vec![0.0; len]);
            let p = rank_probabilities(&pop, kappa).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.windows(2).all(|w| w[0] > w[1]));
        }

        #[test]
        fn replace_keeps_capacity_and_membership(
            rewards in proptest::collection::vec(-10.0f64..10.0, 2..30),
            extra in proptest::collection::vec(-10.0f64..10.0, 0..30),
            seed in any::<u64>(),
        ) {
            let pop = pop_of(&rewards);
            let off: Vec<Chromosome> = extra
                .iter()
                .enumerate()
                .map(|(i, &r)| Chromosome::new(vec![Token(1000 + i as u32)], r))
                .collect();
            let all: Vec<Chromosome> = pop.members().iter().chain(&off).cloned().collect();
            let out = replace(pop, off, 0.01, 0.0, None, &mut substream(seed, 0, 0)).unwrap();
            prop_assert_eq!(out.len(), rewards.len());
            prop_assert!(out.members().iter().all(|m| all.contains(m)));
            prop_assert!(out.members().windows(2).all(|w| w[0].reward >= w[1].reward));
        }

        #[test]
        fn zero_omega_is_identity(len in 1usize..50) {
            let pop = pop_of(&vec![1.0; len]);
            let nov: Vec<f64> = (0..len).map(|i| (i * 7 % 5) as f64).collect();
            let w = weighted_rank(&pop, &nov, 0.0).unwrap();
            prop_assert_eq!(w, (0..len).map(|i| i as f64).collect::<Vec<_>>());
        }
    }
}
