use super::{GameInstance, MinimaxSolver, Round};
use crate::class::ExpertClass;
use crate::error::{Error, Result};
use crate::loss::log_loss;
use crate::num::Real;
use crate::tree::BinaryTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Size limit for exhaustive sequence enumeration.
pub const MAX_ENUMERATION: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy<T = f64> {
    MinimaxOptimal,
    /// Posterior-mean prediction; the prior is normalized internally.
    BayesMixture {
        prior: Vec<T>,
    },
    Constant(T),
}

impl<T: Real> Strategy<T> {
    pub fn uniform_bayes(k: usize) -> Self {
        Strategy::BayesMixture { prior: vec![T::one(); k] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Adversary<T = f64> {
    FixedSequence(Vec<Round>),
    /// Contexts from a tree, outcomes drawn from the mean tree.
    Stochastic {
        contexts: BinaryTree<usize>,
        probs: BinaryTree<T>,
        seed: u64,
    },
    /// Replays the sequence found by [`worst_case_search`].
    MaximinSearch,
}

/// Record of one played game.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegretTrace<T = f64> {
    pub predictions: Vec<T>,
    pub outcomes: Vec<bool>,
    pub contexts: Vec<usize>,
    /// Player loss after each round.
    pub player_loss: Vec<T>,
    /// Loss of each expert after each round, minimized over experts.
    pub best_expert_loss: Vec<T>,
    pub regret: T,
}

/// `player - best`, with `-inf` when no expert gives the sequence positive likelihood.
fn regret_of<T: Real>(player: T, best: T) -> T {
    if best == T::infinity() {
        T::neg_infinity()
    } else {
        player - best
    }
}

impl<T: Real> RegretTrace<T> {
    /// Recomputes the final regret from the stored rounds and predictions.
    pub fn recompute(&self, class: &ExpertClass<T>) -> T {
        let player = self.predictions.iter().zip(&self.outcomes).fold(T::zero(), |acc, (&p, &y)| acc + log_loss(p, y));
        let best = (0..class.len())
            .map(|f| {
                self.contexts
                    .iter()
                    .zip(&self.outcomes)
                    .fold(T::zero(), |acc, (&x, &y)| acc + log_loss(class.value(f, x), y))
            })
            .fold(T::infinity(), |a, b| a.min(b));
        regret_of(player, best)
    }
}

struct Predictor<'a, T> {
    game: &'a GameInstance<T>,
    strategy: &'a Strategy<T>,
    solver: Option<MinimaxSolver<'a, T>>,
    log_prior: Vec<T>,
}

impl<'a, T: Real> Predictor<'a, T> {
    fn new(game: &'a GameInstance<T>, strategy: &'a Strategy<T>) -> Result<Self> {
        let mut log_prior = Vec::new();
        let solver = match strategy {
            Strategy::MinimaxOptimal => Some(MinimaxSolver::new(game)?),
            Strategy::BayesMixture { prior } => {
                if prior.len() != game.class().len() {
                    return Err(Error::DimensionMismatch { expected: game.class().len(), got: prior.len() });
                }
                if prior.iter().any(|w| !(*w >= T::zero() && w.is_finite())) || prior.iter().all(|w| *w == T::zero()) {
                    return Err(Error::InvalidArgument(
                        "prior weights must be finite, nonnegative, not all zero".into(),
                    ));
                }
                log_prior = prior.iter().map(|w| w.ln()).collect();
                None
            }
            Strategy::Constant(c) => {
                if !(*c >= T::zero() && *c <= T::one()) {
                    return Err(Error::InvalidArgument(format!("constant prediction {c} outside [0, 1]")));
                }
                None
            }
        };
        Ok(Predictor { game, strategy, solver, log_prior })
    }

    fn predict(&self, history: &[Round], ll: &[T], x: usize) -> Result<T> {
        match self.strategy {
            Strategy::MinimaxOptimal => match self.solver.as_ref().expect("solver").optimal_prediction(history, x) {
                // histories no expert can produce: any prediction is fine
                Err(Error::Degenerate(_)) => Ok(T::lit(0.5)),
                r => r,
            },
            Strategy::Constant(c) => Ok(*c),
            Strategy::BayesMixture { .. } => {
                let lw: Vec<T> = self.log_prior.iter().zip(ll).map(|(&a, &b)| a + b).collect();
                let m = lw.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
                if m == T::neg_infinity() {
                    return Ok(T::lit(0.5));
                }
                let (mut num, mut den) = (T::zero(), T::zero());
                for (f, &l) in lw.iter().enumerate() {
                    let w = (l - m).exp();
                    num = num + w * self.game.class().value(f, x);
                    den = den + w;
                }
                Ok((num / den).max(T::zero()).min(T::one()))
            }
        }
    }
}

fn replay<T: Real>(pred: &Predictor<'_, T>, game: &GameInstance<T>, seq: &[Round]) -> Result<RegretTrace<T>> {
    let class = game.class();
    let mut ll = vec![T::zero(); class.len()];
    let mut tr = RegretTrace {
        predictions: Vec::with_capacity(seq.len()),
        outcomes: Vec::with_capacity(seq.len()),
        contexts: Vec::with_capacity(seq.len()),
        player_loss: Vec::with_capacity(seq.len()),
        best_expert_loss: Vec::with_capacity(seq.len()),
        regret: T::zero(),
    };
    let mut player = T::zero();
    for (t, &(x, y)) in seq.iter().enumerate() {
        if x >= class.num_contexts() {
            return Err(Error::UnknownContext(x));
        }
        if !game.available(&seq[..t]).contains(&x) {
            return Err(Error::InconsistentContexts { round: t + 1 });
        }
        let p = pred.predict(&seq[..t], &ll, x)?;
        player = player + log_loss(p, y);
        for (f, l) in ll.iter_mut().enumerate() {
            *l = *l + class.log_lik(f, x, y);
        }
        tr.predictions.push(p);
        tr.outcomes.push(y);
        tr.contexts.push(x);
        tr.player_loss.push(player);
        tr.best_expert_loss.push(-ll.iter().fold(T::neg_infinity(), |a, &b| a.max(b)));
    }
    tr.regret = regret_of(player, *tr.best_expert_loss.last().unwrap_or(&T::zero()));
    Ok(tr)
}

/// Plays `strategy` against `adversary` for the full horizon.
pub fn run_strategy<T: Real>(
    game: &GameInstance<T>,
    strategy: &Strategy<T>,
    adversary: &Adversary<T>,
) -> Result<RegretTrace<T>> {
    let n = game.horizon();
    match adversary {
        Adversary::FixedSequence(seq) => {
            if seq.len() != n {
                return Err(Error::Incompatible(format!("fixed sequence has {} rounds, horizon is {n}", seq.len())));
            }
            replay(&Predictor::new(game, strategy)?, game, seq)
        }
        Adversary::Stochastic { contexts, probs, seed } => {
            if contexts.depth() != n || probs.depth() != n {
                return Err(Error::Incompatible("stochastic adversary trees must have depth n".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut seq = Vec::with_capacity(n);
            let mut q = 0u64;
            for t in 1..=n {
                let p = probs.get(t, q).as_f64();
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!("mean {p} outside [0, 1]")));
                }
                let y = rng.random::<f64>() < p;
                seq.push((*contexts.get(t, q), y));
                q |= (y as u64) << (t - 1);
            }
            replay(&Predictor::new(game, strategy)?, game, &seq)
        }
        Adversary::MaximinSearch => {
            let (seq, _) = worst_case_search(game, strategy)?;
            replay(&Predictor::new(game, strategy)?, game, &seq)
        }
    }
}

struct Search<'a, T> {
    pred: Predictor<'a, T>,
    best: Option<(Vec<Round>, T)>,
}

impl<T: Real> Search<'_, T> {
    fn finish(&mut self, hist: &[Round], ll: &[T], player: T) {
        let best_loss = -ll.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        let r = regret_of(player, best_loss);
        let better = match &self.best {
            None => true,
            Some((_, b)) if *b == T::neg_infinity() => r > *b,
            Some((_, b)) => r > *b + T::lit(1e-12) * b.abs().max(T::one()),
        };
        if better {
            self.best = Some((hist.to_vec(), r));
        }
    }

    fn go(&mut self, hist: &mut Vec<Round>, ll: &[T], player: T) -> Result<()> {
        let game = self.pred.game;
        if hist.len() == game.horizon() {
            self.finish(hist, ll, player);
            return Ok(());
        }
        let class = game.class();
        for x in game.available(hist) {
            let p = self.pred.predict(hist, ll, x)?;
            for y in [false, true] {
                hist.push((x, y));
                let next: Vec<T> = ll.iter().enumerate().map(|(f, &l)| l + class.log_lik(f, x, y)).collect();
                self.go(hist, &next, player + log_loss(p, y))?;
                hist.pop();
            }
        }
        Ok(())
    }
}

/// Exhaustive search for the sequence maximizing the strategy's regret. Ties
/// (within a relative 1e-12) go to the lexicographically smallest sequence.
pub fn worst_case_search<T: Real>(game: &GameInstance<T>, strategy: &Strategy<T>) -> Result<(Vec<Round>, T)> {
    let n = game.horizon() as i32;
    let k = game.rule().max_available(game.class().num_contexts()) as f64;
    let size = 2f64.powi(n) * k.powi(n);
    if size > MAX_ENUMERATION {
        return Err(Error::TooLarge { what: "sequence enumeration", size, limit: MAX_ENUMERATION });
    }
    let mut s = Search { pred: Predictor::new(game, strategy)?, best: None };
    s.go(&mut Vec::new(), &vec![T::zero(); game.class().len()], T::zero())?;
    Ok(s.best.expect("at least one sequence"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::exact_minimax;

    #[test]
    fn constant_half_against_all_ones() {
        let g = GameInstance::new(3, ExpertClass::<f64>::constants(&[1.0]).unwrap()).unwrap();
        let seq = vec![(0, true); 3];
        let tr = run_strategy(&g, &Strategy::Constant(0.5), &Adversary::FixedSequence(seq)).unwrap();
        assert!((tr.regret - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((tr.recompute(g.class()) - tr.regret).abs() < 1e-12);
    }

    #[test]
    fn minimax_strategy_is_an_equalizer() {
        let class =
            ExpertClass::<f64>::with_contexts(2, vec![vec![0.1, 0.8], vec![0.6, 0.3], vec![0.45, 0.95]]).unwrap();
        let g = GameInstance::new(3, class).unwrap();
        let v = exact_minimax(&g).unwrap();
        let tr = run_strategy(&g, &Strategy::MinimaxOptimal, &Adversary::MaximinSearch).unwrap();
        assert!((tr.regret - v).abs() < 1e-9);
        let (_, w) = worst_case_search(&g, &Strategy::MinimaxOptimal).unwrap();
        assert!((w - v).abs() < 1e-9);
    }

    #[test]
    fn singleton_mimic_has_zero_worst_regret() {
        let g = GameInstance::new(4, ExpertClass::<f64>::constants(&[0.35]).unwrap()).unwrap();
        for s in [Strategy::MinimaxOptimal, Strategy::uniform_bayes(1), Strategy::Constant(0.35)] {
            let (_, r) = worst_case_search(&g, &s).unwrap();
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn bayes_on_two_constants_is_within_log_two() {
        let g = GameInstance::new(4, ExpertClass::<f64>::constants(&[0.3, 0.7]).unwrap()).unwrap();
        let (_, r) = worst_case_search(&g, &Strategy::uniform_bayes(2)).unwrap();
        assert!(r <= std::f64::consts::LN_2 + 1e-12);
    }

    #[test]
    fn stochastic_adversary_is_seeded() {
        let g = GameInstance::new(5, ExpertClass::<f64>::constants(&[0.2, 0.6]).unwrap()).unwrap();
        let adv = Adversary::Stochastic {
            contexts: BinaryTree::constant(5, 0).unwrap(),
            probs: BinaryTree::constant(5, 0.5).unwrap(),
            seed: 9,
        };
        let a = run_strategy(&g, &Strategy::uniform_bayes(2), &adv).unwrap();
        let b = run_strategy(&g, &Strategy::uniform_bayes(2), &adv).unwrap();
        assert_eq!(a, b);
        assert!((a.recompute(g.class()) - a.regret).abs() < 1e-12);
    }

    #[test]
    fn incompatible_inputs() {
        let g = GameInstance::new(2, ExpertClass::<f64>::constants(&[0.2]).unwrap()).unwrap();
        let short = Adversary::FixedSequence(vec![(0, true)]);
        assert!(matches!(run_strategy(&g, &Strategy::Constant(0.5), &short), Err(Error::Incompatible(_))));
        let bad_ctx = Adversary::FixedSequence(vec![(0, true), (1, true)]);
        assert!(run_strategy(&g, &Strategy::Constant(0.5), &bad_ctx).is_err());
        let bad_prior = Strategy::BayesMixture { prior: vec![1.0, 1.0] };
        assert!(run_strategy(&g, &bad_prior, &Adversary::MaximinSearch).is_err());
        let big = GameInstance::new(30, ExpertClass::<f64>::constants(&[0.2]).unwrap()).unwrap();
        assert!(worst_case_search(&big, &Strategy::Constant(0.5)).is_err());
    }

    #[test]
    fn zero_likelihood_sequences_do_not_produce_nan() {
        let g = GameInstance::new(2, ExpertClass::<f64>::constants(&[0.0, 1.0]).unwrap()).unwrap();
        let (_, r) = worst_case_search(&g, &Strategy::uniform_bayes(2)).unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-12);
    }
}
