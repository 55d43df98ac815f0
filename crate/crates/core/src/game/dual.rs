use super::{GameInstance, MinimaxSolver, Round};
use crate::error::{Error, Result};
use crate::loss::log_loss;
use crate::num::Real;
use crate::optim::golden_max;
use crate::tree::BinaryTree;
use rand::Rng;

/// Largest horizon accepted by [`dual_value`].
pub const MAX_DUAL_DEPTH: usize = 20;

/// Adversary for the swapped game: a context tree and a tree of outcome means.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DualStrategy<T = f64> {
    pub context_tree: BinaryTree<usize>,
    pub prob_tree: BinaryTree<T>,
}

fn history_of(ctx: &BinaryTree<usize>, t: usize, q: u64) -> Vec<Round> {
    (1..t)
        .map(|s| {
            let prefix = q & ((1u64 << (s - 1)) - 1);
            (*ctx.get(s, prefix), (q >> (s - 1)) & 1 == 1)
        })
        .collect()
}

impl<T: Real> DualStrategy<T> {
    pub fn new(context_tree: BinaryTree<usize>, prob_tree: BinaryTree<T>) -> Result<Self> {
        if context_tree.depth() != prob_tree.depth() {
            return Err(Error::DimensionMismatch { expected: context_tree.depth(), got: prob_tree.depth() });
        }
        if let Some(p) = prob_tree.nodes().iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        Ok(DualStrategy { context_tree, prob_tree })
    }

    pub fn depth(&self) -> usize {
        self.context_tree.depth()
    }

    /// Context ids are known and allowed by the game's availability rule on every path.
    pub fn check_consistent(&self, game: &GameInstance<T>) -> Result<()> {
        let n = game.horizon();
        if self.depth() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.depth() });
        }
        for t in 1..=n {
            for q in 0..(1u64 << (t - 1)) {
                let x = *self.context_tree.get(t, q);
                if x >= game.class().num_contexts() {
                    return Err(Error::UnknownContext(x));
                }
                if !game.available(&history_of(&self.context_tree, t, q)).contains(&x) {
                    return Err(Error::InconsistentContexts { round: t });
                }
            }
        }
        Ok(())
    }

    /// Uniformly random available contexts and i.i.d. uniform means.
    pub fn random<R: Rng + ?Sized>(game: &GameInstance<T>, rng: &mut R) -> Result<Self> {
        let n = game.horizon();
        if n > MAX_DUAL_DEPTH {
            return Err(Error::TooLarge { what: "dual tree depth", size: n as f64, limit: MAX_DUAL_DEPTH as f64 });
        }
        let mut ctx = BinaryTree::constant(n, 0usize)?;
        for t in 1..=n {
            for q in 0..(1u64 << (t - 1)) {
                let avail = game.available(&history_of(&ctx, t, q));
                ctx.set(t, q, avail[rng.random_range(0..avail.len())]);
            }
        }
        let probs = BinaryTree::from_fn(n, |_, _| T::lit(rng.random::<f64>()))?;
        DualStrategy::new(ctx, probs)
    }

    /// The primal solution read as a dual strategy: the adversary's best contexts and
    /// the saddle-point predictions as outcome means.
    pub fn from_primal(solver: &MinimaxSolver<'_, T>) -> Result<Self> {
        let game = solver.game();
        let n = game.horizon();
        if n > MAX_DUAL_DEPTH {
            return Err(Error::TooLarge { what: "dual tree depth", size: n as f64, limit: MAX_DUAL_DEPTH as f64 });
        }
        let mut ctx = BinaryTree::constant(n, 0usize)?;
        let mut probs = BinaryTree::constant(n, T::lit(0.5))?;
        for t in 1..=n {
            for q in 0..(1u64 << (t - 1)) {
                let h = history_of(&ctx, t, q);
                let x = solver.best_context(&h)?;
                ctx.set(t, q, x);
                // unreachable prefixes keep 1/2
                if let Ok(p) = solver.optimal_prediction(&h, x) {
                    probs.set(t, q, p);
                }
            }
        }
        DualStrategy::new(ctx, probs)
    }
}

struct DualEval<'a, T> {
    game: &'a GameInstance<T>,
    s: &'a DualStrategy<T>,
}

impl<T: Real> DualEval<'_, T> {
    // expected regret below node (t, q), weighted by the path probability so far
    fn go(&self, t: usize, q: u64, prob: T, player: T, ll: &[T]) -> T {
        let n = self.game.horizon();
        if t > n {
            let best = ll.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
            return prob * (player + best);
        }
        let x = *self.s.context_tree.get(t, q);
        let p = *self.s.prob_tree.get(t, q);
        let class = self.game.class();
        let branch = |y: bool| -> T {
            let py = if y { p } else { T::one() - p };
            if py == T::zero() {
                return T::zero();
            }
            let next: Vec<T> = ll.iter().enumerate().map(|(f, &l)| l + class.log_lik(f, x, y)).collect();
            let q2 = q | ((y as u64) << (t - 1));
            self.go(t + 1, q2, prob * py, player + log_loss(p, y), &next)
        };
        if t <= 3 && n >= 10 {
            let (a, b) = rayon::join(|| branch(false), || branch(true));
            a + b
        } else {
            branch(false) + branch(true)
        }
    }
}

/// Expected regret of playing `p_t` against the outcome means `p_t` along the dual trees.
pub fn dual_value<T: Real>(game: &GameInstance<T>, s: &DualStrategy<T>) -> Result<T> {
    let n = game.horizon();
    if n > MAX_DUAL_DEPTH {
        return Err(Error::TooLarge { what: "dual tree depth", size: n as f64, limit: MAX_DUAL_DEPTH as f64 });
    }
    s.check_consistent(game)?;
    Ok(DualEval { game, s }.go(1, 0, T::one(), T::zero(), &vec![T::zero(); game.class().len()]))
}

/// Coordinate ascent on the dual value: at every node try each context, then
/// maximize over the node's mean by golden section (the value is concave in it).
pub fn local_search<T: Real>(
    game: &GameInstance<T>,
    start: &DualStrategy<T>,
    sweeps: usize,
) -> Result<(DualStrategy<T>, T)> {
    let mut cur = start.clone();
    let mut best = dual_value(game, &cur)?;
    let n = game.horizon();
    for _ in 0..sweeps {
        let before = best;
        for t in 1..=n {
            for q in 0..(1u64 << (t - 1)) {
                let here = *cur.context_tree.get(t, q);
                for x in game.available(&history_of(&cur.context_tree, t, q)) {
                    if x == here {
                        continue;
                    }
                    let mut cand = cur.clone();
                    cand.context_tree.set(t, q, x);
                    if cand.check_consistent(game).is_err() {
                        continue;
                    }
                    let v = dual_value(game, &cand)?;
                    if v > best {
                        best = v;
                        cur = cand;
                    }
                }
                let mut cand = cur.clone();
                let (p, v) = golden_max(
                    |p: f64| {
                        cand.prob_tree.set(t, q, T::lit(p));
                        dual_value(game, &cand).map(|v| v.as_f64()).unwrap_or(f64::NEG_INFINITY)
                    },
                    0.0,
                    1.0,
                    1e-10,
                );
                if T::lit(v) > best {
                    cur.prob_tree.set(t, q, T::lit(p));
                    best = dual_value(game, &cur)?;
                }
            }
        }
        if best - before <= T::lit(1e-12) * best.abs().max(T::one()) {
            break;
        }
    }
    Ok((cur, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ExpertClass;
    use crate::game::exact_minimax;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_tree_against_itself() {
        let g = GameInstance::new(3, ExpertClass::<f64>::constants(&[0.5]).unwrap()).unwrap();
        let s = DualStrategy::new(BinaryTree::constant(3, 0).unwrap(), BinaryTree::constant(3, 0.5).unwrap()).unwrap();
        assert!(dual_value(&g, &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn deterministic_path() {
        let g = GameInstance::new(1, ExpertClass::<f64>::constants(&[0.3, 0.7]).unwrap()).unwrap();
        let s = DualStrategy::new(BinaryTree::constant(1, 0).unwrap(), BinaryTree::constant(1, 1.0).unwrap()).unwrap();
        assert!((dual_value(&g, &s).unwrap() - 0.7_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dual_never_exceeds_primal_and_primal_solution_attains_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let class =
            ExpertClass::<f64>::with_contexts(2, vec![vec![0.1, 0.8], vec![0.6, 0.3], vec![0.45, 0.95]]).unwrap();
        let g = GameInstance::new(4, class).unwrap();
        let primal = exact_minimax(&g).unwrap();
        for _ in 0..200 {
            let s = DualStrategy::random(&g, &mut rng).unwrap();
            assert!(dual_value(&g, &s).unwrap() <= primal + 1e-9);
        }
        let solver = MinimaxSolver::new(&g).unwrap();
        let s = DualStrategy::from_primal(&solver).unwrap();
        assert!((dual_value(&g, &s).unwrap() - primal).abs() < 1e-9);
    }

    #[test]
    fn local_search_gets_close_to_primal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let class = ExpertClass::<f64>::with_contexts(2, vec![vec![0.2, 0.9], vec![0.7, 0.4]]).unwrap();
        let g = GameInstance::new(3, class).unwrap();
        let primal = exact_minimax(&g).unwrap();
        let start = DualStrategy::random(&g, &mut rng).unwrap();
        let (_, v) = local_search(&g, &start, 20).unwrap();
        assert!(v <= primal + 1e-9);
        assert!(v >= 0.95 * primal, "local search {v} vs primal {primal}");
    }

    #[test]
    fn inconsistent_trees_are_rejected() {
        let g = GameInstance::new(2, ExpertClass::<f64>::constants(&[0.3]).unwrap()).unwrap();
        let s = DualStrategy::new(BinaryTree::constant(2, 1).unwrap(), BinaryTree::constant(2, 0.5).unwrap()).unwrap();
        assert!(dual_value(&g, &s).is_err());
        assert!(DualStrategy::new(BinaryTree::constant(2, 0).unwrap(), BinaryTree::constant(1, 0.5).unwrap()).is_err());
    }
}
