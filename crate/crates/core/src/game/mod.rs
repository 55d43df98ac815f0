//! Exact minimax regret by backward induction over the context/outcome game tree.

mod dual;
mod play;

pub use dual::{dual_value, local_search, DualStrategy};
pub use play::{run_strategy, worst_case_search, Adversary, RegretTrace, Strategy};

use crate::class::ExpertClass;
use crate::error::{Error, Result};
use crate::num::{log_add_exp, sigmoid_diff, Real};
use crate::tree::node_index;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, Mutex};

/// A played round: context id and outcome.
pub type Round = (usize, bool);

/// Node budget for the exact recursion.
pub const MAX_DP_NODES: f64 = 1e8;

/// Decides which contexts the adversary may pick after a history.
pub trait AvailabilityRule: Send + Sync + Debug {
    /// Available context ids, sorted ascending and non-empty.
    fn available(&self, history: &[Round], num_contexts: usize) -> Vec<usize>;

    /// Upper bound on the number of available contexts in any round.
    fn max_available(&self, num_contexts: usize) -> usize {
        num_contexts
    }

    /// True when availability ignores the order of past rounds, so histories
    /// with the same counts of `(context, outcome)` pairs are equivalent.
    fn order_invariant(&self) -> bool {
        false
    }

    fn validate(&self, _num_contexts: usize, _horizon: usize) -> Result<()> {
        Ok(())
    }
}

/// Every context in every round.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllContexts;

impl AvailabilityRule for AllContexts {
    fn available(&self, _history: &[Round], num_contexts: usize) -> Vec<usize> {
        (0..num_contexts).collect()
    }
    fn order_invariant(&self) -> bool {
        true
    }
}

/// A fixed subset of contexts in every round.
#[derive(Debug, Clone)]
pub struct StaticSet(Vec<usize>);

impl StaticSet {
    pub fn new(mut ids: Vec<usize>) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::InvalidArgument("static context set is empty".into()));
        }
        Ok(StaticSet(ids))
    }
}

impl AvailabilityRule for StaticSet {
    fn available(&self, _history: &[Round], _num_contexts: usize) -> Vec<usize> {
        self.0.clone()
    }
    fn max_available(&self, _num_contexts: usize) -> usize {
        self.0.len()
    }
    fn order_invariant(&self) -> bool {
        true
    }
    fn validate(&self, num_contexts: usize, _horizon: usize) -> Result<()> {
        match self.0.iter().find(|&&x| x >= num_contexts) {
            Some(&x) => Err(Error::UnknownContext(x)),
            None => Ok(()),
        }
    }
}

/// The context in round `t` is the outcome prefix `y_{1:t-1}` itself,
/// numbered like tree nodes: `2^(t-1) - 1 + prefix`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreviousOutcomes;

impl AvailabilityRule for PreviousOutcomes {
    fn available(&self, history: &[Round], _num_contexts: usize) -> Vec<usize> {
        let q = history.iter().enumerate().fold(0u64, |acc, (i, &(_, y))| acc | ((y as u64) << i));
        vec![node_index(history.len() + 1, q)]
    }
    fn max_available(&self, _num_contexts: usize) -> usize {
        1
    }
    fn validate(&self, num_contexts: usize, horizon: usize) -> Result<()> {
        let need = (1usize << horizon.min(62)) - 1;
        if num_contexts < need {
            return Err(Error::InvalidArgument(format!(
                "previous-outcome contexts need {need} context ids for horizon {horizon}, class has {num_contexts}"
            )));
        }
        Ok(())
    }
}

/// Horizon, expert class and context availability.
#[derive(Debug, Clone)]
pub struct GameInstance<T = f64> {
    horizon: usize,
    class: ExpertClass<T>,
    rule: Arc<dyn AvailabilityRule>,
    collapse: bool,
}

impl<T: Real> GameInstance<T> {
    /// Game where every context is available in every round.
    pub fn new(horizon: usize, class: ExpertClass<T>) -> Result<Self> {
        Self::with_rule(horizon, class, Arc::new(AllContexts))
    }

    pub fn with_rule(horizon: usize, class: ExpertClass<T>, rule: Arc<dyn AvailabilityRule>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if horizon > 62 {
            return Err(Error::TooLarge { what: "horizon", size: horizon as f64, limit: 62.0 });
        }
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        rule.validate(class.num_contexts(), horizon)?;
        Ok(GameInstance { horizon, class, rule, collapse: false })
    }

    /// Memoize on `(context, outcome)` counts. Only allowed for order-invariant rules.
    pub fn collapse_histories(mut self, on: bool) -> Result<Self> {
        if on && !self.rule.order_invariant() {
            return Err(Error::InvalidArgument("availability rule is not order invariant".into()));
        }
        self.collapse = on;
        Ok(self)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn class(&self) -> &ExpertClass<T> {
        &self.class
    }

    pub fn rule(&self) -> &dyn AvailabilityRule {
        self.rule.as_ref()
    }

    pub fn collapsed(&self) -> bool {
        self.collapse
    }

    pub fn available(&self, history: &[Round]) -> Vec<usize> {
        let mut v = self.rule.available(history, self.class.num_contexts());
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Checks that a history is playable: length within the horizon and every context available.
    pub fn check_history(&self, history: &[Round]) -> Result<()> {
        if history.len() > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "history of length {} exceeds horizon {}",
                history.len(),
                self.horizon
            )));
        }
        for t in 0..history.len() {
            let x = history[t].0;
            if x >= self.class.num_contexts() {
                return Err(Error::UnknownContext(x));
            }
            if !self.available(&history[..t]).contains(&x) {
                return Err(Error::InconsistentContexts { round: t + 1 });
            }
        }
        Ok(())
    }

    /// Per-expert log-likelihood of a history.
    pub fn log_liks(&self, history: &[Round]) -> Vec<T> {
        (0..self.class.len())
            .map(|f| history.iter().fold(T::zero(), |acc, &(x, y)| acc + self.class.log_lik(f, x, y)))
            .collect()
    }

    /// Estimated number of game-tree nodes visited by the exact recursion.
    pub fn estimated_nodes(&self) -> f64 {
        let k = self.rule.max_available(self.class.num_contexts()) as f64;
        let n = self.horizon;
        if self.collapse {
            // count vectors over 2k cells summing to t
            let cells = 2.0 * k;
            (0..=n)
                .map(|t| {
                    let mut c = 1.0;
                    for i in 1..cells as usize {
                        c *= (t + i) as f64 / i as f64;
                    }
                    c
                })
                .sum()
        } else {
            (0..=n).map(|t| (2.0 * k).powi(t as i32)).sum()
        }
    }
}

fn max_of<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::neg_infinity(), |a, &b| a.max(b))
}

/// Backward-induction solver for a game instance.
#[derive(Debug)]
pub struct MinimaxSolver<'a, T = f64> {
    game: &'a GameInstance<T>,
    memo: Mutex<HashMap<Vec<u32>, T>>,
}

const PAR_ROUNDS: usize = 2;

impl<'a, T: Real> MinimaxSolver<'a, T> {
    pub fn new(game: &'a GameInstance<T>) -> Result<Self> {
        let est = game.estimated_nodes();
        if est > MAX_DP_NODES {
            return Err(Error::TooLarge { what: "minimax game tree", size: est, limit: MAX_DP_NODES });
        }
        Ok(MinimaxSolver { game, memo: Mutex::new(HashMap::new()) })
    }

    pub fn game(&self) -> &GameInstance<T> {
        self.game
    }

    /// Minimax regret of the whole game.
    pub fn value(&self) -> T {
        self.w(&mut Vec::new(), &self.game.log_liks(&[]))
    }

    /// Value of the game continued from `history`.
    pub fn continuation(&self, history: &[Round]) -> Result<T> {
        self.game.check_history(history)?;
        Ok(self.w(&mut history.to_vec(), &self.game.log_liks(history)))
    }

    /// Saddle-point prediction at `history` when context `x` is shown.
    pub fn optimal_prediction(&self, history: &[Round], x: usize) -> Result<T> {
        self.game.check_history(history)?;
        if history.len() >= self.game.horizon {
            return Err(Error::InvalidArgument("history already complete".into()));
        }
        if !self.game.available(history).contains(&x) {
            return Err(Error::InconsistentContexts { round: history.len() + 1 });
        }
        let (w0, w1) = self.branch_values(history, x);
        if w0 == T::neg_infinity() && w1 == T::neg_infinity() {
            return Err(Error::Degenerate("both continuations have zero likelihood".into()));
        }
        Ok(sigmoid_diff(w1, w0))
    }

    /// The adversary's best context at `history` (lowest id on ties).
    pub fn best_context(&self, history: &[Round]) -> Result<usize> {
        self.game.check_history(history)?;
        if history.len() >= self.game.horizon {
            return Err(Error::InvalidArgument("history already complete".into()));
        }
        let mut best = (T::neg_infinity(), usize::MAX);
        for x in self.game.available(history) {
            let (w0, w1) = self.branch_values(history, x);
            let v = log_add_exp(w0, w1);
            if best.1 == usize::MAX || v > best.0 {
                best = (v, x);
            }
        }
        Ok(best.1)
    }

    fn branch_values(&self, history: &[Round], x: usize) -> (T, T) {
        let ll = self.game.log_liks(history);
        let mut h = history.to_vec();
        let mut out = [T::zero(); 2];
        for (i, y) in [false, true].into_iter().enumerate() {
            h.push((x, y));
            let next: Vec<T> = ll.iter().enumerate().map(|(f, &l)| l + self.game.class.log_lik(f, x, y)).collect();
            out[i] = self.w(&mut h, &next);
            h.pop();
        }
        (out[0], out[1])
    }

    fn key(&self, history: &[Round]) -> Vec<u32> {
        let k = self.game.class.num_contexts();
        let mut c = vec![0u32; 2 * k];
        for &(x, y) in history {
            c[2 * x + y as usize] += 1;
        }
        c
    }

    fn w(&self, history: &mut Vec<Round>, ll: &[T]) -> T {
        let t = history.len();
        if t == self.game.horizon {
            return max_of(ll);
        }
        if self.game.collapse {
            let key = self.key(history);
            if let Some(&v) = self.memo.lock().expect("memo poisoned").get(&key) {
                return v;
            }
            let v = self.expand(history, ll);
            self.memo.lock().expect("memo poisoned").insert(key, v);
            return v;
        }
        self.expand(history, ll)
    }

    fn child_ll(&self, ll: &[T], x: usize, y: bool) -> Vec<T> {
        ll.iter().enumerate().map(|(f, &l)| l + self.game.class.log_lik(f, x, y)).collect()
    }

    fn expand(&self, history: &mut Vec<Round>, ll: &[T]) -> T {
        let avail = self.game.available(history);
        let vals: Vec<T> = if history.len() < PAR_ROUNDS && !self.game.collapse {
            avail
                .par_iter()
                .map(|&x| {
                    let mut h = history.clone();
                    let mut branch = [T::zero(); 2];
                    for (i, y) in [false, true].into_iter().enumerate() {
                        h.push((x, y));
                        branch[i] = self.w(&mut h, &self.child_ll(ll, x, y));
                        h.pop();
                    }
                    log_add_exp(branch[0], branch[1])
                })
                .collect()
        } else {
            avail
                .iter()
                .map(|&x| {
                    let mut branch = [T::zero(); 2];
                    for (i, y) in [false, true].into_iter().enumerate() {
                        history.push((x, y));
                        branch[i] = self.w(history, &self.child_ll(ll, x, y));
                        history.pop();
                    }
                    log_add_exp(branch[0], branch[1])
                })
                .collect()
        };
        vals.into_iter().fold(T::neg_infinity(), |a, b| if b > a { b } else { a })
    }
}

/// Minimax regret of `game`.
pub fn exact_minimax<T: Real>(game: &GameInstance<T>) -> Result<T> {
    Ok(MinimaxSolver::new(game)?.value())
}

/// Minimax-optimal prediction after `history` with context `x` shown.
pub fn optimal_prediction<T: Real>(game: &GameInstance<T>, history: &[Round], x: usize) -> Result<T> {
    MinimaxSolver::new(game)?.optimal_prediction(history, x)
}
