//! Sequential covers of expert classes restricted to a context tree.

mod lipschitz;

pub use lipschitz::{
    entropy_curve_estimate, entropy_curve_for_class, entropy_table, greedy_shift_cover, lipschitz_grid,
    write_entropy_csv, EntropyEstimate, EntropyRow, LipschitzGrid, MAX_GREEDY_VECTORS, MAX_GRID_FUNCTIONS,
};

use crate::class::ExpertClass;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::tree::{BinaryTree, Path};
use rayon::prelude::*;
use std::collections::{HashMap, HashSet};

/// Slack added to `gamma` in every closeness test, absorbing rounding in midpoints.
pub const COVER_TOL: f64 = 1e-12;

/// Largest depth for cover searches and checks.
pub const MAX_COVER_DEPTH: usize = 16;

/// Expert classes with at most this many members get an exact per-path cover number.
pub const EXACT_PATH_COVER_MAX: usize = 12;

/// The class seen through a context tree: one value tree per expert.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedClass<T = f64> {
    pub context_tree: BinaryTree<usize>,
    pub value_trees: Vec<BinaryTree<T>>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SequentialCover<T = f64> {
    pub elements: Vec<BinaryTree<T>>,
    pub scale: T,
}

impl<T> SequentialCover<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn restrict<T: Real>(class: &ExpertClass<T>, x: &BinaryTree<usize>) -> Result<RestrictedClass<T>> {
    if let Some(&bad) = x.nodes().iter().find(|&&c| c >= class.num_contexts()) {
        return Err(Error::UnknownContext(bad));
    }
    let value_trees = (0..class.len()).map(|f| x.map(|&c| class.value(f, c))).collect();
    Ok(RestrictedClass { context_tree: x.clone(), value_trees })
}

impl<T: Real> RestrictedClass<T> {
    /// Builds a restricted class straight from value trees (context tree all zeros).
    pub fn from_value_trees(value_trees: Vec<BinaryTree<T>>) -> Result<Self> {
        let depth = value_trees.first().ok_or(Error::EmptyClass)?.depth();
        if let Some(t) = value_trees.iter().find(|t| t.depth() != depth) {
            return Err(Error::DimensionMismatch { expected: depth, got: t.depth() });
        }
        Ok(RestrictedClass { context_tree: BinaryTree::constant(depth, 0)?, value_trees })
    }

    pub fn depth(&self) -> usize {
        self.context_tree.depth()
    }

    pub fn len(&self) -> usize {
        self.value_trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value_trees.is_empty()
    }

    fn check_depth(&self) -> Result<()> {
        if self.depth() > MAX_COVER_DEPTH {
            return Err(Error::TooLarge {
                what: "cover depth",
                size: self.depth() as f64,
                limit: MAX_COVER_DEPTH as f64,
            });
        }
        Ok(())
    }

    /// Expert value vectors along one full path.
    fn path_vectors(&self, path: &Path) -> Vec<Vec<T>> {
        self.value_trees.iter().map(|g| g.along(path)).collect()
    }
}

fn within<T: Real>(a: T, b: T, gamma: T) -> bool {
    (a - b).abs() <= gamma + T::lit(COVER_TOL)
}

/// Checks the cover condition on every path for every expert.
pub fn cover_verify<T: Real>(rc: &RestrictedClass<T>, cover: &SequentialCover<T>) -> bool {
    let n = rc.depth();
    if n > MAX_COVER_DEPTH || cover.elements.iter().any(|v| v.depth() != n) {
        return false;
    }
    (0..1u64 << n).into_par_iter().all(|bits| {
        let path = Path::new(bits, n).expect("path");
        let elems: Vec<Vec<T>> = cover.elements.iter().map(|v| v.along(&path)).collect();
        rc.value_trees.iter().all(|g| {
            let gv = g.along(&path);
            elems.iter().any(|v| gv.iter().zip(v).all(|(&a, &b)| within(a, b, cover.scale)))
        })
    })
}

/// Minimal number of `gamma`-balls (sup norm) covering `vectors`, and whether the count is exact.
///
/// Exact by clique-cover search up to [`EXACT_PATH_COVER_MAX`] vectors; beyond that a greedy
/// `2 gamma`-separated packing, which still bounds the cover number from below.
pub fn path_cover_number<T: Real>(vectors: &[Vec<T>], gamma: T) -> (usize, bool) {
    let m = vectors.len();
    if m == 0 {
        return (0, true);
    }
    let two_g = gamma + gamma;
    let compat = |i: usize, j: usize| vectors[i].iter().zip(&vectors[j]).all(|(&a, &b)| within(a, b, two_g));
    if m > EXACT_PATH_COVER_MAX {
        let mut packed: Vec<usize> = Vec::new();
        for i in 0..m {
            if packed.iter().all(|&j| !compat(i, j)) {
                packed.push(i);
            }
        }
        return (packed.len(), false);
    }
    let mut adj = vec![0u32; m];
    for i in 0..m {
        for j in 0..m {
            if i != j && compat(i, j) {
                adj[i] |= 1 << j;
            }
        }
    }
    let full = (1u32 << m) - 1;
    let mut clique = vec![false; 1 << m];
    clique[0] = true;
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        clique[s as usize] = clique[rest as usize] && (adj[low] & rest) == rest;
    }
    let mut dp = vec![u8::MAX; 1 << m];
    dp[0] = 0;
    for s in 1..=full {
        let low = 1u32 << s.trailing_zeros();
        let rest = s ^ low;
        // subsets of s that contain its lowest element
        let mut sub = rest;
        let mut best = u8::MAX;
        loop {
            let c = sub | low;
            if clique[c as usize] {
                best = best.min(dp[(s ^ c) as usize].saturating_add(1));
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        dp[s as usize] = best;
    }
    (dp[full as usize] as usize, true)
}

fn max_path_cover<T: Real>(rc: &RestrictedClass<T>, gamma: T) -> (usize, bool) {
    let n = rc.depth();
    (0..1u64 << n)
        .into_par_iter()
        .map(|bits| {
            let path = Path::new(bits, n).expect("path");
            path_cover_number(&rc.path_vectors(&path), gamma)
        })
        .reduce(|| (0, true), |a, b| (a.0.max(b.0), a.1 && b.1))
}

/// `max over paths of log N_path`, a lower bound on the sequential entropy at scale `gamma`.
pub fn empirical_entropy_lower<T: Real>(rc: &RestrictedClass<T>, gamma: T) -> Result<T> {
    rc.check_depth()?;
    if rc.is_empty() {
        return Err(Error::EmptyClass);
    }
    Ok(T::lit(max_path_cover(rc, gamma).0 as f64).ln())
}

/// Maximal windows `[a, a + 2 gamma]` over the members of `alive`, as kept subsets,
/// in increasing order of the anchor value. Dominated windows are dropped.
fn windows<T: Real>(vals: &[T], alive: u64, gamma: T) -> Vec<u64> {
    let two_g = gamma + gamma + T::lit(COVER_TOL);
    let mut anchors: Vec<usize> = (0..vals.len()).filter(|&i| alive >> i & 1 == 1).collect();
    anchors.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite values").then(a.cmp(&b)));
    let mut out: Vec<u64> = Vec::new();
    for &a in &anchors {
        let lo = vals[a];
        let kept = anchors.iter().filter(|&&j| vals[j] >= lo && vals[j] - lo <= two_g).fold(0u64, |m, &j| m | 1 << j);
        if !out.iter().any(|&o| o & kept == kept) {
            out.retain(|&o| o & kept != o);
            out.push(kept);
        }
    }
    out
}

fn midpoint<T: Real>(vals: &[T], kept: u64) -> T {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (i, &v) in vals.iter().enumerate() {
        if kept >> i & 1 == 1 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        T::lit(0.5)
    } else {
        (lo + hi) / T::lit(2.0)
    }
}

/// Result of the exhaustive cover search.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExactCover<T = f64> {
    pub size: usize,
    pub cover: SequentialCover<T>,
    /// Largest per-path cover number, a lower bound on any sequential cover.
    pub lower_bound: usize,
}

impl<T> ExactCover<T> {
    /// True when the search result meets the per-path lower bound.
    pub fn sandwich_closed(&self) -> bool {
        self.size == self.lower_bound
    }
}

pub const EXACT_MAX_DEPTH: usize = 3;
pub const EXACT_MAX_EXPERTS: usize = 8;

struct ExactSearch<'a, T> {
    rc: &'a RestrictedClass<T>,
    gamma: T,
    full: u64,
    failed: HashSet<(usize, Vec<u64>)>,
    elements: Vec<BinaryTree<T>>,
}

impl<T: Real> ExactSearch<'_, T> {
    fn node_vals(&self, t: usize, q: u64) -> Vec<T> {
        self.rc.value_trees.iter().map(|g| *g.get(t, q)).collect()
    }

    fn feasible(&mut self, t: usize, q: u64, sets: &[u64]) -> bool {
        let mut key: Vec<u64> = sets.to_vec();
        key.sort_unstable();
        let node = crate::tree::node_index(t, q);
        if self.failed.contains(&(node, key.clone())) {
            return false;
        }
        let vals = self.node_vals(t, q);
        let options: Vec<Vec<u64>> =
            sets.iter().map(|&s| if s == 0 { vec![0] } else { windows(&vals, s, self.gamma) }).collect();
        let mut choice = vec![0usize; sets.len()];
        let ok = self.assign(t, q, sets, &options, &vals, 0, 0, &mut choice);
        if !ok {
            self.failed.insert((node, key));
        }
        ok
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &mut self,
        t: usize,
        q: u64,
        sets: &[u64],
        options: &[Vec<u64>],
        vals: &[T],
        j: usize,
        covered: u64,
        choice: &mut Vec<usize>,
    ) -> bool {
        if j == sets.len() {
            if covered != self.full {
                return false;
            }
            let next: Vec<u64> = choice.iter().zip(options).map(|(&c, o)| o[c]).collect();
            if t < self.rc.depth()
                && (!self.feasible(t + 1, q, &next) || !self.feasible(t + 1, q | 1 << (t - 1), &next))
            {
                return false;
            }
            for (e, &kept) in next.iter().enumerate() {
                self.elements[e].set(t, q, midpoint(vals, kept));
            }
            return true;
        }
        let rest: u64 = sets[j + 1..].iter().fold(0, |a, &b| a | b);
        // interchangeable elements: keep choices nondecreasing
        let start = if j > 0 && sets[j] == sets[j - 1] { choice[j - 1] } else { 0 };
        for c in start..options[j].len() {
            let cov = covered | options[j][c];
            if cov | rest != self.full {
                continue;
            }
            choice[j] = c;
            if self.assign(t, q, sets, options, vals, j + 1, cov, choice) {
                return true;
            }
        }
        false
    }
}

/// Smallest sequential cover whose node values are midpoints of maximal
/// `2 gamma` windows of the experts still tracked by each element.
pub fn sequential_cover_exact<T: Real>(rc: &RestrictedClass<T>, gamma: T) -> Result<ExactCover<T>> {
    let n = rc.depth();
    let m = rc.len();
    if m == 0 {
        return Err(Error::EmptyClass);
    }
    if n > EXACT_MAX_DEPTH || m > EXACT_MAX_EXPERTS {
        return Err(Error::TooLarge {
            what: "exact cover search (depth, experts)",
            size: (n.max(m)) as f64,
            limit: if n > EXACT_MAX_DEPTH { EXACT_MAX_DEPTH as f64 } else { EXACT_MAX_EXPERTS as f64 },
        });
    }
    if !(gamma >= T::zero()) {
        return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {gamma}")));
    }
    let (lower, _) = max_path_cover(rc, gamma);
    let full = (1u64 << m) - 1;
    for k in lower.max(1)..=m {
        let mut s = ExactSearch {
            rc,
            gamma,
            full,
            failed: HashSet::new(),
            elements: vec![BinaryTree::constant(n, T::lit(0.5))?; k],
        };
        if s.feasible(1, 0, &vec![full; k]) {
            let cover = SequentialCover { elements: s.elements, scale: gamma };
            return Ok(ExactCover { size: k, cover, lower_bound: lower });
        }
    }
    unreachable!("one element per expert always covers")
}

struct Greedy<'a, T> {
    rc: &'a RestrictedClass<T>,
    gamma: T,
    uncovered: Vec<u64>,
    memo: HashMap<(usize, u64), (usize, u64)>,
}

impl<T: Real> Greedy<'_, T> {
    fn vals(&self, t: usize, q: u64) -> Vec<T> {
        self.rc.value_trees.iter().map(|g| *g.get(t, q)).collect()
    }

    // best residual demand reachable from node (t, q) with `alive` still tracked,
    // and the window chosen at this node
    fn best(&mut self, t: usize, q: u64, alive: u64) -> usize {
        let n = self.rc.depth();
        if t > n {
            return (alive & self.uncovered[q as usize]).count_ones() as usize;
        }
        if alive == 0 {
            return 0;
        }
        let key = (crate::tree::node_index(t, q), alive);
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }
        let mut top = (0usize, 0u64);
        let mut first = true;
        for w in windows(&self.vals(t, q), alive, self.gamma) {
            let v = self.best(t + 1, q, w) + self.best(t + 1, q | 1 << (t - 1), w);
            if first || v > top.0 {
                top = (v, w);
                first = false;
            }
        }
        self.memo.insert(key, top);
        top.0
    }

    fn build(&mut self, t: usize, q: u64, alive: u64, tree: &mut BinaryTree<T>) {
        let n = self.rc.depth();
        if t > n {
            self.uncovered[q as usize] &= !alive;
            return;
        }
        let vals = self.vals(t, q);
        if alive == 0 {
            tree.set(t, q, T::lit(0.5));
            self.build(t + 1, q, 0, tree);
            self.build(t + 1, q | 1 << (t - 1), 0, tree);
            return;
        }
        self.best(t, q, alive);
        let w = self.memo[&(crate::tree::node_index(t, q), alive)].1;
        tree.set(t, q, midpoint(&vals, w));
        self.build(t + 1, q, w, tree);
        self.build(t + 1, q | 1 << (t - 1), w, tree);
    }
}

/// Greedy set cover of the `(path, expert)` demands: each step adds the tree that
/// covers the most uncovered demands, found by search over tracked-expert sets.
pub fn sequential_cover_greedy<T: Real>(rc: &RestrictedClass<T>, gamma: T) -> Result<SequentialCover<T>> {
    rc.check_depth()?;
    let m = rc.len();
    if m == 0 {
        return Err(Error::EmptyClass);
    }
    if m > 64 {
        return Err(Error::TooLarge { what: "greedy cover experts", size: m as f64, limit: 64.0 });
    }
    if !(gamma >= T::zero()) {
        return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {gamma}")));
    }
    let n = rc.depth();
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut g = Greedy { rc, gamma, uncovered: vec![full; 1 << n], memo: HashMap::new() };
    let mut elements = Vec::new();
    while g.uncovered.iter().any(|&u| u != 0) {
        g.memo.clear();
        let mut tree = BinaryTree::constant(n, T::lit(0.5))?;
        let gain = g.best(1, 0, full);
        debug_assert!(gain > 0);
        g.build(1, 0, full, &mut tree);
        elements.push(tree);
    }
    Ok(SequentialCover { elements, scale: gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constants(vals: &[f64], depth: usize) -> RestrictedClass<f64> {
        let class = ExpertClass::constants(vals).unwrap();
        restrict(&class, &BinaryTree::constant(depth, 0).unwrap()).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let rc = constants(&[0.3], 3);
        assert!(rc.value_trees[0].nodes().iter().all(|&v| v == 0.3));
        let rc = constants(&[0.2, 0.9], 1);
        assert_eq!(rc.value_trees.len(), 2);
        assert_eq!(rc.value_trees[1].nodes(), &[0.9]);
        let class = ExpertClass::with_contexts(2, vec![vec![0.1, 0.6], vec![0.8, 0.4]]).unwrap();
        let x = BinaryTree::from_vec(2, vec![1, 0, 1]).unwrap();
        let rc = restrict(&class, &x).unwrap();
        assert_eq!(rc.value_trees[0].nodes(), &[0.6, 0.1, 0.6]);
        assert_eq!(rc.value_trees[1].nodes(), &[0.4, 0.8, 0.4]);
        assert!(restrict(&class, &BinaryTree::constant(2, 2).unwrap()).is_err());
    }

    #[test]
    fn verify_examples() {
        let rc = constants(&[0.0, 1.0], 2);
        let half = SequentialCover { elements: vec![BinaryTree::constant(2, 0.5).unwrap()], scale: 0.5 };
        assert!(cover_verify(&rc, &half));
        let tight = SequentialCover { scale: 0.4, ..half.clone() };
        assert!(!cover_verify(&rc, &tight));
        let own = SequentialCover { elements: rc.value_trees.clone(), scale: 0.0 };
        assert!(cover_verify(&rc, &own));
    }

    #[test]
    fn exact_examples() {
        let rc = constants(&[0.0, 1.0], 1);
        assert_eq!(sequential_cover_exact(&rc, 0.5).unwrap().size, 1);
        assert_eq!(sequential_cover_exact(&rc, 0.4).unwrap().size, 2);
        let rc = constants(&[0.37], 3);
        assert_eq!(sequential_cover_exact(&rc, 0.0).unwrap().size, 1);
        assert!(sequential_cover_exact(&constants(&[0.1; 9], 1), 0.1).is_err());
        assert!(sequential_cover_exact(&constants(&[0.1], 4), 0.1).is_err());
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(sequential_cover_greedy(&constants(&[0.4], 3), 0.01).unwrap().len(), 1);
        assert_eq!(sequential_cover_greedy(&constants(&[0.0, 1.0], 2), 0.4).unwrap().len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let experts: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random()).collect()).collect();
        let class = ExpertClass::with_contexts(3, experts).unwrap();
        let x = BinaryTree::from_fn(3, |t, q| ((t as u64 + q) % 3) as usize).unwrap();
        let rc = restrict(&class, &x).unwrap();
        let c = sequential_cover_greedy(&rc, 1.0).unwrap();
        assert_eq!(c.len(), 1);
        assert!(cover_verify(&rc, &c));
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(empirical_entropy_lower(&constants(&[0.2], 2), 0.01).unwrap(), 0.0);
        let ln2 = std::f64::consts::LN_2;
        assert!((empirical_entropy_lower(&constants(&[0.0, 1.0], 1), 0.4).unwrap() - ln2).abs() < 1e-15);
        assert!((empirical_entropy_lower(&constants(&[0.0, 0.5, 1.0], 1), 0.3).unwrap() - ln2).abs() < 1e-15);
    }

    #[test]
    fn path_cover_exact_and_packing_agree_on_separated_points() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.05]).collect();
        // 20 points, packing with separation > 0.2 picks every 5th
        let (k, exact) = path_cover_number(&pts, 0.1);
        assert!(!exact);
        assert_eq!(k, 4);
        let (k, exact) = path_cover_number(&pts[..12], 0.1);
        assert!(exact);
        assert_eq!(k, 3);
    }

    fn random_rc(rng: &mut ChaCha8Rng, depth: usize, m: usize, k: usize) -> RestrictedClass<f64> {
        let experts: Vec<Vec<f64>> =
            (0..m).map(|_| (0..k).map(|_| (rng.random::<f64>() * 10.0).round() / 10.0).collect()).collect();
        let class = ExpertClass::with_contexts(k, experts).unwrap();
        let x = BinaryTree::from_fn(depth, |_, _| rng.random_range(0..k)).unwrap();
        restrict(&class, &x).unwrap()
    }

    #[test]
    fn sandwich_and_validity_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let depth = rng.random_range(1..=3);
            let m = rng.random_range(1..=6);
            let rc = random_rc(&mut rng, depth, m, 2);
            for gamma in [0.05, 0.1, 0.2, 0.35] {
                let ex = sequential_cover_exact(&rc, gamma).unwrap();
                let gr = sequential_cover_greedy(&rc, gamma).unwrap();
                assert!(cover_verify(&rc, &ex.cover));
                assert!(cover_verify(&rc, &gr));
                let lower = empirical_entropy_lower(&rc, gamma).unwrap();
                assert!(lower <= (gr.len() as f64).ln() + 1e-12);
                assert!(ex.lower_bound <= ex.size && ex.size <= gr.len());
            }
        }
    }

    #[test]
    fn monotone_in_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let rc = random_rc(&mut rng, 3, 6, 3);
            let gammas = [0.02, 0.05, 0.1, 0.2, 0.3, 0.5];
            let ex: Vec<usize> = gammas.iter().map(|&g| sequential_cover_exact(&rc, g).unwrap().size).collect();
            let lo: Vec<f64> = gammas.iter().map(|&g| empirical_entropy_lower(&rc, g).unwrap()).collect();
            assert!(ex.windows(2).all(|w| w[1] <= w[0]), "{ex:?}");
            assert!(lo.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    fn candidate_oracle(rc: &RestrictedClass<f64>, gamma: f64) -> usize {
        // every tree whose node values are g + gamma for some expert g at that node
        let n = rc.depth();
        let nodes = (1usize << n) - 1;
        let cands: Vec<Vec<f64>> = (0..nodes)
            .map(|i| {
                let mut v: Vec<f64> = rc.value_trees.iter().map(|g| g.nodes()[i] + gamma).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            })
            .collect();
        let mut trees: Vec<BinaryTree<f64>> = Vec::new();
        let mut idx = vec![0usize; nodes];
        loop {
            trees.push(BinaryTree::from_vec(n, (0..nodes).map(|i| cands[i][idx[i]]).collect()).unwrap());
            let mut i = 0;
            while i < nodes {
                idx[i] += 1;
                if idx[i] < cands[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == nodes {
                break;
            }
        }
        for k in 1..=rc.len() {
            let mut pick = vec![0usize; k];
            loop {
                let cover =
                    SequentialCover { elements: pick.iter().map(|&i| trees[i].clone()).collect(), scale: gamma };
                if cover_verify(rc, &cover) {
                    return k;
                }
                // next nondecreasing tuple
                let mut j = k;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    if pick[j] + 1 < trees.len() {
                        pick[j] += 1;
                        for l in j + 1..k {
                            pick[l] = pick[j];
                        }
                        break;
                    }
                    if j == 0 {
                        j = usize::MAX;
                        break;
                    }
                }
                if j == usize::MAX {
                    break;
                }
            }
        }
        rc.len()
    }

    #[test]
    fn exact_search_matches_brute_force_at_depth_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..25 {
            let depth = rng.random_range(1..=2);
            let m = rng.random_range(1..=3);
            let rc = random_rc(&mut rng, depth, m, 2);
            for gamma in [0.05, 0.15, 0.3] {
                let ex = sequential_cover_exact(&rc, gamma).unwrap();
                assert_eq!(ex.size, candidate_oracle(&rc, gamma), "depth {depth} m {m} gamma {gamma}");
            }
        }
    }
}
