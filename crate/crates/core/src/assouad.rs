//! Bin construction for the lower bound: sign-indexed classes on a grid of centres,
//! i.i.d. data, online-to-batch estimators, KL risk and regret scaling runs.

use crate::error::{Error, Result};
use crate::loss::{kl_bernoulli, log_loss};
use crate::num::fmt12;
use crate::optim::least_squares_slope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

/// Largest number of centres.
pub const MAX_CENTERS: usize = 1 << 20;
/// Largest number of centres for the enumerated mixture over all sign vectors.
pub const MAX_ENUMERATED_CENTERS: usize = 12;

/// `true` stands for `+1`.
pub type Signs = Vec<bool>;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AssouadClass {
    pub dim: usize,
    pub epsilon: f64,
    /// Bins per axis.
    pub per_axis: usize,
    /// Total number of centres, `per_axis^dim`.
    pub n_centers: usize,
}

impl AssouadClass {
    /// Coordinates of centre `i` (raster order, first axis fastest).
    pub fn center(&self, mut i: usize) -> Vec<f64> {
        let w = 4.0 * self.epsilon;
        (0..self.dim)
            .map(|_| {
                let k = i % self.per_axis;
                i /= self.per_axis;
                w * (k as f64 + 0.5)
            })
            .collect()
    }

    /// `f_v(x_i)`: `4 eps` under `+1`, `eps` under `-1`.
    pub fn value(&self, v: &[bool], i: usize) -> f64 {
        if v[i] {
            4.0 * self.epsilon
        } else {
            self.epsilon
        }
    }

    pub fn table(&self, v: &[bool]) -> Result<Vec<f64>> {
        self.check_signs(v)?;
        Ok((0..self.n_centers).map(|i| self.value(v, i)).collect())
    }

    pub fn check_signs(&self, v: &[bool]) -> Result<()> {
        if v.len() != self.n_centers {
            return Err(Error::DimensionMismatch { expected: self.n_centers, got: v.len() });
        }
        Ok(())
    }

    pub fn random_signs<R: Rng + ?Sized>(&self, rng: &mut R) -> Signs {
        (0..self.n_centers).map(|_| rng.random()).collect()
    }
}

pub fn build_assouad_class(dim: usize, epsilon: f64) -> Result<AssouadClass> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.125) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/8), got {epsilon}")));
    }
    let per_axis = (1.0 / (4.0 * epsilon) * (1.0 + 1e-12)).floor() as usize;
    let n_centers = per_axis.checked_pow(dim as u32).filter(|&n| n <= MAX_CENTERS).ok_or(Error::TooLarge {
        what: "centres",
        size: (per_axis as f64).powi(dim as i32),
        limit: MAX_CENTERS as f64,
    })?;
    Ok(AssouadClass { dim, epsilon, per_axis, n_centers })
}

/// `n` i.i.d. pairs: a uniform centre and an outcome drawn from `f_v` there.
pub fn sample_dataset(ac: &AssouadClass, v: &[bool], n: usize, seed: u64) -> Result<Vec<(usize, bool)>> {
    ac.check_signs(v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw(ac, v, n, &mut rng))
}

fn draw<R: Rng + ?Sized>(ac: &AssouadClass, v: &[bool], n: usize, rng: &mut R) -> Vec<(usize, bool)> {
    (0..n)
        .map(|_| {
            let x = rng.random_range(0..ac.n_centers);
            let y = rng.random::<f64>() < ac.value(v, x);
            (x, y)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Learner {
    /// Uniform mixture over all sign vectors, computed bin by bin (the prior factorizes).
    FactorizedBayes,
    /// The same mixture with every sign vector tracked explicitly; at most 12 centres.
    EnumeratedBayes,
    /// Per-centre `(ones + 1) / (count + 2)`.
    Laplace,
    Constant {
        value: f64,
    },
    /// Plays the true `f_v`; its regret against the one-element class is zero.
    Singleton,
}

impl Learner {
    pub fn name(&self) -> String {
        match self {
            Learner::FactorizedBayes => "bayes".into(),
            Learner::EnumeratedBayes => "bayes-enumerated".into(),
            Learner::Laplace => "laplace".into(),
            Learner::Constant { value } => format!("constant:{value}"),
            Learner::Singleton => "singleton".into(),
        }
    }
}

impl std::str::FromStr for Learner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "bayes" => Learner::FactorizedBayes,
            "bayes-enumerated" => Learner::EnumeratedBayes,
            "laplace" => Learner::Laplace,
            "singleton" => Learner::Singleton,
            other => match other.strip_prefix("constant:") {
                Some(v) => {
                    let value: f64 = v.parse().map_err(|_| Error::InvalidArgument(format!("learner `{other}`")))?;
                    if !(0.0..=1.0).contains(&value) {
                        return Err(Error::InvalidArgument(format!("constant prediction {value} outside [0, 1]")));
                    }
                    Learner::Constant { value }
                }
                None => return Err(Error::InvalidArgument(format!("unknown learner `{other}`"))),
            },
        })
    }
}

// sequential predictor over centres
enum State {
    // per-bin log-likelihood ratio of +1 over -1
    Factorized { eps: f64, llr: Vec<f64> },
    // log posterior weight per sign vector
    Enumerated { eps: f64, logw: Vec<f64> },
    Laplace { ones: Vec<u32>, count: Vec<u32> },
    Fixed(Vec<f64>),
}

impl State {
    fn new(learner: &Learner, ac: &AssouadClass, v: &[bool]) -> Result<Self> {
        let n = ac.n_centers;
        let eps = ac.epsilon;
        Ok(match learner {
            Learner::FactorizedBayes => State::Factorized { eps, llr: vec![0.0; n] },
            Learner::EnumeratedBayes => {
                if n > MAX_ENUMERATED_CENTERS {
                    return Err(Error::TooLarge {
                        what: "centres for the enumerated mixture",
                        size: n as f64,
                        limit: MAX_ENUMERATED_CENTERS as f64,
                    });
                }
                State::Enumerated { eps, logw: vec![0.0; 1 << n] }
            }
            Learner::Laplace => State::Laplace { ones: vec![0; n], count: vec![0; n] },
            Learner::Constant { value } => State::Fixed(vec![*value; n]),
            Learner::Singleton => State::Fixed(ac.table(v)?),
        })
    }

    // true when an update at centre x only moves the prediction at x
    fn local(&self) -> bool {
        !matches!(self, State::Enumerated { .. })
    }

    fn predict(&self, x: usize) -> f64 {
        match self {
            State::Factorized { eps, llr } => {
                let w = crate::num::sigmoid_diff(llr[x], 0.0);
                w * 4.0 * eps + (1.0 - w) * eps
            }
            State::Enumerated { eps, logw } => {
                let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let (mut num, mut den) = (0.0, 0.0);
                for (s, &lw) in logw.iter().enumerate() {
                    let w = (lw - m).exp();
                    den += w;
                    num += w * if s >> x & 1 == 1 { 4.0 * eps } else { *eps };
                }
                num / den
            }
            State::Laplace { ones, count } => (ones[x] as f64 + 1.0) / (count[x] as f64 + 2.0),
            State::Fixed(t) => t[x],
        }
    }

    fn update(&mut self, x: usize, y: bool) {
        match self {
            State::Factorized { eps, llr } => llr[x] += log_loss(*eps, y) - log_loss(4.0 * *eps, y),
            State::Enumerated { eps, logw } => {
                let (hi, lo) = (-log_loss(4.0 * *eps, y), -log_loss(*eps, y));
                for (s, lw) in logw.iter_mut().enumerate() {
                    *lw += if s >> x & 1 == 1 { hi } else { lo };
                }
            }
            State::Laplace { ones, count } => {
                count[x] += 1;
                ones[x] += y as u32;
            }
            State::Fixed(_) => {}
        }
    }
}

/// Per-centre estimates of a batch estimator.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BatchEstimator {
    pub table: Vec<f64>,
}

/// Runs `learner` over `data` in order; returns the per-round predictions at the realized centres.
pub fn run_online(learner: &Learner, ac: &AssouadClass, v: &[bool], data: &[(usize, bool)]) -> Result<Vec<f64>> {
    ac.check_signs(v)?;
    let mut st = State::new(learner, ac, v)?;
    Ok(data
        .iter()
        .map(|&(x, y)| {
            let p = st.predict(x);
            st.update(x, y);
            p
        })
        .collect())
}

/// Averages the learner's predictors `f_1, ..., f_n` at every centre (`f_t` has seen `t - 1` pairs).
/// With no data the table is the initial predictor.
pub fn online_to_batch(
    learner: &Learner,
    ac: &AssouadClass,
    v: &[bool],
    data: &[(usize, bool)],
) -> Result<BatchEstimator> {
    ac.check_signs(v)?;
    let n_c = ac.n_centers;
    let mut st = State::new(learner, ac, v)?;
    if data.is_empty() {
        return Ok(BatchEstimator { table: (0..n_c).map(|x| st.predict(x)).collect() });
    }
    let n = data.len();
    let mut sum = vec![0.0; n_c];
    if st.local() {
        // a prediction only changes when its own centre is updated
        let mut since = vec![0usize; n_c];
        let mut cur: Vec<f64> = (0..n_c).map(|x| st.predict(x)).collect();
        for (t, &(x, y)) in data.iter().enumerate() {
            // f_{t+1} onwards reflect this update
            sum[x] += cur[x] * (t + 1 - since[x]) as f64;
            since[x] = t + 1;
            st.update(x, y);
            cur[x] = st.predict(x);
        }
        for x in 0..n_c {
            sum[x] += cur[x] * (n - since[x]) as f64;
        }
    } else {
        for &(x, y) in data {
            for (c, s) in sum.iter_mut().enumerate() {
                *s += st.predict(c);
            }
            st.update(x, y);
        }
    }
    Ok(BatchEstimator { table: sum.into_iter().map(|s| s / n as f64).collect() })
}

/// `(1/N) sum_i KL(f_v(x_i) || est_i)`.
pub fn kl_risk(ac: &AssouadClass, v: &[bool], est: &BatchEstimator) -> Result<f64> {
    ac.check_signs(v)?;
    if est.table.len() != ac.n_centers {
        return Err(Error::DimensionMismatch { expected: ac.n_centers, got: est.table.len() });
    }
    Ok(est.table.iter().enumerate().map(|(i, &q)| kl_bernoulli(ac.value(v, i), q)).sum::<f64>() / ac.n_centers as f64)
}

/// Smallest `KL(f_v(x_i) || est_i) - eps/6` over centres where the estimate sits on the wrong
/// side of `2 eps`; `+inf` when there are none.
pub fn wrong_side_slack(ac: &AssouadClass, v: &[bool], est: &BatchEstimator) -> Result<f64> {
    ac.check_signs(v)?;
    let e = ac.epsilon;
    Ok(est
        .table
        .iter()
        .enumerate()
        .filter(|&(i, &q)| if v[i] { q <= 2.0 * e } else { q >= 2.0 * e })
        .map(|(i, &q)| kl_bernoulli(ac.value(v, i), q) - e / 6.0)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub epsilon: f64,
}

/// `n^(p/(p+1)) / 128` at `eps = n^(-1/(p+1)) / 8`.
pub fn lower_bound_value(dim: usize, n: f64) -> Result<LowerBound> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("number of rounds must be at least 1, got {n}")));
    }
    let r = exact_root(n, dim as i32 + 1);
    Ok(LowerBound { value: r.powi(dim as i32) / 128.0, epsilon: 1.0 / (8.0 * r) })
}

/// `n^(1/q)`, snapped to the exact root when `n` is a perfect `q`-th power.
fn exact_root(n: f64, q: i32) -> f64 {
    let l = n.log2();
    if l.fract() == 0.0 && (l as i64) % q as i64 == 0 {
        return 2f64.powi(l as i32 / q);
    }
    let r = n.powf(1.0 / q as f64);
    if r.round().powi(q) == n {
        r.round()
    } else {
        r
    }
}

/// `n (4 eps)^(1+p)` at the lower-bound `eps`; equals `2^-(1+p)`.
pub fn tv_budget(dim: usize, n: f64) -> Result<f64> {
    lower_bound_value(dim, n)?;
    // 4 eps = 1 / (2 n^(1/(p+1))); dividing keeps perfect powers exact
    let q = dim as i32 + 1;
    Ok(n / (2.0 * exact_root(n, q)).powi(q))
}

/// Regret of `predictions` on `data` against the best sign vector, found bin by bin.
pub fn regret_against_signs(ac: &AssouadClass, data: &[(usize, bool)], predictions: &[f64]) -> Result<f64> {
    if data.len() != predictions.len() {
        return Err(Error::DimensionMismatch { expected: data.len(), got: predictions.len() });
    }
    let player: f64 = data.iter().zip(predictions).map(|(&(_, y), &p)| log_loss(p, y)).sum();
    let mut ones = vec![0u64; ac.n_centers];
    let mut count = vec![0u64; ac.n_centers];
    for &(x, y) in data {
        count[x] += 1;
        ones[x] += y as u64;
    }
    let e = ac.epsilon;
    let loss = |q: f64, o: u64, c: u64| o as f64 * log_loss(q, true) + (c - o) as f64 * log_loss(q, false);
    let best: f64 = (0..ac.n_centers).map(|i| loss(e, ones[i], count[i]).min(loss(4.0 * e, ones[i], count[i]))).sum();
    Ok(player - best)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalingCell {
    pub p: usize,
    pub n: usize,
    pub epsilon: f64,
    pub seed: usize,
    pub regret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalingSummary {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScalingReport {
    pub learner: String,
    pub cells: Vec<ScalingCell>,
    pub summary: Vec<ScalingSummary>,
    /// Log-log slope of the median regret against `n`; zero when every median is zero.
    pub slope: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// For every `n` and replicate: `eps = n^(-1/(p+1))/8`, uniform signs, `n` samples, online run,
/// regret against the sign class. Cell `k` draws from stream `k` of a ChaCha8 generator seeded
/// with `seed`, so results do not depend on scheduling.
pub fn scaling_experiment(
    dim: usize,
    n_grid: &[usize],
    learner: &Learner,
    replicates: usize,
    seed: u64,
) -> Result<ScalingReport> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    crate::bounds::check_geometric(&n_grid.iter().map(|&n| n as f64).collect::<Vec<_>>())?;
    let cells: Vec<ScalingCell> = (0..n_grid.len() * replicates)
        .into_par_iter()
        .map(|k| {
            let n = n_grid[k / replicates];
            let lb = lower_bound_value(dim, n as f64)?;
            let ac = build_assouad_class(dim, lb.epsilon)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let v = ac.random_signs(&mut rng);
            let data = draw(&ac, &v, n, &mut rng);
            let preds = run_online(learner, &ac, &v, &data)?;
            let regret = match learner {
                Learner::Singleton => {
                    let truth: f64 = data.iter().map(|&(x, y)| log_loss(ac.value(&v, x), y)).sum();
                    let player: f64 = data.iter().zip(&preds).map(|(&(_, y), &p)| log_loss(p, y)).sum();
                    player - truth
                }
                _ => regret_against_signs(&ac, &data, &preds)?,
            };
            Ok(ScalingCell { p: dim, n, epsilon: lb.epsilon, seed: k % replicates, regret })
        })
        .collect::<Result<_>>()?;
    let summary: Vec<ScalingSummary> = n_grid
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut r: Vec<f64> = cells[j * replicates..(j + 1) * replicates].iter().map(|c| c.regret).collect();
            r.sort_by(|a, b| a.total_cmp(b));
            ScalingSummary { n, median: quantile(&r, 0.5), q1: quantile(&r, 0.25), q3: quantile(&r, 0.75) }
        })
        .collect();
    let slope = if summary.iter().all(|s| s.median == 0.0) {
        0.0
    } else {
        if let Some(s) = summary.iter().find(|s| !(s.median > 0.0)) {
            return Err(Error::Degenerate(format!("median regret {} at n = {} is not positive", s.median, s.n)));
        }
        let xs: Vec<f64> = summary.iter().map(|s| (s.n as f64).ln()).collect();
        let ys: Vec<f64> = summary.iter().map(|s| s.median.ln()).collect();
        least_squares_slope(&xs, &ys)?
    };
    Ok(ScalingReport { learner: learner.name(), cells, summary, slope })
}

/// Writes cells as CSV with columns `p,n,epsilon,seed,regret`.
pub fn write_scaling_csv<W: Write>(cells: &[ScalingCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "n", "epsilon", "seed", "regret"])?;
    for c in cells {
        w.write_record([c.p.to_string(), c.n.to_string(), fmt12(c.epsilon), c.seed.to_string(), fmt12(c.regret)])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
