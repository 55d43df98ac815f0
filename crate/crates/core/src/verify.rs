//! Grid and sampling checks of the inequalities behind the regret bound.
//!
//! Every check reduces to a signed slack (negative means violated) evaluated over a grid
//! or a seeded sample; a check passes when the worst slack is at least `-TOLERANCE`.

use crate::error::{Error, Result};
use crate::loss::{
    clip_prob, eta, kl_bernoulli, lambda_star, log_loss, loss_d2, loss_d3, omega, phi, psi, regret_constant,
};
use crate::optim::golden_max;
use crate::tree::BinaryTree;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const TOLERANCE: f64 = 1e-9;
/// Width of the excluded strips at 0 and 1 for checks that take logs of both `p` and `1 - p`.
pub const EDGE: f64 = 1e-6;
pub const MIN_RESOLUTION: f64 = 1e-4;
pub const MAX_RESOLUTION: f64 = 0.5;

pub const ETA_MAX_ROUNDS: usize = 12;
pub const ETA_TREES: usize = 100;
pub const ESTIMATION_INSTANCES: usize = 200;
pub const ESTIMATION_MAX_ROUNDS: usize = 10;
pub const ESTIMATION_MAX_SET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    PhiLipschitz,
    ScPointwise,
    ScEdge,
    Nesterov,
    SelfConcordant,
    Clipping,
    KlEps,
    EtaIdentity,
    Estimation,
}

impl CheckId {
    pub const ALL: [CheckId; 9] = [
        CheckId::PhiLipschitz,
        CheckId::ScPointwise,
        CheckId::ScEdge,
        CheckId::Nesterov,
        CheckId::SelfConcordant,
        CheckId::Clipping,
        CheckId::KlEps,
        CheckId::EtaIdentity,
        CheckId::Estimation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::PhiLipschitz => "PHI_LIPSCHITZ",
            CheckId::ScPointwise => "SC_POINTWISE",
            CheckId::ScEdge => "SC_EDGE",
            CheckId::Nesterov => "NESTEROV",
            CheckId::SelfConcordant => "SELF_CONCORDANT",
            CheckId::Clipping => "CLIPPING",
            CheckId::KlEps => "KL_EPS",
            CheckId::EtaIdentity => "ETA_IDENTITY",
            CheckId::Estimation => "ESTIMATION",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == up)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{s}`")))
    }
}

impl serde::Serialize for CheckId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub grid_spec: String,
    pub points: u64,
    pub worst_slack: f64,
    pub worst_point: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

// --- slack functions -------------------------------------------------------

/// `2|s - t| - (phi(s) - phi(t))`.
pub fn phi_lipschitz_slack(s: f64, t: f64) -> f64 {
    2.0 * (s - t).abs() - (phi(s) - phi(t))
}

/// `phi(eta(p, y) (p - f)) - (loss(p, y) - loss(f, y))`.
pub fn sc_pointwise_slack(p: f64, f: f64, y: bool) -> f64 {
    phi(eta(p, y) * (p - f)) - (log_loss(p, y) - log_loss(f, y))
}

/// Edge inequalities at `p = 1` (`upper`) and `p = 0`:
/// `log(2 - f) - 2(1 - f) - log f` and `log(1 + f) - 2f - log(1 - f)`.
pub fn sc_edge_slack(f: f64, upper: bool) -> f64 {
    if upper {
        (2.0 - f).ln() - 2.0 * (1.0 - f) - f.ln()
    } else {
        f.ln_1p() - 2.0 * f - (-f).ln_1p()
    }
}

/// `loss(t) - [loss(s) + eta(s)(t - s) + omega(sqrt(loss''(s)) |t - s|)]`.
pub fn nesterov_slack(s: f64, t: f64, y: bool) -> f64 {
    let z = loss_d2(s, y).sqrt() * (t - s).abs();
    let w = omega(z).unwrap_or(f64::NAN);
    log_loss(t, y) - (log_loss(s, y) + eta(s, y) * (t - s) + w)
}

/// `(2 loss''^(3/2) - |loss'''|) / max(1, |loss'''|)`.
pub fn self_concordant_slack(p: f64, y: bool) -> f64 {
    let d3 = loss_d3(p, y).abs();
    (2.0 * loss_d2(p, y).powf(1.5) - d3) / d3.max(1.0)
}

/// `loss(p, y) + 2 delta - loss(clip(p, delta), y)`.
pub fn clipping_slack(p: f64, delta: f64, y: bool) -> f64 {
    let c = clip_prob(p, delta).unwrap_or(f64::NAN);
    let l = log_loss(p, y);
    if l.is_infinite() {
        return f64::INFINITY;
    }
    l + 2.0 * delta - log_loss(c, y)
}

/// `KL(eps || q) - (eps/4 1{q >= 2 eps} + eps/6 1{q <= eps/2})`.
pub fn kl_eps_slack(eps: f64, q: f64) -> f64 {
    let mut rhs = 0.0;
    if q >= 2.0 * eps {
        rhs += eps / 4.0;
    }
    if q <= eps / 2.0 {
        rhs += eps / 6.0;
    }
    kl_bernoulli(eps, q) - rhs
}

// --- grids -------------------------------------------------------------------

fn check_resolution(res: f64) -> Result<usize> {
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&res) {
        return Err(Error::InvalidArgument(format!("resolution {res} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")));
    }
    Ok((1.0 / res).round() as usize)
}

fn lin(lo: f64, hi: f64, k: usize, m: usize) -> f64 {
    if k == m {
        hi
    } else {
        lo + (hi - lo) * k as f64 / m as f64
    }
}

// smallest slack and its index; NaN counts as -inf, ties keep the lower index
fn worst(count: u64, slack: impl Fn(u64) -> f64 + Sync) -> (f64, u64) {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let s = slack(i);
            (if s.is_nan() { f64::NEG_INFINITY } else { s }, i)
        })
        .reduce(|| (f64::INFINITY, u64::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

fn point(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn report(
    id: CheckId,
    grid_spec: String,
    points: u64,
    (slack, idx): (f64, u64),
    at: impl Fn(u64) -> BTreeMap<String, f64>,
) -> CheckReport {
    CheckReport {
        check_id: id,
        grid_spec,
        points,
        worst_slack: slack,
        worst_point: at(idx),
        tolerance: TOLERANCE,
        pass: slack >= -TOLERANCE,
        detail: None,
    }
}

/// Runs one check. `resolution` sets the grid: `round(1/resolution) + 1` points per axis on
/// two-dimensional grids and `round(1/resolution)^2 + 1` points on one-dimensional ones.
/// Sampled checks use `seed` and ignore `resolution`.
pub fn run_check(id: CheckId, resolution: f64, seed: u64) -> Result<CheckReport> {
    let m = check_resolution(resolution)?;
    let m1 = m * m;
    let ax = (m + 1) as u64;
    let yb = |i: u64| i % 2 == 1;
    Ok(match id {
        CheckId::PhiLipschitz => {
            let at = |i: u64| (lin(-100.0, 100.0, (i % ax) as usize, m), lin(-100.0, 100.0, (i / ax) as usize, m));
            let n = ax * ax;
            let w = worst(n, |i| {
                let (s, t) = at(i);
                phi_lipschitz_slack(s, t)
            });
            report(id, format!("s, t in [-100, 100], {ax} points each"), n, w, |i| {
                let (s, t) = at(i);
                point(&[("s", s), ("t", t)])
            })
        }
        CheckId::ScPointwise => {
            let at = |i: u64| {
                let j = i / 2;
                (lin(EDGE, 1.0 - EDGE, (j % ax) as usize, m), lin(EDGE, 1.0 - EDGE, (j / ax) as usize, m), yb(i))
            };
            let n = 2 * ax * ax;
            let w = worst(n, |i| {
                let (p, f, y) = at(i);
                sc_pointwise_slack(p, f, y)
            });
            report(id, format!("p, f in [{EDGE}, 1 - {EDGE}], {ax} points each, y in {{0, 1}}"), n, w, |i| {
                let (p, f, y) = at(i);
                point(&[("p", p), ("f", f), ("y", y as u8 as f64)])
            })
        }
        CheckId::ScEdge => {
            // upper branch on (0, 1], lower branch on [0, 1); equality required at f = 1 and f = 0
            let k = m1 as u64;
            let at = |i: u64| {
                let upper = i % 2 == 1;
                let j = (i / 2) as usize;
                let f = if upper { lin(0.0, 1.0, j + 1, m1) } else { lin(0.0, 1.0, j, m1) };
                (f, upper)
            };
            let slack = |i: u64| {
                let (f, upper) = at(i);
                let s = sc_edge_slack(f, upper);
                let tight = if upper { f == 1.0 } else { f == 0.0 };
                if tight {
                    -s.abs()
                } else {
                    s
                }
            };
            let n = 2 * k;
            let w = worst(n, slack);
            report(id, format!("f on {} points per branch, equality at the tight end", k), n, w, |i| {
                let (f, upper) = at(i);
                point(&[("f", f), ("branch_p", if upper { 1.0 } else { 0.0 })])
            })
        }
        CheckId::Nesterov => {
            let at = |i: u64| {
                let j = i / 2;
                (lin(EDGE, 1.0 - EDGE, (j % ax) as usize, m), lin(EDGE, 1.0 - EDGE, (j / ax) as usize, m), yb(i))
            };
            let n = 2 * ax * ax;
            let w = worst(n, |i| {
                let (s, t, y) = at(i);
                nesterov_slack(s, t, y)
            });
            report(id, format!("s, t in [{EDGE}, 1 - {EDGE}], {ax} points each, y in {{0, 1}}"), n, w, |i| {
                let (s, t, y) = at(i);
                point(&[("s", s), ("t", t), ("y", y as u8 as f64)])
            })
        }
        CheckId::SelfConcordant => {
            let at = |i: u64| (lin(EDGE, 1.0 - EDGE, (i / 2) as usize, m1), yb(i));
            let n = 2 * (m1 as u64 + 1);
            let w = worst(n, |i| {
                let (p, y) = at(i);
                self_concordant_slack(p, y)
            });
            report(
                id,
                format!("p in [{EDGE}, 1 - {EDGE}], {} points, y in {{0, 1}}, relative slack", m1 + 1),
                n,
                w,
                |i| {
                    let (p, y) = at(i);
                    point(&[("p", p), ("y", y as u8 as f64)])
                },
            )
        }
        CheckId::Clipping => {
            let at = |i: u64| {
                let j = i / 2;
                (lin(0.0, 1.0, (j % ax) as usize, m), lin(0.0, 0.5, (j / ax) as usize + 1, m), yb(i))
            };
            let n = 2 * ax * m as u64;
            let w = worst(n, |i| {
                let (p, d, y) = at(i);
                clipping_slack(p, d, y)
            });
            report(id, format!("p in [0, 1], {ax} points; delta in (0, 1/2], {m} points; y in {{0, 1}}"), n, w, |i| {
                let (p, d, y) = at(i);
                point(&[("p", p), ("delta", d), ("y", y as u8 as f64)])
            })
        }
        CheckId::KlEps => {
            let at = |i: u64| (lin(0.0, 0.5, (i / ax) as usize + 1, m), lin(0.0, 1.0, (i % ax) as usize, m));
            let n = ax * m as u64;
            let w = worst(n, |i| {
                let (e, q) = at(i);
                kl_eps_slack(e, q)
            });
            report(id, format!("eps in (0, 1/2], {m} points; q in [0, 1], {ax} points"), n, w, |i| {
                let (e, q) = at(i);
                point(&[("eps", e), ("q", q)])
            })
        }
        CheckId::EtaIdentity => {
            let rows: Vec<(usize, f64)> = (1..=ETA_MAX_ROUNDS)
                .into_par_iter()
                .map(|n| (n, eta_identity(n, ETA_TREES, seed).expect("rounds within cap")))
                .collect();
            let (n, dev) = rows.iter().fold((0usize, -1.0f64), |a, &(n, d)| if d > a.1 { (n, d) } else { a });
            CheckReport {
                check_id: id,
                grid_spec: format!("n = 1..{ETA_MAX_ROUNDS}, {ETA_TREES} random trees each, seed {seed}"),
                points: (ETA_MAX_ROUNDS * ETA_TREES) as u64,
                worst_slack: -dev,
                worst_point: point(&[("n", n as f64)]),
                tolerance: TOLERANCE,
                pass: dev <= TOLERANCE,
                detail: None,
            }
        }
        CheckId::Estimation => {
            let inst = estimation_instances(ESTIMATION_INSTANCES, seed);
            let (slack, idx) =
                inst.iter()
                    .enumerate()
                    .fold((f64::INFINITY, 0usize), |a, (i, r)| if r.slack() < a.0 { (r.slack(), i) } else { a });
            let ratio = estimation_adversarial_ratio(4);
            let r = &inst[idx];
            CheckReport {
                check_id: id,
                grid_spec: format!(
                    "{ESTIMATION_INSTANCES} random instances, n <= {ESTIMATION_MAX_ROUNDS}, |V| <= {ESTIMATION_MAX_SET}, seed {seed}"
                ),
                points: ESTIMATION_INSTANCES as u64,
                worst_slack: slack,
                worst_point: point(&[("instance", idx as f64), ("n", r.rounds as f64), ("set_size", r.set_size as f64)]),
                tolerance: TOLERANCE,
                pass: slack >= -TOLERANCE,
                detail: Some(format!("extreme sign set, n = 4: E max / (c log|V|) = {ratio:.4}")),
            }
        }
    })
}

pub fn run_all(resolution: f64, seed: u64) -> Result<Vec<CheckReport>> {
    CheckId::ALL.iter().map(|&id| run_check(id, resolution, seed)).collect()
}

// --- sampled checks -----------------------------------------------------------

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_prob_tree(n: usize, rng: &mut ChaCha8Rng) -> Result<BinaryTree<f64>> {
    BinaryTree::from_fn(n, |_, _| rng.sample(Open01))
}

// sum over paths of weight(path) * g(path), with the path probability under `p`
fn path_expectation(p: &BinaryTree<f64>, g: impl Fn(u64) -> f64) -> f64 {
    let n = p.depth();
    (0..1u64 << n)
        .map(|bits| {
            let mut w = 1.0;
            for t in 1..=n {
                let q = bits & ((1u64 << (t - 1)) - 1);
                let pt = *p.get(t, q);
                w *= if bits >> (t - 1) & 1 == 1 { pt } else { 1.0 - pt };
            }
            w * g(bits)
        })
        .sum()
}

/// Largest `|E sum_t |eta(p_t, y_t)| - 2n|` over `trees` random trees, outcomes drawn from the tree itself.
pub fn eta_identity(n: usize, trees: usize, seed: u64) -> Result<f64> {
    if n == 0 || n > ETA_MAX_ROUNDS {
        return Err(Error::TooLarge { what: "identity check rounds", size: n as f64, limit: ETA_MAX_ROUNDS as f64 });
    }
    let mut rng = stream_rng(seed, n as u64);
    let mut dev: f64 = 0.0;
    for _ in 0..trees {
        let p = random_prob_tree(n, &mut rng)?;
        let e = path_expectation(&p, |bits| {
            (1..=n)
                .map(|t| {
                    let q = bits & ((1u64 << (t - 1)) - 1);
                    eta(*p.get(t, q), bits >> (t - 1) & 1 == 1).abs()
                })
                .sum()
        });
        dev = dev.max((e - 2.0 * n as f64).abs());
    }
    Ok(dev)
}

/// One instance of the finite-class estimation inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationInstance {
    pub rounds: usize,
    pub set_size: usize,
    /// `E max_v sum_t phi(eta(p_t, y_t) v_t)` under outcomes drawn from `p`.
    pub expected_max: f64,
    /// `c log |V|`.
    pub bound: f64,
}

impl EstimationInstance {
    pub fn slack(&self) -> f64 {
        self.bound - self.expected_max
    }
}

/// Exact `E max_v sum_t phi(eta(p_t, y_t) v_t(y))` for trees `v` with `v_t in [p_t - 1, p_t]`.
pub fn estimation_expected_max(p: &BinaryTree<f64>, set: &[BinaryTree<f64>]) -> Result<f64> {
    let n = p.depth();
    if set.is_empty() {
        return Err(Error::EmptyClass);
    }
    for v in set {
        if v.depth() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.depth() });
        }
        for (a, b) in v.nodes().iter().zip(p.nodes()) {
            if !(*a >= b - 1.0 - 1e-15 && *a <= b + 1e-15) {
                return Err(Error::InvalidArgument(format!("tree value {a} outside [p - 1, p] for p = {b}")));
            }
        }
    }
    Ok(path_expectation(p, |bits| {
        set.iter()
            .map(|v| {
                (1..=n)
                    .map(|t| {
                        let q = bits & ((1u64 << (t - 1)) - 1);
                        phi(eta(*p.get(t, q), bits >> (t - 1) & 1 == 1) * v.get(t, q))
                    })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }))
}

/// Random instances: `n` and `|V|` uniform, `p` i.i.d. uniform, `v_t = p_t - u` with `u` uniform.
pub fn estimation_instances(count: usize, seed: u64) -> Vec<EstimationInstance> {
    let c = regret_constant::<f64>();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, (1 << 32) + i as u64);
            let n = rng.random_range(1..=ESTIMATION_MAX_ROUNDS);
            let k = rng.random_range(1..=ESTIMATION_MAX_SET);
            let p = random_prob_tree(n, &mut rng).expect("depth within cap");
            let set: Vec<BinaryTree<f64>> = (0..k).map(|_| p.map(|&pt| pt - rng.random::<f64>())).collect();
            let expected_max = estimation_expected_max(&p, &set).expect("valid instance");
            EstimationInstance { rounds: n, set_size: k, expected_max, bound: c * (k as f64).ln() }
        })
        .collect()
}

/// `E max / (c log|V|)` for `p = 1/2` and `V` all `2^n` sequences with `v_t in {-1/2, 1/2}`.
pub fn estimation_adversarial_ratio(n: usize) -> f64 {
    let p = BinaryTree::constant(n, 0.5).expect("small depth");
    let set: Vec<BinaryTree<f64>> = (0..1u64 << n)
        .map(|s| BinaryTree::from_fn(n, |t, _| if s >> (t - 1) & 1 == 1 { 0.5 } else { -0.5 }).expect("small depth"))
        .collect();
    let e = estimation_expected_max(&p, &set).expect("valid instance");
    e / (regret_constant::<f64>() * (set.len() as f64).ln())
}

// --- psi and the lambda threshold -----------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SupPsi {
    pub value: f64,
    pub p: f64,
    pub v: f64,
}

/// Grid search of `sup_{p in [0,1]} sup_{v in [p-1, p]} psi(p, lambda, v)` on the lattice of
/// step `resolution` (which contains `v = 0` for every `p`), then a golden-section pass in `v`
/// on each side of zero at the best `p`.
pub fn sup_psi(lambda: f64, resolution: f64) -> Result<SupPsi> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let m = check_resolution(resolution)? as i64;
    let best = (0..=m)
        .into_par_iter()
        .map(|i| {
            let p = i as f64 / m as f64;
            let mut best = SupPsi { value: f64::NEG_INFINITY, p, v: 0.0 };
            for j in (i - m)..=i {
                let v = j as f64 / m as f64;
                let val = psi(p, lambda, v).unwrap_or(f64::NEG_INFINITY);
                if val > best.value {
                    best = SupPsi { value: val, p, v };
                }
            }
            best
        })
        .reduce(
            || SupPsi { value: f64::NEG_INFINITY, p: 0.0, v: 0.0 },
            |a, b| if b.value > a.value || (b.value == a.value && b.p < a.p) { b } else { a },
        );
    let p = best.p;
    let mut out = best;
    for (lo, hi) in [(p - 1.0, 0.0), (0.0, p)] {
        if hi <= lo {
            continue;
        }
        let (v, val) = golden_max(|v| psi(p, lambda, v.clamp(lo, hi)).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-12);
        if val > out.value {
            out = SupPsi { value: val, p, v };
        }
    }
    Ok(out)
}

/// `lambda` admissible on the side `v < 0`, as the ratio of the two log expressions.
pub fn threshold_ratio_case1(p: f64, v: f64) -> f64 {
    let base = p.ln() + (1.0 - p - v).ln() - (p - v).ln();
    let num = base - (1.0 - p - 2.0 * v).ln();
    let den = base - (1.0 - p).ln() + 2.0 * v / (1.0 - p);
    num / den
}

/// Mirror of [`threshold_ratio_case1`] for `v > 0`.
pub fn threshold_ratio_case2(p: f64, v: f64) -> f64 {
    let base = (1.0 - p).ln() + (p + v).ln() - (1.0 - p + v).ln();
    let num = base - (p + 2.0 * v).ln();
    let den = base - p.ln() - 2.0 * v / p;
    num / den
}

/// Case-one ratio along `v = p - 1`: `(log p + log 2 - log 3) / (log p + log 2 - 2)`.
pub fn threshold_edge_closed_form(p: f64) -> f64 {
    let l = p.ln() + std::f64::consts::LN_2;
    (l - 3f64.ln()) / (l - 2.0)
}

/// Part of the `(p, v)` square scanned by [`lambda_threshold_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRegion {
    pub p_min: f64,
    pub p_max: f64,
    pub case1: bool,
    pub case2: bool,
}

impl Default for ScanRegion {
    fn default() -> Self {
        ScanRegion { p_min: 0.0, p_max: 1.0, case1: true, case2: true }
    }
}

/// Minimum of both threshold ratios over the lattice of step `resolution`, skipping
/// `p in {0, 1}` and `|v| < resolution`.
pub fn lambda_threshold_scan(resolution: f64, region: ScanRegion) -> Result<f64> {
    let m = check_resolution(resolution)? as i64;
    if resolution > 1e-3 {
        return Err(Error::InvalidArgument(format!("threshold scan needs resolution <= 1e-3, got {resolution}")));
    }
    let min = (1..m)
        .into_par_iter()
        .filter_map(|i| {
            let p = i as f64 / m as f64;
            if p < region.p_min || p > region.p_max {
                return None;
            }
            let mut best = f64::INFINITY;
            if region.case1 {
                for j in (i - m)..=-1 {
                    let v = j as f64 / m as f64;
                    if v.abs() >= resolution * (1.0 - 1e-9) {
                        best = best.min(threshold_ratio_case1(p, v));
                    }
                }
            }
            if region.case2 {
                for j in 1..=i {
                    let v = j as f64 / m as f64;
                    if v.abs() >= resolution * (1.0 - 1e-9) {
                        best = best.min(threshold_ratio_case2(p, v));
                    }
                }
            }
            Some(best)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Degenerate("scan region holds no grid points".into()));
    }
    Ok(min)
}

/// `lambda*` as used by the checks.
pub fn lambda_threshold() -> f64 {
    lambda_star::<f64>()
}
