//! One line per acceptance criterion. Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use logloss_core::assouad::{build_assouad_class, lower_bound_value, scaling_experiment, tv_budget, Learner};
use logloss_core::bounds::{fit_rate_exponent, foster_bound, theorem1_bound, BoundKind};
use logloss_core::cover::{entropy_curve_estimate, restrict, sequential_cover_exact, RestrictedClass};
use logloss_core::game::{dual_value, exact_minimax, run_strategy, Adversary, DualStrategy, Strategy};
use logloss_core::loss::{lambda_star, regret_constant};
use logloss_core::tree::BinaryTree;
use logloss_core::verify::{lambda_threshold_scan, run_check, sup_psi, CheckId, ScanRegion};
use logloss_core::{EntropyCurve, ExpertClass, GameInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion1() -> Outcome {
    let c_oracle = (2.0 - 2f64.ln()) / (3f64.ln() - 2f64.ln());
    let c: f64 = regret_constant();
    let lam: f64 = lambda_star();
    let pass =
        (c - 3.22310).abs() <= 1e-4 && c <= 4.0 && (c - c_oracle).abs() <= 1e-15 && (lam * c - 1.0).abs() <= 1e-15;
    outcome(pass, format!("c = {c:.10}, lambda* = {lam:.10}"))
}

fn criterion2() -> Outcome {
    let ids = [
        CheckId::PhiLipschitz,
        CheckId::ScPointwise,
        CheckId::ScEdge,
        CheckId::Nesterov,
        CheckId::SelfConcordant,
        CheckId::Clipping,
        CheckId::KlEps,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ids {
        match run_check(id, 1e-3, SEED) {
            Ok(r) => {
                let ok = r.pass && r.worst_slack >= -1e-9 && r.points >= 1_000_000;
                pass &= ok;
                parts.push(format!("{}={:.3e}/{}pts", id, r.worst_slack, r.points));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{id} error {e}"));
            }
        }
    }
    outcome(pass, parts.join(" "))
}

fn criterion3() -> Outcome {
    let lam: f64 = lambda_star();
    let sup = match sup_psi(lam, 1e-3) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("sup_psi error {e}")),
    };
    let scan = match lambda_threshold_scan(1e-3, ScanRegion::default()) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("scan error {e}")),
    };
    let pass = sup.value <= 1.0 + 1e-9 && (scan - lam).abs() <= 1e-3;
    outcome(pass, format!("sup psi = {:.12} at p={:.4} v={:.4}, scan = {scan:.6}", sup.value, sup.p, sup.v))
}

fn sampled_check(id: CheckId) -> Outcome {
    match run_check(id, 1e-3, SEED) {
        Ok(r) => outcome(
            r.pass && r.worst_slack >= -1e-9,
            format!(
                "worst slack {:.3e} ({}){}",
                r.worst_slack,
                r.grid_spec,
                r.detail.map(|d| format!(", {d}")).unwrap_or_default()
            ),
        ),
        Err(e) => outcome(false, format!("error {e}")),
    }
}

// --- criterion 6 oracles ----------------------------------------------------

fn random_class(rng: &mut ChaCha8Rng, k: usize, m: usize) -> ExpertClass {
    let experts = (0..m)
        .map(|_| {
            (0..k)
                .map(|_| match rng.random_range(0..10) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.random::<f64>(),
                })
                .collect()
        })
        .collect();
    ExpertClass::with_contexts(k, experts).unwrap()
}

fn ln_prob(v: f64, y: bool) -> f64 {
    if y {
        v.ln()
    } else {
        (1.0 - v).ln()
    }
}

/// Largest over all context trees of `ln sum_y max_f P_f(y | x)`.
fn enumerate_trees(class: &ExpertClass, n: usize) -> f64 {
    let k = class.num_contexts();
    let nodes = (1usize << n) - 1;
    let total = k.pow(nodes as u32);
    let mut best = f64::NEG_INFINITY;
    let mut tree = vec![0usize; nodes];
    for mut code in 0..total {
        for slot in tree.iter_mut() {
            *slot = code % k;
            code /= k;
        }
        let mut sum = 0.0;
        for path in 0..(1usize << n) {
            let mut lik = f64::NEG_INFINITY;
            for f in 0..class.len() {
                let mut l = 0.0;
                // node of round t is 2^(t-1) - 1 + (outcomes so far)
                let mut prefix = 0usize;
                for t in 0..n {
                    let y = path >> t & 1 == 1;
                    l += ln_prob(class.value(f, tree[(1 << t) - 1 + prefix]), y);
                    prefix |= (y as usize) << t;
                }
                lik = lik.max(l);
            }
            sum += lik.exp();
        }
        best = best.max(sum.ln());
    }
    best
}

fn golden_inf(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let g = |u: f64| {
        let p = 1.0 / (1.0 + (-u).exp());
        (a - p.ln()).max(b - (1.0 - p).ln())
    };
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let u1 = hi - r * (hi - lo);
        let u2 = lo + r * (hi - lo);
        if g(u1) <= g(u2) {
            hi = u2;
        } else {
            lo = u1;
        }
    }
    g(0.5 * (lo + hi))
}

/// The game recursion written out: sup over contexts, inf over predictions, sup over outcomes.
fn recursion(class: &ExpertClass, ll: &[f64], left: usize) -> f64 {
    if left == 0 {
        return ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    let mut best = f64::NEG_INFINITY;
    for x in 0..class.num_contexts() {
        let next = |y: bool| {
            let l: Vec<f64> = ll.iter().enumerate().map(|(f, &v)| v + ln_prob(class.value(f, x), y)).collect();
            recursion(class, &l, left - 1)
        };
        best = best.max(golden_inf(next(true), next(false)));
    }
    best
}

fn criterion6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_gap, mut worst_dual, mut worst_bayes) = (0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut by_trees, mut by_recursion) = (0, 0);
    for _ in 0..100 {
        let k = rng.random_range(1..=3);
        let m = rng.random_range(1..=8);
        let n = rng.random_range(1..=6);
        let class = random_class(&mut rng, k, m);
        let game = GameInstance::new(n, class.clone()).unwrap();
        let value = match exact_minimax(&game) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("exact_minimax error {e}")),
        };
        let feasible = k == 1 || (k == 2 && n <= 4) || (k == 3 && n <= 3);
        let oracle = if feasible {
            by_trees += 1;
            enumerate_trees(&class, n)
        } else {
            by_recursion += 1;
            recursion(&class, &vec![0.0; m], n)
        };
        worst_gap = worst_gap.max((value - oracle).abs());
        for _ in 0..10 {
            let dual = DualStrategy::random(&game, &mut rng).unwrap();
            worst_dual = worst_dual.max(dual_value(&game, &dual).unwrap() - value);
            let seq: Vec<(usize, bool)> = (0..n).map(|_| (rng.random_range(0..k), rng.random())).collect();
            let tr = run_strategy(&game, &Strategy::uniform_bayes(m), &Adversary::FixedSequence(seq)).unwrap();
            worst_bayes = worst_bayes.max(tr.regret - (m as f64).ln());
        }
    }
    let pass = worst_gap <= 1e-9 && worst_dual <= 1e-9 && worst_bayes <= 1e-9;
    outcome(
        pass,
        format!(
            "max |exact - oracle| = {worst_gap:.2e} ({by_trees} by tree enumeration, {by_recursion} by recursion), \
             max dual - primal = {worst_dual:.3e}, max bayes regret - ln|F| = {worst_bayes:.3e}"
        ),
    )
}

// --- criterion 7 -------------------------------------------------------------

/// Smallest number of real values such that each of `targets` is within `gamma` of one.
fn brute_force_cover(targets: &[f64], gamma: f64) -> usize {
    let candidates: Vec<f64> = (-1000..=2000).map(|i| i as f64 / 1000.0).collect();
    for size in 1..=targets.len() {
        let mut idx = vec![0usize; size];
        loop {
            if targets.iter().all(|t| idx.iter().any(|&i| (candidates[i] - t).abs() <= gamma + 1e-12)) {
                return size;
            }
            let mut j = 0;
            while j < size {
                idx[j] += 1;
                if idx[j] < candidates.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == size {
                break;
            }
        }
    }
    targets.len()
}

fn criterion7() -> Outcome {
    let class = ExpertClass::constants(&[0.0, 1.0]).unwrap();
    let x = BinaryTree::constant(1, 0usize).unwrap();
    let rc: RestrictedClass = restrict(&class, &x).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (gamma, want) in [(0.5, 1), (0.4, 2)] {
        let oracle = brute_force_cover(&[0.0, 1.0], gamma);
        let got = sequential_cover_exact(&rc, gamma).map(|c| c.size).unwrap_or(usize::MAX);
        pass &= got == want && oracle == want;
        parts.push(format!("N({gamma}) = {got} (oracle {oracle})"));
    }
    match entropy_curve_estimate(1, 1, &[0.25, 0.125, 0.0625], 64) {
        Ok(est) => {
            pass &= (est.slope - 1.0).abs() <= 0.3 && est.rows.iter().all(|r| r.lower <= r.upper + 1e-12);
            parts.push(format!("lipschitz entropy slope {:.4} over {} functions", est.slope, est.functions));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("lipschitz error {e}"));
        }
    }
    outcome(pass, parts.join(", "))
}

// --- criterion 8 -------------------------------------------------------------

fn criterion8() -> Outcome {
    let grid: Vec<f64> = (10..=20).map(|k| 2f64.powi(k)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let h = EntropyCurve::power(1.0, p).unwrap();
        let s1 = fit_rate_exponent(BoundKind::Theorem1, &h, &grid).unwrap();
        let s2 = fit_rate_exponent(BoundKind::Foster, &h, &grid).unwrap();
        let ok1 = (s1 - p / (p + 1.0)).abs() <= 0.02;
        let ok2 = (s2 - (2.0 * p - 1.0) / (2.0 * p)).abs() <= 0.03;
        let t = theorem1_bound(&h, 65536.0).unwrap().value;
        let f = foster_bound(&h, 65536.0).unwrap().value;
        pass &= ok1 && ok2 && t < f;
        parts.push(format!(
            "p={p}: theorem1 {s1:.4}/{:.4} {}, foster {s2:.4}/{:.4} {}, values at 2^16 {t:.1} < {f:.1}",
            p / (p + 1.0),
            if ok1 { "ok" } else { "off" },
            (2.0 * p - 1.0) / (2.0 * p),
            if ok2 { "ok" } else { "off" },
        ));
    }
    let h = EntropyCurve::power(1.0, 0.5).unwrap();
    let s1 = fit_rate_exponent(BoundKind::Theorem1, &h, &grid).unwrap();
    let s2 = fit_rate_exponent(BoundKind::Foster, &h, &grid).unwrap();
    pass &= (s1 - s2).abs() <= 0.05;
    parts.push(format!("p=0.5: theorem1 {s1:.4} vs foster {s2:.4}"));
    outcome(pass, parts.join("; "))
}

/// Foster slopes far beyond the desk-scale range. Informational only.
fn foster_far_range() -> String {
    let grid: Vec<f64> = (0..=10).map(|k| 2f64.powi(40 + 4 * k)).collect();
    [1.5, 2.0, 3.0]
        .iter()
        .map(|&p| {
            let h = EntropyCurve::power(1.0, p).unwrap();
            let s = fit_rate_exponent(BoundKind::Foster, &h, &grid).unwrap();
            format!("p={p}: {s:.4}")
        })
        .collect::<Vec<_>>()
        .join(", ")
}

// --- criterion 9 -------------------------------------------------------------

fn criterion9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [1usize, 2, 3] {
        let q = (p + 1) as i32;
        // n = 2^(k(p+1)) makes eps a power of two, so every step below is exact
        let n = 2f64.powi(4 * q);
        let eps = 2f64.powi(-4) / 8.0;
        let exact = n * (4.0 * eps).powi(q) == 2f64.powi(-q);
        let tv = tv_budget(p, n).unwrap();
        let lb = lower_bound_value(p, n).unwrap();
        let lb_exact = lb.value == 2f64.powi(4 * p as i32) / 128.0 && lb.epsilon == eps;
        let built = build_assouad_class(p, lb.epsilon).is_ok();
        pass &= exact && tv == 2f64.powi(-q) && lb_exact && built;
        parts.push(format!("p={p}: tv {tv} lower bound {}", lb.value));
    }
    let grid: Vec<usize> = (8..=14).map(|k| 1usize << k).collect();
    match scaling_experiment(1, &grid, &Learner::FactorizedBayes, 11, SEED) {
        Ok(r) => {
            pass &= r.slope >= 0.40;
            parts.push(format!("scaling slope {:.4} (target 0.5)", r.slope));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("scaling error {e}"));
        }
    }
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, || sampled_check(CheckId::EtaIdentity)),
        (5, || sampled_check(CheckId::Estimation)),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
    ];
    let mut failed = 0;
    for (i, f) in criteria {
        let start = Instant::now();
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "criterion {i}: {} ({:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("info: foster slopes over n = 2^40..2^80: {}", foster_far_range());
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
