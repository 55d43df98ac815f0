use std::path::Path;
use std::sync::Arc;

use logloss_core::assouad::{
    build_assouad_class, kl_risk, lower_bound_value, online_to_batch, regret_against_signs, run_online, sample_dataset,
    scaling_experiment, tv_budget, wrong_side_slack, AssouadClass, Learner,
};
use logloss_core::bounds::{bound_sweep, fit_rate_exponent, rate_exponents, BoundKind};
use logloss_core::cover::{
    entropy_curve_estimate, entropy_curve_for_class, restrict, sequential_cover_exact, EntropyEstimate,
    EXACT_MAX_DEPTH, EXACT_MAX_EXPERTS,
};
use logloss_core::game::{
    dual_value, local_search, AllContexts, AvailabilityRule, DualStrategy, MinimaxSolver, PreviousOutcomes, StaticSet,
};
use logloss_core::tree::BinaryTree;
use logloss_core::verify::{lambda_threshold, lambda_threshold_scan, run_check, sup_psi, CheckId, ScanRegion};
use logloss_core::{EntropyCurve, ExpertClass, GameInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{Report, Table};

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn dispatch(cfg: &RunConfig) -> Res<Report> {
    match &cfg.command {
        Command::Minimax(a) => minimax(a),
        Command::Dual(a) => dual(a, cfg.seed),
        Command::Cover(a) => cover(a),
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a, cfg),
        Command::Assouad(c) => assouad(c, cfg.seed),
    }
}

fn load_class(path: &Path) -> Res<ExpertClass> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_rule(s: &str) -> Res<Arc<dyn AvailabilityRule>> {
    match s.trim() {
        "all" => Ok(Arc::new(AllContexts)),
        "previous-outcomes" => Ok(Arc::new(PreviousOutcomes)),
        other => {
            let ids = other.strip_prefix("static:").ok_or_else(|| format!("unknown context rule `{other}`"))?;
            let ids = ids
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad context id in `{other}`")))
                .collect::<Res<Vec<_>>>()?;
            Ok(Arc::new(StaticSet::new(ids).map_err(err)?))
        }
    }
}

fn build_game(a: &GameArgs) -> Res<GameInstance> {
    let class = load_class(&a.class)?;
    let game = GameInstance::with_rule(a.n, class, parse_rule(&a.rule)?).map_err(err)?;
    game.collapse_histories(a.collapse).map_err(err)
}

fn minimax(a: &MinimaxArgs) -> Res<Report> {
    let game = build_game(&a.game)?;
    let solver = MinimaxSolver::new(&game).map_err(err)?;
    let value = solver.value();
    let mut body = json!({
        "subcommand": "minimax",
        "n": game.horizon(),
        "experts": game.class().len(),
        "contexts": game.class().contexts(),
        "rule": a.game.rule,
        "value": value,
    });
    if a.dump_strategy {
        let s = DualStrategy::from_primal(&solver).map_err(err)?;
        body["strategy"] = json!({ "contexts": s.context_tree, "predictions": s.prob_tree });
    }
    let mut t = Table::new(&["n", "value"]);
    t.row(vec![game.horizon().into(), value.into()]);
    Ok(Report { json: body, csv: t.finish(), pass: true })
}

fn dual(a: &DualArgs, seed: u64) -> Res<Report> {
    let game = build_game(&a.game)?;
    let starts: Vec<DualStrategy> = match &a.strategy {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            vec![serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?]
        }
        None => {
            if a.starts == 0 {
                return Err("--starts must be at least 1".into());
            }
            (0..a.starts as u64)
                .map(|i| DualStrategy::random(&game, &mut rng(seed, i)).map_err(err))
                .collect::<Res<_>>()?
        }
    };
    let mut rows = Vec::new();
    let mut t = Table::new(&["start", "initial", "final"]);
    let mut best = f64::NEG_INFINITY;
    for (i, s) in starts.iter().enumerate() {
        let initial = dual_value(&game, s).map_err(err)?;
        let fin = if a.sweeps > 0 { local_search(&game, s, a.sweeps).map_err(err)?.1 } else { initial };
        best = best.max(fin);
        t.row(vec![i.into(), initial.into(), fin.into()]);
        rows.push(json!({ "start": i, "initial": initial, "final": fin }));
    }
    let mut body = json!({ "subcommand": "dual", "n": game.horizon(), "starts": rows, "best": best });
    if a.primal {
        let primal = MinimaxSolver::new(&game).map_err(err)?.value();
        body["primal"] = json!(primal);
        body["gap"] = json!(primal - best);
    }
    Ok(Report { json: body, csv: t.finish(), pass: true })
}

fn estimate_json(est: &EntropyEstimate) -> Value {
    json!({ "rows": est.rows, "slope": est.slope, "functions": est.functions, "grid_points": est.grid_points })
}

fn cover(a: &CoverArgs) -> Res<Report> {
    if a.gammas.iter().any(|g| !(*g > 0.0)) {
        return Err("scales must be positive".into());
    }
    let (est, class) = match (&a.class, a.lipschitz) {
        (Some(path), None) => {
            let class = load_class(path)?;
            (entropy_curve_for_class(&class, &a.gammas, a.n).map_err(err)?, Some(class))
        }
        (None, Some(dim)) => (entropy_curve_estimate(dim, a.levels, &a.gammas, a.n).map_err(err)?, None),
        _ => return Err("give exactly one of --class and --lipschitz".into()),
    };
    let mut body = estimate_json(&est);
    body["subcommand"] = json!("cover");
    let mut exact: Vec<Option<usize>> = vec![None; est.rows.len()];
    if a.exact {
        let class = class.as_ref().ok_or("--exact needs --class")?;
        if a.n > EXACT_MAX_DEPTH || class.len() > EXACT_MAX_EXPERTS {
            return Err(format!(
                "exact cover search is limited to depth {EXACT_MAX_DEPTH} and {EXACT_MAX_EXPERTS} experts"
            ));
        }
        let k = class.num_contexts();
        let x = BinaryTree::from_fn(a.n, |t, _| (t - 1) % k).map_err(err)?;
        let rc = restrict(class, &x).map_err(err)?;
        let mut out = Vec::new();
        for (i, row) in est.rows.iter().enumerate() {
            let g = row.gamma;
            let c = sequential_cover_exact(&rc, g).map_err(err)?;
            exact[i] = Some(c.size);
            out.push(json!({ "gamma": g, "size": c.size, "lower_bound": c.lower_bound, "cover": c.cover }));
        }
        body["exact"] = Value::Array(out);
    }
    let mut header = vec!["gamma", "lower", "upper"];
    if a.exact {
        header.push("exact_size");
    }
    let mut t = Table::new(&header);
    for (row, ex) in est.rows.iter().zip(&exact) {
        let mut cells = vec![row.gamma.into(), row.lower.into(), row.upper.into()];
        if let Some(s) = ex {
            cells.push((*s).into());
        }
        t.row(cells);
    }
    Ok(Report { json: body, csv: t.finish(), pass: true })
}

fn bounds(a: &BoundsArgs) -> Res<Report> {
    let curve: EntropyCurve = a.entropy.parse().map_err(err)?;
    let grid = parse_grid(&a.n_grid)?;
    let rows = bound_sweep(&curve, &grid).map_err(err)?;
    let mut body = json!({ "subcommand": "bounds", "curve": curve, "rows": rows });
    if a.fit {
        let s1 = fit_rate_exponent(BoundKind::Theorem1, &curve, &grid).map_err(err)?;
        let s2 = fit_rate_exponent(BoundKind::Foster, &curve, &grid).map_err(err)?;
        eprintln!("slope theorem1 {} foster {}", logloss_core::num::fmt12(s1), logloss_core::num::fmt12(s2));
        body["fit"] = json!({ "theorem1": s1, "foster": s2 });
    }
    if a.rates {
        match curve {
            EntropyCurve::Power { p, .. } => {
                body["rates"] = serde_json::to_value(rate_exponents(p).map_err(err)?).map_err(err)?
            }
            _ => return Err("--rates needs a power entropy curve".into()),
        }
    }
    let mut buf = Vec::new();
    logloss_core::bounds::write_sweep_csv(&rows, &mut buf).map_err(err)?;
    Ok(Report { json: body, csv: String::from_utf8(buf).map_err(err)?, pass: true })
}

fn verify(a: &VerifyArgs, cfg: &RunConfig) -> Res<Report> {
    let res = cfg.resolution.unwrap_or(1e-3);
    let ids: Vec<CheckId> = if a.all {
        CheckId::ALL.to_vec()
    } else if a.checks.is_empty() {
        if a.threshold {
            Vec::new()
        } else {
            return Err("name checks to run or pass --all".into());
        }
    } else {
        a.checks.iter().map(|s| s.parse().map_err(err)).collect::<Res<_>>()?
    };
    let mut reports = Vec::new();
    let mut t = Table::new(&["check_id", "worst_slack", "worst_point", "pass", "points", "tolerance"]);
    let mut pass = true;
    for id in ids {
        let r = run_check(id, res, cfg.seed).map_err(err)?;
        let point = r
            .worst_point
            .iter()
            .map(|(k, v)| format!("{k}={}", logloss_core::num::fmt12(*v)))
            .collect::<Vec<_>>()
            .join(";");
        eprintln!(
            "{} worst_slack {} at {} {}",
            r.check_id,
            logloss_core::num::fmt12(r.worst_slack),
            point,
            if r.pass { "pass" } else { "FAIL" }
        );
        t.row(vec![
            r.check_id.name().to_string().into(),
            r.worst_slack.into(),
            point.into(),
            r.pass.into(),
            (r.points as usize).into(),
            r.tolerance.into(),
        ]);
        pass &= r.pass;
        reports.push(r);
    }
    let mut body = json!({ "subcommand": "verify", "resolution": res, "seed": cfg.seed, "reports": reports });
    if a.threshold {
        let lam = lambda_threshold();
        let s = sup_psi(lam, res).map_err(err)?;
        let scan = lambda_threshold_scan(res, ScanRegion::default()).map_err(err)?;
        let ok = s.value <= 1.0 + 1e-9;
        pass &= ok;
        eprintln!(
            "sup psi at lambda* {} threshold scan {}",
            logloss_core::num::fmt12(s.value),
            logloss_core::num::fmt12(scan)
        );
        body["threshold"] = json!({ "lambda_star": lam, "sup_psi": s, "scan": scan, "pass": ok });
    }
    body["pass"] = json!(pass);
    Ok(Report { json: body, csv: t.finish(), pass })
}

fn assouad_class(a: &AssouadClassArgs) -> Res<AssouadClass> {
    let eps = match (a.epsilon, a.n) {
        (Some(e), _) => e,
        (None, Some(n)) => lower_bound_value(a.dim, n as f64).map_err(err)?.epsilon,
        (None, None) => return Err("give --epsilon or --n".into()),
    };
    build_assouad_class(a.dim, eps).map_err(err)
}

// signs are drawn from a stream separate from the sampler's
const SIGN_STREAM: u64 = 1 << 40;

fn samples(a: &AssouadClassArgs, seed: u64) -> Res<(AssouadClass, Vec<bool>, Vec<(usize, bool)>)> {
    let ac = assouad_class(a)?;
    let n = a.n.ok_or("--n is required")?;
    let v = ac.random_signs(&mut rng(seed, SIGN_STREAM));
    let data = sample_dataset(&ac, &v, n, seed).map_err(err)?;
    Ok((ac, v, data))
}

fn assouad(c: &AssouadCommand, seed: u64) -> Res<Report> {
    match c {
        AssouadCommand::Build(a) => {
            let ac = assouad_class(a)?;
            let mut header = vec!["index".to_string()];
            header.extend((1..=ac.dim).map(|i| format!("x{i}")));
            let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            for i in 0..ac.n_centers {
                let mut cells = vec![i.into()];
                cells.extend(ac.center(i).into_iter().map(Into::into));
                t.row(cells);
            }
            Ok(Report { json: json!({ "subcommand": "assouad build", "class": ac }), csv: t.finish(), pass: true })
        }
        AssouadCommand::Sample(a) => {
            let (ac, v, data) = samples(&a.class, seed)?;
            let mut t = Table::new(&["t", "center", "y"]);
            for (i, &(x, y)) in data.iter().enumerate() {
                t.row(vec![(i + 1).into(), x.into(), (y as usize).into()]);
            }
            let body = json!({ "subcommand": "assouad sample", "class": ac, "signs": v, "data": data });
            Ok(Report { json: body, csv: t.finish(), pass: true })
        }
        AssouadCommand::Risk(a) => {
            let learner: Learner = a.learner.parse().map_err(err)?;
            let (ac, v, data) = samples(&a.class, seed)?;
            let preds = run_online(&learner, &ac, &v, &data).map_err(err)?;
            let regret = regret_against_signs(&ac, &data, &preds).map_err(err)?;
            let est = online_to_batch(&learner, &ac, &v, &data).map_err(err)?;
            let risk = kl_risk(&ac, &v, &est).map_err(err)?;
            let slack = wrong_side_slack(&ac, &v, &est).map_err(err)?;
            let mut t = Table::new(&["n", "epsilon", "regret", "kl_risk", "wrong_side_slack"]);
            t.row(vec![data.len().into(), ac.epsilon.into(), regret.into(), risk.into(), slack.into()]);
            let body = json!({
                "subcommand": "assouad risk", "learner": learner.name(), "n": data.len(), "epsilon": ac.epsilon,
                "regret": regret, "kl_risk": risk, "wrong_side_slack": slack,
            });
            Ok(Report { json: body, csv: t.finish(), pass: true })
        }
        AssouadCommand::Scaling(a) => {
            let learner: Learner = a.learner.parse().map_err(err)?;
            let grid = usize_grid(&a.n_grid)?;
            let r = scaling_experiment(a.dim, &grid, &learner, a.replicates, seed).map_err(err)?;
            let mut buf = Vec::new();
            logloss_core::assouad::write_scaling_csv(&r.cells, &mut buf).map_err(err)?;
            let mut body = serde_json::to_value(&r).map_err(err)?;
            body["subcommand"] = json!("assouad scaling");
            Ok(Report { json: body, csv: String::from_utf8(buf).map_err(err)?, pass: true })
        }
        AssouadCommand::LowerBound(a) => {
            let grid = parse_grid(&a.n_grid)?;
            let mut t = Table::new(&["n", "value", "epsilon", "tv_budget"]);
            let mut rows = Vec::new();
            for n in grid {
                let lb = lower_bound_value(a.dim, n).map_err(err)?;
                let tv = tv_budget(a.dim, n).map_err(err)?;
                t.row(vec![n.into(), lb.value.into(), lb.epsilon.into(), tv.into()]);
                rows.push(json!({ "n": n, "value": lb.value, "epsilon": lb.epsilon, "tv_budget": tv }));
            }
            Ok(Report {
                json: json!({ "subcommand": "assouad lower-bound", "dim": a.dim, "rows": rows }),
                csv: t.finish(),
                pass: true,
            })
        }
    }
}

fn usize_grid(s: &str) -> Res<Vec<usize>> {
    parse_grid(s)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 && x < 1e15 {
                Ok(x as usize)
            } else {
                Err(format!("n must be a positive integer, got {x}"))
            }
        })
        .collect()
}
