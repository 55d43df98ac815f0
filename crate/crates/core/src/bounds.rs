//! Chaining-free regret bound `inf_gamma 4 n gamma + c H(gamma)`, the earlier
//! three-scale bound, and their growth exponents in `n`.

use crate::curve::EntropyCurve;
use crate::error::{Error, Result};
use crate::loss::regret_constant;
use crate::num::fmt12;
use crate::optim::{golden_min, grid_golden_min, least_squares_slope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

const LOG_DELTA_MIN: f64 = -60.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Theorem1 {
    pub value: f64,
    pub gamma: f64,
}

/// Minimizes `4 n gamma + c H(gamma)` over `gamma in [1/n^2, 1]`.
///
/// When `H` vanishes the infimum 0 is approached as `gamma -> 0` and `(0, 0)` is returned.
pub fn theorem1_bound(h: &EntropyCurve, n: f64) -> Result<Theorem1> {
    check_n(n)?;
    h.validate()?;
    if h.is_zero() {
        return Ok(Theorem1 { value: 0.0, gamma: 0.0 });
    }
    let c = regret_constant::<f64>();
    let f = |u: f64| 4.0 * n * u.exp() + c * h.value(u.exp());
    let (u, _) = grid_golden_min(f, -2.0 * n.ln(), 0.0, 2001, 1e-13);
    // polish in gamma itself for relative accuracy on the value
    let g0 = u.exp();
    let (g, v) =
        golden_min(|g| 4.0 * n * g + c * h.value(g), g0 * (1.0 - 1e-3), (g0 * (1.0 + 1e-3)).min(1.0), g0 * 1e-15);
    let (g, v) = if v <= f(u) { (g, v) } else { (g0, f(u)) };
    if !v.is_finite() {
        return Err(Error::Divergent("entropy curve is not finite on [1/n^2, 1]"));
    }
    Ok(Theorem1 { value: v, gamma: g })
}

/// Stationary point of `4 n gamma + c C gamma^(-p)`: `gamma* = (p c C / (4 n))^(1/(p+1))`.
pub fn theorem1_power_closed_form(c_coef: f64, p: f64, n: f64) -> Theorem1 {
    let c = regret_constant::<f64>();
    let gamma = (p * c * c_coef / (4.0 * n)).powf(1.0 / (p + 1.0));
    Theorem1 { value: 4.0 * n * gamma + c * c_coef * gamma.powf(-p), gamma }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
}

/// The five terms of the three-scale bound at some parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FosterTerms {
    pub truncation: f64,
    pub chaining: f64,
    pub integral: f64,
    pub entropy: f64,
    pub clipping: f64,
}

impl FosterTerms {
    pub fn total(&self) -> f64 {
        self.truncation + self.chaining + self.integral + self.entropy + self.clipping
    }

    fn divergent(&self) -> Option<&'static str> {
        [
            (self.truncation, "4 n alpha / delta"),
            (self.chaining, "sqrt(n / delta) integral of sqrt H"),
            (self.integral, "integral of H / delta"),
            (self.entropy, "H(gamma)"),
            (self.clipping, "n delta log(1/delta)"),
        ]
        .into_iter()
        .find(|(v, _)| !v.is_finite())
        .map(|(_, name)| name)
    }
}

/// `4 n a / d + 30 sqrt(2n/d) int_a^g sqrt H + (8/d) int_a^g H + H(g) + 3 n d log(1/d)`.
pub fn foster_terms(h: &EntropyCurve, n: f64, p: &BoundParams) -> Result<FosterTerms> {
    let BoundParams { gamma, delta, alpha } = *p;
    if !(alpha > 0.0 && alpha <= gamma && delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidArgument(format!("need 0 < alpha <= gamma and 0 < delta <= 1/2, got {p:?}")));
    }
    Ok(FosterTerms {
        truncation: 4.0 * n * alpha / delta,
        chaining: 30.0 * (2.0 * n / delta).sqrt() * h.sqrt_integral(alpha, gamma)?,
        integral: 8.0 / delta * h.integral(alpha, gamma)?,
        entropy: h.value(gamma),
        clipping: 3.0 * n * delta * (1.0 / delta).ln(),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FosterBound {
    pub value: f64,
    pub params: BoundParams,
    pub terms: FosterTerms,
}

/// Starting parameters for the three-scale bound, following the order-optimal choices
/// for `C gamma^(-p)` (and for the log family), clipped to `alpha <= gamma`, `delta <= 1/2`.
pub fn foster_warm_start(h: &EntropyCurve, n: f64) -> BoundParams {
    let (gamma, delta, alpha) = match h {
        EntropyCurve::Power { p, .. } => {
            let p = *p;
            let alpha = n.powf(-1.0 / p);
            if p <= 1.0 {
                let g = n.powf(-1.0 / (p + 1.0));
                (g, g, alpha)
            } else if p <= 2.0 {
                (n.powf(-(2.0 * p + 1.0) / (2.0 * p * (2.0 + p))), n.powf(-1.0 / (2.0 * p)), alpha)
            } else {
                (1.0, n.powf(-1.0 / (2.0 * p)), alpha)
            }
        }
        _ => (1.0 / n, n.powf(-0.5), 1.0 / (n * n)),
    };
    let gamma = gamma.min(1.0);
    BoundParams { gamma, delta: delta.min(0.5), alpha: alpha.min(gamma) }
}

// search coordinates: u = ln gamma, w = ln delta, s = ln(gamma / alpha)
struct FosterSearch<'a> {
    h: &'a EntropyCurve,
    n: f64,
    lo: [f64; 3],
    hi: [f64; 3],
}

impl FosterSearch<'_> {
    fn params(x: &[f64; 3]) -> BoundParams {
        let gamma = x[0].exp();
        BoundParams { gamma, delta: x[1].exp(), alpha: gamma * (-x[2]).exp() }
    }

    fn eval(&self, x: &[f64; 3]) -> f64 {
        match foster_terms(self.h, self.n, &Self::params(x)) {
            Ok(t) => {
                let v = t.total();
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn clamp(&self, mut x: [f64; 3]) -> [f64; 3] {
        for k in 0..3 {
            x[k] = x[k].clamp(self.lo[k], self.hi[k]);
        }
        x
    }

    fn descend(&self, start: [f64; 3]) -> ([f64; 3], f64) {
        let mut x = self.clamp(start);
        let mut v = self.eval(&x);
        for _ in 0..200 {
            let before = v;
            for k in 0..3 {
                let mut y = x;
                let (xk, vk) = grid_golden_min(
                    |t| {
                        y[k] = t;
                        self.eval(&y)
                    },
                    self.lo[k],
                    self.hi[k],
                    65,
                    1e-10,
                );
                if vk < v {
                    x[k] = xk;
                    v = vk;
                }
            }
            if before - v <= 1e-12 * v.abs().max(1e-300) {
                break;
            }
        }
        (x, v)
    }
}

/// Minimizes the three-scale bound over `gamma in [1/n^2, 1]`, `delta in [e^-60, 1/2]` and
/// `alpha in [gamma e^-(4 ln n + 10), gamma]` by coordinate descent in log coordinates,
/// started from the warm start, a coarse grid's best points and three seeded random points.
pub fn foster_bound(h: &EntropyCurve, n: f64) -> Result<FosterBound> {
    check_n(n)?;
    h.validate()?;
    if h.is_zero() {
        // infimum 0 along alpha, delta -> 0
        let params = BoundParams { gamma: 1.0, delta: 0.0, alpha: 0.0 };
        let terms = FosterTerms { truncation: 0.0, chaining: 0.0, integral: 0.0, entropy: 0.0, clipping: 0.0 };
        return Ok(FosterBound { value: 0.0, params, terms });
    }
    let ln_n = n.ln();
    let search =
        FosterSearch { h, n, lo: [-2.0 * ln_n - 1.0, LOG_DELTA_MIN, 0.0], hi: [0.0, 0.5f64.ln(), 4.0 * ln_n + 10.0] };
    let warm = foster_warm_start(h, n);
    let mut starts = vec![[warm.gamma.ln(), warm.delta.ln(), (warm.gamma / warm.alpha).ln()]];
    const G: usize = 16;
    let axis = |k: usize, i: usize| search.lo[k] + (search.hi[k] - search.lo[k]) * i as f64 / (G - 1) as f64;
    let mut coarse: Vec<([f64; 3], f64)> = (0..G * G * G)
        .into_par_iter()
        .map(|idx| {
            let x = [axis(0, idx % G), axis(1, idx / G % G), axis(2, idx / (G * G))];
            (x, search.eval(&x))
        })
        .collect();
    coarse.sort_by(|a, b| a.1.total_cmp(&b.1));
    starts.extend(coarse.iter().take(4).map(|c| c.0));
    let mut rng = ChaCha8Rng::seed_from_u64(n.to_bits());
    for _ in 0..3 {
        starts.push(std::array::from_fn(|k| rng.random_range(search.lo[k]..=search.hi[k])));
    }
    let results: Vec<([f64; 3], f64)> = starts.par_iter().map(|s| search.descend(*s)).collect();
    // first start wins ties
    let (x, _) = results.iter().fold(results[0], |best, r| if r.1 < best.1 { *r } else { best });
    let params = FosterSearch::params(&x);
    let terms = foster_terms(h, n, &params)?;
    if let Some(name) = terms.divergent() {
        return Err(Error::Divergent(name));
    }
    Ok(FosterBound { value: terms.total(), params, terms })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RateReport {
    pub p: f64,
    pub new_exponent: f64,
    pub old_exponent: f64,
    pub ratio_exponent: f64,
    pub new_parametrization: String,
    pub old_parametrization: String,
}

/// Growth exponents in `n` of the two bounds for `H = C gamma^(-p)`.
pub fn rate_exponents(p: f64) -> Result<RateReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("entropy exponent must be positive, got {p}")));
    }
    let new_exponent = p / (p + 1.0);
    let (old_exponent, ratio_exponent) =
        if p <= 1.0 { (p / (p + 1.0), 0.0) } else { ((2.0 * p - 1.0) / (2.0 * p), (p - 1.0) / (2.0 * p * (p + 1.0))) };
    let old_parametrization = if p <= 1.0 {
        "gamma = delta = n^(-1/(p+1)), alpha = n^(-1/p)"
    } else if p <= 2.0 {
        "gamma = n^(-(2p+1)/(2p(p+2))), delta = n^(-1/(2p)), alpha = n^(-1/p)"
    } else {
        "gamma = 1, delta = n^(-1/(2p)), alpha = n^(-1/p)"
    };
    Ok(RateReport {
        p,
        new_exponent,
        old_exponent,
        ratio_exponent,
        new_parametrization: "gamma = (p c C / (4n))^(1/(p+1))".into(),
        old_parametrization: old_parametrization.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem1,
    Foster,
}

pub fn bound_value(kind: BoundKind, h: &EntropyCurve, n: f64) -> Result<f64> {
    match kind {
        BoundKind::Theorem1 => theorem1_bound(h, n).map(|b| b.value),
        BoundKind::Foster => foster_bound(h, n).map(|b| b.value),
    }
}

/// Checks that `grid` has at least six points in geometric progression.
pub fn check_geometric(grid: &[f64]) -> Result<()> {
    if grid.len() < 6 {
        return Err(Error::Degenerate(format!("need at least 6 values of n, got {}", grid.len())));
    }
    for &n in grid {
        check_n(n)?;
    }
    let r = grid[1] / grid[0];
    if !(r > 1.0) || grid.windows(2).any(|w| ((w[1] / w[0]) / r - 1.0).abs() > 1e-9) {
        return Err(Error::Degenerate("values of n must grow geometrically".into()));
    }
    Ok(())
}

/// Least-squares slope of `log bound` against `log n`.
pub fn fit_rate_exponent(kind: BoundKind, h: &EntropyCurve, grid: &[f64]) -> Result<f64> {
    check_geometric(grid)?;
    let values: Vec<f64> = grid.par_iter().map(|&n| bound_value(kind, h, n)).collect::<Result<_>>()?;
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("bound values must be positive to fit a slope".into()));
    }
    let xs: Vec<f64> = grid.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    least_squares_slope(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub n: f64,
    pub value_new: f64,
    pub value_old: f64,
    pub gamma_new: f64,
    pub gamma_old: f64,
    pub delta_old: f64,
    pub alpha_old: f64,
}

pub fn bound_sweep(h: &EntropyCurve, grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&n| {
            let t = theorem1_bound(h, n)?;
            let f = foster_bound(h, n)?;
            Ok(SweepRow {
                n,
                value_new: t.value,
                value_old: f.value,
                gamma_new: t.gamma,
                gamma_old: f.params.gamma,
                delta_old: f.params.delta,
                alpha_old: f.params.alpha,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "value_new", "value_old", "gamma_new", "gamma_old", "delta_old", "alpha_old"])?;
    for r in rows {
        w.write_record([r.n, r.value_new, r.value_old, r.gamma_new, r.gamma_old, r.delta_old, r.alpha_old].map(fmt12))?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

fn check_n(n: f64) -> Result<()> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("number of rounds must be at least 1, got {n}")));
    }
    Ok(())
}
