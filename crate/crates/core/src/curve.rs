//! Entropy curves `gamma -> H(gamma)` and their integrals.

use crate::error::{Error, Result};
use statrs::function::gamma::{gamma, gamma_ur};
use std::str::FromStr;

/// Largest `A/B` for which the incomplete-gamma form of a log-linear segment is used.
const LOGLIN_DIRECT_MAX: f64 = 600.0;
const SIMPSON_PANELS: usize = 400;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropyCurve {
    /// `c * gamma^(-p)`
    Power { c: f64, p: f64 },
    /// `d * log(1/gamma)` for `gamma < 1`, zero above.
    Log { d: f64 },
    /// Pairs `(gamma_i, H_i)`, `gamma` increasing and `H` nonincreasing.
    /// Interpolated log-log between positive values and linearly in `log gamma` otherwise;
    /// held constant above the last point and extended with the first segment's law below the first.
    Tabulated { gammas: Vec<f64>, values: Vec<f64> },
}

// one piece of the interpolant on [x0, x1]
#[derive(Debug, Clone, Copy)]
enum Piece {
    // h0 * (x / x0)^(-s)
    Power { x0: f64, h0: f64, s: f64 },
    // a + b * ln(1/x)
    LogLin { a: f64, b: f64 },
}

impl Piece {
    fn value(self, x: f64) -> f64 {
        match self {
            Piece::Power { x0, h0, s } => h0 * (x / x0).powf(-s),
            Piece::LogLin { a, b } => (a + b * (1.0 / x).ln()).max(0.0),
        }
    }

    fn integral(self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            Piece::Power { x0, h0, s } => power_integral(h0 * x0.powf(s), s, lo, hi),
            Piece::LogLin { a, b } => a * (hi - lo) + b * (xlog(hi) - xlog(lo)),
        }
    }

    fn sqrt_integral(self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            Piece::Power { x0, h0, s } => power_integral((h0 * x0.powf(s)).sqrt(), s / 2.0, lo, hi),
            Piece::LogLin { a, b } => sqrt_loglin(a, b, lo, hi),
        }
    }
}

// x ln(1/x) + x, an antiderivative of ln(1/x)
fn xlog(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 / x).ln() + x
    }
}

/// `int_lo^hi c x^(-s) dx`; `+inf` when it diverges at `lo = 0`.
fn power_integral(c: f64, s: f64, lo: f64, hi: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if (s - 1.0).abs() < 1e-12 {
        return if lo == 0.0 { f64::INFINITY } else { c * (hi / lo).ln() };
    }
    if lo == 0.0 && s > 1.0 {
        return f64::INFINITY;
    }
    let e = 1.0 - s;
    c * (hi.powf(e) - lo.powf(e)) / e
}

/// `int_lo^hi sqrt(max(0, a + b ln(1/x))) dx` for `b >= 0`.
fn sqrt_loglin(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    if b == 0.0 {
        return a.max(0.0).sqrt() * (hi - lo);
    }
    // write a + b ln(1/x) = b (u - uz) with u = ln(1/x); the integrand vanishes for u < uz
    let uz = -a / b;
    let xz = (-uz).exp();
    let hi = hi.min(xz);
    if hi <= lo {
        return 0.0;
    }
    if uz > -LOGLIN_DIRECT_MAX {
        let g = gamma(1.5);
        let w_hi = (1.0 / hi).ln() - uz;
        let w_lo = if lo == 0.0 { f64::INFINITY } else { (1.0 / lo).ln() - uz };
        let q = |w: f64| {
            if w.is_infinite() {
                0.0
            } else if w <= 0.0 {
                1.0
            } else {
                gamma_ur(1.5, w)
            }
        };
        return b.sqrt() * xz * g * (q(w_hi) - q(w_lo));
    }
    // xz would overflow: integrate in u by Simpson
    let lo = lo.max(hi * 1e-300);
    let (u0, u1) = (lo.ln(), hi.ln());
    let f = |u: f64| (a - b * u).max(0.0).sqrt() * u.exp();
    let m = SIMPSON_PANELS;
    let h = (u1 - u0) / m as f64;
    let mut acc = f(u0) + f(u1);
    for i in 1..m {
        acc += f(u0 + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

impl EntropyCurve {
    pub fn power(c: f64, p: f64) -> Result<Self> {
        let e = EntropyCurve::Power { c, p };
        e.validate()?;
        Ok(e)
    }

    pub fn log(d: f64) -> Result<Self> {
        let e = EntropyCurve::Log { d };
        e.validate()?;
        Ok(e)
    }

    pub fn zero() -> Self {
        EntropyCurve::Power { c: 0.0, p: 1.0 }
    }

    pub fn tabulated(gammas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let e = EntropyCurve::Tabulated { gammas, values };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            EntropyCurve::Power { c, p } => {
                if !(c.is_finite() && *c >= 0.0) || !(p.is_finite() && *p > 0.0) {
                    return bad(format!("power curve needs C >= 0 and p > 0, got C={c}, p={p}"));
                }
            }
            EntropyCurve::Log { d } => {
                if !(d.is_finite() && *d >= 0.0) {
                    return bad(format!("log curve needs d >= 0, got {d}"));
                }
            }
            EntropyCurve::Tabulated { gammas, values } => {
                if gammas.is_empty() {
                    return bad("tabulated curve is empty".into());
                }
                if gammas.len() != values.len() {
                    return Err(Error::DimensionMismatch { expected: gammas.len(), got: values.len() });
                }
                if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) || gammas.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated scales must be positive and strictly increasing".into());
                }
                if values.iter().any(|h| !(h.is_finite() && *h >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
                    return bad("tabulated entropies must be nonnegative and nonincreasing".into());
                }
            }
        }
        Ok(())
    }

    /// True when the curve vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            EntropyCurve::Power { c, .. } => *c == 0.0,
            EntropyCurve::Log { d } => *d == 0.0,
            EntropyCurve::Tabulated { values, .. } => values.iter().all(|&h| h == 0.0),
        }
    }

    // pieces covering (0, inf) in increasing order of their right endpoints
    fn pieces(&self) -> Vec<(f64, f64, Piece)> {
        match self {
            EntropyCurve::Power { c, p } => vec![(0.0, f64::INFINITY, Piece::Power { x0: 1.0, h0: *c, s: *p })],
            EntropyCurve::Log { d } => vec![
                (0.0, 1.0, Piece::LogLin { a: 0.0, b: *d }),
                (1.0, f64::INFINITY, Piece::LogLin { a: 0.0, b: 0.0 }),
            ],
            EntropyCurve::Tabulated { gammas, values } => {
                let k = gammas.len();
                let seg = |i: usize| -> Piece {
                    let (x0, x1, h0, h1) = (gammas[i], gammas[i + 1], values[i], values[i + 1]);
                    if h0 > 0.0 && h1 > 0.0 {
                        Piece::Power { x0, h0, s: -(h1 / h0).ln() / (x1 / x0).ln() }
                    } else {
                        let b = (h0 - h1) / (x1 / x0).ln();
                        Piece::LogLin { a: h0 - b * (1.0 / x0).ln(), b }
                    }
                };
                let mut out = Vec::with_capacity(k + 1);
                let first = if k == 1 { Piece::LogLin { a: values[0], b: 0.0 } } else { seg(0) };
                out.push((0.0, gammas[0], first));
                for i in 0..k.saturating_sub(1) {
                    out.push((gammas[i], gammas[i + 1], seg(i)));
                }
                out.push((gammas[k - 1], f64::INFINITY, Piece::LogLin { a: values[k - 1], b: 0.0 }));
                out
            }
        }
    }

    pub fn value(&self, gamma: f64) -> f64 {
        if !(gamma > 0.0) {
            return f64::INFINITY;
        }
        match self {
            EntropyCurve::Power { c, p } => c * gamma.powf(-p),
            EntropyCurve::Log { d } => (d * (1.0 / gamma).ln()).max(0.0),
            EntropyCurve::Tabulated { .. } => {
                let pieces = self.pieces();
                let (_, _, piece) = pieces.iter().find(|(_, hi, _)| gamma <= *hi).expect("pieces cover the line");
                piece.value(gamma)
            }
        }
    }

    fn integrate(&self, lo: f64, hi: f64, sqrt: bool) -> Result<f64> {
        if !(lo >= 0.0 && hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("integration range [{lo}, {hi}]")));
        }
        Ok(self
            .pieces()
            .into_iter()
            .map(|(a, b, piece)| {
                let (l, h) = (lo.max(a), hi.min(b));
                if sqrt {
                    piece.sqrt_integral(l, h)
                } else {
                    piece.integral(l, h)
                }
            })
            .sum())
    }

    /// `int_lo^hi H`; `+inf` when divergent at zero.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        self.integrate(lo, hi, false)
    }

    /// `int_lo^hi sqrt(H)`; `+inf` when divergent at zero.
    pub fn sqrt_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        self.integrate(lo, hi, true)
    }

    /// Compact text form, the inverse of [`FromStr`].
    pub fn describe(&self) -> String {
        match self {
            EntropyCurve::Power { c, p } => format!("pow:p={p},C={c}"),
            EntropyCurve::Log { d } => format!("log:d={d}"),
            EntropyCurve::Tabulated { gammas, .. } => format!("tabulated:{} points", gammas.len()),
        }
    }
}

impl FromStr for EntropyCurve {
    type Err = Error;

    /// Parses `pow:p=2,C=1`, `log:d=1` or `zero`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(EntropyCurve::zero());
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("entropy curve `{s}`: expected kind:params")))?;
        let mut params = std::collections::HashMap::new();
        for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("entropy parameter `{kv}`: expected key=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("entropy parameter `{kv}`")))?;
            params.insert(k.trim().to_ascii_lowercase(), v);
        }
        let mut take = |k: &str, default: Option<f64>| {
            params
                .remove(k)
                .or(default)
                .ok_or_else(|| Error::InvalidArgument(format!("entropy curve `{s}` is missing `{k}`")))
        };
        let curve = match kind.trim() {
            "pow" | "power" => {
                let p = take("p", None)?;
                let c = take("c", Some(1.0))?;
                EntropyCurve::power(c, p)?
            }
            "log" => EntropyCurve::log(take("d", Some(1.0))?)?,
            other => return Err(Error::InvalidArgument(format!("unknown entropy kind `{other}`"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::InvalidArgument(format!("unknown entropy parameter `{k}`")));
        }
        Ok(curve)
    }
}
