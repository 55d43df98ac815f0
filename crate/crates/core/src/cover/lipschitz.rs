use super::path_cover_number;
use crate::class::ExpertClass;
use crate::curve::EntropyCurve;
use crate::error::{Error, Result};
use crate::optim::log_log_slope;
use std::io::Write;

/// Most functions a grid class may hold.
pub const MAX_GRID_FUNCTIONS: usize = 1_000_000;

/// 1-Lipschitz (sup norm) functions on a regular grid over `[0, 1]^p`, with values
/// on a lattice of step `spacing / resolution` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzGrid {
    pub dim: usize,
    pub spacing: f64,
    pub resolution: usize,
    /// Grid points in raster order, one coordinate vector each.
    pub points: Vec<Vec<f64>>,
    /// Function values at `points`, one row per function.
    pub functions: Vec<Vec<f64>>,
}

impl LipschitzGrid {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// The grid as an expert class whose contexts are the grid points.
    pub fn class(&self) -> Result<ExpertClass<f64>> {
        let names =
            self.points.iter().map(|x| x.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")).collect();
        ExpertClass::new(names, self.functions.clone())
    }
}

/// Enumerates the grid class with spacing `4 gamma_min`.
pub fn lipschitz_grid(dim: usize, gamma_min: f64, resolution: usize) -> Result<LipschitzGrid> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(gamma_min > 0.0 && gamma_min.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma_min must be positive, got {gamma_min}")));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument(
            "resolution too coarse: need at least one value level per grid step".into(),
        ));
    }
    let spacing = 4.0 * gamma_min;
    let per_axis = (1.0 / spacing + 1e-9).floor() as usize + 1;
    let cells = per_axis.checked_pow(dim as u32).filter(|&c| c <= MAX_GRID_FUNCTIONS).ok_or(Error::TooLarge {
        what: "grid points",
        size: (per_axis as f64).powi(dim as i32),
        limit: MAX_GRID_FUNCTIONS as f64,
    })?;
    let quantum = spacing / resolution as f64;
    let top = (1.0 / quantum + 1e-9).floor() as i64;
    let coords = |mut i: usize| -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let c = i % per_axis;
                i /= per_axis;
                c
            })
            .collect()
    };
    let points: Vec<Vec<f64>> = (0..cells).map(|i| coords(i).iter().map(|&c| c as f64 * spacing).collect()).collect();
    // earlier king neighbours of each cell
    let grid: Vec<Vec<usize>> = (0..cells).map(coords).collect();
    let back: Vec<Vec<usize>> = (0..cells)
        .map(|i| (0..i).filter(|&j| grid[i].iter().zip(&grid[j]).all(|(&a, &b)| a.abs_diff(b) <= 1)).collect())
        .collect();
    let mut functions: Vec<Vec<i64>> = Vec::new();
    let mut cur = vec![0i64; cells];
    let r = resolution as i64;
    fn dfs(i: usize, cur: &mut Vec<i64>, back: &[Vec<usize>], top: i64, r: i64, out: &mut Vec<Vec<i64>>) -> Result<()> {
        if i == cur.len() {
            if out.len() >= MAX_GRID_FUNCTIONS {
                return Err(Error::TooLarge {
                    what: "grid functions",
                    size: (MAX_GRID_FUNCTIONS + 1) as f64,
                    limit: MAX_GRID_FUNCTIONS as f64,
                });
            }
            out.push(cur.clone());
            return Ok(());
        }
        let (mut lo, mut hi) = (0, top);
        for &j in &back[i] {
            lo = lo.max(cur[j] - r);
            hi = hi.min(cur[j] + r);
        }
        for v in lo..=hi {
            cur[i] = v;
            dfs(i + 1, cur, back, top, r, out)?;
        }
        Ok(())
    }
    dfs(0, &mut cur, &back, top, r, &mut functions)?;
    let functions = functions.into_iter().map(|f| f.into_iter().map(|k| k as f64 * quantum).collect()).collect();
    Ok(LipschitzGrid { dim, spacing, resolution, points, functions })
}

/// Greedy cover of value vectors by `gamma`-balls centred at `f`, `f + gamma` or `f - gamma`
/// for class members `f`. Returns the number of centres used.
pub fn greedy_shift_cover(vectors: &[Vec<f64>], gamma: f64) -> usize {
    let tol = super::COVER_TOL;
    let m = vectors.len();
    let mut centres: Vec<Vec<f64>> = Vec::with_capacity(3 * m);
    for f in vectors {
        for s in [-gamma, 0.0, gamma] {
            centres.push(f.iter().map(|v| v + s).collect());
        }
    }
    let covers = |c: &[f64], f: &[f64]| c.iter().zip(f).all(|(a, b)| (a - b).abs() <= gamma + tol);
    let mut uncovered = vec![true; m];
    let mut left = m;
    let mut used = 0;
    while left > 0 {
        let mut best = (0usize, 0usize);
        for (ci, c) in centres.iter().enumerate() {
            let gain = (0..m).filter(|&i| uncovered[i] && covers(c, &vectors[i])).count();
            if gain > best.1 {
                best = (ci, gain);
            }
        }
        for i in 0..m {
            if uncovered[i] && covers(&centres[best.0], &vectors[i]) {
                uncovered[i] = false;
                left -= 1;
            }
        }
        used += 1;
    }
    used
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyRow {
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EntropyEstimate {
    pub rows: Vec<EntropyRow>,
    /// Tabulated from the lower bounds.
    pub curve: EntropyCurve,
    /// Least-squares slope of `log H` against `log(1/gamma)` over rows with `H > 0`;
    /// zero when fewer than two rows are positive.
    pub slope: f64,
    pub functions: usize,
    pub grid_points: usize,
}

/// Lower and upper entropy bounds for a class seen along contexts `x_t = t mod |X|`, t < n.
/// The context tree ignores outcomes, so every path sees the same value vectors.
pub fn entropy_table(vectors_by_point: &[Vec<f64>], gammas: &[f64]) -> Vec<EntropyRow> {
    use rayon::prelude::*;
    gammas
        .par_iter()
        .map(|&gamma| {
            let (k, _) = path_cover_number(vectors_by_point, gamma);
            let upper = greedy_shift_cover(vectors_by_point, gamma);
            EntropyRow { gamma, lower: (k as f64).ln(), upper: (upper as f64).ln() }
        })
        .collect()
}

/// Most value vectors handed to the greedy upper bound.
pub const MAX_GREEDY_VECTORS: usize = 50_000;

fn estimate(vectors: &[Vec<f64>], gammas: &[f64], grid_points: usize) -> Result<EntropyEstimate> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument("no scales given".into()));
    }
    if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    if vectors.len() > MAX_GREEDY_VECTORS {
        return Err(Error::TooLarge {
            what: "functions for greedy cover",
            size: vectors.len() as f64,
            limit: MAX_GREEDY_VECTORS as f64,
        });
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scales"));
    sorted.dedup();
    let rows = entropy_table(vectors, &sorted);
    let curve = entropy_curve_from_rows(&rows)?;
    let positive: Vec<&EntropyRow> = rows.iter().filter(|r| r.lower > 0.0).collect();
    let slope = if positive.len() < 2 {
        0.0
    } else {
        let xs: Vec<f64> = positive.iter().map(|r| 1.0 / r.gamma).collect();
        let ys: Vec<f64> = positive.iter().map(|r| r.lower).collect();
        log_log_slope(&xs, &ys)?
    };
    Ok(EntropyEstimate { rows, curve, slope, functions: vectors.len(), grid_points })
}

/// Entropy curve of the 1-Lipschitz grid class of dimension `dim` over `n` rounds.
pub fn entropy_curve_estimate(dim: usize, resolution: usize, gammas: &[f64], n: usize) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    let gamma_min = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    if !gamma_min.is_finite() {
        return Err(Error::InvalidArgument("no scales given".into()));
    }
    let grid = lipschitz_grid(dim, gamma_min, resolution)?;
    let seen = grid.points.len().min(n);
    let vectors: Vec<Vec<f64>> = grid.functions.iter().map(|f| f[..seen].to_vec()).collect();
    estimate(&vectors, gammas, grid.points.len())
}

/// Same estimate for an arbitrary class, contexts visited in order `x_t = t mod |X|`.
pub fn entropy_curve_for_class(class: &ExpertClass<f64>, gammas: &[f64], n: usize) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    let seen = class.num_contexts().min(n);
    let vectors: Vec<Vec<f64>> = class.experts().iter().map(|f| f[..seen].to_vec()).collect();
    estimate(&vectors, gammas, class.num_contexts())
}

fn entropy_curve_from_rows(rows: &[EntropyRow]) -> Result<EntropyCurve> {
    // packing bounds need not be monotone in gamma; take the running max from the right
    let mut values: Vec<f64> = rows.iter().map(|r| r.lower).collect();
    for i in (0..values.len().saturating_sub(1)).rev() {
        values[i] = values[i].max(values[i + 1]);
    }
    EntropyCurve::tabulated(rows.iter().map(|r| r.gamma).collect(), values)
}

/// Writes rows as CSV with columns `gamma,lower,upper`.
pub fn write_entropy_csv<W: Write>(rows: &[EntropyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "lower", "upper"])?;
    for r in rows {
        w.write_record([crate::num::fmt12(r.gamma), crate::num::fmt12(r.lower), crate::num::fmt12(r.upper)])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_grid_counts() {
        // 5 points, 5 levels, steps of at most one level
        let g = lipschitz_grid(1, 1.0 / 16.0, 1).unwrap();
        assert_eq!(g.points.len(), 5);
        let mut count = [1usize; 5];
        for _ in 1..5 {
            count = std::array::from_fn(|v| (v.saturating_sub(1)..=(v + 1).min(4)).map(|u| count[u]).sum());
        }
        assert_eq!(g.len(), count.iter().sum::<usize>());
        for f in &g.functions {
            assert!(f.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.25 + 1e-12));
        }
    }

    #[test]
    fn two_dimensional_grid_is_lipschitz() {
        let g = lipschitz_grid(2, 0.125, 1).unwrap();
        assert_eq!(g.points.len(), 9);
        for f in &g.functions {
            for i in 0..9 {
                for j in 0..9 {
                    let d = g.points[i].iter().zip(&g.points[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!((f[i] - f[j]).abs() <= d + 1e-12);
                }
            }
        }
    }

    #[test]
    fn slope_near_one_for_p_one() {
        let est = entropy_curve_estimate(1, 1, &[0.25, 0.125, 0.0625], 64).unwrap();
        assert!((est.slope - 1.0).abs() <= 0.3, "slope {}", est.slope);
        for r in &est.rows {
            assert!(r.lower <= r.upper + 1e-12);
        }
        assert!(est.rows.windows(2).all(|w| w[1].upper <= w[0].upper));
    }

    #[test]
    fn large_scale_is_zero() {
        let est = entropy_curve_estimate(1, 1, &[1.0, 2.0], 8).unwrap();
        assert!(est.rows.iter().all(|r| r.lower == 0.0 && r.upper == 0.0));
        assert_eq!(est.slope, 0.0);
    }

    #[test]
    fn singleton_class_is_zero() {
        let c = ExpertClass::with_contexts(2, vec![vec![0.3, 0.8]]).unwrap();
        let est = entropy_curve_for_class(&c, &[0.01, 0.1, 0.5], 10).unwrap();
        assert!(est.curve.is_zero());
        assert_eq!(est.slope, 0.0);
    }

    #[test]
    fn guards() {
        assert!(lipschitz_grid(1, 0.1, 0).is_err());
        assert!(lipschitz_grid(0, 0.1, 1).is_err());
        assert!(lipschitz_grid(3, 0.001, 1).is_err());
        assert!(entropy_curve_estimate(1, 1, &[], 4).is_err());
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_entropy_csv(&[EntropyRow { gamma: 0.5, lower: 0.0, upper: std::f64::consts::LN_2 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "gamma,lower,upper\n0.5,0,0.69314718056\n");
    }
}
