//! Harmonic-component constants `rho(n,d,k)`, `rho(inf,d,k)`, `gamma_d` and
//! `C_d = d(d+1) gamma_d`.
//!
//! `rho(n,d,k)` is the largest `|p_k|` over degree-`d` univariate
//! combinations `p = sum_i lambda_i K^_i` bounded by 1 on `0..=n`; the limit
//! `n -> inf` replaces `K^_i(t)` by `x^i` on `[-1/(q-1), 1]`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krawtchouk;
use crate::lp::{self, Objective, Sense};

/// Largest `m` for which coefficients are produced as exact integers.
pub const EXACT_CHEBYSHEV_MAX: usize = 30;

/// Monomial coefficients `t_{m,0..=m}` of the Chebyshev polynomial `T_m`,
/// exact for `m <= 30`.
pub fn chebyshev_coeffs_exact(m: usize) -> Option<Vec<i64>> {
    if m > EXACT_CHEBYSHEV_MAX {
        return None;
    }
    let mut prev = vec![1i64];
    if m == 0 {
        return Some(prev);
    }
    let mut cur = vec![0i64, 1];
    for _ in 1..m {
        let mut next = vec![0i64; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Some(cur)
}

pub fn chebyshev_coeffs(m: usize) -> Vec<f64> {
    if let Some(c) = chebyshev_coeffs_exact(m) {
        return c.into_iter().map(|v| v as f64).collect();
    }
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    for _ in 1..m {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn rho_index(d: usize, k: usize) -> usize {
    if (d - k) % 2 == 0 {
        d
    } else {
        d - 1
    }
}

/// `rho(inf, d, k)` for the binary cube: `|t_{d,k}|` or `|t_{d-1,k}|`
/// depending on the parity of `d - k`.
pub fn rho_infinity(d: usize, k: usize) -> Result<f64> {
    if k > d {
        return Err(Error::OutOfRange(format!("k = {} exceeds d = {}", k, d)));
    }
    Ok(chebyshev_coeffs(rho_index(d, k))[k].abs())
}

pub fn gamma_exact(d: usize) -> Option<i64> {
    if d > EXACT_CHEBYSHEV_MAX {
        return None;
    }
    (0..=d).map(|k| chebyshev_coeffs_exact(rho_index(d, k)).map(|c| c[k].abs())).try_fold(0i64, |m, v| v.map(|v| m.max(v)))
}

pub fn gamma(d: usize) -> f64 {
    match gamma_exact(d) {
        Some(g) => g as f64,
        None => (0..=d).map(|k| chebyshev_coeffs(rho_index(d, k))[k].abs()).fold(0.0, f64::max),
    }
}

pub fn c_constant(d: usize) -> f64 {
    (d * (d + 1)) as f64 * gamma(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoSolution {
    pub value: f64,
    /// Feasible coefficients `lambda_0..=lambda_d`.
    pub lambda: Vec<f64>,
}

/// Maximize `lambda_k` subject to `|sum_i lambda_i basis[j][i]| <= 1` for
/// every row `j` (one row per sample point).
fn rho_lp(basis: &[Vec<f64>], d: usize, k: usize) -> Result<RhoSolution> {
    let nv = 2 * (d + 1);
    let mut c = vec![0.0; nv];
    c[k] = 1.0;
    c[d + 1 + k] = -1.0;
    let mut a = Vec::with_capacity(2 * basis.len());
    for row in basis {
        let mut plus = vec![0.0; nv];
        for i in 0..=d {
            plus[i] = row[i];
            plus[d + 1 + i] = -row[i];
        }
        let minus = plus.iter().map(|v| -v).collect();
        a.push(plus);
        a.push(minus);
    }
    let m = a.len();
    let sol = lp::solve_lp(&c, &a, &vec![Sense::Le; m], &vec![1.0; m], Objective::Maximize)?;
    let lambda = (0..=d).map(|i| sol.x[i] - sol.x[d + 1 + i]).collect();
    Ok(RhoSolution { value: sol.objective, lambda })
}

/// `rho(n, d, k)` for the `q`-ary Krawtchouk basis by simplex.
pub fn rho_finite(n: usize, d: usize, k: usize, q: usize) -> Result<RhoSolution> {
    if k > d || d > n {
        return Err(Error::OutOfRange(format!("need k <= d <= n, got k = {}, d = {}, n = {}", k, d, n)));
    }
    if q < 2 {
        return Err(Error::OutOfRange(format!("q = {} must be at least 2", q)));
    }
    let table = krawtchouk::kraw_table(n, q, d);
    let basis: Vec<Vec<f64>> = (0..=n).map(|t| (0..=d).map(|i| table[i][t]).collect()).collect();
    rho_lp(&basis, d, k)
}

fn monomials(x: f64, d: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(d + 1);
    let mut p = 1.0;
    for _ in 0..=d {
        v.push(p);
        p *= x;
    }
    v
}

fn horner(lambda: &[f64], x: f64) -> f64 {
    lambda.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Grid LP over `grid` points `t_j = j/(grid-1)` of `[0,1]` mapped to
/// `x = 1 - q t/(q-1)`. Solved by constraint generation, so the answer equals
/// the LP with all grid constraints present.
pub fn rho_infinity_grid(d: usize, k: usize, q: usize, grid: usize) -> Result<RhoSolution> {
    if k > d || q < 2 || grid < 2 {
        return Err(Error::OutOfRange(format!("bad grid LP parameters d = {}, k = {}, q = {}, grid = {}", d, k, q, grid)));
    }
    let qf = q as f64;
    let xs: Vec<f64> = (0..grid).map(|j| 1.0 - qf / (qf - 1.0) * j as f64 / (grid - 1) as f64).collect();
    let mut active: Vec<usize> = (0..=4 * (d + 1)).map(|j| j * (grid - 1) / (4 * (d + 1))).collect();
    active.dedup();
    for _ in 0..500 {
        let basis: Vec<Vec<f64>> = active.iter().map(|&j| monomials(xs[j], d)).collect();
        let sol = rho_lp(&basis, d, k)?;
        let viol: Vec<usize> = local_maxima(&xs, &sol.lambda)
            .into_iter()
            .filter(|&j| horner(&sol.lambda, xs[j]).abs() > 1.0 + 1e-10 && active.binary_search(&j).is_err())
            .collect();
        if viol.is_empty() {
            return Ok(sol);
        }
        active.extend(viol);
        active.sort_unstable();
        active.dedup();
    }
    Err(Error::Lp("grid constraint generation did not converge".into()))
}

/// Indices of local maxima of `|p|` on the sample points (endpoints included).
fn local_maxima(xs: &[f64], lambda: &[f64]) -> Vec<usize> {
    let v: Vec<f64> = xs.iter().map(|&x| horner(lambda, x).abs()).collect();
    (0..v.len())
        .filter(|&j| (j == 0 || v[j] >= v[j - 1]) && (j + 1 == v.len() || v[j] >= v[j + 1]))
        .collect()
}

/// Two-sided enclosure of the semi-infinite optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoEnclosure {
    pub lower: f64,
    pub upper: f64,
    pub lambda: Vec<f64>,
}

/// `rho(inf, d, k)` for `q`-ary limit polynomials `x^i` on `[-1/(q-1), 1]`
/// by an exchange method. `upper` is an LP relaxation value; `lower` is the
/// same polynomial rescaled to be feasible on the whole interval. For `q = 2`
/// both equal the Chebyshev closed form.
pub fn rho_infinity_q(d: usize, k: usize, q: usize) -> Result<RhoEnclosure> {
    if q < 2 {
        return Err(Error::OutOfRange(format!("q = {} must be at least 2", q)));
    }
    if q == 2 {
        let v = rho_infinity(d, k)?;
        return Ok(RhoEnclosure { lower: v, upper: v, lambda: Vec::new() });
    }
    if k > d {
        return Err(Error::OutOfRange(format!("k = {} exceeds d = {}", k, d)));
    }
    let a = -1.0 / (q as f64 - 1.0);
    let scan: Vec<f64> = (0..=4000).map(|j| a + (1.0 - a) * j as f64 / 4000.0).collect();
    let mut points: Vec<f64> = (0..=8 * (d + 1)).map(|j| a + (1.0 - a) * j as f64 / (8 * (d + 1)) as f64).collect();
    for _ in 0..200 {
        let basis: Vec<Vec<f64>> = points.iter().map(|&x| monomials(x, d)).collect();
        let sol = rho_lp(&basis, d, k)?;
        let h = scan[1] - scan[0];
        let maxima: Vec<(f64, f64)> = local_maxima(&scan, &sol.lambda)
            .into_iter()
            .map(|j| refine_max(&sol.lambda, (scan[j] - h).max(a), (scan[j] + h).min(1.0)))
            .collect();
        let m = maxima.iter().fold(0.0_f64, |m, &(_, v)| m.max(v));
        let fresh: Vec<f64> = maxima
            .into_iter()
            .filter(|&(x, v)| v > 1.0 + 1e-13 && points.iter().all(|&p| (p - x).abs() > 1e-12))
            .map(|(x, _)| x)
            .collect();
        // LP round-off can leave violations of ~1e-12 at points already present
        if m - 1.0 <= 1e-13 || fresh.is_empty() {
            return Ok(RhoEnclosure { lower: sol.value / m.max(1.0), upper: sol.value, lambda: sol.lambda });
        }
        points.extend(fresh);
    }
    Err(Error::Lp("exchange method did not converge".into()))
}

/// Golden-section search for the maximum of `|p|` on `[lo, hi]`.
fn refine_max(lambda: &[f64], mut lo: f64, mut hi: f64) -> (f64, f64) {
    let f = |x: f64| horner(lambda, x).abs();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (a0, b0) = (lo, hi);
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let mid = 0.5 * (lo + hi);
    [(a0, f(a0)), (b0, f(b0)), (mid, f(mid))].into_iter().fold((mid, f(mid)), |best, c| if c.1 > best.1 { c } else { best })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaTable {
    pub d: usize,
    pub q: usize,
    pub rho_finite: BTreeMap<(usize, usize), f64>,
    /// Upper values of `rho(inf, d, k)` (exact for `q = 2`).
    pub rho_infinity: Vec<f64>,
    pub gamma_d: f64,
    #[serde(rename = "C_d")]
    pub c_d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaRow {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub rho_finite: f64,
    pub rho_infinity: f64,
    pub gamma_d: f64,
    #[serde(rename = "C_d")]
    pub c_d: f64,
}

impl GammaTable {
    /// Builds `rho(n, d, k)` for `n = max(d,1)..=n_max` and all `k <= d`.
    pub fn build(d: usize, n_max: usize, q: usize) -> Result<Self> {
        let rho_infinity = (0..=d).map(|k| rho_infinity_q(d, k, q).map(|e| e.upper)).collect::<Result<Vec<_>>>()?;
        let gamma_d = rho_infinity.iter().copied().fold(0.0, f64::max);
        let cells: Vec<(usize, usize)> = (d.max(1)..=n_max).flat_map(|n| (0..=d).map(move |k| (n, k))).collect();
        let rho_finite = cells
            .par_iter()
            .map(|&(n, k)| rho_finite(n, d, k, q).map(|s| ((n, k), s.value)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(GammaTable { d, q, rho_finite, rho_infinity, gamma_d, c_d: (d * (d + 1)) as f64 * gamma_d })
    }

    pub fn rows(&self) -> Vec<GammaRow> {
        self.rho_finite
            .iter()
            .map(|(&(n, k), &v)| GammaRow {
                d: self.d,
                k,
                n,
                rho_finite: v,
                rho_infinity: self.rho_infinity[k],
                gamma_d: self.gamma_d,
                c_d: self.c_d,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev() {
        assert_eq!(chebyshev_coeffs_exact(0).unwrap(), vec![1]);
        assert_eq!(chebyshev_coeffs_exact(2).unwrap(), vec![-1, 0, 2]);
        let s: i64 = chebyshev_coeffs_exact(10).unwrap().iter().map(|c| c.abs()).sum();
        let r2 = 2f64.sqrt();
        assert_eq!(s, (((1.0 + r2).powi(10) + (1.0 - r2).powi(10)) / 2.0).round() as i64);
        assert!(chebyshev_coeffs_exact(31).is_none());
        assert_eq!(chebyshev_coeffs(31).len(), 32);
    }

    #[test]
    fn table_one() {
        let g: Vec<i64> = (1..=10).map(|d| gamma_exact(d).unwrap()).collect();
        assert_eq!(g, vec![1, 2, 4, 8, 20, 48, 112, 256, 576, 1280]);
        assert_eq!(rho_infinity(1, 1).unwrap(), 1.0);
        assert_eq!(c_constant(2), 12.0);
    }

    #[test]
    fn rho_small() {
        for n in 1..8 {
            assert!((rho_finite(n, 1, 1, 2).unwrap().value - 1.0).abs() < 1e-12);
        }
        let s = rho_finite(20, 2, 2, 2).unwrap();
        assert!(s.value <= 2.0 + 1e-9 && s.value > 1.5);
    }

    #[test]
    fn grid_matches_closed_form() {
        for d in 1..=5 {
            for k in 0..=d {
                let g = rho_infinity_grid(d, k, 2, 10_000).unwrap().value;
                assert!((g - rho_infinity(d, k).unwrap()).abs() < 1e-3, "d={d} k={k} grid={g}");
            }
        }
    }

    #[test]
    fn qary_enclosure_tight() {
        let e = rho_infinity_q(2, 1, 3).unwrap();
        assert!(e.upper - e.lower < 1e-10);
        assert!(rho_finite(20, 2, 1, 3).unwrap().value <= e.upper + 1e-9);
    }
}
