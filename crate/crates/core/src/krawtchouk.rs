//! Binary and q-ary Krawtchouk polynomials.
//!
//! Everything is evaluated in the normalization `K_hat_k(t) = K_k(t) / K_k(0)`,
//! which stays bounded for integer `t` where the raw polynomials overflow.

use crate::error::{Error, Result};

/// `ln C(n, k)`; `-inf` outside `0 <= k <= n`.
pub fn ln_binom(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum()
}

pub fn binom(n: usize, k: usize) -> f64 {
    match binom_exact(n, k) {
        Some(v) => v as f64,
        None => ln_binom(n, k).exp(),
    }
}

/// The measure `w(t) / q^n` with `w(t) = (q-1)^t C(n,t)` on `{0,...,n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub n: usize,
    pub q: usize,
    weights: Vec<f64>,
    ln_weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::OutOfRange(format!("alphabet size q = {} < 2", q)));
        }
        let lq = (q as f64).ln();
        let lq1 = ((q - 1) as f64).ln();
        let ln_weights: Vec<f64> = (0..=n)
            .map(|t| ln_binom(n, t) + t as f64 * lq1 - n as f64 * lq)
            .collect();
        let weights = ln_weights.iter().map(|l| l.exp()).collect();
        Ok(DiscreteMeasure { n, q, weights, ln_weights })
    }

    pub fn binary(n: usize) -> Self {
        Self::new(n, 2).expect("q = 2 is valid")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, t: usize) -> f64 {
        self.weights[t]
    }

    pub fn ln_weight(&self, t: usize) -> f64 {
        self.ln_weights[t]
    }

    /// `sum_t w(t) g(t)` for `g` given on the support.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        Err(Error::OutOfRange(format!("alphabet size q = {} < 2", q)))
    } else {
        Ok(())
    }
}

/// `K_hat_0(t), ..., K_hat_kmax(t)` at a real point `t` by the normalized
/// three-term recurrence.
pub fn kraw_row(n: usize, q: usize, kmax: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    let q1 = (q - 1) as f64;
    let nf = n as f64;
    out.push(1.0 - q as f64 * t / (q1 * nf));
    for k in 1..kmax {
        let kf = k as f64;
        let den = q1 * (nf - kf);
        let a = ((nf - kf) * q1 + kf - q as f64 * t) / den;
        let b = kf / den;
        let next = a * out[k] - b * out[k - 1];
        out.push(next);
    }
    out
}

/// Normalized Krawtchouk value `K_hat^n_k(t)` (alphabet size `q`).
pub fn kraw_eval(n: usize, q: usize, k: usize, t: usize) -> Result<f64> {
    check_q(q)?;
    if k > n || t > n {
        return Err(Error::OutOfRange(format!("need k, t <= n = {} (k = {}, t = {})", n, k, t)));
    }
    Ok(kraw_row(n, q, k, t as f64)[k])
}

/// Table `K_hat_k(t)` for `k = 0..=kmax`, `t = 0..=n`, indexed `[k][t]`.
///
/// Entries come from exact integer sums when they fit in `i128`; the forward
/// recurrence loses relative accuracy where `K_hat_k(t)` is tiny (large `k`
/// and `t`, `q > 2`).
pub fn kraw_table(n: usize, q: usize, kmax: usize) -> Vec<Vec<f64>> {
    if let Some(table) = kraw_table_exact(n, q, kmax) {
        return table;
    }
    let mut table = vec![vec![0.0; n + 1]; kmax + 1];
    for t in 0..=n {
        for (k, v) in kraw_row(n, q, kmax, t as f64).into_iter().enumerate() {
            table[k][t] = v;
        }
    }
    table
}

fn kraw_table_exact(n: usize, q: usize, kmax: usize) -> Option<Vec<Vec<f64>>> {
    let kmax = kmax.min(n);
    let mut pascal: Vec<Vec<i128>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut row = vec![1i128; m + 1];
        for j in 1..m {
            row[j] = pascal[m - 1][j - 1].checked_add(pascal[m - 1][j])?;
        }
        pascal.push(row);
    }
    let q1 = q as i128 - 1;
    let mut pow = vec![1i128; kmax + 1];
    for j in 1..=kmax {
        pow[j] = pow[j - 1].checked_mul(q1)?;
    }
    let mut table = vec![vec![0.0; n + 1]; kmax + 1];
    for (k, row) in table.iter_mut().enumerate() {
        let norm = pow[k].checked_mul(pascal[n][k])? as f64;
        for (t, cell) in row.iter_mut().enumerate() {
            let mut sum: i128 = 0;
            for j in k.saturating_sub(n - t)..=k.min(t) {
                let term = pascal[t][j].checked_mul(pascal[n - t][k - j])?.checked_mul(pow[k - j])?;
                sum = if j % 2 == 0 { sum.checked_add(term)? } else { sum.checked_sub(term)? };
            }
            *cell = sum as f64 / norm;
        }
    }
    Some(table)
}

/// Unnormalized `K^n_k(t) = sum_j (-1)^j (q-1)^(k-j) C(t,j) C(n-t,k-j)` in
/// exact integer arithmetic; `None` on overflow.
pub fn kraw_exact(n: usize, q: usize, k: usize, t: usize) -> Option<i128> {
    if k > n || t > n {
        return None;
    }
    let mut sum: i128 = 0;
    for j in 0..=k.min(t) {
        if k - j > n - t {
            continue;
        }
        let term = binom_exact(t, j)?
            .checked_mul(binom_exact(n - t, k - j)?)?
            .checked_mul((q as i128 - 1).checked_pow((k - j) as u32)?)?;
        sum = if j % 2 == 0 { sum.checked_add(term)? } else { sum.checked_sub(term)? };
    }
    Some(sum)
}

pub fn binom_exact(n: usize, k: usize) -> Option<i128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 1..=k {
        acc = acc.checked_mul((n - k + j) as i128)? / j as i128;
    }
    Some(acc)
}

/// `||K_k||^2_omega = (q-1)^k C(n,k)`, as a logarithm.
pub fn ln_norm_sq(n: usize, q: usize, k: usize) -> f64 {
    k as f64 * ((q - 1) as f64).ln() + ln_binom(n, k)
}

/// Symmetric tridiagonal matrix: `diag[0..m]`, `off[i]` couples `i` and `i+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl JacobiMatrix {
    /// Multiplication by `t` in the omega-orthonormal basis `p_0..p_{order-1}`.
    pub fn krawtchouk(n: usize, q: usize, order: usize) -> Self {
        let qf = q as f64;
        let q1 = (q - 1) as f64;
        let diag = (0..order)
            .map(|k| (((n - k) as f64) * q1 + k as f64) / qf)
            .collect();
        let off = (1..order)
            .map(|k| ((k as f64) * q1 * ((n + 1 - k) as f64)).sqrt() / qf)
            .collect();
        JacobiMatrix { diag, off }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (1.0 + x.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < m { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `j`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        assert!(j < self.order());
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalue(0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.order()).map(|j| self.eigenvalue(j)).collect()
    }
}

/// Least root of `K_hat_r` by a scan for the first sign change at integers
/// followed by bisection on the continuous polynomial. Consecutive roots are
/// more than one apart, so the first bracket holds exactly the least root.
pub fn least_root_by_bisection(n: usize, q: usize, r: usize) -> Result<f64> {
    check_q(q)?;
    if r == 0 || r > n {
        return Err(Error::OutOfRange(format!("need 1 <= r <= n, got r = {}, n = {}", r, n)));
    }
    let f = |t: f64| kraw_row(n, q, r, t)[r];
    let mut prev: f64 = 1.0;
    for t in 1..=n {
        let v = f(t as f64);
        if v == 0.0 {
            return Ok(t as f64);
        }
        if v.signum() != prev.signum() {
            let (mut lo, mut hi) = ((t - 1) as f64, t as f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fm.signum() == prev.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = v;
    }
    Err(Error::OutOfRange(format!("no sign change of K_hat_{} on [0, {}]", r, n)))
}

/// `xi^n_{r,q}`: smallest eigenvalue of the order-`r` Jacobi matrix,
/// cross-checked against [`least_root_by_bisection`].
pub fn least_root(n: usize, q: usize, r: usize) -> Result<f64> {
    check_q(q)?;
    if r == 0 || r > n {
        return Err(Error::OutOfRange(format!("need 1 <= r <= n, got r = {}, n = {}", r, n)));
    }
    let jacobi = JacobiMatrix::krawtchouk(n, q, r).smallest_eigenvalue();
    let bisection = least_root_by_bisection(n, q, r)?;
    if (jacobi - bisection).abs() > 1e-8 * (1.0 + jacobi.abs()) {
        return Err(Error::RootMismatch { jacobi, bisection });
    }
    Ok(jacobi)
}

/// `phi_q(t) = (q-1)/q - ((q-2) t / q + (2/q) sqrt((q-1) t (1-t)))`.
pub fn levenshtein_phi(t: f64, q: usize) -> Result<f64> {
    check_q(q)?;
    let qf = q as f64;
    let top = (qf - 1.0) / qf;
    if !(0.0..=top + 1e-15).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {} outside [0, {}]", t, top)));
    }
    let t = t.min(top);
    let v = top - ((qf - 2.0) * t / qf + 2.0 / qf * ((qf - 1.0) * t * (1.0 - t)).sqrt());
    Ok(v.max(0.0))
}

/// `(1 - q t / (q-1))^k`, the pointwise limit of `K_hat^n_k(round(n t))`.
pub fn limit_poly_eval(k: usize, q: usize, t: f64) -> f64 {
    let q1 = (q - 1) as f64;
    (1.0 - q as f64 * t / q1).powi(k as i32)
}

/// Smallest slack in `|K_hat_k(t) - K_hat_k(t+1)| <= 2k/n` and
/// `|K_hat_k(t) - 1| <= 2kt/n` over `k <= d`, `t in [0:n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepBoundReport {
    pub holds: bool,
    pub min_step_slack: f64,
    pub min_drift_slack: f64,
}

pub fn kraw_step_bound_check(n: usize, q: usize, d: usize) -> Result<StepBoundReport> {
    check_q(q)?;
    if d > n {
        return Err(Error::OutOfRange(format!("d = {} > n = {}", d, n)));
    }
    let table = kraw_table(n, q, d);
    let nf = n as f64;
    let mut step = f64::INFINITY;
    let mut drift = f64::INFINITY;
    for (k, row) in table.iter().enumerate() {
        let kf = k as f64;
        for t in 0..=n {
            if t < n {
                step = step.min(2.0 * kf / nf - (row[t] - row[t + 1]).abs());
            }
            drift = drift.min(2.0 * kf * t as f64 / nf - (row[t] - 1.0).abs());
        }
    }
    // absorb round-off in the recurrence
    let tol = 1e-12;
    Ok(StepBoundReport { holds: step >= -tol && drift >= -tol, min_step_slack: step, min_drift_slack: drift })
}

/// Values `v_k(t) = p_k(t) sqrt(omega(t))` of the omega-orthonormal family
/// `p_0..p_r`, indexed `[k][t]`, re-orthogonalized against round-off.
pub fn orthonormal_vectors(measure: &DiscreteMeasure, r: usize) -> Vec<Vec<f64>> {
    let n = measure.n;
    let table = kraw_table(n, measure.q, r);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(r + 1);
    for (k, row) in table.iter().enumerate() {
        let half_norm = 0.5 * ln_norm_sq(n, measure.q, k);
        let mut v: Vec<f64> = (0..=n)
            .map(|t| row[t] * (half_norm + 0.5 * measure.ln_weight(t)).exp())
            .collect();
        for _ in 0..2 {
            for u in &vecs {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        vecs.push(v);
    }
    vecs
}

/// Root rows `n,q,r,xi,xi_over_n,phi_q(r/n)` for `r = 1..=rmax`.
pub fn root_rows(n: usize, q: usize, rmax: usize) -> Result<Vec<(usize, usize, usize, f64, f64, f64)>> {
    let top = (q - 1) as f64 / q as f64;
    (1..=rmax)
        .map(|r| {
            let xi = least_root(n, q, r)?;
            let t = r as f64 / n as f64;
            let phi = if t <= top { levenshtein_phi(t, q)? } else { f64::NAN };
            Ok((n, q, r, xi, xi / n as f64, phi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        for n in [5, 17, 40] {
            for t in 0..=n {
                assert_eq!(kraw_eval(n, 2, 0, t).unwrap(), 1.0);
                let k1 = kraw_eval(n, 2, 1, t).unwrap();
                assert!((k1 - (1.0 - 2.0 * t as f64 / n as f64)).abs() < 1e-15);
            }
        }
        assert!(kraw_eval(4, 2, 2, 1).unwrap().abs() < 1e-15);
        assert_eq!(kraw_exact(4, 2, 2, 1), Some(0));
        assert!(kraw_eval(4, 2, 5, 1).is_err());
        assert!(kraw_eval(4, 2, 1, 5).is_err());
    }

    #[test]
    fn recurrence_matches_defining_sum() {
        for q in 2..=5 {
            let n = 14;
            for k in 0..=n {
                let k0 = kraw_exact(n, q, k, 0).unwrap() as f64;
                for t in 0..=n {
                    let want = kraw_exact(n, q, k, t).unwrap() as f64 / k0;
                    let got = kraw_eval(n, q, k, t).unwrap();
                    assert!((got - want).abs() < 1e-9, "q={q} k={k} t={t}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn measure_sums_to_one() {
        for q in 2..=5 {
            for n in [1, 10, 200] {
                let m = DiscreteMeasure::new(n, q).unwrap();
                assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert!(DiscreteMeasure::new(3, 1).is_err());
    }

    #[test]
    fn closed_form_roots() {
        for n in [4, 9, 25, 100] {
            let nf = n as f64;
            assert!((least_root(n, 2, 1).unwrap() - nf / 2.0).abs() < 1e-10);
            assert!((least_root(n, 2, 2).unwrap() - (nf - nf.sqrt()) / 2.0).abs() < 1e-9);
        }
        let xi = least_root(200, 2, 100).unwrap();
        assert!((xi / 200.0 - levenshtein_phi(0.5, 2).unwrap()).abs() < 0.02);
        assert!(least_root(5, 2, 0).is_err());
        assert!(least_root(5, 2, 6).is_err());
    }

    #[test]
    fn roots_interlace_and_lie_inside() {
        for q in [2, 3] {
            let n = 30;
            let mut prev = f64::INFINITY;
            for r in 1..=n {
                let xi = least_root(n, q, r).unwrap();
                assert!(xi < prev && xi > 0.0);
                prev = xi;
            }
        }
        for r in 2..=20 {
            assert!(least_root(20, 2, r).unwrap() < 10.0);
        }
    }

    #[test]
    fn jacobi_spectrum_in_range() {
        let j = JacobiMatrix::krawtchouk(12, 2, 13);
        let ev = j.eigenvalues();
        for (i, e) in ev.iter().enumerate() {
            // full-order matrix has the integer support as its spectrum
            assert!((e - i as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(levenshtein_phi(0.5, 2).unwrap(), 0.0);
        assert_eq!(levenshtein_phi(0.0, 2).unwrap(), 0.5);
        for q in 3..=5 {
            let top = (q - 1) as f64 / q as f64;
            assert!(levenshtein_phi(top, q).unwrap().abs() < 1e-12);
            assert!((levenshtein_phi(0.0, q).unwrap() - top).abs() < 1e-15);
        }
        assert!(levenshtein_phi(0.7, 2).is_err());
    }

    #[test]
    fn limit_polynomials() {
        assert_eq!(limit_poly_eval(0, 2, 0.3), 1.0);
        let t = 0.37;
        assert!((limit_poly_eval(2, 2, t) - (4.0 * t * t - 4.0 * t + 1.0)).abs() < 1e-15);
        let v = kraw_eval(400, 2, 3, 100).unwrap();
        assert!((v - 0.125).abs() <= 0.01);
    }

    #[test]
    fn step_bounds() {
        assert!(kraw_step_bound_check(30, 2, 5).unwrap().holds);
        assert!(kraw_step_bound_check(30, 3, 4).unwrap().holds);
        let r = kraw_step_bound_check(30, 2, 0).unwrap();
        assert_eq!((r.min_step_slack, r.min_drift_slack), (0.0, 0.0));
    }

    #[test]
    fn orthonormal_vectors_are_orthonormal() {
        for q in [2, 3] {
            let m = DiscreteMeasure::new(40, q).unwrap();
            let v = orthonormal_vectors(&m, 20);
            for i in 0..v.len() {
                for j in 0..v.len() {
                    let dot: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(10, 3), 120.0);
        assert_eq!(binom(3, 5), 0.0);
        assert_eq!(binom_exact(60, 30), Some(118264581564861424));
    }
}
