//! Outer (sum-of-squares) bounds `f_(r)`: the largest `lambda` such that
//! `f - lambda` agrees on the cube with a sum of squares of degree `<= 2r`.
//!
//! In the character basis a Gram matrix `G` indexed by `{a : |a| <= r}`
//! represents `sum_{a,b} G_ab chi_{a xor b}`, so the SOS condition is one
//! linear equation per character `c`. The primal solved here is
//!
//! ```text
//! minimize tr G  s.t.  sum_{a xor b = c} G_ab = f_hat(c)  (c != 0),  G psd
//! ```
//!
//! with `f_(r) = f_hat(0) - tr G`. Its dual is the moment matrix
//! `(y_{a xor b})` with `y_0 = 1`, and `y = 0` (the uniform measure) is a
//! strictly feasible start.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cube::{self, check_cap, fwht, CubePolynomial, Mask};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::matrix::MatrixPolynomial;
use crate::sdp::{solve_with_map, SdpOptions, SdpSolution, SdpStatus, SparseConstraints, XorConstraints};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OuterStrategy {
    /// Solve the order-`r` program as stated.
    Direct,
    /// Solve orders `ceil(d/2), ..., r` in turn and stop at the first one whose
    /// value is within `tol` of the brute-force minimum. Since the hierarchy
    /// is monotone and bounded by `f_min`, that value is within `tol` of
    /// `f_(r)` as well. Requires `n` within the enumeration cap.
    Ladder { tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OuterOptions {
    pub sdp: SdpOptions,
    pub strategy: OuterStrategy,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions { sdp: SdpOptions::default(), strategy: OuterStrategy::Direct }
    }
}

impl OuterOptions {
    pub fn ladder() -> Self {
        OuterOptions { sdp: SdpOptions::default(), strategy: OuterStrategy::Ladder { tol: 1e-6 } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterBoundResult {
    /// Certified side: `f_hat(0) - tr G`.
    pub value: f64,
    /// Moment side: objective of the dual iterate.
    pub dual_value: f64,
    pub order: usize,
    /// Order of the program actually solved (smaller than `order` only under
    /// the ladder strategy). The Gram matrix is indexed by `basis`, which
    /// is the order-`solved_order` character basis.
    pub solved_order: usize,
    pub basis: Vec<Mask>,
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub gram: DMatrix<f64>,
    pub status: SdpStatus,
    pub gap: f64,
    pub iterations: usize,
}

fn min_order(d: usize) -> usize {
    d.div_ceil(2)
}

fn check(n: usize, d: usize, r: usize) -> Result<()> {
    check_cap(n)?;
    if r < min_order(d) {
        return Err(Error::OrderTooSmall { r, degree: d });
    }
    Ok(())
}

fn dense_fourier(f: &CubePolynomial) -> Result<Vec<f64>> {
    let fh = cube::fourier_transform(f)?;
    let mut table = vec![0.0; 1 << f.n()];
    for (&a, &c) in fh.coeffs() {
        table[a as usize] = c;
    }
    Ok(table)
}

fn require_optimal(sol: &SdpSolution) -> Result<()> {
    if sol.status == SdpStatus::Optimal {
        Ok(())
    } else {
        Err(Error::Solver(format!(
            "status {} after {} iterations (gap {:e}, residuals {:e} / {:e})",
            sol.status, sol.iterations, sol.gap, sol.primal_residual, sol.dual_residual
        )))
    }
}

fn constant_result(value: f64, r: usize, basis_len: usize, basis: Vec<Mask>) -> OuterBoundResult {
    OuterBoundResult {
        value,
        dual_value: value,
        order: r,
        solved_order: r,
        basis,
        gram: DMatrix::zeros(basis_len, basis_len),
        status: SdpStatus::Optimal,
        gap: 0.0,
        iterations: 0,
    }
}

fn solve_order(f: &CubePolynomial, table: &[f64], r: usize, sdp: &SdpOptions) -> Result<OuterBoundResult> {
    let n = f.n();
    let basis = cube::masks_up_to_weight(n, r);
    if f.degree() == 0 {
        let len = basis.len();
        return Ok(constant_result(table[0], r, len, basis));
    }
    let targets: Vec<Mask> = (1..=(2 * r).min(n)).flat_map(|w| cube::masks_of_weight(n, w)).collect();
    let b = DVector::from_iterator(targets.len(), targets.iter().map(|&c| -table[c as usize]));
    let nb = basis.len();
    let map = XorConstraints::new(n, basis.clone(), targets);
    let sol = solve_with_map(&DMatrix::identity(nb, nb), &map, &b, None, sdp)?;
    require_optimal(&sol)?;
    Ok(OuterBoundResult {
        value: table[0] - sol.x.trace(),
        dual_value: table[0] - sol.dual_obj,
        order: r,
        solved_order: r,
        basis,
        gram: sol.x,
        status: sol.status,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

/// `f_(r)` with its Gram certificate.
pub fn outer_cube(f: &CubePolynomial, r: usize, opts: &OuterOptions) -> Result<OuterBoundResult> {
    let d = f.degree();
    check(f.n(), d, r)?;
    let table = dense_fourier(f)?;
    match opts.strategy {
        OuterStrategy::Direct => solve_order(f, &table, r, &opts.sdp),
        OuterStrategy::Ladder { tol } => {
            let (fmin, _) = cube::brute_force_min(f)?;
            let tol = tol * fmin.abs().max(1.0);
            let mut iterations = 0;
            for s in min_order(d)..=r {
                let mut res = solve_order(f, &table, s, &opts.sdp)?;
                iterations += res.iterations;
                if fmin - res.value <= tol || s == r {
                    res.order = r;
                    res.iterations = iterations;
                    return Ok(res);
                }
            }
            unreachable!("the ladder always reaches order r")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SosReport {
    pub max_residual: f64,
    pub min_gram_eigenvalue: f64,
    pub psd: bool,
}

/// Checks `sum_{a,b} G_ab chi_{a xor b}(x) = f(x) - value` on every point.
pub fn verify_sos_certificate(result: &OuterBoundResult, f: &CubePolynomial) -> Result<SosReport> {
    let n = f.n();
    check_cap(n)?;
    let nb = result.basis.len();
    if result.gram.nrows() != nb || result.gram.ncols() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: result.gram.nrows() });
    }
    let mut h = vec![0.0; 1 << n];
    for (i, &a) in result.basis.iter().enumerate() {
        for (j, &b) in result.basis.iter().enumerate() {
            h[(a ^ b) as usize] += result.gram[(i, j)];
        }
    }
    fwht(&mut h);
    let values = f.values()?;
    let max_residual = values
        .iter()
        .zip(&h)
        .map(|(fx, hx)| (fx - result.value - hx).abs())
        .fold(0.0, f64::max);
    let min_gram_eigenvalue = if nb == 0 { 0.0 } else { min_eigenvalue(&result.gram)? };
    Ok(SosReport { max_residual, min_gram_eigenvalue, psd: min_gram_eigenvalue >= -1e-8 })
}

/// `F_(r)` for a symmetric-matrix-valued `F`: the largest `lambda` with
/// `F - lambda I` a matrix SOS of degree `2r` on the cube.
///
/// The Gram matrix is indexed by pairs `(a, i)`. Diagonal blocks at `c = 0`
/// must all absorb the same `lambda`, which is imposed through differences
/// of consecutive block traces; the objective `tr G / k` then equals
/// `tr F_hat(0) / k - lambda`.
pub fn outer_matrix(f: &MatrixPolynomial, r: usize, sdp: &SdpOptions) -> Result<OuterBoundResult> {
    let n = f.n();
    let k = f.k();
    let d = f.degree();
    check(n, d, r)?;
    let tables: Vec<Vec<f64>> = (0..k * k).map(|p| dense_fourier(f.entry(p / k, p % k))).collect::<Result<_>>()?;
    let basis = cube::masks_up_to_weight(n, r);
    let nb = basis.len();
    let dim = nb * k;
    let pos = |a: usize, i: usize| a * k + i;

    let mut cons = SparseConstraints::new(dim);
    let mut rhs = Vec::new();
    let targets: Vec<Mask> = (0..=(2 * r).min(n)).flat_map(|w| cube::masks_of_weight(n, w)).collect();
    for &c in &targets {
        for i in 0..k {
            for j in i..k {
                if c == 0 && i == j {
                    continue;
                }
                let mut entries = Vec::new();
                for (p, &a) in basis.iter().enumerate() {
                    for (q, &b) in basis.iter().enumerate() {
                        if a ^ b != c {
                            continue;
                        }
                        if i == j {
                            if p < q {
                                entries.push((pos(p, i), pos(q, i), 1.0));
                            }
                        } else {
                            entries.push((pos(p, i), pos(q, j), 0.5));
                        }
                    }
                }
                if entries.is_empty() {
                    continue;
                }
                cons.push(entries)?;
                rhs.push(tables[i * k + j][c as usize]);
            }
        }
    }
    for i in 0..k.saturating_sub(1) {
        let mut entries = Vec::with_capacity(2 * nb);
        for p in 0..nb {
            entries.push((pos(p, i), pos(p, i), 1.0));
            entries.push((pos(p, i + 1), pos(p, i + 1), -1.0));
        }
        cons.push(entries)?;
        rhs.push(tables[i * k + i][0] - tables[(i + 1) * k + i + 1][0]);
    }
    let b = DVector::from_vec(rhs);
    let c = DMatrix::identity(dim, dim) / k as f64;
    let trace0: f64 = (0..k).map(|i| tables[i * k + i][0]).sum::<f64>() / k as f64;
    let sol = solve_with_map(&c, &cons, &b, None, sdp)?;
    require_optimal(&sol)?;
    Ok(OuterBoundResult {
        value: trace0 - sol.x.trace() / k as f64,
        dual_value: trace0 - sol.dual_obj,
        order: r,
        solved_order: r,
        basis,
        gram: sol.x,
        status: sol.status,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> OuterOptions {
        OuterOptions::default()
    }

    #[test]
    fn single_variable_is_exact() {
        let f = CubePolynomial::from_terms(1, [(vec![0], 1.0)]).unwrap();
        let res = outer_cube(&f, 1, &opts()).unwrap();
        assert!(res.value.abs() < 1e-6, "{}", res.value);
        let rep = verify_sos_certificate(&res, &f).unwrap();
        assert!(rep.max_residual < 1e-6 && rep.psd);
    }

    #[test]
    fn hamming_weight_n4_r2() {
        let f = CubePolynomial::hamming_weight(4);
        let res = outer_cube(&f, 2, &opts()).unwrap();
        assert!(res.value <= 1e-7 && res.value >= -1e-6, "{}", res.value);
    }

    #[test]
    fn constants() {
        let f = CubePolynomial::constant(3, 1.75);
        for r in 0..3 {
            assert_eq!(outer_cube(&f, r, &opts()).unwrap().value, 1.75);
        }
    }

    #[test]
    fn order_too_small() {
        let f = CubePolynomial::from_terms(3, [(vec![0, 1, 2], 1.0)]).unwrap();
        assert!(matches!(outer_cube(&f, 1, &opts()), Err(Error::OrderTooSmall { r: 1, degree: 3 })));
    }

    #[test]
    fn ladder_stops_early_on_linear() {
        let f = CubePolynomial::from_terms(6, [(vec![0], 1.0), (vec![3], -2.0)]).unwrap();
        let res = outer_cube(&f, 3, &OuterOptions::ladder()).unwrap();
        assert_eq!(res.solved_order, 1);
        assert!((res.value + 2.0).abs() < 1e-6);
        assert!(verify_sos_certificate(&res, &f).unwrap().max_residual < 1e-6);
    }

    #[test]
    fn perturbed_gram_flagged() {
        let f = CubePolynomial::from_terms(2, [(vec![0], 1.0), (vec![0, 1], -1.0)]).unwrap();
        let mut res = outer_cube(&f, 1, &opts()).unwrap();
        let eig = res.gram.clone().symmetric_eigen();
        let mut vals = eig.eigenvalues.clone();
        let i = vals.imin();
        vals[i] -= 1e-3;
        res.gram = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        assert!(!verify_sos_certificate(&res, &f).unwrap().psd);
    }

    #[test]
    fn zero_polynomial_certificate() {
        let f = CubePolynomial::zero(3);
        let res = outer_cube(&f, 1, &opts()).unwrap();
        let rep = verify_sos_certificate(&res, &f).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn matrix_scalar_case_matches() {
        let f = CubePolynomial::from_terms(3, [(vec![0, 1], 1.0), (vec![2], -1.0), (vec![1], 0.5)]).unwrap();
        let a = outer_cube(&f, 1, &opts()).unwrap().value;
        let fm = MatrixPolynomial::diagonal(vec![f]).unwrap();
        let b = outer_matrix(&fm, 1, &SdpOptions::default()).unwrap().value;
        assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }

    #[test]
    fn matrix_constant_is_min_eigenvalue() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let want = c.clone().symmetric_eigenvalues().min();
        let f = MatrixPolynomial::constant(3, &c).unwrap();
        let v = outer_matrix(&f, 1, &SdpOptions::default()).unwrap().value;
        assert!((v - want).abs() < 1e-6, "{} vs {}", v, want);
    }
}
