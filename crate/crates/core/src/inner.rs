//! Inner (measure-based) bounds `f^(r)`: minimize `int f s` over
//! sum-of-squares densities `s` of degree `2r`. In an orthonormal basis the
//! normalization is the identity, so every bound is a smallest eigenvalue.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cube::{self, check_cap, CubePolynomial, Mask};
use crate::error::{Error, Result};
use crate::krawtchouk::{orthonormal_vectors, DiscreteMeasure};
use crate::linalg::smallest_eigenpair;
use crate::matrix::MatrixPolynomial;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerBoundResult {
    pub value: f64,
    pub order: usize,
    /// Eigenvector: the density is the square of the polynomial with these
    /// coefficients in the working orthonormal basis.
    pub density_coeffs: Vec<f64>,
    pub residual: f64,
}

fn from_matrix(a: &DMatrix<f64>, order: usize) -> Result<InnerBoundResult> {
    let e = smallest_eigenpair(a)?;
    Ok(InnerBoundResult {
        value: e.value,
        order,
        density_coeffs: e.vector.iter().copied().collect(),
        residual: e.residual,
    })
}

/// `g^(r)` on `[0:n]` for `g` given by its values `g(0), ..., g(n)`.
pub fn inner_univariate(g: &[f64], measure: &DiscreteMeasure, r: usize) -> Result<InnerBoundResult> {
    let n = measure.n;
    if g.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: g.len() });
    }
    if r > n {
        return Err(Error::OutOfRange(format!("order r = {} exceeds n = {}", r, n)));
    }
    let v = orthonormal_vectors(measure, r);
    let a = DMatrix::from_fn(r + 1, r + 1, |i, j| (0..=n).map(|t| g[t] * v[i][t] * v[j][t]).sum());
    from_matrix(&a, r)
}

/// Character basis `{chi_a : |a| <= r}` used by the cube bounds.
pub fn cube_basis(n: usize, r: usize) -> Vec<Mask> {
    cube::masks_up_to_weight(n, r)
}

fn check_order(n: usize, r: usize) -> Result<()> {
    check_cap(n)?;
    if r > n {
        return Err(Error::OutOfRange(format!("order r = {} exceeds n = {}", r, n)));
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

/// `f^(r)`: smallest eigenvalue of `(f_hat(a xor b))_{|a|,|b| <= r}`.
pub fn inner_cube(f: &CubePolynomial, r: usize) -> Result<InnerBoundResult> {
    check_order(f.n(), r)?;
    let table = dense_fourier(f)?;
    let basis = cube_basis(f.n(), r);
    let m = basis.len();
    let a = DMatrix::from_fn(m, m, |i, j| table[(basis[i] ^ basis[j]) as usize]);
    from_matrix(&a, r)
}

/// Univariate `F` with `F(|x|)` the average of `f` over the weight-`|x|` sphere.
pub fn symmetrize(f: &CubePolynomial) -> Vec<f64> {
    let n = f.n();
    let mut out = vec![0.0; n + 1];
    for (&s, &c) in f.terms() {
        let w = cube::weight(s);
        for (t, slot) in out.iter_mut().enumerate().skip(w) {
            // C(n-w, t-w) / C(n, t) = prod_{j<w} (t-j)/(n-j)
            let ratio: f64 = (0..w).map(|j| (t - j) as f64 / (n - j) as f64).product();
            *slot += c * ratio;
        }
    }
    out
}

/// Symmetrized inner bound: the univariate bound of the sphere average of `f`.
pub fn inner_cube_symmetrized(f: &CubePolynomial, r: usize) -> Result<InnerBoundResult> {
    check_order(f.n(), r)?;
    inner_univariate(&symmetrize(f), &DiscreteMeasure::binary(f.n()), r)
}

/// `F^(r)` for a matrix-valued `F`: smallest eigenvalue of the block matrix
/// `(F_hat_ij(a xor b))` indexed by pairs `(a, i)`.
pub fn inner_matrix(f: &MatrixPolynomial, r: usize) -> Result<InnerBoundResult> {
    check_order(f.n(), r)?;
    let k = f.k();
    let mut tables = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            tables.push(dense_fourier(f.entry(i, j))?);
        }
    }
    let basis = cube_basis(f.n(), r);
    let m = basis.len() * k;
    let a = DMatrix::from_fn(m, m, |p, q| {
        let (a, i) = (basis[p / k], p % k);
        let (b, j) = (basis[q / k], q % k);
        tables[i * k + j][(a ^ b) as usize]
    });
    from_matrix(&a, r)
}
