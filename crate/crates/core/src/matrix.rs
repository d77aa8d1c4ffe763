//! Symmetric-matrix-valued polynomials on the cube.

use nalgebra::DMatrix;

use crate::cube::{self, check_cap, CubePolynomial, FourierPolynomial, Mask};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    n: usize,
    k: usize,
    // row-major k x k, kept symmetric
    entries: Vec<CubePolynomial>,
}

impl MatrixPolynomial {
    /// Builds `F` from `(i, j, F_ij)` triples (0-based); the transpose entry is
    /// filled in. Giving both `(i, j)` and `(j, i)` with different polynomials
    /// is an error.
    pub fn from_entries<I>(n: usize, k: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, CubePolynomial)>,
    {
        if k == 0 {
            return Err(Error::InvalidInput("matrix size k must be positive".into()));
        }
        let mut slots: Vec<Option<CubePolynomial>> = vec![None; k * k];
        for (i, j, p) in entries {
            if i >= k || j >= k {
                return Err(Error::OutOfRange(format!("entry ({}, {}) outside a {}x{} matrix", i, j, k, k)));
            }
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.n() });
            }
            for (a, b) in [(i, j), (j, i)] {
                match &slots[a * k + b] {
                    Some(existing) if existing != &p => return Err(Error::NotSymmetric { i: a, j: b }),
                    _ => slots[a * k + b] = Some(p.clone()),
                }
            }
        }
        let entries = slots.into_iter().map(|s| s.unwrap_or_else(|| CubePolynomial::zero(n))).collect();
        Ok(MatrixPolynomial { n, k, entries })
    }

    pub fn diagonal(polys: Vec<CubePolynomial>) -> Result<Self> {
        let n = polys.first().map_or(0, |p| p.n());
        let k = polys.len();
        Self::from_entries(n, k, polys.into_iter().enumerate().map(|(i, p)| (i, i, p)))
    }

    pub fn constant(n: usize, c: &DMatrix<f64>) -> Result<Self> {
        let k = c.nrows();
        if c.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, got: c.ncols() });
        }
        let mut entries = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-14 {
                    return Err(Error::NotSymmetric { i, j });
                }
                if i <= j {
                    entries.push((i, j, CubePolynomial::constant(n, c[(i, j)])));
                }
            }
        }
        Self::from_entries(n, k, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> &CubePolynomial {
        &self.entries[i * self.k + j]
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn value_at(&self, x: Mask) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |i, j| self.entry(i, j).eval_mask(x))
    }

    /// Character expansion of every entry, row-major.
    pub fn fourier(&self) -> Result<Vec<FourierPolynomial>> {
        self.entries.iter().map(cube::fourier_transform).collect()
    }

    /// `F_min = min_x lambda_min(F(x))` and a minimizing point.
    pub fn min_eigenvalue_enumeration(&self) -> Result<(f64, Vec<u8>)> {
        check_cap(self.n)?;
        let values = self.entry_value_tables()?;
        let mins: Vec<f64> = (0..1usize << self.n)
            .map(|x| {
                let m = DMatrix::from_fn(self.k, self.k, |i, j| values[i * self.k + j][x]);
                m.symmetric_eigenvalues().min()
            })
            .collect();
        let (x, v) = cube::argmin_lex(&mins, self.n);
        Ok((v, cube::mask_to_point(x, self.n)))
    }

    /// `max_x ||F(x)||_2` (spectral norm).
    pub fn spectral_sup_norm(&self) -> Result<f64> {
        check_cap(self.n)?;
        let values = self.entry_value_tables()?;
        Ok((0..1usize << self.n)
            .map(|x| {
                let m = DMatrix::from_fn(self.k, self.k, |i, j| values[i * self.k + j][x]);
                m.symmetric_eigenvalues().amax()
            })
            .fold(0.0, f64::max))
    }

    fn entry_value_tables(&self) -> Result<Vec<Vec<f64>>> {
        self.entries.iter().map(|p| p.values()).collect()
    }

    /// Harmonic parts `P_0..P_d`, each a matrix polynomial.
    pub fn harmonic_parts(&self) -> Result<Vec<MatrixPolynomial>> {
        let d = self.degree();
        let fourier = self.fourier()?;
        let mut parts = Vec::with_capacity(d + 1);
        for w in 0..=d {
            let mut entries = Vec::new();
            for i in 0..self.k {
                for j in i..self.k {
                    let f = &fourier[i * self.k + j];
                    let part = FourierPolynomial::from_coeffs(
                        self.n,
                        f.coeffs().iter().filter(|(&a, _)| cube::weight(a) == w).map(|(&a, &c)| (a, c)),
                    );
                    entries.push((i, j, part.to_cube()));
                }
            }
            parts.push(MatrixPolynomial::from_entries(self.n, self.k, entries)?);
        }
        Ok(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_completion_and_conflicts() {
        let x1 = CubePolynomial::from_terms(2, [(vec![0], 1.0)]).unwrap();
        let f = MatrixPolynomial::from_entries(2, 2, [(0, 1, x1.clone())]).unwrap();
        assert_eq!(f.entry(1, 0), &x1);
        assert!(f.entry(0, 0).is_zero());
        let bad = MatrixPolynomial::from_entries(2, 2, [(0, 1, x1.clone()), (1, 0, x1.scaled(2.0))]);
        assert!(matches!(bad, Err(Error::NotSymmetric { .. })));
        assert!(MatrixPolynomial::from_entries(2, 2, [(0, 2, x1)]).is_err());
    }

    #[test]
    fn min_eigenvalue_of_diagonal() {
        let f1 = CubePolynomial::hamming_weight(3);
        let f2 = CubePolynomial::constant(3, 0.5);
        let f = MatrixPolynomial::diagonal(vec![f1, f2]).unwrap();
        let (v, x) = f.min_eigenvalue_enumeration().unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(x, vec![0, 0, 0]);
        assert_eq!(f.spectral_sup_norm().unwrap(), 3.0);
    }

    #[test]
    fn harmonic_parts_sum_back() {
        let p = CubePolynomial::from_terms(3, [(vec![0, 1], 2.0), (vec![2], -1.0)]).unwrap();
        let f = MatrixPolynomial::from_entries(3, 2, [(0, 0, p.clone()), (0, 1, p.scaled(0.5))]).unwrap();
        let parts = f.harmonic_parts().unwrap();
        for x in 0..8 {
            let total = parts.iter().fold(DMatrix::zeros(2, 2), |acc, p| acc + p.value_at(x));
            assert!((total - f.value_at(x)).amax() < 1e-12);
        }
    }
}
