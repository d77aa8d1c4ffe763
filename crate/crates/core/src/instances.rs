//! Instance generators: max-cut, stable set, and seeded random polynomials.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{self, CubePolynomial};
use crate::error::{Error, Result};
use crate::io::Graph;
use crate::matrix::MatrixPolynomial;

/// `f(x) = -sum_{i<j} w_ij (x_i - x_j)^2`, so `f_min = -maxcut(w)`.
pub fn maxcut_instance(weights: &[Vec<f64>]) -> Result<CubePolynomial> {
    let n = weights.len();
    let mut f = CubePolynomial::zero(n);
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidInput(format!("nonzero diagonal weight at vertex {}", i + 1)));
        }
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!("weight w[{}][{}] = {} is not a nonnegative real", i + 1, j + 1, w)));
            }
            if weights[j][i] != w {
                return Err(Error::NotSymmetric { i, j });
            }
            if j > i && w != 0.0 {
                // (x_i - x_j)^2 = x_i + x_j - 2 x_i x_j on the cube
                f.add_term(1 << i, -w);
                f.add_term(1 << j, -w);
                f.add_term((1 << i) | (1 << j), 2.0 * w);
            }
        }
    }
    Ok(f)
}

pub fn maxcut_from_graph(g: &Graph) -> Result<CubePolynomial> {
    let mut w = vec![vec![0.0; g.n]; g.n];
    for &(i, j, wij) in &g.edges {
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop at vertex {}", i + 1)));
        }
        w[i][j] += wij;
        w[j][i] += wij;
    }
    maxcut_instance(&w)
}

/// Unit-weight max-cut on the complete graph `K_n`.
pub fn maxcut_complete(n: usize) -> CubePolynomial {
    let w: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
    maxcut_instance(&w).expect("complete graph weights are valid")
}

/// `f(x) = -(sum_i x_i - sum_{ij in E} x_i x_j)`, so `-f_min = alpha(G)`.
/// Edges are 0-based; repeated edges count once.
pub fn stable_set_instance(n: usize, edges: &[(usize, usize)]) -> Result<CubePolynomial> {
    let mut set = BTreeSet::new();
    for &(i, j) in edges {
        if i >= n || j >= n {
            return Err(Error::OutOfRange(format!("edge ({}, {}) with n = {}", i + 1, j + 1, n)));
        }
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop at vertex {}", i + 1)));
        }
        set.insert((i.min(j), i.max(j)));
    }
    let mut f = CubePolynomial::zero(n);
    for i in 0..n {
        f.add_term(1 << i, -1.0);
    }
    for (i, j) in set {
        f.add_term((1 << i) | (1 << j), 1.0);
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoeffDist {
    /// Independent uniform on `[-1, 1]`.
    #[default]
    Uniform,
    /// Independent uniform on `{-1, 1}`.
    Sign,
}

fn draw(rng: &mut ChaCha8Rng, dist: CoeffDist) -> f64 {
    match dist {
        CoeffDist::Uniform => rng.gen_range(-1.0..=1.0),
        CoeffDist::Sign => {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

fn raw_poly(rng: &mut ChaCha8Rng, n: usize, d: usize, dist: CoeffDist) -> CubePolynomial {
    loop {
        let p = CubePolynomial::from_masks(n, cube::masks_up_to_weight(n, d).into_iter().map(|m| (m, draw(rng, dist))));
        if p.degree() == d && !p.is_zero() {
            return p;
        }
    }
}

/// Random polynomial of degree exactly `d` with one coefficient per monomial
/// of size `<= d`, scaled to `||f||_inf = 1`. Deterministic in `seed`.
pub fn random_poly(n: usize, d: usize, seed: u64, dist: CoeffDist) -> Result<CubePolynomial> {
    if d > n {
        return Err(Error::OutOfRange(format!("degree {} exceeds n = {}", d, n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p = raw_poly(&mut rng, n, d, dist);
        let s = cube::sup_norm(&p)?;
        if s > 0.0 {
            return Ok(p.scaled(1.0 / s));
        }
    }
}

/// Random symmetric `k x k` matrix polynomial of degree `d`, entries drawn as
/// in [`random_poly`] and scaled to spectral sup-norm 1.
pub fn random_matrix_poly(n: usize, k: usize, d: usize, seed: u64) -> Result<MatrixPolynomial> {
    if d > n {
        return Err(Error::OutOfRange(format!("degree {} exceeds n = {}", d, n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut entries = Vec::new();
        for i in 0..k {
            for j in i..k {
                entries.push((i, j, raw_poly(&mut rng, n, d, CoeffDist::Uniform)));
            }
        }
        let f = MatrixPolynomial::from_entries(n, k, entries)?;
        let s = f.spectral_sup_norm()?;
        if s > 0.0 {
            let scaled = (0..k)
                .flat_map(|i| (i..k).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, f.entry(i, j).scaled(1.0 / s)))
                .collect::<Vec<_>>();
            return MatrixPolynomial::from_entries(n, k, scaled);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_maxcut() {
        let f = maxcut_instance(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(f, CubePolynomial::from_terms(2, [(vec![0], -1.0), (vec![1], -1.0), (vec![0, 1], 2.0)]).unwrap());
        assert_eq!(cube::brute_force_min(&f).unwrap().0, -1.0);
        assert!(maxcut_instance(&vec![vec![0.0; 3]; 3]).unwrap().is_zero());
        assert_eq!(cube::brute_force_min(&maxcut_complete(3)).unwrap().0, -2.0);
    }

    #[test]
    fn maxcut_rejects_bad_weights() {
        assert!(maxcut_instance(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(maxcut_instance(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(maxcut_instance(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn stable_sets() {
        let alpha = |n, e: &[(usize, usize)]| -cube::brute_force_min(&stable_set_instance(n, e).unwrap()).unwrap().0;
        assert_eq!(alpha(4, &[]), 4.0);
        assert_eq!(alpha(3, &[(0, 1), (1, 2), (0, 2)]), 1.0);
        assert_eq!(alpha(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), 2.0);
        assert!(stable_set_instance(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn random_poly_is_deterministic_and_normalized() {
        let a = random_poly(6, 3, 42, CoeffDist::Uniform).unwrap();
        let b = random_poly(6, 3, 42, CoeffDist::Uniform).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_poly(6, 3, 43, CoeffDist::Uniform).unwrap());
        assert_eq!(a.degree(), 3);
        assert!((cube::sup_norm(&a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(random_poly(3, 1, 7, CoeffDist::Sign).unwrap().degree(), 1);
        assert!(random_poly(2, 3, 0, CoeffDist::Uniform).is_err());
    }

    #[test]
    fn random_matrix_poly_normalized() {
        let f = random_matrix_poly(4, 2, 2, 9).unwrap();
        assert!((f.spectral_sup_norm().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(f.degree(), 2);
    }
}
