//! Smallest eigenpairs of dense symmetric matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Above this size the smallest eigenpair comes from Lanczos instead of a
/// full decomposition.
pub const DENSE_LIMIT: usize = 800;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: DVector<f64>,
    /// `||A v - value v||` for the unit vector `v`.
    pub residual: f64,
}

pub fn smallest_eigenpair(a: &DMatrix<f64>) -> Result<Eigenpair> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if a.nrows() <= DENSE_LIMIT {
        Ok(smallest_dense(a))
    } else {
        smallest_lanczos(a)
    }
}

fn residual(a: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    (a * v - v * lambda).norm()
}

pub fn smallest_dense(a: &DMatrix<f64>) -> Eigenpair {
    let eig = SymmetricEigen::new(a.clone());
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    let vector = eig.eigenvectors.column(idx).into_owned();
    let residual = residual(a, &vector, value);
    Eigenpair { value, vector, residual }
}

/// Smallest eigenvalue only.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() <= DENSE_LIMIT {
        Ok(a.clone().symmetric_eigenvalues().min())
    } else {
        smallest_lanczos(a).map(|e| e.value)
    }
}

/// Lanczos with full reorthogonalization and explicit restarts from the
/// current Ritz vector.
pub fn smallest_lanczos(a: &DMatrix<f64>) -> Result<Eigenpair> {
    let n = a.nrows();
    let scale = a.amax().max(f64::MIN_POSITIVE) * (n as f64).sqrt();
    let tol = 1e-11 * scale;
    let kmax = n.min(300);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut best: Option<Eigenpair> = None;

    for _restart in 0..20 {
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(kmax);
        let mut alpha = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        let norm = start.norm();
        q.push(start / norm);
        let v = loop {
            let k = q.len() - 1;
            let mut w = a * &q[k];
            let ak = w.dot(&q[k]);
            alpha.push(ak);
            for _ in 0..2 {
                for qi in &q {
                    let c = w.dot(qi);
                    w.axpy(-c, qi, 1.0);
                }
            }
            let bk = w.norm();
            let m = alpha.len();
            let exhausted = m == kmax || bk <= 1e-14 * scale;
            if exhausted || m % 10 == 0 {
                let t = DMatrix::from_fn(m, m, |i, j| {
                    if i == j {
                        alpha[i]
                    } else if i + 1 == j {
                        beta[i]
                    } else if j + 1 == i {
                        beta[j]
                    } else {
                        0.0
                    }
                });
                let eig = SymmetricEigen::new(t);
                let (idx, _) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .expect("non-empty");
                let s = eig.eigenvectors.column(idx);
                let est = (bk * s[m - 1]).abs();
                if est <= tol || exhausted {
                    let mut v = DVector::zeros(n);
                    for (i, qi) in q.iter().enumerate() {
                        v.axpy(s[i], qi, 1.0);
                    }
                    v /= v.norm();
                    break v;
                }
            }
            beta.push(bk);
            q.push(w / bk);
        };
        let value = v.dot(&(a * &v));
        let res = residual(a, &v, value);
        let pair = Eigenpair { value, vector: v.clone(), residual: res };
        if res <= 1e-9 * scale {
            return Ok(pair);
        }
        if best.as_ref().map_or(true, |b| res < b.residual) {
            best = Some(pair);
        }
        start = v;
    }
    let best = best.expect("at least one restart ran");
    if best.residual <= 1e-6 * scale {
        Ok(best)
    } else {
        Err(Error::EigenFailure { residual: best.residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn dense_matches_full_spectrum() {
        let a = random_symmetric(30, 1);
        let e = smallest_eigenpair(&a).unwrap();
        let min = a.clone().symmetric_eigenvalues().min();
        assert!((e.value - min).abs() < 1e-12);
        assert!(e.residual < 1e-10);
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..3 {
            let a = random_symmetric(250, seed);
            let d = smallest_dense(&a);
            let l = smallest_lanczos(&a).unwrap();
            assert!((d.value - l.value).abs() < 1e-9, "{} vs {}", d.value, l.value);
            assert!(l.residual < 1e-7);
        }
    }

    #[test]
    fn lanczos_handles_multiplicity() {
        let mut a = DMatrix::<f64>::identity(60, 60);
        a[(0, 0)] = -2.0;
        a[(1, 1)] = -2.0;
        let l = smallest_lanczos(&a).unwrap();
        assert!((l.value + 2.0).abs() < 1e-12);
    }
}
