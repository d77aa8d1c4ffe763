//! Dense primal-dual interior-point solver for
//!
//! ```text
//! minimize <C, X>  s.t.  <A_k, X> = b_k,  X psd
//! maximize b^T y   s.t.  Z = C - sum_k y_k A_k psd
//! ```
//!
//! Search directions use the HKM scaling with a Mehrotra predictor-corrector.
//! The constraint operator is abstracted behind [`ConstraintMap`] so that
//! structured problems can supply a fast Schur-complement assembly.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::cube::fwht;
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;

/// The linear map `X -> (<A_k, X>)_k` on symmetric `dim x dim` matrices.
pub trait ConstraintMap {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64>;
    /// `sum_k y_k A_k`.
    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64>;
    /// `M_kl = tr(A_k X A_l W)`.
    fn schur(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64>;
}

/// Constraint matrices as upper-triangular triplets `(i, j, v)` with `i <= j`,
/// standing for `A_ij = A_ji = v`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseConstraints {
    pub dim: usize,
    pub mats: Vec<Vec<(usize, usize, f64)>>,
}

impl SparseConstraints {
    pub fn new(dim: usize) -> Self {
        SparseConstraints { dim, mats: Vec::new() }
    }

    /// Adds a constraint; entries below the diagonal are mirrored up and
    /// duplicates accumulate.
    pub fn push(&mut self, entries: Vec<(usize, usize, f64)>) -> Result<()> {
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if i >= self.dim || j >= self.dim {
                return Err(Error::OutOfRange(format!("entry ({}, {}) outside dimension {}", i, j, self.dim)));
            }
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            match out.iter_mut().find(|e| e.0 == i && e.1 == j) {
                Some(e) => e.2 += v,
                None => out.push((i, j, v)),
            }
        }
        self.mats.push(out);
        Ok(())
    }

    pub fn dense(&self, k: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.mats[k] {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }
}

impl ConstraintMap for SparseConstraints {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.mats.len()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.mats.len(),
            self.mats.iter().map(|m| {
                m.iter()
                    .map(|&(i, j, v)| if i == j { v * x[(i, i)] } else { v * (x[(i, j)] + x[(j, i)]) })
                    .sum::<f64>()
            }),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (m, &yk) in self.mats.iter().zip(y.iter()) {
            for &(i, j, v) in m {
                out[(i, j)] += yk * v;
                if i != j {
                    out[(j, i)] += yk * v;
                }
            }
        }
        out
    }

    fn schur(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.mats.len();
        let n = self.dim;
        let mut out = DMatrix::zeros(m, m);
        for l in 0..m {
            // S = A_l W, then M_kl = sum over A_k entries of (X S)_{ji}
            let mut s = DMatrix::<f64>::zeros(n, n);
            for &(i, j, v) in &self.mats[l] {
                for c in 0..n {
                    s[(i, c)] += v * w[(j, c)];
                    if i != j {
                        s[(j, c)] += v * w[(i, c)];
                    }
                }
            }
            let xs = |r: usize, c: usize| x.row(r).iter().zip(s.column(c).iter()).map(|(a, b)| a * b).sum::<f64>();
            for k in 0..m {
                out[(k, l)] = self.mats[k]
                    .iter()
                    .map(|&(i, j, v)| if i == j { v * xs(j, i) } else { v * (xs(j, i) + xs(i, j)) })
                    .sum();
            }
        }
        out
    }
}

/// Constraints `A_c = -S_c` for `c` in a list of nonzero masks, where
/// `S_c[a][b] = 1` iff `basis[a] xor basis[b] = c`.
#[derive(Clone, Debug)]
pub struct XorConstraints {
    n: usize,
    basis: Vec<u64>,
    targets: Vec<u64>,
    // mask -> constraint index, usize::MAX when absent
    index: Vec<usize>,
}

impl XorConstraints {
    pub fn new(n: usize, basis: Vec<u64>, targets: Vec<u64>) -> Self {
        let mut index = vec![usize::MAX; 1 << n];
        for (k, &c) in targets.iter().enumerate() {
            index[c as usize] = k;
        }
        XorConstraints { n, basis, targets, index }
    }

    pub fn targets(&self) -> &[u64] {
        &self.targets
    }

    fn schur_fwht(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        // M(k,l) = sum_{u,v} X(u^k, v^l) W(u,v): an XOR convolution on the
        // product group, diagonalized by the 2-D Walsh-Hadamard transform.
        let side = 1usize << self.n;
        let embed = |m: &DMatrix<f64>| {
            let mut t = vec![0.0; side * side];
            for (i, &a) in self.basis.iter().enumerate() {
                for (j, &b) in self.basis.iter().enumerate() {
                    t[a as usize * side + b as usize] = m[(i, j)];
                }
            }
            fwht(&mut t);
            t
        };
        let mut tx = embed(x);
        let tw = embed(w);
        tx.iter_mut().zip(&tw).for_each(|(a, b)| *a *= b);
        drop(tw);
        fwht(&mut tx);
        let scale = 1.0 / (side * side) as f64;
        let m = self.targets.len();
        DMatrix::from_fn(m, m, |k, l| {
            tx[self.targets[k] as usize * side + self.targets[l] as usize] * scale
        })
    }

    fn schur_direct(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        // M(k,l) = sum_{a,b} X(a^k, b) W(a, b^l). For fixed k, with
        // P(a,b) = X(a^k, b) and V = P^T W, M(k,l) = sum_b V(b, pos(b^l)).
        let side = 1usize << self.n;
        let nb = self.basis.len();
        let mut pos = vec![usize::MAX; side];
        for (i, &a) in self.basis.iter().enumerate() {
            pos[a as usize] = i;
        }
        let m = self.targets.len();
        let mut out = DMatrix::zeros(m, m);
        let mut p = DMatrix::<f64>::zeros(nb, nb);
        for (k, &ck) in self.targets.iter().enumerate() {
            p.fill(0.0);
            for (i, &a) in self.basis.iter().enumerate() {
                let src = pos[(a ^ ck) as usize];
                if src != usize::MAX {
                    p.row_mut(i).copy_from(&x.row(src));
                }
            }
            let v = p.transpose() * w;
            for (l, &cl) in self.targets.iter().enumerate() {
                out[(k, l)] = self
                    .basis
                    .iter()
                    .enumerate()
                    .filter_map(|(bi, &b)| {
                        let q = pos[(b ^ cl) as usize];
                        (q != usize::MAX).then(|| v[(bi, q)])
                    })
                    .sum();
            }
        }
        out
    }
}

impl ConstraintMap for XorConstraints {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn len(&self) -> usize {
        self.targets.len()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.targets.len());
        for (i, &a) in self.basis.iter().enumerate() {
            for (j, &b) in self.basis.iter().enumerate() {
                let k = self.index[(a ^ b) as usize];
                if k != usize::MAX {
                    out[k] -= x[(i, j)];
                }
            }
        }
        out
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let nb = self.basis.len();
        DMatrix::from_fn(nb, nb, |i, j| {
            let k = self.index[(self.basis[i] ^ self.basis[j]) as usize];
            if k == usize::MAX {
                0.0
            } else {
                -y[k]
            }
        })
    }

    fn schur(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let nb = self.basis.len() as f64;
        let m = self.targets.len() as f64;
        let side = (1u64 << self.n) as f64;
        let fwht_cost = 3.0 * 2.0 * self.n as f64 * side * side;
        let direct_cost = m * nb * nb * nb + m * m * nb;
        if self.n <= 12 && fwht_cost < direct_cost {
            self.schur_fwht(x, w)
        } else {
            self.schur_direct(x, w)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { gap_tol: 1e-7, feas_tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    InfeasibleDetected,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIter => "max_iter",
            SdpStatus::InfeasibleDetected => "infeasible_detected",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

/// A standalone SDP with explicitly listed constraint matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub c: DMatrix<f64>,
    pub constraints: SparseConstraints,
    pub b: DVector<f64>,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.constraints.dim;
        if self.c.nrows() != n || self.c.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.c.nrows() });
        }
        if self.b.len() != self.constraints.len() {
            return Err(Error::DimensionMismatch { expected: self.constraints.len(), got: self.b.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if (self.c[(i, j)] - self.c[(j, i)]).abs() > 1e-14 {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        Ok(())
    }
}

pub fn solve_sdp(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    solve_with_map(&p.c, &p.constraints, &p.b, None, opts)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn chol(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(sym(m))
}

/// Largest `alpha` with `S + alpha dS` psd, given the factor of `S`.
fn max_step(ls: &Cholesky<f64, Dyn>, ds: &DMatrix<f64>) -> Result<f64> {
    let l = ls.l();
    let t = l.solve_lower_triangular(ds).ok_or_else(|| Error::Solver("singular factor".into()))?;
    let t = l
        .solve_lower_triangular(&t.transpose())
        .ok_or_else(|| Error::Solver("singular factor".into()))?;
    let lmin = min_eigenvalue(&sym(&t))?;
    Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

/// Solves the pair with a general constraint operator. `y0`, when given and
/// strictly dual feasible, is used as the starting dual point.
pub fn solve_with_map<M: ConstraintMap>(
    c: &DMatrix<f64>,
    a: &M,
    b: &DVector<f64>,
    y0: Option<&DVector<f64>>,
    opts: &SdpOptions,
) -> Result<SdpSolution> {
    let n = a.dim();
    let m = a.len();
    if c.nrows() != n || b.len() != m {
        return Err(Error::DimensionMismatch { expected: n, got: c.nrows() });
    }
    let bnorm = b.norm();
    let cnorm = c.norm();
    let scale = 1.0_f64.max(b.amax()).max(c.amax());

    let (mut y, mut z) = match y0 {
        Some(y0) if y0.len() == m => {
            let z0 = c - a.adjoint(y0);
            if chol(&z0).is_some() {
                (y0.clone(), sym(&z0))
            } else {
                (DVector::zeros(m), DMatrix::identity(n, n) * scale)
            }
        }
        _ => (DVector::zeros(m), DMatrix::identity(n, n) * scale),
    };
    let mut x = DMatrix::identity(n, n) * scale;

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut stalls = 0;
    loop {
        let rp = b - a.apply(&x);
        let rd = c - &z - a.adjoint(&y);
        let pobj = c.dot(&x);
        let dobj = b.dot(&y);
        let mu = x.dot(&z) / n as f64;
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = (pobj - dobj).abs() / denom;
        let pres = rp.norm() / (1.0 + bnorm);
        let dres = rd.norm() / (1.0 + cnorm);
        if gap <= opts.gap_tol && x.dot(&z) / denom <= opts.gap_tol && pres <= opts.feas_tol && dres <= opts.feas_tol {
            status = SdpStatus::Optimal;
        }
        if x.amax() > 1e12 * scale || y.amax() > 1e12 * scale {
            status = SdpStatus::InfeasibleDetected;
        }
        if status != SdpStatus::MaxIter || iterations >= opts.max_iter || stalls >= 5 {
            return Ok(SdpSolution {
                x,
                y,
                z,
                primal_obj: pobj,
                dual_obj: dobj,
                gap,
                primal_residual: pres,
                dual_residual: dres,
                iterations,
                status,
            });
        }
        iterations += 1;

        let lz = chol(&z).ok_or_else(|| Error::Solver("dual slack lost definiteness".into()))?;
        let lx = chol(&x).ok_or_else(|| Error::Solver("primal iterate lost definiteness".into()))?;
        let w = sym(&lz.inverse());
        let mut schur = sym(&a.schur(&x, &w));
        let mschur = {
            let mut reg = 0.0;
            loop {
                if let Some(f) = Cholesky::new(schur.clone()) {
                    break f;
                }
                reg = if reg == 0.0 { 1e-14 * schur.diagonal().amax().max(1e-300) } else { reg * 100.0 };
                if reg > 1e-2 * schur.diagonal().amax() {
                    return Err(Error::Solver("Schur complement is singular".into()));
                }
                for i in 0..m {
                    schur[(i, i)] += reg;
                }
            }
        };
        let xrdw = &x * &rd * &w;
        let direction = |rc: &DMatrix<f64>| {
            let rhs = &rp - a.apply(rc) + a.apply(&xrdw);
            let dy = mschur.solve(&rhs);
            let dz = &rd - a.adjoint(&dy);
            let dx = sym(&(rc - &x * &dz * &w));
            (dx, dy, dz)
        };

        // predictor
        let (dxp, _, dzp) = direction(&(-&x));
        let ap = max_step(&lx, &dxp)?.min(1.0);
        let ad = max_step(&lz, &dzp)?.min(1.0);
        let mu_aff = (&x + &dxp * ap).dot(&(&z + &dzp * ad)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc = &w * (sigma * mu) - &x - &dxp * &dzp * &w;
        let (dx, dy, dz) = direction(&rc);
        let ap = (0.98 * max_step(&lx, &dx)?).min(1.0);
        let ad = (0.98 * max_step(&lz, &dz)?).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
        }
        x += &dx * ap;
        x = sym(&x);
        y += &dy * ad;
        z += &dz * ad;
        z = sym(&z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_optimum() {
        let mut cons = SparseConstraints::new(2);
        cons.push(vec![(0, 0, 1.0)]).unwrap();
        let p = SdpProblem { c: DMatrix::identity(2, 2), constraints: cons, b: DVector::from_vec(vec![1.0]) };
        let s = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_obj - 1.0).abs() < 1e-6);
        assert!((s.x[(0, 0)] - 1.0).abs() < 1e-6);
        assert!(s.x[(1, 1)].abs() < 1e-6);
    }

    #[test]
    fn xor_schur_paths_agree() {
        let n = 4;
        let basis = crate::cube::masks_up_to_weight(n, 2);
        let targets: Vec<u64> = (1..16).collect();
        let a = XorConstraints::new(n, basis.clone(), targets);
        let nb = basis.len();
        let x = DMatrix::from_fn(nb, nb, |i, j| ((i * 7 + j * 3) % 5) as f64 + if i == j { 10.0 } else { 0.0 });
        let x = sym(&x);
        let w = DMatrix::from_fn(nb, nb, |i, j| ((i + 2 * j) % 3) as f64);
        let w = sym(&w);
        let d = a.schur_direct(&x, &w);
        let f = a.schur_fwht(&x, &w);
        assert!((d - f).amax() < 1e-10);
    }

    #[test]
    fn xor_map_matches_sparse_map() {
        let n = 3;
        let basis = crate::cube::masks_up_to_weight(n, 1);
        let targets: Vec<u64> = (1..8).filter(|&c| crate::cube::weight(c) <= 2).collect();
        let xa = XorConstraints::new(n, basis.clone(), targets.clone());
        let mut sa = SparseConstraints::new(basis.len());
        for &c in &targets {
            let mut e = Vec::new();
            for (i, &a) in basis.iter().enumerate() {
                for (j, &b) in basis.iter().enumerate() {
                    if i <= j && a ^ b == c {
                        e.push((i, j, -1.0));
                    }
                }
            }
            sa.push(e).unwrap();
        }
        let nb = basis.len();
        let x = sym(&DMatrix::from_fn(nb, nb, |i, j| (i as f64 - j as f64).sin() + 2.0));
        let w = sym(&DMatrix::from_fn(nb, nb, |i, j| (i * j) as f64 + 1.0));
        let y = DVector::from_fn(targets.len(), |k, _| k as f64 - 1.5);
        assert!((xa.apply(&x) - sa.apply(&x)).amax() < 1e-12);
        assert!((xa.adjoint(&y) - sa.adjoint(&y)).amax() < 1e-12);
        assert!((xa.schur(&x, &w) - sa.schur(&x, &w)).amax() < 1e-10);
    }

    #[test]
    fn infeasible_problem_is_flagged() {
        // X psd with X_11 = -1 has no solution
        let mut cons = SparseConstraints::new(1);
        cons.push(vec![(0, 0, 1.0)]).unwrap();
        let p = SdpProblem { c: DMatrix::identity(1, 1), constraints: cons, b: DVector::from_vec(vec![-1.0]) };
        let s = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_ne!(s.status, SdpStatus::Optimal);
    }

    #[test]
    fn asymmetric_objective_rejected() {
        let mut c = DMatrix::identity(2, 2);
        c[(0, 1)] = 1.0;
        let p = SdpProblem { c, constraints: SparseConstraints::new(2), b: DVector::zeros(0) };
        assert!(matches!(solve_sdp(&p, &SdpOptions::default()), Err(Error::NotSymmetric { .. })));
    }
}
