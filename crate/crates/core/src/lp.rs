//! Small dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `opt c^T x` subject to `a_i^T x (<=|>=|=) b_i` and `x >= 0`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest constraint violation of `x`, recomputed from the input data.
    pub max_violation: f64,
}

const EPS: f64 = 1e-11;

struct Tableau {
    // rows[0..m] constraints, each of length cols + 1 (last = rhs)
    rows: Vec<Vec<f64>>,
    // reduced-cost row z_j - c_j for a maximization, last entry = objective
    obj: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    // the initial rows, kept for refactoring; `row_ids[i]` is the source of `rows[i]`
    original: Vec<Vec<f64>>,
    row_ids: Vec<usize>,
}

impl Tableau {
    fn cols(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs simplex iterations over the allowed columns; `Err` on unbounded.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        loop {
            if self.iterations > 1_000_000 {
                return Err(Error::Lp("not converging (iteration limit)".into()));
            }
            let cols = self.cols();
            let Some(enter) = (0..cols).find(|&j| allowed(j) && self.obj[j] < -EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > EPS {
                    let ratio = row[cols] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(Error::Lp("unbounded".into())),
            }
        }
    }

    /// Rebuilds the rows as `B^-1 [A | b]` from the original data, discarding
    /// accumulated pivoting error. Returns false if the basis is singular.
    fn refactor(&mut self) -> bool {
        let m = self.rows.len();
        let width = self.cols() + 1;
        let b = DMatrix::from_fn(m, m, |i, j| self.original[self.row_ids[i]][self.basis[j]]);
        let rhs = DMatrix::from_fn(m, width, |i, j| self.original[self.row_ids[i]][j]);
        let Some(sol) = b.lu().solve(&rhs) else {
            return false;
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = sol[(i, j)];
            }
            // basic columns are exact unit vectors
            for (r, &bj) in self.basis.iter().enumerate() {
                row[bj] = if r == i { 1.0 } else { 0.0 };
            }
            if row[width - 1] < 0.0 && row[width - 1] > -1e-9 {
                row[width - 1] = 0.0;
            }
        }
        true
    }

    /// `optimize` followed by refactor-and-resume until no further pivots occur.
    fn optimize_refactored(&mut self, c: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        self.set_objective(c);
        self.optimize(allowed)?;
        for _ in 0..10 {
            if !self.refactor() {
                return Ok(());
            }
            self.set_objective(c);
            let before = self.iterations;
            self.optimize(allowed)?;
            if self.iterations == before {
                break;
            }
        }
        Ok(())
    }

    fn set_objective(&mut self, c: &[f64]) {
        // maximize c^T x: reduced costs z_j - c_j with z computed from the basis
        let cols = self.cols();
        let mut obj = vec![0.0; cols + 1];
        for (j, slot) in obj.iter_mut().enumerate().take(cols) {
            *slot = -c.get(j).copied().unwrap_or(0.0);
        }
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = c.get(bj).copied().unwrap_or(0.0);
            if cb != 0.0 {
                obj.iter_mut().zip(&self.rows[i]).for_each(|(v, a)| *v += cb * a);
            }
        }
        self.obj = obj;
    }
}

pub fn solve_lp(c: &[f64], a: &[Vec<f64>], senses: &[Sense], b: &[f64], objective: Objective) -> Result<LpSolution> {
    let nv = c.len();
    let m = a.len();
    if senses.len() != m || b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: senses.len().min(b.len()) });
    }
    if let Some(row) = a.iter().find(|row| row.len() != nv) {
        return Err(Error::DimensionMismatch { expected: nv, got: row.len() });
    }
    // normalize to b >= 0
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(m);
    for i in 0..m {
        if b[i] < 0.0 {
            let flipped = match senses[i] {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            rows.push((a[i].iter().map(|v| -v).collect(), flipped, -b[i]));
        } else {
            rows.push((a[i].clone(), senses[i], b[i]));
        }
    }
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = nv + n_slack + n_art;
    let art_start = nv + n_slack;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        obj: vec![0.0; cols + 1],
        basis: Vec::with_capacity(m),
        iterations: 0,
        original: Vec::new(),
        row_ids: (0..m).collect(),
    };
    let (mut s, mut t) = (nv, art_start);
    for (coeffs, sense, rhs) in rows {
        let mut row = vec![0.0; cols + 1];
        row[..nv].copy_from_slice(&coeffs);
        row[cols] = rhs;
        match sense {
            Sense::Le => {
                row[s] = 1.0;
                tab.basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                s += 1;
                row[t] = 1.0;
                tab.basis.push(t);
                t += 1;
            }
            Sense::Eq => {
                row[t] = 1.0;
                tab.basis.push(t);
                t += 1;
            }
        }
        tab.rows.push(row);
    }
    tab.original = tab.rows.clone();

    if n_art > 0 {
        // phase 1: maximize -sum(artificials)
        let mut c1 = vec![0.0; cols];
        c1[art_start..].iter_mut().for_each(|v| *v = -1.0);
        tab.optimize_refactored(&c1, &|_| true)?;
        let infeas = -tab.obj[cols];
        let scale = 1.0 + b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if infeas > 1e-9 * scale {
            return Err(Error::Lp("infeasible".into()));
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| tab.rows[r][j].abs() > 1e-9) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        // redundant row
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        tab.row_ids.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let sign = if objective == Objective::Maximize { 1.0 } else { -1.0 };
    let c2: Vec<f64> = c.iter().map(|v| sign * v).collect();
    tab.optimize_refactored(&c2, &|j| j < art_start)?;

    let mut x = vec![0.0; nv];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < nv {
            x[bj] = tab.rows[i][cols];
        }
    }
    let objective_value: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let mut max_violation = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
    for i in 0..m {
        let lhs: f64 = a[i].iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
        let v = match senses[i] {
            Sense::Le => lhs - b[i],
            Sense::Ge => b[i] - lhs,
            Sense::Eq => (lhs - b[i]).abs(),
        };
        max_violation = max_violation.max(v);
    }
    Ok(LpSolution { x, objective: objective_value, iterations: tab.iterations, max_violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable() {
        let s = solve_lp(&[1.0], &[vec![1.0]], &[Sense::Le], &[1.0], Objective::Maximize).unwrap();
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.x, vec![1.0]);
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let s = solve_lp(&[3.0, 5.0], &a, &[Sense::Le; 3], &[4.0, 12.0, 18.0], Objective::Maximize).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn phase_one_min() {
        // min x + y, x + 2y >= 4, 3x + y >= 6 -> 2.8 at (1.6, 1.2)
        let a = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        let s = solve_lp(&[1.0, 1.0], &a, &[Sense::Ge; 2], &[4.0, 6.0], Objective::Minimize).unwrap();
        assert!((s.objective - 2.8).abs() < 1e-9);
        assert!(s.max_violation < 1e-9);
    }

    #[test]
    fn equality_and_statuses() {
        let s = solve_lp(&[1.0, 2.0], &[vec![1.0, 1.0]], &[Sense::Eq], &[3.0], Objective::Maximize).unwrap();
        assert!((s.objective - 6.0).abs() < 1e-12);
        assert_eq!(
            solve_lp(&[1.0], &[vec![1.0]], &[Sense::Ge], &[1.0], Objective::Maximize),
            Err(Error::Lp("unbounded".into()))
        );
        assert_eq!(
            solve_lp(&[1.0], &[vec![1.0], vec![1.0]], &[Sense::Le, Sense::Ge], &[1.0, 2.0], Objective::Maximize),
            Err(Error::Lp("infeasible".into()))
        );
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland terminates.
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0],
            vec![0.5, -90.0, -0.02, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let s = solve_lp(&[0.75, -150.0, 0.02, -6.0], &a, &[Sense::Le; 3], &[0.0, 0.0, 1.0], Objective::Maximize).unwrap();
        assert!((s.objective - 0.05).abs() < 1e-9);
    }
}
