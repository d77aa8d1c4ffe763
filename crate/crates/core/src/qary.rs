//! Polynomials on the q-ary cube `{0, .., q-1}^n`, brute-force minimization
//! and the symmetrized inner bound on Hamming weight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube;
use crate::error::{Error, Result};
use crate::inner::{self, InnerBoundResult};
use crate::krawtchouk::{self, DiscreteMeasure};

/// Coefficients of `x^e` modulo `x (x-1) ... (x-q+1)`, as a polynomial of
/// degree `< q` (index = power).
fn reduce_power(e: usize, q: usize) -> Vec<f64> {
    // vanishing polynomial coefficients, monic of degree q
    let mut van = vec![1.0];
    for j in 0..q {
        let mut next = vec![0.0; van.len() + 1];
        for (i, &c) in van.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= j as f64 * c;
        }
        van = next;
    }
    let mut p = vec![0.0; e.max(q) + 1];
    p[e] = 1.0;
    for top in (q..=e).rev() {
        let c = p[top];
        if c != 0.0 {
            for (i, &v) in van.iter().enumerate() {
                p[top - q + i] -= c * v;
            }
        }
    }
    p.truncate(q);
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct QaryPolynomial {
    n: usize,
    q: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl QaryPolynomial {
    /// Builds `sum coef * prod x_i^{e_i}` with arbitrary exponents, reduced so
    /// every exponent is `<= q-1`.
    pub fn from_terms<I: IntoIterator<Item = (Vec<usize>, f64)>>(n: usize, q: usize, terms: I) -> Result<Self> {
        if q < 2 {
            return Err(Error::OutOfRange(format!("q = {} must be at least 2", q)));
        }
        let mut out = QaryPolynomial { n, q, terms: BTreeMap::new() };
        for (exps, coef) in terms {
            if exps.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: exps.len() });
            }
            if !coef.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient {}", coef)));
            }
            let mut partial: Vec<(Vec<usize>, f64)> = vec![(Vec::with_capacity(n), coef)];
            for &e in &exps {
                let red = reduce_power(e, q);
                partial = partial
                    .into_iter()
                    .flat_map(|(prefix, c)| {
                        red.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(p, v)| {
                            let mut ex = prefix.clone();
                            ex.push(p);
                            (ex, c * v)
                        })
                    })
                    .collect();
            }
            for (ex, c) in partial {
                *out.terms.entry(ex).or_insert(0.0) += c;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        Ok(out)
    }

    pub fn constant(n: usize, q: usize, c: f64) -> Result<Self> {
        Self::from_terms(n, q, [(vec![0; n], c)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.terms
    }

    pub fn evaluate(&self, x: &[usize]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if let Some(&v) = x.iter().find(|&&v| v >= self.q) {
            return Err(Error::OutOfRange(format!("coordinate {} outside 0..{}", v, self.q)));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[usize]) -> f64 {
        self.terms
            .iter()
            .map(|(ex, c)| c * ex.iter().zip(x).map(|(&e, &xi)| (xi as f64).powi(e as i32)).product::<f64>())
            .sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QaryTermJson {
    pub exps: Vec<usize>,
    pub coef: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QaryPolyJson {
    pub n: usize,
    pub q: usize,
    pub terms: Vec<QaryTermJson>,
}

pub fn parse_qary_polynomial(json: &str) -> Result<QaryPolynomial> {
    let p: QaryPolyJson = serde_json::from_str(json)?;
    QaryPolynomial::from_terms(p.n, p.q, p.terms.into_iter().map(|t| (t.exps, t.coef))).map_err(|e| Error::Parse(e.to_string()))
}

fn point_count(n: usize, q: usize) -> Result<usize> {
    let cap = cube::enumeration_cap();
    let too_big = Error::CapExceeded { n, cap };
    let total = q.checked_pow(n as u32).ok_or(too_big.clone())?;
    if total > 1usize << cap {
        return Err(too_big);
    }
    Ok(total)
}

/// Exact minimum over `{0..q-1}^n`; among ties the lexicographically smallest
/// point (first coordinate most significant) wins.
pub fn qary_brute_min(f: &QaryPolynomial) -> Result<(f64, Vec<usize>)> {
    let (n, q) = (f.n, f.q);
    let total = point_count(n, q)?;
    // powers[i][x][e] = x^e, precomputed per variable
    let pow: Vec<Vec<f64>> = (0..q).map(|x| (0..q).map(|e| (x as f64).powi(e as i32)).collect()).collect();
    let terms: Vec<(&Vec<usize>, f64)> = f.terms.iter().map(|(e, &c)| (e, c)).collect();
    let mut x = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..total {
        let v: f64 = terms.iter().map(|(ex, c)| c * ex.iter().zip(&x).map(|(&e, &xi)| pow[xi][e]).product::<f64>()).sum();
        let better = match &best {
            None => true,
            Some((b, _)) => v < *b - 1e-12 * (1.0 + b.abs()),
        };
        if better {
            best = Some((v, x.clone()));
        }
        // odometer with the last coordinate fastest
        for i in (0..n).rev() {
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
        }
    }
    Ok(best.unwrap_or((0.0, Vec::new())))
}

/// Inner bound for a function of Hamming weight `F(t)`, `t = 0..=n`, with the
/// q-ary weight distribution `(q-1)^t binom(n,t) / q^n`.
pub fn qary_inner_symmetrized(f: &[f64], q: usize, r: usize) -> Result<InnerBoundResult> {
    if f.is_empty() {
        return Err(Error::InvalidInput("empty weight profile".into()));
    }
    let measure = DiscreteMeasure::new(f.len() - 1, q)?;
    inner::inner_univariate(f, &measure, r)
}

/// Weight profile `d - sum_{i=1..=d} K^_{i,q}(t)`, `t = 0..=n`.
pub fn harmonic_estimator(n: usize, q: usize, d: usize) -> Vec<f64> {
    let table = krawtchouk::kraw_table(n, q, d);
    (0..=n).map(|t| d as f64 - (1..=d).map(|i| table[i][t]).sum::<f64>()).collect()
}

/// One CSV row of a `phi_q` sweep. Curve rows leave `n`, `r` and
/// `xi_over_n` empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiRow {
    pub q: usize,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub t: f64,
    pub phi_q: f64,
    pub xi_over_n: Option<f64>,
}

pub const PHI_CURVE_POINTS: usize = 200;

/// `phi_q` on a uniform grid of `[0, (q-1)/q]` for each `q`, followed by
/// measured `xi^n_{r,q}/n` for each `n` and each `r` (all `r` with
/// `r/n <= (q-1)/q` when `r_grid` is `None`).
pub fn phi_q_sweep(q_list: &[usize], n_list: &[usize], r_grid: Option<&[usize]>) -> Result<Vec<PhiRow>> {
    let mut rows = Vec::new();
    for &q in q_list {
        let top = (q as f64 - 1.0) / q as f64;
        for j in 0..PHI_CURVE_POINTS {
            let t = top * j as f64 / (PHI_CURVE_POINTS - 1) as f64;
            rows.push(PhiRow { q, n: None, r: None, t, phi_q: krawtchouk::levenshtein_phi(t, q)?, xi_over_n: None });
        }
    }
    for &q in q_list {
        let top = (q as f64 - 1.0) / q as f64;
        for &n in n_list {
            let rs: Vec<usize> = match r_grid {
                Some(g) => g.iter().copied().filter(|&r| r >= 1 && r <= n).collect(),
                None => (1..=n).filter(|&r| r as f64 / n as f64 <= top).collect(),
            };
            for r in rs {
                let t = r as f64 / n as f64;
                let phi = if t <= top { krawtchouk::levenshtein_phi(t, q)? } else { f64::NAN };
                let xi = krawtchouk::least_root(n, q, r)?;
                rows.push(PhiRow { q, n: Some(n), r: Some(r), t, phi_q: phi, xi_over_n: Some(xi / n as f64) });
            }
        }
    }
    Ok(rows)
}
