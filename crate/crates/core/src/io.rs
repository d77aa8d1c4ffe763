//! JSON file formats. Variable, row and vertex indices are 1-based on disk.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};

use crate::cube::{bitstring_to_mask, mask_to_bitstring, CubePolynomial, FourierPolynomial};
use crate::error::{Error, Result};
use crate::matrix::MatrixPolynomial;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub vars: Vec<usize>,
    pub coef: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FourierTermJson {
    pub a: String,
    pub coef: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<Vec<FourierTermJson>>,
}

fn terms_to_poly(n: usize, terms: &[TermJson]) -> Result<CubePolynomial> {
    let mut zero_based = Vec::with_capacity(terms.len());
    for t in terms {
        let vars = t
            .vars
            .iter()
            .map(|&v| {
                if v == 0 || v > n {
                    Err(Error::Parse(format!("variable index {} outside 1..={}", v, n)))
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        zero_based.push((vars, t.coef));
    }
    CubePolynomial::from_terms(n, zero_based)
}

impl PolyJson {
    pub fn to_polynomial(&self) -> Result<CubePolynomial> {
        if self.n == 0 || self.n > 63 {
            return Err(Error::Parse(format!("n = {} must be in 1..=63", self.n)));
        }
        match (&self.terms, &self.fourier) {
            (Some(terms), None) => terms_to_poly(self.n, terms),
            (None, Some(fourier)) => {
                let mut coeffs = Vec::with_capacity(fourier.len());
                for t in fourier {
                    if t.a.len() != self.n {
                        return Err(Error::Parse(format!("bitstring {:?} does not have length {}", t.a, self.n)));
                    }
                    if !t.coef.is_finite() {
                        return Err(Error::Parse(format!("non-finite coefficient {}", t.coef)));
                    }
                    coeffs.push((bitstring_to_mask(&t.a)?, t.coef));
                }
                Ok(FourierPolynomial::from_coeffs(self.n, coeffs).to_cube())
            }
            _ => Err(Error::Parse("expected exactly one of \"terms\" or \"fourier\"".into())),
        }
    }

    pub fn from_polynomial(p: &CubePolynomial) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(&m, &c)| TermJson { vars: (0..p.n()).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect(), coef: c })
            .collect();
        PolyJson { n: p.n(), terms: Some(terms), fourier: None }
    }

    pub fn from_fourier(f: &FourierPolynomial) -> Self {
        let fourier = f
            .coeffs()
            .iter()
            .map(|(&a, &c)| FourierTermJson { a: mask_to_bitstring(a, f.n()), coef: c })
            .collect();
        PolyJson { n: f.n(), terms: None, fourier: Some(fourier) }
    }
}

pub fn parse_polynomial(json: &str) -> Result<CubePolynomial> {
    serde_json::from_str::<PolyJson>(json)?.to_polynomial()
}

pub fn polynomial_to_json(p: &CubePolynomial) -> String {
    serde_json::to_string(&PolyJson::from_polynomial(p)).expect("plain data serializes")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixEntryJson {
    pub i: usize,
    pub j: usize,
    pub poly: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<MatrixEntryJson>,
}

pub fn parse_matrix_polynomial(json: &str) -> Result<MatrixPolynomial> {
    let m: MatrixJson = serde_json::from_str(json)?;
    if m.n == 0 || m.n > 63 {
        return Err(Error::Parse(format!("n = {} must be in 1..=63", m.n)));
    }
    let mut entries = Vec::with_capacity(m.entries.len());
    for e in &m.entries {
        if e.i == 0 || e.j == 0 || e.i > m.k || e.j > m.k {
            return Err(Error::Parse(format!("entry ({}, {}) outside 1..={}", e.i, e.j, m.k)));
        }
        entries.push((e.i - 1, e.j - 1, terms_to_poly(m.n, &e.poly)?));
    }
    MatrixPolynomial::from_entries(m.n, m.k, entries)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// A graph as 0-based edges with weights (unit when absent).
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn parse_graph(json: &str) -> Result<Graph> {
    let g: GraphJson = serde_json::from_str(json)?;
    if let Some(w) = &g.weights {
        if w.len() != g.edges.len() {
            return Err(Error::Parse(format!("{} weights for {} edges", w.len(), g.edges.len())));
        }
    }
    let mut edges = Vec::with_capacity(g.edges.len());
    for (idx, &[i, j]) in g.edges.iter().enumerate() {
        if i == 0 || j == 0 || i > g.n || j > g.n {
            return Err(Error::Parse(format!("edge ({}, {}) outside 1..={}", i, j, g.n)));
        }
        let w = g.weights.as_ref().map_or(1.0, |w| w[idx]);
        edges.push((i - 1, j - 1, w));
    }
    Ok(Graph { n: g.n, edges })
}

pub fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}
