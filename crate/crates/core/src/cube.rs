//! Polynomials on the boolean cube {0,1}^n.
//!
//! A [`CubePolynomial`] is stored in the multilinear monomial basis: since
//! `x_i^2 = x_i` on the cube, every monomial is identified with the subset of
//! variables it contains, encoded as a bitmask (bit `i` is variable `i + 1`).
//! A [`FourierPolynomial`] stores the same function in the character basis
//! `chi_a(x) = (-1)^{a.x}`, which is orthonormal for the uniform measure.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Subset of `[n]` / point of the cube, bit `i` standing for coordinate `i + 1`.
pub type Mask = u64;

/// Default upper bound on `n` for anything that enumerates the cube.
pub const DEFAULT_MAX_N: usize = 24;

static ENUMERATION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_N);

/// Current cap on `n` for exhaustive enumeration and dense transforms.
pub fn enumeration_cap() -> usize {
    ENUMERATION_CAP.load(Ordering::Relaxed)
}

/// Sets the enumeration cap (clamped to 30, the largest cube we index densely).
pub fn set_enumeration_cap(cap: usize) {
    ENUMERATION_CAP.store(cap.min(30), Ordering::Relaxed);
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    let cap = enumeration_cap();
    if n > cap {
        Err(Error::CapExceeded { n, cap })
    } else {
        Ok(())
    }
}

#[inline]
pub fn weight(a: Mask) -> usize {
    a.count_ones() as usize
}

/// `chi_a(x) = (-1)^{a.x}`.
#[inline]
pub fn character(a: Mask, x: Mask) -> f64 {
    if (a & x).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Key under which masks compare like their bitstrings (coordinate 1 leftmost).
#[inline]
pub fn lex_key(x: Mask, n: usize) -> Mask {
    if n == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - n)
    }
}

pub fn mask_to_point(x: Mask, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((x >> i) & 1) as u8).collect()
}

pub fn point_to_mask(x: &[u8]) -> Result<Mask> {
    if x.len() > 63 {
        return Err(Error::OutOfRange(format!("dimension {} exceeds 63", x.len())));
    }
    x.iter().enumerate().try_fold(0, |acc, (i, &b)| match b {
        0 => Ok(acc),
        1 => Ok(acc | (1 << i)),
        _ => Err(Error::InvalidInput(format!("coordinate {} is {}, expected 0 or 1", i + 1, b))),
    })
}

pub fn mask_to_bitstring(x: Mask, n: usize) -> String {
    (0..n).map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn bitstring_to_mask(s: &str) -> Result<Mask> {
    if s.len() > 63 {
        return Err(Error::Parse(format!("bitstring of length {} is too long", s.len())));
    }
    s.chars().enumerate().try_fold(0, |acc, (i, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        _ => Err(Error::Parse(format!("invalid bitstring {:?}", s))),
    })
}

/// All masks of weight at most `r`, sorted by weight then value.
pub fn masks_up_to_weight(n: usize, r: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    for k in 0..=r.min(n) {
        out.extend(masks_of_weight(n, k));
    }
    out
}

/// All masks over `n` bits with exactly `k` ones, in increasing order.
pub fn masks_of_weight(n: usize, k: usize) -> Vec<Mask> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: Mask = (1 << k) - 1;
    let limit: Mask = 1 << n;
    while v < limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount.
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// In-place unnormalized Walsh-Hadamard transform, `out[a] = sum_x in[x] chi_a(x)`.
pub fn fwht(values: &mut [f64]) {
    let len = values.len();
    assert!(len.is_power_of_two(), "fwht length must be a power of two");
    let mut h = 1;
    while h < len {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*u, *v);
                *u = a + b;
                *v = a - b;
            }
        }
        h *= 2;
    }
}

/// A real polynomial on {0,1}^n in the multilinear monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CubePolynomial {
    n: usize,
    terms: BTreeMap<Mask, f64>,
}

impl CubePolynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n <= 63, "at most 63 variables are supported");
        CubePolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(0, c);
        p
    }

    /// Builds a polynomial from monomials given as lists of 0-based variable
    /// indices. Repeated variables collapse (`x_i^2 = x_i`).
    pub fn from_terms<I, V>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: AsRef<[usize]>,
    {
        if n > 63 {
            return Err(Error::OutOfRange(format!("n = {} exceeds 63", n)));
        }
        let mut p = Self::zero(n);
        for (vars, coef) in terms {
            if !coef.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient {}", coef)));
            }
            let mut mask = 0;
            for &v in vars.as_ref() {
                if v >= n {
                    return Err(Error::OutOfRange(format!("variable index {} >= n = {}", v, n)));
                }
                mask |= 1 << v;
            }
            p.add_term(mask, coef);
        }
        Ok(p)
    }

    pub fn from_masks<I: IntoIterator<Item = (Mask, f64)>>(n: usize, terms: I) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            assert!(n == 64 || m >> n == 0, "monomial outside the variable range");
            p.add_term(m, c);
        }
        p
    }

    /// `sum_i x_i`, the Hamming weight.
    pub fn hamming_weight(n: usize) -> Self {
        Self::from_masks(n, (0..n).map(|i| (1 << i, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Mask, f64> {
        &self.terms
    }

    pub fn coefficient(&self, monomial: Mask) -> f64 {
        self.terms.get(&monomial).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest monomial size; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|&m| weight(m)).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, monomial: Mask, coef: f64) {
        let e = self.terms.entry(monomial).or_insert(0.0);
        *e += coef;
        if *e == 0.0 {
            self.terms.remove(&monomial);
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_masks(self.n, self.terms.iter().map(|(&m, &c)| (m, c * s)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut p = self.clone();
        for (&m, &c) in &other.terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn plus_constant(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.add_term(0, c);
        p
    }

    pub fn evaluate(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.eval_mask(point_to_mask(x)?))
    }

    pub fn eval_mask(&self, x: Mask) -> f64 {
        self.terms.iter().filter(|(&m, _)| m & x == m).map(|(_, &c)| c).sum()
    }

    /// Values at all `2^n` points (index = point mask), by a subset-sum
    /// (zeta) transform over the coefficient table.
    pub fn values(&self) -> Result<Vec<f64>> {
        check_cap(self.n)?;
        let mut table = vec![0.0; 1 << self.n];
        for (&m, &c) in &self.terms {
            table[m as usize] = c;
        }
        for i in 0..self.n {
            let bit = 1 << i;
            for x in 0..table.len() {
                if x & bit != 0 {
                    table[x] += table[x ^ bit];
                }
            }
        }
        Ok(table)
    }
}

/// A polynomial on {0,1}^n in the character basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierPolynomial {
    n: usize,
    coeffs: BTreeMap<Mask, f64>,
}

impl FourierPolynomial {
    pub fn zero(n: usize) -> Self {
        FourierPolynomial { n, coeffs: BTreeMap::new() }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (Mask, f64)>>(n: usize, coeffs: I) -> Self {
        let mut f = Self::zero(n);
        for (a, c) in coeffs {
            if c != 0.0 {
                *f.coeffs.entry(a).or_insert(0.0) += c;
            }
        }
        f.coeffs.retain(|_, c| *c != 0.0);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Mask, f64> {
        &self.coeffs
    }

    pub fn coefficient(&self, a: Mask) -> f64 {
        self.coeffs.get(&a).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|&a| weight(a)).max().unwrap_or(0)
    }

    pub fn eval_mask(&self, x: Mask) -> f64 {
        self.coeffs.iter().map(|(&a, &c)| c * character(a, x)).sum()
    }

    /// Values at all points by the inverse (unnormalized) transform.
    pub fn values(&self) -> Result<Vec<f64>> {
        check_cap(self.n)?;
        let mut table = vec![0.0; 1 << self.n];
        for (&a, &c) in &self.coeffs {
            table[a as usize] = c;
        }
        fwht(&mut table);
        Ok(table)
    }

    /// Back to the monomial basis using `chi_a = prod_{i in a} (1 - 2 x_i)`.
    pub fn to_cube(&self) -> CubePolynomial {
        let mut p = CubePolynomial::zero(self.n);
        for (&a, &c) in &self.coeffs {
            // enumerate subsets s of a
            let mut s = a;
            loop {
                let sign = if weight(s) % 2 == 0 { 1.0 } else { -1.0 };
                p.add_term(s, c * sign * (1u64 << weight(s)) as f64);
                if s == 0 {
                    break;
                }
                s = (s - 1) & a;
            }
        }
        p
    }

    /// Mean of `p^2` under the uniform measure (Parseval).
    pub fn squared_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }
}

/// Character-basis transform, `p_hat(a) = 2^{-n} sum_x p(x) chi_a(x)`.
///
/// Coefficients of weight above `deg p` vanish identically and are not stored;
/// entries below `1e-14` of the largest value are treated as round-off.
pub fn fourier_transform(p: &CubePolynomial) -> Result<FourierPolynomial> {
    let mut table = p.values()?;
    let scale = table.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    fwht(&mut table);
    let inv = 1.0 / table.len() as f64;
    let deg = p.degree();
    let cutoff = 1e-14 * scale;
    let coeffs = table
        .iter()
        .enumerate()
        .filter(|&(a, &v)| weight(a as Mask) <= deg && (v * inv).abs() > cutoff)
        .map(|(a, &v)| (a as Mask, v * inv));
    Ok(FourierPolynomial::from_coeffs(p.n(), coeffs))
}

/// The harmonic decomposition `p = p_0 + ... + p_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicDecomposition {
    pub parts: Vec<FourierPolynomial>,
}

impl HarmonicDecomposition {
    pub fn degree(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    /// `sum_k scale[k] * p_k`; parts with no scale entry are dropped.
    pub fn combine(&self, scale: &[f64]) -> FourierPolynomial {
        let n = self.parts.first().map_or(0, |p| p.n());
        FourierPolynomial::from_coeffs(
            n,
            self.parts
                .iter()
                .zip(scale)
                .flat_map(|(part, &s)| part.coeffs().iter().map(move |(&a, &c)| (a, s * c))),
        )
    }

    pub fn sum(&self) -> FourierPolynomial {
        self.combine(&vec![1.0; self.parts.len()])
    }
}

pub fn harmonic_parts(p: &CubePolynomial) -> Result<HarmonicDecomposition> {
    let f = fourier_transform(p)?;
    let d = p.degree();
    let mut parts: Vec<Vec<(Mask, f64)>> = vec![Vec::new(); d + 1];
    for (&a, &c) in f.coeffs() {
        parts[weight(a)].push((a, c));
    }
    Ok(HarmonicDecomposition {
        parts: parts.into_iter().map(|v| FourierPolynomial::from_coeffs(p.n(), v)).collect(),
    })
}

/// `max_x |p(x)|` by exhaustive enumeration.
pub fn sup_norm(p: &CubePolynomial) -> Result<f64> {
    Ok(p.values()?.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Exact minimum over the cube and a minimizer.
///
/// Values within `1e-12 (1 + |min|)` of the minimum count as ties; among
/// those the lexicographically smallest bitstring is returned.
pub fn brute_force_min(p: &CubePolynomial) -> Result<(f64, Vec<u8>)> {
    let values = p.values()?;
    let (x, v) = argmin_lex(&values, p.n());
    Ok((v, mask_to_point(x, p.n())))
}

pub(crate) fn argmin_lex(values: &[f64], n: usize) -> (Mask, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + min.abs());
    let best = (0..values.len() as Mask)
        .filter(|&x| values[x as usize] <= min + tol)
        .min_by_key(|&x| lex_key(x, n))
        .unwrap_or(0);
    (best, min)
}

/// `q(x) = p(x xor x0)`, i.e. substitute `x_i -> 1 - x_i` wherever `x0_i = 1`.
pub fn translate_to_zero(p: &CubePolynomial, x0: &[u8]) -> Result<CubePolynomial> {
    if x0.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), got: x0.len() });
    }
    Ok(translate_mask(p, point_to_mask(x0)?))
}

pub(crate) fn translate_mask(p: &CubePolynomial, x0: Mask) -> CubePolynomial {
    let mut q = CubePolynomial::zero(p.n());
    for (&s, &c) in p.terms() {
        let fixed = s & !x0;
        let flipped = s & x0;
        // prod_{i in flipped} (1 - x_i) = sum_{t subset flipped} (-1)^{|t|} x^t
        let mut t = flipped;
        loop {
            let sign = if weight(t) % 2 == 0 { 1.0 } else { -1.0 };
            q.add_term(fixed | t, sign * c);
            if t == 0 {
                break;
            }
            t = (t - 1) & flipped;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2_cut() -> CubePolynomial {
        CubePolynomial::from_terms(2, [(vec![0], -1.0), (vec![1], -1.0), (vec![0, 1], 2.0)]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = CubePolynomial::from_terms(2, [(vec![0], 1.0), (vec![1], 1.0), (vec![0, 1], -1.0)]).unwrap();
        assert_eq!(p.evaluate(&[1, 1]).unwrap(), 1.0);
        assert_eq!(CubePolynomial::zero(3).evaluate(&[1, 0, 1]).unwrap(), 0.0);
        assert_eq!(k2_cut().evaluate(&[1, 0]).unwrap(), -1.0);
        assert!(matches!(p.evaluate(&[1]), Err(Error::DimensionMismatch { .. })));
        assert!(p.evaluate(&[2, 0]).is_err());
    }

    #[test]
    fn repeated_variables_collapse() {
        let p = CubePolynomial::from_terms(3, [(vec![0, 0, 2], 1.5), (vec![2, 0], 0.5)]).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.coefficient(0b101), 2.0);
        assert_eq!(p.degree(), 2);
        let z = CubePolynomial::from_terms(2, [(vec![0], 1.0), (vec![0, 0], -1.0)]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn fourier_examples() {
        let one = fourier_transform(&CubePolynomial::constant(3, 1.0)).unwrap();
        assert_eq!(one.coeffs().len(), 1);
        assert_eq!(one.coefficient(0), 1.0);

        let x1 = CubePolynomial::from_terms(1, [(vec![0], 1.0)]).unwrap();
        let f = fourier_transform(&x1).unwrap();
        assert_eq!(f.coefficient(0), 0.5);
        assert_eq!(f.coefficient(1), -0.5);
    }

    #[test]
    fn harmonic_parts_of_x1() {
        let x1 = CubePolynomial::from_terms(2, [(vec![0], 1.0)]).unwrap();
        let h = harmonic_parts(&x1).unwrap();
        assert_eq!(h.parts.len(), 2);
        assert_eq!(h.parts[0].coefficient(0), 0.5);
        assert_eq!(h.parts[1].coefficient(0b01), -0.5);
        assert_eq!(h.parts[1].coeffs().len(), 1);
    }

    #[test]
    fn sup_norm_and_min_examples() {
        assert_eq!(sup_norm(&CubePolynomial::hamming_weight(5)).unwrap(), 5.0);
        assert_eq!(sup_norm(&k2_cut()).unwrap(), 1.0);
        let (v, x) = brute_force_min(&k2_cut()).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(x, vec![0, 1]);
        let (v, x) = brute_force_min(&CubePolynomial::hamming_weight(4)).unwrap();
        assert_eq!((v, x), (0.0, vec![0, 0, 0, 0]));
        let (v, x) = brute_force_min(&CubePolynomial::constant(3, 2.5)).unwrap();
        assert_eq!((v, x), (2.5, vec![0, 0, 0]));
    }

    #[test]
    fn translate_examples() {
        let x1 = CubePolynomial::from_terms(2, [(vec![0], 1.0)]).unwrap();
        assert_eq!(translate_to_zero(&x1, &[0, 0]).unwrap(), x1);
        let q = translate_to_zero(&x1, &[1, 0]).unwrap();
        assert_eq!(q, CubePolynomial::from_terms(2, [(vec![], 1.0), (vec![0], -1.0)]).unwrap());
        assert!(translate_to_zero(&x1, &[1]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let p = CubePolynomial::hamming_weight(40);
        assert!(matches!(sup_norm(&p), Err(Error::CapExceeded { n: 40, .. })));
    }

    #[test]
    fn bitstrings_put_coordinate_one_first() {
        assert_eq!(mask_to_bitstring(0b001, 3), "100");
        assert_eq!(bitstring_to_mask("011").unwrap(), 0b110);
        assert!(bitstring_to_mask("01x").is_err());
        assert!(lex_key(0b10, 2) < lex_key(0b01, 2));
    }

    #[test]
    fn gosper_enumeration_counts() {
        assert_eq!(masks_of_weight(6, 3).len(), 20);
        assert_eq!(masks_up_to_weight(5, 2).len(), 16);
        assert!(masks_of_weight(6, 3).iter().all(|&m| weight(m) == 3 && m < 64));
    }
}
