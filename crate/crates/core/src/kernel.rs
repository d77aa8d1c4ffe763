//! Explicit sum-of-squares certificates from zonal kernels
//! `K(x, y) = u^2(d(x, y))`.
//!
//! For `g = (f(x + x0) - f_min) / s` with range `s`, the weights
//! `w = 2^-n K^-1 (g + delta)` are nonnegative once `delta >= gamma_d Lambda`,
//! and then `g + delta = sum_y w_y u^2(d(x, y))` is a sum of squares of degree
//! `2r` on the cube.

use serde::Serialize;

use crate::cube::{self, CubePolynomial, Mask};
use crate::error::{Error, Result};
use crate::gamma;
use crate::inner;
use crate::instances::{self, CoeffDist};
use crate::krawtchouk::{self, orthonormal_vectors, DiscreteMeasure};
use crate::outer::{self, OuterOptions};

/// Weights in `[-WEIGHT_CLAMP, 0)` are treated as round-off and set to 0.
pub const WEIGHT_CLAMP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Coefficients of `u` in the omega-orthonormal Krawtchouk basis.
    pub u_coeffs: Vec<f64>,
    /// `u^2(t)` for `t = 0..=n`.
    pub u_sq: Vec<f64>,
    /// `lambda_0..=lambda_min(2r, n)`; higher ones vanish.
    pub lambda: Vec<f64>,
    pub lambda_tilde: f64,
    /// `sum_{i=1..=d} |1/lambda_i - 1|`, infinite if some `lambda_i = 0`.
    pub lambda_sum: f64,
    /// `gamma_d * lambda_sum`.
    pub delta: f64,
}

impl KernelSpec {
    pub fn lambda_at(&self, k: usize) -> f64 {
        self.lambda.get(k).copied().unwrap_or(0.0)
    }

    /// A-priori bound on `lambda_sum`: `2 lambda_tilde` when
    /// `lambda_tilde <= 1/2`, or `lambda_tilde / (1 - lambda_tilde)` in sharp
    /// mode for any `lambda_tilde < 1`. `None` outside the valid range.
    pub fn predicted_lambda_sum(&self, sharp: bool) -> Option<f64> {
        let lt = self.lambda_tilde;
        if sharp && lt < 1.0 {
            Some(lt.max(0.0) / (1.0 - lt))
        } else if lt <= 0.5 {
            Some(2.0 * lt.max(0.0))
        } else {
            None
        }
    }
}

/// Picks `u` of degree `r` minimizing `<g, u^2>` with
/// `g(t) = d - sum_{i=1..=d} K^_i(t)` under `<1, u^2> = 1`.
pub fn choose_kernel(n: usize, d: usize, r: usize) -> Result<KernelSpec> {
    if 2 * r < d {
        return Err(Error::OrderTooSmall { r, degree: d });
    }
    if r > n {
        return Err(Error::OutOfRange(format!("order r = {} exceeds n = {}", r, n)));
    }
    let measure = DiscreteMeasure::binary(n);
    let top = (2 * r).min(n);
    let table = krawtchouk::kraw_table(n, 2, top.max(d));
    let g: Vec<f64> = (0..=n).map(|t| d as f64 - (1..=d).map(|i| table[i][t]).sum::<f64>()).collect();
    let res = inner::inner_univariate(&g, &measure, r)?;
    let mut c = res.density_coeffs;
    // fix the sign so runs are reproducible
    if c.iter().find(|v| v.abs() > 1e-12).is_some_and(|&v| v < 0.0) {
        c.iter_mut().for_each(|v| *v = -*v);
    }
    let vecs = orthonormal_vectors(&measure, r);
    // phi(t) = u(t) sqrt(omega(t))
    let phi_sq: Vec<f64> = (0..=n).map(|t| (0..=r).map(|k| c[k] * vecs[k][t]).sum::<f64>().powi(2)).collect();
    let u_sq: Vec<f64> = (0..=n).map(|t| phi_sq[t] / measure.weight(t)).collect();
    let lambda: Vec<f64> = (0..=top).map(|i| (0..=n).map(|t| phi_sq[t] * table[i][t]).sum()).collect();
    let lambda_at = |i: usize| lambda.get(i).copied().unwrap_or(0.0);
    let lambda_sum = if (1..=d).any(|i| lambda_at(i) == 0.0) {
        f64::INFINITY
    } else {
        (1..=d).map(|i| (1.0 / lambda_at(i) - 1.0).abs()).sum()
    };
    let delta = if d == 0 { 0.0 } else { gamma::gamma(d) * lambda_sum };
    Ok(KernelSpec { n, d, r, u_coeffs: c, u_sq, lambda, lambda_tilde: res.value.max(0.0), lambda_sum, delta })
}

/// Harmonic scaling `sum_k lambda_k^{+-1} p_k`.
pub fn funk_hecke_apply(spec: &KernelSpec, p: &CubePolynomial, invert: bool) -> Result<CubePolynomial> {
    if p.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: p.n() });
    }
    let parts = cube::harmonic_parts(p)?;
    let deg = parts.degree();
    let mut scale = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let l = spec.lambda_at(k);
        if invert {
            if l == 0.0 {
                return Err(Error::SingularOperator { k });
            }
            scale.push(1.0 / l);
        } else {
            scale.push(l);
        }
    }
    Ok(parts.combine(&scale).to_cube())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightJson {
    pub y: String,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SosCubeCertificate {
    /// Shift in normalized units: `g + delta` is certified.
    pub delta: f64,
    pub r: usize,
    pub d: usize,
    pub n: usize,
    pub u_coeffs: Vec<f64>,
    #[serde(skip)]
    pub u_sq: Vec<f64>,
    pub weights: Vec<WeightJson>,
    /// Minimizer `x0`; the certificate is written in coordinates `x + x0`.
    pub translate: String,
    /// `f_max - f_min`.
    pub scale: f64,
    pub f_min: f64,
    pub lambda_tilde: f64,
    pub lambda_sum: f64,
    /// `2 C_d xi_{r+1} / n`, reported when `d(d+1) xi_{r+1} / n <= 1/2`.
    pub apriori_bound: Option<f64>,
    /// `f_min - scale * delta`, a lower bound on `f_(r)`.
    pub lower_bound: f64,
    /// Max pointwise reconstruction error in normalized units.
    pub residual: f64,
    #[serde(skip)]
    weight_table: Vec<f64>,
}

impl SosCubeCertificate {
    /// Weight of `y` (as a mask).
    pub fn weight(&self, y: Mask) -> f64 {
        self.weight_table[y as usize]
    }

    pub fn weight_table(&self) -> &[f64] {
        &self.weight_table
    }
}

/// XOR convolution `h(x) = sum_y w_y U(x + y)` with `U(z) = u_sq[|z|]`.
fn kernel_convolve(w: &[f64], u_sq: &[f64]) -> Vec<f64> {
    let mut wh = w.to_vec();
    let mut uh: Vec<f64> = (0..w.len()).map(|z| u_sq[(z as Mask).count_ones() as usize]).collect();
    cube::fwht(&mut wh);
    cube::fwht(&mut uh);
    let mut h: Vec<f64> = wh.iter().zip(&uh).map(|(a, b)| a * b).collect();
    cube::fwht(&mut h);
    let inv = 1.0 / w.len() as f64;
    h.iter_mut().for_each(|v| *v *= inv);
    h
}

pub fn certify(f: &CubePolynomial, r: usize) -> Result<SosCubeCertificate> {
    let n = f.n();
    let d = f.degree();
    if 2 * r < d {
        return Err(Error::OrderTooSmall { r, degree: d });
    }
    let values = f.values()?;
    let (f_min, x0) = cube::brute_force_min(f)?;
    let x0 = cube::point_to_mask(&x0)?;
    let f_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = f_max - f_min;
    let size = values.len();
    let r_eff = r.min(n);
    let spec = choose_kernel(n, d, r_eff)?;
    if d > 0 && spec.lambda_tilde >= 1.0 {
        return Err(Error::NoCertificate { lambda_tilde: spec.lambda_tilde });
    }
    let g: Vec<f64> = if s > 0.0 {
        (0..size).map(|x| (values[x ^ x0 as usize] - f_min) / s).collect()
    } else {
        vec![0.0; size]
    };
    let delta = if s > 0.0 { spec.delta } else { 0.0 };
    // K^-1 on the harmonic parts of g; parts above degree d are zero
    let mut gh = g.clone();
    cube::fwht(&mut gh);
    for (a, v) in gh.iter_mut().enumerate() {
        let k = (a as Mask).count_ones() as usize;
        if k > d {
            *v = 0.0;
        } else if k > 0 {
            let l = spec.lambda_at(k);
            if l == 0.0 {
                if v.abs() > 0.0 {
                    return Err(Error::SingularOperator { k });
                }
            } else {
                *v /= l;
            }
        }
    }
    gh[0] += delta * size as f64;
    cube::fwht(&mut gh);
    let norm = 1.0 / (size as f64 * size as f64);
    let mut weights: Vec<f64> = gh.iter().map(|v| v * norm).collect();
    for (y, w) in weights.iter_mut().enumerate() {
        if *w < -WEIGHT_CLAMP {
            return Err(Error::CertificationFailed { y: cube::mask_to_bitstring(y as Mask, n), w: *w });
        }
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let h = kernel_convolve(&weights, &spec.u_sq);
    let residual = h.iter().zip(&g).map(|(hv, gv)| (hv - gv - delta).abs()).fold(0.0, f64::max);
    let apriori_bound = if d > 0 && r_eff < n {
        let xi = krawtchouk::least_root(n, 2, r_eff + 1)?;
        ((d * (d + 1)) as f64 * xi / n as f64 <= 0.5).then(|| 2.0 * gamma::c_constant(d) * xi / n as f64)
    } else {
        None
    };
    Ok(SosCubeCertificate {
        delta,
        r: r_eff,
        d,
        n,
        u_coeffs: spec.u_coeffs,
        u_sq: spec.u_sq,
        weights: weights.iter().enumerate().map(|(y, &w)| WeightJson { y: cube::mask_to_bitstring(y as Mask, n), w }).collect(),
        translate: cube::mask_to_bitstring(x0, n),
        scale: s,
        f_min,
        lambda_tilde: spec.lambda_tilde,
        lambda_sum: spec.lambda_sum,
        apriori_bound,
        lower_bound: f_min - s * delta,
        residual,
        weight_table: weights,
    })
}

/// Re-evaluates the certificate against `f` in original coordinates:
/// max over `x` of `|s (sum_y w_y u^2(d(x + x0, y)) - delta) + f_min - f(x)|`,
/// divided by `s` (or absolute when `s = 0`).
pub fn verify_certificate(cert: &SosCubeCertificate, f: &CubePolynomial) -> Result<f64> {
    if f.n() != cert.n {
        return Err(Error::DimensionMismatch { expected: cert.n, got: f.n() });
    }
    let values = f.values()?;
    if cert.weight_table.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidInput("certificate has negative weights".into()));
    }
    let x0 = cube::bitstring_to_mask(&cert.translate)? as usize;
    let h = kernel_convolve(&cert.weight_table, &cert.u_sq);
    let unit = if cert.scale > 0.0 { cert.scale } else { 1.0 };
    Ok((0..values.len())
        .map(|x| (cert.scale * (h[x ^ x0] - cert.delta) + cert.f_min - values[x]).abs() / unit)
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub r: usize,
    pub t: f64,
    pub max_outer_gap: f64,
    pub max_inner_gap: f64,
    #[serde(rename = "bound_2Cd_xi_over_n")]
    pub bound: f64,
    pub phi: f64,
    pub status: String,
}

/// Largest normalized errors `(f_min - f_(r))/||f||` and
/// `(f^(r) - f_min)/||f||` over `samples` random degree-`d` instances for each
/// `n` and each `r = round(t n)`. Failures are recorded in `status`.
pub fn error_sweep(d: usize, n_list: &[usize], t_list: &[f64], samples: usize, seed: u64, opts: &OuterOptions) -> Vec<ErrorRow> {
    let mut rows = Vec::new();
    for &n in n_list {
        let mut rs: Vec<usize> = t_list.iter().map(|t| ((t * n as f64).round() as usize).clamp(d.div_ceil(2).max(1), n.saturating_sub(1).max(1))).collect();
        rs.dedup();
        for r in rs {
            rows.push(error_row(d, n, r, samples, seed, opts));
        }
    }
    rows
}

fn error_row(d: usize, n: usize, r: usize, samples: usize, seed: u64, opts: &OuterOptions) -> ErrorRow {
    let t = r as f64 / n as f64;
    let phi = krawtchouk::levenshtein_phi(t.min(0.5), 2).unwrap_or(f64::NAN);
    let mut row = ErrorRow { n, r, t, max_outer_gap: f64::NAN, max_inner_gap: f64::NAN, bound: f64::NAN, phi, status: String::new() };
    let run = || -> Result<(f64, f64, f64, bool)> {
        let xi = krawtchouk::least_root(n, 2, r + 1)?;
        let bound = 2.0 * gamma::c_constant(d) * xi / n as f64;
        let in_regime = (d * (d + 1)) as f64 * xi / n as f64 <= 0.5;
        let (mut outer_gap, mut inner_gap) = (0.0_f64, 0.0_f64);
        for i in 0..samples {
            let f = instances::random_poly(n, d, seed.wrapping_add(i as u64), CoeffDist::Uniform)?;
            let norm = cube::sup_norm(&f)?;
            if norm == 0.0 {
                continue;
            }
            let (f_min, _) = cube::brute_force_min(&f)?;
            let lo = outer::outer_cube(&f, r, opts)?.value;
            let hi = inner::inner_cube(&f, r)?.value;
            outer_gap = outer_gap.max((f_min - lo) / norm);
            inner_gap = inner_gap.max((hi - f_min) / norm);
        }
        Ok((outer_gap, inner_gap, bound, in_regime))
    };
    match run() {
        Ok((o, i, b, in_regime)) => {
            row.max_outer_gap = o;
            row.max_inner_gap = i;
            row.bound = b;
            row.status = if o > b + 1e-6 || i > b / 2.0 + 1e-6 {
                if in_regime { "bound_exceeded" } else { "outside_regime_exceeded" }
            } else if in_regime {
                "ok"
            } else {
                "outside_regime"
            }
            .into();
        }
        Err(e) => row.status = format!("error: {}", e),
    }
    row
}
