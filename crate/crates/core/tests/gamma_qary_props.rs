use cubesos::gamma::{self, GammaTable};
use cubesos::krawtchouk;
use cubesos::lp::{self, Objective, Sense};
use cubesos::qary::{self, QaryPolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gamma_growth_estimate() {
    let r2 = 2f64.sqrt();
    for d in 1..=40 {
        let g = gamma::gamma(d);
        assert!(g <= (1.0 + r2).powi(d as i32), "d={d}");
        let s: f64 = gamma::chebyshev_coeffs(d).iter().map(|c| c.abs()).sum();
        let closed = ((1.0 + r2).powi(d as i32) + (1.0 - r2).powi(d as i32)) / 2.0;
        assert!((s - closed).abs() <= 1e-9 * closed);
    }
}

#[test]
fn chebyshev_values_match_cosine() {
    for m in [3usize, 12, 30] {
        let c = gamma::chebyshev_coeffs(m);
        for j in 0..20 {
            let x = -1.0 + j as f64 / 10.0;
            let v = c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            assert!((v - (m as f64 * x.acos()).cos()).abs() < 1e-9 * (1 << m.min(20)) as f64);
        }
    }
}

#[test]
fn rho_lp_examples() {
    assert!((gamma::rho_finite(4, 1, 1, 2).unwrap().value - 1.0).abs() < 1e-12);
    for n in 3..=12 {
        let s = gamma::rho_finite(n, 3, 0, 2).unwrap();
        assert!(s.value >= 1.0 - 1e-12 && s.value <= gamma::rho_infinity(3, 0).unwrap() + 1e-9);
    }
    // returned lambda is feasible
    let s = gamma::rho_finite(15, 4, 2, 2).unwrap();
    let table = krawtchouk::kraw_table(15, 2, 4);
    for t in 0..=15 {
        let v: f64 = (0..=4).map(|i| s.lambda[i] * table[i][t]).sum();
        assert!(v.abs() <= 1.0 + 1e-9);
    }
    assert!((s.lambda[2] - s.value).abs() < 1e-12);
}

#[test]
fn grid_lp_cross_checks_closed_form() {
    for d in 1..=8 {
        for k in 0..=d {
            let g = gamma::rho_infinity_grid(d, k, 2, 10_000).unwrap().value;
            let exact = gamma::rho_infinity(d, k).unwrap();
            // fewer constraints than the interval, so never below the limit
            assert!(g >= exact - 1e-9 && g - exact <= 1e-3, "d={d} k={k}: {g} vs {exact}");
        }
    }
}

#[test]
fn qary_limit_enclosure_contains_grid() {
    for d in 1..=3 {
        for k in 0..=d {
            let e = gamma::rho_infinity_q(d, k, 3).unwrap();
            let g = gamma::rho_infinity_grid(d, k, 3, 10_000).unwrap().value;
            assert!(e.lower <= e.upper && e.upper - e.lower < 1e-9);
            // the grid LP relaxes the interval constraint
            assert!(g >= e.lower - 1e-9 && g <= e.upper + 1e-3);
        }
    }
}

#[test]
fn gamma_table_rows() {
    let t = GammaTable::build(2, 10, 2).unwrap();
    assert_eq!(t.gamma_d, 2.0);
    assert_eq!(t.c_d, 12.0);
    assert_eq!(t.rows().len(), 9 * 3);
    assert!(t.rho_finite.values().all(|&v| v <= 2.0 + 1e-9));
}

#[test]
fn lp_reverification() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let (m, nv) = (6, 4);
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..nv).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..2.0)).collect();
        let c: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = lp::solve_lp(&c, &a, &vec![Sense::Le; m], &b, Objective::Maximize).unwrap();
        let obj: f64 = c.iter().zip(&s.x).map(|(p, q)| p * q).sum();
        assert!((obj - s.objective).abs() <= 1e-9);
        assert!(s.max_violation <= 1e-9);
        // no vertex of a coarse grid beats the optimum
        for _ in 0..200 {
            let x: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.0..2.0)).collect();
            let feasible = a.iter().zip(&b).all(|(row, bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= *bi);
            if feasible {
                assert!(c.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= s.objective + 1e-9);
            }
        }
    }
}

fn reversed_min(f: &QaryPolynomial) -> f64 {
    let (n, q) = (f.n(), f.q());
    let total = q.pow(n as u32);
    (0..total)
        .rev()
        .map(|mut idx| {
            let mut x = vec![0; n];
            for xi in x.iter_mut() {
                *xi = idx % q;
                idx /= q;
            }
            f.evaluate(&x).unwrap()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn qary_brute_min_matches_reversed_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let n = 6;
        let terms: Vec<(Vec<usize>, f64)> = (0..15)
            .map(|_| {
                let mut e = vec![0; n];
                for _ in 0..3 {
                    e[rng.gen_range(0..n)] += 1;
                }
                (e, rng.gen_range(-1.0..1.0))
            })
            .collect();
        let f = QaryPolynomial::from_terms(n, 3, terms).unwrap();
        let (v, x) = qary::qary_brute_min(&f).unwrap();
        assert!((v - reversed_min(&f)).abs() < 1e-12);
        assert!((f.evaluate(&x).unwrap() - v).abs() < 1e-12);
    }
}

#[test]
fn qary_estimator_inner_bound() {
    let (n, d) = (12, 2);
    for q in [3usize, 4] {
        let g = qary::harmonic_estimator(n, q, d);
        for r in 1..=5 {
            let b = qary::qary_inner_symmetrized(&g, q, r).unwrap().value;
            let xi = krawtchouk::least_root(n, q, r + 1).unwrap();
            assert!(b >= -1e-12);
            assert!(b <= (d * (d + 1)) as f64 * xi / n as f64 + 1e-9, "q={q} r={r}");
        }
    }
}

#[test]
fn qary_json_round_trip() {
    let f = qary::parse_qary_polynomial(r#"{"n": 2, "q": 3, "terms": [{"exps": [3, 0], "coef": 1}]}"#).unwrap();
    // x^3 = 3x^2 - 2x on {0,1,2}
    assert_eq!(f.terms().get(&vec![2, 0]), Some(&3.0));
    assert_eq!(f.terms().get(&vec![1, 0]), Some(&-2.0));
    assert!(qary::parse_qary_polynomial(r#"{"n": 2, "q": 3, "terms": [{"exps": [1], "coef": 1}]}"#).is_err());
}
