//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use orb_bergman::coeffs::CoefficientSequence;
use rand::Rng;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss-Kronrod 7-15 on `[a, b]`: `(kronrod, |kronrod - gauss|)`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = GAUSS_WEIGHTS[3] * fc;
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS[j] * s;
        if j % 2 == 1 {
            g += GAUSS_WEIGHTS[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod: bisect the worst interval until the summed error
/// estimate is below `rel_tol` of the integral.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(f, a, b))];
    for _ in 0..20_000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel_tol * total.abs() {
            return total;
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(f, lo, mid)));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
    panic!("adaptive quadrature did not converge");
}

/// `int_0^inf f(r) dr` through `r = t / (1 - t)`.
pub fn integrate_half_line(f: &dyn Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let r = t / (1.0 - t);
        let v = f(r) / ((1.0 - t) * (1.0 - t));
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(&g, 0.0, 1.0, rel_tol)
}

/// `(1/m) int_C |u|^{2b} (1 + |u|^2)^{-k} omega_FS`, `omega_FS = dA / (pi (1 + |u|^2)^2)`,
/// in polar coordinates.
pub fn football_norm_quadrature(m: u64, k: u64, b: u64) -> f64 {
    let f = |r: f64| {
        let r2 = r * r;
        (2.0 * b as f64 * r.ln() - (k + 2) as f64 * r2.ln_1p()).exp() * 2.0 * r
    };
    integrate_half_line(&f, 1e-12) / m as f64
}

/// `(1/m) prod_j int_C |z_j|^{2 alpha_j} e^{-k |z_j|^2} dA / pi`.
pub fn flat_norm_quadrature(m: u64, k: u64, alpha: &[u64]) -> f64 {
    let kf = k as f64;
    alpha
        .iter()
        .map(|&a| {
            let f = |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                (2.0 * a as f64 * r.ln() - kf * r * r).exp() * 2.0 * r
            };
            integrate_half_line(&f, 1e-12)
        })
        .product::<f64>()
        / m as f64
}

/// `sum_{i = u mod m} i^p c_i` computed directly.
pub fn residue_sums(c: &CoefficientSequence, m: u64, p: u32) -> Vec<BigRational> {
    let mut sums = vec![BigRational::zero(); m as usize];
    for (i, ci) in c.iter() {
        let ip = if p == 0 { BigInt::one() } else { BigInt::from(i).pow(p) };
        sums[(i % m) as usize] += ci * BigRational::from_integer(ip);
    }
    sums
}

/// Moment condition up to `p_max` straight from its definition.
pub fn condition_oracle(c: &CoefficientSequence, m: u64, p_max: u32) -> bool {
    (0..=p_max).all(|p| {
        let s = residue_sums(c, m, p);
        s.iter().all(|v| *v == s[0])
    })
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Positive random sequence with a mix of exact divisibility structures:
/// a random positive polynomial times `(1 + z + ... + z^{m-1})^q` times
/// optionally `1 + z^d + ... + z^{m-d}` for a divisor `d` of `m`, which
/// vanishes at some of the nontrivial roots of unity but not all.
pub fn random_sequence<R: Rng>(rng: &mut R, m: u64) -> CoefficientSequence {
    let len = rng.gen_range(1..=4);
    let mut poly: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=5)).collect();
    let q = rng.gen_range(0..=5);
    for _ in 0..q {
        poly = poly_mul(&poly, &vec![1; m as usize]);
    }
    if rng.gen_bool(0.3) {
        let divs: Vec<u64> = (1..m).filter(|d| m % d == 0).collect();
        let d = divs[rng.gen_range(0..divs.len())];
        let mut factor = vec![0i64; (m - d + 1) as usize];
        for j in (0..=m - d).step_by(d as usize) {
            factor[j as usize] = 1;
        }
        poly = poly_mul(&poly, &factor);
    }
    if rng.gen_bool(0.2) {
        // a small perturbation breaks exact structure most of the time
        let j = rng.gen_range(0..poly.len());
        poly[j] += 1;
    }
    CoefficientSequence::from_dense(&poly).unwrap()
}
