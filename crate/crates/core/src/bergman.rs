//! Diagonal Bergman kernels `B_k` and the weighted sums `sum_i c_i B_{k+i}`.
//!
//! Both models have diagonal Gram matrices in the monomial basis, so
//! `B_k(x) = sum_alpha |x^alpha|^2 e^{-k phi(x)} / ||z^alpha||^2`.
//!
//! Football values at rational `rho` are exact. With `rho = p/q` the kernel is
//! `m (k+1) sum_b C(k,b) p^b q^{k-b} / (p+q)^k` over admissible `b`; the point at
//! infinity is `p = 1, q = 0`, which is the `b <-> k - b` reflection of `rho = 0`.
//!
//! Flat values away from the origin are floating point with a certified bound:
//! the series is summed by total degree until a Poisson tail bound drops below
//! the requested relative tolerance.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientSequence;
use crate::error::{Error, Result};
use crate::models::{for_each_composition, FlatCyclicModel, FootballModel, Model, PointSpec, Rho};
use crate::numeric::{ln_factorial, NeumaierSum};
use crate::rational_to_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelNumber {
    Exact(#[serde(with = "crate::report::rational")] BigRational),
    Approx { value: f64, err_bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub k: u64,
    pub value: KernelNumber,
}

impl KernelValue {
    pub fn exact(k: u64, v: BigRational) -> Self {
        Self { k, value: KernelNumber::Exact(v) }
    }

    pub fn approx(k: u64, value: f64, err_bound: f64) -> Self {
        Self { k, value: KernelNumber::Approx { value, err_bound } }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.value, KernelNumber::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match &self.value {
            KernelNumber::Exact(v) => Some(v),
            KernelNumber::Approx { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.value {
            KernelNumber::Exact(v) => rational_to_f64(v),
            KernelNumber::Approx { value, .. } => *value,
        }
    }

    pub fn err_bound(&self) -> f64 {
        match &self.value {
            KernelNumber::Exact(_) => 0.0,
            KernelNumber::Approx { err_bound, .. } => *err_bound,
        }
    }
}

/// Truncation control for the flat monomial series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Target bound on `tail / value`.
    pub rel_tol: f64,
    /// Largest total degree the sum may reach.
    pub max_degree: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-13, max_degree: 20_000 }
    }
}

/// `B_k` at `point`.
pub fn bergman_value(model: &Model, k: u64, point: &PointSpec) -> Result<KernelValue> {
    bergman_value_with(model, k, point, SeriesOptions::default())
}

pub fn bergman_value_with(
    model: &Model,
    k: u64,
    point: &PointSpec,
    opts: SeriesOptions,
) -> Result<KernelValue> {
    if k == 0 {
        return Err(Error::InvalidModel("k must be >= 1".into()));
    }
    point.check_for(model)?;
    match (model, point) {
        (Model::Football(fb), PointSpec::Football(rho)) => {
            Ok(KernelValue::exact(k, football_exact(fb, k, rho)))
        }
        (Model::Flat(fl), PointSpec::Flat(x)) => {
            if x.iter().all(|&v| v == 0.0) {
                Ok(KernelValue::exact(k, flat_origin(fl, k)))
            } else {
                flat_series(fl, k, x, opts).map(|s| KernelValue::approx(k, s.value, s.err_bound))
            }
        }
        _ => unreachable!("check_for rejects mismatched points"),
    }
}

fn football_exact(fb: &FootballModel, k: u64, rho: &Rho) -> BigRational {
    let (p, q) = match rho {
        Rho::Finite(r) => (r.numer().clone(), r.denom().clone()),
        Rho::Infinity => (BigInt::one(), BigInt::zero()),
    };
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    let mut next_b = 0u64;
    for b in fb.exponents(k) {
        while next_b < b {
            binom = binom * BigInt::from(k - next_b) / BigInt::from(next_b + 1);
            next_b += 1;
        }
        sum += &binom * p.pow(b as u32) * q.pow((k - b) as u32);
    }
    let scale = BigInt::from(fb.m()) * BigInt::from(k + 1);
    BigRational::new(scale * sum, (p + q).pow(k as u32))
}

/// Football kernel in floating point via log-space terms and compensated
/// summation; usable for `k` far beyond where binomials overflow `f64`.
pub fn football_value_f64(fb: &FootballModel, k: u64, rho: f64) -> f64 {
    assert!(rho >= 0.0, "rho must be nonnegative");
    // reflect through b <-> k - b so the working ratio is at most one
    let (ratio, reflect) = if rho > 1.0 { (1.0 / rho, true) } else { (rho, false) };
    let ln_scale = (fb.m() as f64).ln() + ((k + 1) as f64).ln() + ln_factorial(k);
    let ln_denom = (k as f64) * ratio.ln_1p();
    let mut acc = NeumaierSum::default();
    for b in fb.exponents(k) {
        let j = if reflect { k - b } else { b };
        let ln_pow = if j == 0 { 0.0 } else { j as f64 * ratio.ln() };
        if ln_pow == f64::NEG_INFINITY {
            continue;
        }
        let ln_term = ln_scale - ln_factorial(j) - ln_factorial(k - j) + ln_pow - ln_denom;
        acc.add(ln_term.exp());
    }
    acc.sum()
}

/// `m k^n` when the constant monomial is admissible, else zero.
fn flat_origin(fl: &FlatCyclicModel, k: u64) -> BigRational {
    if k % fl.m() == 0 {
        BigRational::from_integer(BigInt::from(fl.m()) * BigInt::from(k).pow(fl.n() as u32))
    } else {
        BigRational::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub err_bound: f64,
    /// Last total degree included.
    pub degree: u64,
    pub terms: u64,
}

/// Sums `m k^n e^{-T} prod_j t_j^{alpha_j} / alpha_j!` over admissible `alpha`,
/// `t_j = k |x_j|^2`, `T = sum_j t_j`, degree by degree. Over all `alpha` of
/// degree `d` the unweighted terms add to `T^d / d!`, so the tail beyond `D` is
/// at most `m k^n e^{-T} T^{D+1} / (D+1)! / (1 - T / (D+2))` once `D + 2 > T`.
pub fn flat_series(
    fl: &FlatCyclicModel,
    k: u64,
    moduli: &[f64],
    opts: SeriesOptions,
) -> Result<SeriesSum> {
    let n = fl.n();
    let kf = k as f64;
    let t: Vec<f64> = moduli.iter().map(|x| kf * x * x).collect();
    let ln_t: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let total: f64 = t.iter().sum();
    let ln_prefactor = (fl.m() as f64).ln() + n as f64 * kf.ln() - total;
    let mut acc = NeumaierSum::default();
    let mut terms = 0u64;
    let mut degree = 0u64;
    loop {
        for_each_composition(n, degree, &mut |alpha| {
            if !fl.is_admissible(k, alpha) {
                return;
            }
            let mut ln_term = ln_prefactor;
            for (j, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    ln_term += a as f64 * ln_t[j] - ln_factorial(a);
                }
            }
            if ln_term > f64::NEG_INFINITY {
                acc.add(ln_term.exp());
                terms += 1;
            }
        });
        let d1 = (degree + 1) as f64;
        if d1 + 1.0 > total {
            let ln_tail = ln_prefactor + d1 * total.ln() - ln_factorial(degree + 1)
                - (1.0 - total / (d1 + 1.0)).ln();
            let value = acc.sum();
            let tail = ln_tail.exp();
            let rounding = value * (terms as f64 + 8.0) * 4.0 * f64::EPSILON;
            if ln_tail < -745.0 || tail <= opts.rel_tol * value {
                return Ok(SeriesSum { value, err_bound: tail + rounding, degree, terms });
            }
            if degree >= opts.max_degree {
                return Err(Error::TailBound {
                    cap: opts.max_degree as usize,
                    achieved: tail / value.max(f64::MIN_POSITIVE),
                });
            }
        } else if degree >= opts.max_degree {
            return Err(Error::TailBound { cap: opts.max_degree as usize, achieved: f64::INFINITY });
        }
        degree += 1;
    }
}

/// Closed form of the averaged flat kernel on the diagonal,
/// `k^n sum_s lambda^{-ks} exp(k (<zeta^s x, x> - |x|^2))`.
///
/// With `t_j = k |x_j|^2` and `w_s = sum_j lambda^{a_j s} t_j` this is
/// `k^n e^{-T} sum_s lambda^{-ks} e^{w_s}`. The sum over `s` keeps only
/// monomials of weight `k`, so every Taylor term of `e^{w_s}` below the lowest
/// admissible degree `d0` cancels between the `s`; dropping them up front
/// avoids the cancellation and leaves `sum_{j >= d0} w_s^j / j!`.
pub fn bergman_value_closed_flat(model: &Model, k: u64, x: &[Complex64]) -> Result<KernelValue> {
    let fl = model.as_flat()?;
    if x.len() != fl.n() {
        return Err(Error::InvalidPoint("dimension mismatch".into()));
    }
    let m = fl.m();
    let kf = k as f64;
    let t: Vec<f64> = x.iter().map(|v| kf * v.norm_sqr()).collect();
    let total: f64 = t.iter().sum();
    let d0 = lowest_admissible_degree(fl, k);
    let mut re = NeumaierSum::default();
    let mut scale = 0.0f64;
    for s in 0..m {
        let w: Complex64 = t
            .iter()
            .zip(fl.weights())
            .map(|(tj, &a)| crate::root_of_unity(m, a * s) * *tj)
            .sum();
        let phase = crate::root_of_unity(m, (m - (k % m) * s % m) % m);
        let (tail, abs) = scaled_exp_tail(w, d0, total);
        re.add((phase * tail).re);
        scale += abs;
    }
    let kn = kf.powi(fl.n() as i32);
    let value = kn * re.sum();
    let err = kn * scale * 64.0 * f64::EPSILON * (1.0 + total);
    Ok(KernelValue::approx(k, value, err))
}

/// Smallest `|alpha|` with `sum_j a_j alpha_j = k (mod m)`.
fn lowest_admissible_degree(fl: &FlatCyclicModel, k: u64) -> u64 {
    let m = fl.m() as usize;
    let target = (k % fl.m()) as usize;
    let mut reach = vec![false; m];
    reach[0] = true;
    for d in 0..=m as u64 {
        if reach[target] {
            return d;
        }
        let mut next = vec![false; m];
        for (r, _) in reach.iter().enumerate().filter(|(_, &on)| on) {
            for &a in fl.weights() {
                next[(r + a as usize) % m] = true;
            }
        }
        reach = next;
    }
    unreachable!("an effective action reaches every residue within m steps")
}

/// `(e^{-T} sum_{j >= d} w^j / j!, e^{-T} sum_{j >= d} |w|^j / j!)`, summed from
/// the first term in scaled form so neither `e^T` nor `w^d` overflows.
fn scaled_exp_tail(w: Complex64, d: u64, big_t: f64) -> (Complex64, f64) {
    let r = w.norm();
    if r == 0.0 {
        let v = if d == 0 { (-big_t).exp() } else { 0.0 };
        return (Complex64::new(v, 0.0), v);
    }
    let ln_abs = -big_t + d as f64 * r.ln() - ln_factorial(d);
    let mut term = Complex64::from_polar(ln_abs.exp(), d as f64 * w.arg());
    let mut abs = ln_abs.exp();
    let mut sum = term;
    let mut abs_sum = abs;
    let mut j = d;
    loop {
        j += 1;
        term = term * w / j as f64;
        abs = abs * r / j as f64;
        sum += term;
        abs_sum += abs;
        if j as f64 > r && abs <= 1e-18 * abs_sum {
            break;
        }
    }
    (sum, abs_sum)
}

/// `sum_i c_i B_{k+i}`.
pub fn weighted_bergman(
    model: &Model,
    c: &CoefficientSequence,
    k: u64,
    point: &PointSpec,
) -> Result<KernelValue> {
    combine(c.iter().map(|(i, ci)| (ci.clone(), k + i)), model, k, point)
}

/// Homogeneous `gamma(k, i) = sum_a g_a k^{d-a} i^a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousPoly {
    degree: u32,
    /// `coeffs[a]` multiplies `k^{d-a} i^a`.
    coeffs: Vec<BigRational>,
}

impl HomogeneousPoly {
    /// From dense coefficients of `k^{d-a} i^a`, `a = 0..=d`.
    pub fn new(degree: u32, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != degree as usize + 1 {
            return Err(Error::NotHomogeneous(degree));
        }
        Ok(Self { degree, coeffs })
    }

    /// From sparse terms `(power of k, power of i, coefficient)`.
    pub fn from_terms<I>(degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, BigRational)>,
    {
        let mut coeffs = vec![BigRational::zero(); degree as usize + 1];
        for (pk, pi, c) in terms {
            if pk + pi != degree {
                if c.is_zero() {
                    continue;
                }
                return Err(Error::NotHomogeneous(degree));
            }
            coeffs[pi as usize] += c;
        }
        Ok(Self { degree, coeffs })
    }

    pub fn one() -> Self {
        Self { degree: 0, coeffs: vec![BigRational::one()] }
    }

    /// `k + i`.
    pub fn k_plus_i() -> Self {
        Self { degree: 1, coeffs: vec![BigRational::one(), BigRational::one()] }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient `A` of `k^d`.
    pub fn leading(&self) -> &BigRational {
        &self.coeffs[0]
    }

    /// Coefficient `B` of `k^{d-1} i` (zero when `d = 0`).
    pub fn subleading(&self) -> BigRational {
        self.coeffs.get(1).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, k: u64, i: u64) -> BigRational {
        let d = self.degree;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(a, g)| {
                g * BigRational::from_integer(
                    BigInt::from(k).pow(d - a as u32) * BigInt::from(i).pow(a as u32),
                )
            })
            .fold(BigRational::zero(), |acc, x| acc + x)
    }
}

/// `sum_i c_i gamma(k, i) B_{k+i}`. The caller is responsible for `deg gamma`
/// staying within the expansion order the sequence was built for.
pub fn weighted_bergman_gamma(
    model: &Model,
    c: &CoefficientSequence,
    gamma: &HomogeneousPoly,
    k: u64,
    point: &PointSpec,
) -> Result<KernelValue> {
    combine(c.iter().map(|(i, ci)| (ci * gamma.eval(k, i), k + i)), model, k, point)
}

fn combine<I>(weighted: I, model: &Model, k: u64, point: &PointSpec) -> Result<KernelValue>
where
    I: Iterator<Item = (BigRational, u64)>,
{
    let mut exact = Some(BigRational::zero());
    let mut approx = NeumaierSum::default();
    let mut err = 0.0;
    for (w, kk) in weighted {
        let v = bergman_value(model, kk, point)?;
        let wf = rational_to_f64(&w);
        match &v.value {
            KernelNumber::Exact(x) => {
                if let Some(acc) = exact.as_mut() {
                    *acc += &w * x;
                }
                approx.add(wf * rational_to_f64(x));
            }
            KernelNumber::Approx { value, err_bound } => {
                exact = None;
                approx.add(wf * value);
                err += wf.abs() * err_bound;
            }
        }
    }
    Ok(match exact {
        Some(v) => KernelValue::exact(k, v),
        None => {
            let value = approx.sum();
            KernelValue::approx(k, value, err + value.abs() * 4.0 * f64::EPSILON)
        }
    })
}
