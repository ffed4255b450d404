//! Fitting sampled kernels to `b_0 k^n + b_1 k^{n-1} + ... + b_N k^{n-N}` and
//! comparing with the predicted leading coefficients
//!
//! ```text
//! b_0 = sum_i c_i,    b_1 = sum_i c_i (n i + Scal / 2).
//! ```
//!
//! Also holds the two diagnostics that go with the fit: the remainder decay
//! rate, and a residue-class periodicity probe that exposes the oscillating
//! terms a sequence violating the moment condition leaves behind.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bergman::{weighted_bergman, weighted_bergman_gamma, HomogeneousPoly, KernelValue};
use crate::coeffs::CoefficientSequence;
use crate::error::{Error, Result};
use crate::models::{Model, PointSpec, Rho};
use crate::numeric::linear_slope;
use crate::rational_to_f64;

/// Relative tolerance on `b_0`.
pub const B0_REL_TOL: f64 = 1e-3;
/// Tolerance on `b_1`, relative to `max(1, |b_1|)`.
pub const B1_TOL: f64 = 1e-2;
/// Slack allowed on remainder slopes above `n - N - 1`.
pub const SLOPE_SLACK: f64 = 0.15;
/// Residuals below this, relative to `max(1, |value|)`, count as zero.
pub const EXACT_THRESHOLD: f64 = 1e-12;

/// Least-squares fit of `value / k^n` against `1, 1/k, ..., 1/k^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub n: u32,
    pub order: u32,
    pub b_hat: Vec<f64>,
    /// `(k, value - fitted(k))`.
    pub residuals: Vec<(u64, f64)>,
    pub remainder_slope: RemainderSlope,
}

impl ExpansionFit {
    /// `sum_j b_hat_j k^{n - j}`.
    pub fn fitted(&self, k: u64) -> f64 {
        eval_expansion(&self.b_hat, self.n, k)
    }
}

fn eval_expansion(b: &[f64], n: u32, k: u64) -> f64 {
    let kf = k as f64;
    let inv = 1.0 / kf;
    // Horner in 1/k
    let s = b.iter().rev().fold(0.0, |acc, &bj| acc * inv + bj);
    s * kf.powi(n as i32)
}

/// Decay rate of the fit remainder: a log-log slope, or `"exact"` when the
/// samples lie on the truncated expansion to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RemainderSlope {
    Exact,
    Slope(f64),
}

impl RemainderSlope {
    /// `slope <= n - N - 1 + slack`; exact remainders always pass.
    pub fn within(&self, n: u32, order: u32) -> bool {
        match self {
            RemainderSlope::Exact => true,
            RemainderSlope::Slope(s) => {
                *s <= n as f64 - order as f64 - 1.0 + SLOPE_SLACK
            }
        }
    }
}

impl std::fmt::Display for RemainderSlope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RemainderSlope::Exact => write!(f, "exact"),
            RemainderSlope::Slope(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for RemainderSlope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RemainderSlope::Exact => s.serialize_str("exact"),
            RemainderSlope::Slope(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for RemainderSlope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(RemainderSlope::Slope(v)),
            Repr::Str(s) if s == "exact" => Ok(RemainderSlope::Exact),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad slope {s:?}"))),
        }
    }
}

fn distinct_ks(samples: &[(u64, f64)]) -> usize {
    let mut ks: Vec<u64> = samples.iter().map(|s| s.0).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.len()
}

fn least_squares(samples: &[(u64, f64)], n: u32, order: u32) -> Result<Vec<f64>> {
    let cols = order as usize + 1;
    if distinct_ks(samples) < cols + 1 {
        return Err(Error::InsufficientSamples(format!(
            "order {order} needs at least {} distinct k, got {}",
            cols + 1,
            distinct_ks(samples)
        )));
    }
    if samples.iter().any(|s| s.0 == 0) {
        return Err(Error::InsufficientSamples("k = 0 cannot be fitted".into()));
    }
    let rows = samples.len();
    let a = DMatrix::from_fn(rows, cols, |r, j| (samples[r].0 as f64).powi(-(j as i32)));
    let y = DVector::from_fn(rows, |r, _| {
        let (k, v) = samples[r];
        v / (k as f64).powi(n as i32)
    });
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-13 * smax) {
        return Err(Error::RankDeficient(format!(
            "singular values range {smin:e}..{smax:e}"
        )));
    }
    let x = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

/// Fits `value ~ sum_{j <= order} b_j k^{n - j}`.
pub fn fit_expansion(samples: &[(u64, f64)], n: u32, order: u32) -> Result<ExpansionFit> {
    let b_hat = least_squares(samples, n, order)?;
    let residuals = samples
        .iter()
        .map(|&(k, v)| (k, v - eval_expansion(&b_hat, n, k)))
        .collect();
    let mut fit = ExpansionFit { n, order, b_hat, residuals, remainder_slope: RemainderSlope::Exact };
    fit.remainder_slope = remainder_slope(samples, &fit)?;
    Ok(fit)
}

/// Decay rate of the order-`N` remainder.
///
/// The order-`N` least-squares residual is biased: the fit absorbs part of the
/// leading remainder term into `b_hat` and the residual changes sign. The
/// remainder is therefore measured against the first `N + 1` coefficients of
/// an order `N + 1` refit, and the slope is taken through
/// `(log k, log |remainder|)`.
pub fn remainder_slope(samples: &[(u64, f64)], fit: &ExpansionFit) -> Result<RemainderSlope> {
    let exact = samples.iter().zip(&fit.residuals).all(|(&(_, v), &(_, r))| {
        r.abs() <= EXACT_THRESHOLD * v.abs().max(1.0)
    });
    if exact {
        return Ok(RemainderSlope::Exact);
    }
    let refit = least_squares(samples, fit.n, fit.order + 1)?;
    let head = &refit[..=fit.order as usize];
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(k, v)| (k, v - eval_expansion(head, fit.n, k)))
        .filter(|(_, r)| *r != 0.0 && r.is_finite())
        .map(|(k, r)| ((k as f64).ln(), r.abs().ln()))
        .collect();
    if points.len() < 5 {
        return Err(Error::InsufficientSamples(format!(
            "remainder slope needs 5 nonzero residuals, got {}",
            points.len()
        )));
    }
    Ok(RemainderSlope::Slope(linear_slope(&points)))
}

/// `gamma(k, i) = A k^d + B k^{d-1} i + ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaWeights {
    #[serde(with = "crate::report::rational")]
    pub a: BigRational,
    #[serde(with = "crate::report::rational")]
    pub b: BigRational,
    pub d: u32,
}

impl GammaWeights {
    pub fn from_poly(g: &HomogeneousPoly) -> Self {
        Self { a: g.leading().clone(), b: g.subleading(), d: g.degree() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCoefficients {
    #[serde(with = "crate::report::rational")]
    pub b0: BigRational,
    #[serde(with = "crate::report::rational")]
    pub b1: BigRational,
}

impl PredictedCoefficients {
    pub fn to_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.b0), rational_to_f64(&self.b1))
    }
}

/// Predicted `(b_0, b_1)`. With `gamma`, the kernel `sum_i c_i gamma(k, i) B_{k+i}`
/// has `b_0 = A sum c_i` and `b_1 = sum_i c_i (A (n i + Scal/2) + B i)` in front
/// of `k^{n+d}` and `k^{n+d-1}`.
pub fn predicted_coefficients(
    c: &CoefficientSequence,
    n: u32,
    scal: &BigRational,
    gamma: Option<&GammaWeights>,
) -> PredictedCoefficients {
    let half_scal = scal / BigRational::from_integer(2.into());
    let nn = BigRational::from_integer(n.into());
    let (a, b) = match gamma {
        Some(g) => (g.a.clone(), g.b.clone()),
        None => (BigRational::one(), BigRational::zero()),
    };
    let mut b0 = BigRational::zero();
    let mut b1 = BigRational::zero();
    for (i, ci) in c.iter() {
        let i = BigRational::from_integer(i.into());
        b0 += ci * &a;
        b1 += ci * (&a * (&nn * &i + &half_scal) + &b * &i);
    }
    PredictedCoefficients { b0, b1 }
}

/// Outcome of comparing a fit against the prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitVerdict {
    pub b0_error: f64,
    pub b1_error: f64,
    pub b0_ok: bool,
    pub b1_ok: bool,
    pub slope_ok: bool,
}

impl FitVerdict {
    pub fn passed(&self) -> bool {
        self.b0_ok && self.b1_ok && self.slope_ok
    }
}

pub fn compare(fit: &ExpansionFit, pred: &PredictedCoefficients) -> FitVerdict {
    let (b0, b1) = pred.to_f64();
    let b0_error = (fit.b_hat[0] - b0).abs();
    let b1_error = fit.b_hat.get(1).map_or(f64::INFINITY, |v| (v - b1).abs());
    FitVerdict {
        b0_error,
        b1_error,
        b0_ok: b0_error <= B0_REL_TOL * b0.abs(),
        b1_ok: b1_error <= B1_TOL * b1.abs().max(1.0),
        slope_ok: fit.remainder_slope.within(fit.n, fit.order),
    }
}

/// Weighted kernel `sum_i c_i gamma(k, i) B_{k+i}` at each `k`, in parallel.
pub fn sample_weighted(
    model: &Model,
    c: &CoefficientSequence,
    gamma: Option<&HomogeneousPoly>,
    point: &PointSpec,
    ks: &[u64],
) -> Result<Vec<KernelValue>> {
    ks.par_iter()
        .map(|&k| match gamma {
            Some(g) => weighted_bergman_gamma(model, c, g, k, point),
            None => weighted_bergman(model, c, k, point),
        })
        .collect()
}

/// Result of the residue-class periodicity probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    /// Degree of the polynomial trend removed.
    pub degree: u32,
    /// Smallest period explaining the detrended samples, if they oscillate.
    pub period: Option<u64>,
    /// `(p, R^2)` for every candidate period.
    pub scores: Vec<(u64, f64)>,
    /// Peak-to-peak of the detrended samples over the whole range.
    pub amplitude: f64,
    /// True when all samples were exact and the detrended values are exactly zero.
    pub exact_zero: bool,
    /// `(k at max |residual|, max |residual|)` over consecutive windows.
    pub window_peaks: Vec<(u64, f64)>,
    /// Log-log slope of the window peaks.
    pub growth_exponent: Option<f64>,
    /// `(k, value, trend, residual)`.
    pub rows: Vec<(u64, f64, f64, f64)>,
}

const PERIOD_MIN_R2: f64 = 0.5;

/// Removes the best degree-`n` polynomial in `k` from the weighted kernel over
/// `ks` and looks for a period in what remains by residue-class means.
pub fn periodicity_probe(
    model: &Model,
    c: &CoefficientSequence,
    point: &PointSpec,
    ks: &[u64],
) -> Result<PeriodicityReport> {
    let m = model.m() as usize;
    if ks.len() < 3 * m.max(2) {
        return Err(Error::InsufficientSamples(format!(
            "periodicity probe needs at least {} values of k",
            3 * m.max(2)
        )));
    }
    let degree = model.n() as u32;
    let values = sample_weighted(model, c, None, point, ks)?;
    let exact: Option<Vec<BigRational>> =
        values.iter().map(|v| v.as_exact().cloned()).collect();
    let (trend, residuals, exact_zero): (Vec<f64>, Vec<f64>, bool) = match exact {
        Some(vals) => {
            let coef = polyfit_exact(ks, &vals, degree)
                .ok_or_else(|| Error::RankDeficient("exact detrend".into()))?;
            let tr: Vec<BigRational> = ks.iter().map(|&k| poly_eval_exact(&coef, k)).collect();
            let res: Vec<BigRational> = vals.iter().zip(&tr).map(|(v, t)| v - t).collect();
            let zero = res.iter().all(Zero::is_zero);
            (
                tr.iter().map(rational_to_f64).collect(),
                res.iter().map(rational_to_f64).collect(),
                zero,
            )
        }
        None => {
            let samples: Vec<(u64, f64)> = ks.iter().zip(&values).map(|(&k, v)| (k, v.to_f64())).collect();
            let b = least_squares(&samples, degree, degree)?;
            let tr: Vec<f64> = ks.iter().map(|&k| eval_expansion(&b, degree, k)).collect();
            let res = samples.iter().zip(&tr).map(|(s, t)| s.1 - t).collect();
            (tr, res, false)
        }
    };
    let rows: Vec<(u64, f64, f64, f64)> = ks
        .iter()
        .zip(&values)
        .zip(trend.iter().zip(&residuals))
        .map(|((&k, v), (&t, &r))| (k, v.to_f64(), t, r))
        .collect();
    let max = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let amplitude = if exact_zero { 0.0 } else { max - min };
    let scale = values.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
    let negligible = exact_zero || amplitude <= 1e-9 * scale;

    // the oscillation has size k^e for some e in 0..=n; score each period
    // against the envelope that fits it best
    let normalised: Vec<Vec<(u64, f64)>> = (0..=degree as i32)
        .map(|e| ks.iter().zip(&residuals).map(|(&k, &r)| (k, r / (k as f64).powi(e))).collect())
        .collect();
    let scores: Vec<(u64, f64)> = (2..=(ks.len() / 3).max(2) as u64)
        .map(|p| (p, normalised.iter().map(|s| residue_r2(s, p)).fold(0.0, f64::max)))
        .collect();
    let period = if negligible {
        None
    } else {
        let best = scores.iter().map(|s| s.1).fold(0.0, f64::max);
        if best < PERIOD_MIN_R2 {
            None
        } else {
            scores.iter().find(|s| s.1 >= 0.9 * best).map(|s| s.0)
        }
    };

    let window = period.unwrap_or(m.max(2) as u64).max(2) as usize;
    let count = if ks.len() >= 8 * window { 4 } else { 2 };
    let len = ks.len() / count;
    let window_peaks: Vec<(u64, f64)> = (0..count)
        .map(|w| {
            let end = if w + 1 == count { ks.len() } else { (w + 1) * len };
            (w * len..end)
                .map(|j| (ks[j], residuals[j].abs()))
                .fold((ks[w * len], 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
        })
        .collect();
    let growth_exponent = if negligible || window_peaks.iter().any(|w| w.1 <= 0.0) {
        None
    } else {
        let pts: Vec<(f64, f64)> =
            window_peaks.iter().map(|&(k, a)| ((k as f64).ln(), a.ln())).collect();
        Some(linear_slope(&pts))
    };
    Ok(PeriodicityReport {
        degree,
        period,
        scores,
        amplitude,
        exact_zero,
        window_peaks,
        growth_exponent,
        rows,
    })
}

/// Fraction of variance explained by residue-class means mod `p`.
fn residue_r2(samples: &[(u64, f64)], p: u64) -> f64 {
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let total: f64 = samples.iter().map(|s| (s.1 - mean).powi(2)).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut sums = vec![0.0; p as usize];
    let mut counts = vec![0usize; p as usize];
    for &(k, v) in samples {
        sums[(k % p) as usize] += v;
        counts[(k % p) as usize] += 1;
    }
    let within: f64 = samples
        .iter()
        .map(|&(k, v)| {
            let u = (k % p) as usize;
            (v - sums[u] / counts[u] as f64).powi(2)
        })
        .sum();
    1.0 - within / total
}

/// Exact least-squares polynomial of degree `d` through `(k, v)`, via the
/// normal equations in rational arithmetic.
fn polyfit_exact(ks: &[u64], vals: &[BigRational], d: u32) -> Option<Vec<BigRational>> {
    let cols = d as usize + 1;
    let mut a = vec![vec![BigRational::zero(); cols + 1]; cols];
    for (&k, v) in ks.iter().zip(vals) {
        let kr = BigRational::from_integer(BigInt::from(k));
        let powers: Vec<BigRational> = (0..2 * cols)
            .scan(BigRational::one(), |acc, _| {
                let cur = acc.clone();
                *acc = &*acc * &kr;
                Some(cur)
            })
            .collect();
        for r in 0..cols {
            for s in 0..cols {
                a[r][s] += &powers[r + s];
            }
            a[r][cols] += &powers[r] * v;
        }
    }
    for col in 0..cols {
        let pivot = (col..cols).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        for r in 0..cols {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for s in col..=cols {
                    let delta = &f * &a[col][s];
                    a[r][s] -= delta;
                }
            }
        }
    }
    Some((0..cols).map(|r| &a[r][cols] / &a[r][r]).collect())
}

fn poly_eval_exact(coef: &[BigRational], k: u64) -> BigRational {
    let kr = BigRational::from_integer(BigInt::from(k));
    coef.iter().rev().fold(BigRational::zero(), |acc, c| acc * &kr + c)
}

/// Centered finite differences of the football kernel in `rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    #[serde(with = "crate::report::rational")]
    pub rho: BigRational,
    #[serde(with = "crate::report::rational")]
    pub step: BigRational,
    /// `(k, (B(rho + h) - B(rho - h)) / 2h)`, each computed exactly.
    pub derivatives: Vec<(u64, f64)>,
    /// Slope of `log |derivative|` against `log k`, where nonzero.
    pub slope: RemainderSlope,
}

impl DerivativeCheck {
    /// The fitted expansion has constant coefficients, so its `rho` derivative
    /// vanishes and the finite differences must decay like the remainder.
    pub fn consistent(&self, n: u32, order: u32) -> bool {
        self.slope.within(n, order)
    }
}

/// `C^1` spot check of the expansion on the football: the weighted kernel's
/// centered difference quotient in `rho`, exact at every `k`.
pub fn derivative_check(
    model: &Model,
    c: &CoefficientSequence,
    rho: &BigRational,
    step: &BigRational,
    ks: &[u64],
) -> Result<DerivativeCheck> {
    model.as_football()?;
    if !step.is_positive() || step >= rho {
        return Err(Error::InvalidPoint("need 0 < h < rho".into()));
    }
    let hi = PointSpec::Football(Rho::Finite(rho + step));
    let lo = PointSpec::Football(Rho::Finite(rho - step));
    let two_h = step * BigRational::from_integer(2.into());
    let derivatives: Vec<(u64, f64)> = ks
        .par_iter()
        .map(|&k| {
            let up = weighted_bergman(model, c, k, &hi)?;
            let down = weighted_bergman(model, c, k, &lo)?;
            let (Some(u), Some(d)) = (up.as_exact(), down.as_exact()) else {
                unreachable!("football values are exact")
            };
            Ok((k, rational_to_f64(&((u - d) / &two_h))))
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = derivatives
        .iter()
        .filter(|d| d.1 != 0.0)
        .map(|&(k, d)| ((k as f64).ln(), d.abs().ln()))
        .collect();
    let slope = if pts.len() < 5 {
        RemainderSlope::Exact
    } else {
        RemainderSlope::Slope(linear_slope(&pts))
    };
    Ok(DerivativeCheck { rho: rho.clone(), step: step.clone(), derivatives, slope })
}
