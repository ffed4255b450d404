//! Weighted Hilbert functions on the football and their intersection-number
//! prediction
//!
//! ```text
//! sum_i c_i h0(L^{k+i}) = a_0 k^n + a_1 k^{n-1} + O(k^{n-2}),
//! a_0 = (sum c_i / n!) int c1(L)^n,
//! a_1 = (sum i c_i / (n-1)!) int c1(L)^n - (sum c_i / (2 (n-1)!)) int c1(K) c1(L)^{n-1}.
//! ```
//!
//! Only `n = 1` is exercised, where `a_1 = deg L sum i c_i - deg K sum c_i / 2`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeffs::{satisfies_condition, CoefficientSequence};
use crate::error::{Error, Result};
use crate::models::{geometric_degrees, Model};

/// `sum_i c_i h0(L^{k+i})`, exact.
pub fn weighted_hilbert(model: &Model, c: &CoefficientSequence, k: u64) -> Result<BigRational> {
    let fb = model.as_football()?;
    let report = satisfies_condition(c, fb.m(), 1);
    if !report.holds {
        log::warn!(
            "coefficients fail the moment condition at p = {:?} for m = {}",
            report.first_failing_moment(),
            fb.m()
        );
    }
    Ok(c.iter()
        .map(|(i, ci)| ci * BigRational::from_integer(fb.h0(k + i).into()))
        .fold(BigRational::zero(), |a, b| a + b))
}

/// `(a_0, a_1)` from the orbifold degrees of `L` and `K`.
pub fn predicted_a0_a1(model: &Model, c: &CoefficientSequence) -> Result<(BigRational, BigRational)> {
    if !model.is_compact() {
        return Err(Error::NoncompactHilbert);
    }
    let (deg_l, deg_k) = geometric_degrees(model)?;
    let total = c.total();
    let first = c.moment(1);
    let a0 = &total * &deg_l;
    let a1 = &first * &deg_l - &total * &deg_k / BigRational::from_integer(2.into());
    Ok((a0, a1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RRRow {
    pub k: u64,
    #[serde(with = "crate::report::rational")]
    pub weighted_h0: BigRational,
    #[serde(with = "crate::report::rational")]
    pub predicted: BigRational,
    #[serde(with = "crate::report::rational")]
    pub difference: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RRReport {
    #[serde(with = "crate::report::rational")]
    pub a0: BigRational,
    #[serde(with = "crate::report::rational")]
    pub a1: BigRational,
    pub rows: Vec<RRRow>,
    /// Smallest `k` in the table from which every difference vanishes.
    pub k0: Option<u64>,
}

impl RRReport {
    /// True when every difference at `k >= from` is zero.
    pub fn exact_from(&self, from: u64) -> bool {
        self.rows.iter().filter(|r| r.k >= from).all(|r| r.difference.is_zero())
    }

    /// Smallest `p` with `difference(k) = difference(k + p)` across the table.
    pub fn difference_period(&self) -> Option<u64> {
        let n = self.rows.len();
        (1..=(n / 2) as u64).find(|&p| {
            let p = p as usize;
            (0..n - p).all(|j| self.rows[j].difference == self.rows[j + p].difference)
        })
    }
}

pub fn rr_check<I>(model: &Model, c: &CoefficientSequence, ks: I) -> Result<RRReport>
where
    I: IntoIterator<Item = u64>,
{
    let (a0, a1) = predicted_a0_a1(model, c)?;
    let mut rows = Vec::new();
    for k in ks {
        let weighted_h0 = weighted_hilbert(model, c, k)?;
        let predicted = &a0 * BigRational::from_integer(k.into()) + &a1;
        let difference = &weighted_h0 - &predicted;
        rows.push(RRRow { k, weighted_h0, predicted, difference });
    }
    let k0 = match rows.iter().rposition(|r| !r.difference.is_zero()) {
        None => rows.first().map(|r| r.k),
        Some(j) => rows.get(j + 1).map(|r| r.k),
    };
    Ok(RRReport { a0, a1, rows, k0 })
}
