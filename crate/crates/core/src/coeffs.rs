//! Coefficient sequences `c_i` and the residue-class moment conditions on them.
//!
//! Everything here is exact: integers are [`BigInt`] and weights are
//! [`BigRational`]. The moment condition at order `P` for a stabiliser of order
//! `m` asks that, for every `p <= P`, the sums `sum_{i = u mod m} i^p c_i` agree
//! across all residues `u`. It is equivalent to `sum_i c_i z^i` being divisible
//! by `((z^m - 1)/(z - 1))^(P+1)`, which is what [`root_order_at_unity`] measures.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported, strictly positive weights `c_i` indexed by `i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct CoefficientSequence {
    entries: BTreeMap<u64, BigRational>,
}

impl CoefficientSequence {
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, BigRational)>,
    {
        let mut map = BTreeMap::new();
        for (i, c) in entries {
            if !c.is_positive() {
                return Err(Error::InvalidCoefficients(format!(
                    "c_{i} = {c} is not strictly positive"
                )));
            }
            if map.insert(i, c).is_some() {
                return Err(Error::InvalidCoefficients(format!("duplicate index {i}")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidCoefficients("empty support".into()));
        }
        Ok(Self { entries: map })
    }

    /// Integer weights; convenient for literals such as `{0:1, 1:2, 2:1}`.
    pub fn from_integers<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, i64)>,
    {
        Self::new(
            entries
                .into_iter()
                .map(|(i, c)| (i, BigRational::from_integer(BigInt::from(c)))),
        )
    }

    /// Dense integer weights starting at index 0. Zero entries are skipped.
    pub fn from_dense(weights: &[i64]) -> Result<Self> {
        Self::from_integers(
            weights
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (i as u64, c)),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> + '_ {
        self.entries.iter().map(|(&i, c)| (i, c))
    }

    pub fn get(&self, i: u64) -> Option<&BigRational> {
        self.entries.get(&i)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> u64 {
        *self.entries.keys().next_back().expect("nonempty support")
    }

    /// `sum_i i^p c_i` with `0^0 = 1`.
    pub fn moment(&self, p: u32) -> BigRational {
        self.iter()
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i).pow(p)))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// `sum_i c_i`.
    pub fn total(&self) -> BigRational {
        self.moment(0)
    }

    /// The sequence `{ i^a c_i }`, dropping `i = 0` when `a > 0`.
    pub fn scaled_by_power(&self, a: u32) -> Result<Self> {
        Self::new(self.iter().filter_map(|(i, c)| {
            let w = BigInt::from(i).pow(a);
            (!w.is_zero()).then(|| (i, c * BigRational::from_integer(w)))
        }))
    }

    /// Dense coefficient vector of `sum_i c_i z^i`.
    pub(crate) fn dense(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.max_index() as usize + 1];
        for (i, c) in self.iter() {
            v[i as usize] = c.clone();
        }
        v
    }
}

impl fmt::Display for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (i, c)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    entries: Vec<(u64, String)>,
}

impl TryFrom<SequenceRepr> for CoefficientSequence {
    type Error = Error;

    fn try_from(repr: SequenceRepr) -> Result<Self> {
        let parsed = repr
            .entries
            .into_iter()
            .map(|(i, s)| parse_rational(&s).map(|c| (i, c)))
            .collect::<Result<Vec<_>>>()?;
        CoefficientSequence::new(parsed)
    }
}

impl From<CoefficientSequence> for SequenceRepr {
    fn from(c: CoefficientSequence) -> Self {
        SequenceRepr {
            entries: c.entries.into_iter().map(|(i, c)| (i, c.to_string())).collect(),
        }
    }
}

/// Parses `"p"` or `"p/q"`; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.contains('.') || s.contains('e') || s.contains('E') {
        return Err(Error::Parse(format!("'{s}' is not a decimal-free rational")));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        let den = BigInt::from_str(den.trim()).map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("'{s}': zero denominator")));
        }
        Ok(BigRational::new(num, den))
    } else {
        BigInt::from_str(s)
            .map(BigRational::from_integer)
            .map_err(|e| Error::Parse(format!("'{s}': {e}")))
    }
}

/// Stabiliser order, expansion order and derivative order for the smoothing
/// condition. The condition is imposed on moments `p = 0..=N + r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessSpec {
    pub m: u64,
    pub order: u32,
    pub derivatives: u32,
}

impl SmoothnessSpec {
    pub fn new(m: u64, order: u32, derivatives: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidCoefficients("stabiliser order m must be >= 1".into()));
        }
        Ok(Self { m, order, derivatives })
    }

    /// `P = N + r`.
    pub fn moment_order(&self) -> u32 {
        self.order + self.derivatives
    }

    pub fn is_satisfied_by(&self, c: &CoefficientSequence) -> bool {
        satisfies_condition(c, self.m, self.moment_order()).holds
    }

    /// Canonical choice `(1 + z + ... + z^{m-1})^{N+r+1}`.
    pub fn canonical(&self) -> CoefficientSequence {
        canonical_sequence(self.m, self.moment_order() + 1)
    }
}

/// Coefficients of `(1 + z + ... + z^{m-1})^q`.
pub fn canonical_sequence(m: u64, q: u32) -> CoefficientSequence {
    assert!(m >= 1 && q >= 1, "canonical_sequence needs m >= 1 and q >= 1");
    let base = vec![BigInt::one(); m as usize];
    let mut acc = vec![BigInt::one()];
    for _ in 0..q {
        let mut next = vec![BigInt::zero(); acc.len() + base.len() - 1];
        for (a, x) in acc.iter().enumerate() {
            for (b, y) in base.iter().enumerate() {
                next[a + b] += x * y;
            }
        }
        acc = next;
    }
    CoefficientSequence::new(
        acc.into_iter()
            .enumerate()
            .map(|(i, c)| (i as u64, BigRational::from_integer(c))),
    )
    .expect("canonical coefficients are positive")
}

/// Residue-class sums for one moment order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: u32,
    /// `sum_{i = u mod m} i^p c_i` for `u = 0..m`.
    #[serde(with = "crate::report::rational_vec")]
    pub residue_sums: Vec<BigRational>,
    /// `(1/m) sum_i i^p c_i`.
    #[serde(with = "crate::report::rational")]
    pub mean: BigRational,
    pub balanced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub m: u64,
    pub max_moment: u32,
    pub holds: bool,
    pub rows: Vec<MomentRow>,
}

impl ConditionReport {
    /// First moment order at which the residue sums disagree.
    pub fn first_failing_moment(&self) -> Option<u32> {
        self.rows.iter().find(|r| !r.balanced).map(|r| r.p)
    }
}

/// Checks `sum_{i = u mod m} i^p c_i = (1/m) sum_i i^p c_i` for all `u` and
/// all `p <= max_moment`.
pub fn satisfies_condition(c: &CoefficientSequence, m: u64, max_moment: u32) -> ConditionReport {
    assert!(m >= 1, "stabiliser order must be positive");
    let mut rows = Vec::with_capacity(max_moment as usize + 1);
    for p in 0..=max_moment {
        let mut sums = vec![BigRational::zero(); m as usize];
        for (i, ci) in c.iter() {
            let w = BigRational::from_integer(BigInt::from(i).pow(p));
            sums[(i % m) as usize] += ci * w;
        }
        let total = sums.iter().fold(BigRational::zero(), |a, s| a + s);
        let mean = total / BigRational::from_integer(BigInt::from(m));
        let balanced = sums.iter().all(|s| *s == mean);
        rows.push(MomentRow { p, residue_sums: sums, mean, balanced });
    }
    let holds = rows.iter().all(|r| r.balanced);
    ConditionReport { m, max_moment, holds, rows }
}

/// Multiplicity of the nontrivial `m`-th roots of unity as common roots of
/// `sum_i c_i z^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootOrder {
    /// `m = 1`: there are no nontrivial roots, hence no constraint.
    Unconstrained,
    Order(u32),
}

impl RootOrder {
    /// Whether the order reaches `q`; always true when unconstrained.
    pub fn at_least(self, q: u32) -> bool {
        match self {
            RootOrder::Unconstrained => true,
            RootOrder::Order(o) => o >= q,
        }
    }
}

impl fmt::Display for RootOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootOrder::Unconstrained => write!(f, "unconstrained"),
            RootOrder::Order(q) => write!(f, "{q}"),
        }
    }
}

/// Largest `q` with `((z^m - 1)/(z - 1))^q | sum_i c_i z^i`, by repeated exact
/// division.
pub fn root_order_at_unity(c: &CoefficientSequence, m: u64) -> RootOrder {
    if m <= 1 {
        return RootOrder::Unconstrained;
    }
    let divisor = vec![BigRational::one(); m as usize];
    let mut poly = c.dense();
    let mut q = 0;
    loop {
        match divide_exact(&poly, &divisor) {
            Some(quot) => {
                q += 1;
                poly = quot;
            }
            None => return RootOrder::Order(q),
        }
    }
}

/// Exact quotient `num / den` if the remainder vanishes. `den` must have a
/// nonzero leading coefficient.
fn divide_exact(num: &[BigRational], den: &[BigRational]) -> Option<Vec<BigRational>> {
    let num = trim(num);
    if num.len() < den.len() {
        return None;
    }
    let lead = den.last().expect("nonempty divisor");
    let mut rem = num.to_vec();
    let qlen = num.len() - den.len() + 1;
    let mut quot = vec![BigRational::zero(); qlen];
    for d in (0..qlen).rev() {
        let coef = &rem[d + den.len() - 1] / lead;
        if coef.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[d + j] -= &coef * dj;
        }
        quot[d] = coef;
    }
    rem.iter().all(Zero::is_zero).then_some(quot)
}

fn trim(p: &[BigRational]) -> &[BigRational] {
    let mut end = p.len();
    while end > 0 && p[end - 1].is_zero() {
        end -= 1;
    }
    &p[..end]
}

/// Positive divisors of `m` in increasing order.
pub fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            small.push(d);
            if d != m / d {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
