//! The two exactly solvable geometries.
//!
//! * [`FlatCyclicModel`]: `C^n / (Z/m)` with potential `|z|^2`. The generator
//!   acts by `z_j -> lambda^{a_j} z_j`, `lambda = exp(2 pi i / m)`. In the weight
//!   `-1` trivialisation, sections of `L^k` are functions of weight `k mod m`, so
//!   the monomial `z^alpha` is admissible iff `sum_j a_j alpha_j = k (mod m)`.
//! * [`FootballModel`]: `P^1 / (Z/m)` acting by `[z0 : z1] -> [z0 : lambda z1]`
//!   with Fubini-Study potential `log(1 + |u|^2)`. The action on `O(1)` is twisted
//!   by the character `t`, so the linear forms `z0, z1` carry weights `t` and
//!   `t + 1`. These are the fibre weights at the two fixed points and must both be
//!   units mod `m`, which forces `m` odd. A degree `k` monomial `z0^{k-b} z1^b`
//!   has weight `t(k - b) + (t + 1) b = t k + b` and descends iff
//!   `b = -t k (mod m)`.
//!
//! Inner products carry the `1/m` orbifold volume factor and the volume form
//! `omega^n / n!` with `omega = (i / 2 pi) d dbar phi`. This gives the norms
//! `alpha! / (m k^{|alpha| + n})` (flat) and `b! (k - b)! / (m (k + 1)!)` (football).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coeffs::parse_rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatCyclicModel {
    m: u64,
    weights: Vec<u64>,
}

impl FlatCyclicModel {
    pub fn new(m: u64, weights: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("group order m must be >= 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidModel("flat model needs dimension n >= 1".into()));
        }
        let weights: Vec<u64> = weights.into_iter().map(|a| a % m).collect();
        let g = weights.iter().fold(m, |g, &a| g.gcd(&a));
        if g != 1 {
            return Err(Error::InvalidModel(format!(
                "flat action not effective: gcd(weights, m) = {g}"
            )));
        }
        Ok(Self { m, weights })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Group weight `sum_j a_j alpha_j mod m` of the monomial `z^alpha`.
    pub fn monomial_weight(&self, alpha: &[u64]) -> u64 {
        alpha
            .iter()
            .zip(&self.weights)
            .map(|(&e, &a)| (e % self.m) * a % self.m)
            .sum::<u64>()
            % self.m
    }

    pub fn is_admissible(&self, k: u64, alpha: &[u64]) -> bool {
        self.monomial_weight(alpha) == k % self.m
    }

    /// `alpha! / (m k^{|alpha| + n})`.
    pub fn norm_sq(&self, k: u64, alpha: &[u64]) -> BigRational {
        let fact: BigInt = alpha.iter().map(|&a| factorial(a)).product();
        let deg: u64 = alpha.iter().sum::<u64>() + self.n() as u64;
        let den = BigInt::from(self.m) * BigInt::from(k).pow(deg as u32);
        BigRational::new(fact, den)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FootballModel {
    m: u64,
    t: u64,
}

impl FootballModel {
    pub fn new(m: u64, t: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("group order m must be >= 1".into()));
        }
        if m % 2 == 0 {
            return Err(Error::InvalidModel("football requires m odd".into()));
        }
        let t = t % m;
        if t.gcd(&m) != 1 || (t + 1).gcd(&m) != 1 {
            return Err(Error::InvalidModel(format!(
                "football twist t={t} must make t and t+1 units mod {m}"
            )));
        }
        Ok(Self { m, t })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Residue `r(k) = -t k mod m` of admissible exponents `b`.
    pub fn residue(&self, k: u64) -> u64 {
        let tk = (self.t % self.m) * (k % self.m) % self.m;
        (self.m - tk) % self.m
    }

    pub fn is_admissible(&self, k: u64, b: u64) -> bool {
        b <= k && b % self.m == self.residue(k)
    }

    /// Admissible `b` for `L^k`, increasing.
    pub fn exponents(&self, k: u64) -> impl Iterator<Item = u64> {
        let r = self.residue(k);
        let m = self.m;
        (0..).map(move |j| r + j * m).take_while(move |&b| b <= k)
    }

    /// `b! (k - b)! / (m (k + 1)!)`.
    pub fn norm_sq(&self, k: u64, b: u64) -> BigRational {
        assert!(b <= k);
        BigRational::new(
            factorial(b) * factorial(k - b),
            BigInt::from(self.m) * factorial(k + 1),
        )
    }

    pub fn h0(&self, k: u64) -> u64 {
        let r = self.residue(k);
        if r > k {
            0
        } else {
            (k - r) / self.m + 1
        }
    }
}

/// A validated model geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelDescriptor", into = "ModelDescriptor")]
pub enum Model {
    Flat(FlatCyclicModel),
    Football(FootballModel),
}

/// Wire form of a model: `{"kind":"flat","n":..,"m":..,"weights":[..]}` or
/// `{"kind":"football","m":..,"t":..}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelDescriptor {
    Flat { n: usize, m: u64, weights: Vec<u64> },
    Football { m: u64, t: u64 },
}

impl TryFrom<ModelDescriptor> for Model {
    type Error = Error;

    fn try_from(d: ModelDescriptor) -> Result<Self> {
        match d {
            ModelDescriptor::Flat { n, m, weights } => {
                if weights.len() != n {
                    return Err(Error::InvalidModel(format!(
                        "flat model declares n={n} but lists {} weights",
                        weights.len()
                    )));
                }
                FlatCyclicModel::new(m, weights).map(Model::Flat)
            }
            ModelDescriptor::Football { m, t } => FootballModel::new(m, t).map(Model::Football),
        }
    }
}

impl From<Model> for ModelDescriptor {
    fn from(m: Model) -> Self {
        match m {
            Model::Flat(f) => ModelDescriptor::Flat { n: f.n(), m: f.m, weights: f.weights },
            Model::Football(f) => ModelDescriptor::Football { m: f.m, t: f.t },
        }
    }
}

impl Model {
    pub fn flat(m: u64, weights: Vec<u64>) -> Result<Self> {
        FlatCyclicModel::new(m, weights).map(Model::Flat)
    }

    pub fn football(m: u64, t: u64) -> Result<Self> {
        FootballModel::new(m, t).map(Model::Football)
    }

    pub fn m(&self) -> u64 {
        match self {
            Model::Flat(f) => f.m,
            Model::Football(f) => f.m,
        }
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        match self {
            Model::Flat(f) => f.n(),
            Model::Football(_) => 1,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Model::Football(_))
    }

    pub fn as_flat(&self) -> Result<&FlatCyclicModel> {
        match self {
            Model::Flat(f) => Ok(f),
            Model::Football(_) => Err(Error::FlatOnly),
        }
    }

    pub fn as_football(&self) -> Result<&FootballModel> {
        match self {
            Model::Football(f) => Ok(f),
            Model::Flat(_) => Err(Error::NoncompactHilbert),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Flat(fl) => {
                let w: Vec<String> = fl.weights.iter().map(u64::to_string).collect();
                write!(f, "flat:m={},weights={}", fl.m, w.join("+"))
            }
            Model::Football(fb) => write!(f, "football:m={},t={}", fb.m, fb.t),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    /// `football:m=3,t=1`, `flat:m=2,weights=1+2` or `flat:n=2,m=3` (unit weights).
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut m = None;
        let mut t = None;
        let mut n = None;
        let mut weights = None;
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("{key}='{v}': {e}")))
            };
            match key.trim() {
                "m" => m = Some(num(val)?),
                "t" => t = Some(num(val)?),
                "n" => n = Some(num(val)? as usize),
                "weights" | "w" => {
                    weights = Some(val.split('+').map(num).collect::<Result<Vec<_>>>()?)
                }
                other => return Err(Error::Parse(format!("unknown model key '{other}'"))),
            }
        }
        let m = m.ok_or_else(|| Error::Parse("model needs m=".into()))?;
        let desc = match kind.trim() {
            "football" => ModelDescriptor::Football { m, t: t.unwrap_or(1) },
            "flat" => {
                let weights = weights.unwrap_or_else(|| vec![1; n.unwrap_or(1)]);
                ModelDescriptor::Flat { n: n.unwrap_or(weights.len()), m, weights }
            }
            other => return Err(Error::Parse(format!("unknown model kind '{other}'"))),
        };
        Model::try_from(desc)
    }
}

/// Radial coordinate on the football: `rho = |u|^2` in the affine chart, or the
/// second fixed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rho {
    Finite(BigRational),
    Infinity,
}

impl Rho {
    pub fn finite(r: BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidPoint(format!("rho = {r} is negative")));
        }
        Ok(Rho::Finite(r))
    }

    pub fn integer(r: u64) -> Self {
        Rho::Finite(BigRational::from_integer(BigInt::from(r)))
    }

    pub fn ratio(num: u64, den: u64) -> Self {
        Rho::Finite(BigRational::new(num.into(), den.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rho::Finite(r) => crate::rational_to_f64(r),
            Rho::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rho::Finite(r) => write!(f, "{r}"),
            Rho::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Rho {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" => Ok(Rho::Infinity),
            other => Rho::finite(parse_rational(other)?),
        }
    }
}

/// Evaluation point. Both models have circle symmetry in each coordinate, so
/// diagonal kernels only see moduli.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSpec {
    /// `(|z_1|, ..., |z_n|)`.
    Flat(Vec<f64>),
    Football(Rho),
}

impl PointSpec {
    pub fn flat_origin(n: usize) -> Self {
        PointSpec::Flat(vec![0.0; n])
    }

    pub fn check_for(&self, model: &Model) -> Result<()> {
        match (self, model) {
            (PointSpec::Flat(x), Model::Flat(f)) => {
                if x.len() != f.n() {
                    return Err(Error::InvalidPoint(format!(
                        "flat point has {} coordinates, model has n={}",
                        x.len(),
                        f.n()
                    )));
                }
                if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidPoint("moduli must be finite and >= 0".into()));
                }
                Ok(())
            }
            (PointSpec::Football(_), Model::Football(_)) => Ok(()),
            _ => Err(Error::InvalidPoint("point kind does not match model".into())),
        }
    }
}

impl fmt::Display for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSpec::Flat(x) => {
                let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
                write!(f, "{}", parts.join("+"))
            }
            PointSpec::Football(r) => write!(f, "{r}"),
        }
    }
}

/// One basis monomial with its exact `L^2` norm squared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionEntry {
    /// Flat: `alpha`. Football: `[k - b, b]` for `z0^{k-b} z1^b`.
    pub exponent: Vec<u64>,
    #[serde(with = "crate::report::rational")]
    pub norm_sq: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionBasis {
    pub k: u64,
    pub entries: Vec<SectionEntry>,
}

impl SectionBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Monomial basis of the invariant sections of `L^k`. The flat basis is
/// infinite and is truncated at total degree `cap`.
pub fn section_basis(model: &Model, k: u64, cap: Option<u64>) -> Result<SectionBasis> {
    if k == 0 {
        return Err(Error::InvalidModel("k must be >= 1".into()));
    }
    let entries = match model {
        Model::Football(fb) => fb
            .exponents(k)
            .map(|b| SectionEntry { exponent: vec![k - b, b], norm_sq: fb.norm_sq(k, b) })
            .collect(),
        Model::Flat(fl) => {
            let cap = cap.ok_or(Error::InfiniteBasis)?;
            let mut out = Vec::new();
            for d in 0..=cap {
                for_each_composition(fl.n(), d, &mut |alpha| {
                    if fl.is_admissible(k, alpha) {
                        out.push(SectionEntry {
                            exponent: alpha.to_vec(),
                            norm_sq: fl.norm_sq(k, alpha),
                        });
                    }
                });
            }
            out
        }
    };
    Ok(SectionBasis { k, entries })
}

/// `h^0(L^k)` on the compact model.
pub fn h0(model: &Model, k: u64) -> Result<u64> {
    match model {
        Model::Football(fb) => Ok(fb.h0(k)),
        Model::Flat(_) => Err(Error::NoncompactHilbert),
    }
}

/// Scalar curvature in the normalisation where the manifold Bergman kernel is
/// `k^n + Scal/2 k^{n-1} + ...`. Both models have constant curvature.
pub fn scalar_curvature(model: &Model, point: &PointSpec) -> Result<BigRational> {
    point.check_for(model)?;
    Ok(match model {
        Model::Flat(_) => BigRational::zero(),
        // Gaussian curvature 4 pi of the area-one round metric, divided by 2 pi.
        Model::Football(_) => BigRational::from_integer(2.into()),
    })
}

/// `(int c1(L), int c1(K_orb))` over the orbifold: `1/m` times the `P^1` degrees.
pub fn geometric_degrees(model: &Model) -> Result<(BigRational, BigRational)> {
    match model {
        Model::Football(fb) => {
            let m = BigInt::from(fb.m);
            Ok((
                BigRational::new(BigInt::one(), m.clone()),
                BigRational::new(BigInt::from(-2), m),
            ))
        }
        Model::Flat(_) => Err(Error::Noncompact("flat model has no global degrees")),
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Calls `f` on every `alpha` in `N^n` with `|alpha| = d`, lexicographically.
pub(crate) fn for_each_composition(n: usize, d: u64, f: &mut dyn FnMut(&[u64])) {
    fn rec(pos: usize, left: u64, alpha: &mut [u64], f: &mut dyn FnMut(&[u64])) {
        if pos + 1 == alpha.len() {
            alpha[pos] = left;
            f(alpha);
            return;
        }
        for a in (0..=left).rev() {
            alpha[pos] = a;
            rec(pos + 1, left - a, alpha, f);
        }
    }
    let mut alpha = vec![0; n];
    rec(0, d, &mut alpha, f);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn football_basis_examples() {
        let fb = Model::football(3, 1).unwrap();
        let b = section_basis(&fb, 3, None).unwrap();
        let bs: Vec<u64> = b.entries.iter().map(|e| e.exponent[1]).collect();
        assert_eq!(bs, vec![0, 3]);
        assert!(b.entries.iter().all(|e| e.norm_sq == q(1, 12)));

        let p1 = Model::football(1, 0).unwrap();
        let b = section_basis(&p1, 2, None).unwrap();
        let norms: Vec<_> = b.entries.iter().map(|e| e.norm_sq.clone()).collect();
        assert_eq!(norms, vec![q(1, 3), q(1, 6), q(1, 3)]);
    }

    #[test]
    fn flat_basis_example() {
        let fl = Model::flat(2, vec![1]).unwrap();
        let b = section_basis(&fl, 3, Some(5)).unwrap();
        let alphas: Vec<u64> = b.entries.iter().map(|e| e.exponent[0]).collect();
        assert_eq!(alphas, vec![1, 3, 5]);
        assert_eq!(b.entries[0].norm_sq, q(1, 18));
        assert_eq!(section_basis(&fl, 3, None), Err(Error::InfiniteBasis));
    }

    #[test]
    fn flat_two_dimensional_congruence() {
        let fl = Model::flat(3, vec![1, 2]).unwrap();
        let b = section_basis(&fl, 4, Some(6)).unwrap();
        let f = fl.as_flat().unwrap();
        assert!(!b.is_empty());
        for e in &b.entries {
            assert_eq!((e.exponent[0] + 2 * e.exponent[1]) % 3, 1);
            assert!(f.is_admissible(4, &e.exponent));
        }
    }

    #[test]
    fn h0_examples() {
        let fb = Model::football(3, 1).unwrap();
        assert_eq!(h0(&fb, 3).unwrap(), 2);
        assert_eq!(h0(&fb, 4).unwrap(), 1);
        let p1 = Model::football(1, 0).unwrap();
        for k in 1..30 {
            assert_eq!(h0(&p1, k).unwrap(), k + 1);
        }
        assert_eq!(h0(&Model::flat(2, vec![1]).unwrap(), 3), Err(Error::NoncompactHilbert));
    }

    #[test]
    fn basis_size_matches_h0() {
        for (m, t) in [(1, 0), (3, 1), (5, 1), (5, 2), (7, 3), (9, 1)] {
            let model = Model::football(m, t).unwrap();
            for k in 1..=200 {
                let basis = section_basis(&model, k, None).unwrap();
                assert_eq!(basis.len() as u64, h0(&model, k).unwrap(), "m={m} t={t} k={k}");
                let fb = model.as_football().unwrap();
                for e in &basis.entries {
                    assert_eq!((fb.t() * k + e.exponent[1]) % m, 0);
                }
            }
        }
    }

    #[test]
    fn football_requires_odd_m() {
        for m in (2..20).step_by(2) {
            for t in 0..m {
                assert!(FootballModel::new(m, t).is_err());
            }
        }
        for m in (1..20).step_by(2) {
            assert!(FootballModel::new(m, 1).is_ok(), "m={m}");
        }
        assert_eq!(
            FootballModel::new(2, 1).unwrap_err().to_string(),
            "invalid model: football requires m odd"
        );
        // t = 2 makes t + 1 = 3 a non-unit mod 9
        assert!(FootballModel::new(9, 2).is_err());
        for m in 1..10 {
            assert!(FlatCyclicModel::new(m, vec![1]).is_ok());
        }
        assert!(FlatCyclicModel::new(4, vec![2]).is_err());
    }

    #[test]
    fn degrees_and_curvature() {
        let p1 = Model::football(1, 0).unwrap();
        assert_eq!(geometric_degrees(&p1).unwrap(), (q(1, 1), q(-2, 1)));
        let fb = Model::football(3, 1).unwrap();
        assert_eq!(geometric_degrees(&fb).unwrap(), (q(1, 3), q(-2, 3)));
        let fl = Model::flat(2, vec![1]).unwrap();
        assert!(geometric_degrees(&fl).is_err());
        assert_eq!(
            scalar_curvature(&fl, &PointSpec::Flat(vec![0.3])).unwrap(),
            BigRational::zero()
        );
        assert_eq!(
            scalar_curvature(&fb, &PointSpec::Football(Rho::integer(0))).unwrap(),
            q(2, 1)
        );
    }

    #[test]
    fn descriptor_json() {
        let fl = Model::flat(3, vec![1, 2]).unwrap();
        let s = serde_json::to_string(&fl).unwrap();
        assert_eq!(s, r#"{"kind":"flat","n":2,"m":3,"weights":[1,2]}"#);
        assert_eq!(serde_json::from_str::<Model>(&s).unwrap(), fl);
        let fb = Model::football(5, 1).unwrap();
        let s = serde_json::to_string(&fb).unwrap();
        assert_eq!(s, r#"{"kind":"football","m":5,"t":1}"#);
        assert!(serde_json::from_str::<Model>(r#"{"kind":"football","m":4,"t":1}"#).is_err());
        assert!(serde_json::from_str::<Model>(r#"{"kind":"flat","n":2,"m":3,"weights":[1]}"#).is_err());
    }

    #[test]
    fn flag_grammar() {
        assert_eq!("football:m=3,t=1".parse::<Model>().unwrap(), Model::football(3, 1).unwrap());
        assert_eq!("flat:m=2".parse::<Model>().unwrap(), Model::flat(2, vec![1]).unwrap());
        assert_eq!(
            "flat:m=3,weights=1+2".parse::<Model>().unwrap(),
            Model::flat(3, vec![1, 2]).unwrap()
        );
        assert_eq!("flat:n=2,m=3".parse::<Model>().unwrap(), Model::flat(3, vec![1, 1]).unwrap());
        assert!("football:m=2,t=1".parse::<Model>().is_err());
        assert!("torus:m=2".parse::<Model>().is_err());
        let m = Model::flat(3, vec![1, 2]).unwrap();
        assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
    }

    #[test]
    fn rho_parsing() {
        assert_eq!("inf".parse::<Rho>().unwrap(), Rho::Infinity);
        assert_eq!("1/4".parse::<Rho>().unwrap(), Rho::ratio(1, 4));
        assert!("-1".parse::<Rho>().is_err());
    }
}
