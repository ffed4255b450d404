//! Report documents written by the command-line tool, and the string encoding
//! of exact rationals (`"p/q"`) used in every JSON output.
//!
//! Documents carry no timestamps or host data: the same command reproduces the
//! same bytes.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bergman::{KernelNumber, KernelValue};
use crate::coeffs::{CoefficientSequence, ConditionReport, RootOrder};
use crate::error::{Error, Result};
use crate::expansion::{
    DerivativeCheck, ExpansionFit, FitVerdict, PeriodicityReport, PredictedCoefficients,
};
use crate::localkernel::{DecayReport, ReproducingCheck};
use crate::models::Model;
use crate::riemannroch::RRReport;

pub mod rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::coeffs::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(ToString::to_string).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| crate::coeffs::parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: Option<Model>,
    pub coefficients: Option<CoefficientSequence>,
    pub parameters: BTreeMap<String, String>,
}

impl ReportHeader {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model: None,
            coefficients: None,
            parameters: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffsData {
    pub m: u64,
    pub condition: ConditionReport,
    pub root_order: RootOrder,
    /// `(d, condition holds with m replaced by d)` for each divisor `d > 1`.
    pub divisors: Vec<(u64, bool)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub point: String,
    pub value: KernelValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpandPoint {
    pub point: String,
    pub samples: Vec<(u64, f64)>,
    pub fit: ExpansionFit,
    pub predicted: PredictedCoefficients,
    pub verdict: FitVerdict,
    pub derivative: Option<DerivativeCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityData {
    pub point: String,
    pub condition: ConditionReport,
    pub probe: PeriodicityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalData {
    pub reproducing: Vec<ReproducingCheck>,
    pub decay: Vec<DecayReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum ReportData {
    Coeffs(CoeffsData),
    Kernel(Vec<KernelRow>),
    Expand(Vec<ExpandPoint>),
    Rr(RRReport),
    Necessity(NecessityData),
    Localcheck(LocalData),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub header: ReportHeader,
    pub data: ReportData,
    pub verdicts: Vec<Verdict>,
}

/// JSON summary written next to the `expand` CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpandSummary {
    pub point: String,
    pub b_hat: Vec<f64>,
    pub b_pred: PredictedCoefficients,
    pub slope: crate::expansion::RemainderSlope,
    pub verdict: bool,
}

impl ReportDocument {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// `(file name, contents)` for the CSV rendering.
    pub fn csv_files(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        match &self.data {
            ReportData::Coeffs(d) => {
                let mut rows = Vec::new();
                for r in &d.condition.rows {
                    for (u, s) in r.residue_sums.iter().enumerate() {
                        rows.push(vec![
                            r.p.to_string(),
                            u.to_string(),
                            fmt_rational(s),
                            fmt_rational(&r.mean),
                            r.balanced.to_string(),
                        ]);
                    }
                }
                out.push(("coeffs.csv".into(), csv_string(&["p", "residue", "sum", "mean", "balanced"], &rows)?));
            }
            ReportData::Kernel(rows) => {
                let rows: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.value.k.to_string(),
                            r.point.clone(),
                            fmt_sig(r.value.to_f64()),
                            r.value.is_exact().to_string(),
                            fmt_sig(r.value.err_bound()),
                        ]
                    })
                    .collect();
                out.push((
                    "kernel.csv".into(),
                    csv_string(&["k", "point", "value", "exact_flag", "err_bound"], &rows)?,
                ));
            }
            ReportData::Expand(points) => {
                for (j, p) in points.iter().enumerate() {
                    let rows: Vec<Vec<String>> = p
                        .samples
                        .iter()
                        .zip(&p.fit.residuals)
                        .map(|(&(k, v), &(_, r))| {
                            vec![k.to_string(), fmt_sig(v), fmt_sig(p.fit.fitted(k)), fmt_sig(r)]
                        })
                        .collect();
                    let name = if points.len() == 1 {
                        "expand.csv".to_string()
                    } else {
                        format!("expand_{}.csv", j + 1)
                    };
                    out.push((name, csv_string(&["k", "value", "fitted", "residual"], &rows)?));
                }
                let summary: Vec<ExpandSummary> = points
                    .iter()
                    .map(|p| ExpandSummary {
                        point: p.point.clone(),
                        b_hat: p.fit.b_hat.clone(),
                        b_pred: p.predicted.clone(),
                        slope: p.fit.remainder_slope,
                        verdict: p.verdict.passed(),
                    })
                    .collect();
                let mut json = serde_json::to_string_pretty(&summary).expect("summary serialises");
                json.push('\n');
                out.push(("expand_summary.json".into(), json));
            }
            ReportData::Rr(rep) => {
                let rows: Vec<Vec<String>> = rep
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.k.to_string(),
                            fmt_rational(&r.weighted_h0),
                            fmt_rational(&r.predicted),
                            fmt_rational(&r.difference),
                        ]
                    })
                    .collect();
                out.push((
                    "rr.csv".into(),
                    csv_string(&["k", "weighted_h0", "predicted", "difference"], &rows)?,
                ));
            }
            ReportData::Necessity(d) => {
                let rows: Vec<Vec<String>> = d
                    .probe
                    .rows
                    .iter()
                    .map(|&(k, v, t, r)| vec![k.to_string(), fmt_sig(v), fmt_sig(t), fmt_sig(r)])
                    .collect();
                out.push((
                    "necessity.csv".into(),
                    csv_string(&["k", "value", "trend", "residual"], &rows)?,
                ));
            }
            ReportData::Localcheck(d) => {
                let rows: Vec<Vec<String>> = d
                    .reproducing
                    .iter()
                    .map(|r| vec![r.k.to_string(), fmt_sig(r.residual)])
                    .collect();
                out.push(("localcheck_reproducing.csv".into(), csv_string(&["k", "residual"], &rows)?));
                let rows: Vec<Vec<String>> = d
                    .decay
                    .iter()
                    .flat_map(|rep| {
                        rep.per_k.iter().map(move |&(k, v)| {
                            vec![rep.s.to_string(), rep.v.to_string(), k.to_string(), fmt_sig(v)]
                        })
                    })
                    .collect();
                out.push((
                    "localcheck_decay.csv".into(),
                    csv_string(&["s", "v", "k", "sup_value"], &rows)?,
                ));
            }
        }
        Ok(out)
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Decimal rendering with 15 significant digits, trailing zeros removed;
/// scientific notation outside `[1e-5, 1e15)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..15).contains(&exp) {
        let m = trim_zeros(&format!("{}.{}", &digits[..1], &digits[1..]));
        return format!("{sign}{m}e{exp}");
    }
    let body = if exp >= 0 {
        let int_len = exp as usize + 1;
        format!("{}.{}", &digits[..int_len], &digits[int_len..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim_zeros(&body))
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Integers print as integers, other rationals through [`fmt_sig`].
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        fmt_sig(crate::rational_to_f64(r))
    }
}

/// Decimal value of a kernel number for tables.
pub fn fmt_kernel(v: &KernelNumber) -> String {
    match v {
        KernelNumber::Exact(r) => fmt_rational(r),
        KernelNumber::Approx { value, .. } => fmt_sig(*value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{canonical_sequence, root_order_at_unity, satisfies_condition};

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(117.0), "117");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0 * 1e-3), "0.000666666666666667");
        assert_eq!(fmt_sig(6.020041800771879e-14), "6.02004180077188e-14");
        assert_eq!(fmt_sig(1e20), "1e20");
        assert_eq!(fmt_sig(123456789012345.6), "123456789012346");
    }

    #[test]
    fn json_roundtrip() {
        let c = canonical_sequence(3, 2);
        let mut header = ReportHeader::new("coeffs").param("check_P", 1);
        header.coefficients = Some(c.clone());
        header.model = Some(Model::football(3, 1).unwrap());
        let doc = ReportDocument {
            header,
            data: ReportData::Coeffs(CoeffsData {
                m: 3,
                condition: satisfies_condition(&c, 3, 1),
                root_order: root_order_at_unity(&c, 3),
                divisors: vec![(3, true)],
            }),
            verdicts: vec![Verdict::new("condition", true, "holds")],
        };
        let json = doc.to_json();
        assert_eq!(ReportDocument::from_json(&json).unwrap(), doc);
        assert_eq!(doc.to_json(), json);
        let csv = &doc.csv_files().unwrap()[0].1;
        assert!(csv.starts_with("p,residue,sum,mean,balanced\n0,0,3,3,true\n"));
    }
}
