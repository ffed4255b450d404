//! Command-line front end. Each subcommand builds a [`ReportDocument`] and
//! either prints it or writes it under `--out`.
//!
//! Exit codes: `0` success, `1` a verdict failed, `2` invalid input.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;

use crate::bergman::HomogeneousPoly;
use crate::coeffs::{
    canonical_sequence, divisors, parse_rational, root_order_at_unity, satisfies_condition,
    CoefficientSequence,
};
use crate::error::{Error, Result};
use crate::expansion::{
    compare, derivative_check, fit_expansion, periodicity_probe, predicted_coefficients,
    sample_weighted, GammaWeights,
};
use crate::localkernel::{AveragedKernelFlat, QuadratureOptions};
use crate::models::{scalar_curvature, Model, PointSpec, Rho};
use crate::report::{
    CoeffsData, ExpandPoint, KernelRow, LocalData, NecessityData, ReportData, ReportDocument,
    ReportHeader, Verdict,
};
use crate::riemannroch::rr_check;

pub const THREADS_ENV: &str = "ORB_BERGMAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "orb-bergman", version, about = "Weighted Bergman kernels on model orbifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the residue-class moment condition and the root order at unity.
    Coeffs(CoeffsArgs),
    /// Evaluate the weighted kernel over a range of k.
    Kernel(KernelArgs),
    /// Fit the large-k expansion and compare with the prediction.
    Expand(ExpandArgs),
    /// Compare the weighted Hilbert function with a_0 k + a_1.
    Rr(RrArgs),
    /// Look for periodic oscillation left by the weights.
    Necessity(NecessityArgs),
    /// Averaged local kernel: reproducing residuals and the decay bound.
    Localcheck(LocalArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CoeffSource {
    /// Inline JSON, e.g. '{"entries":[[0,"1"],[1,"2"]]}'.
    #[arg(long, conflicts_with_all = ["coeffs_file", "canonical_q"])]
    pub coeffs: Option<String>,
    /// JSON file in the same format as --coeffs.
    #[arg(long, conflicts_with = "canonical_q")]
    pub coeffs_file: Option<PathBuf>,
    /// Canonical sequence (1 + z + ... + z^{m-1})^Q at the model's m.
    #[arg(long)]
    pub canonical_q: Option<u32>,
}

impl CoeffSource {
    fn resolve(&self, m: u64) -> Result<Option<CoefficientSequence>> {
        let from_json = |s: &str| {
            serde_json::from_str::<CoefficientSequence>(s)
                .map_err(|e| Error::InvalidCoefficients(e.to_string()))
        };
        if let Some(s) = &self.coeffs {
            return from_json(s).map(Some);
        }
        if let Some(p) = &self.coeffs_file {
            let s = std::fs::read_to_string(p)
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            return from_json(&s).map(Some);
        }
        Ok(self.canonical_q.map(|q| canonical_sequence(m, q)))
    }

    /// Falls back to `c = {0: 1}`, the plain Bergman kernel.
    fn resolve_or_single(&self, m: u64) -> Result<CoefficientSequence> {
        match self.resolve(m)? {
            Some(c) => Ok(c),
            None => CoefficientSequence::from_dense(&[1]),
        }
    }
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub m: u64,
    #[command(flatten)]
    pub source: CoeffSource,
    /// Highest moment p checked.
    #[arg(long = "check-P", default_value_t = 1)]
    pub check_p: u32,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Football point rho = |u|^2 as p/q or 'inf'; repeatable.
    #[arg(long)]
    pub rho: Vec<String>,
    /// Flat point moduli joined by '+', e.g. 0.5+0.25; repeatable.
    #[arg(long)]
    pub x: Vec<String>,
}

impl PointArgs {
    fn resolve(&self, model: &Model) -> Result<Vec<PointSpec>> {
        let mut pts = Vec::new();
        for r in &self.rho {
            pts.push(PointSpec::Football(r.parse::<Rho>()?));
        }
        for x in &self.x {
            pts.push(PointSpec::Flat(parse_moduli(x)?));
        }
        if pts.is_empty() {
            pts.push(match model {
                Model::Football(_) => PointSpec::Football(Rho::integer(0)),
                Model::Flat(f) => PointSpec::flat_origin(f.n()),
            });
        }
        for p in &pts {
            p.check_for(model)?;
        }
        Ok(pts)
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub source: CoeffSource,
    #[arg(long, default_value = "1:20")]
    pub krange: String,
    #[command(flatten)]
    pub points: PointArgs,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub source: CoeffSource,
    #[arg(long, default_value = "20:200")]
    pub krange: String,
    #[command(flatten)]
    pub points: PointArgs,
    /// Expansion order N.
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Homogeneous gamma(k, i) = sum_a g_a k^{d-a} i^a as 'g_0,...,g_d'; '1,1' is k + i.
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Debug, Args)]
pub struct RrArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub source: CoeffSource,
    #[arg(long, default_value = "1:100")]
    pub krange: String,
}

#[derive(Debug, Args)]
pub struct NecessityArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub source: CoeffSource,
    #[arg(long, default_value = "10:200")]
    pub krange: String,
    #[command(flatten)]
    pub points: PointArgs,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    #[arg(long, default_value = "flat:m=2")]
    pub model: String,
    /// Exponent of the test monomial z^alpha.
    #[arg(long, default_value_t = 1)]
    pub alpha: u64,
    /// Modulus of the evaluation point.
    #[arg(long, default_value_t = 0.3)]
    pub x: f64,
    /// Cutoff radius R.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    /// k values for the reproducing check.
    #[arg(long, value_delimiter = ',', default_value = "11,21,41")]
    pub ks: Vec<u64>,
    /// k range for the decay bound.
    #[arg(long, default_value = "10:200")]
    pub krange: String,
    /// Powers s in k^s |(eta - 1)^s eta^k|.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub s: Vec<u32>,
}

/// `a:b`, inclusive.
pub fn parse_krange(s: &str) -> Result<Vec<u64>> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("k range '{s}' is not a:b")))?;
    let num = |v: &str| {
        v.trim().parse::<u64>().map_err(|e| Error::Parse(format!("k range '{s}': {e}")))
    };
    let (a, b) = (num(a)?, num(b)?);
    if a == 0 || a > b {
        return Err(Error::Parse(format!("k range '{s}' needs 1 <= a <= b")));
    }
    Ok((a..=b).collect())
}

fn parse_moduli(s: &str) -> Result<Vec<f64>> {
    s.split('+')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("--x '{s}': {e}"))))
        .collect()
}

fn parse_gamma(s: &str) -> Result<HomogeneousPoly> {
    let coeffs: Vec<BigRational> = s.split(',').map(parse_rational).collect::<Result<_>>()?;
    if coeffs.is_empty() {
        return Err(Error::Parse("empty --gamma".into()));
    }
    HomogeneousPoly::new(coeffs.len() as u32 - 1, coeffs)
}

fn header(command: &str, model: Option<&Model>, c: Option<&CoefficientSequence>) -> ReportHeader {
    let mut h = ReportHeader::new(command);
    h.model = model.cloned();
    h.coefficients = c.cloned();
    h
}

/// Runs one parsed command.
pub fn dispatch(cmd: &Command) -> Result<ReportDocument> {
    match cmd {
        Command::Coeffs(a) => run_coeffs(a),
        Command::Kernel(a) => run_kernel(a),
        Command::Expand(a) => run_expand(a),
        Command::Rr(a) => run_rr(a),
        Command::Necessity(a) => run_necessity(a),
        Command::Localcheck(a) => run_localcheck(a),
    }
}

fn run_coeffs(a: &CoeffsArgs) -> Result<ReportDocument> {
    if a.m == 0 {
        return Err(Error::InvalidModel("m must be >= 1".into()));
    }
    let c = a
        .source
        .resolve(a.m)?
        .ok_or_else(|| Error::InvalidCoefficients("give --coeffs, --coeffs-file or --canonical-q".into()))?;
    let condition = satisfies_condition(&c, a.m, a.check_p);
    let root_order = root_order_at_unity(&c, a.m);
    let agrees = condition.holds == root_order.at_least(a.check_p + 1);
    let divs = divisors(a.m)
        .into_iter()
        .filter(|&d| d > 1)
        .map(|d| (d, satisfies_condition(&c, d, a.check_p).holds))
        .collect();
    let detail = match condition.first_failing_moment() {
        None => format!("residue sums balanced for p <= {}", a.check_p),
        Some(p) => format!("residue sums unbalanced at p = {p}"),
    };
    let verdicts = vec![
        Verdict::new("condition", condition.holds, detail),
        Verdict::new(
            "root_order",
            agrees,
            format!("root order at unity {root_order}, condition needs >= {}", a.check_p + 1),
        ),
    ];
    Ok(ReportDocument {
        header: header("coeffs", None, Some(&c)).param("m", a.m).param("check_P", a.check_p),
        data: ReportData::Coeffs(CoeffsData { m: a.m, condition, root_order, divisors: divs }),
        verdicts,
    })
}

fn run_kernel(a: &KernelArgs) -> Result<ReportDocument> {
    let model: Model = a.model.parse()?;
    let c = a.source.resolve_or_single(model.m())?;
    let ks = parse_krange(&a.krange)?;
    let points = a.points.resolve(&model)?;
    let mut rows = Vec::new();
    for p in &points {
        for v in sample_weighted(&model, &c, None, p, &ks)? {
            rows.push(KernelRow { point: p.to_string(), value: v });
        }
    }
    Ok(ReportDocument {
        header: header("kernel", Some(&model), Some(&c)).param("krange", &a.krange),
        data: ReportData::Kernel(rows),
        verdicts: Vec::new(),
    })
}

fn run_expand(a: &ExpandArgs) -> Result<ReportDocument> {
    let model: Model = a.model.parse()?;
    let c = a.source.resolve_or_single(model.m())?;
    let ks = parse_krange(&a.krange)?;
    let points = a.points.resolve(&model)?;
    let gamma = a.gamma.as_deref().map(parse_gamma).transpose()?;
    let weights = gamma.as_ref().map(GammaWeights::from_poly);
    let n = model.n() as u32;
    let n_eff = n + weights.as_ref().map_or(0, |g| g.d);
    let mut out = Vec::new();
    let mut verdicts = Vec::new();
    for p in &points {
        let values = sample_weighted(&model, &c, gamma.as_ref(), p, &ks)?;
        let samples: Vec<(u64, f64)> = values.iter().map(|v| (v.k, v.to_f64())).collect();
        let fit = fit_expansion(&samples, n_eff, a.order)?;
        let scal = scalar_curvature(&model, p)?;
        let predicted = predicted_coefficients(&c, n, &scal, weights.as_ref());
        let verdict = compare(&fit, &predicted);
        let derivative = match (p, gamma.is_none()) {
            (PointSpec::Football(Rho::Finite(r)), true) if r == &BigRational::from_integer(1.into()) => {
                let h = BigRational::new(1.into(), 1000.into());
                Some(derivative_check(&model, &c, r, &h, &ks)?)
            }
            _ => None,
        };
        verdicts.push(Verdict::new(
            &format!("fit at {p}"),
            verdict.passed(),
            format!(
                "b_hat = {:?}, predicted = ({}, {}), remainder slope {}",
                fit.b_hat, predicted.b0, predicted.b1, fit.remainder_slope
            ),
        ));
        if let Some(d) = &derivative {
            verdicts.push(Verdict::new(
                &format!("rho derivative at {p}"),
                d.consistent(n, a.order),
                format!("finite-difference slope {}", d.slope),
            ));
        }
        out.push(ExpandPoint { point: p.to_string(), samples, fit, predicted, verdict, derivative });
    }
    let mut h = header("expand", Some(&model), Some(&c))
        .param("krange", &a.krange)
        .param("order", a.order);
    if let Some(g) = &a.gamma {
        h = h.param("gamma", g);
    }
    Ok(ReportDocument { header: h, data: ReportData::Expand(out), verdicts })
}

fn run_rr(a: &RrArgs) -> Result<ReportDocument> {
    let model: Model = a.model.parse()?;
    model.as_football()?;
    let c = a.source.resolve_or_single(model.m())?;
    let ks = parse_krange(&a.krange)?;
    let rep = rr_check(&model, &c, ks)?;
    let holds = satisfies_condition(&c, model.m(), 1).holds;
    let verdict = if holds {
        Verdict::new(
            "exact_from_m",
            rep.exact_from(model.m()),
            format!("differences vanish from k0 = {:?}", rep.k0),
        )
    } else {
        let period = rep.difference_period();
        let ok = rep.k0.is_none() && period.is_some_and(|p| model.m() % p == 0);
        Verdict::new("violation_periodic", ok, format!("difference period {period:?}"))
    };
    Ok(ReportDocument {
        header: header("rr", Some(&model), Some(&c)).param("krange", &a.krange),
        data: ReportData::Rr(rep),
        verdicts: vec![verdict],
    })
}

fn run_necessity(a: &NecessityArgs) -> Result<ReportDocument> {
    let model: Model = a.model.parse()?;
    let c = a.source.resolve_or_single(model.m())?;
    let ks = parse_krange(&a.krange)?;
    let point = match a.points.resolve(&model)?.as_slice() {
        [p] => p.clone(),
        _ => return Err(Error::InvalidPoint("necessity takes one point".into())),
    };
    let condition = satisfies_condition(&c, model.m(), model.n() as u32);
    let probe = periodicity_probe(&model, &c, &point, &ks)?;
    let verdict = if condition.holds || model.m() == 1 {
        Verdict::new("no_oscillation", probe.period.is_none(), format!("amplitude {}", probe.amplitude))
    } else {
        Verdict::new(
            "oscillation_at_m",
            probe.period == Some(model.m()) && probe.amplitude > 0.0,
            format!(
                "period {:?}, amplitude {}, growth exponent {:?}",
                probe.period, probe.amplitude, probe.growth_exponent
            ),
        )
    };
    Ok(ReportDocument {
        header: header("necessity", Some(&model), Some(&c)).param("krange", &a.krange),
        data: ReportData::Necessity(NecessityData { point: point.to_string(), condition, probe }),
        verdicts: vec![verdict],
    })
}

/// Grid of moduli with each coordinate in `[0, 2]`.
pub fn decay_grid(n: usize) -> Vec<Vec<f64>> {
    let steps = if n == 1 { 200 } else { 20 };
    let axis: Vec<f64> = (0..=steps).map(|j| 2.0 * j as f64 / steps as f64).collect();
    let mut grid = vec![Vec::new()];
    for _ in 0..n {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    grid
}

fn run_localcheck(a: &LocalArgs) -> Result<ReportDocument> {
    let model: Model = a.model.parse()?;
    let flat = model.as_flat()?.clone();
    let kav = AveragedKernelFlat::new(flat.clone());
    let mut reproducing = Vec::new();
    let mut verdicts = Vec::new();
    if flat.n() == 1 && !a.ks.is_empty() {
        for &k in &a.ks {
            reproducing.push(kav.verify_reproducing(
                k,
                a.alpha,
                Complex64::new(a.x, 0.0),
                a.radius,
                QuadratureOptions::default(),
            )?);
        }
        let decreasing = reproducing.windows(2).all(|w| w[1].residual < w[0].residual);
        let last = reproducing.last().map_or(0.0, |r| r.residual);
        verdicts.push(Verdict::new(
            "reproducing",
            decreasing && last <= 1e-6,
            format!("residuals strictly decreasing: {decreasing}, last {last:e}"),
        ));
    }
    let ks = parse_krange(&a.krange)?;
    let grid = decay_grid(flat.n());
    let mut decay = Vec::new();
    for &s in &a.s {
        for v in 1..flat.m() {
            let rep = kav.decay_check(s, 0, v, &grid, &ks)?;
            let (lower, upper) = rep.half_maxima();
            verdicts.push(Verdict::new(
                &format!("decay s={s} v={v}"),
                rep.sup <= rep.bound,
                format!(
                    "sup {:e} against bound {:e}; max lower half {lower:e}, upper half {upper:e}",
                    rep.sup, rep.bound
                ),
            ));
            decay.push(rep);
        }
    }
    Ok(ReportDocument {
        header: header("localcheck", Some(&model), None)
            .param("alpha", a.alpha)
            .param("x", a.x)
            .param("radius", a.radius)
            .param("krange", &a.krange),
        data: ReportData::Localcheck(LocalData { reproducing, decay }),
        verdicts,
    })
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn emit(doc: &ReportDocument, format: Format, out: Option<&Path>) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(e.to_string());
    let files = match format {
        Format::Json => vec![(format!("{}.json", doc.header.command), doc.to_json())],
        Format::Csv => doc.csv_files()?,
    };
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            for (name, body) in &files {
                std::fs::write(dir.join(name), body).map_err(io)?;
            }
            for v in &doc.verdicts {
                println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
        }
        None => {
            for (name, body) in &files {
                if files.len() > 1 {
                    println!("# {name}");
                }
                print!("{body}");
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let doc = match dispatch(&cli.command) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(&doc, cli.format, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return 2;
    }
    if doc.passed() {
        0
    } else {
        1
    }
}
