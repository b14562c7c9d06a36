//! Regression sweeps: estimate many exponent vectors, compare each with the
//! exact coefficient, and check a tolerance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function_system::{exact_coefficient, ExponentVector, FunctionSystem, NormSpec, SystemDescriptor};
use crate::precision::Precision;
use crate::saddle_engine::{estimate, AsymptoticEstimate, MethodChoice};

/// Which exponent vectors to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instances {
    List { instances: Vec<Vec<u64>> },
    Family { base: Vec<u64>, multipliers: Vec<u64> },
}

impl Instances {
    pub fn expand(&self) -> Result<Vec<ExponentVector>> {
        match self {
            Instances::List { instances } => instances.iter().map(|v| ExponentVector::new(v.clone())).collect(),
            Instances::Family { base, multipliers } => multipliers
                .iter()
                .map(|&s| {
                    let v = base
                        .iter()
                        .map(|&b| b.checked_mul(s).ok_or_else(|| Error::InvalidInput("exponent overflow".into())))
                        .collect::<Result<Vec<_>>>()?;
                    ExponentVector::new(v)
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tolerance {
    /// Every row must satisfy `rel_error <= bound`.
    Relative(f64),
    /// `rel_error` must strictly decrease from row to row.
    MonotoneDecreasing,
}

impl Serialize for Tolerance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tolerance::Relative(x) => s.serialize_f64(*x),
            Tolerance::MonotoneDecreasing => s.serialize_str("monotone-decreasing"),
        }
    }
}

impl<'de> Deserialize<'de> for Tolerance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => {
                let x = n.as_f64().ok_or_else(|| D::Error::custom("tolerance must be a finite number"))?;
                if x.is_finite() && x >= 0.0 {
                    Ok(Tolerance::Relative(x))
                } else {
                    Err(D::Error::custom("tolerance must be nonnegative"))
                }
            }
            serde_json::Value::String(s) if s == "monotone-decreasing" => Ok(Tolerance::MonotoneDecreasing),
            other => Err(D::Error::custom(format!("unknown tolerance {other}"))),
        }
    }
}

/// A sweep specification file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(flatten)]
    pub instances: Instances,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub tolerance: Tolerance,
}

fn default_method() -> String {
    "auto".into()
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn method_choice(&self) -> Result<MethodChoice> {
        self.method.parse()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: ExponentVector,
    pub exact: String,
    pub exact_log_abs: Option<String>,
    pub exact_sign: i8,
    pub estimate: AsymptoticEstimate,
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub system_digest: String,
    pub norm: String,
    pub method: String,
    pub precision: usize,
    pub timestamp: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// First row breaking the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub n: ExponentVector,
    pub rel_error: Option<f64>,
    pub reason: String,
}

/// SHA-256 of the canonical JSON form of the descriptor, in hex.
pub fn system_digest(descriptor: &SystemDescriptor) -> String {
    let json = serde_json::to_string(descriptor).expect("descriptor serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// RFC 3339 time of the run; `SOURCE_DATE_EPOCH` pins it for reproducible
/// output.
pub fn run_timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn run_one(
    system: &FunctionSystem,
    norm: &NormSpec,
    n: &ExponentVector,
    method: MethodChoice,
    epsilon: Option<f64>,
    precision: Precision,
) -> Result<SweepRow> {
    let exact = exact_coefficient(system, n)?;
    let est = estimate(system, n, norm, method, epsilon, precision)?;
    Ok(SweepRow {
        n: n.clone(),
        exact: exact.to_exact_string(),
        exact_log_abs: exact.log_abs().map(|l| l.to_decimal_string()),
        exact_sign: exact.sign(),
        rel_error: est.rel_error(&exact),
        estimate: est,
    })
}

/// Runs every instance on `jobs` worker threads (`None`: one per core). Rows
/// are sorted by `|n|`, ties kept in input order, so the output does not
/// depend on scheduling. The first failing instance in input order aborts the
/// sweep.
pub fn run_sweep(
    descriptor: &SystemDescriptor,
    spec: &SweepSpec,
    precision: Precision,
    jobs: Option<usize>,
) -> Result<SweepReport> {
    let system = descriptor.build()?;
    let norm = descriptor.norm.clone();
    let method = spec.method_choice()?;
    let instances = spec.instances.expand()?;
    for n in &instances {
        system.check_arity(n.as_slice().len())?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<Result<SweepRow>> = pool.install(|| {
        instances
            .par_iter()
            .map(|n| run_one(&system, &norm, n, method, spec.epsilon, precision))
            .collect()
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.n.norm(&norm).total_cmp(&b.n.norm(&norm)));
    Ok(SweepReport {
        rows,
        metadata: SweepMetadata {
            system_digest: system_digest(descriptor),
            norm: norm.label(),
            method: spec.method.clone(),
            precision: precision.bits(),
            timestamp: run_timestamp(),
        },
    })
}

/// Checks the rows against the tolerance; rows whose exact value is zero
/// pass only if the estimate is zero too.
pub fn check_tolerance(report: &SweepReport, tolerance: &Tolerance) -> std::result::Result<(), Violation> {
    let violation = |i: usize, reason: String| {
        let r = &report.rows[i];
        Violation { row: i, n: r.n.clone(), rel_error: r.rel_error, reason }
    };
    for (i, r) in report.rows.iter().enumerate() {
        if r.rel_error.is_none() && r.estimate.sign != 0 {
            return Err(violation(i, "exact value is 0 but the estimate is not".into()));
        }
    }
    match tolerance {
        Tolerance::Relative(bound) => {
            for (i, r) in report.rows.iter().enumerate() {
                if let Some(e) = r.rel_error {
                    if !(e <= *bound) {
                        return Err(violation(i, format!("relative error {e:e} exceeds {bound:e}")));
                    }
                }
            }
        }
        Tolerance::MonotoneDecreasing => {
            for i in 1..report.rows.len() {
                let (a, b) = (report.rows[i - 1].rel_error, report.rows[i].rel_error);
                if let (Some(a), Some(b)) = (a, b) {
                    if !(b < a) {
                        return Err(violation(i, format!("relative error {b:e} does not decrease from {a:e}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `sign * e^{log}` as a decimal string in scientific notation, valid far
/// outside the `f64` range.
pub fn format_log_value(sign: i8, log_abs: Option<f64>) -> String {
    let Some(l) = log_abs else {
        return "0".into();
    };
    let log10 = l / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mant = 10f64.powf(log10 - exp);
    if mant >= 9.999_999_999_5 {
        mant /= 10.0;
        exp += 1.0;
    }
    let s = if sign < 0 { "-" } else { "" };
    format!("{s}{mant:.10}e{exp}")
}

/// One CSV line per row: `n, exact, estimate, rel_error, regime, nz_product, c2`.
pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["n", "exact", "estimate", "rel_error", "regime", "method", "nz_product", "c2"])
        .map_err(map_err)?;
    for r in &report.rows {
        let regime = serde_json::to_value(r.estimate.regime)?;
        let method = serde_json::to_value(r.estimate.method)?;
        w.write_record([
            r.n.to_string(),
            r.exact.clone(),
            format_log_value(r.estimate.sign, r.estimate.log_abs_f64()),
            r.rel_error.map_or_else(String::new, |e| format!("{e:e}")),
            regime.as_str().unwrap_or_default().to_string(),
            method.as_str().unwrap_or_default().to_string(),
            format!("{}", r.estimate.diagnostics.nz_product),
            r.estimate.diagnostics.c2.map_or_else(String::new, |c| format!("{c}")),
        ])
        .map_err(map_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::RationalPoly;

    fn tri() -> SystemDescriptor {
        SystemDescriptor {
            factors: vec![RationalPoly::from_integers(&[1, 1]), RationalPoly::from_integers(&[1, 2])],
            amplitude: None,
            norm: NormSpec::WeightedL1 { weights: vec![1.0, 1.0, 2.0] },
        }
    }

    #[test]
    fn spec_parsing() {
        let s = SweepSpec::from_json(r#"{"instances": [[3,4,2],[1,2,0]], "method": "quadrature", "tolerance": 1e-8}"#).unwrap();
        assert_eq!(s.instances.expand().unwrap().len(), 2);
        assert_eq!(s.tolerance, Tolerance::Relative(1e-8));
        let s = SweepSpec::from_json(r#"{"base": [1,2,0], "multipliers": [8,16], "tolerance": "monotone-decreasing"}"#).unwrap();
        assert_eq!(s.instances.expand().unwrap()[1].as_slice(), &[16, 32, 0]);
        assert_eq!(s.method, "auto");
        assert!(SweepSpec::from_json(r#"{"base": [1], "multipliers": [1], "tolerance": "often"}"#).is_err());
    }

    #[test]
    fn quadrature_sweep_is_exact_and_ordered() {
        let spec = SweepSpec::from_json(
            r#"{"instances": [[30,80,10],[3,4,2],[10,20,5]], "method": "quadrature", "tolerance": 1e-8}"#,
        )
        .unwrap();
        let r = run_sweep(&tri(), &spec, Precision::default(), Some(2)).unwrap();
        assert_eq!(r.rows[0].n.as_slice(), &[3, 4, 2]);
        assert_eq!(r.rows[0].exact, "44");
        check_tolerance(&r, &spec.tolerance).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("\"(3,4,2)\",44,4.4000000000e1"), "{text}");
    }

    #[test]
    fn monotone_family() {
        let spec = SweepSpec::from_json(r#"{"base": [1,2,0], "multipliers": [8,16,32], "method": "gaussian", "tolerance": "monotone-decreasing"}"#).unwrap();
        let r = run_sweep(&tri(), &spec, Precision::default(), None).unwrap();
        check_tolerance(&r, &spec.tolerance).unwrap();
        let strict = Tolerance::Relative(1e-6);
        let v = check_tolerance(&r, &strict).unwrap_err();
        assert_eq!(v.row, 0);
    }

    #[test]
    fn log_value_formatting() {
        assert_eq!(format_log_value(1, Some(44f64.ln())), "4.4000000000e1");
        assert_eq!(format_log_value(-1, Some(0.0)), "-1.0000000000e0");
        assert_eq!(format_log_value(0, None), "0");
        assert!(format_log_value(1, Some(1e5)).ends_with("e43429"));
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(system_digest(&tri()), system_digest(&tri()));
        assert_eq!(system_digest(&tri()).len(), 64);
    }
}
