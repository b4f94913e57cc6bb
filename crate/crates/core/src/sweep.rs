//! Parameter sweeps over a model family, one bound program per grid point
//! and column, written as CSV in grid order.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::lp_builder::{manual_prop4_bounds, solve_bound, BoundCertificate, FunctionShape, ProblemKind};
use crate::model::{
    parse_model, solve_rate_pair, Family, GeometricProductForm, ModelError, PerturbationPair, PerturbationRule,
};
use crate::oracle::steady_state_value;
use crate::piecewise::CLinearFn;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QPBOUND_THREADS";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn spec_err(msg: impl Into<String>) -> SweepError {
    SweepError::Spec(msg.into())
}

/// What a CSV column reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Column {
    /// The optimum of one bound program.
    Bound { kind: ProblemKind, shape: FunctionShape, rule: Option<PerturbationRule> },
    /// The closed-form bracket for the empty-system probability.
    ManualLower,
    ManualUpper,
    /// The truncated-chain steady-state value.
    Oracle,
}

impl Column {
    /// Parses `kind[:shape][@rule]`, `manual-lower`, `manual-upper` or `oracle`.
    pub fn parse_all(s: &str) -> Result<Vec<Column>, SweepError> {
        match s {
            "manual" => return Ok(vec![Column::ManualLower, Column::ManualUpper]),
            "manual-lower" => return Ok(vec![Column::ManualLower]),
            "manual-upper" => return Ok(vec![Column::ManualUpper]),
            "oracle" => return Ok(vec![Column::Oracle]),
            _ => {}
        }
        let (head, rule) = match s.split_once('@') {
            Some((h, r)) => (h, Some(r.parse::<PerturbationRule>().map_err(|e| spec_err(e.to_string()))?)),
            None => (s, None),
        };
        let (kind, shape) = match head.split_once(':') {
            Some((k, sh)) => (k, sh.parse::<FunctionShape>().map_err(|e| spec_err(e.to_string()))?),
            None => (head, FunctionShape::CLinear),
        };
        let kind = kind.parse::<ProblemKind>().map_err(|e| spec_err(e.to_string()))?;
        Ok(vec![Column::Bound { kind, shape, rule }])
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Bound { kind, shape, rule } => {
                write!(f, "{kind}")?;
                if *shape != FunctionShape::CLinear {
                    write!(f, ":{}", shape.key())?;
                }
                if let Some(rule) = rule {
                    write!(f, "@{rule}")?;
                }
                Ok(())
            }
            Column::ManualLower => f.write_str("manual-lower"),
            Column::ManualUpper => f.write_str("manual-upper"),
            Column::Oracle => f.write_str("oracle"),
        }
    }
}

/// Grid as an explicit list or an inclusive `start..=stop` range.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, SweepError> {
        let pts = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(spec_err("range needs step > 0 and stop ≥ start"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                // Round to the step's resolution so that e.g. 0.1 + 2·0.05 prints as 0.2.
                (0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
            }
        };
        if pts.is_empty() {
            return Err(spec_err("grid is empty"));
        }
        if pts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(spec_err("grid must be strictly increasing"));
        }
        Ok(pts)
    }
}

/// Raw sweep description as read from JSON.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub family: String,
    pub parameter: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub fixed: Map<String, Value>,
    pub perturbation: String,
    pub columns: Vec<String>,
    #[serde(default)]
    pub measure: Option<Value>,
    #[serde(default)]
    pub oracle: Option<bool>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
}

/// A validated sweep.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub family: String,
    pub parameter: String,
    pub grid: Vec<f64>,
    pub fixed: Map<String, Value>,
    /// Rule for columns that do not name their own.
    pub perturbation: PerturbationRule,
    pub columns: Vec<Column>,
    pub measure: CLinearFn<f64>,
    pub tol: f64,
    pub out: Option<String>,
}

pub const DEFAULT_ORACLE_TOL: f64 = 1e-8;

/// Reads a measure given by name or as a JSON object of slot coefficients.
pub fn parse_measure(v: &Value) -> Result<CLinearFn<f64>, String> {
    CLinearFn::from_json_value(v).map_err(|e| e.to_string())
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        let raw: SweepFile = serde_json::from_str(text).map_err(|e| spec_err(e.to_string()))?;
        Self::from_file(raw)
    }

    pub fn from_file(raw: SweepFile) -> Result<Self, SweepError> {
        let mut columns = Vec::new();
        for c in &raw.columns {
            columns.extend(Column::parse_all(c)?);
        }
        if raw.oracle.unwrap_or(true) && !columns.contains(&Column::Oracle) {
            columns.push(Column::Oracle);
        }
        let measure = match &raw.measure {
            Some(v) => parse_measure(v).map_err(spec_err)?,
            None => CLinearFn::indicator_origin(),
        };
        if raw.fixed.contains_key(&raw.parameter) {
            return Err(spec_err(format!("`{}` is both swept and fixed", raw.parameter)));
        }
        Ok(SweepSpec {
            family: raw.family,
            parameter: raw.parameter,
            grid: raw.grid.points()?,
            fixed: raw.fixed,
            perturbation: raw.perturbation.parse().map_err(|e: ModelError| spec_err(e.to_string()))?,
            columns,
            measure,
            tol: raw.tol.unwrap_or(DEFAULT_ORACLE_TOL),
            out: raw.out,
        })
    }

    /// The family instance at one grid value.
    pub fn family_at(&self, value: f64) -> Result<Family<f64>, ModelError> {
        let mut obj = self.fixed.clone();
        obj.insert("family".into(), Value::String(self.family.clone()));
        obj.insert(self.parameter.clone(), Value::from(value));
        let doc = parse_model(&Value::Object(obj).to_string())?;
        Ok(doc.family.expect("family stanza"))
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once(self.parameter.clone()).chain(self.columns.iter().map(|c| c.to_string())).collect()
    }
}

/// One CSV cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Value(f64),
    /// The bound program has no feasible point.
    Infeasible,
    /// The model at this grid point failed validation.
    Invalid,
    /// The column does not apply here (e.g. no product form, unmet preconditions).
    Unavailable,
    /// Solver or oracle failure.
    Failed,
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => f.write_str(&format_sig(*v)),
            Cell::Infeasible => f.write_str("inf"),
            Cell::Invalid => f.write_str("invalid"),
            Cell::Unavailable => f.write_str("n/a"),
            Cell::Failed => f.write_str("nan"),
        }
    }
}

/// Inputs needed to re-check a solved bound independently.
#[derive(Clone, Debug)]
pub struct Certified {
    pub column: usize,
    pub pair: PerturbationPair<f64>,
    pub certificate: BoundCertificate<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    pub cells: Vec<Cell>,
    pub certified: Vec<Certified>,
    /// Human-readable reasons for non-numeric cells.
    pub notes: Vec<String>,
}

/// Formats with 12 significant digits, positional where readable.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn rates(pair: &PerturbationPair<f64>) -> Result<GeometricProductForm<f64>, String> {
    solve_rate_pair(&pair.perturbed).map_err(|e| e.to_string())
}

fn manual(family: &Family<f64>) -> Result<(f64, f64), String> {
    let Family::JointDepartures(p) = family else { return Err("closed form needs joint departures".into()) };
    if p.lambda1 != p.lambda2 || p.mu1 != p.mu2 {
        return Err("closed form needs a symmetric instance".into());
    }
    manual_prop4_bounds(p.lambda1, p.mu, p.mu1).map_err(|e| e.to_string())
}

/// Evaluates every column at one grid value; failures stay local to the row.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> SweepRow {
    let mut row = SweepRow { value, cells: Vec::with_capacity(spec.columns.len()), certified: Vec::new(), notes: Vec::new() };
    let family = match spec.family_at(value) {
        Ok(f) => f,
        Err(e) => {
            row.cells = vec![Cell::Invalid; spec.columns.len()];
            row.notes.push(format!("{} = {}: {e}", spec.parameter, format_sig(value)));
            return row;
        }
    };
    let original = family.walk().expect("validated by family_at");
    let f = &spec.measure;
    for (idx, column) in spec.columns.iter().enumerate() {
        let cell = match *column {
            Column::Bound { kind, shape, rule } => {
                let rule = rule.unwrap_or(spec.perturbation);
                let attempt = family
                    .perturb(rule)
                    .walk()
                    .map_err(|e| e.to_string())
                    .and_then(|perturbed| PerturbationPair::new(original.clone(), perturbed).map_err(|e| e.to_string()))
                    .and_then(|pair| rates(&pair).map(|r| (pair, r)));
                match attempt {
                    Err(e) => {
                        row.notes.push(format!("{column}: {e}"));
                        Cell::Unavailable
                    }
                    Ok((pair, r)) => match solve_bound(kind, &pair, &r, f, shape) {
                        Err(e) => {
                            row.notes.push(format!("{column}: {e}"));
                            Cell::Unavailable
                        }
                        Ok(out) => match out.certificate {
                            Some(certificate) => {
                                let v = certificate.bound;
                                row.certified.push(Certified { column: idx, pair, certificate });
                                Cell::Value(v)
                            }
                            None if out.stats.status == crate::lp_solver::Status::Infeasible => Cell::Infeasible,
                            None => {
                                row.notes.push(format!("{column}: solver status {}", out.stats.status.name()));
                                Cell::Failed
                            }
                        },
                    },
                }
            }
            Column::ManualLower | Column::ManualUpper => match manual(&family) {
                Ok((lo, hi)) => Cell::Value(if *column == Column::ManualLower { lo } else { hi }),
                Err(e) => {
                    row.notes.push(format!("{column}: {e}"));
                    Cell::Unavailable
                }
            },
            Column::Oracle => match steady_state_value(&original, f, spec.tol) {
                Ok(v) => Cell::Value(v.value),
                Err(e) => {
                    row.notes.push(format!("oracle: {e}"));
                    Cell::Failed
                }
            },
        };
        row.cells.push(cell);
    }
    row
}

/// Worker count from `QPBOUND_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Evaluates all grid points in parallel; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| spec.grid.par_iter().map(|&v| evaluate_point(spec, v)).collect())
}

pub fn write_csv(spec: &SweepSpec, rows: &[SweepRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{}", spec.header().join(","))?;
    for row in rows {
        let cells: Vec<String> = std::iter::once(format_sig(row.value)).chain(row.cells.iter().map(|c| c.to_string())).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

impl FromStr for SweepSpec {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepSpec::from_json(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> SweepSpec {
        SweepSpec::from_json(
            r#"{
                "family": "joint_departures",
                "parameter": "load",
                "grid": {"start": 0.1, "stop": 0.2, "step": 0.05},
                "fixed": {"mu_star_ratio": 0.4},
                "perturbation": "split",
                "columns": ["manual", "upper-error", "lower-error", "comparison-upper"],
                "measure": "indicator_origin"
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.693346206182570), "0.693346206183");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5e-9), "-2.50000000000e-9");
        assert_eq!(format_sig(123.456), "123.456");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn columns_round_trip() {
        for s in ["upper-error", "lower-error:global-linear", "comparison-upper@swap", "upper-error:constant@split"] {
            let c = Column::parse_all(s).unwrap();
            assert_eq!(c[0].to_string(), s);
        }
        assert_eq!(Column::parse_all("manual").unwrap().len(), 2);
        assert!(Column::parse_all("sideways").is_err());
    }

    #[test]
    fn grids() {
        let g = GridSpec::Range { start: 0.1, stop: 0.45, step: 0.05 }.points().unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g[2], 0.2);
        assert!(GridSpec::Values(vec![0.2, 0.1]).points().is_err());
    }

    #[test]
    fn sweep_rows_are_ordered_and_bracket() {
        let spec = fig4();
        assert_eq!(spec.header(), ["load", "manual-lower", "manual-upper", "upper-error", "lower-error", "comparison-upper", "oracle"]);
        let rows = run_sweep(&spec);
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), spec.grid);
        for row in &rows {
            let v: Vec<f64> = row.cells.iter().map(|c| c.value().unwrap()).collect();
            let (ue, le, cu, oracle) = (v[2], v[3], v[4], v[5]);
            assert!(le <= oracle && oracle <= cu && cu <= ue + 1e-8, "{v:?}");
            assert_eq!(row.certified.len(), 3);
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let spec = fig4();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&spec, &run_sweep(&spec), &mut a).unwrap();
        write_csv(&spec, &run_sweep(&spec), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn invalid_points_are_recorded() {
        let mut spec = fig4();
        spec.grid = vec![-0.5, 0.1];
        let rows = run_sweep(&spec);
        assert!(rows[0].cells.iter().all(|&c| c == Cell::Invalid));
        assert!(!rows[0].notes.is_empty());
        assert!(rows[1].cells.iter().all(|c| c.value().is_some()));
    }
}
