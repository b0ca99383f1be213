//! Lookup-table generation: one row per (configuration, theta_A, theta_B,
//! rho), CSV or JSON, byte-deterministic for a fixed spec and backend.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotic::{q0, q1, ExpansionOrder, Q2Cache};
use crate::error::{Error, Result};
use crate::numerics::{Backend, BigRational, Scalar};
use crate::two_locus::{
    enumerate_canonical_configs, EnumerationConstraints, ExactSolver, Params, TwoLocusConfig,
};

/// Evaluation method for a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Asymptotic(ExpansionOrder),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Asymptotic(ExpansionOrder::Zero) => "asym0",
            Method::Asymptotic(ExpansionOrder::One) => "asym1",
            Method::Asymptotic(ExpansionOrder::Two) => "asym2",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "asym0" => Ok(Method::Asymptotic(ExpansionOrder::Zero)),
            "asym1" => Ok(Method::Asymptotic(ExpansionOrder::One)),
            "asym2" => Ok(Method::Asymptotic(ExpansionOrder::Two)),
            other => Err(Error::Parameter(format!(
                "unknown method {other:?}; expected exact, asym0, asym1 or asym2"
            ))),
        }
    }
}

/// Output format of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parameter(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// Declarative description of a table run. Parameter grids are strings so
/// the exact backend can parse them without rounding; the same spec text
/// works for both backends. Mirrors the JSON run-file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableSpec {
    /// Enumerate configurations with `n <= n_max` ...
    #[serde(default)]
    pub n_max: usize,
    #[serde(default = "default_dim")]
    pub k_max: usize,
    #[serde(default = "default_dim")]
    pub l_max: usize,
    #[serde(default)]
    pub c_max: Option<usize>,
    /// ... or list them explicitly (overrides enumeration).
    #[serde(default)]
    pub configs: Option<Vec<TwoLocusConfig>>,
    pub theta_a: Vec<String>,
    pub theta_b: Vec<String>,
    pub rho: Vec<String>,
    pub method: String,
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_backend")]
    pub backend: String,
}

fn default_dim() -> usize {
    2
}

fn default_format() -> String {
    "csv".into()
}

fn default_backend() -> String {
    "float".into()
}

impl TableSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parameter(format!(
                "bad table spec at line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    fn validate(&self) -> Result<(Method, OutputFormat, Backend)> {
        if self.theta_a.is_empty() || self.theta_b.is_empty() || self.rho.is_empty() {
            return Err(Error::Parameter("parameter grids must be nonempty".into()));
        }
        let method: Method = self.method.parse()?;
        let format: OutputFormat = self.format.parse()?;
        let backend: Backend = self.backend.parse()?;
        Ok((method, format, backend))
    }

    fn resolve_configs(&self) -> Result<Vec<TwoLocusConfig>> {
        match &self.configs {
            Some(list) => {
                let mut canon: Vec<TwoLocusConfig> = list
                    .iter()
                    .map(|c| c.canonical())
                    .collect::<Result<_>>()?;
                canon.sort();
                canon.dedup();
                Ok(canon)
            }
            None => Ok(enumerate_canonical_configs(
                self.n_max,
                &EnumerationConstraints {
                    k_max: self.k_max,
                    l_max: self.l_max,
                    c_max: self.c_max,
                },
            )),
        }
    }
}

/// One output row. Column order is fixed: downstream pipelines join on the
/// first four columns.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub config: String,
    pub theta_a: String,
    pub theta_b: String,
    pub rho: String,
    pub method: &'static str,
    pub value: String,
    pub q0: String,
    pub q1_over_rho: String,
    pub q2_over_rho2: String,
    pub error: String,
}

/// Generate the table into `out`; returns the number of rows written.
///
/// Solver capability errors (state budget) land in the row's `error` column
/// instead of aborting the run.
pub fn generate_table<W: Write>(spec: &TableSpec, out: W) -> Result<usize> {
    let (method, format, backend) = spec.validate()?;
    let rows = match backend {
        Backend::Float => collect_rows::<f64>(spec, method)?,
        Backend::Rational => collect_rows::<BigRational>(spec, method)?,
    };
    write_rows(&rows, format, out)?;
    Ok(rows.len())
}

fn write_rows<W: Write>(rows: &[TableRow], format: OutputFormat, mut out: W) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Parameter(format!("write failed: {e}"));
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| Error::Parameter(format!("csv write failed: {e}")))?;
            }
            writer
                .flush()
                .map_err(io_err)?;
        }
        OutputFormat::Json => {
            serde_json::to_writer(&mut out, rows)
                .map_err(|e| Error::Parameter(format!("json write failed: {e}")))?;
            out.write_all(b"\n").map_err(io_err)?;
        }
    }
    Ok(())
}

fn collect_rows<S: Scalar>(spec: &TableSpec, method: Method) -> Result<Vec<TableRow>> {
    let configs = spec.resolve_configs()?;
    let theta_a: Vec<S> = spec.theta_a.iter().map(|t| S::parse(t)).collect::<Result<_>>()?;
    let theta_b: Vec<S> = spec.theta_b.iter().map(|t| S::parse(t)).collect::<Result<_>>()?;
    let rho: Vec<S> = spec.rho.iter().map(|t| S::parse(t)).collect::<Result<_>>()?;

    // solvers and caches persist across configurations of one parameter cell
    let mut exact_solvers: HashMap<(usize, usize, usize), ExactSolver<S>> = HashMap::new();
    let mut q2_caches: HashMap<(usize, usize), Q2Cache<S>> = HashMap::new();

    let mut rows = Vec::new();
    for config in &configs {
        for (ia, ta) in theta_a.iter().enumerate() {
            for (ib, tb) in theta_b.iter().enumerate() {
                for (ir, r) in rho.iter().enumerate() {
                    let params = Params::new(ta.clone(), tb.clone(), r.clone())?;
                    let mut row = TableRow {
                        config: config.to_json(),
                        theta_a: spec.theta_a[ia].clone(),
                        theta_b: spec.theta_b[ib].clone(),
                        rho: spec.rho[ir].clone(),
                        method: method.name(),
                        value: String::new(),
                        q0: String::new(),
                        q1_over_rho: String::new(),
                        q2_over_rho2: String::new(),
                        error: String::new(),
                    };
                    match method {
                        Method::Exact => {
                            let solver = exact_solvers
                                .entry((ia, ib, ir))
                                .or_insert_with(|| ExactSolver::new(params.clone()));
                            match solver.q(config) {
                                Ok(v) => row.value = fmt(&v),
                                Err(e) => row.error = e.to_string(),
                            }
                        }
                        Method::Asymptotic(order) => {
                            let cache = q2_caches
                                .entry((ia, ib))
                                .or_insert_with(|| Q2Cache::new(params.clone()));
                            match asym_row::<S>(config, &params, order, cache) {
                                Ok((value, parts)) => {
                                    row.value = fmt(&value);
                                    row.q0 = fmt(&parts[0]);
                                    if order >= ExpansionOrder::One {
                                        row.q1_over_rho = fmt(&parts[1]);
                                    }
                                    if order == ExpansionOrder::Two {
                                        row.q2_over_rho2 = fmt(&parts[2]);
                                    }
                                }
                                Err(e) => row.error = e.to_string(),
                            }
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

fn asym_row<S: Scalar>(
    config: &TwoLocusConfig,
    params: &Params<S>,
    order: ExpansionOrder,
    cache: &mut Q2Cache<S>,
) -> Result<(S, [S; 3])> {
    let base = q0(config, params);
    let mut parts = [base.clone(), S::zero(), S::zero()];
    let mut value = base;
    if order >= ExpansionOrder::One {
        if params.rho().is_zero() {
            return Err(Error::Parameter(
                "asymptotic orders >= 1 need rho > 0".into(),
            ));
        }
        parts[1] = q1(config, params) / params.rho().clone();
        value = value + parts[1].clone();
    }
    if order == ExpansionOrder::Two {
        let rho2 = params.rho().clone() * params.rho().clone();
        parts[2] = cache.q2(config) / rho2;
        value = value + parts[2].clone();
    }
    Ok((value, parts))
}

fn fmt<S: Scalar>(v: &S) -> String {
    format!("{}", v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> TableSpec {
        TableSpec {
            n_max: 2,
            k_max: 2,
            l_max: 2,
            c_max: None,
            configs: None,
            theta_a: vec!["1".into()],
            theta_b: vec!["1".into()],
            rho: vec!["10".into(), "50".into(), "100".into()],
            method: "exact".into(),
            format: "csv".into(),
            backend: "float".into(),
        }
    }

    #[test]
    fn single_config_single_row() {
        let mut spec = base_spec();
        spec.configs = Some(vec![TwoLocusConfig::a_only(1, 0)]);
        spec.rho = vec!["10".into()];
        for method in ["exact", "asym0", "asym1", "asym2"] {
            spec.method = method.into();
            let mut buf = Vec::new();
            let rows = generate_table(&spec, &mut buf).unwrap();
            assert_eq!(rows, 1);
            let text = String::from_utf8(buf).unwrap();
            let mut reader = csv::Reader::from_reader(text.as_bytes());
            let record = reader.records().next().unwrap().unwrap();
            assert_eq!(&record[0], r#"{"a":[1],"b":[],"c":[[]]}"#);
            assert_eq!(&record[5], "1");
        }
    }

    #[test]
    fn byte_deterministic() {
        let spec = base_spec();
        let mut first = Vec::new();
        let mut second = Vec::new();
        generate_table(&spec, &mut first).unwrap();
        generate_table(&spec, &mut second).unwrap();
        assert_eq!(first, second);
        // and across backends the layout matches even if values differ
        let mut spec_rational = base_spec();
        spec_rational.backend = "rational".into();
        let mut third = Vec::new();
        generate_table(&spec_rational, &mut third).unwrap();
        assert_eq!(
            String::from_utf8(first).unwrap().lines().count(),
            String::from_utf8(third).unwrap().lines().count()
        );
    }

    #[test]
    fn exact_and_order2_converge_with_rho() {
        // |exact - asym2| decreasing in rho, per config, over the emitted
        // tables
        let mut spec = base_spec();
        spec.n_max = 3;
        let mut exact_buf = Vec::new();
        generate_table(&spec, &mut exact_buf).unwrap();
        spec.method = "asym2".into();
        let mut asym_buf = Vec::new();
        generate_table(&spec, &mut asym_buf).unwrap();

        let parse = |buf: &[u8]| -> Vec<(String, String, f64)> {
            let mut reader = csv::Reader::from_reader(buf);
            reader
                .records()
                .map(|r| {
                    let r = r.unwrap();
                    (r[0].to_string(), r[3].to_string(), r[5].parse().unwrap())
                })
                .collect()
        };
        let exact_rows = parse(&exact_buf);
        let asym_rows = parse(&asym_buf);
        assert_eq!(exact_rows.len(), asym_rows.len());
        let mut gaps: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
        for ((cfg, rho, exact), (_, _, asym)) in exact_rows.iter().zip(&asym_rows) {
            gaps.entry(cfg.clone())
                .or_default()
                .push((rho.parse().unwrap(), (exact - asym).abs()));
        }
        for (cfg, mut series) in gaps {
            series.sort_by(|x, y| x.0.total_cmp(&y.0));
            for w in series.windows(2) {
                assert!(
                    w[1].1 <= w[0].1 + 1e-12,
                    "{cfg}: |exact - asym2| grew from {:?} to {:?}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn json_format_and_errors_in_rows() {
        let mut spec = base_spec();
        spec.format = "json".into();
        spec.configs = Some(vec![
            TwoLocusConfig::new(vec![0], vec![0], vec![vec![2]]).unwrap(),
        ]);
        spec.rho = vec!["0".into()];
        spec.method = "asym1".into();
        let mut buf = Vec::new();
        generate_table(&spec, &mut buf).unwrap();
        let rows: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let row = &rows.as_array().unwrap()[0];
        assert!(row["error"].as_str().unwrap().contains("rho"));
        assert_eq!(row["value"], "");
    }

    #[test]
    fn bad_specs_rejected() {
        let mut spec = base_spec();
        spec.method = "nope".into();
        assert!(generate_table(&spec, Vec::new()).is_err());
        let mut spec = base_spec();
        spec.theta_a.clear();
        assert!(generate_table(&spec, Vec::new()).is_err());
        assert!(TableSpec::from_json("{").is_err());
    }
}
