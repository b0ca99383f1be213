//! The demo operations, kept free of wasm types so they run (and are
//! tested) on the host as well.

use serde::Serialize;

use twolocus::asymptotic::{q_asymptotic_with, ExpansionOrder, Q2Cache};
use twolocus::allele_counts::{count_pmf_asymptotic, CountConfig, CountOrder, CountSolver};
use twolocus::harness::{default_rho_schedule, extract_series};
use twolocus::numerics::{BigRational, Scalar};
use twolocus::two_locus::{ExactSolver, Params, TwoLocusConfig};

#[derive(Serialize)]
struct CurveResponse {
    rho: Vec<f64>,
    exact: Vec<f64>,
    order0: Vec<f64>,
    order1: Vec<f64>,
    order2: Vec<f64>,
}

/// Exact and truncated probabilities along a log-spaced rho grid.
pub fn rho_curve(
    config_json: &str,
    theta_a: f64,
    theta_b: f64,
    rho_min: f64,
    rho_max: f64,
    points: usize,
) -> Result<String, String> {
    let config = TwoLocusConfig::from_json(config_json).map_err(|e| e.to_string())?;
    if !(rho_min > 0.0 && rho_max > rho_min) {
        return Err("need 0 < rho_min < rho_max".into());
    }
    let points = points.clamp(2, 400);
    if config.n() > 12 {
        return Err("demo limited to n <= 12".into());
    }
    let mut response = CurveResponse {
        rho: Vec::new(),
        exact: Vec::new(),
        order0: Vec::new(),
        order1: Vec::new(),
        order2: Vec::new(),
    };
    let log_step = (rho_max / rho_min).ln() / (points - 1) as f64;
    let mut cache: Option<Q2Cache<f64>> = None;
    for t in 0..points {
        let rho = rho_min * (log_step * t as f64).exp();
        let params = Params::new(theta_a, theta_b, rho).map_err(|e| e.to_string())?;
        let mut solver = ExactSolver::new(params.clone());
        let exact = solver.q(&config).map_err(|e| e.to_string())?;
        let cache = cache.get_or_insert_with(|| Q2Cache::new(params.clone()));
        response.rho.push(rho);
        response.exact.push(exact);
        for (order, series) in [
            (ExpansionOrder::Zero, &mut response.order0),
            (ExpansionOrder::One, &mut response.order1),
            (ExpansionOrder::Two, &mut response.order2),
        ] {
            let v = q_asymptotic_with(&config, &params, order, Some(cache))
                .map_err(|e| e.to_string())?;
            series.push(v);
        }
    }
    serde_json::to_string(&response).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct HeatmapResponse {
    k_values: Vec<usize>,
    l_values: Vec<usize>,
    /// Row-major `p[k][l]`.
    p: Vec<Vec<f64>>,
    total: f64,
}

/// Joint allele-count distribution as a matrix over (k, l).
pub fn count_heatmap(
    a: usize,
    b: usize,
    c: usize,
    theta_a: f64,
    theta_b: f64,
    rho: f64,
    method: &str,
) -> Result<String, String> {
    if a + b + c == 0 || a + b + c > 10 {
        return Err("demo limited to 1 <= a+b+c <= 10".into());
    }
    let params = Params::new(theta_a, theta_b, rho).map_err(|e| e.to_string())?;
    let mut solver = CountSolver::new(params.clone());
    let k_values: Vec<usize> = (0..=a + c).collect();
    let l_values: Vec<usize> = (0..=b + c).collect();
    let mut p = Vec::new();
    let mut total = 0.0;
    for &k in &k_values {
        let mut row = Vec::new();
        for &l in &l_values {
            let query = CountConfig::new(a, b, c, k, l);
            let v = match method {
                "exact" => solver.p(query).map_err(|e| e.to_string())?,
                "asym0" => count_pmf_asymptotic(query, &params, CountOrder::Zero)
                    .map_err(|e| e.to_string())?,
                "asym1" => count_pmf_asymptotic(query, &params, CountOrder::One)
                    .map_err(|e| e.to_string())?,
                other => return Err(format!("unknown method {other:?}")),
            };
            total += v;
            row.push(v);
        }
        p.push(row);
    }
    serde_json::to_string(&HeatmapResponse {
        k_values,
        l_values,
        p,
        total,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SeriesCheckRow {
    order: usize,
    extracted: f64,
    closed_form: f64,
    relative_gap: f64,
}

#[derive(Serialize)]
struct SeriesCheckResponse {
    rho_schedule: Vec<f64>,
    rows: Vec<SeriesCheckRow>,
    converged: bool,
}

/// Exact-rational extraction of the first three coefficients, compared with
/// the closed forms.
pub fn series_check(config_json: &str, theta_a: &str, theta_b: &str) -> Result<String, String> {
    let config = TwoLocusConfig::from_json(config_json).map_err(|e| e.to_string())?;
    if config.n() > 8 {
        return Err("series check limited to n <= 8".into());
    }
    let ta = <BigRational as Scalar>::parse(theta_a).map_err(|e| e.to_string())?;
    let tb = <BigRational as Scalar>::parse(theta_b).map_err(|e| e.to_string())?;
    let est = extract_series(&config, ta, tb, default_rho_schedule()).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for order in 0..3 {
        let extracted = Scalar::to_f64(est.hat(order));
        let closed_form = Scalar::to_f64(est.closed(order));
        let scale = closed_form.abs().max(1e-300);
        let gap = (extracted - closed_form).abs();
        rows.push(SeriesCheckRow {
            order,
            extracted,
            closed_form,
            relative_gap: if closed_form == 0.0 { gap } else { gap / scale },
        });
    }
    serde_json::to_string(&SeriesCheckResponse {
        rho_schedule: est.rho_schedule.iter().map(Scalar::to_f64).collect(),
        rows,
        converged: est.convergence_issues(2.0).is_empty(),
    })
    .map_err(|e| e.to_string())
}
