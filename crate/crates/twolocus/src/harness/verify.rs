//! Certification sweeps: extract series coefficients from the exact solvers
//! for every configuration in a family and compare them against the closed
//! forms, order by order.

use num_traits::Signed;

use crate::allele_counts::CountConfig;
use crate::asymptotic::sigma_terms;
use crate::error::Result;
use crate::numerics::{BigRational, Scalar};
use crate::two_locus::{enumerate_canonical_configs, EnumerationConstraints, TwoLocusConfig};

use super::series::{
    default_rho_schedule, extract_count_series_with, extract_series_with, CountLadder, RhoLadder,
};

/// What to sweep and how strictly to judge it.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub n_max: usize,
    pub constraints: EnumerationConstraints,
    pub theta_a: BigRational,
    pub theta_b: BigRational,
    pub rho_schedule: Vec<BigRational>,
    /// Relative tolerances on the extracted coefficients.
    pub tol_q0: f64,
    pub tol_q1: f64,
    pub tol_q2: f64,
    pub tol_p0: f64,
    pub tol_p1: f64,
    /// Largest allowed growth of a scaled residual between schedule points.
    pub decay_factor: f64,
    pub include_two_locus: bool,
    pub include_counts: bool,
    /// Gamete-total bound for the counting sweep; defaults to `n_max`.
    pub counts_n_max: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_max: 4,
            constraints: EnumerationConstraints::default(),
            theta_a: BigRational::from_u64(1),
            theta_b: BigRational::from_u64(1),
            rho_schedule: default_rho_schedule(),
            tol_q0: 1e-6,
            tol_q1: 1e-6,
            tol_q2: 1e-4,
            tol_p0: 1e-6,
            tol_p1: 1e-6,
            decay_factor: 2.0,
            include_two_locus: true,
            include_counts: true,
            counts_n_max: None,
        }
    }
}

/// Scale one remainder term group, the sensitivity hook for testing that a
/// transcription error would be caught and localized.
#[derive(Debug, Clone)]
pub struct SigmaPerturbation {
    pub term_index: usize,
    pub scale: BigRational,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct EntryReport {
    pub label: String,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    /// Per-term remainder values, attached when the second-order check fails.
    pub sigma_breakdown: Option<Vec<(&'static str, f64)>>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub entries: Vec<EntryReport>,
    pub summary: String,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntryReport> {
        self.entries.iter().filter(|e| !e.passed)
    }

    /// One line per configuration plus a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            let status = if entry.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {}\n", entry.label));
            if !entry.passed {
                for check in entry.checks.iter().filter(|c| !c.passed) {
                    out.push_str(&format!("  {}: {}\n", check.name, check.detail));
                }
                if let Some(breakdown) = &entry.sigma_breakdown {
                    out.push_str("  remainder term breakdown:\n");
                    for (label, value) in breakdown {
                        out.push_str(&format!("    {label:<18} {value:.12e}\n"));
                    }
                }
            }
        }
        out.push_str(&self.summary);
        out.push('\n');
        out
    }
}

/// `|hat - closed| / max(|closed|, 1)` when `closed` is nonzero, absolute
/// error otherwise; exact difference, converted for reporting only.
fn relative_gap(hat: &BigRational, closed: &BigRational) -> f64 {
    let diff = Scalar::to_f64(&Signed::abs(&(hat - closed)));
    let scale = Scalar::to_f64(&Signed::abs(closed));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn coefficient_check(
    name: &str,
    hat: &BigRational,
    closed: &BigRational,
    tol: f64,
) -> CheckReport {
    let gap = relative_gap(hat, closed);
    CheckReport {
        name: name.into(),
        passed: gap <= tol,
        detail: format!(
            "extracted {:.12e}, closed form {:.12e}, relative gap {gap:.3e} (tolerance {tol:.1e})",
            Scalar::to_f64(hat),
            Scalar::to_f64(closed)
        ),
    }
}

fn decay_checks(issues: Vec<String>, orders: usize) -> CheckReport {
    CheckReport {
        name: format!("residual decay through order {}", orders - 1),
        passed: issues.is_empty(),
        detail: if issues.is_empty() {
            "bounded".into()
        } else {
            issues.join("; ")
        },
    }
}

/// Run the sweep. Exit status of the CLI mirrors [`SweepReport::all_passed`].
pub fn verify_sweep(options: &VerifyOptions) -> Result<SweepReport> {
    verify_sweep_perturbed(options, None)
}

/// Sweep with an optional injected remainder perturbation (test hook).
pub fn verify_sweep_perturbed(
    options: &VerifyOptions,
    perturbation: Option<SigmaPerturbation>,
) -> Result<SweepReport> {
    let mut entries = Vec::new();

    if options.include_two_locus {
        let configs = enumerate_canonical_configs(options.n_max, &options.constraints);
        let mut ladder = RhoLadder::new(
            options.theta_a.clone(),
            options.theta_b.clone(),
            options.rho_schedule.clone(),
        )?;
        for config in &configs {
            entries.push(verify_two_locus_entry(
                &mut ladder,
                config,
                options,
                perturbation.as_ref(),
            )?);
        }
    }

    if options.include_counts {
        let mut ladder = CountLadder::new(
            options.theta_a.clone(),
            options.theta_b.clone(),
            options.rho_schedule.clone(),
        )?;
        let n_max = options.counts_n_max.unwrap_or(options.n_max);
        for query in enumerate_count_queries(n_max, options.constraints.c_max) {
            entries.push(verify_count_entry(&mut ladder, query, options)?);
        }
    }

    let failed = entries.iter().filter(|e| !e.passed).count();
    let summary = format!(
        "{} checked, {} passed, {} failed (theta_A={}, theta_B={}, schedule {:?})",
        entries.len(),
        entries.len() - failed,
        failed,
        options.theta_a,
        options.theta_b,
        options
            .rho_schedule
            .iter()
            .map(Scalar::to_f64)
            .collect::<Vec<_>>(),
    );
    Ok(SweepReport { entries, summary })
}

fn verify_two_locus_entry(
    ladder: &mut RhoLadder,
    config: &TwoLocusConfig,
    options: &VerifyOptions,
    perturbation: Option<&SigmaPerturbation>,
) -> Result<EntryReport> {
    let est = extract_series_with(ladder, config)?;
    let params = crate::two_locus::Params::new(
        options.theta_a.clone(),
        options.theta_b.clone(),
        options.rho_schedule[0].clone(),
    )?;

    // the closed q2 under test, optionally with one remainder group scaled
    let q2_closed = match perturbation {
        None => est.closed_q2.clone(),
        Some(p) => {
            let breakdown = sigma_terms(config, &params);
            ladder
                .q2_cache()
                .q2_ab0(&config.a_marginal(), &config.b_marginal())
                + breakdown.total_with_scaled(p.term_index, p.scale.clone())
        }
    };

    let mut checks = vec![
        coefficient_check("q0", &est.q0_hat, &est.closed_q0, options.tol_q0),
        coefficient_check("q1", &est.q1_hat, &est.closed_q1, options.tol_q1),
        coefficient_check("q2", &est.q2_hat, &q2_closed, options.tol_q2),
        decay_checks(est.convergence_issues(options.decay_factor), 3),
    ];
    if config.c_total() == 0 {
        // the first-order coefficient must vanish without typed gametes
        checks.push(CheckReport {
            name: "q1 vanishes at c = 0".into(),
            passed: est.closed_q1 == BigRational::from_u64(0),
            detail: format!("closed q1 = {}", est.closed_q1),
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    let q2_failed = !checks[2].passed;
    Ok(EntryReport {
        label: format!("two-locus {}", config.to_json()),
        passed,
        sigma_breakdown: q2_failed.then(|| {
            sigma_terms(config, &params)
                .labeled()
                .map(|(label, v)| (label, Scalar::to_f64(v)))
                .collect()
        }),
        checks,
    })
}

fn verify_count_entry(
    ladder: &mut CountLadder,
    query: CountConfig,
    options: &VerifyOptions,
) -> Result<EntryReport> {
    let est = extract_count_series_with(ladder, query)?;
    let checks = vec![
        coefficient_check("p0", &est.p0_hat, &est.closed_p0, options.tol_p0),
        coefficient_check("p1", &est.p1_hat, &est.closed_p1, options.tol_p1),
        decay_checks(est.convergence_issues(options.decay_factor), 2),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(EntryReport {
        label: format!(
            "counts a={} b={} c={} k={} l={}",
            query.a, query.b, query.c, query.k, query.l
        ),
        passed,
        checks,
        sigma_breakdown: None,
    })
}

/// All counting queries with `1 <= a+b+c <= n_max`, `k <= a+c`, `l <= b+c`,
/// skipping the conventionally-zero ones.
pub fn enumerate_count_queries(n_max: usize, c_max: Option<usize>) -> Vec<CountConfig> {
    let mut out = Vec::new();
    let c_cap = c_max.unwrap_or(n_max);
    for n in 1..=n_max {
        for c in 0..=n.min(c_cap) {
            for a in 0..=n - c {
                let b = n - c - a;
                for k in 0..=a + c {
                    for l in 0..=b + c {
                        if k == 0 && l == 0 {
                            continue;
                        }
                        out.push(CountConfig::new(a, b, c, k, l));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: u64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    fn quick_options(n_max: usize) -> VerifyOptions {
        VerifyOptions {
            n_max,
            // three points keep the unit test quick; acceptance uses the
            // full default schedule
            rho_schedule: vec![
                rat(10_000, 1),
                rat(100_000, 1),
                rat(1_000_000, 1),
            ],
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn tiny_sweep_passes() {
        let mut options = quick_options(2);
        options.counts_n_max = Some(2);
        let report = verify_sweep(&options).unwrap();
        assert!(report.all_passed(), "{}", report.render());
        assert!(!report.entries.is_empty());
        assert!(report.render().contains("PASS"));
    }

    #[test]
    fn empty_family_is_a_passing_report() {
        let mut options = quick_options(0);
        options.counts_n_max = Some(0);
        let report = verify_sweep(&options).unwrap();
        assert!(report.entries.is_empty());
        assert!(report.all_passed());
    }

    #[test]
    fn perturbed_remainder_fails_and_localizes() {
        let mut options = quick_options(3);
        options.include_counts = false;
        let perturbation = SigmaPerturbation {
            term_index: 5, // the order-1 diagonal family
            scale: rat(21, 20),
        };
        let report = verify_sweep_perturbed(&options, Some(perturbation)).unwrap();
        assert!(!report.all_passed());
        // at least one failure carries the per-term breakdown with a
        // nonzero perturbed family
        let with_breakdown = report
            .failures()
            .filter_map(|e| e.sigma_breakdown.as_ref())
            .find(|b| b.iter().any(|(label, v)| *label == "order1_diagonal" && *v != 0.0));
        assert!(with_breakdown.is_some(), "{}", report.render());
        // configs without typed gametes are untouched by the perturbation
        for entry in &report.entries {
            if entry.label.contains("\"c\":[[0]]") || entry.label.contains("\"c\":[]") {
                assert!(entry.passed, "{}", entry.label);
            }
        }
    }

    #[test]
    fn count_query_enumeration_respects_bounds() {
        for q in enumerate_count_queries(3, Some(2)) {
            assert!(q.a + q.b + q.c <= 3 && q.a + q.b + q.c >= 1);
            assert!(q.c <= 2);
            assert!(q.k <= q.a + q.c && q.l <= q.b + q.c);
            assert!(!(q.k == 0 && q.l == 0));
        }
    }
}
