//! Command-line interface.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 capability/budget error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::allele_counts::{count_pmf_asymptotic, CountConfig, CountOrder, CountSolver};
use crate::asymptotic::{q0, q1, q_asymptotic_with, ExpansionOrder, Q2Cache};
use crate::error::{Error, Result};
use crate::harness::{
    default_rho_schedule, generate_table, verify_sweep, TableSpec, VerifyOptions,
};
use crate::numerics::{Backend, BigRational, Scalar};
use crate::one_locus::{
    allele_count_pmf, check_one_locus_recursion, esf_ordered, esf_unordered, orderings_count,
    OneLocusConfig,
};
use crate::two_locus::{EnumerationConstraints, ExactSolver, Params, TwoLocusConfig};

#[derive(Parser)]
#[command(
    name = "twolocus",
    about = "Two-locus infinite-alleles sampling probabilities: exact solver, \
             large-rho asymptotics, verification sweeps and lookup tables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Scaled mutation rate at locus A (integer, decimal, or p/q)
    #[arg(long, default_value = "1")]
    theta_a: String,
    /// Scaled mutation rate at locus B
    #[arg(long, default_value = "1")]
    theta_b: String,
    /// Scaled recombination rate between the loci
    #[arg(long, default_value = "1")]
    rho: String,
}

impl ParamArgs {
    fn parse<S: Scalar>(&self) -> Result<Params<S>> {
        Params::new(
            S::parse(&self.theta_a)?,
            S::parse(&self.theta_b)?,
            S::parse(&self.rho)?,
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// One-locus Ewens-sampling-formula quantities
    Esf {
        /// Allele multiplicities, e.g. 2,1,1
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<usize>>,
        /// Scaled mutation rate
        #[arg(long, default_value = "1")]
        theta: String,
        /// Sample size for the allele-count pmf
        #[arg(long)]
        n: Option<usize>,
        /// Number of alleles for the allele-count pmf
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "rational")]
        backend: String,
    },
    /// Exact two-locus sampling probability
    Exact {
        /// Configuration JSON: {"a":[..],"b":[..],"c":[[..]]}
        #[arg(long)]
        config: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "rational")]
        backend: String,
        /// State budget override
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Truncated large-rho expansion of the sampling probability
    Asym {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Truncation order: 0, 1 or 2
        #[arg(long, default_value_t = 2)]
        order: u8,
        /// Print the per-order terms as JSON instead of a single value
        #[arg(long)]
        terms: bool,
        #[arg(long, default_value = "rational")]
        backend: String,
    },
    /// Joint allele-count pmf P(K = k, L = l)
    Counts {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        params: ParamArgs,
        /// exact, asym0 or asym1
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value = "rational")]
        backend: String,
    },
    /// Certify the closed forms against the exact solver over a family
    Verify {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[arg(long, default_value_t = 2)]
        l_max: usize,
        #[arg(long)]
        c_max: Option<usize>,
        #[arg(long, default_value = "1")]
        theta_a: String,
        #[arg(long, default_value = "1")]
        theta_b: String,
        /// Comma-separated exact rho values, strictly increasing
        #[arg(long)]
        rho_schedule: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol_q0: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_q1: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol_q2: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_p0: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_p1: f64,
        /// Gamete-total bound for the counting sweep (defaults to n-max)
        #[arg(long)]
        counts_n_max: Option<usize>,
        /// Skip the configuration sweep
        #[arg(long)]
        skip_two_locus: bool,
        /// Skip the counting sweep
        #[arg(long)]
        skip_counts: bool,
    },
    /// Generate a lookup table (CSV or JSON)
    Table {
        /// JSON run file mirroring the table spec
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Write to this path instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[arg(long, default_value_t = 2)]
        l_max: usize,
        #[arg(long)]
        c_max: Option<usize>,
        /// Explicit configuration JSON (repeatable; overrides enumeration)
        #[arg(long)]
        config: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        theta_a: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        theta_b: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "10,50,100")]
        rho: Vec<String>,
        /// exact, asym0, asym1 or asym2
        #[arg(long, default_value = "exact")]
        method: String,
        /// csv or json
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, default_value = "float")]
        backend: String,
    },
}

/// Parse and run, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; exit 2 on usage errors, 0 on
            // --help/--version
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter(_) | Error::InvalidConfig(_) => 2,
                Error::Capability(_) => 3,
                Error::Verification(_) | Error::Numerical(_) => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Esf {
            counts,
            theta,
            n,
            k,
            backend,
        } => {
            let backend: Backend = backend.parse()?;
            match backend {
                Backend::Rational => run_esf::<BigRational>(counts, &theta, n, k),
                Backend::Float => run_esf::<f64>(counts, &theta, n, k),
            }
        }
        Command::Exact {
            config,
            params,
            backend,
            budget,
        } => {
            let config = TwoLocusConfig::from_json(&config)?;
            let backend: Backend = backend.parse()?;
            match backend {
                Backend::Rational => run_exact::<BigRational>(&config, &params, budget),
                Backend::Float => run_exact::<f64>(&config, &params, budget),
            }
        }
        Command::Asym {
            config,
            params,
            order,
            terms,
            backend,
        } => {
            let config = TwoLocusConfig::from_json(&config)?;
            let order = ExpansionOrder::from_u8(order)?;
            let backend: Backend = backend.parse()?;
            match backend {
                Backend::Rational => run_asym::<BigRational>(&config, &params, order, terms),
                Backend::Float => run_asym::<f64>(&config, &params, order, terms),
            }
        }
        Command::Counts {
            a,
            b,
            c,
            k,
            l,
            params,
            method,
            backend,
        } => {
            let backend: Backend = backend.parse()?;
            let query = CountConfig::new(a, b, c, k, l);
            match backend {
                Backend::Rational => run_counts::<BigRational>(query, &params, &method),
                Backend::Float => run_counts::<f64>(query, &params, &method),
            }
        }
        Command::Verify {
            n_max,
            k_max,
            l_max,
            c_max,
            theta_a,
            theta_b,
            rho_schedule,
            tol_q0,
            tol_q1,
            tol_q2,
            tol_p0,
            tol_p1,
            counts_n_max,
            skip_two_locus,
            skip_counts,
        } => {
            let schedule = match rho_schedule {
                None => default_rho_schedule(),
                Some(text) => text
                    .split(',')
                    .map(<BigRational as Scalar>::parse)
                    .collect::<Result<Vec<_>>>()?,
            };
            let options = VerifyOptions {
                n_max,
                constraints: EnumerationConstraints { k_max, l_max, c_max },
                theta_a: <BigRational as Scalar>::parse(&theta_a)?,
                theta_b: <BigRational as Scalar>::parse(&theta_b)?,
                rho_schedule: schedule,
                tol_q0,
                tol_q1,
                tol_q2,
                tol_p0,
                tol_p1,
                decay_factor: 2.0,
                include_two_locus: !skip_two_locus,
                include_counts: !skip_counts,
                counts_n_max,
            };
            let report = verify_sweep(&options)?;
            print!("{}", report.render());
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Table {
            spec,
            out,
            n_max,
            k_max,
            l_max,
            c_max,
            config,
            theta_a,
            theta_b,
            rho,
            method,
            format,
            backend,
        } => {
            let spec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::Parameter(format!("cannot read {}: {e}", path.display()))
                    })?;
                    TableSpec::from_json(&text)?
                }
                None => {
                    let configs = if config.is_empty() {
                        None
                    } else {
                        Some(
                            config
                                .iter()
                                .map(|c| TwoLocusConfig::from_json(c))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    };
                    TableSpec {
                        n_max,
                        k_max,
                        l_max,
                        c_max,
                        configs,
                        theta_a,
                        theta_b,
                        rho,
                        method,
                        format,
                        backend,
                    }
                }
            };
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| {
                        Error::Parameter(format!("cannot create {}: {e}", path.display()))
                    })?;
                    generate_table(&spec, std::io::BufWriter::new(file))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    generate_table(&spec, &mut lock)?;
                    lock.flush().ok();
                }
            }
            Ok(0)
        }
    }
}

fn run_esf<S: Scalar>(
    counts: Option<Vec<usize>>,
    theta: &str,
    n: Option<usize>,
    k: Option<usize>,
) -> Result<i32> {
    let theta = S::parse(theta)?;
    let mut output = serde_json::Map::new();
    if let Some(counts) = counts {
        let config = OneLocusConfig::new(counts)?;
        output.insert(
            "q".into(),
            format!("{}", esf_ordered(&config, &theta)?).into(),
        );
        output.insert(
            "p".into(),
            format!("{}", esf_unordered(&config, &theta)?).into(),
        );
        output.insert(
            "orderings".into(),
            orderings_count(&config).to_string().into(),
        );
        output.insert(
            "recursion_residual".into(),
            format!("{}", check_one_locus_recursion(&config, &theta)?).into(),
        );
    }
    if let (Some(n), Some(k)) = (n, k) {
        output.insert(
            "pmf".into(),
            format!("{}", allele_count_pmf(n, k, &theta)?).into(),
        );
    }
    if output.is_empty() {
        return Err(Error::Parameter(
            "esf needs --counts or both --n and --k".into(),
        ));
    }
    println!("{}", serde_json::Value::Object(output));
    Ok(0)
}

fn run_exact<S: Scalar>(
    config: &TwoLocusConfig,
    params: &ParamArgs,
    budget: Option<usize>,
) -> Result<i32> {
    let params: Params<S> = params.parse()?;
    let mut solver = match budget {
        Some(budget) => ExactSolver::with_budget(params, budget),
        None => ExactSolver::new(params),
    };
    println!("{}", solver.q(config)?);
    Ok(0)
}

fn run_asym<S: Scalar>(
    config: &TwoLocusConfig,
    params: &ParamArgs,
    order: ExpansionOrder,
    terms: bool,
) -> Result<i32> {
    let params: Params<S> = params.parse()?;
    let mut cache = Q2Cache::new(params.clone());
    let value = q_asymptotic_with(config, &params, order, Some(&mut cache))?;
    if terms {
        let mut output = serde_json::Map::new();
        output.insert("q0".into(), format!("{}", q0(config, &params)).into());
        if order >= ExpansionOrder::One {
            output.insert("q1".into(), format!("{}", q1(config, &params)).into());
        }
        if order == ExpansionOrder::Two {
            output.insert("q2".into(), format!("{}", cache.q2(config)).into());
        }
        output.insert("value".into(), format!("{value}").into());
        println!("{}", serde_json::Value::Object(output));
    } else {
        println!("{value}");
    }
    Ok(0)
}

fn run_counts<S: Scalar>(query: CountConfig, params: &ParamArgs, method: &str) -> Result<i32> {
    let params: Params<S> = params.parse()?;
    let value = match method {
        "exact" => CountSolver::new(params).p(query)?,
        "asym0" => count_pmf_asymptotic(query, &params, CountOrder::Zero)?,
        "asym1" => count_pmf_asymptotic(query, &params, CountOrder::One)?,
        other => {
            return Err(Error::Parameter(format!(
                "unknown method {other:?}; expected exact, asym0 or asym1"
            )))
        }
    };
    println!("{value}");
    Ok(0)
}
