//! The Ewens-sampling-formula layer: ordered and unordered configuration
//! probabilities, the one-locus recursion as a test oracle, and the
//! allele-count pmf.



use crate::error::{Error, Result};
use crate::numerics::{
    ascending_factorial, factorial, stirling_first_unsigned, BigInt, Scalar,
};

/// A one-locus sample configuration: the multiset of allele multiplicities.
///
/// Zero counts are dropped at construction (an unobserved allele class is no
/// class at all) and the counts are kept sorted descending, since allelic
/// labels carry no information.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OneLocusConfig {
    counts: Vec<usize>,
}

impl OneLocusConfig {
    pub fn new(counts: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        counts.sort_unstable_by(|x, y| y.cmp(x));
        if counts.is_empty() {
            return Err(Error::InvalidConfig(
                "one-locus configuration needs at least one gamete".into(),
            ));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total sample size.
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of distinct allelic types.
    pub fn num_alleles(&self) -> usize {
        self.counts.len()
    }
}

/// Probability of one particular ordered sample with multiplicities `counts`:
/// `[prod (n_i - 1)!] theta^K / (theta)_n`. Empty counts give 1.
///
/// Shared by the public entry point and by the marginal shorthands of the
/// asymptotic module, which delete entries and may empty a class.
pub(crate) fn esf_ordered_counts<S: Scalar>(counts: &[usize], theta: &S) -> S {
    let mut num = S::one();
    let mut n = 0usize;
    for &c in counts {
        if c == 0 {
            continue;
        }
        num = num * S::from_bigint(&factorial(c - 1)) * theta.clone();
        n += c;
    }
    num / ascending_factorial(theta, n)
}

fn require_positive<S: Scalar>(theta: &S) -> Result<()> {
    if theta.is_positive() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("theta must be > 0, got {theta}")))
    }
}

/// Ordered sampling probability `q(n | theta)`.
pub fn esf_ordered<S: Scalar>(config: &OneLocusConfig, theta: &S) -> Result<S> {
    require_positive(theta)?;
    Ok(esf_ordered_counts(&config.counts, theta))
}

/// Unordered sampling probability `p(n | theta)`; equals
/// `orderings_count * q(n | theta)`.
pub fn esf_unordered<S: Scalar>(config: &OneLocusConfig, theta: &S) -> Result<S> {
    let q = esf_ordered(config, theta)?;
    Ok(S::from_bigint(&orderings_count(config)) * q)
}

/// Number of ordered samples collapsing to the multiset `config`:
/// `n! / (prod n_i! * prod alpha_i!)` where `alpha_i` counts classes of size i.
pub fn orderings_count(config: &OneLocusConfig) -> BigInt {
    let mut acc = factorial(config.n());
    for &c in &config.counts {
        acc /= factorial(c);
    }
    let mut run = 1usize;
    for w in config.counts.windows(2) {
        if w[0] == w[1] {
            run += 1;
            acc /= BigInt::from(run);
        } else {
            run = 1;
        }
    }
    acc
}

/// Distribution of the number of distinct alleles in a sample of size `n`:
/// `P(K_n = k) = s(n, k) theta^k / (theta)_n`, 0 outside `1 <= k <= n`.
pub fn allele_count_pmf<S: Scalar>(n: usize, k: usize, theta: &S) -> Result<S> {
    require_positive(theta)?;
    if n == 0 {
        return Err(Error::Parameter("sample size must be >= 1".into()));
    }
    if k == 0 || k > n {
        return Ok(S::zero());
    }
    let mut power = S::one();
    for _ in 0..k {
        power = power * theta.clone();
    }
    Ok(S::from_bigint(&stirling_first_unsigned(n, k)) * power / ascending_factorial(theta, n))
}

/// Residual of the one-locus coalescent recursion evaluated on the closed
/// form: `n(n-1+theta) q(n) - sum_i n_i(n_i-1) q(n - e_i) - theta sum_{n_i=1}
/// q(n - e_i)`. Exactly zero under the rational backend.
pub fn check_one_locus_recursion<S: Scalar>(config: &OneLocusConfig, theta: &S) -> Result<S> {
    require_positive(theta)?;
    let n = config.n();
    let q = esf_ordered_counts(&config.counts, theta);
    let lhs = S::from_u64((n * (n - 1)) as u64) * q.clone()
        + S::from_u64(n as u64) * theta.clone() * q;
    let mut rhs = S::zero();
    for (i, &c) in config.counts.iter().enumerate() {
        let mut reduced = config.counts.clone();
        reduced[i] -= 1;
        let sub = esf_ordered_counts(&reduced, theta);
        if c >= 2 {
            rhs = rhs + S::from_u64((c * (c - 1)) as u64) * sub.clone();
        }
        if c == 1 {
            rhs = rhs + theta.clone() * sub;
        }
    }
    Ok(lhs - rhs)
}
