//! Closed forms of the large-`rho` expansion
//! `q = q0 + q1/rho + q2/rho^2 + O(rho^-3)`.
//!
//! `q0` and `q1` are products and differences of marginal one-locus ordered
//! probabilities. `q2` splits into a strictly recursive part `q2(a, b, 0)`
//! (dynamic programming, [`Q2Cache`]) plus a closed-form remainder
//! [`sigma`], evaluated term group by term group so any transcription slip
//! is localizable.

mod sigma;

use crate::error::{Error, Result};
use crate::numerics::{binomial, choose2, BigInt, Scalar};
use crate::one_locus::esf_ordered_counts;
use crate::two_locus::{Params, TwoLocusConfig};

pub use sigma::{sigma, sigma_terms, SigmaBreakdown, SIGMA_TERM_LABELS};

/// Truncation order of the expansion; the closed forms stop at `rho^-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExpansionOrder {
    Zero,
    One,
    Two,
}

impl ExpansionOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            ExpansionOrder::Zero => 0,
            ExpansionOrder::One => 1,
            ExpansionOrder::Two => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(ExpansionOrder::Zero),
            1 => Ok(ExpansionOrder::One),
            2 => Ok(ExpansionOrder::Two),
            other => Err(Error::Parameter(format!(
                "expansion order must be 0, 1 or 2, got {other}"
            ))),
        }
    }
}

/// Marginal one-locus probabilities of a configuration, with the deleted
/// variants used by `q1` and `sigma`.
///
/// `qa()` is the ordered probability of the A-locus counts `a + c_A`;
/// `qa_del(i)` deletes one gamete from class `i` (an emptied class is
/// dropped, a deletion below zero yields 0), `qa_del2(i, k)` deletes two.
pub struct Marginals<'p, S: Scalar> {
    ma: Vec<usize>,
    mb: Vec<usize>,
    params: &'p Params<S>,
}

impl<'p, S: Scalar> Marginals<'p, S> {
    pub fn new(config: &TwoLocusConfig, params: &'p Params<S>) -> Self {
        Self {
            ma: config.a_marginal(),
            mb: config.b_marginal(),
            params,
        }
    }

    fn eval(counts: &mut Vec<usize>, deletions: &[usize], theta: &S) -> S {
        for &i in deletions {
            if counts[i] == 0 {
                return S::zero();
            }
            counts[i] -= 1;
        }
        esf_ordered_counts(counts, theta)
    }

    pub fn qa(&self) -> S {
        esf_ordered_counts(&self.ma, self.params.theta_a())
    }

    pub fn qb(&self) -> S {
        esf_ordered_counts(&self.mb, self.params.theta_b())
    }

    pub fn qa_del(&self, i: usize) -> S {
        Self::eval(&mut self.ma.clone(), &[i], self.params.theta_a())
    }

    pub fn qa_del2(&self, i: usize, k: usize) -> S {
        Self::eval(&mut self.ma.clone(), &[i, k], self.params.theta_a())
    }

    pub fn qb_del(&self, j: usize) -> S {
        Self::eval(&mut self.mb.clone(), &[j], self.params.theta_b())
    }

    pub fn qb_del2(&self, j: usize, l: usize) -> S {
        Self::eval(&mut self.mb.clone(), &[j, l], self.params.theta_b())
    }
}

/// Zeroth-order term: independent loci, `q^A(a + c_A) q^B(b + c_B)`.
pub fn q0<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> S {
    let m = Marginals::new(config, params);
    m.qa() * m.qb()
}

/// First-order term, a closed form over marginal probabilities:
///
/// `binom(c,2) q^A q^B - sum_i binom(c_i.,2) q^A_i q^B
///  - sum_j binom(c_.j,2) q^A q^B_j + sum_ij binom(c_ij,2) q^A_i q^B_j`.
///
/// Vanishes identically when `c = 0` (every coefficient is zero), which is
/// the `c = 0` vanishing lemma realized structurally.
pub fn q1<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> S {
    let m = Marginals::new(config, params);
    let rows = config.c_row_sums();
    let cols = config.c_col_sums();
    let qa = m.qa();
    let qb = m.qb();
    let mut total = S::from_u64(choose2(config.c_total())) * qa.clone() * qb.clone();
    for (i, &ci) in rows.iter().enumerate() {
        if ci >= 2 {
            total = total - S::from_u64(choose2(ci)) * m.qa_del(i) * qb.clone();
        }
    }
    for (j, &cj) in cols.iter().enumerate() {
        if cj >= 2 {
            total = total - S::from_u64(choose2(cj)) * qa.clone() * m.qb_del(j);
        }
    }
    for (i, row) in config.c().iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij >= 2 {
                total = total + S::from_u64(choose2(cij)) * m.qa_del(i) * m.qb_del(j);
            }
        }
    }
    total
}

/// Memoized dynamic program for the strictly recursive part `q2(a, b, 0)`.
///
/// Keys are canonical (sorted) count multisets; parameters are fixed per
/// cache. Replicate per worker for concurrent use.
pub struct Q2Cache<S: Scalar> {
    params: Params<S>,
    memo: std::collections::HashMap<(Vec<usize>, Vec<usize>), S>,
}

impl<S: Scalar> Q2Cache<S> {
    pub fn new(params: Params<S>) -> Self {
        Self {
            params,
            memo: std::collections::HashMap::new(),
        }
    }

    pub fn params(&self) -> &Params<S> {
        &self.params
    }

    /// `q2` for a configuration with no fully-typed gametes.
    ///
    /// Strict recursion: coalescence and mutation descend to smaller
    /// samples; the source term
    /// `4 [a theta_A - (theta_A + a - 1) #singletons_A] [b ...] q^A q^B`
    /// needs gametes at both loci, so `q2(a, 0, 0) = q2(0, b, 0) = 0`.
    pub fn q2_ab0(&mut self, a_counts: &[usize], b_counts: &[usize]) -> S {
        let mut a: Vec<usize> = a_counts.iter().copied().filter(|&v| v > 0).collect();
        let mut b: Vec<usize> = b_counts.iter().copied().filter(|&v| v > 0).collect();
        a.sort_unstable_by(|x, y| y.cmp(x));
        b.sort_unstable_by(|x, y| y.cmp(x));
        self.q2_ab0_sorted(a, b)
    }

    fn q2_ab0_sorted(&mut self, a: Vec<usize>, b: Vec<usize>) -> S {
        let a_total: usize = a.iter().sum();
        let b_total: usize = b.iter().sum();
        if a_total == 0 || b_total == 0 || a_total + b_total <= 1 {
            return S::zero();
        }
        let key = (a, b);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let (a, b) = (&key.0, &key.1);
        let theta_a = self.params.theta_a().clone();
        let theta_b = self.params.theta_b().clone();

        let mut rhs = S::zero();
        for i in 0..a.len() {
            let mut reduced = a.clone();
            reduced[i] -= 1;
            let coeff = if a[i] >= 2 {
                S::from_u64((a[i] * (a[i] - 1)) as u64)
            } else {
                theta_a.clone()
            };
            rhs = rhs + coeff * self.q2_ab0(&reduced, b);
        }
        for j in 0..b.len() {
            let mut reduced = b.clone();
            reduced[j] -= 1;
            let coeff = if b[j] >= 2 {
                S::from_u64((b[j] * (b[j] - 1)) as u64)
            } else {
                theta_b.clone()
            };
            rhs = rhs + coeff * self.q2_ab0(a, &reduced);
        }

        let (a, b) = (&key.0, &key.1);
        let singles_a = a.iter().filter(|&&v| v == 1).count() as u64;
        let singles_b = b.iter().filter(|&&v| v == 1).count() as u64;
        let bracket_a = S::from_u64(a_total as u64) * theta_a.clone()
            - (theta_a.clone() + S::from_u64(a_total as u64 - 1)) * S::from_u64(singles_a);
        let bracket_b = S::from_u64(b_total as u64) * theta_b.clone()
            - (theta_b.clone() + S::from_u64(b_total as u64 - 1)) * S::from_u64(singles_b);
        let source = S::from_u64(4)
            * bracket_a
            * bracket_b
            * esf_ordered_counts(a, &theta_a)
            * esf_ordered_counts(b, &theta_b);
        rhs = rhs + source;

        let denom = S::from_u64((a_total * (a_total - 1)) as u64)
            + S::from_u64(a_total as u64) * theta_a
            + S::from_u64((b_total * (b_total - 1)) as u64)
            + S::from_u64(b_total as u64) * theta_b;
        let value = rhs / denom;
        self.memo.insert(key, value.clone());
        value
    }

    /// Full second-order term: `q2(a + c_A, b + c_B, 0) + sigma(a, b, c)`.
    pub fn q2(&mut self, config: &TwoLocusConfig) -> S {
        let params = self.params.clone();
        self.q2_ab0(&config.a_marginal(), &config.b_marginal()) + sigma(config, &params)
    }
}

/// The truncated expansion through `order`.
///
/// Order 0 needs no `rho` (it is also the `rho = infinity` limit); higher
/// orders divide by `rho`, so `rho = 0` is a parameter error.
pub fn q_asymptotic<S: Scalar>(
    config: &TwoLocusConfig,
    params: &Params<S>,
    order: ExpansionOrder,
) -> Result<S> {
    q_asymptotic_with(config, params, order, None)
}

/// Like [`q_asymptotic`], reusing a caller-held [`Q2Cache`] for sweeps.
pub fn q_asymptotic_with<S: Scalar>(
    config: &TwoLocusConfig,
    params: &Params<S>,
    order: ExpansionOrder,
    cache: Option<&mut Q2Cache<S>>,
) -> Result<S> {
    let mut value = q0(config, params);
    if order == ExpansionOrder::Zero {
        return Ok(value);
    }
    if params.rho().is_zero() {
        return Err(Error::Parameter(
            "asymptotic orders >= 1 need rho > 0".into(),
        ));
    }
    let inv_rho = S::one() / params.rho().clone();
    value = value + q1(config, params) * inv_rho.clone();
    if order == ExpansionOrder::Two {
        let q2 = match cache {
            Some(cache) => cache.q2(config),
            None => Q2Cache::new(params.clone()).q2(config),
        };
        value = value + q2 * inv_rho.clone() * inv_rho;
    }
    Ok(value)
}

/// Maximum `c` accepted by the exhaustive subsampling oracle.
pub const SUBSAMPLING_BUDGET: usize = 8;

/// Independent route to `q1`: the expected-value representation
/// `q1 = sum_{m=1}^{c} E[f(A_m, B_m, C_m)]` with `C_m` a multivariate
/// hypergeometric subsample of the typed gametes, evaluated by exhaustive
/// enumeration. Exists purely as an oracle for the closed form.
pub fn q1_subsampling_oracle<S: Scalar>(
    config: &TwoLocusConfig,
    params: &Params<S>,
) -> Result<S> {
    let c_total = config.c_total();
    if c_total > SUBSAMPLING_BUDGET {
        return Err(Error::Capability(format!(
            "subsampling oracle enumerates c <= {SUBSAMPLING_BUDGET}, got {c_total}"
        )));
    }
    let m = Marginals::new(config, params);
    let qa = m.qa();
    let qb = m.qb();
    let cells: Vec<(usize, usize, usize)> = config
        .c()
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .collect();

    let mut total = S::zero();
    // enumerate sub-matrices c' <= c entrywise
    let mut sub = vec![0usize; cells.len()];
    loop {
        let drawn: usize = sub.iter().sum();
        if drawn >= 1 {
            // P(subsample) = prod binom(c_ij, c'_ij) / binom(c, m)
            let mut ways = BigInt::from(1u8);
            for (slot, &(_, _, cap)) in sub.iter().zip(&cells) {
                ways *= binomial(cap, *slot);
            }
            let prob = S::from_bigint(&ways) / S::from_bigint(&binomial(c_total, drawn));

            // f on the subsample; the undeleted marginals are invariant
            let mut f = S::from_u64((drawn - 1) as u64) * qa.clone() * qb.clone();
            let mut row_sums = vec![0usize; config.num_a_types()];
            let mut col_sums = vec![0usize; config.num_b_types()];
            for (slot, &(i, j, _)) in sub.iter().zip(&cells) {
                row_sums[i] += slot;
                col_sums[j] += slot;
            }
            let inv_m = S::one() / S::from_u64(drawn as u64);
            for (i, &ri) in row_sums.iter().enumerate() {
                if ri >= 2 {
                    f = f - qb.clone()
                        * S::from_u64((ri * (ri - 1)) as u64)
                        * inv_m.clone()
                        * m.qa_del(i);
                }
            }
            for (j, &cj) in col_sums.iter().enumerate() {
                if cj >= 2 {
                    f = f - qa.clone()
                        * S::from_u64((cj * (cj - 1)) as u64)
                        * inv_m.clone()
                        * m.qb_del(j);
                }
            }
            for (slot, &(i, j, _)) in sub.iter().zip(&cells) {
                if *slot >= 2 {
                    f = f + S::from_u64((slot * (slot - 1)) as u64)
                        * inv_m.clone()
                        * m.qa_del(i)
                        * m.qb_del(j);
                }
            }
            total = total + prob * f;
        }
        // odometer increment over the cell capacities
        let mut pos = 0;
        loop {
            if pos == cells.len() {
                return Ok(total);
            }
            if sub[pos] < cells[pos].2 {
                sub[pos] += 1;
                break;
            }
            sub[pos] = 0;
            pos += 1;
        }
    }
}

/// `q1` recomputed through hypergeometric factorial moments, the middle step
/// between the subsampling representation and the closed form. Test-facing.
pub fn q1_moment_route<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> S {
    use crate::numerics::hypergeometric_factorial_moment as moment;
    let m = Marginals::new(config, params);
    let c = config.c_total();
    let qa = m.qa();
    let qb = m.qb();
    let rows = config.c_row_sums();
    let cols = config.c_col_sums();
    let mut total = S::zero();
    for draws in 1..=c {
        let inv_m = S::one() / S::from_u64(draws as u64);
        let mut f = S::from_u64((draws - 1) as u64) * qa.clone() * qb.clone();
        for (i, &ri) in rows.iter().enumerate() {
            f = f - qb.clone() * moment::<S>(c, ri, draws) * inv_m.clone() * m.qa_del(i);
        }
        for (j, &cj) in cols.iter().enumerate() {
            f = f - qa.clone() * moment::<S>(c, cj, draws) * inv_m.clone() * m.qb_del(j);
        }
        for (i, row) in config.c().iter().enumerate() {
            for (j, &cij) in row.iter().enumerate() {
                f = f + moment::<S>(c, cij, draws) * inv_m.clone() * m.qa_del(i) * m.qb_del(j);
            }
        }
        total = total + f;
    }
    total
}

#[cfg(test)]
mod tests;
