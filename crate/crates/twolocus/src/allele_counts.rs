//! Joint distribution of the number of alleles observed at the two loci:
//! exact solver for the counting recursion plus the first two terms of its
//! large-`rho` expansion.

use std::collections::HashMap;



use crate::error::{Error, Result};
use crate::numerics::{choose2, Scalar};
use crate::one_locus::allele_count_pmf;
use crate::two_locus::degree_system::{solve_reachable, RecursionSystem, StateTerms};
use crate::two_locus::{Params, DEFAULT_STATE_BUDGET};

/// A counting state: gamete totals by typing pattern plus the observed
/// allele counts `k` (locus A) and `l` (locus B). No allele identities are
/// involved, so no canonicalization is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountConfig {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub k: usize,
    pub l: usize,
}

impl CountConfig {
    pub fn new(a: usize, b: usize, c: usize, k: usize, l: usize) -> Self {
        Self { a, b, c, k, l }
    }

    fn n(&self) -> usize {
        self.a + self.b + self.c
    }

    fn degree(&self) -> usize {
        self.a + self.b + 2 * self.c
    }

    /// The evaluation rule for queries outside the support: the probability
    /// is zero when no gamete exists, when both counts are zero, or when a
    /// count exceeds the gametes observed at its locus.
    fn is_zero_by_convention(&self) -> bool {
        self.n() == 0 || (self.k == 0 && self.l == 0) || self.k > self.a + self.c
            || self.l > self.b + self.c
    }
}

/// Marginal allele-count pmf at locus A, the one-locus pmf at `theta_A`.
///
/// An entirely unobserved locus (`n = 0`) has zero alleles with certainty,
/// which the joint formulas rely on when one side of the sample is empty.
pub fn marginal_count_pmf_a<S: Scalar>(n: usize, k: usize, params: &Params<S>) -> Result<S> {
    if n == 0 {
        return Ok(if k == 0 { S::one() } else { S::zero() });
    }
    allele_count_pmf(n, k, params.theta_a())
}

/// Marginal allele-count pmf at locus B.
pub fn marginal_count_pmf_b<S: Scalar>(n: usize, l: usize, params: &Params<S>) -> Result<S> {
    if n == 0 {
        return Ok(if l == 0 { S::one() } else { S::zero() });
    }
    allele_count_pmf(n, l, params.theta_b())
}

struct CountSystem<'p, S: Scalar> {
    params: &'p Params<S>,
}

enum CountTerm {
    Int(u64),
    ThetaA(u64),
    ThetaB(u64),
    Rho(u64),
}

fn count_terms(s: &CountConfig) -> Vec<(CountTerm, CountConfig, bool)> {
    let CountConfig { a, b, c, k, l } = *s;
    let mut out: Vec<(CountTerm, CountConfig, bool)> = Vec::new();
    // coalescences and joins; same-degree flag marks degree-preserving moves
    if a >= 1 {
        let coeff = (a * (a + 2 * c - 1)) as u64;
        if coeff > 0 {
            out.push((CountTerm::Int(coeff), CountConfig::new(a - 1, b, c, k, l), false));
        }
    }
    if b >= 1 {
        let coeff = (b * (b + 2 * c - 1)) as u64;
        if coeff > 0 {
            out.push((CountTerm::Int(coeff), CountConfig::new(a, b - 1, c, k, l), false));
        }
    }
    if c >= 2 {
        out.push((
            CountTerm::Int((c * (c - 1)) as u64),
            CountConfig::new(a, b, c - 1, k, l),
            false,
        ));
    }
    if a >= 1 && b >= 1 {
        out.push((
            CountTerm::Int((2 * a * b) as u64),
            CountConfig::new(a - 1, b - 1, c + 1, k, l),
            true,
        ));
    }
    // mutations consume one allele count
    if k >= 1 {
        if a >= 1 {
            out.push((
                CountTerm::ThetaA(a as u64),
                CountConfig::new(a - 1, b, c, k - 1, l),
                false,
            ));
        }
        if c >= 1 {
            out.push((
                CountTerm::ThetaA(c as u64),
                CountConfig::new(a, b + 1, c - 1, k - 1, l),
                false,
            ));
        }
    }
    if l >= 1 {
        if b >= 1 {
            out.push((
                CountTerm::ThetaB(b as u64),
                CountConfig::new(a, b - 1, c, k, l - 1),
                false,
            ));
        }
        if c >= 1 {
            out.push((
                CountTerm::ThetaB(c as u64),
                CountConfig::new(a + 1, b, c - 1, k, l - 1),
                false,
            ));
        }
    }
    // recombination splits a typed gamete
    if c >= 1 {
        out.push((
            CountTerm::Rho(c as u64),
            CountConfig::new(a + 1, b + 1, c - 1, k, l),
            true,
        ));
    }
    out.retain(|(_, t, _)| !t.is_zero_by_convention());
    out
}

impl<S: Scalar> RecursionSystem for CountSystem<'_, S> {
    type State = CountConfig;
    type Sc = S;

    fn degree(&self, state: &CountConfig) -> usize {
        state.degree()
    }

    fn known_value(&self, state: &CountConfig) -> Option<S> {
        // p(1,0,0;k,l) = [k=1][l=0], p(0,1,0;k,l) = [k=0][l=1]
        if state.n() != 1 || state.c != 0 {
            return None;
        }
        let hit = (state.a == 1 && state.k == 1 && state.l == 0)
            || (state.b == 1 && state.k == 0 && state.l == 1);
        Some(if hit { S::one() } else { S::zero() })
    }

    fn terms(&self, state: &CountConfig) -> StateTerms<S, CountConfig> {
        let n = state.n() as u64;
        let c = state.c as u64;
        let diagonal = S::from_u64(n * (n - 1))
            + self.params.theta_a().clone() * S::from_u64(state.a as u64 + c)
            + self.params.theta_b().clone() * S::from_u64(state.b as u64 + c)
            + self.params.rho().clone() * S::from_u64(c);
        let rho_zero = self.params.rho().is_zero();
        let mut same = Vec::new();
        let mut lower = Vec::new();
        for (coeff, target, same_degree) in count_terms(state) {
            let coeff = match coeff {
                CountTerm::Int(v) => S::from_u64(v),
                CountTerm::ThetaA(v) => self.params.theta_a().clone() * S::from_u64(v),
                CountTerm::ThetaB(v) => self.params.theta_b().clone() * S::from_u64(v),
                CountTerm::Rho(v) => {
                    if rho_zero {
                        continue;
                    }
                    self.params.rho().clone() * S::from_u64(v)
                }
            };
            if same_degree {
                same.push((coeff, target));
            } else {
                lower.push((coeff, target));
            }
        }
        StateTerms {
            diagonal,
            same_degree: same,
            lower_degree: lower,
        }
    }
}

/// Exact solver for the joint allele-count pmf at fixed parameters.
///
/// Same ascending-degree strategy as the configuration solver; the degree
/// systems here decompose into short chains because both degree-preserving
/// moves fix `a + c`, `b + c`, `k` and `l`.
pub struct CountSolver<S: Scalar> {
    params: Params<S>,
    memo: HashMap<CountConfig, S>,
    budget: usize,
}

impl<S: Scalar> CountSolver<S> {
    pub fn new(params: Params<S>) -> Self {
        Self::with_budget(params, DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(params: Params<S>, budget: usize) -> Self {
        Self {
            params,
            memo: HashMap::new(),
            budget,
        }
    }

    pub fn params(&self) -> &Params<S> {
        &self.params
    }

    pub fn states_solved(&self) -> usize {
        self.memo.len()
    }

    /// `P(K = k, L = l)` for the gamete totals in `query`.
    pub fn p(&mut self, query: CountConfig) -> Result<S> {
        if query.is_zero_by_convention() {
            return Ok(S::zero());
        }
        if let Some(v) = self.memo.get(&query) {
            return Ok(v.clone());
        }
        let system = CountSystem { params: &self.params };
        solve_reachable(&system, &mut self.memo, query, self.budget)?;
        Ok(self.memo[&query].clone())
    }
}

/// One-shot exact joint count probability.
pub fn exact_count_pmf<S: Scalar>(query: CountConfig, params: &Params<S>) -> Result<S> {
    CountSolver::new(params.clone()).p(query)
}

/// Zeroth-order term: independent loci, `p^A(a + c; k) p^B(b + c; l)`.
pub fn p0<S: Scalar>(query: CountConfig, params: &Params<S>) -> Result<S> {
    if query.is_zero_by_convention() {
        return Ok(S::zero());
    }
    Ok(marginal_count_pmf_a(query.a + query.c, query.k, params)?
        * marginal_count_pmf_b(query.b + query.c, query.l, params)?)
}

/// First-order term:
/// `binom(c,2) [p^A(a+c;k) - p^A(a+c-1;k)] [p^B(b+c;l) - p^B(b+c-1;l)]`.
/// Vanishes for `c <= 1`.
pub fn p1<S: Scalar>(query: CountConfig, params: &Params<S>) -> Result<S> {
    if query.c <= 1 || query.is_zero_by_convention() {
        return Ok(S::zero());
    }
    let (na, nb) = (query.a + query.c, query.b + query.c);
    let da = marginal_count_pmf_a(na, query.k, params)?
        - marginal_count_pmf_a(na - 1, query.k, params)?;
    let db = marginal_count_pmf_b(nb, query.l, params)?
        - marginal_count_pmf_b(nb - 1, query.l, params)?;
    Ok(S::from_u64(choose2(query.c)) * da * db)
}

/// Truncation order for the counting expansion; the closed forms stop at
/// `rho^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CountOrder {
    Zero,
    One,
}

impl CountOrder {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(CountOrder::Zero),
            1 => Ok(CountOrder::One),
            other => Err(Error::Parameter(format!(
                "count expansion order must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// The truncated counting expansion `p0 [+ p1/rho]`.
pub fn count_pmf_asymptotic<S: Scalar>(
    query: CountConfig,
    params: &Params<S>,
    order: CountOrder,
) -> Result<S> {
    let base = p0(query, params)?;
    match order {
        CountOrder::Zero => Ok(base),
        CountOrder::One => {
            if params.rho().is_zero() {
                return Err(Error::Parameter(
                    "count expansion order 1 needs rho > 0".into(),
                ));
            }
            Ok(base + p1(query, params)? / params.rho().clone())
        }
    }
}
