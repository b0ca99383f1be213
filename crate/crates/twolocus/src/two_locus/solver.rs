//! Exact evaluation of two-locus sampling probabilities.

use std::collections::HashMap;



use crate::error::Result;
use crate::numerics::Scalar;
use crate::two_locus::degree_system::{solve_reachable, RecursionSystem, StateTerms};
use crate::two_locus::recursion::{diagonal_coeff, raw_golding_terms, RawCoeff};
use crate::two_locus::{Params, TwoLocusConfig};

/// Default cap on the number of states a solver may track.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Exact solver for the two-locus recursion at fixed parameters.
///
/// Values are memoized per canonical configuration, so sweeps over many
/// configurations at the same parameters share every solved degree system.
/// Queries take `&mut self`; run one solver per worker (or serialize access)
/// for concurrent use.
pub struct ExactSolver<S: Scalar> {
    params: Params<S>,
    memo: HashMap<TwoLocusConfig, S>,
    budget: usize,
}

struct GoldingSystem<'p, S: Scalar> {
    params: &'p Params<S>,
}

impl<S: Scalar> RecursionSystem for GoldingSystem<'_, S> {
    type State = TwoLocusConfig;
    type Sc = S;

    fn degree(&self, state: &TwoLocusConfig) -> usize {
        state.degree()
    }

    fn known_value(&self, state: &TwoLocusConfig) -> Option<S> {
        // q(e_i, 0, 0) = q(0, e_j, 0) = 1
        (state.n() == 1 && state.c_total() == 0).then(S::one)
    }

    fn terms(&self, state: &TwoLocusConfig) -> StateTerms<S, TwoLocusConfig> {
        let raw = raw_golding_terms(state);
        let rho_zero = self.params.rho().is_zero();
        let canonical = |terms: Vec<(RawCoeff, TwoLocusConfig)>| -> Vec<(S, TwoLocusConfig)> {
            terms
                .into_iter()
                .filter(|(c, _)| !(rho_zero && matches!(c, RawCoeff::RhoTimes(_))))
                .map(|(c, target)| {
                    let canon = target.canonical().expect("targets within dim limit");
                    (c.materialize(self.params), canon)
                })
                .collect()
        };
        StateTerms {
            diagonal: diagonal_coeff(state, self.params),
            same_degree: canonical(raw.same_degree),
            lower_degree: canonical(raw.lower_degree),
        }
    }
}

impl<S: Scalar> ExactSolver<S> {
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

    /// Number of canonical states solved so far.
    pub fn states_solved(&self) -> usize {
        self.memo.len()
    }

    /// The sampling probability of `config`, solving whatever part of the
    /// reachable state space is not yet memoized.
    pub fn q(&mut self, config: &TwoLocusConfig) -> Result<S> {
        let canon = config.canonical()?;
        if let Some(value) = self.memo.get(&canon) {
            return Ok(value.clone());
        }
        let system = GoldingSystem { params: &self.params };
        solve_reachable(&system, &mut self.memo, canon.clone(), self.budget)?;
        Ok(self.memo[&canon].clone())
    }

    /// Iterate the memoized canonical states and their values.
    pub fn solved_states(&self) -> impl Iterator<Item = (&TwoLocusConfig, &S)> {
        self.memo.iter()
    }

    /// Residual of the recursion at a solved canonical state; exactly zero
    /// under the rational backend for every state the solver produced.
    pub fn residual_at(&self, state: &TwoLocusConfig) -> Result<S> {
        let system = GoldingSystem { params: &self.params };
        let terms = system.terms(state);
        let value = self
            .memo
            .get(state)
            .cloned()
            .ok_or_else(|| crate::Error::InvalidConfig("state not solved".into()))?;
        let mut rhs = S::zero();
        for (coeff, target) in terms.same_degree.iter().chain(&terms.lower_degree) {
            let v = self
                .memo
                .get(target)
                .cloned()
                .ok_or_else(|| crate::Error::InvalidConfig("target not solved".into()))?;
            rhs = rhs + coeff.clone() * v;
        }
        Ok(terms.diagonal * value - rhs)
    }
}

/// One-shot exact probability at `params`.
pub fn exact_q<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> Result<S> {
    ExactSolver::new(params.clone()).q(config)
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;
    use crate::numerics::BigRational;

    fn rat(n: i64, d: u64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    fn params(ta: (i64, u64), tb: (i64, u64), rho: (i64, u64)) -> Params<BigRational> {
        Params::new(rat(ta.0, ta.1), rat(tb.0, tb.1), rat(rho.0, rho.1)).unwrap()
    }

    fn tlc(a: &[usize], b: &[usize], c: &[&[usize]]) -> TwoLocusConfig {
        TwoLocusConfig::new(
            a.to_vec(),
            b.to_vec(),
            c.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn boundary_states_are_one() {
        let p = params((1, 2), (3, 1), (7, 2));
        let mut solver = ExactSolver::new(p);
        assert_eq!(solver.q(&TwoLocusConfig::a_only(1, 0)).unwrap(), rat(1, 1));
        let b_only = TwoLocusConfig::new(vec![], vec![1], vec![]).unwrap();
        assert_eq!(solver.q(&b_only).unwrap(), rat(1, 1));
    }

    #[test]
    fn degree_two_states_are_one() {
        // Hand-solved 2x2 system: both (0,0,[[1]]) and ((1),(1),0) give 1.
        for p in [
            params((1, 1), (1, 1), (5, 1)),
            params((1, 2), (3, 1), (0, 1)),
            params((2, 1), (1, 3), (10_000_000, 1)),
        ] {
            let mut solver = ExactSolver::new(p);
            assert_eq!(solver.q(&tlc(&[0], &[0], &[&[1]])).unwrap(), rat(1, 1));
            assert_eq!(solver.q(&tlc(&[1], &[1], &[&[0]])).unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn memo_is_shared_across_queries() {
        let mut solver = ExactSolver::new(params((1, 1), (1, 1), (1, 1)));
        solver.q(&tlc(&[0], &[0], &[&[2]])).unwrap();
        let solved = solver.states_solved();
        assert!(solved > 1);
        // a config inside the already-solved closure costs nothing new
        solver.q(&tlc(&[1], &[1], &[&[1]])).unwrap();
        assert_eq!(solver.states_solved(), solved);
    }

    #[test]
    fn probabilities_in_unit_interval() {
        let mut solver = ExactSolver::new(params((1, 2), (2, 1), (3, 1)));
        for cfg in [
            tlc(&[0], &[0], &[&[3]]),
            tlc(&[2, 1], &[1], &[&[1], &[0]]),
            tlc(&[1, 1], &[2], &[&[0], &[1]]),
        ] {
            let q = solver.q(&cfg).unwrap();
            assert!(q.is_positive() && q <= rat(1, 1), "q({cfg:?}) = {q}");
        }
    }

    #[test]
    fn recursion_residual_zero_over_closure() {
        let mut solver = ExactSolver::new(params((1, 2), (2, 1), (3, 1)));
        solver.q(&tlc(&[1], &[1], &[&[2]])).unwrap();
        let states: Vec<TwoLocusConfig> = solver
            .solved_states()
            .filter(|(s, _)| !(s.n() == 1 && s.c_total() == 0))
            .map(|(s, _)| s.clone())
            .collect();
        assert!(!states.is_empty());
        for state in states {
            assert_eq!(solver.residual_at(&state).unwrap(), BigRational::zero());
        }
    }

    #[test]
    fn budget_violation_reports_capability() {
        let mut solver = ExactSolver::with_budget(params((1, 1), (1, 1), (1, 1)), 10);
        let err = solver.q(&tlc(&[0], &[0], &[&[4]])).unwrap_err();
        assert!(matches!(err, crate::Error::Capability(_)), "{err}");
        assert!(err.to_string().contains("states"), "{err}");
    }

    #[test]
    fn rho_zero_still_solves() {
        let mut solver = ExactSolver::new(params((1, 1), (1, 1), (0, 1)));
        let q = solver.q(&tlc(&[0], &[0], &[&[2]])).unwrap();
        // fully linked identical pair: coalesce before either locus mutates,
        // q = 1/(1 + theta_A + theta_B)
        assert_eq!(q, rat(1, 3));
        let states: Vec<TwoLocusConfig> = solver
            .solved_states()
            .filter(|(s, _)| !(s.n() == 1 && s.c_total() == 0))
            .map(|(s, _)| s.clone())
            .collect();
        for state in states {
            assert_eq!(solver.residual_at(&state).unwrap(), BigRational::zero());
        }
    }

    #[test]
    fn float_backend_matches_rational() {
        let pr = params((1, 2), (2, 1), (5, 1));
        let pf = Params::new(0.5f64, 2.0, 5.0).unwrap();
        let mut sr = ExactSolver::new(pr);
        let mut sf = ExactSolver::new(pf);
        for cfg in [tlc(&[0], &[0], &[&[3]]), tlc(&[1, 1], &[1], &[&[1], &[2]])] {
            let exact = Scalar::to_f64(&sr.q(&cfg).unwrap());
            let float = sf.q(&cfg).unwrap();
            assert!((exact - float).abs() <= 1e-12 * exact.abs());
        }
    }
}
