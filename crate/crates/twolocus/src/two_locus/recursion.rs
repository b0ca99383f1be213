//! Right-hand-side terms of the two-locus stationary recursion.
//!
//! Terms with any negative entry in the target are defined to be zero and
//! are never emitted; targets whose empty-class trim removes the last gamete
//! (only reachable from the boundary singletons) are dropped likewise.



use crate::numerics::Scalar;
use crate::two_locus::{Params, TwoLocusConfig};

/// One term `coeff * q(target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTerm<S> {
    pub coeff: S,
    pub target: TwoLocusConfig,
}

/// All nonzero right-hand-side terms for one configuration, split by degree.
///
/// `same_degree` holds exactly the gamete-joining terms `2 a_i b_j` and the
/// recombination terms `rho c_ij`; these preserve the degree `a + b + 2c`
/// and force the per-degree linear systems. Everything else strictly lowers
/// the degree. `diagonal` is the left-hand-side coefficient
/// `n(n-1) + theta_A (a+c) + theta_B (b+c) + rho c`.
#[derive(Debug, Clone)]
pub struct GoldingTerms<S> {
    pub diagonal: S,
    pub same_degree: Vec<NeighborTerm<S>>,
    pub lower_degree: Vec<NeighborTerm<S>>,
}

/// Coefficient shapes, kept symbolic so the state-space walk does not need
/// parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawCoeff {
    Int(u64),
    ThetaA,
    ThetaB,
    /// `rho` times the integer multiplier.
    RhoTimes(u64),
}

impl RawCoeff {
    pub(crate) fn materialize<S: Scalar>(self, params: &Params<S>) -> S {
        match self {
            RawCoeff::Int(v) => S::from_u64(v),
            RawCoeff::ThetaA => params.theta_a().clone(),
            RawCoeff::ThetaB => params.theta_b().clone(),
            RawCoeff::RhoTimes(v) => params.rho().clone() * S::from_u64(v),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawTerms {
    pub same_degree: Vec<(RawCoeff, TwoLocusConfig)>,
    pub lower_degree: Vec<(RawCoeff, TwoLocusConfig)>,
}

fn push_target(
    out: &mut Vec<(RawCoeff, TwoLocusConfig)>,
    coeff: RawCoeff,
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<Vec<usize>>,
) {
    // The trim inside `new` drops emptied classes; a target with no gametes
    // left (mutation out of a boundary singleton) contributes nothing.
    if let Ok(target) = TwoLocusConfig::new(a, b, c) {
        out.push((coeff, target));
    }
}

pub(crate) fn raw_golding_terms(config: &TwoLocusConfig) -> RawTerms {
    let (a, b, c) = (config.a(), config.b(), config.c());
    let (num_a, num_b) = (a.len(), b.len());
    let row_sums = config.c_row_sums();
    let col_sums = config.c_col_sums();
    let mut same = Vec::new();
    let mut lower = Vec::new();

    for i in 0..num_a {
        // coalescence of two a-gametes (or an a-gamete into a typed one)
        let coeff = a[i] as u64 * (a[i] as u64 + 2 * row_sums[i] as u64).saturating_sub(1);
        if a[i] >= 1 && coeff > 0 {
            let mut na = a.to_vec();
            na[i] -= 1;
            push_target(&mut lower, RawCoeff::Int(coeff), na, b.to_vec(), c.to_vec());
        }
        // mutation at A of the last gamete carrying allele i, untyped at B
        if a[i] == 1 && row_sums[i] == 0 {
            let mut na = a.to_vec();
            na[i] -= 1;
            push_target(&mut lower, RawCoeff::ThetaA, na, b.to_vec(), c.to_vec());
        }
    }

    for j in 0..num_b {
        let coeff = b[j] as u64 * (b[j] as u64 + 2 * col_sums[j] as u64).saturating_sub(1);
        if b[j] >= 1 && coeff > 0 {
            let mut nb = b.to_vec();
            nb[j] -= 1;
            push_target(&mut lower, RawCoeff::Int(coeff), a.to_vec(), nb, c.to_vec());
        }
        if b[j] == 1 && col_sums[j] == 0 {
            let mut nb = b.to_vec();
            nb[j] -= 1;
            push_target(&mut lower, RawCoeff::ThetaB, a.to_vec(), nb, c.to_vec());
        }
    }

    for i in 0..num_a {
        for j in 0..num_b {
            let cij = c[i][j];
            // coalescence of two fully-typed gametes
            if cij >= 2 {
                let mut nc = c.to_vec();
                nc[i][j] -= 1;
                push_target(
                    &mut lower,
                    RawCoeff::Int((cij * (cij - 1)) as u64),
                    a.to_vec(),
                    b.to_vec(),
                    nc,
                );
            }
            // an a-gamete and a b-gamete join into a typed gamete
            if a[i] >= 1 && b[j] >= 1 {
                let mut na = a.to_vec();
                let mut nb = b.to_vec();
                let mut nc = c.to_vec();
                na[i] -= 1;
                nb[j] -= 1;
                nc[i][j] += 1;
                push_target(&mut same, RawCoeff::Int(2 * (a[i] * b[j]) as u64), na, nb, nc);
            }
            if cij == 1 {
                // mutation at A of the last carrier of allele i
                if a[i] + row_sums[i] == 1 {
                    let mut nb = b.to_vec();
                    let mut nc = c.to_vec();
                    nb[j] += 1;
                    nc[i][j] -= 1;
                    push_target(&mut lower, RawCoeff::ThetaA, a.to_vec(), nb, nc);
                }
                // mutation at B of the last carrier of allele j
                if b[j] + col_sums[j] == 1 {
                    let mut na = a.to_vec();
                    let mut nc = c.to_vec();
                    na[i] += 1;
                    nc[i][j] -= 1;
                    push_target(&mut lower, RawCoeff::ThetaB, na, b.to_vec(), nc);
                }
            }
            // recombination splits a typed gamete
            if cij >= 1 {
                let mut na = a.to_vec();
                let mut nb = b.to_vec();
                let mut nc = c.to_vec();
                na[i] += 1;
                nb[j] += 1;
                nc[i][j] -= 1;
                push_target(&mut same, RawCoeff::RhoTimes(cij as u64), na, nb, nc);
            }
        }
    }

    RawTerms {
        same_degree: same,
        lower_degree: lower,
    }
}

/// Left-hand-side coefficient of the recursion for `config`.
pub(crate) fn diagonal_coeff<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> S {
    let n = config.n() as u64;
    let c = config.c_total() as u64;
    let a_side = (config.a_total() as u64 + c) as u64;
    let b_side = (config.b_total() as u64 + c) as u64;
    S::from_u64(n * (n - 1))
        + params.theta_a().clone() * S::from_u64(a_side)
        + params.theta_b().clone() * S::from_u64(b_side)
        + params.rho().clone() * S::from_u64(c)
}

/// Every nonzero right-hand-side term of the recursion for `config`, with
/// coefficients evaluated at `params`, split into same-degree and
/// lower-degree groups. Recombination terms are omitted when `rho = 0`.
pub fn golding_neighbors<S: Scalar>(
    config: &TwoLocusConfig,
    params: &Params<S>,
) -> GoldingTerms<S> {
    let raw = raw_golding_terms(config);
    let rho_zero = params.rho().is_zero();
    let materialize = |terms: Vec<(RawCoeff, TwoLocusConfig)>| {
        terms
            .into_iter()
            .filter(|(c, _)| !(rho_zero && matches!(c, RawCoeff::RhoTimes(_))))
            .map(|(c, target)| NeighborTerm {
                coeff: c.materialize(params),
                target,
            })
            .collect()
    };
    GoldingTerms {
        diagonal: diagonal_coeff(config, params),
        same_degree: materialize(raw.same_degree),
        lower_degree: materialize(raw.lower_degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{BigRational, Scalar};

    fn rat(n: i64, d: u64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    fn params() -> Params<BigRational> {
        Params::new(rat(1, 1), rat(2, 1), rat(5, 1)).unwrap()
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
    fn boundary_has_no_terms() {
        let terms = golding_neighbors(&TwoLocusConfig::a_only(1, 0), &params());
        assert!(terms.same_degree.is_empty());
        assert!(terms.lower_degree.is_empty());
        assert_eq!(terms.diagonal, rat(1, 1)); // theta_A * (a + c) = 1
    }

    #[test]
    fn single_typed_gamete_terms() {
        // (0, 0, [[1]]): theta_A -> (0, e_1, 0); theta_B -> (e_1, 0, 0);
        // rho -> ((1), (1), 0)
        let cfg = tlc(&[0], &[0], &[&[1]]);
        let terms = golding_neighbors(&cfg, &params());
        assert_eq!(terms.lower_degree.len(), 2);
        let b_only = TwoLocusConfig::new(vec![], vec![1], vec![]).unwrap();
        let a_only = TwoLocusConfig::a_only(1, 0);
        assert!(terms
            .lower_degree
            .iter()
            .any(|t| t.coeff == rat(1, 1) && t.target == b_only));
        assert!(terms
            .lower_degree
            .iter()
            .any(|t| t.coeff == rat(2, 1) && t.target == a_only));
        assert_eq!(terms.same_degree.len(), 1);
        let split = tlc(&[1], &[1], &[&[0]]);
        assert_eq!(terms.same_degree[0].coeff, rat(5, 1));
        assert_eq!(terms.same_degree[0].target, split);
        // diagonal: 0 + theta_A + theta_B + rho
        assert_eq!(terms.diagonal, rat(8, 1));
    }

    #[test]
    fn one_a_one_b_terms() {
        // ((1), (1), 0): join 2 -> (0,0,[[1]]); theta_A -> (0,(1),0);
        // theta_B -> ((1),0,0)
        let cfg = tlc(&[1], &[1], &[&[0]]);
        let terms = golding_neighbors(&cfg, &params());
        assert_eq!(terms.same_degree.len(), 1);
        assert_eq!(terms.same_degree[0].coeff, rat(2, 1));
        assert_eq!(terms.same_degree[0].target, tlc(&[0], &[0], &[&[1]]));
        assert_eq!(terms.lower_degree.len(), 2);
        // diagonal: 2*1 + theta_A + theta_B
        assert_eq!(terms.diagonal, rat(5, 1));
    }

    #[test]
    fn rho_zero_drops_recombination_terms() {
        let cfg = tlc(&[0], &[0], &[&[2]]);
        let p = Params::new(rat(1, 1), rat(1, 1), rat(0, 1)).unwrap();
        let terms = golding_neighbors(&cfg, &p);
        assert!(terms.same_degree.is_empty());
        // only the coalescence c(c-1) term survives
        assert_eq!(terms.lower_degree.len(), 1);
        assert_eq!(terms.lower_degree[0].coeff, rat(2, 1));
    }

    #[test]
    fn same_degree_terms_preserve_degree() {
        let cfg = tlc(&[2, 1], &[1], &[&[1], &[0]]);
        let terms = golding_neighbors(&cfg, &params());
        for t in &terms.same_degree {
            assert_eq!(t.target.degree(), cfg.degree());
        }
        for t in &terms.lower_degree {
            assert!(t.target.degree() < cfg.degree());
        }
    }
}
