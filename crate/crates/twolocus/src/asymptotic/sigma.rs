//! The closed-form remainder of the second-order coefficient.
//!
//! The remainder is the expected value of the second-order source term over
//! multivariate-hypergeometric subsamples of the typed gametes, summed over
//! subsample sizes `m = 1..c`. The source term for one subsample is the
//! right-hand side of the degree-preserving second-order recursion — every
//! entry a first-order coefficient, so everything reduces to `q1` closed
//! forms — scaled by `1/m`. The expectation is evaluated exactly by
//! enumerating submatrices, the same device as the `q1` subsampling oracle;
//! cost grows with the product of `(c_ij + 1)`, negligible at the sample
//! sizes the solvers target.
//!
//! The value is assembled per recursion term family and exposed as a
//! breakdown, so a verification sweep that disagrees can localize the term
//! family responsible instead of pointing at one opaque sum.



use crate::numerics::{binomial, BigInt, Scalar};
use crate::two_locus::{Params, TwoLocusConfig};



/// Stable names for the term families of the second-order source term.
pub const SIGMA_TERM_LABELS: [&str; 6] = [
    "a_coalescence",
    "b_coalescence",
    "c_coalescence",
    "gamete_join",
    "mutation",
    "order1_diagonal",
];

/// Per-family values of the remainder; their sum is `sigma`.
#[derive(Debug, Clone)]
pub struct SigmaBreakdown<S> {
    pub terms: Vec<S>,
}

impl<S: Scalar> SigmaBreakdown<S> {
    pub fn total(&self) -> S {
        self.terms
            .iter()
            .cloned()
            .fold(S::zero(), |acc, t| acc + t)
    }

    /// Total with one family scaled, the sensitivity hook used to check
    /// that verification localizes an injected error.
    pub fn total_with_scaled(&self, index: usize, scale: S) -> S {
        let mut acc = S::zero();
        for (i, t) in self.terms.iter().enumerate() {
            let t = t.clone();
            acc = acc + if i == index { t * scale.clone() } else { t };
        }
        acc
    }

    pub fn labeled(&self) -> impl Iterator<Item = (&'static str, &S)> {
        SIGMA_TERM_LABELS.iter().copied().zip(self.terms.iter())
    }
}

/// Deletion-indexed marginal probabilities of the original configuration.
///
/// Every first-order coefficient inside the source term only needs
/// `q^A(a + c_A - e_i [- e_k])` and the B mirror, because the subsample
/// marginals are invariant; precomputing them once per configuration keeps
/// the enumeration cheap.
struct MarginalTable<S> {
    qa: Vec<Vec<S>>,
    qb: Vec<Vec<S>>,
}

impl<S: Scalar> MarginalTable<S> {
    fn new(config: &TwoLocusConfig, params: &Params<S>) -> Self {
        let m = super::Marginals::new(config, params);
        let (num_a, num_b) = (config.num_a_types(), config.num_b_types());
        // qa[i][k]: delete classes i and k; index num_a means "no deletion"
        let mut qa = vec![vec![S::zero(); num_a + 1]; num_a + 1];
        let mut qb = vec![vec![S::zero(); num_b + 1]; num_b + 1];
        for i in 0..=num_a {
            for k in 0..=num_a {
                qa[i][k] = match (i == num_a, k == num_a) {
                    (true, true) => m.qa(),
                    (false, true) => m.qa_del(i),
                    (true, false) => m.qa_del(k),
                    (false, false) => m.qa_del2(i, k),
                };
            }
        }
        for j in 0..=num_b {
            for l in 0..=num_b {
                qb[j][l] = match (j == num_b, l == num_b) {
                    (true, true) => m.qb(),
                    (false, true) => m.qb_del(j),
                    (true, false) => m.qb_del(l),
                    (false, false) => m.qb_del2(j, l),
                };
            }
        }
        Self { qa, qb }
    }

    fn qa(&self, d1: Option<usize>, d2: Option<usize>) -> &S {
        let none = self.qa.len() - 1;
        &self.qa[d1.unwrap_or(none)][d2.unwrap_or(none)]
    }

    fn qb(&self, d1: Option<usize>, d2: Option<usize>) -> &S {
        let none = self.qb.len() - 1;
        &self.qb[d1.unwrap_or(none)][d2.unwrap_or(none)]
    }
}

fn ch2u(x: usize) -> u64 {
    (x as u64) * (x as u64).saturating_sub(1) / 2
}

/// `q1` of a configuration whose A/B marginals are the original marginals
/// with at most one class deleted on each side (`da`, `db`) and whose typed
/// block is `cells`.
fn q1_sub<S: Scalar>(
    cells: &[Vec<usize>],
    da: Option<usize>,
    db: Option<usize>,
    table: &MarginalTable<S>,
) -> S {
    let num_a = cells.len();
    let num_b = if num_a == 0 { 0 } else { cells[0].len() };
    let rows: Vec<usize> = cells.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..num_b)
        .map(|j| cells.iter().map(|r| r[j]).sum())
        .collect();
    let c_tot: usize = rows.iter().sum();
    if c_tot < 2 {
        return S::zero();
    }
    let mut total = S::from_u64(ch2u(c_tot)) * table.qa(da, None).clone() * table.qb(db, None).clone();
    for (i, &ri) in rows.iter().enumerate() {
        if ri >= 2 {
            total = total
                - S::from_u64(ch2u(ri)) * table.qa(da, Some(i)).clone() * table.qb(db, None).clone();
        }
    }
    for (j, &cj) in cols.iter().enumerate() {
        if cj >= 2 {
            total = total
                - S::from_u64(ch2u(cj)) * table.qa(da, None).clone() * table.qb(db, Some(j)).clone();
        }
    }
    for (i, row) in cells.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij >= 2 {
                total = total
                    + S::from_u64(ch2u(cij))
                        * table.qa(da, Some(i)).clone()
                        * table.qb(db, Some(j)).clone();
            }
        }
    }
    total
}

/// The six term-family values of the source term at one subsample
/// `(a, b, c)`, all expressed through first-order coefficients.
fn source_term_groups<S: Scalar>(
    a: &[usize],
    b: &[usize],
    c: &[Vec<usize>],
    params: &Params<S>,
    table: &MarginalTable<S>,
) -> [S; 6] {
    let (num_a, num_b) = (a.len(), b.len());
    let rows: Vec<usize> = c.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..num_b).map(|j| c.iter().map(|r| r[j]).sum()).collect();
    let a_tot: usize = a.iter().sum();
    let b_tot: usize = b.iter().sum();
    let c_tot: usize = rows.iter().sum();
    let n = a_tot + b_tot + c_tot;

    let mut groups = std::array::from_fn::<S, 6, _>(|_| S::zero());

    for i in 0..num_a {
        let coeff = a[i] * (a[i] + 2 * rows[i]).saturating_sub(1);
        if a[i] >= 1 && coeff > 0 {
            groups[0] = groups[0].clone()
                + S::from_u64(coeff as u64) * q1_sub(c, Some(i), None, table);
        }
    }
    for j in 0..num_b {
        let coeff = b[j] * (b[j] + 2 * cols[j]).saturating_sub(1);
        if b[j] >= 1 && coeff > 0 {
            groups[1] = groups[1].clone()
                + S::from_u64(coeff as u64) * q1_sub(c, None, Some(j), table);
        }
    }
    for i in 0..num_a {
        for j in 0..num_b {
            let cij = c[i][j];
            if cij >= 2 {
                let mut nc = c.to_vec();
                nc[i][j] -= 1;
                groups[2] = groups[2].clone()
                    + S::from_u64((cij * (cij - 1)) as u64)
                        * q1_sub(&nc, Some(i), Some(j), table);
            }
            if a[i] >= 1 && b[j] >= 1 {
                let mut nc = c.to_vec();
                nc[i][j] += 1;
                groups[3] = groups[3].clone()
                    + S::from_u64(2 * (a[i] * b[j]) as u64) * q1_sub(&nc, None, None, table);
            }
            if cij == 1 {
                if a[i] + rows[i] == 1 {
                    let mut nc = c.to_vec();
                    nc[i][j] -= 1;
                    groups[4] = groups[4].clone()
                        + params.theta_a().clone() * q1_sub(&nc, Some(i), None, table);
                }
                if b[j] + cols[j] == 1 {
                    let mut nc = c.to_vec();
                    nc[i][j] -= 1;
                    groups[4] = groups[4].clone()
                        + params.theta_b().clone() * q1_sub(&nc, None, Some(j), table);
                }
            }
        }
    }
    for i in 0..num_a {
        if a[i] == 1 && rows[i] == 0 {
            groups[4] = groups[4].clone()
                + params.theta_a().clone() * q1_sub(c, Some(i), None, table);
        }
    }
    for j in 0..num_b {
        if b[j] == 1 && cols[j] == 0 {
            groups[4] = groups[4].clone()
                + params.theta_b().clone() * q1_sub(c, None, Some(j), table);
        }
    }
    // -[n(n-1) + theta_A(a+c) + theta_B(b+c)] q1(a, b, c)
    let weight = S::from_u64((n * (n - 1)) as u64)
        + params.theta_a().clone() * S::from_u64((a_tot + c_tot) as u64)
        + params.theta_b().clone() * S::from_u64((b_tot + c_tot) as u64);
    groups[5] = -(weight * q1_sub(c, None, None, table));
    groups
}

/// Evaluate the term families at `config`, `params`: for each subsample of
/// the typed gametes, the source-term families scaled by the subsample
/// probability and `1/m`, accumulated per family.
pub fn sigma_terms<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> SigmaBreakdown<S> {
    let mut terms = vec![S::zero(); SIGMA_TERM_LABELS.len()];
    let c_total = config.c_total();
    if c_total == 0 {
        return SigmaBreakdown { terms };
    }
    let (num_a, num_b) = (config.num_a_types(), config.num_b_types());
    let cells: Vec<(usize, usize, usize)> = config
        .c()
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .collect();
    let a_marginal = config.a_marginal();
    let b_marginal = config.b_marginal();
    let table = MarginalTable::new(config, params);

    // odometer over submatrices c' <= c
    let mut sub = vec![0usize; cells.len()];
    loop {
        let drawn: usize = sub.iter().sum();
        if drawn >= 1 {
            let mut ways = BigInt::from(1u8);
            for (slot, &(_, _, cap)) in sub.iter().zip(&cells) {
                ways *= binomial(cap, *slot);
            }
            let weight = S::from_bigint(&ways) / S::from_bigint(&binomial(c_total, drawn))
                / S::from_u64(drawn as u64);

            // the subsample configuration: a + c_A - c'_A, b + c_B - c'_B, c'
            let mut sc = vec![vec![0usize; num_b]; num_a];
            let mut sa = a_marginal.clone();
            let mut sb = b_marginal.clone();
            for (slot, &(i, j, _)) in sub.iter().zip(&cells) {
                sc[i][j] = *slot;
                sa[i] -= slot;
                sb[j] -= slot;
            }
            let groups = source_term_groups(&sa, &sb, &sc, params, &table);
            for (term, group) in terms.iter_mut().zip(groups) {
                *term = term.clone() + weight.clone() * group;
            }
        }
        let mut pos = 0;
        loop {
            if pos == cells.len() {
                return SigmaBreakdown { terms };
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

/// The full remainder: the sum over all term families. Zero when `c = 0`.
pub fn sigma<S: Scalar>(config: &TwoLocusConfig, params: &Params<S>) -> S {
    sigma_terms(config, params).total()
}
