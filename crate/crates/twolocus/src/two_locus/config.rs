use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Largest number of allelic types per locus accepted by canonicalization.
pub const CANONICAL_DIM_LIMIT: usize = 8;

/// An extended two-locus sample configuration `(a, b, c)`.
///
/// `a[i]` counts gametes carrying allele `i` at locus A with the B locus
/// unspecified, `b[j]` the mirror image, and `c[i][j]` gametes fully typed
/// as `(i, j)`. Allele classes that are empty overall (no gamete in `a`/`b`
/// or `c` mentions them) are dropped at construction; labels are arbitrary,
/// so equality of *labeled* configurations is structural while probability
/// queries go through [`TwoLocusConfig::canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct TwoLocusConfig {
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawConfig {
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<Vec<usize>>,
}

impl TryFrom<RawConfig> for TwoLocusConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        TwoLocusConfig::new(raw.a, raw.b, raw.c)
    }
}

impl TwoLocusConfig {
    /// Build a configuration, dropping globally-empty allele classes.
    ///
    /// `c` must be an `a.len() x b.len()` matrix (it may be `[]` when
    /// `a` is empty). At least one gamete must remain.
    pub fn new(a: Vec<usize>, b: Vec<usize>, mut c: Vec<Vec<usize>>) -> Result<Self> {
        if c.is_empty() && !a.is_empty() {
            c = vec![vec![0; b.len()]; a.len()];
        }
        if c.len() != a.len() || c.iter().any(|row| row.len() != b.len()) {
            return Err(Error::InvalidConfig(format!(
                "c must be a {} x {} matrix",
                a.len(),
                b.len()
            )));
        }
        let keep_rows: Vec<usize> = (0..a.len())
            .filter(|&i| a[i] + c[i].iter().sum::<usize>() > 0)
            .collect();
        let keep_cols: Vec<usize> = (0..b.len())
            .filter(|&j| b[j] + c.iter().map(|row| row[j]).sum::<usize>() > 0)
            .collect();
        let a: Vec<usize> = keep_rows.iter().map(|&i| a[i]).collect();
        let b: Vec<usize> = keep_cols.iter().map(|&j| b[j]).collect();
        let c: Vec<Vec<usize>> = keep_rows
            .iter()
            .map(|&i| keep_cols.iter().map(|&j| c[i][j]).collect())
            .collect();
        let config = Self { a, b, c };
        if config.n() == 0 {
            return Err(Error::InvalidConfig("configuration has no gametes".into()));
        }
        Ok(config)
    }

    /// Gametes typed at locus A only, e.g. `(e_i, 0, 0)`.
    pub fn a_only(num_types: usize, allele: usize) -> Self {
        let mut a = vec![0; num_types];
        a[allele] = 1;
        Self::new(a, vec![], vec![]).expect("valid singleton")
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn c(&self) -> &[Vec<usize>] {
        &self.c
    }

    /// Number of allelic types at locus A (`K`).
    pub fn num_a_types(&self) -> usize {
        self.a.len()
    }

    /// Number of allelic types at locus B (`L`).
    pub fn num_b_types(&self) -> usize {
        self.b.len()
    }

    pub fn a_total(&self) -> usize {
        self.a.iter().sum()
    }

    pub fn b_total(&self) -> usize {
        self.b.iter().sum()
    }

    pub fn c_total(&self) -> usize {
        self.c.iter().flatten().sum()
    }

    /// Total sample size `n = a + b + c`.
    pub fn n(&self) -> usize {
        self.a_total() + self.b_total() + self.c_total()
    }

    /// The degree `a + b + 2c`, the quantity the recursion does not strictly
    /// decrease.
    pub fn degree(&self) -> usize {
        self.a_total() + self.b_total() + 2 * self.c_total()
    }

    /// Row sums `c_{i.}` of the fully-typed block.
    pub fn c_row_sums(&self) -> Vec<usize> {
        self.c.iter().map(|row| row.iter().sum()).collect()
    }

    /// Column sums `c_{.j}` of the fully-typed block.
    pub fn c_col_sums(&self) -> Vec<usize> {
        (0..self.b.len())
            .map(|j| self.c.iter().map(|row| row[j]).sum())
            .collect()
    }

    /// Marginal one-locus counts at A: `a + c_A`.
    pub fn a_marginal(&self) -> Vec<usize> {
        self.a
            .iter()
            .zip(self.c_row_sums())
            .map(|(&ai, ci)| ai + ci)
            .collect()
    }

    /// Marginal one-locus counts at B: `b + c_B`.
    pub fn b_marginal(&self) -> Vec<usize> {
        self.b
            .iter()
            .zip(self.c_col_sums())
            .map(|(&bj, cj)| bj + cj)
            .collect()
    }

    /// Swap the two loci: `(a, b, c) -> (b, a, c^T)`.
    pub fn swap_loci(&self) -> Self {
        let ct = (0..self.b.len())
            .map(|j| self.c.iter().map(|row| row[j]).collect())
            .collect();
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            c: ct,
        }
    }

    /// Apply a joint relabeling: `row_perm[i]`/`col_perm[j]` give the source
    /// index placed at position `i`/`j`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        Self {
            a: row_perm.iter().map(|&i| self.a[i]).collect(),
            b: col_perm.iter().map(|&j| self.b[j]).collect(),
            c: row_perm
                .iter()
                .map(|&i| col_perm.iter().map(|&j| self.c[i][j]).collect())
                .collect(),
        }
    }

    /// The canonical representative of this configuration's relabeling orbit:
    /// the lexicographically smallest `(a, b, c)` over all joint row and
    /// column permutations, together with one permutation achieving it.
    pub fn canonicalize(&self) -> Result<Canonical> {
        if self.a.len() > CANONICAL_DIM_LIMIT || self.b.len() > CANONICAL_DIM_LIMIT {
            return Err(Error::Capability(format!(
                "canonicalization limited to {CANONICAL_DIM_LIMIT} allele types per locus, \
                 got {} x {}",
                self.a.len(),
                self.b.len()
            )));
        }
        let row_perms = sorting_perms(&self.a);
        let col_perms = sorting_perms(&self.b);
        let mut best: Option<(Vec<Vec<usize>>, &[usize], &[usize])> = None;
        for rp in &row_perms {
            for cp in &col_perms {
                let candidate: Vec<Vec<usize>> = rp
                    .iter()
                    .map(|&i| cp.iter().map(|&j| self.c[i][j]).collect())
                    .collect();
                let better = match &best {
                    None => true,
                    Some((current, _, _)) => candidate < *current,
                };
                if better {
                    best = Some((candidate, rp, cp));
                }
            }
        }
        let (c, rp, cp) = best.expect("at least the identity permutation");
        let config = Self {
            a: rp.iter().map(|&i| self.a[i]).collect(),
            b: cp.iter().map(|&j| self.b[j]).collect(),
            c,
        };
        Ok(Canonical {
            config,
            row_perm: rp.to_vec(),
            col_perm: cp.to_vec(),
        })
    }

    /// Canonical form only, for memo keys and dedup.
    pub fn canonical(&self) -> Result<Self> {
        Ok(self.canonicalize()?.config)
    }

    /// One-line JSON text form `{"a": [...], "b": [...], "c": [[...]]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::InvalidConfig(format!(
                "bad configuration JSON at line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }
}

/// All index permutations that sort `values` ascending; ties explored in
/// every order. The product of tie-group factorials stays tiny for the
/// dimensions the limit admits.
fn sorting_perms(values: &[usize]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    // group indices with equal values
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if values[g[0]] == values[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut result = vec![Vec::new()];
    for group in groups {
        let perms = permutations(&group);
        let mut next = Vec::with_capacity(result.len() * perms.len());
        for prefix in &result {
            for p in &perms {
                let mut ext = prefix.clone();
                ext.extend_from_slice(p);
                next.push(ext);
            }
        }
        result = next;
    }
    result
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (pos, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// A canonical configuration plus the permutation that produced it.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub config: TwoLocusConfig,
    /// `row_perm[i]` is the original row index placed at canonical row `i`.
    pub row_perm: Vec<usize>,
    /// `col_perm[j]` is the original column index placed at canonical column `j`.
    pub col_perm: Vec<usize>,
}

/// The scaled rates: mutation `theta_A`, `theta_B` (per locus) and
/// recombination `rho` between the loci.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<S> {
    theta_a: S,
    theta_b: S,
    rho: S,
}

impl<S: Scalar> Params<S> {
    pub fn new(theta_a: S, theta_b: S, rho: S) -> Result<Self> {
        if !theta_a.is_positive() || !theta_a.is_finite() {
            return Err(Error::Parameter(format!("theta_a must be > 0, got {theta_a}")));
        }
        if !theta_b.is_positive() || !theta_b.is_finite() {
            return Err(Error::Parameter(format!("theta_b must be > 0, got {theta_b}")));
        }
        if rho.is_positive() && rho.is_finite() || rho.is_zero() {
            Ok(Self { theta_a, theta_b, rho })
        } else {
            Err(Error::Parameter(format!(
                "rho must be finite and >= 0, got {rho}"
            )))
        }
    }

    pub fn theta_a(&self) -> &S {
        &self.theta_a
    }

    pub fn theta_b(&self) -> &S {
        &self.theta_b
    }

    pub fn rho(&self) -> &S {
        &self.rho
    }

    /// The same mutation rates with loci swapped.
    pub fn swap_loci(&self) -> Self {
        Self {
            theta_a: self.theta_b.clone(),
            theta_b: self.theta_a.clone(),
            rho: self.rho.clone(),
        }
    }

    /// Same mutation rates, different recombination rate.
    pub fn with_rho(&self, rho: S) -> Result<Self> {
        Self::new(self.theta_a.clone(), self.theta_b.clone(), rho)
    }
}
