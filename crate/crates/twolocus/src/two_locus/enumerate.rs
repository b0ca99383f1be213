//! Deterministic enumeration of inequivalent configurations, the driver for
//! lookup tables and verification sweeps.

use std::collections::BTreeSet;

use crate::two_locus::TwoLocusConfig;

/// Bounds for [`enumerate_canonical_configs`].
#[derive(Debug, Clone)]
pub struct EnumerationConstraints {
    /// Most allelic types at locus A.
    pub k_max: usize,
    /// Most allelic types at locus B.
    pub l_max: usize,
    /// Cap on the number of fully-typed gametes; `None` means `n_max`.
    pub c_max: Option<usize>,
}

impl Default for EnumerationConstraints {
    fn default() -> Self {
        Self {
            k_max: 2,
            l_max: 2,
            c_max: None,
        }
    }
}

/// Every inequivalent configuration with `1 <= n <= n_max` within the
/// constraints, each exactly once, in a deterministic order.
pub fn enumerate_canonical_configs(
    n_max: usize,
    constraints: &EnumerationConstraints,
) -> Vec<TwoLocusConfig> {
    let c_cap = constraints.c_max.unwrap_or(n_max);
    let mut seen: BTreeSet<TwoLocusConfig> = BTreeSet::new();
    for n in 1..=n_max {
        for c_total in 0..=n.min(c_cap) {
            let ab_total = n - c_total;
            for a_total in 0..=ab_total {
                let b_total = ab_total - a_total;
                let k_range = dims_for(a_total, c_total, constraints.k_max);
                for num_a in k_range.clone() {
                    for num_b in dims_for(b_total, c_total, constraints.l_max) {
                        collect(
                            a_total, b_total, c_total, num_a, num_b, &mut seen,
                        );
                    }
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Feasible numbers of allele classes at a locus: zero only when the locus
/// is entirely unobserved.
fn dims_for(side_total: usize, c_total: usize, dim_max: usize) -> std::ops::RangeInclusive<usize> {
    if side_total + c_total == 0 {
        0..=0
    } else {
        1..=dim_max
    }
}

fn collect(
    a_total: usize,
    b_total: usize,
    c_total: usize,
    num_a: usize,
    num_b: usize,
    seen: &mut BTreeSet<TwoLocusConfig>,
) {
    for a in compositions(a_total, num_a) {
        for b in compositions(b_total, num_b) {
            for c_flat in compositions(c_total, num_a * num_b) {
                let c: Vec<Vec<usize>> = c_flat
                    .chunks(num_b.max(1))
                    .take(num_a)
                    .map(|row| row.to_vec())
                    .collect();
                let Ok(config) = TwoLocusConfig::new(a.clone(), b.clone(), c) else {
                    continue;
                };
                // trimming must not have removed a class, else this labeled
                // shape is a duplicate of a smaller one
                if config.num_a_types() != num_a || config.num_b_types() != num_b {
                    continue;
                }
                if let Ok(canon) = config.canonical() {
                    seen.insert(canon);
                }
            }
        }
    }
}

/// Nonnegative integer vectors of length `parts` summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; parts];
    fn rec(total: usize, idx: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if idx == current.len() - 1 {
            current[idx] = total;
            out.push(current.clone());
            return;
        }
        for v in 0..=total {
            current[idx] = v;
            rec(total - v, idx + 1, current, out);
        }
    }
    rec(total, 0, &mut current, &mut out);
    out
}
