use num_traits::Zero;

use super::*;
use crate::numerics::BigRational;
use crate::two_locus::{enumerate_canonical_configs, EnumerationConstraints};

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

fn small_configs(n_max: usize, c_max: usize) -> Vec<TwoLocusConfig> {
    enumerate_canonical_configs(
        n_max,
        &EnumerationConstraints {
            k_max: 2,
            l_max: 2,
            c_max: Some(c_max),
        },
    )
}

#[test]
fn q0_examples() {
    let p = params((1, 1), (1, 1), (1, 1));
    assert_eq!(q0(&TwoLocusConfig::a_only(1, 0), &p), rat(1, 1));
    // (0, 0, [[2]]) at theta = 1: q^A((2)) q^B((2)) = (1/2)(1/2)
    assert_eq!(q0(&tlc(&[0], &[0], &[&[2]]), &p), rat(1, 4));
}

#[test]
fn q0_depends_only_on_marginals() {
    let p = params((1, 2), (3, 1), (1, 1));
    for cfg in small_configs(5, 5) {
        let unwrapped = TwoLocusConfig::new(
            cfg.a_marginal(),
            cfg.b_marginal(),
            vec![vec![0; cfg.num_b_types()]; cfg.num_a_types()],
        );
        let Ok(unwrapped) = unwrapped else {
            continue;
        };
        assert_eq!(q0(&cfg, &p), q0(&unwrapped, &p), "{cfg:?}");
    }
}

#[test]
fn q1_vanishes_without_typed_gametes_and_at_single_cells() {
    let p = params((1, 2), (2, 1), (1, 1));
    assert_eq!(q1(&tlc(&[2, 1], &[3], &[&[0], &[0]]), &p), BigRational::zero());
    assert_eq!(q1(&tlc(&[1], &[1], &[&[1]]), &p), BigRational::zero());
    assert_eq!(q1(&tlc(&[2], &[2], &[&[1]]), &p), BigRational::zero());
    // unwrap identity at one typed gamete: q1(a - e_i, b - e_j, e_ij) = 0
    for cfg in small_configs(5, 1) {
        assert_eq!(q1(&cfg, &p), BigRational::zero(), "{cfg:?}");
    }
}

#[test]
fn q1_hand_value() {
    // (0, 0, [[2]]) at theta_A = theta_B = 1:
    // (q^A((2)) - 1)(q^B((2)) - 1) = (1/2 - 1)^2 = 1/4
    let p = params((1, 1), (1, 1), (1, 1));
    assert_eq!(q1(&tlc(&[0], &[0], &[&[2]]), &p), rat(1, 4));
}

#[test]
fn q1_matches_subsampling_oracle_exhaustively() {
    let p = params((1, 2), (2, 1), (1, 1));
    let mut checked = 0;
    for cfg in small_configs(5, 3) {
        assert_eq!(
            q1(&cfg, &p),
            q1_subsampling_oracle(&cfg, &p).unwrap(),
            "{cfg:?}"
        );
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn q1_matches_moment_route() {
    let p = params((1, 1), (1, 3), (1, 1));
    for cfg in small_configs(5, 4) {
        assert_eq!(q1(&cfg, &p), q1_moment_route(&cfg, &p), "{cfg:?}");
    }
}

#[test]
fn subsampling_oracle_budget() {
    let p = params((1, 1), (1, 1), (1, 1));
    let big = tlc(&[0], &[0], &[&[SUBSAMPLING_BUDGET + 1]]);
    assert!(matches!(
        q1_subsampling_oracle(&big, &p),
        Err(Error::Capability(_))
    ));
}

#[test]
fn q2_ab0_boundaries_and_one_sided_samples() {
    let mut cache = Q2Cache::new(params((1, 2), (3, 1), (1, 1)));
    assert_eq!(cache.q2_ab0(&[1], &[]), BigRational::zero());
    assert_eq!(cache.q2_ab0(&[], &[1]), BigRational::zero());
    assert_eq!(cache.q2_ab0(&[3, 2], &[]), BigRational::zero());
    assert_eq!(cache.q2_ab0(&[], &[2, 2, 1]), BigRational::zero());
}

#[test]
fn q2_ab0_hand_values() {
    // theta_A = theta_B = 1; worked through the strict recursion by hand.
    let mut cache = Q2Cache::new(params((1, 1), (1, 1), (1, 1)));
    assert_eq!(cache.q2_ab0(&[1], &[1]), BigRational::zero());
    assert_eq!(cache.q2_ab0(&[1], &[2]), BigRational::zero());
    // q2((2),(2)): denom 8, source 4 * (2)(2) * (1/2)(1/2) = 4
    assert_eq!(cache.q2_ab0(&[2], &[2]), rat(1, 2));
    // q2((1,1),(2)): source 4 * (-2)(2) * (1/2)(1/2) = -4
    assert_eq!(cache.q2_ab0(&[1, 1], &[2]), rat(-1, 2));
    // key order is canonical: permuting inputs changes nothing
    assert_eq!(cache.q2_ab0(&[2, 0], &[0, 2]), rat(1, 2));
}

#[test]
fn sigma_zero_without_typed_gametes() {
    let p = params((1, 2), (2, 1), (1, 1));
    assert_eq!(sigma(&tlc(&[2, 1], &[1], &[&[0], &[0]]), &p), BigRational::zero());
}

#[test]
fn sigma_single_cell_reduction() {
    // At c = e_ij only four groups survive:
    // 2ab QA QB - 2b a_i QAi QB - 2a b_j QA QBj + 2 a_i b_j QAi QBj
    let p = params((1, 2), (2, 1), (1, 1));
    for cfg in small_configs(6, 1) {
        if cfg.c_total() != 1 {
            continue;
        }
        let (mut ti, mut tj) = (0, 0);
        for (i, row) in cfg.c().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v == 1 {
                    ti = i;
                    tj = j;
                }
            }
        }
        let m = Marginals::new(&cfg, &p);
        let (a, b) = (cfg.a_total() as u64, cfg.b_total() as u64);
        let (ai, bj) = (cfg.a()[ti] as u64, cfg.b()[tj] as u64);
        let expect = BigRational::from_u64(2 * a * b) * m.qa() * m.qb()
            - BigRational::from_u64(2 * b * ai) * m.qa_del(ti) * m.qb()
            - BigRational::from_u64(2 * a * bj) * m.qa() * m.qb_del(tj)
            + BigRational::from_u64(2 * ai * bj) * m.qa_del(ti) * m.qb_del(tj);
        assert_eq!(sigma(&cfg, &p), expect, "{cfg:?}");
    }
}

#[test]
fn sigma_breakdown_sums_and_scales() {
    let p = params((1, 1), (1, 1), (1, 1));
    let cfg = tlc(&[1], &[0], &[&[2]]);
    let breakdown = sigma_terms(&cfg, &p);
    assert_eq!(breakdown.terms.len(), SIGMA_TERM_LABELS.len());
    assert_eq!(breakdown.total(), sigma(&cfg, &p));
    // scaling a nonzero family moves the total
    let scaled = breakdown.total_with_scaled(0, rat(2, 1));
    assert_ne!(scaled, breakdown.total());
    assert_eq!(SIGMA_TERM_LABELS[0], "a_coalescence");
}

#[test]
fn q2_decomposition_by_construction() {
    let p = params((1, 2), (2, 1), (1, 1));
    let mut cache = Q2Cache::new(p.clone());
    for cfg in small_configs(5, 5) {
        let lhs = cache.q2(&cfg) - sigma(&cfg, &p);
        let direct = cache.q2_ab0(&cfg.a_marginal(), &cfg.b_marginal());
        assert_eq!(lhs, direct, "{cfg:?}");
    }
}

#[test]
fn q2_boundary_zero() {
    let mut cache = Q2Cache::new(params((1, 1), (2, 1), (1, 1)));
    assert_eq!(cache.q2(&TwoLocusConfig::a_only(1, 0)), BigRational::zero());
}

#[test]
fn truncation_orders() {
    let p = params((1, 1), (1, 1), (100, 1));
    let cfg = tlc(&[0], &[0], &[&[2]]);
    let v0 = q_asymptotic(&cfg, &p, ExpansionOrder::Zero).unwrap();
    assert_eq!(v0, q0(&cfg, &p));
    let v1 = q_asymptotic(&cfg, &p, ExpansionOrder::One).unwrap();
    assert_eq!(v1, v0.clone() + q1(&cfg, &p) / rat(100, 1));
    let v2 = q_asymptotic(&cfg, &p, ExpansionOrder::Two).unwrap();
    let mut cache = Q2Cache::new(p.clone());
    assert_eq!(v2, v1 + cache.q2(&cfg) / rat(10_000, 1));
    // order >= 1 at rho = 0 is a parameter error
    let p0 = params((1, 1), (1, 1), (0, 1));
    assert!(q_asymptotic(&cfg, &p0, ExpansionOrder::One).is_err());
    assert!(q_asymptotic(&cfg, &p0, ExpansionOrder::Zero).is_ok());
}

#[test]
fn order_one_equals_order_zero_without_typed_gametes() {
    let p = params((1, 2), (2, 1), (50, 1));
    let cfg = tlc(&[2, 1], &[2], &[&[0], &[0]]);
    assert_eq!(
        q_asymptotic(&cfg, &p, ExpansionOrder::One).unwrap(),
        q0(&cfg, &p)
    );
}

#[test]
fn locus_swap_invariance() {
    let p = params((1, 2), (2, 1), (1, 1));
    let swapped = p.swap_loci();
    let mut cache = Q2Cache::new(p.clone());
    let mut cache_swapped = Q2Cache::new(swapped.clone());
    for cfg in small_configs(5, 5) {
        let mirror = cfg.swap_loci();
        assert_eq!(q0(&cfg, &p), q0(&mirror, &swapped));
        assert_eq!(q1(&cfg, &p), q1(&mirror, &swapped));
        assert_eq!(cache.q2(&cfg), cache_swapped.q2(&mirror), "{cfg:?}");
    }
}

#[test]
fn label_invariance() {
    let p = params((1, 2), (2, 1), (1, 1));
    let mut cache = Q2Cache::new(p.clone());
    let cfg = tlc(&[1, 2], &[1, 1], &[&[2, 0], &[0, 1]]);
    let perms: [(&[usize], &[usize]); 3] =
        [(&[1, 0], &[0, 1]), (&[0, 1], &[1, 0]), (&[1, 0], &[1, 0])];
    for (rp, cp) in perms {
        let relabeled = cfg.permuted(rp, cp);
        assert_eq!(q0(&cfg, &p), q0(&relabeled, &p));
        assert_eq!(q1(&cfg, &p), q1(&relabeled, &p));
        assert_eq!(cache.q2(&cfg), cache.q2(&relabeled));
    }
}

#[test]
fn order_by_order_sampling_consistency() {
    // The one-gamete extension identity holds separately at each order.
    let p = params((1, 2), (2, 1), (1, 1));
    for cfg in small_configs(4, 4) {
        // extend with an a-only gamete
        let mut q0_sum = BigRational::zero();
        let mut q1_sum = BigRational::zero();
        for ext in a_extensions(&cfg) {
            q0_sum += q0(&ext, &p);
            q1_sum += q1(&ext, &p);
        }
        assert_eq!(q0_sum, q0(&cfg, &p), "q0 ext {cfg:?}");
        assert_eq!(q1_sum, q1(&cfg, &p), "q1 ext {cfg:?}");
    }
}

/// All ways the next sampled gamete can be typed at locus A only.
fn a_extensions(cfg: &TwoLocusConfig) -> Vec<TwoLocusConfig> {
    let mut out = Vec::new();
    for i in 0..cfg.num_a_types() {
        let mut a = cfg.a().to_vec();
        a[i] += 1;
        out.push(TwoLocusConfig::new(a, cfg.b().to_vec(), cfg.c().to_vec()).unwrap());
    }
    let mut a = cfg.a().to_vec();
    a.push(1);
    let mut c = cfg.c().to_vec();
    c.push(vec![0; cfg.num_b_types()]);
    out.push(TwoLocusConfig::new(a, cfg.b().to_vec(), c).unwrap());
    out
}
