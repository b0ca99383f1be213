//! Arbitrary-precision combinatorial and rational primitives shared by the
//! other modules, plus the pluggable exact/floating scalar backend.

pub mod linalg;
mod scalar;

use std::sync::Mutex;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use scalar::{Backend, Scalar};

use num_traits::{One, Zero};

/// The ascending factorial `x (x+1) ... (x+n-1)`, with the empty product 1.
pub fn ascending_factorial<S: Scalar>(x: &S, n: usize) -> S {
    let mut acc = S::one();
    let mut term = x.clone();
    for _ in 0..n {
        acc = acc * term.clone();
        term = term + S::one();
    }
    acc
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Binomial coefficient, 0 when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `x (x-1) / 2` as an integer; 0 for `x` in `{0, 1}`.
pub fn choose2(x: usize) -> u64 {
    (x as u64) * (x as u64).saturating_sub(1) / 2
}

/// Multinomial coefficient `total! / (parts_0! ... parts_m!)`.
///
/// The parts must sum to `total`; anything else is a caller bug.
pub fn multinomial(total: usize, parts: &[usize]) -> BigInt {
    let sum: usize = parts.iter().sum();
    assert_eq!(sum, total, "multinomial parts must sum to total");
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}

// Triangular table of unsigned Stirling numbers of the first kind, grown on
// demand; row n holds s(n, 0..=n). Shared behind a mutex so concurrent
// readers are safe.
static STIRLING: Mutex<Vec<Vec<BigInt>>> = Mutex::new(Vec::new());

/// Unsigned Stirling number of the first kind `s(n, k)`.
///
/// Recurrence `s(n, k) = s(n-1, k-1) + (n-1) s(n-1, k)` with `s(0, 0) = 1`.
/// Out-of-range `k > n` returns 0, matching the convention that vanishing
/// recursion terms are dropped rather than rejected.
pub fn stirling_first_unsigned(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut table = STIRLING.lock().expect("stirling table poisoned");
    if table.is_empty() {
        table.push(vec![BigInt::one()]);
    }
    while table.len() <= n {
        let m = table.len();
        let prev = &table[m - 1];
        let mut row = vec![BigInt::zero(); m + 1];
        for j in 1..=m {
            let carry = if j < m { &prev[j] * (m - 1) } else { BigInt::zero() };
            row[j] = &prev[j - 1] + carry;
        }
        table.push(row);
    }
    table[n][k].clone()
}

/// Second factorial moment `E[C (C-1)]` of a hypergeometric count: `C` is the
/// number of successes among `draws` taken without replacement from a
/// population containing `successes` marked items.
///
/// Equals `draws (draws-1) successes (successes-1) / (population (population-1))`,
/// and 0 when the population has at most one item.
pub fn hypergeometric_factorial_moment<S: Scalar>(
    population: usize,
    successes: usize,
    draws: usize,
) -> S {
    debug_assert!(successes <= population && draws <= population);
    if population <= 1 {
        return S::zero();
    }
    let num = choose2(draws) * choose2(successes);
    S::from_u64(4 * num) / S::from_u64((population * (population - 1)) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: u64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    #[test]
    fn ascending_factorial_examples() {
        // (x)_0 = 1 for any x
        assert_eq!(ascending_factorial(&rat(7, 3), 0), rat(1, 1));
        // (2)_3 = 2*3*4
        assert_eq!(ascending_factorial(&rat(2, 1), 3), rat(24, 1));
        // (1)_n = n!
        for n in 0..10 {
            assert_eq!(
                ascending_factorial(&rat(1, 1), n),
                BigRational::from_integer(factorial(n))
            );
        }
    }

    #[test]
    fn ascending_factorial_splits() {
        // (x)_{m+n} = (x)_m (x+m)_n
        for num in [-3i64, 1, 2, 5] {
            let x = rat(num, 2);
            for m in 0..6usize {
                for n in 0..6usize {
                    let shifted = x.clone() + rat(m as i64, 1);
                    assert_eq!(
                        ascending_factorial(&x, m + n),
                        ascending_factorial(&x, m) * ascending_factorial(&shifted, n)
                    );
                }
            }
        }
    }

    #[test]
    fn stirling_examples() {
        for n in 1..10 {
            assert_eq!(stirling_first_unsigned(n, n), BigInt::one());
        }
        assert_eq!(stirling_first_unsigned(3, 1), BigInt::from(2));
        assert_eq!(stirling_first_unsigned(4, 2), BigInt::from(11));
        assert_eq!(stirling_first_unsigned(5, 9), BigInt::zero());
    }

    #[test]
    fn stirling_generating_identity() {
        // sum_k s(n,k) theta^k = (theta)_n, exactly, for n <= 20
        for theta in [rat(1, 2), rat(1, 1), rat(3, 1)] {
            for n in 1..=20usize {
                let mut sum = BigRational::zero();
                let mut power = BigRational::one();
                for k in 0..=n {
                    if k > 0 {
                        power = power * theta.clone();
                    }
                    sum += BigRational::from_integer(stirling_first_unsigned(n, k)) * power.clone();
                }
                assert_eq!(sum, ascending_factorial(&theta, n));
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(4, &[2, 1, 1]), BigInt::from(12));
        assert_eq!(multinomial(7, &[7]), BigInt::one());
        assert_eq!(multinomial(3, &[1, 1, 1]), BigInt::from(6));
    }

    #[test]
    #[should_panic(expected = "sum to total")]
    fn multinomial_contract() {
        multinomial(4, &[2, 1]);
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 6), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }

    #[test]
    fn hypergeometric_moment_examples() {
        // deterministic draw: E[C(C-1)] = 5*4
        assert_eq!(hypergeometric_factorial_moment::<BigRational>(5, 5, 5), rat(20, 1));
        // (population 4, 2 successes, 2 draws) -> 1/3
        assert_eq!(hypergeometric_factorial_moment::<BigRational>(4, 2, 2), rat(1, 3));
        for pop in 2..6 {
            for draws in 0..=pop {
                assert_eq!(
                    hypergeometric_factorial_moment::<BigRational>(pop, 1, draws),
                    BigRational::zero()
                );
            }
        }
    }

    #[test]
    fn hypergeometric_moment_matches_exhaustive_enumeration() {
        // Brute-force E[C(C-1)] over all subsets of the population.
        for population in 1..=8usize {
            for successes in 0..=population {
                for draws in 0..=population {
                    let mut total = BigRational::zero();
                    let mut count = 0u64;
                    // iterate subsets of size `draws` via bitmasks
                    for mask in 0u32..(1 << population) {
                        if mask.count_ones() as usize != draws {
                            continue;
                        }
                        count += 1;
                        let c = (mask & ((1u32 << successes) - 1).min(u32::MAX)).count_ones()
                            as usize;
                        let c = if successes == 0 { 0 } else { c };
                        total += rat((c * c.saturating_sub(1)) as i64, 1);
                    }
                    let expect = total / rat(count as i64, 1);
                    assert_eq!(
                        hypergeometric_factorial_moment::<BigRational>(
                            population, successes, draws
                        ),
                        expect,
                        "pop {population} succ {successes} draws {draws}"
                    );
                }
            }
        }
    }
}
