//! Dense linear solvers for the per-degree systems.
//!
//! The systems are small (tens to a few hundred unknowns), square, and
//! strictly diagonally dominant for valid parameters, so direct elimination
//! is the whole story. The exact backend clears each row to integers and
//! runs fraction-free Bareiss elimination (entries stay integral minors,
//! no gcd churn); the right-hand side, which carries already-solved values
//! with large denominators, is kept rational and transformed alongside.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Gaussian elimination with partial pivoting over doubles.
pub fn solve_float(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = check_shape(m.len(), &m, &b)?;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .expect("nonempty range");
        if m[pivot_row][col] == 0.0 {
            return Err(Error::Numerical("singular system (float)".into()));
        }
        m.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Fraction-free Bareiss elimination for exact rational systems.
///
/// Matrix rows are scaled to integers first (coefficients are small
/// rationals built from the parameters); the rhs column stays rational and
/// receives the same row operations, so no precision is ever lost.
pub fn solve_bareiss(m: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = check_shape(m.len(), &m, &b)?;
    // Clear denominators row by row; the rhs entry absorbs the same factor.
    let mut mi: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, rhs) in m.into_iter().zip(b.iter_mut()) {
        let mut lcm = BigInt::one();
        for entry in &row {
            lcm = lcm.lcm(entry.denom());
        }
        let ints = row
            .into_iter()
            .map(|entry| (entry * &lcm).to_integer())
            .collect();
        *rhs = rhs.clone() * &lcm;
        mi.push(ints);
    }

    let mut prev = BigInt::one();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !mi[r][col].is_zero());
        let Some(pivot_row) = pivot_row else {
            return Err(Error::Numerical("singular system (rational)".into()));
        };
        mi.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let (head, tail) = mi.split_at_mut(col + 1);
        let pivot_vec = &head[col];
        let pivot = pivot_vec[col].clone();
        for (offset, row) in tail.iter_mut().enumerate() {
            let lead = std::mem::replace(&mut row[col], BigInt::zero());
            for k in col + 1..n {
                // Exact by the Bareiss minor identity.
                row[k] = (&pivot * &row[k] - &lead * &pivot_vec[k]) / &prev;
            }
            let r = col + 1 + offset;
            b[r] = (b[r].clone() * &pivot - b[col].clone() * &lead)
                / BigRational::from_integer(prev.clone());
        }
        prev = pivot;
    }

    let mut x = vec![BigRational::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= BigRational::from_integer(mi[row][k].clone()) * &x[k];
        }
        x[row] = acc / BigRational::from_integer(mi[row][row].clone());
    }
    Ok(x)
}

fn check_shape<T>(n: usize, m: &[Vec<T>], b: &[T]) -> Result<usize> {
    if b.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::Numerical(format!(
            "non-square system: {n} rows, rhs {}",
            b.len()
        )));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Scalar;

    fn rat(n: i64, d: u64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    #[test]
    fn bareiss_solves_hand_system() {
        // 2x + y = 5, x + 3y = 10 -> x = 1, y = 3
        let m = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        let b = vec![rat(5, 1), rat(10, 1)];
        let x = solve_bareiss(m, b).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(3, 1)]);
    }

    #[test]
    fn bareiss_handles_rational_coefficients_and_rhs() {
        // (1/2)x + y = 7/3, x - (1/3)y = 1/6 -> solve and check residual exactly.
        let m = vec![vec![rat(1, 2), rat(1, 1)], vec![rat(1, 1), rat(-1, 3)]];
        let b = vec![rat(7, 3), rat(1, 6)];
        let x = solve_bareiss(m.clone(), b.clone()).unwrap();
        for i in 0..2 {
            let lhs = m[i][0].clone() * &x[0] + m[i][1].clone() * &x[1];
            assert_eq!(lhs, b[i]);
        }
    }

    #[test]
    fn bareiss_needs_row_swap() {
        // Zero in the leading pivot position.
        let m = vec![
            vec![rat(0, 1), rat(2, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1), rat(0, 1)],
            vec![rat(3, 1), rat(0, 1), rat(1, 1)],
        ];
        let b = vec![rat(5, 1), rat(3, 1), rat(7, 1)];
        let x = solve_bareiss(m.clone(), b.clone()).unwrap();
        for i in 0..3 {
            let lhs: BigRational = (0..3).map(|j| m[i][j].clone() * &x[j]).sum();
            assert_eq!(lhs, b[i]);
        }
    }

    #[test]
    fn float_matches_rational_on_random_dominant_systems() {
        let mut seed = 88172645463325252u64;
        let mut next = move || {
            // xorshift is plenty for coefficient jitter here
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 19) as i64 - 9
        };
        for _ in 0..20 {
            let n = 5;
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = next();
                }
                m[i][i] = 40 + next().abs();
            }
            let b: Vec<i64> = (0..n).map(|_| next()).collect();
            let mf = m
                .iter()
                .map(|row| row.iter().map(|&v| v as f64).collect())
                .collect();
            let bf = b.iter().map(|&v| v as f64).collect();
            let mr = m
                .iter()
                .map(|row| row.iter().map(|&v| rat(v, 1)).collect())
                .collect();
            let br = b.iter().map(|&v| rat(v, 1)).collect();
            let xf = solve_float(mf, bf).unwrap();
            let xr = solve_bareiss(mr, br).unwrap();
            for (f, r) in xf.iter().zip(&xr) {
                assert!((f - Scalar::to_f64(r)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_reported() {
        let m = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        let b = vec![rat(1, 1), rat(2, 1)];
        assert!(matches!(solve_bareiss(m, b), Err(Error::Numerical(_))));
        let mf = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            solve_float(mf, vec![1.0, 2.0]),
            Err(Error::Numerical(_))
        ));
    }
}
