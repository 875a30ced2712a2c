//! Odd-harmonic functions: those whose value at every odd-weight point is
//! the average of its neighbours. They form a subspace of dimension
//! `2^(n-1)`, and copying `f` on even points while averaging on odd points
//! approximates `f` within `s(f) / n`.

use serde::Serialize;

use crate::cube::{sensitivity, CubeFunction};
use crate::error::{HcjError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicResult {
    pub g: CubeFunction,
    pub error: f64,
    pub bound: f64,
}

fn is_odd(x: usize) -> bool {
    x.count_ones() % 2 == 1
}

fn neighbour_mean(f: &CubeFunction, x: usize) -> f64 {
    let n = f.n();
    (0..n).map(|j| f.value(x ^ (1 << j))).sum::<f64>() / n as f64
}

pub fn odd_harmonic_project(f: &CubeFunction) -> HarmonicResult {
    let values = (0..f.len())
        .map(|x| {
            if is_odd(x) {
                neighbour_mean(f, x)
            } else {
                f.value(x)
            }
        })
        .collect();
    let g = CubeFunction::new(f.n(), values).expect("averages of finite values");
    HarmonicResult {
        error: f.sup_distance(&g),
        bound: sensitivity(f).value / f.n() as f64,
        g,
    }
}

/// `max_x |f(x) - (1/n) sum_j f(x^j)|`.
pub fn harmonic_defect(f: &CubeFunction) -> f64 {
    (0..f.len())
        .map(|x| (f.value(x) - neighbour_mean(f, x)).abs())
        .fold(0.0, f64::max)
}

/// Largest residual of the odd-point averaging constraints.
pub fn odd_harmonic_residual(g: &CubeFunction) -> f64 {
    (0..g.len())
        .filter(|&x| is_odd(x))
        .map(|x| (g.value(x) - neighbour_mean(g, x)).abs())
        .fold(0.0, f64::max)
}

/// Largest `n` for [`odd_harmonic_dimension`].
pub const MAX_RANK_N: usize = 11;

const PRIME: u64 = 2_147_483_647;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

/// Dimension of the odd-harmonic subspace, `2^n` minus the rank of the
/// constraints `n g(x) - sum_j g(x^j) = 0` over odd `x`.
///
/// The rank is computed modulo a large prime. A rank modulo `p` never
/// exceeds the rational rank, and the rational rank is at most the number
/// of constraints, so a full rank modulo `p` proves the dimension exactly.
pub fn odd_harmonic_dimension(n: usize) -> Result<usize> {
    crate::cube::check_dim(n)?;
    if n > MAX_RANK_N {
        return Err(HcjError::Resource(format!(
            "rank check limited to n <= {MAX_RANK_N}"
        )));
    }
    let cols = 1usize << n;
    let mut rows: Vec<Vec<u64>> = (0..cols)
        .filter(|&x| is_odd(x))
        .map(|x| {
            let mut r = vec![0u64; cols];
            r[x] = n as u64;
            for j in 0..n {
                r[x ^ (1 << j)] = PRIME - 1;
            }
            r
        })
        .collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = pow_mod(rows[rank][c], PRIME - 2);
        let pivot: Vec<u64> = rows[rank].iter().map(|v| v * inv % PRIME).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[c];
            if factor != 0 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a = (*a + PRIME - factor * b % PRIME) % PRIME;
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    Ok(cols - rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_is_the_equality_case() {
        let f = CubeFunction::from_fn(5, |x| if is_odd(x) { -1.0 } else { 1.0 }).unwrap();
        let r = odd_harmonic_project(&f);
        assert!(r.g.values().iter().all(|&v| v == 1.0));
        assert_eq!((r.error, r.bound), (2.0, 2.0));
        assert_eq!(harmonic_defect(&f), 2.0);
    }

    #[test]
    fn and_and_constant() {
        let f = CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = odd_harmonic_project(&f);
        assert_eq!(r.g.values(), &[0.0, 0.5, 0.5, 1.0]);
        assert_eq!((r.error, r.bound), (0.5, 1.0));
        let c = CubeFunction::constant(4, 3.5).unwrap();
        assert_eq!(odd_harmonic_project(&c).error, 0.0);
        assert_eq!(harmonic_defect(&c), 0.0);
    }

    #[test]
    fn projection_satisfies_constraints_exactly() {
        let f = CubeFunction::from_fn(6, |x| ((x * 37) % 11) as f64).unwrap();
        assert_eq!(odd_harmonic_residual(&odd_harmonic_project(&f).g), 0.0);
    }

    #[test]
    fn dimension_is_half() {
        for n in 1..=6 {
            assert_eq!(odd_harmonic_dimension(n).unwrap(), 1 << (n - 1));
        }
    }
}
