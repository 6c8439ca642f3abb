//! Dense linear solve used by the hitting-time computation: Gaussian
//! elimination with partial pivoting, generic over the scalar type. The
//! systems here are small (a few thousand unknowns) and diagonally
//! dominated, so this is both adequate and dependency-free.

use crate::num::Real;
use crate::{Error, Result};

/// Solves `A x = b` for square row-major `a` of dimension `dim`, consuming
/// both inputs. Fails with `SingularSystem` when no usable pivot remains.
pub fn solve_dense<R: Real>(mut a: Vec<R>, dim: usize, mut b: Vec<R>) -> Result<Vec<R>> {
    assert_eq!(a.len(), dim * dim, "matrix shape");
    assert_eq!(b.len(), dim, "rhs shape");

    let scale = a
        .iter()
        .fold(R::zero(), |m, &v| m.max(v.abs()))
        .max(R::one());
    let tol = scale * R::epsilon() * R::from_count(dim.max(1));

    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r, &s| {
                a[r * dim + col]
                    .abs()
                    .partial_cmp(&a[s * dim + col].abs())
                    .expect("pivot entries are not NaN")
            })
            .expect("non-empty pivot range");
        let pivot = a[pivot_row * dim + col];
        if pivot.abs() <= tol {
            return Err(Error::SingularSystem(format!(
                "no usable pivot in column {col} (best {pivot})"
            )));
        }
        if pivot_row != col {
            for k in col..dim {
                a.swap(col * dim + k, pivot_row * dim + k);
            }
            b.swap(col, pivot_row);
        }
        let inv = R::one() / pivot;
        for row in col + 1..dim {
            let factor = a[row * dim + col] * inv;
            if factor == R::zero() {
                continue;
            }
            a[row * dim + col] = R::zero();
            let (upper, lower) = a.split_at_mut(row * dim);
            let src = &upper[col * dim + col + 1..col * dim + dim];
            let dst = &mut lower[col + 1..dim];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d -= factor * s;
            }
            let correction = factor * b[col];
            b[row] -= correction;
        }
    }

    let mut x = vec![R::zero(); dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for col in row + 1..dim {
            acc -= a[row * dim + col] * x[col];
        }
        x[row] = acc / a[row * dim + row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn residual_inf<R: Real>(a: &[R], dim: usize, x: &[R], b: &[R]) -> R {
        let mut worst = R::zero();
        for row in 0..dim {
            let mut acc = -b[row];
            for col in 0..dim {
                acc += a[row * dim + col] * x[col];
            }
            worst = worst.max(acc.abs());
        }
        worst
    }

    #[test]
    fn solves_a_known_three_by_three_system() {
        // x = (1, -2, 3)
        let a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let b = vec![-3.0, 5.0, 2.0];
        let x = solve_dense(a, 3, b).unwrap();
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(x[1], -2.0, max_relative = 1e-12);
        assert_relative_eq!(x[2], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn pivoting_handles_a_zero_leading_entry() {
        let a = vec![0.0, 1.0, 1.0, 0.0];
        let x = solve_dense(a, 2, vec![2.0, 5.0]).unwrap();
        assert_relative_eq!(x[0], 5.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn residual_stays_tiny_on_random_diagonally_dominant_systems() {
        use crate::bitcore::RngStream;
        let mut rng = RngStream::new(500);
        for dim in [5, 40, 120] {
            let mut a = vec![0.0f64; dim * dim];
            let mut b = vec![0.0f64; dim];
            for row in 0..dim {
                let mut off = 0.0;
                for col in 0..dim {
                    if col != row {
                        let v = rng.next_f64() - 0.5;
                        a[row * dim + col] = v;
                        off += v.abs();
                    }
                }
                a[row * dim + row] = off + 1.0;
                b[row] = rng.next_f64() * 10.0;
            }
            let x = solve_dense(a.clone(), dim, b.clone()).unwrap();
            assert!(residual_inf(&a, dim, &x, &b) < 1e-11, "dim {dim}");
        }
    }

    #[test]
    fn works_in_single_precision_too() {
        let a = vec![4.0f32, 1.0, 1.0, 3.0];
        let x = solve_dense(a, 2, vec![1.0f32, 2.0]).unwrap();
        assert_relative_eq!(x[0], 1.0 / 11.0, max_relative = 1e-5);
        assert_relative_eq!(x[1], 7.0 / 11.0, max_relative = 1e-5);
    }

    #[test]
    fn singular_systems_are_reported() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        match solve_dense(a, 2, vec![1.0, 2.0]) {
            Err(crate::Error::SingularSystem(_)) => {}
            other => panic!("expected a singular-system error, got {other:?}"),
        }
    }
}
