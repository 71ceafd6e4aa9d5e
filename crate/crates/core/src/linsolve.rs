//! Dense linear solve for the small constraint systems in ground contact.

use crate::scalar::Real;

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
///
/// Returns the offending pivot magnitude when the matrix is numerically
/// singular relative to its largest entry.
pub fn solve<S: Real, const N: usize>(mut a: [[S; N]; N], mut b: [S; N]) -> Result<[S; N], S> {
    let scale = a
        .iter()
        .flatten()
        .fold(S::zero(), |acc, v| acc.max(v.abs()));
    let tol = S::epsilon() * S::lit(N as f64) * scale;

    for col in 0..N {
        let (piv, mag) =
            (col..N)
                .map(|r| (r, a[r][col].abs()))
                .fold(
                    (col, -S::one()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if !(mag > tol) {
            return Err(mag);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            if f == S::zero() {
                continue;
            }
            for c in col..N {
                a[r][c] = a[r][c] - f * a[col][c];
            }
            b[r] = b[r] - f * b[col];
        }
    }

    let mut x = [S::zero(); N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for c in row + 1..N {
            acc = acc - a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_permuted_system() {
        let a = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let x_true = [1.0, -2.0, 0.5];
        let b: [f64; 3] = core::array::from_fn(|i| (0..3).map(|j| a[i][j] * x_true[j]).sum());
        let x = solve(a, b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn reports_singular() {
        let a = [[1.0, 2.0], [2.0, 4.0]];
        assert!(solve(a, [1.0, 1.0]).is_err());
    }
}
