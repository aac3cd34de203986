//! Small dense linear-algebra helpers shared by the symplectic and Gaussian
//! modules: complex LU determinants/solves and a Jacobi eigensolver for
//! Hermitian matrices. Everything here targets matrices of dimension at most
//! a few dozen, so plain O(n^3) algorithms with partial pivoting are enough.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Determinant of a complex matrix by LU with partial pivoting.
pub fn det_complex(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of non-square matrix");
    let mut lu = a.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[(col, col)].norm();
        for row in (col + 1)..n {
            let v = lu[(row, col)].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            lu.swap_rows(pivot, col);
            det = -det;
        }
        det *= lu[(col, col)];
        let inv = Complex64::new(1.0, 0.0) / lu[(col, col)];
        for row in (col + 1)..n {
            let factor = lu[(row, col)] * inv;
            lu[(row, col)] = factor;
            for k in (col + 1)..n {
                let sub = factor * lu[(col, k)];
                lu[(row, k)] -= sub;
            }
        }
    }
    det
}

/// Solve `A x = b` for complex `A` by LU with partial pivoting.
pub fn solve_complex(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
) -> Option<DVector<Complex64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[(col, col)].norm();
        for row in (col + 1)..n {
            let v = lu[(row, col)].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return None;
        }
        if pivot != col {
            lu.swap_rows(pivot, col);
            x.swap_rows(pivot, col);
        }
        let inv = Complex64::new(1.0, 0.0) / lu[(col, col)];
        for row in (col + 1)..n {
            let factor = lu[(row, col)] * inv;
            lu[(row, col)] = factor;
            for k in (col + 1)..n {
                let sub = factor * lu[(col, k)];
                lu[(row, k)] -= sub;
            }
            let sub = factor * x[col];
            x[row] -= sub;
        }
    }
    for col in (0..n).rev() {
        x[col] /= lu[(col, col)];
        for row in 0..col {
            let sub = lu[(row, col)] * x[col];
            x[row] -= sub;
        }
    }
    Some(x)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
///
/// Used for positive-definiteness checks and smallest singular values
/// (via `A^* A`); accuracy is ample for the small systems in this crate.
pub fn eigvals_hermitian(a: &DMatrix<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    // Symmetrize defensively; inputs are Hermitian up to rounding.
    for i in 0..n {
        for j in 0..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
        }
    }
    let off = |m: &DMatrix<Complex64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let scale: f64 = (0..n).map(|i| m[(i, i)].norm()).fold(1.0, f64::max);
    for _sweep in 0..100 {
        if off(&m) <= 1e-15 * scale * (n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                // Unitary 2x2 diagonalization of [[app, apq], [apq*, aqq]].
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let c = theta.cos();
                let s = phase * theta.sin();
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s.conj();
                    m[(k, q)] = mkp * s + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s;
                    m[(q, k)] = mpk * s.conj() + mqk * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvals_symmetric(a: &DMatrix<f64>) -> Vec<f64> {
    let c = a.map(|x| Complex64::new(x, 0.0));
    eigvals_hermitian(&c)
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi:
/// returns `(values ascending, V)` with `A = V diag(values) V^T`.
pub fn eig_symmetric(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale: f64 = (0..n).map(|i| m[(i, i)].abs()).fold(1.0, f64::max);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale * (n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = 0.5 * (2.0 * m[(p, q)]).atan2(m[(q, q)] - m[(p, p)]);
                let c = theta.cos();
                let s = theta.sin();
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s;
                    m[(k, q)] = mkp * s + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s;
                    m[(q, k)] = mpk * s + mqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| m[(i, i)]).collect();
    let mut vs = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        for row in 0..n {
            vs[(row, col)] = v[(row, i)];
        }
    }
    (vals, vs)
}

/// Smallest singular value of a complex matrix, via the Hermitian
/// eigenvalues of `A^* A`.
pub fn smallest_singular_value(a: &DMatrix<Complex64>) -> f64 {
    let ata = a.adjoint() * a;
    let ev = eigvals_hermitian(&ata);
    ev.first().map(|v| v.max(0.0).sqrt()).unwrap_or(0.0)
}

/// Infinity norm (max absolute entry) of a real matrix.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lu_determinant_matches_known_values() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[one, i, i, one * 3.0]);
        // det = 3 - i^2 = 4
        let d = det_complex(&a);
        assert_relative_eq!(d.re, 4.0, epsilon = 1e-14);
        assert_relative_eq!(d.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn solve_recovers_rhs() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(3, 3, &[
            one * 2.0, i, one * 0.5,
            i, one * 3.0, -i,
            one * 0.5, -i, one * 1.5,
        ]);
        let x = DVector::from_vec(vec![one, i, one - i]);
        let b = &a * &x;
        let x2 = solve_complex(&a, &b).unwrap();
        for k in 0..3 {
            assert!((x2[k] - x[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigvals_match_hand_computation() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let a = DMatrix::from_row_slice(2, 2, &[one * 2.0, i, -i, one * 2.0]);
        let ev = eigvals_hermitian(&a);
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-12);
    }
}
