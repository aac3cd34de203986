//! Symplectic linear algebra on `R^{2n} ~ C^n`, the quadratic forms `psi2`
//! and `Psi_A`, and the model Bargmann / metaplectic Gaussian kernels.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * `v = (a, b) in R^{2n}` is identified with `Z = a + i b in C^n`;
//! * the symplectic form is `omega0(v, w) = v^T J0 w` with
//!   `J0 = [[0, I], [-I, 0]]`;
//! * the Hermitian product is `h0(Z, W) = sum_j Z_j conj(W_j)`, so that
//!   `h0 = g0 - i omega0` under the identification above;
//! * `A_c = W A W^{-1}` with `W = 2^{-1/2} [[I, iI], [I, -iI]]` has the block
//!   form `[[P, Q], [conj Q, conj P]]` for symplectic `A`, with `P`
//!   invertible and `|P z| >= |z|`.
//!
//! The metaplectic kernel carries the usual double-cover sign ambiguity
//! through `det(P)^{-1/2}`; we fix the principal branch and all downstream
//! comparisons are performed on moduli.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg;

/// Default relative tolerance for symplecticity checks.
pub const TOL_SYM: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum SymplecticError {
    #[error("matrix dimension {0} is odd; expected 2n x 2n")]
    OddDimension(usize),
    #[error("matrix is {rows}x{cols}; expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symplectic: |A^T J A - J| = {defect:.3e} exceeds {tol:.3e}")]
    NotSymplectic { defect: f64, tol: f64 },
    #[error("block P is numerically singular (smallest singular value {smin:.3e})")]
    SingularP { smin: f64 },
    #[error("vector dimensions disagree: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// The standard symplectic-form matrix `J0 = [[0, I], [-I, 0]]` on `R^{2n}`.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// `omega0(v, w) = v^T J0 w = a_v . b_w - b_v . a_w`.
pub fn omega0(v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let n = v.len() / 2;
    let mut s = 0.0;
    for k in 0..n {
        s += v[k] * w[n + k] - v[n + k] * w[k];
    }
    s
}

/// View `v = (a, b)` as the complex vector `a + i b`.
pub fn to_complex(v: &DVector<f64>) -> DVector<Complex64> {
    let n = v.len() / 2;
    DVector::from_fn(n, |k, _| Complex64::new(v[k], v[n + k]))
}

/// Inverse of [`to_complex`].
pub fn to_real(z: &DVector<Complex64>) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |k, _| if k < n { z[k].re } else { z[k - n].im })
}

/// `|A^T J0 A - J0|_inf`, the symplecticity defect.
pub fn symplectic_defect(a: &DMatrix<f64>) -> Result<f64, SymplecticError> {
    if a.nrows() != a.ncols() {
        return Err(SymplecticError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() % 2 != 0 {
        return Err(SymplecticError::OddDimension(a.nrows()));
    }
    let j = standard_j(a.nrows() / 2);
    Ok(linalg::max_abs(&(a.transpose() * &j * a - &j)))
}

/// Membership test for `Sp(2n)` at absolute tolerance `tol`.
pub fn is_symplectic(a: &DMatrix<f64>, tol: f64) -> Result<bool, SymplecticError> {
    Ok(symplectic_defect(a)? <= tol)
}

/// A validated real symplectic matrix.
#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    n: usize,
    entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates `A^T J0 A = J0` at relative tolerance `tol_rel` (scaled by
    /// the squared magnitude of the entries).
    pub fn new(entries: DMatrix<f64>, tol_rel: f64) -> Result<Self, SymplecticError> {
        let defect = symplectic_defect(&entries)?;
        let scale = linalg::max_abs(&entries).powi(2).max(1.0);
        let tol = tol_rel * scale;
        if defect > tol {
            return Err(SymplecticError::NotSymplectic { defect, tol });
        }
        Ok(Self { n: entries.nrows() / 2, entries })
    }

    /// With the default tolerance [`TOL_SYM`].
    pub fn standard(entries: DMatrix<f64>) -> Result<Self, SymplecticError> {
        Self::new(entries, TOL_SYM)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> SymplecticMatrix {
        // A^{-1} = J0^T A^T J0 for symplectic A; avoids a numerical inverse.
        let j = standard_j(self.n);
        let inv = j.transpose() * self.entries.transpose() * &j;
        SymplecticMatrix { n: self.n, entries: inv }
    }

    /// Apply to a real vector.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.entries * v
    }
}

/// The `(P, Q)` blocks of the complexified matrix `A_c = W A W^{-1}`.
#[derive(Debug, Clone)]
pub struct CayleyBlocks {
    pub p: DMatrix<Complex64>,
    pub q: DMatrix<Complex64>,
}

impl CayleyBlocks {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// `det(P)` by complex LU.
    pub fn det_p(&self) -> Complex64 {
        linalg::det_complex(&self.p)
    }

    /// Smallest singular value of `P`.
    pub fn smin_p(&self) -> f64 {
        linalg::smallest_singular_value(&self.p)
    }

    /// Reassemble the real `2n x 2n` matrix `W^{-1} [[P,Q],[Qbar,Pbar]] W`.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut ac = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                ac[(i, j)] = self.p[(i, j)];
                ac[(i, n + j)] = self.q[(i, j)];
                ac[(n + i, j)] = self.q[(i, j)].conj();
                ac[(n + i, n + j)] = self.p[(i, j)].conj();
            }
        }
        let w = cayley_w(n);
        let winv = w.adjoint(); // W is unitary
        let a = winv * ac * w;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| a[(i, j)].re)
    }
}

/// The fixed unitary `W = 2^{-1/2} [[I, iI], [I, -iI]]`.
pub fn cayley_w(n: usize) -> DMatrix<Complex64> {
    let s = 1.0 / 2.0_f64.sqrt();
    let mut w = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        w[(k, k)] = Complex64::new(s, 0.0);
        w[(k, n + k)] = Complex64::new(0.0, s);
        w[(n + k, k)] = Complex64::new(s, 0.0);
        w[(n + k, n + k)] = Complex64::new(0.0, -s);
    }
    w
}

/// Complexify a symplectic matrix into its `(P, Q)` block pair.
///
/// Postconditions checked numerically: the blocks reassemble the input and
/// `P` has smallest singular value at least `1 - TOL_SYM`.
pub fn complexify(a: &SymplecticMatrix) -> Result<CayleyBlocks, SymplecticError> {
    let n = a.n();
    let w = cayley_w(n);
    let ac =
        &w * a.entries().map(|x| Complex64::new(x, 0.0)) * w.adjoint();
    let p = DMatrix::from_fn(n, n, |i, j| ac[(i, j)]);
    let q = DMatrix::from_fn(n, n, |i, j| ac[(i, n + j)]);
    let blocks = CayleyBlocks { p, q };
    let smin = blocks.smin_p();
    if smin < 1.0 - TOL_SYM {
        return Err(SymplecticError::SingularP { smin });
    }
    Ok(blocks)
}

/// `psi2(v, v') = h0(v, v') - |v|^2/2 - |v'|^2/2`
/// `           = -i omega0(v, v') - |v - v'|^2/2`.
pub fn psi2(v1: &DVector<f64>, v2: &DVector<f64>) -> Result<Complex64, SymplecticError> {
    if v1.len() != v2.len() {
        return Err(SymplecticError::DimensionMismatch(v1.len(), v2.len()));
    }
    let z1 = to_complex(v1);
    let z2 = to_complex(v2);
    Ok(psi2_complex(&z1, &z2))
}

/// `psi2` on complex vectors.
pub fn psi2_complex(z1: &DVector<Complex64>, z2: &DVector<Complex64>) -> Complex64 {
    let h: Complex64 = z1.iter().zip(z2.iter()).map(|(a, b)| a * b.conj()).sum();
    let n1: f64 = z1.iter().map(|z| z.norm_sqr()).sum();
    let n2: f64 = z2.iter().map(|z| z.norm_sqr()).sum();
    h - Complex64::new(0.5 * (n1 + n2), 0.0)
}

/// The metaplectic exponent
/// `Psi_A(v1, v2) = (Z1^T Qbar P^{-1} Z1 + 2 Z2^* P^{-1} Z1
///                   - Z2^* P^{-1} Q conj(Z2) - |Z1|^2 - |Z2|^2) / 2`.
pub fn psi_a(
    blocks: &CayleyBlocks,
    v1: &DVector<f64>,
    v2: &DVector<f64>,
) -> Result<Complex64, SymplecticError> {
    if v1.len() != v2.len() {
        return Err(SymplecticError::DimensionMismatch(v1.len(), v2.len()));
    }
    let z1 = to_complex(v1);
    let z2 = to_complex(v2);
    psi_a_complex(blocks, &z1, &z2)
}

/// [`psi_a`] on complex vectors.
pub fn psi_a_complex(
    blocks: &CayleyBlocks,
    z1: &DVector<Complex64>,
    z2: &DVector<Complex64>,
) -> Result<Complex64, SymplecticError> {
    let smin = blocks.smin_p();
    if smin < 1e-12 {
        return Err(SymplecticError::SingularP { smin });
    }
    let pinv_z1 = linalg::solve_complex(&blocks.p, z1)
        .ok_or(SymplecticError::SingularP { smin })?;
    let z2bar = z2.map(|z| z.conj());
    let q_z2bar = &blocks.q * &z2bar;
    let pinv_q_z2bar = linalg::solve_complex(&blocks.p, &q_z2bar)
        .ok_or(SymplecticError::SingularP { smin })?;

    let qbar = blocks.q.map(|z| z.conj());
    // Z1^T Qbar (P^{-1} Z1): plain transpose, no conjugation.
    let t1: Complex64 = {
        let w = &qbar * &pinv_z1;
        z1.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
    };
    // 2 Z2^* (P^{-1} Z1)
    let t2: Complex64 = z2.iter().zip(pinv_z1.iter()).map(|(a, b)| a.conj() * b).sum();
    // Z2^* (P^{-1} Q conj Z2)
    let t3: Complex64 = z2.iter().zip(pinv_q_z2bar.iter()).map(|(a, b)| a.conj() * b).sum();
    let n1: f64 = z1.iter().map(|z| z.norm_sqr()).sum();
    let n2: f64 = z2.iter().map(|z| z.norm_sqr()).sum();
    Ok(0.5 * (t1 + 2.0 * t2 - t3 - Complex64::new(n1 + n2, 0.0)))
}

/// Level-1 Bargmann kernel `Pi_1(Z, W) = pi^{-n} exp(psi2(Z, W))`.
pub fn bargmann_kernel(v1: &DVector<f64>, v2: &DVector<f64>) -> Result<Complex64, SymplecticError> {
    let n = v1.len() / 2;
    let psi = psi2(v1, v2)?;
    Ok(Complex64::new(std::f64::consts::PI.powi(-(n as i32)), 0.0) * psi.exp())
}

/// Metaplectic Gaussian kernel
/// `K(Z, W) = pi^{-n} det(P)^{-1/2} exp(Psi_A(Z, W))`,
/// with `det(P)^{-1/2}` on the principal branch. The overall metaplectic
/// sign is not tracked; compare moduli downstream.
pub fn metaplectic_kernel(
    blocks: &CayleyBlocks,
    v1: &DVector<f64>,
    v2: &DVector<f64>,
) -> Result<Complex64, SymplecticError> {
    let n = blocks.n();
    let det_p = blocks.det_p();
    if det_p.norm() < 1e-300 {
        return Err(SymplecticError::SingularP { smin: 0.0 });
    }
    let det_inv_sqrt = (-0.5 * det_p.ln()).exp();
    let psi = psi_a(blocks, v1, v2)?;
    Ok(Complex64::new(std::f64::consts::PI.powi(-(n as i32)), 0.0) * det_inv_sqrt * psi.exp())
}

/// Elementary symplectic factors with bounded entries; products of these
/// sample `Sp(2n)` with testable condition numbers.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, factors: usize, rng: &mut R) -> SymplecticMatrix {
    let mut a = DMatrix::<f64>::identity(2 * n, 2 * n);
    for _ in 0..factors {
        let kind = rng.gen_range(0..4);
        let f = match kind {
            0 | 1 => {
                // Shear [[I, S], [0, I]] or [[I, 0], [S, I]] with S symmetric.
                let mut s = DMatrix::<f64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..=i {
                        let v = rng.gen_range(-0.6..0.6);
                        s[(i, j)] = v;
                        s[(j, i)] = v;
                    }
                }
                let mut f = DMatrix::<f64>::identity(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        if kind == 0 {
                            f[(i, n + j)] = s[(i, j)];
                        } else {
                            f[(n + i, j)] = s[(i, j)];
                        }
                    }
                }
                f
            }
            2 => {
                // Block diag [[M, 0], [0, M^{-T}]] with M = I + small.
                let mut m = DMatrix::<f64>::identity(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += rng.gen_range(-0.3..0.3);
                    }
                }
                let minv_t = m
                    .clone()
                    .try_inverse()
                    .unwrap_or_else(|| DMatrix::identity(n, n))
                    .transpose();
                let mut f = DMatrix::<f64>::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        f[(i, j)] = m[(i, j)];
                        f[(n + i, n + j)] = minv_t[(i, j)];
                    }
                }
                f
            }
            _ => {
                // Coordinate-pair rotation (orthogonal-symplectic).
                let mut f = DMatrix::<f64>::identity(2 * n, 2 * n);
                let k = rng.gen_range(0..n);
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                f[(k, k)] = t.cos();
                f[(k, n + k)] = t.sin();
                f[(n + k, k)] = -t.sin();
                f[(n + k, n + k)] = t.cos();
                f
            }
        };
        a = f * a;
    }
    SymplecticMatrix { n, entries: a }
}

/// A random orthogonal-symplectic matrix (a product of coordinate-pair
/// rotations and a random real orthogonal change mixing pairs).
pub fn random_orthogonal_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymplecticMatrix {
    // exp of a random element of u(n) embedded in sp(2n) o(2n):
    // build unitary U = exp(i H) via its real form.
    // For simplicity compose pair rotations with unitary mixing 2x2 blocks.
    let mut a = DMatrix::<f64>::identity(2 * n, 2 * n);
    for _ in 0..(3 * n) {
        let k = rng.gen_range(0..n);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut f = DMatrix::<f64>::identity(2 * n, 2 * n);
        f[(k, k)] = t.cos();
        f[(k, n + k)] = t.sin();
        f[(n + k, k)] = -t.sin();
        f[(n + k, n + k)] = t.cos();
        a = f * a;
        if n > 1 {
            // Real rotation applied identically to a- and b-parts (complex
            // orthogonal mixing of coordinates, stays in U(n)-hat).
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            if i == j {
                j = (j + 1) % n;
            }
            let t2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut g = DMatrix::<f64>::identity(2 * n, 2 * n);
            for base in [0, n] {
                g[(base + i, base + i)] = t2.cos();
                g[(base + i, base + j)] = t2.sin();
                g[(base + j, base + i)] = -t2.sin();
                g[(base + j, base + j)] = t2.cos();
            }
            a = g * a;
        }
    }
    SymplecticMatrix { n, entries: a }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn identity_and_shear_are_symplectic_scaling_is_not() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!(is_symplectic(&i2, 1e-12).unwrap());
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 2.5, 0.0, 1.0]);
        assert!(is_symplectic(&shear, 1e-12).unwrap());
        let diag = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(!is_symplectic(&diag, 1e-12).unwrap());
        let odd = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            is_symplectic(&odd, 1e-12),
            Err(SymplecticError::OddDimension(3))
        ));
    }

    #[test]
    fn complexify_identity_j0_and_shear() {
        // A = I -> P = I, Q = 0.
        let a = SymplecticMatrix::standard(DMatrix::identity(2, 2)).unwrap();
        let b = complexify(&a).unwrap();
        assert!((b.p[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(b.q[(0, 0)].norm() < 1e-14);

        // A = J0 -> P = -i, Q = 0.
        let a = SymplecticMatrix::standard(standard_j(1)).unwrap();
        let b = complexify(&a).unwrap();
        assert!((b.p[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(b.q[(0, 0)].norm() < 1e-14);

        // A = [[1, -s], [0, 1]] -> P = 1 + is/2, Q = -is/2.
        let s = 0.8;
        let a = SymplecticMatrix::standard(DMatrix::from_row_slice(2, 2, &[1.0, -s, 0.0, 1.0]))
            .unwrap();
        let b = complexify(&a).unwrap();
        assert!((b.p[(0, 0)] - Complex64::new(1.0, s / 2.0)).norm() < 1e-14);
        assert!((b.q[(0, 0)] - Complex64::new(0.0, -s / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn psi2_matches_examples() {
        // psi2(v, v) = 0
        let v = vec2(0.3, -1.2);
        assert!(psi2(&v, &v).unwrap().norm() < 1e-15);
        // v1 = (1,0), v2 = (0,1) -> -1 - i
        let got = psi2(&vec2(1.0, 0.0), &vec2(0.0, 1.0)).unwrap();
        assert_relative_eq!(got.re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(got.im, -1.0, epsilon = 1e-15);
        // v1 = (2,0), v2 = (1,0) -> -1/2
        let got = psi2(&vec2(2.0, 0.0), &vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(got.re, -0.5, epsilon = 1e-15);
        assert_relative_eq!(got.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn psi2_two_expressions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..4usize);
            let v1 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let v2 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let a = psi2(&v1, &v2).unwrap();
            let diff = &v1 - &v2;
            let b = Complex64::new(0.0, -omega0(&v1, &v2))
                + Complex64::new(-0.5 * diff.norm_squared(), 0.0);
            assert!((a - b).norm() < 1e-12, "psi2 expressions differ: {a} vs {b}");
        }
    }

    #[test]
    fn psi_identity_reduces_to_psi2_and_unitary_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.gen_range(1..4usize);
            let id = SymplecticMatrix::standard(DMatrix::identity(2 * n, 2 * n)).unwrap();
            let blocks = complexify(&id).unwrap();
            let v1 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let v2 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let lhs = psi_a(&blocks, &v1, &v2).unwrap();
            let rhs = psi2(&v1, &v2).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);

            // A in U(n)-hat: Psi_A(v1, v2) = psi2(v1, A v2).
            let u = random_orthogonal_symplectic(n, &mut rng);
            let ub = complexify(&u).unwrap();
            let lhs = psi_a(&ub, &v1, &v2).unwrap();
            let rhs = psi2(&v1, &u.apply(&v2)).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "unitary case: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn psi_shear_matches_direct_block_evaluation() {
        // n = 1, s = 1: P = 1 + i/2, Q = -i/2, v1 = v2 = (1, 0).
        let a = SymplecticMatrix::standard(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]))
            .unwrap();
        let blocks = complexify(&a).unwrap();
        let v = vec2(1.0, 0.0);
        let got = psi_a(&blocks, &v, &v).unwrap();
        // Direct scalar evaluation of the definition with z1 = z2 = 1.
        let p = Complex64::new(1.0, 0.5);
        let q = Complex64::new(0.0, -0.5);
        let expect = 0.5 * (q.conj() / p + 2.0 / p - q / p - 2.0);
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn random_sp_reassembles_and_p_expands() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let n = rng.gen_range(1..5usize);
            let a = random_symplectic(n, 6, &mut rng);
            assert!(symplectic_defect(a.entries()).unwrap() < 1e-9);
            let blocks = complexify(&a).unwrap();
            let back = blocks.reassemble();
            let err = linalg::max_abs(&(&back - a.entries()));
            assert!(err < 1e-10, "reassembly error {err}");
            assert!(blocks.smin_p() >= 1.0 - 1e-10);
            for _ in 0..20 {
                let z = DVector::from_fn(n, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                let pz = &blocks.p * &z;
                assert!(pz.norm() >= (1.0 - 1e-10) * z.norm());
            }
        }
    }

    #[test]
    fn graph_points_have_unit_modulus_gaussian_factor() {
        // Re Psi_A(A v, v) = 0: the metaplectic kernel peaks on the graph.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(1..4usize);
            let a = random_symplectic(n, 5, &mut rng);
            let blocks = complexify(&a).unwrap();
            let v = DVector::from_fn(2 * n, |_, _| rng.gen_range(-1.5..1.5));
            let av = a.apply(&v);
            let val = psi_a(&blocks, &av, &v).unwrap();
            assert!(val.re.abs() < 1e-10, "Re Psi_A(Av, v) = {}", val.re);
        }
    }

    #[test]
    fn re_psi_nonpositive_on_samples() {
        // Tested empirically; not asserted as a theorem.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..300 {
            let n = rng.gen_range(1..4usize);
            let a = random_symplectic(n, 5, &mut rng);
            let blocks = complexify(&a).unwrap();
            let v1 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let v2 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-2.0..2.0));
            let val = psi_a(&blocks, &v1, &v2).unwrap();
            assert!(val.re <= 1e-10, "Re Psi_A = {} > 0", val.re);
        }
    }

    #[test]
    fn bargmann_kernel_basics() {
        let z = vec2(0.7, -0.4);
        let w = vec2(0.0, 0.0);
        let pi = std::f64::consts::PI;
        // Pi_1(Z, Z) = pi^{-n}
        let diag = bargmann_kernel(&z, &z).unwrap();
        assert_relative_eq!(diag.re, 1.0 / pi, epsilon = 1e-15);
        // |Pi_1| <= pi^{-n}
        let off = bargmann_kernel(&z, &w).unwrap();
        assert!(off.norm() <= 1.0 / pi + 1e-15);
        // Z = (1, 0), W = 0 -> pi^{-1} e^{-1/2}
        let v = vec2(1.0, 0.0);
        let got = bargmann_kernel(&v, &w).unwrap();
        assert_relative_eq!(got.norm(), (-0.5_f64).exp() / pi, epsilon = 1e-15);
    }

    #[test]
    fn metaplectic_kernel_identity_and_orthogonal_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let id = SymplecticMatrix::standard(DMatrix::identity(2, 2)).unwrap();
        let bid = complexify(&id).unwrap();
        let v1 = vec2(0.3, 0.9);
        let v2 = vec2(-0.5, 0.2);
        let k = metaplectic_kernel(&bid, &v1, &v2).unwrap();
        let p1 = bargmann_kernel(&v1, &v2).unwrap();
        assert!((k - p1).norm() < 1e-14);

        for _ in 0..30 {
            let u = random_orthogonal_symplectic(1, &mut rng);
            let ub = complexify(&u).unwrap();
            let k = metaplectic_kernel(&ub, &v1, &v2).unwrap();
            let p1 = bargmann_kernel(&v1, &u.apply(&v2)).unwrap();
            assert!(
                (k.norm() - p1.norm()).abs() < 1e-12,
                "orthogonal-symplectic modulus mismatch"
            );
        }
    }
}
