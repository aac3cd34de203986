//! Closed-form complex Gaussian integrals with positive-definite real part,
//! the flow-twisted Gaussian constant `A_chi`, and the split diagonal-case
//! integrals.
//!
//! The engine evaluates
//!
//! ```text
//! I(M, b, c) = int_{R^m} exp(-u^T M u / 2 + b^T u + c) du
//!            = (2 pi)^{m/2} det(M)^{-1/2} exp(b^T M^{-1} b / 2 + c),
//! ```
//!
//! where `M` is complex symmetric with `Re(M)` positive definite and `b^T`
//! is the plain transpose (bilinear, not sesquilinear). The only delicate
//! point is the branch of `det(M)^{-1/2}`: it is fixed by continuous
//! deformation along `M(t) = Re(M) + i t Im(M)` from the real
//! positive-definite endpoint, with the argument of the determinant tracked
//! by adaptive phase unwrapping. Eigenvalues of such matrices stay in the
//! right half plane, so the tracked argument is well defined.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;

#[derive(Error, Debug)]
pub enum GaussianError {
    #[error("quadratic coefficient is not symmetric: |M - M^T| = {0:.3e}")]
    NotSymmetric(f64),
    #[error("Re(M) is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("dimension mismatch: matrix is {m}x{m}, vector has length {v}")]
    DimensionMismatch { m: usize, v: usize },
    #[error("split dims invalid: d = {d}, d_G = {dg}")]
    BadSplit { d: usize, dg: usize },
    #[error("phase tracking failed to resolve the determinant branch")]
    BranchTracking,
}

/// A quadratic exponent `-u^T M u / 2 + b^T u + c` on `R^m`.
#[derive(Debug, Clone)]
pub struct ComplexQuadratic {
    pub m: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
    pub c: Complex64,
}

impl ComplexQuadratic {
    /// Validates symmetry of `M` and positive definiteness of `Re(M)`.
    pub fn new(
        m: DMatrix<Complex64>,
        b: DVector<Complex64>,
        c: Complex64,
    ) -> Result<Self, GaussianError> {
        let dim = m.nrows();
        if b.len() != dim {
            return Err(GaussianError::DimensionMismatch { m: dim, v: b.len() });
        }
        let mut asym = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                asym = asym.max((m[(i, j)] - m[(j, i)]).norm());
                scale = scale.max(m[(i, j)].norm());
            }
        }
        if asym > 1e-12 * scale.max(1.0) {
            return Err(GaussianError::NotSymmetric(asym));
        }
        let re = m.map(|z| z.re);
        let sym = 0.5 * (&re + re.transpose());
        let ev = linalg::eigvals_symmetric(&sym);
        let smallest = ev.first().copied().unwrap_or(0.0);
        if smallest <= 1e-12 {
            return Err(GaussianError::NotPositiveDefinite(smallest));
        }
        Ok(Self { m, b, c })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

/// `det(M)^{-1/2}` with the branch fixed by continuous deformation from
/// `Re(M)`. Steps are refined until consecutive determinant arguments move
/// by less than `pi/2`, which makes the unwrapped phase unambiguous.
pub fn det_inv_sqrt_continued(m: &DMatrix<Complex64>) -> Result<Complex64, GaussianError> {
    let re = m.map(|z| Complex64::new(z.re, 0.0));
    let im = m.map(|z| Complex64::new(0.0, z.im));
    let det_at = |t: f64| -> Complex64 { linalg::det_complex(&(&re + &im * Complex64::from(t))) };

    let mut ts = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    for _refine in 0..40 {
        let dets: Vec<Complex64> = ts.iter().map(|&t| det_at(t)).collect();
        if dets.iter().any(|d| d.norm() == 0.0) {
            return Err(GaussianError::BranchTracking);
        }
        let mut phase = dets[0].arg(); // real positive at t = 0, so ~0
        let mut ok = true;
        for k in 1..dets.len() {
            let step = (dets[k] / dets[k - 1]).arg();
            if step.abs() > std::f64::consts::FRAC_PI_2 {
                ok = false;
                break;
            }
            phase += step;
        }
        if ok {
            let modulus = dets.last().unwrap().norm();
            return Ok(Complex64::from_polar(modulus.powf(-0.5), -0.5 * phase));
        }
        // Refine: double the grid.
        let n = ts.len() - 1;
        ts = (0..=(2 * n)).map(|k| k as f64 / (2 * n) as f64).collect();
    }
    Err(GaussianError::BranchTracking)
}

/// Closed-form Gaussian integral `(2 pi)^{m/2} det(M)^{-1/2}
/// exp(b^T M^{-1} b / 2 + c)`.
pub fn gauss_integral(q: &ComplexQuadratic) -> Result<Complex64, GaussianError> {
    let m = q.dim();
    let det_is = det_inv_sqrt_continued(&q.m)?;
    let exponent = if q.b.iter().all(|z| z.norm() == 0.0) {
        q.c
    } else {
        let minv_b = linalg::solve_complex(&q.m, &q.b).ok_or(GaussianError::BranchTracking)?;
        let bt_minv_b: Complex64 = q.b.iter().zip(minv_b.iter()).map(|(a, b)| a * b).sum();
        0.5 * bt_minv_b + q.c
    };
    let tau = std::f64::consts::TAU;
    Ok(Complex64::from(tau.powf(m as f64 / 2.0)) * det_is * exponent.exp())
}

/// Block bookkeeping for the `R^{d_G}_t + R^{d_G}_v + R^{2d-2-2d_G}_h`
/// splitting of `R^{2d-2} ~ C^{d-1}`. In the `(a, b)` layout used by
/// [`crate::symplectic`], the first `d_G` real parts are the v-block, the
/// first `d_G` imaginary parts are the t-block, and the remaining pairs are
/// the h-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitDims {
    pub d: usize,
    pub d_g: usize,
}

impl SplitDims {
    pub fn new(d: usize, d_g: usize) -> Result<Self, GaussianError> {
        if d < 1 || (d_g > 0 && d_g > d - 1) {
            return Err(GaussianError::BadSplit { d, dg: d_g });
        }
        Ok(Self { d, d_g })
    }

    /// Complex dimension `n = d - 1`.
    pub fn n(&self) -> usize {
        self.d - 1
    }

    /// Real dimension `2d - 2` of the horizontal space.
    pub fn real_dim(&self) -> usize {
        2 * (self.d - 1)
    }

    /// Real dimension of the h-block, `2d - 2 - 2 d_G`.
    pub fn h_dim(&self) -> usize {
        self.real_dim() - 2 * self.d_g
    }
}

/// Displacement with explicit transverse and horizontal blocks.
///
/// `t` has length `d_G`; `h` has length `2(d - 1 - d_G)` in `(a, b)` layout
/// on the h-subspace.
#[derive(Debug, Clone)]
pub struct BlockVector {
    pub t: DVector<f64>,
    pub h: DVector<f64>,
}

impl BlockVector {
    pub fn zero(dims: SplitDims) -> Self {
        Self {
            t: DVector::zeros(dims.d_g),
            h: DVector::zeros(dims.h_dim()),
        }
    }
}

/// The Gaussian constant attached to the linearized flow matrix `B`:
///
/// ```text
/// A = int exp(-|u^t|^2 - |u^h|^2/2 - i omega0(u^v, u^t) - |B u|^2 / 2) du
/// ```
///
/// over `u in R^{2d-2}` in the split layout. Equals `pi^{d-1}` whenever `B`
/// is orthogonal.
pub fn a_chi(
    b: &crate::symplectic::SymplecticMatrix,
    dims: SplitDims,
) -> Result<Complex64, GaussianError> {
    let nreal = dims.real_dim();
    if b.entries().nrows() != nreal {
        return Err(GaussianError::DimensionMismatch { m: nreal, v: b.entries().nrows() });
    }
    let n = dims.n();
    let dg = dims.d_g;
    let btb = b.entries().transpose() * b.entries();
    let mut m = btb.map(|x| Complex64::new(x, 0.0));
    for j in 0..n {
        if j < dg {
            // v-slot a_j: no extra diagonal; t-slot b_j: +2.
            m[(n + j, n + j)] += Complex64::new(2.0, 0.0);
            // -i omega0(u^v, u^t) = -i sum a_j b_j: symmetric coupling i.
            m[(j, n + j)] += Complex64::new(0.0, 1.0);
            m[(n + j, j)] += Complex64::new(0.0, 1.0);
        } else {
            // h-slots: +1 on both a_j and b_j.
            m[(j, j)] += Complex64::new(1.0, 0.0);
            m[(n + j, n + j)] += Complex64::new(1.0, 0.0);
        }
    }
    let q = ComplexQuadratic::new(m, DVector::zeros(nreal), Complex64::from(0.0))?;
    gauss_integral(&q)
}

/// The two split diagonal-case Gaussian integrals, evaluated both in closed
/// form and through [`gauss_integral`]; the routes must agree.
///
/// Returns `((horizontal, vertical-transverse), (horizontal, vt))` as
/// `(closed_form, engine)` pairs.
pub fn diag_case_integrals(
    dims: SplitDims,
    v1: &BlockVector,
    v2: &BlockVector,
) -> Result<((Complex64, Complex64), (Complex64, Complex64)), GaussianError> {
    let pi = std::f64::consts::PI;
    let dg = dims.d_g;
    let hm = dims.h_dim(); // 2 (d - 1 - d_G)
    if v1.t.len() != dg || v2.t.len() != dg || v1.h.len() != hm || v2.h.len() != hm {
        return Err(GaussianError::DimensionMismatch { m: dg + hm, v: v1.t.len() + v1.h.len() });
    }

    // Closed forms.
    let psi = crate::symplectic::psi2(&v1.h, &v2.h).map_err(|_| GaussianError::DimensionMismatch {
        m: hm,
        v: v1.h.len(),
    })?;
    let horiz_closed = Complex64::from(pi.powi((dims.d - 1 - dg) as i32)) * psi.exp();
    let vt_closed = Complex64::from(
        pi.powi(dg as i32) * (-v1.t.norm_squared() - v2.t.norm_squared()).exp(),
    );

    // Engine route, horizontal block: M = 2I, b = (v1h + v2h) - i J0^T (v1h - v2h),
    // c = -(|v1h|^2 + |v2h|^2)/2, over R^{2(d-1-d_G)}.
    let horiz_engine = if hm == 0 {
        Complex64::from(1.0)
    } else {
        let m = DMatrix::<Complex64>::identity(hm, hm) * Complex64::from(2.0);
        let sum = &v1.h + &v2.h;
        let diff = &v1.h - &v2.h;
        let half = hm / 2;
        // J0^T w: (a, b) -> (-b, a) with J0 = [[0, I], [-I, 0]].
        let jtw = DVector::from_fn(hm, |k, _| {
            if k < half {
                -diff[half + k]
            } else {
                diff[k - half]
            }
        });
        let b = DVector::from_fn(hm, |k, _| Complex64::new(sum[k], -jtw[k]));
        let c = Complex64::from(-0.5 * (v1.h.norm_squared() + v2.h.norm_squared()));
        gauss_integral(&ComplexQuadratic::new(m, b, c)?)?
    };

    // Engine route, vertical-transverse block over (u^v, u^t) in R^{2 d_G}:
    // M = [[I, iI], [iI, 3I]], b = (-i v2t, v2t),
    // c = -|v1t|^2 - |v2t|^2/2.
    let vt_engine = if dg == 0 {
        Complex64::from(1.0)
    } else {
        let mut m = DMatrix::<Complex64>::zeros(2 * dg, 2 * dg);
        for j in 0..dg {
            m[(j, j)] = Complex64::from(1.0);
            m[(dg + j, dg + j)] = Complex64::from(3.0);
            m[(j, dg + j)] = Complex64::new(0.0, 1.0);
            m[(dg + j, j)] = Complex64::new(0.0, 1.0);
        }
        let b = DVector::from_fn(2 * dg, |k, _| {
            if k < dg {
                Complex64::new(0.0, -v2.t[k])
            } else {
                Complex64::from(v2.t[k - dg])
            }
        });
        let c = Complex64::from(-v1.t.norm_squared() - 0.5 * v2.t.norm_squared());
        gauss_integral(&ComplexQuadratic::new(m, b, c)?)?
    };

    Ok(((horiz_closed, vt_closed), (horiz_engine, vt_engine)))
}

/// Independent oracle: evaluates the same integral as [`gauss_integral`] by
/// whitening `Re(M)`, rotating to principal axes of the residual imaginary
/// part, and taking a product of 1D trapezoid quadratures. No determinant
/// branch is ever chosen here, so this path checks the phase produced by
/// the analytic continuation in the closed form.
pub fn quadrature_oracle(q: &ComplexQuadratic) -> Result<Complex64, GaussianError> {
    let dim = q.dim();
    let re = q.m.map(|z| z.re);
    let sym = 0.5 * (&re + re.transpose());
    let (vals, vecs) = linalg::eig_symmetric(&sym);
    if vals[0] <= 0.0 {
        return Err(GaussianError::NotPositiveDefinite(vals[0]));
    }
    // L = U sqrt(sigma); L^{-1} = diag(1/sqrt(sigma)) U^T.
    let sqrt_inv = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            1.0 / vals[i].sqrt()
        } else {
            0.0
        }
    });
    let linv = &sqrt_inv * vecs.transpose();
    let det_l: f64 = vals.iter().map(|v| v.sqrt()).product();

    let im = q.m.map(|z| z.im);
    let t = &linv * im * linv.transpose();
    let tsym = 0.5 * (&t + t.transpose());
    let (lambda, o) = linalg::eig_symmetric(&tsym);

    // beta = O^T L^{-1} b (complex).
    let linv_c = linv.map(|x| Complex64::new(x, 0.0));
    let ot_c = o.transpose().map(|x| Complex64::new(x, 0.0));
    let beta = &ot_c * (&linv_c * &q.b);

    // Each factor: int exp(-(1 + i lambda_j) y^2 / 2 + beta_j y) dy.
    let mut prod = Complex64::from(1.0 / det_l);
    let h = 0.05;
    let r = 16.0;
    let steps = (2.0 * r / h) as usize;
    for j in 0..dim {
        let lam = lambda[j];
        let bj = beta[j];
        let mut sum = Complex64::from(0.0);
        for k in 0..=steps {
            let y = -r + k as f64 * h;
            let quad = Complex64::new(1.0, lam) * Complex64::from(0.5 * y * y);
            let term = (-quad + bj * Complex64::from(y)).exp();
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            sum += term * Complex64::from(w);
        }
        prod *= sum * Complex64::from(h);
    }
    Ok(prod * q.c.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_orthogonal_symplectic, SymplecticMatrix};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(dim: usize, rng: &mut ChaCha8Rng) -> ComplexQuadratic {
        // Re(M) = A A^T + 0.3 I keeps the whitened imaginary part moderate.
        let a = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let re = &a * a.transpose() + DMatrix::<f64>::identity(dim, dim) * 0.3;
        let mut im = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = rng.gen_range(-0.8..0.8);
                im[(i, j)] = v;
                im[(j, i)] = v;
            }
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
        let b = DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7))
        });
        let c = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        ComplexQuadratic::new(m, b, c).unwrap()
    }

    #[test]
    fn standard_gaussian_values() {
        let tau = std::f64::consts::TAU;
        for m in 1..5usize {
            let q = ComplexQuadratic::new(
                DMatrix::identity(m, m),
                DVector::zeros(m),
                Complex64::from(0.0),
            )
            .unwrap();
            let got = gauss_integral(&q).unwrap();
            assert_relative_eq!(got.re, tau.powf(m as f64 / 2.0), max_relative = 1e-14);
            assert!(got.im.abs() < 1e-14);
        }
        // M = 2 I_1, b = 0: integral of exp(-x^2) = sqrt(pi).
        let q = ComplexQuadratic::new(
            DMatrix::identity(1, 1) * Complex64::from(2.0),
            DVector::zeros(1),
            Complex64::from(0.0),
        )
        .unwrap();
        let got = gauss_integral(&q).unwrap();
        assert_relative_eq!(got.re, std::f64::consts::PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_instances() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = Complex64::from(0.5);
        assert!(matches!(
            ComplexQuadratic::new(m, DVector::zeros(2), Complex64::from(0.0)),
            Err(GaussianError::NotSymmetric(_))
        ));
        let m = DMatrix::<Complex64>::identity(2, 2) * Complex64::from(-1.0);
        assert!(matches!(
            ComplexQuadratic::new(m, DVector::zeros(2), Complex64::from(0.0)),
            Err(GaussianError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn engine_matches_quadrature_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for trial in 0..50 {
            let dim = 1 + (trial % 6);
            let q = random_instance(dim, &mut rng);
            let closed = gauss_integral(&q).unwrap();
            let quad = quadrature_oracle(&q).unwrap();
            let rel = (closed - quad).norm() / closed.norm();
            assert!(rel < 1e-8, "dim {dim} trial {trial}: rel err {rel:.3e}");
        }
    }

    #[test]
    fn a_chi_identity_and_orthogonal_give_pi_power() {
        let pi = std::f64::consts::PI;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..5usize {
            for dg in 0..d {
                if dg > d - 1 {
                    continue;
                }
                let dims = SplitDims::new(d, dg).unwrap();
                let n = dims.real_dim();
                let id = SymplecticMatrix::standard(DMatrix::identity(n, n)).unwrap();
                let got = a_chi(&id, dims).unwrap();
                assert_relative_eq!(got.re, pi.powi((d - 1) as i32), max_relative = 1e-10);
                assert!(got.im.abs() < 1e-10);

                let u = random_orthogonal_symplectic(dims.n(), &mut rng);
                let got = a_chi(&u, dims).unwrap();
                assert_relative_eq!(got.re, pi.powi((d - 1) as i32), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn a_chi_shear_matches_direct_quadrature() {
        // d = 2, d_G = 0, B a shear: direct 2D quadrature of the integrand.
        let dims = SplitDims::new(2, 0).unwrap();
        let s = 0.7;
        let b = SymplecticMatrix::standard(DMatrix::from_row_slice(2, 2, &[1.0, s, 0.0, 1.0]))
            .unwrap();
        let got = a_chi(&b, dims).unwrap();

        let mut sum = 0.0f64;
        let h = 0.01;
        let r = 8.0;
        let n = (2.0 * r / h) as i64;
        for i in 0..=n {
            let x = -r + i as f64 * h;
            let wi = if i == 0 || i == n { 0.5 } else { 1.0 };
            for j in 0..=n {
                let y = -r + j as f64 * h;
                let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
                // h-block only (d_G = 0): exponent -|u|^2/2 - |B u|^2/2.
                let bu = (x + s * y, y);
                let e = -0.5 * (x * x + y * y) - 0.5 * (bu.0 * bu.0 + bu.1 * bu.1);
                sum += wi * wj * e.exp();
            }
        }
        let quad = sum * h * h;
        assert_relative_eq!(got.re, quad, max_relative = 1e-6);
        assert!(got.im.abs() < 1e-10);
    }

    #[test]
    fn diag_case_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // Zero displacements: (pi^{d-1-d_G}, pi^{d_G}).
        let dims = SplitDims::new(3, 1).unwrap();
        let z1 = BlockVector::zero(dims);
        let z2 = BlockVector::zero(dims);
        let ((hc, vc), (he, ve)) = diag_case_integrals(dims, &z1, &z2).unwrap();
        let pi = std::f64::consts::PI;
        assert_relative_eq!(hc.re, pi, max_relative = 1e-14);
        assert_relative_eq!(vc.re, pi, max_relative = 1e-14);
        assert!((hc - he).norm() < 1e-10);
        assert!((vc - ve).norm() < 1e-10);

        // Equal horizontal blocks: horizontal value pi^{d-1-d_G}.
        let mut v1 = BlockVector::zero(dims);
        let mut v2 = BlockVector::zero(dims);
        for k in 0..dims.h_dim() {
            let x = rng.gen_range(-1.0..1.0);
            v1.h[k] = x;
            v2.h[k] = x;
        }
        let ((hc, _), (he, _)) = diag_case_integrals(dims, &v1, &v2).unwrap();
        assert_relative_eq!(hc.re, pi, max_relative = 1e-12);
        assert!((hc - he).norm() < 1e-10);

        // Random small blocks, d = 3, d_G = 1: routes agree to 1e-10.
        for _ in 0..40 {
            let mut v1 = BlockVector::zero(dims);
            let mut v2 = BlockVector::zero(dims);
            for k in 0..dims.d_g {
                v1.t[k] = rng.gen_range(-0.8..0.8);
                v2.t[k] = rng.gen_range(-0.8..0.8);
            }
            for k in 0..dims.h_dim() {
                v1.h[k] = rng.gen_range(-0.8..0.8);
                v2.h[k] = rng.gen_range(-0.8..0.8);
            }
            let ((hc, vc), (he, ve)) = diag_case_integrals(dims, &v1, &v2).unwrap();
            assert!((hc - he).norm() <= 1e-10 * hc.norm().max(1.0));
            assert!((vc - ve).norm() <= 1e-10 * vc.norm().max(1.0));
        }
    }

    #[test]
    fn vt_integral_against_raw_quadrature() {
        // d_G = 1: check the closed form against brute 2D quadrature of the
        // actual integrand with the i-coupled transverse term.
        let y = 0.6;
        let v1t = 0.3;
        let h = 0.02;
        let r = 9.0;
        let n = (2.0 * r / h) as i64;
        let mut sum = Complex64::from(0.0);
        for i in 0..=n {
            let uv = -r + i as f64 * h;
            let wi = if i == 0 || i == n { 0.5 } else { 1.0 };
            for j in 0..=n {
                let ut = -r + j as f64 * h;
                let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
                let expo = Complex64::new(
                    -v1t * v1t - ut * ut - 0.5 * uv * uv - 0.5 * (ut - y) * (ut - y),
                    -(uv * (ut + y)),
                );
                sum += Complex64::from(wi * wj) * expo.exp();
            }
        }
        let quad = sum * Complex64::from(h * h);
        let expect = std::f64::consts::PI * (-v1t * v1t - y * y).exp();
        assert!(
            (quad - Complex64::from(expect)).norm() < 1e-8 * expect,
            "vt quadrature {quad} vs closed {expect}"
        );
    }
}
