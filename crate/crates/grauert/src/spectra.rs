//! Exact spectral side of the torus model: Laplacian modes, compactly
//! supported cutoffs with cached Fourier transforms, and lattice-sum
//! evaluation of the tempered equivariant kernels and Weyl sums.
//!
//! Complexified eigenfunctions on `X^tau` are
//! `phi~_k(x + i p) = (2 pi)^{-d/2} exp(i k . x - k . p)`, so every kernel
//! here is an explicit sum over `k in Z^d`. Sums follow a fixed
//! lexicographic enumeration and are reduced chunkwise with compensated
//! addition, so results are bit-stable and independent of the worker count.
//!
//! The Fourier convention is `f^(s) = (2 pi)^{-1/2} int exp(-i s t) f(t) dt`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GroupAction, GroupElement, TorusModel, TubePoint};

#[derive(Error, Debug)]
pub enum SpectraError {
    #[error("mode enumeration would exceed the cap of {cap} (needs about {need})")]
    EnumerationCap { cap: usize, need: usize },
    #[error("isotype does not match the configured action: {0}")]
    IsotypeMismatch(String),
    #[error("quadrature failed to converge for the sphere profile at r = {0}")]
    QuadratureDiverged(f64),
    #[error("invalid cutoff: {0}")]
    BadCutoff(String),
}

/// A lattice eigenmode `k` of the torus Laplacian, with `mu = |k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: Vec<i64>,
    pub mu2: i64,
    pub mu: f64,
}

impl Mode {
    pub fn new(k: Vec<i64>) -> Self {
        let mu2: i64 = k.iter().map(|&v| v * v).sum();
        Self { k, mu2, mu: (mu2 as f64).sqrt() }
    }
}

/// Character labels for the abelian symmetries of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Isotype {
    /// No restriction: the full kernel (sum of all isotypes).
    All,
    /// Subtorus characters: requires `k . xi_i = nu_i` for every generator.
    Subtorus(Vec<i64>),
    /// Finite cyclic: requires `k . xi = nu (mod m)`.
    Cyclic(u32),
}

impl Isotype {
    /// Does mode `k` lie in this isotypical component?
    pub fn selects(&self, action: &GroupAction, k: &[i64]) -> Result<bool, SpectraError> {
        match (self, action) {
            (Isotype::All, _) => Ok(true),
            (Isotype::Subtorus(nu), GroupAction::Subtorus { generators }) => {
                if nu.len() != generators.len() {
                    return Err(SpectraError::IsotypeMismatch(format!(
                        "{} labels for {} generators",
                        nu.len(),
                        generators.len()
                    )));
                }
                Ok(generators
                    .iter()
                    .zip(nu.iter())
                    .all(|(xi, &target)| dot_ik(k, xi) == target))
            }
            (Isotype::Cyclic(nu), GroupAction::FiniteCyclic { generator, m }) => {
                let v = dot_ik(k, generator).rem_euclid(i64::from(*m));
                Ok(v == i64::from(*nu))
            }
            (other, action) => Err(SpectraError::IsotypeMismatch(format!(
                "{other:?} against {action:?}"
            ))),
        }
    }

    /// Character value `Xi_nu(g)`; the convention matches the labels used by
    /// [`Isotype::selects`], i.e. the mode `k` transforms with
    /// `exp(-i k . shift(g))`.
    pub fn character(
        &self,
        model: &TorusModel,
        g: &GroupElement,
    ) -> Result<Complex64, SpectraError> {
        match (self, g) {
            (_, GroupElement::Identity) => Ok(Complex64::from(1.0)),
            (Isotype::Subtorus(nu), GroupElement::Angles(s)) => {
                if nu.len() != s.len() {
                    return Err(SpectraError::IsotypeMismatch("angle count".into()));
                }
                let phase: f64 = nu.iter().zip(s.iter()).map(|(&n, &si)| n as f64 * si).sum();
                Ok(Complex64::from_polar(1.0, -phase))
            }
            (Isotype::Cyclic(nu), GroupElement::Cyclic(j)) => {
                let m = match &model.action {
                    GroupAction::FiniteCyclic { m, .. } => f64::from(*m),
                    _ => return Err(SpectraError::IsotypeMismatch("not a cyclic action".into())),
                };
                let phase = std::f64::consts::TAU * f64::from(*nu) * f64::from(*j) / m;
                Ok(Complex64::from_polar(1.0, -phase))
            }
            (Isotype::All, _) => Err(SpectraError::IsotypeMismatch(
                "character of the unrestricted kernel is undefined".into(),
            )),
            _ => Err(SpectraError::IsotypeMismatch("element/label mismatch".into())),
        }
    }

    /// `dim(nu)`: always 1 for the abelian groups of this model.
    pub fn dim(&self) -> f64 {
        1.0
    }
}

fn dot_ik(k: &[i64], xi: &[i64]) -> i64 {
    k.iter().zip(xi.iter()).map(|(&a, &b)| a * b).sum()
}

/// Enumerate all modes with `|k| <= radius` satisfying the isotype
/// selector, in lexicographic order. `cap` guards the total count.
pub fn enumerate_modes(
    model: &TorusModel,
    radius: f64,
    iso: &Isotype,
    cap: usize,
) -> Result<Vec<Mode>, SpectraError> {
    enumerate_modes_shell(model, 0.0, radius, iso, cap)
}

/// Enumerate modes in the shell `lo <= |k| <= hi` (lexicographic order).
///
/// Subtorus isotypes whose generators are signed coordinate axes pin those
/// coordinates directly, which keeps the 3d Weyl sums affordable.
pub fn enumerate_modes_shell(
    model: &TorusModel,
    lo: f64,
    hi: f64,
    iso: &Isotype,
    cap: usize,
) -> Result<Vec<Mode>, SpectraError> {
    let d = model.d;
    if hi < 0.0 || hi < lo {
        return Ok(Vec::new());
    }
    // Pinned coordinates from axis generators.
    let mut pinned: Vec<Option<i64>> = vec![None; d];
    if let (Isotype::Subtorus(nu), GroupAction::Subtorus { generators }) = (iso, &model.action) {
        for (xi, &target) in generators.iter().zip(nu.iter()) {
            let nonzero: Vec<usize> = (0..d).filter(|&j| xi[j] != 0).collect();
            if nonzero.len() == 1 && xi[nonzero[0]].abs() == 1 {
                pinned[nonzero[0]] = Some(target * xi[nonzero[0]].signum());
            }
        }
    }
    let r = hi.floor() as i64;
    let mut est: f64 = 1.0;
    for j in 0..d {
        if pinned[j].is_none() {
            est *= 2.0 * r as f64 + 1.0;
        }
    }
    if est > cap as f64 {
        return Err(SpectraError::EnumerationCap { cap, need: est as usize });
    }

    let lo2 = if lo <= 0.0 { 0 } else { (lo * lo).ceil() as i64 };
    let hi2 = (hi * hi).floor() as i64;
    let mut out = Vec::new();
    let mut k = vec![0i64; d];
    enumerate_rec(model, iso, &pinned, 0, r, lo2, hi2, &mut k, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    model: &TorusModel,
    iso: &Isotype,
    pinned: &[Option<i64>],
    depth: usize,
    r: i64,
    lo2: i64,
    hi2: i64,
    k: &mut Vec<i64>,
    out: &mut Vec<Mode>,
) -> Result<(), SpectraError> {
    let d = model.d;
    if depth == d {
        let mu2: i64 = k.iter().map(|&v| v * v).sum();
        if mu2 >= lo2 && mu2 <= hi2 && iso.selects(&model.action, k)? {
            out.push(Mode::new(k.clone()));
        }
        return Ok(());
    }
    match pinned[depth] {
        Some(v) => {
            k[depth] = v;
            enumerate_rec(model, iso, pinned, depth + 1, r, lo2, hi2, k, out)?;
        }
        None => {
            for v in -r..=r {
                k[depth] = v;
                // Prune on partial norm.
                let partial: i64 = k[..=depth].iter().map(|&x| x * x).sum();
                if partial > hi2 {
                    continue;
                }
                enumerate_rec(model, iso, pinned, depth + 1, r, lo2, hi2, k, out)?;
            }
        }
    }
    Ok(())
}

/// Scaled modified Bessel function `exp(-z) I_0(z)` for `z >= 0`.
///
/// Power series below the crossover, asymptotic series above; both sides
/// agree to better than 1e-13 in the overlap window.
pub fn i0_scaled(z: f64) -> f64 {
    assert!(z >= 0.0, "i0_scaled needs z >= 0");
    if z < 30.0 {
        // I0(z) = sum ((z/2)^{2k} / (k!)^2); all terms positive.
        let q = 0.25 * z * z;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum * (-z).exp()
    } else {
        // e^{-z} I0(z) ~ (2 pi z)^{-1/2} sum_k a_k / (8z)^k with
        // a_k = prod_{j<=k} (2j-1)^2 / j; truncate at the smallest term.
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut prev = f64::INFINITY;
        for k in 1..40u32 {
            let j = k as f64;
            term *= (2.0 * j - 1.0) * (2.0 * j - 1.0) / (j * 8.0 * z);
            if term.abs() >= prev {
                break;
            }
            sum += term;
            prev = term.abs();
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum / (std::f64::consts::TAU * z).sqrt()
    }
}

/// Families of compactly supported cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffFamily {
    /// The bump `exp(-1 / (1 - (t/eps)^2))` on `|t| < eps`.
    Bump,
    /// The autocorrelation `bump * bump(-.)`, supported in `(-2 eps, 2 eps)`,
    /// whose transform is nonnegative.
    AutocorrelatedBump,
}

/// A compactly supported test function with a cached sampled transform.
///
/// The stored grid holds the *envelope*: the transform of the cutoff
/// re-centered at the origin, which is real and even. Centering at `t0`
/// multiplies the transform by `exp(-i s t0)`, applied analytically in
/// [`Cutoff::hat`].
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub family: CutoffFamily,
    pub epsilon: f64,
    pub t0: f64,
    pub trunc_tol: f64,
    grid: Vec<f64>,
    ds: f64,
    hat_tail: f64,
}

impl Cutoff {
    pub fn new(
        family: CutoffFamily,
        epsilon: f64,
        t0: f64,
        trunc_tol: f64,
    ) -> Result<Self, SpectraError> {
        if !(epsilon > 0.0) {
            return Err(SpectraError::BadCutoff("epsilon must be positive".into()));
        }
        if !(trunc_tol > 0.0 && trunc_tol < 1.0) {
            return Err(SpectraError::BadCutoff("trunc_tol must be in (0, 1)".into()));
        }
        let mut c = Self {
            family,
            epsilon,
            t0,
            trunc_tol,
            grid: Vec::new(),
            ds: 0.0,
            hat_tail: 0.0,
        };
        c.build_grid();
        Ok(c)
    }

    /// Support of the centered family, shifted by `t0`.
    pub fn support(&self) -> (f64, f64) {
        let half = match self.family {
            CutoffFamily::Bump => self.epsilon,
            CutoffFamily::AutocorrelatedBump => 2.0 * self.epsilon,
        };
        (self.t0 - half, self.t0 + half)
    }

    /// Time-side evaluation `chi(t)`.
    pub fn eval_time(&self, t: f64) -> f64 {
        let u = t - self.t0;
        match self.family {
            CutoffFamily::Bump => bump(u, self.epsilon),
            CutoffFamily::AutocorrelatedBump => {
                // (b * b~)(u) = int b(s) b(s - u) ds over the overlap.
                gl_integrate(-self.epsilon, self.epsilon, 96, |s| {
                    bump(s, self.epsilon) * bump(s - u, self.epsilon)
                })
            }
        }
    }

    /// Real even envelope of the transform (the `t0 = 0` transform).
    pub fn hat_envelope(&self, s: f64) -> f64 {
        let a = s.abs();
        let n = self.grid.len();
        if n == 0 {
            return 0.0;
        }
        let x = a / self.ds;
        let j = x.floor() as usize;
        if j + 1 >= n {
            return 0.0; // beyond the grid: tail below hat_tail, documented
        }
        // 4-point Lagrange cubic on the uniform grid (clamped at the left
        // edge using evenness of the envelope).
        let jm1 = if j == 0 { 1 } else { j - 1 };
        let j2 = (j + 2).min(n - 1);
        let t = x - j as f64;
        let fm1 = self.grid[jm1];
        let f0 = self.grid[j];
        let f1 = self.grid[j + 1];
        let f2 = self.grid[j2];
        let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        c0 * fm1 + c1 * f0 + c2 * f1 + c3 * f2
    }

    /// Full transform `chi^(s) = exp(-i s t0) env(s)`.
    pub fn hat(&self, s: f64) -> Complex64 {
        Complex64::from_polar(1.0, -s * self.t0) * Complex64::from(self.hat_envelope(s))
    }

    /// Envelope by direct quadrature (no grid); the oracle for the cache.
    pub fn hat_envelope_direct(&self, s: f64) -> f64 {
        let bhat = bump_hat(s, self.epsilon);
        match self.family {
            CutoffFamily::Bump => bhat,
            CutoffFamily::AutocorrelatedBump => (std::f64::consts::TAU).sqrt() * bhat * bhat,
        }
    }

    /// Half-width `S(tol)`: envelope stays below `tol * env(0)` beyond it.
    pub fn hat_window(&self, tol: f64) -> f64 {
        let peak = self.grid[0].abs().max(1e-300);
        let mut cut = self.grid.len() - 1;
        while cut > 0 && self.grid[cut].abs() < tol * peak {
            cut -= 1;
        }
        ((cut + 1) as f64) * self.ds
    }

    /// Largest grid abscissa; the envelope beyond it is below `hat_tail`.
    pub fn grid_range(&self) -> f64 {
        self.grid.len() as f64 * self.ds
    }

    pub fn hat_tail(&self) -> f64 {
        self.hat_tail
    }

    fn build_grid(&mut self) {
        // Resolve the envelope to ~1e-12 absolute interpolation error:
        // the fourth derivative is bounded by (support)^4 * scale.
        let half_support = match self.family {
            CutoffFamily::Bump => self.epsilon,
            CutoffFamily::AutocorrelatedBump => 2.0 * self.epsilon,
        };
        let ds = 0.005 / half_support;
        let peak = self.hat_envelope_direct(0.0);
        let tail_stop = 1e-17 * peak.abs();
        let mut grid = Vec::with_capacity(1 << 16);
        let mut below = 0usize;
        let mut j = 0usize;
        loop {
            let v = self.hat_envelope_direct(j as f64 * ds);
            grid.push(v);
            if v.abs() < tail_stop {
                below += 1;
                if below > 200 {
                    break;
                }
            } else {
                below = 0;
            }
            j += 1;
            if j > 2_000_000 {
                break;
            }
        }
        self.ds = ds;
        self.hat_tail = tail_stop;
        self.grid = grid;
    }
}

fn bump(t: f64, eps: f64) -> f64 {
    let u = t / eps;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// `(2 pi)^{-1/2} int bump(t) exp(-i s t) dt`, real and even.
fn bump_hat(s: f64, eps: f64) -> f64 {
    // Even integrand: 2 int_0^eps bump cos(st) dt.
    let val = gl_integrate(0.0, eps, 128, |t| bump(t, eps) * (s * t).cos());
    2.0 * val / (std::f64::consts::TAU).sqrt()
}

/// Composite Gauss-Legendre quadrature with `panels x 16` nodes.
fn gl_integrate<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    // 16-point Gauss-Legendre nodes/weights on [-1, 1].
    const X: [f64; 8] = [
        0.09501250983763744,
        0.2816035507792589,
        0.45801677765722737,
        0.6178762444026438,
        0.755404408355003,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.18260341504492358,
        0.16915651939500254,
        0.14959598881657674,
        0.12462897125553388,
        0.09515851168249279,
        0.062253523938647894,
        0.027152459411754096,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for i in 0..8 {
            total += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
        }
    }
    total * (b - a) / (2.0 * panels as f64)
}

/// Result of a truncated kernel evaluation.
#[derive(Debug, Clone)]
pub struct KernelValue {
    pub value: Complex64,
    pub n_modes: usize,
    /// Upper estimate for the modulus of the discarded tail.
    pub trunc_bound: f64,
}

/// Tempered equivariant kernel
/// `P(x, y) = sum_k chi^(lambda - mu_k) e^{-2 tau mu_k}
///            phi~_k(x) conj(phi~_k(y))`
/// truncated to the window where the transform envelope exceeds
/// `trunc_tol` relative to its peak.
pub fn poisson_kernel(
    model: &TorusModel,
    cutoff: &Cutoff,
    iso: &Isotype,
    lambda: f64,
    pt1: &TubePoint,
    pt2: &TubePoint,
    cap: usize,
) -> Result<KernelValue, SpectraError> {
    let window = cutoff.hat_window(cutoff.trunc_tol);
    let lo = (lambda - window).max(0.0);
    let hi = lambda + window;
    let modes = enumerate_modes_shell(model, lo, hi, iso, cap)?;
    let d = model.d;
    let tau = model.tau;
    let norm = (std::f64::consts::TAU).powi(-(d as i32));
    let x_diff = crate::geometry::angle_diff(&pt1.x, &pt2.x);
    let p_sum = &pt1.p + &pt2.p;

    let term = |m: &Mode| -> Complex64 {
        let hat = cutoff.hat(lambda - m.mu);
        if hat.norm_sqr() == 0.0 {
            return Complex64::from(0.0);
        }
        let mut phase = 0.0f64;
        let mut decay = -2.0 * tau * m.mu;
        for (j, &kj) in m.k.iter().enumerate() {
            let kf = kj as f64;
            phase += kf * x_diff[j];
            decay -= kf * p_sum[j];
        }
        hat * Complex64::from(norm * decay.exp()) * Complex64::from_polar(1.0, phase)
    };

    let value = deterministic_sum(&modes, term);

    // Tail estimate: everything outside the window has envelope below
    // trunc_tol * peak, and the per-mode weight is bounded by
    // (2 pi)^{-d} * envelope. Count the remaining grid-covered shells.
    let peak = cutoff.hat_envelope(0.0).abs();
    let full = cutoff.grid_range();
    // Crude lattice count of { a <= |k| <= b }: ball volumes padded by one
    // lattice layer, |B_r| = area(S^{d-1}) r^d / d.
    let shell = |a: f64, b: f64| -> f64 {
        let ball = |r: f64| -> f64 {
            if r <= 0.0 {
                0.0
            } else {
                crate::geometry::unit_sphere_area(d - 1) * (r + 1.0).powf(d as f64) / d as f64
            }
        };
        (ball(b) - ball(a)).max(0.0)
    };
    let excluded = shell(hi, lambda + full) + shell((lambda - full).max(0.0), lo);
    let trunc_bound = norm * cutoff.trunc_tol * peak * excluded
        + norm * cutoff.hat_tail() * shell(0.0, lambda + full + 10.0);

    Ok(KernelValue { value, n_modes: modes.len(), trunc_bound })
}

/// Deterministic chunked compensated reduction over the fixed mode order.
fn deterministic_sum<F>(modes: &[Mode], term: F) -> Complex64
where
    F: Fn(&Mode) -> Complex64 + Sync,
{
    const CHUNK: usize = 4096;
    let partials: Vec<Complex64> = modes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sum = Complex64::from(0.0);
            let mut comp = Complex64::from(0.0);
            for m in chunk {
                let y = term(m) - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            sum
        })
        .collect();
    let mut sum = Complex64::from(0.0);
    let mut comp = Complex64::from(0.0);
    for p in partials {
        let y = p - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// The spherical weight profile
/// `W(r) = tau^{d-1} int_{S^{d-1}} exp(-2 tau r (1 + <eta, w>)) dw`,
/// i.e. the tempered squared norm `e^{-2 tau r} |phi~|^2`-integral carried
/// by a mode of frequency `r`. Satisfies `W(r) (r / (pi tau))^{(d-1)/2} -> 1`.
pub fn q_tau_profile(model: &TorusModel, r: f64) -> Result<f64, SpectraError> {
    assert!(r >= 0.0);
    let tau = model.tau;
    let d = model.d;
    match d {
        1 => Ok(1.0 + (-4.0 * tau * r).exp()),
        2 => Ok(std::f64::consts::TAU * tau * i0_scaled(2.0 * tau * r)),
        _ => {
            // tau^{d-1} |S^{d-2}| int_0^pi exp(-2 tau r (1 + cos a)) sin^{d-2} a da
            let pref = tau.powi((d - 1) as i32) * crate::geometry::unit_sphere_area(d - 2);
            let f = |a: f64| (-2.0 * tau * r * (1.0 + a.cos())).exp() * a.sin().powi((d - 2) as i32);
            let mut panels = 64;
            let mut last = gl_integrate(0.0, std::f64::consts::PI, panels, f);
            for _ in 0..6 {
                panels *= 2;
                let next = gl_integrate(0.0, std::f64::consts::PI, panels, f);
                let err = (next - last).abs() / next.abs().max(1e-300);
                last = next;
                if err < 1e-12 {
                    return Ok(pref * last);
                }
            }
            Err(SpectraError::QuadratureDiverged(r))
        }
    }
}

/// Sphere-quadrature route for [`q_tau_profile`] in d = 2 (trapezoid over
/// the circle, spectrally accurate); cross-checks the Bessel closed form.
pub fn q_tau_profile_quadrature(model: &TorusModel, r: f64) -> f64 {
    assert_eq!(model.d, 2);
    let tau = model.tau;
    let n = 4096;
    let h = std::f64::consts::TAU / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let a = j as f64 * h;
        sum += (-2.0 * tau * r * (1.0 + a.cos())).exp();
    }
    tau * sum * h
}

/// Squared `L^2(X^tau)` norm of the complexified eigenfunction of mode `k`,
/// with the `exp(2 tau mu)` growth factored out:
/// `e^{-2 tau mu} |phi~_k|^2_{L^2} = W(mu)`.
///
/// The volume form on `X^tau` is exactly `tau^{d-1} dx dS(omega)` (angle
/// measure times solid angle), and the `(2 pi)^{-d}` eigenfunction
/// normalization cancels against the `x`-integral; both constants are
/// explicit here rather than folded into a fitted normalization.
pub fn complexified_norm_scaled(model: &TorusModel, mu: f64) -> Result<f64, SpectraError> {
    q_tau_profile(model, mu)
}

/// Unscaled norm `|phi~_k|^2_{L^2(X^tau)} = e^{2 tau mu} W(mu)`; overflows
/// for `tau mu` beyond ~350, use the scaled version in sums.
pub fn complexified_norm(model: &TorusModel, mode: &Mode) -> Result<f64, SpectraError> {
    Ok((2.0 * model.tau * mode.mu).exp() * complexified_norm_scaled(model, mode.mu)?)
}

/// The tempered Weyl sum
/// `P_nu(lambda) = sum_{|k| <= lambda, k in nu} e^{-2 tau mu} |phi~_k|^2
///               = sum W(mu_k)`,
/// evaluated exactly over the enumerated modes. The profile is memoized on
/// the integer `|k|^2`.
pub fn weyl_sum(
    model: &TorusModel,
    iso: &Isotype,
    lambda: f64,
    cap: usize,
) -> Result<f64, SpectraError> {
    let modes = enumerate_modes(model, lambda, iso, cap)?;
    let mut cache: std::collections::HashMap<i64, f64> = std::collections::HashMap::new();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for m in &modes {
        let w = match cache.get(&m.mu2) {
            Some(&w) => w,
            None => {
                let w = q_tau_profile(model, m.mu)?;
                cache.insert(m.mu2, w);
                w
            }
        };
        let y = w - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// `sup_x |phi~_k(x)|^2 / |phi~_k|^2` over a sphere grid, returned with the
/// maximizing direction. The supremum of the Husimi density of a single
/// lattice mode; the `x`-dependence drops out.
pub fn husimi_sup(
    model: &TorusModel,
    mode: &Mode,
    grid: usize,
) -> Result<(f64, DVector<f64>), SpectraError> {
    let d = model.d;
    let tau = model.tau;
    let norm_scaled = complexified_norm_scaled(model, mode.mu)?; // e^{-2 tau mu} ||.||^2
    let pref = (std::f64::consts::TAU).powi(-(d as i32));
    // |phi~|^2 = (2pi)^{-d} e^{-2 k . p}; scaled by e^{-2 tau mu}:
    // ratio(p) = (2pi)^{-d} e^{-2 k.p - 2 tau mu} / (e^{-2 tau mu} ||.||^2).
    let kvec = DVector::from_fn(d, |j, _| mode.k[j] as f64);
    let mut best = f64::NEG_INFINITY;
    let mut best_p = DVector::zeros(d);
    let mut consider = |p: DVector<f64>| {
        let val = pref * (-2.0 * (kvec.dot(&p) + tau * mode.mu)).exp() / norm_scaled;
        if val > best {
            best = val;
            best_p = p;
        }
    };
    match d {
        2 => {
            for j in 0..grid {
                let a = std::f64::consts::TAU * j as f64 / grid as f64;
                consider(DVector::from_vec(vec![tau * a.cos(), tau * a.sin()]));
            }
        }
        3 => {
            let n_polar = grid.max(8);
            for i in 0..=n_polar {
                let th = std::f64::consts::PI * i as f64 / n_polar as f64;
                let n_az = (2 * n_polar).max(1);
                for j in 0..n_az {
                    let ph = std::f64::consts::TAU * j as f64 / n_az as f64;
                    consider(DVector::from_vec(vec![
                        tau * th.sin() * ph.cos(),
                        tau * th.sin() * ph.sin(),
                        tau * th.cos(),
                    ]));
                }
            }
        }
        _ => {
            return Err(SpectraError::IsotypeMismatch(
                "husimi grid implemented for d = 2, 3".into(),
            ))
        }
    }
    // The grid maximum sits near p = -tau k / |k|; polish it exactly.
    if mode.mu > 0.0 {
        consider(&kvec * (-tau / mode.mu));
    }
    Ok((best, best_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GroupAction;
    use approx::assert_relative_eq;

    fn model_trivial(d: usize, tau: f64) -> TorusModel {
        TorusModel::new(d, tau, GroupAction::Trivial).unwrap()
    }

    #[test]
    fn mode_enumeration_counts() {
        let m = model_trivial(2, 0.5);
        // |k| <= 1.5: 9 lattice points.
        let modes = enumerate_modes(&m, 1.5, &Isotype::All, 1 << 20).unwrap();
        assert_eq!(modes.len(), 9);

        // Gauss circle: |k| <= 100 within 1% of pi * 100^2.
        let modes = enumerate_modes(&m, 100.0, &Isotype::All, 1 << 24).unwrap();
        let expect = std::f64::consts::PI * 100.0 * 100.0;
        assert!((modes.len() as f64 - expect).abs() < 0.01 * expect);

        // Cap guard.
        assert!(matches!(
            enumerate_modes(&m, 10000.0, &Isotype::All, 1000),
            Err(SpectraError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn isotype_partition_is_exact() {
        let m = TorusModel::new(
            2,
            0.5,
            GroupAction::FiniteCyclic { generator: vec![1, 0], m: 3 },
        )
        .unwrap();
        let all = enumerate_modes(&m, 7.0, &Isotype::All, 1 << 20).unwrap();
        let mut sum = 0;
        for nu in 0..3u32 {
            sum += enumerate_modes(&m, 7.0, &Isotype::Cyclic(nu), 1 << 20)
                .unwrap()
                .len();
        }
        assert_eq!(sum, all.len());
    }

    #[test]
    fn axis_pinned_subtorus_enumeration() {
        let m = TorusModel::new(
            3,
            0.5,
            GroupAction::Subtorus { generators: vec![vec![1, 0, 0]] },
        )
        .unwrap();
        let modes = enumerate_modes(&m, 30.0, &Isotype::Subtorus(vec![2]), 1 << 22).unwrap();
        assert!(modes.iter().all(|mm| mm.k[0] == 2));
        // Count of a 2d disc of radius sqrt(900 - 4).
        let expect = std::f64::consts::PI * (900.0 - 4.0);
        assert!((modes.len() as f64 - expect).abs() < 0.03 * expect);
    }

    #[test]
    fn bessel_scaled_values() {
        // Cross-check power series vs asymptotic series in the overlap.
        for &z in &[25.0, 28.0, 29.9, 30.1, 32.0, 40.0] {
            let power = {
                let q = 0.25 * z * z;
                let mut term = 1.0f64;
                let mut sum = 1.0f64;
                for k in 1..400 {
                    term *= q / ((k * k) as f64);
                    sum += term;
                }
                sum * (-z as f64).exp()
            };
            let got = i0_scaled(z);
            assert_relative_eq!(got, power, max_relative = 1e-13);
        }
        // Known value: I0(1) = 1.2660658777520083.
        assert_relative_eq!(i0_scaled(1.0), 1.2660658777520083 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn cutoff_hat_symmetry_and_positivity() {
        let c = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.4, 0.0, 1e-10).unwrap();
        // chi^(0) = (2 pi)^{-1/2} int chi > 0.
        assert!(c.hat_envelope(0.0) > 0.0);
        // Even and real; interpolation matches direct quadrature.
        for &s in &[0.3, 1.7, 5.0, 11.3, 23.7] {
            assert_relative_eq!(c.hat_envelope(s), c.hat_envelope(-s), epsilon = 1e-15);
            let direct = c.hat_envelope_direct(s);
            assert!(
                (c.hat_envelope(s) - direct).abs() < 1e-11 * c.hat_envelope(0.0),
                "interp error at s = {s}"
            );
        }
        // Autocorrelated family: nonnegative transform.
        let mut s = 0.0;
        let mut minv: f64 = f64::INFINITY;
        while s < 60.0 {
            minv = minv.min(c.hat_envelope(s));
            s += 0.01;
        }
        assert!(minv >= -1e-12 * c.hat_envelope(0.0));

        // chi(0) > 0 and support as documented.
        assert!(c.eval_time(0.0) > 0.0);
        assert_eq!(c.support(), (-0.8, 0.8));
        assert_eq!(c.eval_time(0.81), 0.0);
    }

    #[test]
    fn cutoff_fourier_inversion_at_zero() {
        // chi(0) = (2 pi)^{-1/2} int chi^(s) ds.
        let c = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.5, 0.0, 1e-10).unwrap();
        let mut integral = 0.0;
        let ds = 0.01;
        let mut s = ds; // even: 2 * sum over s > 0 plus s = 0 term
        while s < c.grid_range() {
            integral += 2.0 * c.hat_envelope(s) * ds;
            s += ds;
        }
        integral += c.hat_envelope(0.0) * ds;
        let lhs = c.eval_time(0.0);
        let rhs = integral / (std::f64::consts::TAU).sqrt();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-4);
    }

    #[test]
    fn kernel_matches_bruteforce_small_window() {
        // d = 2, tau = 0.5, lambda = 0: every mode weight is recomputed by a
        // plain double loop with directly quadratured transforms. The loop
        // radius covers the kernel's own truncation window (the transform
        // envelope decays too slowly for a tiny fixed radius to reach 1e-12).
        let model = model_trivial(2, 0.5);
        let cutoff = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.5, 0.0, 1e-10).unwrap();
        let pt = model.point(vec![0.3, 1.2], vec![0.0, 0.5]).unwrap();
        let got = poisson_kernel(&model, &cutoff, &Isotype::All, 0.0, &pt, &pt, 1 << 22).unwrap();

        let w = cutoff.hat_window(cutoff.trunc_tol);
        let hi2 = (w * w).floor() as i64;
        let r = w.ceil() as i64;
        let mut brute = Complex64::from(0.0);
        for k1 in -r..=r {
            for k2 in -r..=r {
                let mu2 = k1 * k1 + k2 * k2;
                if mu2 > hi2 {
                    continue;
                }
                let mu = (mu2 as f64).sqrt();
                let hat = cutoff.hat_envelope(0.0 - mu);
                let decay =
                    (-2.0 * 0.5 * mu - (k1 as f64 * pt.p[0] + k2 as f64 * pt.p[1]) * 2.0).exp();
                brute += Complex64::from(hat * decay / (std::f64::consts::TAU).powi(2));
            }
        }
        assert!(
            (got.value - brute).norm() <= 1e-12 * brute.norm(),
            "kernel {} vs brute {}",
            got.value,
            brute
        );
    }

    #[test]
    fn kernel_hermitian_conjugate_swap_and_partition() {
        let model = TorusModel::new(
            2,
            0.5,
            GroupAction::FiniteCyclic { generator: vec![1, 0], m: 3 },
        )
        .unwrap();
        // Centered at t0 != 0 so the conjugation actually flips something.
        let chi = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.3, 0.25, 1e-10).unwrap();
        let chi_minus = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.3, -0.25, 1e-10).unwrap();
        let x = model.point(vec![0.2, 0.9], vec![0.0, 0.5]).unwrap();
        let y = model.point(vec![0.5, 1.1], vec![0.0, 0.5]).unwrap();
        let lambda = 40.0;
        let cap = 1 << 22;
        for nu in 0..3u32 {
            let iso = Isotype::Cyclic(nu);
            let a = poisson_kernel(&model, &chi, &iso, lambda, &x, &y, cap).unwrap();
            let b = poisson_kernel(&model, &chi_minus, &iso, lambda, &y, &x, cap).unwrap();
            assert!(
                (a.value - b.value.conj()).norm() <= 1e-12 * a.value.norm().max(1e-30),
                "conjugate swap failed for nu = {nu}"
            );
        }
        // Partition: sum over nu equals the full kernel.
        let full = poisson_kernel(&model, &chi, &Isotype::All, lambda, &x, &y, cap).unwrap();
        let mut sum = Complex64::from(0.0);
        for nu in 0..3u32 {
            sum += poisson_kernel(&model, &chi, &Isotype::Cyclic(nu), lambda, &x, &y, cap)
                .unwrap()
                .value;
        }
        assert!((full.value - sum).norm() <= 1e-12 * full.value.norm());
    }

    #[test]
    fn kernel_diagonal_reality_positivity_equivariance_flow() {
        let model = TorusModel::new(
            2,
            0.5,
            GroupAction::FiniteCyclic { generator: vec![1, 0], m: 3 },
        )
        .unwrap();
        let chi = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.4, 0.0, 1e-10).unwrap();
        let x = model.point(vec![4.0, 0.7], vec![0.25, 0.25 * 3.0f64.sqrt()]).unwrap();
        let lambda = 60.0;
        let cap = 1 << 22;
        let iso = Isotype::Cyclic(1);
        let diag = poisson_kernel(&model, &chi, &iso, lambda, &x, &x, cap).unwrap();
        assert!(diag.value.im.abs() <= 1e-12 * diag.value.norm());
        assert!(diag.value.re >= -1e-10 * diag.value.norm());

        // Equivariance on the diagonal.
        let gx = model.group_act(&GroupElement::Cyclic(2), &x).unwrap();
        let diag_g = poisson_kernel(&model, &chi, &iso, lambda, &gx, &gx, cap).unwrap();
        assert!((diag.value - diag_g.value).norm() <= 1e-12 * diag.value.norm());

        // Flow covariance of the full kernel in modulus.
        let y = model.point(vec![4.2, 0.9], vec![0.25, 0.25 * 3.0f64.sqrt()]).unwrap();
        let t = 0.37;
        let a = poisson_kernel(&model, &chi, &Isotype::All, lambda, &x, &y, cap).unwrap();
        let b = poisson_kernel(
            &model,
            &chi,
            &Isotype::All,
            lambda,
            &model.geodesic_flow(&x, t),
            &model.geodesic_flow(&y, t),
            cap,
        )
        .unwrap();
        assert!((a.value.norm() - b.value.norm()).abs() <= 1e-10 * a.value.norm());
    }

    #[test]
    fn truncation_stable_under_window_doubling() {
        let model = model_trivial(2, 0.5);
        let tight = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.4, 0.0, 1e-10).unwrap();
        let x = model.point(vec![0.0, 0.0], vec![0.0, 0.5]).unwrap();
        let lambda = 80.0;
        let v1 = poisson_kernel(&model, &tight, &Isotype::All, lambda, &x, &x, 1 << 22).unwrap();
        // Re-evaluate with a much smaller tolerance (wider window).
        let wide = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.4, 0.0, 1e-14).unwrap();
        let v2 = poisson_kernel(&model, &wide, &Isotype::All, lambda, &x, &x, 1 << 22).unwrap();
        assert!(v2.n_modes >= v1.n_modes);
        assert!(
            (v1.value - v2.value).norm() <= 1e-9 * v2.value.norm(),
            "window doubling moved the value by {:e}",
            (v1.value - v2.value).norm()
        );
    }

    #[test]
    fn q_profile_closed_form_vs_quadrature_and_limit() {
        let model = model_trivial(2, 0.5);
        // |k| = 0: 2 pi tau.
        let w0 = q_tau_profile(&model, 0.0).unwrap();
        assert_relative_eq!(w0, std::f64::consts::TAU * 0.5, max_relative = 1e-14);
        // Closed form vs direct circle quadrature at r = 50.
        let w = q_tau_profile(&model, 50.0).unwrap();
        let q = q_tau_profile_quadrature(&model, 50.0);
        assert_relative_eq!(w, q, max_relative = 1e-10);
        // Normalized ratio tends to 1.
        let tau = 0.5;
        for &r in &[50.0, 100.0, 200.0] {
            let ratio = q_tau_profile(&model, r).unwrap()
                * (r / (std::f64::consts::PI * tau)).powf(0.5);
            assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio} at r = {r}");
        }
        // d = 3 path.
        let m3 = model_trivial(3, 0.5);
        let w3 = q_tau_profile(&m3, 100.0).unwrap();
        let ratio3 = w3 * (100.0 / (std::f64::consts::PI * 0.5)).powf(1.0);
        assert!((ratio3 - 1.0).abs() < 0.02, "d=3 ratio {ratio3}");
    }

    #[test]
    fn complexified_norm_growth_and_quadrature() {
        let model = model_trivial(2, 0.5);
        // Norm matches dense sphere quadrature.
        let mode = Mode::new(vec![3, 4]);
        let scaled = complexified_norm_scaled(&model, mode.mu).unwrap();
        let mut quad = 0.0;
        let n = 200_000;
        let h = std::f64::consts::TAU / n as f64;
        for j in 0..n {
            let a = j as f64 * h;
            let p = [0.5 * a.cos(), 0.5 * a.sin()];
            quad += (-2.0 * (mode.k[0] as f64 * p[0] + mode.k[1] as f64 * p[1])
                - 2.0 * 0.5 * mode.mu)
                .exp();
        }
        quad *= 0.5 * h; // tau^{d-1} = tau
        assert_relative_eq!(scaled, quad, max_relative = 1e-6);

        // Growth exponent of e^{-2 tau mu} ||.||^2 is -(d-1)/2.
        let w1 = complexified_norm_scaled(&model, 100.0).unwrap();
        let w2 = complexified_norm_scaled(&model, 400.0).unwrap();
        let slope = (w2 / w1).ln() / (4.0f64).ln();
        assert!((slope + 0.5).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn weyl_sum_monotone_and_first_step() {
        let model = TorusModel::new(
            2,
            0.5,
            GroupAction::FiniteCyclic { generator: vec![1, 0], m: 3 },
        )
        .unwrap();
        // Below the first nonzero eigenvalue only k = 0 contributes.
        let small = weyl_sum(&model, &Isotype::Cyclic(0), 0.5, 1 << 20).unwrap();
        let w0 = q_tau_profile(&model, 0.0).unwrap();
        assert_relative_eq!(small, w0, max_relative = 1e-14);
        // Monotone in lambda.
        let mut last = 0.0;
        for &l in &[1.0, 2.0, 5.0, 11.0, 23.0] {
            let v = weyl_sum(&model, &Isotype::Cyclic(0), l, 1 << 22).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn husimi_sup_location_antipodal() {
        let model = model_trivial(2, 0.5);
        let mode = Mode::new(vec![5, 0]);
        let (_, p) = husimi_sup(&model, &mode, 256).unwrap();
        // p antiparallel to k.
        assert!(p[0] < 0.0 && p[0].abs() > 0.49);
        assert!(p[1].abs() < 1e-9);
    }
}
