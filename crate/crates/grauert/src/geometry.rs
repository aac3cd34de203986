//! The flat-torus tube-boundary model.
//!
//! The phase space is `X^tau = T^d x { |p| = tau }` with contact form
//! `alpha = -p . dx`, Reeb field `-(p / tau^2) . d/dx`, and homogeneous
//! geodesic flow `(x, p) -> (x + t p / tau, p)`. Compact abelian symmetry
//! groups act by translations: a subtorus along integer generators, or a
//! finite cyclic shift. The zero locus of the moment map is
//! `Z^tau = { p . xi = 0 }`.
//!
//! Metric convention: pairings of horizontal tangent vectors use
//! `kappa~ = kappa^ / 2`, half of the ambient flat metric; frames returned
//! by [`TorusModel::frame`] are orthonormal for `kappa~`, which makes their
//! ambient (`kappa^`) length `sqrt(2)`. Distances on the sphere factor
//! (arcs) are reported in the ambient metric and halve-scaled where noted.
//!
//! `frame` plus [`TorusModel::displace`] form a first-order surrogate of
//! normal Heisenberg coordinates: linear motion along the Reeb and frame
//! directions followed by renormalization of `|p|`. It agrees with true
//! adapted coordinates to second order, which is all the leading-order
//! comparisons need at the `1/sqrt(lambda)` displacement scale.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::symplectic::{symplectic_defect, SymplecticMatrix};

const TAU2: f64 = std::f64::consts::TAU; // 2 pi

#[derive(Error, Debug)]
pub enum GeometryError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("point has |p| = {0:.6e}, expected {1:.6e}")]
    OffShell(f64, f64),
    #[error("point is not on the moment zero locus (moment norm {0:.3e})")]
    OffZeroLocus(f64),
    #[error("displacement of size {0:.3e} exceeds the chart radius {1:.3e}")]
    DisplacementTooLarge(f64, f64),
    #[error("operation requires a free subtorus action")]
    NotFreeSubtorus,
    #[error("invalid group element: {0}")]
    BadGroupElement(String),
}

/// Compact abelian symmetry of the torus model.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupAction {
    /// No symmetry; `d_G = 0` and `Z^tau = X^tau`.
    Trivial,
    /// Subtorus generated by translations along independent integer vectors.
    Subtorus { generators: Vec<Vec<i64>> },
    /// Cyclic shift by `2 pi / m` along an integer direction.
    FiniteCyclic { generator: Vec<i64>, m: u32 },
}

/// Group element: angle parameters for a subtorus, an index mod `m` for a
/// finite cyclic action, and nothing for the trivial group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Identity,
    Angles(Vec<f64>),
    Cyclic(u32),
}

/// The model `X^tau` over `T^d` with an optional group action.
#[derive(Debug, Clone)]
pub struct TorusModel {
    pub d: usize,
    pub tau: f64,
    pub action: GroupAction,
}

/// A point `(x, p)` with `x` taken mod `2 pi` and `|p| = tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TubePoint {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

/// Reeb direction plus a `kappa~`-orthonormal horizontal frame at a point.
///
/// The horizontal basis comes in complex pairs: `e_j = (sqrt2 u_j, 0)` and
/// `J e_j = (0, sqrt2 u_j)` for an orthonormal set `u_j` perpendicular to
/// `p`. At points of `Z^tau` the first `d_G` of the `u_j` span the
/// projected group directions, so frame coordinates split as
/// v-block = real parts `1..d_G`, t-block = imaginary parts `1..d_G`,
/// h-block = the rest.
#[derive(Debug, Clone)]
pub struct Frame {
    pub origin: TubePoint,
    /// Reeb vector, as `(dx, dp)` with `dp = 0`.
    pub reeb_dx: DVector<f64>,
    /// The orthonormal directions `u_j` (columns), each perpendicular to `p`.
    pub u: DMatrix<f64>,
    /// Number of leading `u_j` aligned with the group directions (0 when the
    /// frame was built off `Z^tau` or the action is trivial/finite).
    pub d_g: usize,
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU2);
    if y >= TAU2 {
        0.0
    } else {
        y
    }
}

/// Difference `a - b` on the torus, wrapped to `(-pi, pi]` per coordinate.
pub fn angle_diff(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(a.len(), |k, _| {
        let mut d = (a[k] - b[k]).rem_euclid(TAU2);
        if d > std::f64::consts::PI {
            d -= TAU2;
        }
        d
    })
}

impl TubePoint {
    /// Build a point, wrapping angles and renormalizing `p` to `|p| = tau`.
    pub fn new(x: DVector<f64>, p: DVector<f64>, tau: f64) -> Result<Self, GeometryError> {
        let norm = p.norm();
        if norm < 0.5 * tau || norm > 2.0 * tau {
            return Err(GeometryError::OffShell(norm, tau));
        }
        Ok(Self {
            x: x.map(wrap_angle),
            p: p * (tau / norm),
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

impl GroupAction {
    pub fn d_g(&self) -> usize {
        match self {
            GroupAction::Subtorus { generators } => generators.len(),
            _ => 0,
        }
    }

    pub fn generators_f64(&self, d: usize) -> Vec<DVector<f64>> {
        match self {
            GroupAction::Subtorus { generators } => generators
                .iter()
                .map(|g| DVector::from_fn(d, |k, _| g[k] as f64))
                .collect(),
            GroupAction::FiniteCyclic { generator, .. } => {
                vec![DVector::from_fn(d, |k, _| generator[k] as f64)]
            }
            GroupAction::Trivial => vec![],
        }
    }

    /// Order of the generic stabilizer: the number of group parameters that
    /// act trivially on the torus. For a 1-generator subtorus this is the
    /// gcd of the entries.
    pub fn generic_stabilizer_order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        match self {
            GroupAction::Trivial => 1,
            GroupAction::Subtorus { generators } => smith_invariant_product(generators),
            GroupAction::FiniteCyclic { generator, m } => {
                let g0 = generator.iter().fold(0u64, |acc, &v| gcd(acc, v.unsigned_abs()));
                gcd(u64::from(*m), g0.max(1))
            }
        }
    }
}

/// Product of the invariant factors of an integer matrix whose columns are
/// the generators: the order of the kernel of `T^{d_G} -> T^d`.
fn smith_invariant_product(generators: &[Vec<i64>]) -> u64 {
    if generators.is_empty() {
        return 1;
    }
    let rows = generators[0].len();
    let cols = generators.len();
    let mut a: Vec<Vec<i64>> = (0..rows)
        .map(|r| (0..cols).map(|c| generators[c][r]).collect())
        .collect();
    let mut product: u64 = 1;
    let mut r0 = 0usize;
    let mut c0 = 0usize;
    while r0 < rows && c0 < cols {
        let mut pivot = None;
        for r in r0..rows {
            for c in c0..cols {
                if a[r][c] != 0 {
                    match pivot {
                        None => pivot = Some((r, c)),
                        Some((rr, cc)) => {
                            if a[r][c].abs() < a[rr][cc].abs() {
                                pivot = Some((r, c));
                            }
                        }
                    }
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        a.swap(r0, pr);
        for row in a.iter_mut() {
            row.swap(c0, pc);
        }
        let mut clean = true;
        for r in (r0 + 1)..rows {
            let q = a[r][c0] / a[r0][c0];
            if q != 0 {
                for c in c0..cols {
                    a[r][c] -= q * a[r0][c];
                }
            }
            if a[r][c0] != 0 {
                clean = false;
            }
        }
        for c in (c0 + 1)..cols {
            let q = a[r0][c] / a[r0][c0];
            if q != 0 {
                for r in r0..rows {
                    let sub = q * a[r][c0];
                    a[r][c] -= sub;
                }
            }
            if a[r0][c] != 0 {
                clean = false;
            }
        }
        if clean {
            product *= a[r0][c0].unsigned_abs();
            r0 += 1;
            c0 += 1;
        }
    }
    product
}

impl TorusModel {
    pub fn new(d: usize, tau: f64, action: GroupAction) -> Result<Self, GeometryError> {
        if d < 1 {
            return Err(GeometryError::InvalidModel("d must be >= 1".into()));
        }
        if !(tau > 0.0) {
            return Err(GeometryError::InvalidModel("tau must be positive".into()));
        }
        match &action {
            GroupAction::Trivial => {}
            GroupAction::Subtorus { generators } => {
                let dg = generators.len();
                if dg == 0 || dg > d - 1 {
                    return Err(GeometryError::InvalidModel(format!(
                        "subtorus rank {dg} must satisfy 1 <= d_G <= d-1 = {}",
                        d - 1
                    )));
                }
                if generators.iter().any(|g| g.len() != d) {
                    return Err(GeometryError::InvalidModel(
                        "generator length must equal d".into(),
                    ));
                }
                let gm = DMatrix::from_fn(d, dg, |r, c| generators[c][r] as f64);
                if gm.rank(1e-9) < dg {
                    return Err(GeometryError::InvalidModel(
                        "generators must be linearly independent".into(),
                    ));
                }
            }
            GroupAction::FiniteCyclic { generator, m } => {
                if generator.len() != d || generator.iter().all(|&v| v == 0) {
                    return Err(GeometryError::InvalidModel(
                        "finite-cyclic generator must be a nonzero integer vector".into(),
                    ));
                }
                if *m == 0 {
                    return Err(GeometryError::InvalidModel("m must be >= 1".into()));
                }
            }
        }
        Ok(Self { d, tau, action })
    }

    pub fn d_g(&self) -> usize {
        self.action.d_g()
    }

    pub fn point(&self, x: Vec<f64>, p: Vec<f64>) -> Result<TubePoint, GeometryError> {
        TubePoint::new(DVector::from_vec(x), DVector::from_vec(p), self.tau)
    }

    /// Homogeneous geodesic flow: `(x, p) -> (x + t p / tau, p)`.
    pub fn geodesic_flow(&self, pt: &TubePoint, t: f64) -> TubePoint {
        TubePoint {
            x: (&pt.x + &pt.p * (t / self.tau)).map(wrap_angle),
            p: pt.p.clone(),
        }
    }

    /// Group translation; `p` is untouched, so `alpha` and `rho` are
    /// preserved exactly.
    pub fn group_act(&self, g: &GroupElement, pt: &TubePoint) -> Result<TubePoint, GeometryError> {
        let shift = self.group_shift(g)?;
        Ok(TubePoint {
            x: (&pt.x + shift).map(wrap_angle),
            p: pt.p.clone(),
        })
    }

    /// Translation vector of a group element.
    pub fn group_shift(&self, g: &GroupElement) -> Result<DVector<f64>, GeometryError> {
        match (&self.action, g) {
            (_, GroupElement::Identity) => Ok(DVector::zeros(self.d)),
            (GroupAction::Subtorus { generators }, GroupElement::Angles(s)) => {
                if s.len() != generators.len() {
                    return Err(GeometryError::BadGroupElement(format!(
                        "expected {} angles, got {}",
                        generators.len(),
                        s.len()
                    )));
                }
                let mut shift = DVector::zeros(self.d);
                for (si, g) in s.iter().zip(generators) {
                    for k in 0..self.d {
                        shift[k] += si * g[k] as f64;
                    }
                }
                Ok(shift)
            }
            (GroupAction::FiniteCyclic { generator, m }, GroupElement::Cyclic(j)) => {
                let frac = TAU2 * f64::from(*j % *m) / f64::from(*m);
                Ok(DVector::from_fn(self.d, |k, _| frac * generator[k] as f64))
            }
            _ => Err(GeometryError::BadGroupElement(
                "group element does not match the configured action".into(),
            )),
        }
    }

    /// Moment pairing `phi^xi(x, p) = p . xi`; zero for finite actions.
    pub fn moment(&self, pt: &TubePoint, xi_index: usize) -> f64 {
        match &self.action {
            GroupAction::Subtorus { generators } => {
                let xi = &generators[xi_index];
                pt.p.iter().zip(xi.iter()).map(|(pi, &g)| pi * g as f64).sum()
            }
            _ => 0.0,
        }
    }

    /// Euclidean norm of the full moment vector (zero iff `pt` is in `Z^tau`).
    pub fn moment_norm(&self, pt: &TubePoint) -> f64 {
        match &self.action {
            GroupAction::Subtorus { generators } => (0..generators.len())
                .map(|i| self.moment(pt, i).powi(2))
                .sum::<f64>()
                .sqrt(),
            _ => 0.0,
        }
    }

    pub fn on_zero_locus(&self, pt: &TubePoint, tol: f64) -> bool {
        self.moment_norm(pt) <= tol
    }

    /// Ambient (`kappa^`) geodesic distance from `pt` to `Z^tau`: the arc on
    /// the radius-`tau` sphere between `p` and its projection onto the
    /// orthocomplement of the generator span. Zero for trivial and finite
    /// actions, where `Z^tau = X^tau`.
    pub fn z_locus_distance(&self, pt: &TubePoint) -> f64 {
        match &self.action {
            GroupAction::Subtorus { .. } => {
                let basis = self.orthonormal_generator_span();
                let mut par = 0.0f64;
                for b in &basis {
                    let c = pt.p.dot(b);
                    par += c * c;
                }
                let sin = (par.sqrt() / self.tau).clamp(0.0, 1.0);
                self.tau * sin.asin()
            }
            _ => 0.0,
        }
    }

    /// `kappa~` distance to `Z^tau` (the halved-metric convention).
    pub fn z_locus_distance_halved(&self, pt: &TubePoint) -> f64 {
        self.z_locus_distance(pt) / 2.0_f64.sqrt()
    }

    fn orthonormal_generator_span(&self) -> Vec<DVector<f64>> {
        let gens = self.action.generators_f64(self.d);
        gram_schmidt(&gens)
    }

    /// Reeb direction plus `kappa~`-orthonormal horizontal frame.
    ///
    /// `with_splitting` demands `pt` to lie on `Z^tau` and aligns the first
    /// `d_G` frame directions with the group generators; this is an error
    /// off the zero locus.
    pub fn frame(&self, pt: &TubePoint, with_splitting: bool) -> Result<Frame, GeometryError> {
        let d = self.d;
        let reeb_dx = -&pt.p / (self.tau * self.tau);
        let phat = &pt.p / self.tau;

        let mut dirs: Vec<DVector<f64>> = Vec::new();
        let mut d_g = 0;
        if with_splitting && self.d_g() > 0 {
            let mn = self.moment_norm(pt);
            if mn > 1e-9 * self.tau {
                return Err(GeometryError::OffZeroLocus(mn));
            }
            dirs = self.orthonormal_generator_span();
            d_g = dirs.len();
        }
        let mut basis: Vec<DVector<f64>> = vec![phat.clone()];
        basis.extend(dirs.iter().cloned());
        for k in 0..d {
            if basis.len() == d {
                break;
            }
            let mut cand = DVector::zeros(d);
            cand[k] = 1.0;
            for b in &basis {
                let c = cand.dot(b);
                cand -= b * c;
            }
            let n = cand.norm();
            if n > 1e-8 {
                basis.push(cand / n);
            }
        }
        if basis.len() != d {
            return Err(GeometryError::InvalidModel(
                "failed to complete an orthonormal frame".into(),
            ));
        }
        let u = DMatrix::from_fn(d, d - 1, |r, c| basis[c + 1][r]);
        Ok(Frame {
            origin: pt.clone(),
            reeb_dx,
            u,
            d_g,
        })
    }

    /// Move from the frame origin by `theta` along the Reeb direction and by
    /// frame coordinates `v in R^{2(d-1)}` (layout `(a, b)`: `a_j` along
    /// `e_j = (sqrt2 u_j, 0)`, `b_j` along `J e_j = (0, sqrt2 u_j)`), then
    /// renormalize `|p| = tau`.
    pub fn displace(
        &self,
        frame: &Frame,
        theta: f64,
        v: &DVector<f64>,
    ) -> Result<TubePoint, GeometryError> {
        let d = self.d;
        let n = d - 1;
        if v.len() != 2 * n {
            return Err(GeometryError::BadGroupElement(format!(
                "frame displacement has length {}, expected {}",
                v.len(),
                2 * n
            )));
        }
        let size = (theta * theta + v.norm_squared()).sqrt();
        if size >= self.tau / 2.0 {
            return Err(GeometryError::DisplacementTooLarge(size, self.tau / 2.0));
        }
        let sqrt2 = 2.0_f64.sqrt();
        let mut dx = &frame.reeb_dx * theta;
        let mut dp = DVector::zeros(d);
        for j in 0..n {
            let uj = frame.u.column(j);
            dx += uj * (sqrt2 * v[j]);
            dp += uj * (sqrt2 * v[n + j]);
        }
        TubePoint::new(&frame.origin.x + dx, &frame.origin.p + dp, self.tau)
    }

    /// Frame coordinates `(theta, v)` of a point near the frame origin
    /// (first-order chart inverse).
    pub fn frame_coordinates(&self, frame: &Frame, pt: &TubePoint) -> (f64, DVector<f64>) {
        let d = self.d;
        let n = d - 1;
        let dx = angle_diff(&pt.x, &frame.origin.x);
        let dp = &pt.p - &frame.origin.p;
        let theta = -frame.origin.p.dot(&dx);
        let sqrt2 = 2.0_f64.sqrt();
        let mut v = DVector::zeros(2 * n);
        for j in 0..n {
            let uj = frame.u.column(j);
            v[j] = uj.dot(&dx) / sqrt2;
            v[n + j] = uj.dot(&dp) / sqrt2;
        }
        (theta, v)
    }

    /// Finite-difference linearization `B` of `Gamma_{-t1}` in horizontal
    /// frames at `x12` and at `x2 = Gamma_{-t1}(x12)`. Returns the matrix
    /// and its symplectic defect (reported, not projected away).
    pub fn flow_linearization(
        &self,
        x12: &TubePoint,
        t1: f64,
        frame12: &Frame,
        frame2: &Frame,
    ) -> Result<(SymplecticMatrix, f64), GeometryError> {
        let n = self.d - 1;
        if angle_diff(&x12.x, &frame12.origin.x).norm() > 1e-9 {
            return Err(GeometryError::InvalidModel(
                "frame12 must be centered at x12".into(),
            ));
        }
        let h = 1e-5 * self.tau;
        let mut b = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for col in 0..2 * n {
            let mut e = DVector::zeros(2 * n);
            e[col] = h;
            let plus = self.displace(frame12, 0.0, &e)?;
            e[col] = -h;
            let minus = self.displace(frame12, 0.0, &e)?;
            let fplus = self.geodesic_flow(&plus, -t1);
            let fminus = self.geodesic_flow(&minus, -t1);
            let (_, vp) = self.frame_coordinates(frame2, &fplus);
            let (_, vm) = self.frame_coordinates(frame2, &fminus);
            let dv = (vp - vm) / (2.0 * h);
            for row in 0..2 * n {
                b[(row, col)] = dv[row];
            }
        }
        let defect =
            symplectic_defect(&b).map_err(|e| GeometryError::InvalidModel(e.to_string()))?;
        let mat = SymplecticMatrix::new(b, 1e-6).map_err(|e| {
            GeometryError::InvalidModel(format!("linearization not symplectic: {e}"))
        })?;
        Ok((mat, defect))
    }

    /// Closed-form linearization for the flat torus: the shear
    /// `a' = a - (t1/tau) b` per horizontal complex pair, in frame layout.
    pub fn flow_linearization_closed(&self, t1: f64) -> SymplecticMatrix {
        let n = self.d - 1;
        let s = t1 / self.tau;
        let mut b = DMatrix::<f64>::identity(2 * n, 2 * n);
        for j in 0..n {
            b[(j, n + j)] = -s;
        }
        SymplecticMatrix::new(b, 1e-12).expect("shear is symplectic")
    }

    /// Solve `mu_g Gamma_t (x2) = x1` for `(g, t)` with `t` in the support
    /// window. Returns all solutions; stabilizer translates share the same
    /// unique `t`. An empty list signals that the pair is off the
    /// concentration set.
    pub fn orbit_intersection(
        &self,
        x1: &TubePoint,
        x2: &TubePoint,
        support: (f64, f64),
    ) -> Vec<(GroupElement, f64)> {
        let tol = 1e-8;
        if (&x1.p - &x2.p).norm() > tol {
            return Vec::new();
        }
        let dx = angle_diff(&x1.x, &x2.x);
        let dir = &x2.p / self.tau;
        let mut out: Vec<(GroupElement, f64)> = Vec::new();
        match &self.action {
            GroupAction::Trivial => {
                out.extend(self.wrap_solutions(&dx, &dir, support, &[]).into_iter().map(
                    |(params, t)| {
                        debug_assert!(params.is_empty());
                        (GroupElement::Identity, t)
                    },
                ));
                out
            }
            GroupAction::FiniteCyclic { m, .. } => {
                for g in 0..*m {
                    let shift = self
                        .group_shift(&GroupElement::Cyclic(g))
                        .expect("valid cyclic element");
                    let target = DVector::from_fn(self.d, |k, _| dx[k] - shift[k]);
                    for (_, t) in self.wrap_solutions(&target, &dir, support, &[]) {
                        out.push((GroupElement::Cyclic(g), t));
                    }
                }
                out
            }
            GroupAction::Subtorus { .. } => {
                let gens = self.action.generators_f64(self.d);
                for (params, t) in self.wrap_solutions(&dx, &dir, support, &gens) {
                    out.push((GroupElement::Angles(params), t));
                }
                out
            }
        }
    }

    /// Solutions of `t dir + sum s_i xi_i = target + 2 pi n` with `t` in the
    /// support window, over a bounded box of lattice wraps `n`.
    fn wrap_solutions(
        &self,
        target: &DVector<f64>,
        dir: &DVector<f64>,
        support: (f64, f64),
        gens: &[DVector<f64>],
    ) -> Vec<(Vec<f64>, f64)> {
        let d = self.d;
        let tol = 1e-8;
        let (t_lo, t_hi) = support;
        let t_bound = t_hi.abs().max(t_lo.abs());
        let gen_reach: f64 = gens.iter().map(|g| g.amax()).fold(0.0, f64::max);
        let reach = t_bound / self.tau / TAU2 + gen_reach + 1.5;
        let wrap_max = reach.ceil() as i64;
        let unknowns = 1 + gens.len();

        let mut a = DMatrix::<f64>::zeros(d, unknowns);
        for r in 0..d {
            a[(r, 0)] = dir[r];
            for (c, g) in gens.iter().enumerate() {
                a[(r, c + 1)] = g[r];
            }
        }
        let ata = a.transpose() * &a;
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        let Some(ata_inv) = ata.try_inverse() else {
            return out;
        };

        let active: Vec<bool> = (0..d)
            .map(|r| dir[r].abs() > 1e-12 || gens.iter().any(|g| g[r].abs() > 1e-12))
            .collect();
        let mut wraps = vec![0i64; d];
        let mut stack: Vec<(usize, i64)> = Vec::new();
        // Iterative depth-first enumeration of the wrap box.
        let mut k = 0usize;
        loop {
            if k == d {
                let mut rhs = DVector::from_fn(d, |r, _| target[r] + TAU2 * wraps[r] as f64);
                let mut feasible = true;
                for r in 0..d {
                    if !active[r] {
                        // Nothing moves this coordinate: it must already
                        // match up to a full wrap.
                        let resid = rhs[r] - TAU2 * (rhs[r] / TAU2).round();
                        if resid.abs() > tol {
                            feasible = false;
                            break;
                        }
                        rhs[r] = 0.0;
                    }
                }
                if feasible {
                    let sol = &ata_inv * (a.transpose() * &rhs);
                    let res = (&a * &sol - &rhs).norm();
                    let t = sol[0];
                    if res <= tol && t >= t_lo - tol && t <= t_hi + tol {
                        let params: Vec<f64> =
                            (1..unknowns).map(|i| sol[i].rem_euclid(TAU2)).collect();
                        let dup = out.iter().any(|(p, tt)| {
                            (tt - t).abs() < tol
                                && p.iter().zip(params.iter()).all(|(x, y)| {
                                    let diff = (x - y).rem_euclid(TAU2);
                                    diff < tol || (TAU2 - diff) < tol
                                })
                        });
                        if !dup {
                            out.push((params, t));
                        }
                    }
                }
                // Backtrack.
                loop {
                    match stack.pop() {
                        None => return out,
                        Some((kk, w)) => {
                            if active[kk] && w < wrap_max {
                                wraps[kk] = w + 1;
                                stack.push((kk, w + 1));
                                k = kk + 1;
                                break;
                            }
                        }
                    }
                }
            } else {
                let w0 = if active[k] { -wrap_max } else { 0 };
                wraps[k] = w0;
                stack.push((k, w0));
                k += 1;
            }
        }
    }

    /// Effective volume of the orbit through a `Z^tau` point.
    ///
    /// Finite actions use counting measure (orbit cardinality); subtorus
    /// orbits are measured in `kappa~`, divided by the generic stabilizer
    /// order so early-closing orbits are not double counted.
    pub fn effective_volume(&self, pt: &TubePoint) -> Result<f64, GeometryError> {
        let mn = self.moment_norm(pt);
        if mn > 1e-9 * self.tau {
            return Err(GeometryError::OffZeroLocus(mn));
        }
        match &self.action {
            GroupAction::Trivial => Ok(1.0),
            GroupAction::FiniteCyclic { m, .. } => {
                Ok(f64::from(*m) / self.action.generic_stabilizer_order() as f64)
            }
            GroupAction::Subtorus { generators } => {
                let r = self.action.generic_stabilizer_order() as f64;
                if generators.len() == 1 {
                    // Trapezoid quadrature of the kappa~ orbit speed.
                    let xi = &self.action.generators_f64(self.d)[0];
                    let n = 4096;
                    let h = TAU2 / n as f64;
                    let mut len = 0.0;
                    for _ in 0..n {
                        len += (0.5 * xi.norm_squared()).sqrt() * h;
                    }
                    Ok(len / r)
                } else {
                    let gens = self.action.generators_f64(self.d);
                    let dg = gens.len();
                    let gram = DMatrix::from_fn(dg, dg, |i, j| 0.5 * gens[i].dot(&gens[j]));
                    let vol = gram.determinant().max(0.0).sqrt() * TAU2.powi(dg as i32);
                    Ok(vol / r)
                }
            }
        }
    }

    /// `kappa~` volume of `Z^tau`, with every component counted.
    ///
    /// `Z^tau = T^d x (S^{d-1}_tau cap span(xi)^perp)`; the slice is a
    /// sphere of dimension `d - 1 - d_G`, two points when that is zero.
    pub fn z_locus_volume(&self) -> Result<f64, GeometryError> {
        let d = self.d;
        let dg = self.d_g();
        let slice_dim = d - 1 - dg;
        let dim = 2 * d - 1 - dg;
        let slice_area = self.tau.powi(slice_dim as i32) * unit_sphere_area(slice_dim);
        Ok(0.5f64.powf(dim as f64 / 2.0) * TAU2.powi(d as i32) * slice_area)
    }

    /// Riemannian-submersion volume of `Z^tau / G` for a free subtorus
    /// action: `vol(Z^tau) / V_eff`.
    pub fn quotient_volume(&self) -> Result<f64, GeometryError> {
        match &self.action {
            GroupAction::Subtorus { .. } => {
                if self.action.generic_stabilizer_order() != 1 {
                    return Err(GeometryError::NotFreeSubtorus);
                }
                let sample = self.sample_z_point()?;
                let veff = self.effective_volume(&sample)?;
                Ok(self.z_locus_volume()? / veff)
            }
            _ => Err(GeometryError::NotFreeSubtorus),
        }
    }

    /// Some point of `Z^tau` (p orthogonal to all generators).
    pub fn sample_z_point(&self) -> Result<TubePoint, GeometryError> {
        let d = self.d;
        let gens = self.action.generators_f64(d);
        let basis = gram_schmidt(&gens);
        for k in (0..d).rev() {
            let mut cand = DVector::zeros(d);
            cand[k] = 1.0;
            for b in &basis {
                let c = cand.dot(b);
                cand -= b * c;
            }
            if cand.norm() > 1e-8 {
                let p = cand.normalize() * self.tau;
                return TubePoint::new(DVector::zeros(d), p, self.tau);
            }
        }
        Err(GeometryError::InvalidModel(
            "no direction orthogonal to the generators".into(),
        ))
    }

    /// Contact form value `alpha(w) = -p . w_x` on a tangent vector.
    pub fn alpha(&self, pt: &TubePoint, w_x: &DVector<f64>) -> f64 {
        -pt.p.dot(w_x)
    }
}

/// Surface area of the unit `k`-sphere `S^k` (`S^0` has "area" 2).
pub fn unit_sphere_area(k: usize) -> f64 {
    let half = (k + 1) as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half(half)
}

/// Gamma function for integer and half-integer arguments.
fn gamma_half(x: f64) -> f64 {
    let half_steps = (2.0 * x).round() as i64;
    debug_assert!((2.0 * x - half_steps as f64).abs() < 1e-12);
    if half_steps % 2 == 0 {
        let n = half_steps / 2;
        (1..n).map(|k| k as f64).product::<f64>().max(1.0)
    } else {
        let mut val = std::f64::consts::PI.sqrt();
        let mut arg = 0.5;
        while (arg - x).abs() > 1e-9 {
            val *= arg;
            arg += 1.0;
        }
        val
    }
}

fn gram_schmidt(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let c = w.dot(b);
            w -= b * c;
        }
        let n = w.norm();
        if n > 1e-10 {
            out.push(w / n);
        }
    }
    out
}
