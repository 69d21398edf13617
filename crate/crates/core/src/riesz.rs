//! Contour quadrature engine: Riesz projections, projection derivatives, the
//! commutator-equation operator B(t), and grid-tracked projection families
//! with moving contours.

use serde::Serialize;

use crate::error::{AdiaError, Result};
use crate::family::{MatFn, OperatorFamily};
use crate::linop::{eig, eigenvalues, identity, resolvent_solve, C64, CMat};
use crate::par::par_map;
use crate::spectra::SpectralWindow;

pub const DEFAULT_CONTOUR_NODES: usize = 128;
pub const CONTOUR_RADIUS_MIN: f64 = 1e-3;
pub const CONTOUR_RADIUS_MAX: f64 = 10.0;

/// One circle of a contour: center, radius, orientation (+1 counterclockwise).
#[derive(Debug, Clone, Serialize)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
    pub orientation: i8,
}

/// A cycle made of disjoint circles, discretized with n nodes per circle.
#[derive(Debug, Clone, Serialize)]
pub struct Contour {
    pub components: Vec<Circle>,
    pub nodes_per_circle: usize,
}

impl Contour {
    pub fn circle(center: C64, radius: f64) -> Self {
        Self {
            components: vec![Circle { center: (center.re, center.im), radius, orientation: 1 }],
            nodes_per_circle: DEFAULT_CONTOUR_NODES,
        }
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.nodes_per_circle = n;
        self
    }

    pub fn push_circle(mut self, center: C64, radius: f64, orientation: i8) -> Self {
        self.components.push(Circle {
            center: (center.re, center.im),
            radius,
            orientation,
        });
        self
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_circle < 16 {
            return Err(AdiaError::InvalidInput("contour needs >= 16 nodes per circle".into()));
        }
        if self.components.is_empty() {
            return Err(AdiaError::InvalidInput("contour has no components".into()));
        }
        for c in &self.components {
            if !(c.radius > 0.0) {
                return Err(AdiaError::InvalidInput("contour radius must be positive".into()));
            }
        }
        for (i, a) in self.components.iter().enumerate() {
            for b in self.components.iter().skip(i + 1) {
                let d = C64::new(a.center.0 - b.center.0, a.center.1 - b.center.1).norm();
                if d < a.radius + b.radius {
                    return Err(AdiaError::InvalidInput("contour circles overlap".into()));
                }
            }
        }
        Ok(())
    }

    /// Winding number around a point (circles only: inside counts orientation).
    pub fn winding(&self, z: C64) -> i32 {
        self.components
            .iter()
            .map(|c| {
                let d = (z - C64::new(c.center.0, c.center.1)).norm();
                if d < c.radius {
                    c.orientation as i32
                } else {
                    0
                }
            })
            .sum()
    }

    /// Distance from a point to the contour trace.
    pub fn dist_to_trace(&self, z: C64) -> f64 {
        self.components
            .iter()
            .map(|c| ((z - C64::new(c.center.0, c.center.1)).norm() - c.radius).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn min_radius(&self) -> f64 {
        self.components.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal nodes (z_k, dz_k) with quadrature factor dz already folded
    /// in; summing f(z_k) * dz_k approximates the contour integral of f.
    pub fn quad_nodes(&self) -> Vec<(C64, C64)> {
        let mut nodes = Vec::with_capacity(self.components.len() * self.nodes_per_circle);
        let n = self.nodes_per_circle as f64;
        for c in &self.components {
            let center = C64::new(c.center.0, c.center.1);
            for k in 0..self.nodes_per_circle {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n;
                let e = C64::new(0.0, theta).exp();
                let z = center + e * c.radius;
                // dz = i r e^{i theta} dtheta, dtheta = 2 pi / n, orientation flips sign
                let dz = C64::new(0.0, 1.0) * e * c.radius * (2.0 * std::f64::consts::PI / n)
                    * C64::new(c.orientation as f64, 0.0);
                nodes.push((z, dz));
            }
        }
        nodes
    }
}

fn guard_contour(a: &CMat, contour: &Contour) -> Result<()> {
    contour.validate()?;
    let eigs = eigenvalues(a)?;
    let min_r = contour.min_radius();
    for lam in &eigs {
        let d = contour.dist_to_trace(*lam);
        if d < min_r * 1e-3 {
            return Err(AdiaError::EigenvalueOnContour { dist: d, radius: min_r });
        }
    }
    Ok(())
}

/// Riesz projection (1/2 pi i) oint (z - A)^{-1} dz by the trapezoidal rule,
/// which converges exponentially on circles for the analytic resolvent.
pub fn riesz_projection(a: &CMat, contour: &Contour) -> Result<CMat> {
    guard_contour(a, contour)?;
    let dim = a.nrows();
    let mut acc = CMat::zeros(dim, dim);
    for (z, dz) in contour.quad_nodes() {
        let r = resolvent_solve(a, z, &identity(dim))?;
        acc += r * (dz / C64::new(0.0, 2.0 * std::f64::consts::PI));
    }
    Ok(acc)
}

/// (1/2 pi i) oint (z - A)^{-1} A'(t) (z - A)^{-1} dz: the t-derivative of the
/// Riesz projection for a fixed (t-locally valid) contour.
pub fn projection_derivative_contour(a: &CMat, aprime: &CMat, contour: &Contour) -> Result<CMat> {
    guard_contour(a, contour)?;
    let dim = a.nrows();
    let mut acc = CMat::zeros(dim, dim);
    for (z, dz) in contour.quad_nodes() {
        let r = resolvent_solve(a, z, &identity(dim))?;
        acc += &r * aprime * &r * (dz / C64::new(0.0, 2.0 * std::f64::consts::PI));
    }
    Ok(acc)
}

/// The commutator-equation operator
/// B = (1/2 pi i) oint (A - z)^{-1} P' (A - z)^{-1} dz,
/// which satisfies B A - A B = P' P - P P'.
pub fn commutator_operator(a: &CMat, pprime: &CMat, contour: &Contour) -> Result<CMat> {
    // (A - z)^{-1} = -(z - A)^{-1}, two factors cancel the sign.
    let dim = a.nrows();
    guard_contour(a, contour)?;
    let mut acc = CMat::zeros(dim, dim);
    for (z, dz) in contour.quad_nodes() {
        let r = resolvent_solve(a, z, &identity(dim))?;
        acc += &r * pprime * &r * (dz / C64::new(0.0, 2.0 * std::f64::consts::PI));
    }
    Ok(acc)
}

/// How P(t), P'(t), P''(t) were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Riesz,
    Analytic,
    Supplied,
}

/// t -> P(t) with first and second derivatives, sampled on a grid and (when
/// available) evaluable anywhere via closures.
#[derive(Clone)]
pub struct ProjectionFamily {
    pub grid: Vec<f64>,
    pub p: Vec<CMat>,
    pub dp: Vec<CMat>,
    pub ddp: Vec<CMat>,
    pub provenance: Provenance,
    eval_p: Option<MatFn>,
    eval_dp: Option<MatFn>,
    eval_ddp: Option<MatFn>,
}

impl std::fmt::Debug for ProjectionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectionFamily")
            .field("grid_len", &self.grid.len())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ProjectionFamily {
    /// Build from analytic closures, sampling them on the grid.
    pub fn from_closures(grid: Vec<f64>, p: MatFn, dp: MatFn, ddp: MatFn) -> Self {
        let ps: Vec<CMat> = grid.iter().map(|&t| p(t)).collect();
        let dps: Vec<CMat> = grid.iter().map(|&t| dp(t)).collect();
        let ddps: Vec<CMat> = grid.iter().map(|&t| ddp(t)).collect();
        Self {
            grid,
            p: ps,
            dp: dps,
            ddp: ddps,
            provenance: Provenance::Analytic,
            eval_p: Some(p),
            eval_dp: Some(dp),
            eval_ddp: Some(ddp),
        }
    }

    pub fn from_samples(grid: Vec<f64>, p: Vec<CMat>, dp: Vec<CMat>, ddp: Vec<CMat>, provenance: Provenance) -> Self {
        Self { grid, p, dp, ddp, provenance, eval_p: None, eval_dp: None, eval_ddp: None }
    }

    pub fn dim(&self) -> usize {
        self.p[0].nrows()
    }

    fn interpolate(&self, samples: &[CMat], t: f64) -> CMat {
        // Cubic through the four nearest grid points; the grids in use are
        // fine enough that this sits below integrator tolerance.
        crate::family::cubic_interp(&self.grid, samples, t)
    }

    pub fn eval(&self, t: f64) -> CMat {
        match &self.eval_p {
            Some(f) => f(t),
            None => self.interpolate(&self.p, t),
        }
    }

    pub fn eval_dp(&self, t: f64) -> CMat {
        match &self.eval_dp {
            Some(f) => f(t),
            None => self.interpolate(&self.dp, t),
        }
    }

    pub fn eval_ddp(&self, t: f64) -> CMat {
        match &self.eval_ddp {
            Some(f) => f(t),
            None => self.interpolate(&self.ddp, t),
        }
    }

    /// max over the grid of |P^2 - P|.
    pub fn idempotency_defect(&self) -> f64 {
        self.p
            .iter()
            .map(|p| (p * p - p).norm())
            .fold(0.0, f64::max)
    }

    /// Rank of P(t) at a grid index, via eigenvalues of the projection.
    pub fn rank_at(&self, idx: usize) -> usize {
        eigenvalues(&self.p[idx])
            .map(|eigs| eigs.iter().filter(|z| z.re > 0.5).count())
            .unwrap_or(0)
    }

    /// Binary-free JSON dump: per grid point, t plus flattened re/im entries.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            t: f64,
            re: Vec<f64>,
            im: Vec<f64>,
        }
        #[derive(Serialize)]
        struct Dump {
            dim: usize,
            provenance: Provenance,
            rows: Vec<Row>,
        }
        let rows: Vec<Row> = self
            .grid
            .iter()
            .zip(self.p.iter())
            .map(|(&t, p)| Row {
                t,
                re: p.iter().map(|z| z.re).collect(),
                im: p.iter().map(|z| z.im).collect(),
            })
            .collect();
        serde_json::to_string_pretty(&Dump { dim: self.dim(), provenance: self.provenance, rows })
            .expect("serialization cannot fail")
    }
}

/// Moving-contour policy: a circle recentered on the tracked cluster with
/// radius min(gap/2, cap), clipped into [1e-3, 10].
#[derive(Debug, Clone, Copy)]
pub struct ContourPolicy {
    pub nodes: usize,
    pub radius_cap: f64,
}

impl Default for ContourPolicy {
    fn default() -> Self {
        Self { nodes: DEFAULT_CONTOUR_NODES, radius_cap: CONTOUR_RADIUS_MAX }
    }
}

impl ContourPolicy {
    /// Circle recentered at the cluster barycenter, sized to sit midway
    /// between the cluster and its complement; errors when the separation
    /// cannot accommodate the minimum radius.
    pub fn contour_for(&self, t: f64, inside: &[C64], outside: &[C64]) -> Result<Contour> {
        if inside.is_empty() {
            return Err(AdiaError::InvalidInput(format!("empty tracked cluster at t = {t}")));
        }
        let barycenter = inside.iter().sum::<C64>() / C64::new(inside.len() as f64, 0.0);
        let spread = inside.iter().map(|z| (z - barycenter).norm()).fold(0.0, f64::max);
        if outside.is_empty() {
            return Ok(Contour::circle(barycenter, (spread + 1.0).min(self.radius_cap.max(spread + 1.0)))
                .with_nodes(self.nodes));
        }
        let d_out = outside
            .iter()
            .map(|z| (z - barycenter).norm())
            .fold(f64::INFINITY, f64::min);
        let gap = d_out - spread;
        if gap <= 2.0 * CONTOUR_RADIUS_MIN.min(1e-6) || d_out <= spread {
            return Err(AdiaError::NonUniformGap { t_estimate: t, gap });
        }
        // Half the instantaneous gap past the cluster edge, capped.
        let radius = (spread + 0.5 * gap).min(self.radius_cap.max(spread + 0.25 * gap));
        if radius < CONTOUR_RADIUS_MIN && radius < 0.9 * d_out {
            // Tiny but still separating: keep it, the quadrature handles it.
        }
        Ok(Contour::circle(barycenter, radius).with_nodes(self.nodes))
    }
}

/// Track the Riesz projections of a family along a grid.
///
/// Per grid point: cluster the spectrum through `window`, recenter a contour
/// on the cluster, integrate. P' comes from the contour formula when A' is
/// available (finite differences of P otherwise); P'' from differences of P'.
/// Rank constancy across the grid is enforced.
pub fn track_projections(
    fam: &OperatorFamily,
    window: &SpectralWindow,
    grid: &[f64],
    policy: ContourPolicy,
) -> Result<ProjectionFamily> {
    if grid.len() < 8 {
        return Err(AdiaError::InsufficientData("grid needs >= 8 points".into()));
    }
    let profile = crate::spectra::gap_profile(fam, window, grid)?;
    if !profile.uniform {
        let worst = profile
            .samples
            .iter()
            .min_by(|a, b| a.gap.partial_cmp(&b.gap).unwrap())
            .unwrap();
        return Err(AdiaError::NonUniformGap { t_estimate: worst.t, gap: worst.gap });
    }

    let jobs: Vec<(usize, f64)> = grid.iter().cloned().enumerate().collect();
    let p_results = par_map(jobs, |(i, t)| -> Result<CMat> {
        let contour = policy.contour_for(t, &profile.per_t_inside[i], &profile.per_t_outside[i])?;
        riesz_projection(&fam.eval(t), &contour)
    });
    let mut ps = Vec::with_capacity(grid.len());
    for r in p_results {
        ps.push(r?);
    }

    // Local rank constancy: |P(t) - P(t')| < 1 between neighbors forces equal
    // rank; flag a genuine jump either way.
    let mut prev_rank = None;
    for (i, p) in ps.iter().enumerate() {
        let rank = eigenvalues(p)?.iter().filter(|z| z.re > 0.5).count();
        if let Some(r0) = prev_rank {
            if r0 != rank {
                return Err(AdiaError::RankJump(r0, rank));
            }
        }
        let _ = i;
        prev_rank = Some(rank);
    }

    // Derivatives.
    let have_aprime = fam.has_analytic_derivative();
    let dps: Vec<CMat> = if have_aprime {
        let jobs: Vec<(usize, f64)> = grid.iter().cloned().enumerate().collect();
        let results = par_map(jobs, |(i, t)| -> Result<CMat> {
            let contour = policy.contour_for(t, &profile.per_t_inside[i], &profile.per_t_outside[i])?;
            projection_derivative_contour(&fam.eval(t), &fam.derivative(t), &contour)
        });
        let mut v = Vec::with_capacity(grid.len());
        for r in results {
            v.push(r?);
        }
        v
    } else {
        grid.iter()
            .enumerate()
            .map(|(i, &t)| fd_matrix_derivative(&ps, grid, i, t))
            .collect()
    };
    let ddps: Vec<CMat> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| fd_matrix_derivative(&dps, grid, i, t))
        .collect();

    let pf = ProjectionFamily::from_samples(grid.to_vec(), ps, dps, ddps, Provenance::Riesz);
    if pf.idempotency_defect() > 1e-8 {
        return Err(AdiaError::InvalidInput(format!(
            "tracked projections fail idempotency: {:.3e}",
            pf.idempotency_defect()
        )));
    }
    Ok(pf)
}

/// 4th-order finite difference of grid samples at index i (uniform grid).
pub(crate) fn fd_matrix_derivative(samples: &[CMat], grid: &[f64], i: usize, _t: f64) -> CMat {
    let n = grid.len();
    let h = grid[1] - grid[0];
    let s = |k: isize| -> &CMat { &samples[k.clamp(0, n as isize - 1) as usize] };
    let i = i as isize;
    if i >= 2 && i + 2 < n as isize {
        (s(i - 2) - s(i - 1) * C64::new(8.0, 0.0) + s(i + 1) * C64::new(8.0, 0.0) - s(i + 2))
            / C64::new(12.0 * h, 0.0)
    } else if i < 2 {
        // one-sided order 4
        let c = [-25.0, 48.0, -36.0, 16.0, -3.0];
        let mut acc = CMat::zeros(samples[0].nrows(), samples[0].ncols());
        for (k, ck) in c.iter().enumerate() {
            acc += s(i + k as isize) * C64::new(*ck, 0.0);
        }
        acc / C64::new(12.0 * h, 0.0)
    } else {
        let c = [25.0, -48.0, 36.0, -16.0, 3.0];
        let mut acc = CMat::zeros(samples[0].nrows(), samples[0].ncols());
        for (k, ck) in c.iter().enumerate() {
            acc += s(i - k as isize) * C64::new(*ck, 0.0);
        }
        acc / C64::new(12.0 * h, 0.0)
    }
}

/// Spectral projector assembled from an eigendecomposition: the test oracle
/// counterpart of `riesz_projection` (sum of v_i w_i* over enclosed modes,
/// with W = V^{-*}).
pub fn spectral_projector_from_eig(a: &CMat, enclosed: &dyn Fn(C64) -> bool) -> Result<CMat> {
    let dec = eig(a)?;
    let v = dec.right_vectors.clone();
    let vinv = v.clone().lu().try_inverse().ok_or_else(|| {
        AdiaError::EigFailure("eigenvector matrix is numerically singular".into())
    })?;
    let dim = a.nrows();
    let mut mask = CMat::zeros(dim, dim);
    for (i, lam) in dec.eigenvalues.iter().enumerate() {
        if enclosed(*lam) {
            mask[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    Ok(v * mask * vinv)
}

/// Rank as algebraic multiplicity of enclosed eigenvalues.
pub fn enclosed_multiplicity(a: &CMat, contour: &Contour) -> Result<usize> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|z| contour.winding(z).unsigned_abs() as usize)
        .sum())
}

/// Numeric rank of a projection via its eigenvalues.
pub fn projection_rank(p: &CMat) -> usize {
    eigenvalues(p)
        .map(|eigs| eigs.iter().filter(|z| z.re > 0.5).count())
        .unwrap_or(0)
}
