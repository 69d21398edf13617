//! Time-dependent operator families t in [0,1] -> A(t), with analytic or
//! finite-difference derivatives, isometric conjugation builders and the
//! lambda_d shift constants.

use std::sync::Arc;

use crate::error::{AdiaError, Result};
use crate::linop::{identity, op_norm, C64, CMat};

pub type MatFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;
/// Optional fast action A(t) * M for families with structure worth exploiting.
pub type ApplyFn = Arc<dyn Fn(f64, &CMat) -> CMat + Send + Sync>;
pub type NormFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A family t -> A(t) on a d-dimensional complex space.
#[derive(Clone)]
pub struct OperatorFamily {
    pub dim: usize,
    pub label: String,
    eval: MatFn,
    d1: Option<MatFn>,
    d2: Option<MatFn>,
    apply: Option<ApplyFn>,
    norm_hint: Option<NormFn>,
}

impl std::fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .finish()
    }
}

impl OperatorFamily {
    pub fn new(dim: usize, label: impl Into<String>, eval: MatFn) -> Self {
        Self { dim, label: label.into(), eval, d1: None, d2: None, apply: None, norm_hint: None }
    }

    pub fn with_derivative(mut self, d1: MatFn) -> Self {
        self.d1 = Some(d1);
        self
    }

    pub fn with_second_derivative(mut self, d2: MatFn) -> Self {
        self.d2 = Some(d2);
        self
    }

    pub fn with_apply(mut self, apply: ApplyFn) -> Self {
        self.apply = Some(apply);
        self
    }

    /// Cheap upper bound for the operator norm of A(t), used by step control.
    pub fn with_norm_hint(mut self, hint: NormFn) -> Self {
        self.norm_hint = Some(hint);
        self
    }

    /// Norm bound for step-size control: the hint when present, else the
    /// Frobenius norm (an upper bound for the operator norm).
    pub fn norm_bound(&self, t: f64) -> f64 {
        match &self.norm_hint {
            Some(h) => h(t),
            None => self.eval(t).norm(),
        }
    }

    pub fn constant(a: CMat, label: impl Into<String>) -> Self {
        let dim = a.nrows();
        let z = CMat::zeros(dim, dim);
        Self::new(dim, label, Arc::new(move |_| a.clone()))
            .with_derivative(Arc::new(move |_| z.clone()))
    }

    pub fn eval(&self, t: f64) -> CMat {
        (self.eval)(t)
    }

    /// A(t) * m, using the structured fast path when one was supplied.
    pub fn apply(&self, t: f64, m: &CMat) -> CMat {
        match &self.apply {
            Some(f) => f(t, m),
            None => self.eval(t) * m,
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.d1.is_some()
    }

    /// A'(t): analytic when supplied, else 4th-order central differences
    /// (one-sided at the interval ends).
    pub fn derivative(&self, t: f64) -> CMat {
        match &self.d1 {
            Some(d) => d(t),
            None => fd_derivative(|s| self.eval(s), t, self.fd_step(t)),
        }
    }

    /// A''(t), same fallback policy as `derivative`.
    pub fn second_derivative(&self, t: f64) -> CMat {
        match &self.d2 {
            Some(d) => d(t),
            None => fd_derivative(|s| self.derivative(s), t, self.fd_step(t).sqrt().min(1e-3)),
        }
    }

    fn fd_step(&self, t: f64) -> f64 {
        // eps^{1/5} balances 4th-order truncation against rounding.
        let scale = op_norm(&self.eval(t)).max(1.0);
        f64::EPSILON.powf(0.2) * scale.min(1e3) * 1e-0
    }

    pub fn sup_norm(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| op_norm(&self.eval(i as f64 / samples as f64)))
            .fold(0.0, f64::max)
    }
}

/// 4th-order finite difference, clamped into [0,1] with one-sided stencils at the ends.
pub(crate) fn fd_derivative<F: Fn(f64) -> CMat>(f: F, t: f64, h: f64) -> CMat {
    let h = h.min(0.02);
    if t - 2.0 * h >= 0.0 && t + 2.0 * h <= 1.0 {
        // (f(t-2h) - 8 f(t-h) + 8 f(t+h) - f(t+2h)) / 12h
        let num = f(t - 2.0 * h) - f(t - h) * C64::new(8.0, 0.0) + f(t + h) * C64::new(8.0, 0.0)
            - f(t + 2.0 * h);
        num / C64::new(12.0 * h, 0.0)
    } else if t + 4.0 * h <= 1.0 {
        // forward one-sided order 4: (-25 f0 + 48 f1 - 36 f2 + 16 f3 - 3 f4) / 12h
        let c = [-25.0, 48.0, -36.0, 16.0, -3.0];
        let mut acc = CMat::zeros(f(t).nrows(), f(t).ncols());
        for (k, ck) in c.iter().enumerate() {
            acc += f(t + k as f64 * h) * C64::new(*ck, 0.0);
        }
        acc / C64::new(12.0 * h, 0.0)
    } else {
        let c = [25.0, -48.0, 36.0, -16.0, 3.0];
        let mut acc = CMat::zeros(f(t).nrows(), f(t).ncols());
        for (k, ck) in c.iter().enumerate() {
            acc += f(t - k as f64 * h) * C64::new(*ck, 0.0);
        }
        acc / C64::new(12.0 * h, 0.0)
    }
}

/// Isometric conjugation data: t -> R(t) with R(t)* R(t) = 1.
#[derive(Clone)]
pub struct RotationFamily {
    pub dim: usize,
    eval: MatFn,
    d1: Option<MatFn>,
    d2: Option<MatFn>,
}

impl RotationFamily {
    pub fn new(dim: usize, eval: MatFn) -> Self {
        Self { dim, eval, d1: None, d2: None }
    }

    pub fn with_derivative(mut self, d1: MatFn) -> Self {
        self.d1 = Some(d1);
        self
    }

    pub fn with_second_derivative(mut self, d2: MatFn) -> Self {
        self.d2 = Some(d2);
        self
    }

    pub fn identity(dim: usize) -> Self {
        let z = CMat::zeros(dim, dim);
        Self::new(dim, Arc::new(move |_| identity(dim)))
            .with_derivative(Arc::new(move |_| z.clone()))
    }

    /// Plane rotation by the angle theta(t) acting on coordinates (i, j).
    ///
    /// R(t) = [[cos, sin], [-sin, cos]] in the (i, j) plane, identity elsewhere.
    pub fn plane_rotation(
        dim: usize,
        i: usize,
        j: usize,
        theta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dtheta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        d2theta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        assert!(i < dim && j < dim && i != j);
        let th = theta.clone();
        let eval: MatFn = Arc::new(move |t| {
            let a = th(t);
            let mut r = identity(dim);
            r[(i, i)] = C64::new(a.cos(), 0.0);
            r[(i, j)] = C64::new(a.sin(), 0.0);
            r[(j, i)] = C64::new(-a.sin(), 0.0);
            r[(j, j)] = C64::new(a.cos(), 0.0);
            r
        });
        let th1 = theta.clone();
        let dth1 = dtheta.clone();
        let d1: MatFn = Arc::new(move |t| {
            let a = th1(t);
            let da = dth1(t);
            let mut r = CMat::zeros(dim, dim);
            r[(i, i)] = C64::new(-a.sin() * da, 0.0);
            r[(i, j)] = C64::new(a.cos() * da, 0.0);
            r[(j, i)] = C64::new(-a.cos() * da, 0.0);
            r[(j, j)] = C64::new(-a.sin() * da, 0.0);
            r
        });
        let th2 = theta;
        let dth2 = dtheta;
        let d2: MatFn = Arc::new(move |t| {
            let a = th2(t);
            let da = dth2(t);
            let dda = d2theta(t);
            let mut r = CMat::zeros(dim, dim);
            // d2/dt2 cos(a(t)) = -cos a * da^2 - sin a * dda, etc.
            r[(i, i)] = C64::new(-a.cos() * da * da - a.sin() * dda, 0.0);
            r[(i, j)] = C64::new(-a.sin() * da * da + a.cos() * dda, 0.0);
            r[(j, i)] = C64::new(a.sin() * da * da - a.cos() * dda, 0.0);
            r[(j, j)] = C64::new(-a.cos() * da * da - a.sin() * dda, 0.0);
            r
        });
        Self { dim, eval, d1: Some(d1), d2: Some(d2) }
    }

    pub fn eval(&self, t: f64) -> CMat {
        (self.eval)(t)
    }

    pub fn derivative(&self, t: f64) -> CMat {
        match &self.d1 {
            Some(d) => d(t),
            None => fd_derivative(|s| self.eval(s), t, f64::EPSILON.powf(0.2)),
        }
    }

    pub fn second_derivative(&self, t: f64) -> CMat {
        match &self.d2 {
            Some(d) => d(t),
            None => fd_derivative(|s| self.derivative(s), t, 1e-4),
        }
    }

    /// max over sampled t of |R(t)* R(t) - 1|.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|k| {
                let r = self.eval(k as f64 / samples as f64);
                (r.adjoint() * &r - identity(self.dim)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Conjugated family A(t) = R(t)* A0(t) R(t), with derivatives assembled by the
/// product rule whenever base and rotation supply them.
pub fn conjugate_family(base: &OperatorFamily, rotation: &RotationFamily) -> Result<OperatorFamily> {
    if base.dim != rotation.dim {
        return Err(AdiaError::DimensionMismatch(base.dim, rotation.dim));
    }
    let defect = rotation.unitarity_defect(16);
    if defect > 1e-12 {
        return Err(AdiaError::InvalidInput(format!(
            "rotation family is not unitary: defect {defect:.3e}"
        )));
    }
    let b = base.clone();
    let r = rotation.clone();
    let eval: MatFn = Arc::new(move |t| {
        let rt = r.eval(t);
        rt.adjoint() * b.eval(t) * rt
    });
    let mut fam = OperatorFamily::new(base.dim, format!("{}~conj", base.label), eval);
    if base.has_analytic_derivative() && rotation.d1.is_some() {
        let b = base.clone();
        let r = rotation.clone();
        let d1: MatFn = Arc::new(move |t| {
            let rt = r.eval(t);
            let rp = r.derivative(t);
            let a0 = b.eval(t);
            let a0p = b.derivative(t);
            rp.adjoint() * &a0 * &rt + rt.adjoint() * &a0p * &rt + rt.adjoint() * &a0 * rp
        });
        fam = fam.with_derivative(d1);
        if rotation.d2.is_some() {
            let b = base.clone();
            let r = rotation.clone();
            let d2: MatFn = Arc::new(move |t| {
                let rt = r.eval(t);
                let rp = r.derivative(t);
                let rpp = r.second_derivative(t);
                let a0 = b.eval(t);
                let a0p = b.derivative(t);
                let a0pp = b.second_derivative(t);
                rpp.adjoint() * &a0 * &rt
                    + rp.adjoint() * &a0p * &rt * C64::new(2.0, 0.0)
                    + rp.adjoint() * &a0 * &rp * C64::new(2.0, 0.0)
                    + rt.adjoint() * &a0pp * &rt
                    + rt.adjoint() * &a0p * &rp * C64::new(2.0, 0.0)
                    + rt.adjoint() * &a0 * rpp
            });
            fam = fam.with_second_derivative(d2);
        }
    }
    Ok(fam)
}

/// Projection family P(t) = R(t)* P0 R(t) for a constant projection P0.
pub fn conjugate_projection(p0: &CMat, rotation: &RotationFamily) -> (MatFn, MatFn, MatFn) {
    let p0c = p0.clone();
    let r = rotation.clone();
    let p: MatFn = Arc::new(move |t| {
        let rt = r.eval(t);
        rt.adjoint() * &p0c * rt
    });
    let p0c = p0.clone();
    let r = rotation.clone();
    let dp: MatFn = Arc::new(move |t| {
        let rt = r.eval(t);
        let rp = r.derivative(t);
        rp.adjoint() * &p0c * &rt + rt.adjoint() * &p0c * rp
    });
    let p0c = p0.clone();
    let r = rotation.clone();
    let ddp: MatFn = Arc::new(move |t| {
        let rt = r.eval(t);
        let rp = r.derivative(t);
        let rpp = r.second_derivative(t);
        rpp.adjoint() * &p0c * &rt
            + rp.adjoint() * &p0c * &rp * C64::new(2.0, 0.0)
            + rt.adjoint() * &p0c * rpp
    });
    (p, dp, ddp)
}

/// Local cubic Lagrange interpolation of matrix samples on a uniform grid.
/// Falls back to nearest-neighbor for degenerate grids.
pub fn cubic_interp(grid: &[f64], samples: &[CMat], t: f64) -> CMat {
    let n = grid.len();
    if n < 4 {
        let mut best = 0;
        for (i, &g) in grid.iter().enumerate() {
            if (g - t).abs() < (grid[best] - t).abs() {
                best = i;
            }
        }
        return samples[best].clone();
    }
    let h = grid[1] - grid[0];
    let fi = ((t - grid[0]) / h).floor() as isize;
    let i0 = (fi - 1).clamp(0, n as isize - 4) as usize;
    let xs = [grid[i0], grid[i0 + 1], grid[i0 + 2], grid[i0 + 3]];
    let mut acc = CMat::zeros(samples[0].nrows(), samples[0].ncols());
    for (k, xk) in xs.iter().enumerate() {
        let mut w = 1.0;
        for (j, xj) in xs.iter().enumerate() {
            if j != k {
                w *= (t - xj) / (xk - xj);
            }
        }
        acc += &samples[i0 + k] * C64::new(w, 0.0);
    }
    acc
}

/// The d x d upper shift N_d (ones on the superdiagonal).
pub fn upper_shift(d: usize) -> CMat {
    let mut n = CMat::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        n[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    n
}

/// lambda I + N_d, the standard shift block.
pub fn shift_block(d: usize, lambda: f64) -> CMat {
    identity(d) * C64::new(lambda, 0.0) + upper_shift(d)
}

/// Largest shift lambda keeping lambda I + N_d dissipative:
/// lambda_d = -lambda_max((N_d + N_d*)/2). Finite d only; the d -> infinity
/// limit is -1 by convention and is returned for `d == usize::MAX`.
pub fn lambda_d(d: usize) -> f64 {
    assert!(d >= 1);
    if d == usize::MAX {
        return -1.0;
    }
    if d == 1 {
        return 0.0;
    }
    let n = upper_shift(d);
    let h = (&n + n.adjoint()) * C64::new(0.5, 0.0);
    let eigs = nalgebra::SymmetricEigen::new(h).eigenvalues;
    -eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
