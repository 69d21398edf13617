//! Propagators for y' = T A(t) y on [0,1]: adaptive embedded Runge-Kutta
//! reference integrator, frozen-coefficient Kato products, truncated Dyson
//! series on nested Gauss-Legendre grids, the commuting-family closed form and
//! Duhamel perturbation iterates.

use crate::error::{AdiaError, Result};
use crate::family::OperatorFamily;
use crate::linop::{identity, mat_exp, op_norm, C64, CMat};

pub const DEFAULT_TOL: f64 = 1e-10;

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

fn cscale(mut m: CMat, s: f64) -> CMat {
    for z in m.iter_mut() {
        *z = C64::new(z.re * s, z.im * s);
    }
    m
}

/// One integration pass of Y' = rhs(tau, Y) from s to t with checkpoints.
///
/// `rhs` is the full right-hand side (any T scaling is the caller's business);
/// `step_cap` bounds the step at a given tau, realizing the step * |generator|
/// <= 1/2 policy. Returns Y at every requested checkpoint (ascending, within
/// [s, t]; t itself need not be listed).
pub fn rk45_path(
    rhs: &dyn Fn(f64, &CMat) -> CMat,
    y0: CMat,
    s: f64,
    t: f64,
    tol: f64,
    step_cap: &dyn Fn(f64) -> f64,
    checkpoints: &[f64],
) -> Result<Vec<CMat>> {
    assert!(s <= t);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut y = y0;
    let mut tau = s;
    let mut ck = checkpoints.iter().peekable();
    while let Some(&&c) = ck.peek() {
        if c <= s {
            out.push(y.clone());
            ck.next();
        } else {
            break;
        }
    }
    if t == s {
        for _ in ck {
            out.push(y.clone());
        }
        return Ok(out);
    }

    let span = t - s;
    let mut h = step_cap(tau).min(span).max(span * 1e-12);
    let mut k1 = rhs(tau, &y);
    let hmin = span * 1e-13;
    let mut steps: u64 = 0;

    while tau < t {
        steps += 1;
        if steps > 5_000_000 {
            return Err(AdiaError::IntegrationFailure {
                t_reached: tau,
                reason: "step budget exhausted (stiffness beyond budget)".into(),
            });
        }
        // Land exactly on the next checkpoint or on t.
        let next_stop = ck.peek().map(|&&c| c).unwrap_or(t).min(t);
        h = h.min(step_cap(tau)).min(next_stop - tau).max(hmin);

        let k2 = rhs(tau + C2 * h, &(&y + cscale(k1.clone(), A21 * h)));
        let k3 = rhs(
            tau + C3 * h,
            &(&y + cscale(k1.clone(), A31 * h) + cscale(k2.clone(), A32 * h)),
        );
        let k4 = rhs(
            tau + C4 * h,
            &(&y + cscale(k1.clone(), A41 * h)
                + cscale(k2.clone(), A42 * h)
                + cscale(k3.clone(), A43 * h)),
        );
        let k5 = rhs(
            tau + C5 * h,
            &(&y + cscale(k1.clone(), A51 * h)
                + cscale(k2.clone(), A52 * h)
                + cscale(k3.clone(), A53 * h)
                + cscale(k4.clone(), A54 * h)),
        );
        let k6 = rhs(
            tau + h,
            &(&y + cscale(k1.clone(), A61 * h)
                + cscale(k2.clone(), A62 * h)
                + cscale(k3.clone(), A63 * h)
                + cscale(k4.clone(), A64 * h)
                + cscale(k5.clone(), A65 * h)),
        );
        let y5 = &y
            + cscale(k1.clone(), B1 * h)
            + cscale(k3.clone(), B3 * h)
            + cscale(k4.clone(), B4 * h)
            + cscale(k5.clone(), B5 * h)
            + cscale(k6.clone(), B6 * h);
        let k7 = rhs(tau + h, &y5);
        let err_mat = cscale(k1.clone(), E1 * h)
            + cscale(k3.clone(), E3 * h)
            + cscale(k4.clone(), E4 * h)
            + cscale(k5.clone(), E5 * h)
            + cscale(k6.clone(), E6 * h)
            + cscale(k7.clone(), E7 * h);
        let scale = y.norm().max(y5.norm()).max(1.0);
        let err = err_mat.norm() / scale;

        if err <= tol || h <= hmin * 2.0 {
            tau += h;
            y = y5;
            k1 = k7; // FSAL
            while let Some(&&c) = ck.peek() {
                if c <= tau + hmin {
                    out.push(y.clone());
                    ck.next();
                } else {
                    break;
                }
            }
        }
        let factor = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            5.0
        };
        h = (h * factor.clamp(0.2, 5.0)).max(hmin);
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(AdiaError::IntegrationFailure {
                t_reached: tau,
                reason: "state blew up".into(),
            });
        }
        if tau < t && h < hmin * 1.5 && err > tol * 100.0 {
            return Err(AdiaError::IntegrationFailure {
                t_reached: tau,
                reason: format!("step underflow (err {err:.3e})"),
            });
        }
    }
    for _ in ck {
        out.push(y.clone());
    }
    Ok(out)
}

fn family_cap(fam: &OperatorFamily, t_scale: f64) -> impl Fn(f64) -> f64 + '_ {
    family_cap_scaled(fam, t_scale, 0.5)
}

fn family_cap_scaled(fam: &OperatorFamily, t_scale: f64, cap: f64) -> impl Fn(f64) -> f64 + '_ {
    move |tau: f64| {
        let nrm = fam.norm_bound(tau) * t_scale;
        if nrm > 0.0 {
            (cap / nrm).min(0.25)
        } else {
            0.25
        }
    }
}

/// U_T(t, s): adaptive RK on U' = T A(tau) U with local error control at `tol`
/// and steps capped so that step * T * |A| <= 1/2.
pub fn propagate(fam: &OperatorFamily, t_scale: f64, s: f64, t: f64, tol: f64) -> Result<CMat> {
    check_span(s, t)?;
    let rhs = |tau: f64, y: &CMat| fam.apply(tau, y) * C64::new(t_scale, 0.0);
    let cap = family_cap(fam, t_scale);
    let mut v = rk45_path(&rhs, identity(fam.dim), s, t, tol, &cap, &[t])?;
    Ok(v.pop().unwrap())
}

/// U_T(t_j, s) for every grid point t_j >= s in one integration pass.
pub fn propagate_grid(
    fam: &OperatorFamily,
    t_scale: f64,
    s: f64,
    grid: &[f64],
    tol: f64,
) -> Result<Vec<CMat>> {
    let t_end = grid.iter().cloned().fold(s, f64::max);
    let rhs = |tau: f64, y: &CMat| fam.apply(tau, y) * C64::new(t_scale, 0.0);
    let cap = family_cap(fam, t_scale);
    rk45_path(&rhs, identity(fam.dim), s, t_end, tol, &cap, grid)
}

/// Like `propagate_grid` with the step * T * |A| cap relaxed to `cap_scale`.
/// The default 0.5 is very conservative for strongly dissipative systems;
/// values up to ~2.5 stay inside the stability region of the 5(4) pair with
/// the error controller still active. Callers are expected to validate a
/// relaxed cap against the default on a cheap instance.
pub fn propagate_grid_capped(
    fam: &OperatorFamily,
    t_scale: f64,
    s: f64,
    grid: &[f64],
    tol: f64,
    cap_scale: f64,
) -> Result<Vec<CMat>> {
    let t_end = grid.iter().cloned().fold(s, f64::max);
    let rhs = |tau: f64, y: &CMat| fam.apply(tau, y) * C64::new(t_scale, 0.0);
    let cap = family_cap_scaled(fam, t_scale, cap_scale);
    rk45_path(&rhs, identity(fam.dim), s, t_end, tol, &cap, grid)
}

/// Y(t_j) for Y' = T A Y + W(tau), Y(s) = 0: the Duhamel accumulator
/// Y(t) = int_s^t U_T(t,r) W(r) dr evaluated without nested quadrature.
pub fn propagate_inhomogeneous_grid(
    fam: &OperatorFamily,
    t_scale: f64,
    s: f64,
    grid: &[f64],
    forcing: &dyn Fn(f64) -> CMat,
    tol: f64,
) -> Result<Vec<CMat>> {
    let t_end = grid.iter().cloned().fold(s, f64::max);
    let rhs = |tau: f64, y: &CMat| fam.apply(tau, y) * C64::new(t_scale, 0.0) + forcing(tau);
    let cap = family_cap(fam, t_scale);
    rk45_path(&rhs, CMat::zeros(fam.dim, fam.dim), s, t_end, tol, &cap, grid)
}

fn check_span(s: f64, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) || s > t {
        return Err(AdiaError::InvalidInput(format!(
            "need 0 <= s <= t <= 1, got s={s}, t={t}"
        )));
    }
    Ok(())
}

/// Convenience handle bundling a family with its adiabatic scale.
#[derive(Clone)]
pub struct Propagator {
    pub family: OperatorFamily,
    pub t_scale: f64,
    pub tol: f64,
}

impl Propagator {
    pub fn new(family: OperatorFamily, t_scale: f64, tol: f64) -> Self {
        Self { family, t_scale, tol }
    }

    pub fn u(&self, s: f64, t: f64) -> Result<CMat> {
        propagate(&self.family, self.t_scale, s, t, self.tol)
    }
}

/// Ordered product of frozen exponentials over the 1/k partition of [0,1];
/// coefficients are frozen at the left end of each partition cell.
pub fn kato_product(fam: &OperatorFamily, t_scale: f64, k: usize, s: f64, t: f64) -> Result<CMat> {
    check_span(s, t)?;
    if k == 0 {
        return Err(AdiaError::InvalidInput("k must be >= 1".into()));
    }
    let kf = k as f64;
    let cell = |x: f64| (x * kf).floor().min(kf - 1.0) / kf;
    let mut u = identity(fam.dim);
    let mut left = s;
    while left < t - 1e-15 {
        let anchor = cell(left);
        let right = (anchor + 1.0 / kf).min(t);
        let step = mat_exp(&(fam.eval(anchor) * C64::new(t_scale * (right - left), 0.0)))?;
        u = step * u;
        left = right;
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Gauss-Legendre machinery for the Dyson iterated integrals.

/// Nodes and weights of n-point Gauss-Legendre on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-flavored initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if n == 0 {
        0.0
    } else {
        (n as f64) * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Partial-integral weights for a 16-node GL panel: w[q][r] approximates
/// int_{-1}^{x_q} l_r(x) dx for the Lagrange basis l_r on the panel nodes.
/// Computed once with a 64-node rule, which is exact for degree-15 basis
/// polynomials up to rounding.
fn partial_weights(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let (gx, gw) = gauss_legendre(64);
    // Barycentric weights for the panel nodes.
    let mut bary = vec![1.0; n];
    for r in 0..n {
        for j in 0..n {
            if j != r {
                bary[r] /= nodes[r] - nodes[j];
            }
        }
    }
    let lagrange = |r: usize, x: f64| -> f64 {
        let mut num = 1.0;
        for j in 0..n {
            if j != r {
                num *= x - nodes[j];
            }
        }
        num * bary[r]
    };
    let mut w = vec![vec![0.0; n]; n];
    for q in 0..n {
        let a = -1.0;
        let b = nodes[q];
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for r in 0..n {
            let mut acc = 0.0;
            for (x, wt) in gx.iter().zip(gw.iter()) {
                acc += wt * lagrange(r, mid + half * x);
            }
            w[q][r] = acc * half;
        }
    }
    w
}

/// Truncated Dyson series with the remainder bound reported alongside.
#[derive(Debug, Clone)]
pub struct DysonTruncation {
    pub value: CMat,
    /// |term_j| for j = 0..=order.
    pub term_norms: Vec<f64>,
    /// (T c (t-s))^{n+1} / (n+1)! * exp(T c (t-s)) with c = max sampled |A|.
    pub remainder_bound: f64,
}

/// Partial sum of the iterated-integral (Dyson) series, computed level by
/// level on a composite Gauss-Legendre grid. Order is capped at 30.
pub fn dyson_truncated(
    fam: &OperatorFamily,
    t_scale: f64,
    s: f64,
    t: f64,
    order: usize,
) -> Result<DysonTruncation> {
    check_span(s, t)?;
    let order = order.min(30);
    let dim = fam.dim;
    let c = (0..=32)
        .map(|i| op_norm(&fam.eval(s + (t - s) * i as f64 / 32.0)))
        .fold(0.0, f64::max);
    let budget = t_scale * c * (t - s);

    let (nodes16, w16) = gauss_legendre(16);
    let part = partial_weights(&nodes16);
    // Panels sized so each carries a modest fraction of the total budget.
    let panels = ((budget / 2.0).ceil() as usize).clamp(1, 64);

    // Global node list: for each panel, 16 mapped nodes.
    let mut xs: Vec<f64> = Vec::with_capacity(panels * 16);
    let mut panel_bounds = Vec::with_capacity(panels + 1);
    for p in 0..=panels {
        panel_bounds.push(s + (t - s) * p as f64 / panels as f64);
    }
    for p in 0..panels {
        let (a, b) = (panel_bounds[p], panel_bounds[p + 1]);
        for &x in &nodes16 {
            xs.push(0.5 * (a + b) + 0.5 * (b - a) * x);
        }
    }
    let a_at: Vec<CMat> = xs
        .iter()
        .map(|&x| fam.eval(x) * C64::new(t_scale, 0.0))
        .collect();

    // F_0 = identity everywhere; F_{j}(x) = int_s^x A F_{j-1}.
    let mut f_nodes: Vec<CMat> = vec![identity(dim); xs.len()];
    let mut sum = identity(dim);
    let mut term_norms = vec![1.0];

    for _level in 1..=order {
        let integrand: Vec<CMat> = (0..xs.len()).map(|i| &a_at[i] * &f_nodes[i]).collect();
        let mut new_nodes: Vec<CMat> = Vec::with_capacity(xs.len());
        let mut carry = CMat::zeros(dim, dim); // integral up to current panel start
        for p in 0..panels {
            let (a, b) = (panel_bounds[p], panel_bounds[p + 1]);
            let half = 0.5 * (b - a);
            for q in 0..16 {
                let mut acc = carry.clone();
                for r in 0..16 {
                    acc += &integrand[p * 16 + r] * C64::new(part[q][r] * half, 0.0);
                }
                new_nodes.push(acc);
            }
            let mut full = CMat::zeros(dim, dim);
            for r in 0..16 {
                full += &integrand[p * 16 + r] * C64::new(w16[r] * half, 0.0);
            }
            carry += full;
        }
        let f_end = carry; // level-j iterated integral evaluated at t
        f_nodes = new_nodes;
        sum += &f_end;
        term_norms.push(op_norm(&f_end));
    }

    let mut log_rem = 0.0;
    for j in 1..=(order + 1) {
        log_rem += (budget / j as f64).ln();
    }
    let remainder_bound = (log_rem + budget).exp();
    Ok(DysonTruncation { value: sum, term_norms, remainder_bound })
}

/// e^{T int_s^t A} for pairwise-commuting families. The commutation screen
/// samples a 33-point grid and errors on the worst violating pair.
pub fn commuting_propagate(fam: &OperatorFamily, t_scale: f64, s: f64, t: f64) -> Result<CMat> {
    check_span(s, t)?;
    let grid: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
    let mats: Vec<CMat> = grid.iter().map(|&x| fam.eval(x)).collect();
    let scale = mats.iter().map(op_norm).fold(0.0, f64::max);
    let mut worst = (0.0, 0.0, 0.0f64);
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let comm = (&mats[i] * &mats[j] - &mats[j] * &mats[i]).norm();
            if comm > worst.2 {
                worst = (grid[i], grid[j], comm);
            }
        }
    }
    if worst.2 > 1e-10 * scale * scale {
        return Err(AdiaError::CommutationViolation { t1: worst.0, t2: worst.1, norm: worst.2 });
    }
    let integral = adaptive_matrix_integral(&|x| fam.eval(x), s, t, 1e-13);
    mat_exp(&(integral * C64::new(t_scale, 0.0)))
}

/// Composite 16-node GL with panel doubling until the result stabilizes.
pub fn adaptive_matrix_integral(f: &dyn Fn(f64) -> CMat, s: f64, t: f64, tol: f64) -> CMat {
    let (nodes, weights) = gauss_legendre(16);
    let quad = |panels: usize| -> CMat {
        let probe = f(s);
        let mut acc = CMat::zeros(probe.nrows(), probe.ncols());
        for p in 0..panels {
            let a = s + (t - s) * p as f64 / panels as f64;
            let b = s + (t - s) * (p + 1) as f64 / panels as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in nodes.iter().zip(weights.iter()) {
                acc += f(mid + half * x) * C64::new(w * half, 0.0);
            }
        }
        acc
    };
    let mut panels = 1;
    let mut prev = quad(panels);
    loop {
        panels *= 2;
        let cur = quad(panels);
        let diff = (&cur - &prev).norm();
        if diff <= tol * cur.norm().max(1.0) || panels >= 256 {
            return cur;
        }
        prev = cur;
    }
}

/// Duhamel iterates: V_0 = U, V_{j+1}(t,s) = int_s^t U(t,r) B(r) V_j(r,s) dr,
/// summed to the requested order. Returns the summed propagator and the
/// individual iterate norms at (s, t).
pub struct PerturbationSeries {
    pub total: CMat,
    pub iterate_norms: Vec<f64>,
}

pub fn perturbation_series(
    fam_a: &OperatorFamily,
    fam_b: &OperatorFamily,
    t_scale: f64,
    order: usize,
    s: f64,
    t: f64,
    tol: f64,
) -> Result<PerturbationSeries> {
    if fam_a.dim != fam_b.dim {
        return Err(AdiaError::DimensionMismatch(fam_a.dim, fam_b.dim));
    }
    check_span(s, t)?;
    let dim = fam_a.dim;
    // Stacked system: W_0' = T A W_0, W_j' = T A W_j + B W_{j-1}.
    // Stored as one tall matrix [(order+1) * dim] x dim.
    let n_blocks = order + 1;
    let rhs = |tau: f64, y: &CMat| {
        let a = fam_a.eval(tau) * C64::new(t_scale, 0.0);
        let b = fam_b.eval(tau);
        let mut out = CMat::zeros(n_blocks * dim, dim);
        for j in 0..n_blocks {
            let yj = y.view((j * dim, 0), (dim, dim)).into_owned();
            let mut block = &a * &yj;
            if j > 0 {
                let yprev = y.view(((j - 1) * dim, 0), (dim, dim)).into_owned();
                block += &b * &yprev;
            }
            out.view_mut((j * dim, 0), (dim, dim)).copy_from(&block);
        }
        out
    };
    let mut y0 = CMat::zeros(n_blocks * dim, dim);
    y0.view_mut((0, 0), (dim, dim)).copy_from(&identity(dim));
    let cap = move |tau: f64| {
        let nrm = fam_a.norm_bound(tau) * t_scale + fam_b.norm_bound(tau);
        if nrm > 0.0 {
            (0.5 / nrm).min(0.25)
        } else {
            0.25
        }
    };
    let mut path = rk45_path(&rhs, y0, s, t, tol, &cap, &[t])?;
    let yt = path.pop().unwrap();
    let mut total = CMat::zeros(dim, dim);
    let mut iterate_norms = Vec::with_capacity(n_blocks);
    for j in 0..n_blocks {
        let wj = yt.view((j * dim, 0), (dim, dim)).into_owned();
        iterate_norms.push(op_norm(&wj));
        total += &wj;
    }
    Ok(PerturbationSeries { total, iterate_norms })
}
