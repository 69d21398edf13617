//! Adiabatic comparison dynamics and defect metrics: the intertwining
//! generator T A + [P', P], sweep drivers tabulating how fast the defects die
//! off in T, log-log rate fits, and the no-gap machinery (scalar comparison
//! evolution, resolvent-ray profiles, extended criterion).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{AdiaError, Result};
use crate::evolution::{propagate_grid, rk45_path, DEFAULT_TOL};
use crate::family::OperatorFamily;
use crate::linop::{identity, op_norm, C64, CMat};
use crate::par::par_map;
use crate::riesz::ProjectionFamily;
use crate::spectra::golden_min;

pub type ScalarFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// The quantities the adiabatic theorems send to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// sup_t |(1 - P(t)) U_T(t) P(0)|
    ProjDefect,
    /// sup_t |P(t) U_T(t) (1 - P(0))|
    ReverseDefect,
    /// sup_t |U_{a,T}(t) - U_T(t)|
    EvolutionDefect,
    /// sup_t |V_T(t) P(0) - U_T(t) P(0)|
    NogapDefect,
}

impl Metric {
    pub fn tag(&self) -> &'static str {
        match self {
            Metric::ProjDefect => "proj-defect",
            Metric::ReverseDefect => "reverse-defect",
            Metric::EvolutionDefect => "evolution-defect",
            Metric::NogapDefect => "nogap-defect",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectRow {
    pub t_scale: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectTable {
    pub metric: Metric,
    pub rows: Vec<DefectRow>,
    pub time_grid: Vec<f64>,
    /// Rows whose propagation failed, recorded rather than fatal.
    pub failures: Vec<(f64, String)>,
}

impl DefectTable {
    pub fn new(metric: Metric, time_grid: Vec<f64>) -> Self {
        Self { metric, rows: Vec::new(), time_grid, failures: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,T,value\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.17e},{:.17e}\n", self.metric.tag(), r.t_scale, r.value));
        }
        s
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub excluded_rows: usize,
}

/// Least squares on (log T, log eta). Rows with nonpositive values are
/// excluded; fewer than 4 usable rows is an error.
pub fn rate_fit(table: &DefectTable) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.value > 0.0 && r.value.is_finite())
        .map(|r| (r.t_scale.ln(), r.value.ln()))
        .collect();
    let excluded = table.rows.len() - usable.len();
    if usable.len() < 4 {
        return Err(AdiaError::InsufficientData(format!(
            "rate fit needs >= 4 positive rows, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual_rms = (usable
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual_rms,
        t_min: table.rows.first().map(|r| r.t_scale).unwrap_or(f64::NAN),
        t_max: table.rows.last().map(|r| r.t_scale).unwrap_or(f64::NAN),
        excluded_rows: excluded,
    })
}

/// Log-linear fit (T, ln eta): slope is the exponential decay rate.
pub fn log_linear_fit(rows: &[(f64, f64)]) -> Result<(f64, f64)> {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 0.0 && r.1.is_finite())
        .map(|r| (r.0, r.1.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(AdiaError::InsufficientData("log-linear fit needs >= 3 rows".into()));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

/// Generator of the adiabatic comparison evolution: t -> T A(t) + [P'(t), P(t)].
/// Its propagator exactly intertwines P(t) with P(s).
pub fn adiabatic_generator(fam: &OperatorFamily, pf: &ProjectionFamily, t_scale: f64) -> OperatorFamily {
    let f = fam.clone();
    let p = pf.clone();
    let dim = fam.dim;
    let eval = Arc::new(move |t: f64| {
        let pt = p.eval(t);
        let dpt = p.eval_dp(t);
        let comm = &dpt * &pt - &pt * &dpt;
        f.eval(t) * C64::new(t_scale, 0.0) + comm
    });
    let f2 = fam.clone();
    let p2 = pf.clone();
    let apply = Arc::new(move |t: f64, m: &CMat| {
        let pt = p2.eval(t);
        let dpt = p2.eval_dp(t);
        f2.apply(t, m) * C64::new(t_scale, 0.0) + (&dpt * (&pt * m)) - (&pt * (&dpt * m))
    });
    let f3 = fam.clone();
    let p3 = pf.clone();
    let hint = Arc::new(move |t: f64| {
        let pt = p3.eval(t);
        let dpt = p3.eval_dp(t);
        f3.norm_bound(t) * t_scale + 2.0 * pt.norm() * dpt.norm()
    });
    OperatorFamily::new(dim, format!("{}~adiabatic(T={t_scale})", fam.label), eval)
        .with_apply(apply)
        .with_norm_hint(hint)
}

/// Generator of the no-gap comparison evolution V_T: t -> T lambda(t) + [P'(t), P(t)].
pub fn nogap_comparison_generator(
    lambda: ScalarFn,
    pf: &ProjectionFamily,
    t_scale: f64,
) -> OperatorFamily {
    let p = pf.clone();
    let dim = pf.dim();
    let eval = Arc::new(move |t: f64| {
        let pt = p.eval(t);
        let dpt = p.eval_dp(t);
        let comm = &dpt * &pt - &pt * &dpt;
        identity(dim) * (lambda(t) * C64::new(t_scale, 0.0)) + comm
    });
    OperatorFamily::new(dim, format!("nogap-comparison(T={t_scale})"), eval)
}

/// One propagation pass storing states on a grid, with short re-integrations
/// for off-grid evaluation (used by the sup refinement).
pub struct CheckpointedEvolution {
    fam: OperatorFamily,
    t_scale: f64,
    tol: f64,
    pub grid: Vec<f64>,
    pub states: Vec<CMat>,
}

impl CheckpointedEvolution {
    pub fn new(fam: &OperatorFamily, t_scale: f64, grid: &[f64], tol: f64) -> Result<Self> {
        let states = propagate_grid(fam, t_scale, 0.0, grid, tol)?;
        Ok(Self { fam: fam.clone(), t_scale, tol, grid: grid.to_vec(), states })
    }

    /// U(t, 0) for arbitrary t in [0, 1].
    pub fn at(&self, t: f64) -> Result<CMat> {
        let idx = match self.grid.iter().rposition(|&g| g <= t + 1e-15) {
            Some(i) => i,
            None => 0,
        };
        let t0 = self.grid[idx];
        if (t - t0).abs() < 1e-14 {
            return Ok(self.states[idx].clone());
        }
        let rhs = |tau: f64, y: &CMat| self.fam.apply(tau, y) * C64::new(self.t_scale, 0.0);
        let cap = |tau: f64| {
            let nrm = self.fam.norm_bound(tau) * self.t_scale;
            if nrm > 0.0 { (0.5 / nrm).min(0.25) } else { 0.25 }
        };
        let mut v = rk45_path(&rhs, self.states[idx].clone(), t0, t, self.tol, &cap, &[t])?;
        Ok(v.pop().unwrap())
    }
}

/// Max over the time grid plus golden-section refinement around the argmax.
pub fn sup_refined(g: &dyn Fn(f64) -> Result<f64>, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best = (grid[0], f64::NEG_INFINITY);
    for &t in grid {
        let v = g(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let i = grid.iter().position(|&t| t == best.0).unwrap();
    let lo = if i == 0 { grid[0] } else { grid[i - 1] };
    let hi = if i + 1 == grid.len() { grid[i] } else { grid[i + 1] };
    if hi > lo {
        let neg = |t: f64| -> f64 { g(t).map(|v| -v).unwrap_or(f64::INFINITY) };
        let t_star = golden_min(&neg, lo, hi, 1e-4 * (hi - lo).max(1e-12));
        let v_star = g(t_star)?;
        if v_star > best.1 {
            best = (t_star, v_star);
        }
    }
    Ok(best)
}

/// Inputs for a defect sweep over the adiabatic parameter T.
pub struct SweepConfig {
    pub t_scales: Vec<f64>,
    pub time_grid: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub tol: f64,
    /// Scalar eigenvalue curve; required by the nogap-defect metric.
    pub lambda: Option<ScalarFn>,
}

impl SweepConfig {
    pub fn dyadic(metrics: Vec<Metric>) -> Self {
        Self {
            t_scales: (4..=10).map(|k| (1u64 << k) as f64).collect(),
            time_grid: uniform_grid(64),
            metrics,
            tol: DEFAULT_TOL,
            lambda: None,
        }
    }
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Tabulate the requested defect metrics as functions of T.
///
/// Rows fan out to parallel workers; per-row propagation failures are
/// recorded in the table rather than aborting the sweep.
pub fn defect_sweep(
    fam: &OperatorFamily,
    pf: &ProjectionFamily,
    config: &SweepConfig,
) -> Result<Vec<DefectTable>> {
    let p0 = pf.eval(0.0);
    fn one_minus(p: &CMat) -> CMat {
        identity(p.nrows()) - p
    }

    let jobs: Vec<f64> = config.t_scales.clone();
    let rows = par_map(jobs, |t_scale| -> (f64, Result<Vec<(Metric, f64)>>) {
        let compute = || -> Result<Vec<(Metric, f64)>> {
            let u = CheckpointedEvolution::new(fam, t_scale, &config.time_grid, config.tol)?;
            let need_adiabatic = config.metrics.contains(&Metric::EvolutionDefect);
            let ua = if need_adiabatic {
                let gen = adiabatic_generator(fam, pf, t_scale);
                Some(CheckpointedEvolution::new(&gen, 1.0, &config.time_grid, config.tol)?)
            } else {
                None
            };
            let v = if config.metrics.contains(&Metric::NogapDefect) {
                let lambda = config.lambda.clone().ok_or_else(|| {
                    AdiaError::InvalidInput("nogap-defect requires a lambda curve".into())
                })?;
                let gen = nogap_comparison_generator(lambda, pf, t_scale);
                Some(CheckpointedEvolution::new(&gen, 1.0, &config.time_grid, config.tol)?)
            } else {
                None
            };
            let mut out = Vec::new();
            let u_ref = &u;
            let p0_ref = &p0;
            for metric in &config.metrics {
                let g: Box<dyn Fn(f64) -> Result<f64>> = match metric {
                    Metric::ProjDefect => Box::new(move |t: f64| {
                        let pt = pf.eval(t);
                        Ok(op_norm(&(one_minus(&pt) * u_ref.at(t)? * p0_ref)))
                    }),
                    Metric::ReverseDefect => Box::new(move |t: f64| {
                        let pt = pf.eval(t);
                        Ok(op_norm(&(pt * u_ref.at(t)? * one_minus(p0_ref))))
                    }),
                    Metric::EvolutionDefect => {
                        let ua = ua.as_ref().unwrap();
                        Box::new(move |t: f64| Ok(op_norm(&(ua.at(t)? - u_ref.at(t)?))))
                    }
                    Metric::NogapDefect => {
                        let v = v.as_ref().unwrap();
                        Box::new(move |t: f64| {
                            Ok(op_norm(&((v.at(t)? - u_ref.at(t)?) * p0_ref)))
                        })
                    }
                };
                let (_, sup) = sup_refined(&g, &config.time_grid)?;
                out.push((*metric, sup));
            }
            Ok(out)
        };
        (t_scale, compute())
    });

    let mut tables: Vec<DefectTable> = config
        .metrics
        .iter()
        .map(|m| DefectTable::new(*m, config.time_grid.clone()))
        .collect();
    for (t_scale, row) in rows {
        match row {
            Ok(values) => {
                for (metric, value) in values {
                    let table = tables.iter_mut().find(|t| t.metric == metric).unwrap();
                    table.rows.push(DefectRow { t_scale, value });
                }
            }
            Err(e) => {
                for table in tables.iter_mut() {
                    table.failures.push((t_scale, e.to_string()));
                }
            }
        }
    }
    Ok(tables)
}

/// sup over sampled (s, t) pairs of |P(t) U(t,s) - U(t,s) P(s)| for the
/// evolution generated by `gen` (T already folded in).
pub fn intertwining_defect(
    gen: &OperatorFamily,
    pf: &ProjectionFamily,
    pairs: &[(f64, f64)],
    tol: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(s, t) in pairs {
        let u = crate::evolution::propagate(gen, 1.0, s, t, tol)?;
        let pt = pf.eval(t);
        let ps = pf.eval(s);
        worst = worst.max((&pt * &u - &u * &ps).norm());
    }
    Ok(worst)
}

/// Direction and grid data for a resolvent ray probe
/// eps -> sup_t eps |(lambda(t) + eps e^{i theta0} - A(t))^{-1} W(t)|.
pub struct SpectralRay {
    pub theta0: f64,
    pub eps_grid: Vec<f64>,
    pub lambda: ScalarFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayWeight {
    /// W = identity: hypothesis check (values should stay <= M0).
    None,
    /// W = (1 - P) P' P: the quantity the no-gap lemma sends to zero.
    ProjectedDerivative,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayProfileRow {
    pub eps: f64,
    pub value: f64,
}

pub fn resolvent_ray_profile(
    fam: &OperatorFamily,
    ray: &SpectralRay,
    weight: RayWeight,
    pf: Option<&ProjectionFamily>,
    time_grid: &[f64],
) -> Result<Vec<RayProfileRow>> {
    if weight == RayWeight::ProjectedDerivative && pf.is_none() {
        return Err(AdiaError::InvalidInput("weighted ray profile needs projections".into()));
    }
    let phase = C64::new(0.0, ray.theta0).exp();
    let mut rows = Vec::with_capacity(ray.eps_grid.len());
    for &eps in &ray.eps_grid {
        let mut sup: f64 = 0.0;
        for &t in time_grid {
            let a = fam.eval(t);
            let z = (ray.lambda)(t) + phase * eps;
            let w = match weight {
                RayWeight::None => identity(fam.dim),
                RayWeight::ProjectedDerivative => {
                    let pf = pf.unwrap();
                    let p = pf.eval(t);
                    let dp = pf.eval_dp(t);
                    (identity(fam.dim) - &p) * dp * p
                }
            };
            let r = crate::linop::resolvent_solve(&a, z, &w)
                .map_err(|_| AdiaError::InvalidRay { t, eps })?;
            sup = sup.max(eps * op_norm(&r));
        }
        rows.push(RayProfileRow { eps, value: sup });
    }
    Ok(rows)
}

/// Result of the extended no-gap criterion sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ExtendedCriterion {
    pub table: DefectTable,
    /// sup over grid of the splitting-identity residual
    /// |(1-P)(U_T P(0) + Y1 + Y2)| per T row, where Y1 and Y2 are the two
    /// Duhamel integrals of the underlying identity.
    pub identity_residuals: Vec<(f64, f64)>,
}

/// Criterion values sup_t |(1-P(t)) int_0^t U_T(t,s) T (lambda(s) - A(s)) V_T(s) P(0) ds|
/// per T, via a stacked inhomogeneous ODE rather than nested quadrature: the
/// integral Y1(t) solves Y1' = T A Y1 + T (lambda - A) V_T P(0), Y1(0) = 0.
pub fn extended_criterion(
    fam: &OperatorFamily,
    lambda: ScalarFn,
    pf: &ProjectionFamily,
    t_scales: &[f64],
    time_grid: &[f64],
    tol: f64,
) -> Result<ExtendedCriterion> {
    let dim = fam.dim;
    let p0 = pf.eval(0.0);
    let mut table = DefectTable::new(Metric::NogapDefect, time_grid.to_vec());
    table.metric = Metric::NogapDefect; // criterion rows reuse the nogap tag in CSV
    let mut identity_residuals = Vec::new();

    let jobs: Vec<f64> = t_scales.to_vec();
    let results = par_map(jobs, |t_scale| -> (f64, Result<(f64, f64)>) {
        let run = || -> Result<(f64, f64)> {
            let vgen = nogap_comparison_generator(lambda.clone(), pf, t_scale);
            // Stacked state [U; V; Y1; Y2], all dim x dim blocks.
            let rhs = |tau: f64, y: &CMat| {
                let a = fam.eval(tau);
                let vg = vgen.eval(tau);
                let u = y.view((0, 0), (dim, dim)).into_owned();
                let v = y.view((dim, 0), (dim, dim)).into_owned();
                let y1 = y.view((2 * dim, 0), (dim, dim)).into_owned();
                let y2 = y.view((3 * dim, 0), (dim, dim)).into_owned();
                let ta = &a * C64::new(t_scale, 0.0);
                let vp0 = &v * &p0;
                let du = &ta * &u;
                let dv = &vg * &v;
                let dy1 = &ta * &y1 + (identity(dim) * (lambda(tau) * C64::new(t_scale, 0.0)) - &ta) * &vp0;
                let dy2 = &ta * &y2 + pf.eval_dp(tau) * &vp0;
                let mut out = CMat::zeros(4 * dim, dim);
                out.view_mut((0, 0), (dim, dim)).copy_from(&du);
                out.view_mut((dim, 0), (dim, dim)).copy_from(&dv);
                out.view_mut((2 * dim, 0), (dim, dim)).copy_from(&dy1);
                out.view_mut((3 * dim, 0), (dim, dim)).copy_from(&dy2);
                out
            };
            let mut y0 = CMat::zeros(4 * dim, dim);
            y0.view_mut((0, 0), (dim, dim)).copy_from(&identity(dim));
            y0.view_mut((dim, 0), (dim, dim)).copy_from(&identity(dim));
            let cap = |tau: f64| {
                let nrm = fam.norm_bound(tau) * t_scale * 2.0 + 2.0;
                (0.5 / nrm).min(0.25)
            };
            let states = rk45_path(&rhs, y0, 0.0, 1.0, tol, &cap, time_grid)?;
            let mut sup: f64 = 0.0;
            let mut ident: f64 = 0.0;
            for (k, &t) in time_grid.iter().enumerate() {
                let y = &states[k];
                let u = y.view((0, 0), (dim, dim)).into_owned();
                let y1 = y.view((2 * dim, 0), (dim, dim)).into_owned();
                let y2 = y.view((3 * dim, 0), (dim, dim)).into_owned();
                let pt = pf.eval(t);
                let q = identity(dim) - &pt;
                sup = sup.max(op_norm(&(&q * &y1)));
                // (1-P)(U P0 + Y1 + Y2) = (1-P) V P0 = 0 by intertwining
                let resid = op_norm(&(&q * (&u * &p0 + &y1 + &y2)));
                ident = ident.max(resid);
            }
            Ok((sup, ident))
        };
        (t_scale, run())
    });

    for (t_scale, r) in results {
        match r {
            Ok((sup, ident)) => {
                table.rows.push(DefectRow { t_scale, value: sup });
                identity_residuals.push((t_scale, ident));
            }
            Err(e) => table.failures.push((t_scale, e.to_string())),
        }
    }
    Ok(ExtendedCriterion { table, identity_residuals })
}
