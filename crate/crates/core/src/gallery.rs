//! Registry of ready-made example families: rotated block models with
//! uniform, non-uniform, or absent spectral gaps, a deliberately failing
//! rank-one model, commuting closed-form models, a higher-order (m = 2)
//! model, and the slab-transport scenario. Infinite-dimensional shift models
//! are realized by truncation to a configurable dimension; truncated shifts
//! have spectrum {diagonal value} rather than a full disk, which leaves the
//! tracked eigenvalue separation intact, so the contour machinery applies
//! unchanged.

use std::sync::Arc;

use crate::adiabatic::ScalarFn;
use crate::error::{AdiaError, Result};
use crate::family::{
    conjugate_family, conjugate_projection, lambda_d, OperatorFamily, RotationFamily,
};
use crate::linop::{identity, C64, CMat};
use crate::riesz::ProjectionFamily;
use crate::spectra::SpectralWindow;

pub const DEFAULT_TRUNCATION: usize = 40;

/// Expected behavior of the adiabatic statement on an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Behavior {
    /// O(1/T) defect decay under the uniform-gap theorem.
    RateOne,
    /// Convergence without a stated rate (non-uniform gap or no gap).
    Qualitative,
    /// The adiabatic statement provably fails.
    Failure,
    /// Whether the statement holds is not known.
    Open,
    /// Higher-order (superadiabatic) decay.
    HigherOrder,
}

impl Behavior {
    pub fn tag(&self) -> &'static str {
        match self {
            Behavior::RateOne => "rate-1",
            Behavior::Qualitative => "qualitative",
            Behavior::Failure => "failure",
            Behavior::Open => "open",
            Behavior::HigherOrder => "higher-order",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GalleryInfo {
    pub id: &'static str,
    pub dim: usize,
    pub section: &'static str,
    pub behavior: Behavior,
    pub summary: &'static str,
}

/// A fully assembled example: the family plus whatever structure it carries.
pub struct GalleryModel {
    pub info: GalleryInfo,
    pub family: OperatorFamily,
    pub window: Option<SpectralWindow>,
    proj_closures: Option<(crate::family::MatFn, crate::family::MatFn, crate::family::MatFn)>,
    pub lambda: Option<ScalarFn>,
    /// Ray direction for the no-gap resolvent probes.
    pub theta0: Option<f64>,
    /// Exact evolution (t_scale, t) -> U_T(t, 0) where one exists.
    pub closed_form: Option<Arc<dyn Fn(f64, f64) -> CMat + Send + Sync>>,
    /// Regularity order m for the higher-order machinery.
    pub regularity: Option<usize>,
}

impl GalleryModel {
    /// Analytic projection family sampled on `grid`, when the example carries one.
    pub fn projections(&self, grid: &[f64]) -> Option<ProjectionFamily> {
        self.proj_closures.as_ref().map(|(p, dp, ddp)| {
            ProjectionFamily::from_closures(grid.to_vec(), p.clone(), dp.clone(), ddp.clone())
        })
    }
}

fn rot(dim: usize, i: usize, j: usize, rate: f64) -> RotationFamily {
    RotationFamily::plane_rotation(
        dim,
        i,
        j,
        Arc::new(move |t| rate * t),
        Arc::new(move |_| rate),
        Arc::new(|_| 0.0),
    )
}

fn e_proj(dim: usize, indices: &[usize]) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    for &i in indices {
        p[(i, i)] = C64::new(1.0, 0.0);
    }
    p
}

/// The non-uniform-gap dip lambda(t) = l2 - amp * ((t-1/4)(t-1/2)(t-3/4))^2,
/// touching l2 at exactly three interior times.
pub fn triple_touch_lambda(amp: f64) -> impl Fn(f64) -> f64 + Clone {
    let l2 = lambda_d(2);
    move |t: f64| {
        let q = (t - 0.25) * (t - 0.5) * (t - 0.75);
        l2 - amp * q * q
    }
}

/// lambda(t) = t^2 (sin(1/t) - 1): touches 0 infinitely often toward t = 0.
pub fn accumulating_lambda(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t * ((1.0 / t).sin() - 1.0)
    }
}

/// All registered example ids, alphabetical.
pub fn registry() -> Vec<GalleryInfo> {
    let mut v = vec![
        GalleryInfo {
            id: "bsp-5.1",
            dim: 3,
            section: "gap-uniform",
            behavior: Behavior::RateOne,
            summary: "rotated block model: isolated simple eigenvalue 0 next to a defective block",
        },
        GalleryInfo {
            id: "bsp-5.3",
            dim: 3,
            section: "gap-uniform",
            behavior: Behavior::RateOne,
            summary: "rotated block model with a moving tracked eigenvalue, uniform gap",
        },
        GalleryInfo {
            id: "bsp-5.4",
            dim: DEFAULT_TRUNCATION,
            section: "gap-uniform",
            behavior: Behavior::RateOne,
            summary: "truncated shift model with factorial weights: tracked value is not an eigenvalue pre-truncation",
        },
        GalleryInfo {
            id: "bsp-5.5",
            dim: DEFAULT_TRUNCATION,
            section: "gap-uniform",
            behavior: Behavior::RateOne,
            summary: "truncated two-point-plus-disk spectrum: tracked subset is not a single point",
        },
        GalleryInfo {
            id: "bsp-5.6",
            dim: 3,
            section: "gap-nonuniform",
            behavior: Behavior::Qualitative,
            summary: "defective eigenvalue touching the rest of the spectrum at three times",
        },
        GalleryInfo {
            id: "bsp-5.7",
            dim: 2,
            section: "gap-uniform",
            behavior: Behavior::Failure,
            summary: "rank-one model violating the dissipativity hypothesis: defect grows linearly in T",
        },
        GalleryInfo {
            id: "bsp-5.10",
            dim: 3,
            section: "gap-uniform",
            behavior: Behavior::RateOne,
            summary: "commuting upper-triangular family with exact closed-form evolution",
        },
        GalleryInfo {
            id: "bsp-6.1",
            dim: DEFAULT_TRUNCATION,
            section: "no-gap",
            behavior: Behavior::Qualitative,
            summary: "truncated shift model: tracked eigenvalue sits at the edge of a filled disk",
        },
        GalleryInfo {
            id: "bsp-6.2",
            dim: 2,
            section: "no-gap",
            behavior: Behavior::Qualitative,
            summary: "normal family with crossings accumulating at t = 0",
        },
        GalleryInfo {
            id: "bsp-6.5",
            dim: 2,
            section: "no-gap",
            behavior: Behavior::Failure,
            summary: "diagonal phase model whose spectral projections cannot be continued through t = 1/2",
        },
        GalleryInfo {
            id: "bsp-6.6",
            dim: 3,
            section: "no-gap",
            behavior: Behavior::Open,
            summary: "two-step nilpotent kernel with accumulating crossings: statement unresolved",
        },
        GalleryInfo {
            id: "bsp-7.1",
            dim: 3,
            section: "higher-order",
            behavior: Behavior::HigherOrder,
            summary: "2-regular rotated block model for the order-(m-1) superadiabatic rates",
        },
        GalleryInfo {
            id: "transport-basic",
            dim: 24 * 8,
            section: "transport",
            behavior: Behavior::RateOne,
            summary: "slab transport with quadratic scattering ramp, tracked leading mode",
        },
    ];
    v.sort_by_key(|e| e.id);
    v
}

pub fn info(id: &str) -> Result<GalleryInfo> {
    registry()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| AdiaError::InvalidInput(format!("unknown example id: {id}")))
}

/// Build a gallery example. `d_trunc` controls the truncation dimension of
/// the shift models (ignored elsewhere).
pub fn build(id: &str, d_trunc: usize) -> Result<GalleryModel> {
    let l2 = lambda_d(2);
    match id {
        "bsp-5.1" => {
            let mut a0 = CMat::zeros(3, 3);
            a0[(1, 1)] = C64::new(l2, 0.0);
            a0[(1, 2)] = C64::new(1.0, 0.0);
            a0[(2, 2)] = C64::new(l2, 0.0);
            let rotation = rot(3, 0, 1, 1.0);
            let family = conjugate_family(&OperatorFamily::constant(a0, "bsp-5.1-base"), &rotation)?;
            let closures = conjugate_projection(&e_proj(3, &[0]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Disk { center: C64::new(0.0, 0.0), radius: 0.2 }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(0.0, 0.0))),
                theta0: None,
                closed_form: None,
                regularity: Some(2),
            })
        }
        "bsp-5.3" => {
            // Same scaffolding as bsp-5.1 with the tracked eigenvalue moving:
            // lambda(t) = -(1 - cos 2 pi t)/8 in [-1/4, 0], complement at l2.
            let lam = |t: f64| -0.125 * (1.0 - (2.0 * std::f64::consts::PI * t).cos());
            let dlam = |t: f64| -0.125 * 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * t).sin();
            let base = OperatorFamily::new(
                3,
                "bsp-5.3-base",
                Arc::new(move |t| {
                    let mut m = CMat::zeros(3, 3);
                    m[(0, 0)] = C64::new(lam(t), 0.0);
                    m[(1, 1)] = C64::new(l2, 0.0);
                    m[(1, 2)] = C64::new(1.0, 0.0);
                    m[(2, 2)] = C64::new(l2, 0.0);
                    m
                }),
            )
            .with_derivative(Arc::new(move |t| {
                let mut m = CMat::zeros(3, 3);
                m[(0, 0)] = C64::new(dlam(t), 0.0);
                m
            }))
            .with_second_derivative(Arc::new(move |t| {
                let dd = -0.125 * (2.0 * std::f64::consts::PI).powi(2)
                    * (2.0 * std::f64::consts::PI * t).cos();
                let mut m = CMat::zeros(3, 3);
                m[(0, 0)] = C64::new(dd, 0.0);
                m
            }));
            let rotation = rot(3, 0, 1, 1.0);
            let family = conjugate_family(&base, &rotation)?;
            let closures = conjugate_projection(&e_proj(3, &[0]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(move |t| C64::new(lam(t), 0.0)),
                    multiplicity: 1,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(move |t| C64::new(lam(t), 0.0))),
                theta0: None,
                closed_form: None,
                regularity: Some(2),
            })
        }
        "bsp-5.4" => {
            let d = d_trunc.max(8);
            let mut a0 = CMat::zeros(d, d);
            // block on e_2.. : -1 + B with B_{k+1,k} = 1/(k+1)!
            let mut fact = 1.0;
            for k in 1..d {
                a0[(k, k)] = C64::new(-1.0, 0.0);
            }
            for k in 1..(d - 1) {
                fact *= (k + 1) as f64;
                a0[(k + 1, k)] = C64::new(1.0 / fact, 0.0);
            }
            let rotation = rot(d, 0, 1, 1.0);
            let family =
                conjugate_family(&OperatorFamily::constant(a0, "bsp-5.4-base"), &rotation)?;
            let indices: Vec<usize> = (1..d).collect();
            let closures = conjugate_projection(&e_proj(d, &indices), &rotation);
            Ok(GalleryModel {
                info: GalleryInfo { dim: d, ..info(id)? },
                family,
                window: Some(SpectralWindow::Disk { center: C64::new(-1.0, 0.0), radius: 0.5 }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(-1.0, 0.0))),
                theta0: None,
                closed_form: None,
                regularity: Some(2),
            })
        }
        "bsp-5.5" => {
            let d = d_trunc.max(8);
            let mut a0 = CMat::zeros(d, d);
            a0[(0, 0)] = C64::new(0.0, 1.0);
            a0[(1, 1)] = C64::new(0.0, -1.0);
            for k in 2..d {
                a0[(k, k)] = C64::new(-1.0, 0.0);
                if k + 1 < d {
                    a0[(k, k + 1)] = C64::new(1.0, 0.0);
                }
            }
            // rotation acts in the (e2, e3) plane
            let rotation = rot(d, 1, 2, 1.0);
            let family =
                conjugate_family(&OperatorFamily::constant(a0, "bsp-5.5-base"), &rotation)?;
            let indices: Vec<usize> = (2..d).collect();
            let closures = conjugate_projection(&e_proj(d, &indices), &rotation);
            Ok(GalleryModel {
                info: GalleryInfo { dim: d, ..info(id)? },
                family,
                window: Some(SpectralWindow::Disk { center: C64::new(-1.0, 0.0), radius: 0.6 }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(-1.0, 0.0))),
                theta0: None,
                closed_form: None,
                regularity: Some(2),
            })
        }
        "bsp-5.6" => {
            let amp = 800.0;
            let lam = triple_touch_lambda(amp);
            let dlam = move |t: f64| {
                let q = (t - 0.25) * (t - 0.5) * (t - 0.75);
                let dq = (t - 0.5) * (t - 0.75) + (t - 0.25) * (t - 0.75) + (t - 0.25) * (t - 0.5);
                -amp * 2.0 * q * dq
            };
            let lam2 = lam.clone();
            let base = OperatorFamily::new(
                3,
                "bsp-5.6-base",
                Arc::new(move |t| {
                    let mut m = CMat::zeros(3, 3);
                    m[(0, 0)] = C64::new(l2, 0.0);
                    m[(1, 1)] = C64::new(lam2(t), 0.0);
                    m[(1, 2)] = C64::new(1.0, 0.0);
                    m[(2, 2)] = C64::new(lam2(t), 0.0);
                    m
                }),
            )
            .with_derivative(Arc::new(move |t| {
                let mut m = CMat::zeros(3, 3);
                m[(1, 1)] = C64::new(dlam(t), 0.0);
                m[(2, 2)] = C64::new(dlam(t), 0.0);
                m
            }));
            let rotation = rot(3, 0, 1, 1.0);
            let family = conjugate_family(&base, &rotation)?;
            let closures = conjugate_projection(&e_proj(3, &[1, 2]), &rotation);
            let lam3 = lam.clone();
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(move |t| C64::new(lam3(t), 0.0)),
                    multiplicity: 2,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(move |t| C64::new(lam(t), 0.0))),
                theta0: None,
                closed_form: None,
                regularity: None,
            })
        }
        "bsp-5.7" => {
            // A(t) = lambda(t) * [[cos^2, cos sin], [cos sin, sin^2]](2 pi t), lambda = 1
            let base = OperatorFamily::constant(
                CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                ])),
                "bsp-5.7-base",
            );
            let rotation = RotationFamily::plane_rotation(
                2,
                0,
                1,
                Arc::new(|t| 2.0 * std::f64::consts::PI * t),
                Arc::new(|_| 2.0 * std::f64::consts::PI),
                Arc::new(|_| 0.0),
            );
            let family = conjugate_family(&base, &rotation)?;
            let closures = conjugate_projection(&e_proj(2, &[0]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(|_| C64::new(1.0, 0.0)),
                    multiplicity: 1,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(1.0, 0.0))),
                theta0: None,
                closed_form: None,
                regularity: None,
            })
        }
        "bsp-5.10" => {
            let eval = Arc::new(move |t: f64| {
                let mut m = CMat::zeros(3, 3);
                m[(0, 0)] = C64::new(l2, 0.0);
                m[(1, 1)] = C64::new(l2, 0.0);
                m[(2, 2)] = C64::new(l2, 0.0);
                m[(0, 1)] = C64::new(t.cos(), 0.0);
                m[(0, 2)] = C64::new(t.sin(), 0.0);
                m
            });
            let family = OperatorFamily::new(3, "bsp-5.10", eval).with_derivative(Arc::new(
                move |t: f64| {
                    let mut m = CMat::zeros(3, 3);
                    m[(0, 1)] = C64::new(-t.sin(), 0.0);
                    m[(0, 2)] = C64::new(t.cos(), 0.0);
                    m
                },
            ));
            let rotation = rot(3, 1, 2, 1.0);
            let closures = conjugate_projection(&e_proj(3, &[0, 2]), &rotation);
            let closed = Arc::new(move |t_scale: f64, t: f64| {
                let mut m = identity(3);
                m[(0, 1)] = C64::new(t_scale * t.sin(), 0.0);
                m[(0, 2)] = C64::new(t_scale * (1.0 - t.cos()), 0.0);
                m * C64::new((l2 * t_scale * t).exp(), 0.0)
            });
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: None, // P(t) here is deliberately not the Riesz projection
                proj_closures: Some(closures),
                lambda: Some(Arc::new(move |_| C64::new(l2, 0.0))),
                theta0: None,
                closed_form: Some(closed),
                regularity: None,
            })
        }
        "bsp-6.1" => {
            let d = d_trunc.max(8);
            let mut a0 = CMat::zeros(d, d);
            for k in 1..d {
                a0[(k, k)] = C64::new(-1.0, 0.0);
                if k + 1 < d {
                    a0[(k, k + 1)] = C64::new(1.0, 0.0);
                }
            }
            let rotation = rot(d, 0, 1, 1.0);
            let family =
                conjugate_family(&OperatorFamily::constant(a0, "bsp-6.1-base"), &rotation)?;
            let closures = conjugate_projection(&e_proj(d, &[0]), &rotation);
            Ok(GalleryModel {
                info: GalleryInfo { dim: d, ..info(id)? },
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(|_| C64::new(0.0, 0.0)),
                    multiplicity: 1,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(0.0, 0.0))),
                theta0: Some(0.0),
                closed_form: None,
                regularity: None,
            })
        }
        "bsp-6.2" => {
            let base = OperatorFamily::new(
                2,
                "bsp-6.2-base",
                Arc::new(|t: f64| {
                    CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                        C64::new(accumulating_lambda(t), 0.0),
                        C64::new(0.0, 0.0),
                    ]))
                }),
            );
            let rotation = rot(2, 0, 1, 1.0);
            let family = conjugate_family(&base, &rotation)?;
            // base has no analytic derivative, so conjugate_family falls back
            // to finite differences; the projections stay analytic.
            let closures = conjugate_projection(&e_proj(2, &[0]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(|t| C64::new(accumulating_lambda(t), 0.0)),
                    multiplicity: 1,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|t| C64::new(accumulating_lambda(t), 0.0))),
                theta0: Some(std::f64::consts::FRAC_PI_2),
                closed_form: None,
                regularity: None,
            })
        }
        "bsp-6.5" => {
            let q = |t: f64| (t - 0.5) * (t - 0.5);
            let family = OperatorFamily::new(
                2,
                "bsp-6.5",
                Arc::new(move |t: f64| {
                    CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                        C64::new(0.0, -q(t)),
                        C64::new(0.0, q(t)),
                    ]))
                }),
            )
            .with_derivative(Arc::new(move |t: f64| {
                CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    C64::new(0.0, -2.0 * (t - 0.5)),
                    C64::new(0.0, 2.0 * (t - 0.5)),
                ]))
            }));
            // int_0^t q = ((t - 1/2)^3 + 1/8) / 3
            let phase = move |t: f64| (((t - 0.5) as f64).powi(3) + 0.125) / 3.0;
            let closed = Arc::new(move |t_scale: f64, t: f64| {
                CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    C64::new(0.0, -t_scale * phase(t)).exp(),
                    C64::new(0.0, t_scale * phase(t)).exp(),
                ]))
            });
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: None,
                proj_closures: None, // the spectral projections jump at t = 1/2
                lambda: Some(Arc::new(move |t| {
                    if t < 0.5 {
                        C64::new(0.0, -q(t))
                    } else {
                        C64::new(0.0, q(t))
                    }
                })),
                theta0: Some(0.0),
                closed_form: Some(closed),
                regularity: None,
            })
        }
        "bsp-6.6" => {
            let lam = move |t: f64| l2 + accumulating_lambda(t);
            let base = OperatorFamily::new(
                3,
                "bsp-6.6-base",
                Arc::new(move |t| {
                    let mut m = CMat::zeros(3, 3);
                    m[(0, 0)] = C64::new(lam(t), 0.0);
                    m[(0, 1)] = C64::new(1.0, 0.0);
                    m[(1, 1)] = C64::new(lam(t), 0.0);
                    m[(2, 2)] = C64::new(l2, 0.0);
                    m
                }),
            );
            let rotation = rot(3, 1, 2, 1.0);
            let family = conjugate_family(&base, &rotation)?;
            let closures = conjugate_projection(&e_proj(3, &[0, 1]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Guide {
                    curve: Arc::new(move |t| C64::new(lam(t), 0.0)),
                    multiplicity: 2,
                }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(move |t| C64::new(lam(t), 0.0))),
                theta0: Some(std::f64::consts::FRAC_PI_2),
                closed_form: None,
                regularity: None,
            })
        }
        "bsp-7.1" => {
            let mu = move |t: f64| if t < 0.5 { l2 - (t - 0.5) * (t - 0.5) } else { l2 };
            let dmu = move |t: f64| if t < 0.5 { -2.0 * (t - 0.5) } else { 0.0 };
            let base = OperatorFamily::new(
                3,
                "bsp-7.1-base",
                Arc::new(move |t| {
                    let mut m = CMat::zeros(3, 3);
                    m[(1, 1)] = C64::new(mu(t), 0.0);
                    m[(1, 2)] = C64::new(1.0, 0.0);
                    m[(2, 2)] = C64::new(mu(t), 0.0);
                    m
                }),
            )
            .with_derivative(Arc::new(move |t| {
                let mut m = CMat::zeros(3, 3);
                m[(1, 1)] = C64::new(dmu(t), 0.0);
                m[(2, 2)] = C64::new(dmu(t), 0.0);
                m
            }));
            let rotation = rot(3, 0, 1, 1.0);
            let family = conjugate_family(&base, &rotation)?;
            let closures = conjugate_projection(&e_proj(3, &[0]), &rotation);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: Some(SpectralWindow::Disk { center: C64::new(0.0, 0.0), radius: 0.2 }),
                proj_closures: Some(closures),
                lambda: Some(Arc::new(|_| C64::new(0.0, 0.0))),
                theta0: None,
                closed_form: None,
                regularity: Some(2),
            })
        }
        "transport-basic" => {
            let disc = crate::transport::discretize_slab(1.0, 24, 8)?;
            let schedule = crate::transport::CrossSectionSchedule::quadratic_c(0.6, 0.3, 1.0);
            let family = crate::transport::transport_family(&disc, &schedule);
            Ok(GalleryModel {
                info: info(id)?,
                family,
                window: None,
                proj_closures: None,
                lambda: None,
                theta0: None,
                closed_form: None,
                regularity: None,
            })
        }
        other => Err(AdiaError::InvalidInput(format!("unknown example id: {other}"))),
    }
}

/// Analytic model whose rotation is trigonometric everywhere: the chain norms
/// decay factorially, which puts the superadiabatic machinery in its
/// exponential regime. This is bsp-5.1 viewed through the analytic-mode lens.
pub fn analytic_rotation_model() -> Result<GalleryModel> {
    build("bsp-5.1", DEFAULT_TRUNCATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{commuting_propagate, propagate};
    use crate::family::upper_shift;
    use crate::linop::op_norm;

    #[test]
    fn registry_sorted_unique_nonempty() {
        let reg = registry();
        assert!(!reg.is_empty());
        let mut ids: Vec<&str> = reg.iter().map(|e| e.id).collect();
        let sorted = ids.clone();
        ids.dedup();
        assert_eq!(ids.len(), reg.len(), "duplicate ids");
        assert_eq!(sorted, ids, "registry not alphabetical");
        assert_eq!(info("bsp-5.7").unwrap().behavior, Behavior::Failure);
        assert_eq!(info("bsp-6.6").unwrap().behavior, Behavior::Open);
    }

    #[test]
    fn all_examples_build_and_evaluate() {
        for entry in registry() {
            let model = build(entry.id, 12).unwrap();
            let a = model.family.eval(0.3);
            assert!(a.nrows() >= 2, "{}", entry.id);
            assert!(a.iter().all(|z| z.re.is_finite() && z.im.is_finite()), "{}", entry.id);
        }
        assert!(build("bogus", 12).is_err());
    }

    #[test]
    fn closed_form_5_10_matches_propagate() {
        let model = build("bsp-5.10", 0).unwrap();
        let closed = model.closed_form.as_ref().unwrap();
        for &t_scale in &[1.0, 16.0] {
            let u = propagate(&model.family, t_scale, 0.0, 0.8, 1e-12).unwrap();
            let want = closed(t_scale, 0.8);
            let rel = (&u - &want).norm() / want.norm();
            assert!(rel < 1e-7, "relative error {rel:.3e} at T={t_scale}");
            // the family commutes, so the exact-integral route agrees too
            let c = commuting_propagate(&model.family, t_scale, 0.0, 0.8).unwrap();
            assert!((&c - &want).norm() / want.norm() < 1e-9);
        }
    }

    #[test]
    fn closed_form_6_5_matches_propagate() {
        let model = build("bsp-6.5", 0).unwrap();
        let closed = model.closed_form.as_ref().unwrap();
        for &t_scale in &[1.0, 32.0] {
            let u = propagate(&model.family, t_scale, 0.0, 1.0, 1e-12).unwrap();
            let want = closed(t_scale, 1.0);
            assert!((&u - &want).norm() < 1e-8, "T={t_scale}");
        }
    }

    #[test]
    fn failure_example_grows_like_one_plus_t_over_8() {
        // |(1 - P(1/4)) U_T(1/4) P(0) e_1| >= 1 + T/8
        let model = build("bsp-5.7", 0).unwrap();
        let pf = model.projections(&crate::adiabatic::uniform_grid(32)).unwrap();
        let p0 = pf.eval(0.0);
        let t0 = 0.25;
        for &t_scale in &[8.0, 32.0] {
            let u = propagate(&model.family, t_scale, 0.0, t0, 1e-11).unwrap();
            let pt = pf.eval(t0);
            let e1 = CMat::from_fn(2, 1, |i, _| {
                if i == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            let val = op_norm(&((identity(2) - &pt) * &u * &p0 * &e1));
            assert!(val >= 1.0 + t_scale / 8.0 - 1e-6, "T={t_scale}: {val}");
        }
    }

    #[test]
    fn truncated_models_are_dissipative() {
        for id in ["bsp-5.4", "bsp-5.5", "bsp-6.1"] {
            let model = build(id, 16).unwrap();
            for k in 0..=4 {
                let t = k as f64 / 4.0;
                let w = crate::linop::hermitian_part_max(&model.family.eval(t));
                assert!(w <= 1e-9, "{id} at t={t}: numerical range bound {w}");
            }
        }
    }

    #[test]
    fn upper_shift_helper_matches_shift_block() {
        let n = upper_shift(4);
        assert_eq!(n[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(n[(3, 3)], C64::new(0.0, 0.0));
    }
}
