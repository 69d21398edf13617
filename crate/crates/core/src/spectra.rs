//! Spectral clustering along t: gap and isolation diagnostics, Hausdorff
//! distance, and randomized (M, omega)-stability probes.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{AdiaError, Result};
use crate::family::OperatorFamily;
use crate::linop::{eigenvalues, hermitian_part_max, mat_exp, op_norm, C64};
use crate::par::par_map;

/// Which part of sigma(A(t)) is being tracked.
#[derive(Clone)]
pub enum SpectralWindow {
    /// Everything inside the open disk |z - center| < radius.
    Disk { center: C64, radius: f64 },
    /// Everything with Re z >= min_re.
    HalfPlane { min_re: f64 },
    /// Eigenvalues within `radius` of any listed target.
    Targets { points: Vec<C64>, radius: f64 },
    /// The eigenvalue(s) nearest to a guide curve t -> lambda(t), with a
    /// continuity tie-break against the previous grid point's match.
    Guide { curve: Arc<dyn Fn(f64) -> C64 + Send + Sync>, multiplicity: usize },
}

impl std::fmt::Debug for SpectralWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Disk { center, radius } => write!(f, "Disk({center}, r={radius})"),
            Self::HalfPlane { min_re } => write!(f, "HalfPlane(Re >= {min_re})"),
            Self::Targets { points, radius } => write!(f, "Targets({points:?}, r={radius})"),
            Self::Guide { multiplicity, .. } => write!(f, "Guide(mult={multiplicity})"),
        }
    }
}

impl SpectralWindow {
    /// Split a spectrum into (inside, outside) at parameter t.
    /// `prev_inside` feeds the guide-curve continuity tie-break.
    pub fn split(&self, t: f64, spectrum: &[C64], prev_inside: Option<&[C64]>) -> (Vec<C64>, Vec<C64>) {
        match self {
            Self::Disk { center, radius } => partition(spectrum, |z| (z - center).norm() < *radius),
            Self::HalfPlane { min_re } => partition(spectrum, |z| z.re >= *min_re),
            Self::Targets { points, radius } => partition(spectrum, |z| {
                points.iter().any(|p| (z - p).norm() <= *radius)
            }),
            Self::Guide { curve, multiplicity } => {
                // Primary key: distance to the guide curve. The previous grid
                // point's match only breaks near-ties, so a match never jumps
                // branches through a crossing.
                let guide = curve(t);
                let prev_mean = prev_inside.filter(|p| !p.is_empty()).map(|prev| {
                    prev.iter().sum::<C64>() / C64::new(prev.len() as f64, 0.0)
                });
                let scale = spectrum.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let mut idx: Vec<usize> = (0..spectrum.len()).collect();
                idx.sort_by(|&i, &j| {
                    let di = (spectrum[i] - guide).norm();
                    let dj = (spectrum[j] - guide).norm();
                    if (di - dj).abs() <= 1e-9 * scale {
                        if let Some(pm) = prev_mean {
                            let pi = (spectrum[i] - pm).norm();
                            let pj = (spectrum[j] - pm).norm();
                            return pi.partial_cmp(&pj).unwrap();
                        }
                    }
                    di.partial_cmp(&dj).unwrap()
                });
                let take: Vec<usize> = idx.into_iter().take(*multiplicity).collect();
                let inside: Vec<C64> = take.iter().map(|&i| spectrum[i]).collect();
                let outside: Vec<C64> = (0..spectrum.len())
                    .filter(|i| !take.contains(i))
                    .map(|i| spectrum[i])
                    .collect();
                (inside, outside)
            }
        }
    }
}

fn partition(spectrum: &[C64], pred: impl Fn(&C64) -> bool) -> (Vec<C64>, Vec<C64>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for z in spectrum {
        if pred(z) {
            inside.push(*z);
        } else {
            outside.push(*z);
        }
    }
    (inside, outside)
}

pub const UNIFORM_GAP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct GapSample {
    pub t: f64,
    pub gap: f64,
    pub n_in: usize,
    pub n_out: usize,
}

#[derive(Debug, Clone)]
pub struct GapProfile {
    pub samples: Vec<GapSample>,
    pub per_t_inside: Vec<Vec<C64>>,
    pub per_t_outside: Vec<Vec<C64>>,
    pub min_gap: f64,
    pub uniform: bool,
    /// Refined times where the tracked cluster touches the complement.
    pub crossings: Vec<f64>,
    /// Set when detected crossings bunch at the grid resolution, i.e. there
    /// are more crossings than the grid can separate.
    pub crossings_saturated: bool,
}

impl GapProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,gap,n_in,n_out\n");
        for row in &self.samples {
            s.push_str(&format!("{:.17e},{:.17e},{},{}\n", row.t, row.gap, row.n_in, row.n_out));
        }
        s
    }
}

/// min distance between the two eigenvalue groups; +infinity for an empty
/// complement.
fn cluster_gap(inside: &[C64], outside: &[C64]) -> f64 {
    if outside.is_empty() || inside.is_empty() {
        return f64::INFINITY;
    }
    let mut g = f64::INFINITY;
    for a in inside {
        for b in outside {
            g = g.min((a - b).norm());
        }
    }
    g
}

/// Per-t spectral clustering with gap diagnostics and crossing refinement.
pub fn gap_profile(fam: &OperatorFamily, window: &SpectralWindow, grid: &[f64]) -> Result<GapProfile> {
    let spectra: Vec<Vec<C64>> = {
        let results = par_map(grid.to_vec(), |t| eigenvalues(&fam.eval(t)));
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            out.push(r?);
        }
        out
    };

    let mut samples = Vec::with_capacity(grid.len());
    let mut per_t_inside = Vec::with_capacity(grid.len());
    let mut per_t_outside = Vec::with_capacity(grid.len());
    let mut prev: Option<Vec<C64>> = None;
    for (i, &t) in grid.iter().enumerate() {
        let (inside, outside) = window.split(t, &spectra[i], prev.as_deref());
        let gap = cluster_gap(&inside, &outside);
        samples.push(GapSample { t, gap, n_in: inside.len(), n_out: outside.len() });
        prev = Some(inside.clone());
        per_t_inside.push(inside);
        per_t_outside.push(outside);
    }
    let min_gap = samples.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let uniform = min_gap >= UNIFORM_GAP_THRESHOLD;

    // Crossing detection: local minima of the gap dipping below threshold,
    // refined by golden-section search (the gap typically touches zero
    // tangentially, so sign-change bisection alone does not apply).
    let gap_at = |t: f64| -> f64 {
        let spec = eigenvalues(&fam.eval(t)).unwrap_or_default();
        let (inside, outside) = window.split(t, &spec, None);
        cluster_gap(&inside, &outside)
    };
    let mut crossings = Vec::new();
    let mut saturated = false;
    if !uniform {
        for i in 0..samples.len() {
            let g = samples[i].gap;
            if g < UNIFORM_GAP_THRESHOLD * 1e3 || g < min_gap * 10.0 + UNIFORM_GAP_THRESHOLD {
                let is_local_min = (i == 0 || samples[i - 1].gap >= g)
                    && (i + 1 == samples.len() || samples[i + 1].gap >= g);
                if !is_local_min {
                    continue;
                }
                let lo = if i == 0 { grid[0] } else { grid[i - 1] };
                let hi = if i + 1 == samples.len() { grid[i] } else { grid[i + 1] };
                let t_star = golden_min(&gap_at, lo, hi, 1e-10);
                if gap_at(t_star) < UNIFORM_GAP_THRESHOLD.max(min_gap * 2.0) {
                    if let Some(&last) = crossings.last() {
                        let spacing: f64 = grid.get(1).map(|&g1| g1 - grid[0]).unwrap_or(1.0);
                        let last: f64 = last;
                        if (t_star - last).abs() <= 2.0 * spacing {
                            saturated = true;
                        }
                        if (t_star - last).abs() < 1e-9 {
                            continue;
                        }
                    }
                    crossings.push(t_star);
                }
            }
        }
    }

    Ok(GapProfile {
        samples,
        per_t_inside,
        per_t_outside,
        min_gap,
        uniform,
        crossings,
        crossings_saturated: saturated,
    })
}

/// Golden-section minimizer on [lo, hi] to absolute tolerance `tol` in t.
pub fn golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Max of the two directed sup-distances between nonempty finite sets.
pub fn hausdorff(e: &[C64], f: &[C64]) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(AdiaError::InvalidInput("hausdorff needs nonempty sets".into()));
    }
    let directed = |from: &[C64], to: &[C64]| -> f64 {
        from.iter()
            .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(e, f).max(directed(f, e)))
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// max_t lambda_max((A(t) + A(t)*)/2): the quasicontractive growth bound.
    pub omega_prime: f64,
    /// Empirical growth exponent max over sampled (t, s) of log|e^{A(t)s}| / s.
    pub omega_hat: f64,
    /// max over random ordered products of |prod e^{A(t_i) s_i}| e^{-omega' sum s_i}.
    pub m_hat: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Randomized falsifier for claimed (M, omega)-stability: 64 ordered products
/// of length <= 16 with ascending t and s_i in (0, 1]. Not a certificate.
pub fn stability_probe(fam: &OperatorFamily, samples: usize, seed: u64) -> Result<StabilityReport> {
    if samples == 0 {
        return Err(AdiaError::InvalidInput("samples must be >= 1".into()));
    }
    let grid: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
    let omega_prime = grid
        .iter()
        .map(|&t| hermitian_part_max(&fam.eval(t)))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega_hat = f64::NEG_INFINITY;
    let mut m_hat: f64 = 0.0;
    for _ in 0..samples {
        let len = rng.random_range(1..=16usize);
        let mut ts: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..=1.0)).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ss: Vec<f64> = (0..len).map(|_| rng.random_range(1e-3..=1.0)).collect();
        let mut prod = crate::linop::identity(fam.dim);
        let mut s_total = 0.0;
        for (t_i, s_i) in ts.iter().zip(ss.iter()) {
            let factor = mat_exp(&(fam.eval(*t_i) * C64::new(*s_i, 0.0)))?;
            // time-ordered: later factors act on the left
            prod = factor * prod;
            s_total += s_i;
            let nrm = op_norm(&prod);
            m_hat = m_hat.max(nrm * (-omega_prime * s_total).exp());
        }
        // empirical single-factor growth exponents
        for (t_i, s_i) in ts.iter().zip(ss.iter()) {
            let nrm = op_norm(&mat_exp(&(fam.eval(*t_i) * C64::new(*s_i, 0.0)))?);
            omega_hat = omega_hat.max(nrm.ln() / s_i);
        }
    }
    Ok(StabilityReport { omega_prime, omega_hat, m_hat, samples, seed })
}
