//! Dense complex-matrix kernel: exponentials, resolvent solves, eigenvalues, norms.
//!
//! Everything here works on `DMatrix<Complex64>` and is pure: no global state,
//! safe to call from parallel workers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{AdiaError, Result};

pub type C64 = Complex64;
/// Dense complex matrix, the working representation of a bounded operator.
pub type CMat = DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_finite(a: &CMat) -> Result<()> {
    if a.nrows() == 0 || a.nrows() != a.ncols() {
        return Err(AdiaError::InvalidInput(format!(
            "expected square matrix with dim >= 1, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(AdiaError::InvalidInput("non-finite entries".into()));
    }
    Ok(())
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    a.clone().singular_values()[0]
}

/// Spectral-norm estimate by power iteration on A* A: cheap at large
/// dimensions where the full SVD is overkill (defect tables, benches).
pub fn op_norm_est(a: &CMat) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + ((i * 37) % 11) as f64 * 0.09, 0.03 * ((i * 13) % 7) as f64));
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    v /= C64::new(nv, 0.0);
    let mut sigma2 = 0.0f64;
    for _ in 0..200 {
        let w = a.adjoint() * (a * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw;
        v = w / C64::new(nw, 0.0);
        if (next - sigma2).abs() <= 1e-9 * next.max(1e-300) {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

/// One-norm (maximum absolute column sum); cheap upper-bound companion to `op_norm`.
pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frob_norm(a: &CMat) -> f64 {
    a.norm()
}

/// Largest eigenvalue of the Hermitian part (A + A*)/2.
///
/// This is the quasicontractive growth bound of e^{As}: the family is
/// dissipative iff the returned value is <= 0.
pub fn hermitian_part_max(a: &CMat) -> f64 {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eigs = nalgebra::SymmetricEigen::new(h).eigenvalues;
    eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

// Pade-13 coefficients for the diagonal rational approximant of exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the order-13 Pade approximant.
pub fn mat_exp(a: &CMat) -> Result<CMat> {
    check_finite(a)?;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5_f64.powi(s), 0.0);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let id = identity(n);

    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &a * (&a6 * u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let lu = denom.lu();
    let mut r = lu
        .solve(&numer)
        .ok_or_else(|| AdiaError::InvalidInput("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Quick condition screen from the LU pivot spread.
fn pivot_condition(lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let n = u.nrows().min(u.ncols());
    let mut pmax: f64 = 0.0;
    let mut pmin = f64::INFINITY;
    for i in 0..n {
        let p = u[(i, i)].norm();
        pmax = pmax.max(p);
        pmin = pmin.min(p);
    }
    if pmin == 0.0 {
        f64::INFINITY
    } else {
        pmax / pmin
    }
}

const NEAR_SPECTRUM_COND: f64 = 1e12;

/// Solve (z - A) X = rhs by partially pivoted LU.
///
/// Rejects systems whose pivot-based condition estimate exceeds 1e12, which is
/// the "z is numerically in the spectrum" signal used by the contour code.
pub fn resolvent_solve(a: &CMat, z: C64, rhs: &CMat) -> Result<CMat> {
    check_finite(a)?;
    if a.nrows() != rhs.nrows() {
        return Err(AdiaError::DimensionMismatch(a.nrows(), rhs.nrows()));
    }
    let m = identity(a.nrows()) * z - a;
    let lu = m.lu();
    let cond = pivot_condition(&lu);
    if !cond.is_finite() || cond > NEAR_SPECTRUM_COND {
        return Err(AdiaError::NearSpectrum { z, cond });
    }
    lu.solve(rhs)
        .ok_or(AdiaError::NearSpectrum { z, cond: f64::INFINITY })
}

/// Apply the resolvent (z - A)^{-1} to the identity.
pub fn resolvent(a: &CMat, z: C64) -> Result<CMat> {
    resolvent_solve(a, z, &identity(a.nrows()))
}

/// Eigenvalues with right eigenvectors and residual certificates.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Sorted by descending real part, ties by ascending imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Columns are right eigenvectors matching `eigenvalues` (unit norm).
    pub right_vectors: CMat,
    /// max_i |A v_i - lambda_i v_i| over the returned pairs.
    pub max_residual: f64,
    /// Condition estimate of the eigenvector basis (sigma_max / sigma_min).
    pub condition: f64,
}

fn eig_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

/// Full eigendecomposition of a dense complex matrix.
///
/// Eigenvalues come from the complex Schur form; eigenvectors are recovered by
/// inverse iteration on shifted LU solves, which is robust at the moderate
/// dimensions used here. Defective matrices still return a vector per
/// eigenvalue with its achieved residual; `condition` goes large in that case.
pub fn eig(a: &CMat) -> Result<EigenDecomposition> {
    check_finite(a)?;
    let n = a.nrows();
    let schur = a.clone().schur();
    let vals = schur.eigenvalues().ok_or_else(|| {
        AdiaError::EigFailure("Schur iteration did not converge".into())
    })?;
    let mut eigenvalues: Vec<C64> = vals.iter().cloned().collect();
    eigenvalues.sort_by(eig_order);

    let scale = op_norm(a).max(1e-300);
    let mut vecs = CMat::zeros(n, n);
    let mut max_residual: f64 = 0.0;
    for (k, &lam) in eigenvalues.iter().enumerate() {
        let v = inverse_iteration(a, lam, scale, k)?;
        let res = (a * &v - &v * lam).norm();
        max_residual = max_residual.max(res);
        vecs.set_column(k, &v);
    }
    let sv = vecs.clone().singular_values();
    let smin = sv[sv.len() - 1];
    let condition = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
    Ok(EigenDecomposition {
        eigenvalues,
        right_vectors: vecs,
        max_residual,
        condition,
    })
}

fn inverse_iteration(a: &CMat, lam: C64, scale: f64, seed: usize) -> Result<CVec> {
    let n = a.nrows();
    // Shift slightly off the eigenvalue so the solve stays finite.
    let shift = lam + C64::new(scale * 1e-11, scale * 0.7e-11);
    let m = identity(n) * shift - a;
    let lu = m.lu();
    // Deterministic pseudo-random start vector, decorrelated per eigenvalue index.
    let mut v = CVec::from_fn(n, |i, _| {
        let x = ((i * 2654435761 + seed * 40503 + 12345) % 65536) as f64 / 65536.0 - 0.5;
        let y = ((i * 1597334677 + seed * 69069 + 54321) % 65536) as f64 / 65536.0 - 0.5;
        C64::new(x + 1.0, y)
    });
    v /= C64::new(v.norm(), 0.0);
    let mut best = v.clone();
    let mut best_res = f64::INFINITY;
    for _ in 0..4 {
        let w = match lu.solve(&v) {
            Some(w) => w,
            None => break,
        };
        let nw = w.norm();
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        v = w / C64::new(nw, 0.0);
        let res = (a * &v - &v * lam).norm();
        if res < best_res {
            best_res = res;
            best = v.clone();
        }
        if res <= scale * 1e-13 {
            break;
        }
    }
    Ok(best)
}

/// Eigenvalues only (Schur), sorted like `eig`.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    check_finite(a)?;
    let schur = a.clone().schur();
    let vals = schur
        .eigenvalues()
        .ok_or_else(|| AdiaError::EigFailure("Schur iteration did not converge".into()))?;
    let mut v: Vec<C64> = vals.iter().cloned().collect();
    v.sort_by(eig_order);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(n: usize, rows: &[[f64; 6]]) -> CMat {
        // test helper: real part only, for quick fixtures
        CMat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Test-only oracle: 30-term Taylor sum of exp(A), valid for |A| <= ~1.
    fn taylor_exp(a: &CMat, terms: usize) -> CMat {
        let n = a.nrows();
        let mut sum = identity(n);
        let mut term = identity(n);
        for k in 1..=terms {
            term = (&term * a) / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    fn pseudo_random(n: usize, seed: u64) -> CMat {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        CMat::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((s >> 33) as f64) / (u32::MAX as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = ((s >> 33) as f64) / (u32::MAX as f64) - 0.5;
            C64::new(x, y)
        })
    }

    #[test]
    fn mat_exp_zero_is_identity() {
        let a = CMat::zeros(3, 3);
        let e = mat_exp(&a).unwrap();
        assert!((e - identity(3)).norm() < 1e-15);
    }

    #[test]
    fn mat_exp_nilpotent_terminates() {
        let a = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let e = mat_exp(&a).unwrap();
        let expect = CMat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        ]);
        assert!((e - expect).norm() < 1e-14);
    }

    #[test]
    fn mat_exp_matches_taylor_oracle() {
        let mut a = pseudo_random(4, 7);
        let nrm = op_norm(&a);
        a /= C64::new(nrm / 0.9, 0.0); // |A| <= 0.9 so the Taylor oracle converges fast
        let e = mat_exp(&a).unwrap();
        let t = taylor_exp(&a, 30);
        assert!((e - t).norm() < 1e-12);
    }

    #[test]
    fn mat_exp_submultiplicative_bound() {
        for seed in 0..5 {
            let a = pseudo_random(5, seed);
            let e = mat_exp(&a).unwrap();
            assert!(op_norm(&e) <= (op_norm(&a)).exp() + 1e-9);
        }
    }

    #[test]
    fn mat_exp_rejects_non_finite() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(mat_exp(&a), Err(AdiaError::InvalidInput(_))));
    }

    #[test]
    fn resolvent_trivial_cases() {
        let a = CMat::zeros(3, 3);
        let x = resolvent(&a, C64::new(1.0, 0.0)).unwrap();
        assert!((x - identity(3)).norm() < 1e-14);

        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]));
        let z = C64::new(2.0, 0.0);
        let x = resolvent(&d, z).unwrap();
        assert!((x[(0, 0)] - (z - C64::new(0.0, 1.0)).inv()).norm() < 1e-14);
        assert!((x[(1, 1)] - (z + C64::new(1.0, 0.0)).inv()).norm() < 1e-14);
    }

    #[test]
    fn resolvent_residual_oracle() {
        let a = pseudo_random(5, 3);
        // Outside all Gershgorin disks: |z| > max row sum.
        let z = C64::new(one_norm(&a) + 2.0, 0.3);
        let rhs = pseudo_random(5, 11);
        let x = resolvent_solve(&a, z, &rhs).unwrap();
        let residual = ((identity(5) * z - &a) * &x - &rhs).norm();
        assert!(residual <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn resolvent_rejects_spectrum_point() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let err = resolvent(&d, C64::new(1.0, 0.0));
        assert!(matches!(err, Err(AdiaError::NearSpectrum { .. })));
    }

    #[test]
    fn eig_diagonal() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
        ]));
        let e = eig(&d).unwrap();
        assert!((e.eigenvalues[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((e.eigenvalues[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((e.eigenvalues[2] - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(e.max_residual < 1e-10);
    }

    #[test]
    fn eig_shift_block_multiplicity() {
        // lambda I + upper shift: eigenvalue lambda with multiplicity d
        let d = 5;
        let lam = C64::new(-0.5, 0.25);
        let mut a = CMat::zeros(d, d);
        for i in 0..d {
            a[(i, i)] = lam;
            if i + 1 < d {
                a[(i, i + 1)] = C64::new(1.0, 0.0);
            }
        }
        let e = eig(&a).unwrap();
        for v in &e.eigenvalues {
            assert!((v - lam).norm() < 1e-2, "defective eigenvalue cluster spread");
        }
        let mean: C64 = e.eigenvalues.iter().sum::<C64>() / C64::new(d as f64, 0.0);
        assert!((mean - lam).norm() < 1e-10, "cluster mean drifted: {mean}");
    }

    /// Test-only oracle: characteristic polynomial coefficients by
    /// Faddeev-LeVerrier, roots by Durand-Kerner. Fully independent of the
    /// Schur path used by `eig`.
    fn char_poly_roots(a: &CMat) -> Vec<C64> {
        let n = a.nrows();
        // p(z) = z^n + c[1] z^{n-1} + ... + c[n]
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        let mut m = CMat::zeros(n, n);
        for k in 1..=n {
            m = a * &m + identity(n) * *coeffs.last().unwrap();
            let c = -(a * &m).diagonal().iter().sum::<C64>() / C64::new(k as f64, 0.0);
            coeffs.push(c);
        }
        // Durand-Kerner from a spread of starting points.
        let mut roots: Vec<C64> = (0..n)
            .map(|k| C64::new(0.4, 0.9).powu(k as u32 + 1))
            .collect();
        let eval = |z: C64| {
            let mut p = C64::new(0.0, 0.0);
            for c in &coeffs {
                p = p * z + c;
            }
            p
        };
        for _ in 0..200 {
            let mut delta: f64 = 0.0;
            for i in 0..n {
                let mut denom = C64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-14 {
                break;
            }
        }
        roots
    }

    #[test]
    fn eig_matches_char_poly_oracle() {
        let a = pseudo_random(6, 42);
        let got = eig(&a).unwrap().eigenvalues;
        let mut want = char_poly_roots(&a);
        want.sort_by(eig_order);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-8, "eig {g} vs oracle {w}");
        }
    }

    #[test]
    fn op_norm_basics() {
        assert!((op_norm(&identity(4)) - 1.0).abs() < 1e-14);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!((op_norm(&d) - 3.0).abs() < 1e-14);
    }

    /// Test-only oracle: power iteration on A*A gives sqrt(lambda_max).
    fn power_norm(a: &CMat) -> f64 {
        let h = a.adjoint() * a;
        let n = h.nrows();
        let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + (i as f64) * 0.3, 0.1));
        let mut lam = 0.0;
        for _ in 0..500 {
            let w = &h * &v;
            let nw = w.norm();
            v = w / C64::new(nw, 0.0);
            lam = nw;
        }
        lam.sqrt()
    }

    #[test]
    fn op_norm_matches_power_oracle() {
        let a = pseudo_random(6, 9);
        assert!((op_norm(&a) - power_norm(&a)).abs() < 1e-10);
    }

    #[test]
    fn hermitian_part_of_dissipative_shift() {
        let rows = [
            [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        ];
        let a = from_rows(6, &rows);
        let w = hermitian_part_max(&a);
        // -1 + cos(pi/7) < 0: strictly dissipative
        assert!(w < 0.0);
        assert!((w - (-1.0 + (std::f64::consts::PI / 7.0).cos())).abs() < 1e-12);
    }
}
