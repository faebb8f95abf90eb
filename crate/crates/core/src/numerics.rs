//! Dense complex matrix support shared by all solvers.
//!
//! Thin layer over nalgebra: Hermitian eigen-extremes, Moore-Penrose
//! pseudo-inverse, Hermitian/general linear solves, base-2 log-determinants,
//! and a monotone scalar bisection. Everything here is a pure function on
//! immutable inputs and safe to call from concurrent workers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{HbfError, Result};

/// Dense complex double-precision matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Complex64>;
/// Dense real double-precision matrix.
pub type RMat = DMatrix<f64>;
/// Dense real column vector.
pub type RVec = nalgebra::DVector<f64>;

/// Relative singular-value cutoff for the pseudo-inverse:
/// `sigma_max * PINV_RCOND * max(rows, cols)`.
pub const PINV_RCOND: f64 = 1e-12;

/// Checks that every entry of `a` is finite.
pub fn ensure_finite(name: &str, a: &CMat) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(HbfError::InvalidInput(format!(
            "{name} contains non-finite entries"
        )))
    }
}

/// Hermitian part `(A + A^H) / 2`, used to suppress round-off asymmetry
/// before eigen-decompositions and Cholesky factorizations.
pub fn herm(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Largest eigenvalue of the Hermitian Gram matrix `A A^H`.
///
/// The nonzero spectra of `A A^H` and `A^H A` coincide, so the smaller of
/// the two Grams is formed. The result is clamped at zero.
pub fn max_eig_gram(a: &CMat) -> Result<f64> {
    if a.is_empty() {
        return Err(HbfError::InvalidInput("max_eig_gram: empty matrix".into()));
    }
    ensure_finite("max_eig_gram input", a)?;
    let gram = if a.nrows() <= a.ncols() {
        a * a.adjoint()
    } else {
        a.adjoint() * a
    };
    let eig = herm(&gram).symmetric_eigen();
    Ok(eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v)))
}

/// Moore-Penrose pseudo-inverse via truncated singular decomposition.
///
/// Singular values below `sigma_max * 1e-12 * max(rows, cols)` are treated
/// as zero, so rank-deficient inputs are handled without error. Input
/// entries must be finite.
pub fn pinv(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &v| m.max(v));
    if sigma_max == 0.0 {
        return CMat::zeros(a.ncols(), a.nrows());
    }
    let eps = sigma_max * PINV_RCOND * a.nrows().max(a.ncols()) as f64;
    svd.pseudo_inverse(eps)
        .expect("pseudo_inverse: cutoff is non-negative")
}

/// Solves `A X = B` for Hermitian positive-definite `A` (Cholesky, with an
/// LU fallback for marginally indefinite inputs).
pub fn solve_hpd(a: &CMat, b: &CMat) -> Result<CMat> {
    let ah = herm(a);
    if let Some(chol) = ah.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    ah.lu()
        .solve(b)
        .ok_or_else(|| HbfError::SingularMatrix("Hermitian solve failed".into()))
}

/// Solves `A X = B` for general square `A` via LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| HbfError::SingularMatrix("LU solve failed".into()))
}

/// Base-2 log-determinant of a Hermitian positive-definite matrix.
pub fn logdet2_hpd(a: &CMat) -> Result<f64> {
    let chol = herm(a)
        .cholesky()
        .ok_or_else(|| HbfError::SingularMatrix("logdet: matrix not positive definite".into()))?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        acc += l[(i, i)].re.ln();
    }
    Ok(2.0 * acc / std::f64::consts::LN_2)
}

/// Eigen-decomposition of a Hermitian matrix (symmetrized first).
///
/// Returns `(Q, lambda)` with `A = Q diag(lambda) Q^H`.
pub fn herm_eigen(a: &CMat) -> (CMat, Vec<f64>) {
    let eig = herm(a).symmetric_eigen();
    (eig.eigenvectors, eig.eigenvalues.iter().copied().collect())
}

const BISECT_EXPAND_MAX: usize = 128;
const BISECT_ITER_MAX: usize = 400;

/// Finds `x` with `|f(x) - target| <= tol` for a continuous monotone `f`.
///
/// The initial bracket `[lo, hi]` is expanded geometrically (up to 128
/// doublings) until `target` lies between `f(lo)` and `f(hi)`; if that never
/// happens a no-root error is returned. The result does not depend on the
/// initial bracket width beyond round-off.
pub fn bisect<F>(f: F, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(HbfError::InvalidInput(format!(
            "bisect: invalid bracket [{lo}, {hi}]"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let mut fhi = f(hi);

    let straddles = |a: f64, b: f64| (a - target) * (b - target) <= 0.0;
    let mut expansions = 0;
    while !straddles(flo, fhi) {
        if expansions >= BISECT_EXPAND_MAX {
            return Err(HbfError::NoRoot(format!(
                "bisect: target {target} not bracketed by f on [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        let increasing = fhi >= flo;
        let need_higher_f = target > flo.max(fhi);
        // Grow on the side where the monotone f can still reach the target.
        if need_higher_f == increasing {
            hi += width;
            fhi = f(hi);
        } else {
            lo -= width;
            flo = f(lo);
        }
        expansions += 1;
    }

    let increasing = fhi >= flo;
    for _ in 0..BISECT_ITER_MAX {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm - target).abs() <= tol {
            return Ok(mid);
        }
        if (fm < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    Err(HbfError::NoRoot(format!(
        "bisect: tolerance {tol} not reached near x = {}",
        0.5 * (lo + hi)
    )))
}
