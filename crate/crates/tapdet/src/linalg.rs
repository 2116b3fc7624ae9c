//! Dense linear-algebra kernels for the symplectic spectrum machinery.
//!
//! Symplectic eigenvalues are the moduli of the (purely imaginary) spectrum
//! of `cov * Omega`. Rather than running a complex eigensolver on that
//! non-symmetric product, we factor `cov = T T^T` and observe that
//! `cov * Omega` is similar to the skew-symmetric `K = T^T Omega T`, whose
//! singular values are exactly the symplectic eigenvalues (each twice).
//!
//! The factor is taken from the symmetric eigendecomposition,
//! `T = Q diag(sqrt(lambda))`, not from a Cholesky: the diagonal scaling
//! keeps the rounding of `K` multiplicative, and a one-sided Jacobi SVD then
//! delivers the singular values with high relative accuracy. That matters
//! because the physically interesting eigenvalues sit just above 1/2 and
//! enter logarithms through their distance from 1/2.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symplectic form for `m` modes in qq..pp ordering: [[0, I], [-I, 0]].
pub(crate) fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let n = 2 * modes;
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..modes {
        omega[(i, modes + i)] = 1.0;
        omega[(modes + i, i)] = -1.0;
    }
    omega
}

/// Symmetric square-root-style factorization `cov = T T^T` with
/// `T = Q diag(sqrt(lambda))`, plus the explicit inverse
/// `T^{-1} = diag(1/sqrt(lambda)) Q^T`. Fails when `cov` is not positive
/// definite (every physical covariance is).
pub(crate) fn spd_factor(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = nalgebra::SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NonPhysical(
            "covariance matrix is not positive definite".into(),
        ));
    }
    let n = cov.nrows();
    let mut t = eig.eigenvectors.clone();
    let mut t_inv = eig.eigenvectors.transpose();
    for j in 0..n {
        let s = eig.eigenvalues[j].sqrt();
        for i in 0..n {
            t[(i, j)] *= s;
            t_inv[(j, i)] /= s;
        }
    }
    Ok((t, t_inv))
}

/// One-sided Jacobi SVD of a square matrix: returns `(v, sigma)` with
/// `a = u diag(sigma) v^T`, `v` orthogonal. Column rotations are applied
/// until the Gram matrix is diagonal to working precision.
pub(crate) fn jacobi_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    for _ in 0..64 {
        let mut max_off = 0.0f64;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let app: f64 = w.column(p).dot(&w.column(p));
                let aqq: f64 = w.column(q).dot(&w.column(q));
                let apq: f64 = w.column(p).dot(&w.column(q));
                let scale = (app * aqq).sqrt();
                if scale == 0.0 || apq.abs() <= 1e-30 * scale {
                    continue;
                }
                max_off = max_off.max(apq.abs() / scale);
                // Jacobi rotation zeroing the (p, q) Gram entry
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if max_off < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge in 64 sweeps".into()));
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    Ok((v, sigma))
}

/// Spectral data for one Gaussian state used by the QRE formula: the factor
/// `t` (with its inverse), the Jacobi basis `v` of `K^T K`, and the
/// symplectic eigenvalue attached to each column (singular values of `K`).
pub(crate) struct SymplecticSpectrum {
    pub t: DMatrix<f64>,
    pub t_inv: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

pub(crate) fn symplectic_spectrum(cov: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let modes = cov.nrows() / 2;
    let (t, t_inv) = spd_factor(cov)?;
    let k = t.transpose() * symplectic_form(modes) * &t;
    let (v, sigma) = jacobi_svd(&k)?;
    Ok(SymplecticSpectrum { t, t_inv, v, sigma })
}

/// Sorted symplectic eigenvalues, one per mode (the singular values of `K`
/// come in equal pairs; adjacent pairs are averaged).
pub(crate) fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let spec = symplectic_spectrum(cov)?;
    let mut s = spec.sigma;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(s.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}
