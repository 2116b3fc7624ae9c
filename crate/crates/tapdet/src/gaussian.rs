//! Phase-space representation of Gaussian bosonic states and the lossy
//! thermal-noise channel.
//!
//! Conventions, fixed once for the whole crate:
//! - quadrature ordering is q1..qm p1..pm,
//! - the vacuum has variance 1/2 (covariance I/2),
//! - a state is physical iff every symplectic eigenvalue of its covariance
//!   is at least 1/2.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack allowed below 1/2 in the symplectic-eigenvalue physicality check.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Thermal occupancies in [-CLAMP_TOL, 0] are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// An m-mode Gaussian state: mean vector (length 2m) and symmetric,
/// physical covariance matrix (2m x 2m).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawGaussianState", into = "RawGaussianState")]
pub struct GaussianState {
    mode_count: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// JSON shape: {"mode_count": m, "mean": [...], "cov": [[...], ...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGaussianState {
    mode_count: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<RawGaussianState> for GaussianState {
    type Error = Error;

    fn try_from(raw: RawGaussianState) -> Result<Self> {
        let n = 2 * raw.mode_count;
        if raw.mean.len() != n {
            return Err(Error::InvalidArgument(format!(
                "mean has length {}, expected {}",
                raw.mean.len(),
                n
            )));
        }
        if raw.cov.len() != n || raw.cov.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!("cov must be {n}x{n}")));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| raw.cov[i][j]);
        GaussianState::new(DVector::from_vec(raw.mean), cov)
    }
}

impl From<GaussianState> for RawGaussianState {
    fn from(state: GaussianState) -> Self {
        let n = 2 * state.mode_count;
        RawGaussianState {
            mode_count: state.mode_count,
            mean: state.mean.iter().copied().collect(),
            cov: (0..n)
                .map(|i| (0..n).map(|j| state.cov[(i, j)]).collect())
                .collect(),
        }
    }
}

impl GaussianState {
    /// Validates symmetry, dimensions and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 || n % 2 != 0 || cov.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "covariance must be square of even dimension, got {}x{}",
                n,
                cov.ncols()
            )));
        }
        if mean.len() != n {
            return Err(Error::InvalidArgument(format!(
                "mean has length {}, expected {}",
                mean.len(),
                n
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) || cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("state entries must be finite".into()));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::Structure(format!(
                "covariance asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}"
            )));
        }
        let state = GaussianState {
            mode_count: n / 2,
            mean,
            cov,
        };
        let nu_min = state
            .symplectic_eigenvalues()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        // rounding the stored entries alone can move a symplectic eigenvalue
        // by ~eps * ||cov||^2, so the slack has to grow with the matrix scale
        let scale = state.cov.amax() * n as f64;
        let tol = PHYSICALITY_TOL.max(4.0 * f64::EPSILON * scale * scale);
        if nu_min < 0.5 - tol {
            return Err(Error::NonPhysical(format!(
                "smallest symplectic eigenvalue {nu_min:.12} is below 1/2"
            )));
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Symplectic eigenvalues (moduli of the spectrum of cov*Omega), sorted
    /// ascending, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::symplectic_eigenvalues(&self.cov)
    }

    /// Mean photon number carried by one mode:
    /// (cov_qq + cov_pp - 1)/2 + (mu_q^2 + mu_p^2)/2.
    pub fn photon_number_in_mode(&self, mode: usize) -> Result<f64> {
        if mode >= self.mode_count {
            return Err(Error::InvalidArgument(format!(
                "mode index {mode} out of range for {} modes",
                self.mode_count
            )));
        }
        let m = self.mode_count;
        let cov_part = 0.5 * (self.cov[(mode, mode)] + self.cov[(m + mode, m + mode)] - 1.0);
        let mean_part = 0.5 * (self.mean[mode].powi(2) + self.mean[m + mode].powi(2));
        Ok(cov_part + mean_part)
    }

    /// Total mean photon number: (tr(cov) - m)/2 + |mean|^2/2.
    pub fn total_photon_number(&self) -> f64 {
        0.5 * (self.cov.trace() - self.mode_count as f64) + 0.5 * self.mean.norm_squared()
    }

    /// Appends an uncorrelated vacuum mode.
    pub fn with_vacuum_mode(&self) -> GaussianState {
        let m = self.mode_count;
        let n_new = 2 * (m + 1);
        let mut mean = DVector::zeros(n_new);
        let mut cov = DMatrix::zeros(n_new, n_new);
        for i in 0..m {
            mean[i] = self.mean[i];
            mean[m + 1 + i] = self.mean[m + i];
        }
        let map = |i: usize| if i < m { i } else { i + 1 };
        for i in 0..2 * m {
            for j in 0..2 * m {
                cov[(map(i), map(j))] = self.cov[(i, j)];
            }
        }
        cov[(m, m)] = 0.5;
        cov[(n_new - 1, n_new - 1)] = 0.5;
        GaussianState {
            mode_count: m + 1,
            mean,
            cov,
        }
    }
}

/// The change-detection setting: input energy, thermal noise, and the pre-
/// and postchange transmittances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeScenario {
    pub n_bar: f64,
    pub n_bar_b: f64,
    pub eta0: f64,
    pub eta1: f64,
}

impl ChangeScenario {
    pub fn new(n_bar: f64, n_bar_b: f64, eta0: f64, eta1: f64) -> Result<Self> {
        let s = ChangeScenario {
            n_bar,
            n_bar_b,
            eta0,
            eta1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_bar", self.n_bar),
            ("n_bar_b", self.n_bar_b),
            ("eta0", self.eta0),
            ("eta1", self.eta1),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
            }
        }
        if self.n_bar < 0.0 {
            return Err(Error::InvalidArgument(format!("n_bar must be >= 0, got {}", self.n_bar)));
        }
        if self.n_bar_b < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "n_bar_b must be >= 0, got {}",
                self.n_bar_b
            )));
        }
        for (name, eta) in [("eta0", self.eta0), ("eta1", self.eta1)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {eta}"
                )));
            }
        }
        Ok(())
    }

    /// Transmittance of the pre (s=0) or post (s=1) channel.
    pub fn eta(&self, postchange: bool) -> f64 {
        if postchange {
            self.eta1
        } else {
            self.eta0
        }
    }
}

/// Result of diagonalizing a two-mode channel output with a two-mode
/// squeezer: the squeezer coefficient and the two thermal occupancies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeStandardForm {
    pub nu: f64,
    pub n_t1: f64,
    pub n_t2: f64,
}

/// Two-mode squeezed vacuum with mean photon number `n_bar` per mode.
///
/// Covariance blocks: qq = [[m1, m2], [m2, m1]], pp = [[m1, -m2], [-m2, m1]]
/// with m1 = n_bar + 1/2 and m2 = sqrt(n_bar(n_bar+1)); the state is pure.
pub fn make_tmsv(n_bar: f64) -> Result<GaussianState> {
    if !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::InvalidArgument(format!("n_bar must be >= 0, got {n_bar}")));
    }
    let m1 = n_bar + 0.5;
    let m2 = (n_bar * (n_bar + 1.0)).sqrt();
    let cov = DMatrix::from_row_slice(
        4,
        4,
        &[
            m1, m2, 0.0, 0.0, //
            m2, m1, 0.0, 0.0, //
            0.0, 0.0, m1, -m2, //
            0.0, 0.0, -m2, m1,
        ],
    );
    GaussianState::new(DVector::zeros(4), cov)
}

/// Coherent state with mean photon number `n_bar`, displaced along q.
pub fn make_coherent(n_bar: f64) -> Result<GaussianState> {
    if !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::InvalidArgument(format!("n_bar must be >= 0, got {n_bar}")));
    }
    let mean = DVector::from_vec(vec![(2.0 * n_bar).sqrt(), 0.0]);
    let cov = DMatrix::identity(2, 2) * 0.5;
    GaussianState::new(mean, cov)
}

/// Displaced TMSV with signal-mode energy `n_bar` split between squeezing
/// (fraction `kappa`) and a q-quadrature displacement (fraction 1-kappa).
pub fn make_displaced_tmsv(n_bar: f64, kappa: f64) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidArgument(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let tmsv = make_tmsv(kappa * n_bar)?;
    let mut mean = DVector::zeros(4);
    mean[0] = (2.0 * (1.0 - kappa) * n_bar).sqrt();
    GaussianState::new(mean, tmsv.cov().clone())
}

/// Sends one mode through the lossy thermal-noise channel: quadratures
/// scaled by sqrt(eta), with (n_bar_b + 1/2)(1 - eta) of added noise.
pub fn apply_lossy_thermal(
    state: &GaussianState,
    mode: usize,
    eta: f64,
    n_bar_b: f64,
) -> Result<GaussianState> {
    let m = state.mode_count();
    if mode >= m {
        return Err(Error::InvalidArgument(format!(
            "mode index {mode} out of range for {m} modes"
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta must lie in [0, 1], got {eta}")));
    }
    if !n_bar_b.is_finite() || n_bar_b < 0.0 {
        return Err(Error::InvalidArgument(format!("n_bar_b must be >= 0, got {n_bar_b}")));
    }
    let sqrt_eta = eta.sqrt();
    let mut x = DMatrix::identity(2 * m, 2 * m);
    x[(mode, mode)] = sqrt_eta;
    x[(m + mode, m + mode)] = sqrt_eta;
    let mut cov = &x * state.cov() * x.transpose();
    let added = (n_bar_b + 0.5) * (1.0 - eta);
    cov[(mode, mode)] += added;
    cov[(m + mode, m + mode)] += added;
    let mut mean = state.mean().clone();
    mean[mode] *= sqrt_eta;
    mean[m + mode] *= sqrt_eta;
    GaussianState::new(mean, cov)
}

/// Two-mode squeezer symplectic with coefficient `nu`:
/// qq block [[c, nu], [nu, c]], pp block [[c, -nu], [-nu, c]],
/// c = sqrt(nu^2 + 1). Satisfies L Omega L^T = Omega.
pub fn tms_symplectic(nu: f64) -> Result<DMatrix<f64>> {
    if !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("nu must be finite, got {nu}")));
    }
    let c = (nu * nu + 1.0).sqrt();
    Ok(DMatrix::from_row_slice(
        4,
        4,
        &[
            c, nu, 0.0, 0.0, //
            nu, c, 0.0, 0.0, //
            0.0, 0.0, c, -nu, //
            0.0, 0.0, -nu, c,
        ],
    ))
}

/// Block pattern (w11, w22, w12) of a channel-output covariance:
/// qq = [[w11, w12], [w12, w22]], pp = [[w11, -w12], [-w12, w22]], no
/// qp coupling. Fails with a structural error if entries deviate by more
/// than 1e-10 from that pattern.
fn extract_block_pattern(state: &GaussianState) -> Result<(f64, f64, f64)> {
    const TOL: f64 = 1e-10;
    if state.mode_count() != 2 {
        return Err(Error::Structure(format!(
            "expected a two-mode state, got {} modes",
            state.mode_count()
        )));
    }
    if state.mean().amax() > TOL {
        return Err(Error::Structure("expected a zero-mean state".into()));
    }
    let c = state.cov();
    let (w11, w22, w12) = (c[(0, 0)], c[(1, 1)], c[(0, 1)]);
    let expected = [
        ((0, 0), w11),
        ((1, 1), w22),
        ((0, 1), w12),
        ((1, 0), w12),
        ((2, 2), w11),
        ((3, 3), w22),
        ((2, 3), -w12),
        ((3, 2), -w12),
    ];
    let mut check = DMatrix::zeros(4, 4);
    for ((i, j), v) in expected {
        check[(i, j)] = v;
    }
    let dev = (c - check).amax();
    if dev > TOL {
        return Err(Error::Structure(format!(
            "covariance deviates from the (w11, w22, +/-w12) block pattern by {dev:.3e}"
        )));
    }
    Ok((w11, w22, w12))
}

fn clamp_occupancy(n: f64, label: &str) -> Result<f64> {
    if n < -CLAMP_TOL {
        return Err(Error::NonPhysical(format!(
            "thermal occupancy {label} = {n:.6e} is negative beyond tolerance"
        )));
    }
    Ok(n.max(0.0))
}

/// Standard form of a two-mode channel output: finds (nu, n_t1, n_t2) such
/// that cov = L(nu) diag(n_t1 + 1/2, n_t2 + 1/2, n_t1 + 1/2, n_t2 + 1/2) L(nu)^T.
///
/// With w-values from the block pattern:
///   a     = sqrt((w11 + w22)^2 - 4 w12^2)
///   nu    = sign(w12) * sqrt(((w11 + w22)/a - 1) / 2)
///   n_t1  = (a + w11 - w22 - 1)/2,  n_t2 = (a + w22 - w11 - 1)/2
pub fn two_mode_standard_form(state: &GaussianState) -> Result<TwoModeStandardForm> {
    let (w11, w22, w12) = extract_block_pattern(state)?;
    let (nu, n_t1, n_t2) = standard_form_from_pattern(w11, w22, w12)?;
    Ok(TwoModeStandardForm { nu, n_t1, n_t2 })
}

/// Same closed form, stated on the raw (w11, w22, w12) pattern.
pub(crate) fn standard_form_from_pattern(w11: f64, w22: f64, w12: f64) -> Result<(f64, f64, f64)> {
    let sum = w11 + w22;
    let disc = sum * sum - 4.0 * w12 * w12;
    if disc < 0.0 {
        return Err(Error::NonPhysical(format!(
            "(w11 + w22)^2 < 4 w12^2 (discriminant {disc:.3e})"
        )));
    }
    let a = disc.sqrt();
    let nu = if w12 == 0.0 {
        0.0
    } else {
        w12.signum() * (((sum / a) - 1.0).max(0.0) / 2.0).sqrt()
    };
    let n_t1 = clamp_occupancy(0.5 * (a + w11 - w22 - 1.0), "n_t1")?;
    let n_t2 = clamp_occupancy(0.5 * (a + w22 - w11 - 1.0), "n_t2")?;
    Ok((nu, n_t1, n_t2))
}

/// Applies the inverse squeezer L(-nu) to a two-mode state, reduces to mode
/// 1, checks the reduced covariance is thermal (diag(a, a) within 1e-10) and
/// returns its occupancy q = a - 1/2.
pub fn reduced_thermal_occupancy(state: &GaussianState, nu: f64) -> Result<f64> {
    const TOL: f64 = 1e-10;
    extract_block_pattern(state)?;
    let l_inv = tms_symplectic(-nu)?;
    let m = &l_inv * state.cov() * l_inv.transpose();
    let (qq, pp, qp) = (m[(0, 0)], m[(2, 2)], m[(0, 2)]);
    if qp.abs() > TOL || (qq - pp).abs() > TOL {
        return Err(Error::Structure(format!(
            "reduced mode-1 covariance is not thermal-diagonal (qq={qq}, pp={pp}, qp={qp})"
        )));
    }
    clamp_occupancy(0.5 * (qq + pp) - 0.5, "reduced occupancy")
}

/// Channel output for a TMSV probe with the signal mode (index 0) sent
/// through the lossy thermal-noise channel.
pub fn tmsv_channel_output(scenario: &ChangeScenario, postchange: bool) -> Result<GaussianState> {
    scenario.validate()?;
    let probe = make_tmsv(scenario.n_bar)?;
    apply_lossy_thermal(&probe, 0, scenario.eta(postchange), scenario.n_bar_b)
}

/// Channel output for a coherent probe.
pub fn coherent_channel_output(scenario: &ChangeScenario, postchange: bool) -> Result<GaussianState> {
    scenario.validate()?;
    let probe = make_coherent(scenario.n_bar)?;
    apply_lossy_thermal(&probe, 0, scenario.eta(postchange), scenario.n_bar_b)
}
