//! Quantum relative entropy between Gaussian states.
//!
//! The general formula evaluates, for states (mu_s, Sigma_s),
//!
//!   D(s1 || s0) = [ ln(Z0/Z1) - tr{(G1 - G0) Sigma_1} + gamma^T G0 gamma ] / 2
//!
//! with Z_s = det(Sigma_s + i Omega/2), G_s = 2i Omega arccoth(2i Sigma_s Omega)
//! and gamma the mean difference. Because arccoth is odd,
//! G = -4 Omega Sigma Omega h(W) with W = -4 (Sigma Omega)^2 and
//! h(z) = arccoth(sqrt(z))/sqrt(z), so the whole evaluation stays in real
//! arithmetic: W is similar (via the Cholesky factor of Sigma) to a
//! symmetric positive matrix whose spectrum {4 nu_k^2} comes from the Jacobi
//! SVD in [`crate::linalg`]. The sign and ordering conventions are pinned by
//! the closed-form agreement tests below.
//!
//! Near-pure modes (symplectic eigenvalue within 1e-9 of 1/2) make
//! individual terms blow up even when the divergences cancel between the two
//! states (e.g. a shared vacuum idler). Those eigenvalues are floored at
//! 1/2 + delta and the result is accepted only if it is stable under
//! shrinking delta; otherwise the QRE is reported as divergent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_lossy_thermal, make_displaced_tmsv, standard_form_from_pattern, ChangeScenario,
    GaussianState,
};
use crate::linalg::{self, SymplecticSpectrum};

/// Symplectic eigenvalues closer than this to 1/2 trigger the pure-mode path.
const DIVERGENCE_EPS: f64 = 1e-9;
/// Residual tolerance on the symmetry of G (convention guard).
const RESIDUE_TOL: f64 = 1e-9;
/// Values in [-NEG_CLAMP, 0] are clamped to zero.
const NEG_CLAMP: f64 = 1e-9;

/// A relative-entropy value in nats, with divergence reported as a tagged
/// sentinel rather than a raw overflow so callers can branch on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QreResult {
    pub value: f64,
    pub diverged: bool,
}

impl QreResult {
    pub fn finite(value: f64) -> Self {
        QreResult {
            value,
            diverged: false,
        }
    }

    pub fn divergent() -> Self {
        QreResult {
            value: f64::INFINITY,
            diverged: true,
        }
    }

    /// The value in nats (infinite when divergent).
    pub fn nats(&self) -> f64 {
        self.value
    }
}

/// Low-noise scaling data: the coefficients of -ln(n_bar_b) for the coherent
/// and TMSV probes, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCoefficients {
    pub coh_coeff: f64,
    pub tmsv_coeff: f64,
    pub ratio: f64,
}

fn clamp_value(v: f64) -> Result<f64> {
    if v < -NEG_CLAMP {
        return Err(Error::Numerical(format!(
            "relative entropy evaluated to {v:.6e} < 0"
        )));
    }
    Ok(v.max(0.0))
}

/// arccoth on (1, inf): 0.5 ln((x+1)/(x-1)).
fn arccoth(x: f64) -> f64 {
    0.5 * ((x + 1.0) / (x - 1.0)).ln()
}

struct StateSpectral {
    cov: DMatrix<f64>,
    spec: SymplecticSpectrum,
}

impl StateSpectral {
    fn build(state: &GaussianState) -> Result<Self> {
        Ok(StateSpectral {
            cov: state.cov().clone(),
            spec: linalg::symplectic_spectrum(state.cov())?,
        })
    }

    fn floored(&self) -> bool {
        self.spec.sigma.iter().any(|&s| s < 0.5 + DIVERGENCE_EPS)
    }

    /// ln det(Sigma + i Omega/2) = sum over modes of ln(nu^2 - 1/4); each
    /// singular value appears twice, hence the half sum.
    fn ln_z(&self, delta: f64) -> f64 {
        0.5 * self
            .spec
            .sigma
            .iter()
            .map(|&s| {
                let nu = s.max(0.5 + delta);
                (nu * nu - 0.25).ln()
            })
            .sum::<f64>()
    }

    /// G = -4 Omega Sigma Omega * T V diag(arccoth(2 nu)/(2 nu)) V^T T^{-1}.
    fn g_matrix(&self, delta: f64) -> Result<DMatrix<f64>> {
        let n = self.cov.nrows();
        let modes = n / 2;
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.spec.sigma.iter().map(|&s| {
                let nu = s.max(0.5 + delta);
                arccoth(2.0 * nu) / (2.0 * nu)
            }),
        ));
        // h(W) = T V diag(h) V^T T^{-1}
        let hw = &self.spec.t * &self.spec.v * h * self.spec.v.transpose() * &self.spec.t_inv;
        let omega = linalg::symplectic_form(modes);
        let g = -4.0 * &omega * &self.cov * &omega * hw;
        let residue = (&g - g.transpose()).amax();
        if residue > RESIDUE_TOL * g.amax().max(1.0) {
            return Err(Error::Numerical(format!(
                "G-matrix symmetry residue {residue:.3e} exceeds tolerance"
            )));
        }
        Ok(0.5 * (&g + g.transpose()))
    }
}

fn qre_at_delta(s1: &StateSpectral, s0: &StateSpectral, gamma: &nalgebra::DVector<f64>, delta: f64) -> Result<f64> {
    let g1 = s1.g_matrix(delta)?;
    let g0 = s0.g_matrix(delta)?;
    let trace = ((&g1 - &g0) * &s1.cov).trace();
    let quad = (gamma.transpose() * &g0 * gamma)[(0, 0)];
    Ok(0.5 * (s0.ln_z(delta) - s1.ln_z(delta) - trace + quad))
}

/// Quantum relative entropy D(state1 || state0) between Gaussian states
/// (post-change first, matching the CUSUM drift convention).
///
/// Returns a divergent sentinel when `state0` is pure on some mode where the
/// states actually differ; a mode that both states share (e.g. an appended
/// vacuum idler) leaves the QRE finite.
pub fn gaussian_qre(state1: &GaussianState, state0: &GaussianState) -> Result<QreResult> {
    if state1.mode_count() != state0.mode_count() {
        return Err(Error::InvalidArgument(format!(
            "mode counts differ: {} vs {}",
            state1.mode_count(),
            state0.mode_count()
        )));
    }
    let s1 = StateSpectral::build(state1)?;
    let s0 = StateSpectral::build(state0)?;
    let gamma = state1.mean() - state0.mean();

    if !s0.floored() && !s1.floored() {
        return Ok(QreResult::finite(clamp_value(qre_at_delta(&s1, &s0, &gamma, 0.0)?)?));
    }
    // Pure-mode path: floor near-1/2 eigenvalues and test stability in delta.
    let coarse = qre_at_delta(&s1, &s0, &gamma, 1e-10)?;
    let fine = qre_at_delta(&s1, &s0, &gamma, 1e-11)?;
    if (fine - coarse).abs() > 1e-6 * coarse.abs().max(1.0) {
        return Ok(QreResult::divergent());
    }
    Ok(QreResult::finite(clamp_value(fine)?))
}

/// x ln x with the continuous extension 0 ln 0 = 0.
fn x_ln_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// (1+x) ln(1+x) - x ln x, the thermal entropy function, g(0) = 0.
pub(crate) fn g_thermal(x: f64) -> f64 {
    (1.0 + x) * x.ln_1p() - x_ln_x(x)
}

/// Standard-form data (nu, n_t1, n_t2) of the TMSV channel output, computed
/// from the analytic w-pattern rather than a covariance matrix. This is the
/// independent route the general-formula checks run against.
pub(crate) fn chain_standard_form(scenario: &ChangeScenario, postchange: bool) -> Result<(f64, f64, f64)> {
    let eta = scenario.eta(postchange);
    let w11 = scenario.n_bar_b * (1.0 - eta) + eta * scenario.n_bar + 0.5;
    let w22 = scenario.n_bar + 0.5;
    let w12 = (eta * scenario.n_bar * (scenario.n_bar + 1.0)).sqrt();
    standard_form_from_pattern(w11, w22, w12)
}

/// One log term of the TMSV closed form: coef * ln(1 + 1/n_pre), with the
/// 0 * inf ambiguity resolved to 0 (both the occupancy and its coefficient
/// vanish together on unexcited modes).
fn closed_form_term(coef: f64, n_pre: f64) -> f64 {
    const TINY: f64 = 1e-300;
    if n_pre <= TINY {
        if coef <= TINY {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        coef * (1.0 + 1.0 / n_pre).ln()
    }
}

/// Closed-form QRE for the TMSV probe, D(post || pre).
///
/// With (nu_s, n1_s, n2_s) the standard forms of the two outputs,
/// b = sinh^2 of the relative squeeze and c = cosh^2 = 1 + b:
///
///   D = [b(1+n2_1) + c n1_1] ln(1 + 1/n1_0)
///     + [b(1+n1_1) + c n2_1] ln(1 + 1/n2_0)
///     + ln((1+n1_0)(1+n2_0)) - g(n1_1) - g(n2_1)
pub fn qre_tmsv(scenario: &ChangeScenario) -> Result<QreResult> {
    scenario.validate()?;
    if scenario.eta0 == scenario.eta1 {
        return Ok(QreResult::finite(0.0));
    }
    let (nu0, n10, n20) = chain_standard_form(scenario, false)?;
    let (nu1, n11, n21) = chain_standard_form(scenario, true)?;
    let b = (nu1 * (1.0 + nu0 * nu0).sqrt() - nu0 * (1.0 + nu1 * nu1).sqrt()).powi(2);
    let c = (nu0 * nu1 - ((1.0 + nu1 * nu1) * (1.0 + nu0 * nu0)).sqrt()).powi(2);
    let t1 = closed_form_term(b * (1.0 + n21) + c * n11, n10);
    let t2 = closed_form_term(b * (1.0 + n11) + c * n21, n20);
    if !t1.is_finite() || !t2.is_finite() {
        return Ok(QreResult::divergent());
    }
    let v = t1 + t2 + ((1.0 + n10) * (1.0 + n20)).ln() - g_thermal(n11) - g_thermal(n21);
    Ok(QreResult::finite(clamp_value(v)?))
}

/// Closed-form QRE for the coherent probe, D(post || pre): the relative
/// entropy between displaced thermal states with occupancies
/// N_s = n_bar_b (1 - eta_s) and displacement gap n_bar (sqrt(eta0) - sqrt(eta1))^2.
pub fn qre_coherent(scenario: &ChangeScenario) -> Result<QreResult> {
    scenario.validate()?;
    if scenario.eta0 == scenario.eta1 {
        return Ok(QreResult::finite(0.0));
    }
    let n0 = scenario.n_bar_b * (1.0 - scenario.eta0);
    let n1 = scenario.n_bar_b * (1.0 - scenario.eta1);
    let gap = scenario.n_bar * (scenario.eta0.sqrt() - scenario.eta1.sqrt()).powi(2);
    if n0 <= 0.0 {
        // prechange output is pure; any difference diverges
        return if n1 > 0.0 || gap > 0.0 {
            Ok(QreResult::divergent())
        } else {
            Ok(QreResult::finite(0.0))
        };
    }
    let v = x_ln_x(n1) - (1.0 + n1) * (1.0 + n1).ln() + (1.0 + n0).ln()
        + (1.0 + 1.0 / n0).ln() * (n1 + gap);
    Ok(QreResult::finite(clamp_value(v)?))
}

/// Coefficients of the -ln(n_bar_b) divergence in the low-noise regime:
///
///   coh  = n_bar (sqrt(eta0) - sqrt(eta1))^2
///   tmsv = n_bar (1 + n_bar) (sqrt(eta0) - sqrt(eta1))^2 / (1 + n_bar (1 - eta0))
///   ratio = tmsv/coh = (1 + n_bar) / (1 + n_bar (1 - eta0))
pub fn lownoise_coefficients(n_bar: f64, eta0: f64, eta1: f64) -> Result<ScalingCoefficients> {
    if !(0.0..=1.0).contains(&eta1) || !(0.0..=1.0).contains(&eta0) || eta1 >= eta0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= eta1 < eta0 <= 1, got eta0={eta0}, eta1={eta1}"
        )));
    }
    if !n_bar.is_finite() || n_bar < 0.0 {
        return Err(Error::InvalidArgument(format!("n_bar must be >= 0, got {n_bar}")));
    }
    let gap = (eta0.sqrt() - eta1.sqrt()).powi(2);
    let coh = n_bar * gap;
    let tmsv = n_bar * (1.0 + n_bar) * gap / (1.0 + n_bar * (1.0 - eta0));
    Ok(ScalingCoefficients {
        coh_coeff: coh,
        tmsv_coeff: tmsv,
        ratio: (1.0 + n_bar) / (1.0 + n_bar * (1.0 - eta0)),
    })
}

/// High-energy limit of D_TMSV / n_bar (equivalently the matched PNR
/// receiver's relative entropy per photon):
/// (sqrt(eta1) - sqrt(eta0))^2 / (1 - eta0) * ln(1 + 1/n_bar_b).
pub fn tmsv_linear_coefficient(n_bar_b: f64, eta0: f64, eta1: f64) -> Result<f64> {
    if !(n_bar_b > 0.0) {
        return Err(Error::InvalidArgument(format!("n_bar_b must be > 0, got {n_bar_b}")));
    }
    if eta0 >= 1.0 {
        return Err(Error::InvalidArgument("eta0 = 1 makes the denominator vanish".into()));
    }
    if !(0.0..1.0).contains(&eta0) || !(0.0..=1.0).contains(&eta1) {
        return Err(Error::InvalidArgument(format!(
            "transmittances out of range: eta0={eta0}, eta1={eta1}"
        )));
    }
    Ok((eta1.sqrt() - eta0.sqrt()).powi(2) / (1.0 - eta0) * (1.0 + 1.0 / n_bar_b).ln())
}

/// One point of the squeezing-fraction sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KappaPoint {
    pub kappa: f64,
    pub qre: QreResult,
    /// (D - min)/(max - min) over the swept grid; NaN if any point diverged.
    pub normalized: f64,
    /// Central finite difference of D in kappa (step 1e-5, clamped inside
    /// the unit interval); None when a stencil point diverged.
    pub d_dkappa: Option<f64>,
}

/// QRE of the displaced-TMSV probe with squeezing fraction `kappa`.
pub fn displaced_tmsv_qre(scenario: &ChangeScenario, kappa: f64) -> Result<QreResult> {
    let probe = make_displaced_tmsv(scenario.n_bar, kappa)?;
    let post = apply_lossy_thermal(&probe, 0, scenario.eta1, scenario.n_bar_b)?;
    let pre = apply_lossy_thermal(&probe, 0, scenario.eta0, scenario.n_bar_b)?;
    gaussian_qre(&post, &pre)
}

/// Sweeps the squeezing energy fraction kappa over `grid`, returning the QRE,
/// its min-max normalization over the grid, and a finite-difference
/// derivative at each point.
pub fn kappa_qre_sweep(scenario: &ChangeScenario, grid: &[f64]) -> Result<Vec<KappaPoint>> {
    scenario.validate()?;
    if grid.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(Error::InvalidArgument("kappa grid must lie in [0, 1]".into()));
    }
    const H: f64 = 1e-5;
    let mut points = Vec::with_capacity(grid.len());
    for &kappa in grid {
        let qre = displaced_tmsv_qre(scenario, kappa)?;
        let center = kappa.clamp(H, 1.0 - H);
        let lo = displaced_tmsv_qre(scenario, center - H)?;
        let hi = displaced_tmsv_qre(scenario, center + H)?;
        let d_dkappa = if lo.diverged || hi.diverged {
            None
        } else {
            Some((hi.value - lo.value) / (2.0 * H))
        };
        points.push(KappaPoint {
            kappa,
            qre,
            normalized: f64::NAN,
            d_dkappa,
        });
    }
    let finite: Vec<f64> = points
        .iter()
        .filter(|p| !p.qre.diverged)
        .map(|p| p.qre.value)
        .collect();
    if finite.len() == points.len() && !points.is_empty() {
        let min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        for p in &mut points {
            p.normalized = if span > 0.0 { (p.qre.value - min) / span } else { 0.0 };
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{coherent_channel_output, make_coherent, tmsv_channel_output, GaussianState};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn scen() -> ChangeScenario {
        ChangeScenario::new(5.0, 1.0, 0.9, 0.8).unwrap()
    }

    // reference values frozen from a 50-digit independent evaluation
    const D_COH_REF: f64 = 0.06950950685985395;
    const D_TMSV_REF: f64 = 0.3205653060250832;

    #[test]
    fn identical_states_have_zero_qre() {
        let s = tmsv_channel_output(&scen(), false).unwrap();
        let d = gaussian_qre(&s, &s).unwrap();
        assert!(!d.diverged);
        assert!(d.value.abs() < 1e-10);
    }

    #[test]
    fn general_formula_matches_coherent_closed_form() {
        let sc = scen();
        let post = coherent_channel_output(&sc, true).unwrap();
        let pre = coherent_channel_output(&sc, false).unwrap();
        let d = gaussian_qre(&post, &pre).unwrap();
        assert_relative_eq!(d.value, D_COH_REF, max_relative = 1e-12);
        assert_relative_eq!(qre_coherent(&sc).unwrap().value, D_COH_REF, max_relative = 1e-13);
    }

    #[test]
    fn general_formula_matches_tmsv_closed_form() {
        let sc = scen();
        let post = tmsv_channel_output(&sc, true).unwrap();
        let pre = tmsv_channel_output(&sc, false).unwrap();
        let d = gaussian_qre(&post, &pre).unwrap();
        assert_relative_eq!(d.value, D_TMSV_REF, max_relative = 1e-11);
        assert_relative_eq!(qre_tmsv(&sc).unwrap().value, D_TMSV_REF, max_relative = 1e-13);
    }

    #[test]
    fn closed_forms_vanish_without_change() {
        let sc = ChangeScenario::new(5.0, 1.0, 0.8, 0.8).unwrap();
        assert_eq!(qre_tmsv(&sc).unwrap().value, 0.0);
        assert_eq!(qre_coherent(&sc).unwrap().value, 0.0);
    }

    #[test]
    fn vacuum_probe_reduces_to_thermal_discrimination() {
        // n_bar = 0: the TMSV closed form must equal the general formula for
        // (thermal signal) x (vacuum idler) outputs
        let sc = ChangeScenario::new(0.0, 0.7, 0.9, 0.6).unwrap();
        let post = tmsv_channel_output(&sc, true).unwrap();
        let pre = tmsv_channel_output(&sc, false).unwrap();
        let d = gaussian_qre(&post, &pre).unwrap();
        assert!(!d.diverged);
        assert_relative_eq!(qre_tmsv(&sc).unwrap().value, d.value, max_relative = 1e-9);
        // and the coherent closed form equals the same thermal discrimination
        assert_relative_eq!(
            qre_coherent(&ChangeScenario::new(0.0, 0.7, 0.9, 0.6).unwrap()).unwrap().value,
            d.value,
            max_relative = 1e-9
        );
    }

    #[test]
    fn pure_prechange_output_diverges() {
        // zero thermal noise: prechange output is pure, states differ
        let sc = ChangeScenario::new(5.0, 0.0, 0.9, 0.8).unwrap();
        assert!(qre_tmsv(&sc).unwrap().diverged);
        assert!(qre_coherent(&sc).unwrap().diverged);
        // and through the general formula
        let post = coherent_channel_output(&sc, true).unwrap();
        let pre = coherent_channel_output(&sc, false).unwrap();
        assert!(gaussian_qre(&post, &pre).unwrap().diverged);
    }

    #[test]
    fn shared_pure_idler_leaves_qre_finite() {
        // coherent signal x vacuum idler on both sides: equals the 1-mode QRE
        let sc = scen();
        let post = coherent_channel_output(&sc, true).unwrap().with_vacuum_mode();
        let pre = coherent_channel_output(&sc, false).unwrap().with_vacuum_mode();
        let d = gaussian_qre(&post, &pre).unwrap();
        assert!(!d.diverged);
        assert_relative_eq!(d.value, D_COH_REF, max_relative = 1e-9);
    }

    #[test]
    fn displacement_phase_does_not_matter() {
        // channel is phase covariant: displacing along p instead of q gives
        // the same QRE
        let sc = scen();
        let along_q = displaced_tmsv_qre(&sc, 0.5).unwrap();
        let probe = make_displaced_tmsv(sc.n_bar, 0.5).unwrap();
        let mut mean = DVector::zeros(4);
        mean[2] = probe.mean()[0]; // same amplitude on the p quadrature
        let rotated = GaussianState::new(mean, probe.cov().clone()).unwrap();
        let post = apply_lossy_thermal(&rotated, 0, sc.eta1, sc.n_bar_b).unwrap();
        let pre = apply_lossy_thermal(&rotated, 0, sc.eta0, sc.n_bar_b).unwrap();
        let rotated_d = gaussian_qre(&post, &pre).unwrap();
        assert_relative_eq!(along_q.value, rotated_d.value, max_relative = 1e-10);
    }

    #[test]
    fn mode_count_mismatch_rejected() {
        let one = make_coherent(1.0).unwrap();
        let two = crate::gaussian::make_tmsv(1.0).unwrap();
        assert!(gaussian_qre(&one, &two).is_err());
    }

    #[test]
    fn coherent_qre_decreases_with_noise() {
        // decays in the low-noise regime where the -ln(n_bar_b) divergence
        // dominates (at very large n_bar_b the value turns around and
        // saturates at the thermal-discrimination floor instead)
        let mut last = f64::INFINITY;
        for i in 0..=8 {
            let nb = 10f64.powf(-5.0 + i as f64 * 0.5);
            let sc = ChangeScenario::new(5.0, nb, 0.9, 0.8).unwrap();
            let v = qre_coherent(&sc).unwrap().value;
            assert!(v < last, "not decreasing at n_bar_b={nb}");
            last = v;
        }
    }

    #[test]
    fn divergence_direction_towards_low_noise() {
        for f in [qre_tmsv as fn(&ChangeScenario) -> Result<QreResult>, qre_coherent] {
            let lo = f(&ChangeScenario::new(5.0, 1e-8, 0.9, 0.8).unwrap()).unwrap().value;
            let hi = f(&ChangeScenario::new(5.0, 1e-4, 0.9, 0.8).unwrap()).unwrap().value;
            assert!(lo > hi);
        }
    }

    #[test]
    fn scaling_coefficients_reference() {
        let c = lownoise_coefficients(5.0, 0.9, 0.8).unwrap();
        assert_relative_eq!(c.ratio, 4.0, max_relative = 1e-14);
        assert_relative_eq!(c.tmsv_coeff / c.coh_coeff, c.ratio, max_relative = 1e-12);
        let zero = lownoise_coefficients(0.0, 0.9, 0.8).unwrap();
        assert_eq!(zero.coh_coeff, 0.0);
        assert_eq!(zero.tmsv_coeff, 0.0);
        assert!(lownoise_coefficients(5.0, 0.8, 0.9).is_err());
    }

    #[test]
    fn linear_coefficient_edges() {
        assert_eq!(tmsv_linear_coefficient(1.0, 0.9, 0.9).unwrap(), 0.0);
        assert!(tmsv_linear_coefficient(1.0, 1.0, 0.8).is_err());
        assert!(tmsv_linear_coefficient(0.0, 0.9, 0.8).is_err());
    }

    #[test]
    fn kappa_sweep_endpoints() {
        let sc = scen();
        let grid = [0.0, 0.5, 1.0];
        let pts = kappa_qre_sweep(&sc, &grid).unwrap();
        // kappa = 0: coherent signal with a spectator vacuum idler
        assert_relative_eq!(pts[0].qre.value, qre_coherent(&sc).unwrap().value, max_relative = 1e-8);
        // kappa = 1: the TMSV probe
        assert_relative_eq!(pts[2].qre.value, qre_tmsv(&sc).unwrap().value, max_relative = 1e-9);
        assert_eq!(pts[0].normalized, 0.0);
        assert_eq!(pts[2].normalized, 1.0);
        assert!(pts.iter().all(|p| p.d_dkappa.is_some()));
        assert!(kappa_qre_sweep(&sc, &[1.2]).is_err());
    }

    #[test]
    fn qre_rejects_nonphysical_inputs() {
        let cov = DMatrix::<f64>::identity(2, 2) * 0.3; // below vacuum
        assert!(GaussianState::new(DVector::zeros(2), cov).is_err());
    }
}
