//! Classical relative entropies and outcome distributions for the measured
//! transceivers: coherent + homodyne, Kennedy, entanglement-augmented (EA)
//! coherent + homodyne, TMSV with an inverse two-mode squeeze followed by
//! photon counting (one or two detectors, finite or infinite resolution, or
//! homodyne), and Fock + photon counting.
//!
//! Everything is oriented as D(post ‖ pre) in nats. Photon-count sums run in
//! log-domain arithmetic so the high-energy regimes do not overflow, and all
//! truncations carry explicit tail bookkeeping.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    reduced_thermal_occupancy, tmsv_channel_output, two_mode_standard_form, ChangeScenario,
};
use crate::special::{assoc_laguerre, hyp2f1_terminating, ln_factorial, ln_factorial_table};

/// Relative PMF truncation target: stop a photon sum once the remaining
/// envelope falls below this fraction of the accumulated mass.
const PMF_TAIL_REL: f64 = 1e-12;
/// Hard cap on photon-sum terms before reporting a truncation failure.
const MAX_SERIES_TERMS: usize = 100_000;

/// A truncated photon-count distribution: probabilities for counts 0..=K
/// plus the residual mass beyond K.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretePmf {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl DiscretePmf {
    pub fn new(mut probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("PMF must have at least one outcome".into()));
        }
        for p in &mut probs {
            if !p.is_finite() || *p < -1e-12 || *p > 1.0 + 1e-9 {
                return Err(Error::InvalidArgument(format!("probability {p} out of range")));
            }
            *p = p.max(0.0);
        }
        if !(-1e-12..=1.0 + 1e-9).contains(&tail_mass) {
            return Err(Error::InvalidArgument(format!("tail mass {tail_mass} out of range")));
        }
        let tail_mass = tail_mass.max(0.0);
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "PMF mass {total} deviates from 1 beyond 1e-9"
            )));
        }
        Ok(DiscretePmf { probs, tail_mass })
    }

    /// Truncation cutoff K (largest explicitly resolved count).
    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Probabilities with the tail folded into the last bin (the sampling
    /// model used by the CUSUM engine).
    pub fn folded(&self) -> Vec<f64> {
        let mut p = self.probs.clone();
        *p.last_mut().unwrap() += self.tail_mass;
        p
    }
}

/// Geometric (thermal) PMF with mean `q`, truncated at `len` outcomes.
pub fn geometric_pmf(q: f64, len: usize) -> Result<DiscretePmf> {
    if !(q >= 0.0) {
        return Err(Error::InvalidArgument(format!("geometric mean must be >= 0, got {q}")));
    }
    let ratio = q / (1.0 + q);
    let mut probs = Vec::with_capacity(len);
    let mut p = 1.0 / (1.0 + q);
    for _ in 0..len {
        probs.push(p);
        p *= ratio;
    }
    DiscretePmf::new(probs, ratio.powi(len as i32))
}

/// Discrete relative entropy sum p1 ln(p1/p0) in nats, with 0 ln 0 = 0 and
/// the truncation tails treated as one extra lumped outcome. Returns the
/// +infinity sentinel when p1 has mass where p0 has none.
pub fn discrete_re(p1: &DiscretePmf, p0: &DiscretePmf) -> f64 {
    let len = p1.probs.len().max(p0.probs.len());
    let get = |pmf: &DiscretePmf, k: usize| pmf.probs.get(k).copied().unwrap_or(0.0);
    let mut total = 0.0;
    for k in 0..len {
        let a = get(p1, k);
        let b = get(p0, k);
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        total += a * (a / b).ln();
    }
    if p1.tail_mass > 0.0 {
        if p0.tail_mass <= 0.0 {
            return f64::INFINITY;
        }
        total += p1.tail_mass * (p1.tail_mass / p0.tail_mass).ln();
    }
    total.max(0.0)
}

// ---------------------------------------------------------------------------
// Coherent-state probes
// ---------------------------------------------------------------------------

/// Homodyne outcome law for a Gaussian channel output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannelLaw {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianChannelLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::InvalidArgument(format!("variance must be > 0, got {variance}")));
        }
        Ok(GaussianChannelLaw { mean, variance })
    }

    /// Law of the q-homodyne record for a coherent probe:
    /// N(sqrt(eta n_bar), (1 + 2 n_bar_b (1 - eta))/4).
    pub fn coherent_homodyne(scenario: &ChangeScenario, postchange: bool) -> Result<Self> {
        scenario.validate()?;
        let eta = scenario.eta(postchange);
        GaussianChannelLaw::new(
            (eta * scenario.n_bar).sqrt(),
            (1.0 + 2.0 * scenario.n_bar_b * (1.0 - eta)) / 4.0,
        )
    }

    /// KL divergence D(self ‖ other) between the two Gaussian laws.
    pub fn kl(&self, other: &GaussianChannelLaw) -> f64 {
        let vr = self.variance / other.variance;
        0.5 * (vr - 1.0 - vr.ln() + (self.mean - other.mean).powi(2) / other.variance)
    }
}

/// Zero-mean Gaussian KL divergence D(N(0, v1) ‖ N(0, v0)).
fn zero_mean_gaussian_kl(v1: f64, v0: f64) -> f64 {
    let r = v1 / v0;
    0.5 * (r - 1.0 - r.ln())
}

/// Closed-form relative entropy of the coherent + homodyne transceiver:
///
///   S = [n_bar_b (eta0 - eta1) + 2 n_bar (sqrt(eta0) - sqrt(eta1))^2]
///       / (1 + 2 n_bar_b (1 - eta0))
///       + ln((1 + 2 n_bar_b (1 - eta0)) / (1 + 2 n_bar_b (1 - eta1))) / 2
pub fn re_coherent_homodyne(scenario: &ChangeScenario) -> Result<f64> {
    scenario.validate()?;
    let (nb, e0, e1) = (scenario.n_bar_b, scenario.eta0, scenario.eta1);
    let v0 = 1.0 + 2.0 * nb * (1.0 - e0);
    let v1 = 1.0 + 2.0 * nb * (1.0 - e1);
    let gap = scenario.n_bar * (e0.sqrt() - e1.sqrt()).powi(2);
    Ok(((nb * (e0 - e1) + 2.0 * gap) / v0 + 0.5 * (v0 / v1).ln()).max(0.0))
}

// ---------------------------------------------------------------------------
// Kennedy receiver
// ---------------------------------------------------------------------------

/// Photon-count PMF after the Kennedy displacement (nulling the prechange
/// amplitude) followed by photon counting.
///
/// Prechange: thermal geometric with mean n_bar_b (1 - eta0). Postchange: a
/// displaced thermal state with displacement alpha_d = sqrt(n_bar)
/// (sqrt(eta0) - sqrt(eta1)) and thermal mean n_bar_b (1 - eta1); its count
/// distribution sums thermal weights against |<k|D(alpha_d)|l>|^2.
pub fn kennedy_pmf(scenario: &ChangeScenario, postchange: bool, cutoff: usize) -> Result<DiscretePmf> {
    scenario.validate()?;
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    if !postchange {
        return geometric_pmf(scenario.n_bar_b * (1.0 - scenario.eta0), cutoff + 1);
    }
    let n1 = scenario.n_bar_b * (1.0 - scenario.eta1);
    let alpha2 = scenario.n_bar * (scenario.eta0.sqrt() - scenario.eta1.sqrt()).powi(2);
    if alpha2 == 0.0 {
        return geometric_pmf(n1, cutoff + 1);
    }
    let ratio = n1 / (1.0 + n1);
    let mut lnfact = ln_factorial_table(cutoff + 64);
    let mut probs = Vec::with_capacity(cutoff + 1);
    for k in 0..=cutoff {
        let mut acc = 0.0f64;
        let mut l = 0usize;
        loop {
            // geometric weight n1^l / (1 + n1)^{l+1}
            let ln_w = if n1 > 0.0 {
                l as f64 * ratio.ln() - (1.0 + n1).ln()
            } else if l == 0 {
                0.0
            } else {
                break;
            };
            if l + 1 >= lnfact.len() {
                lnfact = ln_factorial_table(lnfact.len() * 2);
            }
            let (mn, mx) = (k.min(l), k.max(l));
            let lag = assoc_laguerre(mn as u32, (mx - mn) as u32, alpha2);
            if lag != 0.0 {
                // |<k|D(alpha)|l>|^2 = e^{-a} (mn!/mx!) a^{mx-mn} L_mn^{(mx-mn)}(a)^2
                let ln_amp2 = -alpha2 + lnfact[mn] - lnfact[mx]
                    + (mx - mn) as f64 * alpha2.ln()
                    + 2.0 * lag.abs().ln();
                acc += (ln_w + ln_amp2).exp();
            }
            l += 1;
            if n1 == 0.0 {
                break;
            }
            // remaining geometric envelope (overlaps are bounded by 1)
            if ratio.powi(l as i32) < PMF_TAIL_REL * acc.max(1e-30) {
                break;
            }
            if l >= MAX_SERIES_TERMS {
                return Err(Error::Truncation(format!(
                    "Kennedy inner sum did not converge in {MAX_SERIES_TERMS} terms"
                )));
            }
        }
        probs.push(acc);
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    DiscretePmf::new(probs, tail)
}

/// Post/pre Kennedy PMFs on a shared support with tails below 1e-12.
pub fn kennedy_pmf_pair(scenario: &ChangeScenario) -> Result<(DiscretePmf, DiscretePmf)> {
    let mut cutoff = 16usize;
    loop {
        let p1 = kennedy_pmf(scenario, true, cutoff)?;
        let p0 = kennedy_pmf(scenario, false, cutoff)?;
        if p1.tail_mass() < 1e-12 && p0.tail_mass() < 1e-12 {
            return Ok((p1, p0));
        }
        if cutoff >= 65_536 {
            return Err(Error::Truncation(format!(
                "Kennedy PMF tail {:.3e} still above 1e-12 at cutoff {cutoff}",
                p1.tail_mass().max(p0.tail_mass())
            )));
        }
        cutoff *= 2;
    }
}

/// Kennedy-receiver relative entropy with an automatically grown cutoff.
pub fn re_kennedy(scenario: &ChangeScenario) -> Result<f64> {
    let (p1, p0) = kennedy_pmf_pair(scenario)?;
    Ok(discrete_re(&p1, &p0))
}

// ---------------------------------------------------------------------------
// EA coherent / squeezed coherent with homodyne
// ---------------------------------------------------------------------------

/// Homodyne outcome law of an m-mode EA coherent block: constant mean vector
/// sqrt(eta) alpha_r and covariance
/// (1 + 2 n_bar_b (1 - eta))/4 I + eta (e^{-2r} - 1)/(4m) J (J all ones).
#[derive(Debug, Clone)]
pub struct EaCoherentLaw {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl EaCoherentLaw {
    pub fn new(m: usize, alpha_r: f64, r: f64, eta: f64, n_bar_b: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("block length m must be >= 1".into()));
        }
        let diag = (1.0 + 2.0 * n_bar_b * (1.0 - eta)) / 4.0;
        let ones = eta * ((-2.0 * r).exp() - 1.0) / (4.0 * m as f64);
        let mean = DVector::from_element(m, eta.sqrt() * alpha_r);
        let cov = DMatrix::from_fn(m, m, |i, j| if i == j { diag + ones } else { ones });
        Ok(EaCoherentLaw { mean, cov })
    }
}

/// Multivariate Gaussian KL divergence D(N(mu1, S1) ‖ N(mu0, S0)).
fn multivariate_gaussian_kl(law1: &EaCoherentLaw, law0: &EaCoherentLaw) -> Result<f64> {
    let m = law1.mean.len();
    let chol0 = nalgebra::Cholesky::new(law0.cov.clone())
        .ok_or_else(|| Error::Numerical("singular prechange covariance".into()))?;
    let chol1 = nalgebra::Cholesky::new(law1.cov.clone())
        .ok_or_else(|| Error::Numerical("singular postchange covariance".into()))?;
    let ln_det0: f64 = chol0.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let ln_det1: f64 = chol1.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let trace = chol0.solve(&law1.cov).trace();
    let d = &law1.mean - &law0.mean;
    let quad = d.dot(&chol0.solve(&d.clone().into()));
    Ok(0.5 * (trace - m as f64 + ln_det0 - ln_det1 + quad))
}

/// Relative entropy per mode of the m-mode EA coherent transceiver with
/// homodyne detection, at displacement amplitude `alpha_r`. The squeezing is
/// fixed by the per-mode energy constraint alpha_r^2 + sinh^2(r)/m = n_bar.
pub fn re_ea_coherent_homodyne(m: usize, alpha_r: f64, scenario: &ChangeScenario) -> Result<f64> {
    scenario.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument("block length m must be >= 1".into()));
    }
    if !alpha_r.is_finite() || alpha_r < 0.0 {
        return Err(Error::InvalidArgument(format!("alpha_r must be >= 0, got {alpha_r}")));
    }
    let budget = scenario.n_bar - alpha_r * alpha_r;
    if budget < -1e-12 {
        return Err(Error::InvalidArgument(format!(
            "alpha_r^2 = {} exceeds the energy budget n_bar = {}",
            alpha_r * alpha_r,
            scenario.n_bar
        )));
    }
    let r = (m as f64 * budget.max(0.0)).sqrt().asinh();
    let law0 = EaCoherentLaw::new(m, alpha_r, r, scenario.eta0, scenario.n_bar_b)?;
    let law1 = EaCoherentLaw::new(m, alpha_r, r, scenario.eta1, scenario.n_bar_b)?;
    Ok(multivariate_gaussian_kl(&law1, &law0)?.max(0.0) / m as f64)
}

/// Golden-section maximization after a coarse grid pass.
fn grid_golden_max<F>(f: F, lo: f64, hi: f64, tol: f64, grid: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let step = (hi - lo) / (grid as f64 - 1.0);
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..grid {
        let x = lo + step * i as f64;
        let v = f(x)?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Maximizes the EA coherent per-mode relative entropy over the displacement
/// amplitude alpha_r in [0, sqrt(n_bar)]: 64-point grid plus golden-section
/// refinement to |delta alpha| < 1e-6 sqrt(n_bar).
pub fn optimize_alpha_ea(m: usize, scenario: &ChangeScenario) -> Result<(f64, f64)> {
    scenario.validate()?;
    let hi = scenario.n_bar.sqrt();
    if hi == 0.0 {
        return Ok((0.0, re_ea_coherent_homodyne(m, 0.0, scenario)?));
    }
    grid_golden_max(
        |a| re_ea_coherent_homodyne(m, a, scenario),
        0.0,
        hi,
        1e-6 * hi,
        64,
    )
}

// ---------------------------------------------------------------------------
// TMSV with inverse TMS + photon counting
// ---------------------------------------------------------------------------

/// PNR photon-number resolution: a hard limit l (counts >= l are lumped) or
/// an ideal detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    Finite(u32),
    Infinite,
}

/// Geometric means (q0, q1) of the signal-mode photon counts after the
/// inverse TMS matched to the *prechange* output: q0 is that output's own
/// thermal occupancy, q1 comes from applying the same squeezer to the
/// postchange output.
pub fn tmsv_pnr_rates(scenario: &ChangeScenario) -> Result<(f64, f64)> {
    let pre = tmsv_channel_output(scenario, false)?;
    let sf = two_mode_standard_form(&pre)?;
    let post = tmsv_channel_output(scenario, true)?;
    let q1 = reduced_thermal_occupancy(&post, sf.nu)?;
    Ok((sf.n_t1, q1))
}

/// KL divergence between geometric photon distributions with means q1, q0:
/// q1 ln(q1/q0) + (1 + q1) ln((1 + q0)/(1 + q1)).
pub fn geometric_kl(q1: f64, q0: f64) -> f64 {
    if q1 == q0 {
        return 0.0;
    }
    if q0 <= 0.0 {
        return f64::INFINITY;
    }
    let first = if q1 > 0.0 { q1 * (q1 / q0).ln() } else { 0.0 };
    (first + (1.0 + q1) * ((1.0 + q0) / (1.0 + q1)).ln()).max(0.0)
}

/// Relative entropy of the TMSV + matched TMS + PNR transceiver.
///
/// `Resolution::Infinite` is the ideal-detector value S_inf; a finite limit
/// l returns the printed closed form (1 - (q1/(1+q1))^{l+1}) S_inf. The
/// printed finite-resolution formula is *not* the lumped-bin relative
/// entropy of the truncated detector for l >= 2; see
/// [`re_tmsv_pnr_lumped`] for that quantity.
pub fn re_tmsv_pnr(scenario: &ChangeScenario, resolution: Resolution) -> Result<f64> {
    let (q0, q1) = tmsv_pnr_rates(scenario)?;
    let s_inf = geometric_kl(q1, q0);
    match resolution {
        Resolution::Infinite => Ok(s_inf),
        Resolution::Finite(0) => Err(Error::InvalidArgument("resolution must be >= 1".into())),
        Resolution::Finite(l) => Ok((1.0 - (q1 / (1.0 + q1)).powi(l as i32 + 1)) * s_inf),
    }
}

/// Single-photon-detector relative entropy (printed closed form):
/// q1/(1+q1) ln(q1/q0) + ln((1+q0)/(1+q1)).
pub fn re_tmsv_spd(scenario: &ChangeScenario) -> Result<f64> {
    let (q0, q1) = tmsv_pnr_rates(scenario)?;
    Ok(spd_closed_form(q0, q1))
}

pub(crate) fn spd_closed_form(q0: f64, q1: f64) -> f64 {
    if q1 == q0 {
        return 0.0;
    }
    if q0 <= 0.0 {
        return f64::INFINITY;
    }
    let first = if q1 > 0.0 {
        q1 / (1.0 + q1) * (q1 / q0).ln()
    } else {
        0.0
    };
    (first + ((1.0 + q0) / (1.0 + q1)).ln()).max(0.0)
}

/// Direct lumped-bin relative entropy of an l-limited detector: outcomes
/// {0, .., l-1, >=l} with both geometric laws lumped the same way.
pub fn re_tmsv_pnr_lumped(scenario: &ChangeScenario, l: u32) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    let (q0, q1) = tmsv_pnr_rates(scenario)?;
    Ok(lumped_geometric_kl(q1, q0, l))
}

pub(crate) fn lumped_geometric_kl(q1: f64, q0: f64, l: u32) -> f64 {
    if q1 == q0 {
        return 0.0;
    }
    if q0 <= 0.0 {
        return f64::INFINITY;
    }
    let (t1, t0) = (q1 / (1.0 + q1), q0 / (1.0 + q0));
    let mut total = 0.0;
    let mut p1 = 1.0 / (1.0 + q1);
    let mut p0 = 1.0 / (1.0 + q0);
    for _ in 0..l {
        if p1 > 0.0 {
            total += p1 * (p1 / p0).ln();
        }
        p1 *= t1;
        p0 *= t0;
    }
    let (tail1, tail0) = (t1.powi(l as i32), t0.powi(l as i32));
    if tail1 > 0.0 {
        total += tail1 * (tail1 / tail0).ln();
    }
    total.max(0.0)
}

/// Maximizes the ideal-PNR relative entropy over the receiver's squeezer
/// coefficient nu in [0, 4 nu0] (nu0 = the matched prechange coefficient).
/// Returns (nu*, S_inf(nu*)).
pub fn optimize_tms_pnr(scenario: &ChangeScenario) -> Result<(f64, f64)> {
    let pre = tmsv_channel_output(scenario, false)?;
    let post = tmsv_channel_output(scenario, true)?;
    let sf = two_mode_standard_form(&pre)?;
    let objective = |nu: f64| -> Result<f64> {
        let q0 = reduced_thermal_occupancy(&pre, nu)?;
        let q1 = reduced_thermal_occupancy(&post, nu)?;
        Ok(geometric_kl(q1, q0))
    };
    let hi = (4.0 * sf.nu).max(1e-6);
    grid_golden_max(objective, 0.0, hi, 1e-8 * hi.max(1.0), 64)
}

// ---------------------------------------------------------------------------
// TMSV with inverse TMS + two PNR detectors
// ---------------------------------------------------------------------------

fn ln_zeta(n1: f64, n2: f64, k: f64, l: f64) -> f64 {
    let first = if k == 0.0 { 0.0 } else { k * n1.ln() };
    let second = if l == 0.0 { 0.0 } else { l * n2.ln() };
    first + second - (k + 1.0) * (1.0 + n1).ln() - (l + 1.0) * (1.0 + n2).ln()
}

struct TwoPnrParams {
    n11: f64,
    n21: f64,
    tau1: f64,
    tau2: f64,
}

fn two_pnr_params(scenario: &ChangeScenario) -> Result<TwoPnrParams> {
    let (nu0, _, _) = crate::qre::chain_standard_form(scenario, false)?;
    let (nu1, n11, n21) = crate::qre::chain_standard_form(scenario, true)?;
    let (r0, r1) = (-nu0.asinh(), -nu1.asinh());
    Ok(TwoPnrParams {
        n11,
        n21,
        tau1: (r1 - r0).tanh(),
        tau2: (r1 - r0).cosh(),
    })
}

/// Joint postchange probability p(k, l) of the two-detector receiver (the
/// inverse TMS is matched to the prechange output). `trunc` bounds the
/// outer sum over the squeezed-pair index.
pub fn two_pnr_pmf(scenario: &ChangeScenario, k: u32, l: u32, trunc: usize) -> Result<f64> {
    let params = two_pnr_params(scenario)?;
    let table = ln_factorial_table(k as usize + l as usize + trunc + 8);
    two_pnr_pmf_inner(&params, k as usize, l as usize, trunc, &table)
}

/// Log-domain evaluation of the double sum; the inner alternating sum is
/// scaled by its largest term before exponentiation.
fn two_pnr_pmf_inner(
    p: &TwoPnrParams,
    k: usize,
    l: usize,
    trunc: usize,
    lnfact: &[f64],
) -> Result<f64> {
    if p.tau1 == 0.0 {
        return Ok(ln_zeta(p.n11, p.n21, k as f64, l as f64).exp());
    }
    let ln_tau1 = p.tau1.abs().ln();
    let ln_tau2 = p.tau2.ln();
    let mut total = 0.0f64;
    let s_min = k.saturating_sub(l);
    let mut last_term = f64::INFINITY;
    for s in s_min..(s_min + trunc) {
        let u_lo = k.saturating_sub(s);
        let u_hi = k.min(l);
        let mut ln_terms = Vec::with_capacity(u_hi + 1 - u_lo);
        let mut ln_max = f64::NEG_INFINITY;
        for u in u_lo..=u_hi {
            let ln_t = 2.0 * u as f64 * ln_tau1 - (k + l + 1 - 2 * u) as f64 * ln_tau2
                - lnfact[s + u - k]
                - lnfact[u]
                - lnfact[k - u]
                - lnfact[l - u];
            ln_max = ln_max.max(ln_t);
            ln_terms.push((u, ln_t));
        }
        let inner: f64 = ln_terms
            .iter()
            .map(|&(u, ln_t)| {
                let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
                sign * (ln_t - ln_max).exp()
            })
            .sum();
        if inner != 0.0 {
            let ln_term = ln_zeta(p.n11, p.n21, s as f64, (s + l - k) as f64)
                + 2.0 * (s as f64 - k as f64) * ln_tau1
                + lnfact[s]
                + lnfact[s + l - k]
                + lnfact[k]
                + lnfact[l]
                + 2.0 * (ln_max + inner.abs().ln());
            let term = ln_term.exp();
            total += term;
            last_term = term;
            if s > k && term < 1e-16 * total.max(1e-300) {
                return Ok(total);
            }
        }
    }
    if last_term > 1e-12 * total.max(1e-300) {
        return Err(Error::Truncation(format!(
            "two-PNR outer sum not converged after {trunc} terms (last term {last_term:.3e} of {total:.3e})"
        )));
    }
    Ok(total)
}

/// Result of the numeric two-detector relative entropy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoPnrRe {
    pub value: f64,
    /// Postchange probability mass beyond the summed grid.
    pub truncated_mass: f64,
}

/// Marginal geometric means (signal, idler) of the two-detector postchange
/// law, read off the congruence with the prechange squeezer.
pub fn two_pnr_marginal_rates(scenario: &ChangeScenario) -> Result<(f64, f64)> {
    let (nu0, _, _) = crate::qre::chain_standard_form(scenario, false)?;
    let post = tmsv_channel_output(scenario, true)?;
    let q_sig = reduced_thermal_occupancy(&post, nu0)?;
    let l_inv = crate::gaussian::tms_symplectic(-nu0)?;
    let m = &l_inv * post.cov() * l_inv.transpose();
    Ok((q_sig, m[(1, 1)] - 0.5))
}

fn geometric_quantile(q: f64, tail: f64) -> usize {
    if q <= 0.0 {
        return 2;
    }
    let r = q / (1.0 + q);
    (tail.ln() / r.ln()).ceil().max(2.0) as usize
}

/// Joint post/pre PMFs of the two-detector receiver on a grid large enough
/// that the postchange tails fall below 1e-12 in each direction.
pub fn two_pnr_grids(
    scenario: &ChangeScenario,
    trunc: usize,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let params = two_pnr_params(scenario)?;
    let (_, n10, n20) = crate::qre::chain_standard_form(scenario, false)?;
    let (q_sig, q_idl) = two_pnr_marginal_rates(scenario)?;
    let k_max = geometric_quantile(q_sig.max(n10), 1e-12);
    let l_max = geometric_quantile(q_idl.max(n20), 1e-12);
    let lnfact = ln_factorial_table(k_max + l_max + trunc + 8);
    let mut p1 = vec![vec![0.0f64; l_max + 1]; k_max + 1];
    let mut p0 = vec![vec![0.0f64; l_max + 1]; k_max + 1];
    for k in 0..=k_max {
        for l in 0..=l_max {
            p1[k][l] = two_pnr_pmf_inner(&params, k, l, trunc, &lnfact)?;
            p0[k][l] = ln_zeta(n10, n20, k as f64, l as f64).exp();
        }
    }
    Ok((p1, p0))
}

/// Numeric relative entropy of the two-detector receiver.
pub fn re_two_pnr(scenario: &ChangeScenario, trunc: usize) -> Result<TwoPnrRe> {
    let (p1, p0) = two_pnr_grids(scenario, trunc)?;
    let mut value = 0.0;
    let mut mass = 0.0;
    for (row1, row0) in p1.iter().zip(&p0) {
        for (&a, &b) in row1.iter().zip(row0) {
            mass += a;
            if a > 0.0 {
                value += a * (a / b).ln();
            }
        }
    }
    Ok(TwoPnrRe {
        value: value.max(0.0),
        truncated_mass: (1.0 - mass).max(0.0),
    })
}

// ---------------------------------------------------------------------------
// TMSV with TMS + homodyne
// ---------------------------------------------------------------------------

/// Which homodyne chain measures the TMSV output signal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomodyneChain {
    /// Inverse TMS matched to the prechange output, then homodyne: records
    /// are N(0, q_s + 1/2) in covariance units.
    MatchedTms,
    /// Homodyne directly on the signal mode: records are
    /// N(0, (1 + 2 n_bar_b (1 - eta_s) + 2 n_bar eta_s)/4).
    Direct,
}

/// Relative entropy of the TMSV + homodyne transceiver for either chain.
pub fn re_tmsv_homodyne(scenario: &ChangeScenario, chain: HomodyneChain) -> Result<f64> {
    scenario.validate()?;
    match chain {
        HomodyneChain::MatchedTms => {
            let (q0, q1) = tmsv_pnr_rates(scenario)?;
            Ok(zero_mean_gaussian_kl(q1 + 0.5, q0 + 0.5))
        }
        HomodyneChain::Direct => {
            let v = |eta: f64| {
                (1.0 + 2.0 * scenario.n_bar_b * (1.0 - eta) + 2.0 * scenario.n_bar * eta) / 4.0
            };
            Ok(zero_mean_gaussian_kl(v(scenario.eta1), v(scenario.eta0)))
        }
    }
}

// ---------------------------------------------------------------------------
// Fock probe + PNR
// ---------------------------------------------------------------------------

/// Output photon-count probability for an n-photon Fock probe through the
/// lossy thermal-noise channel:
///
///   p(x) = C(x+n, x) (1-eta)^{x+n} (1+nb)^n nb^x / (1 + nb (1-eta))^{x+n+1}
///          * 2F1(-x, -n; -(x+n); z(eta, nb))
///
/// with z = (nb - eta (1+nb)) (1 + (1-eta) nb) / ((1-eta)^2 nb (1+nb)).
/// eta in {0, 1} and nb = 0 are singular for this form; callers should use
/// the limit distributions (thermal / binomial) instead.
pub fn fock_pmf(x: u64, n_fock: u64, eta: f64, n_bar_b: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eta = {eta} is singular here; use the pure-loss / identity limit form"
        )));
    }
    if !(n_bar_b > 0.0) {
        return Err(Error::InvalidArgument(
            "n_bar_b = 0 is singular here; use the pure-loss binomial limit".into(),
        ));
    }
    let z = (n_bar_b - eta * (1.0 + n_bar_b)) * (1.0 + (1.0 - eta) * n_bar_b)
        / ((1.0 - eta).powi(2) * n_bar_b * (1.0 + n_bar_b));
    let f = hyp2f1_terminating(-(x as i64), -(n_fock as i64), -((x + n_fock) as f64), z)?;
    if f <= 0.0 {
        return Ok(0.0);
    }
    let (xf, nf) = (x as f64, n_fock as f64);
    let ln_choose = ln_factorial(x + n_fock) - ln_factorial(x) - ln_factorial(n_fock);
    let ln_pref = ln_choose
        + (xf + nf) * (1.0 - eta).ln()
        + nf * (1.0 + n_bar_b).ln()
        + xf * n_bar_b.ln()
        - (xf + nf + 1.0) * (1.0 + n_bar_b * (1.0 - eta)).ln();
    Ok((ln_pref + f.ln()).exp())
}

/// Truncated output PMF of the Fock probe, resolved until the tail is below
/// `tail_target`.
pub fn fock_output_pmf(n_fock: u64, eta: f64, n_bar_b: f64, tail_target: f64) -> Result<DiscretePmf> {
    let mut probs = Vec::new();
    let mut cum = 0.0;
    let mut x = 0u64;
    loop {
        let p = fock_pmf(x, n_fock, eta, n_bar_b)?;
        probs.push(p);
        cum += p;
        if 1.0 - cum < tail_target && x > n_fock {
            break;
        }
        x += 1;
        if x as usize > MAX_SERIES_TERMS {
            return Err(Error::Truncation(format!(
                "Fock PMF tail {:.3e} did not reach {tail_target:.0e}",
                1.0 - cum
            )));
        }
    }
    DiscretePmf::new(probs, (1.0 - cum).max(0.0))
}

/// Numeric relative entropy of the Fock + PNR transceiver; requires an
/// integer probe energy.
pub fn re_fock_pnr(scenario: &ChangeScenario) -> Result<f64> {
    scenario.validate()?;
    let n = scenario.n_bar.round();
    if (scenario.n_bar - n).abs() > 1e-9 || n < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Fock probe needs integer n_bar, got {}",
            scenario.n_bar
        )));
    }
    let n = n as u64;
    let p1 = fock_output_pmf(n, scenario.eta1, scenario.n_bar_b, 1e-10)?;
    let p0 = fock_output_pmf(n, scenario.eta0, scenario.n_bar_b, 1e-10)?;
    // extend onto a shared support before comparing
    let len = p1.probs().len().max(p0.probs().len());
    let extend = |pmf: &DiscretePmf, eta: f64| -> Result<DiscretePmf> {
        let mut probs = pmf.probs().to_vec();
        let mut cum: f64 = probs.iter().sum();
        for x in probs.len()..len {
            let p = fock_pmf(x as u64, n, eta, scenario.n_bar_b)?;
            probs.push(p);
            cum += p;
        }
        DiscretePmf::new(probs, (1.0 - cum).max(0.0))
    };
    let p1 = extend(&p1, scenario.eta1)?;
    let p0 = extend(&p0, scenario.eta0)?;
    Ok(discrete_re(&p1, &p0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qre::{qre_coherent, qre_tmsv};
    use approx::assert_relative_eq;

    fn scen() -> ChangeScenario {
        ChangeScenario::new(5.0, 1.0, 0.9, 0.8).unwrap()
    }

    fn flat() -> ChangeScenario {
        ChangeScenario::new(5.0, 1.0, 0.8, 0.8).unwrap()
    }

    // frozen 30-digit reference values at (5, 1, 0.9, 0.8)
    const S_COH_HOM_REF: f64 = 0.03078903635542036;
    const S_KENNEDY_REF: f64 = 0.04357623455023908;
    const S_INF_REF: f64 = 0.05778795727176715;
    const S_TWO_PNR_REF: f64 = 0.188337851848327;
    const S_HOM_MATCHED_REF: f64 = 0.02027998954676;
    const S_HOM_DIRECT_REF: f64 = 0.00162332923262;

    #[test]
    fn discrete_re_basics() {
        let p = geometric_pmf(1.0, 60).unwrap();
        let q = geometric_pmf(2.0, 60).unwrap();
        assert_eq!(discrete_re(&p, &p), 0.0);
        assert_relative_eq!(discrete_re(&p, &q), geometric_kl(1.0, 2.0), max_relative = 1e-10);
        // support violation
        let point = DiscretePmf::new(vec![0.0, 1.0], 0.0).unwrap();
        let vacuum = DiscretePmf::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(discrete_re(&point, &vacuum), f64::INFINITY);
    }

    #[test]
    fn pmf_validation() {
        assert!(DiscretePmf::new(vec![0.5, 0.4], 0.1).is_ok());
        assert!(DiscretePmf::new(vec![0.5, 0.4], 0.2).is_err());
        assert!(DiscretePmf::new(vec![-0.1, 1.1], 0.0).is_err());
    }

    #[test]
    fn coherent_homodyne_matches_generic_kl() {
        let sc = scen();
        let law1 = GaussianChannelLaw::coherent_homodyne(&sc, true).unwrap();
        let law0 = GaussianChannelLaw::coherent_homodyne(&sc, false).unwrap();
        assert_relative_eq!(re_coherent_homodyne(&sc).unwrap(), law1.kl(&law0), epsilon = 1e-12);
        assert_relative_eq!(re_coherent_homodyne(&sc).unwrap(), S_COH_HOM_REF, max_relative = 1e-13);
        assert_eq!(re_coherent_homodyne(&flat()).unwrap(), 0.0);
        // noise-free full-change literal: 2 n_bar (sqrt(eta0) - sqrt(eta1))^2
        let hard = ChangeScenario::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(re_coherent_homodyne(&hard).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kennedy_pmf_limits() {
        // zero displacement: thermal geometric with n_bar_b (1 - eta1)
        let p = kennedy_pmf(&flat(), true, 30).unwrap();
        let g = geometric_pmf(1.0 * (1.0 - 0.8), 31).unwrap();
        for (a, b) in p.probs().iter().zip(g.probs()) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        // pure displaced vacuum: Poisson with mean alpha_d^2 = 1
        let gap = (0.9f64.sqrt() - 0.8f64.sqrt()).powi(2);
        let sc = ChangeScenario::new(1.0 / gap, 0.0, 0.9, 0.8).unwrap();
        let p = kennedy_pmf(&sc, true, 25).unwrap();
        let mut expect = (-1.0f64).exp();
        for k in 0..=25 {
            assert_relative_eq!(p.probs()[k], expect, max_relative = 1e-9, epsilon = 1e-300);
            expect /= (k + 1) as f64;
        }
    }

    #[test]
    fn kennedy_pmf_normalizes() {
        for sc in [scen(), ChangeScenario::new(400.0, 0.5, 0.9, 0.8).unwrap()] {
            let (p1, p0) = kennedy_pmf_pair(&sc).unwrap();
            let total: f64 = p1.probs().iter().sum::<f64>() + p1.tail_mass();
            assert!((total - 1.0).abs() < 1e-9);
            let total0: f64 = p0.probs().iter().sum::<f64>() + p0.tail_mass();
            assert!((total0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kennedy_re_reference() {
        assert_relative_eq!(re_kennedy(&scen()).unwrap(), S_KENNEDY_REF, max_relative = 1e-9);
        // data processing against the coherent-probe QRE
        assert!(re_kennedy(&scen()).unwrap() <= qre_coherent(&scen()).unwrap().value + 1e-9);
    }

    #[test]
    fn ea_coherent_degenerates_to_coherent() {
        let sc = scen();
        let v = re_ea_coherent_homodyne(1, sc.n_bar.sqrt(), &sc).unwrap();
        assert_relative_eq!(v, re_coherent_homodyne(&sc).unwrap(), max_relative = 1e-11);
    }

    #[test]
    fn ea_coherent_optimized_beats_coherent() {
        let sc = scen();
        let coh = re_coherent_homodyne(&sc).unwrap();
        let mut last = f64::INFINITY;
        for m in [1usize, 2, 4] {
            let (alpha, v) = optimize_alpha_ea(m, &sc).unwrap();
            assert!(v > coh, "m={m}: {v} <= {coh}");
            assert!((0.0..=sc.n_bar.sqrt()).contains(&alpha));
            // larger blocks deliver less per mode at these parameters
            assert!(v < last, "m={m}");
            last = v;
        }
    }

    #[test]
    fn ea_coherent_flat_case() {
        let (_, v) = optimize_alpha_ea(2, &flat()).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(re_ea_coherent_homodyne(1, 10.0, &scen()).is_err()); // alpha^2 > n_bar
    }

    #[test]
    fn pnr_rates_reference() {
        let (q0, q1) = tmsv_pnr_rates(&scen()).unwrap();
        assert_relative_eq!(q0, 0.3440306508910550, max_relative = 1e-12);
        assert_relative_eq!(q1, 0.6077678762982533, max_relative = 1e-12);
        // no change: q1 = q0
        let (a, b) = tmsv_pnr_rates(&flat()).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-12);
        // pure loss: the matched squeezer purifies the prechange output
        let pure = ChangeScenario::new(5.0, 0.0, 0.9, 0.8).unwrap();
        let (q0, _) = tmsv_pnr_rates(&pure).unwrap();
        assert!(q0.abs() < 1e-10);
    }

    #[test]
    fn pnr_re_reference_and_monotonicity() {
        let sc = scen();
        assert_relative_eq!(
            re_tmsv_pnr(&sc, Resolution::Infinite).unwrap(),
            S_INF_REF,
            max_relative = 1e-11
        );
        let mut last = 0.0;
        for l in 1..=12 {
            let v = re_tmsv_pnr(&sc, Resolution::Finite(l)).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(last <= S_INF_REF);
        // printed geometric approach rate: S_inf - S_l = (q1/(1+q1))^{l+1} S_inf
        let (_, q1) = tmsv_pnr_rates(&sc).unwrap();
        for l in [1u32, 3, 7] {
            let v = re_tmsv_pnr(&sc, Resolution::Finite(l)).unwrap();
            let expect = (1.0 - (q1 / (1.0 + q1)).powi(l as i32 + 1)) * S_INF_REF;
            assert_relative_eq!(v, expect, max_relative = 1e-10);
        }
        assert_eq!(re_tmsv_pnr(&flat(), Resolution::Infinite).unwrap(), 0.0);
        assert!(re_tmsv_pnr(&sc, Resolution::Finite(0)).is_err());
    }

    #[test]
    fn spd_equals_two_outcome_kl() {
        // the printed single-photon formula is exactly the lumped l=1 value
        for (q0, q1) in [(0.344, 0.608), (0.1, 2.0), (3.0, 0.2), (1e-4, 0.5)] {
            assert_relative_eq!(
                spd_closed_form(q0, q1),
                lumped_geometric_kl(q1, q0, 1),
                epsilon = 1e-12
            );
        }
        let sc = scen();
        assert_relative_eq!(
            re_tmsv_spd(&sc).unwrap(),
            re_tmsv_pnr_lumped(&sc, 1).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn printed_finite_resolution_formula_differs_from_lumped() {
        // documented inconsistency: for l >= 2 the printed closed form is not
        // the lumped-bin relative entropy of the truncated detector
        let sc = scen();
        for l in [2u32, 3, 5] {
            let printed = re_tmsv_pnr(&sc, Resolution::Finite(l)).unwrap();
            let lumped = re_tmsv_pnr_lumped(&sc, l).unwrap();
            assert!((printed - lumped).abs() > 1e-6, "l={l}: unexpectedly equal");
        }
    }

    #[test]
    fn optimized_tms_at_least_matched() {
        let sc = scen();
        let matched = re_tmsv_pnr(&sc, Resolution::Infinite).unwrap();
        let (nu_star, v) = optimize_tms_pnr(&sc).unwrap();
        assert!(v >= matched - 1e-12);
        assert!(nu_star >= 0.0);
    }

    #[test]
    fn two_pnr_collapses_without_change() {
        // tau1 = 0: product of geometrics
        let p = two_pnr_pmf(&flat(), 2, 3, 50).unwrap();
        let (_, n11, n21) = crate::qre::chain_standard_form(&flat(), true).unwrap();
        let expect = ln_zeta(n11, n21, 2.0, 3.0).exp();
        assert_relative_eq!(p, expect, max_relative = 1e-12);
    }

    #[test]
    fn two_pnr_normalization_and_marginal() {
        let sc = scen();
        let (p1, _) = two_pnr_grids(&sc, 400).unwrap();
        let mass: f64 = p1.iter().flatten().sum();
        assert!((mass - 1.0).abs() < 1e-8, "mass = {mass}");
        // marginal over the idler recovers the single-PNR geometric law
        let (q_sig, _) = two_pnr_marginal_rates(&sc).unwrap();
        let (_, q1) = tmsv_pnr_rates(&sc).unwrap();
        assert_relative_eq!(q_sig, q1, epsilon = 1e-12);
        for k in 0..4usize {
            let marginal: f64 = p1[k].iter().sum();
            let geo = (q1 / (1.0 + q1)).powi(k as i32) / (1.0 + q1);
            assert_relative_eq!(marginal, geo, max_relative = 1e-8);
        }
    }

    #[test]
    fn two_pnr_re_reference_and_ordering() {
        let sc = scen();
        let re = re_two_pnr(&sc, 400).unwrap();
        assert_relative_eq!(re.value, S_TWO_PNR_REF, max_relative = 1e-8);
        assert!(re.truncated_mass < 1e-8);
        // the second detector adds information; the probe QRE still bounds it
        assert!(re.value >= re_tmsv_pnr(&sc, Resolution::Infinite).unwrap());
        assert!(re.value <= qre_tmsv(&sc).unwrap().value + 1e-9);
        assert_eq!(re_two_pnr(&flat(), 100).unwrap().value, 0.0);
    }

    #[test]
    fn homodyne_chains() {
        let sc = scen();
        assert_relative_eq!(
            re_tmsv_homodyne(&sc, HomodyneChain::MatchedTms).unwrap(),
            S_HOM_MATCHED_REF,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            re_tmsv_homodyne(&sc, HomodyneChain::Direct).unwrap(),
            S_HOM_DIRECT_REF,
            max_relative = 1e-11
        );
        for chain in [HomodyneChain::MatchedTms, HomodyneChain::Direct] {
            assert!(re_tmsv_homodyne(&flat(), chain).unwrap().abs() < 1e-15);
            assert!(re_tmsv_homodyne(&sc, chain).unwrap() <= qre_tmsv(&sc).unwrap().value);
        }
        // the printed leading term belongs to the direct chain:
        // (n_bar_b - n_bar)(eta0 - eta1) / (1 + 2 n_bar_b (1 - eta0) + 2 n_bar eta0)
        let first = (sc.n_bar_b - sc.n_bar) * (sc.eta0 - sc.eta1)
            / (1.0 + 2.0 * sc.n_bar_b * (1.0 - sc.eta0) + 2.0 * sc.n_bar * sc.eta0);
        let v = |eta: f64| (1.0 + 2.0 * sc.n_bar_b * (1.0 - eta) + 2.0 * sc.n_bar * eta) / 4.0;
        assert_relative_eq!(first, 0.5 * (v(sc.eta1) / v(sc.eta0) - 1.0), epsilon = 1e-12);
    }

    #[test]
    fn fock_pmf_limits() {
        // vacuum probe: thermal geometric
        let g = geometric_pmf(1.0 * (1.0 - 0.9), 12).unwrap();
        for x in 0..12u64 {
            assert_relative_eq!(
                fock_pmf(x, 0, 0.9, 1.0).unwrap(),
                g.probs()[x as usize],
                max_relative = 1e-12
            );
        }
        // near-pure-loss: binomial
        for n in [1u64, 3, 10] {
            for x in 0..=n {
                let binom = (ln_factorial(n) - ln_factorial(x) - ln_factorial(n - x)).exp()
                    * 0.7f64.powi(x as i32)
                    * 0.3f64.powi((n - x) as i32);
                let p = fock_pmf(x, n, 0.7, 1e-12).unwrap();
                assert!((p - binom).abs() < 1e-6, "n={n} x={x}: {p} vs {binom}");
            }
        }
        assert!(fock_pmf(0, 1, 1.0, 0.5).is_err());
        assert!(fock_pmf(0, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn fock_pmf_normalizes() {
        for (n, eta, nb) in [(5u64, 0.9, 1.0), (10, 0.6, 0.3), (3, 0.2, 2.0)] {
            let p = fock_output_pmf(n, eta, nb, 1e-10).unwrap();
            let total: f64 = p.probs().iter().sum::<f64>() + p.tail_mass();
            assert!((total - 1.0).abs() < 1e-8, "n={n}: {total}");
        }
    }

    #[test]
    fn fock_re_finite_low_noise_limit() {
        let hi = re_fock_pnr(&ChangeScenario::new(5.0, 1e-6, 0.9, 0.8).unwrap()).unwrap();
        let lo = re_fock_pnr(&ChangeScenario::new(5.0, 1e-8, 0.9, 0.8).unwrap()).unwrap();
        assert!((hi / lo - 1.0).abs() < 0.01, "hi={hi} lo={lo}");
        // frozen reference at n_bar_b = 1e-6
        assert_relative_eq!(hi, 0.222014939119, max_relative = 1e-8);
        assert_eq!(
            re_fock_pnr(&ChangeScenario::new(5.0, 1e-6, 0.9, 0.9).unwrap()).unwrap(),
            0.0
        );
        assert!(re_fock_pnr(&ChangeScenario::new(5.5, 1e-6, 0.9, 0.8).unwrap()).is_err());
    }
}
