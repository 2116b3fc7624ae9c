//! Special functions backing the photon-count distributions: associated
//! Laguerre polynomials, the terminating Gauss hypergeometric series, and a
//! log-factorial table.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Associated Laguerre polynomial L_l^{(a)}(x) by the three-term recurrence
///
///   (n+1) L_{n+1} = (2n + 1 + a - x) L_n - (n + a) L_{n-1}
///
/// with L_0 = 1 and L_1 = 1 + a - x.
pub fn assoc_laguerre(l: u32, a: u32, x: f64) -> f64 {
    let a = a as f64;
    if l == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for n in 1..l {
        let n = n as f64;
        let next = ((2.0 * n + 1.0 + a - x) * cur - (n + a) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Terminating Gauss hypergeometric series 2F1(a, b; c; z) for nonpositive
/// integer a, b. The sum runs to min(-a, -b); a zero denominator c + k
/// before termination is a domain error.
pub fn hyp2f1_terminating(a: i64, b: i64, c: f64, z: f64) -> Result<f64> {
    if a > 0 || b > 0 {
        return Err(Error::InvalidArgument(format!(
            "2F1 parameters must be nonpositive integers, got a={a}, b={b}"
        )));
    }
    let terms = (-a).min(-b) as u64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..terms {
        let kf = k as f64;
        let num = (a as f64 + kf) * (b as f64 + kf);
        if num == 0.0 {
            break;
        }
        let den = (c + kf) * (kf + 1.0);
        if c + kf == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "2F1 denominator vanishes at k={k} before the series terminates"
            )));
        }
        term *= num * z / den;
        sum += term;
    }
    if !sum.is_finite() {
        return Err(Error::Numerical("2F1 series overflowed f64 range".into()));
    }
    Ok(sum)
}

/// ln(n!) via the log-gamma function.
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Table of ln(k!) for k in 0..len, for the factorial-heavy photon sums.
pub(crate) fn ln_factorial_table(len: usize) -> Vec<f64> {
    (0..len as u64).map(ln_factorial).collect()
}
