//! Gegenbauer polynomials `C_k^nu`, rising factorials and the factorial
//! growth bounds for the zonal monogenic kernels.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rising factorial `(a)_j = a (a + 1) ... (a + j - 1)`, with `(a)_0 = 1`.
pub fn pochhammer<T: Real>(a: T, j: u32) -> T {
    (0..j).fold(T::one(), |acc, i| acc * (a + T::from_u32(i).expect("small index")))
}

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if nu > T::zero() {
        Ok(())
    } else {
        Err(Error::param("nu", format!("must be positive, got {nu}")))
    }
}

/// `C_k^nu(s)` by the three-term recurrence
/// `k C_k = 2 s (k + nu - 1) C_{k-1} - (k + 2 nu - 2) C_{k-2}`.
pub fn gegenbauer<T: Real>(k: i64, nu: T, s: T) -> Result<T> {
    if k < 0 {
        return Err(Error::param("k", format!("degree must be non-negative, got {k}")));
    }
    check_nu(nu)?;
    let mut buf = vec![T::zero(); k as usize + 1];
    gegenbauer_sequence_into(&mut buf, nu, s);
    Ok(buf[k as usize])
}

/// Fills `out[k] = C_k^nu(s)` for `k = 0 .. out.len()`. No argument checks.
#[inline]
pub fn gegenbauer_sequence_into<T: Real>(out: &mut [T], nu: T, s: T) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = T::one();
    if n == 1 {
        return;
    }
    let two = T::lit(2.0);
    out[1] = two * nu * s;
    let mut kf = T::one();
    for k in 2..n {
        kf = kf + T::one();
        out[k] = (two * s * (kf + nu - T::one()) * out[k - 1]
            - (kf + two * nu - two) * out[k - 2])
            / kf;
    }
}

pub fn gegenbauer_sequence<T: Real>(max_degree: usize, nu: T, s: T) -> Vec<T> {
    let mut out = vec![T::zero(); max_degree + 1];
    gegenbauer_sequence_into(&mut out, nu, s);
    out
}

/// `C_k^nu(s)` from the explicit alternating sum
/// `sum_j (-1)^j (nu)_{k-j} (2s)^{k-2j} / (j! (k-2j)!)`, accumulated with
/// Neumaier compensation. Loses accuracy for large `k`; used as a cross-check.
pub fn gegenbauer_explicit<T: Real>(k: u32, nu: T, s: T) -> Result<T> {
    check_nu(nu)?;
    let two_s = T::lit(2.0) * s;
    let mut sum = T::zero();
    let mut comp = T::zero();
    for j in 0..=(k / 2) {
        let mut term = pochhammer(nu, k - j) * two_s.powi((k - 2 * j) as i32)
            / (factorial::<T>(j) * factorial::<T>(k - 2 * j));
        if j % 2 == 1 {
            term = -term;
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp = comp + ((sum - t) + term);
        } else {
            comp = comp + ((term - t) + sum);
        }
        sum = t;
    }
    Ok(sum + comp)
}

fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_u32(i).expect("small integer"))
}

/// `ln(n!)` through the log-gamma function.
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Which zonal kernel a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSide {
    /// `C^+_{m+1,k}`: inner spherical monogenics of degree `k`.
    Plus,
    /// `C^-_{m+1,k-1}`: outer spherical monogenics sharing the harmonic degree `k`.
    Minus,
}

/// Natural log of the uniform bound on the zonal kernels at harmonic degree `k`:
///
/// * plus:  `(2k + m - 1)! / (m - 1)! * (k + 2m - 2)`
/// * minus: `(2k + m - 1)! / (m - 1)! * (k + m - 1)`
///
/// Valid for `m >= 2`. For the minus side, `k` is the harmonic degree, so the
/// bound applies to `C^-_{m+1,k-1}`.
pub fn kernel_bound_log(k: usize, m: usize, side: KernelSide) -> Result<f64> {
    if m < 2 {
        return Err(Error::param("m", "kernel bounds require m >= 2"));
    }
    let base = ln_factorial((2 * k + m - 1) as u64) - ln_factorial((m - 1) as u64);
    let tail = match side {
        KernelSide::Plus => (k + 2 * m - 2) as f64,
        KernelSide::Minus => (k + m - 1) as f64,
    };
    Ok(base + tail.ln())
}
