//! The Gaussian-in-`log |x|` radial density and its moments.
//!
//! With `y = log |x|`, the density is
//! `rho(y) = e^{-t (m-1)^2 / 4} / sqrt(t pi) * e^{-y^2 / t - 2 y}` and
//! `dmu_t = rho(y) e^{(m+1) y} dy dsigma`. Every moment is Gaussian:
//! `log int rho(y) e^{a y} dy = -t (m-1)^2 / 4 + t (a-2)^2 / 4`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::spectral::Mode;
use crate::sphere::gauss_gegenbauer;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub m: usize,
    pub t: f64,
}

impl MeasureParams {
    pub fn new(m: usize, t: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "sphere dimension must be at least 1"));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("must be positive and finite, got {t}")));
        }
        Ok(MeasureParams { m, t })
    }

    fn log_prefactor(&self) -> f64 {
        let m1 = self.m as f64 - 1.0;
        -self.t * m1 * m1 / 4.0 - 0.5 * (self.t * std::f64::consts::PI).ln()
    }

    /// `log rho(y)`.
    pub fn log_density(&self, y: f64) -> f64 {
        self.log_prefactor() - y * y / self.t - 2.0 * y
    }

    pub fn density(&self, y: f64) -> f64 {
        self.log_density(y).exp()
    }

    /// Closed form of `log int rho(y) e^{a y} dy`.
    pub fn moment_log(&self, a: f64) -> f64 {
        let m1 = self.m as f64 - 1.0;
        -self.t * m1 * m1 / 4.0 + self.t * (a - 2.0) * (a - 2.0) / 4.0
    }

    /// Location of the peak of `rho(y) e^{a y}`.
    pub fn moment_peak(&self, a: f64) -> f64 {
        self.t * (a - 2.0) / 2.0
    }

    /// `log int rho(y) e^{a y} dy` by composite Gauss-Legendre quadrature on
    /// a window of `+-14 sqrt(t)` around the peak of the integrand. The
    /// integrand is a Gaussian of standard deviation `sqrt(t / 2)`, so the
    /// window holds all but `e^{-196}` of its mass.
    pub fn moment_log_numeric(&self, a: f64) -> f64 {
        const PANELS: usize = 64;
        const POINTS: usize = 16;
        let (s, w) = gauss_gegenbauer(POINTS, 0.5).expect("valid Gauss-Legendre rule");
        let center = self.moment_peak(a);
        let half = 14.0 * self.t.sqrt();
        let (lo, hi) = (center - half, center + half);
        let width = (hi - lo) / PANELS as f64;
        let peak_log = self.log_density(center) + a * center;
        let mut sum = 0.0;
        for p in 0..PANELS {
            let mid = lo + (p as f64 + 0.5) * width;
            for (si, wi) in s.iter().zip(&w) {
                let y = mid + 0.5 * width * si;
                sum += wi * width * (self.log_density(y) + a * y - peak_log).exp();
            }
        }
        peak_log + sum.ln()
    }

    /// Exponent `a` of the radial integral `int r^{2 power} r^m dr` of a mode
    /// in `y`-coordinates: `2k + m + 1` on the inner side and
    /// `-(2k + m - 1)` on the outer side.
    pub fn mode_exponent(&self, mode: Mode) -> f64 {
        (2 * mode.radial_power(self.m) + self.m as i64 + 1) as f64
    }

    /// `log` of the ML2 weight of a mode, `t n (n + m - 1)` for harmonic degree `n`.
    pub fn mode_moment_log(&self, mode: Mode) -> f64 {
        self.moment_log(self.mode_exponent(mode))
    }

    /// Mean and standard deviation of `y` under `mu_t` (a Gaussian).
    pub fn log_radius_distribution(&self) -> (f64, f64) {
        (self.t * (self.m as f64 - 1.0) / 2.0, (self.t / 2.0).sqrt())
    }

    /// `mu_t({ |log |x|| > c })`.
    pub fn log_radius_tail(&self, c: f64) -> f64 {
        let (mu, sd) = self.log_radius_distribution();
        let z = sd * std::f64::consts::SQRT_2;
        0.5 * erfc((c - mu) / z) + 0.5 * erfc((c + mu) / z)
    }
}

/// `rho^t_m(y)`.
pub fn rho_density(params: &MeasureParams, y: f64) -> f64 {
    params.density(y)
}

/// Analytic `log int rho^t_m(y) e^{a y} dy`.
pub fn radial_moment_log(params: &MeasureParams, a: f64) -> f64 {
    params.moment_log(a)
}
