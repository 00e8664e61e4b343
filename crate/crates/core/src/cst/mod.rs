//! The coherent state transform `U^t = CK o e^{t Delta / 2}`.
//!
//! [`cst_forward`] decomposes sphere data into spherical monogenics, damps
//! each mode by its heat multiplier and attaches the radial power of its
//! monogenic extension, giving a [`LaurentMonogenic`] on `R^{m+1} \ {0}`.
//! Norms in the target space are computed per mode from the analytic radial
//! moments in [`MeasureParams`].

mod measure;
mod verify;

pub use measure::{radial_moment_log, rho_density, MeasureParams};
pub use verify::{
    verify_unitarity, AmplificationSummary, ConcentrationSummary, ConstraintReport, ModeRow, Tolerances,
    TrialReport, UnitarityReport, VerifyConfig,
};

use num_complex::Complex;

use crate::clifford::{Multivector, Vector1};
use crate::error::{Error, Result};
use crate::kernels::{ck_heat_kernel, KernelTruncation, DEFAULT_WINDOW};
use crate::scalar::Real;
use crate::spectral::{decompose, heat_flow, reproduce_at, Mode, SpectralDecomposition};
use crate::sphere::SphereFunction;

/// Largest inverse heat multiplier [`cst_inverse`] will apply.
pub const AMPLIFICATION_CAP: f64 = 1e12;

/// Monogenic function `sum_k |x|^k p_k(x/|x|) + sum_k |x|^{-(k+m)} q_k(x/|x|)`.
#[derive(Clone)]
pub struct LaurentMonogenic<T> {
    parts: SpectralDecomposition<T>,
    r_min: f64,
    r_max: f64,
}

impl<T: Real> std::fmt::Debug for LaurentMonogenic<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaurentMonogenic")
            .field("parts", &self.parts)
            .field("window", &(self.r_min, self.r_max))
            .finish()
    }
}

/// Monogenic extension of a decomposition, valid on the default window.
pub fn ck_extend<T: Real>(dec: &SpectralDecomposition<T>) -> LaurentMonogenic<T> {
    LaurentMonogenic {
        parts: dec.clone(),
        r_min: DEFAULT_WINDOW.0,
        r_max: DEFAULT_WINDOW.1,
    }
}

impl<T: Real> LaurentMonogenic<T> {
    pub fn with_window(mut self, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min <= 1.0 && r_max >= 1.0 && r_max.is_finite()) {
            return Err(Error::param(
                "radial_window",
                format!("need 0 < r_min <= 1 <= r_max, got [{r_min}, {r_max}]"),
            ));
        }
        self.r_min = r_min;
        self.r_max = r_max;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.parts.m()
    }

    pub fn max_degree(&self) -> usize {
        self.parts.max_degree()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    /// Spherical parts, i.e. the restriction to `|x| = 1` split by mode.
    pub fn spherical_parts(&self) -> &SpectralDecomposition<T> {
        &self.parts
    }

    fn radial_factor(&self, mode: Mode, r: T) -> T {
        r.powi(mode.radial_power(self.m()) as i32)
    }

    /// Values at `r * xi_i` for every node `xi_i` of the rule.
    pub fn restriction(&self, r: T) -> SphereFunction<T> {
        self.parts.weighted_sum(|md| self.radial_factor(md, r))
    }

    fn check_radius(&self, r: T) -> Result<()> {
        let rf = r.to_f64_lossy();
        if rf < self.r_min || rf > self.r_max {
            return Err(Error::OutsideWindow {
                radius: rf,
                r_min: self.r_min,
                r_max: self.r_max,
            });
        }
        Ok(())
    }

    /// Value at `x`. Directions that coincide with a quadrature node are read
    /// off directly; other directions are reconstructed through the
    /// reproducing kernels of each mode.
    pub fn evaluate(&self, x: &Vector1<T>) -> Result<Multivector<T>> {
        let dim = self.m() + 1;
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        let (eta, r) = x.polar()?;
        self.check_radius(r)?;
        let rule = self.parts.p()[0].rule();
        let tol = T::lit(4.0) * T::epsilon();
        let hit = rule.nodes().iter().position(|node| {
            node.components()
                .iter()
                .zip(eta.components())
                .all(|(a, b)| (*a - *b).abs() <= tol)
        });
        if let Some(i) = hit {
            let mut out = Multivector::zero(dim);
            for (mode, g) in self.parts.components() {
                out.axpy_real(self.radial_factor(mode, r), &g.values()[i]);
            }
            return Ok(out);
        }
        let parts: Vec<(Mode, T, &SphereFunction<T>)> = self
            .parts
            .components()
            .map(|(mode, g)| (mode, self.radial_factor(mode, r), g))
            .collect();
        reproduce_at(&parts, &eta)
    }
}

/// Evaluates the Laurent sum at `x`.
pub fn evaluate_laurent<T: Real>(f: &LaurentMonogenic<T>, x: &Vector1<T>) -> Result<Multivector<T>> {
    f.evaluate(x)
}

/// Norm in the Gaussian-weighted space of monogenic functions:
/// `sqrt(sum_mode e^{moment_log(a_mode)} ||mode||^2)` with analytic radial moments.
pub fn ml2_norm<T: Real>(f: &LaurentMonogenic<T>, params: &MeasureParams) -> Result<T> {
    if params.m != f.m() {
        return Err(Error::DimensionMismatch {
            expected: f.m(),
            found: params.m,
        });
    }
    let total: T = f
        .parts
        .components()
        .map(|(mode, g)| T::lit(params.mode_moment_log(mode).exp()) * g.norm_sqr())
        .sum();
    Ok(total.sqrt())
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param("t", format!("must be positive, got {t}")))
    }
}

/// `U^t f` for data band-limited to harmonic degree `K`; the rule must be
/// exact to degree `2K + 2`.
pub fn cst_forward<T: Real>(f: &SphereFunction<T>, t: T, band_limit: usize) -> Result<LaurentMonogenic<T>> {
    check_t(t)?;
    Ok(ck_extend(&heat_flow(&decompose(f, band_limit)?, t)?))
}

/// Applies `U^t` to an existing decomposition.
pub fn cst_forward_decomposed<T: Real>(dec: &SpectralDecomposition<T>, t: T) -> Result<LaurentMonogenic<T>> {
    check_t(t)?;
    Ok(ck_extend(&heat_flow(dec, t)?))
}

/// Largest inverse heat multiplier (log) needed to undo `U^t` up to `band_limit`.
pub fn inverse_log_multiplier(m: usize, t: f64, band_limit: usize) -> f64 {
    -Mode::plus(band_limit).heat_log_multiplier(m, t)
}

/// Inverse of [`cst_forward`] on band-limited data: reads the spherical
/// parts at `|x| = 1` and undoes the heat multipliers.
pub fn cst_inverse<T: Real>(f: &LaurentMonogenic<T>, t: T) -> Result<SphereFunction<T>> {
    check_t(t)?;
    let m = f.m();
    let tf = t.to_f64_lossy();
    let worst = inverse_log_multiplier(m, tf, f.max_degree());
    let cap_log = AMPLIFICATION_CAP.ln();
    if worst > cap_log {
        return Err(Error::AmplificationExceeded {
            log_multiplier: worst,
            cap_log,
        });
    }
    Ok(f.parts.weighted_sum(|md| T::lit((-md.heat_log_multiplier(m, tf)).exp())))
}

/// `U^t f (x)` by quadrature of `f` against the extended heat kernel, the
/// other side of the factorization `U^t = CK o e^{t Delta / 2}`. Needs `m >= 2`.
pub fn cst_by_kernel<T: Real>(
    f: &SphereFunction<T>,
    t: T,
    trunc: &KernelTruncation,
    x: &Vector1<T>,
) -> Result<Multivector<T>> {
    let m = f.m();
    let rule = f.rule();
    let mut out = Multivector::zero(m + 1);
    for ((xi, &w), v) in rule.nodes().iter().zip(rule.weights()).zip(f.values()) {
        let kernel = ck_heat_kernel(m, t, trunc, x, xi)?;
        out.axpy_real(w, &kernel.geometric_product(v)?);
    }
    Ok(out)
}

/// `sum_{n in Z} q^{n^2} z^n` with `q = e^{-t/2}`, through the Jacobi triple
/// product `prod_j (1 - q^{2j}) (1 + q^{2j-1} z) (1 + q^{2j-1} / z)`.
pub fn circle_theta(t: f64, z: Complex<f64>) -> Complex<f64> {
    let q = (-t / 2.0).exp();
    let zinv = z.inv();
    let reach = z.norm().max(zinv.norm());
    let mut acc = Complex::new(1.0, 0.0);
    let mut j = 1;
    loop {
        let odd = q.powi(2 * j - 1);
        let even = q.powi(2 * j);
        acc *= (1.0 - even) * (1.0 + z * odd) * (1.0 + zinv * odd);
        if odd * reach < 1e-18 && even < 1e-18 {
            break;
        }
        j += 1;
    }
    acc
}

/// Closed-form circle transform: quadrature of `f` against the extended
/// circle heat kernel `sum_n e^{-t n^2 / 2} (r e^{-(theta - theta') e12})^n`,
/// summed in closed form by [`circle_theta`]. The rule of `f` should resolve
/// the kernel, i.e. have many more nodes than the band limit of `f`.
pub fn circle_cst_closed_form(f: &SphereFunction<f64>, t: f64, x: &Vector1<f64>) -> Result<Multivector<f64>> {
    if f.m() != 1 {
        return Err(Error::param("m", "the closed-form circle transform needs m = 1"));
    }
    check_t(t)?;
    let (eta, r) = x.polar()?;
    let th = eta.components()[1].atan2(eta.components()[0]);
    let e12 = Multivector::<f64>::basis_blade(2, 0b11);
    let rule = f.rule();
    let mut out = Multivector::zero(2);
    for ((xi, &w), v) in rule.nodes().iter().zip(rule.weights()).zip(f.values()) {
        let phi = xi.components()[1].atan2(xi.components()[0]);
        let kernel = circle_theta(t, Complex::from_polar(r, -(th - phi)));
        out.axpy_real(w * kernel.re, v);
        out.axpy_real(w * kernel.im, &(&e12 * v));
    }
    Ok(out)
}
