//! Numerical certificate that `U^t` is unitary on band-limited data.
//!
//! Each trial draws a random band-limited input from the oracle bases of
//! homogeneous monogenic polynomials, pushes it through [`super::cst_forward`]
//! and records the isometry ratio, the finite-difference Dirac residual of
//! the output, the inverse roundtrip error and, on the circle, the distance
//! to the closed-form transform. The moment identities behind the isometry
//! are checked separately by numerical integration of the radial density.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    circle_cst_closed_form, cst_forward_decomposed, cst_inverse, inverse_log_multiplier, ml2_norm,
    LaurentMonogenic, MeasureParams, AMPLIFICATION_CAP,
};
use crate::clifford::Vector1;
use crate::error::{Error, Result};
use crate::gegenbauer::KernelSide;
use crate::polynomial::{monogenic_basis, numerical_dirac_residual, outer_monogenic_basis, MvPolynomial};
use crate::spectral::{band_modes, decompose_many};
use crate::sphere::{build_quadrature, SphereFunction, MAX_QUADRATURE_DEGREE};

/// Pass thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `| ||U f|| / ||f|| - 1 |`.
    pub isometry: f64,
    /// Decomposition residuals, moment identities and closed-form agreement.
    pub residual: f64,
    /// Finite-difference Dirac residual.
    pub dirac: f64,
    /// Relative L2 roundtrip error.
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isometry: 1e-6,
            residual: 1e-8,
            dirac: 1e-6,
            roundtrip: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub m: usize,
    pub t: f64,
    /// Band limit `K` (highest harmonic degree of the inputs).
    pub band_limit: usize,
    pub trials: usize,
    pub seed: u64,
    /// Quadrature exactness; defaults to `2K + 4`.
    pub quadrature_degree: Option<usize>,
    /// Random evaluation points per trial for the Dirac residual.
    pub dirac_points: usize,
    /// Step of the finite-difference Dirac operator.
    pub dirac_step: f64,
    /// Highest `k` in the moment identities.
    pub moment_degree: usize,
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn new(m: usize, t: f64, band_limit: usize, trials: usize, seed: u64) -> Self {
        VerifyConfig {
            m,
            t,
            band_limit,
            trials,
            seed,
            quadrature_degree: None,
            dirac_points: 3,
            dirac_step: 1e-3,
            moment_degree: 12,
            tolerances: Tolerances::default(),
        }
    }

    pub fn quadrature_degree(&self) -> usize {
        self.quadrature_degree.unwrap_or(2 * self.band_limit + 4)
    }

    pub fn validate(&self) -> Result<()> {
        MeasureParams::new(self.m, self.t)?;
        if self.m > crate::sphere::MAX_SPHERE_DIM {
            return Err(Error::UnsupportedDimension(self.m));
        }
        let degree = self.quadrature_degree();
        if degree > MAX_QUADRATURE_DEGREE {
            return Err(Error::param(
                "degree",
                format!("quadrature degree {degree} exceeds {MAX_QUADRATURE_DEGREE}; lower K"),
            ));
        }
        if degree < 2 * self.band_limit + 2 {
            return Err(Error::InsufficientExactness {
                required: 2 * self.band_limit + 2,
                available: degree,
            });
        }
        if !(self.dirac_step > 0.0) {
            return Err(Error::param("dirac_step", "must be positive"));
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("tol_iso", tol.isometry),
            ("tol_res", tol.residual),
            ("tol_dirac", tol.dirac),
            ("tol_roundtrip", tol.roundtrip),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    pub input_norm: f64,
    pub isometry_ratio: f64,
    pub decomposition_residual: f64,
    pub dirac_residual: f64,
    /// `None` when the inverse would exceed the amplification cap.
    pub roundtrip_error: Option<f64>,
    /// Circle only: distance to the closed-form transform.
    pub closed_form_error: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `plus`: exponent `2k + m + 1`; `minus`: exponent `-(2k + m - 3)`.
    pub system: KernelSide,
    pub k: usize,
    pub exponent: f64,
    /// `t k (k + m - 1)`.
    pub expected_log: f64,
    pub analytic_log: f64,
    pub numeric_log: f64,
    pub residual: f64,
    pub pass: bool,
}

/// One row of the per-mode table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub side: KernelSide,
    pub k: usize,
    pub gamma_eigenvalue: i64,
    pub radial_power: i64,
    pub heat_log_multiplier: f64,
    pub moment_log: f64,
    /// `moment_log + 2 heat_log_multiplier`; zero for an isometry.
    pub isometry_log_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationSummary {
    pub max_inverse_log_multiplier: f64,
    pub cap_log: f64,
    pub roundtrip_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub threshold: f64,
    /// `mu_t({ |log |x|| > threshold })`.
    pub mass_outside: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarityReport {
    pub m: usize,
    pub t: f64,
    #[serde(rename = "K")]
    pub band_limit: usize,
    pub seed: u64,
    pub quadrature_degree: usize,
    pub quadrature_nodes: usize,
    pub tolerances: Tolerances,
    pub amplification: AmplificationSummary,
    pub concentration: ConcentrationSummary,
    pub modes: Vec<ModeRow>,
    pub trials: Vec<TrialReport>,
    pub constraints: Vec<ConstraintReport>,
    pub pass: bool,
}

impl UnitarityReport {
    pub fn to_json(&self) -> Result<String> {
        crate::output::to_json(self)
    }

    pub fn max_isometry_error(&self) -> f64 {
        self.trials
            .iter()
            .map(|t| (t.isometry_ratio - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Per-mode table as CSV.
    pub fn write_modes_csv<W: Write>(&self, out: W) -> Result<()> {
        use crate::output::format_f64;
        let mut wtr = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::Malformed(e.to_string());
        wtr.write_record([
            "side",
            "k",
            "gamma_eigenvalue",
            "radial_power",
            "heat_log_multiplier",
            "moment_log",
            "isometry_log_defect",
        ])
        .map_err(fail)?;
        for r in &self.modes {
            let side = match r.side {
                KernelSide::Plus => "plus",
                KernelSide::Minus => "minus",
            };
            wtr.write_record([
                side.to_string(),
                r.k.to_string(),
                r.gamma_eigenvalue.to_string(),
                r.radial_power.to_string(),
                format_f64(r.heat_log_multiplier),
                format_f64(r.moment_log),
                format_f64(r.isometry_log_defect),
            ])
            .map_err(fail)?;
        }
        wtr.flush().map_err(|e| Error::Malformed(e.to_string()))
    }
}

/// Oracle bases for every mode of the band.
struct OracleBases {
    inner: Vec<Vec<MvPolynomial<f64>>>,
    outer: Vec<Vec<MvPolynomial<f64>>>,
}

impl OracleBases {
    fn new(m: usize, band_limit: usize) -> Result<Self> {
        let inner = (0..=band_limit as u32)
            .map(|k| monogenic_basis(m, k))
            .collect::<Result<Vec<_>>>()?;
        let outer = (0..band_limit as u32)
            .map(|k| outer_monogenic_basis(m, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(OracleBases { inner, outer })
    }

    /// Random complex Gaussian combination of every basis element in the band.
    fn random_input(&self, dim: usize, rng: &mut ChaCha8Rng) -> MvPolynomial<f64> {
        let mut p = MvPolynomial::zero(dim);
        for basis in self.inner.iter().chain(&self.outer) {
            let scale = 1.0 / (basis.len() as f64).sqrt();
            for b in basis {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                p = &p + &b.scale(Complex::new(re * scale, im * scale));
            }
        }
        p
    }
}

fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, r_lo: f64, r_hi: f64) -> Vector1<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok((dir, _)) = Vector1::new(v).polar() {
            return dir.scale(rng.random_range(r_lo..r_hi));
        }
    }
}

fn constraint_rows(params: &MeasureParams, moment_degree: usize, tol: f64) -> Vec<ConstraintReport> {
    let m = params.m as f64;
    let mut rows = Vec::new();
    for system in [KernelSide::Plus, KernelSide::Minus] {
        for k in 0..=moment_degree {
            let kf = k as f64;
            let exponent = match system {
                KernelSide::Plus => 2.0 * kf + m + 1.0,
                KernelSide::Minus => -(2.0 * kf + m - 3.0),
            };
            let expected_log = params.t * kf * (kf + m - 1.0);
            let analytic_log = params.moment_log(exponent);
            let numeric_log = params.moment_log_numeric(exponent);
            let residual = (analytic_log - expected_log).abs().max((numeric_log - expected_log).abs());
            rows.push(ConstraintReport {
                system,
                k,
                exponent,
                expected_log,
                analytic_log,
                numeric_log,
                residual,
                pass: residual <= tol,
            });
        }
    }
    rows
}

fn mode_rows(params: &MeasureParams, band_limit: usize) -> Vec<ModeRow> {
    let m = params.m;
    band_modes(band_limit)
        .into_iter()
        .map(|mode| {
            let heat = mode.heat_log_multiplier(m, params.t);
            let moment = params.mode_moment_log(mode);
            ModeRow {
                side: mode.side,
                k: mode.k,
                gamma_eigenvalue: mode.gamma_eigenvalue(m),
                radial_power: mode.radial_power(m),
                heat_log_multiplier: heat,
                moment_log: moment,
                isometry_log_defect: moment + 2.0 * heat,
            }
        })
        .collect()
}

struct TrialInput {
    poly: MvPolynomial<f64>,
    points: Vec<Vector1<f64>>,
}

fn run_trial(
    index: usize,
    config: &VerifyConfig,
    params: &MeasureParams,
    input: &TrialInput,
    f: &SphereFunction<f64>,
    forward: &LaurentMonogenic<f64>,
    fine_rule: Option<&Arc<crate::sphere::QuadratureRule<f64>>>,
    roundtrip_allowed: bool,
) -> Result<TrialReport> {
    let tol = &config.tolerances;
    let input_norm = f.norm();
    let isometry_ratio = ml2_norm(forward, params)? / input_norm;
    let decomposition_residual = forward.spherical_parts().residual_norm() / input_norm;

    let eval = |x: &Vector1<f64>| forward.evaluate(x);
    let mut dirac_residual: f64 = 0.0;
    for x in &input.points {
        dirac_residual = dirac_residual.max(numerical_dirac_residual(eval, x, config.dirac_step)? / input_norm);
    }

    let roundtrip_error = if roundtrip_allowed {
        let back = cst_inverse(forward, config.t)?;
        Some(back.try_sub(f)?.norm() / input_norm)
    } else {
        None
    };

    let closed_form_error = match fine_rule {
        Some(fine) => {
            let fine_f = SphereFunction::from_polynomial(fine.clone(), &input.poly)?;
            let mut worst: f64 = 0.0;
            for x in &input.points {
                let a = forward.evaluate(x)?;
                let b = circle_cst_closed_form(&fine_f, config.t, x)?;
                worst = worst.max((&a - &b).max_abs() / input_norm);
            }
            Some(worst)
        }
        None => None,
    };

    let pass = (isometry_ratio - 1.0).abs() <= tol.isometry
        && decomposition_residual <= tol.residual
        && dirac_residual <= tol.dirac
        && roundtrip_error.map_or(true, |e| e <= tol.roundtrip)
        && closed_form_error.map_or(true, |e| e <= tol.residual);
    Ok(TrialReport {
        index,
        input_norm,
        isometry_ratio,
        decomposition_residual,
        dirac_residual,
        roundtrip_error,
        closed_form_error,
        pass,
    })
}

/// Runs `trials` seeded random trials plus the moment identities. The report
/// depends only on the configuration.
pub fn verify_unitarity(config: &VerifyConfig) -> Result<UnitarityReport> {
    config.validate()?;
    let m = config.m;
    let dim = m + 1;
    let params = MeasureParams::new(m, config.t)?;
    let degree = config.quadrature_degree();
    let rule = Arc::new(build_quadrature::<f64>(m, degree)?);
    let bases = OracleBases::new(m, config.band_limit)?;
    let window = super::DEFAULT_WINDOW;

    let inputs: Vec<TrialInput> = (0..config.trials)
        .map(|i| {
            let mut rng = trial_rng(config.seed, i);
            let poly = bases.random_input(dim, &mut rng);
            let points = (0..config.dirac_points)
                .map(|_| random_point(&mut rng, dim, 0.5, 2.0))
                .collect();
            TrialInput { poly, points }
        })
        .collect();
    let samples = inputs
        .par_iter()
        .map(|inp| SphereFunction::from_polynomial(rule.clone(), &inp.poly))
        .collect::<Result<Vec<_>>>()?;
    let decompositions = decompose_many(&samples, config.band_limit)?;

    let worst_log = inverse_log_multiplier(m, config.t, config.band_limit);
    let cap_log = AMPLIFICATION_CAP.ln();
    let roundtrip_allowed = worst_log <= cap_log;
    let fine_rule = if m == 1 {
        Some(Arc::new(build_quadrature::<f64>(1, MAX_QUADRATURE_DEGREE)?))
    } else {
        None
    };

    let trials = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let forward = cst_forward_decomposed(&decompositions[i], config.t)?.with_window(window.0, window.1)?;
            run_trial(
                i,
                config,
                &params,
                &inputs[i],
                &samples[i],
                &forward,
                fine_rule.as_ref(),
                roundtrip_allowed,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let constraints = constraint_rows(&params, config.moment_degree, config.tolerances.residual);
    let pass = trials.iter().all(|t| t.pass) && constraints.iter().all(|c| c.pass);
    Ok(UnitarityReport {
        m,
        t: config.t,
        band_limit: config.band_limit,
        seed: config.seed,
        quadrature_degree: degree,
        quadrature_nodes: rule.len(),
        tolerances: config.tolerances,
        amplification: AmplificationSummary {
            max_inverse_log_multiplier: worst_log,
            cap_log,
            roundtrip_checked: roundtrip_allowed,
        },
        concentration: ConcentrationSummary {
            threshold: 0.5,
            mass_outside: params.log_radius_tail(0.5),
        },
        modes: mode_rows(&params, config.band_limit),
        trials,
        constraints,
        pass,
    })
}
