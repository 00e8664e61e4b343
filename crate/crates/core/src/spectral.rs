//! Spherical-monogenic analysis of sampled sphere functions.
//!
//! Index convention, used everywhere in this crate:
//!
//! * `p_k` (side [`KernelSide::Plus`]) is an inner spherical monogenic of
//!   degree `k`, Gamma-eigenvalue `-k`, harmonic degree `k`;
//! * `q_k` (side [`KernelSide::Minus`]) is an outer spherical monogenic with
//!   Gamma-eigenvalue `k + m` and harmonic degree `k + 1`. It is extracted with
//!   the kernel `C^-_{m+1,k}`.
//!
//! A decomposition with band limit `K` keeps every mode of harmonic degree at
//! most `K`: `p_0 ..= p_K` and `q_0 .. q_{K-1}`.
//!
//! For `m >= 2` the projections are quadratures against the zonal kernels,
//! evaluated at the rule's own nodes. Writing `eta ^ xi = eta xi + <eta, xi>`,
//! a kernel `a + b (eta ^ xi)` acting on `f` splits into
//! `sum_i w_i (a + b s_i) f_i + eta sum_i w_i b (xi_i f_i)`, so each target
//! node costs two dense matrix products over all modes at once. For `m = 1`
//! the modes are `e^{-n theta e12} c` and are extracted by discrete Fourier
//! sums in the angle.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{Multivector, Vector1};
use crate::error::{Error, Result};
use crate::gegenbauer::KernelSide;
use crate::kernels::{harmonic_eigenvalue, ZonalTable};
use crate::scalar::Real;
use crate::sphere::SphereFunction;

/// A spectral mode: side and index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub side: KernelSide,
    pub k: usize,
}

impl Mode {
    pub fn plus(k: usize) -> Self {
        Mode { side: KernelSide::Plus, k }
    }

    pub fn minus(k: usize) -> Self {
        Mode { side: KernelSide::Minus, k }
    }

    /// Degree of the spherical harmonics the mode lives in.
    pub fn harmonic_degree(&self) -> usize {
        match self.side {
            KernelSide::Plus => self.k,
            KernelSide::Minus => self.k + 1,
        }
    }

    /// Eigenvalue of the spherical Dirac operator Gamma.
    pub fn gamma_eigenvalue(&self, m: usize) -> i64 {
        match self.side {
            KernelSide::Plus => -(self.k as i64),
            KernelSide::Minus => (self.k + m) as i64,
        }
    }

    /// Eigenvalue of the spherical Laplacian, `-n (n + m - 1)`.
    pub fn laplacian_eigenvalue(&self, m: usize) -> f64 {
        -harmonic_eigenvalue::<f64>(m, self.harmonic_degree())
    }

    /// Power of `|x|` carried by the monogenic extension: `k` or `-(k + m)`.
    pub fn radial_power(&self, m: usize) -> i64 {
        match self.side {
            KernelSide::Plus => self.k as i64,
            KernelSide::Minus => -((self.k + m) as i64),
        }
    }

    /// Log of the heat multiplier at time `t`: `-t n (n + m - 1) / 2`.
    pub fn heat_log_multiplier(&self, m: usize, t: f64) -> f64 {
        t * self.laplacian_eigenvalue(m) / 2.0
    }

    /// Signed circle frequency for `m = 1`: the mode is `e^{-n theta e12} c`
    /// with `n = k` for `p_k` (powers of `x1 - x2 e12`) and `n = -(k + 1)`
    /// for `q_k`. Minus the Gamma-eigenvalue.
    fn circle_frequency(&self) -> i64 {
        -self.gamma_eigenvalue(1)
    }
}

/// All modes of harmonic degree at most `band_limit`, ordered
/// `p_0, ..., p_K, q_0, ..., q_{K-1}`.
pub fn band_modes(band_limit: usize) -> Vec<Mode> {
    (0..=band_limit)
        .map(Mode::plus)
        .chain((0..band_limit).map(Mode::minus))
        .collect()
}

/// Checks that the rule integrates products of two harmonic-degree-`n`
/// functions with one extra degree of margin.
fn require_exactness<T: Real>(f: &SphereFunction<T>, band_limit: usize) -> Result<()> {
    let required = 2 * band_limit + 2;
    let available = f.rule().exactness_degree();
    if available < required {
        return Err(Error::InsufficientExactness { required, available });
    }
    Ok(())
}

fn to_f64_pair<T: Real>(c: Complex<T>) -> (f64, f64) {
    (c.re.to_f64_lossy(), c.im.to_f64_lossy())
}

fn mv_from_f64<T: Real>(dim: usize, row: &[f64]) -> Multivector<T> {
    let coeffs = row
        .chunks_exact(2)
        .map(|c| Complex::new(T::lit(c[0]), T::lit(c[1])))
        .collect();
    Multivector::from_coeffs(dim, coeffs).expect("consistent blade count")
}

/// Projects every function in `fs` (all on one rule) onto every mode in
/// `modes`; returns `out[f][mode]`.
///
/// Arithmetic runs in `f64` regardless of `T`.
pub fn project_modes<T: Real>(fs: &[SphereFunction<T>], modes: &[Mode]) -> Result<Vec<Vec<SphereFunction<T>>>> {
    let Some(first) = fs.first() else {
        return Ok(Vec::new());
    };
    if fs.iter().any(|f| !f.same_rule(first)) {
        return Err(Error::RuleMismatch);
    }
    if first.m() == 1 {
        return Ok(fs.iter().map(|f| circle_modes(f, modes)).collect());
    }
    zonal_modes(fs, modes)
}

fn zonal_modes<T: Real>(fs: &[SphereFunction<T>], modes: &[Mode]) -> Result<Vec<Vec<SphereFunction<T>>>> {
    let rule = fs[0].rule().clone();
    let m = rule.m();
    let dim = m + 1;
    let nb = 1usize << dim;
    let width = 2 * nb;
    let n = rule.len();
    let nf = fs.len();
    let nm = modes.len();
    let max_k = modes.iter().map(|md| md.k).max().unwrap_or(0);

    let nodes: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|x| x.components().iter().map(|c| c.to_f64_lossy()).collect())
        .collect();
    let weights: Vec<f64> = rule.weights().iter().map(|w| w.to_f64_lossy()).collect();

    // Weighted samples `w_i f_i` and `w_i xi_i f_i`, one block of columns per function.
    let mut fw = DMatrix::<f64>::zeros(n, width * nf);
    let mut gw = DMatrix::<f64>::zeros(n, width * nf);
    for (fi, f) in fs.iter().enumerate() {
        for (i, v) in f.values().iter().enumerate() {
            let xv = &Multivector::vector(&rule.nodes()[i]) * v;
            for b in 0..nb {
                let (re, im) = to_f64_pair(v.coeff(b));
                fw[(i, fi * width + 2 * b)] = weights[i] * re;
                fw[(i, fi * width + 2 * b + 1)] = weights[i] * im;
                let (re, im) = to_f64_pair(xv.coeff(b));
                gw[(i, fi * width + 2 * b)] = weights[i] * re;
                gw[(i, fi * width + 2 * b + 1)] = weights[i] * im;
            }
        }
    }

    let rows: Vec<Vec<Vec<Multivector<T>>>> = (0..n)
        .into_par_iter()
        .map(|a| -> Result<Vec<Vec<Multivector<T>>>> {
            let eta = &nodes[a];
            let mut table = ZonalTable::<f64>::new(m, max_k)?;
            let mut alpha = DMatrix::<f64>::zeros(nm, n);
            let mut beta = DMatrix::<f64>::zeros(nm, n);
            for (i, xi) in nodes.iter().enumerate() {
                let s: f64 = eta.iter().zip(xi).map(|(p, q)| p * q).sum();
                table.update(s);
                for (j, md) in modes.iter().enumerate() {
                    let parts = match md.side {
                        KernelSide::Plus => table.plus(md.k),
                        KernelSide::Minus => table.minus(md.k),
                    };
                    alpha[(j, i)] = parts.scalar + parts.wedge * s;
                    beta[(j, i)] = parts.wedge;
                }
            }
            let a_mat = &alpha * &fw;
            let b_mat = &beta * &gw;
            let eta_mv = Multivector::<T>::vector(&rule.nodes()[a]);
            let mut out = Vec::with_capacity(nf);
            for fi in 0..nf {
                let mut per_mode = Vec::with_capacity(nm);
                for j in 0..nm {
                    let a_row: Vec<f64> = (0..width).map(|c| a_mat[(j, fi * width + c)]).collect();
                    let b_row: Vec<f64> = (0..width).map(|c| b_mat[(j, fi * width + c)]).collect();
                    let mut v = mv_from_f64::<T>(dim, &a_row);
                    v += &(&eta_mv * &mv_from_f64::<T>(dim, &b_row));
                    per_mode.push(v);
                }
                out.push(per_mode);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result: Vec<Vec<Vec<Multivector<T>>>> = vec![vec![Vec::with_capacity(n); nm]; nf];
    for row in rows {
        for (fi, per_mode) in row.into_iter().enumerate() {
            for (j, v) in per_mode.into_iter().enumerate() {
                result[fi][j].push(v);
            }
        }
    }
    result
        .into_iter()
        .map(|per_f| {
            per_f
                .into_iter()
                .map(|vals| SphereFunction::new(rule.clone(), vals))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// `e^{phi e12} v` for the left action of the unit bivector of the circle.
fn rotate_e12<T: Real>(v: &Multivector<T>, phi: T) -> Multivector<T> {
    let e12 = Multivector::<T>::basis_blade(2, 0b11);
    let mut out = v.scale_real(phi.cos());
    out.axpy_real(phi.sin(), &(&e12 * v));
    out
}

fn node_angle<T: Real>(x: &Vector1<T>) -> T {
    let c = x.components();
    c[1].atan2(c[0])
}

fn circle_modes<T: Real>(f: &SphereFunction<T>, modes: &[Mode]) -> Vec<SphereFunction<T>> {
    let rule = f.rule().clone();
    let angles: Vec<T> = rule.nodes().iter().map(node_angle).collect();
    modes
        .iter()
        .map(|md| {
            let nfreq = T::from_i64(md.circle_frequency()).expect("small frequency");
            let mut c = Multivector::zero(2);
            for ((v, &w), &th) in f.values().iter().zip(rule.weights()).zip(&angles) {
                c.axpy_real(w, &rotate_e12(v, nfreq * th));
            }
            let values = angles.iter().map(|&th| rotate_e12(&c, -nfreq * th)).collect();
            SphereFunction::new(rule.clone(), values).expect("same rule")
        })
        .collect()
}

/// Evaluates `sum_mode c_mode * (projection of g_mode onto mode)` at an
/// arbitrary unit direction by reproducing-kernel quadrature. Each `g_mode`
/// must already lie in its mode; the result is then exact up to quadrature.
pub(crate) fn reproduce_at<T: Real>(
    parts: &[(Mode, T, &SphereFunction<T>)],
    eta: &Vector1<T>,
) -> Result<Multivector<T>> {
    let Some((_, _, first)) = parts.first() else {
        return Err(Error::param("parts", "nothing to evaluate"));
    };
    let rule = first.rule().clone();
    let m = rule.m();
    let dim = m + 1;
    if eta.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: eta.dim(),
        });
    }
    if m == 1 {
        let th = node_angle(eta);
        let angles: Vec<T> = rule.nodes().iter().map(node_angle).collect();
        let mut out = Multivector::zero(2);
        for (md, c, g) in parts {
            let nfreq = T::from_i64(md.circle_frequency()).expect("small frequency");
            for ((v, &w), &phi) in g.values().iter().zip(rule.weights()).zip(&angles) {
                out.axpy_real(w * *c, &rotate_e12(v, nfreq * (phi - th)));
            }
        }
        return Ok(out);
    }
    let max_k = parts.iter().map(|(md, _, _)| md.k).max().unwrap_or(0);
    let mut table = ZonalTable::<T>::new(m, max_k)?;
    let mut acc_a = Multivector::zero(dim);
    let mut acc_b = Multivector::zero(dim);
    for (i, (xi, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let s = eta.dot(xi);
        table.update(s);
        let mut local_b = Multivector::zero(dim);
        for (md, c, g) in parts {
            let z = match md.side {
                KernelSide::Plus => table.plus(md.k),
                KernelSide::Minus => table.minus(md.k),
            };
            let v = &g.values()[i];
            acc_a.axpy_real(w * *c * (z.scalar + z.wedge * s), v);
            local_b.axpy_real(w * *c * z.wedge, v);
        }
        acc_b += &(&Multivector::vector(xi) * &local_b);
    }
    Ok(&acc_a + &(&Multivector::vector(eta) * &acc_b))
}

/// `P_k f` at the rule's nodes.
pub fn project_p<T: Real>(f: &SphereFunction<T>, k: usize) -> Result<SphereFunction<T>> {
    require_exactness(f, k)?;
    Ok(project_modes(std::slice::from_ref(f), &[Mode::plus(k)])?.remove(0).remove(0))
}

/// `Q_k f` at the rule's nodes (Gamma-eigenvalue `k + m`, kernel `C^-_{m+1,k}`).
pub fn project_q<T: Real>(f: &SphereFunction<T>, k: usize) -> Result<SphereFunction<T>> {
    require_exactness(f, k + 1)?;
    Ok(project_modes(std::slice::from_ref(f), &[Mode::minus(k)])?.remove(0).remove(0))
}

/// Truncated spectral decomposition with band limit `K`.
#[derive(Clone)]
pub struct SpectralDecomposition<T> {
    m: usize,
    max_degree: usize,
    p: Vec<SphereFunction<T>>,
    q: Vec<SphereFunction<T>>,
    residual_norm: T,
}

impl<T: Real> std::fmt::Debug for SpectralDecomposition<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralDecomposition")
            .field("m", &self.m)
            .field("max_degree", &self.max_degree)
            .field("residual_norm", &self.residual_norm)
            .finish()
    }
}

/// Per-mode norm record for exports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeNorm {
    pub side: KernelSide,
    pub k: usize,
    pub gamma_eigenvalue: i64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub m: usize,
    pub max_degree: usize,
    pub residual_norm: f64,
    pub modes: Vec<ModeNorm>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// Assembles a decomposition from components; `p` must hold `K + 1`
    /// functions and `q` exactly `K`, all on one rule.
    pub fn from_parts(p: Vec<SphereFunction<T>>, q: Vec<SphereFunction<T>>, residual_norm: T) -> Result<Self> {
        let Some(first) = p.first() else {
            return Err(Error::param("p", "need at least p_0"));
        };
        let max_degree = p.len() - 1;
        if q.len() != max_degree {
            return Err(Error::DimensionMismatch {
                expected: max_degree,
                found: q.len(),
            });
        }
        if p.iter().chain(&q).any(|g| !g.same_rule(first)) {
            return Err(Error::RuleMismatch);
        }
        Ok(SpectralDecomposition {
            m: first.m(),
            max_degree,
            p,
            q,
            residual_norm,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn residual_norm(&self) -> T {
        self.residual_norm
    }

    pub fn p(&self) -> &[SphereFunction<T>] {
        &self.p
    }

    pub fn q(&self) -> &[SphereFunction<T>] {
        &self.q
    }

    pub fn modes(&self) -> Vec<Mode> {
        band_modes(self.max_degree)
    }

    pub fn component(&self, mode: Mode) -> Option<&SphereFunction<T>> {
        match mode.side {
            KernelSide::Plus => self.p.get(mode.k),
            KernelSide::Minus => self.q.get(mode.k),
        }
    }

    /// `(mode, component)` pairs in [`band_modes`] order.
    pub fn components(&self) -> impl Iterator<Item = (Mode, &SphereFunction<T>)> {
        self.p
            .iter()
            .enumerate()
            .map(|(k, g)| (Mode::plus(k), g))
            .chain(self.q.iter().enumerate().map(|(k, g)| (Mode::minus(k), g)))
    }

    /// Applies `c(mode)` to every component.
    pub fn map_modes(&self, c: impl Fn(Mode) -> T) -> Self {
        SpectralDecomposition {
            m: self.m,
            max_degree: self.max_degree,
            p: self.p.iter().enumerate().map(|(k, g)| g.scale_real(c(Mode::plus(k)))).collect(),
            q: self.q.iter().enumerate().map(|(k, g)| g.scale_real(c(Mode::minus(k)))).collect(),
            residual_norm: self.residual_norm,
        }
    }

    /// `sum_k p_k + q_k`.
    pub fn reconstruct(&self) -> SphereFunction<T> {
        self.weighted_sum(|_| T::one())
    }

    pub fn weighted_sum(&self, c: impl Fn(Mode) -> T) -> SphereFunction<T> {
        let mut acc = SphereFunction::zero(self.p[0].rule().clone());
        for (mode, g) in self.components() {
            acc.axpy(Complex::new(c(mode), T::zero()), g).expect("same rule");
        }
        acc
    }

    /// Gamma applied spectrally.
    pub fn gamma_action(&self) -> SphereFunction<T> {
        let m = self.m;
        self.weighted_sum(|md| T::from_i64(md.gamma_eigenvalue(m)).expect("small eigenvalue"))
    }

    /// Spherical Laplacian applied spectrally.
    pub fn laplacian_action(&self) -> SphereFunction<T> {
        let m = self.m;
        self.weighted_sum(|md| T::lit(md.laplacian_eigenvalue(m)))
    }

    pub fn mode_norms(&self) -> Vec<ModeNorm> {
        self.components()
            .map(|(mode, g)| ModeNorm {
                side: mode.side,
                k: mode.k,
                gamma_eigenvalue: mode.gamma_eigenvalue(self.m),
                norm: g.norm().to_f64_lossy(),
            })
            .collect()
    }

    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            m: self.m,
            max_degree: self.max_degree,
            residual_norm: self.residual_norm.to_f64_lossy(),
            modes: self.mode_norms(),
        }
    }
}

/// Decomposes several functions on one rule.
pub fn decompose_many<T: Real>(fs: &[SphereFunction<T>], band_limit: usize) -> Result<Vec<SpectralDecomposition<T>>> {
    let Some(first) = fs.first() else {
        return Ok(Vec::new());
    };
    require_exactness(first, band_limit)?;
    let modes = band_modes(band_limit);
    let projected = project_modes(fs, &modes)?;
    fs.iter()
        .zip(projected)
        .map(|(f, mut comps)| {
            let q = comps.split_off(band_limit + 1);
            let p = comps;
            let mut dec = SpectralDecomposition::from_parts(p, q, T::zero())?;
            dec.residual_norm = f.try_sub(&dec.reconstruct())?.norm();
            Ok(dec)
        })
        .collect()
}

/// Decomposition into `p_0..=p_K`, `q_0..q_{K-1}`; needs exactness `>= 2K + 2`.
pub fn decompose<T: Real>(f: &SphereFunction<T>, band_limit: usize) -> Result<SpectralDecomposition<T>> {
    Ok(decompose_many(std::slice::from_ref(f), band_limit)?.remove(0))
}

/// Circle decomposition by discrete Fourier sums; only for `m = 1`.
pub fn fourier_circle<T: Real>(f: &SphereFunction<T>, band_limit: usize) -> Result<SpectralDecomposition<T>> {
    if f.m() != 1 {
        return Err(Error::param("m", format!("the circle path needs m = 1, got {}", f.m())));
    }
    decompose(f, band_limit)
}

/// Heat semigroup as the multiplier `e^{-t n (n + m - 1) / 2}` per mode.
pub fn heat_flow<T: Real>(dec: &SpectralDecomposition<T>, t: T) -> Result<SpectralDecomposition<T>> {
    if !(t >= T::zero()) {
        return Err(Error::param("t", format!("heat flow needs t >= 0, got {t}")));
    }
    let m = dec.m;
    let tf = t.to_f64_lossy();
    Ok(dec.map_modes(|md| T::lit(md.heat_log_multiplier(m, tf).exp())))
}
