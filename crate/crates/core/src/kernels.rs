//! Zonal monogenic kernels and the heat kernel on `S^m` built from them.
//!
//! For `m >= 2` the reproducing kernels of the inner (`C^+`) and outer
//! (`C^-`) spherical monogenics are scalar-plus-bivector valued:
//!
//! ```text
//! C^+_{m+1,k}(eta, xi)   = 1/(1-m) [ -(m+k-1) C_k^{(m-1)/2}(s) + (1-m) C_{k-1}^{(m+1)/2}(s) eta^xi ]
//! C^-_{m+1,k-1}(eta, xi) = 1/(m-1) [  k       C_k^{(m-1)/2}(s) + (1-m) C_{k-1}^{(m+1)/2}(s) eta^xi ]
//! ```
//!
//! with `s = <eta, xi>` and `C_{-1} = 0`. They reproduce against the unit-mass
//! surface measure. At `m = 1` both prefactors are singular; the circle is
//! handled by Fourier modes in [`crate::spectral`].

use serde::Serialize;

use crate::clifford::{wedge_vectors, Multivector, Vector1};
use crate::error::{Error, Result};
use crate::gegenbauer::{gegenbauer_sequence_into, kernel_bound_log, KernelSide};
use crate::scalar::Real;

/// Tolerance on `|eta| = 1` for kernel arguments.
pub const UNIT_TOL: f64 = 1e-10;
/// Default target for the truncation tail estimate.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default radial window `[r_min, r_max]` the tail estimate is valid on.
pub const DEFAULT_WINDOW: (f64, f64) = (0.2, 5.0);
/// Largest harmonic degree the automatic truncation will consider.
pub const MAX_TRUNCATION_DEGREE: usize = 4096;

/// `n (n + m - 1)`: minus the eigenvalue of the spherical Laplacian on degree-`n` harmonics.
#[inline]
pub fn harmonic_eigenvalue<T: Real>(m: usize, n: usize) -> T {
    T::from_usize_lossy(n) * T::from_usize_lossy(n + m - 1)
}

/// A kernel value `scalar + wedge * (eta ^ xi)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ZonalParts<T> {
    pub scalar: T,
    pub wedge: T,
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        Err(Error::param(
            "m",
            "zonal kernel formulas are singular for m = 1; use the circle (Fourier) path",
        ))
    } else {
        Ok(())
    }
}

/// Coefficients of `C^+_{m+1,k}` and `C^-_{m+1,k}` for every `k = 0..=max_k`
/// at one value of `s`, sharing the Gegenbauer recurrences.
///
/// `plus[k]` belongs to harmonic degree `k`; `minus[k]` is `C^-_{m+1,k}`,
/// which belongs to harmonic degree `k + 1`.
pub struct ZonalTable<T> {
    m: usize,
    low: Vec<T>,
    high: Vec<T>,
}

impl<T: Real> ZonalTable<T> {
    pub fn new(m: usize, max_k: usize) -> Result<Self> {
        check_m(m)?;
        Ok(ZonalTable {
            m,
            low: vec![T::zero(); max_k + 2],
            high: vec![T::zero(); max_k + 1],
        })
    }

    pub fn max_k(&self) -> usize {
        self.high.len() - 1
    }

    /// Recomputes the Gegenbauer values for a new `s`.
    #[inline]
    pub fn update(&mut self, s: T) {
        let half = T::lit(0.5);
        let m = T::from_usize_lossy(self.m);
        gegenbauer_sequence_into(&mut self.low, (m - T::one()) * half, s);
        gegenbauer_sequence_into(&mut self.high, (m + T::one()) * half, s);
    }

    /// `C^+_{m+1,k}` at the current `s`.
    #[inline]
    pub fn plus(&self, k: usize) -> ZonalParts<T> {
        let m = T::from_usize_lossy(self.m);
        let kf = T::from_usize_lossy(k);
        let pref = T::one() / (T::one() - m);
        let prev = if k == 0 { T::zero() } else { self.high[k - 1] };
        ZonalParts {
            scalar: pref * (-(m + kf - T::one()) * self.low[k]),
            wedge: pref * (T::one() - m) * prev,
        }
    }

    /// `C^-_{m+1,j}` at the current `s` (harmonic degree `j + 1`).
    #[inline]
    pub fn minus(&self, j: usize) -> ZonalParts<T> {
        let m = T::from_usize_lossy(self.m);
        let k = j + 1;
        let pref = T::one() / (m - T::one());
        ZonalParts {
            scalar: pref * T::from_usize_lossy(k) * self.low[k],
            wedge: pref * (T::one() - m) * self.high[k - 1],
        }
    }
}

fn check_pair<T: Real>(m: usize, eta: &Vector1<T>, xi: &Vector1<T>) -> Result<()> {
    check_m(m)?;
    for v in [eta, xi] {
        if v.dim() != m + 1 {
            return Err(Error::DimensionMismatch {
                expected: m + 1,
                found: v.dim(),
            });
        }
    }
    eta.require_unit("eta", T::lit(UNIT_TOL))?;
    xi.require_unit("xi", T::lit(UNIT_TOL))
}

fn assemble<T: Real>(parts: ZonalParts<T>, eta: &Vector1<T>, xi: &Vector1<T>) -> Result<Multivector<T>> {
    let mut out = wedge_vectors(eta, xi)?.scale_real(parts.wedge);
    let c0 = out.coeff(0);
    out.set_coeff(0, c0 + parts.scalar);
    Ok(out)
}

/// Zonal kernel `C^+_{m+1,k}(eta, xi)` of the degree-`k` inner spherical monogenics.
pub fn czplus<T: Real>(m: usize, k: usize, eta: &Vector1<T>, xi: &Vector1<T>) -> Result<Multivector<T>> {
    check_pair(m, eta, xi)?;
    let mut table = ZonalTable::new(m, k)?;
    table.update(eta.dot(xi));
    assemble(table.plus(k), eta, xi)
}

/// Zonal kernel `C^-_{m+1,j}(eta, xi)`; `j = -1` gives zero.
pub fn czminus<T: Real>(m: usize, j: i64, eta: &Vector1<T>, xi: &Vector1<T>) -> Result<Multivector<T>> {
    check_pair(m, eta, xi)?;
    if j < -1 {
        return Err(Error::param("k_minus_1", format!("must be >= -1, got {j}")));
    }
    if j == -1 {
        return Ok(Multivector::zero(m + 1));
    }
    let j = j as usize;
    let mut table = ZonalTable::new(m, j)?;
    table.update(eta.dot(xi));
    assemble(table.minus(j), eta, xi)
}

/// Truncation of the heat-kernel series with a computable tail estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelTruncation {
    pub m: usize,
    pub t: f64,
    /// Highest retained harmonic degree.
    pub max_degree: usize,
    /// Log of the bound on the dropped terms, valid for radii in the window.
    pub tail_bound_log: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub tolerance: f64,
}

/// Log of the bound on the degree-`k` term of the extended heat kernel over the window.
pub fn truncation_term_log(m: usize, t: f64, k: usize, r_min: f64, r_max: f64) -> Result<f64> {
    let radial = (k as f64 * r_max.ln()).max(-((k + m - 1) as f64) * r_min.ln());
    Ok(-t * harmonic_eigenvalue::<f64>(m, k) / 2.0 + kernel_bound_log(k, m, KernelSide::Plus)? + radial)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

impl KernelTruncation {
    fn validate(m: usize, t: f64, r_min: f64, r_max: f64) -> Result<()> {
        check_m(m)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("must be positive, got {t}")));
        }
        if !(r_min > 0.0 && r_min <= 1.0 && r_max >= 1.0 && r_max.is_finite()) {
            return Err(Error::param(
                "radial_window",
                format!("need 0 < r_min <= 1 <= r_max, got [{r_min}, {r_max}]"),
            ));
        }
        Ok(())
    }

    /// Per-degree log bounds up to the point where the series has visibly
    /// converged, paired with their suffix sums (`suffix[k]` bounds degrees `>= k`).
    fn tail_table(m: usize, t: f64, r_min: f64, r_max: f64, floor_log: f64) -> Result<Vec<f64>> {
        let mut terms = Vec::new();
        let mut k = 0;
        loop {
            let term = truncation_term_log(m, t, k, r_min, r_max)?;
            let decreasing = terms.last().map_or(false, |&prev: &f64| term < prev);
            terms.push(term);
            if decreasing && term < floor_log - 60.0 {
                break;
            }
            k += 1;
            if k > MAX_TRUNCATION_DEGREE + 1 {
                break;
            }
        }
        let mut suffix = vec![f64::NEG_INFINITY; terms.len() + 1];
        for k in (0..terms.len()).rev() {
            suffix[k] = log_add(terms[k], suffix[k + 1]);
        }
        Ok(suffix)
    }

    /// Smallest degree whose tail estimate is below `tolerance` on the window.
    pub fn select(m: usize, t: f64, window: (f64, f64), tolerance: f64) -> Result<Self> {
        let (r_min, r_max) = window;
        Self::validate(m, t, r_min, r_max)?;
        if !(tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        let target = tolerance.ln();
        let suffix = Self::tail_table(m, t, r_min, r_max, target)?;
        for k in 0..suffix.len().saturating_sub(1) {
            if k > MAX_TRUNCATION_DEGREE {
                break;
            }
            if suffix[k + 1] <= target {
                return Ok(KernelTruncation {
                    m,
                    t,
                    max_degree: k,
                    tail_bound_log: suffix[k + 1],
                    r_min,
                    r_max,
                    tolerance,
                });
            }
        }
        Err(Error::TruncationUnreachable {
            tolerance,
            max_degree: MAX_TRUNCATION_DEGREE,
        })
    }

    pub fn with_defaults(m: usize, t: f64) -> Result<Self> {
        Self::select(m, t, DEFAULT_WINDOW, DEFAULT_TOLERANCE)
    }

    /// A fixed truncation degree with its tail estimate.
    pub fn fixed(m: usize, t: f64, window: (f64, f64), max_degree: usize) -> Result<Self> {
        let (r_min, r_max) = window;
        Self::validate(m, t, r_min, r_max)?;
        let mut tail = f64::NEG_INFINITY;
        let mut k = max_degree + 1;
        let mut prev = f64::INFINITY;
        loop {
            let term = truncation_term_log(m, t, k, r_min, r_max)?;
            tail = log_add(tail, term);
            if term < prev && term < tail - 60.0 {
                break;
            }
            prev = term;
            k += 1;
            if k > MAX_TRUNCATION_DEGREE + max_degree {
                break;
            }
        }
        Ok(KernelTruncation {
            m,
            t,
            max_degree,
            tail_bound_log: tail,
            r_min,
            r_max,
            tolerance: tail.exp(),
        })
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    /// Heat multiplier `exp(-t k (k + m - 1) / 2)` of harmonic degree `k`.
    pub fn multiplier(&self, k: usize) -> f64 {
        (-self.t * harmonic_eigenvalue::<f64>(self.m, k) / 2.0).exp()
    }
}

fn check_t<T: Real>(t: T, trunc: &KernelTruncation, m: usize) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::param("t", format!("must be positive, got {t}")));
    }
    if trunc.m != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: trunc.m,
        });
    }
    Ok(())
}

/// Heat kernel `K_t(eta, xi) = sum_k e^{-t k(k+m-1)/2} (C^+_k + C^-_{k-1})` truncated at `trunc.max_degree`.
pub fn heat_kernel<T: Real>(
    m: usize,
    t: T,
    trunc: &KernelTruncation,
    eta: &Vector1<T>,
    xi: &Vector1<T>,
) -> Result<Multivector<T>> {
    check_pair(m, eta, xi)?;
    check_t(t, trunc, m)?;
    let kmax = trunc.max_degree;
    let mut table = ZonalTable::new(m, kmax)?;
    table.update(eta.dot(xi));
    let mut total = ZonalParts::default();
    for k in 0..=kmax {
        let w = (-t * harmonic_eigenvalue::<T>(m, k) / T::lit(2.0)).exp();
        let mut parts = table.plus(k);
        if k >= 1 {
            let minus = table.minus(k - 1);
            parts.scalar = parts.scalar + minus.scalar;
            parts.wedge = parts.wedge + minus.wedge;
        }
        total.scalar = total.scalar + w * parts.scalar;
        total.wedge = total.wedge + w * parts.wedge;
    }
    assemble(total, eta, xi)
}

/// Monogenic extension of the heat kernel in its first argument:
/// `sum_k e^{-t k(k+m-1)/2} (|x|^k C^+_k(x/|x|, xi) + |x|^{-(k+m-1)} C^-_{k-1}(x/|x|, xi))`.
pub fn ck_heat_kernel<T: Real>(
    m: usize,
    t: T,
    trunc: &KernelTruncation,
    x: &Vector1<T>,
    xi: &Vector1<T>,
) -> Result<Multivector<T>> {
    let (eta, r) = x.polar()?;
    check_pair(m, &eta, xi)?;
    check_t(t, trunc, m)?;
    let rf = r.to_f64_lossy();
    if !trunc.contains_radius(rf) {
        return Err(Error::OutsideWindow {
            radius: rf,
            r_min: trunc.r_min,
            r_max: trunc.r_max,
        });
    }
    let kmax = trunc.max_degree;
    let mut table = ZonalTable::new(m, kmax)?;
    table.update(eta.dot(xi));
    let mut total = ZonalParts::default();
    let ln_r = r.ln();
    for k in 0..=kmax {
        let log_w = -t * harmonic_eigenvalue::<T>(m, k) / T::lit(2.0);
        let inner = (log_w + T::from_usize_lossy(k) * ln_r).exp();
        let plus = table.plus(k);
        total.scalar = total.scalar + inner * plus.scalar;
        total.wedge = total.wedge + inner * plus.wedge;
        if k >= 1 {
            let outer = (log_w - T::from_usize_lossy(k + m - 1) * ln_r).exp();
            let minus = table.minus(k - 1);
            total.scalar = total.scalar + outer * minus.scalar;
            total.wedge = total.wedge + outer * minus.wedge;
        }
    }
    assemble(total, &eta, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::numerical_dirac_residual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Mv = Multivector<f64>;
    type V = Vector1<f64>;

    fn unit(rng: &mut ChaCha8Rng, dim: usize) -> V {
        loop {
            let v = V::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
            if v.norm() > 0.1 {
                return v.polar().unwrap().0;
            }
        }
    }

    fn e12(dim: usize) -> Mv {
        Mv::blade(dim, &[1, 2]).unwrap()
    }

    #[test]
    fn plus_kernel_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 2..=4 {
            let (a, b) = (unit(&mut rng, m + 1), unit(&mut rng, m + 1));
            let c = czplus(m, 0, &a, &b).unwrap();
            assert!((&c - &Mv::one(m + 1)).max_abs() < 1e-15);
        }
        let e1 = V::basis(3, 1);
        let e2 = V::basis(3, 2);
        let same = czplus(2, 1, &e1, &e1).unwrap();
        assert!((&same - &Mv::real_scalar(3, 2.0)).max_abs() < 1e-15);
        let cross = czplus(2, 1, &e1, &e2).unwrap();
        assert!((&cross - &e12(3)).max_abs() < 1e-15);
    }

    #[test]
    fn minus_kernel_examples() {
        let e1 = V::basis(3, 1);
        let e2 = V::basis(3, 2);
        assert_eq!(czminus(2, -1, &e1, &e2).unwrap(), Mv::zero(3));
        let same = czminus(2, 0, &e1, &e1).unwrap();
        assert!((&same - &Mv::one(3)).max_abs() < 1e-15);
        let cross = czminus(2, 0, &e1, &e2).unwrap();
        assert!((&cross + &e12(3)).max_abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 2..=4 {
            let (a, b) = (unit(&mut rng, m + 1), unit(&mut rng, m + 1));
            let got = czminus(m, 0, &a, &b).unwrap();
            let want = &Mv::real_scalar(m + 1, a.dot(&b)) - &wedge_vectors(&a, &b).unwrap();
            assert!((&got - &want).max_abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_argument_errors() {
        let e1 = V::basis(2, 1);
        assert!(czplus(1, 1, &e1, &e1).is_err());
        let e1 = V::basis(3, 1);
        let long = e1.scale(1.5);
        assert!(matches!(czplus(2, 1, &e1, &long), Err(Error::NotUnit { .. })));
        assert!(czminus(2, -2, &e1, &e1).is_err());
        assert!(czplus(3, 1, &e1, &e1).is_err());
    }

    #[test]
    fn harmonic_kernel_has_no_bivector_part() {
        // C^+_k + C^-_{k-1} is the scalar reproducing kernel of degree-k harmonics.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 2..=4 {
            for k in 1..8 {
                let (a, b) = (unit(&mut rng, m + 1), unit(&mut rng, m + 1));
                let sum = &czplus(m, k, &a, &b).unwrap() + &czminus(m, k as i64 - 1, &a, &b).unwrap();
                assert!(sum.grade_part(2).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_selection() {
        let tr = KernelTruncation::with_defaults(2, 1.0).unwrap();
        assert!(tr.tail_bound_log <= DEFAULT_TOLERANCE.ln());
        let prev = KernelTruncation::fixed(2, 1.0, DEFAULT_WINDOW, tr.max_degree - 1).unwrap();
        assert!(prev.tail_bound_log > DEFAULT_TOLERANCE.ln());
        assert!((prev.tail_bound_log - KernelTruncation::fixed(2, 1.0, DEFAULT_WINDOW, tr.max_degree - 1).unwrap().tail_bound_log).abs() < 1e-12);
        let again = KernelTruncation::fixed(2, 1.0, DEFAULT_WINDOW, tr.max_degree).unwrap();
        assert!((again.tail_bound_log - tr.tail_bound_log).abs() < 1e-9);
        // Smaller t needs more degrees.
        let slow = KernelTruncation::with_defaults(2, 0.25).unwrap();
        assert!(slow.max_degree > tr.max_degree);
        assert!(KernelTruncation::with_defaults(1, 1.0).is_err());
        assert!(KernelTruncation::with_defaults(2, 0.0).is_err());
        assert!(KernelTruncation::select(2, 1.0, (2.0, 5.0), 1e-12).is_err());
    }

    #[test]
    fn heat_kernel_large_time_limit() {
        let tr = KernelTruncation::with_defaults(2, 50.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let (a, b) = (unit(&mut rng, 3), unit(&mut rng, 3));
            let k = heat_kernel(2, 50.0, &tr, &a, &b).unwrap();
            assert!((&k - &Mv::one(3)).max_abs() <= 1e-10);
        }
        assert!(heat_kernel(2, -1.0, &tr, &V::basis(3, 1), &V::basis(3, 1)).is_err());
    }

    #[test]
    fn heat_kernel_is_zonal_and_real_scalar() {
        let tr = KernelTruncation::with_defaults(3, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, b) = (unit(&mut rng, 4), unit(&mut rng, 4));
        let k1 = heat_kernel(3, 0.5, &tr, &a, &b).unwrap();
        // Rotate both arguments by a random orthogonal map (Gram-Schmidt).
        let mut basis: Vec<V> = Vec::new();
        while basis.len() < 4 {
            let mut v = unit(&mut rng, 4);
            for u in &basis {
                v = v.sub(&u.scale(u.dot(&v)));
            }
            if v.norm() > 1e-3 {
                basis.push(v.polar().unwrap().0);
            }
        }
        let rot = |x: &V| {
            V::new((0..4).map(|i| basis[i].dot(x)).collect())
        };
        let k2 = heat_kernel(3, 0.5, &tr, &rot(&a), &rot(&b)).unwrap();
        assert!((k1.scalar_part() - k2.scalar_part()).norm() < 1e-12);
        assert!((k1.grade_part(2).norm() - k2.grade_part(2).norm()).abs() < 1e-12);
    }

    #[test]
    fn extended_kernel_restricts_to_heat_kernel() {
        let tr = KernelTruncation::with_defaults(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let (a, b) = (unit(&mut rng, 3), unit(&mut rng, 3));
            let k = heat_kernel(2, 1.0, &tr, &a, &b).unwrap();
            let kt = ck_heat_kernel(2, 1.0, &tr, &a, &b).unwrap();
            assert!((&k - &kt).max_abs() <= 1e-12);
        }
        let far = V::basis(3, 1).scale(10.0);
        assert!(matches!(
            ck_heat_kernel(2, 1.0, &tr, &far, &V::basis(3, 2)),
            Err(Error::OutsideWindow { .. })
        ));
        assert_eq!(ck_heat_kernel(2, 1.0, &tr, &V::zeros(3), &V::basis(3, 2)), Err(Error::Origin));
    }

    #[test]
    fn extended_kernel_is_monogenic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in 2..=3 {
            let tr = KernelTruncation::with_defaults(m, 1.0).unwrap();
            for _ in 0..20 {
                let xi = unit(&mut rng, m + 1);
                let x = unit(&mut rng, m + 1).scale(rng.random_range(0.5..2.0));
                let f = |y: &V| ck_heat_kernel(m, 1.0, &tr, y, &xi);
                assert!(numerical_dirac_residual(f, &x, 1e-4).unwrap() <= 1e-6);
            }
        }
    }

    #[test]
    fn degree_one_inner_term_scales_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (a, b) = (unit(&mut rng, 3), unit(&mut rng, 3));
        let term = |r: f64| czplus(2, 1, &a, &b).unwrap().scale_real(r);
        assert!((&term(2.0) - &term(1.0).scale_real(2.0)).max_abs() < 1e-15);
    }

    #[test]
    fn kernels_respect_factorial_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for m in 2..=3 {
            for _ in 0..100 {
                let (a, b) = (unit(&mut rng, m + 1), unit(&mut rng, m + 1));
                for k in 0..=20usize {
                    let bp = kernel_bound_log(k, m, KernelSide::Plus).unwrap().exp();
                    assert!(czplus(m, k, &a, &b).unwrap().max_abs() <= bp);
                    if k >= 1 {
                        let bm = kernel_bound_log(k, m, KernelSide::Minus).unwrap().exp();
                        assert!(czminus(m, k as i64 - 1, &a, &b).unwrap().max_abs() <= bm);
                    }
                }
            }
        }
    }
}
