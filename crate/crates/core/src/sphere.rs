//! Product quadrature on `S^m` with unit total mass, and sampled
//! Clifford-valued functions on it.
//!
//! For `m >= 2` the sphere is sliced as `xi = (s, sqrt(1 - s^2) zeta)` with
//! `zeta` on `S^{m-1}`; the surface measure becomes
//! `(1 - s^2)^{(m-2)/2} ds dsigma_{m-1}`, so each level uses Gauss-Gegenbauer
//! nodes for that weight. The innermost circle uses equispaced angles.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::clifford::{Multivector, Vector1};
use crate::error::{Error, Result};
use crate::polynomial::MvPolynomial;
use crate::scalar::Real;

/// Largest supported sphere dimension.
pub const MAX_SPHERE_DIM: usize = 4;
/// Largest supported exactness degree.
pub const MAX_QUADRATURE_DEGREE: usize = 40;

/// Gauss rule for the weight `(1 - s^2)^{lambda - 1/2}` on `[-1, 1]`
/// (Golub-Welsch). Weights are normalized to sum to one.
pub fn gauss_gegenbauer(n: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::param("n", "need at least one node"));
    }
    if !(lambda > -0.5) {
        return Err(Error::param("lambda", format!("must exceed -1/2, got {lambda}")));
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let fi = i as f64;
        let b = fi * (fi + 2.0 * lambda - 1.0) / (4.0 * (fi + lambda) * (fi + lambda - 1.0));
        let b = b.sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the exact rule is invariant under s -> -s.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let s = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-s, w);
        pairs[j] = (s, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(pairs.into_iter().map(|(s, w)| (s, w / total)).unzip())
}

/// Quadrature rule on `S^m` with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    m: usize,
    nodes: Vec<Vector1<T>>,
    weights: Vec<T>,
    exactness_degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[Vector1<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomials of total degree up to this value integrate exactly.
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    /// Sum of `w_i g(xi_i)` for a scalar integrand.
    pub fn integrate_scalar(&self, g: impl Fn(&Vector1<T>) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * g(x))
            .sum()
    }

    /// Writes `x_1, ..., x_{m+1}, weight` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.m + 1).map(|j| format!("x{j}")).collect();
        header.push("weight".into());
        wtr.write_record(&header).map_err(csv_err)?;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let mut row: Vec<String> = x
                .components()
                .iter()
                .map(|c| format!("{:.16e}", c.to_f64_lossy()))
                .collect();
            row.push(format!("{:.16e}", w.to_f64_lossy()));
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::Malformed(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Malformed(e.to_string())
}

/// Product rule on `S^m` exact for polynomials of total degree `<= degree`.
///
/// `m = 1` uses `degree + 1` equispaced angles. For `m >= 2` each level has
/// `ceil((degree + 1) / 2)` Gauss-Gegenbauer nodes.
pub fn build_quadrature<T: Real>(m: usize, degree: usize) -> Result<QuadratureRule<T>> {
    if m == 0 || m > MAX_SPHERE_DIM {
        return Err(Error::UnsupportedDimension(m));
    }
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::param(
            "degree",
            format!("at most {MAX_QUADRATURE_DEGREE} supported, got {degree}"),
        ));
    }
    let n_circle = degree + 1;
    let mut nodes: Vec<Vec<f64>> = (0..n_circle)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / n_circle as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    let mut weights = vec![1.0 / n_circle as f64; n_circle];
    let n_level = degree / 2 + 1;
    for level in 2..=m {
        let (s, w) = gauss_gegenbauer(n_level, (level as f64 - 1.0) / 2.0)?;
        let mut next_nodes = Vec::with_capacity(nodes.len() * n_level);
        let mut next_weights = Vec::with_capacity(nodes.len() * n_level);
        for (&si, &wi) in s.iter().zip(&w) {
            let c = (1.0 - si * si).max(0.0).sqrt();
            for (zeta, &wz) in nodes.iter().zip(&weights) {
                let mut v = Vec::with_capacity(level + 1);
                v.push(si);
                v.extend(zeta.iter().map(|z| c * z));
                next_nodes.push(v);
                next_weights.push(wi * wz);
            }
        }
        nodes = next_nodes;
        weights = next_weights;
    }
    let total: f64 = weights.iter().sum();
    Ok(QuadratureRule {
        m,
        nodes: nodes.iter().map(|v| Vector1::from_f64(v)).collect(),
        weights: weights.iter().map(|&w| T::lit(w / total)).collect(),
        exactness_degree: degree,
    })
}

/// Samples of a `C_{m+1}`-valued function at the nodes of a shared rule.
#[derive(Clone)]
pub struct SphereFunction<T> {
    rule: Arc<QuadratureRule<T>>,
    values: Vec<Multivector<T>>,
}

impl<T: Real> std::fmt::Debug for SphereFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereFunction")
            .field("m", &self.rule.m)
            .field("nodes", &self.rule.len())
            .field("norm", &self.norm())
            .finish()
    }
}

impl<T: Real> SphereFunction<T> {
    pub fn new(rule: Arc<QuadratureRule<T>>, values: Vec<Multivector<T>>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::DimensionMismatch {
                expected: rule.len(),
                found: values.len(),
            });
        }
        let dim = rule.m + 1;
        if let Some(v) = values.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        Ok(SphereFunction { rule, values })
    }

    pub fn zero(rule: Arc<QuadratureRule<T>>) -> Self {
        let dim = rule.m + 1;
        let values = vec![Multivector::zero(dim); rule.len()];
        SphereFunction { rule, values }
    }

    pub fn constant(rule: Arc<QuadratureRule<T>>, c: &Multivector<T>) -> Result<Self> {
        let values = vec![c.clone(); rule.len()];
        Self::new(rule, values)
    }

    pub fn from_fn(
        rule: Arc<QuadratureRule<T>>,
        f: impl Fn(&Vector1<T>) -> Result<Multivector<T>>,
    ) -> Result<Self> {
        let values = rule.nodes.iter().map(&f).collect::<Result<Vec<_>>>()?;
        Self::new(rule, values)
    }

    /// Restriction of a polynomial to the sphere.
    pub fn from_polynomial(rule: Arc<QuadratureRule<T>>, p: &MvPolynomial<T>) -> Result<Self> {
        Self::from_fn(rule, |x| p.evaluate(x))
    }

    pub fn rule(&self) -> &Arc<QuadratureRule<T>> {
        &self.rule
    }

    pub fn m(&self) -> usize {
        self.rule.m
    }

    pub fn values(&self) -> &[Multivector<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Multivector<T>> {
        self.values
    }

    pub fn same_rule(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.rule, &other.rule) || *self.rule == *other.rule
    }

    fn check_rule(&self, other: &Self) -> Result<()> {
        if self.same_rule(other) {
            Ok(())
        } else {
            Err(Error::RuleMismatch)
        }
    }

    /// Blade-wise `sum_i w_i f(xi_i)`.
    pub fn integrate(&self) -> Multivector<T> {
        let mut acc = Multivector::zero(self.m() + 1);
        for (v, &w) in self.values.iter().zip(&self.rule.weights) {
            acc.axpy_real(w, v);
        }
        acc
    }

    /// `sum_i w_i <f(xi_i), g(xi_i)>`, conjugate-linear in `self`.
    pub fn l2_inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_rule(other)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for ((a, b), &w) in self.values.iter().zip(&other.values).zip(&self.rule.weights) {
            acc += a.herm_inner(b)? * w;
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> T {
        self.values
            .iter()
            .zip(&self.rule.weights)
            .map(|(v, &w)| w * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Largest blade coefficient magnitude over all nodes.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|v| v.max_abs())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn map(&self, f: impl Fn(&Vector1<T>, &Multivector<T>) -> Multivector<T>) -> Self {
        let values = self
            .rule
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(x, v)| f(x, v))
            .collect();
        SphereFunction {
            rule: self.rule.clone(),
            values,
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|_, v| v.scale(s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|_, v| v.scale_real(s))
    }

    /// Pointwise right multiplication by a constant.
    pub fn right_mul(&self, c: &Multivector<T>) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|v| v.geometric_product(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.rule.clone(), values)
    }

    /// Pointwise left multiplication by the node vector, `xi f(xi)`.
    pub fn times_node(&self) -> Self {
        self.map(|x, v| &Multivector::vector(x) * v)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_rule(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_rule(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: Complex<T>, other: &Self) -> Result<()> {
        self.check_rule(other)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += &y.scale(a);
        }
        Ok(())
    }

    fn zip_map(&self, other: &Self, f: impl Fn(&Multivector<T>, &Multivector<T>) -> Multivector<T>) -> Self {
        SphereFunction {
            rule: self.rule.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::monogenic_basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Mv = Multivector<f64>;

    fn rule(m: usize, d: usize) -> Arc<QuadratureRule<f64>> {
        Arc::new(build_quadrature(m, d).unwrap())
    }

    /// Exact `int xi^alpha dsigma` on the unit-mass sphere in `n = m + 1`
    /// variables: zero unless all exponents are even, otherwise
    /// `prod (alpha_j - 1)!! / (n (n + 2) ... (n + |alpha| - 2))`.
    fn exact_monomial_moment(alpha: &[u32]) -> f64 {
        if alpha.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let n = alpha.len() as f64;
        let mut num = 1.0;
        for &a in alpha {
            let mut j = a as i64 - 1;
            while j > 0 {
                num *= j as f64;
                j -= 2;
            }
        }
        let total: u32 = alpha.iter().sum();
        let mut den = 1.0;
        let mut j = 0;
        while j < total {
            den *= n + j as f64;
            j += 2;
        }
        num / den
    }

    #[test]
    fn gauss_legendre_matches_known_nodes() {
        let (s, w) = gauss_gegenbauer(2, 0.5).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((s[0] + r).abs() < 1e-15 && (s[1] - r).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert!(gauss_gegenbauer(0, 0.5).is_err());
    }

    #[test]
    fn rule_invariants() {
        for m in 1..=4 {
            for d in [0, 3, 8] {
                let q = build_quadrature::<f64>(m, d).unwrap();
                let total: f64 = q.weights().iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(q.weights().iter().all(|&w| w > 0.0));
                assert!(q.nodes().iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
                assert_eq!(q.exactness_degree(), d);
            }
        }
        assert_eq!(build_quadrature::<f64>(5, 4).unwrap_err(), Error::UnsupportedDimension(5));
        assert!(build_quadrature::<f64>(0, 4).is_err());
        assert!(build_quadrature::<f64>(2, 41).is_err());
    }

    #[test]
    fn moments() {
        for m in 1..=4 {
            let q = rule(m, 6);
            assert!((q.integrate_scalar(|_| 1.0) - 1.0).abs() < 1e-14);
            assert!(q.integrate_scalar(|x| x.components()[0]).abs() < 1e-14);
            let want = 1.0 / (m as f64 + 1.0);
            assert!((q.integrate_scalar(|x| x.components()[0].powi(2)) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_on_all_monomials_up_to_degree() {
        for m in 1..=4 {
            let d = if m == 4 { 8 } else { 12 };
            let q = rule(m, d);
            for k in 0..=d as u32 {
                for alpha in crate::polynomial::homogeneous_exponents(m + 1, k) {
                    let got = q.integrate_scalar(|x| {
                        x.components().iter().zip(&alpha).map(|(c, &a)| c.powi(a as i32)).product()
                    });
                    let want = exact_monomial_moment(&alpha);
                    assert!((got - want).abs() <= 1e-13, "m={m} alpha={alpha:?}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn exactness_certificate_against_doubled_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in 1..=3 {
            let d = 10;
            let (q, big) = (rule(m, d), rule(m, 2 * d));
            for _ in 0..5 {
                let coeffs: Vec<(Vec<u32>, f64)> = (0..=d as u32)
                    .flat_map(|k| crate::polynomial::homogeneous_exponents(m + 1, k))
                    .map(|a| (a, rng.random_range(-1.0..1.0)))
                    .collect();
                let g = |x: &Vector1<f64>| -> f64 {
                    coeffs
                        .iter()
                        .map(|(a, c)| {
                            c * x.components().iter().zip(a).map(|(v, &e)| v.powi(e as i32)).product::<f64>()
                        })
                        .sum()
                };
                assert!((q.integrate_scalar(g) - big.integrate_scalar(g)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        for m in 1..=3 {
            let q = rule(m, 6);
            let dim = m + 1;
            let c = Mv::blade(dim, &[1, 2]).unwrap().scale_real(3.0);
            let f = SphereFunction::constant(q.clone(), &c).unwrap();
            assert!((&f.integrate() - &c).max_abs() < 1e-14);
            let e1 = Mv::basis_blade(dim, 1);
            let odd = SphereFunction::from_fn(q.clone(), |x| Ok(e1.scale_real(x.components()[0]))).unwrap();
            assert!(odd.integrate().max_abs() < 1e-12);
            let e12 = Mv::blade(dim, &[1, 2]).unwrap();
            let sq = SphereFunction::from_fn(q.clone(), |x| Ok(e12.scale_real(x.components()[0].powi(2)))).unwrap();
            let want = e12.scale_real(1.0 / (m as f64 + 1.0));
            assert!((&sq.integrate() - &want).max_abs() < 1e-14);
        }
    }

    #[test]
    fn l2_examples() {
        let m = 2;
        let q = rule(m, 8);
        let one = SphereFunction::constant(q.clone(), &Mv::one(3)).unwrap();
        assert!((one.norm() - 1.0).abs() < 1e-14);
        let x1 = SphereFunction::from_fn(q.clone(), |x| Ok(Mv::real_scalar(3, x.components()[0]))).unwrap();
        assert!((x1.norm_sqr() - 1.0 / 3.0).abs() < 1e-14);
        let b1 = monogenic_basis::<f64>(m, 1).unwrap();
        let b2 = monogenic_basis::<f64>(m, 2).unwrap();
        for p in &b1 {
            let f = SphereFunction::from_polynomial(q.clone(), p).unwrap();
            for p2 in b2.iter().take(6) {
                let g = SphereFunction::from_polynomial(q.clone(), p2).unwrap();
                assert!(f.l2_inner(&g).unwrap().norm() <= 1e-10);
            }
        }
        let other = SphereFunction::constant(rule(m, 6), &Mv::one(3)).unwrap();
        assert_eq!(one.l2_inner(&other).unwrap_err(), Error::RuleMismatch);
    }

    #[test]
    fn inner_product_is_hermitian() {
        let q = rule(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut random = || {
            let vals = (0..q.len())
                .map(|_| {
                    let c = (0..8).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                    Mv::from_coeffs(3, c).unwrap()
                })
                .collect();
            SphereFunction::new(q.clone(), vals).unwrap()
        };
        let (f, g) = (random(), random());
        let fg = f.l2_inner(&g).unwrap();
        let gf = g.l2_inner(&f).unwrap();
        assert!((fg - gf.conj()).norm() < 1e-14);
        assert!((f.l2_inner(&f).unwrap().re - f.norm_sqr()).abs() < 1e-13);
    }

    #[test]
    fn value_count_checked() {
        let q = rule(2, 2);
        assert!(SphereFunction::new(q.clone(), vec![Mv::one(3)]).is_err());
        assert!(SphereFunction::new(q.clone(), vec![Mv::one(2); q.len()]).is_err());
    }

    #[test]
    fn csv_export() {
        let q = rule(1, 3);
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,weight");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn single_precision_rule() {
        let q = build_quadrature::<f32>(2, 4).unwrap();
        let total: f32 = q.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
    }
}
