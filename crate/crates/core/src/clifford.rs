//! Complex Clifford algebra with `n` anticommuting generators squaring to `-1`.
//!
//! Elements are stored densely: one complex coefficient per basis blade, the
//! blade `e_A` addressed by the bitmask of `A` (bit `j - 1` set when `e_j`
//! appears). Blade labels used in serialized form concatenate the sorted
//! 1-based indices, so `e_13` is `"13"` and the scalar blade is `""`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported generator count (`m + 1` for spheres up to `S^6`).
pub const MAX_GENERATORS: usize = 7;

/// Number of transpositions needed to bring `e_a e_b` into canonical order,
/// plus one per shared generator (each contributes `e_j e_j = -1`).
#[inline]
pub fn product_sign_negative(a: usize, b: usize) -> bool {
    let mut swaps = (a & b).count_ones();
    let mut shifted = a >> 1;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps & 1 == 1
}

/// Sign of the Clifford conjugate on a blade of the given grade, `(-1)^{g(g+1)/2}`.
#[inline]
pub fn conjugation_sign_negative(grade: u32) -> bool {
    matches!(grade % 4, 1 | 2)
}

pub fn blade_label(mask: usize) -> String {
    let mut s = String::new();
    let mut j = 0;
    let mut rest = mask;
    while rest != 0 {
        if rest & 1 == 1 {
            s.push(char::from_digit(j as u32 + 1, 10).expect("generator index below 10"));
        }
        rest >>= 1;
        j += 1;
    }
    s
}

/// Parses a blade label such as `"12"` into its bitmask for an algebra with `dim` generators.
pub fn parse_blade_label(label: &str, dim: usize) -> Result<usize> {
    let mut indices = Vec::with_capacity(label.len());
    for ch in label.chars() {
        let d = ch
            .to_digit(10)
            .ok_or_else(|| Error::Malformed(format!("blade label {label:?}")))?;
        indices.push(d as usize);
    }
    mask_from_indices(&indices, dim)
}

/// Bitmask of a strictly increasing list of 1-based generator indices.
pub fn mask_from_indices(indices: &[usize], dim: usize) -> Result<usize> {
    let mut mask = 0usize;
    let mut last = 0usize;
    for &i in indices {
        if i == 0 || i > dim || i <= last {
            return Err(Error::InvalidBlade(indices.to_vec()));
        }
        mask |= 1 << (i - 1);
        last = i;
    }
    Ok(mask)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_GENERATORS {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

/// A point of `R^n` viewed as the 1-vector `sum_j x_j e_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector1<T>(Vec<T>);

impl<T: Real> Vector1<T> {
    pub fn new(components: Vec<T>) -> Self {
        Vector1(components)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector1(vec![T::zero(); dim])
    }

    /// The `j`-th canonical basis vector (1-based, matching `e_j`).
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = vec![T::zero(); dim];
        v[j - 1] = T::one();
        Vector1(v)
    }

    pub fn from_f64(components: &[f64]) -> Self {
        Vector1(components.iter().map(|&x| T::lit(x)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Vector1(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector1(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector1(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    /// Direction `x / |x|` and radius `|x|`.
    pub fn polar(&self) -> Result<(Self, T)> {
        let r = self.norm();
        if r == T::zero() {
            return Err(Error::Origin);
        }
        Ok((self.scale(T::one() / r), r))
    }

    pub fn is_unit(&self, tol: T) -> bool {
        (self.norm() - T::one()).abs() <= tol
    }

    pub(crate) fn require_unit(&self, what: &'static str, tol: T) -> Result<()> {
        if self.is_unit(tol) {
            Ok(())
        } else {
            Err(Error::NotUnit {
                what,
                norm: self.norm().to_f64_lossy(),
            })
        }
    }
}

/// Element of the complexified Clifford algebra `C_n`.
#[derive(Clone, PartialEq)]
pub struct Multivector<T> {
    dim: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Multivector<T> {
    /// The zero element. Panics when `dim` is outside `1..=MAX_GENERATORS`.
    pub fn zero(dim: usize) -> Self {
        check_dim(dim).expect("valid algebra dimension");
        Multivector {
            dim,
            coeffs: vec![Complex::new(T::zero(), T::zero()); 1 << dim],
        }
    }

    pub fn try_zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::zero(dim))
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        check_dim(dim)?;
        if coeffs.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                expected: 1 << dim,
                found: coeffs.len(),
            });
        }
        Ok(Multivector { dim, coeffs })
    }

    pub fn scalar(dim: usize, c: Complex<T>) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[0] = c;
        mv
    }

    pub fn real_scalar(dim: usize, x: T) -> Self {
        Self::scalar(dim, Complex::new(x, T::zero()))
    }

    pub fn one(dim: usize) -> Self {
        Self::real_scalar(dim, T::one())
    }

    /// Unit blade addressed by bitmask.
    pub fn basis_blade(dim: usize, mask: usize) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[mask] = Complex::new(T::one(), T::zero());
        mv
    }

    /// Unit blade `e_{i_1 ... i_k}` from strictly increasing 1-based indices.
    pub fn blade(dim: usize, indices: &[usize]) -> Result<Self> {
        check_dim(dim)?;
        let mask = mask_from_indices(indices, dim)?;
        Ok(Self::basis_blade(dim, mask))
    }

    /// Embeds `x` as `sum_j x_j e_j`.
    pub fn vector(x: &Vector1<T>) -> Self {
        let mut mv = Self::zero(x.dim());
        for (j, &c) in x.components().iter().enumerate() {
            mv.coeffs[1 << j] = Complex::new(c, T::zero());
        }
        mv
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    #[inline]
    pub fn coeff(&self, mask: usize) -> Complex<T> {
        self.coeffs[mask]
    }

    #[inline]
    pub fn set_coeff(&mut self, mask: usize, c: Complex<T>) {
        self.coeffs[mask] = c;
    }

    pub fn scalar_part(&self) -> Complex<T> {
        self.coeffs[0]
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        }
    }

    /// Geometric (Clifford) product `self * other`.
    pub fn geometric_product(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim);
        let zero = Complex::new(T::zero(), T::zero());
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == zero {
                continue;
            }
            for (b, &cb) in other.coeffs.iter().enumerate() {
                if cb == zero {
                    continue;
                }
                let p = ca * cb;
                if product_sign_negative(a, b) {
                    out.coeffs[a ^ b] -= p;
                } else {
                    out.coeffs[a ^ b] += p;
                }
            }
        }
        Ok(out)
    }

    /// `e_j * self` for a single generator, without a general product.
    pub fn left_mul_generator(&self, j: usize) -> Self {
        let g = 1usize << (j - 1);
        let mut out = Self::zero(self.dim);
        for (b, &c) in self.coeffs.iter().enumerate() {
            if product_sign_negative(g, b) {
                out.coeffs[g ^ b] -= c;
            } else {
                out.coeffs[g ^ b] += c;
            }
        }
        out
    }

    /// Clifford conjugation: linear anti-involution negating 1-vectors.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            if conjugation_sign_negative(mask.count_ones()) {
                *c = -*c;
            }
        }
        out
    }

    /// Complex conjugation of every coefficient.
    pub fn complex_conj(&self) -> Self {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Bilinear coefficient pairing `sum_A u_A v_A`.
    pub fn coeff_inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_dim(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b))
    }

    /// Sesquilinear pairing `sum_A conj(u_A) v_A`, the inner product behind `L^2` norms.
    pub fn herm_inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_dim(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                acc + a.conj() * b
            }))
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `self += a * x` for a real scalar `a`.
    #[inline]
    pub fn axpy_real(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.dim, x.dim);
        for (y, &xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y = *y + xv * a;
        }
    }

    /// Part of grade `g`.
    pub fn grade_part(&self, g: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if mask.count_ones() == g {
                out.coeffs[mask] = c;
            }
        }
        out
    }

    /// Nonzero coefficients keyed by blade label.
    pub fn to_blade_map(&self) -> BTreeMap<String, [f64; 2]> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
            .map(|(mask, c)| (blade_label(mask), [c.re.to_f64_lossy(), c.im.to_f64_lossy()]))
            .collect()
    }

    pub fn from_blade_map(dim: usize, map: &BTreeMap<String, [f64; 2]>) -> Result<Self> {
        let mut mv = Self::try_zero(dim)?;
        for (label, [re, im]) in map {
            let mask = parse_blade_label(label, dim)?;
            mv.coeffs[mask] = Complex::new(T::lit(*re), T::lit(*im));
        }
        Ok(mv)
    }
}

/// Outer product of two 1-vectors, `sum_{i<j} (eta_i xi_j - eta_j xi_i) e_ij`.
pub fn wedge_vectors<T: Real>(eta: &Vector1<T>, xi: &Vector1<T>) -> Result<Multivector<T>> {
    if eta.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: eta.dim(),
            found: xi.dim(),
        });
    }
    let n = eta.dim();
    let mut out = Multivector::try_zero(n)?;
    let (a, b) = (eta.components(), xi.components());
    for i in 0..n {
        for j in (i + 1)..n {
            let c = a[i] * b[j] - a[j] * b[i];
            out.coeffs[(1 << i) | (1 << j)] = Complex::new(c, T::zero());
        }
    }
    Ok(out)
}

impl<T: Real> fmt::Debug for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector[{}]{{", self.dim)?;
        let mut first = true;
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.re == T::zero() && c.im == T::zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "e{}: {}", blade_label(mask), c)?;
        }
        write!(f, "}}")
    }
}

impl<T: Real> Add for &Multivector<T> {
    type Output = Multivector<T>;
    fn add(self, rhs: Self) -> Multivector<T> {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, rhs: Self) -> Multivector<T> {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<T: Real> Add for Multivector<T> {
    type Output = Multivector<T>;
    fn add(self, rhs: Self) -> Multivector<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, rhs: Self) -> Multivector<T> {
        &self - &rhs
    }
}

impl<T: Real> AddAssign<&Multivector<T>> for Multivector<T> {
    fn add_assign(&mut self, rhs: &Multivector<T>) {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl<T: Real> SubAssign<&Multivector<T>> for Multivector<T> {
    fn sub_assign(&mut self, rhs: &Multivector<T>) {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl<T: Real> Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

impl<T: Real> Neg for Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        -&self
    }
}

/// Geometric product; panics on dimension mismatch (use
/// [`Multivector::geometric_product`] for the fallible form).
impl<T: Real> Mul for &Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, rhs: Self) -> Multivector<T> {
        self.geometric_product(rhs)
            .expect("multivector dimension mismatch")
    }
}

impl<T: Real> Mul for Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, rhs: Self) -> Multivector<T> {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Mv = Multivector<f64>;

    fn e(dim: usize, idx: &[usize]) -> Mv {
        Mv::blade(dim, idx).unwrap()
    }

    fn close(a: &Mv, b: &Mv, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn generator_relations() {
        assert_eq!(&e(3, &[1]) * &e(3, &[1]), -Mv::one(3));
        assert_eq!(&e(3, &[1]) * &e(3, &[2]), e(3, &[1, 2]));
        assert_eq!(&e(3, &[2]) * &e(3, &[1]), -e(3, &[1, 2]));
        for i in 1..=3 {
            for j in 1..=3 {
                let anti = &(&e(3, &[i]) * &e(3, &[j])) + &(&e(3, &[j]) * &e(3, &[i]));
                let expect = if i == j { Mv::real_scalar(3, -2.0) } else { Mv::zero(3) };
                assert_eq!(anti, expect);
            }
        }
    }

    #[test]
    fn distributive_example() {
        let a = &Mv::real_scalar(2, 3.0) + &e(2, &[1]);
        let got = &a * &e(2, &[1]);
        let want = &Mv::real_scalar(2, -1.0) + &e(2, &[1]).scale_real(3.0);
        assert_eq!(got, want);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = e(2, &[1]).geometric_product(&e(3, &[1])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
        assert!(e(2, &[1]).coeff_inner(&e(3, &[1])).is_err());
    }

    #[test]
    fn invalid_blades_rejected() {
        assert!(Mv::blade(3, &[2, 1]).is_err());
        assert!(Mv::blade(3, &[4]).is_err());
        assert!(Mv::blade(3, &[0]).is_err());
        assert!(Mv::try_zero(8).is_err());
    }

    #[test]
    fn clifford_conjugation() {
        assert_eq!(Mv::one(3).conj(), Mv::one(3));
        assert_eq!(e(3, &[1]).conj(), -e(3, &[1]));
        assert_eq!(e(3, &[1, 2]).conj(), -e(3, &[1, 2]));
        assert_eq!(e(3, &[1, 2, 3]).conj(), e(3, &[1, 2, 3]));
    }

    #[test]
    fn coefficient_inner_product() {
        let one = Complex::new(1.0, 0.0);
        assert_eq!(e(3, &[1]).coeff_inner(&e(3, &[1])).unwrap(), one);
        assert_eq!(e(3, &[1]).coeff_inner(&e(3, &[2])).unwrap(), Complex::new(0.0, 0.0));
        let u = &Mv::real_scalar(3, 2.0) + &e(3, &[1, 2]);
        let v = &Mv::real_scalar(3, 3.0) + &e(3, &[1, 2]);
        assert_eq!(u.coeff_inner(&v).unwrap(), Complex::new(7.0, 0.0));
    }

    #[test]
    fn wedge_examples() {
        let e1 = Vector1::<f64>::basis(3, 1);
        let e2 = Vector1::<f64>::basis(3, 2);
        assert_eq!(wedge_vectors(&e1, &e2).unwrap(), e(3, &[1, 2]));
        assert_eq!(wedge_vectors(&e1, &e1).unwrap(), Mv::zero(3));
        let eta = Vector1::from_f64(&[0.6, 0.8, 0.0]);
        let xi = Vector1::from_f64(&[0.0, 1.0, 0.0]);
        assert!(close(&wedge_vectors(&eta, &xi).unwrap(), &e(3, &[1, 2]).scale_real(0.6), 1e-15));
    }

    #[test]
    fn blade_map_roundtrip_and_labels() {
        assert_eq!(blade_label(0), "");
        assert_eq!(blade_label(0b101), "13");
        let mut mv = e(3, &[1, 3]).scale(Complex::new(1.5, -2.0));
        mv += &Mv::real_scalar(3, 4.0);
        let map = mv.to_blade_map();
        assert_eq!(map.get("13"), Some(&[1.5, -2.0]));
        assert_eq!(map.get(""), Some(&[4.0, 0.0]));
        assert_eq!(Mv::from_blade_map(3, &map).unwrap(), mv);
        assert!(parse_blade_label("31", 3).is_err());
    }

    fn mv_strategy(dim: usize) -> impl Strategy<Value = Mv> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1 << dim).prop_map(move |cs| {
            Mv::from_coeffs(dim, cs.into_iter().map(|(r, i)| Complex::new(r, i)).collect())
                .unwrap()
        })
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vector1<f64>> {
        prop::collection::vec(-3.0f64..3.0, dim).prop_map(Vector1::new)
    }

    proptest! {
        #[test]
        fn product_is_associative(a in mv_strategy(4), b in mv_strategy(4), c in mv_strategy(4)) {
            let l = &(&a * &b) * &c;
            let r = &a * &(&b * &c);
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn vectors_square_to_minus_norm(x in vec_strategy(5)) {
            let v = Mv::vector(&x);
            let sq = &v * &v;
            prop_assert!(close(&sq, &Mv::real_scalar(5, -x.dot(&x)), 1e-12));
        }

        #[test]
        fn conjugation_reverses_products(a in mv_strategy(3), b in mv_strategy(3)) {
            let l = (&a * &b).conj();
            let r = &b.conj() * &a.conj();
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn vector_product_splits_into_dot_and_wedge(eta in vec_strategy(4), xi in vec_strategy(4)) {
            let prod = &Mv::vector(&eta) * &Mv::vector(&xi);
            let split = &Mv::real_scalar(4, -eta.dot(&xi)) + &wedge_vectors(&eta, &xi).unwrap();
            prop_assert!(close(&prod, &split, 1e-12));
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let a = Multivector::<f32>::blade(2, &[1]).unwrap();
        assert_eq!((&a * &a).scalar_part().re, -1.0f32);
    }
}
