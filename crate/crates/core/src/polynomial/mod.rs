//! Polynomials in `x_1 .. x_n` with Clifford-valued coefficients.
//!
//! A polynomial is stored as a map from exponent vectors to coefficients; the
//! coefficient sits to the right of the monomial, so left-acting operators
//! such as the Dirac operator multiply coefficients from the left. All
//! differential operators here are exact: they act on exponents and
//! coefficients symbolically.

mod basis;
mod pointwise;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::clifford::{Multivector, Vector1};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use basis::{homogeneous_exponents, monogenic_basis, outer_monogenic_basis, NULL_SPACE_RTOL};
pub use pointwise::{cauchy_kernel, inversion, numerical_dirac, numerical_dirac_residual};

/// Exponent vector of a monomial.
pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq)]
pub struct MvPolynomial<T> {
    dim: usize,
    terms: BTreeMap<Exponents, Multivector<T>>,
}

/// One serialized term: `{ "exponents": [..], "coefficient": { blade: [re, im] } }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub coefficient: BTreeMap<String, [f64; 2]>,
}

impl<T: Real> MvPolynomial<T> {
    pub fn zero(dim: usize) -> Self {
        Multivector::<T>::zero(dim);
        MvPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Multivector<T>) -> Self {
        let dim = c.dim();
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], &c);
        p
    }

    pub fn monomial(exponents: Exponents, coeff: Multivector<T>) -> Result<Self> {
        if exponents.len() != coeff.dim() {
            return Err(Error::DimensionMismatch {
                expected: coeff.dim(),
                found: exponents.len(),
            });
        }
        let mut p = Self::zero(coeff.dim());
        p.add_term(exponents, &coeff);
        Ok(p)
    }

    /// The coordinate function `x_j` (1-based) with coefficient `1`.
    pub fn variable(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j - 1] = 1;
        Self::monomial(e, Multivector::one(dim)).expect("matching dimensions")
    }

    /// The vector variable `x = sum_j x_j e_j`.
    pub fn vector_variable(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for j in 1..=dim {
            let mut e = vec![0; dim];
            e[j - 1] = 1;
            p.add_term(e, &Multivector::basis_blade(dim, 1 << (j - 1)));
        }
        p
    }

    /// `|x|^2 = sum_j x_j^2`.
    pub fn norm_squared(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for j in 0..dim {
            let mut e = vec![0; dim];
            e[j] = 2;
            p.add_term(e, &Multivector::one(dim));
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Multivector<T>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exponents: Exponents, coeff: &Multivector<T>) {
        debug_assert_eq!(exponents.len(), self.dim);
        self.terms
            .entry(exponents)
            .and_modify(|c| *c += coeff)
            .or_insert_with(|| coeff.clone());
    }

    /// Highest total degree among stored terms (`None` for the empty polynomial).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn homogeneous_component(&self, k: u32) -> Self {
        MvPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == k)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest coefficient modulus over all terms; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> T {
        self.terms
            .values()
            .map(|c| c.max_abs())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Drops terms whose coefficients are all below `tol` in modulus.
    pub fn pruned(&self, tol: T) -> Self {
        MvPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.max_abs() > tol)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    fn map_coeffs(&self, f: impl Fn(&Multivector<T>) -> Multivector<T>) -> Self {
        MvPolynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect(),
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map_coeffs(|c| c.scale_real(s))
    }

    /// `a * p`: multiplies every coefficient from the left.
    pub fn left_mul(&self, a: &Multivector<T>) -> Self {
        self.map_coeffs(|c| a * c)
    }

    /// `p * b`: multiplies every coefficient from the right.
    pub fn right_mul(&self, b: &Multivector<T>) -> Self {
        self.map_coeffs(|c| c * b)
    }

    /// `e_j * p` for a generator, exact.
    fn left_generator(&self, j: usize) -> Self {
        self.map_coeffs(|c| c.left_mul_generator(j))
    }

    /// Exact partial derivative in `x_j` (1-based).
    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let p = e[j - 1];
            if p == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[j - 1] = p - 1;
            out.add_term(ne, &c.scale_real(T::from_u32(p).expect("small exponent")));
        }
        out
    }

    /// Multiplication by the coordinate `x_j`.
    pub fn times_variable(&self, j: usize) -> Self {
        MvPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = e.clone();
                    ne[j - 1] += 1;
                    (ne, c.clone())
                })
                .collect(),
        }
    }

    /// Dirac operator `D p = sum_j e_j dp/dx_j` acting from the left.
    pub fn dirac(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for j in 1..=self.dim {
            out = &out + &self.partial(j).left_generator(j);
        }
        out
    }

    /// Angular momentum `L_ij = x_i d_j - x_j d_i`.
    pub fn angular_momentum(&self, i: usize, j: usize) -> Self {
        &self.partial(j).times_variable(i) - &self.partial(i).times_variable(j)
    }

    /// Spherical Dirac operator `Gamma = -sum_{i<j} e_ij (x_i d_j - x_j d_i)`.
    pub fn gamma(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 1..=self.dim {
            for j in (i + 1)..=self.dim {
                let l = self.angular_momentum(i, j);
                out = &out - &l.left_generator(j).left_generator(i);
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for j in 1..=self.dim {
            out = &out + &self.partial(j).partial(j);
        }
        out
    }

    /// Euler operator `sum_j x_j d_j` (the radial derivative `d/dy`, `y = log r`).
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let deg: u32 = e.iter().sum();
            if deg > 0 {
                out.add_term(e.clone(), &c.scale_real(T::from_u32(deg).expect("small degree")));
            }
        }
        out
    }

    /// Laplace-Beltrami operator on the sphere written as `sum_{i<j} L_ij^2`.
    pub fn angular_laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 1..=self.dim {
            for j in (i + 1)..=self.dim {
                out = &out + &self.angular_momentum(i, j).angular_momentum(i, j);
            }
        }
        out
    }

    /// The factorized spherical Laplacian `((m - 1) I - Gamma) Gamma` with `m = n - 1`.
    pub fn factorized_spherical_laplacian(&self) -> Self {
        let g = self.gamma();
        let m_minus_1 = T::from_usize_lossy(self.dim) - T::lit(2.0);
        &g.scale_real(m_minus_1) - &g.gamma()
    }

    pub fn evaluate(&self, x: &Vector1<T>) -> Result<Multivector<T>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let xs = x.components();
        let mut out = Multivector::zero(self.dim);
        for (e, c) in &self.terms {
            let mono = e
                .iter()
                .zip(xs)
                .fold(T::one(), |acc, (&p, &xv)| acc * xv.powi(p as i32));
            out.axpy_real(mono, c);
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(e, c)| TermRecord {
                exponents: e.clone(),
                coefficient: c.to_blade_map(),
            })
            .collect()
    }

    pub fn from_records(dim: usize, records: &[TermRecord]) -> Result<Self> {
        Multivector::<T>::try_zero(dim)?;
        let mut p = Self::zero(dim);
        for r in records {
            if r.exponents.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.exponents.len(),
                });
            }
            p.add_term(r.exponents.clone(), &Multivector::from_blade_map(dim, &r.coefficient)?);
        }
        Ok(p)
    }
}

impl<T: Real> std::fmt::Debug for MvPolynomial<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<T: Real> Add for &MvPolynomial<T> {
    type Output = MvPolynomial<T>;
    fn add(self, rhs: Self) -> MvPolynomial<T> {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl<T: Real> Sub for &MvPolynomial<T> {
    type Output = MvPolynomial<T>;
    fn sub(self, rhs: Self) -> MvPolynomial<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &MvPolynomial<T> {
    type Output = MvPolynomial<T>;
    fn neg(self) -> MvPolynomial<T> {
        self.map_coeffs(|c| -c)
    }
}

/// Polynomial product; coefficients multiply in operand order.
impl<T: Real> Mul for &MvPolynomial<T> {
    type Output = MvPolynomial<T>;
    fn mul(self, rhs: Self) -> MvPolynomial<T> {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = MvPolynomial::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, &(ca * cb));
            }
        }
        out
    }
}
