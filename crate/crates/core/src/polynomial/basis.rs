//! Brute-force bases of homogeneous monogenic polynomials.
//!
//! The Dirac operator maps degree-`k` polynomials with Clifford coefficients
//! to degree `k - 1`; its null space is computed numerically from the dense
//! coefficient matrix. `D` sends even-grade coefficients to odd ones and vice
//! versa, so only the even block is factorized; the odd solutions are the even
//! ones multiplied on the right by `e_1`.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::MvPolynomial;
use crate::clifford::{product_sign_negative, Multivector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Singular values below this fraction of the largest one count as zero.
pub const NULL_SPACE_RTOL: f64 = 1e-10;

/// All exponent vectors of total degree `k` in `nvars` variables, lexicographically descending.
pub fn homogeneous_exponents(nvars: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if nvars == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(nvars - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars > 0 {
        rec(nvars, k, &mut Vec::with_capacity(nvars), &mut out);
    }
    out
}

fn index_of(list: &[Vec<u32>], e: &[u32]) -> usize {
    list.binary_search_by(|probe| e.cmp(probe))
        .expect("exponent present in enumeration")
}

/// Basis of the degree-`k` homogeneous monogenic polynomials in `m + 1`
/// variables with `C_{m+1}` coefficients (the inner spherical monogenics of
/// degree `k` after restriction to `S^m`). The basis is orthonormal in
/// coefficient space.
pub fn monogenic_basis<T: Real>(m: usize, k: u32) -> Result<Vec<MvPolynomial<T>>> {
    if m == 0 {
        return Err(Error::param("m", "sphere dimension must be at least 1"));
    }
    let dim = m + 1;
    Multivector::<T>::try_zero(dim)?;
    let nblades = 1usize << dim;
    if k == 0 {
        return Ok((0..nblades)
            .map(|mask| MvPolynomial::constant(Multivector::basis_blade(dim, mask)))
            .collect());
    }

    let cols_mono = homogeneous_exponents(dim, k);
    let rows_mono = homogeneous_exponents(dim, k - 1);
    let even: Vec<usize> = (0..nblades).filter(|b| b.count_ones() % 2 == 0).collect();
    let odd: Vec<usize> = (0..nblades).filter(|b| b.count_ones() % 2 == 1).collect();
    let mut odd_pos = vec![usize::MAX; nblades];
    for (i, &b) in odd.iter().enumerate() {
        odd_pos[b] = i;
    }

    let ncols = cols_mono.len() * even.len();
    let nrows = rows_mono.len() * odd.len();
    // Padding with zero rows makes the factorization square so that the full
    // right singular basis (including the null directions) is returned.
    let size = ncols.max(nrows);
    let mut a = DMatrix::<f64>::zeros(size, ncols);
    for (ai, alpha) in cols_mono.iter().enumerate() {
        for (bi, &b) in even.iter().enumerate() {
            let col = ai * even.len() + bi;
            for j in 0..dim {
                if alpha[j] == 0 {
                    continue;
                }
                let mut beta = alpha.clone();
                beta[j] -= 1;
                let g = 1usize << j;
                let row = index_of(&rows_mono, &beta) * odd.len() + odd_pos[g ^ b];
                let sign = if product_sign_negative(g, b) { -1.0 } else { 1.0 };
                a[(row, col)] += sign * alpha[j] as f64;
            }
        }
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = NULL_SPACE_RTOL * smax;

    let e1 = Multivector::<T>::basis_blade(dim, 1);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > threshold {
            continue;
        }
        let row = v_t.row(i);
        let mut p = MvPolynomial::zero(dim);
        for (ai, alpha) in cols_mono.iter().enumerate() {
            let mut c = Multivector::<T>::zero(dim);
            let mut any = false;
            for (bi, &b) in even.iter().enumerate() {
                let v = row[ai * even.len() + bi];
                if v != 0.0 {
                    c.set_coeff(b, Complex::new(T::lit(v), T::zero()));
                    any = true;
                }
            }
            if any {
                p.add_term(alpha.clone(), &c);
            }
        }
        basis.push(p);
    }
    let odd_part: Vec<_> = basis.iter().map(|p| p.right_mul(&e1)).collect();
    basis.extend(odd_part);
    Ok(basis)
}

/// Polynomials `x * P` for `P` in [`monogenic_basis`]; on `S^m` these restrict
/// to the outer spherical monogenics of degree `k` (Gamma-eigenvalue `k + m`),
/// and `x P(x) |x|^{-(2k+m+1)}` is their monogenic extension.
pub fn outer_monogenic_basis<T: Real>(m: usize, k: u32) -> Result<Vec<MvPolynomial<T>>> {
    let x = MvPolynomial::vector_variable(m + 1);
    Ok(monogenic_basis::<T>(m, k)?
        .iter()
        .map(|p| &x * p)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Vector1;

    type Poly = MvPolynomial<f64>;
    type Mv = Multivector<f64>;

    #[test]
    fn exponent_enumeration() {
        assert_eq!(homogeneous_exponents(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(homogeneous_exponents(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(homogeneous_exponents(4, 3).len(), 20);
    }

    #[test]
    fn degree_zero_is_blade_constants() {
        let b = monogenic_basis::<f64>(2, 0).unwrap();
        assert_eq!(b.len(), 8);
        for (mask, p) in b.iter().enumerate() {
            assert_eq!(p, &Poly::constant(Mv::basis_blade(3, mask)));
        }
    }

    #[test]
    fn every_element_is_monogenic() {
        for m in 1..=3 {
            for k in 0..=3 {
                for p in monogenic_basis::<f64>(m, k).unwrap() {
                    assert!(p.dirac().max_abs_coeff() <= 1e-12, "m={m} k={k}");
                    assert_eq!(p.homogeneous_component(k), p);
                }
            }
        }
    }

    #[test]
    fn dimension_matches_count() {
        let binom = |n: usize, r: usize| (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
        for m in 1..=3 {
            for k in 0..=4usize {
                let len = monogenic_basis::<f64>(m, k as u32).unwrap().len();
                assert_eq!(len, (1 << (m + 1)) * binom(k + m - 1, k), "m={m} k={k}");
            }
        }
    }

    /// Solves the least-squares problem of expressing `target` in the basis and
    /// returns the residual coefficient error.
    fn span_residual(basis: &[Poly], target: &Poly) -> f64 {
        let dim = target.dim();
        let mut keys: Vec<(Vec<u32>, usize)> = Vec::new();
        for p in basis.iter().chain(std::iter::once(target)) {
            for (e, _) in p.terms() {
                for mask in 0..(1usize << dim) {
                    keys.push((e.clone(), mask));
                }
            }
        }
        keys.sort();
        keys.dedup();
        let coef = |p: &Poly, key: &(Vec<u32>, usize)| {
            p.terms()
                .find(|(e, _)| **e == key.0)
                .map(|(_, c)| c.coeff(key.1).re)
                .unwrap_or(0.0)
        };
        let a = DMatrix::from_fn(keys.len(), basis.len(), |r, c| coef(&basis[c], &keys[r]));
        let b = nalgebra::DVector::from_fn(keys.len(), |r, _| coef(target, &keys[r]));
        let x = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
        (a * x - b).amax()
    }

    #[test]
    fn circle_degree_one_contains_holomorphic_linear() {
        let basis = monogenic_basis::<f64>(1, 1).unwrap();
        let target = &Poly::variable(2, 1) - &Poly::variable(2, 2).right_mul(&Mv::blade(2, &[1, 2]).unwrap());
        assert!(span_residual(&basis, &target) <= 1e-12);
        // x_1 + x_2 e_12 is not monogenic and must not be in the span.
        let other = &Poly::variable(2, 1) + &Poly::variable(2, 2).right_mul(&Mv::blade(2, &[1, 2]).unwrap());
        assert!(span_residual(&basis, &other) > 0.1);
    }

    #[test]
    fn outer_basis_evaluates_to_vector_times_inner() {
        let inner = monogenic_basis::<f64>(2, 2).unwrap();
        let outer = outer_monogenic_basis::<f64>(2, 2).unwrap();
        let x = Vector1::from_f64(&[0.3, -0.4, 0.5]);
        for (p, q) in inner.iter().zip(&outer) {
            let want = &Mv::vector(&x) * &p.evaluate(&x).unwrap();
            assert!((&q.evaluate(&x).unwrap() - &want).max_abs() <= 1e-14);
        }
    }
}
