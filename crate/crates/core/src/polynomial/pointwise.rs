//! Pointwise (non-polynomial) monogenic objects: the Cauchy kernel, the
//! Kelvin-type inversion and a central-difference Dirac operator for
//! verifying them.

use crate::clifford::{Multivector, Vector1};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fundamental solution `E(x) = conj(x) / |x|^{m+1}`.
pub fn cauchy_kernel<T: Real>(x: &Vector1<T>) -> Result<Multivector<T>> {
    let r = x.norm();
    if r == T::zero() {
        return Err(Error::Origin);
    }
    let n = x.dim() as i32;
    Ok(Multivector::vector(x).conj().scale_real(r.powi(-n)))
}

/// Inversion `(I f)(x) = x / |x|^{m+1} * f(x / |x|^2)`.
///
/// Maps inner monogenics of degree `k` to outer monogenics homogeneous of
/// degree `-(k + m)`. Applying it twice gives `-f`, since `x x = -|x|^2`.
pub fn inversion<T, F>(f: F) -> impl Fn(&Vector1<T>) -> Result<Multivector<T>>
where
    T: Real,
    F: Fn(&Vector1<T>) -> Result<Multivector<T>>,
{
    move |x: &Vector1<T>| {
        let r2 = x.dot(x);
        if r2 == T::zero() {
            return Err(Error::Origin);
        }
        let n = x.dim() as i32;
        let factor = Multivector::vector(x).scale_real(r2.sqrt().powi(-n));
        let inner = f(&x.scale(T::one() / r2))?;
        factor.geometric_product(&inner)
    }
}

/// Finite-difference Dirac operator `sum_j e_j d_j f(x)` using the fourth-order
/// central stencil `(-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / 12h`.
pub fn numerical_dirac<T, F>(f: F, x: &Vector1<T>, h: T) -> Result<Multivector<T>>
where
    T: Real,
    F: Fn(&Vector1<T>) -> Result<Multivector<T>>,
{
    let n = x.dim();
    let mut out = Multivector::try_zero(n)?;
    let inv = T::one() / (T::lit(12.0) * h);
    for j in 1..=n {
        let step = Vector1::basis(n, j).scale(h);
        let step2 = step.scale(T::lit(2.0));
        let near = (&f(&x.add(&step))? - &f(&x.sub(&step))?).scale_real(T::lit(8.0));
        let far = &f(&x.add(&step2))? - &f(&x.sub(&step2))?;
        out += &(&near - &far).left_mul_generator(j).scale_real(inv);
    }
    Ok(out)
}

/// Largest coefficient of the finite-difference Dirac residual.
pub fn numerical_dirac_residual<T, F>(f: F, x: &Vector1<T>, h: T) -> Result<T>
where
    T: Real,
    F: Fn(&Vector1<T>) -> Result<Multivector<T>>,
{
    Ok(numerical_dirac(f, x, h)?.max_abs())
}
