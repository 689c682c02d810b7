//! Pointwise nonlinear maps for the defocusing equation
//! `iu_t + u_xx = |u|^{p-1} u` and their difference and Taylor-remainder
//! forms.
//!
//! Conventions: `|u|^{q}` for non-integer `q` is `exp((q/2)·log|u|²)` with
//! `0^q = 0` for `q > 0` and `0^0 = 1` (so the `|w|^{p-3}` weight is
//! continuous at `p = 3`). Differences are computed by direct subtraction,
//! not fused expansions, so identities like `G(v, v, w) = 0` hold exactly
//! in floating point.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use num_complex::Complex64;

/// Nonlinearity exponent `p ≥ 2` together with its derived flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    p: f64,
    is_odd_integer: bool,
    floor_p: i64,
}

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity exponent must satisfy p >= 2, got {p}"
            )));
        }
        let floor_p = p.floor() as i64;
        let is_integer = p == floor_p as f64;
        Ok(Self {
            p,
            is_odd_integer: is_integer && floor_p % 2 == 1,
            floor_p,
        })
    }

    pub fn value(&self) -> f64 {
        self.p
    }

    pub fn is_odd_integer(&self) -> bool {
        self.is_odd_integer
    }

    /// `[p] = sup{k ∈ ℤ : k ≤ p}`.
    pub fn floor(&self) -> i64 {
        self.floor_p
    }
}

/// `|z|^q` given `m2 = |z|²`, with the conventions above.
pub(crate) fn abs_pow(m2: f64, q: f64) -> f64 {
    if q == 0.0 {
        return 1.0;
    }
    if m2 == 0.0 {
        return 0.0;
    }
    let qi = q as i64;
    if q == qi as f64 {
        // Integer exponent: powers of sqrt keep exact homogeneity under
        // power-of-two rescaling of the field.
        if qi % 2 == 0 {
            m2.powi((qi / 2) as i32)
        } else {
            m2.powi(((qi - 1) / 2) as i32) * m2.sqrt()
        }
    } else {
        m2.powf(q / 2.0)
    }
}

/// `|z|^{p-1} z` at a single sample.
#[inline]
pub(crate) fn n_p_point(z: Complex64, p: f64) -> Complex64 {
    z * abs_pow(z.norm_sqr(), p - 1.0)
}

/// Defocusing nonlinearity `u ↦ |u|^{p-1} u`, pointwise.
pub fn n_p(u: &ComplexField, p: &Power) -> ComplexField {
    let pv = p.value();
    u.map(|z| n_p_point(z, pv))
}

/// Difference nonlinearity
/// `G(v₁, v₂, w) = |v₁+w|^{p-1}(v₁+w) - |v₂+w|^{p-1}(v₂+w)`,
/// computed as a literal difference so `G(v, v, w) = 0` and the
/// antisymmetry in `(v₁, v₂)` are exact. With `v₂ = 0` this is the
/// right-hand side of the perturbed line equation.
pub fn g_difference(
    v1: &ComplexField,
    v2: &ComplexField,
    w: &ComplexField,
    p: &Power,
) -> Result<ComplexField> {
    v1.ensure_same_grid(v2)?;
    v1.ensure_same_grid(w)?;
    let pv = p.value();
    let a = v1.zip_with(w, |v, w| n_p_point(v + w, pv));
    let b = v2.zip_with(w, |v, w| n_p_point(v + w, pv));
    Ok(a.sub(&b))
}

/// Gradient of the potential part of the difference Hamiltonian with
/// respect to `v̄`: `|v+w|^{p-1}(v+w) - |w|^{p-1}w`, pointwise.
pub fn hamiltonian_density_gradient(
    v: &ComplexField,
    w: &ComplexField,
    p: &Power,
) -> Result<ComplexField> {
    let zero = ComplexField::zeros(*v.grid());
    g_difference(v, &zero, w, p)
}

/// The three quadratic Taylor remainders of the expansions of
/// `|v+w|^{p-1}`, `|v+w|^{p+1}`, and `|v+w|^{p-1}(v+w)` around `v = 0`:
///
/// 1. `|v+w|^{p-1} - |w|^{p-1} - (p-1)Re(w v̄)|w|^{p-3}`
/// 2. `|v+w|^{p+1} - |w|^{p+1} - (p+1)Re(w v̄)|w|^{p-1} - |v|^{p+1}`
/// 3. `|v+w|^{p-1}(v+w) - |w|^{p-1}w - (p-1)Re(w v̄)|w|^{p-3}w - v|w|^{p-1}`
///
/// The first two are real-valued (imaginary part identically zero).
/// Requires `p ≥ 3`.
pub fn taylor_remainders(
    v: &ComplexField,
    w: &ComplexField,
    p: &Power,
) -> Result<[ComplexField; 3]> {
    if p.value() < 3.0 {
        return Err(Error::InvalidParameter(format!(
            "Taylor remainders require p >= 3, got {}",
            p.value()
        )));
    }
    v.ensure_same_grid(w)?;
    let pv = p.value();

    let r1 = v.zip_with(w, |v, w| {
        let w2 = w.norm_sqr();
        let lead = abs_pow((v + w).norm_sqr(), pv - 1.0)
            - abs_pow(w2, pv - 1.0)
            - (pv - 1.0) * (w * v.conj()).re * abs_pow(w2, pv - 3.0);
        Complex64::new(lead, 0.0)
    });
    let r2 = v.zip_with(w, |v, w| {
        let w2 = w.norm_sqr();
        let lead = abs_pow((v + w).norm_sqr(), pv + 1.0)
            - abs_pow(w2, pv + 1.0)
            - (pv + 1.0) * (w * v.conj()).re * abs_pow(w2, pv - 1.0)
            - abs_pow(v.norm_sqr(), pv + 1.0);
        Complex64::new(lead, 0.0)
    });
    let r3 = v.zip_with(w, |v, w| {
        let w2 = w.norm_sqr();
        n_p_point(v + w, pv)
            - n_p_point(w, pv)
            - (pv - 1.0) * (w * v.conj()).re * abs_pow(w2, pv - 3.0) * w
            - v * abs_pow(w2, pv - 1.0)
    });
    Ok([r1, r2, r3])
}
