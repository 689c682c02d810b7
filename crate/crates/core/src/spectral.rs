//! Discrete Fourier transforms, multiplier operators, and norms.
//!
//! Normalization is the continuum one throughout, so the discrete
//! quantities converge to their continuum counterparts under refinement:
//!
//! - torus:  `ŵ_k = (1/2π) ∫ w e^{-ikx} dx`, reconstruction
//!   `w(x) = Σ_k ŵ_k e^{ikx}`, Parseval `∫|w|² dx = 2π Σ |ŵ_k|²`;
//! - line:   `v̂(ξ) = Δx Σ v e^{-iξx} ≈ ∫ v e^{-iξx} dx`, reconstruction
//!   `v(x) = (Δξ/2π) Σ v̂(ξ_m) e^{iξ_m x}`, Plancherel
//!   `∫|v|² dx = (1/2π) Σ |v̂(ξ_m)|² Δξ`.
//!
//! Coefficients are stored in FFT-natural order internally; the sorted
//! view is the exposed contract.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

fn fft_forward(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// Unnormalized inverse DFT: `out_j = Σ_i in_i e^{+2πi ij/n}`.
fn fft_inverse_unnormalized(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Fourier coefficients of a field, in the continuum normalization above.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    /// FFT-natural order: slot `i` carries frequency `grid.frequency_at(i)`.
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// Assemble a spectrum from FFT-natural-order coefficients.
    pub(crate) fn from_natural_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Spectrum {
        debug_assert_eq!(coeffs.len(), grid.n());
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of the mode at FFT-natural slot `i`.
    pub fn coeff_at_natural(&self, i: usize) -> Complex64 {
        self.coeffs[i]
    }

    /// Coefficient of the torus mode `k` (or line frequency index `m`);
    /// zero when the mode is not represented on the grid.
    pub fn coeff_at_index(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        let half = n / 2;
        if k < -half || k >= half {
            return Complex64::new(0.0, 0.0);
        }
        let slot = if k >= 0 { k } else { k + n } as usize;
        self.coeffs[slot]
    }

    /// `(frequency, coefficient)` pairs in ascending frequency order.
    pub fn sorted(&self) -> Vec<(f64, Complex64)> {
        let n = self.coeffs.len();
        let half = n / 2;
        let mut out = Vec::with_capacity(n);
        for i in half..n {
            out.push((self.grid.frequency_at(i), self.coeffs[i]));
        }
        for i in 0..half {
            out.push((self.grid.frequency_at(i), self.coeffs[i]));
        }
        out
    }

    /// New spectrum with each coefficient multiplied by `m(frequency)`.
    pub fn map_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| m(self.grid.frequency_at(i)) * c)
            .collect();
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    /// `Σ_modes weight(frequency) · |coeff|²`.
    pub fn weighted_power_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| weight(self.grid.frequency_at(i)) * c.norm_sqr())
            .sum()
    }

    /// Factor `c` such that `‖f‖²_{L²} = c · Σ |coeffs|²`.
    pub fn parseval_factor(&self) -> f64 {
        match self.grid {
            Grid::Torus(_) => TAU,
            Grid::Line(g) => g.dxi() / TAU,
        }
    }
}

/// Field → spectrum in the continuum normalization.
pub fn forward_transform(f: &ComplexField) -> Result<Spectrum> {
    f.ensure_finite()?;
    let n = f.n();
    let mut coeffs = fft_forward(f.values());
    match f.grid() {
        Grid::Torus(_) => {
            let scale = 1.0 / n as f64;
            for c in &mut coeffs {
                *c *= scale;
            }
        }
        Grid::Line(g) => {
            // Points start at -L, so slot i picks up the phase e^{iπm} = (-1)^i.
            let dx = g.dx();
            for (i, c) in coeffs.iter_mut().enumerate() {
                let sign = if i % 2 == 0 { dx } else { -dx };
                *c *= sign;
            }
        }
    }
    Ok(Spectrum {
        grid: *f.grid(),
        coeffs,
    })
}

/// Spectrum → field; exact inverse of [`forward_transform`] up to roundoff.
pub fn backward_transform(s: &Spectrum) -> ComplexField {
    match s.grid {
        Grid::Torus(_) => {
            let values = fft_inverse_unnormalized(&s.coeffs);
            ComplexField::from_values_unchecked(s.grid, values)
        }
        Grid::Line(g) => {
            let scale = g.dxi() / TAU;
            let twisted: Vec<Complex64> = s
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 0 { c } else { -c } * scale)
                .collect();
            let values = fft_inverse_unnormalized(&twisted);
            ComplexField::from_values_unchecked(s.grid, values)
        }
    }
}

/// Spectrum-side free propagation `e^{-i t ξ²}`, with the dealias mask
/// optionally folded in to save a transform pair.
pub(crate) fn propagate_spectrum(s: &Spectrum, t: f64, dealias: bool) -> Spectrum {
    let s = if dealias { dealias_mask(s) } else { s.clone() };
    s.map_multiplier(|xi| Complex64::from_polar(1.0, -t * xi * xi))
}

/// Free Schrödinger propagator: multiply the spectrum by `e^{-i t ξ²}`.
/// Negative `t` is the interaction-picture twist.
pub fn free_propagate(f: &ComplexField, t: f64) -> Result<ComplexField> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter("propagation time must be finite".into()));
    }
    let spectrum = forward_transform(f)?;
    let propagated = spectrum.map_multiplier(|xi| Complex64::from_polar(1.0, -t * xi * xi));
    Ok(backward_transform(&propagated))
}

/// Spectral derivative: multiply the spectrum by `iξ`.
pub fn derivative(f: &ComplexField) -> Result<ComplexField> {
    let spectrum = forward_transform(f)?;
    let diff = spectrum.map_multiplier(|xi| Complex64::new(0.0, xi));
    Ok(backward_transform(&diff))
}

/// Sobolev norm `H^s` via the multiplier `(1 + ξ²)^s`:
/// torus `(2π Σ (1+k²)^s |ŵ_k|²)^{1/2}`, line
/// `((Δξ/2π) Σ (1+ξ²)^s |v̂(ξ)|²)^{1/2}`; at `s = 0` both reduce to the L²
/// norm.
pub fn sobolev_norm(f: &ComplexField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index must be nonnegative, got {s}"
        )));
    }
    let spectrum = forward_transform(f)?;
    let factor = spectrum.parseval_factor();
    let sum = spectrum.weighted_power_sum(|xi| (1.0 + xi * xi).powf(s));
    Ok((factor * sum).sqrt())
}

/// Lebesgue norm `(∫ |f|^q dx)^{1/q}` by collocation quadrature;
/// `q = ∞` gives the max of `|f|`.
pub fn lp_norm(f: &ComplexField, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must satisfy q >= 1, got {q}"
        )));
    }
    f.ensure_finite()?;
    if q.is_infinite() {
        return Ok(f.linf_norm());
    }
    if q == 2.0 {
        return Ok(f.l2_norm());
    }
    let sum = f.integrate(|z| z.norm_sqr().powf(q / 2.0));
    Ok(sum.powf(1.0 / q))
}

/// Sharp Littlewood–Paley projection onto the dyadic band `N ≤ |k| < 2N`.
/// Torus fields only; `N` must be a power of two.
pub fn littlewood_paley(f: &ComplexField, n_band: usize) -> Result<ComplexField> {
    f.grid().as_torus().map_err(|_| {
        Error::Unsupported("Littlewood-Paley projections are defined on torus fields".into())
    })?;
    if !n_band.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dyadic band index must be a power of two, got {n_band}"
        )));
    }
    let spectrum = forward_transform(f)?;
    let lo = n_band as f64;
    let hi = 2.0 * lo;
    let projected = spectrum.map_multiplier(|k| {
        let a = k.abs();
        if a >= lo && a < hi {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(backward_transform(&projected))
}

/// Low-frequency projection `P_{≤1}` retaining modes `|k| ≤ 1`.
pub fn littlewood_paley_low(f: &ComplexField) -> Result<ComplexField> {
    f.grid().as_torus().map_err(|_| {
        Error::Unsupported("Littlewood-Paley projections are defined on torus fields".into())
    })?;
    let spectrum = forward_transform(f)?;
    let projected = spectrum.map_multiplier(|k| {
        if k.abs() <= 1.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(backward_transform(&projected))
}

/// Evaluate the Fourier series of a 2π-periodic torus field at the line
/// grid's collocation points. Exact trigonometric interpolation: torus
/// mode `k` lands on line frequency slot `kK`.
pub fn resample_torus_to_line(w: &ComplexField, line: &crate::grid::LineGrid) -> Result<ComplexField> {
    let torus = w.grid().as_torus().map_err(|_| {
        Error::GridMismatch("resample source must live on a torus grid".into())
    })?;
    if !line.resolves_torus(torus) {
        return Err(Error::GridMismatch(format!(
            "line grid (n = {}, K = {}) does not resolve torus grid (n = {})",
            line.n(),
            line.half_length_multiplier(),
            torus.n()
        )));
    }
    let spectrum = forward_transform(w)?;
    let k_mult = line.half_length_multiplier() as i64;
    let n_line = line.n() as i64;
    // Reconstruction on the line carries Δξ/2π = 1/(2L); embed torus
    // coefficients scaled by 2L so the series values match exactly.
    let two_l = 2.0 * line.half_length();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); line.n()];
    for i in 0..torus.n() {
        let k = torus.wavenumber_at(i);
        let m = k * k_mult;
        let slot = if m >= 0 { m } else { m + n_line } as usize;
        coeffs[slot] = spectrum.coeff_at_natural(i) * two_l;
    }
    let line_spectrum = Spectrum {
        grid: Grid::Line(*line),
        coeffs,
    };
    Ok(backward_transform(&line_spectrum))
}

/// Two-thirds-rule dealiasing: zero all modes with `|index| > n/3`.
pub fn dealias_mask(s: &Spectrum) -> Spectrum {
    let n = s.n();
    let cutoff = n / 3;
    let grid = s.grid;
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let idx = match grid {
                Grid::Torus(g) => g.wavenumber_at(i),
                Grid::Line(g) => g.freq_index_at(i),
            };
            if idx.unsigned_abs() as usize > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
        .collect();
    Spectrum { grid, coeffs }
}
