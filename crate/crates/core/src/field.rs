//! Sampled complex-valued functions on a grid.
//!
//! A [`ComplexField`] is an immutable value: operations return new fields.
//! Every constructor enforces that all samples are finite; a NaN or
//! infinity anywhere is a hard error, never a silent propagation.

use crate::error::{Error, Result};
use crate::grid::Grid;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Wrap raw samples; fails on length mismatch or non-finite entries.
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.ensure_finite()?;
        Ok(field)
    }

    /// Sample a function of the grid coordinate.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.point(i))).collect();
        Self::from_values(grid, values)
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidField("non-finite sample".into()))
        }
    }

    pub fn ensure_same_grid(&self, other: &ComplexField) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }

    /// Pointwise map over samples, keeping the grid.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Pointwise combination of two same-grid fields. Panics on grid
    /// mismatch; public entry points validate grids first.
    pub fn zip_with(
        &self,
        other: &ComplexField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> ComplexField {
        assert_eq!(self.grid, other.grid, "zip_with requires identical grids");
        ComplexField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &ComplexField) -> ComplexField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> ComplexField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        self.map(|z| c * z)
    }

    /// Collocation quadrature of a pointwise functional: `Σ f(z_i) · dx`.
    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().map(|&z| f(z)).sum::<f64>() * dx
    }

    /// Discrete L² norm `(Σ |f|² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.integrate(|z| z.norm_sqr()).sqrt()
    }

    /// Max of |f| over the grid.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn torus16() -> Grid {
        Grid::Torus(TorusGrid::new(16).unwrap())
    }

    #[test]
    fn from_values_rejects_wrong_length() {
        let err = ComplexField::from_values(torus16(), vec![Complex64::new(1.0, 0.0); 5]);
        assert!(matches!(err, Err(Error::InvalidField(_))));
    }

    #[test]
    fn from_values_rejects_non_finite() {
        let mut vals = vec![Complex64::new(0.0, 0.0); 16];
        vals[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexField::from_values(torus16(), vals),
            Err(Error::InvalidField(_))
        ));
    }

    #[test]
    fn integrate_constant_over_torus_gives_period_times_value() {
        let f = ComplexField::from_fn(torus16(), |_| Complex64::new(2.0, 0.0)).unwrap();
        let total = f.integrate(|z| z.re);
        assert!((total - 2.0 * std::f64::consts::TAU).abs() < 1e-12);
    }
}
