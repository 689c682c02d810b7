//! Collocation grids for the torus and the truncated line.
//!
//! The torus is the circle of circumference 2π sampled at `n` equispaced
//! points. The line is truncated to `[-L, L)` with `L = πK` for an integer
//! `K ≥ 2`, so every 2π-periodic function resamples exactly onto the line
//! grid: the torus wavenumber `k` lands on the line frequency index `kK`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const TORUS_PERIOD: f64 = 2.0 * PI;

/// Periodic grid on the circle ℝ/2πℤ with points `x_i = i·2π/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    /// `n` must be a power of two, at least 16.
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::InvalidParameter(format!(
                "torus grid size must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        TORUS_PERIOD / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }

    /// Integer wavenumber of the mode stored at FFT-natural index `i`.
    pub fn wavenumber_at(&self, i: usize) -> i64 {
        let half = (self.n / 2) as i64;
        let i = i as i64;
        if i < half {
            i
        } else {
            i - self.n as i64
        }
    }

    /// Wavenumbers in ascending order, `-n/2 ..= n/2 - 1`.
    pub fn wavenumbers_sorted(&self) -> Vec<i64> {
        let half = (self.n / 2) as i64;
        (-half..half).collect()
    }
}

/// Periodic truncation of the line to `[-L, L)` with `L = πK`, points
/// `x_j = -L + j·2L/n` and frequencies `ξ_m = πm/L = m/K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LineGrid {
    n: usize,
    k: u32,
}

impl LineGrid {
    /// `n` must be a power of two; `half_length = πk` requires `k ≥ 2`.
    pub fn new(n: usize, k: u32) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::InvalidParameter(format!(
                "line grid size must be a power of two >= 16, got {n}"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "line half-length multiplier must be >= 2, got {k}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer `K` with `L = πK`.
    pub fn half_length_multiplier(&self) -> u32 {
        self.k
    }

    pub fn half_length(&self) -> f64 {
        PI * self.k as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length() / self.n as f64
    }

    /// Frequency spacing Δξ = π/L = 1/K.
    pub fn dxi(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_length() + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    /// Signed frequency index of FFT-natural slot `i`.
    pub fn freq_index_at(&self, i: usize) -> i64 {
        let half = (self.n / 2) as i64;
        let i = i as i64;
        if i < half {
            i
        } else {
            i - self.n as i64
        }
    }

    /// Continuum frequency ξ of FFT-natural slot `i`.
    pub fn frequency_at(&self, i: usize) -> f64 {
        self.freq_index_at(i) as f64 * self.dxi()
    }

    /// Frequencies in ascending order.
    pub fn frequencies_sorted(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        (-half..half).map(|m| m as f64 * self.dxi()).collect()
    }

    /// True when this grid carries every mode of `torus` with a factor-two
    /// frequency margin: `n/(2K) ≥ n_torus`.
    pub fn resolves_torus(&self, torus: &TorusGrid) -> bool {
        self.n / (2 * self.k as usize) >= torus.n()
    }
}

/// Either grid type; fields carry one of these by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grid {
    Torus(TorusGrid),
    Line(LineGrid),
}

impl Grid {
    pub fn n(&self) -> usize {
        match self {
            Grid::Torus(g) => g.n(),
            Grid::Line(g) => g.n(),
        }
    }

    pub fn dx(&self) -> f64 {
        match self {
            Grid::Torus(g) => g.dx(),
            Grid::Line(g) => g.dx(),
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        match self {
            Grid::Torus(g) => g.point(i),
            Grid::Line(g) => g.point(i),
        }
    }

    /// Continuum frequency of FFT-natural slot `i` (integer `k` on the
    /// torus, `m/K` on the line).
    pub fn frequency_at(&self, i: usize) -> f64 {
        match self {
            Grid::Torus(g) => g.wavenumber_at(i) as f64,
            Grid::Line(g) => g.frequency_at(i),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Grid::Torus(_))
    }

    pub fn as_torus(&self) -> Result<&TorusGrid> {
        match self {
            Grid::Torus(g) => Ok(g),
            Grid::Line(_) => Err(Error::Unsupported(
                "operation is defined on torus grids only".into(),
            )),
        }
    }

    pub fn as_line(&self) -> Result<&LineGrid> {
        match self {
            Grid::Line(g) => Ok(g),
            Grid::Torus(_) => Err(Error::Unsupported(
                "operation is defined on line grids only".into(),
            )),
        }
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "expected identical grids, got {self:?} and {other:?}"
            )))
        }
    }
}
