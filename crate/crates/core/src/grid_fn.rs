//! Functions sampled on an orbit grid, with a validity mask.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::orbit::{Grid, OrbitGrid};

/// Complex samples on a grid. Entries outside the validity window carry no
/// information; every operation propagates the mask instead of zero padding.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
    valid: Vec<bool>,
    label: String,
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl GridFunction {
    /// Builds from raw values; non-finite entries are masked.
    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count must match grid length");
        let valid = values.iter().map(|v| v.re.is_finite() && v.im.is_finite()).collect();
        Self { grid: grid.clone(), values, valid, label: String::new() }
    }

    pub fn from_parts(grid: &Grid, values: Vec<Complex64>, valid: Vec<bool>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(valid.len(), grid.len());
        let valid = valid
            .into_iter()
            .zip(&values)
            .map(|(m, v)| m && v.re.is_finite() && v.im.is_finite())
            .collect();
        Self { grid: grid.clone(), values, valid, label: String::new() }
    }

    pub fn from_real(grid: &Grid, values: Vec<f64>) -> Self {
        Self::from_values(grid, values.into_iter().map(c).collect())
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_values(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(grid, grid.points().into_iter().map(|x| c(f(x))).collect())
    }

    /// Samples indexed by flat grid index.
    pub fn from_index_fn(grid: &Grid, f: impl Fn(usize) -> Complex64) -> Self {
        Self::from_values(grid, (0..grid.len()).map(f).collect())
    }

    pub fn constant(grid: &Grid, v: f64) -> Self {
        Self::from_real(grid, vec![v; grid.len()])
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::from_real(grid, grid.points())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    #[inline]
    pub fn re(&self, i: usize) -> f64 {
        self.values[i].re
    }

    #[inline]
    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    /// Value if valid.
    pub fn get(&self, i: usize) -> Option<Complex64> {
        self.valid[i].then_some(self.values[i])
    }

    pub fn valid_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.valid[i]).collect()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn on_grid(&self, grid: &OrbitGrid) -> bool {
        std::ptr::eq(Arc::as_ptr(&self.grid), grid)
    }

    /// Pointwise map; the mask is kept and non-finite results are masked.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_parts(&self.grid, values, self.valid.clone())
    }

    /// Pointwise map with access to the grid point.
    pub fn map_x(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let xs = self.grid.points();
        let values = self.values.iter().zip(xs).map(|(&v, x)| f(x, v)).collect();
        Self::from_parts(&self.grid, values, self.valid.clone())
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        let valid = self.valid.iter().zip(&other.valid).map(|(&a, &b)| a && b).collect();
        Ok(Self::from_parts(&self.grid, values, valid))
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale_by(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    /// Masks everything outside `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let valid = (0..self.len()).map(|i| self.valid[i] && keep(i)).collect();
        Self { valid, ..self.clone() }
    }

    /// Same mask as `other` intersected with ours.
    pub fn restrict_to(&self, other: &GridFunction) -> Self {
        self.restrict(|i| other.valid[i])
    }

    /// Replaces masked entries by zero and marks them valid. Only for building
    /// finitely supported probe functions.
    pub fn zero_filled(&self) -> Self {
        let values =
            (0..self.len()).map(|i| if self.valid[i] { self.values[i] } else { c(0.0) }).collect();
        Self { values, valid: vec![true; self.len()], ..self.clone() }
    }

    /// `(T^steps f)[n] = f[n + steps]` along the orbit; entries whose source
    /// falls off the stored segment are masked.
    pub fn shift(&self, steps: isize) -> Self {
        let mut values = vec![c(f64::NAN); self.len()];
        let mut valid = vec![false; self.len()];
        for i in 0..self.len() {
            if let Some(j) = self.grid.neighbor(i, steps) {
                values[i] = self.values[j];
                valid[i] = self.valid[j];
            }
        }
        Self { grid: self.grid.clone(), values, valid, label: self.label.clone() }
    }

    /// `max(1, sup |f|)` over the valid window.
    pub fn scale(&self) -> f64 {
        self.sup_norm().max(1.0)
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).filter(|&i| self.valid[i]).map(|i| self.values[i].norm()).fold(0.0, f64::max)
    }

    /// `max |f - g|` over the common valid window.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        assert!(self.same_grid(other), "grid mismatch");
        (0..self.len())
            .filter(|&i| self.valid[i] && other.valid[i])
            .map(|i| (self.values[i] - other.values[i]).norm())
            .fold(0.0, f64::max)
    }
}

fn binary(a: &GridFunction, b: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridFunction {
    a.zip_with(b, f).expect("grid functions live on different grids")
}

macro_rules! impl_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&GridFunction> for &GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: &GridFunction) -> GridFunction {
                binary(self, rhs, |a, b| a $op b)
            }
        }
        impl $tr<GridFunction> for GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: GridFunction) -> GridFunction {
                binary(&self, &rhs, |a, b| a $op b)
            }
        }
        impl $tr<&GridFunction> for GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: &GridFunction) -> GridFunction {
                binary(&self, rhs, |a, b| a $op b)
            }
        }
        impl $tr<GridFunction> for &GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: GridFunction) -> GridFunction {
                binary(self, &rhs, |a, b| a $op b)
            }
        }
        impl $tr<f64> for &GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: f64) -> GridFunction {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<f64> for GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: f64) -> GridFunction {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<Complex64> for &GridFunction {
            type Output = GridFunction;
            fn $m(self, rhs: Complex64) -> GridFunction {
                self.map(|a| a $op rhs)
            }
        }
    };
}

impl_op!(Add, add, +);
impl_op!(Sub, sub, -);
impl_op!(Mul, mul, *);
impl_op!(Div, div, /);

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|a| -a)
    }
}

impl Neg for GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|a| -a)
    }
}
