//! Structured cell-centered grids on an interval or rectangle, and scalar /
//! vector functions sampled on them.
//!
//! Homogeneous Neumann boundaries are realized by ghost-cell reflection
//! (ghost value = adjacent interior value), which makes every one-sided
//! boundary flux exactly zero. A 1D grid is stored as a single row with
//! unit depth in the inactive axis, so cell volume reduces to the spacing.

use crate::{Result, SimError};

/// Cell-centered box grid in one or two dimensions.
///
/// Values are stored row-major with axis 0 (x) slowest: index `ix*ny + iy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dx: f64,
    dy: f64,
}

impl Grid {
    /// 1D interval [0, lx] with `nx` cells.
    pub fn new_1d(lx: f64, nx: usize) -> Result<Self> {
        if !(lx > 0.0) || !lx.is_finite() {
            return Err(SimError::InvalidInput(format!(
                "extent must be positive and finite, got {lx}"
            )));
        }
        if nx < 3 {
            return Err(SimError::InvalidInput(format!(
                "at least 3 cells per axis required, got {nx}"
            )));
        }
        Ok(Grid {
            dim: 1,
            nx,
            ny: 1,
            lx,
            ly: 1.0,
            dx: lx / nx as f64,
            dy: 1.0,
        })
    }

    /// 2D rectangle [0, lx] × [0, ly] with `nx × ny` cells.
    pub fn new_2d(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        for (name, l) in [("x extent", lx), ("y extent", ly)] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(SimError::InvalidInput(format!(
                    "{name} must be positive and finite, got {l}"
                )));
            }
        }
        if nx < 3 || ny < 3 {
            return Err(SimError::InvalidInput(format!(
                "at least 3 cells per axis required, got {nx}x{ny}"
            )));
        }
        Ok(Grid {
            dim: 2,
            nx,
            ny,
            lx,
            ly,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.dy
    }

    #[inline]
    pub fn extent_x(&self) -> f64 {
        self.lx
    }

    #[inline]
    pub fn extent_y(&self) -> f64 {
        self.ly
    }

    /// Volume (length in 1D, area in 2D) of one cell.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    /// Smallest spacing over the active axes.
    #[inline]
    pub fn min_spacing(&self) -> f64 {
        if self.dim == 1 {
            self.dx
        } else {
            self.dx.min(self.dy)
        }
    }

    /// Flat index of cell (ix, iy); iy must be 0 on 1D grids.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        ix * self.ny + iy
    }

    /// Cell-center coordinate along x.
    #[inline]
    pub fn x_center(&self, ix: usize) -> f64 {
        (ix as f64 + 0.5) * self.dx
    }

    /// Cell-center coordinate along y.
    #[inline]
    pub fn y_center(&self, iy: usize) -> f64 {
        (iy as f64 + 0.5) * self.dy
    }
}

/// A scalar function sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Constant field.
    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.cell_count()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Builds a field from explicit values (length must match the grid).
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(SimError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f(x)` at cell centers of a 1D grid, or `f(x)` ignoring y in 2D.
    pub fn from_fn_1d(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(grid, |x, _y| f(x))
    }

    /// Samples `f(x, y)` at cell centers (y is 0.5·dy on 1D grids).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.cell_count());
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                values.push(f(grid.x_center(ix), grid.y_center(iy)));
            }
        }
        Field { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.idx(ix, iy)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Checks that `self` and `other` live on the same grid.
    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(SimError::GridMismatch(
                "fields live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise `self + scale * other`.
    pub fn add_scaled(&mut self, other: &Field, scale: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Field {
        let mut out = self.clone();
        out.scale(factor);
        out
    }
}

/// Cell-centered vector field (centered-difference gradient samples).
///
/// The y component is empty on 1D grids, so the total component count is
/// `dim × cell_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.cell_count();
        VectorField {
            grid,
            x: vec![0.0; n],
            y: if grid.dim() == 2 { vec![0.0; n] } else { Vec::new() },
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    #[inline]
    pub fn y_mut(&mut self) -> &mut [f64] {
        &mut self.y
    }

    /// Largest |component| over all cells and axes.
    pub fn max_component_abs(&self) -> f64 {
        let mx = self.x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let my = self.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        mx.max(my)
    }

    /// Pointwise dot product with another vector field on the same grid.
    pub fn dot(&self, other: &VectorField) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let mut values: Vec<f64> = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| a * b)
            .collect();
        if self.grid.dim() == 2 {
            for (v, (a, b)) in values.iter_mut().zip(self.y.iter().zip(&other.y)) {
                *v += a * b;
            }
        }
        Field {
            grid: self.grid,
            values,
        }
    }
}
