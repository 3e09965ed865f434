use super::Grid;

/// Cell averages `u(x, s)` at one instant, stored x-major then s.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_cells()],
        }
    }

    /// Samples `f(x, s)` at cell centres.
    pub fn from_fn<F: Fn(&[f64], f64) -> f64>(grid: Grid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.n_cells());
        for ix in 0..grid.n_space() {
            let x = grid.x_coords(ix);
            for j in 0..grid.ns {
                values.push(f(&x[..grid.d], grid.s_center(j)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.n_cells(),
            "field length does not match grid"
        );
        Self { grid, values }
    }

    #[inline]
    pub fn index(&self, ix: usize, j: usize) -> usize {
        ix * self.grid.ns + j
    }

    #[inline]
    pub fn at(&self, ix: usize, j: usize) -> f64 {
        self.values[ix * self.grid.ns + j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `L^1(Omega x (0,S))` norm by cell sums.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `||self - other||_{L^1}`; panics if the grids differ in shape.
    pub fn l1_distance(&self, other: &Field) -> f64 {
        assert!(self.grid.same_shape(&other.grid), "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    /// Values of the cell row adjacent to `s = 0` (`first = true`) or `s = S`.
    pub fn s_row(&self, first: bool) -> Vec<f64> {
        let j = if first { 0 } else { self.grid.ns - 1 };
        (0..self.grid.n_space()).map(|ix| self.at(ix, j)).collect()
    }
}
