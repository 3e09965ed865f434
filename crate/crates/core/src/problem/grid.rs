use super::{Domain, ProblemError};

/// Uniform cell-centred grid on `(0,L)^d x (0,S)` with a uniform time step.
///
/// `dt` is zero until [`Grid::with_dt`] fixes the time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub d: usize,
    pub nx: usize,
    pub ns: usize,
    pub nt: usize,
    pub dx: f64,
    pub ds: f64,
    pub dt: f64,
    pub length: f64,
    pub s_end: f64,
    pub t_end: f64,
}

impl Grid {
    pub fn new(domain: &Domain, nx: usize, ns: usize) -> Result<Self, ProblemError> {
        if nx == 0 || ns == 0 {
            return Err(ProblemError::DegenerateGrid(format!(
                "Nx = {nx}, Ns = {ns}"
            )));
        }
        let dx = domain.length / nx as f64;
        let ds = domain.s_end / ns as f64;
        if !(dx > 0.0 && ds > 0.0) {
            return Err(ProblemError::DegenerateGrid(format!(
                "dx = {dx}, ds = {ds}"
            )));
        }
        Ok(Self {
            d: domain.d,
            nx,
            ns,
            nt: 0,
            dx,
            ds,
            dt: 0.0,
            length: domain.length,
            s_end: domain.s_end,
            t_end: domain.t_end,
        })
    }

    /// Largest uniform step not exceeding `dt_max` that divides `T` exactly.
    pub fn with_dt(mut self, dt_max: f64) -> Self {
        let nt = (self.t_end / dt_max).ceil().max(1.0) as usize;
        self.nt = nt;
        self.dt = self.t_end / nt as f64;
        self
    }

    /// Number of spatial cells, `Nx^d`.
    pub fn n_space(&self) -> usize {
        self.nx.pow(self.d as u32)
    }

    pub fn n_cells(&self) -> usize {
        self.n_space() * self.ns
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.d as i32) * self.ds
    }

    /// Measure of one spatial cell, `dx^d`.
    pub fn space_cell_measure(&self) -> f64 {
        self.dx.powi(self.d as i32)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn s_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.ds
    }

    pub fn t_at(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Cell-centre coordinates of the flattened spatial index.
    pub fn x_coords(&self, ix: usize) -> [f64; 2] {
        if self.d == 1 {
            [self.x_center(ix), 0.0]
        } else {
            [self.x_center(ix / self.nx), self.x_center(ix % self.nx)]
        }
    }

    /// Step index nearest to `tau`.
    pub fn tau_step(&self, tau: f64) -> usize {
        ((tau / self.dt).round() as usize).min(self.nt)
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.d == other.d && self.nx == other.nx && self.ns == other.ns
    }
}
