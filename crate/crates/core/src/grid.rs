//! Staggered mesh, field containers and the discrete calculus.
//!
//! Cell `(i, j)` has center `((i + 1/2) hx, (j + 1/2) hy)`. The `u` component
//! lives on vertical faces `(i, j)`, `i in 0..=nx`, at `(i hx, (j + 1/2) hy)`;
//! the `v` component on horizontal faces `(i, j)`, `j in 0..=ny`, at
//! `((i + 1/2) hx, j hy)`. Storage is row-major with `i` fastest.
//!
//! Boundary values enter through one ghost layer: a mirror copy for
//! [`BoundaryKind::NeumannZero`] and an odd reflection for
//! [`BoundaryKind::DirichletZero`].

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < Self::MIN_CELLS || ny < Self::MIN_CELLS {
            return Err(Error::InvalidGrid("need at least 4 cells per direction"));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid("domain extents must be positive and finite"));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
        })
    }

    /// Unit square with `n x n` cells.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn h_min(&self) -> f64 {
        self.hx.min(self.hy)
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
    pub fn u_faces(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn v_faces(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx
    }
    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    #[inline]
    pub fn v_idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    NeumannZero,
    DirichletZero,
    None,
}

impl BoundaryKind {
    /// Multiplier turning the adjacent interior value into the ghost value.
    fn ghost_sign(self, op: &'static str) -> Result<f64> {
        match self {
            BoundaryKind::NeumannZero => Ok(1.0),
            BoundaryKind::DirichletZero => Ok(-1.0),
            BoundaryKind::None => Err(Error::BoundaryUnset { op }),
        }
    }
}

/// Values at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    boundary: BoundaryKind,
}

impl ScalarField {
    pub fn zeros(grid: Grid, boundary: BoundaryKind) -> Self {
        Self::constant(grid, 0.0, boundary)
    }

    pub fn constant(grid: Grid, value: f64, boundary: BoundaryKind) -> Self {
        Self {
            grid,
            values: vec![value; grid.cells()],
            boundary,
        }
    }

    /// Samples `f(x, y)` at cell centers.
    pub fn from_fn(grid: Grid, boundary: BoundaryKind, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.cells());
        for j in 0..grid.ny {
            let y = grid.y_center(j);
            for i in 0..grid.nx {
                values.push(f(grid.x_center(i), y));
            }
        }
        Self {
            grid,
            values,
            boundary,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>, boundary: BoundaryKind) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::LengthMismatch {
                expected: grid.cells(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            boundary,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }
    pub fn with_boundary(mut self, boundary: BoundaryKind) -> Self {
        self.boundary = boundary;
        self
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &x| m.max(libm::fabs(x)))
    }
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }
    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_volume()
    }
    /// L2 inner product, `sum f g hx hy`.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        dot(&self.values, &other.values) * self.grid.cell_volume()
    }
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
            boundary: self.boundary,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }
}

/// Face-centered vector field (or face coefficient set).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0, 0.0)
    }

    pub fn constant(grid: Grid, u: f64, v: f64) -> Self {
        Self {
            grid,
            u: vec![u; grid.u_faces()],
            v: vec![v; grid.v_faces()],
        }
    }

    /// Samples `fu` on u-faces and `fv` on v-faces.
    pub fn from_fn(
        grid: Grid,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let (hx, hy) = (grid.hx, grid.hy);
        let mut u = Vec::with_capacity(grid.u_faces());
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                u.push(fu(i as f64 * hx, grid.y_center(j)));
            }
        }
        let mut v = Vec::with_capacity(grid.v_faces());
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                v.push(fv(grid.x_center(i), j as f64 * hy));
            }
        }
        Self { grid, u, v }
    }

    pub fn from_components(grid: Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.u_faces() {
            return Err(Error::LengthMismatch {
                expected: grid.u_faces(),
                got: u.len(),
            });
        }
        if v.len() != grid.v_faces() {
            return Err(Error::LengthMismatch {
                expected: grid.v_faces(),
                got: v.len(),
            });
        }
        Ok(Self { grid, u, v })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }
    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }
    pub fn get_u(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.u_idx(i, j)]
    }
    pub fn get_v(&self, i: usize, j: usize) -> f64 {
        self.v[self.grid.v_idx(i, j)]
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, &x| m.max(libm::fabs(x)))
    }
    pub fn max_abs_v(&self) -> f64 {
        self.v.iter().fold(0.0, |m, &x| m.max(libm::fabs(x)))
    }

    /// Face inner product, every face weighted by `hx hy`.
    pub fn dot(&self, other: &VectorField) -> f64 {
        (dot(&self.u, &other.u) + dot(&self.v, &other.v)) * self.grid.cell_volume()
    }

    pub fn scale(&mut self, factor: f64) {
        self.u.iter_mut().for_each(|x| *x *= factor);
        self.v.iter_mut().for_each(|x| *x *= factor);
    }

    /// Zeroes the wall-normal faces.
    pub fn enforce_no_slip(&mut self) {
        let g = self.grid;
        for j in 0..g.ny {
            self.u[g.u_idx(0, j)] = 0.0;
            self.u[g.u_idx(g.nx, j)] = 0.0;
        }
        for i in 0..g.nx {
            self.v[g.v_idx(i, 0)] = 0.0;
            self.v[g.v_idx(i, g.ny)] = 0.0;
        }
    }

    pub fn has_no_slip(&self) -> bool {
        let g = self.grid;
        (0..g.ny).all(|j| self.u[g.u_idx(0, j)] == 0.0 && self.u[g.u_idx(g.nx, j)] == 0.0)
            && (0..g.nx).all(|i| self.v[g.v_idx(i, 0)] == 0.0 && self.v[g.v_idx(i, g.ny)] == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    /// Components averaged to cell centers.
    pub fn center_components(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid;
        let mut uc = Vec::with_capacity(g.cells());
        let mut vc = Vec::with_capacity(g.cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                uc.push(0.5 * (self.u[g.u_idx(i, j)] + self.u[g.u_idx(i + 1, j)]));
                vc.push(0.5 * (self.v[g.v_idx(i, j)] + self.v[g.v_idx(i, j + 1)]));
            }
        }
        (uc, vc)
    }
}

/// One time slice of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField,
    pub p: ScalarField,
    pub phi: ScalarField,
    pub mu: ScalarField,
}

impl State {
    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_finite(op: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { op, index }),
        None => Ok(()),
    }
}

fn check_field(op: &'static str, f: &ScalarField) -> Result<()> {
    check_finite(op, &f.values)
}

fn check_vector(op: &'static str, f: &VectorField) -> Result<()> {
    check_finite(op, &f.u)?;
    check_finite(op, &f.v)
}

// ---------------------------------------------------------------------------
// slice kernels

/// Center-to-face differences. `sign` is the ghost multiplier.
pub(crate) fn gradient_into(g: &Grid, sign: f64, f: &[f64], gu: &mut [f64], gv: &mut [f64]) {
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    for j in 0..ny {
        let row = j * nx;
        for i in 0..=nx {
            let left = if i == 0 { sign * f[row] } else { f[row + i - 1] };
            let right = if i == nx {
                sign * f[row + nx - 1]
            } else {
                f[row + i]
            };
            gu[j * (nx + 1) + i] = (right - left) / hx;
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let below = if j == 0 { sign * f[i] } else { f[(j - 1) * nx + i] };
            let above = if j == ny {
                sign * f[(ny - 1) * nx + i]
            } else {
                f[j * nx + i]
            };
            gv[j * nx + i] = (above - below) / hy;
        }
    }
}

pub(crate) fn divergence_into(g: &Grid, u: &[f64], v: &[f64], out: &mut [f64]) {
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    for j in 0..ny {
        for i in 0..nx {
            let ul = u[j * (nx + 1) + i];
            let ur = u[j * (nx + 1) + i + 1];
            let vb = v[j * nx + i];
            let vt = v[(j + 1) * nx + i];
            out[j * nx + i] = (ur - ul) / hx + (vt - vb) / hy;
        }
    }
}

/// Fused `divergence(gradient(f))`; every floating-point operation matches
/// the two-pass path, so the results are bit-identical.
pub(crate) fn laplacian_into(g: &Grid, sign: f64, f: &[f64], out: &mut [f64]) {
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    for j in 0..ny {
        for i in 0..nx {
            let c = f[j * nx + i];
            let w = if i == 0 { sign * c } else { f[j * nx + i - 1] };
            let e = if i == nx - 1 { sign * c } else { f[j * nx + i + 1] };
            let s = if j == 0 { sign * c } else { f[(j - 1) * nx + i] };
            let n = if j == ny - 1 { sign * c } else { f[(j + 1) * nx + i] };
            let gl = (c - w) / hx;
            let gr = (e - c) / hx;
            let gb = (c - s) / hy;
            let gt = (n - c) / hy;
            out[j * nx + i] = (gr - gl) / hx + (gt - gb) / hy;
        }
    }
}

/// Flux-form first-order upwind convective term `div(u f)`; walls carry no flux.
pub(crate) fn advect_into(g: &Grid, f: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    let upwind = |vel: f64, behind: f64, ahead: f64| {
        if vel > 0.0 {
            vel * behind
        } else {
            vel * ahead
        }
    };
    for j in 0..ny {
        for i in 0..nx {
            let c = f[j * nx + i];
            let fl = if i == 0 {
                0.0
            } else {
                upwind(u[j * (nx + 1) + i], f[j * nx + i - 1], c)
            };
            let fr = if i == nx - 1 {
                0.0
            } else {
                upwind(u[j * (nx + 1) + i + 1], c, f[j * nx + i + 1])
            };
            let fb = if j == 0 {
                0.0
            } else {
                upwind(v[j * nx + i], f[(j - 1) * nx + i], c)
            };
            let ft = if j == ny - 1 {
                0.0
            } else {
                upwind(v[(j + 1) * nx + i], c, f[(j + 1) * nx + i])
            };
            out[j * nx + i] = (fr - fl) / hx + (ft - fb) / hy;
        }
    }
}

// ---------------------------------------------------------------------------
// field-level operations

pub fn gradient(f: &ScalarField) -> Result<VectorField> {
    let sign = f.boundary.ghost_sign("gradient")?;
    let g = f.grid;
    let mut out = VectorField::zeros(g);
    gradient_into(&g, sign, &f.values, &mut out.u, &mut out.v);
    check_vector("gradient", &out)?;
    Ok(out)
}

pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let g = v.grid;
    let mut out = ScalarField::zeros(g, BoundaryKind::None);
    divergence_into(&g, &v.u, &v.v, &mut out.values);
    check_field("divergence", &out)?;
    Ok(out)
}

/// Same grid check used by the multi-field operations.
pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `divergence(gradient(f))`, keeping the boundary kind of `f`.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let sign = f.boundary.ghost_sign("laplacian")?;
    let g = f.grid;
    let mut out = ScalarField::zeros(g, f.boundary);
    laplacian_into(&g, sign, &f.values, &mut out.values);
    check_field("laplacian", &out)?;
    Ok(out)
}

pub fn advect_scalar(f: &ScalarField, u: &VectorField) -> Result<ScalarField> {
    same_grid(&f.grid, &u.grid)?;
    let g = f.grid;
    let mut out = ScalarField::zeros(g, BoundaryKind::None);
    advect_into(&g, &f.values, &u.u, &u.v, &mut out.values);
    check_field("advect_scalar", &out)?;
    Ok(out)
}

/// Arithmetic mean of the two neighbouring centers; boundary faces copy
/// the adjacent cell.
pub fn interpolate_center_to_face(f: &ScalarField) -> VectorField {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let fv = &f.values;
    let mut out = VectorField::zeros(g);
    for j in 0..ny {
        for i in 0..=nx {
            out.u[g.u_idx(i, j)] = if i == 0 {
                fv[g.idx(0, j)]
            } else if i == nx {
                fv[g.idx(nx - 1, j)]
            } else {
                0.5 * (fv[g.idx(i - 1, j)] + fv[g.idx(i, j)])
            };
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            out.v[g.v_idx(i, j)] = if j == 0 {
                fv[g.idx(i, 0)]
            } else if j == ny {
                fv[g.idx(i, ny - 1)]
            } else {
                0.5 * (fv[g.idx(i, j - 1)] + fv[g.idx(i, j)])
            };
        }
    }
    out
}

/// Largest cellwise `|div u|`.
pub fn max_abs_divergence(v: &VectorField) -> f64 {
    let g = v.grid;
    let mut out = vec![0.0; g.cells()];
    divergence_into(&g, &v.u, &v.v, &mut out);
    out.iter().fold(0.0, |m, &x| m.max(libm::fabs(x)))
}
