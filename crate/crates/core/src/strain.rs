//! Velocity-gradient stencils shared by the viscous force and the
//! dissipation diagnostics.
//!
//! Normal strains live at cell centers, shear strains at mesh nodes. The
//! tangential velocity takes an odd ghost across the walls, so it vanishes
//! on the boundary. Nodes carry trapezoidal weights (1/2 on edges, 1/4 at
//! corners). The viscous force is the exact negative gradient of half the
//! discrete dissipation, which makes its work on any velocity field equal
//! to minus the dissipation.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Grid, VectorField};

pub(crate) struct Strain {
    /// `du/dx` at cells.
    pub ux: Vec<f64>,
    /// `dv/dy` at cells.
    pub vy: Vec<f64>,
    /// `du/dy` at nodes.
    pub uy: Vec<f64>,
    /// `dv/dx` at nodes.
    pub vx: Vec<f64>,
}

#[inline]
pub(crate) fn node_idx(g: &Grid, i: usize, j: usize) -> usize {
    j * (g.nx() + 1) + i
}

pub(crate) fn node_weight(g: &Grid, i: usize, j: usize) -> f64 {
    let wx = if i == 0 || i == g.nx() { 0.5 } else { 1.0 };
    let wy = if j == 0 || j == g.ny() { 0.5 } else { 1.0 };
    wx * wy
}

/// Faces entering `du/dy` at node `(i, j)`: `(above, sign_above, below, sign_below)`.
#[inline]
fn uy_stencil(g: &Grid, i: usize, j: usize) -> (usize, f64, usize, f64) {
    let (above, sa) = if j == g.ny() {
        (g.u_idx(i, j - 1), -1.0)
    } else {
        (g.u_idx(i, j), 1.0)
    };
    let (below, sb) = if j == 0 {
        (g.u_idx(i, 0), -1.0)
    } else {
        (g.u_idx(i, j - 1), 1.0)
    };
    (above, sa, below, sb)
}

#[inline]
fn vx_stencil(g: &Grid, i: usize, j: usize) -> (usize, f64, usize, f64) {
    let (right, sr) = if i == g.nx() {
        (g.v_idx(i - 1, j), -1.0)
    } else {
        (g.v_idx(i, j), 1.0)
    };
    let (left, sl) = if i == 0 {
        (g.v_idx(0, j), -1.0)
    } else {
        (g.v_idx(i - 1, j), 1.0)
    };
    (right, sr, left, sl)
}

pub(crate) fn strain(vel: &VectorField) -> Strain {
    let g = *vel.grid();
    let (nx, ny, hx, hy) = (g.nx(), g.ny(), g.hx(), g.hy());
    let (u, v) = (vel.u(), vel.v());
    let mut ux = vec![0.0; g.cells()];
    let mut vy = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            ux[g.idx(i, j)] = (u[g.u_idx(i + 1, j)] - u[g.u_idx(i, j)]) / hx;
            vy[g.idx(i, j)] = (v[g.v_idx(i, j + 1)] - v[g.v_idx(i, j)]) / hy;
        }
    }
    let nodes = (nx + 1) * (ny + 1);
    let mut uy = vec![0.0; nodes];
    let mut vx = vec![0.0; nodes];
    for j in 0..=ny {
        for i in 0..=nx {
            let (a, sa, b, sb) = uy_stencil(&g, i, j);
            uy[node_idx(&g, i, j)] = (sa * u[a] - sb * u[b]) / hy;
            let (r, sr, l, sl) = vx_stencil(&g, i, j);
            vx[node_idx(&g, i, j)] = (sr * v[r] - sl * v[l]) / hx;
        }
    }
    Strain { ux, vy, uy, vx }
}

/// Cell values averaged onto nodes (only existing neighbours count).
pub(crate) fn cells_to_nodes(g: &Grid, cell: &[f64]) -> Vec<f64> {
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let mut sum = 0.0;
            let mut count = 0.0;
            for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
                if ci < nx && cj < ny {
                    sum += cell[g.idx(ci, cj)];
                    count += 1.0;
                }
            }
            out[node_idx(g, i, j)] = sum / count;
        }
    }
    out
}

/// `sum nu |D u|^2 hx hy` with `D u` the symmetric gradient.
pub(crate) fn viscous_dissipation(vel: &VectorField, nu_cells: &[f64]) -> f64 {
    let g = *vel.grid();
    let s = strain(vel);
    let nu_nodes = cells_to_nodes(&g, nu_cells);
    let mut cells = 0.0;
    for k in 0..g.cells() {
        cells += nu_cells[k] * (s.ux[k] * s.ux[k] + s.vy[k] * s.vy[k]);
    }
    let mut nodes = 0.0;
    for j in 0..=g.ny() {
        for i in 0..=g.nx() {
            let n = node_idx(&g, i, j);
            let dxy = 0.5 * (s.uy[n] + s.vx[n]);
            nodes += node_weight(&g, i, j) * nu_nodes[n] * 2.0 * dxy * dxy;
        }
    }
    (cells + nodes) * g.cell_volume()
}

/// `sum |grad u|^2 hx hy` over all four velocity-gradient components.
pub(crate) fn velocity_gradient_sq(vel: &VectorField) -> f64 {
    let g = *vel.grid();
    let s = strain(vel);
    let mut total = 0.0;
    for k in 0..g.cells() {
        total += s.ux[k] * s.ux[k] + s.vy[k] * s.vy[k];
    }
    for j in 0..=g.ny() {
        for i in 0..=g.nx() {
            let n = node_idx(&g, i, j);
            total += node_weight(&g, i, j) * (s.uy[n] * s.uy[n] + s.vx[n] * s.vx[n]);
        }
    }
    total * g.cell_volume()
}

/// Discrete `div(nu D u)` on faces, the negative face-gradient of half of
/// [`viscous_dissipation`] divided by the cell volume.
pub(crate) fn viscous_force(vel: &VectorField, nu_cells: &[f64]) -> VectorField {
    let g = *vel.grid();
    let (nx, ny, hx, hy) = (g.nx(), g.ny(), g.hx(), g.hy());
    let s = strain(vel);
    let nu_nodes = cells_to_nodes(&g, nu_cells);
    let mut du = vec![0.0; g.u_faces()];
    let mut dv = vec![0.0; g.v_faces()];
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            let a = nu_cells[k] * s.ux[k] / hx;
            du[g.u_idx(i + 1, j)] += a;
            du[g.u_idx(i, j)] -= a;
            let b = nu_cells[k] * s.vy[k] / hy;
            dv[g.v_idx(i, j + 1)] += b;
            dv[g.v_idx(i, j)] -= b;
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            let n = node_idx(&g, i, j);
            let dxy = 0.5 * (s.uy[n] + s.vx[n]);
            // d(2 Dxy^2)/dDxy = 4 Dxy, times 1/2 from Phi = D/2, times dDxy/d(uy) = 1/2
            let coef = node_weight(&g, i, j) * nu_nodes[n] * dxy;
            let (a, sa, b, sb) = uy_stencil(&g, i, j);
            du[a] += coef * sa / hy;
            du[b] -= coef * sb / hy;
            let (r, sr, l, sl) = vx_stencil(&g, i, j);
            dv[r] += coef * sr / hx;
            dv[l] -= coef * sl / hx;
        }
    }
    du.iter_mut().for_each(|x| *x = -*x);
    dv.iter_mut().for_each(|x| *x = -*x);
    VectorField::from_components(g, du, dv).expect("face counts follow the grid")
}
