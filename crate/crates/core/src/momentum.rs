//! Velocity predictor and variable-density pressure projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::cahn_hilliard::check_density;
use crate::elliptic::{self, SolveReport};
use crate::grid::{self, BoundaryKind, Grid, ScalarField, State, VectorField};
use crate::materials::{viscosity, ViscosityLaw};
use crate::strain;
use crate::transport::advective_dt_limit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

/// Explicit viscous bound `0.25 h_min^2 min(rho) / nu_upper`.
pub fn viscous_dt_limit(grid: &Grid, rho_min: f64, law: &ViscosityLaw) -> f64 {
    0.25 * grid.h_min() * grid.h_min() * rho_min / law.nu_upper()
}

/// Cell-centered `grad(phi)` components and their node averages.
struct PhaseGradients {
    cx: Vec<f64>,
    cy: Vec<f64>,
    /// `phi_x * phi_y` at nodes.
    cross: Vec<f64>,
}

fn phase_gradients(phi: &ScalarField) -> Result<PhaseGradients> {
    let g = *phi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let grad = grid::gradient(phi)?;
    let mut cx = vec![0.0; g.cells()];
    let mut cy = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            cx[g.idx(i, j)] = 0.5 * (grad.get_u(i, j) + grad.get_u(i + 1, j));
            cy[g.idx(i, j)] = 0.5 * (grad.get_v(i, j) + grad.get_v(i, j + 1));
        }
    }
    // mirror ghosts: the face gradient just outside a wall equals the one inside
    let mut cross = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let jb = j.saturating_sub(1);
            let jt = j.min(ny - 1);
            let il = i.saturating_sub(1);
            let ir = i.min(nx - 1);
            let px = 0.5 * (grad.get_u(i, jb) + grad.get_u(i, jt));
            let py = 0.5 * (grad.get_v(il, j) + grad.get_v(ir, j));
            cross[strain::node_idx(&g, i, j)] = px * py;
        }
    }
    Ok(PhaseGradients { cx, cy, cross })
}

/// `|grad phi|^2` at cell centers from center-averaged components.
pub fn grad_phi_sq_centers(phi: &ScalarField) -> Result<ScalarField> {
    let pg = phase_gradients(phi)?;
    let vals = pg.cx.iter().zip(&pg.cy).map(|(x, y)| x * x + y * y).collect();
    ScalarField::from_values(*phi.grid(), vals, BoundaryKind::NeumannZero)
}

/// Capillary force `-div(grad phi (x) grad phi)` sampled on faces; wall
/// faces are zero.
pub fn korteweg_force(phi: &ScalarField) -> Result<VectorField> {
    let g = *phi.grid();
    let (nx, ny, hx, hy) = (g.nx(), g.ny(), g.hx(), g.hy());
    let pg = phase_gradients(phi)?;
    let mut out = VectorField::zeros(g);
    {
        let fu = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                let txx_r = pg.cx[g.idx(i, j)] * pg.cx[g.idx(i, j)];
                let txx_l = pg.cx[g.idx(i - 1, j)] * pg.cx[g.idx(i - 1, j)];
                let txy_t = pg.cross[strain::node_idx(&g, i, j + 1)];
                let txy_b = pg.cross[strain::node_idx(&g, i, j)];
                fu[g.u_idx(i, j)] = -((txx_r - txx_l) / hx + (txy_t - txy_b) / hy);
            }
        }
    }
    {
        let fv = out.v_mut();
        for j in 1..ny {
            for i in 0..nx {
                let tyy_t = pg.cy[g.idx(i, j)] * pg.cy[g.idx(i, j)];
                let tyy_b = pg.cy[g.idx(i, j - 1)] * pg.cy[g.idx(i, j - 1)];
                let txy_r = pg.cross[strain::node_idx(&g, i + 1, j)];
                let txy_l = pg.cross[strain::node_idx(&g, i, j)];
                fv[g.v_idx(i, j)] = -((txy_r - txy_l) / hx + (tyy_t - tyy_b) / hy);
            }
        }
    }
    grid::check_finite("korteweg_force", out.u())?;
    grid::check_finite("korteweg_force", out.v())?;
    Ok(out)
}

/// Centered `(u . grad) u` on interior faces, odd ghosts for the tangential
/// component across walls.
pub fn convective_term(vel: &VectorField) -> VectorField {
    let g = *vel.grid();
    let (nx, ny, hx, hy) = (g.nx(), g.ny(), g.hx(), g.hy());
    let (u, v) = (vel.u(), vel.v());
    let mut out = VectorField::zeros(g);
    {
        let cu = out.u_mut();
        for j in 0..ny {
            for i in 1..nx {
                let uc = u[g.u_idx(i, j)];
                let dudx = (u[g.u_idx(i + 1, j)] - u[g.u_idx(i - 1, j)]) / (2.0 * hx);
                let below = if j == 0 { -uc } else { u[g.u_idx(i, j - 1)] };
                let above = if j == ny - 1 { -uc } else { u[g.u_idx(i, j + 1)] };
                let dudy = (above - below) / (2.0 * hy);
                let vbar = 0.25
                    * (v[g.v_idx(i - 1, j)]
                        + v[g.v_idx(i, j)]
                        + v[g.v_idx(i - 1, j + 1)]
                        + v[g.v_idx(i, j + 1)]);
                cu[g.u_idx(i, j)] = uc * dudx + vbar * dudy;
            }
        }
    }
    {
        let cv = out.v_mut();
        for j in 1..ny {
            for i in 0..nx {
                let vc = v[g.v_idx(i, j)];
                let dvdy = (v[g.v_idx(i, j + 1)] - v[g.v_idx(i, j - 1)]) / (2.0 * hy);
                let left = if i == 0 { -vc } else { v[g.v_idx(i - 1, j)] };
                let right = if i == nx - 1 { -vc } else { v[g.v_idx(i + 1, j)] };
                let dvdx = (right - left) / (2.0 * hx);
                let ubar = 0.25
                    * (u[g.u_idx(i, j - 1)]
                        + u[g.u_idx(i + 1, j - 1)]
                        + u[g.u_idx(i, j)]
                        + u[g.u_idx(i + 1, j)]);
                cv[g.v_idx(i, j)] = ubar * dvdx + vc * dvdy;
            }
        }
    }
    out
}

/// Viscous force `div(nu(phi) D u)` on faces.
pub fn viscous_term(vel: &VectorField, phi: &ScalarField, law: &ViscosityLaw) -> VectorField {
    let nu: Vec<f64> = phi.values().iter().map(|&s| viscosity(law, s)).collect();
    strain::viscous_force(vel, &nu)
}

/// Explicit momentum update without the pressure gradient:
/// `u* = u + dt / rho_f [ -rho (u.grad) u + div(nu D u) - div(grad phi (x) grad phi) ]`.
pub fn predictor_step(state: &State, law: &ViscosityLaw, dt: f64) -> Result<VectorField> {
    let g = *state.grid();
    grid::same_grid(&g, state.u.grid())?;
    grid::same_grid(&g, state.phi.grid())?;
    check_density(&state.rho)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    let visc_limit = viscous_dt_limit(&g, state.rho.min(), law);
    if dt > visc_limit {
        return Err(Error::Cfl {
            op: "predictor_step",
            limit: "viscous",
            dt,
            admissible: visc_limit,
        });
    }
    let adv_limit = advective_dt_limit(&state.u);
    if dt > adv_limit {
        return Err(Error::Cfl {
            op: "predictor_step",
            limit: "advective",
            dt,
            admissible: adv_limit,
        });
    }

    let rho_f = grid::interpolate_center_to_face(&state.rho);
    let conv = convective_term(&state.u);
    let visc = viscous_term(&state.u, &state.phi, law);
    let force = korteweg_force(&state.phi)?;

    let update = |u: &[f64], c: &[f64], vi: &[f64], f: &[f64], r: &[f64]| -> Vec<f64> {
        (0..u.len())
            .map(|k| u[k] + dt * (-c[k] + (vi[k] + f[k]) / r[k]))
            .collect()
    };
    let nu = update(state.u.u(), conv.u(), visc.u(), force.u(), rho_f.u());
    let nv = update(state.u.v(), conv.v(), visc.v(), force.v(), rho_f.v());
    let mut out = VectorField::from_components(g, nu, nv)?;
    out.enforce_no_slip();
    grid::check_finite("predictor_step", out.u())?;
    grid::check_finite("predictor_step", out.v())?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub u: VectorField,
    pub p: ScalarField,
    pub report: SolveReport,
}

/// Solves `div(grad p / rho_f) = div(u*) / dt` (pure Neumann, mean-zero `p`)
/// and returns `u = u* - dt grad p / rho_f`.
pub fn project(
    rho: &ScalarField,
    u_star: &VectorField,
    dt: f64,
    settings: &SolverSettings,
) -> Result<Projection> {
    grid::same_grid(rho.grid(), u_star.grid())?;
    check_density(rho)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    let g = *rho.grid();
    let mut coef = grid::interpolate_center_to_face(rho);
    coef.u_mut().iter_mut().for_each(|r| *r = 1.0 / *r);
    coef.v_mut().iter_mut().for_each(|r| *r = 1.0 / *r);
    let op = elliptic::make_variable_poisson(coef.clone(), BoundaryKind::NeumannZero)?;

    let div = grid::divergence(u_star)?;
    let b = div.map(|d| d / dt).with_boundary(BoundaryKind::NeumannZero);
    let (p, report) = elliptic::solve_cg(&op, &b, settings.tol, settings.max_iter)?;
    if !report.converged {
        return Err(Error::NotConverged {
            stage: "projection",
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    let gp = grid::gradient(&p)?;
    let nu: Vec<f64> = (0..g.u_faces())
        .map(|k| u_star.u()[k] - dt * coef.u()[k] * gp.u()[k])
        .collect();
    let nv: Vec<f64> = (0..g.v_faces())
        .map(|k| u_star.v()[k] - dt * coef.v()[k] * gp.v()[k])
        .collect();
    let mut u = VectorField::from_components(g, nu, nv)?;
    u.enforce_no_slip();
    grid::check_finite("project", u.u())?;
    grid::check_finite("project", u.v())?;
    Ok(Projection { u, p, report })
}
