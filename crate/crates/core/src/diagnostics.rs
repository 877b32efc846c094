//! Energy, dissipation, norms and the functionals monitored during a run.

use crate::grid::{self, ScalarField, State, VectorField};
use crate::materials::{psi, viscosity, ViscosityLaw};
use crate::strain;
use crate::{Error, Result};

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub grad_u_l2: f64,
    pub grad_mu_l2: f64,
    pub lr_norm_u: f64,
    pub serrin_acc: f64,
    pub divu_max: f64,
    pub rho_phi_total: f64,
}

impl DiagRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "E",
        "D",
        "mass",
        "rho_min",
        "rho_max",
        "grad_u_l2",
        "grad_mu_l2",
        "lr_norm_u",
        "serrin_acc",
        "divu_max",
        "rho_phi_total",
    ];

    pub fn to_array(&self) -> [f64; 12] {
        [
            self.t,
            self.energy,
            self.dissipation,
            self.mass,
            self.rho_min,
            self.rho_max,
            self.grad_u_l2,
            self.grad_mu_l2,
            self.lr_norm_u,
            self.serrin_acc,
            self.divu_max,
            self.rho_phi_total,
        ]
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        Self {
            t: a[0],
            energy: a[1],
            dissipation: a[2],
            mass: a[3],
            rho_min: a[4],
            rho_max: a[5],
            grad_u_l2: a[6],
            grad_mu_l2: a[7],
            lr_norm_u: a[8],
            serrin_acc: a[9],
            divu_max: a[10],
            rho_phi_total: a[11],
        }
    }
}

/// `sum (|grad f|^2) hx hy` over faces, zero-flux ghosts.
fn face_gradient_sq(f: &ScalarField) -> Result<f64> {
    let gr = grid::gradient(f)?;
    Ok(gr.dot(&gr))
}

/// `sum [ rho psi(phi) + |grad phi|^2 / 2 ] hx hy`.
pub fn phase_energy(rho: &ScalarField, phi: &ScalarField) -> Result<f64> {
    grid::same_grid(rho.grid(), phi.grid())?;
    let g = *phi.grid();
    let gr = grid::gradient(phi)?;
    let (nx, ny) = (g.nx(), g.ny());
    let mut total = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            let (gl, gr_, gb, gt) = (gr.get_u(i, j), gr.get_u(i + 1, j), gr.get_v(i, j), gr.get_v(i, j + 1));
            let grad_sq = 0.5 * (gl * gl + gr_ * gr_) + 0.5 * (gb * gb + gt * gt);
            total += rho.values()[k] * psi(phi.values()[k]) + 0.5 * grad_sq;
        }
    }
    Ok(total * g.cell_volume())
}

/// `sum rho |u|^2 / 2 hx hy` with `|u|^2` the face-averaged squares.
pub fn kinetic_energy(rho: &ScalarField, u: &VectorField) -> Result<f64> {
    grid::same_grid(rho.grid(), u.grid())?;
    let g = *rho.grid();
    let mut total = 0.0;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let (ul, ur) = (u.get_u(i, j), u.get_u(i + 1, j));
            let (vb, vt) = (u.get_v(i, j), u.get_v(i, j + 1));
            let speed_sq = 0.5 * (ul * ul + ur * ur) + 0.5 * (vb * vb + vt * vt);
            total += 0.5 * rho.values()[g.idx(i, j)] * speed_sq;
        }
    }
    Ok(total * g.cell_volume())
}

pub fn total_energy(state: &State) -> Result<f64> {
    Ok(kinetic_energy(&state.rho, &state.u)? + phase_energy(&state.rho, &state.phi)?)
}

/// `sum [ nu(phi) |D u|^2 + |grad mu|^2 ] hx hy`.
pub fn dissipation(state: &State, law: &ViscosityLaw) -> Result<f64> {
    grid::same_grid(state.grid(), state.u.grid())?;
    let nu: alloc::vec::Vec<f64> = state.phi.values().iter().map(|&s| viscosity(law, s)).collect();
    let viscous = strain::viscous_dissipation(&state.u, &nu);
    Ok(viscous + face_gradient_sq(&state.mu)?)
}

pub fn grad_u_l2(u: &VectorField) -> f64 {
    libm::sqrt(strain::velocity_gradient_sq(u))
}

pub fn grad_mu_l2(mu: &ScalarField) -> Result<f64> {
    Ok(libm::sqrt(face_gradient_sq(mu)?))
}

/// `(sum |u|^r hx hy)^(1/r)` with `|u|` built from center-averaged components.
pub fn lr_norm(u: &VectorField, r: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("Lebesgue exponent must satisfy r >= 1"));
    }
    let g = *u.grid();
    let (uc, vc) = u.center_components();
    let mags: alloc::vec::Vec<f64> = uc.iter().zip(&vc).map(|(a, b)| libm::hypot(*a, *b)).collect();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    // scaled by the peak so large r cannot overflow
    let sum: f64 = mags.iter().map(|m| libm::pow(m / peak, r)).sum();
    Ok(peak * libm::pow(sum * g.cell_volume(), 1.0 / r))
}

/// Time exponent `4r / (r - 6)` of the blow-up functional, defined for `r > 6`.
pub fn serrin_exponent(r: f64) -> Result<f64> {
    if !(r > 6.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("blow-up functional needs r > 6"));
    }
    Ok(4.0 * r / (r - 6.0))
}

/// Left-endpoint update of `int ||u||_{L^r}^{4r/(r-6)} dt`.
pub fn serrin_accumulate(prev: f64, u: &VectorField, r: f64, dt: f64) -> Result<f64> {
    let exponent = serrin_exponent(r)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    let norm = lr_norm(u, r)?;
    Ok(prev + dt * libm::pow(norm, exponent))
}

/// `||grad u0||_{L2} + ||grad mu0||_{L2} + max(rho0)`.
pub fn smallness_quantity(state0: &State) -> Result<f64> {
    Ok(grad_u_l2(&state0.u) + grad_mu_l2(&state0.mu)? + state0.rho.max())
}

/// `(max(sqrt(2) / (2 nu_star), c0 eps0) eps0)^(-1)`.
pub fn a0_coefficient(nu_star: f64, c0: f64, eps0: f64) -> Result<f64> {
    if !(nu_star > 0.0 && c0 > 0.0 && eps0 > 0.0) {
        return Err(Error::InvalidArgument("a0 needs positive nu_star, c0 and eps0"));
    }
    let m = (core::f64::consts::SQRT_2 / (2.0 * nu_star)).max(c0 * eps0);
    Ok(1.0 / (m * eps0))
}

/// `c eps0 exp(-a0 t) + a0 mass0 / 4`.
pub fn decay_envelope(t: f64, c: f64, eps0: f64, a0: f64, mass0: f64) -> f64 {
    c * eps0 * libm::exp(-a0 * t) + 0.25 * a0 * mass0
}

/// Evaluates every monitored quantity on `state`.
pub fn record(state: &State, law: &ViscosityLaw, r: f64, serrin_acc: f64) -> Result<DiagRecord> {
    Ok(DiagRecord {
        t: state.t,
        energy: total_energy(state)?,
        dissipation: dissipation(state, law)?,
        mass: state.rho.integral(),
        rho_min: state.rho.min(),
        rho_max: state.rho.max(),
        grad_u_l2: grad_u_l2(&state.u),
        grad_mu_l2: grad_mu_l2(&state.mu)?,
        lr_norm_u: lr_norm(&state.u, r)?,
        serrin_acc,
        divu_max: grid::max_abs_divergence(&state.u),
        rho_phi_total: state.rho.dot(&state.phi),
    })
}
