//! Conservative upwind transport of the density.

use alloc::vec::Vec;

use crate::grid::{self, ScalarField, VectorField};
use crate::{Error, Result};

/// Largest `dt` with `dt (max|u|/hx + max|v|/hy) <= 1`; infinite for a fluid at rest.
pub fn advective_dt_limit(u: &VectorField) -> f64 {
    let g = u.grid();
    let rate = u.max_abs_u() / g.hx() + u.max_abs_v() / g.hy();
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// One forward-Euler step of `rho_t + div(rho u) = 0` with upwind fluxes.
///
/// Requires `max |div u| <= div_tol` and the advective CFL bound; under
/// those the update is a convex combination of neighbouring values, so the
/// new density stays inside the old bounds, and the flux form keeps the
/// total mass fixed up to rounding.
pub fn density_step(
    rho: &ScalarField,
    u: &VectorField,
    dt: f64,
    div_tol: f64,
) -> Result<ScalarField> {
    grid::same_grid(rho.grid(), u.grid())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    let limit = advective_dt_limit(u);
    if dt > limit {
        return Err(Error::Cfl {
            op: "density_step",
            limit: "advective",
            dt,
            admissible: limit,
        });
    }
    let max_div = grid::max_abs_divergence(u);
    if max_div > div_tol {
        return Err(Error::NotDivergenceFree {
            max_div,
            tol: div_tol,
        });
    }
    let flux = grid::advect_scalar(rho, u)?;
    let next: Vec<f64> = rho
        .values()
        .iter()
        .zip(flux.values())
        .map(|(r, d)| r - dt * d)
        .collect();
    grid::check_finite("density_step", &next)?;
    ScalarField::from_values(*rho.grid(), next, rho.boundary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryKind, Grid};
    use core::f64::consts::PI;

    fn swirl(g: Grid) -> VectorField {
        let psi = |x: f64, y: f64| {
            let s = (PI * x).sin() * (PI * y).sin();
            s * s / PI
        };
        let (hx, hy) = (g.hx(), g.hy());
        VectorField::from_fn(
            g,
            |x, y| (psi(x, y + 0.5 * hy) - psi(x, y - 0.5 * hy)) / hy,
            |x, y| -(psi(x + 0.5 * hx, y) - psi(x - 0.5 * hx, y)) / hx,
        )
    }

    #[test]
    fn zero_velocity_leaves_density_untouched() {
        let g = Grid::unit(16).unwrap();
        let rho = ScalarField::from_fn(g, BoundaryKind::NeumannZero, |x, y| 1.0 + x * y);
        let out = density_step(&rho, &VectorField::zeros(g), 0.1, 1e-10).unwrap();
        assert_eq!(out.values(), rho.values());
    }

    #[test]
    fn constant_density_is_transported_exactly() {
        let g = Grid::unit(32).unwrap();
        let u = swirl(g);
        let dt = 0.5 * advective_dt_limit(&u);
        let mut rho = ScalarField::constant(g, 1.7, BoundaryKind::NeumannZero);
        for _ in 0..20 {
            rho = density_step(&rho, &u, dt, 1e-10).unwrap();
        }
        assert!(rho.values().iter().all(|&r| (r - 1.7).abs() < 1e-12));
    }

    #[test]
    fn cfl_violation_reports_admissible_dt() {
        let g = Grid::unit(16).unwrap();
        let u = swirl(g);
        let limit = advective_dt_limit(&u);
        match density_step(&ScalarField::constant(g, 1.0, BoundaryKind::NeumannZero), &u, 2.0 * limit, 1e-10) {
            Err(Error::Cfl { admissible, .. }) => assert_eq!(admissible, limit),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compressive_velocity_is_rejected() {
        let g = Grid::unit(16).unwrap();
        let mut u = VectorField::constant(g, 0.1, 0.0);
        u.enforce_no_slip();
        let rho = ScalarField::constant(g, 1.0, BoundaryKind::NeumannZero);
        assert!(matches!(
            density_step(&rho, &u, 0.01, 1e-10),
            Err(Error::NotDivergenceFree { .. })
        ));
    }
}
