//! The split time step for the full system.
//!
//! Order within a step, all explicit data taken from time level `n`:
//! 1. density transport with `u^n`;
//! 2. Cahn-Hilliard with `rho^{n+1}` and `u^n`;
//! 3. momentum predictor with `rho^{n+1}`, `phi^{n+1}` and `u^n`;
//! 4. projection with `rho^{n+1}`;
//! 5. diagnostics on the new state, blow-up accumulator with `u^n`.

use crate::cahn_hilliard::{self, ChParams};
use crate::diagnostics::{self, DiagRecord};
use crate::elliptic::SolveReport;
use crate::grid::{BoundaryKind, ScalarField, State, VectorField};
use crate::materials::ViscosityLaw;
use crate::momentum::{self, SolverSettings};
use crate::transport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub law: ViscosityLaw,
    pub ch: ChParams,
    pub projection: SolverSettings,
    /// Lebesgue exponent of the blow-up functional, `r > 6`.
    pub serrin_r: f64,
    /// Largest `|div u|` accepted by the density transport.
    pub div_tol: f64,
}

impl StepParams {
    pub fn new(law: ViscosityLaw) -> Self {
        Self {
            law,
            ch: ChParams::default(),
            projection: SolverSettings::default(),
            serrin_r: 12.0,
            div_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    pub record: DiagRecord,
    pub ch_report: SolveReport,
    pub projection_report: SolveReport,
}

/// `0.25 h_min^2 sqrt(min rho)`, a safety bound for the explicit capillary force.
pub fn capillary_dt_limit(state: &State) -> f64 {
    let h = state.grid().h_min();
    0.25 * h * h * libm::sqrt(state.rho.min())
}

/// `0.9 min(advective, viscous, capillary)`.
pub fn auto_dt(state: &State, law: &ViscosityLaw) -> f64 {
    let adv = transport::advective_dt_limit(&state.u);
    let visc = momentum::viscous_dt_limit(state.grid(), state.rho.min(), law);
    0.9 * adv.min(visc).min(capillary_dt_limit(state))
}

/// Builds the state at `t = 0`: projects `u0` once and derives `mu0` from
/// `rho0` and `phi0`.
pub fn initial_state(
    rho0: ScalarField,
    phi0: ScalarField,
    u0: &VectorField,
    settings: &SolverSettings,
) -> Result<State> {
    let phi0 = phi0.with_boundary(BoundaryKind::NeumannZero);
    let rho0 = rho0.with_boundary(BoundaryKind::NeumannZero);
    let proj = momentum::project(&rho0, u0, 1.0, settings)?;
    let mu0 = cahn_hilliard::chemical_potential(&rho0, &phi0)?;
    Ok(State {
        t: 0.0,
        rho: rho0,
        u: proj.u,
        p: ScalarField::zeros(*phi0.grid(), BoundaryKind::NeumannZero),
        phi: phi0,
        mu: mu0,
    })
}

/// Advances `state` by `dt`. `serrin_acc` is the accumulator before the step.
pub fn step(state: &State, serrin_acc: f64, dt: f64, params: &StepParams) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("time step must be positive"));
    }
    let rho = transport::density_step(&state.rho, &state.u, dt, params.div_tol)?;
    let ch = cahn_hilliard::ch_step(&rho, &state.u, &state.phi, dt, &params.ch)?;
    let intermediate = State {
        t: state.t,
        rho,
        u: state.u.clone(),
        p: state.p.clone(),
        phi: ch.phi,
        mu: ch.mu,
    };
    let u_star = momentum::predictor_step(&intermediate, &params.law, dt)?;
    let proj = momentum::project(&intermediate.rho, &u_star, dt, &params.projection)?;
    let acc = diagnostics::serrin_accumulate(serrin_acc, &state.u, params.serrin_r, dt)?;
    let next = State {
        t: state.t + dt,
        rho: intermediate.rho,
        u: proj.u,
        p: proj.p,
        phi: intermediate.phi,
        mu: intermediate.mu,
    };
    let record = diagnostics::record(&next, &params.law, params.serrin_r, acc)?;
    Ok(StepOutcome {
        state: next,
        record,
        ch_report: ch.report,
        projection_report: proj.report,
    })
}
