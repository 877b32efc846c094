//! Landau double-well potential and the concentration-dependent viscosity.

use crate::{Error, Result};

/// `psi(s) = (s^2 - 1)^2 / 4`.
#[inline]
pub fn psi(s: f64) -> f64 {
    let w = s * s - 1.0;
    0.25 * w * w
}

#[inline]
pub fn psi_prime(s: f64) -> f64 {
    s * s * s - s
}

/// `3 s^2 - 1`, bounded below by `-1`.
#[inline]
pub fn psi_double_prime(s: f64) -> f64 {
    3.0 * s * s - 1.0
}

/// Viscosity interpolated linearly between the pure phases `s = 1` (`nu1`)
/// and `s = -1` (`nu2`), with the argument clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityLaw {
    nu1: f64,
    nu2: f64,
}

impl ViscosityLaw {
    pub fn new(nu1: f64, nu2: f64) -> Result<Self> {
        if !(nu1.is_finite() && nu2.is_finite() && nu1 > 0.0 && nu2 > 0.0) {
            return Err(Error::InvalidArgument("phase viscosities must be positive and finite"));
        }
        Ok(Self { nu1, nu2 })
    }

    pub fn constant(nu: f64) -> Result<Self> {
        Self::new(nu, nu)
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }
    pub fn nu2(&self) -> f64 {
        self.nu2
    }
    pub fn nu_star(&self) -> f64 {
        self.nu1.min(self.nu2)
    }
    pub fn nu_upper(&self) -> f64 {
        self.nu1.max(self.nu2)
    }
    pub fn lipschitz(&self) -> f64 {
        libm::fabs(self.nu1 - self.nu2) / 2.0
    }

    pub fn eval(&self, s: f64) -> f64 {
        viscosity(self, s)
    }
}

pub fn viscosity(law: &ViscosityLaw, s: f64) -> f64 {
    let c = s.clamp(-1.0, 1.0);
    let nu = law.nu1 * (1.0 + c) / 2.0 + law.nu2 * (1.0 - c) / 2.0;
    // rounding can leave the convex combination one ulp outside the bounds
    nu.clamp(law.nu_star(), law.nu_upper())
}
