//! Special functions used by the shape-function integrals and the bilayer
//! radius formula.

mod bessel;
mod elliptic;
mod lambert;

pub use bessel::{
    bessel_j0, bessel_j0_j1, bessel_j1, bessel_k0, bessel_k0_k1, bessel_k0_k1_scaled, bessel_k1, j0_zero,
};
pub use elliptic::{ellip_e, ellip_k, ellip_k_e, ellip_k_e_complement};
pub use lambert::lambert_w_m1;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialFunctionId {
    J0,
    K0,
    K1,
    EllipticK,
    EllipticE,
    LambertWm1,
    Asinh,
}

impl SpecialFunctionId {
    pub const ALL: [SpecialFunctionId; 7] = [
        SpecialFunctionId::J0,
        SpecialFunctionId::K0,
        SpecialFunctionId::K1,
        SpecialFunctionId::EllipticK,
        SpecialFunctionId::EllipticE,
        SpecialFunctionId::LambertWm1,
        SpecialFunctionId::Asinh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecialFunctionId::J0 => "J0",
            SpecialFunctionId::K0 => "K0",
            SpecialFunctionId::K1 => "K1",
            SpecialFunctionId::EllipticK => "EllipticK",
            SpecialFunctionId::EllipticE => "EllipticE",
            SpecialFunctionId::LambertWm1 => "LambertWm1",
            SpecialFunctionId::Asinh => "Asinh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|id| id.name().eq_ignore_ascii_case(s))
    }
}

/// Evaluate any of the supported functions by tag.
pub fn eval(id: SpecialFunctionId, x: f64) -> Result<f64> {
    match id {
        SpecialFunctionId::J0 => Ok(bessel_j0(x)),
        SpecialFunctionId::K0 => bessel_k0(x),
        SpecialFunctionId::K1 => bessel_k1(x),
        SpecialFunctionId::EllipticK => ellip_k(x),
        SpecialFunctionId::EllipticE => ellip_e(x),
        SpecialFunctionId::LambertWm1 => lambert_w_m1(x),
        SpecialFunctionId::Asinh => Ok(asinh(x)),
    }
}

/// Inverse hyperbolic sine, accurate for large and tiny arguments.
#[inline]
pub fn asinh(x: f64) -> f64 {
    x.asinh()
}

pub(crate) fn domain(function: &'static str, x: f64, domain: &'static str) -> Error {
    Error::Domain { function, x, domain }
}
