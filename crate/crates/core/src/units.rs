//! Material parameters and their reduction to the dimensionless and
//! rescaled sets used by the reduced energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::EULER_GAMMA;

pub const MU0: f64 = 4.0 * PI * 1e-7;
pub const DEFAULT_L0: f64 = 10.0;

/// Lower bound e^{2+γ}/2 on the truncation floor.
pub fn l0_bar() -> f64 {
    (2.0 + EULER_GAMMA).exp() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Exchange stiffness, J/m.
    pub exchange_stiffness: f64,
    /// A/m.
    pub saturation_magnetization: f64,
    /// J/m³.
    pub bulk_anisotropy: f64,
    /// J/m².
    #[serde(default)]
    pub surface_anisotropy_top: f64,
    #[serde(default)]
    pub surface_anisotropy_bottom: f64,
    /// J/m.
    #[serde(default)]
    pub dmi_top: f64,
    #[serde(default)]
    pub dmi_bottom: f64,
    /// m.
    pub layer_thickness: f64,
    #[serde(default = "default_spacer")]
    pub spacer_ratio: f64,
    #[serde(default = "default_layers")]
    pub layer_count: usize,
    /// Out-of-plane applied field, A/m.
    #[serde(default)]
    pub applied_field: f64,
}

// layers touching, spacer of negligible thickness
fn default_spacer() -> f64 {
    1.0 + f64::EPSILON
}

fn default_layers() -> usize {
    2
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("exchange_stiffness", self.exchange_stiffness),
            ("saturation_magnetization", self.saturation_magnetization),
            ("bulk_anisotropy", self.bulk_anisotropy),
            ("surface_anisotropy_top", self.surface_anisotropy_top),
            ("surface_anisotropy_bottom", self.surface_anisotropy_bottom),
            ("dmi_top", self.dmi_top),
            ("dmi_bottom", self.dmi_bottom),
            ("layer_thickness", self.layer_thickness),
            ("spacer_ratio", self.spacer_ratio),
            ("applied_field", self.applied_field),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("exchange_stiffness", self.exchange_stiffness),
            ("saturation_magnetization", self.saturation_magnetization),
            ("layer_thickness", self.layer_thickness),
        ] {
            if v <= 0.0 {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        for (name, v) in [
            ("bulk_anisotropy", self.bulk_anisotropy),
            ("surface_anisotropy_top", self.surface_anisotropy_top),
            ("surface_anisotropy_bottom", self.surface_anisotropy_bottom),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(name, "must be non-negative"));
            }
        }
        if self.spacer_ratio <= 1.0 {
            return Err(Error::invalid("spacer_ratio", "must exceed 1"));
        }
        if self.layer_count < 1 {
            return Err(Error::invalid("layer_count", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub delta: f64,
    pub qu: f64,
    pub qs_plus: f64,
    pub qs_minus: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub q: f64,
    pub kappa: f64,
    pub h: f64,
    /// m.
    pub exchange_length: f64,
    /// J/m³.
    pub kd: f64,
}

pub fn derive_dimensionless(m: &MaterialParams) -> Result<DimensionlessParams> {
    m.validate()?;
    let kd = 0.5 * MU0 * m.saturation_magnetization * m.saturation_magnetization;
    let exchange_length = (m.exchange_stiffness / kd).sqrt();
    let d = m.layer_thickness;
    let delta = d / exchange_length;
    let qu = m.bulk_anisotropy / kd;
    let qs_plus = m.surface_anisotropy_top / (d * kd);
    let qs_minus = m.surface_anisotropy_bottom / (d * kd);
    let dmi_scale = d * (m.exchange_stiffness * kd).sqrt();
    let kappa_plus = m.dmi_top / dmi_scale;
    let kappa_minus = m.dmi_bottom / dmi_scale;
    Ok(DimensionlessParams {
        delta,
        qu,
        qs_plus,
        qs_minus,
        kappa_plus,
        kappa_minus,
        q: qu + qs_plus + qs_minus,
        kappa: kappa_plus - kappa_minus,
        h: m.applied_field / m.saturation_magnetization,
        exchange_length,
        kd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub delta_bar: f64,
    #[serde(default)]
    pub h_bar: f64,
    #[serde(default)]
    pub kappa_bar: f64,
    #[serde(rename = "L0", alias = "l0", default = "default_l0")]
    pub l0: f64,
    /// 1/√(Q−1); multiply by the exchange length to get physical lengths.
    #[serde(default = "one")]
    pub length_rescale: f64,
}

fn default_l0() -> f64 {
    DEFAULT_L0
}

fn one() -> f64 {
    1.0
}

impl RescaledParams {
    /// Direct construction in reduced units.
    pub fn new(delta_bar: f64, kappa_bar: f64, h_bar: f64, l0: f64) -> Result<Self> {
        let p = RescaledParams {
            delta_bar,
            h_bar,
            kappa_bar,
            l0,
            length_rescale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// δ̄ only, κ̄ = h̄ = 0 and the default floor.
    pub fn with_delta_bar(delta_bar: f64) -> Result<Self> {
        Self::new(delta_bar, 0.0, 0.0, DEFAULT_L0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_bar >= 0.0) || !self.delta_bar.is_finite() {
            return Err(Error::invalid("delta_bar", "must be non-negative and finite"));
        }
        if !self.kappa_bar.is_finite() {
            return Err(Error::invalid("kappa_bar", "must be finite"));
        }
        if !self.h_bar.is_finite() {
            return Err(Error::invalid("h_bar", "must be finite"));
        }
        if !(self.l0 > l0_bar()) || !self.l0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "L0 = {} must exceed e^(2+gamma)/2 = {:.6}",
                self.l0,
                l0_bar()
            )));
        }
        Ok(())
    }

    /// Upper end 1/L0 of the admissible radius interval.
    pub fn rho_max(&self) -> f64 {
        1.0 / self.l0
    }
}

pub fn rescale(p: &DimensionlessParams, l0: f64) -> Result<RescaledParams> {
    if !(p.q > 1.0) {
        return Err(Error::UnsupportedRegime(format!(
            "quality factor Q = {} must exceed 1 for the reduced model",
            p.q
        )));
    }
    if !(p.delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    let s = (p.q - 1.0).sqrt();
    let r = RescaledParams {
        delta_bar: p.delta / s,
        h_bar: p.h / (p.q - 1.0),
        kappa_bar: p.kappa / s,
        l0,
        length_rescale: 1.0 / s,
    };
    r.validate()?;
    Ok(r)
}

/// Physical length in metres of a reduced length.
pub fn physical_length(reduced: f64, p: &DimensionlessParams, r: &RescaledParams) -> f64 {
    reduced * p.exchange_length * r.length_rescale
}
