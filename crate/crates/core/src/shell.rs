//! Shell parameters: thickness, length, and the isotropic material constants.

use crate::error::{Error, Result};
use crate::geometry::CrossSection;
use serde::{Deserialize, Serialize};

/// Geometry and material of a cylindrical shell over a planar cross-section.
///
/// The midsurface is the cross-section curve extruded over z ∈ [0, L]; the
/// wall occupies t ∈ [−h/2, h/2] along the outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    /// Wall thickness.
    pub h: f64,
    /// Cylinder length.
    pub length: f64,
    /// Young's modulus.
    pub e_mod: f64,
    /// Poisson ratio, in (−1, 1/2).
    pub nu: f64,
}

impl ShellConfig {
    pub fn new(h: f64, length: f64, e_mod: f64, nu: f64) -> Result<Self> {
        if !(h > 0.0) || !(length > 0.0) || !(e_mod > 0.0) {
            return Err(Error::Config(format!(
                "h, length, e_mod must be positive (got {h}, {length}, {e_mod})"
            )));
        }
        if !(-1.0 < nu && nu < 0.5) {
            return Err(Error::Config(format!("nu must lie in (-1, 1/2), got {nu}")));
        }
        Ok(ShellConfig {
            h,
            length,
            e_mod,
            nu,
        })
    }

    /// First Lamé constant λ = Eν/((1+ν)(1−2ν)).
    pub fn lame_lambda(&self) -> f64 {
        self.e_mod * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
    }

    /// Shear modulus μ = E/(2(1+ν)).
    pub fn lame_mu(&self) -> f64 {
        self.e_mod / (2.0 * (1.0 + self.nu))
    }

    /// Classical buckling load of the circular cylinder, E·h/√(3(1−ν²)).
    pub fn koiter_load(&self) -> f64 {
        self.e_mod * self.h / (3.0 * (1.0 - self.nu * self.nu)).sqrt()
    }

    /// The wall must stay clear of the curvature centers: h·k_max < 1.
    pub fn check_thickness(&self, cs: &CrossSection) -> Result<()> {
        let k_max = cs.k.iter().cloned().fold(0.0_f64, f64::max);
        if self.h * k_max >= 1.0 {
            return Err(Error::Config(format!(
                "thickness {} exceeds half the minimal curvature radius {}",
                self.h,
                1.0 / k_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{synthesize_curve, CurvatureProfile};

    #[test]
    fn lame_constants_match_closed_forms() {
        let cfg = ShellConfig::new(0.01, 2.0, 1.0, 0.3).unwrap();
        assert!((cfg.lame_lambda() - 0.3 / (1.3 * 0.4)).abs() < 1e-15);
        assert!((cfg.lame_mu() - 1.0 / 2.6).abs() < 1e-15);
        assert!((cfg.koiter_load() - 0.01 / (3.0_f64 * 0.91).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unphysical_parameters() {
        assert!(ShellConfig::new(-0.01, 2.0, 1.0, 0.3).is_err());
        assert!(ShellConfig::new(0.01, 2.0, 1.0, 0.5).is_err());
        assert!(ShellConfig::new(0.01, 2.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn thickness_check_against_curvature() {
        let profile = CurvatureProfile::cosine_series(2.0 * std::f64::consts::PI, 128, &[(2, 0.3)]);
        let cs = synthesize_curve(&profile, 1e-10).unwrap();
        let thin = ShellConfig::new(0.02, 2.0, 1.0, 0.3).unwrap();
        assert!(thin.check_thickness(&cs).is_ok());
        let thick = ShellConfig::new(0.8, 2.0, 1.0, 0.3).unwrap();
        assert!(thick.check_thickness(&cs).is_err());
    }
}
