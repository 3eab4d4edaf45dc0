use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::absorption::AbsorptionModel;
use super::bessel::jinc;
use super::geometry::{Ear, SonarGeometry, Vec3};
use crate::error::{Error, Result};

/// Scalar constants of the echo intensity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoModelConstants {
    /// Product of pinna, scattering, density and source-strength factors.
    pub lump_constant: f64,
    /// m/s
    pub speed_of_sound: f64,
    pub absorption: AbsorptionModel,
}

impl Default for EchoModelConstants {
    fn default() -> Self {
        EchoModelConstants { lump_constant: 3000.0, speed_of_sound: 343.0, absorption: AbsorptionModel::default() }
    }
}

impl EchoModelConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.lump_constant > 0.0) {
            return Err(Error::param("lump constant must be positive"));
        }
        if !(self.speed_of_sound > 0.0) {
            return Err(Error::param("speed of sound must be positive"));
        }
        Ok(())
    }
}

/// Circular-aperture sensitivity 2·J₁(ka·sin β)/(ka·sin β), k = 2πf/c.
pub fn directivity_gain(beta: f64, aperture_radius: f64, freq: f64, c: f64) -> f64 {
    let k = 2.0 * PI * freq / c;
    jinc(k * aperture_radius * beta.sin())
}

/// Ranges and off-axis angles from the mouth and one ear to a glint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoPath {
    pub range_mouth: f64,
    pub range_ear: f64,
    pub beta_mouth: f64,
    pub beta_ear: f64,
    mouth_radius: f64,
    ear_radius: f64,
}

impl EchoPath {
    pub fn new(glint: Vec3, geom: &SonarGeometry, ear: Ear) -> Result<Self> {
        let (ear_pos, ear_axis) = geom.ear(ear);
        let to_mouth = glint - geom.mouth_pos;
        let to_ear = glint - ear_pos;
        let (range_mouth, range_ear) = (to_mouth.norm(), to_ear.norm());
        if !(range_mouth > 0.0 && range_ear > 0.0) {
            return Err(Error::param("glint coincides with the mouth or an ear"));
        }
        Ok(EchoPath {
            range_mouth,
            range_ear,
            beta_mouth: geom.mouth_axis.angle_to(to_mouth),
            beta_ear: ear_axis.angle_to(to_ear),
            mouth_radius: geom.mouth_radius,
            ear_radius: geom.ear_radius,
        })
    }

    pub fn round_trip(&self) -> f64 {
        self.range_mouth + self.range_ear
    }

    pub fn delay(&self, c: f64) -> f64 {
        self.round_trip() / c
    }

    /// Real-valued gain (no propagation phase); may be negative beyond the
    /// first directivity null.
    pub fn gain(&self, freq: f64, consts: &EchoModelConstants) -> f64 {
        let c = consts.speed_of_sound;
        let a_m2 = self.mouth_radius * self.mouth_radius;
        let a_e2 = self.ear_radius * self.ear_radius;
        consts.lump_constant * freq * a_m2 * a_e2 / (self.range_mouth * self.range_ear)
            * consts.absorption.factor(freq, self.round_trip())
            * directivity_gain(self.beta_mouth, self.mouth_radius, freq, c)
            * directivity_gain(self.beta_ear, self.ear_radius, freq, c)
    }

    pub fn transfer(&self, freq: f64, consts: &EchoModelConstants) -> Complex64 {
        let phase = -2.0 * PI * freq * self.round_trip() / consts.speed_of_sound;
        Complex64::from_polar(1.0, phase) * self.gain(freq, consts)
    }
}

/// Complex mouth → glint → left-ear transfer at `freq`.
pub fn echo_transfer(freq: f64, glint: Vec3, geom: &SonarGeometry, consts: &EchoModelConstants) -> Result<Complex64> {
    Ok(EchoPath::new(glint, geom, Ear::Left)?.transfer(freq, consts))
}
