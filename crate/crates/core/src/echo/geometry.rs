use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Cartesian 3-vector in metres. Frame: x to the right, y forward (sonar
/// boresight), z up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    /// Angle between two non-zero vectors, in radians.
    pub fn angle_to(self, other: Vec3) -> f64 {
        let cos = self.dot(other) / (self.norm() * other.norm());
        cos.clamp(-1.0, 1.0).acos()
    }

    /// Boresight direction: +y rotated by `yaw` about z (positive turns
    /// toward −x) and then pitched down by `pitch_down`.
    pub fn boresight(yaw: f64, pitch_down: f64) -> Vec3 {
        Vec3::new(-yaw.sin() * pitch_down.cos(), yaw.cos() * pitch_down.cos(), -pitch_down.sin())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.0[0] * s, self.0[1] * s, self.0[2] * s)
    }
}

/// Which receiver channel an echo is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ear {
    #[default]
    Left,
    Right,
}

/// Emitter and receiver layout of the bat-like sonar head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonarGeometry {
    pub mouth_pos: Vec3,
    pub ear_pos_left: Vec3,
    pub ear_pos_right: Vec3,
    pub mouth_radius: f64,
    pub ear_radius: f64,
    pub mouth_axis: Vec3,
    pub ear_axis_left: Vec3,
    pub ear_axis_right: Vec3,
}

impl Default for SonarGeometry {
    /// Mouth at the origin, ears at (±0.75, 0.75, 1.5) cm, 0.5 cm apertures,
    /// every axis pitched 5° down and the ears splayed 25° outward.
    fn default() -> Self {
        let pitch = 5f64.to_radians();
        let splay = 25f64.to_radians();
        SonarGeometry {
            mouth_pos: Vec3::new(0.0, 0.0, 0.0),
            ear_pos_left: Vec3::new(-0.0075, 0.0075, 0.015),
            ear_pos_right: Vec3::new(0.0075, 0.0075, 0.015),
            mouth_radius: 0.005,
            ear_radius: 0.005,
            mouth_axis: Vec3::boresight(0.0, pitch),
            ear_axis_left: Vec3::boresight(splay, pitch),
            ear_axis_right: Vec3::boresight(-splay, pitch),
        }
    }
}

impl SonarGeometry {
    pub fn ear(&self, ear: Ear) -> (Vec3, Vec3) {
        match ear {
            Ear::Left => (self.ear_pos_left, self.ear_axis_left),
            Ear::Right => (self.ear_pos_right, self.ear_axis_right),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_axes_are_unit() {
        let g = SonarGeometry::default();
        for axis in [g.mouth_axis, g.ear_axis_left, g.ear_axis_right] {
            assert!((axis.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ears_splay_outward() {
        let g = SonarGeometry::default();
        assert!(g.ear_axis_left.0[0] < 0.0 && g.ear_pos_left.0[0] < 0.0);
        assert!(g.ear_axis_right.0[0] > 0.0 && g.ear_pos_right.0[0] > 0.0);
        let yaw = g.ear_axis_left.angle_to(g.mouth_axis);
        assert!((yaw - 25f64.to_radians()).abs() < 0.01);
    }
}
