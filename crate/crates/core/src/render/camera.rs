use crate::error::{Error, Result};
use crate::math::{Ray, Vec3};

/// Pinhole camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub vfov: f32,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    /// Camera at `position` looking at `target`, with `up` orthonormalized
    /// against the view direction.
    pub fn look_at(position: Vec3, target: Vec3, up: Vec3, vfov: f32, width: u32, height: u32) -> Result<Self> {
        let forward = (target - position).normalize();
        let right = forward.cross(up);
        if !forward.is_finite() || right.length() == 0.0 || !right.is_finite() {
            return Err(Error::InvalidCamera("view direction is degenerate or parallel to up".into()));
        }
        let up = right.normalize().cross(forward).normalize();
        let cam = Self {
            position,
            forward,
            up,
            vfov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera(format!("resolution {}x{} has no pixels", self.width, self.height)));
        }
        if !(self.vfov > 0.0 && self.vfov < 180.0) {
            return Err(Error::InvalidCamera(format!("vfov {} outside (0, 180)", self.vfov)));
        }
        let unit = |v: Vec3| (v.length() - 1.0).abs() <= 1e-5;
        if !unit(self.forward) || !unit(self.up) || self.forward.dot(self.up).abs() > 1e-6 {
            return Err(Error::InvalidCamera("forward and up must be orthonormal".into()));
        }
        if !self.position.is_finite() {
            return Err(Error::InvalidCamera("position must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Primary ray through pixel `(x, y)` (row 0 at the top) offset by
    /// `jitter` in `[0, 1)^2`.
    pub fn ray(&self, x: u32, y: u32, jitter: (f32, f32)) -> Ray {
        let right = self.forward.cross(self.up);
        let half_h = (self.vfov.to_radians() * 0.5).tan();
        let half_w = half_h * self.width as f32 / self.height as f32;
        let sx = ((x as f32 + jitter.0) / self.width as f32) * 2.0 - 1.0;
        let sy = 1.0 - ((y as f32 + jitter.1) / self.height as f32) * 2.0;
        let dir = (self.forward + right * (sx * half_w) + self.up * (sy * half_h)).normalize();
        Ray::new(self.position, dir, 0.0, f32::INFINITY)
    }
}
