//! Small f32 vector, box, ray and affine-matrix types shared by every kernel.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use bytemuck::{Pod, Zeroable};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Pod, Zeroable)]
#[repr(C)]
pub struct Vec3 {
    pub x: f32,
    pub y: f32,
    pub z: f32,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const ONE: Vec3 = Vec3::new(1.0, 1.0, 1.0);

    #[inline]
    pub const fn new(x: f32, y: f32, z: f32) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f32) -> Self {
        Self::new(v, v, v)
    }

    #[inline]
    pub fn from_array(a: [f32; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn to_array(self) -> [f32; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f32 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length(self) -> f32 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn normalize(self) -> Vec3 {
        self * (1.0 / self.length())
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    #[inline]
    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    #[inline]
    pub fn max_elem(self) -> f32 {
        self.x.max(self.y).max(self.z)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Index<usize> for Vec3 {
    type Output = f32;

    #[inline]
    fn index(&self, i: usize) -> &f32 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f32> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f32) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f32> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f32) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Axis-aligned bounding box. `min[k] <= max[k]` on every axis for any box
/// produced by this crate; [`Aabb::EMPTY`] is the identity of `union`.
#[derive(Clone, Copy, Debug, PartialEq, Pod, Zeroable)]
#[repr(C)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::splat(f32::INFINITY),
        max: Vec3::splat(f32::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        points.iter().fold(Aabb::EMPTY, |b, &p| b.grow(p))
    }

    pub fn unit() -> Self {
        Self::new(Vec3::ZERO, Vec3::ONE)
    }

    #[inline]
    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    #[inline]
    pub fn grow(&self, p: Vec3) -> Aabb {
        Aabb::new(self.min.min(p), self.max.max(p))
    }

    #[inline]
    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    #[inline]
    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f32 {
        self.extent().length()
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.min.x <= self.max.x
            && self.min.y <= self.max.y
            && self.min.z <= self.max.z
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        self.min.x <= o.min.x
            && self.min.y <= o.min.y
            && self.min.z <= o.min.z
            && self.max.x >= o.max.x
            && self.max.y >= o.max.y
            && self.max.z >= o.max.z
    }

    /// Exact parametric overlap `[t0, t1]` of the ray with this box, clipped
    /// to the ray's `[t_near, t_far]`. `None` when the clipped interval is empty.
    #[inline]
    pub fn ray_overlap(&self, ray: &Ray) -> Option<(f32, f32)> {
        let inv = ray.inv_dir();
        let (mut t0, mut t1) = (ray.t_near, ray.t_far);
        for k in 0..3 {
            let a = (self.min[k] - ray.origin[k]) * inv[k];
            let b = (self.max[k] - ray.origin[k]) * inv[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Replacement magnitude for zero direction components in slab tests.
pub const TINY_DIR: f32 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Pod, Zeroable)]
#[repr(C)]
pub struct Ray {
    pub origin: Vec3,
    pub t_near: f32,
    pub dir: Vec3,
    pub t_far: f32,
}

impl Default for Ray {
    fn default() -> Self {
        Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), 0.0, f32::INFINITY)
    }
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3, t_near: f32, t_far: f32) -> Self {
        Self {
            origin,
            t_near,
            dir,
            t_far,
        }
    }

    /// Packed `(posAndNear, dirAndFar)` form used by the ray files.
    pub fn from_packed(v: [f32; 8]) -> Self {
        Self::new(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[4], v[5], v[6]),
            v[3],
            v[7],
        )
    }

    pub fn to_packed(&self) -> [f32; 8] {
        [
            self.origin.x,
            self.origin.y,
            self.origin.z,
            self.t_near,
            self.dir.x,
            self.dir.y,
            self.dir.z,
            self.t_far,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let dir_ok = self.dir.is_finite() && self.dir != Vec3::ZERO;
        let range_ok = self.t_near >= 0.0 && self.t_near < self.t_far && !self.t_near.is_nan();
        if dir_ok && range_ok && self.origin.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidRay)
        }
    }

    #[inline]
    pub fn at(&self, t: f32) -> Vec3 {
        self.origin + self.dir * t
    }

    #[inline]
    pub fn inv_dir(&self) -> Vec3 {
        #[inline]
        fn inv(d: f32) -> f32 {
            if d == 0.0 {
                1.0 / TINY_DIR.copysign(d)
            } else {
                1.0 / d
            }
        }
        Vec3::new(inv(self.dir.x), inv(self.dir.y), inv(self.dir.z))
    }
}

/// Row-major 4x4 affine transform (`m[row][col]`, points as column vectors).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4 {
    pub m: [[f32; 4]; 4],
}

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4 {
        m: [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    };

    pub fn from_rows(m: [[f32; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn translation(t: Vec3) -> Self {
        let mut r = Self::IDENTITY;
        r.m[0][3] = t.x;
        r.m[1][3] = t.y;
        r.m[2][3] = t.z;
        r
    }

    pub fn scale(s: Vec3) -> Self {
        let mut r = Self::IDENTITY;
        r.m[0][0] = s.x;
        r.m[1][1] = s.y;
        r.m[2][2] = s.z;
        r
    }

    pub fn rotation_y(radians: f32) -> Self {
        let (s, c) = radians.sin_cos();
        let mut r = Self::IDENTITY;
        r.m[0][0] = c;
        r.m[0][2] = s;
        r.m[2][0] = -s;
        r.m[2][2] = c;
        r
    }

    pub fn mul(&self, o: &Mat4) -> Mat4 {
        let mut r = [[0.0f32; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat4 { m: r }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3],
        )
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Multiplies by the transpose of the upper 3x3 block; used to carry
    /// object-space normals to world space with the inverse matrix.
    #[inline]
    pub fn transform_vector_transposed(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transform_aabb(&self, b: &Aabb) -> Aabb {
        (0..8).fold(Aabb::EMPTY, |acc, c| {
            let p = Vec3::new(
                if c & 1 == 0 { b.min.x } else { b.max.x },
                if c & 2 == 0 { b.min.y } else { b.max.y },
                if c & 4 == 0 { b.min.z } else { b.max.z },
            );
            acc.grow(self.transform_point(p))
        })
    }

    /// Affine inverse computed in f64. Fails when the linear block is singular
    /// or the last row is not `(0, 0, 0, 1)`.
    pub fn inverse(&self) -> Result<Mat4> {
        let m = self.m.map(|r| r.map(f64::from));
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::NonInvertibleTransform);
        }
        let a = [
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ];
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        let det = a[0][0] * cof(1, 2, 1, 2) - a[0][1] * cof(1, 2, 0, 2) + a[0][2] * cof(1, 2, 0, 1);
        let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-12 * scale * scale * scale {
            return Err(Error::NonInvertibleTransform);
        }
        let inv_det = 1.0 / det;
        let inv = [
            [
                cof(1, 2, 1, 2) * inv_det,
                -cof(0, 2, 1, 2) * inv_det,
                cof(0, 1, 1, 2) * inv_det,
            ],
            [
                -cof(1, 2, 0, 2) * inv_det,
                cof(0, 2, 0, 2) * inv_det,
                -cof(0, 1, 0, 2) * inv_det,
            ],
            [
                cof(1, 2, 0, 1) * inv_det,
                -cof(0, 2, 0, 1) * inv_det,
                cof(0, 1, 0, 1) * inv_det,
            ],
        ];
        let t = [m[0][3], m[1][3], m[2][3]];
        let mut out = [[0.0f32; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = inv[i][j] as f32;
            }
            out[i][3] = -(inv[i][0] * t[0] + inv[i][1] * t[1] + inv[i][2] * t[2]) as f32;
        }
        out[3][3] = 1.0;
        Ok(Mat4 { m: out })
    }
}

/// Octahedral encoding of a unit vector into `[-1, 1]^2`.
pub fn oct_encode(n: Vec3) -> [f32; 2] {
    let l1 = n.x.abs() + n.y.abs() + n.z.abs();
    let (x, y) = (n.x / l1, n.y / l1);
    if n.z >= 0.0 {
        [x, y]
    } else {
        [(1.0 - y.abs()) * sign_nz(x), (1.0 - x.abs()) * sign_nz(y)]
    }
}

pub fn oct_decode(e: [f32; 2]) -> Vec3 {
    let (mut x, mut y) = (e[0], e[1]);
    let z = 1.0 - x.abs() - y.abs();
    if z < 0.0 {
        let (ox, oy) = (x, y);
        x = (1.0 - oy.abs()) * sign_nz(ox);
        y = (1.0 - ox.abs()) * sign_nz(oy);
    }
    Vec3::new(x, y, z).normalize()
}

#[inline]
fn sign_nz(v: f32) -> f32 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverse_is_identity() {
        assert_eq!(Mat4::IDENTITY.inverse().unwrap(), Mat4::IDENTITY);
    }

    #[test]
    fn uniform_scale_inverse() {
        let inv = Mat4::scale(Vec3::splat(2.0)).inverse().unwrap();
        assert_eq!(inv, Mat4::scale(Vec3::splat(0.5)));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Mat4::scale(Vec3::new(1.0, 0.0, 1.0));
        assert!(matches!(m.inverse(), Err(Error::NonInvertibleTransform)));
    }

    #[test]
    fn composed_inverse_round_trips() {
        let m = Mat4::translation(Vec3::new(1.0, -2.0, 3.0))
            .mul(&Mat4::rotation_y(0.7))
            .mul(&Mat4::scale(Vec3::new(2.0, 0.5, 3.0)));
        let p = m.mul(&m.inverse().unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.m[i][j] - want).abs() < 1e-6, "{i},{j}: {}", p.m[i][j]);
            }
        }
    }

    #[test]
    fn octahedral_round_trip() {
        for n in [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(1.0, 2.0, -3.0).normalize(),
            Vec3::new(-0.3, 0.9, 0.1).normalize(),
        ] {
            let d = oct_decode(oct_encode(n));
            assert!((d - n).length() < 1e-5, "{n:?} -> {d:?}");
        }
    }

    #[test]
    fn ray_overlap_clips_to_interval() {
        let b = Aabb::unit();
        let r = Ray::new(Vec3::new(0.5, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 10.0);
        assert_eq!(b.ray_overlap(&r), Some((1.0, 2.0)));
        let r = Ray::new(Vec3::new(2.0, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 10.0);
        assert_eq!(b.ray_overlap(&r), None);
    }
}
