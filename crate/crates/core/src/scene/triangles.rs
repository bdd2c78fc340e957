use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Vec3};

use super::{PrimHit, PrimitiveIntersector};

/// Indexed triangle mesh.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<[f32; 3]>,
    pub indices: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(positions: Vec<[f32; 3]>, indices: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = Self { positions, indices };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidGeometry("triangle mesh has no triangles".into()));
        }
        let n = self.positions.len() as u32;
        if let Some(t) = self.indices.iter().position(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidGeometry(format!("triangle {t} references a missing vertex")));
        }
        if self.positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("mesh positions must be finite".into()));
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.indices.len()
    }

    pub fn view(&self) -> TriangleView<'_> {
        TriangleView {
            positions: &self.positions,
            indices: &self.indices,
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.positions
            .iter()
            .fold(Aabb::EMPTY, |b, &p| b.grow(Vec3::from_array(p)))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TriangleView<'a> {
    pub positions: &'a [[f32; 3]],
    pub indices: &'a [[u32; 3]],
}

impl TriangleView<'_> {
    #[inline]
    pub fn vertices(&self, prim: u32) -> [Vec3; 3] {
        self.indices[prim as usize].map(|i| Vec3::from_array(self.positions[i as usize]))
    }

    pub fn prim_bounds(&self) -> Vec<Aabb> {
        (0..self.indices.len() as u32)
            .map(|p| Aabb::from_points(&self.vertices(p)))
            .collect()
    }
}

/// Moller-Trumbore, two-sided. Returns `(t, u, v)` for hits with
/// `t_near <= t <= t_max`; edges and vertices count as inside.
#[inline]
pub fn intersect_triangle(ray: &Ray, v: &[Vec3; 3], t_max: f32) -> Option<(f32, f32, f32)> {
    let e1 = v[1] - v[0];
    let e2 = v[2] - v[0];
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - v[0];
    let u = s.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let w = ray.dir.dot(q) * inv_det;
    if w < 0.0 || u + w > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t >= ray.t_near && t <= t_max).then_some((t, u, w))
}

impl PrimitiveIntersector for TriangleView<'_> {
    #[inline]
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let v = self.vertices(prim);
        intersect_triangle(ray, &v, t_max).map(|(t, u, w)| PrimHit { t, coords: [u, w] })
    }

    fn object_normal(&self, prim: u32, _coords: [f32; 2]) -> Vec3 {
        let v = self.vertices(prim);
        (v[1] - v[0]).cross(v[2] - v[0]).normalize()
    }
}
