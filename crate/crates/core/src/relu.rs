//! Voxel radiance fields rendered through the LBVH.
//!
//! Every voxel above the density threshold becomes one unit-lattice box and
//! one BVH leaf. A ray gathers the overlap segment of every voxel it crosses,
//! orders them front to back, and composites one sample per voxel (the value
//! stored for the voxel centre) with the emission-absorption model:
//!
//! ```text
//! a = 1 - exp(-sigma * len);   C += T * a * rgb;   T *= exp(-sigma * len)
//! ```
//!
//! Rays whose transmittance drops below [`MIN_TRANSMITTANCE`] stop early and
//! report a transmittance of exactly 0.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::lbvh::{self, BuildOptions, LbvhTree};
use crate::math::{oct_encode, Aabb, Ray, Vec3};
use crate::parallel::Exec;
use crate::scene::{PrimHit, PrimitiveIntersector};
use crate::traversal;

pub const MIN_TRANSMITTANCE: f32 = 1e-4;

/// Dense input field: per cell `(sigma, r, g, b)`, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct RfGrid {
    pub dims: [u32; 3],
    pub threshold: f32,
    pub cells: Vec<[f32; 4]>,
}

impl RfGrid {
    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidGeometry(format!("field dims {:?} must be positive", self.dims)));
        }
        let n: usize = self.dims.iter().map(|&d| d as usize).product();
        if self.cells.len() != n {
            return Err(Error::InvalidGeometry(format!("field has {} cells, dims need {n}", self.cells.len())));
        }
        if self.cells.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidGeometry("field values must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Sparse field of non-empty voxels plus its BVH (one voxel per leaf).
#[derive(Clone, Debug, PartialEq)]
pub struct RfField {
    pub dims: [u32; 3],
    pub positions: Vec<[u32; 3]>,
    /// `(sigma, r, g, b)` per voxel.
    pub data: Vec<[f32; 4]>,
    pub tree: LbvhTree,
}

#[inline]
pub fn voxel_bounds(pos: [u32; 3]) -> Aabb {
    let min = Vec3::new(pos[0] as f32, pos[1] as f32, pos[2] as f32);
    Aabb::new(min, min + Vec3::ONE)
}

/// Keeps voxels with `sigma > threshold` (in lattice order) and builds a BVH
/// with exactly one voxel per leaf.
pub fn rf_build(exec: Exec, grid: &RfGrid, threshold: f32) -> Result<RfField> {
    grid.validate()?;
    let [nx, ny, _] = grid.dims.map(|d| d as usize);
    let mut positions = Vec::new();
    let mut data = Vec::new();
    for (i, cell) in grid.cells.iter().enumerate() {
        if cell[0] > threshold {
            positions.push([(i % nx) as u32, (i / nx % ny) as u32, (i / (nx * ny)) as u32]);
            data.push(*cell);
        }
    }
    if positions.is_empty() {
        return Err(Error::EmptyField);
    }
    let boxes: Vec<Aabb> = positions.iter().map(|&p| voxel_bounds(p)).collect();
    let tree = lbvh::build_from_boxes(&boxes, BuildOptions::one_per_primitive(exec))?;
    Ok(RfField {
        dims: grid.dims,
        positions,
        data,
        tree,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfSample {
    pub rgb: [f32; 3],
    pub transmittance: f32,
}

/// Overlap of a ray with one voxel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfSegment {
    pub t0: f32,
    pub t1: f32,
    pub voxel: u32,
}

/// Front-to-back order: entry parameter, then voxel index.
pub fn segment_order(a: &RfSegment, b: &RfSegment) -> Ordering {
    a.t0.total_cmp(&b.t0).then(a.voxel.cmp(&b.voxel))
}

impl RfField {
    pub fn view(&self) -> RfView<'_> {
        RfView {
            positions: &self.positions,
            data: &self.data,
        }
    }

    /// Voxel segments hit by the ray, gathered through the BVH and sorted
    /// front to back. Zero-length overlaps are dropped.
    pub fn segments(&self, ray: &Ray) -> Result<Vec<RfSegment>> {
        ray.validate()?;
        let mut segs = Vec::new();
        traversal::for_each_overlapping_leaf(&self.tree, ray, |node| {
            for &v in self.tree.leaf_prims(node) {
                if let Some((t0, t1)) = voxel_bounds(self.positions[v as usize]).ray_overlap(ray) {
                    if t1 > t0 {
                        segs.push(RfSegment { t0, t1, voxel: v });
                    }
                }
            }
        })?;
        segs.sort_by(segment_order);
        Ok(segs)
    }
}

/// Renders one ray through the field.
pub fn rf_render_ray(field: &RfField, ray: &Ray) -> Result<RfSample> {
    let segs = field.segments(ray)?;
    let dir_len = ray.dir.length();
    let mut rgb = [0.0f32; 3];
    let mut trans = 1.0f32;
    for s in &segs {
        let [sigma, r, g, b] = field.data[s.voxel as usize];
        let len = (s.t1 - s.t0) * dir_len;
        let att = (-sigma * len).exp();
        let w = trans * (1.0 - att);
        rgb[0] += w * r;
        rgb[1] += w * g;
        rgb[2] += w * b;
        trans *= att;
        if trans < MIN_TRANSMITTANCE {
            trans = 0.0;
            break;
        }
    }
    Ok(RfSample {
        rgb,
        transmittance: trans,
    })
}

/// Borrowed voxels; as scene geometry each voxel is an opaque box.
#[derive(Clone, Copy, Debug)]
pub struct RfView<'a> {
    pub positions: &'a [[u32; 3]],
    pub data: &'a [[f32; 4]],
}

impl RfView<'_> {
    pub fn prim_bounds(&self) -> Vec<Aabb> {
        self.positions.iter().map(|&p| voxel_bounds(p)).collect()
    }
}

impl PrimitiveIntersector for RfView<'_> {
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let b = voxel_bounds(self.positions[prim as usize]);
        let clipped = Ray { t_far: t_max, ..*ray };
        let (t0, _) = b.ray_overlap(&clipped)?;
        // Entry face: the axis whose slab entry equals t0.
        let inv = ray.inv_dir();
        let mut normal = -ray.dir.normalize();
        for k in 0..3 {
            let a = (b.min[k] - ray.origin[k]) * inv[k];
            let c = (b.max[k] - ray.origin[k]) * inv[k];
            if a.min(c) == t0 {
                let mut n = [0.0f32; 3];
                n[k] = if ray.dir[k] > 0.0 { -1.0 } else { 1.0 };
                normal = Vec3::from_array(n);
                break;
            }
        }
        Some(PrimHit {
            t: t0,
            coords: oct_encode(normal),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_with(dims: [u32; 3], f: impl Fn(usize) -> [f32; 4]) -> RfGrid {
        let n = dims.iter().map(|&d| d as usize).product();
        RfGrid {
            dims,
            threshold: 0.0,
            cells: (0..n).map(f).collect(),
        }
    }

    #[test]
    fn all_zero_density_is_error() {
        let g = grid_with([4, 4, 4], |_| [0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(rf_build(Exec::Parallel, &g, 0.0), Err(Error::EmptyField)));
    }

    #[test]
    fn single_voxel_single_leaf() {
        let g = grid_with([3, 3, 3], |i| if i == 13 { [1.0, 0.5, 0.5, 0.5] } else { [0.0; 4] });
        let f = rf_build(Exec::Parallel, &g, 0.0).unwrap();
        assert_eq!(f.positions, [[1, 1, 1]]);
        assert_eq!(f.tree.nodes.len(), 1);
    }

    #[test]
    fn miss_is_black_and_transparent() {
        let g = grid_with([2, 2, 2], |_| [1.0, 1.0, 0.0, 0.0]);
        let f = rf_build(Exec::Parallel, &g, 0.0).unwrap();
        let ray = Ray::new(Vec3::new(5.0, 5.0, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 100.0);
        assert_eq!(
            rf_render_ray(&f, &ray).unwrap(),
            RfSample {
                rgb: [0.0; 3],
                transmittance: 1.0
            }
        );
    }

    #[test]
    fn saturated_voxel_returns_its_colour() {
        let g = grid_with([1, 1, 1], |_| [1e6, 0.2, 0.4, 0.8]);
        let f = rf_build(Exec::Parallel, &g, 0.0).unwrap();
        let ray = Ray::new(Vec3::new(0.5, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 100.0);
        let s = rf_render_ray(&f, &ray).unwrap();
        assert_eq!(s.rgb, [0.2, 0.4, 0.8]);
        assert_eq!(s.transmittance, 0.0);
    }

    #[test]
    fn opaque_box_hit_reports_entry_face() {
        let g = grid_with([1, 1, 1], |_| [1.0, 1.0, 1.0, 1.0]);
        let f = rf_build(Exec::Parallel, &g, 0.0).unwrap();
        let ray = Ray::new(Vec3::new(0.5, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 100.0);
        let h = f.view().intersect_prim(0, &ray, 100.0).unwrap();
        assert_eq!(h.t, 1.0);
        assert_eq!(crate::math::oct_decode(h.coords), Vec3::new(0.0, 0.0, -1.0));
    }
}
