use bytemuck::{Pod, Zeroable};

use crate::error::{Error, Result};
use crate::lbvh::LEAF_MARKER;
use crate::math::{Aabb, Ray, Vec3};
use crate::parallel::Exec;
use crate::scene::{PrimHit, PrimitiveIntersector};

use super::{crosses_surface, gradient_normal, intersect_voxel_newton, ray64, sdf_hit, trilinear, LatticeSamples, LocalRay, SdfGrid};

#[derive(Clone, Copy, Debug)]
pub struct FrameOctreeParams {
    pub max_depth: u32,
    /// A node becomes a leaf once its corner interpolation reproduces every
    /// grid sample it covers to within this distance.
    pub tolerance: f32,
}

impl Default for FrameOctreeParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            tolerance: 5e-4,
        }
    }
}

/// Octree node; children are stored as 8 consecutive nodes starting at
/// `first_child` (x fastest), or `LEAF_MARKER` for leaves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OctreeNode {
    pub first_child: u32,
    pub corners: [f32; 8],
}

impl OctreeNode {
    pub fn is_leaf(&self) -> bool {
        self.first_child == LEAF_MARKER
    }
}

/// A surface-crossing leaf flattened for intersection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Pod, Zeroable)]
#[repr(C)]
pub struct FrameLeaf {
    pub min: [f32; 3],
    pub size: f32,
    pub corners: [f32; 8],
}

impl FrameLeaf {
    pub fn bounds(&self) -> Aabb {
        let min = Vec3::from_array(self.min);
        Aabb::new(min, min + Vec3::splat(self.size))
    }

    fn min64(&self) -> [f64; 3] {
        self.min.map(f64::from)
    }
}

/// Octree with distances stored at the 8 corners of every leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameOctree {
    pub nodes: Vec<OctreeNode>,
    /// Leaves whose corners straddle the surface, in depth-first order.
    pub leaves: Vec<FrameLeaf>,
}

impl FrameOctree {
    /// Top-down subdivision of a dense grid.
    ///
    /// Grid values are taken at the vertices of the `2^max_depth` lattice.
    /// A node stops subdividing when it reaches `max_depth`, when every sample
    /// it covers has the same sign, or when its corner interpolation matches
    /// those samples within `tolerance`.
    pub fn from_grid(exec: Exec, grid: &SdfGrid, params: FrameOctreeParams) -> Result<Self> {
        grid.validate()?;
        if params.max_depth > 10 {
            return Err(Error::InvalidGeometry(format!("octree depth {} exceeds 10", params.max_depth)));
        }
        let samples = LatticeSamples::from_grid(exec, grid, params.max_depth);
        let mut tree = FrameOctree {
            nodes: Vec::new(),
            leaves: Vec::new(),
        };
        tree.nodes.push(OctreeNode {
            first_child: LEAF_MARKER,
            corners: samples.corners([0; 3], samples.cells),
        });
        tree.subdivide(&samples, params, 0, [0; 3], samples.cells);
        if tree.leaves.is_empty() {
            return Err(Error::EmptySdfSurface);
        }
        Ok(tree)
    }

    fn subdivide(&mut self, s: &LatticeSamples, params: FrameOctreeParams, node: usize, base: [usize; 3], span: usize) {
        let corners = self.nodes[node].corners;
        if span > 1 && needs_split(s, &corners, base, span, params.tolerance) {
            let first = self.nodes.len();
            let half = span / 2;
            for c in 0..8 {
                let child_base = [
                    base[0] + (c & 1) * half,
                    base[1] + (c >> 1 & 1) * half,
                    base[2] + (c >> 2 & 1) * half,
                ];
                self.nodes.push(OctreeNode {
                    first_child: LEAF_MARKER,
                    corners: s.corners(child_base, half),
                });
            }
            self.nodes[node].first_child = first as u32;
            for c in 0..8 {
                let child_base = [
                    base[0] + (c & 1) * half,
                    base[1] + (c >> 1 & 1) * half,
                    base[2] + (c >> 2 & 1) * half,
                ];
                self.subdivide(s, params, first + c, child_base, half);
            }
        } else if crosses_surface(&corners) {
            let h = 1.0 / s.cells as f32;
            self.leaves.push(FrameLeaf {
                min: base.map(|b| b as f32 * h),
                size: span as f32 * h,
                corners,
            });
        }
    }

    pub fn view(&self) -> OctreeView<'_> {
        OctreeView { leaves: &self.leaves }
    }

    /// Interpolated distance of surface leaf `prim` at an object-space point.
    pub fn eval_leaf(&self, prim: u32, p: [f64; 3]) -> f64 {
        let leaf = &self.leaves[prim as usize];
        let min = leaf.min64();
        let s = f64::from(leaf.size);
        trilinear(
            &leaf.corners.map(f64::from),
            [(p[0] - min[0]) / s, (p[1] - min[1]) / s, (p[2] - min[2]) / s],
        )
    }
}

fn needs_split(s: &LatticeSamples, corners: &[f32; 8], base: [usize; 3], span: usize, tolerance: f32) -> bool {
    let c = corners.map(f64::from);
    let (mut any_neg, mut any_pos) = (false, false);
    let mut max_err = 0.0f64;
    for z in 0..=span {
        for y in 0..=span {
            for x in 0..=span {
                let v = s.at(base[0] + x, base[1] + y, base[2] + z);
                any_neg |= v < 0.0;
                any_pos |= v >= 0.0;
                let local = [x as f64 / span as f64, y as f64 / span as f64, z as f64 / span as f64];
                max_err = max_err.max((trilinear(&c, local) - f64::from(v)).abs());
            }
        }
    }
    any_neg && any_pos && max_err >= f64::from(tolerance)
}

#[derive(Clone, Copy, Debug)]
pub struct OctreeView<'a> {
    pub leaves: &'a [FrameLeaf],
}

impl OctreeView<'_> {
    pub fn prim_bounds(&self) -> Vec<Aabb> {
        self.leaves.iter().map(FrameLeaf::bounds).collect()
    }
}

impl PrimitiveIntersector for OctreeView<'_> {
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let leaf = &self.leaves[prim as usize];
        let size = [f64::from(leaf.size); 3];
        let (o, d) = ray64(ray);
        let local = LocalRay::into_cell(o, d, leaf.min64(), size);
        let (t0, t1) = local.clip_unit(ray.t_near.into(), f64::INFINITY)?;
        let corners = leaf.corners.map(f64::from);
        let t = intersect_voxel_newton(&corners, &local, t0, t1)?;
        let hit = sdf_hit(t, gradient_normal(&corners, local.at(t), size, ray.dir));
        (hit.t >= ray.t_near && hit.t <= t_max).then_some(hit)
    }
}
