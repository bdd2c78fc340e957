use bytemuck::{Pod, Zeroable};

use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Vec3};
use crate::parallel::Exec;
use crate::scene::{PrimHit, PrimitiveIntersector};

use super::{crosses_surface, gradient_normal, intersect_voxel_newton, ray64, sdf_hit, trilinear, LatticeSamples, LocalRay, SdfGrid};

/// One surface voxel with 8-bit corner distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Pod, Zeroable)]
#[repr(C)]
pub struct SvsNode {
    /// Lattice coordinates at `depth` (voxel size `2^-depth`).
    pub pos: [u32; 3],
    pub depth: u32,
    pub corners: [u8; 8],
}

impl SvsNode {
    #[inline]
    pub fn size(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    #[inline]
    pub fn min(&self) -> [f64; 3] {
        let h = self.size();
        self.pos.map(|p| p as f64 * h)
    }

    pub fn bounds(&self) -> Aabb {
        let h = self.size() as f32;
        let min = Vec3::new(self.pos[0] as f32 * h, self.pos[1] as f32 * h, self.pos[2] as f32 * h);
        Aabb::new(min, min + Vec3::splat(h))
    }

    pub fn dequantized(&self) -> [f64; 8] {
        let h = self.size();
        self.corners.map(|c| f64::from(dequantize(c, h)))
    }
}

/// Largest distance magnitude representable for a voxel of size `h`.
#[inline]
pub fn quantization_range(h: f64) -> f64 {
    3f64.sqrt() * h
}

/// Maps a distance to 8 bits over `[-sqrt(3) h, +sqrt(3) h]`. The 256 levels
/// sit at `(code - 127.5) / 127.5 * range`, so no level is zero and the sign
/// of every input survives the round trip.
pub fn quantize(v: f32, h: f64) -> u8 {
    let r = quantization_range(h);
    let x = f64::from(v) / r * 127.5 + 127.5;
    // Tiny magnitudes can round onto the wrong side of 127.5.
    if v < 0.0 {
        x.round().clamp(0.0, 127.0) as u8
    } else {
        x.round().clamp(128.0, 255.0) as u8
    }
}

pub fn dequantize(code: u8, h: f64) -> f32 {
    ((f64::from(code) - 127.5) / 127.5 * quantization_range(h)) as f32
}

/// Sparse voxel set: only voxels the surface passes through.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVoxelSet {
    pub nodes: Vec<SvsNode>,
}

impl SparseVoxelSet {
    pub fn view(&self) -> SvsView<'_> {
        SvsView { nodes: &self.nodes }
    }

    /// Interpolated distance of voxel `prim` at an object-space point.
    pub fn eval_voxel(&self, prim: u32, p: [f64; 3]) -> f64 {
        let n = &self.nodes[prim as usize];
        let h = n.size();
        let min = n.min();
        let local = [(p[0] - min[0]) / h, (p[1] - min[1]) / h, (p[2] - min[2]) / h];
        trilinear(&n.dequantized(), local)
    }
}

/// Builds the voxel set at lattice depth `depth` from a dense grid.
///
/// Corners are sampled from the grid at the lattice vertices; a voxel is kept
/// when its corner samples straddle the surface. Voxels are emitted in lattice
/// order, x fastest.
pub fn svs_from_grid(exec: Exec, grid: &SdfGrid, depth: u32) -> Result<SparseVoxelSet> {
    grid.validate()?;
    if depth > 10 {
        return Err(Error::InvalidGeometry(format!("SVS depth {depth} exceeds 10")));
    }
    let samples = LatticeSamples::from_grid(exec, grid, depth);
    let n = samples.cells;
    let h = (-(depth as f64)).exp2();
    let mut nodes = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let c = samples.corners([x, y, z], 1);
                if crosses_surface(&c) {
                    nodes.push(SvsNode {
                        pos: [x as u32, y as u32, z as u32],
                        depth,
                        corners: c.map(|v| quantize(v, h)),
                    });
                }
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptySdfSurface);
    }
    Ok(SparseVoxelSet { nodes })
}

#[derive(Clone, Copy, Debug)]
pub struct SvsView<'a> {
    pub nodes: &'a [SvsNode],
}

impl SvsView<'_> {
    pub fn prim_bounds(&self) -> Vec<Aabb> {
        self.nodes.iter().map(SvsNode::bounds).collect()
    }
}

impl PrimitiveIntersector for SvsView<'_> {
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let node = &self.nodes[prim as usize];
        let h = node.size();
        let (o, d) = ray64(ray);
        let local = LocalRay::into_cell(o, d, node.min(), [h; 3]);
        let (t0, t1) = local.clip_unit(ray.t_near.into(), f64::INFINITY)?;
        let corners = node.dequantized();
        let t = intersect_voxel_newton(&corners, &local, t0, t1)?;
        let hit = sdf_hit(t, gradient_normal(&corners, local.at(t), [h; 3], ray.dir));
        (hit.t >= ray.t_near && hit.t <= t_max).then_some(hit)
    }
}
